import math

import numpy as np
import pytest
from scipy import integrate

from cmcrigidity import weierstrass as ws
from cmcrigidity.weierstrass import LoopSpec, catalog

TWO_PI = 2 * math.pi


def enneper_primitive(z):
    return np.array([z / 2 - z**3 / 6, 1j * (z / 2 + z**3 / 6), z**2 / 2])


def catenoid_primitive(z, base=1.0):
    def anti(w):
        return np.array([-0.5 / w - 0.5 * w, 0.5j * (-1.0 / w + w), np.log(w)])

    return anti(z) - anti(base).reshape((3,) + (1,) * np.ndim(z))


def quad_oracle(s, z0, z1):
    """Independent path integral with scipy's adaptive quadrature."""
    d = z1 - z0
    out = np.zeros(3, dtype=complex)
    for k in range(3):
        re, _ = integrate.quad(lambda t: (s.forms(z0 + t * d)[k] * d).real, 0, 1, epsabs=1e-13, epsrel=1e-13)
        im, _ = integrate.quad(lambda t: (s.forms(z0 + t * d)[k] * d).imag, 0, 1, epsabs=1e-13, epsrel=1e-13)
        out[k] = re + 1j * im
    return out


class TestCatalog:
    def test_enneper(self):
        s = catalog("enneper")
        assert s.domain.kind == "plane" and s.punctures == ()

    def test_catenoid(self):
        assert catalog("catenoid").punctures == (0j,)

    def test_helicoid_is_log_cover(self):
        s = catalog("helicoid")
        assert s.log_cover and s.simply_connected

    def test_unknown(self):
        with pytest.raises(KeyError):
            catalog("costa")

    @pytest.mark.parametrize("name", ws.CATALOG_NAMES)
    def test_invariants_hold_on_sample_grid(self, name):
        s = catalog(name)
        x = np.linspace(-2, 2, 21) + 0.013
        grid = (x[:, None] + 1j * x[None, :]).ravel()
        circles = np.concatenate([p + r * np.exp(1j * np.linspace(0, TWO_PI, 32)) for p in s.punctures for r in (1e-3, 0.1)] or [[]])
        ws.check_invariants(s, np.concatenate([grid, circles]))

    def test_invariant_check_catches_degenerate_metric(self):
        bad = ws.WeierstrassSurface("bad", lambda z: z, lambda z: 0 * z, ws.Domain("plane"))
        with pytest.raises(ValueError):
            ws.check_invariants(bad, [1 + 1j, 2.0])


class TestImmerse:
    def test_zero_length_path(self):
        for name in ws.CATALOG_NAMES:
            np.testing.assert_array_equal(ws.immerse(catalog(name), 0.7, 1.5 + 0.5j, 1.5 + 0.5j), np.zeros(3))

    def test_enneper_unit_segment(self):
        np.testing.assert_allclose(ws.immerse(catalog("enneper"), 0.0, 0j, 1 + 0j), [1 / 3, 0, 1 / 2], atol=1e-14)

    def test_matches_independent_quadrature(self):
        for name, z0, z1 in [("enneper", 0.2 - 0.1j, -1.1 + 0.8j), ("catenoid", 1.0, 0.3 + 1.2j), ("helicoid", 1.0, -0.5 + 0.4j)]:
            s = catalog(name)
            got, _ = ws.path_integral(s, [z0, z1])
            np.testing.assert_allclose(got, quad_oracle(s, z0, z1), atol=1e-11)

    def test_paths_around_neck_differ_by_flux(self):
        s = catalog("catenoid")
        upper, lower = [1.0, 1j, -1.0 + 0.2j], [1.0, -1j, -1.0 + 0.2j]
        a0 = ws.immerse(s, 0.0, 1.0, -1.0 + 0.2j, path=upper)
        b0 = ws.immerse(s, 0.0, 1.0, -1.0 + 0.2j, path=lower)
        np.testing.assert_allclose(a0, b0, atol=1e-12)
        # upper minus lower is a positive loop about 0; f_theta picks up -sin(theta) * flux
        a = ws.immerse(s, 0.4, 1.0, -1.0 + 0.2j, path=upper)
        b = ws.immerse(s, 0.4, 1.0, -1.0 + 0.2j, path=lower)
        np.testing.assert_allclose(a - b, [0, 0, -math.sin(0.4) * TWO_PI], atol=1e-10)

    def test_helicoid_is_multivalued_around_axis(self):
        s = catalog("helicoid")
        # going round the origin on the catenoid data is closed, on the helicoid it is not
        p = ws.period(catalog("catenoid"), LoopSpec.circle(0, 1))
        heli_period = 1j * p.value
        assert abs(heli_period.real[2]) == pytest.approx(TWO_PI)
        with pytest.raises(ws.DomainError):
            ws.immerse(s, 0.0, 1.0 + 0.5j, 1.0 - 0.5j, path=[1.0 + 0.5j, -1.0 + 0.5j, -1.0 - 0.5j, 1.0 - 0.5j])

    def test_path_must_connect_endpoints(self):
        with pytest.raises(ValueError):
            ws.immerse(catalog("enneper"), 0.0, 0j, 1 + 0j, path=[0j, 2 + 0j])

    def test_rejects_path_through_puncture(self):
        with pytest.raises(ws.DomainError):
            ws.immerse(catalog("catenoid"), 0.0, -1.0, 1.0)

    def test_disk_and_annulus_domains(self):
        disk = ws.WeierstrassSurface("d", lambda z: z, lambda z: z, ws.Domain("disk", radius=1.0))
        with pytest.raises(ws.DomainError):
            ws.immerse(disk, 0.0, 0j, 1.5 + 0j)
        ann = ws.WeierstrassSurface("a", lambda z: z, lambda z: 1 / z, ws.Domain("annulus", r_in=0.5, r_out=2.0))
        with pytest.raises(ws.DomainError):
            ws.immerse(ann, 0.0, 1.0, -1.0)
        with pytest.raises(ws.DomainError):
            ws.period(ann, LoopSpec.circle(0, 0.4))
        assert ws.flux(ann, LoopSpec.circle(0, 1.0)).v[2] == pytest.approx(TWO_PI)

    def test_primitive_grid_matches_closed_form(self):
        u, v = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-2.5, 2.5, 11), indexing="ij")
        z = np.exp(u + 1j * v)
        got = ws.primitive_grid(catalog("catenoid"), z, 1.0)
        expect = np.moveaxis(catenoid_primitive(z), 0, -1)
        np.testing.assert_allclose(got, expect, atol=1e-12)

    def test_primitive_matches_closed_form(self):
        rng = np.random.default_rng(2)
        z = rng.uniform(-1.5, 1.5, 30) + 1j * rng.uniform(-1.5, 1.5, 30)
        got = ws.primitive(catalog("enneper"), z, 0j)
        np.testing.assert_allclose(got, np.moveaxis(enneper_primitive(z), 0, -1), atol=1e-13)

    def test_harmonic_coordinates(self):
        # the Enneper primitive is cubic, so its five-point Laplacian is exactly zero; use the catenoid
        s = catalog("catenoid")
        errs = []
        for h in (0.1, 0.05):
            x = 0.8 + h * np.arange(-1, 2)
            y = 0.5 + h * np.arange(-1, 2)
            grid = x[:, None] + 1j * y[None, :]
            f = ws.associate_points(ws.primitive_grid(s, grid, 1.0), 0.8)
            lap = (f[0, 1] + f[2, 1] + f[1, 0] + f[1, 2] - 4 * f[1, 1]) / h**2
            errs.append(np.abs(lap).max())
        assert errs[1] < 1e-1
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


class TestPeriodAndFlux:
    def test_enneper_periods_vanish(self):
        for loop in (LoopSpec.circle(0, 1), LoopSpec.circle(0.3 - 0.2j, 2.5), LoopSpec.polyline([0, 1, 1 + 1j, 1j])):
            assert np.abs(ws.period(catalog("enneper"), loop).value).max() < 1e-10

    def test_catenoid_residue(self):
        # residues at 0: phi1 = (1/z^2 - 1)/2 -> 0, phi2 = i(1/z^2 + 1)/2 -> 0, phi3 = 1/z -> 1
        p = ws.period(catalog("catenoid"), LoopSpec.circle(0, 1))
        np.testing.assert_allclose(p.value, [0, 0, 2j * math.pi], atol=1e-8)
        assert p.error < 1e-8

    def test_catenoid_loop_not_enclosing_puncture(self):
        assert np.abs(ws.period(catalog("catenoid"), LoopSpec.circle(3, 0.5)).value).max() < 1e-10

    def test_flux_values(self):
        f = ws.flux(catalog("catenoid"), LoopSpec.circle(0, 1))
        np.testing.assert_allclose(f.v, [0, 0, TWO_PI], atol=1e-8)
        np.testing.assert_allclose(f.real_period, 0, atol=1e-8)
        assert ws.flux(catalog("enneper"), LoopSpec.circle(0, 1)).norm < 1e-10

    def test_orientation(self):
        s = catalog("catenoid")
        for loop in (LoopSpec.circle(0.1, 1.3), LoopSpec.polyline([1, 1j, -1, -1j])):
            a = ws.period(s, loop).value
            b = ws.period(s, loop.reversed()).value
            np.testing.assert_allclose(a, -b, atol=1e-12)
        np.testing.assert_allclose(ws.flux(s, LoopSpec.circle(0, 1, ccw=False)).v, [0, 0, -TWO_PI], atol=1e-8)

    def test_additivity(self):
        s = catalog("catenoid")
        sq = [1 - 1j, 1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]
        whole = ws.period(s, LoopSpec.polyline(sq))
        a, ea = ws.path_integral(s, sq[:3])
        b, eb = ws.path_integral(s, sq[2:])
        assert np.abs(whole.value - (a + b)).max() <= whole.error + ea + eb + 1e-14

    def test_homotopy_invariance(self):
        s = catalog("catenoid")
        ref = ws.period(s, LoopSpec.circle(0, 1)).value
        for loop in (LoopSpec.circle(0.2 + 0.1j, 2.0), LoopSpec.circle(0, 1e-3), LoopSpec.polyline([2, 2j, -2, -2j])):
            np.testing.assert_allclose(ws.period(s, loop).value, ref, atol=1e-9)

    def test_rejects_loop_near_puncture(self):
        with pytest.raises(ws.DomainError):
            ws.period(catalog("catenoid"), LoopSpec.circle(1, 1 - 1e-7))

    def test_helicoid_loop_across_cut_rejected(self):
        with pytest.raises(ws.DomainError):
            ws.period(catalog("helicoid"), LoopSpec.circle(0, 1))
        assert np.abs(ws.period(catalog("helicoid"), LoopSpec.circle(2, 1)).value).max() < 1e-10

    def test_nonconvergence_is_reported(self):
        # an undeclared pole on the path makes the integral divergent
        pole = ws.WeierstrassSurface("pole", lambda z: z, lambda z: 1 / (z - 0.5), ws.Domain("plane"))
        with pytest.raises(ws.QuadratureError):
            ws.path_integral(pole, [0j, 1 + 0j])

    def test_loop_spec_validation(self):
        with pytest.raises(ValueError):
            LoopSpec.circle(0, -1)
        with pytest.raises(ValueError):
            LoopSpec("polyline", vertices=(0j, 1 + 0j))
        assert LoopSpec.polyline([0, 1, 1j]).vertices[-1] == 0


class TestAssociateWellDefined:
    def test_enneper(self):
        ok, witness = ws.associate_well_defined(catalog("enneper"), [LoopSpec.circle(0, 1), LoopSpec.circle(2, 1)])
        assert ok and witness is None

    def test_catenoid_neck(self):
        ok, (loop, fv) = ws.associate_well_defined(catalog("catenoid"), [LoopSpec.circle(3, 1), LoopSpec.circle(0, 1)])
        assert not ok
        assert loop.center == 0
        np.testing.assert_allclose(fv.v, [0, 0, TWO_PI], atol=1e-8)

    def test_helicoid_empty_basis(self):
        assert ws.associate_well_defined(catalog("helicoid"), []) == (True, None)


def jacobian_fd(s, z, h=1e-5):
    """Columns d/du, d/dv of the theta = 0 immersion by central differences."""
    du = ws.immerse(s, 0.0, z - h, z + h) / (2 * h)
    dv = ws.immerse(s, 0.0, z - 1j * h, z + 1j * h) / (2 * h)
    return np.stack([du, dv], axis=1)


class TestMetricFactor:
    def test_values(self):
        assert ws.metric_factor(catalog("enneper"), 1.0) == 1.0
        assert ws.metric_factor(catalog("catenoid"), 1.0) == 1.0

    def test_zero_of_gauss_map_excluded(self):
        with pytest.raises(ws.DomainError):
            ws.metric_factor(catalog("enneper"), 0.0)

    def test_puncture_excluded(self):
        with pytest.raises(ws.DomainError):
            ws.metric_factor(catalog("catenoid"), 1e-8)

    @pytest.mark.parametrize("name", ws.CATALOG_NAMES)
    def test_matches_jacobian_norm(self, name):
        s = catalog(name)
        for z in (0.7 + 0.4j, 1.3 - 0.9j, 0.5 + 0.1j):
            jac = jacobian_fd(s, z)
            assert np.linalg.norm(jac, 2) == pytest.approx(ws.metric_factor(s, z), rel=1e-6)

    def test_homothety(self):
        s = catalog("catenoid")
        assert ws.metric_factor(s.scaled(3.0), 1.2) == pytest.approx(3 * ws.metric_factor(s, 1.2))
