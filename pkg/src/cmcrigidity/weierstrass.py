"""Minimal immersions from Weierstrass data, their associate family, periods and flux.

A surface is given by a Gauss map ``g`` and the density ``eta`` of the height
differential ``dh = eta(z) dz``.  The holomorphic 1-forms are::

    phi1 = (1/g - g) eta / 2,   phi2 = i (1/g + g) eta / 2,   phi3 = eta

and the associate immersion at angle ``theta`` is
``Re(exp(i theta) * integral(phi))``.

Path integrals use adaptive composite Gauss-Legendre quadrature on the unit
parameter interval of each segment or circular arc; circles are integrated in
their angle parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

PUNCTURE_CLEARANCE = 1e-6
QUAD_TOL = 1e-10
QUAD_MAX_DEPTH = 20
ZERO_TOL = 1e-8

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


class DomainError(ValueError):
    """A path or point leaves the surface's parameter domain or hits a puncture."""


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to meet its tolerance within the depth limit."""


@dataclass(frozen=True)
class Domain:
    """Planar parameter region: ``plane``, ``disk``, ``annulus`` or ``punctured``.

    For ``punctured`` the excluded points live on the surface (``punctures``);
    the region itself is the whole plane.
    """

    kind: str = "plane"
    center: complex = 0j
    radius: float = math.inf
    r_in: float = 0.0
    r_out: float = math.inf

    def __post_init__(self):
        if self.kind not in ("plane", "disk", "annulus", "punctured"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus" and not 0 <= self.r_in < self.r_out:
            raise ValueError("annulus needs 0 <= r_in < r_out")

    def contains(self, z) -> np.ndarray:
        d = np.abs(np.asarray(z) - self.center)
        if self.kind == "disk":
            return d < self.radius
        if self.kind == "annulus":
            return (d > self.r_in) & (d < self.r_out)
        return np.isfinite(d)


@dataclass(frozen=True)
class WeierstrassSurface:
    name: str
    gauss_map: Callable
    height_diff: Callable
    domain: Domain = field(default_factory=Domain)
    punctures: tuple = ()
    log_cover: bool = False
    simply_connected: bool = False
    scale: float = 1.0

    def forms(self, z) -> np.ndarray:
        """The three Weierstrass 1-form densities at ``z``, stacked on axis 0."""
        z = np.asarray(z, dtype=complex)
        g = self.gauss_map(z)
        eta = self.scale * self.height_diff(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            eg = eta / g
        ge = g * eta
        return np.stack([0.5 * (eg - ge), 0.5j * (eg + ge), eta + 0 * z])

    def scaled(self, factor: float) -> "WeierstrassSurface":
        """Homothety of the immersion by ``factor``."""
        return replace(self, scale=self.scale * factor)


@dataclass(frozen=True)
class LoopSpec:
    """Closed loop in the parameter plane: a circle or a closed polyline."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    vertices: tuple = ()
    ccw: bool = True

    def __post_init__(self):
        if self.kind == "circle":
            if not self.radius > 0:
                raise ValueError("circle radius must be positive")
        elif self.kind == "polyline":
            if len(self.vertices) < 4 or self.vertices[0] != self.vertices[-1]:
                raise ValueError("closed polyline needs >= 3 distinct vertices and first == last")
        else:
            raise ValueError(f"unknown loop kind {self.kind!r}")

    @classmethod
    def circle(cls, center: complex, radius: float, ccw: bool = True) -> "LoopSpec":
        return cls("circle", complex(center), float(radius), ccw=ccw)

    @classmethod
    def polyline(cls, vertices: Sequence[complex]) -> "LoopSpec":
        vs = tuple(complex(v) for v in vertices)
        if vs and vs[0] != vs[-1]:
            vs = vs + (vs[0],)
        return cls("polyline", vertices=vs)

    def reversed(self) -> "LoopSpec":
        if self.kind == "circle":
            return replace(self, ccw=not self.ccw)
        return replace(self, vertices=self.vertices[::-1])


@dataclass(frozen=True)
class PeriodResult:
    value: np.ndarray  # complex 3-vector
    error: float


@dataclass(frozen=True)
class FluxVector:
    v: np.ndarray
    quadrature_error: float
    real_period: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


def catalog(name: str) -> WeierstrassSurface:
    """Standard Weierstrass data for ``catenoid``, ``helicoid`` or ``enneper``.

    The helicoid is the catenoid's conjugate; it is carried on the punctured
    plane with a branch cut along the non-positive real axis, standing in for
    its universal (logarithmic) cover.
    """
    if name == "catenoid":
        return WeierstrassSurface(
            "catenoid", lambda z: z, lambda z: 1.0 / z, Domain("punctured"), punctures=(0j,)
        )
    if name == "helicoid":
        return WeierstrassSurface(
            "helicoid",
            lambda z: z,
            lambda z: 1j / z,
            Domain("punctured"),
            punctures=(0j,),
            log_cover=True,
            simply_connected=True,
        )
    if name == "enneper":
        return WeierstrassSurface(
            "enneper", lambda z: z, lambda z: z, Domain("plane"), simply_connected=True
        )
    raise KeyError(f"unknown catalog surface {name!r}; expected catenoid, helicoid or enneper")


CATALOG_NAMES = ("catenoid", "helicoid", "enneper")


# ---------------------------------------------------------------------------
# geometry checks


def _segment_distance(z0, z1, p) -> np.ndarray:
    d = z1 - z0
    dd = np.abs(d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, ((p - z0) * np.conj(d)).real / dd, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z0 + t * d - p)


def _crosses_cut(z0, z1) -> np.ndarray:
    """Whether segments touch the branch cut ``(-inf, 0]``."""
    y0, y1 = z0.imag, z1.imag
    x0, x1 = z0.real, z1.real
    on_cut0 = (y0 == 0) & (x0 <= 0)
    on_cut1 = (y1 == 0) & (x1 <= 0)
    straddle = (y0 * y1 < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (x1 - x0) * (y0 / (y0 - y1))
    return on_cut0 | on_cut1 | (straddle & (xc <= 0))


def _check_segments(s: WeierstrassSurface, z0, z1) -> None:
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
    dom = s.domain
    if not (np.all(dom.contains(z0)) and np.all(dom.contains(z1))):
        raise DomainError("path endpoint outside the surface domain")
    if dom.kind == "annulus" and np.any(_segment_distance(z0, z1, dom.center) <= dom.r_in):
        raise DomainError("path crosses the inner boundary of the annulus")
    for p in s.punctures:
        if np.any(_segment_distance(z0, z1, p) < PUNCTURE_CLEARANCE):
            raise DomainError(f"path passes within {PUNCTURE_CLEARANCE:g} of puncture {p}")
    if s.log_cover and np.any(_crosses_cut(z0, z1)):
        raise DomainError("path crosses the branch cut of the logarithmic cover")


def _check_loop(s: WeierstrassSurface, loop: LoopSpec) -> None:
    if loop.kind == "polyline":
        vs = np.array(loop.vertices)
        _check_segments(s, vs[:-1], vs[1:])
        return
    c, rho = loop.center, loop.radius
    dom = s.domain
    d = abs(c - dom.center)
    if dom.kind == "disk" and d + rho >= dom.radius:
        raise DomainError("loop leaves the disk")
    if dom.kind == "annulus" and (d + rho >= dom.r_out or abs(d - rho) <= dom.r_in):
        raise DomainError("loop leaves the annulus")
    for p in s.punctures:
        if abs(abs(p - c) - rho) < PUNCTURE_CLEARANCE:
            raise DomainError(f"loop passes within {PUNCTURE_CLEARANCE:g} of puncture {p}")
    if s.log_cover and abs(c.imag) <= rho and c.real - math.sqrt(rho**2 - c.imag**2) <= 0:
        raise DomainError("loop crosses the branch cut of the logarithmic cover")


# ---------------------------------------------------------------------------
# quadrature


def _adaptive_gl(integrand, n_paths: int, tol: float, max_depth: int):
    """Integrate ``integrand(ids, t)`` over ``t in [0, 1]`` for each path id.

    ``integrand`` returns complex values of shape ``(3, m)``.  Panels are
    bisected until a 16-point rule and its two-panel refinement agree to
    ``tol`` times the panel width (or to round-off of the panel integral).
    """
    total = np.zeros((n_paths, 3), dtype=complex)
    err = np.zeros(n_paths)
    ids = np.arange(n_paths)
    lo = np.zeros(n_paths)
    hi = np.ones(n_paths)
    eps = np.finfo(float).eps

    def rule(ids, a, b):
        half = 0.5 * (b - a)
        t = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
        vals = integrand(np.repeat(ids, _GL_ORDER), t.ravel()).reshape(3, len(ids), _GL_ORDER)
        weighted = vals * _GL_W[None, None, :]
        return (weighted.sum(axis=2) * half[None, :]).T, (np.abs(weighted).sum(axis=2) * half[None, :]).T

    coarse, _ = rule(ids, lo, hi)
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        left, labs = rule(ids, lo, mid)
        right, rabs = rule(ids, mid, hi)
        fine = left + right
        diff = np.abs(fine - coarse).max(axis=1)
        floor = 64 * eps * (labs + rabs).max(axis=1)
        ok = diff <= np.maximum(tol * (hi - lo), floor)
        if depth == max_depth and not np.all(ok):
            raise QuadratureError(
                f"adaptive quadrature did not converge within depth {max_depth} "
                f"(worst panel difference {diff[~ok].max():.3e})"
            )
        np.add.at(total, ids[ok], fine[ok])
        np.add.at(err, ids[ok], diff[ok])
        bad = ~ok
        if not np.any(bad):
            break
        ids = np.concatenate([ids[bad], ids[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
    return total, err


def _segment_integrals(s: WeierstrassSurface, z0, z1, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH):
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
    d = z1 - z0

    def integrand(ids, t):
        return s.forms(z0[ids] + t * d[ids]) * d[ids]

    return _adaptive_gl(integrand, len(z0), tol, max_depth)


def _circle_integral(s: WeierstrassSurface, loop: LoopSpec, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH):
    sign = 1.0 if loop.ccw else -1.0
    c, rho = loop.center, loop.radius

    def integrand(ids, t):
        e = np.exp(sign * 2j * math.pi * t)
        return s.forms(c + rho * e) * (sign * 2j * math.pi * rho * e)

    total, err = _adaptive_gl(integrand, 1, tol, max_depth)
    return total[0], float(err[0])


# ---------------------------------------------------------------------------
# public operations


def path_integral(s: WeierstrassSurface, path: Sequence[complex], tol=QUAD_TOL) -> tuple[np.ndarray, float]:
    """Integral of the Weierstrass forms along a polyline, with error estimate."""
    vs = np.asarray(path, dtype=complex)
    if vs.ndim != 1 or vs.size < 1:
        raise ValueError("path must be a non-empty sequence of complex vertices")
    if vs.size == 1:
        return np.zeros(3, dtype=complex), 0.0
    _check_segments(s, vs[:-1], vs[1:])
    vals, err = _segment_integrals(s, vs[:-1], vs[1:], tol)
    return vals.sum(axis=0), float(err.sum())


def immerse(
    s: WeierstrassSurface,
    theta: float,
    base: complex,
    z: complex,
    path: Sequence[complex] | None = None,
) -> np.ndarray:
    """Point ``Re(exp(i theta) * integral_base^z phi)`` of the associate immersion.

    ``path`` is a polyline from ``base`` to ``z``; the straight segment is used
    when omitted.
    """
    if path is None:
        path = [base, z]
    elif path[0] != base or path[-1] != z:
        raise ValueError("path must start at base and end at z")
    val, _ = path_integral(s, path)
    return (np.exp(1j * theta) * val).real


def primitive(s: WeierstrassSurface, zs, base: complex) -> np.ndarray:
    """Complex primitive ``integral_base^z phi`` along straight segments, for many ``z``.

    Returns shape ``zs.shape + (3,)``.
    """
    zs = np.asarray(zs, dtype=complex)
    flat = zs.ravel()
    b = np.full(flat.shape, complex(base))
    _check_segments(s, b, flat)
    vals, _ = _segment_integrals(s, b, flat)
    return vals.reshape(zs.shape + (3,))


def primitive_grid(s: WeierstrassSurface, zgrid, base: complex) -> np.ndarray:
    """Complex primitive on a 2-D parameter grid, integrated along grid edges.

    Path: ``base`` to ``zgrid[0, 0]``, down the first column, then along each
    row.  Cheaper and better conditioned than independent rays for large grids.
    """
    zgrid = np.asarray(zgrid, dtype=complex)
    if zgrid.ndim != 2:
        raise ValueError("zgrid must be two-dimensional")
    start, _ = path_integral(s, [base, zgrid[0, 0]])
    col0, col1 = zgrid[:-1, 0], zgrid[1:, 0]
    row0, row1 = zgrid[:, :-1].ravel(), zgrid[:, 1:].ravel()
    _check_segments(s, np.concatenate([col0, row0]), np.concatenate([col1, row1]))
    col, _ = _segment_integrals(s, col0, col1)
    row, _ = _segment_integrals(s, row0, row1)
    out = np.zeros(zgrid.shape + (3,), dtype=complex)
    out[0, 0] = start
    out[1:, 0] = start + np.cumsum(col, axis=0)
    row = row.reshape(zgrid.shape[0], zgrid.shape[1] - 1, 3)
    out[:, 1:] = out[:, :1] + np.cumsum(row, axis=1)
    return out


def associate_points(prim: np.ndarray, theta: float) -> np.ndarray:
    """Real points of the ``theta`` associate immersion from a complex primitive."""
    return np.cos(theta) * prim.real - np.sin(theta) * prim.imag


def period(s: WeierstrassSurface, loop: LoopSpec, tol=QUAD_TOL) -> PeriodResult:
    """Contour integral of the Weierstrass forms around ``loop``."""
    _check_loop(s, loop)
    if loop.kind == "circle":
        val, err = _circle_integral(s, loop, tol)
    else:
        val, err = path_integral(s, loop.vertices, tol)
    return PeriodResult(np.asarray(val), err)


def flux(s: WeierstrassSurface, loop: LoopSpec, tol=QUAD_TOL) -> FluxVector:
    """Flux of ``loop``: the imaginary part of its period.

    A counterclockwise loop around the catenoid's neck has flux ``(0, 0, 2 pi)``.
    """
    p = period(s, loop, tol)
    return FluxVector(p.value.imag.copy(), p.error, p.value.real.copy())


def associate_well_defined(
    s: WeierstrassSurface, basis: Sequence[LoopSpec], tol: float = ZERO_TOL
) -> tuple[bool, tuple[LoopSpec, FluxVector] | None]:
    """Whether every associate immersion descends to the surface.

    ``basis`` must generate the surface's first homology; that is the
    caller's responsibility.  Returns the first loop with nonzero flux as a
    witness when the answer is no.
    """
    for loop in basis:
        fv = flux(s, loop)
        if fv.norm > tol:
            return False, (loop, fv)
    return True, None


def metric_factor(s: WeierstrassSurface, z: complex) -> float:
    """Conformal factor ``(|g| + 1/|g|) |eta| / 2`` of every associate immersion at ``z``."""
    z = complex(z)
    for p in s.punctures:
        if abs(z - p) < PUNCTURE_CLEARANCE:
            raise DomainError(f"{z} is at a puncture")
    if not s.domain.contains(z):
        raise DomainError(f"{z} is outside the domain")
    g = complex(s.gauss_map(z))
    ag = abs(g)
    if ag == 0 or not math.isfinite(ag):
        raise DomainError(f"Gauss map has a zero or pole at {z}")
    return 0.5 * (ag + 1.0 / ag) * abs(s.scale * s.height_diff(z))


def check_invariants(s: WeierstrassSurface, samples) -> None:
    """Raise if the forms blow up or the metric degenerates at any sample point."""
    zs = np.atleast_1d(np.asarray(samples, dtype=complex))
    keep = np.ones(zs.shape, bool)
    for p in s.punctures:
        keep &= np.abs(zs - p) >= PUNCTURE_CLEARANCE
    zs = zs[keep & s.domain.contains(zs)]
    phi = s.forms(zs)
    if not np.all(np.isfinite(phi)):
        raise ValueError(f"{s.name}: Weierstrass forms are not finite on the sample set")
    lam = np.sqrt(0.5 * np.sum(np.abs(phi) ** 2, axis=0))
    if not np.all(lam > 0):
        raise ValueError(f"{s.name}: metric degenerates on the sample set")


def is_flat(s: WeierstrassSurface, samples) -> bool:
    """True when the Gauss map is constant on ``samples`` (a plane)."""
    g = np.asarray(s.gauss_map(np.asarray(samples, dtype=complex)))
    return bool(np.ptp(g.real) + np.ptp(g.imag) < 1e-12 * max(1.0, float(np.abs(g).max())))
