"""Delaunay surfaces (CMC surfaces of revolution) and the associate images of their necks.

Everything is normalized to mean curvature 1.  A shape is labelled by ``r``,
the principal curvature along its neck parallel; the other principal
curvature there is ``s = 2 - r``.  Lengths for mean curvature ``H`` follow by
scaling with :func:`length_scale`.

Labelling (``family``) follows the neck curvature: ``r > 2`` unduloid,
``r == 2`` cylinder, ``0 < r < 2`` nodoid.  Note that ``1 < r < 2`` starts the
profile at the widest parallel of an unduloid and ``r == 1`` is the round
sphere; the true profile type is reported by :attr:`DelaunayShape.profile_type`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .geom import (
    HelixArc,
    ShapeOperatorSample,
    _sin_half_turns,
    cos_sin,
    geodesic_curvature_torsion,
    helix_endpoint_gap,
)
from .mesh import MeshPatch, grid_faces

DEFAULT_STEP = 1e-4
DRIFT_BOUND = 1e-9
GAP_TOL = 1e-8


class ProfileError(RuntimeError):
    """The profile integration left its valid region or lost its first integral."""


@dataclass(frozen=True)
class DelaunayShape:
    family: str
    r: float

    @property
    def s(self) -> float:
        return 2.0 - self.r

    @property
    def neck_radius(self) -> float:
        return 1.0 / self.r

    @property
    def neck_length(self) -> float:
        return 2.0 * math.pi / self.r

    @property
    def force(self) -> float:
        """First integral ``y^2 - y cos(psi)`` of the profile."""
        return force_from_neck_curvature(self.r)

    @property
    def profile_type(self) -> str:
        c = self.force
        if self.family == "cylinder":
            return "cylinder"
        if c == 0:
            return "sphere"
        return "unduloid" if c < 0 else "nodoid"

    def shape_operator(self) -> ShapeOperatorSample:
        """Shape operator along the neck in the (neck tangent, meridian) frame."""
        return ShapeOperatorSample(np.diag([self.r, self.s]), 1.0)


@dataclass(frozen=True)
class ProfileCurve:
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    force: float

    def __len__(self) -> int:
        return len(self.s)

    def first_integral(self) -> np.ndarray:
        return self.y**2 - self.y * np.cos(self.psi)

    def max_drift(self) -> float:
        return float(np.max(np.abs(self.first_integral() - self.force)))


@dataclass(frozen=True)
class GapSweep:
    theta: np.ndarray
    gap: np.ndarray

    @property
    def min_index(self) -> int:
        return int(np.argmin(self.gap))

    @property
    def min_gap(self) -> float:
        return float(self.gap[self.min_index])

    @property
    def min_theta(self) -> float:
        return float(self.theta[self.min_index])

    def at(self, theta: float) -> float:
        (idx,) = np.nonzero(self.theta == theta)
        if not idx.size:
            raise KeyError(theta)
        return float(self.gap[idx[0]])


def force_from_neck_curvature(r: float) -> float:
    return 1.0 / r**2 - 1.0 / r


def length_scale(h: float) -> float:
    """Factor converting unit-mean-curvature lengths to mean curvature ``h``."""
    if h == 0:
        raise ValueError("mean curvature must be nonzero")
    return 1.0 / abs(h)


def shape_from_neck_curvature(r: float) -> DelaunayShape:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"neck curvature must be positive and finite, got {r!r}")
    if r == 2.0:
        family = "cylinder"
    elif r > 2.0:
        family = "unduloid"
    else:
        family = "nodoid"
    return DelaunayShape(family, r)


def _rhs(y: float, psi: float) -> tuple[float, float, float]:
    c = math.cos(psi)
    return c, math.sin(psi), -2.0 + c / y


def profile_solve(shape: DelaunayShape, span: float | None = None, step: float = DEFAULT_STEP) -> ProfileCurve:
    """Integrate the meridian of ``shape`` from its neck for arclength ``span``.

    ODE: ``x' = cos psi``, ``y' = sin psi``, ``psi' = -2 + cos(psi) / y`` with
    ``y(0) = 1/r``, ``psi(0) = 0``; classical RK4 with fixed ``step``.  The
    default span is one period of the profile.
    """
    if span is None:
        span = profile_period(shape) if shape.family != "cylinder" else 1.0
    if not span > 0 or not step > 0:
        raise ValueError("span and step must be positive")
    n = max(1, math.ceil(span / step - 1e-9))
    h = span / n
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    ps = np.empty(n + 1)
    x, y, p = 0.0, 1.0 / shape.r, 0.0
    xs[0], ys[0], ps[0] = x, y, p
    h2 = 0.5 * h
    for i in range(1, n + 1):
        a1, b1, c1 = _rhs(y, p)
        y2 = y + h2 * b1
        if y2 <= 0:
            break
        a2, b2, c2 = _rhs(y2, p + h2 * c1)
        y3 = y + h2 * b2
        if y3 <= 0:
            break
        a3, b3, c3 = _rhs(y3, p + h2 * c2)
        y4 = y + h * b3
        if y4 <= 0:
            break
        a4, b4, c4 = _rhs(y4, p + h * c3)
        x += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0
        y += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0
        p += h * (c1 + 2 * c2 + 2 * c3 + c4) / 6.0
        if y <= 0:
            break
        xs[i], ys[i], ps[i] = x, y, p
    else:
        prof = ProfileCurve(np.linspace(0.0, span, n + 1), xs, ys, ps, shape.force)
        drift = prof.max_drift()
        if drift > DRIFT_BOUND:
            raise ProfileError(f"first-integral drift {drift:.3e} exceeds {DRIFT_BOUND:g}; reduce the step")
        return prof
    raise ProfileError(f"profile reached the axis at arclength {i * h:.6g}")


def radial_range(shape: DelaunayShape) -> tuple[float, float]:
    """Smallest and largest distance of the profile from the axis."""
    c = shape.force
    if shape.family == "cylinder":
        return 0.5, 0.5
    disc = math.sqrt(1.0 + 4.0 * c)
    hi = 0.5 * (1.0 + disc)
    lo = 0.5 * (1.0 - disc) if c < 0 else 0.5 * (disc - 1.0)
    return lo, hi


def profile_period(shape: DelaunayShape) -> float:
    """Arclength of one period of the meridian (neck to neck).

    Along the profile ``sin(psi) = sqrt(-(y^2 - y - c)(y^2 + y - c)) / y``; the
    period is twice the integral of ``ds = dy / |sin psi|`` between the
    extreme radii, whose inverse-square-root endpoint singularities are
    handled by an algebraic-weight rule.
    """
    c = shape.force
    if shape.family == "cylinder" or c == 0:
        raise ValueError(f"{shape.profile_type} profile has no period")
    disc = math.sqrt(1.0 + 4.0 * c)
    lo, hi = radial_range(shape)
    if c < 0:
        def smooth(y):
            return y / math.sqrt(y * y + y - c)
    else:
        p_lo, q_lo = 0.5 * (1.0 - disc), -0.5 * (1.0 + disc)

        def smooth(y):
            return y / math.sqrt((y - p_lo) * (y - q_lo))

    half, _ = integrate.quad(smooth, lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13)
    return 2.0 * half


def neck_image_curve(shape: DelaunayShape, theta: float) -> HelixArc:
    """Image of the lifted neck circle under the ``theta`` associate immersion.

    Curvature ``cos(theta)(r - 1) + 1``, torsion ``sin(theta)(1 - r)``,
    length ``2 pi / r``.  At ``theta = pi`` the image is a circle of
    curvature ``|2 - r|``, hence radius ``1 / |2 - r|``.
    """
    c, s = cos_sin(theta)
    r = shape.r
    # adding 0.0 turns a signed zero torsion into +0.0
    return HelixArc(c * (r - 1.0) + 1.0, s * (1.0 - r) + 0.0, shape.neck_length)


def neck_image_curve_from_shape_operator(shape: DelaunayShape, theta: float) -> HelixArc:
    k, tau = geodesic_curvature_torsion(shape.shape_operator(), theta, (1.0, 0.0))
    return HelixArc(k, tau, shape.neck_length)


def gap_theta_grid(n_theta: int) -> np.ndarray:
    """``2 pi j / n`` for ``j = 1 .. n - 1``, with ``pi`` present exactly."""
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    j = np.arange(1, n_theta)
    theta = 2.0 * math.pi * j / n_theta
    if n_theta % 2 == 0:
        theta[n_theta // 2 - 1] = math.pi
    else:
        theta = np.sort(np.append(theta, math.pi))
    return theta


def rigidity_gap_sweep(shape: DelaunayShape, n_theta: int) -> GapSweep:
    """Endpoint gap of the neck image for ``theta`` on a grid in ``(0, 2 pi)``."""
    theta = gap_theta_grid(n_theta)
    gap = np.array([helix_endpoint_gap(neck_image_curve(shape, t)) for t in theta])
    return GapSweep(theta, gap)


def closure_defect(r: float) -> float:
    """Signed chord of the ``theta = pi`` neck image; its zeros are the closing shapes.

    ``|closure_defect(r)|`` is the endpoint gap, but unlike the gap this
    changes sign at each closing value, so it can be bracketed.
    """
    arc = neck_image_curve(shape_from_neck_curvature(r), math.pi)
    k = abs(arc.k)
    if k * k < 1e-14:
        return arc.length
    return 2.0 / k * _sin_half_turns(k * arc.length / (2.0 * math.pi))


def nodoid_closure_solve(m: int) -> float:
    """Neck curvature of the nodoid whose ``theta = pi`` neck image closes after ``m`` turns.

    Marches ``r`` down from 2 (where the image is a straight segment) in steps
    small enough to separate consecutive sign changes of
    :func:`closure_defect`, and refines the ``m``-th sign change with Brent's
    method.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    hi = 2.0 - 1e-6
    f_hi = closure_defect(hi)
    found = 0
    while True:
        # the phase (2 - r) / r moves by at most 1/8 turn per step
        lo = hi - hi * hi / 16.0
        f_lo = closure_defect(lo)
        if f_lo == 0.0 or f_lo * f_hi < 0:
            found += 1
            if found == m:
                if f_lo == 0.0:
                    return lo
                return optimize.brentq(closure_defect, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        hi, f_hi = lo, f_lo


def revolve_to_mesh(profile: ProfileCurve, n_angular: int, meta: dict | None = None) -> MeshPatch:
    """Revolve a meridian about the x axis into a triangle mesh closed in the angular direction."""
    if n_angular < 8:
        raise ValueError("n_angular must be at least 8")
    if len(profile) < 2:
        raise ValueError("profile needs at least two samples")
    phi = 2.0 * math.pi * np.arange(n_angular) / n_angular
    cp, sp = np.cos(phi), np.sin(phi)
    x = np.repeat(profile.x[:, None], n_angular, axis=1)
    verts = np.stack([x, profile.y[:, None] * cp, profile.y[:, None] * sp], axis=-1).reshape(-1, 3)
    cpsi, spsi = np.cos(profile.psi)[:, None], np.sin(profile.psi)[:, None]
    normals = np.stack(
        [np.repeat(-spsi, n_angular, axis=1), cpsi * cp, cpsi * sp], axis=-1
    ).reshape(-1, 3)
    faces = grid_faces(len(profile), n_angular, wrap_cols=True)
    return MeshPatch(verts, faces, normals, dict(meta or {}))


def resample(profile: ProfileCurve, n: int) -> ProfileCurve:
    """Keep ``n`` samples evenly spaced in index, endpoints included."""
    if n < 2:
        raise ValueError("need at least two samples")
    idx = np.unique(np.round(np.linspace(0, len(profile) - 1, n)).astype(int))
    return ProfileCurve(profile.s[idx], profile.x[idx], profile.y[idx], profile.psi[idx], profile.force)
