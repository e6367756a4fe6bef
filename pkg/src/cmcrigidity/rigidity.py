"""Rigidity certificates and congruence checks.

Certificates only encode sufficient conditions: a loop with nonzero flux, or
a strictly positive endpoint gap of the neck image for every associate angle,
rules out the associate family (verdict ``Rigid``).  ``NonRigid`` is issued
only for minimal surfaces where no obstruction exists and the associate
family is known to exist; everything else is ``Inconclusive``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import weierstrass as ws
from .delaunay import GAP_TOL, DelaunayShape, rigidity_gap_sweep

DEFAULT_THETA_GRID = 720
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Verdict(str, enum.Enum):
    RIGID = "Rigid"
    NON_RIGID = "NonRigid"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class RigidityReport:
    subject: dict
    verdict: Verdict
    obstruction: dict
    tolerances: dict
    diagnostic: str | None = None
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(), compare=False)

    def __post_init__(self):
        self.verdict = Verdict(self.verdict)


@dataclass
class CongruenceResult:
    rotation: np.ndarray
    translation: np.ndarray
    reflection: bool
    rms_residual: float
    recovered_theta: float | None = None

    def __eq__(self, other):
        if not isinstance(other, CongruenceResult):
            return NotImplemented
        return (
            np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
            and self.reflection == other.reflection
            and self.rms_residual == other.rms_residual
            and self.recovered_theta == other.recovered_theta
        )


def _loop_dict(loop: ws.LoopSpec) -> dict:
    if loop.kind == "circle":
        return {
            "kind": "circle",
            "center": [loop.center.real, loop.center.imag],
            "radius": loop.radius,
            "ccw": loop.ccw,
        }
    return {"kind": "polyline", "vertices": [[v.real, v.imag] for v in loop.vertices]}


def _flat_probe(s: ws.WeierstrassSurface) -> np.ndarray:
    ang = np.linspace(0.1, 2 * math.pi - 0.1, 7)
    pts = np.concatenate([0.37 * np.exp(1j * ang), 1.3 * np.exp(1j * ang)])
    if s.domain.kind in ("disk", "annulus"):
        lo = s.domain.r_in if s.domain.kind == "annulus" else 0.0
        hi = s.domain.radius if s.domain.kind == "disk" else s.domain.r_out
        rad = lo + (min(hi, lo + 2.0) - lo) * np.array([0.3, 0.7])
        pts = s.domain.center + np.concatenate([rad[0] * np.exp(1j * ang), rad[1] * np.exp(1j * ang)])
    return pts


def certify_minimal(
    s: ws.WeierstrassSurface, basis: Sequence[ws.LoopSpec], tol: float = ws.ZERO_TOL
) -> RigidityReport:
    """Flux certificate for a minimal surface given a homology basis of loops."""
    subject = {"kind": "minimal", "name": s.name, "scale": s.scale}
    tolerances = {"flux_zero": tol, "quadrature": ws.QUAD_TOL}
    fluxes = []
    try:
        for loop in basis:
            fv = ws.flux(s, loop)
            entry = {
                "loop": _loop_dict(loop),
                "flux": fv.v.tolist(),
                "real_period": fv.real_period.tolist(),
                "quadrature_error": fv.quadrature_error,
            }
            if np.linalg.norm(fv.real_period) > tol:
                return RigidityReport(
                    subject, Verdict.INCONCLUSIVE, {"kind": "flux", "loops": fluxes + [entry]}, tolerances,
                    diagnostic="nonzero real period: the immersion itself is not well defined on this loop",
                )
            if fv.norm > tol:
                return RigidityReport(subject, Verdict.RIGID, {"kind": "flux", "witness": entry}, tolerances)
            fluxes.append(entry)
    except (ws.QuadratureError, ws.DomainError) as exc:
        return RigidityReport(
            subject, Verdict.INCONCLUSIVE, {"kind": "flux", "loops": fluxes}, tolerances, diagnostic=str(exc)
        )
    if ws.is_flat(s, _flat_probe(s)):
        return RigidityReport(
            subject, Verdict.INCONCLUSIVE, {"kind": "flux", "loops": fluxes}, tolerances,
            diagnostic="flat surface: associate family is degenerate",
        )
    return RigidityReport(
        subject, Verdict.NON_RIGID, {"kind": "flux", "loops": fluxes, "non_flat": True}, tolerances
    )


def certify_delaunay(shape: DelaunayShape, n_theta: int = 360, tol: float = GAP_TOL) -> RigidityReport:
    """Endpoint-gap certificate for a Delaunay surface.

    ``Rigid`` when the neck image fails to close for every sampled angle in
    ``(0, 2 pi)``; otherwise the closing angles are reported as candidates
    and the verdict is ``Inconclusive``.
    """
    sweep = rigidity_gap_sweep(shape, n_theta)
    subject = {"kind": "delaunay", "family": shape.family, "r": shape.r, "s": shape.s}
    obstruction = {
        "kind": "gap",
        "table": [[float(t), float(g)] for t, g in zip(sweep.theta, sweep.gap)],
        "min_gap": sweep.min_gap,
        "min_theta": sweep.min_theta,
    }
    tolerances = {"gap_zero": tol, "n_theta": n_theta}
    if sweep.min_gap > tol:
        return RigidityReport(subject, Verdict.RIGID, obstruction, tolerances)
    closing = sweep.theta[sweep.gap <= tol]
    obstruction["closure_candidates"] = [float(t) for t in closing]
    if shape.s == shape.r:
        diagnostic = "umbilic neck (round sphere): the neck image closes for every theta"
    else:
        diagnostic = "neck image closes at theta = " + ", ".join(f"{t:.17g}" for t in closing[:8])
        if len(closing) > 8:
            diagnostic += f", ... ({len(closing)} angles)"
    return RigidityReport(subject, Verdict.INCONCLUSIVE, obstruction, tolerances, diagnostic=diagnostic)


def congruence_fit(x, y, allow_reflection: bool = False) -> CongruenceResult:
    """Least-squares rigid motion taking paired points ``x`` onto ``y`` (Kabsch).

    Finds ``R``, ``t`` minimizing ``sum |R x_i + t - y_i|^2`` over proper
    rotations, or over all orthogonal ``R`` when ``allow_reflection``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2 or x.shape[1] != 3:
        raise ValueError(f"point sets must both be (n, 3); got {x.shape} and {y.shape}")
    if len(x) < 4:
        raise ValueError("need at least 4 point pairs")
    cx, cy = x.mean(axis=0), y.mean(axis=0)
    xc, yc = x - cx, y - cy
    sx = np.linalg.svd(xc, compute_uv=False)
    if sx[0] == 0 or sx[1] <= 1e-10 * sx[0]:
        raise ValueError("degenerate point set (collinear or coincident)")
    u, _, vt = np.linalg.svd(xc.T @ yc)
    d = np.ones(3)
    if not allow_reflection and np.linalg.det(vt.T @ u.T) < 0:
        d[2] = -1.0
    rot = vt.T @ (d[:, None] * u.T)
    t = cy - rot @ cx
    resid = x @ rot.T + t - y
    rms = float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
    return CongruenceResult(rot, t, bool(np.linalg.det(rot) < 0), rms)


def _rms_after_fit(x, y, allow_reflection):
    return congruence_fit(x, y, allow_reflection).rms_residual


def _golden_min(f, a: float, b: float, tol: float) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def recover_theta(
    s: ws.WeierstrassSurface,
    target: Sequence[tuple[complex, Sequence[float]]],
    theta_grid: int = DEFAULT_THETA_GRID,
    *,
    base: complex | None = None,
    allow_reflection: bool = False,
    tol: float = 1e-12,
) -> CongruenceResult:
    """Associate angle whose immersion best matches ``target`` up to a rigid motion.

    ``target`` pairs parameter points with observed positions.  A uniform grid
    of ``theta_grid`` angles picks the basin, then golden-section search
    refines the post-alignment RMS residual to a bracket of width ``tol``.
    ``recovered_theta`` is ``None`` when the residual does not depend on the
    angle (flat subjects).
    """
    params = np.array([complex(p) for p, _ in target])
    points = np.array([np.asarray(q, dtype=float) for _, q in target])
    if base is None:
        base = params[0]
    prim = ws.primitive(s, params, base)

    def resid(theta):
        return _rms_after_fit(ws.associate_points(prim, theta), points, allow_reflection)

    grid = 2.0 * math.pi * np.arange(theta_grid) / theta_grid
    vals = np.array([resid(t) for t in grid])
    scale = float(np.sqrt(np.mean(np.sum((points - points.mean(axis=0)) ** 2, axis=1))))
    if np.ptp(vals) <= 1e-12 * max(scale, 1e-300):
        fit = congruence_fit(ws.associate_points(prim, 0.0), points, allow_reflection)
        fit.recovered_theta = None
        return fit
    j = int(np.argmin(vals))
    h = 2.0 * math.pi / theta_grid
    best = _golden_min(resid, grid[j] - h, grid[j] + h, tol)
    best = math.fmod(best, 2.0 * math.pi)
    if best < 0:
        best += 2.0 * math.pi
    fit = congruence_fit(ws.associate_points(prim, best), points, allow_reflection)
    fit.recovered_theta = best
    return fit
