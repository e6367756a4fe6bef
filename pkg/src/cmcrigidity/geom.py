"""Pointwise shape-operator algebra for the associate family of a CMC surface.

All matrices are expressed in an orthonormal tangent frame.  The complex
structure is the counterclockwise quarter turn ``J = [[0, -1], [1, 0]]``;
flipping it only relabels the family by ``theta -> -theta``.  Mean curvature
``h`` is the *average* of the principal curvatures, so ``trace(a) == 2 h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

J = np.array([[0.0, -1.0], [1.0, 0.0]])
I2 = np.eye(2)
I4 = np.eye(4)

# |k|^2 + |tau|^2 below this is treated as a straight segment.
STRAIGHT_EPS = 1e-14


@dataclass(frozen=True)
class ShapeOperatorSample:
    """Symmetric 2x2 shape operator ``a`` with mean curvature ``h``."""

    a: np.ndarray
    h: float

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.shape != (2, 2):
            raise ValueError(f"shape operator must be 2x2, got {a.shape}")
        # stored once: the lower entry mirrors the upper one
        a[1, 0] = a[0, 1]
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        h = float(self.h)
        if abs(np.trace(a) - 2.0 * h) > 1e-12 * max(1.0, abs(h)):
            raise ValueError(f"trace(a) = {np.trace(a)!r} is not 2*h = {2 * h!r}")
        object.__setattr__(self, "h", h)

    @classmethod
    def from_principal(cls, k1: float, k2: float) -> "ShapeOperatorSample":
        return cls(np.diag([k1, k2]), 0.5 * (k1 + k2))

    @property
    def traceless(self) -> np.ndarray:
        return self.a - self.h * I2


@dataclass(frozen=True)
class HelixArc:
    """Arc of length ``length`` with constant curvature ``k`` and torsion ``tau``."""

    k: float
    tau: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"arc length must be positive, got {self.length!r}")

    @property
    def radius(self) -> float:
        """Radius of the osculating circle, ``1/|k|`` (inf for a straight arc)."""
        return math.inf if self.k == 0 else 1.0 / abs(self.k)


@dataclass(frozen=True)
class FrenetState:
    position: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray

    @property
    def frame(self) -> np.ndarray:
        """Rows are tangent, normal, binormal."""
        return np.vstack([self.tangent, self.normal, self.binormal])


_QUARTER_TURNS = {
    0.0: (1.0, 0.0),
    math.pi / 2: (0.0, 1.0),
    math.pi: (-1.0, 0.0),
    3 * math.pi / 2: (0.0, -1.0),
    2 * math.pi: (1.0, 0.0),
}


def cos_sin(theta: float) -> tuple[float, float]:
    """``(cos, sin)`` of ``theta``, exact at the float quarter turns in [0, 2 pi]."""
    exact = _QUARTER_TURNS.get(theta)
    if exact is not None:
        return exact
    return math.cos(theta), math.sin(theta)


def associate_shape_operator(sample: ShapeOperatorSample, theta: float) -> np.ndarray:
    """Shape operator of the ``theta`` member of the associate family.

    The traceless part is rotated by ``cos(theta) I + sin(theta) J``; the
    umbilic part ``h I`` is unchanged.
    """
    b = sample.traceless
    if theta == 0:
        return sample.a.copy()
    c, s = cos_sin(theta)
    return c * b + s * (J @ b) + sample.h * I2


def geodesic_curvature_torsion(
    sample: ShapeOperatorSample, theta: float, direction
) -> tuple[float, float]:
    """Curvature and torsion of the image of a geodesic with unit tangent ``direction``.

    ``k = <A_t v, v>`` and ``tau = -<A_t v, J v>`` where ``A_t`` is the
    associate shape operator.  ``k`` is signed.
    """
    v = np.asarray(direction, dtype=float)
    if v.shape != (2,):
        raise ValueError("direction must be a 2-vector")
    if abs(math.hypot(v[0], v[1]) - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |v| = {math.hypot(*v)!r}")
    at = associate_shape_operator(sample, theta)
    av = at @ v
    jv = J @ v
    return float(av @ v), float(-(av @ jv))


def _sin_half_turns(turns: float) -> float:
    """``sin(pi * turns)`` with exact zeros at integers."""
    n = round(turns)
    frac = turns - n
    val = math.sin(math.pi * frac)
    return -val if n % 2 else val


def helix_endpoint_gap(arc: HelixArc) -> float:
    """Distance between the two endpoints of a constant-curvature, constant-torsion arc."""
    k, tau, length = arc.k, arc.tau, arc.length
    w2 = k * k + tau * tau
    if w2 < STRAIGHT_EPS:
        return length
    w = math.sqrt(w2)
    a = abs(k) / w2
    chord = 2.0 * a * _sin_half_turns(w * length / (2.0 * math.pi))
    rise = (tau / w) * length
    return math.hypot(chord, rise)


def _rk4_step_matrix(k: float, tau: float, h: float) -> np.ndarray:
    # state = (position, T, N, B) stacked; y' = M y is linear and autonomous, so
    # one classical RK4 step is exactly the matrix polynomial below.
    m = np.zeros((4, 4))
    m[0, 1] = 1.0
    m[1, 2] = k
    m[2, 1] = -k
    m[2, 3] = tau
    m[3, 2] = -tau
    hm = h * m
    hm2 = hm @ hm
    hm3 = hm2 @ hm
    return I4 + hm + hm2 / 2.0 + hm3 / 6.0 + (hm3 @ hm) / 24.0


def _reorthonormalize(frame: np.ndarray) -> None:
    t, n = frame[..., 1, :], frame[..., 2, :]
    t /= np.linalg.norm(t, axis=-1, keepdims=True)
    n -= np.sum(n * t, axis=-1, keepdims=True) * t
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    frame[..., 3, :] = np.cross(t, n)


def frenet_integrate(k: float, tau: float, length: float, step: float) -> FrenetState:
    """Integrate the Frenet-Serret system from the identity frame at the origin.

    Fixed-step classical RK4 with ``ceil(length / step)`` equal steps and a
    Gram-Schmidt pass on the frame after every step.
    """
    if not length > 0:
        raise ValueError(f"length must be positive, got {length!r}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    if step > length:
        raise ValueError("step must not exceed length")
    n_steps = math.ceil(length / step - 1e-12)
    p = _rk4_step_matrix(k, tau, length / n_steps)
    y = np.zeros((4, 3))
    y[1:] = np.eye(3)
    for _ in range(n_steps):
        y = p @ y
        _reorthonormalize(y)
    return FrenetState(y[0].copy(), y[1].copy(), y[2].copy(), y[3].copy())


def frenet_gap_batch(k, tau, length, n_steps: int) -> np.ndarray:
    """Endpoint distances for many constant-(k, tau) arcs at once.

    Each arc uses ``n_steps`` equal RK4 steps; same scheme as
    :func:`frenet_integrate`, vectorized over arcs.
    """
    k, tau, length = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (k, tau, length)))
    steps = np.stack(
        [_rk4_step_matrix(ki, ti, li / n_steps) for ki, ti, li in zip(k.ravel(), tau.ravel(), length.ravel())]
    )
    y = np.zeros((steps.shape[0], 4, 3))
    y[:, 1:] = np.eye(3)
    for _ in range(n_steps):
        y = steps @ y
        _reorthonormalize(y)
    return np.linalg.norm(y[:, 0], axis=-1).reshape(k.shape)
