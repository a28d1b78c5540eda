"""Open-uniform B-spline trajectories.

A path is a clamped (open-uniform) B-spline through n control points, the
first and last of which are anchored to the leg endpoints. With the default
degree 3 the curve is cubic. Path length is the chord sum over a fixed
number of parameter samples, which the tests hold against dense quadrature
of the derivative spline.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import BSpline

DEFAULT_DEGREE = 3
DEFAULT_SAMPLES = 100


def open_uniform_knots(n_ctrl: int, degree: int = DEFAULT_DEGREE) -> np.ndarray:
    """Clamped knot vector on [0, 1] for n_ctrl control points.

    Requires degree + 1 <= n_ctrl (otherwise the curve order exceeds the
    control polygon and the basis degenerates).
    """
    if degree < 1:
        raise ValueError("spline degree must be >= 1")
    if degree + 1 > n_ctrl:
        raise ValueError(
            f"degree {degree} needs at least {degree + 1} control points, "
            f"got {n_ctrl}"
        )
    n_interior = n_ctrl - degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    return np.concatenate([
        np.zeros(degree + 1), interior, np.ones(degree + 1),
    ])


def build_spline(ctrl: np.ndarray, degree: int = DEFAULT_DEGREE) -> BSpline:
    ctrl = np.asarray(ctrl, dtype=float)
    knots = open_uniform_knots(len(ctrl), degree)
    return BSpline(knots, ctrl, degree)


def basis_matrix(n_ctrl: int, degree: int, m_samples: int) -> np.ndarray:
    """Dense (m_samples, n_ctrl) matrix B with samples = B @ ctrl.

    Sampling is uniform in parameter; the end parameter is nudged inside the
    knot span so the clamped end point evaluates exactly.
    """
    knots = open_uniform_knots(n_ctrl, degree)
    params = np.linspace(0.0, 1.0, m_samples)
    B = BSpline.design_matrix(params, knots, degree,
                              extrapolate=False).toarray()
    return B


def sample_positions(ctrl: np.ndarray, degree: int = DEFAULT_DEGREE,
                     m_samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """(m_samples, dim) points along the curve, endpoints exact."""
    ctrl = np.asarray(ctrl, dtype=float)
    B = basis_matrix(len(ctrl), degree, m_samples)
    return B @ ctrl


def chord_lengths(positions: np.ndarray) -> np.ndarray:
    """Segment lengths between consecutive samples."""
    d = np.diff(np.asarray(positions, dtype=float), axis=0)
    return np.sqrt((d ** 2).sum(axis=-1))


def path_length(positions: np.ndarray) -> float:
    return float(chord_lengths(positions).sum())


def quadrature_length(ctrl: np.ndarray, degree: int = DEFAULT_DEGREE,
                      tol: float = 1e-10) -> float:
    """Arc length by adaptive quadrature of |C'(u)|; the independent check
    used by the tests against the chord-sum length."""
    from scipy.integrate import quad

    spl = build_spline(ctrl, degree)
    dspl = spl.derivative()

    def speed(u: float) -> float:
        return float(np.linalg.norm(dspl(u)))

    knots = np.unique(spl.t)
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        val, _ = quad(speed, a, b, epsabs=tol, epsrel=tol, limit=200)
        total += val
    return total
