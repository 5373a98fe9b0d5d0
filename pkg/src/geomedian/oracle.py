"""Batch ground truth for a finite sample: objective, gradient, Hessian,
the empirical median via an anchored Weiszfeld iteration, and the smallest
Hessian eigenvalue through its mean-inverse-distance identity.

All operations are pure functions of (sample, point). The sample is a
(count, dim) float64 array.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError, DimensionMismatchError, NumericalError, SingularPointError

# relative radius below which a point counts as sitting on a sample point
SINGULARITY_TOL = 1e-12

DENSE_EIG_MAX_DIM = 1000


def as_sample(points) -> np.ndarray:
    """Validate a sample as a (count, dim) float64 array, count >= 1."""
    a = np.asarray(points, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DataError(f"expected a (count, dim) sample, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("sample has non-finite coordinates")
    return a


def _displacements(points: np.ndarray, h: np.ndarray):
    if h.shape[0] != points.shape[1]:
        raise DimensionMismatchError(f"point dim {h.shape[0]} != sample dim {points.shape[1]}")
    d = points - h
    r = np.sqrt(np.sum(d * d, axis=1))
    return d, r


def _check_nonsingular(r: np.ndarray, what: str):
    scale = max(1.0, float(np.max(r)))
    if np.min(r) <= SINGULARITY_TOL * scale:
        raise SingularPointError(f"{what}: evaluation point coincides with a sample point")


def objective(points, h) -> float:
    """Empirical risk (1/n) sum_i (||X_i - h|| - ||X_i||); convex in h."""
    points = as_sample(points)
    h = np.asarray(h, dtype=np.float64)
    _, r = _displacements(points, h)
    return float(np.mean(r - np.sqrt(np.sum(points * points, axis=1))))


def gradient(points, h) -> np.ndarray:
    """Gradient of the empirical risk, -(1/n) sum_i (X_i - h)/||X_i - h||.

    Always has norm at most 1. Raises SingularPointError when h sits on a
    sample point; use weiszfeld() if that can happen.
    """
    points = as_sample(points)
    h = np.asarray(h, dtype=np.float64)
    d, r = _displacements(points, h)
    _check_nonsingular(r, "gradient")
    return -np.mean(d / r[:, None], axis=0)


def _inv_radius_moments(points: np.ndarray, center: np.ndarray):
    """Empirical mean of 1/r and of the outer products d d^T / r^3."""
    d, r = _displacements(points, center)
    _check_nonsingular(r, "hessian moments")
    a = float(np.mean(1.0 / r))
    b = (d.T * (1.0 / r**3)) @ d / points.shape[0]
    return a, b, r


@dataclass(frozen=True, eq=False)
class HessianEstimate:
    center: np.ndarray
    matrix: np.ndarray
    lambda_min: float
    lambda_max: float


def hessian(points, h) -> HessianEstimate:
    """Empirical Hessian (1/n) sum_i (I - u_i u_i^T)/r_i with its extreme
    eigenvalues.

    Assembled through the identity mean(1/r) I - mean(d d^T / r^3); spectrum
    via a dense symmetric eigensolver up to DENSE_EIG_MAX_DIM, power
    iteration above.
    """
    points = as_sample(points)
    h = np.asarray(h, dtype=np.float64)
    a, b, _ = _inv_radius_moments(points, h)
    m = a * np.eye(points.shape[1]) - b
    if points.shape[1] <= DENSE_EIG_MAX_DIM:
        eigs = np.linalg.eigvalsh(m)
        lo, hi = float(eigs[0]), float(eigs[-1])
    else:
        hi = _power_lambda_max(m)
        lo = hi - _power_lambda_max(hi * np.eye(m.shape[0]) - m)
    return HessianEstimate(center=h.copy(), matrix=m, lambda_min=lo, lambda_max=hi)


def _power_lambda_max(mat: np.ndarray, rtol: float = 1e-13, max_iter: int = 200_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    For PSD matrices the Rayleigh quotient of the iterates is monotone
    non-decreasing, so iteration stops once a 10-step window gains less
    than rtol relative. Near-degenerate top eigenvalues stall the
    eigenVECTOR, not the quotient, which is all that is needed here.
    """
    rng = np.random.default_rng(0)
    v = rng.standard_normal(mat.shape[0])
    v /= np.sqrt(np.sum(v * v))
    window = []
    rho = float(v @ (mat @ v))
    for _ in range(max_iter):
        w = mat @ v
        nw = float(np.sqrt(np.sum(w * w)))
        if nw == 0.0:
            return 0.0
        v = w / nw
        rho = float(v @ (mat @ v))
        window.append(rho)
        if len(window) > 10:
            window.pop(0)
            if window[-1] - window[0] <= rtol * max(window[-1], np.finfo(float).tiny):
                return rho
    raise NumericalError("power iteration did not converge")


def lambda_min_estimate(points, center) -> float:
    """Smallest eigenvalue of the empirical Hessian at center, computed as
    mean(1/r) minus the top eigenvalue of mean(d d^T / r^3).

    The subtraction is exact because the Hessian equals that difference of
    operators; only the top eigenvalue is needed, found by power iteration.
    """
    points = as_sample(points)
    center = np.asarray(center, dtype=np.float64)
    a, b, _ = _inv_radius_moments(points, center)
    return a - _power_lambda_max(b)


class WeiszfeldResult(NamedTuple):
    point: np.ndarray
    iterations: int
    converged: bool
    objective_trace: tuple | None


def weiszfeld(points, tol: float = 1e-10, max_iter: int = 200, record_objective: bool = False) -> WeiszfeldResult:
    """Empirical geometric median by the anchored fixed-point iteration.

    Plain reweighting steps away from the data; when the iterate lands on a
    sample point the anchored update handles the singular weight and the
    optimality test becomes the pull-versus-multiplicity criterion at that
    point. Converged means the gradient norm is at most tol, or the
    anchored criterion holds. The objective never increases from one
    iterate to the next; if max_iter is exhausted the last (best) iterate
    is returned with converged False.
    """
    points = as_sample(points)
    n = points.shape[0]
    y = points.mean(axis=0)
    trace = [objective(points, y)] if record_objective else None
    iterations = 0
    converged = False
    while True:
        d = points - y
        r = np.sqrt(np.sum(d * d, axis=1))
        scale = max(1.0, float(np.max(r)))
        on = r <= SINGULARITY_TOL * scale
        eta = int(np.sum(on))
        if eta == n:
            converged = True  # every sample point sits at y
            break
        w = 1.0 / r[~on]
        pull = np.sum(d[~on] * w[:, None], axis=0)
        pull_norm = float(np.sqrt(np.sum(pull * pull)))
        if eta > 0:
            if pull_norm <= eta:
                converged = True
                break
        elif pull_norm / n <= tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        t = np.sum(points[~on] * w[:, None], axis=0) / np.sum(w)
        if eta > 0:
            lam = eta / pull_norm
            y = max(0.0, 1.0 - lam) * t + min(1.0, lam) * y
        else:
            y = t
        iterations += 1
        if record_objective:
            trace.append(objective(points, y))
    return WeiszfeldResult(
        point=y,
        iterations=iterations,
        converged=converged,
        objective_trace=tuple(trace) if record_objective else None,
    )


def linearization_residual(points, m_hat, h) -> tuple[float, float]:
    """How far the gradient at h is from its linearization around m_hat,
    together with the quadratic envelope that must dominate it.

    Returns (residual_norm, bound) with
      residual_norm = ||grad(h) - Hessian(m_hat) (h - m_hat)||,
      bound         = 6 * mean(1/r_i(m_hat)^2) * ||h - m_hat||^2.
    """
    points = as_sample(points)
    m_hat = np.asarray(m_hat, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    a, b, r = _inv_radius_moments(points, m_hat)
    mat = a * np.eye(points.shape[1]) - b
    g = gradient(points, h)
    v = h - m_hat
    residual = float(np.linalg.norm(g - mat @ v))
    c_hat = float(np.mean(1.0 / r**2))
    bound = 6.0 * c_hat * float(np.sum(v * v))
    return residual, bound
