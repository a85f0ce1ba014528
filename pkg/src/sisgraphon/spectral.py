"""Spectral radius of non-negative matrices, R0 and the spectral bound.

The radius is computed by power iteration on a diagonally shifted matrix,
certified by the Collatz-Wielandt bracket.  A reducible matrix may have no
strictly positive Perron vector, in which case the bracket never closes; the
radius then comes from repeated squaring (Gelfand's formula) and is reported
as uncertified.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .space_kernel import (
    CounterexampleChainSpec,
    KernelModel,
    ValidationError,
    is_connected,
    is_strongly_connected,
    support_graph,
)

logger = logging.getLogger(__name__)

RTOL = 1e-10
MAX_ITER = 10**6
GELFAND_SQUARINGS = 64
REDUCIBLE_BUDGET = 10_000


class SpectralError(ValueError):
    """Raised for invalid spectral inputs or unsatisfied preconditions."""


@dataclass
class SpectralResult:
    radius: float
    right_vector: np.ndarray
    left_vector: np.ndarray | None = None
    cw_lower: float = math.nan
    cw_upper: float = math.nan
    iterations: int = 0
    certified: bool = False


@dataclass
class ThresholdEigenpair:
    epsilon: float
    lam: float
    w: np.ndarray
    residual: float
    iterations: int


def _check_nonnegative(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpectralError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise SpectralError("matrix has a non-finite entry")
    if np.any(A < 0):
        raise SpectralError("matrix has a negative entry")
    return A


def _power_iteration(A: np.ndarray, tol: float, max_iter: int):
    """Power iteration on ``A + shift*I`` from the all-ones vector.

    Returns ``(radius, x, lower, upper, iterations, converged)`` with the
    shift already removed from radius and bracket.
    """
    n = A.shape[0]
    shift = 1e-3 * (1.0 + A.max(initial=0.0))
    As = A + shift * np.eye(n)
    x = np.ones(n)
    lo = hi = math.nan
    for it in range(1, max_iter + 1):
        y = As @ x
        ratios = y / x
        lo = float(ratios.min()) - shift
        hi = float(ratios.max()) - shift
        x = y / y.max()
        if x.min() <= 0:
            # underflow: the bracket is only valid at strictly positive x
            return 0.5 * (lo + hi), x, lo, hi, it, False
        if hi - lo <= tol * max(1.0, 0.5 * (lo + hi)):
            return 0.5 * (lo + hi), x, lo, hi, it, True
    return 0.5 * (lo + hi), x, lo, hi, max_iter, False


def gelfand_radius(A: np.ndarray, squarings: int = GELFAND_SQUARINGS) -> float:
    """``lim ||A^(2^k)||^(1/2^k)`` with the norm rescaled at every squaring."""
    A = np.asarray(A, dtype=float)
    s = np.abs(A).sum(axis=1).max(initial=0.0)
    if s == 0:
        return 0.0
    B = A / s
    log_r = math.log(s)
    weight = 1.0
    for _ in range(squarings):
        B = B @ B
        s = np.abs(B).sum(axis=1).max()
        weight *= 0.5
        if s == 0:
            return 0.0
        B /= s
        log_r += weight * math.log(s)
    return math.exp(log_r)


def spectral_radius(A, tol: float = RTOL, max_iter: int = MAX_ITER, left: bool = False) -> SpectralResult:
    """Perron root of a non-negative square matrix with a right Perron vector.

    The result is certified when the Collatz-Wielandt bracket closes to width
    ``tol * max(1, radius)``.  For a reducible matrix whose bracket does not
    close within ``REDUCIBLE_BUDGET`` sweeps the radius comes from Gelfand
    repeated squaring instead and ``certified`` is False; the vector is then
    the last power-iteration iterate.
    """
    A = _check_nonnegative(A)
    n = A.shape[0]
    if n == 0:
        raise SpectralError("empty matrix")
    irreducible = is_strongly_connected(support_graph(A))
    budget = max_iter if irreducible else min(max_iter, REDUCIBLE_BUDGET)
    radius, x, lo, hi, it, ok = _power_iteration(A, tol, budget)
    if not ok and irreducible:
        logger.warning("power iteration hit %d iterations, bracket [%g, %g]", it, lo, hi)
    elif not ok:
        radius = gelfand_radius(A)
    result = SpectralResult(
        radius=max(float(radius), 0.0),
        right_vector=x / x.max() if x.max() > 0 else x,
        cw_lower=lo,
        cw_upper=hi,
        iterations=it,
        certified=bool(ok),
    )
    if left:
        lres = spectral_radius(A.T, tol, max_iter)
        y = lres.right_vector
        dot = float(y @ result.right_vector)
        result.left_vector = y / dot if dot > 0 else y
    return result


def r0(model: KernelModel, **kw) -> float:
    """Basic reproduction number: spectral radius of ``kappa[i, j] / gamma[j]``."""
    return spectral_radius(model.next_generation(), **kw).radius


def _check_state(g, n: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        g = np.full(n, float(g))
    if g.shape != (n,):
        raise SpectralError(f"state has shape {g.shape}, expected ({n},)")
    if np.any(g < 0) or np.any(g > 1):
        raise SpectralError("state must take values in [0, 1]")
    return g


def r0_effective(model: KernelModel, g, **kw) -> float:
    """Spectral radius of ``diag(g) @ M`` with ``M`` the next-generation matrix."""
    g = _check_state(g, model.n)
    return spectral_radius(g[:, None] * model.next_generation(), **kw).radius


def spectral_bound(model: KernelModel, **kw) -> float:
    """``s(T_kappa - gamma)`` via the non-negative shift by ``max(gamma)``."""
    gmax = float(model.gamma.max())
    shifted = model.kappa - np.diag(model.gamma) + gmax * np.eye(model.n)
    # the diagonal is >= 0 up to rounding
    shifted = np.maximum(shifted, 0.0)
    return spectral_radius(shifted, **kw).radius - gmax


def perron_vectors(model: KernelModel, **kw) -> SpectralResult:
    """Right and left Perron vectors of the next-generation matrix.

    The left vector is scaled so that ``<left, right> = 1``.
    """
    res = spectral_radius(model.next_generation(), left=True, **kw)
    if res.radius <= 1e-14:
        raise SpectralError("spectral radius is zero; no Perron vector")
    if not is_connected(model):
        warnings.warn("kernel is not connected; Perron vectors need not be unique", stacklevel=2)
        res.certified = False
    return res


def eigen_threshold(model: KernelModel, epsilon: float, tol: float = 1e-10, max_iter: int = 200) -> ThresholdEigenpair:
    """Eigenpair ``(1-eps) T_k(w) = (gamma + lam) w`` with ``sup w = eps/2``.

    ``lam`` is found by bisection on ``a -> r((1-eps) kappa / (gamma + a))``,
    which decreases in ``a``.
    """
    if not 0 < epsilon < 1:
        raise SpectralError("epsilon must lie in (0, 1)")
    if r0_effective(model, np.full(model.n, 1 - epsilon)) <= 1:
        raise SpectralError(f"not supercritical at level {epsilon}")
    B = (1 - epsilon) * model.kappa
    gamma = model.gamma

    def psi(a: float) -> SpectralResult:
        return spectral_radius(B / (gamma + a)[:, None])

    lo, hi = 0.0, float(model.kappa.sum(axis=1).max())
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if psi(mid).radius > 1:
            lo = mid
        else:
            hi = mid
        it += 1
    lam = 0.5 * (lo + hi)
    res = psi(lam)
    w = res.right_vector * (epsilon / 2)
    residual = float(np.abs(B @ w - (gamma + lam) * w).max())
    return ThresholdEigenpair(epsilon, lam, w, residual, it)


def gelfand_sequence(chain: CounterexampleChainSpec | None = None, n: int = 1) -> float:
    """``(prod_{i<=n} (2i+2)/(2i-1))^(1/n)``, the chain's ``||T^n||^(1/n)``.

    Only ``n`` matters; the chain argument identifies the operator.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    i = np.arange(1, n + 1, dtype=float)
    return math.exp(float(np.sum(np.log1p(3.0 / (2 * i - 1)))) / n)
