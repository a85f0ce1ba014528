"""Discretized feature spaces, transmission kernels and their CSV loaders.

A model lives on ``n`` atoms with masses ``weights``.  The transmission
kernel is stored as the dense matrix ``kappa[i, j] = kappa(i, {j})`` (a rate
per unit time); the density ``k = kappa / mu_j`` is only defined on columns
with positive mass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


class ValidationError(ValueError):
    """Raised when a space, kernel spec or kernel model is malformed."""


def _as_vector(value: ArrayLike, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValidationError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _as_square(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite set of feature atoms with non-negative masses."""

    weights: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size < 1:
            raise ValidationError("a space needs at least one atom")
        if not np.all(np.isfinite(w)):
            raise ValidationError("atom weights must be finite")
        if np.any(w < 0):
            raise ValidationError("negative atom weight")
        if w.sum() <= 0:
            raise ValidationError("total mass must be positive")
        labels = tuple(self.labels) if len(self.labels) else tuple(range(w.size))
        if len(labels) != w.size:
            raise ValidationError("labels and weights differ in length")
        _freeze(w)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def positive(self) -> np.ndarray:
        """Boolean mask of atoms carrying positive mass."""
        return self.weights > 0

    def probability(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    @classmethod
    def uniform(cls, n: int, total: float = 1.0) -> "DiscreteSpace":
        return cls(np.full(n, total / n))


@dataclass(frozen=True)
class KernelModel:
    """Transmission kernel ``kappa`` with recovery rates ``gamma`` on a space.

    Only shapes are checked here; use :func:`validate` (or build through
    :func:`build_kernel`) for the sign constraints.
    """

    space: DiscreteSpace
    kappa: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        n = self.space.n
        kappa = np.array(self.kappa, dtype=float)
        if kappa.shape != (n, n):
            raise ValidationError(f"kappa must be {n}x{n}, got {kappa.shape}")
        gamma = np.array(_as_vector(self.gamma, n, "gamma"))
        _freeze(kappa, gamma)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights

    @property
    def density(self) -> np.ndarray:
        """``k[i, j] = kappa[i, j] / mu_j``; NaN on zero-mass columns."""
        w = self.space.weights
        out = np.full_like(self.kappa, np.nan)
        pos = w > 0
        out[:, pos] = self.kappa[:, pos] / w[pos]
        return out

    @property
    def density_defined(self) -> np.ndarray:
        """Mask of columns on which :attr:`density` is defined."""
        return self.space.weights > 0

    def next_generation(self) -> np.ndarray:
        """Matrix of ``T_{k/gamma}``: ``kappa[i, j] / gamma[j]``."""
        return self.kappa / self.gamma[None, :]

    def with_kappa(self, kappa: np.ndarray) -> "KernelModel":
        return KernelModel(self.space, kappa, self.gamma)


# ---------------------------------------------------------------------------
# Kernel specifications


@dataclass(frozen=True)
class MatrixSpec:
    """Finite-group model: ``kappa = K`` verbatim."""

    K: np.ndarray
    gamma: ArrayLike
    weights: ArrayLike | None = None


@dataclass(frozen=True)
class GraphSpec:
    """SIS on a simple graph, counting measure on the vertices."""

    adjacency: np.ndarray
    beta: ArrayLike = 1.0
    theta: ArrayLike = 1.0
    gamma: ArrayLike = 1.0


@dataclass(frozen=True)
class GraphonSpec:
    """Graphon sampled on the atom grid; ``weights`` default to uniform 1/n."""

    W: np.ndarray
    beta: ArrayLike = 1.0
    theta: ArrayLike = 1.0
    gamma: ArrayLike = 1.0
    weights: ArrayLike | None = None


@dataclass(frozen=True)
class ConstantGraphonSpec:
    p: float
    n: int = 1
    beta: ArrayLike = 1.0
    theta: ArrayLike = 1.0
    gamma: ArrayLike = 1.0
    weights: ArrayLike | None = None


@dataclass(frozen=True)
class SBMSpec:
    """Stochastic block model; one atom per block, mass = block mass."""

    masses: ArrayLike
    W: np.ndarray
    beta: ArrayLike = 1.0
    theta: ArrayLike = 1.0
    gamma: ArrayLike = 1.0


@dataclass(frozen=True)
class GeometricSpec:
    """Geometric graphon ``W(x, y) = f(x - y)`` on a uniform circle grid.

    ``f`` is either a 2*pi-periodic callable or the samples
    ``f(2*pi*k/n)`` for ``k = 0..n-1``.  Grid points are
    ``x_i = 2*pi*(i - 1/2)/n`` with weights ``1/n``.
    """

    n: int
    f: Callable[[np.ndarray], np.ndarray] | ArrayLike
    beta: ArrayLike = 1.0
    theta: ArrayLike = 1.0
    gamma: ArrayLike = 1.0


@dataclass(frozen=True)
class CounterexampleChainSpec:
    """Truncation to ``N`` atoms of the chain ``kappa(i, {i+1}) = (2i+2)/(2i-1)``."""

    N: int
    weights: ArrayLike | None = None


KernelSpec = Union[
    MatrixSpec,
    GraphSpec,
    GraphonSpec,
    ConstantGraphonSpec,
    SBMSpec,
    GeometricSpec,
    CounterexampleChainSpec,
]

GRAPHON_SPECS = (GraphonSpec, ConstantGraphonSpec, SBMSpec, GeometricSpec)


@dataclass(frozen=True)
class GraphonForm:
    """Common representation of every graphon-type spec."""

    W: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    space: DiscreteSpace


def circle_grid(n: int) -> np.ndarray:
    return 2 * np.pi * (np.arange(1, n + 1) - 0.5) / n


def geometric_W(n: int, f) -> np.ndarray:
    """Circulant graphon matrix ``W[i, j] = f(x_i - x_j)``."""
    offsets = 2 * np.pi * np.arange(n) / n
    if callable(f):
        # wrap into [-pi, pi] so callables written for |r| <= pi behave
        wrapped = (offsets + np.pi) % (2 * np.pi) - np.pi
        samples = np.asarray(f(wrapped), dtype=float)
        samples = np.broadcast_to(samples, (n,)).copy()
    else:
        samples = np.asarray(f, dtype=float)
        if samples.shape != (n,):
            raise ValidationError(f"geometric f needs {n} samples, got {samples.shape}")
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return samples[idx]


def _check_graphon(W: np.ndarray) -> None:
    if np.any(W < 0) or np.any(W > 1):
        raise ValidationError("graphon values must lie in [0, 1]")
    if not np.allclose(W, W.T, rtol=0, atol=1e-12):
        raise ValidationError("graphon must be symmetric")


def _check_rates(beta, theta, gamma) -> None:
    if np.any(beta < 0):
        raise ValidationError("negative susceptibility beta")
    if np.any(theta < 0):
        raise ValidationError("negative infectiousness theta")
    if np.any(gamma <= 0):
        raise ValidationError("recovery rate not positive")


def graphon_form(spec) -> GraphonForm:
    """Reduce a graphon-type spec to ``(W, beta, theta, gamma, space)``."""
    if isinstance(spec, GraphonSpec):
        W = _as_square(spec.W, "W")
        n = W.shape[0]
        space = DiscreteSpace.uniform(n) if spec.weights is None else DiscreteSpace(_as_vector(spec.weights, n, "weights"))
    elif isinstance(spec, ConstantGraphonSpec):
        n = int(spec.n)
        if not 0 <= spec.p <= 1:
            raise ValidationError("constant graphon p must lie in [0, 1]")
        W = np.full((n, n), float(spec.p))
        space = DiscreteSpace.uniform(n) if spec.weights is None else DiscreteSpace(_as_vector(spec.weights, n, "weights"))
    elif isinstance(spec, SBMSpec):
        W = _as_square(spec.W, "W")
        n = W.shape[0]
        space = DiscreteSpace(_as_vector(spec.masses, n, "masses"))
    elif isinstance(spec, GeometricSpec):
        n = int(spec.n)
        W = geometric_W(n, spec.f)
        space = DiscreteSpace.uniform(n)
    else:
        raise ValidationError(f"{type(spec).__name__} is not a graphon-form spec")
    _check_graphon(W)
    beta = _as_vector(spec.beta, n, "beta")
    theta = _as_vector(spec.theta, n, "theta")
    gamma = _as_vector(spec.gamma, n, "gamma")
    _check_rates(beta, theta, gamma)
    return GraphonForm(W, beta, theta, gamma, space)


def graphon_kernel(form: GraphonForm) -> KernelModel:
    w = form.space.weights
    kappa = form.beta[:, None] * form.W * (form.theta * w)[None, :]
    return KernelModel(form.space, kappa, form.gamma)


def chain_rates(N: int) -> np.ndarray:
    """Super-diagonal ``(2i+2)/(2i-1)`` for ``i = 1..N-1``."""
    i = np.arange(1, N, dtype=float)
    return (2 * i + 2) / (2 * i - 1)


def build_kernel(spec: KernelSpec) -> KernelModel:
    """Build and validate the kernel model described by ``spec``."""
    if isinstance(spec, GraphonForm):
        model = graphon_kernel(spec)
    elif isinstance(spec, GRAPHON_SPECS):
        model = graphon_kernel(graphon_form(spec))
    elif isinstance(spec, MatrixSpec):
        K = _as_square(spec.K, "K")
        n = K.shape[0]
        space = DiscreteSpace(np.ones(n) if spec.weights is None else _as_vector(spec.weights, n, "weights"))
        model = KernelModel(space, K, _as_vector(spec.gamma, n, "gamma"))
    elif isinstance(spec, GraphSpec):
        A = _as_square(spec.adjacency, "adjacency")
        if not np.all((A == 0) | (A == 1)):
            raise ValidationError("adjacency entries must be 0 or 1")
        n = A.shape[0]
        beta = _as_vector(spec.beta, n, "beta")
        theta = _as_vector(spec.theta, n, "theta")
        gamma = _as_vector(spec.gamma, n, "gamma")
        _check_rates(beta, theta, gamma)
        model = KernelModel(DiscreteSpace(np.ones(n)), beta[:, None] * A * theta[None, :], gamma)
    elif isinstance(spec, CounterexampleChainSpec):
        N = int(spec.N)
        if N < 1:
            raise ValidationError("chain needs N >= 1")
        kappa = np.zeros((N, N))
        kappa[np.arange(N - 1), np.arange(1, N)] = chain_rates(N)
        weights = np.full(N, 1.0 / N) if spec.weights is None else _as_vector(spec.weights, N, "weights")
        model = KernelModel(DiscreteSpace(weights), kappa, np.ones(N))
    else:
        raise ValidationError(f"unknown kernel spec {type(spec).__name__}")
    report = validate(model)
    if not report.ok:
        raise ValidationError("; ".join(report.errors))
    return model


# ---------------------------------------------------------------------------
# Operations on models


def apply_T(model: KernelModel, g) -> np.ndarray:
    """Transmission operator ``T_kappa(g)[i] = sum_j kappa[i, j] g[j]``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (model.n,):
        raise ValidationError(f"state has shape {g.shape}, expected ({model.n},)")
    return model.kappa @ g


@dataclass(frozen=True)
class DegreeReport:
    degrees: np.ndarray
    mean_degree: float


def degrees(spec) -> DegreeReport:
    """Degree function and mean degree of a graphon-form spec.

    Masses are normalized to a probability measure first.
    """
    form = spec if isinstance(spec, GraphonForm) else graphon_form(spec)
    mu = form.space.weights
    if not np.isclose(mu.sum(), 1.0, rtol=0, atol=1e-12):
        logger.warning("total mass %.6g rescaled to 1 for degree computation", mu.sum())
    mu = mu / mu.sum()
    deg = form.W @ mu
    return DegreeReport(deg, float(deg @ mu))


def support_graph(matrix: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Boolean adjacency ``i -> j`` iff ``matrix[i, j] > 0``, off-diagonal."""
    adj = np.asarray(matrix) > 0
    np.fill_diagonal(adj, False)
    if mask is not None:
        adj = adj[np.ix_(mask, mask)]
    return adj


def is_strongly_connected(adj: np.ndarray) -> bool:
    if adj.shape[0] <= 1:
        return True
    n_comp, _ = connected_components(adj.astype(np.int8), directed=True, connection="strong")
    return n_comp == 1


def is_connected(model: KernelModel) -> bool:
    """Connectivity of the kernel restricted to positive-mass atoms."""
    return is_strongly_connected(support_graph(model.kappa, model.space.positive))


@dataclass
class ValidationReport:
    ok: bool
    gamma_min: float
    gamma_max: float
    sup_row_sum: float
    zero_mass_atoms: list[int]
    errors: list[str] = field(default_factory=list)


def validate(model: KernelModel) -> ValidationReport:
    errors = []
    if not (np.all(np.isfinite(model.gamma)) and np.all(np.isfinite(model.kappa))):
        errors.append("non-finite rate")
    if np.any(model.gamma <= 0):
        errors.append("recovery rate not positive")
    if np.any(model.kappa < 0):
        errors.append("negative transmission rate")
    zero = np.flatnonzero(model.space.weights == 0).tolist()
    return ValidationReport(
        ok=not errors,
        gamma_min=float(model.gamma.min()),
        gamma_max=float(model.gamma.max()),
        sup_row_sum=float(np.abs(model.kappa).sum(axis=1).max()),
        zero_mass_atoms=zero,
        errors=errors,
    )


# ---------------------------------------------------------------------------
# CSV input/output


def load_matrix_csv(path: str | Path) -> np.ndarray:
    """Dense matrix, one row per atom, comma separated."""
    data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    return _as_square(data, str(path))


def load_vector_csv(path: str | Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float)
    return data.ravel()


def save_matrix_csv(path: str | Path, matrix: np.ndarray) -> None:
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def save_vector_csv(path: str | Path, vector) -> None:
    np.savetxt(path, np.asarray(vector, dtype=float).reshape(-1, 1), fmt="%.17g")
