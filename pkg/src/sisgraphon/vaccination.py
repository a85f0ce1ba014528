"""Vaccination policies as kernels on the product space of features and vaccines.

Product atoms ``(x, xi)`` are flattened row-major: index ``x * m + xi``.
Column 0 of every vaccine array is the "no vaccine" type.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .space_kernel import DiscreteSpace, KernelModel, ValidationError
from .spectral import spectral_radius


class Mechanism(str, enum.Enum):
    LEAKY = "leaky"
    ALL_OR_NOTHING = "all_or_nothing"


def _matrix(value, shape, name) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(shape, float(arr))
    if arr.shape != shape:
        raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class VaccineSet:
    efficacy: np.ndarray
    infectiousness_reduction: np.ndarray
    recovery: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.efficacy, dtype=float)
        if e.ndim != 2:
            raise ValidationError("efficacy must be an n x m matrix")
        d = _matrix(self.infectiousness_reduction, e.shape, "infectiousness_reduction")
        for name, arr in (("efficacy", e), ("infectiousness_reduction", d)):
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValidationError(f"{name} must lie in [0, 1]")
        if np.any(e[:, 0] != 0) or np.any(d[:, 0] != 0):
            raise ValidationError("the no-vaccine column must have zero efficacy and reduction")
        object.__setattr__(self, "efficacy", e)
        object.__setattr__(self, "infectiousness_reduction", d)
        if self.recovery is not None:
            g = _matrix(self.recovery, e.shape, "recovery")
            if np.any(g <= 0):
                raise ValidationError("recovery rate not positive")
            object.__setattr__(self, "recovery", g)

    @property
    def shape(self) -> tuple[int, int]:
        return self.efficacy.shape

    @classmethod
    def perfect(cls, n: int) -> "VaccineSet":
        """No vaccine plus one vaccine with full efficacy and reduction."""
        e = np.zeros((n, 2))
        e[:, 1] = 1.0
        return cls(e, e.copy())

    def recovery_for(self, base_gamma: np.ndarray) -> np.ndarray:
        if self.recovery is not None:
            return self.recovery
        return np.repeat(base_gamma[:, None], self.shape[1], axis=1)


@dataclass(frozen=True)
class VaccinationPolicy:
    eta: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if eta.ndim != 2:
            raise ValidationError("policy must be an n x m matrix")
        if np.any(eta < 0):
            raise ValidationError("policy has negative entries")
        if np.any(np.abs(eta.sum(axis=1) - 1) > 1e-12):
            raise ValidationError("policy rows must sum to 1")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_unvaccinated(cls, eta0) -> "VaccinationPolicy":
        eta0 = np.asarray(eta0, dtype=float)
        return cls(np.column_stack([eta0, 1 - eta0]))


@dataclass(frozen=True)
class ProductModel:
    model: KernelModel
    mechanism: Mechanism
    base: KernelModel
    vaccines: VaccineSet
    policy: VaccinationPolicy

    @property
    def shape(self) -> tuple[int, int]:
        return self.vaccines.shape

    def efficacy_flat(self) -> np.ndarray:
        return self.vaccines.efficacy.ravel()


def _check_dims(base: KernelModel, vaccines: VaccineSet, policy: VaccinationPolicy) -> None:
    if vaccines.shape[0] != base.n or policy.eta.shape != vaccines.shape:
        raise ValidationError(
            f"dimension mismatch: base n={base.n}, vaccines {vaccines.shape}, policy {policy.eta.shape}"
        )


def build_vaccinated_model(
    base: KernelModel,
    vaccines: VaccineSet,
    policy: VaccinationPolicy,
    mechanism: Mechanism | str,
) -> ProductModel:
    """SIS kernel on the product atoms for the given mechanism.

    Leaky: ``(1-e(x,xi)) (1-delta(y,zeta)) kappa[x,y] eta(y,zeta)``.
    All-or-nothing (on ``v = u / (1-e)``): ``(1-e(y,zeta))`` replaces
    ``(1-e(x,xi))``.
    """
    mechanism = Mechanism(mechanism)
    _check_dims(base, vaccines, policy)
    n, m = vaccines.shape
    e, d, eta = vaccines.efficacy, vaccines.infectiousness_reduction, policy.eta
    source = ((1 - d) * eta).ravel()  # indexed by (y, zeta)
    if mechanism is Mechanism.LEAKY:
        target = (1 - e).ravel()
    else:
        target = np.ones(n * m)
        source = source * (1 - e).ravel()
    kappa = np.kron(base.kappa, np.ones((m, m))) * target[:, None] * source[None, :]
    weights = (base.weights[:, None] * eta).ravel()
    gamma = vaccines.recovery_for(base.gamma).ravel()
    model = KernelModel(DiscreteSpace(weights), kappa, gamma)
    return ProductModel(model, mechanism, base, vaccines, policy)


def next_generation_factors(base: KernelModel, vaccines: VaccineSet, policy: VaccinationPolicy):
    """Matrices of the integral part ``T`` and the multiplication ``M = 1 - e``."""
    _check_dims(base, vaccines, policy)
    n, m = vaccines.shape
    gamma = vaccines.recovery_for(base.gamma)
    col = ((1 - vaccines.infectiousness_reduction) * policy.eta / gamma).ravel()
    T = np.kron(base.kappa, np.ones((m, m))) * col[None, :]
    M = np.diag((1 - vaccines.efficacy).ravel())
    return T, M


def r0_vaccinated(
    base: KernelModel, vaccines: VaccineSet, policy: VaccinationPolicy, mechanism, tol: float = 1e-12
) -> float:
    """``r(TM)`` for all-or-nothing, ``r(MT)`` for leaky.

    The two radii coincide; the tighter default ``tol`` keeps independently
    computed values for the two mechanisms within 1e-10 of each other.
    """
    mechanism = Mechanism(mechanism)
    T, M = next_generation_factors(base, vaccines, policy)
    A = T @ M if mechanism is Mechanism.ALL_OR_NOTHING else M @ T
    return spectral_radius(A, tol=tol).radius


def build_perfect_vaccine_model(base: KernelModel, eta0) -> KernelModel:
    """Reduced model for the unvaccinated when the vaccine is perfect.

    ``eta0[y]`` is the unvaccinated fraction of atom ``y``.
    """
    eta0 = np.asarray(eta0, dtype=float)
    if eta0.ndim == 0:
        eta0 = np.full(base.n, float(eta0))
    if eta0.shape != (base.n,):
        raise ValidationError(f"eta0 must have length {base.n}")
    if np.any(eta0 < 0) or np.any(eta0 > 1):
        raise ValidationError("eta0 must lie in [0, 1]")
    return base.with_kappa(base.kappa * eta0[None, :])


def total_prevalence(product: ProductModel, u) -> float:
    """Fraction of the whole population infected, ``u`` on product atoms."""
    u = np.asarray(u, dtype=float).ravel()
    n, m = product.shape
    if u.size != n * m:
        raise ValidationError(f"state has {u.size} entries, expected {n * m}")
    mu = product.base.weights
    return float(u @ (mu[:, None] * product.policy.eta).ravel() / mu.sum())


def aon_u_from_v(product: ProductModel, v) -> np.ndarray:
    """Infected probability ``u = (1 - e) v`` from the all-or-nothing variable."""
    return (1 - product.efficacy_flat()) * np.asarray(v, dtype=float)


def aon_field_u(product: ProductModel, u) -> np.ndarray:
    """Right-hand side of the all-or-nothing equation written in ``u``."""
    n, m = product.shape
    e = product.vaccines.efficacy.ravel()
    d = product.vaccines.infectiousness_reduction.ravel()
    eta = product.policy.eta.ravel()
    gamma = product.model.gamma
    K = np.kron(product.base.kappa, np.ones((m, m)))
    u = np.asarray(u, dtype=float)
    return -gamma * u + (1 - e - u) * (K @ ((1 - d) * eta * u))
