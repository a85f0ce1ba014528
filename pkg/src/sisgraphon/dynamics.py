"""SIS vector field, RK4 semiflow on the unit box, and equilibria."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .space_kernel import KernelModel, chain_rates, is_connected
from .spectral import r0, spectral_bound

OVERSHOOT = 1e-9
REGIME_TOL = 1e-9


class IntegrationError(RuntimeError):
    pass


class StateError(ValueError):
    pass


class Regime(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


def check_state(g, n: int, slack: float = OVERSHOOT) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        g = np.full(n, float(g))
    if g.shape != (n,):
        raise StateError(f"state has shape {g.shape}, expected ({n},)")
    if np.any(g < -slack) or np.any(g > 1 + slack):
        raise StateError("state leaves [0, 1]")
    return g


def vector_field(model: KernelModel, g) -> np.ndarray:
    """``F(g) = (1 - g) * T_kappa(g) - gamma * g``."""
    g = check_state(g, model.n)
    return (1 - g) * (model.kappa @ g) - model.gamma * g


def _field(kappa: np.ndarray, gamma: np.ndarray, g: np.ndarray) -> np.ndarray:
    return (1 - g) * (kappa @ g) - gamma * g


def default_dt(model: KernelModel) -> float:
    norm_T = float(np.abs(model.kappa).sum(axis=1).max())
    return min(0.01, 0.1 / (norm_T + float(model.gamma.max())))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    prevalence: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path: str | Path, per_atom: bool = False) -> None:
        """Write ``t,prevalence[,u_1..u_n]`` rows."""
        n = self.states.shape[1]
        header = ["t", "prevalence"] + ([f"u_{i + 1}" for i in range(n)] if per_atom else [])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k, t in enumerate(self.times):
                row = [repr(float(t)), repr(float(self.prevalence[k]))]
                if per_atom:
                    row.extend(repr(float(v)) for v in self.states[k])
                writer.writerow(row)


def prevalence(weights: np.ndarray, states: np.ndarray) -> np.ndarray:
    return states @ weights / weights.sum()


def integrate(model: KernelModel, g0, t_end: float, dt: float | None = None) -> Trajectory:
    """Classic fixed-step RK4, recording every step.

    States are clamped to [0, 1] after each step; an excursion beyond
    ``OVERSHOOT`` before clamping raises :class:`IntegrationError`.
    """
    g = check_state(g0, model.n, slack=0.0).copy()
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    dt = default_dt(model) if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(int(math.ceil(t_end / dt - 1e-9)), 0)
    times = np.minimum(np.arange(n_steps + 1) * dt, t_end)
    if n_steps:
        times[-1] = t_end
    states = np.zeros((n_steps + 1, model.n))
    if not np.any(g):
        # disease-free equilibrium
        return Trajectory(times, states, np.zeros(n_steps + 1))
    states[0] = g
    kappa, gamma = model.kappa, model.gamma
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        k1 = _field(kappa, gamma, g)
        k2 = _field(kappa, gamma, g + 0.5 * h * k1)
        k3 = _field(kappa, gamma, g + 0.5 * h * k2)
        k4 = _field(kappa, gamma, g + h * k3)
        g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if g.min() < -OVERSHOOT or g.max() > 1 + OVERSHOOT:
            raise IntegrationError(f"step size too large: state left [0, 1] at t={times[k + 1]:.6g}")
        np.clip(g, 0.0, 1.0, out=g)
        states[k + 1] = g
    return Trajectory(times, states, prevalence(model.weights, states))


@dataclass
class RegimeDiagnostics:
    regime: Regime
    r0: float
    spectral_bound: float
    connected: bool


def classify_regime(model: KernelModel, tol: float = REGIME_TOL) -> RegimeDiagnostics:
    s = spectral_bound(model)
    if s > tol:
        regime = Regime.SUPERCRITICAL
    elif s < -tol:
        regime = Regime.SUBCRITICAL
    else:
        regime = Regime.CRITICAL
    return RegimeDiagnostics(regime, r0(model), s, is_connected(model))


@dataclass
class EquilibriumReport:
    g_star: np.ndarray
    residual: float
    method: str
    regime: Regime
    r0: float
    spectral_bound: float
    converged: bool
    iterations: int


def maximal_equilibrium(
    model: KernelModel,
    step_tol: float = 1e-12,
    residual_tol: float = 1e-10,
    max_iter: int = 10**6,
) -> EquilibriumReport:
    """Maximal equilibrium by iterating ``g <- T(g) / (gamma + T(g))`` from 1.

    The map is monotone and sends 1 below itself, so the iterates decrease
    to the largest fixed point.
    """
    kappa, gamma = model.kappa, model.gamma
    g = np.ones(model.n)
    it = 0
    for it in range(1, max_iter + 1):
        Tg = kappa @ g
        new = Tg / (gamma + Tg)
        step = float(np.abs(new - g).max())
        g = new
        if step < step_tol:
            break
    residual = float(np.abs(_field(kappa, gamma, g)).max())
    diag = classify_regime(model)
    return EquilibriumReport(
        g_star=g,
        residual=residual,
        method="fixed-point",
        regime=diag.regime,
        r0=diag.r0,
        spectral_bound=diag.spectral_bound,
        converged=residual <= residual_tol and it < max_iter,
        iterations=it,
    )


def one_group_closed_form(R0: float, V0: float, t: float) -> float:
    """Solution of ``V' = R0 (1 - V) V - V`` with ``V(0) = V0``.

    Time is measured in units of ``1/gamma``.
    """
    if not 0 < V0 <= 1:
        raise StateError("V0 must lie in (0, 1]")
    if R0 < 0:
        raise ValueError("R0 must be non-negative")
    if R0 == 1:
        return 1.0 / (1.0 / V0 + t)
    a = R0 - 1
    return a / (R0 + (a / V0 - R0) * math.exp(-a * t))


@dataclass
class ChainEquilibrium:
    alpha: float
    values: list
    residual: float
    blowup_index: int | None  # 1-based n with g(n) >= 1, if any


def chain_field(g: Sequence[float]) -> np.ndarray:
    """SIS field on the truncated chain (gamma = 1), first ``N-1`` coordinates."""
    g = np.asarray([float(v) for v in g])
    N = g.size
    return (1 - g[:-1]) * chain_rates(N) * g[1:] - g[:-1]


def counterexample_equilibria(alpha, N: int) -> ChainEquilibrium:
    """Candidate equilibria of the infinite chain.

    ``g(1) = alpha`` and ``g(n+1) = (2n-1)/(2n+2) * g(n) / (1 - g(n))``, cut to
    0 once a term reaches 1.  Passing a :class:`~fractions.Fraction` keeps the
    recursion exact.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    exact = isinstance(alpha, Fraction)
    values = [alpha]
    blowup = None
    for n in range(1, N):
        g = values[-1]
        if g >= 1:
            if blowup is None:
                blowup = n
            values.append(Fraction(0) if exact else 0.0)
            continue
        c = Fraction(2 * n - 1, 2 * n + 2) if exact else (2 * n - 1) / (2 * n + 2)
        values.append(c * g / (1 - g))
    if blowup is None and values[-1] >= 1:
        blowup = N
    residual = float(np.abs(chain_field(values)).max())
    return ChainEquilibrium(float(alpha), values, residual, blowup)
