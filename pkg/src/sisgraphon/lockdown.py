"""Lockdown policies as graphon reductions and the degree bounds on R0."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .space_kernel import GraphonForm, ValidationError, degrees, graphon_form, graphon_kernel
from .spectral import r0

logger = logging.getLogger(__name__)


def is_perfect_lockdown(W_after, W_before, atol: float = 1e-12) -> bool:
    """Entrywise ``W_after <= W_before``."""
    a = np.asarray(W_after, dtype=float)
    b = np.asarray(W_before, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"grid mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b + atol))


def _form(spec) -> GraphonForm:
    return spec if isinstance(spec, GraphonForm) else graphon_form(spec)


def _probability(form: GraphonForm) -> np.ndarray:
    mu = form.space.weights
    if not math.isclose(mu.sum(), 1.0, abs_tol=1e-12):
        logger.warning("total mass %.6g rescaled to 1", mu.sum())
    return mu / mu.sum()


def rate_norms(form: GraphonForm) -> tuple[float, float]:
    """``(ess sup beta*theta/gamma, L1 norm of gamma/(beta*theta))``.

    The L1 norm is NaN when ``beta*theta`` vanishes on a positive-mass atom.
    """
    mu = _probability(form)
    pos = mu > 0
    bt = form.beta * form.theta
    sup_ratio = float(np.max(bt[pos] / form.gamma[pos]))
    if np.any(bt[pos] == 0):
        return sup_ratio, math.nan
    l1 = float(np.sum(mu[pos] * form.gamma[pos] / bt[pos]))
    return sup_ratio, l1


def r0_bounds(spec) -> tuple[float, float]:
    """``d_W / ||gamma/(beta theta)||_1 <= R0 <= ||beta theta/gamma|| sup deg_W``."""
    form = _form(spec)
    sup_ratio, l1 = rate_norms(form)
    deg = degrees(form)
    pos = form.space.weights > 0
    upper = sup_ratio * float(deg.degrees[pos].max())
    lower = deg.mean_degree / l1 if not math.isnan(l1) else math.nan
    return lower, upper


@dataclass
class LockdownReport:
    perfect: bool
    partial: bool
    constant_C: float
    sup_degree_after: float
    mean_degree_before: float
    r0_before: float
    r0_after: float
    lower_bound: float
    upper_bound: float

    def as_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in self.__dict__.items()}


def partial_lockdown_check(spec_after, spec_before) -> LockdownReport:
    """Compare two graphons sharing ``beta``, ``theta``, ``gamma`` and ``mu``.

    ``partial`` is the sufficient condition ``sup deg_{W'} <= C d_W`` with
    ``C = 1 / (||beta theta/gamma|| ||gamma/(beta theta)||_1)``.
    """
    after, before = _form(spec_after), _form(spec_before)
    if after.W.shape != before.W.shape:
        raise ValidationError("lockdown graphons live on different grids")
    sup_ratio, l1 = rate_norms(before)
    if math.isnan(l1):
        raise ValidationError("beta*theta vanishes on a positive-mass atom; C is undefined")
    C = 1.0 / (sup_ratio * l1)
    pos = after.space.weights > 0
    sup_after = float(degrees(after).degrees[pos].max())
    d_before = degrees(before).mean_degree
    lower, upper = r0_bounds(after)
    return LockdownReport(
        perfect=is_perfect_lockdown(after.W, before.W),
        partial=bool(sup_after <= C * d_before + 1e-12),
        constant_C=C,
        sup_degree_after=sup_after,
        mean_degree_before=d_before,
        r0_before=r0(graphon_kernel(before)),
        r0_after=r0(graphon_kernel(after)),
        lower_bound=lower,
        upper_bound=upper,
    )


def with_graphon(spec, W) -> GraphonForm:
    """Same rates and masses as ``spec`` with a different graphon."""
    form = _form(spec)
    W = np.asarray(W, dtype=float)
    if W.shape != form.W.shape:
        raise ValidationError(f"grid mismatch: {W.shape} vs {form.W.shape}")
    if np.any(W < 0) or np.any(W > 1) or not np.allclose(W, W.T, rtol=0, atol=1e-12):
        raise ValidationError("graphon must be symmetric with values in [0, 1]")
    return replace(form, W=W)
