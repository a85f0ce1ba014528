"""Command-line frontend: ``sisgraphon <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
``SIS_TOL`` overrides the regime classification tolerance (default 1e-9).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dynamics, lockdown, spectral, vaccination
from .dynamics import IntegrationError, StateError
from .scenario import Scenario, load_scenario
from .space_kernel import (
    GRAPHON_SPECS,
    CounterexampleChainSpec,
    KernelModel,
    ValidationError,
    build_kernel,
    degrees,
    is_connected,
    load_matrix_csv,
)
from .spectral import SpectralError

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3
GELFAND_N = 10_000


class NonConvergence(RuntimeError):
    pass


def regime_tol() -> float:
    return float(os.environ.get("SIS_TOL", dynamics.REGIME_TOL))


def _clean(obj):
    """JSON-ready copy: numpy to builtins, NaN to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float, Fraction)):
        v = float(obj)
        return None if math.isnan(v) else v
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# scenario -> model


def vaccinated(scenario: Scenario, base: KernelModel):
    """``(model, product)`` after applying the scenario's vaccination, if any."""
    vac = scenario.vaccination
    if not vac:
        return base, None
    mechanism = vac.get("mechanism", "perfect")
    if mechanism == "perfect":
        return vaccination.build_perfect_vaccine_model(base, vac["eta0"]), None
    vaccines = vaccination.VaccineSet(
        np.asarray(vac["efficacy"], dtype=float),
        np.asarray(vac.get("infectiousness_reduction", 0.0), dtype=float),
        None if vac.get("recovery") is None else np.asarray(vac["recovery"], dtype=float),
    )
    policy = vaccination.VaccinationPolicy(np.asarray(vac["policy"], dtype=float))
    product = vaccination.build_vaccinated_model(base, vaccines, policy, mechanism)
    return product.model, product


def initial_state(scenario: Scenario, model: KernelModel, base_n: int) -> np.ndarray:
    ic = scenario.initial_condition
    if isinstance(ic, str):
        if ic == "ones":
            return np.ones(model.n)
        if ic.startswith("eigen_threshold:"):
            eps = float(ic.split(":", 1)[1])
            return spectral.eigen_threshold(model, eps).w
        raise ValidationError(f"unknown initial condition {ic!r}")
    g = np.asarray(ic, dtype=float)
    if g.ndim == 0:
        g = np.full(base_n, float(g))
    if g.size == model.n:
        return g
    if g.size == base_n and model.n % base_n == 0:
        # vaccinated atoms start uninfected
        m = model.n // base_n
        out = np.zeros((base_n, m))
        out[:, 0] = g
        return out.ravel()
    raise ValidationError(f"initial condition has {g.size} entries, model has {model.n} atoms")


def _equilibrium_summary(rep: dynamics.EquilibriumReport, weights: np.ndarray) -> dict:
    # "mean" is the mass-weighted mean, i.e. the equilibrium prevalence
    return {
        "sup": float(rep.g_star.max()),
        "mean": float(dynamics.prevalence(weights, rep.g_star)),
        "residual": rep.residual,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "method": rep.method,
    }


# ---------------------------------------------------------------------------
# commands


def analyze(scenario: Scenario) -> dict:
    spec = scenario.kernel
    base = build_kernel(spec)
    if isinstance(spec, CounterexampleChainSpec):
        chain = dynamics.counterexample_equilibria(0.5, spec.N)
        return {
            "kernel": "counterexample",
            "N": spec.N,
            "r0": None,
            "spectral_bound": None,
            "regime": None,
            "connected": is_connected(base),
            "gelfand_n": GELFAND_N,
            "gelfand_sequence": spectral.gelfand_sequence(spec, GELFAND_N),
            "caveat": "truncated-spectrum: the truncated chain is nilpotent; "
            "its radius (0) is not the infinite operator's R0",
            "equilibrium": {
                "sup": max(chain.values),
                "mean": float(np.asarray(chain.values, dtype=float) @ base.weights / base.space.total_mass),
                "residual": chain.residual,
                "alpha": 0.5,
            },
        }
    model, _ = vaccinated(scenario, base)
    diag = dynamics.classify_regime(model, regime_tol())
    report = {
        "r0": diag.r0,
        "spectral_bound": diag.spectral_bound,
        "regime": diag.regime,
        "connected": diag.connected,
    }
    if isinstance(spec, GRAPHON_SPECS) and not scenario.vaccination:
        deg = degrees(spec)
        lower, upper = lockdown.r0_bounds(spec)
        report["degrees"] = {"degrees": deg.degrees, "mean_degree": deg.mean_degree}
        report["r0_bounds"] = {"lower": lower, "upper": upper}
    if scenario.outputs.get("equilibrium", True):
        eq = dynamics.maximal_equilibrium(model)
        report["equilibrium"] = _equilibrium_summary(eq, model.weights)
        if not eq.converged:
            raise NonConvergence(dump(report))
    return report


def equilibrium(scenario: Scenario) -> dict:
    base = build_kernel(scenario.kernel)
    model, _ = vaccinated(scenario, base)
    eq = dynamics.maximal_equilibrium(model)
    out = _equilibrium_summary(eq, model.weights)
    out.update(g_star=eq.g_star, regime=eq.regime, r0=eq.r0, spectral_bound=eq.spectral_bound)
    if not eq.converged:
        raise NonConvergence(dump(out))
    return out


def simulate(scenario: Scenario, out: Path, per_atom: bool = False) -> dict:
    base = build_kernel(scenario.kernel)
    model, product = vaccinated(scenario, base)
    g0 = initial_state(scenario, model, base.n)
    traj = dynamics.integrate(model, g0, scenario.horizon, scenario.dt)
    if product is not None and product.mechanism is vaccination.Mechanism.ALL_OR_NOTHING:
        traj.states = traj.states * (1 - product.efficacy_flat())[None, :]
        traj.prevalence = dynamics.prevalence(model.weights, traj.states)
    elif scenario.vaccination and product is None:
        eta0 = np.broadcast_to(np.asarray(scenario.vaccination["eta0"], dtype=float), (base.n,))
        traj.prevalence = traj.states @ (base.weights * eta0) / base.space.total_mass
    traj.to_csv(out, per_atom=per_atom or scenario.outputs.get("per_atom_series", False))
    summary = {"final_prevalence": float(traj.prevalence[-1]), "t_end": float(traj.times[-1]), "csv": str(out)}
    if scenario.outputs.get("equilibrium", True):
        eq = dynamics.maximal_equilibrium(model)
        summary["equilibrium_distance"] = float(np.abs(traj.states[-1] - (
            eq.g_star * (1 - product.efficacy_flat())
            if product is not None and product.mechanism is vaccination.Mechanism.ALL_OR_NOTHING
            else eq.g_star
        )).max())
        summary["regime"] = eq.regime
    return summary


def vaccinate(scenario: Scenario) -> dict:
    vac = scenario.vaccination
    if not vac:
        raise ValidationError("scenario has no 'vaccination' entry")
    base = build_kernel(scenario.kernel)
    out = {"r0_base": spectral.r0(base), "mechanism": vac.get("mechanism", "perfect")}
    model, product = vaccinated(scenario, base)
    if product is None:
        out["r0_vaccinated"] = spectral.r0(model)
    else:
        out["r0_leaky"] = vaccination.r0_vaccinated(base, product.vaccines, product.policy, "leaky")
        out["r0_all_or_nothing"] = vaccination.r0_vaccinated(base, product.vaccines, product.policy, "all_or_nothing")
        out["r0_vaccinated"] = out[f"r0_{product.mechanism.value}"]
    out["regime"] = dynamics.classify_regime(model, regime_tol()).regime
    return out


def lockdown_cmd(scenario: Scenario, after: Path | None) -> dict:
    spec = scenario.kernel
    if not isinstance(spec, GRAPHON_SPECS):
        raise ValidationError("lockdown needs a graphon-form kernel")
    if after is None:
        ref = (scenario.lockdown or {}).get("after")
        if ref is None:
            raise ValidationError("no after-graphon given (--after or scenario 'lockdown.after')")
        W = load_matrix_csv(scenario.resolve(ref)) if isinstance(ref, str) else np.asarray(ref, dtype=float)
    else:
        W = load_matrix_csv(after)
    after_form = lockdown.with_graphon(spec, W)
    return lockdown.partial_lockdown_check(after_form, spec).as_dict()


def counterexample(alpha: float, n: int) -> dict:
    chain = dynamics.counterexample_equilibria(alpha, n)
    return {
        "alpha": alpha,
        "N": n,
        "values": chain.values,
        "residual": chain.residual,
        "blowup_index": chain.blowup_index,
        "gelfand_sequence": spectral.gelfand_sequence(None, n),
    }


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sisgraphon", description="SIS epidemics on kernels and graphons")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="R0, spectral bound, regime and equilibrium summary")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")

    p = sub.add_parser("simulate", help="integrate the SIS flow and write a CSV trajectory")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--per-atom", action="store_true", help="add one column per atom")

    p = sub.add_parser("equilibrium", help="maximal equilibrium g*")
    p.add_argument("scenario", type=Path)

    p = sub.add_parser("vaccinate", help="reproduction numbers under the scenario's vaccination")
    p.add_argument("scenario", type=Path)

    p = sub.add_parser("lockdown", help="perfect/partial lockdown report")
    p.add_argument("scenario", type=Path)
    p.add_argument("--after", type=Path)

    p = sub.add_parser("counterexample", help="equilibria of the critical chain kernel")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n", type=int, default=20)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "counterexample":
            result = counterexample(args.alpha, args.n)
        else:
            scenario = load_scenario(args.scenario)
            if args.command == "analyze":
                result = analyze(scenario)
            elif args.command == "simulate":
                result = simulate(scenario, args.out, args.per_atom)
            elif args.command == "equilibrium":
                result = equilibrium(scenario)
            elif args.command == "vaccinate":
                result = vaccinate(scenario)
            else:
                result = lockdown_cmd(scenario, args.after)
    except NonConvergence as exc:
        print(str(exc))
        print("error: equilibrium iteration did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValidationError, StateError, SpectralError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    text = dump(result)
    if getattr(args, "out", None) is not None and args.command == "analyze":
        args.out.write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
