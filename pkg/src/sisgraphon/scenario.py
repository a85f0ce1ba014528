"""JSON scenario files.

A scenario is a JSON object::

    {
      "kernel": {"type": "matrix", "K": [[2.0]], "gamma": [1.0]},
      "initial_condition": 0.1,          # number | list | "ones" | "eigen_threshold:0.1"
      "horizon": 10.0,
      "dt": 0.001,                       # optional
      "outputs": {"per_atom_series": false, "prevalence_series": true,
                  "equilibrium": true, "spectral_report": true},
      "vaccination": {...},              # optional
      "lockdown": {"after": "after.csv"} # optional
    }

Kernel types: ``matrix`` (``K`` or ``K_csv``, ``gamma``, ``weights``),
``graph`` (``adjacency``), ``graphon`` (``W`` or ``W_csv``, ``weights``),
``constant_graphon`` (``p``, ``n``), ``sbm`` (``masses``, ``W``),
``geometric`` (``n`` and either ``f_samples`` or ``indicator_radius``),
``counterexample`` (``N``).  Graph-type kernels accept ``beta``, ``theta``,
``gamma`` as scalars, lists or ``*_csv`` file references.  Relative paths are
resolved against the scenario file's directory.

Vaccination: ``{"mechanism": "perfect", "eta0": ...}`` or
``{"mechanism": "leaky" | "all_or_nothing", "efficacy": [[...]],
"infectiousness_reduction": [[...]], "recovery": [[...]] (optional),
"policy": [[...]]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .space_kernel import (
    ConstantGraphonSpec,
    CounterexampleChainSpec,
    GeometricSpec,
    GraphonSpec,
    GraphSpec,
    KernelSpec,
    MatrixSpec,
    SBMSpec,
    ValidationError,
    load_matrix_csv,
    load_vector_csv,
)

DEFAULT_OUTPUTS = {
    "per_atom_series": False,
    "prevalence_series": True,
    "equilibrium": True,
    "spectral_report": True,
}


@dataclass
class Scenario:
    kernel: KernelSpec
    initial_condition: object = 0.1
    horizon: float = 10.0
    dt: float | None = None
    outputs: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUTS))
    vaccination: dict | None = None
    lockdown: dict | None = None
    base_dir: Path = Path(".")

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _field(raw: dict, name: str, base: Path, default=None, matrix: bool = False):
    if f"{name}_csv" in raw:
        path = Path(raw[f"{name}_csv"])
        path = path if path.is_absolute() else base / path
        return load_matrix_csv(path) if matrix else load_vector_csv(path)
    if name in raw:
        return np.asarray(raw[name], dtype=float) if matrix else raw[name]
    if default is None:
        raise ValidationError(f"kernel field '{name}' is missing")
    return default


def _indicator(radius: float):
    return lambda r: (np.abs(r) <= radius).astype(float)


def parse_kernel(raw: dict, base: Path = Path(".")) -> KernelSpec:
    kind = raw.get("type")
    rates = {k: _field(raw, k, base, default=1.0) for k in ("beta", "theta", "gamma")}
    weights = _field(raw, "weights", base) if ("weights" in raw or "weights_csv" in raw) else None
    if kind == "matrix":
        return MatrixSpec(_field(raw, "K", base, matrix=True), rates["gamma"], weights)
    if kind == "graph":
        return GraphSpec(_field(raw, "adjacency", base, matrix=True), **rates)
    if kind == "graphon":
        return GraphonSpec(_field(raw, "W", base, matrix=True), weights=weights, **rates)
    if kind == "constant_graphon":
        return ConstantGraphonSpec(float(raw["p"]), int(raw.get("n", 1)), weights=weights, **rates)
    if kind == "sbm":
        return SBMSpec(_field(raw, "masses", base), _field(raw, "W", base, matrix=True), **rates)
    if kind == "geometric":
        if "indicator_radius" in raw:
            f = _indicator(float(raw["indicator_radius"]))
        else:
            f = np.asarray(_field(raw, "f_samples", base), dtype=float)
        return GeometricSpec(int(raw["n"]), f, **rates)
    if kind == "counterexample":
        return CounterexampleChainSpec(int(raw["N"]))
    raise ValidationError(f"unknown kernel type {kind!r}")


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "kernel" not in raw:
        raise ValidationError("scenario must be an object with a 'kernel' entry")
    base = path.parent
    horizon = float(raw.get("horizon", 10.0))
    if horizon < 0:
        raise ValidationError("horizon must be non-negative")
    outputs = dict(DEFAULT_OUTPUTS)
    outputs.update(raw.get("outputs", {}))
    return Scenario(
        kernel=parse_kernel(raw["kernel"], base),
        initial_condition=raw.get("initial_condition", 0.1),
        horizon=horizon,
        dt=raw.get("dt"),
        outputs=outputs,
        vaccination=raw.get("vaccination"),
        lockdown=raw.get("lockdown"),
        base_dir=base,
    )
