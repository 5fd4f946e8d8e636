"""Experiment drivers: seeded initial data, stability sweeps, convergence
studies, energy traces and the associated CSV/JSON serialization.

All randomness comes from numpy's PCG64 generator with an explicit 64-bit
seed, so every run is reproducible from its (seed, config) pair.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import potential
from .diagnostics import EnergyRecord, ErrorTriple, convergence_orders, error_norms, record
from .field import Field2D, analyze, mean
from .legendre import Basis1D, build_basis
from .stepper import (
    BlowUpError,
    SchemeParams,
    StepperState,
    build_stepper,
    initial_state,
    stability_thresholds,
    step,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunResult",
    "SweepCell",
    "SweepResult",
    "ConvergenceRow",
    "ConvergenceResult",
    "TraceResult",
    "random_initial",
    "prepare_phi1",
    "run_steps",
    "is_stable",
    "stabilizer_ladder",
    "min_stabilizer",
    "run_stability_sweep",
    "run_convergence_study",
    "run_energy_trace",
    "run_evolve",
    "write_trace_csv",
    "write_convergence_csv",
    "write_sweep_csv",
    "write_json",
]

DEFAULT_SEED = 2017

KINDS = ("evolve", "converge", "sweep", "trace")

_POTENTIALS: dict[str, Callable] = {
    "truncated": potential.f_trunc,
    "quartic": potential.f_quartic,
    "none": potential.f_zero,
}

_TABLE_TAUS = [10.0, 1.0, 0.1, 0.01, 0.001, 1e-4, 1e-5, 1e-6]


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass
class ExperimentConfig:
    """Complete description of one experiment run.

    Unset scheme fields are filled with per-kind defaults by
    :meth:`resolved`; validation errors raise :class:`ConfigError`.
    """

    kind: str
    m: int = 63
    epsilon: float = 0.05
    gamma: float = 0.0025
    stab_a: float | None = None
    stab_b: float | None = None
    tau: float | None = None
    taus: list[float] | None = None
    tau_ref: float = 1e-3
    t_final: float | None = None
    steps: int | None = None
    seed: int = DEFAULT_SEED
    max_steps: int | None = None
    out_dir: str | None = None
    potential: str = "truncated"
    initial_data: str | None = None  # "phi0" (raw random) or "phi1" (prepared)
    prep_gamma: float = 1.0
    prep_tau: float | None = None
    record_stride: int = 1
    snapshot_in: str | None = None
    make_plots: bool = True
    # sweep-specific grid
    gammas: list[float] = field(default_factory=lambda: [0.0025, 1.0])
    fixed_b: list[float] = field(default_factory=lambda: [0.0, 10.0])
    fixed_a: list[float] = field(default_factory=lambda: [0.0, 4.0])
    ladder_max_exp: int = 7

    def resolved(self) -> "ExperimentConfig":
        """Copy with per-kind defaults filled in and basic checks applied."""
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.potential not in _POTENTIALS:
            raise ConfigError(f"unknown potential {self.potential!r}")
        if self.m < 3:
            raise ConfigError(f"basis dimension must be >= 3, got {self.m}")
        cfg = replace(self)
        if cfg.kind == "converge":
            cfg.stab_a = 0.1 if cfg.stab_a is None else cfg.stab_a
            cfg.stab_b = 40.0 if cfg.stab_b is None else cfg.stab_b
            cfg.taus = [0.16, 0.08, 0.04, 0.02, 0.01, 0.005] if cfg.taus is None else cfg.taus
            cfg.t_final = 12.8 if cfg.t_final is None else cfg.t_final
            cfg.initial_data = "phi1" if cfg.initial_data is None else cfg.initial_data
            if len(cfg.taus) < 2:
                raise ConfigError("convergence study needs at least two taus")
            if cfg.tau_ref is None or cfg.tau_ref <= 0:
                raise ConfigError("convergence study needs a positive reference tau")
            for tau in [*cfg.taus, cfg.tau_ref]:
                _steps_for(cfg.t_final, tau)
        elif cfg.kind == "trace":
            cfg.stab_a = 1.0 if cfg.stab_a is None else cfg.stab_a
            cfg.stab_b = 20.0 if cfg.stab_b is None else cfg.stab_b
            cfg.taus = [0.001, 0.01, 0.1, 1.0] if cfg.taus is None else cfg.taus
            cfg.t_final = 12.8 if cfg.t_final is None else cfg.t_final
            cfg.initial_data = "phi1" if cfg.initial_data is None else cfg.initial_data
            if not cfg.taus:
                raise ConfigError("energy trace needs at least one tau")
            for tau in cfg.taus:
                _steps_for(cfg.t_final, tau)
        elif cfg.kind == "sweep":
            cfg.steps = 4096 if cfg.steps is None else cfg.steps
            cfg.taus = list(_TABLE_TAUS) if cfg.taus is None else cfg.taus
            cfg.initial_data = "phi0" if cfg.initial_data is None else cfg.initial_data
            if not cfg.taus or not cfg.gammas:
                raise ConfigError("stability sweep needs taus and gammas")
        elif cfg.kind == "evolve":
            cfg.stab_a = 1.0 if cfg.stab_a is None else cfg.stab_a
            cfg.stab_b = 20.0 if cfg.stab_b is None else cfg.stab_b
            cfg.tau = 1e-3 if cfg.tau is None else cfg.tau
            cfg.initial_data = "phi0" if cfg.initial_data is None else cfg.initial_data
            if cfg.steps is None:
                if cfg.t_final is None:
                    raise ConfigError("evolve needs either steps or t_final")
                cfg.steps = _steps_for(cfg.t_final, cfg.tau)
        if cfg.initial_data not in (None, "phi0", "phi1"):
            raise ConfigError(f"unknown initial data {cfg.initial_data!r}")
        return cfg

    def scheme_params(self, tau: float, gamma: float | None = None) -> SchemeParams:
        return SchemeParams(
            epsilon=self.epsilon,
            gamma=self.gamma if gamma is None else gamma,
            tau=tau,
            A=self.stab_a,
            B=self.stab_b,
        )

    def nonlin(self) -> Callable:
        return _POTENTIALS[self.potential]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("config must specify a kind")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _steps_for(t_final: float, tau: float) -> int:
    """Number of steps for an integer t_final / tau split, else ConfigError."""
    if tau <= 0 or t_final is None or t_final <= 0:
        raise ConfigError(f"need positive tau and final time, got tau={tau}, T={t_final}")
    ratio = t_final / tau
    steps = round(ratio)
    if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        raise ConfigError(f"final time {t_final} is not an integer multiple of tau {tau}")
    return steps


def random_initial(seed: int, basis: Basis1D) -> Field2D:
    """Uniform(-1, 1) nodal noise on the dealiasing grid, L^2-projected.

    PRNG: numpy PCG64, seeded with the given 64-bit integer.  Identical
    seeds give bitwise identical coefficients.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = basis.nquad
    values = rng.uniform(-1.0, 1.0, size=(n, n))
    return analyze(basis, values)


def prepare_phi1(
    phi0: Field2D,
    params: SchemeParams,
    tau_prep: float | None = None,
) -> Field2D:
    """Relax random data for a duration 64 eps^3 to form the smoother start state.

    Runs the stepper with internal step tau_prep (default eps^3, i.e. 64
    steps) and the supplied relaxation/stabilization parameters; returns the
    terminal field.  A blow-up here propagates as :class:`BlowUpError` and
    usually means the stabilizers are too small.
    """
    eps = params.epsilon
    tau_prep = eps**3 if tau_prep is None else tau_prep
    duration = 64.0 * eps**3
    n_steps = max(1, round(duration / tau_prep))
    run = run_steps(phi0, replace(params, tau=tau_prep), n_steps)
    if run.blew_up:
        raise BlowUpError(run.blow_up_step, math.inf)
    return run.state.phi_n


@dataclass
class RunResult:
    state: StepperState
    trace: list[EnergyRecord]
    blew_up: bool = False
    blow_up_step: int | None = None


def run_steps(
    phi0: Field2D,
    params: SchemeParams,
    n_steps: int,
    nonlin: Callable = potential.f_trunc,
    keep_trace: bool = False,
    record_stride: int = 1,
) -> RunResult:
    """Advance ``n_steps`` from ``phi0`` (first step bootstraps the history).

    Divergence is captured, not raised: the result carries the partial trace
    and the step index at which the run blew up.
    """
    op = build_stepper(params, phi0.basis)
    state = initial_state(phi0)
    trace: list[EnergyRecord] = []
    if keep_trace:
        record(state, params, trace)
    try:
        for _ in range(n_steps):
            state, _ = step(state, op, nonlin)
            if keep_trace and (state.n % record_stride == 0 or state.n == n_steps):
                record(state, params, trace)
    except BlowUpError as exc:
        return RunResult(state, trace, blew_up=True, blow_up_step=exc.step_index)
    return RunResult(state, trace, blew_up=False)


def is_stable(phi0: Field2D, params: SchemeParams, n_steps: int, nonlin=potential.f_trunc) -> bool:
    return not run_steps(phi0, params, n_steps, nonlin).blew_up


def stabilizer_ladder(which: str, gamma: float, max_exp: int = 7) -> list[float]:
    """Tested stabilizer values: {0} plus powers of two (A values scaled by gamma)."""
    scale = gamma if which == "A" else 1.0
    return [0.0] + [scale * float(2**i) for i in range(max_exp + 1)]


def min_stabilizer(
    phi0: Field2D,
    base: SchemeParams,
    which: str,
    ladder: list[float],
    n_steps: int,
    nonlin=potential.f_trunc,
) -> float:
    """Smallest ladder value of A or B that survives ``n_steps``; inf if none."""
    if which not in ("A", "B"):
        raise ValueError(f"which must be 'A' or 'B', got {which!r}")
    for value in ladder:
        params = replace(base, **{which: value})
        if is_stable(phi0, params, n_steps, nonlin):
            return value
    return math.inf


@dataclass(frozen=True)
class SweepCell:
    search: str  # "A" or "B"
    gamma: float
    fixed_name: str
    fixed_value: float
    tau: float
    min_value: float  # inf when no ladder value is stable
    steps: int


@dataclass
class SweepResult:
    cells: list[SweepCell]
    config: ExperimentConfig


def run_stability_sweep(config: ExperimentConfig) -> SweepResult:
    """Minimal stabilizer search over the (gamma, tau, fixed counterpart) grid.

    For every cell the ladder is scanned upward and each candidate runs up
    to the step budget from the raw random state; instability is data, so
    blow-ups are recorded rather than raised.
    """
    cfg = config.resolved()
    basis = build_basis(cfg.m)
    phi0 = random_initial(cfg.seed, basis)
    nonlin = cfg.nonlin()
    cells: list[SweepCell] = []
    for gamma in cfg.gammas:
        for fixed_b in cfg.fixed_b:
            for tau in cfg.taus:
                base = SchemeParams(cfg.epsilon, gamma, tau, A=0.0, B=fixed_b)
                ladder = stabilizer_ladder("A", gamma, cfg.ladder_max_exp)
                best = min_stabilizer(phi0, base, "A", ladder, cfg.steps, nonlin)
                cells.append(SweepCell("A", gamma, "B", fixed_b, tau, best, cfg.steps))
        for fixed_a in cfg.fixed_a:
            for tau in cfg.taus:
                base = SchemeParams(cfg.epsilon, gamma, tau, A=fixed_a, B=0.0)
                ladder = stabilizer_ladder("B", gamma, cfg.ladder_max_exp)
                best = min_stabilizer(phi0, base, "B", ladder, cfg.steps, nonlin)
                cells.append(SweepCell("B", gamma, "A", fixed_a, tau, best, cfg.steps))
    return SweepResult(cells=cells, config=cfg)


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    errors: ErrorTriple
    order_h_minus1: float | None
    order_l2: float | None
    order_h1: float | None


@dataclass
class ConvergenceResult:
    rows: list[ConvergenceRow]
    config: ExperimentConfig
    blew_up: bool = False
    blow_up_tau: float | None = None

    def orders(self) -> dict[str, list[float]]:
        taus = [r.tau for r in self.rows]
        return {
            name: convergence_orders([getattr(r.errors, name) for r in self.rows], taus)
            for name in ("h_minus1", "l2", "h1")
        }


def _initial_field(cfg: ExperimentConfig, basis: Basis1D) -> Field2D:
    phi0 = random_initial(cfg.seed, basis)
    if cfg.initial_data == "phi1":
        thr = stability_thresholds(SchemeParams(cfg.epsilon, cfg.prep_gamma, 1.0))
        prep = SchemeParams(
            epsilon=cfg.epsilon,
            gamma=cfg.prep_gamma,
            tau=cfg.prep_tau if cfg.prep_tau is not None else cfg.epsilon**3,
            A=thr.A_min,
            B=thr.B_min,
        )
        return prepare_phi1(phi0, prep, tau_prep=prep.tau)
    return phi0


def run_convergence_study(config: ExperimentConfig) -> ConvergenceResult:
    """Errors and observed orders against a fine-step reference run.

    All runs start from the same prepared state and share the final time;
    errors are measured in the H^-1, L^2 and H^1 norms at T.  A blow-up in
    any run aborts the study with a diagnostic marker.
    """
    cfg = config.resolved()
    if cfg.kind != "converge":
        raise ConfigError(f"expected a converge config, got kind={cfg.kind!r}")
    basis = build_basis(cfg.m)
    phi_start = _initial_field(cfg, basis)
    nonlin = cfg.nonlin()

    ref = run_steps(phi_start, cfg.scheme_params(cfg.tau_ref), _steps_for(cfg.t_final, cfg.tau_ref), nonlin)
    if ref.blew_up:
        return ConvergenceResult([], cfg, blew_up=True, blow_up_tau=cfg.tau_ref)
    phi_ref = ref.state.phi_n

    taus = sorted((t for t in cfg.taus), reverse=True)
    errors: list[ErrorTriple] = []
    for tau in taus:
        run = run_steps(phi_start, cfg.scheme_params(tau), _steps_for(cfg.t_final, tau), nonlin)
        if run.blew_up:
            return ConvergenceResult(_rows_from(taus[: len(errors)], errors), cfg, True, tau)
        errors.append(error_norms(run.state.phi_n, phi_ref))
    return ConvergenceResult(_rows_from(taus, errors), cfg)


def _rows_from(taus: list[float], errors: list[ErrorTriple]) -> list[ConvergenceRow]:
    rows = []
    for i, (tau, err) in enumerate(zip(taus, errors)):
        if i == 0:
            orders = (None, None, None)
        else:
            prev = errors[i - 1]
            denom = math.log(taus[i - 1] / tau)
            orders = tuple(
                math.log(getattr(prev, n) / getattr(err, n)) / denom
                if getattr(err, n) > 0 and getattr(prev, n) > 0
                else None
                for n in ("h_minus1", "l2", "h1")
            )
        rows.append(ConvergenceRow(tau, err, *orders))
    return rows


@dataclass
class TraceResult:
    # one (tau, records, blew_up) triple per requested step size
    runs: list[tuple[float, list[EnergyRecord], bool]]
    config: ExperimentConfig


def run_energy_trace(config: ExperimentConfig) -> TraceResult:
    """Per-step (t, E, E_cn, mass, dt_norm) records for each requested tau."""
    cfg = config.resolved()
    if cfg.kind != "trace":
        raise ConfigError(f"expected a trace config, got kind={cfg.kind!r}")
    basis = build_basis(cfg.m)
    phi_start = _initial_field(cfg, basis)
    nonlin = cfg.nonlin()
    runs = []
    for tau in cfg.taus:
        res = run_steps(
            phi_start,
            cfg.scheme_params(tau),
            _steps_for(cfg.t_final, tau),
            nonlin,
            keep_trace=True,
            record_stride=cfg.record_stride,
        )
        runs.append((tau, res.trace, res.blew_up))
    return TraceResult(runs=runs, config=cfg)


def run_evolve(config: ExperimentConfig) -> RunResult:
    """Plain run: seeded or snapshot initial data, fixed parameters."""
    from .snapshot import snapshot_read

    cfg = config.resolved()
    if cfg.kind != "evolve":
        raise ConfigError(f"expected an evolve config, got kind={cfg.kind!r}")
    if cfg.snapshot_in is not None:
        # the snapshot's own dimension wins over cfg.m
        phi_start = snapshot_read(cfg.snapshot_in)
    else:
        basis = build_basis(cfg.m)
        phi_start = _initial_field(cfg, basis)
    return run_steps(
        phi_start,
        cfg.scheme_params(cfg.tau),
        cfg.steps,
        cfg.nonlin(),
        keep_trace=True,
        record_stride=cfg.record_stride,
    )


# ---------------------------------------------------------------------------
# serialization


def _provenance(cfg: ExperimentConfig) -> dict:
    return {
        "m": cfg.m,
        "epsilon": cfg.epsilon,
        "seed": cfg.seed,
        "potential": cfg.potential,
    }


def write_trace_csv(path, result: TraceResult) -> None:
    cfg = result.config
    prov = _provenance(cfg)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tau", "t", "E", "E_cn", "mass", "dt_norm", "event",
             *prov.keys(), "gamma", "stab_a", "stab_b"]
        )
        for tau, records, blew_up in result.runs:
            for i, rec in enumerate(records):
                event = "blow_up" if blew_up and i == len(records) - 1 else ""
                writer.writerow(
                    [tau, rec.t, rec.E, rec.E_cn, rec.mass, rec.dt_norm, event,
                     *prov.values(), cfg.gamma, cfg.stab_a, cfg.stab_b]
                )
            if blew_up and not records:
                writer.writerow([tau, "", "", "", "", "", "blow_up",
                                 *prov.values(), cfg.gamma, cfg.stab_a, cfg.stab_b])


def write_convergence_csv(path, result: ConvergenceResult) -> None:
    cfg = result.config
    prov = _provenance(cfg)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tau", "h_minus1_error", "order_h_minus1", "l2_error", "order_l2",
             "h1_error", "order_h1", *prov.keys(), "gamma", "stab_a", "stab_b",
             "tau_ref", "t_final"]
        )

        def fmt(o):
            return "" if o is None else f"{o:.2f}"

        for row in result.rows:
            writer.writerow(
                [row.tau, row.errors.h_minus1, fmt(row.order_h_minus1),
                 row.errors.l2, fmt(row.order_l2), row.errors.h1, fmt(row.order_h1),
                 *prov.values(), cfg.gamma, cfg.stab_a, cfg.stab_b,
                 cfg.tau_ref, cfg.t_final]
            )


def write_sweep_csv(path, result: SweepResult) -> None:
    cfg = result.config
    prov = _provenance(cfg)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["search", "gamma", "fixed_name", "fixed_value", "tau", "min_value",
             "steps", *prov.keys()]
        )
        for c in result.cells:
            writer.writerow(
                [c.search, c.gamma, c.fixed_name, c.fixed_value, c.tau,
                 c.min_value, c.steps, *prov.values()]
            )


def write_json(path, payload: dict) -> None:
    def default(obj):
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if obj == math.inf:
            return "inf"
        raise TypeError(f"cannot serialize {type(obj)}")

    Path(path).write_text(json.dumps(payload, indent=2, default=default) + "\n")
