"""Controlled propagators, preservation-error measurement, time sweeps, and
log-log fits of the achieved decoupling order.

Sweep points (T x seed) are independent; results are reduced by sorted keys,
so the output never depends on execution order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, UnfittableError
from .linalg import kron, spectral_norm
from .model import HamiltonianModel, random_model
from .operators import Moos, Operator
from .sequences import Schedule

__all__ = [
    "RunConfig",
    "ModelSpec",
    "OperatorFit",
    "ScalingResult",
    "propagate",
    "propagate_wrapped",
    "preservation_error",
    "fit_loglog",
    "order_scan",
]

DEFAULT_T_GRID = np.geomspace(0.02, 0.6, 12)
DEFAULT_SEEDS = tuple(range(8))
MAX_EXPONENTIALS = 10**6
MIN_FIT_POINTS = 4
MAX_FIT_RESIDUAL = 0.1


@dataclass(frozen=True)
class RunConfig:
    """Sweep grid and fit-window settings."""

    t_grid: tuple[float, ...] = tuple(DEFAULT_T_GRID)
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    error_floor: float = 1e-12
    error_ceiling: float = 1e-2
    threads: int = 1

    def __post_init__(self):
        grid = tuple(float(t) for t in self.t_grid)
        if any(t2 <= t1 for t1, t2 in zip(grid, grid[1:])):
            raise PreconditionError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", grid)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass(frozen=True)
class ModelSpec:
    """Descriptor of a model ensemble; one model per sweep seed."""

    structure: str = "general"
    sys_dim: int = 2
    bath_dim: int = 4
    norm_bound: float = 1.0

    def realize(self, seed: int) -> HamiltonianModel:
        return random_model(
            self.structure, self.sys_dim, self.bath_dim, self.norm_bound, seed
        )


@dataclass(frozen=True)
class OperatorFit:
    label: str
    slope: float
    intercept: float
    rms_residual: float
    points_used: int
    status: str  # "ok", "exact", or "unfittable"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class ScalingResult:
    """Raw errors indexed [operator][i_t, i_seed], their per-T medians, and
    the per-operator log-log fits."""

    config: RunConfig
    errors: dict[str, np.ndarray]
    medians: dict[str, np.ndarray]
    fits: dict[str, OperatorFit]

    def rows(self):
        """Flat (operator, T, seed, error) tuples sorted by key."""
        out = []
        for label in sorted(self.errors):
            err = self.errors[label]
            for i, t in enumerate(self.config.t_grid):
                for j, seed in enumerate(self.config.seeds):
                    out.append((label, t, seed, float(err[i, j])))
        return out


def propagate(
    schedule: Schedule,
    model: HamiltonianModel,
    moos: Moos,
    total_time: float,
    interval_conj: Operator | None = None,
    return_net_pulse: bool = False,
):
    """Propagator of the scheduled evolution over physical time ``total_time``.

    Pulses are instantaneous MOOS operators lifted as Omega (x) I_bath and
    composed in event list order; closing pulses are applied at the end.
    ``interval_conj`` conjugates every free-evolution block by the given
    system operator (used for the MOOS-compatibility property checks); the
    conjugating pulses then also enter the net pulse product.
    """
    if moos.dim != model.sys_dim:
        raise PreconditionError(
            f"MOOS dimension {moos.dim} != system dimension {model.sys_dim}"
        )
    lifted = {lab: model.lift(moos.by_label(lab)) for lab in set(schedule.op_labels)}
    eye_sys = np.eye(model.sys_dim, dtype=complex)
    conj_full = model.lift(interval_conj) if interval_conj is not None else None
    conj_sys = interval_conj.matrix if interval_conj is not None else None

    u = np.eye(model.dim, dtype=complex)
    net = eye_sys.copy()
    prev = 0.0

    def free_block(u, net, duration):
        seg = model.propagator(duration * total_time)
        if conj_full is not None:
            u = conj_full @ seg @ conj_full @ u
            net = conj_sys @ conj_sys @ net
        else:
            u = seg @ u
        return u, net

    for event in schedule.events:
        u, net = free_block(u, net, event.time - prev)
        for lab in event.ops:
            u = lifted[lab] @ u
            net = moos.by_label(lab).matrix @ net
        prev = event.time
    u, net = free_block(u, net, 1.0 - prev)
    for lab in schedule.closing_ops:
        u = lifted[lab] @ u
        net = moos.by_label(lab).matrix @ net
    if return_net_pulse:
        return u, Operator("net", net, model.sys_dim)
    return u


def propagate_wrapped(
    schedule: Schedule,
    model: HamiltonianModel,
    moos: Moos,
    total_time: float,
    wrap: Operator,
):
    """Hahn echo of ``wrap`` around the scheduled evolution: the schedule run
    over each half of the total time with a wrap pulse at the midpoint and at
    the end.  ``wrap`` need not belong to the MOOS; when it neither commutes
    nor anticommutes with the protected operators, the outer echo interferes
    with the inner protection."""
    u_half, net_half = propagate(
        schedule, model, moos, total_time / 2, return_net_pulse=True
    )
    w_full = model.lift(wrap)
    u = w_full @ u_half @ w_full @ u_half
    net = wrap.matrix @ net_half.matrix @ wrap.matrix @ net_half.matrix
    return u, Operator("net", net, model.sys_dim)


def preservation_error(u: np.ndarray, omega: Operator, net_pulse: Operator, bath_dim: int) -> float:
    """Spectral norm of U^dag (Omega x I) U - P^dag (Omega x I) P with
    P = net_pulse (x) I, compensating the known leftover rotation."""
    eye_b = np.eye(bath_dim)
    q = kron(omega.matrix, eye_b)
    p = kron(net_pulse.matrix, eye_b)
    return spectral_norm(u.conj().T @ q @ u - p.conj().T @ q @ p)


def fit_loglog(points, floor: float, ceiling: float):
    """Ordinary least squares of log(error) vs log(T) on points surviving the
    floor/ceiling filter; returns (slope, intercept, rms_residual, n_used)."""
    kept = [(t, e) for t, e in points if floor < e < ceiling]
    if len(kept) < 2:
        raise UnfittableError(
            f"only {len(kept)} of {len(points)} points inside "
            f"({floor:.1e}, {ceiling:.1e})"
        )
    log_t = np.log([t for t, _ in kept])
    log_e = np.log([e for _, e in kept])
    slope, intercept = np.polyfit(log_t, log_e, 1)
    resid = log_e - (slope * log_t + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(slope), float(intercept), rms, len(kept)


def order_scan(
    schedule: Schedule,
    moos: Moos,
    model_spec: ModelSpec,
    config: RunConfig = RunConfig(),
    operators: list[Operator] | None = None,
    interval_conj: Operator | None = None,
    wrap_op: Operator | None = None,
) -> ScalingResult:
    """Sweep total time T over a seeded model ensemble, measure the
    preservation error of each protected operator, and fit the slope of
    log(median error) vs log(T).

    The fitted slope estimates the decoupling order plus one.  An operator
    whose error sits at the floating-point floor everywhere is reported as
    "exact"; too few valid points or a noisy fit is reported "unfittable".
    """
    if operators is None:
        operators = list(moos.elements)
    work = schedule.intervals * len(config.t_grid) * len(config.seeds)
    if work > MAX_EXPONENTIALS:
        raise PreconditionError(
            f"sweep budget exceeded: {work} exponentials > {MAX_EXPONENTIALS}"
        )

    n_t, n_s = len(config.t_grid), len(config.seeds)
    errors = {op.label: np.zeros((n_t, n_s)) for op in operators}

    def run_seed(j_seed):
        seed = config.seeds[j_seed]
        model = model_spec.realize(seed)
        out = {op.label: np.zeros(n_t) for op in operators}
        for i, t in enumerate(config.t_grid):
            if wrap_op is not None:
                u, net = propagate_wrapped(schedule, model, moos, t, wrap_op)
            else:
                u, net = propagate(
                    schedule, model, moos, t,
                    interval_conj=interval_conj, return_net_pulse=True,
                )
            for op in operators:
                out[op.label][i] = preservation_error(u, op, net, model.bath_dim)
        return out

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run_seed, range(n_s)))
    else:
        results = [run_seed(j) for j in range(n_s)]
    for j, out in enumerate(results):
        for label, col in out.items():
            errors[label][:, j] = col

    medians = {label: np.median(err, axis=1) for label, err in errors.items()}
    fits = {}
    for label, med in medians.items():
        if np.all(med <= config.error_floor):
            fits[label] = OperatorFit(label, math.nan, math.nan, 0.0, 0, "exact")
            continue
        try:
            slope, intercept, rms, n_used = fit_loglog(
                list(zip(config.t_grid, med)),
                config.error_floor,
                config.error_ceiling,
            )
        except UnfittableError:
            fits[label] = OperatorFit(label, math.nan, math.nan, math.nan, 0, "unfittable")
            continue
        status = "ok" if (n_used >= MIN_FIT_POINTS and rms <= MAX_FIT_RESIDUAL) else "unfittable"
        fits[label] = OperatorFit(label, slope, intercept, rms, n_used, status)
    return ScalingResult(config, errors, medians, fits)
