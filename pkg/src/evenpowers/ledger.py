"""Exponent bookkeeping for the chain of major-arc prunings.

Each stage is an inequality "achieved exponent <= required bound" in the
block exponents phi_i plus the method parameters.  A stage's margin is
``required - achieved - epsilon_slack``, minimised over any side hypotheses
(also written as margins), so ``passed`` is exactly ``margin >= 0``.
All implied constants are taken to be 1: only exponents are checked.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import CoverageError
from .holder import ExponentSet
from .partitions import PartitionShape, block_phi
from .tables import LambdaTable, NuTable


class Stage(str, enum.Enum):
    MINOR_ARCS = "MINOR_ARCS"
    REPLACE_F2 = "REPLACE_F2"
    REPLACE_F4 = "REPLACE_F4"
    PRUNE_KAPPA = "PRUNE_KAPPA"
    REPLACE_F6 = "REPLACE_F6"
    PRUNE_LOG_A = "PRUNE_LOG_A"
    PRUNE_LOG_QUARTER = "PRUNE_LOG_QUARTER"


STAGE_INPUTS: dict[Stage, tuple[str, ...]] = {
    Stage.MINOR_ARCS: ("phi1", "phi2"),
    Stage.REPLACE_F2: ("phi1", "phi2"),
    Stage.REPLACE_F4: ("phi1", "phi2"),
    Stage.PRUNE_KAPPA: ("phi1", "phi2"),
    Stage.REPLACE_F6: ("phi1", "phi2"),
    Stage.PRUNE_LOG_A: ("phi1", "phi2", "phi3", "phi_mix"),
    Stage.PRUNE_LOG_QUARTER: (),
}

DEFAULT_DELTA: dict[Stage, float] = {
    Stage.MINOR_ARCS: 0.0007,
    Stage.REPLACE_F2: 0.0007,
    Stage.REPLACE_F4: 0.0007,
    Stage.PRUNE_KAPPA: 0.001,
    Stage.REPLACE_F6: 0.01,
    Stage.PRUNE_LOG_A: 0.00001,
    Stage.PRUNE_LOG_QUARTER: 0.00001,
}


def _stage(name) -> Stage:
    try:
        return Stage(name)
    except ValueError:
        raise ValueError(
            f"unknown stage {name!r}; expected one of {[s.value for s in Stage]}"
        ) from None


@dataclass(frozen=True)
class MethodParams:
    tau: float = 0.3935
    kappa: float = 0.25
    theta: float | None = None
    gamma: float = 0.05
    s: int = 133
    A: float = 1.0
    delta: Mapping[Stage, float] = field(default_factory=lambda: dict(DEFAULT_DELTA))
    epsilon_slack: float = 0.0
    omega_epsilon: float = 0.0

    def __post_init__(self):
        if self.theta is None:
            object.__setattr__(self, "theta", self.kappa / 7)
        if not (0 < self.kappa < self.tau < 0.5):
            raise ValueError(f"need 0 < kappa < tau < 1/2, got kappa={self.kappa}, tau={self.tau}")
        if self.gamma <= 0 or self.A <= 0:
            raise ValueError("gamma and A must be positive")
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if self.epsilon_slack < 0 or self.omega_epsilon < 0:
            raise ValueError("epsilon terms must be non-negative")
        d = dict(DEFAULT_DELTA)
        d.update({_stage(k): float(v) for k, v in dict(self.delta).items()})
        for k, v in d.items():
            if not v > 0:
                raise ValueError(f"delta for {k.value} must be positive, got {v}")
        object.__setattr__(self, "delta", d)

    def to_dict(self):
        return {
            "tau": self.tau, "kappa": self.kappa, "theta": self.theta, "gamma": self.gamma,
            "s": self.s, "A": self.A, "epsilon_slack": self.epsilon_slack,
            "omega_epsilon": self.omega_epsilon,
            "delta": {k.value: v for k, v in self.delta.items()},
        }


@dataclass(frozen=True)
class StageReport:
    stage: Stage
    inputs: Mapping[str, float]
    achieved_exponent: float
    required_bound: float
    margin: float
    passed: bool
    hypotheses: Mapping[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def to_dict(self):
        return {
            "stage": self.stage.value,
            "inputs": dict(self.inputs),
            "achieved_exponent": self.achieved_exponent,
            "required_bound": self.required_bound,
            "margin": self.margin,
            "pass": self.passed,
            "hypotheses": dict(self.hypotheses),
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class OmegaEta:
    omega: float
    eta: float
    rho_exp: float
    omega_exact: Fraction
    eta_exact: Fraction


def omega_eta(K: ExponentSet, epsilon: float = 0.0) -> OmegaEta:
    """omega = sum 1/k - epsilon, eta = 3 + sum_{k >= 8} 1/k, rho_exp = (omega - 2)/4."""
    om = K.reciprocal_sum
    et = 3 + sum((Fraction(1, k) for k in K if k >= 8), Fraction(0))
    omega = float(om) - epsilon
    return OmegaEta(omega, float(et), (omega - 2) / 4, om, et)


def _build(stage, inputs, achieved, required, slack, hypotheses=None, extra_flags=()):
    hyp = dict(hypotheses or {})
    main = required - achieved
    margin = min([main, *hyp.values()]) - slack
    flags = list(extra_flags)
    failed_hyp = [name for name, m in hyp.items() if m - slack < 0]
    if failed_hyp:
        flags.append("hypothesis failed: " + ", ".join(failed_hyp))
    return StageReport(stage, dict(inputs), achieved, required, margin, margin >= 0, hyp, tuple(flags))


def _delta_flag(delta, achieved, slack):
    """Flag a failure that only comes from the configured delta."""
    supported = -1.0 - achieved - slack
    if supported < delta and supported > 0:
        return (f"delta discrepancy: achieved exponent {achieved:.15g} supports delta <= "
                f"{supported:.6g}, configured delta = {delta:.6g}",)
    return ()


def stage_margin(stage, params: MethodParams, phis: Mapping[str, float]) -> StageReport:
    stage = _stage(stage)
    missing = [name for name in STAGE_INPUTS[stage] if name not in phis]
    if missing:
        raise ValueError(f"{stage.value}: missing phi inputs {missing}")
    p = {name: float(phis[name]) for name in STAGE_INPUTS[stage]}
    tau, kappa, theta = params.tau, params.kappa, params.theta
    delta = params.delta[stage]
    slack = params.epsilon_slack
    inputs = {"tau": tau, "delta": delta, **p}

    if stage is Stage.MINOR_ARCS:
        ach = -tau / 2 + p["phi1"] / 2 + p["phi2"] / 2
        return _build(stage, inputs, ach, -1 - delta, slack, extra_flags=_delta_flag(delta, ach, slack))
    if stage is Stage.REPLACE_F2:
        ach = (tau - 1) / 2 + p["phi1"] / 2 + p["phi2"] / 2
        return _build(stage, inputs, ach, -1 - delta, slack, extra_flags=_delta_flag(delta, ach, slack))
    if stage is Stage.REPLACE_F4:
        ach = tau + p["phi2"]
        return _build(stage, inputs, ach, -0.5 - 2 * delta, slack,
                      {"phi1 <= -tau": -tau - p["phi1"]})
    if stage is Stage.PRUNE_KAPPA:
        inputs.update(kappa=kappa, theta=theta)
        ach = 0.25 - 1.5 * theta - 0.5 - 0.25 + p["phi2"] / 2
        return _build(stage, inputs, ach, -1 - delta, slack,
                      {"phi1 <= -tau": -tau - p["phi1"]}, _delta_flag(delta, ach, slack))
    if stage is Stage.REPLACE_F6:
        inputs["kappa"] = kappa
        ach = kappa / 2 - 0.5 - 0.25 - 1 / 6 + p["phi2"] / 4
        return _build(stage, inputs, ach, -1 - delta, slack,
                      {"phi1 <= -kappa": -kappa - p["phi1"], "phi2 <= -kappa": -kappa - p["phi2"]},
                      _delta_flag(delta, ach, slack))
    if stage is Stage.PRUNE_LOG_A:
        inputs["kappa"] = kappa
        ach = -0.5 - 0.25 - 1 / 6 + p["phi_mix"] / 12
        hyp = {f"{b} <= -kappa": -kappa - p[b] for b in ("phi1", "phi2", "phi3")}
        return _build(stage, inputs, ach, -1 - delta, slack, hyp, _delta_flag(delta, ach, slack))
    # PRUNE_LOG_QUARTER: the q-sum tail Z^(2-omega) must decay
    oe = omega_eta(ExponentSet.even(2, 2 * params.s), params.omega_epsilon)
    inputs = {"s": params.s, "omega": oe.omega, "eta": oe.eta, "rho_exp": oe.rho_exp}
    flags = () if oe.omega > 2 else (f"omega = {oe.omega:.6g} <= 2: q-sum tail does not decay",)
    return _build(stage, inputs, (2 - oe.omega) / 4, 0.0, slack, extra_flags=flags)


STATED_PHIS: dict[Stage, dict[str, float]] = {
    Stage.MINOR_ARCS: {"phi1": -0.806, "phi2": -0.801},
    Stage.REPLACE_F2: {"phi1": -0.806, "phi2": -0.801},
    Stage.REPLACE_F4: {"phi1": -0.3958, "phi2": -0.895},
    Stage.PRUNE_KAPPA: {"phi1": -0.3958, "phi2": -0.895},
    Stage.REPLACE_F6: {"phi1": -0.255, "phi2": -0.897},
    Stage.PRUNE_LOG_A: {"phi1": -0.252, "phi2": -0.286, "phi3": -0.823, "phi_mix": -1.0002},
    Stage.PRUNE_LOG_QUARTER: {},
}


def _ev(lo, hi):
    return list(range(lo, hi + 1, 2))


def stage_partitions(s: int = 133) -> dict[Stage, PartitionShape]:
    """The block choices used for each stage, with 2s as the top exponent."""
    top = 2 * s
    if top < 110:
        raise ValueError("the stage partitions need 2s >= 110")
    ab = PartitionShape.free(_ev(6, 52), [4, *_ev(54, top)])
    f4 = PartitionShape.free(_ev(22, 50), [*_ev(6, 20), *_ev(52, top)])
    f6 = PartitionShape.free(_ev(64, 108), [*_ev(8, 62), *_ev(110, top)])
    loga = PartitionShape.free(
        [8, *_ev(204, top)], [10, 12, *_ev(40, 48)], [*_ev(14, 38), *_ev(50, min(202, top))]
    )
    return {
        Stage.MINOR_ARCS: ab, Stage.REPLACE_F2: ab,
        Stage.REPLACE_F4: f4, Stage.PRUNE_KAPPA: f4,
        Stage.REPLACE_F6: f6, Stage.PRUNE_LOG_A: loga,
    }


MIX_POWERS = (3, 4)  # |F_2|^6 |F_3|^8


def stage_phis(stage: Stage, shape: PartitionShape, table: LambdaTable,
               weight_mode="ford", budget=20) -> dict[str, float]:
    """phi per block of ``shape`` plus, for PRUNE_LOG_A, the mixed phi of blocks 2 and 3."""
    blocks = shape.blocks()
    need = 3 if stage is Stage.PRUNE_LOG_A else 2
    if len(blocks) != need:
        raise ValueError(f"{stage.value} needs {need} blocks, got {len(blocks)}")
    out = {}
    for i, b in enumerate(blocks, start=1):
        try:
            out[f"phi{i}"] = block_phi(b, table, weight_mode, budget)
        except CoverageError as exc:
            raise CoverageError(f"block K{i}={list(b)}: {exc}") from None
    if stage is Stage.PRUNE_LOG_A:
        merged = blocks[1] | blocks[2]
        powers = {k: MIX_POWERS[0] for k in blocks[1]} | {k: MIX_POWERS[1] for k in blocks[2]}
        try:
            out["phi_mix"] = block_phi(merged, table, weight_mode, budget, powers)
        except CoverageError as exc:
            raise CoverageError(f"mixed block K2+K3: {exc}") from None
    return out


@dataclass(frozen=True)
class LedgerRun:
    reports: tuple[StageReport, ...]
    errors: Mapping[str, str]

    @property
    def passed(self) -> bool:
        return not self.errors and all(r.passed for r in self.reports)

    def report(self, stage) -> StageReport:
        stage = _stage(stage)
        for r in self.reports:
            if r.stage is stage:
                return r
        raise KeyError(stage.value)

    def to_list(self):
        return [r.to_dict() for r in self.reports]


def full_ledger(
    params: MethodParams,
    partitions: Mapping[Stage, PartitionShape] | None = None,
    table: LambdaTable | None = None,
    nu_table: NuTable | None = None,
    phis: Mapping[Stage, Mapping[str, float]] | None = None,
    weight_mode: str = "ford",
    budget: int = 20,
) -> LedgerRun:
    """Evaluate every stage in order.

    Stages with injected ``phis`` use them directly; the rest compute their
    phi inputs from ``partitions`` and ``table``.  ``partitions=None`` means
    the built-in stage partitions for ``params.s``.  Failures in one stage
    are collected in ``errors`` and do not stop the others.  ``nu_table`` is
    accepted for blocks mixing f-type sums but the built-in stages use only
    lambda tables.
    """
    phis = {_stage(k): v for k, v in (phis or {}).items()}
    if partitions is None:
        partitions = stage_partitions(params.s) if table is not None else {}
    partitions = {_stage(k): v for k, v in partitions.items()}
    needs = [s for s in Stage if STAGE_INPUTS[s]]
    missing = [s.value for s in needs if s not in phis and s not in partitions]
    if missing:
        raise ValueError(f"no partition or phi values for stages: {', '.join(missing)}")

    reports, errors = [], {}
    for stage in Stage:
        try:
            if stage in phis or not STAGE_INPUTS[stage]:
                p = phis.get(stage, {})
            else:
                if table is None:
                    raise CoverageError("no lambda table supplied")
                p = stage_phis(stage, partitions[stage], table, weight_mode, budget)
            reports.append(stage_margin(stage, params, p))
        except (CoverageError, ValueError) as exc:
            errors[stage.value] = str(exc)
    return LedgerRun(tuple(reports), errors)

