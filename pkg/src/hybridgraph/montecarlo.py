"""Photon-loss Monte Carlo for generation plans.

Randomness is counter based: a Philox generator keyed by ``(seed,
substream)`` produces one flat stream of uniforms and trial ``t`` owns the
slice ``[t*D, (t+1)*D)``, where ``D`` is the plan's draw budget rounded up to
a multiple of 4. Any trial can therefore be replayed on its own, and chunked
or parallel evaluation gives bit-identical counts.

Draw layout per instruction, in plan order:

* boosted fusion with ``m`` attempts: ``5m`` draws, ``(det_a, det_b,
  herald, i, j)`` per attempt;
* single fusion: 5 draws, same meaning;
* terminal X/Z measurement: 2 draws, ``(det, bit)``;
* emitter X measurement: 1 draw (outcome bit; the emitter is not lossy).

A photon is detected when its draw is below ``eta``; heralds and bits
compare against 1/2. Two paths consume these draws: :func:`run_plan`
executes the graph rewrites, :func:`estimate` evaluates success with
vectorised array logic. They agree trial by trial.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fusion as fu
from . import redundant as rd
from .emitter import (
    FUSIONS,
    BoostedFuse,
    Emit,
    FuseType1,
    FuseType2Bell,
    FuseType2Variant,
    FuseType2XZ,
    GenerationPlan,
    HadamardEmitter,
    HPush,
    InitEmitter,
    MeasureX,
    MeasureXEmitter,
    MeasureZ,
)
from .errors import ImpossibleOutcomeError, PlanError

__all__ = [
    "LossModel",
    "TrialResult",
    "Estimate",
    "draw_layout",
    "trial_uniforms",
    "run_plan",
    "run_trial",
    "estimate",
    "wilson_interval",
    "boosted_attempts",
]

PARTIAL = "partial"
LOSS = "loss"


@dataclass(frozen=True)
class LossModel:
    eta: float = 1.0
    seed: int = 0
    substream: int = 0

    def __post_init__(self):
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if self.seed < 0 or self.substream < 0:
            raise ValueError("seed and substream must be nonnegative")


@dataclass(frozen=True)
class TrialResult:
    success: bool
    cause: str | None
    photons_emitted: int
    trace: tuple = ()

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "cause": self.cause,
            "photons_emitted": self.photons_emitted,
            "trace": list(self.trace),
        }


@dataclass(frozen=True)
class Estimate:
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    causes: dict = field(default_factory=dict)

    def contains(self, p: float) -> bool:
        return self.ci_low <= p <= self.ci_high


def _cost(ins) -> int:
    if isinstance(ins, BoostedFuse):
        return 5 * ins.m
    if isinstance(ins, FUSIONS):
        return 5
    if isinstance(ins, (MeasureX, MeasureZ)):
        return 2
    if isinstance(ins, MeasureXEmitter):
        return 1
    return 0


def draw_layout(plan: GenerationPlan) -> tuple[list[int], int]:
    """Offset of each instruction's draws and the padded per-trial budget."""
    offsets = []
    pos = 0
    for ins in plan.instructions:
        offsets.append(pos)
        pos += _cost(ins)
    return offsets, max(4, 4 * math.ceil(pos / 4))


def _generator(loss: LossModel, first_trial: int, budget: int) -> np.random.Generator:
    bg = np.random.Philox(key=[loss.seed, loss.substream])
    return np.random.Generator(bg.advance(first_trial * budget // 4))


def trial_uniforms(plan: GenerationPlan, loss: LossModel, trial: int) -> np.ndarray:
    """The uniforms owned by one trial."""
    _, budget = draw_layout(plan)
    return _generator(loss, trial, budget).random(budget)


# -- slow path: execute the rewrites ---------------------------------------------
def _emitter_base(plan: GenerationPlan) -> int:
    return max(plan.photons(), default=-1) + 1


def _bit_options(i: int, j: int):
    return [(i, j), (i, 1 - j), (1 - i, j), (1 - i, 1 - j)]


def _measure(state, q, basis, bit):
    forced = rd.forced_outcome(state, q, basis)
    return rd.measure(state, q, basis, bit if forced is None else forced)


_SINGLE = {
    FuseType2Variant: fu.fuse_type2_variant,
    FuseType2Bell: fu.fuse_type2_bell,
    FuseType2XZ: fu.fuse_type2_xz,
}


def run_trial(plan: GenerationPlan, eta: float, u: np.ndarray, keep_state: bool = False):
    """Execute one trial from its uniforms; returns the result and, with
    ``keep_state``, the final redundant graph."""
    offsets, _ = draw_layout(plan)
    base = _emitter_base(plan)
    photons = len(plan.photons())
    state = rd.new_redundant()
    trace: list[dict] = []

    def stop(cause):
        res = TrialResult(cause is None, cause, photons, tuple(trace))
        return (res, state) if keep_state else res

    for ins, off in zip(plan.instructions, offsets):
        if isinstance(ins, InitEmitter):
            state = rd.init_emitter(state, base + ins.stream)
        elif isinstance(ins, HadamardEmitter):
            state = rd.hadamard_emitter(state)
        elif isinstance(ins, Emit):
            state = rd.emit_photon(state, ins.photon)
        elif isinstance(ins, MeasureXEmitter):
            state = _measure(state, state.emitter, "X", int(u[off] < 0.5))
        elif isinstance(ins, HPush):
            state = rd.hadamard_push(state, ins.q)
        elif isinstance(ins, BoostedFuse):
            A = state.vertex_of(ins.a[0]).id
            B = state.vertex_of(ins.b[0]).id
            sampler = fu.ArraySampler(u[off : off + 5 * ins.m].reshape(ins.m, 5), eta)
            state, out = fu.boosted_fuse(state, A, B, ins.m, sampler, ins.a, ins.b, trace)
            if out.kind == fu.PARTIAL_FAIL:
                return stop(PARTIAL)
            if out.kind == fu.COMPLETE_FAIL:
                return stop(LOSS)
        elif isinstance(ins, FUSIONS):
            d = fu.ArraySampler(u[off : off + 5].reshape(1, 5), eta).draw(0)
            lost = not d.detected_b if isinstance(ins, FuseType1) else not (d.detected_a and d.detected_b)
            kind = fu.COMPLETE_FAIL if lost else (fu.SUCCESS if d.success else fu.PARTIAL_FAIL)
            trace.append(fu.trace_record(ins.op, ins.qa, ins.qb, fu.FusionOutcome(kind, 1, ((d.i, d.j),))))
            if lost:
                return stop(LOSS)
            if not d.success:
                return stop(PARTIAL)
            for i, j in _bit_options(d.i, d.j):
                try:
                    if isinstance(ins, FuseType1):
                        state = fu.fuse_type1(state, ins.qa, ins.qb, i)
                    else:
                        state = _SINGLE[type(ins)](state, ins.qa, ins.qb, (i, j))
                    break
                except ImpossibleOutcomeError:
                    continue
        elif isinstance(ins, (MeasureX, MeasureZ)):
            if not u[off] < eta:
                return stop(LOSS)
            basis = "X" if isinstance(ins, MeasureX) else "Z"
            state = _measure(state, ins.q, basis, int(u[off + 1] < 0.5))
        else:
            raise PlanError(f"cannot execute {ins!r}")
    return stop(None)


def run_plan(plan: GenerationPlan, loss: LossModel, trial: int = 0) -> TrialResult:
    """Execute trial number ``trial`` of the stream defined by ``loss``."""
    return run_trial(plan, loss.eta, trial_uniforms(plan, loss, trial))


# -- fast path ----------------------------------------------------------------------------
def _evaluate(plan: GenerationPlan, eta: float, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised success flags and failure codes (0 ok, 1 partial, 2 loss)."""
    n = u.shape[0]
    alive = np.ones(n, dtype=bool)
    code = np.zeros(n, dtype=np.int8)
    offsets, _ = draw_layout(plan)
    for ins, off in zip(plan.instructions, offsets):
        if isinstance(ins, BoostedFuse):
            blk = u[:, off : off + 5 * ins.m].reshape(n, ins.m, 5)
            det = np.all(blk[:, :, :2] < eta, axis=(1, 2))
            hit = np.any(blk[:, :, 2] < 0.5, axis=1)
            ok, partial = det & hit, det & ~hit
        elif isinstance(ins, FUSIONS):
            if isinstance(ins, FuseType1):
                det = u[:, off + 1] < eta
            else:
                det = (u[:, off] < eta) & (u[:, off + 1] < eta)
            hit = u[:, off + 2] < 0.5
            ok, partial = det & hit, det & ~hit
        elif isinstance(ins, (MeasureX, MeasureZ)):
            ok = u[:, off] < eta
            partial = np.zeros(n, dtype=bool)
        else:
            continue
        fail = alive & ~ok
        code[fail & partial] = 1
        code[fail & ~partial] = 2
        alive &= ok
    return alive, code


def _count_chunk(plan, loss, start, size, budget):
    u = _generator(loss, start, budget).random(size * budget).reshape(size, budget)
    ok, code = _evaluate(plan, loss.eta, u)
    return int(ok.sum()), int((code == 1).sum()), int((code == 2).sum())


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be positive")
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def estimate(
    plan: GenerationPlan,
    loss: LossModel,
    trials: int = 100_000,
    z: float = 1.959963984540054,
    chunk: int = 65_536,
    workers: int = 1,
) -> Estimate:
    """Fraction of successful trials with a Wilson interval.

    Results depend only on ``(plan, eta, seed, substream, trials)``, not on
    ``chunk`` or ``workers``.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be positive")
    _, budget = draw_layout(plan)
    starts = list(range(0, trials, chunk))
    jobs = [(s, min(chunk, trials - s)) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _count_chunk(plan, loss, j[0], j[1], budget), jobs))
    else:
        parts = [_count_chunk(plan, loss, s, n, budget) for s, n in jobs]
    succ = sum(p[0] for p in parts)
    lo, hi = wilson_interval(succ, trials, z)
    causes = {PARTIAL: sum(p[1] for p in parts), LOSS: sum(p[2] for p in parts)}
    return Estimate(trials, succ, succ / trials, lo, hi, causes)


def boosted_attempts(m: int, loss: LossModel, trials: int) -> np.ndarray:
    """Attempts used by a lone boosted fusion with ``m`` attempts, per trial
    (loss ignored: the truncated-geometric law of heralds)."""
    from .emitter import compile_boosted_pair

    plan = compile_boosted_pair(m)
    offsets, budget = draw_layout(plan)
    off = offsets[[i for i, ins in enumerate(plan.instructions) if isinstance(ins, BoostedFuse)][0]]
    u = _generator(loss, 0, budget).random(trials * budget).reshape(trials, budget)
    hit = u[:, off + 2 : off + 5 * m : 5] < 0.5
    first = np.argmax(hit, axis=1) + 1
    return np.where(hit.any(axis=1), first, m)


def results_json(plan: GenerationPlan, loss: LossModel, est: Estimate) -> str:
    """``{plan_meta, eta, trials, successes, p_hat, ci_low, ci_high, seed}``."""
    return json.dumps(
        {
            "plan_meta": {"family": plan.family, "params": plan.params},
            "eta": loss.eta,
            "trials": est.trials,
            "successes": est.successes,
            "p_hat": est.p_hat,
            "ci_low": est.ci_low,
            "ci_high": est.ci_high,
            "seed": loss.seed,
            "substream": loss.substream,
            "causes": est.causes,
        },
        indent=2,
    )


def cross_check(plan: GenerationPlan, loss: LossModel, trials: Sequence[int]) -> list[int]:
    """Trials where the executed rewrites disagree with the fast path."""
    _, budget = draw_layout(plan)
    bad = []
    for t in trials:
        u = trial_uniforms(plan, loss, t)
        ok, code = _evaluate(plan, loss.eta, u[None, :])
        res = run_trial(plan, loss.eta, u)
        want = None if ok[0] else (PARTIAL if code[0] == 1 else LOSS)
        if res.success != bool(ok[0]) or res.cause != want:
            bad.append(t)
    return bad
