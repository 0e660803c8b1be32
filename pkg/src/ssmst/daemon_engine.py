"""Daemons, step and round semantics, tracing and structural stabilization detection."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable

from . import mst_rules as mr
from . import nca_labeling as nl
from . import verification_oracles as vo
from .state_model import Configuration


# --- policies ---------------------------------------------------------------

class Synchronous:
    name = "sync"

    def select(self, enabled: dict) -> list[int]:
        return sorted(enabled)


class RoundRobin:
    """One node per step, scanning ids cyclically and skipping disabled nodes."""

    name = "rr"

    def __init__(self):
        self.cursor = None

    def select(self, enabled: dict) -> list[int]:
        if not enabled:
            return []
        ids = sorted(enabled)
        pick = ids[0]
        if self.cursor is not None:
            pick = next((v for v in ids if v > self.cursor), ids[0])
        self.cursor = pick
        return [pick]


class RandomFair:
    """Uniform choice among enabled nodes; a node enabled for n straight steps is forced."""

    def __init__(self, seed: int, bound: int | None = None):
        self.seed = seed
        self.rng = random.Random(seed)
        self.bound = bound
        self.waiting: dict[int, int] = {}

    @property
    def name(self):
        return f"random:{self.seed}"

    def select(self, enabled: dict) -> list[int]:
        if not enabled:
            self.waiting.clear()
            return []
        bound = self.bound or len(enabled)
        self.waiting = {v: self.waiting.get(v, 0) + 1 for v in enabled}
        starving = [v for v in sorted(enabled) if self.waiting[v] >= bound]
        if starving:
            pick = max(starving, key=lambda v: self.waiting[v])
        else:
            pick = self.rng.choice(sorted(enabled))
        self.waiting.pop(pick)
        return [pick]


def make_policy(name: str, n: int | None = None):
    """Parse sync | rr | random:SEED."""
    if name == "sync":
        return Synchronous()
    if name == "rr":
        return RoundRobin()
    if name.startswith("random:"):
        seed = int(name.split(":", 1)[1])
        return RandomFair(seed, n)
    raise ValueError(f"unknown daemon {name!r}")


# --- protocols --------------------------------------------------------------

class SSMST:
    """The full spanning-tree rule set; RRec keeps firing forever, so quiescence is structural."""

    name = "ssmst"
    perpetual = {mr.RuleId.RRec}

    @staticmethod
    def rule(c, v):
        return mr.node_rule(c, v)

    @staticmethod
    def apply(c, v, rule):
        return mr.apply_rule(c, v, rule)


class Labeling:
    """The NCA labeling rules alone on a fixed parent structure; silent once stable."""

    name = "labeling"
    perpetual: set = set()

    @staticmethod
    def rule(c, v):
        return nl.labeling_enabled(c, v)

    @staticmethod
    def apply(c, v, rule):
        return nl.labeling_apply(c, v, rule)


# --- records ----------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    step: int
    fired: tuple  # ((node, rule), ...)
    round: int
    closes_round: bool = False


@dataclass
class RunResult:
    final: Configuration
    rounds_elapsed: int
    moves: int
    stabilized: bool
    trace: list = field(default_factory=list)
    converged_round: int = 0  # round after which p, d and the labels no longer changed


def _dirty(before: Configuration, c: Configuration, changed) -> set[int]:
    """Nodes whose guards may have changed: guards read at most one hop away.

    Only the parent and children read In, so a move that changed nothing else stays local.
    """
    out = set(changed)
    for v in changed:
        if before[v].but(in_sel=None) == c[v].but(in_sel=None):
            out.update(c.children(v))
            if c[v].p is not None:
                out.add(c[v].p)
        else:
            out.update(c.graph.adj[v])
    return out


class Engine:
    """Stateful stepping over one execution, with an incrementally maintained enabled map."""

    def __init__(self, c: Configuration, policy, protocol=SSMST):
        self.c = c
        self.policy = policy
        self.protocol = protocol
        self.steps = 0
        self.rounds = 0
        self.enabled = self._scan(c, c)
        self.pending = set(self.enabled)

    def _scan(self, c, nodes) -> dict:
        found = {}
        for v in nodes:
            r = self.protocol.rule(c, v)
            if r is not None:
                found[v] = r
        return found

    def step(self) -> tuple[StepRecord, list[int]]:
        """Fire the policy's choice; returns the record and the nodes whose state changed."""
        chosen = self.policy.select(self.enabled)
        fired = tuple((v, self.enabled[v]) for v in chosen)
        new_states = {v: self.protocol.apply(self.c, v, r) for v, r in fired}
        changed = [v for v, s in new_states.items() if s != self.c[v]]
        if changed:
            before = self.c
            self.c = self.c.updated({v: new_states[v] for v in changed})
            dirty = _dirty(before, self.c, changed)
            fresh = self._scan(self.c, dirty)
            for v in dirty:
                if v in fresh:
                    self.enabled[v] = fresh[v]
                else:
                    self.enabled.pop(v, None)
        self.steps += 1
        self.pending.difference_update(chosen)
        self.pending.intersection_update(self.enabled)
        closes = not self.pending
        rec = StepRecord(self.steps, fired, self.rounds, closes)
        if closes:
            self.rounds += 1
            self.pending = set(self.enabled)
        return rec, changed


def step(c: Configuration, policy, protocol=SSMST) -> tuple[Configuration, StepRecord]:
    """Single step from c; the policy object carries any daemon state between calls."""
    eng = Engine(c, policy, protocol)
    rec, _ = eng.step()
    return eng.c, rec


def round_boundary(trace) -> int:
    """Number of completed rounds in a trace prefix."""
    return sum(1 for rec in trace if rec.closes_round)


def _structure(s):
    return (s.p, s.d, s.ell)


def default_window(c: Configuration) -> int:
    """Quiet rounds needed before calling a run stable: max(2n, n * tree height).

    One full internal-edge sweep takes O(n * height) rounds, and a pending red-rule
    deletion can stay hidden for that long.
    """
    n = c.graph.n
    return max(2 * n, n * max(c[v].d for v in c))


def trace_record(c: Configuration, rnd: int, fired) -> dict:
    try:
        ph = vo.phi(c)
        lam = vo.lambda_(c)
    except vo.CycleError:
        ph = lam = None
    frags, _ = vo.parent_forest(c)
    return {"round": rnd, "fired": [[v, str(r)] for v, r in fired], "phi": ph,
            "lambda": lam, "fragments": len(frags), "mst_gap": vo.mst_gap(c)}


def run(c: Configuration, policy, max_rounds: int, confirm_window: int | None = None,
        protocol=SSMST, trace_path=None, keep_trace: bool = True,
        on_step: Callable | None = None, on_round: Callable | None = None) -> RunResult:
    """Step until the tree has been quiet for `confirm_window` rounds or `max_rounds` pass.

    Quiet means p, d and the label are unchanged and only perpetual rules fired. Without an
    explicit window, `default_window` of the current configuration is used.
    `on_step(before, record, after)` and `on_round(round, config)` are observation hooks.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    eng = Engine(c, policy, protocol)
    trace = []
    moves = 0
    quiet = 0
    converged = 0
    round_noisy = False
    round_fired = []
    sink = open(trace_path, "w") if trace_path else None
    try:
        if on_round:
            on_round(0, eng.c)
        while eng.rounds < max_rounds:
            if not eng.enabled:
                return RunResult(eng.c, eng.rounds, moves, True, trace, converged)
            before = eng.c
            rec, changed = eng.step()
            moves += len(rec.fired)
            if keep_trace:
                trace.append(rec)
            if on_step:
                on_step(before, rec, eng.c)
            if sink:
                round_fired.extend(rec.fired)
            if any(r not in protocol.perpetual for _, r in rec.fired) or \
                    any(_structure(before[v]) != _structure(eng.c[v]) for v in changed):
                round_noisy = True
            if rec.closes_round:
                if round_noisy:
                    quiet, converged = 0, eng.rounds
                else:
                    quiet += 1
                round_noisy = False
                if sink:
                    sink.write(json.dumps(trace_record(eng.c, eng.rounds, round_fired)) + "\n")
                    sink.flush()
                    round_fired = []
                if on_round:
                    on_round(eng.rounds, eng.c)
                window = default_window(eng.c) if confirm_window is None else confirm_window
                if quiet >= window:
                    return RunResult(eng.c, eng.rounds, moves, True, trace, converged)
        return RunResult(eng.c, eng.rounds, moves, False, trace, converged)
    finally:
        if sink:
            sink.close()
