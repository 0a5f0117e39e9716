"""Policy evaluation: success-rate-by-turn curves over simulated dialogs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .corpus import Corpus, Scenario, generate_scenario
from .dialog import (
    DEFAULT_TURN_CAP,
    Actor,
    DialogState,
    OutcomeKind,
    apply_act,
    init_dialog,
    is_terminal,
    legal_moves,
)
from .qlearn import Setup, select_act
from .simulator import SimulatorConfig, exhaustive_act, hybrid_act, random_act


class BaselinePolicy:
    """The exhaustive cascade: Assert when possible, else Open, else Close."""

    name = "baseline"

    def act(self, view: DialogState, rng: np.random.Generator):
        return exhaustive_act(view, rng)


class RandomPolicy:
    name = "random"

    def act(self, view: DialogState, rng: np.random.Generator):
        return random_act(view, rng)


class GreedyQPolicy:
    """Greedy (no exploration) wrapper around a trained Q-function."""

    def __init__(self, qfun):
        self.qfun = qfun
        self.name = qfun.name

    def act(self, view: DialogState, rng: np.random.Generator):
        return select_act(self.qfun, view, legal_moves(view).all(), 0.0, rng)


@dataclass(frozen=True)
class EvalCurve:
    """Cumulative success rate by turn, with run metadata."""

    success_by_turn: tuple[float, ...]
    policy: str
    setup: str
    seed: Optional[int]
    n_dialogs: int

    def at(self, turn: int) -> float:
        """Fraction of dialogs succeeded by the end of `turn` (1-based)."""
        if turn < 1:
            return 0.0
        return self.success_by_turn[min(turn, len(self.success_by_turn)) - 1]

    def csv(self) -> str:
        lines = [
            f"# policy={self.policy}",
            f"# setup={self.setup}",
            f"# seed={self.seed}",
            f"# dialogs={self.n_dialogs}",
            "turn,success_rate",
        ]
        lines.extend(f"{t},{v!r}" for t, v in enumerate(self.success_by_turn, start=1))
        return "\n".join(lines) + "\n"


def parse_curve_csv(text: str) -> EvalCurve:
    meta = {}
    values = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line and not line.startswith("turn"):
            values.append(float(line.split(",")[1]))
    seed = meta.get("seed")
    return EvalCurve(
        tuple(values),
        meta.get("policy", "?"),
        meta.get("setup", "?"),
        None if seed in (None, "None") else int(seed),
        int(meta.get("dialogs", 0)),
    )


def evaluate(
    policy,
    setup: Setup,
    n_dialogs: int,
    turn_cap: int = DEFAULT_TURN_CAP,
    rng: Optional[np.random.Generator] = None,
    corpus: Optional[Corpus] = None,
    scenario_provider: Optional[Callable[[np.random.Generator], Scenario]] = None,
    seed: Optional[int] = None,
) -> EvalCurve:
    """Run fresh scenarios and record the turn each success lands on."""
    if rng is None:
        rng = np.random.default_rng(seed or 0)
    if scenario_provider is None:
        if corpus is None:
            raise ValueError("evaluate needs a corpus or a scenario provider")
        scenario_provider = lambda r: generate_scenario(corpus, setup.mode, r)
    sim = SimulatorConfig(p=setup.p)
    succeeded_at = np.zeros(turn_cap + 1, dtype=int)
    for _ in range(n_dialogs):
        scenario = scenario_provider(rng)
        sys_view, usr_view = init_dialog(scenario.query, scenario.sigma_sys, scenario.sigma_usr, Actor.SYSTEM)
        outcome = is_terminal(sys_view, turn_cap)
        while outcome is None:
            actor = sys_view.actor_to_move
            view = sys_view if actor is Actor.SYSTEM else usr_view
            act = policy.act(view, rng) if actor is Actor.SYSTEM else hybrid_act(view, sim, rng)
            sys_view, usr_view, _ = apply_act(sys_view, usr_view, act, actor)
            outcome = is_terminal(sys_view, turn_cap)
        if outcome.kind is OutcomeKind.SUCCESS:
            succeeded_at[min(outcome.turns_used, turn_cap)] += 1
    cumulative = np.cumsum(succeeded_at[1:]) / n_dialogs
    return EvalCurve(tuple(float(v) for v in cumulative), policy.name, str(setup), seed, n_dialogs)


def median_curve(curves: Sequence[EvalCurve]) -> EvalCurve:
    """Per-turn median across seeds of one (policy, setup) cell."""
    stacked = np.array([c.success_by_turn for c in curves])
    med = np.median(stacked, axis=0)
    first = curves[0]
    return EvalCurve(tuple(float(v) for v in med), first.policy, first.setup, None, first.n_dialogs)
