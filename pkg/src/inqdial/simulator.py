"""Simulated dialog partners.

The exhaustive policy shares everything it can: Assert if possible, else
Open, else Close, picking uniformly inside the chosen move class. The
random policy picks uniformly over all legal acts whose content does not
conflict with the actor's beliefs plus the commitment store. The hybrid
simulator follows the exhaustive policy with probability `p` and the
random one otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dialog import ActKind, DialogAct, DialogState, legal_moves
from .inference import is_consistent


@dataclass(frozen=True)
class SimulatorConfig:
    p: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"mixing probability must be in [0, 1], got {self.p}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)


def _pick(acts, rng: np.random.Generator) -> DialogAct:
    return acts[int(rng.integers(len(acts)))]


def exhaustive_act(view: DialogState, rng: np.random.Generator) -> DialogAct:
    """Assert when possible, else Open, else Close (uniform within a class)."""
    moves = legal_moves(view)
    if moves.asserts:
        return _pick(moves.asserts, rng)
    if moves.opens:
        return _pick(moves.opens, rng)
    return _pick(moves.closes, rng)


def random_act(view: DialogState, rng: np.random.Generator) -> DialogAct:
    """Uniform over legal acts that do not conflict with own beliefs + CS.

    An Assert conflicts when its support cannot be consistently added to
    the actor's pool; Opens commit nothing and Close is always eligible.
    """
    pool = view.pool()
    eligible = []
    for act in legal_moves(view).all():
        if act.kind is ActKind.ASSERT and not is_consistent(pool.union(act.argument.support)):
            continue
        eligible.append(act)
    return _pick(eligible, rng)


def hybrid_act(view: DialogState, cfg: SimulatorConfig, rng: np.random.Generator) -> DialogAct:
    """Exhaustive with probability cfg.p, otherwise random (shared rng stream)."""
    if rng.random() < cfg.p:
        return exhaustive_act(view, rng)
    return random_act(view, rng)
