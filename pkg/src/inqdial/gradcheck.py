"""Central-finite-difference verification of the analytic gradients.

Random (params, state, act) triples are drawn from short random dialogs
on the bundled corpus so the checked computation exercises atom,
conjunction, implication, Sum, Lin, and MLP paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bag import BagMLPQ, bag_encode, mlp_grad, mlp_q
from .corpus import builtin_corpus, generate_scenario
from .dialog import Actor, apply_act, init_dialog, is_terminal, legal_moves
from .embedding import EmbeddedQ, grad, q_value
from .simulator import exhaustive_act


@dataclass(frozen=True)
class GradReport:
    path: str          # "embedded" | "mlp"
    trials: int
    coords: int
    max_rel_error: float

    def ok(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error <= tol


def _rel_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def _random_pairs(rng: np.random.Generator, n: int):
    """(view, act) pairs sampled from random prefixes of random dialogs."""
    corpus = builtin_corpus()
    pairs = []
    while len(pairs) < n:
        scen = generate_scenario(corpus, "RB", rng)
        sys_view, usr_view = init_dialog(scen.query, scen.sigma_sys, scen.sigma_usr, Actor.SYSTEM)
        for _ in range(int(rng.integers(1, 8))):
            if is_terminal(sys_view, 40):
                break
            actor = sys_view.actor_to_move
            view = sys_view if actor is Actor.SYSTEM else usr_view
            act = exhaustive_act(view, rng)
            sys_view, usr_view, _ = apply_act(sys_view, usr_view, act, actor)
        if is_terminal(sys_view, 40):
            continue
        moves = legal_moves(sys_view).all()
        pairs.append((sys_view, moves[int(rng.integers(len(moves)))]))
    return corpus, pairs


def check_embedded(trials: int = 30, h: float = 1e-5, seed: int = 0) -> GradReport:
    rng = np.random.default_rng(seed)
    corpus, pairs = _random_pairs(rng, trials)
    worst = 0.0
    coords = 0
    for view, act in pairs:
        qf = EmbeddedQ.create(corpus, int(rng.integers(3, 7)), rng)
        analytic = grad(qf.params, qf.vocab, view, act, 1.0)
        gmap = dict(analytic.named_arrays())
        for name, arr in qf.params.named_arrays():
            flat = arr.reshape(-1)
            gflat = gmap[name].reshape(-1)
            for i in range(len(flat)):
                orig = flat[i]
                flat[i] = orig + h
                up = q_value(qf.params, qf.vocab, view, act)
                flat[i] = orig - h
                down = q_value(qf.params, qf.vocab, view, act)
                flat[i] = orig
                fd = (up - down) / (2.0 * h)
                if max(abs(fd), abs(gflat[i])) < 1e-6:
                    continue  # below finite-difference resolution at this h
                worst = max(worst, _rel_error(fd, gflat[i]))
                coords += 1
    return GradReport("embedded", trials, coords, worst)


def check_mlp(trials: int = 20, h: float = 1e-5, seed: int = 1) -> GradReport:
    rng = np.random.default_rng(seed)
    corpus, pairs = _random_pairs(rng, trials)
    worst = 0.0
    coords = 0
    for view, act in pairs:
        qf = BagMLPQ.create(corpus, rng, hidden=int(rng.integers(4, 12)))
        x = bag_encode(view, act, qf.vocab)
        analytic = mlp_grad(qf.params, x, 1.0)
        gmap = dict(analytic.named_arrays())
        for name, arr in qf.params.named_arrays():
            flat = arr.reshape(-1)
            gflat = gmap[name].reshape(-1)
            for i in range(len(flat)):
                orig = flat[i]
                flat[i] = orig + h
                up = mlp_q(qf.params, x)
                flat[i] = orig - h
                down = mlp_q(qf.params, x)
                flat[i] = orig
                fd = (up - down) / (2.0 * h)
                if max(abs(fd), abs(gflat[i])) < 1e-6:
                    continue  # below finite-difference resolution at this h
                worst = max(worst, _rel_error(fd, gflat[i]))
                coords += 1
    return GradReport("mlp", trials, coords, worst)
