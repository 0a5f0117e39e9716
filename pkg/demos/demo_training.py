#!/usr/bin/env python3
"""Train a small embedded Q-policy and compare it with the exhaustive one.

Uses a deliberately tiny budget so the demo finishes in about a minute;
see the experiment CLI for full grids.

Run: python demos/demo_training.py
"""

import numpy as np

from inqdial import builtin_corpus
from inqdial.evaluate import BaselinePolicy, GreedyQPolicy, evaluate
from inqdial.qlearn import Setup, TrainConfig, train

corpus = builtin_corpus()
setup = Setup("SB", "rule")

cfg = TrainConfig(
    epochs=6,
    dialogs_per_epoch=300,
    encoder="embedded",
    embed_dim=5,
    eps_anneal_epochs=3,
    eps_end=0.2,
    learning_rate=1e-3,
    updates_per_episode=4,
    target_sync_episodes=150,
    seed=0,
)

print(f"training embedded-5d on {setup} ({cfg.epochs} epochs x {cfg.dialogs_per_epoch} dialogs)")
qfun, curve = train(cfg, corpus, setup,
                    progress=lambda s: print(
                        f"  epoch {s.epoch}: success={s.success_rate:.2f} "
                        f"return={s.mean_return:+.1f} eps={s.epsilon:.2f} loss={s.loss_mean:.2f}"))

print("\nevaluating 400 dialogs per policy (greedy, fresh scenarios)")
rng_seed = 99
learned = evaluate(GreedyQPolicy(qfun), setup, 400, 40, corpus=corpus,
                   rng=np.random.default_rng(rng_seed), seed=rng_seed)
baseline = evaluate(BaselinePolicy(), setup, 400, 40, corpus=corpus,
                    rng=np.random.default_rng(rng_seed), seed=rng_seed)

print(f"\n{'turn':>4} {'learned':>8} {'baseline':>9}")
for t in (1, 2, 3, 5, 10, 20, 40):
    print(f"{t:>4} {learned.at(t):>8.3f} {baseline.at(t):>9.3f}")
