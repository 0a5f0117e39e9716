#!/usr/bin/env python3
"""Peek inside the formula embeddings and verify a gradient numerically.

Run: python demos/demo_embedding.py
"""

import numpy as np

from inqdial import BeliefSet, builtin_corpus, init_dialog, legal_moves, parse_formula
from inqdial.embedding import EmbeddedQ, embed_formula, grad, q_value

corpus = builtin_corpus()
rng = np.random.default_rng(0)
qf = EmbeddedQ.create(corpus, embed_dim=5, rng=rng)
print("dims:", qf.params.dims)

print("\n== formula vectors (d = 5) ==")
for text in [
    "CompanyA(a)",
    "Email(m1, a, b) & Price(m1)",
    "Email(M, X, Y) & Price(M) -> Propose(M, X, Y)",
]:
    f = parse_formula(text)
    v = embed_formula(qf.params, qf.vocab.tree(f))
    print(f"  {text:52s} {np.round(v, 3)}")

v1 = embed_formula(qf.params, qf.vocab.tree(parse_formula("CompanyA(a) & CompanyB(b)")))
v2 = embed_formula(qf.params, qf.vocab.tree(parse_formula("CompanyB(b) & CompanyA(a)")))
print("\ncomposition is ordered: A & B vs B & A differ by",
      float(np.linalg.norm(v1 - v2)).__round__(4))

print("\n== Q-values over the opening move set ==")
view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
for act in legal_moves(view).all():
    print(f"  {qf.value(view, act):8.4f}  {str(act)[:70]}")

print("\n== analytic gradient vs central finite differences ==")
act = legal_moves(view).all()[0]
g = grad(qf.params, qf.vocab, view, act, 1.0)
h = 1e-5
flat = qf.params.w_and.reshape(-1)
gflat = g.w_and.reshape(-1)
worst = 0.0
for i in range(flat.size):
    orig = flat[i]
    flat[i] = orig + h
    up = q_value(qf.params, qf.vocab, view, act)
    flat[i] = orig - h
    down = q_value(qf.params, qf.vocab, view, act)
    flat[i] = orig
    fd = (up - down) / (2 * h)
    if max(abs(fd), abs(gflat[i])) > 1e-6:
        worst = max(worst, abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i])))
print(f"w_and: max relative error over {flat.size} coordinates = {worst:.2e}")
