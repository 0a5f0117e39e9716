"""Bag-of-formulae state/act encoding and the MLP Q-function baseline.

The encoding is one indicator slot per corpus belief: three state blocks
(own beliefs, commitment store, and which rule's Open produced the
current agenda) and an act block (the act's formulas plus a one-hot act
kind). The Q-function on top is a small feed-forward net with sigmoid
hidden layers and a linear scalar output.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .corpus import Corpus
from .dialog import ActKind, DialogAct, DialogState, agenda_store
from .formulas import Belief
from .inference import BeliefSet

_KIND_SLOT = {ActKind.ASSERT: 0, ActKind.OPEN: 1, ActKind.CLOSE: 2}


class BagVocab:
    """Stable enumeration of the corpus beliefs plus act-kind slots."""

    def __init__(self, beliefs):
        self.beliefs = tuple(beliefs)
        self.index = {b: i for i, b in enumerate(self.beliefs)}
        self._stores = {b: agenda_store(b) for b in self.beliefs if b.is_domain}
        self.state_length = 3 * len(self.beliefs)
        self.act_length = len(self.beliefs) + 3

    @staticmethod
    def from_corpus(corpus: Corpus) -> "BagVocab":
        return BagVocab(corpus.all_beliefs())

    def _member_bits(self, members: BeliefSet, out: np.ndarray, offset: int) -> None:
        for b in members:
            i = self.index.get(b)
            if i is None:
                raise KeyError(f"unknown formula for bag encoding: {b}")
            out[offset + i] = 1.0

    def state_vector(self, view: DialogState) -> np.ndarray:
        n = len(self.beliefs)
        out = np.zeros(self.state_length)
        self._member_bits(view.own_beliefs, out, 0)
        self._member_bits(view.cs, out, n)
        if view.cqs:
            top = view.cqs[-1]
            for b, store in self._stores.items():
                if store == top:
                    out[2 * n + self.index[b]] = 1.0
        return out

    def act_vector(self, act: DialogAct) -> np.ndarray:
        out = np.zeros(self.act_length)
        if act.kind is ActKind.ASSERT:
            self._member_bits(act.argument.support, out, 0)
            claim = Belief(act.argument.claim)
            i = self.index.get(claim)
            if i is not None:  # derived claims outside the corpus carry no bit
                out[i] = 1.0
        elif act.kind is ActKind.OPEN:
            i = self.index.get(act.agenda)
            if i is None:
                raise KeyError(f"unknown formula for bag encoding: {act.agenda}")
            out[i] = 1.0
        out[len(self.beliefs) + _KIND_SLOT[act.kind]] = 1.0
        return out


def bag_encode(view: DialogState, act: DialogAct, vocab: BagVocab) -> np.ndarray:
    """Binary vector for a (state, act) pair; length fixed by the vocab."""
    return np.concatenate([vocab.state_vector(view), vocab.act_vector(act)])


@dataclass
class MLPParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def named_arrays(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def copy(self) -> "MLPParams":
        return MLPParams(*(a.copy() for _, a in self.named_arrays()))

    def zeros_like(self) -> "MLPParams":
        return MLPParams(*(np.zeros_like(a) for _, a in self.named_arrays()))

    def add_scaled(self, other: "MLPParams", scale: float) -> None:
        for (_, mine), (_, theirs) in zip(self.named_arrays(), other.named_arrays()):
            mine += scale * theirs


def init_mlp(in_dim: int, hidden: int, rng: np.random.Generator) -> MLPParams:
    def glorot(rows, cols):
        s = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-s, s, size=(rows, cols))

    return MLPParams(
        w1=glorot(hidden, in_dim),
        b1=np.zeros(hidden),
        w2=glorot(hidden, hidden),
        b2=np.zeros(hidden),
        w3=glorot(1, hidden)[0],
        b3=np.zeros(1),
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def mlp_q(params: MLPParams, x: np.ndarray) -> float:
    """Feed-forward value for one encoded (state, act) vector."""
    if x.shape[-1] != params.w1.shape[1]:
        raise ValueError(f"input length {x.shape[-1]} != {params.w1.shape[1]}")
    h1 = _sigmoid(params.w1 @ x + params.b1)
    h2 = _sigmoid(params.w2 @ h1 + params.b2)
    return float(params.w3 @ h2 + params.b3[0])


def mlp_grad(params: MLPParams, x: np.ndarray, upstream: float = 1.0) -> MLPParams:
    """Exact gradients of upstream * mlp_q(x) for every parameter."""
    grads = params.zeros_like()
    _mlp_batch_backward(params, x[None, :], grads, upstreams=np.array([upstream]))
    return grads


def _mlp_batch_backward(params, xs, grads, *, upstreams=None, targets=None) -> np.ndarray:
    h1 = _sigmoid(xs @ params.w1.T + params.b1)
    h2 = _sigmoid(h1 @ params.w2.T + params.b2)
    qs = h2 @ params.w3 + params.b3[0]
    dq = upstreams if targets is None else 2.0 * (qs - targets) / len(xs)
    grads.w3 += dq @ h2
    grads.b3 += dq.sum()
    dh2 = np.outer(dq, params.w3) * h2 * (1.0 - h2)
    grads.w2 += dh2.T @ h1
    grads.b2 += dh2.sum(axis=0)
    dh1 = (dh2 @ params.w2) * h1 * (1.0 - h1)
    grads.w1 += dh1.T @ xs
    grads.b1 += dh1.sum(axis=0)
    return qs


class BagMLPQ:
    """Q-function over bag-encoded (state, act) pairs."""

    kind = "bag"
    name = "bag-mlp"

    def __init__(self, params: MLPParams, vocab: BagVocab):
        self.params = params
        self.vocab = vocab
        self._act_vecs: dict[DialogAct, np.ndarray] = {}
        self._state_vecs: dict = {}

    @staticmethod
    def create(corpus: Corpus, rng: np.random.Generator, hidden: int = 64) -> "BagMLPQ":
        vocab = BagVocab.from_corpus(corpus)
        return BagMLPQ(init_mlp(vocab.state_length + vocab.act_length, hidden, rng), vocab)

    def encode(self, view: DialogState) -> np.ndarray:
        key = (view.own_beliefs, view.cs, view.cqs[-1] if view.cqs else None)
        vec = self._state_vecs.get(key)
        if vec is None:
            vec = self.vocab.state_vector(view)
            vec.flags.writeable = False
            self._state_vecs[key] = vec
        return vec

    def _pair(self, enc: np.ndarray, act: DialogAct) -> np.ndarray:
        av = self._act_vecs.get(act)
        if av is None:
            av = self._act_vecs[act] = self.vocab.act_vector(act)
        return np.concatenate([enc, av])

    def value(self, enc, act: DialogAct) -> float:
        if isinstance(enc, DialogState):
            enc = self.encode(enc)
        return mlp_q(self.params, self._pair(enc, act))

    def values(self, enc, acts) -> list[float]:
        if isinstance(enc, DialogState):
            enc = self.encode(enc)
        return [self.value(enc, act) for act in acts]

    def train_batch(self, pairs, targets, lr: float) -> float:
        xs = np.stack([self._pair(enc if not isinstance(enc, DialogState) else self.encode(enc), act)
                       for enc, act in pairs])
        grads = self.params.zeros_like()
        qs = _mlp_batch_backward(self.params, xs, grads, targets=np.asarray(targets, dtype=float))
        self.params.add_scaled(grads, -lr)
        return float(np.mean((qs - np.asarray(targets)) ** 2))

    def clone(self) -> "BagMLPQ":
        return BagMLPQ(self.params.copy(), self.vocab)
