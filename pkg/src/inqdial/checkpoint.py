"""Versioned plain-text checkpoints for trained Q-functions.

Layout: a header line `inqdial-checkpoint <version> <kind>`, `key value`
lines for scalar settings, named sections for vocabularies, then each
matrix as `array <name> <rows> <cols>` followed by one row per line of
`repr`-formatted floats (so reloading is value-exact), ending with `end`.
"""

from __future__ import annotations

from typing import TextIO

import numpy as np

from .bag import BagMLPQ, BagVocab, MLPParams
from .embedding import EmbeddedQ, Params, Vocabulary
from .formulas import canonicalize, parse_formula

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _write_array(fh: TextIO, name: str, arr: np.ndarray) -> None:
    mat = np.atleast_2d(arr)
    fh.write(f"array {name} {mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        fh.write(" ".join(repr(float(v)) for v in row) + "\n")


class _Reader:
    def __init__(self, fh: TextIO):
        self.lines = fh.read().splitlines()
        self.i = 0

    def next(self) -> str:
        if self.i >= len(self.lines):
            raise CheckpointError("unexpected end of checkpoint")
        line = self.lines[self.i]
        self.i += 1
        return line

    def expect_kv(self, key: str) -> str:
        line = self.next()
        head, _, rest = line.partition(" ")
        if head != key:
            raise CheckpointError(f"expected {key!r}, found {line!r}")
        return rest

    def read_array(self, name: str, like: np.ndarray) -> np.ndarray:
        head = self.next().split()
        if len(head) != 4 or head[0] != "array" or head[1] != name:
            raise CheckpointError(f"expected array {name!r}, found {' '.join(head)!r}")
        rows, cols = int(head[2]), int(head[3])
        data = np.array([[float(v) for v in self.next().split()] for _ in range(rows)])
        if data.shape != (rows, cols):
            raise CheckpointError(f"array {name!r} shape mismatch")
        return data.reshape(like.shape)


def save_qfun(path: str, qfun) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"inqdial-checkpoint {FORMAT_VERSION} {qfun.kind}\n")
        if isinstance(qfun, EmbeddedQ):
            dims = qfun.params.dims
            fh.write(f"embed {dims.embed}\n")
            fh.write(f"lin {dims.lin}\n")
            fh.write(f"max_args {dims.max_args}\n")
            fh.write(f"predicates {' '.join(qfun.vocab.predicates)}\n")
            fh.write(f"symbols {' '.join(qfun.vocab.symbols)}\n")
        elif isinstance(qfun, BagMLPQ):
            fh.write(f"hidden {qfun.params.w1.shape[0]}\n")
            fh.write(f"beliefs {len(qfun.vocab.beliefs)}\n")
            for b in qfun.vocab.beliefs:
                fh.write(f"{b}\n")
        else:
            raise CheckpointError(f"cannot checkpoint {type(qfun).__name__}")
        for name, arr in qfun.params.named_arrays():
            _write_array(fh, name, arr)
        fh.write("end\n")


def load_qfun(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        reader = _Reader(fh)
    header = reader.next().split()
    if len(header) != 3 or header[0] != "inqdial-checkpoint":
        raise CheckpointError(f"not a checkpoint file: {path}")
    if int(header[1]) != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header[1]}")
    kind = header[2]
    if kind == "embedded":
        embed = int(reader.expect_kv("embed"))
        lin = int(reader.expect_kv("lin"))
        max_args = int(reader.expect_kv("max_args"))
        vocab = Vocabulary(reader.expect_kv("predicates").split(), reader.expect_kv("symbols").split(), max_args)
        dims = vocab.dims(embed, lin)
        loaded = {name: reader.read_array(name, template) for name, template in _embedded_templates(dims)}
        return EmbeddedQ(Params(dims, **loaded), vocab)
    if kind == "bag":
        hidden = int(reader.expect_kv("hidden"))
        n = int(reader.expect_kv("beliefs"))
        beliefs = [canonicalize(parse_formula(reader.next(), max_arity=64)) for _ in range(n)]
        vocab = BagVocab(beliefs)
        in_dim = vocab.state_length + vocab.act_length
        templates = [
            ("w1", np.zeros((hidden, in_dim))),
            ("b1", np.zeros(hidden)),
            ("w2", np.zeros((hidden, hidden))),
            ("b2", np.zeros(hidden)),
            ("w3", np.zeros(hidden)),
            ("b3", np.zeros(1)),
        ]
        loaded = {name: reader.read_array(name, template) for name, template in templates}
        return BagMLPQ(MLPParams(**loaded), vocab)
    raise CheckpointError(f"unknown checkpoint kind {kind!r}")


def _embedded_templates(dims):
    d, lin = dims.embed, dims.lin
    return [
        ("w_pre", np.zeros((d, dims.n_pred))),
        ("w_arg", np.zeros((d, dims.max_args * dims.n_sym))),
        ("w_and", np.zeros((d, 2 * d))),
        ("w_imp", np.zeros((d, 2 * d))),
        ("ds_w", np.zeros((lin, 3 * d))),
        ("ds_b", np.zeros(lin)),
        ("da_w", np.zeros((lin, d + 1))),
        ("da_b", np.zeros(lin)),
        ("out_w", np.zeros(2 * lin + 1)),
        ("out_b", np.zeros(1)),
    ]
