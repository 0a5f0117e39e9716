"""Recursive embedding of logical formulas and the embedded Q-function.

A formula becomes a tree: leaves are argument symbols, their parents are
predicates, and internal nodes are the connectives. An atom embeds as

    v_a = sigmoid(W_pre one_hot(pred) + W_arg [one_hot(arg_1); ...])

with zero vectors filling unused argument slots, and connective nodes
compose children bottom-up via sigmoid(W_and [v1; v2]) respectively
sigmoid(W_imp [v1; v2]). Conjunction composition is deliberately ordered
(A & B need not embed like B & A).

The Q-function embeds a dialog state (element-wise sums over own
beliefs, commitment store, and agenda atoms, then an affine map), embeds
a dialog act (formula sum plus a Close indicator, then an affine map),
and scores the concatenation with a final affine layer. Gradients are
exact reverse-mode, accumulated across shared subtrees.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Optional, Union

import numpy as np

from .corpus import Corpus
from .dialog import ActKind, DialogAct, DialogState
from .formulas import Atom, Belief, Query, canonicalize
from .inference import closure


class VocabularyError(KeyError):
    pass


@dataclass(frozen=True)
class Dims:
    embed: int      # width d of every formula embedding
    n_pred: int     # predicate vocabulary size
    n_sym: int      # argument-symbol vocabulary size
    max_args: int   # argument slots per atom
    lin: int        # width of the EmbDs / EmbDa affine outputs


@dataclass(frozen=True)
class AtomNode:
    pred: int
    args: tuple[int, ...]


@dataclass(frozen=True)
class PairNode:
    op: str  # "and" | "imp"
    left: Union["AtomNode", "PairNode"]
    right: Union["AtomNode", "PairNode"]


TreeNode = Union[AtomNode, PairNode]


def _fold_conjunction(nodes: list[TreeNode]) -> TreeNode:
    tree = nodes[0]
    for node in nodes[1:]:
        tree = PairNode("and", tree, node)
    return tree


class Vocabulary:
    """Stable index assignment for predicates and argument symbols.

    Variables are canonicalized (V1, V2, ...) before lookup so
    alpha-equivalent formulas share one embedding; constants (including
    skolem constants from the corpus closure) get their own entries, and
    a negated atom's predicate indexes separately from the positive one.
    """

    def __init__(self, predicates: Iterable[str], symbols: Iterable[str], max_args: int):
        self.predicates = tuple(predicates)
        self.symbols = tuple(symbols)
        self.max_args = max_args
        self._pred_index = {p: i for i, p in enumerate(self.predicates)}
        self._sym_index = {s: i for i, s in enumerate(self.symbols)}
        self._trees: dict = {}

    @staticmethod
    def from_corpus(corpus: Corpus) -> "Vocabulary":
        preds: set[str] = set()
        syms: set[str] = set()
        max_args = 1

        def visit(atom: Atom):
            nonlocal max_args
            preds.add(atom.signed_predicate)
            max_args = max(max_args, len(atom.args))
            for t in atom.args:
                syms.add(t.name)

        for belief in corpus.all_beliefs():
            for atom in belief.atoms():
                visit(atom)
        for atom in canonicalize(corpus.query).atoms:
            visit(atom)
        for atom in closure(corpus.all_beliefs()):
            visit(atom)
        return Vocabulary(sorted(preds), sorted(syms), max_args)

    def dims(self, embed: int, lin: Optional[int] = None) -> Dims:
        return Dims(embed, len(self.predicates), len(self.symbols), self.max_args, lin or 2 * embed)

    def _atom_node(self, atom: Atom) -> AtomNode:
        try:
            pred = self._pred_index[atom.signed_predicate]
            args = tuple(self._sym_index[t.name] for t in atom.args)
        except KeyError as missing:
            raise VocabularyError(f"unknown symbol {missing.args[0]!r} in {atom}") from None
        if len(args) > self.max_args:
            raise VocabularyError(f"atom {atom} exceeds {self.max_args} argument slots")
        return AtomNode(pred, args)

    def tree(self, formula: Union[Belief, Query, Atom]) -> TreeNode:
        """Parse a formula into its composition tree (cached per formula)."""
        cached = self._trees.get(formula)
        if cached is not None:
            return cached
        f = canonicalize(formula)
        if isinstance(f, Atom):
            tree: TreeNode = self._atom_node(f)
        elif isinstance(f, Query):
            tree = _fold_conjunction([self._atom_node(a) for a in f.atoms])
        elif isinstance(f, Belief):
            body = _fold_conjunction([self._atom_node(a) for a in f.antecedent])
            if f.is_domain:
                tree = PairNode("imp", body, self._atom_node(f.consequent[0]))
            else:
                tree = body
        else:
            raise TypeError(f"cannot embed {type(formula).__name__}")
        self._trees[formula] = tree
        return tree


def build_tree(formula: Union[Belief, Query, Atom], vocab: Vocabulary) -> TreeNode:
    return vocab.tree(formula)


@dataclass
class Params:
    """All learnable tensors of the embedded Q-function."""

    dims: Dims
    w_pre: np.ndarray   # (d, n_pred)
    w_arg: np.ndarray   # (d, max_args * n_sym)
    w_and: np.ndarray   # (d, 2d)
    w_imp: np.ndarray   # (d, 2d)
    ds_w: np.ndarray    # (lin, 3d)
    ds_b: np.ndarray    # (lin,)
    da_w: np.ndarray    # (lin, d + 1)
    da_b: np.ndarray    # (lin,)
    out_w: np.ndarray   # (2 lin + 1,)
    out_b: np.ndarray   # (1,)

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "dims"]

    def copy(self) -> "Params":
        return Params(self.dims, *(a.copy() for _, a in self.named_arrays()))

    def zeros_like(self) -> "Params":
        return Params(self.dims, *(np.zeros_like(a) for _, a in self.named_arrays()))

    def add_scaled(self, other: "Params", scale: float) -> None:
        for (_, mine), (_, theirs) in zip(self.named_arrays(), other.named_arrays()):
            mine += scale * theirs


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    s = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-s, s, size=(rows, cols))


def init_params(dims: Dims, rng: np.random.Generator) -> Params:
    """Uniform [-s, s] with s = sqrt(6 / (fan_in + fan_out)); zero biases."""
    d, lin = dims.embed, dims.lin
    return Params(
        dims=dims,
        w_pre=_glorot(rng, d, dims.n_pred),
        w_arg=_glorot(rng, d, dims.max_args * dims.n_sym),
        w_and=_glorot(rng, d, 2 * d),
        w_imp=_glorot(rng, d, 2 * d),
        ds_w=_glorot(rng, lin, 3 * d),
        ds_b=np.zeros(lin),
        da_w=_glorot(rng, lin, d + 1),
        da_b=np.zeros(lin),
        out_w=_glorot(rng, 2 * lin + 1, 1)[:, 0],
        out_b=np.zeros(1),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def embed_atom(params: Params, node: AtomNode) -> np.ndarray:
    z = params.w_pre[:, node.pred].copy()
    n_sym = params.dims.n_sym
    for slot, sym in enumerate(node.args):
        z += params.w_arg[:, slot * n_sym + sym]
    return _sigmoid(z)


def compose(params: Params, op: str, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    w = params.w_and if op == "and" else params.w_imp
    return _sigmoid(w @ np.concatenate([v1, v2]))


def embed_formula(params: Params, tree: TreeNode) -> np.ndarray:
    """Bottom-up composition; the root vector represents the formula."""
    if isinstance(tree, AtomNode):
        return embed_atom(params, tree)
    order, values = _tree_forward(params, tree)
    return values[order[-1]]


_topo_cache: dict = {}


def _topo_order(tree: TreeNode) -> list[TreeNode]:
    """Unique nodes in post-order (children before parents), cached per tree."""
    order = _topo_cache.get(tree)
    if order is None:
        order = []
        seen = set()

        def rec(node):
            if node in seen:
                return
            seen.add(node)
            if isinstance(node, PairNode):
                rec(node.left)
                rec(node.right)
            order.append(node)

        rec(tree)
        _topo_cache[tree] = order
    return order


def _tree_forward(params: Params, tree: TreeNode) -> tuple[list[TreeNode], dict[TreeNode, np.ndarray]]:
    """Forward pass recording per-node activations (the tape for grad)."""
    order = _topo_order(tree)
    values: dict[TreeNode, np.ndarray] = {}
    w_pre, w_arg = params.w_pre, params.w_arg
    n_sym = params.dims.n_sym
    for node in order:
        if isinstance(node, AtomNode):
            z = w_pre[:, node.pred].copy()
            for slot, sym in enumerate(node.args):
                z += w_arg[:, slot * n_sym + sym]
        else:
            w = params.w_and if node.op == "and" else params.w_imp
            z = w @ np.concatenate([values[node.left], values[node.right]])
        values[node] = 1.0 / (1.0 + np.exp(-z))
    return order, values


def _tree_backward(
    params: Params,
    grads: Params,
    order: list[TreeNode],
    values: dict[TreeNode, np.ndarray],
    upstream: np.ndarray,
) -> None:
    d, n_sym = params.dims.embed, params.dims.n_sym
    dv: dict[TreeNode, np.ndarray] = {order[-1]: upstream}
    for node in reversed(order):
        up = dv.pop(node, None)
        if up is None:
            continue
        a = values[node]
        dz = up * a * (1.0 - a)
        if isinstance(node, AtomNode):
            grads.w_pre[:, node.pred] += dz
            for slot, sym in enumerate(node.args):
                grads.w_arg[:, slot * n_sym + sym] += dz
        else:
            w = params.w_and if node.op == "and" else params.w_imp
            gw = grads.w_and if node.op == "and" else grads.w_imp
            vl, vr = values[node.left], values[node.right]
            gw += np.outer(dz, np.concatenate([vl, vr]))
            for child, dc in ((node.left, w[:, :d].T @ dz), (node.right, w[:, d:].T @ dz)):
                prev = dv.get(child)
                dv[child] = dc if prev is None else prev + dc


def state_groups(view: DialogState) -> tuple[tuple, tuple, tuple]:
    """The three formula groups a state embeds: own beliefs, CS, agenda atoms."""
    top = view.cqs[-1].atoms if view.cqs else ()
    return tuple(view.own_beliefs), tuple(view.cs), top


def act_formulas(act: DialogAct) -> tuple:
    """Formulas an act embeds: supports plus the claim, or the opened rule."""
    if act.kind is ActKind.ASSERT:
        return tuple(act.argument.support) + (Belief(act.argument.claim),)
    if act.kind is ActKind.OPEN:
        return (act.agenda,)
    return ()


def embed_state(params: Params, vocab: Vocabulary, view: DialogState) -> np.ndarray:
    d = params.dims.embed
    parts = []
    for group in state_groups(view):
        total = np.zeros(d)
        for f in group:
            total += embed_formula(params, vocab.tree(f))
        parts.append(total)
    return params.ds_w @ np.concatenate(parts) + params.ds_b


def embed_act(params: Params, vocab: Vocabulary, act: DialogAct) -> np.ndarray:
    total = np.zeros(params.dims.embed)
    for f in act_formulas(act):
        total += embed_formula(params, vocab.tree(f))
    close = 1.0 if act.kind is ActKind.CLOSE else 0.0
    return params.da_w @ np.append(total, close) + params.da_b


def q_value(params: Params, vocab: Vocabulary, view: DialogState, act: DialogAct) -> float:
    close = 1.0 if act.kind is ActKind.CLOSE else 0.0
    x = np.concatenate([embed_state(params, vocab, view), embed_act(params, vocab, act), [close]])
    return float(params.out_w @ x + params.out_b[0])


def grad(
    params: Params, vocab: Vocabulary, view: DialogState, act: DialogAct, upstream: float = 1.0
) -> Params:
    """Exact gradients of upstream * q_value with respect to every parameter."""
    grads = params.zeros_like()
    _batch_backward(params, vocab, [(view, act)], grads, upstreams=[upstream])
    return grads


def _batch_backward(params, vocab, pairs, grads, *, upstreams=None, targets=None) -> list[float]:
    """Shared forward/backward over (state, act) pairs.

    Formula trees, state triples, and acts all repeat inside a batch, so
    each distinct one is forwarded once; the affine layers run as one
    matrix pass over the batch, and each distinct formula is backwarded
    once with its accumulated upstream.
    """
    d, lin = params.dims.embed, params.dims.lin
    n = len(pairs)
    tapes: dict = {}
    vecs: dict = {}

    def formula_vec(f) -> np.ndarray:
        got = vecs.get(f)
        if got is None:
            order, values = _tree_forward(params, vocab.tree(f))
            tapes[f] = (order, values)
            got = vecs[f] = values[order[-1]]
        return got

    group_cache: dict = {}
    act_cache: dict = {}
    g_rows = np.empty((n, 3 * d))
    h_rows = np.empty((n, d + 1))
    state_keys = []
    act_list = []
    for i, (view, act) in enumerate(pairs):
        key = state_groups(view)
        state_keys.append(key)
        row = group_cache.get(key)
        if row is None:
            row = np.concatenate([
                sum((formula_vec(f) for f in g), np.zeros(d)) for g in key
            ])
            group_cache[key] = row
        g_rows[i] = row
        act_list.append(act)
        arow = act_cache.get(act)
        if arow is None:
            fsum = sum((formula_vec(f) for f in act_formulas(act)), np.zeros(d))
            arow = np.append(fsum, 1.0 if act.kind is ActKind.CLOSE else 0.0)
            act_cache[act] = arow
        h_rows[i] = arow

    v_ds = g_rows @ params.ds_w.T + params.ds_b
    v_da = h_rows @ params.da_w.T + params.da_b
    closes = h_rows[:, d]
    xs = np.concatenate([v_ds, v_da, closes[:, None]], axis=1)
    qs = xs @ params.out_w + params.out_b[0]

    if targets is None:
        dq = np.asarray(upstreams, dtype=float)
    else:
        dq = 2.0 * (qs - np.asarray(targets, dtype=float)) / n
    if np.any(dq):
        grads.out_w += dq @ xs
        grads.out_b += dq.sum()
        dv_ds = np.outer(dq, params.out_w[:lin])
        dv_da = np.outer(dq, params.out_w[lin : 2 * lin])
        grads.ds_w += dv_ds.T @ g_rows
        grads.ds_b += dv_ds.sum(axis=0)
        grads.da_w += dv_da.T @ h_rows
        grads.da_b += dv_da.sum(axis=0)
        dg = dv_ds @ params.ds_w
        dh = dv_da @ params.da_w
        upstream_by_formula: dict = {}
        for i in range(n):
            if dq[i] == 0.0:
                continue
            for k, group in enumerate(state_keys[i]):
                dsum = dg[i, k * d : (k + 1) * d]
                for f in group:
                    prev = upstream_by_formula.get(f)
                    upstream_by_formula[f] = dsum.copy() if prev is None else prev + dsum
            dfs = dh[i, :d]
            for f in act_formulas(act_list[i]):
                prev = upstream_by_formula.get(f)
                upstream_by_formula[f] = dfs.copy() if prev is None else prev + dfs
        for f, upstream in upstream_by_formula.items():
            order, values = tapes[f]
            _tree_backward(params, grads, order, values, upstream)
    return [float(q) for q in qs]


class EmbeddedQ:
    """Q-function over (dialog state, dialog act) with recursive embeddings.

    Forward values are cached per parameter version; `train_batch` applies
    one SGD step on mean squared error against supplied targets.
    """

    kind = "embedded"

    def __init__(self, params: Params, vocab: Vocabulary):
        self.params = params
        self.vocab = vocab
        self._version = 0
        self._formula_vec: dict = {}
        self._state_vec: dict = {}
        self._act_vec: dict = {}

    @property
    def name(self) -> str:
        return f"embedded-{self.params.dims.embed}d"

    @staticmethod
    def create(corpus: Corpus, embed_dim: int, rng: np.random.Generator, lin: Optional[int] = None) -> "EmbeddedQ":
        vocab = Vocabulary.from_corpus(corpus)
        return EmbeddedQ(init_params(vocab.dims(embed_dim, lin), rng), vocab)

    def encode(self, view: DialogState) -> DialogState:
        return view  # views are immutable; the state itself is the snapshot

    def _formula(self, f) -> np.ndarray:
        got = self._formula_vec.get(f)
        if got is None:
            got = self._formula_vec[f] = embed_formula(self.params, self.vocab.tree(f))
        return got

    def _state(self, view: DialogState) -> np.ndarray:
        key = state_groups(view)
        got = self._state_vec.get(key)
        if got is None:
            d = self.params.dims.embed
            parts = [sum((self._formula(f) for f in g), np.zeros(d)) for g in key]
            got = self.params.ds_w @ np.concatenate(parts) + self.params.ds_b
            self._state_vec[key] = got
        return got

    def _act(self, act: DialogAct) -> np.ndarray:
        got = self._act_vec.get(act)
        if got is None:
            d = self.params.dims.embed
            total = sum((self._formula(f) for f in act_formulas(act)), np.zeros(d))
            close = 1.0 if act.kind is ActKind.CLOSE else 0.0
            got = self.params.da_w @ np.append(total, close) + self.params.da_b
            self._act_vec[act] = got
        return got

    def value(self, enc: DialogState, act: DialogAct) -> float:
        close = 1.0 if act.kind is ActKind.CLOSE else 0.0
        x = np.concatenate([self._state(enc), self._act(act), [close]])
        return float(self.params.out_w @ x + self.params.out_b[0])

    def values(self, enc: DialogState, acts) -> list[float]:
        return [self.value(enc, act) for act in acts]

    def train_batch(self, pairs, targets, lr: float) -> float:
        """One SGD step on mean squared error; returns the pre-step loss."""
        grads = self.params.zeros_like()
        qs = _batch_backward(self.params, self.vocab, pairs, grads, targets=targets)
        self.params.add_scaled(grads, -lr)
        self._bump()
        return float(sum((q - y) ** 2 for q, y in zip(qs, targets)) / len(pairs))

    def _bump(self) -> None:
        self._version += 1
        self._formula_vec.clear()
        self._state_vec.clear()
        self._act_vec.clear()

    def clone(self) -> "EmbeddedQ":
        return EmbeddedQ(self.params.copy(), self.vocab)
