import numpy as np
import pytest

from inqdial.corpus import builtin_corpus, generate_scenario
from inqdial.dialog import DialogAct, init_dialog, legal_moves
from inqdial.embedding import (
    AtomNode,
    EmbeddedQ,
    PairNode,
    Vocabulary,
    VocabularyError,
    build_tree,
    compose,
    embed_act,
    embed_atom,
    embed_formula,
    embed_state,
    grad,
    init_params,
    q_value,
)
from inqdial.formulas import parse_formula
from inqdial.inference import BeliefSet


@pytest.fixture(scope="module")
def corpus():
    return builtin_corpus()


@pytest.fixture(scope="module")
def vocab(corpus):
    return Vocabulary.from_corpus(corpus)


def fresh_params(vocab, d=5, seed=0):
    return init_params(vocab.dims(d), np.random.default_rng(seed))


class TestVocabulary:
    def test_stable_assignment(self, corpus):
        v1 = Vocabulary.from_corpus(corpus)
        v2 = Vocabulary.from_corpus(corpus)
        assert v1.predicates == v2.predicates
        assert v1.symbols == v2.symbols

    def test_covers_skolem_constants(self, vocab):
        assert any(s.startswith("c") and len(s) == 9 for s in vocab.symbols)

    def test_unknown_symbol_raises(self, vocab):
        with pytest.raises(VocabularyError):
            vocab.tree(parse_formula("Unheard(q)"))


class TestTrees:
    def test_rule_shape(self, vocab):
        tree = build_tree(parse_formula("CompanyA(a) & Price(m1) -> Deal(a, a)"), vocab)
        assert isinstance(tree, PairNode) and tree.op == "imp"
        assert isinstance(tree.left, PairNode) and tree.left.op == "and"
        assert isinstance(tree.right, AtomNode)

    def test_single_atom(self, vocab):
        tree = vocab.tree(parse_formula("CompanyA(a)"))
        assert isinstance(tree, AtomNode)

    def test_left_fold(self, vocab):
        tree = vocab.tree(parse_formula("CompanyA(a) & CompanyB(b) & Price(m1)"))
        assert isinstance(tree.left, PairNode) and isinstance(tree.right, AtomNode)
        assert isinstance(tree.left.left, AtomNode)

    def test_alpha_equivalent_formulas_share_tree(self, vocab):
        t1 = vocab.tree(parse_formula("Email(M, X, Y) -> Propose(M, X, Y)"))
        t2 = vocab.tree(parse_formula("Email(A, B, C) -> Propose(A, B, C)"))
        assert t1 == t2


class TestForward:
    def test_zero_weights_atom_is_half(self, vocab):
        p = fresh_params(vocab)
        for _, arr in p.named_arrays():
            arr[:] = 0.0
        v = embed_atom(p, vocab.tree(parse_formula("CompanyA(a)")))
        assert np.allclose(v, 0.5)

    def test_compose_zero_weights(self, vocab):
        p = fresh_params(vocab)
        p.w_and[:] = 0.0
        v = compose(p, "and", np.full(5, 0.42), np.full(5, 0.9))
        assert np.allclose(v, 0.5)

    def test_embeddings_in_unit_interval(self, vocab, corpus):
        p = fresh_params(vocab, seed=3)
        for b in corpus.all_beliefs():
            v = embed_formula(p, vocab.tree(b))
            assert np.all(v > 0) and np.all(v < 1)

    def test_determinism(self, vocab):
        p = fresh_params(vocab, seed=4)
        t = vocab.tree(parse_formula("Email(m1, a, b) & Price(m1)"))
        assert np.array_equal(embed_formula(p, t), embed_formula(p, t))

    def test_conjunction_order_sensitivity_tolerated(self, vocab):
        # ordered composition: A & B need not equal B & A, only determinism
        p = fresh_params(vocab, seed=5)
        v1 = embed_formula(p, vocab.tree(parse_formula("CompanyA(a) & CompanyB(b)")))
        v2 = embed_formula(p, vocab.tree(parse_formula("CompanyB(b) & CompanyA(a)")))
        assert v1.shape == v2.shape  # no symmetry requirement

    def test_oracle_recomputation_atom(self, vocab):
        p = fresh_params(vocab, seed=6)
        atom = parse_formula("Email(m1, a, b)").antecedent[0]
        node = vocab.tree(atom)
        z = p.w_pre[:, node.pred].copy()
        for i, s in enumerate(node.args):
            z += p.w_arg[:, i * p.dims.n_sym + s]
        direct = 1.0 / (1.0 + np.exp(-z))
        assert np.allclose(embed_atom(p, node), direct, atol=0, rtol=0)

    def test_oracle_recomputation_rule(self, vocab):
        p = fresh_params(vocab, seed=7)
        rule = parse_formula("Email(M, X, Y) & Price(M) -> Propose(M, X, Y)")
        tree = vocab.tree(rule)
        sig = lambda z: 1.0 / (1.0 + np.exp(-z))
        va = embed_atom(p, tree.left.left)
        vb = embed_atom(p, tree.left.right)
        vand = sig(p.w_and @ np.concatenate([va, vb]))
        vhead = embed_atom(p, tree.right)
        vimp = sig(p.w_imp @ np.concatenate([vand, vhead]))
        assert np.allclose(embed_formula(p, tree), vimp, atol=0, rtol=0)


class TestStateActEmbedding:
    def test_empty_groups_give_bias(self, vocab, corpus):
        p = fresh_params(vocab, seed=8)
        query = corpus.query
        sys_view, _ = init_dialog(query, BeliefSet.of(), BeliefSet.of(corpus.state_beliefs))
        view = sys_view
        d = p.dims.embed
        top_sum = sum((embed_formula(p, vocab.tree(a)) for a in view.top().atoms), np.zeros(d))
        expect = p.ds_w @ np.concatenate([np.zeros(d), np.zeros(d), top_sum]) + p.ds_b
        assert np.allclose(embed_state(p, vocab, view), expect)

    def test_singleton_cs_group_equals_formula(self, vocab, corpus):
        p = fresh_params(vocab, seed=9)
        rng = np.random.default_rng(0)
        scen = generate_scenario(corpus, "RB", rng)
        sys_view, usr_view = init_dialog(scen.query, scen.sigma_sys, scen.sigma_usr)
        v_before = embed_state(p, vocab, sys_view)
        assert v_before.shape == (p.dims.lin,)

    def test_close_act_embedding(self, vocab):
        p = fresh_params(vocab, seed=10)
        v = embed_act(p, vocab, DialogAct.closing())
        expect = p.da_w @ np.append(np.zeros(p.dims.embed), 1.0) + p.da_b
        assert np.allclose(v, expect)

    def test_open_act_is_rule_embedding(self, vocab, corpus):
        p = fresh_params(vocab, seed=11)
        rule = corpus.domain_beliefs[0]
        v = embed_act(p, vocab, DialogAct.opening(rule))
        vf = embed_formula(p, vocab.tree(rule))
        expect = p.da_w @ np.append(vf, 0.0) + p.da_b
        assert np.allclose(v, expect)

    def test_assert_includes_claim_formula(self, vocab, corpus):
        p = fresh_params(vocab, seed=12)
        sys_view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
        (answer,) = legal_moves(sys_view).asserts
        arg = answer.argument
        from inqdial.formulas import Belief

        total = sum((embed_formula(p, vocab.tree(f)) for f in arg.support), np.zeros(p.dims.embed))
        total += embed_formula(p, vocab.tree(Belief(arg.claim)))
        expect = p.da_w @ np.append(total, 0.0) + p.da_b
        assert np.allclose(embed_act(p, vocab, answer), expect)


class TestQValue:
    def test_zero_out_weights_give_zero(self, vocab, corpus):
        p = fresh_params(vocab, seed=13)
        p.out_w[:] = 0.0
        p.out_b[:] = 0.0
        sys_view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
        for act in legal_moves(sys_view).all():
            assert q_value(p, vocab, sys_view, act) == 0.0

    def test_cached_wrapper_matches_direct(self, vocab, corpus):
        qf = EmbeddedQ.create(corpus, 5, np.random.default_rng(14))
        sys_view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
        for act in legal_moves(sys_view).all():
            assert qf.value(sys_view, act) == pytest.approx(
                q_value(qf.params, qf.vocab, sys_view, act), abs=1e-12)

    def test_formula_in_two_groups_accumulates_both_upstreams(self, vocab, corpus):
        # Sum-path linearity: a fact present in own beliefs AND the CS gets
        # the summed upstream of both groups (the duplicated-occurrence rule)
        p = fresh_params(vocab, seed=15)
        fact = corpus.state_beliefs[0]
        query = corpus.query
        view_one, _ = init_dialog(query, BeliefSet.of([fact]), BeliefSet.of())
        g1 = grad(p, vocab, view_one, DialogAct.closing(), 1.0)

        from dataclasses import replace

        view_two = replace(view_one, cs=BeliefSet.of([fact]))
        g2 = grad(p, vocab, view_two, DialogAct.closing(), 1.0)
        # the only change between the two states is the extra CS occurrence,
        # so the gradient difference is exactly one more backward pass of the
        # fact's tree with the CS-group upstream
        d = p.dims.embed
        dv_ds = p.out_w[: p.dims.lin]
        dg = p.ds_w.T @ dv_ds
        tree = vocab.tree(fact)
        from inqdial.embedding import _tree_backward, _tree_forward

        extra = p.zeros_like()
        order, values = _tree_forward(p, tree)
        _tree_backward(p, extra, order, values, dg[d : 2 * d].copy())
        assert np.allclose(g2.w_pre - g1.w_pre, extra.w_pre)
        assert np.allclose(g2.w_arg - g1.w_arg, extra.w_arg)
        # equal upstreams would make the total exactly twice one occurrence
        double = p.zeros_like()
        order, values = _tree_forward(p, tree)
        _tree_backward(p, double, order, values, dg[d : 2 * d].copy())
        _tree_backward(p, double, order, values, dg[d : 2 * d].copy())
        assert np.allclose(double.w_pre, 2.0 * extra.w_pre)

    def test_upstream_scales_gradient(self, vocab, corpus):
        p = fresh_params(vocab, seed=16)
        sys_view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
        act = legal_moves(sys_view).all()[0]
        g1 = grad(p, vocab, sys_view, act, 1.0)
        g3 = grad(p, vocab, sys_view, act, 3.0)
        for (_, a), (_, b) in zip(g1.named_arrays(), g3.named_arrays()):
            assert np.allclose(3.0 * a, b)

    def test_zero_out_weights_zero_gradient_upstream_of_lin(self, vocab, corpus):
        p = fresh_params(vocab, seed=17)
        p.out_w[:] = 0.0
        sys_view, _ = init_dialog(corpus.query, corpus.all_beliefs(), BeliefSet.of())
        act = legal_moves(sys_view).all()[0]
        g = grad(p, vocab, sys_view, act, 1.0)
        assert np.all(g.w_pre == 0.0) and np.all(g.w_and == 0.0)
        assert np.all(g.ds_w == 0.0)
        assert np.any(g.out_w != 0.0)  # the output layer itself still learns


class TestInitParams:
    def test_reproducible(self, vocab):
        a = fresh_params(vocab, seed=21)
        b = fresh_params(vocab, seed=21)
        for (_, x), (_, y) in zip(a.named_arrays(), b.named_arrays()):
            assert np.array_equal(x, y)

    def test_seeds_differ(self, vocab):
        a = fresh_params(vocab, seed=21)
        b = fresh_params(vocab, seed=22)
        assert not np.array_equal(a.w_pre, b.w_pre)

    def test_glorot_bounds(self, vocab):
        p = fresh_params(vocab, seed=23)
        d = p.dims
        bound = np.sqrt(6.0 / (d.n_pred + d.embed))
        assert np.all(np.abs(p.w_pre) <= bound)
        assert np.all(p.ds_b == 0.0)
