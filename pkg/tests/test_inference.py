from itertools import combinations

import numpy as np

from inqdial.corpus import builtin_corpus
from inqdial.formulas import parse_formula
from inqdial.inference import (
    Argument,
    BeliefSet,
    closure,
    derives,
    find_arguments,
    is_consistent,
    minimal_supports,
)
from support import (
    answerable_targets,
    oracle_arguments,
    oracle_minimal_supports,
    random_belief_set,
    random_targets,
)


def bs(*texts):
    return BeliefSet.of(parse_formula(t) for t in texts)


def q_atoms(text):
    return parse_formula(text).atoms


class TestClosure:
    def test_no_rules(self):
        cl = closure(bs("Alpha(x)"))
        assert set(map(str, cl)) == {"Alpha(x)"}

    def test_two_step_chaining(self):
        cl = closure(bs("Alpha(x)", "Alpha(X) -> Beta(X)", "Beta(X) -> Gamma(X)"))
        assert set(map(str, cl)) == {"Alpha(x)", "Beta(x)", "Gamma(x)"}

    def test_naive_fixpoint_oracle(self):
        # an independently-coded one-atom-at-a-time fixpoint agrees exactly
        # (rules with consequent-only variables excluded so no skolems arise)
        from inqdial.formulas import apply_to_atom, unify

        rng = np.random.default_rng(31)
        for _ in range(150):
            candidates = list(random_belief_set(rng, 6, negation_rate=0.1))
            kept = [
                b for b in candidates
                if b.is_state
                or set(b.consequent[0].variables()) <= {v for a in b.antecedent for v in a.variables()}
            ]
            beliefs = BeliefSet.of(kept)
            expected = set()
            for b in beliefs.state_beliefs():
                expected.update(b.antecedent)
            changed = True
            while changed:
                changed = False
                for rule in beliefs.domain_beliefs():
                    thetas = [{}]
                    for pat in rule.antecedent:
                        thetas = [ext for th in thetas for g in sorted(expected, key=str)
                                  if (ext := unify(pat, g, th)) is not None]
                    for th in thetas:
                        head = apply_to_atom(rule.consequent[0], th)
                        if head not in expected:
                            expected.add(head)
                            changed = True
            assert set(closure(beliefs)) == expected

    def test_skolem_constant_for_consequent_only_variable(self):
        cl = closure(bs("Alpha(x)", "Alpha(X) -> Beta(E, X)"))
        derived = [a for a in cl if a.predicate == "Beta"]
        assert len(derived) == 1
        skolem = derived[0].args[0].name
        assert skolem.startswith("c") and not skolem[1].isupper()

    def test_skolem_deterministic_across_calls(self):
        first = closure(bs("Alpha(x)", "Alpha(X) -> Beta(E, X)"))
        second = closure(bs("Alpha(x)", "Gamma(y)", "Alpha(X) -> Beta(E, X)"))
        beta1 = next(a for a in first if a.predicate == "Beta")
        beta2 = next(a for a in second if a.predicate == "Beta")
        assert beta1 == beta2

    def test_monotonicity(self):
        rng = np.random.default_rng(7)
        for _ in range(120):
            big = random_belief_set(rng, 7)
            members = list(big)
            keep = [b for b in members if rng.random() < 0.6]
            small = BeliefSet.of(keep)
            assert set(closure(small)) <= set(closure(big))

    def test_fixpoint_reached(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            beliefs = random_belief_set(rng, 6)
            cl = set(closure(beliefs))
            # feeding every derived ground atom back as state beliefs adds nothing
            extra = [parse_formula(str(a)) for a in cl if a.is_ground()]
            again = BeliefSet.of(list(beliefs) + [b for b in extra])
            assert set(closure(again)) == cl

    def test_derivation_records(self):
        cl = closure(bs("Alpha(x)", "Alpha(X) -> Beta(X)"))
        beta = next(a for a in cl if a.predicate == "Beta")
        record = cl[beta][0]
        assert record.via.is_domain
        assert [str(p) for p in record.premises] == ["Alpha(x)"]

    def test_corpus_example(self):
        corpus = builtin_corpus()
        cl = closure(corpus.all_beliefs())
        assert any(a.predicate == "ComplianceViolation" for a in cl)


class TestDerivesConsistency:
    def test_derives_basics(self):
        assert derives(bs("Alpha(x)"), q_atoms("-> Alpha(x)"))
        assert not derives(bs("Alpha(x)"), q_atoms("-> Beta(x)"))
        assert derives(bs("Alpha(x)", "Alpha(X) -> Beta(X)"), q_atoms("-> Beta(x)"))

    def test_consistency(self):
        assert not is_consistent(bs("Alpha(x)", "!Alpha(x)"))
        assert not is_consistent(bs("Alpha(x)", "Alpha(X) -> !Alpha(X)"))
        assert is_consistent(builtin_corpus().all_beliefs())


class TestMinimalSupports:
    def test_direct(self):
        assert minimal_supports(bs("Alpha(x)"), q_atoms("-> Alpha(x)")) == [bs("Alpha(x)")]

    def test_minimality_excludes_bystanders(self):
        out = minimal_supports(bs("Alpha(x)", "Beta(y)"), q_atoms("-> Alpha(x)"))
        assert out == [bs("Alpha(x)")]

    def test_underivable_claim(self):
        assert minimal_supports(bs("Alpha(x)"), q_atoms("-> Beta(x)")) == []

    def test_inconsistent_minimal_set_is_dropped_not_promoted(self):
        base = bs("Alpha(x) & !Beta(x)", "Alpha(X) -> Beta(X)", "Gamma(y)")
        out = minimal_supports(base, q_atoms("-> Beta(x)"))
        # the only deriving core is inconsistent; nothing larger may stand in
        assert out == []

    def test_power_set_oracle_on_corpus_claim(self):
        corpus = builtin_corpus()
        pool = corpus.all_beliefs()
        cv = next(a for a in closure(pool) if a.predicate == "ComplianceViolation")
        got = set(minimal_supports(pool, (cv,)))
        assert got == oracle_minimal_supports(pool, (cv,))
        assert all(len(s) == 4 for s in got)  # two facts and the two chained rules

    def test_random_oracle_equivalence(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            beliefs = random_belief_set(rng, 6)
            cl = list(closure(beliefs))
            if not cl:
                continue
            claim = tuple({cl[rng.integers(len(cl))] for _ in range(rng.integers(1, 3))})
            assert set(minimal_supports(beliefs, claim)) == oracle_minimal_supports(beliefs, claim)


class TestFindArguments:
    def test_empty_base(self):
        assert find_arguments(BeliefSet.of(), q_atoms("-> Alpha(X)")) == []

    def test_deterministic_order(self):
        beliefs = bs("Alpha(a)", "Alpha(b)", "Beta(c)")
        args = find_arguments(beliefs, q_atoms("-> Alpha(X) & Beta(Y)"))
        assert args == sorted(args, key=str)
        assert find_arguments(beliefs, q_atoms("-> Alpha(X) & Beta(Y)")) == args

    def test_excluded_are_removed(self):
        beliefs = bs("Alpha(a)")
        targets = q_atoms("-> Alpha(X)")
        (arg,) = find_arguments(beliefs, targets)
        assert find_arguments(beliefs, targets, {arg}) == []

    def test_claims_follow_target_order_and_share_substitution(self):
        beliefs = bs("Alpha(a) & Beta(a)", "Beta(b)")
        args = find_arguments(beliefs, q_atoms("-> Alpha(X) & Beta(X)"))
        pair_claims = {tuple(map(str, a.claim)) for a in args if len(a.claim) == 2}
        # the shared X forces Beta(a), never Beta(b)
        assert pair_claims == {("Alpha(a)", "Beta(a)")}

    def test_supports_can_mix_several_beliefs(self):
        corpus = builtin_corpus()
        pool = corpus.all_beliefs()
        args = find_arguments(pool, corpus.query.atoms)
        assert len(args) == 1
        assert len(args[0].support) == 4
        assert args[0].claim[0].predicate == "ComplianceViolation"

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(17)
        for i in range(60):
            beliefs = random_belief_set(rng, 6)
            targets = answerable_targets(rng, beliefs, 2) if i % 2 else random_targets(rng, 2)
            got = set(find_arguments(beliefs, targets))
            assert got == oracle_arguments(beliefs, targets)

    def test_argument_invariants_hold(self):
        rng = np.random.default_rng(19)
        checked = 0
        for _ in range(40):
            beliefs = random_belief_set(rng, 6)
            targets = answerable_targets(rng, beliefs, 2)
            for arg in find_arguments(beliefs, targets):
                assert derives(arg.support, arg.claim)
                assert is_consistent(arg.support)
                if len(arg.support) <= 5:
                    for size in range(len(arg.support)):
                        for combo in combinations(list(arg.support), size):
                            assert not derives(BeliefSet.of(combo), arg.claim)
                checked += 1
        assert checked > 30
