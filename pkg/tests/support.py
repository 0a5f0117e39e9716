"""Shared test helpers: random formula generators and brute-force oracles.

The oracles deliberately take the dumb route (power-set enumeration and
direct condition checks) so they stay independent of the implementation
paths they are used to verify.
"""

from __future__ import annotations

from itertools import combinations

from inqdial.dialog import Actor, DialogAct, DialogState, apply_act, init_dialog, is_terminal
from inqdial.formulas import Atom, Belief, Query, Term, canonicalize, unify
from inqdial.inference import Argument, BeliefSet, closure, derives, is_consistent
from inqdial.simulator import random_act

PREDICATES = ("Alpha", "Beta", "Gamma", "Delta")
CONSTANTS = ("a", "b", "c", "d")
VARIABLES = ("X", "Y", "Z")


def random_atom(rng, ground: bool, max_arity: int = 3, negation_rate: float = 0.0,
                predicates=PREDICATES) -> Atom:
    pred = predicates[rng.integers(len(predicates))]
    arity = int(rng.integers(1, max_arity + 1))
    args = []
    for _ in range(arity):
        pool = CONSTANTS if ground or rng.random() < 0.5 else VARIABLES
        args.append(Term(pool[rng.integers(len(pool))]))
    positive = rng.random() >= negation_rate
    return Atom(pred, tuple(args), positive)


def random_state_belief(rng, negation_rate=0.1) -> Belief:
    n = int(rng.integers(1, 3))
    return Belief(tuple(random_atom(rng, True, negation_rate=negation_rate) for _ in range(n)))


def random_rule(rng, negation_rate=0.1) -> Belief:
    n = int(rng.integers(1, 3))
    body = tuple(random_atom(rng, False, negation_rate=negation_rate) for _ in range(n))
    return Belief(body, (random_atom(rng, False, negation_rate=negation_rate),))


def random_belief_set(rng, max_beliefs: int = 8, negation_rate: float = 0.1) -> BeliefSet:
    n = int(rng.integers(1, max_beliefs + 1))
    beliefs = []
    for _ in range(n):
        if rng.random() < 0.5:
            beliefs.append(random_state_belief(rng, negation_rate))
        else:
            beliefs.append(random_rule(rng, negation_rate))
    return BeliefSet.of(beliefs)


def random_targets(rng, max_atoms: int = 3) -> tuple[Atom, ...]:
    n = int(rng.integers(1, max_atoms + 1))
    return tuple(random_atom(rng, False) for _ in range(n))


def answerable_targets(rng, beliefs: BeliefSet, max_atoms: int = 3) -> tuple[Atom, ...]:
    """Targets built by lifting closure atoms (some constants -> variables),
    so argument enumeration has something to find."""
    atoms = sorted(closure(beliefs), key=str)
    if not atoms:
        return random_targets(rng, max_atoms)
    n = int(rng.integers(1, max_atoms + 1))
    out = []
    for _ in range(n):
        if rng.random() < 0.25:
            out.append(random_atom(rng, False))
            continue
        base = atoms[rng.integers(len(atoms))]
        args = tuple(
            Term(VARIABLES[rng.integers(len(VARIABLES))]) if rng.random() < 0.5 else t
            for t in base.args
        )
        out.append(Atom(base.predicate, args, base.positive))
    return tuple(out)


# ---------------------------------------------------------------------------
# Brute-force oracles


def oracle_minimal_supports(bs: BeliefSet, claim) -> set[BeliefSet]:
    """Power-set filter: deriving, consistent, and no deriving proper subset."""
    claim = tuple(claim)
    members = list(bs)
    deriving = []
    for size in range(len(members) + 1):
        for combo in combinations(members, size):
            if derives(BeliefSet.of(combo), claim):
                deriving.append(frozenset(combo))
    out = set()
    for chosen in deriving:
        if any(other < chosen for other in deriving):
            continue
        subset = BeliefSet.of(chosen)
        if is_consistent(subset):
            out.add(subset)
    return out


def oracle_claims(bs: BeliefSet, targets) -> set[tuple[Atom, ...]]:
    """All ground conjunctions instantiating distinct target atoms under
    one substitution, enumerated directly from the closure."""
    atoms = list(closure(bs))
    targets = tuple(targets)
    found = set()

    def rec(start: int, theta, prefix: tuple[Atom, ...]):
        if prefix:
            found.add(prefix)
        for pos in range(start, len(targets)):
            for ground in atoms:
                ext = unify(targets[pos], ground, theta)
                if ext is not None:
                    rec(pos + 1, ext, prefix + (ground,))

    rec(0, {}, ())
    return found


def oracle_arguments(bs: BeliefSet, targets) -> set[Argument]:
    out = set()
    for claim in oracle_claims(bs, targets):
        for support in oracle_minimal_supports(bs, claim):
            out.add(Argument(support, claim))
    return out


def oracle_legal_moves(view: DialogState) -> tuple[set, set, set]:
    """Direct transcription of the legality conditions, minus history."""
    targets = view.top().atoms
    pool = view.own_beliefs.union(view.cs)
    asserts = {
        DialogAct.assertion(arg)
        for arg in oracle_arguments(pool, targets)
    } - view.history
    opens = set()
    for rule in view.own_beliefs:
        if not rule.is_domain:
            continue
        act = DialogAct.opening(rule)
        if act in view.history:
            continue
        head = canonicalize(rule).consequent[0]
        if any(unify(head, t) is not None for t in targets):
            opens.add(act)
    return asserts, opens, {DialogAct.closing()}


# ---------------------------------------------------------------------------
# Random reachable dialog states


def random_reachable_states(rng, n_states: int, max_beliefs: int = 6, steps: int = 6):
    """Snapshots from random-policy play over small random corpora."""
    states = []
    while len(states) < n_states:
        combined = random_belief_set(rng, max_beliefs, negation_rate=0.05)
        members = list(combined)
        sys_side = [b for b in members if rng.random() < 0.5]
        usr_side = [b for b in members if b not in sys_side]
        query = Query(random_targets(rng, 2))
        sigma_sys, sigma_usr = BeliefSet.of(sys_side), BeliefSet.of(usr_side)
        if not (is_consistent(sigma_sys) and is_consistent(sigma_usr)):
            continue
        sys_view, usr_view = init_dialog(query, sigma_sys, sigma_usr, Actor.SYSTEM)
        states.append(sys_view)
        for _ in range(int(rng.integers(1, steps + 1))):
            if is_terminal(sys_view, 20):
                break
            actor = sys_view.actor_to_move
            view = sys_view if actor is Actor.SYSTEM else usr_view
            act = random_act(view, rng)
            sys_view, usr_view, _ = apply_act(sys_view, usr_view, act, actor)
            if sys_view.cqs:
                states.append(sys_view if rng.random() < 0.7 else usr_view)
    return states[:n_states]
