"""Forward-chaining derivation and argument search over belief sets.

`closure` computes the ground atoms derivable from a belief set together
with derivation records; `find_arguments` enumerates every claim that
addresses an agenda (a list of possibly-variable atoms) backed by a
minimal, consistent support set.

All functions are pure over immutable inputs and memoize internally, so
repeated queries on the same belief set are cheap.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Optional

from .formulas import Atom, Belief, Substitution, Term, apply_to_atom, canonicalize, unify, walk


@dataclass(frozen=True)
class BeliefSet:
    """A duplicate-free set of canonical beliefs, iterated in print order."""

    beliefs: tuple[Belief, ...]

    @staticmethod
    def of(items: Iterable[Belief] = ()) -> "BeliefSet":
        canon = {canonicalize(b) for b in items}
        return BeliefSet(tuple(sorted(canon, key=str)))

    def union(self, other: Iterable[Belief]) -> "BeliefSet":
        # Members of a BeliefSet are already canonical; skip re-canonicalizing.
        if isinstance(other, BeliefSet):
            if not other.beliefs:
                return self
            if not self.beliefs:
                return other
            merged = set(self.beliefs)
            merged.update(other.beliefs)
            if len(merged) == len(self.beliefs):
                return self
            return BeliefSet(tuple(sorted(merged, key=str)))
        return BeliefSet.of(self.beliefs + tuple(other))

    def domain_beliefs(self) -> tuple[Belief, ...]:
        return tuple(b for b in self.beliefs if b.is_domain)

    def state_beliefs(self) -> tuple[Belief, ...]:
        return tuple(b for b in self.beliefs if b.is_state)

    def __contains__(self, b: Belief) -> bool:
        return b in self.beliefs

    def __iter__(self) -> Iterator[Belief]:
        return iter(self.beliefs)

    def __len__(self) -> int:
        return len(self.beliefs)

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.beliefs)
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        s = self.__dict__.get("_str")
        if s is None:
            s = "{" + "; ".join(str(b) for b in self.beliefs) + "}"
            object.__setattr__(self, "_str", s)
        return s


EMPTY_BELIEFS = BeliefSet(())


@dataclass(frozen=True)
class Derivation:
    """How an atom got into a closure: via a state belief or a fired rule."""

    via: Belief
    premises: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class Argument:
    """A ground claim together with a minimal consistent support set."""

    support: BeliefSet
    claim: tuple[Atom, ...]

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.support, self.claim))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        s = self.__dict__.get("_str")
        if s is None:
            s = f"({self.support}, {' & '.join(str(a) for a in self.claim)})"
            object.__setattr__(self, "_str", s)
        return s


def _skolem(rule: Belief, bindings: Substitution, var: str) -> Term:
    """Deterministic fresh constant for a consequent-only rule variable.

    The name depends only on the rule, the firing substitution, and the
    variable, never on discovery order, so closures of nested belief sets
    agree on skolem identities (closure monotonicity depends on this).
    """
    ground = ";".join(f"{v}={walk(Term(v), bindings).name}" for v in sorted(bindings))
    digest = hashlib.sha1(f"{rule}|{var}|{ground}".encode()).hexdigest()[:8]
    return Term("c" + digest)


def _match_antecedent(
    atoms: tuple[Atom, ...],
    index: dict[tuple[bool, str, int], list[Atom]],
    subst: Substitution,
    acc: list[Substitution],
) -> None:
    if not atoms:
        acc.append(subst)
        return
    first, rest = atoms[0], atoms[1:]
    for candidate in index.get((first.positive, first.predicate, len(first.args)), ()):
        extended = unify(first, candidate, subst)
        if extended is not None:
            _match_antecedent(rest, index, extended, acc)


@lru_cache(maxsize=1 << 16)
def _closure(bs: BeliefSet) -> dict[Atom, tuple[Derivation, ...]]:
    derived: dict[Atom, list[Derivation]] = {}
    index: dict[tuple[bool, str, int], list[Atom]] = {}

    def add(atom: Atom, deriv: Derivation) -> bool:
        if atom in derived:
            if deriv not in derived[atom]:
                derived[atom].append(deriv)
            return False
        derived[atom] = [deriv]
        index.setdefault((atom.positive, atom.predicate, len(atom.args)), []).append(atom)
        return True

    for b in bs.state_beliefs():
        for atom in b.antecedent:
            add(atom, Derivation(b))

    rules = bs.domain_beliefs()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            matches: list[Substitution] = []
            _match_antecedent(rule.antecedent, index, {}, matches)
            head = rule.consequent[0]
            for theta in matches:
                full = dict(theta)
                for name in head.variables():
                    if walk(Term(name), full).is_variable:
                        full[name] = _skolem(rule, theta, name)
                atom = apply_to_atom(head, full)
                premises = tuple(apply_to_atom(a, theta) for a in rule.antecedent)
                if add(atom, Derivation(rule, premises)):
                    changed = True

    return {a: tuple(ds) for a, ds in derived.items()}


def closure(bs: BeliefSet) -> Mapping[Atom, tuple[Derivation, ...]]:
    """Ground atoms derivable from `bs`, each with its derivation records.

    The result is the least fixpoint: atoms of state beliefs, plus every
    ground rule consequent obtainable by unifying the rule's antecedent
    with already-derived atoms under one consistent substitution.
    Consequent-only variables are skolemized. Treat the mapping as
    read-only; it is shared through a cache.
    """
    return _closure(bs)


def derives(bs: BeliefSet, claim: Iterable[Atom]) -> bool:
    """True iff every (ground) claim atom is in closure(bs)."""
    cl = _closure(bs)
    return all(a in cl for a in claim)


def is_consistent(bs: BeliefSet) -> bool:
    """True iff the closure contains no atom together with its negation."""
    cl = _closure(bs)
    for atom in cl:
        if atom.positive and atom.negated() in cl:
            return False
    return True


def _relevant_beliefs(bs: BeliefSet, claim: tuple[Atom, ...]) -> list[Belief]:
    """Beliefs reachable backward from the claim through derivation records."""
    cl = _closure(bs)
    seen_atoms: set[Atom] = set()
    beliefs: set[Belief] = set()
    frontier = list(claim)
    while frontier:
        atom = frontier.pop()
        if atom in seen_atoms:
            continue
        seen_atoms.add(atom)
        for deriv in cl.get(atom, ()):
            beliefs.add(deriv.via)
            frontier.extend(deriv.premises)
    return sorted(beliefs, key=str)


@lru_cache(maxsize=1 << 15)
def _supports_from(candidates: tuple[Belief, ...], claim: tuple[Atom, ...]) -> tuple[BeliefSet, ...]:
    minimal: list[frozenset[Belief]] = []
    supports: list[BeliefSet] = []
    for size in range(1, len(candidates) + 1):
        for combo in combinations(candidates, size):
            chosen = frozenset(combo)
            if any(found <= chosen for found in minimal):
                continue
            subset = BeliefSet(combo)
            if derives(subset, claim):
                minimal.append(chosen)
                if is_consistent(subset):
                    supports.append(subset)
    return tuple(sorted(supports, key=str))


def _minimal_supports(bs: BeliefSet, claim: tuple[Atom, ...]) -> tuple[BeliefSet, ...]:
    if not derives(bs, claim):
        return ()
    # Any support lies inside the backward-reachable beliefs, so belief
    # sets sharing that slice share the enumeration (and its cache entry).
    return _supports_from(tuple(_relevant_beliefs(bs, claim)), claim)


def minimal_supports(bs: BeliefSet, claim: Iterable[Atom]) -> list[BeliefSet]:
    """All subset-minimal consistent sub-belief-sets deriving the claim.

    Minimality is with respect to derivation: a deriving subset whose
    proper subset also derives the claim is never returned, and an
    inconsistent minimal deriving subset disqualifies itself without
    promoting any superset.
    """
    return list(_minimal_supports(bs, tuple(claim)))


def _claim_candidates(
    targets: tuple[Atom, ...], index: dict[tuple[bool, str, int], list[Atom]]
) -> list[tuple[Atom, ...]]:
    """Ground conjunctions whose atoms instantiate a nonempty subset of
    the targets under one shared substitution, in target order."""
    claims: list[tuple[Atom, ...]] = []
    seen: set[tuple[Atom, ...]] = set()
    positions = range(len(targets))
    for size in range(1, len(targets) + 1):
        for chosen in combinations(positions, size):
            partial: list[tuple[tuple[Atom, ...], Substitution]] = [((), {})]
            for pos in chosen:
                target = targets[pos]
                nxt = []
                for prefix, theta in partial:
                    for ground in index.get((target.positive, target.predicate, len(target.args)), ()):
                        extended = unify(target, ground, theta)
                        if extended is not None:
                            nxt.append((prefix + (ground,), extended))
                partial = nxt
                if not partial:
                    break
            for prefix, _ in partial:
                if prefix not in seen:
                    seen.add(prefix)
                    claims.append(prefix)
    return claims


@lru_cache(maxsize=1 << 15)
def _all_arguments(bs: BeliefSet, targets: tuple[Atom, ...]) -> tuple[Argument, ...]:
    cl = _closure(bs)
    index: dict[tuple[bool, str, int], list[Atom]] = {}
    for atom in cl:
        index.setdefault((atom.positive, atom.predicate, len(atom.args)), []).append(atom)
    out = []
    for claim in _claim_candidates(targets, index):
        for support in _minimal_supports(bs, claim):
            out.append(Argument(support, claim))
    return tuple(sorted(set(out), key=str))


def find_arguments(
    bs: BeliefSet, targets: Iterable[Atom], excluded: Optional[Iterable[Argument]] = None
) -> list[Argument]:
    """Every argument addressing the agenda `targets` from `bs`.

    A claim is a ground conjunction whose atoms instantiate distinct
    agenda atoms under one shared substitution; each support is minimal
    and consistent. Results are in lexicographic print order, minus
    anything in `excluded`.
    """
    args = _all_arguments(bs, tuple(targets))
    if excluded is None:
        return list(args)
    skip = set(excluded)
    return [a for a in args if a not in skip]
