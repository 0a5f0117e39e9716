"""Belief corpora and scenario generation.

A corpus is the universe of beliefs for one experiment plus the shared
query. Scenarios partition the corpus between the two participants:
state beliefs always split at random, domain beliefs go to one side or
split depending on the mode (RB random, UB all-user, SB all-system).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from .formulas import Belief, Query, canonicalize, parse_formula_lines
from .inference import BeliefSet, closure, is_consistent, unify

SPLIT_MODES = ("RB", "UB", "SB")


@dataclass(frozen=True)
class Corpus:
    domain_beliefs: tuple[Belief, ...]
    state_beliefs: tuple[Belief, ...]
    query: Query

    def all_beliefs(self) -> BeliefSet:
        return BeliefSet.of(self.domain_beliefs + self.state_beliefs)

    def validate(self) -> None:
        """Combined set must be consistent and able to answer the query."""
        combined = self.all_beliefs()
        if not is_consistent(combined):
            raise ValueError("corpus belief set is inconsistent")
        if not query_answerable(combined, self.query):
            raise ValueError("query is not answerable from the combined corpus")


def query_answerable(bs: BeliefSet, query: Query) -> bool:
    """Does some ground instance of the full query conjunction hold in bs?"""
    cl = closure(bs)
    partial = [{}]
    for pattern in query.atoms:
        nxt = []
        for theta in partial:
            for atom in cl:
                extended = unify(pattern, atom, theta)
                if extended is not None:
                    nxt.append(extended)
        partial = nxt
        if not partial:
            return False
    return True


def load_corpus_text(text: str, max_arity: int = 3) -> Corpus:
    formulas = parse_formula_lines(text, max_arity)
    queries = [f for f in formulas if isinstance(f, Query)]
    beliefs = [canonicalize(f) for f in formulas if isinstance(f, Belief)]
    if len(queries) != 1:
        raise ValueError(f"corpus must declare exactly one query, found {len(queries)}")
    corpus = Corpus(
        domain_beliefs=tuple(b for b in beliefs if b.is_domain),
        state_beliefs=tuple(b for b in beliefs if b.is_state),
        query=canonicalize(queries[0]),
    )
    corpus.validate()
    return corpus


def load_corpus(path: str, max_arity: int = 3) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return load_corpus_text(fh.read(), max_arity)


def builtin_corpus(name: str = "compliance") -> Corpus:
    """A corpus shipped with the package: "compliance" or "email_minimal"."""
    text = resources.files("inqdial.data").joinpath(f"{name}.beliefs").read_text("utf-8")
    return load_corpus_text(text)


def resolve_corpus(spec: Optional[str]) -> Corpus:
    """None or a builtin name loads package data; anything else is a path."""
    if spec is None or spec == "default":
        return builtin_corpus()
    try:
        return builtin_corpus(spec)
    except FileNotFoundError:
        return load_corpus(spec)


@dataclass(frozen=True)
class Scenario:
    sigma_sys: BeliefSet
    sigma_usr: BeliefSet
    query: Query
    split_mode: str
    seed: Optional[int] = None


def generate_scenario(corpus: Corpus, mode: str, rng: np.random.Generator) -> Scenario:
    """Partition the corpus between system and user for one dialog."""
    if mode not in SPLIT_MODES:
        raise ValueError(f"unknown split mode {mode!r}")
    sys_side: list[Belief] = []
    usr_side: list[Belief] = []
    for belief in corpus.state_beliefs:
        (sys_side if rng.integers(2) == 0 else usr_side).append(belief)
    for belief in corpus.domain_beliefs:
        if mode == "UB":
            usr_side.append(belief)
        elif mode == "SB":
            sys_side.append(belief)
        else:
            (sys_side if rng.integers(2) == 0 else usr_side).append(belief)
    return Scenario(
        sigma_sys=BeliefSet.of(sys_side),
        sigma_usr=BeliefSet.of(usr_side),
        query=corpus.query,
        split_mode=mode,
    )
