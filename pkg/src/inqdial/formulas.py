"""First-order formula values: terms, atoms, beliefs, queries, unification.

Beliefs come in two shapes. A *state belief* is a conjunction of ground
atoms (observed facts); a *domain belief* is an inference rule whose
atoms may contain variables. A *query* is a list of atoms to be answered
by asserting a ground instance of the whole conjunction.

Plain-text grammar (one formula per line, "#" starts a comment):

    formula     := conjunction | conjunction "->" literal | "->" conjunction
    conjunction := literal ("&" literal)*
    literal     := ["!"] Pred "(" term ("," term)* ")"

Variables are uppercase-initial identifiers, constants lowercase-initial,
predicates uppercase-initial. Lines starting with "->" are queries.

Everything here is an immutable value; printing is canonical and
`parse_formula(str(x)) == x` holds for any belief or query `x`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Union


class ParseError(ValueError):
    """Syntax or well-formedness error, with 1-based line/column."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Term:
    """A variable (uppercase-initial name) or constant (lowercase-initial)."""

    name: str

    @property
    def is_variable(self) -> bool:
        return self.name[0].isupper()

    def __hash__(self) -> int:  # str caches its own hash
        return hash(self.name)

    def __str__(self) -> str:
        return self.name


class _CachedReprs:
    """Lazy hash/print caching for frozen value types (hot in set lookups)."""

    def _key(self):
        raise NotImplementedError

    def _text(self) -> str:
        raise NotImplementedError

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        s = self.__dict__.get("_str")
        if s is None:
            s = self._text()
            object.__setattr__(self, "_str", s)
        return s


@dataclass(frozen=True)
class Atom(_CachedReprs):
    predicate: str
    args: tuple[Term, ...]
    positive: bool = True

    def is_ground(self) -> bool:
        return not any(t.is_variable for t in self.args)

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if t.is_variable:
                yield t.name

    def negated(self) -> "Atom":
        return Atom(self.predicate, self.args, not self.positive)

    @property
    def signed_predicate(self) -> str:
        return self.predicate if self.positive else "!" + self.predicate

    __hash__ = _CachedReprs.__hash__

    def _key(self):
        return (self.predicate, self.args, self.positive)

    def _text(self) -> str:
        sign = "" if self.positive else "!"
        return f"{sign}{self.predicate}({', '.join(t.name for t in self.args)})"


@dataclass(frozen=True)
class Belief(_CachedReprs):
    """State belief (consequent empty) or domain belief (one-atom consequent)."""

    antecedent: tuple[Atom, ...]
    consequent: tuple[Atom, ...] = ()

    def __post_init__(self):
        if not self.antecedent:
            raise ValueError("belief needs at least one antecedent atom")
        if len(self.consequent) > 1:
            raise ValueError("rule consequent must be a single atom")
        if not self.consequent:
            for a in self.antecedent:
                if not a.is_ground():
                    raise ValueError(f"variable in a state belief: {a}")

    @property
    def is_state(self) -> bool:
        return not self.consequent

    @property
    def is_domain(self) -> bool:
        return bool(self.consequent)

    def atoms(self) -> Iterator[Atom]:
        yield from self.antecedent
        yield from self.consequent

    def variables(self) -> Iterator[str]:
        for a in self.atoms():
            yield from a.variables()

    __hash__ = _CachedReprs.__hash__

    def _key(self):
        return (self.antecedent, self.consequent)

    def _text(self) -> str:
        body = " & ".join(str(a) for a in self.antecedent)
        if self.is_state:
            return body
        return f"{body} -> {self.consequent[0]}"


@dataclass(frozen=True)
class Query(_CachedReprs):
    """An atom list to be answered by a ground instance of the conjunction."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("query must contain at least one atom")

    def variables(self) -> Iterator[str]:
        for a in self.atoms:
            yield from a.variables()

    __hash__ = _CachedReprs.__hash__

    def _key(self):
        return self.atoms

    def _text(self) -> str:
        return "-> " + " & ".join(str(a) for a in self.atoms)


Formula = Union[Belief, Query]

# A substitution maps variable names to terms. Bindings may chain through
# variable representatives; `walk` resolves a term to its final value.
Substitution = dict[str, Term]


def walk(term: Term, subst: Substitution) -> Term:
    while term.is_variable:
        nxt = subst.get(term.name)
        if nxt is None or nxt == term:
            break
        term = nxt
    return term


def unify(a: Atom, b: Atom, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Extend `subst` so the two atoms become identical, or return None.

    Sign, predicate, and arity must match exactly. Variable-variable pairs
    are resolved by binding one to the other, so both map to a shared
    representative under the result.
    """
    if a.positive != b.positive or a.predicate != b.predicate or len(a.args) != len(b.args):
        return None
    out = dict(subst) if subst else {}
    for x, y in zip(a.args, b.args):
        x, y = walk(x, out), walk(y, out)
        if x == y:
            continue
        if x.is_variable:
            out[x.name] = y
        elif y.is_variable:
            out[y.name] = x
        else:
            return None
    return out


def apply_to_atom(atom: Atom, subst: Substitution) -> Atom:
    if not subst or atom.is_ground():
        return atom
    return Atom(atom.predicate, tuple(walk(t, subst) for t in atom.args), atom.positive)


def apply_subst(f, subst: Substitution):
    """Apply a substitution to an Atom, Belief, or Query (same kind out)."""
    if isinstance(f, Atom):
        return apply_to_atom(f, subst)
    if isinstance(f, Belief):
        return Belief(
            tuple(apply_to_atom(a, subst) for a in f.antecedent),
            tuple(apply_to_atom(a, subst) for a in f.consequent),
        )
    if isinstance(f, Query):
        return Query(tuple(apply_to_atom(a, subst) for a in f.atoms))
    raise TypeError(f"cannot substitute into {type(f).__name__}")


def _rename_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    # Simultaneous renaming (never chained): A(V2, V1) must swap cleanly.
    mapping: dict[str, Term] = {}
    out = []
    for atom in atoms:
        args = []
        for t in atom.args:
            if t.is_variable:
                if t.name not in mapping:
                    mapping[t.name] = Term(f"V{len(mapping) + 1}")
                t = mapping[t.name]
            args.append(t)
        out.append(Atom(atom.predicate, tuple(args), atom.positive))
    return tuple(out)


_canonical: dict = {}


def canonicalize(f):
    """Rename variables V1, V2, ... in order of first appearance.

    Equality of canonical forms is belief/act identity everywhere else in
    the system; alpha-equivalent formulas map to one canonical value, and
    repeated calls return one interned representative object.
    """
    cached = _canonical.get(f)
    if cached is not None:
        return cached
    if isinstance(f, Atom):
        out = _rename_atoms([f])[0]
    elif isinstance(f, Belief):
        if f.is_state:
            out = f
        else:
            renamed = _rename_atoms(f.antecedent + f.consequent)
            out = Belief(renamed[: len(f.antecedent)], renamed[len(f.antecedent):])
    elif isinstance(f, Query):
        out = Query(_rename_atoms(f.atoms))
    else:
        raise TypeError(f"cannot canonicalize {type(f).__name__}")
    if out == f:
        out = f
    else:
        out = _canonical.setdefault(out, out)
    _canonical[f] = out
    return out


# ---------------------------------------------------------------------------
# Parsing

DEFAULT_MAX_ARITY = 3

_TOKEN_RE = re.compile(r"->|[&!(),]|[A-Za-z_][A-Za-z0-9_]*")
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _tokenize(text: str, line: int) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        tokens.append((m.group(), pos + 1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, line: int, max_arity: int):
        self.tokens = _tokenize(text, line)
        self.line = line
        self.max_arity = max_arity
        self.i = 0

    def error(self, message: str) -> ParseError:
        col = self.tokens[self.i][1] if self.i < len(self.tokens) else (
            self.tokens[-1][1] + len(self.tokens[-1][0]) if self.tokens else 1
        )
        return ParseError(message, self.line, col)

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        if self.i >= len(self.tokens):
            raise self.error(f"expected {expected!r}, found end of line" if expected else "unexpected end of line")
        tok = self.tokens[self.i][0]
        if expected is not None and tok != expected:
            raise self.error(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def term(self) -> Term:
        tok = self.take()
        if not _IDENT_RE.match(tok):
            raise ParseError(f"expected a term, found {tok!r}", self.line, self.tokens[self.i - 1][1])
        return Term(tok)

    def literal(self) -> Atom:
        positive = True
        if self.peek() == "!":
            self.take()
            positive = False
        start_col = self.tokens[self.i][1] if self.i < len(self.tokens) else 1
        name = self.take()
        if not _IDENT_RE.match(name):
            raise ParseError(f"expected a predicate, found {name!r}", self.line, start_col)
        if not name[0].isupper():
            raise ParseError(f"predicate must be uppercase-initial: {name!r}", self.line, start_col)
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.take(")")
        if len(args) > self.max_arity:
            raise ParseError(
                f"arity {len(args)} of {name!r} exceeds maximum {self.max_arity}", self.line, start_col
            )
        return Atom(name, tuple(args), positive)

    def conjunction(self) -> tuple[Atom, ...]:
        atoms = [self.literal()]
        while self.peek() == "&":
            self.take()
            atoms.append(self.literal())
        return tuple(atoms)

    def formula(self) -> Formula:
        if self.peek() == "->":
            self.take()
            atoms = self.conjunction()
            self.finish()
            return Query(atoms)
        body = self.conjunction()
        if self.peek() == "->":
            self.take()
            head = self.literal()
            self.finish()
            return Belief(body, (head,))
        self.finish()
        for a in body:
            if not a.is_ground():
                raise ParseError(f"variable in a state belief: {a}", self.line, 1)
        return Belief(body)

    def finish(self):
        if self.i < len(self.tokens):
            raise self.error(f"trailing input {self.tokens[self.i][0]!r}")


def parse_formula(text: str, max_arity: int = DEFAULT_MAX_ARITY, line: int = 1) -> Formula:
    """Parse one formula line into a Belief or Query."""
    parser = _Parser(text, line, max_arity)
    if not parser.tokens:
        raise ParseError("empty formula", line, 1)
    return parser.formula()


def parse_formula_lines(text: str, max_arity: int = DEFAULT_MAX_ARITY) -> list[Formula]:
    """Parse a belief file body: one formula per line, "#" comments allowed."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            out.append(parse_formula(stripped, max_arity, lineno))
    return out


@lru_cache(maxsize=1 << 16)
def canonical_str(f) -> str:
    """Printed form of the canonicalized formula (cached; used as sort key)."""
    return str(canonicalize(f))
