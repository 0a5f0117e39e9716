"""The inquiry dialog state machine.

Two participants share a query, a commitment store CS, and a stack of
query stores cQS (the agenda). Acts are Assert (share an argument), Open
(push a rule's atoms as a new agenda), and Close (agree to pop the
current agenda; a pop needs two consecutive Closes). The dialog succeeds
when either side asserts a ground instance of the full query.

States are immutable; `apply_act` returns updated views plus an event.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

from .formulas import Atom, Belief, Query, canonicalize, unify
from .inference import Argument, BeliefSet, find_arguments, is_consistent


class Actor(enum.Enum):
    SYSTEM = "System"
    USER = "User"

    def other(self) -> "Actor":
        return Actor.USER if self is Actor.SYSTEM else Actor.SYSTEM

    def __str__(self) -> str:
        return self.value


class ActKind(enum.Enum):
    ASSERT = "Assert"
    OPEN = "Open"
    CLOSE = "Close"


class DialogError(ValueError):
    pass


@dataclass(frozen=True)
class DialogAct:
    kind: ActKind
    argument: Optional[Argument] = None
    agenda: Optional[Belief] = None

    def __post_init__(self):
        if self.kind is ActKind.ASSERT and self.argument is None:
            raise DialogError("Assert needs an argument")
        if self.kind is ActKind.OPEN and (self.agenda is None or not self.agenda.is_domain):
            raise DialogError("Open needs a domain belief")
        if self.kind is ActKind.CLOSE and (self.argument or self.agenda):
            raise DialogError("Close carries nothing")

    @staticmethod
    def assertion(argument: Argument) -> "DialogAct":
        return DialogAct(ActKind.ASSERT, argument=argument)

    @staticmethod
    def opening(rule: Belief) -> "DialogAct":
        return DialogAct(ActKind.OPEN, agenda=canonicalize(rule))

    @staticmethod
    def closing() -> "DialogAct":
        return DialogAct(ActKind.CLOSE)

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.kind, self.argument, self.agenda))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        s = self.__dict__.get("_str")
        if s is None:
            if self.kind is ActKind.ASSERT:
                claim = " & ".join(str(a) for a in self.argument.claim)
                s = f"Assert({self.argument.support}, {claim})"
            elif self.kind is ActKind.OPEN:
                s = f"Open({self.agenda})"
            else:
                s = "Close()"
            object.__setattr__(self, "_str", s)
        return s


CLOSE = DialogAct(ActKind.CLOSE)


@dataclass(frozen=True)
class QueryStore:
    """An agenda: the atom list participants currently argue about."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise DialogError("query store must be nonempty")

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.atoms)
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        return "[" + ", ".join(str(a) for a in self.atoms) + "]"


def agenda_store(rule: Belief) -> QueryStore:
    """The store an Open pushes: antecedent atoms then the consequent."""
    return QueryStore(rule.antecedent + rule.consequent)


@dataclass(frozen=True)
class DialogState:
    """One participant's view of the dialog."""

    own_beliefs: BeliefSet
    cs: BeliefSet
    cqs: tuple[QueryStore, ...]
    history: frozenset[DialogAct]
    query: Query
    turn_index: int
    act_count: int
    pending_close: bool
    actor_to_move: Actor
    success_turn: Optional[int] = None

    def top(self) -> QueryStore:
        if not self.cqs:
            raise DialogError("query store stack is empty")
        return self.cqs[-1]

    def pool(self) -> BeliefSet:
        return self.own_beliefs.union(self.cs)


@dataclass(frozen=True)
class LegalMoves:
    asserts: tuple[DialogAct, ...]
    opens: tuple[DialogAct, ...]
    closes: tuple[DialogAct, ...]

    def all(self) -> tuple[DialogAct, ...]:
        # Concatenation is already canonical print order: "Assert" < "Close" < "Open".
        return self.asserts + self.closes + self.opens


class OutcomeKind(enum.Enum):
    SUCCESS = "Success"
    EXHAUSTED = "Exhausted"
    TURN_CAP = "TurnCapReached"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    turns_used: int


@dataclass(frozen=True)
class Event:
    turn: int
    actor: Actor
    act: DialogAct

    def line(self) -> str:
        return f"{self.turn}\t{self.actor}\t{self.act}"


DEFAULT_TURN_CAP = 40


def init_dialog(
    query: Query,
    sigma_sys: BeliefSet,
    sigma_usr: BeliefSet,
    opener: Actor = Actor.SYSTEM,
) -> tuple[DialogState, DialogState]:
    """Fresh paired views: shared empty CS and the query as the only agenda."""
    for name, bs in (("system", sigma_sys), ("user", sigma_usr)):
        if not is_consistent(bs):
            raise DialogError(f"inconsistent {name} belief base")
    query = canonicalize(query)
    shared = dict(
        cs=BeliefSet.of(),
        cqs=(QueryStore(query.atoms),),
        history=frozenset(),
        query=query,
        turn_index=0,
        act_count=0,
        pending_close=False,
        actor_to_move=opener,
    )
    return (
        DialogState(own_beliefs=sigma_sys, **shared),
        DialogState(own_beliefs=sigma_usr, **shared),
    )


@lru_cache(maxsize=1 << 17)
def _legal_moves(own: BeliefSet, cs: BeliefSet, top: QueryStore, history: frozenset) -> LegalMoves:
    targets = top.atoms
    asserted = {act.argument for act in history if act.kind is ActKind.ASSERT}
    asserts = tuple(
        DialogAct.assertion(arg) for arg in find_arguments(own.union(cs), targets, asserted)
    )
    opens = []
    for rule in own.domain_beliefs():
        act = DialogAct.opening(rule)
        if act in history:
            continue
        head = act.agenda.consequent[0]
        if any(unify(head, t) is not None for t in targets):
            opens.append(act)
    return LegalMoves(asserts, tuple(sorted(opens, key=str)), (CLOSE,))


def legal_moves(view: DialogState) -> LegalMoves:
    """Acts valid for this view: see module docstring for the conditions.

    Asserts draw supports from own beliefs plus CS; Opens are limited to
    the participant's own domain beliefs whose consequent unifies with an
    agenda atom. Assert/Open acts already performed by either side are
    excluded; Close is always available.
    """
    return _legal_moves(view.own_beliefs, view.cs, view.top(), view.history)


def check_success(act: DialogAct, query: Query) -> bool:
    """True iff the act asserts a ground instance of the full query."""
    if act.kind is not ActKind.ASSERT:
        return False
    claim = act.argument.claim
    if len(claim) != len(query.atoms):
        return False
    theta = {}
    for pattern, ground in zip(query.atoms, claim):
        theta = unify(pattern, ground, theta)
        if theta is None:
            return False
    return True


def _advance(view: DialogState, act: DialogAct, actor: Actor) -> DialogState:
    cs, cqs, pending = view.cs, view.cqs, view.pending_close
    history = view.history
    if act.kind is ActKind.ASSERT:
        cs = cs.union(act.argument.support)
        pending = False
        history = history | {act}
    elif act.kind is ActKind.OPEN:
        cqs = cqs + (agenda_store(act.agenda),)
        pending = False
        history = history | {act}
    else:
        if pending:
            cqs = cqs[:-1]
            pending = False
        else:
            pending = True
    count = view.act_count + 1
    success = view.success_turn
    if success is None and check_success(act, view.query):
        success = (count + 1) // 2
    return replace(
        view,
        cs=cs,
        cqs=cqs,
        history=history,
        pending_close=pending,
        act_count=count,
        turn_index=count // 2,
        actor_to_move=actor.other(),
        success_turn=success,
    )


def apply_act(
    sys_view: DialogState,
    usr_view: DialogState,
    act: DialogAct,
    actor: Actor,
) -> tuple[DialogState, DialogState, Event]:
    """Apply one act to both views; rejects illegal acts and wrong movers."""
    mover = sys_view if actor is Actor.SYSTEM else usr_view
    if mover.actor_to_move is not actor:
        raise DialogError(f"it is not {actor}'s move")
    if not mover.cqs:
        raise DialogError("dialog is already closed")
    if act not in legal_moves(mover).all():
        raise DialogError(f"illegal act for {actor}: {act}")
    new_sys = _advance(sys_view, act, actor)
    new_usr = _advance(usr_view, act, actor)
    return new_sys, new_usr, Event((new_sys.act_count + 1) // 2, actor, act)


def is_terminal(view: DialogState, turn_cap: int = DEFAULT_TURN_CAP) -> Optional[Outcome]:
    """Outcome if the dialog has ended from this view's perspective."""
    if view.success_turn is not None:
        return Outcome(OutcomeKind.SUCCESS, view.success_turn)
    if not view.cqs:
        return Outcome(OutcomeKind.EXHAUSTED, (view.act_count + 1) // 2)
    if view.turn_index >= turn_cap:
        return Outcome(OutcomeKind.TURN_CAP, turn_cap)
    return None


class Dialog:
    """Convenience wrapper driving a paired-view dialog to completion."""

    def __init__(
        self,
        query: Query,
        sigma_sys: BeliefSet,
        sigma_usr: BeliefSet,
        opener: Actor = Actor.SYSTEM,
        turn_cap: int = DEFAULT_TURN_CAP,
    ):
        self.sys_view, self.usr_view = init_dialog(query, sigma_sys, sigma_usr, opener)
        self.turn_cap = turn_cap
        self.events: list[Event] = []

    def view(self, actor: Actor) -> DialogState:
        return self.sys_view if actor is Actor.SYSTEM else self.usr_view

    @property
    def to_move(self) -> Actor:
        return self.sys_view.actor_to_move

    def legal(self, actor: Optional[Actor] = None) -> LegalMoves:
        return legal_moves(self.view(actor or self.to_move))

    def step(self, act: DialogAct) -> Event:
        actor = self.to_move
        self.sys_view, self.usr_view, event = apply_act(self.sys_view, self.usr_view, act, actor)
        self.events.append(event)
        return event

    def outcome(self) -> Optional[Outcome]:
        return is_terminal(self.sys_view, self.turn_cap)

    def transcript(self) -> str:
        return "\n".join(e.line() for e in self.events)
