"""Interactive terminal dialogs: a human plays one side against a policy."""

from __future__ import annotations

from typing import Optional, TextIO
import sys

import numpy as np

from .corpus import Corpus, generate_scenario
from .dialog import Actor, Dialog, OutcomeKind, legal_moves


def _show_state(d: Dialog, human: Actor, out: TextIO) -> None:
    view = d.view(human)
    out.write(f"\n--- turn {view.turn_index + 1} ---\n")
    out.write(f"agenda: {view.top()}\n")
    out.write(f"commitment store: {view.cs if len(view.cs) else '{}'}\n")


def _prompt_act(d: Dialog, human: Actor, inp: TextIO, out: TextIO):
    moves = legal_moves(d.view(human)).all()
    out.write("your legal moves:\n")
    for i, act in enumerate(moves, start=1):
        out.write(f"  {i}. {act}\n")
    while True:
        out.write("move number> ")
        out.flush()
        line = inp.readline()
        if not line:
            return None  # EOF ends the session gracefully
        line = line.strip()
        if line.isdigit() and 1 <= int(line) <= len(moves):
            return moves[int(line) - 1]
        out.write(f"please enter a number between 1 and {len(moves)}\n")


def play_session(
    policy,
    corpus: Corpus,
    human: Actor,
    seed: int = 0,
    mode: str = "RB",
    turn_cap: int = 40,
    inp: Optional[TextIO] = None,
    out: Optional[TextIO] = None,
    transcript_path: Optional[str] = None,
) -> Optional[OutcomeKind]:
    """Drive one dialog with a human on `human`'s side; returns the outcome."""
    inp = inp or sys.stdin
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    scen = generate_scenario(corpus, mode, rng)
    d = Dialog(scen.query, scen.sigma_sys, scen.sigma_usr, turn_cap=turn_cap)
    own = scen.sigma_sys if human is Actor.SYSTEM else scen.sigma_usr
    out.write(f"query: {scen.query}\n")
    out.write(f"you play {human}; your beliefs: {own if len(own) else '{}'}\n")
    outcome = None
    while True:
        outcome = d.outcome()
        if outcome is not None:
            break
        actor = d.to_move
        if actor is human:
            _show_state(d, human, out)
            act = _prompt_act(d, human, inp, out)
            if act is None:
                out.write("\nsession ended\n")
                _save_transcript(d, transcript_path)
                return None
        else:
            act = policy.act(d.view(actor), rng)
        event = d.step(act)
        out.write(f"[{event.turn}] {event.actor}: {event.act}\n")
    out.write(f"\ndialog over: {outcome.kind.value} after {outcome.turns_used} turn(s)\n")
    _save_transcript(d, transcript_path)
    return outcome.kind


def _save_transcript(d: Dialog, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(d.transcript() + "\n")
