#!/usr/bin/env python3
"""Replay the classic three-belief compliance dialog step by step.

The system holds the violation rule and one fact, the user holds the
other fact. The trace shows the agenda stack and commitment store after
every act: Open pushes the rule's five atoms, the user shares their
evidence, and the system's final Assert answers the query.

Run: python demos/demo_dialog.py
"""

from inqdial import (
    BeliefSet,
    Dialog,
    DialogAct,
    builtin_corpus,
    check_success,
)

corpus = builtin_corpus("email_minimal")
rule = corpus.domain_beliefs[0]
sys_base = BeliefSet.of([rule] + [b for b in corpus.state_beliefs if "CompanyB" in str(b)])
usr_base = BeliefSet.of([b for b in corpus.state_beliefs if "CompanyA" in str(b)])

print("query           :", corpus.query)
print("system believes :", sys_base)
print("user believes   :", usr_base)

d = Dialog(corpus.query, sys_base, usr_base)


def show(note):
    view = d.sys_view
    print(f"\n  -> {note}")
    print(f"     agenda stack top: {view.top() if view.cqs else '(empty)'}")
    print(f"     commitment store: {view.cs if len(view.cs) else '{}'}")


print("\n[1] System opens the violation rule to set the agenda")
d.step(DialogAct.opening(rule))
show("all five rule atoms are now under discussion")

print("[2] User asserts the proposal evidence")
act = next(a for a in d.legal().asserts if len(a.argument.claim) == 2)
print("    ", act)
d.step(act)
show("the user's belief entered the shared store")

print("[3] System asserts the violation, combining both sides' knowledge")
answer = next(a for a in d.legal().asserts if check_success(a, corpus.query))
print("    ", answer)
d.step(answer)
show("the claim instantiates the query, so the dialog succeeds")

out = d.outcome()
print(f"\noutcome: {out.kind.value} in {out.turns_used} turns")
print("\nevent log:")
print(d.transcript())
