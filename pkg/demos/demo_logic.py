#!/usr/bin/env python3
"""Walk through the belief engine: parsing, closure, and argument search.

Run: python demos/demo_logic.py
"""

from inqdial import (
    BeliefSet,
    builtin_corpus,
    canonicalize,
    closure,
    find_arguments,
    minimal_supports,
    parse_formula,
    unify,
)

print("== parsing ==")
fact = parse_formula("Email(m1, a, b) & Price(m1)")
rule = parse_formula("Email(M, X, Y) & Price(M) -> Propose(M, X, Y)")
query = parse_formula("-> ComplianceViolation(E, X, Y)")
print("fact :", fact)
print("rule :", rule, " (canonical:", canonicalize(rule), ")")
print("query:", query)

print("\n== unification ==")
theta = unify(rule.antecedent[0], fact.antecedent[0])
print(f"unify({rule.antecedent[0]}, {fact.antecedent[0]}) = "
      + "{" + ", ".join(f"{k} -> {v}" for k, v in theta.items()) + "}")

print("\n== closure of the bundled corpus ==")
corpus = builtin_corpus()
everything = corpus.all_beliefs()
for atom, derivs in sorted(closure(everything).items(), key=lambda kv: str(kv[0])):
    via = derivs[0].via
    how = "observed" if via.is_state else f"via rule: {via}"
    print(f"  {str(atom):42s} {how}")

print("\n== arguments answering the query ==")
for arg in find_arguments(everything, corpus.query.atoms):
    print("claim  :", " & ".join(map(str, arg.claim)))
    print("support:")
    for b in arg.support:
        print("   ", b)

print("\n== minimal supports are minimal ==")
deal = next(a for a in closure(everything) if a.predicate == "Deal")
for support in minimal_supports(everything, [deal]):
    print(f"marginal support for {deal}: {len(support)} beliefs")
    sub = BeliefSet.of(list(support)[:-1])
    from inqdial import derives

    print("  dropping one belief still derives it?", derives(sub, [deal]))
