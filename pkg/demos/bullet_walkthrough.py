"""Walk a term through the two-variable bullet calculus, step by step.

The term below shares the name x1 between a free occurrence and a lambda
binder, so its tags collide and the digraph picks up a cycle.

    python demos/bullet_walkthrough.py
"""

from fatinfer.bullet import analyse_bullet
from fatinfer.schemes import print_equation
from fatinfer.syntax import parse_term

TERM = r"/\*. ((/\*. x1) *) (\x1. x0 (/\*. x2))"

an = analyse_bullet(parse_term(TERM))

print("term:", TERM)
print("\ntags (breadth-first over compound subterms, then names):")
for u, v in an.tagging.items():
    print(f"  {str(v):>4}  {u}")

print("\nassociated multisystem:")
for e in an.system:
    print("  ", print_equation(e))

print(f"\nafter {an.reduction.steps} rule applications:")
for line in an.reduction.trace:
    print("   ", line)
for e in an.reduction.system:
    print("  ", print_equation(e))

print("\nminimised:")
for e in an.minimised.equations:
    print("  ", e)

print("\nedges:", ", ".join(f"({a},{b})" for a, b in an.graph.edges))
print("cycle:", " -> ".join(map(str, an.cycle)))
print("verdict:", "typable" if an.typable else f"untypable ({an.reason})")

# Renaming the binder restores the convention and the term becomes typable.
fixed = analyse_bullet(parse_term(r"/\*. ((/\*. x1) *) (\x3. x0 (/\*. x2))"))
print("\nwith the binder renamed to x3:", fixed.typing)
