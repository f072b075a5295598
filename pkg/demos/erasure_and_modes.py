"""How the three typability checks relate, and what relaxing constraints buys.

For Curry terms the simply-typed check on the term, the bullet check and Fat
inference always agree.  Once type abstractions and instantiations appear,
only one direction survives: a Fat-typable term erases to a simply typable
one, but a simply typable erasure says nothing about misplaced /\\ or X nodes.

    python demos/erasure_and_modes.py
"""

from fatinfer import (
    curry_typable, decide_nonredundant, erase_poly, erase_types, infer_poly, parse_term,
    print_term, typable_bullet,
)
from fatinfer.simple import Untypable


def verdicts(text: str) -> None:
    t = parse_term(text)
    c = curry_typable(erase_types(t))
    b = typable_bullet(erase_poly(t))
    try:
        ty = infer_poly(t)
    except Untypable as e:
        ty = f"untypable ({e.reason})"
    print(f"{text:28} [M]={print_term(erase_types(t)):16} simple={c!s:5}  bullet={b!s:5}  {ty}")


print("Curry terms, all three agree:")
for s in [r"\x. x", r"\x. x x", r"\f. \x. f (f x)"]:
    verdicts(s)

print("\nPolymorphic Curry terms:")
for s in ["x X", r"/\X. \x. x", r"(/\X. x) y", r"(\z. z) Y"]:
    verdicts(s)
print("The last two erase to simply typable terms, yet a generalisation cannot")
print("be applied and a lambda cannot be instantiated.")

print("\nRelaxing the non-redundancy constraints on /\\X. (x Y):")
t = parse_term(r"/\X. (x Y)")
for mode in ["all", frozenset({1}), frozenset({2}), "none"]:
    d = decide_nonredundant(t, mode)
    label = mode if isinstance(mode, str) else "only " + ",".join(map(str, sorted(mode)))
    print(f"  {label:8} -> {'yes: ' + str(d.typing) if d.verdict else 'no: ' + d.reason}")
