"""Non-redundant typings: three terms that have one and two that do not.

A typing is non-redundant when every instantiation N X acts on a type
forall Y. B with Y free in B, and every generalisation /\\X. N wraps a body
whose type mentions X.

    python demos/nonredundant_tour.py
"""

from fatinfer import decide_nonredundant, parse_term
from fatinfer.nonredundant import associated_multisystem_nr, constraints, var_tag
from fatinfer.schemes import print_equation


def show(text: str) -> None:
    t = parse_term(text)
    print("=" * 72)
    print(text)
    for o in var_tag(t).occurrences:
        print(f"  occurrence {o.id}: {o.fresh} tags {o.kind} node {o.node}")
    sys = associated_multisystem_nr(t)
    for e in sys.equations:
        print("   ", print_equation(e))
    print("  constraints:", ", ".join(map(str, constraints(sys))) or "none")
    d = decide_nonredundant(t)
    if d.verdict:
        print("  yes:", d.typing)
        if d.typing.binders:
            print("  binders:", ", ".join(f"{x}: {a}" for x, a in d.typing.binders.items()))
        print(f"  group sizes used {d.bound_used}, bound m*n = {d.bound}")
    else:
        print("  no:", d.reason)
        tail = [ln for ln in d.trace if ln.startswith("saturate")][-3:]
        for ln in tail:
            print("   ", ln)


# Two instances of x at different variables: x must be forall X1. X1.
show("(y (x X)) (x Y)")

# Nested instances: the outer quantifier must survive the inner one.
show("(x X) Y")

# The binder x picks up the generalised variable itself.
show(r"(/\X. \x. x) Y")

# X is generalised over a body whose only free assumption cannot mention X.
show(r"/\X. (x Y)")

# f maps both x X and x Y to one type, which forces X = Y.
show("h (f (x X)) (f (x Y))")
