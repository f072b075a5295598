"""Worked examples for the non-redundant machinery.

Tag numbers come from breadth-first tagging, so they can differ from the
numbering used in hand-worked examples; ``ren`` maps ours onto theirs.
"""

import re

import pytest

from fatinfer.checker import check_nonredundant, check_typing
from fatinfer.nonredundant import (
    associated_multisystem_nr, constraints, decide_nonredundant, essential_places, occ_saturate,
    reduce_nr, terminals, var_tag,
)
from fatinfer.nonredundant.search import (
    Witness, _without_place, build_instance, concrete_values, evaluate_scheme, occurs_in,
)
from fatinfer.schemes import SchemeVar, print_equation
from fatinfer.syntax import alpha_eq, parse_term, parse_type, print_type

from corpus import corpus


def ren(text: str, mapping: dict[int, int]) -> str:
    return re.sub(r"α(\d+)", lambda m: f"α{mapping.get(int(m.group(1)), int(m.group(1)))}", text)


def nr(text):
    return associated_multisystem_nr(parse_term(text))


# ---- variable tagging and the multisystem

def test_var_tag_examples():
    vt = var_tag(parse_term("(y (x X)) (x Y)"))
    assert [(o.fresh, str(o.node)) for o in vt.occurrences] == [("X1", "x X"), ("X2", "x Y")]
    assert var_tag(parse_term(r"\x. x")).occurrences == []
    vt = var_tag(parse_term("(x X) Y"))
    assert [(o.fresh, str(o.node)) for o in vt.occurrences] == [("X1", "x X"), ("X2", "x X Y")]


def test_fresh_names_avoid_term_variables():
    vt = var_tag(parse_term("(x X1) X2"))
    assert {o.fresh for o in vt.occurrences}.isdisjoint({"X1", "X2"})


def test_multisystem_two_instances():
    # x is α5 here and α1 in the hand-worked version
    eqs = [ren(print_equation(e), {5: 1, 1: 5}) for e in nr("(y (x X)) (x Y)").equations]
    assert "α3 = α1^X1[X/X1]" in eqs
    assert "α2 = α1^X2[Y/X2]" in eqs
    assert "α1 = ∀X1. α1^X1" in eqs and "α1 = ∀X2. α1^X2" in eqs
    assert len(eqs) == 6


def test_multisystem_nested_instances():
    eqs = [print_equation(e) for e in nr("(x X) Y").equations]
    # (x X) is α1 and x is α2, so the outer instance reads α0 = α1^X2[Y/X2]
    assert eqs == ["α1 = α2^X1[X/X1]", "α2 = ∀X1. α2^X1", "α0 = α1^X2[Y/X2]", "α1 = ∀X2. α1^X2"]
    assert [print_equation(e) for e in nr(r"\x. x").equations] == ["α0 = α1 → α1"]


# ---- constraints

def test_constraints_gen():
    sys = nr(r"/\X. (x Y)")
    # body x Y is α1 and x is α2: Occ(X, body), not Occ(X, x), Occ(X1, x^X1)
    assert sorted(map(str, constraints(sys))) == sorted(["Occ(X, α1)", "¬Occ(X, α2)", "Occ(X1, α2^X1)"])
    assert list(map(str, constraints(sys, "none"))) == ["¬Occ(X, α2)"]


def test_constraints_inst():
    assert list(map(str, constraints(nr("(y (x X)) (x Y)")))) == ["Occ(X1, α5^X1)", "Occ(X2, α5^X2)"]


def test_partial_constraints():
    sys = nr("(y (x X)) (x Y)")
    assert list(map(str, constraints(sys, frozenset({2})))) == ["Occ(X2, α5^X2)"]


# ---- reduction

def test_quant_derives_renaming():
    red = reduce_nr(nr("(y (x X)) (x Y)"))
    quant = [ln for ln in red.trace if ln.startswith("Quant")]
    assert quant and "α5^X2 = α5^X1[X2/X1]" in quant[0]
    assert any(ln.startswith("Join◯") for ln in red.trace)


def test_first_schematic_system():
    red = reduce_nr(nr(r"f (x X) (x Y)"))
    assert any("^X2 = " in ln and "[X2/X1]" in ln for ln in red.trace)
    assert red.steps <= red.bound


def test_trivial_join():
    red = reduce_nr(nr(r"(\x. x) y"))
    assert all("◯" not in ln for ln in red.trace)


# ---- saturation

def test_saturation_gen_refutation():
    sys = nr(r"/\X. (x Y)")
    sat = occ_saturate(constraints(sys), sys.equations)
    assert not sat.consistent
    assert "Occ(X, α2^X1)" in sat.reason and "¬Occ(X, α2^X1)" in sat.reason
    assert any(ln.startswith("A2") or ln.startswith("A5") for ln in sat.trace)


def test_saturation_injectivity_refutation():
    sys = nr("h (f (x X)) (f (x Y))")
    sat = occ_saturate(constraints(sys), sys.equations)
    assert not sat.consistent
    assert sat.reason.startswith("A7") and "X = Y, a contradiction" in sat.reason


def test_saturation_two_instances_consistent():
    sys = nr("(y (x X)) (x Y)")
    sat = occ_saturate(constraints(sys), sys.equations)
    assert sat.consistent
    assert "¬Occ(X2, α5^X1)" in {str(a).split("  ")[0] for a in sat.atoms}


# ---- terminals

def test_terminals():
    tm = terminals(reduce_nr(nr("(x X) y")).system)
    assert tm.terminals == [SchemeVar(0), SchemeVar(2)]
    tm = terminals(reduce_nr(nr(r"\x. x")).system)
    assert tm.terminals == [SchemeVar(1)]
    tm = terminals(reduce_nr(nr("(y (x X)) (x Y)")).system)
    assert SchemeVar(0) in tm.terminals and SchemeVar(5, "X2") in tm.terminals


# ---- decisions and witnesses

def typing(text, mode="all"):
    d = decide_nonredundant(parse_term(text), mode)
    assert d.verdict, d.reason
    return d


def test_witness_two_instances():
    d = typing("(y (x X)) (x Y)")
    assert alpha_eq(d.typing.env["x"], parse_type("forall X1. X1"))
    assert print_type(d.typing.env["y"]) == "X -> Y -> ⋆"


def test_witness_nested():
    d = typing("(x X) Y")
    assert alpha_eq(d.typing.env["x"], parse_type("forall X1. forall X2. X2 -> X1"))
    assert print_type(d.typing.result) == "Y -> X"


def test_witness_binder():
    d = typing(r"(/\X. \x. x) Y")
    assert d.typing.binders == {"x": parse_type("X")}


@pytest.mark.parametrize("text", [r"/\X. (x Y)", "h (f (x X)) (f (x Y))"])
def test_refuted(text):
    d = decide_nonredundant(parse_term(text))
    assert not d.verdict
    assert any("saturate" in ln for ln in d.trace)


def test_mode_none_is_plain_inference():
    d = typing(r"/\X. (x Y)", "none")
    ty = d.typing
    assert check_typing(ty.env, parse_term(r"/\X. (x Y)"), ty.result, ty.binders)


def test_untypable_is_no():
    d = decide_nonredundant(parse_term(r"\x. x x"))
    assert not d.verdict and d.reason.startswith("untypable")


# ---- essential places

def test_essential_places():
    d = typing("(y (x X)) (x Y)")
    w = d.witness
    for g, n in w.sizes.items():
        assert essential_places(w, g) == set(range(n))


def test_padded_witness_shrinks():
    # pad the group holding x's body to X1 -> ⋆ and check the pad is removable
    d = typing("(y (x X)) (x Y)")
    w = d.witness
    inst = w.instance
    target = next(s.group for s in inst.slots if s.owner == "x")
    sizes = dict(inst.sizes)
    sizes[target] += 1
    padded = build_instance(inst.sys, inst.analysis, sizes, inst.mode)
    by_key = {s.key: w.labels[s.sid] for s in inst.slots}
    labels = {s.sid: by_key.get(s.key, "⋆") for s in padded.slots}
    assert padded.holds(labels)
    pw = Witness(padded, labels, padded.typing(labels))
    assert essential_places(pw, target) == {0}
    smaller, _ = _without_place(pw, target, 1)
    assert smaller.sizes[target] == 1


def test_size_one_keeps_its_place():
    d = typing(r"\x. x")
    w = d.witness
    assert all(essential_places(w, g) == {0} for g, n in w.sizes.items() if n == 1)


# ---- corpus properties

@pytest.fixture(scope="module")
def decisions():
    out = []
    for t in corpus(250):
        out.append((t, decide_nonredundant(t, "all")))
    return out


def test_witnesses_check(decisions):
    for t, d in decisions:
        if d.verdict:
            ty = d.typing
            assert check_typing(ty.env, t, ty.result, ty.binders)
            assert check_nonredundant(ty.env, t, ty.result, ty.binders)


def test_witnesses_within_bound(decisions):
    for t, d in decisions:
        if d.verdict:
            bound = d.bound
            for g, n in d.witness.sizes.items():
                assert n <= bound
                assert essential_places(d.witness, g) == set(range(n))


def test_saturated_atoms_hold(decisions):
    for t, d in decisions:
        if not d.verdict:
            continue
        values = concrete_values(d.witness)
        for atom in d.saturation.atoms:
            try:
                val = evaluate_scheme(values, atom.scheme)
            except (KeyError, ValueError):
                continue
            assert occurs_in(atom.var, val) == atom.positive, (str(t), str(atom))


def test_mode_none_matches_inference(decisions):
    from fatinfer.bullet import poly_typable

    for t, _ in decisions[:150]:
        assert decide_nonredundant(t, "none").verdict == poly_typable(t)


def test_nonredundant_implies_typable(decisions):
    from fatinfer.bullet import poly_typable

    for t, d in decisions:
        if d.verdict:
            assert poly_typable(t)
