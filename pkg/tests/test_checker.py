import pytest

from fatinfer.checker import NotTypable, check_nonredundant, check_typing, poly_paths, synthesize
from fatinfer.simple import Untypable
from fatinfer.syntax import fresh_name, parse_env, parse_term, parse_type

from corpus import corpus


def check(env, term, ty, binders=None):
    return check_typing(parse_env(env), parse_term(term), parse_type(ty),
                        parse_env(binders) if binders else None)


def test_two_instances_of_one_variable():
    assert check("x: forall X1. X1, y: X -> Y -> O", "(y (x X)) (x Y)", "O")


def test_gen_proviso():
    res = check("x: Y", r"/\Y. x", "forall Y. Y")
    assert not res
    assert "Y" in res.reason


def test_identity():
    assert check("", r"\x. x", "X -> X")
    assert not check("", r"\x. x", "X -> Y")


def test_inst_must_match():
    assert check("x: forall X1. forall X2. X2 -> X1", "(x X) Y", "Y -> X")
    assert not check("x: forall X1. forall X2. X2 -> X1", "(x X) Y", "X -> Y")


def test_binders_may_be_fixed():
    assert check("", r"(/\X. \x. x) Y", "Y -> Y", "x: X")
    assert not check("", r"(/\X. \x. x) Y", "Y -> Y", "x: Z")


def test_synthesize_reports_type():
    res = synthesize(parse_env("x: forall Z. Z -> Z"), {}, parse_term("x Y"))
    assert res and res.derived == parse_type("Y -> Y")


def test_nonredundant_examples():
    env = parse_env("x: forall X1. forall X2. X2 -> X1")
    assert check_nonredundant(env, parse_term("(x X) Y"), parse_type("Y -> X"))
    assert not check_nonredundant(parse_env("x: forall Z. O"), parse_term("x Y"), parse_type("O"))
    assert check_nonredundant({}, parse_term(r"(/\X. \x. x) Y"), parse_type("Y -> Y"))


def test_nonredundant_needs_a_typing():
    with pytest.raises(NotTypable):
        check_nonredundant({}, parse_term(r"\x. x"), parse_type("X -> Y"))


def test_selected_occurrences_only():
    t = parse_term("(x X) Y")
    env = parse_env("x: forall X1. forall X2. X1")
    assert not check_nonredundant(env, t, parse_type("X"))
    inner = {p for p in poly_paths(t) if p == (0,)}
    assert check_nonredundant(env, t, parse_type("X"), occurrences=inner)


def test_weakening_on_corpus():
    from fatinfer.bullet import infer_poly

    for t in corpus(150):
        try:
            ty = infer_poly(t)
        except Untypable:
            continue
        env = dict(ty.env)
        env[fresh_name(set(env) | {"x", "y", "f"}, "w")] = parse_type("W -> W")
        assert check_typing(env, t, ty.result, ty.binders)
