import pytest

from fatinfer.checker import check_typing
from fatinfer.simple import (
    UnificationError, Untypable, check_simple, collapse_typing, curry_typable, infer_simple, unify,
)
from fatinfer.syntax import Arrow, TVar, erase_types, parse_term, parse_type

from corpus import corpus

a, b, c = TVar("?a"), TVar("?b"), TVar("?c")


def test_unify_chain():
    s = unify([(a, Arrow(b, c)), (b, c)])
    assert s == {"?a": Arrow(c, c), "?b": c}


def test_unify_occurs_check():
    with pytest.raises(UnificationError) as err:
        unify([(a, Arrow(a, b))])
    assert err.value.kind == "occurs-check"


def test_unify_clash_and_empty():
    assert unify([]) == {}
    with pytest.raises(UnificationError) as err:
        unify([(Arrow(a, b), TVar("O"))])
    assert err.value.kind == "constructor-clash"


def test_principal_k():
    assert str(infer_simple(parse_term(r"\x. \y. x"))) == "|- a1 -> a2 -> a1"


def test_self_application():
    with pytest.raises(Untypable) as err:
        infer_simple(parse_term(r"\x. x x"))
    assert err.value.reason == "occurs-check"
    assert not curry_typable(parse_term(r"\x. x x"))


def test_golden_erasure_untypable():
    # shared name x1: free and lambda-bound at once
    t = erase_types(parse_term(r"/\*. ((/\*. x1) *) (\x1. x0 (/\*. x2))"))
    assert t == parse_term(r"x1 (\x1. x0 x2)")
    assert not curry_typable(t)


@pytest.mark.parametrize("text", [r"\x. x", r"(\x. x)(\y. y)"])
def test_typable(text):
    assert curry_typable(parse_term(text))


def test_collapse_typing_examples():
    assert collapse_typing({"x": parse_type("forall X. X")}, TVar("X")) == ({"x": TVar("O")}, TVar("O"))
    env, res = collapse_typing({"y": parse_type("X -> Y -> Z")}, TVar("Z"))
    assert env == {"y": parse_type("O -> O -> O")} and res == TVar("O")
    assert collapse_typing({}, parse_type("forall X. X -> X")) == ({}, parse_type("O -> O"))


def test_soundness_image_on_checked_typings():
    # every checked Fat typing collapses to a simple typing of the erasure
    from fatinfer.bullet import infer_poly

    seen = 0
    for t in corpus(200):
        try:
            ty = infer_poly(t)
        except Untypable:
            continue
        assert check_typing(ty.env, t, ty.result, ty.binders)
        env, res = collapse_typing(ty.env, ty.result)
        assert check_simple(env, erase_types(t), res)
        seen += 1
    assert seen > 50
