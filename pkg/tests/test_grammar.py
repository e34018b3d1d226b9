import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrkl.errors import ParseError, ValidationError
from hrkl.grammar import (
    BASE_NAMES,
    FORMS,
    Base,
    Product,
    Sum,
    canonicalize,
    describe,
    expand,
    expected_count,
    leaves,
    param_layout,
    parse,
    read_grammar,
)


def brute_force_count(bases):
    """Independent count: enumerate raw trees, identify those equal up to the inner swap."""
    seen = set()
    for form in FORMS:
        for a, b, c in itertools.product(bases, repeat=3):
            if form == "a":
                key = (form, a)
            elif "c" not in form:
                key = (form, frozenset([a, b]) if a != b else (a,))
            else:
                key = (form, tuple(sorted((a, b))), c)
            seen.add(key)
    return len(seen)


@pytest.mark.parametrize("bases,count", [(["SE"], 7), (["SE", "PER"], 32), (["SE", "LIN", "PER"], 87)])
def test_expand_counts(bases, count):
    kernels = expand(bases)
    assert len(kernels) == count
    assert len({canonicalize(k) for k in kernels}) == count
    assert expected_count(len(bases)) == count
    assert brute_force_count(bases) == count


def test_expand_is_sorted_and_canonical():
    names = [canonicalize(k) for k in expand(BASE_NAMES)]
    assert names == sorted(names)
    for name in names:
        assert canonicalize(parse(name)) == name


def test_known_canonical_strings():
    names = {canonicalize(k) for k in expand(BASE_NAMES)}
    for expected in ["LIN+PER*SE", "SE*LIN", "PER*(SE*LIN)", "LIN*(PER*SE)", "SE", "LIN*(PER+SE)"]:
        assert expected in names, expected


def test_inner_pair_commutes_outer_does_not():
    a = Sum(Product(Base("PER"), Base("SE")), Base("LIN"))
    b = Sum(Product(Base("SE"), Base("PER")), Base("LIN"))
    assert canonicalize(a) == canonicalize(b) == "LIN+PER*SE"
    # (SE*LIN)*PER and (PER*SE)*LIN are different kernels in this grammar
    x = Product(Product(Base("SE"), Base("LIN")), Base("PER"))
    y = Product(Product(Base("PER"), Base("SE")), Base("LIN"))
    assert canonicalize(x) != canonicalize(y)


def test_expand_rejects_bad_input():
    with pytest.raises(ValidationError):
        expand([])
    with pytest.raises(ValidationError):
        expand(["RQ"])
    with pytest.raises(ValidationError):
        expand(["SE"], forms=["a**b"])


def test_forms_subset():
    assert len(expand(["SE", "LIN"], forms=["a"])) == 2
    assert len(expand(["SE", "LIN"], forms=["a", "a+b"])) == 5


def test_parse_precedence_and_spaces():
    e = parse("PER * SE + LIN")
    assert isinstance(e, Sum)
    assert canonicalize(e) == "LIN+PER*SE"
    assert canonicalize(parse("(SE+LIN)*PER")) == canonicalize(parse("PER*(LIN+SE)"))


@pytest.mark.parametrize("text", ["", "SE+", "SE LIN", "(SE", "SE)", "FOO", "SE**LIN"])
def test_parse_errors(text):
    with pytest.raises(ValidationError):
        parse(text)


def test_param_layout():
    layout = param_layout(parse("LIN+PER*SE"))
    assert layout.count == 2 + 3 + 2 + 1
    assert layout.names[-1] == "noise.variance"
    assert layout.roles.count("log_period") == 1
    assert layout.roles.count("shift") == 1


def test_describe_examples():
    assert describe(parse("LIN+PER*SE")) == [
        "a linear function",
        "a periodic function whose shape changes smoothly",
    ]
    assert describe(parse("SE")) == ["a smooth function"]
    assert describe(parse("LIN*LIN")) == ["a quadratic function"]
    assert describe(parse("PER*LIN")) == ["a periodic function with linearly varying amplitude"]
    assert describe(parse("(PER+SE)*LIN")) == [
        "a periodic function with linearly varying amplitude",
        "a smooth function with linearly varying amplitude",
    ]


def test_describe_covers_every_kernel():
    for k in expand(BASE_NAMES):
        sentences = describe(k)
        assert sentences and all(isinstance(s, str) and s for s in sentences)


def test_read_grammar(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# small grammar\nbase SE\nPER\nform a\nform a*b\nkernel LIN+PER*SE\n")
    names = [canonicalize(k) for k in read_grammar(path)]
    assert names == sorted(["PER", "SE", "PER*PER", "PER*SE", "SE*SE", "LIN+PER*SE"])


def test_read_grammar_reports_line(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("base SE\n\nform a%b\n")
    with pytest.raises(ParseError) as info:
        read_grammar(path)
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_grammar_runtime_is_small():
    import time

    t0 = time.perf_counter()
    expand(BASE_NAMES)
    assert time.perf_counter() - t0 < 1.0


base_st = st.sampled_from(BASE_NAMES).map(Base)
expr_st = st.recursive(
    base_st,
    lambda inner: st.builds(Sum, inner, inner) | st.builds(Product, inner, inner),
    max_leaves=5,
)


@settings(max_examples=200, deadline=None)
@given(expr_st)
def test_canonical_round_trip(e):
    s = canonicalize(e)
    assert canonicalize(parse(s)) == s
    assert sorted(leaves(parse(s))) == sorted(leaves(e))


@settings(max_examples=200, deadline=None)
@given(expr_st, expr_st)
def test_commutativity_is_absorbed(a, b):
    assert canonicalize(Sum(a, b)) == canonicalize(Sum(b, a))
    assert canonicalize(Product(a, b)) == canonicalize(Product(b, a))
