import pytest

from painleve_lax.symcore import (DerivationTable, DivisionByZero, ExtensionMismatch, NotPolynomialIn,
                                  ParseError, RatFunc, UncoveredSymbol, parse)


def test_canonical_form_cancels_common_factors():
    assert parse("(lam^2 - y^2)/(lam - y)") == parse("lam + y")
    assert str(parse("2/4")) == "1/2"
    assert parse("(1+i)*(1-i)") == 2


def test_imaginary_unit():
    i = RatFunc.imag_unit()
    assert i * i == -1
    assert parse("(1+i)*y").conjugate_i() == parse("(1-i)*y")
    assert parse("i*lam + 1/2").evaluate({"lam": 2}) == 0.5 + 2j


def test_square_root_extension():
    w = parse("w", ext="lam - y")
    assert w.has_w() and not (w * w).has_w()
    assert w * w == parse("lam - y")
    assert parse("w", ext="lam").diff_spectral("lam") == parse("w/(2*lam)", ext="lam")
    assert parse("w*t", ext="lam").evaluate({"t": 2, "lam": 4}, w=2) == 4
    with pytest.raises(ExtensionMismatch):
        parse("w", ext="lam") + parse("w", ext="t")


@pytest.mark.parametrize("text, exc", [("1/0", DivisionByZero), ("lam +* 2", ParseError),
                                       ("foo", ParseError)])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse(text)


def test_t_derivative_uses_the_table():
    table = DerivationTable({"y": "y^2 + z + t/2", "z": "-2*y*z - theta"})
    assert parse("y*z").diff_t(table) == parse("(y^2 + z + t/2)*z + y*(-2*y*z - theta)")
    assert parse("t^2*theta").diff_t(table) == parse("2*t*theta")
    with pytest.raises(UncoveredSymbol):
        parse("u").diff_t(table)


def test_inert_symbols_have_zero_derivative():
    table = DerivationTable({}, inert=["y"])
    assert parse("y*t").diff_t(table) == parse("y")


def test_coefficients_and_degree():
    f = parse("3*lam^2*t - lam + y")
    assert f.degree_in("lam") == 2
    assert f.coeff_in("lam", 2) == parse("3*t")
    assert f.coeff_in("lam", 0) == parse("y")
    with pytest.raises(NotPolynomialIn):
        parse("1/lam").coeff_in("lam", 0)


def test_deflate_rewrites_even_powers():
    assert parse("(lam^2 + t)^2").deflate("lam", 2, "mu", 3) == parse("(3*mu + t)^2")


def test_substitute_and_sign():
    assert parse("lam^2 - y").substitute({"lam": "2*mu", "y": 1}) == parse("4*mu^2 - 1")
    assert parse("-lam^3 + t").leading_sign() == -1
