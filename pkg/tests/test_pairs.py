from dataclasses import replace

import pytest

from painleve_lax.checks import ELIMINATIONS, GARNIER, PRIMARY_PAIRS
from painleve_lax.pairs import (CatalogFormatError, DegeneratePair, MatrixRat, UnknownPair, catalog,
                                catalog_names, compatibility_residual, dumps, eliminate_to_scalar, loads,
                                same_system, scalar_reduce, symmetric_variables_check)
from painleve_lax.symcore import parse


def test_catalog_lookup():
    names = catalog_names()
    assert set(PRIMARY_PAIRS) <= set(names)
    assert catalog("jm2") == catalog("JM2")
    with pytest.raises(UnknownPair):
        catalog("NOPE")


@pytest.mark.parametrize("name", catalog_names())
def test_text_round_trip(name):
    p = catalog(name)
    q = loads(dumps(p))
    assert q == p and q.name == p.name


@pytest.mark.parametrize("name", PRIMARY_PAIRS)
def test_compatibility_is_exact_zero(name):
    assert compatibility_residual(catalog(name)).is_zero()


def test_broken_pair_is_detected():
    p = catalog("JM2")
    bad = replace(p, T0=p.T0 + MatrixRat.identity(2) * parse("lam"))
    # a multiple of the identity commutes with A but its lam-derivative survives
    assert not compatibility_residual(bad).is_zero()


def test_degenerate_pairs_refuse_direct_check():
    with pytest.raises(DegeneratePair):
        compatibility_residual(catalog("dJKT1"))


def test_malformed_text():
    with pytest.raises(CatalogFormatError):
        loads("name: X\nspectral: lam\nsize: 2\nL: identity\n")


def test_matrix_algebra():
    M = MatrixRat.parse([["lam", "1"], ["t", "y"]])
    assert (M @ M.inverse()).is_identity()
    assert M.det() == parse("lam*y - t")
    assert M.rank() == 2 and MatrixRat.parse([["1", "lam"], ["2", "2*lam"]]).rank() == 1


def test_plain_form_keeps_the_system():
    p = catalog("HTW")
    assert same_system(p.to_plain(), p)
    assert compatibility_residual(p.to_plain()).is_zero()


@pytest.mark.parametrize("label", sorted(ELIMINATIONS))
def test_eliminations(label):
    name, target, expected = ELIMINATIONS[label]
    assert eliminate_to_scalar(catalog(name).table, target) == parse(expected)


@pytest.mark.parametrize("label", sorted(GARNIER))
def test_garnier_potentials(label):
    name, comp, rho, expected = GARNIER[label]
    sp = scalar_reduce(catalog(name), comp, parse(rho))
    assert sp.q1.is_zero()
    assert sp.potential == parse(expected)


def test_symmetric_variables():
    assert symmetric_variables_check(catalog("JM2").table)
    assert not symmetric_variables_check(catalog("JM2").table, alpha0="theta")
