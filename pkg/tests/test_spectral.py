from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from masscalc.spectral import (
    CapabilityError,
    ConsistencyError,
    build_B,
    build_projections,
    build_rep,
    highest_weight,
    spectral_report,
    symbol_matrix,
)
from masscalc.weights import DominantWeight, casimir, decompose
from masscalc.weitzenbock import random_unit_vectors


def _setup(n, family, **kw):
    rep = build_rep(n, family, **kw)
    decomp = decompose(rep.rho)
    return rep, decomp, build_projections(build_B(rep), decomp)


def _family_cases():
    for n in range(3, 9):
        for p in range(0, n + 1):
            yield n, "exterior", {"p": p}
        yield n, "spin", {}
    for n in range(3, 7):
        for k in (1, 2, 3):
            yield n, "symmetric_traceless", {"k": k}


def test_exterior_one_is_defining_rep():
    rep = build_rep(3, "exterior", p=1)
    assert rep.dim_V == 3
    g = rep.generator(0, 1)
    e = np.eye(3)
    assert np.allclose(g @ e[0], e[1])
    assert np.allclose(g @ e[1], -e[0])
    assert np.allclose(g @ e[2], 0)


def test_spin_three_casimir():
    rep = build_rep(3, "spin")
    assert rep.dim_V == 2 and rep.is_complex
    assert np.allclose(rep.casimir_matrix(), 0.75 * np.eye(2))


def test_symmetric_two_dimension():
    assert build_rep(3, "symmetric_traceless", k=2).dim_V == 5


def test_capability_errors():
    with pytest.raises(CapabilityError):
        build_rep(3, "adjoint")
    with pytest.raises(CapabilityError):
        build_rep(4, "exterior", p=5)
    with pytest.raises(CapabilityError):
        build_rep(3, "symmetric_traceless")
    with pytest.raises(CapabilityError):
        build_rep(2, "spin")


def test_trivial_B_is_zero():
    rep, decomp, proj = _setup(5, "trivial")
    assert np.allclose(build_B(rep).matrix, 0)
    assert len(proj) == 1 and np.allclose(proj[0], np.eye(5))


def test_B_spectrum_examples():
    eig = np.round(build_B(build_rep(3, "exterior", p=1)).eigenvalues(), 9)
    vals, counts = np.unique(eig, return_counts=True)
    assert dict(zip(vals, counts)) == {-2.0: 1, -1.0: 3, 1.0: 5}
    eig = np.round(build_B(build_rep(5, "spin")).eigenvalues(), 9)
    vals, counts = np.unique(eig, return_counts=True)
    assert dict(zip(vals, counts)) == {-2.0: 4, 0.5: 16}


def test_projection_ranks_examples():
    assert _setup(3, "exterior", p=1)[2].ranks == (5, 3, 1)
    assert _setup(3, "spin")[2].ranks == (4, 2)


@pytest.mark.parametrize("n,family,kw", list(_family_cases()))
def test_spectral_report_passes(n, family, kw):
    rep = build_rep(n, family, **kw)
    report = spectral_report(rep, decompose(rep.rho))
    failed = [k for k, v in report["checks"].items() if not v]
    assert not failed, (failed, report["spectrum_error"])
    exact = 2 * rep.dim_V * casimir(rep.rho)
    assert abs(report["trace_B_squared"] - float(exact)) <= 1e-9 * max(1.0, float(exact))


@pytest.mark.parametrize("n,family,kw", [(3, "spin", {}), (4, "exterior", {"p": 1}), (5, "exterior", {"p": 2}), (6, "spin", {}), (4, "symmetric_traceless", {"k": 2})])
def test_symbols(n, family, kw):
    rep, decomp, proj = _setup(n, family, **kw)
    rng = np.random.default_rng(7)
    xis = random_unit_vectors(n, 20, rng)
    w = [float(x) for x in decomp.weights]
    ref = None
    for xi in xis:
        qs = [symbol_matrix(proj, j, xi) for j in range(len(proj))]
        assert np.allclose(sum(qs), np.eye(rep.dim_V), atol=1e-9)
        assert np.allclose(sum(c * q for c, q in zip(w, qs)), 0, atol=1e-9)
        for q in qs:
            assert np.min(np.linalg.eigvalsh(q)) > -1e-9
        spectra = [np.linalg.eigvalsh(q) for q in qs]
        if ref is None:
            ref = spectra
        for a, b in zip(spectra, ref):
            assert np.allclose(a, b, atol=1e-9)


@pytest.mark.parametrize("n", range(3, 9))
def test_spin_twistor_symbol_ratio(n):
    rep, decomp, proj = _setup(n, "spin")
    xi = random_unit_vectors(n, 1, np.random.default_rng(n))[0]
    assert np.allclose(symbol_matrix(proj, 0, xi), (n - 1) * symbol_matrix(proj, 1, xi), atol=1e-9)


def test_trivial_symbol_is_identity():
    _, _, proj = _setup(4, "trivial")
    xi = np.array([0.6, 0.0, 0.8, 0.0])
    assert np.allclose(symbol_matrix(proj, 0, xi), np.eye(1))


def test_symbol_rejects_non_unit():
    _, _, proj = _setup(3, "spin")
    with pytest.raises(ValueError):
        symbol_matrix(proj, 0, [1.0, 1.0, 0.0])


def test_mismatched_decomposition_raises():
    rep = build_rep(5, "spin")
    with pytest.raises(ConsistencyError):
        build_projections(build_B(rep), decompose(DominantWeight.standard(5)))


def test_collision_split_projections():
    # n = 4 one-forms: two chiral summands share the B-eigenvalue -1
    rep, decomp, proj = _setup(4, "exterior", p=1)
    assert decomp.weights == (1, -1, -1, -3)
    assert proj.ranks == decomp.dims == (9, 3, 3, 1)
    assert max(proj.residuals().values()) < 1e-9


def test_highest_weights_match():
    for n, family, kw in _family_cases():
        if n > 6:
            continue
        rep = build_rep(n, family, **kw)
        assert highest_weight(rep) == rep.rho


def test_chiral_halves_for_even_n():
    rep = build_rep(6, "exterior", p=3)
    assert rep.rho == DominantWeight.from_coords(6, [1, 1, 1])
    assert rep.dim_V == 10 and rep.is_complex
    rep = build_rep(4, "exterior", p=2)
    assert rep.rho == DominantWeight.from_coords(4, [1, 1])
    assert rep.dim_V == 3 and not rep.is_complex
    rep = build_rep(6, "spin")
    assert rep.rho == DominantWeight.from_coords(6, [Fraction(1, 2)] * 3)


def test_brackets_oracle_on_standard_rep():
    # independent check of the convention: L_ij = E_ji - E_ij
    rep = build_rep(4, "exterior", p=1)
    for i, j in combinations(range(4), 2):
        expected = np.zeros((4, 4))
        expected[j, i], expected[i, j] = 1.0, -1.0
        assert np.allclose(rep.generator(i, j), expected)
