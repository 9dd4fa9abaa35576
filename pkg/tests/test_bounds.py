import numpy as np
import pytest

from qmk.bounds import (coherent_overlap, coherent_schatten_formula,
                        lower_bound_husimi, schatten_distance,
                        semiclassical_contrast_report, upper_bound_toeplitz,
                        wigner_product_upper_bound)
from qmk.oscillator import OscillatorRep, coherent_state, pure_density
from qmk.phasespace import default_reference, measure, toeplitz_quantize
from qmk.quantum_ot import solve_mk
from qmk.testkit import random_density
from qmk.verify import PRECISE_CFG


def test_schatten_distance_against_direct_svd():
    rep = OscillatorRep(1.0, 8)
    r1 = random_density(8, seed=31, basis_tag=rep.basis_tag)
    r2 = random_density(8, seed=32, basis_tag=rep.basis_tag)
    d = r1.matrix - r2.matrix
    assert schatten_distance(r1, r2, 2) == pytest.approx(np.linalg.norm(d), abs=1e-12)
    assert schatten_distance(r1, r2, 1) == pytest.approx(
        np.abs(np.linalg.eigvalsh(d)).sum(), abs=1e-10)
    assert schatten_distance(r1, r2, np.inf) == pytest.approx(
        np.linalg.norm(d, 2), abs=1e-12)


def test_coherent_overlap_matches_truncated_vectors():
    rep = OscillatorRep(1.0, 32)
    va = coherent_state(rep, 0.6, -0.2)
    vb = coherent_state(rep, -0.4, 0.5)
    direct = np.vdot(va, vb)
    series = coherent_overlap(0.6, -0.2, -0.4, 0.5, 1.0)
    assert abs(abs(series) - abs(direct)) < 1e-8
    assert abs(coherent_overlap(0.3, 0.1, 0.3, 0.1, 0.5) - 1.0) < 1e-12


def test_coherent_schatten_formula_matches_matrix_route():
    rep = OscillatorRep(1.0, 24)
    ka = pure_density(rep, coherent_state(rep, 0.0, 0.0))
    kb = pure_density(rep, coherent_state(rep, 1.0, 0.0))
    for p in (1, 2, np.inf):
        closed = coherent_schatten_formula(0.0, 0.0, 1.0, 0.0, 1.0, p)
        assert schatten_distance(ka, kb, p) == pytest.approx(closed, abs=1e-6)


def test_two_sided_bounds_bracket_solver():
    """Smoothed lower bound and both upper bounds bracket the true value."""
    rep = OscillatorRep(1.0, 16)
    ref = default_reference(rep)
    mu1 = measure([[1.0, 0.0, 0.0]])
    mu2 = measure([[1.0, 1.0, 0.5]])
    ka = toeplitz_quantize(rep, ref, mu1)
    kb = toeplitz_quantize(rep, ref, mu2)
    val = solve_mk(ka, kb, rep, PRECISE_CFG).value_sq

    mk1_sq = solve_mk(ka, ka, rep, PRECISE_CFG).value_sq
    low = lower_bound_husimi(ka, kb, ref, ref, rep, mk1_sq=mk1_sq, max_atoms=256)
    up_t = upper_bound_toeplitz(ref, ref, mu1, mu2, rep, mk1_sq=mk1_sq,
                                cfg=PRECISE_CFG)
    up_w = wigner_product_upper_bound(ka, kb, rep)
    slack = 0.02 * max(1.0, abs(val))
    assert low <= val + slack
    assert val <= up_t + slack
    assert val <= up_w + slack


def test_contrast_report_shape_and_monotonicity():
    rows = semiclassical_contrast_report()
    assert len(rows) == 8
    for r in rows:
        assert r.schatten2 <= np.sqrt(2.0) + 1e-9
        assert r.mk_root == pytest.approx(np.sqrt(r.delta ** 2 + 2 * r.hbar), abs=1e-12)
        assert r.saturated
    # report ordering is (delta asc, hbar desc)
    keys = [(r.delta, -r.hbar) for r in rows]
    assert keys == sorted(keys)
