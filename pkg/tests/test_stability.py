import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oimlab.dynamics import OimParams
from oimlab.ising import IsingInstance, random_instance
from oimlab.stability import (Classification, EigenSpectrum, classify, eigenvalues_symmetric,
                              equivalence_report, finite_difference_matrix, hessian, inf_norm,
                              jacobian, scaled_tol, stability_report)

A, S, M, D = (Classification.ATTRACTIVE_MINIMUM, Classification.SADDLE, Classification.MAXIMUM,
              Classification.DEGENERATE)
P11 = OimParams(1.0, 1.0)


def random_case(seed, n_range=(2, 11)):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(*n_range))
    inst = random_instance(rng, n)
    params = OimParams(k=float(rng.choice([0.5, 1, 2])), ks=float(rng.choice([0.5, 1, 2])))
    return inst, params, rng.uniform(0, 2 * math.pi, n)


# -- analytic matrices -----------------------------------------------------

def test_hessian_examples(pair, single):
    assert np.array_equal(hessian(P11, pair, [0.0, 0.0]), [[6, -2], [-2, 6]])
    assert hessian(P11, pair, [0.0, math.pi]) == pytest.approx(np.array([[2, 2], [2, 2]]), abs=1e-15)
    assert np.array_equal(hessian(P11, single, [0.0]), [[4]])


def test_hessian_examples_match_finite_differences(pair, single):
    for inst, x in ((pair, [0.0, 0.0]), (pair, [0.0, math.pi]), (single, [0.0])):
        fd = finite_difference_matrix("hessian", P11, inst, x, h=1e-4)
        assert np.max(np.abs(fd - hessian(P11, inst, x))) <= 1e-5


def test_jacobian_examples(pair, single):
    assert np.array_equal(jacobian(P11, pair, [0.0, 0.0]), [[-3, 1], [1, -3]])
    assert jacobian(P11, single, [math.pi / 2]) == pytest.approx(np.array([[2.0]]), abs=1e-15)
    fd = finite_difference_matrix("jacobian", P11, pair, [0.0, 0.0], h=1e-4)
    assert np.max(np.abs(fd - jacobian(P11, pair, [0.0, 0.0]))) <= 1e-5


def test_matrices_exactly_symmetric():
    for seed in range(10):
        inst, params, x = random_case(seed)
        for m in (hessian(params, inst, x), jacobian(params, inst, x)):
            assert np.array_equal(m, m.T)


@pytest.mark.parametrize("seed", range(50))
def test_matrix_equivalence(seed):
    inst, params, x = random_case(seed)
    resid = np.max(np.abs(jacobian(params, inst, x) + 0.5 * hessian(params, inst, x)))
    assert resid <= 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_general_alpha_equivalence(alpha):
    for seed in range(10):
        inst, params, x = random_case(seed)
        p = OimParams(params.k, params.ks, alpha)
        assert np.max(np.abs(jacobian(p, inst, x) + alpha * hessian(p, inst, x))) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_oracle_agreement(seed):
    inst, params, x = random_case(seed, (2, 7))
    fd_h = finite_difference_matrix("hessian", params, inst, x, h=1e-4)
    fd_j = finite_difference_matrix("jacobian", params, inst, x, h=1e-4)
    assert np.max(np.abs(fd_h - hessian(params, inst, x))) <= 1e-5
    assert np.max(np.abs(fd_j - jacobian(params, inst, x))) <= 1e-5


def test_finite_difference_zero_dynamics():
    inst = IsingInstance(np.zeros((3, 3)))
    params = OimParams(1.0, 0.0)
    x = [0.3, 1.0, 2.0]
    assert np.max(np.abs(finite_difference_matrix("hessian", params, inst, x))) == 0.0
    assert np.max(np.abs(finite_difference_matrix("jacobian", params, inst, x))) == 0.0


def test_finite_difference_jacobian_flags_asymmetry():
    inst = IsingInstance.unchecked([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="asymmetry"):
        finite_difference_matrix("jacobian", P11, inst, [0.2, 0.1])
    raw = finite_difference_matrix("jacobian", P11, inst, [0.2, 0.1], symmetrize=False)
    assert abs(raw[0, 1] - raw[1, 0]) > 0.5


def test_finite_difference_bad_arguments(pair):
    with pytest.raises(ValueError):
        finite_difference_matrix("laplacian", P11, pair, [0.0, 0.0])
    with pytest.raises(ValueError):
        finite_difference_matrix("hessian", P11, pair, [0.0, 0.0], h=0.0)


# -- eigensolver -----------------------------------------------------------

def closed_form_2x2(a, b):
    """Eigenvalues of [[a, b], [b, a]]."""
    return sorted([a - abs(b), a + abs(b)])


@pytest.mark.parametrize("matrix, expected", [
    ([[6.0, -2.0], [-2.0, 6.0]], closed_form_2x2(6.0, -2.0)),
    ([[2.0, 2.0], [2.0, 2.0]], closed_form_2x2(2.0, 2.0)),
    (np.eye(3).tolist(), [1.0, 1.0, 1.0]),
])
def test_eigen_examples(matrix, expected):
    spec = eigenvalues_symmetric(np.array(matrix))
    assert spec.values == pytest.approx(expected, abs=1e-14)
    assert expected == sorted(expected)


def test_eigen_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigenvalues_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eigen_zero_matrix():
    spec = eigenvalues_symmetric(np.zeros((4, 4)))
    assert np.all(spec.values == 0)


def _sym(m):
    return np.triu(m) + np.triu(m, 1).T


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.just(12)),
              elements=st.floats(-100, 100, allow_nan=False)))
def test_eigen_certified_against_lapack(raw):
    n = raw.shape[0]
    a = _sym(raw[:, :n])
    spec = eigenvalues_symmetric(a)
    bound = 1e-8 * max(1.0, inf_norm(a))
    assert np.all(np.diff(spec.values) >= 0)
    assert spec.residual <= bound
    assert np.max(np.abs(a @ spec.vectors - spec.vectors * spec.values)) <= bound
    assert abs(spec.values.sum() - np.trace(a)) <= 1e-8 * max(1.0, abs(np.trace(a)))
    assert spec.values == pytest.approx(np.linalg.eigvalsh(a), abs=bound)


def test_eigen_larger_random_matrix():
    rng = np.random.default_rng(3)
    a = _sym(rng.normal(size=(60, 60)))
    spec = eigenvalues_symmetric(a)
    assert spec.values == pytest.approx(np.linalg.eigvalsh(a), abs=1e-10)


# -- classification --------------------------------------------------------

@pytest.mark.parametrize("values, kind, expected", [
    ([4, 8], "hessian", A),
    ([-2, 2], "hessian", S),
    ([0, 4], "hessian", D),
    ([-3, -1], "hessian", M),
    ([-4, -2], "jacobian", A),
    ([-1, 1], "jacobian", S),
    ([1, 3], "jacobian", M),
    ([-2, 0], "jacobian", D),
    ([-2, 1e-12, 3], "hessian", D),
])
def test_classify_table(values, kind, expected):
    assert classify(values, kind, 1e-8) is expected


def test_classify_accepts_spectrum_and_validates():
    spec = EigenSpectrum(np.array([4.0, 8.0]), 0.0, np.eye(2))
    assert classify(spec, "hessian", 1e-8) is A
    with pytest.raises(ValueError):
        classify(spec, "hessian", 0.0)
    with pytest.raises(ValueError):
        classify(spec, "laplacian", 1e-8)


# -- equivalence report ----------------------------------------------------

def test_equivalence_report_pair_minimum(pair):
    rep = equivalence_report(P11, pair, [0.0, 0.0])
    assert rep.max_abs_residual_matrix <= 1e-12
    assert rep.max_abs_residual_eigen <= 1e-12
    assert rep.eigs_jacobian == pytest.approx([-4, -2], abs=1e-14)
    assert rep.eigs_hessian == pytest.approx([4, 8], abs=1e-14)
    assert rep.hessian_classification is A and rep.jacobian_classification is A and rep.agree


def test_equivalence_report_alpha_quarter(pair):
    rep = equivalence_report(OimParams(1.0, 1.0, 0.25), pair, [0.0, 0.0])
    assert rep.eigs_jacobian == pytest.approx([-2, -1], abs=1e-14)
    assert rep.eigs_hessian == pytest.approx([4, 8], abs=1e-14)
    assert rep.max_abs_residual_matrix <= 1e-12 and rep.agree


def test_equivalence_report_saddle(pair):
    rep = equivalence_report(OimParams(1.0, 0.5), pair, [0.0, math.pi])
    assert rep.eigs_hessian == pytest.approx([-2, 2], abs=1e-14)
    assert rep.hessian_classification is S and rep.jacobian_classification is S and rep.agree


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("seed", range(15))
def test_eigen_mirror_and_agreement(seed, alpha):
    inst, params, x = random_case(seed)
    p = OimParams(params.k, params.ks, alpha)
    rep = equivalence_report(p, inst, x)
    h = hessian(p, inst, x)
    assert rep.max_abs_residual_matrix <= 1e-12
    assert rep.max_abs_residual_eigen <= 1e-8 * max(1.0, inf_norm(h))
    assert rep.agree


def test_stability_report_roundtrip(pair):
    rep = stability_report(P11, pair, [0.0, math.pi])
    assert list(rep.spins) == [1, -1]
    assert rep.ising_energy == 1.0
    back = type(rep).from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()
    nb = stability_report(P11, pair, [math.pi / 2, math.pi / 2])
    assert nb.spins is None and nb.ising_energy is None
    assert type(nb).from_dict(nb.to_dict()).to_dict() == nb.to_dict()


def test_scaled_tol():
    assert scaled_tol(np.eye(2)) == 1e-8
    assert scaled_tol(np.full((2, 2), 10.0)) == pytest.approx(2e-7)
