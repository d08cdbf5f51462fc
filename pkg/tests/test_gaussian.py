from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedgraphs.binary import eta_from_sigma
from mixedgraphs.edges import induced_for_graph
from mixedgraphs.errors import InvalidPartition, NotPositiveDefinite, SingularPivot
from mixedgraphs.gaussian import (
    CovariancePair,
    RegressionSystem,
    TriangularSystem,
    covariance_from_triangular,
    induced_correlations_3node,
    joint_response_params,
    partial_inversion,
    sample_system,
    structural_zero_audit,
    triangular_from_covariance,
)
from mixedgraphs.graph import RegressionGraph

from conftest import graphs


@st.composite
def invertible(draw, max_n=6):
    """Random matrices with every principal submatrix well conditioned."""
    n = draw(st.integers(1, max_n))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    M = rng.normal(size=(n, n)) * 0.3
    return M + n * np.eye(n)


def subsets(n, data):
    return sorted(data.draw(st.sets(st.integers(1, n))))


# -- partial inversion -----------------------------------------------------------


def test_inversion_of_two_by_two():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    out = partial_inversion(M, [1])
    assert np.allclose(out, [[0.5, -0.5], [0.5, 1.5]])


@given(invertible(), st.data())
def test_inversion_is_self_inverse(M, data):
    a = subsets(M.shape[0], data)
    assert np.allclose(partial_inversion(partial_inversion(M, a), a), M, atol=1e-10)


@given(invertible(), st.data())
def test_inversion_commutes(M, data):
    n = M.shape[0]
    a, c = subsets(n, data), subsets(n, data)
    one = partial_inversion(partial_inversion(M, a), c)
    two = partial_inversion(partial_inversion(M, c), a)
    assert np.allclose(one, two, atol=1e-10)


@given(invertible(), st.data())
def test_inversion_exchanges_with_submatrices(M, data):
    n = M.shape[0]
    keep = sorted(data.draw(st.sets(st.integers(1, n), min_size=1)))
    a = sorted(data.draw(st.sets(st.sampled_from(keep))))
    pos = [k - 1 for k in keep]
    left = partial_inversion(M, a)[np.ix_(pos, pos)]
    right = partial_inversion(M[np.ix_(pos, pos)], a, order=keep)
    assert np.allclose(left, right, atol=1e-10)


@given(invertible())
def test_full_inversion_is_the_inverse(M):
    n = M.shape[0]
    assert np.allclose(partial_inversion(M, range(1, n + 1)), np.linalg.inv(M), atol=1e-10)


def test_zero_pivot_is_reported():
    with pytest.raises(SingularPivot):
        partial_inversion(np.array([[0.0, 1.0], [1.0, 0.0]]), [1])


def test_inversion_gives_regression_parameters():
    # inverting on the regressors yields coefficients and residual variance
    S = np.array([[1.0, 0.5, 0.3], [0.5, 1.0, 0.2], [0.3, 0.2, 1.0]])
    out = partial_inversion(S, [2, 3])
    p = joint_response_params(CovariancePair.from_sigma(S), [1])
    assert np.allclose(out[0, 1:], p.coefficients[0])
    assert np.isclose(out[0, 0], p.residual_cov[0, 0])
    assert np.allclose(-out[1:, 1:], -np.linalg.inv(S[1:, 1:]))


# -- three-variable induced correlations ---------------------------------------------------


def test_marginal_independence_induces_partial_correlation():
    r = induced_correlations_3node(0.7, 0.7, 0.0, "2 _||_ 3")
    assert abs(r - (-0.49 / 0.51)) < 1e-12


def test_conditional_independence_induces_product_correlation():
    r = induced_correlations_3node(0.7, 0.0, 0.7, "1 _||_ 3 | 2")
    assert abs(r - 0.49) < 1e-12


def test_induced_correlation_errors():
    with pytest.raises(InvalidPartition):
        induced_correlations_3node(0.1, 0.1, 0.1, "1 _||_ 1")
    with pytest.raises(NotPositiveDefinite):
        induced_correlations_3node(0.99, 0.99, 0.0, "2 _||_ 3")


# -- triangular systems -----------------------------------------------------------------


@given(invertible())
def test_triangular_round_trip(M):
    S = M @ M.T
    ts = triangular_from_covariance(S)
    back = covariance_from_triangular(ts)
    assert np.allclose(back.Sigma, S, atol=1e-9)
    assert np.allclose(back.SigmaInv @ S, np.eye(len(S)), atol=1e-8)


def test_triangular_system_validation():
    with pytest.raises(NotPositiveDefinite):
        TriangularSystem(np.eye(2), np.diag([1.0, 0.0]))


def chain_parameters():
    return itertools.product([-0.6, 0.3, 0.8], repeat=3)


def test_mutual_independence_given_common_parent():
    for r14, r24, r34 in chain_parameters():
        A = np.eye(4)
        A[:3, 3] = [-r14, -r24, -r34]
        D = np.diag([1 - r14**2, 1 - r24**2, 1 - r34**2, 1.0])
        S = covariance_from_triangular(TriangularSystem(A, D)).Sigma
        assert abs(S[0, 1] - r14 * r24) < 1e-12
        assert abs(S[0, 2] - r14 * r34) < 1e-12
        assert abs(S[1, 2] - r24 * r34) < 1e-12
        assert np.allclose(np.diag(S), 1.0)


def test_markov_chain_correlations_are_path_products():
    for r12, r23, r34 in chain_parameters():
        A = np.eye(4)
        A[0, 1], A[1, 2], A[2, 3] = -r12, -r23, -r34
        D = np.diag([1 - r12**2, 1 - r23**2, 1 - r34**2, 1.0])
        S = covariance_from_triangular(TriangularSystem(A, D)).Sigma
        assert abs(S[0, 2] - r12 * r23) < 1e-12
        assert abs(S[0, 3] - r12 * r23 * r34) < 1e-12
        assert abs(S[1, 3] - r23 * r34) < 1e-12


def test_covariance_chain_triangular_form():
    r12, r23, r34 = 0.4, -0.3, 0.5
    S = np.eye(4)
    S[0, 1] = S[1, 0] = r12
    S[1, 2] = S[2, 1] = r23
    S[2, 3] = S[3, 2] = r34
    A = triangular_from_covariance(S).A
    model = eta_from_sigma(S, RegressionGraph.parent(4, itertools.combinations(range(1, 5), 2)))
    eta = model.eta
    e12, e23, e34 = eta[(1, 2)], eta[(2, 3)], eta[(3, 4)]
    expected = np.array([
        [1, -e12, e12 * e23, -e12 * e23 * e34],
        [0, 1, -e23, e23 * e34],
        [0, 0, 1, -e34],
        [0, 0, 0, 1],
    ])
    assert np.allclose(A, expected, atol=1e-12)
    # coefficient of 2 on 4 given 3 has the opposite sign of the path product
    assert abs(eta[(2, 4)] + eta[(2, 3)] * eta[(3, 4)]) < 1e-12


def test_concentration_and_covariance_sides_agree():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(5, 5))
    cp = CovariancePair.from_sigma(M @ M.T + np.eye(5))
    for a in ([1], [2, 4], [1, 3, 5]):
        p, q = joint_response_params(cp, a), joint_response_params(cp, a, side="concentration")
        assert np.allclose(p.coefficients, q.coefficients)
        assert np.allclose(p.residual_cov, q.residual_cov)
        assert np.allclose(p.regressor_conc, q.regressor_conc)


# -- sampled systems and the audit --------------------------------------------------------


@given(graphs(max_d=6), st.integers(0, 1000))
def test_sampled_systems_respect_the_graph(g, seed):
    sys_ = sample_system(g, seed)
    assert sys_.order == g.order
    cp = sys_.covariance()
    assert np.all(np.linalg.eigvalsh(cp.Sigma) > 0)
    pos = g.position
    for i, j in itertools.combinations(g.order, 2):
        if not g.adjacent(i, j):
            assert sys_.H[pos[i], pos[j]] == 0 and sys_.H[pos[j], pos[i]] == 0


def test_audit_of_sink_graph(sink_graph):
    # marginalising over 4 while conditioning on the sink node 1
    report = structural_zero_audit(sink_graph, [4])
    assert report.ok
    assert report.induced.bb_dot_a[2, 3]
    assert not structural_zero_audit(sink_graph, [1]).induced.bb_dot_a[2, 3]


def test_audit_flags_cancelling_paths():
    # 1 <- 2 <- 3 and 1 <- 3 with the direct effect cancelling the indirect one
    g = RegressionGraph.parent(3, [(1, 2), (1, 3), (2, 3)])
    b12, b23 = 0.5, 0.6
    H = np.eye(3)
    H[0, 1], H[1, 2], H[0, 2] = -b12, -b23, b12 * b23
    system = RegressionSystem(g, H, np.eye(3), g.order)
    report = structural_zero_audit(g, [1, 2], seeds=[0], systems=[system])
    assert ("a_given_b", 1, 3, 0) in report.nonstructural_zeros
    assert not report.zero_violations
