"""Gaussian models over regression graphs, and partial inversion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .edges import InducedEdgeSet, induced_for_graph
from .errors import (
    DimensionMismatch,
    InvalidPartition,
    NotPositiveDefinite,
    SingularBlock,
    SingularMatrix,
    SingularPivot,
    UnknownNode,
)
from .graph import EdgeKind, RegressionGraph, require_valid

PIVOT_TOL = 1e-12
ZERO_TOL = 1e-9


def _positions(order: Sequence[int], nodes: Iterable[int]) -> list[int]:
    where = {n: k for k, n in enumerate(order)}
    try:
        return sorted(where[n] for n in set(nodes))
    except KeyError as exc:
        raise UnknownNode(f"node {exc.args[0]} is not in the matrix order") from None


def _default_order(M: np.ndarray, order: Sequence[int] | None) -> tuple[int, ...]:
    if order is None:
        return tuple(range(1, M.shape[0] + 1))
    order = tuple(order)
    if len(order) != M.shape[0]:
        raise DimensionMismatch("order length does not match the matrix")
    return order


# -- partial inversion ----------------------------------------------------------


def partial_inversion(M, a: Iterable[int], order: Sequence[int] | None = None) -> np.ndarray:
    """Exchange argument and image on ``a`` for ``M x = y``.

    Pivots are taken one node at a time in the given order.  A pivot with
    absolute value below ``1e-12`` raises :class:`SingularPivot`.
    """
    M = np.array(M, dtype=float, copy=True)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("partial inversion needs a square matrix")
    order = _default_order(M, order)
    for k in _positions(order, a):
        s = M[k, k]
        if abs(s) < PIVOT_TOL:
            raise SingularPivot(f"pivot at node {order[k]} is {s:.3g}")
        col = M[:, k].copy()
        row = M[k, :].copy()
        M -= np.outer(col, row) / s
        M[k, :] = -row / s
        M[:, k] = col / s
        M[k, k] = 1.0 / s
    return M


# -- triangular systems ---------------------------------------------------------


@dataclass(frozen=True)
class TriangularSystem:
    """``A X = eps`` with unit upper-triangular ``A`` and ``cov(eps) = Delta``."""

    A: np.ndarray
    Delta: np.ndarray

    def __post_init__(self):
        A, D = np.asarray(self.A, float), np.asarray(self.Delta, float)
        if A.shape != D.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch("A and Delta must be square and of equal size")
        if not np.allclose(np.diag(A), 1.0) or np.any(np.tril(A, -1) != 0):
            raise SingularMatrix("A must be unit upper-triangular")
        if np.any(D != np.diag(np.diag(D))) or np.any(np.diag(D) <= 0):
            raise NotPositiveDefinite("Delta must be diagonal with positive entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Delta", D)


@dataclass(frozen=True)
class CovariancePair:
    Sigma: np.ndarray
    SigmaInv: np.ndarray
    order: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.order:
            object.__setattr__(self, "order", tuple(range(1, self.Sigma.shape[0] + 1)))

    @classmethod
    def from_sigma(cls, Sigma, order: Sequence[int] | None = None) -> "CovariancePair":
        S = np.asarray(Sigma, float)
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("covariance matrix is not positive definite") from None
        return cls(S, np.linalg.inv(S), _default_order(S, order))


def covariance_from_triangular(ts: TriangularSystem) -> CovariancePair:
    try:
        Ainv = np.linalg.inv(ts.A)
    except np.linalg.LinAlgError:
        raise SingularMatrix("A is singular") from None
    Dinv = np.diag(1.0 / np.diag(ts.Delta))
    return CovariancePair(Ainv @ ts.Delta @ Ainv.T, ts.A.T @ Dinv @ ts.A)


def triangular_from_covariance(Sigma) -> TriangularSystem:
    """Ordered decomposition ``Sigma^-1 = A' Delta^-1 A`` (inverse of the map above)."""
    S = np.asarray(Sigma, float)
    d = S.shape[0]
    A = np.eye(d)
    D = np.zeros(d)
    for i in range(d):
        rest = slice(i + 1, d)
        if i + 1 < d:
            beta = np.linalg.solve(S[rest, rest], S[rest, i])
            A[i, rest] = -beta
            D[i] = S[i, i] - S[i, rest] @ beta
        else:
            D[i] = S[i, i]
    if np.any(D <= 0):
        raise NotPositiveDefinite("covariance matrix is not positive definite")
    return TriangularSystem(A, np.diag(D))


# -- joint-response regressions ------------------------------------------------------


@dataclass(frozen=True)
class JointResponseParams:
    """Regression of ``X_a`` on ``X_b``.

    ``coefficients`` is ``Pi_{a|b}``, ``residual_cov`` is ``Sigma_{aa|b}`` and
    ``regressor_conc`` is the concentration matrix of ``X_b`` alone.
    """

    a: tuple[int, ...]
    b: tuple[int, ...]
    coefficients: np.ndarray
    residual_cov: np.ndarray
    regressor_conc: np.ndarray


def _split(order: Sequence[int], a: Iterable[int]) -> tuple[list[int], list[int]]:
    pa = _positions(order, a)
    pb = [k for k in range(len(order)) if k not in set(pa)]
    return pa, pb


def _inv(M: np.ndarray, what: str) -> np.ndarray:
    if M.size == 0:
        return M.copy()
    try:
        cond = np.linalg.cond(M)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularBlock(f"{what} block is singular")
    return np.linalg.inv(M)


def joint_response_params(cp: CovariancePair, a: Iterable[int], side: str = "covariance") -> JointResponseParams:
    """Parameters of the joint-response regression, read from ``Sigma``
    (``side='covariance'``) or from its inverse (``side='concentration'``)."""
    order = cp.order
    pa, pb = _split(order, a)
    ix = np.ix_
    if side == "covariance":
        S = cp.Sigma
        Sbb_inv = _inv(S[ix(pb, pb)], "regressor")
        Pi = S[ix(pa, pb)] @ Sbb_inv
        res = S[ix(pa, pa)] - Pi @ S[ix(pb, pa)]
        conc = Sbb_inv
    elif side == "concentration":
        K = cp.SigmaInv
        res = _inv(K[ix(pa, pa)], "response")
        Pi = -res @ K[ix(pa, pb)]
        conc = K[ix(pb, pb)] - K[ix(pb, pa)] @ res @ K[ix(pa, pb)]
    else:
        raise ValueError(f"unknown side {side!r}")
    return JointResponseParams(
        tuple(order[k] for k in pa), tuple(order[k] for k in pb), Pi, res, conc
    )


# -- systems over regression graphs -------------------------------------------------


@dataclass(frozen=True)
class RegressionSystem:
    """``H X = eta`` with ``cov(eta) = W``, rows and columns in ``order``.

    ``H`` has identity diagonal blocks for the responses, minus the
    regression coefficients at arrows, and the context concentration matrix
    as its last block; ``W`` is block diagonal with the residual covariances
    of the response blocks and again the context concentration matrix.
    """

    graph: RegressionGraph
    H: np.ndarray
    W: np.ndarray
    order: tuple[int, ...]

    @property
    def u_positions(self) -> list[int]:
        return [k for k, n in enumerate(self.order) if n not in self.graph.context]

    @property
    def v_positions(self) -> list[int]:
        return [k for k, n in enumerate(self.order) if n in self.graph.context]

    def context_regression(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(P_{u|v}, Sigma_{uu|v}, Sigma_vv)`` from the blocks of ``H`` and ``W``."""
        u, v = self.u_positions, self.v_positions
        ix = np.ix_
        Huu_inv = np.linalg.inv(self.H[ix(u, u)])
        P = -Huu_inv @ self.H[ix(u, v)]
        Suu_v = Huu_inv @ self.W[ix(u, u)] @ Huu_inv.T
        Svv = np.linalg.inv(self.H[ix(v, v)]) if v else np.zeros((0, 0))
        return P, Suu_v, Svv

    def covariance(self) -> CovariancePair:
        u, v = self.u_positions, self.v_positions
        P, Suu_v, Svv = self.context_regression()
        d = len(self.order)
        S = np.zeros((d, d))
        ix = np.ix_
        S[ix(u, u)] = Suu_v + P @ Svv @ P.T
        S[ix(u, v)] = P @ Svv
        S[ix(v, u)] = (P @ Svv).T
        S[ix(v, v)] = Svv
        S = (S + S.T) / 2
        return CovariancePair.from_sigma(S, self.order)


def _draw(rng: np.random.Generator, size: int | None = None):
    mag = rng.uniform(0.2, 0.9, size)
    sign = rng.choice([-1.0, 1.0], size)
    return mag * sign


def _spd_repair(M: np.ndarray, floor: float = 0.1) -> np.ndarray:
    low = np.linalg.eigvalsh(M).min() if M.size else 1.0
    if low < floor:
        M = M + (floor - low) * np.eye(M.shape[0])
    return M


def sample_system(graph: RegressionGraph, seed: int) -> RegressionSystem:
    """Random parameters respecting the graph's zeros; deterministic per seed."""
    require_valid(graph)
    rng = np.random.default_rng(seed)
    order = graph.order
    pos = graph.position
    d = len(order)
    H = np.eye(d)
    W = np.eye(d)
    for e in graph.edges_of(EdgeKind.ARROW):
        H[pos[e.i], pos[e.j]] = -_draw(rng)
    for e in graph.edges_of(EdgeKind.DASHED):
        W[pos[e.i], pos[e.j]] = W[pos[e.j], pos[e.i]] = _draw(rng)
    for e in graph.edges_of(EdgeKind.FULL):
        H[pos[e.i], pos[e.j]] = H[pos[e.j], pos[e.i]] = _draw(rng)
    for g in graph.responses:
        idx = [pos[n] for n in g]
        W[np.ix_(idx, idx)] = _spd_repair(W[np.ix_(idx, idx)])
    v = [pos[n] for n in graph.context]
    if v:
        C = _spd_repair(H[np.ix_(v, v)])
        H[np.ix_(v, v)] = C
        W[np.ix_(v, v)] = C
    return RegressionSystem(graph, H, W, order)


# -- audits ----------------------------------------------------------------


@dataclass
class AuditReport:
    """Outcome of comparing induced edge matrices with sampled parameters.

    Entries are ``(matrix, i, j)`` with ``matrix`` one of ``'aa_given_b'``,
    ``'a_given_b'``, ``'bb_dot_a'``.
    """

    induced: InducedEdgeSet
    seeds: list[int]
    zero_violations: list[tuple[str, int, int]] = field(default_factory=list)
    unconfirmed_ones: list[tuple[str, int, int]] = field(default_factory=list)
    nonstructural_zeros: list[tuple[str, int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.zero_violations and not self.unconfirmed_ones


def _params_by_name(params: JointResponseParams) -> dict[str, np.ndarray]:
    return {
        "aa_given_b": params.residual_cov,
        "a_given_b": params.coefficients,
        "bb_dot_a": params.regressor_conc,
    }


def structural_zero_audit(
    graph: RegressionGraph,
    a: Iterable[int],
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    systems: Sequence[RegressionSystem] | None = None,
    tol: float = ZERO_TOL,
) -> AuditReport:
    """Check every induced zero against every sampled parameter matrix.

    ``systems`` overrides sampling (one system per seed label) so that
    hand-built parameter constellations can be audited too.
    """
    require_valid(graph)
    a = graph.check_nodes(a)
    induced = induced_for_graph(graph, a)
    if systems is None:
        systems = [sample_system(graph, s) for s in seeds]
        labels = list(seeds)
    else:
        labels = list(seeds)[: len(systems)] or list(range(len(systems)))
    report = AuditReport(induced, labels)
    names = {
        "aa_given_b": (induced.aa_given_b, induced.a, induced.a),
        "a_given_b": (induced.a_given_b, induced.a, induced.b),
        "bb_dot_a": (induced.bb_dot_a, induced.b, induced.b),
    }
    seen_nonzero: dict[tuple[str, int, int], bool] = {}
    for label, system in zip(labels, systems):
        cp = system.covariance()
        params = _params_by_name(joint_response_params(cp, a))
        for name, (E, rows, cols) in names.items():
            values = params[name]
            for r, i in enumerate(rows):
                for c, j in enumerate(cols):
                    if i == j:
                        continue
                    big = abs(values[r, c]) > tol
                    key = (name, i, j)
                    if E.entries[r, c]:
                        seen_nonzero[key] = seen_nonzero.get(key, False) or big
                        if not big:
                            report.nonstructural_zeros.append((name, i, j, label))
                    elif big and key not in report.zero_violations:
                        report.zero_violations.append(key)
    report.unconfirmed_ones = sorted(k for k, hit in seen_nonzero.items() if not hit)
    return report


# -- three-variable identities ---------------------------------------------------------


def _parse_constraint(constraint: str) -> tuple[int, int, frozenset[int]]:
    text = constraint.replace(" ", "")
    i, sep, right = text.partition("_||_")
    if not sep:
        raise InvalidPartition(f"constraint {constraint!r} has no '_||_'")
    j, _, given = right.partition("|")
    try:
        i_, j_ = int(i), int(j)
        c = frozenset(int(x) for x in given.split(",") if x)
    except ValueError:
        raise InvalidPartition(f"constraint {constraint!r} must name single nodes") from None
    if {i_, j_} | c > {1, 2, 3} or i_ == j_ or c & {i_, j_} or len(c) > 1:
        raise InvalidPartition(f"constraint {constraint!r} is not a statement on nodes 1, 2, 3")
    return i_, j_, c


def induced_correlations_3node(rho12: float, rho13: float, rho23: float, constraint: str) -> float:
    """Correlation induced by one independence among three standardized variables.

    For a marginal constraint ``i _||_ j`` the given ``rho_ij`` is replaced by
    zero and the partial correlation of ``i, j`` given the third variable is
    returned.  For ``i _||_ j | k`` the given ``rho_ij`` is replaced by
    ``rho_ik * rho_jk`` and that marginal correlation is returned.
    """
    i, j, c = _parse_constraint(constraint)
    (k,) = {1, 2, 3} - {i, j}
    R = np.eye(3)
    for (p, q), r in {(1, 2): rho12, (1, 3): rho13, (2, 3): rho23}.items():
        if not -1 < r < 1:
            raise NotPositiveDefinite(f"correlation rho{p}{q}={r} outside (-1, 1)")
        R[p - 1, q - 1] = R[q - 1, p - 1] = r
    i0, j0, k0 = i - 1, j - 1, k - 1
    if c:
        R[i0, j0] = R[j0, i0] = R[i0, k0] * R[j0, k0]
    else:
        R[i0, j0] = R[j0, i0] = 0.0
    if np.linalg.det(R) <= 1e-12 or np.linalg.eigvalsh(R).min() <= 0:
        raise NotPositiveDefinite("constrained correlation matrix is not positive definite")
    if c:
        return float(R[i0, j0])
    K = partial_inversion(R, [1, 2, 3])
    return float(-K[i0, j0] / np.sqrt(K[i0, i0] * K[j0, j0]))
