"""Sampling-free Koopman matrices via quadrature.

Builds A = M_T G^{-1} where G is the Gram matrix of the dictionary under the
reference measure and M_T is the transfer matrix with entries
integral of psi_i(T x) conj(psi_j(x)).  Closed-form integrals are not
special-cased: for polynomial maps and dictionaries an exact Gauss rule is
mathematically equivalent and keeps a single code path; for everything else
the quadrature order is escalated until two successive orders agree.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import systems
from .dictionary import Dictionary, evaluate_batch, gram
from .edmd import KoopmanMatrix
from .errors import DomainEscapeError, DomainEscapeWarning, QuadratureSaturationWarning
from .systems import DynamicalSystem, Measure, QuadratureRule

_EPS = np.finfo(float).eps
_MAX_NODES = 2**14
_AGREEMENT = 1e-12


def transfer_matrix(system: DynamicalSystem, dic: Dictionary, rule: QuadratureRule) -> np.ndarray:
    """Matrix of inner products of composed observables against the dictionary:
    entry (i, j) = sum_k w_k psi_i(T x_k) conj(psi_j(x_k)).

    Raises DomainEscapeError if the map sends a quadrature node outside the
    domain, since the integrand is then evaluated where the dictionary has no
    meaning.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", DomainEscapeWarning)
        try:
            tx = systems.apply_batch(system, rule.nodes)
        except DomainEscapeWarning as w:
            raise DomainEscapeError(str(w)) from None
    psi_x = evaluate_batch(dic, rule.nodes)
    psi_tx = evaluate_batch(dic, tx)
    return (psi_tx * rule.weights) @ psi_x.conj().T


def default_quad_order(system: DynamicalSystem, dic: Dictionary) -> int | None:
    """Order guaranteeing exact integrals, or None when escalation is needed.

    For a polynomial map of degree t and a polynomial dictionary of size N the
    worst integrand degree is (N-1)(t+1), covered by max(64, N*t) Gauss nodes.
    On circle domains the periodic rule is exact for trigonometric integrands
    of frequency below the node count.
    """
    if dic.domain.kind == "circle":
        return max(64, 4 * dic.param + 1)
    if system.polynomial_degree is not None and dic.family in ("legendre", "monomial"):
        return max(64, dic.size * system.polynomial_degree)
    return None


def _build(system, dic, measure, order):
    rule = systems.gauss_rule(measure, order)
    return gram(dic, rule), transfer_matrix(system, dic, rule)


def fit_analytic(
    system: DynamicalSystem,
    dic: Dictionary,
    measure: Measure,
    quad_order: int | None = None,
) -> KoopmanMatrix:
    """Sampling-free construction A = M_T G^{-1}.

    When the dictionary is orthonormal under ``measure`` the Gram solve is
    skipped and A equals the transfer matrix exactly.  A numerically singular
    Gram raises RankDeficiencyError through the projection machinery.
    """
    if quad_order is not None:
        order = quad_order
        g, m_t = _build(system, dic, measure, order)
    else:
        order = default_quad_order(system, dic)
        if order is not None:
            g, m_t = _build(system, dic, measure, order)
        else:
            order = 64
            while order < dic.size:  # a rule with fewer nodes than N is singular
                order *= 2
            g, m_t = _build(system, dic, measure, order)
            while True:
                nxt = order * 2
                if nxt > _MAX_NODES:
                    warnings.warn(
                        f"quadrature saturation: {order} nodes reached without "
                        f"{_AGREEMENT:g} agreement",
                        QuadratureSaturationWarning,
                        stacklevel=2,
                    )
                    break
                g2, m2 = _build(system, dic, measure, nxt)
                prev = _solve(m_t, g, dic, measure)
                cur = _solve(m2, g2, dic, measure)
                g, m_t, order = g2, m2, nxt
                if np.linalg.norm(cur - prev) <= _AGREEMENT:
                    break
    a = _solve(m_t, g, dic, measure)
    lam = np.linalg.eigvalsh(g)
    return KoopmanMatrix(
        A=np.ascontiguousarray(a, dtype=complex),
        dictionary=dic,
        provenance=f"analytic:order={order}",
        sigma_max=float(lam[-1]),
        sigma_min=float(max(lam[0], 0.0)),
    )


def _solve(m_t, g, dic, measure):
    if dic.orthonormal_wrt == measure:
        return m_t
    n = g.shape[0]
    lam, v = np.linalg.eigh(g)
    cutoff = n * _EPS * lam[-1]
    if lam[0] <= cutoff:
        from .errors import RankDeficiencyError

        cond = np.inf if lam[0] <= 0 else lam[-1] / lam[0]
        raise RankDeficiencyError("Gram matrix of the dictionary", cond, cutoff)
    # A = M_T G^{-1} through the eigenfactorization of the Hermitian G
    return (m_t @ v / lam) @ v.conj().T
