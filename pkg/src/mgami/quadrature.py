"""Gaussian quadrature rules (Gauss-Laguerre and Gauss-Hermite).

Nodes come from the symmetric tridiagonal Jacobi matrix of the three-term
recurrence (Golub-Welsch), polished by Newton steps on the recurrence.
Weights are evaluated in log space from the Christoffel function so that
weights far below the double-precision floor of the eigenvector route keep
their relative accuracy.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_ORDER = 200

Kind = Literal["laguerre", "hermite"]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of an ``order``-point Gaussian rule.

    ``laguerre`` integrates against ``exp(-t)`` on ``[0, inf)``;
    ``hermite`` integrates against ``exp(-t**2)`` on the real line.
    """

    kind: Kind
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        """Apply the rule to a vectorised callable ``f``."""
        return float(np.dot(self.weights, f(self.nodes)))


def _recurrence(kind: Kind, n: int):
    k = np.arange(n, dtype=float)
    if kind == "laguerre":
        diag = 2.0 * k + 1.0
        off = k[1:].copy()
        log_mu0 = 0.0
    else:
        diag = np.zeros(n)
        off = np.sqrt(k[1:] / 2.0)
        log_mu0 = 0.5 * math.log(math.pi)
    return diag, off, log_mu0


def _christoffel(x: np.ndarray, diag, off, log_mu0):
    """Return log of sum_k p_k(x)**2 for the orthonormal family, plus
    p_n(x)/scale and p_n'(x)/scale used for Newton polishing."""
    n = len(diag)
    # orthonormal recurrence: b_{k+1} p_{k+1} = (x - a_k) p_k - b_k p_{k-1}
    b = np.concatenate([[0.0], off, [_next_off(diag, off)]])
    p_prev = np.zeros_like(x)
    p = np.full_like(x, math.exp(-0.5 * log_mu0))
    dp_prev = np.zeros_like(x)
    dp = np.zeros_like(x)
    log_scale = np.zeros_like(x)
    acc = p * p
    for k in range(n):
        p_next = ((x - diag[k]) * p - b[k] * p_prev) / b[k + 1]
        dp_next = (p + (x - diag[k]) * dp - b[k] * dp_prev) / b[k + 1]
        p_prev, p, dp_prev, dp = p, p_next, dp, dp_next
        if k < n - 1:
            acc = acc + p * p
        s = np.maximum(np.abs(p), np.abs(p_prev))
        s = np.where(s > 1e100, s, 1.0)
        p, p_prev, dp, dp_prev = p / s, p_prev / s, dp / s, dp_prev / s
        acc = acc / (s * s)
        log_scale = log_scale + np.log(s)
    return np.log(acc) + 2.0 * log_scale, p, dp


def _next_off(diag, off):
    # b_n for the polynomial of degree n; both families have closed forms
    n = len(diag)
    if diag[0] == 1.0:
        return float(n)
    return math.sqrt(n / 2.0)


@functools.lru_cache(maxsize=None)
def _rule(kind: Kind, order: int) -> QuadratureRule:
    diag, off, log_mu0 = _recurrence(kind, order)
    if order == 1:
        nodes = diag.copy()
    else:
        nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    for _ in range(3):
        _, pn, dpn = _christoffel(nodes, diag, off, log_mu0)
        step = np.where(dpn != 0.0, pn / dpn, 0.0)
        nodes = nodes - step
    if kind == "hermite":
        nodes = 0.5 * (nodes - nodes[::-1])
    nodes = np.sort(nodes)
    log_k, _, _ = _christoffel(nodes, diag, off, log_mu0)
    weights = np.exp(-log_k)
    if kind == "hermite":
        weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(kind, order, nodes, weights)


def _check_order(order) -> int:
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ValueError(f"quadrature order must be an integer, got {order!r}")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"quadrature order must lie in [1, {MAX_ORDER}], got {order}")
    return int(order)


def gauss_laguerre(order: int) -> QuadratureRule:
    """Gauss-Laguerre rule for ``int_0^inf exp(-t) g(t) dt``."""
    return _rule("laguerre", _check_order(order))


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule for ``int exp(-t**2) g(t) dt``."""
    return _rule("hermite", _check_order(order))
