"""Power allocation over parallel mixture-gamma fading sub-channels.

Maximises ``sum_k E[I(a_k p_k snr)]`` subject to ``sum p_k = 1, p_k >= 0``
when the transmitter knows only the fading distributions. The exact
solver works from the KKT conditions: every active channel has
``snr E[a mmse(a p snr)] = nu`` and inactive ones have ``snr <= nu``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import awgn_info
from .ami import AsymptoticCharacterization, average_mi, characterize_asymptote
from .constellation import Constellation
from .errors import SolverError
from .mg_fading import MixtureGamma
from .quadrature import gauss_laguerre

DIVERSITY_TOL = 1e-9
SUM_TOL = 1e-9
MAX_OUTER_ITER = 200


@dataclass(frozen=True)
class Subchannel:
    fading: MixtureGamma
    cons: Constellation
    asym: AsymptoticCharacterization | None = None

    def __post_init__(self):
        if self.asym is None:
            object.__setattr__(self, "asym", characterize_asymptote(self.fading, self.cons))
        elif abs(self.asym.diversity_order - self.fading.min_beta) > 1e-12:
            raise ValueError("asymptotic characterisation does not match the fading mixture")


@dataclass(frozen=True)
class ParallelChannels:
    subchannels: tuple

    def __post_init__(self):
        subs = tuple(self.subchannels)
        if not subs:
            raise ValueError("need at least one sub-channel")
        object.__setattr__(self, "subchannels", subs)

    @classmethod
    def build(cls, pairs) -> "ParallelChannels":
        """From ``(fading, constellation)`` pairs."""
        return cls(tuple(Subchannel(mg, cons) for mg, cons in pairs))

    @property
    def count(self) -> int:
        return len(self.subchannels)

    @property
    def diversity(self) -> np.ndarray:
        return np.array([s.asym.diversity_order for s in self.subchannels])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([s.asym.coeff for s in self.subchannels])


@dataclass(frozen=True)
class PowerPolicy:
    fractions: tuple
    multiplier: float
    method: str
    objective_bits: float
    avg_snr: float | None = None

    def to_dict(self) -> dict:
        nu = self.multiplier if math.isfinite(self.multiplier) else None
        db = None if not self.avg_snr else 10.0 * math.log10(self.avg_snr)
        obj = self.objective_bits if math.isfinite(self.objective_bits) else None
        return {
            "method": self.method,
            "nu": nu,
            "fractions": list(self.fractions),
            "objective_bits": obj,
            "gamma_bar_db": db,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --------------------------------------------------------------------------
# marginal rate


def marginal_rate(mg: MixtureGamma, cons: Constellation, p: float, avg_snr: float, order: int | None = None) -> float:
    """``-dS/dp_k = snr * E[a mmse(a p snr)]`` (nats per unit power).

    Writing ``a f(a)`` as a mixture of ``Gamma(beta_l + 1, 1/zeta_l)``
    densities, each term is a gamma-weighted mean of the MMSE read off
    the tabulated log grid; that stays accurate when the mass of ``mmse``
    sits far below the first Laguerre node. Passing ``order`` forces plain
    Gauss-Laguerre with that many nodes.
    """
    p = float(p)
    avg_snr = float(avg_snr)
    if not (p >= 0 and math.isfinite(p)):
        raise ValueError(f"power fraction must be finite and >= 0, got {p}")
    if not (avg_snr > 0 and math.isfinite(avg_snr)):
        raise ValueError(f"average SNR must be positive, got {avg_snr}")
    if p == 0.0:
        return avg_snr
    eff = p * avg_snr
    weights = mg.component_weights * mg.beta / mg.zeta
    if order is None:
        table = awgn_info.info_table(cons)
        means = [float(table.mmse_mean(b + 1.0, eff / z)[0]) for b, z in zip(mg.beta, mg.zeta)]
    else:
        rule = gauss_laguerre(order)
        log_w = np.log(rule.weights)
        means = []
        for b, z in zip(mg.beta, mg.zeta):
            mm = np.array([awgn_info.mmse(cons, eff * t / z) for t in rule.nodes])
            # Laguerre weights times t^beta / Gamma(beta + 1) in log space
            w = np.exp(log_w + b * np.log(rule.nodes) - special.gammaln(b + 1.0))
            means.append(float(w @ mm))
    return avg_snr * float(np.dot(weights, means))


class _Marginal:
    """Marginal rate of one sub-channel, vectorised over mixture terms."""

    def __init__(self, sub: Subchannel, avg_snr: float):
        self.sub = sub
        self.avg_snr = avg_snr
        table = self.table = awgn_info.info_table(sub.cons)
        mg = sub.fading
        self.zeta = mg.zeta
        self.shape = mg.beta + 1.0
        self.weights = mg.component_weights * mg.beta / mg.zeta
        self.log_body = math.log(table.step) + self.shape[:, None] * table.u[None, :]
        q = np.exp(-self.shape * table.step)
        self.log_head = math.log(table.step) + self.shape * table.u[0] + np.log(q / (1.0 - q))

    def __call__(self, p: float) -> float:
        if p <= 0.0:
            return self.avg_snr
        scale = p * self.avg_snr / self.zeta
        if scale.min() < awgn_info.SMALL_SCALE:
            return marginal_rate(self.sub.fading, self.sub.cons, p, self.avg_snr)
        log_norm = special.gammaln(self.shape) + self.shape * np.log(scale)
        log_w = self.log_body - self.table.t[None, :] / scale[:, None] - log_norm[:, None]
        means = np.exp(log_w) @ self.table.mmse + np.exp(self.log_head - log_norm)
        return self.avg_snr * float(np.dot(self.weights, means))


def _fraction_for(rate: _Marginal, nu: float, top: float) -> float:
    """Solve rate(p) = nu for p in [0, 1]; rate is strictly decreasing."""
    if rate.avg_snr <= nu:
        return 0.0
    if top >= nu:
        return 1.0
    g = lambda lp: math.log(rate(math.exp(lp))) - math.log(nu)
    lo = -3.0
    while g(lo) <= 0.0:
        lo *= 2.0
        if lo < -600:
            return 0.0
    lp = optimize.brentq(g, lo, 0.0, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=300)
    return math.exp(lp)


def objective(chs: ParallelChannels, fractions, avg_snr: float) -> float:
    """Sum of sub-channel AMIs in bits."""
    total = 0.0
    for sub, p in zip(chs.subchannels, fractions):
        if p > 0:
            total += average_mi(sub.fading, sub.cons, p * avg_snr)
    return total


def exact_allocate(chs: ParallelChannels, avg_snr: float, max_iter: int = MAX_OUTER_ITER) -> PowerPolicy:
    """Optimal policy from the KKT conditions (nested monotone root finds)."""
    avg_snr = float(avg_snr)
    if not (avg_snr > 0 and math.isfinite(avg_snr)):
        raise ValueError(f"average SNR must be positive, got {avg_snr}")
    rates = [_Marginal(s, avg_snr) for s in chs.subchannels]
    tops = [r(1.0) for r in rates]
    if chs.count == 1:
        return PowerPolicy((1.0,), tops[0], "exact_kkt", objective(chs, (1.0,), avg_snr), avg_snr)

    def fractions(log_nu):
        nu = math.exp(log_nu)
        return [_fraction_for(r, nu, top) for r, top in zip(rates, tops)]

    f = lambda log_nu: sum(fractions(log_nu)) - 1.0
    lo, hi = math.log(min(tops)), math.log(avg_snr)
    if f(lo) < 0 or f(hi) > 0:
        raise SolverError("could not bracket the KKT multiplier", residual=f(lo))
    try:
        log_nu, info = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                       maxiter=max_iter, full_output=True, disp=False)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"KKT multiplier search failed: {exc}") from exc
    ps = fractions(log_nu)
    residual = abs(sum(ps) - 1.0)
    if not info.converged or residual > SUM_TOL:
        raise SolverError(f"KKT solve did not converge: |sum p - 1| = {residual:.3g}", residual=residual)
    ps = [p / sum(ps) for p in ps]
    return PowerPolicy(tuple(ps), math.exp(log_nu), "exact_kkt", objective(chs, ps, avg_snr), avg_snr)


def kkt_residuals(chs: ParallelChannels, policy: PowerPolicy, avg_snr: float) -> dict:
    """Certificate for the KKT conditions: the worst relative mismatch of
    active channels and the worst excess ``rate(0) - nu`` of inactive ones."""
    nu = policy.multiplier
    active = 0.0
    inactive = -math.inf
    for sub, p in zip(chs.subchannels, policy.fractions):
        rate = marginal_rate(sub.fading, sub.cons, p, avg_snr)
        if p > 0:
            active = max(active, abs(rate - nu) / nu)
        else:
            inactive = max(inactive, rate - nu)
    return {"active_rel": active, "inactive_excess": inactive}


def asymptotic_allocate(chs: ParallelChannels, avg_snr: float) -> PowerPolicy:
    """High-SNR policy ``p_k = (A_k D_k / (nu snr^D_k))^(1/(D_k+1))`` with nu
    fixed by ``sum p_k = 1``."""
    avg_snr = float(avg_snr)
    if not (avg_snr > 0 and math.isfinite(avg_snr)):
        raise ValueError(f"average SNR must be positive, got {avg_snr}")
    D = chs.diversity
    A = chs.coeffs
    if chs.count == 1:
        nu = A[0] * D[0] / avg_snr ** D[0]
        return PowerPolicy((1.0,), nu, "asymptotic", objective(chs, (1.0,), avg_snr), avg_snr)
    base = np.log(A * D) - D * math.log(avg_snr)

    def log_p(log_nu):
        return (base - log_nu) / (D + 1.0)

    f = lambda log_nu: float(np.exp(log_p(log_nu)).sum()) - 1.0
    # p_k = 1 for each channel brackets the root
    anchors = base
    lo, hi = anchors.min() - 1.0, anchors.max() + 1.0
    while f(lo) < 0:
        lo -= 10.0
    while f(hi) > 0:
        hi += 10.0
    try:
        log_nu = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=MAX_OUTER_ITER)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"asymptotic multiplier search failed: {exc}") from exc
    ps = np.exp(log_p(log_nu))
    ps = ps / ps.sum()
    return PowerPolicy(tuple(float(p) for p in ps), math.exp(log_nu), "asymptotic",
                       objective(chs, ps, avg_snr), avg_snr)


def limiting_allocate(chs: ParallelChannels, avg_snr: float | None = None) -> PowerPolicy:
    """Infinite-SNR limit: lowest-diversity channels share power in
    proportion to ``A_k^(1/(D_min+1))``; all others get nothing.

    The multiplier is not defined in the limit and is reported as NaN.
    """
    D = chs.diversity
    A = chs.coeffs
    d_min = D.min()
    lead = np.abs(D - d_min) <= DIVERSITY_TOL
    shares = np.where(lead, A ** (1.0 / (d_min + 1.0)), 0.0)
    ps = shares / shares.sum()
    obj = objective(chs, ps, avg_snr) if avg_snr else math.nan
    return PowerPolicy(tuple(float(p) for p in ps), math.nan, "limiting", obj, avg_snr)


def uniform_policy(chs: ParallelChannels, avg_snr: float) -> PowerPolicy:
    ps = [1.0 / chs.count] * chs.count
    return PowerPolicy(tuple(ps), math.nan, "uniform", objective(chs, ps, avg_snr), avg_snr)
