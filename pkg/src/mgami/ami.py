"""Average mutual information over mixture-gamma fading and its high-SNR
characterisation ``log2 M - AMI ~ G_a snr^-G_d``.

Three routes to the AMI are provided:

* :func:`ami_quadrature` - Gauss-Laguerre over each gamma term, with the
  conditional MI evaluated exactly at every node. Accurate while the MI
  varies slowly on the scale of the smallest node; at high SNR the gap is
  confined below the first node and the rule loses it.
* :func:`ami_mc` - Monte Carlo over the fading, MI from the tabulated gap.
* :func:`ami_gap` / :func:`average_mi` - the gap integral rewritten in the
  conditional SNR ``t = snr * a`` and summed on the tabulated log grid;
  keeps full relative accuracy however small the gap is.

The asymptotic coefficient ``coeff`` (G_a) is expressed in nats, matching
``mmse = dI/dsnr`` with I in nats; divide by ``log 2`` for bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import awgn_info
from .awgn_info import MellinValue, mellin_mmse
from .constellation import Constellation
from .mg_fading import EtaMu, FadingParams, KappaMu, KG, MixtureGamma, Nakagami, Rician, _kg_log_theta, sample
from .quadrature import MAX_ORDER, gauss_laguerre

LN2 = math.log(2.0)
BETA_GROUP_TOL = 1e-9


def _check_avg_snr(avg_snr) -> float:
    avg_snr = float(avg_snr)
    if not (avg_snr > 0 and math.isfinite(avg_snr)):
        raise ValueError(f"average SNR must be positive and finite, got {avg_snr}")
    return avg_snr


def ami_quadrature(mg: MixtureGamma, cons: Constellation, avg_snr: float, order: int = 30) -> float:
    """AMI in bits by the Gauss-Laguerre double sum over terms and nodes."""
    avg_snr = _check_avg_snr(avg_snr)
    if isinstance(order, bool) or not 1 <= int(order) <= MAX_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_ORDER}], got {order}")
    rule = gauss_laguerre(int(order))
    cache: dict[float, float] = {}

    def mi(snr):
        if snr not in cache:
            cache[snr] = awgn_info.mutual_information(cons, snr)
        return cache[snr]

    total = 0.0
    for alpha, beta, zeta in mg.terms:
        coef = alpha * zeta ** (-beta)
        for w, tau in zip(rule.weights, rule.nodes):
            if w == 0.0:
                continue
            total += coef * w * tau ** (beta - 1.0) * mi(avg_snr * tau / zeta)
    return min(max(total, 0.0), cons.bits)


def ami_mc(mg: MixtureGamma, cons: Constellation, avg_snr: float, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo AMI in bits: ``(mean, standard error)``."""
    avg_snr = float(avg_snr)
    if not (avg_snr >= 0 and math.isfinite(avg_snr)):
        raise ValueError(f"average SNR must be finite and >= 0, got {avg_snr}")
    if trials < 1000:
        raise ValueError("Monte Carlo needs at least 1000 trials")
    a = sample(mg, seed, int(trials))
    table = awgn_info.info_table(cons)
    mi = cons.bits - table.gap_at(avg_snr * a) / LN2
    mi = np.clip(mi, 0.0, cons.bits)
    return float(mi.mean()), float(mi.std(ddof=1) / math.sqrt(mi.size))


def ami_gap(mg: MixtureGamma, cons: Constellation, avg_snr: float) -> float:
    """``log2 M - AMI`` in bits, computed without cancellation.

    Term ``l`` contributes its mixing weight times the mean conditional gap
    under ``t ~ Gamma(beta_l, snr / zeta_l)``, read off the tabulated grid.
    """
    avg_snr = _check_avg_snr(avg_snr)
    table = awgn_info.info_table(cons)
    weights = mg.component_weights
    total = 0.0
    for w, beta, zeta in zip(weights, mg.beta, mg.zeta):
        total += float(w) * float(table.gap_mean(beta, avg_snr / zeta)[0])
    return max(total, 0.0) / LN2


def average_mi(mg: MixtureGamma, cons: Constellation, avg_snr: float) -> float:
    """AMI in bits via :func:`ami_gap`."""
    return cons.bits - ami_gap(mg, cons, avg_snr)


# --------------------------------------------------------------------------
# asymptotics


@dataclass(frozen=True)
class AsymptoticCharacterization:
    diversity_order: float
    coeff: float
    coeff_fading_part: float
    mellin: MellinValue
    coding_gain: float
    ami_limit_bits: float

    @property
    def coeff_bits(self) -> float:
        """Leading gap coefficient when the gap is measured in bits."""
        return self.coeff / LN2


def _assemble(diversity, fading_part, cons: Constellation) -> AsymptoticCharacterization:
    mel = mellin_mmse(cons, diversity)
    coeff = fading_part * mel.value
    return AsymptoticCharacterization(
        diversity_order=float(diversity),
        coeff=coeff,
        coeff_fading_part=float(fading_part),
        mellin=mel,
        coding_gain=coeff ** (-1.0 / diversity),
        ami_limit_bits=cons.bits,
    )


def characterize_asymptote(mg: MixtureGamma, cons: Constellation) -> AsymptoticCharacterization:
    """Diversity order and coefficient from the smallest-beta terms."""
    b1 = mg.min_beta
    lead = np.abs(mg.beta - b1) <= BETA_GROUP_TOL
    fading_part = float(mg.alpha[lead].sum()) / b1
    return _assemble(b1, fading_part, cons)


def asymptotic_ami(ch: AsymptoticCharacterization, avg_snr: float) -> float:
    """Leading-order AMI in bits, ``log2 M - G_a snr^-G_d`` (G_a converted
    to bits). Not clamped: may be negative at low SNR."""
    avg_snr = _check_avg_snr(avg_snr)
    return ch.ami_limit_bits - asymptotic_gap(ch, avg_snr)


def asymptotic_gap(ch: AsymptoticCharacterization, avg_snr: float) -> float:
    """Leading-order gap in bits."""
    return ch.coeff_bits * float(avg_snr) ** (-ch.diversity_order)


def corollary_fading_part(p: FadingParams) -> tuple[float, float]:
    """Closed-form ``(diversity order, G_a / Mellin value)`` per family."""
    if isinstance(p, Nakagami):
        m = p.m
        return m, math.exp((m - 1.0) * math.log(m) - special.gammaln(m))
    if isinstance(p, EtaMu):
        h, H = p.h_H
        mu = p.mu
        log_a1 = (
            math.log(2.0 * math.sqrt(math.pi)) + 2 * mu * math.log(mu) + mu * math.log(h * h - H * H)
            - special.gammaln(mu) - special.gammaln(mu + 0.5)
        )
        return 2 * mu, math.exp(log_a1) / (2 * mu)
    if isinstance(p, Rician):
        if p.K == 0:
            return 1.0, 1.0
        p = KappaMu(p.K, 1.0)
    if isinstance(p, KappaMu):
        k, mu = p.kappa, p.mu
        log_a1 = mu * math.log(mu) + mu * math.log1p(k) - mu * k - special.gammaln(mu)
        return mu, math.exp(log_a1) / mu
    if isinstance(p, KG):
        # sum of alpha_l taken as sum of theta_l (the node sum normalises to 1)
        log_theta, _, _ = _kg_log_theta(p)
        return p.m, float(np.exp(special.logsumexp(log_theta))) / p.m
    raise TypeError(f"unsupported fading parameters {p!r}")


def corollary_asymptote(p: FadingParams, cons: Constellation) -> AsymptoticCharacterization:
    """Characterisation from the per-family closed forms, without building
    the mixture."""
    diversity, fading_part = corollary_fading_part(p)
    return _assemble(diversity, fading_part, cons)
