import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from mgami.ami import (
    ami_gap,
    ami_mc,
    ami_quadrature,
    asymptotic_ami,
    asymptotic_gap,
    average_mi,
    characterize_asymptote,
    corollary_asymptote,
)
from mgami.awgn_info import gap_and_mmse, mellin_mmse, mutual_information
from mgami.constellation import make_psk, make_qam
from mgami.mg_fading import KG, EtaMu, KappaMu, MixtureGamma, Nakagami, Rician, from_params

QAM4 = make_qam(4)
RAYLEIGH = from_params(Nakagami(1.0))
SWEEP = (
    [Nakagami(m) for m in (0.5, 1, 2, 4)]
    + [EtaMu(1, eta, mu) for eta in (0.25, 4) for mu in (0.5, 1, 2)]
    + [KappaMu(k, mu) for k in (1, 2, 5) for mu in (1, 2)]
    + [KG(k, m, n) for k in (2, 4) for m in (1, 2) for n in (20, 30)]
    + [Rician(0.0), Rician(3.0)]
)


def direct_ami(mg, cons, avg_snr):
    """Oracle: adaptive quadrature of pdf(a) I(avg_snr a) over each gamma term."""
    total = 0.0
    for alpha, beta, zeta in mg.terms:
        f = lambda a: alpha * a ** (beta - 1) * math.exp(-zeta * a) * mutual_information(cons, avg_snr * a)
        val, _ = integrate.quad(f, 0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=400)
        total += val
    return total


def test_small_snr_limit():
    assert ami_quadrature(RAYLEIGH, make_psk(2), 1e-9) < 1e-8
    assert 0.0 <= average_mi(RAYLEIGH, make_psk(2), 1e-9) < 1e-8


def test_quadrature_against_monte_carlo():
    mean, se = ami_mc(RAYLEIGH, QAM4, 10.0, 10**6, seed=3)
    assert abs(ami_quadrature(RAYLEIGH, QAM4, 10.0) - mean) < 3 * se


def test_bpsk_cross_oracle():
    mean, se = ami_mc(RAYLEIGH, make_psk(2), 4.0, 10**5, seed=4)
    assert abs(ami_quadrature(RAYLEIGH, make_psk(2), 4.0) - mean) < 3 * se


def test_quadrature_order_convergence():
    mg = from_params(Nakagami(2.0))
    assert abs(ami_quadrature(mg, QAM4, 1.0, 30) - ami_quadrature(mg, QAM4, 1.0, 60)) < 1e-6


@pytest.mark.parametrize("p", [Nakagami(1.0), Nakagami(2.0), KappaMu(2.0, 1.0)])
@pytest.mark.parametrize("snr", [0.5, 5.0, 50.0])
def test_gap_route_against_direct_integral(p, snr):
    mg = from_params(p)
    assert average_mi(mg, QAM4, snr) == pytest.approx(direct_ami(mg, QAM4, snr), rel=1e-8)


def test_gap_route_matches_quadrature_where_resolved():
    mg = from_params(Nakagami(2.0))
    for snr in (0.3, 1.0, 3.0):
        assert average_mi(mg, QAM4, snr) == pytest.approx(ami_quadrature(mg, QAM4, snr, 200), abs=1e-8)


def test_mc_range_and_determinism():
    mg = from_params(EtaMu(1, 4.0, 1.0))
    a = ami_mc(mg, QAM4, 0.01, 2000, seed=9)
    assert 0.0 <= a[0] <= 2.0
    assert ami_mc(mg, QAM4, 3.0, 5000, seed=9) == ami_mc(mg, QAM4, 3.0, 5000, seed=9)
    with pytest.raises(ValueError):
        ami_mc(mg, QAM4, 3.0, 999, seed=9)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf])
def test_rejects_bad_snr(bad):
    with pytest.raises(ValueError):
        ami_quadrature(RAYLEIGH, QAM4, bad)


@pytest.mark.parametrize("order", [0, 201])
def test_rejects_bad_order(order):
    with pytest.raises(ValueError):
        ami_quadrature(RAYLEIGH, QAM4, 1.0, order)


@given(st.sampled_from([Nakagami(1.0), Nakagami(2.0), KappaMu(1.0, 2.0)]), st.floats(-20.0, 40.0), st.floats(0.1, 10.0))
def test_ami_nondecreasing(p, db, step):
    mg = from_params(p)
    lo, hi = 10 ** (db / 10), 10 ** ((db + step) / 10)
    assert ami_quadrature(mg, QAM4, lo) <= ami_quadrature(mg, QAM4, hi) + 1e-12
    assert average_mi(mg, QAM4, lo) <= average_mi(mg, QAM4, hi) + 1e-12


@pytest.mark.parametrize("p", SWEEP, ids=repr)
def test_characterization_invariants(p):
    mg = from_params(p)
    ch = characterize_asymptote(mg, QAM4)
    b1 = mg.beta.min()
    assert abs(ch.diversity_order - b1) < 1e-12
    assert ch.coeff == pytest.approx(ch.coeff_fading_part * ch.mellin.value, rel=1e-12)
    lead = np.abs(mg.beta - b1) <= 1e-9
    assert ch.coeff_fading_part == pytest.approx(mg.alpha[lead].sum() / b1, rel=1e-12)
    assert ch.coding_gain == pytest.approx(ch.coeff ** (-1 / ch.diversity_order), rel=1e-12)
    assert ch.ami_limit_bits == 2.0


def test_nakagami_closed_form():
    for m in (1.0, 2.0, 3.5):
        ch = characterize_asymptote(from_params(Nakagami(m)), QAM4)
        expected = m ** (m - 1) / math.gamma(m) * mellin_mmse(QAM4, m).value
        assert ch.diversity_order == m
        assert ch.coeff == pytest.approx(expected, rel=1e-12)


def test_family_diversity_orders():
    assert characterize_asymptote(from_params(KappaMu(1.0, 2.0)), make_psk(2)).diversity_order == 2.0
    assert characterize_asymptote(from_params(EtaMu(1, 4.0, 1.0)), make_psk(2)).diversity_order == 2.0
    assert characterize_asymptote(from_params(KG(4.0, 2.0, 30)), QAM4).diversity_order == 2.0


def test_corollary_closed_forms():
    assert corollary_asymptote(Nakagami(2.0), make_psk(2)).coeff_fading_part == pytest.approx(2.0, rel=1e-14)
    assert corollary_asymptote(KappaMu(2.0, 1.0), QAM4).coeff_fading_part == pytest.approx(3 * math.exp(-2), rel=1e-14)


@pytest.mark.parametrize("cons", [make_psk(2), make_qam(4), make_qam(16)], ids=["bpsk", "qam4", "qam16"])
@pytest.mark.parametrize("p", SWEEP + [EtaMu(2, 0.5, 1.5)], ids=repr)
def test_corollary_matches_general_path(p, cons):
    a = corollary_asymptote(p, cons)
    b = characterize_asymptote(from_params(p), cons)
    assert a.diversity_order == pytest.approx(b.diversity_order, rel=1e-6)
    assert a.coeff == pytest.approx(b.coeff, rel=1e-6)


def test_argmin_invariance():
    # shift mass between non-leading terms; the beta = 1 term is untouched
    def gamma_term(weight, beta, zeta):
        return (weight * zeta**beta / special.gamma(beta), beta, zeta)

    base = MixtureGamma((gamma_term(0.5, 1.0, 1.0), gamma_term(0.5, 3.0, 3.0)))
    extended = MixtureGamma((gamma_term(0.5, 1.0, 1.0), gamma_term(0.3, 3.0, 3.0), gamma_term(0.2, 4.5, 2.0)))
    a = characterize_asymptote(base, QAM4)
    b = characterize_asymptote(extended, QAM4)
    assert (a.diversity_order, a.coeff_fading_part) == (b.diversity_order, b.coeff_fading_part)


def test_asymptotic_formula():
    ch = characterize_asymptote(from_params(Nakagami(2.0)), QAM4)
    assert asymptotic_ami(ch, 1e12) == pytest.approx(2.0, abs=1e-15)
    g1, g2 = asymptotic_gap(ch, 1e3), asymptotic_gap(ch, 2e3)
    assert g1 / g2 == pytest.approx(2.0**ch.diversity_order, rel=1e-12)
    assert asymptotic_ami(ch, 1e-3) < 0  # no clamping at low SNR
    assert ch.coeff_bits == pytest.approx(ch.coeff / math.log(2), rel=1e-15)


def test_rayleigh_gap_ratio_by_30db():
    ch = characterize_asymptote(RAYLEIGH, QAM4)
    ratio = ami_gap(RAYLEIGH, QAM4, 1e3) / asymptotic_gap(ch, 1e3)
    assert 0.95 < ratio < 1.05


@pytest.mark.parametrize("p", [Nakagami(1.0), Nakagami(2.0), KappaMu(1.0, 2.0), EtaMu(1, 4.0, 1.0)], ids=repr)
def test_asymptote_error_shrinks(p):
    mg = from_params(p)
    ch = characterize_asymptote(mg, QAM4)
    d = ch.diversity_order
    snrs = np.logspace(2.5 / d + 1, 2.5 / d + 2, 6)
    err = [abs(ami_gap(mg, QAM4, s) / asymptotic_gap(ch, s) - 1) for s in snrs]
    assert np.all(np.diff(err) < 0)
    assert err[-1] < 0.05


def test_gap_stays_accurate_when_tiny():
    # the gap at very high SNR follows the asymptote to many digits
    ch = characterize_asymptote(RAYLEIGH, QAM4)
    assert ami_gap(RAYLEIGH, QAM4, 1e8) / asymptotic_gap(ch, 1e8) == pytest.approx(1.0, abs=1e-5)
