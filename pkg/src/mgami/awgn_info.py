"""Mutual information, MMSE and the MMSE Mellin transform of the scalar
complex Gaussian channel ``Y = sqrt(snr) S + Z`` with ``Z ~ CN(0, 1)`` and
``S`` uniform on a finite constellation.

Units: :func:`mutual_information` returns bits. The MMSE is the derivative
of the mutual information *in nats* with respect to the SNR, so the gap
helpers and the I-MMSE check work in nats.

Expectations over the noise are computed per real axis. Square QAM and
other Cartesian-product alphabets separate exactly into two independent
PAM problems, each a 1-D integral; anything else uses a 2-D tensor rule.
The 1-D rule is Gauss-Hermite at low SNR and, once the scaled distances
grow, a composite Gauss-Legendre rule on a window wide enough to resolve
the decision boundaries, whose transition width shrinks like 1/sqrt(snr).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .constellation import Constellation
from .errors import NumericalError
from .quadrature import gauss_hermite

GH_ORDER = 48
GL_PANEL_NODES = 12
# Gaussian mass outside the window is below exp(-WINDOW_SLACK) relative to
# the leading pairwise-error term
WINDOW_SLACK = 30.0
MAX_AXIS_NODES_2D = 480
TINY_MMSE = 1e-320
# beyond this exponent (snr * d_min**2 / 4) both mmse and the MI gap
# underflow in double precision
UNDERFLOW_EXPONENT = 740.0
# gamma-weighted table averages switch to the small-SNR expansion below
# this scale (the table starts at 1e-16)
SMALL_SCALE = 1e-12


def _check_snr(snr) -> float:
    snr = float(snr)
    if not math.isfinite(snr) or snr < 0:
        raise ValueError(f"SNR must be finite and >= 0, got {snr}")
    return snr


# --------------------------------------------------------------------------
# per-axis noise rules: nodes a and probabilities w for a ~ N(0, 1/2)


@functools.lru_cache(maxsize=None)
def _gl_panel():
    x, w = np.polynomial.legendre.leggauss(GL_PANEL_NODES)
    return x, w


def _axis_rule(snr: float, d_min: float, d_max: float, cap: int | None = None):
    spread = math.sqrt(snr) * d_max
    if spread <= 1.0:
        rule = gauss_hermite(GH_ORDER)
        return rule.nodes, rule.weights / math.sqrt(math.pi)
    reach = math.sqrt(snr * d_min**2 / 4.0 + WINDOW_SLACK) + 1.5
    widest = min(2.0 * reach, spread)
    # keep panels inside ~0.6x the distance to the softplus poles
    width = min(0.6, 1.9 / widest)
    n_panels = int(math.ceil(2.0 * reach / width))
    if cap is not None:
        n_panels = min(n_panels, max(cap // GL_PANEL_NODES, 8))
    edges = np.linspace(-reach, reach, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x, w = _gl_panel()
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel() * np.exp(-nodes**2) / math.sqrt(math.pi)
    return nodes, weights


# --------------------------------------------------------------------------
# kernels: return (gap_nats, mmse) at one SNR


def _pairwise_terms(exponents: np.ndarray, j: int, offsets: np.ndarray):
    """Given ``exponents[n, k] = |z|^2 - |z + d_k|^2`` (zero in column j),
    return the per-node log-partition and the error vector sum_k p_k (x_j - x_k)
    scaled back to the constellation (``offsets = x_j - x_k``)."""
    others = np.delete(exponents, j, axis=1)
    log_part = np.logaddexp(0.0, special.logsumexp(others, axis=1))
    post = np.exp(exponents - log_part[:, None])
    err = post @ offsets
    return log_part, err


def _kernel_1d(levels: np.ndarray, snr: float, d_min: float, d_max: float):
    a, w = _axis_rule(snr, d_min, d_max)
    root = math.sqrt(snr)
    gap = 0.0
    mm = 0.0
    for j, rj in enumerate(levels):
        offsets = rj - levels
        d = root * offsets
        expo = -(d[None, :] ** 2) - 2.0 * a[:, None] * d[None, :]
        log_part, err = _pairwise_terms(expo, j, offsets)
        gap += w @ log_part
        mm += w @ (err * err)
    n = levels.size
    return gap / n, mm / n


def _kernel_2d(points: np.ndarray, snr: float, d_min: float, d_max: float):
    a, w = _axis_rule(snr, d_min, d_max, cap=MAX_AXIS_NODES_2D)
    z = (a[:, None] + 1j * a[None, :]).ravel()
    wz = (w[:, None] * w[None, :]).ravel()
    keep = wz > 1e-300
    z, wz = z[keep], wz[keep]
    root = math.sqrt(snr)
    gap = 0.0
    mm = 0.0
    for j, xj in enumerate(points):
        offsets = xj - points
        d = root * offsets
        expo = -(np.abs(d) ** 2)[None, :] - 2.0 * (z.real[:, None] * d.real + z.imag[:, None] * d.imag)
        log_part, err = _pairwise_terms(expo, j, offsets)
        gap += wz @ log_part
        mm += wz @ (err.real**2 + err.imag**2)
    n = points.size
    return gap / n, mm / n


@dataclass(frozen=True)
class _Axes:
    """Per-axis description: a list of (levels, d_min, d_max) for separable
    alphabets, or None when a 2-D rule is needed."""

    parts: tuple | None


def _split_axes(cons: Constellation) -> _Axes:
    pts = cons.points
    re = np.unique(np.round(pts.real, 12))
    im = np.unique(np.round(pts.imag, 12))
    if re.size * im.size != pts.size:
        return _Axes(None)
    grid = {(r, i) for r in re for i in im}
    have = {(r, i) for r, i in zip(np.round(pts.real, 12), np.round(pts.imag, 12))}
    if grid != have:
        return _Axes(None)
    parts = []
    for lv in (re, im):
        if lv.size > 1:
            diff = np.diff(lv)
            parts.append((lv.astype(float), float(diff.min()), float(lv[-1] - lv[0])))
    return _Axes(tuple(parts))


_AXES: dict = {}


def _axes(cons: Constellation) -> _Axes:
    key = cons.key()
    axes = _AXES.get(key)
    if axes is None:
        axes = _AXES[key] = _split_axes(cons)
    return axes


def gap_and_mmse(cons: Constellation, snr: float) -> tuple[float, float]:
    """Return ``(log M - I(snr), mmse(snr))`` with the gap in nats.

    The gap is computed directly rather than as a difference, so it keeps
    its relative accuracy when it is exponentially small.
    """
    snr = _check_snr(snr)
    if snr == 0.0:
        return math.log(cons.size), 1.0
    if snr * cons.d_min**2 / 4.0 > UNDERFLOW_EXPONENT:
        return 0.0, TINY_MMSE
    axes = _axes(cons)
    if axes.parts is not None:
        gap = mm = 0.0
        for levels, dmin, dmax in axes.parts:
            g, m = _kernel_1d(levels, snr, dmin, dmax)
            gap += g
            mm += m
    else:
        gap, mm = _kernel_2d(cons.points, snr, cons.d_min, cons.d_max)
    gap = min(max(gap, 0.0), math.log(cons.size))
    mm = min(max(mm, TINY_MMSE), 1.0)
    return gap, mm


def mutual_information(cons: Constellation, snr: float) -> float:
    """Mutual information in bits, in ``[0, log2 M]``."""
    gap, _ = gap_and_mmse(cons, snr)
    return max(0.0, cons.bits - gap / math.log(2.0))


def mutual_information_nats(cons: Constellation, snr: float) -> float:
    gap, _ = gap_and_mmse(cons, snr)
    return max(0.0, math.log(cons.size) - gap)


def mmse(cons: Constellation, snr: float) -> float:
    """Minimum mean-square error E|S - E[S|Y]|^2, in (0, 1]."""
    _, mm = gap_and_mmse(cons, snr)
    return mm


def mmse_is_derivative_check(cons: Constellation, grid, rel_step: float = 1e-4) -> float:
    """Largest relative mismatch between a central difference of I (nats)
    and the MMSE over a grid of positive SNRs."""
    grid = [float(g) for g in grid]
    if len(grid) < 1 or any(not (g > 0 and math.isfinite(g)) for g in grid):
        raise ValueError("I-MMSE check needs positive, finite SNRs")
    worst = 0.0
    for g in grid:
        h = rel_step * g
        up, _ = gap_and_mmse(cons, g + h)
        dn, _ = gap_and_mmse(cons, g - h)
        deriv = (dn - up) / (2.0 * h)
        mm = mmse(cons, g)
        worst = max(worst, abs(deriv - mm) / mm)
    return worst


# --------------------------------------------------------------------------
# Mellin transform of the MMSE


@dataclass(frozen=True)
class MellinValue:
    argument: float
    value: float
    est_abs_error: float
    split: float


def mmse_tail_bound(cons: Constellation, x: float, start: float) -> float:
    """Upper bound on ``int_start^inf t^x mmse(t) dt``.

    Uses mmse <= d_max^2 P_e for the nearest-neighbour detector, the union
    bound P_e <= (M-1) Q(d_min sqrt(t/2)) and Q(u) <= exp(-u^2/2)/(u sqrt(2 pi)).
    """
    c = cons.d_min**2 / 4.0
    pref = (cons.size - 1) * cons.d_max**2 / (cons.d_min * math.sqrt(math.pi))
    s = x + 0.5
    log_upper = special.gammaln(s) + np.log(special.gammaincc(s, c * start) + 1e-300)
    return float(pref * math.exp(log_upper - s * math.log(c)))


def mellin_mmse(cons: Constellation, x: float, split: float | None = None) -> MellinValue:
    """``int_0^inf t^x mmse(t) dt`` for ``x > 0``.

    Adaptive quadrature up to a split point plus an analytic tail bound.
    The split starts at ``8 (x + 4) / d_min^2`` and doubles until the
    bound is negligible; passing ``split`` fixes it. Results without an
    explicit split are memoised per alphabet.
    """
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"Mellin argument must be positive, got {x}")
    if split is None:
        key = (cons.key(), x)
        hit = _MELLIN.get(key)
        if hit is None:
            hit = _MELLIN[key] = _mellin(cons, x, None)
        return hit
    return _mellin(cons, x, split)


_MELLIN: dict = {}


def _mellin(cons: Constellation, x: float, split: float | None) -> MellinValue:
    fixed = split is not None
    T = float(split) if fixed else 8.0 * (x + 4.0) / cons.d_min**2
    f = lambda t: t**x * mmse(cons, t)
    if not fixed:
        # scale for the tolerance: the head of the integral is at least
        # int_0^1 t^x mmse(t) dt >= mmse(1) / (x + 1)
        scale = max(1.0, mmse(cons, 1.0) / (x + 1.0))
        while mmse_tail_bound(cons, x, T) > 1e-8 * scale and T < 1e7:
            T *= 2.0
    # knots where the integrand changes character help QUADPACK
    knots = [k for k in (1.0 / cons.d_min**2, 8.0 / cons.d_min**2, 32.0 / cons.d_min**2) if k < T]
    value, abserr = integrate.quad(f, 0.0, T, epsabs=1e-13, epsrel=1e-11, limit=400, points=knots)
    tail = mmse_tail_bound(cons, x, T)
    est = abserr + tail
    if not value > 0 or est >= 1e-6 * max(1.0, value):
        raise NumericalError(
            f"Mellin transform at x={x} not resolved: value={value:.6g}, error bound={est:.3g}"
        )
    return MellinValue(x, value, est, T)


# --------------------------------------------------------------------------
# tabulated gap and mmse on a geometric SNR grid


class InfoTable:
    """Gap and MMSE tabulated on ``t_k = t_lo * exp(k h)``.

    Integrals of the form ``int_0^inf t^p exp(-t/s) g(t) dt`` become plain
    trapezoid sums in ``u = log t``; the integrand is analytic and decays
    at both ends, so the trapezoid rule converges geometrically in ``1/h``.
    The missing head below ``t_lo`` is summed in closed form using
    ``mmse(0) = 1`` and ``gap(0) = log M``.
    """

    def __init__(self, cons: Constellation, step: float = 0.05, t_lo: float = 1e-16, top_exponent: float = 110.0):
        self.cons = cons
        self.step = step
        c = cons.d_min**2 / 4.0
        t_hi = top_exponent / c
        n = int(math.ceil(math.log(t_hi / t_lo) / step)) + 1
        self.u = math.log(t_lo) + step * np.arange(n)
        self.t = np.exp(self.u)
        vals = np.array([gap_and_mmse(cons, t) for t in self.t])
        self.gap = vals[:, 0]
        self.mmse = vals[:, 1]
        self.log_m = math.log(cons.size)
        self._spline = None

    def _sum(self, values, power, scale):
        t = self.t
        scale = np.atleast_1d(np.asarray(scale, dtype=float))
        with np.errstate(over="ignore", divide="ignore"):
            decay = np.exp(-t[None, :] / scale[:, None])
        body = self.step * (decay * (t ** (power + 1.0) * values)[None, :]).sum(axis=1)
        return body

    def _head(self, value0, power):
        q = math.exp(-(power + 1.0) * self.step)
        return value0 * self.step * self.t[0] ** (power + 1.0) * q / (1.0 - q)

    def mmse_moment(self, power: float, scale=np.inf):
        """``int_0^inf t^power exp(-t/scale) mmse(t) dt`` for ``power > -1``."""
        return self._sum(self.mmse, power, scale) + self._head(1.0, power)

    def gap_moment(self, power: float, scale=np.inf):
        """``int_0^inf t^power exp(-t/scale) gap(t) dt`` (nats), ``power > -1``."""
        return self._sum(self.gap, power, scale) + self._head(self.log_m, power)

    def _mean(self, values, value0, shape, scale):
        scale = np.atleast_1d(np.asarray(scale, dtype=float))
        out = np.empty(scale.size)
        tiny = scale < SMALL_SCALE
        s = scale[~tiny]
        if s.size:
            log_norm = special.gammaln(shape) + shape * np.log(s)
            log_w = (
                math.log(self.step) + shape * self.u[None, :] - self.t[None, :] / s[:, None] - log_norm[:, None]
            )
            q = math.exp(-shape * self.step)
            log_head = math.log(self.step) + shape * self.u[0] + math.log(q / (1.0 - q)) - log_norm
            out[~tiny] = np.exp(log_w) @ values + value0 * np.exp(log_head)
        out[tiny] = np.nan
        return out, tiny

    def mmse_mean(self, shape: float, scale):
        """``E[mmse(T)]`` for ``T ~ Gamma(shape, scale)``.

        Below ``SMALL_SCALE`` the MMSE is 1 to within ``shape * scale``.
        """
        out, tiny = self._mean(self.mmse, 1.0, shape, scale)
        out[tiny] = 1.0
        return out

    def gap_mean(self, shape: float, scale):
        """``E[gap(T)]`` in nats for ``T ~ Gamma(shape, scale)``.

        Below ``SMALL_SCALE`` uses ``gap(t) = log M - t + O(t^2)``.
        """
        scale = np.atleast_1d(np.asarray(scale, dtype=float))
        out, tiny = self._mean(self.gap, self.log_m, shape, scale)
        out[tiny] = self.log_m - shape * scale[tiny]
        return out

    def gap_at(self, t):
        """Interpolated gap in nats at arbitrary SNRs (used by Monte Carlo)."""
        if self._spline is None:
            self._spline = CubicSpline(self.u, np.log(np.maximum(self.gap, 1e-300)))
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        lo = t < self.t[0]
        hi = t > self.t[-1]
        mid = ~(lo | hi)
        out[lo] = self.log_m - t[lo]
        out[hi] = 0.0
        out[mid] = np.exp(self._spline(np.log(t[mid])))
        return out


_TABLES: dict = {}


def info_table(cons: Constellation) -> InfoTable:
    key = cons.key()
    table = _TABLES.get(key)
    if table is None:
        step = 0.05 if _axes(cons).parts is not None else 0.1
        table = InfoTable(cons, step=step)
        _TABLES[key] = table
    return table
