"""Mixture-gamma model of the fading power ``a = |h|^2`` and its
constructors for Nakagami-m, eta-mu, kappa-mu, Rician and K_G fading.

The density is ``f(a) = sum_l alpha_l a^(beta_l - 1) exp(-zeta_l a)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .errors import TruncationError
from .quadrature import gauss_laguerre

NORMALISATION_TOL = 1e-9
MEAN_TOL = 1e-6
SPACING_TOL = 1e-9
DEFAULT_TRUNCATION = 50
MAX_TRUNCATION = 5000


@dataclass(frozen=True, eq=False)
class MixtureGamma:
    """Immutable list of ``(alpha, beta, zeta)`` terms."""

    terms: tuple
    family_label: str = "custom"
    alpha: np.ndarray = field(init=False, repr=False)
    beta: np.ndarray = field(init=False, repr=False)
    zeta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        terms = tuple((float(a), float(b), float(z)) for a, b, z in self.terms)
        if not terms:
            raise ValueError("a mixture needs at least one term")
        arr = np.array(terms)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("mixture terms need finite alpha, beta, zeta > 0")
        object.__setattr__(self, "terms", terms)
        for name, col in zip(("alpha", "beta", "zeta"), arr.T):
            col = col.copy()
            col.setflags(write=False)
            object.__setattr__(self, name, col)
        resid = self.normalisation_residual
        if resid > NORMALISATION_TOL:
            raise ValueError(f"mixture is not normalised: |sum alpha Gamma(beta) zeta^-beta - 1| = {resid:.3g}")
        distinct = np.unique(self.beta)
        if distinct.size > 1 and np.diff(distinct).min() < 1.0 - SPACING_TOL:
            raise ValueError("distinct beta values must be spaced by at least 1")

    @property
    def truncation(self) -> int:
        return len(self.terms)

    @property
    def component_weights(self) -> np.ndarray:
        """Mixing probabilities alpha_l Gamma(beta_l) zeta_l^-beta_l."""
        return np.exp(np.log(self.alpha) + special.gammaln(self.beta) - self.beta * np.log(self.zeta))

    @property
    def normalisation_residual(self) -> float:
        return abs(float(self.component_weights.sum()) - 1.0)

    @property
    def mean(self) -> float:
        return float(np.sum(self.component_weights * self.beta / self.zeta))

    @property
    def mean_residual(self) -> float:
        return abs(self.mean - 1.0)

    @property
    def min_beta(self) -> float:
        return float(self.beta.min())

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        return {"family": self.family_label, "terms": [list(t) for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "MixtureGamma":
        return cls(tuple(tuple(t) for t in data["terms"]), family_label=data.get("family", "custom"))

    @classmethod
    def from_json(cls, text: str) -> "MixtureGamma":
        return cls.from_dict(json.loads(text))


def _check_point(a):
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise ValueError("fading power must be >= 0")
    return a


def pdf(mg: MixtureGamma, a):
    """Density of the fading power; ``inf`` at 0 when some beta < 1."""
    a = _check_point(a)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = (
            np.log(mg.alpha)[None, :]
            + (mg.beta[None, :] - 1.0) * np.log(a[:, None])
            - mg.zeta[None, :] * a[:, None]
        )
        # a = 0 and beta = 1 gives 0 * -inf
        logs = np.where((a[:, None] == 0) & (mg.beta[None, :] == 1.0), np.log(mg.alpha)[None, :], logs)
    out = np.exp(logs).sum(axis=1)
    return float(out[0]) if scalar else out


def cdf(mg: MixtureGamma, a):
    """Distribution function via the regularised lower incomplete gamma."""
    a = _check_point(a)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    vals = special.gammainc(mg.beta[None, :], mg.zeta[None, :] * a[:, None])
    out = np.clip(vals @ mg.component_weights, 0.0, 1.0)
    return float(out[0]) if scalar else out


def sample(mg: MixtureGamma, rng_seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. fading powers; reproducible for a given seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    w = mg.component_weights
    comp = rng.choice(w.size, size=count, p=w / w.sum())
    return rng.gamma(mg.beta[comp], 1.0 / mg.zeta[comp])


# --------------------------------------------------------------------------
# named families


@dataclass(frozen=True)
class Nakagami:
    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"Nakagami m must be > 0, got {self.m}")


@dataclass(frozen=True)
class EtaMu:
    format: int
    eta: float
    mu: float

    def __post_init__(self):
        if self.format not in (1, 2):
            raise ValueError("eta-mu format must be 1 or 2")
        if not self.mu > 0:
            raise ValueError(f"eta-mu mu must be > 0, got {self.mu}")
        if self.format == 1 and not 0 < self.eta < math.inf:
            raise ValueError(f"format-1 eta must lie in (0, inf), got {self.eta}")
        if self.format == 2 and not -1 < self.eta < 1:
            raise ValueError(f"format-2 eta must lie in (-1, 1), got {self.eta}")

    @property
    def h_H(self) -> tuple[float, float]:
        if self.format == 1:
            return (2.0 + 1.0 / self.eta + self.eta) / 4.0, (1.0 / self.eta - self.eta) / 4.0
        return 1.0 / (1.0 - self.eta**2), self.eta / (1.0 - self.eta**2)


@dataclass(frozen=True)
class KappaMu:
    kappa: float
    mu: float

    def __post_init__(self):
        if not self.kappa > 0 or not self.mu > 0:
            raise ValueError(f"kappa-mu needs kappa > 0 and mu > 0, got {self.kappa}, {self.mu}")


@dataclass(frozen=True)
class Rician:
    K: float

    def __post_init__(self):
        if not self.K >= 0:
            raise ValueError(f"Rician K must be >= 0, got {self.K}")


@dataclass(frozen=True)
class KG:
    k: float
    m: float
    order: int = 30

    def __post_init__(self):
        if not self.k > 0 or not self.m > 0:
            raise ValueError(f"K_G needs k > 0 and m > 0, got {self.k}, {self.m}")


FadingParams = Union[Nakagami, EtaMu, KappaMu, Rician, KG]


def _eta_mu_log_theta(p: EtaMu, n: int):
    h, H = p.h_H
    mu = p.mu
    l = np.arange(1, n + 1, dtype=float)
    # H^(2l-2) with 0^0 = 1 at eta = 1
    if H == 0.0:
        log_H = np.where(l == 1, 0.0, -np.inf)
    else:
        log_H = (2 * l - 2) * math.log(abs(H))
    log_theta = (
        math.log(2.0 * math.sqrt(math.pi))
        + (2 * mu + 2 * l - 2) * math.log(mu)
        + mu * math.log(h)
        + log_H
        - special.gammaln(mu)
        - special.gammaln(l)
        - special.gammaln(mu + l - 0.5)
    )
    beta = 2.0 * (mu - 1.0 + l)
    zeta = np.full(n, 2.0 * mu * h)
    return log_theta, beta, zeta


def _kappa_mu_log_theta(kappa: float, mu: float, n: int):
    l = np.arange(1, n + 1, dtype=float)
    log_kappa = (l - 1) * math.log(kappa) if kappa > 0 else np.where(l == 1, 0.0, -np.inf)
    log_theta = (
        (mu + 2 * l - 2) * math.log(mu)
        + log_kappa
        + (mu + l - 1) * math.log1p(kappa)
        - mu * kappa
        - special.gammaln(mu + l - 1)
        - special.gammaln(l)
    )
    beta = mu - 1.0 + l
    zeta = np.full(n, mu * (1.0 + kappa))
    return log_theta, beta, zeta


def _kg_log_theta(p: KG):
    rule = gauss_laguerre(p.order)
    tau, w = rule.nodes, rule.weights
    keep = w > 0
    tau, w = tau[keep], w[keep]
    k, m = p.k, p.m
    log_theta = (
        m * math.log(k) + m * math.log(m) + np.log(w) + (k - m - 1) * np.log(tau)
        - special.gammaln(m) - special.gammaln(k)
    )
    beta = np.full(tau.size, float(m))
    zeta = k * m / tau
    return log_theta, beta, zeta


def _psi(log_theta, beta, zeta):
    """alpha_l = theta_l / sum_i theta_i Gamma(beta_i) zeta_i^-beta_i (log space)."""
    log_w = log_theta + special.gammaln(beta) - beta * np.log(zeta)
    return np.exp(log_theta - special.logsumexp(log_w))


def _assemble(alpha, beta, zeta, label) -> MixtureGamma:
    keep = alpha > 0
    return MixtureGamma(tuple(zip(alpha[keep], beta[keep], zeta[keep])), family_label=label)


def _series(p, n):
    if isinstance(p, EtaMu):
        return _eta_mu_log_theta(p, n)
    return _kappa_mu_log_theta(p.kappa, p.mu, n)


def label_of(p: FadingParams) -> str:
    if isinstance(p, Nakagami):
        return f"nakagami(m={p.m:g})"
    if isinstance(p, EtaMu):
        return f"eta-mu(format={p.format}, eta={p.eta:g}, mu={p.mu:g})"
    if isinstance(p, KappaMu):
        return f"kappa-mu(kappa={p.kappa:g}, mu={p.mu:g})"
    if isinstance(p, Rician):
        return f"rician(K={p.K:g})"
    return f"kg(k={p.k:g}, m={p.m:g}, N={p.order})"


def from_params(p: FadingParams, truncation: int | None = None) -> MixtureGamma:
    """Build the mixture for a named family.

    ``truncation`` is the number of retained series terms for eta-mu and
    kappa-mu (default: start at 50 and double until the unit-mean error is
    below 1e-6) and the Gauss-Laguerre order for K_G (default ``p.order``).
    """
    label = label_of(p)
    if isinstance(p, Rician):
        if p.K == 0:
            return MixtureGamma(((1.0, 1.0, 1.0),), family_label=label)
        p_eff = KappaMu(p.K, 1.0)
        return _from_series(p_eff, truncation, label)
    if isinstance(p, Nakagami):
        m = p.m
        alpha = math.exp(m * math.log(m) - special.gammaln(m))
        return MixtureGamma(((alpha, m, m),), family_label=label)
    if isinstance(p, KG):
        if truncation is not None:
            p = KG(p.k, p.m, int(truncation))
        log_theta, beta, zeta = _kg_log_theta(p)
        mg = _assemble(_psi(log_theta, beta, zeta), beta, zeta, label)
        _require_mean(mg, f"K_G order {p.order}")
        return mg
    if isinstance(p, (EtaMu, KappaMu)):
        return _from_series(p, truncation, label)
    raise TypeError(f"unsupported fading parameters {p!r}")


def _from_series(p, truncation, label) -> MixtureGamma:
    if truncation is not None:
        n = int(truncation)
        if n < 1:
            raise ValueError("truncation must be >= 1")
        log_theta, beta, zeta = _series(p, n)
        mg = _assemble(_psi(log_theta, beta, zeta), beta, zeta, label)
        _require_mean(mg, f"truncation L={n}")
        return mg
    n = DEFAULT_TRUNCATION
    while True:
        log_theta, beta, zeta = _series(p, n)
        mg = _assemble(_psi(log_theta, beta, zeta), beta, zeta, label)
        # also require the dropped tail to be negligible in probability
        tail = mg.component_weights[-1]
        if (mg.mean_residual < MEAN_TOL and tail < 1e-15) or n >= MAX_TRUNCATION:
            break
        n *= 2
    _require_mean(mg, f"truncation L={n}")
    return mg


def _require_mean(mg: MixtureGamma, what: str):
    err = mg.mean_residual
    if not err < MEAN_TOL:
        raise TruncationError(f"{what} leaves a unit-mean error of {err:.3g} (> {MEAN_TOL:g})", err)


# --------------------------------------------------------------------------
# parsing helpers shared with the CLI

_FAMILY_KEYS = {
    "nakagami": (Nakagami, {"m": float}),
    "rayleigh": (None, {}),
    "etamu": (EtaMu, {"format": int, "eta": float, "mu": float}),
    "kappamu": (KappaMu, {"kappa": float, "mu": float}),
    "rician": (Rician, {"K": float}),
    "kg": (KG, {"k": float, "m": float, "N": int}),
}


def parse_params(spec: str) -> FadingParams:
    """Parse ``name:key=value,...``, e.g. ``etamu:format=1,eta=4,mu=1``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower().replace("-", "").replace("_", "")
    if name not in _FAMILY_KEYS:
        raise ValueError(f"unknown fading family {name!r}")
    if name == "rayleigh":
        return Nakagami(1.0)
    cls, keys = _FAMILY_KEYS[name]
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value in {spec!r}")
        key = key.strip()
        match = next((k for k in keys if k.lower() == key.lower()), None)
        if match is None:
            raise ValueError(f"unknown parameter {key!r} for {name}")
        kwargs[match] = keys[match](val)
    if cls is KG and "N" in kwargs:
        kwargs["order"] = kwargs.pop("N")
    if cls is EtaMu:
        kwargs.setdefault("format", 1)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"incomplete parameters in {spec!r}: {exc}") from exc
