"""Dependent n-variate risk models with exact samplers.

Three variants:

``IndependentModel``
    arbitrary marginals, independent components.
``GaussLognormalW``
    X_i = exp(W_i * Y_i) where (Y_1..Y_n) is multivariate normal with
    correlation matrix rho and per-component (mu_i, sigma_i), and the W_i are
    nonnegative bounded weights independent of Y (coupled either independently
    or comonotonically through a shared uniform).
``FGMModel``
    Farlie-Gumbel-Morgenstern copula over Pareto marginals sharing one tail
    index; sampled exactly by rejection against the polynomial copula density.

Models are immutable after construction; ``validate`` never raises on bad
parameters, it reports the violated constraint. Samplers require a valid
model. Closed-form joint survivals are provided where they exist and callers
fall back to Monte Carlo elsewhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr

from . import kernels
from .errors import DomainError, InvalidModelError, RejectionCapError
from .marginals import (
    TAG_GMDA,
    DiscreteAtoms,
    Lognormal,
    LognormalScaling,
    Marginal,
    Pareto,
    RandomizedLognormal,
    ScaledBeta,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_TIE_RTOL = 1e-9  # dominance ties on sigma, then on mu (unit floor for mu=0)


def _log_phi(z):
    z = np.asarray(z, dtype=float)
    return -0.5 * z * z - _LOG_SQRT_2PI


# ---------------------------------------------------------------------------
# normal orthant survival probabilities (1-D conditional quadrature)
# ---------------------------------------------------------------------------


def _log_orthant_integral(g_vectorized, a, peak_hint):
    """log of integral_a^inf exp(g(z)) dz with the peak factored out."""
    hi = max(a + 60.0, peak_hint + 60.0, 60.0)
    zs = np.linspace(a, hi, 800)
    gs = g_vectorized(zs)
    k = int(np.argmax(gs))
    z0, g0 = float(zs[k]), float(gs[k])
    if not np.isfinite(g0):
        return -math.inf

    def f(z):
        return math.exp(float(g_vectorized(np.asarray([z]))[0]) - g0)

    total = 0.0
    if z0 > a:
        total += integrate.quad(f, a, z0, epsabs=0.0, epsrel=1e-11, limit=200)[0]
    total += integrate.quad(f, z0, np.inf, epsabs=0.0, epsrel=1e-11, limit=200)[0]
    if total <= 0.0:
        return -math.inf
    return g0 + math.log(total)


def bivariate_orthant_log_survival(a, b, rho):
    """log P(Z1 > a, Z2 > b) for standard bivariate normal with correlation rho."""
    if math.isinf(a) and a < 0:
        return float(log_ndtr(-b))
    if math.isinf(b) and b < 0:
        return float(log_ndtr(-a))
    if abs(rho) < 1e-14:
        return float(log_ndtr(-a) + log_ndtr(-b))
    if rho >= 1.0 - 1e-14:
        return float(log_ndtr(-max(a, b)))
    if rho <= -1.0 + 1e-14:
        # P(Z > a, -Z > b) = P(a < Z < -b)
        lo, hi = a, -b
        if hi <= lo:
            return -math.inf
        val = float(np.clip(math.exp(log_ndtr(hi)) - math.exp(log_ndtr(lo)), 0.0, 1.0))
        return math.log(val) if val > 0 else -math.inf
    s = math.sqrt(1.0 - rho * rho)

    def g(z):
        return _log_phi(z) + log_ndtr(-(b - rho * z) / s)

    peak_hint = b / rho if rho > 0 else a
    return _log_orthant_integral(g, a, peak_hint)


def bivariate_orthant_survival(a, b, rho):
    """P(Z1 > a, Z2 > b), accurate in the deep joint tail."""
    return math.exp(bivariate_orthant_log_survival(a, b, rho))


def _trivariate_orthant_survival(a, rho):
    """P(Z1 > a1, Z2 > a2, Z3 > a3) by conditioning on Z1."""
    a1, a2, a3 = a
    r12, r13, r23 = rho[0][1], rho[0][2], rho[1][2]
    s12 = math.sqrt(1.0 - r12 * r12)
    s13 = math.sqrt(1.0 - r13 * r13)
    r23_1 = (r23 - r12 * r13) / (s12 * s13)
    r23_1 = min(max(r23_1, -1.0), 1.0)

    def g(z):
        out = np.empty_like(z)
        for i, zz in enumerate(np.atleast_1d(z)):
            inner = bivariate_orthant_log_survival(
                (a2 - r12 * zz) / s12, (a3 - r13 * zz) / s13, r23_1
            )
            out[i] = float(_log_phi(zz)) + inner
        return out

    peak_hint = max(a2 / r12 if r12 > 0 else a1, a3 / r13 if r13 > 0 else a1)
    lg = _log_orthant_integral(g, a1, peak_hint)
    return math.exp(lg)


# ---------------------------------------------------------------------------
# validation report and dominating set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


@dataclass(frozen=True)
class DominatingSet:
    """Components carrying the whole tail: maximal effective sigma, then mu.

    ``indices`` are 1-based. ``sigma`` and ``mu`` are the shared effective
    parameters of the members (weight upper endpoints folded in).
    """

    indices: tuple
    sigma: float
    mu: float

    def scaling(self):
        return LognormalScaling(self.sigma, self.mu)


# ---------------------------------------------------------------------------
# model variants
# ---------------------------------------------------------------------------

CORNER_CHECK_LIMIT = 20  # the 2^n admissibility sweep caps the FGM dimension
_EXACT_MAX_SUBSET_LIMIT = 12


class JointRiskModel:
    """Common surface of the three variants."""

    def validate(self) -> ValidationReport:  # pragma: no cover - overridden
        raise NotImplementedError

    def marginals(self):  # pragma: no cover - overridden
        raise NotImplementedError

    def sample(self, rng, size):  # pragma: no cover - overridden
        raise NotImplementedError

    def pairwise_joint_survival(self, i, j, xi, xj):
        """P(X_i > xi, X_j > xj) in closed form, or None when unsupported.

        Indices are 0-based here; a None return signals the caller to fall
        back to Monte Carlo, it is not a failure.
        """
        return None

    def max_survival(self, x):
        """P(max_i X_i > x) in closed form, or None when unsupported."""
        return None

    def gmda_candidates(self):
        """Scaling functions under which the maximum plausibly sits in the
        Gumbel max-domain, derived from component descriptors."""
        return []

    def _require_valid(self):
        rep = self.validate()
        if not rep.ok:
            raise InvalidModelError(rep.first_violation)

    @property
    def n(self):
        return len(self.marginals())


@dataclass(frozen=True)
class IndependentModel(JointRiskModel):
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def marginals(self):
        return list(self.components)

    def validate(self):
        bad = []
        if len(self.components) < 2:
            bad.append("dimension must be at least 2")
        for k, m in enumerate(self.components):
            if not isinstance(m, Marginal):
                bad.append(f"component {k + 1} is not a marginal model")
        return ValidationReport(not bad, tuple(bad))

    def sample(self, rng, size):
        self._require_valid()
        cols = [np.asarray(m.sample(rng, size), dtype=float) for m in self.components]
        return np.column_stack(cols)

    def pairwise_joint_survival(self, i, j, xi, xj):
        si = float(np.exp(self.components[i].log_survival(xi)))
        sj = float(np.exp(self.components[j].log_survival(xj)))
        return si * sj

    def max_survival(self, x):
        ls = np.array([float(m.log_survival(x)) for m in self.components])
        surv = np.exp(ls)
        with np.errstate(divide="ignore"):
            log_cdf = np.log1p(-np.minimum(surv, 1.0))
        return float(-np.expm1(np.sum(log_cdf)))

    def gmda_candidates(self):
        hs = [m.gmda_scaling() for m in self.components]
        if any(h is None for h in hs):
            return []
        first = hs[0]
        if all(_scaling_close(first, h) for h in hs[1:]):
            return [first]
        return []

    def to_dict(self):
        return {"type": "independent", "marginals": [m.to_dict() for m in self.components]}


def _scaling_close(h1, h2, rtol=1e-9):
    if type(h1) is not type(h2):
        return False
    d1, d2 = h1.to_dict(), h2.to_dict()
    for k, v in d1.items():
        w = d2[k]
        if isinstance(v, dict):
            if not _scaling_close(h1.base, h2.base, rtol):
                return False
        elif isinstance(v, float):
            if abs(v - w) > rtol * max(1.0, abs(v)):
                return False
        elif v != w:
            return False
    return True


def _as_wspec(w):
    if isinstance(w, (DiscreteAtoms, ScaledBeta)):
        return w
    return DiscreteAtoms(values=(float(w),), probs=(1.0,))


@dataclass(frozen=True)
class GaussLognormalW(JointRiskModel):
    """Lognormal-type risks with random variance weights.

    ``w_specs`` may be given as plain numbers for degenerate weights (W_i
    constant); ``w_coupling`` is "independent" or "comonotone".
    """

    mu: tuple
    sigma: tuple
    rho: tuple
    w_specs: tuple
    w_coupling: str = "independent"

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "sigma", tuple(float(v) for v in self.sigma))
        object.__setattr__(
            self, "rho", tuple(tuple(float(v) for v in row) for row in self.rho)
        )
        object.__setattr__(self, "w_specs", tuple(_as_wspec(w) for w in self.w_specs))

    @cached_property
    def _rho_arr(self):
        return np.asarray(self.rho, dtype=float)

    @cached_property
    def _chol(self):
        # lower-triangular symmetric factor of the correlation matrix
        return np.linalg.cholesky(self._rho_arr)

    def marginals(self):
        out = []
        for m, s, w in zip(self.mu, self.sigma, self.w_specs):
            if isinstance(w, DiscreteAtoms) and w.is_degenerate:
                c = w.values[0]
                out.append(Lognormal(c * m, c * s))
            else:
                out.append(RandomizedLognormal(m, s, w))
        return out

    def validate(self):
        bad = []
        n = len(self.mu)
        if n < 2:
            bad.append("dimension must be at least 2")
        if len(self.sigma) != n or len(self.w_specs) != n:
            bad.append("mu, sigma and w_specs must share one length")
        if any(s <= 0 for s in self.sigma):
            bad.append("all sigma must be positive")
        if self.w_coupling not in ("independent", "comonotone"):
            bad.append(f"unknown w_coupling '{self.w_coupling}'")
        r = self._rho_arr
        if r.shape != (n, n):
            bad.append("rho must be an n-by-n matrix")
        else:
            if not np.allclose(r, r.T, atol=1e-12):
                bad.append("rho must be symmetric")
            if not np.allclose(np.diag(r), 1.0, atol=1e-12):
                bad.append("rho must have a unit diagonal")
            off = r[~np.eye(n, dtype=bool)]
            if off.size and np.max(np.abs(off)) >= 1.0:
                bad.append("off-diagonal correlations must satisfy -1 < rho_ij < 1")
            elif not bad:
                try:
                    np.linalg.cholesky(r)
                except np.linalg.LinAlgError:
                    bad.append("rho is not positive definite")
        for k, w in enumerate(self.w_specs):
            if not (0 < w.upper < math.inf):
                bad.append(f"weight {k + 1} needs a finite positive upper endpoint")
        return ValidationReport(not bad, tuple(bad))

    def sample(self, rng, size):
        self._require_valid()
        n = len(self.mu)
        z = rng.standard_normal((size, n))
        y = np.asarray(self.mu) + np.asarray(self.sigma) * (z @ self._chol.T)
        w = np.empty((size, n))
        if self.w_coupling == "independent":
            u = rng.random((size, n))
            for i, spec in enumerate(self.w_specs):
                w[:, i] = spec.quantile(u[:, i])
        else:
            u = rng.random(size)
            for i, spec in enumerate(self.w_specs):
                w[:, i] = spec.quantile(u)
        return np.exp(w * y)

    def _degenerate_weights(self):
        ws = []
        for spec in self.w_specs:
            if not (isinstance(spec, DiscreteAtoms) and spec.is_degenerate):
                return None
            if spec.values[0] <= 0:
                return None
            ws.append(spec.values[0])
        return ws

    def _threshold(self, i, x, w):
        return (math.log(x) - w * self.mu[i]) / (w * self.sigma[i])

    def pairwise_joint_survival(self, i, j, xi, xj):
        ws = self._degenerate_weights()
        if ws is None:
            return None
        if xi <= 0 and xj <= 0:
            return 1.0
        if xi <= 0:
            return float(np.exp(self.marginals()[j].log_survival(xj)))
        if xj <= 0:
            return float(np.exp(self.marginals()[i].log_survival(xi)))
        a = self._threshold(i, xi, ws[i])
        b = self._threshold(j, xj, ws[j])
        return bivariate_orthant_survival(a, b, self.rho[i][j])

    def max_survival(self, x):
        ws = self._degenerate_weights()
        n = len(self.mu)
        if ws is None or n > 3:
            return None
        if x <= 0:
            return 1.0
        a = [self._threshold(i, x, ws[i]) for i in range(n)]
        singles = sum(math.exp(float(log_ndtr(-ai))) for ai in a)
        pairs = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                pairs += bivariate_orthant_survival(a[i], a[j], self.rho[i][j])
        total = singles - pairs
        if n == 3:
            total += _trivariate_orthant_survival(a, self.rho)
        return float(np.clip(total, 0.0, 1.0))

    def dominating_set(self):
        """Members with maximal effective sigma (ties broken by maximal mu)."""
        wbar = np.array([w.upper for w in self.w_specs])
        sig = wbar * np.asarray(self.sigma)
        mu = wbar * np.asarray(self.mu)
        smax = float(np.max(sig))
        on_s = np.abs(sig - smax) <= _TIE_RTOL * smax
        mmax = float(np.max(mu[on_s]))
        on_m = on_s & (np.abs(mu - mmax) <= _TIE_RTOL * max(1.0, abs(mmax)))
        idx = tuple(int(i) + 1 for i in np.nonzero(on_m)[0])
        return DominatingSet(indices=idx, sigma=smax, mu=mmax)

    def gmda_candidates(self):
        return [self.dominating_set().scaling()]

    def to_dict(self):
        return {
            "type": "gauss_lognormal_w",
            "mu": list(self.mu),
            "sigma": list(self.sigma),
            "rho": [list(row) for row in self.rho],
            "w": [w.to_dict() for w in self.w_specs],
            "w_coupling": self.w_coupling,
        }


@dataclass(frozen=True)
class FGMModel(JointRiskModel):
    """FGM copula over Pareto marginals with a shared tail index.

    ``thetas`` maps subsets of 1-based component indices (size >= 2) to
    coefficients; it may be passed as a mapping or an iterable of
    ``(subset, value)`` pairs and is canonicalized to a sorted tuple.
    """

    components: tuple
    thetas: tuple
    rejection_round_cap: int = 500

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        items = self.thetas.items() if hasattr(self.thetas, "items") else self.thetas
        canon = []
        for subset, val in items:
            key = tuple(sorted(int(i) for i in subset))
            canon.append((key, float(val)))
        canon.sort()
        object.__setattr__(self, "thetas", tuple(canon))

    def marginals(self):
        return list(self.components)

    @cached_property
    def _theta_map(self):
        return dict(self.thetas)

    @cached_property
    def _encoded(self):
        subsets = [tuple(i - 1 for i in key) for key, _ in self.thetas]
        vals = [v for _, v in self.thetas]
        return kernels.encode_subsets(subsets, vals)

    @property
    def envelope(self):
        return 1.0 + sum(abs(v) for _, v in self.thetas)

    def validate(self):
        bad = []
        n = len(self.components)
        if n < 2:
            bad.append("dimension must be at least 2")
        alphas = []
        for k, m in enumerate(self.components):
            if not isinstance(m, Pareto):
                bad.append(f"component {k + 1} must be a Pareto marginal")
            else:
                alphas.append(m.alpha)
        if alphas and any(abs(a - alphas[0]) > 1e-9 * max(1.0, alphas[0]) for a in alphas):
            bad.append("all Pareto components must share one tail index")
        seen = set()
        for key, val in self.thetas:
            if len(key) < 2 or len(set(key)) != len(key):
                bad.append(f"theta subset {key} must hold at least two distinct indices")
            elif any(i < 1 or i > n for i in key):
                bad.append(f"theta subset {key} is outside 1..{n}")
            elif key in seen:
                bad.append(f"theta subset {key} appears twice")
            seen.add(key)
            if abs(val) > 1.0:
                bad.append(f"theta for subset {key} must satisfy |theta| <= 1")
        if n > CORNER_CHECK_LIMIT:
            bad.append(f"corner admissibility check supports dimension <= {CORNER_CHECK_LIMIT}")
        if not bad:
            for eps in itertools.product((-1.0, 1.0), repeat=n):
                val = 1.0
                for key, th in self.thetas:
                    prod = th
                    for i in key:
                        prod *= eps[i - 1]
                    val += prod
                if val < -1e-12:
                    bad.append(
                        "copula density is negative at cube corner "
                        f"{tuple(int(e) for e in eps)} (value {val:.6g})"
                    )
                    break
        return ValidationReport(not bad, tuple(bad))

    def copula_density(self, u):
        idx, off, th = self._encoded
        return kernels.fgm_density(np.asarray(u, dtype=float), idx, off, th)

    def sample(self, rng, size):
        self._require_valid()
        n = len(self.components)
        env = self.envelope
        out = np.empty((size, n))
        filled = 0
        rounds = 0
        while filled < size:
            if rounds >= self.rejection_round_cap:
                raise RejectionCapError(
                    f"copula rejection sampler stalled after {rounds} rounds "
                    f"(envelope {env:.3g}); theta is likely near-inadmissible"
                )
            need = size - filled
            u = rng.random((need, n))
            accept_u = rng.random(need)
            dens = self.copula_density(u)
            acc = accept_u * env <= dens
            k = int(np.count_nonzero(acc))
            if k:
                out[filled : filled + k] = u[acc]
                filled += k
            rounds += 1
        for i, m in enumerate(self.components):
            out[:, i] = m.xmin * (1.0 - out[:, i]) ** (-1.0 / m.alpha)
        return out

    def theta_for(self, i, j):
        """Pairwise coefficient for 0-based component indices."""
        return self._theta_map.get(tuple(sorted((i + 1, j + 1))), 0.0)

    def pairwise_joint_survival(self, i, j, xi, xj):
        mi, mj = self.components[i], self.components[j]
        si = float(np.exp(mi.log_survival(xi)))
        sj = float(np.exp(mj.log_survival(xj)))
        th = self.theta_for(i, j)
        return si * sj * (1.0 + th * (1.0 - si) * (1.0 - sj))

    def _subset_joint_survival(self, subset, x):
        """P(X_j > x for all j in subset) for 0-based ``subset``."""
        surv = {j: float(np.exp(self.components[j].log_survival(x))) for j in subset}
        log_tail = 0.0
        for j in subset:
            if surv[j] <= 0.0:
                return 0.0
            log_tail += math.log(surv[j])
        sset = set(j + 1 for j in subset)
        corr = 1.0
        for key, th in self.thetas:
            if set(key) <= sset:
                prod = th if len(key) % 2 == 0 else -th
                for i in key:
                    prod *= 1.0 - surv[i - 1]
                corr += prod
        return math.exp(log_tail) * corr

    def max_survival(self, x):
        n = len(self.components)
        if n > _EXACT_MAX_SUBSET_LIMIT:
            return None
        total = 0.0
        for size in range(1, n + 1):
            sign = 1.0 if size % 2 == 1 else -1.0
            for subset in itertools.combinations(range(n), size):
                total += sign * self._subset_joint_survival(subset, x)
        return float(np.clip(total, 0.0, 1.0))

    def gmda_candidates(self):
        return []

    def to_dict(self):
        return {
            "type": "fgm",
            "alpha": self.components[0].alpha,
            "xmin": [m.xmin for m in self.components],
            "theta": {",".join(str(i) for i in key): val for key, val in self.thetas},
        }


# ---------------------------------------------------------------------------
# free-function surface
# ---------------------------------------------------------------------------


def validate_model(m):
    """Check model constraints; reports the violations instead of raising."""
    try:
        return m.validate()
    except Exception as exc:  # defensive: malformed inputs must not panic
        return ValidationReport(False, (f"validation crashed: {exc}",))


def sample_joint(m, rng, size):
    """Draw ``size`` joint vectors, shape (size, n)."""
    return m.sample(rng, size)


def pairwise_joint_survival(m, i, j, xi, xj):
    """Closed-form P(X_i > xi, X_j > xj) with 1-based indices, or None."""
    if i == j:
        raise DomainError("pairwise joint survival needs two distinct indices")
    return m.pairwise_joint_survival(i - 1, j - 1, xi, xj)


def dominating_set(m):
    if not isinstance(m, GaussLognormalW):
        raise DomainError("dominating_set is defined for GaussLognormalW models")
    return m.dominating_set()


__all__ = [
    "JointRiskModel",
    "IndependentModel",
    "GaussLognormalW",
    "FGMModel",
    "ValidationReport",
    "DominatingSet",
    "validate_model",
    "sample_joint",
    "pairwise_joint_survival",
    "dominating_set",
    "bivariate_orthant_survival",
    "bivariate_orthant_log_survival",
    "CORNER_CHECK_LIMIT",
]
