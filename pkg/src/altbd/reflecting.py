"""Transient analysis of the chain reflected at zero.

The chain lives on {0, 1, 2, ...} with the same parity-alternating rates as
the unrestricted one, except that state 0 jumps only upward (at rate lam).
Implemented routes:

* the Laplace-domain solution for a start at state 1 (`laplace_roots`,
  `pi_1n`), built on the roots of a biquadratic;
* closed-form return probabilities to the origin from starts 0 and 1
  (`q00`, and `q10_series` / `q10_integral` as two independent evaluations
  of the same function);
* occupation of the even states and the first two moments (`p_even`,
  `r_mean`, `r_variance`), expressed through the return probability.

Throughout, a = lam + mu and b = lam - mu (b may be negative or zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .bilateral import Rates, _is_even
from .specfun import (
    ConvergenceError,
    DEFAULT_CONTROL,
    DomainError,
    SeriesControl,
    _hyp_series,
    bessel_i,
    hyp1f2,
)

__all__ = [
    "SumDiffParams",
    "LaplaceRoots",
    "laplace_roots",
    "pi_1n",
    "q00",
    "q10_series",
    "q10_integral",
    "p_even",
    "r_mean",
    "r_variance",
]


@dataclass(frozen=True)
class SumDiffParams:
    """Rate sum a = lam + mu and difference b = lam - mu."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise DomainError(f"rate sum must be positive, got {self.a}")
        if not abs(self.b) < self.a:
            raise DomainError(f"|rate difference| must be below the sum, got {self.b} vs {self.a}")

    @classmethod
    def from_rates(cls, rates: Rates) -> "SumDiffParams":
        return cls(rates.total, rates.diff)


@dataclass(frozen=True)
class LaplaceRoots:
    """Square roots A, B and the biquadratic roots psi1^2 > 1 > psi2^2 > 0.

    A^2 = (a+s)^2 - a^2 and B^2 = (a+s)^2 - b^2; the squared roots satisfy
    psi1^2 * psi2^2 = 1 (the biquadratic has equal leading and trailing
    coefficients).
    """

    s: float
    a_term: float
    b_term: float
    psi1_sq: float
    psi2_sq: float


def _roots_any(s, p: SumDiffParams):
    """A, B, psi2^2 for real s > 0 or complex s with positive real part."""
    a, b = p.a, p.b
    sqrt = np.sqrt if isinstance(s, complex) else math.sqrt
    A = sqrt((a + s) ** 2 - a * a)
    B = sqrt((a + s) ** 2 - b * b)
    psi2 = (A - B) ** 2 / (a * a - b * b)
    return A, B, psi2


def laplace_roots(s: float, rates: Rates) -> LaplaceRoots:
    """Roots of the biquadratic underlying the transform-domain solution."""
    if not (s > 0.0 and math.isfinite(s)):
        raise DomainError(f"s must be strictly positive, got {s}")
    p = SumDiffParams.from_rates(rates)
    A, B, psi2 = _roots_any(s, p)
    psi1 = (A + B) ** 2 / (p.a**2 - p.b**2)
    return LaplaceRoots(s=s, a_term=A, b_term=B, psi1_sq=psi1, psi2_sq=psi2)


def pi_1n(s, n: int, rates: Rates):
    """Laplace transform of the transition probability 1 -> n of the chain.

    Real s > 0 gives the transform proper; complex s with positive real part
    is accepted so numerical inversion can walk the Bromwich line.
    """
    if n < 0:
        raise DomainError(f"state must be >= 0, got {n}")
    if isinstance(s, complex):
        if not s.real > 0.0:
            raise DomainError(f"Re(s) must be positive, got {s}")
    elif not (s > 0.0 and math.isfinite(s)):
        raise DomainError(f"s must be strictly positive, got {s}")
    lam, mu = rates.lam, rates.mu
    p = SumDiffParams.from_rates(rates)
    A, B, psi2 = _roots_any(s, p)
    if n == 0:
        return ((2.0 * lam + s) * (2.0 * mu + s) - A * B) / (lam * (s * (2.0 * mu + s) + A * B))
    den = mu * (1.0 - psi2) - s * psi2
    if n % 2 == 0:
        m = n // 2
        return (2.0 * mu + s) * (lam + s) * psi2 ** (m + 1) / (lam * lam * den)
    m = (n + 1) // 2
    return (lam + s) * psi2**m * (1.0 + psi2) / (lam * den)


def q00(t: float, rates: Rates, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Probability of being back at the origin at time t, started there.

    Single series over k with two 1F2 factors per term.  Each term is
    assembled in log space around its a^(2k+1) scale (with the overall
    e^(-at) damping folded in), because both the power factors and the 1F2
    values grow exponentially with t while the term itself stays bounded.
    """
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if t == 0.0:
        return 1.0
    a, b = rates.total, rates.diff
    xb = b * b * t * t / 4.0
    la = math.log(a)
    lt2 = math.log(t / 2.0)
    r = b / a  # in (-1, 1)
    total = 0.0
    small = 0
    for k in range(ctl.max_terms):
        f1 = hyp1f2(-0.5, k + 0.5, k + 1.0, xb, ctl)
        f2 = hyp1f2(-0.5, k + 1.0, k + 1.5, xb, ctl)
        scale = math.exp(2 * k * lt2 - 2.0 * float(gammaln(k + 1.0)) + (2 * k + 1) * la - a * t)
        c1 = 1.0 + r ** (2 * k + 1)
        c2 = t * a * (1.0 - r ** (2 * k + 2)) / (2.0 * (k + 1))
        term = scale * (c1 * f1 + c2 * f2)
        total += term
        if abs(term) <= ctl.rel_tol * abs(total) and 2 * k >= a * t:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise ConvergenceError("q00 series did not converge", total / (a + b), ctl.max_terms)
    return min(max(total / (a + b), 0.0), 1.0)


def q10_series(t: float, rates: Rates, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Probability of sitting at the origin at time t, started at state 1.

    Series form of the convolution in `q10_integral`, obtained by
    integrating the kernel expansion term by term: four hypergeometric
    families per index n, three of flavour 1F2(1/2; n+u, n+v; a^2 t^2/4)
    and one 2F3 carrying the b-dependent part.  Terms are accumulated in
    log space with the same two-consecutive-terms stopping rule as the
    unrestricted chain's series.
    """
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if t == 0.0:
        return 0.0
    lam = rates.lam
    a, b = rates.total, rates.diff
    xa = a * a * t * t / 4.0
    xb = b * b * t * t / 4.0
    la = math.log(a)
    lt = math.log(t)
    r = b / a
    total = 0.0
    small = 0
    for n in range(ctl.max_terms):
        f_mid = _hyp_series((0.5,), (n + 1.0, n + 1.5), xa, ctl, "q10 term")
        f_low = _hyp_series((0.5,), (n + 0.5, n + 1.0), xa, ctl, "q10 term")
        f_high = _hyp_series((0.5,), (n + 1.5, n + 2.0), xa, ctl, "q10 term")
        f_b = _hyp_series((0.5, 1.0), (2.0, n + 1.5, n + 2.0), xb, ctl, "q10 term")
        scale = math.exp(
            2 * n * lt
            + (2 * n + 2) * la
            - (2 * n + 1) * math.log(2.0)
            - float(gammaln(n + 1.0))
            - float(gammaln(n + 2.0))
            - a * t
        ) * (1.0 - r ** (2 * n + 2))
        tsq = t * t / ((2 * n + 1) * (2 * n + 2))
        term = scale * (
            (a + b) * t / (2 * n + 1) * f_mid
            + (f_low - 1.0)
            + a * b * tsq * f_high
            + 0.5 * b * b * tsq * f_b
        )
        total += term
        if abs(term) <= ctl.rel_tol * abs(total) and 2 * n >= a * t:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise ConvergenceError("q10 series did not converge", total / (2 * lam * (a + b)), ctl.max_terms)
    return min(max(total / (2.0 * lam * (a + b)), 0.0), 1.0)


def _bessel_ratio_i1(z: float, ctl: SeriesControl) -> float:
    """I_1(z)/z for z >= 0, with the removable point at zero -> 1/2."""
    if z < 1e-6:
        return 0.5 + z * z / 16.0
    return bessel_i(1, z, ctl) / z


def _kernel_m(g: float, u: float, ctl: SeriesControl) -> float:
    """g^2 I_1(gu)/(gu); even in g and identically zero for g = 0."""
    if g == 0.0:
        return 0.0
    g = abs(g)
    return g * g * _bessel_ratio_i1(g * u, ctl)


def _companion(s: float, a: float, b: float, ctl: SeriesControl) -> float:
    """The function convolved against the Bessel-difference kernel in q10.

    a(I0+I1)(as) plus b times (one plus the running integral of that term)
    plus the even-in-b primitive of b I1(bs)/s; equals 2*lam at s = 0.
    """
    ga = a * (bessel_i(0, a * s, ctl) + bessel_i(1, a * s, ctl))
    int_ga = a * s * hyp1f2(0.5, 1.5, 1.0, a * a * s * s / 4.0, ctl) + bessel_i(0, a * s, ctl) - 1.0
    mb = 0.5 * b * b * s * hyp1f2(0.5, 1.5, 2.0, b * b * s * s / 4.0, ctl)
    return ga + b * (1.0 + int_ga) + mb


def q10_integral(t: float, rates: Rates, quad_tol: float = 1e-10) -> float:
    """Quadrature route to the same origin-occupation probability as
    `q10_series`: adaptive integration of the convolution of the
    Bessel-difference kernel a^2 I1(a u)/(a u) - b^2 I1(b u)/(b u) with its
    companion function over [0, t].  The I1(z)/z factors are even in z and
    continue through zero with value 1/2.
    """
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if not (quad_tol > 0.0):
        raise DomainError(f"quad_tol must be positive, got {quad_tol}")
    if t == 0.0:
        return 0.0
    lam = rates.lam
    a, b = rates.total, rates.diff
    ctl = DEFAULT_CONTROL

    def integrand(s: float) -> float:
        u = t - s
        return (_kernel_m(a, u, ctl) - _kernel_m(b, u, ctl)) * _companion(s, a, b, ctl)

    val, err = quad(integrand, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    if not math.isfinite(val) or err > max(quad_tol * 100.0, abs(val) * 1e-6):
        raise ConvergenceError("q10 quadrature did not converge", val, 0)
    v = math.exp(-a * t) / (2.0 * lam * (a + b)) * val
    return min(max(v, 0.0), 1.0)


def _default_q_k0(k: int, rates: Rates, ctl: SeriesControl):
    if k == 0:
        return lambda tau: q00(tau, rates, ctl)
    if k == 1:
        return lambda tau: q10_series(tau, rates, ctl)
    raise DomainError(
        f"no closed-form return probability for start {k}; supply q_k0 explicitly"
    )


def p_even(k: int, t: float, rates: Rates, q_k0=None, quad_tol: float = 1e-10) -> float:
    """Probability that the reflected chain sits in an even state at time t.

    Solves dP/dt = -2(lam+mu) P + lam q_{k,0}(t) + 2 mu with the
    definitional initial condition P(0) = 1 for even k and 0 for odd k:

        P(t) = mu/a + (P(0) - mu/a) e^(-2at) + lam * int_0^t e^(-2a(t-u)) q_{k,0}(u) du.

    `q_k0` supplies the return probability; by default the closed forms for
    k in {0, 1} are used, and any reentrant callable (for instance one
    backed by the uniformization oracle) may be injected for other starts.
    """
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    lam, mu = rates.lam, rates.mu
    a = rates.total
    if q_k0 is None:
        q_k0 = _default_q_k0(k, rates, DEFAULT_CONTROL)
    c = (1.0 if _is_even(k) else 0.0) - mu / a
    if t == 0.0:
        return mu / a + c
    conv, _ = quad(
        lambda u: math.exp(-2.0 * a * (t - u)) * q_k0(u), 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=200
    )
    return mu / a + c * math.exp(-2.0 * a * t) + lam * conv


def r_mean(
    k: int, t: float, rates: Rates, ctl: SeriesControl = DEFAULT_CONTROL, q_k0=None, quad_tol: float = 1e-10
) -> float:
    """Mean of the reflected chain at time t: k plus lam times the
    accumulated occupation of the origin (the boundary is the only state
    where up- and down-drift do not cancel)."""
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if q_k0 is None:
        q_k0 = _default_q_k0(k, rates, ctl)
    if t == 0.0:
        return float(k)
    occ, _ = quad(q_k0, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    return k + rates.lam * occ


def r_variance(
    k: int, t: float, rates: Rates, ctl: SeriesControl = DEFAULT_CONTROL, q_k0=None, quad_tol: float = 1e-10
) -> float:
    """Variance of the reflected chain at time t.

    2(lam-mu) int P_k - lam(2k+1) int q_{k,0} - lam^2 (int q_{k,0})^2 + 2 mu t.
    The double integral of P_k is flattened through Fubini so only single
    quadratures of the return probability remain:

        int_0^t P_k = mu/a t + c (1-e^(-2at))/(2a)
                      + lam/(2a) int_0^t q_{k,0}(u) (1 - e^(-2a(t-u))) du.
    """
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    lam, mu = rates.lam, rates.mu
    a = rates.total
    if q_k0 is None:
        q_k0 = _default_q_k0(k, rates, ctl)
    if t == 0.0:
        return 0.0
    occ, _ = quad(q_k0, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    weighted, _ = quad(
        lambda u: q_k0(u) * (1.0 - math.exp(-2.0 * a * (t - u))),
        0.0,
        t,
        epsabs=quad_tol,
        epsrel=quad_tol,
        limit=200,
    )
    c = (1.0 if _is_even(k) else 0.0) - mu / a
    int_p = mu / a * t + c * (1.0 - math.exp(-2.0 * a * t)) / (2.0 * a) + lam / (2.0 * a) * weighted
    return 2.0 * (lam - mu) * int_p - lam * (2 * k + 1) * occ - lam * lam * occ * occ + 2.0 * mu * t
