"""Scalar special functions used by the closed-form transition probabilities.

Everything here is evaluated by direct power series with a running
term-ratio recurrence (no factorials are ever materialised), which keeps
individual terms in range long after naive evaluation would overflow.
All functions are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

__all__ = [
    "SeriesControl",
    "DomainError",
    "ConvergenceError",
    "bessel_i",
    "hyp1f2",
    "log_binomial",
]

NEG_INF = float("-inf")


class DomainError(ValueError):
    """An argument lies outside the domain a routine supports."""


class ConvergenceError(RuntimeError):
    """A series hit its term cap before meeting the requested tolerance.

    Carries the partial sum and the number of terms accumulated so far so
    callers can inspect how close the evaluation got.
    """

    def __init__(self, message: str, partial: float, terms: int):
        super().__init__(f"{message} (partial sum {partial!r} after {terms} terms)")
        self.partial = partial
        self.terms = terms


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite-series evaluation.

    rel_tol   : stop once terms are this small relative to the partial sum,
                for two consecutive terms (single-term tests misfire where a
                series crosses between growth and decay regimes).
    max_terms : hard cap on summed terms; exceeding it raises
                ConvergenceError.
    """

    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive and finite, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def bessel_i(order: int, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Modified Bessel function of the first kind, integer order >= 0.

    Sums I_n(x) = sum_m (x/2)^(2m+n) / (m! (m+n)!) with the term recurrence
    t_{m+1} = t_m * (x/2)^2 / ((m+1)(m+n+1)).  Terms are positive, so the
    two-consecutive-small-terms rule plus a past-the-peak guard bounds the
    tail geometrically.
    """
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"x must be finite and >= 0, got {x}")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0

    half = x / 2.0
    # first term (x/2)^n / n! in log form: n can be large enough to overflow
    # a naive power even when I_n(x) itself is representable
    term = math.exp(order * math.log(half) - math.lgamma(order + 1))
    total = term
    q = half * half
    small = 0
    for m in range(ctl.max_terms):
        ratio = q / ((m + 1) * (m + order + 1))
        term *= ratio
        total += term
        if term <= ctl.rel_tol * total and ratio < 1.0:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError(f"bessel_i({order}, {x}) did not converge", total, ctl.max_terms)


def _hyp_series(nums, dens, x: float, ctl: SeriesControl, name: str = "hyp") -> float:
    """Generalized hypergeometric sum with one-step Pochhammer recurrence.

    Sums sum_m [prod (u)_m / prod (d)_m] x^m / m! for the upper-parameter
    tuple `nums` and lower-parameter tuple `dens`.  Stops on two consecutive
    terms below rel_tol once the term ratio has dropped under 1/2, at which
    point the omitted tail is below 2|next term|.
    """
    term = 1.0
    total = 1.0
    small = 0
    for m in range(ctl.max_terms):
        num = x
        for u in nums:
            num *= u + m
        den = m + 1.0
        for d in dens:
            den *= d + m
        ratio = num / den
        term *= ratio
        total += term
        if abs(term) <= ctl.rel_tol * abs(total) and abs(ratio) < 0.5:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError(f"{name}({x}) did not converge", total, ctl.max_terms)


def hyp1f2(a: float, b1: float, b2: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Generalized hypergeometric function 1F2(a; b1, b2; x).

    The series is entire in x; negative `a` (the closed forms use a = -1/2
    and a = 1/2) needs no special casing because the term recurrence carries
    the sign.  Lower parameters at zero or a negative integer would hit a
    pole and are rejected.
    """
    for b in (b1, b2):
        if b == 0.0 or (b < 0.0 and b == int(b)):
            raise DomainError(f"lower parameter {b} is zero or a negative integer")
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    return _hyp_series((a,), (b1, b2), x, ctl, name=f"hyp1f2({a},{b1},{b2})")


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) through log-gamma, with -inf for k outside [0, n].

    The -inf sentinel (rather than an error) lets inner sums index binomials
    right at their boundary and simply drop the vanishing terms.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if k < 0 or k > n:
        return NEG_INF
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
