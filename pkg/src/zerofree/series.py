"""Rigorous enclosures for the series driving every certificate.

Four series families appear in the first- and second-derivative
conditions, all indexed by the modulus floor h and (for two of them) the
genus sequence p:

    S1(q) = sum_n 1 / (h(n) - t)^q                  (q = 1, 2, ...)
    SP    = sum_n (1 - (t/h(n))^{p_n}) / (h(n) - t)
    SD(j) = sum_n sum_{k=j+1}^{p_n} (k-1)!/(k-1-j)! * t^{k-1-j} / h(n)^k

Each evaluator returns a SeriesBoundReport whose enclosure is
[partial_sum, partial_sum + tail_bound]: the partial sum of the first N
terms (all terms are non-negative) plus an analytic remainder bound.

Tail bounds are closed-form and rule-specific.  For n > N and h
nondecreasing there,

    1/(h(n) - t) <= F/h(n),   F := 1/(1 - t/h(N+1)),

so the shifted tail is F^q times the plain reciprocal tail, which the
integral test (Power rules) or the geometric sum (Exponential rules)
bounds exactly:

    Power(c, s):        sum_{n>N} 1/(c n^s)^q <= N^{1-qs} / (c^q (qs-1))
    Exponential(c, b):  sum_{n>N} 1/(c b^n)^q <= b^{-qN} / (c^q (b^q - 1))

SP's numerator never exceeds 1, and SD(j)'s inner sum extended to
infinity is the binomial series (1-x)^{-(j+1)}, giving SD(j) terms
<= j!/(h(n)-t)^{j+1}; both therefore reuse the S1-style tails.

Floating-point rounding is not tracked per term.  Instead every tail
bound is widened by the relative factor (1 + 1e-12 * terms_used), and
summation order is fixed (chunked pairwise sums combined with fsum), so
results are deterministic across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Constant,
    Enclosure,
    Exponential,
    ExplicitPrefix,
    Linear,
    Power,
    SequenceRule,
    eval_rule,
    is_eventually_zero,
    prefix_length,
    tail_rule,
)

__all__ = [
    "SeriesBoundReport",
    "SeriesDomainError",
    "TruncationLimitError",
    "sum_inv_shifted",
    "sum_inv_shifted_sq",
    "sum_inv_shifted_pow",
    "sum_genus_term",
    "sum_poly_deriv",
    "sum_deriv_weighted",
    "genus_term",
    "closed_poly_deriv_term",
]

DEFAULT_TOL = 1e-8
MAX_TERMS = 1 << 28
_CHUNK = 1 << 22
_ROUNDING_REL = 1e-12
# exp(s) == 0.0 exactly for s below this, so (1 - x^p) == 1.0 exactly
_UNDERFLOW_LOG = -760.0


class SeriesDomainError(ValueError):
    """Some h(n) <= t, so a series term is undefined or negative."""


class TruncationLimitError(RuntimeError):
    """The requested tail tolerance needs more terms than the cap allows."""


@dataclass(frozen=True)
class SeriesBoundReport:
    partial_sum: float
    terms_used: int
    tail_bound: float
    enclosure: Enclosure

    @property
    def value(self) -> Enclosure:
        return self.enclosure


# ---------------------------------------------------------------------------
# Vectorized rule evaluation
# ---------------------------------------------------------------------------

def _rule_array(rule: SequenceRule, lo: int, hi: int) -> np.ndarray:
    """rule(n) for n = lo..hi inclusive, as float64."""
    if hi < lo:
        return np.empty(0, dtype=float)
    n = np.arange(lo, hi + 1, dtype=float)
    if isinstance(rule, Linear):
        return n
    if isinstance(rule, Constant):
        return np.full(n.shape, float(rule.c))
    if isinstance(rule, Power):
        s = rule.s
        if s == 1:
            base = n
        elif s == 2:
            base = n * n
        elif s == 3:
            base = n * n * n
        else:
            base = n ** s
        return rule.c * base
    if isinstance(rule, Exponential):
        return rule.c * np.power(float(rule.b), n)
    if isinstance(rule, ExplicitPrefix):
        plen = len(rule.values)
        if lo > plen:
            return _rule_array(rule.tail, lo, hi)
        head_hi = min(hi, plen)
        head = np.array(rule.values[lo - 1:head_hi], dtype=float)
        if hi <= plen:
            return head
        return np.concatenate([head, _rule_array(rule.tail, plen + 1, hi)])
    raise TypeError(f"unsupported sequence rule {type(rule).__name__}")


# ---------------------------------------------------------------------------
# Tail machinery
# ---------------------------------------------------------------------------

def _reciprocal_power_tail(h: SequenceRule, n_used: int, q: int) -> float:
    """Bound on sum_{n > n_used} 1/h(n)^q from the tail rule."""
    r = tail_rule(h)
    if isinstance(r, Power):
        qs = q * r.s
        if qs <= 1:
            return math.inf
        return n_used ** (1.0 - qs) / (r.c ** q * (qs - 1.0))
    if isinstance(r, Exponential):
        return r.b ** (-q * n_used) / (r.c ** q * (r.b ** q - 1.0))
    raise SeriesDomainError(
        f"no tail bound for modulus floor rule {type(r).__name__}; "
        "use a Power (exponent > 1) or Exponential rule"
    )


def _shift_factor(h: SequenceRule, n_used: int, t: float) -> float:
    """F = 1/(1 - t/h(N+1)), valid for the nondecreasing region n > N."""
    if t == 0:
        return 1.0
    hv = float(eval_rule(h, n_used + 1))
    if not hv > t:
        raise SeriesDomainError(f"h({n_used + 1})={hv} is not > t={t}")
    return 1.0 / (1.0 - t / hv)


def _shifted_tail(h: SequenceRule, n_used: int, t: float, q: int) -> float:
    return _shift_factor(h, n_used, t) ** q * _reciprocal_power_tail(h, n_used, q)


def _choose_truncation(h: SequenceRule, t: float, q: int, target: float,
                       max_terms: int) -> int:
    """Smallest practical N with the analytic q-tail below target."""
    if not target > 0:
        raise ValueError(f"tail tolerance must be positive, got {target}")
    r = tail_rule(h)
    n = max(prefix_length(h) + 1, 4)
    factor = 1.0
    for _ in range(3):
        if isinstance(r, Power):
            qs = q * r.s
            if qs <= 1:
                raise SeriesDomainError(
                    f"power floor exponent {r.s} gives non-summable 1/h^{q}"
                )
            est = (factor ** q / (r.c ** q * target * (qs - 1.0))) ** (1.0 / (qs - 1.0))
        else:  # Exponential; other types already rejected by the tail bound
            est = math.log(factor ** q / (r.c ** q * target * (r.b ** q - 1.0))) / (q * math.log(r.b))
        n = max(n, int(math.ceil(est)))
        if n > max_terms:
            raise TruncationLimitError(
                f"tolerance {target:g} needs about {n} terms (cap {max_terms}); "
                "loosen the tolerance"
            )
        factor = _shift_factor(h, n, t)
    while _shifted_tail(h, n, t, q) > target:
        n = int(n * 1.1) + 1
        if n > max_terms:
            raise TruncationLimitError(
                f"tolerance {target:g} not reachable within {max_terms} terms"
            )
    return n


def _finish(partial: float, n_used: int, analytic_tail: float) -> SeriesBoundReport:
    tail = analytic_tail * (1.0 + _ROUNDING_REL * n_used)
    return SeriesBoundReport(
        partial_sum=partial,
        terms_used=n_used,
        tail_bound=tail,
        enclosure=Enclosure(partial, partial + tail),
    )


def _check_domain(hv: np.ndarray, t: float, chunk_lo: int) -> None:
    bad = np.nonzero(~(hv > t))[0]
    if bad.size:
        k = chunk_lo + int(bad[0])
        raise SeriesDomainError(f"h({k})={hv[bad[0]]} is not > t={t}")


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

def sum_inv_shifted_pow(h: SequenceRule, t: float, power: int,
                        tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of sum_n 1/(h(n) - t)^power for integer power >= 1."""
    if t < 0:
        raise SeriesDomainError(f"shift t must be >= 0, got {t}")
    if power < 1:
        raise ValueError(f"power must be >= 1, got {power}")
    n_used = _choose_truncation(h, t, power, 0.999 * tol, max_terms)
    chunks = []
    for lo in range(1, n_used + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_used)
        hv = _rule_array(h, lo, hi)
        _check_domain(hv, t, lo)
        d = hv - t
        if power == 1:
            terms = 1.0 / d
        elif power == 2:
            terms = 1.0 / (d * d)
        else:
            terms = d ** (-power)
        chunks.append(float(np.sum(terms)))
    partial = math.fsum(chunks)
    return _finish(partial, n_used, _shifted_tail(h, n_used, t, power))


def sum_inv_shifted(h: SequenceRule, t: float, tol: float = DEFAULT_TOL,
                    max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of sum_n 1/(h(n) - t)."""
    return sum_inv_shifted_pow(h, t, 1, tol=tol, max_terms=max_terms)


def sum_inv_shifted_sq(h: SequenceRule, t: float, tol: float = DEFAULT_TOL,
                       max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of sum_n 1/(h(n) - t)^2."""
    return sum_inv_shifted_pow(h, t, 2, tol=tol, max_terms=max_terms)


def genus_term(h_n: float, p_n: float, t: float) -> float:
    """(1 - (t/h)^p)/(h - t): the closed form of sum_{k<=p} t^{k-1}/h^k."""
    if p_n == 0:
        return 0.0
    if t == 0:
        return 1.0 / h_n
    return (1.0 - (t / h_n) ** p_n) / (h_n - t)


def _genus_underflow_cut(h: SequenceRule, p: SequenceRule, t: float, n_used: int) -> int:
    """First index after which (t/h(n))^{p_n} is exactly 0.0 in doubles.

    Beyond both prefixes, p is nondecreasing and t/h decreasing, so the
    exponent p*log(t/h) decreases; once below the underflow threshold it
    stays there and the closed form degrades to 1/(h - t) exactly.
    """
    start = max(prefix_length(h), prefix_length(p)) + 1
    for lo in range(start, n_used + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_used)
        hv = _rule_array(h, lo, hi)
        pv = _rule_array(p, lo, hi)
        with np.errstate(divide="ignore"):
            s = pv * np.log(t / hv)
        below = np.nonzero(s < _UNDERFLOW_LOG)[0]
        if below.size:
            return lo + int(below[0])
    return n_used


def sum_genus_term(h: SequenceRule, p: SequenceRule, t: float,
                   tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of sum_n (1 - (t/h(n))^{p_n}) / (h(n) - t).

    Terms use the closed geometric form, never the inner k-sum.  The tail
    reuses the sum_inv_shifted bound (each numerator is <= 1).
    """
    if t < 0:
        raise SeriesDomainError(f"shift t must be >= 0, got {t}")
    if is_eventually_zero(p):
        # Finite sum: only the explicit prefix can contribute.
        n_used = prefix_length(p)
        total = 0.0
        for n in range(1, n_used + 1):
            hv = float(eval_rule(h, n))
            if not hv > t:
                raise SeriesDomainError(f"h({n})={hv} is not > t={t}")
            total += genus_term(hv, float(eval_rule(p, n)), t)
        return _finish(total, max(n_used, 1), 0.0)

    n_used = _choose_truncation(h, t, 1, 0.999 * tol, max_terms)
    cut = n_used if t == 0 else _genus_underflow_cut(h, p, t, n_used)
    chunks = []
    for lo in range(1, n_used + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_used)
        hv = _rule_array(h, lo, hi)
        _check_domain(hv, t, lo)
        if t == 0:
            pv = _rule_array(p, lo, hi)
            terms = np.where(pv > 0, 1.0, 0.0) / hv
        elif lo > cut:
            terms = 1.0 / (hv - t)
        else:
            pv = _rule_array(p, lo, hi)
            x = t / hv
            with np.errstate(under="ignore"):
                xp = np.where(pv > 0, np.exp(pv * np.log(x)), 1.0)
            head = (1.0 - xp) / (hv - t)
            if hi > cut:
                k = cut - lo + 1
                head[k:] = 1.0 / (hv[k:] - t)
            terms = head
        chunks.append(float(np.sum(terms)))
    partial = math.fsum(chunks)
    return _finish(partial, n_used, _shifted_tail(h, n_used, t, 1))


def closed_poly_deriv_term(h_n: float, p_n: float, t: float) -> float:
    """Closed form of sum_{k=1}^{p} (k-1) t^{k-2} / h^k for one index.

    Equals ((p-1)x^{p+1} - p x^p + x) / ((x-1)^2 t h) with x = t/h; the
    t -> 0 limit is 1/h^2 whenever p >= 2.
    """
    if p_n <= 1:
        return 0.0
    if t == 0:
        return 1.0 / (h_n * h_n)
    x = t / h_n
    return ((p_n - 1.0) * x ** (p_n + 1) - p_n * x ** p_n + x) / ((x - 1.0) ** 2 * t * h_n)


def sum_poly_deriv(h: SequenceRule, p: SequenceRule, t: float,
                   tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of sum_n sum_{k=1}^{p_n} (k-1) t^{k-2} / h(n)^k.

    Per-index terms come from the closed form, and each is bounded by
    1/(h(n)-t)^2, so the squared-reciprocal tail applies.
    """
    return _deriv_weighted_order1(h, p, t, tol, max_terms)


def _deriv_weighted_order1(h, p, t, tol, max_terms) -> SeriesBoundReport:
    if t < 0:
        raise SeriesDomainError(f"shift t must be >= 0, got {t}")
    n_used = _choose_truncation(h, t, 2, 0.999 * tol, max_terms)
    chunks = []
    for lo in range(1, n_used + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_used)
        hv = _rule_array(h, lo, hi)
        _check_domain(hv, t, lo)
        pv = _rule_array(p, lo, hi)
        if t == 0:
            terms = np.where(pv >= 2, 1.0, 0.0) / (hv * hv)
        else:
            x = t / hv
            with np.errstate(under="ignore"):
                logx = np.log(x)
                xp = np.exp(pv * logx)
                xp1 = np.exp((pv + 1.0) * logx)
            terms = ((pv - 1.0) * xp1 - pv * xp + x) / ((x - 1.0) ** 2 * t * hv)
            terms = np.where(pv <= 1, 0.0, terms)
        chunks.append(float(np.sum(terms)))
    partial = math.fsum(chunks)
    return _finish(partial, n_used, _shifted_tail(h, n_used, t, 2))


def sum_deriv_weighted(h: SequenceRule, p: SequenceRule, t: float, order: int,
                       tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> SeriesBoundReport:
    """Enclosure of SD(order) = sum_n sum_{k>order}^{p_n} ff(k-1, order) t^{k-1-order}/h(n)^k

    with ff(a, j) = a!/(a-j)!, the order-th derivative analogue of the
    genus series.  order = 1 uses the closed form; higher orders sum the
    inner terms directly (their truncations are short: terms fall like
    1/h^{order+1}).
    """
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    if order == 1:
        return _deriv_weighted_order1(h, p, t, tol, max_terms)
    if t < 0:
        raise SeriesDomainError(f"shift t must be >= 0, got {t}")
    q = order + 1
    fact = math.factorial(order)
    n_used = _choose_truncation(h, t, q, 0.999 * tol / fact, max_terms)
    hv = _rule_array(h, 1, n_used)
    _check_domain(hv, t, 1)
    pv = _rule_array(p, 1, n_used)
    if t == 0:
        partial = float(np.sum(np.where(pv >= q, 1.0, 0.0) * fact / hv ** q))
    else:
        reps = np.maximum(pv - order, 0).astype(np.int64)
        total = int(reps.sum())
        if total > (1 << 27):
            raise TruncationLimitError(
                f"inner expansion needs {total} terms; loosen the tolerance"
            )
        idx = np.repeat(np.arange(n_used), reps)
        starts = np.concatenate([[0], np.cumsum(reps)[:-1]])
        offs = np.arange(total) - np.repeat(starts, reps)
        k = order + 1.0 + offs  # inner index
        ff = np.ones(total)
        for i in range(1, order + 1):
            ff *= k - i  # (k-1)(k-2)...(k-order), exact falling factorial
        x = t / hv[idx]
        with np.errstate(under="ignore"):
            terms = ff * np.exp((k - 1.0 - order) * np.log(x)) / hv[idx] ** q
        partial = float(np.sum(terms))
    return _finish(partial, n_used, fact * _shifted_tail(h, n_used, t, q))
