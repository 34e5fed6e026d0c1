"""Inequality certificates for zero-free punctured disks.

Each checker compares an upper bound for the non-principal part of a
logarithmic derivative against the principal term it must not cancel.
For the first derivative the certified condition is

    max|g'| + sum 1/(h(n)-t) + sum (1-(t/h(n))^{p_n})/(h(n)-t)  <  m/t,

which rules out zeros of f' in 0 < |z| < t.  The second-derivative
checker adds squared-series and derivative-series budgets plus an
auxiliary split parameter p > 1.  Scaling helpers compute how much g
must be divided down for a family to certify, and a bisection probes the
largest certifiable radius.

Enclosure discipline throughout: every left-hand quantity enters through
its upper endpoint, every threshold through its exact value or lower
endpoint, and verdicts demand strictly positive margins with no extra
tolerance (the enclosures already carry all numeric slack).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    Enclosure,
    ExplicitPrefix,
    FunctionFamily,
    Linear,
    eval_rule,
    max_modulus_on_closed_disk,
    poly_derivative,
    validate_family,
)
from .series import (
    DEFAULT_TOL,
    sum_genus_term,
    sum_inv_shifted,
    sum_inv_shifted_sq,
    sum_poly_deriv,
)

__all__ = [
    "CERTIFIED",
    "NOT_CERTIFIED",
    "PRECONDITION_FAILED",
    "Certificate",
    "RadiusSearchResult",
    "poly_exclusion_radius",
    "check_first_derivative",
    "scale_for_first_derivative",
    "min_scaling",
    "check_second_derivative",
    "max_certified_radius",
    "series_budget",
    "CLOSED_DISK_NOTE",
    "CROSS_TERM_NOTE",
]

CERTIFIED = "certified"
NOT_CERTIFIED = "notCertified"
PRECONDITION_FAILED = "preconditionFailed"

CLOSED_DISK_NOTE = "derivative max bounded over the closed disk |z| <= t (contains the open-disk supremum)"
CROSS_TERM_NOTE = (
    "second-derivative condition drops the 2(m/z)g' cross term from its principal lower bound; "
    "the derived-inequality route (deriv-k, k=2) keeps it"
)
MIN_SCALE_NOTE = "any scale strictly above min_scale certifies; the infimum itself yields equality"
ALT_SCALE_NOTE = (
    "alt_scale_reserved_budget reserves a 1/t derivative allowance and doubles the remaining margin; "
    "reported for comparison, not asserted"
)


@dataclass
class Certificate:
    """Outcome of one inequality check.

    margin is threshold minus total (positive means certified) and is
    None when a precondition failed before any comparison was made.
    work carries deterministic effort counters (series terms used).
    """

    check: str
    inputs: dict
    quantities: dict[str, Enclosure]
    margin: float | None
    verdict: str
    warnings: list[str] = field(default_factory=list)
    work: dict[str, int] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED


def _digest(fam: FunctionFamily) -> dict:
    from .config import rule_to_text, zeros_to_text

    d = {
        "m": fam.m,
        "g_coeffs": [[c.real, c.imag] for c in fam.g_coeffs],
        "genus": rule_to_text(fam.genus),
        "modulus_floor": rule_to_text(fam.modulus_floor),
    }
    if fam.zeros is not None:
        d["zeros"] = zeros_to_text(fam.zeros)
    return d


def _failed(check: str, fam: FunctionFamily, t: float, violations: list[str],
            extra_inputs: dict | None = None) -> Certificate:
    inputs = {"t": t, "family": _digest(fam)}
    if extra_inputs:
        inputs.update(extra_inputs)
    return Certificate(
        check=check,
        inputs=inputs,
        quantities={},
        margin=None,
        verdict=PRECONDITION_FAILED,
        warnings=list(violations),
    )


def series_budget(fam: FunctionFamily, t: float, tol: float = DEFAULT_TOL):
    """The two first-derivative series reports plus their combined enclosure."""
    s1 = sum_inv_shifted(fam.modulus_floor, t, tol=tol)
    sp = sum_genus_term(fam.modulus_floor, fam.genus, t, tol=tol)
    return s1, sp, s1.enclosure + sp.enclosure


# ---------------------------------------------------------------------------
# Polynomial baseline
# ---------------------------------------------------------------------------

def poly_exclusion_radius(n: int, m: int, j: int) -> Fraction:
    """Exact radius below which the j-th derivative of z^m * prod(z - z_k)
    (degree n, all |z_k| >= 1) has no nonzero root:

        prod_{i=0}^{j-1} (m - i) / (n - i).
    """
    if not (1 <= j <= m <= n):
        raise ValueError(f"need 1 <= j <= m <= n, got j={j}, m={m}, n={n}")
    r = Fraction(1)
    for i in range(j):
        r *= Fraction(m - i, n - i)
    return r


# ---------------------------------------------------------------------------
# First derivative
# ---------------------------------------------------------------------------

def check_first_derivative(fam: FunctionFamily, t: float,
                           gprime_bound: Enclosure | None = None,
                           series_tol: float = DEFAULT_TOL) -> Certificate:
    """Certify that f' has no zeros with 0 < |z| < t."""
    violations = validate_family(fam, t)
    if violations:
        return _failed("deriv1", fam, t, violations)

    warnings = []
    if gprime_bound is not None:
        big_m = gprime_bound
        warnings.append("user-supplied bound for max|g'| trusted as given")
    else:
        big_m = max_modulus_on_closed_disk(fam.gprime_coeffs, t)
        warnings.append(CLOSED_DISK_NOTE)

    s1, sp, budget = series_budget(fam, t, series_tol)
    total = big_m + budget
    threshold = fam.m / t
    margin = threshold - total.hi
    return Certificate(
        check="deriv1",
        inputs={"t": t, "family": _digest(fam), "series_tol": series_tol},
        quantities={
            "gprime_max": big_m,
            "sum_inv_shifted": s1.enclosure,
            "sum_genus_term": sp.enclosure,
            "series_budget": budget,
            "total": total,
            "threshold": Enclosure.point(threshold),
        },
        margin=margin,
        verdict=CERTIFIED if margin > 0 else NOT_CERTIFIED,
        warnings=warnings,
        work={"sum_inv_shifted_terms": s1.terms_used, "sum_genus_term_terms": sp.terms_used},
    )


def scale_for_first_derivative(fam: FunctionFamily, t: float,
                               series_tol: float = DEFAULT_TOL) -> Certificate:
    """Scaling R with the property that replacing g by g/R certifies.

    Needs genus n -> n and m/t > 2 * sum 1/(h(n)-t); the returned R uses
    the conservative endpoint pairing, and the certificate embeds a
    re-check of the scaled family.  R = 0 means g is already constant.
    """
    if not isinstance(fam.genus, Linear):
        return _failed("deriv1-scaled", fam, t, ["scaling rule requires genus n -> n (linear)"])
    violations = validate_family(fam, t)
    if violations:
        return _failed("deriv1-scaled", fam, t, violations)

    big_m = max_modulus_on_closed_disk(fam.gprime_coeffs, t)
    s1 = sum_inv_shifted(fam.modulus_floor, t, tol=series_tol)
    threshold = fam.m / t
    denom_hi = threshold - 2.0 * s1.enclosure.hi
    if denom_hi <= 0:
        cert = _failed("deriv1-scaled", fam, t,
                       [f"m/t = {threshold} is not above twice sum_inv_shifted = {2 * s1.enclosure.hi}"])
        cert.quantities["sum_inv_shifted"] = s1.enclosure
        return cert

    if big_m.hi == 0.0:
        scale = Enclosure(0.0, 0.0)
        inner = check_first_derivative(fam, t, series_tol=series_tol)
    else:
        scale = Enclosure(2.0 * big_m.lo / (threshold - 2.0 * s1.enclosure.lo),
                          2.0 * big_m.hi / denom_hi)
        scaled = FunctionFamily(
            m=fam.m,
            g_coeffs=tuple(c / scale.hi for c in fam.g_coeffs),
            genus=fam.genus,
            modulus_floor=fam.modulus_floor,
            zeros=fam.zeros,
        )
        inner = check_first_derivative(scaled, t, series_tol=series_tol)

    quantities = {"scale": scale, "gprime_max": big_m, "sum_inv_shifted": s1.enclosure}
    for name, q in inner.quantities.items():
        quantities[f"scaled_{name}"] = q
    return Certificate(
        check="deriv1-scaled",
        inputs={"t": t, "family": _digest(fam), "series_tol": series_tol},
        quantities=quantities,
        margin=inner.margin,
        verdict=inner.verdict,
        warnings=[CLOSED_DISK_NOTE] + inner.warnings,
        work={"sum_inv_shifted_terms": s1.terms_used, **inner.work},
    )


def min_scaling(fam: FunctionFamily, t: float,
                prefix_count: int | None = None,
                floor_shift: float | None = None,
                clearance: float | None = None,
                series_tol: float = DEFAULT_TOL) -> Certificate:
    """Infimal scale L0 such that g/L certifies for every L > L0.

    Default route solves max|g'|/L + S1 + SP < m/t directly.  The
    prefix-split variant (all of prefix_count, floor_shift, clearance
    given) instead budgets the first prefix_count-1 series terms at
    1/((clearance-1) t) each, bounds the tail by sum 1/(h(n)-floor_shift),
    and applies the doubled-margin rule.
    """
    violations = validate_family(fam, t)
    if violations:
        return _failed("min-scale", fam, t, violations)
    split = [prefix_count, floor_shift, clearance]
    if any(v is not None for v in split) and any(v is None for v in split):
        raise ValueError("prefix_count, floor_shift and clearance must be given together")

    big_m = max_modulus_on_closed_disk(fam.gprime_coeffs, t)
    threshold = fam.m / t
    quantities: dict[str, Enclosure] = {"gprime_max": big_m}
    warnings = [CLOSED_DISK_NOTE, MIN_SCALE_NOTE]
    work: dict[str, int] = {}

    if prefix_count is not None:
        if clearance <= 1:
            raise ValueError(f"clearance must exceed 1, got {clearance}")
        head = (prefix_count - 1) / ((clearance - 1) * t)
        tail = sum_inv_shifted(fam.modulus_floor, floor_shift, tol=series_tol)
        s = Enclosure(head, head) + tail.enclosure
        quantities["prefix_split_sum"] = s
        work["sum_inv_shifted_terms"] = tail.terms_used
        denom_hi = threshold - 2.0 * s.hi
        margin = denom_hi
        if denom_hi <= 0:
            verdict = PRECONDITION_FAILED
            warnings.append("no scaling certifies: m/t does not exceed twice the split sum")
            scale = None
        else:
            verdict = CERTIFIED
            scale = (Enclosure(0.0, 0.0) if big_m.hi == 0.0 else
                     Enclosure(2.0 * big_m.lo / (threshold - 2.0 * s.lo), 2.0 * big_m.hi / denom_hi))
    else:
        s1, sp, budget = series_budget(fam, t, series_tol)
        quantities.update({
            "sum_inv_shifted": s1.enclosure,
            "sum_genus_term": sp.enclosure,
            "series_budget": budget,
        })
        work = {"sum_inv_shifted_terms": s1.terms_used, "sum_genus_term_terms": sp.terms_used}
        denom_hi = threshold - budget.hi
        margin = denom_hi
        if denom_hi <= 0:
            verdict = PRECONDITION_FAILED
            warnings.append("no scaling certifies: m/t does not exceed the series budget")
            scale = None
        else:
            verdict = CERTIFIED
            scale = (Enclosure(0.0, 0.0) if big_m.hi == 0.0 else
                     Enclosure(big_m.lo / (threshold - budget.lo), big_m.hi / denom_hi))
            alt_denom = denom_hi - 1.0 / t
            if big_m.hi > 0.0 and alt_denom > 0:
                quantities["alt_scale_reserved_budget"] = Enclosure(
                    2.0 * big_m.lo / (threshold - budget.lo - 1.0 / t),
                    2.0 * big_m.hi / alt_denom,
                )
                warnings.append(ALT_SCALE_NOTE)

    if scale is not None:
        quantities["min_scale"] = scale
    return Certificate(
        check="min-scale",
        inputs={
            "t": t, "family": _digest(fam), "series_tol": series_tol,
            "prefix_count": prefix_count, "floor_shift": floor_shift, "clearance": clearance,
        },
        quantities=quantities,
        margin=margin,
        verdict=verdict,
        warnings=warnings,
        work=work,
    )


# ---------------------------------------------------------------------------
# Second derivative
# ---------------------------------------------------------------------------

def check_second_derivative(fam: FunctionFamily, t: float, p: int,
                            g_bounds: tuple[Enclosure, Enclosure] | None = None,
                            series_tol: float = DEFAULT_TOL) -> Certificate:
    """Certify that f'' has no zeros with 0 < |z| < t.

    Three conditions, with S = S1 + SP the first-derivative budget:
      (a) m > 1 + 2t S
      (b) max|g'| + S < m/(p t)          for the integer split p > 1
      (c) max|g''| < (m/t^2)(m - 1 - 2t S) - S1^(2) - SD - m^2/(p^2 t^2),
          the right side being positive.
    """
    if not (isinstance(p, int) and p > 1):
        return _failed("deriv2", fam, t, [f"split parameter p must be an integer > 1, got {p}"],
                       {"p": p})
    violations = validate_family(fam, t)
    if violations:
        return _failed("deriv2", fam, t, violations, {"p": p})

    warnings = []
    if g_bounds is not None:
        m1, m2 = g_bounds
        warnings.append("user-supplied bounds for max|g'|, max|g''| trusted as given")
    else:
        g1 = fam.gprime_coeffs
        m1 = max_modulus_on_closed_disk(g1, t)
        m2 = max_modulus_on_closed_disk(poly_derivative(g1), t)
        warnings.append(CLOSED_DISK_NOTE)
    warnings.append(CROSS_TERM_NOTE)

    s1, sp, budget = series_budget(fam, t, series_tol)
    s2 = sum_inv_shifted_sq(fam.modulus_floor, t, tol=series_tol)
    sd = sum_poly_deriv(fam.modulus_floor, fam.genus, t, tol=series_tol)

    order_rhs = 1.0 + 2.0 * t * budget.hi
    margin_order = fam.m - order_rhs

    first_threshold = fam.m / (p * t)
    first_total = m1.hi + budget.hi
    margin_first = first_threshold - first_total

    second_rhs = ((fam.m / t ** 2) * (fam.m - 1.0 - 2.0 * t * budget.hi)
                  - s2.enclosure.hi - sd.enclosure.hi - fam.m ** 2 / (p ** 2 * t ** 2))
    margin_second = second_rhs - m2.hi

    margin = min(margin_order, margin_first, margin_second)
    if second_rhs <= 0:
        verdict = NOT_CERTIFIED
        warnings.append("second-derivative budget is non-positive; no bound on |g''| can help")
    else:
        verdict = CERTIFIED if margin > 0 else NOT_CERTIFIED

    return Certificate(
        check="deriv2",
        inputs={"t": t, "p": p, "family": _digest(fam), "series_tol": series_tol},
        quantities={
            "gprime_max": m1,
            "gsecond_max": m2,
            "sum_inv_shifted": s1.enclosure,
            "sum_genus_term": sp.enclosure,
            "series_budget": budget,
            "sum_inv_shifted_sq": s2.enclosure,
            "sum_poly_deriv": sd.enclosure,
            "order_threshold": Enclosure.point(order_rhs),
            "first_bound_threshold": Enclosure.point(first_threshold),
            "second_bound_budget": Enclosure.point(second_rhs),
        },
        margin=margin,
        verdict=verdict,
        warnings=warnings,
        work={
            "sum_inv_shifted_terms": s1.terms_used,
            "sum_genus_term_terms": sp.terms_used,
            "sum_inv_shifted_sq_terms": s2.terms_used,
            "sum_poly_deriv_terms": sd.terms_used,
        },
    )


# ---------------------------------------------------------------------------
# Largest certifiable radius
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSearchResult:
    bracket: Enclosure
    verdict: str
    evaluations: int


def _radius_ceiling(fam: FunctionFamily) -> float:
    """sup of admissible t: the smallest modulus-floor value."""
    floor = fam.modulus_floor
    vals = [float(eval_rule(floor, 1))]
    probe = floor
    idx = 1
    while isinstance(probe, ExplicitPrefix):
        for v in probe.values:
            vals.append(float(v))
            idx += 1
        probe = probe.tail
    vals.append(float(eval_rule(floor, idx + 1)))
    return min(vals)


def max_certified_radius(fam: FunctionFamily, check: str = "deriv1", p: int | None = None,
                         series_tol: float = 1e-6, bracket_width: float = 1e-4,
                         probes: int = 24) -> RadiusSearchResult:
    """Bisect for the largest radius the chosen checker still certifies.

    Margins decrease in t (every series term grows while m/t shrinks), so
    a certified/uncertified probe pair brackets the crossing; bisection
    narrows it to the requested width.  Returns a [0, 0] bracket when no
    probe certifies at all.
    """
    if check == "deriv1":
        def certifies(t: float) -> bool:
            return check_first_derivative(fam, t, series_tol=series_tol).certified
    elif check == "deriv2":
        if p is None:
            raise ValueError("deriv2 radius search needs the split parameter p")
        def certifies(t: float) -> bool:
            return check_second_derivative(fam, t, p, series_tol=series_tol).certified
    else:
        raise ValueError(f"unsupported checker for radius search: {check!r}")

    ceiling = _radius_ceiling(fam)
    evals = 0
    lo = None
    hi = ceiling  # always fails: validation needs h(n) > t everywhere
    for k in range(probes, 0, -1):
        t = ceiling * k / (probes + 1)
        evals += 1
        if certifies(t):
            lo = t
            break
        hi = t
    if lo is None:
        return RadiusSearchResult(Enclosure(0.0, 0.0), NOT_CERTIFIED, evals)

    while hi - lo > bracket_width:
        mid = 0.5 * (lo + hi)
        evals += 1
        if certifies(mid):
            lo = mid
        else:
            hi = mid
    return RadiusSearchResult(Enclosure(lo, hi), CERTIFIED, evals)
