"""Symbolic engine for derivative-over-function ratios.

Working with R_k := f^{(k)}/f for a product-form family, every R_k is a
polynomial in a fixed set of generators:

    m        origin multiplicity (a constant),
    z^-1     the principal pole,
    G_j      the j-th derivative of g,
    D_j      the j-th derivative of the zero series
             D_0 = sum_n (1/(z - a_n) + sum_{k<=p_n} z^{k-1}/a_n^k).

R_1 = m z^-1 + G_1 + D_0, and the recursion R_k = R_{k-1}' + R_{k-1} R_1
generates the rest, with differentiation acting per generator:
d(z^-b) = -b z^-(b+1), d(G_j) = G_{j+1}, d(D_j) = D_{j+1}.

Expressions are canonical integer-coefficient monomial sums; there is no
simplification beyond merging like terms.  Splitting off the monomials
that carry m^a/z^b (the principal part) and bounding the remainder
generator by generator turns R_k != 0 into an explicit inequality, which
derive_inequality assembles and decides for any supported order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .certify import (
    CERTIFIED,
    CLOSED_DISK_NOTE,
    Certificate,
    NOT_CERTIFIED,
    PRECONDITION_FAILED,
    series_budget,
)
from .model import (
    Enclosure,
    FunctionFamily,
    max_modulus_on_closed_disk,
    poly_eval,
    poly_nth_derivative,
    validate_family,
)
from .series import DEFAULT_TOL, sum_deriv_weighted, sum_inv_shifted_pow

__all__ = [
    "Monomial",
    "LogDerivExpr",
    "a1_expr",
    "ratio_expr",
    "differentiate",
    "multiply",
    "add",
    "split_principal",
    "render",
    "eval_expr",
    "derive_inequality",
    "generator_bound",
    "MAX_ORDER",
]

MAX_ORDER = 6


# ---------------------------------------------------------------------------
# Monomials and canonical expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    """coeff * m^alpha * z^-beta * prod G_j^e_j * prod D_j^f_j.

    gpow and dpow are sorted ((j, multiplicity), ...) tuples; coeff is a
    nonzero integer in canonical expressions.
    """

    coeff: int
    alpha: int = 0
    beta: int = 0
    gpow: tuple = ()
    dpow: tuple = ()

    @property
    def signature(self) -> tuple:
        return (self.alpha, self.beta, self.gpow, self.dpow)

    @property
    def is_principal(self) -> bool:
        return self.beta >= 1

    @property
    def is_pure(self) -> bool:
        return not self.gpow and not self.dpow


@dataclass(frozen=True)
class LogDerivExpr:
    monomials: tuple

    def __len__(self) -> int:
        return len(self.monomials)


def _canonical(monos) -> LogDerivExpr:
    merged: dict[tuple, int] = {}
    for m in monos:
        merged[m.signature] = merged.get(m.signature, 0) + m.coeff
    out = [
        Monomial(c, *sig)
        for sig, c in merged.items()
        if c != 0
    ]
    out.sort(key=lambda m: m.signature)
    return LogDerivExpr(tuple(out))


def _bump(powers: tuple, j: int, delta: int) -> tuple:
    d = dict(powers)
    d[j] = d.get(j, 0) + delta
    return tuple(sorted((k, v) for k, v in d.items() if v != 0))


# ---------------------------------------------------------------------------
# Construction and calculus
# ---------------------------------------------------------------------------

def a1_expr() -> LogDerivExpr:
    """R_1 = m z^-1 + G_1 + D_0."""
    return _canonical([
        Monomial(1, alpha=1, beta=1),
        Monomial(1, gpow=((1, 1),)),
        Monomial(1, dpow=((0, 1),)),
    ])


def differentiate(e: LogDerivExpr) -> LogDerivExpr:
    out = []
    for mono in e.monomials:
        if mono.beta:
            out.append(Monomial(-mono.beta * mono.coeff, mono.alpha, mono.beta + 1,
                                mono.gpow, mono.dpow))
        for j, mult in mono.gpow:
            out.append(Monomial(mult * mono.coeff, mono.alpha, mono.beta,
                                _bump(_bump(mono.gpow, j, -1), j + 1, 1), mono.dpow))
        for j, mult in mono.dpow:
            out.append(Monomial(mult * mono.coeff, mono.alpha, mono.beta,
                                mono.gpow, _bump(_bump(mono.dpow, j, -1), j + 1, 1)))
    return _canonical(out)


def multiply(e1: LogDerivExpr, e2: LogDerivExpr) -> LogDerivExpr:
    out = []
    for a in e1.monomials:
        for b in e2.monomials:
            gp = a.gpow
            for j, mult in b.gpow:
                gp = _bump(gp, j, mult)
            dp = a.dpow
            for j, mult in b.dpow:
                dp = _bump(dp, j, mult)
            out.append(Monomial(a.coeff * b.coeff, a.alpha + b.alpha,
                                a.beta + b.beta, gp, dp))
    return _canonical(out)


def add(e1: LogDerivExpr, e2: LogDerivExpr) -> LogDerivExpr:
    return _canonical(e1.monomials + e2.monomials)


@lru_cache(maxsize=None)
def ratio_expr(k: int) -> LogDerivExpr:
    """R_k = f^{(k)}/f via R_k = R_{k-1}' + R_{k-1} R_1."""
    if k < 1:
        raise ValueError(f"derivative order must be >= 1, got {k}")
    if k == 1:
        return a1_expr()
    prev = ratio_expr(k - 1)
    return add(differentiate(prev), multiply(prev, a1_expr()))


def split_principal(e: LogDerivExpr) -> tuple[LogDerivExpr, LogDerivExpr]:
    """(principal, remainder): monomials carrying z^-beta versus the rest."""
    principal = [m for m in e.monomials if m.is_principal]
    rest = [m for m in e.monomials if not m.is_principal]
    return LogDerivExpr(tuple(principal)), LogDerivExpr(tuple(rest))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _render_factors(mono: Monomial, g_name: str = "G", d_name: str = "D") -> list[str]:
    parts = []
    if mono.alpha:
        parts.append("m" if mono.alpha == 1 else f"m^{mono.alpha}")
    if mono.beta:
        parts.append(f"z^-{mono.beta}")
    for j, mult in mono.gpow:
        parts.append(f"{g_name}{j}" if mult == 1 else f"{g_name}{j}^{mult}")
    for j, mult in mono.dpow:
        parts.append(f"{d_name}{j}" if mult == 1 else f"{d_name}{j}^{mult}")
    return parts


def _render_monomial(mono: Monomial) -> str:
    parts = _render_factors(mono)
    c = abs(mono.coeff)
    if c != 1 or not parts:
        parts.insert(0, str(c))
    return "*".join(parts)


def render(e: LogDerivExpr) -> str:
    """Deterministic text form in canonical monomial order."""
    if not e.monomials:
        return "0"
    chunks = []
    for i, mono in enumerate(e.monomials):
        sign = "-" if mono.coeff < 0 else "+"
        body = _render_monomial(mono)
        if i == 0:
            chunks.append(body if mono.coeff > 0 else f"-{body}")
        else:
            chunks.append(f"{sign} {body}")
    return " ".join(chunks)


# ---------------------------------------------------------------------------
# Numeric evaluation (oracle bridge)
# ---------------------------------------------------------------------------

def _max_orders(e: LogDerivExpr) -> tuple[int, int]:
    gmax = max((j for m in e.monomials for j, _ in m.gpow), default=0)
    dmax = max((j for m in e.monomials for j, _ in m.dpow), default=-1)
    return gmax, dmax


def eval_expr(e: LogDerivExpr, z: complex, fam: FunctionFamily, truncation: int) -> complex:
    """Substitute numeric values: G_j = g^{(j)}(z) exactly, D_j truncated
    at `truncation` zeros.  Requires z != 0 and a family with zero data."""
    z = complex(z)
    if z == 0:
        raise ValueError("expressions carry z^-1 poles; z must be nonzero")
    from .oracle import d_series_values

    gmax, dmax = _max_orders(e)
    gvals = {j: poly_eval(poly_nth_derivative(fam.g_coeffs, j), z) for j in range(1, gmax + 1)}
    dvals = d_series_values(fam, z, dmax, truncation) if dmax >= 0 else []
    total = 0j
    for mono in e.monomials:
        v = complex(mono.coeff) * fam.m ** mono.alpha * z ** (-mono.beta)
        for j, mult in mono.gpow:
            v *= gvals[j] ** mult
        for j, mult in mono.dpow:
            v *= dvals[j] ** mult
        total += v
    return total


# ---------------------------------------------------------------------------
# Generator bounds and derived inequalities
# ---------------------------------------------------------------------------

def generator_bound(fam: FunctionFamily, t: float, order: int,
                    series_tol: float = DEFAULT_TOL):
    """Enclosure bounding |D_order| on |z| < t, plus the series reports.

    |D_j| <= j! sum 1/(h(n)-t)^{j+1} + SD(j); order 0 is the plain
    first-derivative series budget S1 + SP.
    """
    if order == 0:
        s1, sp, budget = series_budget(fam, t, series_tol)
        return budget, {"sum_inv_shifted_terms": s1.terms_used,
                        "sum_genus_term_terms": sp.terms_used}, (s1, sp)
    fact = math.factorial(order)
    pole = sum_inv_shifted_pow(fam.modulus_floor, t, order + 1, tol=series_tol)
    poly = sum_deriv_weighted(fam.modulus_floor, fam.genus, t, order, tol=series_tol)
    bound = pole.enclosure.scale(fact) + poly.enclosure
    work = {f"d{order}_pole_terms": pole.terms_used, f"d{order}_poly_terms": poly.terms_used}
    return bound, work, None


def _mono_bound_text(mono: Monomial) -> str:
    parts = _render_factors(Monomial(mono.coeff, mono.alpha, mono.beta,
                                     mono.gpow, mono.dpow), g_name="M", d_name="B")
    c = abs(mono.coeff)
    if c != 1 or not parts:
        parts.insert(0, str(c))
    return "*".join(p.replace("z^-", "t^-") for p in parts)


_SQUARE_SIGNATURES = {
    (0, 0, ((1, 2),), ()),          # G1^2
    (0, 0, ((1, 1),), ((0, 1),)),   # G1*D0
    (0, 0, (), ((0, 2),)),          # D0^2
}


def derive_inequality(k: int, fam: FunctionFamily, t: float,
                      g_bounds: list[Enclosure] | None = None,
                      strategy: str = "product",
                      p: int | None = None,
                      series_tol: float = DEFAULT_TOL,
                      max_order: int = MAX_ORDER) -> Certificate:
    """Build and decide the zero-exclusion inequality for f^{(k)} on
    0 < |z| < t.

    The principal part is lower-bounded by factoring out z^-beta_max:
    its pure top coefficient is the exact integer m(m-1)...(m-k+1), and
    every other principal monomial is subtracted with generators replaced
    by their bounds and |z|^{beta_max-beta} by t^{beta_max-beta}.  The
    remainder is upper-bounded monomial by monomial (strategy "product"),
    or, for k = 2 with a split integer p > 1, with the three square terms
    replaced by the budget (m/(p t))^2 (strategy "square").
    """
    if not (1 <= k <= max_order):
        raise ValueError(f"derivative order k={k} outside supported range 1..{max_order}")
    if strategy not in ("product", "square"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "square" and k > 2:
        raise ValueError("square strategy is only defined for k <= 2")
    violations = validate_family(fam, t)
    if violations:
        return Certificate(
            check="deriv-k",
            inputs={"t": t, "k": k, "strategy": strategy},
            quantities={}, margin=None, verdict=PRECONDITION_FAILED,
            warnings=list(violations),
        )

    expr = ratio_expr(k)
    principal, remainder = split_principal(expr)
    beta_max = max(m.beta for m in principal.monomials)

    gmax, dmax = _max_orders(expr)
    warnings = []
    if g_bounds is not None:
        if len(g_bounds) < gmax:
            raise ValueError(f"need {gmax} derivative bounds for g, got {len(g_bounds)}")
        gb = {j: g_bounds[j - 1] for j in range(1, gmax + 1)}
        warnings.append("user-supplied derivative bounds for g trusted as given")
    else:
        gb = {
            j: max_modulus_on_closed_disk(poly_nth_derivative(fam.g_coeffs, j), t)
            for j in range(1, gmax + 1)
        }
        warnings.append(CLOSED_DISK_NOTE)

    db: dict[int, Enclosure] = {}
    quantities: dict[str, Enclosure] = {}
    work: dict[str, int] = {}
    for j in range(0, dmax + 1):
        bound, w, reports = generator_bound(fam, t, j, series_tol)
        db[j] = bound
        work.update(w)
        quantities[f"d{j}_bound"] = bound
        if reports is not None:
            s1, sp = reports
            quantities["sum_inv_shifted"] = s1.enclosure
            quantities["sum_genus_term"] = sp.enclosure
            quantities["series_budget"] = bound
    for j in range(1, gmax + 1):
        quantities[f"g{j}_max"] = gb[j]

    def factor_bound(mono: Monomial) -> float:
        v = float(abs(mono.coeff)) * float(fam.m) ** mono.alpha
        for j, mult in mono.gpow:
            v *= gb[j].hi ** mult
        for j, mult in mono.dpow:
            v *= db[j].hi ** mult
        return v

    # Principal part: exact top coefficient minus bounded residual terms.
    dominant = 0
    residual = 0.0
    residual_text = []
    for mono in principal.monomials:
        if mono.beta == beta_max and mono.is_pure:
            dominant += mono.coeff * fam.m ** mono.alpha
        else:
            residual += factor_bound(mono) * t ** (beta_max - mono.beta)
            residual_text.append(_mono_bound_text(mono))
    quantities["principal_top"] = Enclosure.point(float(dominant))
    quantities["principal_residual"] = Enclosure.point(residual)

    # Remainder upper bound.
    square_budget = None
    r_upper = 0.0
    remainder_text = []
    if strategy == "square" and k == 2:
        if not (isinstance(p, int) and p > 1):
            return Certificate(
                check="deriv-k",
                inputs={"t": t, "k": k, "strategy": strategy, "p": p},
                quantities=quantities, margin=None, verdict=PRECONDITION_FAILED,
                warnings=warnings + ["square strategy needs an integer split parameter p > 1"],
                work=work,
            )
        split_threshold = fam.m / (p * t)
        first_total = gb.get(1, Enclosure(0.0, 0.0)).hi + db[0].hi
        if first_total >= split_threshold:
            return Certificate(
                check="deriv-k",
                inputs={"t": t, "k": k, "strategy": strategy, "p": p},
                quantities=quantities, margin=None, verdict=PRECONDITION_FAILED,
                warnings=warnings + [
                    f"square budget needs M1 + B0 = {first_total} < m/(p t) = {split_threshold}"
                ],
                work=work,
            )
        square_budget = split_threshold ** 2
        quantities["square_budget"] = Enclosure.point(square_budget)
        r_upper += square_budget
        remainder_text.append("(m/(p*t))^2")

    for mono in remainder.monomials:
        if square_budget is not None and mono.signature in _SQUARE_SIGNATURES:
            continue
        r_upper += factor_bound(mono)
        remainder_text.append(_mono_bound_text(mono))

    lower = (dominant - residual) / t ** beta_max
    quantities["principal_lower"] = Enclosure.point(lower)
    quantities["remainder_upper"] = Enclosure.point(r_upper)

    if dominant <= 0:
        verdict = NOT_CERTIFIED
        warnings.append(
            f"principal top coefficient m(m-1)...(m-k+1) = {dominant} is not positive; "
            f"multiplicity m={fam.m} is too small for order k={k}"
        )
        margin = lower - r_upper
    else:
        margin = lower - r_upper
        verdict = CERTIFIED if margin > 0 else NOT_CERTIFIED
        if dominant - residual <= 0:
            warnings.append("principal residual terms swallow the top coefficient")

    lhs_text = f"({dominant}" + "".join(f" - {s}" for s in residual_text) + f")/t^{beta_max}"
    rhs_text = " + ".join(remainder_text) if remainder_text else "0"
    return Certificate(
        check="deriv-k",
        inputs={
            "t": t, "k": k, "strategy": strategy, "p": p,
            "series_tol": series_tol, "family": _family_inputs(fam),
            "inequality": f"{lhs_text} > {rhs_text}",
        },
        quantities=quantities,
        margin=margin,
        verdict=verdict,
        warnings=warnings,
        work=work,
    )


def _family_inputs(fam: FunctionFamily) -> dict:
    from .config import rule_to_text

    return {
        "m": fam.m,
        "g_coeffs": [[c.real, c.imag] for c in fam.g_coeffs],
        "genus": rule_to_text(fam.genus),
        "modulus_floor": rule_to_text(fam.modulus_floor),
    }
