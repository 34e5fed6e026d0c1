"""Declarative data model for Weierstrass-product function families.

A family describes an entire function

    f(z) = z^m * exp(g(z)) * prod_n E_{p_n}(z / a_n)

through the origin multiplicity m, the polynomial g (coefficient list,
ascending), an integer genus rule n -> p_n, and a modulus floor rule
n -> h(n) with |a_n| >= h(n).  The zeros a_n themselves are optional and
only consumed by the numerical oracle; every certificate is driven by the
floor h alone.

Also hosts the small polynomial toolbox the certifier needs: exact
derivative coefficients and a two-sided bound for max |poly| on a closed
disk (coefficient bound above, dense boundary sample below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SequenceRule",
    "Constant",
    "Power",
    "Exponential",
    "Linear",
    "ExplicitPrefix",
    "eval_rule",
    "Enclosure",
    "ZeroSpec",
    "ExplicitZeros",
    "RuleZeros",
    "FunctionFamily",
    "validate_family",
    "poly_derivative",
    "max_modulus_on_closed_disk",
    "zero_values",
]


# ---------------------------------------------------------------------------
# Sequence rules
# ---------------------------------------------------------------------------

class SequenceRule:
    """Base class for declarative n -> value rules (n >= 1)."""

    def value(self, n: int):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(SequenceRule):
    c: float | int

    def value(self, n: int):
        return self.c


@dataclass(frozen=True)
class Power(SequenceRule):
    """n -> c * n**s with c > 0, s > 0."""

    c: float | int
    s: float | int

    def __post_init__(self):
        if not (self.c > 0 and self.s > 0):
            raise ValueError(f"Power rule needs c > 0 and s > 0, got c={self.c}, s={self.s}")

    def value(self, n: int):
        return self.c * n ** self.s


@dataclass(frozen=True)
class Exponential(SequenceRule):
    """n -> c * b**n with c > 0, b > 1."""

    c: float | int
    b: float | int

    def __post_init__(self):
        if not (self.c > 0 and self.b > 1):
            raise ValueError(f"Exponential rule needs c > 0 and b > 1, got c={self.c}, b={self.b}")

    def value(self, n: int):
        return self.c * self.b ** n


@dataclass(frozen=True)
class Linear(SequenceRule):
    """n -> n."""

    def value(self, n: int):
        return n


@dataclass(frozen=True)
class ExplicitPrefix(SequenceRule):
    """Finite list of leading values; the tail rule takes over at the
    original index, i.e. value(n) = tail.value(n) for n > len(values)."""

    values: tuple
    tail: SequenceRule

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not isinstance(self.tail, SequenceRule):
            raise ValueError("ExplicitPrefix tail must be a SequenceRule")

    def value(self, n: int):
        if n <= len(self.values):
            return self.values[n - 1]
        return self.tail.value(n)


def eval_rule(rule: SequenceRule, n: int):
    """Value of a sequence rule at index n (n >= 1). Pure and total."""
    if n < 1:
        raise ValueError(f"sequence index must be >= 1, got {n}")
    return rule.value(n)


def tail_rule(rule: SequenceRule) -> SequenceRule:
    """The rule governing all large n (peels ExplicitPrefix wrappers)."""
    while isinstance(rule, ExplicitPrefix):
        rule = rule.tail
    return rule


def prefix_length(rule: SequenceRule) -> int:
    """Number of leading indices covered by explicit values."""
    length = 0
    while isinstance(rule, ExplicitPrefix):
        length += len(rule.values)
        rule = rule.tail
    return length


def is_integer_valued(rule: SequenceRule) -> bool:
    """Structural check that the rule only ever produces integers."""
    def is_int(x) -> bool:
        return isinstance(x, int) or (isinstance(x, float) and x.is_integer())

    if isinstance(rule, Linear):
        return True
    if isinstance(rule, Constant):
        return is_int(rule.c)
    if isinstance(rule, Power):
        return is_int(rule.c) and is_int(rule.s)
    if isinstance(rule, Exponential):
        return is_int(rule.c) and is_int(rule.b)
    if isinstance(rule, ExplicitPrefix):
        return all(is_int(v) for v in rule.values) and is_integer_valued(rule.tail)
    return False


def is_eventually_zero(rule: SequenceRule) -> bool:
    """True when the rule is zero for all large n."""
    r = tail_rule(rule)
    return isinstance(r, Constant) and r.c == 0


def reciprocal_sum_violation(rule: SequenceRule) -> str | None:
    """Reason the series sum 1/rule(n) diverges, or None when it converges.

    Decided structurally per rule type: Power needs exponent > 1,
    Exponential always converges, Constant and Linear always diverge.
    """
    r = tail_rule(rule)
    if isinstance(r, Constant):
        return "constant modulus floor: reciprocal series diverges"
    if isinstance(r, Linear):
        return "linear modulus floor: reciprocal series diverges (harmonic)"
    if isinstance(r, Power):
        if r.s <= 1:
            return f"power modulus floor with exponent {r.s} <= 1: reciprocal series diverges"
        return None
    if isinstance(r, Exponential):
        return None
    return f"unsupported modulus floor rule {type(r).__name__}"


# ---------------------------------------------------------------------------
# Enclosures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Enclosure:
    """Real interval [lo, hi] guaranteed to contain an exact quantity."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"enclosure endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"enclosure lo {self.lo} exceeds hi {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def scale(self, a: float) -> "Enclosure":
        if a < 0:
            raise ValueError("scale factor must be non-negative")
        return Enclosure(self.lo * a, self.hi * a)

    @staticmethod
    def point(x: float) -> "Enclosure":
        return Enclosure(x, x)


# ---------------------------------------------------------------------------
# Zeros and families
# ---------------------------------------------------------------------------

class ZeroSpec:
    """Base class for the optional zero sequence description."""


@dataclass(frozen=True)
class ExplicitZeros(ZeroSpec):
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))


@dataclass(frozen=True)
class RuleZeros(ZeroSpec):
    """a_n = modulus(n) * exp(i * phase(n)), phase in radians."""

    modulus: SequenceRule
    phase: SequenceRule = field(default_factory=lambda: Constant(0))


@dataclass(frozen=True)
class FunctionFamily:
    """All data defining one Weierstrass-product family."""

    m: int
    g_coeffs: tuple
    genus: SequenceRule
    modulus_floor: SequenceRule
    zeros: ZeroSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "g_coeffs", tuple(complex(c) for c in self.g_coeffs))

    @property
    def gprime_coeffs(self) -> tuple:
        return poly_derivative(self.g_coeffs)


def zero_values(fam: FunctionFamily, count: int) -> np.ndarray:
    """First `count` zeros a_1..a_count as a complex array.

    Explicit lists cap the count at their length; rule-based zeros are
    generated exactly.  Raises when the family carries no zero data.
    """
    if fam.zeros is None:
        raise ValueError("family has no zero data; only certificates are available for it")
    if isinstance(fam.zeros, ExplicitZeros):
        vals = fam.zeros.values[:count]
        return np.asarray(vals, dtype=complex)
    spec = fam.zeros
    n = np.arange(1, count + 1)
    mod = np.array([eval_rule(spec.modulus, int(k)) for k in n], dtype=float)
    ph = np.array([eval_rule(spec.phase, int(k)) for k in n], dtype=float)
    return mod * np.exp(1j * ph)


# ---------------------------------------------------------------------------
# Family validation
# ---------------------------------------------------------------------------

_GENUS_SPOT_CHECK = 64
_ZERO_RULE_SPOT_CHECK = 1024


def _floor_exceeds(rule: SequenceRule, t: float) -> str | None:
    """Reason some h(n) fails h(n) > t, or None.

    Power and Exponential rules are increasing, so n = 1 settles them;
    explicit prefix values are checked one by one.
    """
    pref = prefix_length(rule)
    probe = rule
    idx = 1
    while isinstance(probe, ExplicitPrefix):
        for v in probe.values:
            if not (v > t):
                return f"h({idx})={v} not > t={t}"
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                return f"h({idx})={v} is not finite positive"
            idx += 1
        probe = probe.tail
    first = pref + 1
    v = eval_rule(rule, first)
    if not (v > t):
        return f"h({first})={v} not > t={t}"
    return None


def validate_family(fam: FunctionFamily, t: float) -> list[str]:
    """All reasons the family cannot be certified at radius t (empty = valid)."""
    if not (t > 0):
        raise ValueError(f"radius t must be positive, got {t}")
    violations: list[str] = []

    if not (isinstance(fam.m, int) and fam.m >= 1):
        violations.append(f"origin multiplicity m={fam.m} must be an integer >= 1")

    # Genus: integer-valued, non-negative, not eventually zero.
    if not is_integer_valued(fam.genus):
        violations.append("genus rule must be integer-valued")
    else:
        bad = [n for n in range(1, _GENUS_SPOT_CHECK + 1) if eval_rule(fam.genus, n) < 0]
        if bad:
            violations.append(f"genus rule negative at n={bad[0]}")
        if is_eventually_zero(fam.genus):
            violations.append("genus rule eventually zero")

    # Modulus floor: summable reciprocals and h(n) > t everywhere.
    reason = reciprocal_sum_violation(fam.modulus_floor)
    if reason is not None:
        violations.append(reason)
    else:
        reason = _floor_exceeds(fam.modulus_floor, t)
        if reason is not None:
            violations.append(reason)

    # Declared zeros must respect the floor.
    if isinstance(fam.zeros, ExplicitZeros):
        for i, a in enumerate(fam.zeros.values, start=1):
            hv = eval_rule(fam.modulus_floor, i)
            if abs(a) < hv:
                violations.append(f"explicit zero a_{i}={a} has |a|={abs(a)} < h({i})={hv}")
                break
    elif isinstance(fam.zeros, RuleZeros):
        for i in range(1, _ZERO_RULE_SPOT_CHECK + 1):
            if eval_rule(fam.zeros.modulus, i) < eval_rule(fam.modulus_floor, i):
                violations.append(f"zero modulus rule below floor at n={i}")
                break

    return violations


# ---------------------------------------------------------------------------
# Polynomial helpers
# ---------------------------------------------------------------------------

def poly_derivative(coeffs) -> tuple:
    """Coefficients of the derivative of sum c_j z^j (ascending order).

    Exact for exact coefficient types (int, Fraction); length max(0, d).
    """
    return tuple(j * c for j, c in enumerate(coeffs) if j >= 1)


_DEFAULT_CIRCLE_SAMPLES = 4096  # power of two so finer nested grids contain it


def max_modulus_on_closed_disk(coeffs, t: float, samples: int = _DEFAULT_CIRCLE_SAMPLES) -> Enclosure:
    """Enclosure of max |poly(z)| over the closed disk |z| <= t.

    hi is the coefficient bound sum |c_j| t^j; lo is the max over a dense
    uniform sample of the boundary circle (the maximum modulus principle
    puts the true max on |z| = t, between the two).
    """
    if not (t > 0):
        raise ValueError(f"disk radius must be positive, got {t}")
    cs = [complex(c) for c in coeffs]
    if not cs or all(c == 0 for c in cs):
        return Enclosure(0.0, 0.0)
    hi = math.fsum(abs(c) * t ** j for j, c in enumerate(cs))
    theta = 2.0 * np.pi * np.arange(samples) / samples
    z = t * np.exp(1j * theta)
    vals = np.zeros_like(z)
    for c in reversed(cs):
        vals = vals * z + c
    lo = float(np.max(np.abs(vals)))
    return Enclosure(min(lo, hi), hi)


def poly_eval(coeffs, z):
    """Horner evaluation of sum c_j z^j; works on scalars and arrays."""
    result = 0j if np.isscalar(z) else np.zeros_like(np.asarray(z, dtype=complex))
    for c in reversed(tuple(coeffs)):
        result = result * z + complex(c)
    return result


def poly_nth_derivative(coeffs, order: int) -> tuple:
    cs = tuple(coeffs)
    for _ in range(order):
        cs = poly_derivative(cs)
    return cs
