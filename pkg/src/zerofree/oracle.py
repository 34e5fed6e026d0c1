"""Independent numerical cross-checks for certificates.

Everything here works on concrete zero sequences: truncated product
evaluation in log space, exact truncated logarithmic derivatives,
argument-principle zero counts on circles, and a simultaneous-iteration
polynomial root finder for the polynomial baseline.  None of it is
rigorous; it exists to catch certifier bugs, not to replace proofs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import FunctionFamily, eval_rule, poly_derivative, poly_eval, zero_values

__all__ = [
    "NumericFailure",
    "ZeroCountReport",
    "eval_elementary_factor",
    "eval_truncated_product",
    "eval_log_derivative",
    "count_zeros_argument_principle",
    "count_polynomial_zeros",
    "polynomial_roots",
    "nth_derivative_fd",
    "d_series_values",
]

_OVERFLOW_RE = 700.0
_CONTOUR_GUARD = 1e-8
_TAIL_STOP = 1e-18


class NumericFailure(RuntimeError):
    """Numeric evaluation failed (overflow, non-convergence)."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# Elementary factors and truncated products
# ---------------------------------------------------------------------------

def eval_elementary_factor(k: int, z: complex) -> complex:
    """E_0(z) = 1 - z;  E_k(z) = (1 - z) exp(sum_{j<=k} z^j / j)."""
    if k < 0:
        raise ValueError(f"factor index must be >= 0, got {k}")
    z = complex(z)
    if k == 0:
        return 1.0 - z
    acc = 0j
    zj = 1.0 + 0j
    for j in range(1, k + 1):
        zj *= z
        acc += zj / j
    return (1.0 - z) * cmath.exp(acc)


def _log_elementary(w: np.ndarray, p: int) -> np.ndarray:
    """log E_p(w) for |w| < 1, as the tail -sum_{j>p} w^j / j.

    (1 - w) exp(sum_{j<=p} w^j/j) = exp(log(1-w) + sum_{j<=p} w^j/j) and
    the principal log(1-w) is -sum_{j>=1} w^j/j, so only the tail beyond
    p survives.  Falls back to the direct form where |w| >= 1.
    """
    w = np.asarray(w, dtype=complex)
    out = np.zeros_like(w)
    aw = np.abs(w)
    inside = aw < 1.0
    if np.any(inside):
        wi = w[inside]
        # first omitted magnitude bounds the whole tail up to 1/(1-|w|)
        first = np.abs(wi) ** (p + 1) / (p + 1)
        if float(np.max(first / np.maximum(1.0 - np.abs(wi), 1e-3))) > _TAIL_STOP:
            acc = np.zeros_like(wi)
            cur = wi ** (p + 1)
            j = p + 1
            while True:
                acc -= cur / j
                j += 1
                cur = cur * wi
                if float(np.max(np.abs(cur))) / j < _TAIL_STOP or j > p + 20000:
                    break
            out[inside] = acc
    if not np.all(inside):
        wo = w[~inside]
        acc = np.log(1.0 - wo)
        cur = np.ones_like(wo)
        for j in range(1, p + 1):
            cur = cur * wo
            acc += cur / j
        out[~inside] = acc
    return out


def eval_truncated_product(z, fam: FunctionFamily, truncation: int):
    """z^m exp(g(z)) prod_{n<=N} E_{p_n}(z / a_n), evaluated in log space.

    Accepts scalars or complex arrays.  Signals overflow in the combined
    exponent as a NumericFailure rather than returning inf.
    """
    scalar = np.isscalar(z)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    zeros = zero_values(fam, truncation)
    log_f = np.where(zs != 0, fam.m * np.log(np.where(zs != 0, zs, 1.0)), 0j)
    log_f = log_f + poly_eval(fam.g_coeffs, zs)
    for n, a in enumerate(zeros, start=1):
        p = int(eval_rule(fam.genus, n))
        log_f = log_f + _log_elementary(zs / a, p)
    if float(np.max(np.real(log_f))) > _OVERFLOW_RE:
        raise NumericFailure("overflow in the product's exponent sum")
    vals = np.exp(log_f)
    if fam.m >= 1:
        vals = np.where(zs == 0, 0.0, vals)
    return complex(vals[0]) if scalar else vals


def eval_log_derivative(z, fam: FunctionFamily, truncation: int):
    """m/z + g'(z) + sum_{n<=N} (1/(z - a_n) + sum_{k<=p_n} z^{k-1}/a_n^k).

    The inner k-sum uses the geometric closed form away from w = z/a_n
    near 1, and the direct sum in that neighbourhood.  Accepts scalars or
    arrays; raises at z = 0 or on a zero a_n.
    """
    scalar = np.isscalar(z)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zs == 0):
        raise ValueError("logarithmic derivative undefined at z = 0")
    zeros = zero_values(fam, truncation)
    total = fam.m / zs + poly_eval(fam.gprime_coeffs, zs)
    for n, a in enumerate(zeros, start=1):
        diff = zs - a
        if np.any(diff == 0):
            raise ValueError(f"z equals the zero a_{n} = {a}")
        total = total + 1.0 / diff
        p = int(eval_rule(fam.genus, n))
        if p == 0:
            continue
        w = zs / a
        near = np.abs(1.0 - w) < 1e-3
        with np.errstate(invalid="ignore", divide="ignore"):
            kern = (1.0 - w ** p) / (1.0 - w) / a
        if np.any(near):
            idx = np.nonzero(near)[0]
            for i in idx:
                acc = 0j
                wk = 1.0 + 0j
                s = 0j
                for _ in range(p):
                    s += wk
                    wk *= w[i]
                kern[i] = s / a
        total = total + kern
    return complex(total[0]) if scalar else total


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _central_weights(order: int) -> tuple:
    """Binomial central-difference weights for the order-th derivative.

    Offsets are (i - order/2) for i = 0..order; the estimator is
    sum_i w_i f(z + offset_i * h) / h^order with O(h^2) truncation.
    """
    return tuple(
        ((-1) ** (order - i) * math.comb(order, i), i - order / 2.0)
        for i in range(order + 1)
    )


def _stencil(f, z: np.ndarray, order: int, h: float) -> np.ndarray:
    ws = _central_weights(order)
    pts = np.stack([z + off * h for _, off in ws])
    vals = f(pts.reshape(-1)).reshape(pts.shape)
    acc = np.zeros_like(z, dtype=complex)
    for (w, _), row in zip(ws, vals):
        acc = acc + w * row
    return acc / h ** order


def nth_derivative_fd(f, z, order: int, step: float):
    """order-th derivative of f at z: central differences, one Richardson step.

    f must accept a complex ndarray.  Combined error is O(step^4) plus a
    rounding term growing like eps/step^order, so the step has to grow
    with the order.
    """
    scalar = np.isscalar(z)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if order == 0:
        vals = f(zs)
    else:
        coarse = _stencil(f, zs, order, step)
        fine = _stencil(f, zs, order, step / 2.0)
        vals = (4.0 * fine - coarse) / 3.0
    return complex(vals[0]) if scalar else vals


def _fd_step(radius: float, order: int) -> float:
    # The contract step 1e-5 * radius holds for order <= 2 estimates;
    # higher orders need a larger step to keep rounding noise down.
    if order <= 2:
        return 1e-5 * radius
    return radius * 10.0 ** (-10.0 / (order + 1))


# ---------------------------------------------------------------------------
# Argument-principle zero counting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroCountReport:
    radius: float
    derivative_order: int
    quadrature_points: int
    raw_integral: complex
    nearest_integer: int
    residual: float
    min_modulus_on_contour: float

    @property
    def accepted(self) -> bool:
        return self.residual < 0.5 and self.min_modulus_on_contour > _CONTOUR_GUARD


def _count_on_contour(ratio_and_modulus, radius: float, j: int,
                      quadrature: int) -> ZeroCountReport:
    """Shared trapezoid count: (1/2pi i) contour integral of ratio, i.e. the
    mean of ratio(z) * z over uniform circle samples.  The contour is
    perturbed by +-1% and retried when it runs too close to a zero."""
    for r in (radius, 0.99 * radius, 1.01 * radius):
        theta = 2.0 * np.pi * np.arange(quadrature) / quadrature
        zs = r * np.exp(1j * theta)
        ratio, min_mod = ratio_and_modulus(zs)
        if min_mod > _CONTOUR_GUARD:
            break
    raw = complex(np.mean(ratio * zs))
    nearest = int(round(raw.real))
    return ZeroCountReport(
        radius=r,
        derivative_order=j,
        quadrature_points=quadrature,
        raw_integral=raw,
        nearest_integer=nearest,
        residual=abs(raw - nearest),
        min_modulus_on_contour=min_mod,
    )


def count_zeros_argument_principle(fam: FunctionFamily, truncation: int, radius: float,
                                   j: int = 0, quadrature: int = 4096) -> ZeroCountReport:
    """Zeros (with multiplicity) of f^{(j)} inside |z| < radius, counted by
    integrating f^{(j+1)}/f^{(j)} over the circle.

    j = 0 uses the exact truncated logarithmic derivative; j >= 1 builds
    both derivatives by finite differences of the truncated product.  The
    contour is retried at +-1% when it runs too close to a zero; a
    residual >= 0.5 marks the report as not accepted rather than raising.
    """
    if j < 0:
        raise ValueError(f"derivative order must be >= 0, got {j}")
    h1 = float(eval_rule(fam.modulus_floor, 1))
    if radius >= h1:
        raise ValueError(f"radius {radius} must stay below the first modulus floor {h1}")

    if j == 0:
        def ratio_and_modulus(zs):
            ratio = eval_log_derivative(zs, fam, truncation)
            fv = eval_truncated_product(zs, fam, truncation)
            return ratio, float(np.min(np.abs(fv)))
    else:
        def ratio_and_modulus(zs):
            def f(pts):
                return eval_truncated_product(pts, fam, truncation)
            lower = nth_derivative_fd(f, zs, j, _fd_step(radius, j))
            upper = nth_derivative_fd(f, zs, j + 1, _fd_step(radius, j + 1))
            return upper / lower, float(np.min(np.abs(lower)))

    return _count_on_contour(ratio_and_modulus, radius, j, quadrature)


def count_polynomial_zeros(coeffs, radius: float, j: int = 0,
                           quadrature: int = 4096) -> ZeroCountReport:
    """Argument-principle count for a plain polynomial (exact derivatives)."""
    base = tuple(complex(c) for c in coeffs)
    num = base
    for _ in range(j):
        num = poly_derivative(num)
    den = poly_derivative(num)

    def ratio_and_modulus(zs):
        lower = poly_eval(num, zs)
        upper = poly_eval(den, zs)
        return upper / lower, float(np.min(np.abs(lower)))

    return _count_on_contour(ratio_and_modulus, radius, j, quadrature)


# ---------------------------------------------------------------------------
# Polynomial roots (Aberth simultaneous iteration)
# ---------------------------------------------------------------------------

def polynomial_roots(coeffs, residual_scale: float = 1e-10, max_iter: int = 600) -> list[complex]:
    """All complex roots with multiplicity of sum c_j z^j.

    Exact zero low-order coefficients are deflated first (each is an
    origin root), then Aberth-Ehrlich iteration runs until every residual
    satisfies |p(root)| <= residual_scale * max|c_j|.  Non-convergence
    raises NumericFailure with the partial roots attached.
    """
    cs = [complex(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) < 2:
        raise ValueError("polynomial degree must be >= 1 with nonzero leading coefficient")
    norm = max(abs(c) for c in cs)

    k0 = 0
    while cs[k0] == 0:
        k0 += 1
    origin = [0j] * k0
    work = tuple(cs[k0:])
    deg = len(work) - 1
    if deg == 0:
        return origin

    dwork = poly_derivative(work)
    lead = abs(work[-1])
    r0 = 1.0 + max(abs(c) for c in work[:-1]) / lead
    k = np.arange(deg)
    # deterministic spread: staggered angles, slightly varied moduli
    z = r0 * (0.6 + 0.4 * (k + 1) / deg) * np.exp(2j * np.pi * (k + 0.3521) / deg)

    target = residual_scale * norm
    for _ in range(max_iter):
        pz = poly_eval(work, z)
        if float(np.max(np.abs(pz))) <= target:
            break
        dpz = poly_eval(dwork, z)
        dpz = np.where(dpz == 0, 1e-300, dpz)
        newton = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - newton * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = newton / denom
        z = z - step
        if float(np.max(np.abs(step))) < 1e-15 * float(np.max(np.abs(z)) + 1.0):
            break

    full = origin + [complex(v) for v in z]
    resid = [abs(_poly_at(cs, r)) for r in full]
    if max(resid) > target:
        raise NumericFailure(
            f"root refinement stalled: worst residual {max(resid):.3e} > {target:.3e}",
            partial=full,
        )
    return full


def _poly_at(cs, z: complex) -> complex:
    acc = 0j
    for c in reversed(cs):
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------------------
# Truncated generator series (shared with the expression engine)
# ---------------------------------------------------------------------------

def d_series_values(fam: FunctionFamily, z: complex, max_order: int,
                    truncation: int) -> list[complex]:
    """Values of the zero-series and its derivatives at one point.

    Entry j is the truncated

        D_j(z) = sum_{n<=N} ( (-1)^j j! / (z - a_n)^{j+1}
                 + sum_{k=j+1}^{p_n} (k-1)!/(k-1-j)! * z^{k-1-j} / a_n^k ).
    """
    z = complex(z)
    zeros = zero_values(fam, truncation)
    ps = [int(eval_rule(fam.genus, n)) for n in range(1, len(zeros) + 1)]
    out = []
    for j in range(max_order + 1):
        sign = (-1) ** j
        part1 = sign * math.factorial(j) * complex(np.sum((z - zeros) ** (-(j + 1))))
        part2 = 0j
        for a, p in zip(zeros, ps):
            if p <= j:
                continue
            w = z / a
            # term k: ff * w^{k-1-j} with ff = (k-1)!/(k-1-j)!; the common
            # 1/a^{j+1} factor is applied once at the end
            acc = 0j
            wpow = 1.0 + 0j
            ff = float(math.factorial(j))
            for k in range(j + 1, p + 1):
                acc += ff * wpow
                wpow *= w
                ff *= k / (k - j)
                if ff * abs(wpow) < 1e-30:
                    break
            part2 += acc / a ** (j + 1)
        out.append(part1 + part2)
    return out
