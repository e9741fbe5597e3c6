"""Model-space volume functions and the diameter-bound threshold.

``s_k`` is the warping function of the simply connected model surface of
constant curvature ``k`` and ``volume(k, n, r1, r2)`` is the volume of the
annulus between radii ``r1`` and ``r2`` in the ``n``-dimensional model
(extended to real ``n >= 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "VolumeValue",
    "ComparisonParams",
    "DomainError",
    "s_k",
    "gamma_fn",
    "omega",
    "alpha",
    "volume",
    "volume_ratio",
    "delta_sup",
    "delta_threshold",
]

_SIMPSON_REL_TOL = 1e-12
_SIMPSON_ABS_FLOOR = 1e-14
_SIMPSON_MAX_DEPTH = 60


class DomainError(ValueError):
    """Argument outside the domain of a model-space function."""


@dataclass(frozen=True)
class ComparisonParams:
    k: float
    n: float
    C: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"dimension parameter n must be >= 1, got {self.n}")
        if self.C < 1:
            raise DomainError(f"constant C must be >= 1, got {self.C}")
        if self.R <= 0:
            raise DomainError(f"radius cap R must be positive, got {self.R}")


@dataclass(frozen=True)
class VolumeValue:
    value: float
    method: str  # "closed_form" | "quadrature"
    est_error: float = 0.0

    def __float__(self):
        return self.value


def s_k(k: float, t: float) -> float:
    """Warping function: sin(sqrt(k) t)/sqrt(k), t, or sinh(sqrt(-k) t)/sqrt(-k)."""
    if t < 0:
        raise DomainError(f"s_k is defined for t >= 0, got {t}")
    if k > 0:
        rk = math.sqrt(k)
        return math.sin(rk * t) / rk
    if k < 0:
        rk = math.sqrt(-k)
        return math.sinh(rk * t) / rk
    return t


def gamma_fn(s: float) -> float:
    if not s > 0:
        raise DomainError(f"gamma_fn is evaluated on s > 0 only, got {s}")
    return math.gamma(s)


def omega(s: float) -> float:
    """Volume of the unit ball for integer ``s``: pi^(s/2) / Gamma(s/2 + 1)."""
    if s < 0:
        raise DomainError(f"omega_s needs s >= 0, got {s}")
    return math.pi ** (s / 2) / gamma_fn(s / 2 + 1)


def alpha(n: float) -> float:
    """Area of the unit (n-1)-sphere, 2 pi^(n/2) / Gamma(n/2) = n omega_n."""
    return 2 * math.pi ** (n / 2) / gamma_fn(n / 2)


def _model_diameter(k: float) -> float:
    return math.pi / math.sqrt(k) if k > 0 else math.inf


def _closed_form_integral(k: float, n: float, r1: float, r2: float):
    """Integral of s_k^(n-1) over [r1, r2] when it has an elementary form."""
    if n == 1:
        return r2 - r1
    if k == 0:
        return (r2**n - r1**n) / n
    if n == 2:
        if k > 0:
            rk = math.sqrt(k)
            # cos a - cos b written as a product to avoid cancellation
            return 2 * math.sin(rk * (r1 + r2) / 2) * math.sin(rk * (r2 - r1) / 2) / k
        rk = math.sqrt(-k)
        return 2 * math.sinh(rk * (r1 + r2) / 2) * math.sinh(rk * (r2 - r1) / 2) / -k
    if n == 3:
        if abs(k) * r2 * r2 < 1e-3:
            return None  # the closed form cancels catastrophically near k = 0
        if k > 0:
            rk = math.sqrt(k)
            # sin 2b - sin 2a = 2 cos(a + b) sin(b - a)
            diff = 2 * math.cos(rk * (r1 + r2)) * math.sin(rk * (r2 - r1))
            return ((r2 - r1) / 2 - diff / (4 * rk)) / k
        rk = math.sqrt(-k)
        diff = 2 * math.cosh(rk * (r1 + r2)) * math.sinh(rk * (r2 - r1))
        return (diff / (4 * rk) - (r2 - r1) / 2) / -k
    return None


def _adaptive_simpson(f, a, b, rel_tol=_SIMPSON_REL_TOL, abs_floor=_SIMPSON_ABS_FLOOR):
    """Adaptive Simpson quadrature; returns (value, error estimate)."""
    fa, fb = f(a), f(b)
    m = (a + b) / 2
    fm = f(m)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    tol = max(rel_tol * abs(whole), abs_floor)
    err_total = 0.0

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        nonlocal err_total
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        delta = left + right - whole
        if depth >= _SIMPSON_MAX_DEPTH or abs(delta) <= 15 * tol:
            err_total += abs(delta) / 15
            return left + right + delta / 15
        return (recurse(a, fa, m, fm, lm, flm, left, tol / 2, depth + 1)
                + recurse(m, fm, b, fb, rm, frm, right, tol / 2, depth + 1))

    value = recurse(a, fa, b, fb, m, fm, whole, tol, 0)
    return value, err_total


def volume(k: float, n: float, r1: float, r2: float, method: str = "auto") -> VolumeValue:
    """Volume V_{k,n}(r1, r2) of the annulus between radii r1 and r2.

    Parameters
    ----------
    k : float
        Curvature of the model space.
    n : float
        Dimension parameter, ``n >= 1`` (need not be an integer).
    r1, r2 : float
        Radii with ``0 <= r1 <= r2``; for ``k > 0`` also ``r2 <= pi/sqrt(k)``.
    method : {"auto", "closed_form", "quadrature"}
        ``auto`` uses the elementary antiderivative when one exists.

    Returns
    -------
    VolumeValue
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if r1 < 0 or r2 < r1:
        raise DomainError(f"need 0 <= r1 <= r2, got r1={r1}, r2={r2}")
    if r2 > _model_diameter(k) * (1 + 1e-12):
        raise DomainError(
            f"radius {r2} exceeds the model diameter pi/sqrt(k) = {_model_diameter(k)}")
    a = alpha(n)
    if r1 == r2:
        return VolumeValue(0.0, "closed_form", 0.0)
    if method in ("auto", "closed_form"):
        integral = _closed_form_integral(k, n, r1, r2)
        if integral is not None:
            return VolumeValue(a * integral, "closed_form", 0.0)
        if method == "closed_form":
            raise DomainError(f"no closed form for k={k}, n={n}")
    integral, err = _adaptive_simpson(lambda t: s_k(k, t) ** (n - 1), r1, r2)
    return VolumeValue(a * integral, "quadrature", a * err)


def volume_ratio(k: float, n: float, r1: float, r2: float, s1: float, s2: float) -> float:
    """V_{k,n}(r1, r2) / V_{k,n}(s1, s2)."""
    return volume(k, n, r1, r2).value / volume(k, n, s1, s2).value


def _check_threshold_args(n, C):
    if not n > 1:
        raise DomainError(f"the diameter threshold needs n > 1, got {n}")
    if C < 1:
        raise DomainError(f"C must be >= 1, got {C}")
    if C >= math.sqrt(2):
        raise DomainError(f"no threshold exists for C >= sqrt(2) (C={C})")


def _limit_ratio_sup(k, n, C, R, delta, samples=64):
    """sup over 0 < r <= R of C^2 [s_k((1/3+d) r) / s_k((1/3-d) r)]^(n-1)."""
    a, b = 1 / 3 + delta, 1 / 3 - delta
    best = (a / b) ** (n - 1)  # r -> 0 limit
    for i in range(1, samples + 1):
        r = R * i / samples
        num = s_k(k, a * r)
        if k > 0 and a * r >= _model_diameter(k):
            return math.inf
        best = max(best, (num / s_k(k, b * r)) ** (n - 1))
    return C * C * best


def delta_sup(k: float, n: float, C: float, R: float, tol: float = 1e-12) -> float:
    """Supremum of delta in (0, 1/3) keeping the limiting diameter inequality strict.

    Bisection on ``C^2 sup_r [s_k((1/3+d)r)/s_k((1/3-d)r)]^(n-1) < 2``; the
    returned value satisfies the inequality and lies within ``tol`` of its
    boundary.
    """
    _check_threshold_args(n, C)
    if R <= 0:
        raise DomainError(f"R must be positive, got {R}")
    lo, hi = 0.0, 1 / 3
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _limit_ratio_sup(k, n, C, R, mid) < 2:
            lo = mid
        else:
            hi = mid
    return lo


def delta_threshold(k: float, n: float, C: float, R: float = 1.0) -> float:
    """The constant delta(k, n, C, R) of the sphere-diameter bound.

    For ``k == 0`` this is the closed form
    ``(1/4) (q - 1) / (q + 1)`` with ``q = (2/C^2)^(1/(n-1))``.  That value is
    3/4 of the supremum admitted by the limiting inequality, and the same
    factor is applied to the bisection supremum for ``k != 0`` so the two
    branches agree as ``k -> 0``.
    """
    _check_threshold_args(n, C)
    if k == 0:
        q = (2 / C**2) ** (1 / (n - 1))
        return 0.25 * (q - 1) / (q + 1)
    return 0.75 * delta_sup(k, n, C, R)
