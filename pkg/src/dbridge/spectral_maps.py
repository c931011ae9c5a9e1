"""Monotone maps S, phi, G = S o phi^-1, the period map and W, with inverses.

A focusing modulus k in (1/sqrt2, 1) is carried as the pair
``e = 2k^2 - 1`` and ``m1 = 1 - k^2`` (so ``e + 2 m1 = 1``).  Near
k -> 1/sqrt2 the small quantity is ``e``; near k -> 1 it is ``m1``; keeping
both means neither end of the domain suffers cancellation.  Inverses are
solved in the logit variable ``x = log(e / (2 m1))`` which maps the whole
domain onto the real line.

With this parameterisation the two pieces of phi have cancellation-free
Carlson forms::

    H(k)     = int_{sqrt(e)/k}^1 dt / sqrt((1-t^2)(1-k^2(1-t^2)))
             = sqrt(m1) R_F(e, e + m1^2, e + m1)
    K(k) - H = sqrt(e)  R_F(m1^2, m1 (m1 + e), e + m1^2)

so ``phi = H/K`` and ``1 - phi`` are both available to full relative
precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, optimize

from .config import TOLERANCES
from .elliptic import agm, carlson_rf, complete_K

__all__ = [
    "K0",
    "ModulusFocusing",
    "S_of_k",
    "S_inverse",
    "phi_of_k",
    "phi_complement",
    "phi_inverse",
    "G_of_t",
    "gamma_shift",
    "period_T",
    "W_of_k",
    "W_inverse",
    "W_deficit",
    "G_asymptotic",
    "phi_inverse_asymptotic",
    "W_inverse_asymptotic",
]

SQRT1_2 = math.sqrt(0.5)
K0 = complete_K(SQRT1_2)
"""K(1/sqrt2), the constant that sets the cluster intervals."""

_LOGIT_BRACKET = 740.0
# below this complement the leading asymptotic law is exact to double precision
_TC_ASYMPTOTIC = 1e-150


@dataclass(frozen=True)
class ModulusFocusing:
    """Modulus k in (1/sqrt2, 1) stored through ``e = 2k^2-1`` and ``m1 = 1-k^2``."""

    e: float
    m1: float

    def __post_init__(self):
        if not (self.e > 0.0 and self.m1 > 0.0):
            raise ValueError(f"focusing modulus needs 1/sqrt2 < k < 1 (e={self.e}, m1={self.m1})")
        if abs(self.e + 2.0 * self.m1 - 1.0) > 1e-12:
            raise ValueError("inconsistent modulus pair: e + 2 m1 != 1")

    @classmethod
    def from_k(cls, k: float) -> "ModulusFocusing":
        k = float(k)
        if not (SQRT1_2 < k < 1.0):
            raise ValueError(f"focusing modulus must lie in (1/sqrt2, 1), got {k!r}")
        m1 = (1.0 - k) * (1.0 + k)
        e = (math.sqrt(2.0) * k - 1.0) * (math.sqrt(2.0) * k + 1.0)
        if m1 < 0.25:
            e = 1.0 - 2.0 * m1
        else:
            m1 = 0.5 * (1.0 - e)
        return cls(e, m1)

    @classmethod
    def from_e(cls, e: float) -> "ModulusFocusing":
        return cls(e, 0.5 * (1.0 - e))

    @classmethod
    def from_logit(cls, x: float) -> "ModulusFocusing":
        if x >= 0.0:
            z = math.exp(-x)
            return cls(1.0 / (1.0 + z), 0.5 * z / (1.0 + z))
        z = math.exp(x)
        return cls(z / (1.0 + z), 0.5 / (1.0 + z))

    @property
    def logit(self) -> float:
        return math.log(self.e) - math.log(2.0 * self.m1)

    @property
    def k(self) -> float:
        if self.m1 < 0.25:
            return math.sqrt(1.0 - self.m1)
        return math.sqrt(0.5 * (1.0 + self.e))

    @property
    def kc(self) -> float:
        return math.sqrt(self.m1)

    def __float__(self) -> float:
        return self.k


def _focusing(k) -> ModulusFocusing:
    if isinstance(k, ModulusFocusing):
        return k
    return ModulusFocusing.from_k(k)


def _K(mod: ModulusFocusing) -> float:
    return math.pi / (2.0 * agm(1.0, mod.kc))


def _H(mod: ModulusFocusing) -> float:
    e, m1 = mod.e, mod.m1
    return math.sqrt(m1) * carlson_rf(e, e + m1 * m1, e + m1)


def _H_complement(mod: ModulusFocusing) -> float:
    e, m1 = mod.e, mod.m1
    return math.sqrt(e) * carlson_rf(m1 * m1, m1 * (m1 + e), e + m1 * m1)


def S_of_k(k) -> float:
    """S(k) = 4 sqrt(2k^2 - 1) K(k): period times sqrt|omega| on the focusing side."""
    mod = _focusing(k)
    return 4.0 * math.sqrt(mod.e) * _K(mod)


def phi_of_k(k) -> float:
    """phi(k) = H(k)/K(k), strictly decreasing from 1 to 0 on (1/sqrt2, 1)."""
    mod = _focusing(k)
    return min(1.0, _H(mod) / _K(mod))


def phi_complement(k) -> float:
    """1 - phi(k), evaluated without cancellation near k = 1/sqrt2."""
    mod = _focusing(k)
    return min(1.0, _H_complement(mod) / _K(mod))


def _solve_logit(f, what: str) -> ModulusFocusing:
    lo, hi = -_LOGIT_BRACKET, _LOGIT_BRACKET
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise ValueError(f"{what}: target outside the double-precision range of the map")
    x = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=500)
    return ModulusFocusing.from_logit(x)


def S_inverse(s: float) -> ModulusFocusing:
    """The modulus k with S(k) = s."""
    if not s > 0.0 or math.isinf(s):
        raise ValueError(f"S_inverse needs s > 0, got {s!r}")
    log_s = math.log(s)
    mod = _solve_logit(lambda x: math.log(S_of_k(ModulusFocusing.from_logit(x))) - log_s, "S_inverse")
    if abs(S_of_k(mod) - s) > TOLERANCES.inverse * max(1.0, s):
        raise ArithmeticError(f"S_inverse failed to reach tolerance at s={s!r}")
    return mod


def phi_inverse(t: float, tc: float | None = None) -> ModulusFocusing:
    """The modulus k with phi(k) = t.

    ``tc`` is 1 - t; pass it when t is close to 1 and the complement is
    known more accurately than ``1 - t`` would give.
    """
    if tc is None:
        tc = 1.0 - t
    # t + tc = 1 up to rounding, so either may exceed 1 by an ulp
    if not (0.0 < t <= 1.0 + 4.5e-16 and 0.0 < tc <= 1.0 + 4.5e-16):
        raise ValueError(f"phi_inverse needs t in (0, 1), got t={t!r}, 1-t={tc!r}")
    if t <= 0.5:
        log_t = math.log(t)
        mod = _solve_logit(lambda x: math.log(phi_of_k(ModulusFocusing.from_logit(x))) - log_t, "phi_inverse")
        err = abs(phi_of_k(mod) - t)
    else:
        if tc < _TC_ASYMPTOTIC:
            return phi_inverse_asymptotic(tc)
        log_tc = math.log(tc)
        mod = _solve_logit(
            lambda x: math.log(phi_complement(ModulusFocusing.from_logit(x))) - log_tc, "phi_inverse"
        )
        err = abs(phi_complement(mod) - tc)
    if err > TOLERANCES.inverse * max(t, tc) and err > TOLERANCES.map_abs:
        raise ArithmeticError(f"phi_inverse failed to reach tolerance at t={t!r}")
    return mod


def G_of_t(t: float, tc: float | None = None) -> float:
    """G = S o phi^-1, continuous and strictly decreasing from (0,1) onto (0, inf)."""
    if tc is None:
        tc = 1.0 - t
    if 0.0 < tc < _TC_ASYMPTOTIC and t > 0.5:
        return G_asymptotic(tc)
    return S_of_k(phi_inverse(t, tc))


def G_asymptotic(tc: float) -> float:
    """Leading behaviour of G(t) as t -> 1: 2 K(1/sqrt2)^2 (1 - t)."""
    return 2.0 * K0 * K0 * tc


def phi_inverse_asymptotic(tc: float) -> ModulusFocusing:
    """phi^-1(t) with k - 1/sqrt2 ~ K(1/sqrt2)^2 (1-t)^2 / (8 sqrt2), i.e. e ~ (K0 (1-t)/2)^2."""
    e = (0.5 * K0 * tc) ** 2
    if e == 0.0:
        raise ValueError(f"1 - t = {tc!r} is below the representable range of the modulus")
    return ModulusFocusing.from_e(e)


def gamma_shift(n: int, omega: float, L: float, *, method: str = "phi") -> float:
    """Quarter-shift gamma_{n,omega}: the first positive preimage of sqrt(2|omega|).

    ``method="phi"`` uses (L/4n) phi(k_{n,omega}); ``method="integral"``
    integrates the arccn representation directly by adaptive quadrature
    after the substitution t = 1 - s^2, independently of the Carlson forms.
    """
    if not omega < 0.0:
        raise ValueError(f"gamma_shift needs omega < 0, got {omega!r}")
    if n < 1 or L <= 0.0:
        raise ValueError("gamma_shift needs n >= 1 and L > 0")
    mod = S_inverse(L * math.sqrt(-omega) / n)
    if method == "phi":
        return L / (4.0 * n) * phi_of_k(mod)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")
    k2 = 1.0 - mod.m1
    c0 = math.sqrt(mod.e / k2)
    s_max = math.sqrt(mod.m1 / (k2 * (1.0 + c0)))

    def integrand(s):
        w = s * s * (2.0 - s * s)
        return 2.0 / math.sqrt((2.0 - s * s) * (1.0 - k2 * w))

    val, _ = integrate.quad(integrand, 0.0, s_max, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.sqrt(mod.e / -omega) * val


def period_T(omega: float, k) -> float:
    """Minimal period of the cnoidal solution at frequency omega with modulus k."""
    if omega < 0.0:
        return S_of_k(k) / math.sqrt(-omega)
    if omega > 0.0:
        return 4.0 * W_of_k(float(k)) / math.sqrt(omega)
    raise ValueError("period_T is undefined at omega = 0")


def W_of_k(k: float) -> float:
    """W(k) = sqrt(1 - 2k^2) K(k) on (0, 1/sqrt2), strictly decreasing from pi/2 to 0."""
    if not (0.0 < k < SQRT1_2):
        raise ValueError(f"W_of_k needs k in (0, 1/sqrt2), got {k!r}")
    r = math.sqrt(2.0) * k
    return math.sqrt((1.0 - r) * (1.0 + r)) * complete_K(k)


def W_deficit(k: float) -> float:
    """pi/2 - W(k), accurate to full relative precision as k -> 0."""
    if not (0.0 <= k < SQRT1_2):
        raise ValueError(f"W_deficit needs k in [0, 1/sqrt2), got {k!r}")
    m = k * k
    if m == 0.0:
        return 0.0
    if m >= 0.25:
        return 0.5 * math.pi - W_of_k(k)
    # 2K/pi - 1 as the hypergeometric series 2F1(1/2, 1/2; 1; m) - 1
    term, series, j = 1.0, 0.0, 0
    while True:
        j += 1
        term *= m * ((j - 0.5) / j) ** 2
        series += term
        if term <= 1e-17 * series:
            break
    log_ratio = 0.5 * math.log1p(-2.0 * m) + math.log1p(series)
    return -0.5 * math.pi * math.expm1(log_ratio)


def W_inverse(t: float, deficit: float | None = None) -> float:
    """k in (0, 1/sqrt2) with W(k) = t; ``deficit`` is pi/2 - t if known precisely."""
    if deficit is None:
        deficit = 0.5 * math.pi - t
    if not (0.0 < deficit < 0.5 * math.pi):
        raise ValueError(f"W_inverse needs t in (0, pi/2), got {t!r}")
    hi = SQRT1_2 * (1.0 - 1e-15)
    guess = W_inverse_asymptotic(deficit)
    lo = 0.0
    if guess < 0.1:
        # the deficit is increasing and ~ (3 pi / 8) k^2, so this brackets the root
        lo, hi = 0.5 * guess, min(2.0 * guess, hi)
    return optimize.brentq(lambda k: W_deficit(k) - deficit, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=500)


def W_inverse_asymptotic(deficit: float) -> float:
    """W^-1(t) ~ sqrt(8 (pi/2 - t) / (3 pi)) as t -> pi/2."""
    return math.sqrt(8.0 * deficit / (3.0 * math.pi))
