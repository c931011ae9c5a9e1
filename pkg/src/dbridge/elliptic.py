"""Elliptic-function kernel.

Complete integral K(k) by the arithmetic-geometric mean, Jacobi sn/cn/dn by
the descending Landen (AGM) scheme, and incomplete integrals of the first
kind through Carlson's symmetric form R_F.

Every routine that is sensitive near k -> 1 accepts the complementary
modulus ``kc = sqrt(1 - k^2)`` as an optional keyword so callers holding an
accurate ``kc`` do not lose it by rounding ``k`` to a double.  For
``k > 0.9999`` passed without ``kc`` the results are best effort only.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "agm",
    "complete_K",
    "carlson_rf",
    "jacobi_cn_sn_dn",
    "arccn",
    "dnoidal_range",
]

_AGM_TOL = 1e-15
_LANDEN_TOL = 1e-15


def _check_modulus(k: float) -> None:
    if not (0.0 <= k < 1.0) or math.isnan(k):
        raise ValueError(f"elliptic modulus must satisfy 0 <= k < 1, got {k!r}")


def _complement(k: float, kc: float | None) -> float:
    if kc is not None:
        if not (0.0 < kc <= 1.0):
            raise ValueError(f"complementary modulus must lie in (0, 1], got {kc!r}")
        return kc
    return math.sqrt((1.0 - k) * (1.0 + k))


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("agm needs positive arguments")
    for _ in range(64):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k: float, *, kc: float | None = None) -> float:
    """Complete elliptic integral of the first kind, modulus convention.

    K(k) = int_0^1 dt / sqrt((1 - t^2)(1 - k^2 t^2)) = pi / (2 agm(1, kc)).
    """
    _check_modulus(k)
    return math.pi / (2.0 * agm(1.0, _complement(k, kc)))


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_F(x, y, z) (at most one argument zero)."""
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise ValueError("carlson_rf needs nonnegative arguments, at most one zero")
    a0 = (x + y + z) / 3.0
    x0, y0 = x, y
    q = max(abs(a0 - x), abs(a0 - y), abs(a0 - z)) / (3e-16) ** (1.0 / 6.0)
    a = a0
    scale = 1.0
    for _ in range(200):
        if q * scale < abs(a):
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    dx = (a0 - x0) * scale / a
    dy = (a0 - y0) * scale / a
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / math.sqrt(a)


def _landen_sequence(k: float, kc: float) -> tuple[list[float], list[float]]:
    a = [1.0]
    c = [k]
    b = kc
    while abs(c[-1]) > _LANDEN_TOL * a[-1] and len(a) < 40:
        an = 0.5 * (a[-1] + b)
        # c_{n+1} = (a_n - b_n)/2 computed without cancellation
        c.append(c[-1] * c[-1] / (4.0 * an))
        b = math.sqrt(a[-1] * b)
        a.append(an)
    return a, c


def jacobi_cn_sn_dn(u, k: float, *, kc: float | None = None):
    """Return ``(cn, sn, dn)`` at argument ``u`` (scalar or array).

    The argument is folded into [0, K] with the quarter-period symmetries
    before running the Landen recursion, which keeps the absolute error
    near machine precision for |u| a few periods from the origin.
    """
    _check_modulus(k)
    kc = _complement(k, kc)
    m1 = kc * kc
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("jacobi_cn_sn_dn needs a finite argument")
    if k == 0.0:
        cn, sn, dn = np.cos(u), np.sin(u), np.ones_like(u)
    else:
        K = complete_K(k, kc=kc)
        r = u - 4.0 * K * np.round(u / (4.0 * K))
        sn_sign = np.where(r < 0.0, -1.0, 1.0)
        r = np.abs(r)
        upper = r > K
        cn_sign = np.where(upper, -1.0, 1.0)
        r = np.where(upper, 2.0 * K - r, r)

        a, c = _landen_sequence(k, kc)
        n = len(a) - 1
        phi = (2.0**n) * a[n] * r
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(np.clip(c[j] / a[j] * np.sin(phi), -1.0, 1.0)))
        sn = sn_sign * np.sin(phi)
        cn = cn_sign * np.cos(phi)
        # 1 - k^2 sn^2 rewritten as a sum of nonnegative terms
        dn = np.sqrt(np.cos(phi) ** 2 + m1 * np.sin(phi) ** 2)
    if scalar:
        return float(cn), float(sn), float(dn)
    return cn, sn, dn


def arccn(c: float, k: float, *, kc: float | None = None) -> float:
    """Principal inverse of cn: the unique u in [0, K(k)] with cn(u; k) = c.

    Evaluates u = F(arccos c | k) = s R_F(c^2, c^2 + kc^2 s^2, 1) with
    s = sqrt(1 - c^2).
    """
    _check_modulus(k)
    if not (0.0 <= c <= 1.0):
        raise ValueError(f"arccn needs 0 <= c <= 1, got {c!r}")
    kc = _complement(k, kc)
    if c == 1.0:
        return 0.0
    s2 = (1.0 - c) * (1.0 + c)
    s = math.sqrt(s2)
    return s * carlson_rf(c * c, c * c + kc * kc * s2, 1.0)


def dnoidal_range(omega: float, k: float) -> tuple[float, float]:
    """Oscillation range of the positive dnoidal solution at frequency omega < 0.

    d(x) = sqrt(2|w|/(2-k^2)) dn(sqrt(|w|/(2-k^2)) x; k) stays strictly below
    sqrt(2|w|), which is why dnoidal profiles never meet the vertex value.
    """
    if not omega < 0.0:
        raise ValueError(f"dnoidal_range needs omega < 0, got {omega!r}")
    _check_modulus(k)
    amp = math.sqrt(2.0 * abs(omega) / (2.0 - k * k))
    return amp * math.sqrt((1.0 - k) * (1.0 + k)), amp
