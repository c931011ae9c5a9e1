"""Exact arithmetic on the ring ratio alpha = L1/L.

Three representations are supported: rationals p/q (decimal strings are
read as exact rationals), quadratic surds (a + b sqrt(m))/c, and the
binary-expansion numbers produced by :func:`construct_alpha`.  Every
fractional part {n alpha} is obtained from an exact integer floor of
n alpha 2^P, so the integer part [n alpha + 1/2] is never misassigned and
the reported error radius is a true bound.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import precision_bits

__all__ = [
    "PrecisionExhausted",
    "AlphaRatio",
    "RationalAlpha",
    "QuadraticAlpha",
    "ConstructedAlpha",
    "DichotomySequences",
    "reduce_half_integer",
    "frac_part",
    "dichotomy_seq",
    "xi_tilde_below",
    "construct_alpha",
    "estimate_approx_constant",
    "fixed_point_limbs",
    "centered_offsets",
    "parse_alpha",
    "load_catalog",
    "CATALOG",
]

RADIUS_LIMIT = 1e-10
LIMB_BITS = 96
_LIMB_N_MAX = 2**31


class PrecisionExhausted(ArithmeticError):
    """The certified error radius could not be brought below the limit."""


def _sign_surd(x: int, y: int, m: int) -> int:
    """Exact sign of x + y sqrt(m) for integers x, y and nonsquare m > 1."""
    if y == 0:
        return (x > 0) - (x < 0)
    if x >= 0 and y > 0:
        return 1
    if x <= 0 and y < 0:
        return -1
    d = x * x - y * y * m
    # d != 0 because m is not a square
    return (d > 0) - (d < 0) if x > 0 else (d < 0) - (d > 0)


def _squarefree(m: int) -> tuple[int, int]:
    """Write m = s^2 m' with m' squarefree; return (s, m')."""
    s, rest, p = 1, m, 2
    while p * p <= rest:
        while rest % (p * p) == 0:
            rest //= p * p
            s *= p
        p += 1
    return s, rest


class AlphaRatio:
    """Base class; subclasses are immutable (Constructed memoizes internally)."""

    kind = "abstract"

    @property
    def rational(self) -> Fraction | None:
        """Exact value when alpha is rational, else None."""
        return None

    @property
    def is_rational(self) -> bool:
        return self.rational is not None

    @property
    def value(self) -> float:
        X, _ = self.floor_scaled(1, 80)
        return X / 2**80

    def __float__(self) -> float:
        return self.value

    def floor_scaled(self, n: int, P: int) -> tuple[int, int]:
        """Return (X, slack) with floor(n alpha 2^P) in [X, X + slack]."""
        raise NotImplementedError

    def sign_offset(self, n: int, x0: Fraction) -> int:
        """Exact sign of n alpha - x0."""
        raise NotImplementedError

    def hurwitz(self, n: int) -> bool:
        """Whether 5 n^2 r_n^2 < 1, i.e. n xi_n < 2/sqrt5."""
        raise NotImplementedError

    def exact_scale(self) -> int | None:
        """T such that alpha 2^T is an integer, when alpha is dyadic."""
        return None

    def _check_range(self):
        v = self.value
        if not (0.0 < v < 1.0):
            raise ValueError(f"alpha = L1/L must lie in (0, 1), got {v!r}")


@dataclass(frozen=True)
class RationalAlpha(AlphaRatio):
    p: int
    q: int
    label: str | None = field(default=None, compare=False)
    kind = "rational"

    def __post_init__(self):
        if self.q <= 0 or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"rational alpha needs lowest terms with q > 0, got {self.p}/{self.q}")
        if not (0 < self.p < self.q):
            raise ValueError(f"alpha = L1/L must lie in (0, 1), got {self.p}/{self.q}")

    @classmethod
    def from_fraction(cls, x: Fraction, label: str | None = None) -> "RationalAlpha":
        return cls(x.numerator, x.denominator, label)

    @property
    def rational(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def value(self) -> float:
        return self.p / self.q

    @property
    def name(self) -> str:
        return self.label or f"{self.p}/{self.q}"

    def floor_scaled(self, n, P):
        return (n * self.p << P) // self.q, 0

    def sign_offset(self, n, x0):
        d = n * self.rational - x0
        return (d > 0) - (d < 0)

    def hurwitz(self, n):
        x = n * self.rational
        r = x - math.floor(x + Fraction(1, 2))
        return 5 * n * n * r * r < 1


@dataclass(frozen=True)
class QuadraticAlpha(AlphaRatio):
    """alpha = (a + b sqrt(m)) / c with m reduced to its squarefree part."""

    a: int
    b: int
    c: int
    m: int
    label: str | None = field(default=None, compare=False)
    kind = "quadratic"

    def __post_init__(self):
        if self.c == 0 or self.m < 2:
            raise ValueError("quadratic alpha needs c != 0 and m >= 2")
        s, core = _squarefree(self.m)
        if core == 1:
            raise ValueError(f"m = {self.m} is a perfect square; use a rational instead")
        b, a, c = self.b * s, self.a, self.c
        if c < 0:
            a, b, c = -a, -b, -c
        if b == 0:
            raise ValueError("quadratic alpha needs b != 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "m", core)
        self._check_range()

    @property
    def name(self) -> str:
        return self.label or f"quad:{self.a},{self.b},{self.c},{self.m}"

    def floor_scaled(self, n, P):
        t = abs(self.b) * n << P
        s = math.isqrt(self.m * t * t)
        base = self.a * n << P
        if self.b > 0:
            return (base + s) // self.c, 0
        return (base - s - 1) // self.c, 0

    def sign_offset(self, n, x0):
        u, v = x0.numerator, x0.denominator
        return _sign_surd(v * n * self.a - self.c * u, v * n * self.b, self.m)

    def hurwitz(self, n):
        F = self.floor_scaled(n, 1)[0]
        R = (F + 1) >> 1
        x = n * self.a - self.c * R
        y = n * self.b
        A = 5 * n * n * (x * x + y * y * self.m) - self.c * self.c
        B = 10 * n * n * x * y
        return _sign_surd(A, B, self.m) < 0


class ConstructedAlpha(AlphaRatio):
    """Binary-expansion alpha whose dyadic blocks steer xi_tilde at n = 2^{n_j}.

    The expansion is 0.[n_1 zeros] B_1 B_2 ... where block B_j occupies
    positions n_j + 1 .. n_{j+1} and reads ``1 | I | f_j | 0^{Z_j}``:
    a leading one, the integer part I of ell in n_j - 1 bits, the first m_j
    fractional bits of ell, then Z_j zeros.  Multiplying by 2^{n_j} puts
    the binary point right before B_j, so that
    xi_tilde(2^{n_j}) = I + 0.f_j + (a tail below 2^{-(m_j + Z_j)}).

    ``m_j`` is the position of the (j-1)-th one bit of frac(ell), held once
    the bits run out, so the truncations ell_j strictly increase to ell.  The
    zero run is Z_j = max(n_j, m_{j+1} + 2), which keeps the tail below a
    quarter of the next truncation gain; the error |xi_tilde - ell| is then
    nonincreasing in j.  With ``terminate`` set the expansion stops after
    that many blocks and alpha is a dyadic rational.
    """

    kind = "constructed"

    def __init__(self, ell, terminate: int | None = None):
        ell = Fraction(ell)
        if ell < 0:
            raise ValueError(f"construct_alpha needs ell >= 0, got {ell}")
        self.ell = ell
        self.terminate = terminate
        self._int = math.floor(ell)
        self._frac = ell - self._int
        self._lock = threading.Lock()
        self._ones: list[int] = []
        self._scan_pos = 0
        self._frac_exhausted = self._frac == 0
        self._starts = [self._int.bit_length() + 1]
        self._ms: list[int] = []
        self._prefix = 0
        self._length = self._starts[0]
        self._dyadic: tuple[int, int] | None = None
        if terminate is not None:
            if terminate < 1:
                raise ValueError("terminate must be a positive block count")
            with self._lock:
                while len(self._ms) < terminate:
                    self._append_block()
            tz = (self._prefix & -self._prefix).bit_length() - 1
            self._dyadic = (self._prefix >> tz, self._length - tz)

    def __repr__(self):
        return f"ConstructedAlpha(ell={self.ell}, terminate={self.terminate})"

    @property
    def name(self) -> str:
        return f"constructed:{self.ell}"

    def _one_position(self, i: int) -> int | None:
        """1-based position of the i-th one bit (i >= 1) of frac(ell), or None."""
        while len(self._ones) < i and not self._frac_exhausted:
            self._scan_pos += 1
            bit = math.floor(self._frac * 2**self._scan_pos) & 1
            if bit:
                self._ones.append(self._scan_pos)
            if self._frac * 2**self._scan_pos == math.floor(self._frac * 2**self._scan_pos):
                self._frac_exhausted = True
        if i <= len(self._ones):
            return self._ones[i - 1]
        return None

    def _m(self, j: int) -> int:
        if j == 1:
            return 0
        pos = self._one_position(j - 1)
        if pos is None:
            return self._ones[-1] if self._ones else 0
        return pos

    def _append_block(self) -> None:
        j = len(self._ms) + 1
        n_j = self._starts[-1]
        m_j = self._m(j)
        z_j = max(n_j, self._m(j + 1) + 2)
        frac_bits = math.floor(self._frac * 2**m_j)
        block = (((1 << (n_j - 1)) | self._int) << m_j) | frac_bits
        width = n_j + m_j
        self._prefix = ((self._prefix << width) | block) << z_j
        self._length += width + z_j
        self._ms.append(m_j)
        self._starts.append(self._length)

    def block_starts(self, depth: int) -> list[int]:
        """The exponents n_1 < ... < n_depth."""
        with self._lock:
            while len(self._starts) < depth + 1 and not self._finished:
                self._append_block()
        if len(self._starts) < depth:
            raise ValueError(f"alpha was terminated after {self.terminate} blocks")
        return self._starts[:depth]

    @property
    def _finished(self) -> bool:
        return self.terminate is not None and len(self._ms) >= self.terminate

    def _bits(self, P: int) -> tuple[int, bool]:
        """floor(alpha 2^P) and whether the value is exact (no tail beyond)."""
        with self._lock:
            while self._length < P and not self._finished:
                self._append_block()
            prefix, length = self._prefix, self._length
        if length >= P:
            X = prefix >> (length - P)
            exact = self._finished and (prefix & ((1 << (length - P)) - 1)) == 0
            return X, exact
        return prefix << (P - length), True

    @property
    def rational(self) -> Fraction | None:
        if self._dyadic is None:
            return None
        A, T = self._dyadic
        return Fraction(A, 1 << T, _normalize=False)

    def exact_scale(self) -> int | None:
        return None if self._dyadic is None else self._dyadic[1]

    @property
    def value(self) -> float:
        X, _ = self._bits(80 + self._starts[0])
        return X / 2 ** (80 + self._starts[0])

    def floor_scaled(self, n, P):
        guard = n.bit_length() + 1
        A, exact = self._bits(P + guard)
        if exact and self.terminate is not None:
            return (n * A) >> guard, 0
        return (n * A) >> guard, 1

    def sign_offset(self, n, x0):
        if self._dyadic is not None:
            A, T = self._dyadic
            d = n * A * x0.denominator - (x0.numerator << T)
            return (d > 0) - (d < 0)
        P = 64 + n.bit_length() + max(x0.denominator.bit_length(), 1)
        for _ in range(16):
            X, slack = self.floor_scaled(n, P)
            lo, hi = Fraction(X, 1 << P), Fraction(X + slack + 1, 1 << P)
            if lo > x0:
                return 1
            if hi <= x0:
                return -1
            P *= 2
        raise PrecisionExhausted(f"cannot separate n alpha from {x0} at n={n}")

    def hurwitz(self, n):
        if self._dyadic is not None:
            A, T = self._dyadic
            x = n * A
            r = x - (((x >> (T - 1)) + 1) >> 1 << T)
            return 5 * n * n * r * r < 1 << (2 * T)
        P = 64 + 3 * n.bit_length()
        for _ in range(16):
            X, slack = self.floor_scaled(n, P)
            R = (X + (1 << (P - 1))) >> P
            lo = Fraction(X, 1 << P) - R
            hi = Fraction(X + slack + 1, 1 << P) - R
            small = min(abs(lo), abs(hi)) if lo * hi > 0 else Fraction(0)
            big = max(abs(lo), abs(hi))
            bound = Fraction(1, 5 * n * n)
            if big * big < bound:
                return True
            if small * small >= bound:
                return False
            P *= 2
        raise PrecisionExhausted(f"cannot decide the Hurwitz test at n={n}")


def reduce_half_integer(alpha: AlphaRatio) -> tuple[int, int]:
    """Coprime (p0, q0) with p/q = p0 / (2 q0)."""
    x = alpha.rational
    if x is None:
        raise ValueError("reduce_half_integer needs a rational alpha")
    p, q = x.numerator, x.denominator
    if q % 2:
        return 2 * p, q
    return p, q // 2


@dataclass(frozen=True)
class DichotomySequences:
    """r_n, xi_n, xi_tilde_n for one index, with a certified radius on xi_tilde."""

    n: int
    r_n: float
    xi: float
    one_minus_xi: float
    xi_tilde: float
    error_radius: float
    integer_flag: bool
    half_integer_flag: bool
    xi_tilde_q: Fraction

    @property
    def degenerate(self) -> bool:
        return self.integer_flag or self.half_integer_flag

    def xi_tilde_decimal(self, digits: int = 20) -> str:
        """xi_tilde rounded to ``digits`` significant digits."""
        with localcontext() as ctx:
            ctx.prec = digits
            v = Decimal(self.xi_tilde_q.numerator) / Decimal(self.xi_tilde_q.denominator)
        return format(v, "f") if v != 0 else "0"


def _working_precision(n: int, extra_bits: int) -> int:
    return precision_bits() + n.bit_length() + extra_bits


def frac_part(alpha: AlphaRatio, n: int, *, extra_bits: int = 0) -> tuple[float, float]:
    """{n alpha} with a certified error radius."""
    if n < 1:
        raise ValueError(f"frac_part needs n >= 1, got {n}")
    if isinstance(alpha, RationalAlpha):
        x = n * alpha.rational
        return float(x - math.floor(x)), 0.0
    P = _working_precision(n, extra_bits)
    T = alpha.exact_scale()
    if T is not None:
        P = max(P, T)
        X, _ = alpha.floor_scaled(n, P)
        return (X & ((1 << P) - 1)) / 2**P, 0.0
    X, slack = alpha.floor_scaled(n, P)
    rem = X & ((1 << P) - 1)
    radius = (slack + 1) / 2 ** (P + 1)
    if n * radius >= RADIUS_LIMIT:
        raise PrecisionExhausted(f"radius {n * radius:.3g} at n={n} with {P} bits")
    return (2 * rem + slack + 1) / 2 ** (P + 1), radius


def dichotomy_seq(alpha: AlphaRatio, n: int, *, extra_bits: int = 0) -> DichotomySequences:
    """The observables r_n, xi_n = 2|r_n|, 1 - xi_n and xi_tilde_n = n({n alpha} - 1/2)."""
    if n < 1:
        raise ValueError(f"dichotomy_seq needs n >= 1, got {n}")
    half = Fraction(1, 2)
    if isinstance(alpha, RationalAlpha):
        x = n * alpha.rational
        f = x - math.floor(x)
        d = f - half
        r = f if f < half else f - 1
        return DichotomySequences(
            n=n,
            r_n=float(r),
            xi=float(2 * abs(r)),
            one_minus_xi=float(2 * abs(d)),
            xi_tilde=float(n * d),
            error_radius=0.0,
            integer_flag=f == 0,
            half_integer_flag=f == half,
            xi_tilde_q=n * d,
        )
    P = _working_precision(n, extra_bits)
    T = alpha.exact_scale()
    if T is not None:
        # dyadic alpha: at P >= T the floor is the exact value
        P = max(P, T)
    X, slack = alpha.floor_scaled(n, P)
    one = 1 << P
    rem = X & (one - 1)
    if T is not None:
        mid2, radius = 2 * rem, 0.0
    else:
        # midpoint of the certified interval [rem, rem + slack + 1) / 2^P, doubled
        mid2 = 2 * rem + slack + 1
        radius = n * (slack + 1) / 2 ** (P + 1)
        if radius >= RADIUS_LIMIT:
            raise PrecisionExhausted(f"radius {radius:.3g} at n={n} with {P} bits")
    d2 = mid2 - one
    r2 = mid2 if d2 < 0 else mid2 - 2 * one
    den = 1 << (P + 1)
    return DichotomySequences(
        n=n,
        r_n=r2 / den,
        xi=abs(r2) / one,
        one_minus_xi=abs(d2) / one,
        xi_tilde=n * d2 / den,
        error_radius=radius,
        integer_flag=T is not None and rem == 0,
        half_integer_flag=T is not None and d2 == 0,
        xi_tilde_q=_dyadic_fraction(n * d2, P + 1),
    )


def _dyadic_fraction(num: int, shift: int) -> Fraction:
    """num / 2^shift in lowest terms without a general gcd."""
    if num == 0:
        return Fraction(0)
    tz = min((num & -num).bit_length() - 1, shift)
    return Fraction(num >> tz, 1 << (shift - tz), _normalize=False)


def xi_tilde_below(alpha: AlphaRatio, n: int, threshold: Fraction) -> bool:
    """Exact test |xi_tilde_n| < threshold."""
    q = alpha.rational
    if q is not None:
        x = n * q
        return abs(n * (x - math.floor(x) - Fraction(1, 2))) < threshold
    F, slack = alpha.floor_scaled(n, 0)
    if slack and alpha.sign_offset(n, Fraction(F + 1)) >= 0:
        F += 1
    centre = F + Fraction(1, 2)
    width = threshold / n
    return alpha.sign_offset(n, centre + width) < 0 and alpha.sign_offset(n, centre - width) > 0


def fixed_point_limbs(alpha: AlphaRatio) -> np.ndarray:
    """floor(alpha 2^96) split into three 32-bit limbs (most significant first)."""
    X, _ = alpha.floor_scaled(1, LIMB_BITS)
    mask = (1 << 32) - 1
    return np.array([(X >> 64) & mask, (X >> 32) & mask, X & mask], dtype=np.uint64)


def centered_offsets(limbs: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Float approximations of {n alpha} - 1/2 for 1 <= n < 2^31.

    The products n * limb are exact in uint64; the result carries an absolute
    error below |d| 2^-52 + n 2^-95, which callers widen before filtering.
    """
    n = np.asarray(n, dtype=np.uint64)
    if n.size and int(n.max()) >= _LIMB_N_MAX:
        raise ValueError("centered_offsets supports n < 2^31")
    mask = np.uint64(0xFFFFFFFF)
    shift = np.uint64(32)
    p0 = n * limbs[2]
    l0 = p0 & mask
    p1 = n * limbs[1] + (p0 >> shift)
    l1 = p1 & mask
    p2 = n * limbs[0] + (p1 >> shift)
    l2 = p2 & mask
    return (
        (l2.astype(np.int64) - 2**31).astype(np.float64) * 2.0**-32
        + l1.astype(np.float64) * 2.0**-64
        + l0.astype(np.float64) * 2.0**-96
    )


def construct_alpha(ell, depth: int, *, terminate: bool = False) -> tuple[ConstructedAlpha, list[int]]:
    """Build alpha in (0, 1) with xi_tilde(2^{n_j}) -> ell; return alpha and n_1..n_depth."""
    if not 1 <= depth <= 64:
        raise ValueError(f"depth must lie in 1..64, got {depth}")
    ell = Fraction(ell)
    if ell < 0:
        raise ValueError(f"construct_alpha needs ell >= 0, got {ell}")
    alpha = ConstructedAlpha(ell, terminate=depth if terminate else None)
    return alpha, alpha.block_starts(depth)


def estimate_approx_constant(alpha: AlphaRatio, beta, N: int, *, block: int = 1 << 16) -> float:
    """min over 1 <= n <= N of n ||alpha n - beta|| (running minimum)."""
    if not 1 <= N < _LIMB_N_MAX:
        raise ValueError(f"estimate_approx_constant needs 1 <= N < 2^31, got {N}")
    beta = Fraction(beta)
    shift = float(beta - math.floor(beta))
    # float screening error on n ||.||, widened generously
    tol = N * 2.0**-48 + 1e-15
    limbs = fixed_point_limbs(alpha)
    best = math.inf
    candidates: list[tuple[float, int]] = []
    for start in range(1, N + 1, block):
        ns = np.arange(start, min(start + block, N + 1), dtype=np.uint64)
        frac = centered_offsets(limbs, ns) + 0.5
        dist = np.abs((frac - shift + 0.5) % 1.0 - 0.5)
        vals = ns.astype(np.float64) * dist
        best = min(best, float(vals.min()))
        keep = np.nonzero(vals <= best + tol)[0]
        candidates.extend((float(vals[i]), int(ns[i])) for i in keep)
    return min(_exact_distance(alpha, n, beta) for v, n in candidates if v <= best + tol)


def _exact_distance(alpha: AlphaRatio, n: int, beta: Fraction) -> float:
    q = alpha.rational
    if q is not None:
        x = n * q - beta
        return float(n * abs(x - math.floor(x + Fraction(1, 2))))
    P = _working_precision(n, 64)
    X, slack = alpha.floor_scaled(n, P)
    scaled = Fraction(2 * X + slack + 1, 1 << (P + 1)) - beta
    return float(n * abs(scaled - math.floor(scaled + Fraction(1, 2))))


CATALOG: dict[str, AlphaRatio] = {
    "inv_sqrt5": QuadraticAlpha(0, 1, 5, 5, label="inv_sqrt5"),
    "inv_sqrt3": QuadraticAlpha(0, 1, 3, 3, label="inv_sqrt3"),
    "inv_one_plus_sqrt5": QuadraticAlpha(-1, 1, 4, 5, label="inv_one_plus_sqrt5"),
}


def load_catalog(path) -> dict[str, AlphaRatio]:
    """Read ``name kind params`` lines; kinds are ``quad a b c m``, ``rational p q``, ``decimal d``."""
    out: dict[str, AlphaRatio] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            name, kind, params = parts[0], parts[1], parts[2:]
            if kind == "quad":
                a, b, c, m = (int(t) for t in params)
                out[name] = QuadraticAlpha(a, b, c, m, label=name)
            elif kind == "rational":
                p, q = (int(t) for t in params)
                out[name] = RationalAlpha.from_fraction(Fraction(p, q), label=name)
            elif kind == "decimal":
                (d,) = params
                out[name] = RationalAlpha.from_fraction(Fraction(d), label=name)
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: bad catalog line {raw!r} ({exc})") from None
    return out


def parse_alpha(text: str, catalog: dict[str, AlphaRatio] | None = None) -> AlphaRatio:
    """Parse a catalog name, ``p/q``, ``quad:a,b,c,m`` or an exact decimal."""
    text = text.strip()
    table = dict(CATALOG)
    if catalog:
        table.update(catalog)
    if text in table:
        return table[text]
    if text.startswith("quad:"):
        try:
            a, b, c, m = (int(t) for t in text[5:].split(","))
        except ValueError:
            raise ValueError(f"bad quadratic alpha {text!r}; expected quad:a,b,c,m") from None
        return QuadraticAlpha(a, b, c, m)
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse alpha {text!r}") from None
    return RationalAlpha.from_fraction(x, label=None if "/" in text else text)
