"""Frequencies and classification of the standing waves of (P+) and (P-).

Isolated solutions come from the closed forms

    sqrt|w_n^+| = (n/L) G(xi_n),      sqrt|w_n^-| = (n/L) G(1 - xi_n),

evaluated through the certified inverse phi^-1 (never by re-solving the
boundary condition).  For rational alpha the degenerate indices carry the
one-parameter branches instead: n alpha in N gives a (P+) branch and
n alpha + 1/2 in N a (P-) branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .alpha import AlphaRatio, dichotomy_seq, reduce_half_integer
from .spectral_maps import (
    K0,
    ModulusFocusing,
    S_inverse,
    S_of_k,
    W_inverse,
    gamma_shift,
    phi_inverse,
)

__all__ = [
    "PLUS",
    "MINUS",
    "ISOLATED",
    "BRANCH",
    "GraphGeometry",
    "StandingWave",
    "BranchMarker",
    "LinearEigenvalue",
    "BifurcationCheck",
    "omega_plus",
    "omega_minus",
    "enumerate_solutions",
    "branch_solution",
    "linear_eigenvalues",
    "bifurcation_check",
    "cluster_interval_plus",
    "cluster_interval_minus",
]

PLUS = "plus"
MINUS = "minus"
ISOLATED = "isolated"
BRANCH = "branch"


@dataclass(frozen=True)
class GraphGeometry:
    """Ring lengths L1 = alpha L and L2 = L - L1 of the double bridge."""

    alpha: AlphaRatio
    L: float = 1.0

    def __post_init__(self):
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise ValueError(f"ring length L must be positive, got {self.L!r}")

    @property
    def L1(self) -> float:
        return self.alpha.value * self.L

    @property
    def L2(self) -> float:
        return self.L - self.L1


@dataclass(frozen=True)
class StandingWave:
    """One solution of (P+) or (P-): ring profile A cn(p (x + shift); k_n)."""

    family: str
    n: int
    omega: float
    k_n: ModulusFocusing
    shift: float
    branch: str = ISOLATED

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0 * abs(self.omega) * (1.0 - self.k_n.m1) / self.k_n.e)

    @property
    def wavenumber(self) -> float:
        return math.sqrt(abs(self.omega) / self.k_n.e)


@dataclass(frozen=True)
class BranchMarker:
    """Index n carrying a one-parameter family of solutions over omega < 0."""

    family: str
    n: int

    def at(self, geom: GraphGeometry, omega: float, sign: int = 1) -> StandingWave:
        return branch_solution(geom, self.n, omega, sign=sign, family=self.family)


@dataclass(frozen=True)
class LinearEigenvalue:
    n: int
    lam: float
    q0: int


def _isolated(geom: GraphGeometry, n: int, family: str) -> StandingWave | None:
    ds = dichotomy_seq(geom.alpha, n)
    if ds.degenerate:
        return None
    if family == PLUS:
        t, tc = ds.xi, ds.one_minus_xi
    else:
        t, tc = ds.one_minus_xi, ds.xi
    mod = phi_inverse(t, tc)
    root = n * S_of_k(mod) / geom.L
    r = ds.r_n
    if family == PLUS:
        s = geom.L / (2 * n) * r
    else:
        s = geom.L / (2 * n) * (abs(r) - 0.5) * math.copysign(1.0, r)
    return StandingWave(family, n, -root * root, mod, -s)


def omega_plus(geom: GraphGeometry, n: int) -> StandingWave | None:
    """Isolated (P+) solution at index n, or None when n alpha or n alpha + 1/2 is an integer."""
    return _isolated(geom, n, PLUS)


def omega_minus(geom: GraphGeometry, n: int) -> StandingWave | None:
    """Isolated (P-) solution at index n, or None in the same degenerate cases."""
    return _isolated(geom, n, MINUS)


def enumerate_solutions(geom: GraphGeometry, n_max: int) -> list[StandingWave | BranchMarker]:
    """All solutions with n <= n_max, ordered by n and then (P+) before (P-)."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    out: list[StandingWave | BranchMarker] = []
    for n in range(1, n_max + 1):
        ds = dichotomy_seq(geom.alpha, n)
        if ds.integer_flag:
            out.append(BranchMarker(PLUS, n))
        elif ds.half_integer_flag:
            out.append(BranchMarker(MINUS, n))
        else:
            out.append(_isolated(geom, n, PLUS))
            out.append(_isolated(geom, n, MINUS))
    return out


def branch_solution(
    geom: GraphGeometry, n: int, omega: float, *, sign: int = 1, family: str | None = None
) -> StandingWave:
    """Member of the continuous branch at index n and frequency omega < 0, shift sign * gamma."""
    if not omega < 0.0:
        raise ValueError(f"branch solutions need omega < 0, got {omega!r}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ds = dichotomy_seq(geom.alpha, n)
    actual = PLUS if ds.integer_flag else MINUS if ds.half_integer_flag else None
    if actual is None or (family is not None and family != actual):
        raise ValueError(f"n={n} is not a branch index for alpha={geom.alpha.name}")
    mod = S_inverse(geom.L * math.sqrt(-omega) / n)
    gamma = gamma_shift(n, omega, geom.L)
    return StandingWave(actual, n, omega, mod, sign * gamma, BRANCH)


def linear_eigenvalues(geom: GraphGeometry, n_max: int) -> list[LinearEigenvalue]:
    """Eigenvalues n^2 4 pi^2 q0^2 / L^2 of the linear operator; empty for irrational alpha."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if not geom.alpha.is_rational:
        return []
    _, q0 = reduce_half_integer(geom.alpha)
    c = (2.0 * math.pi * q0 / geom.L) ** 2
    return [LinearEigenvalue(n, n * n * c, q0) for n in range(1, n_max + 1)]


@dataclass(frozen=True)
class BifurcationCheck:
    lam: float
    omega: float
    k_n: float
    amplitude: float
    predicted: float
    k_predicted: float

    @property
    def amplitude_ratio(self) -> float:
        return self.amplitude / self.predicted

    @property
    def k_ratio(self) -> float:
        return self.k_n / self.k_predicted


def bifurcation_check(geom: GraphGeometry, n: int, eps: float) -> BifurcationCheck:
    """Small-amplitude sine solution at omega = lambda_n - eps versus sqrt(4 eps / 3)."""
    eigs = linear_eigenvalues(geom, n)
    if not eigs:
        raise ValueError("bifurcation from linear eigenvalues needs a rational alpha")
    lam = eigs[-1].lam
    if not (0.0 < eps < lam):
        raise ValueError(f"need 0 < eps < lambda_n = {lam!r}, got {eps!r}")
    omega = lam - eps
    ratio = eps / lam
    deficit = 0.5 * math.pi * ratio / (1.0 + math.sqrt(1.0 - ratio))
    k = W_inverse(0.5 * math.pi - deficit, deficit)
    r = math.sqrt(2.0) * k
    amplitude = math.sqrt(2.0 * k * k * omega / ((1.0 - r) * (1.0 + r)))
    return BifurcationCheck(
        lam=lam,
        omega=omega,
        k_n=k,
        amplitude=amplitude,
        predicted=math.sqrt(4.0 * eps / 3.0),
        k_predicted=math.sqrt(2.0 * eps / (3.0 * lam)),
    )


def cluster_interval_plus(L: float = 1.0) -> tuple[float, float]:
    """The interval [-K(1/sqrt2)^4 / L^2, 0] holding a cluster point of w_n^+."""
    return -(K0**4) / L**2, 0.0


def cluster_interval_minus(L: float = 1.0) -> tuple[float, float]:
    """The interval [-(16/5) K(1/sqrt2)^4 / L^2, 0] holding a cluster point of w_n^-."""
    return -16.0 / 5.0 * K0**4 / L**2, 0.0
