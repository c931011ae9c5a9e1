"""Four-edge profiles of a standing wave and their validation.

Edges 1 and 2 are the ring pieces [0, L1] and [L1, L] of one L-periodic
cnoidal function; edges 3 and 4 are the half-line tails attached at the
vertices x = 0 and x = L1.  The tails are the half solitons
+-sqrt(2|w|) sech(sqrt|w| x), with a minus sign on edge 4 for (P-).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._io import dump_json, fmt_float
from .elliptic import jacobi_cn_sn_dn
from .spectrum import MINUS, GraphGeometry, StandingWave

__all__ = [
    "GraphProfile",
    "build_profile",
    "kirchhoff_residual",
    "boundary_residual",
    "ode_residual",
    "ode_residual_bound",
    "export_profile",
    "TAIL_TRUNCATION",
]

TAIL_TRUNCATION = 20.0
"""Tails are cut at TAIL_TRUNCATION / sqrt|w| for residual checks."""

_EXPORT_FLOOR = 1e-12


@dataclass(frozen=True)
class GraphProfile:
    geom: GraphGeometry
    wave: StandingWave
    tail_signs: tuple[float, float]

    @property
    def omega(self) -> float:
        return self.wave.omega

    @property
    def family(self) -> str:
        return self.wave.family

    @property
    def vertex_value(self) -> float:
        return math.sqrt(2.0 * abs(self.omega))

    def ring(self, x):
        """The periodic cnoidal function and its derivative at x (any real)."""
        w = self.wave
        p = w.wavenumber
        cn, sn, dn = jacobi_cn_sn_dn(p * (np.asarray(x, dtype=float) + w.shift), w.k_n.k, kc=w.k_n.kc)
        A = w.amplitude
        return A * cn, -A * p * sn * dn

    def tail(self, j: int, x):
        """Half soliton on edge j in {3, 4} and its derivative."""
        root = math.sqrt(abs(self.omega))
        s = self.tail_signs[j - 3] * self.vertex_value
        y = root * np.asarray(x, dtype=float)
        sech = 1.0 / np.cosh(y)
        return s * sech, -s * root * sech * np.tanh(y)

    def edge_length(self, j: int) -> float:
        if j == 1:
            return self.geom.L1
        if j == 2:
            return self.geom.L2
        return TAIL_TRUNCATION / math.sqrt(abs(self.omega))

    def edge_interval(self, j: int) -> tuple[float, float]:
        if j == 1:
            return 0.0, self.geom.L1
        if j == 2:
            return self.geom.L1, self.geom.L
        return 0.0, self.edge_length(j)

    def u(self, j: int, x):
        return self.evaluate(j, x)[0]

    def du(self, j: int, x):
        return self.evaluate(j, x)[1]

    def evaluate(self, j: int, x):
        if j in (1, 2):
            return self.ring(x)
        if j in (3, 4):
            return self.tail(j, x)
        raise ValueError(f"edge index must be 1..4, got {j}")


def build_profile(wave: StandingWave, geom: GraphGeometry) -> GraphProfile:
    if not wave.omega < 0.0:
        raise ValueError("profiles exist only for omega < 0")
    signs = (1.0, -1.0 if wave.family == MINUS else 1.0)
    return GraphProfile(geom, wave, signs)


def _scalar(v) -> float:
    return float(np.asarray(v))


def kirchhoff_residual(profile: GraphProfile) -> tuple[float, float]:
    """Worst continuity mismatch and worst signed derivative sum over both vertices."""
    g = profile.geom
    u1_0, d1_0 = map(_scalar, profile.evaluate(1, 0.0))
    u2_L, d2_L = map(_scalar, profile.evaluate(2, g.L))
    u1_a, d1_a = map(_scalar, profile.evaluate(1, g.L1))
    u2_a, d2_a = map(_scalar, profile.evaluate(2, g.L1))
    u3, d3 = map(_scalar, profile.evaluate(3, 0.0))
    u4, d4 = map(_scalar, profile.evaluate(4, 0.0))
    cont = max(abs(u1_0 - u2_L), abs(u1_0 - u3), abs(u1_a - u2_a), abs(u1_a - u4))
    deriv = max(abs(d1_0 - d2_L + d3), abs(-d1_a + d2_a + d4))
    return cont, deriv


def boundary_residual(profile: GraphProfile) -> float:
    """max |u(0) - sqrt(2|w|)|, |u(L1) -+ sqrt(2|w|)| for the wave's problem."""
    v = profile.vertex_value
    s = profile.tail_signs[1]
    u0 = _scalar(profile.u(1, 0.0))
    u1 = _scalar(profile.u(1, profile.geom.L1))
    return max(abs(u0 - v), abs(u1 - s * v))


def ode_residual(profile: GraphProfile, samples: int = 64, h: float | None = None) -> float:
    """max |-u'' - u^3 - w u| over all edges with u'' from centred differences."""
    if samples < 16:
        raise ValueError("ode_residual needs samples >= 16")
    w = profile.omega
    worst = 0.0
    for j in (1, 2, 3, 4):
        a, b = profile.edge_interval(j)
        step = h if h is not None else 1e-4 * (b - a)
        x = np.linspace(a, b, samples)
        um, u0, up = (profile.u(j, x + d) for d in (-step, 0.0, step))
        upp = (up - 2.0 * u0 + um) / (step * step)
        res = np.abs(-upp - u0**3 - w * u0)
        worst = max(worst, float(res.max()))
    return worst


def ode_residual_bound(profile: GraphProfile, samples: int = 64, h: float | None = None) -> float:
    """A priori size of the differencing error in :func:`ode_residual`.

    Truncation h^2 max|u4| / 12 plus rounding 4 eps max|u| / h^2, where the
    fourth derivative u4 = -6 u u'^2 - (3u^2 + w) u'' and u'' = -u^3 - w u
    come from the equation itself, so no differencing enters the bound.
    """
    w = profile.omega
    worst = 0.0
    for j in (1, 2, 3, 4):
        a, b = profile.edge_interval(j)
        step = h if h is not None else 1e-4 * (b - a)
        x = np.linspace(a, b, 8 * samples)
        u, du = profile.evaluate(j, x)
        upp = -(u**3) - w * u
        u4 = -6.0 * u * du**2 - (3.0 * u**2 + w) * upp
        trunc = step**2 * float(np.abs(u4).max()) / 12.0
        worst = max(worst, trunc + 4.0 * 2.2e-16 * float(np.abs(u).max()) / step**2)
    return worst


def _export_rows(profile: GraphProfile, grid_points: int):
    rows = []
    for j in (1, 2, 3, 4):
        if j in (1, 2):
            a, b = profile.edge_interval(j)
        else:
            # the tail reaches |u| = floor * sqrt(2|w|) at sqrt|w| x = acosh(1/floor)
            a, b = 0.0, math.acosh(1.0 / _EXPORT_FLOOR) / math.sqrt(abs(profile.omega))
        x = np.linspace(a, b, grid_points)
        u, du = profile.evaluate(j, x)
        rows.extend((j, float(xi), float(ui), float(di)) for xi, ui, di in zip(x, u, du))
    return rows


def export_profile(profile: GraphProfile, grid_points: int, fmt: str = "csv", extra: dict | None = None) -> str:
    """Serialize the sampled profile; tails stop where |u| < 1e-12 sqrt(2|w|)."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    rows = _export_rows(profile, grid_points)
    if fmt == "csv":
        lines = ["edge,x,u,du"]
        lines += [f"{j},{fmt_float(x)},{fmt_float(u)},{fmt_float(d)}" for j, x, u, d in rows]
        return "\n".join(lines) + "\n"
    if fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    g = profile.geom
    doc = {
        "geometry": {"alpha": g.alpha.name, "L1": g.L1, "L2": g.L2, "L": g.L},
        "omega": profile.omega,
        "family": profile.family,
        "n": profile.wave.n,
        "branch": profile.wave.branch,
        "k": profile.wave.k_n.k,
        "shift": profile.wave.shift,
    }
    if extra:
        doc.update(extra)
    doc["samples"] = [{"edge": j, "x": x, "u": u, "du": d} for j, x, u, d in rows]
    return dump_json(doc) + "\n"
