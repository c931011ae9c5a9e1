"""Hit-sequence scans |xi_tilde_n| < threshold, clustering and omega limits.

Scans run over contiguous blocks of n.  Each block is screened in
vectorised 96-bit fixed point (see :func:`alpha.centered_offsets`) with a
margin wider than the screening error, and every surviving candidate is
confirmed with the exact test, so the hit list is exact.  Blocks are
independent and merged in order, which keeps threaded runs byte-identical
to serial ones.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .alpha import (
    AlphaRatio,
    centered_offsets,
    dichotomy_seq,
    fixed_point_limbs,
    xi_tilde_below,
)
from .spectral_maps import K0
from .spectrum import GraphGeometry, cluster_interval_minus, cluster_interval_plus, omega_minus, omega_plus

__all__ = [
    "DiophantineHit",
    "Cluster",
    "ClusterReport",
    "OmegaLimitRow",
    "scan_hits",
    "scan_hurwitz",
    "cluster_hits",
    "omega_limit_report",
    "symmetry_defect",
    "fit_recurrence",
    "BLOCK",
]

BLOCK = 1 << 16
_N_LIMIT = 2**31
_INV_SQRT5 = 1.0 / math.sqrt(5.0)


@dataclass(frozen=True)
class DiophantineHit:
    n: int
    xi_tilde: float
    xi_tilde_q: Fraction = field(repr=False)
    error_radius: float = 0.0
    omega_plus: float | None = None
    omega_minus: float | None = None

    def with_omegas(self, geom: GraphGeometry) -> "DiophantineHit":
        wp, wm = omega_plus(geom, self.n), omega_minus(geom, self.n)
        return replace(
            self,
            omega_plus=None if wp is None else wp.omega,
            omega_minus=None if wm is None else wm.omega,
        )


def _blocks(n_max: int, block: int):
    return [(s, min(s + block, n_max + 1)) for s in range(1, n_max + 1, block)]


def _run_blocks(fn, n_max: int, threads: int | None, block: int):
    spans = _blocks(n_max, block)
    if threads is not None and threads <= 1:
        parts = [fn(a, b) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), spans))
    return [h for part in parts for h in part]


def _check_range(n_max: int):
    if not 1 <= n_max < _N_LIMIT:
        raise ValueError(f"n_max must lie in 1..2^31-1, got {n_max}")


def scan_hits(
    alpha: AlphaRatio,
    n_max: int,
    threshold=Fraction(1, 4),
    *,
    threads: int | None = 1,
    block: int = BLOCK,
) -> list[DiophantineHit]:
    """All n <= n_max with |xi_tilde_n| < threshold, ascending."""
    _check_range(n_max)
    thr = Fraction(threshold)
    if thr <= 0:
        raise ValueError("threshold must be positive")
    limbs = fixed_point_limbs(alpha)
    thr_f = float(thr)

    def work(a: int, b: int) -> list[DiophantineHit]:
        n = np.arange(a, b, dtype=np.uint64)
        d = centered_offsets(limbs, n)
        nf = n.astype(np.float64)
        margin = nf * (np.abs(d) * 2.0**-50 + 2.0**-60)
        cand = np.nonzero(nf * np.abs(d) < thr_f * (1.0 + 2.0**-50) + margin)[0]
        out = []
        for i in cand:
            k = int(n[i])
            if xi_tilde_below(alpha, k, thr):
                ds = dichotomy_seq(alpha, k)
                out.append(DiophantineHit(k, ds.xi_tilde, ds.xi_tilde_q, ds.error_radius))
        return out

    return _run_blocks(work, n_max, threads, block)


def scan_hurwitz(alpha: AlphaRatio, n_max: int, *, threads: int | None = 1, block: int = BLOCK) -> list[int]:
    """All n <= n_max with n xi_n < 2/sqrt5 (the side that controls w_n^-)."""
    _check_range(n_max)
    limbs = fixed_point_limbs(alpha)

    def work(a: int, b: int) -> list[int]:
        n = np.arange(a, b, dtype=np.uint64)
        d = centered_offsets(limbs, n)
        nf = n.astype(np.float64)
        # |r_n| = 1/2 - |d|
        r = 0.5 - np.abs(d)
        margin = nf * (2.0**-50 + 2.0**-60)
        cand = np.nonzero(nf * r < _INV_SQRT5 * (1.0 + 2.0**-50) + margin)[0]
        return [int(n[i]) for i in cand if alpha.hurwitz(int(n[i]))]

    return _run_blocks(work, n_max, threads, block)


@dataclass(frozen=True)
class Cluster:
    value: float
    members: tuple[int, ...]
    spread: float
    limit: float
    converged: bool


@dataclass(frozen=True)
class ClusterReport:
    clusters: tuple[Cluster, ...]
    outliers: tuple[int, ...]
    radius: float

    @property
    def converged(self) -> bool:
        return bool(self.clusters) and all(c.converged for c in self.clusters)


def cluster_hits(
    hits: list[DiophantineHit],
    radius: float = 1e-6,
    *,
    skip: int = 3,
    min_size: int = 2,
    converged_tol: float = 1e-9,
) -> ClusterReport:
    """Group the tail hits[skip:] by fixed-radius agglomeration on the xi_tilde axis.

    Sorted values join the open group while within ``radius`` of its first
    member, so every spread is at most ``radius``.  Groups smaller than
    ``min_size`` are reported as outliers.  Centers are member means; the
    ``limit`` is the value of the member with the largest n.
    """
    if not hits:
        raise ValueError("cluster_hits needs at least one hit")
    tail = sorted(hits[skip:], key=lambda h: (h.xi_tilde, h.n))
    groups: list[list[DiophantineHit]] = []
    for h in tail:
        if groups and h.xi_tilde - groups[-1][0].xi_tilde <= radius:
            groups[-1].append(h)
        else:
            groups.append([h])
    clusters, outliers = [], []
    for g in groups:
        if len(g) < min_size:
            outliers.extend(h.n for h in g)
            continue
        by_n = sorted(g, key=lambda h: h.n)
        vals = [h.xi_tilde for h in g]
        clusters.append(
            Cluster(
                value=math.fsum(vals) / len(vals),
                members=tuple(h.n for h in by_n),
                spread=max(vals) - min(vals),
                limit=by_n[-1].xi_tilde,
                converged=abs(by_n[-1].xi_tilde - by_n[-2].xi_tilde) < converged_tol,
            )
        )
    return ClusterReport(tuple(clusters), tuple(sorted(outliers)), radius)


def symmetry_defect(hits: list[DiophantineHit], n_min: int = 10**4) -> float:
    """max |v_i + v_{i+1}| over consecutive opposite-sign hits with n >= n_min."""
    tail = [h for h in hits if h.n >= n_min]
    pairs = [(a, b) for a, b in zip(tail, tail[1:]) if (a.xi_tilde > 0) != (b.xi_tilde > 0)]
    if not pairs:
        raise ValueError("no opposite-sign consecutive hits above n_min")
    return max(abs(a.xi_tilde + b.xi_tilde) for a, b in pairs)


@dataclass(frozen=True)
class OmegaLimitRow:
    n: int
    xi_tilde: float
    omega_plus: float
    prediction: float
    ratio: float
    in_I_plus: bool


def omega_limit_report(geom: GraphGeometry, hits: list[DiophantineHit]) -> list[OmegaLimitRow]:
    """Exact w_n^+ per hit beside the asymptotic law -(4 K(1/sqrt2)^2 |xi_tilde| / L)^2."""
    lo, hi = cluster_interval_plus(geom.L)
    rows = []
    for h in hits:
        w = omega_plus(geom, h.n)
        if w is None:
            continue
        pred = -((4.0 * K0 * K0 * abs(h.xi_tilde) / geom.L) ** 2)
        ratio = math.sqrt(w.omega / pred) if pred != 0.0 else math.inf
        rows.append(OmegaLimitRow(h.n, h.xi_tilde, w.omega, pred, ratio, lo <= w.omega <= hi))
    return rows


def in_interval_minus(geom: GraphGeometry, omega: float) -> bool:
    lo, hi = cluster_interval_minus(geom.L)
    return lo <= omega <= hi


def fit_recurrence(seq: list[int]) -> tuple[Fraction, Fraction, bool] | None:
    """Fit a_{i+1} = c1 a_i + c2 a_{i-1} on the first three terms; report whether the rest obey it."""
    if len(seq) < 4:
        return None
    a0, a1, a2, a3 = (Fraction(x) for x in seq[:4])
    det = a1 * a1 - a0 * a2
    if det == 0:
        return None
    c1 = (a2 * a1 - a3 * a0) / det
    c2 = (a3 * a1 - a2 * a2) / det
    holds = all(seq[i + 1] == c1 * seq[i] + c2 * seq[i - 1] for i in range(1, len(seq) - 1))
    return c1, c2, holds
