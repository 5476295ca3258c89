"""Piecewise-monotone interval map kernel.

Builds the three map families used throughout the package (tent, logistic,
and the tent-with-linear-inserts family ``u_mu``), evaluates them on scalars
or arrays, inverts single branches in closed form, and validates unimodality.

Every map constructed here has a single interior maximum at ``critical`` and
fixes the lower boundary: f(a) = f(b) = a.  Maps are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Interval",
    "Branch",
    "PiecewiseMap",
    "make_tent",
    "make_logistic",
    "make_tu",
    "merge_intervals",
    "subtract_intervals",
    "hausdorff",
    "TU_BASE_MU",
]

# Logistic parameter the u_mu family is carved out of.
TU_BASE_MU = 3.854

_DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo <= hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __iter__(self):
        yield self.lo
        yield self.hi


@dataclass(frozen=True)
class Branch:
    """One monotone lap of a piecewise map.

    shape is ("affine", slope, intercept) meaning slope*x + intercept, or
    ("quad", a) meaning a*x*(1-x).  direction is +1 (increasing) or -1.
    """

    domain: Interval
    shape: tuple
    direction: int

    def __call__(self, x):
        if self.shape[0] == "affine":
            _, m, b = self.shape
            return m * x + b
        _, a = self.shape
        return a * x * (1.0 - x)

    def slope_at(self, x):
        if self.shape[0] == "affine":
            return self.shape[1]
        return self.shape[1] * (1.0 - 2.0 * x)

    def invert(self, y):
        """All x in this branch's domain with branch(x) = y, as a list."""
        lo, hi = self.domain.lo, self.domain.hi
        out = []
        if self.shape[0] == "affine":
            _, m, b = self.shape
            if m != 0.0:
                x = (y - b) / m
                if lo - _DEDUP_TOL <= x <= hi + _DEDUP_TOL:
                    out.append(min(max(x, lo), hi))
        else:
            _, a = self.shape
            # a*x*(1-x) = y  ->  x^2 - x + y/a = 0
            disc = 1.0 - 4.0 * y / a
            if disc >= 0.0:
                r = math.sqrt(disc)
                for x in ((1.0 - r) / 2.0, (1.0 + r) / 2.0):
                    if lo - _DEDUP_TOL <= x <= hi + _DEDUP_TOL:
                        out.append(min(max(x, lo), hi))
        return out


class PiecewiseMap:
    """Continuous unimodal map assembled from monotone branches.

    Branches partition the domain, the direction flips exactly once (at
    ``critical``), and the boundary is fixed: f(a) = f(b) = a.  Instances
    evaluate on scalars and numpy arrays alike.
    """

    def __init__(self, branches, domain: Interval, critical: float, label: str):
        self.branches = tuple(branches)
        self.domain = domain
        self.critical = critical
        self.label = label
        # breakpoints for vectorized branch lookup: interior joints only
        self._cuts = np.array([b.domain.hi for b in self.branches[:-1]])
        self._validate()

    def _validate(self):
        prev_hi = self.domain.lo
        flips = 0
        for i, b in enumerate(self.branches):
            if abs(b.domain.lo - prev_hi) > 1e-9:
                raise ValueError(f"branch {i} does not start where branch {i-1} ends")
            prev_hi = b.domain.hi
            if i > 0:
                left = self.branches[i - 1](self.branches[i - 1].domain.hi)
                right = b(b.domain.lo)
                if abs(left - right) > 1e-9:
                    raise ValueError(f"continuity gap {abs(left-right):.3g} at joint {b.domain.lo}")
                if b.direction != self.branches[i - 1].direction:
                    flips += 1
        if abs(prev_hi - self.domain.hi) > 1e-9:
            raise ValueError("branches do not cover the domain")
        if flips != 1:
            raise ValueError(f"expected exactly one direction change, found {flips}")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self._eval_scalar(float(x))
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._cuts, x, side="right")
        out = np.empty_like(x)
        for i, b in enumerate(self.branches):
            m = idx == i
            if m.any():
                out[m] = b(x[m])
        return out

    def _eval_scalar(self, x: float) -> float:
        if not self.domain.contains(x, tol=1e-12):
            raise ValueError(f"x={x} outside domain [{self.domain.lo}, {self.domain.hi}]")
        i = int(np.searchsorted(self._cuts, x, side="right"))
        return float(self.branches[i](x))

    def iterate(self, x, n: int):
        """n-fold composition f^n(x)."""
        for _ in range(n):
            x = self(x)
        return x

    def branch_index(self, x: float) -> int:
        return int(np.searchsorted(self._cuts, x, side="right"))

    def slope_at(self, x: float) -> float:
        return float(self.branches[self.branch_index(x)].slope_at(x))

    @property
    def peak(self) -> float:
        return self._eval_scalar(self.critical)

    # -- inversion ----------------------------------------------------------

    def preimages(self, y: float):
        """Sorted list of all x with f(x) = y.  Empty when y is above the peak."""
        xs = []
        for b in self.branches:
            xs.extend(b.invert(y))
        xs.sort()
        out = []
        for x in xs:
            if not out or x - out[-1] > _DEDUP_TOL:
                out.append(x)
        return out

    def preimages_array(self, ys):
        """Vectorized preimages of a batch of values.

        Returns a single sorted, deduplicated array of every preimage of
        every value in ys.  Used by the backward-orbit machinery where the
        per-point tree structure does not matter, only the level sets.
        """
        ys = np.asarray(ys, dtype=float)
        chunks = []
        for b in self.branches:
            lo, hi = b.domain.lo, b.domain.hi
            if b.shape[0] == "affine":
                _, m, c = b.shape
                if m == 0.0:
                    continue
                x = (ys - c) / m
                x = x[(x >= lo - _DEDUP_TOL) & (x <= hi + _DEDUP_TOL)]
                chunks.append(np.clip(x, lo, hi))
            else:
                _, a = b.shape
                disc = 1.0 - 4.0 * ys / a
                ok = disc >= 0.0
                r = np.sqrt(disc[ok])
                for x in ((1.0 - r) / 2.0, (1.0 + r) / 2.0):
                    x = x[(x >= lo - _DEDUP_TOL) & (x <= hi + _DEDUP_TOL)]
                    chunks.append(np.clip(x, lo, hi))
        if not chunks:
            return np.empty(0)
        allx = np.sort(np.concatenate(chunks))
        if len(allx) > 1:
            keep = np.empty(len(allx), dtype=bool)
            keep[0] = True
            np.greater(np.diff(allx), _DEDUP_TOL, out=keep[1:])
            allx = allx[keep]
        return allx

    def interval_image(self, lo: float, hi: float):
        """Exact image of [lo, hi] as an (lo, hi) tuple.

        Walks the branches overlapping the interval; exact for piecewise
        monotone maps since extrema occur at endpoints or branch joints.
        """
        vals = [self._eval_scalar(lo), self._eval_scalar(hi)]
        for b in self.branches:
            if lo < b.domain.hi and b.domain.lo < hi:
                for e in (b.domain.lo, b.domain.hi):
                    if lo <= e <= hi:
                        vals.append(float(b(e)))
        return min(vals), max(vals)

    def interval_preimage(self, lo: float, hi: float):
        """All components of f^{-1}([lo, hi]) as a merged list of Intervals."""
        pieces = []
        for b in self.branches:
            blo, bhi = b.domain.lo, b.domain.hi
            vlo, vhi = b(blo), b(bhi)
            rlo, rhi = min(vlo, vhi), max(vlo, vhi)
            if rhi < lo or rlo > hi:
                continue
            ylo, yhi = max(lo, rlo), min(hi, rhi)
            a = b.invert(ylo)
            z = b.invert(yhi)
            ends = (a or [blo if vlo >= lo else bhi]) + (z or [])
            if not a or not z:
                # value hit a branch endpoint within float dust: the domain
                # endpoint itself bounds the component
                cand = [x for x in (blo, bhi) if lo - 1e-12 <= b(x) <= hi + 1e-12]
                ends = (a or []) + (z or []) + cand
            pieces.append(Interval(min(ends), max(ends)))
        # components meeting at a branch cut may differ by one ulp
        return merge_intervals(pieces, tol=1e-12)

    # -- structure helpers --------------------------------------------------

    def conjugate(self, p: float) -> float:
        """The point on the other side of c with the same image as p."""
        if abs(p - self.critical) <= _DEDUP_TOL:
            raise ValueError("conjugate undefined at the critical point")
        y = self._eval_scalar(p)
        best, bestd = None, math.inf
        for x in self.preimages(y):
            if (x - self.critical) * (p - self.critical) < 0:
                d = abs(x - self.critical)
                if d < bestd:
                    best, bestd = x, d
        if best is None:
            # p's image has a unique preimage (can happen only at the peak value)
            raise ValueError(f"no conjugate point for p={p}")
        return best

    def is_unimodal(self, probes: int = 10**4):
        """Check strict branch monotonicity and the fixed-boundary condition.

        Returns ("ok", None) or ("violation", x) with a witness point.
        """
        a = self.domain.lo
        if abs(self._eval_scalar(a) - a) > 1e-9:
            return ("violation", a)
        if abs(self._eval_scalar(self.domain.hi) - a) > 1e-9:
            return ("violation", self.domain.hi)
        per = max(2, probes // max(1, len(self.branches)))
        for b in self.branches:
            xs = np.linspace(b.domain.lo, b.domain.hi, per)
            vals = b(xs)
            d = np.diff(vals) * b.direction
            bad = np.flatnonzero(d <= 0)
            if len(bad):
                return ("violation", float(xs[bad[0]]))
        return ("ok", None)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        obj = {
            "family": self.label.split(":")[0],
            "parameter": self.label.split(":")[1] if ":" in self.label else None,
            "branches": [
                {
                    "lo": b.domain.lo,
                    "hi": b.domain.hi,
                    "shape": b.shape[0],
                    "coeffs": list(b.shape[1:]),
                    "direction": "increasing" if b.direction > 0 else "decreasing",
                }
                for b in self.branches
            ],
        }
        return json.dumps(obj)

    def __repr__(self):
        return f"PiecewiseMap({self.label}, {len(self.branches)} branches)"


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def make_tent(s: float) -> PiecewiseMap:
    """Tent map T_s(x) = s*min(x, 1-x) on [0, 1], peak s/2 at c = 1/2."""
    if not 0.0 < s <= 2.0:
        raise ValueError(f"tent slope s={s} outside (0, 2]")
    half = Interval(0.0, 0.5)
    up = Branch(half, ("affine", s, 0.0), +1)
    down = Branch(Interval(0.5, 1.0), ("affine", -s, s), -1)
    return PiecewiseMap([up, down], Interval(0.0, 1.0), 0.5, f"tent:{s!r}")


def make_logistic(mu: float) -> PiecewiseMap:
    """Logistic map mu*x*(1-x) on [0, 1], split at c = 1/2 into two laps."""
    if not 0.0 < mu <= 4.0:
        raise ValueError(f"logistic parameter mu={mu} outside (0, 4]")
    up = Branch(Interval(0.0, 0.5), ("quad", mu), +1)
    down = Branch(Interval(0.5, 1.0), ("quad", mu), -1)
    return PiecewiseMap([up, down], Interval(0.0, 1.0), 0.5, f"logistic:{mu!r}")


def _logistic_val(x: float, mu: float = TU_BASE_MU) -> float:
    return mu * x * (1.0 - x)


def _period3_cycle_of_base():
    """The regular (positive-multiplier) period-3 cycle of the base logistic map.

    The base parameter sits in a 3-band window, so there are two repelling
    period-3 cycles: one with multiplier < -1 inherited from the flip, and the
    band-bounding one with multiplier > +1.  The trapping construction needs
    the latter; we find all period-3 points by scanning sign changes of
    l^3(x) - x and keep the positive-multiplier orbit.
    """
    mu = TU_BASE_MU

    def f3(x):
        for _ in range(3):
            x = _logistic_val(x)
        return x

    xs = np.linspace(0.0, 1.0, 20001)
    vals = np.array([f3(x) - x for x in xs])
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        lo, hi = xs[i], xs[i + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (f3(lo) - lo) * (f3(mid) - mid) <= 0:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-14:
                break
        roots.append(0.5 * (lo + hi))
    # discard fixed points, group remaining roots into orbits
    roots = [r for r in roots if abs(_logistic_val(r) - r) > 1e-6]
    orbits = []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        orbit = [r]
        used[i] = True
        x = r
        for _ in range(2):
            x = _logistic_val(x)
            for j, rr in enumerate(roots):
                if not used[j] and abs(rr - x) < 1e-8:
                    used[j] = True
            orbit.append(x)
        orbits.append(orbit)
    for orbit in orbits:
        lam = 1.0
        for x in orbit:
            lam *= TU_BASE_MU * (1.0 - 2.0 * x)
        if lam > 1.0:
            return orbit, lam
    raise RuntimeError("no regular period-3 cycle found for the base map")


def _tu_skeleton():
    """Cycle points and linear-insert interval endpoints for the u family.

    p1 is the cycle point whose surrounding interval [q1, p1] contains c;
    among the two period-3 cycles it belongs to the regular one.  q3 and q2
    solve l(q3) = q1 and l(q2) = q3 on the laps adjacent to p3 and p2.
    """
    orbit, lam = _period3_cycle_of_base()
    p1 = min(orbit, key=lambda x: abs(x - 0.5))
    p2 = _logistic_val(p1)
    p3 = _logistic_val(p2)
    q1 = 1.0 - p1

    def solve_on(target, lo, hi):
        # bisection for l(x) = target on a monotone piece of the base map
        g = lambda x: _logistic_val(x) - target
        assert g(lo) * g(hi) <= 0, "bisection bracket does not straddle the root"
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(lo) * g(mid) <= 0:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15:
                break
        return 0.5 * (lo + hi)

    q3 = solve_on(q1, 0.0, p3)          # left lap, below p3
    q2 = solve_on(q3, p2, 1.0)          # right lap, beyond p2
    vals = {"p1": p1, "p2": p2, "p3": p3, "q1": q1, "q2": q2, "q3": q3, "lam": lam}
    return {k: float(v) for k, v in vals.items()}


_TU_CACHE = None


def tu_skeleton():
    global _TU_CACHE
    if _TU_CACHE is None:
        _TU_CACHE = _tu_skeleton()
    return _TU_CACHE


def make_tu(mu: float) -> PiecewiseMap:
    """The family u_mu = mu * F, with F tent-like in the middle and linear
    on the two outer cycle intervals.

    F agrees with the base logistic map outside J1 u J2 u J3, is the chord of
    the base map on J2 = [p2, q2] and J3 = [q3, p3], and is the symmetric tent
    on J1 = [q1, p1] with the same peak value.  At mu = 1 the period-3 cycle
    p1 -> p2 -> p3 survives with a positive multiplier.  The maximal mu keeps
    the peak at exactly 1.
    """
    mu_max = 4.0 / TU_BASE_MU
    if not 0.0 <= mu <= mu_max + 1e-12:
        raise ValueError(f"tu parameter mu={mu} outside [0, {mu_max}]")
    k = tu_skeleton()
    p1, p2, p3 = k["p1"], k["p2"], k["p3"]
    q1, q2, q3 = k["q1"], k["q2"], k["q3"]
    c = 0.5
    peak = _logistic_val(c)
    lv = _logistic_val

    def chord(x0, x1):
        m = (lv(x1) - lv(x0)) / (x1 - x0)
        return ("affine", mu * m, mu * (lv(x0) - m * x0))

    def quad():
        return ("quad", mu * TU_BASE_MU)

    cuts = [0.0, q3, p3, q1, c, p1, p2, q2, 1.0]
    shapes = [
        (quad(), +1),                       # [0, q3] rising lap of the base map
        (chord(q3, p3), +1),                # J3 linear insert
        (quad(), +1),                       # [p3, q1]
        (chord(q1, c), +1),                 # tent, rising half of J1
        (chord(c, p1), -1),                 # tent, falling half
        (quad(), -1),                       # [p1, p2]
        (chord(p2, q2), -1),                # J2 linear insert
        (quad(), -1),                       # [q2, 1]
    ]
    # the tent halves must interpolate (q1, l(q1)) -> (c, peak) -> (p1, l(p1));
    # chord() already does that because l(q1) = l(p1) by conjugacy.
    branches = [
        Branch(Interval(cuts[i], cuts[i + 1]), sh, d)
        for i, (sh, d) in enumerate(shapes)
    ]
    m = PiecewiseMap(branches, Interval(0.0, 1.0), c, f"tu:{mu!r}|p1={p1:.12f}")
    return m


# ---------------------------------------------------------------------------
# interval set helpers
# ---------------------------------------------------------------------------

def merge_intervals(intervals, tol: float = 0.0):
    """Union of closed intervals as a sorted list of disjoint Intervals.

    Intervals closer than tol are fused.
    """
    ivs = sorted(intervals, key=lambda iv: iv.lo)
    out = []
    for iv in ivs:
        if out and iv.lo <= out[-1].hi + tol:
            if iv.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return out


def subtract_intervals(base, holes):
    """Set difference (union of base) minus (union of open interiors of holes).

    Both arguments are lists of Interval; the result is closed intervals.
    Degenerate slivers below 1e-15 are dropped.
    """
    cur = merge_intervals(base)
    for h in merge_intervals(holes):
        nxt = []
        for iv in cur:
            if h.hi <= iv.lo or h.lo >= iv.hi:
                nxt.append(iv)
                continue
            if h.lo > iv.lo:
                nxt.append(Interval(iv.lo, min(h.lo, iv.hi)))
            if h.hi < iv.hi:
                nxt.append(Interval(max(h.hi, iv.lo), iv.hi))
        cur = nxt
    return [iv for iv in cur if iv.length > 1e-15 or iv.length == 0.0]


def _dist_point_to_union(x, ivs):
    best = math.inf
    for iv in ivs:
        if iv.lo <= x <= iv.hi:
            return 0.0
        best = min(best, abs(x - iv.lo), abs(x - iv.hi))
    return best


def _directed_hausdorff(a_ivs, b_ivs):
    cands = []
    for iv in a_ivs:
        cands.append(iv.lo)
        cands.append(iv.hi)
    # farthest interior points sit at midpoints of gaps of b covered by a
    for g0, g1 in zip(b_ivs[:-1], b_ivs[1:]):
        mid = 0.5 * (g0.hi + g1.lo)
        for iv in a_ivs:
            if iv.lo <= mid <= iv.hi:
                cands.append(mid)
                break
    return max(_dist_point_to_union(x, b_ivs) for x in cands)


def hausdorff(a, b) -> float:
    """Hausdorff distance between two nonempty unions of closed intervals.

    Points may be passed as degenerate intervals.  Exact: the supremum is
    attained at an endpoint or at a gap midpoint, both finite candidate sets.
    """
    a = merge_intervals(a)
    b = merge_intervals(b)
    if not a or not b:
        raise ValueError("hausdorff distance of an empty set is undefined")
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
