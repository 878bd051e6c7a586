"""Berezin ranges over the unit disc: sampling, radius search, shape diagnostics.

Everything here works from :func:`berezin.rkhs.berezin_transform` evaluated on
numpy arrays of points.  Searches are deterministic: a fixed polar grid,
followed by compass (pattern) search with step halving, run for all starting
points at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .matrices import convex_hull
from .rkhs import BerezinValue, FiniteRankOperator, berezin_transform, check_disc

__all__ = [
    "DiscGrid", "DEFAULT_GRID", "RangeSample", "NonconvexityWitness", "SEARCH_RMAX",
    "sample_range", "estimate_berezin_radius", "locate_berezin_radius",
    "closed_form_radius", "FAMILIES", "match_closed_form", "symmetry_defect",
    "find_nonconvexity_witness", "real_interval_summary", "real_part_value",
    "pattern_search",
]

# Local searches may go this close to the unit circle.
SEARCH_RMAX = 1.0 - 1e-6


@dataclass(frozen=True)
class DiscGrid:
    """Polar grid ``r_j e^{i theta_k}`` with ``r_j = j r_max/(n_radial-1)``."""

    n_radial: int = 200
    n_angular: int = 256
    r_max: float = 0.999

    def __post_init__(self):
        if self.n_radial < 2:
            raise ValueError("n_radial must be >= 2")
        if self.n_angular < 1:
            raise ValueError("n_angular must be >= 1")
        if not 0.0 < self.r_max < 1.0:
            raise ValueError("r_max must lie in (0, 1)")

    def points(self) -> np.ndarray:
        """Grid points, radius-major (all angles of ring 0, then ring 1, ...)."""
        r = np.arange(self.n_radial) * (self.r_max / (self.n_radial - 1))
        theta = 2 * np.pi * np.arange(self.n_angular) / self.n_angular
        pts = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        # |r e^{i theta}| can round one ulp past r_max; pull those back inside
        over = np.abs(pts) > self.r_max
        while np.any(over):
            pts[over] *= 1.0 - np.finfo(float).eps
            over = np.abs(pts) > self.r_max
        return pts

    def __len__(self):
        return self.n_radial * self.n_angular


DEFAULT_GRID = DiscGrid()


@dataclass(frozen=True)
class RangeSample:
    lambdas: np.ndarray
    values: np.ndarray

    @property
    def points(self) -> list[tuple[complex, complex]]:
        return list(zip(self.lambdas.tolist(), self.values.tolist()))

    def records(self):
        """Rows ``(lambda_re, lambda_im, value_re, value_im)``."""
        return np.column_stack([self.lambdas.real, self.lambdas.imag,
                                self.values.real, self.values.imag])

    def __len__(self):
        return len(self.lambdas)


@dataclass(frozen=True)
class NonconvexityWitness:
    """Two attained values whose midpoint stays ``gap`` away from everything found."""

    w1: BerezinValue
    w2: BerezinValue
    midpoint: complex
    gap: float
    nearest: BerezinValue

    def to_dict(self) -> dict:
        def bv(x):
            return {"lambda": [x.lam.real, x.lam.imag], "value": [x.value.real, x.value.imag]}
        return {"w1": bv(self.w1), "w2": bv(self.w2),
                "midpoint": [self.midpoint.real, self.midpoint.imag],
                "gap": self.gap, "nearest": bv(self.nearest)}


def _require_disc_op(op: FiniteRankOperator):
    op.space.require_disc("Berezin range sampling")


def sample_range(op: FiniteRankOperator, grid: DiscGrid = DEFAULT_GRID) -> RangeSample:
    _require_disc_op(op)
    lam = grid.points()
    return RangeSample(lam, np.asarray(berezin_transform(op, lam)))


def _project(z: np.ndarray, rmax: float) -> np.ndarray:
    r = np.abs(z)
    return np.where(r > rmax, z * (rmax / np.where(r > 0, r, 1.0)), z)


_DIRS = np.array([1.0, -1.0, 1j, -1j])


def pattern_search(fn, starts, step0: float = 0.05, tol: float = 1e-10,
                   max_iter: int = 400, rmax: float = SEARCH_RMAX):
    """Minimize ``fn`` over the closed disc ``|z| <= rmax`` by compass search.

    ``fn`` maps a complex array to a real array of the same shape.  All
    starting points are advanced together; each keeps its own step, which is
    halved whenever none of the four compass moves improves.  Returns the
    final points and values.
    """
    z = _project(np.asarray(starts, dtype=complex).ravel(), rmax)
    f = np.asarray(fn(z), dtype=float)
    step = np.full(z.shape, float(step0))
    for _ in range(max_iter):
        live = step >= tol
        if not np.any(live):
            break
        cand = _project(z[:, None] + step[:, None] * _DIRS[None, :], rmax)
        fc = np.asarray(fn(cand), dtype=float)
        k = np.argmin(fc, axis=1)
        best = fc[np.arange(len(z)), k]
        better = live & (best < f)
        z = np.where(better, cand[np.arange(len(z)), k], z)
        f = np.where(better, best, f)
        step = np.where(live & ~better, step * 0.5, step)
    return z, f


def locate_berezin_radius(op: FiniteRankOperator, grid: DiscGrid = DEFAULT_GRID,
                          refine_iters: int = 400, tol: float = 1e-10, n_starts: int = 5):
    """Return ``(ber, argmax)``: grid maximum of ``|A~|`` refined from the top grid points."""
    sample = sample_range(op, grid)
    mod = np.abs(sample.values)
    if not np.any(mod > 0):
        return 0.0, 0j
    top = np.argsort(-mod, kind="stable")[:n_starts]
    z, f = pattern_search(lambda x: -np.abs(berezin_transform(op, x)),
                          sample.lambdas[top], tol=tol, max_iter=refine_iters)
    k = int(np.argmin(f))
    best = -float(f[k])
    if best < mod[top[0]]:
        return float(mod[top[0]]), complex(sample.lambdas[top[0]])
    return best, complex(z[k])


def estimate_berezin_radius(op: FiniteRankOperator, grid: DiscGrid = DEFAULT_GRID,
                            refine_iters: int = 400, tol: float = 1e-10) -> float:
    """Numerical ``ber(A) = sup |A~(lam)|`` over the disc."""
    return locate_berezin_radius(op, grid, refine_iters, tol)[0]


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _hardy_monomial(n):
    return (1.0 / (n + 1)) * (n / (n + 1)) ** n


def _hardy_equal_moduli(n, modulus):
    return modulus ** 2 * (1.0 / (n + 1)) ** (1.0 / n) * (n / (n + 1))


def _hardy_compact_diagonal(modulus):
    return modulus ** 2


def _hardy_disc(m, n):
    k = m + n
    return (2.0 / (k + 2)) * (k / (k + 2)) ** (k / 2)


def _bergman_monomial(n):
    return 4.0 * n ** n / (n + 2) ** (n + 2)


def _bergman_disc(m, n):
    # Maximizer r^2 = (m+n)/(m+n+4) of r^(m+n) (1-r^2)^2.
    k = m + n
    return (4.0 / (k + 4)) ** 2 * (k / (k + 4)) ** (k / 2)


FAMILIES = {
    "hardy_monomial": _hardy_monomial,
    "hardy_equal_moduli": _hardy_equal_moduli,
    "hardy_compact_diagonal": _hardy_compact_diagonal,
    "hardy_disc": _hardy_disc,
    "bergman_monomial": _bergman_monomial,
    "bergman_disc": _bergman_disc,
}


def _check_int(name, v, lo):
    if isinstance(v, bool) or int(v) != v or v < lo:
        raise DomainError(f"{name} must be an integer >= {lo}, got {v!r}")
    return int(v)


def closed_form_radius(family: str, n: int | None = None, m: int | None = None,
                       modulus: float | None = None) -> float:
    """Berezin radius of one of the closed-form operator families.

    ``hardy_monomial(n)``, ``bergman_monomial(n)``: g = h = z^n.
    ``hardy_equal_moduli(n, modulus)``: g_i = h_i = a_i z^i, i = 1..n, |a_i| = modulus.
    ``hardy_compact_diagonal(modulus)``: the infinite diagonal sum (supremum, not attained).
    ``hardy_disc(m, n)``, ``bergman_disc(m, n)``: g = z^n, h = z^m with m > n.
    The disc families accept n = 0 (constant g).
    """
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    if family in ("hardy_monomial", "bergman_monomial"):
        return FAMILIES[family](_check_int("n", n, 1))
    if family == "hardy_equal_moduli":
        n = _check_int("n", n, 1)
        if modulus is None or modulus < 0:
            raise DomainError("modulus must be >= 0")
        return FAMILIES[family](n, float(modulus))
    if family == "hardy_compact_diagonal":
        if modulus is None or not 0 <= modulus < 1:
            raise DomainError("modulus must lie in [0, 1)")
        return FAMILIES[family](float(modulus))
    m = _check_int("m", m, 1)
    n = _check_int("n", n, 0)
    if m <= n:
        raise DomainError("disc families need m > n")
    return FAMILIES[family](m, n)


def _monomial_of(p):
    """(degree, coefficient) if ``p`` is a nonzero monomial, else None."""
    nz = np.flatnonzero(p.coeffs)
    if nz.size != 1:
        return None
    return int(nz[0]), complex(p.coeffs[nz[0]])


def match_closed_form(op: FiniteRankOperator):
    """Recognize closed-form families (up to a constant factor).

    Returns ``(tag, radius)`` or None.  Scaled symbols ``g = a z^n``,
    ``h = b z^m`` scale the radius by ``|a b|``.
    """
    kind = op.space.kind
    if kind not in ("hardy", "bergman"):
        return None
    if len(op.terms) == 1:
        g, h = (_monomial_of(p) for p in op.terms[0])
        if g is None or h is None:
            return None
        (n, a), (m, b) = g, h
        scale = abs(a * b)
        if m == n:
            if n < 1:
                return None
            return f"{kind}_monomial({n})", scale * FAMILIES[f"{kind}_monomial"](n)
        hi, lo = max(m, n), min(m, n)
        return f"{kind}_disc({hi},{lo})", scale * FAMILIES[f"{kind}_disc"](hi, lo)
    if kind != "hardy":
        return None
    degrees, mods = [], []
    for g, h in op.terms:
        gm, hm = _monomial_of(g), _monomial_of(h)
        if gm is None or hm is None or gm[0] != hm[0] or gm[1] != hm[1]:
            return None
        degrees.append(gm[0])
        mods.append(abs(gm[1]))
    n = len(op.terms)
    if sorted(degrees) != list(range(1, n + 1)):
        return None
    if not np.allclose(mods, mods[0], rtol=1e-14, atol=0.0):
        return None
    return f"hardy_equal_moduli({n},{mods[0]!r})", _hardy_equal_moduli(n, mods[0])


# ---------------------------------------------------------------------------
# Shape diagnostics
# ---------------------------------------------------------------------------

def symmetry_defect(op: FiniteRankOperator, grid: DiscGrid = DEFAULT_GRID) -> float:
    """``max |A~(conj lam) - conj(A~(lam))|`` over the grid."""
    _require_disc_op(op)
    lam = grid.points()
    d = berezin_transform(op, np.conj(lam)) - np.conj(berezin_transform(op, lam))
    return float(np.max(np.abs(d)))


def real_interval_summary(sample: RangeSample, imag_tol: float = 1e-12):
    """``(min Re, max Re)`` if every sampled value is real within ``imag_tol``, else None."""
    v = np.asarray(sample.values)
    if v.size == 0 or np.max(np.abs(v.imag)) > imag_tol:
        return None
    return float(v.real.min()), float(v.real.max())


def real_part_value(op: FiniteRankOperator, lam: complex) -> float:
    check_disc(lam)
    return float(np.real(berezin_transform(op, lam)))


def _candidate_pairs(values: np.ndarray, n_random: int, rng) -> np.ndarray:
    """Index pairs: all pairs of sample-hull vertices plus seeded random pairs."""
    hull = _hull_vertex_indices(values)
    if len(hull) > 400:
        hull = hull[np.linspace(0, len(hull) - 1, 400).astype(int)]
    i, j = np.triu_indices(len(hull), k=1)
    pairs = [np.column_stack([hull[i], hull[j]])]
    if n_random:
        pairs.append(rng.integers(0, len(values), size=(n_random, 2)))
    return np.concatenate(pairs)


def _hull_vertex_indices(values: np.ndarray) -> np.ndarray:
    hull = convex_hull(values)
    tree = cKDTree(np.column_stack([values.real, values.imag]))
    _, idx = tree.query(np.column_stack([hull.vertices.real, hull.vertices.imag]))
    return np.asarray(idx, dtype=int)


def find_nonconvexity_witness(op: FiniteRankOperator, grid: DiscGrid = DEFAULT_GRID,
                              attain_tol: float = 1e-3, pair_budget: int = 2000,
                              seed: int = 0, refine_iters: int = 400):
    """Search for a midpoint of two attained values that the range misses.

    Candidate pairs (all pairs of extreme sample points plus seeded random
    pairs) are ranked by how far their midpoint lies from the sampled cloud;
    the ``pair_budget`` farthest are kept.  For each, ``|A~(lam) - w|`` is
    minimized from the 5 nearest preimage samples.  Returns the candidate with
    the largest remaining gap if it exceeds ``attain_tol``, else None.

    A returned witness certifies nonconvexity numerically; None proves nothing.
    """
    _require_disc_op(op)
    sample = sample_range(op, grid)
    vals = sample.values
    if np.ptp(vals.real) == 0 and np.ptp(vals.imag) == 0:
        return None
    rng = np.random.default_rng(seed)
    pairs = _candidate_pairs(vals, 20 * pair_budget, rng)
    mids = 0.5 * (vals[pairs[:, 0]] + vals[pairs[:, 1]])
    tree = cKDTree(np.column_stack([vals.real, vals.imag]))
    cloud, _ = tree.query(np.column_stack([mids.real, mids.imag]))
    # A midpoint within attain_tol of a sample is attained at that tolerance.
    keep = np.flatnonzero(cloud > attain_tol)
    if keep.size == 0:
        return None
    keep = keep[np.argsort(-cloud[keep], kind="stable")][:pair_budget]
    pairs, mids = pairs[keep], mids[keep]

    k = min(5, len(vals))
    _, near = tree.query(np.column_stack([mids.real, mids.imag]), k=k)
    near = np.asarray(near).reshape(len(mids), k)
    target = np.repeat(mids, k)

    def dist(z):
        t = target.reshape((-1,) + (1,) * (z.ndim - 1))
        return np.abs(berezin_transform(op, z) - t)

    z, f = pattern_search(dist, sample.lambdas[near.ravel()], tol=1e-9, max_iter=refine_iters)
    f = f.reshape(len(mids), k)
    z = z.reshape(len(mids), k)
    gaps = f.min(axis=1)
    best = int(np.argmax(gaps))
    if gaps[best] <= attain_tol:
        return None
    i1, i2 = pairs[best]
    zn = complex(z[best, int(np.argmin(f[best]))])
    return NonconvexityWitness(
        w1=BerezinValue(complex(sample.lambdas[i1]), complex(vals[i1])),
        w2=BerezinValue(complex(sample.lambdas[i2]), complex(vals[i2])),
        midpoint=complex(mids[best]),
        gap=float(gaps[best]),
        nearest=BerezinValue(zn, complex(berezin_transform(op, zn))),
    )
