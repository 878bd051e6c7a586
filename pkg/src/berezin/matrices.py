"""Dense complex matrix kernel.

Matrices are plain ``numpy`` complex arrays.  Every spectral routine accepts
either one ``(n, n)`` matrix or a stack ``(..., n, n)`` and works on the whole
stack at once; the trial suites in :mod:`berezin.inequalities` rely on that.

The eigensolver is a cyclic complex Jacobi method with a fixed row-major
rotation order, so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NotHermitianError, NotPositiveError

__all__ = [
    "hermitian_eig", "is_hermitian", "is_psd", "psd_power", "polar_decompose",
    "geometric_mean", "FiniteBerezinSummary", "berezin_quantities_finite",
    "HullPolygon", "convex_hull", "hausdorff_distance", "EllipseParams",
    "numerical_range_boundary", "elliptic_range_2x2", "hull_vs_numrange_gap",
    "conj_t", "berezin_norm_b1",
]

HERMITIAN_TOL = 1e-13
PSD_TOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 30


def conj_t(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + conj_t(a))


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix (or stack), got shape {a.shape}")
    return a


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = _as_square(h)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    return bool(np.max(np.abs(h - conj_t(h)), initial=0.0) <= tol * scale)


def hermitian_eig(h, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix (or stack) by cyclic Jacobi.

    Returns ``(w, V)`` with ``w`` ascending and ``H = V diag(w) V^*``.  Sweeps
    stop once the off-diagonal Frobenius mass of every matrix in the stack is
    below ``tol * ||H||_F``.
    """
    h = _as_square(h)
    if not is_hermitian(h):
        raise NotHermitianError("matrix is not Hermitian")
    single = h.ndim == 2
    a = _hermitize(h).reshape((-1,) + h.shape[-2:]).copy()
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    offmask = ~np.eye(n, dtype=bool)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= tol * fro):
            break
        if _sweep == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p, q in pairs:
            apq = a[:, p, q]
            mag = np.abs(apq)
            # entries this small cannot affect the stopping test; rotating on
            # them risks overflow in the phase and angle computations
            active = mag > 1e-30 * fro
            if not np.any(active):
                continue
            safe = np.where(active, mag, 1.0)
            phase = np.where(active, apq.real / safe + 1j * (apq.imag / safe), 1.0)
            app = a[:, p, p].real
            aqq = a[:, q, q].real
            theta = (aqq - app) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            th = np.where(big, 1.0, theta)
            t = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            se = (s * phase)[:, None]
            sec = (s * np.conj(phase))[:, None]
            cc = c[:, None]
            # A <- A G, then A <- G^* A, with G = [[c, s e], [-s conj(e), c]] on (p, q)
            colp = a[:, :, p].copy()
            colq = a[:, :, q]
            a[:, :, p] = cc * colp - sec * colq
            a[:, :, q] = se * colp + cc * colq
            rowp = a[:, p, :].copy()
            rowq = a[:, q, :]
            a[:, p, :] = cc * rowp - se * rowq
            a[:, q, :] = sec * rowp + cc * rowq
            a[:, p, q] = 0.0
            a[:, q, p] = 0.0
            vp = v[:, :, p].copy()
            vq = v[:, :, q]
            v[:, :, p] = cc * vp - sec * vq
            v[:, :, q] = se * vp + cc * vq

    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    if single:
        return w[0], v[0]
    return w.reshape(h.shape[:-1]), v.reshape(h.shape)


def _compose(v, w):
    """``V diag(w) V^*`` for stacks."""
    return _hermitize((v * w[..., None, :]) @ conj_t(v))


def is_psd(a, tol: float = PSD_TOL) -> bool:
    a = _as_square(a)
    if not is_hermitian(a):
        return False
    w, _ = hermitian_eig(a)
    return bool(np.min(w) >= -tol)


def _psd_eig(a):
    a = _as_square(a)
    w, v = hermitian_eig(a)
    if np.min(w) < -PSD_TOL:
        raise NotPositiveError(f"matrix is not positive semidefinite (min eigenvalue {np.min(w):.3e})")
    return np.maximum(w, 0.0), v


def _powers(w, t):
    if t == 0:
        # Range projection: the t -> 0+ limit of A^t on the support of A.
        scale = np.max(w, axis=-1, keepdims=True)
        return (w > PSD_TOL * np.maximum(scale, 1.0)).astype(float)
    return w ** t


def psd_power(a, t: float):
    """Fractional power ``A^t`` of a PSD matrix; ``t = 0`` gives the range projection."""
    if t < 0:
        raise ValueError("t must be >= 0")
    w, v = _psd_eig(a)
    return _compose(v, _powers(w, t))


def polar_decompose(t_mat):
    """Polar decomposition ``T = U P`` with ``P = (T^* T)^(1/2)``.

    For invertible T, U is unitary.  Otherwise U is the partial isometry that
    vanishes on ker P.
    """
    t_mat = _as_square(t_mat)
    w, v = hermitian_eig(_hermitize(conj_t(t_mat) @ t_mat))
    w = np.maximum(w, 0.0)
    sig = np.sqrt(w)
    p = _compose(v, sig)
    smax = np.max(sig, axis=-1, keepdims=True)
    keep = sig > 1e-13 * np.maximum(smax, 1e-300)
    inv = np.where(keep, 1.0 / np.where(keep, sig, 1.0), 0.0)
    u = (t_mat @ (v * inv[..., None, :])) @ conj_t(v)
    return u, p


def _strictly_positive_eig(a, name):
    a = _as_square(a)
    w, v = hermitian_eig(a)
    if np.min(w) <= PSD_TOL:
        raise NotPositiveError(f"{name} is not strictly positive (min eigenvalue {np.min(w):.3e})")
    return w, v


def geometric_mean(a, b, t: float = 0.5):
    """Weighted geometric mean ``A #_t B = A^(1/2) (A^(-1/2) B A^(-1/2))^t A^(1/2)``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    wa, va = _strictly_positive_eig(a, "A")
    _strictly_positive_eig(b, "B")
    b = _as_square(b)
    a_half = _compose(va, np.sqrt(wa))
    a_mhalf = _compose(va, 1.0 / np.sqrt(wa))
    inner = _hermitize(a_mhalf @ b @ a_mhalf)
    wc, vc = hermitian_eig(inner)
    wc = np.maximum(wc, 0.0)
    return _hermitize(a_half @ _compose(vc, wc ** t) @ a_half)


@dataclass(frozen=True)
class FiniteBerezinSummary:
    ber: float
    norm_b1: float
    norm_b2: float
    ber_set: np.ndarray


def berezin_norm_b1(t_mat) -> float:
    """``sup_i ||T e_i||``: the largest column norm."""
    t_mat = _as_square(t_mat)
    return np.max(np.sqrt(np.sum(np.abs(t_mat) ** 2, axis=-2)), axis=-1)


def berezin_quantities_finite(t_mat) -> FiniteBerezinSummary:
    """Berezin radius, both Berezin norms and the Berezin set over C^n.

    With the standard basis as kernels, ``<T e_j, e_i> = T[i, j]``.
    """
    t_mat = _as_square(t_mat)
    if t_mat.ndim != 2:
        raise ValueError("expected a single matrix")
    diag = np.diagonal(t_mat).copy()
    return FiniteBerezinSummary(
        ber=float(np.max(np.abs(diag))),
        norm_b1=float(berezin_norm_b1(t_mat)),
        norm_b2=float(np.max(np.abs(t_mat))),
        ber_set=diag,
    )


# ---------------------------------------------------------------------------
# Planar geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HullPolygon:
    """Convex polygon, vertices counterclockwise (1 vertex = point, 2 = segment)."""

    vertices: np.ndarray

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        v = self.vertices
        if len(v) == 1:
            return v, v
        if len(v) == 2:
            return v[:1], v[1:]
        return v, np.roll(v, -1)

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        v = self.vertices
        if len(v) <= 2:
            return self.distance(z) <= tol
        a, b = self.edges()
        e = b - a
        rel = z[..., None] - a
        cross = e.real * rel.imag - e.imag * rel.real
        # Normalise by edge length so the tolerance is a distance.
        return np.all(cross / np.abs(e) >= -tol, axis=-1)

    def distance(self, z) -> np.ndarray:
        """Distance from each point to the polygon boundary."""
        z = np.asarray(z, dtype=complex)
        a, b = self.edges()
        flat = z.ravel()
        out = np.empty(flat.shape)
        # chunk so the points x edges table stays around 4M entries
        step = max(1, 4_000_000 // max(len(a), 1))
        for i in range(0, flat.size, step):
            out[i:i + step] = np.min(_segment_distance(flat[i:i + step, None], a, b), axis=-1)
        return out.reshape(z.shape)

    def perimeter(self) -> float:
        a, b = self.edges()
        return float(np.sum(np.abs(b - a)))

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.vertices)))

    def boundary_samples(self, n: int = 1024) -> np.ndarray:
        """Vertices plus ``n`` points spaced evenly by arc length along the boundary."""
        a, b = self.edges()
        lengths = np.abs(b - a)
        total = lengths.sum()
        if total == 0.0:
            return self.vertices.copy()
        s = np.arange(n) * (total / n)
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1)
        frac = np.where(lengths[k] > 0, (s - cum[k]) / np.where(lengths[k] > 0, lengths[k], 1.0), 0.0)
        pts = a[k] + frac * (b[k] - a[k])
        return np.concatenate([self.vertices, pts])


def _segment_distance(z, a, b):
    d = b - a
    dd = np.abs(d) ** 2
    t = np.where(dd > 0, np.real((z - a) * np.conj(d)) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z - (a + t * d))


def _hull_indices(xy: np.ndarray, tol: float = 1e-12) -> list[int]:
    """Andrew monotone chain; returns indices of CCW hull vertices."""
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    n = len(order)
    if n == 0:
        return []
    ext = float(np.max(np.abs(xy))) if n else 0.0
    eps = tol * max(1.0, ext * ext)
    x = xy[:, 0].tolist()
    y = xy[:, 1].tolist()

    def cross(o, p, q):
        return (x[p] - x[o]) * (y[q] - y[o]) - (y[p] - y[o]) * (x[q] - x[o])

    lower: list[int] = []
    for i in order.tolist():
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= eps:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in order[::-1].tolist():
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= eps:
            upper.pop()
        upper.append(i)
    hull = lower[:-1] + upper[:-1]
    if not hull:
        hull = lower[:1]
    # Collapse a degenerate hull whose two vertices coincide within tolerance.
    if len(hull) == 2 and abs(x[hull[0]] - x[hull[1]]) + abs(y[hull[0]] - y[hull[1]]) <= tol * max(1.0, ext):
        hull = hull[:1]
    return hull


def convex_hull(points, tol: float = 1e-12) -> HullPolygon:
    """Convex hull of complex points (Andrew monotone chain, collinear points dropped)."""
    z = np.asarray(points, dtype=complex).ravel()
    if z.size == 0:
        raise ValueError("convex hull of an empty point set")
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite point")
    idx = _hull_indices(np.column_stack([z.real, z.imag]), tol)
    return HullPolygon(z[idx])


def hausdorff_distance(p: HullPolygon, q: HullPolygon, samples: int = 1024) -> float:
    """Symmetric Hausdorff distance between two polygon boundaries.

    Each boundary is sampled (vertices + ``samples`` points); distances are
    measured exactly to the other polygon's edges.
    """
    d1 = q.distance(p.boundary_samples(samples)).max()
    d2 = p.distance(q.boundary_samples(samples)).max()
    return float(max(d1, d2))


# ---------------------------------------------------------------------------
# Numerical range
# ---------------------------------------------------------------------------

def _support_points(a: np.ndarray, thetas: np.ndarray):
    """Top eigenpair of ``Re(e^{i theta} A)`` for each angle.

    Returns the boundary points ``<A x, x>`` and support values ``lambda_max``.
    """
    rot = np.exp(1j * thetas)[:, None, None]
    h = 0.5 * (rot * a + np.conj(rot) * conj_t(a))
    w, v = hermitian_eig(h)
    # argmax returns the first maximal index, i.e. the first eigenvector in index order.
    top = np.argmax(w, axis=1)
    x = v[np.arange(len(thetas)), :, top]
    pts = np.einsum("ki,ij,kj->k", np.conj(x), a, x)
    return pts, w[np.arange(len(thetas)), top]


def _corner_gaps(thetas, pts, hs):
    """Distance between the outer corner of consecutive support lines and the inner chord."""
    t1, t2 = thetas, np.roll(thetas, -1)
    h1, h2 = hs, np.roll(hs, -1)
    p1, p2 = pts, np.roll(pts, -1)
    # Support line: x cos t - y sin t = h.
    det = -np.cos(t1) * np.sin(t2) + np.sin(t1) * np.cos(t2)
    ok = np.abs(det) > 1e-14
    sd = np.where(ok, det, 1.0)
    x = (-h1 * np.sin(t2) + np.sin(t1) * h2) / sd
    y = (np.cos(t1) * h2 - np.cos(t2) * h1) / sd
    corner = x + 1j * y
    gap = _segment_distance(corner, p1, p2)
    same = np.abs(p1 - p2) <= 1e-14 * max(1.0, float(np.max(np.abs(pts))))
    return np.where(ok & ~same, gap, 0.0)


def numerical_range_boundary(a, K: int = 256, refine_tol: float | None = 1e-10,
                             max_points: int | None = None) -> HullPolygon:
    """Inner polygonal approximation of the numerical range W(A).

    Supporting-line method: for ``theta_j = 2 pi j / K`` the top eigenvector of
    ``(e^{i theta} A + e^{-i theta} A^*)/2`` gives the boundary point
    ``<A x, x>``.  When ``refine_tol`` is set, intervals whose outer corner
    lies farther than ``refine_tol`` from the inner chord are bisected until
    the bound holds or ``max_points`` (default ``2 K``) is reached; each round
    bisects only the intervals within a factor 4 of the worst gap.  This
    recovers polygon corners whose normal cone is narrower than ``2 pi / K``
    and concentrates points where a smooth boundary bends fastest.
    ``refine_tol=None`` gives the plain K-point polygon.
    """
    a = _as_square(a)
    if a.ndim != 2:
        raise ValueError("expected a single matrix")
    if K < 8:
        raise ValueError("K must be >= 8")
    thetas = 2 * np.pi * np.arange(K) / K
    pts, hs = _support_points(a, thetas)
    if refine_tol is not None:
        cap = 2 * K if max_points is None else max_points
        scale = max(1.0, float(np.max(np.abs(a))))
        gaps = _corner_gaps(thetas, pts, hs)
        while len(thetas) < cap:
            bad = np.flatnonzero(gaps > refine_tol * scale)
            if bad.size == 0:
                break
            # only the intervals within a factor 4 of the worst one, so the budget
            # goes where the boundary bends fastest rather than uniformly
            bad = bad[gaps[bad] >= 0.25 * gaps[bad].max()]
            bad = bad[np.argsort(-gaps[bad], kind="stable")][: cap - len(thetas)]
            nxt = np.roll(thetas, -1)[bad]
            nxt = np.where(nxt <= thetas[bad], nxt + 2 * np.pi, nxt)
            mids = 0.5 * (thetas[bad] + nxt)
            mp, mh = _support_points(a, mids)
            thetas = np.concatenate([thetas, np.mod(mids, 2 * np.pi)])
            pts = np.concatenate([pts, mp])
            hs = np.concatenate([hs, mh])
            order = np.argsort(thetas, kind="stable")
            thetas, pts, hs = thetas[order], pts[order], hs[order]
            gaps = _corner_gaps(thetas, pts, hs)
    return convex_hull(pts)


@dataclass(frozen=True)
class EllipseParams:
    focus1: complex
    focus2: complex
    minor_axis: float
    major_axis: float

    @property
    def center(self) -> complex:
        return 0.5 * (self.focus1 + self.focus2)

    def boundary(self, n: int = 1024) -> np.ndarray:
        """``n`` points on the ellipse (a segment when the minor axis is 0)."""
        d = self.focus1 - self.focus2
        rot = d / abs(d) if abs(d) > 0 else 1.0
        t = 2 * np.pi * np.arange(n) / n
        return self.center + rot * (0.5 * self.major_axis * np.cos(t) + 0.5j * self.minor_axis * np.sin(t))

    def polygon(self, n: int = 1024) -> HullPolygon:
        return convex_hull(self.boundary(n))


def _schur_2x2(a: np.ndarray):
    """Unitary triangularization of a 2x2 matrix: returns (lam1, m, lam2)."""
    if a[1, 0] == 0:
        return a[0, 0], a[0, 1], a[1, 1]
    tr = a[0, 0] + a[1, 1]
    disc = np.sqrt((a[0, 0] - a[1, 1]) ** 2 + 4 * a[0, 1] * a[1, 0])
    lam1 = 0.5 * (tr + disc)
    # Eigenvector of lam1 from whichever row of (A - lam1 I) is larger.
    r0 = np.array([a[0, 1], lam1 - a[0, 0]])
    r1 = np.array([lam1 - a[1, 1], a[1, 0]])
    vec = r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1
    vec = vec / np.linalg.norm(vec)
    q = np.array([[vec[0], -np.conj(vec[1])], [vec[1], np.conj(vec[0])]])
    tri = conj_t(q) @ a @ q
    return tri[0, 0], tri[0, 1], tri[1, 1]


def elliptic_range_2x2(a) -> EllipseParams:
    """Ellipse bounding W(A) for a 2x2 matrix: foci at the eigenvalues, minor axis |m|.

    Non-triangular input is first reduced by a unitary Schur step.
    """
    a = _as_square(a)
    if a.shape != (2, 2):
        raise ValueError("elliptic range needs a 2x2 matrix")
    lam1, m, lam2 = _schur_2x2(a)
    minor = abs(m)
    major = float(np.sqrt(abs(lam1 - lam2) ** 2 + minor ** 2))
    return EllipseParams(complex(lam1), complex(lam2), float(minor), major)


def hull_vs_numrange_gap(a, K: int = 256, samples: int = 1024) -> float:
    """Hausdorff distance between conv(Berezin set) and the numerical-range polygon."""
    a = _as_square(a)
    hull = convex_hull(np.diagonal(a))
    return hausdorff_distance(hull, numerical_range_boundary(a, K), samples)
