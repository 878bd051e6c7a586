"""Scalar functions mu(theta), gamma_t(theta) and the Berezin operator inequalities.

Operator inequalities are checked on C^n, where the kernels are the standard
basis vectors and every Berezin quantity is an explicit matrix entry:
``<T e_lam, e_mu> = T[mu, lam]``.  All checks accept a single matrix or a
stack of matrices (the trial suites pass whole stacks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .matrices import conj_t, geometric_mean, berezin_norm_b1, hermitian_eig, polar_decompose

__all__ = [
    "mu", "gamma", "segment_mean_integral", "angle_between", "TrialConfig",
    "InequalityReport", "VIOLATION_TOL", "verify_scalar_suite", "kato_terms",
    "refined_kato_terms", "verify_kato", "verify_refined_kato", "verify_radius_bound",
    "verify_geomean_bounds", "random_trial_matrices", "run_operator_suite",
    "OPERATOR_SUITES", "SUITE_NAMES",
]

VIOLATION_TOL = 1e-9
MONOTONE_SLACK = 1e-12


def mu(theta):
    """``mu(theta) = integral_0^1 |t e^{i theta} + (1-t) e^{-i theta}| dt`` in closed form.

    Evaluated as ``1/2 + (cos^2 / 2) * atanh|sin| / |sin|``; near |sin| = 1
    the log form ``atanh s = log((1 + s)/|cos|)`` keeps it finite; the
    removable singularity at multiples of pi takes the limit value 1.
    """
    th = np.asarray(theta, dtype=float)
    s = np.abs(np.sin(th))
    c = np.abs(np.cos(th))
    small = s < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        # arctanh is accurate for small s, the log form near s = 1
        near_one = s > 0.9
        atanh = np.where(near_one, np.log((1.0 + s) / c), np.arctanh(np.where(near_one, 0.0, s)))
        ratio = atanh / s
    ratio = np.where(small, 1.0 + s * s / 3.0, ratio)
    ratio = np.where(c == 0.0, 0.0, ratio)
    out = 0.5 + 0.5 * c * c * ratio
    return out[()] if out.ndim == 0 else out


def gamma(t: float, theta):
    """Reverse Cauchy-Schwarz factor ``1 - (1 - |t e^{i th} + (1-t) e^{-i th}|) / (2 min(t, 1-t))``."""
    if not 0.0 < t < 1.0:
        raise DomainError("t must lie in (0, 1)")
    th = np.asarray(theta, dtype=float)
    tau = min(t, 1.0 - t)
    root = np.sqrt(np.cos(th) ** 2 + (2 * t - 1) ** 2 * np.sin(th) ** 2)
    out = 1.0 - (1.0 - root) / (2.0 * tau)
    return out[()] if out.ndim == 0 else out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _gl(f, a, b):
    x = 0.5 * (b - a) * _GL_X + 0.5 * (b + a)
    return 0.5 * (b - a) * np.dot(_GL_W, f(x))


def segment_mean_integral(c: complex, d: complex, tol: float = 1e-12, max_depth: int = 50) -> float:
    """``integral_0^1 |s c + (1-s) d| ds`` by adaptive 32-point Gauss-Legendre.

    The interval is first split at the parameter of closest approach to 0,
    where the integrand has its kink.
    """
    c, d = complex(c), complex(d)
    diff = c - d

    def f(s):
        return np.abs(d + s * diff)

    breaks = [0.0, 1.0]
    dd = abs(diff) ** 2
    if dd > 0:
        s0 = -(d * diff.conjugate()).real / dd
        if 0.0 < s0 < 1.0:
            breaks = [0.0, s0, 1.0]
    total = 0.0
    stack = [(a, b, _gl(f, a, b), 0) for a, b in zip(breaks[:-1], breaks[1:])]
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = _gl(f, a, m), _gl(f, m, b)
        if abs(left + right - whole) < tol or depth >= max_depth:
            total += left + right
        else:
            stack.append((m, b, right, depth + 1))
            stack.append((a, m, left, depth + 1))
    return float(total)


def angle_between(x, y):
    """``arccos(|<x, y>| / (||x|| ||y||))`` in [0, pi/2]; batched over leading axes."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    if np.any(nx == 0) or np.any(ny == 0):
        raise DomainError("angle with a zero vector is undefined")
    ratio = np.abs(np.sum(x * np.conj(y), axis=-1)) / (nx * ny)
    out = np.arccos(np.clip(ratio, 0.0, 1.0))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Reports and trial generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialConfig:
    dim: int = 4
    trials: int = 1000
    seed: int = 42
    nu_list: tuple[float, ...] = (0.25, 0.5, 0.75)
    invertibility_floor: float = 0.05

    def __post_init__(self):
        if not 2 <= self.dim <= 16:
            raise ValueError("dim must lie in [2, 16]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(not 0.0 < nu < 1.0 for nu in self.nu_list):
            raise ValueError("every nu must lie in (0, 1)")
        object.__setattr__(self, "nu_list", tuple(float(v) for v in self.nu_list))


@dataclass
class InequalityReport:
    """Outcome of one inequality check; ``margin = RHS - LHS`` must stay >= -threshold."""

    name: str
    trials: int
    violations: int
    worst_margin: float
    witness: dict | None = None
    threshold: float = VIOLATION_TOL
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        out = {"name": self.name, "trials": self.trials, "violations": self.violations,
               "worst_margin": self.worst_margin, "threshold": self.threshold,
               "witness": self.witness}
        if self.notes:
            out["notes"] = self.notes
        return out

    @classmethod
    def from_margins(cls, name, margins, trials, threshold=VIOLATION_TOL, witness=None, notes=None):
        flat = np.concatenate([np.ravel(m) for m in margins]) if margins else np.zeros(0)
        return cls(name=name, trials=trials,
                   violations=int(np.sum(flat < -threshold)),
                   worst_margin=float(flat.min()) if flat.size else math.inf,
                   witness=witness, threshold=threshold, notes=dict(notes or {}))

    @classmethod
    def merge(cls, name, reports):
        reports = list(reports)
        worst = min(reports, key=lambda r: r.worst_margin)
        witness = next((r.witness for r in reports if r.witness is not None), None)
        return cls(name=name, trials=sum(r.trials for r in reports),
                   violations=sum(r.violations for r in reports),
                   worst_margin=worst.worst_margin, witness=witness,
                   threshold=max(r.threshold for r in reports))


def _trial_rng(seed: int, dim: int, index: int):
    return np.random.default_rng(np.random.SeedSequence([seed, dim, index]))


def random_trial_matrices(cfg: TrialConfig) -> np.ndarray:
    """Seeded random matrices with singular values >= ``invertibility_floor``.

    Entries have independent real/imaginary parts uniform on [-1, 1]; then
    ``T <- T + floor * U0`` with U0 the polar unitary of T.  Trial ``i`` draws
    from its own generator seeded by ``(seed, dim, i)``.
    """
    n = cfg.dim
    out = np.empty((cfg.trials, n, n), dtype=complex)
    for i in range(cfg.trials):
        rng = _trial_rng(cfg.seed, n, i)
        re = rng.uniform(-1.0, 1.0, size=(n, n))
        im = rng.uniform(-1.0, 1.0, size=(n, n))
        out[i] = re + 1j * im
    u0, _ = polar_decompose(out)
    return out + cfg.invertibility_floor * u0


def _stack(t_mat):
    t_mat = np.asarray(t_mat, dtype=complex)
    if t_mat.ndim == 2:
        t_mat = t_mat[None]
    if t_mat.ndim != 3 or t_mat.shape[1] != t_mat.shape[2]:
        raise ValueError(f"expected a square matrix or stack, got shape {t_mat.shape}")
    return t_mat


def _diag(a):
    return np.real(np.diagonal(a, axis1=-2, axis2=-1))


class _Powers:
    """Spectral data of T shared across nu values: |T|^p and |T^*|^p for any p."""

    def __init__(self, t_mat):
        self.t = t_mat
        self.wa, self.va = hermitian_eig(0.5 * (conj_t(t_mat) @ t_mat + conj_t(conj_t(t_mat) @ t_mat)))
        self.wb, self.vb = hermitian_eig(0.5 * (t_mat @ conj_t(t_mat) + conj_t(t_mat @ conj_t(t_mat))))
        self.wa = np.maximum(self.wa, 0.0)
        self.wb = np.maximum(self.wb, 0.0)

    @staticmethod
    def _pow(w, v, p):
        if p == 0:
            scale = np.max(w, axis=-1, keepdims=True)
            lam = (w > 1e-10 * np.maximum(scale, 1.0)).astype(float)
        else:
            lam = w ** p
        out = (v * lam[..., None, :]) @ conj_t(v)
        return 0.5 * (out + conj_t(out))

    def abs_t(self, p):
        """``|T|^(2p) = (T^* T)^p``."""
        return self._pow(self.wa, self.va, p)

    def abs_tstar(self, p):
        """``|T^*|^(2p) = (T T^*)^p``."""
        return self._pow(self.wb, self.vb, p)

    def min_singular(self):
        return np.sqrt(np.min(self.wa, axis=-1))


def _require_invertible(pw: _Powers, min_singular: float):
    smin = pw.min_singular()
    scale = np.maximum(1.0, np.sqrt(np.max(pw.wa, axis=-1)))
    if np.any(smin < min_singular * scale):
        raise DomainError(f"matrix is numerically singular (min singular value {smin.min():.3e})")


def _witness(t_stack, margins_per_trial, nu, threshold):
    worst = margins_per_trial.reshape(len(t_stack), -1).min(axis=1)
    k = int(np.argmin(worst))
    if worst[k] >= -threshold:
        return None
    from .documents import matrix_to_document
    return {"nu": nu, "trial": k, "margin": float(worst[k]), "matrix": matrix_to_document(t_stack[k])}


def kato_terms(t_mat, nu: float, powers: _Powers | None = None):
    """``(lhs, rhs)`` arrays indexed ``[..., mu, lam]`` for the mixed Cauchy-Schwarz inequality.

    ``|T[mu, lam]| <= sqrt((|T|^{2 nu})[lam, lam] * (|T^*|^{2(1-nu)})[mu, mu])``.
    """
    t_mat = np.asarray(t_mat, dtype=complex)
    pw = powers or _Powers(t_mat)
    a = _diag(pw.abs_t(nu))
    b = _diag(pw.abs_tstar(1.0 - nu))
    rhs = np.sqrt(np.maximum(b[..., :, None] * a[..., None, :], 0.0))
    return np.abs(t_mat), rhs


def _polar_factors(pw: _Powers, nu: float):
    """Columns ``x_lam = |T|^nu e_lam`` and ``y_mu = |T|^{1-nu} U^* e_mu``."""
    x = pw.abs_t(nu / 2.0)
    u = pw.t @ pw._pow(pw.wa, pw.va, -0.5)
    y = pw.abs_t((1.0 - nu) / 2.0) @ conj_t(u)
    return x, y


def refined_kato_terms(t_mat, nu: float, powers: _Powers | None = None):
    """Per-pair angle form: returns ``(lhs, rhs_refined, rhs_plain, theta)`` indexed ``[..., mu, lam]``.

    ``theta[mu, lam]`` is the angle between ``|T|^nu e_lam`` and
    ``|T|^{1-nu} U^* e_mu`` (T invertible, so U is unitary).
    """
    t_mat = np.asarray(t_mat, dtype=complex)
    pw = powers or _Powers(t_mat)
    lhs, rhs_plain = kato_terms(t_mat, nu, pw)
    x, y = _polar_factors(pw, nu)
    xs = np.swapaxes(x, -1, -2)[..., None, :, :]   # [..., 1, lam, k]
    ys = np.swapaxes(y, -1, -2)[..., :, None, :]   # [..., mu, 1, k]
    theta = angle_between(xs, ys)
    return lhs, mu(theta) * rhs_plain, rhs_plain, theta


def verify_kato(t_mat, nu: float) -> InequalityReport:
    """Mixed Cauchy-Schwarz inequality over every index pair (and every matrix in a stack)."""
    if not 0.0 <= nu <= 1.0:
        raise DomainError("nu must lie in [0, 1]")
    ts = _stack(t_mat)
    lhs, rhs = kato_terms(ts, nu)
    margin = rhs - lhs
    return InequalityReport.from_margins("kato", [margin], len(ts),
                                         witness=_witness(ts, margin, nu, VIOLATION_TOL))


def verify_refined_kato(t_mat, nu: float, min_singular: float = 1e-10) -> InequalityReport:
    """Angle-refined Kato inequality, pointwise in (lam, mu), plus ``mu(theta) <= 1``.

    The second check confirms the refined bound never exceeds plain Kato.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError("nu must lie in (0, 1)")
    ts = _stack(t_mat)
    pw = _Powers(ts)
    _require_invertible(pw, min_singular)
    lhs, rhs_ref, rhs_plain, theta = refined_kato_terms(ts, nu, pw)
    m_main = rhs_ref - lhs
    m_order = rhs_plain - rhs_ref
    both = np.minimum(m_main, m_order)
    return InequalityReport.from_margins(
        "refined-kato", [m_main, m_order], len(ts),
        witness=_witness(ts, both, nu, VIOLATION_TOL),
        notes={"max_theta": float(theta.max()), "mean_mu": float(np.mean(mu(theta)))})


def verify_radius_bound(t_mat, nu: float, min_singular: float = 1e-10) -> InequalityReport:
    """Berezin radius bound via ``mu(theta_lam)`` and ``|| |T|^{2nu} + |T^*|^{2(1-nu)} ||_{B,1}``.

    Checks the pointwise chain
    ``|T_ll| <= mu sqrt(A_ll B_ll) <= (mu/2)(A_ll + B_ll)`` and the aggregate
    ``ber(T) <= (max_l mu(theta_l) / 2) ||A + B||_{B,1}``.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError("nu must lie in (0, 1)")
    ts = _stack(t_mat)
    pw = _Powers(ts)
    _require_invertible(pw, min_singular)
    a_full = pw.abs_t(nu)
    b_full = pw.abs_tstar(1.0 - nu)
    a, b = _diag(a_full), _diag(b_full)
    x, y = _polar_factors(pw, nu)
    theta = angle_between(np.swapaxes(x, -1, -2), np.swapaxes(y, -1, -2))
    m_theta = mu(theta)
    tdiag = np.abs(np.diagonal(ts, axis1=-2, axis2=-1))
    geo = m_theta * np.sqrt(np.maximum(a * b, 0.0))
    link1 = geo - tdiag
    link2 = 0.5 * m_theta * (a + b) - geo
    ber = tdiag.max(axis=-1)
    bound = 0.5 * m_theta.max(axis=-1) * berezin_norm_b1(a_full + b_full)
    agg = bound - ber
    worst = np.minimum(np.minimum(link1, link2).min(axis=-1), agg)
    regime = "theta in [0, pi/2]" if np.all(theta <= np.pi / 2 + 1e-15) else "mixed"
    return InequalityReport.from_margins(
        "radius-bound", [link1, link2, agg], len(ts),
        witness=_witness(ts, worst, nu, VIOLATION_TOL),
        notes={"regime": regime, "max_theta": float(theta.max())})


def verify_geomean_bounds(t_mat, nu: float, min_singular: float = 1e-10) -> InequalityReport:
    """Geometric-mean steps: ``(A#B)_ll <= sqrt(A_ll B_ll)`` and ``cos(theta_l) (A#B)_ll <= |T_ll|``.

    Here ``A = |T|^{2nu}`` and ``B = |T^*|^{2(1-nu)}``.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError("nu must lie in (0, 1)")
    ts = _stack(t_mat)
    pw = _Powers(ts)
    _require_invertible(pw, min_singular)
    a_full = pw.abs_t(nu)
    b_full = pw.abs_tstar(1.0 - nu)
    g = _diag(geometric_mean(a_full, b_full, 0.5))
    a, b = _diag(a_full), _diag(b_full)
    x, y = _polar_factors(pw, nu)
    theta = angle_between(np.swapaxes(x, -1, -2), np.swapaxes(y, -1, -2))
    tdiag = np.abs(np.diagonal(ts, axis1=-2, axis2=-1))
    step_a = np.sqrt(np.maximum(a * b, 0.0)) - g
    step_b = tdiag - np.cos(theta) * g
    return InequalityReport.from_margins(
        "geomean", [step_a, step_b], len(ts),
        witness=_witness(ts, np.minimum(step_a, step_b), nu, VIOLATION_TOL))


OPERATOR_SUITES = {
    "kato": verify_kato,
    "refined-kato": verify_refined_kato,
    "radius-bound": verify_radius_bound,
    "geomean": verify_geomean_bounds,
}
SUITE_NAMES = ("scalar",) + tuple(OPERATOR_SUITES) + ("all",)


def run_operator_suite(name: str, cfg: TrialConfig, dims=None) -> InequalityReport:
    """Run one operator suite over seeded trials for every dim and every nu."""
    check = OPERATOR_SUITES[name]
    dims = [cfg.dim] if dims is None else list(dims)
    reports = []
    for n in dims:
        sub = TrialConfig(dim=n, trials=cfg.trials, seed=cfg.seed, nu_list=cfg.nu_list,
                          invertibility_floor=cfg.invertibility_floor)
        ts = random_trial_matrices(sub)
        for nu in cfg.nu_list:
            r = check(ts, nu)
            if r.witness is not None:
                r.witness["dim"] = n
            reports.append(r)
    return InequalityReport.merge(name, reports)


# ---------------------------------------------------------------------------
# Scalar suite
# ---------------------------------------------------------------------------

def _random_pairs(cfg: TrialConfig):
    out = np.empty((cfg.trials, 3), dtype=complex)
    for i in range(cfg.trials):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0, i]))
        c = complex(*rng.uniform(-2.0, 2.0, size=2))
        d = complex(*rng.uniform(-2.0, 2.0, size=2))
        t = rng.uniform(0.0, 1.0)
        out[i] = c, d, t
    return out[:, 0], out[:, 1], out[:, 2].real


def verify_scalar_suite(cfg: TrialConfig = TrialConfig(), grid_points: int = 2001) -> list[InequalityReport]:
    """Scalar inequalities on seeded complex pairs and on theta-grids over [0, pi]."""
    c, d, t = _random_pairs(cfg)
    integ = np.array([segment_mean_integral(ci, di) for ci, di in zip(c, d)])
    lower = integ - np.abs(0.5 * (c + d))
    upper = 0.5 * (np.abs(c) + np.abs(d)) - integ
    reports = [InequalityReport.from_margins("segment-mean-two-sided", [lower, upper], cfg.trials)]

    t = np.clip(t, 1e-6, 1.0 - 1e-6)
    tau = np.minimum(t, 1.0 - t)
    rev_lhs = (0.5 * (np.abs(c) + np.abs(d))
               - ((1 - t) * np.abs(c) + t * np.abs(d) - np.abs((1 - t) * c + t * d)) / (2 * tau))
    reports.append(InequalityReport.from_margins(
        "reverse-triangle", [np.abs(0.5 * (c + d)) - rev_lhs], cfg.trials))

    theta = np.linspace(0.0, np.pi, grid_points)
    half = grid_points // 2
    mv = mu(theta)
    reports.append(InequalityReport.from_margins(
        "mu-bounds", [mv - 0.5, 1.0 - mv, mv - np.abs(np.cos(theta))], grid_points))
    reports.append(InequalityReport.from_margins(
        "mu-monotone", [mv[:half] - mv[1:half + 1], mv[half + 1:] - mv[half:-1]],
        grid_points, threshold=MONOTONE_SLACK))

    q_theta = np.linspace(1e-6, np.pi - 1e-6, 1001)
    quad = np.array([segment_mean_integral(np.exp(1j * th), np.exp(-1j * th)) for th in q_theta])
    reports.append(InequalityReport.from_margins(
        "mu-quadrature", [-np.abs(mu(q_theta) - quad)], q_theta.size, threshold=1e-10))

    t_values = [0.1 * k for k in range(1, 10)]
    gb, gm = [], []
    for tv in t_values:
        g = gamma(tv, theta)
        gb += [g, 1.0 - g]
        gm += [g[:half] - g[1:half + 1], g[half + 1:] - g[half:-1]]
    reports.append(InequalityReport.from_margins("gamma-bounds", gb, grid_points * len(t_values),
                                                 threshold=MONOTONE_SLACK))
    reports.append(InequalityReport.from_margins("gamma-monotone", gm, grid_points * len(t_values),
                                                 threshold=MONOTONE_SLACK))
    return reports
