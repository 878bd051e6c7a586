"""Reproducing kernel Hilbert spaces, polynomial symbols and finite-rank operators.

Three spaces are supported:

* ``hardy``   -- H^2 of the unit disc, kernel ``1/(1 - conj(lam) z)``,
  monomials orthonormal.
* ``bergman`` -- A^2 of the unit disc with normalized area measure, kernel
  ``1/(1 - conj(lam) z)**2``, ``||z^m||^2 = 1/(m+1)``.
* ``finite``  -- C^n with the standard basis as kernels.  A polynomial's
  coefficient vector is read as a vector in C^n.

For the disc spaces a finite-rank operator ``A f = sum_i <f, g_i> h_i`` has
Berezin transform::

    A~(lam) = (1 - |lam|^2)**s * sum_i conj(g_i(lam)) h_i(lam)

with ``s = 1`` (Hardy) or ``s = 2`` (Bergman).  This follows from the
reproducing property and needs no truncation of the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SpaceMismatchError, UnsupportedSpaceError

__all__ = [
    "SpaceSpec", "HARDY", "BERGMAN", "AnalyticPolynomial", "FiniteRankOperator",
    "BerezinValue", "DISC_EDGE", "kernel_eval", "kernel_norm_sq",
    "truncated_kernel", "inner_product", "apply_operator", "berezin_transform",
    "truncated_diagonal_operator", "berezin_transform_truncated_diagonal",
    "check_disc",
]

# Points closer than this to the unit circle are rejected, not clamped.
DISC_EDGE = 1.0 - 1e-12

_KINDS = ("hardy", "bergman", "finite")


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "finite":
            if self.dim is None or int(self.dim) != self.dim or self.dim < 1:
                raise ValueError("finite space needs an integer dim >= 1")
        elif self.dim is not None:
            raise ValueError(f"{self.kind} space takes no dim")

    @property
    def is_disc(self) -> bool:
        return self.kind != "finite"

    @property
    def kernel_power(self) -> int:
        """Exponent s in ``k_lam(z) = (1 - conj(lam) z)^(-s)``."""
        if self.kind == "hardy":
            return 1
        if self.kind == "bergman":
            return 2
        raise UnsupportedSpaceError("finite spaces have no disc kernel")

    def weights(self, n: int) -> np.ndarray:
        """Squared norms ``||z^m||^2`` for ``m = 0..n-1``."""
        if self.kind == "hardy":
            return np.ones(n)
        if self.kind == "bergman":
            return 1.0 / np.arange(1, n + 1)
        return np.ones(n)

    def require_disc(self, what: str = "this operation"):
        if not self.is_disc:
            raise UnsupportedSpaceError(f"{what} is only defined on hardy/bergman spaces")


HARDY = SpaceSpec("hardy")
BERGMAN = SpaceSpec("bergman")


def check_disc(lam, edge: float = DISC_EDGE) -> np.ndarray:
    """Return ``lam`` as a complex array, raising DomainError outside ``|lam| < edge``."""
    arr = np.asarray(lam, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite point")
    if arr.size and np.max(np.abs(arr)) >= edge:
        raise DomainError(f"point outside the open unit disc (|lambda| >= {edge!r})")
    return arr


class AnalyticPolynomial:
    """Polynomial ``sum_m coeffs[m] z**m`` with complex coefficients.

    Trailing zeros are stripped on construction, so two polynomials that
    differ only by trailing zeros compare equal and hash alike.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[complex] = ()):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                     dtype=complex).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        self._coeffs = c

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "AnalyticPolynomial":
        if degree < 0:
            raise ValueError("degree must be >= 0")
        c = np.zeros(degree + 1, dtype=complex)
        c[degree] = coeff
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._coeffs) - 1

    def is_zero(self) -> bool:
        return len(self._coeffs) == 0

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(max(n, len(self._coeffs)), dtype=complex)
        out[: len(self._coeffs)] = self._coeffs
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self._coeffs[::-1]:
            acc = acc * z + c
        return acc

    def __add__(self, other: "AnalyticPolynomial") -> "AnalyticPolynomial":
        n = max(len(self._coeffs), len(other._coeffs))
        return AnalyticPolynomial(self.padded(n) + other.padded(n))

    def __mul__(self, scalar: complex) -> "AnalyticPolynomial":
        return AnalyticPolynomial(self._coeffs * complex(scalar))

    __rmul__ = __mul__

    def conj_coeffs(self) -> "AnalyticPolynomial":
        return AnalyticPolynomial(np.conj(self._coeffs))

    def has_real_coeffs(self) -> bool:
        return bool(np.all(self._coeffs.imag == 0))

    def __eq__(self, other):
        if not isinstance(other, AnalyticPolynomial):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash(tuple(self._coeffs.tolist()))

    def __repr__(self):
        return f"AnalyticPolynomial({self._coeffs.tolist()!r})"


@dataclass(frozen=True)
class BerezinValue:
    lam: complex
    value: complex


Term = tuple[AnalyticPolynomial, AnalyticPolynomial]


@dataclass(frozen=True)
class FiniteRankOperator:
    """``A f = sum_i <f, g_i> h_i`` over ``space``; ``terms`` holds the pairs (g_i, h_i)."""

    space: SpaceSpec
    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple((_as_poly(g), _as_poly(h)) for g, h in self.terms)
        if not terms:
            raise ValueError("a finite-rank operator needs at least one term")
        object.__setattr__(self, "terms", terms)
        if self.space.kind == "finite":
            n = self.space.dim
            for g, h in terms:
                if len(g.coeffs) > n or len(h.coeffs) > n:
                    raise ValueError(f"symbol longer than the space dimension {n}")

    @classmethod
    def rank_one(cls, space: SpaceSpec, g, h) -> "FiniteRankOperator":
        return cls(space, ((g, h),))

    @classmethod
    def zero(cls, space: SpaceSpec) -> "FiniteRankOperator":
        return cls(space, ((AnalyticPolynomial(), AnalyticPolynomial()),))

    def __add__(self, other: "FiniteRankOperator") -> "FiniteRankOperator":
        if other.space != self.space:
            raise SpaceMismatchError("operators live on different spaces")
        return FiniteRankOperator(self.space, self.terms + other.terms)

    @property
    def max_degree(self) -> int:
        return max(max(g.degree, h.degree) for g, h in self.terms)

    def has_real_coeffs(self) -> bool:
        return all(g.has_real_coeffs() and h.has_real_coeffs() for g, h in self.terms)

    def is_zero(self) -> bool:
        return all(g.is_zero() or h.is_zero() for g, h in self.terms)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix ``sum_i h_i g_i^*`` (finite spaces only)."""
        if self.space.kind != "finite":
            raise UnsupportedSpaceError("only finite-space operators have a dense matrix")
        n = self.space.dim
        out = np.zeros((n, n), dtype=complex)
        for g, h in self.terms:
            out += np.outer(h.padded(n), np.conj(g.padded(n)))
        return out

    def apply(self, f) -> AnalyticPolynomial:
        return apply_operator(self, f)

    def berezin(self, lam):
        return berezin_transform(self, lam)


def _as_poly(p) -> AnalyticPolynomial:
    if isinstance(p, AnalyticPolynomial):
        return p
    return AnalyticPolynomial(p)


def kernel_eval(space: SpaceSpec, lam, z):
    """Reproducing kernel ``k_lam(z)`` of a disc space."""
    space.require_disc("kernel_eval")
    lam = check_disc(lam)
    z = check_disc(z)
    val = 1.0 / (1.0 - np.conj(lam) * z) ** space.kernel_power
    return val[()] if np.ndim(val) == 0 else val


def kernel_norm_sq(space: SpaceSpec, lam):
    """``||k_lam||^2 = k_lam(lam)``; equal to 1 for the standard basis of C^n."""
    if space.kind == "finite":
        _check_index(space, lam)
        return 1.0
    lam = check_disc(lam)
    val = 1.0 / (1.0 - np.abs(lam) ** 2) ** space.kernel_power
    return val[()] if np.ndim(val) == 0 else val


def truncated_kernel(space: SpaceSpec, lam: complex, degree: int) -> AnalyticPolynomial:
    """Kernel expansion ``sum_{m<=degree} conj(lam)^m z^m / ||z^m||^2``."""
    space.require_disc("truncated_kernel")
    lam = complex(check_disc(lam))
    m = np.arange(degree + 1)
    return AnalyticPolynomial(np.conj(lam) ** m / space.weights(degree + 1))


def inner_product(space: SpaceSpec, p, q) -> complex:
    """``<p, q>`` in the given disc space, computed from the monomial weights."""
    space.require_disc("inner_product")
    p, q = _as_poly(p), _as_poly(q)
    n = min(len(p.coeffs), len(q.coeffs))
    if n == 0:
        return 0j
    w = space.weights(n)
    return complex(np.sum(p.coeffs[:n] * np.conj(q.coeffs[:n]) * w))


def apply_operator(op: FiniteRankOperator, f, space: SpaceSpec | None = None) -> AnalyticPolynomial:
    """Exact image ``A f`` of a polynomial.

    ``space`` optionally names the space ``f`` belongs to; a mismatch with the
    operator's space raises SpaceMismatchError.
    """
    if space is not None and space != op.space:
        raise SpaceMismatchError(f"f lives on {space.kind}, operator on {op.space.kind}")
    f = _as_poly(f)
    if op.space.kind == "finite":
        if len(f.coeffs) > op.space.dim:
            raise SpaceMismatchError("vector longer than the space dimension")
        vec = op.to_matrix() @ f.padded(op.space.dim)
        return AnalyticPolynomial(vec)
    out = AnalyticPolynomial()
    for g, h in op.terms:
        out = out + inner_product(op.space, f, g) * h
    return out


def _check_index(space: SpaceSpec, idx):
    arr = np.asarray(idx)
    if arr.dtype.kind not in "iu" or np.any(arr < 0) or np.any(arr >= space.dim):
        raise DomainError(f"basis index must be an integer in [0, {space.dim})")
    return arr


def berezin_transform(op: FiniteRankOperator, lam):
    """Berezin transform ``<A k^_lam, k^_lam>``; vectorized over ``lam``.

    For finite spaces ``lam`` is a basis index (or array of indices).
    """
    if op.space.kind == "finite":
        idx = _check_index(op.space, lam)
        n = op.space.dim
        val = np.zeros(idx.shape, dtype=complex)
        for g, h in op.terms:
            val = val + np.conj(g.padded(n)[idx]) * h.padded(n)[idx]
        return val[()] if np.ndim(val) == 0 else val
    lam = check_disc(lam)
    acc = np.zeros(lam.shape, dtype=complex)
    for g, h in op.terms:
        if g == h:
            # self-paired symbols give |g|^2, exactly real
            gv = g(lam)
            acc = acc + (gv.real ** 2 + gv.imag ** 2)
        else:
            acc = acc + np.conj(g(lam)) * h(lam)
    val = (1.0 - np.abs(lam) ** 2) ** op.space.kernel_power * acc
    return val[()] if np.ndim(val) == 0 else val


def truncated_diagonal_operator(a: complex, N: int, space: SpaceSpec = HARDY) -> FiniteRankOperator:
    """Rank-N truncation of ``f -> sum_{n>=1} <f, a z^n> a z^n``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    space.require_disc("truncated_diagonal_operator")
    terms = tuple((AnalyticPolynomial.monomial(n, a),) * 2 for n in range(1, N + 1))
    return FiniteRankOperator(space, terms)


def berezin_transform_truncated_diagonal(a: complex, N: int, lam, space: SpaceSpec = HARDY):
    """Berezin transform of the rank-N truncation of the compact diagonal operator.

    Tends to ``|a|^2 |lam|^2`` as N grows, with error ``|a|^2 |lam|^(2N+2)``.
    """
    if space.kind != "hardy":
        raise UnsupportedSpaceError("the compact diagonal family is defined on the Hardy space")
    lam = check_disc(lam)
    if N < 1:
        raise ValueError("N must be >= 1")
    # Each term contributes |a|^2 |lam|^(2n); summed without building N polynomials.
    x = np.abs(lam) ** 2
    acc = np.zeros(lam.shape)
    xn = np.ones(lam.shape)
    for _ in range(N):
        xn = xn * x
        acc = acc + xn
    val = abs(a) ** 2 * (1.0 - x) * acc + 0j
    return val[()] if np.ndim(val) == 0 else val
