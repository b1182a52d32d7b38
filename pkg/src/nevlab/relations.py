"""Finite-dimensional linear relations: subspaces of H + H.

A relation is stored as an orthonormal basis of a subspace of C^(2n), the
top block playing the role of first components (inputs) and the bottom
block of second components (outputs).  Closedness is automatic at this
scale.  The calculus implemented here: structural parts (domain, range,
kernel, multivalued part), adjoint, symmetry / dissipativity / maximality
certificates via the block criteria, resolvents, intersections and the two
sums, and the symmetric core of a pair at a point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matnum
from .matnum import DEFAULT_TOL, TolerancePolicy
from .pairs import RCOND_MIN, PairEvaluator, pair_kernel


@dataclass(frozen=True)
class LinearRelation:
    """Orthonormal basis (2n x k) of a subspace of H + H."""

    ambient: int
    basis: np.ndarray

    @classmethod
    def from_span(cls, columns, tol: TolerancePolicy = DEFAULT_TOL) -> "LinearRelation":
        cols = matnum.as_matrix(columns)
        if cols.shape[0] % 2:
            raise matnum.MatrixShapeError("span matrix must have 2n rows")
        return cls(cols.shape[0] // 2, matnum.range_space(cols, tol))

    @classmethod
    def graph(cls, a) -> "LinearRelation":
        """Graph {(h, A h)} of a square matrix A."""
        a = matnum.as_matrix(a)
        n = a.shape[0]
        return cls.from_span(np.vstack([np.eye(n, dtype=np.complex128), a]))

    @classmethod
    def pure_mul(cls, n: int) -> "LinearRelation":
        """The relation {0} x H."""
        top = np.zeros((n, n), dtype=np.complex128)
        return cls.from_span(np.vstack([top, np.eye(n, dtype=np.complex128)]))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def top(self) -> np.ndarray:
        return self.basis[: self.ambient]

    @property
    def bottom(self) -> np.ndarray:
        return self.basis[self.ambient :]

    def distance(self, other: "LinearRelation") -> float:
        return matnum.subspace_distance(self.basis, other.basis)


def from_pair_at(
    pair: PairEvaluator, z: complex, tol: TolerancePolicy = DEFAULT_TOL
) -> LinearRelation:
    """Snapshot of a pair at one point off the real axis."""
    z = complex(z)
    if z.imag == 0:
        raise ValueError("pair snapshots are taken off the real axis")
    return LinearRelation.from_span(pair.stacked(z), tol)


@dataclass(frozen=True)
class RelationParts:
    dom: np.ndarray
    ran: np.ndarray
    ker: np.ndarray
    mul: np.ndarray


def parts(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> RelationParts:
    """Domain, range, kernel and multivalued part as orthonormal bases.

    mul = {g : (0, g) in T} comes from the null space of the top block,
    ker = {f : (f, 0) in T} from the null space of the bottom block.
    """
    dom = matnum.range_space(t.top, tol)
    ran = matnum.range_space(t.bottom, tol)
    mul_params = matnum.null_space(t.top, tol)
    ker_params = matnum.null_space(t.bottom, tol)
    mul = matnum.range_space(t.bottom @ mul_params, tol)
    ker = matnum.range_space(t.top @ ker_params, tol)
    return RelationParts(dom, ran, ker, mul)


def adjoint(t: LinearRelation) -> LinearRelation:
    """Adjoint relation: the orthogonal complement of {(-g, f) : (f, g) in T}."""
    flipped = np.vstack([-t.bottom, t.top])
    return LinearRelation(t.ambient, matnum.orthonormal_complement(flipped))


def _boundary_form(t: LinearRelation) -> np.ndarray:
    """-i (top* bottom - bottom* top), the Hermitian form deciding dissipativity."""
    phi, psi = t.top, t.bottom
    return matnum.herm_part(-1j * (phi.conj().T @ psi - psi.conj().T @ phi))


def is_symmetric(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    phi, psi = t.top, t.bottom
    form = phi.conj().T @ psi - psi.conj().T @ phi
    return matnum.spectral_norm(form) <= tol.eps_eq * (1.0 + matnum.spectral_norm(psi))


def is_dissipative(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    ok, _ = matnum.is_psd(_boundary_form(t), tol)
    return ok


def is_accumulative(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    ok, _ = matnum.is_psd(-_boundary_form(t), tol)
    return ok


def is_maximal_dissipative(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Dissipative with invertible bottom + i top (full parameter count needed).

    The basis is orthonormal, so invertibility is judged at unit scale.
    """
    if t.dim != t.ambient:
        return False
    return is_dissipative(t, tol) and matnum.definitely_invertible(
        t.bottom + 1j * t.top, 1.0, RCOND_MIN
    )


def is_maximal_accumulative(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    if t.dim != t.ambient:
        return False
    return is_accumulative(t, tol) and matnum.definitely_invertible(
        t.bottom - 1j * t.top, 1.0, RCOND_MIN
    )


def is_selfadjoint(t: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Symmetric with both bottom +/- i top invertible; cross-checked against T*."""
    if t.dim != t.ambient:
        return False
    if not is_symmetric(t, tol):
        return False
    if not matnum.definitely_invertible(t.bottom + 1j * t.top, 1.0, RCOND_MIN):
        return False
    if not matnum.definitely_invertible(t.bottom - 1j * t.top, 1.0, RCOND_MIN):
        return False
    return t.distance(adjoint(t)) <= 1e-8


def resolvent_at(t: LinearRelation, z: complex) -> np.ndarray | None:
    """(T - z)^(-1) = top (bottom - z top)^(-1), or None when z is not regular."""
    if t.dim != t.ambient:
        return None
    z = complex(z)
    core = t.bottom - z * t.top
    if not matnum.definitely_invertible(core, 1.0 + abs(z), RCOND_MIN):
        return None
    x, _ = matnum.solve(core, np.eye(t.ambient, dtype=np.complex128), 1e-14)
    return t.top @ x


def intersect(
    t1: LinearRelation, t2: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL
) -> LinearRelation:
    """Subspace intersection, via the null space of the stacked bases."""
    if t1.ambient != t2.ambient:
        raise matnum.MatrixShapeError("relations live in different spaces")
    if t1.dim == 0 or t2.dim == 0:
        return LinearRelation(t1.ambient, np.zeros((2 * t1.ambient, 0), complex))
    coeffs = matnum.null_space(np.hstack([t1.basis, -t2.basis]), tol)
    vectors = t1.basis @ coeffs[: t1.dim]
    return LinearRelation(t1.ambient, matnum.range_space(vectors, tol))


def componentwise_sum(
    t1: LinearRelation, t2: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL
) -> LinearRelation:
    """Span of the union, {(f + h, g + k)} over both relations."""
    if t1.ambient != t2.ambient:
        raise matnum.MatrixShapeError("relations live in different spaces")
    return LinearRelation.from_span(np.hstack([t1.basis, t2.basis]), tol)


def operator_sum(
    t1: LinearRelation, t2: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL
) -> LinearRelation:
    """{(f, g + h) : (f, g) in T1, (f, h) in T2}, matched on common inputs."""
    if t1.ambient != t2.ambient:
        raise matnum.MatrixShapeError("relations live in different spaces")
    coeffs = matnum.null_space(np.hstack([t1.top, -t2.top]), tol)
    a, b = coeffs[: t1.dim], coeffs[t1.dim :]
    f = t1.top @ a
    g = t1.bottom @ a + t2.bottom @ b
    return LinearRelation.from_span(np.vstack([f, g]), tol)


def contains(
    small: LinearRelation, big: LinearRelation, tol: TolerancePolicy = DEFAULT_TOL
) -> bool:
    """Subspace containment, tested against the projection onto the big span."""
    if small.dim == 0:
        return True
    proj = big.basis @ (big.basis.conj().T @ small.basis)
    return matnum.spectral_norm(small.basis - proj) <= tol.eps_rank


def symmetric_core(
    pair: PairEvaluator, z: complex, tol: TolerancePolicy = DEFAULT_TOL
) -> LinearRelation:
    """Largest symmetric sub-relation F(z) cap F(conj z), point-independent.

    Spanned by (Phi(z) u, Psi(z) u) over the null space of the diagonal
    pair kernel at z; coincides with intersect(T, adjoint(T)) for the
    snapshot T at z.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("symmetric core is computed from a point in C_+")
    kern = matnum.herm_part(pair_kernel(pair, z, z, tol))
    params = matnum.null_space(kern, tol)
    phi, psi = pair(z)
    span = np.vstack([phi @ params, psi @ params])
    return LinearRelation.from_span(span, tol)
