"""Nevanlinna pairs {Phi, Psi} and their transforms.

A pair is a rule z -> (Phi(z), Psi(z)) of square matrices, holomorphic off
the real axis, subject to three axioms checked numerically by ``validate``:

    positivity     -i (Phi* Psi - Psi* Phi) / sign(Im z)  is PSD,
    symmetry       Psi(conj z)* Phi(z) - Phi(conj z)* Psi(z) = 0,
    invertibility  Psi(z) + i Phi(z)  (upper half-plane, lower with -i)
                   has a reliable inverse.

The stacked columns [Phi(z); Psi(z)] span a maximal dissipative linear
relation for Im z > 0; the pair is the multivalued-friendly carrier of a
family.  The module provides the canonical pair of an operator family,
the two-point pair kernel, the Cayley transform into the Schur class with
its kernel identity, transformations by constant unitaries of the
indefinite (Krein) inner product on H + H, and graph-equivalence testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import herglotz, matnum
from .herglotz import FamilyEvaluator, HerglotzRep
from .matnum import DEFAULT_TOL, TolerancePolicy

RCOND_MIN = 1e-12


class PairAxiomError(ValueError):
    """Raised when constructing a transform from data violating its preconditions."""


class DiagonalKernelError(ValueError):
    """Raised for the pair kernel at z = conj(w), where it is undefined."""


@dataclass
class PairEvaluator:
    """Rule z -> (Phi(z), Psi(z)) with a provenance tag."""

    dim: int
    fn: Callable[[complex], tuple[np.ndarray, np.ndarray]]
    provenance: str = "explicit"
    label: str = ""

    def __call__(self, z: complex) -> tuple[np.ndarray, np.ndarray]:
        phi, psi = self.fn(complex(z))
        phi, psi = matnum.as_matrix(phi), matnum.as_matrix(psi)
        if phi.shape != (self.dim, self.dim) or psi.shape != (self.dim, self.dim):
            raise matnum.MatrixShapeError("pair blocks must be dim x dim")
        return phi, psi

    def stacked(self, z: complex) -> np.ndarray:
        phi, psi = self(z)
        return np.vstack([phi, psi])

    @classmethod
    def constant(cls, phi0, psi0, label: str = "") -> "PairEvaluator":
        phi0, psi0 = matnum.as_matrix(phi0), matnum.as_matrix(psi0)
        return cls(phi0.shape[0], lambda z: (phi0, psi0), "constant", label)


def canonical_pair(family: FamilyEvaluator | HerglotzRep) -> PairEvaluator:
    """Canonical pair Phi = (F(z) +/- i)^(-1), Psi = I -/+ i Phi of a family.

    The sign follows the half-plane of z, so Psi(z) + i Phi(z) = I above the
    axis and Psi(z) - i Phi(z) = I below it.  The stacked columns span the
    graph of F(z).  Raises a conditioning error when F(z) +/- i is not
    reliably invertible, which signals that the family is not maximal
    dissipative / accumulative.
    """
    if isinstance(family, HerglotzRep):
        family = FamilyEvaluator.from_rep(family)
    eye = np.eye(family.dim, dtype=np.complex128)

    def fn(z: complex):
        sign = 1.0 if z.imag > 0 else -1.0
        phi, _ = matnum.solve(family(z) + sign * 1j * eye, eye, RCOND_MIN)
        psi = eye - sign * 1j * phi
        return phi, psi

    return PairEvaluator(family.dim, fn, "canonical-from-family", family.label)


@dataclass(frozen=True)
class PairValidation:
    """Per-sample residuals of the three pair axioms."""

    samples: tuple[complex, ...]
    positivity_margins: tuple[float, ...]  # min eigenvalue, scaled
    symmetry_residuals: tuple[float, ...]
    invertibility_rconds: tuple[float, ...]
    passed: bool


def validate(
    pair: PairEvaluator,
    z_samples: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> PairValidation:
    """Check the three pair axioms at the samples; report, never raise."""
    zs = herglotz.default_grid() if z_samples is None else tuple(z_samples)
    margins, residuals, rconds = [], [], []
    ok = True
    for z in zs:
        if z.imag == 0:
            continue
        sign = np.sign(z.imag)
        phi, psi = pair(z)
        phib, psib = pair(np.conj(z))
        form = -1j * (phi.conj().T @ psi - psi.conj().T @ phi) / sign
        scale = 1.0 + matnum.spectral_norm(form)
        lam = float(np.linalg.eigvalsh(matnum.herm_part(form))[0])
        margins.append(lam / scale)
        ok = ok and lam >= -tol.eps_psd * scale

        sym = psib.conj().T @ phi - phib.conj().T @ psi
        s_scale = 1.0 + matnum.spectral_norm(phi) * matnum.spectral_norm(psi)
        res = matnum.spectral_norm(sym) / s_scale
        residuals.append(res)
        ok = ok and res <= tol.eps_eq

        rc = matnum.rcond(psi + sign * 1j * phi)
        rconds.append(rc)
        ok = ok and rc >= RCOND_MIN
    return PairValidation(
        tuple(z for z in zs if z.imag != 0),
        tuple(margins),
        tuple(residuals),
        tuple(rconds),
        ok,
    )


def pair_kernel(
    pair: PairEvaluator,
    z: complex,
    w: complex,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> np.ndarray:
    """Two-point kernel (Phi(w)* Psi(z) - Psi(w)* Phi(z)) / (z - conj w).

    Hermitian and PSD on the diagonal w = z for Im z > 0.  Points with
    z = conj(w) are rejected: the pair kernel has no derivative branch.
    """
    z, w = complex(z), complex(w)
    if abs(z - np.conj(w)) <= tol.eps_eq * (abs(z) + abs(w)):
        raise DiagonalKernelError("pair kernel undefined at z = conj(w)")
    phi_z, psi_z = pair(z)
    phi_w, psi_w = pair(w)
    return (phi_w.conj().T @ psi_z - psi_w.conj().T @ phi_z) / (z - np.conj(w))


def cayley(pair: PairEvaluator, z: complex) -> np.ndarray:
    """Cayley transform (Psi - i Phi)(Psi + i Phi)^(-1), a contraction on C_+."""
    z = complex(z)
    if z.imag <= 0:
        raise herglotz.DomainError("Cayley transform requires Im z > 0")
    phi, psi = pair(z)
    x, _ = matnum.solve((psi + 1j * phi).conj().T, (psi - 1j * phi).conj().T, RCOND_MIN)
    return x.conj().T


def schur_kernel(pair: PairEvaluator, z: complex, w: complex) -> np.ndarray:
    """Schur-class kernel (I - C(w)* C(z)) / (-i (z - conj w)) on C_+."""
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag <= 0:
        raise herglotz.DomainError("Schur kernel requires both points in C_+")
    cz, cw = cayley(pair, z), cayley(pair, w)
    eye = np.eye(pair.dim, dtype=np.complex128)
    return (eye - cw.conj().T @ cz) / (-1j * (z - np.conj(w)))


def kernel_identity_residual(pair: PairEvaluator, z: complex, w: complex) -> float:
    """Relative residual of K(z,w) = 2 (Psi+iPhi)(w)^-* N(z,w) (Psi+iPhi)(z)^-1."""
    k = schur_kernel(pair, z, w)
    n = pair_kernel(pair, z, w)
    phi_z, psi_z = pair(z)
    phi_w, psi_w = pair(w)
    right, _ = matnum.solve(psi_z + 1j * phi_z, np.eye(pair.dim), RCOND_MIN)
    left_t, _ = matnum.solve((psi_w + 1j * phi_w).conj().T, np.eye(pair.dim), RCOND_MIN)
    recon = 2.0 * left_t @ n @ right
    return matnum.spectral_norm(k - recon) / (1.0 + matnum.spectral_norm(k))


# -- transforms ---------------------------------------------------------------


def krein_j(dim: int) -> np.ndarray:
    """Fundamental symmetry [[0, -iI], [iI, 0]] of the indefinite metric on H+H.

    With T(z) the stacked pair columns, T(w)* J T(z) / (-i (z - conj w))
    reproduces the pair kernel, which pins this matrix uniquely.
    """
    eye = np.eye(dim, dtype=np.complex128)
    zero = np.zeros((dim, dim), dtype=np.complex128)
    return np.block([[zero, -1j * eye], [1j * eye, zero]])


@dataclass(frozen=True)
class JUnitary:
    """Constant 2n x 2n matrix W with W* J W = J (unitary for the J-metric)."""

    w: np.ndarray
    dim: int

    @classmethod
    def create(cls, w, tol: TolerancePolicy = DEFAULT_TOL) -> "JUnitary":
        w = matnum.as_matrix(w)
        if w.shape[0] != w.shape[1] or w.shape[0] % 2:
            raise matnum.MatrixShapeError("J-unitary must be square of even size")
        dim = w.shape[0] // 2
        j = krein_j(dim)
        resid = matnum.spectral_norm(w.conj().T @ j @ w - j)
        if resid > tol.eps_eq * (1.0 + matnum.spectral_norm(w) ** 2):
            raise PairAxiomError(f"W* J W != J (residual {resid:.3e})")
        return cls(w, dim)

    @classmethod
    def shift(cls, x) -> "JUnitary":
        """[[I, 0], [X, I]] for Hermitian X; sends {Phi, Psi} to {Phi, Psi + X Phi}."""
        x = matnum.as_matrix(x)
        if matnum.hermitian_residual(x) > DEFAULT_TOL.eps_eq:
            raise PairAxiomError("shift parameter must be Hermitian")
        d = x.shape[0]
        eye, zero = np.eye(d), np.zeros((d, d))
        return cls.create(np.block([[eye, zero], [matnum.herm_part(x), eye]]))

    @classmethod
    def scale(cls, y) -> "JUnitary":
        """[[Y^-1, 0], [0, Y*]] for invertible Y; sends {Phi, Psi} to {Y^-1 Phi, Y* Psi}."""
        y = matnum.as_matrix(y)
        d = y.shape[0]
        y_inv = matnum.inverse(y, RCOND_MIN)
        zero = np.zeros((d, d))
        return cls.create(np.block([[y_inv, zero], [zero, y.conj().T]]))

    @classmethod
    def flip(cls, dim: int) -> "JUnitary":
        """[[0, -I], [I, 0]]; sends {Phi, Psi} to {-Psi, Phi} (inverse-negative family)."""
        eye, zero = np.eye(dim), np.zeros((dim, dim))
        return cls.create(np.block([[zero, -eye], [eye, zero]]))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, scale: float = 0.5) -> "JUnitary":
        """Random J-unitary via the exponential of a J-skew generator."""
        from scipy.linalg import expm

        def cgauss(n):
            return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))

        a = cgauss(dim)
        b = matnum.herm_part(cgauss(dim))
        c = matnum.herm_part(cgauss(dim))
        gen = np.block([[a, b], [c, -a.conj().T]])
        return cls.create(expm(scale * gen / max(1.0, matnum.spectral_norm(gen))))


def transform(pair: PairEvaluator, w: JUnitary | np.ndarray) -> PairEvaluator:
    """Apply a constant J-unitary to the stacked pair columns.

    The pair kernel is preserved identically, so the output is again a
    valid pair whenever the input is.
    """
    if not isinstance(w, JUnitary):
        w = JUnitary.create(w)
    if w.dim != pair.dim:
        raise matnum.MatrixShapeError("J-unitary dimension mismatch")
    d = pair.dim

    def fn(z: complex):
        t = w.w @ pair.stacked(z)
        return t[:d], t[d:]

    return PairEvaluator(d, fn, "transformed", pair.label)


def shift_transform(pair: PairEvaluator, x) -> PairEvaluator:
    return transform(pair, JUnitary.shift(x))


def scale_transform(pair: PairEvaluator, y) -> PairEvaluator:
    return transform(pair, JUnitary.scale(y))


def flip_transform(pair: PairEvaluator) -> PairEvaluator:
    return transform(pair, JUnitary.flip(pair.dim))


def herglotz_shift_transform(pair: PairEvaluator, m: HerglotzRep) -> PairEvaluator:
    """{Phi, Psi + M(z) Phi} for a uniformly strict shift function M."""
    cls = herglotz.classify(m)
    if cls.label != herglotz.CLASS_UNIFORM:
        raise PairAxiomError(
            f"shift function must be uniformly strict, classified {cls.label}"
        )
    if m.dim != pair.dim:
        raise matnum.MatrixShapeError("shift function dimension mismatch")

    def fn(z: complex):
        phi, psi = pair(z)
        return phi, psi + herglotz.evaluate(m, z) @ phi

    return PairEvaluator(pair.dim, fn, "transformed", pair.label)


def reparametrized(
    pair: PairEvaluator, chi: np.ndarray | Callable[[complex], np.ndarray]
) -> PairEvaluator:
    """Equivalent pair {Phi chi, Psi chi} for invertible holomorphic chi."""

    def fn(z: complex):
        c = matnum.as_matrix(chi(z) if callable(chi) else chi)
        phi, psi = pair(z)
        return phi @ c, psi @ c

    return PairEvaluator(pair.dim, fn, "explicit", pair.label)


def pair_direct_sum(pa: PairEvaluator, pb: PairEvaluator) -> PairEvaluator:
    """Block-diagonal direct sum of two pairs."""

    def fn(z: complex):
        phi_a, psi_a = pa(z)
        phi_b, psi_b = pb(z)
        d = pa.dim + pb.dim
        phi = np.zeros((d, d), dtype=np.complex128)
        psi = np.zeros((d, d), dtype=np.complex128)
        phi[: pa.dim, : pa.dim], phi[pa.dim :, pa.dim :] = phi_a, phi_b
        psi[: pa.dim, : pa.dim], psi[pa.dim :, pa.dim :] = psi_a, psi_b
        return phi, psi

    return PairEvaluator(pa.dim + pb.dim, fn, "explicit")


def equivalent(
    pair1: PairEvaluator,
    pair2: PairEvaluator,
    z_samples: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> bool:
    """True iff both pairs span the same graph at every sample point."""
    if pair1.dim != pair2.dim:
        return False
    zs = herglotz.default_grid() if z_samples is None else z_samples
    for z in zs:
        if z.imag == 0:
            continue
        u = matnum.range_space(pair1.stacked(z), tol)
        v = matnum.range_space(pair2.stacked(z), tol)
        if matnum.subspace_distance(u, v) > tol.eps_rank:
            return False
    return True
