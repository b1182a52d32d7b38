"""Matrix-valued Herglotz-Nevanlinna functions with finite atomic measures.

A concrete function of the class is stored as the data of its integral
representation

    F(z) = B0 + B1 z + sum_j ( 1/(t_j - z) - t_j/(t_j^2 + 1) ) W_j,

with B0 Hermitian, B1 PSD and finitely many atoms (t_j, W_j), W_j PSD.
Such F is holomorphic off the real axis, satisfies F(conj z) = F(z)* and
has PSD imaginary part in the upper half-plane.  The module evaluates F,
its derivative and Poisson-form imaginary part, builds the two-point
difference kernel

    N_F(z, w) = (F(z) - F(w)*) / (z - conj w),        N_F(z, z) via F'(z),

assembles Gram matrices of that kernel, classifies families into the
plain / strict / uniformly strict subclasses by the value at z = i, and
recovers measure weight from boundary values (Stieltjes inversion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from . import matnum
from .matnum import DEFAULT_TOL, TolerancePolicy


class PoleError(ValueError):
    """Raised when evaluating at (or too close to) a real atom location."""


class DomainError(ValueError):
    """Raised when an argument lies in the wrong half-plane or on the axis."""


class SweepDivergenceError(RuntimeError):
    """Raised when a Stieltjes inversion eta-sweep fails to settle."""


#: Default z-grid for "for all z off the real axis" checks: five real parts
#: crossed with three heights, plus complex conjugates (30 points).
GRID_REAL_PARTS = (-2.0, -0.5, 0.0, 0.7, 3.0)
GRID_HEIGHTS = (0.1, 1.0, 10.0)


def default_grid(conjugates: bool = True) -> tuple[complex, ...]:
    upper = tuple(complex(x, y) for x in GRID_REAL_PARTS for y in GRID_HEIGHTS)
    if not conjugates:
        return upper
    return upper + tuple(z.conjugate() for z in upper)


def upper_grid() -> tuple[complex, ...]:
    return default_grid(conjugates=False)


@dataclass(frozen=True)
class OperatorMeasure:
    """Finite atomic operator measure: atoms (t_j, W_j) with W_j PSD.

    Atom locations are kept strictly increasing (canonical order); the
    normalization sum K = sum_j W_j / (1 + t_j^2) is finite by finiteness
    and PSD, which is still asserted on construction.
    """

    locations: tuple[float, ...]
    weights: tuple[np.ndarray, ...]
    dim: int

    @classmethod
    def from_atoms(
        cls,
        atoms: Sequence[tuple[float, np.ndarray]],
        tol: TolerancePolicy = DEFAULT_TOL,
    ) -> "OperatorMeasure":
        pairs = sorted(
            ((float(t), matnum.as_matrix(w)) for t, w in atoms), key=lambda p: p[0]
        )
        if not pairs:
            raise ValueError("empty measure needs an explicit dimension; use empty()")
        dim = pairs[0][1].shape[0]
        locs, ws = [], []
        for t, w in pairs:
            if w.shape != (dim, dim):
                raise matnum.MatrixShapeError("all weights must share one dimension")
            ok, lam = matnum.is_psd(w, tol)
            if not ok:
                raise ValueError(f"weight at t={t} is not PSD (lambda_min={lam:.3e})")
            if locs and t <= locs[-1]:
                raise ValueError("atom locations must be strictly increasing")
            locs.append(t)
            ws.append(matnum.herm_part(w))
        measure = cls(tuple(locs), tuple(w for w in ws), dim)
        ok, lam = matnum.is_psd(measure.k_sigma(), tol)
        if not ok:  # cannot happen for finite PSD atom lists; assert anyway
            raise ValueError(f"normalization sum not PSD (lambda_min={lam:.3e})")
        return measure

    @classmethod
    def empty(cls, dim: int) -> "OperatorMeasure":
        return cls((), (), int(dim))

    def __len__(self) -> int:
        return len(self.locations)

    def k_sigma(self) -> np.ndarray:
        """Normalization sum K = sum_j W_j / (1 + t_j^2)."""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for t, w in zip(self.locations, self.weights):
            out += w / (1.0 + t * t)
        return out

    def total_weight(self, a: float = -np.inf, b: float = np.inf) -> np.ndarray:
        """Sum of weights with locations in the open interval (a, b)."""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for t, w in zip(self.locations, self.weights):
            if a < t < b:
                out += w
        return out


@dataclass(frozen=True)
class HerglotzRep:
    """Representation data (B0, B1, measure) of one concrete function."""

    b0: np.ndarray
    b1: np.ndarray
    measure: OperatorMeasure
    dim: int

    @classmethod
    def create(
        cls,
        b0,
        b1,
        measure: OperatorMeasure | Sequence[tuple[float, np.ndarray]] | None = None,
        tol: TolerancePolicy = DEFAULT_TOL,
    ) -> "HerglotzRep":
        b0 = matnum.as_matrix(b0)
        b1 = matnum.as_matrix(b1)
        dim = b0.shape[0]
        if b0.shape != (dim, dim) or b1.shape != (dim, dim):
            raise matnum.MatrixShapeError("B0 and B1 must be square and equal-sized")
        if matnum.hermitian_residual(b0) > tol.eps_eq:
            raise matnum.HermitianityError("B0 must be Hermitian")
        ok, lam = matnum.is_psd(b1, tol)
        if not ok:
            raise ValueError(f"B1 must be PSD (lambda_min={lam:.3e})")
        if measure is None:
            measure = OperatorMeasure.empty(dim)
        elif not isinstance(measure, OperatorMeasure):
            measure = OperatorMeasure.from_atoms(measure, tol)
        if measure.dim != dim:
            raise matnum.MatrixShapeError("measure dimension mismatch")
        return cls(matnum.herm_part(b0), matnum.herm_part(b1), measure, dim)


def _check_point(rep: HerglotzRep, z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0 and any(z.real == t for t in rep.measure.locations):
        raise PoleError(f"z={z} coincides with an atom location")
    return z


def evaluate(rep: HerglotzRep, z: complex) -> np.ndarray:
    """Value B0 + B1 z + sum_j (1/(t_j - z) - t_j/(t_j^2+1)) W_j.

    Defined off the real axis and at real z distinct from every atom.
    """
    z = _check_point(rep, z)
    out = rep.b0 + rep.b1 * z
    for t, w in zip(rep.measure.locations, rep.measure.weights):
        out = out + (1.0 / (t - z) - t / (t * t + 1.0)) * w
    return out


def derivative(rep: HerglotzRep, z: complex) -> np.ndarray:
    """Complex derivative B1 + sum_j W_j / (t_j - z)^2."""
    z = _check_point(rep, z)
    out = rep.b1.astype(np.complex128).copy()
    for t, w in zip(rep.measure.locations, rep.measure.weights):
        out = out + w / (t - z) ** 2
    return out


def imag_poisson(rep: HerglotzRep, z: complex) -> np.ndarray:
    """Imaginary part in Poisson form, B1 y + sum_j y/((x-t_j)^2+y^2) W_j.

    Requires Im z > 0; coincides with imag_part(evaluate(rep, z)).
    """
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("imag_poisson requires Im z > 0")
    x, y = z.real, z.imag
    out = rep.b1 * y
    for t, w in zip(rep.measure.locations, rep.measure.weights):
        out = out + (y / ((x - t) ** 2 + y * y)) * w
    return out


@dataclass
class FamilyEvaluator:
    """A rule z -> F(z) on the complex plane off the real axis.

    Families are realized by a representation, by representation plus a
    constant Hermitian offset, or by the example builders; the symmetry
    F(conj z) = F(z)* is asserted on demand (``symmetry_residual``), not
    assumed.
    """

    dim: int
    fn: Callable[[complex], np.ndarray]
    provenance: str = "custom"
    rep: HerglotzRep | None = None
    offset: np.ndarray | None = None
    label: str = ""

    def __call__(self, z: complex) -> np.ndarray:
        value = matnum.as_matrix(self.fn(complex(z)))
        if value.shape != (self.dim, self.dim):
            raise matnum.MatrixShapeError(
                f"family produced shape {value.shape}, declared dim {self.dim}"
            )
        return value

    def symmetry_residual(self, zs: Sequence[complex] | None = None) -> float:
        """Worst relative residual of F(conj z) - F(z)* over the samples."""
        zs = default_grid(conjugates=False) if zs is None else zs
        worst = 0.0
        for z in zs:
            a = self(np.conj(z))
            b = self(z).conj().T
            scale = 1.0 + max(matnum.spectral_norm(a), matnum.spectral_norm(b))
            worst = max(worst, matnum.spectral_norm(a - b) / scale)
        return worst

    @classmethod
    def from_rep(cls, rep: HerglotzRep, label: str = "") -> "FamilyEvaluator":
        return cls(rep.dim, lambda z: evaluate(rep, z), "herglotz-rep", rep, None, label)

    @classmethod
    def from_rep_with_offset(
        cls, rep: HerglotzRep, offset, label: str = ""
    ) -> "FamilyEvaluator":
        t0 = matnum.as_matrix(offset)
        if t0.shape != (rep.dim, rep.dim):
            raise matnum.MatrixShapeError("offset dimension mismatch")
        if matnum.hermitian_residual(t0) > DEFAULT_TOL.eps_eq:
            raise matnum.HermitianityError("offset must be Hermitian")
        t0 = matnum.herm_part(t0)
        return cls(
            rep.dim, lambda z: evaluate(rep, z) + t0, "rep-plus-offset", rep, t0, label
        )

    @classmethod
    def from_callable(
        cls, fn: Callable[[complex], np.ndarray], dim: int, label: str = ""
    ) -> "FamilyEvaluator":
        return cls(int(dim), fn, "custom", None, None, label)


def family_direct_sum(fa: FamilyEvaluator, fb: FamilyEvaluator) -> FamilyEvaluator:
    """Block-diagonal direct sum of two families."""

    def fn(z):
        a, b = fa(z), fb(z)
        out = np.zeros((fa.dim + fb.dim,) * 2, dtype=np.complex128)
        out[: fa.dim, : fa.dim] = a
        out[fa.dim :, fa.dim :] = b
        return out

    return FamilyEvaluator(fa.dim + fb.dim, fn, "direct-sum")


def _value_of(f, z: complex) -> np.ndarray:
    if isinstance(f, HerglotzRep):
        return evaluate(f, z)
    return f(z)


def nevanlinna_kernel(
    f: HerglotzRep | FamilyEvaluator,
    z: complex,
    w: complex,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> np.ndarray:
    """Difference kernel (F(z) - F(w)*) / (z - conj w).

    Near the diagonal z = conj w (within eps_eq * (|z| + |w|)) the quotient
    degenerates and the derivative branch F'(z) is used instead; that
    branch needs representation data and is only available for reps.
    """
    z, w = complex(z), complex(w)
    if abs(z - np.conj(w)) <= tol.eps_eq * (abs(z) + abs(w)):
        if isinstance(f, HerglotzRep):
            return derivative(f, z)
        if isinstance(f, FamilyEvaluator) and f.rep is not None:
            return derivative(f.rep, z)  # offsets cancel in the derivative
        raise DomainError("diagonal z = conj(w) needs representation data")
    return (_value_of(f, z) - _value_of(f, w).conj().T) / (z - np.conj(w))


def kernel_gram(
    f: HerglotzRep | FamilyEvaluator,
    points: Sequence[complex],
    vectors: Sequence[np.ndarray],
    tol: TolerancePolicy = DEFAULT_TOL,
) -> np.ndarray:
    """Gram matrix G[i, j] = <N(z_j, z_i) h_j, h_i> of the difference kernel.

    PSD (within eps_psd) for every function of the class; rank-deficient
    when point/vector pairs repeat.
    """
    if len(points) != len(vectors):
        raise ValueError("points and vectors must have equal length")
    n = len(points)
    hs = [np.asarray(h, dtype=np.complex128).reshape(-1) for h in vectors]
    gram = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        for i in range(j, n):
            kern = nevanlinna_kernel(f, points[j], points[i], tol)
            gram[i, j] = hs[i].conj() @ (kern @ hs[j])
            gram[j, i] = np.conj(gram[i, j])
    return gram


CLASS_NOT_NEV = "not-R"
CLASS_PLAIN = "R"
CLASS_STRICT = "R^s"
CLASS_UNIFORM = "R^u"


@dataclass(frozen=True)
class Classification:
    """Class label with the scalar witnesses behind the decision."""

    label: str
    lam_min: float
    kernel_dim: int
    symmetry_residual: float
    dissipativity_margin: float

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.label


def classify(
    family: FamilyEvaluator | HerglotzRep,
    tol: TolerancePolicy = DEFAULT_TOL,
    grid: Sequence[complex] | None = None,
) -> Classification:
    """Classify a family as not-R / R / R^s / R^u.

    Membership is screened on the full grid (half-plane dissipativity and
    the symmetry F(conj z) = F(z)*); the subclass decision is made from the
    single value Im F(i):  trivial kernel gives the strict class, and a
    definite lower bound lambda_min >= 10 * eps_psd * (1 + ||Im F(i)||)
    upgrades it to uniformly strict.
    """
    if isinstance(family, HerglotzRep):
        family = FamilyEvaluator.from_rep(family)
    grid = default_grid() if grid is None else tuple(grid)

    sym = family.symmetry_residual([z for z in grid if z.imag > 0])
    margin = np.inf
    ok_all = sym <= tol.eps_eq
    for z in grid:
        if z.imag == 0:
            continue
        h = matnum.imag_part(family(z)) * np.sign(z.imag)
        ok, lam = matnum.is_psd(h, tol)
        margin = min(margin, lam)
        ok_all = ok_all and ok

    im_i = matnum.imag_part(family(1j))
    lam_min = float(np.linalg.eigvalsh(matnum.herm_part(im_i))[0])
    if not ok_all:
        return Classification(CLASS_NOT_NEV, lam_min, -1, sym, float(margin))

    kernel_dim = matnum.null_space(im_i, tol).shape[1]
    scale = 1.0 + matnum.spectral_norm(im_i)
    if kernel_dim == 0 and lam_min >= 10.0 * tol.eps_psd * scale:
        label = CLASS_UNIFORM
    elif kernel_dim == 0:
        label = CLASS_STRICT
    else:
        label = CLASS_PLAIN
    return Classification(label, lam_min, kernel_dim, sym, float(margin))


def stieltjes_invert(
    family: FamilyEvaluator | HerglotzRep,
    a: float,
    b: float,
    etas: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5),
    quad_tol: float = 1e-10,
) -> np.ndarray:
    """Approximate total measure weight on (a, b) from boundary values.

    Computes (1/pi) * integral_a^b Im F(t + i eta) dt over the geometric
    eta-sweep and extrapolates the last two values (their error is
    asymptotically linear in eta).  Raises SweepDivergenceError when the
    extrapolations from the last two height pairs still differ by more
    than 10 percent; a small floor tied to the family scale keeps exact
    zeros (no measure in the window) from tripping the relative test.
    """
    if isinstance(family, HerglotzRep):
        if any(a == t or b == t for t in family.measure.locations):
            raise PoleError("interval endpoints must avoid atom locations")
        family = FamilyEvaluator.from_rep(family)
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError("need a < b")
    etas = tuple(sorted((float(e) for e in etas), reverse=True))
    if len(etas) < 3:
        raise ValueError("eta sweep needs at least three heights")

    estimates = []
    for eta in etas:
        val, _ = quad_vec(
            lambda x: matnum.imag_part(family(complex(x, eta))),
            a,
            b,
            epsabs=quad_tol,
            epsrel=quad_tol,
            limit=400,
        )
        estimates.append(val / np.pi)

    def extrapolate(i: int) -> np.ndarray:
        prev, last = estimates[i - 1], estimates[i]
        return last + (last - prev) * (etas[i] / (etas[i - 1] - etas[i]))

    older, final = extrapolate(len(etas) - 2), extrapolate(len(etas) - 1)
    floor = 1e-6 * (1.0 + matnum.spectral_norm(matnum.imag_part(family(1j))))
    drift = matnum.spectral_norm(final - older)
    if drift > 0.10 * matnum.spectral_norm(final) + floor:
        raise SweepDivergenceError(
            "eta-sweep has not settled; successive extrapolations differ by > 10%"
        )
    return final
