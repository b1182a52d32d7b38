"""Executable verifiers for the point-independence statements.

Each checker sweeps a z-grid and certifies that some spectral object of a
family or pair (an eigenspace at a real value, the kernel of the imaginary
part, a resolvent or boundedness flag, the multivalued part, a Schur-class
defect space) does not move with z.  Reports carry per-point scalar
witnesses and are deterministic given the grid; permuting the grid changes
neither the verdict nor the worst-case deviation.  Continuous spectrum has
no finite-dimensional instance, so it is emulated by a truncation sweep:
uniform-in-z decay of the smallest form eigenvalue along growing
dimensions, with Harnack-normalized ratios as the uniformity certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import analysis, herglotz, matnum, pairs
from .herglotz import FamilyEvaluator, HerglotzRep
from .matnum import DEFAULT_TOL, TolerancePolicy
from .pairs import RCOND_MIN, PairEvaluator

SUBSPACE_TOL = 1e-8
DEFAULT_CHECK_SEED = 20240817


def default_check_grid(
    n_random: int = 10, seed: int = DEFAULT_CHECK_SEED
) -> tuple[complex, ...]:
    """The 30-point deterministic grid plus seeded random spot checks."""
    base = herglotz.default_grid()
    if n_random <= 0:
        return base
    rng = np.random.default_rng(seed)
    extra = []
    for _ in range((n_random + 1) // 2):
        z = complex(rng.uniform(-3.0, 3.0), 10.0 ** rng.uniform(-1.0, 1.0))
        extra += [z, np.conj(z)]
    return base + tuple(extra[:n_random])


@dataclass
class InvarianceReport:
    """Outcome of one invariance statement over a grid."""

    statement: str
    grid: tuple[complex, ...]
    witnesses: list[dict]
    passed: bool
    worst: float
    notes: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for z, w in zip(self.grid, self.witnesses):
            row = {"z_re": z.real, "z_im": z.imag}
            row.update(w)
            out.append(row)
        return out


def _as_pair(obj) -> PairEvaluator:
    if isinstance(obj, PairEvaluator):
        return obj
    if isinstance(obj, (FamilyEvaluator, HerglotzRep)):
        return pairs.canonical_pair(obj)
    raise TypeError(f"expected a pair or family, got {type(obj)!r}")


def _offaxis(grid) -> tuple[complex, ...]:
    return tuple(complex(z) for z in grid if complex(z).imag != 0)


def _pairwise_worst(spans: list[np.ndarray]) -> float:
    worst = 0.0
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            worst = max(worst, matnum.subspace_distance(spans[i], spans[j]))
    return worst


def check_point_invariance(
    obj,
    a: float,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> InvarianceReport:
    """Eigenspace at a real value a is the same at every grid point.

    The space at z is {f : (f, a f) in the snapshot relation}, computed as
    Phi(z) applied to the null space of Psi(z) - a Phi(z).  Pass requires a
    constant dimension and pairwise subspace distances at most 1e-8.
    """
    pair = _as_pair(obj)
    a = float(a)
    grid = _offaxis(default_check_grid() if grid is None else grid)
    spans, witnesses = [], []
    for z in grid:
        phi, psi = pair(z)
        params = matnum.null_space(psi - a * phi, tol)
        span = matnum.range_space(phi @ params, tol)
        spans.append(span)
        witnesses.append({"eigenspace_dim": span.shape[1]})
    dims = {s.shape[1] for s in spans}
    if len(dims) > 1:
        for w, s in zip(witnesses, spans):
            w["distance"] = 1.0
        return InvarianceReport(
            "point-spectrum-invariance", grid, witnesses, False, 1.0,
            {"a": a, "reason": "dimension varies", "dims": sorted(dims)},
        )
    worst = _pairwise_worst(spans)
    for w, s in zip(witnesses, spans):
        w["distance"] = matnum.subspace_distance(s, spans[0])
    return InvarianceReport(
        "point-spectrum-invariance", grid, witnesses, worst <= SUBSPACE_TOL, worst,
        {"a": a, "dim": spans[0].shape[1]},
    )


def check_imag_kernel_invariance(
    family: FamilyEvaluator | HerglotzRep,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
    harnack_rtol: float = 1e-8,
) -> InvarianceReport:
    """Kernel of Im F(z) is z-independent; its positivity level is sandwiched.

    Below the axis the sign-folded part -Im F(z) = Im F(conj z) is used.
    Besides kernel constancy, the smallest eigenvalue must stay inside the
    Harnack corridor [c1 m(z0), c2 m(z0)] of the anchor (first grid point).
    """
    if isinstance(family, HerglotzRep):
        family = FamilyEvaluator.from_rep(family)
    grid = _offaxis(default_check_grid() if grid is None else grid)
    spans, lam_mins, witnesses = [], [], []
    for z in grid:
        h = matnum.imag_part(family(z)) * np.sign(z.imag)
        spans.append(matnum.null_space(h, tol))
        lam_mins.append(float(np.linalg.eigvalsh(matnum.herm_part(h))[0]))
        witnesses.append({"kernel_dim": spans[-1].shape[1], "lam_min": lam_mins[-1]})
    dims = {s.shape[1] for s in spans}
    if len(dims) > 1:
        return InvarianceReport(
            "imag-kernel-invariance", grid, witnesses, False, 1.0,
            {"reason": "dimension varies", "dims": sorted(dims)},
        )
    worst = _pairwise_worst(spans)
    for w, s in zip(witnesses, spans):
        w["distance"] = matnum.subspace_distance(s, spans[0])

    z0 = grid[0]
    fold = lambda z: z if z.imag > 0 else np.conj(z)
    m0 = lam_mins[0]
    scale = 1.0 + matnum.spectral_norm(matnum.imag_part(family(fold(z0))))
    corridor_worst = 0.0
    for z, m in zip(grid, lam_mins):
        hp = analysis.harnack_constants(fold(z0), fold(z))
        corridor_worst = max(
            corridor_worst, (hp.c1 * m0 - m) / scale, (m - hp.c2 * m0) / scale
        )
    passed = worst <= SUBSPACE_TOL and corridor_worst <= harnack_rtol
    return InvarianceReport(
        "imag-kernel-invariance", grid, witnesses, passed, max(worst, corridor_worst),
        {"dim": spans[0].shape[1], "corridor_worst": corridor_worst},
    )


def check_resolvent_invariance(
    obj,
    a: float,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> InvarianceReport:
    """Regularity of a real point is z-independent, cross-checked on C_+.

    The flag is invertibility of Psi(z) - a Phi(z); on upper points it must
    match invertibility of C(z) - alpha with alpha = (a - i)/(a + i), the
    Cayley image of a.
    """
    pair = _as_pair(obj)
    a = float(a)
    alpha = (a - 1j) / (a + 1j)
    grid = _offaxis(default_check_grid() if grid is None else grid)
    eye = np.eye(pair.dim, dtype=np.complex128)
    flags, witnesses = [], []
    ok_cross = True
    for z in grid:
        phi, psi = pair(z)
        block_scale = matnum.spectral_norm(pair.stacked(z)) * (1.0 + abs(a))
        smin = float(matnum.singular_values(psi - a * phi)[-1])
        flag = matnum.definitely_invertible(psi - a * phi, block_scale, RCOND_MIN)
        flags.append(flag)
        w = {"smin": smin, "regular": int(flag)}
        if z.imag > 0:
            c = pairs.cayley(pair, z)
            smin_c = float(matnum.singular_values(c - alpha * eye)[-1])
            w["smin_cayley"] = smin_c
            flag_c = matnum.definitely_invertible(c - alpha * eye, 2.0, RCOND_MIN)
            ok_cross = ok_cross and (flag_c == flag)
        witnesses.append(w)
    constant = len(set(flags)) == 1
    return InvarianceReport(
        "resolvent-invariance", grid, witnesses, constant and ok_cross,
        0.0 if (constant and ok_cross) else 1.0,
        {"a": a, "alpha_re": alpha.real, "alpha_im": alpha.imag,
         "regular": int(flags[0]) if constant else -1},
    )


def check_boundedness_invariance(
    obj,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> InvarianceReport:
    """Rank of Phi(z) (full rank = operator part bounded) is z-independent."""
    pair = _as_pair(obj)
    grid = _offaxis(default_check_grid() if grid is None else grid)
    ranks, witnesses = [], []
    for z in grid:
        phi, _ = pair(z)
        r = matnum.rank(phi, tol)
        ranks.append(r)
        witnesses.append({"phi_rank": r, "bounded": int(r == pair.dim)})
    constant = len(set(ranks)) == 1
    return InvarianceReport(
        "boundedness-invariance", grid, witnesses, constant,
        0.0 if constant else float(max(ranks) - min(ranks)),
        {"rank": ranks[0] if constant else -1, "dim": pair.dim},
    )


def check_mul_invariance(
    obj,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> InvarianceReport:
    """The multivalued part of the snapshot relation has a constant span."""
    pair = _as_pair(obj)
    grid = _offaxis(default_check_grid() if grid is None else grid)
    spans, witnesses = [], []
    for z in grid:
        phi, psi = pair(z)
        span = matnum.range_space(psi @ matnum.null_space(phi, tol), tol)
        spans.append(span)
        witnesses.append({"mul_dim": span.shape[1]})
    dims = {s.shape[1] for s in spans}
    if len(dims) > 1:
        return InvarianceReport(
            "mul-invariance", grid, witnesses, False, 1.0,
            {"reason": "dimension varies", "dims": sorted(dims)},
        )
    worst = _pairwise_worst(spans)
    for w, s in zip(witnesses, spans):
        w["distance"] = matnum.subspace_distance(s, spans[0])
    return InvarianceReport(
        "mul-invariance", grid, witnesses, worst <= SUBSPACE_TOL, worst,
        {"dim": spans[0].shape[1]},
    )


# -- classification of families presented by pairs ------------------------------

CLASS_FAMILY = "R~"


@dataclass(frozen=True)
class PairClassification:
    """Class label from the diagonal pair kernel, with invertibility witnesses."""

    label: str
    lam_min: float
    kernel_dim: int
    mul_dim: int
    rcond_phi: float
    rcond_psi: float

    def __str__(self) -> str:  # pragma: no cover
        return self.label


def classify_family_pair(
    pair: PairEvaluator,
    tol: TolerancePolicy = DEFAULT_TOL,
    z: complex = 1j,
) -> PairClassification:
    """Strictness classification at one point of the upper half-plane.

    Strict means the diagonal kernel N(z, z) has trivial null space;
    uniformly strict means it is definitely invertible, in which case both
    pair blocks carry invertibility certificates (their reciprocal
    condition numbers).  Non-strict families split into single-valued (R)
    and genuinely multivalued (R~) by the kernel of Phi.
    """
    z = complex(z)
    if z.imag <= 0:
        raise herglotz.DomainError("classification point must lie in C_+")
    phi, psi = pair(z)
    kern = matnum.herm_part(pairs.pair_kernel(pair, z, z, tol))
    lam_min = float(np.linalg.eigvalsh(kern)[0])
    kernel_dim = matnum.null_space(kern, tol).shape[1]
    mul_dim = matnum.null_space(phi, tol).shape[1]
    rc_phi, rc_psi = matnum.rcond(phi), matnum.rcond(psi)
    scale = 1.0 + matnum.spectral_norm(kern)
    if kernel_dim == 0 and lam_min >= 10.0 * tol.eps_psd * scale:
        label = herglotz.CLASS_UNIFORM
    elif kernel_dim == 0:
        label = herglotz.CLASS_STRICT
    elif mul_dim == 0:
        label = herglotz.CLASS_PLAIN
    else:
        label = CLASS_FAMILY
    return PairClassification(label, lam_min, kernel_dim, mul_dim, rc_phi, rc_psi)


# -- Schur-class maximum principle ----------------------------------------------


def maximum_principle_schur(
    schur: Callable[[complex], np.ndarray] | PairEvaluator,
    alpha: complex,
    grid: Sequence[complex] | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> InvarianceReport:
    """Defect space, its invertibility, and unimodular eigenspaces are frozen.

    For a contractive holomorphic C(z) on C_+ and |alpha| = 1 the checker
    verifies: the kernel of I - C(z)* C(z) has constant span, its
    invertibility flag is constant, ker(C(z) - alpha) has constant span,
    and regularity of alpha (witnessed by the smallest singular value of
    C(z) - alpha) holds at every point once it holds at one.
    """
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > 1e-12:
        raise ValueError("alpha must be unimodular")
    fn = (lambda z: pairs.cayley(schur, z)) if isinstance(schur, PairEvaluator) else schur
    grid = tuple(z for z in (default_check_grid() if grid is None else grid) if z.imag > 0)
    defect_spans, eig_spans, inv_flags, reg_flags, witnesses = [], [], [], [], []
    for z in grid:
        c = matnum.as_matrix(fn(z))
        eye = np.eye(c.shape[0], dtype=np.complex128)
        defect = eye - c.conj().T @ c
        defect_spans.append(matnum.null_space(defect, tol))
        eig_spans.append(matnum.null_space(c - alpha * eye, tol))
        inv_flags.append(matnum.definitely_invertible(defect, 2.0, RCOND_MIN))
        smin = float(matnum.singular_values(c - alpha * eye)[-1])
        reg_flags.append(matnum.definitely_invertible(c - alpha * eye, 2.0, RCOND_MIN))
        witnesses.append(
            {
                "defect_kernel_dim": defect_spans[-1].shape[1],
                "alpha_kernel_dim": eig_spans[-1].shape[1],
                "defect_invertible": int(inv_flags[-1]),
                "smin_alpha": smin,
            }
        )
    ok_dims = (
        len({s.shape[1] for s in defect_spans}) == 1
        and len({s.shape[1] for s in eig_spans}) == 1
    )
    worst = 1.0
    if ok_dims:
        worst = max(_pairwise_worst(defect_spans), _pairwise_worst(eig_spans))
    constant_flags = len(set(inv_flags)) == 1 and len(set(reg_flags)) == 1
    passed = ok_dims and constant_flags and worst <= SUBSPACE_TOL
    return InvarianceReport(
        "schur-maximum-principle", grid, witnesses, passed, worst,
        {"alpha_re": alpha.real, "alpha_im": alpha.imag,
         "alpha_regular": int(reg_flags[0]) if constant_flags else -1},
    )


# -- truncation sweep emulating continuous spectrum -----------------------------


@dataclass
class SweepReport:
    """Smallest form eigenvalue along a truncation sweep, with ratio checks."""

    n_list: tuple[int, ...]
    grid: tuple[complex, ...]
    sigma_min: dict  # (n, z) -> float
    monotone: bool
    ratio_worst: float
    ratios_ok: bool
    decay_verdict: str  # "decay" | "no-decay" | "mixed"
    passed: bool

    def rows(self) -> list[dict]:
        out = []
        for n in self.n_list:
            for z in self.grid:
                out.append(
                    {"n": n, "z_re": z.real, "z_im": z.imag,
                     "sigma_min": self.sigma_min[(n, z)]}
                )
        return out


def sweep_continuous_spectrum(
    family_sequence: Callable[[int], FamilyEvaluator],
    n_list: Sequence[int],
    grid: Sequence[complex] | None = None,
    z0: complex | None = None,
    trials: int = 100,
    rng: np.random.Generator | None = None,
    ratio_rtol: float = 1e-9,
) -> SweepReport:
    """Uniform-in-z decay of sigma_min(Im F_n(z)) along growing truncations.

    For each dimension n in the strictly increasing n_list and each grid
    point, the smallest eigenvalue of the folded imaginary part is
    recorded; the sweep passes when it is nonincreasing in n at every z and
    the Harnack-normalized form ratios t_n(z)[u] / t_n(z0)[u] stay inside
    [c1, c2] for random unit vectors.  A non-monotone sweep is reported,
    not fatal by itself for the ratio verdict.
    """
    n_list = tuple(int(n) for n in n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or not n_list:
        raise ValueError("n_list must be nonempty and strictly increasing")
    grid = _offaxis(herglotz.default_grid() if grid is None else grid)
    upper = [z for z in grid if z.imag > 0]
    z0 = upper[0] if z0 is None else complex(z0)
    rng = np.random.default_rng(0) if rng is None else rng

    sigma = {}
    ratio_worst = 0.0
    for n in n_list:
        family = family_sequence(n)
        if family.dim != n:
            raise ValueError(f"family_sequence({n}) produced dim {family.dim}")
        ims = {}
        for z in grid:
            h = matnum.herm_part(matnum.imag_part(family(z)) * np.sign(z.imag))
            ims[z] = h
            sigma[(n, z)] = float(np.linalg.eigvalsh(h)[0])
        im0 = matnum.imag_part(family(z0))
        us = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))
        us /= np.linalg.norm(us, axis=1, keepdims=True)
        t0 = np.real(np.einsum("ti,ij,tj->t", us.conj(), im0, us))
        for z in upper:
            if z == z0:
                continue
            hp = analysis.harnack_constants(z0, z)
            tz = np.real(np.einsum("ti,ij,tj->t", us.conj(), matnum.imag_part(family(z)), us))
            scale = np.maximum(np.maximum(np.abs(t0), np.abs(tz)), 1e-300)
            viol = np.maximum(hp.c1 * t0 - tz, tz - hp.c2 * t0) / scale
            ratio_worst = max(ratio_worst, float(np.max(viol)))

    slack = 1e-12
    monotone = all(
        all(
            sigma[(b, z)] <= sigma[(a, z)] + slack * (1.0 + abs(sigma[(a, z)]))
            for a, b in zip(n_list, n_list[1:])
        )
        for z in grid
    )
    decays = [
        sigma[(n_list[-1], z)] <= 0.5 * sigma[(n_list[0], z)] + 1e-300 for z in grid
    ]
    verdict = "decay" if all(decays) else ("no-decay" if not any(decays) else "mixed")
    ratios_ok = ratio_worst <= ratio_rtol
    return SweepReport(
        n_list, grid, sigma, monotone, ratio_worst, ratios_ok,
        verdict, monotone and ratios_ok and verdict == "decay",
    )
