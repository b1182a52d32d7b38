"""Harnack constants, quadratic-form stability, additive splitting and decay.

The two-sided Harnack comparison

    c1 h(z1) <= h(z2) <= c2 h(z1)

is made computable for the cone of functions h(x + iy) = c y + integral of
the Poisson kernel P(z, t) = y / ((x - t)^2 + y^2) against a positive
measure; by the half-plane Herglotz representation this cone is exactly
the nonnegative harmonic functions.  The sharp constant is the supremum of
the pointwise Poisson-kernel ratio over the extended real line (the limit
at infinity equals the linear-term ratio), computed from the real roots of
an explicit quadratic.  On top of this: sandwich checks for the imaginary
part forms of a family, the additive split F = G + T into a function with
representation data plus a constant Hermitian operator, the sharp modulus
bound c2(z) = sup |1 + z t| / |t - z| with its weak / strong / factorized
consequences for the measure tail, and singular-value decay fitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import herglotz, matnum
from .herglotz import FamilyEvaluator, HerglotzRep
from .matnum import DEFAULT_TOL, TolerancePolicy


# -- Harnack constants --------------------------------------------------------


@dataclass(frozen=True)
class HarnackPair:
    """Two points in the upper half-plane with their comparison constants."""

    z1: complex
    z2: complex
    c1: float
    c2: float


def _poisson(z: complex, t: float) -> float:
    x, y = z.real, z.imag
    return y / ((x - t) ** 2 + y * y)


def _sup_poisson_ratio(z1: complex, z2: complex) -> float:
    """sup over the extended real line of P(z2, t) / P(z1, t).

    Stationary points solve the quadratic
    (x1-x2)(t-x1)(t-x2) + y2^2 (t-x1) - y1^2 (t-x2) = 0; t -> infinity
    contributes the limit y2/y1, which also covers the linear term of the
    cone.
    """
    x1, y1 = z1.real, z1.imag
    x2, y2 = z2.real, z2.imag

    def ratio(t: float) -> float:
        return (y2 / y1) * (((t - x1) ** 2 + y1 * y1) / ((t - x2) ** 2 + y2 * y2))

    best = y2 / y1
    a = x1 - x2
    b = -a * (x1 + x2) + (y2 * y2 - y1 * y1)
    c = a * x1 * x2 - y2 * y2 * x1 + y1 * y1 * x2
    if a != 0.0:
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            root = float(np.sqrt(disc))
            best = max(best, ratio((-b + root) / (2 * a)), ratio((-b - root) / (2 * a)))
    elif b != 0.0:
        best = max(best, ratio(-c / b))
    return best


def harnack_constants(z1: complex, z2: complex) -> HarnackPair:
    """Sharp constants with c1 h(z1) <= h(z2) <= c2 h(z1) on the cone.

    c2 takes the larger of the linear-term ratio and the Poisson-ratio
    supremum; c1 is the reciprocal of the constant with the roles of the
    points swapped, so c1(z1, z2) * c2(z2, z1) = 1 identically and equal
    points give (1, 1).
    """
    z1, z2 = complex(z1), complex(z2)
    if z1.imag <= 0 or z2.imag <= 0:
        raise herglotz.DomainError("Harnack constants need points in C_+")
    if z1 == z2:
        return HarnackPair(z1, z2, 1.0, 1.0)
    c2 = max(z2.imag / z1.imag, _sup_poisson_ratio(z1, z2))
    c1 = 1.0 / max(z1.imag / z2.imag, _sup_poisson_ratio(z2, z1))
    return HarnackPair(z1, z2, c1, c2)


def random_cone_function(
    rng: np.random.Generator, max_atoms: int = 6
) -> Callable[[complex], float]:
    """Random member of the cone: linear term plus finitely many Poisson kernels."""
    m = int(rng.integers(0, max_atoms + 1))
    locations = rng.uniform(-20.0, 20.0, m)
    masses = rng.uniform(0.0, 3.0, m)
    slope = float(rng.uniform(0.0, 2.0))

    def h(z: complex) -> float:
        val = slope * z.imag
        for t, mu in zip(locations, masses):
            val += mu * _poisson(z, t)
        return val

    return h


def certify_harnack(
    z1: complex,
    z2: complex,
    trials: int = 1000,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst relative sandwich violation over random cone functions."""
    rng = np.random.default_rng(0) if rng is None else rng
    pair = harnack_constants(z1, z2)
    worst = 0.0
    for _ in range(trials):
        h = random_cone_function(rng)
        h1, h2 = h(pair.z1), h(pair.z2)
        scale = max(h1, h2, 1e-300)
        worst = max(worst, (pair.c1 * h1 - h2) / scale, (h2 - pair.c2 * h1) / scale)
    return worst


# -- quadratic forms of the imaginary part ------------------------------------


@dataclass(frozen=True)
class FormSample:
    """Value of the imaginary-part form at one point and vector."""

    z: complex
    u: np.ndarray
    value: float


def form_value(family: FamilyEvaluator, z: complex, u) -> FormSample:
    z = complex(z)
    if z.imag <= 0:
        raise herglotz.DomainError("form samples live in C_+")
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    im = matnum.imag_part(family(z))
    value = float(np.real(u.conj() @ (im @ u)))
    scale = 1.0 + matnum.spectral_norm(im) * float(np.real(u.conj() @ u))
    if value < -DEFAULT_TOL.eps_psd * scale:
        raise ValueError(f"form value {value:.3e} negative beyond tolerance")
    return FormSample(z, u, value)


@dataclass(frozen=True)
class FormSandwichReport:
    z0: complex
    grid: tuple[complex, ...]
    trials: int
    worst_violation: float
    passed: bool


def form_sandwich_check(
    family: FamilyEvaluator | HerglotzRep,
    grid: Sequence[complex] | None = None,
    z0: complex = 1j,
    trials: int = 100,
    rng: np.random.Generator | None = None,
    rtol: float = 1e-10,
) -> FormSandwichReport:
    """Harnack sandwich for the forms u* Im F(z) u against the anchor z0."""
    if isinstance(family, HerglotzRep):
        family = FamilyEvaluator.from_rep(family)
    rng = np.random.default_rng(0) if rng is None else rng
    zs = tuple(z for z in (herglotz.upper_grid() if grid is None else grid) if z.imag > 0)
    im0 = matnum.imag_part(family(complex(z0)))
    ims = {z: matnum.imag_part(family(z)) for z in zs}
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(family.dim) + 1j * rng.standard_normal(family.dim)
        u /= np.linalg.norm(u)
        t0 = float(np.real(u.conj() @ (im0 @ u)))
        for z in zs:
            pair = harnack_constants(complex(z0), z)
            tz = float(np.real(u.conj() @ (ims[z] @ u)))
            scale = max(abs(t0), abs(tz), 1e-300)
            worst = max(
                worst, (pair.c1 * t0 - tz) / scale, (tz - pair.c2 * t0) / scale
            )
    return FormSandwichReport(complex(z0), zs, trials, worst, worst <= rtol)


# -- additive splitting F = G + T ----------------------------------------------


@dataclass(frozen=True)
class SplitResult:
    g_rep: HerglotzRep
    t_constant: np.ndarray
    constancy: float
    hermitian_residual: float
    passed: bool


def split_bounded_imag(
    family: FamilyEvaluator,
    grid: Sequence[complex] | None = None,
    rtol: float = 1e-8,
) -> SplitResult:
    """Split F = G + T with G rebuilt from representation data, T constant.

    G is the function with the family's own Poisson data (B0, B1, measure);
    the difference T(z) = F(z) - G(z) is evaluated on the grid and must be
    z-independent and Hermitian, which certifies the split.  Requires
    representation access; see ``split_black_box`` for the degraded mode.
    """
    if family.rep is None:
        raise ValueError("split needs representation data; use split_black_box")
    g = family.rep
    zs = tuple(herglotz.default_grid() if grid is None else grid)
    values = [family(z) - herglotz.evaluate(g, z) for z in zs]
    mean = sum(values) / len(values)
    scale = 1.0 + matnum.spectral_norm(mean)
    constancy = max(matnum.spectral_norm(v - mean) for v in values) / scale
    herm_res = matnum.spectral_norm(mean - mean.conj().T) / scale
    t_const = matnum.herm_part(mean)
    passed = constancy <= rtol and herm_res <= rtol
    return SplitResult(g, t_const, constancy, herm_res, passed)


def split_black_box(
    family: FamilyEvaluator,
    atom_windows: Sequence[tuple[float, float]],
    grid: Sequence[complex] | None = None,
    rtol: float = 1e-2,
    far_height: float = 1e6,
) -> SplitResult:
    """Degraded split for black-box families, via Stieltjes inversion.

    Atom weights come from inverting the imaginary part over each window
    and locations from the first-moment ratio; the linear coefficient from
    the far-field value Im F(i Y) / Y.  The Hermitian rest is lumped into
    T.  Tolerances are relaxed to 1e-2.
    """
    dim = family.dim
    weights, locations = [], []
    for a, b in atom_windows:
        w = herglotz.stieltjes_invert(family, a, b)
        moment = _first_moment(family, a, b)
        mass = float(np.real(np.trace(w)))
        if mass <= 1e-12:
            continue
        locations.append(float(np.real(np.trace(moment))) / mass)
        weights.append(matnum.herm_part(w))
    b1 = matnum.herm_part(matnum.imag_part(family(1j * far_height)) / far_height)
    ok, lam = matnum.is_psd(b1, TolerancePolicy(eps_psd=1e-4, eps_rank=1e-8, eps_eq=1e-4))
    if not ok:
        raise ValueError(f"recovered linear coefficient not PSD ({lam:.3e})")
    b1 = _clip_psd(b1)
    atoms = [(t, _clip_psd(w)) for t, w in zip(locations, weights)]
    g = HerglotzRep.create(np.zeros((dim, dim)), b1, atoms if atoms else None)

    zs = tuple(herglotz.default_grid() if grid is None else grid)
    values = [family(z) - herglotz.evaluate(g, z) for z in zs]
    mean = sum(values) / len(values)
    scale = 1.0 + matnum.spectral_norm(mean)
    constancy = max(matnum.spectral_norm(v - mean) for v in values) / scale
    herm_res = matnum.spectral_norm(mean - mean.conj().T) / scale
    passed = constancy <= rtol and herm_res <= rtol
    return SplitResult(g, matnum.herm_part(mean), constancy, herm_res, passed)


def _first_moment(family: FamilyEvaluator, a: float, b: float) -> np.ndarray:
    from scipy.integrate import quad_vec

    etas = (1e-3, 1e-4)
    vals = []
    for eta in etas:
        v, _ = quad_vec(
            lambda x: x * matnum.imag_part(family(complex(x, eta))),
            a,
            b,
            epsabs=1e-10,
            epsrel=1e-10,
            limit=400,
        )
        vals.append(v / np.pi)
    return vals[-1] + (vals[-1] - vals[-2]) * (etas[-1] / (etas[-2] - etas[-1]))


def _clip_psd(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(matnum.herm_part(h))
    return (v * np.maximum(w, 0.0)) @ v.conj().T


# -- modulus bound c2(z) and measure-tail estimates ----------------------------


def c2_of(z: complex) -> float:
    """Supremum of |1 + z t| / |t - z| over the extended real line.

    Stationary points of the squared ratio solve x t^2 - (|z|^2 - 1) t - x
    = 0 (z = x + iy); the limit at infinity contributes |z|.  The value at
    z = i is exactly 1.
    """
    z = complex(z)
    if z.imag <= 0:
        raise herglotz.DomainError("c2 is defined for Im z > 0")

    def val(t: float) -> float:
        return abs(1.0 + z * t) / abs(t - z)

    best = abs(z)
    a = z.real
    b = -(abs(z) ** 2 - 1.0)
    c = -z.real
    if a != 0.0:
        disc = b * b - 4.0 * a * c
        root = float(np.sqrt(disc))  # disc = b^2 + 4x^2 >= 0 always
        best = max(best, val((-b + root) / (2 * a)), val((-b - root) / (2 * a)))
    elif b != 0.0:
        best = max(best, val(-c / b))
    return best


def _measure_tail(rep: HerglotzRep, z: complex) -> np.ndarray:
    """F(z) - B1 z - B0, the part of the function carried by the measure."""
    return herglotz.evaluate(rep, z) - rep.b1 * complex(z) - rep.b0


@dataclass(frozen=True)
class BoundReport:
    z: complex
    bound: float
    worst_ratio: float
    violations: int
    passed: bool


def weak_strong_check(
    rep: HerglotzRep,
    z: complex,
    trials: int = 50,
    rng: np.random.Generator | None = None,
    rtol: float = 1e-9,
) -> BoundReport:
    """Vector bound ||(F(z) - B1 z - B0) u|| <= c2(z) ||K^(1/2)|| ||K^(1/2) u||."""
    z = complex(z)
    rng = np.random.default_rng(0) if rng is None else rng
    c2 = c2_of(z)
    k = rep.measure.k_sigma()
    w, v = np.linalg.eigh(matnum.herm_part(k))
    k_half = (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T
    k_half_norm = matnum.spectral_norm(k_half)
    tail = _measure_tail(rep, z)
    worst, violations = 0.0, 0
    for _ in range(trials):
        u = rng.standard_normal(rep.dim) + 1j * rng.standard_normal(rep.dim)
        u /= np.linalg.norm(u)
        lhs = float(np.linalg.norm(tail @ u))
        rhs = c2 * k_half_norm * float(np.linalg.norm(k_half @ u))
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs <= 1e-300 else np.inf)
        worst = max(worst, ratio)
        if lhs > rhs * (1.0 + rtol) + 1e-300:
            violations += 1
    return BoundReport(z, c2, worst, violations, violations == 0)


def factor_check(
    rep: HerglotzRep,
    z: complex,
    tol: TolerancePolicy = DEFAULT_TOL,
    rtol: float = 1e-9,
) -> BoundReport:
    """Operator bound ||K^(-1/2) (F(z) - B1 z - B0) K^(-1/2)|| <= c2(z).

    The middle factor is formed on the range of K (eigen-truncation at the
    rank cutoff); the measure tail lives on that range, so the compression
    loses nothing.
    """
    z = complex(z)
    c2 = c2_of(z)
    k = matnum.herm_part(rep.measure.k_sigma())
    w, v = np.linalg.eigh(k)
    wmax = float(w[-1]) if w.size else 0.0
    keep = w > tol.eps_rank * max(wmax, 1e-300)
    if not np.any(keep):
        return BoundReport(z, c2, 0.0, 0, True)
    vr = v[:, keep]
    dr = w[keep]
    tail = _measure_tail(rep, z)
    middle = (vr / np.sqrt(dr)).conj().T @ tail @ (vr / np.sqrt(dr))
    norm = matnum.spectral_norm(middle)
    passed = norm <= c2 * (1.0 + rtol)
    return BoundReport(z, c2, norm / c2 if c2 > 0 else norm, 0 if passed else 1, passed)


# -- singular-value decay -------------------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    grid: tuple[complex, ...]
    slopes: tuple[float, ...]
    spread: float
    decaying: bool
    passed: bool


def fit_log_slope(js: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log(values) against log(j)."""
    mask = values > 1e-14
    if mask.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(js[mask].astype(float)), np.log(values[mask]), 1)[0])


def schatten_decay(
    family: FamilyEvaluator,
    grid: Sequence[complex] | None = None,
    j_range: Sequence[int] | None = None,
    spread_tol: float = 0.1,
) -> DecayReport:
    """Fitted exponent of s_j(F(z)) over the middle third of j_range, per z.

    The verdict is invariance of the exponent across the grid (spread at
    most 0.1); ``decaying`` records whether any decay was seen at all.
    """
    zs = tuple(herglotz.upper_grid() if grid is None else grid)
    if j_range is None:
        j_range = range(1, min(family.dim, max(2, family.dim // 2)) + 1)
    js = np.asarray(sorted(j_range), dtype=int)
    if js[0] < 1 or js[-1] > family.dim:
        raise ValueError("j_range must lie within [1, dim]")
    third = len(js) // 3
    window = js[third : max(third + 1, 2 * third)] if len(js) >= 3 else js
    slopes = []
    for z in zs:
        s = matnum.singular_values(family(z))
        slopes.append(fit_log_slope(window, s[window - 1]))
    spread = max(slopes) - min(slopes) if slopes else 0.0
    decaying = any(m < -0.05 for m in slopes)
    return DecayReport(zs, tuple(slopes), spread, decaying, spread <= spread_tol)
