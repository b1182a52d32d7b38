"""Builders for the showcase families consumed by the verifiers.

Two discretized boundary-value families on a grid of step h = length / n
(second-order differences, boundary data folded into the first row, the
far end eliminated by a Dirichlet condition):

  halfline-robin          F(z) = K / h^2 + (phi(z) / h) e00
  dissipative-interval    G(z) = (i sign(Im z)) K / h^2 + (phi(z) / h) e00

with K the real stiffness matrix (free end first, Dirichlet end last) and
phi a scalar function of the Herglotz class.  The z-dependence sits in the
single corner entry; the imaginary part of G is K / h^2 + Im phi(z)/h e00,
so the interval family is dissipative with spectrum discrete at every
fixed n, and the inverse shows quadratic singular-value decay.  The sign
flip below the axis realizes the required symmetry G(conj z) = G(z)*.

The third construction pairs a positive diagonal B with decaying entries
against a bounded perturbation C = I + sS:

  M(z) = B^(1/2) (C - 1/z) B^(1/2),       F(z) = -M(z)^(-1),

whose solves degrade like 1 / b_n, the truncation shadow of an unbounded
function with moving domains; the form of Im F factors through B^(-1/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import analysis, herglotz, matnum
from .herglotz import FamilyEvaluator, HerglotzRep

VARIANT_HALFLINE = "halfline-robin"
VARIANT_INTERVAL = "dissipative-interval"
VARIANT_DISS_HALFLINE = "dissipative-halfline"  # interval stencil on [0, L]

_VARIANTS = (VARIANT_HALFLINE, VARIANT_INTERVAL, VARIANT_DISS_HALFLINE)


@dataclass(frozen=True)
class SturmLiouvilleConfig:
    """Grid size, interval length, boundary coefficient and stencil variant.

    phi is a scalar (1 x 1) function given by representation data; None
    selects the Dirichlet-Dirichlet stencil with no boundary coefficient
    (a z-constant family).
    """

    n: int
    phi: HerglotzRep | None
    length: float = 1.0
    variant: str = VARIANT_INTERVAL

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need n >= 8 grid points")
        if self.phi is not None and self.phi.dim != 1:
            raise ValueError("boundary coefficient must be scalar (dim 1)")
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


def _stiffness(n: int, free_first: bool) -> np.ndarray:
    k = np.zeros((n, n))
    idx = np.arange(n)
    k[idx, idx] = 2.0
    k[idx[:-1], idx[:-1] + 1] = -1.0
    k[idx[1:], idx[1:] - 1] = -1.0
    if free_first:
        k[0, 0] = 1.0
    return k


def _phi_value(config: SturmLiouvilleConfig, z: complex) -> complex:
    if config.phi is None:
        return 0.0 + 0.0j
    return complex(herglotz.evaluate(config.phi, z)[0, 0])


def build_interval_family(config: SturmLiouvilleConfig) -> FamilyEvaluator:
    """Dissipative-interval family (i K / h^2 with the Robin corner term).

    Only the (1, 1) entry moves with z; the imaginary part for Im z > 0 is
    K / h^2 + (Im phi(z) / h) e00, which is PSD since phi maps C_+ to
    closed C_+.
    """
    if config.variant not in (VARIANT_INTERVAL, VARIANT_DISS_HALFLINE):
        raise ValueError("interval builder needs a dissipative variant")
    n = config.n
    h = config.length / n
    k = _stiffness(n, free_first=config.phi is not None)

    def fn(z: complex) -> np.ndarray:
        sign = 1.0 if z.imag > 0 else -1.0
        out = (sign * 1j / h**2) * k.astype(np.complex128)
        out[0, 0] += _phi_value(config, z) / h
        return out

    return FamilyEvaluator(n, fn, "interval-example", label=config.variant)


def build_halfline_family(config: SturmLiouvilleConfig) -> FamilyEvaluator:
    """Truncated half-line Robin family K / h^2 + (phi(z)/h) e00.

    A hard truncation at x = length stands in for the half-line; the
    spectrum fills the positive axis only along an (n, length) sweep, see
    ``halfline_gap_sweep``.
    """
    if config.variant != VARIANT_HALFLINE:
        raise ValueError("halfline builder needs variant halfline-robin")
    n = config.n
    h = config.length / n
    k = _stiffness(n, free_first=config.phi is not None) / h**2

    def fn(z: complex) -> np.ndarray:
        out = k.astype(np.complex128).copy()
        out[0, 0] += _phi_value(config, z) / h
        return out

    return FamilyEvaluator(n, fn, "halfline-example", label=config.variant)


def build_family(config: SturmLiouvilleConfig) -> FamilyEvaluator:
    if config.variant == VARIANT_HALFLINE:
        return build_halfline_family(config)
    return build_interval_family(config)


def decay_exponent(
    family: FamilyEvaluator,
    z: complex,
    window: tuple[int, int] | None = None,
) -> float:
    """Fitted slope of log s_j(G(z)^(-1)) against log j over [n/8, n/3]."""
    z = complex(z)
    if z.imag == 0:
        raise herglotz.DomainError("decay exponent needs z off the real axis")
    n = family.dim
    lo, hi = window if window is not None else (max(1, n // 8), max(2, n // 3))
    inv = matnum.inverse(family(z), rcond_min=1e-15)
    s = matnum.singular_values(inv)
    js = np.arange(lo, hi + 1)
    return analysis.fit_log_slope(js, s[js - 1])


def halfline_gap_sweep(
    phi: HerglotzRep | None,
    a_values: Sequence[float],
    n_list: Sequence[int],
    h: float = 0.1,
    zs: Sequence[complex] = (1j,),
) -> list[dict]:
    """Distance from real points a >= 0 to the truncated half-line spectrum.

    The interval [0, L] grows with n (L = n h at fixed step h), so the
    eigenvalue spacing near a shrinks and sigma_min(F_n(z) - a) decays for
    every z simultaneously.  Returns one row per (n, z, a).
    """
    rows = []
    for n in n_list:
        config = SturmLiouvilleConfig(n=n, phi=phi, length=n * h, variant=VARIANT_HALFLINE)
        family = build_halfline_family(config)
        for z in zs:
            fz = family(complex(z))
            for a in a_values:
                smin = float(
                    matnum.singular_values(fz - float(a) * np.eye(n))[-1]
                )
                rows.append({"n": n, "z_re": complex(z).real, "z_im": complex(z).imag,
                             "a": float(a), "gap": smin})
    return rows


# -- decaying-diagonal construction ---------------------------------------------


@dataclass(frozen=True)
class Ex4AConfig:
    """Dimension, diagonal decay rule and perturbation scale for C = I + sS."""

    n: int
    b_decay: Sequence[float] | None = None  # default 2^-j, floored
    c_perturbation: float = 0.0
    seed: int = 0
    b_floor: float = 1e-6

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        if not (0.0 <= self.c_perturbation < 0.9):
            raise ValueError("perturbation scale must lie in [0, 0.9)")

    def b_values(self) -> np.ndarray:
        if self.b_decay is None:
            raw = 2.0 ** (-np.arange(1, self.n + 1, dtype=float))
        else:
            raw = np.asarray(list(self.b_decay), dtype=float)
            if raw.shape != (self.n,):
                raise ValueError("b_decay must provide n values")
            if np.any(np.diff(raw) >= 0):
                raise ValueError("b_decay must be strictly decreasing")
            if np.any(raw <= 0):
                raise ValueError("b_decay must be positive")
        return np.maximum(raw, self.b_floor)


@dataclass(frozen=True)
class Ex4A:
    """Built families and data: M(z), F(z) = -M(z)^(-1), diagonal b, matrix C."""

    config: Ex4AConfig
    b: np.ndarray
    c: np.ndarray
    m_family: FamilyEvaluator
    f_family: FamilyEvaluator
    f_tilde: FamilyEvaluator  # -(C - 1/z)^(-1), uniformly strict


def build_ex4a(config: Ex4AConfig) -> Ex4A:
    n = config.n
    b = config.b_values()
    rng = np.random.default_rng(config.seed)
    if config.c_perturbation > 0:
        s = matnum.herm_part(
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        s /= matnum.spectral_norm(s)
        c = np.eye(n) + config.c_perturbation * s
    else:
        c = np.eye(n, dtype=np.complex128)
    b_sqrt = np.sqrt(b)

    def m_fn(z: complex) -> np.ndarray:
        return (b_sqrt[:, None] * (c - np.eye(n) / z)) * b_sqrt[None, :]

    def f_tilde_fn(z: complex) -> np.ndarray:
        return -matnum.inverse(c - np.eye(n) / z, rcond_min=1e-15)

    def f_fn(z: complex) -> np.ndarray:
        return (f_tilde_fn(z) / b_sqrt[:, None]) / b_sqrt[None, :]

    return Ex4A(
        config,
        b,
        c,
        FamilyEvaluator(n, m_fn, "ex4a-m"),
        FamilyEvaluator(n, f_fn, "ex4a-f"),
        FamilyEvaluator(n, f_tilde_fn, "ex4a-f-tilde"),
    )


def solve_conditioning(ex: Ex4A, z: complex) -> float:
    """Reciprocal condition of the solve behind F(z); decays like b_n."""
    return matnum.rcond(ex.m_family(complex(z)))


@dataclass(frozen=True)
class FormDomainReport:
    z0: complex
    grid: tuple[complex, ...]
    bounds: tuple[tuple[float, float], ...]  # (c1, c2) per grid point
    extremes: tuple[tuple[float, float], ...]  # generalized eigenvalue range
    worst_violation: float
    passed: bool


def form_domain_report(
    ex: Ex4A,
    grid: Sequence[complex] | None = None,
    z0: complex = 1j,
    n_vectors: int | None = None,
    rng: np.random.Generator | None = None,
    rtol: float = 1e-8,
) -> FormDomainReport:
    """Harnack comparison of the imaginary-part forms on a common test space.

    Test vectors are B^(1/2) images of an orthonormal set, the natural
    domain of the forms; the generalized eigenvalues of the Gram pair
    (Q(z), Q(z0)) must land inside [c1, c2], which is the desk-scale
    reading of a z-independent form domain with equivalent norms.
    """
    rng = np.random.default_rng(1) if rng is None else rng
    n = ex.config.n
    m = n if n_vectors is None else min(n_vectors, n)
    v = np.linalg.qr(rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))[0]
    test = np.sqrt(ex.b)[:, None] * v
    zs = tuple(z for z in (herglotz.upper_grid() if grid is None else grid) if z.imag > 0)
    z0 = complex(z0)

    def gram(z: complex) -> np.ndarray:
        return matnum.herm_part(test.conj().T @ matnum.imag_part(ex.f_family(z)) @ test)

    q0 = gram(z0)
    w0, v0 = np.linalg.eigh(q0)
    if w0[0] <= 0:
        raise ValueError("anchor form is numerically singular on the test space")
    q0_isqrt = (v0 / np.sqrt(w0)) @ v0.conj().T
    bounds, extremes = [], []
    worst = 0.0
    for z in zs:
        hp = analysis.harnack_constants(z0, z)
        w = np.linalg.eigvalsh(matnum.herm_part(q0_isqrt @ gram(z) @ q0_isqrt))
        lo, hi = float(w[0]), float(w[-1])
        bounds.append((hp.c1, hp.c2))
        extremes.append((lo, hi))
        scale = max(hi, hp.c2)
        worst = max(worst, (hp.c1 - lo) / scale, (hi - hp.c2) / scale)
    return FormDomainReport(z0, zs, tuple(bounds), tuple(extremes), worst, worst <= rtol)
