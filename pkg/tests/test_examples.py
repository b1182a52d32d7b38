import numpy as np
import pytest

from conftest import cgauss, random_upper
from nevlab import examples, herglotz, matnum
from nevlab.examples import Ex4AConfig, SturmLiouvilleConfig
from nevlab.herglotz import HerglotzRep


def phi_linear():
    return HerglotzRep.create([[0.0]], [[1.0]])  # phi(z) = z


def phi_zero():
    return HerglotzRep.create([[0.0]], [[0.0]])


class TestIntervalFamily:
    def test_shape_and_single_moving_entry(self):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=8, phi=phi_linear())
        )
        a, b = fam(1j), fam(2 + 3j)
        assert a.shape == (8, 8)
        diff = a - b
        diff[0, 0] = 0.0
        assert matnum.spectral_norm(diff) == 0.0

    def test_neumann_constant_in_upper_half_plane(self, rng):
        fam = examples.build_interval_family(SturmLiouvilleConfig(n=8, phi=phi_zero()))
        zs = random_upper(rng, 4)
        base = fam(zs[0])
        for z in zs[1:]:
            assert matnum.spectral_norm(fam(z) - base) == 0.0

    def test_dissipative_forms(self, rng):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=16, phi=phi_linear())
        )
        for z in random_upper(rng, 5):
            im = matnum.imag_part(fam(z))
            for _ in range(20):
                u = cgauss(rng, 16)
                assert np.real(u.conj() @ im @ u) >= -1e-10 * np.real(u.conj() @ u)

    def test_family_symmetry_and_membership(self):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=12, phi=phi_linear())
        )
        assert fam.symmetry_residual() <= 1e-12
        assert herglotz.classify(fam).label != "not-R"

    def test_no_real_spectrum_at_fixed_size(self):
        # discrete spectrum sits on the dissipative side; real points stay regular
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=32, phi=phi_linear())
        )
        f = fam(1j)
        for a in (1.0, 10.0, 100.0):
            smin = matnum.singular_values(f - a * np.eye(32))[-1]
            assert smin > 1e-2

    def test_imag_part_gaps_persist_across_z(self, rng):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=16, phi=phi_linear())
        )
        gaps = []
        for z in random_upper(rng, 4):
            w = np.linalg.eigvalsh(matnum.herm_part(matnum.imag_part(fam(z))))
            gaps.append(np.min(np.diff(w)))
        assert min(gaps) > 0


class TestDecayExponent:
    def test_interval_slope_at_n400(self):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=400, phi=phi_linear())
        )
        slope = examples.decay_exponent(fam, 1j)
        assert -2.1 <= slope <= -1.9

    def test_slope_invariant_across_z(self):
        fam = examples.build_interval_family(
            SturmLiouvilleConfig(n=400, phi=phi_linear())
        )
        s1 = examples.decay_exponent(fam, 1j)
        s2 = examples.decay_exponent(fam, 2 + 3j)
        assert abs(s1 - s2) <= 0.05

    def test_dirichlet_dirichlet_constant_family(self):
        fam = examples.build_interval_family(SturmLiouvilleConfig(n=400, phi=None))
        slope = examples.decay_exponent(fam, 1j)
        assert -2.1 <= slope <= -1.9

    def test_rejects_real_points(self):
        fam = examples.build_interval_family(SturmLiouvilleConfig(n=8, phi=phi_zero()))
        with pytest.raises(herglotz.DomainError):
            examples.decay_exponent(fam, 1.0)


class TestHalflineFamily:
    def test_nonhermitian_only_in_corner(self):
        config = SturmLiouvilleConfig(
            n=16, phi=phi_linear(), variant=examples.VARIANT_HALFLINE
        )
        fam = examples.build_halfline_family(config)
        f = fam(1j)
        skew = f - f.conj().T
        skew[0, 0] = 0.0
        assert matnum.spectral_norm(skew) == 0.0

    def test_symmetry_automatic(self):
        config = SturmLiouvilleConfig(
            n=16, phi=phi_linear(), variant=examples.VARIANT_HALFLINE
        )
        assert examples.build_halfline_family(config).symmetry_residual() <= 1e-13

    def test_gap_sweep_fills_positive_axis(self):
        rows = examples.halfline_gap_sweep(
            phi_linear(), a_values=[0.5, 2.0], n_list=[16, 32, 64, 128], h=0.1
        )
        for a in (0.5, 2.0):
            gaps = [r["gap"] for r in rows if r["a"] == a]
            assert all(b < x for x, b in zip(gaps, gaps[1:]))
            assert gaps[-1] < 0.5 * gaps[0]

    def test_gap_sweep_decays_for_every_z_simultaneously(self):
        zs = (1j, 2 + 0.5j, -1 + 3j)
        rows = examples.halfline_gap_sweep(
            phi_linear(), a_values=[0.5, 2.0], n_list=[16, 32, 64, 128, 256],
            h=0.1, zs=zs,
        )
        for z in zs:
            for a in (0.5, 2.0):
                gaps = [
                    r["gap"]
                    for r in rows
                    if r["a"] == a and r["z_re"] == z.real and r["z_im"] == z.imag
                ]
                assert gaps[-1] < 0.25 * gaps[0]
                assert gaps[-1] < 0.15

    def test_dissipative_halfline_combo_variant(self):
        config = SturmLiouvilleConfig(
            n=64, phi=phi_linear(), length=6.4,
            variant=examples.VARIANT_DISS_HALFLINE,
        )
        fam = examples.build_interval_family(config)
        assert fam.symmetry_residual() <= 1e-12
        assert herglotz.classify(fam).label != "not-R"

    def test_eigenvalue_fill_of_real_part(self):
        # Hermitian part spectrum approaches any a >= 0 as the box grows
        for n, bound in ((32, 1.0), (256, 0.2)):
            config = SturmLiouvilleConfig(
                n=n, phi=phi_zero(), length=n * 0.1, variant=examples.VARIANT_HALFLINE
            )
            w = np.linalg.eigvalsh(
                matnum.herm_part(examples.build_halfline_family(config)(1j))
            )
            assert np.min(np.abs(w - 2.0)) < bound


class TestEx4A:
    def test_scalar_closed_form(self):
        ex = examples.build_ex4a(Ex4AConfig(n=1, b_decay=[1.0]))
        np.testing.assert_allclose(ex.f_family(1j), [[-0.5 + 0.5j]], atol=1e-14)
        assert matnum.imag_part(ex.f_family(1j))[0, 0] == pytest.approx(0.5)

    def test_m_family_membership(self):
        ex = examples.build_ex4a(Ex4AConfig(n=8, c_perturbation=0.3, seed=2))
        assert herglotz.classify(ex.m_family).label != "not-R"
        assert ex.m_family.symmetry_residual() <= 1e-10

    def test_f_family_strict(self):
        ex = examples.build_ex4a(Ex4AConfig(n=8, c_perturbation=0.3, seed=2))
        assert herglotz.classify(ex.f_family).label in ("R^s", "R^u")

    def test_form_identity_through_weights(self, rng):
        ex = examples.build_ex4a(Ex4AConfig(n=6, c_perturbation=0.4, seed=5))
        b_sqrt = np.sqrt(ex.b)
        for z in random_upper(rng, 4):
            n_tilde = herglotz.nevanlinna_kernel(ex.f_tilde, z, z)
            im_f = matnum.imag_part(ex.f_family(z))
            for _ in range(5):
                v = cgauss(rng, 6)
                u = b_sqrt * v
                lhs = np.real(u.conj() @ im_f @ u) / z.imag
                rhs = np.real(v.conj() @ n_tilde @ v)
                assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_conditioning_tracks_diagonal_floor(self):
        config = Ex4AConfig(n=30, c_perturbation=0.2, seed=1)
        ex = examples.build_ex4a(config)
        rc = examples.solve_conditioning(ex, 1j)
        assert rc <= 10 * float(ex.b.min())
        assert rc > 0

    def test_diagonal_floor_applied(self):
        ex = examples.build_ex4a(Ex4AConfig(n=30))
        assert float(ex.b.min()) == pytest.approx(1e-6)

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            Ex4AConfig(n=4, c_perturbation=0.95)
        with pytest.raises(ValueError):
            examples.build_ex4a(Ex4AConfig(n=3, b_decay=[0.5, 0.5, 0.1]))


class TestFormDomainReport:
    def test_unperturbed_exact_proportionality(self):
        ex = examples.build_ex4a(Ex4AConfig(n=10, c_perturbation=0.0))
        report = examples.form_domain_report(ex)
        assert report.passed
        for (lo, hi) in report.extremes:
            assert hi - lo <= 1e-8 * hi  # all generalized eigenvalues coincide

    def test_perturbed_within_constants(self):
        ex = examples.build_ex4a(Ex4AConfig(n=30, c_perturbation=0.5, seed=9))
        report = examples.form_domain_report(ex)
        assert report.passed

    def test_bounds_contain_extremes(self):
        ex = examples.build_ex4a(Ex4AConfig(n=12, c_perturbation=0.4, seed=4))
        report = examples.form_domain_report(ex)
        for (c1, c2), (lo, hi) in zip(report.bounds, report.extremes):
            assert c1 * (1 - 1e-8) <= lo and hi <= c2 * (1 + 1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        SturmLiouvilleConfig(n=4, phi=None)
    with pytest.raises(ValueError):
        SturmLiouvilleConfig(n=8, phi=None, variant="unknown")
    with pytest.raises(ValueError):
        SturmLiouvilleConfig(n=8, phi=HerglotzRep.create(np.zeros((2, 2)), np.eye(2)))
