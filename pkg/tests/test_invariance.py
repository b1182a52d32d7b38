import numpy as np
import pytest

from conftest import (
    cgauss,
    mul_pair,
    random_rep,
    random_upper,
    rep_with_common_kernel,
    rep_with_pinned_eigenvalue,
)
from nevlab import herglotz, invariance, matnum, pairs
from nevlab.herglotz import FamilyEvaluator, HerglotzRep
from nevlab.matnum import TolerancePolicy


def scalar_family(fn):
    return FamilyEvaluator(1, lambda z: np.array([[fn(z)]]), "test")


DIAG_Z3 = lambda: FamilyEvaluator(2, lambda z: np.diag([z, 3.0 + 0j]), "test")
MUL = lambda: pairs.PairEvaluator.constant(np.zeros((1, 1)), np.eye(1))


class TestPointInvariance:
    def test_pinned_diagonal(self):
        report = invariance.check_point_invariance(DIAG_Z3(), 3.0)
        assert report.passed and report.notes["dim"] == 1
        assert report.worst <= 1e-8

    def test_vacuous_empty_eigenspace(self):
        report = invariance.check_point_invariance(scalar_family(lambda z: z), 0.0)
        assert report.passed and report.notes["dim"] == 0

    def test_random_projector_pinning(self, rng):
        q, _ = np.linalg.qr(cgauss(rng, 4, 4))
        p = q[:, :2] @ q[:, :2].conj().T
        fam = FamilyEvaluator(4, lambda z: z * p + 3.0 * (np.eye(4) - p), "test")
        report = invariance.check_point_invariance(fam, 3.0)
        assert report.passed and report.notes["dim"] == 2

    def test_unpinned_value_everywhere_empty(self, rng):
        fam = FamilyEvaluator.from_rep(random_rep(rng, 3))
        report = invariance.check_point_invariance(fam, 2.5)
        assert report.passed and report.notes["dim"] == 0

    def test_agrees_with_symmetric_core(self, rng):
        from nevlab import relations

        pair = pairs.canonical_pair(DIAG_Z3())
        report = invariance.check_point_invariance(pair, 3.0)
        assert report.passed
        for z in random_upper(rng, 3):
            core = relations.symmetric_core(pair, z)
            phi, psi = pair(z)
            params = matnum.null_space(psi - 3.0 * phi)
            lifted = np.vstack([phi @ params, psi @ params])
            assert relations.contains(
                relations.LinearRelation.from_span(lifted), core
            )


class TestImagKernelInvariance:
    def test_diagonal_kernel(self):
        rep = HerglotzRep.create(np.zeros((2, 2)), np.diag([1.0, 0.0]))
        report = invariance.check_imag_kernel_invariance(rep)
        assert report.passed and report.notes["dim"] == 1

    def test_uniform_no_kernel(self):
        fam = FamilyEvaluator(2, lambda z: z * np.eye(2), "test")
        report = invariance.check_imag_kernel_invariance(fam)
        assert report.passed and report.notes["dim"] == 0
        assert report.notes["corridor_worst"] <= 1e-10

    def test_constructed_common_kernel(self, rng):
        rep, _ = rep_with_common_kernel(rng)
        report = invariance.check_imag_kernel_invariance(rep)
        assert report.passed and report.notes["dim"] == 1


class TestResolventInvariance:
    def test_linear_family_regular_everywhere(self):
        report = invariance.check_resolvent_invariance(scalar_family(lambda z: z), 5.0)
        assert report.passed and report.notes["regular"] == 1

    def test_pinned_eigenvalue_never_regular(self):
        report = invariance.check_resolvent_invariance(DIAG_Z3(), 3.0)
        assert report.passed and report.notes["regular"] == 0

    def test_pure_mul_relation_regular(self):
        report = invariance.check_resolvent_invariance(MUL(), 4.0)
        assert report.passed and report.notes["regular"] == 1


class TestBoundednessInvariance:
    def test_bounded_family(self, rng):
        fam = FamilyEvaluator.from_rep(random_rep(rng, 3))
        report = invariance.check_boundedness_invariance(fam)
        assert report.passed and report.notes["rank"] == 3

    def test_constantly_unbounded(self):
        report = invariance.check_boundedness_invariance(MUL())
        assert report.passed and report.notes["rank"] == 0

    def test_block_sum_constant_corank(self, rng):
        p = mul_pair(rng, 3)
        report = invariance.check_boundedness_invariance(p)
        assert report.passed and report.notes["rank"] == 2


class TestMulInvariance:
    def test_mul_carrying_pair(self, rng):
        report = invariance.check_mul_invariance(mul_pair(rng, 3))
        assert report.passed and report.notes["dim"] == 1

    def test_operator_family(self, rng):
        fam = FamilyEvaluator.from_rep(random_rep(rng, 2))
        report = invariance.check_mul_invariance(fam)
        assert report.passed and report.notes["dim"] == 0


class TestClassifyFamilyPair:
    def test_uniform_scalar(self):
        p = pairs.canonical_pair(scalar_family(lambda z: z))
        out = invariance.classify_family_pair(p)
        assert out.label == "R^u"
        assert out.rcond_phi >= 1e-12 and out.rcond_psi >= 1e-12
        assert out.lam_min == pytest.approx(0.25)

    def test_pinned_family_not_strict(self):
        out = invariance.classify_family_pair(pairs.canonical_pair(DIAG_Z3()))
        assert out.label == "R" and out.kernel_dim == 1 and out.mul_dim == 0

    def test_mul_family(self, rng):
        out = invariance.classify_family_pair(mul_pair(rng, 3))
        assert out.label == "R~" and out.mul_dim == 1

    def test_strict_at_coarse_tolerance(self):
        d = np.diag(1.0 / np.arange(1, 21))
        p = pairs.canonical_pair(FamilyEvaluator(20, lambda z: z * d, "test"))
        out = invariance.classify_family_pair(p, TolerancePolicy(eps_psd=5e-3))
        assert out.label == "R^s"
        assert invariance.classify_family_pair(p).label == "R^u"

    def test_agreement_with_family_classification(self, rng):
        for _ in range(1000):
            kind = rng.integers(0, 3)
            if kind == 0:
                rep = random_rep(rng, int(rng.integers(2, 5)))
            elif kind == 1:
                rep, _ = rep_with_common_kernel(rng, 3)
            else:
                rep = random_rep(rng, 2, uniform=True)
            fam = FamilyEvaluator.from_rep(rep)
            a = herglotz.classify(fam).label
            b = invariance.classify_family_pair(pairs.canonical_pair(fam)).label
            assert a == b


class TestMaximumPrincipleSchur:
    def test_moebius_scalar(self):
        report = invariance.maximum_principle_schur(
            lambda z: np.array([[(z - 1j) / (z + 1j)]]), 1.0
        )
        assert report.passed
        assert report.notes["alpha_regular"] == 1

    def test_unimodular_constant(self):
        u = np.exp(0.7j)
        report = invariance.maximum_principle_schur(lambda z: u * np.eye(2), u)
        assert report.passed
        dims = {w["alpha_kernel_dim"] for w in report.witnesses}
        assert dims == {2}

    def test_unit_defect_direction(self):
        def c(z):
            return np.diag([(z - 1j) / (z + 1j), 1.0 + 0j])

        report = invariance.maximum_principle_schur(c, 1.0)
        assert report.passed
        assert {w["defect_kernel_dim"] for w in report.witnesses} == {1}
        assert {w["alpha_kernel_dim"] for w in report.witnesses} == {1}

    def test_from_pair(self, rng):
        p = pairs.canonical_pair(FamilyEvaluator.from_rep(random_rep(rng, 2)))
        report = invariance.maximum_principle_schur(p, -1.0)
        assert report.passed

    def test_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            invariance.maximum_principle_schur(lambda z: np.eye(1), 0.5)


class TestSweep:
    def test_decaying_diagonal(self, rng):
        report = invariance.sweep_continuous_spectrum(
            lambda n: FamilyEvaluator(
                n, lambda z, n=n: z * np.diag(1.0 / np.arange(1, n + 1)), "sweep"
            ),
            [8, 16, 32],
            trials=50,
            rng=rng,
        )
        assert report.passed and report.monotone
        assert report.decay_verdict == "decay"
        assert report.ratio_worst <= 1e-9

    def test_identity_family_reports_no_decay(self, rng):
        report = invariance.sweep_continuous_spectrum(
            lambda n: FamilyEvaluator(n, lambda z, n=n: z * np.eye(n), "sweep"),
            [8, 16],
            trials=20,
            rng=rng,
        )
        assert report.monotone and report.ratios_ok
        assert report.decay_verdict == "no-decay"
        assert not report.passed

    def test_rejects_non_increasing_lists(self, rng):
        fam = lambda n: FamilyEvaluator(n, lambda z, n=n: z * np.eye(n), "sweep")
        with pytest.raises(ValueError):
            invariance.sweep_continuous_spectrum(fam, [16, 8], rng=rng)
        with pytest.raises(ValueError):
            invariance.sweep_continuous_spectrum(fam, [], rng=rng)


class TestReportStructure:
    def test_grid_permutation_leaves_verdict(self, rng):
        fam = DIAG_Z3()
        grid = list(herglotz.default_grid())
        r1 = invariance.check_point_invariance(fam, 3.0, grid)
        perm = [grid[i] for i in rng.permutation(len(grid))]
        r2 = invariance.check_point_invariance(fam, 3.0, perm)
        assert r1.passed == r2.passed
        assert r1.worst == pytest.approx(r2.worst, abs=1e-14)

    def test_direct_sum_conjunction(self, rng):
        fam_a, _ = rep_with_pinned_eigenvalue(rng, 3.0, dim=3)
        fam_b = FamilyEvaluator.from_rep(random_rep(rng, 2))
        both = herglotz.family_direct_sum(fam_a, fam_b)
        ra = invariance.check_point_invariance(fam_a, 3.0)
        rb = invariance.check_point_invariance(fam_b, 3.0)
        rsum = invariance.check_point_invariance(both, 3.0)
        assert rsum.passed == (ra.passed and rb.passed)
        assert rsum.notes["dim"] == ra.notes["dim"] + rb.notes["dim"]

    def test_rows_align_with_grid(self):
        report = invariance.check_boundedness_invariance(DIAG_Z3())
        rows = report.rows()
        assert len(rows) == len(report.grid)
        assert all("z_re" in r and "phi_rank" in r for r in rows)

    def test_dimension_change_fails_fast(self):
        # family whose eigenspace at 3 exists only at one special point
        def fn(z):
            return np.diag([z, 3.0 + 0j]) if abs(z - 1j) < 1e-9 else np.diag([z, 4.0 + 0j])

        fam = FamilyEvaluator(2, fn, "test")
        grid = [1j, 2j, 0.5 + 1j, -1j]
        report = invariance.check_point_invariance(fam, 3.0, grid)
        assert not report.passed
        assert report.notes.get("reason") == "dimension varies"
