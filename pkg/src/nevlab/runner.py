"""Execution of job documents: entity instantiation and verifier tasks.

Tasks run in declaration order, each producing one report with flat rows
(suitable for CSV) plus a scalar summary.  Randomized checks derive their
streams from the document seed and the task index, so identical documents
give identical reports regardless of how the run is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analysis, document, examples, herglotz, invariance, matnum, pairs
from .document import JobDocument, decode_matrix
from .herglotz import FamilyEvaluator, HerglotzRep
from .matnum import TolerancePolicy
from .pairs import PairEvaluator


class RunError(RuntimeError):
    """Raised when entity construction fails on validated input."""


@dataclass
class TaskReport:
    name: str
    task: str
    passed: bool
    summary: dict
    rows: list[dict] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "task": self.task,
            "passed": self.passed,
            "summary": self.summary,
            "rows": self.rows,
        }


def _decode_strict(obj, where: str):
    errors: list[str] = []
    m = decode_matrix(obj, where, errors)
    if errors:
        raise RunError("; ".join(errors))
    return m


def _build_rep(body: dict, where: str, tol: TolerancePolicy) -> HerglotzRep:
    b0 = _decode_strict(body["b0"], f"{where}.b0")
    b1 = _decode_strict(body["b1"], f"{where}.b1")
    atoms = [
        (float(t), _decode_strict(w, f"{where}.atoms")) for t, w in body.get("atoms", [])
    ]
    try:
        return HerglotzRep.create(b0, b1, atoms if atoms else None, tol)
    except (ValueError, matnum.MatrixShapeError) as exc:
        raise RunError(f"{where}: {exc}") from exc


def build_entities(doc: JobDocument) -> dict[str, object]:
    """Instantiate every declared entity, resolving references in order."""
    tol = TolerancePolicy(**doc.tolerances) if doc.tolerances else matnum.DEFAULT_TOL
    built: dict[str, object] = {}
    for ent in doc.entities:
        name, kind = ent["name"], ent["kind"]
        where = f"entity {name!r}"
        if kind == "herglotz_rep":
            built[name] = _build_rep(ent, where, tol)
        elif kind == "family":
            rep = built[ent["rep"]]
            if not isinstance(rep, HerglotzRep):
                raise RunError(f"{where}: 'rep' must reference representation data")
            offset = ent.get("offset")
            if offset is None:
                built[name] = FamilyEvaluator.from_rep(rep, label=name)
            else:
                built[name] = FamilyEvaluator.from_rep_with_offset(
                    rep, _decode_strict(offset, f"{where}.offset"), label=name
                )
        elif kind == "pair":
            built[name] = _build_pair(ent["pair"], built, where)
        elif kind == "sturm_liouville":
            phi = ent.get("phi")
            if isinstance(phi, str):
                phi_rep = built[phi]
                if not isinstance(phi_rep, HerglotzRep) or phi_rep.dim != 1:
                    raise RunError(f"{where}: phi must reference scalar rep data")
            elif isinstance(phi, dict):
                phi_rep = _build_rep(phi, f"{where}.phi", tol)
            else:
                phi_rep = None
            built[name] = examples.SturmLiouvilleConfig(
                n=ent["n"],
                phi=phi_rep,
                length=float(ent.get("length", 1.0)),
                variant=ent.get("variant", examples.VARIANT_INTERVAL),
            )
        elif kind == "ex4a":
            built[name] = examples.Ex4AConfig(
                n=ent["n"],
                b_decay=ent.get("b_decay"),
                c_perturbation=float(ent.get("c_perturbation", 0.0)),
                seed=int(ent.get("seed", 0)),
            )
        else:  # pragma: no cover - parser rejects unknown kinds
            raise RunError(f"{where}: unknown kind {kind!r}")
    return built


def _build_pair(spec: dict, built: dict, where: str) -> PairEvaluator:
    ptype = spec["type"]
    if ptype == "canonical":
        family = built[spec["family"]]
        if isinstance(family, HerglotzRep):
            family = FamilyEvaluator.from_rep(family)
        if not isinstance(family, FamilyEvaluator):
            raise RunError(f"{where}: canonical pair needs a family entity")
        return pairs.canonical_pair(family)
    if ptype == "constant":
        return PairEvaluator.constant(
            _decode_strict(spec["phi"], f"{where}.phi"),
            _decode_strict(spec["psi"], f"{where}.psi"),
        )
    base = built[spec["base"]]
    if not isinstance(base, PairEvaluator):
        raise RunError(f"{where}: transform base must be a pair")
    out = base
    for step in spec["steps"]:
        op = step["op"]
        try:
            if op == "shift":
                out = pairs.shift_transform(out, _decode_strict(step["x"], where))
            elif op == "scale":
                out = pairs.scale_transform(out, _decode_strict(step["y"], where))
            elif op == "flip":
                out = pairs.flip_transform(out)
            elif op == "junitary":
                out = pairs.transform(out, _decode_strict(step["w"], where))
            else:
                m = built[step["m"]]
                if not isinstance(m, HerglotzRep):
                    raise RunError(f"{where}: herglotz_shift needs representation data")
                out = pairs.herglotz_shift_transform(out, m)
        except (pairs.PairAxiomError, matnum.MatrixShapeError) as exc:
            raise RunError(f"{where}: {exc}") from exc
    return out


def _as_family(obj, where: str) -> FamilyEvaluator:
    if isinstance(obj, HerglotzRep):
        return FamilyEvaluator.from_rep(obj)
    if isinstance(obj, FamilyEvaluator):
        return obj
    if isinstance(obj, examples.SturmLiouvilleConfig):
        return examples.build_family(obj)
    if isinstance(obj, examples.Ex4AConfig):
        return examples.build_ex4a(obj).f_family
    raise RunError(f"{where}: entity cannot be read as a family")


def _grid_of(doc: JobDocument):
    return tuple(doc.grid) if doc.grid else herglotz.default_grid()


def _point(task: dict, key: str, default: complex) -> complex:
    if key in task:
        return complex(task[key][0], task[key][1])
    return default


SWEEP_BUILDERS = {
    "diag-inverse-k": lambda n: FamilyEvaluator(
        n, lambda z, n=n: z * np.diag(1.0 / np.arange(1, n + 1)), "sweep"
    ),
    "scalar-z-identity": lambda n: FamilyEvaluator(
        n, lambda z, n=n: z * np.eye(n, dtype=complex), "sweep"
    ),
    "atomic-dyadic": lambda n: FamilyEvaluator.from_rep(
        HerglotzRep.create(
            np.zeros((n, n)),
            np.zeros((n, n)),
            [(0.0, np.diag(2.0 ** -np.arange(1, n + 1)))],
        )
    ),
}


def run_task(
    task: dict,
    built: dict[str, object],
    doc: JobDocument,
    task_index: int,
) -> TaskReport:
    kind = task["task"]
    name = task["name"]
    tol = TolerancePolicy(**doc.tolerances) if doc.tolerances else matnum.DEFAULT_TOL
    rng = np.random.default_rng([doc.seed, task_index])
    grid = _grid_of(doc)

    if kind == "classify":
        obj = built[task["entity"]]
        if isinstance(obj, PairEvaluator):
            pcls = invariance.classify_family_pair(obj, tol)
            rows = [
                {
                    "label": pcls.label,
                    "lam_min": pcls.lam_min,
                    "kernel_dim": pcls.kernel_dim,
                    "pair_label": pcls.label,
                    "pair_lam_min": pcls.lam_min,
                    "rcond_phi": pcls.rcond_phi,
                    "rcond_psi": pcls.rcond_psi,
                }
            ]
            return TaskReport(name, kind, True, {"label": pcls.label}, rows)
        family = _as_family(obj, f"task {name!r}")
        cls = herglotz.classify(family, tol, grid)
        pair = pairs.canonical_pair(family)
        pcls = invariance.classify_family_pair(pair, tol)
        rows = [
            {
                "label": cls.label,
                "lam_min": cls.lam_min,
                "kernel_dim": cls.kernel_dim,
                "pair_label": pcls.label,
                "pair_lam_min": pcls.lam_min,
                "rcond_phi": pcls.rcond_phi,
                "rcond_psi": pcls.rcond_psi,
            }
        ]
        passed = cls.label != herglotz.CLASS_NOT_NEV and cls.label == pcls.label
        return TaskReport(name, kind, passed, {"label": cls.label}, rows)

    if kind == "invariance":
        obj = built[task["entity"]]
        pair = obj if isinstance(obj, PairEvaluator) else pairs.canonical_pair(
            _as_family(obj, f"task {name!r}")
        )
        checks = task.get("checks", list(document.INVARIANCE_CHECKS))
        a = float(task.get("a", 0.0))
        reports = []
        for check in checks:
            if check == "point":
                reports.append(invariance.check_point_invariance(pair, a, grid, tol))
            elif check == "imag_kernel":
                family = _as_family(obj, f"task {name!r}") if not isinstance(
                    obj, PairEvaluator
                ) else None
                if family is None:
                    continue  # kernel check needs the operator family itself
                reports.append(
                    invariance.check_imag_kernel_invariance(family, grid, tol)
                )
            elif check == "resolvent":
                reports.append(invariance.check_resolvent_invariance(pair, a, grid, tol))
            elif check == "boundedness":
                reports.append(invariance.check_boundedness_invariance(pair, grid, tol))
            elif check == "mul":
                reports.append(invariance.check_mul_invariance(pair, grid, tol))
        rows = []
        for rep in reports:
            for row in rep.rows():
                rows.append({"statement": rep.statement, **row})
        passed = all(r.passed for r in reports)
        summary = {
            "checks": len(reports),
            "worst": max((r.worst for r in reports), default=0.0),
        }
        return TaskReport(name, kind, passed, summary, rows)

    if kind == "harnack":
        z1 = _point(task, "z1", 1j)
        z2 = _point(task, "z2", 2j)
        trials = int(task.get("trials", 1000))
        hp = analysis.harnack_constants(z1, z2)
        worst = analysis.certify_harnack(z1, z2, trials, rng)
        rows = [
            {
                "z1_re": z1.real, "z1_im": z1.imag,
                "z2_re": z2.real, "z2_im": z2.imag,
                "c1": hp.c1, "c2": hp.c2, "mc_worst": worst,
            }
        ]
        passed = worst <= 1e-12
        if "entity" in task:
            family = _as_family(built[task["entity"]], f"task {name!r}")
            sr = analysis.form_sandwich_check(
                family, grid, _point(task, "z0", 1j), trials=int(task.get("trials", 100)),
                rng=rng,
            )
            rows.append(
                {
                    "z1_re": sr.z0.real, "z1_im": sr.z0.imag,
                    "z2_re": float("nan"), "z2_im": float("nan"),
                    "c1": float("nan"), "c2": float("nan"),
                    "mc_worst": sr.worst_violation,
                }
            )
            passed = passed and sr.passed
        return TaskReport(name, kind, passed, {"c1": hp.c1, "c2": hp.c2}, rows)

    if kind == "analysis":
        obj = built[task["entity"]]
        family = _as_family(obj, f"task {name!r}")
        analyses = task.get("analyses", ["split"])
        z = _point(task, "z", 1j)
        rows, passed = [], True
        for what in analyses:
            if what == "split":
                res = analysis.split_bounded_imag(family, grid)
                rows.append(
                    {
                        "analysis": "split",
                        "value": matnum.spectral_norm(res.t_constant),
                        "residual": max(res.constancy, res.hermitian_residual),
                        "passed": int(res.passed),
                    }
                )
                passed = passed and res.passed
            elif what == "c2":
                rows.append(
                    {"analysis": "c2", "value": analysis.c2_of(z), "residual": 0.0,
                     "passed": 1}
                )
            elif what == "weak_strong":
                rep = family.rep
                if rep is None:
                    raise RunError(f"task {name!r}: weak_strong needs representation data")
                br = analysis.weak_strong_check(
                    rep, z, trials=int(task.get("trials", 50)), rng=rng
                )
                rows.append(
                    {"analysis": "weak_strong", "value": br.worst_ratio,
                     "residual": float(br.violations), "passed": int(br.passed)}
                )
                passed = passed and br.passed
            elif what == "factor":
                rep = family.rep
                if rep is None:
                    raise RunError(f"task {name!r}: factor needs representation data")
                br = analysis.factor_check(rep, z, tol)
                rows.append(
                    {"analysis": "factor", "value": br.worst_ratio,
                     "residual": float(br.violations), "passed": int(br.passed)}
                )
                passed = passed and br.passed
            elif what == "schatten":
                dr = analysis.schatten_decay(family, [w for w in grid if w.imag > 0])
                rows.append(
                    {"analysis": "schatten",
                     "value": min(dr.slopes) if dr.slopes else 0.0,
                     "residual": dr.spread, "passed": int(dr.passed)}
                )
                passed = passed and dr.passed
            elif what == "sandwich":
                sr = analysis.form_sandwich_check(
                    family, grid, z, trials=int(task.get("trials", 100)), rng=rng
                )
                rows.append(
                    {"analysis": "sandwich", "value": sr.worst_violation,
                     "residual": sr.worst_violation, "passed": int(sr.passed)}
                )
                passed = passed and sr.passed
        return TaskReport(name, kind, passed, {"analyses": len(rows)}, rows)

    if kind == "examples":
        obj = built[task["entity"]]
        what = task.get("what", "decay")
        if what == "decay":
            if not isinstance(obj, examples.SturmLiouvilleConfig):
                raise RunError(f"task {name!r}: decay report needs a grid config")
            family = examples.build_family(obj)
            zs = [z for z in grid if z.imag > 0][:5]
            n = family.dim
            lo, hi = max(1, n // 8), max(2, n // 3)
            slopes, rows = [], []
            for z in zs:
                inv = matnum.inverse(family(z), rcond_min=1e-15)
                s = matnum.singular_values(inv)
                js = np.arange(lo, hi + 1)
                slopes.append(analysis.fit_log_slope(js, s[js - 1]))
                for j in js:  # plot-ready series: j against s_j
                    rows.append(
                        {"z_re": z.real, "z_im": z.imag, "j": int(j),
                         "s_j": float(s[j - 1]), "slope": slopes[-1]}
                    )
            spread = max(slopes) - min(slopes)
            passed = spread <= 0.05
            return TaskReport(
                name, kind, passed, {"spread": spread, "slope": slopes[0]}, rows
            )
        if what == "form_domain":
            if not isinstance(obj, examples.Ex4AConfig):
                raise RunError(f"task {name!r}: form_domain needs an ex4a config")
            ex = examples.build_ex4a(obj)
            fr = examples.form_domain_report(ex, grid, rng=rng)
            rows = [
                {"z_re": z.real, "z_im": z.imag, "c1": b[0], "c2": b[1],
                 "gen_eig_min": e[0], "gen_eig_max": e[1]}
                for z, b, e in zip(fr.grid, fr.bounds, fr.extremes)
            ]
            return TaskReport(
                name, kind, fr.passed, {"worst": fr.worst_violation}, rows
            )
        if what == "conditioning":
            if not isinstance(obj, examples.Ex4AConfig):
                raise RunError(f"task {name!r}: conditioning needs an ex4a config")
            ex = examples.build_ex4a(obj)
            zs = [z for z in grid if z.imag > 0][:5]
            rows = [
                {"z_re": z.real, "z_im": z.imag,
                 "rcond": examples.solve_conditioning(ex, z)}
                for z in zs
            ]
            return TaskReport(name, kind, True, {"b_min": float(ex.b.min())}, rows)
        if not isinstance(obj, examples.SturmLiouvilleConfig):
            raise RunError(f"task {name!r}: gap_sweep needs a grid config")
        rows = examples.halfline_gap_sweep(
            obj.phi,
            task.get("a_values", [0.5, 2.0]),
            task.get("n_list", [32, 64, 128]),
        )
        return TaskReport(name, kind, True, {"rows": len(rows)}, rows)

    if kind == "sweep":
        seq = SWEEP_BUILDERS[task["sequence"]]
        report = invariance.sweep_continuous_spectrum(
            seq,
            task["n_list"],
            grid,
            trials=int(task.get("trials", 100)),
            rng=rng,
        )
        summary = {
            "monotone": int(report.monotone),
            "ratio_worst": report.ratio_worst,
            "verdict": report.decay_verdict,
        }
        return TaskReport(name, kind, report.passed, summary, report.rows())

    raise RunError(f"unknown task kind {kind!r}")  # pragma: no cover


def run_document(doc: JobDocument) -> list[TaskReport]:
    """Run tasks in declaration order; numerical failures become failed reports."""
    built = build_entities(doc)
    out = []
    for i, task in enumerate(doc.tasks):
        try:
            out.append(run_task(task, built, doc, i))
        except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out.append(
                TaskReport(task["name"], task["task"], False, {"error": str(exc)})
            )
    return out
