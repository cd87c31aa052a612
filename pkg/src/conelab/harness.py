"""Experiment drivers and report emission.

Every experiment is a pure function of its :class:`ExperimentConfig`:
per-cone seeds are derived from ``(seed, cone index)`` and results are
reduced in cone order, so reruns produce byte-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .centroids import find_centroid_section, hammer_check
from .characterize import cone_ellipsoid_fit, css_sweep, fbi_defect
from .cones import dual_normals, interior_points, load_cone, section_of
from .errors import ConeLabError, SearchBudgetExhausted
from .families import FamilyMember, generate_family, parse_family, standard_family
from .gamma import gamma_curve
from .linalg import Hyperplane

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "EquivalenceRow",
    "ExperimentResult",
    "classify",
    "load_cones",
    "run_experiment",
    "run_equivalence_matrix",
    "write_report",
]

EXPERIMENTS = ("fbi-sweep", "css-sweep", "equivalence-matrix", "gamma-dump", "hammer-stress", "centroid-search")

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3


@dataclass
class ExperimentConfig:
    experiment: str
    cone: str | None = None
    families: list = field(default_factory=list)
    seed: int = 0
    samples: int = 64
    interior_points: int = 10
    hyperplanes: int = 32
    tol: float = 1e-6
    pass_threshold: float = 1e-6
    fail_threshold: float = 1e-4
    out: str | None = None
    csv: str | None = None
    trace: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConeLabError(f"unknown experiment {self.experiment!r}")
        if (self.cone is None) == (not self.families):
            raise ConeLabError("give exactly one cone source: a cone file or one or more families")
        if self.samples < 8:
            raise ConeLabError("samples must be at least 8")
        if self.interior_points < 1 or self.hyperplanes < 1:
            raise ConeLabError("interior_points and hyperplanes must be positive")
        if not (self.tol > 0 and 0 < self.pass_threshold < self.fail_threshold):
            raise ConeLabError("need tol > 0 and 0 < pass_threshold < fail_threshold")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EquivalenceRow:
    cone_id: str
    is_ellipsoidal_fit: bool
    fbi_pass: bool
    css_pass: bool
    defects: tuple
    fbi_status: str
    css_status: str

    @property
    def agrees(self) -> bool:
        determined = "inconclusive" not in (self.fbi_status, self.css_status)
        return determined and self.is_ellipsoidal_fit == self.fbi_pass == self.css_pass

    def to_dict(self) -> dict:
        fit, fbi, css = self.defects
        return {
            "cone_id": self.cone_id,
            "is_ellipsoidal_fit": self.is_ellipsoidal_fit,
            "fbi_pass": self.fbi_pass,
            "css_pass": self.css_pass,
            "fbi_status": self.fbi_status,
            "css_status": self.css_status,
            "fit_residual": fit,
            "fbi_defect": fbi,
            "css_defect": css,
            "agrees": self.agrees,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    results: list
    exit_code: int = EXIT_OK
    message: str = ""
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "experiment": self.config.experiment,
            "exit_code": self.exit_code,
            "message": self.message,
            "results": self.results,
        }


def classify(defect: float, pass_threshold: float, fail_threshold: float) -> str:
    if defect <= pass_threshold:
        return "pass"
    if defect >= fail_threshold:
        return "fail"
    return "inconclusive"


def load_cones(config: ExperimentConfig) -> list[FamilyMember]:
    if config.cone is not None:
        return [FamilyMember(Path(config.cone).stem, load_cone(config.cone))]
    members = []
    for spec in config.families:
        if spec == "standard":
            members.extend(standard_family(config.seed))
        else:
            kind, dims, params = parse_family(spec)
            members.extend(generate_family(kind, dims, params, config.seed))
    ids = [m.cone_id for m in members]
    if len(set(ids)) != len(ids):
        raise ConeLabError("duplicate cone ids in family selection")
    return members


def _cone_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _threads():
    try:
        return max(1, int(os.environ.get("CONE_LAB_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def _map_cones(fn, members, config):
    jobs = [(m, _cone_seed(config.seed, i)) for i, m in enumerate(members)]
    workers = min(_threads(), max(1, len(jobs)))
    if workers == 1:
        return [fn(m, s, config) for m, s in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(job[0], job[1], config), jobs))


# --------------------------------------------------------------------------
# per-cone drivers


def _metric(predicate, defect, threshold, status):
    return {"predicate": predicate, "defect": defect, "threshold": threshold, "status": status}


def _fbi_summary(member, seed, config):
    reports = [fbi_defect(member.cone, a, config.samples) for a in interior_points(member.cone, config.interior_points, seed)]
    worst = max(r.flatness_defect for r in reports)
    return reports, worst, classify(worst, config.pass_threshold, config.fail_threshold)


def _equivalence_row(member, seed, config):
    fit = cone_ellipsoid_fit(member.cone, config.samples, config.pass_threshold)
    _, fbi_worst, fbi_status = _fbi_summary(member, seed, config)
    css = css_sweep(member.cone, config.hyperplanes, seed, config.samples)
    css_status = classify(css.max_symmetry_defect, config.pass_threshold, config.fail_threshold)
    return EquivalenceRow(
        member.cone_id,
        fit.is_ellipsoid,
        fbi_status == "pass",
        css_status == "pass",
        (fit.residual, fbi_worst, css.max_symmetry_defect),
        fbi_status,
        css_status,
    )


def _fbi_sweep(member, seed, config):
    reports, worst, status = _fbi_summary(member, seed, config)
    return {
        "cone_id": member.cone_id,
        "seed": seed,
        "max_flatness_defect": worst,
        "status": status,
        "reports": [r.to_dict() for r in reports],
        "metrics": [_metric("fbi", worst, config.pass_threshold, status)],
    }


def _css_sweep(member, seed, config):
    rep = css_sweep(member.cone, config.hyperplanes, seed, config.samples)
    status = classify(rep.max_symmetry_defect, config.pass_threshold, config.fail_threshold)
    return {
        "cone_id": member.cone_id,
        "seed": seed,
        "status": status,
        "report": rep.to_dict(),
        "metrics": [_metric("css", rep.max_symmetry_defect, config.pass_threshold, status)],
    }


def _gamma_dump(member, seed, config):
    curves = [gamma_curve(member.cone, a, config.samples) for a in interior_points(member.cone, config.interior_points, seed)]
    return {
        "cone_id": member.cone_id,
        "seed": seed,
        "curves": [c.to_dict() for c in curves],
        "metrics": [],
    }


def _hammer_stress(member, seed, config):
    cone = member.cone
    reports = []
    for k, u in enumerate(dual_normals(cone, config.hyperplanes, seed)):
        sec = section_of(cone, Hyperplane(u, float(u @ cone.axis)), config.samples, seed=k)
        reports.append(hammer_check(sec, 4 * config.samples, seed=seed + k, tol=config.tol))
    violations = sum(r.violations for r in reports)
    return {
        "cone_id": member.cone_id,
        "seed": seed,
        "violations": violations,
        "reports": [r.to_dict() for r in reports],
        "metrics": [
            _metric("hammer-min-mu", min(r.min_mu for r in reports), reports[0].bounds[0], "pass" if violations == 0 else "fail"),
            _metric("hammer-max-mu", max(r.max_mu for r in reports), reports[0].bounds[1], "pass" if violations == 0 else "fail"),
        ],
    }


def _centroid_search(member, seed, config):
    out = []
    trace = []
    exhausted = False
    for a in interior_points(member.cone, config.interior_points, seed):
        try:
            res = find_centroid_section(member.cone, a, config.tol, config.samples, seed, record_trace=config.trace is not None)
        except SearchBudgetExhausted as exc:
            exhausted = True
            out.append({"point": a.tolist(), "residual": exc.best_residual, "status": "exhausted"})
            continue
        item = res.to_dict()
        item["status"] = "pass"
        out.append(item)
        trace.append({"point": a.tolist(), "iterates": res.trace})
    worst = max(item["residual"] for item in out)
    return {
        "cone_id": member.cone_id,
        "seed": seed,
        "searches": out,
        "exhausted": exhausted,
        "trace": trace,
        "metrics": [_metric("centroid-residual", worst, config.tol, "fail" if exhausted else "pass")],
    }


def run_equivalence_matrix(config: ExperimentConfig) -> tuple[list[EquivalenceRow], int, str]:
    """Classify every configured cone three ways and check the verdicts agree.

    Returns the rows, the exit code (0 iff every row agrees) and a message
    naming the first disagreeing cone.
    """
    rows = _map_cones(_equivalence_row, load_cones(config), config)
    for row in rows:
        if not row.agrees:
            return rows, EXIT_DISAGREE, f"predicates disagree on {row.cone_id}"
    return rows, EXIT_OK, ""


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    if config.experiment == "equivalence-matrix":
        rows, code, msg = run_equivalence_matrix(config)
        results = []
        for row in rows:
            item = row.to_dict()
            item["metrics"] = [
                _metric("ellipsoid-fit", row.defects[0], config.pass_threshold, "pass" if row.is_ellipsoidal_fit else "fail"),
                _metric("fbi", row.defects[1], config.pass_threshold, row.fbi_status),
                _metric("css", row.defects[2], config.pass_threshold, row.css_status),
            ]
            results.append(item)
        return ExperimentResult(config, results, code, msg)
    driver = {
        "fbi-sweep": _fbi_sweep,
        "css-sweep": _css_sweep,
        "gamma-dump": _gamma_dump,
        "hammer-stress": _hammer_stress,
        "centroid-search": _centroid_search,
    }[config.experiment]
    results = _map_cones(driver, load_cones(config), config)
    code, msg = EXIT_OK, ""
    trace = []
    if config.experiment == "hammer-stress":
        bad = [r["cone_id"] for r in results if r["violations"]]
        if bad:
            code, msg = EXIT_DISAGREE, f"Hammer bound violated on {bad[0]}"
    elif config.experiment == "centroid-search":
        for r in results:
            trace.append({"cone_id": r["cone_id"], "points": r.pop("trace")})
        bad = [r["cone_id"] for r in results if r["exhausted"]]
        if bad:
            code, msg = EXIT_BUDGET, f"search budget exhausted on {bad[0]}"
    return ExperimentResult(config, results, code, msg, trace)


# --------------------------------------------------------------------------
# reports

CSV_COLUMNS = ("cone_id", "predicate", "defect", "threshold", "status")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write_text(path, text):
    p = Path(path)
    try:
        p.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report {p}: {exc.strerror}") from exc


def write_report(result: ExperimentResult, path, csv_path=None, trace_path=None) -> None:
    """Write the full JSON report, and optionally the flat CSV and search trace.

    The CSV has one line per (cone, predicate) with the columns in
    :data:`CSV_COLUMNS`.
    """
    _write_text(path, json.dumps(result.to_dict(), indent=2, default=_json_default) + "\n")
    if csv_path is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for item in result.results:
            for m in item.get("metrics", []):
                writer.writerow([item["cone_id"], m["predicate"], repr(float(m["defect"])), repr(float(m["threshold"])), m["status"]])
        _write_text(csv_path, buf.getvalue())
    if trace_path is not None:
        _write_text(trace_path, json.dumps(result.trace, indent=2, default=_json_default) + "\n")
