"""Scenario-driven verification runner.

`ecs-lab run --scenario cfg.json --report out.json` loads a model
description plus a list of verification tasks, runs every check at pinned
tolerances, and writes a deterministic JSON report (and optionally a CSV of
the check rows). Exit codes: 0 all checks passed, 1 at least one check
failed, 2 the scenario or model failed validation, 3 unexpected internal
error.

Scenario format (JSON):

    {
      "schema_version": "1",
      "seed": 1234,
      "model": {
        "gram": [[...], ...],
        "A": [[...], ...],
        "profile": {"kind": "homogeneous", "c": [1.5, 0.0]},
        "interval": [0, null]          # null encodes an infinite endpoint
      },
      "tasks": [
        {"task": "verify-model", "points": 25},
        {"task": "spectra", "q_values": [0.25, 4.0]},
        ...
      ],
      "tolerances": {"curvature.parallel-weyl": 1e-9}   # optional overrides
    }

Every check row carries a stable `anchor` id, the measured value, the
tolerance, and the comparison direction ("below" for residuals, "above" for
quantities that must stay away from zero). The environment variable
ECS_LAB_TOL_SCALE multiplies all tolerances of "below" checks (and divides
those of "above" checks), which supports cross-platform drift studies
without editing scenarios.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .geodesics import (
    PolyCurve,
    affine_defect_residual,
    energy_report,
    geodesic,
    straightening_pullback_residual,
    t_affinity_report,
    terminal_curve_residual,
    transverse_null_geodesic,
    variation_field,
)
from .homogeneous import (
    HomogeneousModel,
    class_map,
    class_map_inverse,
    commute_residual,
    commute_test,
    transitive_commutation_check,
    conjugation_spectrum_check,
    dilation_spectrum_check,
    exponential_consistency_residual,
    expected_kernel_dim,
    g0_element,
    generator_matrix,
    generator_spectrum_check,
    shifted_invertibility,
    spectral_split,
)
from .isometry_group import (
    IsoElement,
    SElement,
    classify_holonomy,
    iso_apply,
    iso_compose,
    iso_inverse,
    omega_scaling_residual,
    pullback_residual,
    s_membership,
    sigma_det_residual,
)
from .model_geometry import (
    ChartPoint,
    HomogeneousProfile,
    ModelManifold,
    ProfileF,
    PseudoEuclideanSpace,
    curvature_at,
    christoffel_pattern_residual,
    nabla_riemann_norm,
    olszak_span_check,
    parallel_weyl_residual,
    random_chart_point,
    ricci_profile_residual,
    weyl_nonzero_norm,
    weyl_tidal_operator,
)
from .model_geometry import curvature_identity_residuals
from .solution_space import (
    HeisenbergElement,
    heisenberg_commutator,
    omega,
    omega_drift,
    random_solution,
)

SCHEMA_VERSION = "1"


class ScenarioError(Exception):
    """Raised for malformed scenarios or models that fail validation."""


DEFAULT_TOLERANCES = {
    "validate.structure": 1e-10,
    "curvature.ricci-profile": 1e-9,
    "curvature.scalar-zero": 1e-9,
    "curvature.parallel-weyl": 1e-9,
    "curvature.nonparallel-riemann": 1e-4,       # above
    "curvature.weyl-nonzero": 1e-6,              # above
    "curvature.leaf-christoffel": 1e-12,
    "curvature.tidal-endomorphism": 1e-8,
    "curvature.olszak-line": 1e-10,
    "curvature.bianchi": 1e-9,
    "solution.omega-constant": 1e-9,
    "isometry.membership": 1e-9,
    "isometry.pullback": 1e-8,
    "isometry.action-compatibility": 1e-8,
    "isometry.inverse": 1e-9,
    "isometry.omega-scaling": 1e-9,
    "isometry.determinant-power": 1e-7,
    "spectra.dilation-eigenvalues": 1e-6,
    "spectra.generator-eigenvalues": 1e-6,
    "spectra.exponential-consistency": 1e-6,
    "spectra.kernel-dimension": 0.5,
    "spectra.shifted-invertibility": 1e-8,       # above
    "group.class-roundtrip": 1e-8,
    "group.commuting-within-class": 1e-8,
    "group.separating-across-classes": 1e-3,     # above
    "group.commute-agreement": 0.5,              # disagreement count
    "group.transitive-commutation": 0.5,         # counterexample count
    "group.conjugation-spectrum": 1e-6,
    "heisenberg.commutator-central": 1e-9,
    "geodesic.energy": 1e-8,
    "geodesic.t-affine": 1e-8,
    "geodesic.boundary-exit": 1e-6,
    "variation.terminal-geodesic": 1e-6,
    "variation.affine-field": 1e-9,
    "reconstruction.pullback-identity": 1e-6,
    "classify.holonomy-type": 0.5,
}

_ABOVE = {
    "curvature.nonparallel-riemann",
    "curvature.weyl-nonzero",
    "spectra.shifted-invertibility",
    "group.separating-across-classes",
}


@dataclass
class CheckRow:
    task: str
    name: str
    anchor: str
    value: float
    tolerance: float
    direction: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "task": self.task,
            "name": self.name,
            "anchor": self.anchor,
            "value": _jsonable(self.value),
            "tolerance": self.tolerance,
            "direction": self.direction,
            "pass": self.passed,
        }
        if self.detail:
            out["detail"] = _jsonable(self.detail)
        return out


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return [_jsonable(v) for v in x.tolist()]
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.complexfloating):
        v = complex(x)
        return [v.real, v.imag]
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)
    return x


class Tolerances:
    def __init__(self, overrides: Optional[dict] = None, scale: float = 1.0):
        self.table = dict(DEFAULT_TOLERANCES)
        for key, val in (overrides or {}).items():
            if key not in self.table:
                raise ScenarioError(f"unknown tolerance anchor: {key!r}")
            self.table[key] = float(val)
        self.scale = float(scale)

    def check(self, task: str, name: str, anchor: str, value: float,
              detail: Optional[dict] = None) -> CheckRow:
        base = self.table[anchor]
        if anchor in _ABOVE:
            tol = base / self.scale
            passed = bool(value > tol)
            direction = "above"
        else:
            tol = base * self.scale
            passed = bool(value <= tol)
            direction = "below"
        return CheckRow(task=task, name=name, anchor=anchor,
                        value=float(value), tolerance=tol,
                        direction=direction, passed=passed,
                        detail=detail or {})


# ---------------------------------------------------------------------------
# scenario loading
# ---------------------------------------------------------------------------

def _decode_interval(raw) -> tuple[float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ScenarioError("interval must be a 2-element list")
    lo = -float("inf") if raw[0] is None else float(raw[0])
    hi = float("inf") if raw[1] is None else float(raw[1])
    return (lo, hi)


def build_model(spec: dict) -> ModelManifold:
    try:
        gram = np.asarray(spec["gram"], dtype=float)
        A = np.asarray(spec["A"], dtype=float)
        profile = ProfileF.from_dict(spec["profile"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad model description: {exc}") from exc
    interval = _decode_interval(spec["interval"]) if "interval" in spec else None
    try:
        space = PseudoEuclideanSpace(gram)
        return ModelManifold.ecs(space, A, profile, interval)
    except ValueError as exc:
        raise ScenarioError(f"model failed validation: {exc}") from exc


@dataclass
class Scenario:
    seed: int
    model_spec: dict
    tasks: list[dict]
    tolerances: dict
    path: str

    @staticmethod
    def load(path: str, seed_override: Optional[int] = None) -> "Scenario":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ScenarioError("scenario must be a JSON object")
        version = str(raw.get("schema_version", SCHEMA_VERSION))
        if version != SCHEMA_VERSION:
            raise ScenarioError(f"unsupported schema_version {version!r}")
        if "model" not in raw or not isinstance(raw["model"], dict):
            raise ScenarioError("scenario needs a 'model' object")
        tasks = raw.get("tasks")
        if not isinstance(tasks, list) or not tasks:
            raise ScenarioError("scenario needs a nonempty 'tasks' list")
        for entry in tasks:
            if not isinstance(entry, dict) or "task" not in entry:
                raise ScenarioError("each task entry needs a 'task' key")
            if entry["task"] not in TASK_RUNNERS:
                raise ScenarioError(f"unknown task {entry['task']!r}")
        seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
        return Scenario(
            seed=seed,
            model_spec=raw["model"],
            tasks=tasks,
            tolerances=raw.get("tolerances", {}),
            path=path,
        )


# ---------------------------------------------------------------------------
# task implementations
# ---------------------------------------------------------------------------

def _require_homogeneous(model: ModelManifold, task: str) -> HomogeneousModel:
    if not isinstance(model.profile, HomogeneousProfile):
        raise ScenarioError(f"task {task!r} requires a homogeneous profile model")
    try:
        return HomogeneousModel.from_model(model)
    except ValueError as exc:
        raise ScenarioError(f"task {task!r}: {exc}") from exc


def _valid_isometries(model: ModelManifold, rng: np.random.Generator,
                      count: int) -> list[IsoElement]:
    """Sample elements that genuinely belong to the isometry group.

    Homogeneous models contribute dilations q in [1/2, 2] with either sign
    of the scaling isometry; other profiles only carry q = 1 with C = +-Id.
    Every element gets a random Heisenberg part.
    """
    out = []
    homogeneous = isinstance(model.profile, HomogeneousProfile)
    hm = HomogeneousModel.from_model(model) if homogeneous else None
    m = model.m
    for _ in range(count):
        r = float(rng.standard_normal())
        u = random_solution(model, rng)
        if homogeneous:
            q = float(np.exp(rng.uniform(-np.log(2.0), np.log(2.0))))
            delta = 1.0 if rng.uniform() < 0.5 else -1.0
            sigma = hm.dilation(q, delta)
        else:
            sign = 1.0 if rng.uniform() < 0.5 else -1.0
            sigma = SElement(1.0, 0.0, sign * np.eye(m))
        out.append(IsoElement(sigma, r, u))
    return out


def task_verify_model(model: ModelManifold, params: dict, tol: Tolerances,
                      rng: np.random.Generator) -> list[CheckRow]:
    points = int(params.get("points", 25))
    res = model.validation_residuals()
    rows = [tol.check("verify-model", "structural residuals of (A, f)",
                      "validate.structure",
                      max(res["self_adjoint_residual"], res["trace_residual"]),
                      detail=res)]
    worst = {
        "ricci": 0.0, "scalar": 0.0, "weyl_par": 0.0, "leaf": 0.0,
        "tidal": 0.0, "olszak": 0.0, "bianchi": 0.0,
    }
    least = {"riemann_par": float("inf"), "weyl": float("inf")}
    for _ in range(points):
        pt = random_chart_point(model, rng)
        pack = curvature_at(model, pt)
        worst["ricci"] = max(worst["ricci"], ricci_profile_residual(model, pt, pack))
        worst["scalar"] = max(worst["scalar"], abs(pack.scalar))
        worst["weyl_par"] = max(worst["weyl_par"], parallel_weyl_residual(pack))
        worst["leaf"] = max(worst["leaf"], christoffel_pattern_residual(model, pt, pack))
        worst["tidal"] = max(worst["tidal"], float(np.max(np.abs(
            weyl_tidal_operator(model, pt, pack) - model.A))))
        ol = olszak_span_check(model, pt)
        worst["olszak"] = max(worst["olszak"], max(ol.values()))
        idn = curvature_identity_residuals(pack)
        worst["bianchi"] = max(worst["bianchi"], max(idn.values()))
        least["riemann_par"] = min(least["riemann_par"], nabla_riemann_norm(pack))
        least["weyl"] = min(least["weyl"], weyl_nonzero_norm(pack))
    rows.extend([
        tol.check("verify-model", f"Ricci = (2-n) f dt^2 over {points} points",
                  "curvature.ricci-profile", worst["ricci"]),
        tol.check("verify-model", "scalar curvature vanishes",
                  "curvature.scalar-zero", worst["scalar"]),
        tol.check("verify-model", "Weyl tensor is parallel",
                  "curvature.parallel-weyl", worst["weyl_par"]),
        tol.check("verify-model", "Riemann tensor is not parallel",
                  "curvature.nonparallel-riemann", least["riemann_par"]),
        tol.check("verify-model", "Weyl tensor does not vanish",
                  "curvature.weyl-nonzero", least["weyl"]),
        tol.check("verify-model", "leafwise Christoffel symbols vanish",
                  "curvature.leaf-christoffel", worst["leaf"]),
        tol.check("verify-model", "tidal operator recovers A",
                  "curvature.tidal-endomorphism", worst["tidal"]),
        tol.check("verify-model", "null parallel line spanned by d/ds",
                  "curvature.olszak-line", worst["olszak"]),
        tol.check("verify-model", "curvature symmetries and Bianchi identities",
                  "curvature.bianchi", worst["bianchi"]),
    ])
    return rows


def task_spectra(model: ModelManifold, params: dict, tol: Tolerances,
                 rng: np.random.Generator) -> list[CheckRow]:
    hm = _require_homogeneous(model, "spectra")
    q_values = [float(q) for q in params.get("q_values", [0.25, 0.5, 2.0, 4.0])]
    for q in q_values:
        if q <= 0:
            raise ScenarioError("spectra q_values must be positive")
    B = generator_matrix(hm)
    rows = []
    gchk = generator_spectrum_check(hm, B)
    rows.append(tol.check(
        "spectra", "generator eigenvalues match m + 1/2 - 2j -+ c",
        "spectra.generator-eigenvalues", gchk.max_rel_error,
        detail={"predicted": gchk.predicted, "computed": np.sort_complex(gchk.computed)}))
    split = spectral_split(hm, B)
    rows.append(tol.check(
        "spectra", "kernel dimension matches the odd-integer rule for 2c",
        "spectra.kernel-dimension",
        abs(split.kernel_dim - expected_kernel_dim(hm.c)),
        detail={"kernel_dim": split.kernel_dim,
                "expected": expected_kernel_dim(hm.c)}))
    for q in q_values:
        chk = dilation_spectrum_check(hm, q)
        rows.append(tol.check(
            "spectra", f"dilation eigenvalues at q = {q:g}",
            "spectra.dilation-eigenvalues", chk.max_rel_error))
        rows.append(tol.check(
            "spectra", f"exp(log(q) B) reproduces the dilation at q = {q:g}",
            "spectra.exponential-consistency",
            exponential_consistency_residual(hm, q, B)))
        if abs(q - 1.0) > 1e-10:
            inv = shifted_invertibility(hm, q, split)
            rows.append(tol.check(
                "spectra", f"(sigma_q - 1) invertible on the range at q = {q:g}",
                "spectra.shifted-invertibility", inv["min_singular_value"],
                detail=inv))
    return rows


def task_isometry_check(model: ModelManifold, params: dict, tol: Tolerances,
                        rng: np.random.Generator) -> list[CheckRow]:
    n_elements = int(params.get("elements", 10))
    n_points = int(params.get("points", 5))
    elems = _valid_isometries(model, rng, n_elements)
    pts = [random_chart_point(model, rng) for _ in range(n_points)]
    worst_member = 0.0
    worst_pull = 0.0
    worst_compat = 0.0
    worst_inverse = 0.0
    worst_omega = 0.0
    worst_det = 0.0
    for g in elems:
        ms = s_membership(model, g.sigma)
        worst_member = max(worst_member, max(ms.values()))
        pairs = [(random_solution(model, rng), random_solution(model, rng))
                 for _ in range(3)]
        worst_omega = max(worst_omega,
                          omega_scaling_residual(model, g.sigma, pairs))
        worst_det = max(worst_det, sigma_det_residual(model, g.sigma))
        ginv = iso_inverse(model, g)
        for pt in pts:
            worst_pull = max(worst_pull, pullback_residual(model, g, pt))
            back = iso_apply(model, ginv, iso_apply(model, g, pt))
            worst_inverse = max(worst_inverse, float(np.max(np.abs(
                back.coords() - pt.coords()))))
    for i in range(0, len(elems) - 1, 2):
        g, h = elems[i], elems[i + 1]
        gh = iso_compose(model, g, h)
        for pt in pts:
            x1 = iso_apply(model, gh, pt)
            x2 = iso_apply(model, g, iso_apply(model, h, pt))
            worst_compat = max(worst_compat, float(np.max(np.abs(
                x1.coords() - x2.coords()))))
    return [
        tol.check("isometry-check", "structural membership residuals",
                  "isometry.membership", worst_member),
        tol.check("isometry-check", f"metric pullback over {n_points} points",
                  "isometry.pullback", worst_pull),
        tol.check("isometry-check", "composition law matches composed action",
                  "isometry.action-compatibility", worst_compat),
        tol.check("isometry-check", "inverse element undoes the action",
                  "isometry.inverse", worst_inverse),
        tol.check("isometry-check", "pairing rescales by 1/q",
                  "isometry.omega-scaling", worst_omega),
        tol.check("isometry-check", "determinant on solutions is q^(2-n)",
                  "isometry.determinant-power", worst_det),
    ]


def task_tcp_check(model: ModelManifold, params: dict, tol: Tolerances,
                   rng: np.random.Generator) -> list[CheckRow]:
    hm = _require_homogeneous(model, "tcp-check")
    n_classes = int(params.get("classes", 5))
    per_class = int(params.get("per_class", 3))
    round_trips = int(params.get("round_trips", 20))
    m2 = 2 * hm.m
    split = spectral_split(hm)

    def rand_q() -> float:
        q = float(np.exp(rng.uniform(-np.log(4.0), np.log(4.0))))
        return q if abs(q - 1.0) > 0.05 else q * 1.1

    worst_round = 0.0
    for _ in range(round_trips):
        a = float(rng.standard_normal())
        z = split.eplus @ rng.standard_normal(split.eplus.shape[1])
        w = split.e0 @ rng.standard_normal(split.kernel_dim) \
            if split.kernel_dim else np.zeros(m2)
        q = rand_q()
        g = class_map(hm, a, z, q, w)
        a2, z2, q2, w2 = class_map_inverse(hm, g, split)
        err = max(abs(a2 - a), float(np.max(np.abs(z2 - z))),
                  abs(q2 - q), float(np.max(np.abs(w2 - w))))
        scale = max(1.0, abs(a), float(np.max(np.abs(z))))
        worst_round = max(worst_round, err / scale)

    worst_within = 0.0
    least_across = float("inf")
    classes = []
    for _ in range(n_classes):
        a = float(rng.standard_normal())
        z = split.eplus @ rng.standard_normal(split.eplus.shape[1])
        members = []
        for _ in range(per_class):
            w = split.e0 @ rng.standard_normal(split.kernel_dim) \
                if split.kernel_dim else np.zeros(m2)
            members.append(class_map(hm, a, z, rand_q(), w))
        classes.append(members)
        for i in range(per_class):
            for j in range(i + 1, per_class):
                worst_within = max(worst_within,
                                   commute_residual(hm, members[i], members[j]))
    for i in range(n_classes):
        for j in range(i + 1, n_classes):
            least_across = min(least_across,
                               commute_residual(hm, classes[i][0], classes[j][0]))

    agreement_pairs = int(params.get("agreement_pairs", 30))
    disagreements = 0
    for k in range(agreement_pairs):
        if k % 3 == 0 and classes:
            members = classes[k % n_classes]
            outcome = commute_test(hm, members[0], members[-1])
        else:
            g1 = g0_element(hm, rand_q(), float(rng.standard_normal()),
                            rng.standard_normal(m2))
            g2 = g0_element(hm, rand_q(), float(rng.standard_normal()),
                            rng.standard_normal(m2))
            outcome = commute_test(hm, g1, g2)
        if not outcome.agree:
            disagreements += 1

    n_triples = int(params.get("triples", 20))
    transitivity = transitive_commutation_check(hm, split, n_triples, rng)

    worst_conj = 0.0
    for members in classes[: max(1, n_classes // 2)]:
        chk = conjugation_spectrum_check(hm, members[0])
        worst_conj = max(worst_conj, chk.max_rel_error)

    worst_central = 0.0
    for _ in range(10):
        h1 = HeisenbergElement(float(rng.standard_normal()), random_solution(model, rng))
        h2 = HeisenbergElement(float(rng.standard_normal()), random_solution(model, rng))
        comm = heisenberg_commutator(h1, h2)
        expected = -2.0 * omega(h1.u, h2.u)
        worst_central = max(worst_central, abs(comm.r - expected),
                            float(np.max(np.abs(comm.u.data()))))

    rows = [
        tol.check("tcp-check", f"class parametrization round trip x{round_trips}",
                  "group.class-roundtrip", worst_round),
        tol.check("tcp-check", "elements of one class commute",
                  "group.commuting-within-class", worst_within),
    ]
    if n_classes >= 2:
        rows.append(tol.check(
            "tcp-check", "elements of distinct classes do not commute",
            "group.separating-across-classes", least_across))
    rows.extend([
        tol.check("tcp-check",
                  f"direct and criterion commutation tests agree x{agreement_pairs}",
                  "group.commute-agreement", float(disagreements),
                  detail={"pairs": agreement_pairs}),
        tol.check("tcp-check",
                  f"commutation is transitive on {n_triples} constructed triples",
                  "group.transitive-commutation",
                  float(transitivity.counterexamples),
                  detail={
                      "premise_failures": transitivity.premise_failures,
                      "worst_conclusion_residual":
                          transitivity.worst_conclusion_residual,
                  }),
        tol.check("tcp-check", "conjugation spectrum is {1/q} + dilation spectrum",
                  "group.conjugation-spectrum", worst_conj),
        tol.check("tcp-check", "commutators are central with charge -2 Omega",
                  "heisenberg.commutator-central", worst_central),
    ])
    return rows


def task_geodesic(model: ModelManifold, params: dict, tol: Tolerances,
                  rng: np.random.Generator) -> list[CheckRow]:
    count = int(params.get("count", 20))
    tau = float(params.get("tau", 2.0))
    worst_energy = 0.0
    worst_affine = 0.0
    worst_boundary = 0.0
    hits = 0
    for _ in range(count):
        pt = random_chart_point(model, rng)
        vel = rng.standard_normal(model.dim)
        res = geodesic(model, pt, vel, (0.0, tau))
        worst_energy = max(worst_energy, energy_report(model, res)["drift_rel"])
        aff = t_affinity_report(res)
        worst_affine = max(worst_affine,
                           aff["residual"] / max(aff["t_range"], 1.0))
        if res.hit_boundary:
            hits += 1
            t_end = res.t_values()[-1]
            lo, hi = model.interval
            dist = min(abs(t_end - lo) if np.isfinite(lo) else float("inf"),
                       abs(hi - t_end) if np.isfinite(hi) else float("inf"))
            worst_boundary = max(worst_boundary, dist)
    rows = [
        tol.check("geodesic", f"energy conservation over {count} geodesics",
                  "geodesic.energy", worst_energy),
        tol.check("geodesic", "t is affine in the parameter",
                  "geodesic.t-affine", worst_affine),
    ]
    if np.isfinite(model.interval[0]) or np.isfinite(model.interval[1]):
        rows.append(tol.check(
            "geodesic", f"boundary exits stop at the endpoint ({hits} hits)",
            "geodesic.boundary-exit", worst_boundary,
            detail={"hits": hits}))
    return rows


def task_classify_group(model: ModelManifold, params: dict, tol: Tolerances,
                        rng: np.random.Generator) -> list[CheckRow]:
    q_values = [float(q) for q in params.get("q_values", [1.0])]
    for q in q_values:
        if q <= 0:
            raise ScenarioError("classify-group q_values must be positive")
    homogeneous = isinstance(model.profile, HomogeneousProfile)
    if not homogeneous and any(abs(q - 1.0) > 1e-12 for q in q_values):
        raise ScenarioError(
            "classify-group with q != 1 requires a homogeneous profile")
    elems = []
    hm = HomogeneousModel.from_model(model) if homogeneous else None
    for q in q_values:
        if homogeneous:
            sigma = hm.dilation(q)
        else:
            sigma = SElement(1.0, 0.0, np.eye(model.m))
        elems.append(IsoElement(sigma, float(rng.standard_normal()),
                                random_solution(model, rng)))
    got = classify_holonomy(elems)
    expected = "dilational" if any(abs(q - 1.0) > 1e-12 for q in q_values) \
        else "translational"
    return [tol.check(
        "classify-group", f"group sample classified as {got}",
        "classify.holonomy-type", 0.0 if got == expected else 1.0,
        detail={"classified": got, "expected": expected,
                "q_values": q_values})]


def task_appendix_a(model: ModelManifold, params: dict, tol: Tolerances,
                    rng: np.random.Generator) -> list[CheckRow]:
    count = int(params.get("count", 5))
    lo, hi = model.compact_window()
    worst_terminal = 0.0
    worst_affine = 0.0
    for _ in range(count):
        m = model.m
        curve = PolyCurve(0.3 * rng.standard_normal(3),
                          0.3 * rng.standard_normal((m, 3)))
        z0 = (float(rng.standard_normal()), 0.5 * rng.standard_normal(m))
        zdot0 = (float(rng.standard_normal()), 0.5 * rng.standard_normal(m))
        fld = variation_field(model, curve, z0, zdot0, (lo, hi))
        worst_terminal = max(worst_terminal, terminal_curve_residual(model, fld))
        worst_affine = max(worst_affine, affine_defect_residual(model, fld))
    return [
        tol.check("appendix-a", f"endpoint curve of {count} variations is geodesic",
                  "variation.terminal-geodesic", worst_terminal),
        tol.check("appendix-a", "transverse defect decays affinely in s",
                  "variation.affine-field", worst_affine),
    ]


def task_appendix_b(model: ModelManifold, params: dict, tol: Tolerances,
                    rng: np.random.Generator) -> list[CheckRow]:
    count = int(params.get("count", 3))
    lo, hi = model.compact_window()
    t0 = 0.5 * (lo + hi)
    worst = 0.0
    worst_null = 0.0
    for _ in range(count):
        m = model.m
        geo = transverse_null_geodesic(
            model, t0, float(rng.standard_normal()),
            0.5 * rng.standard_normal(m), 0.5 * rng.standard_normal(m),
            (lo, hi))
        t_grid = np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 5)
        s_grid = np.linspace(-1.0, 1.0, 3)
        v_grid = [rng.standard_normal(m) for _ in range(3)]
        rep = straightening_pullback_residual(geo, t_grid, s_grid, v_grid)
        worst = max(worst, rep["pullback_residual"])
        worst_null = max(worst_null, rep["null_residual"])
    return [tol.check(
        "appendix-b", f"straightening of {count} null geodesics pulls g back to g",
        "reconstruction.pullback-identity", worst,
        detail={"null_residual": worst_null})]


TASK_RUNNERS = {
    "verify-model": task_verify_model,
    "spectra": task_spectra,
    "isometry-check": task_isometry_check,
    "tcp-check": task_tcp_check,
    "geodesic": task_geodesic,
    "classify-group": task_classify_group,
    "appendix-a": task_appendix_a,
    "appendix-b": task_appendix_b,
}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def run_scenario(scenario: Scenario, tol_scale: float = 1.0,
                 parallel: int = 1) -> dict:
    build_model(scenario.model_spec)  # surface validation errors up front
    tol = Tolerances(scenario.tolerances, scale=tol_scale)

    def run_one(indexed) -> list[CheckRow]:
        # Each task gets a private model instance: the lazily grown ODE flow
        # cache depends on query order, so sharing it across concurrent
        # tasks would make reports depend on thread interleaving.
        index, entry = indexed
        model = build_model(scenario.model_spec)
        rng = np.random.default_rng([scenario.seed, index])
        runner = TASK_RUNNERS[entry["task"]]
        return runner(model, entry, tol, rng)

    indexed_tasks = list(enumerate(scenario.tasks))
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            groups = list(pool.map(run_one, indexed_tasks))
    else:
        groups = [run_one(item) for item in indexed_tasks]

    rows = [row for group in groups for row in group]
    passed = sum(1 for r in rows if r.passed)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.system().lower(),
        },
        "scenario": {
            "seed": scenario.seed,
            "model": scenario.model_spec,
            "tasks": [entry["task"] for entry in scenario.tasks],
        },
        "tolerance_scale": tol_scale,
        "checks": [r.to_json() for r in rows],
        "summary": {
            "total": len(rows),
            "passed": passed,
            "failed": len(rows) - passed,
        },
    }
    return report


def write_report(report: dict, path: str):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(report: dict, path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "name", "anchor", "value", "tolerance",
                         "direction", "pass"])
        for row in report["checks"]:
            writer.writerow([row["task"], row["name"], row["anchor"],
                             row["value"], row["tolerance"],
                             row["direction"], row["pass"]])


def _tol_scale_from_env() -> float:
    raw = os.environ.get("ECS_LAB_TOL_SCALE")
    if raw is None:
        return 1.0
    try:
        scale = float(raw)
    except ValueError as exc:
        raise ScenarioError(f"ECS_LAB_TOL_SCALE is not a number: {raw!r}") from exc
    if scale <= 0:
        raise ScenarioError("ECS_LAB_TOL_SCALE must be positive")
    return scale


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ecs-lab",
        description="scenario-driven verification of the model manifolds")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario and write a report")
    run_p.add_argument("--scenario", required=True, help="scenario JSON path")
    run_p.add_argument("--report", required=True, help="report JSON output path")
    run_p.add_argument("--csv", help="also write check rows as CSV")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--parallel", type=int, default=1,
                       help="run tasks in up to this many threads")
    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            scale = _tol_scale_from_env()
            scenario = Scenario.load(args.scenario, seed_override=args.seed)
            if args.parallel < 1:
                raise ScenarioError("--parallel must be at least 1")
            report = run_scenario(scenario, tol_scale=scale,
                                  parallel=args.parallel)
        except ScenarioError as exc:
            print(f"scenario error: {exc}", file=sys.stderr)
            return 2
        except Exception as exc:  # pragma: no cover - defensive
            print(f"internal error: {exc!r}", file=sys.stderr)
            return 3
        try:
            write_report(report, args.report)
            if args.csv:
                write_csv(report, args.csv)
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return 3
        summary = report["summary"]
        status = "PASS" if summary["failed"] == 0 else "FAIL"
        print(f"{status}: {summary['passed']}/{summary['total']} checks passed")
        return 0 if summary["failed"] == 0 else 1
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
