"""Scenario files: schema validation, system construction and report assembly."""
import copy
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import jsonschema
import numpy as np

from . import __version__
from .classifiers import (
    EXPONENT_NAMES,
    exponent_estimates,
    expansive_dissipative,
    expansive_general,
    positively_expansive_dissipative,
    positively_expansive_general,
    shadowing_equivalence_report,
    strong_structural_stability,
    structural_instability,
    uniformly_expansive_dissipative,
    uniformly_positively_expansive_dissipative,
)
from .dissipative import DissipativeStructure, ratio_sequence
from .dynamics import UNBOUNDED, CompositionSystem, expansivity_probe
from .norms import indicator_norm, norm_report
from .space import AtomicMeasureSpace, SimpleFunction
from .transform import AtomTransformation
from .verdict import UNDETERMINED, PreconditionError, Verdict, WindowEscape
from .young import YoungFunction, check_delta2, check_delta_prime, conjugate

CRITERIA = ("general", "dissipative", "instability", "stability")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer"}

SCHEMA = {
    "type": "object",
    "required": ["young", "space"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "young": {
            "type": "object",
            "required": ["family"],
            "properties": {
                "family": {"enum": ["power", "power_over_p", "exp_minus_one", "p_log", "table"]},
                "p": _NUM,
                "scale": _POS,
                "xs": {"type": "array", "items": _NUM},
                "ys": {"type": "array", "items": _NUM},
            },
            "additionalProperties": False,
        },
        "space": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["geometric", "two_sided_exp", "constant", "block_geometric", "table"]},
                "r": _POS,
                "base": _POS,
                "c": _POS,
                "ratios": {"type": "array", "items": _POS, "minItems": 1},
                "scales": {"type": "array", "items": _POS, "minItems": 1},
                "window": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
                "weights": {"type": "object", "additionalProperties": _POS},
                "tail": {},
            },
            "additionalProperties": False,
        },
        "transform": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["identity", "shift", "table"]},
                "step": _INT,
                "map": {"type": "object", "additionalProperties": _INT},
                "off_window": {"enum": ["reject", "extend_by_shift"]},
            },
            "additionalProperties": False,
        },
        "dissipative": {
            "type": "object",
            "required": ["W"],
            "properties": {
                "W": {"type": "array", "items": _INT, "minItems": 1},
                "k_window": {"type": "integer", "minimum": 0},
                "subsets": {
                    "oneOf": [
                        {"const": "exhaustive"},
                        {"type": "object", "properties": {"sample": _INT, "seed": _INT},
                         "additionalProperties": False},
                    ]
                },
            },
            "additionalProperties": False,
        },
        "classifier": {
            "type": "object",
            "properties": {
                "horizon": {"type": "integer", "minimum": 1},
                "margin": {"type": "number", "minimum": 0},
                "criteria": {"type": "array", "items": {"enum": list(CRITERIA)}},
            },
            "additionalProperties": False,
        },
        "probe": {
            "type": "object",
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "seed": _INT,
                "horizon": {"type": "integer", "minimum": 1},
                "M": _POS,
                "support_max": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "function": {
            "type": "object",
            "required": ["coeffs"],
            "properties": {"coeffs": {"type": "object", "additionalProperties": _NUM},
                           "dual": {"type": "boolean"}},
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "required": ["parameter", "values"],
            "properties": {"parameter": {"type": "string"}, "values": {"type": "array", "minItems": 1},
                           "workers": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    },
}


class ScenarioError(ValueError):
    """The scenario file is malformed or inconsistent."""


class Scenario:
    """A validated scenario with defaults filled in."""

    def __init__(self, data, seed=None, horizon=None):
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ScenarioError(f"{path}: {exc.message}") from None
        self.data = copy.deepcopy(data)
        cls = dict(data.get("classifier", {}))
        self.horizon = int(horizon if horizon is not None else cls.get("horizon", 64))
        self.margin = float(cls.get("margin", 1e-6))
        self.criteria = tuple(cls.get("criteria", CRITERIA))
        probe = dict(data.get("probe", {}))
        self.seed = int(seed if seed is not None else probe.get("seed", 7))
        self.probe = {
            "samples": int(probe.get("samples", 64)),
            "seed": self.seed,
            "horizon": int(horizon if horizon is not None else probe.get("horizon", 40)),
            "threshold": float(probe.get("M", 1e3)),
            "support_max": int(probe.get("support_max", 8)),
        }
        diss = data.get("dissipative")
        self.dissipative = None
        if diss is not None:
            subsets = diss.get("subsets", "exhaustive")
            if isinstance(subsets, dict) and seed is not None:
                subsets = dict(subsets, seed=self.seed)
            self.dissipative = {"W": list(diss["W"]), "k_window": int(diss.get("k_window", 64)),
                                "subsets": subsets}
        try:
            self.system = CompositionSystem.from_spec(self.data)
        except (ValueError, TypeError, KeyError) as exc:
            raise ScenarioError(str(exc)) from None
        self._cross_check()

    @classmethod
    def load(cls, path, seed=None, horizon=None):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario: {exc}") from None
        return cls(data, seed=seed, horizon=horizon)

    def _cross_check(self):
        sp = self.system.space
        if self.dissipative is not None:
            for a in self.dissipative["W"]:
                if not sp.in_window(a):
                    raise ScenarioError(f"dissipative/W: atom {a} lies outside the space window")
        fn = self.data.get("function")
        if fn is not None:
            for key in fn["coeffs"]:
                try:
                    atom = int(key)
                except ValueError:
                    raise ScenarioError(f"function/coeffs: {key!r} is not an atom index") from None
                if not sp.in_window(atom):
                    raise ScenarioError(f"function/coeffs: atom {atom} lies outside the space window")
        if "probe" in self.data:
            lo, hi = sp.window
            step = abs(self.system.transform.shift_outside or 1)
            if 2 * self.probe["horizon"] * step > hi - lo:
                raise ScenarioError("probe/horizon: orbits leave the space window")

    def function(self):
        fn = self.data.get("function")
        if fn is None:
            raise ScenarioError("scenario has no function")
        return SimpleFunction({int(k): v for k, v in fn["coeffs"].items()})

    def structure(self):
        if self.dissipative is None:
            return None
        d = self.dissipative
        return DissipativeStructure(self.system, d["W"], d["k_window"], d["subsets"])


def to_jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "value") and hasattr(obj, "name") and not isinstance(obj, (int, str)):
        return obj.value
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps(report):
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def _header(sc, subcommand):
    return {"tool": "orlicz", "version": __version__, "subcommand": subcommand, "seed": sc.seed,
            "scenario": sc.data}


def _guarded(name, fn, family):
    """Run a classifier; unmet preconditions and window escapes become Undetermined."""
    try:
        return fn()
    except PreconditionError as exc:
        v = Verdict(name, UNDETERMINED, f"{family} criterion: precondition not met", notes=[str(exc)])
        v.values["precondition"] = False
        return v
    except WindowEscape as exc:
        return Verdict(name, UNDETERMINED, f"{family} criterion: window escape", witness=exc.atom,
                       notes=[str(exc)])


def young_report(sc):
    phi = sc.system.phi
    psi = conjugate(phi)
    ys = np.geomspace(1e-3, 1e3, 61)
    table = [{"y": float(y), "psi": float(psi(y))} for y in ys]
    undetermined = psi.meta.get("undetermined", []) if psi.meta else []
    rep = _header(sc, "young")
    rep.update({
        "young": phi.to_spec(),
        "delta2": check_delta2(phi).to_dict(),
        "delta_prime": check_delta_prime(phi).to_dict(),
        "conjugate": {"spec": psi.to_spec() if psi.is_power_type else {"family": "table"},
                      "table": table, "undetermined": list(undetermined)},
    })
    return rep, {"conjugate.csv": [("y", "psi")] + [(r["y"], r["psi"]) for r in table]}


def norm_report_for(sc):
    f = sc.function()
    sp, phi = sc.system.space, sc.system.phi
    fn = sc.data.get("function", {})
    dual = bool(fn.get("dual", len(f) <= 4))
    nr = norm_report(sp, phi, f, dual=dual)
    rep = _header(sc, "norm")
    rep["norms"] = nr.to_dict()
    vals = set(np.abs(f.values).tolist())
    if len(vals) == 1 and not f.is_zero():
        rep["norms"]["indicator"] = vals.pop() * indicator_norm(sp, phi, f.atoms.tolist())
    return rep, {}


def _certificates(sc, structure):
    sysm = sc.system
    cert = {
        "boundedness": sysm.boundedness.to_dict(),
        "delta2": sysm.delta2.to_dict(),
        "delta_prime": sysm.delta_prime.to_dict(),
    }
    if structure is not None:
        cert["dissipative"] = structure.certificate.to_dict()
        if structure.verified:
            cert["distortion_K"] = structure.distortion.to_dict()
            cert["distortion_H"] = structure.generalized.to_dict()
    return cert


def _ratio_rows(sc, structure):
    K = structure.reach(min(sc.horizon, structure.k_window) or 1)
    ks = np.arange(-K, K + 1)
    a = ratio_sequence(sc.system, structure.W, ks)
    return [("k", "a_k")] + list(zip(ks.tolist(), a.tolist()))


def classify_verdicts(sc, structure):
    verdicts = []
    crit = sc.criteria
    sysm = sc.system
    if "general" in crit:
        verdicts.append(_guarded("positively_expansive", lambda: positively_expansive_general(sysm, sc.horizon), "general"))
        verdicts.append(_guarded("expansive", lambda: expansive_general(sysm, sc.horizon), "general"))
    if structure is not None:
        if "dissipative" in crit:
            for name, fn in (("positively_expansive", positively_expansive_dissipative),
                             ("expansive", expansive_dissipative),
                             ("uniformly_positively_expansive", uniformly_positively_expansive_dissipative),
                             ("uniformly_expansive", uniformly_expansive_dissipative)):
                verdicts.append(_guarded(name, lambda fn=fn: fn(structure), "dissipative"))
        if "instability" in crit:
            verdicts.append(_guarded("structural_instability",
                                     lambda: structural_instability(structure, sc.horizon, sc.margin), "sufficient condition"))
        if "stability" in crit:
            verdicts.append(_guarded("strong_structural_stability",
                                     lambda: strong_structural_stability(structure, sc.horizon, sc.margin), "sufficient condition"))
    return verdicts


class Unbounded(RuntimeError):
    """Raised after the report is assembled when the operator is not bounded."""

    def __init__(self, report, files):
        super().__init__("composition operator is not bounded")
        self.report, self.files = report, files


def classify_report(sc):
    structure = sc.structure()
    rep = _header(sc, "classify")
    rep["certificates"] = _certificates(sc, structure)
    files = {}
    if sc.system.boundedness.status == UNBOUNDED:
        rep["verdicts"] = []
        raise Unbounded(rep, files)
    verdicts = classify_verdicts(sc, structure)
    rep["verdicts"] = [v.to_dict() for v in verdicts]
    if structure is not None and structure.verified:
        est = exponent_estimates(structure, sc.horizon)
        rep["exponents"] = est.to_dict()
        files["ratio_sequence.csv"] = _ratio_rows(sc, structure)
        files["exponents.csv"] = [("n", "exponent", "value")] + est.traces()
    return rep, files


def stability_report(sc):
    structure = sc.structure()
    if structure is None:
        raise ScenarioError("stability needs a dissipative section")
    rep = _header(sc, "stability")
    rep["certificates"] = _certificates(sc, structure)
    if sc.system.boundedness.status == UNBOUNDED:
        raise Unbounded(rep, {})
    files = {}
    if structure.verified:
        est = exponent_estimates(structure, sc.horizon)
        rep["exponents"] = est.to_dict()
        files["exponents.csv"] = [("n", "exponent", "value")] + est.traces()
    rep["verdicts"] = [
        _guarded("structural_instability", lambda: structural_instability(structure, sc.horizon, sc.margin), "sufficient condition").to_dict(),
        _guarded("strong_structural_stability",
                 lambda: strong_structural_stability(structure, sc.horizon, sc.margin), "sufficient condition").to_dict(),
    ]
    try:
        rep["shadowing"] = shadowing_equivalence_report(structure, sc.horizon)
    except PreconditionError as exc:
        rep["shadowing"] = {"precondition": False, "statements": [str(exc)]}
    return rep, files


def probe_report(sc):
    rep = _header(sc, "probe")
    rep["boundedness"] = sc.system.boundedness.to_dict()
    if sc.system.boundedness.status == UNBOUNDED:
        raise Unbounded(rep, {})
    p = sc.probe
    try:
        pr = expansivity_probe(sc.system, p["samples"], p["seed"], p["horizon"], p["threshold"], p["support_max"])
    except (ValueError, WindowEscape) as exc:
        raise ScenarioError(f"probe: {exc}") from None
    rep["probe"] = pr.to_dict()
    rows = [("sample", "forward_max", "backward_max", "first_exceed")]
    for i, (fm, bm, fe) in enumerate(zip(pr.forward_max, pr.backward_max, pr.first_exceed)):
        rows.append((i, fm, bm, "" if fe is None else fe))
    return rep, {"probe.csv": rows}


def _set_path(data, path, value):
    keys = path.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def _sweep_point(base, parameter, value, seed, horizon):
    """Verdict statuses and exponents for one grid point (runs in a worker)."""
    data = copy.deepcopy(base)
    _set_path(data, parameter, value)
    point = Scenario(data, seed=seed, horizon=horizon)
    structure = point.structure()
    row = {"value": value, "boundedness": point.system.boundedness.status}
    if point.system.boundedness.status == UNBOUNDED:
        return row
    for v in classify_verdicts(point, structure):
        key = v.criterion + ("" if v.reference.startswith("general") else "_dissipative")
        if v.criterion in ("structural_instability", "strong_structural_stability"):
            key = v.criterion
        row[key] = v.status.value
        cond = v.values.get("condition") if isinstance(v.values, dict) else None
        if cond:
            row[key + "_condition"] = cond
    if structure is not None and structure.verified:
        est = exponent_estimates(structure, point.horizon)
        for name in EXPONENT_NAMES:
            row["lambda_" + name] = est.value(name)
    return row


def sweep_report(sc):
    sw = sc.data.get("sweep")
    if sw is None:
        raise ScenarioError("scenario has no sweep section")
    base = {k: v for k, v in sc.data.items() if k != "sweep"}
    values = list(sw["values"])
    # validate every grid point up front so a bad value exits before any work
    for value in values:
        data = copy.deepcopy(base)
        _set_path(data, sw["parameter"], value)
        Scenario(data, seed=sc.seed, horizon=sc.horizon)
    args = [(base, sw["parameter"], v, sc.seed, sc.horizon) for v in values]
    workers = min(int(sw.get("workers", os.cpu_count() or 1)), len(values))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, *zip(*args)))
    else:
        points = [_sweep_point(*a) for a in args]
    columns = ["value"] + sorted({k for r in points for k in r} - {"value"})
    rows = [tuple(columns)] + [tuple(r.get(c, "") for c in columns) for r in points]
    rep = _header(sc, "sweep")
    rep["parameter"] = sw["parameter"]
    rep["points"] = points
    return rep, {"sweep.csv": rows}


RUNNERS = {
    "young": young_report,
    "norm": norm_report_for,
    "classify": classify_report,
    "stability": stability_report,
    "probe": probe_report,
    "sweep": sweep_report,
}
