"""Expansivity and stability classifiers for composition operators.

Every decision about an infinite horizon is read off exact orbit rates
(see :mod:`orlicz.tails`); finite-horizon numbers are attached as evidence
but never turn an undecided verdict into Holds or Fails.

Condition tags used for uniform expansivity, on ``b_k = a_{-k}`` with
``a_k = Phi^{-1}(1/mu(phi**k(W)))``:

* ``forward_growth``: ``inf_k b_k / b_{k+n} -> inf`` over all ``k``
* ``backward_growth``: ``inf_k b_k / b_{k-n} -> inf`` over all ``k``
* ``split_growth``: ``forward_growth`` together with the backward limit over ``k <= 0``

Condition tags for strong structural stability, on the exponents of ``a_k``:

* ``uniform_contraction``: ``limsup sup_k (a_{k+n}/a_k)**(1/n) < 1``
* ``uniform_expansion``: ``liminf inf_k (a_{k+n}/a_k)**(1/n) > 1``
* ``split_dichotomy``: backward sup over ``k <= 0`` below 1 and forward inverse inf over ``k >= 0`` above 1
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .dissipative import DissipativeStructure
from .tails import _ZERO, ell_slopes, growth_profile
from .verdict import FAILS, HOLDS, UNDETERMINED, PreconditionError, Verdict, WindowEscape

MARGIN = 1e-6

UNIFORM_TAGS = ("forward_growth", "backward_growth", "split_growth")
STABILITY_TAGS = ("uniform_contraction", "uniform_expansion", "split_dichotomy")


# ---------------------------------------------------------------------------
# general systems: singleton reduction over representative atoms


def _representatives(system):
    """Window atoms plus a band beyond each edge that meets every tail residue."""
    lo, hi = system.space.window
    s = abs(system.transform.shift_outside or 0)
    periods = [t.period for t in system.space.tails.values() if t.exact] or [1]
    pmax = max(periods)
    band = 2 * max(s, 1) * pmax + pmax
    region = system.transform.region()
    a, b = lo - band, hi + band
    if region is not None:
        a, b = min(a, region[0] - band), max(b, region[1] + band)
    return np.arange(a, b + 1, dtype=np.int64)


def _atom_profiles(system, direction):
    tr, sp = system.transform, system.space
    return {int(a): growth_profile(sp, tr, [a], direction) for a in _representatives(system)}


def _closest_to_origin(atoms):
    return min(atoms, key=lambda a: (abs(a), a))


def _inf_evidence(system, atom, direction, horizon):
    """``min_{1<=n<=H} Phi^{-1}(1/mu(phi**(d*n)(a)))`` over the computable part of the horizon."""
    vals = []
    for n in range(1, horizon + 1):
        try:
            lm = system.log_measure_orbit([atom], [direction * n])[0]
        except WindowEscape:
            break
        vals.append(float(np.exp(system.phi.log_inverse_exp(-lm))))
    return (min(vals) if vals else math.nan), len(vals)


def _sup_bound(system, atom, profile):
    """Closed-form sup over ``n >= 1`` of ``N(C**n chi_a) / N(chi_a)`` for a bounded orbit."""
    top = profile.sup_log_measure()
    if not math.isfinite(top):
        return math.nan
    phi = system.phi
    base = phi.log_inverse_exp(-system.space.log_measure([atom]))
    return float(np.exp(base - phi.log_inverse_exp(-top)))


def positively_expansive_general(system, horizon=256):
    """Every atom's backward orbit measure must be unbounded (singleton reduction)."""
    system.require_bounded()
    profiles = _atom_profiles(system, -1)
    failed, open_ = [], []
    for a, prof in profiles.items():
        st, _ = prof.sup_infinite()
        if st is FAILS:
            failed.append(a)
        elif st is UNDETERMINED:
            open_.append(a)
    ref = "general criterion: backward orbit measures of every atom"
    if failed:
        w = _closest_to_origin(failed)
        inf_ev, used = _inf_evidence(system, w, -1, horizon)
        values = {"inf_evidence": inf_ev, "horizon_used": used,
                  "sup_norm_bound": _sup_bound(system, w, profiles[w])}
        return Verdict("positively_expansive", FAILS, ref, w, profiles[w].describe(), values,
                       [f"{len(failed)} representative atoms have bounded backward orbits"])
    if open_:
        w = _closest_to_origin(open_)
        return Verdict("positively_expansive", UNDETERMINED, ref, w, profiles[w].describe(),
                       {"undetermined_atoms": len(open_)},
                       [profiles[w].orbits[0].reason or "orbit asymptotics unknown"])
    return Verdict("positively_expansive", HOLDS, ref, None, _models(profiles),
                   {"atoms_checked": len(profiles)})


def _models(profiles):
    models = set()
    for p in profiles.values():
        models.update(p.tail_models())
    return ";".join(sorted(models))


def expansive_general(system, horizon=256):
    """Every atom's orbit measure must be unbounded in at least one time direction."""
    system.require_bounded()
    back = _atom_profiles(system, -1)
    fwd = _atom_profiles(system, 1)
    failed, open_ = [], []
    for a in back:
        sb, _ = back[a].sup_infinite()
        sf, _ = fwd[a].sup_infinite()
        if HOLDS in (sb, sf):
            continue
        if sb is FAILS and sf is FAILS:
            failed.append(a)
        else:
            open_.append(a)
    ref = "general criterion: two-sided orbit measures of every atom"
    if failed:
        w = _closest_to_origin(failed)
        return Verdict("expansive", FAILS, ref, w, back[w].describe(),
                       {"sup_norm_bound_backward": _sup_bound(system, w, back[w]),
                        "sup_norm_bound_forward": _sup_bound(system, w, fwd[w])})
    if open_:
        w = _closest_to_origin(open_)
        return Verdict("expansive", UNDETERMINED, ref, w, back[w].describe(),
                       {"undetermined_atoms": len(open_)})
    return Verdict("expansive", HOLDS, ref, None, _models(back) + ";" + _models(fwd),
                   {"atoms_checked": len(back)})


# ---------------------------------------------------------------------------
# dissipative systems: decisions on the generator W


def _check_structure(structure):
    structure.system.require_bounded()
    structure.require_verified()
    structure.require_bounded_distortion()


def _require_delta2(structure):
    cert = structure.system.delta2
    if cert.verdict is not HOLDS:
        raise PreconditionError(f"the Young function is not certified doubling ({cert.verdict.value})")


def _require_delta_prime(structure):
    cert = structure.system.delta_prime
    if cert.verdict is not HOLDS:
        raise PreconditionError(f"the Young function is not certified submultiplicative ({cert.verdict.value})")


def _distortion_note(structure):
    d = structure.distortion
    return f"distortion evidence K={d.constant:.6g} ({d.tail_verdict} beyond the window)"


def positively_expansive_dissipative(structure):
    """``inf_n Phi^{-1}(1/mu(phi**-n(W))) = 0``, decided on the backward profile of W."""
    _check_structure(structure)
    prof = structure.profile(-1)
    st, _ = prof.sup_infinite()
    return Verdict("positively_expansive", st, "dissipative criterion: backward iterates of W",
                   list(structure.W), prof.describe(), {"class_rates": list(prof.class_rates())},
                   [_distortion_note(structure)])


def expansive_dissipative(structure):
    """Two-sided infimum over ``n`` in Z; both one-sided parts are reported."""
    _check_structure(structure)
    back, fwd = structure.profile(-1), structure.profile(1)
    sb, _ = back.sup_infinite()
    sf, _ = fwd.sup_infinite()
    if HOLDS in (sb, sf):
        st = HOLDS
    elif sb is FAILS and sf is FAILS:
        st = FAILS
    else:
        st = UNDETERMINED
    return Verdict("expansive", st, "dissipative criterion: iterates of W in both directions",
                   list(structure.W), back.describe() + ";" + fwd.describe(),
                   {"backward": sb.value, "forward": sf.value}, [_distortion_note(structure)])


def uniformly_positively_expansive_dissipative(structure):
    """``Phi^{-1}(1/mu(phi**-n(W))) -> 0``; needs a doubling Young function."""
    _check_structure(structure)
    _require_delta2(structure)
    prof = structure.profile(-1)
    st, cls = prof.lim_infinite()
    values = {"class_rates": list(prof.class_rates())}
    if cls is not None:
        values["bounded_class"] = cls
    return Verdict("uniformly_positively_expansive", st, "dissipative criterion: limit along backward iterates of W",
                   list(structure.W), prof.describe(), values, [_distortion_note(structure)])


@dataclass
class SideSlopes:
    """Range of per-step slopes of ``log a_k`` as ``k -> +inf`` (right) or ``-inf`` (left)."""

    lo: float
    hi: float

    @property
    def oscillating(self):
        return self.hi - self.lo > _ZERO


def side_slopes(structure):
    """Asymptotic slopes in ``k`` of ``log a_k`` on each side, or ``None`` if not exact."""
    phi = structure.system.phi
    right = ell_slopes(structure.profile(1), phi)
    left = ell_slopes(structure.profile(-1), phi)
    if right is None or left is None:
        return None

    def side(vals, flip):
        vals = [-v for v in vals] if flip else list(vals)
        lo, hi = min(vals), max(vals)
        if hi - lo > _ZERO:
            return SideSlopes(-math.inf, math.inf)
        return SideSlopes(lo, hi)

    return {"right": side(right, False), "left": side(left, True)}


def uniformly_expansive_dissipative(structure):
    """Which of the three uniform growth conditions holds, if any."""
    _check_structure(structure)
    _require_delta2(structure)
    sl = side_slopes(structure)
    ref = "dissipative criterion: uniform growth of generator norms"
    models = structure.profile(-1).describe() + ";" + structure.profile(1).describe()
    if sl is None:
        return Verdict("uniformly_expansive", UNDETERMINED, ref, list(structure.W), models,
                       notes=["generator orbit asymptotics are not exactly known"])
    R, L = sl["right"], sl["left"]
    conds = {
        "forward_growth": min(R.lo, L.lo) > _ZERO,
        "backward_growth": max(R.hi, L.hi) < -_ZERO,
    }
    conds["split_growth"] = conds["forward_growth"] and R.hi < -_ZERO
    held = [t for t in UNIFORM_TAGS if conds[t]]
    values = {"conditions": {t: (HOLDS if conds[t] else FAILS).value for t in UNIFORM_TAGS},
              "slopes": {"right": [R.lo, R.hi], "left": [L.lo, L.hi]}}
    if held:
        values["condition"] = held[0]
        return Verdict("uniformly_expansive", HOLDS, ref, held[0], models, values, [_distortion_note(structure)])
    # a bounded infimum: the slope on some side has the wrong sign
    return Verdict("uniformly_expansive", FAILS, ref, {"right": [R.lo, R.hi], "left": [L.lo, L.hi]},
                   models, values, [_distortion_note(structure)])


def uniform_general_heuristic(system, horizon, family, mode="expansive", structure=None):
    """Uniform divergence of norm ratios over a finite family of atom sets.

    ``mode="positive"`` needs divergence along ``phi**-n`` for every member;
    ``mode="expansive"`` accepts either direction per member (the two parts
    may overlap).  A finite family can refute uniformity but never prove it,
    so Holds is only returned by deferring to a dissipative structure.
    """
    family = [sorted({int(a) for a in F}) for F in family]
    if not family or any(not F for F in family):
        raise ValueError("the set family must be nonempty and contain nonempty sets")
    cert = system.delta2
    if cert.verdict is not HOLDS:
        raise PreconditionError("the Young function is not certified doubling")
    if structure is not None:
        delegate = (uniformly_positively_expansive_dissipative(structure) if mode == "positive"
                    else uniformly_expansive_dissipative(structure))
        delegate.notes.append("decided through the dissipative structure")
        return delegate
    sp, tr, phi = system.space, system.transform, system.phi
    members = []
    verdict_status, witness = UNDETERMINED, None
    for F in family:
        a_side, _ = growth_profile(sp, tr, F, -1).lim_infinite()
        b_side, _ = growth_profile(sp, tr, F, 1).lim_infinite()
        ratios = {}
        for name, d in (("A", -1), ("B", 1)):
            try:
                lm0 = sp.log_measure(F)
                lmn = system.log_measure_orbit(F, [d * horizon])[0]
                ratios[name] = float(np.exp(phi.log_inverse_exp(-lm0) - phi.log_inverse_exp(-lmn)))
            except WindowEscape:
                ratios[name] = math.nan
        members.append({"F": F, "A": a_side.value, "B": b_side.value, "ratio_at_horizon": ratios})
        fails = a_side is FAILS if mode == "positive" else (a_side is FAILS and b_side is FAILS)
        if fails and witness is None:
            verdict_status, witness = FAILS, F
    notes = ["a finite family cannot certify uniformity"]
    return Verdict("uniform_heuristic", verdict_status, f"general uniform criterion ({mode})", witness,
                   None, {"members": members, "mode": mode}, notes)


# ---------------------------------------------------------------------------
# exponents and stability


@dataclass
class Exponent:
    name: str
    numeric: float
    closed_form: Optional[float]
    trace: list = field(default_factory=list)
    trend: str = "flat"
    extrapolated: float = math.nan

    @property
    def value(self):
        return self.closed_form if self.closed_form is not None else self.numeric

    def to_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "numeric": self.numeric,
            "closed_form": self.closed_form,
            "trend": self.trend,
            "extrapolated": self.extrapolated,
        }


EXPONENT_NAMES = ("sup_z", "inf_z", "sup_forward", "inf_forward_inverse", "inf_backward", "sup_backward")


@dataclass
class ExponentEstimates:
    horizon: int
    exponents: dict
    exact: bool

    def __getitem__(self, name):
        return self.exponents[name]

    def value(self, name):
        return self.exponents[name].value

    def to_dict(self):
        return {"horizon": self.horizon, "exact": self.exact,
                "exponents": {k: v.to_dict() for k, v in self.exponents.items()}}

    def traces(self):
        """Rows ``(n, name, value)`` for CSV output."""
        rows = []
        for name, e in self.exponents.items():
            for n, v in enumerate(e.trace, start=1):
                rows.append((n, name, v))
        return rows


def _trend(trace):
    """Direction of the last quartile plus a ``c0 + c1/n`` extrapolation."""
    vals = np.asarray(trace, dtype=float)
    finite = np.isfinite(vals)
    if vals.size < 4 or not finite.all():
        return "unknown", math.nan
    q = vals[-max(2, vals.size // 4):]
    d = np.diff(q)
    scale = max(1.0, float(np.max(np.abs(q))))
    if np.all(np.abs(d) <= 1e-12 * scale):
        trend = "flat"
    elif np.all(d >= -1e-12 * scale):
        trend = "increasing"
    elif np.all(d <= 1e-12 * scale):
        trend = "decreasing"
    else:
        trend = "oscillating"
    half = vals[vals.size // 2:]
    ns = np.arange(vals.size - half.size + 1, vals.size + 1, dtype=float)
    coef = np.polyfit(1.0 / ns, half, 1)
    return trend, float(coef[1])


def _closed_exponents(structure):
    sl = side_slopes(structure)
    if sl is None:
        return None
    R, L = sl["right"], sl["left"]
    with np.errstate(over="ignore"):
        ex = lambda v: float(np.exp(v))
        return {
            "sup_z": ex(max(R.hi, L.hi)),
            "inf_z": ex(min(R.lo, L.lo)),
            "sup_forward": ex(R.hi),
            "inf_forward_inverse": ex(-R.hi),
            "inf_backward": ex(L.lo),
            "sup_backward": ex(L.hi),
        }


def exponent_estimates(structure, horizon=64):
    """Numeric traces over ``n <= horizon`` and closed forms of the six exponents.

    The ratio sequence is evaluated on ``|k| <= 2*horizon`` (or the reachable
    part of it) and the inner sup/inf over admissible ``k`` is taken for every
    ``n``; the reported numeric value is the one at the largest ``n``.
    """
    horizon = int(horizon)
    K = structure.reach(2 * horizon)
    ks = np.arange(-K, K + 1)
    closed = _closed_exponents(structure)
    exps = {}
    if K >= 1:
        ell = structure.log_ratios(ks)
        n_max = min(horizon, 2 * K)
        sup_z, inf_z = kernels.pair_extrema(ell, n_max, 0, 2 * K)
        nf = min(horizon, K)
        sup_f, inf_f = kernels.pair_extrema(ell, nf, K, 2 * K)
        sup_b, inf_b = kernels.pair_extrema(ell, nf, 0, K)
        raw = {
            "sup_z": np.exp(sup_z),
            "inf_z": np.exp(inf_z),
            "sup_forward": np.exp(sup_f),
            "inf_forward_inverse": np.exp(-sup_f),
            "inf_backward": np.exp(inf_b),
            "sup_backward": np.exp(sup_b),
        }
    else:
        raw = {name: np.array([]) for name in EXPONENT_NAMES}
    for name in EXPONENT_NAMES:
        trace = raw[name]
        trend, extra = _trend(trace)
        exps[name] = Exponent(name, float(trace[-1]) if trace.size else math.nan,
                              None if closed is None else closed[name], trace.tolist(), trend, extra)
    return ExponentEstimates(horizon, exps, closed is not None)


def structural_instability(structure, horizon=64, margin=MARGIN):
    """Sufficient condition for failure of structural stability (Holds or Undetermined)."""
    _check_structure(structure)
    _require_delta_prime(structure)
    est = exponent_estimates(structure, horizon)
    values = {"sup_forward": est["sup_forward"].to_dict(), "inf_backward": est["inf_backward"].to_dict()}
    ref = "sufficient condition: forward contraction with backward expansion"
    if not est.exact:
        return Verdict("structural_instability", UNDETERMINED, ref, None, None, values,
                       ["exponents are not known in closed form; finite traces are not decisive"])
    ok = est.value("sup_forward") < 1 - margin and est.value("inf_backward") > 1 + margin
    return Verdict("structural_instability", HOLDS if ok else UNDETERMINED, ref, None,
                   structure.profile(1).describe() + ";" + structure.profile(-1).describe(), values)


def strong_structural_stability(structure, horizon=64, margin=MARGIN):
    """Sufficient exponent conditions for strong structural stability (Holds or Undetermined)."""
    _check_structure(structure)
    _require_delta_prime(structure)
    est = exponent_estimates(structure, horizon)
    ref = "sufficient condition: exponent dichotomy of generator norms"
    values = {name: est[name].to_dict() for name in EXPONENT_NAMES}
    if not est.exact:
        return Verdict("strong_structural_stability", UNDETERMINED, ref, None, None, values,
                       ["exponents are not known in closed form; finite traces are not decisive"])
    v = est.value
    conds = {
        "uniform_contraction": v("sup_z") < 1 - margin,
        "uniform_expansion": v("inf_z") > 1 + margin,
        "split_dichotomy": v("sup_backward") < 1 - margin and v("inf_forward_inverse") > 1 + margin,
    }
    held = [t for t in STABILITY_TAGS if conds[t]]
    values["conditions"] = {t: conds[t] for t in STABILITY_TAGS}
    models = structure.profile(1).describe() + ";" + structure.profile(-1).describe()
    if held:
        values["condition"] = held[0]
        return Verdict("strong_structural_stability", HOLDS, ref, held[0], models, values)
    return Verdict("strong_structural_stability", UNDETERMINED, ref, None, models, values,
                   ["no sufficient condition is met"])


def shadowing_equivalence_report(structure, horizon=64):
    """Combine the stability verdicts into labelled implications.

    Shadowing itself is never evaluated; the report only states which
    implications the computed verdicts make available.
    """
    _require_delta_prime(structure)
    hyp = positively_expansive_dissipative(structure)
    sss = strong_structural_stability(structure, horizon)
    inst = structural_instability(structure, horizon)
    statements = []
    if sss.holds:
        statements.append("strong structural stability concluded (sufficient condition met)")
    if hyp.holds:
        statements.append("hypothesis met: shadowing is equivalent to strong structural stability here")
        if sss.holds:
            statements.append("by that equivalence, shadowing is implied")
    elif hyp.status is FAILS:
        statements.append("hypothesis fails: the shadowing equivalence is not applicable")
    if inst.holds:
        statements.append("not structurally stable; shadowing absent by contrapositive")
    return {
        "hypothesis": hyp.to_dict(),
        "strong_structural_stability": sss.to_dict(),
        "structural_instability": inst.to_dict(),
        "equivalence_applicable": hyp.holds,
        "shadowing_absent": inst.holds,
        "statements": statements,
    }
