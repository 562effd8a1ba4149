"""Dissipative decompositions generated by a finite set and their distortion constants."""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .norms import log_indicator_norm
from .tails import growth_profile
from .verdict import FAILS, HOLDS, UNDETERMINED, PreconditionError, Verdict, WindowEscape

EXHAUSTIVE_LIMIT = 12


def _generator(W):
    atoms = sorted({int(a) for a in W})
    if not atoms:
        raise ValueError("the generator W must be a nonempty set of atoms")
    return tuple(atoms)


def _shift_tiling(W, step, coverage):
    """Exact test for translates ``W + k*step`` being disjoint (and covering Z)."""
    if step == 0:
        return FAILS, W[0], "the identity map fixes W"
    m = abs(step)
    seen = {}
    for a in W:
        r = a % m
        if r in seen:
            return FAILS, a, f"atoms {seen[r]} and {a} lie on one orbit"
        seen[r] = a
    if coverage and len(seen) < m:
        missing = next(r for r in range(m) if r not in seen)
        return FAILS, missing, f"atom {missing} is never reached"
    return HOLDS, None, "translates of W tile the integers" if coverage else "translates of W are disjoint"


def _enumerate_images(system, W, k_window, coverage):
    owner = {}
    tr = system.transform
    reach = True
    for k in range(-k_window, k_window + 1):
        try:
            img = tr.power(np.array(W), k)
        except WindowEscape as exc:
            reach = False
            note = f"orbit leaves the transform table at atom {exc.atom}"
            continue
        for a in img.tolist():
            if a in owner and owner[a] != k:
                return FAILS, a, f"atom {a} lies in the images for k={owner[a]} and k={k}"
            owner[a] = k
    if coverage and owner:
        lo, hi = min(owner), max(owner)
        for a in range(lo, hi + 1):
            if a not in owner:
                return FAILS, a, f"atom {a} is not covered within |k| <= {k_window}"
    if not reach:
        return UNDETERMINED, None, note
    return HOLDS, None, f"checked |k| <= {k_window} on the hull of the images"


def verify_dissipative(system, W, k_window=64):
    """Are the sets ``phi**k(W)`` pairwise disjoint with union covering the atoms?"""
    W = _generator(W)
    tr = system.transform
    if tr.is_shift:
        status, witness, note = _shift_tiling(W, tr.step, coverage=True)
        exact = True
    else:
        status, witness, note = _enumerate_images(system, W, k_window, coverage=True)
        exact = False
    return Verdict("dissipative", status, "disjoint union of the iterates of W", witness,
                   values={"W": list(W), "k_window": k_window, "exact": exact}, notes=[note])


def wandering_check(system, W, k_window=64):
    """Are the preimages ``phi**-n(W)`` pairwise disjoint?"""
    W = _generator(W)
    tr = system.transform
    if tr.is_shift:
        status, witness, note = _shift_tiling(W, tr.step, coverage=False)
    else:
        status, witness, note = _enumerate_images(system, W, k_window, coverage=False)
    return Verdict("wandering", status, "pairwise disjoint preimages of W", witness,
                   values={"W": list(W), "k_window": k_window}, notes=[note])


def _subset_masks(n, subsets):
    """Boolean rows selecting the evidence subsets of W (singletons always included)."""
    exhaustive = subsets == "exhaustive" and n <= EXHAUSTIVE_LIMIT
    if exhaustive:
        rows = [[(m >> i) & 1 for i in range(n)] for m in range(1, 2 ** n)]
        return np.array(rows, dtype=bool), True
    spec = subsets if isinstance(subsets, dict) else {}
    count = int(spec.get("sample", 256))
    rng = np.random.default_rng(int(spec.get("seed", 3)))
    rows = [np.eye(n, dtype=bool)[i] for i in range(n)] + [np.ones(n, dtype=bool)]
    for _ in range(count):
        row = rng.random(n) < 0.5
        if row.any():
            rows.append(row)
    masks = np.unique(np.array(rows), axis=0)
    return masks, masks.shape[0] == 2 ** n - 1


def _log_measures(system, W, ms, masks):
    """``log mu(phi**-m(F))`` for each ``m`` (rows) and subset mask (columns)."""
    atoms = np.array(W, dtype=np.int64)
    out = np.empty((len(ms), masks.shape[0]))
    for r, m in enumerate(ms):
        lw = system.space.log_weight(system.transform.power(atoms, -int(m)))
        top = lw.max()
        e = np.exp(lw - top)
        out[r] = top + np.log(masks.astype(float) @ e)
    return out


@dataclass
class DistortionReport:
    constant: float
    exhaustive: bool
    evidence: int
    k_window: int
    witness: dict = field(default_factory=dict)
    tail_verdict: str = "Undetermined"
    note: str = "evidence-only lower bound"

    def to_dict(self):
        return dict(self.__dict__)


def _rate_signature(orbit, L):
    return tuple(round(orbit.rate(c), 12) for c in range(L))


def distortion_tail_verdict(system, W):
    """Bounded distortion beyond any window, decided from orbit rates of W's atoms.

    If every atom of W has the same growth rate on each residue class (in both
    directions), the measure of ``phi**k(F)`` stays comparable to that of
    ``phi**k(W)``; different rates make the ratio drift geometrically.
    """
    status = HOLDS
    for d in (1, -1):
        prof = growth_profile(system.space, system.transform, W, d)
        if not prof.exact:
            return UNDETERMINED
        L = prof.period
        sigs = {_rate_signature(o, L) for o in prof.orbits}
        if len(sigs) > 1:
            return FAILS
    return status


def distortion_constant(system, W, k_window=64, subsets="exhaustive"):
    """Smallest ``K`` for which the distortion inequality holds on the evidence.

    Evidence is every ``|k| <= k_window`` and every subset of W (exhaustive up
    to 12 atoms, otherwise a seeded sample plus all singletons).
    """
    W = _generator(W)
    masks, exhaustive = _subset_masks(len(W), subsets)
    full = np.ones((1, len(W)), dtype=bool)
    ks = np.arange(-k_window, k_window + 1)
    phi = system.phi
    lm = _log_measures(system, W, ks, np.vstack([masks, full]))
    logn = log_indicator_norm(phi, lm)
    base = logn[ks == 0][0]
    logR = logn - base
    dev = np.abs(logR[:, :-1] - logR[:, -1:])
    idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    witness = {"k": int(ks[idx[0]]), "F": [a for a, on in zip(W, masks[idx[1]]) if on]}
    K = float(np.exp(dev.max()))
    return DistortionReport(K, exhaustive, int(masks.shape[0]), k_window, witness,
                            distortion_tail_verdict(system, W).value)


def generalized_distortion(system, W, s_window=16, t_window=16, subsets="exhaustive"):
    """Smallest ``H`` covering the two-time distortion ratios on an ``(s, t)`` grid."""
    W = _generator(W)
    masks, exhaustive = _subset_masks(len(W), subsets)
    full = np.ones((1, len(W)), dtype=bool)
    reach = s_window + t_window
    ms = np.arange(-reach, reach + 1)
    logn = log_indicator_norm(system.phi, _log_measures(system, W, ms, np.vstack([masks, full])))
    ss = np.arange(-s_window, s_window + 1)
    ts = np.arange(-t_window, t_window + 1)
    best, witness = 0.0, {}
    for s in ss:
        row_s = logn[s + reach]
        rows_ts = logn[ts + s + reach]
        diff = rows_ts - row_s  # log N(C^{t+s} chi_F) - log N(C^s chi_F)
        dev = np.abs(diff[:, :-1] - diff[:, -1:])
        m = float(dev.max())
        if m > best:
            i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
            best = m
            witness = {"s": int(s), "t": int(ts[i]), "F": [a for a, on in zip(W, masks[j]) if on]}
    return DistortionReport(float(np.exp(best)), exhaustive, int(masks.shape[0]), reach, witness,
                            distortion_tail_verdict(system, W).value)


def log_ratio_sequence(system, W, ks):
    """``log Phi^{-1}(1 / mu(phi**k(W)))`` for each ``k``."""
    W = _generator(W)
    lm = system.log_measure_orbit(W, ks)
    return system.phi.log_inverse_exp(-lm)


def ratio_sequence(system, W, ks):
    """``a_k = Phi^{-1}(1 / mu(phi**k(W)))``; plain evaluation when the measure is moderate."""
    W = _generator(W)
    ks = np.asarray(list(ks), dtype=np.int64)
    out = np.empty(ks.size)
    for i, k in enumerate(ks):
        img = system.transform.power(np.array(W), int(k))
        mu = system.space.measure(img)
        if 1e-300 < mu < 1e300:
            out[i] = system.phi.inverse(1.0 / mu)
        else:
            out[i] = math.exp(float(system.phi.log_inverse_exp(-system.space.log_measure(img))))
    return out


class DissipativeStructure:
    """A verified generator W of a dissipative system, with cached derived data."""

    def __init__(self, system, W, k_window=64, subsets="exhaustive", certificate=None):
        self.system = system
        self.W = _generator(W)
        self.k_window = int(k_window)
        self.subsets = subsets
        self.certificate = certificate or verify_dissipative(system, self.W, self.k_window)
        self._profiles = {}
        self._K = self._H = None

    @classmethod
    def build(cls, system, W, k_window=64, subsets="exhaustive"):
        return cls(system, W, k_window, subsets)

    @property
    def verified(self):
        return self.certificate.status is HOLDS

    def require_verified(self):
        if self.certificate.status is not HOLDS:
            raise PreconditionError(f"W does not generate a dissipative system: {self.certificate.notes}")

    @property
    def distortion(self):
        if self._K is None:
            kw = self.reach(self.k_window)
            self._K = distortion_constant(self.system, self.W, kw, self.subsets)
        return self._K

    @property
    def generalized(self):
        if self._H is None:
            half = self.reach(self.k_window) // 2
            self._H = generalized_distortion(self.system, self.W, half, half, self.subsets)
        return self._H

    def require_bounded_distortion(self):
        if self.distortion.tail_verdict == FAILS.value:
            raise PreconditionError("the system does not have bounded distortion on W")

    def profile(self, direction):
        if direction not in self._profiles:
            self._profiles[direction] = growth_profile(self.system.space, self.system.transform,
                                                       self.W, direction)
        return self._profiles[direction]

    def reach(self, limit):
        """Largest ``K <= limit`` with ``mu(phi**k(W))`` known for ``|k| <= K``."""
        if self.system.space.kind != "table" and self.system.transform.is_shift:
            return limit
        best = 0
        for k in range(1, limit + 1):
            try:
                self.system.log_measure_orbit(self.W, [k, -k])
            except WindowEscape:
                break
            best = k
        return best

    def log_ratios(self, ks):
        return log_ratio_sequence(self.system, self.W, ks)

    def ratios(self, ks):
        return ratio_sequence(self.system, self.W, ks)
