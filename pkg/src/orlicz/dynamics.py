"""Composition operators on atomic Orlicz spaces: boundedness, orbits, probes."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .norms import gauge_norm, log_indicator_norm, modular
from .space import AtomicMeasureSpace, SimpleFunction
from .transform import AtomTransformation
from .verdict import PreconditionError, WindowEscape
from .young import YoungFunction, check_delta2, check_delta_prime

BOUNDED = "Bounded"
UNBOUNDED = "Unbounded"
BOUND_UNDETERMINED = "Undetermined"

_PERIODIC_TOL = 1e-12


@dataclass
class BoundednessCertificate:
    """Per-atom sup of ``mu(phi^-1(a)) / mu(a)`` (and the same for ``phi``)."""

    status: str
    c: float
    c_inverse: float
    window: tuple
    witness: object = None
    witness_inverse: object = None
    reason: str = ""
    skipped: int = 0

    @property
    def bounded(self):
        return self.status == BOUNDED

    def to_dict(self):
        return {
            "status": self.status,
            "c": self.c,
            "c_inverse": self.c_inverse,
            "window": list(self.window),
            "witness": self.witness,
            "witness_inverse": self.witness_inverse,
            "reason": self.reason,
            "skipped": self.skipped,
        }


def _check_atoms(space, transform):
    lo, hi = space.window
    left, right = space.tails["left"], space.tails["right"]
    s = abs(transform.shift_outside or 0)
    a = min(lo, left.start if left.usable else lo) - s - 2 * (left.period if left.usable else 0) - 1
    b = max(hi, right.start if right.usable else hi) + s + 2 * (right.period if right.usable else 0) + 1
    region = transform.region()
    if region is not None:
        a, b = min(a, region[0] - s - 1), max(b, region[1] + s + 1)
    return np.arange(a, b + 1, dtype=np.int64)


def _side_periodic(tail, s):
    """Does ``mu(a - s) / mu(a)`` repeat with the tail period?"""
    P = tail.period
    lr = tail.log_ratios
    return all(abs(lr[(r - s) % P] - lr[r % P]) <= _PERIODIC_TOL for r in range(P))


def _ratio_sup(space, transform, atoms, n):
    best, arg, skipped = -math.inf, None, 0
    for a in atoms:
        try:
            img = int(transform.power([a], n)[0])
            v = float(space.log_weight(np.array([img, a])) @ np.array([1.0, -1.0]))
        except WindowEscape:
            skipped += 1
            continue
        if v > best:
            best, arg = v, int(a)
    return best, arg, skipped


def _exact_ratio(space, transform, atom, n, log_value):
    # Prefer the plain quotient of weights; the log form only guards overflow.
    if atom is None:
        return math.nan
    num = space.weight(int(transform.power([atom], n)[0]))
    den = space.weight(atom)
    if 0.0 < num < math.inf and 0.0 < den < math.inf:
        return num / den
    return math.exp(log_value)


def boundedness_check(space, transform, window=None):
    """Certificate for ``mu(phi^-1(A)) <= c mu(A)`` and the analogous bound for ``phi``.

    On atomic spaces the condition reduces to the per-atom ratio.  The sup is
    taken over the window plus a band reaching one full tail period past every
    modelled edge; a global verdict needs shift-like behaviour off the table
    and quasi-geometric tails on both sides.
    """
    if window is not None:
        atoms = np.arange(int(window[0]), int(window[1]) + 1, dtype=np.int64)
    else:
        atoms = _check_atoms(space, transform)
    fwd, fwd_arg, sk1 = _ratio_sup(space, transform, atoms, -1)
    inv, inv_arg, sk2 = _ratio_sup(space, transform, atoms, 1)
    span = (int(atoms[0]), int(atoms[-1]))
    c, ci = _exact_ratio(space, transform, fwd_arg, -1, fwd), _exact_ratio(space, transform, inv_arg, 1, inv)
    cert = BoundednessCertificate(BOUND_UNDETERMINED, c, ci, span, fwd_arg, inv_arg, skipped=sk1 + sk2)
    s = transform.shift_outside
    if transform.is_shift and transform.step == 0:
        cert.status, cert.reason = BOUNDED, "identity map"
        return cert
    if s is None:
        cert.reason = "map is undefined off its table"
        return cert
    for side in ("left", "right"):
        tail = space.tails[side]
        if not tail.exact:
            cert.reason = f"{side} tail is not quasi-geometric"
            return cert
        if not _side_periodic(tail, s):
            cert.status = UNBOUNDED
            cert.reason = f"ratio grows geometrically along the {side} tail"
            return cert
    if cert.skipped:
        cert.reason = f"{cert.skipped} atoms could not be weighed"
        return cert
    cert.status = BOUNDED
    cert.reason = "ratio is periodic beyond the checked band"
    return cert


class CompositionSystem:
    """Space, bijection and Young function, with lazily computed certificates."""

    def __init__(self, space, transform, phi):
        self.space = space
        self.transform = transform
        self.phi = phi
        self._bounded = self._d2 = self._dp = None

    @classmethod
    def from_spec(cls, spec):
        return cls(
            AtomicMeasureSpace.from_spec(spec["space"]),
            AtomTransformation.from_spec(spec.get("transform", {"kind": "shift", "step": 1})),
            YoungFunction.from_spec(spec["young"]),
        )

    def __repr__(self):
        return f"CompositionSystem({self.space!r}, {self.transform!r}, {self.phi!r})"

    @property
    def boundedness(self):
        if self._bounded is None:
            self._bounded = boundedness_check(self.space, self.transform)
        return self._bounded

    @property
    def delta2(self):
        if self._d2 is None:
            self._d2 = check_delta2(self.phi)
        return self._d2

    @property
    def delta_prime(self):
        if self._dp is None:
            self._dp = check_delta_prime(self.phi)
        return self._dp

    def require_bounded(self):
        cert = self.boundedness
        if cert.status == UNBOUNDED:
            raise PreconditionError(f"composition operator is not bounded: {cert.reason}")
        return cert

    def log_measure_orbit(self, atoms, ks):
        """``log mu(phi**k(A))`` for each ``k`` in ``ks``."""
        atoms = np.asarray(list(atoms), dtype=np.int64)
        return np.array([self.space.log_measure(self.transform.power(atoms, int(k))) for k in ks])


def compose_power(system, f, n, strict=True):
    """``C**n f = f o phi**n``: the coefficient at ``a`` moves to ``phi**-n(a)``."""
    n = int(n)
    if n == 0 or f.is_zero():
        return f
    new = system.transform.power(f.atoms, -n)
    if strict:
        for a in new:
            if not system.space.in_window(int(a)):
                raise WindowEscape(int(a))
    return SimpleFunction(dict(zip(new.tolist(), f.values.tolist())))


def _orbit_matrix(system, f, ns):
    atoms = f.atoms
    rows = []
    for n in ns:
        img = system.transform.power(atoms, -int(n))
        rows.append(system.space.weights(img))
    return np.array(rows), np.broadcast_to(np.abs(f.values), (len(ns), atoms.size)).copy()


def orbit_gauge_norms(system, f, n_range, strict=True):
    """``[(n, N(C**n f))]`` with the modular transfer identity as a cross-check."""
    if f.is_zero():
        raise ValueError("orbit norms need a nonzero function")
    ns = [int(n) for n in n_range]
    if strict:
        for n in ns:
            compose_power(system, f, n)
    w, c = _orbit_matrix(system, f, ns)
    params = system.phi.kernel_params
    norms, _ = kernels.gauge_batch(params, w, c)
    # rho(C^n f) summed over the original atoms with transported weights
    transfer = kernels.modular_batch(params, w, c)
    for n, rho in zip(ns[:3], transfer[:3]):
        direct = modular(system.space, system.phi, compose_power(system, f, n, strict=False))
        if not math.isclose(direct, rho, rel_tol=1e-12, abs_tol=1e-300):
            raise RuntimeError(f"modular transfer mismatch at n={n}: {direct} vs {rho}")
    return list(zip(ns, norms.tolist()))


@dataclass
class ProbeReport:
    samples: int
    seed: int
    horizon: int
    threshold: float
    forward_exceeded: int
    two_sided_exceeded: int
    first_exceed: list = field(default_factory=list)
    forward_max: list = field(default_factory=list)
    backward_max: list = field(default_factory=list)
    supports: list = field(default_factory=list)
    note: str = "sampled unit vectors give falsification evidence only"

    @property
    def all_forward_exceed(self):
        return self.forward_exceeded == self.samples

    def to_dict(self):
        return dict(self.__dict__)


def _probe_atoms(system, horizon):
    lo, hi = system.space.window
    tr = system.transform
    if tr.is_shift:
        reach = horizon * abs(tr.step)
        return np.arange(lo + reach, hi - reach + 1, dtype=np.int64)
    cand = []
    for a in range(lo, hi + 1):
        try:
            ends = [int(tr.power([a], n)[0]) for n in (-horizon, horizon)]
        except WindowEscape:
            continue
        if all(system.space.in_window(e) for e in ends):
            cand.append(a)
    return np.array(cand, dtype=np.int64)


def expansivity_probe(system, samples=64, seed=7, horizon=40, threshold=1e3, support_max=8):
    """Sample gauge-normalised simple functions and follow their orbit norms.

    For each sample the report records the largest ``N(C**n f)`` over
    ``1 <= n <= horizon`` and over ``-horizon <= n <= -1``, and the first
    ``n >= 1`` where the threshold is crossed (``None`` when it never is).
    """
    pool = _probe_atoms(system, horizon)
    if pool.size == 0:
        raise ValueError("no atom keeps its orbit inside the window over the horizon")
    rng = np.random.default_rng(seed)
    ns = np.arange(-horizon, horizon + 1)
    rep = ProbeReport(samples, seed, horizon, threshold, 0, 0)
    for _ in range(samples):
        k = int(rng.integers(1, min(support_max, pool.size) + 1))
        atoms = np.sort(rng.choice(pool, size=k, replace=False))
        coef = 10.0 ** rng.uniform(-2.0, 2.0, size=k) * rng.choice([-1.0, 1.0], size=k)
        f = SimpleFunction(dict(zip(atoms.tolist(), coef.tolist())))
        f = f / gauge_norm(system.space, system.phi, f)
        w, c = _orbit_matrix(system, f, ns)
        norms, _ = kernels.gauge_batch(system.phi.kernel_params, w, c)
        fwd = norms[horizon + 1:]
        bwd = norms[:horizon]
        hit = np.nonzero(fwd > threshold)[0]
        rep.first_exceed.append(int(hit[0]) + 1 if hit.size else None)
        rep.forward_max.append(float(fwd.max()))
        rep.backward_max.append(float(bwd.max()))
        rep.supports.append(atoms.tolist())
        rep.forward_exceeded += int(hit.size > 0)
        rep.two_sided_exceeded += int(hit.size > 0 or bool(np.any(bwd > threshold)))
    return rep


def normalized_indicator_orbit(system, atom, horizon):
    """``N(C**n chi_a) / N(chi_a)`` for ``n = 1 .. horizon`` in closed form."""
    ns = np.arange(1, horizon + 1)
    logs = system.log_measure_orbit([atom], -ns)
    base = log_indicator_norm(system.phi, system.space.log_measure([atom]))
    return np.exp(log_indicator_norm(system.phi, logs) - base)
