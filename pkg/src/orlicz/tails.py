"""Exact asymptotics of orbit measures under verified tail models.

Along an orbit ``j -> phi**(d*j)(a)`` of a shift-like map, an atom either
cycles, or eventually walks into one tail of the space with a fixed step.
On a quasi-geometric tail the log-measure then grows linearly on each residue
class of ``j``, so limits and suprema of ``mu(phi**(d*j)(A))`` are decided
by finitely many rates instead of a finite horizon.
"""
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .verdict import FAILS, HOLDS, UNDETERMINED, WindowEscape

_ZERO = 1e-12


@dataclass
class AtomOrbit:
    atom: int
    direction: int
    kind: str  # cycle | progression | unknown
    rates: tuple = ()  # per residue class of j, log-measure growth per step
    entry: int = 0  # first j from which the rates describe the orbit exactly
    cycle_length: int = 0
    tail: str = ""
    bounded_above: object = None  # True / False / None (unknown)
    bounded_below: object = None  # measure stays away from zero
    sup_log_measure: float = math.nan  # max over j >= 1 when bounded above and known
    reason: str = ""

    @property
    def exact(self):
        return self.kind == "cycle" or (self.kind == "progression" and bool(self.rates))

    @property
    def classes(self):
        return len(self.rates) if self.rates else 1

    def rate(self, j):
        if self.kind == "cycle":
            return 0.0
        return self.rates[j % len(self.rates)]

    def to_dict(self):
        return {
            "atom": self.atom,
            "direction": self.direction,
            "kind": self.kind,
            "rates": list(self.rates),
            "entry": self.entry,
            "cycle_length": self.cycle_length,
            "tail": self.tail,
            "bounded_above": self.bounded_above,
            "bounded_below": self.bounded_below,
            "reason": self.reason,
        }


def _ceil_div(a, b):
    return -((-a) // b)


def _walk(transform, atom, direction):
    """Follow the orbit until it cycles or leaves the table region for good.

    Returns ``(kind, positions, j0, step)`` with ``positions`` the visited atoms.
    """
    out_step = transform.shift_outside
    if transform.is_shift:
        if transform.step == 0:
            return "cycle", [atom], 0, 0
        return "progression", [atom], 0, direction * transform.step
    lo, hi = transform.region()
    sigma = None if out_step is None else direction * out_step
    far = abs(atom - lo) + abs(atom - hi)
    cap = (hi - lo + 1) + far + 4
    move = transform.forward if direction > 0 else transform.inverse
    x = atom
    positions = [x]
    for j in range(cap + 1):
        if sigma and ((sigma > 0 and x > hi) or (sigma < 0 and x < lo)):
            return "progression", positions, j, sigma
        if sigma == 0 and not (lo <= x <= hi):
            return "cycle", [x], 0, 0
        try:
            x = move(x)
        except WindowEscape as exc:
            return "unknown", positions, j, f"orbit leaves the transform table at atom {exc.atom}"
        if x == atom:
            return "cycle", positions, 0, 0
        positions.append(x)
    return "unknown", positions, cap, "orbit did not settle within the search cap"


def analyze_orbit(space, transform, atom, direction):
    """Classify the orbit ``j -> phi**(direction*j)(atom)`` for ``j >= 0``."""
    atom = int(atom)
    kind, positions, j0, extra = _walk(transform, atom, direction)
    if kind == "unknown":
        return AtomOrbit(atom, direction, "unknown", reason=extra)
    if kind == "cycle":
        try:
            logs = space.log_weight(np.array(positions))
        except WindowEscape as exc:
            return AtomOrbit(atom, direction, "unknown", reason=f"weight of atom {exc.atom} is unknown")
        return AtomOrbit(atom, direction, "cycle", rates=(0.0,), cycle_length=len(positions),
                         tail="cycle", bounded_above=True, bounded_below=True,
                         sup_log_measure=float(np.max(logs)))
    sigma = extra
    x0 = positions[-1]
    side = "right" if sigma > 0 else "left"
    tail = space.tails[side]
    if tail.exact:
        return _exact_progression(space, transform, atom, direction, x0, j0, sigma, tail)
    if tail.usable:
        return _monotone_progression(space, transform, atom, direction, x0, j0, sigma, tail)
    return AtomOrbit(atom, direction, "unknown", tail=tail.describe(),
                     reason=f"{side} tail is not modelled: {tail.reason or 'unknown'}")


def _exact_progression(space, transform, atom, direction, x0, j0, sigma, tail):
    P = tail.period
    if sigma > 0:
        j1 = j0 + max(0, _ceil_div(tail.start - x0, sigma))
    else:
        j1 = j0 + max(0, _ceil_div(x0 - tail.start, -sigma))
    L = P // math.gcd(P, abs(sigma))
    rates = [0.0] * L
    for j in range(j1, j1 + L):
        pos = x0 + sigma * (j - j0)
        rates[j % L] = abs(sigma) / P * tail.log_ratios[pos % P]
    rates = tuple(0.0 if abs(r) <= _ZERO else r for r in rates)
    above = all(r <= 0 for r in rates)
    below = all(r >= 0 for r in rates)
    orbit = AtomOrbit(atom, direction, "progression", rates=rates, entry=j1, tail=tail.describe(),
                      bounded_above=above, bounded_below=below)
    if above:
        # Past the entry every class is non-increasing, so one full cycle of
        # classes after the entry bounds the whole tail.
        js = np.arange(1, j1 + L + 1)
        orbit.sup_log_measure = float(np.max(_orbit_logs(space, transform, atom, direction, js)))
    return orbit


def _monotone_progression(space, transform, atom, direction, x0, j0, sigma, tail):
    lo, hi = space.window
    edge = hi if sigma > 0 else lo
    inside = max(0, _ceil_div(edge - x0, sigma)) if sigma > 0 else max(0, _ceil_div(x0 - edge, -sigma))
    orbit = AtomOrbit(atom, direction, "progression", entry=j0 + inside, tail=tail.describe())
    if tail.kind == "monotone_decreasing":
        orbit.bounded_above = True
        js = np.arange(1, j0 + inside + 1)
        logs = [float(space.log_weight(np.array([edge]))[0])]
        if js.size:
            logs.append(float(np.max(_orbit_logs(space, transform, atom, direction, js))))
        orbit.sup_log_measure = max(logs)
    else:
        orbit.bounded_below = True
    return orbit


def _orbit_logs(space, transform, atom, direction, js):
    js = np.asarray(js, dtype=np.int64)
    if transform.is_shift:
        pos = atom + direction * transform.step * js
    else:
        path = transform.orbit(atom, int(js.max()), direction)
        pos = path[js]
    return space.log_weight(pos)


def _bounded_in_class(orbit, c):
    if orbit.exact:
        return orbit.rate(c) <= 0
    return orbit.bounded_above is True


def _lcm(values):
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


@dataclass
class GrowthProfile:
    """Asymptotics of ``j -> mu(phi**(direction*j)(A))`` for a finite set ``A``."""

    atoms: tuple
    direction: int
    orbits: list = field(default_factory=list)

    @property
    def exact(self):
        return all(o.exact for o in self.orbits)

    @property
    def period(self):
        return _lcm([o.classes for o in self.orbits if o.exact])

    def class_rates(self):
        """Max rate per residue class of ``j`` over the exactly known atoms."""
        L = self.period
        known = [o for o in self.orbits if o.exact]
        if not known:
            return ()
        return tuple(max(o.rate(c) for o in known) for c in range(L))

    def tail_models(self):
        return sorted({o.tail for o in self.orbits if o.tail})

    def describe(self):
        models = self.tail_models()
        return ";".join(models) if models else "none"

    def sup_infinite(self):
        """Is ``sup_j mu(phi**(d*j)(A)) = inf``?  Returns ``(status, witness)``."""
        for o in self.orbits:
            if o.exact and max(o.rates) > 0:
                return HOLDS, o.atom
        if all(o.bounded_above is True for o in self.orbits):
            return FAILS, None
        return UNDETERMINED, None

    def lim_infinite(self):
        """Does ``mu(phi**(d*j)(A)) -> inf``?  Returns ``(status, witness class)``."""
        known = [o for o in self.orbits if o.exact]
        if known:
            L = self.period
            if all(any(o.rate(c) > 0 for o in known) for c in range(L)):
                return HOLDS, None
            Lall = _lcm([o.classes for o in self.orbits])
            for c in range(Lall):
                if all(_bounded_in_class(o, c) for o in self.orbits):
                    return FAILS, c
        elif all(o.bounded_above is True for o in self.orbits):
            return FAILS, 0
        return UNDETERMINED, None

    def sup_log_measure(self):
        """``log max_{j >= 1} mu(phi**(d*j)(A))`` for a single bounded atom."""
        if len(self.orbits) == 1:
            return self.orbits[0].sup_log_measure
        return math.nan

    def to_dict(self):
        return {
            "atoms": list(self.atoms),
            "direction": self.direction,
            "exact": self.exact,
            "class_rates": list(self.class_rates()),
            "orbits": [o.to_dict() for o in self.orbits],
        }


def growth_profile(space, transform, atoms, direction):
    atoms = tuple(int(a) for a in atoms)
    return GrowthProfile(atoms, direction, [analyze_orbit(space, transform, a, direction) for a in atoms])


def ell_slopes(profile, phi):
    """Per-class slopes in ``j`` of ``log Phi^{-1}(1 / mu(phi**(d*j)(A)))``.

    ``Phi^{-1}(y)`` behaves like ``y**(1/i0)`` near zero and ``y**(1/iinf)``
    near infinity, so a log-measure rate ``R`` becomes ``-R/i0`` (``R > 0``)
    or ``-R/iinf`` (``R < 0``).  Returns ``None`` unless the profile is exact.
    """
    if not profile.exact:
        return None
    i0, iinf = phi.growth_indices
    out = []
    for r in profile.class_rates():
        if r > 0:
            out.append(-r / i0)
        elif r < 0:
            out.append(0.0 if math.isinf(iinf) else -r / iinf)
        else:
            out.append(0.0)
    return tuple(out)
