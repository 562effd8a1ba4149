"""Atomic measure spaces on the integers and finitely supported functions."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .verdict import WindowEscape

SPACE_KINDS = ("geometric", "two_sided_exp", "constant", "block_geometric", "table")

_TAIL_REL_TOL = 1e-9


@dataclass(frozen=True)
class TailModel:
    """Asymptotic law of the atom weights beyond one edge of the window.

    ``quasi_geometric``: moving outward by ``period`` atoms multiplies the
    weight of atom ``i`` by ``exp(log_ratios[i % period])``, for every ``i``
    at or beyond ``start``.  Constant and periodic weights are the special
    case of zero log-ratios.

    ``monotone_decreasing`` / ``monotone_increasing``: weights are monotone
    moving outward; values beyond the window stay unknown.

    ``unknown``: nothing is assumed.
    """

    side: str
    kind: str = "unknown"
    period: int = 1
    log_ratios: tuple = ()
    start: int = 0
    declared: str = "none"
    verified: bool = False
    reason: str = ""

    @property
    def usable(self):
        return self.verified and self.kind != "unknown"

    @property
    def exact(self):
        return self.verified and self.kind == "quasi_geometric"

    def describe(self):
        if not self.usable:
            return f"{self.side}:unknown"
        if self.kind == "quasi_geometric":
            ratios = ",".join(f"{math.exp(v):.6g}" for v in self.log_ratios)
            return f"{self.side}:quasi_geometric(period={self.period},ratios=[{ratios}])"
        return f"{self.side}:{self.kind}"

    def to_dict(self):
        return {
            "side": self.side,
            "kind": self.kind,
            "period": self.period,
            "ratios": [math.exp(v) for v in self.log_ratios],
            "start": self.start,
            "declared": self.declared,
            "verified": self.verified,
            "reason": self.reason,
        }


def _unknown(side, declared="none", reason="no tail declared"):
    return TailModel(side=side, kind="unknown", declared=declared, verified=False, reason=reason)


class AtomicMeasureSpace:
    """Purely atomic measure on the integers with a materialized window.

    ``kind`` selects the weight rule:

    * ``geometric``: ``mu({i}) = r**i``
    * ``two_sided_exp``: ``mu({i}) = base**|i|``
    * ``constant``: ``mu({i}) = c`` (default 1)
    * ``block_geometric``: ``mu({i}) = scales[j] * ratios[j]**(i // m)`` with
      ``j = i % m`` and ``m = len(ratios)``
    * ``table``: explicit weights on a contiguous window, extended beyond it
      only through a verified ``tail`` declaration
    """

    def __init__(self, kind, window=(-256, 256), r=None, base=None, c=1.0, ratios=None, scales=None,
                 weights=None, tail=None):
        if kind not in SPACE_KINDS:
            raise ValueError(f"unknown space kind {kind!r}")
        self.kind = kind
        self._params = {}
        if kind == "table":
            self._init_table(weights, tail)
        else:
            lo, hi = int(window[0]), int(window[1])
            if hi < lo:
                raise ValueError("window upper end below lower end")
            self.lo, self.hi = lo, hi
            self._init_rule(kind, r, base, c, ratios, scales)

    # -- construction -------------------------------------------------------

    def _init_rule(self, kind, r, base, c, ratios, scales):
        if kind == "geometric":
            r = _positive(r, "r")
            self._params = {"r": r}
            lr = math.log(r)
            self.tails = {
                "left": TailModel("left", "quasi_geometric", 1, (-lr,), self.lo, "closed form", True),
                "right": TailModel("right", "quasi_geometric", 1, (lr,), self.hi, "closed form", True),
            }
        elif kind == "constant":
            c = _positive(c, "c")
            self._params = {"c": c}
            self.tails = {
                "left": TailModel("left", "quasi_geometric", 1, (0.0,), self.lo, "closed form", True),
                "right": TailModel("right", "quasi_geometric", 1, (0.0,), self.hi, "closed form", True),
            }
        elif kind == "two_sided_exp":
            base = _positive(base, "base")
            self._params = {"base": base}
            lb = math.log(base)
            self.tails = {
                "left": TailModel("left", "quasi_geometric", 1, (lb,), min(self.lo, 0), "closed form", True),
                "right": TailModel("right", "quasi_geometric", 1, (lb,), max(self.hi, 0), "closed form", True),
            }
        else:
            if not ratios:
                raise ValueError("block_geometric needs ratios")
            ratios = [_positive(v, "ratio") for v in ratios]
            scales = [1.0] * len(ratios) if scales is None else [_positive(v, "scale") for v in scales]
            if len(scales) != len(ratios):
                raise ValueError("block_geometric scales and ratios differ in length")
            self._params = {"ratios": ratios, "scales": scales}
            self._lr = np.log(np.array(ratios))
            self._ls = np.log(np.array(scales))
            m = len(ratios)
            self.tails = {
                "left": TailModel("left", "quasi_geometric", m, tuple(-self._lr), self.lo, "closed form", True),
                "right": TailModel("right", "quasi_geometric", m, tuple(self._lr), self.hi, "closed form", True),
            }

    def _init_table(self, weights, tail):
        if not weights:
            raise ValueError("table space needs weights")
        table = {int(k): float(v) for k, v in dict(weights).items()}
        keys = sorted(table)
        self.lo, self.hi = keys[0], keys[-1]
        if len(keys) != self.hi - self.lo + 1:
            raise ValueError("table weights must cover a contiguous window of atoms")
        values = np.array([table[k] for k in keys])
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("table weights must be positive and finite")
        self._table_log = np.log(values)
        self._params = {"weights": {str(k): table[k] for k in keys}, "tail": tail}
        self.tails = _parse_tails(tail, self)

    @classmethod
    def from_spec(cls, spec):
        spec = dict(spec)
        kind = spec.pop("kind", None)
        if kind == "table":
            return cls("table", weights=spec.get("weights"), tail=spec.get("tail"))
        window = spec.pop("window", (-256, 256))
        return cls(kind, window=window, **spec)

    def to_spec(self):
        spec = {"kind": self.kind}
        if self.kind != "table":
            spec["window"] = [self.lo, self.hi]
        spec.update(self._params)
        return spec

    def __repr__(self):
        return f"AtomicMeasureSpace({self.kind}, window=[{self.lo}, {self.hi}])"

    # -- weights ------------------------------------------------------------

    @property
    def window(self):
        return self.lo, self.hi

    def window_atoms(self):
        return np.arange(self.lo, self.hi + 1)

    def in_window(self, i):
        return self.lo <= i <= self.hi

    def log_weight(self, atoms):
        """Natural log of the atom weights; works far outside the window."""
        idx = np.asarray(atoms, dtype=np.int64)
        kind = self.kind
        if kind == "geometric":
            return idx * math.log(self._params["r"])
        if kind == "constant":
            return np.full(idx.shape, math.log(self._params["c"]))
        if kind == "two_sided_exp":
            return np.abs(idx) * math.log(self._params["base"])
        if kind == "block_geometric":
            m = len(self._lr)
            j = np.mod(idx, m)
            return self._ls[j] + np.floor_divide(idx, m) * self._lr[j]
        return self._table_log_weight(idx)

    def _table_log_weight(self, idx):
        out = np.empty(idx.shape)
        flat = idx.ravel()
        res = out.ravel()
        inside = (flat >= self.lo) & (flat <= self.hi)
        res[inside] = self._table_log[flat[inside] - self.lo]
        for side, mask in (("right", flat > self.hi), ("left", flat < self.lo)):
            if not mask.any():
                continue
            tail = self.tails[side]
            if not tail.exact:
                raise WindowEscape(int(flat[mask][0]), f"atom {int(flat[mask][0])} lies beyond the "
                                                       f"{side} edge of the table and no verified tail extends it")
            P = tail.period
            far = flat[mask]
            if side == "right":
                steps = -np.floor_divide(-(far - self.hi), P)
                base = far - steps * P
            else:
                steps = -np.floor_divide(-(self.lo - far), P)
                base = far + steps * P
            lr = np.array(tail.log_ratios)[np.mod(base, P)]
            res[mask] = self._table_log[base - self.lo] + steps * lr
        return out

    def weight(self, i):
        return float(self.weights(np.array([i]))[0])

    def weights(self, atoms):
        # Direct powers keep exact values such as 2**-k that exp(log) would blur.
        idx = np.asarray(atoms, dtype=np.int64)
        kind = self.kind
        with np.errstate(over="ignore", under="ignore"):
            if kind == "geometric":
                return np.power(self._params["r"], idx.astype(float))
            if kind == "constant":
                return np.full(idx.shape, self._params["c"])
            if kind == "two_sided_exp":
                return np.power(self._params["base"], np.abs(idx).astype(float))
            if kind == "block_geometric":
                m = len(self._lr)
                j = np.mod(idx, m)
                ratios = np.array(self._params["ratios"])
                scales = np.array(self._params["scales"])
                return scales[j] * np.power(ratios[j], np.floor_divide(idx, m).astype(float))
        return np.exp(self.log_weight(idx))

    def measure(self, atoms):
        atoms = np.unique(np.asarray(list(atoms), dtype=np.int64))
        return float(self.weights(atoms).sum()) if atoms.size else 0.0

    def log_measure(self, atoms):
        atoms = np.unique(np.asarray(list(atoms), dtype=np.int64))
        if atoms.size == 0:
            return -math.inf
        lw = self.log_weight(atoms)
        top = lw.max()
        return float(top + math.log(np.exp(lw - top).sum()))


def _positive(value, name):
    if value is None:
        raise ValueError(f"missing {name}")
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite")
    return value


# ---------------------------------------------------------------------------
# table tails


def _parse_tails(tail, space):
    out = {"left": None, "right": None}
    if tail is None or tail == "none":
        pass
    elif isinstance(tail, str):
        for side in ("left", "right"):
            if tail.endswith("_" + side):
                out[side] = tail[: -len(side) - 1]
        if out["left"] is None and out["right"] is None:
            out = {"left": tail, "right": tail}
    elif isinstance(tail, dict) and set(tail) <= {"left", "right"}:
        out.update(tail)
    elif isinstance(tail, dict):
        out = {"left": tail, "right": tail}
    else:
        raise ValueError(f"unrecognised tail declaration {tail!r}")
    return {side: _verify_tail(side, out[side], space) for side in ("left", "right")}


def _outward(space, side, count):
    """Window atoms nearest the edge, ordered outward (last entry on the edge)."""
    if side == "right":
        return np.arange(max(space.lo, space.hi - count + 1), space.hi + 1)
    return np.arange(min(space.hi, space.lo + count - 1), space.lo - 1, -1)


def _verify_tail(side, decl, space):
    if decl is None or decl == "none":
        return _unknown(side)
    label = decl if isinstance(decl, str) else repr(decl)
    logs = space._table_log
    size = space.hi - space.lo + 1

    def lw(i):
        return logs[i - space.lo]

    if decl in ("monotone_decreasing", "monotone_increasing"):
        atoms = _outward(space, side, 5)
        if atoms.size < 5:
            return _unknown(side, label, "window too short to verify monotone tail")
        steps = np.diff([lw(i) for i in atoms])
        ok = np.all(steps <= 0) if decl == "monotone_decreasing" else np.all(steps >= 0)
        if not ok:
            return _unknown(side, label, "declared monotone tail contradicted on the window")
        edge = space.hi if side == "right" else space.lo
        return TailModel(side, decl, 1, (), edge, label, True)

    if decl == "geometric":
        period = 1
        atoms = _outward(space, side, 2)
        if atoms.size < 2:
            return _unknown(side, label, "window too short to infer a ratio")
        log_ratios = None
        inferred = lw(atoms[1]) - lw(atoms[0])
        log_ratios = (inferred,)
    elif isinstance(decl, dict) and "geometric" in decl:
        period = 1
        log_ratios = (math.log(_positive(decl["geometric"], "tail ratio")),)
    elif isinstance(decl, dict) and "periodic" in decl:
        period = int(decl["periodic"])
        log_ratios = (0.0,) * period
    elif isinstance(decl, dict) and "ratios" in decl:
        period = int(decl.get("period", len(decl["ratios"])))
        if period != len(decl["ratios"]):
            raise ValueError("tail period and ratio count differ")
        log_ratios = tuple(math.log(_positive(v, "tail ratio")) for v in decl["ratios"])
    else:
        raise ValueError(f"unrecognised tail declaration {decl!r}")
    if period < 1:
        raise ValueError("tail period must be positive")

    checks = max(3, 2 * period)
    if size < period + checks:
        return _unknown(side, label, f"window of {size} atoms too short to verify period {period}")
    step = period if side == "right" else -period
    inner = _outward(space, side, period + checks)[:checks]
    for i in inner:
        expected = lw(i) + log_ratios[i % period]
        if abs(lw(i + step) - expected) > _TAIL_REL_TOL * max(1.0, abs(expected)):
            return _unknown(side, label, f"declared tail contradicted at atom {int(i + step)}")
    start = space.hi - period + 1 if side == "right" else space.lo + period - 1
    return TailModel(side, "quasi_geometric", period, tuple(float(v) for v in log_ratios), start, label, True)


# ---------------------------------------------------------------------------
# simple functions


@dataclass(frozen=True)
class SimpleFunction:
    """Finitely supported function on the integer atoms (zeros are dropped)."""

    terms: tuple = field(default_factory=tuple)

    def __init__(self, mapping=None):
        items = {}
        for atom, coef in dict(mapping or {}).items():
            coef = float(coef)
            if not math.isfinite(coef):
                raise ValueError("coefficients must be finite")
            if coef != 0.0:
                items[int(atom)] = coef
        object.__setattr__(self, "terms", tuple(sorted(items.items())))

    @classmethod
    def indicator(cls, atoms, value=1.0):
        return cls({int(a): value for a in atoms})

    @classmethod
    def zero(cls):
        return cls()

    @property
    def support(self):
        return frozenset(a for a, _ in self.terms)

    @property
    def atoms(self):
        return np.array([a for a, _ in self.terms], dtype=np.int64)

    @property
    def values(self):
        return np.array([v for _, v in self.terms], dtype=float)

    def is_zero(self):
        return not self.terms

    def __getitem__(self, atom):
        return dict(self.terms).get(int(atom), 0.0)

    def __len__(self):
        return len(self.terms)

    def as_dict(self):
        return dict(self.terms)

    def __add__(self, other):
        out = self.as_dict()
        for a, v in other.terms:
            out[a] = out.get(a, 0.0) + v
        return SimpleFunction(out)

    def __neg__(self):
        return SimpleFunction({a: -v for a, v in self.terms})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return SimpleFunction({a: v * float(scalar) for a, v in self.terms})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def relabel(self, mapping):
        """Move each coefficient from atom ``a`` to ``mapping(a)``."""
        return SimpleFunction({mapping(a): v for a, v in self.terms})

    def __repr__(self):
        return f"SimpleFunction({dict(self.terms)})"
