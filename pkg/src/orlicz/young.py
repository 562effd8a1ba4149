"""Young functions, their inverses and complementary functions, and growth certificates."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .verdict import FAILS, HOLDS, UNDETERMINED, Status

FAMILIES = ("power", "power_over_p", "exp_minus_one", "p_log", "table")

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced evaluation window ``points`` nodes on ``[lo, hi]``."""

    lo: float = 1e-3
    hi: float = 1e5
    points: int = 161

    def __post_init__(self):
        lo, hi, n = float(self.lo), float(self.hi), int(self.points)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi < lo or n < 1:
            raise ValueError(f"degenerate window {self}")
        if n > 1 and hi == lo:
            raise ValueError(f"degenerate window {self}: several points on a single abscissa")

    @classmethod
    def coerce(cls, spec):
        if spec is None:
            return cls()
        if isinstance(spec, GridSpec):
            return spec
        if isinstance(spec, dict):
            return cls(**spec)
        return cls(*spec)

    def grid(self):
        if self.points == 1:
            return np.array([float(self.lo)])
        return np.geomspace(self.lo, self.hi, self.points)

    @property
    def decades(self):
        return math.log10(self.hi / self.lo)


class YoungFunction:
    """A finite, strictly increasing, convex Young function evaluated on ``|x|``.

    Builtin families:

    * ``power``: ``scale * x**p`` with ``p >= 1`` (``scale`` defaults to 1)
    * ``power_over_p``: ``x**p / p``
    * ``exp_minus_one``: ``exp(x) - 1``
    * ``p_log``: ``x**p * log(1 + x)``
    * ``table``: piecewise linear through ``(0, 0)`` and the knots, extended
      linearly with the last slope
    """

    def __init__(self, family, p=None, scale=1.0, xs=None, ys=None, meta=None):
        if family not in FAMILIES:
            raise ValueError(f"unknown Young family {family!r}")
        self.family = family
        self.meta = dict(meta or {})
        if family in ("power", "power_over_p", "p_log"):
            if p is None:
                raise ValueError(f"family {family!r} needs p")
            p = float(p)
            if not p >= 1.0 or not math.isfinite(p):
                raise ValueError(f"p must be a finite real >= 1, got {p}")
            if family == "p_log" and p <= 0:
                raise ValueError("p_log needs p > 0")
        self.p = p
        if family == "power_over_p":
            scale = 1.0 / p
        self.scale = float(scale)
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        self.xs = self.ys = None
        if family == "table":
            self.xs, self.ys = _validate_table(xs, ys)
            tx = np.concatenate(([0.0], self.xs))
            ty = np.concatenate(([0.0], self.ys))
            self._params = (kernels.TABLE, 0.0, 1.0, tx, ty, np.diff(ty) / np.diff(tx))
        elif family == "exp_minus_one":
            self._params = (kernels.EXPM1, 0.0, 1.0, _EMPTY, _EMPTY, _EMPTY)
        elif family == "p_log":
            self._params = (kernels.PLOG, p, 1.0, _EMPTY, _EMPTY, _EMPTY)
        else:
            self._params = (kernels.POWER, p, self.scale, _EMPTY, _EMPTY, _EMPTY)

    # -- construction -------------------------------------------------------

    @classmethod
    def power(cls, p, scale=1.0):
        return cls("power", p=p, scale=scale)

    @classmethod
    def power_over_p(cls, p):
        return cls("power_over_p", p=p)

    @classmethod
    def exp_minus_one(cls):
        return cls("exp_minus_one")

    @classmethod
    def p_log(cls, p):
        return cls("p_log", p=p)

    @classmethod
    def table(cls, xs, ys, meta=None):
        return cls("table", xs=xs, ys=ys, meta=meta)

    @classmethod
    def from_spec(cls, spec):
        spec = dict(spec)
        family = spec.pop("family", None)
        if family == "table":
            return cls.table(spec["xs"], spec["ys"])
        if family in ("power", "power_over_p", "p_log"):
            return cls(family, p=spec["p"], scale=spec.get("scale", 1.0))
        if family == "exp_minus_one":
            return cls(family)
        raise ValueError(f"unknown Young family {family!r}")

    def to_spec(self):
        if self.family == "table":
            return {"family": "table", "xs": self.xs.tolist(), "ys": self.ys.tolist()}
        if self.family == "exp_minus_one":
            return {"family": "exp_minus_one"}
        spec = {"family": self.family, "p": self.p}
        if self.family == "power" and self.scale != 1.0:
            spec["scale"] = self.scale
        return spec

    def __repr__(self):
        return f"YoungFunction({self.to_spec()})"

    @property
    def kernel_params(self):
        return self._params

    @property
    def is_power_type(self):
        """``scale * x**p``: the inverse is exactly homogeneous."""
        return self.family in ("power", "power_over_p")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        out = kernels.phi_eval(self._params, x.ravel()).reshape(x.shape)
        return float(out) if out.ndim == 0 else out

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise ValueError("Young functions are evaluated on finite nonnegative reals")
        return self(x)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0) or np.any(np.isnan(y)):
            raise ValueError("inverse needs nonnegative arguments")
        out = kernels.phi_inverse(self._params, y.ravel()).reshape(y.shape)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        """Right derivative on ``[0, inf)``."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.family in ("power", "power_over_p"):
            return self.scale * self.p * x ** (self.p - 1.0)
        if self.family == "exp_minus_one":
            with np.errstate(over="ignore"):
                return np.exp(x)
        if self.family == "p_log":
            p = self.p
            return p * x ** (p - 1.0) * np.log1p(x) + x ** p / (1.0 + x)
        _, _, _, tx, _, sl = self._params
        j = np.clip(np.searchsorted(tx, x, side="right") - 1, 0, sl.size - 1)
        return sl[j]

    def log_eval(self, x):
        """``log(Phi(x))`` for ``x > 0`` without overflow."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            if self.is_power_type:
                return math.log(self.scale) + self.p * np.log(x)
            if self.family == "exp_minus_one":
                big = x > 1.0
                safe_small = np.where(big, 1.0, x)
                safe_big = np.where(big, x, 1.0)
                return np.where(big, safe_big + np.log1p(-np.exp(-safe_big)), np.log(np.expm1(safe_small)))
            if self.family == "p_log":
                return self.p * np.log(x) + np.log(np.log1p(x))
            return np.log(self(x))

    def log_inverse_exp(self, t):
        """``log(Phi^{-1}(exp(t)))`` for any real ``t`` without overflow."""
        t = np.asarray(t, dtype=float)
        if self.is_power_type:
            return (t - math.log(self.scale)) / self.p
        if self.family == "exp_minus_one":
            hi = np.maximum(t, 30.0)
            mid = np.clip(t, -30.0, 30.0)
            return np.where(t > 30.0, np.log(hi + np.log1p(np.exp(-hi))),
                            np.where(t < -30.0, t, np.log(np.log1p(np.exp(mid)))))
        return self._log_bisect(t).reshape(t.shape)

    def _log_bisect(self, t):
        # Solve log_eval(exp(u)) = t in u.
        t = np.atleast_1d(t).astype(float)
        lo = np.minimum(t, 0.0) - 1.0
        hi = np.maximum(t, 0.0) + 1.0
        for _ in range(200):
            low_bad = self.log_eval(np.exp(lo)) > t
            with np.errstate(over="ignore"):
                high_bad = self.log_eval(np.exp(hi)) < t
            if not (low_bad.any() or high_bad.any()):
                break
            lo = np.where(low_bad, 2.0 * lo - 1.0, lo)
            hi = np.where(high_bad, 2.0 * hi + 1.0, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if not np.any((mid > lo) & (mid < hi)):
                break
            below = self.log_eval(np.exp(mid)) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    @property
    def growth_indices(self):
        """Power indices of ``Phi`` at zero and at infinity.

        ``Phi(x)`` behaves like ``x**i0`` as ``x -> 0`` and like ``x**iinf`` as
        ``x -> inf`` (up to slowly varying factors); ``inf`` marks faster than
        any power.
        """
        if self.is_power_type:
            return self.p, self.p
        if self.family == "exp_minus_one":
            return 1.0, math.inf
        if self.family == "p_log":
            return self.p + 1.0, self.p
        return 1.0, 1.0


def _validate_table(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 1:
        raise ValueError("table needs equal-length, nonempty xs and ys")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("table entries must be finite")
    if xs[0] <= 0 or np.any(np.diff(xs) <= 0):
        raise ValueError("table xs must be positive and strictly increasing")
    if ys[0] <= 0 or np.any(np.diff(ys) <= 0):
        raise ValueError("table ys must be positive and strictly increasing")
    slopes = np.diff(np.concatenate(([0.0], ys))) / np.diff(np.concatenate(([0.0], xs)))
    if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
        raise ValueError("table is not convex (slopes decrease)")
    return xs, ys


# ---------------------------------------------------------------------------
# complementary function


def conjugate(phi, grid=None, x_max=1e8, numeric=False):
    """Complementary function ``Psi(y) = sup_x (x*y - Phi(x))``.

    Power families get the closed form ``b * y**q`` with ``1/p + 1/q = 1``
    (``power_over_p`` maps to ``power_over_p``).  Everything else, or any
    family when ``numeric`` is set, is tabulated on ``grid`` (default
    ``GridSpec(1e-4, 1e4, 801)``).  Grid values whose maximiser lies beyond
    ``x_max`` (or is unbounded) are listed in ``meta["undetermined"]`` and
    left out of the table.
    """
    if not numeric and phi.is_power_type and phi.p > 1.0:
        q = phi.p / (phi.p - 1.0)
        if phi.family == "power_over_p":
            return YoungFunction.power_over_p(q)
        b = (phi.p - 1.0) / phi.p * (phi.scale * phi.p) ** (1.0 - q)
        return YoungFunction.power(q, scale=b)

    spec = GridSpec.coerce(grid) if grid is not None else GridSpec(1e-4, 1e4, 801)
    ys = spec.grid()
    if phi.family == "table":
        values, ok = _conjugate_table(phi, ys)
    else:
        values, ok = _conjugate_smooth(phi, ys, x_max)
    undetermined = ys[~ok].tolist()
    positive = ok & (values > 0)
    zero_below = float(ys[ok & (values <= 0)].max()) if np.any(ok & (values <= 0)) else None
    if not positive.any():
        raise ValueError("complementary function vanishes or is undetermined on the whole grid")
    keep_x, keep_y = _convex_cleanup(ys[positive], values[positive])
    meta = {"source": repr(phi), "undetermined": undetermined, "x_max": x_max,
            "vanishes_up_to": zero_below, "grid": [spec.lo, spec.hi, spec.points]}
    return YoungFunction.table(keep_x, keep_y, meta=meta)


def _conjugate_smooth(phi, ys, x_max):
    ok = phi.derivative(x_max) >= ys
    lo = np.zeros_like(ys)
    hi = np.full_like(ys, float(x_max))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not np.any((mid > lo) & (mid < hi)):
            break
        rising = phi.derivative(mid) < ys
        lo = np.where(rising, mid, lo)
        hi = np.where(rising, hi, mid)
    x_star = 0.5 * (lo + hi)
    values = np.maximum(x_star * ys - phi(x_star), 0.0)
    return values, ok


def _conjugate_table(phi, ys):
    _, _, _, tx, ty, sl = phi.kernel_params
    ok = ys <= sl[-1]
    values = np.max(np.outer(ys, tx) - ty[None, :], axis=1)
    return np.maximum(values, 0.0), ok


def _convex_cleanup(xs, ys):
    # Drop knots that break strict monotonicity or convexity by rounding.
    keep_x, keep_y = [float(xs[0])], [float(ys[0])]
    for x, y in zip(xs[1:], ys[1:]):
        if y <= keep_y[-1]:
            continue
        keep_x.append(float(x))
        keep_y.append(float(y))
    changed = True
    while changed and len(keep_x) > 2:
        changed = False
        px = np.concatenate(([0.0], keep_x))
        py = np.concatenate(([0.0], keep_y))
        sl = np.diff(py) / np.diff(px)
        bad = np.nonzero(np.diff(sl) < -1e-12 * np.maximum(1.0, np.abs(sl[1:])))[0]
        if bad.size:
            del keep_x[bad[0]]
            del keep_y[bad[0]]
            changed = True
    return keep_x, keep_y


# ---------------------------------------------------------------------------
# growth certificates


@dataclass
class Delta2Certificate:
    condition: str
    verdict: Status
    constant: Optional[float] = None
    x0: Optional[float] = None
    window: tuple = ()
    evidence: dict = field(default_factory=dict)
    closed_form: Optional[dict] = None

    @property
    def holds(self):
        return self.verdict is HOLDS

    def to_dict(self):
        return {
            "condition": self.condition,
            "verdict": self.verdict.value,
            "constant": self.constant,
            "x0": self.x0,
            "window": list(self.window),
            "closed_form": self.closed_form,
            "evidence": self.evidence,
        }


def _exp_capped(log_values):
    # JSON-safe: overflowing ratios are reported as inf strings by the CLI.
    with np.errstate(over="ignore"):
        return [float(v) for v in np.exp(np.asarray(log_values, dtype=float))]


_MIN_POINTS = 64
_MIN_DECADES = 6.0
_TAIL_DECADES = 2.0
_FLAT = 1e-9


def _effective_grid(phi, spec, power):
    """Window nodes whose arguments stay inside tabulated data.

    ``power`` is 2 for the doubling test (2x must be covered) and 2 for the
    product test along the diagonal (x*x must be covered).
    """
    xs = spec.grid()
    if phi.family != "table":
        return xs
    top = phi.xs[-1]
    limit = top / 2.0 if power == "double" else math.sqrt(top)
    return xs[xs <= limit]


def _enough(xs):
    if xs.size < _MIN_POINTS:
        return False, f"{xs.size} usable nodes (< {_MIN_POINTS})"
    decades = math.log10(xs[-1] / xs[0])
    if decades < _MIN_DECADES - 1e-9:
        return False, f"usable nodes span {decades:.2f} decades (< {_MIN_DECADES:g})"
    return True, ""


def _closed_form_delta2(phi):
    if phi.is_power_type:
        return {"verdict": "Holds", "K": 2.0 ** phi.p, "x0": 0.0, "global": True}
    if phi.family == "p_log":
        return {"verdict": "Holds", "K": 2.0 ** (phi.p + 1.0), "x0": 0.0, "global": True}
    if phi.family == "exp_minus_one":
        return {"verdict": "Fails", "reason": "Phi(2x)/Phi(x) = exp(x) + 1 is unbounded"}
    return None


def _closed_form_delta_prime(phi):
    if phi.is_power_type:
        return {"verdict": "Holds", "c": 1.0 / phi.scale, "x0": 0.0, "global": True}
    if phi.family == "exp_minus_one":
        return {"verdict": "Fails", "reason": "Phi(x*x)/Phi(x)**2 grows like exp(x*x - 2x)"}
    return None


def check_delta2(phi, window=None):
    """Certify ``Phi(2x) <= K Phi(x)`` for large ``x`` on a finite window.

    Holds when the doubling ratio is non-increasing over the last two
    decades of usable nodes, Fails when it increases strictly there, and is
    Undetermined otherwise or when fewer than 64 nodes spanning 6 decades are
    usable.
    """
    spec = GridSpec.coerce(window)
    xs = _effective_grid(phi, spec, "double")
    closed = _closed_form_delta2(phi)
    ok, why = _enough(xs)
    if not ok:
        return Delta2Certificate("delta2", UNDETERMINED, window=(spec.lo, spec.hi, spec.points),
                                 evidence={"reason": why}, closed_form=closed)
    lr = phi.log_eval(2.0 * xs) - phi.log_eval(xs)
    tail = xs >= xs[-1] / 10 ** _TAIL_DECADES
    steps = np.diff(lr[tail])
    ratios = _exp_capped(lr)
    evidence = {"ratio_first": ratios[0], "ratio_last": ratios[-1], "tail_nodes": int(tail.sum())}
    if np.all(steps <= _FLAT):
        with np.errstate(over="ignore", invalid="ignore"):
            direct = phi(2.0 * xs) / phi(xs)
        K = float(np.max(np.where(np.isfinite(direct), direct, np.exp(lr))))
        x0 = float(xs[0])
        if closed and closed.get("global"):
            x0 = 0.0
            K = max(K, closed["K"])
        return Delta2Certificate("delta2", HOLDS, constant=K, x0=x0, window=(spec.lo, spec.hi, spec.points),
                                 evidence=evidence, closed_form=closed)
    if np.all(steps > 0):
        evidence["ratio_tail"] = _exp_capped(lr[tail][-5:])
        return Delta2Certificate("delta2", FAILS, window=(spec.lo, spec.hi, spec.points),
                                 evidence=evidence, closed_form=closed)
    evidence["reason"] = "doubling ratio neither settles nor diverges monotonically"
    return Delta2Certificate("delta2", UNDETERMINED, window=(spec.lo, spec.hi, spec.points),
                             evidence=evidence, closed_form=closed)


def check_delta_prime(phi, window=None):
    """Certify ``Phi(xy) <= c Phi(x) Phi(y)`` for ``x, y >= x0`` on a finite window.

    Tries ``x0`` at the window start and at every decade mark; the first
    ``x0`` whose product ratios are non-increasing in each argument over the
    last two decades gives Holds with ``c`` the sup of the ratio.  Fails
    when the diagonal ratio ``Phi(x*x) / Phi(x)**2`` increases strictly
    over the last two decades.
    """
    spec = GridSpec.coerce(window)
    xs = _effective_grid(phi, spec, "square")
    closed = _closed_form_delta_prime(phi)
    win = (spec.lo, spec.hi, spec.points)
    ok, why = _enough(xs)
    if not ok:
        return Delta2Certificate("delta_prime", UNDETERMINED, window=win, evidence={"reason": why},
                                 closed_form=closed)
    lx = phi.log_eval(xs)
    table = phi.log_eval(np.outer(xs, xs)) - lx[:, None] - lx[None, :]
    tail = xs >= xs[-1] / 10 ** _TAIL_DECADES
    tail_start = int(np.argmax(tail))
    candidates = [0] + [i for i in range(1, tail_start)
                        if math.floor(math.log10(xs[i]) + 1e-12) > math.floor(math.log10(xs[i - 1]) + 1e-12)]
    for i0 in candidates:
        sub = table[i0:, tail_start:]
        if np.all(np.diff(sub, axis=1) <= _FLAT):
            c = float(np.exp(table[i0:, i0:].max()))
            x0 = float(xs[i0])
            if i0 == 0 and closed and closed.get("global"):
                x0, c = 0.0, closed["c"]
            return Delta2Certificate("delta_prime", HOLDS, constant=c, x0=x0, window=win,
                                     evidence={"x0_candidates": len(candidates), "x0_index": i0},
                                     closed_form=closed)
    diag = np.diag(table)[tail]
    if np.all(np.diff(diag) > 0):
        return Delta2Certificate("delta_prime", FAILS, window=win,
                                 evidence={"diagonal_tail": _exp_capped(diag[-5:])},
                                 closed_form=closed)
    return Delta2Certificate("delta_prime", UNDETERMINED, window=win,
                             evidence={"reason": "no threshold x0 with settled product ratios"},
                             closed_form=closed)
