"""Bijective maps of the integer atoms: shifts and explicit tables."""
import numpy as np

from .verdict import WindowEscape

TRANSFORM_KINDS = ("identity", "shift", "table")
OFF_WINDOW_RULES = ("reject", "extend_by_shift")


class AtomTransformation:
    """A bijection ``phi`` of the atoms.

    ``shift`` moves every atom by ``step``; ``identity`` is the zero shift.
    ``table`` gives ``phi`` explicitly on a contiguous window of atoms. Off the
    window the map either raises (``reject``) or shifts by ``step``
    (``extend_by_shift``); the latter needs the table image to be the window
    translated by ``step`` so that the glued map stays bijective.
    """

    def __init__(self, kind="shift", step=1, table=None, off_window="reject"):
        if kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {kind!r}")
        self.kind = kind
        self.step = 0 if kind == "identity" else int(step)
        self.off_window = off_window
        self._fwd = self._inv = None
        if kind == "table":
            self._init_table(table, off_window)

    def _init_table(self, table, off_window):
        if off_window not in OFF_WINDOW_RULES:
            raise ValueError(f"off_window must be one of {OFF_WINDOW_RULES}")
        if not table:
            raise ValueError("table transform needs a map")
        fwd = {int(k): int(v) for k, v in dict(table).items()}
        keys = sorted(fwd)
        self.lo, self.hi = keys[0], keys[-1]
        if len(keys) != self.hi - self.lo + 1:
            raise ValueError("table transform must cover a contiguous window")
        if len(set(fwd.values())) != len(fwd):
            raise ValueError("table transform is not injective")
        if off_window == "extend_by_shift":
            want = set(range(self.lo + self.step, self.hi + self.step + 1))
            if set(fwd.values()) != want:
                raise ValueError("extend_by_shift needs the table image to equal the shifted window")
        self._fwd = fwd
        self._inv = {v: k for k, v in fwd.items()}

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def shift(cls, step=1):
        return cls("shift", step=step)

    @classmethod
    def from_spec(cls, spec):
        spec = dict(spec)
        kind = spec.get("kind", "shift")
        if kind == "table":
            return cls("table", step=spec.get("step", 0), table=spec.get("map"),
                       off_window=spec.get("off_window", "reject"))
        return cls(kind, step=spec.get("step", 1))

    def to_spec(self):
        if self.kind == "table":
            return {"kind": "table", "map": {str(k): v for k, v in sorted(self._fwd.items())},
                    "off_window": self.off_window, "step": self.step}
        if self.kind == "identity":
            return {"kind": "identity"}
        return {"kind": "shift", "step": self.step}

    def __repr__(self):
        return f"AtomTransformation({self.to_spec()})"

    @property
    def is_shift(self):
        return self.kind in ("identity", "shift")

    @property
    def shift_outside(self):
        """Step used far from the table window, or ``None`` when undefined there."""
        if self.is_shift or self.off_window == "extend_by_shift":
            return self.step
        return None

    def region(self):
        """Hull of atoms where the map differs from a plain shift (``None`` for shifts)."""
        if self.is_shift:
            return None
        if self.off_window == "reject":
            return self.lo, self.hi
        return min(self.lo, self.lo + self.step), max(self.hi, self.hi + self.step)

    def forward(self, i):
        i = int(i)
        if self.is_shift:
            return i + self.step
        if i in self._fwd:
            return self._fwd[i]
        if self.off_window == "reject":
            raise WindowEscape(i, f"atom {i} lies outside the transform table")
        return i + self.step

    def inverse(self, i):
        i = int(i)
        if self.is_shift:
            return i - self.step
        if i in self._inv:
            return self._inv[i]
        if self.off_window == "reject":
            raise WindowEscape(i, f"atom {i} lies outside the image of the transform table")
        return i - self.step

    def power(self, atoms, n):
        """``phi**n`` applied to each atom; negative ``n`` iterates the inverse."""
        atoms = np.asarray(atoms, dtype=np.int64)
        n = int(n)
        if self.is_shift:
            return atoms + n * self.step
        move = self.forward if n >= 0 else self.inverse
        out = []
        for a in atoms.ravel():
            x = int(a)
            for _ in range(abs(n)):
                x = move(x)
            out.append(x)
        return np.array(out, dtype=np.int64).reshape(atoms.shape)

    def orbit(self, atom, length, direction=1):
        """Atoms ``phi**(direction * j)(atom)`` for ``j = 0 .. length``."""
        if self.is_shift:
            return atom + direction * self.step * np.arange(length + 1, dtype=np.int64)
        move = self.forward if direction > 0 else self.inverse
        out = [int(atom)]
        for _ in range(length):
            out.append(move(out[-1]))
        return np.array(out, dtype=np.int64)

    def image(self, atoms, n):
        """``phi**n`` of a set of atoms, as a sorted array."""
        return np.sort(self.power(np.asarray(list(atoms), dtype=np.int64), n))
