"""Modular, gauge norm and Orlicz norm evaluators on atomic spaces."""
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .optimize import bracket_minimum, golden_section
from .young import conjugate

DUAL_GRID_MAX_SUPPORT = 6


def _arrays(space, f):
    """Weights and coefficients of ``f`` in sorted atom order."""
    if f.is_zero():
        return np.zeros(0), np.zeros(0)
    return space.weights(f.atoms), np.abs(f.values)


def modular(space, phi, f):
    """``sum_i mu(i) * Phi(|f(i)|)``, summed over sorted atoms."""
    w, c = _arrays(space, f)
    if w.size == 0:
        return 0.0
    return float(kernels.modular_batch(phi.kernel_params, w, c)[0])


def _gauge_arrays(phi, w, c, rtol=1e-13):
    if w.size == 0 or not np.any(c):
        return 0.0, 0
    norms, iters = kernels.gauge_batch(phi.kernel_params, w, c, rtol)
    return float(norms[0]), int(iters[0])


def gauge_norm(space, phi, f, with_iterations=False):
    """Luxemburg norm ``inf{k > 0 : rho(f / k) <= 1}`` by geometric bisection."""
    w, c = _arrays(space, f)
    value, iters = _gauge_arrays(phi, w, c)
    return (value, iters) if with_iterations else value


def gauge_norms(phi, weights, coeffs, rtol=1e-13):
    """Batched gauge norms: one function per row, zero-padded."""
    norms, _ = kernels.gauge_batch(phi.kernel_params, weights, coeffs, rtol)
    return norms


def log_indicator_norm(phi, log_mu):
    """``log N(chi_F)`` from ``log mu(F)``; stable for huge or tiny measures."""
    return -phi.log_inverse_exp(-np.asarray(log_mu, dtype=float))


def indicator_norm(space, phi, atoms):
    """``N(chi_F) = 1 / Phi^{-1}(1 / mu(F))``."""
    atoms = list(atoms)
    if not atoms:
        raise ValueError("indicator norm needs a nonempty atom set")
    mu = space.measure(atoms)
    if 0.0 < mu < math.inf:
        return 1.0 / phi.inverse(1.0 / mu)
    return float(np.exp(log_indicator_norm(phi, space.log_measure(atoms))))


def _amemiya_arrays(phi, w, c, gauge=None):
    if w.size == 0 or not np.any(c):
        return 0.0, 0
    if gauge is None:
        gauge, _ = _gauge_arrays(phi, w, c)
    params = phi.kernel_params

    def objective(u):
        k = math.exp(u)
        rho = float(kernels.modular_batch(params, w, c, k)[0])
        return math.log1p(rho) - u if math.isfinite(rho) else math.inf

    u0 = -math.log(gauge)
    a, b, cc, fb, evals = bracket_minimum(objective, u0, step=0.5)
    x, fx, it = golden_section(objective, a, cc, tol=1e-12)
    best = min([fx, fb] + [v for _, v in evals])
    return math.exp(best), it


def orlicz_norm_amemiya(space, phi, f):
    """Orlicz norm as ``inf_{k > 0} (1 + rho(k f)) / k``.

    Minimised over ``u = log k``; the search starts at ``k = 1 / N(f)`` where
    the objective is at most ``2 N(f)``.
    """
    w, c = _arrays(space, f)
    return _amemiya_arrays(phi, w, c)[0]


def _dual_value(mu, c, psi, shares):
    # Spend budget share t_i on atom i: mu_i * Psi(g_i) = t_i.
    t = np.maximum(shares, 0.0)
    g = psi.inverse(t / mu) * (1.0 - 1e-12)
    return float(np.sum(mu * c * g)), g


def orlicz_norm_dual_grid(space, phi, f, resolution=24, refine_steps=60, psi=None):
    """Lower bound of the dual Orlicz norm ``sup sum mu |f| g`` over ``rho_Psi(g) <= 1``.

    Candidate ``g`` vectors come from a simplex grid of budget splits, then a
    pairwise budget-transfer search refines the best one. Every candidate is
    feasible, so the result never exceeds the true supremum.
    """
    if f.is_zero():
        return 0.0
    if len(f) > DUAL_GRID_MAX_SUPPORT:
        raise ValueError(f"dual grid oracle supports at most {DUAL_GRID_MAX_SUPPORT} atoms")
    psi = conjugate(phi) if psi is None else psi
    mu, c = _arrays(space, f)
    m = len(f)
    # stars and bars: the gaps between bars are the integer shares
    combos = list(itertools.combinations(range(resolution + m - 1), m - 1))
    combos = np.array(combos, dtype=float).reshape(len(combos), m - 1)
    edges = np.full((combos.shape[0], 1), -1.0), np.full((combos.shape[0], 1), resolution + m - 1.0)
    shares = (np.diff(np.hstack([edges[0], combos, edges[1]]), axis=1) - 1.0) / resolution
    g = psi.inverse((shares / mu).ravel()).reshape(shares.shape) * (1.0 - 1e-12)
    vals = (g * (mu * c)).sum(axis=1)
    i = int(np.argmax(vals))
    best, best_t = float(vals[i]), shares[i]
    step = 1.0 / resolution
    for _ in range(refine_steps):
        improved = False
        for i, j in itertools.permutations(range(m), 2):
            move = min(step, best_t[j])
            if move <= 0.0:
                continue
            trial = best_t.copy()
            trial[i] += move
            trial[j] -= move
            val, _ = _dual_value(mu, c, psi, trial)
            if val > best:
                best, best_t, improved = val, trial, True
        if not improved:
            step *= 0.5
            if step < 1e-12:
                break
    return best


@dataclass
class NormReport:
    gauge: float
    amemiya: float
    dual_grid: Optional[float] = None
    iterations: int = 0
    residual: float = 0.0

    def to_dict(self):
        return {
            "gauge": self.gauge,
            "amemiya": self.amemiya,
            "dual_grid": self.dual_grid,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def norm_report(space, phi, f, dual=False):
    """Gauge and Amemiya values of ``f``, plus the dual-grid bound when asked."""
    w, c = _arrays(space, f)
    gauge, iters = _gauge_arrays(phi, w, c)
    amemiya, _ = _amemiya_arrays(phi, w, c, gauge or None)
    residual = 0.0
    if gauge > 0:
        residual = float(kernels.modular_batch(phi.kernel_params, w, c, 1.0 / gauge)[0])
    dg = orlicz_norm_dual_grid(space, phi, f) if dual and len(f) <= DUAL_GRID_MAX_SUPPORT else None
    return NormReport(gauge, amemiya, dg, iters, residual)


@dataclass
class ConvergenceReport:
    norm_deviation: list = field(default_factory=list)
    modular_deviation: list = field(default_factory=list)
    pointwise_deviation: list = field(default_factory=list)
    norm_to_zero: bool = False
    modular_converges: bool = False
    pointwise_converges: bool = False
    consistent: bool = True

    def to_dict(self):
        return dict(self.__dict__)


def _trend_to_zero(values, tol):
    if not values:
        return False
    tail = values[len(values) // 2:]
    return values[-1] <= tol or (max(tail) <= values[0] and values[-1] <= 1e-2 * max(values[0], tol))


def modular_convergence_check(space, phi, sequence, f, tol=1e-6):
    """Compare norm convergence and modular convergence along a finite sequence.

    Checks that ``N(f_n - f) -> 0`` comes with ``rho(f_n) -> rho(f)``, and that
    under pointwise plus modular convergence the norm deviation also shrinks
    (the direction that needs a doubling Young function). ``consistent`` is
    False only when the evidence contradicts one of these implications.
    """
    rho_f = modular(space, phi, f)
    rep = ConvergenceReport()
    for fn in sequence:
        diff = fn - f
        rep.norm_deviation.append(gauge_norm(space, phi, diff))
        rep.modular_deviation.append(abs(modular(space, phi, fn) - rho_f))
        rep.pointwise_deviation.append(max((abs(v) for v in diff.values), default=0.0))
    rep.norm_to_zero = _trend_to_zero(rep.norm_deviation, tol)
    rep.modular_converges = _trend_to_zero(rep.modular_deviation, tol)
    # Pointwise convergence on atoms: every atom's deviation tends to zero.
    seq = list(sequence)
    atoms = set(f.support).union(*(fn.support for fn in seq)) if seq else set()
    rep.pointwise_converges = bool(seq) and all(
        _trend_to_zero([abs(fn[a] - f[a]) for fn in seq], tol) for a in atoms
    )
    forward_ok = (not rep.norm_to_zero) or rep.modular_converges
    converse_ok = not (rep.pointwise_converges and rep.modular_converges) or rep.norm_to_zero
    rep.consistent = bool(forward_ok and converse_ok)
    return rep
