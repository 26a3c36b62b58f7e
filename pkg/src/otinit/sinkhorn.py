"""Log-domain Sinkhorn solver with relaxation and acceleration strategies.

The solver iterates the relaxed dual updates

    f <- f + omega * (eps * log a + softmin_eps(C - f (+) g))
    g <- g + omega * (eps * log b + softmin_eps(C^T - g (+) f))

and stops when the L1 marginal error of the coupling
``p_ij = exp((f_i + g_j - C_ij) / eps)`` falls below ``tau``. One iteration
is always a full sweep (both potentials updated once).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .measures import CostMatrix, DiscreteMeasure

__all__ = [
    "DualPotentials",
    "TransportPlan",
    "SolveReport",
    "SinkhornConfig",
    "Momentum",
    "AdaptiveMomentum",
    "Anderson",
    "EpsilonDecay",
    "parse_acceleration",
    "softmin_rows",
    "sinkhorn_solve",
    "coupling_from_duals",
    "dual_objective",
    "primal_objective",
    "marginal_error",
    "center_potential",
    "warm_start",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualPotentials:
    f: np.ndarray
    g: np.ndarray
    epsilon: float

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64).reshape(-1)
        g = np.asarray(self.g, dtype=np.float64).reshape(-1)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise ValueError("potentials must be finite")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True)
class TransportPlan:
    values: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)


@dataclass
class SolveReport:
    """Outcome of one solve. ``iterations`` counts full (f and g) sweeps."""

    iterations: int
    converged: bool
    final_error: float
    error_trace: list = field(default_factory=list)
    dual_objective_trace: Optional[list] = None
    wall_time: float = 0.0
    failure: Optional[str] = None


# --- acceleration strategies -------------------------------------------------


@dataclass(frozen=True)
class Momentum:
    """Fixed over-relaxation; replaces ``omega`` in every update."""

    omega: float = 1.05

    def __post_init__(self):
        if not 0 < self.omega < 2:
            raise ValueError("momentum omega must lie in (0, 2)")


@dataclass(frozen=True)
class AdaptiveMomentum:
    """Over-relaxation re-estimated every ``adapt_iters`` sweeps."""

    adapt_iters: int = 10

    def __post_init__(self):
        if self.adapt_iters < 1:
            raise ValueError("adapt_iters must be >= 1")


@dataclass(frozen=True)
class Anderson:
    """Anderson mixing over the last ``memory`` stacked ``(f, g)`` iterates."""

    memory: int = 5
    reg: float = 1e-10

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("anderson memory must be >= 1")


@dataclass(frozen=True)
class EpsilonDecay:
    """Start at ``start_factor * eps`` and shrink by ``decay`` at every check."""

    start_factor: float = 5.0
    decay: float = 0.8

    def __post_init__(self):
        if self.start_factor < 1 or not 0 < self.decay < 1:
            raise ValueError("need start_factor >= 1 and 0 < decay < 1")


Acceleration = Union[None, Momentum, AdaptiveMomentum, Anderson, EpsilonDecay]

_ACCEL_TAGS = {
    "none": lambda: None,
    "momentum": Momentum,
    "adaptive": AdaptiveMomentum,
    "anderson": Anderson,
    "eps_decay": EpsilonDecay,
}


def parse_acceleration(tag: str) -> Acceleration:
    """Parse tags such as ``none``, ``momentum``, ``momentum:1.1``,
    ``anderson:5``, ``adaptive:10`` or ``eps_decay:5,0.8``."""
    name, _, arg = tag.strip().partition(":")
    if name not in _ACCEL_TAGS:
        raise ValueError(f"unknown acceleration {tag!r}")
    if not arg:
        return _ACCEL_TAGS[name]()
    if name == "none":
        raise ValueError("'none' takes no argument")
    if name == "momentum":
        return Momentum(float(arg))
    if name == "adaptive":
        return AdaptiveMomentum(int(arg))
    if name == "anderson":
        return Anderson(int(arg))
    start, _, decay = arg.partition(",")
    return EpsilonDecay(float(start), float(decay) if decay else 0.8)


@dataclass(frozen=True)
class SinkhornConfig:
    epsilon: float
    tau: float = 0.01
    max_iters: int = 10000
    omega: float = 1.0
    acceleration: Acceleration = None
    check_every: int = 10
    record_objective: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.omega < 2:
            raise ValueError("omega must lie in (0, 2)")
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("max_iters and check_every must be >= 1")


# --- primitives ---------------------------------------------------------------


def _row_lse(M: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp of ``M``; ``M`` is overwritten."""
    mx = M.max(axis=1)
    M -= mx[:, None]
    np.exp(M, out=M)
    return mx + np.log(M.sum(axis=1))


def softmin_rows(S, epsilon: float) -> np.ndarray:
    """Row-wise soft-min ``-eps * log sum_j exp(-S_ij / eps)``."""
    S = np.asarray(S, dtype=np.float64)
    return -epsilon * _row_lse(-S / epsilon)


def center_potential(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    return f - f.mean()


def _log_plan(f, g, C, eps):
    return (f[:, None] + g[None, :] - C) / eps


def coupling_from_duals(dp: DualPotentials, C: CostMatrix) -> TransportPlan:
    """Primal coupling ``exp((f_i + g_j - C_ij) / eps)``."""
    C = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    if C.shape != (dp.f.size, dp.g.size):
        raise ValueError(f"cost shape {C.shape} does not match potentials")
    with np.errstate(over="ignore"):
        return TransportPlan(np.exp(_log_plan(dp.f, dp.g, C, dp.epsilon)))


def _weights(m):
    return m.weights if isinstance(m, DiscreteMeasure) else np.asarray(m, dtype=np.float64)


def marginal_error(plan, mu, nu) -> float:
    """L1 deviation of the plan's row and column sums from ``(a, b)``."""
    P = plan.values if isinstance(plan, TransportPlan) else np.asarray(plan)
    a, b = _weights(mu), _weights(nu)
    return float(np.abs(P.sum(axis=1) - a).sum() + np.abs(P.sum(axis=0) - b).sum())


def dual_objective(dp: DualPotentials, mu, nu, C) -> float:
    """Entropic dual ``<f, a> + <g, b> - eps * sum_ij exp((f_i+g_j-C_ij)/eps)``."""
    C = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    a, b = _weights(mu), _weights(nu)
    eps = dp.epsilon
    L = _log_plan(dp.f, dp.g, C, eps)
    mx = L.max()
    with np.errstate(over="ignore"):
        mass = np.exp(mx) * np.exp(L - mx).sum() if mx > -np.inf else 0.0
    return float(dp.f @ a + dp.g @ b - eps * mass)


def primal_objective(plan, C, epsilon: float) -> float:
    """``<P, C> + eps * <P, log P - 1>`` with ``0 log 0 = 0``.

    This convex form is the one whose minimum equals the dual maximum.
    """
    P = plan.values if isinstance(plan, TransportPlan) else np.asarray(plan)
    C = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    pos = P > 0
    ent = np.sum(P[pos] * (np.log(P[pos]) - 1.0))
    return float(np.sum(P * C) + epsilon * ent)


def warm_start(f0=None, g0=None, *, n: int, m: int, epsilon: float):
    """Pack an initializer's output into ``DualPotentials``; missing side is 0."""
    f = np.zeros(n) if f0 is None else np.asarray(f0, dtype=np.float64)
    g = np.zeros(m) if g0 is None else np.asarray(g0, dtype=np.float64)
    return DualPotentials(f, g, epsilon)


# --- solver -------------------------------------------------------------------


class _Problem:
    """Cached per-epsilon quantities of one OT instance."""

    def __init__(self, a, b, C):
        self.a, self.b, self.C = a, b, C
        self.log_a, self.log_b = np.log(a), np.log(b)
        self.eps = None

    def set_eps(self, eps):
        if eps != self.eps:
            self.eps = eps
            self.Ce = self.C / eps
            self.CeT = np.ascontiguousarray(self.Ce.T)
            self.eps_log_a = eps * self.log_a
            self.eps_log_b = eps * self.log_b

    def f_target(self, g):
        return self.eps_log_a - self.eps * _row_lse(g[None, :] / self.eps - self.Ce)

    def g_target(self, f):
        return self.eps_log_b - self.eps * _row_lse(f[None, :] / self.eps - self.CeT)

    def error(self, f, g):
        with np.errstate(over="ignore", invalid="ignore"):
            P = np.exp(f[:, None] / self.eps + g[None, :] / self.eps - self.Ce)
            err = np.abs(P.sum(axis=1) - self.a).sum() + np.abs(P.sum(axis=0) - self.b).sum()
        return float(err) if np.isfinite(err) else math.inf

    def objective(self, f, g):
        return dual_objective(DualPotentials(f, g, self.eps), self.a, self.b, self.C)


def _anderson_step(xs, gs, reg):
    """Type-II Anderson mixing from iterates ``xs`` and images ``gs``."""
    R = np.array(gs) - np.array(xs)  # residuals, (k, N)
    if R.shape[0] < 2:
        return None
    dR = np.diff(R, axis=0)
    dG = np.diff(np.array(gs), axis=0)
    A = dR @ dR.T
    lam = reg * max(1.0, np.trace(A))
    try:
        gamma = np.linalg.solve(A + lam * np.eye(A.shape[0]), dR @ R[-1])
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(gamma)):
        return None
    return gs[-1] - gamma @ dG


def sinkhorn_solve(
    mu,
    nu,
    C,
    config: SinkhornConfig,
    init: Optional[DualPotentials] = None,
    g_first: Optional[bool] = None,
) -> tuple[DualPotentials, SolveReport]:
    """Solve the entropic OT problem between ``mu`` and ``nu``.

    Parameters
    ----------
    mu, nu : DiscreteMeasure or weight vectors
    C : CostMatrix or array of shape ``(n, m)``
    config : SinkhornConfig
    init : DualPotentials, optional
        Starting potentials; zeros when omitted.
    g_first : bool, optional
        Which potential each sweep updates first. By default a sweep starts
        with ``g`` unless only ``g`` was initialized, so that a single
        initialized vector is the one consumed by the first update.

    Returns
    -------
    (DualPotentials, SolveReport)
        Potentials are at ``config.epsilon`` and always finite. A run that
        hits ``max_iters`` is reported with ``converged=False``.
    """
    t0 = time.perf_counter()
    a, b = _weights(mu), _weights(nu)
    Cv = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    n, m = a.size, b.size
    if Cv.shape != (n, m):
        raise ValueError(f"cost shape {Cv.shape} does not match marginals ({n}, {m})")
    eps_target = config.epsilon
    if init is None:
        f, g = np.zeros(n), np.zeros(m)
    else:
        if init.f.size != n or init.g.size != m:
            raise ValueError("initial potentials have the wrong size")
        f, g = init.f.copy(), init.g.copy()
    if g_first is None:
        g_first = not (np.any(g != 0) and not np.any(f != 0))

    accel = config.acceleration
    omega = config.omega
    if isinstance(accel, Momentum):
        omega = accel.omega
    eps = eps_target
    if isinstance(accel, EpsilonDecay):
        eps = accel.start_factor * eps_target

    prob = _Problem(a, b, Cv)
    prob.set_eps(eps)

    def sweep(f, g, w):
        if g_first:
            g = g + w * (prob.g_target(f) - g) if w != 1.0 else prob.g_target(f)
            f = f + w * (prob.f_target(g) - f) if w != 1.0 else prob.f_target(g)
        else:
            f = f + w * (prob.f_target(g) - f) if w != 1.0 else prob.f_target(g)
            g = g + w * (prob.g_target(f) - g) if w != 1.0 else prob.g_target(f)
        return f, g

    error_trace = []
    obj_trace = [] if config.record_objective else None
    hist_x, hist_g = [], []
    it = 0
    failure = None
    converged = False

    err = prob.error(f, g)
    error_trace.append((0, err))
    if obj_trace is not None:
        obj_trace.append(prob.objective(f, g))
    if eps == eps_target and err < config.tau:
        converged = True

    while not converged and it < config.max_iters:
        f_new, g_new = sweep(f, g, omega)
        if isinstance(accel, Anderson):
            x = np.concatenate([f, g])
            gx = np.concatenate([f_new, g_new])
            hist_x.append(x)
            hist_g.append(gx)
            if len(hist_x) > accel.memory + 1:
                hist_x.pop(0)
                hist_g.pop(0)
            mixed = _anderson_step(hist_x, hist_g, accel.reg)
            if mixed is not None and np.all(np.isfinite(mixed)):
                f_new, g_new = mixed[:n], mixed[n:]
            elif mixed is not None:
                hist_x.clear()
                hist_g.clear()
        if not (np.all(np.isfinite(f_new)) and np.all(np.isfinite(g_new))):
            failure = f"non-finite potentials at iteration {it + 1}"
            logger.warning(failure)
            break
        f, g = f_new, g_new
        it += 1
        if obj_trace is not None:
            obj_trace.append(prob.objective(f, g))
        if it % config.check_every == 0 or it == config.max_iters:
            err = prob.error(f, g)
            error_trace.append((it, err))
            if eps == eps_target and err < config.tau:
                converged = True
                break
            if isinstance(accel, EpsilonDecay) and eps > eps_target:
                eps = max(eps_target, eps * accel.decay)
                prob.set_eps(eps)
            elif isinstance(accel, AdaptiveMomentum) and it % accel.adapt_iters == 0:
                omega = _adapt_omega(error_trace, omega)

    if eps != eps_target:
        # stopped before the decay schedule reached the target
        prob.set_eps(eps_target)
        final_error = prob.error(f, g)
    elif error_trace[-1][0] != it:
        final_error = prob.error(f, g)
        error_trace.append((it, final_error))
    else:
        final_error = error_trace[-1][1]
    report = SolveReport(
        iterations=it,
        converged=converged,
        final_error=final_error,
        error_trace=error_trace,
        dual_objective_trace=obj_trace,
        wall_time=time.perf_counter() - t0,
        failure=failure,
    )
    return DualPotentials(f, g, eps_target), report


def _adapt_omega(error_trace, omega):
    """Over-relaxation from the observed per-sweep contraction of the error."""
    if len(error_trace) < 2:
        return omega
    (i0, e0), (i1, e1) = error_trace[-2], error_trace[-1]
    if not (e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1)) or i1 <= i0:
        return omega
    rho = min(1.0, (e1 / e0) ** (1.0 / (i1 - i0)))
    new = 2.0 / (1.0 + math.sqrt(max(0.0, 1.0 - rho)))
    return min(1.95, max(1.0, new))
