"""Shared derivative-free optimisation plumbing.

Likelihood surfaces here are low-dimensional but heterogeneous, so every fit
runs the same recipe: map constrained parameters to an unconstrained space
(log for positives, scaled tanh for box bounds), seed a quasi-random
multi-start from a Sobol sequence, and polish the best starts with a
restarted Nelder-Mead simplex.  Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

__all__ = ["ParamSpec", "MultistartResult", "multistart_minimize"]


@dataclass(frozen=True)
class ParamSpec:
    """One model parameter and its unconstrained reparameterisation.

    kind:
        "free"  identity map
        "log"   natural = exp(raw), strictly positive
        "box"   natural = lo + (hi - lo) * (tanh(raw) + 1) / 2, open interval
    start_lo / start_hi bound the Sobol start window in raw space.
    """

    name: str
    kind: str = "free"
    lo: float = -1.0
    hi: float = 1.0
    start_lo: float = -2.0
    start_hi: float = 2.0

    def to_natural(self, raw: float) -> float:
        if self.kind == "free":
            return raw
        if self.kind == "log":
            return float(np.exp(np.clip(raw, -300.0, 300.0)))
        if self.kind == "box":
            t = np.tanh(raw)
            return self.lo + (self.hi - self.lo) * 0.5 * (t + 1.0)
        raise ValueError(f"unknown kind {self.kind!r}")

    def to_raw(self, natural: float) -> float:
        if self.kind == "free":
            return natural
        if self.kind == "log":
            return float(np.log(max(natural, 1e-300)))
        if self.kind == "box":
            t = 2.0 * (natural - self.lo) / (self.hi - self.lo) - 1.0
            t = min(max(t, -1.0 + 1e-12), 1.0 - 1e-12)
            return float(np.arctanh(t))
        raise ValueError(f"unknown kind {self.kind!r}")


@dataclass
class MultistartResult:
    x_natural: np.ndarray
    x_raw: np.ndarray
    fun: float
    success: bool
    nfev: int
    # every polished optimum as (fun, start_index, natural params); callers
    # may re-reduce with a domain-aware tie rule
    candidates: list = None


def _natural(specs: Sequence[ParamSpec], raw: np.ndarray) -> np.ndarray:
    return np.array([s.to_natural(r) for s, r in zip(specs, raw)])


def multistart_minimize(
    objective: Callable[[np.ndarray], float],
    specs: Sequence[ParamSpec],
    *,
    seed: int = 0,
    n_starts: int = 8,
    extra_starts: Sequence[np.ndarray] = (),
    polish: int = 2,
    maxfev: int | None = None,
) -> MultistartResult:
    """Minimise ``objective(natural_params)`` over the product space of specs.

    ``extra_starts`` are informed starting points in natural space evaluated
    alongside the Sobol draws.  The ``polish`` best starts get a Nelder-Mead
    run plus one restart; ties in the final reduction break on start index.
    """
    d = len(specs)

    def raw_objective(raw: np.ndarray) -> float:
        val = objective(_natural(specs, raw))
        return val if np.isfinite(val) else 1e12

    lo = np.array([s.start_lo for s in specs])
    hi = np.array([s.start_hi for s in specs])
    sob = qmc.Sobol(d=d, scramble=True, seed=seed)
    draws = sob.random_base2(max(int(np.ceil(np.log2(max(n_starts, 1)))), 0))[:n_starts]
    starts = [lo + (hi - lo) * row for row in draws]
    starts.extend(np.array([s.to_raw(v) for s, v in zip(specs, x)]) for x in extra_starts)

    scored = sorted(
        ((raw_objective(x), i, x) for i, x in enumerate(starts)),
        key=lambda t: (t[0], t[1]),
    )

    if maxfev is None:
        maxfev = 400 * max(d, 2)
    best_fun, best_x, best_ok, nfev = np.inf, scored[0][2], False, len(starts)
    # the evaluated starts themselves stay in the pool: on flat ridges the
    # simplex drifts, and an anchor point can be an equally good optimum
    candidates = [(f0, idx, _natural(specs, x0)) for f0, idx, x0 in scored if np.isfinite(f0)]
    for f0, idx, x0 in scored[: max(polish, 1)]:
        res = minimize(
            raw_objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-12, "maxfev": maxfev, "adaptive": d > 3},
        )
        # restart once from the simplex optimum; cheap insurance against collapse
        res2 = minimize(
            raw_objective,
            res.x,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": maxfev},
        )
        nfev += res.nfev + res2.nfev
        cand = res2 if res2.fun <= res.fun else res
        candidates.append((float(cand.fun), idx, _natural(specs, cand.x)))
        if cand.fun < best_fun:
            best_fun, best_x, best_ok = cand.fun, cand.x, bool(res.success or res2.success)

    return MultistartResult(
        x_natural=_natural(specs, best_x),
        x_raw=np.asarray(best_x, dtype=float),
        fun=float(best_fun),
        success=bool(best_ok and np.isfinite(best_fun) and best_fun < 1e11),
        nfev=nfev,
        candidates=candidates,
    )
