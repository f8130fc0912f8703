"""Constrained maximization of P at fixed K by normalized gradient iteration.

One step maps W to mu(W) grad P(W) with mu(W) = |W| / |grad P(W)|, which
keeps K = |W|^2 / 2 constant and never decreases P; fixed points solve
the eigenvalue problem sigma^2 W = grad P(W) with sigma^2 = 1 / mu. The
iteration is run until the relative step |T(W) - W| / |W| falls below
tolerance. Constant profiles are always fixed points, so localized
solutions must be reached from localized starts; sweeps expose both the
warm-started branch continuation and cold restarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .energy import eval_P_and_grad, kinetic_K, quadratic_Q
from .errors import DegenerateProfileError, GridMismatchError
from .grids import ConeReport, Grid, Profile, cone_check, l2_norm
from .materials import Coupling, reflect_coupling

__all__ = [
    "SolveOptions",
    "WaveSolution",
    "IterationHistory",
    "SweepRow",
    "ThresholdReport",
    "initial_profile",
    "improvement_step",
    "solve",
    "sweep_K",
    "threshold_detect",
    "localization_ratio",
    "support_width",
]

_INITIAL_KINDS = ("gaussian", "indicator", "supplied")
_SIGNS = ("positive", "negative")

# consecutive sub-threshold P gains required before declaring stagnation
_STALL_STREAK = 50


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 5000
    tol_r: float = 1e-10
    tol_stagnation: float = 1e-14
    initial: str = "gaussian"
    initial_width: Optional[float] = None
    initial_profile: Optional[Profile] = None
    sign: str = "positive"
    record_history: bool = False
    cone_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (self.tol_r > 0 and self.tol_stagnation > 0 and self.cone_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.initial not in _INITIAL_KINDS:
            raise ValueError(f"initial must be one of {_INITIAL_KINDS}, got {self.initial!r}")
        if self.sign not in _SIGNS:
            raise ValueError(f"sign must be one of {_SIGNS}, got {self.sign!r}")


@dataclass(frozen=True)
class IterationHistory:
    """Per-iteration record: P and K at every iterate, mu and the step size
    of every update, and the relative residual at every convergence check."""

    P: np.ndarray
    K: np.ndarray
    mu: np.ndarray
    step_norm: np.ndarray
    residual: np.ndarray


@dataclass(frozen=True)
class WaveSolution:
    """Result of one constrained solve.

    profile carries the requested sign; all certificates (cone report,
    min_gain) refer to the internally iterated nonnegative orientation.
    min_gain is the smallest single-step increase of P observed, 0.0 when
    the start was already a fixed point.
    """

    profile: Profile
    K: float
    sigma2: float
    P: float
    Q: float
    iterations: int
    residual: float
    min_gain: float
    cone: ConeReport
    converged: bool
    status: str
    sign: str
    history: Optional[IterationHistory] = None

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def _rescale_to_K(values: np.ndarray, grid: Grid, K: float) -> np.ndarray:
    norm = math.sqrt(grid.spacing * float(np.dot(values, values)))
    if norm == 0.0:
        raise DegenerateProfileError("cannot rescale the zero profile to positive K")
    return values * (math.sqrt(2.0 * K) / norm)


def initial_profile(kind: str, K: float, grid: Grid, width: Optional[float] = None) -> Profile:
    """Cone member with kinetic value exactly K.

    gaussian: exp(-(x/w)^2), default w = L/10.
    indicator: characteristic function of [-w, w], default w = L/20.
    """
    if K <= 0:
        raise ValueError(f"K must be positive, got {K}")
    x = grid.nodes
    if kind == "gaussian":
        w = grid.L / 10.0 if width is None else float(width)
        if w <= 0:
            raise ValueError("width must be positive")
        v = np.exp(-np.square(x / w))
    elif kind == "indicator":
        w = grid.L / 20.0 if width is None else float(width)
        if w <= 0:
            raise ValueError("width must be positive")
        v = (np.abs(x) <= w + 1e-12 * grid.L).astype(float)
        if not v.any():
            v[grid.N // 2] = 1.0
    else:
        raise ValueError(f"unknown initial profile kind {kind!r}")
    return Profile(grid, _rescale_to_K(v, grid, K))


def improvement_step(W: Profile, c: Coupling):
    """One update T(W) = mu(W) grad P(W), renormalized so |T(W)| = |W| exactly.

    Returns (T(W), mu)."""
    _, g = eval_P_and_grad(W, c)
    gnorm = l2_norm(g)
    if gnorm < 1e-300:
        raise DegenerateProfileError("gradient of P vanishes; started at zero energy")
    target = l2_norm(W)
    mu = target / gnorm
    return Profile(W.grid, g.values * (target / gnorm)), mu


def _start_profile(K: float, grid: Grid, opts: SolveOptions) -> Profile:
    if opts.initial == "supplied":
        if opts.initial_profile is None:
            raise ValueError("initial='supplied' needs initial_profile")
        W0 = opts.initial_profile
        if W0.grid != grid:
            raise GridMismatchError(
                f"supplied start lives on (L={W0.grid.L}, N={W0.grid.N}), "
                f"solve grid is (L={grid.L}, N={grid.N})"
            )
        values = W0.values if opts.sign == "positive" else -W0.values
        return Profile(grid, _rescale_to_K(values, grid, K))
    return initial_profile(opts.initial, K, grid, width=opts.initial_width)


def solve(K: float, c: Coupling, grid: Grid, opts: Optional[SolveOptions] = None) -> WaveSolution:
    """Iterate the improvement map at constraint K until the residual
    |T(W) - W| / |W| drops below opts.tol_r.

    Never raises on slow progress: stagnation of P without a small
    residual ends with status 'stalled', exhaustion with
    'max_iterations', both carrying the last residual. A sign='negative'
    solve reflects every potential, iterates on the negated profile in
    the nonnegative cone, and negates the result.
    """
    if K <= 0:
        raise ValueError(f"K must be positive, got {K}")
    opts = SolveOptions() if opts is None else opts
    work = reflect_coupling(c) if opts.sign == "negative" else c

    W = _start_profile(K, grid, opts)
    target = math.sqrt(2.0 * K)
    h = grid.spacing

    P, g = eval_P_and_grad(W, work)
    hist_P = [P]
    hist_K = [kinetic_K(W)]
    hist_mu: list = []
    hist_step: list = []
    hist_res: list = []

    iterations = 0
    min_gain = math.inf
    flat_run = 0
    best_res = math.inf
    converged = False
    status = "max_iterations"
    residual = math.nan
    gnorm = math.nan

    while True:
        gnorm = l2_norm(g)
        if gnorm < 1e-300:
            raise DegenerateProfileError("gradient of P vanishes; started at zero energy")
        T_vals = g.values * (target / gnorm)
        diff = T_vals - W.values
        residual = math.sqrt(h * float(np.dot(diff, diff))) / target
        hist_res.append(residual)

        if residual <= opts.tol_r:
            # W itself is certified: returning without the update keeps
            # the reported residual attached to the reported profile
            converged = True
            status = "converged"
            break
        if flat_run >= _STALL_STREAK:
            status = "stalled"
            break
        if iterations >= opts.max_iterations:
            status = "max_iterations"
            break

        hist_mu.append(target / gnorm)
        hist_step.append(residual * target)
        W = Profile(grid, T_vals)
        P_old = P
        P, g = eval_P_and_grad(W, work)
        gain = P - P_old
        min_gain = min(min_gain, gain)
        # near the limit P flattens at the rounding floor while the
        # residual can still be contracting geometrically; stagnation
        # means a sustained stretch with progress in neither quantity
        if residual < 0.995 * best_res:
            best_res = residual
            flat_run = 0
        elif gain <= opts.tol_stagnation * max(abs(P), 1e-300):
            flat_run += 1
        else:
            flat_run = 0
        iterations += 1
        hist_P.append(P)
        hist_K.append(kinetic_K(W))

    sigma2 = gnorm / target
    cone = cone_check(W, opts.cone_tol)
    Q = quadratic_Q(W, work)
    out = W if opts.sign == "positive" else Profile(grid, -W.values)
    history = None
    if opts.record_history:
        history = IterationHistory(
            P=np.asarray(hist_P),
            K=np.asarray(hist_K),
            mu=np.asarray(hist_mu),
            step_norm=np.asarray(hist_step),
            residual=np.asarray(hist_res),
        )
    return WaveSolution(
        profile=out,
        K=K,
        sigma2=sigma2,
        P=P,
        Q=Q,
        iterations=iterations,
        residual=residual,
        min_gain=0.0 if iterations == 0 else min_gain,
        cone=cone,
        converged=converged,
        status=status,
        sign=opts.sign,
        history=history,
    )


def localization_ratio(W: Profile) -> float:
    """max |W| over mean |W|; 1 for constants, large for pulses."""
    a = np.abs(W.values)
    m = float(a.mean())
    if m == 0.0:
        return math.inf
    return float(a.max()) / m


def support_width(W: Profile, level: float = 0.01) -> float:
    """Width of the region where |W| exceeds level * max |W|.

    Counts nodes above the cut, so a pulse spread over disjoint bumps
    reports the total occupied length, not the span.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    a = np.abs(W.values)
    peak = float(a.max())
    if peak == 0.0:
        return 0.0
    return float(np.count_nonzero(a >= level * peak)) * W.grid.spacing


@dataclass(frozen=True)
class SweepRow:
    K: float
    P: float
    sigma: float
    ratio: float
    converged: bool
    status: str
    solution: Optional[WaveSolution] = field(default=None, repr=False)


def sweep_K(
    K_list,
    c: Coupling,
    grid: Grid,
    opts: Optional[SolveOptions] = None,
    warm_start: bool = True,
) -> list:
    """Solve along increasing K; each row records (K, P, sigma, ratio).

    With warm_start the previous profile, rescaled to the new K, seeds
    the next solve (branch continuation); without it every row restarts
    from the configured initial kind. Failed rows carry NaN values and
    the error text, and the sweep continues.
    """
    K_arr = [float(K) for K in K_list]
    if not K_arr:
        return []
    if any(K <= 0 for K in K_arr):
        raise ValueError("all K values must be positive")
    if any(b <= a for a, b in zip(K_arr, K_arr[1:])):
        raise ValueError("K values must be strictly increasing")
    opts = SolveOptions() if opts is None else opts

    rows = []
    carry: Optional[Profile] = None
    for K in K_arr:
        row_opts = opts
        if warm_start and carry is not None:
            row_opts = replace(opts, initial="supplied", initial_profile=carry)
        try:
            sol = solve(K, c, grid, row_opts)
        except Exception as exc:  # keep sweeping; the row records the failure
            rows.append(SweepRow(K, math.nan, math.nan, math.nan, False, f"error: {exc}"))
            continue
        rows.append(
            SweepRow(
                K=K,
                P=sol.P,
                sigma=sol.sigma,
                ratio=localization_ratio(sol.profile),
                converged=sol.converged,
                status=sol.status,
                solution=sol,
            )
        )
        carry = sol.profile
    return rows


@dataclass(frozen=True)
class ThresholdReport:
    """Bracket around the K where the localization ratio first crosses trigger.

    found is False when no upward crossing exists; reason then says
    whether the table sat entirely above, entirely below, or mixed
    without an adjacent upward crossing."""

    found: bool
    trigger: float
    reason: str
    K_low: Optional[float] = None
    K_high: Optional[float] = None
    K_estimate: Optional[float] = None


def threshold_detect(table, trigger: float = 2.0) -> ThresholdReport:
    rows = [r for r in table if r.converged and math.isfinite(r.ratio)]
    if not rows:
        return ThresholdReport(found=False, trigger=trigger, reason="empty")
    below = [r.ratio < trigger for r in rows]
    for a, b in zip(range(len(rows)), range(1, len(rows))):
        if below[a] and not below[b]:
            lo, hi = rows[a], rows[b]
            frac = (trigger - lo.ratio) / (hi.ratio - lo.ratio)
            return ThresholdReport(
                found=True,
                trigger=trigger,
                reason="crossing",
                K_low=lo.K,
                K_high=hi.K,
                K_estimate=lo.K + frac * (hi.K - lo.K),
            )
    if not any(below):
        reason = "all_above"
    elif all(below):
        reason = "all_below"
    else:
        reason = "no_crossing"
    return ThresholdReport(found=False, trigger=trigger, reason=reason)
