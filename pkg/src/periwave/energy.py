"""Potential energy, kinetic constraint, harmonic comparison, and gradient.

For bonds, P(W) = sum_m integral Phi_m((A_m W)(x)) dx with A_m the
width-xi_m window average; for continuous couplings the bond sum becomes
a quadrature over xi of alpha(xi) Phi(beta(xi) (A_xi W)(x)). The
gradient follows from self-adjointness of the window average:
grad P = sum_m A_m Phi_m'(A_m W), with alpha beta weights in the
continuous case. The solver consumes eval_P_and_grad, which shares the
transforms between the two quantities.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .convolution import _rfft_symbol
from .errors import PotentialOverflowError
from .grids import Grid, Profile, l2_norm
from .materials import ContinuousCoupling, Coupling, DiscreteCoupling, Potential

__all__ = [
    "kinetic_K",
    "potential_P",
    "grad_P",
    "quadratic_Q",
    "eval_P_and_grad",
    "EnergyReport",
    "energy_report",
]

# quadrature nodes processed per FFT batch; bounds transient memory
_CHUNK = 512


def kinetic_K(W: Profile) -> float:
    """K(W) = half the squared grid L2 norm."""
    return 0.5 * l2_norm(W) ** 2


def _guard_overflow(pot: Potential, args: np.ndarray, grid: Grid):
    if pot.max_abs_arg is None:
        return
    worst = int(np.argmax(np.abs(args)))
    if abs(args.flat[worst]) > pot.max_abs_arg:
        node = worst % grid.N
        raise PotentialOverflowError(pot.name, node, float(grid.nodes[node]), float(args.flat[worst]))


def _eval_discrete(W: Profile, c: DiscreteCoupling, need_grad: bool):
    grid = W.grid
    h = grid.spacing
    W_hat = np.fft.rfft(W.values)
    P = 0.0
    g_hat = np.zeros_like(W_hat) if need_grad else None
    for bond in c.bonds:
        s = _rfft_symbol(grid.L, grid.N, float(bond.xi))
        a = np.fft.irfft(W_hat * s, n=grid.N)
        _guard_overflow(bond.potential, a, grid)
        P += h * float(np.sum(bond.potential.phi(a)))
        if need_grad:
            g_hat += s * np.fft.rfft(bond.potential.dphi(a))
    grad = np.fft.irfft(g_hat, n=grid.N) if need_grad else None
    return P, grad


def _eval_continuous(W: Profile, c: ContinuousCoupling, need_grad: bool):
    grid = W.grid
    h = grid.spacing
    W_hat = np.fft.rfft(W.values)
    S = c.symbol_matrix(grid)
    w_alpha = c.weights * c.alpha_values
    beta = c.beta_values
    P = 0.0
    g_hat = np.zeros_like(W_hat) if need_grad else None
    for lo in range(0, c.nodes.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        A = np.fft.irfft(W_hat[None, :] * S[sl], n=grid.N, axis=1)
        args = beta[sl, None] * A
        _guard_overflow(c.potential, args, grid)
        P += h * float(np.dot(w_alpha[sl], np.sum(c.potential.phi(args), axis=1)))
        if need_grad:
            F_hat = np.fft.rfft(c.potential.dphi(args), axis=1)
            g_hat += np.sum((w_alpha[sl] * beta[sl])[:, None] * S[sl] * F_hat, axis=0)
    grad = np.fft.irfft(g_hat, n=grid.N) if need_grad else None
    return P, grad


def eval_P_and_grad(W: Profile, c: Coupling):
    """(P(W), grad P(W)) sharing one forward transform; the solver hot path."""
    if isinstance(c, DiscreteCoupling):
        P, g = _eval_discrete(W, c, need_grad=True)
    else:
        P, g = _eval_continuous(W, c, need_grad=True)
    return P, Profile(W.grid, g)


def potential_P(W: Profile, c: Coupling) -> float:
    if isinstance(c, DiscreteCoupling):
        return _eval_discrete(W, c, need_grad=False)[0]
    return _eval_continuous(W, c, need_grad=False)[0]


def grad_P(W: Profile, c: Coupling) -> Profile:
    return eval_P_and_grad(W, c)[1]


def quadratic_Q(W: Profile, c: Coupling) -> float:
    """The harmonic quadratic functional: Phi replaced by its origin parabola."""
    grid = W.grid
    h = grid.spacing
    W_hat = np.fft.rfft(W.values)
    if isinstance(c, DiscreteCoupling):
        Q = 0.0
        for bond in c.bonds:
            s = _rfft_symbol(grid.L, grid.N, float(bond.xi))
            a = np.fft.irfft(W_hat * s, n=grid.N)
            Q += 0.5 * bond.potential.d2phi0 * h * float(np.dot(a, a))
        return Q
    S = c.symbol_matrix(grid)
    w_ab2 = c.weights * c.alpha_values * c.beta_values ** 2
    Q = 0.0
    for lo in range(0, c.nodes.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        A = np.fft.irfft(W_hat[None, :] * S[sl], n=grid.N, axis=1)
        Q += h * float(np.dot(w_ab2[sl], np.sum(A * A, axis=1)))
    return 0.5 * c.potential.d2phi0 * Q


@dataclass(frozen=True)
class EnergyReport:
    """Snapshot of the functionals at one profile.

    sigma2_candidate is |grad P| / |W|, the multiplier the profile would
    have if it were a fixed point; superquadraticity_gap is
    <grad P(W), W> - 2 P(W), nonnegative on the cone for admissible
    potentials.
    """

    P: float
    K: float
    Q: float
    sigma2_candidate: float
    superquadraticity_gap: float

    def to_json(self) -> dict:
        return asdict(self)


def energy_report(W: Profile, c: Coupling) -> EnergyReport:
    P, g = eval_P_and_grad(W, c)
    h = W.grid.spacing
    pairing = h * float(np.dot(g.values, W.values))
    norm_W = l2_norm(W)
    norm_g = l2_norm(g)
    candidate = norm_g / norm_W if norm_W > 0 else float("nan")
    return EnergyReport(
        P=P,
        K=kinetic_K(W),
        Q=quadratic_Q(W, c),
        sigma2_candidate=candidate,
        superquadraticity_gap=pairing - 2.0 * P,
    )
