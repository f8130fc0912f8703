"""Linear dispersion, exponential tail rates, and the long-wave limit.

The linearized medium has phase relation omega^2 = k^2 Theta^2(k) with
Theta^2 built from the window symbols and the curvatures at zero strain.
Supersonic solitary waves decay like exp(-lambda |x|) where lambda
solves sigma^2 = Theta^2 continued to imaginary wavenumber; slightly
supersonic waves approach a sech^2 profile whose coefficients come from
the small-k expansion of the symbol and the cubic term of the potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .convolution import sinc, sinch
from .errors import DecayOverflowError, SubsonicError
from .grids import Grid, Profile, l2_norm
from .materials import Coupling, DiscreteCoupling, reflect_coupling

__all__ = [
    "theta2",
    "omega2",
    "theta2_imag",
    "long_wave_speed2",
    "DispersionCurve",
    "dispersion_curve",
    "decay_rate",
    "fit_decay",
    "KdvCoefficients",
    "kdv_coefficients",
    "kdv_profile",
    "KdvComparison",
    "kdv_compare",
]

# sinh overflows beyond ~710; keep a margin for the squaring
_MAX_SINH_ARG = 700.0


def theta2(k, c: Coupling):
    """Squared phase-speed function of the linearized medium."""
    k_arr = np.asarray(k, dtype=float)
    if isinstance(c, DiscreteCoupling):
        total = 0.0
        for b in c.bonds:
            total = total + b.xi ** 2 * b.potential.d2phi0 * sinc(k_arr * (b.xi / 2.0)) ** 2
    else:
        w = c.weights * c.alpha_values * c.beta_values ** 2 * c.nodes ** 2
        s = sinc(np.multiply.outer(k_arr, c.nodes) / 2.0)
        total = c.potential.d2phi0 * np.sum(w * s * s, axis=-1)
    if np.ndim(k) == 0:
        return float(total)
    return np.asarray(total)


def omega2(k, c: Coupling):
    """Squared angular frequency k^2 Theta^2(k)."""
    k_arr = np.asarray(k, dtype=float)
    out = k_arr ** 2 * theta2(k_arr, c)
    if np.ndim(k) == 0:
        return float(out)
    return out


def _xi_max(c: Coupling) -> float:
    if isinstance(c, DiscreteCoupling):
        return c.bonds[-1].xi
    return float(c.nodes[-1])


def theta2_imag(lam, c: Coupling):
    """Theta^2 continued to imaginary wavenumber: sinc becomes sinh(y)/y.

    Strictly increasing in lam; equals the long-wave value at lam = 0."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("decay rate must be nonnegative")
    worst = float(np.max(lam_arr)) * _xi_max(c) / 2.0
    if worst > _MAX_SINH_ARG:
        raise DecayOverflowError(
            f"sinh argument {worst:.3g} exceeds the floating range; "
            "decay rate too large for this horizon"
        )
    if isinstance(c, DiscreteCoupling):
        total = 0.0
        for b in c.bonds:
            total = total + b.xi ** 2 * b.potential.d2phi0 * sinch(lam_arr * (b.xi / 2.0)) ** 2
    else:
        w = c.weights * c.alpha_values * c.beta_values ** 2 * c.nodes ** 2
        s = sinch(np.multiply.outer(lam_arr, c.nodes) / 2.0)
        total = c.potential.d2phi0 * np.sum(w * s * s, axis=-1)
    if np.ndim(lam) == 0:
        return float(total)
    return np.asarray(total)


def long_wave_speed2(c: Coupling) -> float:
    """Theta^2(0), the squared sonic speed."""
    return theta2(0.0, c)


def _high_freq_limit(c: Coupling) -> float:
    # mean value of the omega^2 oscillation; a true limit only for
    # continuous couplings with integrable alpha beta^2
    if isinstance(c, DiscreteCoupling):
        return 2.0 * sum(b.potential.d2phi0 for b in c.bonds)
    return 2.0 * c.potential.d2phi0 * float(np.sum(c.weights * c.alpha_values * c.beta_values ** 2))


@dataclass(frozen=True)
class DispersionCurve:
    k: np.ndarray
    theta2: np.ndarray
    omega2: np.ndarray
    c0: float
    c_inf: float


def dispersion_curve(c: Coupling, k_max: float, samples: int = 256) -> DispersionCurve:
    if k_max <= 0 or samples < 2:
        raise ValueError("need k_max > 0 and at least two samples")
    k = np.linspace(0.0, k_max, samples)
    t2 = theta2(k, c)
    return DispersionCurve(
        k=k,
        theta2=t2,
        omega2=k ** 2 * t2,
        c0=long_wave_speed2(c),
        c_inf=_high_freq_limit(c),
    )


def decay_rate(sigma2: float, c: Coupling) -> float:
    """The unique lambda > 0 with Theta^2(i lambda) = sigma^2.

    Only supersonic speeds admit an exponential tail; sigma^2 at or
    below Theta^2(0) raises SubsonicError."""
    c0 = long_wave_speed2(c)
    if not sigma2 > c0:
        raise SubsonicError(
            f"sigma^2 = {sigma2:.6g} does not exceed the long-wave value {c0:.6g}"
        )

    def f(lam):
        return theta2_imag(lam, c) - sigma2

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        lo = hi
        hi *= 2.0
    return float(brentq(f, lo, hi, rtol=1e-12, maxiter=200))


def fit_decay(W: Profile, window) -> float:
    """Least-squares exponential rate of W over x in [window[0], window[1]]."""
    x_lo, x_hi = float(window[0]), float(window[1])
    if not x_hi > x_lo:
        raise ValueError("window must be an increasing interval")
    x = W.grid.nodes
    mask = (x >= x_lo) & (x <= x_hi)
    if int(mask.sum()) < 3:
        raise ValueError("window contains fewer than three nodes")
    v = W.values[mask]
    if np.any(v <= 0):
        raise ValueError("profile must be positive on the fit window")
    slope = np.polyfit(x[mask], np.log(v), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class KdvCoefficients:
    """Long-wave expansion data.

    Two candidates for the dispersive coefficient are reported side by
    side: c1_half_moment is half the fourth xi-moment of the bond
    density, c1_curvature is the same moment divided by 12, the value
    the small-k curvature of the symbol actually produces. Profile
    construction uses c1_curvature. degenerate flags a vanishing or
    negative cubic coefficient c2, where no long-wave soliton exists."""

    c0: float
    c1_half_moment: float
    c1_curvature: float
    c2: float
    degenerate: bool


def kdv_coefficients(c: Coupling) -> KdvCoefficients:
    if isinstance(c, DiscreteCoupling):
        m4 = sum(b.xi ** 4 * b.potential.d2phi0 for b in c.bonds)
        c2 = sum(b.xi ** 3 * 0.5 * b.potential.d3phi0 for b in c.bonds)
    else:
        wab2 = c.weights * c.alpha_values * c.beta_values ** 2
        m4 = c.potential.d2phi0 * float(np.sum(wab2 * c.nodes ** 4))
        c2 = 0.5 * c.potential.d3phi0 * float(
            np.sum(c.weights * c.alpha_values * c.beta_values ** 3 * c.nodes ** 3)
        )
    return KdvCoefficients(
        c0=long_wave_speed2(c),
        c1_half_moment=0.5 * m4,
        c1_curvature=m4 / 12.0,
        c2=c2,
        degenerate=not c2 > 0.0,
    )


def kdv_profile(eps: float, c: Coupling, grid: Grid):
    """Long-wave prediction eps^2 * (3/(2 c2)) sech^2(eps x / (2 sqrt(c1))).

    Returns (profile, predicted sigma^2 = Theta^2(0) + eps^2)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    coef = kdv_coefficients(c)
    if coef.degenerate:
        raise ValueError(
            "cubic coefficient is not positive; the long-wave limit is degenerate"
        )
    c1 = coef.c1_curvature
    amp = eps * eps * 1.5 / coef.c2
    arg = eps * grid.nodes / (2.0 * math.sqrt(c1))
    values = amp / np.cosh(arg) ** 2
    return Profile(grid, values), coef.c0 + eps * eps


@dataclass(frozen=True)
class KdvComparison:
    eps: float
    sup_error: float
    l2_error: float
    amplitude_ratio: float
    sigma2: float
    sigma2_predicted: float


def kdv_compare(sol, c: Coupling) -> KdvComparison:
    """Distance between a computed wave and its long-wave prediction.

    eps is inferred from the computed speed via eps^2 = sigma^2 -
    Theta^2(0). Negative-sign solutions are reflected into the positive
    cone together with their medium before comparing."""
    values = sol.profile.values
    if getattr(sol, "sign", "positive") == "negative":
        c = reflect_coupling(c)
        values = -values
    coef = kdv_coefficients(c)
    excess = sol.sigma2 - coef.c0
    if excess <= 1e-8 * max(coef.c0, 1.0):
        raise SubsonicError(
            f"sigma^2 = {sol.sigma2:.6g} is not supersonic "
            f"(long-wave value {coef.c0:.6g}); no long-wave regime"
        )
    eps = math.sqrt(excess)
    grid = sol.profile.grid
    pred, s2_pred = kdv_profile(eps, c, grid)
    peak = float(np.max(pred.values))
    diff = values - pred.values
    sup_error = float(np.max(np.abs(diff))) / peak
    l2_error = math.sqrt(grid.spacing * float(np.dot(diff, diff))) / l2_norm(pred)
    return KdvComparison(
        eps=eps,
        sup_error=sup_error,
        l2_error=l2_error,
        amplitude_ratio=float(np.max(values)) / peak,
        sigma2=sol.sigma2,
        sigma2_predicted=s2_pred,
    )
