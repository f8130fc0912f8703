"""The windowed-average operator and its Fourier symbol.

The operator maps W to x -> integral of W over [x - xi/2, x + xi/2].
On the periodic grid it diagonalizes in Fourier space with symbol
xi * sinc(k xi / 2), which is the route the solver uses; a direct
quadrature version exists as an independent cross-check.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grids import Grid, Profile

__all__ = ["sinc", "sinch", "conv_symbol", "conv_spectral", "conv_direct"]


def sinc(y):
    """sin(y)/y with the removable singularity filled in."""
    return np.sinc(np.asarray(y) / np.pi)


def sinch(y):
    """sinh(y)/y, series near zero to avoid 0/0."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-4
    out = np.empty_like(y)
    ys = y[small]
    out[small] = 1.0 + ys * ys / 6.0 * (1.0 + ys * ys / 20.0)
    yb = y[~small]
    out[~small] = np.sinh(yb) / yb
    return out if out.ndim else float(out)


def conv_symbol(xi: float, k):
    """Fourier symbol xi * sinc(k xi / 2) of the width-xi window average."""
    return xi * sinc(np.asarray(k) * (xi / 2.0))


@lru_cache(maxsize=256)
def _rfft_symbol(L: float, N: int, xi: float) -> np.ndarray:
    s = conv_symbol(xi, Grid(L, N).rfft_wavenumbers)
    s.flags.writeable = False
    return s


def conv_spectral(W: Profile, xi: float) -> Profile:
    if xi <= 0:
        raise ValueError(f"window width must be positive, got {xi}")
    s = _rfft_symbol(W.grid.L, W.grid.N, float(xi))
    out = np.fft.irfft(np.fft.rfft(W.values) * s, n=W.grid.N)
    return Profile(W.grid, out)


def _direct_weights(h: float, xi: float):
    """Trapezoid weights for the window integral, fractional end cells included.

    The window half-width xi/2 covers n_full whole cells plus a fraction
    frac of the next one; the integrand is the piecewise-linear
    interpolant, so the end cell contributes (frac - frac^2/2) at the
    last interior node and frac^2/2 at the node beyond it.
    """
    c = xi / (2.0 * h)
    n_full = int(np.floor(c + 1e-12))
    frac = c - n_full
    if frac < 1e-12:
        frac = 0.0
    offsets = np.arange(-(n_full + 1), n_full + 2)
    weights = np.zeros_like(offsets, dtype=float)
    if n_full >= 1:
        weights[1:-1] = h
        weights[1] = weights[-2] = 0.5 * h + h * (frac - 0.5 * frac * frac)
        weights[0] = weights[-1] = 0.5 * h * frac * frac
    else:
        weights[1] = 2.0 * h * (frac - 0.5 * frac * frac)
        weights[0] = weights[2] = 0.5 * h * frac * frac
    keep = weights != 0.0
    return offsets[keep], weights[keep]


def conv_direct(W: Profile, xi: float) -> Profile:
    """Quadrature evaluation of the window average; cross-check for conv_spectral."""
    if xi <= 0:
        raise ValueError(f"window width must be positive, got {xi}")
    if xi > 2.0 * W.grid.L:
        raise ValueError(
            f"window width {xi} exceeds the period {2.0 * W.grid.L}; "
            "the kernel support must fit the domain"
        )
    offsets, weights = _direct_weights(W.grid.spacing, float(xi))
    v = W.values
    out = np.zeros_like(v)
    for j, w in zip(offsets, weights):
        out += w * np.roll(v, -int(j))
    return Profile(W.grid, out)
