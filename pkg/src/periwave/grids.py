"""Periodic grids, profile containers, and the cone diagnostics.

Profiles live on a uniform grid over [-L, L) with x_j = -L + j*h and
h = 2L/N; the node x = +L is identified with x = -L. All norms are the
grid approximation of the L2 norm on the full period.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "Grid",
    "Profile",
    "ConeReport",
    "make_grid",
    "l2_norm",
    "inner",
    "cone_check",
    "profile_to_csv",
    "profile_from_csv",
    "profile_to_json",
    "profile_from_json",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) with N nodes."""

    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half-length must be positive and finite, got {self.L}")
        if self.N != int(self.N) or self.N < 8 or self.N % 2 != 0:
            raise ValueError(f"node count must be an even integer >= 8, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.L + self.spacing * np.arange(self.N)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """All Fourier wavenumbers pi*n/L, n = -N/2..N/2-1, in FFT order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.spacing)
        k.flags.writeable = False
        return k

    @cached_property
    def rfft_wavenumbers(self) -> np.ndarray:
        """Nonnegative wavenumbers pi*n/L, n = 0..N/2, matching numpy.fft.rfft."""
        k = 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.spacing)
        k.flags.writeable = False
        return k


def make_grid(L: float, N: int) -> Grid:
    return Grid(L, N)


class Profile:
    """Real-valued samples on a Grid. Values are finite by construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at node {bad} (x = {grid.nodes[bad]:.6g})")
        self.grid = grid
        self.values = values

    def copy(self) -> "Profile":
        return Profile(self.grid, self.values.copy())

    def _require_same_grid(self, other: "Profile"):
        if self.grid != other.grid:
            raise GridMismatchError(
                f"grids differ: (L={self.grid.L}, N={self.grid.N}) vs "
                f"(L={other.grid.L}, N={other.grid.N})"
            )

    def __add__(self, other: "Profile") -> "Profile":
        self._require_same_grid(other)
        return Profile(self.grid, self.values + other.values)

    def __sub__(self, other: "Profile") -> "Profile":
        self._require_same_grid(other)
        return Profile(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Profile":
        return Profile(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Profile":
        return Profile(self.grid, -self.values)

    def __repr__(self):
        return f"Profile(L={self.grid.L}, N={self.grid.N}, max={self.values.max():.4g})"


def l2_norm(W: Profile) -> float:
    """Grid L2 norm: sqrt(h * sum W_j^2)."""
    return float(np.sqrt(W.grid.spacing * np.dot(W.values, W.values)))


def inner(V: Profile, W: Profile) -> float:
    """Grid L2 inner product h * sum V_j W_j."""
    V._require_same_grid(W)
    return float(V.grid.spacing * np.dot(V.values, W.values))


@dataclass(frozen=True)
class ConeReport:
    """Pointwise defects against the cone of even, nonnegative, unimodal profiles.

    in_cone holds iff the three cone defects stay below tolerance * ||W||_2.
    decay_defect additionally reports the worst violation of the bound
    W(x) <= ||W||_2 / sqrt(2|x|), which every cone member satisfies.
    """

    evenness_defect: float
    negativity_defect: float
    unimodality_defect: float
    decay_defect: float
    tolerance: float
    in_cone: bool


def cone_check(W: Profile, tol: float = 1e-8) -> ConeReport:
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    v = W.values
    N = W.grid.N
    norm = l2_norm(W)

    # x_j -> -x_j is index j -> (N - j) mod N under the x_j = -L + j*h layout
    reflected = v[(-np.arange(N)) % N]
    evenness = float(np.max(np.abs(v - reflected)))

    negativity = float(max(0.0, -np.min(v)))

    # monotone decrease on [0, L]; x = L is the periodic image of node 0
    seq = np.concatenate([v[N // 2 :], v[:1]])
    running_min = np.minimum.accumulate(seq)
    unimodality = float(max(0.0, np.max(seq[1:] - running_min[:-1])))

    x = W.grid.nodes
    away = np.abs(x) >= W.grid.spacing * (1.0 - 1e-12)
    bound = norm / np.sqrt(2.0 * np.abs(x[away]))
    decay = float(max(0.0, np.max(v[away] - bound)))

    limit = tol * norm
    in_cone = evenness <= limit and negativity <= limit and unimodality <= limit
    return ConeReport(evenness, negativity, unimodality, decay, tol, in_cone)


def profile_to_csv(W: Profile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(W.grid.nodes, W.values):
            writer.writerow([repr(float(x)), repr(float(v))])


def profile_from_csv(path) -> Profile:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header] != ["x", "value"]:
            raise ValueError(f"expected header 'x,value', got {header!r}")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    x = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    N = len(x)
    L = -x[0]
    grid = Grid(L, N)
    if not np.allclose(x, grid.nodes, rtol=0, atol=1e-9 * grid.spacing):
        raise ValueError("nodes are not a uniform periodic grid starting at -L")
    return Profile(grid, values)


def profile_to_json(W: Profile) -> dict:
    return {
        "grid": {"L": W.grid.L, "N": W.grid.N},
        "values": [float(v) for v in W.values],
    }


def profile_from_json(obj) -> Profile:
    if isinstance(obj, str):
        obj = json.loads(obj)
    grid = Grid(float(obj["grid"]["L"]), int(obj["grid"]["N"]))
    return Profile(grid, np.asarray(obj["values"], dtype=float))
