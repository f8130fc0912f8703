"""Micro-potentials and coupling descriptions.

A medium is either a finite list of bonds (offset xi, potential) or a
continuous family alpha(xi), beta(xi) weighting a single reference
potential, discretized by a midpoint rule in xi. Potentials are
normalized so that Phi(0) = Phi'(0) = 0; curvature and third derivative
at the origin are stored analytically because the dispersion and
long-wave asymptotics depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .convolution import conv_symbol
from .grids import Grid

__all__ = [
    "Potential",
    "Bond",
    "DiscreteCoupling",
    "ContinuousCoupling",
    "Coupling",
    "potential_library",
    "silling_medium",
    "build_quadrature",
    "coefficient_family",
    "check_superquadratic",
    "SuperquadraticReport",
    "reflect_potential",
    "reflect_coupling",
    "integrability_diagnostic",
]


@dataclass(frozen=True, eq=False)
class Potential:
    """Bond potential r -> Phi(r) with exact derivative data at the origin.

    max_abs_arg, when set, is the largest |r| that evaluates without
    floating overflow; energy evaluation checks it before calling phi.
    """

    name: str
    params: Mapping
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]
    d2phi0: float
    d3phi0: float
    max_abs_arg: Optional[float] = None


def _poly_factory(coefficients: Sequence[float]) -> Potential:
    coeffs = [float(c) for c in coefficients]
    if not coeffs:
        raise ValueError("polyseries needs at least one coefficient")
    if any(c < 0 for c in coeffs):
        raise ValueError("polyseries coefficients must be nonnegative")
    powers = np.arange(2, 2 + len(coeffs), dtype=float)
    carr = np.asarray(coeffs)

    def phi(r):
        r = np.asarray(r, dtype=float)
        return np.sum(carr * np.power(r[..., None], powers), axis=-1)

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return np.sum(carr * powers * np.power(r[..., None], powers - 1.0), axis=-1)

    d3 = 6.0 * coeffs[1] if len(coeffs) > 1 else 0.0
    return Potential(
        name="polyseries",
        params={"coefficients": tuple(coeffs)},
        phi=phi,
        dphi=dphi,
        d2phi0=2.0 * coeffs[0],
        d3phi0=d3,
    )


def potential_library(name: str, **params) -> Potential:
    """Construct a named potential.

    Families: silling(c2, c3), harmonic(c), poly26(c2, c6), pwlin,
    hertz(p), cosh(beta), polyseries(coefficients) where coefficients[i]
    weights r**(i+2).
    """
    if name == "harmonic":
        c = float(params.pop("c", 0.5))
        _reject_extra(name, params)
        return Potential(
            name="harmonic",
            params={"c": c},
            phi=lambda r: c * np.square(r),
            dphi=lambda r: 2.0 * c * np.asarray(r, dtype=float),
            d2phi0=2.0 * c,
            d3phi0=0.0,
        )

    if name == "poly26":
        c2 = float(params.pop("c2", 0.5))
        c6 = float(params.pop("c6", 1.0 / 6.0))
        _reject_extra(name, params)

        def phi(r):
            r2 = np.square(np.asarray(r, dtype=float))
            return c2 * r2 + c6 * r2 * r2 * r2

        def dphi(r):
            r = np.asarray(r, dtype=float)
            return 2.0 * c2 * r + 6.0 * c6 * r ** 5

        return Potential("poly26", {"c2": c2, "c6": c6}, phi, dphi, 2.0 * c2, 0.0)

    if name == "pwlin":
        _reject_extra(name, params)

        # quadratic up to r=1, then linear stress with a stiffer quadratic recovery
        def phi(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= 1.0, 0.5 * r * r, r - 0.5 + 2.5 * np.square(r - 1.0))

        def dphi(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= 1.0, r, 1.0 + 5.0 * (r - 1.0))

        return Potential("pwlin", {}, phi, dphi, 1.0, 0.0)

    if name == "hertz":
        p = float(params.pop("p"))
        _reject_extra(name, params)
        if p <= 1.0:
            raise ValueError(f"hertz exponent must exceed 1, got {p}")
        if p > 2.0:
            d2, d3 = 0.0, 0.0
        elif p == 2.0:
            d2, d3 = 2.0, 0.0
        else:
            # contact stiffness diverges at zero strain: no linear sound speed
            d2, d3 = np.inf, 0.0

        def phi(r):
            return np.power(np.maximum(np.asarray(r, dtype=float), 0.0), p)

        def dphi(r):
            return p * np.power(np.maximum(np.asarray(r, dtype=float), 0.0), p - 1.0)

        return Potential("hertz", {"p": p}, phi, dphi, d2, d3)

    if name == "cosh":
        beta = float(params.pop("beta", 1.0))
        _reject_extra(name, params)
        if beta <= 0:
            raise ValueError(f"cosh steepness must be positive, got {beta}")
        return Potential(
            name="cosh",
            params={"beta": beta},
            phi=lambda r: np.cosh(beta * np.asarray(r, dtype=float)) - 1.0,
            dphi=lambda r: beta * np.sinh(beta * np.asarray(r, dtype=float)),
            d2phi0=beta * beta,
            d3phi0=0.0,
            max_abs_arg=700.0 / beta,
        )

    if name == "polyseries":
        coefficients = params.pop("coefficients")
        _reject_extra(name, params)
        return _poly_factory(coefficients)

    if name == "silling":
        c2 = float(params.pop("c2", 0.5))
        c3 = float(params.pop("c3", -1.0 / 6.0))
        _reject_extra(name, params)

        # cubic softening on the compressive side only
        def phi(r):
            r = np.asarray(r, dtype=float)
            return c2 * r * r + c3 * np.where(r <= 0.0, r * r * r, 0.0)

        def dphi(r):
            r = np.asarray(r, dtype=float)
            return 2.0 * c2 * r + 3.0 * c3 * np.where(r <= 0.0, r * r, 0.0)

        # origin data taken from the r <= 0 branch, where the medium is solved
        return Potential("silling", {"c2": c2, "c3": c3}, phi, dphi, 2.0 * c2, 6.0 * c3)

    raise ValueError(f"unknown potential family {name!r}")


def _reject_extra(name, params):
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")


def reflect_potential(pot: Potential) -> Potential:
    """Phi~(r) := Phi(-r); lets negative-branch media run in the positive cone."""
    return Potential(
        name=pot.name + "-reflected",
        params=dict(pot.params),
        phi=lambda r: pot.phi(-np.asarray(r, dtype=float)),
        dphi=lambda r: -pot.dphi(-np.asarray(r, dtype=float)),
        d2phi0=pot.d2phi0,
        d3phi0=-pot.d3phi0,
        max_abs_arg=pot.max_abs_arg,
    )


@dataclass(frozen=True)
class Bond:
    xi: float
    potential: Potential

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise ValueError(f"bond offset must be positive, got {self.xi}")


@dataclass(frozen=True, eq=False)
class DiscreteCoupling:
    bonds: tuple

    def __post_init__(self):
        bonds = tuple(self.bonds)
        if not bonds:
            raise ValueError("need at least one bond")
        xis = [b.xi for b in bonds]
        if any(b <= a for a, b in zip(xis, xis[1:])):
            raise ValueError(f"bond offsets must be strictly increasing, got {xis}")
        object.__setattr__(self, "bonds", bonds)

    @property
    def xi_max(self) -> float:
        return self.bonds[-1].xi


@dataclass(frozen=True, eq=False)
class ContinuousCoupling:
    """Midpoint discretization of a coefficient family alpha, beta on (0, xi_max].

    alpha_values, beta_values are the coefficients evaluated at the
    quadrature nodes; evaluation happens once at construction so the
    coupling is immutable afterwards.
    """

    alpha: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]
    potential: Potential
    nodes: np.ndarray
    weights: np.ndarray
    alpha_values: np.ndarray = field(init=False)
    beta_values: np.ndarray = field(init=False)
    _symbol_cache: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("quadrature nodes must form a nonempty 1-d array")
        if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise ValueError("quadrature nodes must be positive and increasing")
        if weights.shape != nodes.shape or np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive and match the nodes")
        av = np.asarray(self.alpha(nodes), dtype=float) * np.ones_like(nodes)
        bv = np.asarray(self.beta(nodes), dtype=float) * np.ones_like(nodes)
        if not (np.all(np.isfinite(av)) and np.all(np.isfinite(bv))):
            raise ValueError("coefficient functions must be finite at all nodes")
        if np.any(av < 0) or np.any(bv < 0):
            raise ValueError("coefficient functions must be nonnegative")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        av.flags.writeable = False
        bv.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "alpha_values", av)
        object.__setattr__(self, "beta_values", bv)

    @property
    def xi_max(self) -> float:
        return float(self.nodes[-1] + 0.5 * (self.weights[-1]))

    def symbol_matrix(self, grid: Grid) -> np.ndarray:
        """(n_nodes, N/2+1) window symbols at every quadrature node."""
        key = (grid.L, grid.N)
        mat = self._symbol_cache.get(key)
        if mat is None:
            mat = conv_symbol(self.nodes[:, None], grid.rfft_wavenumbers[None, :])
            mat.flags.writeable = False
            self._symbol_cache[key] = mat
        return mat


Coupling = Union[DiscreteCoupling, ContinuousCoupling]


def coefficient_family(name: str, **params) -> Callable[[np.ndarray], np.ndarray]:
    """Named coefficient functions for continuous couplings."""
    if name == "constant":
        value = float(params.pop("value", 1.0))
        _reject_extra(name, params)
        return lambda xi: value * np.ones_like(np.asarray(xi, dtype=float))
    if name == "power":
        coefficient = float(params.pop("coefficient", 1.0))
        exponent = float(params.pop("exponent", 1.0))
        _reject_extra(name, params)
        return lambda xi: coefficient * np.power(np.asarray(xi, dtype=float), exponent)
    raise ValueError(f"unknown coefficient family {name!r}")


def build_quadrature(
    alpha: Callable,
    beta: Callable,
    Phi: Potential,
    xi_max: float,
    xi_step: float,
) -> ContinuousCoupling:
    """Midpoint nodes (i - 1/2) * xi_step on (0, xi_max], uniform weights."""
    if not (xi_max > xi_step > 0):
        raise ValueError(f"need xi_max > xi_step > 0, got {xi_max}, {xi_step}")
    count = int(np.floor(xi_max / xi_step + 1e-9))
    nodes = (np.arange(count) + 0.5) * xi_step
    weights = np.full(count, xi_step)
    return ContinuousCoupling(alpha=alpha, beta=beta, potential=Phi, nodes=nodes, weights=weights)


def silling_medium(H: float, c2: float = 0.5, c3: float = -1.0 / 6.0, xi_step: float = 0.01) -> ContinuousCoupling:
    """Linear-in-xi bond density with 1/xi strain scaling, horizon H."""
    if H <= 0:
        raise ValueError(f"horizon must be positive, got {H}")
    return build_quadrature(
        alpha=coefficient_family("power", exponent=1.0),
        beta=coefficient_family("power", exponent=-1.0),
        Phi=potential_library("silling", c2=c2, c3=c3),
        xi_max=H,
        xi_step=xi_step,
    )


def reflect_coupling(c: Coupling) -> Coupling:
    if isinstance(c, DiscreteCoupling):
        return DiscreteCoupling(tuple(Bond(b.xi, reflect_potential(b.potential)) for b in c.bonds))
    return ContinuousCoupling(
        alpha=c.alpha,
        beta=c.beta,
        potential=reflect_potential(c.potential),
        nodes=c.nodes.copy(),
        weights=c.weights.copy(),
    )


@dataclass(frozen=True)
class SuperquadraticReport:
    """Worst sampled violations of the weak super-quadraticity conditions.

    curvature_violation: max of Phi'(r) - r Phi''(r) (should be <= 0)
    slope_violation: max of -Phi'(r) (Phi' should be nonnegative)
    doubling_violation: max of 2 Phi(r) - r Phi'(r) (should be <= 0)
    All maxima are clipped at zero, over r in (0, r_max].
    """

    curvature_violation: float
    slope_violation: float
    doubling_violation: float
    r_max: float
    samples: int

    def ok(self, tol: float = 1e-8) -> bool:
        return (
            self.curvature_violation <= tol
            and self.slope_violation <= tol
            and self.doubling_violation <= tol
        )


def check_superquadratic(Phi: Potential, r_max: float = 2.0, samples: int = 400) -> SuperquadraticReport:
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    r = np.linspace(r_max / samples, r_max, samples)
    step = 1e-6 * (1.0 + r)
    d2 = (Phi.dphi(r + step) - Phi.dphi(r - step)) / (2.0 * step)
    d1 = Phi.dphi(r)
    p = Phi.phi(r)
    curvature = float(max(0.0, np.max(d1 - r * d2)))
    slope = float(max(0.0, np.max(-d1)))
    doubling = float(max(0.0, np.max(2.0 * p - r * d1)))
    return SuperquadraticReport(curvature, slope, doubling, r_max, samples)


def integrability_diagnostic(c: ContinuousCoupling, K: float) -> float:
    """Finite value certifies the energy integral converges at constraint K.

    Sums w * (xi + xi^2) * alpha * beta^2 * phi(sqrt(xi) * beta * sqrt(2K))
    with phi(r) = Phi'(r)/r, the secant stiffness at the extreme strain a
    profile of kinetic size K can produce.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    xi = c.nodes
    r = np.sqrt(xi) * c.beta_values * np.sqrt(2.0 * K)
    with np.errstate(over="ignore", invalid="ignore"):
        secant = np.where(r > 0, c.potential.dphi(r) / np.where(r > 0, r, 1.0), c.potential.d2phi0)
        total = np.sum(c.weights * (xi + xi * xi) * c.alpha_values * c.beta_values ** 2 * secant)
    return float(total)
