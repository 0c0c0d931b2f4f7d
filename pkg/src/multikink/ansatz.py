"""Multikink ansatz fields: profiles superposed along a chain of vacua,
their linearization potential, generalized zero modes, cutoffs and the
coercive quadratic forms.

Two-component fields (h, dh/dt) are represented as arrays of shape
(2, n_grid). The symplectic matrix J maps (f, g) to (g, -f).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .kink import KinkProfile, kink_profile
from .numerics import central_diff, grid_spacing, integrate_grid, smoothstep_quintic
from .potential import ChainOfVacua, PotentialModel, VacuumTable, validate_chain


@dataclass
class FieldState:
    """Sampled pair (phi, d_t phi) on a uniform grid at time t."""

    t: float
    grid: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    sector: Optional[tuple[int, int]] = None

    def __post_init__(self):
        self.dx = grid_spacing(self.grid)
        if not (len(self.grid) == len(self.phi) == len(self.phi_dot)):
            raise ConfigError("grid, phi and phi_dot must have equal length")


@dataclass(frozen=True)
class MultikinkParams:
    """A chain of vacua with admissible velocities and shifts.

    Carries the potential, vacuum table and the kink profiles for every
    adjacent pair so that all ansatz operations are self-contained.
    Immutable; boosting produces a new instance sharing the profiles.
    """

    model: PotentialModel
    table: VacuumTable
    chain: ChainOfVacua
    velocities: tuple[float, ...]
    shifts: tuple[float, ...]
    profiles: Mapping[tuple[int, int], KinkProfile] = field(repr=False)

    def __post_init__(self):
        K = self.chain.K
        if len(self.velocities) != K or len(self.shifts) != K:
            raise ConfigError("velocities and shifts must have one entry per kink")
        v = self.velocities
        if any(not -1.0 < vi < 1.0 for vi in v):
            raise ConfigError("velocities must lie in (-1, 1)")
        if any(not a < b for a, b in zip(v, v[1:])):
            raise ConfigError("velocities must be strictly increasing")
        for pair in self.chain.pairs():
            if pair not in self.profiles:
                raise ConfigError(f"missing kink profile for vacuum pair {pair}")

    @property
    def K(self) -> int:
        return self.chain.K

    @cached_property
    def gammas(self) -> tuple[float, ...]:
        return tuple(1.0 / np.sqrt(1.0 - v * v) for v in self.velocities)

    def profile(self, k: int) -> KinkProfile:
        """Profile of the k-th kink (1-indexed)."""
        return self.profiles[self.chain.pairs()[k - 1]]

    def kink_argument(self, k: int, t: float, x: np.ndarray) -> np.ndarray:
        """gamma_k (x - v_k t - a_k) for the k-th kink (1-indexed)."""
        return self.gammas[k - 1] * (x - self.velocities[k - 1] * t - self.shifts[k - 1])

    def with_parameters(self, velocities, shifts) -> "MultikinkParams":
        return MultikinkParams(model=self.model, table=self.table, chain=self.chain,
                               velocities=tuple(float(v) for v in velocities),
                               shifts=tuple(float(a) for a in shifts),
                               profiles=self.profiles)


def make_params(model: PotentialModel, table: VacuumTable, labels: Sequence[int],
                velocities: Sequence[float], shifts: Sequence[float],
                dx: float = 0.01, half_width: float | None = None) -> MultikinkParams:
    """Validate the chain and tabulate one profile per adjacent vacuum pair."""
    chain = validate_chain(table, labels)
    profiles = {}
    for pair in chain.pairs():
        if pair not in profiles:
            profiles[pair] = kink_profile(model, table, pair[0], pair[1],
                                          half_width=half_width, dx=dx)
    return MultikinkParams(model=model, table=table, chain=chain,
                           velocities=tuple(float(v) for v in velocities),
                           shifts=tuple(float(a) for a in shifts), profiles=profiles)


def multikink(params: MultikinkParams, t: float, grid: np.ndarray) -> FieldState:
    """The ansatz field: vacuum plus the sum of boosted kink increments.

    phi_dot is the exact time derivative of the superposition, using the
    tail-extended profile derivatives and the chain rule.
    """
    grid = np.asarray(grid, dtype=float)
    phi = np.full_like(grid, params.table.vacuum(params.chain.labels[0]))
    phi_dot = np.zeros_like(grid)
    for k in range(1, params.K + 1):
        prof = params.profile(k)
        arg = params.kink_argument(k, t, grid)
        phi += prof(arg) - params.table.vacuum(params.chain.labels[k - 1])
        phi_dot += -params.gammas[k - 1] * params.velocities[k - 1] * prof.deriv(arg, 1)
    sector = (params.chain.labels[0], params.chain.labels[-1])
    return FieldState(t=float(t), grid=grid, phi=phi, phi_dot=phi_dot, sector=sector)


def linearization_potential(params: MultikinkParams, t: float, grid: np.ndarray) -> np.ndarray:
    """Potential V(t, x) of the linearized operator around the multikink.

    Sum of W''(H_k) along the chain with the vacuum-mass offsets removed so
    the limits at -/+ infinity are the squared masses of the end vacua. For
    K = 0 this is the constant squared mass of the single vacuum.
    """
    grid = np.asarray(grid, dtype=float)
    labels = params.chain.labels
    if params.K == 0:
        return np.full_like(grid, params.table.mass(labels[0]) ** 2)
    prof = params.profile(1)
    v = params.model(prof(params.kink_argument(1, t, grid)), 2)
    for j in range(1, params.K):
        prof = params.profile(j + 1)
        v = v + params.model(prof(params.kink_argument(j + 1, t, grid)), 2) \
            - params.table.mass(labels[j]) ** 2
    return v


def apply_J(h: np.ndarray) -> np.ndarray:
    """Symplectic matrix [[0, 1], [-1, 0]] acting on a two-component field."""
    return np.stack([h[1], -h[0]])


@dataclass(frozen=True)
class ModePair:
    """Generalized zero modes of the j-th kink and their symplectic duals."""

    j: int
    Y0: np.ndarray
    Y1: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray


def zero_modes(params: MultikinkParams, j: int, t: float, grid: np.ndarray) -> ModePair:
    """Sample Y^0, Y^1 and their duals for the j-th kink (1-indexed).

    Y^0 generates spatial translations of the moving kink, Y^1 velocity
    changes; psi^i = J Y^i are the pairing functionals whose time evolution
    obeys the conservation laws of the linearized flow.
    """
    if not 1 <= j <= params.K:
        raise ConfigError(f"kink index {j} outside 1..{params.K}")
    grid = np.asarray(grid, dtype=float)
    v = params.velocities[j - 1]
    g = params.gammas[j - 1]
    y = grid - v * t - params.shifts[j - 1]
    prof = params.profile(j)
    d1 = prof.deriv(g * y, 1)
    d2 = prof.deriv(g * y, 2)
    # Y1 is gamma * d/dv of the moving-kink pair with the secular part removed;
    # with these factors h = Y1 + (t/gamma) Y0 solves the linearized flow exactly
    Y0 = np.stack([d1, -g * v * d2])
    Y1 = np.stack([-g * v * y * d1, g * d1 + g * g * v * v * y * d2])
    return ModePair(j=j, Y0=Y0, Y1=Y1, psi0=apply_J(Y0), psi1=apply_J(Y1))


def default_rho(params: MultikinkParams) -> float:
    """Cutoff half-speed: 0.05 of the smallest velocity gap."""
    if params.K < 2:
        return 0.05 * (1.0 - max((abs(v) for v in params.velocities), default=0.0))
    return 0.05 * min(b - a for a, b in zip(params.velocities, params.velocities[1:]))


def kink_cutoff(params: MultikinkParams, j: int, t: float, x, rho: float):
    """Smooth bump following the j-th kink: 1 within |u|<=1, 0 for |u|>=2,
    u = (x - v_j t - a_j) / (rho t). Requires t > 0."""
    if t <= 0:
        raise ConfigError("the cutoff is defined for t > 0 only")
    if rho <= 0:
        raise ConfigError("rho must be positive")
    if not 1 <= j <= params.K:
        raise ConfigError(f"kink index {j} outside 1..{params.K}")
    u = np.abs((np.asarray(x, dtype=float) - params.velocities[j - 1] * t
                - params.shifts[j - 1]) / (rho * t))
    val = 1.0 - smoothstep_quintic(u - 1.0)
    return float(val) if val.ndim == 0 else val


def inner_product(h: np.ndarray, mode: np.ndarray, dx: float) -> float:
    """L2 x L2 inner product of two two-component sampled fields."""
    h = np.asarray(h)
    mode = np.asarray(mode)
    if h.shape != mode.shape:
        raise ConfigError(f"grid mismatch: {h.shape} vs {mode.shape}")
    return integrate_grid(h[0] * mode[0] + h[1] * mode[1], dx)


def energy_norm_sq(h: np.ndarray, dx: float) -> float:
    """Squared energy norm: |h|_{H^1}^2 + |h_dot|_{L^2}^2."""
    hx = central_diff(h[0], dx)
    return integrate_grid(h[0] ** 2 + hx**2 + h[1] ** 2, dx)


def quad_form_single(params: MultikinkParams, t: float, h: np.ndarray,
                     grid: np.ndarray) -> float:
    """Quadratic form of the linearized flow around one moving kink (K=1):
    1/2 int (h_dot^2 + 2 v h_dot h_x + h_x^2 + V h^2)."""
    if params.K != 1:
        raise ConfigError("single-kink quadratic form requires K = 1")
    dx = grid_spacing(grid)
    hx = central_diff(h[0], dx)
    v = params.velocities[0]
    pot = linearization_potential(params, t, grid)
    integrand = h[1] ** 2 + 2.0 * v * h[1] * hx + hx**2 + pot * h[0] ** 2
    return 0.5 * integrate_grid(integrand, dx)


def quad_form_multi(params: MultikinkParams, t: float, h: np.ndarray,
                    grid: np.ndarray, rho: float | None = None) -> float:
    """Quadratic form around the multikink with cutoff-localized cross terms:
    1/2 int (h_dot^2 + h_x^2 + 2 sum_j chi_j v_j h_dot h_x + V h^2)."""
    dx = grid_spacing(grid)
    hx = central_diff(h[0], dx)
    if rho is None:
        rho = default_rho(params)
    cross = np.zeros_like(hx)
    for j in range(1, params.K + 1):
        cross += kink_cutoff(params, j, t, grid, rho) * params.velocities[j - 1]
    pot = linearization_potential(params, t, grid)
    integrand = h[1] ** 2 + hx**2 + 2.0 * cross * h[1] * hx + pot * h[0] ** 2
    return 0.5 * integrate_grid(integrand, dx)


def remove_projections(h: np.ndarray, duals: Sequence[np.ndarray], dx: float) -> np.ndarray:
    """Correct h by a combination of the duals so every pairing vanishes.

    Solves the Gram system <psi_i, psi_j> c_j = <psi_i, h> and subtracts
    sum_j c_j psi_j.
    """
    if not duals:
        return h
    gram = np.array([[inner_product(a, b, dx) for b in duals] for a in duals])
    rhs = np.array([inner_product(a, h, dx) for a in duals])
    coef = np.linalg.solve(gram, rhs)
    out = h.astype(float).copy()
    for c, psi in zip(coef, duals):
        out -= c * psi
    return out
