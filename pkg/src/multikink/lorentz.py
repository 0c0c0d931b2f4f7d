"""Lorentz boosts of multikink parameters and of space-time field data,
and the covariance check construct-then-boost vs boost-then-construct."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import FieldState, MultikinkParams, multikink
from .construct import SolverConfig, fixed_point, suggest_domain
from .errors import ConfigError, CoverageError
from .evolve import EvolveConfig, SpaceTimeSlab, evolve_nonlinear


@dataclass(frozen=True)
class BoostSpec:
    """Boost velocity v with space-time translation (t0, x0).

    Coordinates map as (t, x) = (t0 + gamma (t' + v x'), x0 + gamma (x' + v t')).
    """

    v: float
    t0: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        if not -1.0 < self.v < 1.0:
            raise ConfigError("boost velocity must lie in (-1, 1)")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)

    def unprimed(self, t_prime, x_prime):
        """(t, x) of an event given its primed coordinates."""
        g = self.gamma
        return (self.t0 + g * (t_prime + self.v * x_prime),
                self.x0 + g * (x_prime + self.v * t_prime))

    def primed(self, t, x):
        """(t', x') of an event given its unprimed coordinates."""
        g = self.gamma
        return (g * (t - self.t0 - self.v * (x - self.x0)),
                g * (x - self.x0 - self.v * (t - self.t0)))

    @property
    def inverse(self) -> "BoostSpec":
        """The boost mapping primed coordinates back to unprimed ones."""
        g = self.gamma
        return BoostSpec(v=-self.v, t0=-g * (self.t0 - self.v * self.x0),
                         x0=-g * (self.x0 - self.v * self.t0))


def boost_params(params: MultikinkParams, boost: BoostSpec) -> MultikinkParams:
    """Parameters of the boosted multikink: relativistic velocity addition
    for the velocities, matched recentering for the shifts."""
    v, t0, x0 = boost.v, boost.t0, boost.x0
    new_v = []
    new_a = []
    for vj, aj, gj in zip(params.velocities, params.shifts, params.gammas):
        vjp = (vj - v) / (1.0 - vj * v)
        gjp = 1.0 / math.sqrt(1.0 - vjp * vjp)
        new_v.append(vjp)
        new_a.append(gj * (aj + vj * t0 - x0) / gjp)
    return params.with_parameters(new_v, new_a)


def boost_field(slab: SpaceTimeSlab, boost: BoostSpec, t_prime: float,
                grid_prime: np.ndarray) -> FieldState:
    """Field snapshot in the primed frame from stored unprimed data.

    Values come from bicubic space-time interpolation of the slab; the
    primed time derivative uses the chain rule d_t' = gamma (d_t + v d_x).
    Raises CoverageError when a pulled-back event leaves the slab.
    """
    grid_prime = np.asarray(grid_prime, dtype=float)
    t, x = boost.unprimed(t_prime, grid_prime)
    t = np.broadcast_to(np.asarray(t, dtype=float), grid_prime.shape)
    if (t.min() < slab.times[0] - 1e-9 or t.max() > slab.times[-1] + 1e-9
            or x.min() < slab.grid[0] - 1e-9 or x.max() > slab.grid[-1] + 1e-9):
        raise CoverageError(
            f"boosted window needs t in [{t.min():.3f}, {t.max():.3f}], "
            f"x in [{x.min():.3f}, {x.max():.3f}]; slab covers "
            f"t in [{slab.times[0]:.3f}, {slab.times[-1]:.3f}], "
            f"x in [{slab.grid[0]:.3f}, {slab.grid[-1]:.3f}]")
    sval = slab.value_spline()
    phi = sval.ev(t, x)
    dphi_dt = slab.tderiv_spline().ev(t, x)
    dphi_dx = sval.ev(t, x, dy=1)
    g = boost.gamma
    phi_dot = g * (dphi_dt + boost.v * dphi_dx)
    return FieldState(t=float(t_prime), grid=grid_prime, phi=phi, phi_dot=phi_dot)


def ansatz_plus_error_slab(params: MultikinkParams, psi: SpaceTimeSlab) -> SpaceTimeSlab:
    """Full-field slab H + Psi from an error slab."""
    phis = np.empty_like(psi.phis)
    dots = np.empty_like(psi.phi_dots)
    for i, t in enumerate(psi.times):
        state = multikink(params, t, psi.grid)
        phis[i] = state.phi + psi.phis[i]
        dots[i] = state.phi_dot + psi.phi_dots[i]
    return SpaceTimeSlab(psi.times, psi.grid, phis, dots)


def extend_backward(slab: SpaceTimeSlab, model, t_min: float,
                    snapshot_dt: float = 0.25, cfl: float = 0.9) -> SpaceTimeSlab:
    """Prepend snapshots down to t_min by evolving the earliest stored state
    backward in time (the equation is globally well posed, and leapfrog is
    time reversible)."""
    if t_min >= slab.times[0]:
        return slab
    state = slab.state(0)
    span = slab.times[0] - t_min
    every = max(1, math.ceil(snapshot_dt / (cfl * slab.dx)))
    n_snap = max(2, math.ceil(span / snapshot_dt))
    dt = span / (n_snap * every)
    cfg = EvolveConfig(dt=-dt, t_end=t_min, snapshot_every=every, cfl_limit=cfl)
    tail = evolve_nonlinear(state, model, cfg)
    return tail.merged(slab)


def verify_covariance(params: MultikinkParams, boost: BoostSpec,
                      config: SolverConfig, window_t: float = 5.0,
                      window_x: tuple[float, float] | None = None,
                      t_samples: int = 11, tol: float = 1e-8,
                      construct_kwargs: dict | None = None) -> dict:
    """Compare boost(H + Psi) against H' + Psi' on a common primed window.

    Builds the unprimed solution, boosts the parameters, builds the primed
    solution independently, and reports the sup discrepancy of the two
    fields over the window together with its location.
    """
    construct_kwargs = dict(construct_kwargs or {})
    psi, rep = fixed_point(params, config, tol=tol, **construct_kwargs)
    field = ansatz_plus_error_slab(params, psi)

    params_p = boost_params(params, boost)
    lo, hi = suggest_domain(params_p, rep.t_final)
    config_p = SolverConfig(x_min=lo, x_max=hi, dx=config.dx, cfl=config.cfl,
                            snapshot_dt=config.snapshot_dt)
    psi_p, rep_p = fixed_point(params_p, config_p, tol=tol)

    if window_x is None:
        pad = 0.25 * (config_p.x_max - config_p.x_min)
        window_x = (config_p.x_min + pad, config_p.x_max - pad)
    t_lo = max(rep_p.T, *(boost.primed(rep.T, x)[0] for x in window_x))
    t_hi = min(rep_p.t_final - 1.0,
               *(boost.primed(rep.t_final, x)[0] for x in window_x))
    if t_hi < t_lo + window_t:
        raise CoverageError("no common primed window; enlarge the constructions")
    t_hi = t_lo + window_t

    grid_p = np.arange(window_x[0], window_x[1] + 1e-9, config.dx)
    needed_t = [boost.unprimed(tp, xp)[0]
                for tp in (t_lo, t_hi) for xp in (grid_p[0], grid_p[-1])]
    field = extend_backward(field, params.model, min(needed_t) - 0.5,
                            snapshot_dt=config.snapshot_dt, cfl=config.cfl)

    spline_p = None
    worst = {"discrepancy": -1.0}
    for tp in np.linspace(t_lo, t_hi, t_samples):
        boosted = boost_field(field, boost, tp, grid_p)
        if spline_p is None:
            spline_p = psi_p.value_spline()
        direct = multikink(params_p, tp, grid_p).phi + spline_p.ev(
            np.full_like(grid_p, tp), grid_p)
        diff = np.abs(boosted.phi - direct)
        i = int(np.argmax(diff))
        if diff[i] > worst["discrepancy"]:
            worst = {"discrepancy": float(diff[i]), "t_prime": float(tp),
                     "x_prime": float(grid_p[i])}
    return {
        "discrepancy": worst["discrepancy"],
        "max_location": {"t_prime": worst.get("t_prime"), "x_prime": worst.get("x_prime")},
        "window": {"t_lo": float(t_lo), "t_hi": float(t_hi),
                   "x_lo": float(grid_p[0]), "x_hi": float(grid_p[-1])},
        "tolerances": {"fixed_point_tol": tol, "dx": config.dx,
                       "snapshot_dt": config.snapshot_dt},
        "unprimed": rep.to_dict(),
        "primed": rep_p.to_dict(),
        "boost": {"v": boost.v, "t0": boost.t0, "x0": boost.x0},
    }
