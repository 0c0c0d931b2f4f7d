"""Static kinks and antikinks: quadrature, profiles, energies, tails.

A kink between adjacent vacua solves the first-order Bogomolny equation
dH/dx = sqrt(2 W(H)) and is tabulated on a finite grid; outside the grid
it is continued by its single-exponential tail. Derivatives of a profile
are evaluated through the Bogomolny relation itself (d1 = +-sqrt(2W(H)),
d2 = W'(H), d3 = W''(H) d1), which keeps them exact functions of H.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ConfigError, FitError, IntegrationError
from .numerics import fit_log_linear
from .potential import PotentialModel, VacuumTable

_TAIL_SWITCH = 1e-10  # distance to the vacuum at which integration hands over to the tail


def center_value(table: VacuumTable, n: int) -> float:
    """Midpoint of two adjacent vacua; the profile passes through it at x=0."""
    lo = min(n, n + 1)
    return 0.5 * (table.vacuum(lo) + table.vacuum(lo + 1))


def position_from_value(model: PotentialModel, table: VacuumTable, n: int, psi: float,
                        epsabs: float = 1e-13) -> float:
    """Position x at which the kink from vacuum n to n+1 attains the value psi.

    This is the quadrature int_{mid}^{psi} dy / sqrt(2 W(y)) with the midpoint
    of the two vacua as base point; it diverges logarithmically at the vacua,
    so psi must lie strictly between them.
    """
    lo, hi = table.vacuum(n), table.vacuum(n + 1)
    if not lo < psi < hi:
        raise ConfigError(f"psi={psi} is not strictly between the vacua ({lo}, {hi})")
    base = center_value(table, n)

    def integrand(y):
        return 1.0 / np.sqrt(2.0 * model(y, 0))

    val, _ = quad(integrand, base, psi, epsabs=epsabs, epsrel=1e-12, limit=400)
    return float(val)


def bogomolny_bound(model: PotentialModel, phi_a: float, phi_b: float) -> float:
    """Energy lower bound between two field values: int_a^b sqrt(2 W(y)) dy.

    Antisymmetric in its endpoints' order in absolute value; returns the
    signed integral so bound(a, b) = -bound(b, a).
    """
    val, _ = quad(lambda y: np.sqrt(2.0 * model(y, 0)), phi_a, phi_b,
                  epsabs=1e-13, epsrel=1e-12, limit=400)
    return float(val)


def kink_energy(model: PotentialModel, table: VacuumTable, n: int, n_prime: int) -> float:
    """Rest energy of the kink/antikink between adjacent vacua n and n_prime."""
    if abs(n - n_prime) != 1:
        raise ConfigError("kink energy requires adjacent vacua")
    lo, hi = sorted((table.vacuum(n), table.vacuum(n_prime)))
    return bogomolny_bound(model, lo, hi)


@dataclass(frozen=True)
class TailFit:
    side: str                # "left" or "right"
    fitted_rate: float
    expected_rate: float
    fit_residual: float
    coefficient: float

    def __post_init__(self):
        if self.fitted_rate <= 0:
            raise FitError("fitted tail rate must be positive")


class KinkProfile:
    """Tabulated static kink with exponential-tail continuation.

    The grid is uniform on [-X, X]; values are strictly monotone between
    the two vacua. Evaluation uses a cubic spline on the grid and the
    fitted single-exponential tails outside it.
    """

    def __init__(self, model, table, n, n_prime, x, h):
        self.model = model
        self.table = table
        self.n = int(n)
        self.n_prime = int(n_prime)
        self.x = x
        self.h = h
        self.dx = float(x[1] - x[0])
        self.half_width = float(x[-1])
        self.orientation = 1.0 if n_prime == n + 1 else -1.0
        self.vac_left = table.vacuum(n)
        self.vac_right = table.vacuum(n_prime)
        self.mass_left = table.mass(n)
        self.mass_right = table.mass(n_prime)
        self.center = center_value(table, min(n, n_prime))
        # signed tail coefficients relative to the vacuum at each end
        self._c_left = h[0] - self.vac_left
        self._c_right = h[-1] - self.vac_right
        self._spline = CubicSpline(x, h)

    @property
    def is_kink(self) -> bool:
        return self.orientation > 0

    def __call__(self, x):
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=float)
        left = x < -self.half_width
        right = x > self.half_width
        core = ~(left | right)
        out[core] = self._spline(x[core])
        out[left] = self.vac_left + self._c_left * np.exp(
            self.mass_left * (x[left] + self.half_width))
        out[right] = self.vac_right + self._c_right * np.exp(
            -self.mass_right * (x[right] - self.half_width))
        return float(out[0]) if scalar else out

    def deriv(self, x, order: int = 1):
        """Spatial derivative of the profile via the Bogomolny relations."""
        hval = self(x)
        if order == 1:
            w = np.maximum(self.model(hval, 0), 0.0)
            return self.orientation * np.sqrt(2.0 * w)
        if order == 2:
            return self.model(hval, 1)
        if order == 3:
            w = np.maximum(self.model(hval, 0), 0.0)
            return self.model(hval, 2) * self.orientation * np.sqrt(2.0 * w)
        raise ConfigError(f"profile derivative order must be 1..3, got {order}")

    def reflected(self) -> "KinkProfile":
        """The antikink (or kink) obtained by exact reflection x -> -x."""
        return KinkProfile(self.model, self.table, self.n_prime, self.n,
                           self.x.copy(), self.h[::-1].copy())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "H", "dH"])
            d = self.deriv(self.x, 1)
            for xi, hi, di in zip(self.x, self.h, d):
                w.writerow([f"{xi:.17g}", f"{hi:.17g}", f"{di:.17g}"])


def _integrate_half(model, start, target_vac, mass, xs, sign):
    """Integrate dH/dx = sign*sqrt(2W(H)) from H(0)=start over xs >= 0.

    Hands over to the exponential tail once H is within _TAIL_SWITCH of the
    target vacuum (the equation degenerates there).
    """
    approach = 1.0 if target_vac > start else -1.0

    def rhs(_x, y):
        return [sign * np.sqrt(2.0 * max(float(model(y[0], 0)), 0.0))]

    def near_vacuum(_x, y):
        return abs(target_vac - y[0]) - _TAIL_SWITCH
    near_vacuum.terminal = True
    near_vacuum.direction = -1

    sol = solve_ivp(rhs, (0.0, xs[-1]), [start], t_eval=xs, method="RK45",
                    rtol=1e-12, atol=1e-14, events=near_vacuum, dense_output=False)
    if not sol.success and sol.status != 1:
        raise IntegrationError(f"Bogomolny integration failed: {sol.message}")
    h = np.empty_like(xs)
    got = sol.y[0].size
    h[:got] = sol.y[0]
    if got < xs.size:
        x_star = sol.t_events[0][0]
        h_star = sol.y_events[0][0][0]
        h[got:] = target_vac - (target_vac - h_star) * np.exp(-mass * (xs[got:] - x_star))
    overshoot = approach * (h - target_vac)
    if np.any(overshoot > 1e-9):
        raise IntegrationError("integration overshot the vacuum interval")
    return h


def kink_profile(model: PotentialModel, table: VacuumTable, n: int, n_prime: int,
                 half_width: float | None = None, dx: float = 0.01) -> KinkProfile:
    """Tabulate the kink (n -> n+1) or antikink (n+1 -> n) profile.

    Kinks are integrated from the midpoint value at x = 0 in both
    directions; antikinks are produced by exact reflection of the kink.
    """
    if abs(n - n_prime) != 1:
        raise ConfigError("kink profiles exist only between adjacent vacua")
    if dx <= 0:
        raise ConfigError("dx must be positive")
    if n_prime == n - 1:
        return kink_profile(model, table, n_prime, n, half_width, dx).reflected()

    m_min = min(table.mass(n), table.mass(n_prime))
    if half_width is None:
        half_width = 20.0 / m_min
    if half_width <= 0:
        raise ConfigError("half_width must be positive")
    n_half = int(np.ceil(half_width / dx))
    xs = dx * np.arange(n_half + 1)
    start = center_value(table, n)
    h_right = _integrate_half(model, start, table.vacuum(n_prime), table.mass(n_prime), xs, +1.0)
    h_left = _integrate_half(model, start, table.vacuum(n), table.mass(n), xs, -1.0)
    x = np.concatenate([-xs[::-1], xs[1:]])
    h = np.concatenate([h_left[::-1], h_right[1:]])
    # deep-tail samples may round onto the vacuum itself; only a genuine
    # excursion past the vacua is an integration failure
    lo, hi = table.vacuum(n), table.vacuum(n_prime)
    if h[0] < lo - 1e-9 or h[-1] > hi + 1e-9:
        raise IntegrationError("profile left the vacuum interval")
    return KinkProfile(model, table, n, n_prime, x, h)


def default_tail_window(profile: KinkProfile, side: str) -> tuple[float, float]:
    """Window [x_lo, x_hi] (in |x|) clear of the core but above tail underflow."""
    m = profile.mass_left if side == "left" else profile.mass_right
    x_lo = 6.0 / m
    x_hi = min(0.9 * profile.half_width, 24.0 / m)
    if x_hi <= x_lo + 4 * profile.dx:
        raise FitError("profile too narrow for a tail window")
    return (x_lo, x_hi)


def fit_tails(profile: KinkProfile, window: tuple[float, float] | None = None):
    """Least-squares exponential rates of both tails.

    `window` is a pair of positive offsets from the core; the left tail
    uses its mirror image. Returns (left_fit, right_fit).
    """
    fits = []
    for side in ("left", "right"):
        w = window if window is not None else default_tail_window(profile, side)
        if side == "right":
            lo, hi = w
            vac, expected = profile.vac_right, profile.mass_right
        else:
            lo, hi = -w[1], -w[0]
            vac, expected = profile.vac_left, profile.mass_left
        mask = (profile.x >= lo) & (profile.x <= hi)
        xs = profile.x[mask]
        resid = np.abs(profile.h[mask] - vac)
        if xs.size < 3:
            raise FitError(f"{side} tail window contains fewer than 3 samples")
        if np.any(resid < 5e-15):
            raise FitError(f"{side} tail underflows in the requested window")
        slope, intercept, _r2, rms = fit_log_linear(xs, resid)
        fits.append(TailFit(side=side, fitted_rate=abs(slope), expected_rate=expected,
                            fit_residual=rms, coefficient=float(np.exp(intercept))))
    return tuple(fits)


def stationary_residual(model: PotentialModel, field: np.ndarray, dx: float) -> float:
    """Sup norm of d2(field)/dx2 - W'(field) over interior grid nodes."""
    field = np.asarray(field, dtype=float)
    lap = (field[2:] - 2.0 * field[1:-1] + field[:-2]) / (dx * dx)
    return float(np.max(np.abs(lap - model(field[1:-1], 1))))


def potential_energy_of_profile(profile: KinkProfile) -> float:
    """Grid quadrature of 1/2 (dH/dx)^2 + W(H), tail contributions included.

    The derivative is taken from the tabulated values (spline), so this is
    an independent check against the Bogomolny bound.
    """
    from .numerics import integrate_grid
    dh = profile._spline.derivative()(profile.x)
    w = profile.model(profile.h, 0)
    core = integrate_grid(0.5 * dh**2 + w, profile.dx)
    # each tail: integral of m^2 c^2 e^{+-2m(x -+ X)} of both terms
    tail = 0.5 * profile.mass_left * profile._c_left**2 \
        + 0.5 * profile.mass_right * profile._c_right**2
    return float(core + tail)
