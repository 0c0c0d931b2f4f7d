"""External potentials, their vacua and masses, and chains of vacua.

A potential must be nonnegative with isolated non-degenerate zeros; each
zero ("vacuum") carries a mass m = sqrt(W''(vacuum)) that controls the
exponential tails of the kinks connecting adjacent vacua.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DegenerateVacuumError, InvalidChainError

_MAX_ORDER = 3


@dataclass(frozen=True)
class PotentialModel:
    """A potential W with exact derivatives up to third order.

    Built-in models carry closed-form derivatives; custom models are
    polynomials or trigonometric polynomials so every derivative order is
    exact as well. `search_interval` is the default vacuum-search window.
    """

    kind: str
    derivs: tuple[Callable, ...] = field(repr=False)
    search_interval: tuple[float, float] = (-2.0, 2.0)

    def __call__(self, phi, order: int = 0):
        if not isinstance(order, (int, np.integer)) or not 0 <= order <= _MAX_ORDER:
            raise ConfigError(f"derivative order must be in 0..{_MAX_ORDER}, got {order!r}")
        return self.derivs[order](phi)

    @staticmethod
    def phi4() -> "PotentialModel":
        """W = (1 - phi^2)^2, vacua at -1 and 1."""
        return PotentialModel(
            kind="phi4",
            derivs=(
                lambda p: (1.0 - np.asarray(p) ** 2) ** 2,
                lambda p: -4.0 * np.asarray(p) * (1.0 - np.asarray(p) ** 2),
                lambda p: 12.0 * np.asarray(p) ** 2 - 4.0,
                lambda p: 24.0 * np.asarray(p),
            ),
            search_interval=(-2.0, 2.0),
        )

    @staticmethod
    def phi6() -> "PotentialModel":
        """W = phi^2 (1 - phi^2)^2, vacua at -1, 0, 1."""
        return PotentialModel(
            kind="phi6",
            derivs=(
                lambda p: np.asarray(p) ** 2 * (1.0 - np.asarray(p) ** 2) ** 2,
                lambda p: 2.0 * np.asarray(p) - 8.0 * np.asarray(p) ** 3 + 6.0 * np.asarray(p) ** 5,
                lambda p: 2.0 - 24.0 * np.asarray(p) ** 2 + 30.0 * np.asarray(p) ** 4,
                lambda p: -48.0 * np.asarray(p) + 120.0 * np.asarray(p) ** 3,
            ),
            search_interval=(-2.0, 2.0),
        )

    @staticmethod
    def sine_gordon() -> "PotentialModel":
        """W = 1 - cos(phi), vacua at 2 pi n."""
        return PotentialModel(
            kind="sine_gordon",
            derivs=(
                lambda p: 1.0 - np.cos(p),
                lambda p: np.sin(p),
                lambda p: np.cos(p),
                lambda p: -np.sin(p),
            ),
            search_interval=(-1.0, 14.0),
        )

    @staticmethod
    def custom_poly(coeffs: Sequence[float],
                    search_interval: tuple[float, float] = (-2.0, 2.0)) -> "PotentialModel":
        """W = sum_k coeffs[k] * phi^k with exact polynomial derivatives."""
        base = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        ds = [base]
        for _ in range(_MAX_ORDER):
            ds.append(ds[-1].deriv())
        return PotentialModel(kind="custom", derivs=tuple(ds),
                              search_interval=tuple(search_interval))

    @staticmethod
    def custom_trig(cos_coeffs: Sequence[float], sin_coeffs: Sequence[float] = (),
                    search_interval: tuple[float, float] = (-1.0, 7.0)) -> "PotentialModel":
        """W = c0 + sum_{k>=1} c_k cos(k phi) + sum_{k>=1} s_k sin(k phi).

        cos_coeffs[0] is the constant term; sin_coeffs[0] (if given) pairs
        with sin(1*phi).
        """
        c = np.asarray(cos_coeffs, dtype=float)
        s = np.asarray(sin_coeffs, dtype=float)
        kc = np.arange(len(c))
        ks = np.arange(1, len(s) + 1)

        def make(order):
            def f(p):
                p = np.asarray(p, dtype=float)
                # d^n cos(k p)/dp^n = k^n cos(k p + n pi/2), same shift for sin
                shift = order * np.pi / 2.0
                total = np.cos(np.multiply.outer(p, kc) + shift) @ (c * kc**order)
                if len(s):
                    total = total + np.sin(np.multiply.outer(p, ks) + shift) @ (s * ks.astype(float) ** order)
                return total if total.shape else float(total)
            return f

        return PotentialModel(kind="custom", derivs=tuple(make(n) for n in range(_MAX_ORDER + 1)),
                              search_interval=tuple(search_interval))

    @staticmethod
    def builtin(kind: str) -> "PotentialModel":
        try:
            return {"phi4": PotentialModel.phi4,
                    "phi6": PotentialModel.phi6,
                    "sine_gordon": PotentialModel.sine_gordon}[kind]()
        except KeyError:
            raise ConfigError(f"unknown potential kind {kind!r}") from None


def eval_potential(model: PotentialModel, phi, order: int = 0):
    """d^order W / d phi^order at phi (order in 0..3)."""
    return model(phi, order)


@dataclass(frozen=True)
class VacuumTable:
    """Vacua of a potential in increasing order with their masses."""

    model: PotentialModel
    vacua: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        if not all(a < b for a, b in zip(self.vacua, self.vacua[1:])):
            raise ConfigError("vacua must be strictly increasing")
        if any(m <= 0 for m in self.masses):
            raise ConfigError("all masses must be positive")

    def __len__(self):
        return len(self.vacua)

    def vacuum(self, n: int) -> float:
        return self.vacua[n]

    def mass(self, n: int) -> float:
        return self.masses[n]


@dataclass(frozen=True)
class ChainOfVacua:
    """Sequence of vacuum labels with |n_{k-1} - n_k| = 1 for every step."""

    labels: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.labels) - 1

    def pairs(self):
        return list(zip(self.labels, self.labels[1:]))


def find_vacua(model: PotentialModel, interval=None, tol: float = 1e-12,
               zero_tol: float = 1e-9, scan_points: int = 20001) -> VacuumTable:
    """Locate all vacua of W inside `interval` and attach masses.

    Minima of W are bracketed by sign changes of W' on a fine scan grid and
    polished with Brent's method; a minimum counts as a vacuum when
    W <= zero_tol there. W'' <= tol at a vacuum raises DegenerateVacuumError.
    """
    if interval is None:
        interval = model.search_interval
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ConfigError("vacuum search interval must be finite and increasing")
    if tol <= 0:
        raise ConfigError("tol must be positive")
    xs = np.linspace(a, b, scan_points)
    w1 = np.asarray(model(xs, 1), dtype=float)
    vacua = []
    for i in np.nonzero((w1[:-1] < 0.0) & (w1[1:] >= 0.0))[0]:
        root = brentq(lambda p: float(model(p, 1)), xs[i], xs[i + 1],
                      xtol=tol, rtol=8.881784197001252e-16)
        if float(model(root, 0)) > zero_tol:
            continue  # positive local minimum, not a vacuum
        curv = float(model(root, 2))
        if curv <= tol:
            raise DegenerateVacuumError(
                f"vacuum near {root:.6g} has W'' = {curv:.3g} <= tol")
        vacua.append((root, np.sqrt(curv)))
    if not vacua:
        raise ConfigError(f"no vacua of {model.kind} found in [{a}, {b}]")
    vs, ms = zip(*vacua)
    return VacuumTable(model=model, vacua=tuple(vs), masses=tuple(ms))


def validate_chain(table: VacuumTable, labels: Sequence[int]) -> ChainOfVacua:
    """Check labels index the table and consecutive labels are adjacent."""
    labels = tuple(int(n) for n in labels)
    if len(labels) < 1:
        raise InvalidChainError("a chain needs at least one vacuum label")
    for n in labels:
        if not 0 <= n < len(table):
            raise InvalidChainError(f"label {n} outside vacuum table of size {len(table)}")
    for n, n2 in zip(labels, labels[1:]):
        if abs(n - n2) != 1:
            raise InvalidChainError(f"labels ({n}, {n2}) are not adjacent vacua")
    return ChainOfVacua(labels=labels)
