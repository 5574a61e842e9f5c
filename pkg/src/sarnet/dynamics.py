"""Compartmental Susceptible-Attacked-Removed dynamics across diffusion sets.

Set indices in the public API are 1-based labels (set 1 .. set m); arrays are
0-based internally.
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .exceptions import NegativeCompartmentWarning, ValidationError
from .validation import check_positive, check_rate_matrix, check_set_index, check_vector

COMPARTMENTS = ("S", "A", "R")
NEGATIVE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class SarParameters:
    """Rate constants of the SAR model for ``m`` diffusion sets.

    Parameters
    ----------
    lam : (m, m) array
        Susceptible migration rates, ``lam[i, j]`` moves nodes from set i to set j.
    rho : (m, m) array
        Attacked migration rates, same orientation as ``lam``.
    b, c : (m,) arrays
        Susceptible -> removed and attacked -> removed rates.
    beta, gamma, eta : (m,) arrays
        Susceptibility, infectiousness and network impact; their product scales
        the attack rate of each set.
    population : float
        Denominator ``N`` of the attack rate.
    lambda_bar, rho_bar, eta_bar : float, optional
        Global caps on every migration rate and impact value.
    """

    lam: np.ndarray
    rho: np.ndarray
    b: np.ndarray
    c: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    eta: np.ndarray
    population: float
    lambda_bar: float | None = None
    rho_bar: float | None = None
    eta_bar: float | None = None

    def __post_init__(self):
        b = check_vector(self.b, "b")
        m = b.shape[0]
        if m == 0:
            raise ValidationError("at least one diffusion set is required")
        set_ = object.__setattr__
        set_(self, "b", b)
        for name in ("c", "beta", "gamma", "eta"):
            set_(self, name, check_vector(getattr(self, name), name, m))
        set_(self, "lam", check_rate_matrix(self.lam, "lambda", m))
        set_(self, "rho", check_rate_matrix(self.rho, "rho", m))
        set_(self, "population", check_positive(self.population, "population"))
        for cap, values, label in (
            ("lambda_bar", self.lam, "lambda"),
            ("rho_bar", self.rho, "rho"),
            ("eta_bar", self.eta, "eta"),
        ):
            bound = getattr(self, cap)
            if bound is None:
                continue
            bound = float(bound)
            if not bound >= 0:
                raise ValidationError(f"{cap} must be non-negative, got {bound}")
            set_(self, cap, bound)
            over = np.argwhere(np.atleast_2d(values) > bound)
            if over.size:
                if values.ndim == 1:
                    i = over[0][1]
                    where, value = f"{label}_{i + 1}", values[i]
                else:
                    i, j = over[0]
                    where, value = f"{label}_{i + 1}{j + 1}", values[i, j]
                raise ValidationError(f"{where} = {value} exceeds cap {cap} = {bound}")

    @property
    def m(self) -> int:
        return self.b.shape[0]

    def replace(self, **changes) -> "SarParameters":
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, SarParameters):
            return NotImplemented
        for f in fields(self):
            x, y = getattr(self, f.name), getattr(other, f.name)
            if isinstance(x, np.ndarray):
                if not np.array_equal(x, y):
                    return False
            elif x != y:
                return False
        return True

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SarState:
    """Compartment sizes of every diffusion set at one instant."""

    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        for name in ("s", "a", "r"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ValidationError(f"state vector {name} must be a finite 1-d array")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.s.shape == self.a.shape == self.r.shape:
            raise ValidationError("state vectors s, a, r differ in length")
        object.__setattr__(self, "time", float(self.time))

    @property
    def m(self) -> int:
        return self.s.shape[0]

    @property
    def total(self) -> float:
        return float(self.s.sum() + self.a.sum() + self.r.sum())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.s, self.a, self.r])

    def __eq__(self, other):
        if not isinstance(other, SarState):
            return NotImplemented
        return (
            self.time == other.time
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.r, other.r)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time series of SAR states on a uniform grid.

    ``values`` has shape ``(n_times, 3, m)`` with compartments ordered S, A, R.
    """

    times: np.ndarray
    values: np.ndarray
    params: SarParameters
    step: float = field(default=0.0)

    def __repr__(self):
        return f"Trajectory(m={self.m}, samples={len(self.times)}, step={self.step:g})"

    @property
    def s(self) -> np.ndarray:
        return self.values[:, 0, :]

    @property
    def a(self) -> np.ndarray:
        return self.values[:, 1, :]

    @property
    def r(self) -> np.ndarray:
        return self.values[:, 2, :]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    @property
    def totals(self) -> np.ndarray:
        return self.values.sum(axis=(1, 2))

    def __len__(self):
        return self.times.shape[0]

    def state(self, k: int) -> SarState:
        s, a, r = self.values[k]
        return SarState(s, a, r, self.times[k])

    @property
    def states(self) -> list[SarState]:
        return [self.state(k) for k in range(len(self))]

    def series(self, selector) -> np.ndarray:
        comp, i = parse_selector(selector, self.m)
        return self.values[:, comp, i]


def parse_selector(selector, m: int) -> tuple[int, int]:
    """Resolve ``"S2"``, ``"a4"`` or ``("R", 1)`` to (compartment row, 0-based set)."""
    if isinstance(selector, str):
        match = re.fullmatch(r"\s*([SARsar])_?(\d+)\s*", selector)
        if not match:
            raise ValidationError(f"invalid compartment selector {selector!r}")
        comp, idx = match.group(1), int(match.group(2))
    else:
        try:
            comp, idx = selector
        except (TypeError, ValueError):
            raise ValidationError(f"invalid compartment selector {selector!r}") from None
    comp = str(comp).upper()
    if comp not in COMPARTMENTS:
        raise ValidationError(f"invalid compartment {comp!r}")
    return COMPARTMENTS.index(comp), check_set_index(idx, m)


def _check_dims(params: SarParameters, state: SarState):
    if state.m != params.m:
        raise ValidationError(f"state has {state.m} sets but parameters have {params.m}")


def _attack_rates(params, a):
    return params.beta * params.gamma * params.eta * a / params.population


def attack_rate(params: SarParameters, state: SarState, i: int) -> float:
    """Attack rate of set ``i`` (1-based): beta_i * gamma_i * eta_i * A_i / N."""
    _check_dims(params, state)
    k = check_set_index(i, params.m)
    return float(params.beta[k] * params.gamma[k] * params.eta[k] * state.a[k] / params.population)


def _rhs(params, s, a):
    attacks = _attack_rates(params, a) * s
    s_out = params.lam.sum(axis=1)
    a_out = params.rho.sum(axis=1)
    ds = -attacks + params.lam.T @ s - s_out * s - params.b * s
    da = attacks + params.rho.T @ a - a_out * a - params.c * a
    dr = params.b * s + params.c * a
    return ds, da, dr


def derivatives(params: SarParameters, state: SarState):
    """Right-hand side ``(S', A', R')`` of the combined model at ``state``."""
    _check_dims(params, state)
    return _rhs(params, state.s, state.a)


def euler_step(params: SarParameters, state: SarState, h: float) -> SarState:
    h = check_positive(h, "step h")
    ds, da, dr = derivatives(params, state)
    return SarState(state.s + h * ds, state.a + h * da, state.r + h * dr, state.time + h)


def n_steps(h: float, horizon: float) -> int:
    # guard against 500/0.01 evaluating to 49999.999...
    return int(math.floor(horizon / h + 1e-9))


def simulate(params: SarParameters, initial: SarState, h: float, horizon: float) -> Trajectory:
    """Integrate with explicit Euler for ``floor(horizon / h)`` steps.

    The returned trajectory holds the initial state followed by one sample per
    step. A :class:`NegativeCompartmentWarning` is issued when any compartment
    drops below ``-1e-6``, which means ``h`` is too large for these rates.
    """
    _check_dims(params, initial)
    h = check_positive(h, "step h")
    horizon = check_positive(horizon, "horizon")
    if horizon < h:
        raise ValidationError(f"horizon {horizon} is shorter than the step {h}")
    steps = n_steps(h, horizon)
    values = np.empty((steps + 1, 3, params.m))
    s, a, r = initial.s.copy(), initial.a.copy(), initial.r.copy()
    values[0] = s, a, r
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, steps + 1):
            ds, da, dr = _rhs(params, s, a)
            s = s + h * ds
            a = a + h * da
            r = r + h * dr
            values[k] = s, a, r
    times = initial.time + h * np.arange(steps + 1)
    finite = np.isfinite(values)
    if not finite.all():
        k = int(np.argmin(finite.all(axis=(1, 2))))
        warnings.warn(
            f"compartments overflowed at t={times[k]:.6g}; reduce the step h={h}",
            NegativeCompartmentWarning,
            stacklevel=2,
        )
    elif (lowest := values.min()) < -NEGATIVE_TOLERANCE:
        k, comp, i = np.unravel_index(values.argmin(), values.shape)
        warnings.warn(
            f"{COMPARTMENTS[comp]}{i + 1} reached {lowest:.3g} at t={times[k]:.6g}; "
            f"reduce the step h={h}",
            NegativeCompartmentWarning,
            stacklevel=2,
        )
    values.setflags(write=False)
    times.setflags(write=False)
    return Trajectory(times, values, params, h)


def convergence_time(traj: Trajectory, compartment, epsilon: float = 0.5) -> float | None:
    """First sampled time at which ``compartment`` is at or below ``epsilon``."""
    epsilon = check_positive(epsilon, "epsilon")
    series = traj.series(compartment)
    hits = np.flatnonzero(series <= epsilon)
    if hits.size == 0:
        return None
    return float(traj.times[hits[0]])


def max_stable_step(params: SarParameters, state: SarState, safety: float = 0.1) -> float:
    """Step bound ``safety / (largest per-compartment outflow rate)``.

    The attack-rate term is bounded with the total population, since no set can
    hold more attacked nodes than that.
    """
    _check_dims(params, state)
    total = max(state.total, params.population)
    s_out = params.lam.sum(axis=1) + params.b + params.beta * params.gamma * params.eta * total / params.population
    a_out = params.rho.sum(axis=1) + params.c
    peak = float(max(s_out.max(), a_out.max()))
    return math.inf if peak == 0 else safety / peak
