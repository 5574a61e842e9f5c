"""scikit-learn style wrappers so the model composes with sklearn tooling.

Constructor arguments are stored untouched (``get_params``/``set_params``/
``clone`` work as usual); everything learned or simulated lands in trailing
underscore attributes during ``fit``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .costs import CostTable, cost_curve, default_cost_table
from .dynamics import COMPARTMENTS, SarParameters, SarState, Trajectory, convergence_time, simulate
from .exceptions import ValidationError
from .network import EpidemicState, Network, classify_node, compute_depths, partition_diffusion_sets
from .stability import DEFAULT_TOL, analyze_stability


class DiffusionSetPartitioner(BaseEstimator):
    """Partition a rooted network into diffusion sets.

    After ``fit``: ``depths_`` (node -> hops), ``partition_``, ``sets_`` (list of
    sorted member lists), ``labels_`` (node -> 0-based set position) and
    ``n_sets_``.
    """

    def fit(self, X: Network, y=None):
        if not isinstance(X, Network):
            raise ValidationError("DiffusionSetPartitioner.fit expects a Network")
        self.depths_ = compute_depths(X)
        self.partition_ = partition_diffusion_sets(X, self.depths_)
        self.sets_ = self.partition_.as_lists()
        self.labels_ = dict(self.partition_.index)
        self.n_sets_ = len(self.sets_)
        return self

    def predict(self, nodes):
        check_is_fitted(self, "labels_")
        try:
            return np.array([self.labels_[n] for n in nodes], dtype=int)
        except KeyError as exc:
            raise ValidationError(f"unknown node {exc.args[0]!r}") from None

    def fit_predict(self, X: Network, y=None):
        """Set label of every node, nodes in lexicographic order."""
        return self.fit(X).predict(sorted(X.nodes))


class EpidemicStateClassifier(BaseEstimator):
    """Threshold classifier from interference weight to :class:`EpidemicState`."""

    def __init__(self, t1: float = 1.0, t2: float = 2.0):
        self.t1 = t1
        self.t2 = t2

    def fit(self, X=None, y=None):
        classify_node(0.0, self.t1, self.t2)
        self.thresholds_ = (float(self.t1), float(self.t2))
        return self

    def predict(self, X):
        check_is_fitted(self, "thresholds_")
        weights = np.asarray(X, dtype=float).ravel()
        return np.array([classify_node(w, *self.thresholds_) for w in weights], dtype=object)


class SARSimulator(BaseEstimator):
    """Explicit-Euler SAR simulator.

    ``fit(X)`` integrates from the initial compartments ``X`` (array of shape
    ``(3, m)`` holding S, A, R rows, or a :class:`SarState`) and stores
    ``trajectory_``, ``params_`` and ``convergence_times_``. ``predict(times)``
    returns the simulated ``(len(times), 3, m)`` compartments at the latest
    sample not after each requested time.

    ``population=None`` uses the initial total as the attack-rate denominator.
    """

    def __init__(
        self,
        lam=None,
        rho=None,
        b=None,
        c=None,
        beta=None,
        gamma=None,
        eta=None,
        population=None,
        step: float = 0.01,
        horizon: float = 500.0,
        epsilon: float = 0.5,
    ):
        self.lam = lam
        self.rho = rho
        self.b = b
        self.c = c
        self.beta = beta
        self.gamma = gamma
        self.eta = eta
        self.population = population
        self.step = step
        self.horizon = horizon
        self.epsilon = epsilon

    @classmethod
    def from_parameters(cls, params: SarParameters, **kwargs):
        return cls(
            lam=params.lam, rho=params.rho, b=params.b, c=params.c, beta=params.beta,
            gamma=params.gamma, eta=params.eta, population=params.population, **kwargs,
        )

    def _initial(self, X) -> SarState:
        if isinstance(X, SarState):
            return X
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != 3:
            raise ValidationError(f"initial compartments must have shape (3, m), got {arr.shape}")
        return SarState(arr[0], arr[1], arr[2])

    def fit(self, X, y=None):
        initial = self._initial(X)
        m = initial.m
        zeros = np.zeros((m, m))
        self.params_ = SarParameters(
            lam=zeros if self.lam is None else self.lam,
            rho=zeros if self.rho is None else self.rho,
            b=np.zeros(m) if self.b is None else self.b,
            c=np.zeros(m) if self.c is None else self.c,
            beta=np.zeros(m) if self.beta is None else self.beta,
            gamma=np.zeros(m) if self.gamma is None else self.gamma,
            eta=np.zeros(m) if self.eta is None else self.eta,
            population=initial.total if self.population is None else self.population,
        )
        self.trajectory_: Trajectory = simulate(self.params_, initial, self.step, self.horizon)
        self.convergence_times_ = {
            f"{comp}{i}": convergence_time(self.trajectory_, f"{comp}{i}", self.epsilon)
            for comp in COMPARTMENTS
            for i in range(1, m + 1)
        }
        self.n_sets_ = m
        return self

    def predict(self, X):
        check_is_fitted(self, "trajectory_")
        times = np.asarray(X, dtype=float).ravel()
        traj = self.trajectory_
        idx = np.floor((times - traj.times[0]) / traj.step + 1e-9).astype(int)
        if np.any(idx < 0) or np.any(idx >= len(traj)):
            raise ValidationError("requested times fall outside the simulated horizon")
        return traj.values[idx]


class StabilityAnalyzer(BaseEstimator):
    """Fit on :class:`SarParameters`; exposes ``report_``, ``r0_``, ``case_``, ``verdict_``."""

    def __init__(self, tol: float = DEFAULT_TOL, susceptible_mass=None):
        self.tol = tol
        self.susceptible_mass = susceptible_mass

    def fit(self, X: SarParameters, y=None):
        self.report_ = analyze_stability(X, self.susceptible_mass, self.tol)
        self.r0_ = self.report_.r0
        self.case_ = self.report_.case
        self.verdict_ = self.report_.verdict
        return self


class CostCurveTransformer(TransformerMixin, BaseEstimator):
    """Turn a :class:`Trajectory` into average-cost columns, one per network type."""

    def __init__(self, table: CostTable | None = None, state="Susceptible"):
        self.table = table
        self.state = state

    def fit(self, X: Trajectory, y=None):
        self.table_ = default_cost_table() if self.table is None else self.table
        self.state_ = EpidemicState.parse(self.state)
        if self.table_.m != X.m:
            raise ValidationError(f"cost table covers {self.table_.m} sets, trajectory has {X.m}")
        self.networks_ = list(self.table_.networks)
        return self

    def transform(self, X: Trajectory):
        check_is_fitted(self, "table_")
        curve = cost_curve(X, self.table_, self.state_)
        return np.column_stack([curve.value[n] for n in self.networks_])
