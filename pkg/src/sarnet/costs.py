"""Per-node unit costs and average cost-of-infection curves.

Cost documents are YAML mapping network -> set label -> state -> cost::

    currency: ZAR
    networks:
      Facebook:
        1: {Susceptible: 5, Attacked: 55, Removed: 55}

Every (network, set, state) triple for sets ``1..m`` must be present.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .dynamics import Trajectory
from .exceptions import ParseError, ValidationError
from .network import EpidemicState

HEADER = "# Unit cost (Rands) of one node per network type, diffusion set and state.\n"


@dataclass(frozen=True, eq=False)
class CostTable:
    """``cost[n, i, k]`` is the unit cost of network ``networks[n]``, set ``i + 1``, state ``k``."""

    networks: tuple[str, ...]
    cost: np.ndarray
    currency: str = "ZAR"

    def __post_init__(self):
        cost = np.array(self.cost, dtype=float)
        if cost.ndim != 3 or cost.shape[0] != len(self.networks) or cost.shape[2] != len(EpidemicState):
            raise ValidationError(f"cost array has shape {cost.shape}")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValidationError("costs must be finite and non-negative")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "networks", tuple(self.networks))

    @property
    def m(self) -> int:
        return self.cost.shape[1]

    def lookup(self, network: str, set_index: int, state) -> float:
        try:
            n = self.networks.index(network)
        except ValueError:
            raise KeyError(network) from None
        if not 1 <= set_index <= self.m:
            raise KeyError(set_index)
        return float(self.cost[n, set_index - 1, EpidemicState.parse(state)])

    def __eq__(self, other):
        if not isinstance(other, CostTable):
            return NotImplemented
        return (self.networks, self.currency) == (other.networks, other.currency) and np.array_equal(
            self.cost, other.cost
        )

    __hash__ = None


@dataclass(frozen=True)
class CostCurve:
    times: np.ndarray
    value: dict
    state: EpidemicState


def load_cost_table(text: str) -> CostTable:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(exc), mark.line + 1 if mark else None) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("networks"), dict) or not doc["networks"]:
        raise ValidationError("cost table needs a non-empty 'networks' mapping")
    networks = doc["networks"]
    labels = set()
    for name, per_set in networks.items():
        if not isinstance(per_set, dict):
            raise ValidationError(f"network {name!r} must map set labels to states")
        labels |= set(per_set)
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in labels):
        raise ValidationError("set labels must be integers 1..m")
    m = max(labels)
    cost = np.empty((len(networks), m, len(EpidemicState)))
    for n, (name, per_set) in enumerate(networks.items()):
        for i in range(1, m + 1):
            row = per_set.get(i)
            if not isinstance(row, dict):
                raise ValidationError(f"missing costs for ({name}, set {i})")
            for state in EpidemicState:
                if state.label not in row:
                    raise ValidationError(f"missing cost for ({name}, set {i}, {state.label})")
                value = row[state.label]
                if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                    raise ValidationError(f"cost for ({name}, set {i}, {state.label}) must be non-negative")
                cost[n, i - 1, state] = value
            extra = set(row) - {s.label for s in EpidemicState}
            if extra:
                raise ValidationError(f"unknown states for ({name}, set {i}): {sorted(extra)}")
    return CostTable(tuple(str(k) for k in networks), cost, str(doc.get("currency", "ZAR")))


def read_cost_table(path) -> CostTable:
    return load_cost_table(Path(path).read_text(encoding="utf-8"))


def default_cost_table() -> CostTable:
    return load_cost_table(default_cost_text())


def default_cost_text() -> str:
    return resources.files("sarnet").joinpath("data/default_costs.yaml").read_text(encoding="utf-8")


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def dump_cost_table(table: CostTable) -> str:
    lines = [HEADER.rstrip("\n"), f"currency: {table.currency}", "networks:"]
    for n, name in enumerate(table.networks):
        lines.append(f"  {name}:")
        for i in range(table.m):
            cells = ", ".join(f"{s.label}: {_num(table.cost[n, i, s])}" for s in EpidemicState)
            lines.append(f"    {i + 1}: {{{cells}}}")
    return "\n".join(lines) + "\n"


def cost_curve(traj: Trajectory, table: CostTable, state) -> CostCurve:
    """Population-normalised cost of the nodes in ``state`` over time.

    For each network the value at time t is ``sum_i cost_i * X_i(t) / N`` where
    ``X_i`` is the chosen compartment of set i and ``N`` the (conserved) total
    of the initial state.
    """
    state = EpidemicState.parse(state)
    if table.m != traj.m:
        raise ValidationError(f"cost table covers {table.m} sets, trajectory has {traj.m}")
    total = float(traj.values[0].sum())
    compartment = traj.values[:, int(state), :]
    if total == 0:
        weighted = np.zeros((len(traj), len(table.networks)))
    else:
        weighted = compartment @ table.cost[:, :, state].T / total
    return CostCurve(traj.times, {name: weighted[:, n] for n, name in enumerate(table.networks)}, state)
