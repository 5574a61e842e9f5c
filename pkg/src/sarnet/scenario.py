"""Scenario documents and parameter transforms.

A scenario is a YAML document::

    model:    {m: 4, population: 193, h: 0.01, horizon: 500, epsilon: 0.5}
    vectors:  {s0: [...], a0: [...], r0: [...], b: [...], c: [...],
               beta: [...], gamma: [...], eta: [...]}
    matrices: {lambda: [[...], ...], rho: [[...], ...]}
    caps:     {lambda_bar: 0.1, rho_bar: 0.1, eta_bar: 1.0}    # optional
    transforms:                                                # optional
      - {type: economic, set: 2}
    variants:                                                  # optional
      eta2x100: [{type: impact, set: 2, factor: 100}]
    cost_table: default                                        # or a path

``transforms`` are applied in order to the baseline. Each entry of ``variants``
is a further list of transforms applied on top of the baseline, run separately
and written to suffixed output files. Set indices are 1-based.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .dynamics import SarParameters, SarState
from .exceptions import ParseError, ValidationError
from .validation import check_positive, check_set_index, check_vector

DEFAULTS = {"h": 0.01, "horizon": 500.0, "epsilon": 0.5}
VECTOR_KEYS = ("s0", "a0", "r0", "b", "c", "beta", "gamma", "eta")
CAP_KEYS = ("lambda_bar", "rho_bar", "eta_bar")
TOP_KEYS = {"model", "vectors", "matrices", "caps", "transforms", "variants", "cost_table"}


@dataclass(frozen=True)
class EconomicEfficiency:
    """Halve ``b`` and double ``c`` of one set."""

    set_index: int

    def apply(self, params):
        i = check_set_index(self.set_index, params.m)
        b, c = params.b.copy(), params.c.copy()
        b[i] /= 2
        c[i] *= 2
        return params.replace(b=b, c=c)


@dataclass(frozen=True)
class EngineeringEfficiency:
    """Double ``b`` and halve ``c`` of one set."""

    set_index: int

    def apply(self, params):
        i = check_set_index(self.set_index, params.m)
        b, c = params.b.copy(), params.c.copy()
        b[i] *= 2
        c[i] /= 2
        return params.replace(b=b, c=c)


@dataclass(frozen=True)
class ImpactFactor:
    set_index: int
    factor: float

    def apply(self, params):
        i = check_set_index(self.set_index, params.m)
        factor = check_positive(self.factor, "impact factor")
        eta = params.eta.copy()
        eta[i] *= factor
        return params.replace(eta=eta)


_PATH = re.compile(r"^(lambda|rho|b|c|beta|gamma|eta|population)(?:\[(\d+)\](?:\[(\d+)\])?)?$")
_FIELD = {"lambda": "lam"}


@dataclass(frozen=True)
class RateOverride:
    """Set one entry, e.g. ``path="lambda[1][2]"``, ``"b[3]"`` or ``"population"``."""

    path: str
    value: float

    def apply(self, params):
        match = _PATH.match(self.path.replace(" ", "").replace(",", "]["))
        if not match:
            raise ValidationError(f"invalid override path {self.path!r}")
        name, i, j = match.groups()
        try:
            value = float(self.value)
        except (TypeError, ValueError):
            raise ValidationError(f"override value for {self.path} is not a number") from None
        if name == "population":
            if i is not None:
                raise ValidationError("population takes no index")
            return params.replace(population=value)
        attr = _FIELD.get(name, name)
        arr = getattr(params, attr).copy()
        if arr.ndim == 2:
            if i is None or j is None:
                raise ValidationError(f"{name} needs two indices")
            arr[check_set_index(int(i), params.m), check_set_index(int(j), params.m)] = value
        else:
            if i is None or j is not None:
                raise ValidationError(f"{name} needs one index")
            arr[check_set_index(int(i), params.m)] = value
        return params.replace(**{attr: arr})


Transform = EconomicEfficiency | EngineeringEfficiency | ImpactFactor | RateOverride


def apply_transform(params: SarParameters, transform) -> SarParameters:
    return transform.apply(params)


def apply_transforms(params: SarParameters, transforms) -> SarParameters:
    for t in transforms:
        params = t.apply(params)
    return params


@dataclass(frozen=True)
class Scenario:
    """A fully validated run configuration.

    ``base_params`` is the model as written; ``params`` has ``transforms``
    applied. ``population_given`` records whether ``N`` was explicit.
    """

    base_params: SarParameters
    initial: SarState
    h: float = DEFAULTS["h"]
    horizon: float = DEFAULTS["horizon"]
    epsilon: float = DEFAULTS["epsilon"]
    transforms: tuple = ()
    variants: dict = field(default_factory=dict)
    cost_table: str | None = None
    population_given: bool = True

    @property
    def params(self) -> SarParameters:
        return apply_transforms(self.base_params, self.transforms)

    def variant_params(self, name: str) -> SarParameters:
        return apply_transforms(self.params, self.variants[name])

    @property
    def m(self) -> int:
        return self.base_params.m


def _transform_from_dict(doc, where):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValidationError(f"{where}: transform must be a mapping with a 'type'")
    kind = doc["type"]
    keys = set(doc) - {"type"}
    expected = {
        "economic": {"set"},
        "engineering": {"set"},
        "impact": {"set", "factor"},
        "override": {"path", "value"},
    }.get(kind)
    if expected is None:
        raise ValidationError(f"{where}: unknown transform type {kind!r}")
    if keys != expected:
        raise ValidationError(f"{where}: {kind} transform takes keys {sorted(expected)}, got {sorted(keys)}")
    if kind == "economic":
        return EconomicEfficiency(doc["set"])
    if kind == "engineering":
        return EngineeringEfficiency(doc["set"])
    if kind == "impact":
        return ImpactFactor(doc["set"], doc["factor"])
    return RateOverride(str(doc["path"]), doc["value"])


def _transform_to_dict(t) -> dict:
    if isinstance(t, EconomicEfficiency):
        return {"type": "economic", "set": t.set_index}
    if isinstance(t, EngineeringEfficiency):
        return {"type": "engineering", "set": t.set_index}
    if isinstance(t, ImpactFactor):
        return {"type": "impact", "set": t.set_index, "factor": t.factor}
    return {"type": "override", "path": t.path, "value": t.value}


def _section(doc, key, required=True):
    value = doc.get(key)
    if value is None:
        if required:
            raise ValidationError(f"missing section {key!r}")
        return {}
    if not isinstance(value, dict):
        raise ValidationError(f"section {key!r} must be a mapping")
    return value


def _check_keys(section, allowed, name):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ValidationError(f"unknown keys in {name}: {', '.join(sorted(map(str, unknown)))}")


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document (see module docstring)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(exc), mark.line + 1 if mark else None) from None
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a mapping")
    _check_keys(doc, TOP_KEYS, "scenario")

    model = _section(doc, "model")
    _check_keys(model, {"m", "population", "h", "horizon", "epsilon"}, "model")
    m = model.get("m")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ValidationError(f"model.m must be a positive integer, got {m!r}")

    vectors = _section(doc, "vectors")
    _check_keys(vectors, VECTOR_KEYS, "vectors")
    missing = [k for k in VECTOR_KEYS if k not in vectors]
    if missing:
        raise ValidationError(f"missing vectors: {', '.join(missing)}")
    vec = {k: check_vector(vectors[k], k, m) for k in VECTOR_KEYS}

    matrices = _section(doc, "matrices", required=False)
    _check_keys(matrices, {"lambda", "rho"}, "matrices")
    lam = matrices.get("lambda", np.zeros((m, m)))
    rho = matrices.get("rho", np.zeros((m, m)))

    caps = _section(doc, "caps", required=False)
    _check_keys(caps, CAP_KEYS, "caps")

    initial = SarState(vec["s0"], vec["a0"], vec["r0"], 0.0)
    population_given = model.get("population") is not None
    population = model["population"] if population_given else initial.total
    params = SarParameters(
        lam=lam,
        rho=rho,
        b=vec["b"],
        c=vec["c"],
        beta=vec["beta"],
        gamma=vec["gamma"],
        eta=vec["eta"],
        population=population,
        **{k: caps.get(k) for k in CAP_KEYS},
    )

    transforms = doc.get("transforms") or []
    if not isinstance(transforms, list):
        raise ValidationError("transforms must be a list")
    transforms = tuple(_transform_from_dict(t, f"transforms[{n}]") for n, t in enumerate(transforms))
    variants_doc = doc.get("variants") or {}
    if not isinstance(variants_doc, dict):
        raise ValidationError("variants must be a mapping of name -> transform list")
    variants = {}
    for name, items in variants_doc.items():
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", str(name)):
            raise ValidationError(f"variant name {name!r} is not usable as a file suffix")
        if not isinstance(items, list):
            raise ValidationError(f"variant {name!r} must be a list of transforms")
        variants[str(name)] = tuple(_transform_from_dict(t, f"variants.{name}[{n}]") for n, t in enumerate(items))

    cost_table = doc.get("cost_table")
    scenario = Scenario(
        base_params=params,
        initial=initial,
        h=check_positive(model.get("h", DEFAULTS["h"]), "model.h"),
        horizon=check_positive(model.get("horizon", DEFAULTS["horizon"]), "model.horizon"),
        epsilon=check_positive(model.get("epsilon", DEFAULTS["epsilon"]), "model.epsilon"),
        transforms=transforms,
        variants=variants,
        cost_table=None if cost_table is None else str(cost_table),
        population_given=population_given,
    )
    if scenario.horizon < scenario.h:
        raise ValidationError("model.horizon must be at least model.h")
    # surface transform errors (range, caps) at load time
    scenario.params
    for name in variants:
        scenario.variant_params(name)
    return scenario


def read_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def bundled_scenario_text(name: str = "table2") -> str:
    return resources.files("sarnet").joinpath(f"data/{name}.scenario").read_text(encoding="utf-8")


def load_bundled_scenario(name: str = "table2") -> Scenario:
    return parse_scenario(bundled_scenario_text(name))


def _floats(arr):
    return [float(x) for x in np.asarray(arr).ravel()] if np.ndim(arr) == 1 else [_floats(r) for r in arr]


def serialize_scenario(scenario: Scenario) -> str:
    p = scenario.base_params
    model = {"m": p.m}
    if scenario.population_given:
        model["population"] = p.population
    model.update(h=scenario.h, horizon=scenario.horizon, epsilon=scenario.epsilon)
    doc = {
        "model": model,
        "vectors": {
            "s0": _floats(scenario.initial.s),
            "a0": _floats(scenario.initial.a),
            "r0": _floats(scenario.initial.r),
            **{k: _floats(getattr(p, k)) for k in ("b", "c", "beta", "gamma", "eta")},
        },
        "matrices": {"lambda": _floats(p.lam), "rho": _floats(p.rho)},
    }
    caps = {k: getattr(p, k) for k in CAP_KEYS if getattr(p, k) is not None}
    if caps:
        doc["caps"] = caps
    if scenario.transforms:
        doc["transforms"] = [_transform_to_dict(t) for t in scenario.transforms]
    if scenario.variants:
        doc["variants"] = {k: [_transform_to_dict(t) for t in v] for k, v in scenario.variants.items()}
    if scenario.cost_table is not None:
        doc["cost_table"] = scenario.cost_table
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
