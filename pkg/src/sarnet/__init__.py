"""Diffusion-set partitioning and SAR interference-epidemic modelling for rooted sensor networks."""
from .costs import CostCurve, CostTable, cost_curve, default_cost_table, dump_cost_table, load_cost_table
from .dynamics import (
    SarParameters,
    SarState,
    Trajectory,
    attack_rate,
    convergence_time,
    derivatives,
    euler_step,
    simulate,
)
from .estimators import (
    CostCurveTransformer,
    DiffusionSetPartitioner,
    EpidemicStateClassifier,
    SARSimulator,
    StabilityAnalyzer,
)
from .exceptions import (
    NegativeCompartmentWarning,
    NoNonnegativeDFEError,
    ParseError,
    SarnetError,
    UndefinedR0Error,
    ValidationError,
)
from .network import (
    DiffusionPartition,
    EpidemicState,
    Network,
    classify_node,
    compute_depths,
    load_network,
    partition_diffusion_sets,
    remove_node,
    tree_interference,
)
from .scenario import (
    EconomicEfficiency,
    EngineeringEfficiency,
    ImpactFactor,
    RateOverride,
    Scenario,
    apply_transform,
    parse_scenario,
    serialize_scenario,
)
from .stability import (
    DfeCase,
    StabilityReport,
    Verdict,
    analyze_stability,
    build_dfe_matrix,
    reproduction_number,
    solve_dfe,
)

__version__ = "0.1.0"
