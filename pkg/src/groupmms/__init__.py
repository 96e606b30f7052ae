"""Maximin share computation and approximation algorithms for groups of agents."""
from .algorithms import (
    RoundRobinTrace,
    ShapeError,
    SubsetDecomposition,
    allocate_many_one,
    allocate_singletons,
    allocate_three_two,
    allocate_two_one,
    allocate_two_two,
    cut_and_choose,
    f_value,
    important_cells,
    round_robin,
    solve,
)
from .core import (
    Allocation,
    Instance,
    InstanceError,
    RatioReport,
    bundle_utility,
    parse_allocation,
    parse_instance,
    ratio_report,
)
from .hard import HardInstanceSpec, generate, verify_claim
from .maximin import (
    BestRatioResult,
    MmsResult,
    SizeGuardError,
    best_egalitarian_ratio,
    certify,
    mms,
    mms_oracle,
    mms_values,
)

__version__ = "0.1.0"
