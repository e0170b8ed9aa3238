"""Column-weight-three LDPC codes that Gallager A decodes up to three errors.

Submodules
----------
tanner
    Tanner graph container, girth, alist I/O.
decoder
    Hard-decision Gallager A / B message passing.
trapping
    (a, b) trapping-set classification and targeted searches.
construct
    Progressive edge growth with (5,3) avoidance and weight-8 codeword repair.
channel
    BSC Monte Carlo, exhaustive low-weight verification, slope fits.
"""

__version__ = "0.1.0"

from .tanner import GraphError, TannerGraph, new_graph, read_alist, write_alist, read_alist_file, write_alist_file
from .decoder import DecisionRule, DecodeOutcome, DecoderConfig, Status, gallager_a_decode, is_fixed_point
from .trapping import (
    CriticalNumberResult,
    SubgraphReport,
    classify_subset,
    critical_number,
    find_53_structures,
    find_80_codewords,
    find_three_three,
)
from .construct import (
    CandidateExhausted,
    ConstructionLog,
    ConstructionParams,
    InfeasibleParams,
    RepairFailed,
    build_code,
    candidate_checks,
    peg_construct,
    repair_weight8,
)
from .channel import (
    BudgetExceeded,
    FERPoint,
    VerifyReport,
    bsc_transmit,
    dominant_term_model,
    exhaustive_verify,
    fer_estimate,
    slope_fit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
