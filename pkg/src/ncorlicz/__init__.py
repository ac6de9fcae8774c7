"""Orlicz modulars and norms on finite direct sums of weighted matrix blocks."""
from .errors import *  # noqa: F401,F403
from .families import SequenceFamily
from .formats import RunConfig, parse_operator, parse_phi, serialize_operator, write_records
from .harness import (
    FAIL,
    NEGATIVE,
    PASS,
    build_counterexample,
    check_duality,
    check_lemma21,
    check_lemma22,
    check_monotonicity,
    check_order_continuity,
    run_kadec_klee,
)
from .battery import fack_kosaki_suite
from .norms import amemiya_norm, luxemburg_norm, modular, orlicz_norm_sup, p_norm, pairing
from .operators import AlgebraShape, BlockOperator, SingularValueProfile, random_operator, random_shape
from .orlicz import ExpMinusOne, Power, PowerLog, Tabulated, conjugate, delta2_probe, power_pair

__version__ = "0.1.0"
