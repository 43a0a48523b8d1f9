"""Finite-sample testing and confidence bands for trade-off curves.

Given equal-size samples from two unknown distributions, decide whether
their Neyman-Pearson trade-off curve dominates a benchmark, build
simultaneous confidence bands for the whole curve, and adapt the search
over nested witness-set classes.  See the module docstrings for the
mathematics; ``demos/`` for narrative walk-throughs.
"""
from .bands import BandResult, compute_band
from .curves import (
    CurvedRho,
    CurveError,
    EpsDelta,
    GaussianShift,
    LaplaceShift,
    PiecewiseLinear,
    TradeoffCurve,
    TvTolerant,
    gcm,
    np_curve_discrete,
    validate_curve,
)
from .margins import (
    GridPieces,
    MarginError,
    MarginParams,
    dkw_margins,
    grid_pieces,
    h_minus,
    h_plus,
    h_plus_inv,
    make_margins,
    surrogate_eval,
    variance_proxy,
)
from .sim import (
    BasePair,
    BumpPair,
    DiscretePair,
    ExperimentConfig,
    GaussianShiftPair,
    GeneratorSpec,
    LaplaceShiftPair,
    SimReport,
    base_pair_inverse_cdf,
    oracle_witness_test,
    replication_rng,
    run_experiment,
    sample_pair,
)
from .testing import (
    SeparationReport,
    SeparationSpec,
    TestConfig,
    TestOutcome,
    adaptive_test,
    check_separation,
    general_test,
    local_modulus,
    mlr_test,
    sufficient_gap_check,
)
from .witness import (
    ErmResult,
    FiniteAlphabet,
    HalfLines,
    IntervalUnion,
    SampleData,
    WitnessClass,
    WitnessSet,
    brute_force_erm,
    erm,
    erm_hull,
    frontier,
)

__version__ = "0.1.0"
