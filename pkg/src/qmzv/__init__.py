"""q-analogues of multiple zeta values: bi-bracket expansions, rank tables
over prime fields, partition shuffle spaces and generating-series checks."""

from .bibracket import (
    BiBracketIndex,
    IndexFamily,
    QAnalogueSpec,
    bibracket_batch,
    bibracket_series,
    convert_zeta_to_depth1_basis,
    derive_index,
    eisenstein,
    enumerate_indices,
    model_spec,
    zeta_q_series,
)
from .cache import SeriesCache
from .checks import run_check
from .errors import (
    BasisViolation,
    DomainError,
    FactorialNotInvertible,
    MissingEntry,
    NonUnitConstant,
    ParseError,
    QMZVError,
    RingMismatch,
    SpecViolation,
    TruncationMismatch,
    UnknownCheck,
)
from .genfun import (
    BivariateSeries,
    CheckReport,
    NamedSeries,
    check_identity_msq,
    check_okounkov_factorization,
    check_y1_reductions,
    expand,
    extract_generators_free,
    extract_lie_b,
    upper_bound_series,
)
from .linalg import CoefficientMatrix, DimTable, Echelon, fil_table, gr_table, membership, rank
from .psspace import HomogeneousPolynomial, partition_substitute, ps_dimension, shuffle_apply
from .qseries import (
    DEFAULT_PRIME,
    SECOND_PRIME,
    RationalPolynomial,
    RingSpec,
    TruncatedQSeries,
    q_derivative,
    series_arith,
)
from .reports import TableReport

__all__ = [
    "BasisViolation",
    "bibracket_batch",
    "bibracket_series",
    "BiBracketIndex",
    "BivariateSeries",
    "check_identity_msq",
    "check_okounkov_factorization",
    "check_y1_reductions",
    "CheckReport",
    "CoefficientMatrix",
    "convert_zeta_to_depth1_basis",
    "DEFAULT_PRIME",
    "derive_index",
    "DimTable",
    "DomainError",
    "Echelon",
    "eisenstein",
    "enumerate_indices",
    "expand",
    "extract_generators_free",
    "extract_lie_b",
    "FactorialNotInvertible",
    "fil_table",
    "gr_table",
    "HomogeneousPolynomial",
    "IndexFamily",
    "membership",
    "MissingEntry",
    "model_spec",
    "NamedSeries",
    "NonUnitConstant",
    "ParseError",
    "partition_substitute",
    "ps_dimension",
    "q_derivative",
    "QAnalogueSpec",
    "QMZVError",
    "rank",
    "RationalPolynomial",
    "RingMismatch",
    "RingSpec",
    "run_check",
    "SECOND_PRIME",
    "series_arith",
    "SeriesCache",
    "shuffle_apply",
    "SpecViolation",
    "TableReport",
    "TruncatedQSeries",
    "TruncationMismatch",
    "UnknownCheck",
    "upper_bound_series",
    "zeta_q_series",
]

__version__ = "0.1.0"
