"""Integer tree codes: exact encoder, randomized algebraic decoder, variants."""

from treecode.core import (
    BoundViolation,
    PrimeFieldCtx,
    binomial,
    encode_tc,
    eval_to_newton,
    generate_prime,
    newton_to_eval,
    pair_hamming,
)
from treecode.decoder import (
    AmplifiedResult,
    DecodeBudgetExhausted,
    DecodeParams,
    InfeasibleParams,
    LocatorFailure,
    amplified_decode,
    closed_form_params,
    decode_full,
    locate_eval_nonerrors,
    locate_newton_nonerrors,
    locate_one_nonerror,
    recover_first_symbol,
    residual_vector,
    reverse_input,
    search_params,
    validate_params,
)
from treecode.lgv import (
    BudgetExceeded,
    IndexPairSelection,
    StaircaseResult,
    count_vertex_disjoint_paths,
    lgv_interpolate,
    pascal_submatrix_det,
    staircase_select,
)

__all__ = [
    "AmplifiedResult",
    "BoundViolation",
    "BudgetExceeded",
    "DecodeBudgetExhausted",
    "DecodeParams",
    "IndexPairSelection",
    "InfeasibleParams",
    "LocatorFailure",
    "PrimeFieldCtx",
    "StaircaseResult",
    "amplified_decode",
    "binomial",
    "closed_form_params",
    "count_vertex_disjoint_paths",
    "decode_full",
    "encode_tc",
    "eval_to_newton",
    "generate_prime",
    "lgv_interpolate",
    "locate_eval_nonerrors",
    "locate_newton_nonerrors",
    "locate_one_nonerror",
    "newton_to_eval",
    "pair_hamming",
    "pascal_submatrix_det",
    "recover_first_symbol",
    "residual_vector",
    "reverse_input",
    "search_params",
    "staircase_select",
    "validate_params",
]
