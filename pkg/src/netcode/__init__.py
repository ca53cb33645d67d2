"""Cooperative wireless network coding toolkit: GF(2) code design,
detect-and-forward relay simulation over Rayleigh fading, and MAP /
sum-product decoding with relay reliability information."""

from .gf2 import (
    BitMatrix,
    BitVector,
    column_select,
    hamming_weight,
    is_systematic_prefix,
    mat_vec_mul,
)
from .design import (
    NetworkCode,
    TradeoffPoint,
    code_for_requirements,
    default_schedule,
    greedy_code,
    network_code,
    puncture,
    rate_advantage,
    repetition_baseline,
    repetition_code,
    separation_vector,
    validate_schedule,
)
from .channel import (
    FadingModel,
    RoundBatch,
    RoundObservation,
    SncPolicy,
    combine_reliability,
    link_error_prob,
    q_function,
    simulate_round,
    simulate_rounds,
    snc_threshold,
)
from .decoders import (
    TannerGraph,
    build_tanner_graph,
    channel_llr,
    decode_with_mode,
    decode_with_mode_batch,
    llr_chat,
    map_decode,
    map_decode_batch,
    parity_check_matrix,
    sp_decode,
    sp_decode_batch,
)
from .harness import (
    BerRecord,
    ConfigError,
    SimConfig,
    compare_sweeps,
    estimate_diversity_slope,
    records_from_csv,
    records_to_csv,
    run_sweep,
    tradeoff_table,
)

__version__ = "0.1.0"
