"""Graph signal sampling set selection."""

from ._core import (
    EigenOracle,
    GsampError,
    Graph,
    InvalidInput,
    InvalidKernel,
    InvalidParameter,
    IoError,
    Laplacian,
    ParseError,
    SamplingResult,
    avm,
    bandlimited_signal,
    barabasi_albert,
    diag_energy_fraction,
    erdos_renyi,
    estimate_coherence,
    exact_greedy,
    grid,
    knn_graph,
    path,
    reconstruct,
    run_snr_sweep,
    run_timing_sweep,
    sample,
    sensor_knn,
    snr_db,
    sp_ideal,
    sp_k,
    watts_strogatz,
)

METHODS = ("wrs", "dc", "avm", "sp_ideal", "sp_k", "exact_greedy", "avm_kernel")

__all__ = [name for name in dir() if not name.startswith("_")]
