"""Net-PGD reconstruction with an untrained deep-decoder prior."""

from ._netpgd import (
    DecoderSpec,
    LatentCode,
    DecoderWeights,
    MeasurementOperator,
    SolverConfig,
    SolverTrace,
    IstaResult,
    RecOptions,
    RecReport,
    NetpgdError,
    make_latent,
    init_weights,
    generate,
    grad_weights,
    project,
    make_operator,
    make_orthonormal_operator,
    apply,
    apply_adjoint,
    apply_magnitude,
    net_pgd_cs,
    net_pgd_cpr,
    net_gd,
    ista_dct,
    lasso_lambda_from_alpha,
    nmse,
    rec_check,
    load_image,
    rng_u64,
)

__all__ = [name for name in dir() if not name.startswith("_")]
