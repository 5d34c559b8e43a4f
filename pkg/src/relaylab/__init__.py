"""Finite-alphabet relay channel toolkit.

Rate-region evaluation and block-Markov protocol simulation for
quantize-forward relaying: the relay compresses its channel observation
into a reconstruction codebook and forwards the codeword index, the
sink decodes message and index jointly from its own observation.
"""

from .channels import (
    ChannelRecipe,
    RelayChannelSpec,
    implicit_hashing_census,
    load_channel_file,
    make_channel,
    pair_index,
    random_channel,
    save_channel_file,
    xor_sink_channel,
)
from .infotheory import (
    JointPmf,
    TypicalityParams,
    empirical_distribution,
    entropy,
    is_jointly_typical,
    joint_type_table,
    marginalize,
    mutual_information,
)
from .protocol import (
    CodebookSet,
    ErrorStats,
    SimParams,
    SizeLimitError,
    TransmissionTrace,
    generate_codebooks,
    join_message,
    recon_given_relay_input,
    relay_step,
    run_monte_carlo,
    run_transmission,
    sink_decode,
    source_encode,
    split_message,
)
from .region import (
    CodingDistribution,
    RegionReport,
    SearchConfig,
    build_joint,
    cf_rate,
    cf_rates,
    evaluate_bounds,
    fme_oracle_check,
    random_distribution,
    simplex_grid,
)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "ChannelRecipe",
    "CheckResult",
    "CodebookSet",
    "CodingDistribution",
    "ErrorStats",
    "JointPmf",
    "RegionReport",
    "RelayChannelSpec",
    "SearchConfig",
    "SimParams",
    "SizeLimitError",
    "TransmissionTrace",
    "TypicalityParams",
    "build_joint",
    "cf_rate",
    "cf_rates",
    "empirical_distribution",
    "entropy",
    "evaluate_bounds",
    "fme_oracle_check",
    "generate_codebooks",
    "implicit_hashing_census",
    "is_jointly_typical",
    "join_message",
    "joint_type_table",
    "load_channel_file",
    "make_channel",
    "marginalize",
    "mutual_information",
    "pair_index",
    "random_channel",
    "random_distribution",
    "recon_given_relay_input",
    "relay_step",
    "run_checks",
    "run_monte_carlo",
    "run_transmission",
    "save_channel_file",
    "simplex_grid",
    "sink_decode",
    "source_encode",
    "split_message",
    "xor_sink_channel",
    "__version__",
]
