"""Random wiretap coding laboratory for the two-user multiple-access wiretap channel."""

__version__ = "0.1.0"

from .channel import (
    Alphabet,
    BlockChannel,
    InputDistribution,
    JointDistribution,
    MacWiretapChannel,
    block_probability,
    builder_adder_bsc,
    induced_joint,
    make_channel,
)
from .coding import (
    DecodeFailure,
    DecodeOutcome,
    MessageIndex,
    RateTuple,
    WiretapCodebook,
    counts_from_rates,
    encode,
    error_probability_exact,
    error_probability_mc,
    generate_codebook,
    threshold_decode,
)
from .leakage import (
    LeakageReport,
    ResolvabilityDiagnostic,
    induced_eaves_conditional,
    j_mu_exact,
    leakage_exact,
    leakage_mc,
    lemma4_bound,
    variational_distance,
)
from .regions import (
    BoundEvaluation,
    RateConstraintSystem,
    RegionPolytope,
    SpectralQuantities,
    assemble_constraints,
    feinstein_bound,
    fourier_motzkin,
    theorem_region,
)
from .spectrum import (
    Kind,
    RateEstimate,
    SpectrumSample,
    cond_info_density,
    cond_mutual_information,
    estimate_rate,
    info_density,
    mutual_information,
    sample_spectrum,
    tail_probability,
)
