"""Two-point sequential measurements and the canonical state over time."""

from .operators import (
    BipartiteIndex,
    anticommutator,
    eig_hermitian,
    hermitian,
    hs_inner,
    partial_trace,
    swap_conjugate,
    tensor,
)
from .channels import (
    DensityOperator,
    JamiolkowskiOperator,
    ProjectiveMeasurement,
    QuantumChannel,
    adjoint_apply,
    apply,
    channel_from_choi,
    channel_from_jamiolkowski,
    choi,
    discard_and_prepare,
    erasure_bayesian_inverse,
    erasure_channel,
    identity_channel,
    jamiolkowski,
    random_channel,
    random_pvm,
    random_state,
    unitary_channel,
)
from .state_over_time import SpectrumReport, StateOverTime, check_marginals, spectrum_report, state_over_time
from .distributions import (
    JointQuasiDistribution,
    Kind,
    TPSMScenario,
    born_evaluate,
    coarse_grain,
    coarse_grain_scenario,
    compare_coarse_graining,
    disturbance_term,
    lvn_distribution,
    mh_distribution,
    two_time_expectation,
)
from .bayes import (
    BayesianInverseResult,
    Status,
    bayesian_inverse,
    reversed_mh,
    reversed_scenario,
    solve_anticommutator,
    spatiotemporal_bayes_check,
    verify_bayes_rule,
)
from .explorer import (
    Budget,
    born_existence_check,
    qubit_necessity_scan,
    reconstruct_from_mh,
    search_max_disturbance,
    standard_frame,
)

__version__ = "0.1.0"
