"""Two-player games with quantum objects, their expected payoff matrices, and
the classical correlated-noise channels that reproduce them."""

from .analysis import (
    FormLabel,
    GameForm,
    ParametricFamily,
    PreferenceOrdering,
    RegionReport,
    classify,
    emit_payoff_curves,
    ordering_of,
    pure_nash,
    region_analysis,
)
from .channel import (
    BitChannelSpec,
    ChannelMatrix,
    MixedProfile,
    bit_channel,
    channel_from_game,
    expected_payoffs_channel,
    factorization_test,
    mixed_best_response,
    mixed_joint_probs,
    mixed_payoff,
    sweep_epsilon,
)
from .engine import (
    PD_OUTCOMES,
    DephasingChannel,
    GameSpec,
    OutcomeMap,
    PayoffMatrix,
    Scope,
    Strategy,
    dephase,
    ewl_conjugate,
    expected_payoffs,
    expected_payoffs_mixed_state,
    flip_game,
    output_state,
)
from .errors import InvariantViolation, ValidationError
from .linalg import (
    DensityMatrix,
    MeasurementBasis,
    StateVector,
    UnitaryOperator,
    apply,
    density_from_pure,
    measure_probs,
    measure_probs_mixed,
    tensor,
)
from .scenario import load_scenario, parse_scenario

__version__ = "0.1.0"
