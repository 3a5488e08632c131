"""Dense quantum-state, channel and measurement primitives."""

from .channels import (
    Channel,
    append_state_channel,
    apply_channel,
    completeness_error,
    compose,
    computational_dephasing,
    dephasing,
    depolarizing,
    identity_channel,
    measure_and_prepare,
    mixture,
    partial_trace_channel,
    power_channel,
    prepare_channel,
    random_channel,
    tensor_channels,
    unitary_channel,
)
from .linalg import (
    CNOT,
    CZ,
    H,
    I2,
    X,
    Y,
    Z,
    DimensionError,
    bits_to_int,
    dagger,
    embed,
    hermitian_eig,
    int_to_bits,
    kron,
    kron_all,
    pauli_xz,
    psd_sqrt,
    rz,
)
from .povm import (
    Povm,
    bell_povm,
    computational_povm,
    measure_povm,
    paired_bell_povm,
    povm_probabilities,
    projective_povm,
)
from .states import (
    MINUS,
    ONE,
    PLUS,
    ZERO,
    DensityMatrix,
    PureState,
    as_density,
    bell_state,
    fidelity_with_pure,
    minus_theta,
    partial_trace,
    plus_theta,
    pure_fidelity,
    tensor,
    trace_distance,
    trace_out_last,
)

