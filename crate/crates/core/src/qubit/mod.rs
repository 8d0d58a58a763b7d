//! Single-qubit operator algebra: Paulis, unitaries, timed pulses, the
//! Clifford group and Pauli transfer matrices.

mod clifford;
mod mat2;
mod pauli;
mod ptm;
mod pulse;
mod unitary;

pub use clifford::{
    build_clifford_group, Clifford, CliffordElement, CliffordGroup, CliffordTableEntry, CLIFFORD_TABLE_V1,
    CLIFFORD_TABLE_VERSION, DEFAULT_IDENTITY_IDLE, GROUP_ORDER,
};
pub use mat2::Mat2;
pub use pauli::{conjugate_pauli, Axis, SignedPauli};
pub use ptm::{unitary_to_ptm, Ptm};
pub use pulse::{
    detuning_half_angle, noisy_pulse_unitary, noisy_rotation, pulse_error_vector, PhysicalPulse, PulseAxis,
};
pub use unitary::Unitary;
