//! Two-qubit encoding of qutrits and compilation to {U1q, RZ, ZZPhase}.

mod compile;
mod decompose;
mod herald;
mod native;
mod qcircuit;

pub use compile::{
    compile, encode_circuit, zz_placements, BudgetRow, CompileOptions, CompileReport, Compiled, HeraldStats,
    MeasureBasis, SchedulePolicy,
};
pub use decompose::{
    decode_pair, decompose_gate, encode_level, encoded_index, restrict_to_encoded, sequence_deviation,
    verify_decomposition, zz_budget, QutritGate, ENCODED, LEAK,
};
pub use herald::{
    encode_record, gates_per_qubit, herald_filter, inject_bitflips, linear_discard_estimate, readout_flips,
    with_hardware_noise, HardwareNoise, LEAK_CROSS_QUTRIT, LEAK_SAME_QUTRIT,
};
pub use native::{sequence_unitary, NativeGate, QubitState, MAX_DENSE_QUBITS};
pub use qcircuit::{QubitCircuit, QubitInstruction, QubitShot};
