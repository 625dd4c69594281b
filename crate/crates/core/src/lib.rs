pub mod analysis;
pub mod circuit;
pub mod dense;
pub mod encoder;
pub mod error;
pub mod modular;
pub mod tableau;
pub mod toric;
pub mod weyl;

pub use circuit::{Circuit, Instruction, NoiseChannel, ShotRecord};
pub use error::{Error, Result};
pub use tableau::{Expectation, MeasurementOutcome, StabilizerTableau};
pub use weyl::{CliffordGate, GateKind, WeylOp};
