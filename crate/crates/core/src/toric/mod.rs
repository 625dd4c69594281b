//! Rotated Z_d toric code: lattice, preparation, anyons, defects and experiments.

mod anyons;
mod checks;
mod defects;
mod experiments;
mod lattice;
mod prep;
mod presets;
mod qutrit;

pub use anyons::{anyon_string, diagonal_plaquette, drag_operator, hop_operator, solve_on_sites, transfer_operator, AnyonString};
pub use checks::{is_local_kind, Check, CheckKind, CheckSet, Frame, PlaquetteSnapshot, SnapshotAccumulator, Species};
pub use defects::{
    cc_defect, cc_internal_state, cc_ribbon, fuse_cc_pair, pf_defect, pf_observable, DefectInternalState, DefectKind,
    DefectSpec, PfLine, Ribbon, LOCAL_WEIGHT,
};
pub use experiments::{Experiment, FrameMark, Script, Step};
pub use lattice::{Plaquette, PlaquetteType, TorusLattice, CORNERS};
pub use prep::{default_ground_state, ground_state_circuit, plaquette_gates, PrepOrdering, PrepStep};
pub use presets::{cc_braid, pf_braid, pf_conjugated, pf_pfstar_braid, preset, species_braid, BraidRoute, PRESETS};
pub use qutrit::{QutritLayout, QutritSector, TopologicalQutrit};
