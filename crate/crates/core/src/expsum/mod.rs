//! Dirichlet characters mod `p` and the sums `S_t`, `S_{k,t}`, `S_{t,χ}`.

pub mod characters;
pub mod fourier;
pub mod sums;

pub use characters::{build_characters, primitive_root, unit_root, unit_root_frac, CharacterTable};
pub use fourier::{verify_fourier_identities, FourierReport, FourierTolerances};
pub use sums::{
    decay_csv, exp_sums, exp_sums_from, nonprincipal_decay_scan, nonprincipal_decay_scan_from, DecayRow,
    ExpSumSet, JointCounts,
};
