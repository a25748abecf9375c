//! Image multiplicities `g(n)`, the non-represented set `E`, collision counts
//! and residue histograms of `n + w(n)`.

pub mod histogram;
pub mod image;
pub mod bounds;

pub use histogram::{residue_histogram, residue_histogram_from, ResidueHistogram};
pub use image::{
    collisions, collisions_from, image_multiplicity, image_multiplicity_from, collision_chain_check,
    collision_chain_check_from, scan_images, xi, xi_from, CollisionResult, ImageCounts, ImageSummary,
    CollisionChainReport, XiResult,
};
pub use bounds::{
    choose_r_empirical, class_size, xi_lower_bound, xi_lower_bound_sharp, ResidueSelection,
    SelectionStrategy,
};
