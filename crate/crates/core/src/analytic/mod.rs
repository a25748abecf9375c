//! Euler products, local factors, `1/Γ`, the coefficients `A_t` and the
//! predicted residue profile of `n + w(n)`.

pub mod constants;
pub mod euler;
pub mod gamma;
pub mod predict;

pub use constants::ConstantsConfig;
pub use euler::{d_tp, euler_product_f, local_factor, local_log_factor, EulerProductResult, TAIL_MAJORANT};
pub use gamma::reciprocal_gamma;
pub use predict::{
    choose_r_predicted, choose_x_and_p, coefficient_a, coefficient_a_detail, error_magnitudes,
    predict_histogram, ACoefficient, ErrorMagnitudes, PredictionReport, PrimeChoice,
    DEFAULT_PRIME_CUTOFF,
};
