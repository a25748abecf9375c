//! Additive functions `w(n)` over single values and large windows.

pub mod cache;
pub mod rule;
pub mod sieve;
pub mod window;

pub use cache::WindowCache;
pub use rule::{AdditiveRule, AffineTail, RuleKind};
pub use sieve::{
    base_primes, build_spf, factorize, is_prime, primes_in_interval, Factorization, SpfTable,
    SPF_HARD_CAP,
};
pub use window::{w_value, w_window, WSource, WWindow, DEFAULT_WINDOW_LEN};
