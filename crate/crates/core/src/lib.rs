//! Exact tools for uniquely decodable codes on the T-user binary adder
//! channel: brute-force verification, equivalence normalization, weight
//! spectra of code powers, the banded gluing construction that raises the
//! sum rate, exhaustive parameter search, analytic bounds and a tabu search
//! for seed codes.

pub mod bounds;
pub mod catalog;
pub mod code;
pub mod decimal;
pub mod discovery;
pub mod error;
pub mod glue;
pub mod io;
mod log2;
pub mod search;
pub mod spectrum;
pub mod table;

pub use code::{
    hamming_weight, negate_coords, normalize_step1, permute_coords, sum_rate_seed, verify_ud, CodeSystem, Codeword,
    UdReport,
};
pub use discovery::{conflict_count, tabu_search, DiscoveryOutcome, DiscoverySpec};
pub use error::{Error, Result};
pub use glue::{improved_sizes, materialize_small, weight_separation, ConstructionResult, GlueParams};
pub use search::{search, SearchConfig, SearchOutcome};
pub use spectrum::{band_count, moments, power, reflect, spectrum, WeightDistribution};

/// Moments with `f64` standardized third moment.
pub type Moments64 = spectrum::Moments<f64>;
/// Moments with `f32` standardized third moment.
pub type Moments32 = spectrum::Moments<f32>;
/// Improvement constants evaluated in `f64`.
pub type TheoremParams64 = bounds::TheoremParams<f64>;
/// Improvement constants evaluated in `f32`.
pub type TheoremParams32 = bounds::TheoremParams<f32>;
