//! Clustering by k-means with k-means++ seeding and utility-driven jumps.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the
//! numerical parts:
//!
//! - [`geometry`]: datasets, center sets, nearest/second-nearest assignment and SSE.
//! - [`lloyd`]: Lloyd iterations with random seeding and empty-cluster relocation.
//! - [`seeding`]: D²-weighted seeding with greedy candidates and best-of-restarts.
//! - [`jumps`]: utility/error driven center jumps (`k-means-u`) and the
//!   retrying variant with rewind-to-best (`k-means-u*`).
//! - [`datagen`]: deterministic grid and 1-D benchmark sets, Gaussian mixtures.
//! - [`analytic`]: closed-form seeding probabilities for separated 1-D clusters.
//!
//! All randomness is drawn from a caller supplied [`rand::Rng`], so a seeded
//! generator makes every run reproducible.
//!
//! ```
//! use kmu_core::{datagen, jumps, lloyd::LloydConfig, seeding};
//! use rand::SeedableRng;
//!
//! let data = datagen::gen_grid(&datagen::GridSpec::dataset_a()).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let lloyd_cfg = LloydConfig::default();
//! let base = seeding::kmpp(&data, &seeding::SeedingConfig::new(36), &lloyd_cfg, &mut rng).unwrap();
//! let (refined, _trace) =
//!     jumps::run_kms(&data, &base.best, &lloyd_cfg, &jumps::JumpConfig::new(36), &mut rng).unwrap();
//! assert!(refined.sse <= base.best.sse);
//! ```
#![no_std]

extern crate alloc;

pub mod analytic;
pub mod datagen;
mod error;
pub mod geometry;
pub mod jumps;
pub mod lloyd;
pub mod seeding;

pub use error::{Error, Result};
pub use geometry::{assign, centroid, squared_distance, sse, CenterSet, Dataset, Partition};
pub use jumps::{JumpConfig, JumpRecord, JumpTrace};
pub use lloyd::{LloydConfig, LloydResult};
pub use seeding::{BestOfRestarts, SeedingConfig};
