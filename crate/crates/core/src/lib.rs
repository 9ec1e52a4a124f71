//! Recovery of group-sparse signals from few linear measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: group models, weights, support projection and the exhaustive
//!   projection oracle.
//! - [`graphs`]: incidence/intersection graphs and (nice) tree decompositions.
//! - [`dp`]: exact projection by dynamic programming over a nice tree
//!   decomposition of the incidence graph.
//! - [`benders`]: exact projection for arbitrary models by Benders'
//!   decomposition with closed-form optimality cuts.
//! - [`approx`]: greedy head approximation and LP-rounding tail approximation,
//!   backed by a dense bounded-variable simplex.
//! - [`sensing`]: Gaussian and expander measurement matrices and the median
//!   operator.
//! - [`recovery`]: Model-IHT, MEIHT, AM-IHT and AM-EIHT.
//! - [`bench`]: block-model instances, measurement sweeps and report files.
//!
//! ```
//! use groupsparse::model::{brute_force_projection, GroupModel, NormMode, WeightVector};
//! use groupsparse::dp::DpProjector;
//!
//! let model = GroupModel::from_one_based(4, &[&[1, 2], &[1, 2, 3], &[2, 4], &[3, 4]], 1, 4).unwrap();
//! let w = WeightVector::new(vec![4.0, 1.0, 2.0, 9.0], NormMode::L2).unwrap();
//! let dp = DpProjector::new(&model).unwrap().project(&w).unwrap();
//! assert_eq!(dp.covered_weight, brute_force_projection(&model, &w).unwrap().covered_weight);
//! ```

pub mod approx;
pub mod bench;
pub mod benders;
pub mod dp;
pub mod graphs;
pub mod model;
pub mod recovery;
pub mod rng;
pub mod sensing;

mod error;

pub use error::Error;
