//! Random uniform and planted hypergraphs built from homomorphisms of the
//! free product `(Z/kZ)^{*d}` into symmetric groups: sampling, exact
//! counting, moment formulas, the tree Markov measure, and core/rigidity
//! checks.
//!
//! ```
//! use sofic_lab::{Coloring, ModelParams, RngState};
//! use sofic_lab::hypergraph::{build_hypergraph, is_proper};
//! use sofic_lab::samplers::sample_planted_hom;
//! use sofic_lab::structure::density_report;
//!
//! let params = ModelParams::planted(20, 6, 120)?;
//! let chi = Coloring::canonical_equitable(120)?;
//! let hom = sample_planted_hom(&params, &chi, &mut RngState::new(1, 0).rng())?;
//! let g = build_hypergraph(&hom);
//! assert!(is_proper(&g, &chi)?);
//! let density = density_report(&g, &chi, 4)?;
//! assert!(density >= 0.into());
//! # Ok::<(), sofic_lab::Error>(())
//! ```

pub mod analytics;
pub mod count;
pub mod error;
pub mod group;
pub mod harness;
pub mod hypergraph;
pub mod numeric;
pub mod rng;
pub mod samplers;
pub mod structure;
pub mod tree;

pub use error::{Error, Result};
pub use group::{ModelParams, ReducedWord, UniformHom};
pub use hypergraph::{Coloring, LabeledHypergraph};
pub use rng::RngState;
