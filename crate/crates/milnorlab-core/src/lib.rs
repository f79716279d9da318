//! Numerical laboratory for curvature concentration at branch points of
//! degenerating surface families in flat R^4.
//!
//! The library is organised around six concerns:
//!
//! * [`germ`] — surface families: a small polynomial DSL over `z`, `zb`, `s`,
//!   explicit and implicit charts, exact 2-jets and branch data;
//! * [`geom`] — adapted frames, second fundamental form, the curvature
//!   2-forms of the tangent and normal bundles, adaptive polar quadrature and
//!   boundary line integrals (geodesic curvature, normal connection form);
//! * [`milnor`] — the double-limit estimates of the tangent and normal
//!   Milnor numbers, Euler-characteristic and inequality checks;
//! * [`braid`] — sphere slices, braid-axis diagnostics, Gauss linking
//!   integrals, algebraic crossing numbers and Bennequin-type checks;
//! * [`grassmann`] — the Λ± splitting of G₂⁺(R⁴) ≅ S²×S², pseudo-holomorphic
//!   lift residuals, bubble degrees and the lift-area bound;
//! * [`report`] — key = value reports and CSV tables shared by the CLI.
//!
//! Heavy inner loops (quadrature cells, linking double sums, (ε, s) tables)
//! run on rayon when the `parallel` feature is enabled (default) and fall
//! back to sequential iteration otherwise. Accumulation order is fixed either
//! way, so results are bit-identical across thread counts.

pub mod alg;
pub mod braid;
pub mod error;
pub mod exec;
pub mod germ;
pub mod geom;
pub mod grassmann;
pub mod milnor;
pub mod report;

pub use error::{Error, Result};
