//! Surface germs and their degeneration families: expression trees, the
//! family-definition format, explicit and implicit charts with exact 2-jets,
//! branch data and the built-in presets.

pub mod chart;
pub mod dsl;
pub mod expr;
pub mod family;
pub mod presets;

pub use chart::{ChartMap, Domain, ExplicitChart, ImplicitChart, Jet2, LimitRole};
pub use dsl::{parse_family, print_family};
pub use expr::{Expr, Var};
pub use family::{BranchData, BranchSpec, Chart, DetectedBranch, Flags, SurfaceFamily};
