//! Sphere slices, braid-axis diagnostics, linking and crossing numbers,
//! and the Bennequin-type checks.

pub mod invariants;
pub mod slice;

pub use invariants::{
    axis_test, bennequin_check, crossing_number, gauss_linking, hopf_reference_linking,
    prop2_check, AxisReport, BennequinReport, BraidInvariants, Linking, Prop2Report,
};
pub use slice::{slice_sphere, slice_with_nudge, SliceComponent, SliceOptions, SliceVertex, SphereSlice};
