pub mod boundary;
pub mod quad;
pub mod surface;
