//! Words, assembly plans, straight-line programs, and the conversions,
//! verification and serialization that connect them.

pub mod convert;
pub mod plan;
pub mod slp;
pub mod text;
pub mod witness;
pub mod word;
