//! Exact linear algebra over Z and over prime fields.

pub mod hnf;
pub mod modp;
pub mod snf;
