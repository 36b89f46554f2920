//! Clone algebras, t-algebras and the Birkhoff-type decision procedures
//! over finite carriers.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line front end and parallel drivers live in the `clonealg` crate.

#![no_std]
#![allow(clippy::result_large_err)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod hyperterm;
pub mod algebra;
pub mod birkhoff;
pub mod clone_algebra;
pub mod fixtures;
pub mod talgebra;
pub mod thread;
