//! Compiler and checker for suppression enforcement of safety formulas.

pub mod bisim;
pub mod error;
pub mod harness;
pub mod logic;
pub mod lts;
pub mod normalize;
pub mod process;
pub mod runtime;
pub mod specfile;
pub mod symbolic;
pub mod syntax;
pub mod synth;
pub mod transducer;

pub use error::{Error, Result};
