//! Predicting a business's star rating from the text of its reviews.

pub mod assets;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod par;
pub mod pos;
pub mod regress;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
