//! Evaluation toolkit for style-imitation verse generation: rhyme density,
//! tf-idf similarity, an n-gram baseline generator, the regression merge of
//! the two and scoring of manual annotations.

pub mod annotation;
pub mod corpus;
mod error;
pub mod evalmerge;
pub mod generator;
pub mod pipeline;
pub mod report;
pub mod rhyme;
pub mod similarity;

pub use error::{Error, Result};
