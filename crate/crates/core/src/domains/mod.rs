//! Non-relational companion domains used as comparison targets.

pub mod interval;
pub mod predicate;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("variable universes differ: {left} vs {right} variables")]
    UniverseMismatch { left: usize, right: usize },
}
