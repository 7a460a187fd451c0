//! Separator trees and sharp average-degree bounds for highly connected
//! subgraphs.
//!
//! The library decomposes a graph along small vertex separators until either
//! a (k+1)-connected subgraph on more than 2k vertices appears or the graph
//! splits into atoms of at most 2k vertices, and certifies exact edge-count
//! bounds for the resulting trees with rational arithmetic throughout.

pub mod graph;
pub mod connectivity;
mod tree_view;
pub use tree_view::Valuation;
pub mod septree;
pub mod abstract_tree;
pub mod molecules;
pub mod extremal;
pub mod oracle;
pub mod instances;

use num_bigint::BigInt;

/// Exact scalar used for every bound computation.
pub type Rat = num_rational::BigRational;

/// Convenience constructor for a rational p/q.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Rational from an integer.
pub fn rat_int(p: i64) -> Rat {
    Rat::from(BigInt::from(p))
}

/// Binomial coefficient C(m, 2) as an exact rational.
pub fn binom2(m: u64) -> Rat {
    Rat::from(BigInt::from(m) * BigInt::from(m.saturating_sub(1)) / 2)
}

/// Compares log2(l) with the rational p/q, exactly: returns the ordering of
/// log2(l) relative to p/q. Requires l >= 1 and q > 0.
pub fn cmp_log2(l: u64, p: &BigInt, q: &BigInt) -> std::cmp::Ordering {
    use num_traits::{sign::Signed, Zero};
    assert!(l >= 1);
    assert!(q > &BigInt::zero());
    // log2(l) <=> p/q  <=>  l^q <=> 2^p
    if p.is_negative() {
        // log2(l) >= 0 > p/q.
        return std::cmp::Ordering::Greater;
    }
    let lq = BigInt::from(l).pow(q.try_into().expect("exponent fits u32"));
    let twop = BigInt::from(2).pow(p.try_into().expect("exponent fits u32"));
    lq.cmp(&twop)
}

/// Errors surfaced by decomposition and bound checking.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph input: {0}")]
    InvalidGraph(String),
    #[error("invalid separation: {0}")]
    InvalidSeparation(String),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("edge number undefined: separator {sep} has a multi-atom small branch with no normal atom")]
    UndefinedEdgeNumber { sep: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
