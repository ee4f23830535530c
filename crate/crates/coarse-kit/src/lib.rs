//! Finite-scale toolkit for coarse metric geometry.
//!
//! Everything operates on finite pointed metric spaces (a point list, a full
//! distance matrix, and a distinguished basepoint). On top of that the crate
//! provides:
//!
//! - norms, annuli, greedy nets, and scale connectivity ([`space`]),
//! - Lipschitz constants, asymptotic `(λ, M)` fits, norm-preserving maps
//!   induced by sphere-valued direction fields, annulus Lipschitz profiles,
//!   and sublinearity defects ([`maps`]),
//! - open cones over spheres and simplices with map transport and the
//!   sphere/simplex-boundary homeomorphism ([`cones`]),
//! - canonical partitions of unity with quantitative Lipschitz certificates
//!   ([`partitions`]),
//! - Lipschitz extension machinery: McShane extension, nearest-point
//!   transfer, pasting, annulus splicing, and retraction extension, each
//!   emitting a checked certificate ([`extension`]),
//! - cover shrinking for colored covers with multiplicity and Lebesgue
//!   certification ([`shrink`]),
//! - piecewise-linear asymptotically sublinear functions ([`sublinear`]),
//! - seeded instance generators and JSON interchange ([`generate`], [`io`]).
//!
//! Inequality certificates are checked by direct enumeration over pairs (or
//! triples), using a relative tolerance of [`DEFAULT_TOL`] to absorb float
//! noise. Pair loops run on rayon when the `parallel` feature (default) is
//! enabled; reductions are order-independent so results are deterministic
//! either way.

pub mod cones;
pub mod extension;
pub mod generate;
pub mod io;
pub mod maps;
pub mod parallel;
pub mod partitions;
pub mod shrink;
pub mod space;
pub mod sublinear;

pub use space::{Annulus, PointedMetricSpace, ValidationReport};

/// Default relative tolerance for inequality and identity certificates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors reported by toolkit operations.
///
/// The three variants mirror the CLI exit-code contract: `Input` for
/// malformed data (exit 1), `Precondition` for semantically invalid calls
/// (exit 2), and `Certificate` for violated theorem-backed inequalities
/// (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("certificate violated: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// `a <= b` up to relative slack `tol * scale`, with scale floored at 1 so
/// near-zero comparisons get an absolute tolerance of `tol`.
pub fn leq_rel(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * a.abs().max(b.abs()).max(1.0)
}

/// `a == b` up to the same relative slack as [`leq_rel`].
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_helpers() {
        assert!(leq_rel(1.0, 1.0, DEFAULT_TOL));
        assert!(leq_rel(1.0 + 1e-12, 1.0, DEFAULT_TOL));
        assert!(!leq_rel(1.0 + 1e-6, 1.0, DEFAULT_TOL));
        assert!(close_rel(1e9, 1e9 + 0.5, DEFAULT_TOL));
        assert!(!close_rel(1.0, 1.1, DEFAULT_TOL));
    }
}
