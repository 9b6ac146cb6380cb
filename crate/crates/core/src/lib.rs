//! Sum-of-squares analysis in the free *-algebra `R<X, X*>`.
//!
//! - [`ncpoly`]: words, exact polynomials, adjoints, matrix evaluation.
//! - [`gram`]: the affine space of Gram matrices of a symmetric polynomial
//!   and the exact top-block rank bound.
//! - [`sdp`]: a small primal-dual interior-point SDP solver.
//! - [`sos`]: trace-heuristic decompositions with boundary rank reduction.
//! - [`theorems`]: `S = sum X^{α*} X^α` and exact rank-bound checks.
//! - [`parse`]: the text grammar used by the CLI.
//!
//! ```
//! use ncsos::{parse, sos_decompose};
//!
//! let p = parse("1 + x1'*x1 + x1*x1'", None).unwrap();
//! let d = sos_decompose(&p).unwrap();
//! assert_eq!(d.squares.len(), 2);
//! assert!(d.certificate.certified);
//! ```

pub mod gram;
pub mod linalg;
pub mod ncpoly;
pub mod parse;
pub mod random;
pub mod sdp;
pub mod sos;
pub mod theorems;

pub use gram::{
    build_gram_space, build_gram_space_with_degree, rank_lower_bound, GramError, GramSpace,
    MonomialBasis, RankCertificate,
};
pub use ncpoly::{
    commutes, evaluate, Alphabet, MatrixTuple, NcPoly, PolyError, Rational, RealPoly, Word,
};
pub use parse::{parse, ParseError};
pub use sdp::{max_step_to_boundary, SdpProblem, SdpSolution, SdpStatus, SolverOptions};
pub use sos::{sos_decompose, sos_decompose_with, SosDecomposition, SosError, SosOptions};
pub use theorems::{
    make_s, verify_power_bound, verify_qqs_bound, verify_qsq_bound, BoundReport, QqsOutcome,
    SPolynomial, TheoremError,
};
