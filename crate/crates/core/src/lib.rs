//! Computations with nonnegatively graded big rings over a finite object set,
//! with coefficients in Z/m.
//!
//! The crate provides exact linear algebra over Z and Z/m (`exactla`), big
//! rings and big graded rings with their bimodules (`bigring`), quadratic
//! presentations and quadratic-dual corings (`quadra`), bar/cobar/Koszul
//! complexes and Koszulity verdicts (`homcheck`), the colored-matrix
//! Koszulity conditions (`matrixcrit`), exact categories of finitely
//! filtered modules with Ext computations (`filtcat`), built-in example
//! presentations (`corpus`), and a textual presentation format plus CLI
//! (`cli`).

pub mod bigring;
pub mod cli;
pub mod corpus;
pub mod exactla;
pub mod filtcat;
pub mod homcheck;
pub mod matrixcrit;
pub mod quadra;

/// Errors surfaced by operations whose failure modes are part of the
/// public contract. Internal invariant violations panic instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("base rings do not match: {0}")]
    BaseMismatch(String),
    #[error("matrices are not composable: {0}")]
    NotComposable(String),
    #[error("morphism is not unital: {0}")]
    NotUnital(String),
    #[error("nonfree components unsupported: {0}")]
    NonfreeComponents(String),
    #[error("prime field required: {0}")]
    PrimeFieldRequired(String),
    #[error("flatness precondition violated: {0}")]
    FlatnessViolated(String),
    #[error("duality mismatch in degrees <= 2: {0}")]
    DualityMismatch(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown corpus entry: {0}")]
    UnknownEntry(String),
    #[error("not finitely generated: {0}")]
    NotFinitelyGenerated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
