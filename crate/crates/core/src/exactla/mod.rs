//! Exact linear algebra over Z and Z/m: Smith normal form, kernels,
//! images, quotients of maps between finitely generated Z/m-modules,
//! and homology of bounded complexes.

mod module;
mod snf;
mod zm;

pub use module::{cokernel_mod_m, diag_rels, BoundedComplex, FinModule, ModuleMap, Subquotient};
pub use snf::{smith_normal_form, IntMatrix, SmithDecomposition};
pub use zm::{mod_inverse, snf_mod, MatZm, SnfZm};
