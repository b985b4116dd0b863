//! dgkit: an exact-arithmetic workbench for homological algebra at small
//! scale — finitely presented modules over a handful of coefficient rings,
//! bounded cochain complexes, finite dg categories with verified axioms,
//! Drinfeld quotients, homotopy pullbacks and limits, and constructive
//! generation witnesses. Every result is exact; every certificate can be
//! re-checked.

pub mod bobject;
pub mod complex;
pub mod corpus;
pub mod dg;
pub mod examples_gen;
pub mod generation;
pub mod homcx;
pub mod instance;
pub mod mat;
pub mod module;
pub mod pullback;
pub mod quotient;
pub mod report;
pub mod ring;
pub mod telescope;
pub mod twisted;

pub use mat::{kernel_cover, kernel_mod_structural, snf, solve, solve_cover, Mat, Snf};
pub use module::{hom_module, FpModule, HomModule, ModMap, TensorModule};
pub use ring::{Cover, Ring, RingError, Scalar};
