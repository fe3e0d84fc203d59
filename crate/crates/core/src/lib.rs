//! Polyregular string-to-string functions.
//!
//! The crate implements three presentations of polyregular functions and the
//! machinery connecting them:
//!
//! * [`logic`]: FO/MSO formulas over words, parsing, evaluation, substitution.
//! * [`structures`]: word models, block orders, products of linear orders and
//!   rank-r types (Ehrenfeucht–Fraïssé equivalence).
//! * [`semigroup`]: finite semigroups, the type monoid and factorization forests.
//! * [`interpretation`]: string-to-string interpretations and their composition.
//! * [`forprog`]: the for-program language and the formula-to-program compiler.
//! * [`rational`]: unambiguous rational transducers and function chaining.
//! * [`domination`]: dominating coordinates for definable orders.
//! * [`pipeline`]: ordered enumeration of definable enumerators without sorting.

pub mod logic;
pub mod structures;
pub mod semigroup;
pub mod interpretation;
pub mod forprog;
pub mod rational;
pub mod domination;
pub mod pipeline;
