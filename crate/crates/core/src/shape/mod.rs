//! Shape certificates on tabulated functions and the structural
//! conclusions they support.

pub mod astar;
pub mod conjugate;
pub mod excursion;
pub mod grid;
mod report;
pub mod smoothness;
pub mod suite;

pub use astar::{a_star_from_table, find_a_star, AStar};
pub use conjugate::{conjugate_shape_check, conjugate_tail, ConjugateShapeReport, ConjugateTail};
pub use excursion::{atom_jump_from_tail_formula, excursion_sup_tail, excursion_tail_jump, stated_atom_jump, TailJump};
pub use grid::{convexity_report, log_convexity_report, monotonicity_report, SECOND_DIFF_TOL};
pub use report::{Property, ShapeReport};
pub use smoothness::{certify_jumps, smoothness_class, JumpCertificates, Smoothness};
pub use suite::{shape_suite, ShapeSuite, ShapeTolerances, A_STAR_OFFSET, DERIVATIVE_TOL};
