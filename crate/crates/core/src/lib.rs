//! Sequential strong rules for discarding predictors in lasso-type problems.
//!
//! The crate provides screening rules (basic and sequential strong rules,
//! SAFE, and their elastic-net, logistic, group and graphical-lasso
//! variants), pathwise solvers that use those rules together with KKT
//! checks, tools for detecting when the rules can fail, and a simulation
//! harness for measuring how many predictors they discard.

pub mod cli;
pub mod coef;
pub mod design;
pub mod error;
pub mod experiments;
pub mod glasso;
pub mod grid;
pub mod group;
pub mod guarantees;
pub mod io;
pub mod lasso;
pub mod logistic;
pub mod path;
pub mod screening;

pub use coef::Coefficients;
pub use design::{standardize, DesignMatrix, RawMatrix, ResponseVector, StandardizeMode};
pub use error::{Error, Result};
pub use grid::{make_grid, GridSpacing, LambdaGrid};
pub use lasso::{coord_descent, kkt_check, solve_path, Penalty, SolverConfig};
pub use path::{KktReport, PathSolution, PathStep, Strategy};
pub use screening::{RuleId, ScreenMask};
