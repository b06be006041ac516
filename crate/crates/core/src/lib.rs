//! Exact and randomized tools for staircase tableaux.

pub mod asep;
pub mod constraint;
pub mod dpcount;
pub mod enumerate;
pub mod error;
pub mod formulas;
pub mod interval;
pub mod moments;
pub mod pmf;
pub mod rational;
pub mod sampler;
pub mod statistic;
pub mod tableau;
pub mod weights;

pub use asep::{AsepParams, AsepState, Convention};
pub use constraint::{ConstraintSet, Requirement};
pub use error::{Error, Result};
pub use pmf::{EmpiricalPmf, Pmf};
pub use rational::Rational;
pub use sampler::{SampleMethod, Sampler};
pub use statistic::Statistic;
pub use tableau::{BoxIndex, Cell, Diagonal, SymbolCounts, Tableau, Violation};
pub use weights::{FourWeights, Weights};
