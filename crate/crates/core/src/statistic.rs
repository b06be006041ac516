//! Diagonal statistics and symbol totals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};
use crate::tableau::{BoxIndex, Cell, Diagonal, Tableau};

/// Integer-valued statistics of an α/β tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    /// α's on the second diagonal.
    A2,
    /// β's on the second diagonal.
    B2,
    /// Non-empty boxes on the second diagonal.
    X2,
    /// α's on the third diagonal.
    A3,
    /// Non-empty boxes on the third diagonal.
    X3,
    NAlpha,
    NBeta,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Statistic::A2,
        Statistic::B2,
        Statistic::X2,
        Statistic::A3,
        Statistic::X3,
        Statistic::NAlpha,
        Statistic::NBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::A2 => "A2",
            Statistic::B2 => "B2",
            Statistic::X2 => "X2",
            Statistic::A3 => "A3",
            Statistic::X3 => "X3",
            Statistic::NAlpha => "Nalpha",
            Statistic::NBeta => "Nbeta",
        }
    }

    pub fn diagonal(self) -> Option<Diagonal> {
        match self {
            Statistic::A2 | Statistic::B2 | Statistic::X2 => Some(Diagonal::Second),
            Statistic::A3 | Statistic::X3 => Some(Diagonal::Third),
            _ => None,
        }
    }

    /// Whether box `b` holding `c` contributes one to the statistic.
    pub fn counts(self, n: usize, b: BoxIndex, c: Cell) -> bool {
        let on_diag = |d: Diagonal| d.column_of(n, b).is_some();
        match self {
            Statistic::A2 => c == Cell::Alpha && on_diag(Diagonal::Second),
            Statistic::B2 => c == Cell::Beta && on_diag(Diagonal::Second),
            Statistic::X2 => !c.is_empty() && on_diag(Diagonal::Second),
            Statistic::A3 => c == Cell::Alpha && on_diag(Diagonal::Third),
            Statistic::X3 => !c.is_empty() && on_diag(Diagonal::Third),
            Statistic::NAlpha => c == Cell::Alpha,
            Statistic::NBeta => c == Cell::Beta,
        }
    }

    pub fn evaluate(self, t: &Tableau) -> usize {
        let n = t.n();
        t.boxes().filter(|&(b, c)| self.counts(n, b, c)).count()
    }

    /// Largest value the statistic can take on a size-`n` tableau.
    ///
    /// Adjacent second-diagonal boxes are never both filled, and third-diagonal
    /// boxes two columns apart are never both filled.
    pub fn max_value(self, n: usize) -> usize {
        match self {
            Statistic::A2 | Statistic::B2 | Statistic::X2 => n.saturating_sub(1).div_ceil(2),
            Statistic::A3 | Statistic::X3 => {
                let m = n.saturating_sub(2);
                (m.div_ceil(2)).div_ceil(2) + (m / 2).div_ceil(2)
            }
            Statistic::NAlpha | Statistic::NBeta => n,
        }
    }

    /// The Poisson parameter of the limit law, when there is one.
    pub fn poisson_limit(self) -> Option<Rational> {
        match self {
            Statistic::A2 | Statistic::B2 | Statistic::A3 => Some(ratio(1, 2)),
            Statistic::X2 | Statistic::X3 => Some(ratio(1, 1)),
            Statistic::NAlpha | Statistic::NBeta => None,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownStatistic(s.to_string()))
    }
}
