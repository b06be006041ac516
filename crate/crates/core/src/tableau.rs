//! The staircase tableau data model.
//!
//! Rows are numbered from the top (row 1) and columns from the left
//! (column 1); box `(i, j)` exists iff `i + j <= n + 1`. Cells are stored
//! densely row by row, so a box outside the staircase cannot be represented.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Content of a single box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    Empty,
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl Cell {
    /// Alpha or Gamma: clears every box above it in its column.
    pub fn is_alpha_like(self) -> bool {
        matches!(self, Cell::Alpha | Cell::Gamma)
    }

    /// Beta or Delta: clears every box to its left in its row.
    pub fn is_beta_like(self) -> bool {
        matches!(self, Cell::Beta | Cell::Delta)
    }

    pub fn is_empty(self) -> bool {
        self == Cell::Empty
    }

    /// The symbol under the row/column involution.
    pub fn transposed(self) -> Cell {
        match self {
            Cell::Empty => Cell::Empty,
            Cell::Alpha => Cell::Beta,
            Cell::Beta => Cell::Alpha,
            Cell::Gamma => Cell::Delta,
            Cell::Delta => Cell::Gamma,
        }
    }

    /// Gamma becomes Alpha and Delta becomes Beta.
    pub fn two_symbol(self) -> Cell {
        match self {
            Cell::Gamma => Cell::Alpha,
            Cell::Delta => Cell::Beta,
            c => c,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Cell::Empty => '.',
            Cell::Alpha => 'A',
            Cell::Beta => 'B',
            Cell::Gamma => 'G',
            Cell::Delta => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        Some(match c {
            '.' => Cell::Empty,
            'A' => Cell::Alpha,
            'B' => Cell::Beta,
            'G' => Cell::Gamma,
            'D' => Cell::Delta,
            _ => return None,
        })
    }
}

/// A box position `(row, column)`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxIndex {
    pub i: usize,
    pub j: usize,
}

impl BoxIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        BoxIndex { i, j }
    }

    pub fn in_shape(self, n: usize) -> bool {
        self.i >= 1 && self.j >= 1 && self.i + self.j <= n + 1
    }

    pub fn is_main_diagonal(self, n: usize) -> bool {
        self.i + self.j == n + 1
    }
}

impl fmt::Display for BoxIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl FromStr for BoxIndex {
    type Err = Error;

    /// Parses `"i,j"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 1,
            msg: format!("expected box as i,j, got {s:?}"),
        };
        let (i, j) = s.split_once(',').ok_or_else(bad)?;
        let i = i.trim().parse().map_err(|_| bad())?;
        let j = j.trim().parse().map_err(|_| bad())?;
        Ok(BoxIndex::new(i, j))
    }
}

/// One of the first three diagonals, counted from the main one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Diagonal {
    Main,
    Second,
    Third,
}

impl Diagonal {
    /// Offset below the main diagonal: 0, 1 or 2.
    pub fn offset(self) -> usize {
        match self {
            Diagonal::Main => 0,
            Diagonal::Second => 1,
            Diagonal::Third => 2,
        }
    }

    pub fn from_number(k: usize) -> Option<Diagonal> {
        match k {
            1 => Some(Diagonal::Main),
            2 => Some(Diagonal::Second),
            3 => Some(Diagonal::Third),
            _ => None,
        }
    }

    /// Number of boxes on this diagonal in a size-`n` tableau.
    pub fn len(self, n: usize) -> usize {
        n.saturating_sub(self.offset())
    }

    /// The box in column `j`, i.e. `(n - offset - j + 1, j)`.
    pub fn box_at(self, n: usize, j: usize) -> Option<BoxIndex> {
        if j >= 1 && j <= self.len(n) {
            Some(BoxIndex::new(n - self.offset() - j + 1, j))
        } else {
            None
        }
    }

    /// Boxes listed by column, left to right.
    pub fn boxes(self, n: usize) -> Vec<BoxIndex> {
        (1..=self.len(n))
            .map(|j| BoxIndex::new(n - self.offset() - j + 1, j))
            .collect()
    }

    /// Column of `b` if it lies on this diagonal.
    pub fn column_of(self, n: usize, b: BoxIndex) -> Option<usize> {
        (b.i + b.j + self.offset() == n + 1 && b.in_shape(n)).then_some(b.j)
    }
}

/// Symbol multiplicities; the weight is `α^Nα β^Nβ γ^Nγ δ^Nδ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolCounts {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
    pub n_delta: usize,
}

/// A rule of the definition that a filling breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    /// Row `row` has the wrong number of cells.
    Shape {
        row: usize,
        expected: usize,
        found: usize,
    },
    /// A main-diagonal box is empty.
    EmptyDiagonal { at: BoxIndex },
    /// `blocker` is non-empty but sits above the Alpha/Gamma at `symbol`.
    Column { symbol: BoxIndex, blocker: BoxIndex },
    /// `blocker` is non-empty but sits left of the Beta/Delta at `symbol`.
    Row { symbol: BoxIndex, blocker: BoxIndex },
}

/// Boxes in the order used by the enumerator, the counting engine and the
/// chain-rule sampler: columns left to right, each column top to bottom.
pub fn sweep_order(n: usize) -> Vec<BoxIndex> {
    (1..=n)
        .flat_map(|j| (1..=n + 1 - j).map(move |i| BoxIndex::new(i, j)))
        .collect()
}

/// A filled staircase of size `n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tableau {
    n: usize,
    cells: Vec<Cell>,
}

#[inline]
fn row_offset(n: usize, i: usize) -> usize {
    (i - 1) * (n + 1) - (i - 1) * i / 2
}

impl Tableau {
    /// The all-empty filling (not valid: the diagonal is empty).
    pub fn empty(n: usize) -> Self {
        Tableau {
            n,
            cells: vec![Cell::Empty; n * (n + 1) / 2],
        }
    }

    /// Builds a tableau cell by cell.
    pub fn from_fn(n: usize, mut f: impl FnMut(BoxIndex) -> Cell) -> Self {
        let mut t = Tableau::empty(n);
        for i in 1..=n {
            for j in 1..=n + 1 - i {
                t.set(BoxIndex::new(i, j), f(BoxIndex::new(i, j)));
            }
        }
        t
    }

    /// Builds a tableau from rows; row `i` must have `n + 1 - i` cells.
    /// Only the shape is checked here, see [`Tableau::validate`] for the rules.
    pub fn from_rows(rows: Vec<Vec<Cell>>) -> Result<Self> {
        if let Some(Violation::Shape {
            row,
            expected,
            found,
        }) = shape_violations(&rows).into_iter().next()
        {
            return Err(Error::Shape {
                row,
                expected,
                found,
            });
        }
        let n = rows.len();
        Ok(Tableau {
            n,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, b: BoxIndex) -> Option<Cell> {
        b.in_shape(self.n)
            .then(|| self.cells[row_offset(self.n, b.i) + b.j - 1])
    }

    /// Cell at `b`; panics outside the staircase.
    pub fn at(&self, i: usize, j: usize) -> Cell {
        self.get(BoxIndex::new(i, j))
            .unwrap_or_else(|| panic!("box ({i},{j}) outside staircase of size {}", self.n))
    }

    pub(crate) fn set(&mut self, b: BoxIndex, c: Cell) {
        debug_assert!(b.in_shape(self.n));
        let k = row_offset(self.n, b.i) + b.j - 1;
        self.cells[k] = c;
    }

    /// Returns a copy with box `b` replaced.
    pub fn with_cell(&self, b: BoxIndex, c: Cell) -> Result<Self> {
        if !b.in_shape(self.n) {
            return Err(Error::BoxOutOfShape(b, self.n));
        }
        let mut t = self.clone();
        t.set(b, c);
        Ok(t)
    }

    pub fn row(&self, i: usize) -> &[Cell] {
        let start = row_offset(self.n, i);
        &self.cells[start..start + self.n + 1 - i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> + '_ {
        (1..=self.n).map(move |i| self.row(i))
    }

    /// Every box with its content, row by row.
    pub fn boxes(&self) -> impl Iterator<Item = (BoxIndex, Cell)> + '_ {
        (1..=self.n).flat_map(move |i| {
            self.row(i)
                .iter()
                .enumerate()
                .map(move |(j, &c)| (BoxIndex::new(i, j + 1), c))
        })
    }

    /// Every rule violation; empty iff the tableau is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 1..=n {
            let d = BoxIndex::new(i, n + 1 - i);
            if self.at(d.i, d.j).is_empty() {
                out.push(Violation::EmptyDiagonal { at: d });
            }
        }
        for (b, c) in self.boxes() {
            if c.is_alpha_like() {
                for i2 in 1..b.i {
                    if !self.at(i2, b.j).is_empty() {
                        out.push(Violation::Column {
                            symbol: b,
                            blocker: BoxIndex::new(i2, b.j),
                        });
                    }
                }
            }
            if c.is_beta_like() {
                for j2 in 1..b.j {
                    if !self.at(b.i, j2).is_empty() {
                        out.push(Violation::Row {
                            symbol: b,
                            blocker: BoxIndex::new(b.i, j2),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// True when only Empty, Alpha and Beta occur.
    pub fn is_two_symbol(&self) -> bool {
        self.cells
            .iter()
            .all(|c| !matches!(c, Cell::Gamma | Cell::Delta))
    }

    pub fn symbol_counts(&self) -> SymbolCounts {
        let mut s = SymbolCounts::default();
        for c in &self.cells {
            match c {
                Cell::Alpha => s.n_alpha += 1,
                Cell::Beta => s.n_beta += 1,
                Cell::Gamma => s.n_gamma += 1,
                Cell::Delta => s.n_delta += 1,
                Cell::Empty => {}
            }
        }
        s
    }

    /// `S[i, j]`: drop the first `i - 1` rows and `j - 1` columns.
    pub fn subtableau(&self, i: usize, j: usize) -> Result<Tableau> {
        let b = BoxIndex::new(i, j);
        if !b.in_shape(self.n) {
            return Err(Error::BoxOutOfShape(b, self.n));
        }
        let m = self.n + 2 - i - j;
        Ok(Tableau::from_fn(m, |c| self.at(c.i + i - 1, c.j + j - 1)))
    }

    /// `(S)_{i,j}`: remove row `i` and column `j` and re-index. Fails unless
    /// what is left has shape `(n-1, ..., 1)`.
    pub fn delete_row_col(&self, row: usize, col: usize) -> Result<Tableau> {
        let n = self.n;
        let invalid = Error::InvalidDeletion { row, col, n };
        if n < 2 || row == 0 || col == 0 || row > n || col > n {
            return Err(invalid);
        }
        let rows: Vec<Vec<Cell>> = (1..=n)
            .filter(|&i| i != row)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j + 1 != col)
                    .map(|(_, &c)| c)
                    .collect()
            })
            .collect();
        Tableau::from_rows(rows).map_err(|_| invalid)
    }

    /// Rows become columns, Alpha ↔ Beta and Gamma ↔ Delta.
    pub fn transpose(&self) -> Tableau {
        Tableau::from_fn(self.n, |b| self.at(b.j, b.i).transposed())
    }

    /// Replace Gamma by Alpha and Delta by Beta.
    pub fn to_two_symbol(&self) -> Tableau {
        Tableau {
            n: self.n,
            cells: self.cells.iter().map(|c| c.two_symbol()).collect(),
        }
    }

    /// Contents of a diagonal, left to right.
    pub fn diagonal(&self, d: Diagonal) -> Vec<Cell> {
        d.boxes(self.n)
            .into_iter()
            .map(|b| self.at(b.i, b.j))
            .collect()
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.cells
    }

    pub(crate) fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Canonical text: `n`, then one line per row over `{A,B,G,D,.}`,
    /// every line newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.rows() {
            s.extend(row.iter().map(|c| c.to_char()));
            s.push('\n');
        }
        s
    }

    /// Parses the canonical text form (exactly one tableau).
    pub fn parse(text: &str) -> Result<Tableau> {
        let mut lines = text.split_inclusive('\n').enumerate();
        let t = parse_one(&mut lines)?;
        if let Some((k, _)) = lines.next() {
            return Err(Error::Parse {
                line: k + 1,
                msg: "trailing content after tableau".into(),
            });
        }
        Ok(t)
    }
}

/// Parses a concatenation of canonical records.
pub fn parse_records(text: &str) -> Result<Vec<Tableau>> {
    let mut lines = text.split_inclusive('\n').enumerate().peekable();
    let mut out = Vec::new();
    while lines.peek().is_some() {
        out.push(parse_one(&mut lines)?);
    }
    Ok(out)
}

fn parse_one<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Tableau> {
    let mut next_line = |expect: &str| -> Result<(usize, &'a str)> {
        let (k, raw) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {expect}"),
        })?;
        let body = raw.strip_suffix('\n').ok_or(Error::Parse {
            line: k + 1,
            msg: "line must end with a newline".into(),
        })?;
        Ok((k + 1, body))
    };
    let (ln, head) = next_line("size line")?;
    let n: usize = head
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 1 && head == n.to_string())
        .ok_or_else(|| Error::Parse {
            line: ln,
            msg: format!("expected a positive size, got {head:?}"),
        })?;
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        let (ln, body) = next_line("tableau row")?;
        let row = body
            .chars()
            .map(|c| {
                Cell::from_char(c).ok_or_else(|| Error::Parse {
                    line: ln,
                    msg: format!("unexpected character {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n + 1 - i {
            return Err(Error::Shape {
                row: i,
                expected: n + 1 - i,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    Tableau::from_rows(rows)
}

/// Checks a raw grid: shape first, then (if the shape is right) the rules.
pub fn check_rows(rows: &[Vec<Cell>]) -> Vec<Violation> {
    let shape = shape_violations(rows);
    if !shape.is_empty() {
        return shape;
    }
    Tableau::from_rows(rows.to_vec())
        .map(|t| t.validate())
        .unwrap_or_default()
}

fn shape_violations(rows: &[Vec<Cell>]) -> Vec<Violation> {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .filter(|(k, r)| r.len() != n - k)
        .map(|(k, r)| Violation::Shape {
            row: k + 1,
            expected: n - k,
            found: r.len(),
        })
        .collect()
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .map(|r| r.iter().map(|c| c.to_char()).collect())
            .collect();
        write!(f, "Tableau({})", rows.join("/"))
    }
}

impl FromStr for Tableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tableau::parse(s)
    }
}
