use serde::{Deserialize, Serialize};

use crate::complex_core::CellId;

/// Symmetric difference of two sorted id lists.
pub fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `a ← a Δ b` on sorted id lists.
pub fn xor_assign(a: &mut Vec<u32>, b: &[u32]) {
    if b.is_empty() {
        return;
    }
    *a = sym_diff(a, b);
}

/// Toggles one id in a sorted list.
pub fn toggle(a: &mut Vec<u32>, x: u32) {
    match a.binary_search(&x) {
        Ok(i) => {
            a.remove(i);
        }
        Err(i) => a.insert(i, x),
    }
}

/// A sparse matrix over Z2.
///
/// Rows and columns are keyed by stable local ids `0..nrows` and `0..ncols`;
/// each column stores its nonzero row ids sorted by id. The governing orders
/// are kept as separate permutations, so reordering never relabels entries.
/// `row_cells` and `col_cells` map local ids back to cells of the complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z2SparseMatrix {
    pub cols: Vec<Vec<u32>>,
    pub row_order: Vec<u32>,
    pub col_order: Vec<u32>,
    pub row_cells: Vec<CellId>,
    pub col_cells: Vec<CellId>,
    #[serde(skip)]
    row_pos: Vec<u32>,
    #[serde(skip)]
    col_pos: Vec<u32>,
}

fn inverse(order: &[u32]) -> Vec<u32> {
    let mut pos = vec![0; order.len()];
    for (i, &x) in order.iter().enumerate() {
        pos[x as usize] = i as u32;
    }
    pos
}

impl Z2SparseMatrix {
    /// Builds a matrix; columns are sorted and checked against the row count.
    pub fn new(
        mut cols: Vec<Vec<u32>>,
        row_order: Vec<u32>,
        col_order: Vec<u32>,
        row_cells: Vec<CellId>,
        col_cells: Vec<CellId>,
    ) -> Self {
        assert_eq!(cols.len(), col_order.len());
        assert_eq!(row_cells.len(), row_order.len());
        assert_eq!(col_cells.len(), col_order.len());
        for c in &mut cols {
            c.sort_unstable();
            debug_assert!(c.windows(2).all(|w| w[0] < w[1]));
            debug_assert!(c.iter().all(|&r| (r as usize) < row_order.len()));
        }
        let row_pos = inverse(&row_order);
        let col_pos = inverse(&col_order);
        Z2SparseMatrix {
            cols,
            row_order,
            col_order,
            row_cells,
            col_cells,
            row_pos,
            col_pos,
        }
    }

    /// Square identity-ordered matrix for unlabelled use (tests, random input).
    pub fn from_columns(nrows: usize, cols: Vec<Vec<u32>>) -> Self {
        let nc = cols.len();
        Self::new(
            cols,
            (0..nrows as u32).collect(),
            (0..nc as u32).collect(),
            (0..nrows as u32).map(CellId).collect(),
            (0..nc as u32).map(CellId).collect(),
        )
    }

    /// Identity matrix indexed by the columns of `self` on both axes.
    pub fn identity_on_columns(&self) -> Self {
        let n = self.ncols();
        Self::new(
            (0..n as u32).map(|i| vec![i]).collect(),
            self.col_order.clone(),
            self.col_order.clone(),
            self.col_cells.clone(),
            self.col_cells.clone(),
        )
    }

    /// Rebuilds the cached inverse permutations (after deserialization).
    pub fn reindex(&mut self) {
        self.row_pos = inverse(&self.row_order);
        self.col_pos = inverse(&self.col_order);
    }

    pub fn nrows(&self) -> usize {
        self.row_order.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_order.len()
    }

    #[inline]
    pub fn row_pos(&self, r: u32) -> u32 {
        self.row_pos[r as usize]
    }

    #[inline]
    pub fn col_pos(&self, c: u32) -> u32 {
        self.col_pos[c as usize]
    }

    pub fn column(&self, c: u32) -> &[u32] {
        &self.cols[c as usize]
    }

    pub fn get(&self, r: u32, c: u32) -> bool {
        self.cols[c as usize].binary_search(&r).is_ok()
    }

    /// Last row (in row order) with a nonzero entry in column `c`.
    pub fn low(&self, c: u32) -> Option<u32> {
        low_of(&self.cols[c as usize], &self.row_pos)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// The transpose with both orders reversed.
    pub fn transpose_reversed(&self) -> Self {
        let mut cols = vec![Vec::new(); self.nrows()];
        for (c, rows) in self.cols.iter().enumerate() {
            for &r in rows {
                cols[r as usize].push(c as u32);
            }
        }
        let mut row_order = self.col_order.clone();
        row_order.reverse();
        let mut col_order = self.row_order.clone();
        col_order.reverse();
        Self::new(
            cols,
            row_order,
            col_order,
            self.col_cells.clone(),
            self.row_cells.clone(),
        )
    }

    /// `self · other`, where the rows of `other` are the columns of `self`.
    pub fn mul(&self, other: &Z2SparseMatrix) -> Z2SparseMatrix {
        assert_eq!(self.ncols(), other.nrows());
        let cols = other
            .cols
            .iter()
            .map(|oc| {
                let mut acc = Vec::new();
                for &k in oc {
                    xor_assign(&mut acc, &self.cols[k as usize]);
                }
                acc
            })
            .collect();
        Z2SparseMatrix::new(
            cols,
            self.row_order.clone(),
            other.col_order.clone(),
            self.row_cells.clone(),
            other.col_cells.clone(),
        )
    }

    /// Nonzero entries as `(row, col)` local ids.
    pub fn entries(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.nnz());
        for (c, rows) in self.cols.iter().enumerate() {
            for &r in rows {
                out.push((r, c as u32));
            }
        }
        out
    }

    /// Dense rendering in governing order, for debugging and documents.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.ncols()]; self.nrows()];
        for (c, rows) in self.cols.iter().enumerate() {
            for &r in rows {
                m[self.row_pos(r) as usize][self.col_pos(c as u32) as usize] = 1;
            }
        }
        m
    }
}

#[inline]
pub(crate) fn low_of(col: &[u32], row_pos: &[u32]) -> Option<u32> {
    col.iter().copied().max_by_key(|&r| row_pos[r as usize])
}
