//! One boundary (or coboundary) matrix with its lazy reduction, maintained
//! under swaps of adjacent columns and adjacent rows.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::complex_core::CellId;
use crate::z2_reduction::{low_of, sym_diff, toggle, xor_assign, ReductionTriple, Z2SparseMatrix};

/// What a column swap did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColumnSwap {
    /// Whether the later column had the earlier one in its `U` column.
    pub coupled: bool,
    /// Columns whose reduction was recomputed.
    pub recomputed: Vec<u32>,
}

/// What a row swap did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RowSwap {
    /// `(db, da)` when the update fired: row `db` of `U` received row `da`,
    /// and columns `da` of `R` and `V` received columns `db`.
    pub update: Option<(u32, u32)>,
    /// A column whose low moved from the second row to the first without
    /// any other change.
    pub low_moved: Option<u32>,
}

/// Lazy reduction `D = R·U`, `R = D·V` of one matrix, kept up to date while
/// adjacent rows or columns of `D` are transposed.
///
/// Columns of `R`, `U` and `V` are sorted id lists; `U` is also stored by
/// rows so that the users of a column (columns it was added into) are known.
#[derive(Clone, Debug)]
pub struct IncrementalReduction {
    d: Vec<Vec<u32>>,
    row_order: Vec<u32>,
    row_pos: Vec<u32>,
    col_order: Vec<u32>,
    col_pos: Vec<u32>,
    r: Vec<Vec<u32>>,
    low: Vec<Option<u32>>,
    pivot: Vec<Option<u32>>,
    u_col: Vec<Vec<u32>>,
    u_row: Vec<Vec<u32>>,
    v: Vec<Vec<u32>>,
    row_cells: Vec<CellId>,
    col_cells: Vec<CellId>,
}

impl IncrementalReduction {
    pub fn new(d: &Z2SparseMatrix) -> Self {
        let nc = d.ncols();
        let nr = d.nrows();
        let mut m = IncrementalReduction {
            d: d.cols.clone(),
            row_order: d.row_order.clone(),
            row_pos: (0..nr as u32).map(|r| d.row_pos(r)).collect(),
            col_order: d.col_order.clone(),
            col_pos: (0..nc as u32).map(|c| d.col_pos(c)).collect(),
            r: vec![Vec::new(); nc],
            low: vec![None; nc],
            pivot: vec![None; nr],
            u_col: (0..nc as u32).map(|c| vec![c]).collect(),
            u_row: (0..nc as u32).map(|c| vec![c]).collect(),
            v: (0..nc as u32).map(|c| vec![c]).collect(),
            row_cells: d.row_cells.clone(),
            col_cells: d.col_cells.clone(),
        };
        for i in 0..nc {
            let c = m.col_order[i];
            m.reduce(c);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.row_order.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_order.len()
    }

    pub fn row_cell(&self, r: u32) -> CellId {
        self.row_cells[r as usize]
    }

    pub fn col_cell(&self, c: u32) -> CellId {
        self.col_cells[c as usize]
    }

    pub fn col_order(&self) -> &[u32] {
        &self.col_order
    }

    pub fn row_order(&self) -> &[u32] {
        &self.row_order
    }

    #[inline]
    pub fn col_pos(&self, c: u32) -> usize {
        self.col_pos[c as usize] as usize
    }

    #[inline]
    pub fn row_pos(&self, r: u32) -> usize {
        self.row_pos[r as usize] as usize
    }

    #[inline]
    pub fn low(&self, c: u32) -> Option<u32> {
        self.low[c as usize]
    }

    /// The column whose low is row `r`, if any.
    #[inline]
    pub fn pivot(&self, r: u32) -> Option<u32> {
        self.pivot[r as usize]
    }

    pub fn d_col(&self, c: u32) -> &[u32] {
        &self.d[c as usize]
    }

    pub fn r_col(&self, c: u32) -> &[u32] {
        &self.r[c as usize]
    }

    pub fn u_col(&self, c: u32) -> &[u32] {
        &self.u_col[c as usize]
    }

    /// Columns `z` with `U[x, z] = 1` (including `x`).
    pub fn u_row(&self, x: u32) -> &[u32] {
        &self.u_row[x as usize]
    }

    pub fn v_col(&self, c: u32) -> &[u32] {
        &self.v[c as usize]
    }

    pub fn u(&self, x: u32, y: u32) -> bool {
        self.u_col[y as usize].binary_search(&x).is_ok()
    }

    pub fn r(&self, row: u32, c: u32) -> bool {
        self.r[c as usize].binary_search(&row).is_ok()
    }

    /// Recomputes column `y` from `D[:, y]`, using the pivots of columns
    /// preceding it.
    fn reduce(&mut self, y: u32) {
        let yi = y as usize;
        let py = self.col_pos[yi];
        let mut c = self.d[yi].clone();
        let mut u = vec![y];
        let mut v = vec![y];
        while let Some(l) = low_of(&c, &self.row_pos) {
            match self.pivot[l as usize] {
                Some(x) if x != y && self.col_pos[x as usize] < py => {
                    xor_assign(&mut c, &self.r[x as usize]);
                    toggle(&mut u, x);
                    xor_assign(&mut v, &self.v[x as usize]);
                }
                _ => break,
            }
        }
        if let Some(l) = self.low[yi] {
            if self.pivot[l as usize] == Some(y) {
                self.pivot[l as usize] = None;
            }
        }
        self.low[yi] = low_of(&c, &self.row_pos);
        if let Some(l) = self.low[yi] {
            self.pivot[l as usize] = Some(y);
        }
        self.r[yi] = c;
        self.v[yi] = v;
        self.set_u_col(y, u);
    }

    fn set_u_col(&mut self, y: u32, new: Vec<u32>) {
        let diff = sym_diff(&self.u_col[y as usize], &new);
        for x in diff {
            toggle(&mut self.u_row[x as usize], y);
        }
        self.u_col[y as usize] = new;
    }

    /// Swaps the columns at positions `i` and `i + 1` of the column order.
    ///
    /// Nothing changes unless the later column `c2` had `c1` added into it.
    /// Otherwise both columns are reduced again in their new order and every
    /// column downstream of a changed one is re-reduced in order.
    pub fn swap_cols(&mut self, i: usize) -> ColumnSwap {
        let (c1, c2) = (self.col_order[i], self.col_order[i + 1]);
        self.col_order.swap(i, i + 1);
        self.col_pos[c1 as usize] = i as u32 + 1;
        self.col_pos[c2 as usize] = i as u32;
        if !self.u(c1, c2) {
            return ColumnSwap::default();
        }
        let mut users: Vec<u32> = self.u_row[c1 as usize]
            .iter()
            .chain(&self.u_row[c2 as usize])
            .copied()
            .filter(|&z| z != c1 && z != c2)
            .collect();
        users.sort_unstable();
        users.dedup();
        for c in [c1, c2] {
            if let Some(l) = self.low[c as usize] {
                if self.pivot[l as usize] == Some(c) {
                    self.pivot[l as usize] = None;
                }
            }
        }
        self.reduce(c2);
        self.reduce(c1);
        let mut changed = vec![false; self.ncols()];
        changed[c1 as usize] = true;
        changed[c2 as usize] = true;
        let mut recomputed = vec![c2, c1];
        let mut seen = vec![false; self.ncols()];
        let mut heap = BinaryHeap::new();
        for z in users {
            seen[z as usize] = true;
            heap.push(Reverse((self.col_pos[z as usize], z)));
        }
        while let Some(Reverse((_, z))) = heap.pop() {
            if !self.u_col[z as usize].iter().any(|&w| changed[w as usize]) {
                continue;
            }
            let old_r = self.r[z as usize].clone();
            let old_v = self.v[z as usize].clone();
            let downstream: Vec<u32> = self.u_row[z as usize]
                .iter()
                .copied()
                .filter(|&w| w != z)
                .collect();
            self.reduce(z);
            recomputed.push(z);
            if self.r[z as usize] != old_r || self.v[z as usize] != old_v {
                changed[z as usize] = true;
                for w in downstream {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        heap.push(Reverse((self.col_pos[w as usize], w)));
                    }
                }
            }
        }
        ColumnSwap {
            coupled: true,
            recomputed,
        }
    }

    /// Swaps the rows at positions `i` and `i + 1` of the row order.
    ///
    /// With `r1` the row moving up and `r2` the row moving down, let `a`, `b`
    /// be the columns with lows `r1`, `r2`. When both exist, `da` is the later
    /// of the two and `db` the earlier. The update fires when `r1` is in
    /// `R[:, b]`, or, if `a` is the later column, when `U[b, a] = 1`. Firing
    /// adds row `da` of `U` into row `db` and columns `db` of `R` and `V` into
    /// columns `da`; lows are then re-read, which is where a pairing switch
    /// shows up.
    pub fn swap_rows(&mut self, i: usize) -> RowSwap {
        let (r1, r2) = (self.row_order[i], self.row_order[i + 1]);
        self.row_order.swap(i, i + 1);
        self.row_pos[r1 as usize] = i as u32 + 1;
        self.row_pos[r2 as usize] = i as u32;
        let Some(b) = self.pivot[r2 as usize] else {
            return RowSwap::default();
        };
        let Some(a) = self.pivot[r1 as usize] else {
            if self.r(r1, b) {
                self.pivot[r2 as usize] = None;
                self.pivot[r1 as usize] = Some(b);
                self.low[b as usize] = Some(r1);
                return RowSwap {
                    update: None,
                    low_moved: Some(b),
                };
            }
            return RowSwap::default();
        };
        let (da, db, fire) = if self.col_pos[a as usize] < self.col_pos[b as usize] {
            (b, a, self.r(r1, b))
        } else {
            (a, b, self.u(b, a) || self.r(r1, b))
        };
        if !fire {
            return RowSwap::default();
        }
        let targets = self.u_row[da as usize].clone();
        for &z in &targets {
            toggle(&mut self.u_col[z as usize], db);
        }
        xor_assign(&mut self.u_row[db as usize], &targets);
        let vdb = self.v[db as usize].clone();
        xor_assign(&mut self.v[da as usize], &vdb);
        let rdb = self.r[db as usize].clone();
        xor_assign(&mut self.r[da as usize], &rdb);
        self.pivot[r1 as usize] = None;
        self.pivot[r2 as usize] = None;
        for c in [a, b] {
            let l = low_of(&self.r[c as usize], &self.row_pos);
            self.low[c as usize] = l;
            if let Some(l) = l {
                self.pivot[l as usize] = Some(c);
            }
        }
        RowSwap {
            update: Some((db, da)),
            low_moved: None,
        }
    }

    /// Current `D`, `R`, `U`, `V` as plain matrices.
    pub fn snapshot(&self) -> (Z2SparseMatrix, ReductionTriple) {
        let d = Z2SparseMatrix::new(
            self.d.clone(),
            self.row_order.clone(),
            self.col_order.clone(),
            self.row_cells.clone(),
            self.col_cells.clone(),
        );
        let sq = |cols: Vec<Vec<u32>>| {
            Z2SparseMatrix::new(
                cols,
                self.col_order.clone(),
                self.col_order.clone(),
                self.col_cells.clone(),
                self.col_cells.clone(),
            )
        };
        let r = Z2SparseMatrix::new(
            self.r.clone(),
            self.row_order.clone(),
            self.col_order.clone(),
            self.row_cells.clone(),
            self.col_cells.clone(),
        );
        (
            d,
            ReductionTriple {
                r,
                u: sq(self.u_col.clone()),
                v: sq(self.v.clone()),
            },
        )
    }

    /// Internal consistency of the cached lows, pivots and `U` rows.
    pub fn check_caches(&self) -> bool {
        for c in 0..self.ncols() as u32 {
            let l = low_of(&self.r[c as usize], &self.row_pos);
            if l != self.low[c as usize] {
                return false;
            }
            if let Some(l) = l {
                if self.pivot[l as usize] != Some(c) {
                    return false;
                }
            }
        }
        for r in 0..self.nrows() as u32 {
            if let Some(c) = self.pivot[r as usize] {
                if self.low[c as usize] != Some(r) {
                    return false;
                }
            }
        }
        for x in 0..self.ncols() as u32 {
            for &z in &self.u_row[x as usize] {
                if !self.u(x, z) {
                    return false;
                }
            }
        }
        let total_rows: usize = self.u_row.iter().map(|r| r.len()).sum();
        let total_cols: usize = self.u_col.iter().map(|c| c.len()).sum();
        total_rows == total_cols
    }
}
