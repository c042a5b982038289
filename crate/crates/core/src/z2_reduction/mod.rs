//! Sparse Z2 matrices, boundary and coboundary assembly in filter order, and
//! the lazy reduction `D = R·U` with `V = U⁻¹` tracked alongside.

mod sparse;

pub(crate) use sparse::low_of;
pub use sparse::{sym_diff, toggle, xor_assign, Z2SparseMatrix};

use crate::complex_core::{HOrder, LefschetzComplex};

/// `D_n` with rows the `(n-1)`-cells and columns the `n`-cells, both in
/// h-order. Local ids are the positions of cells within their dimension.
pub fn boundary_matrix(x: &LefschetzComplex, order: &HOrder, n: usize) -> Z2SparseMatrix {
    let rows = if n == 0 {
        &[][..]
    } else {
        x.cells_of_dim(n - 1)
    };
    let cols = x.cells_of_dim(n);
    let mut row_order: Vec<u32> = (0..rows.len() as u32).collect();
    row_order.sort_by_key(|&r| order.position(rows[r as usize]));
    let mut col_order: Vec<u32> = (0..cols.len() as u32).collect();
    col_order.sort_by_key(|&c| order.position(cols[c as usize]));
    let data = cols
        .iter()
        .map(|&c| {
            x.facets(c)
                .iter()
                .map(|&f| x.local_index(f) as u32)
                .collect()
        })
        .collect();
    Z2SparseMatrix::new(data, row_order, col_order, rows.to_vec(), cols.to_vec())
}

/// `D⊥_n`: the transpose of `D_{n+1}` with both orders reversed. Its columns
/// are the `n`-cells and its rows the `(n+1)`-cells.
pub fn coboundary_matrix(x: &LefschetzComplex, order: &HOrder, n: usize) -> Z2SparseMatrix {
    boundary_matrix(x, order, n + 1).transpose_reversed()
}

/// `R`, `U` and `V = U⁻¹` of a lazy reduction. `U` and `V` are indexed by the
/// columns of the reduced matrix on both axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTriple {
    pub r: Z2SparseMatrix,
    pub u: Z2SparseMatrix,
    pub v: Z2SparseMatrix,
}

/// Low of a column (last nonzero row in row order).
pub fn low(m: &Z2SparseMatrix, col: u32) -> Option<u32> {
    m.low(col)
}

/// Left-to-right lazy reduction: while the low of the current column is the
/// low of a preceding column `x`, add `R[:,x]` to it, set `U[x,y] = 1` and
/// mirror the addition on `V`.
pub fn lazy_reduce(d: &Z2SparseMatrix) -> ReductionTriple {
    let nc = d.ncols();
    let mut r = d.cols.clone();
    let mut u: Vec<Vec<u32>> = (0..nc as u32).map(|i| vec![i]).collect();
    let mut v: Vec<Vec<u32>> = u.clone();
    let mut pivot: Vec<Option<u32>> = vec![None; d.nrows()];
    for &y in &d.col_order {
        while let Some(l) = d.low_col(&r[y as usize]) {
            match pivot[l as usize] {
                Some(x) => {
                    let (rx, vx) = (r[x as usize].clone(), v[x as usize].clone());
                    xor_assign(&mut r[y as usize], &rx);
                    xor_assign(&mut v[y as usize], &vx);
                    toggle(&mut u[y as usize], x);
                }
                None => {
                    pivot[l as usize] = Some(y);
                    break;
                }
            }
        }
    }
    let mk = |cols: Vec<Vec<u32>>| {
        Z2SparseMatrix::new(
            cols,
            d.col_order.clone(),
            d.col_order.clone(),
            d.col_cells.clone(),
            d.col_cells.clone(),
        )
    };
    ReductionTriple {
        r: Z2SparseMatrix::new(
            r,
            d.row_order.clone(),
            d.col_order.clone(),
            d.row_cells.clone(),
            d.col_cells.clone(),
        ),
        u: mk(u),
        v: mk(v),
    }
}

impl Z2SparseMatrix {
    fn low_col(&self, col: &[u32]) -> Option<u32> {
        col.iter().copied().max_by_key(|&r| self.row_pos(r))
    }
}

/// True iff nonzero columns have pairwise distinct lows.
pub fn is_reduced(r: &Z2SparseMatrix) -> bool {
    let mut seen = vec![false; r.nrows()];
    for c in 0..r.ncols() as u32 {
        if let Some(l) = r.low(c) {
            if std::mem::replace(&mut seen[l as usize], true) {
                return false;
            }
        }
    }
    true
}

/// True iff `m` is upper triangular with unit diagonal in the column order.
pub fn is_unit_upper(m: &Z2SparseMatrix) -> bool {
    (0..m.ncols() as u32)
        .all(|c| m.get(c, c) && m.column(c).iter().all(|&r| m.row_pos(r) <= m.col_pos(c)))
}

/// Checks `D = R·U`, `R = D·V`, `U·V = I`, `R` reduced and `U`, `V` unit
/// upper triangular.
pub fn verify_decomposition(d: &Z2SparseMatrix, t: &ReductionTriple) -> bool {
    if t.r.ncols() != d.ncols()
        || t.r.nrows() != d.nrows()
        || t.u.ncols() != d.ncols()
        || t.v.ncols() != d.ncols()
    {
        return false;
    }
    if t.u.col_order != d.col_order || t.r.row_order != d.row_order {
        return false;
    }
    let ru = t.r.mul(&t.u);
    let dv = d.mul(&t.v);
    let uv = t.u.mul(&t.v);
    ru.cols == d.cols
        && dv.cols == t.r.cols
        && uv.cols == t.u.identity_on_columns().cols
        && is_reduced(&t.r)
        && is_unit_upper(&t.u)
        && is_unit_upper(&t.v)
}
