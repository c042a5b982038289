use std::sync::Arc;

use crate::complex_core::{CellId, DiscreteMorseFunction, HOrder, LefschetzComplex};
use crate::error::{Error, Result};
use crate::transposition_engine::{ColumnSwap, IncrementalReduction, RowSwap};
use crate::z2_reduction::{boundary_matrix, coboundary_matrix};

/// Role of a cell in the persistence pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// A birth cell, with its death cell.
    Birth(CellId),
    /// A death cell, with its birth cell.
    Death(CellId),
    /// A birth cell without a death (an essential class).
    Essential,
}

impl Role {
    pub fn partner(self) -> Option<CellId> {
        match self {
            Role::Birth(c) | Role::Death(c) => Some(c),
            Role::Essential => None,
        }
    }

    pub fn is_death(self) -> bool {
        matches!(self, Role::Death(_))
    }

    pub fn is_birth(self) -> bool {
        !self.is_death()
    }
}

/// Effect of transposing two h-adjacent cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellSwap {
    /// The cell that came first before the swap.
    pub lower: CellId,
    /// The cell that came second before the swap.
    pub upper: CellId,
    pub same_dim: bool,
    /// Column swap in `D_n`.
    pub primal_cols: ColumnSwap,
    /// Row swap in `D_{n+1}`.
    pub primal_rows: RowSwap,
    /// Column swap in `D⊥_n`.
    pub dual_cols: ColumnSwap,
    /// Row swap in `D⊥_{n-1}`.
    pub dual_rows: RowSwap,
    pub switched: bool,
}

impl CellSwap {
    /// Whether any reduction changed.
    pub fn is_eventful(&self) -> bool {
        self.primal_cols.coupled
            || self.dual_cols.coupled
            || self.primal_rows != RowSwap::default()
            || self.dual_rows != RowSwap::default()
            || self.switched
    }
}

/// Summary of a reordering by adjacent transpositions.
#[derive(Clone, Debug, Default)]
pub struct Reordering {
    pub swaps: usize,
    pub same_dim_swaps: usize,
    /// Swaps that changed some reduction.
    pub events: Vec<CellSwap>,
}

impl Reordering {
    pub fn switched(&self) -> bool {
        self.events.iter().any(|e| e.switched)
    }
}

/// Reductions of `D_n` and `D⊥_n` for every dimension, for one total order
/// of the cells, kept exact under adjacent transpositions.
///
/// `primal[n]` reduces `D_n` (rows `(n-1)`-cells, columns `n`-cells) in
/// h-order; `dual[n]` reduces `D⊥_n` (rows `(n+1)`-cells, columns `n`-cells)
/// in reversed h-order.
#[derive(Clone, Debug)]
pub struct ReducedState {
    complex: Arc<LefschetzComplex>,
    order: HOrder,
    primal: Vec<IncrementalReduction>,
    dual: Vec<IncrementalReduction>,
}

impl ReducedState {
    /// Reduces all matrices for the given total order. The order must be a
    /// linear extension of the face poset.
    pub fn new(complex: Arc<LefschetzComplex>, order: HOrder) -> Result<Self> {
        for y in complex.cells() {
            for &f in complex.facets(y) {
                if !order.less(f, y) {
                    return Err(Error::BadTransposition(format!(
                        "order puts `{}` before its facet `{}`",
                        complex.name(y),
                        complex.name(f)
                    )));
                }
            }
        }
        let dims = complex.num_dims();
        let primal = (0..dims)
            .map(|n| IncrementalReduction::new(&boundary_matrix(&complex, &order, n)))
            .collect();
        let dual = (0..dims)
            .map(|n| IncrementalReduction::new(&coboundary_matrix(&complex, &order, n)))
            .collect();
        Ok(ReducedState {
            complex,
            order,
            primal,
            dual,
        })
    }

    pub fn from_dmf(complex: Arc<LefschetzComplex>, h: &DiscreteMorseFunction) -> Result<Self> {
        let order = HOrder::new(&complex, h);
        Self::new(complex, order)
    }

    pub fn complex(&self) -> &Arc<LefschetzComplex> {
        &self.complex
    }

    pub fn order(&self) -> &HOrder {
        &self.order
    }

    pub fn primal(&self, n: usize) -> Option<&IncrementalReduction> {
        self.primal.get(n)
    }

    pub fn dual(&self, n: usize) -> Option<&IncrementalReduction> {
        self.dual.get(n)
    }

    #[inline]
    fn loc(&self, c: CellId) -> u32 {
        self.complex.local_index(c) as u32
    }

    fn cell(&self, dim: usize, local: u32) -> CellId {
        self.complex.cells_of_dim(dim)[local as usize]
    }

    pub fn role(&self, c: CellId) -> Role {
        let n = self.complex.dim(c);
        if let Some(l) = self.primal[n].low(self.loc(c)) {
            return Role::Death(self.cell(n - 1, l));
        }
        if let Some(p) = self.primal.get(n + 1) {
            if let Some(d) = p.pivot(self.loc(c)) {
                return Role::Birth(self.cell(n + 1, d));
            }
        }
        Role::Essential
    }

    /// Role read off the dual reductions instead.
    pub fn dual_role(&self, c: CellId) -> Role {
        let n = self.complex.dim(c);
        if let Some(l) = self.dual[n].low(self.loc(c)) {
            return Role::Birth(self.cell(n + 1, l));
        }
        if n > 0 {
            if let Some(b) = self.dual[n - 1].pivot(self.loc(c)) {
                return Role::Death(self.cell(n - 1, b));
            }
        }
        Role::Essential
    }

    /// `(birth, death)` pairs and essential births, ordered by birth.
    pub fn pairs(&self) -> Vec<(CellId, Option<CellId>)> {
        let mut out: Vec<(CellId, Option<CellId>)> = self
            .complex
            .cells()
            .filter_map(|c| match self.role(c) {
                Role::Birth(d) => Some((c, Some(d))),
                Role::Essential => Some((c, None)),
                Role::Death(_) => None,
            })
            .collect();
        out.sort_by_key(|(b, _)| self.order.position(*b));
        out
    }

    /// Checks that primal and dual reductions induce the same pairing.
    pub fn check_duality(&self) -> Result<()> {
        for c in self.complex.cells() {
            if self.role(c) != self.dual_role(c) {
                return Err(Error::Internal(format!(
                    "primal/dual pairing mismatch at `{}`: {:?} vs {:?}",
                    self.complex.name(c),
                    self.role(c),
                    self.dual_role(c)
                )));
            }
        }
        Ok(())
    }

    /// `U[x, y]` for same-dimension cells (the reduction of `D_n`).
    pub fn u(&self, x: CellId, y: CellId) -> bool {
        let n = self.complex.dim(x);
        n == self.complex.dim(y) && self.primal[n].u(self.loc(x), self.loc(y))
    }

    /// `U⊥[x, y]` for same-dimension cells (the reduction of `D⊥_n`).
    pub fn u_dual(&self, x: CellId, y: CellId) -> bool {
        let n = self.complex.dim(x);
        n == self.complex.dim(y) && self.dual[n].u(self.loc(x), self.loc(y))
    }

    /// `V[x, y]` of `D_n`.
    pub fn v(&self, x: CellId, y: CellId) -> bool {
        let n = self.complex.dim(x);
        n == self.complex.dim(y)
            && self.primal[n]
                .v_col(self.loc(y))
                .binary_search(&self.loc(x))
                .is_ok()
    }

    /// `R_n[x, y]` with `x` an `(n-1)`-cell and `y` an `n`-cell.
    pub fn r(&self, x: CellId, y: CellId) -> bool {
        let n = self.complex.dim(y);
        n > 0 && self.complex.dim(x) + 1 == n && self.primal[n].r(self.loc(x), self.loc(y))
    }

    /// Cells `x ≠ y` with `U[x, y] = 1` (homological relations into `y`).
    pub fn hom_sources(&self, y: CellId) -> Vec<CellId> {
        let n = self.complex.dim(y);
        let ly = self.loc(y);
        self.primal[n]
            .u_col(ly)
            .iter()
            .filter(|&&x| x != ly)
            .map(|&x| self.cell(n, x))
            .collect()
    }

    /// Cells `x ≠ y` with `U⊥[x, y] = 1` (cohomological relations into `y`).
    pub fn cohom_sources(&self, y: CellId) -> Vec<CellId> {
        let n = self.complex.dim(y);
        let ly = self.loc(y);
        self.dual[n]
            .u_col(ly)
            .iter()
            .filter(|&&x| x != ly)
            .map(|&x| self.cell(n, x))
            .collect()
    }

    /// Cells `z ≠ x` with `U[x, z] = 1`.
    pub fn hom_targets(&self, x: CellId) -> Vec<CellId> {
        let n = self.complex.dim(x);
        let lx = self.loc(x);
        self.primal[n]
            .u_row(lx)
            .iter()
            .filter(|&&z| z != lx)
            .map(|&z| self.cell(n, z))
            .collect()
    }

    /// Cells `z ≠ x` with `U⊥[x, z] = 1`.
    pub fn cohom_targets(&self, x: CellId) -> Vec<CellId> {
        let n = self.complex.dim(x);
        let lx = self.loc(x);
        self.dual[n]
            .u_row(lx)
            .iter()
            .filter(|&&z| z != lx)
            .map(|&z| self.cell(n, z))
            .collect()
    }

    /// Column `y` of `V` for `D_n`, as cells.
    pub fn v_column(&self, y: CellId) -> Vec<CellId> {
        let n = self.complex.dim(y);
        self.primal[n]
            .v_col(self.loc(y))
            .iter()
            .map(|&x| self.cell(n, x))
            .collect()
    }

    /// Column `y` of `V⊥` for `D⊥_n`, as cells.
    pub fn v_dual_column(&self, y: CellId) -> Vec<CellId> {
        let n = self.complex.dim(y);
        self.dual[n]
            .v_col(self.loc(y))
            .iter()
            .map(|&x| self.cell(n, x))
            .collect()
    }

    /// Transposes the cells at order positions `i` and `i + 1`.
    pub fn transpose(&mut self, i: usize) -> Result<CellSwap> {
        if i + 1 >= self.order.len() {
            return Err(Error::BadTransposition(format!(
                "position {i} has no successor"
            )));
        }
        let (x, y) = (self.order.at(i), self.order.at(i + 1));
        if self.complex.is_facet(x, y) {
            return Err(Error::BadTransposition(format!(
                "`{}` is a facet of `{}`",
                self.complex.name(x),
                self.complex.name(y)
            )));
        }
        let mut rep = CellSwap {
            lower: x,
            upper: y,
            ..Default::default()
        };
        let n = self.complex.dim(x);
        if n != self.complex.dim(y) {
            self.order.swap_adjacent(i);
            return Ok(rep);
        }
        rep.same_dim = true;
        let before = (self.role(x), self.role(y));
        let (lx, ly) = (self.loc(x), self.loc(y));
        let p = &mut self.primal[n];
        let cp = p.col_pos(lx);
        debug_assert_eq!(p.col_order()[cp + 1], ly);
        rep.primal_cols = p.swap_cols(cp);
        if let Some(p) = self.primal.get_mut(n + 1) {
            let rp = p.row_pos(lx);
            rep.primal_rows = p.swap_rows(rp);
        }
        let q = &mut self.dual[n];
        let cq = q.col_pos(ly);
        debug_assert_eq!(q.col_order()[cq + 1], lx);
        rep.dual_cols = q.swap_cols(cq);
        if n > 0 {
            let q = &mut self.dual[n - 1];
            let rq = q.row_pos(ly);
            rep.dual_rows = q.swap_rows(rq);
        }
        self.order.swap_adjacent(i);
        rep.switched = before != (self.role(x), self.role(y));
        Ok(rep)
    }

    /// Reorders to `target` by adjacent transpositions of inverted pairs
    /// (insertion sort), so facet-related cells are never swapped when both
    /// orders are linear extensions of the face poset.
    pub fn reorder(&mut self, target: &HOrder) -> Result<Reordering> {
        let n = self.order.len();
        if target.len() != n {
            return Err(Error::BadTransposition(
                "target order has the wrong length".into(),
            ));
        }
        let mut rep = Reordering::default();
        let lo = (0..n).find(|&i| self.order.at(i) != target.at(i));
        let Some(lo) = lo else { return Ok(rep) };
        let hi = (0..n)
            .rev()
            .find(|&i| self.order.at(i) != target.at(i))
            .unwrap();
        for i in lo..=hi {
            let mut j = i;
            while j > lo
                && target.position(self.order.at(j - 1)) > target.position(self.order.at(j))
            {
                let s = self.transpose(j - 1)?;
                rep.swaps += 1;
                if s.same_dim {
                    rep.same_dim_swaps += 1;
                }
                if s.is_eventful() {
                    rep.events.push(s);
                }
                j -= 1;
            }
        }
        debug_assert_eq!(self.order.order(), target.order());
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn triangle_roles() {
        let x = Arc::new(fixtures::hollow_triangle());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let s = ReducedState::from_dmf(x.clone(), &h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        assert_eq!(s.role(id("b")), Role::Birth(id("ab")));
        assert_eq!(s.role(id("bc")), Role::Death(id("c")));
        assert_eq!(s.role(id("a")), Role::Essential);
        assert_eq!(s.role(id("ca")), Role::Essential);
        s.check_duality().unwrap();
        assert_eq!(s.hom_sources(id("ca")), vec![id("ab"), id("bc")]);
        assert!(s.u(id("ab"), id("ca")));
    }

    #[test]
    fn random_transpositions_match_oracle() {
        use crate::oracle::diff_state;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let (x, h) = fixtures::random_instance(&mut rng, 40, 3, 0.3);
            let mut s = ReducedState::from_dmf(x.clone(), &h).unwrap();
            for _ in 0..25 {
                let i = rng.gen_range(0..x.len() - 1);
                let (a, b) = (s.order().at(i), s.order().at(i + 1));
                if x.is_facet(a, b) {
                    continue;
                }
                s.transpose(i).unwrap();
                let d = diff_state(&s).unwrap();
                assert!(d.is_empty(), "{d}");
                s.check_duality().unwrap();
            }
        }
    }

    #[test]
    fn facet_swap_is_refused() {
        let x = Arc::new(fixtures::segment());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2.]);
        let mut s = ReducedState::from_dmf(x, &h).unwrap();
        assert!(s.transpose(1).is_err());
        assert!(s.transpose(0).is_ok());
    }
}
