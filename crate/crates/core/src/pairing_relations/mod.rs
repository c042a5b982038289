//! Birth-death pairs, homological and cohomological relations, shallow
//! pairs, Lefschetz cancellation and quadrant clearing.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex_core::{
    CellId, CombinatorialVectorField, DiscreteMorseFunction, LefschetzComplex,
};
use crate::error::{Error, Result};
use crate::transposition_engine::{ReducedState, Role};
use crate::z2_reduction::Z2SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    OffDiagonal,
    Diagonal,
    Essential,
}

/// A birth-death pair; `death` is absent for essential classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BirthDeathPair {
    pub birth: CellId,
    pub death: Option<CellId>,
    pub dim: usize,
}

impl BirthDeathPair {
    pub fn class(&self, h: &DiscreteMorseFunction) -> PairClass {
        match self.death {
            None => PairClass::Essential,
            Some(d) if h.value(d) == h.value(self.birth) => PairClass::Diagonal,
            Some(_) => PairClass::OffDiagonal,
        }
    }

    pub fn is_off_diagonal(&self, h: &DiscreteMorseFunction) -> bool {
        self.class(h) == PairClass::OffDiagonal
    }

    /// `h(d) - h(b)`, infinite for essential classes.
    pub fn persistence(&self, h: &DiscreteMorseFunction) -> f64 {
        match self.death {
            Some(d) => h.value(d) - h.value(self.birth),
            None => f64::INFINITY,
        }
    }
}

/// All pairs of a reduced state, ordered by birth in the current order.
/// Primal and dual pairings are cross-checked.
pub fn extract_pairs(state: &ReducedState) -> Result<Vec<BirthDeathPair>> {
    state.check_duality()?;
    let x = state.complex();
    Ok(state
        .pairs()
        .into_iter()
        .map(|(b, d)| BirthDeathPair {
            birth: b,
            death: d,
            dim: x.dim(b),
        })
        .collect())
}

/// The pair containing cell `c`.
pub fn pair_of(state: &ReducedState, c: CellId) -> BirthDeathPair {
    let dim_of = |b: CellId| state.complex().dim(b);
    match state.role(c) {
        Role::Birth(d) => BirthDeathPair {
            birth: c,
            death: Some(d),
            dim: dim_of(c),
        },
        Role::Death(b) => BirthDeathPair {
            birth: b,
            death: Some(c),
            dim: dim_of(b),
        },
        Role::Essential => BirthDeathPair {
            birth: c,
            death: None,
            dim: dim_of(c),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    Hom,
    Cohom,
}

/// `x → y` for `U[x, y] = 1` (hom) or `U⊥[x, y] = 1` (cohom), `x ≠ y`.
pub fn relation(state: &ReducedState, x: CellId, y: CellId, kind: RelationKind) -> bool {
    x != y
        && match kind {
            RelationKind::Hom => state.u(x, y),
            RelationKind::Cohom => state.u_dual(x, y),
        }
}

/// All off-diagonal entries of `U` and `U⊥`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationGraph {
    pub hom: BTreeSet<(CellId, CellId)>,
    pub cohom: BTreeSet<(CellId, CellId)>,
}

impl RelationGraph {
    pub fn of(state: &ReducedState) -> RelationGraph {
        let mut g = RelationGraph::default();
        for y in state.complex().cells() {
            for x in state.hom_sources(y) {
                g.hom.insert((x, y));
            }
            for x in state.cohom_sources(y) {
                g.cohom.insert((x, y));
            }
        }
        g
    }

    /// Relations between pairs: `β → α` when `d_β →× d_α` or `b_β →∘ b_α`.
    pub fn pair_relations(
        &self,
        state: &ReducedState,
    ) -> BTreeSet<(BirthDeathPair, BirthDeathPair, RelationKind)> {
        let mut out = BTreeSet::new();
        for &(x, y) in &self.hom {
            out.insert((pair_of(state, x), pair_of(state, y), RelationKind::Hom));
        }
        for &(x, y) in &self.cohom {
            out.insert((pair_of(state, x), pair_of(state, y), RelationKind::Cohom));
        }
        out
    }
}

/// Pairs `β` with `β → α`, each with the kind of the relation.
/// Relations arrive through `U[:, d_α]` and `U⊥[:, b_α]`.
pub fn incoming(
    state: &ReducedState,
    alpha: &BirthDeathPair,
) -> Vec<(BirthDeathPair, RelationKind)> {
    let mut out = Vec::new();
    // an essential class has no death column; its cycle column (the birth)
    // records the homological relations instead
    for x in state.hom_sources(alpha.death.unwrap_or(alpha.birth)) {
        out.push((pair_of(state, x), RelationKind::Hom));
    }
    for x in state.cohom_sources(alpha.birth) {
        out.push((pair_of(state, x), RelationKind::Cohom));
    }
    out
}

/// No `β → α` at cell level.
pub fn is_shallow(state: &ReducedState, alpha: &BirthDeathPair) -> bool {
    incoming(state, alpha).is_empty()
}

/// Every `β → α` is a vector of the field.
pub fn is_critical_shallow(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    alpha: &BirthDeathPair,
) -> bool {
    incoming(state, alpha)
        .iter()
        .all(|(b, _)| !v.is_critical(b.birth))
}

/// Quotient of a complex by a Lefschetz cancellation of `(s, t)`.
#[derive(Clone, Debug)]
pub struct QuotientComplex {
    pub base: Arc<LefschetzComplex>,
    pub removed: (CellId, CellId),
    /// The quotient itself; cells keep their names.
    pub complex: LefschetzComplex,
    /// Quotient cell of each base cell (`None` for `s` and `t`).
    pub map: Vec<Option<CellId>>,
}

impl QuotientComplex {
    /// Base cell of each quotient cell.
    pub fn preimage(&self) -> Vec<CellId> {
        let mut out = vec![CellId(0); self.complex.len()];
        for (i, m) in self.map.iter().enumerate() {
            if let Some(q) = m {
                out[q.index()] = CellId(i as u32);
            }
        }
        out
    }

    /// Restricts a function on the base to the quotient.
    pub fn restrict(&self, h: &DiscreteMorseFunction) -> DiscreteMorseFunction {
        DiscreteMorseFunction::new(self.preimage().iter().map(|&c| h.value(c)).collect())
    }
}

/// `D̂(x, y) = D(x, y) + D(s, y)·D(x, t)` on `X \ {s, t}`.
pub fn lefschetz_cancel(
    base: &Arc<LefschetzComplex>,
    s: CellId,
    t: CellId,
) -> Result<QuotientComplex> {
    let x = base;
    if !x.is_facet(s, t) {
        return Err(Error::NotAFacet {
            facet: x.name(s).to_string(),
            cofacet: x.name(t).to_string(),
        });
    }
    let mut map = vec![None; x.len()];
    let mut k = 0u32;
    for c in x.cells() {
        if c != s && c != t {
            map[c.index()] = Some(CellId(k));
            k += 1;
        }
    }
    let mut names = Vec::new();
    let mut dims = Vec::new();
    let mut facets = Vec::new();
    for y in x.cells() {
        if y == s || y == t {
            continue;
        }
        let mut fs: BTreeSet<CellId> = x.facets(y).iter().copied().collect();
        if x.is_facet(s, y) {
            for &f in x.facets(t) {
                if !fs.remove(&f) {
                    fs.insert(f);
                }
            }
        }
        fs.remove(&s);
        fs.remove(&t);
        names.push(x.name(y).to_string());
        dims.push(x.dim(y));
        facets.push(fs.iter().map(|f| map[f.index()].unwrap().index()).collect());
    }
    let complex = LefschetzComplex::from_named_indices(names, dims, facets)?;
    Ok(QuotientComplex {
        base: base.clone(),
        removed: (s, t),
        complex,
        map,
    })
}

/// Column-major working copy of `D_{n+1}` with cancelled rows and columns
/// zeroed in place.
struct Working {
    cols: Vec<Vec<u32>>,
    row_pos: Vec<usize>,
    col_pos: Vec<usize>,
    dead_rows: Vec<bool>,
    dead_cols: Vec<bool>,
}

impl Working {
    fn low(&self, c: u32) -> Option<u32> {
        self.cols[c as usize]
            .iter()
            .copied()
            .max_by_key(|&r| self.row_pos[r as usize])
    }

    /// First live column (in column order) with an entry in row `r`.
    fn first_in_row(&self, r: u32) -> Option<u32> {
        (0..self.cols.len() as u32)
            .filter(|&c| {
                !self.dead_cols[c as usize] && self.cols[c as usize].binary_search(&r).is_ok()
            })
            .min_by_key(|&c| self.col_pos[c as usize])
    }

    fn is_apparent(&self, b: u32, d: u32) -> bool {
        self.low(d) == Some(b) && self.first_in_row(b) == Some(d)
    }

    fn cancel(&mut self, b: u32, d: u32) {
        let dcol = self.cols[d as usize].clone();
        for y in 0..self.cols.len() {
            if y as u32 != d && self.cols[y].binary_search(&b).is_ok() {
                crate::z2_reduction::xor_assign(&mut self.cols[y], &dcol);
            }
        }
        for col in &mut self.cols {
            if let Ok(i) = col.binary_search(&b) {
                col.remove(i);
            }
        }
        self.cols[d as usize].clear();
        self.dead_rows[b as usize] = true;
        self.dead_cols[d as usize] = true;
    }
}

/// `D^{α,β}_{n+1}`: the matrix `D_{n+1}` after Lefschetz cancellation of all
/// pairs in the bottom-right quadrants of `α` and of `β` (excluding `α` and
/// `β` themselves), always cancelling a currently shallow pair of least
/// persistence, measured as distance in the current order. Cancelled rows
/// and columns are left in place as zeros.
pub fn clear_quadrant(
    state: &ReducedState,
    alpha: &BirthDeathPair,
    beta: Option<&BirthDeathPair>,
) -> Result<Z2SparseMatrix> {
    let x = state.complex();
    let n = alpha.dim;
    let p = state
        .primal(n + 1)
        .ok_or_else(|| Error::CriterionHypotheses("no cells one dimension up".into()))?;
    let (d, _) = p.snapshot();
    let order = state.order();
    let pos = |c: CellId| order.position(c);
    let in_quadrant = |g: &BirthDeathPair, of: &BirthDeathPair| -> bool {
        match (g.death, of.death) {
            (Some(gd), Some(od)) => pos(g.birth) > pos(of.birth) && pos(gd) < pos(od),
            _ => false,
        }
    };
    let skip: Vec<BirthDeathPair> = std::iter::once(*alpha).chain(beta.copied()).collect();
    let mut targets: Vec<BirthDeathPair> = extract_pairs(state)?
        .into_iter()
        .filter(|g| g.dim == n && g.death.is_some() && !skip.contains(g))
        .filter(|g| in_quadrant(g, alpha) || beta.is_some_and(|b| in_quadrant(g, b)))
        .collect();
    let mut w = Working {
        cols: d.cols.clone(),
        row_pos: (0..d.nrows() as u32)
            .map(|r| d.row_pos(r) as usize)
            .collect(),
        col_pos: (0..d.ncols() as u32)
            .map(|c| d.col_pos(c) as usize)
            .collect(),
        dead_rows: vec![false; d.nrows()],
        dead_cols: vec![false; d.ncols()],
    };
    let local = |c: CellId| x.local_index(c) as u32;
    while !targets.is_empty() {
        let mut best: Option<usize> = None;
        for (i, g) in targets.iter().enumerate() {
            if w.is_apparent(local(g.birth), local(g.death.unwrap())) {
                let better = match best {
                    None => true,
                    Some(j) => {
                        let span = |p: &BirthDeathPair| pos(p.death.unwrap()) - pos(p.birth);
                        let (a, b) = (span(g), span(&targets[j]));
                        a < b || (a == b && pos(g.birth) < pos(targets[j].birth))
                    }
                };
                if better {
                    best = Some(i);
                }
            }
        }
        let Some(i) = best else {
            return Err(Error::Internal(format!(
                "quadrant clearing stuck with {} pairs left, none shallow",
                targets.len()
            )));
        };
        let g = targets.swap_remove(i);
        w.cancel(local(g.birth), local(g.death.unwrap()));
    }
    Ok(Z2SparseMatrix::new(
        w.cols,
        d.row_order.clone(),
        d.col_order.clone(),
        d.row_cells.clone(),
        d.col_cells.clone(),
    ))
}
