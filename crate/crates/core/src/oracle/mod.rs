//! Deliberately naive reference implementations used to certify the engine.
//!
//! Nothing here shares matrix code with the engine: reductions use dense bit
//! rows, path questions use explicit enumeration.

mod dense;

use std::collections::BTreeSet;
use std::fmt;

use crate::complex_core::{
    CellId, CombinatorialVectorField, DiscreteMorseFunction, GradientPath, HOrder, LefschetzComplex,
};
use crate::error::{Error, Result};
use crate::transposition_engine::{ReducedState, Role};

pub use dense::DenseBits;

/// Largest complex the dense oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 1 << 12;

/// Everything the oracle compares: the pairing and the entries of `U`, `V`,
/// `U⊥`, `V⊥` over all dimensions, keyed by cells (diagonal entries
/// included).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateView {
    pub pairs: BTreeSet<(CellId, Option<CellId>)>,
    pub u: BTreeSet<(CellId, CellId)>,
    pub v: BTreeSet<(CellId, CellId)>,
    pub u_dual: BTreeSet<(CellId, CellId)>,
    pub v_dual: BTreeSet<(CellId, CellId)>,
}

impl StateView {
    /// Reads the view off an engine state.
    pub fn of(state: &ReducedState) -> StateView {
        let x = state.complex();
        let mut view = StateView::default();
        for c in x.cells() {
            match state.role(c) {
                Role::Birth(d) => {
                    view.pairs.insert((c, Some(d)));
                }
                Role::Essential => {
                    view.pairs.insert((c, None));
                }
                Role::Death(_) => {}
            }
            for s in state.hom_sources(c) {
                view.u.insert((s, c));
            }
            view.u.insert((c, c));
            for s in state.cohom_sources(c) {
                view.u_dual.insert((s, c));
            }
            view.u_dual.insert((c, c));
            for s in state.v_column(c) {
                view.v.insert((s, c));
            }
            for s in state.v_dual_column(c) {
                view.v_dual.insert((s, c));
            }
        }
        view
    }
}

/// Differences between two views, each entry tagged with the side that has
/// it (`true`: engine only, `false`: oracle only).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateDiff {
    pub pairs: Vec<((CellId, Option<CellId>), bool)>,
    pub u: Vec<((CellId, CellId), bool)>,
    pub v: Vec<((CellId, CellId), bool)>,
    pub u_dual: Vec<((CellId, CellId), bool)>,
    pub v_dual: Vec<((CellId, CellId), bool)>,
    /// Critical cells whose values differ: `(cell, engine, oracle)`.
    pub values: Vec<(CellId, f64, f64)>,
}

fn diff_sets<T: Ord + Copy>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Vec<(T, bool)> {
    a.difference(b)
        .map(|&t| (t, true))
        .chain(b.difference(a).map(|&t| (t, false)))
        .collect()
}

impl StateDiff {
    pub fn between(engine: &StateView, oracle: &StateView) -> StateDiff {
        StateDiff {
            pairs: diff_sets(&engine.pairs, &oracle.pairs),
            u: diff_sets(&engine.u, &oracle.u),
            v: diff_sets(&engine.v, &oracle.v),
            u_dual: diff_sets(&engine.u_dual, &oracle.u_dual),
            v_dual: diff_sets(&engine.v_dual, &oracle.v_dual),
            values: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
            && self.u.is_empty()
            && self.v.is_empty()
            && self.u_dual.is_empty()
            && self.v_dual.is_empty()
            && self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
            + self.u.len()
            + self.v.len()
            + self.u_dual.len()
            + self.v_dual.len()
            + self.values.len()
    }
}

impl fmt::Display for StateDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pairs {}, U {}, V {}, U⊥ {}, V⊥ {}, values {}",
            self.pairs.len(),
            self.u.len(),
            self.v.len(),
            self.u_dual.len(),
            self.v_dual.len(),
            self.values.len()
        )
    }
}

/// From-scratch reduction of all `D_n` and `D⊥_n` for the given order.
pub fn brute_reduce_order(x: &LefschetzComplex, order: &HOrder) -> Result<StateView> {
    if x.len() > ORACLE_MAX_CELLS {
        return Err(Error::OracleScale(format!(
            "{} cells (limit {})",
            x.len(),
            ORACLE_MAX_CELLS
        )));
    }
    let mut view = StateView::default();
    let mut by_dim: Vec<Vec<CellId>> = vec![Vec::new(); x.num_dims() + 1];
    for &c in order.order() {
        by_dim[x.dim(c)].push(c);
    }
    let mut death_of: Vec<Option<CellId>> = vec![None; x.len()];
    let mut is_death = vec![false; x.len()];
    for n in 0..x.num_dims() {
        // primal: columns n-cells in h-order, rows (n-1)-cells in h-order
        let cols = &by_dim[n];
        let rows: &[CellId] = if n == 0 { &[] } else { &by_dim[n - 1] };
        let red = dense::reduce(x, rows, cols, false);
        for (j, &y) in cols.iter().enumerate() {
            if let Some(l) = red.low[j] {
                death_of[rows[l].index()] = Some(y);
                is_death[y.index()] = true;
            }
            for i in red.u[j].ones() {
                view.u.insert((cols[i], y));
            }
            for i in red.v[j].ones() {
                view.v.insert((cols[i], y));
            }
        }
    }
    for n in 0..x.num_dims() {
        // dual: columns n-cells in reversed order, rows (n+1)-cells reversed
        let cols: Vec<CellId> = by_dim[n].iter().rev().copied().collect();
        let rows: Vec<CellId> = by_dim[n + 1].iter().rev().copied().collect();
        let red = dense::reduce(x, &rows, &cols, true);
        for (j, &y) in cols.iter().enumerate() {
            if let Some(l) = red.low[j] {
                if death_of[y.index()] != Some(rows[l]) {
                    return Err(Error::Internal(format!(
                        "oracle primal/dual pairing mismatch at `{}`",
                        x.name(y)
                    )));
                }
            }
            for i in red.u[j].ones() {
                view.u_dual.insert((cols[i], y));
            }
            for i in red.v[j].ones() {
                view.v_dual.insert((cols[i], y));
            }
        }
    }
    for c in x.cells() {
        if !is_death[c.index()] {
            view.pairs.insert((c, death_of[c.index()]));
        }
    }
    Ok(view)
}

/// From-scratch reduction for the h-order of `h`.
pub fn brute_reduce(x: &LefschetzComplex, h: &DiscreteMorseFunction) -> Result<StateView> {
    brute_reduce_order(x, &HOrder::new(x, h))
}

/// Compares an engine state with a from-scratch reduction of its order.
pub fn diff_state(state: &ReducedState) -> Result<StateDiff> {
    let oracle = brute_reduce_order(state.complex(), state.order())?;
    Ok(StateDiff::between(&StateView::of(state), &oracle))
}

/// Budget for explicit path enumeration (visited path prefixes).
pub const PATH_BUDGET: usize = 1 << 20;

/// All gradient paths from `y` to `x` by depth-first enumeration.
pub fn brute_paths(
    v: &CombinatorialVectorField,
    y: CellId,
    x: CellId,
) -> Result<Vec<GradientPath>> {
    let cx = v.complex();
    if cx.len() > ORACLE_MAX_CELLS {
        return Err(Error::OracleScale(format!("{} cells", cx.len())));
    }
    let mut out = Vec::new();
    let mut steps = 0usize;
    let mut path = vec![y];
    fn go(
        v: &CombinatorialVectorField,
        x: CellId,
        path: &mut Vec<CellId>,
        out: &mut Vec<GradientPath>,
        steps: &mut usize,
    ) -> Result<()> {
        *steps += 1;
        if *steps > PATH_BUDGET {
            return Err(Error::OracleScale(
                "path enumeration budget exceeded".into(),
            ));
        }
        let c = *path.last().unwrap();
        if c == x {
            out.push(GradientPath {
                cells: path.clone(),
            });
            return Ok(());
        }
        if path.len() > v.complex().len() {
            return Err(Error::NotAcyclic);
        }
        let next: Vec<CellId> = {
            let cx = v.complex();
            let mut s: Vec<CellId> = cx.facets(c).to_vec();
            s.extend_from_slice(cx.cofacets(c));
            s.into_iter().filter(|&t| is_arc(v, c, t)).collect()
        };
        for t in next {
            path.push(t);
            go(v, x, path, out, steps)?;
            path.pop();
        }
        Ok(())
    }
    go(v, x, &mut path, &mut out, &mut steps)?;
    Ok(out)
}

/// Arc test written directly from the definition of `G_V`.
fn is_arc(v: &CombinatorialVectorField, from: CellId, to: CellId) -> bool {
    let cx = v.complex();
    let vector = |a: CellId, b: CellId| v.partner(a) == Some(b) && cx.is_facet(a, b);
    if cx.is_facet(from, to) {
        vector(from, to)
    } else if cx.is_facet(to, from) {
        !vector(to, from)
    } else {
        false
    }
}

/// Cells reachable from `start` in `G_V`, by breadth-first search over the
/// arc definition.
pub fn brute_reachable(v: &CombinatorialVectorField, start: CellId) -> BTreeSet<CellId> {
    let cx = v.complex();
    let mut seen = BTreeSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for &t in cx.facets(c).iter().chain(cx.cofacets(c)) {
            if is_arc(v, c, t) && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Forbidden regions evaluated straight from their definition: every
/// related off-diagonal pair and every reachable critical cell gives a
/// closed quadrant, with no staircase simplification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BruteRegion {
    pub death: Vec<(f64, f64)>,
    pub birth: Vec<(f64, f64)>,
}

impl BruteRegion {
    pub fn in_death(&self, x: f64, y: f64) -> bool {
        self.death.iter().any(|&(a, b)| x <= a && y <= b)
    }

    pub fn in_birth(&self, x: f64, y: f64) -> bool {
        self.birth.iter().any(|&(c, d)| x >= c && y >= d)
    }
}

/// Regions of the pair `(b, d)` from a from-scratch reduction of the
/// state's order and brute-force reachability in `v`.
pub fn brute_region(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    b: CellId,
    d: CellId,
) -> Result<BruteRegion> {
    let x = state.complex();
    let view = brute_reduce_order(x, state.order())?;
    let pair_point = |c: CellId| -> Option<(f64, f64)> {
        view.pairs.iter().find_map(|&(pb, pd)| match pd {
            Some(pd) if pb == c || pd == c => {
                let (vb, vd) = (h.value(pb), h.value(pd));
                (vb != vd).then_some((vb, vd))
            }
            _ => None,
        })
    };
    let mut out = BruteRegion::default();
    for &(s, t) in &view.u {
        if t == d && s != d {
            out.death.extend(pair_point(s));
        }
    }
    for &(s, t) in &view.u_dual {
        if t == b && s != b {
            out.birth.extend(pair_point(s));
        }
    }
    let down = brute_reachable(v, d);
    for c in x.cells() {
        if c == b || c == d || !v.is_critical(c) {
            continue;
        }
        if down.contains(&c) {
            out.death.push((h.value(c), h.value(c)));
        }
        if brute_reachable(v, c).contains(&b) {
            out.birth.push((h.value(c), h.value(c)));
        }
    }
    Ok(out)
}
