use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::complex_core::{CellId, LefschetzComplex};
use crate::error::{Error, Result};

/// A real-valued function on the cells of a complex, indexed by [`CellId`].
///
/// Nothing is checked on construction; use [`validate_dmf`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMorseFunction {
    values: Vec<f64>,
}

impl DiscreteMorseFunction {
    pub fn new(values: Vec<f64>) -> Self {
        DiscreteMorseFunction { values }
    }

    /// Builds a function from a name → value map, failing on the first cell
    /// without a value.
    pub fn from_map(x: &LefschetzComplex, map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(x.len());
        for c in x.cells() {
            let v = map
                .get(x.name(c))
                .ok_or_else(|| Error::MissingValue(x.name(c).to_string()))?;
            values.push(*v);
        }
        Ok(DiscreteMorseFunction { values })
    }

    #[inline]
    pub fn value(&self, c: CellId) -> f64 {
        self.values[c.index()]
    }

    pub fn set(&mut self, c: CellId, v: f64) {
        self.values[c.index()] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_map(&self, x: &LefschetzComplex) -> BTreeMap<String, f64> {
        x.cells()
            .map(|c| (x.name(c).to_string(), self.value(c)))
            .collect()
    }

    /// Largest absolute difference to another function on the same cells.
    pub fn max_abs_diff(&self, other: &DiscreteMorseFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise `(1 - t)·self + t·other`.
    pub fn lerp(&self, other: &DiscreteMorseFunction, t: f64) -> DiscreteMorseFunction {
        DiscreteMorseFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DmfViolation {
    NonFinite {
        cell: CellId,
    },
    /// `facet` is a facet of `cofacet` but has a larger value.
    WeakMonotonicity {
        facet: CellId,
        cofacet: CellId,
    },
    /// Two cells share a value without being facet-related.
    Pairing {
        x: CellId,
        y: CellId,
    },
    /// More than two cells share one value.
    AlmostInjective {
        cells: Vec<CellId>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DmfReport {
    pub violations: Vec<DmfViolation>,
}

impl DmfReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, x: &LefschetzComplex) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| match v {
                DmfViolation::NonFinite { cell } => {
                    format!("non-finite value at `{}`", x.name(*cell))
                }
                DmfViolation::WeakMonotonicity { facet, cofacet } => format!(
                    "weak monotonicity: h(`{}`) > h(`{}`)",
                    x.name(*facet),
                    x.name(*cofacet)
                ),
                DmfViolation::Pairing { x: a, y: b } => format!(
                    "pairing: `{}` and `{}` share a value but are not facet-related",
                    x.name(*a),
                    x.name(*b)
                ),
                DmfViolation::AlmostInjective { cells } => format!(
                    "almost injective: {} cells share a value ({})",
                    cells.len(),
                    cells
                        .iter()
                        .map(|c| format!("`{}`", x.name(*c)))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })
            .collect()
    }
}

/// Checks weak monotonicity, pairing and almost-injectivity.
pub fn validate_dmf(x: &LefschetzComplex, h: &DiscreteMorseFunction) -> Result<DmfReport> {
    if h.len() != x.len() {
        let c = x
            .cells()
            .nth(h.len())
            .map(|c| x.name(c).to_string())
            .unwrap_or_default();
        return Err(Error::MissingValue(c));
    }
    let mut violations = Vec::new();
    for c in x.cells() {
        if !h.value(c).is_finite() {
            violations.push(DmfViolation::NonFinite { cell: c });
        }
    }
    for y in x.cells() {
        for &f in x.facets(y) {
            if h.value(f) > h.value(y) {
                violations.push(DmfViolation::WeakMonotonicity {
                    facet: f,
                    cofacet: y,
                });
            }
        }
    }
    for class in level_sets(h) {
        if class.len() > 2 {
            violations.push(DmfViolation::AlmostInjective { cells: class });
        } else if class.len() == 2 {
            let (a, b) = (class[0], class[1]);
            if !x.is_facet(a, b) && !x.is_facet(b, a) {
                violations.push(DmfViolation::Pairing { x: a, y: b });
            }
        }
    }
    Ok(DmfReport { violations })
}

/// Groups cells by exactly equal value; groups come in increasing value order,
/// cells within a group in id order.
pub fn level_sets(h: &DiscreteMorseFunction) -> Vec<Vec<CellId>> {
    let mut ids: Vec<CellId> = (0..h.len() as u32).map(CellId).collect();
    ids.sort_by(|a, b| h.value(*a).total_cmp(&h.value(*b)).then(a.cmp(b)));
    let mut out: Vec<Vec<CellId>> = Vec::new();
    for c in ids {
        match out.last_mut() {
            Some(g) if h.value(g[0]) == h.value(c) => g.push(c),
            _ => out.push(vec![c]),
        }
    }
    for g in &mut out {
        g.sort();
    }
    out
}

/// The h-order: by value, ties broken by dimension (and by id, which only
/// matters for functions that are not discrete Morse functions).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HOrder {
    order: Vec<CellId>,
    position: Vec<usize>,
}

impl HOrder {
    pub fn new(x: &LefschetzComplex, h: &DiscreteMorseFunction) -> Self {
        let mut order: Vec<CellId> = x.cells().collect();
        order.sort_by(|a, b| h_cmp(x, h, *a, *b));
        Self::from_order(order)
    }

    pub fn from_order(order: Vec<CellId>) -> Self {
        let mut position = vec![0; order.len()];
        for (i, c) in order.iter().enumerate() {
            position[c.index()] = i;
        }
        HOrder { order, position }
    }

    pub fn order(&self) -> &[CellId] {
        &self.order
    }

    #[inline]
    pub fn position(&self, c: CellId) -> usize {
        self.position[c.index()]
    }

    pub fn at(&self, i: usize) -> CellId {
        self.order[i]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Swaps the cells at positions `i` and `i + 1`.
    pub fn swap_adjacent(&mut self, i: usize) {
        self.order.swap(i, i + 1);
        self.position[self.order[i].index()] = i;
        self.position[self.order[i + 1].index()] = i + 1;
    }

    pub fn less(&self, a: CellId, b: CellId) -> bool {
        self.position(a) < self.position(b)
    }
}

pub fn h_cmp(x: &LefschetzComplex, h: &DiscreteMorseFunction, a: CellId, b: CellId) -> Ordering {
    h.value(a)
        .total_cmp(&h.value(b))
        .then(x.dim(a).cmp(&x.dim(b)))
        .then(a.cmp(&b))
}

/// Maximal classes of cells that are connected in the Hasse diagram and on
/// which `f` is constant. Classes are sorted internally and by first cell.
pub fn induced_partition(x: &LefschetzComplex, f: &[f64]) -> Vec<Vec<CellId>> {
    let n = x.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for y in x.cells() {
        for &z in x.facets(y) {
            if f[z.index()] == f[y.index()] {
                let (a, b) = (find(&mut parent, z.index()), find(&mut parent, y.index()));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<CellId>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(CellId(i as u32));
    }
    let mut out: Vec<Vec<CellId>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}
