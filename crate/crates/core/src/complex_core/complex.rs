use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable cell handle: an index into the owning complex.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CellId(pub u32);

impl CellId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A cell as seen from outside: id, external name and dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: CellId,
    pub name: String,
    pub dim: usize,
}

/// A finite Lefschetz complex over Z2.
///
/// The boundary is stored as facet lists (coefficient 1 entries of `D`).
/// Construction only checks that references resolve; the dimension and
/// square-zero conditions are reported by [`validate_complex`].
#[derive(Clone, Debug, PartialEq)]
pub struct LefschetzComplex {
    names: Vec<String>,
    dims: Vec<usize>,
    facets: Vec<Vec<CellId>>,
    cofacets: Vec<Vec<CellId>>,
    index: BTreeMap<String, CellId>,
    by_dim: Vec<Vec<CellId>>,
    local: Vec<u32>,
}

impl LefschetzComplex {
    /// Builds a complex from `(name, dim, facet names)` triples. Facets may
    /// refer to cells listed later.
    pub fn new<S: AsRef<str>>(cells: &[(S, usize, Vec<S>)]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, (name, _, _)) in cells.iter().enumerate() {
            let name = name.as_ref();
            if index.insert(name.to_string(), CellId(i as u32)).is_some() {
                return Err(Error::DuplicateCell(name.to_string()));
            }
        }
        let mut facets = Vec::with_capacity(cells.len());
        for (name, _, fs) in cells {
            let mut ids = Vec::with_capacity(fs.len());
            for f in fs {
                let id = *index
                    .get(f.as_ref())
                    .ok_or_else(|| Error::UnknownCell(f.as_ref().to_string()))?;
                ids.push(id);
            }
            ids.sort();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!(
                    "cell `{}` lists a facet twice",
                    name.as_ref()
                )));
            }
            facets.push(ids);
        }
        let names = cells.iter().map(|c| c.0.as_ref().to_string()).collect();
        let dims = cells.iter().map(|c| c.1).collect();
        Ok(Self::assemble(names, dims, facets, index))
    }

    /// Builds a complex from raw dimensions and facet index lists. Cells are
    /// named by their index.
    pub fn from_indices(dims: Vec<usize>, facets: Vec<Vec<usize>>) -> Result<Self> {
        if dims.len() != facets.len() {
            return Err(Error::InvalidComplex("dims/facets length mismatch".into()));
        }
        let n = dims.len();
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), CellId(i as u32)))
            .collect();
        let mut fs = Vec::with_capacity(n);
        for (i, f) in facets.into_iter().enumerate() {
            let mut ids: Vec<CellId> = Vec::with_capacity(f.len());
            for j in f {
                if j >= n {
                    return Err(Error::UnknownCell(j.to_string()));
                }
                ids.push(CellId(j as u32));
            }
            ids.sort();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!(
                    "cell {i} lists a facet twice"
                )));
            }
            fs.push(ids);
        }
        Ok(Self::assemble(names, dims, fs, index))
    }

    /// Like [`LefschetzComplex::from_indices`] but with explicit names.
    pub fn from_named_indices(
        names: Vec<String>,
        dims: Vec<usize>,
        facets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut c = Self::from_indices(dims, facets)?;
        let mut index = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), CellId(i as u32)).is_some() {
                return Err(Error::DuplicateCell(name.clone()));
            }
        }
        if names.len() != c.len() {
            return Err(Error::InvalidComplex("names length mismatch".into()));
        }
        c.names = names;
        c.index = index;
        Ok(c)
    }

    fn assemble(
        names: Vec<String>,
        dims: Vec<usize>,
        facets: Vec<Vec<CellId>>,
        index: BTreeMap<String, CellId>,
    ) -> Self {
        let n = dims.len();
        let mut cofacets = vec![Vec::new(); n];
        for (y, fs) in facets.iter().enumerate() {
            for &x in fs {
                cofacets[x.index()].push(CellId(y as u32));
            }
        }
        let top = dims.iter().copied().max().map_or(0, |d| d + 1);
        let mut by_dim = vec![Vec::new(); top];
        let mut local = vec![0u32; n];
        for (i, &d) in dims.iter().enumerate() {
            local[i] = by_dim[d].len() as u32;
            by_dim[d].push(CellId(i as u32));
        }
        LefschetzComplex {
            names,
            dims,
            facets,
            cofacets,
            index,
            by_dim,
            local,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.len() as u32).map(CellId)
    }

    pub fn cell(&self, id: CellId) -> Cell {
        Cell {
            id,
            name: self.names[id.index()].clone(),
            dim: self.dims[id.index()],
        }
    }

    pub fn name(&self, id: CellId) -> &str {
        &self.names[id.index()]
    }

    pub fn id(&self, name: &str) -> Result<CellId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCell(name.to_string()))
    }

    #[inline]
    pub fn dim(&self, id: CellId) -> usize {
        self.dims[id.index()]
    }

    /// One more than the largest cell dimension (0 for the empty complex).
    pub fn num_dims(&self) -> usize {
        self.by_dim.len()
    }

    #[inline]
    pub fn facets(&self, id: CellId) -> &[CellId] {
        &self.facets[id.index()]
    }

    #[inline]
    pub fn cofacets(&self, id: CellId) -> &[CellId] {
        &self.cofacets[id.index()]
    }

    /// `D(x, y)`: 1 iff `x` is a facet of `y`.
    pub fn is_facet(&self, x: CellId, y: CellId) -> bool {
        self.facets[y.index()].binary_search(&x).is_ok()
    }

    /// Cells of dimension `d` in id order.
    pub fn cells_of_dim(&self, d: usize) -> &[CellId] {
        self.by_dim.get(d).map_or(&[], |v| v.as_slice())
    }

    /// Position of a cell among the cells of its dimension.
    #[inline]
    pub fn local_index(&self, id: CellId) -> usize {
        self.local[id.index()] as usize
    }
}

/// A single failed condition of the complex axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplexViolation {
    /// `facet` is listed on `cofacet` but dimensions do not differ by one.
    Dimension { facet: CellId, cofacet: CellId },
    /// `Σ_z D(x,z)·D(z,y) = 1`.
    SquareNonZero { x: CellId, y: CellId },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplexReport {
    pub violations: Vec<ComplexViolation>,
}

impl ComplexReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, x: &LefschetzComplex) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| match *v {
                ComplexViolation::Dimension { facet, cofacet } => format!(
                    "dimension: `{}` (dim {}) is a facet of `{}` (dim {})",
                    x.name(facet),
                    x.dim(facet),
                    x.name(cofacet),
                    x.dim(cofacet)
                ),
                ComplexViolation::SquareNonZero { x: a, y: b } => {
                    format!("square-zero: D·D(`{}`, `{}`) = 1", x.name(a), x.name(b))
                }
            })
            .collect()
    }
}

/// Checks the dimension and boundary-of-boundary conditions.
pub fn validate_complex(x: &LefschetzComplex) -> ComplexReport {
    let mut violations = Vec::new();
    for y in x.cells() {
        for &f in x.facets(y) {
            if x.dim(f) + 1 != x.dim(y) {
                violations.push(ComplexViolation::Dimension {
                    facet: f,
                    cofacet: y,
                });
            }
        }
    }
    for y in x.cells() {
        let mut odd: BTreeMap<CellId, bool> = BTreeMap::new();
        for &z in x.facets(y) {
            for &w in x.facets(z) {
                let e = odd.entry(w).or_insert(false);
                *e = !*e;
            }
        }
        for (w, o) in odd {
            if o {
                violations.push(ComplexViolation::SquareNonZero { x: w, y });
            }
        }
    }
    ComplexReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hollow_triangle() -> LefschetzComplex {
        LefschetzComplex::new(&[
            ("a", 0, vec![]),
            ("b", 0, vec![]),
            ("c", 0, vec![]),
            ("ab", 1, vec!["a", "b"]),
            ("bc", 1, vec!["b", "c"]),
            ("ca", 1, vec!["c", "a"]),
        ])
        .unwrap()
    }

    #[test]
    fn single_vertex_is_valid() {
        let x = LefschetzComplex::new(&[("v", 0, vec![])]).unwrap();
        assert!(validate_complex(&x).is_valid());
    }

    #[test]
    fn hollow_triangle_is_valid() {
        let x = hollow_triangle();
        assert!(validate_complex(&x).is_valid());
        assert_eq!(x.cofacets(x.id("a").unwrap()).len(), 2);
        assert!(x.is_facet(x.id("c").unwrap(), x.id("ca").unwrap()));
    }

    #[test]
    fn square_zero_violation_is_reported() {
        let x = LefschetzComplex::new(&[
            ("a", 0, vec![]),
            ("b", 0, vec![]),
            ("ab", 1, vec!["a"]),
            ("T", 2, vec!["ab"]),
        ])
        .unwrap();
        let r = validate_complex(&x);
        assert_eq!(
            r.violations,
            vec![ComplexViolation::SquareNonZero {
                x: x.id("a").unwrap(),
                y: x.id("T").unwrap()
            }]
        );
    }

    #[test]
    fn dimension_violation_is_reported() {
        let x = LefschetzComplex::new(&[("a", 0, vec![]), ("T", 2, vec!["a"])]).unwrap();
        assert_eq!(validate_complex(&x).violations.len(), 1);
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let e = LefschetzComplex::new(&[("ab", 1, vec!["a"])]).unwrap_err();
        assert_eq!(e, Error::UnknownCell("a".into()));
    }
}
