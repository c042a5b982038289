//! Small named complexes and random instance generators shared by the unit
//! tests, the property tests and the acceptance suite.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex_core::{CellId, DiscreteMorseFunction, LefschetzComplex};

/// `a, b, c, ab, bc, ca`.
pub fn hollow_triangle() -> LefschetzComplex {
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

/// Vertices `u, v` and the edge `e` between them.
pub fn segment() -> LefschetzComplex {
    LefschetzComplex::new(&[("u", 0, vec![]), ("v", 0, vec![]), ("e", 1, vec!["u", "v"])]).unwrap()
}

/// Simplicial complex generated by the given maximal simplices (vertex sets).
/// Cells are named by their sorted vertex lists, e.g. `0-2-3`.
pub fn simplicial_complex(maximal: &[Vec<usize>]) -> LefschetzComplex {
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    for s in maximal {
        let mut s = s.clone();
        s.sort();
        s.dedup();
        let k = s.len();
        for mask in 1u32..(1 << k) {
            all.insert(
                (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| s[i])
                    .collect(),
            );
        }
    }
    let mut cells: Vec<Vec<usize>> = all.into_iter().collect();
    cells.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    build_simplicial(&cells)
}

fn build_simplicial(cells: &[Vec<usize>]) -> LefschetzComplex {
    let index: std::collections::BTreeMap<&Vec<usize>, usize> =
        cells.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut dims = Vec::with_capacity(cells.len());
    let mut facets = Vec::with_capacity(cells.len());
    let mut names = Vec::with_capacity(cells.len());
    for s in cells {
        dims.push(s.len() - 1);
        names.push(
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("-"),
        );
        let mut fs = Vec::new();
        if s.len() > 1 {
            for skip in 0..s.len() {
                let f: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, v)| *v)
                    .collect();
                fs.push(index[&f]);
            }
        }
        facets.push(fs);
    }
    LefschetzComplex::from_named_indices(names, dims, facets).unwrap()
}

/// A random simplicial complex with at most `max_cells` cells (and at least
/// one), built from random maximal simplices of dimension up to `max_dim`.
pub fn random_complex<R: Rng>(rng: &mut R, max_cells: usize, max_dim: usize) -> LefschetzComplex {
    let nv = rng.gen_range(2..=7usize);
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    for v in 0..nv {
        all.insert(vec![v]);
    }
    for _ in 0..rng.gen_range(1..=8) {
        let k = rng.gen_range(2..=(max_dim + 1).min(nv));
        let mut vs: Vec<usize> = (0..nv).collect();
        vs.shuffle(rng);
        let mut s: Vec<usize> = vs[..k].to_vec();
        s.sort();
        let mut faces = Vec::new();
        for mask in 1u32..(1 << k) {
            faces.push(
                (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| s[i])
                    .collect::<Vec<_>>(),
            );
        }
        let new: Vec<_> = faces.into_iter().filter(|f| !all.contains(f)).collect();
        if all.len() + new.len() > max_cells {
            continue;
        }
        all.extend(new);
    }
    let mut cells: Vec<Vec<usize>> = all.into_iter().collect();
    cells.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    build_simplicial(&cells)
}

/// A random discrete Morse function: a random linear extension of the face
/// poset in which, with probability `p_vector`, a cell is immediately followed
/// by one of its cofacets and the two share a value.
pub fn random_dmf_with_vectors<R: Rng>(
    rng: &mut R,
    x: &LefschetzComplex,
    p_vector: f64,
) -> DiscreteMorseFunction {
    let n = x.len();
    let mut missing: Vec<usize> = x.cells().map(|c| x.facets(c).len()).collect();
    let mut ready: Vec<CellId> = x.cells().filter(|c| missing[c.index()] == 0).collect();
    let mut values = vec![0.0; n];
    let mut next_value = 0.0;
    let mut paired = vec![false; n];
    let place = |c: CellId, missing: &mut Vec<usize>, ready: &mut Vec<CellId>| {
        for &y in x.cofacets(c) {
            missing[y.index()] -= 1;
            if missing[y.index()] == 0 {
                ready.push(y);
            }
        }
    };
    while !ready.is_empty() {
        let i = rng.gen_range(0..ready.len());
        let c = ready.swap_remove(i);
        values[c.index()] = next_value;
        place(c, &mut missing, &mut ready);
        let mut vector_next = None;
        if !paired[c.index()] && rng.gen_bool(p_vector) {
            let opts: Vec<usize> = (0..ready.len())
                .filter(|&j| x.is_facet(c, ready[j]) && !paired[ready[j].index()])
                .collect();
            if let Some(&j) = opts.choose(rng) {
                vector_next = Some(j);
            }
        }
        if let Some(j) = vector_next {
            let y = ready.swap_remove(j);
            values[y.index()] = next_value;
            paired[c.index()] = true;
            paired[y.index()] = true;
            place(y, &mut missing, &mut ready);
        }
        next_value += 1.0;
    }
    DiscreteMorseFunction::new(values)
}

/// A random discrete Morse function whose vectors are exactly `vectors`,
/// which must form an acyclic matching (each pair a facet and its cofacet):
/// values are positions in a random topological order of the flow graph,
/// with each vector placed as one node.
pub fn function_for_matching<R: Rng>(
    rng: &mut R,
    x: &LefschetzComplex,
    vectors: &[(CellId, CellId)],
) -> DiscreteMorseFunction {
    let n = x.len();
    let mut node: Vec<usize> = (0..n).collect();
    for &(a, b) in vectors {
        node[b.index()] = a.index();
    }
    let mut members: Vec<Vec<CellId>> = vec![Vec::new(); n];
    for c in x.cells() {
        members[node[c.index()]].push(c);
    }
    let mut missing = vec![0usize; n];
    for c in x.cells() {
        missing[node[c.index()]] += x
            .facets(c)
            .iter()
            .filter(|z| node[z.index()] != node[c.index()])
            .count();
    }
    let mut ready: Vec<usize> = (0..n)
        .filter(|&i| !members[i].is_empty() && missing[i] == 0)
        .collect();
    let mut values = vec![0.0; n];
    let mut next_value = 0.0;
    while !ready.is_empty() {
        let i = ready.swap_remove(rng.gen_range(0..ready.len()));
        for &c in &members[i] {
            values[c.index()] = next_value;
            for &y in x.cofacets(c) {
                let j = node[y.index()];
                if j != i {
                    missing[j] -= 1;
                    if missing[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        next_value += 1.0;
    }
    DiscreteMorseFunction::new(values)
}

/// Random complex plus random function, as a shared pair.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_cells: usize,
    max_dim: usize,
    p_vector: f64,
) -> (Arc<LefschetzComplex>, DiscreteMorseFunction) {
    let x = random_complex(rng, max_cells, max_dim);
    let h = random_dmf_with_vectors(rng, &x, p_vector);
    (Arc::new(x), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::{induced_vector_field, validate_complex, validate_dmf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (x, h) = random_instance(&mut rng, 40, 3, 0.4);
            assert!(x.len() <= 40);
            assert!(validate_complex(&x).is_valid());
            assert!(validate_dmf(&x, &h).unwrap().is_valid());
            assert!(induced_vector_field(&x, &h).unwrap().is_gradient());
        }
    }

    #[test]
    fn simplicial_counts() {
        assert_eq!(simplicial_complex(&[vec![0, 1, 2]]).len(), 7);
        assert_eq!(simplicial_complex(&[vec![0, 1, 2, 3]]).len(), 15);
    }
}
