use crate::complex_core::{CellId, LefschetzComplex};

/// A dense bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBits {
    words: Vec<u64>,
}

impl DenseBits {
    pub fn zeros(n: usize) -> Self {
        DenseBits {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn xor(&mut self, other: &DenseBits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn highest(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate().rev() {
            if word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

pub(crate) struct DenseReduction {
    pub low: Vec<Option<usize>>,
    pub u: Vec<DenseBits>,
    pub v: Vec<DenseBits>,
}

/// Lazy reduction of the matrix with the given ordered rows and columns.
/// With `co` false the entries are `D(row, col)`, otherwise `D(col, row)`.
pub(crate) fn reduce(
    x: &LefschetzComplex,
    rows: &[CellId],
    cols: &[CellId],
    co: bool,
) -> DenseReduction {
    let mut row_index = std::collections::HashMap::new();
    for (i, &r) in rows.iter().enumerate() {
        row_index.insert(r, i);
    }
    let nc = cols.len();
    let mut r: Vec<DenseBits> = Vec::with_capacity(nc);
    let mut u: Vec<DenseBits> = Vec::with_capacity(nc);
    let mut v: Vec<DenseBits> = Vec::with_capacity(nc);
    let mut low = vec![None; nc];
    let mut pivot: Vec<Option<usize>> = vec![None; rows.len()];
    for (j, &c) in cols.iter().enumerate() {
        let mut col = DenseBits::zeros(rows.len());
        let nbrs = if co { x.cofacets(c) } else { x.facets(c) };
        for t in nbrs {
            if let Some(&i) = row_index.get(t) {
                col.flip(i);
            }
        }
        let mut uj = DenseBits::zeros(nc);
        uj.set(j);
        let mut vj = DenseBits::zeros(nc);
        vj.set(j);
        while let Some(l) = col.highest() {
            match pivot[l] {
                Some(p) => {
                    col.xor(&r[p]);
                    vj.xor(&v[p]);
                    uj.flip(p);
                }
                None => {
                    pivot[l] = Some(j);
                    low[j] = Some(l);
                    break;
                }
            }
        }
        r.push(col);
        u.push(uj);
        v.push(vj);
    }
    DenseReduction { low, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits() {
        let mut b = DenseBits::zeros(130);
        b.set(3);
        b.set(129);
        assert_eq!(b.highest(), Some(129));
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![3, 129]);
        b.flip(129);
        assert_eq!(b.highest(), Some(3));
        assert!(b.get(3) && !b.get(4));
    }
}
