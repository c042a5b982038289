//! Pre-allowed moves: raising a birth or lowering a death together with the
//! non-critical cells that must travel with it.

use serde::{Deserialize, Serialize};

use crate::complex_core::{
    CellId, CombinatorialVectorField, DiscreteMorseFunction, LefschetzComplex,
};
use crate::error::{Error, Result};
use crate::pairing_relations::BirthDeathPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Raise the birth.
    Right,
    /// Lower the death.
    Down,
}

/// One move of `alpha`. For `Right`, `h(b) < δ < ξ < h(d)` and the birth is
/// taken to `δ`; for `Down`, `h(b) < ξ < δ < h(d)` and the death is taken to
/// `δ`. No cell has a value in the closed interval between `δ` and `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveSpec {
    pub direction: Direction,
    pub birth: CellId,
    pub death: CellId,
    pub delta: f64,
    pub xi: f64,
    /// The critical cell passed by the move, if any.
    pub bypassed: Option<CellId>,
}

impl MoveSpec {
    pub fn pair(&self) -> (CellId, CellId) {
        (self.birth, self.death)
    }
}

/// A move applied: the new function and the cells whose values changed.
#[derive(Clone, Debug)]
pub struct AppliedMove {
    pub h: DiscreteMorseFunction,
    pub relocated: Vec<CellId>,
}

fn pair_cells(alpha: &BirthDeathPair) -> Result<(CellId, CellId)> {
    alpha
        .death
        .map(|d| (alpha.birth, d))
        .ok_or_else(|| Error::InvalidMove("essential pair".into()))
}

/// Criticals strictly between two values.
fn criticals_between(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    lo: f64,
    hi: f64,
) -> Vec<CellId> {
    v.criticals()
        .into_iter()
        .filter(|&c| lo < h.value(c) && h.value(c) < hi)
        .collect()
}

fn check_move(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    mv: &MoveSpec,
) -> Result<()> {
    let (b, d) = mv.pair();
    let (hb, hd) = (h.value(b), h.value(d));
    let (lo, hi, e_lo, e_hi) = match mv.direction {
        Direction::Right => (mv.delta, mv.xi, hb, mv.delta),
        Direction::Down => (mv.xi, mv.delta, mv.delta, hd),
    };
    if !(hb < lo && lo < hi && hi < hd) {
        return Err(Error::InvalidMove(format!(
            "need h(b) < {} < {} < h(d), got {hb} < {lo} < {hi} < {hd}",
            if mv.direction == Direction::Right {
                "delta"
            } else {
                "xi"
            },
            if mv.direction == Direction::Right {
                "xi"
            } else {
                "delta"
            },
        )));
    }
    if h.values().iter().any(|&t| lo <= t && t <= hi) {
        return Err(Error::InvalidMove(format!(
            "the interval [{lo}, {hi}] is not empty"
        )));
    }
    let passed = criticals_between(v, h, e_lo, e_hi);
    if passed.len() > 1 {
        return Err(Error::InvalidMove(format!(
            "{} critical cells would be bypassed",
            passed.len()
        )));
    }
    if let Some(&e) = passed.first() {
        let blocked = match mv.direction {
            Direction::Right => v.flows_to(e, b),
            Direction::Down => v.flows_to(d, e),
        };
        if blocked {
            let x = v.complex();
            return Err(Error::InvalidMove(format!(
                "bypassed `{}` is joined to the pair by a path",
                x.name(e)
            )));
        }
    }
    Ok(())
}

/// Cells relocated by a move: those joined to the moving cell by a path
/// inside the window, closed under cofacets (right) or facets (down) in the
/// window and under vector partners. Errors if the closure reaches another
/// critical cell.
fn relocation_set(
    x: &LefschetzComplex,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    mv: &MoveSpec,
    lo: f64,
    hi: f64,
) -> Result<Vec<CellId>> {
    let (b, d) = mv.pair();
    let (mover, joined) = match mv.direction {
        Direction::Right => (b, v.reaching(b)),
        Direction::Down => (d, v.reachable_from(d)),
    };
    let in_window = |c: CellId| lo <= h.value(c) && h.value(c) <= hi;
    let mut take = vec![false; x.len()];
    let mut stack = Vec::new();
    for c in x.cells() {
        if joined[c.index()] && in_window(c) && (c == mover || !v.is_critical(c)) {
            take[c.index()] = true;
            stack.push(c);
        }
    }
    while let Some(c) = stack.pop() {
        let near = match mv.direction {
            Direction::Right => x.cofacets(c),
            Direction::Down => x.facets(c),
        };
        for &z in near.iter().chain(v.partner(c).as_ref()) {
            if take[z.index()] || !in_window(z) {
                continue;
            }
            if v.is_critical(z) {
                return Err(Error::Blocked(format!(
                    "moving `{}` would drag critical `{}`",
                    x.name(mover),
                    x.name(z)
                )));
            }
            take[z.index()] = true;
            stack.push(z);
        }
    }
    Ok(x.cells().filter(|c| take[c.index()]).collect())
}

/// The new values must separate the relocated groups and keep every
/// relocated cell strictly ordered against its other neighbours, so that
/// `out` is a discrete Morse function inducing `v`. The target interval is
/// empty of other values, so no other level set can be hit. `moved` is
/// sorted by old value.
fn check_local(
    v: &CombinatorialVectorField,
    out: &DiscreteMorseFunction,
    moved: &[CellId],
) -> Result<()> {
    let x = v.complex();
    let too_close = || Error::Blocked("values too close to separate".into());
    for w in moved.windows(2) {
        let (p, q) = (out.value(w[0]), out.value(w[1]));
        if p > q || (p == q && v.partner(w[0]) != Some(w[1])) {
            return Err(too_close());
        }
    }
    for &c in moved {
        let t = out.value(c);
        let partner = v.partner(c);
        if let Some(p) = partner {
            if out.value(p) != t {
                return Err(too_close());
            }
        }
        let ok_below = x
            .facets(c)
            .iter()
            .all(|&z| out.value(z) < t || (Some(z) == partner && out.value(z) == t));
        let ok_above = x
            .cofacets(c)
            .iter()
            .all(|&z| out.value(z) > t || (Some(z) == partner && out.value(z) == t));
        if !(ok_below && ok_above) {
            return Err(too_close());
        }
    }
    Ok(())
}

fn apply(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    mv: &MoveSpec,
) -> Result<AppliedMove> {
    check_move(v, h, mv)?;
    let x = v.complex();
    let (b, d) = mv.pair();
    let (hb, hd) = (h.value(b), h.value(d));
    let (s0, s1) = match mv.direction {
        Direction::Right => (hb, mv.xi),
        Direction::Down => (mv.xi, hd),
    };
    let mut relocated = relocation_set(x, v, h, mv, s0, s1)?;
    relocated.sort_by(|&p, &q| h.value(p).total_cmp(&h.value(q)).then(p.cmp(&q)));
    let mut ranks = Vec::with_capacity(relocated.len());
    let mut k = 0usize;
    for (i, &c) in relocated.iter().enumerate() {
        if i > 0 && h.value(c) != h.value(relocated[i - 1]) {
            k += 1;
        }
        ranks.push(k);
    }
    // evenly spaced by rank, so repeated moves do not compound the way an
    // affine rescaling of the window would
    let groups = (k + 1) as f64;
    let mut out = h.clone();
    for (&c, &r) in relocated.iter().zip(&ranks) {
        let t = match mv.direction {
            Direction::Right => mv.delta + (mv.xi - mv.delta) * r as f64 / groups,
            Direction::Down => mv.delta - (mv.delta - mv.xi) * (k - r) as f64 / groups,
        };
        out.set(c, t);
    }
    check_local(v, &out, &relocated)?;
    relocated.sort();
    Ok(AppliedMove { h: out, relocated })
}

/// Raises the birth of the pair to `δ` and relocates the cells flowing into
/// it from `[h(b), ξ]` into `[δ, ξ)`, keeping their order.
pub fn move_right(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    mv: &MoveSpec,
) -> Result<AppliedMove> {
    if mv.direction != Direction::Right {
        return Err(Error::InvalidMove("not a right move".into()));
    }
    apply(v, h, mv)
}

/// Lowers the death of the pair to `δ` and relocates the cells it flows to
/// from `[ξ, h(d)]` into `(ξ, δ]`, keeping their order.
pub fn move_down(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    mv: &MoveSpec,
) -> Result<AppliedMove> {
    if mv.direction != Direction::Down {
        return Err(Error::InvalidMove("not a down move".into()));
    }
    apply(v, h, mv)
}

/// Thirds of the widest gap between consecutive cell values in `(lo, hi)`.
fn widest_gap(h: &DiscreteMorseFunction, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let mut vals: Vec<f64> = h
        .values()
        .iter()
        .copied()
        .filter(|&t| lo < t && t < hi)
        .collect();
    vals.push(lo);
    vals.push(hi);
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let (a, b) = vals
        .windows(2)
        .map(|w| (w[0], w[1]))
        .max_by(|p, q| (p.1 - p.0).total_cmp(&(q.1 - q.0)))?;
    let (p, q) = (a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0);
    (a < p && p < q && q < b).then_some((p, q))
}

/// Critical cells in the current order, as a list.
pub(crate) fn critical_order(v: &CombinatorialVectorField, order: &[CellId]) -> Vec<CellId> {
    order
        .iter()
        .copied()
        .filter(|&c| v.is_critical(c))
        .collect()
}

/// A move past the next critical cell toward the diagonal, with `δ, ξ` at
/// the thirds of the widest empty interval just past it. `order` is the
/// h-order of `h`.
pub fn choose_gap(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    order: &[CellId],
    alpha: &BirthDeathPair,
    direction: Direction,
) -> Result<MoveSpec> {
    let (b, d) = pair_cells(alpha)?;
    let crit = critical_order(v, order);
    let ib = crit
        .iter()
        .position(|&c| c == b)
        .ok_or_else(|| Error::InvalidMove("birth is not critical".into()))?;
    let id = crit
        .iter()
        .position(|&c| c == d)
        .ok_or_else(|| Error::InvalidMove("death is not critical".into()))?;
    if id <= ib + 1 {
        return Err(Error::NoGap(
            "the pair is adjacent among critical cells".into(),
        ));
    }
    let (e, lo, hi) = match direction {
        Direction::Right => (crit[ib + 1], h.value(crit[ib + 1]), h.value(crit[ib + 2])),
        Direction::Down => (crit[id - 1], h.value(crit[id - 2]), h.value(crit[id - 1])),
    };
    let (p, q) = widest_gap(h, lo, hi)
        .ok_or_else(|| Error::NoGap(format!("no room between critical values {lo} and {hi}")))?;
    let (delta, xi) = match direction {
        Direction::Right => (p, q),
        Direction::Down => (q, p),
    };
    Ok(MoveSpec {
        direction,
        birth: b,
        death: d,
        delta,
        xi,
        bypassed: Some(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::{induced_vector_field, validate_dmf, HOrder};
    use std::sync::Arc;

    fn path_graph() -> (Arc<LefschetzComplex>, DiscreteMorseFunction) {
        // u - e - w - f - z, with the vector (w, f)
        let x = Arc::new(
            LefschetzComplex::new(&[
                ("u", 0, vec![]),
                ("w", 0, vec![]),
                ("z", 0, vec![]),
                ("e", 1, vec!["u", "w"]),
                ("f", 1, vec!["w", "z"]),
            ])
            .unwrap(),
        );
        let h = DiscreteMorseFunction::new(vec![0., 2., 1., 3., 2.]);
        (x, h)
    }

    #[test]
    fn widest_gap_thirds() {
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 10.]);
        assert_eq!(
            widest_gap(&h, 2.0, 10.0),
            Some((2.0 + 8.0 / 3.0, 2.0 + 16.0 / 3.0))
        );
        let h = DiscreteMorseFunction::new(vec![0., 1., 1.5, 2.]);
        assert_eq!(widest_gap(&h, 0.0, 2.0), Some((1.0 / 3.0, 2.0 / 3.0)));
    }

    #[test]
    fn single_relocation_down() {
        let (x, h) = path_graph();
        let v = induced_vector_field(&x, &h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        // z (1) is killed by e (3); w and f form a vector at 2
        let mv = MoveSpec {
            direction: Direction::Down,
            birth: id("z"),
            death: id("e"),
            delta: 2.5,
            xi: 2.25,
            bypassed: None,
        };
        let m = move_down(&v, &h, &mv).unwrap();
        assert_eq!(m.relocated, vec![id("e")]);
        assert_eq!(m.h.value(id("e")), 2.5);
        assert!(validate_dmf(&x, &m.h).unwrap().is_valid());
        assert_eq!(induced_vector_field(&x, &m.h).unwrap(), v);
    }

    #[test]
    fn block_relocation_keeps_vectors() {
        let (x, h) = path_graph();
        let v = induced_vector_field(&x, &h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        let mv = MoveSpec {
            direction: Direction::Down,
            birth: id("z"),
            death: id("e"),
            delta: 1.75,
            xi: 1.25,
            bypassed: None,
        };
        let m = move_down(&v, &h, &mv).unwrap();
        // e flows through w into f, which carries w along
        assert_eq!(m.relocated, vec![id("w"), id("e"), id("f")]);
        assert!(validate_dmf(&x, &m.h).unwrap().is_valid());
        assert_eq!(induced_vector_field(&x, &m.h).unwrap(), v);
        assert_eq!(m.h.value(id("e")), 1.75);
        assert_eq!(m.h.value(id("w")), m.h.value(id("f")));
    }

    #[test]
    fn move_clauses_are_checked() {
        let (x, h) = path_graph();
        let v = induced_vector_field(&x, &h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        let bad = MoveSpec {
            direction: Direction::Down,
            birth: id("z"),
            death: id("e"),
            delta: 2.5,
            xi: 1.5,
            bypassed: None,
        };
        assert!(matches!(
            move_down(&v, &h, &bad),
            Err(Error::InvalidMove(_))
        ));
        let order = HOrder::new(&x, &h);
        let alpha = BirthDeathPair {
            birth: id("z"),
            death: Some(id("e")),
            dim: 0,
        };
        assert!(matches!(
            choose_gap(&v, &h, order.order(), &alpha, Direction::Right),
            Err(Error::NoGap(_))
        ));
    }
}
