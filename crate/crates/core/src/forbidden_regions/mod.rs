//! Forbidden regions of a pair in the persistence plane and the
//! eligibility test built on them.
//!
//! The death region of `α` is a union of closed lower-left quadrants, the
//! birth region a union of closed upper-right quadrants. A pair can be
//! cancelled without touching other pairs when the two regions are disjoint
//! and exactly one gradient path joins its cells.

use serde::{Deserialize, Serialize};

use crate::complex_core::{count_paths, CellId, CombinatorialVectorField, DiscreteMorseFunction};
use crate::error::{Error, Result};
use crate::pairing_relations::{pair_of, BirthDeathPair};
use crate::transposition_engine::ReducedState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Points `q ≤ corner` componentwise.
    LowerLeft,
    /// Points `q ≥ corner` componentwise.
    UpperRight,
}

/// Where a corner comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CornerSource {
    /// A pair related to `α`, named by its birth cell.
    Relation(CellId),
    /// A critical cell on the diagonal, joined to `α` by a gradient path.
    Path(CellId),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub x: f64,
    pub y: f64,
    pub source: CornerSource,
}

/// A union of closed quadrants, stored by its maximal corners sorted by `x`
/// with `y` strictly decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub orientation: Orientation,
    pub corners: Vec<Corner>,
}

impl Staircase {
    pub fn new(orientation: Orientation, mut corners: Vec<Corner>) -> Staircase {
        let cmp = |a: &Corner, b: &Corner| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y));
        let mut kept = Vec::new();
        match orientation {
            Orientation::LowerLeft => {
                corners.sort_by(|a, b| cmp(b, a));
                let mut best = f64::NEG_INFINITY;
                for c in corners {
                    if c.y > best {
                        best = c.y;
                        kept.push(c);
                    }
                }
                kept.reverse();
            }
            Orientation::UpperRight => {
                corners.sort_by(cmp);
                let mut best = f64::INFINITY;
                for c in corners {
                    if c.y < best {
                        best = c.y;
                        kept.push(c);
                    }
                }
            }
        }
        Staircase {
            orientation,
            corners: kept,
        }
    }

    pub fn empty(orientation: Orientation) -> Staircase {
        Staircase {
            orientation,
            corners: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// The corner whose quadrant contains `(x, y)`, if any.
    pub fn witness(&self, x: f64, y: f64) -> Option<&Corner> {
        // corners ascend in x, descend in y
        match self.orientation {
            Orientation::LowerLeft => {
                let i = self.corners.partition_point(|c| c.x < x);
                self.corners.get(i).filter(|c| y <= c.y)
            }
            Orientation::UpperRight => {
                let i = self.corners.partition_point(|c| c.x <= x);
                i.checked_sub(1)
                    .map(|j| &self.corners[j])
                    .filter(|c| y >= c.y)
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.witness(x, y).is_some()
    }

    /// Whether this region lies inside `other`.
    pub fn is_subset_of(&self, other: &Staircase) -> bool {
        self.orientation == other.orientation
            && self.corners.iter().all(|c| other.contains(c.x, c.y))
    }
}

/// Death and birth regions of one pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenRegionPair {
    pub death_region: Staircase,
    pub birth_region: Staircase,
}

impl ForbiddenRegionPair {
    pub fn is_subset_of(&self, other: &ForbiddenRegionPair) -> bool {
        self.death_region.is_subset_of(&other.death_region)
            && self.birth_region.is_subset_of(&other.birth_region)
    }

    pub fn obstacle_count(&self) -> usize {
        self.death_region.corners.len() + self.birth_region.corners.len()
    }
}

fn point(h: &DiscreteMorseFunction, p: &BirthDeathPair) -> Option<(f64, f64)> {
    p.death.map(|d| (h.value(p.birth), h.value(d)))
}

fn require_off_diagonal(h: &DiscreteMorseFunction, alpha: &BirthDeathPair) -> Result<CellId> {
    match alpha.death {
        Some(d) if h.value(d) != h.value(alpha.birth) => Ok(d),
        _ => Err(Error::Ineligible("pair is not off-diagonal".into())),
    }
}

/// Corners from `β →× α` with `β` off-diagonal and from critical cells
/// reachable from `d_α`, other than the cells of `α`.
pub fn death_region(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    alpha: &BirthDeathPair,
) -> Result<Staircase> {
    let d = require_off_diagonal(h, alpha)?;
    let mut corners = Vec::new();
    for s in state.hom_sources(d) {
        let beta = pair_of(state, s);
        if beta.is_off_diagonal(h) {
            let (x, y) = point(h, &beta).unwrap();
            corners.push(Corner {
                x,
                y,
                source: CornerSource::Relation(beta.birth),
            });
        }
    }
    let reach = v.reachable_from(d);
    for c in v.criticals() {
        if reach[c.index()] && c != d && c != alpha.birth {
            corners.push(Corner {
                x: h.value(c),
                y: h.value(c),
                source: CornerSource::Path(c),
            });
        }
    }
    Ok(Staircase::new(Orientation::LowerLeft, corners))
}

/// Corners from `β →∘ α` with `β` off-diagonal and from critical cells
/// reaching `b_α`, other than the cells of `α`.
pub fn birth_region(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    alpha: &BirthDeathPair,
) -> Result<Staircase> {
    let d = require_off_diagonal(h, alpha)?;
    let b = alpha.birth;
    let mut corners = Vec::new();
    for s in state.cohom_sources(b) {
        let beta = pair_of(state, s);
        if beta.is_off_diagonal(h) {
            let (x, y) = point(h, &beta).unwrap();
            corners.push(Corner {
                x,
                y,
                source: CornerSource::Relation(beta.birth),
            });
        }
    }
    let reach = v.reaching(b);
    for c in v.criticals() {
        if reach[c.index()] && c != d && c != b {
            corners.push(Corner {
                x: h.value(c),
                y: h.value(c),
                source: CornerSource::Path(c),
            });
        }
    }
    Ok(Staircase::new(Orientation::UpperRight, corners))
}

pub fn regions(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    alpha: &BirthDeathPair,
) -> Result<ForbiddenRegionPair> {
    Ok(ForbiddenRegionPair {
        death_region: death_region(state, v, h, alpha)?,
        birth_region: birth_region(state, v, h, alpha)?,
    })
}

/// A lower-left corner `(a, b)` and an upper-right corner `(c, d)` with
/// `c ≤ a` and `d ≤ b`, found by sorting and a prefix-minimum sweep.
pub fn intersection_witness<'a>(
    death: &'a Staircase,
    birth: &'a Staircase,
) -> Option<(&'a Corner, &'a Corner)> {
    let mut ur: Vec<&Corner> = birth.corners.iter().collect();
    ur.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut ll: Vec<&Corner> = death.corners.iter().collect();
    ll.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut best: Option<&Corner> = None;
    let mut j = 0;
    for a in ll {
        while j < ur.len() && ur[j].x <= a.x {
            if best.is_none_or(|b| ur[j].y < b.y) {
                best = Some(ur[j]);
            }
            j += 1;
        }
        if let Some(b) = best {
            if b.y <= a.y {
                return Some((a, b));
            }
        }
    }
    None
}

pub fn regions_intersect(death: &Staircase, birth: &Staircase) -> bool {
    intersection_witness(death, birth).is_some()
}

/// Reasons a pair is not eligible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum Blocking {
    Regions {
        death_corner: Corner,
        birth_corner: Corner,
    },
    Paths {
        count: u64,
    },
    NotOffDiagonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eligibility {
    pub eligible: bool,
    /// Gradient paths from `d_α` to `b_α`, capped at 2.
    pub path_count: u64,
    pub blocking: Vec<Blocking>,
    pub regions: Option<ForbiddenRegionPair>,
}

impl Eligibility {
    pub fn describe(&self, name: impl Fn(CellId) -> String) -> String {
        if self.eligible {
            return "eligible".into();
        }
        let parts: Vec<String> = self
            .blocking
            .iter()
            .map(|b| match b {
                Blocking::Regions { death_corner, birth_corner } => {
                    let src = |c: &Corner| match c.source {
                        CornerSource::Relation(x) => format!("pair born at `{}`", name(x)),
                        CornerSource::Path(x) => format!("critical `{}`", name(x)),
                    };
                    format!(
                        "regions meet: death corner ({}, {}) from {} and birth corner ({}, {}) from {}",
                        death_corner.x,
                        death_corner.y,
                        src(death_corner),
                        birth_corner.x,
                        birth_corner.y,
                        src(birth_corner)
                    )
                }
                Blocking::Paths { count: 0 } => "no gradient path between the cells".into(),
                Blocking::Paths { .. } => "not reversible: several gradient paths".into(),
                Blocking::NotOffDiagonal => "pair is not off-diagonal".into(),
            })
            .collect();
        parts.join("; ")
    }
}

/// Disjoint regions and a unique gradient path from `d_α` to `b_α`.
pub fn eligible(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    alpha: &BirthDeathPair,
) -> Result<Eligibility> {
    let Ok(d) = require_off_diagonal(h, alpha) else {
        return Ok(Eligibility {
            eligible: false,
            path_count: 0,
            blocking: vec![Blocking::NotOffDiagonal],
            regions: None,
        });
    };
    let r = regions(state, v, h, alpha)?;
    let mut blocking = Vec::new();
    if let Some((a, b)) = intersection_witness(&r.death_region, &r.birth_region) {
        blocking.push(Blocking::Regions {
            death_corner: *a,
            birth_corner: *b,
        });
    }
    let path_count = count_paths(v, d, alpha.birth, 2)?.count;
    if path_count != 1 {
        blocking.push(Blocking::Paths { count: path_count });
    }
    Ok(Eligibility {
        eligible: blocking.is_empty(),
        path_count,
        blocking,
        regions: Some(r),
    })
}

/// Quadratic reference for [`regions_intersect`].
pub fn regions_intersect_pairwise(death: &Staircase, birth: &Staircase) -> bool {
    death
        .corners
        .iter()
        .any(|a| birth.corners.iter().any(|b| b.x <= a.x && b.y <= a.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::induced_vector_field;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn c(x: f64, y: f64) -> Corner {
        Corner {
            x,
            y,
            source: CornerSource::Path(CellId(0)),
        }
    }

    #[test]
    fn staircase_keeps_maximal_corners() {
        let s = Staircase::new(
            Orientation::LowerLeft,
            vec![c(1., 5.), c(2., 3.), c(1., 2.), c(3., 3.)],
        );
        let pts: Vec<(f64, f64)> = s.corners.iter().map(|k| (k.x, k.y)).collect();
        assert_eq!(pts, vec![(1., 5.), (3., 3.)]);
        assert!(s.contains(1., 5.) && s.contains(0., 4.) && s.contains(3., 3.));
        assert!(!s.contains(2., 4.) && !s.contains(3.5, 0.));
        let u = Staircase::new(
            Orientation::UpperRight,
            vec![c(1., 5.), c(2., 3.), c(3., 4.)],
        );
        let pts: Vec<(f64, f64)> = u.corners.iter().map(|k| (k.x, k.y)).collect();
        assert_eq!(pts, vec![(1., 5.), (2., 3.)]);
        assert!(u.contains(2., 3.) && u.contains(1.5, 5.) && !u.contains(1.5, 4.));
    }

    #[test]
    fn intersection_examples() {
        let ll = Staircase::new(Orientation::LowerLeft, vec![c(5., 3.)]);
        let ur = Staircase::new(Orientation::UpperRight, vec![c(4., 2.)]);
        assert!(regions_intersect(&ll, &ur));
        assert!(!regions_intersect(
            &ll,
            &Staircase::empty(Orientation::UpperRight)
        ));
        let ur2 = Staircase::new(Orientation::UpperRight, vec![c(6., 2.), c(4., 4.)]);
        assert!(!regions_intersect(&ll, &ur2));
    }

    #[test]
    fn sweep_matches_pairwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let mut pts = || -> Vec<Corner> {
                let n = rng.gen_range(0..6);
                (0..n)
                    .map(|_| c(rng.gen_range(0..10) as f64, rng.gen_range(0..10) as f64))
                    .collect()
            };
            let ll = Staircase::new(Orientation::LowerLeft, pts());
            let ur = Staircase::new(Orientation::UpperRight, pts());
            assert_eq!(
                regions_intersect(&ll, &ur),
                regions_intersect_pairwise(&ll, &ur)
            );
        }
    }

    #[test]
    fn triangle_first_pair_is_eligible() {
        let x = Arc::new(fixtures::hollow_triangle());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let s = ReducedState::from_dmf(x.clone(), &h).unwrap();
        let v = induced_vector_field(&x, &h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        let alpha = pair_of(&s, id("c"));
        let e = eligible(&s, &v, &h, &alpha).unwrap();
        assert!(e.eligible, "{}", e.describe(|c| x.name(c).to_string()));
        // `ab` is reachable from `bc` through `b`; `a` as well
        assert!(!e.regions.unwrap().death_region.is_empty());
    }

    #[test]
    fn several_paths_block() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut found = 0;
        while found < 5 {
            let (x, h) = fixtures::random_instance(&mut rng, 40, 3, 0.5);
            let s = ReducedState::from_dmf(x.clone(), &h).unwrap();
            let v = induced_vector_field(&x, &h).unwrap();
            for (b, d) in s.pairs() {
                let alpha = pair_of(&s, b);
                let Some(d) = d else { continue };
                if !alpha.is_off_diagonal(&h) || count_paths(&v, d, b, 2).unwrap().count < 2 {
                    continue;
                }
                let e = eligible(&s, &v, &h, &alpha).unwrap();
                assert!(!e.eligible);
                assert!(e.blocking.contains(&Blocking::Paths { count: 2 }));
                assert!(e
                    .describe(|c| x.name(c).to_string())
                    .contains("not reversible"));
                found += 1;
            }
        }
    }

    #[test]
    fn staircases_match_brute_regions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut samples = 0;
        for _ in 0..60 {
            let (x, h) = fixtures::random_instance(&mut rng, 40, 3, 0.4);
            let s = ReducedState::from_dmf(x.clone(), &h).unwrap();
            let v = induced_vector_field(&x, &h).unwrap();
            let top = h.values().iter().copied().fold(0.0, f64::max) + 1.0;
            for (b, d) in s.pairs() {
                let alpha = pair_of(&s, b);
                let Some(d) = d else { continue };
                if !alpha.is_off_diagonal(&h) {
                    continue;
                }
                let r = regions(&s, &v, &h, &alpha).unwrap();
                let brute = crate::oracle::brute_region(&s, &v, &h, b, d).unwrap();
                for &(p, q) in brute.death.iter().chain(&brute.birth) {
                    assert!(r.death_region.contains(p, q) == brute.in_death(p, q));
                    assert!(r.birth_region.contains(p, q) == brute.in_birth(p, q));
                }
                for _ in 0..40 {
                    let (p, q) = (rng.gen_range(-1.0..top), rng.gen_range(-1.0..top));
                    assert_eq!(r.death_region.contains(p, q), brute.in_death(p, q));
                    assert_eq!(r.birth_region.contains(p, q), brute.in_birth(p, q));
                    samples += 1;
                }
            }
        }
        assert!(samples >= 10_000, "{samples}");
    }
}
