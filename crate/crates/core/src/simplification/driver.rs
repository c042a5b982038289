use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::journey::{cancel_pair, TraceOptions};
use super::MorseState;
use crate::complex_core::CellId;
use crate::error::{Error, Result};
use crate::forbidden_regions::{CornerSource, ForbiddenRegionPair};
use crate::pairing_relations::{is_shallow, BirthDeathPair};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Cancel shallow pairs first, then any eligible pair.
    #[default]
    ShallowFirstThenRegions,
    RegionsOnly,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SimplifyOptions {
    pub policy: Policy,
    /// Compare with the oracle after every cancellation.
    pub verify: bool,
    /// Stop early, marking the report incomplete.
    pub budget: Option<Duration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CancelClass {
    /// Cancelled while only shallow pairs were being cancelled.
    Standard,
    /// Cancelled once region-based cancellation had started.
    Region,
    NotCancellable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairOutcome {
    pub birth: CellId,
    pub death: CellId,
    pub dim: usize,
    pub birth_value: f64,
    pub death_value: f64,
    pub class: CancelClass,
    /// Distinct pairs met by the forbidden regions when cancelled (or at the
    /// end when not cancellable).
    pub obstacles: usize,
    pub moves: usize,
    pub seconds: f64,
    /// Why the last attempt failed.
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplifyReport {
    pub policy: Policy,
    /// Cell count.
    pub n: usize,
    /// Off-diagonal pair count before simplification.
    pub c: usize,
    pub outcomes: Vec<PairOutcome>,
    /// Cancellations attempted that failed after eligibility held.
    pub blocked: usize,
    pub region_passes: usize,
    /// Oracle comparisons made.
    pub verified: usize,
    /// The time budget ran out before the last pass finished.
    pub incomplete: bool,
}

impl SimplifyReport {
    pub fn count(&self, class: CancelClass) -> usize {
        self.outcomes.iter().filter(|o| o.class == class).count()
    }

    /// `(dim, class) → count`.
    pub fn by_dim(&self) -> BTreeMap<(usize, CancelClass), usize> {
        let mut out = BTreeMap::new();
        for o in &self.outcomes {
            *out.entry((o.dim, o.class)).or_insert(0) += 1;
        }
        out
    }
}

/// Distinct pairs, other than `alpha`, behind the corners of its regions.
pub(crate) fn obstacle_pairs(
    ms: &MorseState,
    alpha: &BirthDeathPair,
    r: &ForbiddenRegionPair,
) -> usize {
    let pairs: BTreeSet<BirthDeathPair> = r
        .death_region
        .corners
        .iter()
        .chain(&r.birth_region.corners)
        .map(|c| match c.source {
            CornerSource::Relation(b) | CornerSource::Path(b) => ms.pair_of(b),
        })
        .filter(|p| p != alpha)
        .collect();
    pairs.len()
}

struct Run<'a> {
    ms: &'a mut MorseState,
    opts: SimplifyOptions,
    outcomes: BTreeMap<(CellId, CellId), PairOutcome>,
    blocked: usize,
    verified: usize,
    deadline: Option<Instant>,
    incomplete: bool,
}

impl Run<'_> {
    fn out_of_time(&mut self) -> bool {
        if self.deadline.is_some_and(|t| Instant::now() > t) {
            self.incomplete = true;
        }
        self.incomplete
    }

    /// Off-diagonal pairs by increasing persistence, ties by later death
    /// first.
    fn remaining(&self) -> Vec<BirthDeathPair> {
        let order = self.ms.reduced().order();
        let mut ps: Vec<(f64, usize, BirthDeathPair)> = self
            .ms
            .off_diagonal()
            .into_iter()
            .map(|p| {
                (
                    p.persistence(self.ms.function()),
                    order.position(p.death.unwrap()),
                    p,
                )
            })
            .collect();
        ps.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        ps.into_iter().map(|(_, _, p)| p).collect()
    }

    /// Tries one cancellation; Ok(false) when the pair is ineligible or the
    /// attempt is blocked.
    fn attempt(&mut self, alpha: &BirthDeathPair, class: CancelClass) -> Result<bool> {
        let key = (alpha.birth, alpha.death.unwrap());
        let e = self.ms.eligibility(alpha)?;
        let obstacles = e
            .regions
            .as_ref()
            .map_or(0, |r| obstacle_pairs(self.ms, alpha, r));
        let name = |c: CellId| self.ms.complex().name(c).to_string();
        if !e.eligible {
            let reason = e.describe(name);
            let o = self.outcomes.get_mut(&key).unwrap();
            o.obstacles = obstacles;
            o.reason = Some(reason);
            return Ok(false);
        }
        let start = Instant::now();
        let result = cancel_pair(self.ms, alpha, &TraceOptions::default());
        let seconds = start.elapsed().as_secs_f64();
        match result {
            Ok(trace) => {
                if self.opts.verify {
                    self.verified += 1;
                    let d = self.ms.verify()?;
                    if !d.is_empty() {
                        return Err(Error::Internal(format!(
                            "oracle mismatch after a cancellation: {d}"
                        )));
                    }
                }
                let o = self.outcomes.get_mut(&key).unwrap();
                o.class = class;
                o.obstacles = obstacles;
                o.moves = trace.moves();
                o.seconds = seconds;
                o.reason = None;
                Ok(true)
            }
            Err(err @ (Error::Blocked(_) | Error::NoGap(_))) => {
                self.blocked += 1;
                let o = self.outcomes.get_mut(&key).unwrap();
                o.obstacles = obstacles;
                o.reason = Some(err.to_string());
                Ok(false)
            }
            Err(err) => Err(err),
        }
    }

    /// Cancels shallow reversible pairs until none is left.
    fn shallow_phase(&mut self, class: CancelClass) -> Result<()> {
        loop {
            let mut progress = false;
            for alpha in self.remaining() {
                if self.out_of_time() {
                    return Ok(());
                }
                if !is_shallow(self.ms.reduced(), &alpha) {
                    continue;
                }
                if self.attempt(&alpha, class)? {
                    progress = true;
                }
            }
            if !progress {
                return Ok(());
            }
        }
    }
}

/// Cancels as many off-diagonal pairs as possible and classifies every
/// initial off-diagonal pair by how it was cancelled. Pairs blocked by
/// rounding are skipped and retried in later passes.
pub fn simplify_all(ms: &mut MorseState, opts: SimplifyOptions) -> Result<SimplifyReport> {
    let initial = ms.off_diagonal();
    let outcomes = initial
        .iter()
        .map(|p| {
            let d = p.death.unwrap();
            let o = PairOutcome {
                birth: p.birth,
                death: d,
                dim: p.dim,
                birth_value: ms.function().value(p.birth),
                death_value: ms.function().value(d),
                class: CancelClass::NotCancellable,
                obstacles: 0,
                moves: 0,
                seconds: 0.0,
                reason: None,
            };
            ((p.birth, d), o)
        })
        .collect();
    let n = ms.complex().len();
    let deadline = opts.budget.map(|b| Instant::now() + b);
    let mut run = Run {
        ms,
        opts,
        outcomes,
        blocked: 0,
        verified: 0,
        deadline,
        incomplete: false,
    };
    if opts.policy == Policy::ShallowFirstThenRegions {
        run.shallow_phase(CancelClass::Standard)?;
    }
    let mut passes = 0;
    loop {
        passes += 1;
        let mut progress = false;
        for alpha in run.remaining() {
            if run.out_of_time() {
                break;
            }
            // An earlier success in this pass may have cancelled it already.
            if run.ms.pair_of(alpha.birth) != alpha || !alpha.is_off_diagonal(run.ms.function()) {
                continue;
            }
            if run.attempt(&alpha, CancelClass::Region)? {
                progress = true;
                if opts.policy == Policy::ShallowFirstThenRegions {
                    run.shallow_phase(CancelClass::Region)?;
                }
            }
        }
        if !progress || run.incomplete {
            break;
        }
    }
    Ok(SimplifyReport {
        policy: opts.policy,
        n,
        c: initial.len(),
        outcomes: run.outcomes.into_values().collect(),
        blocked: run.blocked,
        region_passes: passes,
        verified: run.verified,
        incomplete: run.incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::DiscreteMorseFunction;
    use crate::fixtures;
    use std::sync::Arc;

    #[test]
    fn triangle_pairs_are_standard() {
        let x = Arc::new(fixtures::hollow_triangle());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let mut ms = MorseState::new(x, h).unwrap();
        let rep = simplify_all(
            &mut ms,
            SimplifyOptions {
                verify: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.c, 2);
        assert_eq!(rep.count(CancelClass::Standard), 2);
        assert!(ms.off_diagonal().is_empty());
        assert_eq!(
            ms.pairs()
                .unwrap()
                .iter()
                .filter(|p| p.death.is_none())
                .count(),
            2
        );
    }

    #[test]
    fn essential_only_is_left_alone() {
        let x = Arc::new(crate::complex_core::LefschetzComplex::new(&[("p", 0, vec![])]).unwrap());
        let mut ms = MorseState::new(x, DiscreteMorseFunction::new(vec![0.])).unwrap();
        let rep = simplify_all(&mut ms, SimplifyOptions::default()).unwrap();
        assert!(rep.outcomes.is_empty());
    }

    #[test]
    fn random_runs_keep_remaining_pairs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (x, h) = fixtures::random_instance(&mut rng, 40, 3, 0.0);
            let mut ms = MorseState::new(x, h).unwrap();
            let before = ms.diagram();
            let rep = simplify_all(
                &mut ms,
                SimplifyOptions {
                    verify: true,
                    ..Default::default()
                },
            )
            .unwrap();
            let after = ms.diagram();
            assert!(after.iter().all(|p| before.contains(p)));
            assert_eq!(after.len(), rep.count(CancelClass::NotCancellable));
        }
    }
}
