//! Transpositions classified by the roles of the two cells, with the
//! outcome predicted from relations and the `D^{α,β}` criterion.

use serde::{Deserialize, Serialize};

use crate::complex_core::{CellId, CombinatorialVectorField};
use crate::error::{Error, Result};
use crate::pairing_relations::{clear_quadrant, pair_of, BirthDeathPair};
use crate::transposition_engine::{CellSwap, ReducedState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranspositionKind {
    DeathDeath,
    /// Two births; essential cells count as births.
    BirthBirth,
    /// A birth moves above a death.
    Mixed,
    /// A death moves below a birth.
    ReverseMixed,
    /// One of the cells is matched in the vector field.
    VectorInvolving,
    /// The cells have different dimensions.
    CrossDimension,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Birth,
    Death,
}

/// A transposition of the cells at positions `position` and `position + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranspositionEvent {
    pub kind: TranspositionKind,
    pub position: usize,
    /// For death-death: the pair with the earlier birth; for birth-birth:
    /// the pair with the later death.
    pub alpha: BirthDeathPair,
    pub beta: BirthDeathPair,
    pub dim: usize,
}

/// A matrix in the state, by dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixId {
    U(usize),
    UDual(usize),
}

/// Predicted effect on the pair relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// Pairing kept, one row update.
    Update,
    /// Pairing switched, one row update.
    Switch,
    Unchanged,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub event: TranspositionEvent,
    pub pairing_switched: bool,
    /// Rows of `U` (or `U⊥`) that received another row, and columns that
    /// were re-reduced, with the matrix they belong to.
    pub rows_updated: Vec<(MatrixId, CellId)>,
    /// The `D^{α,β}` entry consulted by the prediction.
    pub criterion_value: Option<bool>,
    /// What the relations and the criterion predicted, for same-dimension
    /// transpositions of two finite critical pairs.
    pub predicted: Option<Case>,
    pub swap: CellSwap,
}

impl UpdateOutcome {
    /// Whether a row update of `U_{n+1}` (birth-birth) or `U⊥_n`
    /// (death-death) fired.
    pub fn row_update_fired(&self) -> bool {
        use TranspositionKind::*;
        match self.event.kind {
            BirthBirth => self.swap.primal_rows.update.is_some(),
            DeathDeath => self.swap.dual_rows.update.is_some(),
            _ => false,
        }
    }

    /// Whether the observed effect agrees with the prediction.
    pub fn matches_prediction(&self) -> bool {
        match self.predicted {
            None => true,
            Some(Case::Unchanged) => !self.pairing_switched && !self.row_update_fired(),
            Some(Case::Update) => !self.pairing_switched && self.row_update_fired(),
            Some(Case::Switch) => self.pairing_switched && self.row_update_fired(),
        }
    }
}

/// Classifies the transposition at order position `i`.
pub fn classify(
    state: &ReducedState,
    v: &CombinatorialVectorField,
    i: usize,
) -> Result<TranspositionEvent> {
    let order = state.order();
    if i + 1 >= order.len() {
        return Err(Error::BadTransposition(format!(
            "position {i} has no successor"
        )));
    }
    let x = state.complex();
    let (lo, hi) = (order.at(i), order.at(i + 1));
    let (plo, phi) = (pair_of(state, lo), pair_of(state, hi));
    let dim = x.dim(lo);
    let kind = if dim != x.dim(hi) {
        TranspositionKind::CrossDimension
    } else if !v.is_critical(lo) || !v.is_critical(hi) {
        TranspositionKind::VectorInvolving
    } else {
        match (state.role(lo).is_death(), state.role(hi).is_death()) {
            (true, true) => TranspositionKind::DeathDeath,
            (false, false) => TranspositionKind::BirthBirth,
            (false, true) => TranspositionKind::Mixed,
            (true, false) => TranspositionKind::ReverseMixed,
        }
    };
    let pos = |c: CellId| order.position(c);
    let death_pos = |p: &BirthDeathPair| p.death.map(pos).unwrap_or(usize::MAX);
    let (alpha, beta) = match kind {
        TranspositionKind::BirthBirth => {
            if death_pos(&plo) > death_pos(&phi) {
                (plo, phi)
            } else {
                (phi, plo)
            }
        }
        TranspositionKind::DeathDeath => {
            if pos(plo.birth) < pos(phi.birth) {
                (plo, phi)
            } else {
                (phi, plo)
            }
        }
        _ => (plo, phi),
    };
    Ok(TranspositionEvent {
        kind,
        position: i,
        alpha,
        beta,
        dim: x.dim(alpha.birth),
    })
}

/// Linear-time evaluation of `D^{α,β}[b_β, d_α]` (birth side) or
/// `D^{α,β}[b_α, d_β]` (death side) from one column of `V` (or `V⊥`).
///
/// Birth side: `b_β, b_α` consecutive with `β` strictly below and left of
/// `α`; the entry is `R[b_β, d_α] = Σ_{V[x, d_α] = 1} D[b_β, x]`.
/// Death side: `d_α, d_β` consecutive with `β` strictly above and right of
/// `α`; the entry is `R⊥[d_β, b_α] = Σ_{V⊥[x, b_α] = 1} D[x, d_β]`.
pub fn criterion_entry(
    state: &ReducedState,
    alpha: &BirthDeathPair,
    beta: &BirthDeathPair,
    side: Side,
) -> Result<bool> {
    let (Some(da), Some(db)) = (alpha.death, beta.death) else {
        return Err(Error::CriterionHypotheses("essential pair".into()));
    };
    if alpha.dim != beta.dim || alpha == beta {
        return Err(Error::CriterionHypotheses(
            "pairs must be distinct and of one dimension".into(),
        ));
    }
    let x = state.complex();
    let order = state.order();
    let pos = |c: CellId| order.position(c);
    match side {
        Side::Birth => {
            if !(pos(beta.birth) + 1 == pos(alpha.birth) && pos(db) < pos(da)) {
                return Err(Error::CriterionHypotheses(
                    "births not consecutive or beta not below-left of alpha".into(),
                ));
            }
            let mut acc = false;
            for c in state.v_column(da) {
                acc ^= x.is_facet(beta.birth, c);
            }
            Ok(acc)
        }
        Side::Death => {
            if !(pos(da) + 1 == pos(db) && pos(alpha.birth) < pos(beta.birth)) {
                return Err(Error::CriterionHypotheses(
                    "deaths not consecutive or beta not above-right of alpha".into(),
                ));
            }
            let mut acc = false;
            for c in state.v_dual_column(alpha.birth) {
                acc ^= x.is_facet(c, db);
            }
            Ok(acc)
        }
    }
}

/// The criterion entry, by the fast path when its hypotheses hold and by
/// explicit quadrant clearing otherwise.
pub fn criterion_value(
    state: &ReducedState,
    alpha: &BirthDeathPair,
    beta: &BirthDeathPair,
    side: Side,
) -> Result<bool> {
    match criterion_entry(state, alpha, beta, side) {
        Ok(v) => Ok(v),
        Err(Error::CriterionHypotheses(_)) => quadrant_entry(state, alpha, beta, side),
        Err(e) => Err(e),
    }
}

/// The criterion entry read off the explicitly cleared `D^{α,β}`.
pub fn quadrant_entry(
    state: &ReducedState,
    alpha: &BirthDeathPair,
    beta: &BirthDeathPair,
    side: Side,
) -> Result<bool> {
    let (Some(da), Some(db)) = (alpha.death, beta.death) else {
        return Err(Error::CriterionHypotheses("essential pair".into()));
    };
    let m = clear_quadrant(state, alpha, Some(beta))?;
    let x = state.complex();
    let l = |c: CellId| x.local_index(c) as u32;
    Ok(match side {
        Side::Birth => m.get(l(beta.birth), l(da)),
        Side::Death => m.get(l(alpha.birth), l(db)),
    })
}

fn predict(state: &ReducedState, ev: &TranspositionEvent) -> Result<(Option<Case>, Option<bool>)> {
    let (a, b) = (&ev.alpha, &ev.beta);
    let (Some(da), Some(db)) = (a.death, b.death) else {
        return Ok((None, None));
    };
    let hom = state.u(db, da);
    let cohom = state.u_dual(b.birth, a.birth);
    Ok(match ev.kind {
        TranspositionKind::BirthBirth => {
            let crit = criterion_value(state, a, b, Side::Birth)?;
            let case = if cohom {
                Case::Switch
            } else if hom || crit {
                Case::Update
            } else {
                Case::Unchanged
            };
            (Some(case), Some(crit))
        }
        TranspositionKind::DeathDeath => {
            let crit = criterion_value(state, a, b, Side::Death)?;
            let case = if hom {
                Case::Switch
            } else if cohom || crit {
                Case::Update
            } else {
                Case::Unchanged
            };
            (Some(case), Some(crit))
        }
        _ => (None, None),
    })
}

fn rows_updated(state: &ReducedState, s: &CellSwap) -> Vec<(MatrixId, CellId)> {
    let x = state.complex();
    let cell = |d: usize, l: u32| x.cells_of_dim(d)[l as usize];
    let n = x.dim(s.lower);
    let mut out = Vec::new();
    for &c in &s.primal_cols.recomputed {
        out.push((MatrixId::U(n), cell(n, c)));
    }
    for &c in &s.dual_cols.recomputed {
        out.push((MatrixId::UDual(n), cell(n, c)));
    }
    if let Some((db, _)) = s.primal_rows.update {
        out.push((MatrixId::U(n + 1), cell(n + 1, db)));
    }
    if let Some((db, _)) = s.dual_rows.update {
        out.push((MatrixId::UDual(n - 1), cell(n - 1, db)));
    }
    out
}

/// Classifies, predicts and performs the transposition at position `i`.
pub fn transpose_event(
    state: &mut ReducedState,
    v: &CombinatorialVectorField,
    i: usize,
) -> Result<UpdateOutcome> {
    let event = classify(state, v, i)?;
    let (predicted, criterion_value) = predict(state, &event)?;
    let swap = state.transpose(i)?;
    Ok(UpdateOutcome {
        event,
        pairing_switched: swap.switched,
        rows_updated: rows_updated(state, &swap),
        criterion_value,
        predicted,
        swap,
    })
}

fn adjacent_position(state: &ReducedState, a: CellId, b: CellId) -> Result<usize> {
    let (pa, pb) = (state.order().position(a), state.order().position(b));
    if pa.abs_diff(pb) != 1 {
        let x = state.complex();
        return Err(Error::BadTransposition(format!(
            "`{}` and `{}` are not adjacent",
            x.name(a),
            x.name(b)
        )));
    }
    Ok(pa.min(pb))
}

fn expect_kind(ev: &TranspositionEvent, kinds: &[TranspositionKind]) -> Result<()> {
    if kinds.contains(&ev.kind) {
        Ok(())
    } else {
        Err(Error::BadTransposition(format!(
            "expected {kinds:?}, found {:?}",
            ev.kind
        )))
    }
}

/// Transposes the deaths of two pairs.
pub fn transpose_deaths(
    state: &mut ReducedState,
    v: &CombinatorialVectorField,
    alpha: &BirthDeathPair,
    beta: &BirthDeathPair,
) -> Result<UpdateOutcome> {
    let (Some(da), Some(db)) = (alpha.death, beta.death) else {
        return Err(Error::BadTransposition(
            "essential pairs have no death".into(),
        ));
    };
    let i = adjacent_position(state, da, db)?;
    expect_kind(&classify(state, v, i)?, &[TranspositionKind::DeathDeath])?;
    transpose_event(state, v, i)
}

/// Transposes the births of two pairs.
pub fn transpose_births(
    state: &mut ReducedState,
    v: &CombinatorialVectorField,
    alpha: &BirthDeathPair,
    beta: &BirthDeathPair,
) -> Result<UpdateOutcome> {
    let i = adjacent_position(state, alpha.birth, beta.birth)?;
    expect_kind(&classify(state, v, i)?, &[TranspositionKind::BirthBirth])?;
    transpose_event(state, v, i)
}

/// A birth moving above a death, or a death moving below a birth.
pub fn transpose_mixed(
    state: &mut ReducedState,
    v: &CombinatorialVectorField,
    i: usize,
) -> Result<UpdateOutcome> {
    expect_kind(
        &classify(state, v, i)?,
        &[TranspositionKind::Mixed, TranspositionKind::ReverseMixed],
    )?;
    transpose_event(state, v, i)
}

/// A transposition with a cell of a vector.
pub fn transpose_with_vector(
    state: &mut ReducedState,
    v: &CombinatorialVectorField,
    i: usize,
) -> Result<UpdateOutcome> {
    expect_kind(
        &classify(state, v, i)?,
        &[TranspositionKind::VectorInvolving],
    )?;
    transpose_event(state, v, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::DiscreteMorseFunction;
    use crate::fixtures;
    use crate::oracle::diff_state;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn triangle_births() {
        let x = Arc::new(fixtures::hollow_triangle());
        // b, c adjacent births dying at ab and bc
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let mut s = ReducedState::from_dmf(x.clone(), &h).unwrap();
        let v = CombinatorialVectorField::identity(x.clone());
        let id = |n: &str| x.id(n).unwrap();
        let pb = pair_of(&s, id("b"));
        let pc = pair_of(&s, id("c"));
        let out = transpose_births(&mut s, &v, &pc, &pb).unwrap();
        assert_eq!(out.event.alpha, pc);
        assert!(out.matches_prediction(), "{out:?}");
        assert!(diff_state(&s).unwrap().is_empty());
    }

    #[test]
    fn predictions_hold_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut seen = std::collections::BTreeMap::new();
        for _ in 0..150 {
            let (x, h) = fixtures::random_instance(&mut rng, 30, 3, 0.0);
            let v = CombinatorialVectorField::identity(x.clone());
            let mut s = ReducedState::from_dmf(x.clone(), &h).unwrap();
            for _ in 0..30 {
                let i = rng.gen_range(0..x.len() - 1);
                if x.is_facet(s.order().at(i), s.order().at(i + 1)) {
                    continue;
                }
                let out = transpose_event(&mut s, &v, i).unwrap();
                if let Some(c) = out.predicted {
                    *seen
                        .entry(format!("{:?}/{c:?}", out.event.kind))
                        .or_insert(0) += 1;
                }
                assert!(
                    out.matches_prediction(),
                    "{:?} {:?}",
                    out.event,
                    out.predicted
                );
                if matches!(
                    out.event.kind,
                    TranspositionKind::Mixed | TranspositionKind::CrossDimension
                ) {
                    assert!(!out.pairing_switched);
                    assert!(out.rows_updated.is_empty());
                }
            }
        }
        for case in [
            "BirthBirth/Update",
            "BirthBirth/Switch",
            "DeathDeath/Update",
            "DeathDeath/Switch",
        ] {
            assert!(
                seen.get(case).copied().unwrap_or(0) > 0,
                "{case} never seen: {seen:?}"
            );
        }
    }

    #[test]
    fn fast_criterion_matches_quadrant_clearing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..200 {
            let (x, h) = fixtures::random_instance(&mut rng, 30, 3, 0.0);
            let s = ReducedState::from_dmf(x.clone(), &h).unwrap();
            for i in 0..x.len() - 1 {
                let (p, q) = (
                    pair_of(&s, s.order().at(i)),
                    pair_of(&s, s.order().at(i + 1)),
                );
                for side in [Side::Birth, Side::Death] {
                    for (a, b) in [(p, q), (q, p)] {
                        if let Ok(fast) = criterion_entry(&s, &a, &b, side) {
                            assert_eq!(fast, quadrant_entry(&s, &a, &b, side).unwrap());
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 50, "{checked}");
    }
}
