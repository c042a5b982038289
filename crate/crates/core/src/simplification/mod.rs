//! Cancelling a pair: a journey of allowed moves toward the diagonal, a
//! final squeeze onto its gradient path, and the path reversal. The driver
//! applies this to every pair it can.

mod driver;
mod journey;
mod moves;

use std::sync::Arc;

use crate::complex_core::{
    h_cmp, induced_vector_field, validate_dmf, CellId, CombinatorialVectorField,
    DiscreteMorseFunction, HOrder, LefschetzComplex,
};
use crate::error::{Error, Result};
use crate::forbidden_regions::{eligible, regions, Eligibility, ForbiddenRegionPair};
use crate::oracle::{diff_state, StateDiff};
use crate::pairing_relations::{extract_pairs, pair_of, BirthDeathPair};
use crate::transposition_engine::{ReducedState, Reordering};

pub use driver::{simplify_all, CancelClass, PairOutcome, Policy, SimplifyOptions, SimplifyReport};
pub use journey::{
    cancel_pair, final_squeeze, journey_to_diagonal, reverse_path_dmf, SimplificationTrace, Step,
    StepRecord, TraceOptions,
};
pub use moves::{choose_gap, move_down, move_right, AppliedMove, Direction, MoveSpec};

/// A discrete Morse function together with its gradient field and the
/// exact reduced state of its order.
#[derive(Clone, Debug)]
pub struct MorseState {
    complex: Arc<LefschetzComplex>,
    h: DiscreteMorseFunction,
    v: CombinatorialVectorField,
    reduced: ReducedState,
}

fn check_dmf(x: &LefschetzComplex, h: &DiscreteMorseFunction) -> Result<()> {
    let report = validate_dmf(x, h)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidDmf(report.describe(x).join("; ")))
    }
}

impl MorseState {
    pub fn new(complex: Arc<LefschetzComplex>, h: DiscreteMorseFunction) -> Result<MorseState> {
        check_dmf(&complex, &h)?;
        let v = induced_vector_field(&complex, &h)?;
        let reduced = ReducedState::from_dmf(complex.clone(), &h)?;
        Ok(MorseState {
            complex,
            h,
            v,
            reduced,
        })
    }

    pub fn complex(&self) -> &Arc<LefschetzComplex> {
        &self.complex
    }

    pub fn function(&self) -> &DiscreteMorseFunction {
        &self.h
    }

    pub fn field(&self) -> &CombinatorialVectorField {
        &self.v
    }

    pub fn reduced(&self) -> &ReducedState {
        &self.reduced
    }

    /// All pairs, diagonal and essential included.
    pub fn pairs(&self) -> Result<Vec<BirthDeathPair>> {
        extract_pairs(&self.reduced)
    }

    /// Off-diagonal pairs ordered by birth.
    pub fn off_diagonal(&self) -> Vec<BirthDeathPair> {
        self.reduced
            .pairs()
            .into_iter()
            .map(|(b, _)| pair_of(&self.reduced, b))
            .filter(|p| p.is_off_diagonal(&self.h))
            .collect()
    }

    /// Off-diagonal pairs with their values.
    pub fn diagram(&self) -> Vec<(CellId, CellId, f64, f64)> {
        self.off_diagonal()
            .into_iter()
            .map(|p| {
                let d = p.death.unwrap();
                (p.birth, d, self.h.value(p.birth), self.h.value(d))
            })
            .collect()
    }

    pub fn pair_of(&self, c: CellId) -> BirthDeathPair {
        pair_of(&self.reduced, c)
    }

    /// The pair containing the named cell.
    pub fn pair_by_name(&self, name: &str) -> Result<BirthDeathPair> {
        Ok(self.pair_of(self.complex.id(name)?))
    }

    pub fn regions(&self, alpha: &BirthDeathPair) -> Result<ForbiddenRegionPair> {
        regions(&self.reduced, &self.v, &self.h, alpha)
    }

    pub fn eligibility(&self, alpha: &BirthDeathPair) -> Result<Eligibility> {
        eligible(&self.reduced, &self.v, &self.h, alpha)
    }

    /// Replaces the function; the reductions follow by adjacent
    /// transpositions. The new field is recomputed from `h`.
    pub fn set_function(&mut self, h: DiscreteMorseFunction) -> Result<Reordering> {
        check_dmf(&self.complex, &h)?;
        let v = induced_vector_field(&self.complex, &h)?;
        let target = HOrder::new(&self.complex, &h);
        let rep = self.reduced.reorder(&target)?;
        self.h = h;
        self.v = v;
        Ok(rep)
    }

    /// Replaces the function when only the cells in `changed` take new
    /// values, and the field by `field` when given (it may differ from the
    /// current one on `changed` only). The order is updated by a merge and
    /// the function checked around the changed cells, so the cost is linear
    /// in the complex plus the transpositions.
    pub(crate) fn set_function_local(
        &mut self,
        h: DiscreteMorseFunction,
        changed: &[CellId],
        field: Option<CombinatorialVectorField>,
    ) -> Result<Reordering> {
        let x = &self.complex;
        let mut is_changed = vec![false; x.len()];
        for &c in changed {
            is_changed[c.index()] = true;
        }
        let mut incoming: Vec<CellId> = x.cells().filter(|c| is_changed[c.index()]).collect();
        incoming.sort_by(|&a, &b| h_cmp(x, &h, a, b));
        let mut order = Vec::with_capacity(x.len());
        let mut rest = self
            .reduced
            .order()
            .order()
            .iter()
            .copied()
            .filter(|c| !is_changed[c.index()])
            .peekable();
        let mut incoming = incoming.into_iter().peekable();
        loop {
            let next = match (rest.peek(), incoming.peek()) {
                (Some(&a), Some(&b)) => {
                    if h_cmp(x, &h, a, b).is_le() {
                        rest.next()
                    } else {
                        incoming.next()
                    }
                }
                (Some(_), None) => rest.next(),
                (None, Some(_)) => incoming.next(),
                (None, None) => break,
            };
            order.push(next.unwrap());
        }
        let target = HOrder::from_order(order);
        let v = field.as_ref().unwrap_or(&self.v);
        for &c in changed {
            let t = h.value(c);
            let partner = v.partner(c);
            let fail = |what: &str| Err(Error::InvalidDmf(format!("`{}` {what}", x.name(c))));
            if !t.is_finite() {
                return fail("has a non-finite value");
            }
            if partner.is_some_and(|p| h.value(p) != t) {
                return fail("differs from its vector partner");
            }
            if x.facets(c)
                .iter()
                .any(|&z| h.value(z) > t || (h.value(z) == t && partner != Some(z)))
                || x.cofacets(c)
                    .iter()
                    .any(|&z| h.value(z) < t || (h.value(z) == t && partner != Some(z)))
            {
                return fail("breaks monotonicity");
            }
            let i = target.position(c);
            let beside = [i.checked_sub(1), Some(i + 1).filter(|&j| j < target.len())];
            for j in beside.into_iter().flatten() {
                let z = target.at(j);
                if h.value(z) == t && partner != Some(z) {
                    return fail("shares its value with a cell that is not its partner");
                }
            }
        }
        let rep = self.reduced.reorder(&target)?;
        self.h = h;
        if let Some(f) = field {
            self.v = f;
        }
        Ok(rep)
    }

    /// Restores a saved function, field and order.
    pub(crate) fn restore(
        &mut self,
        h: DiscreteMorseFunction,
        v: CombinatorialVectorField,
        order: &HOrder,
    ) -> Result<()> {
        self.reduced
            .reorder(order)
            .map_err(|e| Error::Internal(format!("rollback failed: {e}")))?;
        self.h = h;
        self.v = v;
        Ok(())
    }

    /// Compares the engine with a from-scratch reduction and the field with
    /// the level sets of the function.
    pub fn verify(&self) -> Result<StateDiff> {
        let diff = diff_state(&self.reduced)?;
        if induced_vector_field(&self.complex, &self.h)? != self.v {
            return Err(Error::Internal("vector field out of date".into()));
        }
        self.reduced.check_duality()?;
        Ok(diff)
    }
}
