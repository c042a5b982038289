use std::collections::BTreeSet;

use serde::Serialize;

use super::moves::{
    choose_gap, critical_order, move_down, move_right, AppliedMove, Direction, MoveSpec,
};
use super::MorseState;
use crate::complex_core::{
    reverse_path, unique_path, CellId, CombinatorialVectorField, DiscreteMorseFunction,
    GradientPath,
};
use crate::error::{Error, Result};
use crate::forbidden_regions::ForbiddenRegionPair;
use crate::pairing_relations::BirthDeathPair;
use crate::transposition_engine::Role;

/// What to record and check while cancelling a pair.
#[derive(Clone, Copy, Debug, Default)]
pub struct TraceOptions {
    /// Keep the function after every step.
    pub keep_functions: bool,
    /// Recompute the forbidden regions after every step.
    pub check_regions: bool,
    /// Compare with the oracle after every step.
    pub verify: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Move(MoveSpec),
    /// Pushes every other cell out of the pair's value interval.
    Squeeze,
    Reverse,
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: Step,
    /// Cells whose value changed.
    pub relocated: usize,
    /// Adjacent transpositions applied to the reductions.
    pub swaps: usize,
    /// Transpositions that changed some reduction.
    pub events: usize,
    pub h: Option<DiscreteMorseFunction>,
    pub regions: Option<ForbiddenRegionPair>,
}

#[derive(Clone, Debug)]
pub struct SimplificationTrace {
    pub birth: CellId,
    pub death: CellId,
    pub lifetime: f64,
    pub initial: Option<DiscreteMorseFunction>,
    pub initial_regions: Option<ForbiddenRegionPair>,
    pub steps: Vec<StepRecord>,
    /// The reversed path, listed from the death down to the birth.
    pub rho: Option<GradientPath>,
    /// `max |h - h'|` over the whole cancellation.
    pub max_change: f64,
}

impl SimplificationTrace {
    pub fn moves(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.step, Step::Move(_)))
            .count()
    }

    /// Whether each recorded region pair lies inside the previous one.
    pub fn regions_nested(&self) -> Option<bool> {
        let mut prev = self.initial_regions.as_ref()?;
        for s in &self.steps {
            if let (Step::Move(_), Some(r)) = (&s.step, &s.regions) {
                if !r.is_subset_of(prev) {
                    return Some(false);
                }
                prev = r;
            }
        }
        Some(true)
    }

    /// The functions of the trace, starting with the initial one, when kept.
    pub fn functions(&self) -> Option<Vec<&DiscreteMorseFunction>> {
        let mut out = vec![self.initial.as_ref()?];
        for s in &self.steps {
            out.push(s.h.as_ref()?);
        }
        Some(out)
    }
}

fn pair_cells(alpha: &BirthDeathPair) -> Result<(CellId, CellId)> {
    alpha
        .death
        .map(|d| (alpha.birth, d))
        .ok_or_else(|| Error::Ineligible("essential pair".into()))
}

type Diagram = Vec<(CellId, CellId, f64, f64)>;

/// Off-diagonal pairs and values equal, except for the values of `alpha`.
fn diagram_kept(before: &Diagram, after: &Diagram, alpha: (CellId, CellId)) -> bool {
    let key = |d: &Diagram| {
        let mut d = d.clone();
        d.sort_by_key(|p| (p.0, p.1));
        d
    };
    let (before, after) = (key(before), key(after));
    before.len() == after.len()
        && before.iter().zip(&after).all(|(p, q)| {
            p.0 == q.0
                && p.1 == q.1
                && ((p.0, p.1) == alpha
                    || (p.2.to_bits() == q.2.to_bits() && p.3.to_bits() == q.3.to_bits()))
        })
}

fn record(
    ms: &MorseState,
    step: Step,
    relocated: usize,
    swaps: usize,
    events: usize,
    opts: &TraceOptions,
    alpha: &BirthDeathPair,
) -> Result<StepRecord> {
    let regions = if opts.check_regions && !matches!(step, Step::Reverse) {
        Some(ms.regions(alpha)?)
    } else {
        None
    };
    Ok(StepRecord {
        step,
        relocated,
        swaps,
        events,
        h: opts.keep_functions.then(|| ms.h.clone()),
        regions,
    })
}

fn verify_step(ms: &MorseState, opts: &TraceOptions, what: &str) -> Result<()> {
    if opts.verify {
        let d = ms.verify()?;
        if !d.is_empty() {
            return Err(Error::Internal(format!(
                "oracle mismatch after {what}: {d}"
            )));
        }
    }
    Ok(())
}

/// Applies `h` expecting the same vector field and an unchanged diagram
/// apart from `alpha`'s values. `moved` lists the only cells whose values
/// changed, when they are known and already checked.
fn apply_same_field(
    ms: &mut MorseState,
    h: DiscreteMorseFunction,
    alpha: (CellId, CellId),
    moved: Option<&[CellId]>,
) -> Result<(usize, usize)> {
    let rep = match moved {
        Some(cells) => ms.set_function_local(h, cells, None)?,
        None => {
            let changed: Vec<CellId> = ms
                .complex()
                .cells()
                .filter(|&c| h.value(c) != ms.h.value(c))
                .collect();
            match ms.set_function_local(h, &changed, None) {
                Err(Error::InvalidDmf(_)) => {
                    return Err(Error::Blocked("values too close to separate".into()))
                }
                r => r?,
            }
        }
    };
    // the other criticals keep their values, so an unswitched pairing
    // leaves the rest of the diagram untouched
    if rep.switched() || ms.reduced.role(alpha.0) != Role::Birth(alpha.1) {
        return Err(Error::Internal(
            "an allowed move switched the pairing".into(),
        ));
    }
    Ok((rep.swaps, rep.events.len()))
}

fn try_move(
    ms: &MorseState,
    alpha: &BirthDeathPair,
    dir: Direction,
) -> Result<(MoveSpec, AppliedMove)> {
    let mv = choose_gap(&ms.v, &ms.h, ms.reduced.order().order(), alpha, dir)?;
    let applied = match dir {
        Direction::Right => move_right(&ms.v, &ms.h, &mv)?,
        Direction::Down => move_down(&ms.v, &ms.h, &mv)?,
    };
    Ok((mv, applied))
}

/// Moves `alpha` right and down until its two cells are adjacent among the
/// critical cells. One of the two moves always applies when the regions of
/// `alpha` are disjoint.
pub fn journey_to_diagonal(
    ms: &mut MorseState,
    alpha: &BirthDeathPair,
    opts: &TraceOptions,
) -> Result<SimplificationTrace> {
    let (b, d) = pair_cells(alpha)?;
    let mut trace = SimplificationTrace {
        birth: b,
        death: d,
        lifetime: ms.h.value(d) - ms.h.value(b),
        initial: opts.keep_functions.then(|| ms.h.clone()),
        initial_regions: if opts.check_regions {
            Some(ms.regions(alpha)?)
        } else {
            None
        },
        steps: Vec::new(),
        rho: None,
        max_change: 0.0,
    };
    loop {
        let crit = critical_order(&ms.v, ms.reduced.order().order());
        let ib = crit.iter().position(|&c| c == b).unwrap();
        let id = crit.iter().position(|&c| c == d).unwrap();
        if id <= ib + 1 {
            break;
        }
        let (x, y) = (crit[ib + 1], crit[id - 1]);
        let st = &ms.reduced;
        let right_ok = !ms.v.flows_to(x, b) && (st.role(x).is_death() || !st.u_dual(x, b));
        let down_ok = !ms.v.flows_to(d, y) && (st.role(y).is_birth() || !st.u(y, d));
        let mut last_err = None;
        let mut chosen = None;
        for (ok, dir) in [(right_ok, Direction::Right), (down_ok, Direction::Down)] {
            if !ok {
                continue;
            }
            match try_move(ms, alpha, dir) {
                Ok(m) => {
                    chosen = Some(m);
                    break;
                }
                Err(e @ (Error::Blocked(_) | Error::NoGap(_))) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        let Some((mv, applied)) = chosen else {
            let x_name = ms.complex.name(x).to_string();
            let y_name = ms.complex.name(y).to_string();
            return Err(last_err.unwrap_or_else(|| {
                Error::Blocked(format!(
                    "no allowed move: `{x_name}` above the birth, `{y_name}` below the death"
                ))
            }));
        };
        let (swaps, events) = apply_same_field(ms, applied.h, (b, d), Some(&applied.relocated))?;
        trace.steps.push(record(
            ms,
            Step::Move(mv),
            applied.relocated.len(),
            swaps,
            events,
            opts,
            alpha,
        )?);
        verify_step(ms, opts, "a move")?;
    }
    Ok(trace)
}

/// Reassigns values in `[h(b), h(d)]` so that exactly the cells of `rho`
/// stay in that interval: cells forced above `rho` (cofacets and partners)
/// go to the top, all others to the bottom, and relative order is kept
/// within each group. `rho` is listed from `d` down to `b`, and `b` and `d`
/// must be adjacent among critical cells.
pub fn final_squeeze(
    v: &CombinatorialVectorField,
    h: &DiscreteMorseFunction,
    rho: &GradientPath,
) -> Result<DiscreteMorseFunction> {
    let x = v.complex();
    let (d, b) = (rho.top(), rho.bottom());
    let (lo, hi) = (h.value(b), h.value(d));
    let in_window = |c: CellId| lo <= h.value(c) && h.value(c) <= hi;
    let on_path: BTreeSet<CellId> = rho.cells.iter().copied().collect();
    let mut class = vec![0u8; x.len()]; // 0 below, 1 path, 2 above
    for &c in &on_path {
        if !in_window(c) {
            return Err(Error::InvalidPath(format!(
                "`{}` lies outside the pair's interval",
                x.name(c)
            )));
        }
        class[c.index()] = 1;
    }
    let mut stack: Vec<CellId> = on_path.iter().copied().collect();
    while let Some(c) = stack.pop() {
        let partner = if class[c.index()] == 2 {
            v.partner(c)
        } else {
            None
        };
        for &z in x.cofacets(c).iter().chain(partner.as_ref()) {
            if in_window(z) && class[z.index()] == 0 {
                if v.is_critical(z) {
                    return Err(Error::Blocked(format!(
                        "critical `{}` is forced into the interval",
                        x.name(z)
                    )));
                }
                class[z.index()] = 2;
                stack.push(z);
            }
        }
    }
    let mut window: Vec<CellId> = x.cells().filter(|&c| in_window(c)).collect();
    window.sort_by(|&p, &q| {
        class[p.index()]
            .cmp(&class[q.index()])
            .then(h.value(p).total_cmp(&h.value(q)))
    });
    let mut groups: Vec<Vec<CellId>> = Vec::new();
    for c in window {
        match groups.last_mut() {
            Some(g) if class[g[0].index()] == class[c.index()] && h.value(g[0]) == h.value(c) => {
                g.push(c)
            }
            _ => groups.push(vec![c]),
        }
    }
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidPath(
            "the pair's interval is degenerate".into(),
        ));
    }
    let mut out = h.clone();
    for (i, g) in groups.iter().enumerate() {
        let t = if i + 1 == k {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / ((k - 1) as f64)
        };
        for &c in g {
            out.set(c, t);
        }
    }
    Ok(out)
}

/// `h'(x_i) = h(x_{m - 2⌊i/2⌋})` along `rho = (b = x_0, ..., x_m = d)`,
/// which requires `h⁻¹([h(b), h(d)]) = rho`.
pub fn reverse_path_dmf(
    h: &DiscreteMorseFunction,
    rho: &GradientPath,
) -> Result<DiscreteMorseFunction> {
    let cells = rho.from_bottom();
    let m = cells.len() - 1;
    let (lo, hi) = (h.value(cells[0]), h.value(cells[m]));
    let on_path: BTreeSet<CellId> = cells.iter().copied().collect();
    let inside = h
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &t)| lo <= t && t <= hi)
        .count();
    if inside != on_path.len()
        || cells
            .iter()
            .any(|&c| !(lo <= h.value(c) && h.value(c) <= hi))
    {
        return Err(Error::InvalidPath(
            "the pair's interval holds cells off the path".into(),
        ));
    }
    let mut out = h.clone();
    for (i, &c) in cells.iter().enumerate() {
        out.set(c, h.value(cells[m - 2 * (i / 2)]));
    }
    Ok(out)
}

/// Cancels an eligible pair: journey, squeeze, reversal. On error the
/// state is rolled back.
pub fn cancel_pair(
    ms: &mut MorseState,
    alpha: &BirthDeathPair,
    opts: &TraceOptions,
) -> Result<SimplificationTrace> {
    let (b, d) = pair_cells(alpha)?;
    let e = ms.eligibility(alpha)?;
    if !e.eligible {
        return Err(Error::Ineligible(
            e.describe(|c| ms.complex.name(c).to_string()),
        ));
    }
    let saved = (ms.h.clone(), ms.v.clone(), ms.reduced.order().clone());
    match cancel_in_place(ms, alpha, opts, (b, d)) {
        Ok(mut trace) => {
            trace.max_change = saved.0.max_abs_diff(&ms.h);
            if trace.max_change > trace.lifetime {
                return Err(Error::Internal(format!(
                    "values moved by {} beyond the lifetime {}",
                    trace.max_change, trace.lifetime
                )));
            }
            Ok(trace)
        }
        Err(e) => {
            ms.restore(saved.0, saved.1, &saved.2)?;
            Err(e)
        }
    }
}

fn cancel_in_place(
    ms: &mut MorseState,
    alpha: &BirthDeathPair,
    opts: &TraceOptions,
    (b, d): (CellId, CellId),
) -> Result<SimplificationTrace> {
    let before = ms.diagram();
    let mut trace = journey_to_diagonal(ms, alpha, opts)?;

    let rho = unique_path(&ms.v, d, b)?;
    let squeezed = final_squeeze(&ms.v, &ms.h, &rho)?;
    let relocated = (0..squeezed.len())
        .filter(|&i| squeezed.values()[i] != ms.h.values()[i])
        .count();
    let (swaps, events) = apply_same_field(ms, squeezed, (b, d), None)?;
    trace.steps.push(record(
        ms,
        Step::Squeeze,
        relocated,
        swaps,
        events,
        opts,
        alpha,
    )?);
    verify_step(ms, opts, "the squeeze")?;

    let reversed_field = reverse_path(&ms.v, &rho)?;
    let reversed = reverse_path_dmf(&ms.h, &rho)?;
    let rep = ms
        .set_function_local(reversed, &rho.cells, Some(reversed_field))
        .map_err(|e| Error::Internal(format!("reversal: {e}")))?;
    trace.steps.push(record(
        ms,
        Step::Reverse,
        rho.cells.len(),
        rep.swaps,
        rep.events.len(),
        opts,
        alpha,
    )?);
    verify_step(ms, opts, "the reversal")?;

    let expected: Diagram = before
        .iter()
        .copied()
        .filter(|p| (p.0, p.1) != (b, d))
        .collect();
    if !diagram_kept(&expected, &ms.diagram(), (b, d)) {
        return Err(Error::Internal("cancellation disturbed other pairs".into()));
    }
    trace.rho = Some(rho);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_core::validate_dmf;
    use crate::fixtures;
    use std::sync::Arc;

    #[test]
    fn reverse_formula_small_paths() {
        let x = Arc::new(fixtures::segment());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2.]);
        let id = |n: &str| x.id(n).unwrap();
        let rho = GradientPath {
            cells: vec![id("e"), id("v")],
        };
        let h2 = reverse_path_dmf(&h, &rho).unwrap();
        assert_eq!(h2.value(id("v")), 2.0);
        assert_eq!(h2.value(id("e")), 2.0);
    }

    #[test]
    fn triangle_cancellation() {
        let x = Arc::new(fixtures::hollow_triangle());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let mut ms = MorseState::new(x.clone(), h).unwrap();
        let id = |n: &str| x.id(n).unwrap();
        let alpha = ms.pair_of(id("c"));
        let opts = TraceOptions {
            keep_functions: true,
            check_regions: true,
            verify: true,
        };
        let t = cancel_pair(&mut ms, &alpha, &opts).unwrap();
        assert!(t.max_change <= t.lifetime);
        assert_eq!(ms.off_diagonal().len(), 1);
        assert!(validate_dmf(&x, ms.function()).unwrap().is_valid());
        assert_eq!(t.regions_nested(), Some(true));
    }

    #[test]
    fn ineligible_pair_is_refused() {
        let x = Arc::new(fixtures::hollow_triangle());
        let h = DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.]);
        let mut ms = MorseState::new(x.clone(), h).unwrap();
        let alpha = ms.pair_of(x.id("a").unwrap());
        assert!(matches!(
            cancel_pair(&mut ms, &alpha, &TraceOptions::default()),
            Err(Error::Ineligible(_))
        ));
    }
}
