use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex_core::{CellId, DiscreteMorseFunction, LefschetzComplex};
use crate::error::{Error, Result};
use crate::fixtures::{function_for_matching, random_dmf_with_vectors, simplicial_complex};
use crate::simplification::{
    simplify_all, CancelClass, MorseState, Policy, SimplifyOptions, SimplifyReport,
};

/// Largest simplex dimension `simplex_skeleton` builds (131071 cells).
pub const MAX_SKELETON_DIM: usize = 16;

/// The full `d`-simplex: every nonempty subset of `d + 1` vertices.
pub fn simplex_skeleton(d: usize) -> Result<LefschetzComplex> {
    if d > MAX_SKELETON_DIM {
        return Err(Error::Budget(format!(
            "simplex dimension {d} exceeds {MAX_SKELETON_DIM}"
        )));
    }
    Ok(simplicial_complex(&[(0..=d).collect()]))
}

/// An injective discrete Morse function: positions in a random linear
/// extension of the face poset.
pub fn random_dmf(x: &LefschetzComplex, seed: u64) -> DiscreteMorseFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_dmf_with_vectors(&mut rng, x, 0.0)
}

/// Keeps the order of `h` within each dimension but puts dimension `n` in
/// the band `[n, n + 1)`, so pairs of different dimensions occupy disjoint
/// boxes of the diagram. Vectors of `h`, which span two dimensions, are
/// lost; the result is injective.
pub fn banded(x: &LefschetzComplex, h: &DiscreteMorseFunction) -> DiscreteMorseFunction {
    let mut out = h.clone();
    for n in 0..x.num_dims() {
        let mut cells = x.cells_of_dim(n).to_vec();
        cells.sort_by(|&a, &b| h.value(a).total_cmp(&h.value(b)).then(a.cmp(&b)));
        let k = cells.len() as f64;
        for (rank, c) in cells.into_iter().enumerate() {
            out.set(c, n as f64 + rank as f64 / k);
        }
    }
    out
}

/// A function on `simplex_skeleton(d)` with exactly `c` off-diagonal pairs.
/// It starts from the cone matching `σ ↦ σ ∪ {0}`, whose only critical cell
/// is the vertex `0`, removes `c` random vectors and orders the rest at
/// random. The simplex is acyclic, so the `2c` freed cells pair up off the
/// diagonal.
pub fn cone_dmf(x: &LefschetzComplex, c: usize, seed: u64) -> Result<DiscreteMorseFunction> {
    let mut vectors: Vec<(CellId, CellId)> = Vec::new();
    for s in x.cells() {
        let coned = format!("0-{}", x.name(s));
        if x.name(s).split('-').next() == Some("0") {
            continue;
        }
        if let Some(&t) = x.cofacets(s).iter().find(|&&t| x.name(t) == coned) {
            vectors.push((s, t));
        }
    }
    if c > vectors.len() {
        return Err(Error::Budget(format!(
            "{c} pairs requested, at most {} possible",
            vectors.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vectors.shuffle(&mut rng);
    Ok(function_for_matching(&mut rng, x, &vectors[c..]))
}

/// Sizes and per-cancellation costs: `n` cells, `c` off-diagonal pairs and,
/// per cancelled pair, the obstacle count `m(α)` with its wall time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n: usize,
    pub c: usize,
    /// `(dim, m(α), moves, seconds)` for each cancellation.
    pub cancellations: Vec<(usize, usize, usize, f64)>,
    pub mean_seconds: f64,
    pub max_obstacles: usize,
}

impl ComplexityReport {
    pub fn of(report: &SimplifyReport) -> ComplexityReport {
        let cancellations: Vec<_> = report
            .outcomes
            .iter()
            .filter(|o| o.class != CancelClass::NotCancellable)
            .map(|o| (o.dim, o.obstacles, o.moves, o.seconds))
            .collect();
        let mean_seconds = if cancellations.is_empty() {
            0.0
        } else {
            cancellations.iter().map(|c| c.3).sum::<f64>() / cancellations.len() as f64
        };
        let max_obstacles = report
            .outcomes
            .iter()
            .map(|o| o.obstacles)
            .max()
            .unwrap_or(0);
        ComplexityReport {
            n: report.n,
            c: report.c,
            cancellations,
            mean_seconds,
            max_obstacles,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExperimentOptions {
    pub d: usize,
    pub seed: u64,
    pub verify: bool,
    pub policy: Policy,
    pub budget: Option<Duration>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            d: 10,
            seed: 0,
            verify: false,
            policy: Policy::default(),
            budget: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub d: usize,
    pub seed: u64,
    /// Counts per dimension, keyed by class.
    pub classes: BTreeMap<usize, BTreeMap<CancelClass, usize>>,
    pub standard: usize,
    pub region: usize,
    pub not_cancellable: usize,
    pub blocked: usize,
    pub verified: usize,
    pub incomplete: bool,
    pub seconds: f64,
    pub complexity: ComplexityReport,
    pub simplify: SimplifyReport,
}

/// Simplifies a banded random function on the full `d`-simplex and
/// classifies its off-diagonal pairs.
pub fn run_experiment(opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let start = Instant::now();
    let x = Arc::new(simplex_skeleton(opts.d)?);
    let h = banded(&x, &random_dmf(&x, opts.seed));
    let mut ms = MorseState::new(x, h)?;
    let simplify = simplify_all(
        &mut ms,
        SimplifyOptions {
            policy: opts.policy,
            verify: opts.verify,
            budget: opts.budget,
        },
    )?;
    let mut classes: BTreeMap<usize, BTreeMap<CancelClass, usize>> = BTreeMap::new();
    for ((dim, class), k) in simplify.by_dim() {
        classes.entry(dim).or_default().insert(class, k);
    }
    Ok(ExperimentReport {
        d: opts.d,
        seed: opts.seed,
        classes,
        standard: simplify.count(CancelClass::Standard),
        region: simplify.count(CancelClass::Region),
        not_cancellable: simplify.count(CancelClass::NotCancellable),
        blocked: simplify.blocked,
        verified: simplify.verified,
        incomplete: simplify.incomplete,
        seconds: start.elapsed().as_secs_f64(),
        complexity: ComplexityReport::of(&simplify),
        simplify,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d: usize,
    pub n: usize,
    pub c: usize,
    pub cancellations: usize,
    pub mean_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Mean time per cancellation relative to the previous point.
    pub ratios: Vec<f64>,
}

impl ScalingReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Mean time per cancellation on full simplices of the given dimensions,
/// each roughly doubling the cell count of the previous one, all with `c`
/// off-diagonal pairs (see [`cone_dmf`]). Each size is averaged over the
/// seeds.
pub fn scaling_probe(dims: &[usize], c: usize, seeds: &[u64]) -> Result<ScalingReport> {
    let mut points = Vec::new();
    for &d in dims {
        let x = Arc::new(simplex_skeleton(d)?);
        let (mut total, mut count, mut pairs) = (0.0, 0, 0);
        for &seed in seeds {
            let mut ms = MorseState::new(x.clone(), cone_dmf(&x, c, seed)?)?;
            let r = ComplexityReport::of(&simplify_all(&mut ms, SimplifyOptions::default())?);
            total += r.cancellations.iter().map(|c| c.3).sum::<f64>();
            count += r.cancellations.len();
            pairs += r.c;
        }
        let mean_seconds = if count == 0 {
            0.0
        } else {
            total / count as f64
        };
        points.push(ScalingPoint {
            d,
            n: x.len(),
            c: pairs / seeds.len().max(1),
            cancellations: count,
            mean_seconds,
        });
    }
    let ratios = points
        .windows(2)
        .map(|w| {
            if w[0].mean_seconds > 0.0 {
                w[1].mean_seconds / w[0].mean_seconds
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(ScalingReport { points, ratios })
}
