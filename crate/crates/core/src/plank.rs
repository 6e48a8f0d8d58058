//! Planks and cylinders in Euclidean models.
//!
//! A plank of width `w` with unit normal `e` and offset `h₀` is the set
//! `{h : |⟨h − h₀, e⟩| ≤ w/2}`. A sequence `x_n` yields planks
//! `{h : |⟨h, x_n⟩| ≤ 1/2}` of width `1/‖x_n‖`; a point outside all of them
//! is a witness separating the sequence from 0. Cylinders with a
//! `k`-dimensional base are the analogous sets in `H ⊕ … ⊕ H`.
//!
//! All APIs take ball radii. Comparisons against a covered ball of diameter
//! `w` use `w = 2·radius`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{Divergence, NormFamily};
use crate::error::{Error, Result};
use crate::report::{fmt_float, CsvTable, Report};
use crate::seed;
use crate::space::{pair_vectors, product_pair_sq, Coords, ProductVector, SpaceModel, Vector};

const UNIT_TOL: f64 = 1e-9;

fn require_euclidean(space: &SpaceModel, what: &str) -> Result<()> {
    if space.is_euclidean() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{what} live in Euclidean models, not {space}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plank {
    direction: Vector,
    width: f64,
    offset: Option<Vector>,
}

impl Plank {
    pub fn new(direction: Vector, width: f64, offset: Option<Vector>) -> Result<Self> {
        require_euclidean(direction.space(), "planks")?;
        if (direction.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!(
                "plank direction must have norm 1, got {}",
                direction.norm()
            )));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("plank width must be positive, got {width}")));
        }
        if let Some(o) = &offset {
            if o.space() != direction.space() {
                return Err(Error::SpaceMismatch(format!("offset in {}, direction in {}", o.space(), direction.space())));
            }
        }
        Ok(Self { direction, width, offset })
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn offset(&self) -> Option<&Vector> {
        self.offset.as_ref()
    }

    pub fn space(&self) -> &SpaceModel {
        self.direction.space()
    }

    /// `|⟨v − h₀, e⟩| ≤ w/2`.
    pub fn contains(&self, v: &Vector) -> Result<bool> {
        let z = match &self.offset {
            Some(o) => pair_vectors(&self.direction, &v.sub(o)?)?,
            None => pair_vectors(&self.direction, v)?,
        };
        Ok(z.norm() <= 0.5 * self.width)
    }
}

pub fn plank_contains(plank: &Plank, v: &Vector) -> Result<bool> {
    plank.contains(v)
}

/// Planks `{h : |⟨h, x_n⟩| ≤ 1/2}`: direction `x_n/‖x_n‖`, width `1/‖x_n‖`.
pub fn planks_from_sequence(xs: &[Vector]) -> Result<Vec<Plank>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let norm = x.norm();
            if norm == 0.0 {
                return Err(Error::InvalidInput(format!("x_{} is the zero vector", i + 1)));
            }
            Plank::new(x.scaled(1.0 / norm), 1.0 / norm, None)
        })
        .collect()
}

/// `(Σ w_n, Σ w_n²)`.
pub fn budget_sums(planks: &[Plank]) -> (f64, f64) {
    planks
        .iter()
        .fold((0.0, 0.0), |(s1, s2), p| (s1 + p.width, s2 + p.width * p.width))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub space: String,
    pub planks: usize,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub uncovered_count: usize,
    pub uncovered_fraction: f64,
    /// Up to ten uncovered sample points, in sample order.
    pub uncovered_points: Vec<Vector>,
    pub width_sum: f64,
    pub width_square_sum: f64,
}

/// Point `i` of the uniform sample from the ball of radius `radius`.
fn ball_sample(space: SpaceModel, radius: f64, seed_value: u64, i: u64) -> Vector {
    let mut rng = seed::rng_for(seed_value, seed::stream::COVERAGE, i);
    let real_dim = if space.is_complex() { 2 * space.dimension() } else { space.dimension() };
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / real_dim as f64);
    let g = space.gaussian(rng.random());
    let n = g.norm();
    if n == 0.0 {
        return space.zero();
    }
    g.scaled(r / n)
}

/// Fraction of uniform samples from the centred ball of radius `radius` that
/// lie in no plank. Sample `i` depends only on `(seed, i)`.
pub fn coverage_mc(space: SpaceModel, planks: &[Plank], radius: f64, samples: usize, seed_value: u64) -> Result<CoverageReport> {
    require_euclidean(&space, "coverage samples")?;
    if !(radius > 0.0) || samples == 0 {
        return Err(Error::InvalidInput("coverage needs radius > 0 and at least one sample".into()));
    }
    if let Some(p) = planks.iter().find(|p| *p.space() != space) {
        return Err(Error::SpaceMismatch(format!("plank in {} sampled in {space}", p.space())));
    }
    let covered: Vec<bool> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let v = ball_sample(space, radius, seed_value, i);
            planks.iter().any(|p| p.contains(&v).unwrap_or(false))
        })
        .collect();
    let uncovered: Vec<u64> = covered
        .iter()
        .enumerate()
        .filter(|(_, c)| !**c)
        .map(|(i, _)| i as u64)
        .collect();
    let uncovered_points = uncovered
        .iter()
        .take(10)
        .map(|&i| ball_sample(space, radius, seed_value, i))
        .collect();
    let (width_sum, width_square_sum) = budget_sums(planks);
    Ok(CoverageReport {
        space: space.to_string(),
        planks: planks.len(),
        radius,
        samples,
        seed: seed_value,
        uncovered_count: uncovered.len(),
        uncovered_fraction: uncovered.len() as f64 / samples as f64,
        uncovered_points,
        width_sum,
        width_square_sum,
    })
}

impl Report for CoverageReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["planks", "radius", "samples", "seed", "uncovered_count", "uncovered_fraction", "width_sum", "width_square_sum"]);
        t.push(vec![
            self.planks.to_string(),
            fmt_float(self.radius),
            self.samples.to_string(),
            self.seed.to_string(),
            self.uncovered_count.to_string(),
            fmt_float(self.uncovered_fraction),
            fmt_float(self.width_sum),
            fmt_float(self.width_square_sum),
        ]);
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelCover {
    pub covers: bool,
    pub width_sum: f64,
    pub diameter: f64,
}

/// Exact covering decision for planks sharing one normal direction (up to
/// sign) in a real model: the ball of radius `radius` about 0 is covered iff
/// the planks' intervals on the common axis cover `[−radius, radius]`.
pub fn parallel_cover(planks: &[Plank], radius: f64) -> Result<ParallelCover> {
    let (width_sum, _) = budget_sums(planks);
    let diameter = 2.0 * radius;
    let Some(first) = planks.first() else {
        return Ok(ParallelCover { covers: false, width_sum, diameter });
    };
    if first.space().is_complex() {
        return Err(Error::SpaceMismatch("parallel covering is decided in real models only".into()));
    }
    let axis = first.direction();
    let mut intervals = Vec::with_capacity(planks.len());
    for p in planks {
        let cos = pair_vectors(axis, p.direction())?.re;
        if (cos.abs() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition("planks are not parallel".into()));
        }
        let centre = match p.offset() {
            Some(o) => pair_vectors(axis, o)?.re,
            None => 0.0,
        };
        intervals.push((centre - 0.5 * p.width, centre + 0.5 * p.width));
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = -radius;
    for (lo, hi) in intervals {
        if lo > reach {
            break;
        }
        reach = reach.max(hi);
    }
    Ok(ParallelCover { covers: reach >= radius, width_sum, diameter })
}

/// Settings for [`witness_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessConfig {
    /// A witness needs `|⟨h, x_n⟩| > target_margin` for every `n`.
    pub target_margin: f64,
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub budget: usize,
    pub seed: u64,
    /// Closed-form initializer overshoot: `⟨h, x_n⟩ = (1 + δ)/2`.
    pub delta: f64,
    /// `ε` in the reference radius `R + ε`, `R² = Σ ‖x_n‖^{-2}`.
    pub epsilon: f64,
    /// Search ball radius; `None` uses `R + ε`.
    pub search_radius: Option<f64>,
    pub stages: usize,
    pub tau_start: f64,
    pub tau_end: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            target_margin: 0.5,
            restarts: 32,
            budget: 10_000,
            seed: 0,
            delta: 0.2,
            epsilon: 0.1,
            search_radius: None,
            stages: 10,
            tau_start: 1.0,
            tau_end: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub witness: Vector,
    /// `|⟨h, x_n⟩| − target_margin` for each `n`.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub success: bool,
    pub witness_norm: f64,
    /// `R + ε`.
    pub target_radius: f64,
    pub within_target_radius: bool,
    pub search_radius: f64,
    pub closed_form: bool,
    pub iterations: usize,
    pub restarts_used: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Report for WitnessReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["n", "margin"]);
        for (i, m) in self.margins.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_float(*m)]);
        }
        t
    }
}

/// Recomputes the margins `|⟨h, x_n⟩| − target` from scratch.
pub fn witness_margins(xs: &[Vector], h: &Vector, target: f64) -> Result<Vec<f64>> {
    xs.iter().map(|x| pair_vectors(h, x).map(|z| z.norm() - target)).collect()
}

fn mutually_orthogonal(xs: &[Vector]) -> Result<bool> {
    let norms: Vec<f64> = xs.iter().map(|x| x.norm()).collect();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if pair_vectors(&xs[i], &xs[j])?.norm() > 1e-9 * norms[i] * norms[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Problem {
    xs: Vec<Vec<Complex64>>,
    target: f64,
    radius: f64,
}

impl Problem {
    /// `u_n = |⟨h, x_n⟩|` with the pairing values.
    fn pairings(&self, h: &[Complex64]) -> Vec<Complex64> {
        self.xs
            .iter()
            .map(|x| h.iter().zip(x).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    fn softmin(u: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let mut weights: Vec<f64> = u.iter().map(|&v| (-(v - lo) / tau).exp()).collect();
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        (lo - tau * z.ln(), weights)
    }

    fn project(&self, h: &mut [Complex64]) {
        let n = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > self.radius {
            let s = self.radius / n;
            h.iter_mut().for_each(|z| *z *= s);
        }
    }

    fn min_margin(&self, z: &[Complex64]) -> f64 {
        z.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min) - self.target
    }

    /// Annealed projected ascent on the smoothed minimum of `|⟨h, x_n⟩|`.
    /// Returns the iterate with the best true minimum margin.
    fn ascend(&self, mut h: Vec<Complex64>, config: &WitnessConfig) -> (Vec<Complex64>, f64, usize) {
        self.project(&mut h);
        let mut evals = 1usize;
        let mut z = self.pairings(&h);
        let mut best = (h.clone(), self.min_margin(&z));
        let per_stage = config.budget / config.stages.max(1);
        if per_stage == 0 {
            return (best.0, best.1, evals);
        }
        for stage in 0..config.stages {
            let frac = if config.stages > 1 { stage as f64 / (config.stages - 1) as f64 } else { 1.0 };
            let tau = config.tau_start * (config.tau_end / config.tau_start).powf(frac);
            let mut stage_evals = 0usize;
            let mut step = 1.0;
            let u: Vec<f64> = z.iter().map(|v| v.norm()).collect();
            let (mut value, mut weights) = Self::softmin(&u, tau);
            while stage_evals < per_stage {
                let mut grad = vec![Complex64::new(0.0, 0.0); h.len()];
                for ((x, zn), w) in self.xs.iter().zip(&z).zip(&weights) {
                    let modulus = zn.norm();
                    let phase = if modulus > 0.0 { zn.conj() / modulus } else { Complex64::new(1.0, 0.0) };
                    let c = phase * *w;
                    grad.iter_mut().zip(x).for_each(|(g, xi)| *g += xi * c);
                }
                let mut accepted = false;
                while stage_evals < per_stage {
                    let mut cand: Vec<Complex64> = h.iter().zip(&grad).map(|(a, g)| a + g * step).collect();
                    self.project(&mut cand);
                    let cz = self.pairings(&cand);
                    stage_evals += 1;
                    evals += 1;
                    let cu: Vec<f64> = cz.iter().map(|v| v.norm()).collect();
                    let (cv, cw) = Self::softmin(&cu, tau);
                    let ascent: f64 = cand.iter().zip(&h).zip(&grad).map(|((c, a), g)| ((c - a).conj() * g).re).sum();
                    if cv >= value + 1e-4 * ascent && cv > value {
                        h = cand;
                        z = cz;
                        value = cv;
                        weights = cw;
                        let m = self.min_margin(&z);
                        if m > best.1 {
                            best = (h.clone(), m);
                        }
                        step *= 2.0;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-14 {
                        break;
                    }
                }
                if !accepted {
                    break;
                }
            }
        }
        (best.0, best.1, evals)
    }
}

/// Multi-start search for `h` with `|⟨h, x_n⟩| > target_margin` for all `n`
/// inside the search ball. Failure is reported, never turned into a claim
/// that no witness exists.
pub fn witness_search(xs: &[Vector], config: &WitnessConfig) -> Result<WitnessReport> {
    let first = xs
        .first()
        .ok_or_else(|| Error::InvalidInput("witness search needs at least one vector".into()))?;
    let space = *first.space();
    require_euclidean(&space, "witness searches")?;
    if let Some(i) = xs.iter().position(|x| x.is_zero()) {
        return Err(Error::InvalidInput(format!("x_{} is the zero vector", i + 1)));
    }
    if let Some(x) = xs.iter().find(|x| *x.space() != space) {
        return Err(Error::SpaceMismatch(format!("sequence mixes {space} and {}", x.space())));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidInput("at least one restart is required".into()));
    }
    let r = xs.iter().map(|x| x.norm().powi(-2)).sum::<f64>().sqrt();
    let target_radius = r + config.epsilon;
    let radius = config.search_radius.unwrap_or(target_radius);
    let problem = Problem {
        xs: xs.iter().map(|x| x.to_complex()).collect(),
        target: config.target_margin,
        radius,
    };
    let orthogonal = mutually_orthogonal(xs)?;
    let closed_form = || {
        let mut h = vec![Complex64::new(0.0, 0.0); space.dimension()];
        for x in &problem.xs {
            let n2: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let c = 2.0 * config.target_margin * (1.0 + config.delta) / 2.0 / n2;
            h.iter_mut().zip(x).for_each(|(hi, xi)| *hi += xi * c);
        }
        h
    };
    let initial = |restart: usize| -> Vec<Complex64> {
        if restart == 0 && orthogonal {
            return closed_form();
        }
        let g = space.gaussian(seed::derive(config.seed, seed::stream::WITNESS, restart as u64));
        let n = g.norm();
        g.scaled(0.5 * radius / n).to_complex()
    };

    const CHUNK: usize = 8;
    let mut best: Option<(Vec<Complex64>, f64)> = None;
    let mut iterations = 0usize;
    let mut restarts_used = 0usize;
    let mut start = 0usize;
    while start < config.restarts {
        let end = (start + CHUNK).min(config.restarts);
        let results: Vec<(Vec<Complex64>, f64, usize)> =
            (start..end).into_par_iter().map(|r| problem.ascend(initial(r), config)).collect();
        for (h, m, evals) in results {
            iterations += evals;
            restarts_used += 1;
            if best.as_ref().is_none_or(|(_, b)| m > *b) {
                best = Some((h, m));
            }
        }
        if best.as_ref().is_some_and(|(_, b)| *b > 0.0) {
            break;
        }
        start = end;
    }
    let (h, _) = best.expect("at least one restart ran");
    let witness = match space.is_complex() {
        true => Vector::from_complex(space, h)?,
        false => Vector::from_real(space, h.iter().map(|z| z.re).collect())?,
    };
    let margins = witness_margins(xs, &witness, config.target_margin)?;
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let witness_norm = witness.norm();
    Ok(WitnessReport {
        witness,
        min_margin,
        success: min_margin > 0.0,
        margins,
        witness_norm,
        target_radius,
        within_target_radius: witness_norm <= target_radius,
        search_radius: radius,
        closed_form: orthogonal,
        iterations,
        restarts_used,
        seed: config.seed,
        budget: config.budget,
    })
}

/// Set `{g : Σ_{j≤k} |⟨g_j, x⟩|² ≤ t}` in the direct sum of `k` copies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cylinder {
    x: Vector,
    k: usize,
    threshold: f64,
    radius: f64,
}

impl Cylinder {
    pub fn new(x: Vector, k: usize, threshold: f64) -> Result<Self> {
        require_euclidean(x.space(), "cylinders")?;
        if x.is_zero() {
            return Err(Error::InvalidInput("cylinder defining vector is zero".into()));
        }
        if k == 0 || !(threshold > 0.0) {
            return Err(Error::InvalidInput("cylinders need k >= 1 and threshold > 0".into()));
        }
        let radius = threshold.sqrt() / x.norm();
        Ok(Self { x, k, threshold, radius })
    }

    /// Base radius `√t / ‖x‖`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn contains(&self, g: &ProductVector) -> Result<bool> {
        if g.k() != self.k {
            return Err(Error::SpaceMismatch(format!("cylinder has {} components, point has {}", self.k, g.k())));
        }
        Ok(product_pair_sq(g, &self.x)? <= self.threshold)
    }
}

pub fn cylinder_contains(c: &Cylinder, g: &ProductVector) -> Result<bool> {
    c.contains(g)
}

/// `(min_n Σ_j |⟨g_j, x_n⟩|², argmin)` with 1-based index, ties to the
/// smallest index. `g` separates the sequence from 0 iff the minimum exceeds 1.
pub fn separating_neighborhood(g: &ProductVector, xs: &[Vector]) -> Result<(f64, usize)> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("separating neighbourhood needs a nonempty sequence".into()));
    }
    let mut best = (f64::INFINITY, 0usize);
    for (i, x) in xs.iter().enumerate() {
        let v = product_pair_sq(g, x)?;
        if v < best.0 {
            best = (v, i + 1);
        }
    }
    Ok(best)
}

/// `x_n = a_n e_n` in a real Euclidean model without materialising the
/// vectors: pairings reduce to single coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBasis {
    space: SpaceModel,
    amplitudes: Vec<f64>,
}

impl ScaledBasis {
    pub fn new(space: SpaceModel, amplitudes: Vec<f64>) -> Result<Self> {
        require_euclidean(&space, "scaled bases")?;
        if amplitudes.len() > space.dimension() {
            return Err(Error::InvalidInput("more basis vectors than dimensions".into()));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `x_n` as a dense vector.
    pub fn vector(&self, n: usize) -> Result<Vector> {
        Ok(self.space.basis(n)?.scaled(self.amplitudes[n - 1]))
    }

    /// `Σ_j |⟨g_j, x_n⟩|² = a_n² Σ_j |g_j[n]|²`.
    pub fn product_pair_sq(&self, g: &ProductVector, n: usize) -> Result<f64> {
        if *g.space() != self.space {
            return Err(Error::SpaceMismatch(format!("probe in {}, sequence in {}", g.space(), self.space)));
        }
        let a = self.amplitudes[n - 1];
        Ok(g.components().iter().map(|c| (c.get(n) * a).norm_sqr()).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub probe: usize,
    pub covering_indices: Vec<usize>,
    pub min_product_pair_sq: f64,
    pub argmin: usize,
    pub separates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    /// `Σ_{n≤N} r_n³` with `r_n = 1/a_n`.
    pub r3_partial_sum: f64,
    pub r3_tail_bound: Option<f64>,
    /// `Σ_{n≤N} a_n^{-2}`.
    pub a2_partial_sum: f64,
    pub probes: Vec<ProbeOutcome>,
    pub all_probes_covered: bool,
    pub any_probe_separates: bool,
}

impl Report for DemoReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["probe", "covering_indices", "min_product_pair_sq", "argmin", "separates", "r3_partial_sum", "a2_partial_sum"]);
        for p in &self.probes {
            let idx: Vec<String> = p.covering_indices.iter().map(|i| i.to_string()).collect();
            t.push(vec![
                p.probe.to_string(),
                idx.join(" "),
                fmt_float(p.min_product_pair_sq),
                p.argmin.to_string(),
                p.separates.to_string(),
                fmt_float(self.r3_partial_sum),
                fmt_float(self.a2_partial_sum),
            ]);
        }
        t
    }
}

/// Cylinders `C_n = {g : Σ_{j≤3} |⟨g_j, x_n⟩|² ≤ 1}` built from `x_n = a_n e_n`
/// for a family with `Σ a_n^{-2} = ∞` and `Σ a_n^{-3} < ∞`, probed with
/// seeded points supported on coordinates `1..=N`.
pub fn counterexample_demo(family: &NormFamily, n: usize, probes: usize, seed_value: u64) -> Result<DemoReport> {
    const K: usize = 3;
    if n == 0 {
        return Err(Error::InvalidInput("the demo needs N >= 1".into()));
    }
    if family.divergence(2.0)? != Divergence::Divergent {
        return Err(Error::Precondition(format!("sum of a_n^-2 must diverge for {family}")));
    }
    if family.divergence(K as f64)? != Divergence::Convergent {
        return Err(Error::Precondition(format!("sum of a_n^-3 must converge for {family}")));
    }
    let space = SpaceModel::euclidean_real(n + 1)?;
    let amplitudes = family.values(n + 1)?;
    let radii: Vec<f64> = amplitudes.iter().map(|a| 1.0 / a).collect();
    let r3_partial_sum: f64 = radii[..n].iter().map(|r| r * r * r).sum();
    let a2_partial_sum = family.partial_sum(2.0, n)?;
    let sequence = ScaledBasis::new(space, amplitudes)?;

    let outcomes = (0..probes)
        .into_par_iter()
        .map(|i| {
            let components = (0..K)
                .map(|j| {
                    let g = space.gaussian(seed::derive(seed_value, seed::stream::PROBE, (i * K + j) as u64));
                    match g.coords() {
                        Coords::Real(c) => {
                            let mut c = c.clone();
                            c[n] = 0.0;
                            Vector::from_real(space, c)
                        }
                        Coords::Complex(_) => unreachable!("demo model is real"),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let g = ProductVector::new(components)?;
            let mut covering_indices = Vec::new();
            let mut best = (f64::INFINITY, 0usize);
            for m in 1..=n + 1 {
                let v = sequence.product_pair_sq(&g, m)?;
                if v <= 1.0 {
                    covering_indices.push(m);
                }
                if v < best.0 {
                    best = (v, m);
                }
            }
            Ok(ProbeOutcome {
                probe: i,
                covering_indices,
                min_product_pair_sq: best.0,
                argmin: best.1,
                separates: best.0 > 1.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DemoReport {
        family: family.to_string(),
        n,
        k: K,
        seed: seed_value,
        r3_partial_sum,
        r3_tail_bound: family.tail_bound(K as f64, n),
        a2_partial_sum,
        all_probes_covered: outcomes.iter().all(|o| !o.covering_indices.is_empty()),
        any_probe_separates: outcomes.iter().any(|o| o.separates),
        probes: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(d: usize) -> SpaceModel {
        SpaceModel::euclidean_real(d).unwrap()
    }

    #[test]
    fn plank_membership_is_non_strict() {
        let s = real(3);
        let e1 = s.basis(1).unwrap();
        let p = Plank::new(e1.clone(), 1.0, None).unwrap();
        assert!(p.contains(&s.zero()).unwrap());
        assert!(p.contains(&e1.scaled(0.5)).unwrap());
        assert!(!p.contains(&e1.scaled(0.500001)).unwrap());
        let shifted = Plank::new(e1.clone(), 1.0, Some(e1.scaled(3.0))).unwrap();
        assert!(shifted.contains(&e1.scaled(3.0)).unwrap());
        assert!(!shifted.contains(&s.zero()).unwrap());
    }

    #[test]
    fn plank_rejects_bad_parameters() {
        let s = real(2);
        assert!(Plank::new(s.basis(1).unwrap().scaled(2.0), 1.0, None).is_err());
        assert!(Plank::new(s.basis(1).unwrap(), 0.0, None).is_err());
        assert!(Plank::new(SpaceModel::lp(3.0, 2).unwrap().basis(1).unwrap(), 1.0, None).is_err());
        assert!(planks_from_sequence(&[s.zero()]).is_err());
    }

    #[test]
    fn planks_from_sequence_match_pairing() {
        let s = real(3);
        let planks = planks_from_sequence(&[s.basis(1).unwrap().scaled(2.0)]).unwrap();
        assert_eq!(planks[0].width(), 0.5);
        assert_eq!(planks[0].direction(), &s.basis(1).unwrap());
    }

    #[test]
    fn budget_sums_examples() {
        let s = real(2);
        let e = s.basis(1).unwrap();
        assert_eq!(budget_sums(&[]), (0.0, 0.0));
        let planks = vec![Plank::new(e.clone(), 3.0, None).unwrap(), Plank::new(e, 4.0, None).unwrap()];
        assert_eq!(budget_sums(&planks), (7.0, 25.0));
    }

    #[test]
    fn coverage_trivial_cases() {
        let s = real(3);
        let none = coverage_mc(s, &[], 1.0, 100, 1).unwrap();
        assert_eq!(none.uncovered_fraction, 1.0);
        assert_eq!(none.uncovered_points.len(), 10);
        let full = coverage_mc(s, &[Plank::new(s.basis(2).unwrap(), 2.0, None).unwrap()], 1.0, 1000, 1).unwrap();
        assert_eq!(full.uncovered_fraction, 0.0);
        assert_eq!(coverage_mc(s, &[], 1.0, 100, 1).unwrap(), none);
    }

    #[test]
    fn abutting_planks_cover_a_disc() {
        let s = real(2);
        let e1 = s.basis(1).unwrap();
        let planks = vec![
            Plank::new(e1.clone(), 0.5, Some(e1.scaled(-0.25))).unwrap(),
            Plank::new(e1.clone(), 0.5, Some(e1.scaled(0.25))).unwrap(),
        ];
        let report = coverage_mc(s, &planks, 0.5, 100_000, 3).unwrap();
        assert_eq!(report.uncovered_fraction, 0.0);
        let exact = parallel_cover(&planks, 0.5).unwrap();
        assert!(exact.covers);
        assert!(exact.width_sum >= exact.diameter);
        assert!(!parallel_cover(&planks, 0.5 + 1e-9).unwrap().covers);
    }

    #[test]
    fn parallel_cover_detects_gaps() {
        let s = real(2);
        let e1 = s.basis(1).unwrap();
        let planks = vec![
            Plank::new(e1.scaled(-1.0), 0.4, Some(e1.scaled(-0.3))).unwrap(),
            Plank::new(e1.clone(), 0.4, Some(e1.scaled(0.3))).unwrap(),
        ];
        assert!(!parallel_cover(&planks, 0.5).unwrap().covers);
        let tilted = Plank::new(s.random_unit(4), 1.0, None).unwrap();
        assert!(parallel_cover(&[planks[0].clone(), tilted], 0.5).is_err());
        assert!(!parallel_cover(&[], 1.0).unwrap().covers);
    }

    #[test]
    fn orthogonal_closed_form_witness() {
        let s = real(10);
        let xs: Vec<_> = (1..=10).map(|n| s.basis(n).unwrap().scaled(n as f64)).collect();
        let config = WitnessConfig { budget: 0, restarts: 1, ..Default::default() };
        let report = witness_search(&xs, &config).unwrap();
        assert!(report.closed_form);
        assert!(report.success);
        for (n, m) in report.margins.iter().enumerate() {
            assert!((m - 0.1).abs() < 1e-12, "margin {n}: {m}");
        }
        for n in 1..=10 {
            assert!((report.witness.get(n).re - 0.6 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_search_runs_on_complex_models() {
        let s = SpaceModel::euclidean_complex(6).unwrap();
        let xs: Vec<_> = (0..4).map(|i| s.random_unit(i).scaled(3.0)).collect();
        let report = witness_search(&xs, &WitnessConfig { restarts: 4, budget: 2000, ..Default::default() }).unwrap();
        let recheck = witness_margins(&xs, &report.witness, 0.5).unwrap();
        assert_eq!(recheck, report.margins);
        assert!(report.success);
    }

    #[test]
    fn witness_search_rejects_zero_vectors() {
        let s = real(3);
        assert!(witness_search(&[s.basis(1).unwrap(), s.zero()], &WitnessConfig::default()).is_err());
        assert!(witness_search(&[], &WitnessConfig::default()).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let s = real(4);
        let x = s.basis(1).unwrap().scaled(2.0);
        let c = Cylinder::new(x, 3, 1.0).unwrap();
        assert_eq!(c.radius(), 0.5);
        assert!(c.contains(&ProductVector::zero(s, 3).unwrap()).unwrap());
        let g = ProductVector::new(vec![s.basis(1).unwrap(), s.zero(), s.zero()]).unwrap();
        assert!(!c.contains(&g).unwrap());
        let disjoint = ProductVector::new(vec![s.basis(2).unwrap(), s.basis(3).unwrap(), s.basis(4).unwrap()]).unwrap();
        assert!(c.contains(&disjoint).unwrap());
        assert!(c.contains(&ProductVector::zero(s, 2).unwrap()).is_err());
    }

    #[test]
    fn separating_neighborhood_examples() {
        let s = real(4);
        let e = |i| s.basis(i).unwrap();
        let xs = vec![e(1).scaled(2.0), e(2).scaled(2.0)];
        assert_eq!(separating_neighborhood(&ProductVector::zero(s, 3).unwrap(), &xs).unwrap(), (0.0, 1));
        let g = ProductVector::new(vec![e(1), e(2), e(3)]).unwrap();
        assert_eq!(separating_neighborhood(&g, &xs).unwrap(), (4.0, 1));
        let with_orth = vec![e(1).scaled(2.0), e(4)];
        assert_eq!(separating_neighborhood(&g, &with_orth).unwrap().0, 0.0);
    }

    #[test]
    fn scaled_basis_matches_dense_pairings() {
        let s = real(8);
        let amplitudes: Vec<f64> = (1..=8).map(|n| (n as f64).sqrt()).collect();
        let seq = ScaledBasis::new(s, amplitudes).unwrap();
        let g = ProductVector::new((0..3).map(|j| s.gaussian(j)).collect()).unwrap();
        for n in 1..=8 {
            let dense = product_pair_sq(&g, &seq.vector(n).unwrap()).unwrap();
            assert!((dense - seq.product_pair_sq(&g, n).unwrap()).abs() <= 1e-12 * dense.max(1.0));
        }
    }

    #[test]
    fn small_demo_is_covered_and_not_separated() {
        let fam = NormFamily::power(1.0, 0.5).unwrap();
        let report = counterexample_demo(&fam, 100, 10, 42).unwrap();
        assert!(report.all_probes_covered);
        assert!(!report.any_probe_separates);
        for p in &report.probes {
            assert!(p.covering_indices.contains(&101));
        }
        assert!(counterexample_demo(&NormFamily::power(1.0, 1.0).unwrap(), 10, 1, 0).is_err());
        assert!(counterexample_demo(&NormFamily::power(1.0, 0.2).unwrap(), 10, 1, 0).is_err());
    }
}
