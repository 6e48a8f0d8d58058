//! Norm families `a_n` with analytic divergence certificates, the triangular
//! weights and orthogonal sequence `x_n = a_n e_n` for Hilbert models, and the
//! block partition, block weights and block basis used inside `ℓ_p` models.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::serialize_extended_f64;
use crate::seed;
use crate::space::{conjugate_exponent, Functional, Rotation, SpaceKind, SpaceModel, Vector};
use crate::summability::{min_on_support, p_transform, ScalarSequence, WeightMatrix};

/// Tolerance used when an exponent product must equal 1 exactly
/// (e.g. `q·α = 1` on the boundary of convergence).
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Divergent,
    Convergent,
}

/// Prescribed norms `a_n > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum NormFamily {
    /// `a_n = c · n^α`.
    Power { c: f64, alpha: f64 },
    /// `a_n = n^α · ln(n + 1)^β`.
    PowerLog { alpha: f64, beta: f64 },
    Explicit(Vec<f64>),
}

impl NormFamily {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("power family needs c > 0 and finite alpha, got c={c}, alpha={alpha}")));
        }
        Ok(NormFamily::Power { c, alpha })
    }

    pub fn powerlog(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidInput("powerlog family needs finite exponents".into()));
        }
        Ok(NormFamily::PowerLog { alpha, beta })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("explicit family is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("explicit family: a_{} = {v} is not a positive number", i + 1)));
        }
        Ok(NormFamily::Explicit(values))
    }

    /// Parses `power:c:alpha`, `powerlog:alpha:beta`, `explicit:@file.csv`
    /// or `explicit:v1,v2,…`.
    pub fn parse(desc: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("family descriptor `{desc}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = desc.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "power" => {
                let (c, a) = rest.split_once(':').ok_or_else(bad)?;
                Self::power(num(c)?, num(a)?)
            }
            "powerlog" => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Self::powerlog(num(a)?, num(b)?)
            }
            "explicit" => {
                let text = match rest.strip_prefix('@') {
                    Some(path) => std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?,
                    None => rest.to_string(),
                };
                let values = ScalarSequence::parse(&text)?;
                Self::explicit(values.values().to_vec())
            }
            _ => Err(bad()),
        }
    }

    /// Number of stored values for explicit families.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            NormFamily::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// `a_n` for `n ≥ 1`.
    pub fn a_value(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("norm families are indexed from n = 1".into()));
        }
        let x = n as f64;
        Ok(match self {
            NormFamily::Power { c, alpha } => c * x.powf(*alpha),
            NormFamily::PowerLog { alpha, beta } => x.powf(*alpha) * (x + 1.0).ln().powf(*beta),
            NormFamily::Explicit(v) => *v.get(n - 1).ok_or_else(|| {
                Error::InvalidInput(format!("explicit family has {} values, a_{n} requested", v.len()))
            })?,
        })
    }

    /// `a_n^{-q}`.
    pub fn inverse_power(&self, n: usize, q: f64) -> Result<f64> {
        Ok(self.a_value(n)?.powf(-q))
    }

    pub fn values(&self, horizon: usize) -> Result<Vec<f64>> {
        (1..=horizon).map(|n| self.a_value(n)).collect()
    }

    /// Whether `Σ a_n^{-q}` diverges, decided analytically.
    pub fn divergence(&self, q: f64) -> Result<Divergence> {
        if !(q > 0.0) {
            return Err(Error::InvalidInput(format!("divergence exponent must be positive, got {q}")));
        }
        let verdict = match self {
            NormFamily::Power { alpha, .. } => q * alpha <= 1.0 + BOUNDARY_TOL,
            NormFamily::PowerLog { alpha, beta } => {
                let s = q * alpha;
                if (s - 1.0).abs() <= BOUNDARY_TOL {
                    q * beta <= 1.0 + BOUNDARY_TOL
                } else {
                    s < 1.0
                }
            }
            NormFamily::Explicit(_) => return Err(Error::NoCertificate),
        };
        Ok(if verdict { Divergence::Divergent } else { Divergence::Convergent })
    }

    /// `Σ_{n≤N} a_n^{-q}`, summed in increasing `n`.
    pub fn partial_sum(&self, q: f64, horizon: usize) -> Result<f64> {
        if horizon == 0 {
            return Err(Error::InvalidInput("partial sums need N >= 1".into()));
        }
        let mut s = 0.0;
        for n in 1..=horizon {
            s += self.inverse_power(n, q)?;
        }
        Ok(s)
    }

    /// Partial sums `S_1..S_N` in one pass.
    pub fn partial_sums(&self, q: f64, horizon: usize) -> Result<Vec<f64>> {
        let mut s = 0.0;
        (1..=horizon)
            .map(|n| {
                s += self.inverse_power(n, q)?;
                Ok(s)
            })
            .collect()
    }

    /// Upper bound on `Σ_{n>N} a_n^{-q}` by comparison with an integral, when
    /// the terms are eventually decreasing and the series converges.
    pub fn tail_bound(&self, q: f64, horizon: usize) -> Option<f64> {
        let x = horizon as f64;
        match self {
            NormFamily::Power { c, alpha } => {
                let s = q * alpha;
                (s > 1.0 + BOUNDARY_TOL).then(|| c.powf(-q) * x.powf(1.0 - s) / (s - 1.0))
            }
            NormFamily::PowerLog { alpha, beta } => {
                let s = q * alpha;
                let t = q * beta;
                if s > 1.0 + BOUNDARY_TOL && *beta >= 0.0 {
                    Some((x + 1.0).ln().powf(-t) * x.powf(1.0 - s) / (s - 1.0))
                } else if (s - 1.0).abs() <= BOUNDARY_TOL && t > 1.0 + BOUNDARY_TOL {
                    // 1/x ≤ 2/(x+1) for x ≥ 1, and ∫ dx/((x+1) ln(x+1)^t) has a closed form.
                    Some(2.0 * (x + 1.0).ln().powf(1.0 - t) / (t - 1.0))
                } else {
                    None
                }
            }
            NormFamily::Explicit(_) => None,
        }
    }
}

impl fmt::Display for NormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormFamily::Power { c, alpha } => write!(f, "power:{c}:{alpha}"),
            NormFamily::PowerLog { alpha, beta } => write!(f, "powerlog:{alpha}:{beta}"),
            NormFamily::Explicit(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "explicit:{}", items.join(","))
            }
        }
    }
}

/// Conjugate exponents `p ∈ [2, ∞]`, `p′ ∈ [1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    #[serde(serialize_with = "serialize_extended_f64")]
    p: f64,
    p_prime: f64,
}

impl ExponentPair {
    pub fn from_p(p: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::InvalidInput(format!("exponent p must lie in [2, inf], got {p}")));
        }
        Ok(Self { p, p_prime: conjugate_exponent(p) })
    }

    pub fn from_p_prime(p_prime: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p_prime) {
            return Err(Error::InvalidInput(format!("dual exponent p' must lie in [1, 2], got {p_prime}")));
        }
        Ok(Self { p: conjugate_exponent(p_prime), p_prime })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_prime(&self) -> f64 {
        self.p_prime
    }

    /// `|1/p + 1/p′ − 1|`.
    pub fn conjugacy_error(&self) -> f64 {
        (1.0 / self.p + 1.0 / self.p_prime - 1.0).abs()
    }
}

/// `x_n = a_n e_n` for `n = 1..=horizon`, optionally rotated.
pub fn main_theorem_sequence(
    space: SpaceModel,
    family: &NormFamily,
    horizon: usize,
    rotation: Option<&Rotation>,
) -> Result<Vec<Vector>> {
    if !space.is_euclidean() {
        return Err(Error::SpaceMismatch(format!("the orthogonal sequence lives in a Euclidean model, not {space}")));
    }
    if space.dimension() < horizon {
        return Err(Error::InvalidInput(format!(
            "dimension {} is smaller than the horizon {horizon}",
            space.dimension()
        )));
    }
    if let Some(r) = rotation {
        if *r.space() != space {
            return Err(Error::SpaceMismatch(format!("rotation acts on {}, sequence on {space}", r.space())));
        }
    }
    (1..=horizon)
        .map(|n| {
            let x = space.basis(n)?.scaled(family.a_value(n)?);
            match rotation {
                Some(r) => r.apply(&x),
                None => Ok(x),
            }
        })
        .collect()
}

/// Triangular weights `p_{n,m} = a_m^{-2} / Σ_{j≤n} a_j^{-2}` for `m ≤ n`.
pub fn main_theorem_weights(family: &NormFamily, horizon: usize) -> Result<WeightMatrix> {
    if horizon == 0 {
        return Err(Error::InvalidInput("weights need N >= 1".into()));
    }
    let raw = (1..=horizon).map(|m| family.inverse_power(m, 2.0)).collect::<Result<Vec<_>>>()?;
    let windows: Vec<(usize, usize)> = (1..=horizon).map(|n| (1, n)).collect();
    WeightMatrix::normalized_windows(raw, &windows)
}

/// Boundaries `0 = n_1 < n_2 < … < n_{K+1}` with block sums
/// `S_k = Σ_{j=n_k+1}^{n_{k+1}} a_j^{-p′}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPartition {
    boundaries: Vec<usize>,
    sums: Vec<f64>,
    p_prime: f64,
}

impl BlockPartition {
    /// Partition with the given boundaries (the first must be 0); sums are
    /// computed from `family`.
    pub fn from_boundaries(family: &NormFamily, p_prime: f64, boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 {
            return Err(Error::InvalidInput("a partition needs boundaries 0 = n_1 < n_2 < …".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("partition boundaries must be strictly increasing".into()));
        }
        let sums = boundaries
            .windows(2)
            .map(|w| block_sum(family, p_prime, w[0] + 1, w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { boundaries, sums, p_prime })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn p_prime(&self) -> f64 {
        self.p_prime
    }

    pub fn num_blocks(&self) -> usize {
        self.sums.len()
    }

    /// Last index covered by the partition.
    pub fn horizon(&self) -> usize {
        *self.boundaries.last().expect("partition has boundaries")
    }

    /// Block `k` (1-based) as an inclusive index range.
    pub fn block(&self, k: usize) -> (usize, usize) {
        (self.boundaries[k - 1] + 1, self.boundaries[k])
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.boundaries.windows(2).map(|w| (w[0] + 1, w[1]))
    }

    /// Largest discrepancy between stored and recomputed block sums.
    pub fn recomputation_error(&self, family: &NormFamily) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, (lo, hi)) in self.blocks().enumerate() {
            worst = worst.max((block_sum(family, self.p_prime, lo, hi)? - self.sums[k]).abs());
        }
        Ok(worst)
    }
}

fn block_sum(family: &NormFamily, q: f64, lo: usize, hi: usize) -> Result<f64> {
    let mut s = 0.0;
    for j in lo..=hi {
        s += family.inverse_power(j, q)?;
    }
    Ok(s)
}

/// Greedy partition into `blocks` blocks with `S_k ≥ growth_target · k`
/// (and `S_k ≥ S_1` for `k ≥ 2`), extending each block one index at a time.
pub fn block_partition(
    family: &NormFamily,
    p_prime: f64,
    blocks: usize,
    growth_target: f64,
    horizon_cap: usize,
) -> Result<BlockPartition> {
    if blocks == 0 {
        return Err(Error::InvalidInput("at least one block is required".into()));
    }
    if !(growth_target >= 0.0 && growth_target.is_finite()) {
        return Err(Error::InvalidInput(format!("growth target must be finite and nonnegative, got {growth_target}")));
    }
    if family.divergence(p_prime)? == Divergence::Convergent {
        return Err(Error::ConstructionImpossible(format!(
            "sum of a_n^(-{p_prime}) converges for {family}; block sums cannot grow without bound, \
             so the block-weight construction requires a divergent family"
        )));
    }
    let mut boundaries = vec![0usize];
    let mut sums = Vec::with_capacity(blocks);
    let mut next = 0usize;
    for k in 1..=blocks {
        let target = match sums.first() {
            Some(&first) => (growth_target * k as f64).max(first),
            None => growth_target * k as f64,
        };
        let mut s = 0.0;
        loop {
            next += 1;
            if next > horizon_cap {
                return Err(Error::Resource(format!(
                    "block {k} needs more than {horizon_cap} indices to reach sum {target}"
                )));
            }
            s += family.inverse_power(next, p_prime)?;
            if s >= target {
                break;
            }
        }
        boundaries.push(next);
        sums.push(s);
    }
    Ok(BlockPartition { boundaries, sums, p_prime })
}

/// Block weights `p_{k,m} = a_m^{-p′} / S_k` for `m` in block `k`.
pub fn block_weights(family: &NormFamily, partition: &BlockPartition) -> Result<WeightMatrix> {
    let raw = (1..=partition.horizon())
        .map(|m| family.inverse_power(m, partition.p_prime))
        .collect::<Result<Vec<_>>>()?;
    let windows: Vec<_> = partition.blocks().collect();
    WeightMatrix::normalized_windows(raw, &windows)
}

/// Seeded coordinate noise applied to the canonical basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub seed: u64,
    /// Standard deviation of the per-coordinate noise on the first attempt;
    /// halved on every retry.
    pub amplitude: f64,
    /// In-block coefficient vectors used to measure distortion.
    pub samples: usize,
}

impl Perturbation {
    pub fn new(seed: u64) -> Self {
        Self { seed, amplitude: 2e-3, samples: 100 }
    }
}

/// Largest distortion accepted from the perturbed basis.
pub const MAX_DISTORTION: f64 = 0.125;
const PERTURBATION_RETRIES: usize = 10;

/// Unit vectors `e_1..e_{n_K}` of an `ℓ_p` model with measured in-block distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasis {
    pub vectors: Vec<Vector>,
    /// `max |‖Σ b_j e_j‖ / ‖b‖_p − 1|` over the sampled coefficient vectors.
    pub distortion: f64,
    pub perturbed: bool,
    pub attempts: usize,
}

impl BlockBasis {
    /// Constant in the transform bound: 1 for the exact basis, 2 when perturbed.
    pub fn bound_constant(&self) -> f64 {
        if self.perturbed { 2.0 } else { 1.0 }
    }
}

/// Canonical basis of an `ℓ_p` model, or a perturbed copy whose sampled
/// distortion stays below 1/8.
pub fn block_basis(space: SpaceModel, partition: &BlockPartition, perturbation: Option<Perturbation>) -> Result<BlockBasis> {
    let p = match space.kind() {
        SpaceKind::Lp(p) => p,
        _ => return Err(Error::SpaceMismatch(format!("block bases live in lp models, not {space}"))),
    };
    let horizon = partition.horizon();
    if space.dimension() < horizon {
        return Err(Error::InvalidInput(format!(
            "dimension {} is smaller than the partition horizon {horizon}",
            space.dimension()
        )));
    }
    let canonical = (1..=horizon).map(|n| space.basis(n)).collect::<Result<Vec<_>>>()?;
    let Some(pert) = perturbation else {
        let distortion = measure_distortion(&canonical, partition, p, 0, 100)?;
        return Ok(BlockBasis { vectors: canonical, distortion, perturbed: false, attempts: 0 });
    };

    let mut amplitude = pert.amplitude;
    let mut last = f64::NAN;
    for attempt in 0..PERTURBATION_RETRIES {
        let vectors = canonical
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let index = (attempt * horizon + i) as u64;
                let noise = space.gaussian(seed::derive(pert.seed, seed::stream::PERTURB, index));
                let mut v = e.clone();
                v.axpy(amplitude, &noise)?;
                let n = v.norm();
                Ok(v.scaled(1.0 / n))
            })
            .collect::<Result<Vec<_>>>()?;
        let distortion = measure_distortion(&vectors, partition, p, pert.seed ^ attempt as u64, pert.samples)?;
        if distortion < MAX_DISTORTION {
            return Ok(BlockBasis { vectors, distortion, perturbed: true, attempts: attempt + 1 });
        }
        last = distortion;
        amplitude *= 0.5;
    }
    Err(Error::ConstructionImpossible(format!(
        "perturbed basis distortion {last} is still >= 1/8 after {PERTURBATION_RETRIES} attempts"
    )))
}

fn measure_distortion(vectors: &[Vector], partition: &BlockPartition, p: f64, seed: u64, samples: usize) -> Result<f64> {
    let space = *vectors[0].space();
    let mut worst = 0.0f64;
    for i in 0..samples {
        let k = i % partition.num_blocks() + 1;
        let (lo, hi) = partition.block(k);
        let mut rng = seed::rng_for(seed, seed::stream::PERTURB ^ 0xd15, i as u64);
        let coeffs: Vec<f64> = (lo..=hi).map(|_| rng.sample(StandardNormal)).collect();
        let mut sum = space.zero();
        for (b, e) in coeffs.iter().zip(&vectors[lo - 1..hi]) {
            sum.axpy(*b, e)?;
        }
        let reference = crate::space::lp_aggregate(coeffs.iter().map(|b| b.abs()), p);
        if reference > 0.0 {
            worst = worst.max((sum.norm() / reference - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `b_m = |f(x_m)|^{exponent}` for every vector in `xs`.
pub fn functional_powers(xs: &[Vector], f: &Functional, exponent: f64) -> Result<ScalarSequence> {
    let values = xs
        .iter()
        .map(|x| f.apply(x).map(|z| z.norm().powf(exponent)))
        .collect::<Result<Vec<_>>>()?;
    ScalarSequence::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformBound {
    pub row: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    /// `lhs · S / ‖f‖^{p′}`: the smallest constant that would still satisfy the bound.
    pub implied_constant: f64,
}

fn checked_bound(row: usize, lhs: f64, constant: f64, norm_pow: f64, row_sum: f64) -> Result<TransformBound> {
    let rhs = constant * norm_pow / row_sum;
    let implied_constant = if norm_pow > 0.0 { lhs * row_sum / norm_pow } else { 0.0 };
    if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::InvariantViolation(format!(
            "row {row}: weighted transform {lhs} exceeds bound {rhs} (constant {constant})"
        )));
    }
    Ok(TransformBound { row, lhs, rhs, constant, implied_constant })
}

/// `Σ_m p_{n,m} |⟨x_m, f⟩|²` against `‖f‖² / S_n` for the triangular weights.
pub fn main_transform_bound(
    weights: &WeightMatrix,
    xs: &[Vector],
    family: &NormFamily,
    f: &Functional,
    row: usize,
) -> Result<TransformBound> {
    let b = functional_powers(xs, f, 2.0)?;
    main_transform_bound_from_powers(weights, &b, family, f, row)
}

/// Same as [`main_transform_bound`] with `|⟨x_m, f⟩|²` precomputed.
pub fn main_transform_bound_from_powers(
    weights: &WeightMatrix,
    powers: &ScalarSequence,
    family: &NormFamily,
    f: &Functional,
    row: usize,
) -> Result<TransformBound> {
    let lhs = p_transform(weights, powers, row)?;
    let s = family.partial_sum(2.0, row)?;
    checked_bound(row, lhs, 1.0, f.dual_norm().powi(2), s)
}

/// The block-weight setting inside an `ℓ_p` model: partition, weights,
/// basis and the scaled sequence `x_m = a_m e_m`.
#[derive(Debug, Clone)]
pub struct BlockModel {
    pub family: NormFamily,
    pub partition: BlockPartition,
    pub weights: WeightMatrix,
    pub basis: BlockBasis,
    pub xs: Vec<Vector>,
}

impl BlockModel {
    pub fn new(
        space: SpaceModel,
        family: &NormFamily,
        partition: BlockPartition,
        perturbation: Option<Perturbation>,
    ) -> Result<Self> {
        let weights = block_weights(family, &partition)?;
        let basis = block_basis(space, &partition, perturbation)?;
        let xs = basis
            .vectors
            .iter()
            .enumerate()
            .map(|(i, e)| Ok(e.scaled(family.a_value(i + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { family: family.clone(), partition, weights, basis, xs })
    }

    /// `Σ_m p_{k,m} |f(x_m)|^{p′} ≤ C ‖f‖^{p′} / S_k` for row `k`.
    pub fn wpp_transform_bound(&self, f: &Functional, k: usize) -> Result<TransformBound> {
        let q = self.partition.p_prime;
        let b = functional_powers(&self.xs, f, q)?;
        let lhs = p_transform(&self.weights, &b, k)?;
        let s = self.partition.sums[k - 1];
        checked_bound(k, lhs, self.basis.bound_constant(), f.dual_norm().powf(q), s)
    }
}

/// One-shot form of [`BlockModel::wpp_transform_bound`].
pub fn wpp_transform_bound(
    space: SpaceModel,
    family: &NormFamily,
    partition: &BlockPartition,
    perturbation: Option<Perturbation>,
    f: &Functional,
    k: usize,
) -> Result<TransformBound> {
    BlockModel::new(space, family, partition.clone(), perturbation)?.wpp_transform_bound(f, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterCertificate {
    pub row: usize,
    /// Index in the row support where the functionals are smallest.
    pub index: usize,
    pub value: f64,
    pub weighted_average: f64,
}

/// Finite form of extracting a weak cluster point from weighted convergence:
/// with `c_m = Σ_k |f_k(x_m)|^{exponent}`, some `m` in the support of row `n`
/// has `c_m` no larger than the row average of `c`.
pub fn cluster_certificate(
    weights: &WeightMatrix,
    xs: &[Vector],
    functionals: &[Functional],
    exponent: f64,
    row: usize,
) -> Result<ClusterCertificate> {
    if functionals.is_empty() {
        return Err(Error::InvalidInput("at least one functional is required".into()));
    }
    let mut c = vec![0.0; xs.len()];
    for f in functionals {
        for (cm, x) in c.iter_mut().zip(xs) {
            *cm += f.apply(x)?.norm().powf(exponent);
        }
    }
    let c = ScalarSequence::new(c)?;
    let (index, value) = min_on_support(weights, &c, row)?;
    let weighted_average = p_transform(weights, &c, row)?;
    Ok(ClusterCertificate { row, index, value, weighted_average })
}
