//! Sign-pattern cotype ratios and row-level checks for weighted convergence
//! in `ℓ_p`-type models.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::constructions::{Divergence, ExponentPair, NormFamily};
use crate::error::{Error, Result};
use crate::report::{fmt_float, serialize_extended_f64, CsvTable, Report};
use crate::seed;
use crate::space::{lp_aggregate, Functional, SpaceModel, Vector};
use crate::summability::{p_transform, ScalarSequence, WeightMatrix};

/// Largest vector count for exhaustive enumeration.
pub const MAX_EXHAUSTIVE: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("sign patterns contain only +1 and -1".into()));
        }
        Ok(Self(signs))
    }

    /// Pattern with `γ_1 = +1` and `γ_{k+1} = −1` iff bit `k − 1` of `index` is set.
    pub fn from_index(n: usize, index: u64) -> Self {
        let signs = (0..n)
            .map(|k| if k > 0 && (index >> (k - 1)) & 1 == 1 { -1 } else { 1 })
            .collect();
        Self(signs)
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CotypeReport {
    pub ratio: f64,
    pub pattern: SignPattern,
    pub n: usize,
    #[serde(serialize_with = "serialize_extended_f64")]
    pub p: f64,
    /// Number of patterns evaluated.
    pub enumerated: u64,
    /// `false` when patterns were sampled: the ratio is then a lower bound.
    pub exact: bool,
    pub best_norm: f64,
    pub denominator: f64,
}

impl Report for CotypeReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["ratio", "n", "p", "enumerated", "exact", "best_norm", "denominator", "pattern"]);
        let pattern: Vec<String> = self.pattern.signs().iter().map(|s| s.to_string()).collect();
        t.push(vec![
            fmt_float(self.ratio),
            self.n.to_string(),
            fmt_float(self.p),
            self.enumerated.to_string(),
            self.exact.to_string(),
            fmt_float(self.best_norm),
            fmt_float(self.denominator),
            pattern.join(" "),
        ]);
        t
    }
}

struct SignedSums {
    space: SpaceModel,
    coords: Vec<Vec<Complex64>>,
}

impl SignedSums {
    fn new(space: &SpaceModel, xs: &[Vector]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidInput("at least one vector is required".into()));
        }
        if let Some(x) = xs.iter().find(|x| x.space() != space) {
            return Err(Error::SpaceMismatch(format!("vector in {} for model {space}", x.space())));
        }
        Ok(Self { space: *space, coords: xs.iter().map(|x| x.to_complex()).collect() })
    }

    /// `‖Σ γ_k x_k‖` for the pattern with the given index.
    fn norm(&self, index: u64) -> f64 {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.space.dimension()];
        for (k, x) in self.coords.iter().enumerate() {
            let negative = k > 0 && (index >> (k - 1)) & 1 == 1;
            if negative {
                acc.iter_mut().zip(x).for_each(|(a, v)| *a -= v);
            } else {
                acc.iter_mut().zip(x).for_each(|(a, v)| *a += v);
            }
        }
        lp_aggregate(acc.iter().map(|z| z.norm()), self.space.exponent())
    }
}

fn denominator(xs: &[Vector], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("cotype exponent must be at least 1, got {p}")));
    }
    let d = lp_aggregate(xs.iter().map(|x| x.norm()), p);
    if d == 0.0 {
        return Err(Error::InvalidInput("all vectors are zero".into()));
    }
    Ok(d)
}

/// Larger norm wins; equal norms go to the smaller pattern index.
fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `max_γ ‖Σ γ_k x_k‖ / (Σ ‖x_k‖^p)^{1/p}` over all sign patterns with
/// `γ_1 = +1` (the other half are negations).
pub fn cotype_ratio(space: &SpaceModel, xs: &[Vector], p: f64) -> Result<CotypeReport> {
    let sums = SignedSums::new(space, xs)?;
    let n = xs.len();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::Resource(format!(
            "{n} vectors exceed the exhaustive limit of {MAX_EXHAUSTIVE}; use sampled patterns"
        )));
    }
    let den = denominator(xs, p)?;
    let count = 1u64 << (n - 1);
    let (best_norm, index) = (0..count)
        .into_par_iter()
        .map(|i| (sums.norm(i), i))
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), better);
    Ok(CotypeReport {
        ratio: best_norm / den,
        pattern: SignPattern::from_index(n, index),
        n,
        p,
        enumerated: count,
        exact: true,
        best_norm,
        denominator: den,
    })
}

/// Lower bound from `samples` seeded random patterns.
pub fn cotype_ratio_sampled(space: &SpaceModel, xs: &[Vector], p: f64, samples: usize, seed_value: u64) -> Result<CotypeReport> {
    let sums = SignedSums::new(space, xs)?;
    let n = xs.len();
    if samples == 0 {
        return Err(Error::InvalidInput("sampling needs at least one pattern".into()));
    }
    if n > 64 {
        return Err(Error::Resource("sampled patterns support at most 64 vectors".into()));
    }
    let den = denominator(xs, p)?;
    let (best_norm, index) = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_for(seed_value, seed::stream::PATTERN, i);
            let index: u64 = rng.random::<u64>() & ((1u64 << (n - 1)) - 1);
            (sums.norm(index), index)
        })
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), better);
    Ok(CotypeReport {
        ratio: best_norm / den,
        pattern: SignPattern::from_index(n, index),
        n,
        p,
        enumerated: samples as u64,
        exact: false,
        best_norm,
        denominator: den,
    })
}

/// `‖Σ γ_k x_k‖ / (Σ ‖x_k‖^p)^{1/p}` for a given pattern.
pub fn pattern_ratio(space: &SpaceModel, xs: &[Vector], p: f64, pattern: &SignPattern) -> Result<f64> {
    if pattern.len() != xs.len() {
        return Err(Error::InvalidInput("pattern length differs from vector count".into()));
    }
    let mut acc = space.zero();
    for (x, &s) in xs.iter().zip(pattern.signs()) {
        acc.axpy(s as f64, x)?;
    }
    Ok(acc.norm() / denominator(xs, p)?)
}

/// Average of `‖Σ γ_k x_k‖²` over all `2^n` sign patterns.
pub fn sign_mean_square(space: &SpaceModel, xs: &[Vector]) -> Result<f64> {
    let sums = SignedSums::new(space, xs)?;
    if xs.len() > MAX_EXHAUSTIVE {
        return Err(Error::Resource(format!("mean over more than 2^{MAX_EXHAUSTIVE} patterns")));
    }
    let count = 1u64 << (xs.len() - 1);
    let total: f64 = (0..count).into_par_iter().map(|i| sums.norm(i).powi(2)).sum();
    Ok(total / count as f64)
}

/// Smallest exhaustive ratio over the test sets.
pub fn cotype_constant_estimate(space: &SpaceModel, test_sets: &[Vec<Vector>], p: f64) -> Result<f64> {
    if test_sets.is_empty() {
        return Err(Error::InvalidInput("no test sets given".into()));
    }
    test_sets
        .iter()
        .map(|xs| cotype_ratio(space, xs, p).map(|r| r.ratio))
        .try_fold(f64::INFINITY, |acc, r| r.map(|v| acc.min(v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderRow {
    pub row: usize,
    /// `Σ_m p_{n,m}`.
    pub lhs: f64,
    /// `(Σ (p_{n,m} ‖x_m‖)^p)^{1/p}`, a maximum for `p = ∞`.
    pub first_factor: f64,
    /// `(Σ ‖x_m‖^{-p′})^{1/p′}`.
    pub second_factor: f64,
    pub product: f64,
    pub pass: bool,
}

/// Hölder split of `1 = Σ_m (p_{n,m}‖x_m‖)(‖x_m‖^{-1})` over the support of row `n`.
pub fn holder_row_check(w: &WeightMatrix, norms: &[f64], pair: ExponentPair, n: usize) -> Result<HolderRow> {
    let row = w.row(n)?;
    let mut lhs = 0.0;
    let mut firsts = Vec::with_capacity(row.support_len());
    let mut seconds = Vec::with_capacity(row.support_len());
    for (m, p) in row.iter() {
        let norm = *norms.get(m - 1).ok_or(Error::OutOfRange { row: n, column: m, horizon: norms.len() })?;
        if !(norm > 0.0) {
            return Err(Error::InvalidInput(format!("x_{m} has zero norm on the support of row {n}")));
        }
        lhs += p;
        firsts.push(p * norm);
        seconds.push(1.0 / norm);
    }
    let first_factor = lp_aggregate(firsts.into_iter(), pair.p());
    let second_factor = lp_aggregate(seconds.into_iter(), pair.p_prime());
    let product = first_factor * second_factor;
    Ok(HolderRow { row: n, lhs, first_factor, second_factor, product, pass: product >= 1.0 - 1e-9 })
}

/// [`holder_row_check`] with norms taken from the vectors.
pub fn holder_row_check_vectors(w: &WeightMatrix, xs: &[Vector], pair: ExponentPair, n: usize) -> Result<HolderRow> {
    let row = w.row(n)?;
    let needed = row.max_column().unwrap_or(0).min(xs.len());
    let norms: Vec<f64> = xs[..needed].iter().map(|x| x.norm()).collect();
    if let Some(m) = row.max_column().filter(|&m| m > xs.len()) {
        return Err(Error::OutOfRange { row: n, column: m, horizon: xs.len() });
    }
    holder_row_check(w, &norms, pair, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderSummary {
    pub rows: usize,
    pub failures: Vec<usize>,
    pub min_product: f64,
    pub argmin_row: usize,
    pub pass: bool,
}

/// Runs [`holder_row_check`] on every row.
pub fn holder_rows(w: &WeightMatrix, norms: &[f64], pair: ExponentPair) -> Result<HolderSummary> {
    let checks = (1..=w.num_rows())
        .into_par_iter()
        .map(|n| holder_row_check(w, norms, pair, n))
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<usize> = checks.iter().filter(|c| !c.pass).map(|c| c.row).collect();
    let (min_product, argmin_row) = checks
        .iter()
        .fold((f64::INFINITY, 0), |acc, c| if c.product < acc.0 { (c.product, c.row) } else { acc });
    Ok(HolderSummary { rows: checks.len(), pass: failures.is_empty(), failures, min_product, argmin_row })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Inconsistent,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryReport {
    pub family: String,
    pub p_prime: f64,
    pub horizon: usize,
    /// `(N/4, N/2, N)`.
    pub checkpoints: [usize; 3],
    /// `Σ_{n≤M} a_n^{-p′}` at each checkpoint.
    pub partial_sums: [f64; 3],
    pub verdict: Option<Divergence>,
    /// Tail bound beyond `N/2` for convergent families.
    pub tail_bound: Option<f64>,
    pub consistency: Consistency,
}

impl Report for NecessaryReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["checkpoint", "partial_sum"]);
        for (c, s) in self.checkpoints.iter().zip(&self.partial_sums) {
            t.push(vec![c.to_string(), fmt_float(*s)]);
        }
        t
    }
}

/// Cross-checks the analytic verdict on `Σ a_n^{-p′}` against the growth of
/// partial sums at `N/4`, `N/2`, `N`. Divergent: strictly increasing and
/// either `S_N ≥ 1.1 S_{N/2}` or the last dyadic increment at least `0.9`
/// of the previous one (the logarithmic-growth signature). Convergent: the
/// last increment stays below the tail bound beyond `N/2`, or shrinks when
/// no bound is known.
pub fn necessary_condition_check(family: &NormFamily, pair: ExponentPair, horizon: usize) -> Result<NecessaryReport> {
    if horizon < 8 {
        return Err(Error::InvalidInput(format!("horizon must be at least 8, got {horizon}")));
    }
    let q = pair.p_prime();
    let checkpoints = [horizon / 4, horizon / 2, horizon];
    let sums = family.partial_sums(q, horizon)?;
    let partial_sums = checkpoints.map(|c| sums[c - 1]);
    let [quarter, half, full] = partial_sums;
    let verdict = match family.divergence(q) {
        Ok(v) => Some(v),
        Err(Error::NoCertificate) => None,
        Err(e) => return Err(e),
    };
    let tail_bound = family.tail_bound(q, checkpoints[1]);
    let consistency = match verdict {
        None => Consistency::Indeterminate,
        Some(Divergence::Divergent) => {
            let increasing = quarter < half && half < full;
            let growing = full >= 1.1 * half || full - half >= 0.9 * (half - quarter);
            if increasing && growing { Consistency::Consistent } else { Consistency::Inconsistent }
        }
        Some(Divergence::Convergent) => {
            let ok = match tail_bound {
                Some(t) => full - half <= t * (1.0 + 1e-12),
                None => full - half < half - quarter,
            };
            if ok { Consistency::Consistent } else { Consistency::Inconsistent }
        }
    };
    Ok(NecessaryReport {
        family: family.to_string(),
        p_prime: q,
        horizon,
        checkpoints,
        partial_sums,
        verdict,
        tail_bound,
        consistency,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupBound {
    /// `max_{n,f} Σ_m p_{n,m} |f(x_m)|^{q} / ‖f‖^{q}`.
    pub value: f64,
    pub row: usize,
    /// 0-based index into the functional sample.
    pub functional: usize,
    pub exponent: f64,
}

/// Empirical constant `C` in `Σ_m p_{n,m}|f(x_m)|^{q} ≤ C‖f‖^{q}` over the
/// rows of `w` and the sampled functionals. A sample maximum, never a proof
/// of the true constant.
pub fn sup_functional_bound(w: &WeightMatrix, xs: &[Vector], functionals: &[Functional], exponent: f64) -> Result<SupBound> {
    if let Some(n) = (1..=w.num_rows()).find(|&n| w.row(n).is_ok_and(|r| r.support_len() == 0)) {
        return Err(Error::InvalidInput(format!("row {n} is empty")));
    }
    if functionals.is_empty() {
        return Err(Error::InvalidInput("functional sample is empty".into()));
    }
    let per_functional = functionals
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let norm = f.dual_norm();
            if norm == 0.0 {
                return Err(Error::InvalidInput(format!("functional {i} is zero")));
            }
            let values = xs
                .iter()
                .map(|x| f.apply(x).map(|z| z.norm().powf(exponent)))
                .collect::<Result<Vec<_>>>()?;
            let b = ScalarSequence::new(values)?;
            let scale = norm.powf(exponent);
            let mut best = (f64::NEG_INFINITY, 0usize);
            for n in 1..=w.num_rows() {
                let v = p_transform(w, &b, n)? / scale;
                if v > best.0 {
                    best = (v, n);
                }
            }
            Ok((best.0, best.1, i))
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, row, functional) = per_functional
        .into_iter()
        .fold((f64::NEG_INFINITY, 0, 0), |acc, c| if c.0 > acc.0 { c } else { acc });
    Ok(SupBound { value, row, functional, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{main_theorem_sequence, main_theorem_weights};

    fn basis(space: &SpaceModel, n: usize) -> Vec<Vector> {
        (1..=n).map(|k| space.basis(k).unwrap()).collect()
    }

    #[test]
    fn orthonormal_ratio_is_one() {
        let s = SpaceModel::euclidean_real(8).unwrap();
        let r = cotype_ratio(&s, &basis(&s, 8), 2.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.enumerated, 128);
        assert_eq!(r.pattern.signs(), &[1; 8]);
    }

    #[test]
    fn sup_basis_ratio_decays() {
        let s = SpaceModel::sup(8).unwrap();
        let r = cotype_ratio(&s, &basis(&s, 8), 2.0).unwrap();
        assert!((r.ratio - 8f64.powf(-0.5)).abs() < 1e-12);
        assert!((r.ratio - 0.35355).abs() < 1e-5);
    }

    #[test]
    fn single_vector_ratio_is_one() {
        let s = SpaceModel::lp(3.0, 4).unwrap();
        for p in [1.0, 2.0, 5.0, f64::INFINITY] {
            let r = cotype_ratio(&s, &[s.gaussian(3)], p).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stored_pattern_reproduces_ratio() {
        let s = SpaceModel::lp(3.0, 5).unwrap();
        let xs: Vec<_> = (0..6).map(|i| s.gaussian(i)).collect();
        let r = cotype_ratio(&s, &xs, 3.0).unwrap();
        let again = pattern_ratio(&s, &xs, 3.0, &r.pattern).unwrap();
        assert!((again - r.ratio).abs() <= 1e-12 * r.ratio);
    }

    #[test]
    fn ties_go_to_the_lowest_pattern() {
        let s = SpaceModel::euclidean_real(2).unwrap();
        let x = s.basis(1).unwrap();
        let r = cotype_ratio(&s, &[x.clone(), x.scaled(0.0).add(&s.basis(2).unwrap()).unwrap()], 2.0).unwrap();
        assert_eq!(r.pattern.signs(), &[1, 1]);
    }

    #[test]
    fn limits_and_sampling() {
        let s = SpaceModel::euclidean_real(30).unwrap();
        let xs = basis(&s, 25);
        assert!(matches!(cotype_ratio(&s, &xs, 2.0), Err(Error::Resource(_))));
        let lower = cotype_ratio_sampled(&s, &xs, 2.0, 64, 1).unwrap();
        assert!(!lower.exact);
        assert!((lower.ratio - 1.0).abs() < 1e-12);
        assert!(cotype_ratio(&s, &[], 2.0).is_err());
    }

    #[test]
    fn constant_estimates() {
        let e = SpaceModel::euclidean_real(10).unwrap();
        let sets: Vec<_> = (2..=10).map(|n| basis(&e, n)).collect();
        assert!((cotype_constant_estimate(&e, &sets, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let sup = SpaceModel::sup(10).unwrap();
        let sets: Vec<_> = (2..=10).map(|n| basis(&sup, n)).collect();
        let c = cotype_constant_estimate(&sup, &sets, 2.0).unwrap();
        assert!((c - 10f64.powf(-0.5)).abs() < 1e-12);
        assert!(cotype_constant_estimate(&e, &[], 2.0).is_err());
    }

    #[test]
    fn holder_examples() {
        let pair = ExponentPair::from_p(2.0).unwrap();
        let single = WeightMatrix::from_rows(vec![vec![(2, 1.0)]]).unwrap();
        let r = holder_row_check(&single, &[5.0, 3.0], pair, 1).unwrap();
        assert!((r.product - 1.0).abs() < 1e-12);
        let uniform = WeightMatrix::from_rows(vec![vec![(1, 0.5), (2, 0.5)]]).unwrap();
        let r = holder_row_check(&uniform, &[1.0, 2.0], pair, 1).unwrap();
        assert!((r.product - 1.25).abs() < 1e-12);
        assert!(r.pass);
        assert!(holder_row_check(&uniform, &[1.0, 0.0], pair, 1).is_err());
        let inf = ExponentPair::from_p(f64::INFINITY).unwrap();
        let r = holder_row_check(&uniform, &[1.0, 2.0], inf, 1).unwrap();
        assert!((r.first_factor - 1.0).abs() < 1e-15);
        assert!((r.second_factor - 1.5).abs() < 1e-15);
    }

    #[test]
    fn holder_rows_on_main_weights() {
        let fam = NormFamily::power(1.0, 0.5).unwrap();
        let w = main_theorem_weights(&fam, 1000).unwrap();
        let norms = fam.values(1000).unwrap();
        let s = holder_rows(&w, &norms, ExponentPair::from_p(2.0).unwrap()).unwrap();
        assert!(s.pass);
        assert!((s.min_product - 1.0).abs() < 1e-9);
    }

    #[test]
    fn necessary_condition_examples() {
        let two = ExponentPair::from_p_prime(2.0).unwrap();
        let r = necessary_condition_check(&NormFamily::power(1.0, 0.5).unwrap(), two, 10_000).unwrap();
        assert_eq!(r.verdict, Some(Divergence::Divergent));
        assert_eq!(r.consistency, Consistency::Consistent);
        let r = necessary_condition_check(&NormFamily::power(1.0, 1.0).unwrap(), two, 10_000).unwrap();
        assert_eq!(r.verdict, Some(Divergence::Convergent));
        assert_eq!(r.consistency, Consistency::Consistent);
        let explicit = NormFamily::explicit((1..=16).map(|n| n as f64).collect()).unwrap();
        let r = necessary_condition_check(&explicit, two, 16).unwrap();
        assert_eq!(r.consistency, Consistency::Indeterminate);
        assert!(necessary_condition_check(&explicit, two, 7).is_err());
    }

    #[test]
    fn sup_bound_examples() {
        let s = SpaceModel::euclidean_real(4).unwrap();
        let xs = basis(&s, 4);
        let w = WeightMatrix::identity(4).unwrap();
        let fs: Vec<Functional> = (0..20).map(|i| Functional::new(s.gaussian(i))).collect();
        assert!(sup_functional_bound(&w, &xs, &fs, 1.0).unwrap().value <= 1.0 + 1e-9);
        assert!(sup_functional_bound(&w, &xs, &[], 1.0).is_err());
        let empty = WeightMatrix::from_rows(vec![vec![]]).unwrap();
        assert!(sup_functional_bound(&empty, &xs, &fs, 1.0).is_err());

        let fam = NormFamily::power(1.0, 0.5).unwrap();
        let space = SpaceModel::euclidean_real(200).unwrap();
        let xs = main_theorem_sequence(space, &fam, 200, None).unwrap();
        let w = main_theorem_weights(&fam, 200).unwrap();
        let fs: Vec<Functional> = (0..100).map(|i| Functional::new(space.gaussian(i))).collect();
        let c = sup_functional_bound(&w, &xs, &fs, 2.0).unwrap();
        assert!(c.value.is_finite() && c.value <= 1.0 + 1e-9);
    }
}
