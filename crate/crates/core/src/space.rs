//! Finite-dimensional truncation models: Euclidean (real and complex), `ℓ_p`
//! and sup-norm spaces, with vectors, functionals, pairings and seeded
//! random generation.
//!
//! Complex coordinates are stored as `Complex64` (a real pair). The pairing
//! `⟨f, v⟩ = Σ conj(f_i)·v_i` is conjugate-linear in the functional slot.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;

/// Which norm a model carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    EuclideanReal,
    EuclideanComplex,
    /// `ℓ_p` with `1 ≤ p < ∞`.
    Lp(f64),
    Sup,
}

/// A space model: a norm kind plus a dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceModel {
    kind: SpaceKind,
    dimension: usize,
}

impl SpaceModel {
    pub fn new(kind: SpaceKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("space dimension must be at least 1".into()));
        }
        if let SpaceKind::Lp(p) = kind {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "lp exponent must satisfy 1 <= p < inf, got {p}"
                )));
            }
        }
        Ok(Self { kind, dimension })
    }

    pub fn euclidean_real(dimension: usize) -> Result<Self> {
        Self::new(SpaceKind::EuclideanReal, dimension)
    }

    pub fn euclidean_complex(dimension: usize) -> Result<Self> {
        Self::new(SpaceKind::EuclideanComplex, dimension)
    }

    pub fn lp(p: f64, dimension: usize) -> Result<Self> {
        Self::new(SpaceKind::Lp(p), dimension)
    }

    pub fn sup(dimension: usize) -> Result<Self> {
        Self::new(SpaceKind::Sup, dimension)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.kind, SpaceKind::EuclideanComplex)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, SpaceKind::EuclideanReal | SpaceKind::EuclideanComplex)
    }

    /// Exponent of the norm: 2 for Euclidean, `p` for `ℓ_p`, `∞` for sup.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            SpaceKind::EuclideanReal | SpaceKind::EuclideanComplex => 2.0,
            SpaceKind::Lp(p) => p,
            SpaceKind::Sup => f64::INFINITY,
        }
    }

    /// Conjugate exponent `p′` with `1/p + 1/p′ = 1` (1 for sup, ∞ for `ℓ_1`).
    pub fn dual_exponent(&self) -> f64 {
        conjugate_exponent(self.exponent())
    }

    /// Same model with a different dimension.
    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        Self::new(self.kind, dimension)
    }

    fn check(&self, v: &Vector, what: &str) -> Result<()> {
        if v.space != *self {
            return Err(Error::SpaceMismatch(format!(
                "{what} lives in {} but the operation expects {self}",
                v.space
            )));
        }
        Ok(())
    }

    pub fn norm(&self, v: &Vector) -> Result<f64> {
        self.check(v, "vector")?;
        Ok(v.norm())
    }

    pub fn dual_norm(&self, f: &Functional) -> Result<f64> {
        self.check(&f.0, "functional")?;
        Ok(f.dual_norm())
    }

    pub fn pair(&self, f: &Functional, v: &Vector) -> Result<Complex64> {
        self.check(&f.0, "functional")?;
        self.check(v, "vector")?;
        pair_vectors(&f.0, v)
    }

    pub fn zero(&self) -> Vector {
        let coords = if self.is_complex() {
            Coords::Complex(vec![Complex64::new(0.0, 0.0); self.dimension])
        } else {
            Coords::Real(vec![0.0; self.dimension])
        };
        Vector { space: *self, coords }
    }

    /// Canonical unit vector `e_index` (1-based).
    pub fn basis(&self, index: usize) -> Result<Vector> {
        if index == 0 || index > self.dimension {
            return Err(Error::InvalidInput(format!(
                "basis index {index} outside 1..={}",
                self.dimension
            )));
        }
        let mut v = self.zero();
        match &mut v.coords {
            Coords::Real(c) => c[index - 1] = 1.0,
            Coords::Complex(c) => c[index - 1] = Complex64::new(1.0, 0.0),
        }
        Ok(v)
    }

    /// Coordinate-wise standard Gaussian vector drawn from `seed`.
    pub fn gaussian(&self, seed: u64) -> Vector {
        let mut rng = seed::rng(seed);
        let coords = if self.is_complex() {
            Coords::Complex(
                (0..self.dimension)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect(),
            )
        } else {
            Coords::Real((0..self.dimension).map(|_| rng.sample(StandardNormal)).collect())
        };
        Vector { space: *self, coords }
    }

    /// Gaussian vector normalised to unit length in the model norm.
    pub fn random_unit(&self, seed: u64) -> Vector {
        let mut attempt = 0u64;
        loop {
            let v = self.gaussian(seed::derive(seed, seed::stream::UNIT, attempt));
            let n = v.norm();
            if n > 0.0 {
                return v.scaled(1.0 / n);
            }
            attempt += 1;
        }
    }

    /// Haar-distributed orthogonal (unitary) map from a seeded Gaussian matrix.
    pub fn random_rotation(&self, seed: u64) -> Result<Rotation> {
        Rotation::random(*self, seed)
    }
}

impl fmt::Display for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::EuclideanReal => write!(f, "euclidean-real:{}", self.dimension),
            SpaceKind::EuclideanComplex => write!(f, "euclidean-complex:{}", self.dimension),
            SpaceKind::Lp(p) => write!(f, "lp:{p}:{}", self.dimension),
            SpaceKind::Sup => write!(f, "sup:{}", self.dimension),
        }
    }
}

impl FromStr for SpaceModel {
    type Err = Error;

    /// Parses `kind:param:dimension`, e.g. `lp:3:64`. Kinds without a parameter
    /// accept either `sup:64` or `sup::64`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("space descriptor `{s}` (expected kind:param:dimension)"));
        let dim = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["lp", p, d] => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                SpaceModel::lp(p, dim(d)?)
            }
            [kind, d] | [kind, "", d] => match *kind {
                "euclidean-real" | "real" => SpaceModel::euclidean_real(dim(d)?),
                "euclidean-complex" | "complex" => SpaceModel::euclidean_complex(dim(d)?),
                "sup" => SpaceModel::sup(dim(d)?),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// `p′` with `1/p + 1/p′ = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `(Σ x_i^p)^{1/p}` over nonnegative magnitudes, `max` when `p = ∞`.
pub fn lp_aggregate(magnitudes: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        magnitudes.fold(0.0, f64::max)
    } else if p == 2.0 {
        magnitudes.map(|x| x * x).sum::<f64>().sqrt()
    } else if p == 1.0 {
        magnitudes.sum()
    } else {
        magnitudes.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coords {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// A point of a space model.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    space: SpaceModel,
    coords: Coords,
}

impl Vector {
    pub fn from_real(space: SpaceModel, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dimension {
            return Err(Error::SpaceMismatch(format!(
                "{} coordinates for a space of dimension {}",
                coords.len(),
                space.dimension
            )));
        }
        let coords = if space.is_complex() {
            Coords::Complex(coords.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        } else {
            Coords::Real(coords)
        };
        Ok(Self { space, coords })
    }

    pub fn from_complex(space: SpaceModel, coords: Vec<Complex64>) -> Result<Self> {
        if !space.is_complex() {
            return Err(Error::SpaceMismatch(format!(
                "complex coordinates are only allowed in complex models, not {space}"
            )));
        }
        if coords.len() != space.dimension {
            return Err(Error::SpaceMismatch(format!(
                "{} coordinates for a space of dimension {}",
                coords.len(),
                space.dimension
            )));
        }
        Ok(Self {
            space,
            coords: Coords::Complex(coords),
        })
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension
    }

    /// Coordinate `i` (1-based) as a complex number.
    pub fn get(&self, index: usize) -> Complex64 {
        match &self.coords {
            Coords::Real(c) => Complex64::new(c[index - 1], 0.0),
            Coords::Complex(c) => c[index - 1],
        }
    }

    pub fn abs_coords(&self) -> Vec<f64> {
        match &self.coords {
            Coords::Real(c) => c.iter().map(|x| x.abs()).collect(),
            Coords::Complex(c) => c.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.coords {
            Coords::Real(c) => c.iter().all(|&x| x == 0.0),
            Coords::Complex(c) => c.iter().all(|z| z.re == 0.0 && z.im == 0.0),
        }
    }

    /// Norm in the vector's own model.
    pub fn norm(&self) -> f64 {
        let mags = self.abs_coords();
        lp_aggregate(mags.into_iter(), self.space.exponent())
    }

    pub fn norm_squared(&self) -> f64 {
        let n = self.norm();
        n * n
    }

    pub fn scaled(&self, c: f64) -> Vector {
        let coords = match &self.coords {
            Coords::Real(v) => Coords::Real(v.iter().map(|x| c * x).collect()),
            Coords::Complex(v) => Coords::Complex(v.iter().map(|z| z * c).collect()),
        };
        Vector {
            space: self.space,
            coords,
        }
    }

    pub fn scaled_complex(&self, c: Complex64) -> Result<Vector> {
        match &self.coords {
            Coords::Complex(v) => Ok(Vector {
                space: self.space,
                coords: Coords::Complex(v.iter().map(|z| z * c).collect()),
            }),
            Coords::Real(v) if c.im == 0.0 => Ok(Vector {
                space: self.space,
                coords: Coords::Real(v.iter().map(|x| c.re * x).collect()),
            }),
            Coords::Real(_) => Err(Error::SpaceMismatch(
                "complex scalar applied to a real model".into(),
            )),
        }
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: f64, x: &Vector) -> Result<()> {
        if x.space != self.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, x.space)));
        }
        match (&mut self.coords, &x.coords) {
            (Coords::Real(s), Coords::Real(o)) => s.iter_mut().zip(o).for_each(|(s, o)| *s += a * o),
            (Coords::Complex(s), Coords::Complex(o)) => {
                s.iter_mut().zip(o).for_each(|(s, o)| *s += o * a)
            }
            _ => unreachable!("storage is determined by the space"),
        }
        Ok(())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match &self.coords {
            Coords::Real(c) => c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Coords::Complex(c) => c.clone(),
        }
    }
}

impl Serialize for Vector {
    /// JSON array; complex coordinates become `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dimension()))?;
        match &self.coords {
            Coords::Real(c) => {
                for x in c {
                    seq.serialize_element(x)?;
                }
            }
            Coords::Complex(c) => {
                for z in c {
                    seq.serialize_element(&[z.re, z.im])?;
                }
            }
        }
        seq.end()
    }
}

/// `Σ conj(a_i) · b_i`.
pub fn pair_vectors(a: &Vector, b: &Vector) -> Result<Complex64> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch(format!(
            "pairing {} with {}",
            a.space, b.space
        )));
    }
    Ok(match (&a.coords, &b.coords) {
        (Coords::Real(x), Coords::Real(y)) => {
            Complex64::new(x.iter().zip(y).map(|(x, y)| x * y).sum(), 0.0)
        }
        (Coords::Complex(x), Coords::Complex(y)) => x.iter().zip(y).map(|(x, y)| x.conj() * y).sum(),
        _ => unreachable!("storage is determined by the space"),
    })
}

/// An element of the dual model, stored in the same coordinates as vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Functional(Vector);

impl Functional {
    pub fn new(v: Vector) -> Self {
        Self(v)
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }

    pub fn space(&self) -> &SpaceModel {
        &self.0.space
    }

    /// `ℓ_{p′}` norm of the coordinates: Euclidean for Euclidean models, `ℓ_1` for sup.
    pub fn dual_norm(&self) -> f64 {
        lp_aggregate(self.0.abs_coords().into_iter(), self.0.space.dual_exponent())
    }

    pub fn apply(&self, v: &Vector) -> Result<Complex64> {
        pair_vectors(&self.0, v)
    }
}

impl From<Vector> for Functional {
    fn from(v: Vector) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone)]
enum RotationMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Orthogonal (real) or unitary (complex) map on a Euclidean model.
#[derive(Debug, Clone)]
pub struct Rotation {
    space: SpaceModel,
    matrix: RotationMatrix,
}

impl Rotation {
    fn random(space: SpaceModel, seed: u64) -> Result<Self> {
        if !space.is_euclidean() {
            return Err(Error::SpaceMismatch(format!(
                "rotations are defined on Euclidean models only, not {space}"
            )));
        }
        let d = space.dimension;
        let mut rng = seed::rng_for(seed, seed::stream::ROTATION, 0);
        // Q from the QR factorisation, with columns rephased by sign(R_ii) so
        // the result is Haar distributed.
        let matrix = if space.is_complex() {
            let entries: Vec<Complex64> = (0..d * d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let qr = DMatrix::from_vec(d, d, entries).qr();
            let r = qr.r();
            let mut q = qr.q();
            for j in 0..d {
                let rjj = r[(j, j)];
                let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
                q.column_mut(j).scale_mut_complex(phase);
            }
            RotationMatrix::Complex(q)
        } else {
            let entries: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
            let qr = DMatrix::from_vec(d, d, entries).qr();
            let r = qr.r();
            let mut q = qr.q();
            for j in 0..d {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            RotationMatrix::Real(q)
        };
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        self.transform(v, false)
    }

    /// Inverse map (transpose or conjugate transpose).
    pub fn apply_adjoint(&self, v: &Vector) -> Result<Vector> {
        self.transform(v, true)
    }

    pub fn apply_functional(&self, f: &Functional) -> Result<Functional> {
        self.apply(&f.0).map(Functional)
    }

    fn transform(&self, v: &Vector, adjoint: bool) -> Result<Vector> {
        if v.space != self.space {
            return Err(Error::SpaceMismatch(format!(
                "rotation on {} applied to a vector in {}",
                self.space, v.space
            )));
        }
        let coords = match (&self.matrix, &v.coords) {
            (RotationMatrix::Real(q), Coords::Real(c)) => {
                let x = DVector::from_column_slice(c);
                let y = if adjoint { q.tr_mul(&x) } else { q * x };
                Coords::Real(y.as_slice().to_vec())
            }
            (RotationMatrix::Complex(q), Coords::Complex(c)) => {
                let x = DVector::from_column_slice(c);
                let y = if adjoint { q.ad_mul(&x) } else { q * x };
                Coords::Complex(y.as_slice().to_vec())
            }
            _ => unreachable!("storage is determined by the space"),
        };
        Ok(Vector {
            space: self.space,
            coords,
        })
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, c: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, c: Complex64) {
        for z in self.iter_mut() {
            *z *= c;
        }
    }
}

/// An element `(h_1, …, h_k)` of the orthogonal direct sum of `k` copies of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductVector {
    components: Vec<Vector>,
}

impl ProductVector {
    pub fn new(components: Vec<Vector>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("product vector needs at least one component".into()))?;
        if let Some(bad) = components.iter().find(|c| c.space != first.space) {
            return Err(Error::SpaceMismatch(format!(
                "product components in {} and {}",
                first.space, bad.space
            )));
        }
        Ok(Self { components })
    }

    pub fn zero(space: SpaceModel, k: usize) -> Result<Self> {
        Self::new(vec![space.zero(); k])
    }

    pub fn components(&self) -> &[Vector] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn space(&self) -> &SpaceModel {
        &self.components[0].space
    }

    /// `Σ_j ‖h_j‖²`.
    pub fn norm_squared(&self) -> f64 {
        self.components.iter().map(|c| c.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

/// `Σ_j |⟨g_j, x⟩|²`.
pub fn product_pair_sq(g: &ProductVector, x: &Vector) -> Result<f64> {
    g.components
        .iter()
        .map(|c| pair_vectors(c, x).map(|z| z.norm_sqr()))
        .sum()
}
