//! Dense complex vectors and operators.
//!
//! Every reduction (inner products, matrix products, norms) goes through
//! [`pairwise_sum`], so the floating-point summation tree depends only on the
//! operand length and results are bit-reproducible. Factorizations (SVD and
//! Hermitian eigen-solves) are delegated to `nalgebra`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Operands at or below this length are summed left to right.
const PAIRWISE_LEAF: usize = 8;

/// Sum with a fixed binary reduction tree.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if xs.len() <= PAIRWISE_LEAF {
        let mut acc = T::default();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

fn all_finite(xs: &[C64]) -> bool {
    xs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Element of ℂⁿ. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self(vec![ZERO; dim])
    }

    /// The `index`-th standard basis vector of ℂ^`dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.0.iter().map(|z| z.norm_sqr()).collect();
        pairwise_sum(&sq)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(self.0.iter().map(|&z| z * c).collect())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dims("vector addition", self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dims("vector subtraction", self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

fn check_dims(context: &'static str, left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            left,
            right,
        })
    }
}

/// ⟨f, g⟩ = Σ f_i · conj(g_i), linear in the first slot.
pub fn inner(f: &CVector, g: &CVector) -> Result<C64> {
    check_dims("inner product", f.dim(), g.dim())?;
    Ok(inner_unchecked(f.entries(), g.entries()))
}

fn inner_unchecked(f: &[C64], g: &[C64]) -> C64 {
    let terms: Vec<C64> = f.iter().zip(g).map(|(a, b)| a * b.conj()).collect();
    pairwise_sum(&terms)
}

/// The rank-one operator h ↦ ⟨h, g⟩ f, i.e. the matrix f·g*.
pub fn tensor(f: &CVector, g: &CVector) -> LinOperator {
    let mut data = Vec::with_capacity(f.dim() * g.dim());
    for fi in f.entries() {
        for gj in g.entries() {
            data.push(fi * gj.conj());
        }
    }
    LinOperator {
        rows: f.dim(),
        cols: g.dim(),
        data,
    }
}

/// Operator, Hilbert–Schmidt and trace norms of one operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub op: f64,
    pub hs: f64,
    pub trace: f64,
}

/// Which of the three operator norms to measure with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Op,
    Hs,
    Trace,
}

impl Norms {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Op => self.op,
            NormKind::Hs => self.hs,
            NormKind::Trace => self.trace,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Op => "op",
            NormKind::Hs => "hs",
            NormKind::Trace => "trace",
        })
    }
}

/// Dense complex matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOperator {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl LinOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("operator"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "operator storage",
                left: data.len(),
                right: rows * cols,
            });
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                context: "operator row length",
                left: bad.len(),
                right: ncols,
            });
        }
        Self::new(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let first = columns.first().ok_or(Error::Empty("operator columns"))?;
        let rows = first.dim();
        for c in columns {
            check_dims("operator columns", c.dim(), rows)?;
        }
        let cols = columns.len();
        let mut data = vec![ZERO; rows * cols];
        for (j, c) in columns.iter().enumerate() {
            for (i, &z) in c.entries().iter().enumerate() {
                data[i * cols + j] = z;
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty operator");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut o = Self::zeros(n, n);
        for i in 0..n {
            o.data[i * n + i] = ONE;
        }
        o
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut o = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            o.data[i * n + i] = z;
        }
        o
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, context: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                context,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "operator addition", |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "operator subtraction", |a, b| a - b)
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                context: "operator product",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let rhs_t: Vec<Vec<C64>> = (0..rhs.cols)
            .map(|j| (0..rhs.rows).map(|i| rhs.get(i, j)).collect())
            .collect();
        let mut data = Vec::with_capacity(self.rows * rhs.cols);
        let mut terms = vec![ZERO; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for col in &rhs_t {
                for ((t, a), b) in terms.iter_mut().zip(row).zip(col) {
                    *t = a * b;
                }
                data.push(pairwise_sum(&terms));
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        check_dims("operator application", self.cols, v.dim())?;
        let mut terms = vec![ZERO; self.cols];
        let out = (0..self.rows)
            .map(|i| {
                for ((t, a), b) in terms.iter_mut().zip(self.row(i)).zip(v.entries()) {
                    *t = a * b;
                }
                pairwise_sum(&terms)
            })
            .collect();
        Ok(CVector(out))
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                context: "trace",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let diag: Vec<C64> = (0..self.rows).map(|i| self.get(i, i)).collect();
        Ok(pairwise_sum(&diag))
    }

    /// Σ |O_ij|².
    pub fn frobenius_sq(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|z| z.norm_sqr()).collect();
        pairwise_sum(&sq)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.checked_sub(other)?.max_abs())
    }

    /// Hilbert–Schmidt inner product ⟨self, other⟩ = tr(self · other*).
    pub fn hs_inner(&self, other: &Self) -> Result<C64> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                context: "Hilbert-Schmidt inner product",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(inner_unchecked(&self.data, &other.data))
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn numerical_error(&self, what: &'static str) -> Error {
        Error::Numerical {
            what,
            rows: self.rows,
            cols: self.cols,
            frobenius: self.frobenius_sq().sqrt(),
        }
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if !all_finite(&self.data) {
            return Err(Error::NonFinite("singular value decomposition"));
        }
        let svd = self
            .to_nalgebra()
            .try_svd(false, false, f64::EPSILON, 100_000)
            .ok_or_else(|| self.numerical_error("singular value decomposition"))?;
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// All three norms from one SVD; the HS norm is cross-checked against
    /// the Frobenius sum of squared entries.
    pub fn norms(&self) -> Result<Norms> {
        let sv = self.singular_values()?;
        let sq: Vec<f64> = sv.iter().map(|s| s * s).collect();
        let hs_sq = pairwise_sum(&sq);
        let frob = self.frobenius_sq();
        let allowed = FROBENIUS_REL_TOL * frob.max(hs_sq) + f64::MIN_POSITIVE;
        if (hs_sq - frob).abs() > allowed {
            return Err(Error::CrossCheck {
                what: "Hilbert-Schmidt norm vs Frobenius sum",
                deviation: (hs_sq - frob).abs(),
                allowed,
            });
        }
        Ok(Norms {
            op: sv.first().copied().unwrap_or(0.0),
            hs: hs_sq.sqrt(),
            trace: pairwise_sum(&sv),
        })
    }

    pub fn norm_op(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Op => self.norm_op(),
            NormKind::Hs => Ok(self.frobenius_sq().sqrt()),
            NormKind::Trace => Ok(pairwise_sum(&self.singular_values()?)),
        }
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }
}

const FROBENIUS_REL_TOL: f64 = 1e-9;

/// Relative Hermitian tolerance: `|O - O*|_op ≤ HERMITIAN_REL_TOL · |O|_op`.
pub const HERMITIAN_REL_TOL: f64 = 1e-9;

impl Mul<&CVector> for &LinOperator {
    type Output = CVector;
    fn mul(self, v: &CVector) -> CVector {
        self.apply(v).expect("operator/vector dimension mismatch")
    }
}

impl Mul for &LinOperator {
    type Output = LinOperator;
    fn mul(self, rhs: &LinOperator) -> LinOperator {
        self.matmul(rhs).expect("operator shape mismatch")
    }
}

impl Sub for &LinOperator {
    type Output = LinOperator;
    fn sub(self, rhs: &LinOperator) -> LinOperator {
        self.checked_sub(rhs).expect("operator shape mismatch")
    }
}

/// Spectral decomposition of a Hermitian operator: `values` ascending, the
/// k-th column of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: LinOperator,
}

impl HermitianEigen {
    /// V · diag(f(λ)) · V*.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> LinOperator {
        let n = self.values.len();
        let scaled: Vec<CVector> = (0..n)
            .map(|k| self.vectors.column(k).scale(C64::new(f(self.values[k]), 0.0)))
            .collect();
        let left = LinOperator::from_columns(&scaled).expect("non-empty spectrum");
        left.matmul(&self.vectors.adjoint()).expect("square factors")
    }
}

/// Eigen-decomposition of an (approximately) Hermitian operator. The input is
/// symmetrized before the solve; inputs further than the Hermitian tolerance
/// from their adjoint are rejected.
pub fn hermitian_eigen(o: &LinOperator) -> Result<HermitianEigen> {
    if !o.is_square() {
        return Err(Error::NonSquare {
            context: "Hermitian eigen-solve",
            rows: o.rows,
            cols: o.cols,
        });
    }
    if !o.is_finite() {
        return Err(Error::NonFinite("Hermitian eigen-solve"));
    }
    let adj = o.adjoint();
    let deviation = o.checked_sub(&adj)?.norm_op()?;
    let allowed = HERMITIAN_REL_TOL * o.norm_op()?;
    if deviation > allowed {
        return Err(Error::NotHermitian { deviation, allowed });
    }
    let sym = o.checked_add(&adj)?.scale(C64::new(0.5, 0.0));
    let eig = SymmetricEigen::try_new(sym.to_nalgebra(), f64::EPSILON, 100_000)
        .ok_or_else(|| sym.numerical_error("Hermitian eigen-solve"))?;

    let n = o.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let columns: Vec<CVector> = order
        .iter()
        .map(|&k| CVector(eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    Ok(HermitianEigen {
        values,
        vectors: LinOperator::from_columns(&columns)?,
    })
}

/// Real spectrum of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(o: &LinOperator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(o)?.values)
}

// Complex numbers are serialized as `[re, im]` pairs.

pub(crate) fn c64_to_pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn pair_to_c64(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(c64_to_pair).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        CVector::new(pairs.iter().map(pair_to_c64).collect()).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for LinOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorFile {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|i| self.row(i).iter().map(c64_to_pair).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = OperatorFile::deserialize(d)?;
        let rows: Vec<Vec<C64>> = file
            .entries
            .iter()
            .map(|r| r.iter().map(pair_to_c64).collect())
            .collect();
        let op = LinOperator::from_rows(rows).map_err(serde::de::Error::custom)?;
        if op.shape() != (file.rows, file.cols) {
            return Err(serde::de::Error::custom(format!(
                "declared shape {}x{} does not match entries {}x{}",
                file.rows, file.cols, op.rows, op.cols
            )));
        }
        Ok(op)
    }
}
