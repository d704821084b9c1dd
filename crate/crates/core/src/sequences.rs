//! Finite vector families and their analysis, synthesis, frame and Gram
//! operators.
//!
//! A family (ψ_k) of K vectors in ℂⁿ is always a Bessel sequence. It is a
//! frame when its frame operator S is invertible, and a Riesz basis when it
//! is a frame with K = n. Optimal bounds are the extreme eigenvalues of S.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, inner, CVector, HermitianEigen, LinOperator, C64};

/// A family counts as a frame when `A_opt > FRAME_REL_THRESHOLD · B_opt`.
pub const FRAME_REL_THRESHOLD: f64 = 1e-10;

/// Ordered family of vectors sharing one dimension, indexed `0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct VectorFamily {
    dim: usize,
    members: Vec<CVector>,
    labels: Option<Vec<Vec<i64>>>,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    dim: usize,
    vectors: Vec<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Vec<i64>>>,
}

impl TryFrom<FamilyFile> for VectorFamily {
    type Error = Error;
    fn try_from(f: FamilyFile) -> Result<Self> {
        let fam = VectorFamily::new(f.dim, f.vectors)?;
        match f.labels {
            Some(labels) => fam.with_labels(labels),
            None => Ok(fam),
        }
    }
}

impl From<VectorFamily> for FamilyFile {
    fn from(f: VectorFamily) -> Self {
        FamilyFile {
            dim: f.dim,
            vectors: f.members,
            labels: f.labels,
        }
    }
}

impl VectorFamily {
    pub fn new(dim: usize, members: Vec<CVector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("family dimension must be positive".into()));
        }
        if members.is_empty() {
            return Err(Error::Empty("vector family"));
        }
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "family member",
                    left: m.dim(),
                    right: dim,
                });
            }
        }
        Ok(Self {
            dim,
            members,
            labels: None,
        })
    }

    /// Standard orthonormal basis of ℂⁿ.
    pub fn onb(dim: usize) -> Self {
        Self::new(dim, (0..dim).map(|i| CVector::basis(dim, i)).collect())
            .expect("positive dimension")
    }

    /// Family made of the columns of `o`.
    pub fn from_columns(o: &LinOperator) -> Self {
        Self::new(o.rows(), (0..o.cols()).map(|j| o.column(j)).collect())
            .expect("operators are non-empty")
    }

    pub fn from_real(dim: usize, vectors: &[&[f64]]) -> Result<Self> {
        Self::new(
            dim,
            vectors
                .iter()
                .map(|v| CVector::from_real(v))
                .collect::<Result<_>>()?,
        )
    }

    pub fn with_labels(mut self, labels: Vec<Vec<i64>>) -> Result<Self> {
        if labels.len() != self.members.len() {
            return Err(Error::DimensionMismatch {
                context: "family labels",
                left: labels.len(),
                right: self.members.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[CVector] {
        &self.members
    }

    pub fn member(&self, k: usize) -> &CVector {
        &self.members[k]
    }

    pub fn labels(&self) -> Option<&[Vec<i64>]> {
        self.labels.as_deref()
    }

    /// Applies `f` to every member; labels are kept.
    pub fn map_members(&self, f: impl Fn(usize, &CVector) -> CVector) -> Self {
        Self {
            dim: self.dim,
            members: self.members.iter().enumerate().map(|(k, v)| f(k, v)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Coefficients (⟨f, ψ_k⟩)_k.
    pub fn analysis(&self, f: &CVector) -> Result<Vec<C64>> {
        self.members.iter().map(|psi| inner(f, psi)).collect()
    }

    /// K×n matrix whose k-th row is conj(ψ_k).
    pub fn analysis_matrix(&self) -> LinOperator {
        let data = self.members.iter().flat_map(|v| v.conj().into_entries()).collect();
        LinOperator::new(self.len(), self.dim, data).expect("validated family")
    }

    /// n×K matrix whose k-th column is ψ_k.
    pub fn synthesis_matrix(&self) -> LinOperator {
        LinOperator::from_columns(&self.members).expect("validated family")
    }

    /// S = D·C = Σ_k ψ_k ⊗ ψ̄_k.
    pub fn frame_operator(&self) -> LinOperator {
        self.synthesis_matrix()
            .matmul(&self.analysis_matrix())
            .expect("D and C are compatible")
    }

    /// Largest member norm.
    pub fn max_member_norm(&self) -> f64 {
        self.members.iter().map(CVector::norm).fold(0.0, f64::max)
    }

    pub fn min_member_norm(&self) -> f64 {
        self.members.iter().map(CVector::norm).fold(f64::INFINITY, f64::min)
    }

    fn frame_spectrum(&self) -> Result<HermitianEigen> {
        hermitian_eigen(&self.frame_operator())
    }

    /// Optimal upper (Bessel) bound, the largest eigenvalue of S.
    pub fn bessel_bound(&self) -> Result<f64> {
        Ok(upper_of(&self.frame_spectrum()?))
    }

    pub fn classify(&self) -> Result<FrameReport> {
        let eig = self.frame_spectrum()?;
        let upper = upper_of(&eig);
        let lowest = eig.values[0].max(0.0);
        let is_frame = upper > 0.0 && lowest > FRAME_REL_THRESHOLD * upper;
        let is_riesz_basis = is_frame && self.len() == self.dim;

        let riesz_bounds = if self.len() <= self.dim {
            let gram = hermitian_eigen(&gram_matrix(self, self)?)?;
            let hi = upper_of(&gram);
            let lo = gram.values[0].max(0.0);
            (hi > 0.0 && lo > FRAME_REL_THRESHOLD * hi).then_some((lo, hi))
        } else {
            None
        };

        let dual = if is_frame {
            Some(self.map_by(&eig.reassemble(|l| 1.0 / l)))
        } else {
            None
        };

        Ok(FrameReport {
            is_bessel: true,
            bessel_bound_opt: upper,
            is_frame,
            lower_bound_opt: is_frame.then_some(lowest),
            is_riesz_basis,
            is_riesz_sequence: is_riesz_basis || riesz_bounds.is_some(),
            riesz_bounds: riesz_bounds.map(|(lo, hi)| [lo, hi]),
            dual,
        })
    }

    fn map_by(&self, o: &LinOperator) -> Self {
        self.map_members(|_, v| o.apply(v).expect("square operator of family dimension"))
    }

    /// Canonical dual (S⁻¹ψ_k), with S⁻¹ formed from the eigen-decomposition of S.
    pub fn canonical_dual(&self) -> Result<Self> {
        let eig = self.frame_spectrum()?;
        let upper = upper_of(&eig);
        let lowest = eig.values[0].max(0.0);
        if !(upper > 0.0 && lowest > FRAME_REL_THRESHOLD * upper) {
            return Err(Error::NotAFrame {
                lower: lowest,
                upper,
            });
        }
        Ok(self.map_by(&eig.reassemble(|l| 1.0 / l)))
    }

    /// Biorthogonal family inside the span of a Riesz sequence: (S⁺ψ_k), with
    /// S⁺ the pseudo-inverse of the frame operator. Coincides with the
    /// canonical dual for Riesz bases.
    pub fn riesz_dual(&self) -> Result<Self> {
        let report = self.classify()?;
        if !report.is_riesz_sequence {
            return Err(Error::NotRieszSequence("dual on span"));
        }
        let eig = self.frame_spectrum()?;
        let cutoff = FRAME_REL_THRESHOLD * upper_of(&eig);
        Ok(self.map_by(&eig.reassemble(|l| if l > cutoff { 1.0 / l } else { 0.0 })))
    }
}

fn upper_of(eig: &HermitianEigen) -> f64 {
    eig.values.last().copied().unwrap_or(0.0).max(0.0)
}

fn check_same_dim(context: &'static str, f: &VectorFamily, g: &VectorFamily) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            context,
            left: f.dim(),
            right: g.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_same_shape(context: &'static str, f: &VectorFamily, g: &VectorFamily) -> Result<()> {
    if (f.dim(), f.len()) != (g.dim(), g.len()) {
        return Err(Error::ShapeMismatch {
            context,
            left: (f.dim(), f.len()),
            right: (g.dim(), g.len()),
        });
    }
    Ok(())
}

/// Cross-Gram matrix with entry (j, m) = ⟨φ_m, ψ_j⟩ for `psi` = (ψ_k), `phi` = (φ_k).
pub fn gram_matrix(psi: &VectorFamily, phi: &VectorFamily) -> Result<LinOperator> {
    check_same_dim("cross-Gram matrix", psi, phi)?;
    psi.analysis_matrix().matmul(&phi.synthesis_matrix())
}

/// True iff |⟨ψ_k, φ_l⟩ − δ_kl| ≤ tol for all k, l.
pub fn is_biorthogonal(psi: &VectorFamily, phi: &VectorFamily, tol: f64) -> Result<bool> {
    check_same_shape("biorthogonality", psi, phi)?;
    for (k, a) in psi.members().iter().enumerate() {
        for (l, b) in phi.members().iter().enumerate() {
            let delta = if k == l { 1.0 } else { 0.0 };
            if (inner(a, b)? - delta).norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Classification of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    /// Always true for finite families.
    pub is_bessel: bool,
    pub bessel_bound_opt: f64,
    pub is_frame: bool,
    pub lower_bound_opt: Option<f64>,
    pub is_riesz_basis: bool,
    pub is_riesz_sequence: bool,
    /// Extreme eigenvalues of the Gram matrix when the family is a Riesz sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riesz_bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<VectorFamily>,
}
