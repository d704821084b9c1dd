//! Bessel multipliers `M f = Σ_k m_k ⟨f, ψ_k⟩ φ_k` and the certificates
//! attached to them.
//!
//! Throughout, `ψ` is the analysis family (domain ℂ^{n₁}) and `φ` the
//! synthesis family (codomain ℂ^{n₂}); the multiplier is the n₂×n₁ matrix
//! `D_φ · diag(m) · C_ψ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{random_operator, seeded_rng};
use crate::linalg::{inner, pairwise_sum, tensor, LinOperator, C64};
use crate::sequences::{check_same_shape, gram_matrix, VectorFamily};
use crate::tolerance::Tolerances;

/// Relative tolerance for internal two-route agreement checks.
pub const AGREEMENT_REL_TOL: f64 = 1e-10;

/// `min |m_k| > SEMI_NORMALIZED_REL · max(1, max |m_k|)`.
pub const SEMI_NORMALIZED_REL: f64 = 1e-12;

/// Finite complex symbol with cached l^∞, l², l¹ norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolFile", into = "SymbolFile")]
pub struct Symbol {
    entries: Vec<C64>,
    norm_inf: f64,
    norm_2: f64,
    norm_1: f64,
}

#[derive(Serialize, Deserialize)]
struct SymbolFile {
    entries: Vec<[f64; 2]>,
}

impl TryFrom<SymbolFile> for Symbol {
    type Error = Error;
    fn try_from(f: SymbolFile) -> Result<Self> {
        Symbol::new(f.entries.iter().map(|p| C64::new(p[0], p[1])).collect())
    }
}

impl From<Symbol> for SymbolFile {
    fn from(s: Symbol) -> Self {
        SymbolFile {
            entries: s.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Symbol {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("symbol"));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("symbol"));
        }
        let abs: Vec<f64> = entries.iter().map(|z| z.norm()).collect();
        let sq: Vec<f64> = abs.iter().map(|a| a * a).collect();
        Ok(Self {
            norm_inf: abs.iter().copied().fold(0.0, f64::max),
            norm_2: pairwise_sum(&sq).sqrt(),
            norm_1: pairwise_sum(&abs),
            entries,
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn constant(len: usize, value: C64) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::constant(len, C64::new(1.0, 0.0))
    }

    /// Indicator δ_k of length `len`.
    pub fn delta(len: usize, k: usize) -> Result<Self> {
        let mut e = vec![C64::new(0.0, 0.0); len];
        *e.get_mut(k)
            .ok_or_else(|| Error::InvalidParameter(format!("delta index {k} out of range {len}")))? =
            C64::new(1.0, 0.0);
        Self::new(e)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn norm_2(&self) -> f64 {
        self.norm_2
    }

    pub fn norm_1(&self) -> f64 {
        self.norm_1
    }

    pub fn min_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_semi_normalized(&self) -> bool {
        self.min_abs() > SEMI_NORMALIZED_REL * self.norm_inf.max(1.0)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.entries.iter().map(|z| z.conj()).collect()).expect("finite")
    }

    /// Pointwise reciprocal; requires a semi-normalized symbol.
    pub fn reciprocal(&self) -> Result<Self> {
        if !self.is_semi_normalized() {
            return Err(Error::NotSemiNormalized {
                min_abs: self.min_abs(),
                max_abs: self.norm_inf,
            });
        }
        Self::new(self.entries.iter().map(|z| z.inv()).collect())
    }

    fn zip(&self, other: &Self, context: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context,
                left: self.len(),
                right: other.len(),
            });
        }
        Self::new(self.entries.iter().zip(&other.entries).map(|(&a, &b)| f(a, b)).collect())
    }

    /// Pointwise product m·m'.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip(other, "symbol product", |a, b| a * b)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, "symbol addition", |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, "symbol subtraction", |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.entries.iter().map(|&z| z * c).collect()).expect("finite")
    }

    /// Keeps the entries at `keep` and zeroes the rest.
    pub fn restricted(&self, keep: &[usize]) -> Self {
        let mut e = vec![C64::new(0.0, 0.0); self.len()];
        for &k in keep {
            e[k] = self.entries[k];
        }
        Self::new(e).expect("finite")
    }
}

/// Pointwise multiplication by `m` on ℂ^K, as a K×K diagonal matrix.
pub fn diag_operator(m: &Symbol) -> LinOperator {
    LinOperator::diag(m.entries())
}

/// Inequality witness: `measured ≤ claimed` up to `slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub name: String,
    pub claimed: f64,
    pub measured: f64,
    pub margin: f64,
    pub holds: bool,
}

impl BoundCertificate {
    pub fn new(name: impl Into<String>, claimed: f64, measured: f64, slack: f64) -> Self {
        let margin = claimed - measured;
        Self {
            name: name.into(),
            claimed,
            measured,
            margin,
            holds: margin >= -slack,
        }
    }
}

/// Outcome of comparing two computational routes to the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub deviation: f64,
    pub allowed: f64,
}

impl Agreement {
    fn new(deviation: f64, scale: f64) -> Self {
        Self {
            deviation,
            allowed: AGREEMENT_REL_TOL * scale + f64::MIN_POSITIVE,
        }
    }

    pub fn holds(&self) -> bool {
        self.deviation <= self.allowed
    }

    pub fn certificate(&self, name: impl Into<String>) -> BoundCertificate {
        BoundCertificate::new(name, 0.0, self.deviation, self.allowed)
    }

    fn into_result(self, what: &'static str) -> Result<()> {
        if self.holds() {
            Ok(())
        } else {
            Err(Error::CrossCheck {
                what,
                deviation: self.deviation,
                allowed: self.allowed,
            })
        }
    }
}

/// Which family of a spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyRole {
    Analysis,
    Synthesis,
}

/// Symbol together with its analysis family (ψ_k) and synthesis family (φ_k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct MultiplierSpec {
    symbol: Symbol,
    analysis: VectorFamily,
    synthesis: VectorFamily,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    symbol: Symbol,
    analysis: VectorFamily,
    synthesis: VectorFamily,
}

impl TryFrom<SpecFile> for MultiplierSpec {
    type Error = Error;
    fn try_from(f: SpecFile) -> Result<Self> {
        MultiplierSpec::new(f.symbol, f.analysis, f.synthesis)
    }
}

impl From<MultiplierSpec> for SpecFile {
    fn from(s: MultiplierSpec) -> Self {
        SpecFile {
            symbol: s.symbol,
            analysis: s.analysis,
            synthesis: s.synthesis,
        }
    }
}

impl MultiplierSpec {
    pub fn new(symbol: Symbol, analysis: VectorFamily, synthesis: VectorFamily) -> Result<Self> {
        for (len, context) in [
            (analysis.len(), "symbol vs analysis family length"),
            (synthesis.len(), "symbol vs synthesis family length"),
        ] {
            if symbol.len() != len {
                return Err(Error::DimensionMismatch {
                    context,
                    left: symbol.len(),
                    right: len,
                });
            }
        }
        Ok(Self {
            symbol,
            analysis,
            synthesis,
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn analysis(&self) -> &VectorFamily {
        &self.analysis
    }

    pub fn synthesis(&self) -> &VectorFamily {
        &self.synthesis
    }

    pub fn len(&self) -> usize {
        self.symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbol.is_empty()
    }

    pub fn with_symbol(&self, symbol: Symbol) -> Result<Self> {
        Self::new(symbol, self.analysis.clone(), self.synthesis.clone())
    }

    pub fn with_analysis(&self, analysis: VectorFamily) -> Result<Self> {
        Self::new(self.symbol.clone(), analysis, self.synthesis.clone())
    }

    pub fn with_synthesis(&self, synthesis: VectorFamily) -> Result<Self> {
        Self::new(self.symbol.clone(), self.analysis.clone(), synthesis)
    }

    /// Sum of the moduli of all terms entering any entry of the matrix.
    fn term_scale(&self) -> f64 {
        let terms: Vec<f64> = (0..self.len())
            .map(|k| {
                self.symbol.entries[k].norm()
                    * self.synthesis.member(k).max_abs()
                    * self.analysis.member(k).max_abs()
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// The multiplier together with the agreement between `D·diag(m)·C` and
    /// `Σ_k m_k φ_k ⊗ ψ̄_k`.
    pub fn build_checked(&self) -> Result<(LinOperator, Agreement)> {
        let factored = self
            .synthesis
            .synthesis_matrix()
            .matmul(&diag_operator(&self.symbol))?
            .matmul(&self.analysis.analysis_matrix())?;

        let rank_one: Vec<LinOperator> = (0..self.len())
            .map(|k| tensor(self.synthesis.member(k), self.analysis.member(k)).scale(self.symbol.entries[k]))
            .collect();
        let (rows, cols) = factored.shape();
        let summed = LinOperator::new(
            rows,
            cols,
            (0..rows * cols)
                .map(|idx| {
                    let terms: Vec<C64> = rank_one.iter().map(|t| t.data()[idx]).collect();
                    pairwise_sum(&terms)
                })
                .collect(),
        )?;
        let agreement = Agreement::new(factored.max_abs_diff(&summed)?, self.term_scale());
        Ok((factored, agreement))
    }

    /// n₂×n₁ matrix `D_φ · diag(m) · C_ψ`.
    pub fn build(&self) -> Result<LinOperator> {
        let (m, agreement) = self.build_checked()?;
        agreement.into_result("multiplier factorization vs rank-one sum")?;
        Ok(m)
    }

    /// Spec of the adjoint multiplier: conjugate symbol, families swapped.
    pub fn adjoint(&self) -> Self {
        Self {
            symbol: self.symbol.conj(),
            analysis: self.synthesis.clone(),
            synthesis: self.analysis.clone(),
        }
    }

    /// Operator, trace and HS norm bounds `√B'·√B·‖m‖_{∞,1,2}` using the optimal
    /// Bessel bounds of both families.
    pub fn certify_bounds(&self, tol: &Tolerances) -> Result<Vec<BoundCertificate>> {
        let b_analysis = self.analysis.bessel_bound()?;
        let b_synthesis = self.synthesis.bessel_bound()?;
        let factor = (b_analysis * b_synthesis).sqrt();
        let norms = self.build()?.norms()?;
        Ok([
            ("operator_norm", self.symbol.norm_inf, norms.op),
            ("trace_norm", self.symbol.norm_1, norms.trace),
            ("hilbert_schmidt_norm", self.symbol.norm_2, norms.hs),
        ]
        .into_iter()
        .map(|(name, symbol_norm, measured)| {
            let claimed = factor * symbol_norm;
            BoundCertificate::new(name, claimed, measured, tol.allowed(claimed))
        })
        .collect())
    }

    /// `(tr M, Σ_k m_k ⟨φ_k, ψ_k⟩)`.
    pub fn trace_formula(&self) -> Result<(C64, C64)> {
        if self.analysis.dim() != self.synthesis.dim() {
            return Err(Error::NonSquare {
                context: "trace formula",
                rows: self.synthesis.dim(),
                cols: self.analysis.dim(),
            });
        }
        let lhs = self.build()?.trace()?;
        let terms: Vec<C64> = (0..self.len())
            .map(|k| Ok(self.symbol.entries[k] * inner(self.synthesis.member(k), self.analysis.member(k))?))
            .collect::<Result<_>>()?;
        Ok((lhs, pairwise_sum(&terms)))
    }

    /// For Riesz bases: `√(AA')‖m‖_∞ ≤ ‖M‖_op ≤ √(BB')‖m‖_∞`. The lower-bound
    /// certificate reads "the predicted lower value does not exceed ‖M‖_op".
    pub fn riesz_norm_bounds(&self, tol: &Tolerances) -> Result<Vec<BoundCertificate>> {
        let ra = self.analysis.classify()?;
        let rs = self.synthesis.classify()?;
        if !ra.is_riesz_basis {
            return Err(Error::NotRieszBasis("analysis family"));
        }
        if !rs.is_riesz_basis {
            return Err(Error::NotRieszBasis("synthesis family"));
        }
        let lower_factor = (ra.lower_bound_opt.unwrap_or(0.0) * rs.lower_bound_opt.unwrap_or(0.0)).sqrt();
        let upper_factor = (ra.bessel_bound_opt * rs.bessel_bound_opt).sqrt();
        let op = self.build()?.norm_op()?;
        let lower = lower_factor * self.symbol.norm_inf;
        let upper = upper_factor * self.symbol.norm_inf;
        Ok(vec![
            BoundCertificate::new("riesz_lower", op, lower, tol.allowed(op)),
            BoundCertificate::new("riesz_upper", upper, op, tol.allowed(upper)),
        ])
    }
}

/// `outer ∘ inner` as the five-factor product `D_φ · 𝓜_{m₁} · G_{ψ,ζ} · 𝓜_{m₂} · C_ξ`
/// and its agreement with the product of the two built matrices.
pub fn compose_checked(outer: &MultiplierSpec, inner_spec: &MultiplierSpec) -> Result<(LinOperator, Agreement)> {
    if outer.analysis.dim() != inner_spec.synthesis.dim() {
        return Err(Error::DimensionMismatch {
            context: "composition chain (outer domain vs inner codomain)",
            left: outer.analysis.dim(),
            right: inner_spec.synthesis.dim(),
        });
    }
    let cross_gram = gram_matrix(&outer.analysis, &inner_spec.synthesis)?;
    let five = outer
        .synthesis
        .synthesis_matrix()
        .matmul(&diag_operator(&outer.symbol))?
        .matmul(&cross_gram)?
        .matmul(&diag_operator(&inner_spec.symbol))?
        .matmul(&inner_spec.analysis.analysis_matrix())?;
    let direct = outer.build()?.matmul(&inner_spec.build()?)?;
    let scale = outer.term_scale() * inner_spec.term_scale() * outer.analysis.max_member_norm().max(1.0)
        * inner_spec.synthesis.max_member_norm().max(1.0);
    let agreement = Agreement::new(five.max_abs_diff(&direct)?, scale);
    Ok((five, agreement))
}

pub fn compose(outer: &MultiplierSpec, inner_spec: &MultiplierSpec) -> Result<LinOperator> {
    let (o, agreement) = compose_checked(outer, inner_spec)?;
    agreement.into_result("five-factor composition vs direct product")?;
    Ok(o)
}

/// Result of testing whether multipliers over (ψ, φ) compose by multiplying symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CalculusVerdict {
    Biorthogonal,
    /// First pair (k, l), in row-major order, with ⟨ψ_k, φ_l⟩ ≠ δ_kl.
    Violation { k: usize, l: usize, value: [f64; 2] },
    /// A zero member makes the test vacuous at this index.
    Degenerate { family: FamilyRole, index: usize },
}

/// Tests `M_{δ_a}∘M_{δ_b} = M_{δ_a·δ_b}` for all index pairs, multipliers taken
/// with synthesis family `synthesis` (ψ) and analysis family `analysis` (φ).
/// The composition identity at (a, b) is equivalent to ⟨ψ_b, φ_a⟩ = δ_ab, so
/// the check runs over the inner products directly.
pub fn symbolic_calculus_test(
    synthesis: &VectorFamily,
    analysis: &VectorFamily,
    tol: f64,
) -> Result<CalculusVerdict> {
    check_same_shape("symbolic calculus", synthesis, analysis)?;
    for (role, fam) in [(FamilyRole::Synthesis, synthesis), (FamilyRole::Analysis, analysis)] {
        if let Some(index) = fam.members().iter().position(|v| v.norm() <= tol) {
            return Ok(CalculusVerdict::Degenerate { family: role, index });
        }
    }
    for k in 0..synthesis.len() {
        for l in 0..analysis.len() {
            let value = inner(synthesis.member(k), analysis.member(l))?;
            let delta = if k == l { 1.0 } else { 0.0 };
            if (value - delta).norm() > tol {
                return Ok(CalculusVerdict::Violation {
                    k,
                    l,
                    value: [value.re, value.im],
                });
            }
        }
    }
    Ok(CalculusVerdict::Biorthogonal)
}

/// ‖AB − BA‖_op for A = M_{m₁,(ψ̃),(ψ)}, B = M_{m₂,(ψ̃),(ψ)} over a Riesz
/// basis or Riesz sequence (ψ) and its biorthogonal dual on the span.
pub fn commute_check(family: &VectorFamily, m1: &Symbol, m2: &Symbol, tol: &Tolerances) -> Result<BoundCertificate> {
    if !family.classify()?.is_riesz_sequence {
        return Err(Error::NotRieszSequence("commutation check"));
    }
    let dual = family.riesz_dual()?;
    let a = MultiplierSpec::new(m1.clone(), family.clone(), dual.clone())?.build()?;
    let b = MultiplierSpec::new(m2.clone(), family.clone(), dual)?.build()?;
    let commutator = a.matmul(&b)?.checked_sub(&b.matmul(&a)?)?;
    let scale = a.norm_op()? * b.norm_op()?;
    Ok(BoundCertificate::new(
        "commutator",
        0.0,
        commutator.norm_op()?,
        tol.allowed(scale),
    ))
}

/// Inverse of a Riesz multiplier: `M_{1/m, (ψ̃), (φ̃)}`, i.e. analysis family φ̃
/// and synthesis family ψ̃.
pub fn invert_riesz(spec: &MultiplierSpec) -> Result<MultiplierSpec> {
    if !spec.analysis.classify()?.is_riesz_basis {
        return Err(Error::NotRieszBasis("analysis family"));
    }
    if !spec.synthesis.classify()?.is_riesz_basis {
        return Err(Error::NotRieszBasis("synthesis family"));
    }
    let inv = spec.symbol.reciprocal()?;
    MultiplierSpec::new(inv, spec.synthesis.canonical_dual()?, spec.analysis.canonical_dual()?)
}

/// Symbol of `m` over Riesz bases: m_k = ⟨M ψ̃_k, φ̃_k⟩.
pub fn recover_symbol(m: &LinOperator, analysis: &VectorFamily, synthesis: &VectorFamily) -> Result<Symbol> {
    if !analysis.classify()?.is_riesz_basis {
        return Err(Error::NotRieszBasis("analysis family"));
    }
    if !synthesis.classify()?.is_riesz_basis {
        return Err(Error::NotRieszBasis("synthesis family"));
    }
    if m.shape() != (synthesis.dim(), analysis.dim()) {
        return Err(Error::ShapeMismatch {
            context: "operator vs (synthesis dim, analysis dim)",
            left: m.shape(),
            right: (synthesis.dim(), analysis.dim()),
        });
    }
    if analysis.len() != synthesis.len() {
        return Err(Error::DimensionMismatch {
            context: "analysis vs synthesis family length",
            left: analysis.len(),
            right: synthesis.len(),
        });
    }
    let psi_dual = analysis.canonical_dual()?;
    let phi_dual = synthesis.canonical_dual()?;
    let entries = (0..analysis.len())
        .map(|k| inner(&m.apply(psi_dual.member(k))?, phi_dual.member(k)))
        .collect::<Result<_>>()?;
    Symbol::new(entries)
}

/// Σ_{k,l} |⟨O, ψ_k ⊗ φ̄_l⟩_HS|², evaluated as ‖C_ψ · O · D_φ‖²_F.
pub fn tensor_coefficient_energy(o: &LinOperator, psi: &VectorFamily, phi: &VectorFamily) -> Result<f64> {
    Ok(psi
        .analysis_matrix()
        .matmul(o)?
        .matmul(&phi.synthesis_matrix())?
        .frobenius_sq())
}

/// Rank-one operators (ψ_k ⊗ φ̄_l) form a Bessel sequence in HS with bound
/// B₁·B₂: the certificate records the largest normalized coefficient energy
/// over `trials` seeded random operators.
pub fn hs_bessel_certificate(
    psi: &VectorFamily,
    phi: &VectorFamily,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<BoundCertificate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let bound = psi.bessel_bound()? * phi.bessel_bound()?;
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let o = random_operator(&mut rng, psi.dim(), phi.dim());
        let ratio = tensor_coefficient_energy(&o, psi, phi)? / o.frobenius_sq();
        worst = worst.max(ratio);
    }
    Ok(BoundCertificate::new("hs_tensor_bessel", bound, worst, tol.allowed(bound)))
}

/// Order in which symbol entries are retained by [`truncation_convergence`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationOrder {
    Index,
    #[default]
    MagnitudeDescending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    /// Number of retained symbol entries.
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    /// max over rows N' ≥ N of `measured`; non-increasing in N.
    pub envelope: f64,
}

/// ‖M_{m_N} − M‖_op for N = 0..=K against `√(B B')·max_{k∉kept}|m_k|`.
pub fn truncation_convergence(spec: &MultiplierSpec, order: TruncationOrder) -> Result<Vec<TruncationRow>> {
    let k_total = spec.len();
    let mut perm: Vec<usize> = (0..k_total).collect();
    if order == TruncationOrder::MagnitudeDescending {
        let abs: Vec<f64> = spec.symbol.entries.iter().map(|z| z.norm()).collect();
        perm.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]).then(a.cmp(&b)));
    }
    let factor = (spec.analysis.bessel_bound()? * spec.synthesis.bessel_bound()?).sqrt();
    let full = spec.build()?;

    let mut rows = Vec::with_capacity(k_total + 1);
    for n in 0..=k_total {
        let truncated = spec.with_symbol(spec.symbol.restricted(&perm[..n]))?.build()?;
        let measured = truncated.checked_sub(&full)?.norm_op()?;
        let tail = perm[n..]
            .iter()
            .map(|&k| spec.symbol.entries[k].norm())
            .fold(0.0, f64::max);
        let bound = factor * tail;
        rows.push(TruncationRow {
            n,
            measured,
            bound,
            margin: bound - measured,
            envelope: 0.0,
        });
    }
    let mut running: f64 = 0.0;
    for row in rows.iter_mut().rev() {
        running = running.max(row.measured);
        row.envelope = running;
    }
    Ok(rows)
}
