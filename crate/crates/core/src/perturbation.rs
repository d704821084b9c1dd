//! Distances between families, perturbation predictions for frame bounds and
//! the continuity experiments for multipliers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{complex_gaussian, seeded_rng};
use crate::linalg::{pairwise_sum, CVector, NormKind, C64};
use crate::multiplier::{BoundCertificate, MultiplierSpec, Symbol};
use crate::sequences::{check_same_shape, VectorFamily};
use crate::tolerance::Tolerances;

/// Four ways of measuring how far two families are apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// max_k ‖ψ_k − φ_k‖
    pub d_sup: f64,
    /// (Σ_k ‖ψ_k − φ_k‖²)^{1/2}
    pub d_l2: f64,
    /// Σ_k ‖ψ_k − φ_k‖
    pub d_l1: f64,
    /// ‖D_ψ − D_φ‖_op
    pub d_bessel: f64,
}

fn member_distances(f: &VectorFamily, g: &VectorFamily) -> Result<Vec<f64>> {
    check_same_shape("family distance", f, g)?;
    f.members()
        .iter()
        .zip(g.members())
        .map(|(a, b)| Ok(a.checked_sub(b)?.norm()))
        .collect()
}

pub fn similarity(f: &VectorFamily, g: &VectorFamily) -> Result<SimilarityReport> {
    let d = member_distances(f, g)?;
    let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
    Ok(SimilarityReport {
        d_sup: d.iter().copied().fold(0.0, f64::max),
        d_l2: pairwise_sum(&sq).sqrt(),
        d_l1: pairwise_sum(&d),
        d_bessel: f.synthesis_matrix().checked_sub(&g.synthesis_matrix())?.norm_op()?,
    })
}

/// Predicted frame-bound envelope for a perturbation at Bessel distance μ.
///
/// The upper value `B(1+μ/√B)²` is valid for any μ; the lower value
/// `A(1−μ/√A)²` only when μ < √A, and is reported as 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPrediction {
    pub mu: f64,
    pub applicable: bool,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
}

impl PerturbationPrediction {
    pub fn new(a: f64, b: f64, mu: f64) -> Self {
        let applicable = mu < a.sqrt();
        Self {
            mu,
            applicable,
            predicted_lower: if applicable { a * (1.0 - mu / a.sqrt()).powi(2) } else { 0.0 },
            predicted_upper: b * (1.0 + mu / b.sqrt()).powi(2),
        }
    }
}

/// A prediction checked against the optimal bounds of the perturbed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionCheck {
    pub original_bounds: [f64; 2],
    pub perturbed_bounds: [f64; 2],
    pub prediction: PerturbationPrediction,
    pub certificates: Vec<BoundCertificate>,
    /// `Some` when the original family is a Riesz basis and the prediction applies.
    pub riesz_inherited: Option<bool>,
}

impl PredictionCheck {
    pub fn holds(&self) -> bool {
        self.certificates.iter().all(|c| c.holds) && self.riesz_inherited != Some(false)
    }
}

/// Envelope prediction for `g` as a perturbation of the frame `f`, verified
/// against `classify(g)`.
pub fn predict_bounds(f: &VectorFamily, g: &VectorFamily, tol: &Tolerances) -> Result<PredictionCheck> {
    let rf = f.classify()?;
    let a = match rf.lower_bound_opt {
        Some(a) if rf.is_frame => a,
        _ => {
            return Err(Error::NotAFrame {
                lower: rf.lower_bound_opt.unwrap_or(0.0),
                upper: rf.bessel_bound_opt,
            })
        }
    };
    let b = rf.bessel_bound_opt;
    let mu = similarity(f, g)?.d_bessel;
    let prediction = PerturbationPrediction::new(a, b, mu);

    let rg = g.classify()?;
    let (a_g, b_g) = (rg.lower_bound_opt.unwrap_or(0.0), rg.bessel_bound_opt);
    let mut certificates = vec![BoundCertificate::new(
        "perturbed_upper_bound",
        prediction.predicted_upper,
        b_g,
        tol.allowed(prediction.predicted_upper),
    )];
    if prediction.applicable {
        certificates.push(BoundCertificate::new(
            "perturbed_lower_bound",
            a_g,
            prediction.predicted_lower,
            tol.allowed(b_g),
        ));
    }
    let riesz_inherited = (rf.is_riesz_basis && prediction.applicable).then_some(rg.is_riesz_basis);
    Ok(PredictionCheck {
        original_bounds: [a, b],
        perturbed_bounds: [a_g, b_g],
        prediction,
        certificates,
        riesz_inherited,
    })
}

/// Operator-norm drift of analysis, synthesis and frame operators between `f`
/// and its perturbation `g` at ε = d_l2(f, g).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub epsilon: f64,
    pub d_c: f64,
    pub d_d: f64,
    pub d_s: f64,
    /// ε·(√(B+1) + √B) with B = B_opt(f).
    pub d_s_bound: f64,
    /// False when the bound's premise fails; no certificates are issued then.
    pub bound_claimed: bool,
    pub certificates: Vec<BoundCertificate>,
}

impl DriftReport {
    pub fn holds(&self) -> bool {
        self.certificates.iter().all(|c| c.holds)
    }
}

/// The S-drift bound rests on ‖D_g‖ ≤ √(B+1); it is claimed only when ε ≤ 1
/// and B_opt(g) ≤ B_opt(f) + 1.
pub fn operator_drift(f: &VectorFamily, g: &VectorFamily, tol: &Tolerances) -> Result<DriftReport> {
    let epsilon = similarity(f, g)?.d_l2;
    let b = f.bessel_bound()?;
    let b_g = g.bessel_bound()?;
    let d_c = f.analysis_matrix().checked_sub(&g.analysis_matrix())?.norm_op()?;
    let d_d = f.synthesis_matrix().checked_sub(&g.synthesis_matrix())?.norm_op()?;
    let d_s = f.frame_operator().checked_sub(&g.frame_operator())?.norm_op()?;
    let d_s_bound = epsilon * ((b + 1.0).sqrt() + b.sqrt());
    let bound_claimed = epsilon <= 1.0 && b_g <= b + 1.0;
    let certificates = if bound_claimed {
        let slack = tol.allowed(b.max(1.0) * epsilon.max(f64::MIN_POSITIVE));
        vec![
            BoundCertificate::new("analysis_drift", epsilon, d_c, tol.allowed(epsilon)),
            BoundCertificate::new("synthesis_drift", epsilon, d_d, tol.allowed(epsilon)),
            BoundCertificate::new("frame_operator_drift", d_s_bound, d_s, slack),
        ]
    } else {
        Vec::new()
    };
    Ok(DriftReport {
        epsilon,
        d_c,
        d_d,
        d_s,
        d_s_bound,
        bound_claimed,
        certificates,
    })
}

/// What is perturbed in a continuity experiment, and in which metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityMode {
    SymbolInf,
    SymbolL2,
    SymbolL1,
    FamilyUniform,
    FamilyL2,
    FamilyL1,
    /// Symbol in l^∞ and both families in l¹, measured in operator norm.
    Joint,
}

impl ContinuityMode {
    pub const ALL: [ContinuityMode; 7] = [
        Self::SymbolInf,
        Self::SymbolL2,
        Self::SymbolL1,
        Self::FamilyUniform,
        Self::FamilyL2,
        Self::FamilyL1,
        Self::Joint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SymbolInf => "symbol_inf",
            Self::SymbolL2 => "symbol_l2",
            Self::SymbolL1 => "symbol_l1",
            Self::FamilyUniform => "family_uniform",
            Self::FamilyL2 => "family_l2",
            Self::FamilyL1 => "family_l1",
            Self::Joint => "joint",
        }
    }

    /// Operator norm in which the multiplier difference is measured.
    pub fn norm(self) -> NormKind {
        match self {
            Self::SymbolInf | Self::FamilyL1 | Self::Joint => NormKind::Op,
            Self::SymbolL2 | Self::FamilyL2 => NormKind::Hs,
            Self::SymbolL1 | Self::FamilyUniform => NormKind::Trace,
        }
    }

    pub fn is_symbol_mode(self) -> bool {
        matches!(self, Self::SymbolInf | Self::SymbolL2 | Self::SymbolL1)
    }
}

impl fmt::Display for ContinuityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContinuityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown continuity mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityConfig {
    pub mode: ContinuityMode,
    pub steps: usize,
    pub eps0: f64,
    pub seed: u64,
}

impl ContinuityConfig {
    pub const DEFAULT_STEPS: usize = 8;
    pub const DEFAULT_EPS0: f64 = 0.5;

    pub fn new(mode: ContinuityMode) -> Self {
        Self {
            mode,
            steps: Self::DEFAULT_STEPS,
            eps0: Self::DEFAULT_EPS0,
            seed: 0,
        }
    }

    pub fn epsilon(&self, l: usize) -> f64 {
        self.eps0 / 2f64.powi(l as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub l: usize,
    pub epsilon: f64,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub mode: ContinuityMode,
    pub norm: NormKind,
    pub eps0: f64,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
    /// |B_opt(perturbed) − B_opt(original)| per row, worst family.
    pub bound_drift: Vec<f64>,
    /// Running max of `bound_drift` from the last row; non-increasing.
    pub bound_drift_envelope: Vec<f64>,
    /// Uniform Bessel constants over all steps, joint mode only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uniform_bounds: Option<[f64; 2]>,
}

impl ConvergenceTable {
    pub fn certificates(&self, tol: &Tolerances) -> Vec<BoundCertificate> {
        self.rows
            .iter()
            .map(|r| {
                BoundCertificate::new(
                    format!("{}_step_{}", self.mode, r.l),
                    r.bound,
                    r.measured,
                    tol.allowed(r.bound),
                )
            })
            .collect()
    }

    /// measured[l] / measured[l+1] for consecutive rows.
    pub fn decay_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].measured / w[1].measured).collect()
    }
}

/// Unit direction in ℂ^K for the given symbol metric.
fn symbol_direction(rng: &mut impl Rng, len: usize, mode: ContinuityMode) -> Vec<C64> {
    let d: Vec<C64> = (0..len).map(|_| complex_gaussian(rng)).collect();
    let abs: Vec<f64> = d.iter().map(|z| z.norm()).collect();
    let norm = match mode {
        ContinuityMode::SymbolL2 => pairwise_sum(&abs.iter().map(|a| a * a).collect::<Vec<_>>()).sqrt(),
        ContinuityMode::SymbolL1 => pairwise_sum(&abs),
        _ => abs.iter().copied().fold(0.0, f64::max),
    };
    d.into_iter().map(|z| z / norm).collect()
}

/// Family of K unit-metric difference vectors: (Σ‖Δ_k‖^p)^{1/p} = 1 for the
/// mode's p ∈ {∞, 2, 1}.
fn family_direction(rng: &mut impl Rng, dim: usize, len: usize, mode: ContinuityMode) -> Vec<CVector> {
    let raw: Vec<Vec<C64>> = (0..len)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    let norms: Vec<f64> = raw
        .iter()
        .map(|v| pairwise_sum(&v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt())
        .collect();
    let total = match mode {
        ContinuityMode::FamilyUniform => norms.iter().copied().fold(0.0, f64::max),
        ContinuityMode::FamilyL2 => pairwise_sum(&norms.iter().map(|a| a * a).collect::<Vec<_>>()).sqrt(),
        _ => pairwise_sum(&norms),
    };
    raw.into_iter()
        .map(|v| CVector::new(v.into_iter().map(|z| z / total).collect()).expect("finite"))
        .collect()
}

fn shifted_family(base: &VectorFamily, direction: &[CVector], eps: f64) -> Result<VectorFamily> {
    let members = base
        .members()
        .iter()
        .zip(direction)
        .map(|(v, d)| v.checked_add(&d.scale(C64::new(eps, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    VectorFamily::new(base.dim(), members)
}

fn shifted_symbol(base: &Symbol, direction: &[C64], eps: f64) -> Result<Symbol> {
    Symbol::new(base.entries().iter().zip(direction).map(|(&m, &d)| m + d * eps).collect())
}

/// `base` moved by exactly `eps` along a seeded direction, measured in the
/// family metric of `mode` (uniform, l² or l¹).
pub fn random_perturbation<R: Rng>(
    rng: &mut R,
    base: &VectorFamily,
    eps: f64,
    mode: ContinuityMode,
) -> Result<VectorFamily> {
    if !matches!(mode, ContinuityMode::FamilyUniform | ContinuityMode::FamilyL2 | ContinuityMode::FamilyL1) {
        return Err(Error::InvalidParameter(format!("{mode} is not a family metric")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("perturbation size must be finite and nonnegative, got {eps}")));
    }
    let dir = family_direction(rng, base.dim(), base.len(), mode);
    shifted_family(base, &dir, eps)
}

/// Perturbs `spec` at distances ε_l = ε₀/2^l, l = 0..steps, along one seeded
/// direction scaled exactly to ε_l in the mode's metric, and compares each
/// multiplier difference with its linear-in-ε bound. Family modes perturb the
/// analysis family.
pub fn continuity_experiment(spec: &MultiplierSpec, config: &ContinuityConfig) -> Result<ConvergenceTable> {
    if !(config.eps0.is_finite() && config.eps0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps0 must be finite and nonnegative, got {}", config.eps0)));
    }
    if config.steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let mode = config.mode;
    let norm = mode.norm();
    let mut rng = seeded_rng(config.seed);
    let k = spec.len();
    let b_analysis = spec.analysis().bessel_bound()?;
    let b_synthesis = spec.synthesis().bessel_bound()?;
    let m = spec.symbol();
    let base = spec.build()?;

    // One direction per perturbed ingredient, fixed across steps.
    let sym_dir = match mode {
        ContinuityMode::FamilyUniform | ContinuityMode::FamilyL2 | ContinuityMode::FamilyL1 => None,
        ContinuityMode::Joint => Some(symbol_direction(&mut rng, k, ContinuityMode::SymbolInf)),
        _ => Some(symbol_direction(&mut rng, k, mode)),
    };
    let (psi_dir, phi_dir) = match mode {
        ContinuityMode::FamilyUniform | ContinuityMode::FamilyL2 | ContinuityMode::FamilyL1 => {
            (Some(family_direction(&mut rng, spec.analysis().dim(), k, mode)), None)
        }
        ContinuityMode::Joint => (
            Some(family_direction(&mut rng, spec.analysis().dim(), k, ContinuityMode::FamilyL1)),
            Some(family_direction(&mut rng, spec.synthesis().dim(), k, ContinuityMode::FamilyL1)),
        ),
        _ => (None, None),
    };

    let mut perturbed = Vec::with_capacity(config.steps);
    for l in 0..config.steps {
        let eps = config.epsilon(l);
        let symbol = match &sym_dir {
            Some(d) => shifted_symbol(m, d, eps)?,
            None => m.clone(),
        };
        let analysis = match &psi_dir {
            Some(d) => shifted_family(spec.analysis(), d, eps)?,
            None => spec.analysis().clone(),
        };
        let synthesis = match &phi_dir {
            Some(d) => shifted_family(spec.synthesis(), d, eps)?,
            None => spec.synthesis().clone(),
        };
        perturbed.push(MultiplierSpec::new(symbol, analysis, synthesis)?);
    }

    let mut drift = Vec::with_capacity(config.steps);
    let mut b_pert = Vec::with_capacity(config.steps);
    for p in &perturbed {
        let ba = if psi_dir.is_some() { p.analysis().bessel_bound()? } else { b_analysis };
        let bs = if phi_dir.is_some() { p.synthesis().bessel_bound()? } else { b_synthesis };
        drift.push((ba - b_analysis).abs().max((bs - b_synthesis).abs()));
        b_pert.push([ba, bs]);
    }
    let uniform = (mode == ContinuityMode::Joint).then(|| {
        b_pert.iter().fold([0.0f64, 0.0f64], |acc, b| [acc[0].max(b[0]), acc[1].max(b[1])])
    });

    let mut rows = Vec::with_capacity(config.steps);
    for (l, p) in perturbed.iter().enumerate() {
        let eps = config.epsilon(l);
        let measured = p.build()?.checked_sub(&base)?.norm(norm)?;
        let bound = match mode {
            ContinuityMode::SymbolInf | ContinuityMode::SymbolL2 | ContinuityMode::SymbolL1 => {
                (b_analysis * b_synthesis).sqrt() * eps
            }
            ContinuityMode::FamilyUniform => b_synthesis.sqrt() * m.norm_1() * eps,
            ContinuityMode::FamilyL2 => b_synthesis.sqrt() * m.norm_2() * eps,
            ContinuityMode::FamilyL1 => b_synthesis.sqrt() * m.norm_inf() * eps,
            ContinuityMode::Joint => {
                let [u_analysis, u_synthesis] = uniform.expect("joint mode");
                eps * ((u_analysis * u_synthesis).sqrt() + m.norm_inf() * (u_synthesis.sqrt() + b_analysis.sqrt()))
            }
        };
        rows.push(ConvergenceRow {
            l,
            epsilon: eps,
            measured,
            bound,
            margin: bound - measured,
        });
    }

    let mut envelope = drift.clone();
    let mut running: f64 = 0.0;
    for e in envelope.iter_mut().rev() {
        running = running.max(*e);
        *e = running;
    }
    Ok(ConvergenceTable {
        mode,
        norm,
        eps0: config.eps0,
        seed: config.seed,
        rows,
        bound_drift: drift,
        bound_drift_envelope: envelope,
        uniform_bounds: uniform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_family, random_frame_family, random_spec};

    fn onb_vs_stretched() -> (VectorFamily, VectorFamily) {
        (
            VectorFamily::onb(2),
            VectorFamily::from_real(2, &[&[1.1, 0.0], &[0.0, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn similarity_examples() {
        let (f, g) = onb_vs_stretched();
        assert_eq!(similarity(&f, &f).unwrap(), SimilarityReport { d_sup: 0.0, d_l2: 0.0, d_l1: 0.0, d_bessel: 0.0 });
        let s = similarity(&f, &g).unwrap();
        for v in [s.d_sup, s.d_l2, s.d_l1, s.d_bessel] {
            assert!((v - 0.1).abs() < 1e-12, "{s:?}");
        }
        assert!(similarity(&f, &VectorFamily::onb(3)).is_err());
    }

    #[test]
    fn uniform_distance_misses_non_frames() {
        // {e1, 0, 0} sits at d_sup = 1 from the ONB but spans a line.
        let onb = VectorFamily::onb(3);
        let collapsed = VectorFamily::from_real(3, &[&[1.0, 0.0, 0.0], &[0.0; 3], &[0.0; 3]]).unwrap();
        assert_eq!(similarity(&onb, &collapsed).unwrap().d_sup, 1.0);
        assert!(!collapsed.classify().unwrap().is_frame);
    }

    #[test]
    fn prediction_examples() {
        let (f, g) = onb_vs_stretched();
        let check = predict_bounds(&f, &g, &Tolerances::default()).unwrap();
        assert!(check.prediction.applicable);
        assert!((check.prediction.predicted_lower - 0.81).abs() < 1e-12);
        assert!((check.prediction.predicted_upper - 1.21).abs() < 1e-12);
        assert!((check.perturbed_bounds[0] - 1.0).abs() < 1e-12);
        assert!((check.perturbed_bounds[1] - 1.21).abs() < 1e-12);
        assert_eq!(check.riesz_inherited, Some(true));
        assert!(check.holds());

        let same = predict_bounds(&f, &f, &Tolerances::default()).unwrap();
        assert_eq!(same.prediction.predicted_lower, 1.0);
        assert_eq!(same.prediction.predicted_upper, 1.0);
        assert!(same.holds());

        let zero = VectorFamily::from_real(2, &[&[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        let flagged = predict_bounds(&f, &zero, &Tolerances::default()).unwrap();
        assert!(!flagged.prediction.applicable);
        assert_eq!(flagged.riesz_inherited, None);
        assert!(flagged.holds());

        let not_frame = VectorFamily::from_real(2, &[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(predict_bounds(&not_frame, &f, &Tolerances::default()), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn drift_examples() {
        let (f, g) = onb_vs_stretched();
        let r = operator_drift(&f, &f, &Tolerances::default()).unwrap();
        assert_eq!((r.d_c, r.d_d, r.d_s), (0.0, 0.0, 0.0));

        let r = operator_drift(&f, &g, &Tolerances::default()).unwrap();
        assert!((r.d_c - 0.1).abs() < 1e-12 && (r.d_d - 0.1).abs() < 1e-12);
        assert!((r.d_s - 0.21).abs() < 1e-12);
        assert!((r.d_s_bound - 0.1 * (2f64.sqrt() + 1.0)).abs() < 1e-12);
        assert!(r.bound_claimed && r.holds());

        let far = VectorFamily::from_real(2, &[&[3.0, 0.0], &[0.0, 1.0]]).unwrap();
        let r = operator_drift(&f, &far, &Tolerances::default()).unwrap();
        assert!(!r.bound_claimed && r.certificates.is_empty());
    }

    #[test]
    fn random_drift_trials() {
        let mut rng = seeded_rng(17);
        for _ in 0..100 {
            let f = random_frame_family(&mut rng, 4, 7).unwrap();
            let dir = family_direction(&mut rng, 4, 7, ContinuityMode::FamilyL2);
            let eps = rng.random_range(0.0..1.0);
            let g = shifted_family(&f, &dir, eps).unwrap();
            let r = operator_drift(&f, &g, &Tolerances::default()).unwrap();
            assert!((r.epsilon - eps).abs() < 1e-12);
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn directions_have_exact_unit_size() {
        let mut rng = seeded_rng(3);
        for mode in [ContinuityMode::FamilyUniform, ContinuityMode::FamilyL2, ContinuityMode::FamilyL1] {
            let dir = family_direction(&mut rng, 3, 5, mode);
            let base = random_family(&mut rng, 3, 5);
            let moved = shifted_family(&base, &dir, 0.25).unwrap();
            let s = similarity(&base, &moved).unwrap();
            let d = match mode {
                ContinuityMode::FamilyUniform => s.d_sup,
                ContinuityMode::FamilyL2 => s.d_l2,
                _ => s.d_l1,
            };
            assert!((d - 0.25).abs() < 1e-14, "{mode}: {d}");
        }
    }

    #[test]
    fn symbol_inf_on_onb_is_tight() {
        let onb = VectorFamily::onb(3);
        let spec = MultiplierSpec::new(Symbol::from_real(&[1.0, 2.0, 3.0]).unwrap(), onb.clone(), onb).unwrap();
        let t = continuity_experiment(&spec, &ContinuityConfig::new(ContinuityMode::SymbolInf)).unwrap();
        for r in &t.rows {
            assert!((r.measured - r.epsilon).abs() < 1e-14 && (r.bound - r.epsilon).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_eps_gives_zero_rows() {
        let mut rng = seeded_rng(5);
        let spec = random_spec(&mut rng, 3, 3, 5);
        for mode in ContinuityMode::ALL {
            let cfg = ContinuityConfig { eps0: 0.0, ..ContinuityConfig::new(mode) };
            let t = continuity_experiment(&spec, &cfg).unwrap();
            assert!(t.rows.iter().all(|r| r.measured == 0.0), "{mode}");
        }
    }

    #[test]
    fn every_mode_respects_its_bound() {
        let mut rng = seeded_rng(11);
        for trial in 0..5 {
            let spec = random_spec(&mut rng, 4, 3, 6);
            for mode in ContinuityMode::ALL {
                let cfg = ContinuityConfig { seed: trial, ..ContinuityConfig::new(mode) };
                let t = continuity_experiment(&spec, &cfg).unwrap();
                assert!(t.certificates(&Tolerances::default()).iter().all(|c| c.holds), "{t:?}");
                assert!(t.bound_drift_envelope.windows(2).all(|w| w[0] >= w[1]));
                assert_eq!(t.rows.len(), 8);
                if mode.is_symbol_mode() {
                    assert!(t.decay_ratios().iter().all(|&q| q >= 1.8), "{mode}: {:?}", t.decay_ratios());
                }
            }
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in ContinuityMode::ALL {
            assert_eq!(mode.as_str().parse::<ContinuityMode>().unwrap(), mode);
            assert_eq!(serde_json::to_string(&mode).unwrap(), format!("\"{mode}\""));
        }
        assert!("sideways".parse::<ContinuityMode>().is_err());
    }
}
