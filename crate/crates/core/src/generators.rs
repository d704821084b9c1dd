//! Reproducible construction of vector families, symbols and specs.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. A standard
//! complex Gaussian is `(x + iy)/√2` with `x`, `y` drawn independently from
//! `rand_distr::StandardNormal` (real part first). Gabor atoms are
//! `g_{p,q}[j] = g[(j − p·a) mod n] · exp(2πi·j·q·b/n)` for a window `g`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CVector, LinOperator, C64};
use crate::multiplier::{MultiplierSpec, Symbol};
use crate::sequences::VectorFamily;

/// Redraw budget for rejection-sampled families.
pub const DEFAULT_RETRY_BUDGET: usize = 100;

/// Lower-to-upper bound ratio a `random_frame` draw must exceed.
pub const RANDOM_FRAME_MIN_RATIO: f64 = 1e-6;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    CVector::new((0..dim).map(|_| complex_gaussian(rng)).collect()).expect("finite draws")
}

pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> LinOperator {
    LinOperator::new(rows, cols, (0..rows * cols).map(|_| complex_gaussian(rng)).collect())
        .expect("finite draws")
}

pub fn random_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, len: usize) -> VectorFamily {
    VectorFamily::new(dim, (0..len).map(|_| random_vector(rng, dim)).collect())
        .expect("positive sizes")
}

pub fn random_symbol<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Symbol {
    Symbol::new((0..len).map(|_| complex_gaussian(rng)).collect()).expect("finite draws")
}

/// Symbol with moduli uniform in `[lo, hi]` and uniform phases.
pub fn random_semi_normalized_symbol<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Symbol {
    let entries = (0..len)
        .map(|_| {
            let r = rng.random_range(lo..=hi);
            let theta = rng.random_range(0.0..2.0 * PI);
            C64::from_polar(r, theta)
        })
        .collect();
    Symbol::new(entries).expect("finite draws")
}

/// Random unitary: modified Gram–Schmidt (two passes) on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> LinOperator {
    loop {
        let raw: Vec<CVector> = (0..dim).map(|_| random_vector(rng, dim)).collect();
        if let Some(q) = orthonormalize(&raw) {
            return LinOperator::from_columns(&q).expect("non-empty");
        }
    }
}

fn orthonormalize(vectors: &[CVector]) -> Option<Vec<CVector>> {
    let mut out: Vec<CVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = inner(&w, q).expect("same dimension");
                w = w.checked_sub(&q.scale(c)).expect("same dimension");
            }
        }
        let n = w.norm();
        if n < 1e-8 * v.norm().max(f64::MIN_POSITIVE) {
            return None;
        }
        out.push(w.scale(C64::new(1.0 / n, 0.0)));
    }
    Some(out)
}

/// Unit-norm periodized Gaussian window on ℤ_n, centered at 0.
pub fn gaussian_window(dim: usize) -> CVector {
    let n = dim as f64;
    let raw: Vec<C64> = (0..dim)
        .map(|j| {
            let d = j.min(dim - j) as f64;
            C64::new((-PI * d * d / n).exp(), 0.0)
        })
        .collect();
    let v = CVector::new(raw).expect("finite window");
    let norm = v.norm();
    v.scale(C64::new(1.0 / norm, 0.0))
}

/// Time-frequency shift `M_{q·b} T_{p·a} g`.
fn gabor_atom(window: &CVector, shift: usize, freq: usize) -> CVector {
    let n = window.dim();
    let entries = (0..n)
        .map(|j| {
            let phase = 2.0 * PI * ((j * freq) % n) as f64 / n as f64;
            window[(j + n - shift % n) % n] * C64::from_polar(1.0, phase)
        })
        .collect();
    CVector::new(entries).expect("finite atom")
}

fn lattice(dim: usize, a: usize, b: usize) -> Result<Vec<(usize, usize)>> {
    if a == 0 || b == 0 || !dim.is_multiple_of(a) || !dim.is_multiple_of(b) {
        return Err(Error::InvalidParameter(format!(
            "Gabor lattice steps a={a}, b={b} must divide dim={dim}"
        )));
    }
    Ok((0..dim / a)
        .flat_map(|p| (0..dim / b).map(move |q| (p, q)))
        .collect())
}

fn gabor_family(window: &CVector, a: usize, b: usize, points: &[(usize, usize)]) -> Result<VectorFamily> {
    let members = points
        .iter()
        .map(|&(p, q)| gabor_atom(window, p * a, q * b))
        .collect();
    let labels = points.iter().map(|&(p, q)| vec![p as i64, q as i64]).collect();
    VectorFamily::new(window.dim(), members)?.with_labels(labels)
}

/// Which family to build, with its kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Onb,
    RandomBessel {
        k: usize,
    },
    RandomFrame {
        k: usize,
    },
    /// Columns of `U·Σ·V*` with log-spaced singular values in `[1, condition]`,
    /// so the Riesz bounds are `1` and `condition²`.
    RieszFromMatrix {
        condition: f64,
    },
    GaborRegular {
        a: usize,
        b: usize,
    },
    GaborIrregular {
        a: usize,
        b: usize,
        k: usize,
    },
    HarmonicCounterexample {
        p: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

impl GenSpec {
    pub fn new(dim: usize, seed: u64, kind: FamilyKind) -> Self {
        Self { dim, seed, kind }
    }
}

/// Gaussian family redrawn until A_opt > RANDOM_FRAME_MIN_RATIO · B_opt.
pub fn random_frame_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, len: usize) -> Result<VectorFamily> {
    if len < dim {
        return Err(Error::InvalidParameter(format!(
            "random_frame needs k >= dim (k={len}, dim={dim})"
        )));
    }
    for _ in 0..DEFAULT_RETRY_BUDGET {
        let fam = random_family(rng, dim, len);
        let r = fam.classify()?;
        if r.lower_bound_opt.unwrap_or(0.0) > RANDOM_FRAME_MIN_RATIO * r.bessel_bound_opt {
            return Ok(fam);
        }
    }
    Err(Error::Infeasible {
        what: "random_frame".into(),
        retries: DEFAULT_RETRY_BUDGET,
    })
}

pub fn generate(spec: &GenSpec) -> Result<VectorFamily> {
    let n = spec.dim;
    if n == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    let mut rng = seeded_rng(spec.seed);
    match spec.kind {
        FamilyKind::Onb => Ok(VectorFamily::onb(n)),
        FamilyKind::RandomBessel { k } => {
            positive("k", k)?;
            Ok(random_family(&mut rng, n, k))
        }
        FamilyKind::RandomFrame { k } => random_frame_family(&mut rng, n, k),
        FamilyKind::RieszFromMatrix { condition } => riesz_from_matrix(&mut rng, n, condition),
        FamilyKind::GaborRegular { a, b } => gabor_family(&gaussian_window(n), a, b, &lattice(n, a, b)?),
        FamilyKind::GaborIrregular { a, b, k } => {
            let points = lattice(n, a, b)?;
            if k < n || k > points.len() {
                return Err(Error::InvalidParameter(format!(
                    "gabor_irregular needs dim <= k <= lattice size (k={k}, dim={n}, lattice={})",
                    points.len()
                )));
            }
            let window = gaussian_window(n);
            for _ in 0..DEFAULT_RETRY_BUDGET {
                let mut chosen = sample(&mut rng, points.len(), k).into_vec();
                chosen.sort_unstable();
                let subset: Vec<_> = chosen.iter().map(|&i| points[i]).collect();
                let fam = gabor_family(&window, a, b, &subset)?;
                if fam.classify()?.is_frame {
                    return Ok(fam);
                }
            }
            Err(Error::Infeasible {
                what: "gabor_irregular frame check".into(),
                retries: DEFAULT_RETRY_BUDGET,
            })
        }
        FamilyKind::HarmonicCounterexample { p } => harmonic_family(n, p),
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidParameter(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

/// Columns of U·diag(σ)·V* with σ log-spaced on [1, condition]; Riesz bounds are σ_min², σ_max².
pub fn riesz_from_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, condition: f64) -> Result<VectorFamily> {
    if !(condition.is_finite() && condition >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "condition target must be finite and >= 1, got {condition}"
        )));
    }
    if n == 1 && condition != 1.0 {
        return Err(Error::InvalidParameter("a one-dimensional basis has condition 1".into()));
    }
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let sigma: Vec<C64> = (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            C64::new(condition.powf(t), 0.0)
        })
        .collect();
    let m = u.matmul(&LinOperator::diag(&sigma))?.matmul(&v.adjoint())?;
    Ok(VectorFamily::from_columns(&m))
}

/// {e_q / p : 1 ≤ p ≤ P, 0 ≤ q < n}, labelled (p, q); tight with bound Σ_{p≤P} p⁻².
pub fn harmonic_family(dim: usize, shells: usize) -> Result<VectorFamily> {
    positive("p", shells)?;
    let mut members = Vec::with_capacity(dim * shells);
    let mut labels = Vec::with_capacity(dim * shells);
    for p in 1..=shells {
        for q in 0..dim {
            members.push(CVector::basis(dim, q).scale(C64::new(1.0 / p as f64, 0.0)));
            labels.push(vec![p as i64, q as i64]);
        }
    }
    VectorFamily::new(dim, members)?.with_labels(labels)
}

/// Harmonic family with symbol m_{p,q} = p². Each shell contributes the
/// identity, so the multiplier is P·I although ‖m‖_∞ = P².
pub fn unbounded_symbol_fixture(dim: usize, shells: usize) -> Result<MultiplierSpec> {
    let fam = harmonic_family(dim, shells)?;
    let symbol = Symbol::from_real(
        &fam.labels()
            .expect("harmonic family is labelled")
            .iter()
            .map(|l| (l[0] * l[0]) as f64)
            .collect::<Vec<_>>(),
    )?;
    MultiplierSpec::new(symbol, fam.clone(), fam)
}

/// Random spec with Gaussian families and symbol.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, analysis_dim: usize, synthesis_dim: usize, len: usize) -> MultiplierSpec {
    let psi = random_family(rng, analysis_dim, len);
    let phi = random_family(rng, synthesis_dim, len);
    let m = random_symbol(rng, len);
    MultiplierSpec::new(m, psi, phi).expect("consistent lengths")
}

/// Riesz-basis pair on ℂⁿ (condition targets 4 and 3) with a symbol of
/// moduli in [1/2, 2].
pub fn random_riesz_spec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<MultiplierSpec> {
    let psi = riesz_from_matrix(rng, dim, if dim == 1 { 1.0 } else { 4.0 })?;
    let phi = riesz_from_matrix(rng, dim, if dim == 1 { 1.0 } else { 3.0 })?;
    let m = random_semi_normalized_symbol(rng, dim, 0.5, 2.0);
    MultiplierSpec::new(m, psi, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onb_is_tight_with_unit_bound() {
        let r = generate(&GenSpec::new(4, 0, FamilyKind::Onb)).unwrap().classify().unwrap();
        assert!(r.is_riesz_basis);
        assert_eq!(r.bessel_bound_opt, 1.0);
        assert_eq!(r.lower_bound_opt, Some(1.0));
    }

    #[test]
    fn harmonic_partial_sum_bound() {
        let f = generate(&GenSpec::new(2, 0, FamilyKind::HarmonicCounterexample { p: 2 })).unwrap();
        assert_eq!(f.len(), 4);
        let r = f.classify().unwrap();
        assert!((r.bessel_bound_opt - 1.25).abs() < 1e-12);
        assert!((r.lower_bound_opt.unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn riesz_condition_target() {
        let f = generate(&GenSpec::new(5, 3, FamilyKind::RieszFromMatrix { condition: 10.0 })).unwrap();
        let r = f.classify().unwrap();
        assert!(r.is_riesz_basis);
        let ratio = r.bessel_bound_opt / r.lower_bound_opt.unwrap();
        assert!((ratio - 100.0).abs() < 5.0, "ratio {ratio}");
        assert!((r.lower_bound_opt.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn riesz_rejects_bad_condition() {
        assert!(generate(&GenSpec::new(3, 0, FamilyKind::RieszFromMatrix { condition: 0.5 })).is_err());
        assert!(generate(&GenSpec::new(1, 0, FamilyKind::RieszFromMatrix { condition: 2.0 })).is_err());
        assert!(generate(&GenSpec::new(1, 0, FamilyKind::RieszFromMatrix { condition: 1.0 })).is_ok());
    }

    #[test]
    fn full_gabor_lattice_is_tight() {
        for n in [4usize, 6, 8] {
            let f = generate(&GenSpec::new(n, 0, FamilyKind::GaborRegular { a: 1, b: 1 })).unwrap();
            assert_eq!(f.len(), n * n);
            let r = f.classify().unwrap();
            // n · ‖g‖² with a unit-norm window
            assert!((r.bessel_bound_opt - n as f64).abs() < 1e-10);
            assert!((r.lower_bound_opt.unwrap() - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn gabor_parameter_checks() {
        let f = generate(&GenSpec::new(8, 0, FamilyKind::GaborRegular { a: 2, b: 4 })).unwrap();
        assert_eq!(f.len(), 4 * 2);
        assert_eq!(f.labels().unwrap()[1], vec![0, 1]);
        assert!(generate(&GenSpec::new(8, 0, FamilyKind::GaborRegular { a: 3, b: 1 })).is_err());
        assert!(generate(&GenSpec::new(8, 0, FamilyKind::GaborIrregular { a: 1, b: 1, k: 4 })).is_err());
    }

    #[test]
    fn irregular_gabor_is_a_frame() {
        let f = generate(&GenSpec::new(6, 11, FamilyKind::GaborIrregular { a: 1, b: 1, k: 12 })).unwrap();
        assert_eq!(f.len(), 12);
        assert!(f.classify().unwrap().is_frame);
    }

    #[test]
    fn gabor_atom_modulation_convention() {
        let g = gaussian_window(4);
        let atom = gabor_atom(&g, 1, 1);
        // j = 2: g[1] · e^{2πi·2/4} = −g[1]
        assert!((atom[2] + g[1]).norm() < 1e-15);
    }

    #[test]
    fn random_frame_and_bessel() {
        let f = generate(&GenSpec::new(3, 5, FamilyKind::RandomFrame { k: 5 })).unwrap();
        assert!(f.classify().unwrap().is_frame);
        assert!(generate(&GenSpec::new(3, 5, FamilyKind::RandomFrame { k: 2 })).is_err());
        let b = generate(&GenSpec::new(4, 5, FamilyKind::RandomBessel { k: 2 })).unwrap();
        assert!(!b.classify().unwrap().is_frame);
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [
            FamilyKind::RandomBessel { k: 7 },
            FamilyKind::RieszFromMatrix { condition: 4.0 },
            FamilyKind::GaborIrregular { a: 1, b: 2, k: 5 },
        ] {
            let g = GenSpec::new(4, 42, kind);
            let a = generate(&g).unwrap();
            let b = generate(&g).unwrap();
            assert_eq!(a, b);
        }
        let a = generate(&GenSpec::new(4, 1, FamilyKind::RandomBessel { k: 3 })).unwrap();
        let b = generate(&GenSpec::new(4, 2, FamilyKind::RandomBessel { k: 3 })).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(&mut seeded_rng(9), 5);
        let prod = u.adjoint().matmul(&u).unwrap();
        assert!(prod.max_abs_diff(&LinOperator::identity(5)).unwrap() < 1e-13);
    }

    #[test]
    fn unbounded_symbol_examples() {
        let spec = unbounded_symbol_fixture(2, 2).unwrap();
        let m = spec.build().unwrap();
        assert!(m.max_abs_diff(&LinOperator::identity(2).scale(C64::new(2.0, 0.0))).unwrap() < 1e-14);
        assert_eq!(spec.symbol().norm_inf(), 4.0);

        let spec = unbounded_symbol_fixture(3, 1).unwrap();
        assert!(spec.build().unwrap().max_abs_diff(&LinOperator::identity(3)).unwrap() < 1e-14);

        let spec = unbounded_symbol_fixture(2, 10).unwrap();
        let ratio = spec.build().unwrap().norm_op().unwrap() / spec.symbol().norm_inf();
        assert!((ratio - 0.1).abs() < 1e-12);
    }

    #[test]
    fn genspec_json_shape() {
        let g: GenSpec = serde_json::from_str(r#"{"kind":"gabor_regular","dim":8,"a":2,"b":2,"seed":3}"#).unwrap();
        assert_eq!(g, GenSpec::new(8, 3, FamilyKind::GaborRegular { a: 2, b: 2 }));
        let g: GenSpec = serde_json::from_str(r#"{"kind":"onb","dim":2}"#).unwrap();
        assert_eq!(g.seed, 0);
    }
}
