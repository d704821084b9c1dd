//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

use std::process::Command;
use std::time::Instant;

use framemul::generators::{
    harmonic_family, random_family, random_frame_family, random_riesz_spec, random_spec, random_symbol,
    riesz_from_matrix, seeded_rng, unbounded_symbol_fixture,
};
use framemul::multiplier::{
    diag_operator, hs_bessel_certificate, invert_riesz, recover_symbol, symbolic_calculus_test, CalculusVerdict,
};
use framemul::perturbation::{
    continuity_experiment, operator_drift, predict_bounds, random_perturbation, ContinuityConfig, ContinuityMode,
};
use framemul::{LinOperator, Tolerances, VectorFamily};
use rand::Rng;

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn diagonal_exactness() -> Outcome {
    let mut rng = seeded_rng(1);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let k = rng.random_range(1..=64);
        let m = random_symbol(&mut rng, k);
        let n = diag_operator(&m).norms().map_err(|e| e.to_string())?;
        let dev = (n.op - m.norm_inf()).abs().max((n.hs - m.norm_2()).abs()).max((n.trace - m.norm_1()).abs());
        worst = worst.max(dev);
        ensure(dev <= 1e-12, || format!("symbol {i} (K={k}): deviation {dev:e}"))?;
    }
    Ok(format!("500 symbols, max deviation {worst:.2e}"))
}

/// Corpus shared by the norm-certificate and trace-formula checks.
fn spec_corpus() -> Vec<framemul::MultiplierSpec> {
    let mut rng = seeded_rng(2);
    (0..1000)
        .map(|_| {
            let n1 = rng.random_range(1..=16);
            let n2 = rng.random_range(1..=16);
            let k = rng.random_range(1..=48);
            random_spec(&mut rng, n1, n2, k)
        })
        .collect()
}

fn norm_certificates(corpus: &[framemul::MultiplierSpec]) -> Outcome {
    let mut min_rel: f64 = f64::INFINITY;
    for (i, spec) in corpus.iter().enumerate() {
        for c in spec.certify_bounds(&Tolerances::default()).map_err(|e| e.to_string())? {
            ensure(c.margin >= -1e-10 * c.claimed, || format!("spec {i}: {} margin {:e}", c.name, c.margin))?;
            min_rel = min_rel.min(c.margin / c.claimed);
        }
    }
    Ok(format!("{} specs x 3 bounds, min relative margin {min_rel:.3e}", corpus.len()))
}

fn trace_formula(corpus: &[framemul::MultiplierSpec]) -> Outcome {
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for (i, spec) in corpus.iter().enumerate() {
        if spec.analysis().dim() != spec.synthesis().dim() {
            continue;
        }
        let (lhs, rhs) = spec.trace_formula().map_err(|e| e.to_string())?;
        let rel = (lhs - rhs).norm() / (1.0 + lhs.norm());
        worst = worst.max(rel);
        ensure(rel <= 1e-10, || format!("spec {i}: relative deviation {rel:e}"))?;
        count += 1;
    }
    ensure(count > 0, || "no square specs in corpus".into())?;
    Ok(format!("{count} square specs, max scaled deviation {worst:.2e}"))
}

fn riesz_corpus(seed: u64) -> Vec<framemul::MultiplierSpec> {
    let mut rng = seeded_rng(seed);
    (0..300)
        .map(|_| {
            let n = rng.random_range(1..=10);
            random_riesz_spec(&mut rng, n).expect("valid parameters")
        })
        .collect()
}

fn riesz_two_sided(corpus: &[framemul::MultiplierSpec]) -> Outcome {
    for (i, spec) in corpus.iter().enumerate() {
        let a = spec.analysis().classify().map_err(|e| e.to_string())?;
        let s = spec.synthesis().classify().map_err(|e| e.to_string())?;
        let sup = spec.symbol().norm_inf();
        let lower = (a.lower_bound_opt.unwrap() * s.lower_bound_opt.unwrap()).sqrt() * sup;
        let upper = (a.bessel_bound_opt * s.bessel_bound_opt).sqrt() * sup;
        let op = spec.build().and_then(|m| m.norm_op()).map_err(|e| e.to_string())?;
        ensure(op >= lower * (1.0 - 1e-9), || format!("pair {i}: ‖M‖={op} below {lower}"))?;
        ensure(op <= upper * (1.0 + 1e-9), || format!("pair {i}: ‖M‖={op} above {upper}"))?;
    }
    Ok(format!("{} Riesz-basis pairs, both sides", corpus.len()))
}

fn riesz_inversion(corpus: &[framemul::MultiplierSpec]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, spec) in corpus.iter().enumerate() {
        let m = spec.build().map_err(|e| e.to_string())?;
        let inv = invert_riesz(spec).and_then(|s| s.build()).map_err(|e| e.to_string())?;
        let id = LinOperator::identity(m.rows());
        for prod in [m.matmul(&inv), inv.matmul(&m)] {
            let dev = prod
                .and_then(|p| p.checked_sub(&id))
                .and_then(|d| d.norm_op())
                .map_err(|e| e.to_string())?;
            worst = worst.max(dev);
            ensure(dev <= 1e-8, || format!("spec {i}: ‖MM⁻¹ − I‖ = {dev:e}"))?;
        }
    }
    Ok(format!("{} specs, max identity deviation {worst:.2e}", corpus.len()))
}

fn symbol_recovery(corpus: &[framemul::MultiplierSpec]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, spec) in corpus.iter().enumerate() {
        let m = spec.build().map_err(|e| e.to_string())?;
        let back = recover_symbol(&m, spec.analysis(), spec.synthesis()).map_err(|e| e.to_string())?;
        let dev = back.checked_sub(spec.symbol()).map_err(|e| e.to_string())?.norm_inf();
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("spec {i}: recovery error {dev:e}"))?;
    }
    Ok(format!("{} specs, max entry error {worst:.2e}", corpus.len()))
}

fn calculus_classification() -> Outcome {
    let mut rng = seeded_rng(7);
    for i in 0..100 {
        let n = rng.random_range(1..=8);
        let fam = riesz_from_matrix(&mut rng, n, if n == 1 { 1.0 } else { 6.0 }).map_err(|e| e.to_string())?;
        let dual = fam.canonical_dual().map_err(|e| e.to_string())?;
        let v = symbolic_calculus_test(&fam, &dual, 1e-9).map_err(|e| e.to_string())?;
        ensure(v == CalculusVerdict::Biorthogonal, || format!("pair {i}: {v:?}"))?;
    }
    let fixture = VectorFamily::from_real(2, &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
    let v = symbolic_calculus_test(&fixture, &fixture, 1e-10).map_err(|e| e.to_string())?;
    match v {
        CalculusVerdict::Violation { k, l, .. } if fixture.member(k) == fixture.member(l) && k != l => {
            Ok(format!("100 basis/dual pairs biorthogonal; duplicate fixture violates at ({k}, {l})"))
        }
        other => Err(format!("fixture verdict {other:?}")),
    }
}

fn harmonic_counterexample() -> Outcome {
    let limit = std::f64::consts::PI.powi(2) / 6.0;
    let mut last_gap = f64::INFINITY;
    let mut parts = Vec::new();
    for p in [2usize, 10, 100] {
        let r = harmonic_family(3, p).and_then(|f| f.classify()).map_err(|e| e.to_string())?;
        let partial: f64 = (1..=p).map(|q| 1.0 / (q * q) as f64).sum();
        let a = r.lower_bound_opt.unwrap_or(0.0);
        ensure((a - partial).abs() <= 1e-12 && (r.bessel_bound_opt - partial).abs() <= 1e-12, || {
            format!("P={p}: bounds [{a}, {}] vs {partial}", r.bessel_bound_opt)
        })?;
        let gap = limit - partial;
        ensure(gap > 0.0 && gap < last_gap, || format!("P={p}: no progress toward π²/6"))?;
        last_gap = gap;

        let spec = unbounded_symbol_fixture(3, p).map_err(|e| e.to_string())?;
        let op = spec.build().and_then(|m| m.norm_op()).map_err(|e| e.to_string())?;
        let sup = spec.symbol().norm_inf();
        ensure((op - p as f64).abs() <= 1e-9 * p as f64 && sup == (p * p) as f64, || {
            format!("P={p}: ‖M‖={op}, ‖m‖∞={sup}")
        })?;
        parts.push(format!("P={p}: B={partial:.6}"));
    }
    Ok(format!("{}; gap to π²/6 {last_gap:.2e}", parts.join(", ")))
}

fn perturbation_envelope() -> Outcome {
    let mut rng = seeded_rng(9);
    let tol = Tolerances::default();
    let mut unclaimed = 0;
    let mut held_anyway = 0;
    let mut min_gap: f64 = f64::INFINITY;
    for i in 0..200 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(n..=2 * n);
        let f = random_frame_family(&mut rng, n, k).map_err(|e| e.to_string())?;
        let a = f.classify().map_err(|e| e.to_string())?.lower_bound_opt.unwrap();
        // μ ≤ d_l2, so d_l2 < √A makes the prediction applicable.
        let eps = rng.random_range(0.05..0.95) * a.sqrt().min(1.0);
        let g = random_perturbation(&mut rng, &f, eps, ContinuityMode::FamilyL2).map_err(|e| e.to_string())?;
        let check = predict_bounds(&f, &g, &tol).map_err(|e| e.to_string())?;
        ensure(check.prediction.applicable, || format!("pair {i}: μ={} not below √A", check.prediction.mu))?;
        ensure(check.holds(), || format!("pair {i}: {check:?}"))?;
        min_gap = min_gap.min(check.perturbed_bounds[0] - check.prediction.predicted_lower);
        let drift = operator_drift(&f, &g, &tol).map_err(|e| e.to_string())?;
        ensure(drift.d_c <= eps * (1.0 + 1e-9) && drift.d_d <= eps * (1.0 + 1e-9), || {
            format!("pair {i}: dC={} dD={} ε={eps}", drift.d_c, drift.d_d)
        })?;
        if drift.bound_claimed {
            ensure(drift.holds(), || format!("pair {i}: dS={} > {}", drift.d_s, drift.d_s_bound))?;
        } else {
            unclaimed += 1;
            held_anyway += usize::from(drift.d_s <= drift.d_s_bound);
        }
    }
    Ok(format!(
        "200 pairs inside envelope (min lower slack {min_gap:.2e}); S-drift premise failed on {unclaimed}, \
         bound held there anyway on {held_anyway}"
    ))
}

fn continuity_tables() -> Outcome {
    let mut rng = seeded_rng(10);
    let specs = [random_spec(&mut rng, 4, 4, 8), random_spec(&mut rng, 3, 5, 6), random_spec(&mut rng, 6, 2, 10)];
    let mut min_margin: f64 = f64::INFINITY;
    let mut min_ratio: f64 = f64::INFINITY;
    for (si, spec) in specs.iter().enumerate() {
        for mode in ContinuityMode::ALL {
            let cfg = ContinuityConfig { seed: si as u64, ..ContinuityConfig::new(mode) };
            let t = continuity_experiment(spec, &cfg).map_err(|e| e.to_string())?;
            ensure(t.rows.len() == 8, || format!("{mode}: {} rows", t.rows.len()))?;
            for r in &t.rows {
                min_margin = min_margin.min(r.margin);
                ensure(r.margin >= 0.0, || format!("spec {si} {mode} row {}: margin {:e}", r.l, r.margin))?;
            }
            if mode.is_symbol_mode() {
                for q in t.decay_ratios() {
                    min_ratio = min_ratio.min(q);
                    ensure(q >= 1.8, || format!("spec {si} {mode}: decay ratio {q}"))?;
                }
            } else {
                let env = &t.bound_drift_envelope;
                ensure(env.windows(2).all(|w| w[0] >= w[1]) && env[7] < env[0], || {
                    format!("spec {si} {mode}: bound drift envelope {env:?}")
                })?;
            }
        }
    }
    Ok(format!("3 specs x 7 modes x 8 steps, min margin {min_margin:.3e}, min symbol decay {min_ratio:.4}"))
}

fn hs_bessel() -> Outcome {
    let mut rng = seeded_rng(12);
    let mut worst: f64 = f64::INFINITY;
    for i in 0..50 {
        let (n1, n2) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let (k1, k2) = (rng.random_range(1..=10), rng.random_range(1..=10));
        let psi = random_family(&mut rng, n1, k1);
        let phi = random_family(&mut rng, n2, k2);
        let c = hs_bessel_certificate(&psi, &phi, 100, 1000 + i, &Tolerances::default()).map_err(|e| e.to_string())?;
        worst = worst.min(c.claimed - c.measured);
        ensure(c.measured <= c.claimed + 1e-9, || format!("pair {i}: {c:?}"))?;
    }
    Ok(format!("50 pairs x 100 operators, min slack {worst:.3e}"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_framemul");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 8] = [
        &["gen", "--kind", "random_frame", "--dim", "5", "--k", "9"],
        &["mult-certify", "--random", "--dim", "6", "--k", "11"],
        &["mult-trace", "--random"],
        &["mult-compose", "--random"],
        &["mult-invert", "--random", "--dim", "5"],
        &["perturb-predict", "--random"],
        &["perturb-converge", "--random"],
        &["hs-bessel", "--random"],
    ];
    for cmd in commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{}-{run}.json", cmd[0]));
            let status = Command::new(bin)
                .args(cmd)
                .args(["--seed", "42", "--format", "json", "--out"])
                .arg(&path)
                .env_remove("FRAMEMUL_TOL")
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{cmd:?} exited with {status}"))?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{cmd:?}: reports differ"))?;
    }
    Ok(format!("{} commands re-run with seed 42, byte-identical", commands.len()))
}

fn main() {
    let start = Instant::now();
    let corpus = spec_corpus();
    let riesz = riesz_corpus(4);
    let checks: Vec<Check> = vec![
        ("diagonal_operator_exactness", Box::new(diagonal_exactness)),
        ("multiplier_norm_certificates", Box::new(|| norm_certificates(&corpus))),
        ("trace_formula", Box::new(|| trace_formula(&corpus))),
        ("riesz_two_sided_bound", Box::new(|| riesz_two_sided(&riesz))),
        ("riesz_inversion", Box::new(|| riesz_inversion(&riesz))),
        ("symbol_recovery", Box::new(|| symbol_recovery(&riesz))),
        ("symbolic_calculus_classification", Box::new(calculus_classification)),
        ("harmonic_counterexample", Box::new(harmonic_counterexample)),
        ("perturbation_envelope", Box::new(perturbation_envelope)),
        ("continuity_tables", Box::new(continuity_tables)),
        ("hs_bessel_certificate", Box::new(hs_bessel)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        match check() {
            Ok(msg) => println!("PASS {name}: {msg} ({:.2}s)", t.elapsed().as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg} ({:.2}s)", t.elapsed().as_secs_f64());
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        checks.len() - failures,
        checks.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
