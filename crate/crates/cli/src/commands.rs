use std::fs;
use std::path::Path;

use framemul::generators::{
    generate, random_family, random_frame_family, random_riesz_spec, random_spec, seeded_rng, ChaCha8Rng, FamilyKind,
    GenSpec,
};
use framemul::multiplier::{
    compose_checked, hs_bessel_certificate, invert_riesz, recover_symbol, symbolic_calculus_test,
};
use framemul::perturbation::{
    continuity_experiment, operator_drift, predict_bounds, random_perturbation, similarity, ContinuityConfig,
    ContinuityMode,
};
use framemul::{BoundCertificate, LinOperator, MultiplierSpec, Symbol, Tolerances, VectorFamily};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    Command, ComposeArgs, ConvergeArgs, FamilyArgs, GenArgs, HsArgs, KindArg, PredictArgs, RecoverArgs, SpecArgs,
};
use crate::error::CliError;
use crate::report::{Output, Report};

pub struct Context {
    pub seed: u64,
    pub tol: Tolerances,
}

impl Context {
    fn rng(&self) -> ChaCha8Rng {
        seeded_rng(self.seed)
    }

    fn report(&self, command: &str, certificates: Vec<BoundCertificate>, tables: Vec<Value>, details: Value) -> Output {
        Output::Report(Report {
            command: command.to_string(),
            seed: self.seed,
            tolerances: self.tol,
            certificates,
            tables,
            details,
        })
    }
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn load_spec(args: &SpecArgs, rng: &mut ChaCha8Rng, riesz: bool) -> Result<MultiplierSpec, CliError> {
    if let Some(p) = &args.spec {
        return read_json(p);
    }
    match (&args.analysis, &args.synthesis, &args.symbol) {
        (Some(a), Some(s), Some(m)) => {
            let analysis: VectorFamily = read_json(a)?;
            let synthesis: VectorFamily = read_json(s)?;
            let symbol: Symbol = read_json(m)?;
            Ok(MultiplierSpec::new(symbol, analysis, synthesis)?)
        }
        (None, None, None) if args.random => {
            if riesz {
                Ok(random_riesz_spec(rng, args.dim)?)
            } else {
                positive("k", args.k)?;
                positive("dim", args.dim)?;
                Ok(random_spec(rng, args.dim, args.synthesis_dim.unwrap_or(args.dim), args.k))
            }
        }
        (None, None, None) => Err(CliError::Usage(
            "a multiplier needs --spec, all of --analysis/--synthesis/--symbol, or --random".into(),
        )),
        _ => Err(CliError::Usage("--analysis, --synthesis and --symbol must be given together".into())),
    }
}

fn positive(name: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        Err(CliError::Usage(format!("--{name} must be positive")))
    } else {
        Ok(())
    }
}

fn family_pair(
    first: &Option<std::path::PathBuf>,
    second: &Option<std::path::PathBuf>,
    random: bool,
    what: &str,
) -> Result<Option<(VectorFamily, VectorFamily)>, CliError> {
    match (first, second) {
        (Some(a), Some(b)) => Ok(Some((read_json(a)?, read_json(b)?))),
        (None, None) if random => Ok(None),
        _ => Err(CliError::Usage(format!("{what} needs two family files or --random"))),
    }
}

pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Gen(_) => "gen",
        Command::Analyze(_) => "analyze",
        Command::Dual(_) => "dual",
        Command::MultBuild(_) => "mult-build",
        Command::MultCertify(_) => "mult-certify",
        Command::MultTrace(_) => "mult-trace",
        Command::MultCompose(_) => "mult-compose",
        Command::MultInvert(_) => "mult-invert",
        Command::MultRecover(_) => "mult-recover",
        Command::PerturbPredict(_) => "perturb-predict",
        Command::PerturbConverge(_) => "perturb-converge",
        Command::HsBessel(_) => "hs-bessel",
    }
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<Output, CliError> {
    let name = command_name(cmd);
    match cmd {
        Command::Gen(a) => gen(a, ctx),
        Command::Analyze(a) => analyze(a, ctx, name),
        Command::Dual(a) => dual(a, ctx, name),
        Command::MultBuild(a) => mult_build(a, ctx, name),
        Command::MultCertify(a) => mult_certify(a, ctx, name),
        Command::MultTrace(a) => mult_trace(a, ctx, name),
        Command::MultCompose(a) => mult_compose(a, ctx, name),
        Command::MultInvert(a) => mult_invert(a, ctx, name),
        Command::MultRecover(a) => mult_recover(a, ctx, name),
        Command::PerturbPredict(a) => perturb_predict(a, ctx, name),
        Command::PerturbConverge(a) => perturb_converge(a, ctx, name),
        Command::HsBessel(a) => hs_bessel(a, ctx, name),
    }
}

fn gen(a: &GenArgs, ctx: &Context) -> Result<Output, CliError> {
    let spec = match (&a.genspec, a.kind) {
        (Some(p), _) => read_json::<GenSpec>(p)?,
        (None, Some(kind)) => {
            let need_k = |kind: &str| {
                a.k.ok_or_else(|| CliError::Usage(format!("--k is required for {kind}")))
            };
            let kind = match kind {
                KindArg::Onb => FamilyKind::Onb,
                KindArg::RandomBessel => FamilyKind::RandomBessel { k: need_k("random_bessel")? },
                KindArg::RandomFrame => FamilyKind::RandomFrame { k: need_k("random_frame")? },
                KindArg::RieszFromMatrix => FamilyKind::RieszFromMatrix { condition: a.condition },
                KindArg::GaborRegular => FamilyKind::GaborRegular { a: a.a, b: a.b },
                KindArg::GaborIrregular => FamilyKind::GaborIrregular {
                    a: a.a,
                    b: a.b,
                    k: need_k("gabor_irregular")?,
                },
                KindArg::HarmonicCounterexample => FamilyKind::HarmonicCounterexample { p: a.p },
            };
            GenSpec::new(a.dim, ctx.seed, kind)
        }
        (None, None) => return Err(CliError::Usage("gen needs --kind or --genspec".into())),
    };
    Ok(Output::Artifact(value(&generate(&spec)?)))
}

fn analyze(a: &FamilyArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let fam: VectorFamily = read_json(&a.family)?;
    let r = fam.classify()?;
    let mut details = json!({ "dim": fam.dim(), "len": fam.len() });
    details["classification"] = value(&r);
    Ok(ctx.report(name, Vec::new(), Vec::new(), details))
}

fn dual(a: &FamilyArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let fam: VectorFamily = read_json(&a.family)?;
    let r = fam.classify()?;
    let (kind, dual, check, scale) = if r.is_frame {
        let d = fam.canonical_dual()?;
        // Σ ⟨f, ψ̃_k⟩ ψ_k = f
        let recon = fam.synthesis_matrix().matmul(&d.analysis_matrix())?;
        let cond = r.bessel_bound_opt / r.lower_bound_opt.unwrap_or(f64::MIN_POSITIVE);
        let dev = recon.checked_sub(&LinOperator::identity(fam.dim()))?.norm_op()?;
        ("canonical", d, ("reconstruction", dev), cond)
    } else if r.is_riesz_sequence {
        let d = fam.riesz_dual()?;
        // ⟨ψ_k, ψ̃_j⟩ = δ_jk
        let gram = d.analysis_matrix().matmul(&fam.synthesis_matrix())?;
        let [lo, hi] = r.riesz_bounds.unwrap_or([f64::MIN_POSITIVE, 1.0]);
        let dev = gram.checked_sub(&LinOperator::identity(fam.len()))?.norm_op()?;
        ("riesz_sequence", d, ("biorthogonality", dev), hi / lo)
    } else {
        return Err(framemul::Error::NotAFrame {
            lower: r.lower_bound_opt.unwrap_or(0.0),
            upper: r.bessel_bound_opt,
        }
        .into());
    };
    let cert = BoundCertificate::new(check.0, 0.0, check.1, ctx.tol.allowed(scale));
    let details = json!({ "kind": kind, "classification": value(&r), "dual": value(&dual) });
    Ok(ctx.report(name, vec![cert], Vec::new(), details))
}

fn operator_details(o: &LinOperator) -> Result<Value, CliError> {
    Ok(json!({
        "shape": [o.rows(), o.cols()],
        "norms": value(&o.norms()?),
        "operator": value(o),
    }))
}

fn mult_build(a: &SpecArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let spec = load_spec(a, &mut ctx.rng(), false)?;
    let (m, agreement) = spec.build_checked()?;
    let certs = vec![agreement.certificate("factorization_agreement")];
    Ok(ctx.report(name, certs, Vec::new(), operator_details(&m)?))
}

fn mult_certify(a: &SpecArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let spec = load_spec(a, &mut ctx.rng(), false)?;
    let certs = spec.certify_bounds(&ctx.tol)?;
    let m = spec.symbol();
    let details = json!({
        "shape": [spec.synthesis().dim(), spec.analysis().dim()],
        "len": spec.len(),
        "bessel_bounds": [spec.analysis().bessel_bound()?, spec.synthesis().bessel_bound()?],
        "symbol_norms": { "inf": m.norm_inf(), "l2": m.norm_2(), "l1": m.norm_1() },
    });
    Ok(ctx.report(name, certs, Vec::new(), details))
}

fn mult_trace(a: &SpecArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let spec = load_spec(a, &mut ctx.rng(), false)?;
    let (lhs, rhs) = spec.trace_formula()?;
    let cert = BoundCertificate::new("trace_formula", 0.0, (lhs - rhs).norm(), ctx.tol.allowed(1.0 + lhs.norm()));
    let details = json!({ "trace": [lhs.re, lhs.im], "symbol_sum": [rhs.re, rhs.im] });
    Ok(ctx.report(name, vec![cert], Vec::new(), details))
}

fn mult_compose(a: &ComposeArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let (outer, inner): (MultiplierSpec, MultiplierSpec) = match (&a.outer, &a.inner) {
        (Some(o), Some(i)) => (read_json(o)?, read_json(i)?),
        (None, None) if a.random => {
            positive("k", a.k)?;
            positive("dim", a.dim)?;
            let mut rng = ctx.rng();
            let inner = random_spec(&mut rng, a.dim, a.dim, a.k);
            let outer = random_spec(&mut rng, a.dim, a.dim, a.k);
            (outer, inner)
        }
        _ => return Err(CliError::Usage("mult-compose needs --outer and --inner, or --random".into())),
    };
    let (m, agreement) = compose_checked(&outer, &inner)?;
    let mut details = operator_details(&m)?;
    // Composition multiplies symbols iff ⟨ζ_l, ψ_k⟩ = δ_kl (inner synthesis, outer analysis).
    details["symbolic_calculus"] = match symbolic_calculus_test(inner.synthesis(), outer.analysis(), 1e-10) {
        Ok(v) => value(&v),
        Err(_) => Value::Null,
    };
    Ok(ctx.report(name, vec![agreement.certificate("composition_agreement")], Vec::new(), details))
}

fn inverse_certificate(name: &str, product: &LinOperator, scale: f64, tol: &Tolerances) -> Result<BoundCertificate, CliError> {
    let dev = product.checked_sub(&LinOperator::identity(product.rows()))?.norm_op()?;
    Ok(BoundCertificate::new(name, 0.0, dev, tol.allowed(scale)))
}

fn mult_invert(a: &SpecArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let spec = load_spec(a, &mut ctx.rng(), true)?;
    let inv_spec = invert_riesz(&spec)?;
    let m = spec.build()?;
    let inv = inv_spec.build()?;
    let cond = m.norm_op()? * inv.norm_op()?;
    let mut certs = vec![
        inverse_certificate("right_inverse", &m.matmul(&inv)?, cond, &ctx.tol)?,
        inverse_certificate("left_inverse", &inv.matmul(&m)?, cond, &ctx.tol)?,
    ];
    certs.extend(spec.riesz_norm_bounds(&ctx.tol)?);
    let details = json!({ "inverse": value(&inv_spec), "inverse_operator": value(&inv) });
    Ok(ctx.report(name, certs, Vec::new(), details))
}

fn mult_recover(a: &RecoverArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let (m, analysis, synthesis, known) = match &a.operator {
        Some(op_path) => {
            let (Some(ap), Some(sp)) = (&a.spec.analysis, &a.spec.synthesis) else {
                return Err(CliError::Usage("--operator needs --analysis and --synthesis".into()));
            };
            let m: LinOperator = read_json(op_path)?;
            (m, read_json::<VectorFamily>(ap)?, read_json::<VectorFamily>(sp)?, None)
        }
        None => {
            let spec = load_spec(&a.spec, &mut ctx.rng(), true)?;
            let m = spec.build()?;
            (m, spec.analysis().clone(), spec.synthesis().clone(), Some(spec.symbol().clone()))
        }
    };
    let recovered = recover_symbol(&m, &analysis, &synthesis)?;
    let rebuilt = MultiplierSpec::new(recovered.clone(), analysis, synthesis)?.build()?;
    let scale = m.norm_op()?;
    let mut certs = vec![BoundCertificate::new(
        "rebuild",
        0.0,
        rebuilt.checked_sub(&m)?.norm_op()?,
        ctx.tol.allowed(scale),
    )];
    if let Some(sym) = known {
        let dev = sym.checked_sub(&recovered)?.norm_inf();
        certs.push(BoundCertificate::new("symbol_round_trip", 0.0, dev, ctx.tol.allowed(sym.norm_inf())));
    }
    Ok(ctx.report(name, certs, Vec::new(), json!({ "symbol": value(&recovered) })))
}

fn perturb_predict(a: &PredictArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let (f, g) = match family_pair(&a.original, &a.perturbed, a.random, "perturb-predict")? {
        Some(pair) => pair,
        None => {
            positive("dim", a.dim)?;
            let mut rng = ctx.rng();
            let f = random_frame_family(&mut rng, a.dim, a.k)?;
            let g = random_perturbation(&mut rng, &f, a.eps, ContinuityMode::FamilyL2)?;
            (f, g)
        }
    };
    let check = predict_bounds(&f, &g, &ctx.tol)?;
    let drift = operator_drift(&f, &g, &ctx.tol)?;
    let mut certs = check.certificates.clone();
    if let Some(inherited) = check.riesz_inherited {
        certs.push(BoundCertificate::new("riesz_inheritance", 0.0, if inherited { 0.0 } else { 1.0 }, 0.0));
    }
    certs.extend(drift.certificates.iter().cloned());
    let details = json!({
        "similarity": value(&similarity(&f, &g)?),
        "prediction": value(&check),
        "drift": value(&drift),
    });
    Ok(ctx.report(name, certs, Vec::new(), details))
}

fn perturb_converge(a: &ConvergeArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let spec = load_spec(&a.spec, &mut ctx.rng(), false)?;
    let modes: Vec<ContinuityMode> = match &a.mode {
        Some(m) => vec![m.parse()?],
        None => ContinuityMode::ALL.to_vec(),
    };
    let mut certs = Vec::new();
    let mut tables = Vec::new();
    let mut summary = Vec::new();
    for mode in modes {
        let cfg = ContinuityConfig {
            mode,
            steps: a.steps,
            eps0: a.eps0,
            seed: ctx.seed,
        };
        let t = continuity_experiment(&spec, &cfg)?;
        certs.extend(t.certificates(&ctx.tol));
        summary.push(json!({
            "mode": mode.as_str(),
            "norm": value(&t.norm),
            "min_margin": t.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
            "decay_ratios": t.decay_ratios().iter().map(|&q| if q.is_finite() { json!(q) } else { Value::Null }).collect::<Vec<_>>(),
        }));
        tables.push(value(&t));
    }
    Ok(ctx.report(name, certs, tables, json!({ "modes": summary })))
}

fn hs_bessel(a: &HsArgs, ctx: &Context, name: &str) -> Result<Output, CliError> {
    let (psi, phi) = match family_pair(&a.analysis, &a.synthesis, a.random, "hs-bessel")? {
        Some(pair) => pair,
        None => {
            positive("dim", a.dim)?;
            positive("k", a.k)?;
            let mut rng = ctx.rng();
            (random_family(&mut rng, a.dim, a.k), random_family(&mut rng, a.dim, a.k))
        }
    };
    let cert = hs_bessel_certificate(&psi, &phi, a.trials, ctx.seed, &ctx.tol)?;
    let details = json!({
        "bessel_bounds": [psi.bessel_bound()?, phi.bessel_bound()?],
        "trials": a.trials,
    });
    Ok(ctx.report(name, vec![cert], Vec::new(), details))
}
