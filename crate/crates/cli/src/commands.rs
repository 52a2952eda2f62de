use std::path::Path;

use passivity_core::convexity::{verify_preservation_certified, IsometryFamily};
use passivity_core::families::{
    cayley_function, bilinear_substitute, domain_for, lossless_boundary_oracle, make_grid,
    membership_oracle, LosslessKind, MembershipReport,
};
use passivity_core::fixtures::{fixture, FixtureId};
use passivity_core::io::{self, CertificateDocument, GridSummary, Metadata, RealizationDocument, ReportDocument};
use passivity_core::linalg::{self, c, eye, CMat, Complex64};
use passivity_core::qmi::{
    self, build_w, build_w_balanced, check_lossless, solve_p, verify_kyp, Certificate, Family,
    FamilyTag, SolveOptions,
};
use passivity_core::Realization;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::{CheckArgs, Cli, CombineArgs, Command, EvalArgs, FixturesArgs, Global, Op, TransformArgs, WmatArgs};

/// Slack between the PSD tolerance and the norm bound used for losslessness.
const LOSSLESS_SLACK: f64 = 1e3;
/// Bound on ‖Q‖₂ reported as lossless by `combine`.
const COMBINE_LOSSLESS_TOL: f64 = 1e-8;

type Outcome = std::result::Result<(), String>;

/// Per-run state: the report being filled and a digest over every file read.
struct Ctx<'a> {
    global: &'a Global,
    report: ReportDocument,
    digest: Sha256,
    read_any: bool,
}

impl Ctx<'_> {
    fn read(&mut self, path: &Path) -> std::result::Result<String, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.digest.update((text.len() as u64).to_le_bytes());
        self.digest.update(text.as_bytes());
        self.read_any = true;
        Ok(text)
    }

    fn realization(&mut self, path: &Path) -> std::result::Result<Realization, String> {
        let text = self.read(path)?;
        io::realization_from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn matrix(&mut self, path: &Path) -> std::result::Result<CMat, String> {
        let text = self.read(path)?;
        io::matrix_from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn detail(&mut self, key: &str, v: Value) {
        self.report.details.insert(key.to_string(), v);
    }

    fn finish(&mut self, verdict: &str, code: i32) {
        self.report.verdict = verdict.to_string();
        self.report.exit_code = code;
    }

    /// Writes the realization to `out`, or embeds it in the report.
    fn emit(&mut self, r: &Realization, meta: Option<Metadata>, out: Option<&Path>) -> Outcome {
        match out {
            Some(p) => {
                io::save(p, r, meta).map_err(|e| e.to_string())?;
                self.detail("output", json!(p.display().to_string()));
            }
            None => {
                let doc = RealizationDocument::from_realization(r, meta);
                self.detail("realization", serde_json::to_value(doc).expect("documents serialize"));
            }
        }
        Ok(())
    }
}

pub fn run(cli: &Cli, argv: Vec<String>) -> ReportDocument {
    let mut ctx = Ctx {
        global: &cli.global,
        report: ReportDocument::new(argv),
        digest: Sha256::new(),
        read_any: false,
    };
    let outcome = match &cli.command {
        Command::Check(a) => check(&mut ctx, a),
        Command::Transform(a) => transform(&mut ctx, a),
        Command::Combine(a) => combine(&mut ctx, a),
        Command::Eval(a) => eval(&mut ctx, a),
        Command::Wmat(a) => wmat(&mut ctx, a),
        Command::Fixtures(a) => fixtures(&mut ctx, a),
    };
    if let Err(msg) = outcome {
        eprintln!("error: {msg}");
        ctx.report.notes.push(msg);
        ctx.finish("error", 1);
    }
    if ctx.read_any {
        let d = ctx.digest.clone().finalize();
        ctx.report.inputs_digest = Some(d.iter().map(|b| format!("{b:02x}")).collect());
    }
    if !cli.global.deterministic {
        ctx.report.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    ctx.report
}

fn tag_from(family: &str, eta: Option<f64>) -> std::result::Result<FamilyTag, String> {
    let f: Family = family.parse().map_err(|e: passivity_core::Error| e.to_string())?;
    FamilyTag::new(f, eta).map_err(|e| e.to_string())
}

fn z_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cert_details(ctx: &mut Ctx, cert: &Certificate) {
    ctx.report.certificate = Some(CertificateDocument::from(cert));
}

/// Certificate from a given P or from the search; records how it was obtained.
fn certificate(
    ctx: &mut Ctx,
    r: &Realization,
    tag: FamilyTag,
    p_file: Option<&Path>,
    max_iter: usize,
) -> std::result::Result<Certificate, String> {
    let tol = ctx.global.tol_psd;
    if let Some(path) = p_file {
        let p = ctx.matrix(path)?;
        ctx.detail("p_source", json!("file"));
        return verify_kyp(r, &p, tag, tol).map_err(|e| e.to_string());
    }
    let opts = SolveOptions { max_iter, tol_psd: tol, ..SolveOptions::default() };
    let out = solve_p(r, tag, &opts).map_err(|e| e.to_string())?;
    ctx.detail(
        "solver",
        json!({ "found": out.is_found(), "iterations": out.iterations() }),
    );
    ctx.detail("p_source", json!("solve"));
    Ok(out.certificate().clone())
}

fn witness(ctx: &mut Ctx, rep: &MembershipReport) {
    if let Some(z) = rep.worst_point {
        ctx.detail(
            "witness",
            json!({ "z": z_json(z), "norm": rep.worst_norm, "margin": rep.worst_margin }),
        );
        ctx.report.notes.push(format!(
            "witness z = {}{:+}i: margin {:.6e}, |F(z)|_2 = {:.6}",
            z.re, z.im, rep.worst_margin, rep.worst_norm
        ));
    }
}

fn check(ctx: &mut Ctx, a: &CheckArgs) -> Outcome {
    let r = ctx.realization(&a.file)?;
    let tag = tag_from(&a.family, a.eta)?;
    let family = tag.family;
    if a.lossless && family.is_discrete() {
        return Err("--lossless applies to p and b only".into());
    }
    if a.grid == 0 {
        return Err("--grid must be positive".into());
    }
    ctx.report.family = Some(tag);
    ctx.report.seed = Some(ctx.global.seed);

    let cert = certificate(ctx, &r, tag, a.p_matrix.as_deref(), a.max_iter)?;
    cert_details(ctx, &cert);

    let grid = make_grid(domain_for(family), a.grid, a.grid, ctx.global.seed);
    ctx.report.grid = Some(GridSummary::from(&grid));
    let tol = ctx.global.tol_oracle;
    let member = membership_oracle(&r, tag, &grid, tol).map_err(|e| e.to_string())?;
    ctx.report.margins.push(member.clone());
    let lossless = if a.lossless {
        let kind = if family == Family::Alpha { LosslessKind::Positive } else { LosslessKind::Bounded };
        let rep = lossless_boundary_oracle(&r, kind, &grid, tol).map_err(|e| e.to_string())?;
        ctx.report.margins.push(rep.clone());
        Some(rep)
    } else {
        None
    };

    let verified = cert.is_verified();
    if verified && !member.passed() {
        // The certificate proves membership; a sampled violation means a numerical fault.
        witness(ctx, &member);
        ctx.report.notes.push("certificate verified but the oracle found a violation".into());
        ctx.finish("disagreement", 1);
        return Ok(());
    }
    if !member.passed() {
        witness(ctx, &member);
        ctx.finish("refuted", 2);
        return Ok(());
    }
    if let Some(rep) = &lossless {
        if !rep.passed() {
            witness(ctx, rep);
            ctx.finish("refuted", 2);
            return Ok(());
        }
    }
    if !verified {
        ctx.finish("inconclusive", 3);
        return Ok(());
    }
    if a.lossless {
        let tol_q = LOSSLESS_SLACK * cert.tol_psd;
        let ok = check_lossless(&r, &cert.p, family, tol_q).map_err(|e| e.to_string())?;
        ctx.detail("lossless_q_norm", json!(linalg::spectral_norm(&cert.q)));
        if !ok {
            ctx.report.notes.push("boundary is lossless on the grid but Q(P) is not zero".into());
            ctx.finish("inconclusive", 3);
            return Ok(());
        }
    }
    ctx.finish("pass", 0);
    Ok(())
}

fn transform(ctx: &mut Ctx, a: &TransformArgs) -> Outcome {
    let r = ctx.realization(&a.file)?;
    let out = match a.op {
        Op::CayleyFn => cayley_function(&r),
        Op::Bilinear => bilinear_substitute(&r),
        Op::InvertArray => r.invert_array(),
        Op::InvertFn => r.invert_function(),
        Op::Coords => {
            let path = a.t_matrix.as_deref().ok_or("coords needs --t-matrix")?;
            let t = ctx.matrix(path)?;
            r.change_coordinates(&t)
        }
        Op::Balance => {
            let family = a.family.as_deref().ok_or("balance needs --family")?;
            let tag = tag_from(family, a.eta)?;
            ctx.report.family = Some(tag);
            let cert = certificate(ctx, &r, tag, a.p_matrix.as_deref(), SolveOptions::default().max_iter)?;
            if !cert.is_verified() {
                cert_details(ctx, &cert);
                return Err(format!("no verified certificate (min eig Q = {:e})", cert.min_eig_q));
            }
            let (rb, cb) = qmi::balance(&r, &cert).map_err(|e| e.to_string())?;
            cert_details(ctx, &cb);
            Ok(rb)
        }
    }
    .map_err(|e| e.to_string())?;
    ctx.detail("n", json!(out.n()));
    ctx.detail("m", json!(out.m()));
    ctx.emit(&out, None, a.output.as_deref())?;
    ctx.finish("ok", 0);
    Ok(())
}

fn isometries_from(ctx: &mut Ctx, path: &Path) -> std::result::Result<IsometryFamily, String> {
    let text = ctx.read(path)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let blocks = |key: &str| -> std::result::Result<Vec<CMat>, String> {
        doc.get(key)
            .and_then(Value::as_array)
            .ok_or(format!("{}: missing array '{key}'", path.display()))?
            .iter()
            .map(|v| io::matrix_from_str(&v.to_string()).map_err(|e| e.to_string()))
            .collect()
    };
    IsometryFamily::new(blocks("state")?, blocks("io")?).map_err(|e| e.to_string())
}

fn combine(ctx: &mut Ctx, a: &CombineArgs) -> Outcome {
    let tag = tag_from(&a.family, a.eta)?;
    ctx.report.family = Some(tag);
    let rs = a
        .inputs
        .iter()
        .map(|p| ctx.realization(p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let (n, m) = (rs[0].n(), rs[0].m());
    let fam = match (a.random, &a.isometries) {
        (Some(k), _) => {
            if k != rs.len() {
                return Err(format!("--random {k} needs {k} inputs, got {}", rs.len()));
            }
            ctx.report.seed = Some(ctx.global.seed);
            IsometryFamily::random(n, m, k, &mut ChaCha8Rng::seed_from_u64(ctx.global.seed))
        }
        (None, Some(path)) => isometries_from(ctx, path)?,
        (None, None) => return Err("need --isometries or --random".into()),
    };

    // Inputs certified at P = I are used as they are; others go through the search.
    let mut inputs = Vec::with_capacity(rs.len());
    let mut per_input = Vec::new();
    for (j, r) in rs.into_iter().enumerate() {
        let mut cert = verify_kyp(&r, &eye(r.n()), tag, ctx.global.tol_psd).map_err(|e| e.to_string())?;
        if !cert.is_verified() {
            let opts = SolveOptions { tol_psd: ctx.global.tol_psd, ..SolveOptions::default() };
            cert = solve_p(&r, tag, &opts).map_err(|e| e.to_string())?.certificate().clone();
        }
        if !cert.is_verified() {
            return Err(format!("input {j} has no verified certificate (min eig Q = {:e})", cert.min_eig_q));
        }
        per_input.push(json!({ "min_eig_q": cert.min_eig_q, "min_eig_p": cert.min_eig_p }));
        inputs.push((r, cert));
    }
    ctx.detail("inputs", Value::Array(per_input));

    let pres = verify_preservation_certified(&inputs, &fam).map_err(|e| e.to_string())?;
    let cert = &pres.certificate;
    cert_details(ctx, cert);
    let norm_q = linalg::spectral_norm(&cert.q);
    ctx.detail("norm_q", json!(norm_q));
    ctx.detail("min_eig_q", json!(cert.min_eig_q));
    if !tag.family.is_discrete() {
        let lossless = check_lossless(&pres.combined, &eye(pres.combined.n()), tag.family, COMBINE_LOSSLESS_TOL)
            .map_err(|e| e.to_string())?;
        ctx.detail("lossless", json!(lossless));
    }
    ctx.emit(&pres.combined, None, a.output.as_deref())?;
    if cert.is_verified() {
        ctx.finish("pass", 0);
    } else {
        ctx.report.notes.push("combined realization is not certified at P = I".into());
        ctx.finish("inconclusive", 3);
    }
    Ok(())
}

fn parse_point(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad point '{s}': {e}"));
    match parts.as_slice() {
        [re] => Ok(c(num(re)?, 0.0)),
        [re, im] => Ok(c(num(re)?, num(im)?)),
        _ => Err(format!("bad point '{s}', expected \"re,im\"")),
    }
}

fn eval(ctx: &mut Ctx, a: &EvalArgs) -> Outcome {
    let z = parse_point(&a.at)?;
    let r = ctx.realization(&a.file)?;
    let sample = r.evaluate(z).map_err(|e| e.to_string())?;
    ctx.detail("z", z_json(z));
    ctx.detail("value", io::matrix_to_json(&sample.value));
    ctx.detail("norm", json!(linalg::spectral_norm(&sample.value)));
    ctx.finish("ok", 0);
    Ok(())
}

fn wmat(ctx: &mut Ctx, a: &WmatArgs) -> Outcome {
    let tag = tag_from(&a.family, a.eta)?;
    ctx.report.family = Some(tag);
    let w = match &a.p_matrix {
        Some(path) => {
            let p = ctx.matrix(path)?;
            if p.nrows() != a.n {
                return Err(format!("P is {}x{}, but --n is {}", p.nrows(), p.ncols(), a.n));
            }
            build_w(tag, &p, a.m)
        }
        None => build_w_balanced(tag, a.n, a.m),
    }
    .map_err(|e| e.to_string())?;
    ctx.detail("W", io::matrix_to_json(&w.entries));
    ctx.finish("ok", 0);
    Ok(())
}

fn fixtures(ctx: &mut Ctx, a: &FixturesArgs) -> Outcome {
    let id = FixtureId::parse(&a.name, a.a, a.b).map_err(|e| e.to_string())?;
    let r = fixture(id).map_err(|e| e.to_string())?;
    let meta = Metadata {
        name: Some(id.name().to_string()),
        params: id.params().map(|(a, b)| json!({ "a": a, "b": b })),
    };
    ctx.emit(&r, Some(meta), a.output.as_deref())?;
    ctx.finish("ok", 0);
    Ok(())
}
