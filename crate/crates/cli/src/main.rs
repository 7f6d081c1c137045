//! `hesslab` — run the simulation and verification pipelines and write
//! machine-readable reports.
//!
//! Exit status: 0 when every check passes, 1 when some check fails, 2 on
//! bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use hesslab::dynamics::{fmt_num, integrate, IntegratorConfig};
use hesslab::kowalevski::examples::{case1_6d, case8_5d, example1_4d, example2_4d, hess_appelrot_3d, ExampleReport};
use hesslab::kowalevski::{ara_check, field_from_spec, solve_balances, theorem5_filter, GermModel, Mask, SolveOptions};
use hesslab::lax::{build, isospectrality_report, lax_residual, spectral_coeffs};
use hesslab::poisson::{
    bp_check, lagrange_bihamiltonian, max_jacobi_defect, poisson_suite, random_points, restrictive_suite,
    schouten_defect, second_for, standard_casimirs, standard_for, ClaimReport,
};
use hesslab::models::chart_dim;
use hesslab::poly::Poly;
use hesslab::spectral::{
    curve_report, double_points, elliptic_reduction, generic_curve_state, quadrature_check, reduce, reduced_vector,
    reduction_crosscheck, state_from_reduced, CurveData,
};
use hesslab::spec_io::load_spec;
use hesslab::{sample, Error, Kind, PhaseState, SystemSpec};

#[derive(Parser)]
#[command(name = "hesslab", version, about = "Hess-Appel'rot systems: simulation and verification pipelines")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// System spec (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Seed for every random choice; HESSLAB_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Integrator tolerance (switches simulate to RKF45).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Directory for report files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lax,
    Poisson,
    Reduction,
    Spectral,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the Euler–Poisson equations and monitor integrals/relations.
    Simulate,
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Balances, Kowalevski exponents, (ArA), and the Theorem 5 filter.
    Kowalevski {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        example: Option<u8>,
        #[arg(long = "J13")]
        j13: Option<f64>,
        #[arg(long = "J24")]
        j24: Option<f64>,
        #[arg(long)]
        d2: Option<f64>,
        #[arg(long)]
        theorem5: bool,
        /// Perturbation b(z₁..z₆) for --theorem5.
        #[arg(long)]
        b: Option<String>,
    },
    /// Spectral curve report (genus, double points, C₁/C₂, E₁/E₂).
    Spectral,
    /// so(4) = so(3)×so(3) reduction, elliptic curves and quadratures.
    Reduce,
}

struct Ctx {
    spec_path: Option<PathBuf>,
    seed: u64,
    t_end: Option<f64>,
    dt: Option<f64>,
    tol: Option<f64>,
    format: Format,
}

/// A finished run: checks plus payload, rendered as JSON or CSV.
struct Report {
    command: String,
    checks: Vec<(String, bool, Value)>,
    data: Map<String, Value>,
    csv: Option<String>,
    /// Extra files (name, contents) written next to the report.
    extra: Vec<(String, String)>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { command: command.into(), checks: Vec::new(), data: Map::new(), csv: None, extra: Vec::new() }
    }

    fn check(&mut self, id: &str, pass: bool, detail: Value) {
        self.checks.push((id.into(), pass, detail));
    }

    fn claims(&mut self, claims: &[ClaimReport]) {
        for c in claims {
            self.check(&c.claim_id, c.pass, json!({"points_tested": c.points_tested, "max_defect": c.max_defect, "tol": c.tol}));
        }
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    fn json(&self, seed: u64) -> String {
        let mut v = Map::new();
        v.insert("schema".into(), json!(1));
        v.insert("command".into(), json!(self.command));
        v.insert("seed".into(), json!(seed));
        v.insert("pass".into(), json!(self.pass()));
        let checks: Vec<Value> =
            self.checks.iter().map(|(id, p, d)| json!({"id": id, "pass": p, "detail": d})).collect();
        v.insert("checks".into(), Value::Array(checks));
        for (k, x) in &self.data {
            v.insert(k.clone(), x.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(v)).expect("plain data");
        s.push('\n');
        s
    }

    fn checks_csv(&self) -> String {
        let mut s = String::from("id,pass\n");
        for (id, p, _) in &self.checks {
            s.push_str(&format!("{},{}\n", csv_field(id), p));
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

fn resolve_seed(flag: u64) -> Result<u64, Error> {
    match std::env::var("HESSLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| bad(format!("HESSLAB_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

impl Ctx {
    fn spec(&self) -> Result<(SystemSpec, Option<PhaseState>), Error> {
        let p = self.spec_path.as_ref().ok_or_else(|| bad("--spec is required for this command"))?;
        load_spec(p)
    }

    fn state_or_compliant(&self, spec: &SystemSpec, given: Option<PhaseState>) -> PhaseState {
        given.unwrap_or_else(|| sample::compliant_state(&mut sample::rng(self.seed), spec))
    }

    fn integrator(&self, default_t: f64) -> Result<IntegratorConfig, Error> {
        let t_end = self.t_end.unwrap_or(default_t);
        let cfg = match self.tol {
            Some(tol) => IntegratorConfig { dt: self.dt.unwrap_or(1e-2), ..IntegratorConfig::rkf45(tol, t_end) },
            None => IntegratorConfig::rk4(self.dt.unwrap_or(1e-3), t_end),
        };
        if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0 && cfg.dt > 0.0 && cfg.tol > 0.0) {
            return Err(bad("--t-end, --dt and --tol must be positive and finite"));
        }
        Ok(cfg)
    }
}

fn drifts_json(d: &[(String, f64, f64)]) -> Value {
    Value::Object(d.iter().map(|(k, a, r)| (k.clone(), json!({"abs": a, "rel": r}))).collect())
}

// ------------------------------------------------------------ simulate

const RELATION_TOL: f64 = 1e-8;

fn simulate(ctx: &Ctx) -> Result<Report, Error> {
    let (spec, s0) = ctx.spec()?;
    let s0 = ctx.state_or_compliant(&spec, s0);
    let cfg = ctx.integrator(10.0)?;
    let traj = integrate(&spec, &s0, &cfg)?;
    let mut r = Report::new("simulate");
    r.data.insert("kind".into(), json!(format!("{:?}", spec.kind)));
    r.data.insert("n".into(), json!(spec.n));
    r.data.insert("method".into(), json!(format!("{:?}", cfg.method)));
    r.data.insert("summary".into(), traj.summary_json());
    r.data.insert("max_drifts".into(), drifts_json(&traj.drifts()));
    let mut flagged = Vec::new();
    for (name, v) in traj.relation_residuals() {
        if v > RELATION_TOL {
            flagged.push(name.clone());
        }
        r.check(&format!("relation:{name}"), v <= RELATION_TOL, json!(v));
    }
    if spec.kind == Kind::HA4 {
        // b and g vanish exactly on the invariant manifold
        let mut worst = [0.0f64; 2];
        for s in &traj.samples {
            let (l, _) = build(&spec, s)?;
            let sc = spectral_coeffs(&l);
            worst[0] = worst[0].max(sc.b.abs());
            worst[1] = worst[1].max(sc.g.abs());
        }
        for (name, v) in [("b", worst[0]), ("g", worst[1])] {
            if v > RELATION_TOL {
                flagged.push(name.to_string());
            }
            r.check(&format!("spectral:{name}"), v <= RELATION_TOL, json!(v));
        }
    }
    r.data.insert("flagged".into(), json!(flagged));
    r.extra.push(("trajectory.csv".into(), traj.to_csv()));
    if ctx.format == Format::Csv {
        r.csv = Some(traj.to_csv());
    }
    Ok(r)
}

// ------------------------------------------------------------ verify

const COUNT: usize = 100;

fn unit_gamma(s: &PhaseState) -> Result<PhaseState, Error> {
    let mut y = reduced_vector(s)?;
    for k in [1, 3] {
        let n = (y[3 * k].powi(2) + y[3 * k + 1].powi(2) + y[3 * k + 2].powi(2)).sqrt();
        if n > 0.0 {
            for a in 0..3 {
                y[3 * k + a] /= n;
            }
        }
    }
    Ok(state_from_reduced(&y, s.t))
}

fn verify_lax(ctx: &Ctx, r: &mut Report) -> Result<(), Error> {
    let (spec, s0) = ctx.spec()?;
    let mut rng = sample::rng(ctx.seed);
    let mut worst = 0.0f64;
    for _ in 0..COUNT {
        worst = worst.max(lax_residual(&spec, &sample::compliant_state(&mut rng, &spec))?);
    }
    r.check("lax-identity", worst < 1e-12, json!({"points_tested": COUNT, "max_residual": worst}));
    let s0 = s0.unwrap_or_else(|| sample::compliant_state(&mut rng, &spec));
    let cfg = ctx.integrator(5.0)?;
    let traj = integrate(&spec, &s0, &cfg)?;
    let rep = isospectrality_report(&spec, &traj, 0.7)?;
    for d in &rep.drifts {
        let (ok, v) = match d.name.as_str() {
            "b" | "g" => (d.abs < 1e-9, d.abs),
            "a" | "f" => continue,
            _ => (d.rel < 1e-7, d.rel),
        };
        r.check(&format!("isospectral:{}", d.name), ok, json!(v));
    }
    r.check("isospectral:eigenvalues", rep.eigenvalue_drift < 1e-7, json!(rep.eigenvalue_drift));
    r.data.insert("isospectrality".into(), serde_json::to_value(&rep).expect("plain data"));
    Ok(())
}

fn verify_poisson(ctx: &Ctx, r: &mut Report) -> Result<(), Error> {
    let Some(_) = &ctx.spec_path else {
        r.claims(&poisson_suite(ctx.seed, COUNT)?);
        r.claims(&restrictive_suite(ctx.seed, COUNT)?);
        return Ok(());
    };
    let (spec, _) = ctx.spec()?;
    let a = standard_for(&spec);
    let pts = random_points(ctx.seed, chart_dim(spec.n), COUNT);
    let mut claims = Vec::new();
    if spec.n >= 4 {
        let ja = pts.iter().map(|x| max_jacobi_defect(&a, x)).fold(0.0, f64::max);
        claims.push(ClaimReport::new(&format!("jacobi:{}", a.name), COUNT, ja, 1e-9));
    }
    if let Ok(b) = second_for(&spec) {
        if b.dim() == a.dim() {
            let jb = pts.iter().map(|x| max_jacobi_defect(&b, x)).fold(0.0, f64::max);
            claims.push(ClaimReport::new(&format!("jacobi:{}", b.name), COUNT, jb, 1e-9));
            let sc = pts.iter().map(|x| schouten_defect(&a, &b, x)).collect::<Result<Vec<f64>, _>>()?;
            claims.push(ClaimReport::new("schouten", COUNT, sc.into_iter().fold(0.0, f64::max), 1e-10));
        }
    }
    match spec.kind {
        Kind::LagrangeTop | Kind::LagrangeBitop => {
            claims.push(ClaimReport::new("bihamiltonian", COUNT, lagrange_bihamiltonian(&spec, &pts)?, 1e-8));
        }
        Kind::ClassicalHA | Kind::HA4 | Kind::HAn => {
            let b = bp_check(&spec, &pts)?;
            claims.push(ClaimReport::new("A1", COUNT, b.a1_residual, 1e-9));
            claims.push(ClaimReport::new("A2", COUNT, b.involution, f64::MIN_POSITIVE));
            claims.push(ClaimReport::new("prop9", COUNT, b.restrictive.c_symmetry_defect, 1e-9));
            claims.push(ClaimReport::new("BP-casimir", COUNT, b.casimir_second, 1e-9));
        }
        Kind::Custom => {}
    }
    r.claims(&claims);
    Ok(())
}

fn verify_reduction(ctx: &Ctx, r: &mut Report) -> Result<(), Error> {
    let (spec, s0) = ctx.spec()?;
    if spec.n != 4 {
        return Err(bad("the reduction suite needs an so(4) system"));
    }
    let s0 = unit_gamma(&ctx.state_or_compliant(&spec, s0))?;
    let cfg = ctx.integrator(5.0)?;
    let cross = reduction_crosscheck(&spec, &s0, &cfg)?;
    r.check("reduction-crosscheck", cross < 1e-8, json!(cross));
    let traj = integrate(&spec, &s0, &cfg)?;
    let q = quadrature_check(&spec, &traj)?;
    r.check("quadratures", q.max() < 1e-6, json!(q.max()));
    r.data.insert("quadratures".into(), serde_json::to_value(&q).expect("plain data"));
    Ok(())
}

fn curve_checks(spec: &SystemSpec, s: &PhaseState) -> Result<(bool, Value), Error> {
    let rep = curve_report(spec, s)?;
    let dp = double_points(&CurveData::of_state(spec, s)?)?;
    let ok = rep["genus"] == json!(3) && dp.lambdas.len() == 4 && dp.all_simple && dp.normalization_genus == 5;
    Ok((ok, rep))
}

fn verify_spectral(ctx: &Ctx, r: &mut Report) -> Result<(), Error> {
    let (spec, _) = ctx.spec()?;
    if spec.n != 4 {
        return Err(bad("the spectral suite needs an so(4) system"));
    }
    let mut rng = sample::rng(ctx.seed);
    for k in 0..5 {
        let s = generic_curve_state(&spec, &mut rng)?;
        let (ok, rep) = curve_checks(&spec, &s)?;
        r.check(&format!("curve:{k}"), ok, rep);
    }
    Ok(())
}

fn verify(ctx: &Ctx, suite: Suite) -> Result<Report, Error> {
    let (name, f): (&str, fn(&Ctx, &mut Report) -> Result<(), Error>) = match suite {
        Suite::Lax => ("lax", verify_lax),
        Suite::Poisson => ("poisson", verify_poisson),
        Suite::Reduction => ("reduction", verify_reduction),
        Suite::Spectral => ("spectral", verify_spectral),
    };
    let mut r = Report::new("verify");
    r.data.insert("suite".into(), json!(name));
    f(ctx, &mut r)?;
    r.csv = Some(r.checks_csv());
    Ok(r)
}

// ------------------------------------------------------------ kowalevski

fn exponent_csv(reports: &[&ExampleReport]) -> String {
    let mut s = String::from("example,solution,index,re,im\n");
    for rep in reports {
        for (k, e) in rep.found.iter().enumerate() {
            for (i, z) in e.iter().enumerate() {
                s.push_str(&format!("{},{k},{i},{},{}\n", rep.name, fmt_num(z.re), fmt_num(z.im)));
            }
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn kowalevski(
    ctx: &Ctx,
    dim: Option<usize>,
    example: Option<u8>,
    j13: Option<f64>,
    j24: Option<f64>,
    d2: Option<f64>,
    theorem5: bool,
    b: Option<String>,
) -> Result<Report, Error> {
    let mut r = Report::new("kowalevski");
    if theorem5 {
        let src = b.ok_or_else(|| bad("--theorem5 needs --b"))?;
        let poly = Poly::parse(&src)?;
        let model = GermModel { j: j13.unwrap_or(1.0), ..GermModel::default() };
        let v = theorem5_filter(&poly, &model, ctx.seed)?;
        r.check("theorem5", v.pass, json!(v.mode));
        let mut csv = String::from("branch,applicable,k,re,im\n");
        for br in &v.branches {
            for (k, z) in br.charpoly.iter().enumerate() {
                csv.push_str(&format!("K{},{},{k},{},{}\n", br.branch, br.applicable, fmt_num(z.re), fmt_num(z.im)));
            }
        }
        r.csv = Some(csv);
        r.data.insert("germ_analysis".into(), serde_json::to_value(&v).expect("plain data"));
        return Ok(r);
    }
    if ctx.spec_path.is_some() {
        return kowalevski_spec(ctx, r);
    }
    let reports: Vec<ExampleReport> = match (dim.unwrap_or(3), example) {
        (3, _) => vec![hess_appelrot_3d(j13.unwrap_or(1.0), ctx.seed)?],
        (4, Some(1)) => vec![example1_4d(j24.unwrap_or(0.4), d2.unwrap_or(0.0), ctx.seed)?],
        (4, Some(2) | None) => vec![example2_4d(j13.unwrap_or(0.7), j24.unwrap_or(0.2), ctx.seed)?],
        (5, _) => vec![case8_5d()?],
        (6, _) => vec![case1_6d(j13.unwrap_or(2.0))?],
        (d, e) => return Err(bad(format!("no worked example for --dim {d} --example {e:?}"))),
    };
    for rep in &reports {
        r.check(&rep.name, rep.pass, json!({"max_error": rep.max_error}));
    }
    r.csv = Some(exponent_csv(&reports.iter().collect::<Vec<_>>()));
    r.data.insert("examples".into(), serde_json::to_value(&reports).expect("plain data"));
    Ok(r)
}

/// Balances of the field of an arbitrary spec on its invariant-relation mask.
fn kowalevski_spec(ctx: &Ctx, mut r: Report) -> Result<Report, Error> {
    let (spec, _) = ctx.spec()?;
    let sys = field_from_spec(&spec);
    let mask = Mask::relations(&spec);
    let sols = solve_balances(&sys, &mask, &SolveOptions { seed: ctx.seed, ..Default::default() });
    let mut funcs: Vec<Poly> = standard_casimirs(spec.n).into_iter().map(|(_, p)| p).collect();
    funcs.extend(spec.relation_coords().into_iter().map(Poly::var));
    let mut out = Vec::new();
    let mut csv = String::from("solution,index,re,im\n");
    for (k, s) in sols.iter().enumerate() {
        let ara = ara_check(s, &funcs);
        let (ok, av) = match &ara {
            Ok(a) => (a.pass, serde_json::to_value(a).expect("plain data")),
            Err(e) => (false, json!({"error": e.to_string()})),
        };
        r.check(&format!("ara:{k}"), ok, av.clone());
        for (i, z) in s.exponents.iter().enumerate() {
            csv.push_str(&format!("{k},{i},{},{}\n", fmt_num(z.re), fmt_num(z.im)));
        }
        out.push(json!({"C": s.c, "exponents": s.exponents, "residual": s.residual, "family_dim": s.family_dim, "ara": av}));
    }
    r.check("balances-found", !sols.is_empty(), json!(sols.len()));
    r.data.insert("masks".into(), serde_json::to_value(&mask).expect("plain data"));
    r.data.insert("solutions".into(), Value::Array(out));
    r.csv = Some(csv);
    Ok(r)
}

// ------------------------------------------------------------ spectral / reduce

fn flat_csv(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flat_csv(x, &if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, out);
            }
        }
        Value::Array(a) => {
            for (k, x) in a.iter().enumerate() {
                flat_csv(x, &format!("{prefix}[{k}]"), out);
            }
        }
        x => out.push_str(&format!("{},{}\n", csv_field(prefix), x)),
    }
}

fn spectral(ctx: &Ctx) -> Result<Report, Error> {
    let (spec, s) = ctx.spec()?;
    if spec.n != 4 {
        return Err(bad("spectral curves are implemented for so(4) systems"));
    }
    let s = match s {
        Some(s) => s,
        None => generic_curve_state(&spec, &mut sample::rng(ctx.seed))?,
    };
    let mut r = Report::new("spectral");
    let (ok, rep) = curve_checks(&spec, &s)?;
    r.check("genus-3-four-double-points", ok, json!(null));
    let mut csv = String::from("quantity,value\n");
    flat_csv(&rep, "", &mut csv);
    r.csv = Some(csv);
    r.data.insert("curve".into(), rep);
    Ok(r)
}

fn reduce_cmd(ctx: &Ctx) -> Result<Report, Error> {
    let (spec, s) = ctx.spec()?;
    if spec.n != 4 {
        return Err(bad("the reduction applies to so(4) systems"));
    }
    let s = unit_gamma(&ctx.state_or_compliant(&spec, s))?;
    let red = reduce(&spec, &s)?;
    let ell = elliptic_reduction(&spec, &red);
    let cfg = ctx.integrator(2.0)?;
    let traj = integrate(&spec, &s, &cfg)?;
    let q = quadrature_check(&spec, &traj)?;
    let mut r = Report::new("reduce");
    r.check("quadratures", q.max() < 1e-6, json!(q.max()));
    let data = json!({
        "reduction": serde_json::to_value(&red).expect("plain data"),
        "E1": serde_json::to_value(&ell.e1).expect("plain data"),
        "E2": serde_json::to_value(&ell.e2).expect("plain data"),
        "quadratures": serde_json::to_value(&q).expect("plain data"),
    });
    let mut csv = String::from("quantity,value\n");
    flat_csv(&data, "", &mut csv);
    r.csv = Some(csv);
    if let Value::Object(m) = data {
        r.data.extend(m);
    }
    Ok(r)
}

// ------------------------------------------------------------ main

fn run(cli: Cli) -> Result<bool, Error> {
    let ctx = Ctx {
        spec_path: cli.spec,
        seed: resolve_seed(cli.seed)?,
        t_end: cli.t_end,
        dt: cli.dt,
        tol: cli.tol,
        format: cli.format,
    };
    let (report, stem) = match cli.cmd {
        Cmd::Simulate => (simulate(&ctx)?, "simulate".to_string()),
        Cmd::Verify { suite } => {
            let r = verify(&ctx, suite)?;
            let stem = format!("verify-{}", r.data["suite"].as_str().unwrap_or("suite"));
            (r, stem)
        }
        Cmd::Kowalevski { dim, example, j13, j24, d2, theorem5, b } => {
            (kowalevski(&ctx, dim, example, j13, j24, d2, theorem5, b)?, "kowalevski".to_string())
        }
        Cmd::Spectral => (spectral(&ctx)?, "spectral".to_string()),
        Cmd::Reduce => (reduce_cmd(&ctx)?, "reduce".to_string()),
    };
    let json_text = report.json(ctx.seed);
    let primary = match (ctx.format, &report.csv) {
        (Format::Csv, Some(c)) => (format!("{stem}.csv"), c.clone()),
        _ => (format!("{stem}.json"), json_text.clone()),
    };
    match &cli.out {
        Some(dir) => {
            let io = |e: std::io::Error| bad(format!("{}: {e}", dir.display()));
            write_atomic(dir, &primary.0, &primary.1).map_err(io)?;
            if ctx.format == Format::Csv {
                write_atomic(dir, &format!("{stem}.json"), &json_text).map_err(io)?;
            }
            for (name, body) in &report.extra {
                if *name != primary.0 {
                    write_atomic(dir, name, body).map_err(io)?;
                }
            }
        }
        None => print!("{}", primary.1),
    }
    for (id, pass, _) in report.checks.iter().filter(|c| !c.1) {
        eprintln!("check failed: {id} (pass = {pass})");
    }
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
