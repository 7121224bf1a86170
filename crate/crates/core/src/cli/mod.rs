//! Command-line front end. Every subcommand maps to one library operation and
//! writes deterministic CSV or flat JSON.

mod args;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Parser;
use serde_json::{json, Map, Value};

pub use args::Cli;
use args::*;

use crate::branch::{BranchPoint, ElOperator};
use crate::circle::{bifurcation_scan, mto_deficit_circle, multistart, nonconstant_branch};
use crate::config::RunConfig;
use crate::constants::{self, exact, Rational};
use crate::error::{Error, Result};
use crate::euclidean::{
    dilation_family, ks_decomposition_error, lambda_star_weight, multistart_weighted, onofri_deficit_weighted,
    perturbation_bound, solve_keller_segel, KsConfig, Lorentzian, Weight, WeightKind,
};
use crate::geometry::{first_eigenvalue, legendre::legendre_table, Geometry, GeometryKind, Normalization, ScalarField};
use crate::identities::{random_field, run_suite, trial_rng, write_reports_csv, Suite, SuiteOptions};
use crate::sphere::{bifurcation_scan_sphere, flow_evolve, functional_f, minimize_lambda_star, FlowConfig, OptimizerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const JOBS_ENV: &str = "ONOFRI_LAB_JOBS";

/// What a command wants the process to report.
enum Outcome {
    Ok,
    ChecksFailed,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `argv` (program name first), runs the command, and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match config_path(&argv) {
        Some(p) => match RunConfig::load(Path::new(&p)) {
            Ok(cfg) => cfg.merge_into(&argv),
            Err(e) => {
                eprintln!("error: config {p}: {e}");
                return EXIT_USAGE;
            }
        },
        None => argv,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let jobs = match jobs_override(cli.jobs) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::ChecksFailed) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn jobs_override(flag: Option<usize>) -> Result<Option<usize>> {
    let jobs = match std::env::var(JOBS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("{JOBS_ENV} must be a positive integer, got `{v}`")))?,
        ),
        _ => flag,
    };
    if jobs == Some(0) {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()));
    }
    Ok(jobs)
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Constants(c) => cmd_constants(c),
        Command::Spectrum(c) => cmd_spectrum(c),
        Command::Rigidity(c) => cmd_rigidity(c),
        Command::LambdaStar(c) => cmd_lambda_star(c),
        Command::Flow(c) => cmd_flow(c),
        Command::Weights(c) => cmd_weights(c),
        Command::Identities(c) => cmd_identities(c),
    }
}

// ---------------------------------------------------------------- output

/// Integral values print without a fraction, non-finite ones as null.
fn num(v: f64) -> Value {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        Value::from(v as i64)
    } else if v.is_finite() {
        Value::from(v)
    } else {
        Value::Null
    }
}

fn emit_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(v).map_err(|e| Error::Unknown(e.to_string()))?)?;
    Ok(())
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn path_value(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| Value::from(p.display().to_string()))
}

// ---------------------------------------------------------------- parsing helpers

/// Decimal or `p/q`; decimals with few digits become exact ratios.
fn parse_rational(s: &str) -> Result<Option<Rational>> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::InvalidParameter(format!("zero denominator in `{s}`")));
        }
        return Ok(Some(Rational::new(p, q)));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() <= 12 && !s.contains(['e', 'E']) && !int.is_empty() {
        let digits = format!("{int}{frac}");
        if let Ok(n) = digits.parse::<i128>() {
            return Ok(Some(Rational::new(n, 10i128.pow(frac.len() as u32))));
        }
    }
    s.parse::<f64>().map_err(|_| bad())?;
    Ok(None)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidParameter(format!("not a number: `{s}`")))
}

fn sphere_geometry(n: usize, shape: &ShapeArgs) -> Result<Geometry> {
    match (shape.radius, shape.normalization) {
        (Some(a), _) => Geometry::sphere_with_radius(n, a),
        (None, Some(NormalizationArg::UnitVolume)) => Geometry::sphere(n, Normalization::UnitVolume),
        _ => Geometry::sphere(n, Normalization::UnitRadius),
    }
}

fn shape_geometry(kind: GeometryArg, n: usize, shape: &ShapeArgs) -> Result<Geometry> {
    match kind {
        GeometryArg::Circle => Geometry::circle(n, shape.period.unwrap_or(1.0)),
        GeometryArg::Sphere => sphere_geometry(n, shape),
    }
}

// ---------------------------------------------------------------- constants

fn cmd_constants(c: ConstantsCmd) -> Result<Outcome> {
    let v = match c {
        ConstantsCmd::Theta0 { d } => {
            let t = match parse_rational(&d)? {
                Some(r) => exact::theta0(r)?,
                None => constants::theta0(parse_f64(&d)?)?,
            };
            json!({"d": num(parse_f64_loose(&d)?), "theta0": num(t)})
        }
        ConstantsCmd::Abc { d, theta } => {
            let r = match (parse_rational(&d)?, parse_rational(&theta)?) {
                (Some(d), Some(t)) => exact::abc_coefficients(d, t)?,
                _ => constants::abc_coefficients(parse_f64_loose(&d)?, parse_f64_loose(&theta)?)?,
            };
            json!({"d": num(r.d), "theta": num(r.theta), "a": num(r.a), "b": num(r.b), "c": num(r.c),
                   "square_ratio": num(r.square_ratio())})
        }
        ConstantsCmd::Discriminant { d, theta } => {
            let r = match (parse_rational(&d)?, parse_rational(&theta)?) {
                (Some(dr), Some(t)) => exact::discriminant(dr, t)?,
                _ => constants::discriminant(parse_f64_loose(&d)?, parse_f64_loose(&theta)?)?,
            };
            json!({"d": num(parse_f64_loose(&d)?), "theta": num(parse_f64_loose(&theta)?),
                   "delta": num(r.delta), "sign_expression": num(r.sign_expression),
                   "sign": r.sign, "signs_agree": r.signs_agree})
        }
        ConstantsCmd::Fontenas { d, x } => json!({
            "d": num(d), "x": num(x),
            "f1": num(constants::fontenas_f1(d, x)?),
            "f2": num(constants::fontenas_f2(d, x)?),
            "gap": num(constants::fontenas_gap(d, x)?),
        }),
        ConstantsCmd::CurvatureBound { d, rho, lambda1, theta } => {
            let b = constants::curvature_rigidity_bound(d, rho, lambda1, theta)?;
            json!({"d": num(d), "rho": num(rho), "lambda1": num(lambda1), "theta": num(theta),
                   "bound": num(b.bound), "optimal_theta": num(b.optimal_theta),
                   "optimal_bound": num(b.optimal_bound)})
        }
    };
    emit_json(&v)?;
    Ok(Outcome::Ok)
}

fn parse_f64_loose(s: &str) -> Result<f64> {
    match parse_rational(s)? {
        Some(r) => Ok(*r.numer() as f64 / *r.denom() as f64),
        None => parse_f64(s),
    }
}

// ---------------------------------------------------------------- spectrum

fn cmd_spectrum(c: SpectrumCmd) -> Result<Outcome> {
    let SpectrumCmd::Lambda1 { geometry, shape, resolution } = c;
    let g = shape_geometry(geometry, resolution, &shape)?;
    let l1 = first_eigenvalue(&g)?;
    let mut m = Map::new();
    m.insert("geometry".into(), Value::from(g.kind().to_string()));
    m.insert("resolution".into(), Value::from(resolution));
    match g.kind() {
        GeometryKind::Circle => {
            m.insert("period".into(), num(g.volume()));
        }
        _ => {
            m.insert("radius".into(), num(g.sphere_radius().unwrap_or(1.0)));
            m.insert(
                "normalization".into(),
                g.normalization().map_or(Value::Null, |n| Value::from(n.as_str())),
            );
        }
    }
    m.insert("lambda1".into(), num(l1));
    emit_json(&Value::Object(m))?;
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------- rigidity

fn parse_scan(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!("scan must be lo:hi:steps, got `{s}`")));
    }
    let steps = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidParameter(format!("bad step count `{}`", parts[2])))?;
    Ok((parse_f64(parts[0])?, parse_f64(parts[1])?, steps))
}

fn cmd_rigidity(c: RigidityCmd) -> Result<Outcome> {
    let (kind, a) = match c {
        RigidityCmd::Circle(a) => (GeometryArg::Circle, a),
        RigidityCmd::Sphere(a) => (GeometryArg::Sphere, a),
    };
    let n = a.resolution.unwrap_or(match kind {
        GeometryArg::Circle => 256,
        GeometryArg::Sphere => 64,
    });
    let geom = Arc::new(shape_geometry(kind, n, &a.shape)?);
    if let Some(s) = &a.scan {
        let (lo, hi, steps) = parse_scan(s)?;
        let b = match kind {
            GeometryArg::Circle => bifurcation_scan(&geom, lo, hi, steps)?,
            GeometryArg::Sphere => bifurcation_scan_sphere(&geom, lo, hi, steps)?,
        };
        emit_json(&json!({
            "geometry": geom.kind().to_string(),
            "resolution": n,
            "lambda_c": num(b.lambda_c),
            "bracket_lo": num(b.bracket.0),
            "bracket_hi": num(b.bracket.1),
            "lambda_c_interpolated": num(b.lambda_c_interpolated),
            "evaluations": b.evaluations,
        }))?;
        if a.lambda.is_empty() {
            return Ok(Outcome::Ok);
        }
    }
    if a.lambda.is_empty() {
        return Err(Error::InvalidParameter("give --lambda and/or --scan".into()));
    }
    if a.nonconstant && kind != GeometryArg::Circle {
        return Err(Error::InvalidParameter("--nonconstant is available on the circle only".into()));
    }
    let op = ElOperator::new(&geom)?;
    let deficit = |bp: &BranchPoint| match kind {
        GeometryArg::Circle => mto_deficit_circle(&bp.solution, bp.lambda),
        GeometryArg::Sphere => functional_f(&geom, bp.lambda, &bp.solution),
    };
    let mut out = open_out(&a.output)?;
    writeln!(out, "lambda,init,branch_tag,residual,distance_to_constant,deficit")?;
    let mut first_err = None;
    for &lam in &a.lambda {
        let runs: Vec<Result<BranchPoint>> = if a.nonconstant {
            vec![nonconstant_branch(&op, lam, a.tol).and_then(|p| {
                p.into_iter().last().ok_or_else(|| Error::Unknown("empty branch".into()))
            })]
        } else {
            multistart(&op, lam, a.inits, a.seed, a.amplitude, a.tol)
        };
        for (k, r) in runs.into_iter().enumerate() {
            match r {
                Ok(bp) => writeln!(
                    out,
                    "{},{},{},{:.6e},{:.6e},{:.6e}",
                    lam,
                    k,
                    bp.branch_tag,
                    bp.newton_residual,
                    bp.distance_to_constant,
                    deficit(&bp)?
                )?,
                Err(e) => {
                    writeln!(out, "{lam},{k},failed,,,")?;
                    eprintln!("lambda {lam}, init {k}: {e}");
                    first_err.get_or_insert(e);
                }
            }
        }
    }
    out.flush()?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(Outcome::Ok),
    }
}

// ---------------------------------------------------------------- lambda-star

fn cmd_lambda_star(c: LambdaStarCmd) -> Result<Outcome> {
    let LambdaStarCmd::Sphere {
        normalization,
        radius,
        resolution,
        starts,
        modes,
        iterations,
        seed,
        min_field_file,
    } = c;
    let shape = ShapeArgs {
        radius,
        normalization: Some(normalization),
        period: None,
    };
    let geom = Arc::new(sphere_geometry(resolution, &shape)?);
    let cfg = OptimizerConfig {
        starts,
        modes,
        refine_modes: 2 * modes,
        iterations,
        seed,
        ..Default::default()
    };
    let est = minimize_lambda_star(&geom, &cfg)?;
    if let Some(p) = &min_field_file {
        let mut f = BufWriter::new(File::create(p)?);
        est.field.write_csv(&mut f)?;
        f.flush()?;
    }
    let norm = geom.normalization().map_or("custom", |n| n.as_str());
    emit_json(&json!({
        "normalization": norm,
        "radius": num(geom.sphere_radius().unwrap_or(1.0)),
        "estimate": num(est.estimate),
        "probe_count": est.probe_count,
        "stalled": est.stalled,
        "min_field_file": path_value(&min_field_file),
    }))?;
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------- flow

/// `cos[:a]`, `legendre:l:a`, `const:c`, `random:seed[:amp]`, `file:path`.
pub fn parse_init(spec: &str, geom: &Arc<Geometry>) -> Result<ScalarField> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || -> Result<Vec<f64>> {
        if rest.is_empty() {
            Ok(vec![])
        } else {
            rest.split(':').map(parse_f64).collect()
        }
    };
    let bad = || Error::InvalidParameter(format!("bad init spec `{spec}`"));
    match head {
        "cos" => {
            let a = nums()?.first().copied().unwrap_or(1.0);
            ScalarField::from_fn(geom, |t| a * t.cos())
        }
        "legendre" => {
            let v = nums()?;
            if v.len() != 2 || v[0] < 0.0 || v[0].fract() != 0.0 {
                return Err(bad());
            }
            let l = v[0] as usize;
            ScalarField::from_fn(geom, |t| v[1] * legendre_table(l, t.cos())[l])
        }
        "const" => {
            let v = nums()?;
            ScalarField::constant(geom, *v.first().ok_or_else(bad)?)
        }
        "random" => {
            let v = nums()?;
            let seed = v.first().copied().unwrap_or(7.0);
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(bad());
            }
            let amp = v.get(1).copied().unwrap_or(1.0);
            random_field(geom, &mut trial_rng(seed as u64, 0))?.map(|x| amp * x)
        }
        "file" => {
            let f = ScalarField::read_csv(BufReader::new(File::open(rest)?))?;
            if **f.geometry() != **geom {
                return Err(Error::GeometryMismatch {
                    expected: geom.descriptor(),
                    found: f.geometry().descriptor(),
                });
            }
            Ok(f)
        }
        _ => Err(bad()),
    }
}

fn cmd_flow(c: FlowCmd) -> Result<Outcome> {
    let FlowCmd::Sphere {
        lambda,
        init,
        t_final,
        safety,
        resolution,
        shape,
        record_every,
        output,
    } = c;
    let geom = Arc::new(sphere_geometry(resolution, &shape)?);
    let u0 = parse_init(&init, &geom)?;
    let trace = flow_evolve(lambda, &u0, t_final, &FlowConfig { safety, record_every })?;
    let mut out = open_out(&output)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    drop(out);
    let f0 = trace.f_values[0];
    let summary = json!({
        "lambda": num(lambda),
        "t_final": num(t_final),
        "steps": trace.steps,
        "F_initial": num(f0),
        "F_final": num(*trace.f_values.last().unwrap_or(&f0)),
        "dissipated": num(trace.dissipated),
        "energy_defect": num(trace.energy_defect()),
        "mass_drift": num(trace.mass_drift()),
        "max_increase": num(trace.max_increase),
        "duality_error": num(trace.duality_error()),
    });
    if output.is_some() {
        emit_json(&summary)?;
    } else {
        eprintln!("{summary}");
    }
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------- weights

fn plane_for(kind: &WeightKind, p: &PlaneArgs) -> Result<Arc<Geometry>> {
    let ks = matches!(kind, WeightKind::KellerSegel { .. } | WeightKind::KsSelfsim { .. });
    let n = p.resolution.unwrap_or(if ks { 192 } else { 256 });
    let r = p.radius.unwrap_or(if ks { 12.0 } else { 20.0 });
    Ok(Arc::new(Geometry::plane(n, r)?))
}

fn write_profile(w: &Weight, path: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = path {
        let mut f = BufWriter::new(File::create(p)?);
        w.write_profile_csv(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn cmd_weights(c: WeightsCmd) -> Result<Outcome> {
    match c {
        WeightsCmd::LambdaStar { weight, plane, profile_csv } => {
            let kind: WeightKind = weight.parse()?;
            let w = Weight::new(kind, &plane_for(&kind, &plane)?)?;
            write_profile(&w, &profile_csv)?;
            let ls = lambda_star_weight(&w);
            emit_json(&json!({
                "kind": kind.label(),
                "params": kind.params().into_iter().map(num).collect::<Vec<_>>(),
                "lambda_star": num(ls.value),
                "inf_location_r": ls.inf_location_r.map_or(Value::from("inf"), num),
                "normalization_defect": num(ls.normalization_defect),
            }))?;
        }
        WeightsCmd::SolveKs { mass, epsilon, plane, profile_csv } => {
            let kind = WeightKind::KsSelfsim { mass, epsilon };
            let geom = plane_for(&kind, &plane)?;
            let w = solve_keller_segel(mass, epsilon, &geom, &KsConfig::default())?;
            write_profile(&w, &profile_csv)?;
            let ks = w.ks.as_ref().expect("Keller-Segel weight carries its profile");
            emit_json(&json!({
                "mass": num(mass),
                "epsilon": num(epsilon),
                "recovered_mass": num(ks.recovered_mass),
                "iterations": ks.iterations,
                "decomposition_error": num(ks_decomposition_error(&w, 1e-6)?),
                "lambda_star": num(lambda_star_weight(&w).value),
                "mass_over_8pi": num(mass / (8.0 * PI)),
                "normalization_defect": num(w.normalization_defect),
            }))?;
        }
        WeightsCmd::Perturbation { amplitude, plane } => {
            let geom = plane_for(&WeightKind::Stereographic, &plane)?;
            let b = perturbation_bound(&Lorentzian { amplitude }, &geom)?;
            emit_json(&json!({
                "amplitude": num(amplitude),
                "bound": num(b.bound),
                "variation": num(b.variation),
                "inf_term": num(b.inf_term),
                "lambda_star": num(b.lambda_star),
                "holds": b.holds,
            }))?;
            if !b.holds {
                return Ok(Outcome::ChecksFailed);
            }
        }
        WeightsCmd::El {
            weight,
            lambda,
            inits,
            amplitude,
            seed,
            tol,
            resolution,
            radius,
            output,
        } => {
            if lambda.is_empty() {
                return Err(Error::InvalidParameter("give --lambda".into()));
            }
            let kind: WeightKind = weight.parse()?;
            let plane = PlaneArgs {
                resolution: Some(resolution),
                radius: Some(radius),
            };
            let w = Weight::new(kind, &plane_for(&kind, &plane)?)?;
            let mut out = open_out(&output)?;
            writeln!(out, "lambda,init,branch_tag,residual,distance_to_constant,constraint_defect")?;
            let mut first_err = None;
            for &lam in &lambda {
                for (k, r) in multistart_weighted(&w, lam, inits, seed, amplitude, tol).into_iter().enumerate() {
                    match r {
                        Ok(s) => writeln!(
                            out,
                            "{lam},{k},{},{:.6e},{:.6e},{:.6e}",
                            s.branch_tag, s.residual, s.distance_to_constant, s.constraint_defect
                        )?,
                        Err(e) => {
                            writeln!(out, "{lam},{k},failed,,,")?;
                            eprintln!("lambda {lam}, init {k}: {e}");
                            first_err.get_or_insert(e);
                        }
                    }
                }
            }
            out.flush()?;
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        WeightsCmd::Deficit {
            weight,
            lambda,
            sigma,
            field,
            plane,
        } => {
            let kind: WeightKind = weight.parse()?;
            let (u, geom) = match (&field, sigma) {
                (Some(p), None) => {
                    let f = ScalarField::read_csv(BufReader::new(File::open(p)?))?;
                    let g = Arc::clone(f.geometry());
                    (f, g)
                }
                (None, Some(s)) => {
                    let g = plane_for(&kind, &plane)?;
                    (dilation_family(&g, s)?, g)
                }
                _ => return Err(Error::InvalidParameter("give exactly one of --sigma and --field".into())),
            };
            let w = Weight::new(kind, &geom)?;
            emit_json(&json!({
                "kind": kind.label(),
                "lambda": num(lambda),
                "sigma": sigma.map_or(Value::Null, num),
                "field": path_value(&field),
                "deficit": num(onofri_deficit_weighted(&w, &u, lambda)?),
            }))?;
        }
    }
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------- identities

fn cmd_identities(c: IdentitiesCmd) -> Result<Outcome> {
    let IdentitiesCmd::Run {
        suite,
        trials,
        seed,
        tol,
        resolution,
        weight,
        output,
        summary,
    } = c;
    let suite = match suite {
        SuiteArg::Circle => Suite::Circle,
        SuiteArg::Sphere => Suite::Sphere,
        SuiteArg::Plane => Suite::Plane,
        SuiteArg::All => Suite::All,
    };
    let opts = SuiteOptions {
        trials,
        seed,
        tol,
        resolution,
        weight: weight.as_deref().map(str::parse).transpose()?,
        jobs: None,
    };
    let res = run_suite(suite, &opts)?;
    let mut out = open_out(&output)?;
    write_reports_csv(&res.reports, &mut out)?;
    out.flush()?;
    drop(out);
    let s = &res.summary;
    let line = json!({
        "suite": suite.as_str(),
        "total": s.total,
        "passed": s.passed,
        "failed": s.failed,
        "under_resolved": s.under_resolved,
        "worst_rel_err": num(s.per_identity.iter().map(|p| p.max_rel_err).fold(0.0, f64::max)),
        "notes": s.notes.join("; "),
    });
    match &summary {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        None => eprintln!("{line}"),
    }
    Ok(if res.all_pass() {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

/// Entry point for `main`.
pub fn main_from_env() -> i32 {
    run(std::env::args())
}
