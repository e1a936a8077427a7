//! Subcommand bodies, generic over the arithmetic mode where the library is.

use std::time::{SystemTime, UNIX_EPOCH};

use mabuchi_core::criterion::{certify, necessity_probe, sample_chamber_rays, Instance, Verdict};
use mabuchi_core::dingfun::{eval_f, eval_l, normalize};
use mabuchi_core::extremal::futaki;
use mabuchi_core::masolver::{solve, Status};
use mabuchi_core::quad::{mc_joint, Poly};
use mabuchi_core::scalar::parse_scalar;
use mabuchi_core::Scalar;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{self, CliError};
use crate::number::{parse_list, render_vec, Num, Render};
use crate::potential;
use crate::problem::{Problem, SolverOptions, FORMAT_VERSION};
use crate::report::{
    CertificateFile, DingFile, ExtremalFile, FutakiFile, Header, InputEcho, McRow, OracleFile, PotentialBlock,
    ProbeFile, SolutionFile,
};

/// Global flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub tol: Option<String>,
    pub rational: bool,
    pub reproducible: bool,
    pub seed: Option<u64>,
}

/// A document to emit and the exit code that goes with it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: String,
    pub code: u8,
}

impl Outcome {
    fn new(doc: &impl Serialize, code: u8) -> Result<Self, CliError> {
        let json = serde_json::to_string_pretty(doc).map_err(|e| CliError::numeric(e.to_string()))?;
        Ok(Outcome { json, code })
    }
}

impl Context {
    /// Exact arithmetic when forced or when every input number is exact.
    pub fn exact(&self, problem: &Problem) -> bool {
        self.rational || problem.is_rational()
    }

    fn tol<S: Scalar>(&self, problem: &Problem) -> Result<Option<S>, CliError> {
        if let Some(t) = &self.tol {
            let v = parse_scalar(t).ok_or_else(|| CliError::usage(format!("cannot parse --tol {t:?}")))?;
            return Ok(Some(v));
        }
        problem.file.options.tol.as_ref().map(|t| t.parse()).transpose()
    }

    fn seed(&self, problem: &Problem) -> u64 {
        self.seed.or(problem.file.options.seed).unwrap_or(0)
    }

    fn header<S: Render>(&self, kind: &str, problem: &Problem, tol: &S, seed: Option<u64>) -> Header {
        let generated_at =
            (!self.reproducible).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
        Header {
            kind: kind.into(),
            format_version: FORMAT_VERSION,
            generated_at,
            input: InputEcho {
                sha256: problem.sha256.clone(),
                name: problem.file.name.clone(),
                format_version: problem.file.format_version,
                mode: if S::EXACT { "exact" } else { "float" }.into(),
                tol: tol.render(),
                seed,
            },
        }
    }

    fn load<S: Scalar>(&self, problem: &Problem) -> Result<(Instance<S>, S), CliError> {
        let tol = self.tol::<S>(problem)?;
        let inst = problem.instance(tol.as_ref())?;
        Ok((inst, tol.unwrap_or_else(S::default_tol)))
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Exists => error::EXISTS,
        Verdict::NotExists => error::NOT_EXISTS,
        Verdict::Inconclusive => error::INCONCLUSIVE,
    }
}

fn check_in<S: Render>(ctx: &Context, problem: &Problem) -> Result<Outcome, CliError> {
    let (inst, tol) = ctx.load::<S>(problem)?;
    let cert = certify(&inst, &tol)?;
    let doc = CertificateFile::new(ctx.header("certificate", problem, &tol, None), &cert, &inst.polytope.warnings);
    Outcome::new(&doc, verdict_code(cert.verdict))
}

pub fn check(ctx: &Context, problem: &Problem) -> Result<Outcome, CliError> {
    if ctx.exact(problem) {
        check_in::<BigRational>(ctx, problem)
    } else {
        check_in::<f64>(ctx, problem)
    }
}

fn extremal_in<S: Render>(ctx: &Context, problem: &Problem) -> Result<Outcome, CliError> {
    let (inst, tol) = ctx.load::<S>(problem)?;
    Outcome::new(&ExtremalFile::new(ctx.header("extremal", problem, &tol, None), &inst.extremal), error::EXISTS)
}

pub fn extremal(ctx: &Context, problem: &Problem) -> Result<Outcome, CliError> {
    if ctx.exact(problem) {
        extremal_in::<BigRational>(ctx, problem)
    } else {
        extremal_in::<f64>(ctx, problem)
    }
}

fn futaki_in<S: Render>(ctx: &Context, problem: &Problem, y: &str) -> Result<Outcome, CliError> {
    let (inst, tol) = ctx.load::<S>(problem)?;
    let y: Vec<S> = parse_list(y)?;
    let value = futaki(&inst.datum, &inst.table, &y, &tol)?;
    let doc = FutakiFile { header: ctx.header("futaki", problem, &tol, None), y: render_vec(&y), futaki: value.render() };
    Outcome::new(&doc, error::EXISTS)
}

pub fn futaki_cmd(ctx: &Context, problem: &Problem, y: &str) -> Result<Outcome, CliError> {
    if ctx.exact(problem) {
        futaki_in::<BigRational>(ctx, problem, y)
    } else {
        futaki_in::<f64>(ctx, problem, y)
    }
}

fn float_instance(ctx: &Context, problem: &Problem) -> Result<(Instance<f64>, f64), CliError> {
    if ctx.exact(problem) {
        let (inst, tol) = ctx.load::<BigRational>(problem)?;
        Ok((inst.to_f64(), tol.as_f64().max(f64::default_tol())))
    } else {
        ctx.load::<f64>(problem)
    }
}

pub fn ding_eval(ctx: &Context, problem: &Problem, path: &str) -> Result<Outcome, CliError> {
    let (inst, tol) = float_instance(ctx, problem)?;
    let quad = problem.quad_config();
    let u = normalize(&potential::load(path, &inst.datum)?, &inst.datum)?;
    let l = eval_l(&u, &inst)?;
    let f = eval_f(&u, &inst.datum, &quad)?;
    let doc = DingFile {
        header: ctx.header("ding", problem, &tol, None),
        support_points: u.fundamental.len(),
        l: Num::float(l),
        f: Num::float(f),
        d: Num::float(l + f),
    };
    Outcome::new(&doc, error::EXISTS)
}

pub struct SolveFiles<'a> {
    pub config: Option<&'a str>,
    pub history: Option<&'a str>,
    pub potential: Option<&'a str>,
}

pub fn solve_cmd(ctx: &Context, problem: &Problem, files: &SolveFiles) -> Result<Outcome, CliError> {
    let (inst, tol) = float_instance(ctx, problem)?;
    let mut cfg = problem.solver_config()?;
    if let Some(path) = files.config {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let opts: SolverOptions =
            serde_json::from_slice(&bytes).map_err(|e| CliError::input("InvalidConfig", e.to_string()))?;
        opts.apply(&mut cfg)?;
    }
    let sol = solve(&inst, &cfg)?;
    if let Some(path) = files.history {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::input("Io", format!("{path}: {e}")))?;
        let fail = |e: csv::Error| CliError::numeric(e.to_string());
        w.write_record(["iter", "D", "residual", "sup_norm"]).map_err(fail)?;
        for row in &sol.history {
            w.write_record([row.iter.to_string(), format!("{:?}", row.d), format!("{:?}", row.residual), format!("{:?}", row.sup_norm)])
                .map_err(fail)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    if let Some(path) = files.potential {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        potential::write_csv(file, &sol.potential)?;
    }
    let code = match sol.status {
        Status::Converged => error::EXISTS,
        Status::Diverged => error::NOT_EXISTS,
        Status::MaxIter => error::INCONCLUSIVE,
    };
    let doc = SolutionFile {
        header: ctx.header("solution", problem, &tol, None),
        status: sol.status.as_str().into(),
        divisions: cfg.resolved_divisions(inst.datum.rank),
        iterations: sol.history.last().map_or(0, |r| r.iter),
        d_value: Num::float(sol.d_value),
        stationarity: Num::float(sol.stationarity),
        pushforward: Num::float(sol.pushforward),
        history_csv: files.history.map(str::to_string),
        potential: PotentialBlock { points: sol.potential.fundamental.clone(), values: sol.potential.fundamental_values() },
    };
    Outcome::new(&doc, code)
}

fn probe_in<S: Render>(ctx: &Context, problem: &Problem, rays: usize) -> Result<Outcome, CliError> {
    let (inst, tol) = ctx.load::<S>(problem)?;
    let seed = ctx.seed(problem);
    let cert = certify(&inst, &tol)?;
    let sampled = sample_chamber_rays(&inst.datum.convert::<f64>(), rays, seed);
    let rays: Vec<Vec<S>> = sampled
        .iter()
        .map(|r| r.iter().map(|x| S::from_float(*x).unwrap_or_else(S::zero)).collect())
        .collect();
    let report = necessity_probe(&cert, &inst.datum, &rays, &tol)?;
    if !report.consistent {
        return Err(CliError {
            code: error::NUMERIC_FAILURE,
            kind: "ProbeContradiction".into(),
            message: "a chamber ray contradicts the certificate verdict".into(),
            details: serde_json::Value::Null,
        });
    }
    let doc = ProbeFile {
        header: ctx.header("probe", problem, &tol, Some(seed)),
        verdict: cert.verdict.as_str().into(),
        rays: report.rays.iter().map(|r| render_vec(r)).collect(),
        pairings: render_vec(&report.pairings),
        negative_found: report.negative_found,
        consistent: report.consistent,
    };
    Outcome::new(&doc, error::EXISTS)
}

pub fn probe(ctx: &Context, problem: &Problem, rays: usize) -> Result<Outcome, CliError> {
    if ctx.exact(problem) {
        probe_in::<BigRational>(ctx, problem, rays)
    } else {
        probe_in::<f64>(ctx, problem, rays)
    }
}

fn reference_values<S: Render>(inst: &Instance<S>, tol: &S) -> Result<Vec<(String, Num)>, CliError> {
    let cert = certify(inst, tol)?;
    let mut rows = vec![("volume".to_string(), cert.volume.render())];
    for (i, v) in cert.b.iter().enumerate() {
        rows.push((format!("b[{i}]"), v.render()));
    }
    for (i, v) in cert.b_x.iter().enumerate() {
        rows.push((format!("b_x[{i}]"), v.render()));
    }
    Ok(rows)
}

pub fn oracle_mc(ctx: &Context, problem: &Problem, samples: usize) -> Result<Outcome, CliError> {
    let seed = ctx.seed(problem);
    let (inst, tol, exact) = if ctx.exact(problem) {
        let (inst, tol) = ctx.load::<BigRational>(problem)?;
        let exact = reference_values(&inst, &tol)?;
        (inst.to_f64(), tol.as_f64(), exact)
    } else {
        let (inst, tol) = ctx.load::<f64>(problem)?;
        let exact = reference_values(&inst, &tol)?;
        (inst, tol, exact)
    };
    let r = inst.datum.rank;
    let unit = |i: usize| {
        let mut e = vec![0.0; r];
        e[i] = 1.0;
        Poly::linear(&e, 0.0)
    };
    let weighted = inst.weighted_density();
    let mut funcs = vec![inst.density.clone()];
    funcs.extend((0..r).map(|i| unit(i).mul(&inst.density)));
    funcs.extend((0..r).map(|i| unit(i).mul(&weighted)));
    let mc = mc_joint(&funcs, &inst.polytope, seed, samples)?;
    let mut estimates = vec![mc.estimate(0)];
    estimates.extend((0..r).map(|i| mc.ratio(&[(1 + i, 1.0)], 0)));
    estimates.extend((0..r).map(|i| mc.ratio(&[(1 + r + i, 1.0)], 0)));
    let mut max_z = 0.0f64;
    let rows = exact
        .into_iter()
        .zip(estimates)
        .map(|((quantity, value), est)| {
            let reference = value.decimal.parse::<f64>().unwrap_or(f64::NAN);
            let z = if est.stderr > 0.0 { (est.value - reference).abs() / est.stderr } else { 0.0 };
            max_z = max_z.max(z);
            McRow { quantity, exact: value, estimate: Num::float(est.value), stderr: Num::float(est.stderr), z: Num::float(z) }
        })
        .collect();
    let doc = OracleFile {
        header: ctx.header("oracle_mc", problem, &tol, Some(seed)),
        samples,
        rows,
        max_z: Num::float(max_z),
    };
    Outcome::new(&doc, error::EXISTS)
}
