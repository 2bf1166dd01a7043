use std::fs;
use std::path::Path;

use bregcut::harness::checks::{run_suites, Fault};
use bregcut::harness::trace_io::format_float;
use bregcut::harness::{
    fit_linear_rate, generate_instance, metrics, write_trace_csv, ConstraintKind, NoiseKind,
    ProblemInstance, TraceColumn,
};
use bregcut::linalg::norm2;
use bregcut::{
    fdpg_solve, solve as run_solver, ConvexSet, FdpgConfig, InnerObjective, Kernel, SolveResult,
    SolverConfig, StepSizeRule,
};
use serde::Serialize;

use crate::{
    CheckArgs, CompareArgs, ConstraintArg, FaultArg, GenerateArgs, KernelArg, ModelArgs, NoiseArg,
    ReferenceArgs, RuleArg, SolveArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    PropertyFailure(String),
    #[error("{0}")]
    NotConverged(String),
    #[error(transparent)]
    Library(#[from] bregcut::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Library(e) => match e {
                bregcut::Error::Io(_) | bregcut::Error::Csv(_) | bregcut::Error::Json(_) => 3,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn constraint_kind(c: ConstraintArg) -> ConstraintKind {
    match c {
        ConstraintArg::Point => ConstraintKind::Point,
        ConstraintArg::L2ball => ConstraintKind::L2Ball,
        ConstraintArg::Linfbox => ConstraintKind::LinfBox,
    }
}

fn constraint_name(c: ConstraintArg) -> &'static str {
    match c {
        ConstraintArg::Point => "point",
        ConstraintArg::L2ball => "l2ball",
        ConstraintArg::Linfbox => "linfbox",
    }
}

fn rule_name(r: RuleArg) -> &'static str {
    match r {
        RuleArg::Exact => "exact",
        RuleArg::Constant => "constant",
        RuleArg::Dynamic => "dynamic",
    }
}

fn fmt(v: f64) -> String {
    format_float(v)
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let noise = match a.noise {
        NoiseArg::None => NoiseKind::None,
        NoiseArg::Gaussian => NoiseKind::Gaussian,
        NoiseArg::Uniform => NoiseKind::Uniform,
    };
    let p = generate_instance(a.m, a.n, a.sparsity, noise, a.noise_scale, a.seed)?;
    p.save(&a.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    println!(
        "m={} n={} sparsity={} seed={} sigma={} lambda={}",
        p.m(),
        p.n(),
        a.sparsity,
        a.seed,
        fmt(p.sigma),
        fmt(p.lambda)
    );
    Ok(())
}

/// A loaded problem with the kernel and constraint chosen on the command line.
struct Model {
    instance: ProblemInstance,
    kernel: Kernel,
    set: ConvexSet,
    objective: InnerObjective,
}

impl Model {
    fn load(a: &ModelArgs) -> Result<Self> {
        let text = fs::read_to_string(&a.problem)
            .map_err(|e| CliError::Io(format!("{}: {e}", a.problem.display())))?;
        let mut instance = ProblemInstance::from_json(&text)?;
        if let Some(l) = a.lambda {
            instance.lambda = Kernel::elastic_net(l)?.lambda();
        }
        let kernel = match a.kernel {
            KernelArg::Elasticnet => instance.kernel(),
            KernelArg::Quadratic => Kernel::Quadratic,
        };
        let kind = constraint_kind(a.constraint);
        Ok(Self {
            set: instance.constraint(kind)?,
            objective: instance.objective(kind)?,
            instance,
            kernel,
        })
    }

    /// The planted signal, when it satisfies the constraint.
    fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        let ax = self.instance.a.mul_vec(&self.instance.x_true)?;
        let d = self.set.distance(&ax)?;
        Ok((d <= 1e-9 * norm2(self.set.center()).max(1.0)).then(|| self.instance.x_true.clone()))
    }

    fn rule(&self, r: RuleArg, t: Option<f64>, clamp: bool) -> Result<StepSizeRule> {
        if t.is_some() && r != RuleArg::Constant {
            return Err(CliError::Usage(
                "--t only applies to the constant rule".into(),
            ));
        }
        if clamp && r != RuleArg::Dynamic {
            return Err(CliError::Usage(
                "--clamp only applies to the dynamic rule".into(),
            ));
        }
        Ok(match r {
            RuleArg::Exact => StepSizeRule::Exact,
            RuleArg::Constant => {
                StepSizeRule::Constant(t.unwrap_or(self.kernel.mu() / self.objective.lipschitz()))
            }
            RuleArg::Dynamic => StepSizeRule::Dynamic { clamp },
        })
    }

    fn config(
        &self,
        rule: StepSizeRule,
        max_iters: usize,
        tol: Option<f64>,
    ) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(rule)
            .max_iters(max_iters)
            .grad_tol(tol.unwrap_or_else(|| SolverConfig::default_grad_tol(&self.objective)))
            .reference(self.instance.x_true.clone());
        if let Some(x) = self.feasible_point()? {
            cfg = cfg.feasible_point(x);
        }
        cfg.validate(&self.kernel, &self.objective)?;
        Ok(cfg)
    }

    fn run(&self, cfg: &SolverConfig) -> Result<SolveResult> {
        Ok(run_solver(
            &self.kernel,
            &self.objective,
            cfg,
            &vec![0.0; self.instance.n()],
            None,
        )?)
    }

    fn summary(&self, x: &[f64]) -> Result<Summary> {
        let m = metrics(&self.instance, x, &self.set)?;
        Ok(Summary {
            feas: m.feas,
            recon_err: m.recon_err,
            omega_val: self.kernel.value(x),
            f_val: self.objective.value(x)?,
        })
    }
}

struct Summary {
    feas: f64,
    recon_err: f64,
    omega_val: f64,
    f_val: f64,
}

impl Summary {
    fn kv(&self) -> String {
        format!(
            "feas={} recon_err={} omega_val={} f_val={}",
            fmt(self.feas),
            fmt(self.recon_err),
            fmt(self.omega_val),
            fmt(self.f_val)
        )
    }
}

fn write_trace(res: &SolveResult, path: &Path) -> Result<()> {
    write_trace_csv(&res.trace, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let model = Model::load(&a.model)?;
    let rule = model.rule(a.stepsize, a.t, a.clamp)?;
    let cfg = model
        .config(rule, a.max_iters, a.tol)?
        .record_trace(a.trace.is_some());
    let res = model.run(&cfg)?;
    if let Some(path) = &a.trace {
        write_trace(&res, path)?;
    }
    let s = model.summary(&res.x_final)?;
    println!(
        "rule={} converged={} iterations={} {}",
        rule.name(),
        res.converged,
        res.iterations_used,
        s.kv()
    );
    if !res.converged {
        return Err(CliError::NotConverged(format!(
            "gradient norm above tolerance after {} iterations",
            res.iterations_used
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReferenceFile<'a> {
    x_ref: &'a [f64],
    omega: f64,
    feas: f64,
    recon_err: f64,
    iterations: usize,
    converged: bool,
    lambda: f64,
    constraint: &'static str,
}

pub fn reference(a: &ReferenceArgs) -> Result<()> {
    if a.model.kernel != KernelArg::Elasticnet && a.model.lambda.is_some() {
        return Err(CliError::Usage(
            "--lambda needs the elasticnet kernel".into(),
        ));
    }
    let model = Model::load(&a.model)?;
    let f = fdpg_solve(
        &model.instance.a,
        &model.set,
        &model.kernel,
        &FdpgConfig {
            max_iters: a.max_iters,
            tol: a.tol,
            ..FdpgConfig::default()
        },
    )?;
    let s = model.summary(&f.x)?;
    let file = ReferenceFile {
        x_ref: &f.x,
        omega: s.omega_val,
        feas: s.feas,
        recon_err: s.recon_err,
        iterations: f.iterations,
        converged: f.converged,
        lambda: model.kernel.lambda(),
        constraint: constraint_name(a.model.constraint),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&a.out, json + "\n")
        .map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    println!(
        "converged={} iterations={} {}",
        f.converged,
        f.iterations,
        s.kv()
    );
    if !f.converged {
        return Err(CliError::NotConverged(format!(
            "FDPG did not reach tol {} in {} iterations",
            a.tol, f.iterations
        )));
    }
    Ok(())
}

pub fn check(a: &CheckArgs) -> Result<()> {
    if a.cases == 0 {
        return Err(CliError::Usage("--cases must be at least 1".into()));
    }
    let fault = a.inject_fault.map(|f| match f {
        FaultArg::MinShrink => Fault::MinFormShrinkage,
        FaultArg::Overshoot => Fault::OvershootStep,
    });
    let reports = run_suites(a.seed, a.cases, fault)?;
    let mut failed = Vec::new();
    for r in &reports {
        println!(
            "suite={} cases={} failures={} worst={} status={}",
            r.name,
            r.cases,
            r.failures,
            fmt(r.worst),
            if r.passed() { "pass" } else { "fail" }
        );
        if !r.passed() {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::PropertyFailure(format!(
            "failing suites: {}",
            failed.join(", ")
        )))
    }
}

struct Row {
    name: &'static str,
    iterations: usize,
    converged: bool,
    summary: Summary,
    rate: Option<(f64, f64)>,
}

const SUMMARY_HEADER: [&str; 10] = [
    "rule",
    "iterations",
    "converged",
    "feas",
    "recon_err",
    "omega_val",
    "f_val",
    "feas_slope",
    "feas_factor",
    "feas_r2",
];

impl Row {
    fn print(&self) {
        let rate = match self.rate {
            Some((slope, r2)) => format!(" feas_slope={} feas_r2={}", fmt(slope), fmt(r2)),
            None => String::new(),
        };
        println!(
            "rule={} converged={} iterations={} {}{rate}",
            self.name,
            self.converged,
            self.iterations,
            self.summary.kv()
        );
    }

    fn record(&self) -> Vec<String> {
        let (slope, factor, r2) = match self.rate {
            Some((s, r2)) => (fmt(s), fmt(s.exp()), fmt(r2)),
            None => Default::default(),
        };
        vec![
            self.name.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            fmt(self.summary.feas),
            fmt(self.summary.recon_err),
            fmt(self.summary.omega_val),
            fmt(self.summary.f_val),
            slope,
            factor,
            r2,
        ]
    }
}

fn compare_rule(model: &Model, a: &CompareArgs, rule: RuleArg) -> Result<Row> {
    let t = if rule == RuleArg::Constant { a.t } else { None };
    let step = model.rule(rule, t, a.clamp && rule == RuleArg::Dynamic)?;
    let cfg = model.config(step, a.max_iters, a.tol)?;
    let res = model.run(&cfg)?;
    write_trace(
        &res,
        &a.out_dir.join(format!("trace_{}.csv", rule_name(rule))),
    )?;
    let last = res.trace.last().map_or(0, |r| r.k);
    let rate = fit_linear_rate(&res.trace, TraceColumn::Feas, (0, last))
        .ok()
        .map(|f| (f.slope, f.r_squared));
    Ok(Row {
        name: rule_name(rule),
        iterations: res.iterations_used,
        converged: res.converged,
        summary: model.summary(&res.x_final)?,
        rate,
    })
}

fn compare_reference(model: &Model, a: &CompareArgs) -> Result<Row> {
    let f = fdpg_solve(
        &model.instance.a,
        &model.set,
        &model.kernel,
        &FdpgConfig {
            max_iters: a.reference_iters,
            tol: a.reference_tol,
            ..FdpgConfig::default()
        },
    )?;
    Ok(Row {
        name: "fdpg",
        iterations: f.iterations,
        converged: f.converged,
        summary: model.summary(&f.x)?,
        rate: None,
    })
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    if a.rules.is_empty() {
        return Err(CliError::Usage(
            "--rules needs at least one of exact, constant, dynamic".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = a.rules.iter().find(|r| !seen.insert(**r)) {
        return Err(CliError::Usage(format!(
            "rule {} listed twice",
            rule_name(*dup)
        )));
    }
    if a.t.is_some() && !a.rules.contains(&RuleArg::Constant) {
        return Err(CliError::Usage(
            "--t only applies to the constant rule".into(),
        ));
    }
    let model = Model::load(&a.model)?;
    // reject bad step sizes before any solve runs
    for &r in &a.rules {
        let t = if r == RuleArg::Constant { a.t } else { None };
        model.config(
            model.rule(r, t, a.clamp && r == RuleArg::Dynamic)?,
            a.max_iters,
            a.tol,
        )?;
    }
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;

    let results: Vec<Result<Row>> = std::thread::scope(|s| {
        let model = &model;
        let mut handles: Vec<_> = a
            .rules
            .iter()
            .map(|&r| s.spawn(move || compare_rule(model, a, r)))
            .collect();
        if a.reference_iters > 0 {
            handles.push(s.spawn(move || compare_reference(model, a)));
        }
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Io("solver thread panicked".into())))
            })
            .collect()
    });

    let path = a.out_dir.join("summary.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    let mut first_error = None;
    let mut unconverged = Vec::new();
    for r in results {
        match r {
            Ok(row) => {
                row.print();
                w.write_record(row.record()).map_err(io)?;
                if !row.converged && row.name != "fdpg" {
                    unconverged.push(row.name);
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    w.flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if let Some(e) = first_error {
        return Err(e);
    }
    if !unconverged.is_empty() {
        return Err(CliError::NotConverged(format!(
            "not converged: {}",
            unconverged.join(", ")
        )));
    }
    Ok(())
}
