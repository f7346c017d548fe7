use std::fmt::Write as _;
use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use relaxed_admm::engine::{estimate_rate_tail, RateMetric, DISTANCE_FLOOR};
use relaxed_admm::problems::{
    estimate_kappa_f, generate_classification_data, make_attainability_instance, make_random_quadratic,
    ClassificationDataset, LogisticL1Instance, QuadraticInstance,
};
use relaxed_admm::rate::BEST_ALPHA_LARGE_KAPPA_LIMIT;
use relaxed_admm::{
    best_alpha, certificate, fixed_point_of, inf_rate, normalize, optimal_params, run, run_with, tau_a, AdmmParams,
    BoundConstant, ConditioningInfo, IterateState, Problem, RunOptions, StoppingRule,
};

use crate::config::ConfigLayer;
use crate::grid::Grid;
use crate::output::{Cell, Table};
use crate::{CliError, Common, CommonArgs, Outcome, Status};

/// Largest allowed gap between fitted and predicted rates in `certify`.
pub const CERTIFY_TOLERANCE: f64 = 1e-3;

/// Floor for logistic rate fits: the reference optimum is only accurate to
/// about 1e-12, so distances near it carry no rate information.
pub const LOGISTIC_FIT_FLOOR: f64 = 1e-9;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("--{flag} is required (on the command line or in the config file)")))
}

fn bound_cell(b: BoundConstant) -> Cell {
    match b {
        BoundConstant::Finite(x) => Cell::Num(x),
        BoundConstant::Unbounded => Cell::Text("unbounded".into()),
    }
}

// ---------------------------------------------------------------- tune

#[derive(Debug, Clone, Default, Args)]
pub struct TuneArgs {
    /// Strong convexity modulus of f.
    #[arg(long)]
    pub m: Option<f64>,
    /// Lipschitz constant of the gradient of f.
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    /// Iteration count for the finite-horizon relaxation parameter.
    #[arg(long)]
    pub t: Option<u32>,
    /// Distance of the asymptotic alpha from 2 [default: 0.01].
    #[arg(long)]
    pub alpha_margin: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSettings {
    pub m: f64,
    pub l: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub t: Option<u32>,
    pub alpha_margin: f64,
}

impl TuneSettings {
    pub fn resolve(a: &TuneArgs, cfg: &mut ConfigLayer) -> Result<Self, CliError> {
        Ok(Self {
            m: required(cfg.f64("m", a.m)?, "m")?,
            l: required(cfg.f64("l", a.l)?, "l")?,
            sigma_max: cfg.f64("sigma-max", a.sigma_max)?.unwrap_or(1.0),
            sigma_min: cfg.f64("sigma-min", a.sigma_min)?.unwrap_or(1.0),
            t: cfg.u64("t", a.t.map(u64::from))?.map(|t| t as u32),
            alpha_margin: cfg
                .f64("alpha-margin", a.alpha_margin)?
                .unwrap_or(relaxed_admm::rate::DEFAULT_ALPHA_MARGIN),
        })
    }
}

pub fn tune_from_args(a: &TuneArgs, cfg: &mut ConfigLayer) -> Result<(Common, Outcome), CliError> {
    let common = Common::resolve(&a.common, cfg)?;
    let s = TuneSettings::resolve(a, cfg)?;
    cfg.finish()?;
    Ok((common, tune(&s)?))
}

pub fn tune(s: &TuneSettings) -> Result<Outcome, CliError> {
    let cond = ConditioningInfo::new(s.m, s.l, s.sigma_max, s.sigma_min)?;
    let (params, cert) = optimal_params(&cond, s.alpha_margin)?;
    let kappa = cond.kappa();
    let inf = inf_rate(kappa)?;

    let mut report = String::new();
    let _ = writeln!(report, "kappa_f = {}, kappa_A = {}, kappa = {}", cond.kappa_f(), cond.kappa_a(), kappa);
    let _ = writeln!(report, "rho* = {} (rho0 = 1)", params.rho);
    let _ = writeln!(
        report,
        "asymptotic: alpha = {}, tau = {}, bound constant = {}; infimum over alpha < 2 is {}",
        params.alpha, cert.tau, cert.constant, inf
    );

    let (mut t_alpha, mut t_tau, mut t_bound) = (Cell::Empty, Cell::Empty, Cell::Empty);
    if let Some(t) = s.t {
        let alpha = best_alpha(1.0, kappa, t)?;
        t_alpha = Cell::Num(alpha);
        // With kappa = 1 and t = 1 the recommendation is alpha = 2 itself,
        // where no finite bound exists.
        match certificate(alpha, 1.0, kappa, 1.0) {
            Ok(c) => {
                t_tau = Cell::Num(c.tau);
                t_bound = bound_cell(c.bound_at(t));
                let _ = writeln!(report, "t = {t}: alpha = {alpha}, bound at t = {}", c.bound_at(t));
            }
            Err(_) => {
                let _ = writeln!(report, "t = {t}: alpha = {alpha} (boundary, no finite bound)");
            }
        }
    }

    let mut table = Table::new(vec![
        "m",
        "l",
        "sigma_max",
        "sigma_min",
        "kappa",
        "rho_star",
        "alpha",
        "tau",
        "bound_constant",
        "inf_rate",
        "t",
        "alpha_t",
        "tau_t",
        "bound_t",
    ]);
    table.push(vec![
        Cell::Num(s.m),
        Cell::Num(s.l),
        Cell::Num(s.sigma_max),
        Cell::Num(s.sigma_min),
        Cell::Num(kappa),
        Cell::Num(params.rho),
        Cell::Num(params.alpha),
        Cell::Num(cert.tau),
        bound_cell(cert.constant),
        Cell::Num(inf),
        s.t.map_or(Cell::Empty, |t| Cell::Int(t.into())),
        t_alpha,
        t_tau,
        t_bound,
    ]);
    Ok(Outcome {
        table,
        report,
        status: Status::Success,
    })
}

// ---------------------------------------------------------------- rate-sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ProblemKind {
    #[default]
    Attainability,
    RandomQuadratic,
    Logistic,
}

impl ProblemKind {
    fn id(self) -> &'static str {
        match self {
            ProblemKind::Attainability => "attainability",
            ProblemKind::RandomQuadratic => "random-quadratic",
            ProblemKind::Logistic => "logistic",
        }
    }
}

pub const DEFAULT_SWEEP_ALPHAS: &str = "0.5,1,1.5,1.9";
pub const DEFAULT_SWEEP_RHO0S: &str = "0.5,1,2";
pub const DEFAULT_SWEEP_KAPPAS: &str = "log:1:1e4:9";

#[derive(Debug, Clone, Default, Args)]
pub struct RateSweepArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    /// Relaxation grid: list `a,b,c` or `lin:start:stop:count` or `log:start:stop:count` [default: 0.5,1,1.5,1.9].
    #[arg(long)]
    pub alphas: Option<Grid>,
    /// Normalized penalty grid [default: 0.5,1,2].
    #[arg(long)]
    pub rho0s: Option<Grid>,
    /// Condition number grid [default: log:1:1e4:9].
    #[arg(long)]
    pub kappas: Option<Grid>,
    /// Also run ADMM at every grid point and fit the empirical rate.
    #[arg(long)]
    pub simulate: bool,
    /// Iterations per simulated run [default: 600].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Dimension of random quadratic instances [default: 4].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Condition number of A for random quadratic instances [default: 1].
    #[arg(long)]
    pub kappa_a: Option<f64>,
    /// Add a wall_time_s column (makes the output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSweepSettings {
    pub problem: ProblemKind,
    pub alphas: Vec<f64>,
    pub rho0s: Vec<f64>,
    pub kappas: Vec<f64>,
    pub simulate: bool,
    pub iters: usize,
    pub dim: usize,
    pub kappa_a: f64,
    pub seed: u64,
    pub timing: bool,
}

impl Default for RateSweepSettings {
    fn default() -> Self {
        let grid = |s: &str| s.parse::<Grid>().expect("default grid").0;
        Self {
            problem: ProblemKind::Attainability,
            alphas: grid(DEFAULT_SWEEP_ALPHAS),
            rho0s: grid(DEFAULT_SWEEP_RHO0S),
            kappas: grid(DEFAULT_SWEEP_KAPPAS),
            simulate: false,
            iters: 600,
            dim: 4,
            kappa_a: 1.0,
            seed: 0,
            timing: false,
        }
    }
}

impl RateSweepSettings {
    pub fn resolve(a: &RateSweepArgs, cfg: &mut ConfigLayer, seed: u64) -> Result<Self, CliError> {
        let d = Self::default();
        let problem = match (a.problem, cfg.string("problem", None)?) {
            (Some(p), _) => p,
            (None, Some(s)) => ProblemKind::from_str(&s, true).map_err(|e| usage(format!("config key problem: {e}")))?,
            (None, None) => d.problem,
        };
        let s = Self {
            problem,
            alphas: cfg.grid("alphas", a.alphas.clone())?.map_or(d.alphas, |g| g.0),
            rho0s: cfg.grid("rho0s", a.rho0s.clone())?.map_or(d.rho0s, |g| g.0),
            kappas: cfg.grid("kappas", a.kappas.clone())?.map_or(d.kappas, |g| g.0),
            simulate: cfg.bool("simulate", a.simulate)?,
            iters: cfg.usize("iters", a.iters)?.unwrap_or(d.iters),
            dim: cfg.usize("dim", a.dim)?.unwrap_or(d.dim),
            kappa_a: cfg.f64("kappa-a", a.kappa_a)?.unwrap_or(d.kappa_a),
            seed,
            timing: cfg.bool("timing", a.timing)?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.problem == ProblemKind::Logistic {
            return Err(usage(
                "rate-sweep cannot prescribe kappa for the logistic problem; use classify-sweep instead",
            ));
        }
        for (name, grid) in [("alphas", &self.alphas), ("rho0s", &self.rho0s), ("kappas", &self.kappas)] {
            if grid.is_empty() {
                return Err(usage(format!("--{name} grid is empty")));
            }
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a < 2.0)) {
            return Err(usage(format!(
                "alpha = {a} is outside (0, 2), where the closed-form rate bound holds"
            )));
        }
        if let Some(r) = self.rho0s.iter().find(|&&r| r <= 0.0) {
            return Err(usage(format!("rho0 = {r} must be positive")));
        }
        if let Some(k) = self.kappas.iter().find(|&&k| k < 1.0) {
            return Err(usage(format!("kappa = {k} must be at least 1")));
        }
        if self.simulate && self.iters == 0 {
            return Err(usage("--iters must be at least 1"));
        }
        if self.problem == ProblemKind::RandomQuadratic {
            if self.dim < 2 {
                return Err(usage("--dim must be at least 2"));
            }
            if !(self.kappa_a >= 1.0 && self.kappa_a.is_finite()) {
                return Err(usage(format!("--kappa-a = {} must be at least 1", self.kappa_a)));
            }
            if let Some(k) = self.kappas.iter().find(|&&k| k < self.kappa_a * self.kappa_a) {
                return Err(usage(format!(
                    "kappa = {k} is below kappa_A^2 = {}, leaving no room for kappa_f >= 1",
                    self.kappa_a * self.kappa_a
                )));
            }
        }
        Ok(())
    }
}

pub fn rate_sweep_from_args(a: &RateSweepArgs, cfg: &mut ConfigLayer) -> Result<(Common, Outcome), CliError> {
    let common = Common::resolve(&a.common, cfg)?;
    let s = RateSweepSettings::resolve(a, cfg, common.seed)?;
    cfg.finish()?;
    Ok((common, rate_sweep(&s)?))
}

fn sorted_unique(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

struct SweepRow {
    alpha: f64,
    rho0: f64,
    kappa: f64,
    tau: f64,
    bound: BoundConstant,
    empirical: Option<f64>,
    note: Option<String>,
    seconds: f64,
}

fn sweep_instance(s: &RateSweepSettings, kappa: f64) -> Result<QuadraticInstance, relaxed_admm::Error> {
    match s.problem {
        ProblemKind::RandomQuadratic => {
            make_random_quadratic(s.dim, s.seed, 1.0, kappa / (s.kappa_a * s.kappa_a), s.kappa_a)
        }
        _ => make_attainability_instance(1.0, kappa),
    }
}

fn sweep_point(s: &RateSweepSettings, alpha: f64, rho0: f64, kappa: f64) -> Result<SweepRow, CliError> {
    let start = Instant::now();
    let cert = certificate(alpha, rho0, kappa, 1.0)?;
    let (mut empirical, mut note) = (None, None);
    if s.simulate {
        let inst = sweep_instance(s, kappa)?;
        let params = AdmmParams::new(alpha, inst.conditioning_info().rho_from_rho0(rho0))?;
        let trace = run(&inst, &params, IterateState::initial(&inst), &StoppingRule::iterations(s.iters)?)?;
        match estimate_rate_tail(&trace, RateMetric::State, DISTANCE_FLOOR) {
            Ok(r) => empirical = Some(r),
            Err(e) => note = Some(e.to_string()),
        }
    }
    Ok(SweepRow {
        alpha,
        rho0,
        kappa,
        tau: cert.tau,
        bound: cert.constant,
        empirical,
        note,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Rows are ordered by `(alpha, rho0, kappa)` regardless of how the grid
/// points are scheduled.
pub fn rate_sweep(s: &RateSweepSettings) -> Result<Outcome, CliError> {
    s.validate()?;
    let mut points = Vec::new();
    for &alpha in &sorted_unique(&s.alphas) {
        for &rho0 in &sorted_unique(&s.rho0s) {
            for &kappa in &sorted_unique(&s.kappas) {
                points.push((alpha, rho0, kappa));
            }
        }
    }
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(alpha, rho0, kappa)| sweep_point(s, alpha, rho0, kappa))
        .collect::<Result<_, _>>()?;

    let mut columns = vec![
        "problem",
        "alpha",
        "rho0",
        "kappa",
        "tau_theory",
        "tau_empirical",
        "bound_constant",
    ];
    if s.timing {
        columns.push("wall_time_s");
    }
    let mut table = Table::new(columns);
    let mut report = String::new();
    let mut worst_excess = f64::NEG_INFINITY;
    for r in &rows {
        let mut cells = vec![
            Cell::Text(s.problem.id().into()),
            Cell::Num(r.alpha),
            Cell::Num(r.rho0),
            Cell::Num(r.kappa),
            Cell::Num(r.tau),
            Cell::opt(r.empirical),
            bound_cell(r.bound),
        ];
        if s.timing {
            cells.push(Cell::Num(r.seconds));
        }
        table.push(cells);
        if let Some(e) = r.empirical {
            worst_excess = worst_excess.max(e - r.tau);
        }
        if let Some(note) = &r.note {
            let _ = writeln!(
                report,
                "no rate fit at alpha = {}, rho0 = {}, kappa = {}: {note}",
                r.alpha, r.rho0, r.kappa
            );
        }
    }
    let _ = writeln!(report, "{} grid points ({})", rows.len(), s.problem.id());
    if worst_excess.is_finite() {
        let _ = writeln!(report, "largest empirical - theoretical rate: {worst_excess:.3e}");
    }
    Ok(Outcome {
        table,
        report,
        status: Status::Success,
    })
}

// ---------------------------------------------------------------- classify-sweep

pub const DEFAULT_CLASSIFY_ALPHAS: &str = "1.0,1.2,1.4,1.6,1.8";

#[derive(Debug, Clone, Default, Args)]
pub struct ClassifyArgs {
    /// Number of samples [default: 400].
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of features [default: 20].
    #[arg(long)]
    pub d: Option<usize>,
    /// Per-coordinate noise standard deviation [default: 1].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Radius of the L1 ball [default: 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Penalty [default: sqrt(m L) from the curvature estimate].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Relaxation grid [default: 1.0,1.2,1.4,1.6,1.8].
    #[arg(long)]
    pub alphas: Option<Grid>,
    /// Iterations per run [default: 300].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Read the dataset from this headerless CSV instead of generating it.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Save the dataset used to this CSV.
    #[arg(long)]
    pub export_data: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifySettings {
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub rho: Option<f64>,
    pub alphas: Vec<f64>,
    pub iters: usize,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub export_data: Option<PathBuf>,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            n: 400,
            d: 20,
            sigma: 1.0,
            lambda: 1.0,
            rho: None,
            alphas: DEFAULT_CLASSIFY_ALPHAS.parse::<Grid>().expect("default grid").0,
            iters: 300,
            seed: 0,
            data: None,
            export_data: None,
        }
    }
}

impl ClassifySettings {
    pub fn resolve(a: &ClassifyArgs, cfg: &mut ConfigLayer, seed: u64) -> Result<Self, CliError> {
        let d = Self::default();
        let path = |cfg: &mut ConfigLayer, key: &str, cli: &Option<PathBuf>| -> Result<Option<PathBuf>, CliError> {
            let file = cfg.string(key, None)?.map(PathBuf::from);
            Ok(cli.clone().or(file))
        };
        Ok(Self {
            n: cfg.usize("n", a.n)?.unwrap_or(d.n),
            d: cfg.usize("d", a.d)?.unwrap_or(d.d),
            sigma: cfg.f64("sigma", a.sigma)?.unwrap_or(d.sigma),
            lambda: cfg.f64("lambda", a.lambda)?.unwrap_or(d.lambda),
            rho: cfg.f64("rho", a.rho)?,
            alphas: cfg.grid("alphas", a.alphas.clone())?.map_or(d.alphas, |g| g.0),
            iters: cfg.usize("iters", a.iters)?.unwrap_or(d.iters),
            seed,
            data: path(cfg, "data", &a.data)?,
            export_data: path(cfg, "export-data", &a.export_data)?,
        })
    }
}

pub fn classify_from_args(a: &ClassifyArgs, cfg: &mut ConfigLayer) -> Result<(Common, Outcome), CliError> {
    let common = Common::resolve(&a.common, cfg)?;
    let s = ClassifySettings::resolve(a, cfg, common.seed)?;
    cfg.finish()?;
    Ok((common, classify_sweep(&s)?))
}

fn load_dataset(s: &ClassifySettings) -> Result<(ClassificationDataset, String), CliError> {
    match &s.data {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
            let data = ClassificationDataset::read_csv(file)?;
            Ok((data, format!("read from {}", path.display())))
        }
        None => {
            let data = generate_classification_data(s.n, s.d, s.sigma, s.seed)?;
            let origin = format!("generated with N = {}, d = {}, sigma = {}, seed = {}", s.n, s.d, s.sigma, s.seed);
            Ok((data, origin))
        }
    }
}

/// Generates (or reads) one dataset, solves it to high accuracy once, then
/// fits the linear rate of `‖θ_t − θ*‖` for every alpha.
pub fn classify_sweep(s: &ClassifySettings) -> Result<Outcome, CliError> {
    if s.alphas.is_empty() {
        return Err(usage("--alphas grid is empty"));
    }
    if let Some(a) = s.alphas.iter().find(|&&a| !(a > 0.0 && a < 2.0)) {
        return Err(usage(format!("alpha = {a} is outside (0, 2)")));
    }
    if s.iters == 0 {
        return Err(usage("--iters must be at least 1"));
    }
    if !(s.lambda > 0.0 && s.lambda.is_finite()) {
        return Err(usage(format!("--lambda = {} must be positive", s.lambda)));
    }
    let (data, origin) = load_dataset(s)?;
    if data.n() < data.d() {
        return Err(usage(format!("N = {} is smaller than d = {}", data.n(), data.d())));
    }
    if let Some(path) = &s.export_data {
        let file = File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        data.write_csv(file)?;
    }

    let est = estimate_kappa_f(&data, s.lambda)?;
    let cond = ConditioningInfo::with_identity_constraint(est.m, est.l)?;
    let rho = s.rho.unwrap_or_else(|| cond.balanced_rho());
    let rho0 = normalize(&cond, rho)?.rho0;
    let inst = LogisticL1Instance::new(&data, s.lambda)?;

    let reference = fixed_point_of(&inst, &AdmmParams::new(1.0, rho)?)
        .map_err(|e| CliError::Inconclusive(format!("reference solution failed: {e}")))?;
    let theta = &reference.x;
    let nonzeros = theta.iter().filter(|x| x.abs() > 1e-9).count();
    let ref_residual = (inst.a() * theta + inst.b() * &reference.z - inst.c()).norm();

    let opts = RunOptions {
        snapshots: false,
        reference: Some(reference.clone()),
    };
    let stop = StoppingRule::iterations(s.iters)?;
    let alphas = sorted_unique(&s.alphas);
    let fits: Vec<(f64, Result<f64, relaxed_admm::Error>)> = alphas
        .par_iter()
        .map(|&alpha| {
            let fit = AdmmParams::new(alpha, rho)
                .and_then(|p| run_with(&inst, &p, IterateState::initial(&inst), &stop, &opts))
                .and_then(|trace| estimate_rate_tail(&trace, RateMetric::Primal, LOGISTIC_FIT_FLOOR));
            (alpha, fit)
        })
        .collect();

    let recommended = best_alpha(rho0, est.kappa_f, s.iters as u32)?;
    let mut report = String::new();
    let _ = writeln!(report, "dataset: {origin} (N = {}, d = {})", data.n(), data.d());
    let _ = writeln!(
        report,
        "curvature at theta = 0: m = {:.6e}, L = {:.6e}, kappa_f = {:.6}",
        est.m, est.l, est.kappa_f
    );
    let _ = writeln!(
        report,
        "unweighted Gram: m = {:.6e}, L = {:.6e}; lower bound on m over the ball: {:.6e}",
        est.gram_m, est.gram_l, est.m_ball
    );
    let _ = writeln!(report, "rho = {rho:.6} (rho0 = {rho0:.6})");
    let _ = writeln!(
        report,
        "reference: |theta*|_1 = {:.12} (lambda = {}), {nonzeros} nonzeros, loss = {:.12}, residual = {ref_residual:.3e}",
        theta.lp_norm(1),
        s.lambda,
        inst.loss(theta)
    );
    let _ = writeln!(
        report,
        "recommended alpha at t = {}: {recommended:.6} (tends to {BEST_ALPHA_LARGE_KAPPA_LIMIT} as kappa grows)",
        s.iters
    );

    let mut table = Table::new(vec!["alpha", "tau_empirical", "log_tau"]);
    let mut status = Status::Success;
    let mut best: Option<(f64, f64)> = None;
    for (alpha, fit) in fits {
        match fit {
            Ok(tau) => {
                table.push(vec![Cell::Num(alpha), Cell::Num(tau), Cell::Num(tau.ln())]);
                if best.map_or(true, |(_, b)| tau < b) {
                    best = Some((alpha, tau));
                }
            }
            Err(e) => {
                table.push(vec![Cell::Num(alpha), Cell::Empty, Cell::Empty]);
                let _ = writeln!(report, "alpha = {alpha}: {e}");
                status = Status::Inconclusive;
            }
        }
    }
    if let Some((alpha, tau)) = best {
        let _ = writeln!(report, "fastest alpha: {alpha} (tau = {tau:.6})");
    }
    Ok(Outcome { table, report, status })
}

// ---------------------------------------------------------------- certify

#[derive(Debug, Clone, Default, Args)]
pub struct CertifyArgs {
    /// Smaller eigenvalue [default: 1].
    #[arg(long)]
    pub m: Option<f64>,
    /// Larger eigenvalue.
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Normalized penalty [default: 1].
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Iterations [default: 300].
    #[arg(long)]
    pub iters: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifySettings {
    pub m: f64,
    pub l: f64,
    pub alpha: f64,
    pub rho0: f64,
    pub iters: usize,
}

impl CertifySettings {
    pub fn resolve(a: &CertifyArgs, cfg: &mut ConfigLayer) -> Result<Self, CliError> {
        Ok(Self {
            m: cfg.f64("m", a.m)?.unwrap_or(1.0),
            l: required(cfg.f64("l", a.l)?, "l")?,
            alpha: required(cfg.f64("alpha", a.alpha)?, "alpha")?,
            rho0: cfg.f64("rho0", a.rho0)?.unwrap_or(1.0),
            iters: cfg.usize("iters", a.iters)?.unwrap_or(300),
        })
    }
}

pub fn certify_from_args(a: &CertifyArgs, cfg: &mut ConfigLayer) -> Result<(Common, Outcome), CliError> {
    let common = Common::resolve(&a.common, cfg)?;
    let s = CertifySettings::resolve(a, cfg)?;
    cfg.finish()?;
    Ok((common, certify(&s)?))
}

/// Runs the attainability instance and compares the fitted rate with the
/// closed form.
pub fn certify(s: &CertifySettings) -> Result<Outcome, CliError> {
    if !(s.alpha > 0.0 && s.alpha < 2.0) {
        return Err(usage(format!(
            "alpha = {} is outside (0, 2), where the closed-form rate holds",
            s.alpha
        )));
    }
    if s.iters == 0 {
        return Err(usage("--iters must be at least 1"));
    }
    let inst = make_attainability_instance(s.m, s.l)?;
    let cond = inst.conditioning_info();
    let params = AdmmParams::new(s.alpha, cond.rho_from_rho0(s.rho0))?;
    let nc = normalize(&cond, params.rho)?;
    let tau = tau_a(s.alpha, nc.rho0, nc.kappa)?;
    let trace = run(&inst, &params, IterateState::initial(&inst), &StoppingRule::iterations(s.iters)?)?;
    let fit = estimate_rate_tail(&trace, RateMetric::State, DISTANCE_FLOOR);

    let mut report = String::new();
    let (empirical, gap, status) = match fit {
        Ok(r) => {
            let gap = (r - tau).abs();
            let status = if gap <= CERTIFY_TOLERANCE { Status::Pass } else { Status::Fail };
            (Some(r), Some(gap), status)
        }
        Err(e) => {
            let _ = writeln!(report, "rate fit failed: {e}");
            (None, None, Status::Inconclusive)
        }
    };
    let label = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        _ => "INCONCLUSIVE",
    };
    let _ = writeln!(
        report,
        "{label}: m = {}, L = {}, alpha = {}, rho0 = {}: tau = {tau:.9}, fitted = {}",
        s.m,
        s.l,
        s.alpha,
        s.rho0,
        empirical.map_or_else(|| "n/a".to_string(), |r| format!("{r:.9}"))
    );

    let mut table = Table::new(vec![
        "m",
        "l",
        "alpha",
        "rho0",
        "kappa",
        "tau_theory",
        "tau_empirical",
        "abs_error",
        "tolerance",
        "status",
    ]);
    table.push(vec![
        Cell::Num(s.m),
        Cell::Num(s.l),
        Cell::Num(s.alpha),
        Cell::Num(s.rho0),
        Cell::Num(nc.kappa),
        Cell::Num(tau),
        Cell::opt(empirical),
        Cell::opt(gap),
        Cell::Num(CERTIFY_TOLERANCE),
        Cell::Text(label.into()),
    ]);
    Ok(Outcome { table, report, status })
}
