//! The over-relaxed ADMM iteration over an abstract problem.
//!
//! For `min f(x) + g(z)` subject to `Ax + Bz = c`, one step reads
//!
//! ```text
//! x⁺ = argmin_x f(x) + (ρ/2)‖Ax + Bz − c + u‖²
//! z⁺ = argmin_w g(w) + (ρ/2)‖αAx⁺ − (1−α)Bz + Bw − αc + u‖²
//! u⁺ = u + αAx⁺ − (1−α)Bz + Bz⁺ − αc
//! ```
//!
//! where `u` is the scaled dual variable. The pair `φ = (z, u)` is the state
//! whose distance to the fixed point is tracked.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rate::{AdmmParams, ConditioningInfo};

/// Dimensions `x ∈ ℝᵖ`, `z ∈ ℝ^q`, `c ∈ ℝʳ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

/// Limit point `(x*, z*, u*)` of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub u: DVector<f64>,
}

impl FixedPoint {
    /// `‖(z, u) − (z*, u*)‖`.
    pub fn distance(&self, z: &DVector<f64>, u: &DVector<f64>) -> f64 {
        ((z - &self.z).norm_squared() + (u - &self.u).norm_squared()).sqrt()
    }
}

/// A problem `min f(x) + g(z)` s.t. `Ax + Bz = c`, exposed through its two
/// proximal subproblems.
///
/// Implementations must not mutate themselves while iterating, so one
/// instance can drive many concurrent runs.
pub trait Problem: Sync {
    fn a(&self) -> &DMatrix<f64>;
    fn b(&self) -> &DMatrix<f64>;
    fn c(&self) -> &DVector<f64>;

    fn dims(&self) -> Dims {
        Dims {
            p: self.a().ncols(),
            q: self.b().ncols(),
            r: self.c().len(),
        }
    }

    /// `argmin_x f(x) + (ρ/2)‖Ax + Bz − c + u‖²`.
    fn x_update(&self, z: &DVector<f64>, u: &DVector<f64>, rho: f64) -> Result<DVector<f64>>;

    /// `argmin_z g(z) + (ρ/2)‖αAx − (1−α)Bz_prev + Bz − αc + u‖²`.
    fn z_update(
        &self,
        x: &DVector<f64>,
        z_prev: &DVector<f64>,
        u: &DVector<f64>,
        rho: f64,
        alpha: f64,
    ) -> Result<DVector<f64>>;

    /// Closed-form fixed point, when the instance has one. `u*` is the
    /// scaled dual, so it may depend on `rho`.
    fn known_fixed_point(&self, _rho: f64) -> Option<FixedPoint> {
        None
    }

    fn conditioning(&self) -> Option<ConditioningInfo> {
        None
    }
}

/// Current iterate and iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub u: DVector<f64>,
    pub t: usize,
}

impl IterateState {
    /// Default start: `z₀` the unit-norm all-ones vector, `u₀ = 0`, `x₀ = 0`.
    pub fn initial<P: Problem + ?Sized>(problem: &P) -> Self {
        let d = problem.dims();
        let z = DVector::from_element(d.q, 1.0 / (d.q as f64).sqrt());
        Self::from_zu(problem, z, DVector::zeros(d.r))
    }

    /// Start from a chosen `(z₀, u₀)`; `x₀` is irrelevant to the iteration
    /// and set to zero.
    pub fn from_zu<P: Problem + ?Sized>(problem: &P, z: DVector<f64>, u: DVector<f64>) -> Self {
        Self {
            x: DVector::zeros(problem.dims().p),
            z,
            u,
            t: 0,
        }
    }

    fn check_dims(&self, d: Dims) -> Result<()> {
        if self.x.len() != d.p || self.z.len() != d.q || self.u.len() != d.r {
            return Err(Error::Dimension(format!(
                "state (x: {}, z: {}, u: {}) does not match problem (p: {}, q: {}, r: {})",
                self.x.len(),
                self.z.len(),
                self.u.len(),
                d.p,
                d.q,
                d.r
            )));
        }
        Ok(())
    }
}

fn check_problem_dims<P: Problem + ?Sized>(problem: &P) -> Result<Dims> {
    let d = problem.dims();
    if problem.a().nrows() != d.r || problem.b().nrows() != d.r {
        return Err(Error::Dimension(format!(
            "A is {}x{}, B is {}x{}, c has length {}",
            problem.a().nrows(),
            problem.a().ncols(),
            problem.b().nrows(),
            problem.b().ncols(),
            d.r
        )));
    }
    Ok(d)
}

/// One pass of the three updates.
pub fn step<P: Problem + ?Sized>(
    problem: &P,
    state: &IterateState,
    params: &AdmmParams,
) -> Result<IterateState> {
    let d = check_problem_dims(problem)?;
    state.check_dims(d)?;
    let AdmmParams { alpha, rho } = *params;

    let x = problem.x_update(&state.z, &state.u, rho)?;
    if x.len() != d.p {
        return Err(Error::Dimension(format!("x_update returned length {}", x.len())));
    }
    let z = problem.z_update(&x, &state.z, &state.u, rho, alpha)?;
    if z.len() != d.q {
        return Err(Error::Dimension(format!("z_update returned length {}", z.len())));
    }

    let (a, b, c) = (problem.a(), problem.b(), problem.c());
    let u = &state.u + alpha * (a * &x) - (1.0 - alpha) * (b * &state.z) + b * &z - alpha * c;

    Ok(IterateState {
        x,
        z,
        u,
        t: state.t + 1,
    })
}

/// `‖Ax + Bz − c‖`.
pub fn primal_residual<P: Problem + ?Sized>(problem: &P, x: &DVector<f64>, z: &DVector<f64>) -> f64 {
    (problem.a() * x + problem.b() * z - problem.c()).norm()
}

/// Stop at the first of: `max_iters` steps, primal residual below
/// `residual_tol`, or distance to the fixed point below `distance_tol`.
/// A tolerance of zero never triggers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    max_iters: usize,
    residual_tol: f64,
    distance_tol: f64,
}

impl StoppingRule {
    pub fn new(max_iters: usize, residual_tol: f64, distance_tol: f64) -> Result<Self> {
        if max_iters == 0 {
            return Err(crate::error::domain("max_iters", 0.0, "must be at least 1"));
        }
        if residual_tol.is_nan() || residual_tol < 0.0 {
            return Err(crate::error::domain("residual_tol", residual_tol, "must be nonnegative"));
        }
        if distance_tol.is_nan() || distance_tol < 0.0 {
            return Err(crate::error::domain("distance_tol", distance_tol, "must be nonnegative"));
        }
        Ok(Self {
            max_iters,
            residual_tol,
            distance_tol,
        })
    }

    /// Fixed iteration budget, no tolerance exits.
    pub fn iterations(max_iters: usize) -> Result<Self> {
        Self::new(max_iters, 0.0, 0.0)
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn residual_tol(&self) -> f64 {
        self.residual_tol
    }

    pub fn distance_tol(&self) -> f64 {
        self.distance_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxIters,
    ResidualTolerance,
    DistanceTolerance,
}

/// One completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    /// `‖φ_t − φ*‖`, when a fixed point is known.
    pub distance: Option<f64>,
    /// `‖x_t − x*‖`, when a fixed point is known.
    pub x_distance: Option<f64>,
    pub primal_residual: f64,
    pub snapshot: Option<IterateState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub params: AdmmParams,
    /// `‖φ₀ − φ*‖`, when a fixed point is known.
    pub initial_distance: Option<f64>,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    pub final_state: IterateState,
}

impl RunTrace {
    pub fn distances(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.records.iter().filter_map(|r| r.distance.map(|d| (r.t, d)))
    }
}

/// Extra knobs for [`run_with`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep a copy of every iterate in the trace.
    pub snapshots: bool,
    /// Fixed point to measure distances against. Falls back to
    /// [`Problem::known_fixed_point`] when `None`.
    pub reference: Option<FixedPoint>,
}

/// Iterates [`step`] until the stopping rule fires.
pub fn run<P: Problem + ?Sized>(
    problem: &P,
    params: &AdmmParams,
    init: IterateState,
    stop: &StoppingRule,
) -> Result<RunTrace> {
    run_with(problem, params, init, stop, &RunOptions::default())
}

pub fn run_with<P: Problem + ?Sized>(
    problem: &P,
    params: &AdmmParams,
    init: IterateState,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let d = check_problem_dims(problem)?;
    init.check_dims(d)?;
    let reference = opts
        .reference
        .clone()
        .or_else(|| problem.known_fixed_point(params.rho));

    let initial_distance = reference.as_ref().map(|fp| fp.distance(&init.z, &init.u));
    let mut state = init;
    let mut records = Vec::with_capacity(stop.max_iters.min(1 << 16));
    let termination = loop {
        state = step(problem, &state, params)?;
        let residual = primal_residual(problem, &state.x, &state.z);
        let distance = reference.as_ref().map(|fp| fp.distance(&state.z, &state.u));
        records.push(TraceRecord {
            t: state.t,
            distance,
            x_distance: reference.as_ref().map(|fp| (&state.x - &fp.x).norm()),
            primal_residual: residual,
            snapshot: opts.snapshots.then(|| state.clone()),
        });
        if residual < stop.residual_tol {
            break Termination::ResidualTolerance;
        }
        if distance.is_some_and(|dist| dist < stop.distance_tol) {
            break Termination::DistanceTolerance;
        }
        if records.len() >= stop.max_iters {
            break Termination::MaxIters;
        }
    };

    Ok(RunTrace {
        params: *params,
        initial_distance,
        records,
        termination,
        final_state: state,
    })
}

/// Distances below this are treated as numerically zero by the rate fit.
pub const DISTANCE_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Minimum number of points a rate fit needs after burn-in.
pub const MIN_FIT_POINTS: usize = 10;

/// Which distance a rate is fitted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMetric {
    /// `‖φ_t − φ*‖` with `φ = (z, u)`.
    State,
    /// `‖x_t − x*‖`.
    Primal,
}

/// Empirical linear rate: `exp(s)` where `s` is the least-squares slope of
/// `log‖φ_t − φ*‖` against `t`, skipping `burn_in` usable records.
pub fn estimate_rate(trace: &RunTrace, burn_in: usize) -> Result<f64> {
    estimate_rate_with(trace, burn_in, RateMetric::State, DISTANCE_FLOOR)
}

/// [`estimate_rate`] with a chosen metric and a distance floor below which
/// records are discarded (useful when the reference point is itself only
/// accurate to some tolerance).
pub fn estimate_rate_with(
    trace: &RunTrace,
    burn_in: usize,
    metric: RateMetric,
    floor: f64,
) -> Result<f64> {
    let points = usable_points(trace, metric, floor);
    if points.len() < burn_in + MIN_FIT_POINTS {
        return Err(Error::Estimation(format!(
            "{} usable records, need at least {} (burn-in {burn_in})",
            points.len(),
            burn_in + MIN_FIT_POINTS
        )));
    }
    Ok(log_slope(&points[burn_in..]).exp())
}

/// Rate fit over the second half of the usable records (but keeping at
/// least [`MIN_FIT_POINTS`]), so that fast transients are discarded.
pub fn estimate_rate_tail(trace: &RunTrace, metric: RateMetric, floor: f64) -> Result<f64> {
    let usable = usable_points(trace, metric, floor).len();
    let burn_in = (usable / 2).min(usable.saturating_sub(MIN_FIT_POINTS));
    estimate_rate_with(trace, burn_in, metric, floor)
}

fn usable_points(trace: &RunTrace, metric: RateMetric, floor: f64) -> Vec<(f64, f64)> {
    trace
        .records
        .iter()
        .filter_map(|r| {
            let d = match metric {
                RateMetric::State => r.distance,
                RateMetric::Primal => r.x_distance,
            }?;
            (d.is_finite() && d > floor).then(|| (r.t as f64, d.ln()))
        })
        .collect()
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mt, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (sty, stt) = points.iter().fold((0.0, 0.0), |(a, b), &(t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    sty / stt
}

/// Iteration cap used by [`fixed_point_of`] when it has to iterate.
pub const FIXED_POINT_MAX_ITERS: usize = 200_000;

/// Successive-iterate tolerance used by [`fixed_point_of`].
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// The fixed point `(x*, z*, u*)` for the given parameters: closed form when
/// the problem provides one, otherwise a long run until successive `φ`
/// differ by less than [`FIXED_POINT_TOL`].
pub fn fixed_point_of<P: Problem + ?Sized>(problem: &P, params: &AdmmParams) -> Result<FixedPoint> {
    if let Some(fp) = problem.known_fixed_point(params.rho) {
        return Ok(fp);
    }
    let mut state = IterateState::initial(problem);
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let next = step(problem, &state, params)?;
        let change = ((&next.z - &state.z).norm_squared() + (&next.u - &state.u).norm_squared()).sqrt();
        state = next;
        if change < FIXED_POINT_TOL {
            return Ok(FixedPoint {
                x: state.x,
                z: state.z,
                u: state.u,
            });
        }
    }
    Err(Error::Estimation(format!(
        "no fixed point within {FIXED_POINT_MAX_ITERS} iterations"
    )))
}
