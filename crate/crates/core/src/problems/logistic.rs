use nalgebra::{DMatrix, DVector};

use super::dataset::ClassificationDataset;
use super::l1::project_l1_ball;
use crate::engine::Problem;
use crate::error::{domain, Error, Result};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX_ITERS: usize = 100;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
/// Below this Newton decrement the objective change sits at round-off level
/// and the line search can no longer tell steps apart.
const FULL_STEP_DECREMENT: f64 = 1e-10;

/// `log(1 + e^{−t})`, stable for large `|t|`.
fn log1p_exp_neg(t: f64) -> f64 {
    (-t).max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `σ(t) = 1/(1 + e^{−t})`, stable for large `|t|`.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Sparse logistic regression over an L1 ball:
///
/// ```text
/// f(θ) = (1/N) Σ log(1 + exp(−yᵢ θᵀxᵢ)),   g(θ) = indicator(‖θ‖₁ ≤ λ)
/// ```
///
/// split as `x − z = 0` (`A = I`, `B = −I`, `c = 0`).
#[derive(Debug, Clone)]
pub struct LogisticL1Instance {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    lambda: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DVector<f64>,
}

impl LogisticL1Instance {
    pub fn new(data: &ClassificationDataset, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain("lambda", lambda, "must be positive and finite"));
        }
        let d = data.d();
        Ok(Self {
            features: data.features.clone(),
            labels: data.labels.clone(),
            lambda,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iters: DEFAULT_NEWTON_MAX_ITERS,
            a: DMatrix::identity(d, d),
            b: -DMatrix::identity(d, d),
            c: DVector::zeros(d),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn n(&self) -> f64 {
        self.features.nrows() as f64
    }

    /// Margins `yᵢ θᵀxᵢ`.
    fn margins(&self, theta: &DVector<f64>) -> DVector<f64> {
        (&self.features * theta).component_mul(&self.labels)
    }

    /// Smooth loss `f(θ)`.
    pub fn loss(&self, theta: &DVector<f64>) -> f64 {
        self.margins(theta).iter().map(|&m| log1p_exp_neg(m)).sum::<f64>() / self.n()
    }

    /// `∇f(θ) = −(1/N) Σ yᵢ σ(−yᵢθᵀxᵢ) xᵢ`.
    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let w = self
            .margins(theta)
            .zip_map(&self.labels, |m, y| -y * sigmoid(-m) / self.n());
        self.features.tr_mul(&w)
    }

    /// `∇²f(θ) = (1/N) Σ σ(mᵢ)(1 − σ(mᵢ)) xᵢxᵢᵀ`.
    pub fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let w = self.margins(theta).map(|m| {
            let s = sigmoid(m);
            s * (1.0 - s) / self.n()
        });
        let mut scaled = self.features.clone();
        for (mut row, wi) in scaled.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        self.features.tr_mul(&scaled)
    }

    /// Minimizes `f(θ) + (ρ/2)‖θ − v‖²` by damped Newton with halving
    /// backtracking.
    pub fn prox_loss(&self, v: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        let objective = |th: &DVector<f64>| self.loss(th) + 0.5 * rho * (th - v).norm_squared();
        let d = v.len();
        let mut theta = v.clone();
        let mut grad_norm = f64::INFINITY;
        for iter in 0..self.newton_max_iters {
            let grad = self.gradient(&theta) + rho * (&theta - v);
            grad_norm = grad.norm();
            if grad_norm <= self.newton_tol {
                return Ok(theta);
            }
            let hess = self.hessian(&theta) + rho * DMatrix::identity(d, d);
            let dir = -hess
                .cholesky()
                .ok_or_else(|| Error::Dimension("Newton system is not positive definite".into()))?
                .solve(&grad);
            let decrement = -grad.dot(&dir);
            let mut t = 1.0;
            if decrement > FULL_STEP_DECREMENT {
                let f0 = objective(&theta);
                while objective(&(&theta + t * &dir)) > f0 - ARMIJO * t * decrement {
                    t *= 0.5;
                    if t < MIN_STEP {
                        return Err(Error::Solver {
                            iterations: iter + 1,
                            gradient_norm: grad_norm,
                        });
                    }
                }
            }
            theta += t * dir;
        }
        let grad = self.gradient(&theta) + rho * (&theta - v);
        if grad.norm() <= self.newton_tol {
            return Ok(theta);
        }
        Err(Error::Solver {
            iterations: self.newton_max_iters,
            gradient_norm: grad_norm.min(grad.norm()),
        })
    }
}

impl Problem for LogisticL1Instance {
    fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// `argmin f(θ) + (ρ/2)‖θ − z + u‖²`.
    fn x_update(&self, z: &DVector<f64>, u: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        self.prox_loss(&(z - u), rho)
    }

    /// Projection of `αx + (1−α)z_prev + u` onto the L1 ball.
    fn z_update(
        &self,
        x: &DVector<f64>,
        z_prev: &DVector<f64>,
        u: &DVector<f64>,
        _rho: f64,
        alpha: f64,
    ) -> Result<DVector<f64>> {
        Ok(project_l1_ball(&(alpha * x + (1.0 - alpha) * z_prev + u), self.lambda))
    }
}

/// Curvature estimate of the logistic loss near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    /// Smallest eigenvalue of the exact Hessian at `θ = 0`, `G/4`.
    pub m: f64,
    /// Largest eigenvalue of the exact Hessian at `θ = 0`.
    pub l: f64,
    pub kappa_f: f64,
    /// Extreme eigenvalues of the unweighted Gram matrix `G = (1/N) Σ xᵢxᵢᵀ`
    /// (the `1/cosh(xᵢᵀθ/2)` weighting evaluated at `θ = 0`).
    pub gram_m: f64,
    pub gram_l: f64,
    /// Certified lower bound on the strong-convexity modulus over the whole
    /// ball `‖θ‖₁ ≤ λ`, using `|xᵢᵀθ| ≤ λ‖xᵢ‖∞`.
    pub m_ball: f64,
}

/// Estimates `(m, L, κ_f)` of the logistic loss from the Gram matrix of the
/// features, evaluating the curvature weight at `θ = 0`.
pub fn estimate_kappa_f(data: &ClassificationDataset, lambda: f64) -> Result<KappaEstimate> {
    let (n, d) = (data.n(), data.d());
    if n < d {
        return Err(Error::Estimation(format!("N = {n} < d = {d}: Gram matrix is singular")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("lambda", lambda, "must be positive and finite"));
    }
    let x = &data.features;
    let gram = x.tr_mul(x) / n as f64;
    let eig = gram.symmetric_eigen().eigenvalues;
    let (gram_m, gram_l) = (eig.min(), eig.max());
    if gram_m <= 1e-12 * gram_l {
        return Err(Error::Estimation(format!(
            "Gram matrix is singular (eigenvalues {gram_m:e} .. {gram_l:e})"
        )));
    }

    let weights = DVector::from_fn(n, |i, _| {
        let s = sigmoid(lambda * x.row(i).amax());
        s * (1.0 - s) / n as f64
    });
    let mut scaled = x.clone();
    for (mut row, wi) in scaled.row_iter_mut().zip(weights.iter()) {
        row *= *wi;
    }
    let m_ball = x.tr_mul(&scaled).symmetric_eigen().eigenvalues.min();

    Ok(KappaEstimate {
        m: gram_m / 4.0,
        l: gram_l / 4.0,
        kappa_f: gram_l / gram_m,
        gram_m,
        gram_l,
        m_ball,
    })
}
