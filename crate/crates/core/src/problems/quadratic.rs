use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::engine::{FixedPoint, Problem};
use crate::error::{domain, Error, Result};
use crate::rate::ConditioningInfo;

/// `f(x) = ½xᵀQx`, `g = 0`, constraint `Ax + Bz = c`.
#[derive(Debug, Clone)]
pub struct QuadraticInstance {
    q: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DVector<f64>,
    ata: DMatrix<f64>,
    /// `(BᵀB)⁻¹Bᵀ`
    b_pinv: DMatrix<f64>,
    cond: ConditioningInfo,
    kappa_b: f64,
}

impl QuadraticInstance {
    /// Builds the instance and derives its conditioning from the spectrum of
    /// `Q` and the singular values of `A`.
    pub fn new(q: DMatrix<f64>, a: DMatrix<f64>, b: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        let p = q.nrows();
        if q.ncols() != p || a.ncols() != p || a.nrows() != c.len() || b.nrows() != c.len() {
            return Err(Error::Dimension(format!(
                "Q {}x{}, A {}x{}, B {}x{}, c {}",
                q.nrows(),
                q.ncols(),
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.len()
            )));
        }
        if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(Error::Dimension("Q must be symmetric".into()));
        }
        let eig = q.clone().symmetric_eigen().eigenvalues;
        let (m, l) = (eig.min(), eig.max());
        let sa = a.clone().singular_values();
        let cond = ConditioningInfo::new(m, l, sa.max(), sa.min())?;
        Self::with_conditioning(q, a, b, c, cond)
    }

    /// Like [`new`](Self::new) but with conditioning supplied by the caller
    /// (typically the exact values the matrices were constructed from).
    pub fn with_conditioning(
        q: DMatrix<f64>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DVector<f64>,
        cond: ConditioningInfo,
    ) -> Result<Self> {
        let sb = b.clone().singular_values();
        if sb.min() <= 1e-12 * sb.max() {
            return Err(Error::Dimension("B must have full column rank".into()));
        }
        let bt = b.transpose();
        let b_pinv = (&bt * &b)
            .cholesky()
            .ok_or_else(|| Error::Dimension("BᵀB is not positive definite".into()))?
            .solve(&bt);
        Ok(Self {
            ata: a.transpose() * &a,
            kappa_b: sb.max() / sb.min(),
            q,
            a,
            b,
            c,
            b_pinv,
            cond,
        })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Condition number of `B`.
    pub fn kappa_b(&self) -> f64 {
        self.kappa_b
    }

    pub fn conditioning_info(&self) -> ConditioningInfo {
        self.cond
    }
}

impl Problem for QuadraticInstance {
    fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    fn c(&self) -> &DVector<f64> {
        &self.c
    }

    fn x_update(&self, z: &DVector<f64>, u: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        // (Q + ρAᵀA)x = ρAᵀ(c − Bz − u)
        let lhs = &self.q + rho * &self.ata;
        let rhs = rho * self.a.transpose() * (&self.c - &self.b * z - u);
        lhs.cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or_else(|| Error::Dimension("Q + ρAᵀA is not positive definite".into()))
    }

    fn z_update(
        &self,
        x: &DVector<f64>,
        z_prev: &DVector<f64>,
        u: &DVector<f64>,
        _rho: f64,
        alpha: f64,
    ) -> Result<DVector<f64>> {
        // g = 0: least-squares solution of Bz = −(αAx − (1−α)Bz_prev − αc + u)
        let w = alpha * (&self.a * x) - (1.0 - alpha) * (&self.b * z_prev) - alpha * &self.c + u;
        Ok(-(&self.b_pinv * w))
    }

    /// With `g = 0` and square `B`, the minimizer is `x* = 0`, `z* = B⁻¹c`
    /// and the dual vanishes.
    fn known_fixed_point(&self, _rho: f64) -> Option<FixedPoint> {
        (self.b.is_square()).then(|| FixedPoint {
            x: DVector::zeros(self.a.ncols()),
            z: &self.b_pinv * &self.c,
            u: DVector::zeros(self.c.len()),
        })
    }

    fn conditioning(&self) -> Option<ConditioningInfo> {
        Some(self.cond)
    }
}

/// `Q = diag(m, L)`, `A = I`, `B = −I`, `c = 0`: the instance whose rate
/// matches the closed-form bound for `ρ0 ≥ 1`.
pub fn make_attainability_instance(m: f64, l: f64) -> Result<QuadraticInstance> {
    let cond = ConditioningInfo::with_identity_constraint(m, l)?;
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![m, l]));
    QuadraticInstance::with_conditioning(
        q,
        DMatrix::identity(2, 2),
        -DMatrix::identity(2, 2),
        DVector::zeros(2),
        cond,
    )
}

/// Random orthogonal matrix (QR of a gaussian matrix, signs fixed so the
/// draw is Haar distributed).
fn random_orthogonal(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Spectrum with both endpoints attained and the interior drawn uniformly.
fn spectrum(p: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let inner = Uniform::new_inclusive(lo, hi).expect("lo <= hi");
    DVector::from_fn(p, |i, _| match i {
        0 => lo,
        1 => hi,
        _ => inner.sample(rng),
    })
}

/// Random strongly convex quadratic with `λ(Q) ⊂ [m, L]` (endpoints
/// attained), `σ(A) ⊂ [1, kappa_a]` (endpoints attained), `B = −I` and a
/// gaussian `c`. Deterministic in `seed`.
pub fn make_random_quadratic(p: usize, seed: u64, m: f64, l: f64, kappa_a: f64) -> Result<QuadraticInstance> {
    if p < 2 {
        return Err(domain("p", p as f64, "must be at least 2"));
    }
    if !(kappa_a >= 1.0 && kappa_a.is_finite()) {
        return Err(domain("kappa_a", kappa_a, "must satisfy 1 <= kappa_a < inf"));
    }
    let cond = ConditioningInfo::new(m, l, kappa_a, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let u = random_orthogonal(p, &mut rng);
    let lam = spectrum(p, m, l, &mut rng);
    let q = &u * DMatrix::from_diagonal(&lam) * u.transpose();
    let q = (&q + q.transpose()) * 0.5;

    let v = random_orthogonal(p, &mut rng);
    let w = random_orthogonal(p, &mut rng);
    let s = spectrum(p, 1.0, kappa_a, &mut rng);
    let a = &v * DMatrix::from_diagonal(&s) * w.transpose();

    let c = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
    QuadraticInstance::with_conditioning(q, a, -DMatrix::identity(p, p), c, cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{fixed_point_of, primal_residual, run, step, IterateState, StoppingRule};
    use crate::rate::{normalize, AdmmParams};

    #[test]
    fn attainability_conditioning() {
        let inst = make_attainability_instance(1.0, 1.0).unwrap();
        assert_eq!(inst.q(), &DMatrix::<f64>::identity(2, 2));
        assert_eq!(inst.conditioning_info().kappa(), 1.0);

        let inst = make_attainability_instance(1.0, 10.0).unwrap();
        let c = inst.conditioning_info();
        assert_eq!((c.kappa(), c.kappa_f(), c.kappa_a()), (10.0, 10.0, 1.0));
        assert_eq!(inst.kappa_b(), 1.0);
        assert!(make_attainability_instance(2.0, 1.0).is_err());
    }

    #[test]
    fn first_step_by_hand() {
        // Q = diag(1, 10), ρ = √10, z₀ = (1, 1), u₀ = 0: x₁ = (Q + ρI)⁻¹ρz₀.
        let inst = make_attainability_instance(1.0, 10.0).unwrap();
        let rho = 10f64.sqrt();
        let init = IterateState::from_zu(&inst, DVector::from_vec(vec![1.0, 1.0]), DVector::zeros(2));
        let next = step(&inst, &init, &AdmmParams::new(1.0, rho).unwrap()).unwrap();
        assert!((next.x[0] - 0.759_746_926_647_958).abs() < 1e-12);
        assert!((next.x[1] - 0.240_253_073_352_042).abs() < 1e-12);
        assert_eq!(next.t, 1);
    }

    /// Classical ADMM written out independently for `g = 0`, `B = −I`.
    fn classical_step(inst: &QuadraticInstance, z: &DVector<f64>, u: &DVector<f64>, rho: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let a = inst.a();
        let lhs = inst.q() + rho * a.transpose() * a;
        let x = lhs.lu().solve(&(rho * a.transpose() * (inst.c() + z - u))).unwrap();
        let z_new = a * &x - inst.c() + u;
        let u_new = u + a * &x - &z_new - inst.c();
        (x, z_new, u_new)
    }

    #[test]
    fn unit_relaxation_is_classical_admm() {
        for seed in 0..8 {
            let inst = make_random_quadratic(4, seed, 0.5, 20.0, 3.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let z = DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
            let u = DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
            let rho = 0.7 + seed as f64;
            let s = IterateState::from_zu(&inst, z.clone(), u.clone());
            let ours = step(&inst, &s, &AdmmParams::new(1.0, rho).unwrap()).unwrap();
            let (x, z1, u1) = classical_step(&inst, &z, &u, rho);
            assert!((ours.x - x).amax() < 1e-10);
            assert!((ours.z - z1).amax() < 1e-10);
            assert!((ours.u - u1).amax() < 1e-10);
        }
    }

    #[test]
    fn random_quadratic_conditioning_is_exact() {
        for seed in 0..10 {
            let (m, l, ka) = (0.3 + seed as f64, 40.0 + seed as f64, 1.0 + 0.5 * seed as f64);
            let inst = make_random_quadratic(2 + seed as usize % 7, seed, m, l, ka).unwrap();
            let recomputed = QuadraticInstance::new(inst.q().clone(), inst.a().clone(), inst.b().clone(), inst.c().clone()).unwrap();
            let c = recomputed.conditioning_info();
            assert!((c.m() - m).abs() < 1e-10, "m {} vs {m}", c.m());
            assert!((c.l() - l).abs() < 1e-10);
            assert!((c.sigma_max() - ka).abs() < 1e-10);
            assert!((c.sigma_min() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_quadratic_degenerate_and_deterministic() {
        let inst = make_random_quadratic(2, 9, 1.0, 1.0, 1.0).unwrap();
        assert!((inst.q() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        let a = make_random_quadratic(5, 3, 1.0, 4.0, 2.0).unwrap();
        let b = make_random_quadratic(5, 3, 1.0, 4.0, 2.0).unwrap();
        assert_eq!(a.q(), b.q());
        assert_eq!(a.c(), b.c());
        assert!(make_random_quadratic(1, 0, 1.0, 2.0, 1.0).is_err());
        assert!(make_random_quadratic(3, 0, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn fixed_points() {
        let inst = make_attainability_instance(1.0, 5.0).unwrap();
        let fp = fixed_point_of(&inst, &AdmmParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(fp.z, DVector::zeros(2));
        assert_eq!(fp.u, DVector::zeros(2));

        // Translated instance: the closed form agrees with a long run and
        // satisfies the constraint.
        let inst = make_random_quadratic(4, 11, 1.0, 6.0, 2.0).unwrap();
        let params = AdmmParams::new(1.2, 1.5).unwrap();
        let fp = inst.known_fixed_point(params.rho).unwrap();
        assert!(primal_residual(&inst, &fp.x, &fp.z) < 1e-12);
        let stop = StoppingRule::iterations(400).unwrap();
        let trace = run(&inst, &params, IterateState::initial(&inst), &stop).unwrap();
        let end = &trace.final_state;
        assert!((&end.z - &fp.z).norm() < 1e-9);
        assert!((&end.x - &fp.x).norm() < 1e-9);
    }

    #[test]
    fn rate_never_exceeds_bound() {
        for seed in 0..5 {
            let inst = make_random_quadratic(6, seed, 1.0, 30.0, 2.0).unwrap();
            let cond = inst.conditioning_info();
            for rho0 in [0.5, 1.0, 2.0] {
                let params = AdmmParams::new(1.5, cond.rho_from_rho0(rho0)).unwrap();
                let nc = normalize(&cond, params.rho).unwrap();
                let tau = crate::rate::tau_a(params.alpha, nc.rho0, nc.kappa).unwrap();
                let trace = run(&inst, &params, IterateState::initial(&inst), &StoppingRule::iterations(400).unwrap()).unwrap();
                let d0 = trace.initial_distance.unwrap();
                for (t, d) in trace.distances() {
                    assert!(d <= d0 * tau.powi(t as i32) * (1.0 + 1e-9) + 1e-15);
                }
            }
        }
    }
}
