//! Closed-form convergence-rate theory for over-relaxed ADMM.
//!
//! Everything here is a pure function of a handful of scalars: the curvature
//! bounds `m` and `L` of the smooth term, the extreme singular values of the
//! constraint matrix `A`, and the two method parameters `alpha` (relaxation)
//! and `rho` (penalty). The rate certificate reads
//!
//! ```text
//! ‖φ_t − φ*‖ ≤ κ_B · √χ(η) · τ^t
//! τ = 1 − α / (1 + χ(ρ0)·√κ)
//! η = α/(2 − α) · (χ(ρ0)·√κ − 1) / (χ(ρ0)·√κ + 1)
//! ```
//!
//! with `χ(x) = max(x, 1/x)`, `ρ0 = ρ·(m̂·L̂)^(−1/2)`, `m̂ = m/σ₁²`,
//! `L̂ = L/σ_p²` and `κ = (L/m)·(σ₁/σ_p)²`.

use std::fmt;

use crate::error::{domain, Result};

/// Default distance of the over-relaxation parameter from its supremum 2
/// used by [`optimal_params`].
pub const DEFAULT_ALPHA_MARGIN: f64 = 1e-2;

/// `χ(x) = max(x, 1/x)`: multiplicative distance of `x` from one.
pub fn chi(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain("x", x, "must be positive and finite"));
    }
    Ok(x.max(x.recip()))
}

/// Curvature bounds of `f` and the extreme singular values of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningInfo {
    m: f64,
    l: f64,
    sigma_max: f64,
    sigma_min: f64,
}

impl ConditioningInfo {
    /// Validates `0 < m ≤ L < ∞` and `0 < sigma_min ≤ sigma_max < ∞`.
    pub fn new(m: f64, l: f64, sigma_max: f64, sigma_min: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(domain("m", m, "must be positive and finite"));
        }
        if !(l >= m && l.is_finite()) {
            return Err(domain("L", l, "must satisfy m <= L < inf"));
        }
        if !(sigma_min > 0.0 && sigma_min.is_finite()) {
            return Err(domain("sigma_min", sigma_min, "must be positive and finite"));
        }
        if !(sigma_max >= sigma_min && sigma_max.is_finite()) {
            return Err(domain(
                "sigma_max",
                sigma_max,
                "must satisfy sigma_min <= sigma_max < inf",
            ));
        }
        Ok(Self {
            m,
            l,
            sigma_max,
            sigma_min,
        })
    }

    /// Curvature bounds only, with `A = I`.
    pub fn with_identity_constraint(m: f64, l: f64) -> Result<Self> {
        Self::new(m, l, 1.0, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `κ_f = L/m`.
    pub fn kappa_f(&self) -> f64 {
        self.l / self.m
    }

    /// `κ_A = σ₁/σ_p`.
    pub fn kappa_a(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    /// `κ = κ_f · κ_A²`.
    pub fn kappa(&self) -> f64 {
        let ka = self.kappa_a();
        self.kappa_f() * ka * ka
    }

    /// The penalty that makes `ρ0 = 1`: `√(mL) / (σ₁·σ_p)`.
    pub fn balanced_rho(&self) -> f64 {
        (self.m * self.l).sqrt() / (self.sigma_max * self.sigma_min)
    }

    /// Inverse of the `rho → rho0` map of [`normalize`].
    pub fn rho_from_rho0(&self, rho0: f64) -> f64 {
        rho0 * self.balanced_rho()
    }
}

/// The two scalars every rate formula depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedConstants {
    pub rho0: f64,
    pub kappa: f64,
}

/// Maps a penalty `rho` and the conditioning of the problem to `(ρ0, κ)`.
pub fn normalize(cond: &ConditioningInfo, rho: f64) -> Result<NormalizedConstants> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain("rho", rho, "must be positive and finite"));
    }
    let m_hat = cond.m / (cond.sigma_max * cond.sigma_max);
    let l_hat = cond.l / (cond.sigma_min * cond.sigma_min);
    Ok(NormalizedConstants {
        rho0: rho / (m_hat * l_hat).sqrt(),
        kappa: cond.kappa(),
    })
}

/// One member of the ADMM family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmParams {
    pub alpha: f64,
    pub rho: f64,
}

impl AdmmParams {
    /// Accepts any `alpha > 0`; the rate formulas additionally require
    /// `alpha < 2` and check that themselves.
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain("alpha", alpha, "must be positive and finite"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(domain("rho", rho, "must be positive and finite"));
        }
        Ok(Self { alpha, rho })
    }
}

fn check_rate_domain(alpha: f64, rho0: f64, kappa: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain("alpha", alpha, "rate bound requires 0 < alpha < 2"));
    }
    check_kappa(kappa)?;
    Ok(chi(rho0)? * kappa.sqrt())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(domain("kappa", kappa, "must satisfy 1 <= kappa < inf"));
    }
    Ok(())
}

/// Linear rate `τ = 1 − α / (1 + χ(ρ0)·√κ)`.
pub fn tau_a(alpha: f64, rho0: f64, kappa: f64) -> Result<f64> {
    let s = check_rate_domain(alpha, rho0, kappa)?;
    Ok(1.0 - alpha / (1.0 + s))
}

/// `η = α/(2 − α) · (χ(ρ0)·√κ − 1) / (χ(ρ0)·√κ + 1)`, the quantity that
/// controls the constant in front of `τ^t`.
pub fn eta(alpha: f64, rho0: f64, kappa: f64) -> Result<f64> {
    let s = check_rate_domain(alpha, rho0, kappa)?;
    Ok(alpha / (2.0 - alpha) * (s - 1.0) / (s + 1.0))
}

/// A multiplicative constant that is either finite or has degenerated.
///
/// The bound constant `κ_B·√χ(η)` diverges at `η = 0`; that case is kept
/// as an explicit variant so callers cannot mistake it for a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundConstant {
    Finite(f64),
    Unbounded,
}

impl BoundConstant {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundConstant::Finite(v) => Some(v),
            BoundConstant::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, BoundConstant::Unbounded)
    }
}

impl fmt::Display for BoundConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundConstant::Finite(v) => write!(f, "{v}"),
            BoundConstant::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Rate `tau`, constant-controlling `eta`, and the multiplicative constant
/// of the envelope `constant · tau^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCertificate {
    pub tau: f64,
    pub eta: f64,
    pub constant: BoundConstant,
}

impl RateCertificate {
    /// Envelope value `constant · tau^t`.
    pub fn bound_at(&self, t: u32) -> BoundConstant {
        match self.constant {
            BoundConstant::Finite(c) => BoundConstant::Finite(c * powu(self.tau, t)),
            BoundConstant::Unbounded => BoundConstant::Unbounded,
        }
    }
}

fn powu(x: f64, t: u32) -> f64 {
    match i32::try_from(t) {
        Ok(t) => x.powi(t),
        Err(_) => x.powf(f64::from(t)),
    }
}

/// Bundles `tau_a`, `eta` and the constant `kappa_b · √χ(η)`.
///
/// `kappa_b` is the condition number of `B` (1 whenever `B` is a multiple of
/// an orthogonal matrix).
pub fn certificate(alpha: f64, rho0: f64, kappa: f64, kappa_b: f64) -> Result<RateCertificate> {
    if !(kappa_b >= 1.0 && kappa_b.is_finite()) {
        return Err(domain("kappa_b", kappa_b, "must satisfy 1 <= kappa_b < inf"));
    }
    let tau = tau_a(alpha, rho0, kappa)?;
    let eta = eta(alpha, rho0, kappa)?;
    let constant = if eta > 0.0 {
        BoundConstant::Finite(kappa_b * chi(eta)?.sqrt())
    } else {
        BoundConstant::Unbounded
    };
    Ok(RateCertificate { tau, eta, constant })
}

/// Free-function form of [`RateCertificate::bound_at`].
pub fn bound_at(cert: &RateCertificate, t: u32) -> BoundConstant {
    cert.bound_at(t)
}

/// Parameters approaching the best asymptotic rate: `ρ` chosen so that
/// `ρ0 = 1`, and `α = 2 − alpha_margin`.
///
/// The certificate is computed with `κ_B = 1`.
pub fn optimal_params(
    cond: &ConditioningInfo,
    alpha_margin: f64,
) -> Result<(AdmmParams, RateCertificate)> {
    if !(alpha_margin > 0.0 && alpha_margin < 1.0) {
        return Err(domain(
            "alpha_margin",
            alpha_margin,
            "must satisfy 0 < alpha_margin < 1",
        ));
    }
    let params = AdmmParams::new(2.0 - alpha_margin, cond.balanced_rho())?;
    let nc = normalize(cond, params.rho)?;
    let cert = certificate(params.alpha, nc.rho0, nc.kappa, 1.0)?;
    Ok((params, cert))
}

/// Infimum of `tau_a` over `α ∈ (0, 2)` and `ρ0 > 0`: `1 − 2/(1 + √κ)`.
///
/// The same expression bounds every first-order method on functions with
/// condition number `κ` from below; see [`ComparisonRates`].
pub fn inf_rate(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(1.0 - 2.0 / (1.0 + kappa.sqrt()))
}

/// The relaxation parameter minimizing the envelope `√χ(η)·τ^t` at a fixed
/// iteration `t ≥ 1`.
///
/// With `s = χ(ρ0)·√κ`:
///
/// ```text
/// α = 1 + 1/s                                  if t ≤ s
/// α = 1 + (1 + √(1 + 4t² − 4ts)) / (2t)        otherwise
/// ```
pub fn best_alpha(rho0: f64, kappa: f64, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(domain("t", 0.0, "iteration count must be at least 1"));
    }
    check_kappa(kappa)?;
    let s = chi(rho0)? * kappa.sqrt();
    let t = f64::from(t);
    if t <= s {
        Ok(1.0 + 1.0 / s)
    } else {
        let disc = 1.0 + 4.0 * t * t - 4.0 * t * s;
        Ok(1.0 + (1.0 + disc.sqrt()) / (2.0 * t))
    }
}

/// Value of [`best_alpha`] in the limit `κ → ∞` at fixed `t`.
pub const BEST_ALPHA_LARGE_KAPPA_LIMIT: f64 = 1.0;

/// Reference rates from neighbouring analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRates {
    /// Douglas–Rachford splitting with step `alpha`: `1 − α/(1 + √κ_f)`.
    pub dr_rate: f64,
    /// `1 − 1/√κ`; an approximation, only meaningful for `α = 1, ρ0 = 1`.
    pub wei_rate: f64,
    /// Lower bound for any first-order method: `1 − 2/(1 + √κ)`.
    pub first_order_lower: f64,
}

impl ComparisonRates {
    pub const WEI_RATE_NOTE: &'static str = "approximate, valid for alpha = 1, rho0 = 1 only";
}

pub fn comparison_rates(alpha: f64, kappa_f: f64, kappa: f64) -> Result<ComparisonRates> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain("alpha", alpha, "must be positive and finite"));
    }
    check_kappa(kappa_f).map_err(|_| domain("kappa_f", kappa_f, "must satisfy 1 <= kappa_f < inf"))?;
    check_kappa(kappa)?;
    Ok(ComparisonRates {
        dr_rate: 1.0 - alpha / (1.0 + kappa_f.sqrt()),
        wei_rate: 1.0 - 1.0 / kappa.sqrt(),
        first_order_lower: 1.0 - 2.0 / (1.0 + kappa.sqrt()),
    })
}
