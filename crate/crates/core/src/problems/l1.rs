use nalgebra::DVector;

/// Euclidean projection of `v` onto `{z : ‖z‖₁ ≤ lambda}`.
///
/// Soft-thresholds at the unique `θ ≥ 0` with `Σ max(|vᵢ| − θ, 0) = λ`,
/// found by sorting the magnitudes. Points already inside the ball are
/// returned unchanged; `lambda ≤ 0` collapses the ball to the origin.
pub fn project_l1_ball(v: &DVector<f64>, lambda: f64) -> DVector<f64> {
    if lambda <= 0.0 {
        return DVector::zeros(v.len());
    }
    if v.lp_norm(1) <= lambda {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));

    // Largest k with mags[k] > (Σ_{j≤k} mags[j] − λ)/(k + 1). k = 0 always
    // qualifies, even when λ is below the resolution of mags[0].
    let mut cumsum = mags[0];
    let mut theta = mags[0] - lambda;
    for (k, &mk) in mags.iter().enumerate().skip(1) {
        cumsum += mk;
        let candidate = (cumsum - lambda) / (k + 1) as f64;
        if mk > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn interior_point_unchanged() {
        let x = v(&[0.2, -0.3, 0.1]);
        assert_eq!(project_l1_ball(&x, 1.0), x);
    }

    #[test]
    fn known_projections() {
        assert!((project_l1_ball(&v(&[3.0, 0.0]), 1.0) - v(&[1.0, 0.0])).amax() < 1e-15);
        assert!((project_l1_ball(&v(&[2.0, 1.0]), 1.0) - v(&[1.0, 0.0])).amax() < 1e-15);
        assert!((project_l1_ball(&v(&[-2.0, 1.0]), 1.0) - v(&[-1.0, 0.0])).amax() < 1e-15);
        assert!((project_l1_ball(&v(&[1.0, 1.0]), 1.0) - v(&[0.5, 0.5])).amax() < 1e-15);
    }

    #[test]
    fn degenerate_radius() {
        assert_eq!(project_l1_ball(&v(&[3.0, -1.0]), 0.0), v(&[0.0, 0.0]));
        assert!(project_l1_ball(&v(&[3.0, -1.0]), 1e-300).amax() <= 1e-300);
    }

    proptest! {
        #[test]
        fn feasible_idempotent_nonexpansive(
            a in prop::collection::vec(-10.0..10.0f64, 1..12),
            b in prop::collection::vec(-10.0..10.0f64, 12),
            lambda in 0.01..5.0f64,
        ) {
            let x = DVector::from_vec(a.clone());
            let y = DVector::from_column_slice(&b[..a.len()]);
            let px = project_l1_ball(&x, lambda);
            let py = project_l1_ball(&y, lambda);
            prop_assert!(px.lp_norm(1) <= lambda + 1e-12);
            prop_assert!((project_l1_ball(&px, lambda) - &px).amax() <= 1e-12);
            prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-12);
        }
    }
}
