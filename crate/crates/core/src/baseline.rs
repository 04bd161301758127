//! Calm-water baseline from sea-trial measurements.
//!
//! Each draft condition is described by a power law `P = c·Vⁿ` fitted in
//! log space. Intermediate drafts interpolate the two curves linearly in
//! draft; drafts outside the trial range extrapolate along the same line.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::data::FeatureVector;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{Mode, PowerRegressor};

/// One speed/power measurement from a sea trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeaTrialPoint {
    /// Speed through water, knots.
    pub speed: f64,
    /// Main engine power, kW.
    pub power: f64,
}

impl SeaTrialPoint {
    pub fn new(speed: f64, power: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::domain(format!("sea-trial speed must be positive, got {speed}")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::domain(format!("sea-trial power must be positive, got {power}")));
        }
        Ok(Self { speed, power })
    }
}

/// Calm-water power curve `P = c·Vⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub c: f64,
    pub n: f64,
}

impl PowerCurve {
    pub fn new(c: f64, n: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("power-curve coefficient must be positive, got {c}")));
        }
        if !n.is_finite() {
            return Err(Error::domain("power-curve exponent must be finite"));
        }
        Ok(Self { c, n })
    }

    /// Power in kW at `speed` knots.
    #[inline]
    pub fn evaluate(&self, speed: f64) -> f64 {
        self.c * math::powf(speed, self.n)
    }

    /// `dP/dV = n·c·Vⁿ⁻¹`, kW per knot.
    #[inline]
    pub fn derivative(&self, speed: f64) -> f64 {
        self.n * self.c * math::powf(speed, self.n - 1.0)
    }
}

/// Fits `P = c·Vⁿ` by ordinary least squares of `ln P` on `ln V`.
///
/// The slope of the log-log line is `n` and `c = exp(intercept)`. Points are
/// unweighted.
pub fn fit_power_curve(points: &[SeaTrialPoint]) -> Result<PowerCurve> {
    for p in points {
        if !(p.speed > 0.0 && p.power > 0.0) {
            return Err(Error::domain(format!(
                "sea-trial point ({}, {}) must have positive speed and power",
                p.speed, p.power
            )));
        }
    }
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 sea-trial points, got {}",
            points.len()
        )));
    }

    let count = points.len() as f64;
    let (sum_x, sum_y) = points.iter().fold((0.0, 0.0), |(sx, sy), p| {
        (sx + math::ln(p.speed), sy + math::ln(p.power))
    });
    let mean_x = sum_x / count;
    let mean_y = sum_y / count;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in points {
        let dx = math::ln(p.speed) - mean_x;
        let dy = math::ln(p.power) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("sea-trial points need at least 2 distinct speeds".into()));
    }

    let n = sxy / sxx;
    let c = math::exp(mean_y - n * mean_x);
    PowerCurve::new(c, n)
}

/// Ballast and laden power curves with their drafts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeaTrialBaseline {
    pub ballast: PowerCurve,
    pub laden: PowerCurve,
    /// Ballast draft, metres.
    pub ballast_draft: f64,
    /// Laden draft, metres.
    pub laden_draft: f64,
}

impl SeaTrialBaseline {
    pub fn new(ballast: PowerCurve, ballast_draft: f64, laden: PowerCurve, laden_draft: f64) -> Result<Self> {
        if !(ballast_draft.is_finite() && laden_draft.is_finite() && ballast_draft < laden_draft) {
            return Err(Error::config(format!(
                "ballast draft ({ballast_draft}) must be below laden draft ({laden_draft})"
            )));
        }
        Ok(Self {
            ballast,
            laden,
            ballast_draft,
            laden_draft,
        })
    }

    /// Fits both curves from their sea-trial points.
    pub fn fit(
        ballast_points: &[SeaTrialPoint],
        ballast_draft: f64,
        laden_points: &[SeaTrialPoint],
        laden_draft: f64,
    ) -> Result<Self> {
        Self::new(
            fit_power_curve(ballast_points)?,
            ballast_draft,
            fit_power_curve(laden_points)?,
            laden_draft,
        )
    }

    /// Interpolation weight of the laden curve at `draft`; 0 at ballast, 1 at laden.
    #[inline]
    pub fn laden_weight(&self, draft: f64) -> f64 {
        (draft - self.ballast_draft) / (self.laden_draft - self.ballast_draft)
    }

    /// Calm-water power at (`speed`, `draft`), kW.
    pub fn power(&self, speed: f64, draft: f64) -> Result<f64> {
        check_speed(speed)?;
        let w = self.laden_weight(draft);
        Ok((1.0 - w) * self.ballast.evaluate(speed) + w * self.laden.evaluate(speed))
    }

    /// Speed derivative of [`power`](Self::power), kW per knot.
    pub fn power_dv(&self, speed: f64, draft: f64) -> Result<f64> {
        check_speed(speed)?;
        let w = self.laden_weight(draft);
        Ok((1.0 - w) * self.ballast.derivative(speed) + w * self.laden.derivative(speed))
    }

    /// Target for the residual model's speed derivative when the total
    /// prediction should follow the propeller law `P = c_prop·V³`:
    /// `3·c_prop·V² − dP_baseline/dV`.
    pub fn residual_derivative_target(&self, c_prop: f64, speed: f64, draft: f64) -> Result<f64> {
        let w = self.laden_weight(draft);
        check_speed(speed)?;
        Ok(3.0 * c_prop * speed * speed
            - (1.0 - w) * self.ballast.derivative(speed)
            - w * self.laden.derivative(speed))
    }
}

fn check_speed(speed: f64) -> Result<()> {
    if speed > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("speed must be positive, got {speed}")))
    }
}

/// Least-squares propeller-law coefficient of `P ≈ c·V³`: `Σ P·V³ / Σ V⁶`.
pub fn estimate_propeller_coefficient(speeds: &[f64], powers: &[f64]) -> Result<f64> {
    if speeds.len() != powers.len() {
        return Err(Error::Shape {
            expected: speeds.len(),
            got: powers.len(),
        });
    }
    if speeds.is_empty() {
        return Err(Error::Empty("propeller-law sample"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&v, &p) in speeds.iter().zip(powers) {
        check_speed(v)?;
        let v3 = v * v * v;
        num += p * v3;
        den += v3 * v3;
    }
    let c = num / den;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("propeller-law coefficient must be positive, got {c}")));
    }
    Ok(c)
}

/// Baseline power plus the residual model's correction.
pub fn hybrid_predict<R>(baseline: &SeaTrialBaseline, residual: &R, x: &FeatureVector) -> Result<f64>
where
    R: PowerRegressor + ?Sized,
{
    if residual.mode() != Mode::Hybrid {
        return Err(Error::ModeMismatch(
            "hybrid prediction needs a model trained on residual targets".into(),
        ));
    }
    Ok(baseline.power(x.speed, x.draft)? + residual.predict(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample(curve: PowerCurve, speeds: &[f64]) -> Vec<SeaTrialPoint> {
        speeds
            .iter()
            .map(|&v| SeaTrialPoint::new(v, curve.evaluate(v)).unwrap())
            .collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn example_baseline() -> SeaTrialBaseline {
        SeaTrialBaseline::new(
            PowerCurve::new(1.5, 3.0).unwrap(),
            5.0,
            PowerCurve::new(2.5, 3.0).unwrap(),
            12.0,
        )
        .unwrap()
    }

    struct Constant(f64, Mode);

    impl PowerRegressor for Constant {
        fn mode(&self) -> Mode {
            self.1
        }
        fn predict(&self, _x: &FeatureVector) -> Result<f64> {
            Ok(self.0)
        }
    }

    #[test]
    fn exact_cubic_is_recovered() {
        let pts = sample(PowerCurve { c: 2.0, n: 3.0 }, &[8.0, 10.0, 12.0, 14.0]);
        let fit = fit_power_curve(&pts).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-9);
        assert!((fit.n - 3.0).abs() < 1e-9);
    }

    #[test]
    fn repeated_speed_is_degenerate() {
        let pts = [SeaTrialPoint::new(10.0, 1000.0).unwrap(); 2];
        assert!(matches!(fit_power_curve(&pts), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_power_curve(&pts[..1]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn non_positive_points_are_domain_errors() {
        let pts = [
            SeaTrialPoint { speed: 0.0, power: 10.0 },
            SeaTrialPoint { speed: 10.0, power: 100.0 },
        ];
        assert!(matches!(fit_power_curve(&pts), Err(Error::Domain(_))));
        assert!(SeaTrialPoint::new(5.0, -1.0).is_err());
    }

    #[test]
    fn noisy_fit_matches_normal_equation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let speeds = [7.0, 9.0, 11.0, 13.0, 15.0, 17.0];
        let pts: Vec<SeaTrialPoint> = speeds
            .iter()
            .map(|&v| SeaTrialPoint {
                speed: v,
                power: 0.85 * libm::pow(v, 3.2) * libm::exp(noise.sample(&mut rng)),
            })
            .collect();

        // Uncentred normal equations: n = (NΣxy − ΣxΣy)/(NΣx² − (Σx)²).
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for p in &pts {
            let x = libm::log(p.speed);
            let y = libm::log(p.power);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let m = pts.len() as f64;
        let n_oracle = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let c_oracle = libm::exp((sy - n_oracle * sx) / m);

        let fit = fit_power_curve(&pts).unwrap();
        assert!(rel(fit.n, n_oracle) < 1e-12, "{} vs {}", fit.n, n_oracle);
        assert!(rel(fit.c, c_oracle) < 1e-12, "{} vs {}", fit.c, c_oracle);
        assert!((fit.n - 3.2).abs() < 0.05);
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let b = example_baseline();
        for v in [6.0, 10.5, 16.0] {
            assert_eq!(b.power(v, 5.0).unwrap(), b.ballast.evaluate(v));
            assert_eq!(b.power(v, 12.0).unwrap(), b.laden.evaluate(v));
            let mid = b.power(v, 8.5).unwrap();
            assert_eq!(mid, 0.5 * (b.ballast.evaluate(v) + b.laden.evaluate(v)));
        }
    }

    #[test]
    fn interpolation_hand_evaluated() {
        // w = 3/7; P = (4/7)·1.5·1728 + (3/7)·2.5·1728 = 1728·(6 + 7.5)/7
        let b = example_baseline();
        let expected = 1728.0 * 13.5 / 7.0;
        assert!(rel(b.power(12.0, 8.0).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn draft_extrapolation_is_linear() {
        let b = example_baseline();
        let v = 11.0;
        let p = |t: f64| b.power(v, t).unwrap();
        let second = p(3.0) - 2.0 * p(4.0) + p(5.0);
        assert!(second.abs() < 1e-9 * p(4.0));
        let second_hi = p(12.0) - 2.0 * p(13.0) + p(14.0);
        assert!(second_hi.abs() < 1e-9 * p(13.0));
    }

    #[test]
    fn non_positive_speed_rejected() {
        let b = example_baseline();
        assert!(b.power(0.0, 6.0).is_err());
        assert!(b.power_dv(-1.0, 6.0).is_err());
        assert!(b.residual_derivative_target(1.0, 0.0, 6.0).is_err());
    }

    #[test]
    fn derivative_of_identical_curves() {
        let c = 1.7;
        let curve = PowerCurve::new(c, 3.0).unwrap();
        let b = SeaTrialBaseline::new(curve, 4.0, curve, 9.0).unwrap();
        for t in [2.0, 4.0, 6.3, 11.0] {
            let v = 9.5;
            assert!(rel(b.power_dv(v, t).unwrap(), 3.0 * c * v * v) < 1e-13);
        }
    }

    #[test]
    fn derivative_at_laden_hand_evaluated() {
        let b = SeaTrialBaseline::new(
            PowerCurve::new(1.0, 3.0).unwrap(),
            5.0,
            PowerCurve::new(2.0, 3.1).unwrap(),
            12.0,
        )
        .unwrap();
        // 2·3.1·10^2.1
        let expected = 6.2 * 125.892_541_179_416_72;
        assert!(rel(b.power_dv(10.0, 12.0).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn residual_target_vanishes_for_propeller_law_baseline() {
        let b = SeaTrialBaseline::new(
            PowerCurve::new(2.0, 3.0).unwrap(),
            6.0,
            PowerCurve::new(3.0, 3.2).unwrap(),
            11.0,
        )
        .unwrap();
        for v in [3.0, 8.0, 14.0, 20.0] {
            let g = b.residual_derivative_target(2.0, v, 6.0).unwrap();
            assert!(g.abs() < 1e-10 * 6.0 * v * v, "{g}");
        }
    }

    #[test]
    fn residual_target_hand_evaluated() {
        // Midpoint draft: baseline slope 3·2·V², so c_prop = 2 gives 0 and
        // c_prop = 2.1 gives 3·0.1·V² = 30 at V = 10.
        let b = example_baseline();
        let t = 8.5;
        assert!(b.residual_derivative_target(2.0, 10.0, t).unwrap().abs() < 1e-10);
        assert!((b.residual_derivative_target(2.1, 10.0, t).unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn propeller_coefficient_exact_on_cubic() {
        let speeds = [8.0, 11.0, 13.5];
        let powers: Vec<f64> = speeds.iter().map(|v| 0.7 * v * v * v).collect();
        let c = estimate_propeller_coefficient(&speeds, &powers).unwrap();
        assert!(rel(c, 0.7) < 1e-14);
        assert!(estimate_propeller_coefficient(&[], &[]).is_err());
    }

    #[test]
    fn hybrid_is_exact_sum() {
        let b = example_baseline();
        let x = FeatureVector::new(12.0, 8.0, 0.3, 1.0, -2.0);
        let base = b.power(12.0, 8.0).unwrap();
        assert_eq!(hybrid_predict(&b, &Constant(0.0, Mode::Hybrid), &x).unwrap(), base);
        assert_eq!(hybrid_predict(&b, &Constant(500.0, Mode::Hybrid), &x).unwrap(), base + 500.0);
        assert!(matches!(
            hybrid_predict(&b, &Constant(1.0, Mode::Pure), &x),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn baseline_rejects_inverted_drafts() {
        let c = PowerCurve::new(1.0, 3.0).unwrap();
        assert!(SeaTrialBaseline::new(c, 10.0, c, 10.0).is_err());
        assert!(SeaTrialBaseline::new(c, 12.0, c, 10.0).is_err());
    }

    fn baseline_strategy() -> impl Strategy<Value = SeaTrialBaseline> {
        (0.1f64..10.0, 2.0f64..4.0, 0.1f64..10.0, 2.0f64..4.0, 3.0f64..8.0, 0.5f64..8.0).prop_map(
            |(cb, nb, cl, nl, tb, dt)| SeaTrialBaseline {
                ballast: PowerCurve { c: cb, n: nb },
                laden: PowerCurve { c: cl, n: nl },
                ballast_draft: tb,
                laden_draft: tb + dt,
            },
        )
    }

    proptest! {
        #[test]
        fn fit_round_trip(c in 0.1f64..10.0, n in 2.0f64..4.0) {
            let curve = PowerCurve { c, n };
            let fit = fit_power_curve(&sample(curve, &[6.0, 9.0, 12.5, 16.0, 19.0])).unwrap();
            prop_assert!(rel(fit.c, c) < 1e-9);
            prop_assert!(rel(fit.n, n) < 1e-9);
        }

        #[test]
        fn baseline_increasing_in_speed(b in baseline_strategy(), frac in 0.0f64..=1.0) {
            let t = b.ballast_draft + frac * (b.laden_draft - b.ballast_draft);
            let mut prev = b.power(1.0, t).unwrap();
            for k in 1..=96 {
                let v = 1.0 + 0.25 * k as f64;
                let p = b.power(v, t).unwrap();
                prop_assert!(p > prev);
                prev = p;
            }
        }

        #[test]
        fn derivative_matches_central_difference(b in baseline_strategy(), v in 2.0f64..25.0, t in 2.0f64..16.0) {
            let h = 1e-5;
            let fd = (b.power(v + h, t).unwrap() - b.power(v - h, t).unwrap()) / (2.0 * h);
            let an = b.power_dv(v, t).unwrap();
            prop_assert!(rel(an, fd) < 1e-6, "{} vs {}", an, fd);
        }

        #[test]
        fn propeller_identity(b in baseline_strategy(), v in 1.0f64..25.0, t in 2.0f64..16.0, c in 0.1f64..10.0) {
            let lhs = b.residual_derivative_target(c, v, t).unwrap() + b.power_dv(v, t).unwrap();
            let rhs = 3.0 * c * v * v;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(b.power_dv(v, t).unwrap().abs()));
        }
    }
}
