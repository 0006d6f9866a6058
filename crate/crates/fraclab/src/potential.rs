//! Double-well potentials and their structural constants.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type WellFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A double well W with derivatives and certified structural constants.
///
/// The constants are stored, not recomputed per call: `delta_w` is a radius
/// around the wells on which W'' stays above `kappa_w = min(W''(+1), W''(-1))/2`,
/// and `c_w`, `p` witness the polynomial growth bounds on W'.
#[derive(Clone)]
pub struct DoubleWell {
    w: WellFn,
    wp: WellFn,
    wpp: WellFn,
    pub name: String,
    pub p: f64,
    pub c_w: f64,
    pub delta_w: f64,
    pub kappa_w: f64,
}

impl fmt::Debug for DoubleWell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleWell")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("c_w", &self.c_w)
            .field("delta_w", &self.delta_w)
            .field("kappa_w", &self.kappa_w)
            .finish()
    }
}

impl DoubleWell {
    pub fn w(&self, t: f64) -> f64 {
        (self.w)(t)
    }

    pub fn wp(&self, t: f64) -> f64 {
        (self.wp)(t)
    }

    pub fn wpp(&self, t: f64) -> f64 {
        (self.wpp)(t)
    }

    pub fn custom(
        name: &str,
        w: WellFn,
        wp: WellFn,
        wpp: WellFn,
        p: f64,
        c_w: f64,
        delta_w: f64,
        kappa_w: f64,
    ) -> Self {
        DoubleWell {
            w,
            wp,
            wpp,
            name: name.into(),
            p,
            c_w,
            delta_w,
            kappa_w,
        }
    }

    /// The quartic well W(t) = (1 - t^2)^2 / 4.
    ///
    /// Constants: p = 4, c_w = 3 and delta_w = 0.18. The largest admissible
    /// delta is 1 - sqrt(2/3) = 0.1835..., since 3t^2 - 1 >= 1 needs
    /// |t| >= sqrt(2/3); 0.18 leaves a margin. kappa_w = W''(1)/2 = 1.
    pub fn prototype() -> Self {
        DoubleWell {
            w: Arc::new(|t| {
                let q = 1.0 - t * t;
                0.25 * q * q
            }),
            wp: Arc::new(|t| t * t * t - t),
            wpp: Arc::new(|t| 3.0 * t * t - 1.0),
            name: "prototype".into(),
            p: 4.0,
            c_w: 3.0,
            delta_w: 0.18,
            kappa_w: 1.0,
        }
    }

    /// Convexification around the well at `kappa` (+1 or -1): equal to W on
    /// (kappa - delta_w, kappa + delta_w), affine with matching value and
    /// slope outside.
    pub fn convexified(&self, kappa: i32) -> Result<WellFn> {
        if kappa != 1 && kappa != -1 {
            return Err(Error::Potential("kappa must be +1 or -1".into()));
        }
        let k = kappa as f64;
        let lo = k - self.delta_w;
        let hi = k + self.delta_w;
        let w_lo = self.w(lo);
        let wp_lo = self.wp(lo);
        let w_hi = self.w(hi);
        let wp_hi = self.wp(hi);
        let w = self.w.clone();
        Ok(Arc::new(move |t: f64| {
            if t < lo {
                w_lo + wp_lo * (t - lo)
            } else if t > hi {
                w_hi + wp_hi * (t - hi)
            } else {
                w(t)
            }
        }))
    }
}

/// One verification item: name, pass flag, worst margin (>= 0 means pass
/// with that slack), free-form detail.
#[derive(Debug, Clone)]
pub struct WellCheck {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct WellReport {
    pub checks: Vec<WellCheck>,
}

impl WellReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for WellReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:4}  margin {:+.3e}  {}",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.margin,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Sampling-based verification of the structural assumptions.
///
/// Failures are reported, not thrown; the report certifies the stored
/// constants on the sampled range, not the analytic statement on all of R.
pub fn verify_structural_assumptions(
    w: &DoubleWell,
    sample_range: (f64, f64),
    n_samples: usize,
) -> Result<WellReport> {
    if n_samples < 1000 {
        return Err(Error::Potential(format!(
            "need at least 1000 samples, got {n_samples}"
        )));
    }
    let (lo, hi) = sample_range;
    if !(hi > lo) {
        return Err(Error::Potential("empty sample range".into()));
    }
    let ts: Vec<f64> = (0..n_samples)
        .map(|i| lo + (hi - lo) * i as f64 / (n_samples - 1) as f64)
        .collect();
    let mut checks = Vec::new();

    // Zeros exactly at the two wells.
    {
        let at_wells = w.w(1.0).abs().max(w.w(-1.0).abs());
        let mut min_away = f64::MAX;
        let mut min_neg = f64::MAX;
        for &t in &ts {
            min_neg = min_neg.min(w.w(t));
            if (t.abs() - 1.0).abs() > 0.05 {
                min_away = min_away.min(w.w(t));
            }
        }
        let pass = at_wells <= 1e-12 && min_neg >= -1e-12 && min_away > 1e-12;
        checks.push(WellCheck {
            name: "{W=0} = {+1,-1}, W >= 0".into(),
            pass,
            margin: min_away.min(-at_wells + 1e-12),
            detail: format!("|W(+-1)| = {at_wells:.2e}, min W away from wells = {min_away:.2e}"),
        });
    }

    // Nondegenerate wells.
    {
        let wpp1 = w.wpp(1.0);
        let wppm1 = w.wpp(-1.0);
        checks.push(WellCheck {
            name: "W''(+-1) > 0".into(),
            pass: wpp1 > 0.0 && wppm1 > 0.0,
            margin: wpp1.min(wppm1),
            detail: format!("W''(1) = {wpp1:.3}, W''(-1) = {wppm1:.3}"),
        });
    }

    // Convexity window: W'' >= kappa_w for ||t|-1| <= delta_w.
    {
        let kappa_ref = 0.5 * w.wpp(1.0).min(w.wpp(-1.0));
        let mut worst = f64::MAX;
        for &t in &ts {
            if (t.abs() - 1.0).abs() <= w.delta_w {
                worst = worst.min(w.wpp(t) - w.kappa_w);
            }
        }
        // Also sample the window densely in case the range misses it.
        for i in 0..2000 {
            let u = w.delta_w * (2.0 * i as f64 / 1999.0 - 1.0);
            for sgn in [-1.0, 1.0] {
                worst = worst.min(w.wpp(sgn * (1.0 + u)) - w.kappa_w);
            }
        }
        let pass = worst >= 0.0 && w.kappa_w <= kappa_ref + 1e-12;
        checks.push(WellCheck {
            name: "W'' >= kappa_w near wells".into(),
            pass,
            margin: worst,
            detail: format!(
                "delta_w = {}, kappa_w = {} (half min W''(+-1) = {kappa_ref})",
                w.delta_w, w.kappa_w
            ),
        });
    }

    // Growth bounds on W'.
    {
        let mut worst = f64::MAX;
        for &t in &ts {
            let lhs = (t.abs().powf(w.p - 1.0) - 1.0) / w.c_w;
            let rhs = w.c_w * (t.abs().powf(w.p - 1.0) + 1.0);
            let v = w.wp(t).abs();
            worst = worst.min(v - lhs).min(rhs - v);
        }
        // Asymptotic ratio check at the range ends.
        let tt = hi.abs().max(lo.abs()).max(10.0);
        let ratio = w.wp(tt).abs() / tt.powf(w.p - 1.0);
        let asym_ok = ratio >= 1.0 / w.c_w && ratio <= w.c_w;
        checks.push(WellCheck {
            name: "growth bounds on |W'|".into(),
            pass: worst >= 0.0 && asym_ok,
            margin: worst,
            detail: format!("p = {}, c_w = {}, |W'(t)|/|t|^(p-1) -> {ratio:.3}", w.p, w.c_w),
        });
    }

    // Finite-difference consistency of the stored derivatives.
    {
        let dt = 1e-5 * (hi - lo).max(1.0);
        let mut worst1 = 0.0f64;
        let mut worst2 = 0.0f64;
        for &t in ts.iter().step_by(7) {
            let fd1 = (w.w(t + dt) - w.w(t)) / dt;
            let fd2 = (w.wp(t + dt) - w.wp(t)) / dt;
            worst1 = worst1.max((w.wp(t) - fd1).abs());
            worst2 = worst2.max((w.wpp(t) - fd2).abs());
        }
        // One-sided differences carry an O(dt) defect proportional to the
        // next derivative; bound it crudely by the sampled curvature scale.
        let scale = ts
            .iter()
            .step_by(23)
            .fold(1.0f64, |m, &t| m.max(w.wpp(t).abs()));
        let tol = 10.0 * scale * dt * (1.0 + hi.abs().max(lo.abs()));
        checks.push(WellCheck {
            name: "derivative consistency".into(),
            pass: worst1 <= tol && worst2 <= tol,
            margin: tol - worst1.max(worst2),
            detail: format!("|W'-dW/dt| <= {worst1:.2e}, |W''-dW'/dt| <= {worst2:.2e}, tol {tol:.2e}"),
        });
    }

    Ok(WellReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_values() {
        let w = DoubleWell::prototype();
        assert_eq!(w.w(0.0), 0.25);
        assert_eq!(w.w(1.0), 0.0);
        assert_eq!(w.w(-1.0), 0.0);
        assert!(w.wp(1.0).abs() <= 1e-12);
        assert!(w.wp(-1.0).abs() <= 1e-12);
    }

    #[test]
    fn prototype_delta_w_is_admissible() {
        let w = DoubleWell::prototype();
        let max_delta = 1.0 - (2.0f64 / 3.0).sqrt();
        assert!((max_delta - 0.1835).abs() < 1e-3);
        assert!(w.delta_w < max_delta);
        // Dense sampling of the convexity window.
        for i in 0..10_000 {
            let u = w.delta_w * (2.0 * i as f64 / 9999.0 - 1.0);
            assert!(w.wpp(1.0 + u) >= w.kappa_w);
            assert!(w.wpp(-1.0 - u) >= w.kappa_w);
        }
    }

    #[test]
    fn prototype_c_w_certified_by_scan() {
        let w = DoubleWell::prototype();
        for i in 0..200_001 {
            let t = -100.0 + i as f64 * 1e-3;
            let v = w.wp(t).abs();
            assert!(v >= (t.abs().powi(3) - 1.0) / 3.0 - 1e-12, "lower bound at {t}");
            assert!(v <= 3.0 * (t.abs().powi(3) + 1.0) + 1e-12, "upper bound at {t}");
        }
        let ratio = w.wp(1e4).abs() / 1e4f64.powi(3);
        assert!(ratio > 1.0 / 3.0 && ratio < 3.0);
    }

    #[test]
    fn prototype_verification_passes() {
        let w = DoubleWell::prototype();
        let rep = verify_structural_assumptions(&w, (-10.0, 10.0), 5001).unwrap();
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn single_well_fails_zero_check() {
        let w = DoubleWell::custom(
            "single",
            Arc::new(|t| t * t),
            Arc::new(|t| 2.0 * t),
            Arc::new(|_| 2.0),
            2.0,
            3.0,
            0.18,
            1.0,
        );
        let rep = verify_structural_assumptions(&w, (-10.0, 10.0), 2001).unwrap();
        assert!(!rep.all_pass());
        assert!(!rep.checks[0].pass, "zero-set check should fail: {rep}");
    }

    #[test]
    fn undersized_c_w_fails_growth() {
        let mut w = DoubleWell::prototype();
        w.c_w = 0.5;
        let rep = verify_structural_assumptions(&w, (-100.0, 100.0), 5001).unwrap();
        let growth = rep.checks.iter().find(|c| c.name.contains("growth")).unwrap();
        assert!(!growth.pass);
    }

    #[test]
    fn sample_count_precondition() {
        let w = DoubleWell::prototype();
        assert!(verify_structural_assumptions(&w, (-10.0, 10.0), 100).is_err());
    }

    #[test]
    fn convexified_matches_and_continues() {
        let w = DoubleWell::prototype();
        let cw = w.convexified(1).unwrap();
        assert_eq!(cw(1.0), 0.0);
        let d = w.delta_w;
        let expected = w.w(1.0 + d) + w.wp(1.0 + d) * 1.0;
        assert!((cw(1.0 + d + 1.0) - expected).abs() < 1e-14);
        // Convexity by second differences on [-3, 3].
        let dt = 1e-3;
        let mut t = -3.0;
        while t <= 3.0 {
            let second = cw(t + dt) - 2.0 * cw(t) + cw(t - dt);
            assert!(second >= -1e-10, "second difference at {t}: {second}");
            t += 7e-3;
        }
        assert!(w.convexified(2).is_err());
    }

    #[test]
    fn sign_property_above_threshold() {
        let w = DoubleWell::prototype();
        for &delta in &[0.1, 1.0, 10.0] {
            let thr = (1.0 + w.c_w * delta).powf(1.0 / (w.p - 1.0));
            for i in 0..20_000 {
                let t = thr + i as f64 * 1e-2;
                for u in [t, -t] {
                    assert!(
                        w.wp(u) * u - delta * u.abs() >= -1e-12,
                        "sign property fails at {u} for delta {delta}"
                    );
                }
            }
        }
    }
}
