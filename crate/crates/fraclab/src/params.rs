//! Fractional-order parameters and normalization constants.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Singular-integral normalization `s * 2^{2s} * pi^{-n/2} * Gamma((n+2s)/2) / Gamma(1-s)`.
///
/// With this constant the quadratic form of the operator matches the Fourier
/// symbol `(2*pi*|xi|)^{2s}`.
pub fn gamma_ns(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    s * 2f64.powf(2.0 * s) * std::f64::consts::PI.powf(-nf / 2.0) * gamma((nf + 2.0 * s) / 2.0)
        / gamma(1.0 - s)
}

/// Poisson kernel normalization `pi^{-n/2} * Gamma((n+2s)/2) / Gamma(s)`,
/// chosen so the kernel has unit mass at every height.
pub fn sigma_ns(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    std::f64::consts::PI.powf(-nf / 2.0) * gamma((nf + 2.0 * s) / 2.0) / gamma(s)
}

/// Dirichlet-to-Neumann matching factor `2^{2s-1} * Gamma(s) / Gamma(1-s)`.
pub fn d_s(s: f64) -> f64 {
    2f64.powf(2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s)
}

/// Volume of the unit ball in dimension `d` (also defined for fractional `d`):
/// `pi^{d/2} / Gamma(1 + d/2)`.
pub fn omega_ball(d: f64) -> f64 {
    std::f64::consts::PI.powf(d / 2.0) / gamma(1.0 + d / 2.0)
}

/// Fractional order, interface width and the derived normalization constants.
#[derive(Debug, Clone, Copy)]
pub struct FractionalParams {
    /// Ambient dimension, 1 or 2.
    pub n: usize,
    /// Fractional order in (0, 1/2).
    pub s: f64,
    /// Extension weight exponent `a = 1 - 2s`.
    pub a: f64,
    /// Interface width.
    pub eps: f64,
    pub gamma_ns: f64,
    pub sigma_ns: f64,
    pub d_s: f64,
}

impl FractionalParams {
    pub fn new(n: usize, s: f64, eps: f64) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::Params(format!("dimension must be 1 or 2, got {n}")));
        }
        if !(s > 0.0 && s < 0.5) {
            return Err(Error::Params("s must lie in (0, 1/2)".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::Params(format!("eps must be positive, got {eps}")));
        }
        Ok(FractionalParams {
            n,
            s,
            a: 1.0 - 2.0 * s,
            eps,
            gamma_ns: gamma_ns(n, s),
            sigma_ns: sigma_ns(n, s),
            d_s: d_s(s),
        })
    }

    /// Kernel exponent `n + 2s`.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + 2.0 * self.s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_quarter_closed_form() {
        // gamma_{1,1/4} = sqrt(2) / (4 sqrt(pi)); the two Gamma factors cancel.
        let g = gamma_ns(1, 0.25);
        let exact = 2f64.sqrt() / (4.0 * std::f64::consts::PI.sqrt());
        assert!((g - exact).abs() / exact < 1e-12, "{g} vs {exact}");
        assert!((g - 0.199471).abs() < 1e-6);
    }

    #[test]
    fn d_s_limit_at_one_half() {
        // 2^0 * Gamma(1/2) / Gamma(1/2) = 1.
        assert!((d_s(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn params_reject_out_of_range_s() {
        let err = FractionalParams::new(1, 0.5, 0.1).unwrap_err();
        assert!(err.to_string().contains("s must lie in (0, 1/2)"));
        assert!(FractionalParams::new(1, 0.0, 0.1).is_err());
        assert!(FractionalParams::new(1, 0.25, 0.1).is_ok());
    }

    #[test]
    fn a_is_one_minus_two_s() {
        let p = FractionalParams::new(2, 0.3, 1.0).unwrap();
        assert_eq!(p.a, 1.0 - 2.0 * 0.3);
        assert!(p.a > 0.0 && p.a < 1.0);
    }

    #[test]
    fn constants_match_formulas_to_1e12() {
        for &(n, s) in &[(1usize, 0.1), (1, 0.25), (1, 0.4), (2, 0.2), (2, 0.25)] {
            let p = FractionalParams::new(n, s, 0.1).unwrap();
            assert!((p.gamma_ns - gamma_ns(n, s)).abs() <= 1e-12 * p.gamma_ns.abs());
            assert!((p.sigma_ns - sigma_ns(n, s)).abs() <= 1e-12 * p.sigma_ns.abs());
            assert!((p.d_s - d_s(s)).abs() <= 1e-12 * p.d_s.abs());
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((omega_ball(1.0) - 2.0).abs() < 1e-12);
        assert!((omega_ball(2.0) - std::f64::consts::PI).abs() < 1e-12);
    }
}
