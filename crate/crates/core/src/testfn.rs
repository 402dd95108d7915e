//! Even test functions phi whose Fourier transform phi-hat is compactly
//! supported in (-sigma, sigma).
//!
//! Two built-in families:
//! - Fejer: phi-hat is the triangle max(0, 1 - |xi|/sigma); phi has the
//!   closed form sigma * sinc^2(pi sigma t), entire in t, decaying like
//!   1/t^2 on the real axis.
//! - smooth bump: phi-hat(xi) = exp(-1/(1 - (xi/sigma)^2)) inside the
//!   support and 0 outside; phi is computed by quadrature of the Fourier
//!   integral, valid at complex t because the support is compact.
//!
//! Pairs are immutable after construction and safe to share across threads.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, panel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PhiFamily {
    Fejer,
    SmoothBump {
        n_quad: usize,
    },
    /// A deliberately inconsistent pair (true support differs from the
    /// claimed sigma); exists so verify_pair's failure path can be tested.
    MislabeledFejer {
        actual_sigma: f64,
    },
}

/// An even test function with compactly supported Fourier transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunctionPair {
    pub sigma: f64,
    pub label: String,
    pub family: PhiFamily,
}

fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 * (-1.0 / 6.0 + z2 / 120.0)
    } else {
        z.sin() / z
    }
}

fn sinc_real(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl TestFunctionPair {
    fn actual_sigma(&self) -> f64 {
        match self.family {
            PhiFamily::MislabeledFejer { actual_sigma } => actual_sigma,
            _ => self.sigma,
        }
    }

    /// phi-hat(xi): even, real, identically 0 for |xi| >= sigma.
    pub fn phi_hat(&self, xi: f64) -> f64 {
        let s = self.actual_sigma();
        let a = xi.abs() / s;
        if a >= 1.0 {
            return 0.0;
        }
        match self.family {
            PhiFamily::Fejer | PhiFamily::MislabeledFejer { .. } => 1.0 - a,
            PhiFamily::SmoothBump { .. } => (-1.0 / (1.0 - a * a)).exp(),
        }
    }

    /// phi(t) for real t (fast path used by the density integrators).
    pub fn phi_real(&self, t: f64) -> f64 {
        match self.family {
            PhiFamily::Fejer | PhiFamily::MislabeledFejer { .. } => {
                let s = self.actual_sigma();
                let x = std::f64::consts::PI * s * t;
                let v = sinc_real(x);
                s * v * v
            }
            PhiFamily::SmoothBump { n_quad } => self.bump_fourier_real(t, n_quad),
        }
    }

    /// phi(t) at complex argument, by analytic continuation of the same
    /// formula (Fejer) or of the Fourier integral (bump).
    pub fn phi(&self, t: Complex64) -> Result<Complex64> {
        if !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::domain("phi: non-finite argument"));
        }
        match self.family {
            PhiFamily::Fejer | PhiFamily::MislabeledFejer { .. } => {
                let s = self.actual_sigma();
                let z = std::f64::consts::PI * s * t;
                let v = sinc(z);
                Ok(s * v * v)
            }
            PhiFamily::SmoothBump { n_quad } => Ok(self.bump_fourier(t, n_quad)?.0),
        }
    }

    /// phi at complex argument together with a quadrature-error estimate
    /// (zero for the closed-form Fejer family).
    pub fn phi_with_err(&self, t: Complex64) -> Result<(Complex64, f64)> {
        match self.family {
            PhiFamily::Fejer | PhiFamily::MislabeledFejer { .. } => Ok((self.phi(t)?, 0.0)),
            PhiFamily::SmoothBump { n_quad } => self.bump_fourier(t, n_quad),
        }
    }

    /// int phi-hat = phi(0).
    pub fn phi_hat_mass(&self) -> f64 {
        match self.family {
            PhiFamily::Fejer | PhiFamily::MislabeledFejer { .. } => self.actual_sigma(),
            PhiFamily::SmoothBump { n_quad } => self.bump_fourier_real(0.0, n_quad),
        }
    }

    /// 2 int_0^sigma phi-hat(xi) cos(2 pi t xi) d xi with oscillation-aware
    /// panel count; complex t allowed (cos is entire).
    fn bump_fourier(&self, t: Complex64, n_quad: usize) -> Result<(Complex64, f64)> {
        let s = self.actual_sigma();
        let base_panels = (n_quad / 16).max(2);
        let eval = |panels: usize| -> Complex64 {
            let (nodes, weights) = gauss_legendre(16);
            let mut acc = Complex64::new(0.0, 0.0);
            let h = s / panels as f64;
            for k in 0..panels {
                let a = k as f64 * h;
                let mid = a + 0.5 * h;
                for (x, w) in nodes.iter().zip(weights) {
                    let xi = mid + 0.5 * h * x;
                    let arg = 2.0 * std::f64::consts::PI * t * xi;
                    acc += *w * self.phi_hat(xi) * arg.cos();
                }
            }
            acc * h
        };
        // Panels must resolve cos(2 pi t xi): about 4 panels per period.
        let osc = (4.0 * (t.norm() + 1.0) * s).ceil() as usize;
        let p1 = base_panels.max(osc).min(40_000);
        let p2 = p1 + p1.div_ceil(2);
        let v1 = eval(p1);
        let v2 = eval(p2);
        let err = (v1 - v2).norm();
        Ok((v2, err))
    }

    fn bump_fourier_real(&self, t: f64, n_quad: usize) -> f64 {
        self.bump_fourier(Complex64::new(t, 0.0), n_quad)
            .map(|(v, _)| v.re)
            .unwrap_or(f64::NAN)
    }
}

/// Fejer pair with support radius sigma.
pub fn make_fejer(sigma: f64) -> Result<TestFunctionPair> {
    if !(sigma > 0.0) {
        return Err(Error::domain("make_fejer needs sigma > 0"));
    }
    Ok(TestFunctionPair {
        sigma,
        label: format!("fejer:{sigma}"),
        family: PhiFamily::Fejer,
    })
}

/// Smooth bump pair; phi is evaluated by n_quad-point quadrature (n_quad
/// the baseline; panel counts grow with |t| to keep the oscillation
/// resolved).
pub fn make_smooth_bump(sigma: f64, n_quad: usize) -> Result<TestFunctionPair> {
    if !(sigma > 0.0) {
        return Err(Error::domain("make_smooth_bump needs sigma > 0"));
    }
    if n_quad < 64 {
        return Err(Error::domain("make_smooth_bump needs n_quad >= 64"));
    }
    Ok(TestFunctionPair {
        sigma,
        label: format!("bump:{sigma}:{n_quad}"),
        family: PhiFamily::SmoothBump { n_quad },
    })
}

/// A pair whose claimed support radius disagrees with the function it
/// actually evaluates; verify_pair must flag it.
pub fn make_mislabeled_fejer(claimed_sigma: f64, actual_sigma: f64) -> Result<TestFunctionPair> {
    if !(claimed_sigma > 0.0) || !(actual_sigma > 0.0) {
        return Err(Error::domain("sigmas must be positive"));
    }
    Ok(TestFunctionPair {
        sigma: claimed_sigma,
        label: format!("mislabeled:{claimed_sigma}:{actual_sigma}"),
        family: PhiFamily::MislabeledFejer { actual_sigma },
    })
}

/// Outcome of the pair self-check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairReport {
    pub pass: bool,
    /// Largest |FT(phi)(xi) - phi_hat(xi)| over the check grid.
    pub max_ft_error: f64,
    pub ft_tolerance: f64,
    /// Fitted constants C(n, y) in |phi(t+iy)| <= C e^{2 pi y sigma} (t^2+y^2)^{-n}.
    pub decay_constants: Vec<(u32, f64, f64)>,
    pub notes: Vec<String>,
}

/// Check that (i) the numerical Fourier transform of phi recovers phi_hat
/// on a grid within tol, and (ii) the vertical-strip decay bound holds with
/// a finite fitted constant for n in {1, 2}, y in {0, 1, 2}.
pub fn verify_pair(f: &TestFunctionPair, tol: f64) -> Result<PairReport> {
    let sigma = f.sigma;
    let mut notes = Vec::new();

    // (i) FT grid check. FT(phi)(xi) = 2 int_0^inf phi(t) cos(2 pi xi t) dt.
    // The 1/t^2 Fejer decay forces a window ~ 1/(pi^2 sigma tol); panels
    // resolve both oscillation frequencies.
    let t_end = (4.0 / (std::f64::consts::PI.powi(2) * sigma * (tol * 0.25))).min(3.0e6);
    let mut max_ft_error = 0.0f64;
    for i in 0..=9 {
        let xi = sigma * (i as f64) / 8.0; // last point is outside the support
        let mut integrand = |t: f64| f.phi_real(t) * (2.0 * std::f64::consts::PI * xi * t).cos();
        let step = 0.2 / (sigma + xi + 1.0);
        let mut acc = 0.0;
        let mut t = 0.0;
        while t < t_end {
            let h = step.min(t_end - t);
            acc += panel(&mut integrand, t, t + h, 8);
            t += h;
        }
        let ft = 2.0 * acc;
        let err = (ft - f.phi_hat(xi)).abs();
        if err > max_ft_error {
            max_ft_error = err;
        }
    }
    let ft_ok = max_ft_error <= tol;
    if !ft_ok {
        notes.push(format!(
            "Fourier-transform grid check failed: max error {max_ft_error:.3e} > tol {tol:.3e}"
        ));
    }

    // (ii) decay-bound constants.
    let mut decay_constants = Vec::new();
    let mut decay_ok = true;
    for n in [1u32, 2] {
        for y in [0.0f64, 1.0, 2.0] {
            let mut c_max = 0.0f64;
            let mut t = 0.25f64;
            while t <= 50.0 {
                let z = Complex64::new(t, y);
                let phi = f.phi(z)?;
                let c = phi.norm() * (t * t + y * y).powi(n as i32)
                    / (2.0 * std::f64::consts::PI * y * sigma).exp();
                if c > c_max {
                    c_max = c;
                }
                t += 0.25;
            }
            if !c_max.is_finite() {
                decay_ok = false;
                notes.push(format!("decay constant not finite for n={n}, y={y}"));
            }
            decay_constants.push((n, y, c_max));
        }
    }

    Ok(PairReport {
        pass: ft_ok && decay_ok,
        max_ft_error,
        ft_tolerance: tol,
        decay_constants,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fejer_basics() {
        let f = make_fejer(1.0).unwrap();
        assert_abs_diff_eq!(f.phi_real(0.0), 1.0, epsilon = 1e-15); // phi(0) = sigma
        assert_eq!(f.phi_hat(1.0), 0.0); // support endpoint
        assert!(f.phi_real(1.0).abs() < 1e-30); // sinc zero at t = 1/sigma
        let g = make_fejer(0.5).unwrap();
        assert_abs_diff_eq!(g.phi_real(0.0), 0.5, epsilon = 1e-15);
        assert!(g.phi_real(2.0).abs() < 1e-30);
    }

    #[test]
    fn fejer_evenness_and_reality() {
        let f = make_fejer(0.7).unwrap();
        for t in [0.1, 0.5, 2.3, 17.0] {
            assert!((f.phi_real(t) - f.phi_real(-t)).abs() < 1e-12);
            assert_eq!(f.phi_hat(t), f.phi_hat(-t));
            let c = f.phi(Complex64::new(t, 0.0)).unwrap();
            assert!(c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn bump_basics() {
        let f = make_smooth_bump(2.0, 128).unwrap();
        assert_abs_diff_eq!(f.phi_hat(0.0), (-1.0f64).exp(), epsilon = 1e-16);
        assert_eq!(f.phi_hat(2.0), 0.0);
        // phi real on the real axis.
        let v = f.phi(Complex64::new(0.8, 0.0)).unwrap();
        assert!(v.im.abs() < 1e-12);
        // phi(0) agrees with an independent quadrature of phi-hat.
        let mut g = |xi: f64| f.phi_hat(xi);
        let direct = 2.0 * panel(&mut g, 0.0, 2.0, 64);
        assert!((f.phi_real(0.0) - direct).abs() < 1e-10);
    }

    #[test]
    fn bump_error_estimate_reported() {
        let f = make_smooth_bump(1.0, 64).unwrap();
        let (_, err) = f.phi_with_err(Complex64::new(3.0, 0.0)).unwrap();
        assert!(err < 1e-10);
    }

    #[test]
    fn verify_accepts_good_pairs() {
        let f = make_fejer(1.0).unwrap();
        let report = verify_pair(&f, 2e-5).unwrap();
        assert!(report.pass, "{report:?}");

        let b = make_smooth_bump(2.0, 256).unwrap();
        let report = verify_pair(&b, 2e-5).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(!report.decay_constants.is_empty());
    }

    #[test]
    fn verify_rejects_mislabeled_support() {
        // Claims support 0.5 but actually evaluates the sigma = 1 pair.
        let f = make_mislabeled_fejer(0.5, 1.0).unwrap();
        let report = verify_pair(&f, 2e-5).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn plancherel_spot_check() {
        // int phi_hat^2 = int |phi|^2 (Plancherel), both by quadrature.
        for f in [make_fejer(1.0).unwrap(), make_smooth_bump(1.5, 128).unwrap()] {
            let mut lhs_f = |xi: f64| f.phi_hat(xi).powi(2);
            let lhs = 2.0 * panel(&mut lhs_f, 0.0, f.sigma, 64);
            let mut rhs_f = |t: f64| f.phi_real(t).powi(2);
            let mut rhs = 0.0;
            let mut t = 0.0;
            // |phi|^2 decays like t^-4 for Fejer: window 300 gives ~1e-7.
            while t < 300.0 {
                rhs += panel(&mut rhs_f, t, t + 0.25, 8);
                t += 0.25;
            }
            rhs *= 2.0;
            assert!(
                (lhs - rhs).abs() < 1e-6,
                "{}: lhs={lhs} rhs={rhs}",
                f.label
            );
        }
    }

    #[test]
    fn fejer_imaginary_growth_bounded() {
        // |phi(t+iy)| <= e^{2 pi |y| sigma} C/(t^2+1) empirically.
        let f = make_fejer(1.0).unwrap();
        let mut c_max = 0.0f64;
        for ti in 0..=200 {
            let t = -50.0 + 0.5 * ti as f64;
            for y in [0.0, 1.0, 3.0] {
                let v = f.phi(Complex64::new(t, y)).unwrap().norm();
                let c = v * (t * t + 1.0) / (2.0 * std::f64::consts::PI * y).exp();
                c_max = c_max.max(c);
            }
        }
        assert!(c_max.is_finite());
        assert!(c_max < 10.0, "C = {c_max}");
    }
}
