//! Assembly of the ratios-conjecture predictions for the 1-level density:
//! the diagonal derivative R'(r,r), the lower-order term M(phi), the
//! weighted prediction, the unweighted prediction, and the alternate
//! (Mertens) completion that rescales M(phi) by exp(-gamma).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::{PrecisionBudget, TailEstimate};
use crate::error::{Error, Result};
use crate::eulerprod::{euler_a, lemma32_rhs, prime_log_sum};
use crate::gammafactor::{gamma_term_integral, x_l, GammaFactorParams};
use crate::primes::{prime_sum_p1, secondary_sum_unweighted};
use crate::quad::integrate_even_tail;
use crate::specfun::{zeta, zeta_minus_pole, EULER_GAMMA};
use crate::testfn::{PhiFamily, TestFunctionPair};

/// Which family normalization a density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Weighted,
    Unweighted,
}

/// Which side of the comparison produced a breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    RatiosPrediction,
    NumberTheory,
}

/// How the second term of the recipe is completed. The Mertens variant
/// multiplies M(phi) by exp(-gamma).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completion {
    Standard,
    Mertens,
}

/// Itemized 1-level density. Every populated field holds its *signed
/// contribution* to the total (in particular s1, s2, s3 carry the minus
/// sign of the explicit-formula expansion), so `total` is exactly the sum
/// of the populated components plus the archimedean term. Unpopulated
/// components are `None`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityBreakdown {
    pub mode: Mode,
    pub side: Side,
    pub gamma_term: f64,
    pub prime_square_term: Option<f64>,
    pub m_phi: Option<f64>,
    pub secondary_sum: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub s3: Option<f64>,
    pub total: f64,
    pub budget: PrecisionBudget,
}

impl DensityBreakdown {
    /// Sum of the populated components; `total` must equal this exactly.
    pub fn component_sum(&self) -> f64 {
        self.gamma_term
            + self.prime_square_term.unwrap_or(0.0)
            + self.m_phi.unwrap_or(0.0)
            + self.secondary_sum.unwrap_or(0.0)
            + self.s1.unwrap_or(0.0)
            + self.s2.unwrap_or(0.0)
            + self.s3.unwrap_or(0.0)
    }

    /// The side's conjectural residual: M(phi) for the prediction,
    /// -(S1+S2+S3) for the explicit formula.
    pub fn residual_component(&self) -> f64 {
        match self.side {
            Side::RatiosPrediction => self.m_phi.unwrap_or(0.0),
            Side::NumberTheory => {
                self.s1.unwrap_or(0.0) + self.s2.unwrap_or(0.0) + self.s3.unwrap_or(0.0)
            }
        }
    }
}

/// R'(r,r): sum_p log p / p^{1+2r} plus the functional-equation term
/// (i^k mu(N)/N^{1+r}) X_L(1/2+r) prod_p (1 + 1/((p-1) p^{2r})), the
/// product evaluated through its zeta factorization.
pub fn r_prime_rr(
    r: Complex64,
    params: &GammaFactorParams,
    tol: f64,
) -> Result<Complex64> {
    if r.re <= 0.0 {
        return Err(Error::domain("r_prime_rr needs Re(r) > 0"));
    }
    let term1 = prime_log_sum(Complex64::new(1.0, 0.0) + 2.0 * r, tol)?;
    let n_factor = if params.level == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        params.mu_level()
            * (-(Complex64::new(1.0, 0.0) + r) * (params.level as f64).ln()).exp()
    };
    let term2 = params.i_to_k()
        * n_factor
        * x_l(Complex64::new(0.5, 0.0) + r, params)?
        * lemma32_rhs(2.0 * r, tol)?;
    Ok(term1 + term2)
}

/// The complex integrand factor of M(phi) at height t (before multiplying
/// by phi): X_L(1/2 + 2 pi i t/log R) * zeta(2)/zeta(2 + 8 pi i t/log R)
/// * [zeta(1 + 4 pi i t/log R) - pole] * A(4 pi i t/log R) * N^{-2 pi i t/log R}.
///
/// The 1/w pole of zeta(1+w) is dropped analytically (its principal-value
/// pairing against the even phi vanishes for the constant residue; the
/// recipe discards it), leaving the regular part to quadrature.
pub fn m_phi_kernel(t: f64, params: &GammaFactorParams, tol: f64) -> Result<Complex64> {
    let log_r = params.log_r();
    let scale = 2.0 * std::f64::consts::PI / log_r;
    let s = Complex64::new(0.5, scale * t);
    let w = Complex64::new(0.0, 2.0 * scale * t);

    let xl = x_l(s, params)?;
    let zeta_ratio = zeta(Complex64::new(2.0, 0.0))? / zeta(Complex64::new(2.0, 0.0) + 2.0 * w)?;
    let zeta_reg = zeta_minus_pole(Complex64::new(1.0, 0.0) + w)?;
    let a = euler_a(w, tol)?.value;
    let twist = if params.level == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        (-Complex64::new(0.0, scale * t) * (params.level as f64).ln()).exp()
    };
    Ok(xl * zeta_ratio * zeta_reg * a * twist)
}

/// M(phi) evaluation with its budget.
#[derive(Debug, Clone)]
pub struct MPhi {
    pub value: f64,
    pub budget: PrecisionBudget,
}

/// The arithmetic lower-order term of the prediction:
/// (2 i^k mu(N)/(N log R)) int kernel(t) phi(t) dt, pole-subtracted as in
/// [`m_phi_kernel`]; `Completion::Mertens` rescales by exp(-gamma).
pub fn m_phi(
    f: &TestFunctionPair,
    params: &GammaFactorParams,
    tol: f64,
    completion: Completion,
) -> Result<MPhi> {
    let log_r = params.log_r();
    let scale = 2.0 * std::f64::consts::PI / log_r;
    let pref = 2.0 * params.i_to_k() * params.mu_level() / (params.level as f64 * log_r);
    let kernel_tol = 1e-7f64.min(tol);

    let mut integrand = |t: f64| -> f64 {
        let kernel = match m_phi_kernel(t, params, kernel_tol) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        2.0 * kernel.re * f.phi_real(t)
    };

    // Oscillation scale: the X_L phase turns at roughly
    // scale * (2 ln(scale (t + k/2) + 1) + |2 ln(sqrt N/2pi)|) per unit t,
    // plus the level twist and phi's own pi*sigma rate.
    let q = (params.level as f64).sqrt() / (2.0 * std::f64::consts::PI);
    let kf = params.k as f64;
    let max_step = move |t: f64| -> f64 {
        let theta = scale * (2.0 * (scale * t + kf / 2.0 + 1.0).ln().abs() + 2.0 * q.ln().abs())
            + scale * (params.level as f64).ln()
            + std::f64::consts::PI * f.sigma;
        (std::f64::consts::PI / theta).min(0.25 / f.sigma).max(0.02)
    };

    let inner_tol = (tol / pref.abs()).min(1e-5);
    let head_end = 24.0 / f.sigma;
    let hard_cap = match f.family {
        PhiFamily::SmoothBump { .. } => 4000.0,
        _ => 40_000.0,
    };
    let r = integrate_even_tail(&mut integrand, head_end, &max_step, inner_tol, hard_cap)?;
    if !r.value.is_finite() {
        return Err(Error::no_convergence("m_phi integrand produced NaN"));
    }

    let factor = match completion {
        Completion::Standard => 1.0,
        Completion::Mertens => (-EULER_GAMMA).exp(),
    };
    let mut budget = PrecisionBudget {
        quadrature_window: Some(r.window),
        quadrature_points: Some(r.evaluations),
        ..Default::default()
    };
    budget.push_tail(
        "m_phi quadrature tail (measured decay)",
        TailEstimate::heuristic(r.tail.bound * pref.abs()),
    );
    Ok(MPhi {
        value: pref * r.value * factor,
        budget,
    })
}

/// Weighted prediction: archimedean term + prime-square sum + M(phi).
pub fn d1_ratios_weighted(
    f: &TestFunctionPair,
    params: &GammaFactorParams,
    tol: f64,
    completion: Completion,
) -> Result<DensityBreakdown> {
    let gamma = gamma_term_integral(f, params, tol)?;
    let psq = prime_sum_p1(f, params.r, None)?;
    let mphi = m_phi(f, params, tol, completion)?;

    let mut budget = gamma.budget.clone();
    budget.prime_cutoff = Some(psq.prime_cutoff);
    budget.absorb(&mphi.budget);

    let total = gamma.value + psq.value + mphi.value;
    Ok(DensityBreakdown {
        mode: Mode::Weighted,
        side: Side::RatiosPrediction,
        gamma_term: gamma.value,
        prime_square_term: Some(psq.value),
        m_phi: Some(mphi.value),
        secondary_sum: None,
        s1: None,
        s2: None,
        s3: None,
        total,
        budget,
    })
}

/// Unweighted prediction: archimedean term + the even-power secondary sum
/// (which absorbs the weighted prime-square term as its nu = 2 slice).
pub fn d1_ratios_unweighted(
    f: &TestFunctionPair,
    params: &GammaFactorParams,
    tol: f64,
) -> Result<DensityBreakdown> {
    let gamma = gamma_term_integral(f, params, tol)?;
    let sec = secondary_sum_unweighted(f, params.r, params.level)?;

    let mut budget = gamma.budget.clone();
    budget.prime_cutoff = Some(sec.prime_cutoff);

    let total = gamma.value + sec.value;
    Ok(DensityBreakdown {
        mode: Mode::Unweighted,
        side: Side::RatiosPrediction,
        gamma_term: gamma.value,
        prime_square_term: None,
        m_phi: None,
        secondary_sum: Some(sec.value),
        s1: None,
        s2: None,
        s3: None,
        total,
        budget,
    })
}
