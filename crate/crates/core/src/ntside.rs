//! The number-theory side of the comparison: explicit-formula 1-level
//! density from Hecke eigenvalue data, its S1/S2/S3 decomposition, and
//! comparison reports against the ratios prediction.
//!
//! Zeros are never computed; the explicit-formula prime-sum expansion *is*
//! the number-theory side.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::{PrecisionBudget, TailEstimate};
use crate::error::{Error, Result};
use crate::gammafactor::{gamma_term_integral, GammaFactorParams};
use crate::primes::{prime_sum_p1, sieve_primes};
use crate::ratios::{DensityBreakdown, Mode, Side};
use crate::testfn::TestFunctionPair;

/// One newform: normalized eigenvalues lambda_f(p) for p != N, the level
/// eigenvalue when N > 1, the functional-equation sign, and its family
/// weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Newform {
    pub k: u32,
    pub level: u64,
    /// p -> lambda_f(p), for primes p <= p_max, p != level.
    pub eigenvalues: BTreeMap<u64, f64>,
    /// lambda_f(N) for N > 1 (satisfies lambda^2 = 1/N), absent for N = 1.
    pub lambda_at_level: Option<f64>,
    pub sign: i8,
    /// Weight used in weighted averages; the family normalizes these to
    /// sum to 1.
    pub weight: f64,
}

/// A family of newforms sharing (k, N), with eigenvalue coverage p <= p_max.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewformFamily {
    pub k: u32,
    pub level: u64,
    pub forms: Vec<Newform>,
    pub p_max: u64,
}

impl NewformFamily {
    pub fn params(&self) -> Result<GammaFactorParams> {
        GammaFactorParams::new(self.k, self.level)
    }
}

/// lambda_f(p^nu) by the Chebyshev recursion
/// lambda(p^{nu+1}) = lambda(p) lambda(p^nu) - lambda(p^{nu-1}).
pub fn hecke_power(form: &Newform, p: u64, nu: u32) -> Result<f64> {
    if nu == 0 {
        return Ok(1.0);
    }
    let lam = *form
        .eigenvalues
        .get(&p)
        .ok_or_else(|| Error::Coverage {
            needed: p,
            have: *form.eigenvalues.keys().last().unwrap_or(&0),
        })?;
    let mut prev = 1.0f64; // lambda(p^0)
    let mut cur = lam; // lambda(p^1)
    for _ in 1..nu {
        (prev, cur) = (cur, lam * cur - prev);
    }
    Ok(cur)
}

/// alpha^nu + alpha^{-nu} = lambda(p^nu) - lambda(p^{nu-2}) for nu >= 2;
/// equals lambda(p) at nu = 1 and 2 at nu = 0.
pub fn alpha_power_sum(form: &Newform, p: u64, nu: u32) -> Result<f64> {
    match nu {
        0 => Ok(2.0),
        1 => hecke_power(form, p, 1),
        _ => Ok(hecke_power(form, p, nu)? - hecke_power(form, p, nu - 2)?),
    }
}

/// The three prime-power sums of the explicit-formula expansion, returned
/// with their conventional (positive) normalization:
///   S1 = 2 sum_f w_f sum_{p != N} lambda(p) p^{-1/2} phihat(log p/log R) log p/log R
///   S2 = ... lambda(p^2)/p, argument doubled
///   S3 = ... (lambda(p^nu) - lambda(p^{nu-2})) p^{-nu/2}, nu >= 3.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SSums {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

/// Family weights: the stored (normalized) weights, or flat 1/|family|.
fn family_weights(family: &NewformFamily, weighted: bool) -> Vec<f64> {
    if weighted {
        family.forms.iter().map(|f| f.weight).collect()
    } else {
        vec![1.0 / family.forms.len() as f64; family.forms.len()]
    }
}

pub fn s_sums(
    family: &NewformFamily,
    f: &TestFunctionPair,
    r: f64,
    weighted: bool,
) -> Result<SSums> {
    if family.forms.is_empty() {
        return Err(Error::InvalidFamily("empty family".into()));
    }
    let log_r = r.ln();
    // Coverage: S1 reaches primes up to R^sigma.
    let need = (f.sigma * log_r).exp().ceil() as u64;
    if family.p_max < need {
        return Err(Error::Coverage {
            needed: need,
            have: family.p_max,
        });
    }
    let primes = sieve_primes(need.max(2))?;
    let weights = family_weights(family, weighted);

    let (mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64);
    for (form, w) in family.forms.iter().zip(&weights) {
        for &p in &primes.primes {
            if p == family.level {
                continue;
            }
            let pf = p as f64;
            let lp = pf.ln();
            let x1 = lp / log_r;
            if x1 >= f.sigma {
                break;
            }
            s1 += w * hecke_power(form, p, 1)? / pf.sqrt() * f.phi_hat(x1) * lp / log_r;
            let x2 = 2.0 * x1;
            if x2 < f.sigma {
                s2 += w * hecke_power(form, p, 2)? / pf * f.phi_hat(x2) * lp / log_r;
            }
            let mut nu = 3u32;
            loop {
                let xn = nu as f64 * x1;
                if xn >= f.sigma {
                    break;
                }
                s3 += w * alpha_power_sum(form, p, nu)? / pf.powf(nu as f64 / 2.0)
                    * f.phi_hat(xn)
                    * lp
                    / log_r;
                nu += 1;
            }
        }
    }
    Ok(SSums {
        s1: 2.0 * s1,
        s2: 2.0 * s2,
        s3: 2.0 * s3,
    })
}

/// Explicit-formula 1-level density from eigenvalue data. The archimedean
/// term is the *same code path* as the prediction side, so the two sides
/// agree on it bit for bit; the p = N prime-power contributions are
/// excluded and their trivial O(1/sqrt N) size is recorded in the budget.
pub fn d1_nt(
    family: &NewformFamily,
    f: &TestFunctionPair,
    params: &GammaFactorParams,
    weighted: bool,
    tol: f64,
) -> Result<DensityBreakdown> {
    if family.k != params.k || family.level != params.level {
        return Err(Error::InvalidFamily(format!(
            "family is (k={}, N={}) but params are (k={}, N={})",
            family.k, family.level, params.k, params.level
        )));
    }
    let gamma = gamma_term_integral(f, params, tol)?;
    let psq = prime_sum_p1(f, params.r, None)?;
    let sums = s_sums(family, f, params.r, weighted)?;

    let mut budget = gamma.budget.clone();
    budget.prime_cutoff = Some(psq.prime_cutoff);
    if params.level > 1 {
        // Trivial bound on the discarded p = N prime powers:
        // 2 |lambda(N)| phihat(..)/sqrt(N) <= 2/sqrt(N) * phihat-scale.
        budget.push_tail(
            "discarded p = N prime powers",
            TailEstimate::rigorous(
                4.0 * f.phi_hat(0.0).abs() * (params.level as f64).ln()
                    / ((params.level as f64).sqrt() * params.log_r()),
            ),
        );
    }

    let total = gamma.value + psq.value - sums.s1 - sums.s2 - sums.s3;
    Ok(DensityBreakdown {
        mode: if weighted {
            Mode::Weighted
        } else {
            Mode::Unweighted
        },
        side: Side::NumberTheory,
        gamma_term: gamma.value,
        prime_square_term: Some(psq.value),
        m_phi: None,
        secondary_sum: None,
        s1: Some(-sums.s1),
        s2: Some(-sums.s2),
        s3: Some(-sums.s3),
        total,
        budget,
    })
}

/// Closed-form model of the unweighted secondary term at level 1: the pure
/// eigenvalue sums acquire main terms (k-1)/12 / dim * p^{-nu/2} at even
/// prime powers, which fold with the prime-square term into
/// 2 sum_{nu even} sum_p [1/p - beta/p^2, beta (p-1)/p^nu ...] with
/// beta = (k-1)/(12 dim).
pub fn unweighted_secondary_model(
    k: u32,
    exact_dim: u32,
    f: &TestFunctionPair,
    r: f64,
) -> Result<f64> {
    if exact_dim == 0 {
        return Err(Error::domain("model needs a nonzero-dimensional space"));
    }
    let beta = (k as f64 - 1.0) / 12.0 / exact_dim as f64;
    let log_r = r.ln();
    let cutoff = (0.5 * f.sigma * log_r).exp().ceil() as u64;
    if cutoff < 2 {
        return Ok(0.0);
    }
    let primes = sieve_primes(cutoff.max(2))?;
    let mut sum = 0.0f64;
    for &p in &primes.primes {
        let pf = p as f64;
        let lp = pf.ln();
        // nu = 2 slice: psq contributes 1/p, the S2 model removes beta/p^2.
        let x2 = 2.0 * lp / log_r;
        if x2 < f.sigma {
            sum += (1.0 / pf - beta / (pf * pf)) * f.phi_hat(x2) * lp / log_r;
        }
        // nu >= 4 even: the S3 model contributes beta (p-1)/p^nu.
        let mut nu = 4u32;
        loop {
            let xn = nu as f64 * lp / log_r;
            if xn >= f.sigma {
                break;
            }
            sum += beta * (pf - 1.0) / pf.powi(nu as i32) * f.phi_hat(xn) * lp / log_r;
            nu += 2;
        }
    }
    Ok(2.0 * sum)
}

/// Per-component comparison of two breakdowns of the same quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub gamma_diff: f64,
    pub gamma_bit_identical: bool,
    pub prime_square_diff: Option<f64>,
    /// The conjectural residual: (-S1-S2-S3) - M(phi) (or the secondary-sum
    /// analogue in unweighted mode).
    pub residual: f64,
    pub residual_nt: f64,
    pub residual_prediction: f64,
    pub total_diff: f64,
}

/// Compare an explicit-formula breakdown against a prediction breakdown of
/// the same mode and test function.
pub fn compare(prediction: &DensityBreakdown, nt: &DensityBreakdown) -> Result<ComparisonReport> {
    if prediction.mode != nt.mode {
        return Err(Error::domain(format!(
            "mode mismatch: {:?} vs {:?}",
            prediction.mode, nt.mode
        )));
    }
    if prediction.side != Side::RatiosPrediction || nt.side != Side::NumberTheory {
        return Err(Error::domain("compare expects (prediction, number-theory)"));
    }
    let residual_nt = nt.residual_component();
    let residual_prediction = prediction.residual_component();
    let psq_diff = match (prediction.prime_square_term, nt.prime_square_term) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    Ok(ComparisonReport {
        gamma_diff: prediction.gamma_term - nt.gamma_term,
        gamma_bit_identical: prediction.gamma_term.to_bits() == nt.gamma_term.to_bits(),
        prime_square_diff: psq_diff,
        residual: residual_nt - residual_prediction,
        residual_nt,
        residual_prediction,
        total_diff: prediction.total - nt.total,
    })
}
