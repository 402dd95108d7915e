//! Riemann zeta on Re(s) > 0 by Euler-Maclaurin summation, with a
//! pole-subtracted companion that is regular at s = 1, the s-derivative,
//! and the prime zeta function P(s) = sum_p p^{-s} for tail corrections.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::KahanComplex as Kahan;
use crate::specfun::gamma::ensure_finite;

fn check_domain(s: Complex64) -> Result<()> {
    ensure_finite(s, "zeta")?;
    if s.re <= 0.0 {
        return Err(Error::domain(format!("zeta needs Re(s) > 0, got {s}")));
    }
    Ok(())
}

/// (e^w - 1)/w, stable near w = 0.
fn expm1_over(w: Complex64) -> Complex64 {
    if w.norm() < 0.25 {
        // 1 + w/2! + w^2/3! + ...
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..20 {
            term *= w / (k as f64);
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Core Euler-Maclaurin evaluation.
///
/// Returns zeta(s) when `subtract_pole` is false, zeta(s) - 1/(s-1) when
/// true, together with a rigorous remainder bound and the cutoff used.
fn zeta_em(s: Complex64, subtract_pole: bool, tol: f64) -> Result<(Complex64, f64, u64)> {
    let mut m = ((s.im.abs() / 4.0).ceil() as u64 + 24).max(24);
    loop {
        let mf = m as f64;
        let mut sum = Kahan::default();
        for n in 1..m {
            let nf = n as f64;
            sum.add((-s * nf.ln()).exp());
        }

        // Integral piece: M^{1-s}/(s-1), or (M^{1-s}-1)/(s-1) with the pole
        // removed, written as -ln M * (e^w - 1)/w with w = (1-s) ln M.
        let integral = if subtract_pole {
            let w = (1.0 - s) * mf.ln();
            -mf.ln() * expm1_over(w)
        } else {
            let sm1 = s - 1.0;
            if sm1.norm() < 1e-13 {
                return Err(Error::pole("zeta at s = 1"));
            }
            ((1.0 - s) * mf.ln()).exp() / sm1
        };

        let m_pow = (-s * mf.ln()).exp();
        let mut value = sum.value() + integral + 0.5 * m_pow;

        // Bernoulli corrections: B_{2j}/(2j)! * (s)(s+1)...(s+2j-2) * M^{-s-2j+1}.
        let mut poch = s;
        let m2 = mf * mf;
        let mut m_fac = m_pow / mf;
        let mut last_term = 0.0f64;
        let mut j_used = 0usize;
        for (j, coeff) in BERN_COEFFS.iter().enumerate() {
            let term = *coeff * poch * m_fac;
            value += term;
            last_term = term.norm();
            j_used = j + 1;
            if last_term < tol * 1e-3 {
                break;
            }
            // extend pochhammer by (s+2j-1)(s+2j) and M^{-2}
            let base = 2.0 * (j as f64) + 1.0;
            poch = poch * (s + (base - 1.0)) * (s + base);
            m_fac /= m2;
        }

        // Remainder bound: first omitted term times |s+2J+1|/(sigma+2J+1).
        let twoj = 2.0 * j_used as f64;
        let ratio = (s + (twoj + 1.0)).norm() / (s.re + twoj + 1.0);
        let err = last_term * ratio.max(1.0);

        if err <= tol || m >= 4_000_000 {
            return Ok((value, err, m));
        }
        m *= 2;
    }
}

/// Actual Bernoulli/(2j)! coefficients (exact fractions evaluated in f64).
const BERN_COEFFS: [f64; 11] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 8.028_576_626_982_912e20,
    854_513.0 / 1.551_121_004_333_098_6e23,
];

/// Riemann zeta for Re(s) > 0, s != 1.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    check_domain(s)?;
    if (s - 1.0).norm() < 1e-13 {
        return Err(Error::pole("zeta at s = 1"));
    }
    Ok(zeta_em(s, false, 1e-15)?.0)
}

/// zeta(s) - 1/(s-1); regular at s = 1 where it equals Euler's constant.
pub fn zeta_minus_pole(s: Complex64) -> Result<Complex64> {
    check_domain(s)?;
    Ok(zeta_em(s, true, 1e-15)?.0)
}

/// d/ds zeta(s), by term-wise differentiation of the Euler-Maclaurin formula.
pub fn zeta_deriv(s: Complex64) -> Result<Complex64> {
    check_domain(s)?;
    if (s - 1.0).norm() < 1e-10 {
        return Err(Error::pole("zeta' at s = 1"));
    }
    let m = ((s.im.abs() / 4.0).ceil() as u64 + 32).max(32);
    let mf = m as f64;
    let lnm = mf.ln();

    let mut sum = Kahan::default();
    for n in 2..m {
        let nf = n as f64;
        sum.add(-nf.ln() * (-s * nf.ln()).exp());
    }

    let sm1 = s - 1.0;
    let m1s = ((1.0 - s) * lnm).exp();
    let d_integral = m1s * (-lnm / sm1 - 1.0 / (sm1 * sm1));
    let m_pow = (-s * lnm).exp();
    let mut value = sum.value() + d_integral - 0.5 * lnm * m_pow;

    let mut poch = s;
    let mut dpoch_over_poch = 1.0 / s;
    let mut m_fac = m_pow / mf;
    let m2 = mf * mf;
    for (j, coeff) in BERN_COEFFS.iter().enumerate() {
        let term = *coeff * poch * m_fac;
        value += term * (dpoch_over_poch - lnm);
        if term.norm() * (dpoch_over_poch.norm() + lnm) < 1e-17 {
            break;
        }
        let base = 2.0 * (j as f64) + 1.0;
        dpoch_over_poch += 1.0 / (s + (base - 1.0)) + 1.0 / (s + base);
        poch = poch * (s + (base - 1.0)) * (s + base);
        m_fac /= m2;
    }
    Ok(value)
}

/// Moebius mu for small n (enough for the prime-zeta series).
fn moebius(n: u64) -> i64 {
    let mut n = n;
    let mut mu = 1i64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Prime zeta P(s) = sum_p p^{-s} for Re(s) >= 1.4, via
/// P(s) = sum_{n>=1} mu(n)/n * ln zeta(n s).
///
/// The principal log is safe here: |arg zeta(sigma + it)| <= P(sigma) < pi
/// for sigma >= 1.4.
pub fn prime_zeta(s: Complex64) -> Result<Complex64> {
    ensure_finite(s, "prime_zeta")?;
    if s.re < 1.4 {
        return Err(Error::domain(format!(
            "prime_zeta needs Re(s) >= 1.4, got {s}"
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=60u64 {
        let mu = moebius(n);
        if mu == 0 {
            continue;
        }
        let ns = s * n as f64;
        // For sigma*n large, ln zeta(ns) ~ 2^{-ns}: stop when negligible.
        if ns.re * std::f64::consts::LN_2 > 43.0 {
            break;
        }
        let z = zeta_em(ns, false, 1e-16)?.0;
        sum += (mu as f64 / n as f64) * z.ln();
    }
    Ok(sum)
}

/// Tail sum_{p > cutoff} p^{-s}, given the primes up to `cutoff`.
pub fn prime_zeta_tail(s: Complex64, primes_le_cutoff: &[u64]) -> Result<Complex64> {
    let mut head = Kahan::default();
    for &p in primes_le_cutoff {
        head.add((-s * (p as f64).ln()).exp());
    }
    Ok(prime_zeta(s)? - head.value())
}
