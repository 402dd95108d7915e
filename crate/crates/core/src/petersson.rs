//! Kloosterman sums and the Petersson identity as an exact,
//! truncation-controlled numerical statement, including the newform-only
//! corrected variant at prime level.
//!
//! The full-basis average of lambda_f(m) lambda_f(n) with harmonic weights
//! equals delta(m,n) plus 2 pi i^k sum_{c = 0 mod N} S(m,n;c)/c
//! J_{k-1}(4 pi sqrt(mn)/c); the c-series is cut where the Weil bound
//! times the Bessel envelope certifies the discarded tail.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::gammafactor::is_prime;
use crate::specfun::{bessel_j, ln_gamma_real};

const MAX_KLOOSTERMAN_C: u64 = 10_000_000;
const MAX_BESSEL_ARG: f64 = 4500.0;

/// Extended-gcd modular inverse of a mod c (a, c coprime).
fn mod_inverse(a: u64, c: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, c as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    let c = c as i128;
    Some(((old_s % c + c) % c) as u64)
}

/// Number of divisors, by trial division.
pub fn divisor_count(n: u64) -> u64 {
    let mut n = n;
    let mut tau = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            tau *= e + 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        tau *= 2;
    }
    tau
}

fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    num_integer::gcd(num_integer::gcd(a, b), c)
}

/// Weil bound tau(c) sqrt(gcd(m,n,c)) sqrt(c).
pub fn weil_bound(m: u64, n: u64, c: u64) -> f64 {
    divisor_count(c) as f64 * (gcd3(m, n, c) as f64).sqrt() * (c as f64).sqrt()
}

/// Classical Kloosterman sum S(m,n;c) = sum*_{d mod c} e((m d + n dbar)/c).
///
/// The sum is real (d <-> c-d pairs conjugate terms); the imaginary part is
/// accumulated, checked below 1e-9, and discarded.
pub fn kloosterman(m: u64, n: u64, c: u64) -> Result<f64> {
    if c == 0 || c > MAX_KLOOSTERMAN_C {
        return Err(Error::domain(format!(
            "kloosterman modulus {c} outside [1, {MAX_KLOOSTERMAN_C}]"
        )));
    }
    if c == 1 {
        return Ok(1.0); // single (empty-modulus) term e(0)
    }
    let key = kloosterman_key(m, n, c);
    if let Some(v) = cache_get(&key) {
        return Ok(v);
    }

    let mr = m % c;
    let nr = n % c;
    let two_pi_over_c = 2.0 * std::f64::consts::PI / c as f64;
    let mut re = 0.0f64;
    let mut re_c = 0.0f64; // Kahan compensation
    let mut im = 0.0f64;
    for d in 1..c {
        if num_integer::gcd(d, c) != 1 {
            continue;
        }
        let dbar = mod_inverse(d, c).expect("coprime d has an inverse");
        let phase_num = ((mr as u128 * d as u128) + (nr as u128 * dbar as u128)) % c as u128;
        let phase = two_pi_over_c * phase_num as f64;
        let (s, co) = phase.sin_cos();
        let y = co - re_c;
        let t = re + y;
        re_c = (t - re) - y;
        re = t;
        im += s;
    }
    let scale = (c as f64).sqrt() * divisor_count(c) as f64;
    if im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::no_convergence(format!(
            "kloosterman({m},{n};{c}): imaginary part {im:e} above threshold"
        )));
    }
    cache_put(key, re);
    Ok(re)
}

fn kloosterman_key(m: u64, n: u64, c: u64) -> (u64, u64, u64) {
    let (mr, nr) = (m % c, n % c);
    // S(m,n;c) = S(n,m;c): normalize the key order.
    if mr <= nr {
        (mr, nr, c)
    } else {
        (nr, mr, c)
    }
}

fn cache() -> &'static Mutex<HashMap<(u64, u64, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_get(key: &(u64, u64, u64)) -> Option<f64> {
    // Only cache small moduli; large ones are rare one-offs.
    if key.2 > 100_000 {
        return None;
    }
    cache().lock().unwrap().get(key).copied()
}

fn cache_put(key: (u64, u64, u64), v: f64) {
    if key.2 > 100_000 {
        return;
    }
    let mut guard = cache().lock().unwrap();
    if guard.len() < 4_000_000 {
        guard.insert(key, v);
    }
}

/// A Petersson average with its series cutoff and rigorous tail bound.
#[derive(Debug, Clone, Copy)]
pub struct PeterssonValue {
    pub value: f64,
    pub c_cutoff: u64,
    pub tail_bound: f64,
    /// Set when the requested tolerance was unreachable (tail dominates) or
    /// when an oldform correction had to be bounded rather than computed.
    pub low_confidence: bool,
}

/// Rigorous bound on |2 pi sum_{c > C, c = 0 mod N} S(m,n;c)/c J_{k-1}(x_c)|
/// from the Weil bound (with tau(c) <= 2 sqrt(c)) and the Bessel envelope
/// |J_{k-1}(x)| <= (x/2)^{k-1}/(k-1)!.
pub fn truncation_bound(k: u32, level: u64, m: u64, n: u64, c_cutoff: u64) -> Result<f64> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::domain("truncation_bound needs even k >= 4"));
    }
    let gmn = num_integer::gcd(m, n) as f64; // gcd(m,n,c) <= gcd(m,n)
    let km1 = (k - 1) as f64;
    // log of 4 pi sqrt(gmn) (2 pi sqrt(mn))^{k-1} / Gamma(k)
    let log_pref = (4.0 * std::f64::consts::PI * gmn.sqrt()).ln()
        + km1 * (2.0 * std::f64::consts::PI * ((m as f64) * (n as f64)).sqrt()).ln()
        - ln_gamma_real(k as f64)?;
    // sum_{c > C, N | c} c^{-(k-1)} <= N^{-(k-1)} * [ M^{-(k-2)}/(k-2) + M^{-(k-1)} ],
    // M = floor(C/N).
    let mval = (c_cutoff / level).max(1) as f64;
    let log_csum = -km1 * (level as f64).ln()
        + ((mval.powf(-(km1 - 1.0)) / (km1 - 1.0)) + mval.powf(-km1)).ln();
    let log_bound = log_pref + log_csum;
    Ok(if log_bound > 700.0 {
        f64::INFINITY
    } else {
        log_bound.exp()
    })
}

/// Full-basis Petersson average Delta_{k,N}(m,n) = delta(m,n) +
/// 2 pi i^k sum_{c = 0 mod N} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c).
pub fn petersson_full(k: u32, level: u64, m: u64, n: u64, tol: f64) -> Result<PeterssonValue> {
    if k < 4 || k % 2 != 0 || k > 200 {
        return Err(Error::domain(format!(
            "petersson_full needs even 4 <= k <= 200, got {k}"
        )));
    }
    if level != 1 && !is_prime(level) {
        return Err(Error::domain("level must be 1 or prime"));
    }
    if m < 1 || n < 1 {
        return Err(Error::domain("m, n must be >= 1"));
    }

    // Choose the cutoff: smallest N 2^j with tail below tol.
    let mut c_cutoff = level;
    let mut tail = truncation_bound(k, level, m, n, c_cutoff)?;
    while tail > tol && c_cutoff < MAX_KLOOSTERMAN_C {
        c_cutoff = (c_cutoff * 2).min(MAX_KLOOSTERMAN_C);
        tail = truncation_bound(k, level, m, n, c_cutoff)?;
    }
    let mut low_confidence = tail > tol;
    if low_confidence {
        // The tolerance is unreachable (m, n huge relative to kN): the tail
        // dominates whatever we compute, so do not grind through millions of
        // Kloosterman sums to refine a value the bound already swamps.
        c_cutoff = level * 1024;
        tail = truncation_bound(k, level, m, n, c_cutoff)?;
    }
    if c_cutoff / level > 400_000 {
        return Err(Error::no_convergence(format!(
            "petersson_full(k={k}, N={level}, m={m}, n={n}): {} series terms needed",
            c_cutoff / level
        )));
    }

    let x_num = 4.0 * std::f64::consts::PI * ((m as f64) * (n as f64)).sqrt();
    let sign = if k % 4 == 0 { 1.0 } else { -1.0 }; // i^k for even k
    let mut series = 0.0f64;
    let mut c = level;
    while c <= c_cutoff {
        let x = x_num / c as f64;
        if x > MAX_BESSEL_ARG {
            // Unevaluable term: charge its rigorous bound to the tail.
            tail += 2.0 * std::f64::consts::PI * weil_bound(m, n, c) / c as f64;
            low_confidence = true;
        } else {
            let s = kloosterman(m, n, c)?;
            series += s / c as f64 * bessel_j(k - 1, x)?;
        }
        c += level;
    }

    let delta = if m == n { 1.0 } else { 0.0 };
    Ok(PeterssonValue {
        value: delta + 2.0 * std::f64::consts::PI * sign * series,
        c_cutoff,
        tail_bound: tail,
        low_confidence,
    })
}

/// Newform-only Petersson average at prime level: the full-basis value with
/// the level-1 oldform contribution removed and the weights renormalized to
/// sum to one.
///
/// With exact level-1 eigenvalues supplied, the oldform block for each
/// level-1 form g carries harmonic mass about 2 omega_g(1)/(N+1) (two
/// copies, Petersson norms scaled by the index of Gamma_0(N)); for
/// m, n coprime to N its eigenvalues match lambda_g, so the subtraction is
/// explicit and only the Gram-Schmidt cross terms, of relative size
/// O(1/sqrt(N)), are charged to the tail. Without data the whole oldform
/// block is bounded instead.
pub fn petersson_newforms(
    k: u32,
    level: u64,
    m: u64,
    n: u64,
    level_one: Option<&[crate::data::QExpansion]>,
    tol: f64,
) -> Result<PeterssonValue> {
    if !is_prime(level) {
        return Err(Error::domain("petersson_newforms needs prime level"));
    }
    let full_mn = petersson_full(k, level, m, n, tol)?;
    let full_11 = petersson_full(k, level, 1, 1, tol)?;

    let nf = level as f64;
    let mut old_mn = 0.0;
    let mut old_11 = 0.0;
    let mut model_err = 0.0;
    let mut low_confidence = full_mn.low_confidence || full_11.low_confidence;

    match level_one {
        Some(forms) if m % level != 0 && n % level != 0 => {
            for g in forms {
                // omega_g(1) for a one-dimensional space is the level-1
                // (1,1) average; for larger spaces split it evenly and note
                // the widened error below.
                let omega_g =
                    petersson_full(k, 1, 1, 1, tol)?.value / forms.len().max(1) as f64;
                let w_old = 2.0 * omega_g / (nf + 1.0);
                old_mn += w_old * g.lambda(m)? * g.lambda(n)?;
                old_11 += w_old;
                // Cross-term residue of the orthogonalized oldspace basis.
                model_err += 4.0 * omega_g / ((nf + 1.0) * nf.sqrt())
                    * (divisor_count(m) * divisor_count(n)) as f64;
            }
        }
        _ => {
            // No data (or m,n not coprime to N): bound the whole block.
            let dim_bound = (k as f64) / 12.0 + 1.0;
            model_err = 2.0 * dim_bound * 2.0 / (nf + 1.0)
                * (divisor_count(m) * divisor_count(n)) as f64;
            low_confidence = true;
        }
    }

    let num = full_mn.value - old_mn;
    let den = full_11.value - old_11;
    if den.abs() < 1e-6 {
        return Err(Error::no_convergence(
            "petersson_newforms: newform harmonic mass too small to normalize",
        ));
    }
    let value = num / den;
    let tail = (full_mn.tail_bound + value.abs() * full_11.tail_bound + model_err) / den.abs();
    Ok(PeterssonValue {
        value,
        c_cutoff: full_mn.c_cutoff.max(full_11.c_cutoff),
        tail_bound: tail,
        low_confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kloosterman_small_values() {
        // S(1,1;1) = 1 (single term); S(1,1;3) = -1 by direct enumeration:
        // d=1 -> e(2/3), d=2 -> e(4/3); sum = 2 cos(2 pi/3) = -1.
        assert_eq!(kloosterman(1, 1, 1).unwrap(), 1.0);
        assert!((kloosterman(1, 1, 3).unwrap() + 1.0).abs() < 1e-12);

        // S(2,3;5): direct enumeration oracle.
        let mut hand = 0.0f64;
        for d in 1u64..5 {
            let dbar = mod_inverse(d, 5).unwrap();
            let phase = 2.0 * std::f64::consts::PI * ((2 * d + 3 * dbar) % 5) as f64 / 5.0;
            hand += phase.cos();
        }
        assert!((kloosterman(2, 3, 5).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn kloosterman_symmetry_and_weil() {
        for &(m, n, c) in &[(1u64, 2u64, 7u64), (3, 5, 12), (4, 9, 35), (1, 1, 100)] {
            let a = kloosterman(m, n, c).unwrap();
            let b = kloosterman(n, m, c).unwrap();
            assert!((a - b).abs() < 1e-10, "S({m},{n};{c})={a} vs {b}");
            assert!(
                a.abs() <= weil_bound(m, n, c) * (1.0 + 1e-12),
                "Weil violated at ({m},{n};{c})"
            );
        }
    }

    #[test]
    fn kloosterman_twisted_multiplicativity() {
        // S(m,n;c1 c2) = S(m c2bar^2, n; c1) S(m c1bar^2, n; c2), (c1,c2)=1.
        for &(m, n, c1, c2) in &[(1u64, 1u64, 3u64, 4u64), (2, 5, 5, 9), (7, 11, 8, 9)] {
            let lhs = kloosterman(m, n, c1 * c2).unwrap();
            let c2bar = mod_inverse(c2 % c1, c1).unwrap();
            let c1bar = mod_inverse(c1 % c2, c2).unwrap();
            let rhs = kloosterman(m * c2bar * c2bar % c1, n, c1).unwrap()
                * kloosterman(m * c1bar * c1bar % c2, n, c2).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "({m},{n};{c1}x{c2}): {lhs} vs {rhs}");
        }
    }

    #[test]
    fn mod_inverse_agrees_with_definition() {
        for c in [5u64, 12, 97, 1000] {
            for d in 1..c.min(50) {
                if num_integer::gcd(d, c) == 1 {
                    let inv = mod_inverse(d, c).unwrap();
                    assert_eq!(d * inv % c, 1);
                }
            }
        }
    }

    #[test]
    fn truncation_bound_monotone_and_tiny() {
        let b100 = truncation_bound(12, 1, 1, 1, 100).unwrap();
        assert!(b100 < 1e-12, "bound at C=100 is {b100:e}");
        let b200 = truncation_bound(12, 1, 1, 1, 200).unwrap();
        assert!(b200 <= b100);
        // Slowest decay still finite.
        let b4 = truncation_bound(4, 1, 1, 1, 8).unwrap();
        assert!(b4.is_finite() && b4 > b100);
    }

    #[test]
    fn petersson_identity_weight_12() {
        // Delta_{12,1}(1,1) = omega_Delta; the c-series converges fast and
        // the value is pinned against an independent coarse series here.
        let v = petersson_full(12, 1, 1, 1, 1e-10).unwrap();
        assert!(v.tail_bound < 1e-10);
        let mut direct = 1.0f64;
        for c in 1u64..=60 {
            let x = 4.0 * std::f64::consts::PI / c as f64;
            direct += 2.0 * std::f64::consts::PI * kloosterman(1, 1, c).unwrap() / c as f64
                * bessel_j(11, x).unwrap();
        }
        assert!((v.value - direct).abs() < 1e-8, "{} vs {direct}", v.value);
        // lambda(2) for weight 12 is tau(2)/2^{5.5} = -24/2^{5.5}.
        let v2 = petersson_full(12, 1, 1, 2, 1e-10).unwrap();
        let lambda2 = -24.0 / 2f64.powf(5.5);
        assert!(
            (v2.value / v.value - lambda2).abs() < 1e-7,
            "ratio {} vs {lambda2}",
            v2.value / v.value
        );
    }

    #[test]
    fn petersson_newforms_mass_is_one() {
        let forms = crate::data::generate_level_one_eigenforms(12, 50).unwrap();
        let v = petersson_newforms(12, 101, 1, 1, Some(std::slice::from_ref(&forms)), 1e-8)
            .unwrap();
        assert_eq!(v.value, 1.0);
        let v_nodata = petersson_newforms(12, 101, 1, 1, None, 1e-8).unwrap();
        assert_eq!(v_nodata.value, 1.0);
        assert!(v_nodata.low_confidence);
        assert!(v_nodata.tail_bound > v.tail_bound);
    }

    #[test]
    fn huge_mn_flagged_low_confidence() {
        let v = petersson_full(4, 1, 50_000_000, 49_999_999, 1.0).unwrap();
        assert!(v.low_confidence);
        assert!(v.tail_bound > 0.0);
    }
}
