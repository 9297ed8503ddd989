//! Associated Legendre functions and complex spherical harmonics.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_order, num_coeffs, HarmonicIndex};
use crate::error::{Error, Result};

/// Unnormalised `P_n^m(x)` including the Condon–Shortley phase `(-1)^m`.
pub fn assoc_legendre(order: usize, degree: usize, x: f64) -> Result<f64> {
    check_order(order)?;
    if degree > order {
        return Err(Error::InvalidIndex {
            order,
            degree: degree as i64,
        });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            function: "assoc_legendre",
            x,
        });
    }
    let m = degree;
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= -((2 * i - 1) as f64) * s;
    }
    if order == m {
        return Ok(pmm);
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if order == m + 1 {
        return Ok(pm1);
    }
    let mut pm0 = pmm;
    for l in (m + 2)..=order {
        let pl = ((2 * l - 1) as f64 * x * pm1 - (l + m - 1) as f64 * pm0) / (l - m) as f64;
        pm0 = pm1;
        pm1 = pl;
    }
    Ok(pm1)
}

/// Normalised Legendre values `sqrt((2n+1)/(4π) (n-m)!/(n+m)!) P_n^m(cos θ)`
/// for `0 <= m <= n <= N`, stored at flat index `n² + n + m`.
fn normalized_legendre(max_order: usize, theta: f64, out: &mut [f64]) {
    let (s, x) = theta.sin_cos();
    let s = s.abs();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=max_order {
        if m > 0 {
            pmm *= -(((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt() * s;
        }
        let flat = |n: usize| n * n + n + m;
        out[flat(m)] = pmm;
        if m == max_order {
            break;
        }
        let mut prev = pmm;
        let mut cur = ((2 * m + 3) as f64).sqrt() * x * pmm;
        out[flat(m + 1)] = cur;
        let mut a_prev = ((2 * m + 3) as f64).sqrt();
        for n in (m + 2)..=max_order {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let next = a * (x * cur - prev / a_prev);
            prev = cur;
            cur = next;
            a_prev = a;
            out[flat(n)] = cur;
        }
    }
}

/// All `Y_{n,m}(θ, φ)` for `n <= max_order`, flat-indexed.
pub fn sph_harm_all(max_order: usize, theta: f64, phi: f64) -> Result<Vec<Complex64>> {
    check_order(max_order)?;
    let mut legendre = vec![0.0; num_coeffs(max_order)];
    normalized_legendre(max_order, theta, &mut legendre);
    let mut out = vec![Complex64::new(0.0, 0.0); num_coeffs(max_order)];
    for m in 0..=max_order {
        let phase = Complex64::from_polar(1.0, m as f64 * phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for n in m..=max_order {
            let base = n * n + n;
            let y = phase * legendre[base + m];
            out[base + m] = y;
            if m > 0 {
                out[base - m] = y.conj() * sign;
            }
        }
    }
    Ok(out)
}

/// `Y_{n,m}(θ, φ)`; negative degrees via `Y_{n,-m} = (-1)^m conj(Y_{n,m})`.
pub fn sph_harm(order: usize, degree: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let idx = HarmonicIndex::new(order, degree)?;
    Ok(sph_harm_all(order, theta, phi)?[idx.flat()])
}
