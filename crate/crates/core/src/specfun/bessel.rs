//! Spherical Bessel and Hankel functions of integer order and real argument.

use num_complex::Complex64;

use super::check_order;
use crate::error::{Error, Result};

const RESCALE_THRESHOLD: f64 = 1e100;

/// `j_n(x)` for a single order.
pub fn spherical_bessel_j(order: usize, x: f64) -> Result<f64> {
    Ok(spherical_bessel_j_all(order, x)?[order])
}

/// `j_0(x), ..., j_N(x)`.
///
/// Orders with `x < n/2` use the power series; the rest come from Miller's
/// downward recurrence normalised by `Σ (2n+1) j_n² = 1`.
pub fn spherical_bessel_j_all(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_order(max_order)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "spherical_bessel_j",
            x,
        });
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }

    // Orders handled by the series: n > 2x.
    let series_from = (2.0 * x).floor() as usize + 1;
    let miller_to = max_order.min(series_from.saturating_sub(1));
    if series_from > 0 && miller_to < series_from {
        miller(miller_to, x, &mut out[..=miller_to]);
    }
    for (n, slot) in out.iter_mut().enumerate().skip(series_from.max(1)) {
        *slot = series(n, x);
    }
    Ok(out)
}

fn miller(max_order: usize, x: f64, out: &mut [f64]) {
    let start = (max_order as f64).max(x) + 10.0 * x.cbrt().max(1.0) + 20.0;
    let start = start.ceil() as usize;
    let mut next = 0.0; // f_{n+1}
    let mut cur = 1.0; // f_n
    let mut norm = 0.0;
    for n in (0..=start).rev() {
        if n <= max_order {
            out[n] = cur;
        }
        norm += (2 * n + 1) as f64 * cur * cur;
        if n == 0 {
            break;
        }
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            cur *= s;
            next *= s;
            norm *= s * s;
            for v in out.iter_mut().skip(n.saturating_sub(1)) {
                *v *= s;
            }
        }
    }
    let mut scale = 1.0 / norm.sqrt();
    // Fix the overall sign against the closed forms of j_0 / j_1.
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let reference = if j0.abs() >= j1.abs() || out.len() < 2 {
        j0 * out[0]
    } else {
        j1 * out[1]
    };
    if reference < 0.0 {
        scale = -scale;
    }
    for v in out.iter_mut() {
        *v *= scale;
    }
}

fn series(n: usize, x: f64) -> f64 {
    let mut prefactor = 1.0;
    for i in 1..=n {
        prefactor *= x / (2 * i + 1) as f64;
    }
    if prefactor == 0.0 {
        return 0.0;
    }
    let q = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    prefactor * sum
}

/// `y_0(x), ..., y_N(x)` by upward recurrence.
pub fn spherical_bessel_y_all(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_order(max_order)?;
    if x == 0.0 {
        return Err(Error::SingularArgument {
            function: "spherical_bessel_y",
            x,
        });
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "spherical_bessel_y",
            x,
        });
    }
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(-c / x);
    if max_order >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..max_order {
        let v = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(v);
    }
    Ok(out)
}

/// `h_n^{(1)}(x) = j_n(x) + i y_n(x)`.
pub fn spherical_hankel_h1(order: usize, x: f64) -> Result<Complex64> {
    Ok(spherical_hankel_h1_all(order, x)?[order])
}

pub fn spherical_hankel_h1_all(max_order: usize, x: f64) -> Result<Vec<Complex64>> {
    if x == 0.0 {
        return Err(Error::SingularArgument {
            function: "spherical_hankel_h1",
            x,
        });
    }
    let y = spherical_bessel_y_all(max_order, x)?;
    let j = spherical_bessel_j_all(max_order, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, y))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// j_n(x) = (1 / (2 i^n)) ∫_{-1}^{1} e^{ixt} P_n(t) dt, evaluated with
    /// composite Simpson on a fine grid.
    fn poisson_oracle(n: usize, x: f64) -> f64 {
        let legendre = |t: f64| {
            let (mut p0, mut p1) = (1.0, t);
            if n == 0 {
                return p0;
            }
            for l in 1..n {
                let p2 = ((2 * l + 1) as f64 * t * p1 - l as f64 * p0) / (l + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            p1
        };
        let steps = 20_000;
        let h = 2.0 / steps as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..=steps {
            let t = -1.0 + i as f64 * h;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let p = legendre(t);
            re += w * (x * t).cos() * p;
            im += w * (x * t).sin() * p;
        }
        re *= h / 3.0;
        im *= h / 3.0;
        // divide by 2 i^n
        let v = match n % 4 {
            0 => re,
            1 => im,
            2 => -re,
            _ => -im,
        };
        v / 2.0
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(spherical_bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(spherical_bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(spherical_bessel_j(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_poisson_integral() {
        let got = spherical_bessel_j(2, 1.0).unwrap();
        assert!((got - poisson_oracle(2, 1.0)).abs() < 1e-10);
        for &(n, x) in &[(0, 3.3), (3, 0.7), (5, 12.0), (10, 4.0)] {
            let got = spherical_bessel_j(n, x).unwrap();
            assert!((got - poisson_oracle(n, x)).abs() < 1e-10, "n={n} x={x}");
        }
    }

    #[test]
    fn closed_forms() {
        for &x in &[0.1, 0.5, 1.0, 3.0, 7.5, 20.0, 60.0, 100.0] {
            let (s, c) = f64::sin_cos(x);
            let j = spherical_bessel_j_all(3, x).unwrap();
            let expect = [
                s / x,
                s / (x * x) - c / x,
                (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
                (15.0 / (x * x * x) - 6.0 / x) * s / x - (15.0 / (x * x) - 1.0) * c / x,
            ];
            for n in 0..4 {
                // the closed forms cancel badly for small x
                let tol = 1e-12 * expect[n].abs() + 1e-15 * (1.0 + x.powi(-(n as i32) - 2));
                assert!((j[n] - expect[n]).abs() < tol, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_high_order() {
        // leading term x^n / (2n+1)!!
        let x = 1e-3;
        let mut lead = 1.0;
        for i in 1..=10 {
            lead *= x / (2 * i + 1) as f64;
        }
        let j = spherical_bessel_j(10, x).unwrap();
        assert!((j / lead - 1.0).abs() < 1e-6);
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        // orders around the n = 2x switch point, compared via recurrence identity
        for &x in &[3.0, 10.0, 25.0] {
            let j = spherical_bessel_j_all(64, x).unwrap();
            for n in 1..63 {
                let lhs = j[n - 1] + j[n + 1];
                let rhs = (2 * n + 1) as f64 / x * j[n];
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * (j[n - 1].abs() + j[n + 1].abs() + rhs.abs()),
                    "x={x} n={n}"
                );
            }
        }
    }

    #[test]
    fn wronskian() {
        for &x in &[0.5, 1.0, 5.0, 20.0] {
            let j = spherical_bessel_j_all(21, x).unwrap();
            let y = spherical_bessel_y_all(21, x).unwrap();
            for n in 1..20 {
                let djn = j[n - 1] - (n + 1) as f64 / x * j[n];
                let dyn_ = y[n - 1] - (n + 1) as f64 / x * y[n];
                let w = j[n] * dyn_ - djn * y[n];
                let expect = 1.0 / (x * x);
                assert!(((w - expect) / expect).abs() < 1e-10, "x={x} n={n} w={w}");
            }
        }
    }

    #[test]
    fn hankel_closed_form_and_recurrence() {
        let x = 1.0;
        let h0 = spherical_hankel_h1(0, x).unwrap();
        let expect = -Complex64::i() * Complex64::new(0.0, x).exp() / x;
        assert!((h0 - expect).norm() < 1e-15);

        let x = 2.0;
        let h = spherical_hankel_h1_all(2, x).unwrap();
        let rec = h[1] * (3.0 / x) - h[0];
        assert!((rec - h[2]).norm() < 1e-12);

        let x: f64 = 5.0;
        let (s, c) = x.sin_cos();
        let a = 15.0 / (x * x * x) - 6.0 / x;
        let b = 15.0 / (x * x) - 1.0;
        let j3 = a * s / x - b * c / x;
        let y3 = -a * c / x - b * s / x;
        let h3 = spherical_hankel_h1(3, x).unwrap();
        assert!((h3 - Complex64::new(j3, y3)).norm() < 1e-13);
        let _ = PI;
    }

    #[test]
    fn errors() {
        assert!(matches!(
            spherical_hankel_h1(0, 0.0),
            Err(Error::SingularArgument { .. })
        ));
        assert!(matches!(
            spherical_bessel_j(65, 1.0),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(spherical_bessel_j(0, -1.0).is_err());
    }
}
