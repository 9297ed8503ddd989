//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soundfield::Vec3;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> CVec {
    random_matrix(rng, len, 1).column(0).into_owned()
}

pub fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration.
fn spectral_bound(a: &CMat) -> f64 {
    let mut v = CVec::from_element(a.ncols(), Complex64::new(1.0, 0.3));
    let mut est = 0.0;
    for _ in 0..500 {
        let w = a * &v;
        est = w.norm() / v.norm();
        v = w / Complex64::new(v.norm().max(1e-300), 0.0);
    }
    est * 1.01
}

/// Minimises `(Ad − y)^H W (Ad − y) + μ‖d‖²` with Nesterov-accelerated
/// gradient descent; `w = None` means `W = I`.
pub fn gradient_descent(a: &CMat, y: &CVec, w: Option<&CMat>, mu: f64, iterations: usize) -> CVec {
    let apply_w = |e: CVec| -> CVec {
        match w {
            Some(w) => w * e,
            None => e,
        }
    };
    let ah = a.adjoint();
    let h = match w {
        Some(w) => &ah * w * a,
        None => &ah * a,
    } + CMat::identity(a.ncols(), a.ncols()) * Complex64::new(mu, 0.0);
    let step = 1.0 / spectral_bound(&h);
    let grad = |d: &CVec| -> CVec { &ah * apply_w(a * d - y) + d * Complex64::new(mu, 0.0) };
    let mut x = CVec::zeros(a.ncols());
    let mut z = x.clone();
    let mut t: f64 = 1.0;
    for _ in 0..iterations {
        let next = &z - grad(&z) * Complex64::new(step, 0.0);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + (&next - &x) * Complex64::new((t - 1.0) / t_next, 0.0);
        x = next;
        t = t_next;
    }
    x
}

/// Gauss–Legendre rule on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut d = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * d * d));
    }
    (nodes, weights)
}

/// Product rule over the sphere, exact for polynomials of degree < 2·n in
/// cos θ and trigonometric degree < n_phi in φ. Returns (θ, φ, weight).
pub fn sphere_rule(n: usize, n_phi: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let mut out = Vec::new();
    for (c, wc) in x.iter().zip(&w) {
        for p in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * p as f64 / n_phi as f64;
            out.push((c.acos(), phi, wc * 2.0 * std::f64::consts::PI / n_phi as f64));
        }
    }
    out
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Relative L2 error, over the non-microphone grid points, of the field
/// estimated about the grid centroid from `mic_count` omni microphones
/// observing a unit plane wave from (π/2, π/4).
pub fn estimator_heldout_error(mic_count: usize, frequency_hz: f64, xi: f64, order: usize) -> f64 {
    use soundfield::estimation::{build_kernel, estimate_coefficients, observe};
    use soundfield::scene::{paper_geometry, subsample_mics};
    use soundfield::wavefield::{AnalyticField, PlaneWave};
    use soundfield::Wavenumber;

    let geo = paper_geometry();
    let mics = subsample_mics(&geo.grid, mic_count).unwrap();
    let k = Wavenumber::from_frequency(frequency_hz, 343.0).unwrap();
    let center = geo.grid.centroid();
    let field = AnalyticField::PlaneWave {
        wave: PlaneWave::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, Complex64::new(1.0, 0.0)),
        reference: center,
    };
    let s = observe(&field, &mics, k).unwrap();
    let kernel = build_kernel(&mics, k, xi, 0).unwrap();
    let est = estimate_coefficients(&s, &kernel, center, order).unwrap();
    let held: Vec<usize> = (0..geo.grid.len())
        .filter(|i| !mics.grid_indices.as_ref().unwrap().contains(i))
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in held {
        let p = geo.grid.points[i];
        let e = field.value(&p, k);
        num += (est.evaluate(&p).unwrap() - e).norm_sqr();
        den += e.norm_sqr();
    }
    (num / den).sqrt()
}
