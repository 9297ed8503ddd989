//! Interior spherical-wavefunction expansions and their translation.
//!
//! Time dependence is `e^{-iωt}`: outgoing waves use `h^{(1)}` and a plane
//! wave travelling along the unit vector `n` is `exp(+i k n·r)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{
    check_order, num_coeffs, sph_harm_all, spherical_bessel_j_all,
    spherical_hankel_h1_all, wigner_3j_family, HarmonicIndex, Wavenumber,
};

pub type Vec3 = nalgebra::Vector3<f64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radius and spherical angles `(r, θ, φ)` of `v`; the origin maps to `(0, 0, 0)`.
pub fn spherical_coordinates(v: &Vec3) -> (f64, f64, f64) {
    let r = v.norm();
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x);
    (r, theta, phi)
}

/// Unit vector pointing towards the spherical angles `(θ, φ)`.
pub fn unit_vector(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

#[inline]
fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// `φ_{n,m}(r) = sqrt(4π) j_n(k|r|) Y_{n,m}(θ, φ)`.
pub fn wavefunction(index: HarmonicIndex, r: &Vec3, k: Wavenumber) -> Result<Complex64> {
    Ok(wavefunctions(index.order(), r, k)?[index.flat()])
}

/// Every wavefunction up to `order` at `r`, flat-indexed.
pub fn wavefunctions(order: usize, r: &Vec3, k: Wavenumber) -> Result<Vec<Complex64>> {
    let (radius, theta, phi) = spherical_coordinates(r);
    let j = spherical_bessel_j_all(order, k.get() * radius)?;
    let y = sph_harm_all(order, theta, phi)?;
    let scale = (4.0 * PI).sqrt();
    Ok(HarmonicIndex::iter_up_to(order)
        .zip(y)
        .map(|(idx, y)| y * (scale * j[idx.order()]))
        .collect())
}

/// Coefficients `α_{n,m}` of an interior field about `center`.
///
/// The entry at flat index 0 is the pressure at the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub center: Vec3,
    pub order: usize,
    pub coeffs: DVector<Complex64>,
    pub wavenumber: Wavenumber,
}

impl ExpansionCoefficients {
    pub fn new(
        center: Vec3,
        order: usize,
        coeffs: DVector<Complex64>,
        wavenumber: Wavenumber,
    ) -> Result<Self> {
        if coeffs.len() != num_coeffs(order) {
            return Err(Error::Dimension {
                what: "expansion coefficients",
                expected: num_coeffs(order),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            center,
            order,
            coeffs,
            wavenumber,
        })
    }

    pub fn zeros(center: Vec3, order: usize, wavenumber: Wavenumber) -> Self {
        Self {
            center,
            order,
            coeffs: DVector::zeros(num_coeffs(order)),
            wavenumber,
        }
    }

    pub fn get(&self, index: HarmonicIndex) -> Complex64 {
        self.coeffs[index.flat()]
    }

    pub fn pressure_at_center(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Drops all orders above `order`.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            center: self.center,
            order,
            coeffs: self.coeffs.rows(0, num_coeffs(order)).into_owned(),
            wavenumber: self.wavenumber,
        }
    }

    /// Field value `Σ α_{n,m} φ_{n,m}(r - center)`.
    pub fn evaluate(&self, r: &Vec3) -> Result<Complex64> {
        let basis = wavefunctions(self.order, &(r - self.center), self.wavenumber)?;
        Ok(basis
            .iter()
            .zip(self.coeffs.iter())
            .map(|(phi, a)| phi * a)
            .sum())
    }
}

/// Free function form of [`ExpansionCoefficients::evaluate`].
pub fn evaluate_field(coeffs: &ExpansionCoefficients, r: &Vec3) -> Result<Complex64> {
    coeffs.evaluate(r)
}

/// A single plane wave described by the direction it arrives from.
///
/// The wave travels along `-unit_vector(theta, phi)`; `amplitude` is the
/// complex pressure at the phase reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub arrival_theta: f64,
    pub arrival_phi: f64,
    pub amplitude: Complex64,
}

impl PlaneWave {
    pub fn new(arrival_theta: f64, arrival_phi: f64, amplitude: Complex64) -> Self {
        Self {
            arrival_theta,
            arrival_phi,
            amplitude,
        }
    }

    pub fn propagation(&self) -> Vec3 {
        -unit_vector(self.arrival_theta, self.arrival_phi)
    }

    /// `amplitude · exp(i k n·(r - reference))`.
    pub fn value(&self, r: &Vec3, reference: &Vec3, k: Wavenumber) -> Complex64 {
        let phase = k.get() * self.propagation().dot(&(r - reference));
        self.amplitude * Complex64::from_polar(1.0, phase)
    }
}

/// Expansion of [`PlaneWave::value`] with `reference = center`:
/// `α_{n,m} = A sqrt(4π) iⁿ conj(Y_{n,m}(n̂))`.
pub fn plane_wave_coeffs(
    wave: &PlaneWave,
    center: Vec3,
    order: usize,
    k: Wavenumber,
) -> Result<ExpansionCoefficients> {
    let n = wave.propagation();
    let (_, theta, phi) = spherical_coordinates(&n);
    let y = sph_harm_all(order, theta, phi)?;
    let scale = wave.amplitude * (4.0 * PI).sqrt();
    let coeffs = HarmonicIndex::iter_up_to(order)
        .zip(y)
        .map(|(idx, y)| scale * i_pow(idx.order() as i64) * y.conj())
        .collect::<Vec<_>>();
    ExpansionCoefficients::new(center, order, DVector::from_vec(coeffs), k)
}

/// Free-field Green's function `A exp(ik|r - s|) / (4π |r - s|)`.
pub fn point_source_value(source: &Vec3, amplitude: Complex64, r: &Vec3, k: Wavenumber) -> Complex64 {
    let d = (r - source).norm();
    amplitude * Complex64::from_polar(1.0, k.get() * d) / (4.0 * PI * d)
}

/// Interior expansion of [`point_source_value`] about `center`:
/// `α_{n,m} = A i k h_n(k|s - c|) conj(Y_{n,m}(s - c)) / sqrt(4π)`.
///
/// Fails with a geometry error when the source is not strictly farther from
/// `center` than `validity_radius`.
pub fn point_source_coeffs(
    source: &Vec3,
    amplitude: Complex64,
    center: Vec3,
    order: usize,
    k: Wavenumber,
    validity_radius: f64,
) -> Result<ExpansionCoefficients> {
    let rel = source - center;
    let (dist, theta, phi) = spherical_coordinates(&rel);
    if dist <= validity_radius || dist == 0.0 {
        return Err(Error::Geometry(format!(
            "point source at distance {dist} m lies inside the expansion radius {validity_radius} m"
        )));
    }
    let h = spherical_hankel_h1_all(order, k.get() * dist)?;
    let y = sph_harm_all(order, theta, phi)?;
    let scale = amplitude * I * k.get() / (4.0 * PI).sqrt();
    let coeffs = HarmonicIndex::iter_up_to(order)
        .zip(y)
        .map(|(idx, y)| scale * h[idx.order()] * y.conj())
        .collect::<Vec<_>>();
    ExpansionCoefficients::new(center, order, DVector::from_vec(coeffs), k)
}

/// Analytic field models used for desired fields and simulated transfers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticField {
    /// Plane wave with phase reference at `reference`.
    PlaneWave { wave: PlaneWave, reference: Vec3 },
    PointSource { position: Vec3, amplitude: Complex64 },
}

impl AnalyticField {
    pub fn value(&self, r: &Vec3, k: Wavenumber) -> Complex64 {
        match self {
            AnalyticField::PlaneWave { wave, reference } => wave.value(r, reference, k),
            AnalyticField::PointSource {
                position,
                amplitude,
            } => point_source_value(position, *amplitude, r, k),
        }
    }

    /// Expansion about `center`; `validity_radius` is only checked for point sources.
    pub fn coefficients(
        &self,
        center: Vec3,
        order: usize,
        k: Wavenumber,
        validity_radius: f64,
    ) -> Result<ExpansionCoefficients> {
        match self {
            AnalyticField::PlaneWave { wave, reference } => {
                // shift the phase reference to the expansion center
                let at_center = wave.value(&center, reference, k);
                let shifted = PlaneWave {
                    amplitude: at_center,
                    ..*wave
                };
                plane_wave_coeffs(&shifted, center, order, k)
            }
            AnalyticField::PointSource {
                position,
                amplitude,
            } => point_source_coeffs(position, *amplitude, center, order, k, validity_radius),
        }
    }
}

/// Minimum order margin between source and target expansions when
/// translating by a displacement with `k|d| = kd`.
///
/// Never below 6; grows like `kd + 6 (kd)^{1/3}` so the neglected
/// translation terms stay below roughly 1e-9.
pub fn translation_buffer(kd: f64) -> usize {
    let extra = kd + 6.0 * kd.cbrt() + 6.0;
    (extra.ceil() as usize).max(6)
}

/// Dense translation operator `T(d)` mapping coefficients about `r'` to
/// coefficients about `r = r' + d`.
#[derive(Debug, Clone)]
pub struct TranslationMatrix {
    pub displacement: Vec3,
    pub order_out: usize,
    pub order_in: usize,
    pub wavenumber: Wavenumber,
    pub entries: DMatrix<Complex64>,
}

impl TranslationMatrix {
    pub fn apply(&self, coeffs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if coeffs.len() != self.entries.ncols() {
            return Err(Error::Dimension {
                what: "translation input",
                expected: self.entries.ncols(),
                found: coeffs.len(),
            });
        }
        Ok(&self.entries * coeffs)
    }
}

/// Builds `T(d)` with entries
///
/// ```text
/// T[(n',m'),(n,m)] = 4π i^{n'-n} Σ_l i^l j_l(k|d|) conj(Y_{l,m'-m}(d̂)) G(n,m; l,m'-m; n')
/// ```
///
/// Each entry is an exact finite sum; truncation only enters when the
/// matrix is multiplied with a truncated coefficient vector.
pub fn translation_matrix(
    displacement: Vec3,
    order_out: usize,
    order_in: usize,
    k: Wavenumber,
) -> Result<TranslationMatrix> {
    let lmax = order_out + order_in;
    check_order(lmax)?;
    let (dist, theta, phi) = spherical_coordinates(&displacement);
    let j = spherical_bessel_j_all(lmax, k.get() * dist)?;
    let y = sph_harm_all(lmax, theta, phi)?;
    // conj(Y_{l,q}(d̂)) weighted by 4π i^l j_l
    let kernel = |l: usize, q: i64| -> Complex64 {
        let idx = (l * l + l) as i64 + q;
        y[idx as usize].conj() * i_pow(l as i64) * (4.0 * PI * j[l])
    };

    let rows = num_coeffs(order_out);
    let cols = num_coeffs(order_in);
    let mut entries = DMatrix::zeros(rows, cols);
    // (l n' n; 0 0 0) families depend on (n', n) only
    let parity: Vec<Vec<(usize, Vec<f64>)>> = (0..=order_out)
        .map(|np| (0..=order_in).map(|n| wigner_3j_family(np, n, 0, 0)).collect())
        .collect();

    for col in 0..cols {
        let src = HarmonicIndex::from_flat(col);
        let (n, m) = (src.order(), src.degree());
        for row in 0..rows {
            let dst = HarmonicIndex::from_flat(row);
            let (np, mp) = (dst.order(), dst.degree());
            let q = mp - m;
            // (l n' n; q -m' m) as a family over l
            let (lmin, with_m) = wigner_3j_family(np, n, -mp, m);
            if with_m.is_empty() {
                continue;
            }
            let (lmin0, with_0) = &parity[np][n];
            let sign = if mp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let mut acc = Complex64::new(0.0, 0.0);
            for (offset, w) in with_m.iter().enumerate() {
                let l = lmin + offset;
                if (l + n + np) % 2 == 1 || l < *lmin0 || j[l] == 0.0 {
                    continue;
                }
                let g = sign
                    * (((2 * n + 1) * (2 * l + 1) * (2 * np + 1)) as f64 / (4.0 * PI)).sqrt()
                    * with_0[l - lmin0]
                    * w;
                acc += kernel(l, q) * g;
            }
            entries[(row, col)] = acc * i_pow(np as i64 - n as i64);
        }
    }

    Ok(TranslationMatrix {
        displacement,
        order_out,
        order_in,
        wavenumber: k,
        entries,
    })
}

/// Re-expands `coeffs` about `new_center`, keeping orders up to `order_out`.
///
/// The source order must exceed `order_out` by [`translation_buffer`] for the
/// displacement, otherwise a truncation-risk error is returned.
pub fn translate(
    coeffs: &ExpansionCoefficients,
    new_center: Vec3,
    order_out: usize,
) -> Result<ExpansionCoefficients> {
    let d = new_center - coeffs.center;
    if d.norm() == 0.0 {
        if order_out > coeffs.order {
            return Err(Error::TruncationRisk {
                available: coeffs.order,
                required: order_out,
            });
        }
        return Ok(coeffs.truncated(order_out));
    }
    let required = order_out + translation_buffer(coeffs.wavenumber.get() * d.norm());
    if coeffs.order < required {
        return Err(Error::TruncationRisk {
            available: coeffs.order,
            required,
        });
    }
    let t = translation_matrix(d, order_out, coeffs.order, coeffs.wavenumber)?;
    let out = t.apply(&coeffs.coeffs)?;
    ExpansionCoefficients::new(new_center, order_out, out, coeffs.wavenumber)
}

/// Leading `num_coeffs(order)` square block of a matrix.
pub fn low_order_block(m: &DMatrix<Complex64>, order: usize) -> DMatrix<Complex64> {
    let n = num_coeffs(order);
    m.view((0, 0), (n, n)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> Wavenumber {
        Wavenumber::new(v).unwrap()
    }

    #[test]
    fn wavefunction_at_origin() {
        let o = Vec3::zeros();
        let w = wavefunction(HarmonicIndex::new(0, 0).unwrap(), &o, k(3.0)).unwrap();
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let w = wavefunction(HarmonicIndex::new(2, 1).unwrap(), &o, k(3.0)).unwrap();
        assert_eq!(w, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn wavefunction_on_axis() {
        let r = Vec3::new(0.0, 0.0, 0.1);
        let w = wavefunction(HarmonicIndex::new(1, 0).unwrap(), &r, k(10.0)).unwrap();
        let x: f64 = 1.0;
        let j1 = x.sin() / (x * x) - x.cos() / x;
        let expect = (4.0 * PI).sqrt() * j1 * (3.0 / (4.0 * PI)).sqrt();
        assert!((w.re - expect).abs() < 1e-14 && w.im.abs() < 1e-15);
    }

    #[test]
    fn evaluate_trivial_cases() {
        let c = Vec3::new(0.1, -0.2, 0.05);
        let kk = k(4.0);
        let mut e = ExpansionCoefficients::zeros(c, 3, kk);
        let r = Vec3::new(0.3, 0.1, 0.0);
        assert_eq!(e.evaluate(&r).unwrap(), Complex64::new(0.0, 0.0));
        e.coeffs[0] = Complex64::new(1.0, 0.0);
        let expect = wavefunction(HarmonicIndex::new(0, 0).unwrap(), &(r - c), kk).unwrap();
        assert!((e.evaluate(&r).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_center_value() {
        let wave = PlaneWave::new(PI / 2.0, PI / 4.0, Complex64::new(0.7, -0.2));
        let c = Vec3::new(0.2, 0.1, 0.0);
        let coeffs = plane_wave_coeffs(&wave, c, 10, k(9.0)).unwrap();
        assert!((coeffs.pressure_at_center() - wave.amplitude).norm() < 1e-12);
        assert!((coeffs.evaluate(&c).unwrap() - wave.amplitude).norm() < 1e-12);
    }

    #[test]
    fn point_source_center_value_and_zero_amplitude() {
        let s = Vec3::new(1.2, -0.4, 0.2);
        let c = Vec3::new(0.0, 0.1, 0.0);
        let kk = k(7.0);
        let coeffs = point_source_coeffs(&s, Complex64::new(1.0, 0.0), c, 12, kk, 0.5).unwrap();
        let g = point_source_value(&s, Complex64::new(1.0, 0.0), &c, kk);
        assert!((coeffs.pressure_at_center() - g).norm() < 1e-12 * g.norm());
        let zero = point_source_coeffs(&s, Complex64::new(0.0, 0.0), c, 12, kk, 0.5).unwrap();
        assert!(zero.coeffs.iter().all(|v| v.norm() == 0.0));
        assert!(matches!(
            point_source_coeffs(&s, Complex64::new(1.0, 0.0), c, 12, kk, 2.0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn translation_identity_at_zero() {
        let t = translation_matrix(Vec3::zeros(), 4, 6, k(5.0)).unwrap();
        for r in 0..t.entries.nrows() {
            for c in 0..t.entries.ncols() {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((t.entries[(r, c)] - e).norm() < 1e-13, "({r},{c})");
            }
        }
    }

    #[test]
    fn translation_monopole_entry() {
        let d = Vec3::new(0.12, -0.1, 0.1131);
        let d = d * (0.2 / d.norm());
        let t = translation_matrix(d, 3, 3, k(10.0)).unwrap();
        let j0 = spherical_bessel_j_all(0, 2.0).unwrap()[0];
        assert!((t.entries[(0, 0)] - j0).norm() < 1e-13);
    }

    #[test]
    fn translation_column_zero_is_recentred_monopole() {
        // coefficients of φ_00(x - r') about r = r' + d are (-1)^n conj(φ_{n,m}(d))
        let d = Vec3::new(0.3, 0.2, -0.1);
        let kk = k(6.0);
        let t = translation_matrix(d, 5, 0, kk).unwrap();
        let phi = wavefunctions(5, &d, kk).unwrap();
        for (row, p) in phi.iter().enumerate() {
            let n = HarmonicIndex::from_flat(row).order();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((t.entries[(row, 0)] - p.conj() * sign).norm() < 1e-13);
        }
    }

    #[test]
    fn translate_errors_and_identity() {
        let wave = PlaneWave::new(1.0, 0.5, Complex64::new(1.0, 0.0));
        let kk = k(5.0);
        let a = plane_wave_coeffs(&wave, Vec3::zeros(), 8, kk).unwrap();
        let same = translate(&a, Vec3::zeros(), 8).unwrap();
        assert_eq!(same, a);
        assert!(matches!(
            translate(&a, Vec3::new(0.3, 0.0, 0.0), 4),
            Err(Error::TruncationRisk { .. })
        ));
    }

    #[test]
    fn buffer_rule() {
        assert_eq!(translation_buffer(0.0), 6);
        assert!(translation_buffer(10.0) >= 28);
    }
}
