//! Expansion-coefficient estimation from arbitrarily placed, possibly
//! directive microphones.
//!
//! Microphone `m` at `r_m` with directivity coefficients `c_m` observes
//! `s_m = c_m^H α(r_m)`. The estimate about any point `r` is
//!
//! ```text
//! α̂(r) = Ξ(r) (Ψ + ξI)^{-1} s,   Ξ(r)[:, m] = T(r − r_m) c_m,   Ψ_{m,m'} = c_m^H T(r_m − r_m') c_m'
//! ```
//!
//! `Ψ` does not depend on `r`, so its factorisation is shared by every
//! estimation point and every loudspeaker at a given frequency.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianFactor};
use crate::scene::MicrophoneSet;
use crate::specfun::{num_coeffs, spherical_bessel_j, Wavenumber};
use crate::wavefield::{translation_matrix, wavefunctions, AnalyticField, ExpansionCoefficients, Vec3};

/// Single-frequency microphone observations, one entry per microphone.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector(pub DVector<Complex64>);

impl MeasurementVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `c_m^H α(r_m)` for every microphone, with `α` taken from an analytic field.
pub fn observe(field: &AnalyticField, mics: &MicrophoneSet, k: Wavenumber) -> Result<MeasurementVector> {
    let mut out = Vec::with_capacity(mics.len());
    for (pos, dir) in mics.positions.iter().zip(&mics.directivities) {
        if dir.is_omni() {
            out.push(dir.coeffs[0].conj() * field.value(pos, k));
        } else {
            let alpha = field.coefficients(*pos, dir.order, k, 0.0)?;
            out.push(dir.coeffs.dotc(&alpha.coeffs));
        }
    }
    Ok(MeasurementVector::new(out))
}

/// `Ψ` together with the cached factorisation of `Ψ + ξI`.
pub struct EstimatorKernel {
    pub psi: CMatrix,
    pub xi: f64,
    pub mics: MicrophoneSet,
    pub wavenumber: Wavenumber,
    factor: HermitianFactor,
}

impl fmt::Debug for EstimatorKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorKernel")
            .field("mics", &self.mics.len())
            .field("xi", &self.xi)
            .field("wavenumber", &self.wavenumber)
            .finish_non_exhaustive()
    }
}

impl EstimatorKernel {
    /// `(Ψ + ξI)^{-1} S` for a block of measurement columns.
    pub fn solve(&self, s: &CMatrix) -> Result<CMatrix> {
        if s.nrows() != self.mics.len() {
            return Err(Error::Dimension {
                what: "measurements",
                expected: self.mics.len(),
                found: s.nrows(),
            });
        }
        if s.ncols() == 0 {
            return Ok(CMatrix::zeros(s.nrows(), 0));
        }
        Ok(self.factor.solve(s))
    }
}

/// `Ψ` for omnidirectional microphones: `j_0(k |r_m − r_m'|)`.
fn omni_psi(positions: &[Vec3], k: Wavenumber) -> Result<CMatrix> {
    let m = positions.len();
    let mut psi = CMatrix::zeros(m, m);
    for a in 0..m {
        psi[(a, a)] = Complex64::new(1.0, 0.0);
        for b in (a + 1)..m {
            let v = spherical_bessel_j(0, k.get() * (positions[a] - positions[b]).norm())?;
            psi[(a, b)] = Complex64::new(v, 0.0);
            psi[(b, a)] = Complex64::new(v, 0.0);
        }
    }
    Ok(psi)
}

/// Builds `Ψ` and factorises `Ψ + ξI`.
///
/// `series_order` must cover the highest directivity order. The entries of
/// `T` between finite-order directivities are exact finite sums, so no
/// further truncation happens. With `ξ = 0` a singular `Ψ` is reported as
/// ill-conditioned.
pub fn build_kernel(mics: &MicrophoneSet, k: Wavenumber, xi: f64, series_order: usize) -> Result<EstimatorKernel> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::config("xi", "must be finite and non-negative"));
    }
    let needed = mics.max_directivity_order();
    if series_order < needed {
        return Err(Error::TruncationRisk {
            available: series_order,
            required: needed,
        });
    }
    let m = mics.len();
    let psi = if mics.directivities.iter().all(|d| d.is_omni() && d.coeffs[0] == Complex64::new(1.0, 0.0)) {
        omni_psi(&mics.positions, k)?
    } else {
        let mut psi = CMatrix::zeros(m, m);
        for a in 0..m {
            let ca = &mics.directivities[a];
            for b in a..m {
                let cb = &mics.directivities[b];
                let d = mics.positions[a] - mics.positions[b];
                let t = translation_matrix(d, ca.order, cb.order, k)?;
                let v = ca.coeffs.dotc(&(&t.entries * &cb.coeffs));
                psi[(a, b)] = v;
                psi[(b, a)] = v.conj();
            }
            // the diagonal is real by construction
            psi[(a, a)].im = 0.0;
        }
        psi
    };
    let mut regularised = psi.clone();
    for i in 0..m {
        regularised[(i, i)] += xi;
    }
    let factor = HermitianFactor::new(regularised, "estimation kernel Ψ + ξI", xi == 0.0)?;
    Ok(EstimatorKernel {
        psi,
        xi,
        mics: mics.clone(),
        wavenumber: k,
        factor,
    })
}

/// `Ξ(r)` with `(N_out+1)²` rows and one column per microphone.
pub fn build_xi(mics: &MicrophoneSet, r: &Vec3, k: Wavenumber, order_out: usize) -> Result<CMatrix> {
    let rows = num_coeffs(order_out);
    let mut xi = CMatrix::zeros(rows, mics.len());
    for (col, (pos, dir)) in mics.positions.iter().zip(&mics.directivities).enumerate() {
        if dir.is_omni() {
            // column 0 of T(r − r_m) is conj(φ(r_m − r))
            let phi = wavefunctions(order_out, &(pos - r), k)?;
            let c = dir.coeffs[0];
            for (row, p) in phi.iter().enumerate() {
                xi[(row, col)] = p.conj() * c;
            }
        } else {
            let t = translation_matrix(r - pos, order_out, dir.order, k)?;
            xi.set_column(col, &(&t.entries * &dir.coeffs));
        }
    }
    Ok(xi)
}

/// `α̂(r) = Ξ(r) (Ψ + ξI)^{-1} s`.
pub fn estimate_coefficients(
    s: &MeasurementVector,
    kernel: &EstimatorKernel,
    r: Vec3,
    order_out: usize,
) -> Result<ExpansionCoefficients> {
    let s = DMatrix::from_column_slice(s.len(), 1, s.0.as_slice());
    let weights = kernel.solve(&s)?;
    let xi = build_xi(&kernel.mics, &r, kernel.wavenumber, order_out)?;
    let alpha = (xi * weights).column(0).into_owned();
    ExpansionCoefficients::new(r, order_out, alpha, kernel.wavenumber)
}

/// Expansion coefficients about `center` for every column of `observations`
/// (microphones × loudspeakers). Column `l` of the result is the estimate for
/// loudspeaker `l`.
pub fn estimate_transfer_expansions(
    observations: &CMatrix,
    kernel: &EstimatorKernel,
    center: Vec3,
    order_out: usize,
) -> Result<CMatrix> {
    let weights = kernel.solve(observations)?;
    if weights.ncols() == 0 {
        return Ok(CMatrix::zeros(num_coeffs(order_out), 0));
    }
    let xi = build_xi(&kernel.mics, &center, kernel.wavenumber, order_out)?;
    Ok(xi * weights)
}
