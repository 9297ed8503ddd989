//! Scalar special functions behind the spherical-wavefunction basis.
//!
//! Conventions used throughout the crate:
//!
//! * Associated Legendre functions carry the Condon–Shortley phase, i.e.
//!   `P_1^1(x) = -(1 - x^2)^{1/2}`.
//! * Spherical harmonics are the complex, orthonormal ones
//!   `Y_{n,m}(θ,φ) = sqrt((2n+1)/(4π) (n-m)!/(n+m)!) P_n^m(cos θ) e^{imφ}`,
//!   with `Y_{n,-m} = (-1)^m conj(Y_{n,m})`.
//! * The Gaunt coefficient is the triple-product integral
//!   `G(n1,m1; n2,m2; l) = ∫ Y_{n1,m1} Y_{n2,m2} conj(Y_{l,m1+m2}) dΩ`.
//!
//! Coefficient vectors are flat-indexed by `i = n² + n + m`.

mod bessel;
mod gaunt;
mod harmonics;

pub use bessel::{
    spherical_bessel_j, spherical_bessel_j_all, spherical_bessel_y_all, spherical_hankel_h1,
    spherical_hankel_h1_all,
};
pub use gaunt::{gaunt, gaunt_family, wigner_3j, wigner_3j_family};
pub use harmonics::{assoc_legendre, sph_harm, sph_harm_all};

use crate::error::{Error, Result};

/// Highest order supported by the special-function routines.
pub const MAX_ORDER: usize = 64;

/// Default speed of sound in m/s.
pub const SOUND_SPEED: f64 = 343.0;

/// Number of coefficients of an expansion truncated at `order`.
#[inline]
pub const fn num_coeffs(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// Order `n` and degree `m` of a spherical harmonic, `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    order: usize,
    degree: i64,
}

impl HarmonicIndex {
    pub fn new(order: usize, degree: i64) -> Result<Self> {
        if degree.unsigned_abs() as usize > order {
            return Err(Error::InvalidIndex { order, degree });
        }
        Ok(Self { order, degree })
    }

    pub fn order(self) -> usize {
        self.order
    }

    pub fn degree(self) -> i64 {
        self.degree
    }

    /// Flat position `n² + n + m`.
    pub fn flat(self) -> usize {
        let n = self.order as i64;
        (n * n + n + self.degree) as usize
    }

    pub fn from_flat(i: usize) -> Self {
        let order = i.isqrt();
        let degree = i as i64 - (order * order + order) as i64;
        Self { order, degree }
    }

    /// All indices up to and including `max_order`, in flat order.
    pub fn iter_up_to(max_order: usize) -> impl Iterator<Item = HarmonicIndex> {
        (0..num_coeffs(max_order)).map(Self::from_flat)
    }
}

/// Acoustic wavenumber `k = ω / c`, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain {
                function: "wavenumber",
                x: k,
            });
        }
        Ok(Self(k))
    }

    pub fn from_frequency(frequency_hz: f64, sound_speed: f64) -> Result<Self> {
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::Domain {
                function: "sound speed",
                x: sound_speed,
            });
        }
        Self::new(2.0 * std::f64::consts::PI * frequency_hz / sound_speed)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        })
    } else {
        Ok(())
    }
}
