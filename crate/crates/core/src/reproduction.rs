//! Driving-signal solvers: regularised pressure matching and weighted mode
//! matching.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, CMatrix, HermitianFactor};
use crate::scene::{quadrature, Quadrature, TargetRegion};
use crate::specfun::{num_coeffs, sph_harm_all, spherical_bessel_j_all, Wavenumber};
use crate::wavefield::{spherical_coordinates, AnalyticField, Vec3};

/// Transfer functions between `L` loudspeakers (columns) and `N` control
/// points (rows) at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub g: CMatrix,
    pub frequency_hz: f64,
}

impl TransferMatrix {
    pub fn new(g: CMatrix, frequency_hz: f64) -> Result<Self> {
        if g.nrows() == 0 || g.ncols() == 0 {
            return Err(Error::config("transfers", "need at least one control point and one loudspeaker"));
        }
        if !all_finite(&g) {
            return Err(Error::NonFinite("transfer matrix"));
        }
        Ok(Self { g, frequency_hz })
    }

    pub fn points(&self) -> usize {
        self.g.nrows()
    }

    pub fn speakers(&self) -> usize {
        self.g.ncols()
    }
}

/// Complex loudspeaker gains at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingSignals {
    pub d: DVector<Complex64>,
}

impl DrivingSignals {
    pub fn zeros(speakers: usize) -> Self {
        Self {
            d: DVector::zeros(speakers),
        }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

fn check_target(len: usize, expected: usize, what: &'static str) -> Result<()> {
    if len != expected {
        return Err(Error::Dimension {
            what,
            expected,
            found: len,
        });
    }
    Ok(())
}

fn check_param(value: f64, field: &str) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::config(field, "must be finite and non-negative"));
    }
    Ok(())
}

/// `d = (G^H G + ηI)^{-1} G^H u`. At `η = 0` the Moore–Penrose solution is
/// used, with singular values below `1e-10 σ_max` treated as zero.
pub fn pressure_matching(g: &TransferMatrix, u_des: &DVector<Complex64>, eta: f64) -> Result<DrivingSignals> {
    check_target(u_des.len(), g.points(), "desired pressures")?;
    check_param(eta, "eta")?;
    if !u_des.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("desired pressures"));
    }
    let d = if eta == 0.0 {
        let svd = g.g.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        svd.solve(u_des, 1e-10 * smax)
            .map_err(|_| Error::NonFinite("pressure matching pseudoinverse"))?
    } else {
        let gh = g.g.adjoint();
        let mut a = &gh * &g.g;
        for i in 0..a.nrows() {
            a[(i, i)] += eta;
        }
        let rhs = &gh * u_des;
        let factor = HermitianFactor::new(a, "pressure matching normal matrix", false)?;
        factor.solve(&CMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice())).column(0).into_owned()
    };
    Ok(DrivingSignals { d })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Plain mode matching.
    Identity,
    Dense(CMatrix),
}

/// Mode-domain weighting `W` over `(N_tr+1)²` coefficients about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingMatrix {
    pub order: usize,
    pub center: Vec3,
    pub wavenumber: Option<Wavenumber>,
    pub weighting: Weighting,
}

impl WeightingMatrix {
    pub fn identity(order: usize) -> Self {
        Self {
            order,
            center: Vec3::zeros(),
            wavenumber: None,
            weighting: Weighting::Identity,
        }
    }

    pub fn size(&self) -> usize {
        num_coeffs(self.order)
    }

    /// Dense copy of `W`.
    pub fn to_dense(&self) -> CMatrix {
        match &self.weighting {
            Weighting::Identity => CMatrix::identity(self.size(), self.size()),
            Weighting::Dense(w) => w.clone(),
        }
    }

    fn apply(&self, m: &CMatrix) -> CMatrix {
        match &self.weighting {
            Weighting::Identity => m.clone(),
            Weighting::Dense(w) => w * m,
        }
    }
}

/// Wavefunction angular parts at quadrature nodes, reusable across
/// frequencies: only the radial Bessel factors depend on `k`.
#[derive(Debug, Clone)]
pub struct QuadratureBasis {
    pub order: usize,
    pub center: Vec3,
    pub weights: Vec<f64>,
    radii: Vec<f64>,
    harmonics: CMatrix,
}

impl QuadratureBasis {
    pub fn new(quad: &Quadrature, order: usize, center: Vec3) -> Result<Self> {
        if quad.is_empty() {
            return Err(Error::config("quadrature", "region quadrature has no nodes"));
        }
        let n = num_coeffs(order);
        let mut harmonics = CMatrix::zeros(quad.len(), n);
        let mut radii = Vec::with_capacity(quad.len());
        for (q, x) in quad.nodes.iter().enumerate() {
            let (r, theta, phi) = spherical_coordinates(&(x - center));
            let y = sph_harm_all(order, theta, phi)?;
            for (i, v) in y.into_iter().enumerate() {
                harmonics[(q, i)] = v;
            }
            radii.push(r);
        }
        Ok(Self {
            order,
            center,
            weights: quad.weights.clone(),
            radii,
            harmonics,
        })
    }

    /// `Φ[q, i] = φ_i(x_q − center)`.
    pub fn wavefunction_matrix(&self, k: Wavenumber) -> Result<CMatrix> {
        let mut phi = self.harmonics.clone();
        let scale = (4.0 * PI).sqrt();
        for (q, r) in self.radii.iter().enumerate() {
            let j = spherical_bessel_j_all(self.order, k.get() * r)?;
            for n in 0..=self.order {
                let f = scale * j[n];
                for i in n * n..(n + 1) * (n + 1) {
                    phi[(q, i)] *= f;
                }
            }
        }
        Ok(phi)
    }

    /// `W = Φ^H diag(w) Φ`.
    pub fn weighting_matrix(&self, k: Wavenumber) -> Result<WeightingMatrix> {
        let phi = self.wavefunction_matrix(k)?;
        // Φ = A + iB; real products are much faster than complex ones here
        let a = phi.map(|v| v.re);
        let b = phi.map(|v| v.im);
        let mut da = a.clone();
        let mut db = b.clone();
        for (q, w) in self.weights.iter().enumerate() {
            da.row_mut(q).scale_mut(*w);
            db.row_mut(q).scale_mut(*w);
        }
        let re = a.transpose() * &da + b.transpose() * &db;
        let im = a.transpose() * &db - b.transpose() * &da;
        let mut w = CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
        // exact Hermitian symmetry
        let n = w.nrows();
        for i in 0..n {
            w[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                let v = 0.5 * (w[(i, j)] + w[(j, i)].conj());
                w[(i, j)] = v;
                w[(j, i)] = v.conj();
            }
        }
        Ok(WeightingMatrix {
            order: self.order,
            center: self.center,
            wavenumber: Some(k),
            weighting: Weighting::Dense(w),
        })
    }
}

/// `(W)_{i,j} = Σ_q w_q ρ(x_q) conj(φ_i(x_q − r_o)) φ_j(x_q − r_o)`.
pub fn weighting_matrix(region: &TargetRegion, order: usize, k: Wavenumber, center: Vec3) -> Result<WeightingMatrix> {
    let quad = quadrature(region)?;
    QuadratureBasis::new(&quad, order, center)?.weighting_matrix(k)
}

/// `d = (C^H W C + λI)^{-1} C^H W b`.
pub fn weighted_mode_matching(
    c: &CMatrix,
    b: &DVector<Complex64>,
    w: &WeightingMatrix,
    lambda: f64,
) -> Result<DrivingSignals> {
    check_target(c.nrows(), w.size(), "transfer coefficients")?;
    check_target(b.len(), w.size(), "desired coefficients")?;
    check_param(lambda, "lambda")?;
    if !all_finite(c) || !b.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("mode matching inputs"));
    }
    let wc = w.apply(c);
    let ch = c.adjoint();
    let mut a = &ch * &wc;
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let bm = CMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let rhs = wc.adjoint() * bm;
    let factor = HermitianFactor::new(a, "weighted mode matching normal matrix", lambda == 0.0)?;
    Ok(DrivingSignals {
        d: factor.solve(&rhs).column(0).into_owned(),
    })
}

/// Mode matching, i.e. [`weighted_mode_matching`] with `W = I`.
pub fn mode_matching(c: &CMatrix, b: &DVector<Complex64>, lambda: f64) -> Result<DrivingSignals> {
    weighted_mode_matching(c, b, &WeightingMatrix::identity(num_coeffs_inverse(c.nrows())?), lambda)
}

fn num_coeffs_inverse(rows: usize) -> Result<usize> {
    let side = rows.isqrt();
    if side == 0 || side * side != rows {
        return Err(Error::Dimension {
            what: "coefficient rows (must be (N+1)²)",
            expected: (side + 1) * (side + 1),
            found: rows,
        });
    }
    Ok(side - 1)
}

/// Per-loudspeaker transfer functions that can be evaluated anywhere.
pub trait TransferModel: Sync {
    fn speakers(&self) -> usize;
    fn transfer(&self, speaker: usize, r: &Vec3, k: Wavenumber) -> Complex64;

    /// `G[n, l]` at the given points.
    fn matrix(&self, points: &[Vec3], k: Wavenumber) -> CMatrix {
        CMatrix::from_fn(points.len(), self.speakers(), |n, l| self.transfer(l, &points[n], k))
    }
}

/// Free-field monopoles `gain · e^{ik|r−s|} / (4π|r−s|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFieldTransfers {
    pub positions: Vec<Vec3>,
    pub gain: f64,
}

impl TransferModel for FreeFieldTransfers {
    fn speakers(&self) -> usize {
        self.positions.len()
    }

    fn transfer(&self, speaker: usize, r: &Vec3, k: Wavenumber) -> Complex64 {
        let d = (r - self.positions[speaker]).norm();
        Complex64::from_polar(self.gain / (4.0 * PI * d), k.get() * d)
    }
}

/// `u_syn(r) = Σ_l d_l g_l(r)` at every point.
pub fn synthesize_field(
    d: &DrivingSignals,
    transfers: &dyn TransferModel,
    points: &[Vec3],
    k: Wavenumber,
) -> Result<Vec<Complex64>> {
    check_target(d.len(), transfers.speakers(), "driving signals")?;
    Ok(points
        .iter()
        .map(|r| {
            d.d.iter()
                .enumerate()
                .map(|(l, dl)| dl * transfers.transfer(l, r, k))
                .sum()
        })
        .collect())
}

/// Mode-domain objective `(Cd − b)^H W (Cd − b)`.
pub fn objective_value(d: &DrivingSignals, c: &CMatrix, b: &DVector<Complex64>, w: &WeightingMatrix) -> Result<f64> {
    check_target(d.len(), c.ncols(), "driving signals")?;
    check_target(b.len(), c.nrows(), "desired coefficients")?;
    let e = c * &d.d - b;
    let em = CMatrix::from_column_slice(e.len(), 1, e.as_slice());
    let we = w.apply(&em);
    Ok(e.dotc(&we.column(0)).re)
}

/// Direct quadrature of `∫_Ω ρ |u_syn − u_des|² dr`.
pub fn objective_value_quadrature(
    d: &DrivingSignals,
    transfers: &dyn TransferModel,
    desired: &AnalyticField,
    quad: &Quadrature,
    k: Wavenumber,
) -> Result<f64> {
    let syn = synthesize_field(d, transfers, &quad.nodes, k)?;
    Ok(quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .zip(&syn)
        .map(|((x, w), u)| w * (u - desired.value(x, k)).norm_sqr())
        .sum())
}
