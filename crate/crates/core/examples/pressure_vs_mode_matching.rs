//! Single-frequency comparison of pressure matching and weighted mode
//! matching on the desk-scale geometry with 16 microphones.

use num_complex::Complex64;
use soundfield::estimation::{build_kernel, estimate_transfer_expansions};
use soundfield::reproduction::{
    objective_value_quadrature, pressure_matching, weighted_mode_matching, weighting_matrix, FreeFieldTransfers,
    TransferMatrix, TransferModel,
};
use soundfield::scene::{paper_geometry, quadrature, subsample_mics};
use soundfield::wavefield::{plane_wave_coeffs, AnalyticField, PlaneWave};
use soundfield::Wavenumber;

fn main() -> soundfield::Result<()> {
    let geo = paper_geometry();
    let center = geo.grid.centroid();
    let mics = subsample_mics(&geo.grid, 16)?;
    let transfers = FreeFieldTransfers {
        positions: geo.speakers.positions.clone(),
        gain: 1.0,
    };
    let wave = PlaneWave::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, Complex64::new(1.0, 0.0));
    let desired = AnalyticField::PlaneWave { wave, reference: center };
    let quad = quadrature(&geo.region)?;
    let energy: f64 = quad.nodes.iter().zip(&quad.weights).map(|(_, w)| w).sum();
    let (eta, lambda) = (1e-3, 1e-3);

    println!("  f/Hz   PM NMSE/dB  WMM NMSE/dB");
    for f in [150.0, 300.0, 450.0, 600.0] {
        let k = Wavenumber::from_frequency(f, 343.0)?;
        let g = TransferMatrix::new(transfers.matrix(&mics.positions, k), f)?;
        let u: Vec<Complex64> = mics.positions.iter().map(|p| desired.value(p, k)).collect();
        let pm = pressure_matching(&g, &nalgebra::DVector::from_vec(u), eta)?;

        let kernel = build_kernel(&mics, k, 1e-3, 0)?;
        let c = estimate_transfer_expansions(&g.g, &kernel, center, 12)?;
        let b = plane_wave_coeffs(&wave, center, 12, k)?.coeffs;
        let w = weighting_matrix(&geo.region, 12, k, center)?;
        let wmm = weighted_mode_matching(&c, &b, &w, lambda)?;

        let nmse = |d| -> soundfield::Result<f64> {
            Ok(10.0 * (objective_value_quadrature(d, &transfers, &desired, &quad, k)? / energy).log10())
        };
        println!("{f:>6}   {:>9.2}   {:>9.2}", nmse(&pm)?, nmse(&wmm)?);
    }
    Ok(())
}
