//! Truncation error of a plane-wave expansion over the 1 m square as the
//! order grows.

use num_complex::Complex64;
use soundfield::scene::paper_geometry;
use soundfield::wavefield::{plane_wave_coeffs, PlaneWave};
use soundfield::Wavenumber;

fn main() -> soundfield::Result<()> {
    let grid = paper_geometry().grid;
    let center = grid.centroid();
    let wave = PlaneWave::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, Complex64::new(1.0, 0.0));
    for f in [200.0, 500.0, 700.0] {
        let k = Wavenumber::from_frequency(f, 343.0)?;
        print!("{f:>5} Hz:");
        for order in [2, 4, 8, 12, 16, 20] {
            let a = plane_wave_coeffs(&wave, center, order, k)?;
            let mut worst: f64 = 0.0;
            for p in &grid.points {
                worst = worst.max((a.evaluate(p)? - wave.value(p, &center, k)).norm());
            }
            print!("  N={order}: {worst:.1e}");
        }
        println!();
    }
    Ok(())
}
