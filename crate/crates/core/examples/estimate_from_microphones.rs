//! Estimating expansion coefficients of a plane wave from a regular
//! microphone grid and measuring the field error away from the microphones.

use num_complex::Complex64;
use soundfield::estimation::{build_kernel, estimate_coefficients, observe};
use soundfield::scene::{paper_geometry, subsample_mics};
use soundfield::wavefield::{AnalyticField, PlaneWave};
use soundfield::Wavenumber;

fn main() -> soundfield::Result<()> {
    let grid = paper_geometry().grid;
    let center = grid.centroid();
    let k = Wavenumber::from_frequency(500.0, 343.0)?;
    let field = AnalyticField::PlaneWave {
        wave: PlaneWave::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, Complex64::new(1.0, 0.0)),
        reference: center,
    };
    println!("mics  xi      held-out error");
    for count in [9, 16, 25, 36] {
        let mics = subsample_mics(&grid, count)?;
        let s = observe(&field, &mics, k)?;
        for xi in [1e-1, 1e-3, 1e-6] {
            let kernel = build_kernel(&mics, k, xi, 0)?;
            let est = estimate_coefficients(&s, &kernel, center, 12)?;
            let (mut num, mut den) = (0.0, 0.0);
            for (i, p) in grid.points.iter().enumerate() {
                if mics.grid_indices.as_ref().is_some_and(|g| g.contains(&i)) {
                    continue;
                }
                let e = field.value(p, k);
                num += (est.evaluate(p)? - e).norm_sqr();
                den += e.norm_sqr();
            }
            println!("{count:>4}  {xi:<7.0e} {:.3}%", 100.0 * (num / den).sqrt());
        }
    }
    Ok(())
}
