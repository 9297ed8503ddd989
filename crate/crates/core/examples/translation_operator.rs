//! Re-expanding a point-source field about a shifted center and checking the
//! translated coefficients against the direct expansion.

use num_complex::Complex64;
use soundfield::wavefield::{translate, translation_buffer, AnalyticField};
use soundfield::{Vec3, Wavenumber};

fn main() -> soundfield::Result<()> {
    let k = Wavenumber::from_frequency(600.0, 343.0)?;
    let field = AnalyticField::PointSource {
        position: Vec3::new(1.4, -0.6, 0.2),
        amplitude: Complex64::new(1.0, 0.0),
    };
    let shift = Vec3::new(0.25, 0.1, 0.0);
    let order = 8;
    let source_order = order + translation_buffer(k.get() * shift.norm());
    println!("k|d| = {:.3}, source order {source_order}", k.get() * shift.norm());

    let about_origin = field.coefficients(Vec3::zeros(), source_order, k, 0.0)?;
    let moved = translate(&about_origin, shift, order)?;
    let direct = field.coefficients(shift, order, k, 0.0)?;
    let err = (&moved.coeffs - &direct.coeffs).norm() / direct.coeffs.norm();
    println!("relative coefficient error after translation: {err:.2e}");

    let p = shift + Vec3::new(0.05, -0.03, 0.02);
    println!(
        "field at {:?}: translated {:.6}, exact {:.6}",
        p.as_slice(),
        moved.evaluate(&p)?,
        field.value(&p, k)
    );
    Ok(())
}
