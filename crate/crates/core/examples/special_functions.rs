//! Spherical Bessel functions, spherical harmonics and Gaunt coefficients.

use soundfield::specfun::{gaunt, spherical_bessel_j_all, spherical_hankel_h1_all, sph_harm};
use soundfield::HarmonicIndex;

fn main() -> soundfield::Result<()> {
    let x = 2.5;
    let j = spherical_bessel_j_all(6, x)?;
    let h = spherical_hankel_h1_all(6, x)?;
    println!("n   j_n({x})          y_n({x})");
    for n in 0..=6 {
        println!("{n}   {:+.12e}  {:+.12e}", j[n], h[n].im);
    }

    let (theta, phi) = (0.9, -0.4);
    println!("\nY_n^m({theta}, {phi})");
    for idx in HarmonicIndex::iter_up_to(2) {
        let y = sph_harm(idx.order(), idx.degree(), theta, phi)?;
        println!("  n={} m={:+}  {:+.6} {:+.6}i", idx.order(), idx.degree(), y.re, y.im);
    }

    println!("\nGaunt G(1,0; 1,0; l)");
    for l in 0..=2 {
        println!("  l={l}  {:+.12}", gaunt(1, 0, 1, 0, l));
    }
    Ok(())
}
