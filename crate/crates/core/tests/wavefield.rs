mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use soundfield::wavefield::{
    low_order_block, plane_wave_coeffs, point_source_coeffs, point_source_value, translate, translation_buffer,
    translation_matrix, AnalyticField, PlaneWave,
};
use soundfield::{Vec3, Wavenumber};

fn k(v: f64) -> Wavenumber {
    Wavenumber::new(v).unwrap()
}

fn region_points(n: usize) -> Vec<Vec3> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = -0.5 + i as f64 / (n - 1) as f64;
            let y = -0.5 + j as f64 / (n - 1) as f64;
            out.push(Vec3::new(x, y, 0.0));
        }
    }
    out
}

#[test]
fn translation_inverse_and_composition() {
    let mut rng = common::rng(11);
    let kk = k(2.0 * std::f64::consts::PI * 500.0 / 343.0);
    let order = 4;
    let eye = DMatrix::<Complex64>::identity(25, 25);
    for _ in 0..20 {
        let d = common::random_direction(&mut rng) * rng.random_range(0.05..10.0) / kk.get();
        let e = common::random_direction(&mut rng) * rng.random_range(0.05..10.0) / kk.get();
        let mid = order + translation_buffer(kk.get() * d.norm().max(e.norm()));
        let fwd = translation_matrix(d, mid, order, kk).unwrap().entries;
        let back = translation_matrix(-d, order, mid, kk).unwrap().entries;
        let inv_err = (&back * &fwd - &eye).camax();
        assert!(inv_err < 1e-6, "inverse {inv_err}");

        let te = translation_matrix(e, mid, order, kk).unwrap().entries;
        let td = translation_matrix(d, order, mid, kk).unwrap().entries;
        let direct = translation_matrix(d + e, order, order, kk).unwrap().entries;
        let comp_err = (&td * &te - &direct).camax();
        assert!(comp_err < 1e-6, "composition {comp_err}");
    }
}

#[test]
fn translation_column_zero_is_conjugate_wavefunction() {
    let kk = k(5.0);
    let d = Vec3::new(0.3, -0.2, 0.4);
    let t = translation_matrix(d, 6, 3, kk).unwrap().entries;
    let phi = soundfield::wavefield::wavefunctions(6, &d, kk).unwrap();
    for (row, p) in phi.iter().enumerate() {
        let n = soundfield::HarmonicIndex::from_flat(row).order();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((t[(row, 0)] - p.conj() * sign).norm() < 1e-12);
    }
}

#[test]
fn translation_adjoint_is_reverse() {
    let kk = k(3.0);
    let d = Vec3::new(0.5, 0.1, -0.7);
    let t = translation_matrix(d, 5, 5, kk).unwrap().entries;
    let r = translation_matrix(-d, 5, 5, kk).unwrap().entries;
    assert!((t.adjoint() - r).camax() < 1e-12);
}

#[test]
fn plane_wave_reexpansion_over_region() {
    let kk = Wavenumber::from_frequency(500.0, 343.0).unwrap();
    let wave = PlaneWave::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, Complex64::new(1.0, 0.0));
    let c = Vec3::zeros();
    let a = plane_wave_coeffs(&wave, c, 20, kk).unwrap();
    let mut num = 0.0;
    let mut den = 0.0;
    for p in region_points(21) {
        let e = wave.value(&p, &c, kk);
        num += (a.evaluate(&p).unwrap() - e).norm_sqr();
        den += e.norm_sqr();
    }
    assert!((num / den).sqrt() < 1e-6);
}

#[test]
fn point_source_reexpansion_over_region() {
    let kk = Wavenumber::from_frequency(500.0, 343.0).unwrap();
    let s = Vec3::new(1.5, 0.4, 0.2);
    let a = point_source_coeffs(&s, Complex64::new(1.0, 0.0), Vec3::zeros(), 25, kk, 0.75).unwrap();
    let mut worst: f64 = 0.0;
    for p in region_points(21) {
        let e = point_source_value(&s, Complex64::new(1.0, 0.0), &p, kk);
        worst = worst.max((a.evaluate(&p).unwrap() - e).norm() / e.norm());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn point_source_inside_validity_radius_is_rejected() {
    let kk = k(1.0);
    let s = Vec3::new(0.2, 0.0, 0.0);
    assert!(point_source_coeffs(&s, Complex64::new(1.0, 0.0), Vec3::zeros(), 4, kk, 0.5).is_err());
}

#[test]
fn translating_analytic_expansions_matches_direct_expansion() {
    let kk = k(6.0);
    let field = AnalyticField::PointSource {
        position: Vec3::new(2.0, -1.0, 0.5),
        amplitude: Complex64::new(0.3, -1.1),
    };
    let d = Vec3::new(0.2, 0.15, -0.1);
    let order = 6;
    let src_order = order + translation_buffer(kk.get() * d.norm());
    let about0 = field.coefficients(Vec3::zeros(), src_order, kk, 0.0).unwrap();
    let moved = translate(&about0, d, order).unwrap();
    let direct = field.coefficients(d, order, kk, 0.0).unwrap();
    let err = (&moved.coeffs - &direct.coeffs).camax() / direct.coeffs.camax();
    assert!(err < 1e-9, "{err}");
}

#[test]
fn translate_round_trip_and_field_agreement() {
    let mut rng = common::rng(5);
    let kk = k(4.0);
    let wave = PlaneWave::new(0.7, 2.1, Complex64::new(1.0, 0.5));
    let a = plane_wave_coeffs(&wave, Vec3::zeros(), 40, kk).unwrap();
    let d = Vec3::new(0.3, -0.25, 0.1);
    let moved = translate(&a, d, 24).unwrap();
    let back = translate(&moved, Vec3::zeros(), 8).unwrap();
    let err = (&back.coeffs - &a.truncated(8).coeffs).camax();
    assert!(err < 1e-8, "{err}");
    for _ in 0..50 {
        let p = d + common::random_direction(&mut rng) * rng.random_range(0.0..0.4);
        let e = wave.value(&p, &Vec3::zeros(), kk);
        assert!((moved.evaluate(&p).unwrap() - e).norm() < 1e-8);
    }
}

#[test]
fn translate_refuses_insufficient_order() {
    let kk = k(4.0);
    let wave = PlaneWave::new(0.7, 2.1, Complex64::new(1.0, 0.0));
    let a = plane_wave_coeffs(&wave, Vec3::zeros(), 8, kk).unwrap();
    assert!(translate(&a, Vec3::new(0.5, 0.0, 0.0), 6).is_err());
}

#[test]
fn truncation_error_decays_past_the_bandwidth_rule() {
    let kk = Wavenumber::from_frequency(700.0, 343.0).unwrap();
    let radius: f64 = 0.5f64.hypot(0.5);
    let wave = PlaneWave::new(1.2, 0.4, Complex64::new(1.0, 0.0));
    let n = (std::f64::consts::E * kk.get() * radius / 2.0).ceil() as usize + 4;
    let a = plane_wave_coeffs(&wave, Vec3::zeros(), n, kk).unwrap();
    let mut worst: f64 = 0.0;
    for p in region_points(11) {
        worst = worst.max((a.evaluate(&p).unwrap() - wave.value(&p, &Vec3::zeros(), kk)).norm());
    }
    assert!(worst < 1e-4, "{worst}");
}

proptest! {
    #[test]
    fn zeroth_coefficient_is_center_pressure(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64, kv in 0.5..15.0f64) {
        let kk = k(kv);
        let c = Vec3::new(x, y, z);
        let field = AnalyticField::PointSource { position: Vec3::new(3.0, 0.0, 0.0), amplitude: Complex64::new(1.0, 0.0) };
        let a = field.coefficients(c, 3, kk, 0.0).unwrap();
        prop_assert!((a.pressure_at_center() - field.value(&c, kk)).norm() < 1e-12 * field.value(&c, kk).norm().max(1.0));
    }

    #[test]
    fn small_translation_block_is_near_unitary(dx in -0.3..0.3f64, dy in -0.3..0.3f64, dz in -0.3..0.3f64) {
        let kk = k(3.0);
        let d = Vec3::new(dx, dy, dz);
        let mid = 3 + translation_buffer(kk.get() * d.norm());
        let t = translation_matrix(d, mid, 3, kk).unwrap().entries;
        let g = low_order_block(&(t.adjoint() * &t), 3);
        prop_assert!((g - DMatrix::<Complex64>::identity(16, 16)).camax() < 1e-8);
    }
}
