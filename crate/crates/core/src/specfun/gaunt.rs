//! Wigner 3j symbols and Gaunt coefficients.
//!
//! 3j symbols are generated a whole family at a time with the three-term
//! recursion in the first angular momentum (Schulten & Gordon), run forward
//! out of the lower non-classical region and backward from the upper end,
//! then matched and normalised by `Σ (2j+1) (3j)² = 1`.

use std::f64::consts::PI;

/// Family `(j1 j2 j3; m1 m2 m3)` for every admissible `j1`, with
/// `m1 = -(m2 + m3)`.
///
/// Returns `(j1_min, values)` where `values[i]` belongs to `j1 = j1_min + i`.
/// The vector is empty when no `j1` is admissible.
pub fn wigner_3j_family(j2: usize, j3: usize, m2: i64, m3: i64) -> (usize, Vec<f64>) {
    let m1 = -(m2 + m3);
    if m2.unsigned_abs() as usize > j2 || m3.unsigned_abs() as usize > j3 {
        return (0, Vec::new());
    }
    let jmin = (j2.abs_diff(j3)).max(m1.unsigned_abs() as usize);
    let jmax = j2 + j3;
    if jmin > jmax {
        return (0, Vec::new());
    }
    let len = jmax - jmin + 1;

    let (j2f, j3f, m1f, m2f, m3f) = (j2 as f64, j3 as f64, m1 as f64, m2 as f64, m3 as f64);
    let a = |j: usize| -> f64 {
        let j = j as f64;
        let t1 = j * j - (j2f - j3f) * (j2f - j3f);
        let t2 = (j2f + j3f + 1.0) * (j2f + j3f + 1.0) - j * j;
        let t3 = j * j - m1f * m1f;
        (t1 * t2 * t3).max(0.0).sqrt()
    };
    let b = |j: usize| -> f64 {
        let jf = j as f64;
        -(2.0 * jf + 1.0)
            * (j2f * (j2f + 1.0) * m1f - j3f * (j3f + 1.0) * m1f - jf * (jf + 1.0) * (m3f - m2f))
    };

    let mut values = vec![0.0; len];
    if len == 1 {
        values[0] = 1.0;
    } else {
        // Forward recursion while the solution grows; impossible from j = 0
        // because the first step divides by j1_min.
        let mut junction = jmin;
        if jmin > 0 {
            values[0] = 1.0;
            values[1] = -b(jmin) / (jmin as f64 * a(jmin + 1));
            junction = jmin + 1;
            let mut j = jmin + 1;
            while j < jmax && values[j - jmin].abs() >= values[j - 1 - jmin].abs() {
                let next = -(b(j) * values[j - jmin]
                    + (j + 1) as f64 * a(j) * values[j - 1 - jmin])
                    / (j as f64 * a(j + 1));
                values[j + 1 - jmin] = next;
                j += 1;
                junction = j;
            }
        }

        // Backward recursion from jmax down to junction - 1 (or jmin).
        let stop = if junction > jmin { junction - 1 } else { jmin };
        let mut back = vec![0.0; len];
        back[len - 1] = 1.0;
        back[len - 2] = -b(jmax) / ((jmax + 1) as f64 * a(jmax));
        let mut j = jmax - 1;
        while j > stop {
            let prev = -(b(j) * back[j - jmin] + j as f64 * a(j + 1) * back[j + 1 - jmin])
                / ((j + 1) as f64 * a(j));
            back[j - 1 - jmin] = prev;
            j -= 1;
            let peak = back[j - jmin].abs();
            if peak > 1e200 {
                for v in back.iter_mut() {
                    *v *= 1e-200;
                }
            }
        }

        if junction == jmin {
            values = back;
        } else {
            // least-squares scale over the two overlap points
            let (i0, i1) = (junction - 1 - jmin, junction - jmin);
            let num = values[i0] * back[i0] + values[i1] * back[i1];
            let den = back[i0] * back[i0] + back[i1] * back[i1];
            let scale = num / den;
            for i in (i1 + 1)..len {
                values[i] = back[i] * scale;
            }
        }
    }

    let norm: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| (2 * (jmin + i) + 1) as f64 * v * v)
        .sum();
    let mut scale = 1.0 / norm.sqrt();
    let sign_exponent = j2 as i64 - j3 as i64 + m1;
    let expected_positive = sign_exponent.rem_euclid(2) == 0;
    if (values[len - 1] > 0.0) != expected_positive {
        scale = -scale;
    }
    for v in values.iter_mut() {
        *v *= scale;
    }
    (jmin, values)
}

/// Single Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`; zero unless the selection
/// rules hold.
pub fn wigner_3j(j1: usize, j2: usize, j3: usize, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m1.unsigned_abs() as usize > j1 {
        return 0.0;
    }
    let (jmin, values) = wigner_3j_family(j2, j3, m2, m3);
    if j1 < jmin || j1 - jmin >= values.len() {
        return 0.0;
    }
    values[j1 - jmin]
}

/// Gaunt coefficients `G(n1,m1; n2,m2; l)` for all `l`, indexed by `l`
/// (length `n1 + n2 + 1`). Entries violating a selection rule are exactly 0.
pub fn gaunt_family(n1: usize, m1: i64, n2: usize, m2: i64) -> Vec<f64> {
    let mut out = vec![0.0; n1 + n2 + 1];
    if m1.unsigned_abs() as usize > n1 || m2.unsigned_abs() as usize > n2 {
        return out;
    }
    let m3 = m1 + m2;
    // (l n1 n2; -m3 m1 m2) is a cyclic permutation of (n1 n2 l; m1 m2 -m3)
    let (lmin_m, with_m) = wigner_3j_family(n1, n2, m1, m2);
    let (lmin_0, with_0) = wigner_3j_family(n1, n2, 0, 0);
    let sign = if m3.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    for l in lmin_m..lmin_m + with_m.len() {
        if (n1 + n2 + l) % 2 == 1 || l < lmin_0 {
            continue;
        }
        let pref = (((2 * n1 + 1) * (2 * n2 + 1) * (2 * l + 1)) as f64 / (4.0 * PI)).sqrt();
        out[l] = sign * pref * with_0[l - lmin_0] * with_m[l - lmin_m];
    }
    out
}

/// `G(n1,m1; n2,m2; l) = ∫ Y_{n1,m1} Y_{n2,m2} conj(Y_{l,m1+m2}) dΩ`.
pub fn gaunt(n1: usize, m1: i64, n2: usize, m2: i64, l: usize) -> f64 {
    if l > n1 + n2 || l < n1.abs_diff(n2) || (n1 + n2 + l) % 2 == 1 {
        return 0.0;
    }
    gaunt_family(n1, m1, n2, m2)[l]
}
