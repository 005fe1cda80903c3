//! Wigner 3j and 6j symbols and the D1 dipole couplings derived from them.
//!
//! All angular momenta are passed doubled (`j2 = 2j`) so half-integers stay exact.

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn triangle(a2: i32, b2: i32, c2: i32) -> bool {
    c2 >= (a2 - b2).abs() && c2 <= a2 + b2 && (a2 + b2 + c2) % 2 == 0
}

fn delta(a2: i32, b2: i32, c2: i32) -> f64 {
    factorial((a2 + b2 - c2) / 2) * factorial((a2 - b2 + c2) / 2) * factorial((-a2 + b2 + c2) / 2)
        / factorial((a2 + b2 + c2) / 2 + 1)
}

fn parity(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` with doubled arguments (Racah formula).
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || !triangle(j1, j2, j3) {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let pre = (delta(j1, j2, j3)
        * factorial(h(j1 + m1))
        * factorial(h(j1 - m1))
        * factorial(h(j2 + m2))
        * factorial(h(j2 - m2))
        * factorial(h(j3 + m3))
        * factorial(h(j3 - m3)))
    .sqrt();

    let k_min = 0.max(h(j2 - j3 - m1)).max(h(j1 - j3 + m2));
    let k_max = h(j1 + j2 - j3).min(h(j1 - m1)).min(h(j2 + m2));
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(h(j3 - j2 + m1) + k)
            * factorial(h(j3 - j1 - m2) + k)
            * factorial(h(j1 + j2 - j3) - k)
            * factorial(h(j1 - m1) - k)
            * factorial(h(j2 + m2) - k);
        sum += parity(k) / denom;
    }
    parity(h(j1 - j2 - m3)) * pre * sum
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}` with doubled arguments.
pub fn wigner_6j(j1: i32, j2: i32, j3: i32, j4: i32, j5: i32, j6: i32) -> f64 {
    if !triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3) {
        return 0.0;
    }
    let a1 = (j1 + j2 + j3) / 2;
    let a2 = (j1 + j5 + j6) / 2;
    let a3 = (j4 + j2 + j6) / 2;
    let a4 = (j4 + j5 + j3) / 2;
    let b1 = (j1 + j2 + j4 + j5) / 2;
    let b2 = (j2 + j3 + j5 + j6) / 2;
    let b3 = (j3 + j1 + j6 + j4) / 2;
    let pre = (delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) * delta(j4, j5, j3)).sqrt();

    let t_min = a1.max(a2).max(a3).max(a4);
    let t_max = b1.min(b2).min(b3);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let denom = factorial(t - a1)
            * factorial(t - a2)
            * factorial(t - a3)
            * factorial(t - a4)
            * factorial(b1 - t)
            * factorial(b2 - t)
            * factorial(b3 - t);
        sum += parity(t) * factorial(t + 1) / denom;
    }
    pre * sum
}

/// Squared σ⁺ D1 coupling `|<F', M+1| d₊ |F, M>|²` for nuclear spin `i2/2`.
///
/// Normalized so that the sum over both upper levels equals the `m_J = -1/2`
/// population of `|F, M>`, i.e. `d₊` is the bare electron raising operator
/// `|m_J' = +1/2><m_J = -1/2|` acting on the valence electron.
pub fn d1_sigma_plus_coupling(i2: i32, f_lower: i32, f_upper: i32, m: i32) -> f64 {
    let (f2, fp2, m2) = (2 * f_lower, 2 * f_upper, 2 * m);
    let reduced = ((fp2 + 1) * (f2 + 1)) as f64 * wigner_6j(1, fp2, i2, f2, 1, 2).powi(2);
    // the factor 3 = 2k+1 for the rank-1 dipole operator
    3.0 * reduced * wigner_3j(fp2, 2, f2, -(m2 + 2), 2, m2).powi(2)
}

/// Linear-in-M coefficient of the σ⁺ coupling within the lower level `F`.
///
/// The coupling is exactly quadratic in M, so the symmetric difference is exact.
pub fn d1_vector_weight(i2: i32, f_lower: i32, f_upper: i32) -> f64 {
    0.5 * (d1_sigma_plus_coupling(i2, f_lower, f_upper, 1) - d1_sigma_plus_coupling(i2, f_lower, f_upper, -1))
}

/// Relative D1 absorption strength of `F -> F'` for unpolarized ground-state atoms.
///
/// Normalized so the four lines of a two-manifold ground state sum to one.
pub fn d1_line_strength(i2: i32, f_lower: i32, f_upper: i32) -> f64 {
    let (f2, fp2) = (2 * f_lower, 2 * f_upper);
    let population = (f2 + 1) as f64 / (2 * (i2 + 1)) as f64;
    // (2J+1)(2F'+1){J J' 1; F' F I}² sums to one over F' for fixed F
    let branching = 2.0 * (fp2 + 1) as f64 * wigner_6j(1, 1, 2, fp2, f2, i2).powi(2);
    population * branching
}
