//! Independent oracles for the test suites. Nothing here calls the library's
//! angular algebra or asymptotic formulas.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

/// Spin matrices `(J_z, J_+)` for spin `j2/2`, basis ordered `m = j, j−1, …, −j`.
fn spin_ops(j2: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = j2 + 1;
    let j = j2 as f64 / 2.0;
    let mut jz = DMatrix::zeros(n, n);
    let mut jp = DMatrix::zeros(n, n);
    for a in 0..n {
        let m = j - a as f64;
        jz[(a, a)] = m;
        if a > 0 {
            // ⟨m+1|J₊|m⟩ with m+1 at index a−1
            jp[(a - 1, a)] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    (jz, jp)
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `I·S` on the electron ⊗ nucleus space (electron index outermost).
fn i_dot_s(i2: usize) -> DMatrix<f64> {
    let (sz, sp) = spin_ops(1);
    let (iz, ip) = spin_ops(i2);
    let sm = sp.transpose();
    let im = ip.transpose();
    kron(&sz, &iz) + (kron(&sp, &im) + kron(&sm, &ip)) * 0.5
}

/// Vector light-shift coefficients from exact diagonalization of the
/// ground + excited D1 manifolds (`J = J' = 1/2`) under σ⁺ light.
///
/// Energies in GHz. The ground hyperfine constant is `split/(I+½)`, and
/// likewise for the excited state. The optical offset `nu_ghz` is measured from
/// the upper-ground → lower-excited line. Coupling is `(Ω/2)(|e↑⟩⟨g↓| ⊗ 1 + h.c.)`.
/// Returns the M-linear coefficients of the upper- and lower-manifold shifts
/// divided by `(Ω/2)²`, fitted by least squares to `a + bM + cM²`.
pub fn exact_vector_shifts(i2: usize, ground_split: f64, excited_split: f64, nu_ghz: f64, omega: f64) -> (f64, f64) {
    let ni = i2 + 1;
    let d = 2 * ni;
    let ag = ground_split / (ni as f64 / 2.0);
    let ae = excited_split / (ni as f64 / 2.0);
    let ids = i_dot_s(i2);
    let (sz, _) = spin_ops(1);
    let (iz, _) = spin_ops(i2);
    let fz = kron(&sz, &DMatrix::identity(ni, ni)) + kron(&DMatrix::identity(2, 2), &iz);
    let i = i2 as f64 / 2.0;
    // bare energies: upper ground F = I+½ sits at +ag·I/2, lower excited F' = I−½ at −ae(I+1)/2
    let e_upper_ground = ag * i / 2.0;
    let e_lower_excited = -ae * (i + 1.0) / 2.0;
    // a tiny Zeeman term splits the degenerate M levels so eigenvectors are pure M
    let eps = 1e-9;
    let hg = &ids * ag + &fz * eps;
    let offset = e_upper_ground - e_lower_excited - nu_ghz;
    let he = &ids * ae + DMatrix::identity(d, d) * offset + &fz * eps;

    let mut h = DMatrix::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(&hg);
    h.view_mut((d, d), (d, d)).copy_from(&he);
    // |e, m_s=+½, m_I⟩ ← |g, m_s=−½, m_I⟩ ; electron index outermost: +½ first block
    for mi in 0..ni {
        let g = ni + mi;
        let e = d + mi;
        h[(e, g)] = omega / 2.0;
        h[(g, e)] = omega / 2.0;
    }

    let bare = SymmetricEigen::new(hg.clone());
    let dressed = SymmetricEigen::new(h);
    let mut upper: Vec<(f64, f64)> = Vec::new();
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for k in 0..d {
        let v = bare.eigenvectors.column(k);
        let m = (v.transpose() * &fz * v)[0].round();
        let mut best = (0.0, 0);
        for j in 0..2 * d {
            let w = dressed.eigenvectors.column(j);
            let overlap = (0..d).map(|a| v[a] * w[a]).sum::<f64>().powi(2);
            if overlap > best.0 {
                best = (overlap, j);
            }
        }
        let shift = (dressed.eigenvalues[best.1] - bare.eigenvalues[k]) / (omega / 2.0).powi(2);
        if bare.eigenvalues[k] > 0.0 {
            upper.push((m, shift));
        } else {
            lower.push((m, shift));
        }
    }
    (quadratic_fit(&upper)[1], quadratic_fit(&lower)[1])
}

/// Least-squares `(a, b, c)` of `y = a + b x + c x²`.
pub fn quadratic_fit(points: &[(f64, f64)]) -> [f64; 3] {
    let n = points.len();
    let mut a = DMatrix::zeros(n, 3);
    let mut y = DVector::zeros(n);
    for (k, (x, v)) in points.iter().enumerate() {
        a[(k, 0)] = 1.0;
        a[(k, 1)] = *x;
        a[(k, 2)] = x * x;
        y[k] = *v;
    }
    let sol = a.svd(true, true).solve(&y, 1e-14).expect("least squares");
    [sol[0], sol[1], sol[2]]
}

/// Second-order perturbation coefficient `c` in `Γ ≈ Γ₀ + c Δω²/R_se` for a
/// spin-exchange matrix `m_se`, computed from its numerically determined left
/// and right eigenvectors.
pub fn perturbative_quadratic_coefficient(m_se: &Matrix2<f64>) -> f64 {
    let right = m_se.clone_owned().eigenvalues().expect("real spectrum");
    let (slow, fast) = if right[0].abs() < right[1].abs() {
        (0, 1)
    } else {
        (1, 0)
    };
    let eps = right[fast];
    let kernel = |m: Matrix2<f64>, lambda: f64| {
        let k = m - Matrix2::identity() * lambda;
        // null vector of a singular 2×2
        let v = nalgebra::Vector2::new(-k[(0, 1)], k[(0, 0)]);
        if v.norm() > 1e-12 {
            v
        } else {
            nalgebra::Vector2::new(-k[(1, 1)], k[(1, 0)])
        }
    };
    let n = kernel(*m_se, right[slow]);
    let u = kernel(*m_se, eps);
    let l = kernel(m_se.transpose(), right[slow]);
    let v = kernel(m_se.transpose(), eps);
    let (n, l) = (n / l.dot(&n), l);
    let (u, v) = (u / v.dot(&u), v);
    // perturbation V = (iΔ/2)·diag(1, −1); the factors of i combine to −1
    let half = Matrix2::new(0.5, 0.0, 0.0, -0.5);
    (l.transpose() * half * u)[0] * (v.transpose() * half * n)[0] / eps
}

/// `(B, P)` cells drawn uniformly from the default sweep window.
pub fn random_cells(seed: u64, n: usize, b_max: f64, p_max: f64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.gen_range(0.0..b_max), rng.gen_range(0.0..p_max)))
        .collect()
}
