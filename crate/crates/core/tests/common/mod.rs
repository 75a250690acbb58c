//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tomo_core::linalg::{hermitian_eig, ComplexMatrix, C64, ZERO};
use tomo_core::{CountRecord, DensityMatrix, TomographySet};

pub const PAPER_COUNTS: [f64; 16] = [
    34749.0, 324.0, 35805.0, 444.0, 16324.0, 17521.0, 13441.0, 16901.0, 17932.0, 32028.0, 15132.0,
    17238.0, 13171.0, 17170.0, 16722.0, 33586.0,
];

pub const PAPER_LINEAR_EIGENVALUES: [f64; 4] = [1.02155, 0.0681238, -0.024396, -0.065274];
pub const PAPER_LINEAR_PURITY: f64 = 1.053;
pub const PAPER_MLE_EIGENVALUES: [f64; 4] = [0.986022, 0.0139777, 0.0, 0.0];
pub const PAPER_MLE_PURITY: f64 = 0.972435;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn paper_record() -> CountRecord {
    CountRecord::with_table1(PAPER_COUNTS.to_vec()).unwrap()
}

/// Hermitian matrix from its upper triangle `(i, j, re, im)`.
pub fn hermitian_from_upper(upper: &[(usize, usize, f64, f64)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    for &(i, j, re, im) in upper {
        m[(i, j)] = c(re, im);
        m[(j, i)] = c(re, -im);
    }
    m
}

pub fn paper_linear_rho() -> ComplexMatrix {
    hermitian_from_upper(&[
        (0, 0, 0.4872, 0.0),
        (1, 1, 0.0045, 0.0),
        (2, 2, 0.0062, 0.0),
        (3, 3, 0.5020, 0.0),
        (0, 1, -0.0042, 0.0114),
        (0, 2, -0.0098, -0.0178),
        (0, 3, 0.5192, 0.0380),
        (1, 2, 0.0271, -0.0146),
        (1, 3, -0.0648, -0.0076),
        (2, 3, -0.0695, 0.0134),
    ])
}

pub fn paper_mle_rho_printed() -> ComplexMatrix {
    hermitian_from_upper(&[
        (0, 0, 0.5069, 0.0),
        (1, 1, 0.0048, 0.0),
        (2, 2, 0.0045, 0.0),
        (3, 3, 0.4839, 0.0),
        (0, 1, -0.0239, 0.0106),
        (0, 2, -0.0412, -0.0221),
        (0, 3, 0.4833, 0.0329),
        (1, 2, 0.0023, 0.0019),
        (1, 3, -0.0296, -0.0077),
        (2, 3, -0.0425, 0.0192),
    ])
}

/// The printed maximum-likelihood matrix, trace-normalized and projected
/// onto the positive cone (its 4-decimal rounding leaves a -4e-5 eigenvalue).
pub fn paper_mle_fixture() -> DensityMatrix {
    let m = paper_mle_rho_printed();
    let tr = m.trace().re;
    psd_project(&m.scale_real(1.0 / tr))
}

/// Clip negative eigenvalues and renormalize.
pub fn psd_project(m: &ComplexMatrix) -> DensityMatrix {
    let rho = DensityMatrix::normalized(m.clone()).unwrap();
    let mut eig = rho.eig().clone();
    for v in eig.values.iter_mut() {
        *v = v.max(0.0);
    }
    let total: f64 = eig.values.iter().sum();
    for v in eig.values.iter_mut() {
        *v /= total;
    }
    DensityMatrix::new(eig.reconstruct().hermitian_part()).unwrap()
}

/// Entries of the printed dual-basis listing that are misprinted, as
/// `(nu, row, col, printed value)` with 0-based row and column.
pub const M_TYPOS: [(usize, usize, usize, (f64, f64)); 3] = [
    (1, 3, 1, (-0.5, -0.5)),
    (13, 1, 2, (-0.5, 0.5)),
    (13, 2, 1, (-0.5, -0.5)),
];

/// The sixteen printed dual-basis matrices with the misprints above corrected.
pub fn printed_m_matrices() -> Vec<ComplexMatrix> {
    let p = c(1.0, 1.0); // 1 + i
    let m = c(1.0, -1.0); // 1 - i
    let i = c(0.0, 1.0);
    let o = ZERO;
    let one = c(1.0, 0.0);
    let two = c(2.0, 0.0);
    let half = |rows: [[C64; 4]; 4]| ComplexMatrix::from_rows(&rows).scale_real(0.5);
    vec![
        half([
            [two, -m, -p, one],
            [-p, o, i, o],
            [-m, -i, o, o],
            [one, o, o, o],
        ]),
        half([
            [o, -m, o, one],
            [-p, two, i, -p],
            [o, -i, o, o],
            [one, -m, o, o],
        ]),
        half([
            [o, o, o, one],
            [o, o, i, -p],
            [o, -i, o, -m],
            [one, -m, -p, two],
        ]),
        half([
            [o, o, -p, one],
            [o, o, i, o],
            [-m, -i, two, -m],
            [one, o, -p, o],
        ]),
        half([
            [o, o, i * 2.0, -p],
            [o, o, m, o],
            [-i * 2.0, p, o, o],
            [-m, o, o, o],
        ]),
        half([
            [o, o, o, -p],
            [o, o, m, i * 2.0],
            [o, p, o, o],
            [-m, -i * 2.0, o, o],
        ]),
        half([
            [o, o, o, -p],
            [o, o, -m, two],
            [o, -p, o, o],
            [-m, two, o, o],
        ]),
        half([
            [o, o, two, -p],
            [o, o, -m, o],
            [two, -p, o, o],
            [-m, o, o, o],
        ]),
        ComplexMatrix::from_rows(&[[o, o, o, i], [o, o, -i, o], [o, i, o, o], [-i, o, o, o]]),
        ComplexMatrix::from_rows(&[
            [o, o, o, one],
            [o, o, one, o],
            [o, one, o, o],
            [one, o, o, o],
        ]),
        ComplexMatrix::from_rows(&[[o, o, o, i], [o, o, i, o], [o, -i, o, o], [-i, o, o, o]]),
        half([
            [o, two, o, -p],
            [two, o, -p, o],
            [o, -m, o, o],
            [-m, o, o, o],
        ]),
        half([
            [o, o, o, -p],
            [o, o, -p, o],
            [o, -m, o, two],
            [-m, o, two, o],
        ]),
        half([
            [o, o, o, -m],
            [o, o, m, o],
            [o, p, o, -i * 2.0],
            [-p, o, i * 2.0, o],
        ]),
        half([
            [o, -i * 2.0, o, -m],
            [i * 2.0, o, m, o],
            [o, p, o, o],
            [-p, o, o, o],
        ]),
        ComplexMatrix::from_rows(&[
            [o, o, o, one],
            [o, o, -one, o],
            [o, -one, o, o],
            [one, o, o, o],
        ]),
    ]
}

/// Cofactor expansion along the first row.
pub fn laplace_det(m: &ComplexMatrix) -> C64 {
    let n = m.dim();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut det = ZERO;
    for j in 0..n {
        let minor = m.without(&[0], &[j]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += m[(0, j)] * laplace_det(&minor) * sign;
    }
    det
}

/// Characteristic polynomial coefficients `c_0..c_n` of `det(z - A)`
/// (monic, `c_n = 1`) by Faddeev-LeVerrier.
pub fn char_poly(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.dim();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut mk = ComplexMatrix::zeros(n);
    for k in 1..=n {
        let shifted = &mk + &ComplexMatrix::identity(n).scale(coeffs[n - k + 1]);
        mk = a * &shifted;
        coeffs[n - k] = -mk.trace() / k as f64;
    }
    coeffs
}

/// Polynomial roots by Durand-Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let eval = |z: C64| coeffs.iter().rev().fold(ZERO, |acc, &k| acc * z + k) / lead;
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// Eigenvalues from the characteristic polynomial, real parts sorted descending.
pub fn oracle_eigenvalues(a: &ComplexMatrix) -> Vec<C64> {
    let mut r = poly_roots(&char_poly(a));
    r.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
    r
}

pub fn gaussian_c(rng: &mut impl Rng) -> C64 {
    c(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| gaussian_c(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).hermitian_part()
}

/// Haar-ish unitary from Gram-Schmidt on Gaussian columns.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian_c(rng)).collect();
        for u in &cols {
            let p: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nv > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

/// Random density matrix `G G^dag / Tr` with `G` an `n x rank` Gaussian matrix.
pub fn random_density(rng: &mut impl Rng, n: usize, rank: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(n, |_, j| if j < rank { gaussian_c(rng) } else { ZERO });
    let m = &g * &g.adjoint();
    DensityMatrix::normalized(m.hermitian_part()).unwrap()
}

/// Werner-like mixture `p |phi+><phi+| + (1 - p) I/4` rotated by local phases.
pub fn mixed_entangled(p: f64, phase: f64) -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = [c(h, 0.0), ZERO, ZERO, C64::from_polar(h, phase)];
    let pure = ComplexMatrix::projector(&ket);
    let m = &pure.scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    DensityMatrix::new(m).unwrap()
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Full-rank, clearly entangled, with no special symmetry.
pub fn generic_state() -> DensityMatrix {
    let mut r = rng(61);
    let noise = random_density(&mut r, 4, 4);
    let base = mixed_entangled(0.85, 0.4);
    DensityMatrix::new(&base.matrix().scale_real(0.8) + &noise.matrix().scale_real(0.2)).unwrap()
}

/// Symmetric difference of `f(sum_mu M_mu s_mu)` in each `s_nu`.
pub fn pipeline_gradient(
    rho: &DensityMatrix,
    set: &TomographySet,
    h: f64,
    f: impl Fn(&ComplexMatrix) -> f64,
) -> Vec<f64> {
    let s = set.probabilities(rho.matrix());
    (0..16)
        .map(|nu| {
            let mut up = s.clone();
            let mut dn = s.clone();
            up[nu] += h;
            dn[nu] -= h;
            (f(&set.combine(&up)) - f(&set.combine(&dn))) / (2.0 * h)
        })
        .collect()
}

/// `-sum p log2 p` straight from the eigenvalues, with no trace check.
pub fn raw_entropy(m: &ComplexMatrix) -> f64 {
    hermitian_eig(&m.hermitian_part())
        .unwrap()
        .values
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

pub fn raw_linear_entropy(m: &ComplexMatrix) -> f64 {
    4.0 / 3.0 * (1.0 - (m * m).trace().re)
}
