//! Eigen-decompositions for small dense complex matrices.
//!
//! Hermitian matrices go through cyclic complex Jacobi rotations. General
//! matrices are reduced to a complex Schur form (Hessenberg reduction
//! followed by shifted QR), from which right and left eigenvectors are read
//! off by triangular substitution.

use std::cmp::Ordering;

use super::matrix::{inner, norm, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Result, TomoError};

/// Hermitian input must agree with its adjoint to this tolerance.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Minimum eigenvalue gap for the first-order eigenvector expansion.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Largest acceptable `|<xi_a|zeta_b> - delta_ab|`.
pub const BIORTHOGONALITY_TOL: f64 = 1e-6;

/// Eigen-decomposition of a Hermitian matrix, values descending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[a]` belongs to `values[a]`.
    pub vectors: Vec<Vec<C64>>,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `sum_a p_a |phi_a><phi_a|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (p, v) in self.values.iter().zip(&self.vectors) {
            out = &out + &ComplexMatrix::projector(v).scale_real(*p);
        }
        out
    }
}

/// Right and left eigenvectors of a general square matrix with
/// `<xi_a|zeta_b> = delta_ab`.
#[derive(Debug, Clone)]
pub struct BiorthogonalEig {
    /// Sorted by descending real part, then descending imaginary part.
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors (columns).
    pub right: Vec<Vec<C64>>,
    /// Left eigenvectors stored as rows, so `xi_a . zeta_b` needs no conjugation.
    pub left: Vec<Vec<C64>>,
}

impl BiorthogonalEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `sum_a r_a |zeta_a><xi_a|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|a| self.values[a] * self.right[a][i] * self.left[a][j])
                .sum()
        })
    }

    /// `max |<xi_a|zeta_b> - delta_ab|`
    pub fn biorthogonality_residual(&self) -> f64 {
        let n = self.dim();
        let mut res = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let d: C64 = self.left[a]
                    .iter()
                    .zip(&self.right[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { ONE } else { ZERO };
                res = res.max((d - target).norm());
            }
        }
        res
    }
}

fn check_square_hermitian(m: &ComplexMatrix) -> Result<()> {
    let dev = m.hermiticity_deviation();
    if dev > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(TomoError::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Rotate the phase of `v` so its largest-modulus entry is real and positive.
fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix via cyclic Jacobi rotations.
///
/// The input is symmetrized as `(m + m^H)/2` before solving. Values come out
/// descending; equal values keep the solver's order.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    check_square_hermitian(m)?;
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let phase = apq / g; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Unitary acting on (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            col
        })
        .collect();
    Ok(HermitianEig { values, vectors })
}

/// Complex Schur decomposition `m = Q T Q^H`, returned as `(Q, T)`.
fn schur(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);

    // Householder reduction to upper Hessenberg form.
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_norm = norm(&x);
        if alpha_norm <= 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let mut u = x.clone();
        u[0] += phase * alpha_norm;
        let un = norm(&u);
        for z in u.iter_mut() {
            *z /= un;
        }
        // H <- P H P with P = I - 2 u u^H on rows/cols k+1..n
        for j in 0..n {
            let d: C64 = (0..u.len()).map(|i| u[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..u.len() {
                h[(k + 1 + i, j)] -= u[i] * d * 2.0;
            }
        }
        for i in 0..n {
            let d: C64 = (0..u.len()).map(|j| h[(i, k + 1 + j)] * u[j]).sum();
            for j in 0..u.len() {
                h[(i, k + 1 + j)] -= d * u[j].conj() * 2.0;
            }
        }
        for i in 0..n {
            let d: C64 = (0..u.len()).map(|j| q[(i, k + 1 + j)] * u[j]).sum();
            for j in 0..u.len() {
                q[(i, k + 1 + j)] -= d * u[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }

    let eps = f64::EPSILON;
    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { h.max_abs() } else { s };
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 300 {
            break;
        }

        // Wilkinson shift from the trailing 2x2 block, with exceptional shifts.
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if iter.is_multiple_of(11) {
            d + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let tr_half = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            let l1 = tr_half + disc;
            let l2 = tr_half - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for j in lo..hi {
            let x = h[(j, j)];
            let y = h[(j + 1, j)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (ONE, ZERO)
            } else {
                (x / r, y / r)
            };
            // G^H applied to rows j, j+1:  [conj(cs) conj(sn); -sn cs]
            for k in j..n {
                let hj = h[(j, k)];
                let hk = h[(j + 1, k)];
                h[(j, k)] = cs.conj() * hj + sn.conj() * hk;
                h[(j + 1, k)] = -sn * hj + cs * hk;
            }
            rots.push((cs, sn));
        }
        for (idx, j) in (lo..hi).enumerate() {
            let (cs, sn) = rots[idx];
            let top = (j + 2).min(hi);
            for i in 0..=top {
                let hj = h[(i, j)];
                let hk = h[(i, j + 1)];
                h[(i, j)] = hj * cs + hk * sn;
                h[(i, j + 1)] = -hj * sn.conj() + hk * cs.conj();
            }
            for i in 0..n {
                let qj = q[(i, j)];
                let qk = q[(i, j + 1)];
                q[(i, j)] = qj * cs + qk * sn;
                q[(i, j + 1)] = -qj * sn.conj() + qk * cs.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    (q, h)
}

fn cmp_desc(a: &C64, b: &C64) -> Ordering {
    let scale = a.norm().max(b.norm()).max(1.0);
    if (a.re - b.re).abs() > 1e-12 * scale {
        b.re.total_cmp(&a.re)
    } else {
        b.im.total_cmp(&a.im)
    }
}

/// Eigenvalues of a general square matrix, descending by real part.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    let (_, t) = schur(m);
    let mut vals: Vec<C64> = (0..m.dim()).map(|i| t[(i, i)]).collect();
    vals.sort_by(cmp_desc);
    vals
}

/// Right and left eigenvectors of a (non-defective) general matrix,
/// normalized so that `<xi_a|zeta_b> = delta_ab`.
pub fn biorthogonal_eig(m: &ComplexMatrix) -> Result<BiorthogonalEig> {
    let n = m.dim();
    let (q, t) = schur(m);
    let smin = (f64::EPSILON * t.max_abs()).max(f64::MIN_POSITIVE);

    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        // T y = lam y, y_k = 1, back substitution upward.
        let mut y = vec![ZERO; n];
        y[k] = ONE;
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut den = t[(i, i)] - lam;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            y[i] = -s / den;
        }
        // u T = lam u, u_k = 1, forward substitution.
        let mut u = vec![ZERO; n];
        u[k] = ONE;
        for j in k + 1..n {
            let s: C64 = (k..j).map(|i| u[i] * t[(i, j)]).sum();
            let mut den = t[(j, j)] - lam;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            u[j] = -s / den;
        }
        let mut zeta = q.mul_vec(&y);
        let zn = norm(&zeta);
        for z in zeta.iter_mut() {
            *z /= zn;
        }
        fix_phase(&mut zeta);
        // xi = u Q^H as a row.
        let xi: Vec<C64> = (0..n)
            .map(|j| (0..n).map(|i| u[i] * q[(j, i)].conj()).sum())
            .collect();
        right.push(zeta);
        left.push(xi);
    }

    for a in 0..n {
        let d: C64 = left[a].iter().zip(&right[a]).map(|(x, y)| x * y).sum();
        if d.norm() < 1e-300 {
            return Err(TomoError::DegenerateSpectrum {
                residual: f64::INFINITY,
            });
        }
        for x in left[a].iter_mut() {
            *x /= d;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    order.sort_by(|&x, &y| cmp_desc(&diag[x], &diag[y]));
    let eig = BiorthogonalEig {
        values: order.iter().map(|&k| diag[k]).collect(),
        right: order.iter().map(|&k| right[k].clone()).collect(),
        left: order.iter().map(|&k| left[k].clone()).collect(),
    };
    let residual = eig.biorthogonality_residual();
    if !residual.is_finite() || residual > BIORTHOGONALITY_TOL {
        return Err(TomoError::DegenerateSpectrum { residual });
    }
    Ok(eig)
}

/// First-order eigenvalue shift `<xi_a| dM |zeta_a>`.
pub fn eigenvalue_derivative(eig: &BiorthogonalEig, a: usize, dm: &ComplexMatrix) -> Result<C64> {
    if a >= eig.dim() {
        return Err(TomoError::InvalidIndex {
            index: a,
            dim: eig.dim(),
        });
    }
    if dm.dim() != eig.dim() {
        return Err(TomoError::InvalidDimension {
            expected: eig.dim(),
            got: dm.dim(),
        });
    }
    Ok(dm.sandwich(&eig.left[a], &eig.right[a]))
}

/// Hermitian specialization `<phi_a| dM |phi_a>`.
pub fn hermitian_eigenvalue_derivative(
    eig: &HermitianEig,
    a: usize,
    dm: &ComplexMatrix,
) -> Result<f64> {
    if a >= eig.dim() {
        return Err(TomoError::InvalidIndex {
            index: a,
            dim: eig.dim(),
        });
    }
    Ok(dm.expectation(&eig.vectors[a]).re)
}

/// First-order corrections to the right and left eigenvectors of index `a`:
///
/// `d zeta_a = - sum_{b != a} <xi_b|dM|zeta_a> / (r_b - r_a) |zeta_b>`
/// `d xi_a   = - sum_{b != a} <xi_a|dM|zeta_b> / (r_b - r_a) <xi_b|`
pub fn eigenvector_perturbation(
    eig: &BiorthogonalEig,
    a: usize,
    dm: &ComplexMatrix,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = eig.dim();
    if a >= n {
        return Err(TomoError::InvalidIndex { index: a, dim: n });
    }
    let mut d_right = vec![ZERO; n];
    let mut d_left = vec![ZERO; n];
    for b in 0..n {
        if b == a {
            continue;
        }
        let gap = eig.values[b] - eig.values[a];
        if gap.norm() < DEGENERACY_GAP {
            return Err(TomoError::DegenerateSpectrum {
                residual: gap.norm(),
            });
        }
        let cr = dm.sandwich(&eig.left[b], &eig.right[a]) / gap;
        let cl = dm.sandwich(&eig.left[a], &eig.right[b]) / gap;
        for i in 0..n {
            d_right[i] -= cr * eig.right[b][i];
            d_left[i] -= cl * eig.left[b][i];
        }
    }
    Ok((d_right, d_left))
}

/// Overlap modulus `|<u|v>| / (|u| |v|)`, handy for phase-insensitive comparisons.
pub fn ray_overlap(u: &[C64], v: &[C64]) -> f64 {
    inner(u, v).norm() / (norm(u) * norm(v))
}
