//! Cyclic Jacobi eigensolver for small Hermitian matrices, and one-sided
//! Jacobi singular values.

use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Input must be Hermitian to within this max-entry deviation.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Sweeps stop once the off-diagonal Frobenius norm drops below this.
const OFF_DIAGONAL_TOL: f64 = 1e-13;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues below `-PSD_TOL` make `psd_sqrt` fail; those above are clamped.
pub const PSD_TOL: f64 = 1e-10;

/// Eigen-decomposition with ascending eigenvalues; column `k` of `vectors`
/// belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<Eigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", h.rows(), h.cols())));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian(defect));
    }
    let n = h.rows();
    // symmetrize so that roundoff asymmetry does not leak into the sweep
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C64::from(h[(i, i)].re);
        for j in i + 1..n {
            let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let tol = OFF_DIAGONAL_TOL.max(1e-15 * a.frobenius_norm());

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] zeroes a_pq in U^dagger A U
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_pp = C64::from(c);
                let u_pq = C64::from(s);
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();

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
                a[(p, p)] = C64::from(a[(p, p)].re);
                a[(q, q)] = C64::from(a[(q, q)].re);

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
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.values)
}

/// Hermitian PSD square root; eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub fn psd_sqrt(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let Eigen { values, vectors } = hermitian_eigen(rho)?;
    if let Some(&worst) = values.first() {
        if worst < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(worst));
        }
    }
    let n = rho.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let r = lambda.max(0.0).sqrt();
        if r == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vectors[(i, k)] * r;
            for j in 0..n {
                out[(i, j)] += vi * vectors[(j, k)].conj();
            }
        }
    }
    // exact Hermiticity
    for i in 0..n {
        out[(i, i)] = C64::from(out[(i, i)].re);
        for j in i + 1..n {
            let z = 0.5 * (out[(i, j)] + out[(j, i)].conj());
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    Ok(out)
}

/// Groups ascending eigenvalues whose neighbours differ by at most `tol`;
/// returns `(mean value, multiplicity)` per group.
pub fn degenerate_groups(ascending: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &x in ascending {
        match groups.last_mut() {
            Some((sum, count)) if x - last <= tol => {
                *sum += x;
                *count += 1;
            }
            _ => groups.push((x, 1)),
        }
        last = x;
    }
    groups.into_iter().map(|(sum, count)| (sum / count as f64, count)).collect()
}

/// Singular values in descending order, by one-sided (Hestenes) Jacobi on
/// the columns. Small singular values keep absolute accuracy ~eps * s_max;
/// no square roots of eigenvalues are taken.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let (rows, n) = (m.rows(), m.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (head, tail) = cols.split_at_mut(q);
                let (a, b) = (&mut head[p], &mut tail[0]);
                let alpha: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = b.iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                let mag = gamma.norm();
                if mag <= 1e-15 * (alpha * beta).sqrt() || mag < 1e-300 {
                    continue;
                }
                rotated = true;
                // same 2x2 rotation as the eigensolver, applied to the Gram matrix
                let phase = gamma / mag;
                let theta = (beta - alpha) / (2.0 * mag);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = xp * c + yq * u_qp;
                    *y = xp * s + yq * u_qq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut out: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Number of eigenvalues within `tol` of `target`.
pub fn multiplicity(values: &[f64], target: f64, tol: f64) -> usize {
    values.iter().filter(|&&x| (x - target).abs() <= tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::I;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_and_pauli_x() {
        let ev = hermitian_eigenvalues(&ComplexMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let x = ComplexMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let ev = hermitian_eigenvalues(&x).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let h = ComplexMatrix::from_rows(&[
            &[C64::from(2.0), C64::new(0.3, -0.7), C64::new(0.0, 0.2)],
            &[C64::new(0.3, 0.7), C64::from(-1.0), C64::new(1.1, 0.0)],
            &[C64::new(0.0, -0.2), C64::new(1.1, 0.0), C64::from(0.5)],
        ])
        .unwrap();
        let Eigen { values, vectors } = hermitian_eigen(&h).unwrap();
        let d = ComplexMatrix::diag(&values);
        let back = &(&vectors * &d) * &vectors.dagger();
        assert!(back.max_abs_diff(&h) < 1e-13);
        assert!(vectors.unitarity_defect() < 1e-13);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[&[C64::from(0.0), I], &[I, C64::from(0.0)]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = psd_sqrt(&ComplexMatrix::diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::diag(&[2.0, 3.0])) < 1e-14);
        assert!(psd_sqrt(&ComplexMatrix::identity(4)).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert!(matches!(psd_sqrt(&ComplexMatrix::diag(&[1.0, -0.1])), Err(Error::NegativeEigenvalue(_))));
        // tiny negatives are clamped
        assert!(psd_sqrt(&ComplexMatrix::diag(&[1.0, -1e-12])).is_ok());
    }

    #[test]
    fn singular_values_known() {
        let m = ComplexMatrix::from_rows(&[&[C64::from(0.0), C64::new(0.0, 3.0)], &[C64::from(-4.0), C64::from(0.0)]]).unwrap();
        let s = singular_values(&m);
        assert_abs_diff_eq!(s[0], 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 3.0, epsilon = 1e-14);
        // rank one: second value exactly tiny, not sqrt(roundoff)
        let v = ComplexMatrix::from_rows(&[&[C64::new(1.0, 0.5), C64::new(0.3, -0.2)]]).unwrap();
        let r1 = &v.dagger() * &v.conj();
        let s = singular_values(&r1);
        assert!(s[1] < 1e-15, "{s:?}");
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let m = ComplexMatrix::from_rows(&[
            &[C64::new(0.2, 1.0), C64::new(-0.5, 0.1), C64::from(0.7)],
            &[C64::new(0.0, -0.3), C64::new(1.2, 0.4), C64::new(0.1, 0.1)],
            &[C64::from(0.9), C64::new(0.2, -0.8), C64::new(-0.6, 0.0)],
        ])
        .unwrap();
        let s = singular_values(&m);
        let mut e = hermitian_eigenvalues(&(&m.dagger() * &m)).unwrap();
        e.reverse();
        for (x, l) in s.iter().zip(e) {
            assert_abs_diff_eq!(x * x, l, epsilon = 1e-13);
        }
    }

    #[test]
    fn degeneracy_grouping() {
        let g = degenerate_groups(&[-0.25, -0.25 + 1e-13, 0.1, 0.3, 0.3], 1e-11);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].1, 2);
        assert_eq!(g[2].1, 2);
        assert_eq!(multiplicity(&[1.0, 1.0 + 5e-12, 2.0], 1.0, 1e-11), 2);
    }
}
