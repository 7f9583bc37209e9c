//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicitly shifted QL, the classical EISPACK pair. Only the extreme
//! eigenpair is exposed; matrices at desk scale are a few thousand rows, so
//! a direct O(n³) method is both fast enough and backward stable.
//!
//! Matrices are row-major flat slices of length n². Only the lower triangle
//! is read.

use crate::error::{Error, Result};
use crate::num::Real;

/// Smallest eigenvalue of a symmetric matrix.
pub fn lowest_eigenvalue<T: Real>(matrix: &[T], n: usize) -> Result<T> {
    let (d, _, _) = decompose(matrix, n, false)?;
    Ok(d.into_iter().fold(T::infinity(), T::min))
}

/// Smallest eigenvalue with a unit eigenvector. The vector's sign is fixed
/// so its first appreciable component is positive.
pub fn lowest_eigenpair<T: Real>(matrix: &[T], n: usize) -> Result<(T, Vec<T>)> {
    let (d, z, _) = decompose(matrix, n, true)?;
    let z = z.expect("vectors requested");
    let mut k = 0;
    for (i, &v) in d.iter().enumerate() {
        if v < d[k] {
            k = i;
        }
    }
    let mut vec: Vec<T> = (0..n).map(|i| z[i * n + k]).collect();
    let norm = vec.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        for v in &mut vec {
            *v /= norm;
        }
    }
    let peak = vec.iter().fold(T::zero(), |m: T, &v| m.max(v.abs()));
    let threshold = T::of(1e-12) * peak;
    if let Some(&lead) = vec.iter().find(|v| v.abs() > threshold) {
        if lead < T::zero() {
            for v in &mut vec {
                *v = -*v;
            }
        }
    }
    Ok((d[k], vec))
}

fn decompose<T: Real>(
    matrix: &[T],
    n: usize,
    vectors: bool,
) -> Result<(Vec<T>, Option<Vec<T>>, ())> {
    if n == 0 || matrix.len() != n * n {
        return Err(Error::Domain(format!(
            "matrix storage of length {} does not hold an {n}x{n} matrix",
            matrix.len()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "matrix contains a non-finite entry".into(),
        ));
    }
    let mut z = matrix.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut z, n, &mut d, &mut e, vectors);
    ql_implicit(&mut d, &mut e, if vectors { Some(&mut z) } else { None })?;
    Ok((d, vectors.then_some(z), ()))
}

/// Householder reduction to tridiagonal form; `d` receives the diagonal and
/// `e` the subdiagonal (in e[1..]). With `vectors`, `z` is overwritten by the
/// accumulated orthogonal transformation.
fn tridiagonalize<T: Real>(z: &mut [T], n: usize, d: &mut [T], e: &mut [T], vectors: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..i {
                scale += z[at(i, k)].abs();
            }
            if scale == T::zero() {
                e[i] = z[at(i, l)];
            } else {
                for k in 0..i {
                    z[at(i, k)] /= scale;
                    h += z[at(i, k)] * z[at(i, k)];
                }
                let f = z[at(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[at(i, l)] = f - g;
                let mut fa = T::zero();
                for j in 0..i {
                    if vectors {
                        z[at(j, i)] = z[at(i, j)] / h;
                    }
                    let mut ga = T::zero();
                    for k in 0..=j {
                        ga += z[at(j, k)] * z[at(i, k)];
                    }
                    for k in j + 1..i {
                        ga += z[at(k, j)] * z[at(i, k)];
                    }
                    e[j] = ga / h;
                    fa += e[j] * z[at(i, j)];
                }
                let hh = fa / (h + h);
                for j in 0..i {
                    let f = z[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * z[at(i, k)];
                        z[at(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = z[at(i, l)];
        }
        d[i] = h;
    }
    if vectors {
        d[0] = T::zero();
    }
    e[0] = T::zero();
    for i in 0..n {
        if vectors {
            if d[i] != T::zero() {
                for j in 0..i {
                    let mut g = T::zero();
                    for k in 0..i {
                        g += z[at(i, k)] * z[at(k, j)];
                    }
                    for k in 0..i {
                        let upd = g * z[at(k, i)];
                        z[at(k, j)] -= upd;
                    }
                }
            }
            d[i] = z[at(i, i)];
            z[at(i, i)] = T::one();
            for j in 0..i {
                z[at(j, i)] = T::zero();
                z[at(i, j)] = T::zero();
            }
        } else {
            d[i] = z[at(i, i)];
        }
    }
}

/// QL with implicit shifts on the tridiagonal (d, e); eigenvalues land in
/// `d`. With `z`, columns are rotated alongside and end up as eigenvectors.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Numerical(
                    "symmetric QL iteration failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (T::of(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + copy_sign_magnitude(r, g));
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + T::of(2.0) * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                if let Some(zz) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = zz[k * n + i + 1];
                        zz[k * n + i + 1] = s * zz[k * n + i] + c * f;
                        zz[k * n + i] = c * zz[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

fn copy_sign_magnitude<T: Real>(magnitude: T, sign_of: T) -> T {
    if sign_of >= T::zero() {
        magnitude.abs()
    } else {
        -magnitude.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(n: usize, seed: u64) -> Vec<f64> {
        // Deterministic symmetric test matrix from a linear congruential
        // stream, entries in [-1, 1].
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    #[test]
    fn diagonal_matrix_picks_smallest_entry() {
        let a: Vec<f64> = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let (val, vec) = lowest_eigenpair(&a, 3).unwrap();
        assert!((val - 1.0).abs() < 1e-14);
        assert!((vec[1].abs() - 1.0).abs() < 1e-14 && vec[0].abs() < 1e-14);
        assert!(vec[1] > 0.0);
    }

    #[test]
    fn off_diagonal_pair_has_antisymmetric_ground_state() {
        let a: Vec<f64> = vec![0.0, 1.0, 1.0, 0.0];
        let (val, vec) = lowest_eigenpair(&a, 2).unwrap();
        assert!((val + 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((vec[0] - r).abs() < 1e-14 && (vec[1] + r).abs() < 1e-14);
    }

    #[test]
    fn single_entry_matrix() {
        let (val, vec) = lowest_eigenpair(&[-4.0f64], 1).unwrap();
        assert_eq!(val, -4.0);
        assert_eq!(vec, vec![1.0]);
    }

    #[test]
    fn eigenpair_satisfies_the_defining_equation() {
        let n = 24;
        let a = lcg_matrix(n, 17);
        let (val, vec) = lowest_eigenpair(&a, n).unwrap();
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += a[i * n + j] * vec[j];
            }
            residual += (row - val * vec[i]).powi(2);
        }
        let frob: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(residual.sqrt() <= 1e-12 * frob, "residual {residual:.3e}");
    }

    #[test]
    fn value_only_and_full_paths_agree() {
        for seed in [1u64, 2, 3] {
            let n = 16;
            let a = lcg_matrix(n, seed);
            let v1 = lowest_eigenvalue(&a, n).unwrap();
            let (v2, _) = lowest_eigenpair(&a, n).unwrap();
            assert!((v1 - v2).abs() <= 1e-13 * (1.0 + v1.abs()));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lowest_eigenvalue(&[1.0, 2.0], 2).is_err());
        assert!(lowest_eigenvalue(&[f64::NAN], 1).is_err());
    }
}
