//! Small dense 4x4 helpers, generic over the scalar so the same code paths
//! run on floats and on jets. Pivot decisions always use the value part.

use crate::scalar::Real;

pub type Mat4<S> = [[S; 4]; 4];

pub fn mat_from_fn<S: Copy>(mut f: impl FnMut(usize, usize) -> S) -> Mat4<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn identity<S: Real>() -> Mat4<S> {
    mat_from_fn(|i, j| S::from_f64(if i == j { 1.0 } else { 0.0 }))
}

pub fn mat_mul<S: Real>(a: &Mat4<S>, b: &Mat4<S>) -> Mat4<S> {
    mat_from_fn(|i, j| {
        let mut acc = S::from_f64(0.0);
        for k in 0..4 {
            acc = acc + a[i][k] * b[k][j];
        }
        acc
    })
}

pub fn transpose<S: Copy>(a: &Mat4<S>) -> Mat4<S> {
    mat_from_fn(|i, j| a[j][i])
}

/// Gauss-Jordan inverse with partial pivoting on value parts. Returns None
/// when a pivot falls under `rel_tol` times the largest entry (conditioning
/// bound).
pub fn invert<S: Real>(m: &Mat4<S>, rel_tol: f64) -> Option<Mat4<S>> {
    let mut a = *m;
    let mut inv = identity::<S>();
    let scale = a
        .iter()
        .flatten()
        .map(|x| x.val().abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);

    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&r, &s| {
                a[r][col]
                    .val()
                    .abs()
                    .partial_cmp(&a[s][col].val().abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row][col].val().abs() < rel_tol * scale {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);

        let piv = a[col][col].recip();
        for j in 0..4 {
            a[col][j] = a[col][j] * piv;
            inv[col][j] = inv[col][j] * piv;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            for j in 0..4 {
                a[row][j] = a[row][j] - factor * a[col][j];
                inv[row][j] = inv[row][j] - factor * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric 4x4 by cyclic Jacobi rotations. Float only;
/// used for signature checks, not for anything differentiated.
pub fn symmetric_eigen(m: &[[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut a = *m;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

/// Count of (positive, negative) eigenvalues; the metric signature.
pub fn signature(m: &[[f64; 4]; 4]) -> (usize, usize) {
    let (eig, _) = symmetric_eigen(m);
    let pos = eig.iter().filter(|&&x| x > 0.0).count();
    let neg = eig.iter().filter(|&&x| x < 0.0).count();
    (pos, neg)
}
