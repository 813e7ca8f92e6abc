//! Fixed-size dense helpers for the 2×2 and 4×4 real matrices of the
//! quadrature picture.

use crate::scalar::Real;

pub type Vec4<T> = [T; 4];
pub type Mat4<T> = [[T; 4]; 4];
pub type Mat2<T> = [[T; 2]; 2];

pub fn zeros<T: Real, const N: usize>() -> [[T; N]; N] {
    [[T::zero(); N]; N]
}

pub fn identity<T: Real, const N: usize>() -> [[T; N]; N] {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn matmul<T: Real, const N: usize>(a: &[[T; N]; N], b: &[[T; N]; N]) -> [[T; N]; N] {
    let mut c = zeros();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            for j in 0..N {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn transpose<T: Real, const N: usize>(a: &[[T; N]; N]) -> [[T; N]; N] {
    let mut t = zeros();
    for i in 0..N {
        for j in 0..N {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn add<T: Real, const N: usize>(a: &[[T; N]; N], b: &[[T; N]; N]) -> [[T; N]; N] {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn scale<T: Real, const N: usize>(a: &[[T; N]; N], s: T) -> [[T; N]; N] {
    let mut c = *a;
    c.iter_mut().flatten().for_each(|x| *x *= s);
    c
}

pub fn matvec<T: Real, const N: usize>(a: &[[T; N]; N], v: &[T; N]) -> [T; N] {
    let mut out = [T::zero(); N];
    for i in 0..N {
        out[i] = (0..N).map(|j| a[i][j] * v[j]).sum();
    }
    out
}

/// `a·b·aᵀ`.
pub fn congruence<T: Real, const N: usize>(a: &[[T; N]; N], b: &[[T; N]; N]) -> [[T; N]; N] {
    matmul(&matmul(a, b), &transpose(a))
}

pub fn outer<T: Real, const N: usize>(u: &[T; N], v: &[T; N]) -> [[T; N]; N] {
    let mut m = zeros();
    for i in 0..N {
        for j in 0..N {
            m[i][j] = u[i] * v[j];
        }
    }
    m
}

pub fn max_abs_diff<T: Real, const N: usize>(a: &[[T; N]; N], b: &[[T; N]; N]) -> T {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

pub fn max_abs<T: Real, const N: usize>(a: &[[T; N]; N]) -> T {
    a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn asymmetry<T: Real, const N: usize>(a: &[[T; N]; N]) -> T {
    max_abs_diff(a, &transpose(a))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det<T: Real, const N: usize>(a: &[[T; N]; N]) -> T {
    let mut m = *a;
    let mut d = T::one();
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..N {
            let f = m[r][col] / m[col][col];
            for c in col..N {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    d
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
pub fn symmetric_eigenvalues<T: Real, const N: usize>(a: &[[T; N]; N]) -> [T; N] {
    let mut m = *a;
    for _sweep in 0..64 {
        let off: T = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: T = m.iter().flatten().map(|x| *x * *x).sum();
        if off <= T::eps() * T::eps() * scale || off == T::zero() {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::of(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev = [T::zero(); N];
    for i in 0..N {
        ev[i] = m[i][i];
    }
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Numerical rank of a symmetric matrix: eigenvalues above
/// `rel_tol·max|λ|` count.
pub fn symmetric_rank<T: Real, const N: usize>(a: &[[T; N]; N], rel_tol: T) -> usize {
    let ev = symmetric_eigenvalues(a);
    let top = ev.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if top == T::zero() {
        return 0;
    }
    ev.iter().filter(|x| x.abs() > rel_tol * top).count()
}

/// The symplectic form with `[[0,1],[-1,0]]` blocks on the diagonal.
pub fn symplectic_form<T: Real>() -> Mat4<T> {
    let mut j = zeros();
    for b in 0..2 {
        j[2 * b][2 * b + 1] = T::one();
        j[2 * b + 1][2 * b] = -T::one();
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a: Mat4<f64> = [
            [4.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, 0.5],
            [0.0, 0.0, 0.5, 2.0],
        ];
        let ev = symmetric_eigenvalues(&a);
        let r = (1.25f64).sqrt();
        let expected = [1.5, 2.5, 3.5 - r, 3.5 + r];
        let mut e = expected;
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in ev.iter().zip(e) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!((det(&a) - ev.iter().product::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn rank_of_outer_products() {
        let u = [1.0, 2.0, 0.0, -1.0];
        let v = [0.0, 1.0, 1.0, 0.5];
        let m = add(&outer(&u, &u), &outer(&v, &v));
        assert_eq!(symmetric_rank(&m, 1e-12), 2);
        assert_eq!(symmetric_rank(&zeros::<f64, 4>(), 1e-12), 0);
    }
}
