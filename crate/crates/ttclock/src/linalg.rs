//! Small dense complex algebra: 2x2 matrices in the momentum basis
//! {|k>, |-k>} and a pivoted real 4x4 solver for the contextual-value system.

use num_complex::Complex64;

pub fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Complex 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub e: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self {
            e: [[a11, a12], [a21, a22]],
        }
    }

    pub fn zero() -> Self {
        Self::diag(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(a, z, z, b)
    }

    /// Projector onto |k> (transmitted side at late times).
    pub fn projector_right() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Projector onto |-k> (reflected side at late times).
    pub fn projector_left() -> Self {
        Self::diag(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &o.e;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &o.e;
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &o.e;
        Mat2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }

    pub fn scale(&self, z: Complex64) -> Mat2 {
        let a = &self.e;
        Mat2::new(a[0][0] * z, a[0][1] * z, a[1][0] * z, a[1][1] * z)
    }

    pub fn scale_re(&self, x: f64) -> Mat2 {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.e;
        Mat2::new(
            a[0][0].conj(),
            a[1][0].conj(),
            a[0][1].conj(),
            a[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0][0] + self.e[1][1]
    }

    /// [self, o] = self o - o self.
    pub fn commutator(&self, o: &Mat2) -> Mat2 {
        self.mul(o).sub(&o.mul(self))
    }

    /// {self, o} = self o + o self.
    pub fn anticommutator(&self, o: &Mat2) -> Mat2 {
        self.mul(o).add(&o.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        self.sub(o).max_abs()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }
}

/// Solves a real 4x4 system by LU with partial pivoting.
///
/// Returns the solution, the determinant, and a 1-norm condition estimate.
/// `None` when a pivot falls below `pivot_tol` times the largest entry.
pub fn solve4(a: [[f64; 4]; 4], b: [f64; 4], pivot_tol: f64) -> Option<([f64; 4], f64, f64)> {
    let norm_a = norm1(&a);
    let scale = a
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let (lu, perm, det) = lu_decompose(a, pivot_tol * scale)?;
    let x = lu_solve(&lu, &perm, b);

    // Condition estimate from the explicit inverse (fine at this size).
    let mut inv_norm: f64 = 0.0;
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let col = lu_solve(&lu, &perm, e);
        let s: f64 = col.iter().map(|x| x.abs()).sum();
        inv_norm = inv_norm.max(s);
    }
    Some((x, det, norm_a * inv_norm))
}

fn norm1(a: &[[f64; 4]; 4]) -> f64 {
    (0..4)
        .map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Index form keeps the row elimination readable across the two-row borrow.
#[allow(clippy::needless_range_loop)]
fn lu_decompose(mut a: [[f64; 4]; 4], min_pivot: f64) -> Option<([[f64; 4]; 4], [usize; 4], f64)> {
    let mut perm = [0usize, 1, 2, 3];
    let mut det = 1.0;
    for col in 0..4 {
        let mut piv = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() <= min_pivot {
            return None;
        }
        if piv != col {
            a.swap(piv, col);
            perm.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            a[row][col] = f;
            for j in col + 1..4 {
                a[row][j] -= f * a[col][j];
            }
        }
    }
    Some((a, perm, det))
}

fn lu_solve(lu: &[[f64; 4]; 4], perm: &[usize; 4], b: [f64; 4]) -> [f64; 4] {
    let mut y = [0.0; 4];
    for row in 0..4 {
        let mut s = b[perm[row]];
        for j in 0..row {
            s -= lu[row][j] * y[j];
        }
        y[row] = s;
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = y[row];
        for j in row + 1..4 {
            s -= lu[row][j] * x[j];
        }
        x[row] = s / lu[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat2_mul_identity() {
        let m = Mat2::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.3, -0.7),
            Complex64::new(2.0, 0.0),
        );
        assert_eq!(m.mul(&Mat2::identity()), m);
        assert_eq!(Mat2::identity().mul(&m), m);
    }

    #[test]
    fn adjoint_of_product() {
        let a = Mat2::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.3, -0.7),
            Complex64::new(2.0, 0.4),
        );
        let b = Mat2::new(
            Complex64::new(0.2, -1.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(0.0, 0.9),
            Complex64::new(-0.3, 0.2),
        );
        let lhs = a.mul(&b).adjoint();
        let rhs = b.adjoint().mul(&a.adjoint());
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn solve4_recovers_known_solution() {
        let a = [
            [4.0, 1.0, 0.0, -1.0],
            [1.0, 3.0, 2.0, 0.0],
            [0.0, 2.0, 5.0, 1.0],
            [-1.0, 0.0, 1.0, 2.0],
        ];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for r in 0..4 {
            b[r] = (0..4).map(|c| a[r][c] * x_true[c]).sum();
        }
        let (x, det, cond) = solve4(a, b, 1e-14).unwrap();
        for j in 0..4 {
            assert!((x[j] - x_true[j]).abs() < 1e-12);
        }
        assert!(det.abs() > 1.0);
        assert!(cond > 1.0 && cond < 1e4);
    }

    #[test]
    fn solve4_rejects_singular() {
        let a = [
            [1.0, 2.0, 3.0, 4.0],
            [2.0, 4.0, 6.0, 8.0],
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
        ];
        assert!(solve4(a, [1.0, 2.0, 3.0, 4.0], 1e-12).is_none());
    }
}
