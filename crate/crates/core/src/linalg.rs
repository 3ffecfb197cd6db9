//! Dense helpers: Cholesky factorization and 2×2 symmetric matrices.

/// Lower-triangular Cholesky factor of a row-major `n×n` symmetric matrix,
/// or `None` if a pivot is not strictly positive.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            let s = a[i * n + j] - dot;
            if i == j {
                if !s.is_finite() || s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { a: 0.0, b: 0.0, c: 0.0 };

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn add_diagonal(&self, d: f64) -> Sym2 {
        Sym2 { a: self.a + d, b: self.b, c: self.c + d }
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2 { a: self.a * s, b: self.b * s, c: self.c * s }
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c }
    }

    /// Inverse, or `None` when the determinant is not positive.
    pub fn inverse(&self) -> Option<Sym2> {
        let det = self.det();
        if !det.is_finite() || det <= 0.0 {
            return None;
        }
        Some(Sym2 { a: self.c / det, b: -self.b / det, c: self.a / det })
    }

    /// `vᵀ M v`
    pub fn quad(&self, v: [f64; 2]) -> f64 {
        self.a * v[0] * v[0] + 2.0 * self.b * v[0] * v[1] + self.c * v[1] * v[1]
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.b * v[0] + self.c * v[1]]
    }

    /// Max-norm of `self * other - I`.
    pub fn inverse_residual(&self, inv: &Sym2) -> f64 {
        let p00 = self.a * inv.a + self.b * inv.b - 1.0;
        let p01 = self.a * inv.b + self.b * inv.c;
        let p10 = self.b * inv.a + self.c * inv.b;
        let p11 = self.b * inv.b + self.c * inv.c - 1.0;
        p00.abs().max(p01.abs()).max(p10.abs()).max(p11.abs())
    }
}
