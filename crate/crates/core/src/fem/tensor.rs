use std::ops::{Add, Mul, Neg};

/// 2×2 tensor, used for diffusion/permeability coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2(pub [[f64; 2]; 2]);

impl Tensor2 {
    pub const IDENTITY: Tensor2 = Tensor2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Tensor2 = Tensor2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn scalar(s: f64) -> Self {
        Tensor2([[s, 0.0], [0.0, s]])
    }

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Tensor2([[a11, a12], [a21, a22]])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let av = self.apply(v);
        u[0] * av[0] + u[1] * av[1]
    }

    pub fn transpose(&self) -> Self {
        let a = &self.0;
        Tensor2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0];
        let d = self.0[1][1];
        let b = 0.5 * (self.0[0][1] + self.0[1][0]);
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - rad, mean + rad]
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        (self.0[0][1] - self.0[1][0]).abs() <= rel_tol * scale
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric(1e-8) && self.sym_eigenvalues()[0] > 0.0
    }

    pub fn max_abs_diff(&self, other: &Tensor2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}

impl Default for Tensor2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl From<f64> for Tensor2 {
    fn from(s: f64) -> Self {
        Tensor2::scalar(s)
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        Tensor2(self.0.map(|r| r.map(|v| v * s)))
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, o: Tensor2) -> Tensor2 {
        let mut r = self.0;
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] += o.0[i][j];
            }
        }
        Tensor2(r)
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}
