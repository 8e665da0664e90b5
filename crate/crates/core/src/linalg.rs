//! Small dense complex matrices used for exact gate semantics and test oracles.

use std::ops::Mul;

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix { dim, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = v;
        }
        m
    }

    /// Matrix whose column `j` is `columns[j]`.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let dim = columns.len();
        let mut m = Self::zeros(dim);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), dim, "column {j} has wrong length");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * dim + j] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|&v| v * factor).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut out = Self::zeros(d);
        for i in 0..a {
            for j in 0..a {
                let s = self.get(i, j);
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * d + (j * b + l)] = s * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry deviation from the identity of `U U†`.
    pub fn unitarity_error(&self) -> f64 {
        let product = self * &self.adjoint();
        let id = Self::identity(self.dim);
        product.sub(&id).data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `|tr(U† V)| / dim`, equal to 1 exactly when `U` and `V` agree up to a global phase.
    pub fn phase_blind_overlap(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = ZERO;
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += a.conj() * b;
        }
        acc.norm() / self.dim as f64
    }

    /// `1 - |tr(U† V)| / dim`.
    pub fn phase_blind_distance(&self, other: &Matrix) -> f64 {
        1.0 - self.phase_blind_overlap(other)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }
}

/// Pauli matrices.
pub fn pauli_x() -> Matrix {
    Matrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> Matrix {
    Matrix::diagonal(&[ONE, -ONE])
}

/// `|<a|b>|^2` for normalised vectors.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    overlap.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_products() {
        let x = pauli_x();
        let z = pauli_z();
        let xz = x.kron(&z);
        assert_eq!(xz.dim(), 4);
        assert_eq!(xz.get(0, 2), ONE);
        assert_eq!(xz.get(1, 3), -ONE);
        let y = pauli_y();
        // XY = iZ
        assert!((&x * &y).sub(&z.scale(I)).norm() < 1e-15);
        assert!(xz.unitarity_error() < 1e-15);
    }

    #[test]
    fn phase_blind_metric() {
        let z = pauli_z();
        let phased = z.scale(Complex64::from_polar(1.0, 0.7));
        assert!(z.phase_blind_distance(&phased).abs() < 1e-15);
        assert!(z.phase_blind_distance(&pauli_x()) > 0.9);
    }
}
