//! Row-major dense arrays of 64-bit floats plus the handful of matrix kernels
//! the tape engine is built on.

use crate::{NumericsError, Result};

/// Dense row-major array. Public constructors reject NaN/Inf entries; the
/// compute kernels assume finite inputs and produce finite outputs for the
/// magnitudes seen in training (loss finiteness is checked by the training
/// loops).
#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Array> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(NumericsError::ShapeDataMismatch {
                shape,
                len: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NumericsError::NonFinite {
                context: "array construction".into(),
            });
        }
        Ok(Array { shape, data })
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Array> {
        let n = data.len();
        Array::new(vec![n], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Array> {
        Array::new(vec![rows, cols], data)
    }

    pub fn scalar(v: f64) -> Result<Array> {
        Array::new(vec![1], vec![v])
    }

    pub fn zeros(shape: &[usize]) -> Array {
        let n: usize = shape.iter().product();
        Array {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn full(shape: &[usize], v: f64) -> Result<Array> {
        let n: usize = shape.iter().product();
        Array::new(shape.to_vec(), vec![v; n])
    }

    /// Internal constructor for kernel outputs; skips the finiteness scan.
    pub(crate) fn from_raw(shape: Vec<usize>, data: Vec<f64>) -> Array {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Array { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rows of a 2-D array (a 1-D array counts as a single row).
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            1 => 1,
            2 => self.shape[0],
            _ => panic!("rows() on array of rank {}", self.shape.len()),
        }
    }

    /// Columns of a 1-D or 2-D array.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            1 => self.shape[0],
            2 => self.shape[1],
            _ => panic!("cols() on array of rank {}", self.shape.len()),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn reshaped(&self, shape: Vec<usize>) -> Array {
        assert_eq!(
            shape.iter().product::<usize>(),
            self.data.len(),
            "reshape {:?} -> {:?}",
            self.shape,
            shape
        );
        Array {
            shape,
            data: self.data.clone(),
        }
    }

    /// C = A · B for A [m,k], B [k,n].
    pub fn matmul(&self, other: &Array) -> Array {
        let (m, k) = (self.rows(), self.cols());
        let (k2, n) = (other.rows(), other.cols());
        assert_eq!(k, k2, "matmul inner dims {k} vs {k2}");
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = self.row(i);
            let orow = &mut out[i * n..(i + 1) * n];
            for (kk, &aik) in arow.iter().enumerate() {
                let brow = &other.data[kk * n..(kk + 1) * n];
                for j in 0..n {
                    orow[j] += aik * brow[j];
                }
            }
        }
        Array::from_raw(vec![m, n], out)
    }

    /// C = A · Bᵀ for A [m,k], B [n,k].
    pub fn matmul_nt(&self, other: &Array) -> Array {
        let (m, k) = (self.rows(), self.cols());
        let (n, k2) = (other.rows(), other.cols());
        assert_eq!(k, k2, "matmul_nt inner dims {k} vs {k2}");
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = self.row(i);
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                let brow = other.row(j);
                let mut acc = 0.0;
                for kk in 0..k {
                    acc += arow[kk] * brow[kk];
                }
                orow[j] = acc;
            }
        }
        Array::from_raw(vec![m, n], out)
    }

    /// C = Aᵀ · B for A [m,k], B [m,n].
    pub fn matmul_tn(&self, other: &Array) -> Array {
        let (m, k) = (self.rows(), self.cols());
        let (m2, n) = (other.rows(), other.cols());
        assert_eq!(m, m2, "matmul_tn outer dims {m} vs {m2}");
        let mut out = vec![0.0; k * n];
        for r in 0..m {
            let arow = self.row(r);
            let brow = other.row(r);
            for (i, &ari) in arow.iter().enumerate() {
                let orow = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += ari * brow[j];
                }
            }
        }
        Array::from_raw(vec![k, n], out)
    }

    pub fn add_assign(&mut self, other: &Array) {
        assert_eq!(self.shape, other.shape, "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale_assign(&mut self, c: f64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|a| *a = v);
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Little-endian f64 bytes in row-major order; used for fingerprinting.
    pub fn le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_inf() {
        assert!(Array::from_vec(vec![1.0, f64::NAN]).is_err());
        assert!(Array::from_vec(vec![f64::INFINITY]).is_err());
        assert!(Array::from_vec(vec![1.0, -2.5]).is_ok());
    }

    #[test]
    fn rejects_shape_data_mismatch() {
        assert!(Array::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Array::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn matmul_small() {
        let a = Array::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Array::matrix(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_transposed_variants_agree() {
        let a = Array::matrix(2, 3, vec![1.0, -2.0, 3.0, 0.5, 5.0, -6.0]).unwrap();
        let b = Array::matrix(4, 3, (0..12).map(|i| i as f64 * 0.3 - 1.0).collect()).unwrap();
        let via_nt = a.matmul_nt(&b);
        // Compare against explicit transpose.
        let mut bt = vec![0.0; 12];
        for i in 0..4 {
            for j in 0..3 {
                bt[j * 4 + i] = b.data()[i * 3 + j];
            }
        }
        let btm = Array::matrix(3, 4, bt).unwrap();
        assert_eq!(via_nt.data(), a.matmul(&btm).data());

        let c = Array::matrix(2, 4, (0..8).map(|i| i as f64).collect()).unwrap();
        let via_tn = a.matmul_tn(&c);
        let mut at = vec![0.0; 6];
        for i in 0..2 {
            for j in 0..3 {
                at[j * 2 + i] = a.data()[i * 3 + j];
            }
        }
        let atm = Array::matrix(3, 2, at).unwrap();
        assert_eq!(via_tn.data(), atm.matmul(&c).data());
    }
}
