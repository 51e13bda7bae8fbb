use crate::Matrix;

/// Householder QR of a tall `m x n` matrix (`m >= n`), reflectors kept in
/// compact form so the full orthogonal factor can be applied on demand.
pub(crate) struct HouseholderQr {
    m: usize,
    reflectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    r_diag: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "HouseholderQr needs a tall matrix");
        // column-major working copy
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut reflectors = Vec::with_capacity(n);
        let mut betas = Vec::with_capacity(n);
        let mut r_diag = Vec::with_capacity(n);

        for k in 0..n {
            let x = cols[k][k..].to_vec();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v = x.clone();
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|t| t * t).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            for col in cols.iter_mut().skip(k) {
                let tail = &mut col[k..];
                let dot: f64 = v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
                let s = beta * dot;
                for (t, vi) in tail.iter_mut().zip(&v) {
                    *t -= s * vi;
                }
            }
            r_diag.push(if vtv > 0.0 { alpha } else { x[0] });
            reflectors.push(v);
            betas.push(beta);
        }
        HouseholderQr {
            m,
            reflectors,
            betas,
            r_diag,
        }
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    /// `Q y` for the full `m x m` orthogonal factor.
    pub fn apply_q(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.m);
        for k in (0..self.reflectors.len()).rev() {
            let v = &self.reflectors[k];
            let tail = &mut y[k..];
            let dot: f64 = v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
            let s = self.betas[k] * dot;
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    /// Column `j` of the full orthogonal factor.
    pub fn q_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.m];
        e[j] = 1.0;
        self.apply_q(&mut e);
        e
    }
}

/// Singular values of `a`, descending.
pub(crate) fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Rows of the result are an orthonormal basis of the row space of `a`
/// (assumed full row rank), oriented so that the implied `R` has a positive
/// diagonal.
pub(crate) fn orthonormal_rows(a: &Matrix) -> Matrix {
    let qr = HouseholderQr::new(&a.transpose());
    let mut out = Matrix::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        let sign = if qr.r_diag()[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in qr.q_column(i).into_iter().enumerate() {
            out.set(i, j, sign * v);
        }
    }
    out
}

#[cfg(test)]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
