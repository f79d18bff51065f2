//! Symmetric-function algebra on eigenvalue vectors and symmetric matrices.
//!
//! Houses the elementary symmetric polynomials `s_k`, the quotients
//! `q_k = s_k / s_{k-1}`, their derivatives, and the matrix pinching gap
//! used by the curvature diagnostics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest matrix dimension supported by this module.
pub const MAX_DIM: usize = 8;

/// Relative threshold below which a quotient denominator counts as zero.
/// Pinching functionals must fail loudly instead of silently blowing up.
pub const QUOTIENT_DENOM_THRESHOLD: f64 = 1e-12;

/// Ordered vector of real eigenvalues (dimensionless curvatures).
///
/// Always sorted ascending; ties keep their order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenVector {
    mu: Vec<f64>,
}

impl EigenVector {
    pub fn new(mut mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Domain("eigenvalue vector must be non-empty".into()));
        }
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("eigenvalue vector has non-finite entry".into()));
        }
        mu.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
        Ok(Self { mu })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    /// Uniform scaling `mu -> c * mu` (the order is preserved for c > 0).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.mu.iter().map(|x| c * x).collect())
    }
}

/// Real symmetric n x n matrix, n in 2..=8, stored as a lower triangle so
/// that symmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    tri: Vec<f64>, // row-major lower triangle: (i, j) with j <= i
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Domain(format!(
                "symmetric matrix dimension must be in 2..={MAX_DIM}, got {n}"
            )));
        }
        Ok(Self {
            n,
            tri: vec![0.0; n * (n + 1) / 2],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        Ok(m)
    }

    /// Build from a full square array, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Domain("matrix rows must be square".into()));
            }
            for j in 0..=i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Domain(format!(
                        "matrix not exactly symmetric at ({i},{j})"
                    )));
                }
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.tri[tri_index(i, j)]
        } else {
            self.tri[tri_index(j, i)]
        }
    }

    /// Set entry (i, j) and its mirror simultaneously.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if j <= i {
            self.tri[tri_index(i, j)] = v;
        } else {
            self.tri[tri_index(j, i)] = v;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &SymMatrix) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(Error::Domain("dimension mismatch in matrix sum".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.tri.iter_mut().zip(other.tri.iter()) {
            *a += c * b;
        }
        Ok(out)
    }

    /// Eigenvalues sorted ascending, via a symmetric eigensolver.
    pub fn eigenvalues(&self) -> Result<EigenVector> {
        let eig = self.to_dmatrix().symmetric_eigenvalues();
        let vals: Vec<f64> = eig.iter().copied().collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "eigendecomposition produced non-finite values for matrix {:?}",
                self.to_dmatrix()
            )));
        }
        EigenVector::new(vals)
    }

    /// Full spectral decomposition; eigenpairs sorted ascending by value.
    pub fn eigen_pairs(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let se = self.to_dmatrix().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.n).collect();
        let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "eigendecomposition produced non-finite values for matrix {:?}",
                self.to_dmatrix()
            )));
        }
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite"));
        let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let mut vecs = DMatrix::zeros(self.n, self.n);
        for (dst, &src) in order.iter().enumerate() {
            vecs.set_column(dst, &se.eigenvectors.column(src));
        }
        Ok((sorted_vals, vecs))
    }
}

/// k-th elementary symmetric polynomial of `mu`, with `s_0 = 1`.
pub fn elementary_symmetric(mu: &EigenVector, k: usize) -> Result<f64> {
    let n = mu.dim();
    if k > n {
        return Err(Error::Domain(format!(
            "symmetric polynomial order k={k} out of range 0..={n}"
        )));
    }
    Ok(elementary_all(mu.values())[k])
}

/// All of `s_0..=s_n` by the Vieta recurrence (coefficients of prod (x + mu_i)).
fn elementary_all(mu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &m) in mu.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += m * e[k - 1];
        }
    }
    e
}

/// Quotient `q_k = s_k / s_{k-1}`, defined when the denominator is nonzero.
pub fn quotient_q(mu: &EigenVector, k: usize) -> Result<f64> {
    let n = mu.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "quotient order k={k} out of range 1..={n}"
        )));
    }
    let e = elementary_all(mu.values());
    let (num, den) = (e[k], e[k - 1]);
    if den.abs() < QUOTIENT_DENOM_THRESHOLD * 1.0f64.max(num.abs()) {
        return Err(Error::UndefinedQuotient(format!(
            "s_{}({:?}) = {:.3e} below threshold",
            k - 1,
            mu.values(),
            den
        )));
    }
    Ok(num / den)
}

/// `s_k` of a symmetric matrix, computed by two independent routes:
/// eigendecomposition and the sum of principal k x k minors.  The routes
/// must agree; disagreement is reported as a numerical error.
pub fn symmetric_of_matrix(m: &SymMatrix, k: usize) -> Result<f64> {
    let n = m.dim();
    if k > n {
        return Err(Error::Domain(format!(
            "symmetric polynomial order k={k} out of range 0..={n}"
        )));
    }
    let by_minors = sum_principal_minors(m, k);
    let by_eigen = elementary_symmetric(&m.eigenvalues()?, k)?;
    let scale = 1.0f64.max(m.frobenius_norm().powi(k as i32));
    if (by_minors - by_eigen).abs() > 1e-9 * scale {
        return Err(Error::Numerical(format!(
            "s_{k} self-check disagreement: minors {by_minors:.17e} vs eigen {by_eigen:.17e} for matrix {:?}",
            m.to_dmatrix()
        )));
    }
    Ok(by_minors)
}

/// Sum of all principal k x k minors (the coefficient route; exact polynomial
/// in the entries).
pub fn sum_principal_minors(m: &SymMatrix, k: usize) -> f64 {
    let n = m.dim();
    if k == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let sub = DMatrix::from_fn(k, k, |a, b| m.get(subset[a], subset[b]));
        total += sub.determinant();
        // next k-combination of 0..n in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
        }
        if subset[i] == i + n - k {
            return total;
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Gradient of `S_k` with respect to the matrix entries, as a symmetric
/// matrix G with d/dt s_k(M + tB) = <G, B> for symmetric B.
///
/// Computed spectrally: G = sum_i s_{k-1}(mu with mu_i removed) v_i v_i^T.
pub fn grad_s_k(m: &SymMatrix, k: usize) -> Result<SymMatrix> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "gradient order k={k} out of range 1..={n}"
        )));
    }
    let (vals, vecs) = m.eigen_pairs()?;
    let mut reduced = Vec::with_capacity(n - 1);
    let mut coeff = vec![0.0; n];
    for i in 0..n {
        reduced.clear();
        reduced.extend(vals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
        coeff[i] = elementary_all(&reduced)[k - 1];
    }
    SymMatrix::from_fn(n, |i, j| {
        (0..n).map(|l| coeff[l] * vecs[(i, l)] * vecs[(j, l)]).sum()
    })
}

/// Directional second derivative of `q_{k+1}` at M along the symmetric
/// direction B, i.e. the Hessian quadratic form
/// (d^2 q_{k+1} / d theta_ij d theta_pq)(M) B_ij B_pq,
/// evaluated by second-order central differences of the quotient.
pub fn hessian_quadratic_q(m: &SymMatrix, k: usize, b: &SymMatrix) -> Result<f64> {
    let n = m.dim();
    if k == 0 || k + 1 > n {
        return Err(Error::Domain(format!(
            "hessian order k+1={} out of range 2..={n}",
            k + 1
        )));
    }
    if b.dim() != n {
        return Err(Error::Domain("direction dimension mismatch".into()));
    }
    let bnorm = b.frobenius_norm();
    if bnorm == 0.0 {
        return Ok(0.0);
    }
    let bhat = {
        let mut s = b.clone();
        for v in &mut s.tri {
            *v /= bnorm;
        }
        s
    };
    let q_at = |t: f64| -> Result<f64> {
        let shifted = m.axpy(t, &bhat)?;
        quotient_q(&shifted.eigenvalues()?, k + 1)
    };
    let h = 1e-3 * 1.0f64.max(m.frobenius_norm());
    let (qp, q0, qm) = (q_at(h)?, q_at(0.0)?, q_at(-h)?);
    Ok((qp - 2.0 * q0 + qm) / (h * h) * bnorm * bnorm)
}

/// Normalized pinching gap `(|M|^2 - max_i lambda_i^2) / |M|^2` of a
/// symmetric matrix away from the nearly-degenerate cone
/// `|M| <= (1 + eta) tr(M)`.
pub fn pinching_gap(m: &SymMatrix, eta: f64) -> Result<f64> {
    if eta <= 0.0 {
        return Err(Error::Precondition(format!("eta must be positive, got {eta}")));
    }
    let fro = m.frobenius_norm();
    if fro <= 0.0 {
        return Err(Error::Precondition("matrix must be nonzero".into()));
    }
    if fro <= (1.0 + eta) * m.trace() {
        return Err(Error::Precondition(format!(
            "|M| = {fro:.6e} not above (1+eta) tr(M) = {:.6e}",
            (1.0 + eta) * m.trace()
        )));
    }
    let vals = m.eigenvalues()?;
    let max_sq = vals
        .values()
        .iter()
        .map(|v| v * v)
        .fold(0.0f64, f64::max);
    Ok((fro * fro - max_sq) / (fro * fro))
}
