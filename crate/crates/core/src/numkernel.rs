//! Minimal complex linear-algebra substrate.
//!
//! Everything downstream projector math needs and nothing more: Hermitian
//! matrix products, rank-revealing orthonormalization (modified Gram-Schmidt
//! with one re-orthogonalization pass), regularized least squares via normal
//! equations, and a power-iteration spectral norm. Matrices are dense,
//! row-major, `Complex<f64>`.

use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default rank tolerance, relative to the largest column norm of the input.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec {
    entries: Vec<C64>,
}

impl CVec {
    pub fn new(entries: Vec<C64>) -> Self {
        CVec { entries }
    }

    /// Construct with the type invariants checked (finite entries, nonempty).
    pub fn validated(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty vector".into()));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(CVec { entries })
    }

    pub fn zeros(n: usize) -> Self {
        CVec {
            entries: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> C64) -> Self {
        CVec {
            entries: (0..n).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Max absolute entry.
    pub fn inf_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn inner(&self, other: &CVec) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> CVec {
        CVec::new(self.entries.iter().map(|z| z * s).collect())
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        debug_assert_eq!(self.len(), other.len());
        CVec::new(
            self.entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &CVec) -> CVec {
        debug_assert_eq!(self.len(), other.len());
        CVec::new(
            self.entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for CVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.entries[i]
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    entries: Vec<C64>,
    rows: usize,
    cols: usize,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Self {
        assert_eq!(rows * cols, entries.len(), "entry count must be rows*cols");
        CMat {
            entries,
            rows,
            cols,
        }
    }

    /// Construct with the type invariants checked.
    pub fn validated(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != entries.len() {
            return Err(Error::InvalidArgument(format!(
                "bad matrix shape {rows}x{cols} for {} entries",
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(CMat {
            entries,
            rows,
            cols,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            entries: vec![C64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CMat {
            entries,
            rows,
            cols,
        }
    }

    pub fn from_cols(cols: &[CVec]) -> Self {
        assert!(!cols.is_empty());
        let rows = cols[0].len();
        assert!(cols.iter().all(|c| c.len() == rows));
        CMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn col(&self, j: usize) -> CVec {
        assert!(j < self.cols);
        CVec::from_fn(self.rows, |i| self[(i, j)])
    }

    pub fn set_col(&mut self, j: usize, v: &CVec) {
        assert!(j < self.cols && v.len() == self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn herm(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Max absolute entry (entrywise infinity norm).
    pub fn inf_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Plain product `a · b`.
pub fn matmul(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.cols() != b.rows() {
        return Err(Error::dim("matmul", a.cols(), b.rows()));
    }
    let mut out = CMat::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a[(i, k)];
            for j in 0..b.cols() {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// Conjugate-transpose product `aᴴ · b`.
pub fn matmul_herm(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.rows() != b.rows() {
        return Err(Error::dim("matmul_herm", a.rows(), b.rows()));
    }
    let mut out = CMat::zeros(a.cols(), b.cols());
    for k in 0..a.rows() {
        for i in 0..a.cols() {
            let aki = a[(k, i)].conj();
            for j in 0..b.cols() {
                out[(i, j)] += aki * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// Conjugate-transpose product `aᴴ · x` with a vector.
pub fn matvec_herm(a: &CMat, x: &CVec) -> Result<CVec> {
    if a.rows() != x.len() {
        return Err(Error::dim("matvec_herm", a.rows(), x.len()));
    }
    let mut out = CVec::zeros(a.cols());
    for k in 0..a.rows() {
        let xk = x[k];
        for i in 0..a.cols() {
            out[i] += a[(k, i)].conj() * xk;
        }
    }
    Ok(out)
}

/// Plain product `a · x`.
pub fn matvec(a: &CMat, x: &CVec) -> Result<CVec> {
    if a.cols() != x.len() {
        return Err(Error::dim("matvec", a.cols(), x.len()));
    }
    let mut out = CVec::zeros(a.rows());
    for i in 0..a.rows() {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..a.cols() {
            acc += a[(i, j)] * x[j];
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Orthogonal projector `U·Uᴴ` onto the column span of `u`.
///
/// Caller is responsible for `u` having orthonormal columns.
pub fn outer_projector(u: &CMat) -> CMat {
    let n = u.rows();
    let mut p = CMat::zeros(n, n);
    for k in 0..u.cols() {
        for i in 0..n {
            let uik = u[(i, k)];
            for j in 0..n {
                p[(i, j)] += uik * u[(j, k)].conj();
            }
        }
    }
    p
}

/// Rank-revealing orthonormalization of the columns of `basis`.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// residual norm falls below `tol` times the largest input column norm are
/// dropped; the output column count is the numerical rank.
pub fn orthonormalize(basis: &CMat, tol: f64) -> Result<CMat> {
    let max_col_norm = (0..basis.cols())
        .map(|j| basis.col(j).norm())
        .fold(0.0, f64::max);
    if max_col_norm == 0.0 {
        return Err(Error::EmptyBasis);
    }
    let threshold = tol * max_col_norm;
    let mut kept: Vec<CVec> = Vec::new();
    for j in 0..basis.cols() {
        let mut v = basis.col(j);
        for _pass in 0..2 {
            for u in &kept {
                let c = u.inner(&v);
                for i in 0..v.len() {
                    v[i] -= c * u[i];
                }
            }
        }
        let n = v.norm();
        if n >= threshold {
            kept.push(v.scale(C64::new(1.0 / n, 0.0)));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyBasis);
    }
    Ok(CMat::from_cols(&kept))
}

/// Cholesky factor of a Hermitian positive-definite matrix (lower L, G = L·Lᴴ).
///
/// Fails with a rank-deficiency error when a pivot drops below
/// `1e-12 · max(diag)`, which is how `least_squares` detects singular normal
/// matrices at ridge 0.
pub(crate) fn cholesky(g: &CMat) -> Result<CMat> {
    let n = g.rows();
    assert_eq!(n, g.cols());
    let max_diag = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let pivot_tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > pivot_tol) {
            return Err(Error::RankDeficient("normal matrix pivot underflow"));
        }
        let dj = d.sqrt();
        l[(j, j)] = C64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solve `L·Lᴴ·x = b` given the Cholesky factor `L`.
pub(crate) fn cholesky_solve(l: &CMat, b: &CVec) -> CVec {
    let n = l.rows();
    debug_assert_eq!(n, b.len());
    // Forward: L y = b
    let mut y = CVec::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    // Backward: Lᴴ x = y
    let mut x = CVec::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Least-squares solution `argmin ‖b − a·x‖² (+ ridge·‖x‖²)`.
///
/// Solved through the normal equations `(aᴴa + ridge·I)·x = aᴴb`. With
/// `ridge = 0` this is the Moore-Penrose solution and requires full column
/// rank; a singular normal matrix is reported as a rank-deficiency error.
pub fn least_squares(a: &CMat, b: &CVec, ridge: f64) -> Result<CVec> {
    if a.rows() != b.len() {
        return Err(Error::dim("least_squares", a.rows(), b.len()));
    }
    let mut gram = matmul_herm(a, a)?;
    if ridge > 0.0 {
        for i in 0..gram.rows() {
            gram[(i, i)] += C64::new(ridge, 0.0);
        }
    }
    let rhs = matvec_herm(a, b)?;
    let l = cholesky(&gram)?;
    Ok(cholesky_solve(&l, &rhs))
}

/// Largest singular value of `m` by power iteration on `mᴴm`.
///
/// Deterministic start vector; stops on relative change below `tol` or after
/// `iters` iterations. A zero matrix yields 0.
pub fn spectral_norm(m: &CMat, iters: usize, tol: f64) -> f64 {
    let n = m.cols();
    // Fixed pseudo-random start: almost surely not orthogonal to the top
    // singular subspace, and independent of any caller RNG.
    let mut v = CVec::from_fn(n, |k| {
        let t = k as f64;
        C64::new((0.7 * t + 0.3).cos(), (1.3 * t + 0.1).sin())
    });
    let vn = v.norm();
    if vn == 0.0 {
        return 0.0;
    }
    v = v.scale(C64::new(1.0 / vn, 0.0));
    let mut sigma = 0.0;
    for _ in 0..iters {
        let w = matvec(m, &v).expect("shape checked");
        let s = w.norm();
        if s == 0.0 {
            return 0.0;
        }
        let y = matvec_herm(m, &w).expect("shape checked");
        let yn = y.norm();
        if yn == 0.0 {
            return s;
        }
        v = y.scale(C64::new(1.0 / yn, 0.0));
        if (s - sigma).abs() <= tol * s {
            return s;
        }
        sigma = s;
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_cvec(n: usize, rng: &mut impl Rng) -> CVec {
        CVec::from_fn(n, |_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    fn rand_cmat(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    /// Independent projector oracle from the normal equations: C(CᴴC)⁻¹Cᴴ x.
    /// Solves via dense Gaussian elimination, no shared code with the
    /// orthonormalize/cholesky path.
    fn gram_projector_apply(c: &CMat, x: &CVec) -> CVec {
        let q = c.cols();
        // Build augmented [G | Cᴴx] and eliminate.
        let mut g = vec![vec![C64::new(0.0, 0.0); q + 1]; q];
        for i in 0..q {
            for j in 0..q {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..c.rows() {
                    s += c[(k, i)].conj() * c[(k, j)];
                }
                g[i][j] = s;
            }
            let mut s = C64::new(0.0, 0.0);
            for k in 0..c.rows() {
                s += c[(k, i)].conj() * x[k];
            }
            g[i][q] = s;
        }
        for col in 0..q {
            let piv = (col..q)
                .max_by(|&a, &b| g[a][col].norm().partial_cmp(&g[b][col].norm()).unwrap())
                .unwrap();
            g.swap(col, piv);
            let p = g[col][col];
            for j in col..=q {
                g[col][j] /= p;
            }
            for r in 0..q {
                if r != col {
                    let f = g[r][col];
                    for j in col..=q {
                        let v = g[col][j];
                        g[r][j] -= f * v;
                    }
                }
            }
        }
        let mut out = CVec::zeros(c.rows());
        for k in 0..c.rows() {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..q {
                s += c[(k, i)] * g[i][q];
            }
            out[k] = s;
        }
        out
    }

    #[test]
    fn herm_identity_passes_vector_through() {
        let i2 = CMat::identity(2);
        let v = CVec::new(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)]);
        let got = matvec_herm(&i2, &v).unwrap();
        assert_eq!(got, v);
    }

    #[test]
    fn herm_unit_column_self_product_is_one() {
        let a = CMat::new(
            2,
            1,
            vec![
                C64::new(0.6, 0.0),
                C64::new(0.0, 0.8),
            ],
        );
        let g = matmul_herm(&a, &a).unwrap();
        assert!((g[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn herm_product_matches_triple_loop_oracle() {
        let mut rng = crate::rng::seeded(11);
        let a = rand_cmat(3, 2, &mut rng);
        let b = rand_cmat(3, 1, &mut rng);
        let got = matmul_herm(&a, &b).unwrap();
        for i in 0..2 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..3 {
                s += a[(k, i)].conj() * b[(k, 0)];
            }
            assert!((got[(i, 0)] - s).norm() < 1e-14);
        }
    }

    #[test]
    fn herm_dimension_mismatch_is_error() {
        let a = CMat::zeros(3, 2);
        let b = CMat::zeros(4, 1);
        assert!(matches!(
            matmul_herm(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn orthonormalize_preserves_orthonormal_input() {
        // 4x2 input that is already orthonormal.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMat::new(
            4,
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, -s),
            ],
        );
        let q = orthonormalize(&u, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(q.cols(), 2);
        let gram = matmul_herm(&q, &q).unwrap();
        assert!(gram.sub(&CMat::identity(2)).inf_norm() < 1e-12);
        // Same span: project each input column onto the output span.
        for j in 0..2 {
            let c = u.col(j);
            let coeff = matvec_herm(&q, &c).unwrap();
            let back = matvec(&q, &coeff).unwrap();
            assert!(back.sub(&c).norm() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_drops_duplicate_column() {
        let mut rng = crate::rng::seeded(3);
        let a = rand_cvec(5, &mut rng);
        let m = CMat::from_cols(&[a.clone(), a]);
        let q = orthonormalize(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(q.cols(), 1);
    }

    #[test]
    fn orthonormalize_rejects_zero_input() {
        let z = CMat::zeros(4, 2);
        assert!(matches!(
            orthonormalize(&z, DEFAULT_RANK_TOL),
            Err(Error::EmptyBasis)
        ));
    }

    #[test]
    fn orthonormalize_span_matches_gram_oracle() {
        let mut rng = crate::rng::seeded(42);
        let c = rand_cmat(8, 3, &mut rng);
        let u = orthonormalize(&c, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(u.cols(), 3);
        for _ in 0..20 {
            let x = rand_cvec(8, &mut rng);
            let p_ref = gram_projector_apply(&c, &x);
            let coeff = matvec_herm(&u, &x).unwrap();
            let p_out = matvec(&u, &coeff).unwrap();
            assert!(p_out.sub(&p_ref).norm() < 1e-10);
        }
    }

    #[test]
    fn projector_is_idempotent_and_hermitian() {
        let mut rng = crate::rng::seeded(9);
        for &(n, q) in &[(6usize, 2usize), (10, 4)] {
            let u = orthonormalize(&rand_cmat(n, q, &mut rng), DEFAULT_RANK_TOL).unwrap();
            let p = outer_projector(&u);
            let pp = matmul(&p, &p).unwrap();
            assert!(pp.sub(&p).inf_norm() < 1e-10);
            assert!(p.sub(&p.herm()).inf_norm() < 1e-12);
        }
    }

    #[test]
    fn least_squares_orthonormal_basis_reduces_to_herm_product() {
        let mut rng = crate::rng::seeded(17);
        let a = orthonormalize(&rand_cmat(6, 3, &mut rng), DEFAULT_RANK_TOL).unwrap();
        let b = rand_cvec(6, &mut rng);
        let x = least_squares(&a, &b, 0.0).unwrap();
        let direct = matvec_herm(&a, &b).unwrap();
        assert!(x.sub(&direct).norm() < 1e-10);
    }

    #[test]
    fn least_squares_exact_when_b_in_span() {
        let mut rng = crate::rng::seeded(23);
        let a = rand_cmat(6, 3, &mut rng);
        let coeffs = rand_cvec(3, &mut rng);
        let b = matvec(&a, &coeffs).unwrap();
        let x = least_squares(&a, &b, 0.0).unwrap();
        let resid = b.sub(&matvec(&a, &x).unwrap());
        assert!(resid.norm() < 1e-10);
    }

    #[test]
    fn least_squares_residual_orthogonality() {
        let mut rng = crate::rng::seeded(29);
        let a = rand_cmat(6, 3, &mut rng);
        let b = rand_cvec(6, &mut rng);
        let x = least_squares(&a, &b, 0.0).unwrap();
        let resid = b.sub(&matvec(&a, &x).unwrap());
        let ortho = matvec_herm(&a, &resid).unwrap();
        assert!(ortho.norm() < 1e-10, "aᴴ(b - ax) = {:?}", ortho.norm());
    }

    #[test]
    fn least_squares_singular_without_ridge_errors() {
        let mut rng = crate::rng::seeded(31);
        let col = rand_cvec(5, &mut rng);
        let a = CMat::from_cols(&[col.clone(), col]);
        let b = rand_cvec(5, &mut rng);
        assert!(matches!(
            least_squares(&a, &b, 0.0),
            Err(Error::RankDeficient(_))
        ));
        // Ridge regularization makes it solvable.
        assert!(least_squares(&a, &b, 1e-6).is_ok());
    }

    #[test]
    fn least_squares_matches_gram_inverse_oracle() {
        let mut rng = crate::rng::seeded(37);
        let a = rand_cmat(6, 3, &mut rng);
        let b = rand_cvec(6, &mut rng);
        let x = least_squares(&a, &b, 0.0).unwrap();
        let ax = matvec(&a, &x).unwrap();
        let oracle = gram_projector_apply(&a, &b);
        assert!(ax.sub(&oracle).norm() / oracle.norm() < 1e-9);
    }

    #[test]
    fn spectral_norm_identity_is_one() {
        for n in [1usize, 4, 9] {
            let s = spectral_norm(&CMat::identity(n), 200, 1e-12);
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_norm_rank_one_outer_product_is_one() {
        let mut rng = crate::rng::seeded(41);
        let u = rand_cvec(5, &mut rng);
        let v = rand_cvec(7, &mut rng);
        let un = u.scale(C64::new(1.0 / u.norm(), 0.0));
        let vn = v.scale(C64::new(1.0 / v.norm(), 0.0));
        let m = CMat::from_fn(5, 7, |i, j| un[i] * vn[j].conj());
        let s = spectral_norm(&m, 300, 1e-13);
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_zero_matrix_is_zero() {
        assert_eq!(spectral_norm(&CMat::zeros(4, 4), 100, 1e-12), 0.0);
    }

    #[test]
    fn spectral_norm_projector_difference_matches_rayleigh_oracle() {
        let mut rng = crate::rng::seeded(43);
        let n = 8;
        let u = orthonormalize(&rand_cmat(n, 3, &mut rng), DEFAULT_RANK_TOL).unwrap();
        let v = orthonormalize(&rand_cmat(n, 3, &mut rng), DEFAULT_RANK_TOL).unwrap();
        let m = outer_projector(&u).sub(&outer_projector(&v));
        let s = spectral_norm(&m, 500, 1e-13);
        assert!(s <= 1.0 + 1e-9);
        // Rayleigh oracle: random starts, textbook x <- M²x refinement, track
        // max ‖Mx‖ over all (10⁴ total) unit iterates.
        let mut best: f64 = 0.0;
        for _ in 0..100 {
            let mut x = rand_cvec(n, &mut rng);
            x = x.scale(C64::new(1.0 / x.norm(), 0.0));
            for _ in 0..100 {
                let mx = matvec(&m, &x).unwrap();
                best = best.max(mx.norm());
                let mmx = matvec(&m, &mx).unwrap();
                let nn = mmx.norm();
                if nn == 0.0 {
                    break;
                }
                x = mmx.scale(C64::new(1.0 / nn, 0.0));
            }
        }
        assert!(
            (s - best).abs() < 1e-3,
            "power {s} vs rayleigh oracle {best}"
        );
    }
}
