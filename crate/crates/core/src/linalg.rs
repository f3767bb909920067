//! Dense linear-algebra kernels: Hermitian eigendecomposition, real Pfaffians,
//! partial traces, tensor embedding and Schatten norms.
//!
//! Operators on several sites use the convention that the first site in the
//! list is the most significant digit of the flat basis index.

use nalgebra::{ComplexField, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Absolute tolerance on `|H - H^dagger|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = hermitian_deviation(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    /// Wraps an analytically Hermitian matrix, averaging away rounding noise.
    pub fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self((m + adj).scale(0.5))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| c(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvector `k` as an owned vector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

/// `SymmetricEigen` that survives the rare inputs (near-zero blocks) where
/// the default QR iteration returns NaN: first a looser convergence
/// threshold, then a diagonal shift, which leaves eigenvectors unchanged.
pub fn symmetric_eigen<T>(m: &DMatrix<T>) -> SymmetricEigen<T, Dyn>
where
    T: ComplexField<RealField = f64>,
{
    let finite = |e: &SymmetricEigen<T, Dyn>| {
        e.eigenvalues.iter().all(|x| x.is_finite()) && e.eigenvectors.iter().all(|z| z.is_finite())
    };
    for k in [1.0, 4.0, 16.0] {
        if let Some(e) = SymmetricEigen::try_new(m.clone(), k * f64::EPSILON, 0) {
            if finite(&e) {
                return e;
            }
        }
    }
    let scale = m.iter().map(|z| z.clone().modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for shift in [0.5, -0.75, 1.25] {
        let sigma = shift * scale;
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += T::from_real(sigma);
        }
        if let Some(mut e) = SymmetricEigen::try_new(shifted, f64::EPSILON, 0) {
            if finite(&e) {
                e.eigenvalues.iter_mut().for_each(|x| *x -= sigma);
                return e;
            }
        }
    }
    SymmetricEigen::new(m.clone())
}

/// Ascending eigenvalues of a matrix assumed Hermitian (no validation).
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = symmetric_eigen(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn eigvalsh_real(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = symmetric_eigen(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Full eigendecomposition with ascending eigenvalues. Each eigenvector is
/// phase-fixed so its first non-negligible component is real and positive.
pub fn eigh(h: &HermitianMatrix) -> Spectrum {
    let n = h.dim();
    if n == 0 {
        return Spectrum { eigenvalues: Vec::new(), eigenvectors: CMatrix::zeros(0, 0) };
    }
    let eig = symmetric_eigen(&h.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().find(|z| z.norm() > 1e-10).copied().unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    Spectrum { eigenvalues: values, eigenvectors: vectors }
}

/// Real antisymmetric matrix holding only its strict upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl AntisymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; dim * dim.saturating_sub(1) / 2] }
    }

    /// Builds from a dense matrix, which must satisfy `A = -A^T` exactly.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        let n = a.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            if a[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter("antisymmetric matrix has nonzero diagonal".into()));
            }
            for j in i + 1..n {
                if a[(i, j)] != -a[(j, i)] {
                    return Err(Error::InvalidParameter(format!("A[{i},{j}] != -A[{j},{i}]")));
                }
                out.set(i, j, a[(i, j)]);
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[self.offset(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.offset(j, i)],
        }
    }

    /// Sets `A[i,j] = value` and `A[j,i] = -value`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal of an antisymmetric matrix is fixed at zero");
        if i < j {
            let k = self.offset(i, j);
            self.upper[k] = value;
        } else {
            let k = self.offset(j, i);
            self.upper[k] = -value;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Principal submatrix on the given (ordered) rows/columns.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting
/// (Parlett-Reid style). The empty matrix has Pfaffian 1.
pub fn pfaffian(a: &AntisymmetricMatrix) -> Result<f64> {
    if a.dim() % 2 == 1 {
        return Err(Error::OddDimension(a.dim()));
    }
    Ok(pfaffian_dense(a.to_dense()))
}

fn pfaffian_dense(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].abs();
        for r in k + 2..n {
            if a[(r, k)].abs() > best {
                best = a[(r, k)].abs();
                kp = r;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Decomposes a flat index into per-site digits.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn check_subset(subset: &[usize], len: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSites("empty site subset".into()));
    }
    for (k, &s) in subset.iter().enumerate() {
        if s >= len {
            return Err(Error::SiteOutOfRange { index: s, len });
        }
        if subset[..k].contains(&s) {
            return Err(Error::InvalidSites(format!("site {s} repeated")));
        }
    }
    Ok(())
}

/// Operator on an ordered list of sites with the given local dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { dims, matrix })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self { dims, matrix: CMatrix::identity(d, d) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Traces out every site not listed in `keep`; the result follows the
    /// order of `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Operator> {
        check_subset(keep, self.dims.len())?;
        let n = self.dims.len();
        let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&s| self.dims[s]).collect();
        let trace_dims: Vec<usize> = traced.iter().map(|&s| self.dims[s]).collect();
        let keep_strides = strides(&keep_dims);
        let trace_strides = strides(&trace_dims);
        let dk: usize = keep_dims.iter().product();
        let dt: usize = trace_dims.iter().product();

        let total = self.matrix.nrows();
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dt];
        let mut dig = vec![0; n];
        for full in 0..total {
            digits(full, &self.dims, &mut dig);
            let ki: usize = keep.iter().zip(&keep_strides).map(|(&s, st)| dig[s] * st).sum();
            let ti: usize = traced.iter().zip(&trace_strides).map(|(&s, st)| dig[s] * st).sum();
            groups[ti].push((ki, full));
        }
        let mut out = CMatrix::zeros(dk, dk);
        for g in &groups {
            for &(a, fa) in g {
                for &(b, fb) in g {
                    out[(a, b)] += self.matrix[(fa, fb)];
                }
            }
        }
        Ok(Operator { dims: keep_dims, matrix: out })
    }

    /// Tensor product of two operators on disjoint site sets. `from_self[k]`
    /// says whether joint position `k` is taken (in order) from `self` or
    /// from `other`.
    pub fn tensor_placed(&self, other: &Operator, from_self: &[bool]) -> Operator {
        assert_eq!(from_self.len(), self.num_sites() + other.num_sites());
        let (mut ia, mut ib) = (0, 0);
        let mut dims = Vec::with_capacity(from_self.len());
        for &s in from_self {
            if s {
                dims.push(self.dims[ia]);
                ia += 1;
            } else {
                dims.push(other.dims[ib]);
                ib += 1;
            }
        }
        assert_eq!(ia, self.num_sites());
        let d: usize = dims.iter().product();
        let sa = strides(&self.dims);
        let sb = strides(&other.dims);
        let mut dig = vec![0; dims.len()];
        let split: Vec<(usize, usize)> = (0..d)
            .map(|r| {
                digits(r, &dims, &mut dig);
                let (mut a, mut b, mut ka, mut kb) = (0, 0, 0, 0);
                for (k, &s) in from_self.iter().enumerate() {
                    if s {
                        a += dig[k] * sa[ka];
                        ka += 1;
                    } else {
                        b += dig[k] * sb[kb];
                        kb += 1;
                    }
                }
                (a, b)
            })
            .collect();
        let matrix = CMatrix::from_fn(d, d, |r, s| {
            let (ar, br) = split[r];
            let (as_, bs) = split[s];
            self.matrix[(ar, as_)] * other.matrix[(br, bs)]
        });
        Operator { dims, matrix }
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.matrix - &other.matrix).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Density matrix: Hermitian, positive semidefinite and of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let h = HermitianMatrix::new(op.matrix.clone())?;
        let trace = h.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let min = h.eigenvalues().first().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self(op))
    }

    /// Builds `|psi><psi|` for a normalized pure state.
    pub fn from_pure(amplitudes: &[C64], dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amplitudes.len() });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        let m = CMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self(Operator { dims, matrix: m }))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn dims(&self) -> &[usize] {
        self.0.dims()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.0.matrix.clone())
    }

    pub fn spectrum(&self) -> Spectrum {
        eigh(&self.hermitian())
    }
}

/// Reduced state of the sites in `keep`, ordered as listed.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix(rho.0.partial_trace(keep)?))
}

/// Reduced density matrix of a pure state without forming `|psi><psi|`.
pub fn reduced_from_pure(amplitudes: &[C64], dims: &[usize], keep: &[usize]) -> Result<Operator> {
    check_subset(keep, dims.len())?;
    let total: usize = dims.iter().product();
    if amplitudes.len() != total {
        return Err(Error::DimensionMismatch { expected: total, found: amplitudes.len() });
    }
    let n = dims.len();
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
    let trace_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let ks = strides(&keep_dims);
    let ts = strides(&trace_dims);
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();
    // psi reshaped as a dk x dt matrix
    let mut m = CMatrix::zeros(dk, dt);
    let mut dig = vec![0; n];
    for (full, amp) in amplitudes.iter().enumerate() {
        digits(full, dims, &mut dig);
        let ki: usize = keep.iter().zip(&ks).map(|(&s, st)| dig[s] * st).sum();
        let ti: usize = traced.iter().zip(&ts).map(|(&s, st)| dig[s] * st).sum();
        m[(ki, ti)] = *amp;
    }
    let rho = &m * m.adjoint();
    Operator::new(keep_dims, rho)
}

/// Places `op` (acting on the joint sites `subset`, in that order) into the
/// joint space, with identities elsewhere.
pub fn embed(op: &CMatrix, subset: &[usize], joint_dims: &[usize]) -> Result<CMatrix> {
    check_subset(subset, joint_dims.len())?;
    let sub_dims: Vec<usize> = subset.iter().map(|&s| joint_dims[s]).collect();
    let d_sub: usize = sub_dims.iter().product();
    if op.nrows() != d_sub || op.ncols() != d_sub {
        return Err(Error::DimensionMismatch { expected: d_sub, found: op.nrows() });
    }
    let rest: Vec<usize> = (0..joint_dims.len()).filter(|s| !subset.contains(s)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&s| joint_dims[s]).collect();
    let total: usize = joint_dims.iter().product();
    let ss = strides(&sub_dims);
    let rs = strides(&rest_dims);
    let mut dig = vec![0; joint_dims.len()];
    let split: Vec<(usize, usize)> = (0..total)
        .map(|i| {
            digits(i, joint_dims, &mut dig);
            let a: usize = subset.iter().zip(&ss).map(|(&s, st)| dig[s] * st).sum();
            let b: usize = rest.iter().zip(&rs).map(|(&s, st)| dig[s] * st).sum();
            (a, b)
        })
        .collect();
    Ok(CMatrix::from_fn(total, total, |i, j| {
        let (ai, bi) = split[i];
        let (aj, bj) = split[j];
        if bi == bj {
            op[(ai, aj)]
        } else {
            ZERO
        }
    }))
}

/// Schatten p-norm from eigenvalues; `p = f64::INFINITY` gives the largest
/// magnitude.
pub fn schatten_from_eigenvalues(eigenvalues: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidNormOrder(p));
    }
    if p.is_infinite() {
        return Ok(eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    if p == 1.0 {
        return Ok(eigenvalues.iter().map(|x| x.abs()).sum());
    }
    if p == 2.0 {
        return Ok(eigenvalues.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    Ok(eigenvalues.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

pub fn schatten_norm(a: &HermitianMatrix, p: f64) -> Result<f64> {
    schatten_from_eigenvalues(&a.eigenvalues(), p)
}

/// Tensor power of a single-site matrix.
pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    mats.into_iter().fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn approx_mat(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn eigh_of_paulis() {
        let id = HermitianMatrix::new(CMatrix::identity(2, 2)).unwrap();
        assert_eq!(eigh(&id).eigenvalues, vec![1.0, 1.0]);

        let z = eigh(&HermitianMatrix::new(pauli_z()).unwrap());
        assert_relative_eq!(z.eigenvalues[0], -1.0);
        assert_relative_eq!(z.eigenvalues[1], 1.0);

        let x = eigh(&HermitianMatrix::new(pauli_x()).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(x.eigenvalues[0], -1.0, epsilon = 1e-14);
        // phase fixed: first component real-positive
        assert!((x.eigenvectors[(0, 0)] - c(s, 0.0)).norm() < 1e-12);
        assert!((x.eigenvectors[(1, 0)] - c(-s, 0.0)).norm() < 1e-12);
        assert!((x.eigenvectors[(0, 1)] - c(s, 0.0)).norm() < 1e-12);
        assert!((x.eigenvectors[(1, 1)] - c(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = pauli_x();
        m[(0, 1)] = c(1.0, 1e-9);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn pfaffian_small_cases() {
        assert_eq!(pfaffian(&AntisymmetricMatrix::zeros(0)).unwrap(), 1.0);
        let mut a = AntisymmetricMatrix::zeros(2);
        a.set(0, 1, 2.5);
        assert_eq!(pfaffian(&a).unwrap(), 2.5);

        let mut b = AntisymmetricMatrix::zeros(4);
        let v = [(0, 1, 1.3), (0, 2, -0.7), (0, 3, 2.1), (1, 2, 0.4), (1, 3, -1.9), (2, 3, 0.6)];
        for &(i, j, x) in &v {
            b.set(i, j, x);
        }
        let expected = 1.3 * 0.6 - (-0.7) * (-1.9) + 2.1 * 0.4;
        assert_relative_eq!(pfaffian(&b).unwrap(), expected, epsilon = 1e-14);

        assert!(matches!(pfaffian(&AntisymmetricMatrix::zeros(3)), Err(Error::OddDimension(3))));
    }

    #[test]
    fn antisymmetric_storage() {
        let mut a = AntisymmetricMatrix::zeros(5);
        a.set(3, 1, 0.25);
        assert_eq!(a.get(1, 3), -0.25);
        assert_eq!(a.get(3, 1), 0.25);
        let d = a.to_dense();
        assert_eq!(d.clone() + d.transpose(), DMatrix::zeros(5, 5));
        assert_eq!(AntisymmetricMatrix::from_dense(&d).unwrap(), a);
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let rho = DensityMatrix::from_pure(&bell, vec![2, 2]).unwrap();
        let r1 = partial_trace(&rho, &[1]).unwrap();
        assert!(approx_mat(r1.matrix(), &CMatrix::identity(2, 2).scale(0.5), 1e-15));

        // GHZ3 keep two qubits
        let mut ghz = vec![ZERO; 8];
        ghz[0] = c(s, 0.0);
        ghz[7] = c(s, 0.0);
        let rho = DensityMatrix::from_pure(&ghz, vec![2, 2, 2]).unwrap();
        let r = partial_trace(&rho, &[0, 2]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(approx_mat(r.matrix(), &expected, 1e-15));
        let r2 = reduced_from_pure(&ghz, &[2, 2, 2], &[0, 2]).unwrap();
        assert!(approx_mat(r2.matrix(), &expected, 1e-15));
    }

    #[test]
    fn partial_trace_of_product_and_order() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMatrix::from_row_slice(
            3,
            3,
            &[c(0.5, 0.0), ZERO, c(0.1, 0.0), ZERO, c(0.2, 0.0), ZERO, c(0.1, 0.0), ZERO, c(0.3, 0.0)],
        );
        let rho = DensityMatrix::new(Operator::new(vec![2, 3], kron(&a, &b)).unwrap()).unwrap();
        assert!(approx_mat(partial_trace(&rho, &[0]).unwrap().matrix(), &a, 1e-15));
        assert!(approx_mat(partial_trace(&rho, &[1]).unwrap().matrix(), &b, 1e-15));
        let swapped = partial_trace(&rho, &[1, 0]).unwrap();
        assert!(approx_mat(swapped.matrix(), &kron(&b, &a), 1e-15));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn embed_examples() {
        let z1 = embed(&pauli_z(), &[0], &[2, 2]).unwrap();
        assert_eq!(z1, kron(&pauli_z(), &CMatrix::identity(2, 2)));
        let id = embed(&CMatrix::identity(4, 4), &[2, 0], &[2, 3, 2]).unwrap();
        assert_eq!(id, CMatrix::identity(12, 12));
        let a = pauli_x();
        let b = pauli_y();
        let prod = embed(&a, &[0], &[2, 2]).unwrap() * embed(&b, &[1], &[2, 2]).unwrap();
        assert!(approx_mat(&prod, &kron(&a, &b), 1e-15));
        assert!(matches!(embed(&a, &[0], &[3, 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tensor_placed_matches_embed_products() {
        let a = Operator::new(vec![2], pauli_x()).unwrap();
        let bz = kron(&pauli_z(), &pauli_y());
        let b = Operator::new(vec![2, 2], bz.clone()).unwrap();
        // joint order: b0, a, b1
        let t = a.tensor_placed(&b, &[false, true, false]);
        let expected = embed(&pauli_x(), &[1], &[2, 2, 2]).unwrap() * embed(&bz, &[0, 2], &[2, 2, 2]).unwrap();
        assert!(approx_mat(t.matrix(), &expected, 1e-15));
    }

    #[test]
    fn schatten_examples() {
        let z = HermitianMatrix::new(pauli_z()).unwrap();
        assert_relative_eq!(schatten_norm(&z, 1.0).unwrap(), 2.0);
        assert_relative_eq!(schatten_norm(&z, 2.0).unwrap(), 2f64.sqrt());
        assert_relative_eq!(schatten_norm(&z, f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(schatten_norm(&z, 3.0).unwrap(), 2f64.powf(1.0 / 3.0), epsilon = 1e-14);
        assert!(matches!(schatten_norm(&z, 0.5), Err(Error::InvalidNormOrder(_))));
    }

    #[test]
    fn density_matrix_validation() {
        let bad = Operator::new(vec![2], CMatrix::identity(2, 2)).unwrap();
        assert!(matches!(DensityMatrix::new(bad), Err(Error::BadTrace { .. })));
        let neg =
            Operator::new(vec![2], CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)])).unwrap();
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPositive { .. })));
    }
}
