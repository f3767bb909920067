//! Periodic 1-D Bose-Hubbard chain
//!
//! ```text
//! H = -J sum_i (b_i^dag b_{i+1} + h.c.) + 1/2 sum_i n_i (n_i - 1)
//! ```
//!
//! by exact diagonalization in the zero-momentum sector, reduced density
//! matrices stored as boson-number blocks, and the strong-coupling and
//! ideal-gas closed forms used as overlays.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::cumulants::{corr_spectrum, correlated_from_joint, LocalOperator, SiteTuple};
use crate::error::{Error, Result};
use crate::lanczos::{fix_sign, lowest_eigenpair, LanczosOptions};
use crate::linalg::{c, eigvalsh_real, symmetric_eigen, Operator};
use crate::sweep::{SweepRow, SweepTable};

/// Largest Fock basis accepted.
pub const BASIS_BUDGET: usize = 10_000_000;
/// Sectors up to this size are diagonalized densely.
pub const DENSE_SECTOR_MAX: usize = 1500;
/// Product pieces and blocks with Frobenius norm below this are dropped;
/// the one-norm changes by at most `sqrt(dim) * NEGLIGIBLE` per block.
pub const NEGLIGIBLE: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoseParams {
    pub particles: usize,
    pub sites: usize,
    pub j: f64,
}

impl BoseParams {
    pub fn new(particles: usize, sites: usize, j: f64) -> Result<Self> {
        if particles == 0 || sites == 0 {
            return Err(Error::InvalidParameter("N and L must be positive".into()));
        }
        if !(j >= 0.0 && j.is_finite()) {
            return Err(Error::InvalidParameter(format!("J must be finite and >= 0, got {j}")));
        }
        Ok(Self { particles, sites, j })
    }

    pub fn filling(&self) -> f64 {
        self.particles as f64 / self.sites as f64
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of occupation vectors of `n` bosons on `l` sites.
pub fn fock_dimension(n: usize, l: usize) -> f64 {
    binomial(n + l - 1, n)
}

/// Occupation vectors in lexicographic order, each encoded as base-(N+1)
/// digits with site 0 most significant, plus zero-momentum orbits.
#[derive(Clone, Debug)]
pub struct FockBasis {
    pub particles: usize,
    pub sites: usize,
    codes: Vec<u64>,
    /// Sector index of each state's orbit.
    orbit_of: Vec<u32>,
    /// Full-basis index of each orbit's smallest member.
    reps: Vec<u32>,
    orbit_size: Vec<u16>,
}

impl FockBasis {
    pub fn build(particles: usize, sites: usize) -> Result<Self> {
        let dim = fock_dimension(particles, sites);
        if dim > BASIS_BUDGET as f64 {
            return Err(Error::DimensionBudget { dimension: dim as usize, budget: BASIS_BUDGET });
        }
        if ((particles + 1) as f64).powi(sites as i32) >= u64::MAX as f64 {
            return Err(Error::InvalidParameter("occupation codes overflow 64 bits".into()));
        }
        let base = particles as u64 + 1;
        let mut codes = Vec::with_capacity(dim as usize);
        fn rec(site: usize, left: usize, code: u64, base: u64, sites: usize, out: &mut Vec<u64>) {
            if site + 1 == sites {
                out.push(code * base + left as u64);
                return;
            }
            for k in 0..=left {
                rec(site + 1, left - k, code * base + k as u64, base, sites, out);
            }
        }
        rec(0, particles, 0, base, sites, &mut codes);

        let top = base.pow(sites as u32 - 1);
        let rotate = |x: u64| (x % top) * base + x / top;
        let mut orbit_of = vec![u32::MAX; codes.len()];
        let mut reps = Vec::new();
        let mut orbit_size = Vec::new();
        for i in 0..codes.len() {
            if orbit_of[i] != u32::MAX {
                continue;
            }
            // codes are ascending, so the first unvisited member is the orbit minimum
            let sector = reps.len() as u32;
            reps.push(i as u32);
            let mut x = codes[i];
            let mut size = 0u16;
            loop {
                let k = codes.binary_search(&x).expect("rotation stays in basis");
                if orbit_of[k] == sector {
                    break;
                }
                orbit_of[k] = sector;
                size += 1;
                x = rotate(x);
            }
            orbit_size.push(size);
        }
        Ok(Self { particles, sites, codes, orbit_of, reps, orbit_size })
    }

    pub fn dim(&self) -> usize {
        self.codes.len()
    }

    pub fn sector_dim(&self) -> usize {
        self.reps.len()
    }

    pub fn base(&self) -> u64 {
        self.particles as u64 + 1
    }

    pub fn code(&self, index: usize) -> u64 {
        self.codes[index]
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.codes.binary_search(&code).ok()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        decode(self.codes[index], self.base(), self.sites)
    }

    pub fn representative(&self, sector: usize) -> usize {
        self.reps[sector] as usize
    }

    pub fn orbit_size(&self, sector: usize) -> usize {
        self.orbit_size[sector] as usize
    }
}

fn decode(mut code: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % base) as usize;
        code /= base;
    }
    out
}

/// Zero-momentum Hamiltonian split as `diag + J * hop`, hop stored as CSR.
#[derive(Clone, Debug)]
pub struct BoseSystem {
    pub basis: FockBasis,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl BoseSystem {
    pub fn new(particles: usize, sites: usize) -> Result<Self> {
        let basis = FockBasis::build(particles, sites)?;
        let base = basis.base();
        let pow: Vec<u64> = (0..sites).map(|i| base.pow((sites - 1 - i) as u32)).collect();
        let ns = basis.sector_dim();
        let mut diag = Vec::with_capacity(ns);
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(u32, f64)> = Vec::new();
        for r in 0..ns {
            let idx = basis.representative(r);
            let occ = basis.occupations(idx);
            let code = basis.code(idx);
            diag.push(occ.iter().map(|&n| 0.5 * (n * n.saturating_sub(1)) as f64).sum());
            row.clear();
            let sr = basis.orbit_size(r) as f64;
            for i in 0..sites {
                let k = (i + 1) % sites;
                // b_i^dag b_k and b_k^dag b_i
                for (to, from) in [(i, k), (k, i)] {
                    if to == from || occ[from] == 0 {
                        continue;
                    }
                    let amp = (((occ[to] + 1) * occ[from]) as f64).sqrt();
                    let target = code + pow[to] - pow[from];
                    let t = basis.index_of(target).expect("hop stays in basis");
                    let sector = basis.orbit_of[t];
                    let sc = basis.orbit_size(sector as usize) as f64;
                    row.push((sector, -amp * (sr / sc).sqrt()));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for &(col, v) in &row {
                if last == Some(col) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(col);
                    vals.push(v);
                    last = Some(col);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { basis, diag, row_ptr, cols, vals })
    }

    pub fn particles(&self) -> usize {
        self.basis.particles
    }

    pub fn sites(&self) -> usize {
        self.basis.sites
    }

    fn apply(&self, j: f64, x: &[f64], y: &mut [f64]) {
        let row = |r: usize| -> f64 {
            let mut acc = self.diag[r] * x[r];
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += j * self.vals[p] * x[self.cols[p] as usize];
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
        #[cfg(not(feature = "parallel"))]
        for (r, out) in y.iter_mut().enumerate() {
            *out = row(r);
        }
    }

    fn dense(&self, j: f64) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for r in 0..n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                h[(r, self.cols[p] as usize)] += j * self.vals[p];
            }
        }
        h
    }

    /// Ground state at hopping `j`, expanded to the full Fock basis.
    pub fn ground_state(&self, j: f64) -> Result<BoseGroundState> {
        let ns = self.diag.len();
        let (energy, mut v, residual) = if ns <= DENSE_SECTOR_MAX {
            let eig = symmetric_eigen(&self.dense(j));
            let (k, &e) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            (e, eig.eigenvectors.column(k).iter().copied().collect::<Vec<f64>>(), 0.0)
        } else {
            // |E| <= 2JN + N^2/2, so this relative tolerance keeps |Hv - Ev| below 1e-10
            let n = self.particles() as f64;
            let scale = (2.0 * j * n + 0.5 * n * n).max(1.0);
            let gs = lowest_eigenpair(
                ns,
                |x, y| self.apply(j, x, y),
                LanczosOptions { tol: 1e-10 / scale, ..Default::default() },
            )?;
            (gs.energy, gs.vector, gs.residual)
        };
        fix_sign(&mut v);
        let mut amplitudes = vec![0.0; self.basis.dim()];
        for (i, a) in amplitudes.iter_mut().enumerate() {
            let s = self.basis.orbit_of[i] as usize;
            *a = v[s] / (self.basis.orbit_size(s) as f64).sqrt();
        }
        Ok(BoseGroundState {
            j,
            energy,
            residual,
            particles: self.particles(),
            sites: self.sites(),
            amplitudes,
            codes: self.basis.codes.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct BoseGroundState {
    pub j: f64,
    pub energy: f64,
    pub residual: f64,
    pub particles: usize,
    pub sites: usize,
    /// Real amplitudes over the full Fock basis (lexicographic order).
    pub amplitudes: Vec<f64>,
    codes: Vec<u64>,
}

impl BoseGroundState {
    /// Builds a state from explicit amplitudes over the lexicographic Fock basis.
    pub fn from_amplitudes(basis: &FockBasis, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        Ok(Self {
            j: f64::NAN,
            energy: f64::NAN,
            residual: 0.0,
            particles: basis.particles,
            sites: basis.sites,
            amplitudes,
            codes: basis.codes.clone(),
        })
    }

    /// Reduced density matrix of `sites`, accumulated per boson-number block.
    pub fn rdm(&self, sites: &SiteTuple) -> Result<BoseRdm> {
        if sites.last() >= self.sites {
            return Err(Error::SiteOutOfRange { index: sites.last(), len: self.sites });
        }
        let q = sites.len();
        let base = self.particles as u64 + 1;
        let basis = block_basis(q, self.particles);
        let pow: Vec<u64> = (0..self.sites).map(|i| base.pow((self.sites - 1 - i) as u32)).collect();
        let mut entries: Vec<(u64, u64, f64)> = Vec::with_capacity(self.amplitudes.len());
        for (&code, &a) in self.codes.iter().zip(&self.amplitudes) {
            if a == 0.0 {
                continue;
            }
            let mut local = 0u64;
            let mut rest = code;
            for &s in sites.sites() {
                let digit = (code / pow[s]) % base;
                local = local * base + digit;
                rest -= digit * pow[s];
            }
            entries.push((rest, local, a));
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut op = BlockOp::zeros(basis.clone());
        let mut start = 0;
        while start < entries.len() {
            let mut end = start;
            while end < entries.len() && entries[end].0 == entries[start].0 {
                end += 1;
            }
            let group = &entries[start..end];
            let (n, _) = basis.index[&group[0].1];
            let pos: Vec<usize> = group.iter().map(|e| basis.index[&e.1].1).collect();
            let block = op.block_mut(n);
            for (x, &px) in group.iter().zip(&pos) {
                for (y, &py) in group.iter().zip(&pos) {
                    block[(px, py)] += x.2 * y.2;
                }
            }
            start = end;
        }
        Ok(BoseRdm { sites: sites.clone(), particles: self.particles, op })
    }
}

/// Occupation tuples of `q` sites with at most `nmax` bosons each, grouped by total.
#[derive(Debug)]
pub struct BlockBasis {
    pub q: usize,
    pub nmax: usize,
    /// `tuples[n]` lists codes (base `nmax + 1`) of tuples with total `n`.
    pub tuples: Vec<Vec<u64>>,
    /// Code -> (total, position within its block).
    pub index: HashMap<u64, (usize, usize)>,
}

impl BlockBasis {
    fn new(q: usize, nmax: usize) -> Self {
        let base = nmax as u64 + 1;
        let mut tuples = vec![Vec::new(); q * nmax + 1];
        let total = base.pow(q as u32);
        for code in 0..total {
            let n: usize = decode(code, base, q).iter().sum();
            tuples[n].push(code);
        }
        let mut index = HashMap::new();
        for (n, block) in tuples.iter().enumerate() {
            for (k, &code) in block.iter().enumerate() {
                index.insert(code, (n, k));
            }
        }
        Self { q, nmax, tuples, index }
    }

    pub fn base(&self) -> u64 {
        self.nmax as u64 + 1
    }

    pub fn block_dim(&self, n: usize) -> usize {
        self.tuples[n].len()
    }
}

/// Shared basis tables keyed by `(q, nmax)`.
pub fn block_basis(q: usize, nmax: usize) -> Arc<BlockBasis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BlockBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry((q, nmax)).or_insert_with(|| Arc::new(BlockBasis::new(q, nmax))).clone()
}

/// Real symmetric operator on `q` bosonic sites, block diagonal in the total
/// boson number. Missing blocks are zero.
#[derive(Clone, Debug)]
pub struct BlockOp {
    basis: Arc<BlockBasis>,
    blocks: Vec<Option<DMatrix<f64>>>,
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl BlockOp {
    pub fn zeros(basis: Arc<BlockBasis>) -> Self {
        let n = basis.tuples.len();
        Self { basis, blocks: vec![None; n] }
    }

    pub fn basis(&self) -> &Arc<BlockBasis> {
        &self.basis
    }

    pub fn block(&self, n: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(n).and_then(|b| b.as_ref())
    }

    pub fn block_mut(&mut self, n: usize) -> &mut DMatrix<f64> {
        let d = self.basis.block_dim(n);
        self.blocks[n].get_or_insert_with(|| DMatrix::zeros(d, d))
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Dense matrix over the product basis, site 0 most significant.
    pub fn to_dense(&self) -> Operator {
        let base = self.basis.base() as usize;
        let dim = base.pow(self.basis.q as u32);
        let mut m = crate::linalg::CMatrix::zeros(dim, dim);
        for (n, b) in self.blocks.iter().enumerate() {
            if let Some(b) = b {
                let t = &self.basis.tuples[n];
                for (i, &ci) in t.iter().enumerate() {
                    for (k, &ck) in t.iter().enumerate() {
                        m[(ci as usize, ck as usize)] = c(b[(i, k)], 0.0);
                    }
                }
            }
        }
        Operator::new(vec![base; self.basis.q], m).expect("square by construction")
    }

    /// Block form of a dense real operator; off-block entries must vanish.
    pub fn from_dense(op: &Operator, nmax: usize) -> Result<Self> {
        let q = op.num_sites();
        if op.dims().iter().any(|&d| d != nmax + 1) {
            return Err(Error::DimensionMismatch { expected: nmax + 1, found: op.dims()[0] });
        }
        let basis = block_basis(q, nmax);
        let mut out = Self::zeros(basis.clone());
        let m = op.matrix();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let v = m[(r, col)];
                if v.norm() == 0.0 {
                    continue;
                }
                let (nr, pr) = basis.index[&(r as u64)];
                let (nc, pc) = basis.index[&(col as u64)];
                if nr != nc {
                    return Err(Error::InvalidParameter("operator does not conserve boson number".into()));
                }
                out.block_mut(nr)[(pr, pc)] = v.re;
            }
        }
        Ok(out)
    }
}

fn digits_of(code: u64, base: u64, q: usize) -> Vec<u64> {
    decode(code, base, q).into_iter().map(|d| d as u64).collect()
}

impl LocalOperator for BlockOp {
    fn num_sites(&self) -> usize {
        self.basis.q
    }

    fn tensor_placed(&self, other: &Self, from_self: &[bool]) -> Self {
        assert_eq!(self.basis.nmax, other.basis.nmax, "mismatched occupation cutoffs");
        let q = from_self.len();
        let basis = block_basis(q, self.basis.nmax);
        let base = basis.base();
        let mut out = Self::zeros(basis.clone());
        let join = |ca: u64, cb: u64| -> u64 {
            let da = digits_of(ca, base, self.basis.q);
            let db = digits_of(cb, base, other.basis.q);
            let (mut ia, mut ib) = (0, 0);
            let mut code = 0u64;
            for &s in from_self {
                let d = if s {
                    ia += 1;
                    da[ia - 1]
                } else {
                    ib += 1;
                    db[ib - 1]
                };
                code = code * base + d;
            }
            code
        };
        for (na, a) in self.blocks.iter().enumerate() {
            let Some(a) = a else { continue };
            let fa = frobenius(a);
            for (nb, b) in other.blocks.iter().enumerate() {
                let Some(b) = b else { continue };
                if fa * frobenius(b) < NEGLIGIBLE {
                    continue;
                }
                let ta = &self.basis.tuples[na];
                let tb = &other.basis.tuples[nb];
                let n = na + nb;
                let pos: Vec<usize> = ta
                    .iter()
                    .flat_map(|&x| tb.iter().map(move |&y| (x, y)))
                    .map(|(x, y)| basis.index[&join(x, y)].1)
                    .collect();
                let dbn = tb.len();
                let target = out.block_mut(n);
                for ia in 0..ta.len() {
                    for ja in 0..ta.len() {
                        let x = a[(ia, ja)];
                        if x == 0.0 {
                            continue;
                        }
                        for ib in 0..dbn {
                            let r = pos[ia * dbn + ib];
                            for jb in 0..dbn {
                                target[(r, pos[ja * dbn + jb])] += x * b[(ib, jb)];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn sub_assign(&mut self, other: &Self) {
        for (n, b) in other.blocks.iter().enumerate() {
            if let Some(b) = b {
                *self.block_mut(n) -= b;
            }
        }
    }

    fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let q = self.basis.q;
        if keep.iter().any(|&k| k >= q) || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSites(format!("bad keep list {keep:?} for {q} sites")));
        }
        let base = self.basis.base();
        let kb = block_basis(keep.len(), self.basis.nmax);
        let mut out = Self::zeros(kb.clone());
        for (n, block) in self.blocks.iter().enumerate() {
            let Some(block) = block else { continue };
            let mut groups: BTreeMap<u64, Vec<(usize, usize, usize)>> = BTreeMap::new();
            for (i, &code) in self.basis.tuples[n].iter().enumerate() {
                let d = digits_of(code, base, q);
                let (mut kept, mut traced) = (0u64, 0u64);
                for (k, &x) in d.iter().enumerate() {
                    if keep.contains(&k) {
                        kept = kept * base + x;
                    } else {
                        traced = traced * base + x;
                    }
                }
                let (nk, pk) = kb.index[&kept];
                groups.entry(traced).or_default().push((i, nk, pk));
            }
            for members in groups.values() {
                let nk = members[0].1;
                let target = out.block_mut(nk);
                for &(i, _, pi) in members {
                    for &(k, _, pk) in members {
                        target[(pi, pk)] += block[(i, k)];
                    }
                }
            }
        }
        Ok(out)
    }

    fn trace(&self) -> f64 {
        self.blocks.iter().flatten().map(|b| b.trace()).sum()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (n, b) in self.blocks.iter().enumerate() {
            let d = self.basis.block_dim(n);
            match b {
                Some(b) if frobenius(b) >= NEGLIGIBLE => {
                    let sym = (b + b.transpose()) * 0.5;
                    out.extend(eigvalsh_real(&sym));
                }
                _ => out.extend(std::iter::repeat_n(0.0, d)),
            }
        }
        out
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for n in 0..self.blocks.len().max(other.blocks.len()) {
            let a = self.blocks.get(n).and_then(|x| x.as_ref());
            let b = other.blocks.get(n).and_then(|x| x.as_ref());
            let d = match (a, b) {
                (Some(a), Some(b)) => (a - b).amax(),
                (Some(a), None) | (None, Some(a)) => a.amax(),
                (None, None) => 0.0,
            };
            m = m.max(d);
        }
        m
    }
}

/// Reduced density matrix of a Bose-Hubbard ground state.
#[derive(Clone, Debug)]
pub struct BoseRdm {
    pub sites: SiteTuple,
    pub particles: usize,
    pub op: BlockOp,
}

impl BoseRdm {
    /// Block of total occupation `n_b` (zero matrix when absent), `n_b <= N`.
    pub fn block(&self, n_b: usize) -> DMatrix<f64> {
        let d = self.op.basis.block_dim(n_b);
        self.op.block(n_b).cloned().unwrap_or_else(|| DMatrix::zeros(d, d))
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    /// Mean occupation of the first site.
    pub fn mean_occupation(&self, site: usize) -> Result<f64> {
        let one = self.op.partial_trace(&[site])?;
        Ok((0..one.num_blocks()).map(|n| one.block(n).map_or(0.0, |b| n as f64 * b.trace())).sum())
    }

    pub fn correlated(&self) -> Result<crate::cumulants::CorrelatedRdm<BlockOp>> {
        correlated_from_joint(&self.sites, &self.op)
    }
}

/// Leading-order strong-coupling cases with closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrongCouplingCase {
    /// Two neighbouring sites.
    Q2D1,
    /// Two sites at distance two.
    Q2D2,
    /// Three consecutive sites.
    Q3D11,
}

impl StrongCouplingCase {
    pub fn for_tuple(sites: &SiteTuple) -> Option<Self> {
        match sites.distances().as_slice() {
            [1] => Some(Self::Q2D1),
            [2] => Some(Self::Q2D2),
            [1, 1] => Some(Self::Q3D11),
            _ => None,
        }
    }

    pub fn order(self) -> i32 {
        match self {
            Self::Q2D1 => 1,
            Self::Q2D2 | Self::Q3D11 => 2,
        }
    }
}

/// Nonvanishing cumulant eigenvalues to leading order in `J` at integer filling `n`.
pub fn strong_coupling_eigs(n: usize, j: f64, case: StrongCouplingCase) -> Vec<f64> {
    let n = n as f64;
    let m = n * (n + 1.0);
    let pm = |x: f64| [x, -x];
    let mut out = Vec::new();
    match case {
        StrongCouplingCase::Q2D1 => out.extend(pm((2.0 * m).sqrt() * j)),
        StrongCouplingCase::Q2D2 => {
            out.extend(pm(m * j * j));
            out.extend(pm(m * j * j));
            out.extend(pm((2.0 * n + 1.0) * (2.0 * m).sqrt() * j * j));
        }
        StrongCouplingCase::Q3D11 => {
            out.extend(pm(2.0 * m * j * j));
            out.extend(pm(m * j * j));
            out.extend(pm(m * j * j));
            out.extend(pm(2.0 / 3.0 * (m * (2.0 * m - 1.0)).sqrt() * j * j));
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Closed-form cumulant norms for `p` in {1, 2}.
pub fn strong_coupling_norm(n: usize, j: f64, case: StrongCouplingCase, p: f64) -> Result<f64> {
    let nf = n as f64;
    let m = nf * (nf + 1.0);
    let j2 = j * j;
    let v = match (case, p) {
        (StrongCouplingCase::Q2D1, p) if p == 1.0 => 2.0 * (2.0 * m).sqrt() * j,
        (StrongCouplingCase::Q2D1, p) if p == 2.0 => 2.0 * m.sqrt() * j,
        (StrongCouplingCase::Q2D2, p) if p == 1.0 => 2.0 * (2.0 * m + (2.0 * nf + 1.0) * (2.0 * m).sqrt()) * j2,
        (StrongCouplingCase::Q2D2, p) if p == 2.0 => 2.0 * (m * (5.0 * nf * nf + 5.0 * nf + 1.0)).sqrt() * j2,
        (StrongCouplingCase::Q3D11, p) if p == 1.0 => (8.0 * m + 4.0 / 3.0 * (m * (2.0 * m - 1.0)).sqrt()) * j2,
        (StrongCouplingCase::Q3D11, p) if p == 2.0 => 2.0 / 3.0 * (m * (31.0 * m - 2.0)).sqrt() * j2,
        _ => return Err(Error::InvalidParameter(format!("no strong-coupling form for {case:?} with p = {p}"))),
    };
    Ok(v)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Reduced state of `q` sites when all `N` bosons occupy the zero-momentum
/// orbital of `L` sites.
pub fn ideal_gas_rdm(particles: usize, sites: usize, q: usize) -> Result<BoseRdm> {
    if q == 0 || q > sites || q > SiteTuple::MAX_SITES {
        return Err(Error::InvalidSites(format!("q = {q} on {sites} sites")));
    }
    let basis = block_basis(q, particles);
    let base = basis.base();
    let mut op = BlockOp::zeros(basis.clone());
    let (l, nn) = (sites as f64, particles);
    for nb in 0..=particles {
        let tuples = &basis.tuples[nb];
        let lw = |code: u64| {
            let s: f64 = decode(code, base, q).iter().map(|&x| ln_factorial(x)).sum();
            0.5 * (ln_factorial(nb) - s)
        };
        let weights: Vec<f64> = tuples.iter().map(|&t| lw(t)).collect();
        let outside = (1.0 - q as f64 / l).max(0.0);
        if outside == 0.0 && nb != nn {
            continue;
        }
        let outside_ln = if nb == nn { 0.0 } else { (nn - nb) as f64 * outside.ln() };
        let prefactor = ln_factorial(nn) - ln_factorial(nn - nb) - ln_factorial(nb) + outside_ln - nb as f64 * l.ln();
        let block = op.block_mut(nb);
        for (i, wi) in weights.iter().enumerate() {
            for (k, wk) in weights.iter().enumerate() {
                block[(i, k)] = (prefactor + wi + wk).exp();
            }
        }
    }
    Ok(BoseRdm { sites: SiteTuple::contiguous(q)?, particles, op })
}

/// Modified Bessel function `I_0` from its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= y / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Thermodynamic-limit two-norms of the ideal-gas cumulants at mean occupation `filling`.
pub fn ideal_gas_norm2_thermo(filling: f64, q: usize) -> Result<f64> {
    let i0 = bessel_i0;
    let n = filling;
    match q {
        2 => Ok((i0(4.0 * n) - i0(2.0 * n).powi(2)).sqrt() * (-2.0 * n).exp()),
        3 => Ok((i0(6.0 * n) - 3.0 * i0(2.0 * n) * i0(4.0 * n) + 2.0 * i0(2.0 * n).powi(3)).sqrt() * (-3.0 * n).exp()),
        _ => Err(Error::InvalidParameter(format!("thermodynamic ideal-gas norm defined for q = 2, 3, got {q}"))),
    }
}

/// All-bosons-in-one-orbital state over the lexicographic Fock basis.
pub fn ideal_gas_state(basis: &FockBasis) -> BoseGroundState {
    let (n, l) = (basis.particles, basis.sites as f64);
    let amps = (0..basis.dim())
        .map(|i| {
            let s: f64 = basis.occupations(i).iter().map(|&x| ln_factorial(x)).sum();
            (0.5 * (ln_factorial(n) - s) - 0.5 * n as f64 * l.ln()).exp()
        })
        .collect();
    BoseGroundState::from_amplitudes(basis, amps).expect("matching dimension")
}

#[derive(Clone, Debug)]
pub struct BoseSweepConfig {
    pub particles: usize,
    pub sites: usize,
    pub js: Vec<f64>,
    pub tuples: Vec<SiteTuple>,
    pub norm_orders: Vec<f64>,
    pub spectra: bool,
    /// Adds strong-coupling and ideal-gas rows next to the ED values.
    pub overlays: bool,
}

fn norm_name(prefix: &str, p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{prefix}{}", p as i64)
    } else {
        format!("{prefix}{p}")
    }
}

/// Cumulant norms and spectra of a ground state for each tuple.
pub fn bose_point_rows(gs: &BoseGroundState, cfg: &BoseSweepConfig) -> Result<Vec<SweepRow>> {
    let j = gs.j;
    let mut rows = Vec::new();
    let integer_filling = gs.particles.is_multiple_of(gs.sites).then(|| gs.particles / gs.sites);
    for tuple in &cfg.tuples {
        let rdm = gs.rdm(tuple)?;
        let corr = rdm.correlated()?;
        let (q, d) = (tuple.len(), tuple.distances());
        for &p in &cfg.norm_orders {
            rows.push(SweepRow::new(j, norm_name("corr_norm", p), q, &d, corr.norm(p)?));
            if cfg.overlays {
                if let (Some(n), Some(case)) = (integer_filling, StrongCouplingCase::for_tuple(tuple)) {
                    if let Ok(v) = strong_coupling_norm(n, j, case, p) {
                        rows.push(SweepRow::new(j, norm_name("strong_coupling_norm", p), q, &d, v));
                    }
                }
            }
        }
        if cfg.spectra {
            for (k, x) in corr_spectrum(&corr).iter().take(8).enumerate() {
                rows.push(SweepRow::new(j, format!("corr_eig{k}"), q, &d, *x));
            }
        }
    }
    Ok(rows)
}

/// Ideal-gas reference norms, independent of `J` and of distances.
pub fn ideal_gas_rows(cfg: &BoseSweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut seen = Vec::new();
    for tuple in &cfg.tuples {
        let q = tuple.len();
        if seen.contains(&q) {
            continue;
        }
        seen.push(q);
        let corr = ideal_gas_rdm(cfg.particles, cfg.sites, q)?.correlated()?;
        for &p in &cfg.norm_orders {
            rows.push(SweepRow::new(f64::INFINITY, norm_name("ideal_gas_norm", p), q, &[], corr.norm(p)?));
        }
    }
    Ok(rows)
}

pub fn bose_sweep(cfg: &BoseSweepConfig) -> Result<SweepTable> {
    if cfg.js.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("J grid must be strictly ascending".into()));
    }
    let system = BoseSystem::new(cfg.particles, cfg.sites)?;
    let mut rows = Vec::new();
    // one ground state at a time keeps the Krylov memory bounded; matvecs run in parallel
    for &j in &cfg.js {
        let gs = system.ground_state(j)?;
        rows.extend(bose_point_rows(&gs, cfg)?);
    }
    if cfg.overlays {
        rows.extend(ideal_gas_rows(cfg)?);
    }
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basis_dimensions() {
        let b = FockBasis::build(2, 2).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.sector_dim(), 2);
        assert_eq!(b.occupations(0), vec![0, 2]);
        assert_eq!(FockBasis::build(9, 9).unwrap().dim(), 24310);
        assert_eq!(fock_dimension(12, 12), 1352078.0);
        assert!(matches!(FockBasis::build(20, 20), Err(Error::DimensionBudget { .. })));
    }

    #[test]
    fn orbits_partition_basis() {
        let b = FockBasis::build(4, 4).unwrap();
        let total: usize = (0..b.sector_dim()).map(|s| b.orbit_size(s)).sum();
        assert_eq!(total, b.dim());
    }

    #[test]
    fn mott_state_at_zero_hopping() {
        let sys = BoseSystem::new(4, 4).unwrap();
        let gs = sys.ground_state(0.0).unwrap();
        assert_eq!(gs.energy, 0.0);
        let idx = sys.basis.index_of(1 + 5 + 25 + 125).unwrap();
        assert_relative_eq!(gs.amplitudes[idx], 1.0, epsilon = 1e-14);
        let rdm = gs.rdm(&SiteTuple::contiguous(2).unwrap()).unwrap();
        let b2 = rdm.block(2);
        let pos = rdm.op.basis().index[&(5 + 1)].1;
        assert_relative_eq!(b2[(pos, pos)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(rdm.trace(), 1.0, epsilon = 1e-14);
    }

    fn dense_full_hamiltonian(n: usize, l: usize, j: f64) -> (FockBasis, DMatrix<f64>) {
        let b = FockBasis::build(n, l).unwrap();
        let base = b.base();
        let pow: Vec<u64> = (0..l).map(|i| base.pow((l - 1 - i) as u32)).collect();
        let mut h = DMatrix::zeros(b.dim(), b.dim());
        for s in 0..b.dim() {
            let occ = b.occupations(s);
            h[(s, s)] = occ.iter().map(|&x| 0.5 * (x * x.saturating_sub(1)) as f64).sum();
            for i in 0..l {
                let k = (i + 1) % l;
                for (to, from) in [(i, k), (k, i)] {
                    if occ[from] > 0 && to != from {
                        let t = b.index_of(b.code(s) + pow[to] - pow[from]).unwrap();
                        h[(t, s)] -= j * (((occ[to] + 1) * occ[from]) as f64).sqrt();
                    }
                }
            }
        }
        (b, h)
    }

    #[test]
    fn sector_energy_matches_full_spectrum() {
        for j in [0.05, 0.3, 1.7] {
            let (_, h) = dense_full_hamiltonian(3, 3, j);
            let e_full = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            let gs = BoseSystem::new(3, 3).unwrap().ground_state(j).unwrap();
            assert_relative_eq!(gs.energy, e_full, epsilon = 1e-10);
        }
    }

    #[test]
    fn lanczos_path_matches_dense_path() {
        // N = L = 7 has a 246-state sector: force both solvers
        let sys = BoseSystem::new(7, 7).unwrap();
        let dense = sys.ground_state(0.2).unwrap();
        let lz = lowest_eigenpair(sys.diag.len(), |x, y| sys.apply(0.2, x, y), LanczosOptions::default()).unwrap();
        assert_relative_eq!(dense.energy, lz.energy, epsilon = 1e-10);
    }

    #[test]
    fn full_expansion_is_an_eigenvector() {
        let (b, h) = dense_full_hamiltonian(4, 4, 0.4);
        let gs = BoseSystem::new(4, 4).unwrap().ground_state(0.4).unwrap();
        let v = nalgebra::DVector::from_column_slice(&gs.amplitudes);
        let r = &h * &v - &v * gs.energy;
        assert!(r.amax() < 1e-10);
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(b.dim(), v.len());
    }

    #[test]
    fn blocks_match_dense_partial_trace() {
        let sys = BoseSystem::new(4, 4).unwrap();
        let gs = sys.ground_state(0.35).unwrap();
        let amps: Vec<_> = {
            // scatter into the dense (N+1)^L product space
            let base = 5usize;
            let mut v = vec![c(0.0, 0.0); base.pow(4)];
            for (i, a) in gs.amplitudes.iter().enumerate() {
                v[sys.basis.code(i) as usize] = c(*a, 0.0);
            }
            v
        };
        for sites in [vec![0, 1], vec![0, 2], vec![0, 1, 2], vec![0, 1, 2, 3]] {
            let t = SiteTuple::new(sites.clone()).unwrap();
            let dense = crate::linalg::reduced_from_pure(&amps, &[5; 4], &sites).unwrap();
            let blocks = gs.rdm(&t).unwrap().op.to_dense();
            assert!(dense.max_abs_diff(&blocks) < 1e-12);
            // cumulants agree with the dense engine as well
            let cd = correlated_from_joint(&t, &dense).unwrap();
            let cb = gs.rdm(&t).unwrap().correlated().unwrap();
            let nb = BlockOp::from_dense(&cd.operator, 4).unwrap();
            assert!(cb.operator.max_abs_diff(&nb) < 1e-12);
            assert_relative_eq!(cd.norm(1.0).unwrap(), cb.norm(1.0).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_filling_mean_occupation() {
        let gs = BoseSystem::new(5, 5).unwrap().ground_state(0.7).unwrap();
        let rdm = gs.rdm(&SiteTuple::new(vec![2]).unwrap()).unwrap();
        assert_relative_eq!(rdm.mean_occupation(0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn strong_coupling_closed_forms() {
        let j = 0.01;
        assert_eq!(strong_coupling_eigs(1, j, StrongCouplingCase::Q2D1), vec![2.0 * j, -2.0 * j]);
        assert_relative_eq!(strong_coupling_norm(1, j, StrongCouplingCase::Q2D1, 1.0).unwrap(), 4.0 * j);
        assert_relative_eq!(
            strong_coupling_norm(1, 1.0, StrongCouplingCase::Q3D11, 1.0).unwrap(),
            16.0 + 4.0 / 3.0 * 6f64.sqrt()
        );
        assert_relative_eq!(strong_coupling_norm(2, 1.0, StrongCouplingCase::Q2D1, 1.0).unwrap(), 4.0 * 3f64.sqrt());
        for case in [StrongCouplingCase::Q2D1, StrongCouplingCase::Q2D2, StrongCouplingCase::Q3D11] {
            for n in 1..4 {
                let ev = strong_coupling_eigs(n, 0.3, case);
                for p in [1.0, 2.0] {
                    let from_eigs = crate::linalg::schatten_from_eigenvalues(&ev, p).unwrap();
                    assert_relative_eq!(from_eigs, strong_coupling_norm(n, 0.3, case, p).unwrap(), epsilon = 1e-12);
                }
            }
        }
        assert!(strong_coupling_norm(1, j, StrongCouplingCase::Q2D1, 3.0).is_err());
    }

    #[test]
    fn ideal_gas_formula_matches_multinomial_state() {
        let basis = FockBasis::build(5, 6).unwrap();
        let psi = ideal_gas_state(&basis);
        let norm: f64 = psi.amplitudes.iter().map(|a| a * a).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        for q in 1..=4 {
            let formula = ideal_gas_rdm(5, 6, q).unwrap();
            assert_relative_eq!(formula.trace(), 1.0, epsilon = 1e-12);
            for sites in [(0..q).collect::<Vec<_>>(), (0..q).map(|k| k * 2 % 6).collect()] {
                let mut s = sites.clone();
                s.sort();
                s.dedup();
                if s.len() != q {
                    continue;
                }
                let direct = psi.rdm(&SiteTuple::new(s).unwrap()).unwrap();
                assert!(direct.op.max_abs_diff(&formula.op) < 1e-12, "q = {q}");
            }
        }
    }

    #[test]
    fn near_zero_blocks_keep_finite_spectra() {
        // this point produced NaN eigenvalues from the default QR threshold
        let gs = BoseSystem::new(9, 9).unwrap().ground_state(0.19).unwrap();
        let corr = gs.rdm(&SiteTuple::contiguous(4).unwrap()).unwrap().correlated().unwrap();
        assert!(corr.operator.eigenvalues().iter().all(|x| x.is_finite()));
        let n1 = corr.norm(1.0).unwrap();
        assert!(n1 > 0.617 && n1 < 0.77, "{n1}");
    }

    #[test]
    fn bessel_series() {
        assert_relative_eq!(bessel_i0(0.0), 1.0);
        assert_relative_eq!(bessel_i0(1.0), 1.2660658777520082, epsilon = 1e-15);
        assert_relative_eq!(bessel_i0(6.0), 67.23440697647797, epsilon = 1e-12);
    }

    #[test]
    fn tensor_and_trace_roundtrip() {
        let gs = BoseSystem::new(4, 4).unwrap().ground_state(0.5).unwrap();
        let r2 = gs.rdm(&SiteTuple::contiguous(2).unwrap()).unwrap().op;
        let r1 = r2.partial_trace(&[0]).unwrap();
        let prod = r1.tensor_placed(&r1, &[true, false]);
        let dense = r1.to_dense().tensor_placed(&r1.to_dense(), &[true, false]);
        assert!(prod.to_dense().max_abs_diff(&dense) < 1e-14);
        assert_relative_eq!(prod.trace(), 1.0, epsilon = 1e-12);
        let back = prod.partial_trace(&[1]).unwrap();
        assert!(back.max_abs_diff(&r1) < 1e-14);
    }
}
