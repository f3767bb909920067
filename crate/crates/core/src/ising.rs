//! Ground-state reduced density matrices of the periodic transverse XY chain
//!
//! ```text
//! H = -J sum_i [ (1+g)/2 X_i X_{i+1} + (1-g)/2 Y_i Y_{i+1} ] - sum_i Z_i
//! ```
//!
//! from its free-fermion solution. Majorana operators
//! `A_i = (prod_{j<i} Z_j) X_i`, `B_i = (prod_{j<i} Z_j) Y_i` have the
//! ground-state contractions `<A_i B_j> = i g(j - i)`, and every Pauli string
//! is a Pfaffian of a submatrix of these. The even-parity sector (antiperiodic
//! momenta) is used throughout, so for `J > 1` the state is the symmetric cat.
//!
//! At `g = 1` results can be reported in the Ising basis, with the coupling
//! along z and the field along x, related to the XY basis by a Hadamard on
//! every site.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::cumulants::{corr_spectrum, correlated_from_joint, rank2_truncate, SiteTuple, TruncationScheme};
use crate::error::{Error, Result};
use crate::lanczos::{fix_sign, lowest_eigenpair, LanczosOptions};
use crate::linalg::{c, pfaffian, AntisymmetricMatrix, CMatrix, DensityMatrix, Operator, C64, ZERO};
use crate::sweep::{ordered_map, SweepRow, SweepTable};
use crate::tangles::{concurrence, rank2_convex_roof, PureConcurrence, PureMeasure, TangleMeasure, Tau3, Tau4A, Tau4C};

/// Momentum-sum length standing in for the infinite chain.
pub const L_FF: usize = 8192;
/// Surrogate length used within [`CRITICAL_WINDOW`] of `J = 1`.
pub const L_FF_CRITICAL: usize = 65536;
pub const CRITICAL_WINDOW: f64 = 0.05;
/// Largest chain handled by exact diagonalization.
pub const ED_MAX_LENGTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainLength {
    Finite(usize),
    Thermodynamic,
}

/// Spin basis in which strings and density matrices are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Coupling along x and y, field along z.
    Xy,
    /// Coupling along z, field along x (Hadamard-rotated XY basis).
    Ising,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XyParams {
    pub j: f64,
    pub gamma: f64,
    pub length: ChainLength,
    pub basis: Basis,
}

impl XyParams {
    pub fn new(j: f64, gamma: f64, length: ChainLength, basis: Basis) -> Result<Self> {
        if !(j >= 0.0 && j.is_finite()) {
            return Err(Error::InvalidParameter(format!("J must be finite and >= 0, got {j}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if let ChainLength::Finite(l) = length {
            if l < 2 {
                return Err(Error::InvalidParameter(format!("chain length must be at least 2, got {l}")));
            }
        }
        Ok(Self { j, gamma, length, basis })
    }

    /// Transverse Ising chain in the thermodynamic limit, Ising basis.
    pub fn ising(j: f64) -> Self {
        Self::new(j, 1.0, ChainLength::Thermodynamic, Basis::Ising).expect("valid Ising parameters")
    }

    pub fn with_length(self, length: ChainLength) -> Self {
        Self { length, ..self }
    }

    pub fn with_basis(self, basis: Basis) -> Self {
        Self { basis, ..self }
    }

    /// Number of momenta in the sums.
    pub fn momentum_count(&self) -> usize {
        match self.length {
            ChainLength::Finite(l) => l,
            ChainLength::Thermodynamic if (self.j - 1.0).abs() < CRITICAL_WINDOW => L_FF_CRITICAL,
            ChainLength::Thermodynamic => L_FF,
        }
    }

    fn chain_length(&self) -> Option<usize> {
        match self.length {
            ChainLength::Finite(l) => Some(l),
            ChainLength::Thermodynamic => None,
        }
    }
}

/// Single-particle mode at momentum `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    /// Excitation energy `2 sqrt((1 - J cos k)^2 + (J g sin k)^2)`.
    pub omega: f64,
    /// Bogoliubov angle `atan2(J g sin k, 1 - J cos k)`.
    pub theta: f64,
}

fn antiperiodic_momenta(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |m| PI * (2 * m + 1) as f64 / n as f64)
}

/// Modes with `k` in `(0, pi]`.
pub fn dispersion(params: &XyParams) -> Vec<DispersionPoint> {
    let n = params.momentum_count();
    antiperiodic_momenta(n)
        .filter(|&k| k <= PI + 1e-15)
        .map(|k| {
            let a = 1.0 - params.j * k.cos();
            let b = params.j * params.gamma * k.sin();
            DispersionPoint { k, omega: 2.0 * a.hypot(b), theta: b.atan2(a) }
        })
        .collect()
}

/// Ground-state energy of the even-parity sector (per site for the infinite chain).
pub fn ground_energy(params: &XyParams) -> f64 {
    let n = params.momentum_count();
    let total: f64 =
        antiperiodic_momenta(n).map(|k| (1.0 - params.j * k.cos()).hypot(params.j * params.gamma * k.sin())).sum();
    match params.length {
        ChainLength::Finite(_) => -total,
        ChainLength::Thermodynamic => -total / n as f64,
    }
}

/// `g(r)` for `r = -rmax..=rmax`, stored at index `r + rmax`.
fn contraction_profile(params: &XyParams, rmax: usize) -> Vec<f64> {
    let n = params.momentum_count();
    let mut out = vec![0.0; 2 * rmax + 1];
    for k in antiperiodic_momenta(n) {
        let a = 1.0 - params.j * k.cos();
        let b = params.j * params.gamma * k.sin();
        let e = a.hypot(b);
        if e == 0.0 {
            continue;
        }
        let (a, b) = (a / e, b / e);
        for (idx, slot) in out.iter_mut().enumerate() {
            let r = idx as f64 - rmax as f64;
            let (s, cs) = (k * r).sin_cos();
            *slot += a * cs + b * s;
        }
    }
    out.iter_mut().for_each(|x| *x /= n as f64);
    out
}

/// Contraction matrix `M` with `<a_m a_n> = delta_mn + i M_mn` for the
/// Majoranas `[A_0, B_0, A_1, B_1, ...]` of `span` consecutive sites.
pub fn majorana_correlations(params: &XyParams, span: usize) -> Result<AntisymmetricMatrix> {
    if let Some(l) = params.chain_length() {
        if span > l {
            return Err(Error::InvalidSites(format!("span {span} exceeds chain length {l}")));
        }
    }
    let g = contraction_profile(params, span.saturating_sub(1));
    let off = span.saturating_sub(1) as isize;
    let mut m = AntisymmetricMatrix::zeros(2 * span);
    for i in 0..span {
        for j in 0..span {
            let v = g[(j as isize - i as isize + off) as usize];
            m.set(2 * i, 2 * j + 1, v);
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => crate::linalg::pauli_x(),
            Pauli::Y => crate::linalg::pauli_y(),
            Pauli::Z => crate::linalg::pauli_z(),
        }
    }

    /// `P |bit> = coef |bit ^ flip>`.
    fn action(self, bit: usize) -> (usize, C64) {
        match self {
            Pauli::I => (0, c(1.0, 0.0)),
            Pauli::X => (1, c(1.0, 0.0)),
            Pauli::Y => (1, if bit == 0 { c(0.0, 1.0) } else { c(0.0, -1.0) }),
            Pauli::Z => (0, c(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        }
    }

    /// XY-basis letter and sign of this Ising-basis letter.
    fn hadamard(self) -> (Pauli, f64) {
        match self {
            Pauli::I => (Pauli::I, 1.0),
            Pauli::X => (Pauli::Z, 1.0),
            Pauli::Y => (Pauli::Y, -1.0),
            Pauli::Z => (Pauli::X, 1.0),
        }
    }
}

/// Pauli letters on a site tuple, expressed in the params' basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub sites: SiteTuple,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(sites: SiteTuple, letters: Vec<Pauli>) -> Result<Self> {
        if sites.len() != letters.len() {
            return Err(Error::DimensionMismatch { expected: sites.len(), found: letters.len() });
        }
        Ok(Self { sites, letters })
    }
}

/// `<P_{s_0} ... P_{s_k}>` for XY-basis letters at sites relative to the
/// start of the window that `m` covers.
fn string_expectation(m: &AntisymmetricMatrix, rel_sites: &[usize], letters: &[Pauli]) -> f64 {
    let odd = letters.iter().filter(|l| matches!(l, Pauli::X | Pauli::Y)).count() % 2 == 1;
    if odd {
        return 0.0;
    }
    let mut coeff = c(1.0, 0.0);
    let mut word: Vec<usize> = Vec::new();
    for (&w, &l) in rel_sites.iter().zip(letters) {
        match l {
            Pauli::I => {}
            Pauli::Z => {
                coeff *= c(0.0, -1.0);
                word.extend([2 * w, 2 * w + 1]);
            }
            Pauli::X | Pauli::Y => {
                for j in 0..w {
                    coeff *= c(0.0, -1.0);
                    word.extend([2 * j, 2 * j + 1]);
                }
                word.push(if l == Pauli::X { 2 * w } else { 2 * w + 1 });
            }
        }
    }
    // bubble sort tracks the permutation sign
    let mut sign = 1.0;
    let n = word.len();
    for a in 0..n {
        for b in 0..n - 1 - a {
            if word[b] > word[b + 1] {
                word.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    let mut reduced: Vec<usize> = Vec::with_capacity(n);
    for x in word {
        if reduced.last() == Some(&x) {
            reduced.pop();
        } else {
            reduced.push(x);
        }
    }
    if reduced.is_empty() {
        return (coeff * sign).re;
    }
    if reduced.len() % 2 == 1 {
        return 0.0;
    }
    let pf = pfaffian(&m.submatrix(&reduced)).expect("even order");
    let half = reduced.len() / 2;
    let phase = match half % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    };
    (coeff * sign * phase * pf).re
}

fn to_xy(basis: Basis, letters: &[Pauli]) -> (Vec<Pauli>, f64) {
    match basis {
        Basis::Xy => (letters.to_vec(), 1.0),
        Basis::Ising => {
            let mut sign = 1.0;
            let out = letters
                .iter()
                .map(|l| {
                    let (x, s) = l.hadamard();
                    sign *= s;
                    x
                })
                .collect();
            (out, sign)
        }
    }
}

fn check_sites(params: &XyParams, sites: &SiteTuple) -> Result<()> {
    if let Some(l) = params.chain_length() {
        if sites.last() >= l {
            return Err(Error::SiteOutOfRange { index: sites.last(), len: l });
        }
    }
    Ok(())
}

pub fn pauli_expectation(params: &XyParams, string: &PauliString) -> Result<f64> {
    check_sites(params, &string.sites)?;
    let (letters, sign) = to_xy(params.basis, &string.letters);
    if letters.iter().filter(|l| matches!(l, Pauli::X | Pauli::Y)).count() % 2 == 1 {
        return Ok(0.0);
    }
    let m = majorana_correlations(params, string.sites.span())?;
    let rel: Vec<usize> = string.sites.sites().iter().map(|s| s - string.sites.first()).collect();
    Ok(sign * string_expectation(&m, &rel, &letters))
}

/// Every Pauli string on `q` sites, first site most significant.
pub fn all_strings(q: usize) -> Vec<Vec<Pauli>> {
    (0..1usize << (2 * q)).map(|code| (0..q).map(|k| Pauli::ALL[(code >> (2 * (q - 1 - k))) & 3]).collect()).collect()
}

/// Adds `coef * (P_0 (x) ... (x) P_{q-1})` to `rho`.
fn accumulate_string(rho: &mut CMatrix, letters: &[Pauli], coef: f64) {
    let q = letters.len();
    for b in 0..1usize << q {
        let mut target = b;
        let mut amp = c(coef, 0.0);
        for (k, &l) in letters.iter().enumerate() {
            let shift = q - 1 - k;
            let (flip, phase) = l.action((b >> shift) & 1);
            target ^= flip << shift;
            amp *= phase;
        }
        rho[(target, b)] += amp;
    }
}

/// `rho_q = 2^-q sum_S <S> S`, validated as a density matrix.
pub fn reduced_dm(params: &XyParams, sites: &SiteTuple) -> Result<DensityMatrix> {
    check_sites(params, sites)?;
    let m = majorana_correlations(params, sites.span())?;
    DensityMatrix::new(rdm_from_contractions(&m, params.basis, sites)?)
}

/// Unvalidated `rho_q` from an explicit contraction matrix covering the
/// window `sites.first()..=sites.last()`.
pub fn rdm_from_contractions(m: &AntisymmetricMatrix, basis: Basis, sites: &SiteTuple) -> Result<Operator> {
    if m.dim() != 2 * sites.span() {
        return Err(Error::DimensionMismatch { expected: 2 * sites.span(), found: m.dim() });
    }
    let q = sites.len();
    let rel: Vec<usize> = sites.sites().iter().map(|s| s - sites.first()).collect();
    let mut rho = CMatrix::zeros(1 << q, 1 << q);
    let norm = 1.0 / (1u64 << q) as f64;
    for letters in all_strings(q) {
        let (xy, sign) = to_xy(basis, &letters);
        let e = sign * string_expectation(m, &rel, &xy);
        if e != 0.0 {
            accumulate_string(&mut rho, &letters, e * norm);
        }
    }
    Operator::new(vec![2; q], rho)
}

/// Exact ground state of a finite periodic chain in the even-parity sector.
#[derive(Clone, Debug)]
pub struct EdGroundState {
    pub energy: f64,
    pub length: usize,
    pub basis: Basis,
    /// Real amplitudes, site 0 most significant.
    pub amplitudes: Vec<f64>,
}

/// `x -> H^{(x) L} x` (normalized Walsh-Hadamard transform).
fn walsh_hadamard(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= s);
}

pub fn ed_ground_state(params: &XyParams) -> Result<EdGroundState> {
    let l = params.chain_length().ok_or_else(|| Error::InvalidParameter("ED needs a finite chain".into()))?;
    if l > ED_MAX_LENGTH {
        return Err(Error::DimensionBudget { dimension: 1 << l, budget: 1 << ED_MAX_LENGTH });
    }
    // even states s <-> s >> 1; the dropped bit restores even popcount
    let dim = 1usize << (l - 1);
    let expand = |u: usize| (u << 1) | (u.count_ones() as usize & 1);
    let bit = |s: usize, i: usize| (s >> (l - 1 - i)) & 1;
    let (j, g) = (params.j, params.gamma);
    let column = |u: usize| -> (f64, Vec<(usize, f64)>) {
        let s = expand(u);
        let mut diag = 0.0;
        let mut off = Vec::with_capacity(l);
        for i in 0..l {
            diag -= 1.0 - 2.0 * bit(s, i) as f64;
            let k = (i + 1) % l;
            let parity = if (bit(s, i) + bit(s, k)) % 2 == 0 { 1.0 } else { -1.0 };
            let amp = -j * ((1.0 + g) / 2.0 - (1.0 - g) / 2.0 * parity);
            if amp != 0.0 {
                let t = s ^ (1 << (l - 1 - i)) ^ (1 << (l - 1 - k));
                off.push((t >> 1, amp));
            }
        }
        (diag, off)
    };
    let mut v = if dim <= 1024 {
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for u in 0..dim {
            let (d, off) = column(u);
            h[(u, u)] += d;
            for (t, a) in off {
                h[(t, u)] += a;
            }
        }
        let eig = crate::linalg::symmetric_eigen(&h);
        let (k, _) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        eig.eigenvectors.column(k).iter().copied().collect::<Vec<f64>>()
    } else {
        let cols: Vec<(f64, Vec<(usize, f64)>)> = (0..dim).map(column).collect();
        let gs = lowest_eigenpair(
            dim,
            |x, y| {
                y.iter_mut().for_each(|z| *z = 0.0);
                for (u, (d, off)) in cols.iter().enumerate() {
                    y[u] += d * x[u];
                    for &(t, a) in off {
                        y[t] += a * x[u];
                    }
                }
            },
            LanczosOptions { tol: 1e-13, ..Default::default() },
        )?;
        gs.vector
    };
    fix_sign(&mut v);
    let mut full = vec![0.0; 1 << l];
    for (u, x) in v.iter().enumerate() {
        full[expand(u)] = *x;
    }
    // energy from the normalized vector
    let mut energy = 0.0;
    for (u, x) in v.iter().enumerate() {
        let (d, off) = column(u);
        energy += d * x * x;
        for (t, a) in off {
            energy += a * v[t] * x;
        }
    }
    if params.basis == Basis::Ising {
        walsh_hadamard(&mut full);
    }
    Ok(EdGroundState { energy, length: l, basis: params.basis, amplitudes: full })
}

impl EdGroundState {
    fn complex_amplitudes(&self) -> Vec<C64> {
        self.amplitudes.iter().map(|&x| c(x, 0.0)).collect()
    }

    pub fn reduced_dm(&self, sites: &SiteTuple) -> Result<DensityMatrix> {
        if sites.last() >= self.length {
            return Err(Error::SiteOutOfRange { index: sites.last(), len: self.length });
        }
        let op = crate::linalg::reduced_from_pure(&self.complex_amplitudes(), &vec![2; self.length], sites.sites())?;
        DensityMatrix::new(op)
    }

    /// `<psi| P_{s_0} ... |psi>` for letters at arbitrary distinct sites.
    pub fn expectation(&self, sites: &[usize], letters: &[Pauli]) -> f64 {
        let l = self.length;
        let mut acc = ZERO;
        for (b, &amp) in self.amplitudes.iter().enumerate() {
            if amp == 0.0 {
                continue;
            }
            let mut target = b;
            let mut coef = c(amp, 0.0);
            for (&s, &p) in sites.iter().zip(letters) {
                let shift = l - 1 - s;
                let (flip, phase) = p.action((b >> shift) & 1);
                target ^= flip << shift;
                coef *= phase;
            }
            acc += coef * self.amplitudes[target];
        }
        acc.re
    }
}

/// Which quantities an Ising sweep evaluates at each coupling.
#[derive(Clone, Debug)]
pub struct IsingSweepConfig {
    pub gamma: f64,
    pub length: ChainLength,
    pub js: Vec<f64>,
    /// `C2`, `sqrt_tau3` and `tau4` of nearest-neighbour blocks from rank-two roofs.
    pub tangles: bool,
    pub scheme: TruncationScheme,
    pub tau4_measure: TangleMeasure,
    /// Schatten orders of the correlated parts of `norm_tuples`.
    pub norm_orders: Vec<f64>,
    pub norm_tuples: Vec<SiteTuple>,
    /// Eigenvalues of the reduced and correlated states of `norm_tuples`.
    pub spectra: bool,
    /// Exact against rank-two concurrence for these pairs.
    pub concurrence_pairs: Vec<SiteTuple>,
}

impl IsingSweepConfig {
    pub fn new(js: Vec<f64>) -> Self {
        Self {
            gamma: 1.0,
            length: ChainLength::Thermodynamic,
            js,
            tangles: false,
            scheme: TruncationScheme::Absolute,
            tau4_measure: TangleMeasure::Tau4A,
            norm_orders: Vec::new(),
            norm_tuples: Vec::new(),
            spectra: false,
            concurrence_pairs: Vec::new(),
        }
    }

    pub fn params(&self, j: f64) -> Result<XyParams> {
        let basis = if self.gamma == 1.0 { Basis::Ising } else { Basis::Xy };
        XyParams::new(j, self.gamma, self.length, basis)
    }
}

fn roof_rows(rows: &mut Vec<SweepRow>, j: f64, name: &str, q: usize, value: crate::tangles::TangleValue) {
    let d = vec![1; q - 1];
    rows.push(SweepRow::new(j, name, q, &d, value.value));
    if let Some((lo, hi)) = value.bounds {
        rows.push(SweepRow::new(j, format!("{name}_lower"), q, &d, lo));
        rows.push(SweepRow::new(j, format!("{name}_upper"), q, &d, hi));
    }
}

/// All requested rows at one coupling.
pub fn ising_point(cfg: &IsingSweepConfig, j: f64) -> Result<Vec<SweepRow>> {
    let params = cfg.params(j)?;
    let mut rows = Vec::new();
    if cfg.tangles {
        let rho2 = reduced_dm(&params, &SiteTuple::contiguous(2)?)?;
        rows.push(SweepRow::new(j, "C2", 2, &[1], concurrence(&rho2)?.value));
        for q in [3, 4] {
            let rho = reduced_dm(&params, &SiteTuple::contiguous(q)?)?;
            let approx = rank2_truncate(&rho, cfg.scheme);
            let d = vec![1; q - 1];
            rows.push(SweepRow::new(j, "p1", q, &d, approx.p1));
            rows.push(SweepRow::new(j, "subdominant", q, &d, approx.residual_weight));
            if q == 3 {
                roof_rows(&mut rows, j, "sqrt_tau3", 3, rank2_convex_roof(&approx, &Tau3).sqrt());
            } else {
                let measure: &dyn PureMeasure = match cfg.tau4_measure {
                    TangleMeasure::Tau4C => &Tau4C,
                    TangleMeasure::Tau4A => &Tau4A,
                    other => return Err(Error::InvalidParameter(format!("{} is not a roof four-tangle", other.tag()))),
                };
                roof_rows(&mut rows, j, "tau4", 4, rank2_convex_roof(&approx, measure));
            }
        }
    }
    for pair in &cfg.concurrence_pairs {
        let rho = reduced_dm(&params, pair)?;
        let d = pair.distances();
        rows.push(SweepRow::new(j, "C2", 2, &d, concurrence(&rho)?.value));
        let roof = rank2_convex_roof(&rank2_truncate(&rho, cfg.scheme), &PureConcurrence);
        rows.push(SweepRow::new(j, "C2_rank2", 2, &d, roof.value));
    }
    for tuple in &cfg.norm_tuples {
        let rho = reduced_dm(&params, tuple)?;
        let d = tuple.distances();
        let q = tuple.len();
        let corr = correlated_from_joint(tuple, rho.operator())?;
        for &p in &cfg.norm_orders {
            let name = if p == 1.0 {
                "corr_norm1".to_string()
            } else if p == 2.0 {
                "corr_norm2".to_string()
            } else {
                format!("corr_norm{p}")
            };
            rows.push(SweepRow::new(j, name, q, &d, corr.norm(p)?));
        }
        if cfg.spectra {
            let mut ev = rho.hermitian().eigenvalues();
            ev.sort_by(|a, b| b.total_cmp(a));
            rows.push(SweepRow::new(j, "subdominant", q, &d, ev[2..].iter().sum::<f64>().max(0.0)));
            for (k, x) in ev.iter().enumerate() {
                rows.push(SweepRow::new(j, format!("rdm_eig{k}"), q, &d, *x));
            }
            for (k, x) in corr_spectrum(&corr).iter().enumerate() {
                rows.push(SweepRow::new(j, format!("corr_eig{k}"), q, &d, *x));
            }
        }
    }
    Ok(rows)
}

pub fn ising_sweep(cfg: &IsingSweepConfig) -> Result<SweepTable> {
    if cfg.js.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("J grid must be strictly ascending".into()));
    }
    let per_point = ordered_map(&cfg.js, |&j| ising_point(cfg, j));
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn finite(j: f64, gamma: f64, l: usize, basis: Basis) -> XyParams {
        XyParams::new(j, gamma, ChainLength::Finite(l), basis).unwrap()
    }

    #[test]
    fn decoupled_chain() {
        let p = XyParams::ising(0.0);
        let s = SiteTuple::new(vec![3]).unwrap();
        assert_eq!(pauli_expectation(&p, &PauliString::new(s, vec![Pauli::X]).unwrap()).unwrap(), 1.0);
        let zz = PauliString::new(SiteTuple::contiguous(2).unwrap(), vec![Pauli::Z, Pauli::Z]).unwrap();
        assert!(pauli_expectation(&p, &zz).unwrap().abs() < 1e-15);
        let m = majorana_correlations(&p.with_basis(Basis::Xy), 3).unwrap();
        for i in 0..6 {
            for k in 0..6 {
                let want = if i % 2 == 0 && k == i + 1 {
                    1.0
                } else if k % 2 == 0 && i == k + 1 {
                    -1.0
                } else {
                    0.0
                };
                assert!((m.get(i, k) - want).abs() < 1e-12);
            }
        }
        // |->-> > in the Ising basis
        let rho = reduced_dm(&p, &SiteTuple::contiguous(2).unwrap()).unwrap();
        assert!(rho.matrix().iter().all(|z| (z - c(0.25, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn contractions_bounded_and_antisymmetric() {
        for j in [0.3, 1.0, 2.5] {
            let m = majorana_correlations(&XyParams::ising(j).with_basis(Basis::Xy), 6).unwrap().to_dense();
            assert!((&m + m.transpose()).iter().all(|x| *x == 0.0));
            assert!(m.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn energy_matches_ed_small_chains() {
        for (j, g) in [(0.5, 1.0), (1.3, 1.0), (0.7, 0.5)] {
            let p = finite(j, g, 8, Basis::Xy);
            let ed = ed_ground_state(&p).unwrap();
            assert_relative_eq!(ed.energy, ground_energy(&p), epsilon = 1e-10);
        }
    }

    #[test]
    fn two_site_chain_at_zero_coupling() {
        let ed = ed_ground_state(&finite(0.0, 1.0, 2, Basis::Ising)).unwrap();
        for a in &ed.amplitudes {
            assert_relative_eq!(*a, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn rdms_match_ed() {
        for (j, g, basis) in [(0.5, 1.0, Basis::Ising), (1.3, 1.0, Basis::Xy), (0.7, 0.5, Basis::Xy)] {
            let p = finite(j, g, 8, basis);
            let ed = ed_ground_state(&p).unwrap();
            for sites in [vec![0, 1], vec![0, 1, 2], vec![0, 2, 3, 5]] {
                let t = SiteTuple::new(sites).unwrap();
                let a = reduced_dm(&p, &t).unwrap();
                let b = ed.reduced_dm(&t).unwrap();
                let dev = a.operator().max_abs_diff(b.operator());
                assert!(dev < 1e-10, "J = {j}, {t:?}: {dev:e}");
            }
        }
    }

    #[test]
    fn spin_flip_odd_strings_vanish() {
        let p = XyParams::ising(0.8);
        let t = SiteTuple::contiguous(3).unwrap();
        for letters in all_strings(3) {
            let odd = letters.iter().filter(|l| matches!(l, Pauli::Y | Pauli::Z)).count() % 2 == 1;
            let v = pauli_expectation(&p, &PauliString::new(t.clone(), letters).unwrap()).unwrap();
            if odd {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn strong_coupling_ghz_limit() {
        let rho = reduced_dm(&XyParams::ising(50.0), &SiteTuple::contiguous(2).unwrap()).unwrap();
        let m = rho.matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-2 && (m[(3, 3)].re - 0.5).abs() < 1e-2);
    }

    #[test]
    fn out_of_range_sites() {
        let p = finite(0.5, 1.0, 4, Basis::Xy);
        assert!(reduced_dm(&p, &SiteTuple::new(vec![2, 4]).unwrap()).is_err());
        assert!(majorana_correlations(&p, 5).is_err());
        assert!(ed_ground_state(&finite(0.5, 1.0, 17, Basis::Xy)).is_err());
    }
}
