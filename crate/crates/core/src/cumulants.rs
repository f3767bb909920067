//! Correlated (cumulant) parts of reduced density matrices.
//!
//! For a set of sites `S`, the correlated part is obtained by subtracting from
//! the reduced state every product of lower-order correlated parts over the
//! set partitions of `S` with at least two blocks:
//!
//! ```text
//! rho_S^corr = rho_S - sum_{pi, |pi| >= 2} prod_{B in pi} rho_B^corr,   rho_{i}^corr = rho_i
//! ```
//!
//! Up to three sites this is the familiar `rho_12 - rho_1 rho_2` and its
//! three-site analogue; four sites follow the same set-partition expansion.
//! Tensor factors live on disjoint sites and commute, so product order does
//! not matter.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, eigvalsh, kron_all, schatten_from_eigenvalues, CMatrix, DensityMatrix, HermitianMatrix, Operator, C64,
};

/// Tolerance for partial-trace consistency between supplied marginals.
pub const MARGINAL_TOL: f64 = 1e-8;

/// Operators on a small ordered set of sites that support the products and
/// traces needed by the cumulant expansion.
pub trait LocalOperator: Clone {
    fn num_sites(&self) -> usize;

    /// Tensor product with an operator on disjoint sites; `from_self[k]`
    /// selects the source of joint position `k`.
    fn tensor_placed(&self, other: &Self, from_self: &[bool]) -> Self;

    fn sub_assign(&mut self, other: &Self);

    fn partial_trace(&self, keep: &[usize]) -> Result<Self>;

    fn trace(&self) -> f64;

    /// Eigenvalues of the (Hermitian) operator, in no particular order.
    fn eigenvalues(&self) -> Vec<f64>;

    fn max_abs_diff(&self, other: &Self) -> f64;
}

impl LocalOperator for Operator {
    fn num_sites(&self) -> usize {
        Operator::num_sites(self)
    }

    fn tensor_placed(&self, other: &Self, from_self: &[bool]) -> Self {
        Operator::tensor_placed(self, other, from_self)
    }

    fn sub_assign(&mut self, other: &Self) {
        *self.matrix_mut() -= other.matrix();
    }

    fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        Operator::partial_trace(self, keep)
    }

    fn trace(&self) -> f64 {
        Operator::trace(self).re
    }

    fn eigenvalues(&self) -> Vec<f64> {
        let m = self.matrix();
        eigvalsh(&((m + m.adjoint()).scale(0.5)))
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        Operator::max_abs_diff(self, other)
    }
}

/// Strictly increasing lattice sites, between one and four of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteTuple {
    sites: Vec<usize>,
}

impl SiteTuple {
    pub const MAX_SITES: usize = 4;

    pub fn new(sites: Vec<usize>) -> Result<Self> {
        if sites.is_empty() || sites.len() > Self::MAX_SITES {
            return Err(Error::InvalidSites(format!("need 1..=4 sites, got {}", sites.len())));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSites(format!("sites must be strictly increasing: {sites:?}")));
        }
        Ok(Self { sites })
    }

    /// Sites `start, start + d1, start + d1 + d2, ...`.
    pub fn from_distances(start: usize, distances: &[usize]) -> Result<Self> {
        if distances.contains(&0) {
            return Err(Error::InvalidSites("distances must be positive".into()));
        }
        let mut sites = vec![start];
        for d in distances {
            sites.push(sites.last().unwrap() + d);
        }
        Self::new(sites)
    }

    /// Nearest-neighbour block `0, 1, ..., q-1`.
    pub fn contiguous(q: usize) -> Result<Self> {
        Self::new((0..q).collect())
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn distances(&self) -> Vec<usize> {
        self.sites.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn first(&self) -> usize {
        self.sites[0]
    }

    pub fn last(&self) -> usize {
        *self.sites.last().unwrap()
    }

    /// Number of lattice sites from the first to the last site, inclusive.
    pub fn span(&self) -> usize {
        self.last() - self.first() + 1
    }
}

/// Correlated part of a q-site reduced density matrix.
#[derive(Clone, Debug)]
pub struct CorrelatedRdm<O> {
    pub sites: SiteTuple,
    pub operator: O,
}

impl<O: LocalOperator> CorrelatedRdm<O> {
    pub fn order(&self) -> usize {
        self.sites.len()
    }

    pub fn trace(&self) -> f64 {
        self.operator.trace()
    }

    pub fn norm(&self, p: f64) -> Result<f64> {
        corr_norm(self, p)
    }

    pub fn spectrum(&self) -> Vec<f64> {
        corr_spectrum(self)
    }
}

fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Set partitions of `mask` (as bitmasks), each listed once.
pub(crate) fn set_partitions(mask: u32) -> Vec<Vec<u32>> {
    if mask == 0 {
        return vec![Vec::new()];
    }
    let lowest = mask & mask.wrapping_neg();
    let rest = mask & !lowest;
    let mut out = Vec::new();
    // enumerate submasks of `rest` to join the lowest element's block
    let mut sub = rest;
    loop {
        let block = lowest | sub;
        for mut tail in set_partitions(rest & !sub) {
            tail.insert(0, block);
            out.push(tail);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    out
}

fn relative_positions(sub: u32, within: u32) -> Vec<usize> {
    let members = mask_members(within);
    mask_members(sub).iter().map(|s| members.iter().position(|m| m == s).unwrap()).collect()
}

/// Product of the cumulants of `blocks`, as an operator on the union of the
/// blocks (positions ordered by site).
fn block_product<O: LocalOperator>(blocks: &[u32], kappa: &BTreeMap<u32, O>) -> O {
    let mut acc_mask = blocks[0];
    let mut acc = kappa[&blocks[0]].clone();
    for &b in &blocks[1..] {
        let union = acc_mask | b;
        let layout: Vec<bool> = mask_members(union).iter().map(|s| acc_mask & (1 << s) != 0).collect();
        acc = acc.tensor_placed(&kappa[&b], &layout);
        acc_mask = union;
    }
    acc
}

/// Cumulants for every nonempty subset of `full`, keyed by bitmask.
fn all_cumulants<O: LocalOperator>(rdms: &BTreeMap<u32, O>, full: u32) -> BTreeMap<u32, O> {
    let mut masks: Vec<u32> = (1..=full).filter(|m| m & !full == 0).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut kappa: BTreeMap<u32, O> = BTreeMap::new();
    for m in masks {
        let mut k = rdms[&m].clone();
        if m.count_ones() > 1 {
            for part in set_partitions(m) {
                if part.len() < 2 {
                    continue;
                }
                k.sub_assign(&block_product(&part, &kappa));
            }
        }
        kappa.insert(m, k);
    }
    kappa
}

/// Correlated part from a map of marginals. Keys are bitmasks over the
/// positions of `sites` (bit `k` = `sites[k]`); every nonempty subset must be
/// present, and each marginal must agree with the partial traces of its
/// supersets within [`MARGINAL_TOL`].
pub fn correlated_rdm<O: LocalOperator>(sites: &SiteTuple, rdms: &BTreeMap<u32, O>) -> Result<CorrelatedRdm<O>> {
    let q = sites.len();
    let full: u32 = (1 << q) - 1;
    for m in 1..=full {
        let op = rdms.get(&m).ok_or_else(|| Error::MissingMarginal(subset_sites(sites, m)))?;
        if op.num_sites() != m.count_ones() as usize {
            return Err(Error::DimensionMismatch { expected: m.count_ones() as usize, found: op.num_sites() });
        }
    }
    for m in 1..=full {
        if m.count_ones() < 2 {
            continue;
        }
        for drop in mask_members(m) {
            let sub = m & !(1 << drop);
            let keep = relative_positions(sub, m);
            let traced = rdms[&m].partial_trace(&keep)?;
            let deviation = traced.max_abs_diff(&rdms[&sub]);
            if deviation > MARGINAL_TOL {
                return Err(Error::InconsistentMarginals { subset: subset_sites(sites, sub), deviation });
            }
        }
    }
    let mut kappa = all_cumulants(rdms, full);
    Ok(CorrelatedRdm { sites: sites.clone(), operator: kappa.remove(&full).unwrap() })
}

fn subset_sites(sites: &SiteTuple, mask: u32) -> Vec<usize> {
    mask_members(mask).iter().map(|&k| sites.sites()[k]).collect()
}

/// All marginals of a joint q-site operator, keyed by bitmask.
pub fn marginals<O: LocalOperator>(rho: &O) -> Result<BTreeMap<u32, O>> {
    let q = rho.num_sites();
    let full: u32 = (1 << q) - 1;
    let mut out = BTreeMap::new();
    for m in 1..=full {
        let op = if m == full { rho.clone() } else { rho.partial_trace(&mask_members(m))? };
        out.insert(m, op);
    }
    Ok(out)
}

/// Correlated part of a joint reduced state, with marginals taken from it.
pub fn correlated_from_joint<O: LocalOperator>(sites: &SiteTuple, rho: &O) -> Result<CorrelatedRdm<O>> {
    if rho.num_sites() != sites.len() {
        return Err(Error::DimensionMismatch { expected: sites.len(), found: rho.num_sites() });
    }
    let full: u32 = (1 << sites.len()) - 1;
    let marg = marginals(rho)?;
    let mut kappa = all_cumulants(&marg, full);
    Ok(CorrelatedRdm { sites: sites.clone(), operator: kappa.remove(&full).unwrap() })
}

pub fn corr_norm<O: LocalOperator>(c: &CorrelatedRdm<O>, p: f64) -> Result<f64> {
    schatten_from_eigenvalues(&c.operator.eigenvalues(), p)
}

/// Eigenvalues of the correlated part, descending.
pub fn corr_spectrum<O: LocalOperator>(c: &CorrelatedRdm<O>) -> Vec<f64> {
    let mut ev = c.operator.eigenvalues();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// How the two retained weights of a rank-two truncation are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TruncationScheme {
    /// Keep `p1`, give the second state `1 - p1`.
    Absolute,
    /// Keep `p1 / (p1 + p2)` and `p2 / (p1 + p2)`.
    Renormalized,
}

impl TruncationScheme {
    pub fn tag(self) -> &'static str {
        match self {
            TruncationScheme::Absolute => "absolute",
            TruncationScheme::Renormalized => "renormalized",
        }
    }
}

impl std::str::FromStr for TruncationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Self::Absolute),
            "renormalized" => Ok(Self::Renormalized),
            other => Err(Error::InvalidParameter(format!("unknown truncation scheme `{other}`"))),
        }
    }
}

/// Rank-two approximation `p1 |psi1><psi1| + (1 - p1) |psi2><psi2|`.
#[derive(Clone, Debug)]
pub struct Rank2Approx {
    pub p1: f64,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    /// Total weight of the discarded eigenvalues.
    pub residual_weight: f64,
    pub scheme: TruncationScheme,
    /// Leading eigenvalues as found, before re-weighting.
    pub eigenvalues: [f64; 2],
    /// Set when the second eigenvalue vanishes; `p1` is then 1.
    pub degenerate_rank: bool,
    /// Set when the two leading eigenvalues coincide (to 1e-12).
    pub degenerate_weights: bool,
}

impl Rank2Approx {
    pub fn weights(&self) -> (f64, f64) {
        (self.p1, 1.0 - self.p1)
    }

    pub fn dim(&self) -> usize {
        self.psi1.len()
    }
}

/// Keeps the two leading eigenvectors of `rho` with weights set by `scheme`.
pub fn rank2_truncate(rho: &DensityMatrix, scheme: TruncationScheme) -> Rank2Approx {
    let spec = eigh(&rho.hermitian());
    let n = spec.len();
    assert!(n >= 2, "rank-two truncation needs at least a two-dimensional space");
    let l1 = spec.eigenvalues[n - 1];
    let l2 = spec.eigenvalues[n - 2];
    let residual_weight = spec.eigenvalues[..n - 2].iter().sum::<f64>().max(0.0);
    let degenerate_rank = l2 < 1e-14;
    let p1 = if degenerate_rank {
        1.0
    } else {
        match scheme {
            TruncationScheme::Absolute => l1,
            TruncationScheme::Renormalized => l1 / (l1 + l2),
        }
    };
    Rank2Approx {
        p1,
        psi1: spec.vector(n - 1),
        psi2: spec.vector(n - 2),
        residual_weight,
        scheme,
        eigenvalues: [l1, l2],
        degenerate_rank,
        degenerate_weights: (l1 - l2).abs() < 1e-12,
    }
}

/// `Tr(c * A_1 (x) ... (x) A_q)`: connected correlation of single-site observables.
pub fn connected_correlation(c: &CorrelatedRdm<Operator>, observables: &[CMatrix]) -> f64 {
    let op = kron_all(observables.iter());
    (c.operator.matrix() * op).trace().re
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let mut u = q;
    for j in 0..d {
        let rj = r[(j, j)];
        let phase = if rj.norm() > 0.0 { rj / rj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random observable of operator norm one on a site of dimension `d`:
/// `U sigma_z U^dagger` for qubits, a normalized random Hermitian matrix otherwise.
fn random_contraction(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    if d == 2 {
        let u = random_unitary(rng, 2);
        return &u * crate::linalg::pauli_z() * u.adjoint();
    }
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let h = HermitianMatrix::symmetrized(g);
    let scale = h.eigenvalues().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    h.into_matrix().unscale(scale)
}

/// Largest value of `<A_1 ... A_q>^corr - ||c||_1` over `trials` random
/// observables with operator norm one. Non-positive for any valid input.
pub fn correlation_bound_check(c: &CorrelatedRdm<Operator>, trials: usize, seed: u64) -> Result<f64> {
    let bound = corr_norm(c, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = c.operator.dims().to_vec();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let obs: Vec<CMatrix> = dims.iter().map(|&d| random_contraction(&mut rng, d)).collect();
        worst = worst.max(connected_correlation(c, &obs) - bound);
    }
    Ok(worst)
}

fn bloch_observable(theta: f64, phi: f64) -> CMatrix {
    use crate::linalg::{pauli_x, pauli_y, pauli_z};
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    pauli_x().scale(st * cp) + pauli_y().scale(st * sp) + pauli_z().scale(ct)
}

/// Largest connected correlation of unit-norm qubit observables found by a
/// seeded random search followed by coordinate refinement over Bloch angles.
/// For single-qubit observables only the traceless part contributes, so
/// `n . sigma` with a unit vector `n` covers the optimum.
pub fn max_qubit_correlation(c: &CorrelatedRdm<Operator>, starts: usize, seed: u64) -> f64 {
    let q = c.order();
    assert!(c.operator.dims().iter().all(|&d| d == 2), "qubit observables only");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |angles: &[f64]| {
        let obs: Vec<CMatrix> = (0..q).map(|k| bloch_observable(angles[2 * k], angles[2 * k + 1])).collect();
        connected_correlation(c, &obs)
    };
    let mut best = f64::NEG_INFINITY;
    for _ in 0..starts.max(1) {
        let mut x: Vec<f64> = (0..2 * q).map(|_| rng.random::<f64>() * std::f64::consts::PI * 2.0).collect();
        let mut fx = eval(&x);
        let mut step = 0.5;
        while step > 1e-9 {
            let mut improved = false;
            for k in 0..x.len() {
                for s in [step, -step] {
                    x[k] += s;
                    let f = eval(&x);
                    if f > fx {
                        fx = f;
                        improved = true;
                    } else {
                        x[k] -= s;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(fx);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c as cx, kron, pauli_z, ZERO};
    use approx::assert_relative_eq;

    fn ghz(n: usize) -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![ZERO; 1 << n];
        v[0] = cx(s, 0.0);
        v[(1 << n) - 1] = cx(s, 0.0);
        v
    }

    fn ghz_marginal(n_total: usize, q: usize) -> Operator {
        crate::linalg::reduced_from_pure(&ghz(n_total), &vec![2; n_total], &(0..q).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn set_partition_counts() {
        // Bell numbers
        assert_eq!(set_partitions(0b1).len(), 1);
        assert_eq!(set_partitions(0b11).len(), 2);
        assert_eq!(set_partitions(0b111).len(), 5);
        assert_eq!(set_partitions(0b1111).len(), 15);
    }

    #[test]
    fn ghz_pair_cumulant_is_quarter_zz() {
        let rho = ghz_marginal(5, 2);
        let c = correlated_from_joint(&SiteTuple::contiguous(2).unwrap(), &rho).unwrap();
        let expected = kron(&pauli_z(), &pauli_z()).scale(0.25);
        assert!(c.operator.matrix().iter().zip(expected.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
        assert_relative_eq!(c.norm(1.0).unwrap(), 1.0, epsilon = 1e-14);
        let spec = c.spectrum();
        for (got, want) in spec.iter().zip([0.25, 0.25, -0.25, -0.25]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn ghz_three_and_four_site_cumulants() {
        let c3 = correlated_from_joint(&SiteTuple::contiguous(3).unwrap(), &ghz_marginal(6, 3)).unwrap();
        assert!(c3.operator.matrix().iter().all(|z| z.norm() < 1e-15));
        let c4 = correlated_from_joint(&SiteTuple::contiguous(4).unwrap(), &ghz_marginal(6, 4)).unwrap();
        // -1/8 sigma_z^{(x)4}
        let zzzz = kron_all([pauli_z(), pauli_z(), pauli_z(), pauli_z()].iter()).scale(-0.125);
        assert!(c4.operator.matrix().iter().zip(zzzz.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
        assert_relative_eq!(c4.norm(1.0).unwrap(), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn missing_and_inconsistent_marginals() {
        let sites = SiteTuple::contiguous(2).unwrap();
        let rho = ghz_marginal(3, 2);
        let mut m = marginals(&rho).unwrap();
        let ok = correlated_rdm(&sites, &m).unwrap();
        assert!(ok.trace().abs() < 1e-14);

        let mut bad = m.get(&1).unwrap().clone();
        bad.matrix_mut()[(0, 0)] += cx(1e-6, 0.0);
        bad.matrix_mut()[(1, 1)] -= cx(1e-6, 0.0);
        m.insert(1, bad);
        assert!(matches!(correlated_rdm(&sites, &m), Err(Error::InconsistentMarginals { .. })));
        m.remove(&1);
        assert!(matches!(correlated_rdm(&sites, &m), Err(Error::MissingMarginal(_))));
    }

    #[test]
    fn site_tuple_validation() {
        let t = SiteTuple::from_distances(2, &[1, 3, 2]).unwrap();
        assert_eq!(t.sites(), &[2, 3, 6, 8]);
        assert_eq!(t.distances(), vec![1, 3, 2]);
        assert_eq!(t.span(), 7);
        assert!(SiteTuple::new(vec![3, 1]).is_err());
        assert!(SiteTuple::new(vec![0, 1, 2, 3, 4]).is_err());
        assert!(SiteTuple::from_distances(0, &[0]).is_err());
    }

    fn diag_rho(w: &[f64]) -> DensityMatrix {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(w.len(), w.iter().map(|&x| cx(x, 0.0))));
        // pad to 4 = 2x2 when needed
        let dims = if w.len() == 4 { vec![2, 2] } else { vec![w.len()] };
        DensityMatrix::new(Operator::new(dims, m).unwrap()).unwrap()
    }

    #[test]
    fn rank2_truncation_weights() {
        let rho = diag_rho(&[0.6, 0.3, 0.1]);
        let a = rank2_truncate(&rho, TruncationScheme::Absolute);
        assert_relative_eq!(a.p1, 0.6, epsilon = 1e-14);
        assert_relative_eq!(a.weights().1, 0.4, epsilon = 1e-14);
        assert_relative_eq!(a.residual_weight, 0.1, epsilon = 1e-14);
        let r = rank2_truncate(&rho, TruncationScheme::Renormalized);
        assert_relative_eq!(r.p1, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(r.weights().1, 1.0 / 3.0, epsilon = 1e-14);
        let overlap: C64 = a.psi1.iter().zip(&a.psi2).map(|(x, y)| x.conj() * y).sum();
        assert!(overlap.norm() < 1e-12);
    }

    #[test]
    fn rank2_truncation_of_pure_state() {
        let rho = DensityMatrix::from_pure(&ghz(2), vec![2, 2]).unwrap();
        let a = rank2_truncate(&rho, TruncationScheme::Absolute);
        assert!(a.degenerate_rank);
        assert_eq!(a.p1, 1.0);
        assert!(a.residual_weight.abs() < 1e-14);
    }

    #[test]
    fn ghz_pair_zz_saturates_bound() {
        let c = correlated_from_joint(&SiteTuple::contiguous(2).unwrap(), &ghz_marginal(4, 2)).unwrap();
        let corr = connected_correlation(&c, &[pauli_z(), pauli_z()]);
        assert_relative_eq!(corr, 1.0, epsilon = 1e-14);
        assert!(correlation_bound_check(&c, 200, 7).unwrap() <= 1e-10);
    }

    #[test]
    fn product_states_have_vanishing_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in 2..=4 {
            let locals: Vec<CMatrix> = (0..q)
                .map(|_| {
                    let u = random_unitary(&mut rng, 2);
                    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(0.8, 0.0), cx(0.2, 0.0)]));
                    &u * d * u.adjoint()
                })
                .collect();
            let rho = Operator::new(vec![2; q], kron_all(locals.iter())).unwrap();
            let c = correlated_from_joint(&SiteTuple::contiguous(q).unwrap(), &rho).unwrap();
            assert!(c.norm(1.0).unwrap() < 1e-14, "q = {q}");
            assert!(c.spectrum().iter().all(|x| x.abs() < 1e-14));
        }
    }
}
