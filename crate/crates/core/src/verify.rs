//! Cross-engine consistency checks run by `entcorr verify`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::bosehubbard::{BlockOp, BoseSystem};
use crate::cumulants::{correlated_from_joint, set_partitions, CorrelatedRdm, LocalOperator, SiteTuple};
use crate::error::Result;
use crate::ising::{
    ed_ground_state, majorana_correlations, rdm_from_contractions, Basis, ChainLength, Pauli, XyParams,
};
use crate::linalg::{c, kron_all, pfaffian, reduced_from_pure, AntisymmetricMatrix, Operator};
use crate::tangles::{
    apply_local, four_qubit_invariant, hyperdeterminant, random_pure, random_sl2, sample_rng, FourQubitInvariant,
    SamplingMethod,
};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    /// Largest deviation observed.
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation.is_finite() && self.deviation <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Added to one entry of every free-fermion contraction matrix.
    pub perturb_m: f64,
    /// Chain length of the free-fermion vs ED comparison.
    pub ed_length: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 7, perturb_m: 0.0, ed_length: 12 }
    }
}

fn free_fermion_vs_ed(opts: &VerifyOptions) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut at = String::new();
    let tuples = [vec![0, 1], vec![0, 2], vec![0, 1, 2], vec![0, 1, 2, 3], vec![0, 1, 3, 4]];
    for j in [0.3, 0.8, 1.0, 1.5] {
        let params = XyParams::new(j, 1.0, ChainLength::Finite(opts.ed_length), Basis::Ising)?;
        let ed = ed_ground_state(&params)?;
        for sites in &tuples {
            let t = SiteTuple::new(sites.clone())?;
            let mut m = majorana_correlations(&params, t.span())?;
            if opts.perturb_m != 0.0 {
                m.set(0, 3, m.get(0, 3) + opts.perturb_m);
            }
            let ff = rdm_from_contractions(&m, Basis::Ising, &t)?;
            let d = ff.max_abs_diff(ed.reduced_dm(&t)?.operator());
            if d > worst {
                worst = d;
                at = format!("J = {j}, sites {sites:?}");
            }
        }
    }
    Ok(Check {
        name: "free-fermion RDM equals ED RDM",
        deviation: worst,
        tolerance: 1e-10,
        detail: format!("L = {}, worst at {at}", opts.ed_length),
    })
}

/// Joint cumulant of commuting single-site observables from raw moments.
fn scalar_cumulant(q: usize, moment: impl Fn(u32) -> f64) -> f64 {
    let full = (1u32 << q) - 1;
    set_partitions(full)
        .iter()
        .map(|blocks| {
            let k = blocks.len();
            let weight = (1..k).map(|x| x as f64).product::<f64>() * if k % 2 == 1 { 1.0 } else { -1.0 };
            weight * blocks.iter().map(|&b| moment(b)).product::<f64>()
        })
        .sum()
}

fn cumulant_vs_moments(opts: &VerifyOptions) -> Result<Check> {
    let mut worst = 0.0f64;
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    for j in [0.4, 0.9, 1.3] {
        let params = XyParams::new(j, 1.0, ChainLength::Finite(10), Basis::Ising)?;
        let ed = ed_ground_state(&params)?;
        for sites in [vec![0, 1, 2], vec![0, 2, 3], vec![0, 1, 2, 3]] {
            let t = SiteTuple::new(sites.clone())?;
            let corr = correlated_from_joint(&t, ed.reduced_dm(&t)?.operator())?;
            let q = sites.len();
            for code in 0..3usize.pow(q as u32) {
                let word: Vec<Pauli> = (0..q).map(|k| letters[(code / 3usize.pow(k as u32)) % 3]).collect();
                let moment = |mask: u32| {
                    let (s, l): (Vec<usize>, Vec<Pauli>) =
                        (0..q).filter(|k| mask >> (q - 1 - k) & 1 == 1).map(|k| (sites[k], word[k])).unzip();
                    ed.expectation(&s, &l)
                };
                let oracle = scalar_cumulant(q, moment);
                worst = worst.max((trace_against(&corr, &word) - oracle).abs());
            }
        }
    }
    let _ = opts;
    Ok(Check {
        name: "operator cumulant equals moment-cumulant formula",
        deviation: worst,
        tolerance: 1e-10,
        detail: "ED chains L = 10, all X/Y/Z words on q = 3, 4".into(),
    })
}

fn trace_against(corr: &CorrelatedRdm<Operator>, word: &[Pauli]) -> f64 {
    let mats: Vec<_> = word.iter().map(|p| p.matrix()).collect();
    let s = kron_all(&mats);
    (corr.operator.matrix() * s).trace().re
}

fn pfaffian_vs_determinant(opts: &VerifyOptions) -> Result<Check> {
    let mut rng = sample_rng(opts.seed, 1);
    let mut worst = 0.0f64;
    for n in [2usize, 4, 6, 8, 12, 16] {
        for _ in 0..20 {
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for k in i + 1..n {
                    let x = rng.random::<f64>() * 2.0 - 1.0;
                    a[(i, k)] = x;
                    a[(k, i)] = -x;
                }
            }
            let pf = pfaffian(&AntisymmetricMatrix::from_dense(&a)?)?;
            let det = a.determinant();
            worst = worst.max((pf * pf - det).abs() / det.abs().max(1.0));
        }
    }
    let params = XyParams::ising(0.9);
    let m = majorana_correlations(&params, 4)?;
    let pf = pfaffian(&m)?;
    worst = worst.max((pf * pf - m.to_dense().determinant()).abs());
    Ok(Check {
        name: "Pfaffian squared equals determinant",
        deviation: worst,
        tolerance: 1e-10,
        detail: "random orders 2..16 and a chain M".into(),
    })
}

fn sl_invariance(opts: &VerifyOptions) -> Result<Check> {
    let mut worst = 0.0f64;
    for k in 0..10 {
        let mut rng = sample_rng(opts.seed, 100 + k);
        let psi3 = random_pure(3, opts.seed.wrapping_add(k), SamplingMethod::Haar)?;
        let ops3: Vec<_> = (0..3).map(|_| random_sl2(&mut rng)).collect();
        let a = hyperdeterminant(psi3.amplitudes());
        let b = hyperdeterminant(&apply_local(psi3.amplitudes(), &ops3));
        worst = worst.max((a - b).norm() / a.norm().max(1e-3));
        let psi4 = random_pure(4, opts.seed.wrapping_add(k), SamplingMethod::Haar)?;
        let ops4: Vec<_> = (0..4).map(|_| random_sl2(&mut rng)).collect();
        let moved = apply_local(psi4.amplitudes(), &ops4);
        for which in [FourQubitInvariant::H, FourQubitInvariant::F1, FourQubitInvariant::F3] {
            let a = four_qubit_invariant(psi4.amplitudes(), which)?;
            let b = four_qubit_invariant(&moved, which)?;
            worst = worst.max((a - b).norm() / a.norm().max(1e-3));
        }
    }
    Ok(Check {
        name: "tangle polynomials are SL(2) invariant",
        deviation: worst,
        tolerance: 1e-8,
        detail: "hyperdeterminant, H, F1, F3 under random local SL(2)".into(),
    })
}

fn bose_blocks_vs_dense(_: &VerifyOptions) -> Result<Check> {
    let sys = BoseSystem::new(5, 5)?;
    let gs = sys.ground_state(0.3)?;
    let base = 6usize;
    let mut amps = vec![c(0.0, 0.0); base.pow(5)];
    for (i, a) in gs.amplitudes.iter().enumerate() {
        amps[sys.basis.code(i) as usize] = c(*a, 0.0);
    }
    let mut worst = 0.0f64;
    for sites in [vec![0, 1], vec![0, 2, 3], vec![0, 1, 2, 4]] {
        let t = SiteTuple::new(sites.clone())?;
        let dense = reduced_from_pure(&amps, &[base; 5], &sites)?;
        let blocks = gs.rdm(&t)?;
        worst = worst.max(blocks.op.to_dense().max_abs_diff(&dense));
        let cd = correlated_from_joint(&t, &dense)?;
        let cb = blocks.correlated()?;
        worst = worst.max(cb.operator.max_abs_diff(&BlockOp::from_dense(&cd.operator, 5)?));
    }
    Ok(Check {
        name: "boson-number blocks equal dense partial trace",
        deviation: worst,
        tolerance: 1e-12,
        detail: "N = L = 5, J = 0.3, RDMs and cumulants".into(),
    })
}

/// Runs every check; errors inside a check are reported as failures.
pub fn run_suite(opts: &VerifyOptions) -> Vec<Check> {
    type CheckFn = fn(&VerifyOptions) -> Result<Check>;
    let checks: [(&'static str, CheckFn); 5] = [
        ("free-fermion RDM equals ED RDM", free_fermion_vs_ed),
        ("operator cumulant equals moment-cumulant formula", cumulant_vs_moments),
        ("Pfaffian squared equals determinant", pfaffian_vs_determinant),
        ("tangle polynomials are SL(2) invariant", sl_invariance),
        ("boson-number blocks equal dense partial trace", bose_blocks_vs_dense),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            f(opts).unwrap_or_else(|e| Check {
                name,
                deviation: f64::INFINITY,
                tolerance: 0.0,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}
