//! Browser bindings. Every function returns a JSON string so the page needs
//! no generated type glue beyond the raw wasm-bindgen shim.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use entcorr::bosehubbard::BoseSystem;
use entcorr::cumulants::SiteTuple;
use entcorr::ising::{ising_point as ising_rows, IsingSweepConfig};
use entcorr::tangles::{scatter_dataset, SamplingMethod};

/// Largest Bose-Hubbard Fock space the page will diagonalize.
const BROWSER_FOCK_MAX: f64 = 50_000.0;

#[derive(Serialize)]
struct Norms {
    q: usize,
    norm1: f64,
    norm2: f64,
}

#[derive(Serialize)]
struct IsingPoint {
    j: f64,
    c2: f64,
    sqrt_tau3: f64,
    tau4: f64,
    norms: Vec<Norms>,
}

#[derive(Serialize)]
struct Scatter {
    tangle: Vec<f64>,
    corr_norm1: Vec<f64>,
}

#[derive(Serialize)]
struct BosePoint {
    j: f64,
    energy: f64,
    norms: Vec<Norms>,
}

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(fail)
}

/// Tangles and correlated-state norms of nearest-neighbour blocks of the
/// infinite transverse Ising chain.
#[wasm_bindgen]
pub fn ising_point(j: f64) -> Result<String, JsError> {
    let mut cfg = IsingSweepConfig::new(vec![j]);
    cfg.tangles = true;
    cfg.norm_orders = vec![1.0, 2.0];
    cfg.norm_tuples = (2..=4).map(|q| SiteTuple::contiguous(q).map_err(fail)).collect::<Result<_, _>>()?;
    let rows = ising_rows(&cfg, j).map_err(fail)?;
    let pick =
        |name: &str, q: usize| rows.iter().find(|r| r.quantity == name && r.q == q).map_or(f64::NAN, |r| r.value);
    let norms = (2..=4).map(|q| Norms { q, norm1: pick("corr_norm1", q), norm2: pick("corr_norm2", q) }).collect();
    to_json(&IsingPoint { j, c2: pick("C2", 2), sqrt_tau3: pick("sqrt_tau3", 3), tau4: pick("tau4", 4), norms })
}

/// Random pure states of three or four qubits: genuine tangle against the
/// one-norm of the fully correlated part.
#[wasm_bindgen]
pub fn scatter(qubits: usize, samples: usize, seed: u64) -> Result<String, JsError> {
    let method = if qubits == 3 { SamplingMethod::Acin3 } else { SamplingMethod::Haar };
    let rows = scatter_dataset(qubits, samples, seed, method).map_err(fail)?;
    to_json(&Scatter {
        tangle: rows.iter().map(|r| r.tangle).collect(),
        corr_norm1: rows.iter().map(|r| r.corr_norm1).collect(),
    })
}

/// Ground state of a small periodic Bose-Hubbard ring and the norms of its
/// correlated nearest-neighbour blocks.
#[wasm_bindgen]
pub fn bose_hubbard(particles: usize, sites: usize, j: f64) -> Result<String, JsError> {
    if entcorr::bosehubbard::fock_dimension(particles, sites) > BROWSER_FOCK_MAX {
        return Err(JsError::new("system too large for the browser demo"));
    }
    let gs = BoseSystem::new(particles, sites).and_then(|s| s.ground_state(j)).map_err(fail)?;
    let mut norms = Vec::new();
    for q in 2..=4.min(sites) {
        let corr = SiteTuple::contiguous(q).and_then(|t| gs.rdm(&t)).and_then(|r| r.correlated()).map_err(fail)?;
        norms.push(Norms { q, norm1: corr.norm(1.0).map_err(fail)?, norm2: corr.norm(2.0).map_err(fail)? });
    }
    to_json(&BosePoint { j, energy: gs.energy, norms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_point_reports_all_blocks() {
        let v: serde_json::Value = serde_json::from_str(&ising_point(0.8).unwrap()).unwrap();
        assert!((v["c2"].as_f64().unwrap() - 0.258).abs() < 1e-3);
        assert_eq!(v["norms"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn bose_hubbard_small_ring() {
        let v: serde_json::Value = serde_json::from_str(&bose_hubbard(4, 4, 0.1).unwrap()).unwrap();
        let n = v["norms"].as_array().unwrap();
        assert!(n[0]["norm2"].as_f64().unwrap() > n[1]["norm2"].as_f64().unwrap());
    }

    #[test]
    fn scatter_lengths() {
        let v: serde_json::Value = serde_json::from_str(&scatter(3, 20, 1).unwrap()).unwrap();
        assert_eq!(v["tangle"].as_array().unwrap().len(), 20);
    }
}
