#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use collisional::*;

pub const BETA: f64 = 0.1;

pub fn chain(epsilon: f64) -> ChainSpec64 {
    ChainSpec64::reference_defaults().with_epsilon(epsilon)
}

pub fn chain_with(n_qubits: usize, epsilon: f64, sigma_p: f64) -> ChainSpec64 {
    ChainSpec64 { n_qubits, sigma_p, ..ChainSpec64::reference_defaults() }.with_epsilon(epsilon)
}

type Key = (Variant, u64, u64);

/// Tensors at reference parameters, assembled once per test binary.
pub fn tensor(variant: Variant, epsilon: f64) -> Arc<CollisionTensor64> {
    tensor_sigma(variant, epsilon, 0.5)
}

pub fn tensor_sigma(variant: Variant, epsilon: f64, sigma_p: f64) -> Arc<CollisionTensor64> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<CollisionTensor64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (variant, epsilon.to_bits(), sigma_p.to_bits());
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let spec = chain_with(3, epsilon, sigma_p);
    let s = spectrum(&spec).unwrap();
    let t = Arc::new(assemble_tensor(&spec, &s, variant, &QuadratureConfig::default()).unwrap());
    cache.lock().unwrap().entry(key).or_insert(t).clone()
}

pub fn spectrum_at(epsilon: f64) -> Spectrum64 {
    spectrum(&chain(epsilon)).unwrap()
}

/// `n` log-spaced points from `10^lo` to `10^hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

pub fn ground_in_eigenbasis(s: &Spectrum64) -> DensityMatrix64 {
    product_state::<f64>(&"0".repeat(s.n_qubits), s.n_qubits).unwrap().in_eigenbasis(s)
}
