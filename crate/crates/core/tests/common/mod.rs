#![allow(dead_code)]

use rand::Rng;

use npp::Instance;

/// `min |Σ_A − Σ_rest|` over all subsets by plain bitmask enumeration.
pub fn brute_min(w: &[u64]) -> u64 {
    assert!(w.len() <= 24);
    let total: u64 = w.iter().sum();
    (0u32..1 << w.len())
        .map(|mask| {
            let a: u64 = (0..w.len()).filter(|&i| mask >> i & 1 == 1).map(|i| w[i]).sum();
            (2 * a).abs_diff(total)
        })
        .min()
        .unwrap()
}

/// `min |Σ ±e_k|` over all sign vectors.
pub fn min_signed_sum(e: &[u64]) -> u64 {
    (0u32..1 << e.len())
        .map(|mask| {
            let s: i128 = (0..e.len())
                .map(|k| if mask >> k & 1 == 1 { e[k] as i128 } else { -(e[k] as i128) })
                .sum();
            s.unsigned_abs() as u64
        })
        .min()
        .unwrap()
}

/// `xᵀQx` straight from the entry formula `Q_ij = w_i·w_j`, `Q_ii = w_i(w_i − c)`.
pub fn quadratic_form(w: &[u64], x: &[bool]) -> i128 {
    let c: i128 = w.iter().map(|&v| v as i128).sum();
    let mut e = 0i128;
    for i in 0..w.len() {
        for j in 0..w.len() {
            if x[i] && x[j] {
                let (a, b) = (w[i] as i128, w[j] as i128);
                e += if i == j { a * (a - c) } else { a * b };
            }
        }
    }
    e
}

pub fn random_weights(seed: u64, n: usize, max: u64) -> Vec<u64> {
    let mut rng = npp::seed::rng(seed);
    (0..n).map(|_| rng.gen_range(1..=max)).collect()
}

pub fn random_instance(seed: u64, n: usize, max: u64) -> Instance {
    Instance::new(random_weights(seed, n, max)).unwrap()
}

pub fn example() -> Instance {
    Instance::new(vec![1, 1, 3, 4, 5, 6]).unwrap()
}
