#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use qamem::patterns::{BinaryPattern, MemoryInstance};
use rand::Rng;

/// Random memory of `p` distinct patterns of width `n` (requires `p <= 2^n`).
pub fn distinct_memory<R: Rng>(rng: &mut R, n: usize, p: usize) -> MemoryInstance {
    assert!(n < 64 && p as u64 <= 1u64 << n);
    let mut seen = BTreeSet::new();
    while seen.len() < p {
        seen.insert(rng.random_range(0..1u64 << n));
    }
    let mut pats: Vec<BinaryPattern> = seen
        .into_iter()
        .map(|v| BinaryPattern::from_u64(v, n))
        .collect();
    // storage order should not be sorted
    for i in (1..pats.len()).rev() {
        pats.swap(i, rng.random_range(0..=i));
    }
    MemoryInstance::new(pats).unwrap()
}

pub fn random_pattern<R: Rng>(rng: &mut R, n: usize) -> BinaryPattern {
    BinaryPattern::from_bits((0..n).map(|_| rng.random::<bool>())).unwrap()
}

/// `cos^2(pi d / 2n)`.
pub fn cos2(d: usize, n: usize) -> f64 {
    (PI * d as f64 / (2 * n) as f64).cos().powi(2)
}

/// `sin^2(pi d / 2n)`.
pub fn sin2(d: usize, n: usize) -> f64 {
    (PI * d as f64 / (2 * n) as f64).sin().powi(2)
}

/// Squared amplitude of `|p; c>` after `b` rounds for a pattern at distance
/// `d`: `(1/p) cos^{2(b - |c|)} sin^{2|c|}`.
pub fn closed_form_amp_sqr(p: usize, d: usize, n: usize, b: usize, control: u64) -> f64 {
    let ones = control.count_ones() as i32;
    cos2(d, n).powi(b as i32 - ones) * sin2(d, n).powi(ones) / p as f64
}
