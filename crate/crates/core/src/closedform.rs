//! Closed-form retrieval statistics and energy levels.
//!
//! After `b` rounds a pattern at Hamming distance `d` from the input keeps
//! the all-zeros control outcome with weight `cos^{2b}(pi d / 2n)`. Summing
//! these weights gives the partition function `Z`, the recognition
//! probability `Z / p` and the output distribution `weight / Z`, which is a
//! Boltzmann distribution at temperature `1 / b` over the energies
//! `E = -2 ln cos(pi d / 2n)`. Everything here runs in the log domain so
//! that `b` in the tens of thousands neither underflows nor overflows.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{log_cos_power, logsumexp, softmax};
use crate::patterns::{BinaryPattern, DistanceSpectrum, MemoryInstance};

/// Recognition probability, partition function and per-pattern output
/// probabilities for one memory, input and `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalStats {
    pub p_rec: f64,
    /// Partition function. May underflow to 0 for huge `b` while the
    /// distribution itself stays well defined.
    pub z: f64,
    /// Natural log of `z`, finite whenever the input can be recognized.
    pub ln_z: f64,
    /// Output probability of stored pattern `k`, in storage order.
    pub per_pattern: Vec<f64>,
}

/// `(1/p) sum_j counts[j] cos^{2b}(pi j / 2n)`.
pub fn recognition_probability(spectrum: &DistanceSpectrum, b: u64) -> f64 {
    let n = spectrum.n();
    let p = spectrum.p() as f64;
    let bf = b as f64;
    let z: f64 = spectrum
        .iter()
        .map(|(d, c)| c as f64 * log_cos_power(d, n, bf).exp())
        .sum();
    (z / p).clamp(0.0, 1.0)
}

/// Output distribution for per-pattern distances (`distances[k]` is the
/// distance of pattern `k` to the input).
pub fn retrieval_distribution_from_distances(
    n: usize,
    distances: &[usize],
    b: u64,
) -> Result<RetrievalStats> {
    if distances.is_empty() {
        return Err(Error::invalid("memory must hold at least one pattern"));
    }
    if let Some(&d) = distances.iter().find(|&&d| d > n) {
        return Err(Error::invalid(format!("distance {d} exceeds width {n}")));
    }
    let bf = b as f64;
    let log_w: Vec<f64> = distances.iter().map(|&d| log_cos_power(d, n, bf)).collect();
    let ln_z = logsumexp(&log_w);
    let per_pattern = softmax(&log_w).ok_or(Error::NeverRecognized)?;
    let z: f64 = log_w.iter().map(|w| w.exp()).sum();
    let p = distances.len() as f64;
    Ok(RetrievalStats {
        p_rec: (z / p).clamp(0.0, 1.0),
        z,
        ln_z,
        per_pattern,
    })
}

pub fn retrieval_distribution(
    mem: &MemoryInstance,
    input: &BinaryPattern,
    b: u64,
) -> Result<RetrievalStats> {
    let distances = mem.distances(input)?;
    retrieval_distribution_from_distances(mem.n(), &distances, b)
}

/// The `b -> infinity` limit of the output distribution: uniform over the
/// patterns at minimal distance, zero elsewhere.
pub fn asymptotic_distribution(distances: &[usize]) -> Vec<f64> {
    let Some(&min) = distances.iter().min() else {
        return Vec::new();
    };
    let ties = distances.iter().filter(|&&d| d == min).count() as f64;
    distances
        .iter()
        .map(|&d| if d == min { 1.0 / ties } else { 0.0 })
        .collect()
}

/// `-2 ln cos(pi d / 2n)`; `+inf` at `d == n`.
pub fn energy_level(d: usize, n: usize) -> f64 {
    assert!(d <= n && n > 0, "distance {d} out of range for width {n}");
    if d == n {
        f64::INFINITY
    } else {
        -crate::numerics::log_cos_sq(d, n)
    }
}

/// Leading small-distance behaviour of [`energy_level`]: `pi^2/4 (d/n)^2`.
pub fn small_distance_energy(d: usize, n: usize) -> f64 {
    let x = d as f64 / n as f64;
    PI * PI / 4.0 * x * x
}

/// Energy level of every stored pattern, in storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySpectrum {
    pub levels: Vec<f64>,
}

pub fn energy_spectrum(mem: &MemoryInstance, input: &BinaryPattern) -> Result<EnergySpectrum> {
    let n = mem.n();
    Ok(EnergySpectrum {
        levels: mem
            .distances(input)?
            .into_iter()
            .map(|d| energy_level(d, n))
            .collect(),
    })
}

/// Infinite-range Ising form of the small-distance energy for a pattern in
/// the frame where the input is all zeros. Each bit is a spin of `-1/2`
/// (bit 0) or `+1/2` (bit 1):
///
/// `pi^2/16 + pi^2/(4 n^2) sum_{i,j} s_i s_j + pi^2/(4 n) sum_i s_i`.
///
/// The antiferromagnetic pair term favours zero magnetization, the field term
/// favours all spins down, and the total equals `pi^2/4 (d/n)^2`.
pub fn ising_energy(pattern: &BinaryPattern) -> f64 {
    let n = pattern.len() as f64;
    let total_spin: f64 = pattern.bits().map(|b| if b { 0.5 } else { -0.5 }).sum();
    let m = total_spin / n;
    // pi^2/4 factored out so the ground state cancels to exactly 0
    PI * PI / 4.0 * (0.25 + m * m + m)
}
