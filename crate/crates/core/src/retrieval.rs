//! Monte Carlo simulation of the repeat-until-success retrieval protocol.
//!
//! Each attempt runs the deterministic circuit on a fresh copy of the memory
//! and measures the control register. The all-zeros outcome (probability
//! `P_rec`) triggers a memory readout; anything else discards the state and
//! tries again. After `T` failed attempts the input is rejected. Attempts are
//! sampled from the closed-form distributions.

use std::collections::BTreeMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{retrieval_distribution, RetrievalStats};
use crate::error::{Error, Result};
use crate::patterns::{BinaryPattern, MemoryInstance};

/// Trials per independent random stream in [`run_trials`].
const TRIALS_PER_STREAM: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolResult {
    pub recognized: bool,
    pub attempts_used: u64,
    pub output: Option<BinaryPattern>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub trials: u64,
    pub recognized: u64,
    pub recognition_rate: f64,
    /// Mean attempts over all trials; rejected trials count `T`.
    pub mean_attempts: f64,
    /// Mean attempts over recognized trials only (`null` if none).
    pub mean_attempts_recognized: Option<f64>,
    /// Output pattern (as a bitstring) to number of times it was read out.
    pub output_histogram: BTreeMap<String, u64>,
}

/// Precomputed sampler for one `(memory, input, b)` triple.
#[derive(Clone, Debug)]
pub struct Protocol {
    patterns: Vec<BinaryPattern>,
    p_rec: f64,
    output: Option<WeightedIndex<f64>>,
    threshold: u64,
}

impl Protocol {
    pub fn new(
        mem: &MemoryInstance,
        input: &BinaryPattern,
        b: u64,
        threshold: u64,
    ) -> Result<Self> {
        if threshold < 1 {
            return Err(Error::invalid("threshold T must be at least 1"));
        }
        if b < 1 {
            return Err(Error::invalid("b must be at least 1"));
        }
        let (p_rec, output) = match retrieval_distribution(mem, input, b) {
            Ok(RetrievalStats {
                p_rec, per_pattern, ..
            }) => {
                let idx = WeightedIndex::new(&per_pattern)
                    .map_err(|e| Error::invalid(format!("output distribution: {e}")))?;
                (p_rec, Some(idx))
            }
            Err(Error::NeverRecognized) => (0.0, None),
            Err(e) => return Err(e),
        };
        Ok(Protocol {
            patterns: mem.patterns().to_vec(),
            p_rec,
            output,
            threshold,
        })
    }

    pub fn recognition_probability(&self) -> f64 {
        self.p_rec
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> ProtocolResult {
        if let Some(output) = &self.output {
            for attempt in 1..=self.threshold {
                if rng.random::<f64>() < self.p_rec {
                    let k = output.sample(rng);
                    return ProtocolResult {
                        recognized: true,
                        attempts_used: attempt,
                        output: Some(self.patterns[k].clone()),
                    };
                }
            }
        }
        ProtocolResult {
            recognized: false,
            attempts_used: self.threshold,
            output: None,
        }
    }
}

/// One run of the protocol with threshold `threshold`.
pub fn run_protocol<R: Rng + ?Sized>(
    mem: &MemoryInstance,
    input: &BinaryPattern,
    b: u64,
    threshold: u64,
    rng: &mut R,
) -> Result<ProtocolResult> {
    Ok(Protocol::new(mem, input, b, threshold)?.run(rng))
}

#[derive(Default)]
struct Tally {
    recognized: u64,
    attempts: u64,
    attempts_recognized: u64,
    histogram: BTreeMap<String, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.recognized += other.recognized;
        self.attempts += other.attempts;
        self.attempts_recognized += other.attempts_recognized;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Runs `trials` independent protocols. Trials are split into fixed blocks,
/// each with its own ChaCha stream derived from `seed`, so the result does
/// not depend on the thread count.
pub fn run_trials(
    mem: &MemoryInstance,
    input: &BinaryPattern,
    b: u64,
    threshold: u64,
    trials: u64,
    seed: u64,
) -> Result<ProtocolStats> {
    if trials < 1 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let protocol = Protocol::new(mem, input, b, threshold)?;
    let streams = trials.div_ceil(TRIALS_PER_STREAM);
    let tally = (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let start = stream * TRIALS_PER_STREAM;
            let end = (start + TRIALS_PER_STREAM).min(trials);
            let mut t = Tally::default();
            for _ in start..end {
                let r = protocol.run(&mut rng);
                t.attempts += r.attempts_used;
                if let Some(out) = r.output {
                    t.recognized += 1;
                    t.attempts_recognized += r.attempts_used;
                    *t.histogram.entry(out.to_string()).or_insert(0) += 1;
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    Ok(ProtocolStats {
        trials,
        recognized: tally.recognized,
        recognition_rate: tally.recognized as f64 / trials as f64,
        mean_attempts: tally.attempts as f64 / trials as f64,
        mean_attempts_recognized: (tally.recognized > 0)
            .then(|| tally.attempts_recognized as f64 / tally.recognized as f64),
        output_histogram: tally.histogram,
    })
}

/// `1 - (1 - q)^T`: probability of recognition within `T` attempts.
pub fn recognition_within(q: f64, threshold: u64) -> f64 {
    -(threshold as f64 * (-q).ln_1p()).exp_m1()
}

/// Expected attempts per trial when rejected trials count `T`:
/// `(1 - (1 - q)^T) / q`, tending to `1 / q` as `T` grows.
pub fn expected_attempts(q: f64, threshold: u64) -> f64 {
    if q == 0.0 {
        return threshold as f64;
    }
    recognition_within(q, threshold) / q
}

/// Expected attempts conditional on recognition (truncated geometric mean).
pub fn expected_attempts_given_recognized(q: f64, threshold: u64) -> f64 {
    let t = threshold as f64;
    let success = recognition_within(q, threshold);
    let tail = (t * (-q).ln_1p()).exp();
    1.0 / q - t * tail / success
}
