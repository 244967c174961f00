//! Exact state-vector simulation of the retrieval circuit.
//!
//! The state lives on `(memory register, control register)` basis labels.
//! The input register is never put in superposition, so it is carried as
//! classical data and only read when a controlled gate needs it. Amplitudes
//! are kept sparsely: starting from `p` patterns with `b` control qbits the
//! support never exceeds `p * 2^b` labels, whatever the register width.
//!
//! One round on control qbit `c_l` is
//!
//! ```text
//! H(c_l) -> prod_j NOT(m_j) XOR(i_j, m_j) -> exp(i pi H / 2n) -> inverse -> H(c_l)
//! ```
//!
//! and multiplies the `c_l = 0` branch by `cos(pi d / 2n)` and the `c_l = 1`
//! branch by `i sin(pi d / 2n)`, where `d` is the distance of the memory label
//! to the input. The factor `i` is kept; it never shows up in probabilities.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::patterns::{BinaryPattern, MemoryInstance};

/// Default cap on `p * 2^b` amplitudes.
pub const DEFAULT_AMPLITUDE_CAP: u64 = 1 << 24;

/// Largest supported control register.
pub const MAX_CONTROL_QBITS: usize = 62;

/// Basis label: memory register contents plus the control register packed
/// into an integer (control qbit `c_l` is bit `l - 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub memory: BinaryPattern,
    pub control: u64,
}

/// Active control qbit of a round, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundIndex(usize);

impl RoundIndex {
    pub fn new(l: usize, b: usize) -> Result<Self> {
        if l == 0 || l > b {
            return Err(Error::invalid(format!("round index {l} outside 1..={b}")));
        }
        Ok(RoundIndex(l))
    }

    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    fn mask(self) -> u64 {
        1u64 << (self.0 - 1)
    }
}

#[derive(Clone, Debug)]
pub struct QuantumState {
    n: usize,
    b: usize,
    input: BinaryPattern,
    amplitudes: BTreeMap<BasisLabel, Complex64>,
}

fn check_resources(p: usize, b: usize, cap: u64) -> Result<()> {
    if b < 1 {
        return Err(Error::invalid("b must be at least 1"));
    }
    let requested = if b > MAX_CONTROL_QBITS {
        u128::MAX
    } else {
        (p as u128) << b
    };
    if requested > cap as u128 {
        return Err(Error::ResourceCap { requested, cap });
    }
    Ok(())
}

impl QuantumState {
    /// Uniform superposition of the stored patterns with every control qbit
    /// in `|0>`. Duplicated patterns add their amplitudes and the state is
    /// renormalized, so a pattern stored `c` times carries amplitude
    /// proportional to `c`.
    pub fn prepare_initial(mem: &MemoryInstance, input: &BinaryPattern, b: usize) -> Result<Self> {
        Self::prepare_initial_with_cap(mem, input, b, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn prepare_initial_with_cap(
        mem: &MemoryInstance,
        input: &BinaryPattern,
        b: usize,
        cap: u64,
    ) -> Result<Self> {
        mem.check_input(input)?;
        check_resources(mem.p(), b, cap)?;
        let mut multiplicity: BTreeMap<&BinaryPattern, f64> = BTreeMap::new();
        for p in mem.patterns() {
            *multiplicity.entry(p).or_insert(0.0) += 1.0;
        }
        let norm = multiplicity.values().map(|c| c * c).sum::<f64>().sqrt();
        let amplitudes = multiplicity
            .into_iter()
            .map(|(p, c)| {
                (
                    BasisLabel {
                        memory: p.clone(),
                        control: 0,
                    },
                    Complex64::new(c / norm, 0.0),
                )
            })
            .collect();
        Ok(QuantumState {
            n: mem.n(),
            b,
            input: input.clone(),
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn input(&self) -> &BinaryPattern {
        &self.input
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.amplitudes
            .get(label)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn support(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn round(&self, l: usize) -> Result<RoundIndex> {
        RoundIndex::new(l, self.b)
    }

    /// Applies `f` to every label. `f` must be a bijection.
    fn relabel<F: Fn(&mut BasisLabel)>(&mut self, f: F) {
        let old = std::mem::take(&mut self.amplitudes);
        self.amplitudes = old
            .into_iter()
            .map(|(mut label, amp)| {
                f(&mut label);
                (label, amp)
            })
            .collect();
    }

    /// Hadamard on control qbit `c_l`.
    pub fn apply_hadamard_control(&mut self, l: usize) -> Result<()> {
        let mask = self.round(l)?.mask();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut out: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in std::mem::take(&mut self.amplitudes) {
            let was_one = label.control & mask != 0;
            let zero = BasisLabel {
                memory: label.memory.clone(),
                control: label.control & !mask,
            };
            let one = BasisLabel {
                memory: label.memory,
                control: label.control | mask,
            };
            *out.entry(zero).or_default() += amp * h;
            *out.entry(one).or_default() += if was_one { -amp * h } else { amp * h };
        }
        out.retain(|_, a| a.norm_sqr() != 0.0);
        self.amplitudes = out;
        Ok(())
    }

    /// `NOT` on memory qbit `m_j` (0-based).
    pub fn apply_not(&mut self, j: usize) {
        assert!(j < self.n);
        self.relabel(|label| label.memory.flip(j));
    }

    /// `XOR(i_j, m_j)`: flips memory qbit `m_j` when input qbit `i_j` is 1.
    pub fn apply_input_xor(&mut self, j: usize) {
        assert!(j < self.n);
        if self.input.get(j) {
            self.relabel(|label| label.memory.flip(j));
        }
    }

    /// `prod_{j=1..n} NOT(m_j) XOR(i_j, m_j)`. Afterwards memory qbit `j` is 1
    /// exactly when it agrees with the input, so the number of zeros in the
    /// memory register is the Hamming distance to the input.
    pub fn apply_distance_transform(&mut self) {
        for j in 0..self.n {
            self.apply_input_xor(j);
            self.apply_not(j);
        }
    }

    /// `prod_{j=n..1} XOR(i_j, m_j) NOT(m_j)`, undoing [`Self::apply_distance_transform`].
    pub fn apply_inverse_distance_transform(&mut self) {
        for j in (0..self.n).rev() {
            self.apply_not(j);
            self.apply_input_xor(j);
        }
    }

    /// `exp(i pi H / 2n)` with `H = (number of zeros in m) (x) sigma_3(c_l)`.
    pub fn apply_phase(&mut self, l: usize) -> Result<()> {
        let mask = self.round(l)?.mask();
        let scale = PI / (2.0 * self.n as f64);
        for (label, amp) in self.amplitudes.iter_mut() {
            let zeros = label.memory.count_zeros();
            if zeros == 0 {
                continue;
            }
            let sign = if label.control & mask == 0 { 1.0 } else { -1.0 };
            *amp *= Complex64::from_polar(1.0, sign * scale * zeros as f64);
        }
        Ok(())
    }

    /// One full round on control qbit `c_l`.
    pub fn run_round(&mut self, l: usize) -> Result<()> {
        self.apply_hadamard_control(l)?;
        self.apply_distance_transform();
        self.apply_phase(l)?;
        self.apply_inverse_distance_transform();
        self.apply_hadamard_control(l)
    }

    /// Prepares the initial state and runs rounds `1..=b`.
    pub fn run_all_rounds(mem: &MemoryInstance, input: &BinaryPattern, b: usize) -> Result<Self> {
        Self::run_all_rounds_with_cap(mem, input, b, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn run_all_rounds_with_cap(
        mem: &MemoryInstance,
        input: &BinaryPattern,
        b: usize,
        cap: u64,
    ) -> Result<Self> {
        let mut state = Self::prepare_initial_with_cap(mem, input, b, cap)?;
        for l in 1..=b {
            state.run_round(l)?;
        }
        Ok(state)
    }

    /// Marginal probability of each control-register outcome.
    pub fn control_marginals(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (label, amp) in &self.amplitudes {
            *out.entry(label.control).or_insert(0.0) += amp.norm_sqr();
        }
        out
    }

    /// Probability of reading every control qbit as `|0>`.
    pub fn prob_all_zeros(&self) -> f64 {
        self.amplitudes
            .iter()
            .filter(|(label, _)| label.control == 0)
            .map(|(_, amp)| amp.norm_sqr())
            .sum()
    }

    /// Projects onto control outcome `outcome` and renormalizes. Returns
    /// `None` if that outcome has probability zero.
    pub fn project_control(&self, outcome: u64) -> Option<QuantumState> {
        let kept: BTreeMap<BasisLabel, Complex64> = self
            .amplitudes
            .iter()
            .filter(|(label, _)| label.control == outcome)
            .map(|(l, a)| (l.clone(), *a))
            .collect();
        let norm_sqr: f64 = kept.values().map(|a| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return None;
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Some(QuantumState {
            n: self.n,
            b: self.b,
            input: self.input.clone(),
            amplitudes: kept.into_iter().map(|(l, a)| (l, a * scale)).collect(),
        })
    }

    /// Samples a control-register outcome and collapses the state onto it.
    pub fn measure_control<R: Rng + ?Sized>(&self, rng: &mut R) -> ControlMeasurement {
        let marginals = self.control_marginals();
        let total: f64 = marginals.values().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = *marginals.keys().next_back().expect("state has support");
        for (&c, &p) in &marginals {
            acc += p;
            if u < acc {
                outcome = c;
                break;
            }
        }
        let probability = marginals[&outcome] / total;
        ControlMeasurement {
            outcome,
            probability,
            prob_all_zeros: self.prob_all_zeros(),
            collapsed: self
                .project_control(outcome)
                .expect("sampled outcome has positive probability"),
        }
    }

    /// Output distribution of a memory-register measurement on a state that
    /// has been collapsed onto the all-zeros control outcome.
    pub fn memory_distribution(&self) -> Result<BTreeMap<BinaryPattern, f64>> {
        if self.amplitudes.keys().any(|label| label.control != 0) {
            return Err(Error::NotCollapsedOnZero);
        }
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::NotCollapsedOnZero);
        }
        let mut out = BTreeMap::new();
        for (label, amp) in &self.amplitudes {
            *out.entry(label.memory.clone()).or_insert(0.0) += amp.norm_sqr() / total;
        }
        Ok(out)
    }
}

/// Result of measuring the control register.
#[derive(Clone, Debug)]
pub struct ControlMeasurement {
    pub outcome: u64,
    /// Probability of the sampled outcome.
    pub probability: f64,
    pub prob_all_zeros: f64,
    pub collapsed: QuantumState,
}
