//! Binary patterns, Hamming distances and pattern-file ingestion.
//!
//! Patterns are packed into 64-bit words so that distances cost one XOR and
//! one popcount per word. Bit `j` of a pattern lives in word `j / 64` at
//! position `j % 64`; bits past `n` in the last word are always zero.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A fixed-length bit string: one stored pattern or an input.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPattern {
    n: usize,
    words: Vec<u64>,
}

impl BinaryPattern {
    /// All-zeros pattern of width `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "pattern width must be positive");
        BinaryPattern {
            n,
            words: vec![0; n.div_ceil(WORD)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let bits: Vec<bool> = bits.into_iter().collect();
        if bits.is_empty() {
            return Err(Error::invalid("pattern width must be positive"));
        }
        let mut p = BinaryPattern::zeros(bits.len());
        for (j, &bit) in bits.iter().enumerate() {
            p.set(j, bit);
        }
        Ok(p)
    }

    /// Builds a pattern from the low `n` bits of `value` (bit 0 is qbit 0).
    pub fn from_u64(value: u64, n: usize) -> Self {
        assert!((1..=WORD).contains(&n));
        let mask = if n == WORD { u64::MAX } else { (1u64 << n) - 1 };
        BinaryPattern {
            n,
            words: vec![value & mask],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a pattern has at least one bit.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(
            j < self.n,
            "bit index {j} out of range for width {}",
            self.n
        );
        (self.words[j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, bit: bool) {
        assert!(
            j < self.n,
            "bit index {j} out of range for width {}",
            self.n
        );
        let mask = 1u64 << (j % WORD);
        if bit {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(
            j < self.n,
            "bit index {j} out of range for width {}",
            self.n
        );
        self.words[j / WORD] ^= 1u64 << (j % WORD);
    }

    /// Number of ones; for a pattern normalized to an all-zeros input this
    /// is its Hamming distance to the input.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.n - self.count_ones()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |j| self.get(j))
    }

    /// Bitwise XOR (addition modulo 2).
    pub fn xor(&self, other: &BinaryPattern) -> Result<BinaryPattern> {
        self.check_width(other)?;
        Ok(BinaryPattern {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Bitwise complement within the `n` valid bits.
    pub fn complement(&self) -> BinaryPattern {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_padding();
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.n % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn check_width(&self, other: &BinaryPattern) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

impl fmt::Display for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.bits() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryPattern({self})")
    }
}

impl FromStr for BinaryPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bitstring(s, 1)
    }
}

fn parse_bitstring(s: &str, line: usize) -> Result<BinaryPattern> {
    if s.is_empty() {
        return Err(Error::Parse {
            line,
            message: "empty pattern".into(),
        });
    }
    let mut p = BinaryPattern::zeros(s.len());
    for (j, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => p.set(j, true),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("illegal character {other:?} at column {}", j + 1),
                })
            }
        }
    }
    Ok(p)
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &BinaryPattern, b: &BinaryPattern) -> Result<usize> {
    a.check_width(b)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

/// A set of `p >= 1` stored patterns of common width `n`. Duplicates are
/// kept and counted with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryInstance {
    patterns: Vec<BinaryPattern>,
}

impl MemoryInstance {
    pub fn new(patterns: Vec<BinaryPattern>) -> Result<Self> {
        let first = patterns
            .first()
            .ok_or_else(|| Error::invalid("memory must hold at least one pattern"))?;
        let n = first.len();
        for p in &patterns {
            if p.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.len(),
                });
            }
        }
        Ok(MemoryInstance { patterns })
    }

    pub fn patterns(&self) -> &[BinaryPattern] {
        &self.patterns
    }

    /// Number of stored patterns.
    pub fn p(&self) -> usize {
        self.patterns.len()
    }

    /// Pattern width.
    pub fn n(&self) -> usize {
        self.patterns[0].len()
    }

    pub(crate) fn check_input(&self, input: &BinaryPattern) -> Result<()> {
        if input.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: input.len(),
            });
        }
        Ok(())
    }

    /// Hamming distance from `input` to each stored pattern, in storage order.
    pub fn distances(&self, input: &BinaryPattern) -> Result<Vec<usize>> {
        self.check_input(input)?;
        self.patterns
            .iter()
            .map(|p| hamming_distance(p, input))
            .collect()
    }
}

/// XORs every stored pattern with `input`, moving the input to the all-zeros
/// pattern. All pairwise distances are unchanged.
pub fn normalize_to_input(mem: &MemoryInstance, input: &BinaryPattern) -> Result<MemoryInstance> {
    mem.check_input(input)?;
    let patterns = mem
        .patterns
        .iter()
        .map(|p| p.xor(input))
        .collect::<Result<Vec<_>>>()?;
    Ok(MemoryInstance { patterns })
}

/// Histogram of Hamming distances from a fixed input to the stored patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceSpectrum {
    n: usize,
    counts: BTreeMap<usize, u64>,
}

impl DistanceSpectrum {
    /// Builds a spectrum from explicit per-pattern distances.
    pub fn from_distances<I: IntoIterator<Item = usize>>(n: usize, distances: I) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("pattern width must be positive"));
        }
        let mut counts = BTreeMap::new();
        for d in distances {
            if d > n {
                return Err(Error::invalid(format!("distance {d} exceeds width {n}")));
            }
            *counts.entry(d).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Err(Error::invalid("spectrum must cover at least one pattern"));
        }
        Ok(DistanceSpectrum { n, counts })
    }

    /// Builds a spectrum from `(distance, count)` pairs; zero counts are dropped.
    pub fn from_counts<I: IntoIterator<Item = (usize, u64)>>(n: usize, counts: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (d, c) in counts {
            if d > n {
                return Err(Error::invalid(format!("distance {d} exceeds width {n}")));
            }
            if c > 0 {
                *map.entry(d).or_insert(0) += c;
            }
        }
        if map.is_empty() || n == 0 {
            return Err(Error::invalid("spectrum must cover at least one pattern"));
        }
        Ok(DistanceSpectrum { n, counts: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of patterns, `sum_j counts[j]`.
    pub fn p(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, distance: usize) -> u64 {
        self.counts.get(&distance).copied().unwrap_or(0)
    }

    /// Nonzero `(distance, count)` pairs in increasing distance order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    pub fn min_distance(&self) -> usize {
        *self.counts.keys().next().expect("spectrum is never empty")
    }
}

pub fn distance_spectrum(mem: &MemoryInstance, input: &BinaryPattern) -> Result<DistanceSpectrum> {
    DistanceSpectrum::from_distances(mem.n(), mem.distances(input)?)
}

/// Parses a pattern file: one bitstring per line, LF or CRLF endings, blank
/// lines and lines starting with `#` skipped.
pub fn load_patterns<R: BufRead>(reader: R) -> Result<MemoryInstance> {
    let mut patterns: Vec<BinaryPattern> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let text = line.strip_suffix('\r').unwrap_or(&line).trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let pattern = parse_bitstring(text, lineno)?;
        if let Some(first) = patterns.first() {
            if first.len() != pattern.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "pattern has {} bits, previous patterns have {}",
                        pattern.len(),
                        first.len()
                    ),
                });
            }
        }
        patterns.push(pattern);
    }
    if patterns.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no patterns found".into(),
        });
    }
    MemoryInstance::new(patterns)
}

pub fn load_pattern_file(path: &Path) -> Result<MemoryInstance> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_patterns(BufReader::new(file))
}
