use std::fmt;

use crate::error::{Error, Result};

/// Kind of a register bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitKind {
    /// Ordinary qubit, metric `diag(1, 1)`.
    Qubit,
    /// Hyperbolic bit, metric `diag(1, -1)`.
    Hybit,
}

impl BitKind {
    /// Metric sign of the bit's basis state `value` (0 or 1).
    #[inline]
    pub fn sign(self, value: usize) -> i8 {
        match (self, value & 1) {
            (BitKind::Hybit, 1) => -1,
            _ => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            BitKind::Qubit => 'q',
            BitKind::Hybit => 'h',
        }
    }
}

impl fmt::Display for BitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitKind::Qubit => f.write_str("qubit"),
            BitKind::Hybit => f.write_str("hybit"),
        }
    }
}

/// Ordered list of bit kinds. Position 0 is the most significant bit of a
/// basis index, matching left-to-right ket notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    bits: Vec<BitKind>,
    hybit_mask: usize,
}

impl RegisterLayout {
    /// Canonical layout: all qubits, then all hybits.
    pub fn new(num_qubits: usize, num_hybits: usize) -> Self {
        let mut bits = vec![BitKind::Qubit; num_qubits];
        bits.extend(std::iter::repeat_n(BitKind::Hybit, num_hybits));
        Self::from_bits(bits)
    }

    /// Arbitrary interleaving of qubits and hybits.
    pub fn from_bits(bits: Vec<BitKind>) -> Self {
        let n = bits.len();
        let hybit_mask = bits
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == BitKind::Hybit)
            .fold(0usize, |m, (p, _)| m | (1 << (n - 1 - p)));
        Self { bits, hybit_mask }
    }

    /// Parses a kinds string such as `"qqh"`.
    pub fn from_kinds_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch.to_ascii_lowercase() {
                'q' => Ok(BitKind::Qubit),
                'h' => Ok(BitKind::Hybit),
                other => Err(Error::InvalidArgument(format!(
                    "bit kind must be `q` or `h`, got `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(bits))
    }

    pub fn bits(&self) -> &[BitKind] {
        &self.bits
    }

    pub fn kind(&self, position: usize) -> BitKind {
        self.bits[position]
    }

    pub fn num_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.bits.iter().filter(|k| **k == BitKind::Qubit).count()
    }

    pub fn num_hybits(&self) -> usize {
        self.bits.len() - self.num_qubits()
    }

    pub fn dimension(&self) -> usize {
        1 << self.bits.len()
    }

    /// Index-bit mask covering every hybit.
    pub fn hybit_mask(&self) -> usize {
        self.hybit_mask
    }

    /// Index bit (as a mask) of register position `position`.
    #[inline]
    pub fn position_mask(&self, position: usize) -> usize {
        1 << (self.bits.len() - 1 - position)
    }

    /// True when qubits precede all hybits.
    pub fn is_canonical(&self) -> bool {
        self.bits.windows(2).all(|w| w[0] <= w[1])
    }

    /// Diagonal entry of the register metric at `index`: -1 iff an odd
    /// number of hybits are set.
    pub fn metric_sign(&self, index: usize) -> Result<i8> {
        if index >= self.dimension() {
            return Err(Error::IndexOutOfRange {
                index,
                dimension: self.dimension(),
            });
        }
        Ok(self.sign_unchecked(index))
    }

    #[inline]
    pub(crate) fn sign_unchecked(&self, index: usize) -> i8 {
        if (index & self.hybit_mask).count_ones() % 2 == 1 {
            -1
        } else {
            1
        }
    }

    /// Full diagonal of the metric.
    pub fn metric_diagonal(&self) -> Vec<i8> {
        (0..self.dimension()).map(|j| self.sign_unchecked(j)).collect()
    }

    /// Encodes a bit assignment (position 0 first) into a basis index.
    pub fn encode(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits.len() {
            return Err(Error::LengthMismatch {
                expected: self.bits.len(),
                got: bits.len(),
            });
        }
        bits.iter().try_fold(0usize, |acc, &b| match b {
            0 | 1 => Ok((acc << 1) | b as usize),
            _ => Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1"))),
        })
    }

    /// Bit values of `index`, position 0 first.
    pub fn decode(&self, index: usize) -> Vec<u8> {
        (0..self.bits.len())
            .map(|p| ((index & self.position_mask(p)) != 0) as u8)
            .collect()
    }

    /// Indices whose hybits are all 0.
    pub fn observable_mask(&self) -> Vec<usize> {
        (0..self.dimension())
            .filter(|j| j & self.hybit_mask == 0)
            .collect()
    }

    /// Qubit-only bitstring of an index (hybit positions skipped).
    pub fn qubit_bitstring(&self, index: usize) -> String {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == BitKind::Qubit)
            .map(|(p, _)| {
                if index & self.position_mask(p) != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in &self.bits {
            write!(f, "{}", k.letter())?;
        }
        Ok(())
    }
}
