//! Bit-masked gate kernels, postselected measurement and shot sampling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Instruction};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::register::RegisterLayout;
use crate::state::StateVector;
use crate::MAX_AMPLITUDE_BITS;

/// Name of the sampling generator, reported alongside sampled output.
pub const RNG_NAME: &str = "ChaCha20";

/// States at or above this many amplitudes are updated in parallel.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Refuses layouts above the amplitude guard.
pub fn check_size(layout: &RegisterLayout) -> Result<()> {
    if layout.num_bits() > MAX_AMPLITUDE_BITS {
        return Err(Error::TooLarge(layout.num_bits()));
    }
    Ok(())
}

/// An instruction resolved against a layout.
pub(crate) struct Kernel {
    matrix: CMatrix,
    /// Basis offset of each local gate index (first target most significant).
    offsets: Vec<usize>,
    target_mask: usize,
    control_mask: usize,
    /// Target and control masks in ascending order, for zero-bit insertion.
    fixed_masks: Vec<usize>,
}

impl Kernel {
    pub(crate) fn new(layout: &RegisterLayout, instr: &Instruction) -> Result<Self> {
        let (targets, controls) = instr.positions(layout)?;
        let tmasks: Vec<usize> = targets.iter().map(|&p| layout.position_mask(p)).collect();
        let a = tmasks.len();
        let offsets = (0..1usize << a)
            .map(|local| {
                (0..a)
                    .filter(|t| local >> (a - 1 - t) & 1 == 1)
                    .fold(0, |acc, t| acc | tmasks[t])
            })
            .collect();
        let control_mask = controls.iter().fold(0, |m, &p| m | layout.position_mask(p));
        let target_mask = tmasks.iter().fold(0, |m, t| m | t);
        let mut fixed_masks: Vec<usize> = tmasks
            .iter()
            .copied()
            .chain(controls.iter().map(|&p| layout.position_mask(p)))
            .collect();
        fixed_masks.sort_unstable();
        Ok(Self {
            matrix: instr.gate().matrix().into_owned(),
            offsets,
            target_mask,
            control_mask,
            fixed_masks,
        })
    }

    /// Index with zero bits spliced in at every target and control position.
    #[inline]
    fn spread(&self, mut i: usize) -> usize {
        for &m in &self.fixed_masks {
            i = ((i & !(m - 1)) << 1) | (i & (m - 1));
        }
        i
    }

    pub(crate) fn apply_seq(&self, amps: &mut [Complex64]) {
        let groups = amps.len() >> self.fixed_masks.len();
        if self.offsets.len() == 2 {
            let (m00, m01, m10, m11) = (
                self.matrix[(0, 0)],
                self.matrix[(0, 1)],
                self.matrix[(1, 0)],
                self.matrix[(1, 1)],
            );
            let off = self.offsets[1];
            for g in 0..groups {
                let base = self.spread(g) | self.control_mask;
                let (a0, a1) = (amps[base], amps[base | off]);
                amps[base] = m00 * a0 + m01 * a1;
                amps[base | off] = m10 * a0 + m11 * a1;
            }
            return;
        }
        let block = self.offsets.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); block];
        for g in 0..groups {
            let base = self.spread(g) | self.control_mask;
            for (k, &o) in self.offsets.iter().enumerate() {
                buf[k] = amps[base | o];
            }
            for (r, &o) in self.offsets.iter().enumerate() {
                amps[base | o] = (0..block).map(|k| self.matrix[(r, k)] * buf[k]).sum();
            }
        }
    }

    /// Out-of-place parallel update; each output entry gathers its own row.
    fn apply_par(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let block = self.offsets.len();
        (0..amps.len())
            .into_par_iter()
            .map(|j| {
                if j & self.control_mask != self.control_mask {
                    return amps[j];
                }
                let base = j & !self.target_mask;
                let row = self
                    .offsets
                    .iter()
                    .position(|&o| base | o == j)
                    .expect("every index sits in some block row");
                (0..block)
                    .map(|k| self.matrix[(row, k)] * amps[base | self.offsets[k]])
                    .sum()
            })
            .collect()
    }

    fn apply(&self, amps: &mut Vec<Complex64>) {
        if amps.len() >= PARALLEL_THRESHOLD {
            *amps = self.apply_par(amps);
        } else {
            self.apply_seq(amps);
        }
    }
}

/// Applies one instruction in place. Non-isometric gates are refused.
pub fn apply(state: &mut StateVector, instr: &Instruction) -> Result<()> {
    instr.check_isometry(state.layout())?;
    let kernel = Kernel::new(state.layout(), instr)?;
    let mut amps = std::mem::take(state.amplitudes_vec_mut());
    kernel.apply(&mut amps);
    *state.amplitudes_vec_mut() = amps;
    Ok(())
}

/// Applies every instruction in order.
pub fn run(circuit: &Circuit, initial: StateVector) -> Result<StateVector> {
    if circuit.layout() != initial.layout() {
        return Err(Error::InvalidArgument(format!(
            "circuit layout {} does not match state layout {}",
            circuit.layout(),
            initial.layout()
        )));
    }
    let mut state = initial;
    run_in_place(circuit, &mut state)?;
    Ok(state)
}

/// As [`run`], reusing the state's storage. Instructions in a [`Circuit`] are
/// validated on insertion, so no isometry check is repeated here.
pub fn run_in_place(circuit: &Circuit, state: &mut StateVector) -> Result<()> {
    let kernels = circuit
        .instructions()
        .iter()
        .map(|i| Kernel::new(state.layout(), i))
        .collect::<Result<Vec<_>>>()?;
    let amps = state.amplitudes_vec_mut();
    for k in &kernels {
        k.apply(amps);
    }
    Ok(())
}

/// Postselected outcome probabilities over the qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    num_qubits: usize,
    /// Indexed by the qubit values read as a big-endian integer.
    probs: Vec<f64>,
    observable_mass: f64,
    /// Set when the observable mass is negligible against the positive mass.
    pub warning: Option<String>,
}

impl OutcomeDistribution {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn observable_mass(&self) -> f64 {
        self.observable_mass
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, bitstring: &str) -> Option<f64> {
        if bitstring.len() != self.num_qubits {
            return None;
        }
        let idx = usize::from_str_radix(bitstring, 2).ok();
        idx.or((self.num_qubits == 0).then_some(0)).map(|i| self.probs[i])
    }

    pub fn bitstring(&self, index: usize) -> String {
        (0..self.num_qubits)
            .map(|b| if index >> (self.num_qubits - 1 - b) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Nonzero outcomes in bitstring order.
    pub fn entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (self.bitstring(i), *p))
    }
}

/// Probability of each qubit outcome with every hybit postselected to `|0)`.
pub fn observe(state: &StateVector) -> Result<OutcomeDistribution> {
    let layout = state.layout();
    let amps = state.amplitudes();
    let nq = layout.num_qubits();
    let qubit_positions: Vec<usize> = (0..layout.num_bits())
        .filter(|&p| layout.kind(p) == crate::BitKind::Qubit)
        .collect();
    let mut probs = vec![0.0; 1 << nq];
    let mut positive = 0.0;
    for (q, slot) in probs.iter_mut().enumerate() {
        let idx = qubit_positions
            .iter()
            .enumerate()
            .filter(|(b, _)| q >> (nq - 1 - b) & 1 == 1)
            .fold(0, |acc, (_, &p)| acc | layout.position_mask(p));
        *slot = amps[idx].norm_sqr();
    }
    let mask = layout.hybit_mask();
    for (j, a) in amps.iter().enumerate() {
        if (j & mask).count_ones() % 2 == 0 {
            positive += a.norm_sqr();
        }
    }
    let mass: f64 = probs.iter().sum();
    if mass == 0.0 || !mass.is_finite() {
        return Err(Error::ZeroObservableMass);
    }
    probs.iter_mut().for_each(|p| *p /= mass);
    let warning = (mass < 1e-12 * positive).then(|| {
        format!("observable mass {mass:.3e} is below 1e-12 of the positive mass {positive:.3e}")
    });
    Ok(OutcomeDistribution {
        num_qubits: nq,
        probs,
        observable_mass: mass,
        warning,
    })
}

/// `# observable_mass = m` followed by `bitstring<TAB>probability` lines.
pub fn format_distribution(dist: &OutcomeDistribution) -> String {
    let mut out = format!("# observable_mass = {:.16e}\n", dist.observable_mass);
    for (bits, p) in dist.entries() {
        let _ = writeln!(out, "{bits}\t{p:.16e}");
    }
    out
}

/// `shots` independent draws from `observe(state)`, as qubit outcome indices.
/// Inverse-CDF sampling over outcomes in bitstring order.
pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Result<Vec<usize>> {
    let dist = observe(state)?;
    Ok(sample_distribution(&dist, shots, seed))
}

pub fn sample_distribution(dist: &OutcomeDistribution, shots: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for p in &dist.probs {
        acc += p;
        cdf.push(acc);
    }
    let last = dist.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Shot counts keyed by bitstring.
pub fn count_shots(dist: &OutcomeDistribution, shots: &[usize]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for &s in shots {
        *counts.entry(dist.bitstring(s)).or_insert(0) += 1;
    }
    counts
}
