use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::register::RegisterLayout;

/// Dense amplitude vector over the computational basis of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.dimension() {
            return Err(Error::DimensionMismatch {
                expected: layout.dimension(),
                got: amps.len(),
            });
        }
        Ok(Self { layout, amps })
    }

    /// All-zero basis state `|0…0)`.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { layout, amps }
    }

    /// Basis state for the given bit assignment, position 0 first.
    pub fn basis_state(layout: RegisterLayout, bits: &[u8]) -> Result<Self> {
        let index = layout.encode(bits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn amplitudes_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    /// `Σ_j η_jj |a_j|²`; may be negative or zero.
    pub fn pseudo_norm(&self) -> f64 {
        let mask = self.layout.hybit_mask();
        self.amps
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let w = a.norm_sqr();
                if (j & mask).count_ones() % 2 == 1 {
                    -w
                } else {
                    w
                }
            })
            .sum()
    }

    /// Euclidean `Σ |a_j|²`, used to scale numerical tolerances.
    pub fn euclidean_norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Divides by `sqrt(pseudo_norm)`; rejects states with pseudo-norm <= 0.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.pseudo_norm();
        if n <= 0.0 {
            return Err(Error::NonPositiveNorm(n));
        }
        let s = 1.0 / n.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }
}
