//! The Lorentz search algorithm: `n` search qubits, one oracle qubit and one
//! hybit. Each iterate `Q = O · Λ₁(BOOST χ) · O` grows the marked amplitude
//! as `cosh(kχ)`, so postselected success approaches 1 after `O(log N)` steps.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::register::RegisterLayout;
use crate::simulator::{self, OutcomeDistribution};
use crate::state::StateVector;

/// `choose_k` refuses iteration counts with `kχ` above this.
pub const MAX_K_CHI: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub n: usize,
    /// Marked bitstring, `target_x[0]` on `q0`.
    pub target_x: Vec<u8>,
    pub chi: f64,
    pub k: u32,
}

impl SearchSpec {
    pub fn new(target_x: &str, chi: f64, k: u32) -> Result<Self> {
        let bits = target_x
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(Error::InvalidArgument(format!("target `{target_x}` is not a bitstring"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::InvalidArgument("target must have at least one bit".into()));
        }
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::InvalidArgument(format!("chi must be positive, got {chi}")));
        }
        Ok(Self { n: bits.len(), target_x: bits, chi, k })
    }

    /// Search qubits `q0..q{n-1}`, oracle qubit `q{n}`, hybit `h0`.
    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::new(self.n + 1, 1)
    }

    pub fn oracle_position(&self) -> usize {
        self.n
    }

    pub fn hybit_position(&self) -> usize {
        self.n + 1
    }

    pub fn search_space(&self) -> u64 {
        1u64 << self.n
    }

    pub fn target_index(&self) -> usize {
        self.target_x.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn target_string(&self) -> String {
        self.target_x.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

/// Flips the oracle qubit iff the search qubits read `x`.
pub fn oracle_circuit(spec: &SearchSpec) -> Result<Circuit> {
    let mut c = Circuit::new(spec.layout());
    let zeros: Vec<usize> = (0..spec.n).filter(|&p| spec.target_x[p] == 0).collect();
    for &p in &zeros {
        c.push_at(Gate::X, &[p], &[])?;
    }
    let controls: Vec<usize> = (0..spec.n).collect();
    c.push_at(Gate::X, &[spec.oracle_position()], &controls)?;
    for &p in &zeros {
        c.push_at(Gate::X, &[p], &[])?;
    }
    Ok(c)
}

/// `Q = O · Λ₁(BOOST χ) · O` with the oracle qubit controlling the hybit.
pub fn q_circuit(spec: &SearchSpec) -> Result<Circuit> {
    let oracle = oracle_circuit(spec)?;
    let mut c = oracle.clone();
    c.push_at(Gate::Boost(spec.chi), &[spec.hybit_position()], &[spec.oracle_position()])?;
    c.append(&oracle)?;
    Ok(c)
}

/// Hadamards on the search qubits of `|0…0⟩|0_o⟩|0)`.
pub fn initial_state(spec: &SearchSpec) -> Result<StateVector> {
    let layout = spec.layout();
    simulator::check_size(&layout)?;
    let mut prep = Circuit::new(layout.clone());
    for p in 0..spec.n {
        prep.push_at(Gate::H, &[p], &[])?;
    }
    simulator::run(&prep, StateVector::zero(layout))
}

/// `Q^k` applied to the initial state.
pub fn search_state(spec: &SearchSpec) -> Result<StateVector> {
    let q = q_circuit(spec)?;
    let mut state = initial_state(spec)?;
    for _ in 0..spec.k {
        simulator::run_in_place(&q, &mut state)?;
    }
    Ok(state)
}

/// Outcome of a search run, marginalized over the oracle qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Over the `n` search qubits, indexed big-endian.
    pub probs: Vec<f64>,
    /// Probability mass on oracle qubit `|1⟩`; zero in exact arithmetic.
    pub oracle_one_mass: f64,
    pub observable_mass: f64,
    pub target: usize,
}

impl SearchOutcome {
    pub fn success(&self) -> f64 {
        self.probs[self.target]
    }

    fn from_distribution(dist: &OutcomeDistribution, target: usize) -> Self {
        // the oracle qubit is the last qubit, i.e. the low bit
        let all = dist.probabilities();
        let probs: Vec<f64> = all.chunks(2).map(|p| p[0] + p[1]).collect();
        let oracle_one_mass = all.iter().skip(1).step_by(2).sum();
        Self { probs, oracle_one_mass, observable_mass: dist.observable_mass(), target }
    }
}

pub fn run_search(spec: &SearchSpec) -> Result<SearchOutcome> {
    check_k_chi(spec.k, spec.chi)?;
    let state = search_state(spec)?;
    let dist = simulator::observe(&state)?;
    Ok(SearchOutcome::from_distribution(&dist, spec.target_index()))
}

/// Outcomes after `k = 0, 1, …, k_max`, one `Q` application per step.
pub fn sweep(spec: &SearchSpec, k_max: u32) -> Result<Vec<SearchOutcome>> {
    check_k_chi(k_max, spec.chi)?;
    let q = q_circuit(spec)?;
    let mut state = initial_state(spec)?;
    let mut out = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        if k > 0 {
            simulator::run_in_place(&q, &mut state)?;
        }
        let dist = simulator::observe(&state)?;
        out.push(SearchOutcome::from_distribution(&dist, spec.target_index()));
    }
    Ok(out)
}

/// Rejects `kχ > MAX_K_CHI`, where `cosh²` heads for overflow.
pub fn check_k_chi(k: u32, chi: f64) -> Result<()> {
    let kc = k as f64 * chi;
    if kc > MAX_K_CHI {
        return Err(Error::NumericGuard(format!("k·chi = {kc:.1} exceeds {MAX_K_CHI}")));
    }
    Ok(())
}

/// `(cosh²(kχ)/N) / (1 - 1/N + cosh²(kχ)/N)`.
pub fn predicted_success(n_items: u64, chi: f64, k: u32) -> f64 {
    let c2 = (k as f64 * chi).cosh().powi(2);
    c2 / (n_items as f64 - 1.0 + c2)
}

/// `(cosh(kχ)/√N, sinh(kχ)/√N, 1/√N)`: the marked amplitude with hybit `|0)`
/// and `|1)`, and each unmarked amplitude.
pub fn qk_amplitudes(n_items: u64, chi: f64, k: u32) -> (f64, f64, f64) {
    let s = (n_items as f64).sqrt();
    let a = k as f64 * chi;
    (a.cosh() / s, a.sinh() / s, 1.0 / s)
}

/// Smallest `k` with `predicted_success ≥ p_min`.
pub fn choose_k(n_items: u64, chi: f64, p_min: f64) -> Result<u32> {
    if !(p_min > 0.0 && p_min < 1.0) {
        return Err(Error::InvalidArgument(format!("p_min must lie in (0, 1), got {p_min}")));
    }
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::InvalidArgument(format!("chi must be positive, got {chi}")));
    }
    if n_items == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if predicted_success(n_items, chi, 0) >= p_min {
        return Ok(0);
    }
    let ratio = (p_min * (n_items as f64 - 1.0) / (1.0 - p_min)).sqrt();
    let estimate = (ratio.max(1.0).acosh() / chi).ceil();
    check_k_chi(estimate as u32, chi)?;
    // the closed form can be off by one from rounding
    let mut k = estimate as u32;
    while k > 0 && predicted_success(n_items, chi, k - 1) >= p_min {
        k -= 1;
    }
    while predicted_success(n_items, chi, k) < p_min {
        k += 1;
    }
    Ok(k)
}
