//! Gate synthesis: exact two-level factorization and controlled-gate
//! gadgets, and the approximate route through SU(1,1) rotations and words
//! over a finite gate set.

pub mod compile;
pub mod gadgets;
pub mod power;
pub mod su11;
pub mod two_level;
pub mod words;

pub use gadgets::{lambda2_gadget, lambda_k, reflection_decomposition, w3_gadget, Emitter, Lowering, Reflections};
pub use power::{approx_power, min_return_distance, PowerApprox};
pub use su11::{axis_decompose, su11_classify, trotter_word, AxisVector, RotationKind, WordRotation};
pub use words::{word_search, GateWord, WordTable};
pub use two_level::{lower_factor, metric_case_factors, two_level_factorize, two_level_to_circuit, MetricCase, TwoLevelFactor};
pub use compile::{compile, CompileMode, CompileOptions, CompileReport, Compiled, StageReport};
