//! Simulators and analytic bounds for the [[4,1,2]] Bacon-Shor error-detecting
//! code.
//!
//! The crate has three layers:
//!
//! * **Circuits** — signed Pauli algebra ([`pauli`]), a small circuit IR with
//!   explicit noise sites ([`circuit`]), and the code-specific constructions
//!   ([`code`]): logical-zero preparation, gauge-operator measurement rounds,
//!   transversal logical gates, acceptance rules and the destructive-readout
//!   decoder.
//! * **Engines** — an exact density-matrix engine with branch-and-merge
//!   post-selection ([`densmat`]) and a stabilizer-tableau Monte-Carlo engine
//!   ([`stab`]) that cross-validates it.
//! * **Experiments** — the random-transversal-circuit pseudo-threshold
//!   protocol with curve fits ([`experiment`]) and closed-form site-counting
//!   bounds with optimal measurement-gap search ([`sitecount`]).
//!
//! [`checks`] bundles the self-contained validation suite used by the CLI's
//! `validate` command and by the test suites. [`exec`] provides deterministic
//! (index-ordered) map helpers that run on rayon when the `parallel` feature
//! is enabled and sequentially otherwise.

pub mod checks;
pub mod circuit;
pub mod code;
pub mod densmat;
pub mod exec;
pub mod experiment;
pub mod pauli;
pub mod seeds;
pub mod sitecount;
pub mod stab;
