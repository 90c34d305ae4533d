//! Proof-failure diagnosis for contract-annotated imperative programs.
//!
//! When a deductive verifier fails to prove a function `f` against its
//! contract, the failure itself says little: the code may be wrong, a callee
//! or loop contract may be too weak to support the proof, or the prover may
//! simply be unable to close an obligation that is in fact valid. This crate
//! takes the program (not the prover) and tries to *explain* the failure with
//! concrete evidence:
//!
//! 1. [`lang`] parses and validates the annotated program;
//! 2. [`transform`] builds instrumented variants: checks in place of
//!    annotations, and — for the weakness analyses — callee bodies and loops
//!    replaced by nondeterministic stand-ins constrained only by their
//!    contracts;
//! 3. [`exec`] runs instrumented programs on concrete inputs and records
//!    verdicts and path traces;
//! 4. [`testgen`] enumerates the finite input domains exhaustively, driving
//!    the detectors for non-compliance and for single/global contract
//!    weakness;
//! 5. [`triage`] combines the detectors into a final verdict with a
//!    replayable counter-example; [`report`] renders it as text or versioned
//!    JSON; [`mutate`] measures the whole pipeline against seeded program
//!    mutations.
//!
//! The analysis assumes a proof failure was *observed* for the entry function;
//! verdicts are relative to the explored input domains, and every reported
//! counter-example is re-validated by direct runtime checking before it is
//! shown to the user.

pub mod exec;
pub mod lang;
pub mod transform;

pub(crate) mod par;
