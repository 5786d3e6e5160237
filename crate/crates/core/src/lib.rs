//! Deterministic simulator for QKD networks built from trusted quantum relays.
//!
//! A relay (a "Carol") forwards qubits between two endpoints by measuring and
//! re-preparing them, and afterwards takes part in the classical discussion, so
//! a single run of the protocol over a chain of nodes yields a pairwise secret
//! key for every pair of participants whose basis choices lined up. Those keys
//! feed the authentication key pools that protect the classical channel, which
//! in turn carries the routing, sifting, reconciliation, and amplification
//! traffic of the next run.
//!
//! The crate is organized along those layers:
//!
//! - [`quantum`]: four-state qubits, basis measurement, channel noise, and the
//!   intercept/resend operation used by both relays and eavesdroppers.
//! - [`protocol`]: the chain protocol itself — quantum phase, sifting into
//!   beneficiary groups, error estimation, reconciliation, privacy
//!   amplification, and the relay's shadow reconstruction of the end-to-end key.
//! - [`auth`]: consumable authentication key pools, tag schemes for multi-hop
//!   classical messages, pool refresh from protocol output, and rate checks.
//! - [`routing`]: per-relay routing tables, delta propagation over the relay
//!   mesh, directory listings, and a-posteriori route verification.
//! - [`netsim`]: the deterministic event harness tying everything together —
//!   network construction, session orchestration, adversary injection,
//!   multiplexing, and replayable transcripts.
//! - [`config`] / [`report`]: the scenario file format and the machine-readable
//!   session report with its human summary.
//!
//! Everything is driven by a single 64-bit seed; two runs of the same scenario
//! with the same seed produce byte-identical transcripts and reports.

pub mod auth;
pub mod bits;
pub mod config;
pub mod error;
pub mod netsim;
pub mod protocol;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod routing;

pub use error::{Error, FailureClass, Result};
pub use rng::RngStream;

/// Node identifier as written in scenario files.
pub type NodeId = String;

/// Unordered node pair, normalized so the lexicographically smaller id comes
/// first. Used as the key for key pools and per-pair accounting.
pub fn pair_id(a: &str, b: &str) -> (NodeId, NodeId) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
