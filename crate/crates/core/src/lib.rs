//! CausalEC: a causally consistent store built on cross-object erasure
//! coding, with its eventually consistent EventualEC variant, a
//! deterministic network simulator, and trace checkers.
//!
//! Servers, objects and clients are 0-based in the API. Scenario files and
//! rendered tables use 1-based server and object numbers.

pub mod checker;
pub mod client;
pub mod code;
pub mod error;
pub mod field;
pub mod harness;
pub mod scenario;
pub mod server;
pub mod simnet;
pub mod types;

pub use checker::{
    check_causal, check_eventual, check_locality_and_liveness, check_storage, probe_invariants, validate_witness,
    CausalReport, CheckResult, Verdict, Witness,
};
pub use client::{Client, Completion, OpKind};
pub use code::{CodeSpec, LinearCode, RecoverySet};
pub use error::{CodeError, LatencyError, ProtocolError, ScenarioError};
pub use field::{PrimeField, Value};
pub use scenario::{CodeRef, NamedCode, Scenario, Workload};
pub use server::{InternalAction, Output, Protocol, Server, StateDigest, StorageAccount};
pub use simnet::{
    analyze_latency, replication_baseline, DelayModel, HaltSpec, HoldSpec, LatencyGraph, LatencyReport, OpSpec,
    OperationRecord, PlannedOp, ReplicationReport, RunOutcome, SimConfig, Simulation, Termination, Trace, TraceRecord,
};
pub use types::{
    tag_max, ClientId, ClientRequest, ClientResponse, ClockOrder, OpId, ServerMessage, Tag, VectorClock, LOCALHOST,
};
