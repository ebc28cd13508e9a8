//! Scenario files: a code, a network, a workload and a fault schedule.
//!
//! Scenario files are JSON with 1-based server and object numbers and times
//! in abstract latency units. [`Scenario::config`] resolves one into a
//! 0-based [`SimConfig`] for a given seed.

use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{CodeSpec, LinearCode};
use crate::error::ScenarioError;
use crate::field::{PrimeField, Value};
use crate::server::Protocol;
use crate::simnet::{units_to_ticks, DelayModel, HaltSpec, HoldSpec, LatencyGraph, OpSpec, PlannedOp, SimConfig};
use crate::types::ClientId;

/// A code given by name or by its coefficient matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub enum CodeRef {
    Named {
        named: NamedCode,
        #[serde(default = "default_field_p")]
        field_p: u64,
        #[serde(default = "default_value_len")]
        value_len: usize,
    },
    Matrix(CodeSpec),
}

/// Flat wire form of [`CodeRef`], so that a missing field is reported by
/// name rather than as an unmatched variant.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    named: Option<NamedCode>,
    #[serde(default = "default_field_p")]
    field_p: u64,
    #[serde(default = "default_value_len")]
    value_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<Vec<i64>>>,
}

impl TryFrom<CodeRepr> for CodeRef {
    type Error = String;

    fn try_from(r: CodeRepr) -> Result<Self, String> {
        match (r.named, r.coeffs) {
            (Some(named), None) => Ok(CodeRef::Named {
                named,
                field_p: r.field_p,
                value_len: r.value_len,
            }),
            (None, Some(coeffs)) => Ok(CodeRef::Matrix(CodeSpec {
                field_p: r.field_p,
                value_len: r.value_len,
                coeffs,
            })),
            (None, None) => Err("missing field `coeffs` (or `named`)".into()),
            (Some(_), Some(_)) => Err("give either `named` or `coeffs`, not both".into()),
        }
    }
}

impl From<CodeRef> for CodeRepr {
    fn from(c: CodeRef) -> Self {
        match c {
            CodeRef::Named {
                named,
                field_p,
                value_len,
            } => CodeRepr {
                named: Some(named),
                field_p,
                value_len,
                coeffs: None,
            },
            CodeRef::Matrix(spec) => CodeRepr {
                named: None,
                field_p: spec.field_p,
                value_len: spec.value_len,
                coeffs: Some(spec.coeffs),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCode {
    FiveServer,
    FiveServerAlternate,
    ParityExample,
}

fn default_field_p() -> u64 {
    257
}

fn default_value_len() -> usize {
    1
}

impl CodeRef {
    pub fn build(&self) -> Result<LinearCode, ScenarioError> {
        Ok(match self {
            CodeRef::Named {
                named,
                field_p,
                value_len,
            } => {
                let f = PrimeField::new(*field_p)?;
                match named {
                    NamedCode::FiveServer => LinearCode::five_server(f, *value_len),
                    NamedCode::FiveServerAlternate => LinearCode::five_server_alternate(f, *value_len),
                    NamedCode::ParityExample => LinearCode::parity_example(f, *value_len),
                }
            }
            CodeRef::Matrix(spec) => LinearCode::from_spec(spec)?,
        })
    }
}

/// A value literal: a bare number for one-element values, or a vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueLit {
    Scalar(u64),
    Vector(Vec<u64>),
}

impl ValueLit {
    fn resolve(&self, code: &LinearCode, what: &str) -> Result<Value, ScenarioError> {
        let coords = match self {
            ValueLit::Scalar(x) => vec![*x],
            ValueLit::Vector(v) => v.clone(),
        };
        let v = Value::new(coords);
        if v.len() != code.value_len() || !v.is_in(code.field()) {
            return Err(ScenarioError::Invalid(format!(
                "{what}: value {v} is not a vector of {} elements of GF({})",
                code.value_len(),
                code.field().modulus()
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSpec {
    pub id: ClientId,
    /// 1-based home server.
    pub home: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptKind {
    Write,
    Read,
}

/// What a scripted operation must produce, and by when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// Value a read must return.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<ValueLit>,
    /// Latest completion time, in units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptOp {
    pub client: ClientId,
    /// Earliest issue time in units; the client also waits for its
    /// previous operation.
    pub at: f64,
    pub op: ScriptKind,
    /// 1-based object.
    pub object: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<ValueLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Workload {
    /// Operations drawn from the run seed. Written values are distinct.
    Random {
        ops: usize,
        #[serde(default = "default_write_ratio")]
        write_ratio: f64,
        /// Pause between a client's operations, in units.
        #[serde(default)]
        think: f64,
    },
    Script {
        ops: Vec<ScriptOp>,
    },
}

fn default_write_ratio() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaltEntry {
    pub server: usize,
    pub at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldEntry {
    pub from: usize,
    pub to: usize,
    pub start: f64,
    pub until: f64,
}

/// Half-open seed range, written `[start, end]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(u64, u64)", into = "(u64, u64)")]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl From<(u64, u64)> for SeedRange {
    fn from((start, end): (u64, u64)) -> Self {
        Self { start, end }
    }
}

impl From<SeedRange> for (u64, u64) {
    fn from(r: SeedRange) -> Self {
        (r.start, r.end)
    }
}

impl SeedRange {
    pub fn range(self) -> Range<u64> {
        self.start..self.end
    }
}

pub const DEFAULT_STEP_CAP: u64 = 500_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub code: CodeRef,
    /// Symmetric edge weights; every edge weighs 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyGraph>,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub delays: DelayModel,
    /// One-way client link delay, in units.
    #[serde(default = "default_client_delay")]
    pub client_delay: f64,
    /// One client per server when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clients: Vec<ClientSpec>,
    pub workload: Workload,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub halts: Vec<HaltEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holds: Vec<HoldEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: SeedRange,
    /// Objects per server in the replication baseline of `latency`.
    #[serde(default = "default_capacity")]
    pub replication_capacity: usize,
}

fn default_client_delay() -> f64 {
    0.1
}

fn default_seeds() -> SeedRange {
    SeedRange { start: 0, end: 1 }
}

fn default_capacity() -> usize {
    1
}

/// A scripted operation's expectation resolved against the code, with the
/// operation identified by client and position in that client's plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedExpectation {
    pub client: ClientId,
    pub plan_index: usize,
    pub value: Option<Value>,
    pub deadline: Option<u64>,
}

impl Scenario {
    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn build_code(&self) -> Result<LinearCode, ScenarioError> {
        self.code.build()
    }

    /// The client list, defaulting to client `s` homed at server `s`.
    pub fn client_specs(&self, n: usize) -> Vec<ClientSpec> {
        if self.clients.is_empty() {
            (1..=n)
                .map(|s| ClientSpec {
                    id: s as ClientId,
                    home: s,
                })
                .collect()
        } else {
            self.clients.clone()
        }
    }

    /// Checks indices against the code's dimensions.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let code = self.build_code()?;
        let (n, k) = (code.n(), code.k());
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if let Some(g) = &self.latency {
            if g.n() != n {
                return bad(format!("latency graph has {} servers, code has {n}", g.n()));
            }
        }
        if !(self.client_delay.is_finite() && self.client_delay >= 0.0) {
            return bad("client_delay must be a non-negative number".into());
        }
        if let DelayModel::Random { jitter } = self.delays {
            if !(jitter.is_finite() && jitter >= 1.0) {
                return bad(format!("delays.jitter must be at least 1, got {jitter}"));
            }
        }
        let clients = self.client_specs(n);
        let mut ids = std::collections::BTreeSet::new();
        for (i, c) in clients.iter().enumerate() {
            if c.id == crate::types::LOCALHOST {
                return bad(format!("clients[{i}]: id 0 is reserved for server-internal reads"));
            }
            if c.home == 0 || c.home > n {
                return bad(format!("clients[{i}]: home {} is not a server in 1..={n}", c.home));
            }
            if !ids.insert(c.id) {
                return bad(format!("clients[{i}]: duplicate id {}", c.id));
            }
        }
        for (i, h) in self.halts.iter().enumerate() {
            if h.server == 0 || h.server > n {
                return bad(format!("halts[{i}]: server {} is not in 1..={n}", h.server));
            }
            if !(h.at.is_finite() && h.at >= 0.0) {
                return bad(format!("halts[{i}]: time must be non-negative"));
            }
        }
        for (i, h) in self.holds.iter().enumerate() {
            for (field, s) in [("from", h.from), ("to", h.to)] {
                if s == 0 || s > n {
                    return bad(format!("holds[{i}].{field}: server {s} is not in 1..={n}"));
                }
            }
            if h.from == h.to {
                return bad(format!("holds[{i}]: a server has no channel to itself"));
            }
            if !(h.start >= 0.0 && h.until >= h.start && h.until.is_finite()) {
                return bad(format!("holds[{i}]: need 0 <= start <= until"));
            }
        }
        if self.seeds.end <= self.seeds.start {
            return bad("seeds: empty range".into());
        }
        if self.replication_capacity == 0 {
            return bad("replication_capacity must be positive".into());
        }
        match &self.workload {
            Workload::Random { write_ratio, think, .. } => {
                if !(0.0..=1.0).contains(write_ratio) {
                    return bad(format!("workload.write_ratio {write_ratio} is not in [0, 1]"));
                }
                if !(think.is_finite() && *think >= 0.0) {
                    return bad("workload.think must be non-negative".into());
                }
            }
            Workload::Script { ops } => {
                for (i, op) in ops.iter().enumerate() {
                    let at = format!("workload.ops[{i}]");
                    if !ids.contains(&op.client) {
                        return bad(format!("{at}: unknown client {}", op.client));
                    }
                    if op.object == 0 || op.object > k {
                        return bad(format!("{at}: object {} is not in 1..={k}", op.object));
                    }
                    if !(op.at.is_finite() && op.at >= 0.0) {
                        return bad(format!("{at}: time must be non-negative"));
                    }
                    match (op.op, &op.value) {
                        (ScriptKind::Write, None) => return bad(format!("{at}: write needs a value")),
                        (ScriptKind::Write, Some(v)) => {
                            v.resolve(&code, &at)?;
                        }
                        (ScriptKind::Read, Some(_)) => {
                            return bad(format!("{at}: reads take no value; use expect.value"))
                        }
                        (ScriptKind::Read, None) => {}
                    }
                    if let Some(Expectation { value: Some(v), .. }) = &op.expect {
                        if op.op == ScriptKind::Write {
                            return bad(format!("{at}: only reads can expect a value"));
                        }
                        v.resolve(&code, &at)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The simulator configuration for one seed. Random workloads draw every
    /// choice from `seed`.
    pub fn config(&self, seed: u64) -> Result<SimConfig, ScenarioError> {
        let code = Arc::new(self.build_code()?);
        let n = code.n();
        let clients = self.client_specs(n);
        let mut plans: Vec<(ClientId, usize, Vec<PlannedOp>)> =
            clients.iter().map(|c| (c.id, c.home - 1, Vec::new())).collect();
        match &self.workload {
            Workload::Random {
                ops,
                write_ratio,
                think,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_3a7e);
                let p = code.field().modulus();
                for i in 0..*ops {
                    let c = rng.gen_range(0..plans.len());
                    let object = rng.gen_range(0..code.k());
                    let op = if rng.gen_bool(*write_ratio) {
                        OpSpec::Write {
                            object,
                            value: distinct_value(i as u64, p, code.value_len()),
                        }
                    } else {
                        OpSpec::Read { object }
                    };
                    plans[c].2.push(PlannedOp {
                        not_before: 0,
                        think: units_to_ticks(*think),
                        op,
                    });
                }
            }
            Workload::Script { ops } => {
                for op in self.sorted_script(ops) {
                    let slot = plans.iter_mut().find(|p| p.0 == op.client).expect("validated");
                    let spec = match op.op {
                        ScriptKind::Write => OpSpec::Write {
                            object: op.object - 1,
                            value: op.value.as_ref().expect("validated").resolve(&code, "script")?,
                        },
                        ScriptKind::Read => OpSpec::Read { object: op.object - 1 },
                    };
                    slot.2.push(PlannedOp {
                        not_before: units_to_ticks(op.at),
                        think: 0,
                        op: spec,
                    });
                }
            }
        }
        Ok(SimConfig {
            protocol: self.protocol,
            graph: self.latency.clone(),
            delay: self.delays,
            client_delay: units_to_ticks(self.client_delay),
            clients: plans,
            halts: self
                .halts
                .iter()
                .map(|h| HaltSpec {
                    server: h.server - 1,
                    at: units_to_ticks(h.at),
                })
                .collect(),
            holds: self
                .holds
                .iter()
                .map(|h| HoldSpec {
                    from: h.from - 1,
                    to: h.to - 1,
                    start: units_to_ticks(h.start),
                    until: units_to_ticks(h.until),
                })
                .collect(),
            fairness: self.fairness.unwrap_or(SimConfig::default_fairness(n)),
            step_cap: self.step_cap.unwrap_or(DEFAULT_STEP_CAP),
            record_trace: true,
            code,
        })
    }

    /// Script operations in per-client issue order (stable by time).
    fn sorted_script<'a>(&self, ops: &'a [ScriptOp]) -> Vec<&'a ScriptOp> {
        let mut v: Vec<&ScriptOp> = ops.iter().collect();
        v.sort_by(|a, b| a.at.total_cmp(&b.at));
        v
    }

    /// Expectations of a scripted workload; empty for random ones.
    pub fn expectations(&self) -> Result<Vec<ResolvedExpectation>, ScenarioError> {
        let Workload::Script { ops } = &self.workload else {
            return Ok(Vec::new());
        };
        let code = self.build_code()?;
        let mut index: std::collections::BTreeMap<ClientId, usize> = Default::default();
        let mut out = Vec::new();
        for op in self.sorted_script(ops) {
            let slot = index.entry(op.client).or_default();
            let plan_index = *slot;
            *slot += 1;
            if let Some(e) = &op.expect {
                out.push(ResolvedExpectation {
                    client: op.client,
                    plan_index,
                    value: e.value.as_ref().map(|v| v.resolve(&code, "expect")).transpose()?,
                    deadline: e.deadline.map(units_to_ticks),
                });
            }
        }
        Ok(out)
    }
}

/// The `i`-th written value of a random workload: nonzero and distinct for
/// `i < p - 1`, so every read names exactly one write.
pub fn distinct_value(i: u64, p: u64, len: usize) -> Value {
    let mut coords = vec![0; len];
    coords[0] = 1 + i % (p - 1);
    if len > 1 {
        coords[1] = (i / (p - 1)) % p;
    }
    Value::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "code": {"coeffs": [[1,0],[0,1],[1,1]], "field_p": 7},
        "workload": {"kind": "random", "ops": 10}
    }"#;

    #[test]
    fn minimal_scenario_defaults() {
        let sc = Scenario::from_json_str(MINIMAL).unwrap();
        assert_eq!(sc.protocol, Protocol::CausalEc);
        assert_eq!(sc.seeds.range(), 0..1);
        let cfg = sc.config(3).unwrap();
        assert_eq!(cfg.clients.len(), 3);
        assert_eq!(cfg.clients[2], (3, 2, cfg.clients[2].2.clone()));
        let total: usize = cfg.clients.iter().map(|c| c.2.len()).sum();
        assert_eq!(total, 10);
        assert_eq!(cfg.fairness, 24);
    }

    #[test]
    fn random_workload_depends_only_on_seed() {
        let sc = Scenario::from_json_str(MINIMAL).unwrap();
        let a = sc.config(7).unwrap().clients;
        assert_eq!(a, sc.config(7).unwrap().clients);
        assert_ne!(a, sc.config(8).unwrap().clients);
    }

    #[test]
    fn missing_coeffs_reports_path() {
        let err = Scenario::from_json_str(r#"{"name":"t","code":{"field_p":7},"workload":{"kind":"random","ops":1}}"#)
            .unwrap_err();
        match err {
            ScenarioError::Parse { path, message } => {
                assert_eq!(path, "code");
                assert!(message.contains("coeffs"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_nested_field_names_its_path() {
        let err = Scenario::from_json_str(
            r#"{"name":"t","code":{"coeffs":[[1]]},"workload":{"kind":"random","ops":1},"halts":[{"server":1,"at":"x"}]}"#,
        )
        .unwrap_err();
        match err {
            ScenarioError::Parse { path, .. } => assert_eq!(path, "halts[0].at"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        for patch in [
            r#""clients":[{"id":1,"home":4}]"#,
            r#""clients":[{"id":0,"home":1}]"#,
            r#""halts":[{"server":0,"at":1}]"#,
            r#""holds":[{"from":1,"to":1,"start":0,"until":1}]"#,
        ] {
            let text = MINIMAL.replacen("\"name\": \"t\",", &format!("\"name\": \"t\", {patch},"), 1);
            let err = Scenario::from_json_str(&text).unwrap_err();
            assert!(matches!(err, ScenarioError::Invalid(_)), "{patch}: {err}");
        }
    }

    #[test]
    fn script_resolves_to_zero_based_plans_and_expectations() {
        let sc = Scenario::from_json_str(
            r#"{"name":"s","code":{"named":"five_server"},
                "clients":[{"id":7,"home":3}],
                "workload":{"kind":"script","ops":[
                    {"client":7,"at":2,"op":"read","object":3,"expect":{"value":5,"deadline":9}},
                    {"client":7,"at":1,"op":"write","object":3,"value":5}
                ]}}"#,
        )
        .unwrap();
        let cfg = sc.config(0).unwrap();
        let (id, home, plan) = &cfg.clients[0];
        assert_eq!((*id, *home), (7, 2));
        assert_eq!(
            plan[0].op,
            OpSpec::Write {
                object: 2,
                value: Value::new(vec![5])
            }
        );
        assert_eq!(plan[0].not_before, 1000);
        assert_eq!(plan[1].op, OpSpec::Read { object: 2 });
        let ex = sc.expectations().unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].plan_index, 1);
        assert_eq!(ex[0].deadline, Some(9000));
    }

    #[test]
    fn script_value_outside_field_is_rejected() {
        let text = r#"{"name":"s","code":{"coeffs":[[1]],"field_p":7},
            "workload":{"kind":"script","ops":[{"client":1,"at":0,"op":"write","object":1,"value":9}]}}"#;
        assert!(matches!(Scenario::from_json_str(text), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn round_trips_through_json() {
        let sc = Scenario::from_json_str(MINIMAL).unwrap();
        assert_eq!(Scenario::from_json_str(&sc.to_json_pretty()).unwrap(), sc);
    }

    #[test]
    fn distinct_values_are_distinct_and_nonzero() {
        let vals: std::collections::BTreeSet<Value> = (0..256).map(|i| distinct_value(i, 257, 1)).collect();
        assert_eq!(vals.len(), 256);
        assert!(vals.iter().all(|v| !v.is_zero()));
        assert_ne!(distinct_value(0, 7, 2), distinct_value(6, 7, 2));
    }
}
