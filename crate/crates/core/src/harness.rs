//! Runs seeded executions, applies every checker, and builds the bundled
//! scenarios and the randomized fuzz suite.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{
    check_causal, check_eventual, check_locality_and_liveness, check_storage, probe_invariants, CausalReport,
    CheckResult, InvariantReport, LivenessReport, StorageReport, Verdict,
};
use crate::code::LinearCode;
use crate::error::ScenarioError;
use crate::field::PrimeField;
use crate::scenario::{
    ClientSpec, CodeRef, Expectation, HoldEntry, NamedCode, ResolvedExpectation, Scenario, ScriptKind, ScriptOp,
    SeedRange, ValueLit, Workload,
};
use crate::server::Protocol;
use crate::simnet::{
    analyze_latency, replication_baseline, ticks_to_units, units_to_ticks, DelayModel, HaltSpec, LatencyGraph,
    LatencyReport, OpSpec, PlannedOp, ReplicationReport, RunOutcome, SimConfig, Simulation, Termination,
};
use crate::types::ClientId;

/// Every checker's verdict on one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSuite {
    pub causal: CausalReport,
    pub eventual: CheckResult,
    pub storage: StorageReport,
    pub liveness: LivenessReport,
    pub invariants: InvariantReport,
    pub expectations: CheckResult,
}

impl CheckSuite {
    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.ok())
    }

    pub fn verdicts(&self) -> [(&'static str, Verdict); 6] {
        [
            ("causal", self.causal.verdict),
            ("eventual", self.eventual.verdict),
            ("storage", self.storage.result.verdict),
            ("liveness", self.liveness.result.verdict),
            ("invariants", self.invariants.result.verdict),
            ("expectations", self.expectations.verdict),
        ]
    }
}

/// Scripted expectations against the history.
pub fn check_expectations(outcome: &RunOutcome, expectations: &[ResolvedExpectation]) -> CheckResult {
    let mut v = Vec::new();
    for e in expectations {
        let Some(op) = outcome
            .history
            .iter()
            .find(|o| o.client == e.client && o.plan_index == e.plan_index)
        else {
            v.push(format!(
                "client {} never issued its operation #{}",
                e.client,
                e.plan_index + 1
            ));
            continue;
        };
        let Some(done) = op.responded_at else {
            v.push(format!("operation {} did not complete", op.opid));
            continue;
        };
        if let Some(d) = e.deadline {
            if done > d {
                v.push(format!(
                    "operation {} completed at {} after its deadline {}",
                    op.opid,
                    ticks_to_units(done),
                    ticks_to_units(d)
                ));
            }
        }
        if let Some(want) = &e.value {
            if op.value.as_ref() != Some(want) {
                v.push(format!(
                    "read {} returned {}, expected {want}",
                    op.opid,
                    op.value.as_ref().map(|x| x.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    CheckResult {
        verdict: if v.is_empty() { Verdict::Pass } else { Verdict::Fail },
        violations: v,
    }
}

/// Applies every checker to a finished run.
pub fn evaluate(outcome: &RunOutcome, code: &LinearCode, expectations: &[ResolvedExpectation]) -> CheckSuite {
    let zero = code.zero_value();
    let probes = if outcome.quiesced() && outcome.halted.is_empty() {
        outcome.probe_reads()
    } else {
        Vec::new()
    };
    CheckSuite {
        causal: check_causal(&outcome.history, code.k(), &zero),
        eventual: check_eventual(
            &outcome.history,
            &probes,
            code.k(),
            &zero,
            outcome.quiesced(),
            &outcome.halted,
        ),
        storage: check_storage(
            &outcome.servers,
            code,
            &outcome.history,
            outcome.quiesced(),
            &outcome.halted,
        ),
        liveness: check_locality_and_liveness(&outcome.history, &outcome.halted, code, outcome.quiesced()),
        invariants: probe_invariants(&outcome.trace, code.n(), &outcome.deep_violations),
        expectations: check_expectations(outcome, expectations),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub protocol: Protocol,
    pub termination: Termination,
    pub end_time: f64,
    pub events: u64,
    pub transitions: u64,
    pub operations: usize,
    pub completed: usize,
    pub halted: Vec<usize>,
    pub mean_read_latency: Option<f64>,
    pub peak_list_len: usize,
    pub trace_hash: String,
    pub checks: CheckSuite,
    pub passed: bool,
}

impl SeedReport {
    fn new(outcome: &RunOutcome, checks: CheckSuite) -> Self {
        let reads: Vec<f64> = outcome
            .history
            .iter()
            .filter(|o| !o.is_write())
            .filter_map(|o| o.latency_units())
            .collect();
        Self {
            seed: outcome.seed,
            protocol: outcome.protocol,
            termination: outcome.termination,
            end_time: ticks_to_units(outcome.end_time),
            events: outcome.events,
            transitions: outcome.transitions,
            operations: outcome.history.len(),
            completed: outcome.history.iter().filter(|o| o.is_complete()).count(),
            halted: outcome.halted.iter().map(|s| s + 1).collect(),
            mean_read_latency: (!reads.is_empty()).then(|| reads.iter().sum::<f64>() / reads.len() as f64),
            peak_list_len: outcome.peak_list_len,
            trace_hash: outcome.trace.hash_hex(),
            passed: checks.passed(),
            checks,
        }
    }
}

/// Runs one seed and checks it.
pub fn run_seed(cfg: Arc<SimConfig>, seed: u64, expectations: &[ResolvedExpectation]) -> (RunOutcome, SeedReport) {
    let outcome = Simulation::new(Arc::clone(&cfg), seed).run();
    let checks = evaluate(&outcome, &cfg.code, expectations);
    let report = SeedReport::new(&outcome, checks);
    (outcome, report)
}

/// Command-line overrides of scenario settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub protocol: Option<Protocol>,
    pub fairness: Option<usize>,
    pub step_cap: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, sc: &Scenario) -> Scenario {
        let mut sc = sc.clone();
        if let Some(p) = self.protocol {
            sc.protocol = p;
        }
        if let Some(f) = self.fairness {
            sc.fairness = Some(f);
        }
        if let Some(c) = self.step_cap {
            sc.step_cap = Some(c);
        }
        sc
    }
}

/// One scenario run over a range of seeds, in parallel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub protocol: Protocol,
    pub seeds: Vec<SeedReport>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.seeds.iter().all(|s| s.passed)
    }
}

/// Runs `seeds` of a scenario. `on_trace` sees every outcome, e.g. to write
/// its trace, before the outcome is dropped.
pub fn run_scenario<F>(
    sc: &Scenario,
    seeds: Range<u64>,
    overrides: Overrides,
    on_trace: F,
) -> Result<ScenarioReport, ScenarioError>
where
    F: Fn(&RunOutcome) + Sync,
{
    let sc = overrides.apply(sc);
    sc.validate()?;
    let expectations = sc.expectations()?;
    let seeds: Vec<u64> = seeds.collect();
    let reports: Result<Vec<SeedReport>, ScenarioError> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = Arc::new(sc.config(seed)?);
            let (outcome, report) = run_seed(cfg, seed, &expectations);
            on_trace(&outcome);
            Ok(report)
        })
        .collect();
    Ok(ScenarioReport {
        scenario: sc.name.clone(),
        protocol: sc.protocol,
        seeds: reports?,
    })
}

// ---- fuzzing -----------------------------------------------------------

/// Parameters of the randomized suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzParams {
    pub max_servers: usize,
    pub max_objects: usize,
    pub max_ops: usize,
    /// Chance that a run halts one server.
    pub halt_probability: f64,
}

impl Default for FuzzParams {
    fn default() -> Self {
        Self {
            max_servers: 5,
            max_objects: 3,
            max_ops: 50,
            halt_probability: 0.5,
        }
    }
}

/// A random code over GF(257) in which every object is recoverable and
/// every server stores something.
pub fn random_code(rng: &mut ChaCha8Rng, n: usize, k: usize, value_len: usize) -> LinearCode {
    let field = PrimeField::new(257).expect("257 is prime");
    loop {
        let coeffs: Vec<Vec<i64>> = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..257) })
                    .collect()
            })
            .collect();
        if coeffs.iter().any(|row| row.iter().all(|&c| c == 0)) {
            continue;
        }
        let Ok(code) = LinearCode::new(field, value_len, coeffs) else {
            continue;
        };
        if (0..k).all(|x| code.minimal_recovery_sets(x).is_ok_and(|s| !s.is_empty())) {
            return code;
        }
    }
}

/// The fuzz configuration for one seed. Every choice comes from `seed`.
#[allow(clippy::needless_range_loop)]
pub fn fuzz_config(seed: u64, protocol: Protocol, params: FuzzParams) -> SimConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0xf022);
    let n = rng.gen_range(1..=params.max_servers);
    let k = rng.gen_range(1..=params.max_objects.min(n));
    let value_len = rng.gen_range(1..=2);
    let code = Arc::new(random_code(&mut rng, n, k, value_len));

    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.gen_range(1..=8) as f64 / 2.0;
            w[i][j] = d;
            w[j][i] = d;
        }
    }
    let graph = LatencyGraph::new(w).expect("generated weights are valid");
    let delay = if rng.gen_bool(0.25) {
        DelayModel::Fixed
    } else {
        DelayModel::Random {
            jitter: rng.gen_range(1.0..4.0),
        }
    };

    let n_clients = rng.gen_range(1..=n + 1);
    let mut clients: Vec<(ClientId, usize, Vec<PlannedOp>)> = (0..n_clients)
        .map(|c| (c as ClientId + 1, rng.gen_range(0..n), Vec::new()))
        .collect();
    let ops = rng.gen_range(1..=params.max_ops);
    let write_ratio = rng.gen_range(0.2..0.8);
    for i in 0..ops {
        let c = rng.gen_range(0..n_clients);
        let object = rng.gen_range(0..k);
        let op = if rng.gen_bool(write_ratio) {
            OpSpec::Write {
                object,
                value: crate::scenario::distinct_value(i as u64, 257, value_len),
            }
        } else {
            OpSpec::Read { object }
        };
        clients[c].2.push(PlannedOp {
            not_before: units_to_ticks(rng.gen_range(0.0..20.0)),
            think: units_to_ticks(rng.gen_range(0.0..2.0)),
            op,
        });
    }
    for (_, _, plan) in clients.iter_mut() {
        plan.sort_by_key(|p| p.not_before);
    }
    let halts = if rng.gen_bool(params.halt_probability) {
        vec![HaltSpec {
            server: rng.gen_range(0..n),
            at: units_to_ticks(rng.gen_range(0.0..40.0)),
        }]
    } else {
        Vec::new()
    };
    SimConfig {
        code,
        protocol,
        graph: Some(graph),
        delay,
        client_delay: units_to_ticks(0.1),
        clients,
        halts,
        holds: Vec::new(),
        fairness: SimConfig::default_fairness(n),
        step_cap: crate::scenario::DEFAULT_STEP_CAP,
        record_trace: true,
    }
}

/// Runs the fuzz suite over `seeds` in parallel.
pub fn run_fuzz(seeds: Range<u64>, protocol: Protocol, params: FuzzParams) -> Vec<SeedReport> {
    let seeds: Vec<u64> = seeds.collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = Arc::new(fuzz_config(seed, protocol, params));
            run_seed(cfg, seed, &[]).1
        })
        .collect()
}

/// Totals over a fuzz suite, one field per property.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub runs: usize,
    pub runs_with_halt: usize,
    pub not_quiescent: Vec<u64>,
    pub causal_failures: Vec<u64>,
    pub writes_delivered: usize,
    pub locality_violations: usize,
    pub reads_required: usize,
    pub reads_required_completed: usize,
    pub liveness_failures: Vec<u64>,
    pub eventual_checked: usize,
    pub eventual_failures: Vec<u64>,
    pub storage_checked: usize,
    pub storage_failures: Vec<u64>,
    pub transitions_probed: usize,
    pub invariant_failures: Vec<u64>,
}

pub fn summarize(reports: &[SeedReport]) -> FuzzSummary {
    let mut s = FuzzSummary {
        runs: reports.len(),
        ..Default::default()
    };
    for r in reports {
        let c = &r.checks;
        if !r.halted.is_empty() {
            s.runs_with_halt += 1;
        }
        if r.termination != Termination::Quiescent {
            s.not_quiescent.push(r.seed);
        }
        if c.causal.verdict == Verdict::Fail {
            s.causal_failures.push(r.seed);
        }
        s.writes_delivered += c.liveness.writes_delivered;
        s.locality_violations += c
            .liveness
            .result
            .violations
            .iter()
            .filter(|v| v.contains("not acknowledged on delivery"))
            .count();
        s.reads_required += c.liveness.reads_required;
        s.reads_required_completed += c.liveness.reads_required_completed;
        if c.liveness.result.verdict != Verdict::Pass {
            s.liveness_failures.push(r.seed);
        }
        if c.eventual.verdict != Verdict::NotApplicable {
            s.eventual_checked += 1;
            if c.eventual.verdict != Verdict::Pass {
                s.eventual_failures.push(r.seed);
            }
        }
        if c.storage.result.verdict != Verdict::NotApplicable {
            s.storage_checked += 1;
            if c.storage.result.verdict != Verdict::Pass {
                s.storage_failures.push(r.seed);
            }
        }
        s.transitions_probed += c.invariants.digests_checked;
        if c.invariants.result.verdict != Verdict::Pass {
            s.invariant_failures.push(r.seed);
        }
    }
    s
}

// ---- latency -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyComparison {
    pub scenario: String,
    pub code: LatencyReport,
    pub replication: ReplicationReport,
    pub replication_capacity: usize,
}

/// Erasure-coded read latency against the best whole-object placement.
pub fn latency_comparison(sc: &Scenario) -> Result<LatencyComparison, ScenarioError> {
    let code = sc.build_code()?;
    let graph = match &sc.latency {
        Some(g) => g.clone(),
        None => LatencyGraph::uniform(code.n(), 1.0)?,
    };
    let ec = analyze_latency(&graph, &code)?;
    let replication = replication_baseline(&graph, code.k(), sc.replication_capacity)?;
    Ok(LatencyComparison {
        scenario: sc.name.clone(),
        code: ec,
        replication,
        replication_capacity: sc.replication_capacity,
    })
}

impl LatencyComparison {
    /// Human-readable table, 1-based.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let k = self.code.per_pair.first().map_or(0, Vec::len);
        let _ = writeln!(out, "scenario {}: read latency per (server, object)", self.scenario);
        let _ = write!(out, "{:>8}", "server");
        for x in 0..k {
            let _ = write!(out, "{:>8}", format!("X{}", x + 1));
        }
        out.push('\n');
        for (s, row) in self.code.per_pair.iter().enumerate() {
            let _ = write!(out, "{:>8}", s + 1);
            for v in row {
                let _ = write!(out, "{v:>8.2}");
            }
            out.push('\n');
        }
        let placement = |p: &[Vec<usize>]| {
            p.iter()
                .map(|objs| {
                    let names: Vec<String> = objs.iter().map(|x| format!("X{}", x + 1)).collect();
                    format!("{{{}}}", names.join(","))
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            out,
            "erasure code:  worst {:.4}  average {:.4}",
            self.code.worst, self.code.average
        );
        let _ = writeln!(
            out,
            "replication (capacity {}):  worst {:.4} via {}  average {:.4} via {}",
            self.replication_capacity,
            self.replication.best_worst,
            placement(&self.replication.worst_placement),
            self.replication.best_average,
            placement(&self.replication.average_placement)
        );
        out
    }
}

// ---- bundled scenarios -------------------------------------------------

/// Edge weights of the five-server example network (symmetric, 0-based).
pub fn example_graph() -> LatencyGraph {
    let edges = [
        (0, 1, 10.0),
        (0, 2, 4.5),
        (0, 3, 3.5),
        (0, 4, 3.0),
        (1, 2, 6.0),
        (1, 3, 3.0),
        (1, 4, 3.0),
        (2, 3, 4.5),
        (2, 4, 6.0),
        (3, 4, 10.0),
    ];
    let mut w = vec![vec![0.0; 5]; 5];
    for (i, j, d) in edges {
        w[i][j] = d;
        w[j][i] = d;
    }
    LatencyGraph::new(w).expect("example graph is valid")
}

fn named(code: NamedCode) -> CodeRef {
    CodeRef::Named {
        named: code,
        field_p: 257,
        value_len: 1,
    }
}

fn base(name: &str, description: &str, code: CodeRef, workload: Workload) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        code,
        latency: None,
        protocol: Protocol::CausalEc,
        delays: DelayModel::Fixed,
        client_delay: 0.1,
        clients: Vec::new(),
        workload,
        halts: Vec::new(),
        holds: Vec::new(),
        fairness: None,
        step_cap: None,
        seeds: SeedRange { start: 0, end: 1 },
        replication_capacity: 1,
    }
}

fn w(client: ClientId, at: f64, object: usize, value: u64) -> ScriptOp {
    ScriptOp {
        client,
        at,
        op: ScriptKind::Write,
        object,
        value: Some(ValueLit::Scalar(value)),
        // A write is acknowledged locally, so it finishes within one
        // client round trip whatever the network does.
        expect: Some(Expectation {
            value: None,
            deadline: Some(at + 0.5),
        }),
    }
}

fn r(client: ClientId, at: f64, object: usize, value: u64, deadline: f64) -> ScriptOp {
    ScriptOp {
        client,
        at,
        op: ScriptKind::Read,
        object,
        value: None,
        expect: Some(Expectation {
            value: Some(ValueLit::Scalar(value)),
            deadline: Some(deadline),
        }),
    }
}

fn hold(from: usize, to: usize, start: f64, until: f64) -> HoldEntry {
    HoldEntry { from, to, start, until }
}

/// Version `i` of object `x` is written as the value `10 x + i`.
fn ver(x: usize, i: u64) -> u64 {
    10 * x as u64 + i
}

/// First versions of every object, written where they are stored alone.
fn seed_versions() -> Vec<ScriptOp> {
    vec![
        w(1, 0.0, 1, ver(1, 1)),
        w(2, 0.0, 2, ver(2, 1)),
        w(5, 0.0, 3, ver(3, 1)),
    ]
}

pub fn fig1_scenario() -> Scenario {
    let mut sc = base(
        "fig1",
        "Five-server code on the example network with a random workload.",
        named(NamedCode::FiveServer),
        Workload::Random {
            ops: 40,
            write_ratio: 0.5,
            think: 0.5,
        },
    );
    sc.latency = Some(example_graph());
    sc.delays = DelayModel::Random { jitter: 2.0 };
    sc.seeds = SeedRange { start: 0, end: 100 };
    sc
}

pub fn appendix_a_scenario() -> Scenario {
    let mut sc = fig1_scenario();
    sc.name = "appendix_a".into();
    sc.description = "Alternate five-server code on the example network.".into();
    sc.code = named(NamedCode::FiveServerAlternate);
    sc
}

/// Server 1 takes three writes to X1, four to X2 and two to X3 while its
/// outgoing channels are held; every write still returns at once, and the
/// other servers catch up after the release.
pub fn encoding_scenario_1() -> Scenario {
    let mut ops = Vec::new();
    let mut at = 0.0;
    for (x, count) in [(1, 3), (2, 4), (3, 2)] {
        for i in 1..=count {
            ops.push(w(1, at, x, ver(x, i)));
            at += 0.5;
        }
    }
    ops.push(r(2, 60.0, 2, ver(2, 4), 70.0));
    ops.push(r(3, 60.0, 1, ver(1, 3), 70.0));
    ops.push(r(5, 60.0, 3, ver(3, 2), 70.0));
    let mut sc = base(
        "encoding_1",
        "Writes at server 1 with every outgoing channel held until t=40.",
        named(NamedCode::FiveServer),
        Workload::Script { ops },
    );
    sc.holds = (2..=5).map(|to| hold(1, to, 0.0, 40.0)).collect();
    sc
}

/// Server 3 encodes x1(2)+x2(3)+x3(1) and only later receives x2(4),
/// which it then folds into its symbol.
pub fn encoding_scenario_2() -> Scenario {
    let mut ops = seed_versions();
    ops.extend([
        w(1, 20.0, 1, ver(1, 2)),
        w(2, 20.0, 2, ver(2, 2)),
        w(2, 21.0, 2, ver(2, 3)),
        w(2, 30.0, 2, ver(2, 4)),
        r(3, 100.0, 2, ver(2, 4), 110.0),
        r(4, 100.0, 3, ver(3, 1), 110.0),
    ]);
    let mut sc = base(
        "encoding_2",
        "x2(4) reaches server 3 late because channel 2->3 is held.",
        named(NamedCode::FiveServer),
        Workload::Script { ops },
    );
    sc.holds = vec![hold(2, 3, 29.5, 60.0)];
    sc
}

/// A read of X3 at server 3 while server 3 lacks x1(3) and server 4 lacks
/// x2(3) and x2(4). Channels from servers 1 and 5 to server 3 are held so
/// that only the recovery set {3,4} can answer.
pub fn read_scenario_1() -> Scenario {
    let mut ops = seed_versions();
    ops.extend([
        w(1, 20.0, 1, ver(1, 2)),
        w(2, 20.0, 2, ver(2, 2)),
        w(1, 30.0, 1, ver(1, 3)),
        w(2, 30.0, 2, ver(2, 3)),
        w(2, 30.5, 2, ver(2, 4)),
        r(3, 50.0, 3, ver(3, 1), 150.0),
        r(4, 250.0, 1, ver(1, 3), 260.0),
    ]);
    let mut sc = base(
        "read_1",
        "Read of X3 at server 3 decoded from server 4 despite version skew.",
        named(NamedCode::FiveServer),
        Workload::Script { ops },
    );
    sc.holds = vec![
        hold(1, 3, 29.5, 200.0),
        hold(2, 4, 29.5, 200.0),
        hold(5, 3, 45.0, 200.0),
    ];
    sc
}

/// A read of X3 at server 1, which keeps no X3 version, decoded from
/// servers 3 and 4 that hold different versions of X2.
pub fn read_scenario_2() -> Scenario {
    let mut ops = seed_versions();
    ops.extend([w(2, 20.0, 2, ver(2, 2)), r(1, 40.0, 3, ver(3, 1), 150.0)]);
    let mut sc = base(
        "read_2",
        "Read of X3 at server 1 answered by the recovery set {3,4}.",
        named(NamedCode::FiveServer),
        Workload::Script { ops },
    );
    sc.holds = vec![
        hold(2, 4, 19.5, 200.0),
        hold(2, 1, 35.0, 200.0),
        hold(5, 1, 35.0, 200.0),
    ];
    sc
}

/// Three servers storing `x`, `y` and `x+y`. A write of `y` that causally
/// follows a write of `x` reaches server 3 first; the client at server 3
/// then reads `y` and `x`. Only CausalEC holds the second write back.
pub fn eventual_reorder_scenario(protocol: Protocol) -> Scenario {
    let ops = vec![
        w(1, 0.0, 1, 11),
        ScriptOp {
            expect: None,
            ..r(2, 3.0, 1, 0, 0.0)
        },
        w(2, 3.1, 2, 22),
        ScriptOp {
            expect: None,
            ..r(3, 8.0, 2, 0, 0.0)
        },
        ScriptOp {
            expect: None,
            ..r(3, 9.0, 1, 0, 0.0)
        },
    ];
    let mut sc = base(
        "eventual_reorder",
        "App(y) overtakes App(x) at server 3; causal under CausalEC only.",
        CodeRef::Matrix(crate::code::CodeSpec {
            field_p: 257,
            value_len: 1,
            coeffs: vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        }),
        Workload::Script { ops },
    );
    sc.protocol = protocol;
    sc.clients = (1..=3)
        .map(|s| ClientSpec {
            id: s,
            home: s as usize,
        })
        .collect();
    sc.holds = vec![hold(1, 3, 0.0, 50.0)];
    sc
}

/// Every bundled scenario, in file order.
pub fn bundled_scenarios() -> Vec<Scenario> {
    vec![
        fig1_scenario(),
        appendix_a_scenario(),
        encoding_scenario_1(),
        encoding_scenario_2(),
        read_scenario_1(),
        read_scenario_2(),
        eventual_reorder_scenario(Protocol::EventualEc),
    ]
}
