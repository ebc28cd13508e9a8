//! Deterministic discrete-event network: reliable FIFO channels between
//! servers, client links, seeded delays, halting, fair scheduling of
//! internal actions and quiescence detection.
//!
//! Every random choice comes from one ChaCha8 stream seeded by the run
//! seed, and simultaneous events are ordered by scheduling sequence
//! number, so a `(config, seed)` pair always produces the same trace.

pub mod latency;
pub mod trace;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::client::{Client, OpKind};
use crate::code::LinearCode;
use crate::field::Value;
use crate::server::{InternalAction, Output, Protocol, Server, StateDigest};
use crate::types::{ClientId, ClientRequest, ClientResponse, OpId, ServerMessage, Tag};

pub use latency::{
    analyze_latency, placement_latency, replication_baseline, LatencyGraph, LatencyReport, ReplicationReport,
};
pub use trace::{
    ticks_to_units, units_to_ticks, Node, OperationRecord, Ticks, Trace, TraceEvent, TraceRecord, TICKS_PER_UNIT,
};

/// How long a server-to-server message spends in flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayModel {
    /// Exactly the edge weight.
    Fixed,
    /// Uniform in `[d, d * jitter]`.
    Random { jitter: f64 },
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel::Random { jitter: 3.0 }
    }
}

/// One client operation of a workload plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum OpSpec {
    Write { object: usize, value: Value },
    Read { object: usize },
}

impl OpSpec {
    pub fn object(&self) -> usize {
        match self {
            OpSpec::Write { object, .. } | OpSpec::Read { object } => *object,
        }
    }
}

/// An operation the client issues once idle, no earlier than `not_before`
/// and no sooner than `think` after its previous operation completed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedOp {
    pub not_before: Ticks,
    pub think: Ticks,
    pub op: OpSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaltSpec {
    pub server: usize,
    pub at: Ticks,
}

/// Messages sent on `from -> to` during `[start, until)` are not delivered
/// before `until`. FIFO order then holds back everything sent after them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldSpec {
    pub from: usize,
    pub to: usize,
    pub start: Ticks,
    pub until: Ticks,
}

/// A fully resolved, 0-based simulation setup.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: Arc<LinearCode>,
    pub protocol: Protocol,
    /// Edge weights in abstract units; `None` means every edge weighs 1.
    pub graph: Option<LatencyGraph>,
    pub delay: DelayModel,
    /// One-way client-to-home-server delay.
    pub client_delay: Ticks,
    /// Client id and home server, with the client's operations in order.
    pub clients: Vec<(ClientId, usize, Vec<PlannedOp>)>,
    pub halts: Vec<HaltSpec>,
    pub holds: Vec<HoldSpec>,
    /// A full round of internal actions at every live server runs at least
    /// once every `fairness` events.
    pub fairness: usize,
    /// Events plus quiescence-phase rounds before the run is abandoned.
    pub step_cap: u64,
    /// Keep the per-transition log. Checkers that read digests need it.
    pub record_trace: bool,
}

impl SimConfig {
    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn default_fairness(n: usize) -> usize {
        8 * n
    }

    /// Servers that halt at some point of the run.
    pub fn ever_halted(&self) -> BTreeSet<usize> {
        self.halts.iter().map(|h| h.server).collect()
    }
}

#[derive(Debug, Clone)]
enum EventKind {
    Issue { client: ClientId },
    Request { home: usize, request: ClientRequest },
    ToServer { from: usize, to: usize, msg: ServerMessage },
    ToClient { client: ClientId, response: ClientResponse },
    Halt { server: usize },
}

#[derive(Debug, Clone)]
struct Scheduled {
    time: Ticks,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

#[derive(Debug, Clone)]
struct ClientSlot {
    client: Client,
    queue: VecDeque<PlannedOp>,
    last_done: Ticks,
    issued: usize,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// No event pending and no internal action changes any live server.
    Quiescent,
    /// The step cap ran out first: possible livelock.
    StepCap,
}

/// Everything a finished run exposes to the checkers.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub protocol: Protocol,
    pub termination: Termination,
    pub end_time: Ticks,
    pub events: u64,
    /// Server transitions taken, including ones that changed nothing.
    pub transitions: u64,
    pub history: Vec<OperationRecord>,
    pub trace: Trace,
    pub servers: Vec<Server>,
    pub halted: BTreeSet<usize>,
    /// Runtime invariant breaches that need full server state to detect.
    pub deep_violations: Vec<String>,
    /// Largest number of operations a single `(server, object)` list held.
    pub peak_list_len: usize,
    sim: Option<Box<Simulation>>,
}

impl RunOutcome {
    pub fn quiesced(&self) -> bool {
        self.termination == Termination::Quiescent
    }

    pub fn write_count(&self) -> usize {
        self.history.iter().filter(|o| o.is_write()).count()
    }

    /// From the final state, reads every object at every live server, one
    /// read at a time, each run to quiescence. `None` entries are probes
    /// that did not complete; halted servers get a row of `None`.
    pub fn probe_reads(&self) -> Vec<Vec<Option<Value>>> {
        let Some(sim) = &self.sim else {
            return Vec::new();
        };
        let n = sim.servers.len();
        let k = sim.cfg.code.k();
        let mut out = vec![vec![None; k]; n];
        let mut sim = (**sim).clone();
        sim.record = false;
        let mut next_id = PROBE_CLIENT_BASE;
        for (s, row) in out.iter_mut().enumerate() {
            if sim.halted[s] {
                continue;
            }
            for (x, cell) in row.iter_mut().enumerate() {
                next_id += 1;
                *cell = sim.probe_read(next_id, s, x);
            }
        }
        out
    }
}

/// Probe clients get ids far above any scenario client.
const PROBE_CLIENT_BASE: ClientId = 1 << 62;

#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: Arc<SimConfig>,
    seed: u64,
    servers: Vec<Server>,
    clients: BTreeMap<ClientId, ClientSlot>,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    now: Ticks,
    rng: ChaCha8Rng,
    channel_last: HashMap<(Node, Node), Ticks>,
    halted: Vec<bool>,
    history: Vec<OperationRecord>,
    op_index: HashMap<OpId, usize>,
    trace: Trace,
    record: bool,
    last_digest: Vec<StateDigest>,
    events: u64,
    steps: u64,
    transitions: u64,
    since_round: usize,
    tag_values: HashMap<Tag, Value>,
    deep_violations: Vec<String>,
    peak_list_len: usize,
    probe_results: HashMap<ClientId, Value>,
}

impl Simulation {
    pub fn new(cfg: Arc<SimConfig>, seed: u64) -> Self {
        let n = cfg.n();
        let servers: Vec<Server> = (0..n)
            .map(|i| Server::new(i, Arc::clone(&cfg.code), cfg.protocol))
            .collect();
        let last_digest = servers.iter().map(Server::digest).collect();
        let mut sim = Self {
            seed,
            servers,
            clients: BTreeMap::new(),
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            channel_last: HashMap::new(),
            halted: vec![false; n],
            history: Vec::new(),
            op_index: HashMap::new(),
            trace: Trace::default(),
            record: cfg.record_trace,
            last_digest,
            events: 0,
            steps: 0,
            transitions: 0,
            since_round: 0,
            tag_values: HashMap::new(),
            deep_violations: Vec::new(),
            peak_list_len: 0,
            probe_results: HashMap::new(),
            cfg: Arc::clone(&cfg),
        };
        for (id, home, plan) in &cfg.clients {
            sim.clients.insert(
                *id,
                ClientSlot {
                    client: Client::new(*id, *home),
                    queue: plan.iter().cloned().collect(),
                    last_done: 0,
                    issued: 0,
                },
            );
            sim.schedule_next_issue(*id);
        }
        for h in &cfg.halts {
            sim.push(h.at, EventKind::Halt { server: h.server });
        }
        sim
    }

    /// Runs to quiescence or the step cap.
    pub fn run(mut self) -> RunOutcome {
        let termination = self.drive();
        let servers = self.servers.clone();
        RunOutcome {
            seed: self.seed,
            protocol: self.cfg.protocol,
            termination,
            end_time: self.now,
            events: self.events,
            transitions: self.transitions,
            history: std::mem::take(&mut self.history),
            trace: std::mem::take(&mut self.trace),
            servers,
            halted: self.cfg.ever_halted(),
            deep_violations: std::mem::take(&mut self.deep_violations),
            peak_list_len: self.peak_list_len,
            sim: Some(Box::new(self)),
        }
    }

    fn drive(&mut self) -> Termination {
        loop {
            while let Some(ev) = self.heap.pop() {
                if self.steps >= self.cfg.step_cap {
                    return Termination::StepCap;
                }
                self.steps += 1;
                self.events += 1;
                self.now = ev.time;
                self.handle(ev.kind);
                self.since_round += 1;
                if self.since_round >= self.cfg.fairness.max(1) {
                    self.since_round = 0;
                    self.full_round();
                }
            }
            // Nothing in flight: tick every live server until a round
            // neither changes state nor emits anything.
            loop {
                if self.steps >= self.cfg.step_cap {
                    return Termination::StepCap;
                }
                self.steps += 1;
                let (changed, emitted) = self.quiescence_round();
                if emitted {
                    break;
                }
                if !changed {
                    return Termination::Quiescent;
                }
            }
        }
    }

    fn push(&mut self, time: Ticks, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Scheduled {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn schedule_next_issue(&mut self, client: ClientId) {
        let slot = &self.clients[&client];
        if let Some(next) = slot.queue.front() {
            let at = next.not_before.max(slot.last_done + next.think).max(self.now);
            self.push(at, EventKind::Issue { client });
        }
    }

    fn edge_delay(&mut self, from: usize, to: usize) -> Ticks {
        let base = match &self.cfg.graph {
            Some(g) => units_to_ticks(g.d(from, to)),
            None => TICKS_PER_UNIT,
        };
        match self.cfg.delay {
            DelayModel::Fixed => base,
            DelayModel::Random { jitter } => {
                let hi = ((base as f64) * jitter.max(1.0)).round() as Ticks;
                self.rng.gen_range(base..=hi.max(base))
            }
        }
    }

    /// Schedules a delivery on `from -> to`, applying holds and the FIFO
    /// clamp.
    fn send(&mut self, from: Node, to: Node, delay: Ticks, kind: EventKind) {
        let mut at = self.now + delay;
        if let (Node::Server(f), Node::Server(t)) = (from, to) {
            for h in &self.cfg.holds {
                if h.from == f && h.to == t && h.start <= self.now && self.now < h.until {
                    at = at.max(h.until);
                }
            }
        }
        let last = self.channel_last.entry((from, to)).or_insert(0);
        at = at.max(*last);
        *last = at;
        self.push(at, kind);
    }

    fn route(&mut self, server: usize, outputs: &[Output]) {
        for o in outputs {
            match o {
                Output::Server { to, msg } => {
                    let d = self.edge_delay(server, *to);
                    self.send(
                        Node::Server(server),
                        Node::Server(*to),
                        d,
                        EventKind::ToServer {
                            from: server,
                            to: *to,
                            msg: msg.clone(),
                        },
                    );
                }
                Output::Client { client, resp } => {
                    self.send(
                        Node::Server(server),
                        Node::Client(*client),
                        self.cfg.client_delay,
                        EventKind::ToClient {
                            client: *client,
                            response: resp.clone(),
                        },
                    );
                }
            }
        }
    }

    fn handle(&mut self, kind: EventKind) {
        match kind {
            EventKind::Halt { server } => {
                self.halted[server] = true;
                if self.record {
                    self.trace.push(TraceRecord {
                        time: self.now,
                        node: Node::Server(server),
                        event: TraceEvent::Halt,
                        state_digest: None,
                        emitted: Vec::new(),
                    });
                }
            }
            EventKind::Issue { client } => self.issue(client),
            EventKind::Request { home, request } => {
                if self.halted[home] {
                    return;
                }
                if let Some(&i) = self.op_index.get(&request.opid()) {
                    self.history[i].delivered_at = Some(self.now);
                }
                let result = match &request {
                    ClientRequest::Write {
                        client,
                        opid,
                        object,
                        value,
                    } => self.servers[home].on_write(*client, *opid, *object, value.clone()),
                    ClientRequest::Read { client, opid, object } => self.servers[home].on_read(*client, *opid, *object),
                };
                let outputs = self.expect_ok(home, result);
                if let ClientRequest::Write { opid, value, .. } = &request {
                    let acked = outputs.iter().find_map(|o| match o {
                        Output::Client {
                            resp: ClientResponse::WriteReturn { opid: a, tag },
                            ..
                        } if a == opid => Some(tag.clone()),
                        _ => None,
                    });
                    if let Some(tag) = &acked {
                        self.tag_values.insert(tag.clone(), value.clone());
                    }
                    if let Some(&i) = self.op_index.get(opid) {
                        self.history[i].ack_in_delivery = Some(acked.is_some());
                        self.history[i].tag = acked;
                    }
                }
                self.after_server_transition(home, TraceEvent::Request { request }, outputs, true);
                self.tick(home);
            }
            EventKind::ToServer { from, to, msg } => {
                if self.halted[to] {
                    return;
                }
                let result = self.servers[to].on_server_message(from, msg.clone());
                let outputs = self.expect_ok(to, result);
                self.after_server_transition(to, TraceEvent::Deliver { from, msg }, outputs, true);
                self.tick(to);
            }
            EventKind::ToClient { client, response } => self.deliver_response(client, response),
        }
    }

    fn issue(&mut self, client: ClientId) {
        let slot = self.clients.get_mut(&client).expect("known client");
        if !slot.client.is_idle() {
            return;
        }
        let Some(planned) = slot.queue.pop_front() else {
            return;
        };
        let plan_index = slot.issued;
        slot.issued += 1;
        let home = slot.client.home();
        let request = match &planned.op {
            OpSpec::Write { object, value } => slot.client.invoke_write(*object, value.clone()),
            OpSpec::Read { object } => slot.client.invoke_read(*object),
        }
        .expect("idle client accepts an operation");
        let (kind, value) = match &planned.op {
            OpSpec::Write { value, .. } => (OpKind::Write, Some(value.clone())),
            OpSpec::Read { .. } => (OpKind::Read, None),
        };
        self.op_index.insert(request.opid(), self.history.len());
        self.history.push(OperationRecord {
            client,
            opid: request.opid(),
            kind,
            object: planned.op.object(),
            home,
            value,
            invoked_at: self.now,
            delivered_at: None,
            responded_at: None,
            ts: None,
            tag: None,
            ack_in_delivery: None,
            plan_index,
        });
        if self.record {
            self.trace.push(TraceRecord {
                time: self.now,
                node: Node::Client(client),
                event: TraceEvent::Invoke {
                    request: request.clone(),
                },
                state_digest: None,
                emitted: Vec::new(),
            });
        }
        self.send(
            Node::Client(client),
            Node::Server(home),
            self.cfg.client_delay,
            EventKind::Request { home, request },
        );
    }

    fn deliver_response(&mut self, client: ClientId, response: ClientResponse) {
        if client >= PROBE_CLIENT_BASE {
            if let ClientResponse::ReadReturn { value, .. } = response {
                self.probe_results.insert(client, value);
            }
            return;
        }
        let Some(slot) = self.clients.get_mut(&client) else {
            return;
        };
        let Some(done) = slot.client.on_response(&response) else {
            return;
        };
        slot.last_done = self.now;
        if let Some(&i) = self.op_index.get(&done.opid) {
            let rec = &mut self.history[i];
            rec.responded_at = Some(self.now);
            rec.ts = done.ts.clone();
            if done.kind == OpKind::Read {
                rec.value = Some(done.value.clone());
            } else {
                rec.tag = done.tag.clone();
            }
        }
        if self.record {
            self.trace.push(TraceRecord {
                time: self.now,
                node: Node::Client(client),
                event: TraceEvent::Response { response },
                state_digest: None,
                emitted: Vec::new(),
            });
        }
        self.schedule_next_issue(client);
    }

    fn expect_ok(&mut self, server: usize, result: Result<Vec<Output>, crate::error::ProtocolError>) -> Vec<Output> {
        result.unwrap_or_else(|e| {
            self.deep_violations
                .push(format!("t={} s{}: protocol error: {e}", self.now, server + 1));
            Vec::new()
        })
    }

    /// Runs the three internal actions once each, in random order.
    fn tick(&mut self, server: usize) -> bool {
        let mut actions = InternalAction::ALL;
        actions.shuffle(&mut self.rng);
        let mut emitted = false;
        for a in actions {
            emitted |= self.internal(server, a);
        }
        emitted
    }

    fn internal(&mut self, server: usize, action: InternalAction) -> bool {
        if self.halted[server] {
            return false;
        }
        let result = self.servers[server].internal(action);
        let outputs = self.expect_ok(server, result);
        let emitted = !outputs.is_empty();
        self.after_server_transition(server, TraceEvent::Internal { action }, outputs, false);
        emitted
    }

    fn full_round(&mut self) {
        for s in 0..self.servers.len() {
            self.tick(s);
        }
    }

    /// One idle round over all live servers: `(state changed, emitted)`.
    fn quiescence_round(&mut self) -> (bool, bool) {
        let mut changed = false;
        let mut emitted = false;
        for s in 0..self.servers.len() {
            if self.halted[s] {
                continue;
            }
            let before = self.servers[s].clone();
            emitted |= self.tick(s);
            changed |= before != self.servers[s];
        }
        (changed, emitted)
    }

    fn after_server_transition(&mut self, server: usize, event: TraceEvent, outputs: Vec<Output>, always_record: bool) {
        self.transitions += 1;
        self.deep_probe(server, &outputs);
        let digest = self.servers[server].digest();
        let changed = digest != self.last_digest[server];
        if self.record && (always_record || changed || !outputs.is_empty()) {
            self.trace.push(TraceRecord {
                time: self.now,
                node: Node::Server(server),
                event,
                state_digest: Some(digest.clone()),
                emitted: outputs.clone(),
            });
        }
        if changed {
            self.last_digest[server] = digest;
        }
        self.route(server, &outputs);
    }

    fn value_of(&self, tag: &Tag) -> Option<Value> {
        if tag.is_zero() {
            Some(self.cfg.code.zero_value())
        } else {
            self.tag_values.get(tag).cloned()
        }
    }

    fn encode_at(&self, server: usize, tagvec: &[Tag]) -> Result<Value, String> {
        let values = tagvec
            .iter()
            .map(|t| self.value_of(t).ok_or_else(|| format!("unknown tag {t}")))
            .collect::<Result<Vec<_>, _>>()?;
        self.cfg.code.encode_symbol(server, &values).map_err(|e| e.to_string())
    }

    /// Checks the state of `server` against the ground truth of which value
    /// each tag stands for.
    fn deep_probe(&mut self, server: usize, outputs: &[Output]) {
        let mut found = Vec::new();
        let s = &self.servers[server];
        let m = s.codeword();
        match self.encode_at(server, &m.tagvec) {
            Ok(v) if v == m.val => {}
            Ok(_) => found.push("M.val does not encode the values of M.tagvec".to_string()),
            Err(e) => found.push(format!("M.tagvec: {e}")),
        }
        for x in 0..self.cfg.code.k() {
            let list = s.list(x);
            self.peak_list_len = self.peak_list_len.max(list.len());
            for e in list {
                if self.value_of(&e.tag).as_ref() != Some(&e.value) {
                    found.push(format!("L[X{}] holds a wrong value for tag {}", x + 1, e.tag));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for r in s.readl() {
            if !seen.insert((r.client, r.opid)) {
                found.push(format!("ReadL holds two tuples for {}", r.opid));
            }
        }
        for o in outputs {
            if let Output::Server {
                msg: ServerMessage::ValRespEncoded { symbol, encoded, .. },
                ..
            } = o
            {
                match self.encode_at(server, encoded) {
                    Ok(v) if &v == symbol => {}
                    _ => found.push("ValRespEncoded symbol does not encode its tags".to_string()),
                }
            }
        }
        for f in found {
            self.deep_violations
                .push(format!("t={} s{}: {f}", self.now, server + 1));
        }
    }

    /// Injects a read from a fresh probe client and runs to quiescence.
    fn probe_read(&mut self, client: ClientId, server: usize, object: usize) -> Option<Value> {
        let request = ClientRequest::Read {
            client,
            opid: OpId::new(client, 1),
            object,
        };
        self.push(self.now, EventKind::Request { home: server, request });
        let saved_cap = self.steps;
        self.drive();
        self.steps = saved_cap;
        self.probe_results.remove(&client)
    }
}

/// Runs `cfg` with `seed` to completion.
pub fn run(cfg: Arc<SimConfig>, seed: u64) -> RunOutcome {
    Simulation::new(cfg, seed).run()
}
