//! Trace checkers for causal consistency, convergence, storage, locality,
//! liveness and runtime invariants.
//!
//! Causal consistency is checked twice. Phase A builds the timestamp order
//! the correctness proof uses and verifies it against the definition. Phase
//! B needs no server internals: it closes program order and reads-from
//! under transitivity and looks for reads that are stale or return values
//! from their own future. Phase B witnesses are violations of every order,
//! so they are reported first.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::client::OpKind;
use crate::code::LinearCode;
use crate::field::Value;
use crate::server::{Server, StorageAccount};
use crate::simnet::{OperationRecord, Trace};
use crate::types::{tag_max, ClientId, OpId, Tag, VectorClock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The run did not reach the state the check needs.
    Inconclusive,
    /// The check's hypothesis does not hold for this run.
    NotApplicable,
}

impl Verdict {
    /// True unless the check failed.
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "n/a",
        }
    }
}

/// Generic verdict with human-readable reasons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub violations: Vec<String>,
}

impl CheckResult {
    fn from_violations(violations: Vec<String>) -> Self {
        Self {
            verdict: if violations.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            violations,
        }
    }

    fn with(verdict: Verdict, why: impl Into<String>) -> Self {
        Self {
            verdict,
            violations: vec![why.into()],
        }
    }
}

// ---- causal consistency ------------------------------------------------

/// An operation in a witness; initial writes are virtual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Participant {
    Initial { object: usize },
    Op { opid: OpId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// No write on the object ever carried the returned value.
    NoSuchValue,
    /// Every write with the returned value is overwritten before the read.
    Stale,
    /// The only write with the returned value happens after the read.
    FromTheFuture,
    /// The timestamp order is not transitive.
    NotPartialOrder,
    /// The timestamp order misses a program-order pair.
    ProgramOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// `'A'` for the timestamp order, `'B'` for happens-before.
    pub phase: char,
    pub kind: WitnessKind,
    /// The read (or, for order defects, the first operation).
    pub read: Participant,
    pub object: Option<usize>,
    pub value: Option<Value>,
    /// The candidate dictating write.
    pub dictating: Option<Participant>,
    /// The intervening write or the third operation of an order defect.
    pub intervening: Option<Participant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalReport {
    pub verdict: Verdict,
    pub phase_a: Verdict,
    pub phase_b: Verdict,
    pub reads_checked: usize,
    pub witness: Option<Witness>,
}

/// One node of the order: a real operation or a virtual initial write.
#[derive(Debug, Clone)]
struct OpView {
    who: Participant,
    client: Option<ClientId>,
    /// Position in the client's sequence; initial writes precede everything.
    po: usize,
    write: bool,
    object: usize,
    value: Option<Value>,
    ts: Option<VectorClock>,
    complete_read: bool,
}

fn views(history: &[OperationRecord], k: usize, zero: &Value) -> Vec<OpView> {
    let mut out: Vec<OpView> = (0..k)
        .map(|x| OpView {
            who: Participant::Initial { object: x },
            client: None,
            po: 0,
            write: true,
            object: x,
            value: Some(zero.clone()),
            ts: None,
            complete_read: false,
        })
        .collect();
    let mut per_client: BTreeMap<ClientId, Vec<&OperationRecord>> = BTreeMap::new();
    for r in history {
        per_client.entry(r.client).or_default().push(r);
    }
    for ops in per_client.values_mut() {
        ops.sort_by_key(|r| r.opid.seq);
        for (i, r) in ops.iter().enumerate() {
            let write = r.kind == OpKind::Write;
            let ts = if write {
                r.tag.as_ref().map(|t| t.ts.clone())
            } else {
                r.ts.clone()
            };
            out.push(OpView {
                who: Participant::Op { opid: r.opid },
                client: Some(r.client),
                po: i,
                write,
                object: r.object,
                value: r.value.clone(),
                ts,
                complete_read: !write && r.is_complete(),
            });
        }
    }
    out
}

fn is_initial(v: &OpView) -> bool {
    matches!(v.who, Participant::Initial { .. })
}

fn program_before(a: &OpView, b: &OpView) -> bool {
    a.client.is_some() && a.client == b.client && a.po < b.po
}

/// The timestamp order, extended with initial writes first.
fn ts_before(a: &OpView, b: &OpView) -> bool {
    if is_initial(b) {
        return false;
    }
    if is_initial(a) {
        return true;
    }
    match (&a.ts, &b.ts) {
        (Some(ta), Some(tb)) => {
            ta.lt(tb)
                || (ta == tb && a.write && !std::ptr::eq(a, b) && a.who != b.who)
                || (ta == tb && !a.write && !b.write && program_before(a, b))
        }
        (Some(_), None) => true,
        _ => false,
    }
}

/// Dense boolean relation stored as bit rows.
#[derive(Debug, Clone)]
struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Warshall closure over bit rows.
    fn close(&mut self) {
        for k in 0..self.n {
            let rk: Vec<u64> = self.row(k).to_vec();
            for i in 0..self.n {
                if self.get(i, k) {
                    let base = i * self.words;
                    for (w, bits) in rk.iter().enumerate() {
                        self.bits[base + w] |= bits;
                    }
                }
            }
        }
    }

    /// A triple `(i, j, l)` with `i < j < l` but not `i < l`, if any.
    fn transitivity_gap(&self) -> Option<(usize, usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.get(i, j) {
                    continue;
                }
                let (ri, rj) = (self.row(i), self.row(j));
                for w in 0..self.words {
                    let missing = rj[w] & !ri[w];
                    if missing != 0 {
                        let l = w * 64 + missing.trailing_zeros() as usize;
                        return Some((i, j, l));
                    }
                }
            }
        }
        None
    }
}

/// Writes on `object` carrying `value`, by index.
fn candidates(ops: &[OpView], object: usize, value: &Value) -> Vec<usize> {
    (0..ops.len())
        .filter(|&w| ops[w].write && ops[w].object == object && ops[w].value.as_ref() == Some(value))
        .collect()
}

/// The condition-2 search for one read under relation `rel`: returns the
/// witness if no write dictates it.
fn dictating_defect(ops: &[OpView], rel: &Relation, r: usize, phase: char) -> Option<Witness> {
    let read = &ops[r];
    let value = read.value.clone().expect("complete reads carry a value");
    let cands = candidates(ops, read.object, &value);
    let witness = |kind, dictating: Option<usize>, intervening: Option<usize>| Witness {
        phase,
        kind,
        read: read.who,
        object: Some(read.object),
        value: Some(value.clone()),
        dictating: dictating.map(|i| ops[i].who),
        intervening: intervening.map(|i| ops[i].who),
    };
    if cands.is_empty() {
        return Some(witness(WitnessKind::NoSuchValue, None, None));
    }
    let mut first_stale = None;
    let mut first_future = None;
    for &w in &cands {
        if !rel.get(w, r) {
            if first_future.is_none() {
                first_future = Some(w);
            }
            continue;
        }
        let over = (0..ops.len()).find(|&p| {
            ops[p].write
                && ops[p].object == read.object
                && ops[p].value.as_ref() != Some(&value)
                && rel.get(w, p)
                && rel.get(p, r)
        });
        let p = over?;
        if first_stale.is_none() {
            first_stale = Some((w, p));
        }
    }
    Some(match (first_stale, first_future) {
        (Some((w, p)), _) => witness(WitnessKind::Stale, Some(w), Some(p)),
        (None, Some(w)) => witness(WitnessKind::FromTheFuture, Some(w), None),
        (None, None) => unreachable!("candidates exist"),
    })
}

fn phase_a(ops: &[OpView]) -> (Verdict, Option<Witness>) {
    let n = ops.len();
    let mut rel = Relation::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && ts_before(&ops[i], &ops[j]) {
                rel.set(i, j);
            }
        }
    }
    let order_witness = |kind, a: usize, b: usize, c: Option<usize>| Witness {
        phase: 'A',
        kind,
        read: ops[a].who,
        object: None,
        value: None,
        dictating: Some(ops[b].who),
        intervening: c.map(|c| ops[c].who),
    };
    if let Some((i, j, l)) = rel.transitivity_gap() {
        return (
            Verdict::Fail,
            Some(order_witness(WitnessKind::NotPartialOrder, i, j, Some(l))),
        );
    }
    if let Some(i) = (0..n).find(|&i| rel.get(i, i)) {
        return (
            Verdict::Fail,
            Some(order_witness(WitnessKind::NotPartialOrder, i, i, None)),
        );
    }
    for i in 0..n {
        for j in 0..n {
            if program_before(&ops[i], &ops[j]) && !rel.get(i, j) {
                return (
                    Verdict::Fail,
                    Some(order_witness(WitnessKind::ProgramOrder, i, j, None)),
                );
            }
        }
    }
    for r in (0..n).filter(|&r| ops[r].complete_read) {
        if let Some(w) = dictating_defect(ops, &rel, r, 'A') {
            return (Verdict::Fail, Some(w));
        }
    }
    (Verdict::Pass, None)
}

/// Happens-before: program order, initial writes first, and reads-from
/// edges where the returned value names exactly one write.
fn happens_before(ops: &[OpView]) -> Relation {
    let n = ops.len();
    let mut rel = Relation::new(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if (is_initial(&ops[i]) && !is_initial(&ops[j])) || program_before(&ops[i], &ops[j]) {
                rel.set(i, j);
            }
        }
    }
    for r in (0..n).filter(|&r| ops[r].complete_read) {
        let v = ops[r].value.as_ref().expect("complete reads carry a value");
        if let [w] = candidates(ops, ops[r].object, v)[..] {
            rel.set(w, r);
        }
    }
    rel.close();
    rel
}

fn phase_b(ops: &[OpView]) -> (Verdict, Option<Witness>) {
    let rel = happens_before(ops);
    for r in (0..ops.len()).filter(|&r| ops[r].complete_read) {
        if let Some(w) = dictating_defect(ops, &rel, r, 'B') {
            // Under happens-before a write that is not before the read is
            // only a violation if it is provably after it.
            if w.kind == WitnessKind::FromTheFuture {
                let v = w.value.as_ref().unwrap();
                let cands = candidates(ops, ops[r].object, v);
                let stale_or_after = cands.iter().all(|&c| {
                    rel.get(r, c)
                        || (0..ops.len()).any(|p| {
                            ops[p].write
                                && ops[p].object == ops[r].object
                                && ops[p].value.as_ref() != Some(v)
                                && rel.get(c, p)
                                && rel.get(p, r)
                        })
                });
                if !(cands.len() == 1 && stale_or_after) {
                    continue;
                }
            }
            return (Verdict::Fail, Some(w));
        }
    }
    (Verdict::Pass, None)
}

/// Checks the operation history against causal consistency.
pub fn check_causal(history: &[OperationRecord], k: usize, zero: &Value) -> CausalReport {
    let ops = views(history, k, zero);
    let reads_checked = ops.iter().filter(|o| o.complete_read).count();
    let (a, wa) = phase_a(&ops);
    let (b, wb) = phase_b(&ops);
    let verdict = if a == Verdict::Fail || b == Verdict::Fail {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    CausalReport {
        verdict,
        phase_a: a,
        phase_b: b,
        reads_checked,
        witness: wb.or(wa),
    }
}

/// Re-derives a witness from the history alone, without the relations
/// the checker built. True if it is a genuine violation.
pub fn validate_witness(history: &[OperationRecord], k: usize, zero: &Value, w: &Witness) -> bool {
    let ops = views(history, k, zero);
    let idx = |p: &Participant| ops.iter().position(|o| &o.who == p);
    let before: Box<dyn Fn(usize, usize) -> bool> = if w.phase == 'A' {
        Box::new(|a, b| a != b && ts_before(&ops[a], &ops[b]))
    } else {
        let edges: Vec<Vec<usize>> = (0..ops.len())
            .map(|i| {
                (0..ops.len())
                    .filter(|&j| {
                        i != j
                            && ((is_initial(&ops[i]) && !is_initial(&ops[j]))
                                || program_before(&ops[i], &ops[j])
                                || (ops[j].complete_read
                                    && candidates(&ops, ops[j].object, ops[j].value.as_ref().unwrap()) == [i]))
                    })
                    .collect()
            })
            .collect();
        Box::new(move |a, b| {
            let mut seen = vec![false; edges.len()];
            let mut q = VecDeque::from([a]);
            while let Some(x) = q.pop_front() {
                for &y in &edges[x] {
                    if y == b {
                        return true;
                    }
                    if !seen[y] {
                        seen[y] = true;
                        q.push_back(y);
                    }
                }
            }
            false
        })
    };
    let Some(r) = idx(&w.read) else {
        return false;
    };
    match w.kind {
        WitnessKind::NoSuchValue => {
            let v = w.value.as_ref().unwrap();
            ops[r].complete_read && ops[r].value.as_ref() == Some(v) && candidates(&ops, ops[r].object, v).is_empty()
        }
        WitnessKind::Stale => {
            let (Some(d), Some(p)) = (w.dictating.as_ref().and_then(idx), w.intervening.as_ref().and_then(idx)) else {
                return false;
            };
            let v = ops[r].value.clone().unwrap();
            let all_stale = candidates(&ops, ops[r].object, &v).iter().all(|&c| {
                !before(c, r)
                    || (0..ops.len()).any(|q| {
                        ops[q].write
                            && ops[q].object == ops[r].object
                            && ops[q].value.as_ref() != Some(&v)
                            && before(c, q)
                            && before(q, r)
                    })
            });
            ops[p].write
                && ops[p].object == ops[r].object
                && ops[p].value.as_ref() != Some(&v)
                && before(d, p)
                && before(p, r)
                && all_stale
        }
        WitnessKind::FromTheFuture => {
            let v = ops[r].value.clone().unwrap();
            let cands = candidates(&ops, ops[r].object, &v);
            if w.phase == 'B' {
                cands.len() == 1 && before(r, cands[0])
            } else {
                cands.iter().all(|&c| !before(c, r))
            }
        }
        WitnessKind::NotPartialOrder => {
            let Some(j) = w.dictating.as_ref().and_then(idx) else {
                return false;
            };
            match w.intervening.as_ref().and_then(idx) {
                Some(l) => before(r, j) && before(j, l) && !before(r, l),
                None => r == j && before(r, r),
            }
        }
        WitnessKind::ProgramOrder => {
            let Some(j) = w.dictating.as_ref().and_then(idx) else {
                return false;
            };
            program_before(&ops[r], &ops[j]) && !before(r, j)
        }
    }
}

// ---- convergence and storage -------------------------------------------

/// The value the last write (by tag) left in each object, or `zero`.
pub fn final_values(history: &[OperationRecord], k: usize, zero: &Value) -> Vec<(Option<Tag>, Value)> {
    (0..k)
        .map(|x| {
            let writes: Vec<&OperationRecord> = history
                .iter()
                .filter(|o| o.is_write() && o.object == x && o.tag.is_some())
                .collect();
            let tags: Vec<&Tag> = writes.iter().filter_map(|o| o.tag.as_ref()).collect();
            match tag_max(tags.iter().copied()) {
                Ok(t) => {
                    let w = writes.iter().find(|o| o.tag.as_ref() == Some(t)).unwrap();
                    (Some(t.clone()), w.value.clone().unwrap())
                }
                Err(_) => (None, zero.clone()),
            }
        })
        .collect()
}

/// Every probe read returns the value of the highest-tagged write.
pub fn check_eventual(
    history: &[OperationRecord],
    probes: &[Vec<Option<Value>>],
    k: usize,
    zero: &Value,
    quiesced: bool,
    halted: &BTreeSet<usize>,
) -> CheckResult {
    if !quiesced {
        return CheckResult::with(Verdict::Inconclusive, "run did not quiesce");
    }
    if !halted.is_empty() {
        return CheckResult::with(Verdict::NotApplicable, "run has halted servers");
    }
    let expect = final_values(history, k, zero);
    let mut v = Vec::new();
    for (s, row) in probes.iter().enumerate() {
        for (x, got) in row.iter().enumerate() {
            match got {
                None => v.push(format!("probe read of X{} at s{} did not complete", x + 1, s + 1)),
                Some(val) if val != &expect[x].1 => v.push(format!(
                    "probe read of X{} at s{} returned {val}, expected {}",
                    x + 1,
                    s + 1,
                    expect[x].1
                )),
                _ => {}
            }
        }
    }
    CheckResult::from_violations(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageReport {
    pub result: CheckResult,
    pub per_server: Vec<StorageAccount>,
    /// Metadata entries allowed per server for this run's write count.
    pub metadata_bound: usize,
}

/// Upper bound on a quiescent server's metadata in clock entries. Each of
/// the `w + 1` tags per object can appear in `DelL` once per sender, and
/// every tag has `n + 1` entries.
pub fn metadata_bound(n: usize, k: usize, writes: usize) -> usize {
    let tag = n + 1;
    k * n * (writes + 1) * (tag + 1) + 3 * k * tag + n
}

/// Quiescent storage: empty queues and lists, one symbol of payload per
/// server, encodings at the final versions, bounded metadata.
pub fn check_storage(
    servers: &[Server],
    code: &LinearCode,
    history: &[OperationRecord],
    quiesced: bool,
    halted: &BTreeSet<usize>,
) -> StorageReport {
    let per_server: Vec<StorageAccount> = servers.iter().map(Server::storage).collect();
    let writes = history.iter().filter(|o| o.is_write()).count();
    let bound = metadata_bound(code.n(), code.k(), writes);
    let wrap = |result| StorageReport {
        result,
        per_server: per_server.clone(),
        metadata_bound: bound,
    };
    if !quiesced {
        return wrap(CheckResult::with(Verdict::Inconclusive, "run did not quiesce"));
    }
    if !halted.is_empty() {
        return wrap(CheckResult::with(Verdict::NotApplicable, "run has halted servers"));
    }
    let zero = code.zero_value();
    let finals = final_values(history, code.k(), &zero);
    let mut v = Vec::new();
    for (s, srv) in servers.iter().enumerate() {
        let mut sentinel_elements = 0;
        for (x, (tag, _)) in finals.iter().enumerate() {
            let list = srv.list(x);
            let sentinel_only = tag.is_none() && list.len() == 1 && list[0].tag.is_zero() && list[0].value == zero;
            if sentinel_only {
                sentinel_elements += zero.len();
            } else if !list.is_empty() {
                v.push(format!("s{}: L[X{}] holds {} entries", s + 1, x + 1, list.len()));
            }
        }
        if !srv.inqueue().is_empty() {
            v.push(format!("s{}: InQueue holds {} entries", s + 1, srv.inqueue().len()));
        }
        if !srv.readl().is_empty() {
            v.push(format!("s{}: ReadL holds {} entries", s + 1, srv.readl().len()));
        }
        let acc = &per_server[s];
        if acc.symbol_elements != code.value_len() || acc.payload_elements() != code.value_len() + sentinel_elements {
            v.push(format!(
                "s{}: payload is {} field elements, expected one symbol of {}",
                s + 1,
                acc.payload_elements() - sentinel_elements,
                code.value_len()
            ));
        }
        if acc.metadata_entries > bound {
            v.push(format!(
                "s{}: {} metadata entries exceed the bound {bound}",
                s + 1,
                acc.metadata_entries
            ));
        }
        let m = srv.codeword();
        let mut values = Vec::with_capacity(code.k());
        for (x, (tag, value)) in finals.iter().enumerate() {
            let want = tag.clone().unwrap_or_else(|| Tag::zero(code.n()));
            if m.tagvec[x] != want {
                v.push(format!(
                    "s{}: M.tagvec[X{}] = {}, expected {want}",
                    s + 1,
                    x + 1,
                    m.tagvec[x]
                ));
            }
            values.push(value.clone());
        }
        match code.encode_symbol(s, &values) {
            Ok(sym) if sym == m.val => {}
            _ => v.push(format!("s{}: symbol does not encode the final values", s + 1)),
        }
    }
    wrap(CheckResult::from_violations(v))
}

// ---- locality and liveness ---------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LivenessReport {
    pub result: CheckResult,
    /// Writes whose request reached a live home server.
    pub writes_delivered: usize,
    /// Reads that must complete: home server and some recovery set never
    /// halted.
    pub reads_required: usize,
    pub reads_required_completed: usize,
    /// Reads exempt because their home or every recovery set halted.
    pub reads_exempt: usize,
}

/// True if `object` has a minimal recovery set with no member in `halted`.
pub fn recoverable_without(code: &LinearCode, object: usize, halted: &BTreeSet<usize>) -> bool {
    code.minimal_recovery_sets(object)
        .map(|sets| sets.iter().any(|rs| rs.members.is_disjoint(halted)))
        .unwrap_or(false)
}

/// Write acknowledgements are local, and operations complete whenever the
/// liveness hypothesis holds. A server that halts at any point counts as
/// halted for the whole run.
pub fn check_locality_and_liveness(
    history: &[OperationRecord],
    halted: &BTreeSet<usize>,
    code: &LinearCode,
    quiesced: bool,
) -> LivenessReport {
    let mut v = Vec::new();
    let mut report = LivenessReport {
        result: CheckResult::from_violations(Vec::new()),
        writes_delivered: 0,
        reads_required: 0,
        reads_required_completed: 0,
        reads_exempt: 0,
    };
    for o in history {
        match o.kind {
            OpKind::Write => {
                if o.delivered_at.is_some() {
                    report.writes_delivered += 1;
                    if o.ack_in_delivery != Some(true) {
                        v.push(format!("write {} was not acknowledged on delivery", o.opid));
                    }
                }
                if quiesced && !halted.contains(&o.home) && !o.is_complete() {
                    v.push(format!("write {} at live s{} never completed", o.opid, o.home + 1));
                }
            }
            OpKind::Read => {
                if halted.contains(&o.home) || !recoverable_without(code, o.object, halted) {
                    report.reads_exempt += 1;
                    continue;
                }
                report.reads_required += 1;
                if o.is_complete() {
                    report.reads_required_completed += 1;
                } else if quiesced {
                    v.push(format!(
                        "read {} of X{} at s{} never completed though a recovery set is live",
                        o.opid,
                        o.object + 1,
                        o.home + 1
                    ));
                }
            }
        }
    }
    report.result = CheckResult::from_violations(v);
    if report.result.verdict == Verdict::Pass && !quiesced {
        report.result = CheckResult::with(Verdict::Inconclusive, "run did not quiesce");
    }
    report
}

// ---- runtime invariants ------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub result: CheckResult,
    pub digests_checked: usize,
}

/// Scans every recorded server digest: error flags clear, `tmax <= M.tagvec`,
/// and `M.tagvec` and `vc` never move backwards. `deep` carries violations
/// the simulator found with full state access.
pub fn probe_invariants(trace: &Trace, n: usize, deep: &[String]) -> InvariantReport {
    let mut v: Vec<String> = deep.to_vec();
    let mut checked = 0;
    for s in 0..n {
        let mut prev: Option<&crate::server::StateDigest> = None;
        for (rec, d) in trace.digests_of(s) {
            checked += 1;
            let at = format!("t={} s{}", rec.time, s + 1);
            for (x, (&e1, &e2)) in d.error1.iter().zip(&d.error2).enumerate() {
                if e1 {
                    v.push(format!("{at}: Error1[X{}] set", x + 1));
                }
                if e2 {
                    v.push(format!("{at}: Error2[X{}] set", x + 1));
                }
            }
            for (x, (tm, tv)) in d.tmax.iter().zip(&d.tagvec).enumerate() {
                if !tm.le(tv) {
                    v.push(format!("{at}: tmax[X{}] = {tm} exceeds M.tagvec {tv}", x + 1));
                }
            }
            if let Some(p) = prev {
                for (x, (old, new)) in p.tagvec.iter().zip(&d.tagvec).enumerate() {
                    if !old.le(new) {
                        v.push(format!("{at}: M.tagvec[X{}] went from {old} to {new}", x + 1));
                    }
                }
                if !p.vc.le(&d.vc) {
                    v.push(format!("{at}: vc went from {} to {}", p.vc, d.vc));
                }
            }
            prev = Some(d);
        }
    }
    InvariantReport {
        result: CheckResult::from_violations(v),
        digests_checked: checked,
    }
}
