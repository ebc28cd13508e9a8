//! The acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Two criteria are known to fail for reasons outside the implementation
//! (see README, "Known deviations"). They are run and reported like the
//! others but do not fail the target; every other criterion must pass.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use causalec::checker::Participant;
use causalec::harness::{
    appendix_a_scenario, eventual_reorder_scenario, fig1_scenario, fuzz_config, latency_comparison, run_fuzz,
    summarize, FuzzParams, FuzzSummary,
};
use causalec::simnet::trace::{Node, TraceEvent};
use causalec::{
    check_causal, validate_witness, ClientRequest, ClientResponse, LinearCode, Output, PrimeField, Protocol,
    RunOutcome, ServerMessage, Simulation, Value, Verdict,
};

const FUZZ_RUNS: u64 = 1000;

/// Criteria allowed to fail, with the reason printed next to them.
const KNOWN: &[(u32, &str)] = &[
    (
        2,
        "the published R2 lists {1,3,4}, a superset of {1,4}, so it is not minimal",
    ),
    (
        3,
        "no edge weighting reproduces all five published latency values at once",
    ),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let started = Instant::now();
    let fuzz_started = Instant::now();
    let causal_reports = run_fuzz(0..FUZZ_RUNS, Protocol::CausalEc, FuzzParams::default());
    let fuzz_secs = fuzz_started.elapsed().as_secs_f64();
    let causal = summarize(&causal_reports);
    let eventual = summarize(&run_fuzz(0..FUZZ_RUNS, Protocol::EventualEc, FuzzParams::default()));

    let criteria: Vec<(u32, &str, Outcome)> = vec![
        (1, "code algebra over GF(7), all 343 inputs", code_algebra()),
        (2, "minimal recovery sets match the published lists", recovery_sets()),
        (3, "read latency reproduction", latency()),
        (
            4,
            "causal consistency over 1000 fuzz runs",
            causal_at_scale(&causal, fuzz_secs),
        ),
        (5, "write locality", write_locality(&causal)),
        (6, "read liveness", read_liveness(&causal)),
        (
            7,
            "eventual consistency and storage at quiescence",
            convergence(&causal),
        ),
        (8, "runtime invariant probes", invariants(&causal)),
        (9, "EventualEC differential", differential(&eventual)),
        (10, "determinism of traces", determinism()),
    ];

    let mut unexpected = Vec::new();
    for (n, name, o) in &criteria {
        let known = KNOWN.iter().find(|(k, _)| k == n);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {status}  {name}: {}", o.detail);
        if !o.pass {
            match known {
                Some((_, why)) => println!("             known deviation: {why}"),
                None => unexpected.push(*n),
            }
        }
    }
    let passed = criteria.iter().filter(|(_, _, o)| o.pass).count();
    println!(
        "acceptance: {passed}/{} criteria pass in {:.1}s",
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

// ---- 1 ---------------------------------------------------------------

fn code_algebra() -> Outcome {
    let t = Instant::now();
    let p = 7u64;
    let f = PrimeField::new(p).unwrap();
    let code = LinearCode::five_server(f, 1);
    // Rows written out independently of the library's constructor.
    let rows: [[u64; 3]; 5] = [[1, 0, 0], [0, 1, 0], [1, 1, 1], [1, 1, 0], [0, 0, 1]];
    let sym = |row: &[u64; 3], x: &[u64; 3]| Value::new(vec![row.iter().zip(x).map(|(c, v)| c * v).sum::<u64>() % p]);
    let mut decodes = 0usize;
    let mut reencodes = 0usize;
    let mut problems = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let x = [a, b, c];
                let xv: Vec<Value> = x.iter().map(|&v| Value::new(vec![v])).collect();
                let y: Vec<Value> = rows.iter().map(|r| sym(r, &x)).collect();
                if code.encode(&xv).unwrap() != y {
                    problems.push(format!("encode {x:?}"));
                }
                let symbols: BTreeMap<usize, Value> = y.iter().cloned().enumerate().collect();
                for (obj, want) in xv.iter().enumerate() {
                    for rs in code.minimal_recovery_sets(obj).unwrap() {
                        let only: BTreeMap<usize, Value> =
                            rs.members.iter().map(|&j| (j, symbols[&j].clone())).collect();
                        decodes += 1;
                        if code.decode(rs, &only).unwrap() != *want {
                            problems.push(format!("decode x{} via {:?} at {x:?}", obj + 1, rs.members));
                        }
                    }
                }
                for (i, row) in rows.iter().enumerate() {
                    for k in 0..3 {
                        for new in 0..p {
                            let mut x2 = x;
                            x2[k] = new;
                            let fresh = sym(row, &x2);
                            let old = Value::new(vec![x[k]]);
                            let newv = Value::new(vec![new]);
                            let zero = Value::new(vec![0]);
                            let forms = [
                                code.reencode(i, k, &y[i], &old, &newv).unwrap(),
                                code.reencode(i, k, &y[i], &zero, &Value::new(vec![(new + p - x[k]) % p]))
                                    .unwrap(),
                                code.reencode(i, k, &y[i], &Value::new(vec![(x[k] + p - new) % p]), &zero)
                                    .unwrap(),
                            ];
                            reencodes += 1;
                            if forms.iter().any(|g| g != &fresh) {
                                problems.push(format!("reencode s{} x{} at {x:?} -> {new}", i + 1, k + 1));
                            }
                        }
                    }
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        problems.is_empty() && secs < 1.0,
        format!(
            "{decodes} decodes and {reencodes} re-encodes (3 forms each), {} mismatches, {secs:.3}s{}",
            problems.len(),
            problems.first().map(|p| format!(", first: {p}")).unwrap_or_default()
        ),
    )
}

// ---- 2 ---------------------------------------------------------------

fn recovery_sets() -> Outcome {
    let code = LinearCode::five_server(PrimeField::new(257).unwrap(), 1);
    let published: [&[&[usize]]; 3] = [
        &[&[1], &[2, 4], &[2, 3, 5]],
        &[&[2], &[1, 4], &[1, 3, 5], &[1, 3, 4]],
        &[&[5], &[3, 4], &[1, 2, 3]],
    ];
    let mut details = Vec::new();
    let mut all = true;
    for (obj, sets) in published.iter().enumerate() {
        let want: BTreeSet<BTreeSet<usize>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
        let got: BTreeSet<BTreeSet<usize>> = code
            .minimal_recovery_sets(obj)
            .unwrap()
            .iter()
            .map(|rs| rs.members.iter().map(|j| j + 1).collect())
            .collect();
        let ok = got == want;
        all &= ok;
        details.push(format!(
            "R{} {} {}",
            obj + 1,
            if ok { "=" } else { "!=" },
            fmt_sets(&got)
        ));
    }
    outcome(all, details.join("; "))
}

fn fmt_sets(sets: &BTreeSet<BTreeSet<usize>>) -> String {
    let inner: Vec<String> = sets
        .iter()
        .map(|s| format!("{{{}}}", s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("{{{}}}", inner.join(","))
}

// ---- 3 ---------------------------------------------------------------

fn latency() -> Outcome {
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;
    let main = latency_comparison(&fig1_scenario()).unwrap();
    let alt = latency_comparison(&appendix_a_scenario()).unwrap();
    // The published 2.83 is checked to the stated 1e-9; 17/6 only matches
    // it to two decimals, which the detail line shows.
    let checks = [
        ("EC worst", main.code.worst, 4.5, close(main.code.worst, 4.5, 1e-9)),
        (
            "EC average",
            main.code.average,
            2.83,
            close(main.code.average, 2.83, 1e-9),
        ),
        (
            "alternate average",
            alt.code.average,
            2.7,
            close(alt.code.average, 2.7, 1e-9),
        ),
        (
            "replication worst",
            main.replication.best_worst,
            6.0,
            close(main.replication.best_worst, 6.0, 1e-9),
        ),
        (
            "replication average",
            main.replication.best_average,
            2.8,
            close(main.replication.best_average, 2.8, 1e-9),
        ),
    ];
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, got, want, ok)| format!("{name} {got:.4} ({}{want})", if *ok { "=" } else { "want " }))
        .collect();
    outcome(checks.iter().all(|c| c.3), detail.join(", "))
}

// ---- 4 to 8 ------------------------------------------------------------

fn causal_at_scale(s: &FuzzSummary, secs: f64) -> Outcome {
    outcome(
        s.runs as u64 == FUZZ_RUNS && s.causal_failures.is_empty() && secs < 60.0,
        format!(
            "{} runs ({} with a halted server), causal failures {:?}, {secs:.1}s",
            s.runs, s.runs_with_halt, s.causal_failures
        ),
    )
}

/// Scans the transition log directly: the delivery of every write request
/// must emit that write's acknowledgement.
fn trace_locality(outcome: &RunOutcome) -> (usize, usize) {
    let mut writes = 0;
    let mut bad = 0;
    for r in &outcome.trace.records {
        let (Node::Server(_), TraceEvent::Request { request }) = (&r.node, &r.event) else {
            continue;
        };
        let ClientRequest::Write { client, opid, .. } = request else {
            continue;
        };
        writes += 1;
        let acked = r.emitted.iter().any(|o| {
            matches!(o, Output::Client { client: c, resp: ClientResponse::WriteReturn { opid: id, .. } }
                if c == client && id == opid)
        });
        if !acked {
            bad += 1;
        }
    }
    (writes, bad)
}

fn write_locality(s: &FuzzSummary) -> Outcome {
    let mut scanned = 0;
    let mut bad = 0;
    for seed in 0..100 {
        let cfg = Arc::new(fuzz_config(seed, Protocol::CausalEc, FuzzParams::default()));
        let (w, b) = trace_locality(&Simulation::new(cfg, seed).run());
        scanned += w;
        bad += b;
    }
    outcome(
        s.locality_violations == 0 && s.writes_delivered > 0 && bad == 0 && scanned > 0,
        format!(
            "{} violations over {} delivered writes; trace scan of 100 runs: {bad} of {scanned}",
            s.locality_violations, s.writes_delivered
        ),
    )
}

fn read_liveness(s: &FuzzSummary) -> Outcome {
    outcome(
        s.reads_required > 0 && s.reads_required == s.reads_required_completed && s.liveness_failures.is_empty(),
        format!(
            "{}/{} reads with a live home server and recovery set completed",
            s.reads_required_completed, s.reads_required
        ),
    )
}

fn convergence(s: &FuzzSummary) -> Outcome {
    outcome(
        s.eventual_checked > 0
            && s.eventual_failures.is_empty()
            && s.storage_failures.is_empty()
            && s.not_quiescent.is_empty(),
        format!(
            "{} halt-free runs quiesced; eventual failures {:?}, storage failures {:?}",
            s.eventual_checked, s.eventual_failures, s.storage_failures
        ),
    )
}

fn invariants(s: &FuzzSummary) -> Outcome {
    outcome(
        s.invariant_failures.is_empty() && s.transitions_probed >= 100_000,
        format!(
            "{} transitions probed, violations in runs {:?}",
            s.transitions_probed, s.invariant_failures
        ),
    )
}

// ---- 9 ---------------------------------------------------------------

/// Server-to-server `App` deliveries as (time, receiver, sender, object, tag).
fn app_schedule(o: &RunOutcome) -> Vec<String> {
    o.trace
        .records
        .iter()
        .filter_map(|r| match (&r.node, &r.event) {
            (
                Node::Server(to),
                TraceEvent::Deliver {
                    from,
                    msg: ServerMessage::App { object, tag, .. },
                },
            ) => Some(format!("{}:{from}->{to}:{object}:{tag}", r.time)),
            _ => None,
        })
        .collect()
}

fn differential(ev: &FuzzSummary) -> Outcome {
    let fuzz_ok = ev.liveness_failures.is_empty()
        && ev.reads_required == ev.reads_required_completed
        && ev.eventual_checked > 0
        && ev.eventual_failures.is_empty()
        && ev.storage_failures.is_empty();

    let run = |protocol| {
        let sc = eventual_reorder_scenario(protocol);
        let cfg = sc.config(0).unwrap();
        let k = cfg.code.k();
        let zero = cfg.code.zero_value();
        let outcome = Simulation::new(Arc::new(cfg), 0).run();
        let report = check_causal(&outcome.history, k, &zero);
        let witness_ok = report.witness.as_ref().is_some_and(|w| {
            validate_witness(&outcome.history, k, &zero, w) && matches!(w.read, Participant::Op { .. })
        });
        (report.verdict, witness_ok, app_schedule(&outcome))
    };
    let (ev_verdict, ev_witness, ev_sched) = run(Protocol::EventualEc);
    let (c_verdict, _, c_sched) = run(Protocol::CausalEc);
    let same_schedule = ev_sched == c_sched && !ev_sched.is_empty();
    outcome(
        fuzz_ok && ev_verdict == Verdict::Fail && ev_witness && c_verdict == Verdict::Pass && same_schedule,
        format!(
            "fuzz under EventualEC: liveness {}/{}, eventual failures {:?}, storage failures {:?} \
             (causal failures on {} runs); crafted reorder: EventualEC {} (witness valid: {ev_witness}), \
             CausalEC {}, same App delivery schedule: {same_schedule}",
            ev.reads_required_completed,
            ev.reads_required,
            ev.eventual_failures,
            ev.storage_failures,
            ev.causal_failures.len(),
            ev_verdict.label(),
            c_verdict.label()
        ),
    )
}

// ---- 10 --------------------------------------------------------------

fn determinism() -> Outcome {
    let mut compared = 0;
    let mut mismatched = Vec::new();
    let mut distinct = BTreeSet::new();
    let hash = |cfg: Arc<causalec::SimConfig>, seed| Simulation::new(cfg, seed).run().trace.hash_hex();
    for seed in 0..25u64 {
        for protocol in [Protocol::CausalEc, Protocol::EventualEc] {
            let a = hash(Arc::new(fuzz_config(seed, protocol, FuzzParams::default())), seed);
            let b = hash(Arc::new(fuzz_config(seed, protocol, FuzzParams::default())), seed);
            compared += 1;
            if a != b {
                mismatched.push(seed);
            }
            distinct.insert(a);
        }
        let sc = fig1_scenario();
        let a = hash(Arc::new(sc.config(seed).unwrap()), seed);
        let b = hash(Arc::new(sc.config(seed).unwrap()), seed);
        compared += 1;
        if a != b {
            mismatched.push(seed);
        }
        distinct.insert(a);
    }
    outcome(
        mismatched.is_empty() && distinct.len() > 1,
        format!(
            "{compared} repeated runs over 25 seeds, {} mismatched, {} distinct hashes",
            mismatched.len(),
            distinct.len()
        ),
    )
}
