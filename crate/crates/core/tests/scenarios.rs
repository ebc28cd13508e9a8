//! The bundled worked scenarios, checked against their traces.

use std::sync::Arc;

use causalec::harness::{
    encoding_scenario_1, encoding_scenario_2, evaluate, read_scenario_1, read_scenario_2, run_scenario, Overrides,
};
use causalec::simnet::trace::{Node, TraceEvent, TraceRecord};
use causalec::{ClientResponse, OpKind, Output, RunOutcome, Scenario, ServerMessage, Simulation, Tag, Value};

fn run(sc: &Scenario) -> RunOutcome {
    Simulation::new(Arc::new(sc.config(0).unwrap()), 0).run()
}

fn val(v: u64) -> Value {
    Value::new(vec![v])
}

/// The transition at which `server` answered the client read of `object`.
fn read_return(o: &RunOutcome, server: usize, object: usize) -> (&TraceRecord, Value) {
    let op = o
        .history
        .iter()
        .find(|op| op.kind == OpKind::Read && op.home == server && op.object == object)
        .expect("scripted read");
    o.trace
        .records
        .iter()
        .find_map(|r| {
            if r.node != Node::Server(server) {
                return None;
            }
            r.emitted.iter().find_map(|e| match e {
                Output::Client {
                    resp: ClientResponse::ReadReturn { opid, value, .. },
                    ..
                } if *opid == op.opid => Some((r, value.clone())),
                _ => None,
            })
        })
        .expect("read returned")
}

fn write_tag(o: &RunOutcome, object: usize, value: u64) -> Tag {
    o.history
        .iter()
        .find(|op| op.is_write() && op.object == object && op.value == Some(val(value)))
        .and_then(|op| op.tag.clone())
        .expect("write completed")
}

#[test]
fn every_worked_scenario_passes_all_checks() {
    for sc in [
        encoding_scenario_1(),
        encoding_scenario_2(),
        read_scenario_1(),
        read_scenario_2(),
    ] {
        let report = run_scenario(&sc, 0..3, Overrides::default(), |_| {}).unwrap();
        for s in &report.seeds {
            assert!(s.passed, "{} seed {}: {:?}", sc.name, s.seed, s.checks.verdicts());
            assert_eq!(s.completed, s.operations, "{}", sc.name);
        }
    }
}

#[test]
fn read_1_is_decoded_from_server_4_despite_version_skew() {
    let o = run(&read_scenario_1());
    let (rec, value) = read_return(&o, 2, 2);
    assert_eq!(value, val(31));
    match &rec.event {
        TraceEvent::Deliver {
            from,
            msg: ServerMessage::ValRespEncoded { requested, encoded, .. },
        } => {
            assert_eq!(*from, 3, "completing response comes from server 4");
            // Server 4 lacked the requested X2 version, so its symbol was
            // re-encoded by the requester.
            assert_ne!(requested[1], encoded[1]);
        }
        e => panic!("read completed on {e:?}"),
    }
}

#[test]
fn read_2_completes_at_a_server_without_x3() {
    let sc = read_scenario_2();
    let o = run(&sc);
    let code = sc.build_code().unwrap();
    assert!(!code.objects_at(0).contains(&2));
    let (rec, value) = read_return(&o, 0, 2);
    assert_eq!(value, val(31));
    match &rec.event {
        TraceEvent::Deliver { from, msg } => {
            assert!(matches!(msg, ServerMessage::ValRespEncoded { .. }), "{msg:?}");
            assert!([2, 3].contains(from), "answered by server {}", from + 1);
        }
        e => panic!("read completed on {e:?}"),
    }
    // Server 1 holds no X3 version in its list, so the value was decoded.
    let digest = rec.state_digest.as_ref().unwrap();
    assert_eq!(digest.list_sizes[2], 0);
}

#[test]
fn encoding_2_folds_the_late_version_into_server_3() {
    let sc = encoding_scenario_2();
    let o = run(&sc);
    let t3 = write_tag(&o, 1, 23);
    let t4 = write_tag(&o, 1, 24);
    let tags: Vec<&Tag> = o.trace.digests_of(2).map(|(_, d)| &d.tagvec[1]).collect();
    let first3 = tags.iter().position(|t| **t == t3).expect("x2(3) encoded at server 3");
    let first4 = tags.iter().position(|t| **t == t4).expect("x2(4) encoded at server 3");
    assert!(first3 < first4);
    // The final symbol equals x1 + x2 + x3 of the last versions, computed
    // here by hand.
    let m = &o.servers[2].codeword().val;
    assert_eq!(m, &val(12 + 24 + 31));
}

#[test]
fn encoding_1_acks_every_write_while_channels_are_held() {
    let sc = encoding_scenario_1();
    let o = run(&sc);
    let writes: Vec<_> = o.history.iter().filter(|op| op.is_write()).collect();
    assert_eq!(writes.len(), 9);
    for w in writes {
        assert_eq!(w.ack_in_delivery, Some(true));
        assert!(w.responded_at.unwrap() < 40_000, "acked before the channels open");
    }
    let checks = evaluate(&o, &sc.build_code().unwrap(), &sc.expectations().unwrap());
    assert!(checks.passed(), "{:?}", checks.verdicts());
    // After the release, every server's symbol encodes the final versions.
    let finals = [val(13), val(24), val(32)];
    let code = sc.build_code().unwrap();
    for (i, s) in o.servers.iter().enumerate() {
        assert_eq!(
            s.codeword().val,
            code.encode_symbol(i, &finals).unwrap(),
            "server {}",
            i + 1
        );
    }
}
