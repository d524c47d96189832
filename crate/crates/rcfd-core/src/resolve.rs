use std::collections::BTreeSet;

use crate::contention::{
    decide_transmission, elect_pt, elect_rr, round2_emission, round3_emission,
    select_cts_recipient, ContentionObservation, NodeRole, TxDecision,
};
use crate::error::CoreError;
use crate::mapping::{NodeId, Slot, SubcarrierMap};

/// Per-node input to a synchronous contention: the pending packet's
/// destination (if any) and the round-1 slot the node drew. Nodes
/// without data carry neither and only listen.
#[derive(Debug, Clone, Copy, Default)]
pub struct NodeInput {
    pub dest: Option<NodeId>,
    pub round1_slot: Option<Slot>,
}

/// Everything a contention slot produced, per node.
#[derive(Debug, Clone)]
pub struct ContentionOutcome {
    pub roles: Vec<NodeRole>,
    pub decisions: Vec<TxDecision>,
    pub observations: Vec<ContentionObservation>,
    /// CTS recipient chosen by each RR.
    pub cts_recipients: Vec<Option<NodeId>>,
}

/// Run one full synchronous contention (all three rounds) over an
/// arbitrary topology. `in_range[i]` lists the neighbors node `i`
/// hears; the relation must be symmetric. Used by the exhaustive
/// no-collision checks and as the reference for the event-driven
/// simulator.
pub fn resolve_contention(
    map: &SubcarrierMap,
    in_range: &[Vec<usize>],
    inputs: &[NodeInput],
) -> Result<ContentionOutcome, CoreError> {
    resolve_contention_with_fading(map, in_range, inputs, &mut |_, _, _| true)
}

/// Same as [`resolve_contention`], but an external detector decides
/// whether a listener picks up a slot emitted by a neighbor in a given
/// round (1, 2 or 3). Returning `false` models a false negative from
/// sub-channel outage. A node always hears its own emissions.
pub fn resolve_contention_with_fading(
    map: &SubcarrierMap,
    in_range: &[Vec<usize>],
    inputs: &[NodeInput],
    detects: &mut dyn FnMut(usize, u8, Slot) -> bool,
) -> Result<ContentionOutcome, CoreError> {
    let n = inputs.len();
    assert_eq!(in_range.len(), n);
    let mut observations = vec![ContentionObservation::default(); n];

    // Round 1: contenders emit their drawn slot.
    for i in 0..n {
        let mut heard = BTreeSet::new();
        if let Some(s) = inputs[i].round1_slot {
            heard.insert(s);
        }
        for &j in &in_range[i] {
            if let Some(s) = inputs[j].round1_slot {
                if detects(i, 1, s) {
                    heard.insert(s);
                }
            }
        }
        observations[i].round1_heard = heard;
    }

    let mut roles = vec![NodeRole::Idle; n];
    for i in 0..n {
        if let Some(chosen) = inputs[i].round1_slot {
            roles[i] = if elect_pt(chosen, &observations[i].round1_heard)? {
                NodeRole::PrimaryTransmitter
            } else {
                NodeRole::Bystander
            };
        }
    }

    // Round 2: every PT sends its RTS.
    let mut rts: Vec<Option<[Slot; 2]>> = vec![None; n];
    for i in 0..n {
        if roles[i] == NodeRole::PrimaryTransmitter {
            let dest = inputs[i].dest.expect("PT implies pending data");
            rts[i] = Some(round2_emission(map, NodeId(i), dest)?);
        }
    }
    collect_round(map, in_range, &rts, &mut observations, Round::Two, detects);

    for i in 0..n {
        let is_pt = roles[i] == NodeRole::PrimaryTransmitter;
        if elect_rr(map, NodeId(i), is_pt, &observations[i])? {
            roles[i] = NodeRole::RtsReceiver;
        }
    }

    // Round 3: every RR answers with a CTS, unconditionally.
    let mut cts: Vec<Option<[Slot; 2]>> = vec![None; n];
    let mut cts_recipients = vec![None; n];
    for i in 0..n {
        if roles[i] == NodeRole::RtsReceiver {
            match select_cts_recipient(map, &observations[i]) {
                Ok(recipient) => {
                    cts_recipients[i] = Some(recipient);
                    cts[i] = Some(round3_emission(map, NodeId(i), recipient)?);
                }
                // Fading can leave a node with its own round-2 flag but
                // no decodable RTS subcarrier; it cannot answer anyone.
                Err(CoreError::NoRtsHeard) => roles[i] = NodeRole::Bystander,
                Err(e) => return Err(e),
            }
        }
    }
    collect_round(map, in_range, &cts, &mut observations, Round::Three, detects);

    let mut decisions = Vec::with_capacity(n);
    for i in 0..n {
        // An RR's secondary candidate is its own pending destination.
        decisions.push(decide_transmission(
            map,
            NodeId(i),
            roles[i],
            inputs[i].dest,
            &observations[i],
        )?);
    }

    Ok(ContentionOutcome {
        roles,
        decisions,
        observations,
        cts_recipients,
    })
}

enum Round {
    Two,
    Three,
}

fn collect_round(
    map: &SubcarrierMap,
    in_range: &[Vec<usize>],
    emissions: &[Option<[Slot; 2]>],
    observations: &mut [ContentionObservation],
    round: Round,
    detects: &mut dyn FnMut(usize, u8, Slot) -> bool,
) {
    let round_no = match round {
        Round::Two => 2,
        Round::Three => 3,
    };
    for i in 0..in_range.len() {
        let mut set1 = BTreeSet::new();
        let mut set2 = BTreeSet::new();
        let mut add = |s: Slot| {
            if map.in_set1(s) {
                set1.insert(s);
            } else {
                set2.insert(s);
            }
        };
        if let Some(slots) = &emissions[i] {
            for &s in slots {
                add(s);
            }
        }
        for &j in &in_range[i] {
            if let Some(slots) = &emissions[j] {
                for &s in slots {
                    if detects(i, round_no, s) {
                        add(s);
                    }
                }
            }
        }
        match round {
            Round::Two => {
                observations[i].round2_heard_set1 = set1;
                observations[i].round2_heard_set2 = set2;
            }
            Round::Three => {
                observations[i].round3_heard_set1 = set1;
                observations[i].round3_heard_set2 = set2;
            }
        }
    }
}
