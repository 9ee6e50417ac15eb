//! Synchronous message-passing executor with exact round, message, and bit
//! accounting.
//!
//! Programs are per-node state machines. A node may emit messages from
//! `init`; afterwards, every round delivers exactly the previous round's
//! outboxes and steps every node that has not halted. Steps are pure
//! functions of (state, inbox), so the result is independent of the order in
//! which nodes are stepped within a round; the engine exposes two stepping
//! orders so that independence can be asserted.
//!
//! Costs can also be charged instead of executed: in charged mode an
//! aggregation primitive computes its answer out-of-band and bills
//! `alpha * D * ceil(log2(n+1))` rounds, the budget such a primitive is
//! entitled to over low-stretch overlay trees.

use crate::graph::{NodeId, PlanarGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("node {node} emitted a {bits}-bit message over budget B={budget}")]
    BitBudgetExceeded { node: NodeId, bits: u32, budget: u32 },
    #[error("round limit {0} exceeded")]
    RoundLimitExceeded(u64),
    #[error("bit budget {bits} below the {required} bits needed to carry an id")]
    BudgetBelowIdWidth { bits: u32, required: u32 },
    #[error("sum overflowed the per-message bit budget")]
    OverflowBeyondBudget,
    #[error("graph must be connected for diameter-based charging")]
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Literal,
    Charged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    Forward,
    Reverse,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Per-edge-direction bits per round; `None` means `4 * ceil(log2(n+1))`.
    pub bits: Option<u32>,
    pub mode: Mode,
    /// Multiplier inside the charged-round formula.
    pub charge_alpha: u64,
    /// Recorded for reproducibility; the algorithms themselves are
    /// deterministic and never draw from it.
    pub seed: u64,
    pub schedule: Schedule,
    pub max_rounds: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            bits: None,
            mode: Mode::Charged,
            charge_alpha: 1,
            seed: 0,
            schedule: Schedule::Forward,
            max_rounds: 50_000_000,
        }
    }
}

pub fn id_bits(n: u32) -> u32 {
    let mut b = 0;
    while (1u64 << b) < n as u64 + 1 {
        b += 1;
    }
    b.max(1)
}

/// A bit string small enough for one round on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Message {
    data: u64,
    bits: u32,
}

impl Message {
    pub fn new() -> Message {
        Message::default()
    }

    pub fn push(mut self, value: u64, width: u32) -> Message {
        debug_assert!(width == 64 || value < (1u64 << width));
        self.data |= value << self.bits;
        self.bits += width;
        self
    }

    pub fn read(&self, offset: u32, width: u32) -> u64 {
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        (self.data >> offset) & mask
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }
}

/// The communication graph for one run: a per-node neighbor list over global
/// node ids. Inactive nodes have no entry in `active`.
pub struct Topology {
    pub nbrs: Vec<Vec<NodeId>>,
    pub active: Vec<NodeId>,
}

impl Topology {
    pub fn new(n: usize) -> Topology {
        Topology {
            nbrs: vec![Vec::new(); n],
            active: Vec::new(),
        }
    }
}

pub struct StepIo {
    /// (index into this node's neighbor list, message)
    pub outbox: Vec<(usize, Message)>,
    pub halt: bool,
}

pub trait NodeProgram {
    type State;
    fn init(&self, node: NodeId, nbrs: &[NodeId]) -> (Self::State, StepIo);
    fn step(
        &self,
        node: NodeId,
        state: &mut Self::State,
        inbox: &[(usize, Message)],
    ) -> StepIo;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    pub rounds: u64,
    pub messages: u64,
    pub max_bits: u32,
}

/// Runs a program to quiescence. Returns the final per-node states (None for
/// inactive nodes) and the exact costs.
pub fn run_program<P: NodeProgram>(
    topo: &Topology,
    prog: &P,
    budget: u32,
    schedule: Schedule,
    max_rounds: u64,
) -> Result<(Vec<Option<P::State>>, RunStats), EngineError> {
    let n = topo.nbrs.len();
    let mut states: Vec<Option<P::State>> = (0..n).map(|_| None).collect();
    let mut halted = vec![true; n];
    // in_flight[v] = messages to deliver to v next round, as (nbr index at v, msg)
    let mut in_flight: Vec<Vec<(usize, Message)>> = vec![Vec::new(); n];
    let mut stats = RunStats::default();
    let mut pending = 0usize;

    let order: Vec<NodeId> = match schedule {
        Schedule::Forward => topo.active.clone(),
        Schedule::Reverse => topo.active.iter().rev().copied().collect(),
    };

    let send = |from: NodeId,
                    io: &StepIo,
                    in_flight: &mut Vec<Vec<(usize, Message)>>,
                    stats: &mut RunStats,
                    pending: &mut usize|
     -> Result<(), EngineError> {
        for &(slot, msg) in &io.outbox {
            if msg.bits() > budget {
                return Err(EngineError::BitBudgetExceeded {
                    node: from,
                    bits: msg.bits(),
                    budget,
                });
            }
            let to = topo.nbrs[from as usize][slot];
            let back = topo.nbrs[to as usize]
                .iter()
                .position(|&x| x == from)
                .expect("symmetric topology");
            in_flight[to as usize].push((back, msg));
            stats.messages += 1;
            if msg.bits() > stats.max_bits {
                stats.max_bits = msg.bits();
            }
            *pending += 1;
        }
        Ok(())
    };

    for &v in &order {
        let (st, io) = prog.init(v, &topo.nbrs[v as usize]);
        states[v as usize] = Some(st);
        halted[v as usize] = io.halt;
        send(v, &io, &mut in_flight, &mut stats, &mut pending)?;
    }

    // A round is charged when some live node takes delivery of a message;
    // a run that never communicates still costs its one synchronous round.
    let mut round = 0u64;
    loop {
        let quiescent = pending == 0 && order.iter().all(|&v| halted[v as usize]);
        if quiescent {
            break;
        }
        round += 1;
        if round > max_rounds {
            return Err(EngineError::RoundLimitExceeded(max_rounds));
        }
        let mut inboxes: Vec<Vec<(usize, Message)>> = vec![Vec::new(); n];
        for v in 0..n {
            if !in_flight[v].is_empty() {
                // deterministic delivery order: by neighbor slot
                let mut msgs = std::mem::take(&mut in_flight[v]);
                msgs.sort_by_key(|&(slot, _)| slot);
                pending -= msgs.len();
                inboxes[v] = msgs;
            }
        }
        let mut delivered = false;
        for &v in &order {
            if halted[v as usize] {
                continue; // late messages to halted nodes are dropped
            }
            if !inboxes[v as usize].is_empty() {
                delivered = true;
            }
            let inbox = std::mem::take(&mut inboxes[v as usize]);
            let io = prog.step(
                v,
                states[v as usize].as_mut().expect("active node has state"),
                &inbox,
            );
            halted[v as usize] = io.halt;
            send(v, &io, &mut in_flight, &mut stats, &mut pending)?;
        }
        if delivered {
            stats.rounds += 1;
        }
    }
    stats.rounds = stats.rounds.max(1);
    Ok((states, stats))
}

/// Accumulated costs for one algorithm session, plus the knobs every
/// primitive needs. A session spans many primitive invocations; literal runs
/// add real rounds, charged invocations add the overlay-tree budget.
pub struct Meter {
    pub mode: Mode,
    pub budget: u32,
    pub charge_alpha: u64,
    pub schedule: Schedule,
    pub max_rounds: u64,
    pub diameter: u32,
    pub id_bits: u32,
    pub seed: u64,
    rounds_literal: u64,
    rounds_charged: u64,
    messages: u64,
    max_bits: u32,
    invocations: BTreeMap<String, u64>,
}

impl Meter {
    pub fn new(g: &PlanarGraph, cfg: &SimConfig) -> Result<Meter, EngineError> {
        if !g.is_connected() {
            return Err(EngineError::Disconnected);
        }
        let idb = id_bits(g.n());
        let budget = cfg.bits.unwrap_or(4 * idb);
        if budget < idb {
            return Err(EngineError::BudgetBelowIdWidth {
                bits: budget,
                required: idb,
            });
        }
        Ok(Meter {
            mode: cfg.mode,
            budget,
            charge_alpha: cfg.charge_alpha,
            schedule: cfg.schedule,
            max_rounds: cfg.max_rounds,
            diameter: g.diameter(),
            id_bits: idb,
            seed: cfg.seed,
            rounds_literal: 0,
            rounds_charged: 0,
            messages: 0,
            max_bits: 0,
            invocations: BTreeMap::new(),
        })
    }

    /// Plain meter for unit tests over small fixtures.
    pub fn literal_for(g: &PlanarGraph) -> Meter {
        let cfg = SimConfig {
            mode: Mode::Literal,
            ..SimConfig::default()
        };
        Meter::new(g, &cfg).expect("connected fixture")
    }

    pub fn record_invocation(&mut self, name: &str) {
        *self.invocations.entry(name.to_string()).or_insert(0) += 1;
    }

    /// Bills one aggregation primitive in charged mode; a no-op on the round
    /// counter in literal mode (costs then come from executed messages).
    pub fn charge(&mut self, name: &str) {
        self.record_invocation(name);
        if self.mode == Mode::Charged {
            self.rounds_charged += self.charge_alpha * self.diameter as u64 * self.id_bits as u64;
        }
    }

    /// Bills a constant number of rounds (local neighbor exchanges).
    pub fn charge_rounds(&mut self, rounds: u64) {
        if self.mode == Mode::Charged {
            self.rounds_charged += rounds;
        }
    }

    pub fn run<P: NodeProgram>(
        &mut self,
        topo: &Topology,
        prog: &P,
    ) -> Result<Vec<Option<P::State>>, EngineError> {
        let (states, stats) = run_program(topo, prog, self.budget, self.schedule, self.max_rounds)?;
        self.rounds_literal += stats.rounds;
        self.messages += stats.messages;
        self.max_bits = self.max_bits.max(stats.max_bits);
        Ok(states)
    }

    /// A child meter for the internal passes of one public operation: it
    /// executes and accumulates real costs but never bills the overlay-tree
    /// budget (the parent already charged once for the operation).
    pub fn silent_child(&self) -> Meter {
        Meter {
            mode: self.mode,
            budget: self.budget,
            charge_alpha: 0,
            schedule: self.schedule,
            max_rounds: self.max_rounds,
            diameter: self.diameter,
            id_bits: self.id_bits,
            seed: self.seed,
            rounds_literal: 0,
            rounds_charged: 0,
            messages: 0,
            max_bits: 0,
            invocations: BTreeMap::new(),
        }
    }

    /// Folds a child's executed costs back in, dropping its invocation marks.
    pub fn absorb_costs(&mut self, child: Meter) {
        self.rounds_literal += child.rounds_literal;
        self.rounds_charged += child.rounds_charged;
        self.messages += child.messages;
        self.max_bits = self.max_bits.max(child.max_bits);
    }

    pub fn invocation_total(&self) -> u64 {
        self.invocations.values().sum()
    }

    pub fn invocation_count(&self, name: &str) -> u64 {
        self.invocations.get(name).copied().unwrap_or(0)
    }

    pub fn report(&self) -> ExecutionReport {
        ExecutionReport {
            rounds_literal: self.rounds_literal,
            rounds_charged: self.rounds_charged.max(self.rounds_literal),
            messages: self.messages,
            max_bits: self.max_bits,
            primitives: self.invocations.clone(),
        }
    }
}

/// Round, message, and bit totals for one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub rounds_literal: u64,
    pub rounds_charged: u64,
    pub messages: u64,
    pub max_bits: u32,
    pub primitives: BTreeMap<String, u64>,
}

impl ExecutionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    struct Silent;
    impl NodeProgram for Silent {
        type State = ();
        fn init(&self, _node: NodeId, _nbrs: &[NodeId]) -> ((), StepIo) {
            ((), StepIo { outbox: vec![], halt: true })
        }
        fn step(&self, _n: NodeId, _s: &mut (), _inbox: &[(usize, Message)]) -> StepIo {
            StepIo { outbox: vec![], halt: true }
        }
    }

    /// Flood from node 0; forward to every neighbor except the sender, halt
    /// after forwarding.
    struct Flood;
    impl NodeProgram for Flood {
        /// (degree, reached)
        type State = (usize, bool);
        fn init(&self, node: NodeId, nbrs: &[NodeId]) -> ((usize, bool), StepIo) {
            if node == 0 {
                let outbox = (0..nbrs.len())
                    .map(|i| (i, Message::new().push(1, 1)))
                    .collect();
                ((nbrs.len(), true), StepIo { outbox, halt: true })
            } else {
                ((nbrs.len(), false), StepIo { outbox: vec![], halt: false })
            }
        }
        fn step(
            &self,
            _node: NodeId,
            state: &mut (usize, bool),
            inbox: &[(usize, Message)],
        ) -> StepIo {
            if inbox.is_empty() {
                return StepIo { outbox: vec![], halt: false };
            }
            state.1 = true;
            let from = inbox[0].0;
            let outbox = (0..state.0)
                .filter(|&i| i != from)
                .map(|i| (i, Message::new().push(1, 1)))
                .collect();
            StepIo { outbox, halt: true }
        }
    }

    #[test]
    fn flood_rounds_equal_eccentricity() {
        // path: far end is reached after n-1 rounds
        let g = gen::path(6).unwrap();
        let topo = full_topology(&g);
        let (states, stats) = run_program(&topo, &Flood, 8, Schedule::Forward, 1000).unwrap();
        assert_eq!(stats.rounds, 5);
        assert!(states.iter().all(|s| s.as_ref().unwrap().1));

        // 8x8 grid: eccentricity of the corner is 14
        let g = gen::grid(8).unwrap();
        let topo = full_topology(&g);
        let (_, stats) = run_program(&topo, &Flood, 32, Schedule::Forward, 1000).unwrap();
        assert_eq!(stats.rounds, 14);
    }

    #[test]
    fn schedules_agree() {
        let g = gen::grid(5).unwrap();
        let topo = full_topology(&g);
        let (sf, f) = run_program(&topo, &Flood, 16, Schedule::Forward, 1000).unwrap();
        let (sr, r) = run_program(&topo, &Flood, 16, Schedule::Reverse, 1000).unwrap();
        assert_eq!(f.rounds, r.rounds);
        assert_eq!(f.messages, r.messages);
        let vf: Vec<_> = sf.iter().map(|s| s.as_ref().unwrap().1).collect();
        let vr: Vec<_> = sr.iter().map(|s| s.as_ref().unwrap().1).collect();
        assert_eq!(vf, vr);
    }

    fn full_topology(g: &crate::graph::PlanarGraph) -> Topology {
        let mut t = Topology::new(g.n() as usize);
        for v in g.nodes() {
            t.nbrs[v as usize] = g.neighbors(v).to_vec();
            t.active.push(v);
        }
        t
    }

    #[test]
    fn silent_program_takes_one_round() {
        let g = gen::grid(3).unwrap();
        let topo = full_topology(&g);
        let (_, stats) = run_program(&topo, &Silent, 8, Schedule::Forward, 100).unwrap();
        assert_eq!(stats.rounds, 1);
        assert_eq!(stats.messages, 0);
    }

    #[test]
    fn message_packing_round_trips() {
        let m = Message::new().push(5, 4).push(9, 7).push(1, 1);
        assert_eq!(m.bits(), 12);
        assert_eq!(m.read(0, 4), 5);
        assert_eq!(m.read(4, 7), 9);
        assert_eq!(m.read(11, 1), 1);
    }

    #[test]
    fn oversized_message_aborts() {
        struct Shout;
        impl NodeProgram for Shout {
            type State = ();
            fn init(&self, _n: NodeId, nbrs: &[NodeId]) -> ((), StepIo) {
                let outbox = if nbrs.is_empty() {
                    vec![]
                } else {
                    vec![(0, Message::new().push(u32::MAX as u64, 32))]
                };
                ((), StepIo { outbox, halt: true })
            }
            fn step(&self, _n: NodeId, _s: &mut (), _i: &[(usize, Message)]) -> StepIo {
                StepIo { outbox: vec![], halt: true }
            }
        }
        let g = gen::path(4).unwrap();
        let topo = full_topology(&g);
        let err = run_program(&topo, &Shout, 8, Schedule::Forward, 100).unwrap_err();
        assert!(matches!(err, EngineError::BitBudgetExceeded { .. }));
    }
}
