//! Part-wise aggregation and tree-sum primitives.
//!
//! Every public operation here is one metered primitive invocation. In
//! literal mode the answer is carried by an actual message-passing program
//! over the relevant spanning forest (convergecast, broadcast, or prefix
//! pass); in charged mode the answer is computed out-of-band and the
//! overlay-tree round budget is billed. Outputs are identical in both modes,
//! and the literal path asserts that.

use crate::engine::{EngineError, Message, Meter, Mode, NodeProgram, StepIo, Topology};
use crate::graph::{NodeId, Partition, PlanarGraph};
use crate::tree::RootedForest;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("value {0} exceeds the per-message bit budget")]
    OverflowBeyondBudget(u64),
    #[error("two sources {0} and {1} supplied for the same part")]
    MultipleSources(NodeId, NodeId),
    #[error("node {0} is not in part {1}")]
    NodeNotInPart(NodeId, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggOp {
    Min,
    Max,
    Sum,
}

impl AggOp {
    pub fn identity(self) -> u64 {
        match self {
            AggOp::Min => u64::MAX,
            AggOp::Max => 0,
            AggOp::Sum => 0,
        }
    }

    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            AggOp::Min => a.min(b),
            AggOp::Max => a.max(b),
            AggOp::Sum => a.saturating_add(b),
        }
    }

    fn name(self) -> &'static str {
        match self {
            AggOp::Min => "pa_min",
            AggOp::Max => "pa_max",
            AggOp::Sum => "pa_sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ancestor,
    Descendant,
    Neither,
    Same,
}

/// A rooted forest restricted to some active node set; the communication
/// structure for one primitive run. Trees of the view are the parts.
pub struct ForestView {
    pub parent: Vec<Option<NodeId>>,
    pub active: Vec<NodeId>,
}

impl ForestView {
    pub fn of_forest(forest: &RootedForest) -> ForestView {
        ForestView {
            parent: forest.parent.clone(),
            active: (0..forest.parent.len() as NodeId)
                .filter(|&v| forest.in_tree(v))
                .collect(),
        }
    }

    fn roots(&self) -> Vec<NodeId> {
        self.active
            .iter()
            .copied()
            .filter(|&v| self.parent[v as usize].is_none())
            .collect()
    }

    fn children_lists(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for &v in &self.active {
            if let Some(p) = self.parent[v as usize] {
                ch[p as usize].push(v);
            }
        }
        ch
    }

    /// Tree topology: children in id order, then the parent last.
    fn topology(&self) -> (Topology, Vec<Option<usize>>) {
        let mut topo = Topology::new(self.parent.len());
        let mut children = self.children_lists();
        let mut parent_slot = vec![None; self.parent.len()];
        for &v in &self.active {
            children[v as usize].sort_unstable();
            let mut nbrs = std::mem::take(&mut children[v as usize]);
            if let Some(p) = self.parent[v as usize] {
                parent_slot[v as usize] = Some(nbrs.len());
                nbrs.push(p);
            }
            topo.nbrs[v as usize] = nbrs;
            topo.active.push(v);
        }
        (topo, parent_slot)
    }

    /// Root of the view tree containing v.
    fn root_of(&self, mut v: NodeId) -> NodeId {
        while let Some(p) = self.parent[v as usize] {
            v = p;
        }
        v
    }

    /// Sequential per-tree fold over subtrees: out[v] = op over v's subtree.
    fn seq_subtree_fold(&self, op: AggOp, inputs: &[u64]) -> Vec<u64> {
        let n = self.parent.len();
        let mut out = vec![op.identity(); n];
        let mut order: Vec<NodeId> = self.active.clone();
        let depth = self.depths();
        order.sort_by_key(|&v| std::cmp::Reverse(depth[v as usize]));
        for &v in &order {
            out[v as usize] = op.apply(out[v as usize], inputs[v as usize]);
            if let Some(p) = self.parent[v as usize] {
                out[p as usize] = op.apply(out[p as usize], out[v as usize]);
            }
        }
        out
    }

    fn seq_prefix_fold(&self, op: AggOp, inputs: &[u64]) -> Vec<u64> {
        let n = self.parent.len();
        let mut out = vec![op.identity(); n];
        let mut order: Vec<NodeId> = self.active.clone();
        let depth = self.depths();
        order.sort_by_key(|&v| depth[v as usize]);
        for &v in &order {
            let above = match self.parent[v as usize] {
                Some(p) => out[p as usize],
                None => op.identity(),
            };
            out[v as usize] = op.apply(above, inputs[v as usize]);
        }
        out
    }

    fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.parent.len()];
        // active nodes form trees; compute by climbing with memoization
        let mut state = vec![0u8; self.parent.len()]; // 0 unknown, 1 done
        for &v in &self.active {
            let mut chain = Vec::new();
            let mut x = v;
            while state[x as usize] == 0 {
                match self.parent[x as usize] {
                    None => break,
                    Some(p) => {
                        chain.push(x);
                        x = p;
                    }
                }
            }
            let mut base = d[x as usize];
            state[x as usize] = 1;
            for &y in chain.iter().rev() {
                base += 1;
                d[y as usize] = base;
                state[y as usize] = 1;
            }
        }
        d
    }
}

fn check_fits(value: u64, bits: u32) -> Result<(), PrimError> {
    if bits < 64 && value >= (1u64 << bits) {
        return Err(PrimError::OverflowBeyondBudget(value));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// literal programs
// ---------------------------------------------------------------------------

struct ConvergeState {
    acc: u64,
    pending: usize,
}

/// Fold child subtrees upward; every node ends with the fold of its subtree.
struct ConvergeProg<'a> {
    op: AggOp,
    inputs: &'a [u64],
    parent_slot: &'a [Option<usize>],
    val_bits: u32,
}

impl NodeProgram for ConvergeProg<'_> {
    type State = ConvergeState;

    fn init(&self, node: NodeId, nbrs: &[NodeId]) -> (ConvergeState, StepIo) {
        let children = nbrs.len() - self.parent_slot[node as usize].map_or(0, |_| 1);
        let st = ConvergeState {
            acc: self.inputs[node as usize],
            pending: children,
        };
        if children == 0 {
            let outbox = match self.parent_slot[node as usize] {
                Some(slot) => vec![(slot, Message::new().push(st.acc, self.val_bits))],
                None => vec![],
            };
            (st, StepIo { outbox, halt: true })
        } else {
            (st, StepIo { outbox: vec![], halt: false })
        }
    }

    fn step(&self, node: NodeId, st: &mut ConvergeState, inbox: &[(usize, Message)]) -> StepIo {
        for &(_, msg) in inbox {
            st.acc = self.op.apply(st.acc, msg.read(0, self.val_bits));
            st.pending -= 1;
        }
        if st.pending == 0 {
            let outbox = match self.parent_slot[node as usize] {
                Some(slot) => vec![(slot, Message::new().push(st.acc, self.val_bits))],
                None => vec![],
            };
            StepIo { outbox, halt: true }
        } else {
            StepIo { outbox: vec![], halt: false }
        }
    }
}

/// Prefix pass from each root: node result = parent result (+) own input.
struct PrefixProg<'a> {
    op: AggOp,
    inputs: &'a [u64],
    parent_slot: &'a [Option<usize>],
    val_bits: u32,
}

struct PrefixState {
    acc: Option<u64>,
    fanout: Vec<usize>,
}

impl NodeProgram for PrefixProg<'_> {
    type State = PrefixState;

    fn init(&self, node: NodeId, nbrs: &[NodeId]) -> (PrefixState, StepIo) {
        let child_slots: Vec<usize> = (0..nbrs.len())
            .filter(|&i| Some(i) != self.parent_slot[node as usize])
            .collect();
        if self.parent_slot[node as usize].is_none() {
            let acc = self.inputs[node as usize];
            let outbox = child_slots
                .iter()
                .map(|&i| (i, Message::new().push(acc, self.val_bits)))
                .collect();
            (
                PrefixState { acc: Some(acc), fanout: child_slots },
                StepIo { outbox, halt: true },
            )
        } else {
            (
                PrefixState { acc: None, fanout: child_slots },
                StepIo { outbox: vec![], halt: false },
            )
        }
    }

    fn step(&self, node: NodeId, st: &mut PrefixState, inbox: &[(usize, Message)]) -> StepIo {
        if inbox.is_empty() {
            return StepIo { outbox: vec![], halt: false };
        }
        let above = inbox[0].1.read(0, self.val_bits);
        let acc = self.op.apply(above, self.inputs[node as usize]);
        st.acc = Some(acc);
        let outbox = st
            .fanout
            .iter()
            .map(|&i| (i, Message::new().push(acc, self.val_bits)))
            .collect();
        StepIo { outbox, halt: true }
    }
}

// ---------------------------------------------------------------------------
// metered operations over a forest view
// ---------------------------------------------------------------------------

fn literal_subtree_fold(
    view: &ForestView,
    op: AggOp,
    inputs: &[u64],
    val_bits: u32,
    meter: &mut Meter,
    expect: &[u64],
) -> Result<(), PrimError> {
    let (topo, parent_slot) = view.topology();
    let prog = ConvergeProg { op, inputs, parent_slot: &parent_slot, val_bits };
    let states = meter.run(&topo, &prog)?;
    for &v in &view.active {
        let got = states[v as usize].as_ref().expect("state").acc;
        assert_eq!(got, expect[v as usize], "literal fold must match sequential fold");
    }
    Ok(())
}

/// Broadcast-by-flood along tree edges. The generic broadcast program cannot
/// know degrees after halting on receipt, so the flood is realized as a
/// prefix pass from the tree root after the payload has been folded up to it:
/// up along the source-to-root path, then down to everyone.
fn tree_spread(
    view: &ForestView,
    sources: &[(NodeId, u64)],
    val_bits: u32,
    meter: &mut Meter,
) -> Result<Vec<Option<u64>>, PrimError> {
    let n = view.parent.len();
    let mut per_root: Vec<Option<(NodeId, u64)>> = vec![None; n];
    for &(s, payload) in sources {
        let r = view.root_of(s);
        if let Some((other, _)) = per_root[r as usize] {
            return Err(PrimError::MultipleSources(other, s));
        }
        per_root[r as usize] = Some((s, payload));
        check_fits(payload, val_bits.min(meter.budget))?;
    }
    let mut out = vec![None; n];
    for &v in &view.active {
        let r = view.root_of(v);
        if let Some((_, payload)) = per_root[r as usize] {
            out[v as usize] = Some(payload);
        }
    }
    if meter.mode == Mode::Literal {
        // fold the payload up to the root (max with 0 identity), then prefix
        // it down; both passes carry val_bits-sized values
        let mut carry = vec![0u64; n];
        for &(s, payload) in sources {
            carry[s as usize] = payload;
        }
        let up = view.seq_subtree_fold(AggOp::Max, &carry);
        literal_subtree_fold(view, AggOp::Max, &carry, val_bits, meter, &up)?;
        let mut root_payload = vec![0u64; n];
        for r in view.roots() {
            root_payload[r as usize] = up[r as usize];
        }
        let (topo, parent_slot) = view.topology();
        let prog = PrefixProg {
            op: AggOp::Max,
            inputs: &root_payload,
            parent_slot: &parent_slot,
            val_bits,
        };
        let states = meter.run(&topo, &prog)?;
        for &v in &view.active {
            let got = states[v as usize].as_ref().expect("state").acc;
            assert_eq!(got.unwrap_or(0), out[v as usize].unwrap_or(0), "literal spread mismatch");
        }
    }
    Ok(out)
}

/// One fold over every tree of the view; every node of a tree learns the
/// tree-wide result.
pub fn view_aggregate(
    view: &ForestView,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    meter.charge(op.name());
    let val_bits = meter.budget;
    for &v in &view.active {
        check_fits(inputs[v as usize], val_bits)?;
    }
    let sub = view.seq_subtree_fold(op, inputs);
    if op == AggOp::Sum {
        for &v in &view.active {
            check_fits(sub[v as usize], val_bits)?;
        }
    }
    if meter.mode == Mode::Literal {
        literal_subtree_fold(view, op, inputs, val_bits, meter, &sub)?;
    }
    let mut out = vec![op.identity(); view.parent.len()];
    for &v in &view.active {
        out[v as usize] = sub[view.root_of(v) as usize];
    }
    // every node learns the root total
    let sources: Vec<(NodeId, u64)> = view
        .roots()
        .into_iter()
        .map(|r| (r, sub[r as usize]))
        .collect();
    tree_spread(view, &sources, val_bits, meter)?;
    Ok(out)
}

/// Single-source delivery to every node of the source's tree.
pub fn view_broadcast(
    view: &ForestView,
    sources: &[(NodeId, u64)],
    meter: &mut Meter,
) -> Result<Vec<Option<u64>>, PrimError> {
    meter.charge("pa_broadcast");
    tree_spread(view, sources, meter.budget, meter)
}

pub fn view_descendant_fold(
    view: &ForestView,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    meter.charge("desc_sum");
    let val_bits = meter.budget;
    for &v in &view.active {
        check_fits(inputs[v as usize], val_bits)?;
    }
    let out = view.seq_subtree_fold(op, inputs);
    if op == AggOp::Sum {
        for &v in &view.active {
            check_fits(out[v as usize], val_bits)?;
        }
    }
    if meter.mode == Mode::Literal {
        literal_subtree_fold(view, op, inputs, val_bits, meter, &out)?;
    }
    Ok(out)
}

pub fn view_ancestor_fold(
    view: &ForestView,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    meter.charge("anc_sum");
    let val_bits = meter.budget;
    for &v in &view.active {
        check_fits(inputs[v as usize], val_bits)?;
    }
    let out = view.seq_prefix_fold(op, inputs);
    if op == AggOp::Sum {
        for &v in &view.active {
            check_fits(out[v as usize], val_bits)?;
        }
    }
    if meter.mode == Mode::Literal {
        let (topo, parent_slot) = view.topology();
        let prog = PrefixProg { op, inputs, parent_slot: &parent_slot, val_bits };
        let states = meter.run(&topo, &prog)?;
        for &v in &view.active {
            let got = states[v as usize].as_ref().expect("state").acc.expect("prefix reached");
            assert_eq!(got, out[v as usize], "literal prefix mismatch");
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// part-context operations
// ---------------------------------------------------------------------------

/// Everything the aggregation layer needs about one partitioned instance.
pub struct PartCtx<'a> {
    pub g: &'a PlanarGraph,
    pub partition: &'a Partition,
    pub forest: &'a RootedForest,
}

impl<'a> PartCtx<'a> {
    pub fn new(g: &'a PlanarGraph, partition: &'a Partition, forest: &'a RootedForest) -> Self {
        PartCtx { g, partition, forest }
    }

    fn view(&self) -> ForestView {
        ForestView::of_forest(self.forest)
    }
}

/// Every node of part i learns `op` over the inputs of part i.
pub fn partwise_aggregate(
    ctx: &PartCtx,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    view_aggregate(&ctx.view(), op, inputs, meter)
}

pub fn broadcast_within_part(
    ctx: &PartCtx,
    sources: &[(NodeId, u64)],
    meter: &mut Meter,
) -> Result<Vec<Option<u64>>, PrimError> {
    view_broadcast(&ctx.view(), sources, meter)
}

pub fn ancestor_sum(
    ctx: &PartCtx,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    view_ancestor_fold(&ctx.view(), op, inputs, meter)
}

pub fn descendant_sum(
    ctx: &PartCtx,
    op: AggOp,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<u64>, PrimError> {
    view_descendant_fold(&ctx.view(), op, inputs, meter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// Every node of part i learns the id of one argmin/argmax node of its part,
/// ties broken toward the smallest id. Realized as two passes: the extreme
/// value, then the smallest id attaining it.
pub fn find_extreme(
    ctx: &PartCtx,
    which: Extreme,
    inputs: &[u64],
    meter: &mut Meter,
) -> Result<Vec<NodeId>, PrimError> {
    meter.charge(match which {
        Extreme::Min => "find_min",
        Extreme::Max => "find_max",
    });
    let view = ctx.view();
    let op = match which {
        Extreme::Min => AggOp::Min,
        Extreme::Max => AggOp::Max,
    };
    let mut m = meter.silent_child();
    let best = view_aggregate(&view, op, inputs, &mut m)?;
    let n = ctx.g.n();
    let sentinel = n as u64;
    let tagged: Vec<u64> = (0..n)
        .map(|v| {
            if inputs[v as usize] == best[v as usize] {
                v as u64
            } else {
                sentinel
            }
        })
        .collect();
    let winner = view_aggregate(&view, AggOp::Min, &tagged, &mut m)?;
    meter.absorb_costs(m);
    let mut out = vec![0 as NodeId; n as usize];
    for v in 0..n {
        out[v as usize] = winner[v as usize] as NodeId;
    }
    Ok(out)
}

/// Every node of part i learns the id of some node whose input lies in the
/// part's range, or that none exists; smallest id wins.
pub fn find_in_range(
    ctx: &PartCtx,
    inputs: &[u64],
    ranges: &[Option<(u64, u64)>],
    meter: &mut Meter,
) -> Result<Vec<Option<NodeId>>, PrimError> {
    meter.charge("find_in_range");
    let view = ctx.view();
    let n = ctx.g.n();
    let sentinel = n as u64;
    let tagged: Vec<u64> = (0..n)
        .map(|v| {
            let p = ctx.partition.part_of[v as usize];
            if p == crate::graph::Partition::NONE {
                return sentinel;
            }
            match ranges[p as usize] {
                Some((lo, hi)) if inputs[v as usize] >= lo && inputs[v as usize] <= hi => v as u64,
                _ => sentinel,
            }
        })
        .collect();
    let mut m = meter.silent_child();
    let winner = view_aggregate(&view, AggOp::Min, &tagged, &mut m)?;
    meter.absorb_costs(m);
    Ok((0..n)
        .map(|v| {
            let w = winner[v as usize];
            if w == sentinel || w == u64::MAX {
                None
            } else {
                Some(w as NodeId)
            }
        })
        .collect())
}

/// Each node learns its tree relation to its part's reference node.
pub fn relation_to(
    ctx: &PartCtx,
    v0: &[Option<NodeId>],
    meter: &mut Meter,
) -> Result<Vec<Relation>, PrimError> {
    meter.charge("relation_to");
    let n = ctx.g.n();
    for (p, entry) in v0.iter().enumerate() {
        if let Some(x) = entry {
            if ctx.partition.part_of[*x as usize] as usize != p {
                return Err(PrimError::NodeNotInPart(*x, p as u32));
            }
        }
    }
    let indicator: Vec<u64> = (0..n)
        .map(|v| {
            let p = ctx.partition.part_of[v as usize];
            if p == crate::graph::Partition::NONE {
                return 0;
            }
            (v0[p as usize] == Some(v)) as u64
        })
        .collect();
    let view = ctx.view();
    let mut m = meter.silent_child();
    let under = view_descendant_fold(&view, AggOp::Sum, &indicator, &mut m)?;
    let above = view_ancestor_fold(&view, AggOp::Sum, &indicator, &mut m)?;
    meter.absorb_costs(m);
    Ok((0..n)
        .map(|v| {
            let p = ctx.partition.part_of[v as usize];
            if p == crate::graph::Partition::NONE {
                return Relation::Neither;
            }
            match v0[p as usize] {
                None => Relation::Neither,
                Some(x) if x == v => Relation::Same,
                Some(_) => {
                    if under[v as usize] > 0 {
                        Relation::Ancestor
                    } else if above[v as usize] > 0 {
                        Relation::Descendant
                    } else {
                        Relation::Neither
                    }
                }
            }
        })
        .collect())
}

/// One-round pairwise exchange over explicit darts: each (from, to, value)
/// is delivered to `to`. Costs 2 rounds (send, receive) and one invocation.
pub fn exchange(
    g: &PlanarGraph,
    sends: &[(NodeId, NodeId, u64)],
    val_bits: u32,
    meter: &mut Meter,
) -> Result<Vec<Vec<(NodeId, u64)>>, PrimError> {
    meter.record_invocation("neighbor_exchange");
    meter.charge_rounds(2);
    let n = g.n() as usize;
    let mut received: Vec<Vec<(NodeId, u64)>> = vec![Vec::new(); n];
    for &(from, to, value) in sends {
        debug_assert!(g.has_edge(from, to));
        check_fits(value, val_bits.min(meter.budget))?;
        received[to as usize].push((from, value));
    }
    for row in received.iter_mut() {
        row.sort_unstable();
    }
    if meter.mode == Mode::Literal {
        struct ExchangeProg<'a> {
            out: &'a [Vec<(usize, u64)>],
            val_bits: u32,
        }
        impl NodeProgram for ExchangeProg<'_> {
            type State = Vec<(usize, u64)>;
            fn init(&self, node: NodeId, _nbrs: &[NodeId]) -> (Vec<(usize, u64)>, StepIo) {
                let outbox = self.out[node as usize]
                    .iter()
                    .map(|&(slot, v)| (slot, Message::new().push(v, self.val_bits)))
                    .collect();
                (Vec::new(), StepIo { outbox, halt: false })
            }
            fn step(
                &self,
                _node: NodeId,
                st: &mut Vec<(usize, u64)>,
                inbox: &[(usize, Message)],
            ) -> StepIo {
                for &(slot, msg) in inbox {
                    st.push((slot, msg.read(0, self.val_bits)));
                }
                StepIo { outbox: vec![], halt: true }
            }
        }
        let mut topo = Topology::new(n);
        for v in g.nodes() {
            topo.nbrs[v as usize] = g.neighbors(v).to_vec();
            topo.active.push(v);
        }
        let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for &(from, to, value) in sends {
            let slot = g
                .neighbors(from)
                .iter()
                .position(|&x| x == to)
                .expect("edge exists");
            out[from as usize].push((slot, value));
        }
        let prog = ExchangeProg { out: &out, val_bits };
        let states = meter.run(&topo, &prog)?;
        for v in 0..n {
            let got: Vec<(NodeId, u64)> = {
                let mut xs: Vec<(NodeId, u64)> = states[v]
                    .as_ref()
                    .expect("state")
                    .iter()
                    .map(|&(slot, val)| (g.neighbors(v as NodeId)[slot], val))
                    .collect();
                xs.sort_unstable();
                xs
            };
            assert_eq!(got, received[v], "literal exchange mismatch");
        }
    }
    Ok(received)
}
