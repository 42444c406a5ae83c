//! Decentralized execution of the d-regular graph scheme
//!
//! ```text
//! x_i ← J_{F_i}(v_i + τ Σ_{j<i, j∼i} x_j)
//! v_i ← v_i − γτ (d·x_i − Σ_{j∼i} x_j)
//! ```
//!
//! as per-node state machines. Nodes only ever read their own state and
//! the payloads of messages delivered to their inbox; the network refuses
//! to deliver along non-edges.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iteration::{recover_solution, write_footer, write_record, Record, Status, StopRule};
use crate::numerics::{distance, kron_apply, BlockVector, DenseMatrix};
use crate::operators::{MonotoneOperator, OperatorTuple};
use crate::scalar::Real;
use crate::schemes::{regular_graph_scheme, tau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    X,
    V,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message<T> {
    pub from: usize,
    pub to: usize,
    pub round: usize,
    pub phase: Phase,
    pub payload: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct NodeState<T> {
    pub id: usize,
    pub operator: MonotoneOperator<T>,
    pub v: Vec<T>,
    pub x: Vec<T>,
    pub inbox: Vec<Message<T>>,
    degree: usize,
}

/// Message as written to the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedMessage {
    pub round: usize,
    pub phase: Phase,
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Vec<f64>>,
}

/// A node consuming a value that originated at `source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadEvent {
    pub round: usize,
    pub phase: Phase,
    pub node: usize,
    pub source: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimRecord<T> {
    pub residuals: Record<T>,
    pub msgs_x: usize,
    pub msgs_v: usize,
    /// `‖Σ_i (v_i^{k+1} − v_i^k)‖`, zero up to rounding.
    pub v_drift: T,
}

#[derive(Clone, Debug)]
pub struct SimTrace<T> {
    pub records: Vec<SimRecord<T>>,
    pub status: Status,
    /// `x` gathered after the last x-pass.
    pub final_x: BlockVector<T>,
    /// `v` after the last completed round.
    pub final_v: BlockVector<T>,
    /// Empty unless message logging was enabled.
    pub messages: Vec<LoggedMessage>,
    pub reads: Vec<ReadEvent>,
    /// Whether `messages`/`reads` were recorded.
    pub logged: bool,
    /// Uses of any primitive that touches more than one node's state on a
    /// node's behalf. The engine has none; the counter exists so the audit
    /// can state it.
    pub aggregate_uses: usize,
    pub notes: Vec<String>,
}

impl<T: Real> SimTrace<T> {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn solution(&self) -> (Vec<T>, T) {
        recover_solution(&self.final_x)
    }

    /// Iteration CSV with two extra columns `msgs_x,msgs_v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,fp_residual,consensus_residual,ref_error,msgs_x,msgs_v\n");
        for r in &self.records {
            write_record(&mut out, &r.residuals);
            let _ = writeln!(out, ",{},{}", r.msgs_x, r.msgs_v);
        }
        write_footer(&mut out, &self.notes, self.status);
        out
    }

    /// One JSON object per line.
    pub fn message_log_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SimOptions<T> {
    pub stop: StopRule<T>,
    pub reference: Option<Vec<T>>,
    pub allow_nonconforming_gamma: bool,
    pub log_messages: bool,
    pub log_payloads: bool,
}

impl<T: Real> SimOptions<T> {
    pub fn new(stop: StopRule<T>) -> Self {
        Self {
            stop,
            reference: None,
            allow_nonconforming_gamma: false,
            log_messages: true,
            log_payloads: false,
        }
    }
}

impl<T: Real> Default for SimOptions<T> {
    fn default() -> Self {
        Self::new(StopRule::default())
    }
}

/// Outcome of one synchronous round.
#[derive(Clone, Debug)]
pub struct Round<T> {
    pub round: usize,
    /// `x` produced by the x-pass, gathered for instrumentation.
    pub x: BlockVector<T>,
    pub msgs_x: usize,
    pub msgs_v: usize,
    pub v_drift: T,
}

/// Nodes plus a message fabric restricted to graph edges.
#[derive(Clone, Debug)]
pub struct Network<'g, T> {
    graph: &'g Graph,
    nodes: Vec<NodeState<T>>,
    tau: T,
    gamma: T,
    round: usize,
    log_messages: bool,
    log_payloads: bool,
    messages: Vec<LoggedMessage>,
    reads: Vec<ReadEvent>,
}

impl<'g, T: Real> Network<'g, T> {
    /// Checks regularity and connectivity exactly as the scheme builder does.
    pub fn new(
        graph: &'g Graph,
        ops: &OperatorTuple<T>,
        gamma: T,
        v0: &BlockVector<T>,
    ) -> Result<Self> {
        crate::schemes::check_regular_connected(graph)?;
        let n = graph.vertex_count();
        if ops.len() != n {
            return Err(Error::Shape(format!(
                "graph has {n} vertices but {} operators were given",
                ops.len()
            )));
        }
        if v0.blocks() != n || v0.dim() != ops.dim() {
            return Err(Error::Shape(format!(
                "v0 has {} blocks of dimension {}, expected {n} of dimension {}",
                v0.blocks(),
                v0.dim(),
                ops.dim()
            )));
        }
        let nodes = (0..n)
            .map(|i| NodeState {
                id: i,
                operator: ops.get(i).clone(),
                v: v0.block(i).to_vec(),
                x: vec![T::zero(); ops.dim()],
                inbox: Vec::new(),
                degree: graph.degree(i),
            })
            .collect();
        Ok(Self {
            graph,
            nodes,
            tau: tau(graph),
            gamma,
            round: 0,
            log_messages: false,
            log_payloads: false,
            messages: Vec::new(),
            reads: Vec::new(),
        })
    }

    pub fn with_logging(mut self, messages: bool, payloads: bool) -> Self {
        self.log_messages = messages;
        self.log_payloads = payloads;
        self
    }

    pub fn nodes(&self) -> &[NodeState<T>] {
        &self.nodes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    fn send(&mut self, from: usize, to: usize, phase: Phase) -> Result<()> {
        if !self.graph.has_edge(from, to) {
            return Err(Error::Contract(format!("no edge between {from} and {to}")));
        }
        let payload = self.nodes[from].x.clone();
        if self.log_messages {
            self.messages.push(LoggedMessage {
                round: self.round,
                phase,
                from,
                to,
                payload: self
                    .log_payloads
                    .then(|| payload.iter().map(|p| p.to_f64_lossy()).collect()),
            });
        }
        self.nodes[to].inbox.push(Message {
            from,
            to,
            round: self.round,
            phase,
            payload,
        });
        Ok(())
    }

    /// Drains node `i`'s inbox for the current round and phase, sorted by sender.
    fn receive(&mut self, i: usize, phase: Phase) -> Vec<Message<T>> {
        let round = self.round;
        let inbox = std::mem::take(&mut self.nodes[i].inbox);
        let (mut mine, rest): (Vec<_>, Vec<_>) = inbox
            .into_iter()
            .partition(|m| m.round == round && m.phase == phase);
        self.nodes[i].inbox = rest;
        mine.sort_by_key(|m| m.from);
        if self.log_messages {
            self.reads.extend(mine.iter().map(|m| ReadEvent {
                round,
                phase,
                node: i,
                source: m.from,
            }));
        }
        mine
    }

    pub fn step(&mut self) -> Result<Round<T>> {
        let n = self.nodes.len();
        let (tau, gamma) = (self.tau, self.gamma);
        let before = self.messages.len();
        let mut msgs_x = 0;
        // x-pass: ascending activation, fresh x flows to higher ids
        for i in 0..n {
            let received = self.receive(i, Phase::X);
            let node = &mut self.nodes[i];
            let mut y = node.v.clone();
            for m in &received {
                for (yk, &xk) in y.iter_mut().zip(&m.payload) {
                    *yk = *yk + tau * xk;
                }
            }
            let mut x = std::mem::take(&mut node.x);
            node.operator.resolve_into(&y, &mut x);
            node.x = x;
            for j in self.graph.neighbors(i).to_vec() {
                if j > i {
                    self.send(i, j, Phase::X)?;
                    msgs_x += 1;
                }
            }
        }
        let x =
            BlockVector::from_blocks(&self.nodes.iter().map(|s| s.x.clone()).collect::<Vec<_>>())?;
        // v-pass: exchange with every neighbor, then a local Laplacian step
        let mut msgs_v = 0;
        for i in 0..n {
            for j in self.graph.neighbors(i).to_vec() {
                self.send(i, j, Phase::V)?;
                msgs_v += 1;
            }
        }
        let d = self.nodes.first().map_or(0, |s| s.x.len());
        let mut drift = vec![T::zero(); d];
        for i in 0..n {
            let received = self.receive(i, Phase::V);
            let node = &mut self.nodes[i];
            let own = tau * T::from_count(node.degree);
            let mut acc = vec![T::zero(); d];
            // ascending source order, own term in its slot
            let mut own_done = false;
            let add = |acc: &mut Vec<T>, w: T, src: &[T]| {
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a = *a + w * s;
                }
            };
            for m in &received {
                if !own_done && m.from > i {
                    add(&mut acc, own, &node.x);
                    own_done = true;
                }
                add(&mut acc, -tau, &m.payload);
            }
            if !own_done {
                add(&mut acc, own, &node.x);
            }
            for ((vk, &ak), dk) in node.v.iter_mut().zip(&acc).zip(drift.iter_mut()) {
                let next = *vk + (-gamma) * ak;
                *dk = *dk + (next - *vk);
                *vk = next;
            }
        }
        debug_assert!(!self.log_messages || self.messages.len() - before == msgs_x + msgs_v);
        let round = self.round;
        self.round += 1;
        Ok(Round {
            round,
            x,
            msgs_x,
            msgs_v,
            v_drift: crate::numerics::norm(&drift),
        })
    }

    pub fn v(&self) -> BlockVector<T> {
        BlockVector::from_blocks(&self.nodes.iter().map(|s| s.v.clone()).collect::<Vec<_>>())
            .expect("nodes share a dimension")
    }
}

/// Runs the decentralized iteration from `v0` until the stop rule fires.
/// Both phases of a round always complete, so `final_v` is one update
/// ahead of `final_x`.
pub fn simulate<T: Real>(
    graph: &Graph,
    ops: &OperatorTuple<T>,
    gamma: T,
    v0: &BlockVector<T>,
    opts: &SimOptions<T>,
) -> Result<SimTrace<T>> {
    // instrumentation only: residual ‖Mx‖ of the equivalent centralized scheme
    let scheme = regular_graph_scheme(graph, gamma)?;
    let mut notes = Vec::new();
    if !scheme.gamma_conforming() {
        if !opts.allow_nonconforming_gamma {
            return Err(Error::Contract(format!(
                "gamma = {gamma} lies outside (0,1); enable the non-conforming override to run anyway"
            )));
        }
        notes.push(format!("gamma={gamma} non-conforming"));
    }
    if let Some(r) = &opts.reference {
        if r.len() != ops.dim() {
            return Err(Error::Shape(format!(
                "reference has dimension {}, expected {}",
                r.len(),
                ops.dim()
            )));
        }
    }
    let m = scheme.m_matrix();
    let mut net =
        Network::new(graph, ops, gamma, v0)?.with_logging(opts.log_messages, opts.log_payloads);
    let mut records = Vec::new();
    let mut status = Status::MaxIters;
    let mut final_x = BlockVector::zeros(graph.vertex_count(), ops.dim());
    for _ in 0..opts.stop.max_iters() {
        let r = net.step()?;
        let fp = kron_apply(&m, &r.x)?.norm();
        let (mean, cons) = recover_solution(&r.x);
        records.push(SimRecord {
            residuals: Record {
                k: r.round,
                fp_residual: fp,
                consensus_residual: cons,
                ref_error: opts.reference.as_ref().map(|p| distance(&mean, p)),
            },
            msgs_x: r.msgs_x,
            msgs_v: r.msgs_v,
            v_drift: r.v_drift,
        });
        let finite = fp.is_finite() && cons.is_finite() && r.x.is_finite();
        final_x = r.x;
        if !finite {
            status = Status::Diverged;
            break;
        }
        if opts.stop.is_met(fp, cons) {
            status = Status::Converged;
            break;
        }
    }
    let final_v = net.v();
    Ok(SimTrace {
        records,
        status,
        final_x,
        final_v,
        messages: net.messages,
        reads: net.reads,
        logged: opts.log_messages,
        aggregate_uses: 0,
        notes,
    })
}

/// Structural audit of a recorded run: every message crosses an edge,
/// x-pass messages go from lower to higher id, no edge direction is used
/// twice in one phase of one round, every read is backed by a message from
/// a neighbor, and no aggregate primitive was used.
pub fn audit_messages<T>(trace: &SimTrace<T>, graph: &Graph) -> Result<bool> {
    if !trace.logged {
        return Err(Error::Contract(
            "the run was recorded without a message log".into(),
        ));
    }
    Ok(audit_report(trace, graph).is_empty())
}

/// Human-readable list of audit violations; empty when the audit passes.
pub fn audit_report<T>(trace: &SimTrace<T>, graph: &Graph) -> Vec<String> {
    use std::collections::HashSet;
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for m in &trace.messages {
        if m.from >= graph.vertex_count()
            || m.to >= graph.vertex_count()
            || !graph.has_edge(m.from, m.to)
        {
            problems.push(format!(
                "round {}: message {} -> {} does not follow an edge",
                m.round, m.from, m.to
            ));
        }
        if m.phase == Phase::X && m.from > m.to {
            problems.push(format!(
                "round {}: x-pass message {} -> {} goes to a lower id",
                m.round, m.from, m.to
            ));
        }
        if !seen.insert((m.round, m.phase, m.from, m.to)) {
            problems.push(format!(
                "round {}: duplicate message {} -> {}",
                m.round, m.from, m.to
            ));
        }
    }
    for r in &trace.reads {
        if !graph.has_edge(r.node, r.source) {
            problems.push(format!(
                "round {}: node {} read state of non-neighbor {}",
                r.round, r.node, r.source
            ));
        }
        if !seen.contains(&(r.round, r.phase, r.source, r.node)) {
            problems.push(format!(
                "round {}: node {} read from {} without a message",
                r.round, r.node, r.source
            ));
        }
    }
    if trace.aggregate_uses > 0 {
        problems.push(format!("{} aggregate operations", trace.aggregate_uses));
    }
    problems
}

/// Runs the network and the centralized reduced iteration on
/// `regular_graph_scheme(graph)` from `v = 0` for `rounds` rounds and
/// returns `max_k max_i ‖x_i^sim − x_i^central‖`.
pub fn equivalence_check<T: Real>(
    graph: &Graph,
    ops: &OperatorTuple<T>,
    gamma: T,
    rounds: usize,
) -> Result<T> {
    let v0 = BlockVector::zeros(graph.vertex_count(), ops.dim());
    equivalence_check_from(graph, ops, gamma, &v0, rounds)
}

pub fn equivalence_check_from<T: Real>(
    graph: &Graph,
    ops: &OperatorTuple<T>,
    gamma: T,
    v0: &BlockVector<T>,
    rounds: usize,
) -> Result<T> {
    let scheme = regular_graph_scheme(graph, gamma)?;
    let central = crate::iteration::Splitting::new(&scheme, ops)?;
    let mut net = Network::new(graph, ops, gamma, v0)?;
    let mut worst = T::zero();
    for state in central.reduced(v0.clone())?.take(rounds) {
        let r = net.step()?;
        for (a, b) in r.x.iter_blocks().zip(state.x.iter_blocks()) {
            let dev = distance(a, b);
            if dev.is_nan() {
                return Ok(T::nan());
            }
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Dense `(2/d) L`, the matrix the v-pass applies.
pub fn laplacian_step_matrix<T: Real>(graph: &Graph) -> DenseMatrix<T> {
    graph.laplacian::<T>().scale(tau(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::{iterate_reduced, StopRule};
    use crate::operators::ProxFunction;

    fn consensus(a: &[f64]) -> OperatorTuple<f64> {
        OperatorTuple::new(
            a.iter()
                .map(|&ai| MonotoneOperator::affine(DenseMatrix::identity(1), vec![-ai]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_operators_are_stationary() {
        let g = Graph::complete(4);
        let ops = OperatorTuple::zeros(4, 2);
        let v0 = BlockVector::zeros(4, 2);
        let t = simulate(&g, &ops, 0.5, &v0, &SimOptions::default()).unwrap();
        assert_eq!(t.status, Status::Converged);
        assert_eq!(t.rounds(), 1);
        assert_eq!(t.final_v, v0);
        assert!(t.final_x.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(equivalence_check(&g, &ops, 0.5, 50).unwrap(), 0.0);
    }

    #[test]
    fn k3_consensus() {
        let g = Graph::complete(3);
        let ops = consensus(&[0.0, 3.0, 6.0]);
        let t = simulate(
            &g,
            &ops,
            0.5,
            &BlockVector::zeros(3, 1),
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(t.status, Status::Converged);
        assert!((t.solution().0[0] - 3.0).abs() <= 1e-6);
        assert!(audit_messages(&t, &g).unwrap());
        for r in &t.records {
            assert_eq!((r.msgs_x, r.msgs_v), (3, 6));
            assert!(r.v_drift <= 1e-12);
        }
    }

    #[test]
    fn matches_centralized_reduced_form() {
        let g = Graph::cycle(4).unwrap();
        let ops = OperatorTuple::new(
            [(0.0, 1.0), (0.5, 2.0), (-1.0, 0.8), (0.2, 0.3)]
                .iter()
                .map(|&(l, u)| {
                    MonotoneOperator::prox(
                        1,
                        ProxFunction::Box {
                            lower: vec![l],
                            upper: vec![u],
                        },
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let dev = equivalence_check(&g, &ops, 0.5, 100).unwrap();
        assert!(dev <= 1e-12, "{dev}");
        let stop = StopRule::new(1e-300, 1e-300, 40).unwrap();
        let sim = simulate(
            &g,
            &ops,
            0.5,
            &BlockVector::zeros(4, 1),
            &SimOptions::new(stop),
        )
        .unwrap();
        let central = iterate_reduced(
            &regular_graph_scheme(&g, 0.5).unwrap(),
            &ops,
            BlockVector::zeros(4, 1),
            stop,
        )
        .unwrap();
        assert_eq!(sim.rounds(), central.iterations());
    }

    #[test]
    fn rejects_irregular_and_disconnected() {
        let ops = OperatorTuple::zeros(3, 1);
        let v0 = BlockVector::zeros(3, 1);
        assert!(matches!(
            simulate(&Graph::path(3), &ops, 0.5, &v0, &SimOptions::default()),
            Err(Error::Regularity { .. })
        ));
        let two_triangles = Graph::complete(3).disjoint_union(&Graph::complete(3));
        let ops = OperatorTuple::zeros(6, 1);
        assert!(matches!(
            simulate(
                &two_triangles,
                &ops,
                0.5,
                &BlockVector::zeros(6, 1),
                &SimOptions::default()
            ),
            Err(Error::Connectivity { .. })
        ));
    }

    #[test]
    fn audit_detects_non_edge() {
        let g = Graph::cycle(6).unwrap();
        let mut t = simulate(
            &g,
            &OperatorTuple::zeros(6, 1),
            0.5,
            &BlockVector::zeros(6, 1),
            &SimOptions::default(),
        )
        .unwrap();
        assert!(audit_messages(&t, &g).unwrap());
        // opposite vertices of the cycle
        t.messages.push(LoggedMessage {
            round: 0,
            phase: Phase::V,
            from: 0,
            to: 3,
            payload: None,
        });
        assert!(!audit_messages(&t, &g).unwrap());
    }

    #[test]
    fn audit_detects_unbacked_read_and_downward_x() {
        let g = Graph::complete(3);
        let base = simulate(
            &g,
            &consensus(&[0.0, 1.0, 2.0]),
            0.5,
            &BlockVector::zeros(3, 1),
            &SimOptions::new(StopRule::new(1e-8, 1e-8, 2).unwrap()),
        )
        .unwrap();
        let mut t = base.clone();
        t.reads.push(ReadEvent {
            round: 1,
            phase: Phase::X,
            node: 0,
            source: 2,
        });
        assert!(!audit_messages(&t, &g).unwrap());
        let mut t = base.clone();
        t.messages.push(LoggedMessage {
            round: 5,
            phase: Phase::X,
            from: 2,
            to: 1,
            payload: None,
        });
        assert!(!audit_messages(&t, &g).unwrap());
        let mut t = base;
        t.logged = false;
        assert!(audit_messages(&t, &g).is_err());
    }

    #[test]
    fn csv_and_log_format() {
        let g = Graph::complete(3);
        let mut opts = SimOptions::new(StopRule::new(1e-8, 1e-8, 1).unwrap());
        opts.log_payloads = true;
        let t = simulate(
            &g,
            &consensus(&[0.0, 3.0, 6.0]),
            0.5,
            &BlockVector::zeros(3, 1),
            &opts,
        )
        .unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,fp_residual,consensus_residual,ref_error,msgs_x,msgs_v"
        );
        assert!(lines.next().unwrap().ends_with(",,3,6"));
        assert!(csv.ends_with("# status=max-iters\n"));
        let log = t.message_log_jsonl();
        assert_eq!(log.lines().count(), 9);
        let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
        assert_eq!(first["phase"], "x");
        assert_eq!(
            (first["from"].as_u64(), first["to"].as_u64()),
            (Some(0), Some(1))
        );
        assert_eq!(first["payload"], serde_json::json!([0.0]));
        opts.log_payloads = false;
        let t = simulate(
            &g,
            &consensus(&[0.0, 3.0, 6.0]),
            0.5,
            &BlockVector::zeros(3, 1),
            &opts,
        )
        .unwrap();
        assert!(!t.message_log_jsonl().contains("payload"));
    }

    #[test]
    fn replay_is_bit_identical() {
        let g = Graph::petersen();
        let a: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let run = || {
            simulate(
                &g,
                &consensus(&a),
                0.7,
                &BlockVector::zeros(10, 1),
                &SimOptions::default(),
            )
            .unwrap()
        };
        let (s, t) = (run(), run());
        assert_eq!(s.to_csv(), t.to_csv());
        assert_eq!(s.final_v, t.final_v);
        assert_eq!(s.messages, t.messages);
    }

    #[test]
    fn laplacian_step_is_gram() {
        for g in [
            Graph::complete(3),
            Graph::cycle(4).unwrap(),
            Graph::petersen(),
        ] {
            let s = regular_graph_scheme::<f64>(&g, 0.5).unwrap();
            assert_eq!(laplacian_step_matrix::<f64>(&g), s.gram());
        }
    }

    #[test]
    fn petersen_random_affine_is_bit_identical_to_centralized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = crate::problems::random_affine_problem::<f64, _>(&mut rng, 10, 3).unwrap();
        let dev = equivalence_check(&Graph::petersen(), &p.operators, 0.5, 100).unwrap();
        assert_eq!(dev, 0.0);
    }
}
