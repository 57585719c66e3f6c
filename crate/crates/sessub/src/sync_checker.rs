//! Synchronous subtyping via the simulation game over state pairs.
//!
//! A pair `(p, q)` relates a state of the candidate subtype with a
//! state of the candidate supertype. Outputs are covariant (`p` may
//! send at most what `q` sends) and inputs contravariant (`p` must
//! accept at least what `q` accepts); termination must be mutual. The
//! verdict is exact: the pair space is finite, so the game always
//! decides `true` or `false`.

use std::time::Instant;

use crate::lts::{Action, Lts, StateId};
use crate::simgraph::{
    BackLinkKind, FailureReason, NodeKind, Rhs, SimGraph, Verdict,
};

/// How the game is explored. The verdict never depends on the mode,
/// only the reported graph shape does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncMode {
    /// Unfold the game as a tree; a pair repeating on its own root path
    /// becomes a leaf copy with a dashed back-link to the ancestor.
    #[default]
    Tree,
    /// Explore every distinct pair at most once, producing the product
    /// graph.
    Memo,
}

enum Expansion {
    Success,
    Failure(FailureReason),
    Steps(Vec<(Action, (StateId, StateId))>),
}

fn expand(sub: &Lts, sup: &Lts, p: StateId, q: StateId) -> Expansion {
    let p_end = sub.is_end(p).expect("subtype state");
    let q_end = sup.is_end(q).expect("supertype state");
    if p_end && q_end {
        return Expansion::Success;
    }
    if p_end != q_end {
        return Expansion::Failure(FailureReason::OneSidedTermination);
    }
    let out_p = sub.outputs(p).expect("subtype state");
    if !out_p.is_empty() {
        let out_q = sup.outputs(q).expect("supertype state");
        if out_q.is_empty() {
            return Expansion::Failure(FailureReason::PolarityMismatch);
        }
        if !out_p.is_subset(&out_q) {
            return Expansion::Failure(FailureReason::OutputCovariance);
        }
        Expansion::Steps(
            sub.output_transitions(p)
                .into_iter()
                .map(|(l, p2)| {
                    let action = Action::send(l);
                    let q2 = sup.successor(q, &action).expect("covariance checked");
                    (action, (p2, q2))
                })
                .collect(),
        )
    } else {
        let in_p = sub.inputs(p).expect("subtype state");
        let in_q = sup.inputs(q).expect("supertype state");
        if in_q.is_empty() {
            return Expansion::Failure(FailureReason::PolarityMismatch);
        }
        if !in_p.is_superset(&in_q) {
            return Expansion::Failure(FailureReason::InputContravariance);
        }
        Expansion::Steps(
            sup.input_transitions(q)
                .into_iter()
                .map(|(l, q2)| {
                    let action = Action::receive(l);
                    let p2 = sub.successor(p, &action).expect("contravariance checked");
                    (action, (p2, q2))
                })
                .collect(),
        )
    }
}

/// Decides whether `sub`'s type is a synchronous subtype of `sup`'s.
///
/// Returns the verdict (`True` or `False`, never `Maybe`) together with
/// the simulation graph; on `False` the graph contains the failure node
/// that decided it and exploration stops there.
pub fn check_sync(sub: &Lts, sup: &Lts, mode: SyncMode) -> (Verdict, SimGraph) {
    let started = Instant::now();
    let (verdict, mut graph) = match mode {
        SyncMode::Tree => run_tree(sub, sup),
        SyncMode::Memo => run_memo(sub, sup),
    };
    graph.meta.verdict = verdict;
    graph.meta.elapsed = started.elapsed();
    (verdict, graph)
}

fn run_tree(sub: &Lts, sup: &Lts) -> (Verdict, SimGraph) {
    struct Run<'a> {
        sub: &'a Lts,
        sup: &'a Lts,
        graph: SimGraph,
        failed: bool,
    }

    impl Run<'_> {
        /// Creates the node for `state` (entered via `incoming`) and
        /// explores below it unless the branch closes here.
        fn visit(
            &mut self,
            state: (StateId, StateId),
            incoming: Option<(usize, Action)>,
            path: &mut Vec<((StateId, StateId), usize)>,
        ) {
            if self.failed {
                return;
            }
            let (p, q) = state;
            let repeat = path.iter().find(|(s, _)| *s == state).map(|(_, id)| *id);
            let expansion = expand(self.sub, self.sup, p, q);
            let kind = match (&expansion, repeat) {
                (Expansion::Success, _) => NodeKind::Success,
                (Expansion::Failure(reason), None) => NodeKind::Failure(*reason),
                _ => NodeKind::Normal,
            };
            let id = self.graph.add_node(kind, p, Rhs::State(q));
            if let Some((parent, action)) = incoming {
                self.graph.add_step(parent, action, id);
            }
            match (expansion, repeat) {
                (Expansion::Success, _) => {}
                (_, Some(ancestor)) => {
                    self.graph
                        .add_back_link(id, ancestor, BackLinkKind::ExactRepeat);
                }
                (Expansion::Failure(_), None) => {
                    self.graph.meta.failure_node = Some(id);
                    self.failed = true;
                }
                (Expansion::Steps(steps), None) => {
                    self.graph.meta.steps += 1;
                    path.push((state, id));
                    for (action, next) in steps {
                        self.visit(next, Some((id, action)), path);
                        if self.failed {
                            break;
                        }
                    }
                    path.pop();
                }
            }
        }
    }

    let mut run = Run {
        sub,
        sup,
        graph: SimGraph::new("sync"),
        failed: false,
    };
    let mut path = Vec::new();
    run.visit((sub.initial(), sup.initial()), None, &mut path);
    let verdict = if run.failed { Verdict::False } else { Verdict::True };
    (verdict, run.graph)
}

fn run_memo(sub: &Lts, sup: &Lts) -> (Verdict, SimGraph) {
    use std::collections::{HashMap, VecDeque};

    let mut graph = SimGraph::new("sync");
    let mut ids: HashMap<(StateId, StateId), usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let initial = (sub.initial(), sup.initial());
    let root = graph.add_node(NodeKind::Normal, initial.0, Rhs::State(initial.1));
    ids.insert(initial, root);
    queue.push_back((initial, root));

    while let Some(((p, q), id)) = queue.pop_front() {
        match expand(sub, sup, p, q) {
            Expansion::Success => graph.nodes[id].kind = NodeKind::Success,
            Expansion::Failure(reason) => {
                graph.nodes[id].kind = NodeKind::Failure(reason);
                graph.meta.failure_node = Some(id);
                return (Verdict::False, graph);
            }
            Expansion::Steps(steps) => {
                graph.meta.steps += 1;
                for (action, next) in steps {
                    let target = match ids.get(&next) {
                        Some(&t) => t,
                        None => {
                            let t = graph.add_node(NodeKind::Normal, next.0, Rhs::State(next.1));
                            ids.insert(next, t);
                            queue.push_back((next, t));
                            t
                        }
                    };
                    graph.add_step(id, action, target);
                }
            }
        }
    }
    (Verdict::True, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::build_lts;
    use crate::oracle::{explore, ExploreMode, Outcome};
    use crate::types::parse;

    fn lts_of(src: &str) -> Lts {
        build_lts(&parse(src).unwrap())
    }

    const IDEAL_CLIENT: &str = "rec X. +{nd; &{ko;X, ok;X}, pr; &{ko;X, ok;X}}";
    const COVARIANT_CLIENT: &str = "rec X. +{nd; &{ko;X, ok;X, dk;X}}";
    const RENAMED_CLIENT: &str = "rec X. +{nd; &{ko1;X, ok;X, dk;X}}";

    #[test]
    fn covariant_client_is_a_sync_subtype() {
        let (verdict, graph) = check_sync(
            &lts_of(COVARIANT_CLIENT),
            &lts_of(IDEAL_CLIENT),
            SyncMode::Tree,
        );
        assert_eq!(verdict, Verdict::True);
        assert!(graph.failure_nodes().is_empty());
        // Tree: root (1,1), !nd to (2,2), ?ko/?ok leaf copies of (1,1)
        // linked back to the root.
        assert_eq!(graph.nodes.len(), 4);
        assert_eq!(graph.back_links().len(), 2);
        assert_eq!(graph.edges.len() - graph.back_links().len(), 3);
        for link in graph.back_links() {
            assert_eq!(link.to(), graph.root);
            assert!(graph.is_ancestor(link.to(), link.from()));
        }
    }

    #[test]
    fn renamed_input_breaks_sync_subtyping() {
        for mode in [SyncMode::Tree, SyncMode::Memo] {
            let (verdict, graph) =
                check_sync(&lts_of(RENAMED_CLIENT), &lts_of(IDEAL_CLIENT), mode);
            assert_eq!(verdict, Verdict::False);
            let failures = graph.failure_nodes();
            assert_eq!(failures.len(), 1);
            assert_eq!(
                failures[0].kind,
                NodeKind::Failure(FailureReason::InputContravariance)
            );
        }
    }

    #[test]
    fn reflexivity() {
        for src in [
            IDEAL_CLIENT,
            "end",
            "rec X.&{tm;X, over;rec Y.+{tc;Y, done;end}}",
            "!a;?b;end",
        ] {
            let lts = lts_of(src);
            for mode in [SyncMode::Tree, SyncMode::Memo] {
                let (verdict, _) = check_sync(&lts, &lts, mode);
                assert_eq!(verdict, Verdict::True, "{src} with {mode:?}");
            }
        }
    }

    #[test]
    fn ideal_client_is_not_a_subtype_of_the_covariant_one() {
        let (verdict, graph) = check_sync(
            &lts_of(IDEAL_CLIENT),
            &lts_of(COVARIANT_CLIENT),
            SyncMode::Tree,
        );
        assert_eq!(verdict, Verdict::False);
        // out(1) = {nd, pr} is not included in {nd}: the root itself fails.
        assert_eq!(graph.meta.failure_node, Some(graph.root));
        assert_eq!(
            graph.nodes[graph.root].kind,
            NodeKind::Failure(FailureReason::OutputCovariance)
        );
    }

    #[test]
    fn memo_mode_builds_the_product_graph() {
        let (verdict, graph) = check_sync(
            &lts_of(COVARIANT_CLIENT),
            &lts_of(IDEAL_CLIENT),
            SyncMode::Memo,
        );
        assert_eq!(verdict, Verdict::True);
        // Distinct pairs only: (1,1) and (2,2).
        assert_eq!(graph.nodes.len(), 2);
        assert!(graph.back_links().is_empty());
        assert_eq!(graph.edges.len(), 3);
    }

    #[test]
    fn verdicts_agree_across_modes() {
        let pairs = [
            (COVARIANT_CLIENT, IDEAL_CLIENT),
            (RENAMED_CLIENT, IDEAL_CLIENT),
            (IDEAL_CLIENT, COVARIANT_CLIENT),
            (IDEAL_CLIENT, IDEAL_CLIENT),
            ("!a;end", "+{a;end, b;end}"),
            ("?a;end", "[?a;end, ?b;end]"),
        ];
        for (sub, sup) in pairs {
            let (tree, _) = check_sync(&lts_of(sub), &lts_of(sup), SyncMode::Tree);
            let (memo, _) = check_sync(&lts_of(sub), &lts_of(sup), SyncMode::Memo);
            assert_eq!(tree, memo, "{sub} <= {sup}");
        }
    }

    #[test]
    fn polarity_and_termination_mismatches_fail() {
        let (v, g) = check_sync(&lts_of("!a;end"), &lts_of("?a;end"), SyncMode::Tree);
        assert_eq!(v, Verdict::False);
        assert_eq!(
            g.nodes[g.root].kind,
            NodeKind::Failure(FailureReason::PolarityMismatch)
        );

        let (v, g) = check_sync(&lts_of("end"), &lts_of("!a;end"), SyncMode::Tree);
        assert_eq!(v, Verdict::False);
        assert_eq!(
            g.nodes[g.root].kind,
            NodeKind::Failure(FailureReason::OneSidedTermination)
        );
    }

    #[test]
    fn duality_closure_on_the_positive_pair() {
        let sub = parse(COVARIANT_CLIENT).unwrap();
        let sup = parse(IDEAL_CLIENT).unwrap();
        let (v, _) = check_sync(&build_lts(&sub), &build_lts(&sup), SyncMode::Tree);
        assert_eq!(v, Verdict::True);
        let (v_dual, _) = check_sync(
            &build_lts(&sup.dual()),
            &build_lts(&sub.dual()),
            SyncMode::Tree,
        );
        assert_eq!(v_dual, Verdict::True);
    }

    #[test]
    fn sync_true_implies_no_rendezvous_violation_against_the_dual() {
        let sub = parse(COVARIANT_CLIENT).unwrap();
        let sup = parse(IDEAL_CLIENT).unwrap();
        let (v, _) = check_sync(&build_lts(&sub), &build_lts(&sup), SyncMode::Tree);
        assert_eq!(v, Verdict::True);
        let res = explore(
            &build_lts(&sub),
            &build_lts(&sup.dual()),
            ExploreMode::Rendezvous,
            50,
        );
        assert_eq!(res.outcome, Outcome::NoViolationFound);
    }
}
