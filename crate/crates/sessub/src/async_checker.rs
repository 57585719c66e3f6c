//! Asynchronous subtyping via the simulation game with input
//! accumulation. Sound but not complete: verdicts are `true`, `false`
//! or `maybe`.
//!
//! The supertype side of a game state is an [`InputTree`]: when the
//! subtype wants to send while the supertype side still has inputs to
//! offer, those inputs are accumulated (output anticipation over FIFO
//! channels) provided the subtype cannot cycle on outputs, every
//! involved supertype state has a finite input tree, and covariance
//! holds at all its leaves. Consumed inputs walk down the accumulated
//! tree.
//!
//! Trees can grow forever on subtype loops, so branches are closed not
//! only on exact repeats of game states but also by a periodic-growth
//! acceptance: if the accumulated tree at a node is the tree of a
//! same-subtype-state ancestor uniformly grown by a leaf substitution,
//! and replaying one period reproduces exactly the substituted window
//! (with every side branch resolving within it), the growth provably
//! repeats forever and the branch is accepted. When neither closure
//! applies within the step budget the verdict is `maybe`; by default
//! the check then falls back once to the dualized problem and adopts
//! its verdict.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::input_ctx::{intree, InputTree, TreeView};
use crate::lts::{Action, Lts, Polarity, StateId};
use crate::simgraph::{
    BackLinkKind, FailureReason, NodeKind, Rhs, SimGraph, Verdict,
};

/// A state of the asynchronous simulation game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsyncState {
    /// Current state of the candidate subtype.
    pub p: StateId,
    /// Accumulated input structure over the candidate supertype.
    pub acc: InputTree,
}

/// Options for [`check_async`].
#[derive(Debug, Clone, Copy)]
pub struct AsyncOpts {
    /// Maximum number of game nodes to expand before answering `maybe`.
    pub max_steps: usize,
    /// On an initial `maybe`, retry once on the dualized problem and
    /// adopt its verdict.
    pub fallback: bool,
}

impl Default for AsyncOpts {
    fn default() -> Self {
        AsyncOpts {
            max_steps: 2000,
            fallback: true,
        }
    }
}

enum Expansion {
    Success,
    Failure(FailureReason),
    Steps(Vec<(Action, AsyncState)>),
}

fn expand(sub: &Lts, sup: &Lts, state: &AsyncState) -> Expansion {
    let p = state.p;
    if sub.is_end(p).expect("subtype state") {
        return match state.acc.as_bare() {
            Some(q) if sup.is_end(q).expect("supertype state") => Expansion::Success,
            Some(_) => Expansion::Failure(FailureReason::OneSidedTermination),
            None => Expansion::Failure(FailureReason::ResidualInput),
        };
    }
    let in_p = sub.inputs(p).expect("subtype state");
    if !in_p.is_empty() {
        return match state.acc.root_labels() {
            // Accumulated inputs at the root: consume them
            // (contravariance over the root labels).
            Some(roots) => {
                if !roots.iter().all(|l| in_p.contains(l)) {
                    return Expansion::Failure(FailureReason::InputContravariance);
                }
                Expansion::Steps(
                    roots
                        .into_iter()
                        .map(|l| {
                            let action = Action::receive(l.clone());
                            let p2 = sub.successor(p, &action).expect("checked above");
                            let acc = state.acc.consume(&l).expect("label at root");
                            (action, AsyncState { p: p2, acc })
                        })
                        .collect(),
                )
            }
            // Bare supertype state: the plain synchronous input rule.
            None => {
                let q = state.acc.as_bare().expect("root is a hole");
                let in_q = sup.inputs(q).expect("supertype state");
                if in_q.is_empty() {
                    return if sup.is_end(q).expect("supertype state") {
                        Expansion::Failure(FailureReason::OneSidedTermination)
                    } else {
                        Expansion::Failure(FailureReason::PolarityMismatch)
                    };
                }
                if !in_p.is_superset(&in_q) {
                    return Expansion::Failure(FailureReason::InputContravariance);
                }
                Expansion::Steps(
                    sup.input_transitions(q)
                        .into_iter()
                        .map(|(l, q2)| {
                            let action = Action::receive(l);
                            let p2 = sub.successor(p, &action).expect("checked above");
                            (
                                action,
                                AsyncState {
                                    p: p2,
                                    acc: InputTree::bare(q2),
                                },
                            )
                        })
                        .collect(),
                )
            }
        };
    }

    // p is an output state.
    let out_p = sub.outputs(p).expect("subtype state");
    if let Some(q) = state.acc.as_bare() {
        let out_q = sup.outputs(q).expect("supertype state");
        if !out_q.is_empty() {
            // Plain synchronous output rule; no cycle condition here.
            if !out_p.is_subset(&out_q) {
                return Expansion::Failure(FailureReason::OutputCovariance);
            }
            return Expansion::Steps(
                sub.output_transitions(p)
                    .into_iter()
                    .map(|(l, p2)| {
                        let action = Action::send(l);
                        let q2 = sup.successor(q, &action).expect("covariance checked");
                        (
                            action,
                            AsyncState {
                                p: p2,
                                acc: InputTree::bare(q2),
                            },
                        )
                    })
                    .collect(),
            );
        }
    }

    // Output anticipation: every accumulated leaf must span a finite
    // input tree whose own leaves can all fire p's outputs. Anticipation
    // is refused if p can cycle on outputs, since the accumulated inputs
    // might then never be consumed.
    if sub.has_cycle(Polarity::Send, p).expect("subtype state") {
        return Expansion::Failure(FailureReason::OutputLoop);
    }
    let mut expansions = BTreeMap::new();
    for (hole, q_leaf) in state.acc.leaves() {
        let Some(spanned) = intree(sup, q_leaf) else {
            return Expansion::Failure(FailureReason::UndefinedInputTree);
        };
        for (_, q_inner) in spanned.leaves() {
            if !out_p.is_subset(&sup.outputs(q_inner).expect("supertype state")) {
                return Expansion::Failure(FailureReason::OutputCovariance);
            }
        }
        expansions.insert(hole, spanned);
    }
    Expansion::Steps(
        sub.output_transitions(p)
            .into_iter()
            .map(|(l, p2)| {
                let action = Action::send(l);
                let stepped: BTreeMap<_, _> = expansions
                    .iter()
                    .map(|(hole, tree)| {
                        (
                            *hole,
                            tree.map_states(|q| {
                                sup.successor(q, &action).expect("covariance checked")
                            }),
                        )
                    })
                    .collect();
                let acc = state.acc.grow(&stepped).expect("expansion is total");
                (action, AsyncState { p: p2, acc })
            })
            .collect(),
    )
}

fn is_success_state(sub: &Lts, sup: &Lts, state: &AsyncState) -> bool {
    sub.is_end(state.p).expect("subtype state")
        && state
            .acc
            .as_bare()
            .is_some_and(|q| sup.is_end(q).expect("supertype state"))
}

fn view_to_tree(view: &TreeView<'_>) -> InputTree {
    match view {
        TreeView::Leaf(q) => InputTree::bare(*q),
        TreeView::Node(bs) => InputTree::branch(
            bs.iter()
                .map(|(l, sub)| ((*l).clone(), view_to_tree(sub)))
                .collect(),
        ),
    }
}

/// Finds the leaf substitution `g` with `grown = subst(base, g)`, if
/// one exists: every leaf of `base` holding state `q` must sit above
/// the same sub-tree `g(q)` of `grown`, all `g` images may only use
/// leaf states of `base`, and `g` must not be the identity everywhere.
fn unify_growth(base: &InputTree, grown: &InputTree) -> Option<BTreeMap<StateId, InputTree>> {
    fn walk(
        base: &TreeView<'_>,
        grown: &TreeView<'_>,
        g: &mut BTreeMap<StateId, InputTree>,
    ) -> bool {
        match (base, grown) {
            (TreeView::Leaf(q), sub) => {
                let image = view_to_tree(sub);
                match g.get(q) {
                    Some(existing) => *existing == image,
                    None => {
                        g.insert(*q, image);
                        true
                    }
                }
            }
            (TreeView::Node(bs_a), TreeView::Node(bs_d)) => {
                bs_a.len() == bs_d.len()
                    && bs_a.iter().zip(bs_d).all(|((la, ca), (ld, cd))| {
                        la == ld && walk(ca, cd, g)
                    })
            }
            (TreeView::Node(_), TreeView::Leaf(_)) => false,
        }
    }
    let mut g = BTreeMap::new();
    if !walk(&base.view(), &grown.view(), &mut g) {
        return None;
    }
    let base_states = base.leaf_states();
    let total_growth_in_base = g
        .values()
        .all(|t| t.leaf_states().is_subset(&base_states));
    let not_identity = g.iter().any(|(q, t)| t.as_bare() != Some(*q));
    (total_growth_in_base && not_identity).then_some(g)
}

fn subst_state(
    state: &AsyncState,
    g: &BTreeMap<StateId, InputTree>,
) -> Option<AsyncState> {
    Some(AsyncState {
        p: state.p,
        acc: state.acc.subst(g).ok()?,
    })
}

/// One-period replay of the window `window[0] --sigma--> window[n]`
/// starting from `window[n]`: every replayed node must be the `g`-image
/// of its window counterpart, and every side branch must resolve to a
/// success leaf or an exact repeat of a spine state in the window.
/// Succeeding means the growth pattern repeats forever, so the branch
/// can be accepted.
fn replay_ok(
    sub: &Lts,
    sup: &Lts,
    window: &[AsyncState],
    sigma: &[Action],
    g: &BTreeMap<StateId, InputTree>,
) -> bool {
    debug_assert_eq!(window.len(), sigma.len() + 1);
    let mut spine_states: Vec<AsyncState> = window.to_vec();
    let mut replay = window[window.len() - 1].clone();
    for (step, expected_action) in sigma.iter().enumerate() {
        let w_exp = match expand(sub, sup, &window[step]) {
            Expansion::Steps(steps) => steps,
            _ => return false,
        };
        let r_exp = match expand(sub, sup, &replay) {
            Expansion::Steps(steps) => steps,
            _ => return false,
        };
        if w_exp.len() != r_exp.len() {
            return false;
        }
        let mut next_replay = None;
        for ((w_act, w_child), (r_act, r_child)) in w_exp.iter().zip(&r_exp) {
            if w_act != r_act {
                return false;
            }
            let Some(expected) = subst_state(w_child, g) else {
                return false;
            };
            if *r_child != expected {
                return false;
            }
            if w_act == expected_action {
                debug_assert_eq!(*w_child, window[step + 1]);
                next_replay = Some(r_child.clone());
            } else {
                // Side branch: must close immediately within the window.
                let closes = is_success_state(sub, sup, r_child)
                    || spine_states.iter().any(|s| s == r_child);
                if !closes {
                    return false;
                }
            }
        }
        match next_replay {
            Some(next) => {
                spine_states.push(next.clone());
                replay = next;
            }
            None => return false,
        }
    }
    true
}

/// Decides (soundly, incompletely) whether `sub`'s type is an
/// asynchronous subtype of `sup`'s.
pub fn check_async(sub: &Lts, sup: &Lts, opts: AsyncOpts) -> (Verdict, SimGraph) {
    let started = Instant::now();
    let (verdict, mut graph) = run(sub, sup, opts.max_steps);
    if verdict == Verdict::Maybe && opts.fallback {
        // Dual subtyping problem: swap the types and dualize, which on
        // LTSs is the polarity flip. One attempt, never nested.
        let (dual_verdict, mut dual_graph) =
            run(&sup.polarity_flip(), &sub.polarity_flip(), opts.max_steps);
        dual_graph.meta.fallback_used = true;
        dual_graph.meta.verdict = dual_verdict;
        dual_graph.meta.elapsed = started.elapsed();
        return (dual_verdict, dual_graph);
    }
    graph.meta.verdict = verdict;
    graph.meta.elapsed = started.elapsed();
    (verdict, graph)
}

fn run(sub: &Lts, sup: &Lts, max_steps: usize) -> (Verdict, SimGraph) {
    struct Explorer<'a> {
        sub: &'a Lts,
        sup: &'a Lts,
        graph: SimGraph,
        states: Vec<AsyncState>,
        parents: Vec<Option<(usize, Action)>>,
        failed: bool,
    }

    enum Disposition {
        Closed,
        Pending(usize, Vec<(Action, AsyncState)>),
    }

    impl Explorer<'_> {
        fn add(&mut self, kind: NodeKind, state: AsyncState, incoming: Option<(usize, Action)>) -> usize {
            let id = self
                .graph
                .add_node(kind, state.p, Rhs::Tree(state.acc.clone()));
            self.states.push(state);
            self.parents.push(incoming.clone());
            if let Some((parent, action)) = incoming {
                self.graph.add_step(parent, action, id);
            }
            id
        }

        /// Root path of a prospective child of `parent`, as
        /// `(node, action into the next node)` pairs from the root down.
        fn chain_to(&self, parent: usize) -> Vec<usize> {
            let mut chain = Vec::new();
            let mut cur = Some(parent);
            while let Some(id) = cur {
                chain.push(id);
                cur = self.parents[id].as_ref().map(|(p, _)| *p);
            }
            chain.reverse();
            chain
        }

        /// Classifies a child state and records it in the graph.
        fn settle(
            &mut self,
            state: AsyncState,
            incoming: Option<(usize, Action)>,
        ) -> Disposition {
            let expansion = expand(self.sub, self.sup, &state);
            if matches!(expansion, Expansion::Success) {
                self.add(NodeKind::Success, state, incoming);
                return Disposition::Closed;
            }
            let chain = incoming
                .as_ref()
                .map(|(parent, _)| self.chain_to(*parent))
                .unwrap_or_default();
            if let Some(&ancestor) = chain.iter().find(|&&a| self.states[a] == state) {
                let id = self.add(NodeKind::Normal, state, incoming);
                self.graph
                    .add_back_link(id, ancestor, BackLinkKind::ExactRepeat);
                return Disposition::Closed;
            }
            if let Expansion::Failure(reason) = expansion {
                let id = self.add(NodeKind::Failure(reason), state, incoming);
                self.graph.meta.failure_node = Some(id);
                self.failed = true;
                return Disposition::Closed;
            }
            if let Some(ancestor) = incoming
                .as_ref()
                .and_then(|(_, act)| self.growth_ancestor(&state, &chain, act))
            {
                let id = self.add(NodeKind::Normal, state, incoming);
                self.graph.add_back_link(id, ancestor, BackLinkKind::Growth);
                return Disposition::Closed;
            }
            let Expansion::Steps(steps) = expansion else {
                unreachable!("success and failure handled above")
            };
            let id = self.add(NodeKind::Normal, state, incoming);
            Disposition::Pending(id, steps)
        }

        /// Nearest root-path ancestor with the same subtype state whose
        /// tree the child state grows by a replay-validated substitution.
        fn growth_ancestor(
            &self,
            state: &AsyncState,
            chain: &[usize],
            incoming_action: &Action,
        ) -> Option<usize> {
            for (pos, &anc) in chain.iter().enumerate().rev() {
                let anc_state = &self.states[anc];
                if anc_state.p != state.p {
                    continue;
                }
                let Some(g) = unify_growth(&anc_state.acc, &state.acc) else {
                    continue;
                };
                let mut window: Vec<AsyncState> = chain[pos..]
                    .iter()
                    .map(|&id| self.states[id].clone())
                    .collect();
                window.push(state.clone());
                let mut sigma: Vec<Action> = chain[pos + 1..]
                    .iter()
                    .map(|&id| self.parents[id].as_ref().expect("non-root").1.clone())
                    .collect();
                sigma.push(incoming_action.clone());
                if replay_ok(self.sub, self.sup, &window, &sigma, &g) {
                    return Some(anc);
                }
            }
            None
        }
    }

    let mut explorer = Explorer {
        sub,
        sup,
        graph: SimGraph::new("async"),
        states: Vec::new(),
        parents: Vec::new(),
        failed: false,
    };

    let initial = AsyncState {
        p: sub.initial(),
        acc: InputTree::bare(sup.initial()),
    };
    let mut stack: Vec<(usize, Vec<(Action, AsyncState)>)> = Vec::new();
    if let Disposition::Pending(id, steps) = explorer.settle(initial, None) {
        stack.push((id, steps));
    }

    let mut expanded = 0usize;
    let mut budget_exhausted = false;
    'explore: while let Some((id, steps)) = stack.pop() {
        if expanded == max_steps {
            budget_exhausted = true;
            break;
        }
        expanded += 1;
        let mut pending = Vec::new();
        for (action, next) in steps {
            match explorer.settle(next, Some((id, action))) {
                Disposition::Closed => {
                    if explorer.failed {
                        break 'explore;
                    }
                }
                Disposition::Pending(child, child_steps) => {
                    pending.push((child, child_steps));
                }
            }
        }
        // Depth-first: first branch on top.
        stack.extend(pending.into_iter().rev());
    }

    explorer.graph.meta.steps = expanded;
    explorer.graph.meta.budget_exhausted = budget_exhausted;
    let verdict = if explorer.failed {
        Verdict::False
    } else if budget_exhausted || !stack.is_empty() {
        Verdict::Maybe
    } else {
        Verdict::True
    };
    (verdict, explorer.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::build_lts;
    use crate::oracle::{explore, ExploreMode, Outcome};
    use crate::types::{parse, Label};

    fn lts_of(src: &str) -> Lts {
        build_lts(&parse(src).unwrap())
    }

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    const IDEAL_CLIENT: &str = "rec X. +{nd; &{ko;X, ok;X}, pr; &{ko;X, ok;X}}";
    const COVARIANT_CLIENT: &str = "rec X. +{nd; &{ko;X, ok;X, dk;X}}";
    const ANTICIPATING_CLIENT: &str = "rec X. +{nd; &{ko;X, ok; +{pr;X}}}";
    const SATELLITE_CLIENT: &str = "rec X.&{tm;X, over;rec Y.+{tc;Y, done;end}}";
    const SWAPPED_SATELLITE_CLIENT: &str = "rec X.+{tc;X, done;rec Y.&{tm;Y, over;end}}";

    fn ko_ok_tree(q: u32) -> InputTree {
        InputTree::branch(vec![
            (lab("ko"), InputTree::bare(StateId(q))),
            (lab("ok"), InputTree::bare(StateId(q))),
        ])
    }

    #[test]
    fn anticipating_client_is_an_async_subtype() {
        let (verdict, graph) = check_async(
            &lts_of(ANTICIPATING_CLIENT),
            &lts_of(IDEAL_CLIENT),
            AsyncOpts::default(),
        );
        assert_eq!(verdict, Verdict::True);
        assert!(!graph.meta.fallback_used);
        assert!(graph.meta.steps <= 200);
        // The run accumulates exactly the <ko:2,ok:2> input tree.
        assert!(graph
            .nodes
            .iter()
            .any(|n| n.rhs == Rhs::Tree(ko_ok_tree(2))));
        // At least one branch is closed by the periodic-growth rule, and
        // it identifies the one-level tree with its two-level growth.
        let growth: Vec<_> = graph
            .edges
            .iter()
            .filter_map(|e| match e {
                crate::simgraph::SimEdge::BackLink {
                    from,
                    to,
                    kind: BackLinkKind::Growth,
                } => Some((*from, *to)),
                _ => None,
            })
            .collect();
        assert!(!growth.is_empty());
        let (from, to) = growth[0];
        let two_level = ko_ok_tree(2)
            .subst(&BTreeMap::from([(StateId(2), ko_ok_tree(2))]))
            .unwrap();
        assert_eq!(graph.nodes[to].rhs, Rhs::Tree(ko_ok_tree(2)));
        assert_eq!(graph.nodes[from].rhs, Rhs::Tree(two_level));
        assert!(graph.is_ancestor(to, from));
    }

    #[test]
    fn swapped_satellite_client_is_rejected() {
        let (verdict, graph) = check_async(
            &lts_of(SWAPPED_SATELLITE_CLIENT),
            &lts_of(SATELLITE_CLIENT),
            AsyncOpts::default(),
        );
        assert_eq!(verdict, Verdict::False);
        // The subtype starts with an output loop while the supertype
        // offers only inputs: no rule applies at the very root.
        assert_eq!(graph.meta.failure_node, Some(graph.root));
        assert_eq!(
            graph.nodes[graph.root].kind,
            NodeKind::Failure(FailureReason::OutputLoop)
        );
        assert!(!graph.meta.fallback_used);
    }

    #[test]
    fn reflexivity_without_accumulation() {
        for src in [
            IDEAL_CLIENT,
            ANTICIPATING_CLIENT,
            SATELLITE_CLIENT,
            "end",
            "rec X.+{a;X}",
        ] {
            let lts = lts_of(src);
            let (verdict, graph) = check_async(&lts, &lts, AsyncOpts::default());
            assert_eq!(verdict, Verdict::True, "{src}");
            // No accumulation happens on the diagonal.
            assert!(graph
                .nodes
                .iter()
                .all(|n| matches!(&n.rhs, Rhs::Tree(t) if t.as_bare().is_some())));
        }
    }

    #[test]
    fn synchronous_subtyping_carries_over() {
        let (verdict, _) = check_async(
            &lts_of(COVARIANT_CLIENT),
            &lts_of(IDEAL_CLIENT),
            AsyncOpts::default(),
        );
        assert_eq!(verdict, Verdict::True);
    }

    #[test]
    fn budget_exhaustion_yields_maybe_and_fallback_is_flagged() {
        let sub = lts_of(ANTICIPATING_CLIENT);
        let sup = lts_of(IDEAL_CLIENT);
        let (verdict, graph) = check_async(
            &sub,
            &sup,
            AsyncOpts {
                max_steps: 1,
                fallback: false,
            },
        );
        assert_eq!(verdict, Verdict::Maybe);
        assert!(graph.meta.budget_exhausted);
        assert!(!graph.meta.fallback_used);

        let (verdict, graph) = check_async(
            &sub,
            &sup,
            AsyncOpts {
                max_steps: 1,
                fallback: true,
            },
        );
        assert_eq!(verdict, Verdict::Maybe);
        assert!(graph.meta.fallback_used);
    }

    #[test]
    fn verdicts_are_stable_under_larger_budgets() {
        let cases = [
            (ANTICIPATING_CLIENT, IDEAL_CLIENT),
            (SWAPPED_SATELLITE_CLIENT, SATELLITE_CLIENT),
            (COVARIANT_CLIENT, IDEAL_CLIENT),
        ];
        for (sub, sup) in cases {
            let (at_default, _) =
                check_async(&lts_of(sub), &lts_of(sup), AsyncOpts::default());
            let (at_larger, _) = check_async(
                &lts_of(sub),
                &lts_of(sup),
                AsyncOpts {
                    max_steps: 20_000,
                    fallback: true,
                },
            );
            assert_eq!(at_default, at_larger, "{sub} <= {sup}");
        }
    }

    #[test]
    fn growth_unification_requirements() {
        let base = ko_ok_tree(2);
        // New leaf state outside the base: no growth substitution.
        let foreign = InputTree::branch(vec![
            (lab("ko"), ko_ok_tree(3)),
            (lab("ok"), ko_ok_tree(3)),
        ]);
        assert!(unify_growth(&base, &foreign).is_none());
        // Inconsistent images for the same leaf state.
        let skewed = InputTree::branch(vec![
            (lab("ko"), ko_ok_tree(2)),
            (lab("ok"), InputTree::bare(StateId(2))),
        ]);
        assert!(unify_growth(&base, &skewed).is_none());
        // Identity is handled by the exact-repeat rule, not here.
        assert!(unify_growth(&base, &base).is_none());
        // The genuine growth of the anticipation run.
        let two_level = base
            .subst(&BTreeMap::from([(StateId(2), base.clone())]))
            .unwrap();
        let g = unify_growth(&base, &two_level).unwrap();
        assert_eq!(g, BTreeMap::from([(StateId(2), base.clone())]));
    }

    #[test]
    fn async_true_implies_no_bounded_fifo_violation_against_the_dual() {
        let sub_ty = parse(ANTICIPATING_CLIENT).unwrap();
        let sup_ty = parse(IDEAL_CLIENT).unwrap();
        let (verdict, _) = check_async(
            &build_lts(&sub_ty),
            &build_lts(&sup_ty),
            AsyncOpts::default(),
        );
        assert_eq!(verdict, Verdict::True);
        let res = explore(
            &build_lts(&sub_ty),
            &build_lts(&sup_ty.dual()),
            ExploreMode::Fifo(4),
            60,
        );
        assert_eq!(res.outcome, Outcome::NoViolationFound);
    }

    #[test]
    fn duality_closure_on_the_anticipation_pair() {
        let sub = parse(ANTICIPATING_CLIENT).unwrap();
        let sup = parse(IDEAL_CLIENT).unwrap();
        let (v, _) = check_async(
            &build_lts(&sup.dual()),
            &build_lts(&sub.dual()),
            AsyncOpts::default(),
        );
        assert_eq!(v, Verdict::True);
    }
}
