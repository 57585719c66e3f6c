//! Simulation graphs and Graphviz DOT emission.
//!
//! All three checkers report their game as a [`SimGraph`]: nodes pair a
//! state of the candidate subtype with the supertype side (a bare
//! state, an input tree or a recursive input context), solid edges
//! carry the simulated actions, and dashed edges identify a node with
//! an ancestor that closes the branch. The DOT output follows one
//! visual convention throughout: rectangular nodes, a thicker border on
//! the initial node, failure nodes filled red, and the accumulated
//! input structure drawn in blue as nested rectangles.
//!
//! Emission is deterministic: equal graphs produce byte-identical text.

use std::fmt;
use std::time::Duration;

use crate::input_ctx::{InputTree, RecInputContext, RecView, TreeView};
use crate::lts::{Action, Lts, StateId};

/// Three-valued outcome of a subtyping check. The synchronous game is
/// exact and never answers `Maybe`; the asynchronous games are sound
/// but incomplete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    Maybe,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::True => write!(f, "true"),
            Verdict::False => write!(f, "false"),
            Verdict::Maybe => write!(f, "maybe"),
        }
    }
}

/// Why a simulation node is a failure state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// The two sides offer different polarities with nothing accumulated.
    PolarityMismatch,
    /// The subtype offers an output the supertype side cannot match.
    OutputCovariance,
    /// The supertype side offers an input the subtype does not accept.
    InputContravariance,
    /// Exactly one side has terminated.
    OneSidedTermination,
    /// Output anticipation refused: the subtype can cycle on outputs, so
    /// accumulated inputs might never be consumed.
    OutputLoop,
    /// A supertype leaf has an input cycle, so its input tree is
    /// undefined.
    UndefinedInputTree,
    /// The subtype terminated while accumulated inputs are pending.
    ResidualInput,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailureReason::PolarityMismatch => "polarity mismatch",
            FailureReason::OutputCovariance => "output covariance violated",
            FailureReason::InputContravariance => "input contravariance violated",
            FailureReason::OneSidedTermination => "one-sided termination",
            FailureReason::OutputLoop => "output loop blocks anticipation",
            FailureReason::UndefinedInputTree => "input cycle on the supertype side",
            FailureReason::ResidualInput => "terminated with residual accumulated input",
        };
        f.write_str(s)
    }
}

/// The supertype side of a simulation node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    /// A bare supertype state (synchronous game).
    State(StateId),
    /// An accumulated input tree (asynchronous game).
    Tree(InputTree),
    /// A recursive input context (fair asynchronous game).
    Ctx(RecInputContext),
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::State(q) => write!(f, "{q}"),
            Rhs::Tree(t) => write!(f, "{t}"),
            Rhs::Ctx(c) => write!(f, "{c}"),
        }
    }
}

/// Node classification in the simulation graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Normal,
    /// Both sides terminated cleanly.
    Success,
    /// No game rule applies; witnesses non-subtyping.
    Failure(FailureReason),
}

/// One simulation node: subtype state on the left, supertype side on
/// the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimNode {
    pub id: usize,
    pub kind: NodeKind,
    pub lhs: StateId,
    pub rhs: Rhs,
}

impl SimNode {
    /// The caption used in rendered output, e.g. `2, <ko:2,ok:2>`.
    pub fn caption(&self) -> String {
        format!("{}, {}", self.lhs, self.rhs)
    }
}

/// How a dashed back-link was justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackLinkKind {
    /// The node's state equals the ancestor's state exactly.
    ExactRepeat,
    /// The node's state grows the ancestor's by a substitution whose
    /// one-period replay succeeded (asynchronous game only).
    Growth,
}

/// An edge of the simulation graph: either a simulated action (drawn
/// solid) or a dashed back-link identifying the source with an
/// ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimEdge {
    Step {
        from: usize,
        to: usize,
        action: Action,
    },
    BackLink {
        from: usize,
        to: usize,
        kind: BackLinkKind,
    },
}

impl SimEdge {
    pub fn from(&self) -> usize {
        match self {
            SimEdge::Step { from, .. } | SimEdge::BackLink { from, .. } => *from,
        }
    }

    pub fn to(&self) -> usize {
        match self {
            SimEdge::Step { to, .. } | SimEdge::BackLink { to, .. } => *to,
        }
    }

    pub fn is_back_link(&self) -> bool {
        matches!(self, SimEdge::BackLink { .. })
    }
}

/// Bookkeeping attached to a finished check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimMeta {
    /// `"sync"`, `"async"` or `"fair"`.
    pub algorithm: &'static str,
    pub verdict: Verdict,
    /// Whether the verdict was adopted from the dualized problem.
    pub fallback_used: bool,
    /// Number of nodes expanded by the game.
    pub steps: usize,
    /// Wall-clock time of the check (excluded from DOT output).
    pub elapsed: Duration,
    /// The exploration stopped because the step budget ran out.
    pub budget_exhausted: bool,
    /// The failure node that decided a `false` verdict, if any.
    pub failure_node: Option<usize>,
}

impl SimMeta {
    pub fn new(algorithm: &'static str) -> Self {
        SimMeta {
            algorithm,
            verdict: Verdict::Maybe,
            fallback_used: false,
            steps: 0,
            elapsed: Duration::ZERO,
            budget_exhausted: false,
            failure_node: None,
        }
    }
}

/// The simulation graph produced by a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimGraph {
    pub nodes: Vec<SimNode>,
    pub edges: Vec<SimEdge>,
    pub root: usize,
    pub meta: SimMeta,
}

impl SimGraph {
    pub fn new(algorithm: &'static str) -> Self {
        SimGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            root: 0,
            meta: SimMeta::new(algorithm),
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, lhs: StateId, rhs: Rhs) -> usize {
        let id = self.nodes.len();
        self.nodes.push(SimNode { id, kind, lhs, rhs });
        id
    }

    pub fn add_step(&mut self, from: usize, action: Action, to: usize) {
        self.edges.push(SimEdge::Step { from, to, action });
    }

    pub fn add_back_link(&mut self, from: usize, to: usize, kind: BackLinkKind) {
        self.edges.push(SimEdge::BackLink { from, to, kind });
    }

    pub fn failure_nodes(&self) -> Vec<&SimNode> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Failure(_)))
            .collect()
    }

    pub fn success_nodes(&self) -> Vec<&SimNode> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Success)
            .collect()
    }

    pub fn back_links(&self) -> Vec<&SimEdge> {
        self.edges.iter().filter(|e| e.is_back_link()).collect()
    }

    /// The solid-edge parent of a node, when the graph is a tree.
    pub fn parent(&self, node: usize) -> Option<usize> {
        self.edges.iter().find_map(|e| match e {
            SimEdge::Step { from, to, .. } if *to == node => Some(*from),
            _ => None,
        })
    }

    /// True iff `anc` lies on the solid-edge path from the root to
    /// `node` (tree-shaped graphs).
    pub fn is_ancestor(&self, anc: usize, node: usize) -> bool {
        let mut cur = Some(node);
        while let Some(n) = cur {
            if n == anc {
                return true;
            }
            cur = self.parent(n);
        }
        false
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Blue text chunk inside an HTML-like label.
fn blue(text: &str) -> String {
    format!("<FONT COLOR=\"blue\">{text}</FONT>")
}

/// A labelled branch cell: plain text for leaf content, a small layout
/// table when the content is itself a table (HTML-like labels cannot
/// mix text and tables in one cell).
fn branch_cell(label: &str, content: &HtmlPiece) -> String {
    match content {
        HtmlPiece::Text(t) => format!("<TD>{}</TD>", blue(&format!("{label}: {t}"))),
        HtmlPiece::Table(t) => format!(
            "<TD><TABLE BORDER=\"0\" CELLBORDER=\"0\" CELLSPACING=\"1\"><TR><TD>{}</TD><TD>{}</TD></TR></TABLE></TD>",
            blue(&format!("{label}:")),
            t
        ),
    }
}

enum HtmlPiece {
    Text(String),
    Table(String),
}

impl HtmlPiece {
    fn into_cell_content(self) -> String {
        match self {
            HtmlPiece::Text(t) => blue(&t),
            HtmlPiece::Table(t) => t,
        }
    }
}

fn tree_html(view: &TreeView<'_>) -> HtmlPiece {
    match view {
        TreeView::Leaf(q) => HtmlPiece::Text(q.to_string()),
        TreeView::Node(branches) => {
            let cells: String = branches
                .iter()
                .map(|(l, sub)| branch_cell(l.as_str(), &tree_html(sub)))
                .collect();
            HtmlPiece::Table(format!(
                "<TABLE BORDER=\"1\" COLOR=\"blue\" CELLBORDER=\"0\" CELLSPACING=\"4\"><TR>{cells}</TR></TABLE>"
            ))
        }
    }
}

fn rec_html(view: &RecView<'_>) -> HtmlPiece {
    match view {
        RecView::Leaf(q) => HtmlPiece::Text(q.to_string()),
        RecView::Var(v) => HtmlPiece::Text(v.to_string()),
        RecView::Rec(v, body) => {
            let body = rec_html(body).into_cell_content();
            HtmlPiece::Table(format!(
                "<TABLE BORDER=\"0\" CELLBORDER=\"0\" CELLSPACING=\"1\"><TR><TD>{}</TD><TD>{}</TD></TR></TABLE>",
                blue(&format!("rec {v}.")),
                body
            ))
        }
        RecView::Node(branches) => {
            let cells: String = branches
                .iter()
                .map(|(l, sub)| branch_cell(l.as_str(), &rec_html(sub)))
                .collect();
            HtmlPiece::Table(format!(
                "<TABLE BORDER=\"1\" COLOR=\"blue\" CELLBORDER=\"0\" CELLSPACING=\"4\"><TR>{cells}</TR></TABLE>"
            ))
        }
    }
}

fn node_label(node: &SimNode) -> String {
    let rhs = match &node.rhs {
        Rhs::State(q) => HtmlPiece::Text(q.to_string()),
        Rhs::Tree(t) => tree_html(&t.view()),
        Rhs::Ctx(c) => rec_html(&c.view()),
    };
    format!(
        "<<TABLE BORDER=\"0\" CELLBORDER=\"0\" CELLSPACING=\"2\"><TR><TD>{},</TD><TD>{}</TD></TR></TABLE>>",
        node.lhs,
        rhs.into_cell_content()
    )
}

/// Renders a simulation graph as Graphviz DOT text.
///
/// Styling: every node is a rectangle; the root has a thicker border
/// (`penwidth=3`); failure nodes are filled red; the supertype-side
/// content is drawn in blue as nested rectangles; back-links are
/// dashed. Output is deterministic for equal graphs (elapsed time is
/// not emitted).
pub fn sim_to_dot(g: &SimGraph) -> String {
    let mut out = String::new();
    out.push_str("digraph simulation {\n");
    out.push_str(&format!(
        "  // algorithm: {}, verdict: {}, steps: {}, fallback: {}\n",
        g.meta.algorithm, g.meta.verdict, g.meta.steps, g.meta.fallback_used
    ));
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [shape=rectangle];\n");
    for node in &g.nodes {
        let mut attrs = Vec::new();
        if node.id == g.root {
            attrs.push("penwidth=3".to_string());
        }
        let tooltip = match node.kind {
            NodeKind::Failure(reason) => format!("{} | {}", node.caption(), reason),
            _ => node.caption(),
        };
        if matches!(node.kind, NodeKind::Failure(_)) {
            attrs.push("style=filled".to_string());
            attrs.push("fillcolor=red".to_string());
        }
        attrs.push(format!("label={}", node_label(node)));
        attrs.push(format!("tooltip=\"{}\"", escape(&tooltip)));
        out.push_str(&format!("  n{} [{}];\n", node.id, attrs.join(", ")));
    }
    for edge in &g.edges {
        match edge {
            SimEdge::Step { from, to, action } => {
                out.push_str(&format!(
                    "  n{from} -> n{to} [label=\"{}\"];\n",
                    escape(&action.to_string())
                ));
            }
            SimEdge::BackLink { from, to, .. } => {
                out.push_str(&format!("  n{from} -> n{to} [style=dashed];\n"));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Renders an LTS as Graphviz DOT text: one rectangular node per state
/// labelled with its number (the initial one thicker) and one edge per
/// transition labelled with its action.
pub fn lts_to_dot(l: &Lts) -> String {
    let mut out = String::new();
    out.push_str("digraph lts {\n");
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [shape=rectangle];\n");
    for q in l.states() {
        if q == l.initial() {
            out.push_str(&format!("  s{q} [penwidth=3, label=\"{q}\"];\n"));
        } else {
            out.push_str(&format!("  s{q} [label=\"{q}\"];\n"));
        }
    }
    for q in l.states() {
        for (action, target) in l.transitions_from(q) {
            out.push_str(&format!(
                "  s{q} -> s{target} [label=\"{}\"];\n",
                escape(&action.to_string())
            ));
        }
    }
    out.push_str("}\n");
    out
}
