//! Accumulated-input structures for the asynchronous games.
//!
//! An [`InputContext`] is a finite tree of branch labels whose leaves
//! are indexed holes; filling the holes with LTS states gives an
//! [`InputTree`], the record of inputs the candidate supertype has
//! accumulated while the subtype anticipated outputs. [`intree`] spans
//! the receive-only region of a state and is undefined exactly when
//! that region contains a cycle; [`RecInputContext`] generalises input
//! contexts with recursion so the fair game can fold such cycles
//! instead of rejecting them.
//!
//! All structures are kept in canonical form: holes are numbered
//! left-to-right from 1 and recursion variables in binder preorder from
//! 0, so derived structural equality is meaningful.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lts::{Lts, Polarity, StateId};
use crate::types::Label;

/// Index of a hole inside an input context (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HoleIx(pub u32);

impl fmt::Display for HoleIx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An input context: a tree of labelled branches with indexed holes at
/// the leaves. Hole indices are pairwise distinct; every node has at
/// least one branch with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InputContext {
    Hole(HoleIx),
    Node(Vec<(Label, InputContext)>),
}

/// An input context whose holes are filled with states of the candidate
/// supertype's LTS. A bare state is the degenerate tree consisting of a
/// single hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputTree {
    context: InputContext,
    /// Hole `j` holds `assignment[j - 1]`; canonical numbering keeps
    /// this dense and ordered left-to-right.
    assignment: Vec<StateId>,
}

/// Errors from consuming a label at the root of an accumulated-input
/// structure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsumeError {
    #[error("the structure is a bare state, there is no input to consume")]
    RootIsHole,
    #[error("label `{0}` does not occur at the root")]
    LabelNotAtRoot(Label),
}

/// Error from [`InputTree::grow`]: a hole has no expansion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no expansion given for hole {0}")]
pub struct MissingExpansion(pub HoleIx);

/// Error from [`InputTree::subst`]: a leaf state has no image.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no substitute tree given for leaf state {0}")]
pub struct MissingLeafState(pub StateId);

impl InputTree {
    /// The degenerate tree holding a single state.
    pub fn bare(q: StateId) -> Self {
        InputTree {
            context: InputContext::Hole(HoleIx(1)),
            assignment: vec![q],
        }
    }

    /// Builds a branching tree. Panics on empty or duplicate-labelled
    /// branch lists, which would violate the context invariants.
    pub fn branch(branches: Vec<(Label, InputTree)>) -> Self {
        assert!(!branches.is_empty(), "input context node needs a branch");
        let mut seen = BTreeSet::new();
        for (l, _) in &branches {
            assert!(seen.insert(l.clone()), "duplicate branch label `{l}`");
        }
        let mut assignment = Vec::new();
        let context = InputContext::Node(
            branches
                .iter()
                .map(|(l, sub)| (l.clone(), append_renumbered(&sub.context, &sub.assignment, &mut assignment)))
                .collect(),
        );
        InputTree { context, assignment }
    }

    pub fn context(&self) -> &InputContext {
        &self.context
    }

    /// `Some(q)` iff the tree is the bare state `q`.
    pub fn as_bare(&self) -> Option<StateId> {
        match self.context {
            InputContext::Hole(_) => Some(self.assignment[0]),
            InputContext::Node(_) => None,
        }
    }

    /// Labels at the root node, in order; `None` for a bare state.
    pub fn root_labels(&self) -> Option<Vec<Label>> {
        match &self.context {
            InputContext::Hole(_) => None,
            InputContext::Node(bs) => Some(bs.iter().map(|(l, _)| l.clone()).collect()),
        }
    }

    /// The sub-tree under root branch `l`, with the leaf assignment
    /// restricted accordingly.
    pub fn consume(&self, l: &Label) -> Result<InputTree, ConsumeError> {
        match &self.context {
            InputContext::Hole(_) => Err(ConsumeError::RootIsHole),
            InputContext::Node(bs) => {
                let (_, sub) = bs
                    .iter()
                    .find(|(bl, _)| bl == l)
                    .ok_or_else(|| ConsumeError::LabelNotAtRoot(l.clone()))?;
                let mut assignment = Vec::new();
                let context = append_renumbered(sub, &self.assignment, &mut assignment);
                Ok(InputTree { context, assignment })
            }
        }
    }

    /// Replaces every hole by its expansion; hole indices are reassigned
    /// fresh left-to-right.
    pub fn grow(
        &self,
        expansion: &BTreeMap<HoleIx, InputTree>,
    ) -> Result<InputTree, MissingExpansion> {
        self.splice(|ix, _| expansion.get(&ix).cloned().ok_or(MissingExpansion(ix)))
    }

    /// Replaces each leaf holding state `q` by `g[q]`; `g` must be total
    /// on the leaf states.
    pub fn subst(
        &self,
        g: &BTreeMap<StateId, InputTree>,
    ) -> Result<InputTree, MissingLeafState> {
        self.splice(|_, q| g.get(&q).cloned().ok_or(MissingLeafState(q)))
    }

    fn splice<E>(
        &self,
        mut f: impl FnMut(HoleIx, StateId) -> Result<InputTree, E>,
    ) -> Result<InputTree, E> {
        fn rec<E>(
            ctx: &InputContext,
            old: &[StateId],
            f: &mut impl FnMut(HoleIx, StateId) -> Result<InputTree, E>,
            acc: &mut Vec<StateId>,
        ) -> Result<InputContext, E> {
            match ctx {
                InputContext::Hole(j) => {
                    let sub = f(*j, old[j.0 as usize - 1])?;
                    Ok(append_renumbered(&sub.context, &sub.assignment, acc))
                }
                InputContext::Node(bs) => {
                    let mut out = Vec::with_capacity(bs.len());
                    for (l, c) in bs {
                        out.push((l.clone(), rec(c, old, f, acc)?));
                    }
                    Ok(InputContext::Node(out))
                }
            }
        }
        let mut assignment = Vec::new();
        let context = rec(&self.context, &self.assignment, &mut f, &mut assignment)?;
        Ok(InputTree { context, assignment })
    }

    /// Maps every leaf state in place (shape unchanged).
    pub fn map_states(&self, mut f: impl FnMut(StateId) -> StateId) -> InputTree {
        InputTree {
            context: self.context.clone(),
            assignment: self.assignment.iter().map(|&q| f(q)).collect(),
        }
    }

    /// `(hole index, state)` pairs in left-to-right order.
    pub fn leaves(&self) -> Vec<(HoleIx, StateId)> {
        fn rec(ctx: &InputContext, assign: &[StateId], out: &mut Vec<(HoleIx, StateId)>) {
            match ctx {
                InputContext::Hole(j) => out.push((*j, assign[j.0 as usize - 1])),
                InputContext::Node(bs) => bs.iter().for_each(|(_, c)| rec(c, assign, out)),
            }
        }
        let mut out = Vec::new();
        rec(&self.context, &self.assignment, &mut out);
        out
    }

    /// The set of states occurring at the leaves.
    pub fn leaf_states(&self) -> BTreeSet<StateId> {
        self.assignment.iter().copied().collect()
    }

    /// Checks the canonical-form invariant (dense left-to-right hole
    /// numbering); useful in tests.
    pub fn holes_are_canonical(&self) -> bool {
        self.leaves()
            .iter()
            .enumerate()
            .all(|(i, (j, _))| j.0 as usize == i + 1)
            && self.leaves().len() == self.assignment.len()
    }

    /// A borrowed structural view with holes resolved to their states,
    /// for renderers.
    pub fn view(&self) -> TreeView<'_> {
        fn rec<'a>(ctx: &'a InputContext, assign: &[StateId]) -> TreeView<'a> {
            match ctx {
                InputContext::Hole(j) => TreeView::Leaf(assign[j.0 as usize - 1]),
                InputContext::Node(bs) => {
                    TreeView::Node(bs.iter().map(|(l, c)| (l, rec(c, assign))).collect())
                }
            }
        }
        rec(&self.context, &self.assignment)
    }
}

/// Structural view of an [`InputTree`] (see [`InputTree::view`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeView<'a> {
    Leaf(StateId),
    Node(Vec<(&'a Label, TreeView<'a>)>),
}

/// Copies `ctx` while renumbering its holes to continue `acc`, pushing
/// the corresponding states onto `acc`.
fn append_renumbered(
    ctx: &InputContext,
    assign: &[StateId],
    acc: &mut Vec<StateId>,
) -> InputContext {
    match ctx {
        InputContext::Hole(j) => {
            acc.push(assign[j.0 as usize - 1]);
            InputContext::Hole(HoleIx(acc.len() as u32))
        }
        InputContext::Node(bs) => InputContext::Node(
            bs.iter()
                .map(|(l, c)| (l.clone(), append_renumbered(c, assign, acc)))
                .collect(),
        ),
    }
}

impl fmt::Display for InputTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(ctx: &InputContext, assign: &[StateId], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match ctx {
                InputContext::Hole(j) => write!(f, "{}", assign[j.0 as usize - 1]),
                InputContext::Node(bs) => {
                    write!(f, "<")?;
                    for (i, (l, c)) in bs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{l}:")?;
                        rec(c, assign, f)?;
                    }
                    write!(f, ">")
                }
            }
        }
        rec(&self.context, &self.assignment, f)
    }
}

/// The input-spanning tree of `q`: all sequences of messages receivable
/// from `q` until a final or sending state is reached, with those
/// states at the holes. `None` exactly when the receive-only region
/// from `q` contains a cycle, which would make the tree infinite.
pub fn intree(lts: &Lts, q: StateId) -> Option<InputTree> {
    if lts
        .has_cycle(Polarity::Receive, q)
        .expect("state belongs to the LTS")
    {
        return None;
    }
    fn build(lts: &Lts, q: StateId, assignment: &mut Vec<StateId>) -> InputContext {
        let ins = lts.input_transitions(q);
        if ins.is_empty() {
            assignment.push(q);
            InputContext::Hole(HoleIx(assignment.len() as u32))
        } else {
            InputContext::Node(
                ins.into_iter()
                    .map(|(l, q2)| (l, build(lts, q2, assignment)))
                    .collect(),
            )
        }
    }
    let mut assignment = Vec::new();
    let context = build(lts, q, &mut assignment);
    Some(InputTree { context, assignment })
}

/// Identifier of a recursion variable in a [`RecInputContext`]
/// (canonical numbering: binder preorder from 0, displayed `X0`, `X1`…).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum RecShape {
    Hole(HoleIx),
    Node(Vec<(Label, RecShape)>),
    Rec(VarId, Box<RecShape>),
    Var(VarId),
}

/// An input context extended with recursion, so unbounded input loops
/// can be folded into a finite structure. Holes are filled with LTS
/// states exactly as in [`InputTree`].
///
/// Values are kept canonical (dense hole numbering, binder-preorder
/// variable numbering, no unused binders), so structural equality
/// coincides with equality of canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecInputContext {
    shape: RecShape,
    assignment: Vec<StateId>,
}

/// Root view of a [`RecInputContext`] after peeking through binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecRoot {
    /// A bare state.
    Hole(StateId),
    /// A branch node carrying these labels (in order).
    Branch(Vec<Label>),
}

/// Structural view of a [`RecInputContext`] (see
/// [`RecInputContext::view`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecView<'a> {
    Leaf(StateId),
    Node(Vec<(&'a Label, RecView<'a>)>),
    Rec(VarId, Box<RecView<'a>>),
    Var(VarId),
}

impl RecInputContext {
    pub fn bare(q: StateId) -> Self {
        RecInputContext {
            shape: RecShape::Hole(HoleIx(1)),
            assignment: vec![q],
        }
    }

    pub fn as_bare(&self) -> Option<StateId> {
        match self.shape {
            RecShape::Hole(_) => Some(self.assignment[0]),
            _ => None,
        }
    }

    /// True iff the context uses recursion anywhere.
    pub fn is_recursive(&self) -> bool {
        fn rec(s: &RecShape) -> bool {
            match s {
                RecShape::Hole(_) => false,
                RecShape::Node(bs) => bs.iter().any(|(_, c)| rec(c)),
                RecShape::Rec(..) | RecShape::Var(_) => true,
            }
        }
        rec(&self.shape)
    }

    /// The root after unfolding leading binders: either a bare state or
    /// a branch node. Binders never wrap a lone variable, so this is
    /// total on canonical values.
    pub fn root(&self) -> RecRoot {
        let mut s = &self.shape;
        loop {
            match s {
                RecShape::Rec(_, body) => s = body,
                RecShape::Hole(j) => {
                    return RecRoot::Hole(self.assignment[j.0 as usize - 1]);
                }
                RecShape::Node(bs) => {
                    return RecRoot::Branch(bs.iter().map(|(l, _)| l.clone()).collect());
                }
                RecShape::Var(_) => unreachable!("canonical context has no root variable"),
            }
        }
    }

    /// Consumes label `l` at the root: leading binders are unfolded
    /// first, then the branch under `l` is extracted.
    pub fn consume(&self, l: &Label) -> Result<RecInputContext, ConsumeError> {
        let mut shape = self.shape.clone();
        loop {
            match shape {
                RecShape::Rec(v, body) => {
                    let rec = RecShape::Rec(v, body.clone());
                    shape = substitute_var(&body, v, &rec);
                }
                RecShape::Hole(_) => return Err(ConsumeError::RootIsHole),
                RecShape::Node(ref bs) => {
                    let (_, sub) = bs
                        .iter()
                        .find(|(bl, _)| bl == l)
                        .ok_or_else(|| ConsumeError::LabelNotAtRoot(l.clone()))?;
                    return Ok(canonicalize(sub, &self.assignment));
                }
                RecShape::Var(_) => unreachable!("canonical context has no root variable"),
            }
        }
    }

    /// Replaces every hole by the given closed context, renumbering
    /// holes and variables canonically.
    pub fn graft(
        &self,
        expansion: &BTreeMap<HoleIx, RecInputContext>,
    ) -> Result<RecInputContext, MissingExpansion> {
        // Splice shapes as-is and record the grafted states in
        // left-to-right hole order; the canonicalization pass renumbers
        // holes positionally and keeps accidental variable shadowing
        // between host and grafted pieces well-scoped.
        fn rec(
            shape: &RecShape,
            expansion: &BTreeMap<HoleIx, RecInputContext>,
            out_assign: &mut Vec<StateId>,
        ) -> Result<RecShape, MissingExpansion> {
            match shape {
                RecShape::Hole(j) => {
                    let sub = expansion.get(j).ok_or(MissingExpansion(*j))?;
                    out_assign.extend_from_slice(&sub.assignment);
                    Ok(sub.shape.clone())
                }
                RecShape::Node(bs) => Ok(RecShape::Node(
                    bs.iter()
                        .map(|(l, c)| Ok((l.clone(), rec(c, expansion, out_assign)?)))
                        .collect::<Result<_, _>>()?,
                )),
                RecShape::Rec(v, body) => Ok(RecShape::Rec(
                    *v,
                    Box::new(rec(body, expansion, out_assign)?),
                )),
                RecShape::Var(v) => Ok(RecShape::Var(*v)),
            }
        }
        let mut out_assign = Vec::new();
        let shape = rec(&self.shape, expansion, &mut out_assign)?;
        Ok(canonicalize_with(&shape, &out_assign))
    }

    /// Maps every hole state in place (shape unchanged).
    pub fn map_hole_states(&self, mut f: impl FnMut(StateId) -> StateId) -> RecInputContext {
        RecInputContext {
            shape: self.shape.clone(),
            assignment: self.assignment.iter().map(|&q| f(q)).collect(),
        }
    }

    pub fn leaves(&self) -> Vec<(HoleIx, StateId)> {
        fn rec(s: &RecShape, assign: &[StateId], out: &mut Vec<(HoleIx, StateId)>) {
            match s {
                RecShape::Hole(j) => out.push((*j, assign[j.0 as usize - 1])),
                RecShape::Node(bs) => bs.iter().for_each(|(_, c)| rec(c, assign, out)),
                RecShape::Rec(_, body) => rec(body, assign, out),
                RecShape::Var(_) => {}
            }
        }
        let mut out = Vec::new();
        rec(&self.shape, &self.assignment, &mut out);
        out
    }

    pub fn leaf_states(&self) -> BTreeSet<StateId> {
        self.assignment.iter().copied().collect()
    }

    /// A borrowed structural view with holes resolved to their states,
    /// for renderers.
    pub fn view(&self) -> RecView<'_> {
        fn rec<'a>(s: &'a RecShape, assign: &[StateId]) -> RecView<'a> {
            match s {
                RecShape::Hole(j) => RecView::Leaf(assign[j.0 as usize - 1]),
                RecShape::Node(bs) => {
                    RecView::Node(bs.iter().map(|(l, c)| (l, rec(c, assign))).collect())
                }
                RecShape::Rec(v, body) => RecView::Rec(*v, Box::new(rec(body, assign))),
                RecShape::Var(v) => RecView::Var(*v),
            }
        }
        rec(&self.shape, &self.assignment)
    }

    /// Converts into a plain [`InputTree`]; `None` if recursion occurs.
    pub fn to_input_tree(&self) -> Option<InputTree> {
        fn rec(s: &RecShape) -> Option<InputContext> {
            match s {
                RecShape::Hole(j) => Some(InputContext::Hole(*j)),
                RecShape::Node(bs) => Some(InputContext::Node(
                    bs.iter()
                        .map(|(l, c)| rec(c).map(|c| (l.clone(), c)))
                        .collect::<Option<_>>()?,
                )),
                RecShape::Rec(..) | RecShape::Var(_) => None,
            }
        }
        Some(InputTree {
            context: rec(&self.shape)?,
            assignment: self.assignment.clone(),
        })
    }
}

/// Substitutes `replacement` for free occurrences of `var`, respecting
/// shadowing by inner binders of the same identifier.
fn substitute_var(s: &RecShape, var: VarId, replacement: &RecShape) -> RecShape {
    match s {
        RecShape::Hole(j) => RecShape::Hole(*j),
        RecShape::Node(bs) => RecShape::Node(
            bs.iter()
                .map(|(l, c)| (l.clone(), substitute_var(c, var, replacement)))
                .collect(),
        ),
        RecShape::Rec(v, body) => {
            if *v == var {
                s.clone()
            } else {
                RecShape::Rec(*v, Box::new(substitute_var(body, var, replacement)))
            }
        }
        RecShape::Var(v) => {
            if *v == var {
                replacement.clone()
            } else {
                s.clone()
            }
        }
    }
}

/// Rebuilds a raw shape (holes carrying indices into `old_assign`,
/// possibly duplicated or gapped) into canonical form.
fn canonicalize(shape: &RecShape, old_assign: &[StateId]) -> RecInputContext {
    let mut flat = Vec::new();
    fn collect(s: &RecShape, old: &[StateId], flat: &mut Vec<StateId>) {
        match s {
            RecShape::Hole(j) => flat.push(old[j.0 as usize - 1]),
            RecShape::Node(bs) => bs.iter().for_each(|(_, c)| collect(c, old, flat)),
            RecShape::Rec(_, body) => collect(body, old, flat),
            RecShape::Var(_) => {}
        }
    }
    collect(shape, old_assign, &mut flat);
    canonicalize_with(shape, &flat)
}

/// Canonicalizes a shape whose holes, read left-to-right, hold the
/// states of `flat_assign`: renumbers holes densely, renames variables
/// in binder preorder and drops unused binders.
fn canonicalize_with(shape: &RecShape, flat_assign: &[StateId]) -> RecInputContext {
    fn used_vars(s: &RecShape, scope: &mut Vec<VarId>, used: &mut BTreeSet<(usize, VarId)>) {
        match s {
            RecShape::Hole(_) => {}
            RecShape::Node(bs) => bs.iter().for_each(|(_, c)| used_vars(c, scope, used)),
            RecShape::Rec(v, body) => {
                scope.push(*v);
                used_vars(body, scope, used);
                scope.pop();
            }
            RecShape::Var(v) => {
                // Resolve to the innermost binder of this identifier.
                if let Some(depth) = scope.iter().rposition(|b| b == v) {
                    used.insert((depth, *v));
                }
            }
        }
    }
    struct Rebuild<'a> {
        flat: &'a [StateId],
        next_hole: u32,
        next_var: u32,
        assignment: Vec<StateId>,
        hole_cursor: usize,
    }
    fn rec(
        s: &RecShape,
        scope: &mut Vec<(VarId, Option<VarId>)>,
        used: &BTreeSet<(usize, VarId)>,
        st: &mut Rebuild<'_>,
    ) -> RecShape {
        match s {
            RecShape::Hole(_) => {
                st.next_hole += 1;
                st.assignment.push(st.flat[st.hole_cursor]);
                st.hole_cursor += 1;
                RecShape::Hole(HoleIx(st.next_hole))
            }
            RecShape::Node(bs) => RecShape::Node(
                bs.iter()
                    .map(|(l, c)| (l.clone(), rec(c, scope, used, st)))
                    .collect(),
            ),
            RecShape::Rec(v, body) => {
                let keep = used.contains(&(scope.len(), *v));
                let new = if keep {
                    let id = VarId(st.next_var);
                    st.next_var += 1;
                    Some(id)
                } else {
                    None
                };
                scope.push((*v, new));
                let body = rec(body, scope, used, st);
                scope.pop();
                match new {
                    Some(id) => RecShape::Rec(id, Box::new(body)),
                    None => body,
                }
            }
            RecShape::Var(v) => {
                let (_, new) = scope
                    .iter()
                    .rev()
                    .find(|(old, _)| old == v)
                    .expect("context is closed");
                RecShape::Var(new.expect("binder of a used variable is kept"))
            }
        }
    }
    let mut used = BTreeSet::new();
    used_vars(shape, &mut Vec::new(), &mut used);
    let mut st = Rebuild {
        flat: flat_assign,
        next_hole: 0,
        next_var: 0,
        assignment: Vec::new(),
        hole_cursor: 0,
    };
    let shape = rec(shape, &mut Vec::new(), &used, &mut st);
    RecInputContext {
        shape,
        assignment: st.assignment,
    }
}

impl fmt::Display for RecInputContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(s: &RecShape, assign: &[StateId], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match s {
                RecShape::Hole(j) => write!(f, "{}", assign[j.0 as usize - 1]),
                RecShape::Node(bs) => {
                    write!(f, "<")?;
                    for (i, (l, c)) in bs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{l}:")?;
                        rec(c, assign, f)?;
                    }
                    write!(f, ">")
                }
                RecShape::Rec(v, body) => {
                    write!(f, "rec {v}.")?;
                    rec(body, assign, f)
                }
                RecShape::Var(v) => write!(f, "{v}"),
            }
        }
        rec(&self.shape, &self.assignment, f)
    }
}

/// The receive-reachable region of `q`, folded into a recursive input
/// context: one node per input state on the current path (knot-tied on
/// revisit, which is what the binders express) and a hole per reached
/// output or end state. Total, and isomorphic to `intree(q)` whenever
/// the receive region is acyclic.
pub fn rec_intree(lts: &Lts, q: StateId) -> RecInputContext {
    fn walk(
        lts: &Lts,
        q: StateId,
        stack: &mut Vec<(StateId, VarId)>,
        used: &mut BTreeSet<VarId>,
        next_var: &mut u32,
        assignment: &mut Vec<StateId>,
    ) -> RecShape {
        if let Some((_, v)) = stack.iter().find(|(s, _)| *s == q) {
            used.insert(*v);
            return RecShape::Var(*v);
        }
        let ins = lts.input_transitions(q);
        if ins.is_empty() {
            assignment.push(q);
            return RecShape::Hole(HoleIx(assignment.len() as u32));
        }
        let v = VarId(*next_var);
        *next_var += 1;
        stack.push((q, v));
        let body = RecShape::Node(
            ins.into_iter()
                .map(|(l, q2)| (l, walk(lts, q2, stack, used, next_var, assignment)))
                .collect(),
        );
        stack.pop();
        if used.contains(&v) {
            RecShape::Rec(v, Box::new(body))
        } else {
            body
        }
    }
    let mut assignment = Vec::new();
    let mut used = BTreeSet::new();
    let shape = walk(lts, q, &mut Vec::new(), &mut used, &mut 0, &mut assignment);
    canonicalize_with(&shape, &assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::build_lts;
    use crate::types::parse;

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn lts_of(src: &str) -> Lts {
        build_lts(&parse(src).unwrap())
    }

    fn ideal_hospital_client() -> Lts {
        lts_of("rec X. +{nd; &{ko;X, ok;X}, pr; &{ko;X, ok;X}}")
    }

    fn satellite_client() -> Lts {
        lts_of("rec X.&{tm;X, over;rec Y.+{tc;Y, done;end}}")
    }

    fn two_leaf(l1: &str, q1: u32, l2: &str, q2: u32) -> InputTree {
        InputTree::branch(vec![
            (lab(l1), InputTree::bare(StateId(q1))),
            (lab(l2), InputTree::bare(StateId(q2))),
        ])
    }

    #[test]
    fn intree_of_ideal_client() {
        let lts = ideal_hospital_client();
        assert_eq!(intree(&lts, StateId(1)), Some(InputTree::bare(StateId(1))));
        let t2 = intree(&lts, StateId(2)).unwrap();
        assert_eq!(t2, two_leaf("ko", 1, "ok", 1));
        assert_eq!(t2.to_string(), "<ko:1,ok:1>");
        assert_eq!(
            t2.leaves(),
            vec![(HoleIx(1), StateId(1)), (HoleIx(2), StateId(1))]
        );
    }

    #[test]
    fn intree_undefined_on_input_cycle() {
        assert_eq!(intree(&satellite_client(), StateId(1)), None);
    }

    #[test]
    fn intree_leaves_fire_no_inputs() {
        let lts = ideal_hospital_client();
        for q in lts.states() {
            if let Some(t) = intree(&lts, q) {
                for (_, leaf) in t.leaves() {
                    assert!(lts.inputs(leaf).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn consume_picks_the_branch() {
        let t = two_leaf("ko", 2, "ok", 2);
        assert_eq!(t.consume(&lab("ko")).unwrap(), InputTree::bare(StateId(2)));
        assert_eq!(
            t.consume(&lab("nd")),
            Err(ConsumeError::LabelNotAtRoot(lab("nd")))
        );
        assert_eq!(
            InputTree::bare(StateId(1)).consume(&lab("ko")),
            Err(ConsumeError::RootIsHole)
        );
    }

    #[test]
    fn grow_replaces_holes_and_renumbers() {
        let acc = two_leaf("ko", 2, "ok", 2);
        let grown = InputTree::bare(StateId(2))
            .grow(&BTreeMap::from([(HoleIx(1), acc.clone())]))
            .unwrap();
        assert_eq!(grown, acc);

        let two_level = acc
            .grow(&BTreeMap::from([
                (HoleIx(1), acc.clone()),
                (HoleIx(2), acc.clone()),
            ]))
            .unwrap();
        assert_eq!(two_level.to_string(), "<ko:<ko:2,ok:2>,ok:<ko:2,ok:2>>");
        assert!(two_level.holes_are_canonical());
        assert_eq!(two_level.leaves().len(), 4);

        // Identity expansion.
        let q = InputTree::bare(StateId(5));
        assert_eq!(
            q.grow(&BTreeMap::from([(HoleIx(1), q.clone())])).unwrap(),
            q
        );

        assert_eq!(
            acc.grow(&BTreeMap::from([(HoleIx(1), q)])),
            Err(MissingExpansion(HoleIx(2)))
        );
    }

    #[test]
    fn grow_leaves_concatenate_in_order() {
        let a = two_leaf("a", 3, "b", 4);
        let b = InputTree::bare(StateId(5));
        let host = two_leaf("l", 1, "r", 2);
        let grown = host
            .grow(&BTreeMap::from([
                (HoleIx(1), a.clone()),
                (HoleIx(2), b.clone()),
            ]))
            .unwrap();
        let grown_states: Vec<StateId> = grown.leaves().into_iter().map(|(_, q)| q).collect();
        let expected: Vec<StateId> = a
            .leaves()
            .into_iter()
            .chain(b.leaves())
            .map(|(_, q)| q)
            .collect();
        assert_eq!(grown_states, expected);
    }

    #[test]
    fn subst_replaces_by_state() {
        let acc = two_leaf("ko", 2, "ok", 2);
        let g = BTreeMap::from([(StateId(2), acc.clone())]);
        assert_eq!(InputTree::bare(StateId(2)).subst(&g).unwrap(), acc);
        let two_level = acc.subst(&g).unwrap();
        assert_eq!(two_level.to_string(), "<ko:<ko:2,ok:2>,ok:<ko:2,ok:2>>");
        assert_eq!(
            acc.subst(&BTreeMap::new()),
            Err(MissingLeafState(StateId(2)))
        );
    }

    #[test]
    fn rec_intree_folds_the_satellite_input_loop() {
        let ctx = rec_intree(&satellite_client(), StateId(1));
        assert_eq!(ctx.to_string(), "rec X0.<tm:X0,over:2>");
        assert!(ctx.is_recursive());
        assert_eq!(ctx.leaves(), vec![(HoleIx(1), StateId(2))]);
        assert_eq!(ctx.root(), RecRoot::Branch(vec![lab("tm"), lab("over")]));
    }

    #[test]
    fn rec_intree_matches_intree_when_acyclic() {
        let lts = ideal_hospital_client();
        let ctx = rec_intree(&lts, StateId(2));
        assert!(!ctx.is_recursive());
        assert_eq!(ctx.to_input_tree().unwrap(), intree(&lts, StateId(2)).unwrap());
        assert_eq!(ctx.to_string(), "<ko:1,ok:1>");
    }

    #[test]
    fn rec_intree_of_terminal_state_is_bare() {
        let lts = satellite_client();
        let ctx = rec_intree(&lts, StateId(3));
        assert_eq!(ctx, RecInputContext::bare(StateId(3)));
    }

    #[test]
    fn consuming_the_loop_label_reproduces_the_context() {
        let ctx = rec_intree(&satellite_client(), StateId(1));
        assert_eq!(ctx.consume(&lab("tm")).unwrap(), ctx);
        let after_over = ctx.consume(&lab("over")).unwrap();
        assert_eq!(after_over, RecInputContext::bare(StateId(2)));
        assert_eq!(
            RecInputContext::bare(StateId(1)).consume(&lab("tm")),
            Err(ConsumeError::RootIsHole)
        );
    }

    #[test]
    fn graft_splices_contexts_into_holes() {
        let sat = satellite_client();
        let looped = rec_intree(&sat, StateId(1));
        let host = RecInputContext::bare(StateId(1));
        let grafted = host
            .graft(&BTreeMap::from([(HoleIx(1), looped.clone())]))
            .unwrap();
        assert_eq!(grafted, looped);
        // Grafting bare contexts is the identity.
        let same = looped
            .graft(&BTreeMap::from([(HoleIx(1), RecInputContext::bare(StateId(2)))]))
            .unwrap();
        assert_eq!(same, looped);
    }

    #[test]
    fn map_hole_states_steps_the_assignment() {
        let ctx = rec_intree(&satellite_client(), StateId(1));
        let stepped = ctx.map_hole_states(|_| StateId(3));
        assert_eq!(stepped.to_string(), "rec X0.<tm:X0,over:3>");
    }
}
