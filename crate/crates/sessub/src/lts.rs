//! Labelled transition systems derived from session types.
//!
//! `build_lts` turns a well-formed session type into the finite LTS
//! whose states are the terms reachable under the derivation rules:
//! an internal choice fires `!l` into the chosen continuation, an
//! external choice fires `?l`, and a recursion performs the transitions
//! of its unfolding. States are identified up to syntactic equality of
//! the head-unfolded term, so a `rec` term and its unfolding are the
//! same state. State numbers follow breadth-first discovery order
//! starting at 1, which matches the numbering used in rendered graphs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::types::{Label, SessionType};

/// Identifier of an LTS state (1-based, breadth-first discovery order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Direction of a transition label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// Output, written `!`.
    Send,
    /// Input, written `?`.
    Receive,
}

impl Polarity {
    pub fn symbol(self) -> char {
        match self {
            Polarity::Send => '!',
            Polarity::Receive => '?',
        }
    }
}

/// A transition label: polarity plus message label, e.g. `!ok` or `?nd`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub polarity: Polarity,
    pub label: Label,
}

impl Action {
    pub fn send(label: Label) -> Self {
        Action {
            polarity: Polarity::Send,
            label,
        }
    }

    pub fn receive(label: Label) -> Self {
        Action {
            polarity: Polarity::Receive,
            label,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.polarity.symbol(), self.label)
    }
}

/// Error for state identifiers that do not belong to the queried LTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unknown state {0} (this LTS has states 1..={1})")]
pub struct UnknownState(pub StateId, pub usize);

/// A finite LTS of a session type.
///
/// Invariants guaranteed by construction: transitions are deterministic
/// (no two share source and action), every state fires either only
/// inputs or only outputs, and a state with no outgoing transitions
/// denotes `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    /// Outgoing transitions per state, in derivation (source) order.
    transitions: Vec<Vec<(Action, StateId)>>,
    /// The session-type term each state denotes (first-discovered form).
    terms: Vec<SessionType>,
}

impl Lts {
    /// The initial state; always 1 by construction.
    pub fn initial(&self) -> StateId {
        StateId(1)
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (1..=self.transitions.len() as u32).map(StateId)
    }

    fn index(&self, q: StateId) -> Result<usize, UnknownState> {
        let i = q.0 as usize;
        if i >= 1 && i <= self.transitions.len() {
            Ok(i - 1)
        } else {
            Err(UnknownState(q, self.transitions.len()))
        }
    }

    /// Outgoing transitions of `q` in derivation order.
    ///
    /// Panics if `q` is not a state of this LTS; use [`Lts::inputs`] /
    /// [`Lts::outputs`] for validated access.
    pub fn transitions_from(&self, q: StateId) -> &[(Action, StateId)] {
        &self.transitions[q.0 as usize - 1]
    }

    /// The target of the unique transition `q --act--> q'`, if any.
    pub fn successor(&self, q: StateId, action: &Action) -> Option<StateId> {
        self.transitions_from(q)
            .iter()
            .find(|(a, _)| a == action)
            .map(|(_, t)| *t)
    }

    /// Labels fireable as inputs from `q`.
    pub fn inputs(&self, q: StateId) -> Result<BTreeSet<Label>, UnknownState> {
        let i = self.index(q)?;
        Ok(self.transitions[i]
            .iter()
            .filter(|(a, _)| a.polarity == Polarity::Receive)
            .map(|(a, _)| a.label.clone())
            .collect())
    }

    /// Labels fireable as outputs from `q`.
    pub fn outputs(&self, q: StateId) -> Result<BTreeSet<Label>, UnknownState> {
        let i = self.index(q)?;
        Ok(self.transitions[i]
            .iter()
            .filter(|(a, _)| a.polarity == Polarity::Send)
            .map(|(a, _)| a.label.clone())
            .collect())
    }

    /// Input transitions of `q` as `(label, target)` pairs in source order.
    pub fn input_transitions(&self, q: StateId) -> Vec<(Label, StateId)> {
        self.polar_transitions(q, Polarity::Receive)
    }

    /// Output transitions of `q` as `(label, target)` pairs in source order.
    pub fn output_transitions(&self, q: StateId) -> Vec<(Label, StateId)> {
        self.polar_transitions(q, Polarity::Send)
    }

    fn polar_transitions(&self, q: StateId, polarity: Polarity) -> Vec<(Label, StateId)> {
        self.transitions_from(q)
            .iter()
            .filter(|(a, _)| a.polarity == polarity)
            .map(|(a, t)| (a.label.clone(), *t))
            .collect()
    }

    /// True iff `q` is a termination state (no outgoing transitions).
    pub fn is_end(&self, q: StateId) -> Result<bool, UnknownState> {
        let i = self.index(q)?;
        Ok(self.transitions[i].is_empty())
    }

    /// True iff from `q`, using only transitions of `polarity`, a state
    /// lying on a same-polarity cycle is reachable (`q` itself may be
    /// that state and the access path may be empty).
    pub fn has_cycle(&self, polarity: Polarity, q: StateId) -> Result<bool, UnknownState> {
        self.index(q)?;
        // Reachable region under the restricted transition relation.
        let mut reach = BTreeSet::new();
        let mut frontier = vec![q];
        while let Some(s) = frontier.pop() {
            if !reach.insert(s) {
                continue;
            }
            for (a, t) in self.transitions_from(s) {
                if a.polarity == polarity {
                    frontier.push(*t);
                }
            }
        }
        // Colour DFS within the region: a back edge closes a cycle.
        #[derive(Clone, Copy, PartialEq)]
        enum Colour {
            White,
            Gray,
            Black,
        }
        let mut colour: HashMap<StateId, Colour> =
            reach.iter().map(|&s| (s, Colour::White)).collect();
        let succs = |s: StateId| -> Vec<StateId> {
            self.transitions_from(s)
                .iter()
                .filter(|(a, _)| a.polarity == polarity)
                .map(|(_, t)| *t)
                .collect()
        };
        for &start in &reach {
            if colour[&start] != Colour::White {
                continue;
            }
            // Stack of (state, index of the next successor to visit).
            let mut stack = vec![(start, 0usize)];
            colour.insert(start, Colour::Gray);
            while let Some(&(s, next)) = stack.last() {
                let ss = succs(s);
                if next < ss.len() {
                    stack.last_mut().expect("nonempty").1 += 1;
                    let t = ss[next];
                    match colour[&t] {
                        Colour::Gray => return Ok(true),
                        Colour::White => {
                            colour.insert(t, Colour::Gray);
                            stack.push((t, 0));
                        }
                        Colour::Black => {}
                    }
                } else {
                    colour.insert(s, Colour::Black);
                    stack.pop();
                }
            }
        }
        Ok(false)
    }

    /// The session-type term denoted by `q`.
    pub fn term(&self, q: StateId) -> &SessionType {
        &self.terms[q.0 as usize - 1]
    }

    /// The same transition structure with `!` and `?` swapped and the
    /// state terms dualized; equals the LTS of the dual type.
    pub fn polarity_flip(&self) -> Lts {
        Lts {
            transitions: self
                .transitions
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|(a, t)| {
                            let polarity = match a.polarity {
                                Polarity::Send => Polarity::Receive,
                                Polarity::Receive => Polarity::Send,
                            };
                            (
                                Action {
                                    polarity,
                                    label: a.label.clone(),
                                },
                                *t,
                            )
                        })
                        .collect()
                })
                .collect(),
            terms: self.terms.iter().map(|t| t.dual()).collect(),
        }
    }
}

/// Repeatedly unfolds leading `rec` binders until the head constructor
/// is a choice or `end`. Guardedness bounds the number of unfoldings.
pub(crate) fn unfold_to_head(mut t: SessionType) -> SessionType {
    let mut fuel = 10_000u32;
    while let SessionType::Rec(x, body) = t {
        let rec = SessionType::Rec(x.clone(), body.clone());
        t = body.substitute(&x, &rec);
        fuel -= 1;
        assert!(fuel > 0, "unbounded unfolding: type is not guarded");
    }
    debug_assert!(
        !matches!(t, SessionType::Var(_)),
        "free variable at head: type is not closed"
    );
    t
}

/// Builds the LTS of a well-formed session type. States are discovered
/// breadth-first from the initial term and numbered from 1.
pub fn build_lts(t: &SessionType) -> Lts {
    let mut ids: HashMap<SessionType, usize> = HashMap::new();
    let mut terms: Vec<SessionType> = Vec::new();
    let mut keys: Vec<SessionType> = Vec::new();
    let mut transitions: Vec<Vec<(Action, StateId)>> = Vec::new();
    let mut queue = VecDeque::new();

    let key0 = unfold_to_head(t.clone());
    ids.insert(key0.clone(), 0);
    terms.push(t.clone());
    keys.push(key0);
    queue.push_back(0usize);

    while let Some(i) = queue.pop_front() {
        let derived: Vec<(Action, SessionType)> = match &keys[i] {
            SessionType::Select(bs) => bs
                .iter()
                .map(|(l, cont)| (Action::send(l.clone()), cont.clone()))
                .collect(),
            SessionType::Branch(bs) => bs
                .iter()
                .map(|(l, cont)| (Action::receive(l.clone()), cont.clone()))
                .collect(),
            SessionType::End => Vec::new(),
            other => unreachable!("head-unfolded term cannot be {other:?}"),
        };
        let mut row = Vec::with_capacity(derived.len());
        for (action, cont) in derived {
            let key = unfold_to_head(cont.clone());
            let j = match ids.get(&key) {
                Some(&j) => j,
                None => {
                    let j = terms.len();
                    ids.insert(key.clone(), j);
                    terms.push(cont);
                    keys.push(key);
                    queue.push_back(j);
                    j
                }
            };
            row.push((action, StateId(j as u32 + 1)));
        }
        // Breadth-first expansion visits states in id order, so rows
        // line up with state indices.
        debug_assert_eq!(transitions.len(), i);
        transitions.push(row);
    }

    Lts { transitions, terms }
}
