//! Extensive-form game trees: representation, the EFT text format, perfect
//! recall validation and random generators.

mod eft;
mod generate;

pub use eft::{parse_game, serialize_game};
pub use generate::{generate_random, GeneratorKind, GeneratorParams};

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NodeKind {
    /// Decision node of strategic player `player` (0-based) in global info set `infoset`.
    Decision { player: usize, infoset: usize },
    Chance { probs: Vec<f64> },
    Terminal { payoffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: String,
    pub parent: Option<usize>,
    /// Index of the action at `parent` leading here.
    pub action: Option<usize>,
    pub kind: NodeKind,
    pub actions: Vec<String>,
    pub children: Vec<usize>,
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoSet {
    pub player: usize,
    /// Label `k` of the `<player>.<k>` token.
    pub label: String,
    /// Position among the owner's info sets.
    pub local: usize,
    pub actions: Vec<String>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTree {
    pub name: String,
    pub num_players: usize,
    pub has_chance: bool,
    pub nodes: Vec<Node>,
    /// Global info set list in first-node order.
    pub infosets: Vec<InfoSet>,
    /// Per player, global info set indices in local order.
    pub player_infosets: Vec<Vec<usize>>,
    pub root: usize,
}

impl GameTree {
    pub fn infoset_name(&self, j: usize) -> String {
        let s = &self.infosets[j];
        format!("{}.{}", s.player + 1, s.label)
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    /// Σ over info sets of the action counts.
    pub fn num_sequences_nonroot(&self) -> usize {
        self.infosets.iter().map(|s| s.actions.len()).sum()
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            for &c in &self.nodes[v].children {
                stack.push((c, d + 1));
            }
        }
        best
    }

    pub fn max_abs_payoff(&self) -> f64 {
        let mut m: f64 = 0.0;
        for n in &self.nodes {
            if let NodeKind::Terminal { payoffs } = &n.kind {
                for u in payoffs {
                    m = m.max(u.abs());
                }
            }
        }
        m
    }

    /// Node indices in depth-first preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Path of (node, action) pairs from the root down to `v` (exclusive).
    pub fn path_to(&self, v: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        let mut cur = v;
        while let (Some(p), Some(a)) = (self.nodes[cur].parent, self.nodes[cur].action) {
            path.push((p, a));
            cur = p;
        }
        path.reverse();
        path
    }

    /// Own (info set, action) pairs of `player` along the path to `v`.
    pub fn experience(&self, player: usize, v: usize) -> Vec<(usize, usize)> {
        self.path_to(v)
            .into_iter()
            .filter_map(|(h, a)| match self.nodes[h].kind {
                NodeKind::Decision { player: p, infoset } if p == player => Some((infoset, a)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallViolation {
    pub player: usize,
    pub infoset: String,
    pub nodes: (String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub perfect_recall: bool,
    pub violations: Vec<RecallViolation>,
    pub m0: usize,
    pub n0: usize,
    pub depth: usize,
    pub sequence_counts: Vec<usize>,
}

pub fn validate_game(g: &GameTree) -> ValidationReport {
    let mut violations = Vec::new();
    for (j, s) in g.infosets.iter().enumerate() {
        let first = s.nodes[0];
        let rec = g.experience(s.player, first);
        for &other in &s.nodes[1..] {
            if g.experience(s.player, other) != rec {
                violations.push(RecallViolation {
                    player: s.player + 1,
                    infoset: g.infoset_name(j),
                    nodes: (g.nodes[first].id.clone(), g.nodes[other].id.clone()),
                });
            }
        }
    }
    let sequence_counts = g
        .player_infosets
        .iter()
        .map(|js| 1 + js.iter().map(|&j| g.infosets[j].actions.len()).sum::<usize>())
        .collect();
    ValidationReport {
        perfect_recall: violations.is_empty(),
        violations,
        m0: g.num_infosets(),
        n0: g.num_sequences_nonroot(),
        depth: g.depth(),
        sequence_counts,
    }
}

const NO_CHILD: usize = usize::MAX;

/// Incremental tree construction shared by the parser and the generators.
/// Nodes must be added parents first.
pub(crate) struct GameBuilder {
    name: String,
    num_players: usize,
    has_chance: bool,
    nodes: Vec<Node>,
    ids: HashMap<String, usize>,
    infosets: Vec<InfoSet>,
    infoset_ids: HashMap<(usize, String), usize>,
    player_infosets: Vec<Vec<usize>>,
}

pub(crate) enum Parent<'a> {
    Root,
    Child { parent: &'a str, action: &'a str },
}

impl GameBuilder {
    pub fn new(name: &str, num_players: usize, has_chance: bool) -> Self {
        GameBuilder {
            name: name.to_string(),
            num_players,
            has_chance,
            nodes: Vec::new(),
            ids: HashMap::new(),
            infosets: Vec::new(),
            infoset_ids: HashMap::new(),
            player_infosets: vec![Vec::new(); num_players],
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    fn attach(&mut self, line: usize, id: &str, parent: Parent, kind: NodeKind, actions: Vec<String>) -> Result<usize> {
        if self.ids.contains_key(id) {
            return Err(Error::DuplicateNode { line, id: id.to_string() });
        }
        for (k, a) in actions.iter().enumerate() {
            if actions[..k].contains(a) {
                return Err(Error::InvalidGame(format!("line {line}: duplicate action `{a}` at node `{id}`")));
            }
        }
        let idx = self.nodes.len();
        let (par, act) = match parent {
            Parent::Root => {
                if !self.nodes.is_empty() {
                    return Err(Error::InvalidGame(format!("line {line}: second root node `{id}`")));
                }
                (None, None)
            }
            Parent::Child { parent, action } => {
                let p = *self.ids.get(parent).ok_or_else(|| Error::DanglingParent {
                    line,
                    parent: parent.to_string(),
                })?;
                let pn = &self.nodes[p];
                let a = pn.actions.iter().position(|x| x == action).ok_or_else(|| {
                    Error::InvalidGame(format!("line {line}: node `{}` has no action `{action}`", pn.id))
                })?;
                if pn.children[a] != NO_CHILD {
                    return Err(Error::InvalidGame(format!(
                        "line {line}: action `{action}` of node `{}` already has a child",
                        pn.id
                    )));
                }
                self.nodes[p].children[a] = idx;
                (Some(p), Some(a))
            }
        };
        let children = vec![NO_CHILD; actions.len()];
        self.nodes.push(Node { id: id.to_string(), parent: par, action: act, kind, actions, children });
        self.ids.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn decision(&mut self, line: usize, id: &str, parent: Parent, player: usize, infoset: &str, actions: Vec<String>) -> Result<usize> {
        if player >= self.num_players {
            return Err(Error::InvalidGame(format!("line {line}: player {} out of range", player + 1)));
        }
        if actions.is_empty() {
            return Err(Error::InvalidGame(format!("line {line}: decision node `{id}` has no actions")));
        }
        let key = (player, infoset.to_string());
        let j = match self.infoset_ids.get(&key) {
            Some(&j) => {
                if self.infosets[j].actions != actions {
                    return Err(Error::ActionMismatch { line, infoset: format!("{}.{}", player + 1, infoset) });
                }
                j
            }
            None => {
                let j = self.infosets.len();
                let local = self.player_infosets[player].len();
                self.infosets.push(InfoSet {
                    player,
                    label: infoset.to_string(),
                    local,
                    actions: actions.clone(),
                    nodes: Vec::new(),
                });
                self.player_infosets[player].push(j);
                self.infoset_ids.insert(key, j);
                j
            }
        };
        let v = self.attach(line, id, parent, NodeKind::Decision { player, infoset: j }, actions)?;
        self.infosets[j].nodes.push(v);
        Ok(v)
    }

    pub fn chance(&mut self, line: usize, id: &str, parent: Parent, probs: Vec<f64>, actions: Vec<String>) -> Result<usize> {
        if !self.has_chance {
            return Err(Error::InvalidGame(format!("line {line}: chance node but header lacks `chance`")));
        }
        if probs.len() != actions.len() || actions.is_empty() {
            return Err(Error::InvalidGame(format!(
                "line {line}: {} probabilities for {} actions",
                probs.len(),
                actions.len()
            )));
        }
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidGame(format!("line {line}: chance probabilities must be positive")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::ProbabilitySum { line, sum });
        }
        self.attach(line, id, parent, NodeKind::Chance { probs }, actions)
    }

    pub fn leaf(&mut self, line: usize, id: &str, parent: Parent, payoffs: Vec<f64>) -> Result<usize> {
        if payoffs.len() != self.num_players {
            return Err(Error::PayoffArity { line, found: payoffs.len(), expected: self.num_players });
        }
        self.attach(line, id, parent, NodeKind::Terminal { payoffs }, Vec::new())
    }

    pub fn finish(self) -> Result<GameTree> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidGame("game has no nodes".into()));
        }
        for n in &self.nodes {
            if let Some(a) = n.children.iter().position(|&c| c == NO_CHILD) {
                return Err(Error::InvalidGame(format!("node `{}` has no child for action `{}`", n.id, n.actions[a])));
            }
        }
        Ok(GameTree {
            name: self.name,
            num_players: self.num_players,
            has_chance: self.has_chance,
            nodes: self.nodes,
            infosets: self.infosets,
            player_infosets: self.player_infosets,
            root: 0,
        })
    }
}
