use super::{validate_game, GameBuilder, GameTree, Parent};
use crate::error::{Error, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Full tree; a node's info set pools the histories that differ only in the last action.
    Type1,
    /// Chance root with three equiprobable branches; odd players see everything,
    /// even players only their own past actions.
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub kind: GeneratorKind,
    pub players: usize,
    pub depth: usize,
    pub actions: usize,
    pub payoff_range: (i64, i64),
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(kind: GeneratorKind, players: usize, depth: usize, actions: usize, seed: u64) -> Self {
        GeneratorParams { kind, players, depth, actions, payoff_range: (-10, 10), seed }
    }
}

struct Gen<'a> {
    p: &'a GeneratorParams,
    b: GameBuilder,
    rng: ChaCha8Rng,
    next_id: usize,
    // per player: pooling key -> local label
    labels: Vec<HashMap<Vec<usize>, usize>>,
}

impl Gen<'_> {
    fn fresh_id(&mut self) -> String {
        self.next_id += 1;
        format!("n{}", self.next_id - 1)
    }

    fn infoset(&mut self, player: usize, key: Vec<usize>) -> usize {
        let next = self.labels[player].len() + 1;
        *self.labels[player].entry(key).or_insert(next)
    }

    fn leaf(&mut self, parent: Parent) -> Result<()> {
        let (lo, hi) = self.p.payoff_range;
        let u: Vec<f64> = (0..self.p.players).map(|_| self.rng.random_range(lo..=hi) as f64).collect();
        let id = self.fresh_id();
        self.b.leaf(0, &id, parent, u)?;
        Ok(())
    }

    /// `hist` is the full action history, `own` the per-player own-action sequences.
    fn grow(&mut self, parent: Parent, level: usize, hist: &mut Vec<usize>, own: &mut Vec<Vec<usize>>) -> Result<()> {
        if level == self.p.depth {
            return self.leaf(parent);
        }
        let player = level % self.p.players;
        let key = match self.p.kind {
            GeneratorKind::Type1 if hist.is_empty() => vec![],
            GeneratorKind::Type1 => {
                let mut k = vec![hist.len()];
                k.extend_from_slice(&hist[..hist.len() - 1]);
                k
            }
            GeneratorKind::Type2 if player % 2 == 0 => hist.clone(),
            GeneratorKind::Type2 => own[player].clone(),
        };
        let k = self.infoset(player, key);
        let actions: Vec<String> = (0..self.p.actions).map(|m| format!("i{k}a{}", m + 1)).collect();
        let id = self.fresh_id();
        self.b.decision(0, &id, parent, player, &k.to_string(), actions.clone())?;
        for (m, a) in actions.iter().enumerate() {
            hist.push(m);
            own[player].push(m);
            self.grow(Parent::Child { parent: &id, action: a }, level + 1, hist, own)?;
            own[player].pop();
            hist.pop();
        }
        Ok(())
    }
}

/// Random game of the given family, deterministic in the seed.
pub fn generate_random(p: &GeneratorParams) -> Result<GameTree> {
    if p.players < 2 {
        return Err(Error::InvalidParameter("need at least 2 players".into()));
    }
    if p.depth < p.players {
        return Err(Error::InvalidParameter(format!("depth {} below player count {}", p.depth, p.players)));
    }
    if p.actions < 2 {
        return Err(Error::InvalidParameter("need at least 2 actions".into()));
    }
    if p.payoff_range.0 > p.payoff_range.1 {
        return Err(Error::InvalidParameter("empty payoff range".into()));
    }
    let (name, chance) = match p.kind {
        GeneratorKind::Type1 => (format!("type1_n{}_d{}_a{}_s{}", p.players, p.depth, p.actions, p.seed), false),
        GeneratorKind::Type2 => (format!("type2_n{}_d{}_a{}_s{}", p.players, p.depth, p.actions, p.seed), true),
    };
    let mut gen = Gen {
        p,
        b: GameBuilder::new(&name, p.players, chance),
        rng: ChaCha8Rng::seed_from_u64(p.seed),
        next_id: 0,
        labels: vec![HashMap::new(); p.players],
    };
    let mut hist = Vec::new();
    let mut own = vec![Vec::new(); p.players];
    match p.kind {
        GeneratorKind::Type1 => gen.grow(Parent::Root, 0, &mut hist, &mut own)?,
        GeneratorKind::Type2 => {
            let id = gen.fresh_id();
            let acts: Vec<String> = (1..=3).map(|m| format!("c{m}")).collect();
            gen.b.chance(0, &id, Parent::Root, vec![1.0 / 3.0; 3], acts.clone())?;
            for (m, a) in acts.iter().enumerate() {
                hist.push(m);
                gen.grow(Parent::Child { parent: &id, action: a }, 0, &mut hist, &mut own)?;
                hist.pop();
            }
        }
    }
    let g = gen.b.finish()?;
    let report = validate_game(&g);
    if let Some(v) = report.violations.first() {
        return Err(Error::Construction(v.infoset.clone()));
    }
    Ok(g)
}
