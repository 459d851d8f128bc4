use super::{GameBuilder, GameTree, NodeKind, Parent};
use crate::error::{Error, Result};
use std::fmt::Write;

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let body = match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &body[s..k], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &body[s..], col: s + 1 });
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn parse_list(line: usize, tok: &Tok) -> Result<Vec<String>> {
    let items: Vec<String> = tok.text.split(',').map(str::to_string).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(syntax(line, tok.col, format!("malformed list `{}`", tok.text)));
    }
    Ok(items)
}

fn parse_numbers(line: usize, tok: &Tok) -> Result<Vec<f64>> {
    parse_list(line, tok)?
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(syntax(line, tok.col, format!("invalid number `{s}`"))),
        })
        .collect()
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Parse a game in the EFT line format.
pub fn parse_game(text: &str) -> Result<GameTree> {
    let mut builder: Option<GameBuilder> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let head = toks[0].text;
        let Some(b) = builder.as_mut() else {
            if head != "game" {
                return Err(syntax(line, toks[0].col, "expected `game` header"));
            }
            builder = Some(parse_header(line, &toks)?);
            continue;
        };
        match head {
            "node" | "leaf" => parse_node(b, line, &toks)?,
            "game" => return Err(syntax(line, toks[0].col, "duplicate `game` header")),
            _ => return Err(syntax(line, toks[0].col, format!("unknown record `{head}`"))),
        }
    }
    match builder {
        Some(b) => b.finish(),
        None => Err(syntax(1, 1, "missing `game` header")),
    }
}

fn parse_header(line: usize, toks: &[Tok]) -> Result<GameBuilder> {
    if toks.len() < 4 || toks[2].text != "players" {
        let col = toks.get(2).map_or(toks[0].col, |t| t.col);
        return Err(syntax(line, col, "expected `game <name> players <n> [chance]`"));
    }
    let n: usize = toks[3]
        .text
        .parse()
        .map_err(|_| syntax(line, toks[3].col, "player count must be a positive integer"))?;
    if n == 0 {
        return Err(syntax(line, toks[3].col, "player count must be a positive integer"));
    }
    let chance = match toks.get(4) {
        None => false,
        Some(t) if t.text == "chance" => true,
        Some(t) => return Err(syntax(line, t.col, format!("unexpected token `{}`", t.text))),
    };
    if let Some(t) = toks.get(5) {
        return Err(syntax(line, t.col, format!("unexpected token `{}`", t.text)));
    }
    Ok(GameBuilder::new(toks[1].text, n, chance))
}

fn parse_node(b: &mut GameBuilder, line: usize, toks: &[Tok]) -> Result<()> {
    let is_leaf = toks[0].text == "leaf";
    let id = toks
        .get(1)
        .ok_or_else(|| syntax(line, toks[0].col + toks[0].text.len(), "missing node id"))?;
    if !is_ident(id.text) || id.text == "-" {
        return Err(syntax(line, id.col, format!("invalid node id `{}`", id.text)));
    }
    let allowed: &[&str] = if is_leaf {
        &["parent", "action", "payoffs"]
    } else {
        &["parent", "action", "owner", "infoset", "actions", "probs"]
    };
    let mut fields: Vec<(&str, &Tok)> = Vec::new();
    let mut k = 2;
    while k < toks.len() {
        let key = &toks[k];
        if !allowed.contains(&key.text) {
            return Err(syntax(line, key.col, format!("unexpected key `{}`", key.text)));
        }
        if fields.iter().any(|(f, _)| *f == key.text) {
            return Err(syntax(line, key.col, format!("repeated key `{}`", key.text)));
        }
        let val = toks
            .get(k + 1)
            .ok_or_else(|| syntax(line, key.col + key.text.len(), format!("missing value for `{}`", key.text)))?;
        fields.push((key.text, val));
        k += 2;
    }
    let end_col = toks.last().map_or(1, |t| t.col + t.text.len());
    let get = |name: &str| fields.iter().find(|(f, _)| *f == name).map(|(_, t)| *t);
    let need = |name: &str| get(name).ok_or_else(|| syntax(line, end_col, format!("missing `{name}`")));

    let ptok = need("parent")?;
    let atok = need("action")?;
    let parent = match (ptok.text, atok.text) {
        ("-", "-") => Parent::Root,
        ("-", _) => return Err(syntax(line, atok.col, "root node must have action `-`")),
        (_, "-") => return Err(syntax(line, atok.col, "non-root node needs an action label")),
        (p, a) => Parent::Child { parent: p, action: a },
    };

    if is_leaf {
        let payoffs = parse_numbers(line, need("payoffs")?)?;
        b.leaf(line, id.text, parent, payoffs)?;
        return Ok(());
    }
    let otok = need("owner")?;
    let actions = parse_list(line, need("actions")?)?;
    if otok.text == "c" {
        if let Some(t) = get("infoset") {
            return Err(syntax(line, t.col, "chance nodes have no info set"));
        }
        let probs = parse_numbers(line, need("probs")?)?;
        b.chance(line, id.text, parent, probs, actions)?;
    } else {
        if let Some(t) = get("probs") {
            return Err(syntax(line, t.col, "only chance nodes carry probabilities"));
        }
        let owner: usize = otok
            .text
            .parse()
            .ok()
            .filter(|&p| p >= 1 && p <= b.num_players())
            .ok_or_else(|| syntax(line, otok.col, format!("invalid owner `{}`", otok.text)))?;
        let itok = need("infoset")?;
        let (pl, label) = itok
            .text
            .split_once('.')
            .filter(|(_, l)| !l.is_empty())
            .ok_or_else(|| syntax(line, itok.col, "info set must be `<player>.<k>`"))?;
        if pl.parse::<usize>().ok() != Some(owner) {
            return Err(syntax(line, itok.col, "info set player differs from owner"));
        }
        b.decision(line, id.text, parent, owner - 1, label, actions)?;
    }
    Ok(())
}

/// Emit the game in EFT format, nodes in depth-first preorder.
pub fn serialize_game(g: &GameTree) -> String {
    let mut out = String::new();
    let _ = write!(out, "game {} players {}", g.name, g.num_players);
    if g.has_chance {
        out.push_str(" chance");
    }
    out.push('\n');
    let join = |xs: &[f64]| xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    for v in g.preorder() {
        let n = &g.nodes[v];
        let (p, a) = match (n.parent, n.action) {
            (Some(p), Some(a)) => (g.nodes[p].id.as_str(), g.nodes[p].actions[a].as_str()),
            _ => ("-", "-"),
        };
        match &n.kind {
            NodeKind::Decision { player, infoset } => {
                let _ = writeln!(
                    out,
                    "node {} parent {p} action {a} owner {} infoset {}.{} actions {}",
                    n.id,
                    player + 1,
                    player + 1,
                    g.infosets[*infoset].label,
                    n.actions.join(",")
                );
            }
            NodeKind::Chance { probs } => {
                let _ = writeln!(
                    out,
                    "node {} parent {p} action {a} owner c probs {} actions {}",
                    n.id,
                    join(probs),
                    n.actions.join(",")
                );
            }
            NodeKind::Terminal { payoffs } => {
                let _ = writeln!(out, "leaf {} parent {p} action {a} payoffs {}", n.id, join(payoffs));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn roundtrip_fixtures() {
        for g in [fixtures::fig1(), fixtures::fig2(), fixtures::fig3()] {
            let s = serialize_game(&g);
            let h = parse_game(&s).unwrap();
            assert_eq!(serialize_game(&h), s);
        }
    }

    #[test]
    fn action_mismatch() {
        let text = "game m players 2\n\
            node r parent - action - owner 1 infoset 1.1 actions x,y\n\
            node u parent r action x owner 2 infoset 2.1 actions a,b\n\
            node v parent r action y owner 2 infoset 2.1 actions a,c\n";
        assert!(matches!(parse_game(text), Err(Error::ActionMismatch { line: 4, .. })));
    }

    #[test]
    fn error_kinds() {
        let dangling = "game d players 1\nnode r parent - action - owner 1 infoset 1.1 actions a\nleaf z parent q action a payoffs 1\n";
        assert!(matches!(parse_game(dangling), Err(Error::DanglingParent { line: 3, .. })));
        let dup = "game d players 1\nnode r parent - action - owner 1 infoset 1.1 actions a,b\nleaf z parent r action a payoffs 1\nleaf z parent r action b payoffs 1\n";
        assert!(matches!(parse_game(dup), Err(Error::DuplicateNode { line: 4, .. })));
        let probs = "game p players 1 chance\nnode r parent - action - owner c probs 0.5,0.4 actions a,b\n";
        assert!(matches!(parse_game(probs), Err(Error::ProbabilitySum { line: 2, .. })));
        let arity = "game a players 2\nleaf r parent - action - payoffs 1\n";
        assert!(matches!(parse_game(arity), Err(Error::PayoffArity { line: 2, found: 1, expected: 2 })));
        let bad = "game s players 1\nnode r parent - action - owner 1 infoset 1.1 actoins a\n";
        match parse_game(bad) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 46)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\ngame c players 1 # trailing\n  leaf r parent - action - payoffs 3 # x\n";
        let g = parse_game(text).unwrap();
        assert_eq!(serialize_game(&g), "game c players 1\nleaf r parent - action - payoffs 3\n");
    }
}
