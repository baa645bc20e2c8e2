//! Environment model: features of interest (FoIs), their arities, the
//! co-activation graph, the entry point and the occupancy bound Ω.
//!
//! Two text formats live here. The environment config is line oriented:
//!
//! ```text
//! # living room
//! omega 4
//! foi door   1 1   entry
//! foi couch  1 3
//! foi motion 1 inf
//! edge couch motion
//! ```
//!
//! The activation dataset holds one tick per line, one `0`/`1` field per FoI
//! in declaration order, and an optional trailing ground-truth count.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest Ω the solver supports; person sets are 64-bit masks.
pub const MAX_OMEGA: u32 = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate FoI id `{id}`")]
    DuplicateFoi { line: usize, id: String },
    #[error("no entry point declared")]
    NoEntry,
    #[error("multiple entry points: `{first}` and `{second}`")]
    MultipleEntries { first: String, second: String },
    #[error("line {line}: edge references unknown FoI `{id}`")]
    UnknownEdgeEndpoint { line: usize, id: String },
    #[error("line {line}: self-loop on `{id}`")]
    SelfLoop { line: usize, id: String },
    #[error("line {line}: arity min {min} exceeds max {max}")]
    MinExceedsMax { line: usize, min: u32, max: u32 },
    #[error("FoI `{id}`: arity min {min} exceeds omega {omega}")]
    MinExceedsOmega { id: String, min: u32, omega: u32 },
    #[error("omega missing")]
    MissingOmega,
    #[error("omega must be in 1..={MAX_OMEGA}, got {0}")]
    OmegaOutOfRange(u32),
    #[error("environment declares no FoI")]
    Empty,
    #[error("unknown FoI `{0}`")]
    UnknownFoi(String),
    #[error("line {line}: expected {expected} sensor fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: sensor field `{field}` is not 0 or 1")]
    NonBinary { line: usize, field: String },
    #[error("line {line}: label {label} outside [0, {omega}]")]
    LabelOutOfRange { line: usize, label: u32, omega: u32 },
}

/// Interval of person counts that can activate a FoI at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub min: u32,
    /// `None` is unbounded (`inf` in configs).
    pub max: Option<u32>,
}

impl Arity {
    pub fn new(min: u32, max: Option<u32>) -> Option<Self> {
        if min == 0 || max.is_some_and(|m| m < min) {
            return None;
        }
        Some(Self { min, max })
    }

    pub fn bounded(min: u32, max: u32) -> Option<Self> {
        Self::new(min, Some(max))
    }

    pub fn unbounded(min: u32) -> Option<Self> {
        Self::new(min, None)
    }

    /// `[min, max]` with `max` clamped to Ω.
    pub fn clamped(&self, omega: u32) -> (u32, u32) {
        let max = self.max.map_or(omega, |m| m.min(omega));
        (self.min, max)
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(m) => write!(f, "{} {}", self.min, m),
            None => write!(f, "{} inf", self.min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Foi {
    pub id: String,
    pub arity: Arity,
    pub is_entry: bool,
}

/// Undirected co-activation graph over FoI indices.
///
/// Edges are stored as ordered pairs `(lo, hi)`, so symmetry holds by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoActivationGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CoActivationGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Returns false for self-loops and out-of-range endpoints.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b || a >= self.n || b >= self.n {
            return false;
        }
        self.edges.insert((a.min(b), a.max(b)));
        true
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, a: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(x, y)| {
                if x == a {
                    Some(y)
                } else if y == a {
                    Some(x)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }
}

/// A validated monitored environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentModel {
    fois: Vec<Foi>,
    cg: CoActivationGraph,
    omega: u32,
    entry: usize,
    index: HashMap<String, usize>,
}

impl EnvironmentModel {
    /// Builds a model from parts, enforcing every invariant the config
    /// parser enforces.
    pub fn new(fois: Vec<Foi>, edges: &[(&str, &str)], omega: u32) -> Result<Self, EnvError> {
        let mut b = Builder {
            omega: Some(omega),
            ..Default::default()
        };
        for foi in fois {
            b.add_foi(0, foi)?;
        }
        for (a, c) in edges {
            b.edges.push((0, a.to_string(), c.to_string()));
        }
        b.finish()
    }

    pub fn fois(&self) -> &[Foi] {
        &self.fois
    }

    pub fn len(&self) -> usize {
        self.fois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fois.is_empty()
    }

    pub fn cg(&self) -> &CoActivationGraph {
        &self.cg
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn entry_index(&self) -> usize {
        self.entry
    }

    pub fn entry(&self) -> &Foi {
        &self.fois[self.entry]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Arity of FoI `i` with `max` clamped to Ω.
    pub fn effective_arity(&self, i: usize) -> (u32, u32) {
        self.fois[i].arity.clamped(self.omega)
    }

    /// Neighbors of a FoI in the co-activation graph, by id.
    pub fn neighbors(&self, id: &str) -> Result<BTreeSet<&str>, EnvError> {
        let i = self
            .index_of(id)
            .ok_or_else(|| EnvError::UnknownFoi(id.into()))?;
        Ok(self
            .cg
            .neighbors(i)
            .into_iter()
            .map(|j| self.fois[j].id.as_str())
            .collect())
    }

    /// Same environment with a different person bound.
    pub fn with_omega(&self, omega: u32) -> Result<Self, EnvError> {
        let edges: Vec<(String, String)> = self
            .cg
            .edges()
            .map(|(a, b)| (self.fois[a].id.clone(), self.fois[b].id.clone()))
            .collect();
        let refs: Vec<(&str, &str)> = edges
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        Self::new(self.fois.clone(), &refs, omega)
    }

    /// Renders the model in config syntax; parsing the result yields an equal model.
    pub fn to_config(&self) -> String {
        let mut out = format!("omega {}\n", self.omega);
        for foi in &self.fois {
            out.push_str(&format!("foi {} {}", foi.id, foi.arity));
            if foi.is_entry {
                out.push_str(" entry");
            }
            out.push('\n');
        }
        for (a, b) in self.cg.edges() {
            out.push_str(&format!("edge {} {}\n", self.fois[a].id, self.fois[b].id));
        }
        out
    }
}

impl FromStr for EnvironmentModel {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_environment(s)
    }
}

#[derive(Default)]
struct Builder {
    omega: Option<u32>,
    fois: Vec<Foi>,
    lines: Vec<usize>,
    edges: Vec<(usize, String, String)>,
}

impl Builder {
    fn add_foi(&mut self, line: usize, foi: Foi) -> Result<(), EnvError> {
        if self.fois.iter().any(|f| f.id == foi.id) {
            return Err(EnvError::DuplicateFoi { line, id: foi.id });
        }
        self.fois.push(foi);
        self.lines.push(line);
        Ok(())
    }

    fn finish(self) -> Result<EnvironmentModel, EnvError> {
        let omega = self.omega.ok_or(EnvError::MissingOmega)?;
        if omega == 0 || omega > MAX_OMEGA {
            return Err(EnvError::OmegaOutOfRange(omega));
        }
        if self.fois.is_empty() {
            return Err(EnvError::Empty);
        }
        let mut entry = None;
        for (i, foi) in self.fois.iter().enumerate() {
            if foi.arity.min > omega {
                return Err(EnvError::MinExceedsOmega {
                    id: foi.id.clone(),
                    min: foi.arity.min,
                    omega,
                });
            }
            if foi.is_entry {
                if let Some(first) = entry {
                    let first: &Foi = &self.fois[first];
                    return Err(EnvError::MultipleEntries {
                        first: first.id.clone(),
                        second: foi.id.clone(),
                    });
                }
                entry = Some(i);
            }
        }
        let entry = entry.ok_or(EnvError::NoEntry)?;
        let index: HashMap<String, usize> = self
            .fois
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id.clone(), i))
            .collect();
        let mut cg = CoActivationGraph::new(self.fois.len());
        for (line, a, b) in self.edges {
            let ia = *index.get(&a).ok_or_else(|| EnvError::UnknownEdgeEndpoint {
                line,
                id: a.clone(),
            })?;
            let ib = *index.get(&b).ok_or_else(|| EnvError::UnknownEdgeEndpoint {
                line,
                id: b.clone(),
            })?;
            if ia == ib {
                return Err(EnvError::SelfLoop { line, id: a });
            }
            cg.add_edge(ia, ib);
        }
        Ok(EnvironmentModel {
            fois: self.fois,
            cg,
            omega,
            entry,
            index,
        })
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head).trim()
}

fn parse_u32(line: usize, tok: &str, what: &str) -> Result<u32, EnvError> {
    tok.parse().map_err(|_| EnvError::Syntax {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

/// Parses an environment config document.
pub fn parse_environment(text: &str) -> Result<EnvironmentModel, EnvError> {
    let mut b = Builder::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
        let Some((&head, rest)) = toks.split_first() else {
            continue;
        };
        match head {
            "omega" => {
                let [tok] = rest else {
                    return Err(EnvError::Syntax {
                        line,
                        msg: "expected `omega <int>`".into(),
                    });
                };
                if b.omega.is_some() {
                    return Err(EnvError::Syntax {
                        line,
                        msg: "omega declared twice".into(),
                    });
                }
                b.omega = Some(parse_u32(line, tok, "omega")?);
            }
            "foi" => {
                let (id, min, max, is_entry) = match rest {
                    [id, min, max] => (id, min, max, false),
                    [id, min, max, "entry"] => (id, min, max, true),
                    _ => {
                        return Err(EnvError::Syntax {
                            line,
                            msg: "expected `foi <id> <min> <max|inf> [entry]`".into(),
                        })
                    }
                };
                let min = parse_u32(line, min, "arity min")?;
                if min == 0 {
                    return Err(EnvError::Syntax {
                        line,
                        msg: "arity min must be >= 1".into(),
                    });
                }
                let max = match *max {
                    "inf" => None,
                    tok => Some(parse_u32(line, tok, "arity max")?),
                };
                if let Some(m) = max {
                    if m < min {
                        return Err(EnvError::MinExceedsMax { line, min, max: m });
                    }
                }
                let foi = Foi {
                    id: id.to_string(),
                    arity: Arity { min, max },
                    is_entry,
                };
                b.add_foi(line, foi)?;
            }
            "edge" => {
                let [a, c] = rest else {
                    return Err(EnvError::Syntax {
                        line,
                        msg: "expected `edge <id> <id>`".into(),
                    });
                };
                b.edges.push((line, a.to_string(), c.to_string()));
            }
            other => {
                return Err(EnvError::Syntax {
                    line,
                    msg: format!("unknown directive `{other}`"),
                });
            }
        }
    }
    b.finish()
}

/// FoI states at one tick, optionally labeled with the true person count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationLine {
    pub states: Vec<bool>,
    pub label: Option<u32>,
}

impl ActivationLine {
    pub fn new(states: Vec<bool>, label: Option<u32>) -> Self {
        Self { states, label }
    }

    pub fn idle(n: usize) -> Self {
        Self {
            states: vec![false; n],
            label: None,
        }
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.states[i]
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for ActivationLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &s in &self.states {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(if s { "1" } else { "0" })?;
        }
        if let Some(l) = self.label {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

/// Parses one dataset record. `line` is used only for error messages.
pub fn parse_activation_record(
    raw: &str,
    line: usize,
    env: &EnvironmentModel,
) -> Result<Option<ActivationLine>, EnvError> {
    let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
    if toks.is_empty() {
        return Ok(None);
    }
    let n = env.len();
    let (fields, label) = match toks.len() {
        l if l == n => (&toks[..], None),
        l if l == n + 1 => (&toks[..n], Some(toks[n])),
        found => {
            return Err(EnvError::FieldCount {
                line,
                expected: n,
                found,
            })
        }
    };
    let states = fields
        .iter()
        .map(|&f| match f {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(EnvError::NonBinary {
                line,
                field: f.to_string(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let label = match label {
        None => None,
        Some(tok) => {
            let v: u32 = tok.parse().map_err(|_| EnvError::Syntax {
                line,
                msg: format!("invalid label `{tok}`"),
            })?;
            if v > env.omega() {
                return Err(EnvError::LabelOutOfRange {
                    line,
                    label: v,
                    omega: env.omega(),
                });
            }
            Some(v)
        }
    };
    Ok(Some(ActivationLine { states, label }))
}

/// Parses a whole activation dataset in file order.
pub fn parse_activation_lines(
    text: &str,
    env: &EnvironmentModel,
) -> Result<Vec<ActivationLine>, EnvError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(l) = parse_activation_record(raw, i + 1, env)? {
            out.push(l);
        }
    }
    Ok(out)
}

pub fn write_activation_lines(lines: &[ActivationLine]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

/// Re-expresses lines recorded in `from` in the column layout of `to`.
///
/// FoIs of `to` missing from `from` are idle; FoIs of `from` missing from
/// `to` are dropped. Models sensing the same movement with fewer sensors.
pub fn project_lines(
    from: &EnvironmentModel,
    to: &EnvironmentModel,
    lines: &[ActivationLine],
) -> Vec<ActivationLine> {
    let map: Vec<Option<usize>> = to.fois().iter().map(|f| from.index_of(&f.id)).collect();
    lines
        .iter()
        .map(|l| ActivationLine {
            states: map.iter().map(|m| m.is_some_and(|i| l.states[i])).collect(),
            label: l.label,
        })
        .collect()
}

/// Column mapping for wide binary-sensor logs such as ARAS, where each row
/// carries one column per physical sensor followed by activity labels.
///
/// Config syntax: `column <zero-based index> <foi-id>`, one per mapped
/// column; several columns may feed the same FoI (logical OR). Columns not
/// mapped (activity labels included) are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnAdapter {
    columns: Vec<(usize, usize)>,
}

impl ColumnAdapter {
    pub fn parse(text: &str, env: &EnvironmentModel) -> Result<Self, EnvError> {
        let mut columns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["column", col, id] => {
                    let col = parse_u32(line, col, "column index")? as usize;
                    let foi = env
                        .index_of(id)
                        .ok_or_else(|| EnvError::UnknownFoi(id.to_string()))?;
                    columns.push((col, foi));
                }
                _ => {
                    return Err(EnvError::Syntax {
                        line,
                        msg: "expected `column <index> <foi-id>`".into(),
                    })
                }
            }
        }
        Ok(Self { columns })
    }

    /// Converts raw rows into unlabeled activation lines.
    pub fn convert(
        &self,
        text: &str,
        env: &EnvironmentModel,
    ) -> Result<Vec<ActivationLine>, EnvError> {
        let needed = self.columns.iter().map(|&(c, _)| c + 1).max().unwrap_or(0);
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() < needed {
                return Err(EnvError::FieldCount {
                    line,
                    expected: needed,
                    found: toks.len(),
                });
            }
            let mut states = vec![false; env.len()];
            for &(col, foi) in &self.columns {
                match toks[col] {
                    "0" => {}
                    "1" => states[foi] = true,
                    f => {
                        return Err(EnvError::NonBinary {
                            line,
                            field: f.to_string(),
                        })
                    }
                }
            }
            out.push(ActivationLine {
                states,
                label: None,
            });
        }
        Ok(out)
    }
}
