//! Multi-agent random walks over a movement graph, producing labeled
//! activation datasets.
//!
//! Graph config syntax:
//!
//! ```text
//! node outside inf
//! node door 1
//! node couch 3
//! arc outside outside 8
//! arc outside door 1
//! arc door couch 2
//! ```
//!
//! Every node other than `outside` must name a FoI of the environment. An
//! agent standing on a node activates that FoI.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, which is
//! portable across platforms, so a seed pins the dataset byte for byte.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{ActivationLine, EnvironmentModel};

pub const OUTSIDE: &str = "outside";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("node `{0}` is not a FoI of the environment")]
    UnknownNode(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("no `outside` node")]
    MissingOutside,
    #[error("node `{0}` has no outgoing arc with positive weight")]
    ZeroOutDegree(String),
    #[error("arc weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("{agents} agents exceed omega {omega}")]
    TooManyAgents { agents: u32, omega: u32 },
    #[error("steps must be >= 1")]
    NoSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// `None` is unbounded.
    pub capacity: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementGraph {
    nodes: Vec<Node>,
    arcs: Vec<Vec<(usize, f64)>>,
    index: HashMap<String, usize>,
}

impl MovementGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self, node: usize) -> &[(usize, f64)] {
        &self.arcs[node]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn outside(&self) -> Option<usize> {
        self.index_of(OUTSIDE)
    }

    /// Builds a graph from nodes and `(from, to, weight)` arcs.
    pub fn new(nodes: Vec<Node>, arcs: &[(&str, &str, f64)]) -> Result<Self, SimError> {
        let mut g = Self {
            nodes: Vec::new(),
            arcs: Vec::new(),
            index: HashMap::new(),
        };
        for node in nodes {
            g.add_node(node)?;
        }
        for &(a, b, w) in arcs {
            g.add_arc(a, b, w)?;
        }
        Ok(g)
    }

    fn add_node(&mut self, node: Node) -> Result<(), SimError> {
        if self.index.contains_key(&node.id) {
            return Err(SimError::DuplicateNode(node.id));
        }
        self.index.insert(node.id.clone(), self.nodes.len());
        self.nodes.push(node);
        self.arcs.push(Vec::new());
        Ok(())
    }

    fn add_arc(&mut self, from: &str, to: &str, weight: f64) -> Result<(), SimError> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(SimError::BadWeight(weight));
        }
        let a = self
            .index_of(from)
            .ok_or_else(|| SimError::UnknownNode(from.into()))?;
        let b = self
            .index_of(to)
            .ok_or_else(|| SimError::UnknownNode(to.into()))?;
        self.arcs[a].push((b, weight));
        Ok(())
    }

    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            match n.capacity {
                Some(c) => out.push_str(&format!("node {} {c}\n", n.id)),
                None => out.push_str(&format!("node {} inf\n", n.id)),
            }
        }
        for (a, arcs) in self.arcs.iter().enumerate() {
            for &(b, w) in arcs {
                out.push_str(&format!(
                    "arc {} {} {w}\n",
                    self.nodes[a].id, self.nodes[b].id
                ));
            }
        }
        out
    }
}

/// Parses a graph config. Node ids are checked against the environment by
/// [`validate_graph`], not here.
pub fn parse_graph(text: &str) -> Result<MovementGraph, SimError> {
    let mut g = MovementGraph {
        nodes: Vec::new(),
        arcs: Vec::new(),
        index: HashMap::new(),
    };
    let mut pending = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split_once('#').map_or(raw, |(h, _)| h);
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["node", id, cap] => {
                let capacity = match *cap {
                    "inf" => None,
                    c => Some(c.parse::<u32>().ok().filter(|&c| c > 0).ok_or_else(|| {
                        SimError::Syntax {
                            line,
                            msg: format!("invalid capacity `{c}`"),
                        }
                    })?),
                };
                g.add_node(Node {
                    id: id.to_string(),
                    capacity,
                })?;
            }
            ["arc", a, b, w] => {
                let w: f64 = w.parse().map_err(|_| SimError::Syntax {
                    line,
                    msg: format!("invalid weight `{w}`"),
                })?;
                pending.push((line, a.to_string(), b.to_string(), w));
            }
            _ => {
                return Err(SimError::Syntax {
                    line,
                    msg: "expected `node <id> <capacity|inf>` or `arc <from> <to> <weight>`".into(),
                })
            }
        }
    }
    for (_, a, b, w) in pending {
        g.add_arc(&a, &b, w)?;
    }
    Ok(g)
}

/// Non-fatal findings of [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphWarning {
    /// Node capacity exceeds the FoI's maximum arity.
    CapacityExceedsArity {
        node: String,
        capacity: Option<u32>,
        max: Option<u32>,
    },
}

pub fn validate_graph(
    env: &EnvironmentModel,
    g: &MovementGraph,
) -> Result<Vec<GraphWarning>, SimError> {
    if g.outside().is_none() {
        return Err(SimError::MissingOutside);
    }
    let mut warnings = Vec::new();
    for (i, node) in g.nodes.iter().enumerate() {
        if node.id != OUTSIDE {
            let foi = env
                .index_of(&node.id)
                .ok_or_else(|| SimError::UnknownNode(node.id.clone()))?;
            let max = env.fois()[foi].arity.max;
            let exceeds = match (node.capacity, max) {
                (_, None) => false,
                (None, Some(_)) => true,
                (Some(c), Some(m)) => c > m,
            };
            if exceeds {
                warnings.push(GraphWarning::CapacityExceedsArity {
                    node: node.id.clone(),
                    capacity: node.capacity,
                    max,
                });
            }
        }
        if !g.arcs[i].iter().any(|&(_, w)| w > 0.0) {
            return Err(SimError::ZeroOutDegree(node.id.clone()));
        }
    }
    Ok(warnings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub num_agents: u32,
    pub steps: usize,
    pub seed: u64,
}

/// Runs the walk and returns one labeled line per step.
///
/// All agents start outside. Within a step agents move one after the other
/// in id order; each picks, weight-proportionally, among its out-neighbors
/// that still have room (its own node always has room). An agent with no
/// such neighbor stays put.
pub fn simulate(
    env: &EnvironmentModel,
    g: &MovementGraph,
    cfg: &SimConfig,
) -> Result<Vec<ActivationLine>, SimError> {
    Ok(simulate_traced(env, g, cfg)?.0)
}

/// Like [`simulate`], also returning per-step node occupancy (indexed as
/// [`MovementGraph::nodes`]).
pub fn simulate_traced(
    env: &EnvironmentModel,
    g: &MovementGraph,
    cfg: &SimConfig,
) -> Result<(Vec<ActivationLine>, Vec<Vec<u32>>), SimError> {
    validate_graph(env, g)?;
    if cfg.num_agents > env.omega() {
        return Err(SimError::TooManyAgents {
            agents: cfg.num_agents,
            omega: env.omega(),
        });
    }
    if cfg.steps == 0 {
        return Err(SimError::NoSteps);
    }
    let outside = g.outside().expect("validated");
    let foi_of: Vec<Option<usize>> = g.nodes.iter().map(|n| env.index_of(&n.id)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut position = vec![outside; cfg.num_agents as usize];
    let mut occupancy = vec![0u32; g.nodes.len()];
    occupancy[outside] = cfg.num_agents;

    let mut lines = Vec::with_capacity(cfg.steps);
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for _ in 0..cfg.steps {
        for pos in position.iter_mut() {
            let here = *pos;
            targets.clear();
            weights.clear();
            for &(to, w) in &g.arcs[here] {
                let room = to == here || g.nodes[to].capacity.is_none_or(|c| occupancy[to] < c);
                if room && w > 0.0 {
                    targets.push(to);
                    weights.push(w);
                }
            }
            if targets.is_empty() {
                continue;
            }
            let pick = WeightedIndex::new(&weights).expect("positive weights");
            let to = targets[pick.sample(&mut rng)];
            occupancy[here] -= 1;
            occupancy[to] += 1;
            *pos = to;
        }
        let mut states = vec![false; env.len()];
        for (node, &occ) in occupancy.iter().enumerate() {
            if let (Some(f), true) = (foi_of[node], occ > 0) {
                states[f] = true;
            }
        }
        let label = cfg.num_agents - occupancy[outside];
        lines.push(ActivationLine::new(states, Some(label)));
        trace.push(occupancy.clone());
    }
    Ok((lines, trace))
}
