//! IF-THEN rules, Hit / Near Hit / Near Miss explanations and the prototype
//! topology export. All documents carry a `schema_version`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::Scorer;
use crate::model::Exll;
use crate::prototype::find_winners;
use crate::stats::{Label, UnitVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Prototype,
    MegaCloud,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub kind: RuleKind,
    pub class_id: Label,
    /// Prototype the rule was read from; absent for class-level rules.
    pub prototype_index: Option<usize>,
    pub member_sample_ids: Vec<String>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub schema_version: u32,
    pub rules: Vec<Rule>,
}

fn cap(members: &[String], max: Option<usize>) -> Vec<String> {
    let skip = max.map_or(0, |m| members.len().saturating_sub(m));
    members[skip..].to_vec()
}

/// One rule per prototype followed by one MegaCloud rule per class.
pub fn extract_rules(model: &Exll) -> Result<RuleSet> {
    if model.classes().is_empty() {
        return Err(Error::EmptyModel);
    }
    let max = model.config().max_members_per_rule;
    let mut rules = Vec::new();
    for (&k, class) in model.classes() {
        for (j, p) in class.prototypes().iter().enumerate() {
            rules.push(Rule {
                kind: RuleKind::Prototype,
                class_id: k,
                prototype_index: Some(j),
                member_sample_ids: cap(p.members(), max),
                text: format!("IF (I ~ I_{{{k},{j}}}) THEN (class is {k})"),
            });
        }
    }
    for (&k, class) in model.classes() {
        let members: Vec<String> =
            class.prototypes().iter().flat_map(|p| p.members().iter().cloned()).collect();
        rules.push(Rule {
            kind: RuleKind::MegaCloud,
            class_id: k,
            prototype_index: None,
            member_sample_ids: cap(&members, max),
            text: format!("IF (x ~ MC_{k}) THEN (class is {k})"),
        });
    }
    Ok(RuleSet { schema_version: SCHEMA_VERSION, rules })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub schema_version: u32,
    pub query_id: String,
    /// Best label `L1` of the fused posterior.
    pub predicted: Label,
    /// Second-best label `L2`; absent for a single-class model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runner_up: Option<Label>,
    pub hit_prototype: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_hit_prototype: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_miss_prototype: Option<usize>,
    /// Members of the best prototype of `L1`.
    pub hits: Vec<String>,
    /// Members of the second-best prototype of `L1`; absent when `L1` has one prototype.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_hits: Option<Vec<String>>,
    /// Members of the best prototype of `L2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_misses: Option<Vec<String>>,
}

impl Explanation {
    /// Compact, deterministic JSON rendering.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("explanation serializes")
    }
}

pub fn explain_prediction(model: &Exll, query_id: &str, x: &UnitVector) -> Result<Explanation> {
    let scorer = model.scorer()?;
    explain_with(&scorer, model.config().max_members_per_rule, query_id, x)
}

/// Same as [`explain_prediction`] with a prebuilt scorer, for batches of queries.
pub fn explain_with(
    scorer: &Scorer<'_>,
    max_members: Option<usize>,
    query_id: &str,
    x: &UnitVector,
) -> Result<Explanation> {
    let outcome = scorer.fuse_detailed(x)?;
    let predicted = outcome.fused.predicted;
    // A one-hot fused posterior has no meaningful runner-up; fall back to the global ranking.
    let runner_up = match outcome.fused.best_excluding(predicted) {
        Some((label, p)) if p > 0.0 => Some(label),
        _ => outcome.global.best_excluding(predicted).map(|(label, _)| label),
    };

    let lambda = scorer.precision().matrix();
    let winner_class = &scorer.classes()[&predicted];
    let winners = find_winners(winner_class, lambda, x);
    let members = |class: &crate::stats::ClassState, j: usize| cap(class.prototypes()[j].members(), max_members);

    let (near_miss_prototype, near_misses) = match runner_up {
        Some(l2) => {
            let class = &scorer.classes()[&l2];
            let j = find_winners(class, lambda, x).first;
            (Some(j), Some(members(class, j)))
        }
        None => (None, None),
    };

    Ok(Explanation {
        schema_version: SCHEMA_VERSION,
        query_id: query_id.to_string(),
        predicted,
        runner_up,
        hit_prototype: winners.first,
        near_hit_prototype: winners.second,
        near_miss_prototype,
        hits: members(winner_class, winners.first),
        near_hits: winners.second.map(|j| members(winner_class, j)),
        near_misses,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyNode {
    pub index: usize,
    pub centroid: Vec<f64>,
    pub support: u64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyEdge {
    pub source: usize,
    pub target: usize,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassTopology {
    pub class_id: Label,
    pub sample_count: u64,
    pub nodes: Vec<TopologyNode>,
    /// Strictly positive upper-triangle entries of the edge matrix.
    pub edges: Vec<TopologyEdge>,
    pub edge_matrix: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub schema_version: u32,
    pub dim: usize,
    pub classes: Vec<ClassTopology>,
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.classes.iter().map(|c| c.nodes.len()).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.classes.iter().map(|c| c.edges.len()).sum()
    }
}

/// Prototype graph of every class, in the original feature space.
pub fn export_topology(model: &Exll) -> Result<Topology> {
    let dim = model.dim().ok_or(Error::EmptyModel)?;
    let classes = model
        .classes()
        .iter()
        .map(|(&k, c)| ClassTopology {
            class_id: k,
            sample_count: c.sample_count(),
            nodes: c
                .prototypes()
                .iter()
                .enumerate()
                .map(|(index, p)| TopologyNode {
                    index,
                    centroid: p.centroid().as_slice().to_vec(),
                    support: p.support(),
                    radius: p.radius(),
                })
                .collect(),
            edges: c
                .edges()
                .upper_edges()
                .map(|(source, target, count)| TopologyEdge { source, target, count })
                .collect(),
            edge_matrix: c.edges().rows(),
        })
        .collect();
    Ok(Topology { schema_version: SCHEMA_VERSION, dim, classes })
}
