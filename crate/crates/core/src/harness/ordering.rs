use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Manifest, Split};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    Iid,
    #[serde(alias = "class-iid")]
    ClassIid,
    Instance,
    #[serde(alias = "low-shot", alias = "low_shot")]
    LowShotInstance,
    #[serde(alias = "k-shot", alias = "k_shot")]
    KShotClassIid,
}

impl OrderingKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderingKind::Iid => "iid",
            OrderingKind::ClassIid => "class_iid",
            OrderingKind::Instance => "instance",
            OrderingKind::LowShotInstance => "low_shot_instance",
            OrderingKind::KShotClassIid => "k_shot_class_iid",
        }
    }
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "iid" => OrderingKind::Iid,
            "class-iid" | "class_iid" => OrderingKind::ClassIid,
            "instance" => OrderingKind::Instance,
            "low-shot" | "low_shot" | "low_shot_instance" => OrderingKind::LowShotInstance,
            "k-shot" | "k_shot" | "k_shot_class_iid" => OrderingKind::KShotClassIid,
            other => return Err(Error::InvalidConfig(format!("unknown ordering {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub kind: OrderingKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_shots: Option<usize>,
}

impl Ordering {
    pub fn new(kind: OrderingKind, seed: u64) -> Self {
        Self { kind, seed, k_shots: None }
    }

    pub fn k_shot(k: usize, seed: u64) -> Self {
        Self { kind: OrderingKind::KShotClassIid, seed, k_shots: Some(k) }
    }
}

/// A training sequence over manifest positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingPlan {
    pub indices: Vec<usize>,
    /// Instances kept by the low-shot ordering, in presentation order.
    pub selected_instances: Vec<String>,
}

/// Training samples grouped by original label, in manifest order.
fn by_class(manifest: &Manifest, train: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in train {
        groups.entry(manifest.samples[i].label.as_str()).or_default().push(i);
    }
    // Order blocks by class id so the shuffle below is the only source of variation.
    let names = manifest.class_names();
    names.iter().filter_map(|n| groups.remove(n.as_str())).collect()
}

type InstanceGroups = Vec<((String, String), Vec<usize>)>;

/// Instances as `(label, instance_id) -> samples`, keyed in first-appearance order.
fn by_instance(manifest: &Manifest, train: &[usize]) -> Result<InstanceGroups> {
    let mut groups: InstanceGroups = Vec::new();
    let mut position: std::collections::HashMap<(String, String), usize> = Default::default();
    for &i in train {
        let s = &manifest.samples[i];
        let inst = s.instance_id.clone().ok_or_else(|| Error::ManifestMissingField {
            field: "instance_id",
            sample_id: s.sample_id.clone(),
        })?;
        let key = (s.label.clone(), inst);
        match position.get(&key) {
            Some(&g) => groups[g].1.push(i),
            None => {
                position.insert(key.clone(), groups.len());
                groups.push((key, vec![i]));
            }
        }
    }
    Ok(groups)
}

/// Presentation order of the training split. Identical `(ordering, manifest)`
/// pairs always give identical plans.
pub fn make_ordering(manifest: &Manifest, ordering: &Ordering) -> Result<OrderingPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(ordering.seed);
    let train: Vec<usize> =
        (0..manifest.samples.len()).filter(|&i| manifest.samples[i].split == Split::Train).collect();
    let mut selected_instances = Vec::new();
    let indices = match ordering.kind {
        OrderingKind::Iid => {
            let mut v = train;
            v.shuffle(&mut rng);
            v
        }
        OrderingKind::ClassIid | OrderingKind::KShotClassIid => {
            let take = match ordering.kind {
                OrderingKind::KShotClassIid => {
                    let k = ordering.k_shots.ok_or_else(|| {
                        Error::InvalidConfig("k-shot ordering needs k_shots".into())
                    })?;
                    if k == 0 {
                        return Err(Error::InvalidConfig("k_shots must be positive".into()));
                    }
                    Some(k)
                }
                _ => None,
            };
            let mut blocks = by_class(manifest, &train);
            blocks.shuffle(&mut rng);
            let mut out = Vec::new();
            for mut block in blocks {
                block.shuffle(&mut rng);
                if let Some(k) = take {
                    if block.len() < k {
                        let label = &manifest.samples[block[0]].label;
                        return Err(Error::InvalidConfig(format!(
                            "class {label:?} has {} training samples, fewer than k = {k}",
                            block.len()
                        )));
                    }
                    block.truncate(k);
                }
                out.extend(block);
            }
            out
        }
        OrderingKind::Instance => {
            let mut groups = by_instance(manifest, &train)?;
            groups.shuffle(&mut rng);
            groups.into_iter().flat_map(|(_, g)| g).collect()
        }
        OrderingKind::LowShotInstance => {
            let groups = by_instance(manifest, &train)?;
            let mut per_class: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (g, ((label, _), _)) in groups.iter().enumerate() {
                per_class.entry(label.clone()).or_default().push(g);
            }
            let names = manifest.class_names();
            let mut chosen: Vec<usize> = names
                .iter()
                .filter_map(|n| per_class.get(n))
                .map(|gs| *gs.choose(&mut rng).expect("class has at least one instance"))
                .collect();
            chosen.shuffle(&mut rng);
            let mut out = Vec::new();
            for g in chosen {
                selected_instances.push(groups[g].0 .1.clone());
                out.extend_from_slice(&groups[g].1);
            }
            out
        }
    };
    Ok(OrderingPlan { indices, selected_instances })
}
