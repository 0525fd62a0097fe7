//! Instance and plan files.
//!
//! Reals are written as decimal strings with at most six fraction digits so
//! that a written instance parses back to the same bits.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::{LayeredNetwork, NodeId, NodeRecord, RestructurableArc};
use crate::restructure::{InterdictionPlan, InterdictionRules, Leadership, RestructureRules};

pub const MAX_FRACTION_DIGITS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Base,
    Recruitment,
    Organizational,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::Recruitment => "recruitment",
            Variant::Organizational => "organizational",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Variant::Base),
            "recruitment" => Ok(Variant::Recruitment),
            "organizational" => Ok(Variant::Organizational),
            other => Err(Error::validation(format!(
                "unknown variant {other:?} (expected base, recruitment or organizational)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Meta {
    pub seed: Option<u64>,
    pub variant: Variant,
}

/// A network together with the rule parameters stored alongside it.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub network: LayeredNetwork,
    /// Defender's resource budget `r`.
    pub restructure_budget: f64,
    pub leadership: Option<Leadership>,
    pub meta: Meta,
}

impl Instance {
    pub fn restructure_rules(&self) -> RestructureRules {
        RestructureRules::from_network(&self.network, self.restructure_budget)
    }

    pub fn interdiction_rules(&self, budget: f64, leadership: bool) -> InterdictionRules {
        InterdictionRules {
            budget,
            leadership: if leadership { self.leadership.clone() } else { None },
        }
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        let warnings = self.network.validate()?;
        self.restructure_rules().validate(&self.network)?;
        if let Some(lead) = &self.leadership {
            if let Some(&bad) = lead.nodes.iter().find(|&&i| i >= self.network.num_nodes()) {
                return Err(Error::validation(format!("leadership names missing node {bad}")));
            }
        }
        Ok(warnings)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let instance = file.into_instance()?;
        instance.validate()?;
        Ok(instance)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Instance::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Rounds to the precision the file format keeps.
pub fn quantize(x: f64) -> f64 {
    format_decimal(x).parse().expect("formatted decimal parses")
}

/// Shortest fixed-point form with at most six fraction digits.
pub fn format_decimal(x: f64) -> String {
    let mut s = format!("{x:.prec$}", prec = MAX_FRACTION_DIGITS);
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn parse_decimal(s: &str) -> std::result::Result<f64, String> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || !digits(int) || !digits(frac) || (body.contains('.') && frac.is_empty()) {
        return Err(format!("{s:?} is not a decimal number"));
    }
    if frac.len() > MAX_FRACTION_DIGITS {
        return Err(format!("{s:?} has more than {MAX_FRACTION_DIGITS} fraction digits"));
    }
    s.parse().map_err(|_| format!("{s:?} is not a decimal number"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Decimal(f64);

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_decimal(self.0))
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_decimal(&s).map(Decimal).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    id: NodeId,
    layer: u32,
    capacity: Decimal,
    interdiction_cost: Decimal,
    tau: u32,
    k: u32,
    l: u32,
    s: u32,
    organization: Option<u32>,
    #[serde(default)]
    recruitable: bool,
    #[serde(default)]
    promotable: bool,
    #[serde(default)]
    cross_org_recruitable: bool,
    supply: Decimal,
    demand: Decimal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcFile {
    tail: NodeId,
    head: NodeId,
    cost: Decimal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    budget: Decimal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadershipFile {
    nodes: Vec<NodeId>,
    min_count: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    seed: Option<u64>,
    variant: Variant,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: Vec<NodeFile>,
    arcs: Vec<(NodeId, NodeId)>,
    restructurable_arcs: Vec<ArcFile>,
    rules: RulesFile,
    leadership: Option<LeadershipFile>,
    meta: MetaFile,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let net = &inst.network;
        InstanceFile {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id,
                    layer: n.layer,
                    capacity: Decimal(n.capacity),
                    interdiction_cost: Decimal(n.interdiction_cost),
                    tau: n.tau,
                    k: n.k,
                    l: n.l,
                    s: n.s,
                    organization: n.organization,
                    recruitable: n.recruitable,
                    promotable: n.promotable,
                    cross_org_recruitable: n.cross_org_recruitable,
                    supply: Decimal(n.supply),
                    demand: Decimal(n.demand),
                })
                .collect(),
            arcs: net.arcs.clone(),
            restructurable_arcs: net
                .restructurable_arcs
                .iter()
                .map(|a| ArcFile {
                    tail: a.tail,
                    head: a.head,
                    cost: Decimal(a.cost),
                })
                .collect(),
            rules: RulesFile {
                budget: Decimal(inst.restructure_budget),
            },
            leadership: inst.leadership.as_ref().map(|l| LeadershipFile {
                nodes: l.nodes.clone(),
                min_count: l.min_count,
            }),
            meta: MetaFile {
                seed: inst.meta.seed,
                variant: inst.meta.variant,
            },
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance> {
        let num_layers = self.nodes.iter().map(|n| n.layer).max().unwrap_or(0);
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| NodeRecord {
                id: n.id,
                layer: n.layer,
                capacity: n.capacity.0,
                interdiction_cost: n.interdiction_cost.0,
                tau: n.tau,
                k: n.k,
                l: n.l,
                s: n.s,
                organization: n.organization,
                recruitable: n.recruitable,
                promotable: n.promotable,
                cross_org_recruitable: n.cross_org_recruitable,
                supply: n.supply.0,
                demand: n.demand.0,
            })
            .collect();
        Ok(Instance {
            network: LayeredNetwork {
                nodes,
                arcs: self.arcs,
                restructurable_arcs: self
                    .restructurable_arcs
                    .into_iter()
                    .map(|a| RestructurableArc {
                        tail: a.tail,
                        head: a.head,
                        cost: a.cost.0,
                    })
                    .collect(),
                num_layers,
            },
            restructure_budget: self.rules.budget.0,
            leadership: self.leadership.map(|l| Leadership {
                nodes: l.nodes,
                min_count: l.min_count,
            }),
            meta: Meta {
                seed: self.meta.seed,
                variant: self.meta.variant,
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    interdicted: Vec<NodeId>,
}

pub fn parse_plan(text: &str, num_nodes: usize) -> Result<InterdictionPlan> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: PlanFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if let Some(pos) = file.interdicted.iter().position(|&i| i >= num_nodes) {
        return Err(Error::Parse {
            field: format!("interdicted[{pos}]"),
            message: format!("node {} does not exist", file.interdicted[pos]),
        });
    }
    Ok(InterdictionPlan::from_nodes(num_nodes, &file.interdicted))
}

pub fn read_plan(path: &Path, num_nodes: usize) -> Result<InterdictionPlan> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_plan(&text, num_nodes)
}

pub fn plan_to_json(plan: &InterdictionPlan) -> String {
    let file = PlanFile {
        interdicted: plan.interdicted(),
    };
    serde_json::to_string(&file).expect("plan serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(1.0), "1");
        assert_eq!(format_decimal(0.45), "0.45");
        assert_eq!(format_decimal(-0.0), "0");
        assert_eq!(format_decimal(1.0 / 3.0), "0.333333");
        assert_eq!(format_decimal(2.5e-7), "0");
        assert_eq!(quantize(0.1 + 0.2), 0.3);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("12.5"), Ok(12.5));
        assert_eq!(parse_decimal("-3"), Ok(-3.0));
        assert!(parse_decimal("1.1234567").is_err());
        assert!(parse_decimal("1e3").is_err());
        assert!(parse_decimal("1.").is_err());
        assert!(parse_decimal(".5").is_err());
        assert!(parse_decimal("").is_err());
    }

    fn sample() -> Instance {
        let mut top = NodeRecord::new(1, 2, 2.5);
        top.supply = 2.5;
        top.organization = Some(0);
        let mut user = NodeRecord::new(0, 1, 0.333333);
        user.demand = 0.333333;
        Instance {
            network: LayeredNetwork {
                nodes: vec![user, top],
                arcs: vec![(1, 0)],
                restructurable_arcs: vec![],
                num_layers: 2,
            },
            restructure_budget: 6.0,
            leadership: Some(Leadership { nodes: vec![1], min_count: 1 }),
            meta: Meta { seed: Some(3), variant: Variant::Base },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let inst = sample();
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let text = sample().to_json().replace("\"0.333333\"", "\"0.3333333\"");
        match Instance::from_json(&text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "nodes[0].capacity"),
            other => panic!("unexpected {other:?}"),
        }
        let text = sample().to_json().replace("\"tau\"", "\"tow\"");
        assert!(matches!(Instance::from_json(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn plan_files() {
        let plan = parse_plan(r#"{"interdicted":[2,0]}"#, 4).unwrap();
        assert_eq!(plan.interdicted(), vec![0, 2]);
        assert_eq!(plan_to_json(&plan), r#"{"interdicted":[0,2]}"#);
        match parse_plan(r#"{"interdicted":[9]}"#, 4) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "interdicted[0]"),
            other => panic!("unexpected {other:?}"),
        }
        match parse_plan(r#"{"interdicted":["a"]}"#, 4) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "interdicted[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
