//! Trial data model for partially clustered designs.
//!
//! A [`TrialDataset`] holds participant records plus the cluster map that was
//! used for randomization or intervention delivery. How much of that map is
//! believed at analysis time is a separate choice, expressed by
//! [`ClusteringAssumption`] and resolved into independent units by
//! [`effective_units`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether outcomes are real-valued or 0/1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

/// Dependence structure assumed at analysis time.
///
/// `Partial` keeps intervention clusters whole and treats every control
/// participant as its own unit, regardless of any stored control grouping.
/// `Full` takes the stored cluster map at face value. `None` treats every
/// participant as independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusteringAssumption {
    Partial,
    Full,
    None,
}

impl ClusteringAssumption {
    pub fn label(&self) -> &'static str {
        match self {
            ClusteringAssumption::Partial => "partial",
            ClusteringAssumption::Full => "full",
            ClusteringAssumption::None => "none",
        }
    }
}

/// One participant: identifiers, arm, covariates, outcome, weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub cluster_id: String,
    /// Treatment indicator, 0 or 1.
    pub arm: u8,
    pub covariates: Vec<f64>,
    pub outcome: f64,
    /// Positive participant weight; 1 gives the usual equal weighting.
    pub weight: f64,
}

impl ParticipantRecord {
    pub fn new(
        participant_id: impl Into<String>,
        cluster_id: impl Into<String>,
        arm: u8,
        covariates: Vec<f64>,
        outcome: f64,
    ) -> Self {
        Self {
            participant_id: participant_id.into(),
            cluster_id: cluster_id.into(),
            arm,
            covariates,
            outcome,
            weight: 1.0,
        }
    }
}

/// A stored cluster: its id and the record indices belonging to it.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub id: String,
    pub members: Vec<usize>,
    pub arm: u8,
}

/// Validated dataset: records plus the cluster partition built from their
/// `cluster_id`s (in order of first appearance).
#[derive(Debug, Clone)]
pub struct TrialDataset {
    records: Vec<ParticipantRecord>,
    clusters: Vec<Cluster>,
    outcome_kind: OutcomeKind,
}

impl TrialDataset {
    /// Builds a dataset from records, checking every invariant: consistent
    /// covariate dimension, finite values, arms in {0,1}, single arm per
    /// cluster, and 0/1 outcomes when `outcome_kind` is binary.
    pub fn from_records(
        records: Vec<ParticipantRecord>,
        outcome_kind: OutcomeKind,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = records[0].covariates.len();
        let mut cluster_index: HashMap<String, usize> = HashMap::new();
        let mut clusters: Vec<Cluster> = Vec::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.arm > 1 {
                return Err(Error::InvalidArm {
                    index: i,
                    value: rec.arm as f64,
                });
            }
            if rec.covariates.len() != dim {
                return Err(Error::RaggedCovariates {
                    expected: dim,
                    index: i,
                    found: rec.covariates.len(),
                });
            }
            if !rec.outcome.is_finite() {
                return Err(Error::NonFiniteValue {
                    index: i,
                    field: "outcome",
                });
            }
            if rec.covariates.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    index: i,
                    field: "covariate",
                });
            }
            if !(rec.weight.is_finite() && rec.weight > 0.0) {
                return Err(Error::InvalidWeight {
                    index: i,
                    value: rec.weight,
                });
            }
            if outcome_kind == OutcomeKind::Binary && rec.outcome != 0.0 && rec.outcome != 1.0 {
                return Err(Error::NonBinaryOutcome {
                    index: i,
                    value: rec.outcome,
                });
            }
            let entry = cluster_index.entry(rec.cluster_id.clone()).or_insert_with(|| {
                clusters.push(Cluster {
                    id: rec.cluster_id.clone(),
                    members: Vec::new(),
                    arm: rec.arm,
                });
                clusters.len() - 1
            });
            let cluster = &mut clusters[*entry];
            if cluster.arm != rec.arm {
                return Err(Error::MixedArmCluster {
                    cluster_id: rec.cluster_id.clone(),
                });
            }
            cluster.members.push(i);
        }
        Ok(Self {
            records,
            clusters,
            outcome_kind,
        })
    }

    pub fn records(&self) -> &[ParticipantRecord] {
        &self.records
    }

    /// Stored clusters, in order of first appearance.
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        self.outcome_kind
    }

    /// Total number of participants N_T.
    pub fn n_total(&self) -> usize {
        self.records.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn covariate_dim(&self) -> usize {
        self.records[0].covariates.len()
    }

    pub fn arms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.arm as f64).collect()
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.outcome).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.weight).collect()
    }

    /// Index of the stored cluster each record belongs to.
    pub fn cluster_of(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.records.len()];
        for (ci, cl) in self.clusters.iter().enumerate() {
            for &i in &cl.members {
                out[i] = ci;
            }
        }
        out
    }

    pub fn has_both_arms(&self) -> bool {
        let mut seen = [false, false];
        for r in &self.records {
            seen[r.arm as usize] = true;
        }
        seen[0] && seen[1]
    }
}

/// One conditionally independent unit: a label and its record indices.
#[derive(Debug, Clone)]
pub struct Unit {
    pub id: String,
    pub members: Vec<usize>,
}

/// Partition of the records into conditionally independent units under a
/// clustering assumption. `J* = units.len()` is the effective sample size.
#[derive(Debug, Clone)]
pub struct UnitMap {
    pub units: Vec<Unit>,
}

impl UnitMap {
    pub fn j_star(&self) -> usize {
        self.units.len()
    }

    /// Unit index of each record.
    pub fn unit_of(&self, n_records: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_records];
        for (ui, unit) in self.units.iter().enumerate() {
            for &i in &unit.members {
                out[i] = ui;
            }
        }
        debug_assert!(out.iter().all(|&u| u != usize::MAX));
        out
    }
}

/// Resolves the clustering assumption into independent units.
///
/// Under `Partial` the effective sample size is `J* = K + sum_l N_l`:
/// intervention clusters stay whole and every control participant becomes a
/// singleton unit. Under `Full` the stored clusters are the units; under
/// `None` every participant is.
pub fn effective_units(dataset: &TrialDataset, assumption: ClusteringAssumption) -> UnitMap {
    let units = match assumption {
        ClusteringAssumption::Full => dataset
            .clusters()
            .iter()
            .map(|c| Unit {
                id: c.id.clone(),
                members: c.members.clone(),
            })
            .collect(),
        ClusteringAssumption::None => dataset
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| Unit {
                id: r.participant_id.clone(),
                members: vec![i],
            })
            .collect(),
        ClusteringAssumption::Partial => {
            let mut units = Vec::new();
            for c in dataset.clusters() {
                if c.arm == 1 {
                    units.push(Unit {
                        id: c.id.clone(),
                        members: c.members.clone(),
                    });
                } else {
                    for &i in &c.members {
                        units.push(Unit {
                            id: dataset.records()[i].participant_id.clone(),
                            members: vec![i],
                        });
                    }
                }
            }
            units
        }
    };
    UnitMap { units }
}

/// Strict parser for the trial CSV interface.
///
/// Expected header: `id, cluster, arm, y, <covariate names...>`. The
/// `covariate_names` argument selects and orders the covariate columns; every
/// name must be present in the header. No quoting, no missing cells.
pub fn parse_csv(
    text: &str,
    covariate_names: &[String],
    outcome_kind: OutcomeKind,
) -> Result<TrialDataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvParse {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str, line: usize| -> Result<usize> {
        cols.iter().position(|c| *c == name).ok_or(Error::CsvParse {
            line,
            message: format!("missing required column `{name}`"),
        })
    };
    let id_col = find("id", 1)?;
    let cluster_col = find("cluster", 1)?;
    let arm_col = find("arm", 1)?;
    let y_col = find("y", 1)?;
    let cov_cols: Vec<usize> = covariate_names
        .iter()
        .map(|n| find(n, 1))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (lineno0, line) in lines {
        let lineno = lineno0 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::CsvParse {
                line: lineno,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let parse_f64 = |idx: usize, what: &str| -> Result<f64> {
            let raw = fields[idx];
            if raw.is_empty() {
                return Err(Error::CsvParse {
                    line: lineno,
                    message: format!("missing {what} value"),
                });
            }
            raw.parse::<f64>().map_err(|_| Error::CsvParse {
                line: lineno,
                message: format!("cannot parse {what} value `{raw}`"),
            })
        };
        let arm_raw = parse_f64(arm_col, "arm")?;
        if arm_raw != 0.0 && arm_raw != 1.0 {
            return Err(Error::CsvParse {
                line: lineno,
                message: format!("arm must be 0 or 1, got `{}`", fields[arm_col]),
            });
        }
        let covariates = cov_cols
            .iter()
            .map(|&c| parse_f64(c, cols[c]))
            .collect::<Result<Vec<f64>>>()?;
        records.push(ParticipantRecord {
            participant_id: fields[id_col].to_string(),
            cluster_id: fields[cluster_col].to_string(),
            arm: arm_raw as u8,
            covariates,
            outcome: parse_f64(y_col, "outcome")?,
            weight: 1.0,
        });
    }
    TrialDataset::from_records(records, outcome_kind)
}

/// Renders a dataset back into the CSV interface format.
pub fn to_csv(dataset: &TrialDataset, covariate_names: &[String]) -> String {
    let mut out = String::from("id,cluster,arm,y");
    for n in covariate_names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for r in dataset.records() {
        out.push_str(&format!(
            "{},{},{},{}",
            r.participant_id, r.cluster_id, r.arm, r.outcome
        ));
        for v in &r.covariates {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
