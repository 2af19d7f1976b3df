//! Equivalence reports as JSON and as an aligned text table.

use metamodel_core::equivalence::{
    Condition, Conclusion, EquivalenceReport, OperationalVerdict, Side, StructuralVerdict,
};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDoc {
    pub conclusion: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionDoc>,
    pub structural: Vec<VerdictDoc>,
    pub operational: Vec<VerdictDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionDoc {
    pub category: &'static str,
    pub kind: String,
    pub missing_in: &'static str,
}

/// One row of the report; fields not relevant to the verdict are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictDoc {
    pub kind: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aspect: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<f64>>,
}

impl VerdictDoc {
    fn bare(kind: &str, verdict: &'static str) -> Self {
        VerdictDoc {
            kind: kind.into(),
            verdict,
            aspect: None,
            left: None,
            right: None,
            domain_size: None,
            samples: None,
            entity: None,
            input: None,
        }
    }

    /// Short free-text details for the table view.
    fn details(&self) -> String {
        let mut parts = Vec::new();
        if let Some(a) = &self.aspect {
            parts.push(format!("{a}: {} vs {}", self.left.as_deref().unwrap_or("?"), self.right.as_deref().unwrap_or("?")));
        } else if let (Some(l), Some(r)) = (&self.left, &self.right) {
            parts.push(format!("{l} vs {r}"));
        }
        if let Some(n) = self.domain_size {
            parts.push(format!("domain {n}"));
        }
        if let Some(n) = self.samples {
            parts.push(format!("{n} samples"));
        }
        if let Some(e) = self.entity {
            parts.push(format!("entity {e}"));
        }
        if let Some(input) = &self.input {
            parts.push(format!("input ({})", super::join_numbers(input).replace(' ', ",")));
        }
        parts.join("; ")
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

impl ReportDoc {
    pub fn of(report: &EquivalenceReport) -> Self {
        let (conclusion, conditions) = match &report.conclusion {
            Conclusion::Equivalent => ("equivalent", Vec::new()),
            Conclusion::NotEquivalent => ("not-equivalent", Vec::new()),
            Conclusion::ConditionallyEquivalent(conds) => (
                "conditionally-equivalent",
                conds
                    .iter()
                    .map(|c| match c {
                        Condition::Structure { kind, missing_in } => ConditionDoc {
                            category: "structure",
                            kind: kind.name().into(),
                            missing_in: side_name(*missing_in),
                        },
                        Condition::Operation { kind, missing_in } => ConditionDoc {
                            category: "operation",
                            kind: kind.name().into(),
                            missing_in: side_name(*missing_in),
                        },
                    })
                    .collect(),
            ),
        };
        let structural = report
            .structural
            .iter()
            .map(|(kind, v)| match v {
                StructuralVerdict::Matched => VerdictDoc::bare(kind.name(), "matched"),
                StructuralVerdict::MissingInLeft => VerdictDoc::bare(kind.name(), "missing-in-left"),
                StructuralVerdict::MissingInRight => VerdictDoc::bare(kind.name(), "missing-in-right"),
                StructuralVerdict::Mismatched(m) => VerdictDoc {
                    aspect: Some(m.aspect.clone()),
                    left: Some(m.left.clone()),
                    right: Some(m.right.clone()),
                    ..VerdictDoc::bare(kind.name(), "mismatched")
                },
            })
            .collect();
        let operational = report
            .operational
            .iter()
            .map(|(kind, v)| {
                let name = kind.name();
                match v {
                    OperationalVerdict::ExtensionallyEqual { domain_size } => VerdictDoc {
                        domain_size: Some(*domain_size),
                        ..VerdictDoc::bare(name, "extensionally-equal")
                    },
                    OperationalVerdict::SampledEqual { samples } => VerdictDoc {
                        samples: Some(*samples),
                        ..VerdictDoc::bare(name, "sampled-equal")
                    },
                    OperationalVerdict::Counterexample {
                        entity,
                        input,
                        left,
                        right,
                    } => VerdictDoc {
                        entity: *entity,
                        input: Some(input.clone()),
                        left: Some(left.to_string()),
                        right: Some(right.to_string()),
                        ..VerdictDoc::bare(name, "counterexample")
                    },
                    OperationalVerdict::Mismatched(m) => VerdictDoc {
                        aspect: Some(m.aspect.clone()),
                        left: Some(m.left.clone()),
                        right: Some(m.right.clone()),
                        ..VerdictDoc::bare(name, "mismatched")
                    },
                    OperationalVerdict::SameBinding => VerdictDoc::bare(name, "same-binding"),
                    OperationalVerdict::MissingInLeft => VerdictDoc::bare(name, "missing-in-left"),
                    OperationalVerdict::MissingInRight => VerdictDoc::bare(name, "missing-in-right"),
                }
            })
            .collect();
        ReportDoc {
            conclusion,
            conditions,
            structural,
            operational,
        }
    }
}

pub fn report_json(report: &EquivalenceReport) -> String {
    let mut text = serde_json::to_string_pretty(&ReportDoc::of(report)).expect("report serializes");
    text.push('\n');
    text
}

pub fn report_table(report: &EquivalenceReport) -> String {
    let doc = ReportDoc::of(report);
    let rows: Vec<(&str, &VerdictDoc)> = doc
        .structural
        .iter()
        .map(|v| ("structure", v))
        .chain(doc.operational.iter().map(|v| ("operation", v)))
        .collect();
    let kind_width = rows.iter().map(|(_, v)| v.kind.len()).max().unwrap_or(0).max(4);
    let verdict_width = rows.iter().map(|(_, v)| v.verdict.len()).max().unwrap_or(0).max(7);
    let mut out = format!("{:<9}  {:<kind_width$}  {:<verdict_width$}  details\n", "category", "kind", "verdict");
    for (category, v) in rows {
        let line = format!("{category:<9}  {:<kind_width$}  {:<verdict_width$}  {}", v.kind, v.verdict, v.details());
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(&format!("conclusion: {}", doc.conclusion));
    if !doc.conditions.is_empty() {
        let conds: Vec<String> = doc
            .conditions
            .iter()
            .map(|c| format!("{} {} missing in {}", c.category, c.kind, c.missing_in))
            .collect();
        out.push_str(&format!(" ({})", conds.join(", ")));
    }
    out.push('\n');
    out
}
