//! Markdown and HTML rendering. Both renderers walk the same block model,
//! so the two formats cannot drift apart structurally; only escaping and
//! chrome differ.

use std::fmt::Write as _;

use crate::dataset::Digest;
use crate::lineage::{LineageEntry, OperationDetail};
use crate::profile::{CorrelationMethod, DataProfile};
use crate::quality::{QualityAssessment, QualityFinding};
use crate::remediate::Actor;

use super::{ReadinessReport, ReportDiff};

enum Block {
    Heading(u8, String),
    Para(String),
    Bullets(Vec<String>),
    Table {
        headers: Vec<&'static str>,
        rows: Vec<Vec<String>>,
    },
}

fn heading(level: u8, text: impl Into<String>) -> Block {
    Block::Heading(level, text.into())
}

fn para(text: impl Into<String>) -> Block {
    Block::Para(text.into())
}

fn fmt_score(score: Option<f64>) -> String {
    match score {
        Some(s) => format!("{s:.4}"),
        None => "N/A".to_string(),
    }
}

fn fmt_delta(delta: Option<f64>) -> String {
    match delta {
        Some(d) => format!("{d:+.4}"),
        None => "N/A".to_string(),
    }
}

fn fmt_num(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{value:.0}")
    } else {
        format!("{value:.4}")
    }
}

fn short_digest(digest: Digest) -> String {
    digest.to_hex()[..12].to_string()
}

fn actor_label(actor: &Actor) -> String {
    format!("{} ({})", actor.name, actor.persona.name())
}

pub fn render_markdown(report: &ReadinessReport) -> String {
    to_markdown(&report_blocks(report))
}

pub fn render_html(report: &ReadinessReport) -> String {
    to_html("Data Readiness Report", &report_blocks(report))
}

pub fn render_diff_markdown(diff: &ReportDiff) -> String {
    to_markdown(&diff_blocks(diff))
}

fn report_blocks(report: &ReadinessReport) -> Vec<Block> {
    let mut blocks = vec![
        heading(1, "Data Readiness Report"),
        para(format!(
            "Generated {} by {} {}.",
            report.generated_at.to_rfc3339(),
            report.tool.name,
            report.tool.version
        )),
    ];

    blocks.push(heading(2, "Basic Metadata"));
    blocks.push(metadata_table(report));

    blocks.push(heading(2, "Summary of Quality and Readiness Assessment"));
    summary_blocks(report, &mut blocks);

    blocks.push(heading(2, "Baseline Data Profile"));
    profile_blocks(&report.baseline_profile, &mut blocks);

    blocks.push(heading(2, "Baseline Quality and Readiness Assessment"));
    assessment_blocks(&report.baseline_assessment, &mut blocks);

    blocks.push(heading(2, "Updated Data Profile"));
    match &report.updated_profile {
        Some(profile) => profile_blocks(profile, &mut blocks),
        None => blocks.push(para(
            "No remediation has been applied; the baseline profile still describes the data.",
        )),
    }

    blocks.push(heading(2, "Updated Quality and Readiness Assessment"));
    match &report.updated_assessment {
        Some(assessment) => assessment_blocks(assessment, &mut blocks),
        None => blocks.push(para(
            "No remediation has been applied; the baseline assessment still describes the data.",
        )),
    }

    blocks.push(heading(2, "Lineage of Operations"));
    lineage_blocks(report, &mut blocks);

    blocks.push(heading(2, "Data Governance"));
    governance_blocks(report, &mut blocks);

    blocks.push(heading(2, "References"));
    references_blocks(report, &mut blocks);

    blocks
}

fn metadata_table(report: &ReadinessReport) -> Block {
    let m = &report.basic_metadata;
    let mut rows = vec![
        vec!["Dataset name".to_string(), m.dataset_name.clone()],
        vec!["Source path".to_string(), m.source_path.clone()],
        vec!["Data type".to_string(), m.data_type.clone()],
        vec!["Version".to_string(), m.version_label.clone()],
        vec!["Digest".to_string(), m.dataset_digest.to_hex()],
        vec!["Rows".to_string(), m.row_count.to_string()],
        vec!["Columns".to_string(), m.column_count.to_string()],
    ];
    if let Some(label) = &m.updated_version_label {
        rows.push(vec!["Updated version".to_string(), label.clone()]);
    }
    if let Some(digest) = m.updated_digest {
        rows.push(vec!["Updated digest".to_string(), digest.to_hex()]);
    }
    if let Some(n) = m.updated_row_count {
        rows.push(vec!["Updated rows".to_string(), n.to_string()]);
    }
    if let Some(n) = m.updated_column_count {
        rows.push(vec!["Updated columns".to_string(), n.to_string()]);
    }
    for (label, value) in [
        ("Description", &m.description),
        ("Owner", &m.owner),
        ("License", &m.license),
        ("Collection process", &m.collection_process),
        ("Intended use", &m.intended_use),
    ] {
        if let Some(value) = value {
            rows.push(vec![label.to_string(), value.clone()]);
        }
    }
    for (key, value) in &m.custom {
        rows.push(vec![key.clone(), value.clone()]);
    }
    Block::Table {
        headers: vec!["Field", "Value"],
        rows,
    }
}

fn summary_blocks(report: &ReadinessReport, blocks: &mut Vec<Block>) {
    let s = &report.summary;
    blocks.push(para(s.headline.clone()));
    let mut bullets = vec![format!(
        "Baseline overall score: {}",
        fmt_score(s.baseline_overall_score)
    )];
    if report.updated_assessment.is_some() {
        bullets.push(format!(
            "Updated overall score: {}",
            fmt_score(s.updated_overall_score)
        ));
        bullets.push(format!("Overall delta: {}", fmt_delta(s.overall_delta)));
    }
    bullets.push(format!(
        "Remediation steps recorded: {}",
        s.remediation_step_count
    ));
    blocks.push(Block::Bullets(bullets));
    if !s.dimensions.is_empty() {
        blocks.push(Block::Table {
            headers: vec!["Dimension", "Baseline", "Updated", "Delta"],
            rows: s
                .dimensions
                .iter()
                .map(|d| {
                    vec![
                        d.dimension.title().to_string(),
                        fmt_score(d.baseline_score),
                        fmt_score(d.updated_score),
                        fmt_delta(d.delta),
                    ]
                })
                .collect(),
        });
    }
}

fn profile_blocks(profile: &DataProfile, blocks: &mut Vec<Block>) {
    blocks.push(Block::Bullets(vec![
        format!("Version: {}", profile.version_label),
        format!("Digest: {}", profile.dataset_digest.to_hex()),
        format!(
            "{} rows, {} columns; profiled {}",
            profile.row_count,
            profile.column_count,
            profile.generated_at.to_rfc3339()
        ),
    ]));
    blocks.push(Block::Table {
        headers: vec![
            "Column",
            "Type",
            "Role",
            "Categorical",
            "Missing",
            "Distinct",
            "Violations",
            "Min",
            "Median",
            "Max",
            "Mean",
            "Std dev",
        ],
        rows: profile
            .column_profiles
            .iter()
            .map(|c| {
                let numeric = |f: fn(&crate::profile::NumericSummary) -> f64| {
                    c.numeric.as_ref().map_or(String::new(), |n| fmt_num(f(n)))
                };
                vec![
                    c.name.clone(),
                    c.declared_type.name().to_string(),
                    c.role.name().to_string(),
                    if c.categorical { "yes" } else { "no" }.to_string(),
                    format!("{} ({:.1}%)", c.missing_count, c.missing_fraction * 100.0),
                    c.unique_count.to_string(),
                    c.type_violation_count.to_string(),
                    numeric(|n| n.min),
                    numeric(|n| n.median),
                    numeric(|n| n.max),
                    numeric(|n| n.mean),
                    numeric(|n| n.std_dev),
                ]
            })
            .collect(),
    });
    let defined: Vec<&crate::profile::CorrelationEntry> = profile
        .correlations
        .entries
        .iter()
        .filter(|e| e.defined)
        .collect();
    if defined.is_empty() {
        blocks.push(para("No column pair had a measurable association."));
    } else {
        blocks.push(Block::Table {
            headers: vec!["Column A", "Column B", "Method", "Association"],
            rows: defined
                .iter()
                .map(|e| {
                    vec![
                        e.column_a.clone(),
                        e.column_b.clone(),
                        match e.method {
                            CorrelationMethod::Pearson => "Pearson r",
                            CorrelationMethod::CramersV => "Cramer's V",
                        }
                        .to_string(),
                        e.value.map_or("N/A".to_string(), |v| format!("{v:.4}")),
                    ]
                })
                .collect(),
        });
    }
}

fn assessment_blocks(assessment: &QualityAssessment, blocks: &mut Vec<Block>) {
    blocks.push(para(format!(
        "Overall score: {} (dataset {}, version {}).",
        fmt_score(assessment.overall_score),
        short_digest(assessment.dataset_digest),
        assessment.version_label
    )));
    for finding in &assessment.findings {
        finding_blocks(finding, blocks);
    }
}

fn finding_blocks(finding: &QualityFinding, blocks: &mut Vec<Block>) {
    blocks.push(heading(
        3,
        format!(
            "{} — {}",
            finding.dimension.title(),
            fmt_score(finding.score)
        ),
    ));
    blocks.push(para(finding.explanation.clone()));
    if let Some(line) = evidence_line(finding) {
        blocks.push(para(line));
    }
    if !finding.recommendations.is_empty() {
        blocks.push(para("Recommendations:"));
        blocks.push(Block::Bullets(
            finding
                .recommendations
                .iter()
                .map(|rec| match &rec.suggested_step {
                    Some(step) => format!("{}: {}", step.action.kind(), rec.summary),
                    None => rec.summary.clone(),
                })
                .collect(),
        ));
    }
}

fn evidence_line(finding: &QualityFinding) -> Option<String> {
    let ev = &finding.evidence;
    let mut parts = Vec::new();
    if !ev.columns.is_empty() {
        parts.push(format!("columns {}", ev.columns.join(", ")));
    }
    if !ev.row_indices.is_empty() {
        let shown: Vec<String> = ev.row_indices.iter().take(8).map(u64::to_string).collect();
        let ellipsis = if ev.row_indices.len() > 8 { ", …" } else { "" };
        parts.push(format!(
            "{} recorded row indices ({}{})",
            ev.row_indices.len(),
            shown.join(", "),
            ellipsis
        ));
    }
    if parts.is_empty() {
        None
    } else {
        Some(format!("Evidence: {}.", parts.join("; ")))
    }
}

fn lineage_blocks(report: &ReadinessReport, blocks: &mut Vec<Block>) {
    let lineage = &report.lineage;
    blocks.push(para(format!(
        "Ledger {} — {} entries, chain {}. Digests are abbreviated to 12 hex \
         characters here; the JSON report carries them in full.",
        lineage.ledger_path,
        lineage.entries.len(),
        if lineage.verified { "verified" } else { "NOT verified" }
    )));
    if lineage.entries.is_empty() {
        blocks.push(para("No operations have been recorded."));
        return;
    }
    blocks.push(Block::Table {
        headers: vec![
            "#",
            "Timestamp",
            "Actor",
            "Operation",
            "Detail",
            "Input",
            "Output",
        ],
        rows: lineage
            .entries
            .iter()
            .map(|entry| {
                vec![
                    entry.entry_id.to_string(),
                    entry.timestamp.to_rfc3339(),
                    actor_label(&entry.actor),
                    entry.operation.name().to_string(),
                    entry_detail(entry),
                    short_digest(entry.input_digest),
                    short_digest(entry.output_digest),
                ]
            })
            .collect(),
    });
}

fn entry_detail(entry: &LineageEntry) -> String {
    match &entry.operation_detail {
        OperationDetail::Ingest {
            source_path,
            row_count,
            column_count,
        } => format!("{source_path} ({row_count}×{column_count})"),
        OperationDetail::Profile {
            row_count,
            column_count,
        } => format!("{row_count} rows × {column_count} columns"),
        OperationDetail::Assess { overall_score, .. } => {
            format!("overall {}", fmt_score(*overall_score))
        }
        OperationDetail::RemediationStep { step, summary } => format!(
            "{}: rows {} → {}, {} cells modified",
            step.action.kind(),
            summary.rows_before,
            summary.rows_after,
            summary.cells_modified
        ),
        OperationDetail::ReportRender {
            format,
            output_path,
        } => format!("{format} → {output_path}"),
    }
}

fn governance_blocks(report: &ReadinessReport, blocks: &mut Vec<Block>) {
    let g = &report.governance;
    let join_or_none = |items: &[String]| {
        if items.is_empty() {
            "none declared".to_string()
        } else {
            items.join(", ")
        }
    };
    blocks.push(Block::Bullets(vec![
        format!(
            "Steward: {}",
            g.steward.as_deref().unwrap_or("not declared")
        ),
        format!("Applicable regulations: {}", join_or_none(&g.regulations)),
        format!(
            "Contains personal data: {}",
            match g.contains_personal_data {
                Some(true) => "yes",
                Some(false) => "no",
                None => "not declared",
            }
        ),
        format!(
            "Protected attributes: {}",
            join_or_none(&g.protected_attributes)
        ),
    ]));
    if let Some(notes) = &g.notes {
        blocks.push(para(notes.clone()));
    }
    if g.actors.is_empty() {
        blocks.push(para("No actors appear on the ledger."));
    } else {
        blocks.push(para("Actors on record:"));
        blocks.push(Block::Bullets(g.actors.iter().map(actor_label).collect()));
    }
}

fn references_blocks(report: &ReadinessReport, blocks: &mut Vec<Block>) {
    blocks.push(Block::Table {
        headers: vec!["Metric", "Dimension", "Description"],
        rows: report
            .references
            .metric_catalog
            .iter()
            .map(|m| {
                vec![
                    m.metric_id.clone(),
                    m.dimension.title().to_string(),
                    m.description.clone(),
                ]
            })
            .collect(),
    });
    blocks.push(para("Conventions:"));
    blocks.push(Block::Bullets(report.references.conventions.clone()));
}

fn diff_blocks(diff: &ReportDiff) -> Vec<Block> {
    let mut blocks = vec![heading(1, "Readiness Report Comparison")];
    blocks.push(Block::Table {
        headers: vec!["", "Report A", "Report B"],
        rows: vec![
            vec![
                "Generated".to_string(),
                diff.report_a.generated_at.to_rfc3339(),
                diff.report_b.generated_at.to_rfc3339(),
            ],
            vec![
                "Version".to_string(),
                diff.report_a.version_label.clone(),
                diff.report_b.version_label.clone(),
            ],
            vec![
                "Digest".to_string(),
                short_digest(diff.report_a.dataset_digest),
                short_digest(diff.report_b.dataset_digest),
            ],
            vec![
                "Overall score".to_string(),
                fmt_score(diff.report_a.overall_score),
                fmt_score(diff.report_b.overall_score),
            ],
        ],
    });
    blocks.push(Block::Bullets(vec![
        format!("Overall delta (B − A): {}", fmt_delta(diff.overall_delta)),
        format!("Row count delta: {:+}", diff.row_count_delta),
        format!("Column count delta: {:+}", diff.column_count_delta),
    ]));
    if !diff.dimensions.is_empty() {
        blocks.push(Block::Table {
            headers: vec!["Dimension", "Report A", "Report B", "Delta"],
            rows: diff
                .dimensions
                .iter()
                .map(|d| {
                    vec![
                        d.dimension.title().to_string(),
                        fmt_score(d.score_a),
                        fmt_score(d.score_b),
                        fmt_delta(d.delta),
                    ]
                })
                .collect(),
        });
    }
    blocks
}

fn to_markdown(blocks: &[Block]) -> String {
    let mut out = String::new();
    for block in blocks {
        match block {
            Block::Heading(level, text) => {
                let _ = writeln!(out, "{} {text}", "#".repeat(*level as usize));
            }
            Block::Para(text) => {
                out.push_str(text);
                out.push('\n');
            }
            Block::Bullets(items) => {
                for item in items {
                    let _ = writeln!(out, "- {item}");
                }
            }
            Block::Table { headers, rows } => {
                let cell = |s: &str| s.replace('|', "\\|");
                let _ = writeln!(
                    out,
                    "| {} |",
                    headers.iter().map(|h| cell(h)).collect::<Vec<_>>().join(" | ")
                );
                let _ = writeln!(
                    out,
                    "|{}|",
                    headers.iter().map(|_| " --- ").collect::<Vec<_>>().join("|")
                );
                for row in rows {
                    let _ = writeln!(
                        out,
                        "| {} |",
                        row.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | ")
                    );
                }
            }
        }
        out.push('\n');
    }
    // Single trailing newline.
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const HTML_STYLE: &str = "\
body { font-family: system-ui, sans-serif; margin: 2rem auto; max-width: 72rem; \
padding: 0 1rem; color: #1a1a2e; }
h1 { border-bottom: 3px solid #1a1a2e; padding-bottom: 0.3rem; }
h2 { border-bottom: 1px solid #c5c5d2; padding-bottom: 0.2rem; margin-top: 2rem; }
table { border-collapse: collapse; margin: 0.5rem 0; }
th, td { border: 1px solid #c5c5d2; padding: 0.3rem 0.6rem; text-align: left; \
font-size: 0.9rem; }
th { background: #eef; }
li { margin: 0.15rem 0; }";

fn to_html(title: &str, blocks: &[Block]) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", escape_html(title));
    let _ = writeln!(out, "<style>\n{HTML_STYLE}\n</style>");
    out.push_str("</head>\n<body>\n");
    for block in blocks {
        match block {
            Block::Heading(level, text) => {
                let _ = writeln!(out, "<h{level}>{}</h{level}>", escape_html(text));
            }
            Block::Para(text) => {
                let _ = writeln!(out, "<p>{}</p>", escape_html(text));
            }
            Block::Bullets(items) => {
                out.push_str("<ul>\n");
                for item in items {
                    let _ = writeln!(out, "<li>{}</li>", escape_html(item));
                }
                out.push_str("</ul>\n");
            }
            Block::Table { headers, rows } => {
                out.push_str("<table>\n<tr>");
                for header in headers {
                    let _ = write!(out, "<th>{}</th>", escape_html(header));
                }
                out.push_str("</tr>\n");
                for row in rows {
                    out.push_str("<tr>");
                    for cell in row {
                        let _ = write!(out, "<td>{}</td>", escape_html(cell));
                    }
                    out.push_str("</tr>\n");
                }
                out.push_str("</table>\n");
            }
        }
    }
    out.push_str("</body>\n</html>\n");
    out
}
