use std::fmt::Write as _;

use num_traits::ToPrimitive;

use crate::causal::CausalGraph;
use crate::metrics::reference::GRAPH_COMPARISON;
use crate::metrics::{MetricReport, SteeringTable};
use crate::Rate;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph with every node, then directed edges, then undirected
/// edges drawn without arrowheads. Both edge lists are sorted.
pub fn export_dot(graph: &CausalGraph) -> String {
    let mut out = String::from("digraph values {\n");
    for n in graph.nodes() {
        let _ = writeln!(out, "  {};", quote(n));
    }
    let mut directed = graph.named_directed();
    directed.sort();
    for (a, b) in directed {
        let _ = writeln!(out, "  {} -> {};", quote(&a), quote(&b));
    }
    let mut undirected = graph.named_undirected();
    undirected.sort();
    for (a, b) in undirected {
        let _ = writeln!(out, "  {} -> {} [dir=none];", quote(&a), quote(&b));
    }
    out.push_str("}\n");
    out
}

fn fmt_rate(r: Option<&Rate>) -> String {
    match r.and_then(|r| r.to_f64()) {
        Some(x) => format!("{x:.3}"),
        None => "n/a".into(),
    }
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Per-value expected accuracy and unexpected frequency with macro averages.
pub fn report_markdown(report: &MetricReport) -> String {
    let mode = match report.mode {
        crate::metrics::ChangeMode::Role => "role",
        crate::metrics::ChangeMode::Sae => "sae",
    };
    let mut out = format!("## Steering prediction ({mode} steering)\n\n");
    out.push_str("| value | expected accuracy | unexpected frequency | steered | successors | non-successors |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|\n");
    for m in &report.per_value {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            md_escape(&m.value),
            fmt_rate(m.expected_accuracy.as_ref()),
            fmt_rate(m.unexpected_frequency.as_ref()),
            m.steered,
            m.successors,
            m.nonsuccessors
        );
    }
    let _ = writeln!(
        out,
        "| **macro** | {} | {} | | | |",
        fmt_rate(report.macro_expected.as_ref()),
        fmt_rate(report.macro_unexpected.as_ref())
    );
    out
}

/// One row per value; rates as exact `p/q` fractions.
pub fn report_csv(report: &MetricReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["value", "expected_accuracy", "unexpected_frequency", "steered", "successors", "nonsuccessors"])
        .expect("write to memory");
    let exact = |r: &Option<Rate>| r.as_ref().map(|r| r.to_string()).unwrap_or_default();
    for m in &report.per_value {
        writer
            .write_record([
                m.value.clone(),
                exact(&m.expected_accuracy),
                exact(&m.unexpected_frequency),
                m.steered.to_string(),
                m.successors.to_string(),
                m.nonsuccessors.to_string(),
            ])
            .expect("write to memory");
    }
    writer
        .write_record([
            "macro".into(),
            exact(&report.macro_expected),
            exact(&report.macro_unexpected),
            String::new(),
            String::new(),
            String::new(),
        ])
        .expect("write to memory");
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn report_json(report: &MetricReport) -> String {
    report.to_json()
}

/// Stimulation and suppression proportions per value and group, with the
/// per-value noise ratio in the last column.
pub fn steering_table_markdown(table: &SteeringTable) -> String {
    let noise = table.noise_by_value();
    let mut out = String::from("| value |");
    for g in &table.groups {
        let _ = write!(out, " {} stim / supp |", md_escape(g));
    }
    out.push_str(" noise |\n|---|");
    out.push_str(&"---:|".repeat(table.groups.len() + 1));
    out.push('\n');
    for v in &table.values {
        let _ = write!(out, "| {} |", md_escape(v));
        for g in &table.groups {
            match table.cell(g, v) {
                Some(c) => {
                    let _ = write!(out, " {} / {} |", fmt_rate(Some(&c.p_stim)), fmt_rate(Some(&c.p_supp)));
                }
                None => out.push_str(" n/a |"),
            }
        }
        let _ = writeln!(out, " {} |", fmt_rate(noise.get(v)));
    }
    out
}

/// Published graph-comparison magnitudes next to a run's own numbers.
pub fn reference_markdown(own: Option<(&str, &MetricReport)>) -> String {
    let mut out =
        String::from("| setting | expected (discovered / reference) | unexpected (discovered / reference) |\n");
    out.push_str("|---|---:|---:|\n");
    for r in &GRAPH_COMPARISON {
        let _ = writeln!(
            out,
            "| {} | {:.2} / {:.2} | {:.2} / {:.2} |",
            r.setting, r.expected.0, r.expected.1, r.unexpected.0, r.unexpected.1
        );
    }
    if let Some((name, report)) = own {
        let _ = writeln!(
            out,
            "| {} | {} / - | {} / - |",
            md_escape(name),
            fmt_rate(report.macro_expected.as_ref()),
            fmt_rate(report.macro_unexpected.as_ref())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::GraphKind;

    #[test]
    fn dot_single_edge() {
        let g = CausalGraph::from_edges(vec!["A".into(), "B".into()], &[("A", "B")], &[], GraphKind::Dag).unwrap();
        let dot = export_dot(&g);
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 1);
        assert!(dot.contains("\"A\" -> \"B\";"));
    }

    #[test]
    fn dot_empty() {
        let g = CausalGraph::from_edges(Vec::new(), &[], &[], GraphKind::Dag).unwrap();
        assert_eq!(export_dot(&g), "digraph values {\n}\n");
    }

    #[test]
    fn reference_rows() {
        let md = reference_markdown(None);
        assert!(md.contains("| Gemma-2B-IT, role | 0.69 / 0.51 | 0.56 / 0.60 |"));
        assert_eq!(md.lines().count(), 6);
    }
}
