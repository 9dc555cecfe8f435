use std::sync::Arc;

use ponder_core::corpus::LUNG_CANCER;
use ponder_core::ingest::parse_relations_str;
use ponder_core::{CausalGraph, Lexicon, RelationFormat};

fn graph() -> CausalGraph {
    let parsed = parse_relations_str(LUNG_CANCER, RelationFormat::Pipe).unwrap();
    assert!(parsed.diagnostics.is_empty());
    let (graph, report) = CausalGraph::from_records(
        Arc::new(Lexicon::default_at(1000).unwrap()),
        &parsed.records,
    );
    assert!(report.rejected.is_empty());
    graph
}

#[test]
fn heavy_smoking_is_a_stronger_cause_than_smoking() {
    let g = graph();
    let heavy = g.edge_report("heavy smoking", "lung cancer").unwrap();
    let plain = g.edge_report("smoking", "lung cancer").unwrap();
    assert!(heavy.map > plain.map);
    assert!(heavy.mean > plain.mean);
}

#[test]
fn lung_cancer_leads_to_death_about_half_the_time() {
    let report = graph().edge_report("lung cancer", "death").unwrap();
    assert!((report.map - 0.5).abs() <= 0.1);
    assert_eq!(report.best_adverb, "sometimes");
}

#[test]
fn the_single_workplace_report_is_the_least_certain_named_edge() {
    let g = graph();
    let h = |c: &str, e: &str| g.edge_report(c, e).unwrap().entropy;
    let workplace = h("workplace exposure", "lung cancer");
    for (c, e) in [
        ("heavy smoking", "lung cancer"),
        ("smoking", "lung cancer"),
        ("lung cancer", "death"),
        ("radon gas", "lung cancer"),
    ] {
        assert!(workplace > h(c, e), "{c} -> {e}");
    }
}

#[test]
fn smoking_reaches_death_through_lung_cancer() {
    let g = graph();
    let paths = g.find_paths("smoking", "death", 4).unwrap();
    assert!(paths
        .iter()
        .any(|p| p == &["smoking", "lung cancer", "death"]));
    assert!(paths
        .iter()
        .all(|p| p.first().unwrap() == "smoking" && p.last().unwrap() == "death"));
}
