use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ponder_core::corpus::TOY_SYNTH_CONFIG;
use ponder_core::{graph_from_json, CausalGraph};
use tempfile::TempDir;

fn ponder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ponder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Toy {
    dir: TempDir,
}

impl Toy {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("toy.toml");
        fs::write(&config, TOY_SYNTH_CONFIG).unwrap();
        let corpus = dir.path().join("toy.txt");
        let out = ponder(&["synth", "--config", p(&config), "--out", p(&corpus)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let graph = dir.path().join("toy.json");
        let out = ponder(&["build", "--corpus", p(&corpus), "--out", p(&graph)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn graph(&self) -> CausalGraph {
        graph_from_json(&fs::read_to_string(self.path("toy.json")).unwrap()).unwrap()
    }
}

#[test]
fn build_toy_corpus_gives_four_nodes_and_three_edges() {
    let toy = Toy::new();
    let g = toy.graph();
    assert_eq!(g.node_count(), 4);
    assert_eq!(g.edge_count(), 3);

    let out = ponder(&[
        "build",
        "--corpus",
        p(&toy.path("toy.txt")),
        "--out",
        p(&toy.path("again.json")),
    ]);
    let text = stdout(&out);
    assert!(text.contains("nodes: 4"));
    assert!(text.contains("edges: 3"));
    assert!(text.contains("contradictions:"));
    assert!(text.contains("mean entropy:"));
}

#[test]
fn build_empty_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.txt");
    fs::write(&corpus, "").unwrap();
    let out = ponder(&[
        "build",
        "--corpus",
        p(&corpus),
        "--out",
        p(&dir.path().join("g.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("g.json").exists());
}

#[test]
fn build_skips_bad_lines_with_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let mut text = String::new();
    for i in 0..8 {
        text.push_str(&format!("cause{} | often | effect\n", i % 3));
    }
    text.insert_str(0, "just two | fields\n");
    text.push_str("too|many|fields|here|now\n");
    fs::write(&corpus, text).unwrap();

    let graph = dir.path().join("g.json");
    let out = ponder(&["build", "--corpus", p(&corpus), "--out", p(&graph)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let warnings: Vec<String> = stderr(&out)
        .lines()
        .filter(|l| l.starts_with("warning:"))
        .map(String::from)
        .collect();
    assert_eq!(warnings.len(), 2, "{warnings:?}");
    assert!(warnings[0].contains("line 1"));
    assert!(warnings[1].contains("line 10"));
    assert!(stdout(&out).contains("observations: 8"));

    let g = graph_from_json(&fs::read_to_string(graph).unwrap()).unwrap();
    let total: usize = g.edges().map(|e| e.observation_count()).sum();
    assert_eq!(total, 8);
}

#[test]
fn build_with_unknown_adverbs_only_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "a | perchance | b\n").unwrap();
    let out = ponder(&[
        "build",
        "--corpus",
        p(&corpus),
        "--out",
        p(&dir.path().join("g.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("perchance"));
}

#[test]
fn build_with_bad_lexicon_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "a | often | b\n").unwrap();
    let lexicon = dir.path().join("lex.toml");
    fs::write(
        &lexicon,
        "[[adverb]]\nname = \"x\"\nfamily = \"gaussian\"\nparams = [0.5]\n",
    )
    .unwrap();
    let out = ponder(&[
        "build",
        "--corpus",
        p(&corpus),
        "--lexicon",
        p(&lexicon),
        "--out",
        p(&dir.path().join("g.json")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn build_honours_custom_lexicon_and_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "a | mostly | b\n").unwrap();
    let lexicon = dir.path().join("lex.toml");
    fs::write(
        &lexicon,
        "[[adverb]]\nname = \"mostly\"\nfamily = \"beta\"\nparams = [6.0, 2.0]\n",
    )
    .unwrap();
    let graph = dir.path().join("g.json");
    let out = ponder(&[
        "build",
        "--corpus",
        p(&corpus),
        "--lexicon",
        p(&lexicon),
        "--resolution",
        "250",
        "--out",
        p(&graph),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let g = graph_from_json(&fs::read_to_string(graph).unwrap()).unwrap();
    assert_eq!(g.resolution(), 250);
    assert_eq!(g.lexicon().len(), 1);
}

#[test]
fn query_a_to_d_matches_out_of_band_composition() {
    let toy = Toy::new();
    let g = toy.graph();
    let out = ponder(&[
        "query",
        "--graph",
        p(&toy.path("toy.json")),
        "--from",
        "A",
        "--to",
        "D",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let results: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let results = results.as_array().unwrap();
    assert_eq!(results.len(), 1);
    let path: Vec<&str> = results[0]["path"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(path, ["a", "c", "d"]);

    let composed = g
        .edge_posterior("a", "c")
        .unwrap()
        .multiply_normalize(g.edge_posterior("c", "d").unwrap())
        .unwrap();
    let expected_map = composed.map_estimate();
    let expected_entropy = composed.entropy();
    let expected_adverb = g.lexicon().best_adverb(&composed).unwrap().adverb;
    assert_eq!(results[0]["map_value"].as_f64().unwrap(), expected_map);
    assert!((results[0]["entropy_value"].as_f64().unwrap() - expected_entropy).abs() < 1e-12);
    assert_eq!(results[0]["best_adverb"].as_str().unwrap(), expected_adverb);
}

#[test]
fn query_a_to_b_goes_through_c() {
    let toy = Toy::new();
    let out = ponder(&[
        "query",
        "--graph",
        p(&toy.path("toy.json")),
        "--from",
        "A",
        "--to",
        "B",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("path:").count(), 1);
    assert!(text.contains("path: a -> c -> b"));
    for field in ["map:", "best adverb:", "entropy:", "contradiction:"] {
        assert!(text.contains(field), "missing {field}");
    }
}

#[test]
fn query_against_the_arrows_exits_3() {
    let toy = Toy::new();
    let out = ponder(&[
        "query",
        "--graph",
        p(&toy.path("toy.json")),
        "--from",
        "D",
        "--to",
        "A",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no directed path"));
}

#[test]
fn query_unknown_node_exits_1() {
    let toy = Toy::new();
    let out = ponder(&[
        "query",
        "--graph",
        p(&toy.path("toy.json")),
        "--from",
        "A",
        "--to",
        "Q",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn query_missing_graph_exits_1() {
    let out = ponder(&[
        "query",
        "--graph",
        "/nonexistent/g.json",
        "--from",
        "A",
        "--to",
        "B",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn export_dot_counts_statements() {
    let toy = Toy::new();
    let dot = toy.path("toy.dot");
    let out = ponder(&[
        "export",
        "--graph",
        p(&toy.path("toy.json")),
        "--format",
        "dot",
        "--out",
        p(&dot),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dot).unwrap();
    let edges = text.lines().filter(|l| l.contains(" -> ")).count();
    let nodes = text
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains(" -> "))
        .count();
    assert_eq!((nodes, edges), (4, 3));
    assert!(text.contains("MAP="));
}

#[test]
fn export_pen_width_follows_observation_count() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let mut text = "x | sometimes | z\n".repeat(10);
    text.push_str("y | sometimes | z\n");
    fs::write(&corpus, text).unwrap();
    let graph = dir.path().join("g.json");
    assert_eq!(
        code(&ponder(&[
            "build",
            "--corpus",
            p(&corpus),
            "--out",
            p(&graph)
        ])),
        0
    );
    let dot = dir.path().join("g.dot");
    assert_eq!(
        code(&ponder(&[
            "export",
            "--graph",
            p(&graph),
            "--format",
            "dot",
            "--out",
            p(&dot)
        ])),
        0
    );
    let text = fs::read_to_string(dot).unwrap();
    let width = |edge: &str| -> f64 {
        let line = text.lines().find(|l| l.contains(edge)).unwrap();
        let at = line.find("penwidth=").unwrap() + "penwidth=".len();
        line[at..]
            .split([',', ']'])
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(width("\"x\" -> \"z\"") > width("\"y\" -> \"z\""));
}

#[test]
fn export_curves_has_a_row_per_cell_per_edge() {
    let toy = Toy::new();
    let curves = toy.path("toy.csv");
    let out = ponder(&[
        "export",
        "--graph",
        p(&toy.path("toy.json")),
        "--format",
        "curves",
        "--out",
        p(&curves),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(curves).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("source,target,x,p"));
    let mut per_edge = std::collections::BTreeMap::new();
    for line in lines {
        let mut fields = line.split(',');
        let key = (
            fields.next().unwrap().to_string(),
            fields.next().unwrap().to_string(),
        );
        *per_edge.entry(key).or_insert(0usize) += 1;
    }
    assert_eq!(per_edge.len(), 3);
    assert!(per_edge.values().all(|&n| n == 1000));
}

#[test]
fn export_json_is_the_canonical_document() {
    let toy = Toy::new();
    let copy = toy.path("copy.json");
    let out = ponder(&[
        "export",
        "--graph",
        p(&toy.path("toy.json")),
        "--format",
        "json",
        "--out",
        p(&copy),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read(copy).unwrap(),
        fs::read(toy.path("toy.json")).unwrap()
    );
}

#[test]
fn export_unknown_format_exits_1() {
    let toy = Toy::new();
    let out = ponder(&[
        "export",
        "--graph",
        p(&toy.path("toy.json")),
        "--format",
        "png",
        "--out",
        p(&toy.path("x.png")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("png"));
}

#[test]
fn synth_writes_thirty_lines_deterministically() {
    let toy = Toy::new();
    let first = fs::read(toy.path("toy.txt")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 30);

    let again = toy.path("again.txt");
    let out = ponder(&[
        "synth",
        "--config",
        p(&toy.path("toy.toml")),
        "--out",
        p(&again),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(first, fs::read(again).unwrap());
}

#[test]
fn synth_unknown_adverb_exits_1_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    let text = TOY_SYNTH_CONFIG.replace("\"never\"", "\"never\", \"perchance\"");
    assert_ne!(text, TOY_SYNTH_CONFIG);
    fs::write(&config, text).unwrap();
    let out = ponder(&[
        "synth",
        "--config",
        p(&config),
        "--out",
        p(&dir.path().join("c.txt")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("perchance"));
}

#[test]
fn synth_malformed_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "seed = \"seven\"\n").unwrap();
    let out = ponder(&[
        "synth",
        "--config",
        p(&config),
        "--out",
        p(&dir.path().join("c.txt")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(code(&ponder(&[])), 1);
    assert_eq!(code(&ponder(&["frobnicate"])), 1);
    assert_eq!(code(&ponder(&["build", "--corpus", "x"])), 1);
    assert_eq!(code(&ponder(&["--help"])), 0);
    assert_eq!(code(&ponder(&["--version"])), 0);
}
