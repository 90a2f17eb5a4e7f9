//! End-to-end checks of the `wbcquant` binary: exit codes, output layout and
//! determinism of each subcommand.

use std::path::Path;
use std::process::{Command, Output};

use wbcquant::io::save_image_png;
use wbcquant::synth::{generate, SynthSpec};

const BIN: &str = env!("CARGO_BIN_EXE_wbcquant");

const EXPECTED_CSV_HEADER: &str = "image_id,n_discrete,n_clusters,mean_discrete_size,\
n_cells_in_clusters,n_total,bin_0_20,bin_21_40,bin_41_60,bin_61_80,bin_81_100,\
bin_101_120,bin_121_140,bin_141_160,bin_gt_160";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn wbcquant")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

/// Renders a small corpus of synthetic images (with truth files) into `dir`.
fn make_corpus(dir: &Path, n: usize, noise: f64) {
    for i in 0..n {
        let spec = SynthSpec {
            width: 800,
            height: 600,
            n_discrete: 6 + i,
            noise_sigma: noise,
            seed: 300 + i as u64,
            ..SynthSpec::default()
        };
        let (img, truth) = generate(&spec).unwrap();
        let base = dir.join(format!("img_{i}"));
        save_image_png(&img, &base.with_extension("png")).unwrap();
        let mut json = serde_json::to_string_pretty(&truth).unwrap();
        json.push('\n');
        std::fs::write(base.with_extension("truth.json"), json).unwrap();
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn analyze_writes_reports_and_is_deterministic() {
    let input = tempfile::tempdir().unwrap();
    make_corpus(input.path(), 2, 2.0);
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    for out in [&out1, &out2] {
        let res = run(&[
            "analyze",
            "--input",
            input.path().to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&res), 0, "stderr: {}", String::from_utf8_lossy(&res.stderr));
    }

    let json = std::fs::read_to_string(out1.path().join("img_0.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["image_id"], "img_0");
    assert_eq!(v["n_discrete"], 6);

    let csv = std::fs::read_to_string(out1.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), EXPECTED_CSV_HEADER);
    assert_eq!(csv.lines().count(), 3);

    assert_eq!(dir_bytes(out1.path()), dir_bytes(out2.path()));
}

#[test]
fn analyze_debug_masks_emits_binary_pngs() {
    let input = tempfile::tempdir().unwrap();
    make_corpus(input.path(), 1, 0.0);
    let out = tempfile::tempdir().unwrap();
    let res = run(&[
        "analyze",
        "--input",
        input.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--debug-masks",
    ]);
    assert_eq!(exit_code(&res), 0);
    for suffix in ["cells.png", "empty_space.png", "muscle_edge.png"] {
        let path = out.path().join(format!("img_0.{suffix}"));
        let img = wbcquant::io::load_image(&path).unwrap();
        assert!(
            img.pixels().iter().all(|&p| p == 0 || p == 255),
            "{suffix} is not a 0/255 mask"
        );
    }
    let roi = std::fs::read_to_string(out.path().join("img_0.roi.txt")).unwrap();
    assert_eq!(roi.lines().count(), 3); // 600 px / 200 px blocks
    assert!(roi.chars().all(|c| c == '0' || c == '1' || c == '\n'));
}

#[test]
fn analyze_partial_failure_exits_one() {
    let input = tempfile::tempdir().unwrap();
    make_corpus(input.path(), 1, 0.0);
    std::fs::write(input.path().join("broken.png"), b"not a png").unwrap();
    let out = tempfile::tempdir().unwrap();
    let res = run(&[
        "analyze",
        "--input",
        input.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("broken.png"));
    // The healthy image still produced its report.
    assert!(out.path().join("img_0.json").exists());
    assert!(out.path().join("summary.csv").exists());
}

#[test]
fn analyze_bad_config_exits_two() {
    let input = tempfile::tempdir().unwrap();
    make_corpus(input.path(), 1, 0.0);
    let out = tempfile::tempdir().unwrap();
    let config = input.path().join("bad.conf");
    std::fs::write(&config, "no_such_key = 1\n").unwrap();
    let res = run(&[
        "analyze",
        "--input",
        input.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 2);

    std::fs::write(&config, "step = 0.5\n").unwrap(); // out of (0.8, 1)
    let res = run(&[
        "analyze",
        "--input",
        input.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 2);
}

#[test]
fn analyze_config_file_changes_behavior() {
    let input = tempfile::tempdir().unwrap();
    make_corpus(input.path(), 1, 0.0);
    let out = tempfile::tempdir().unwrap();
    let config = input.path().join("run.conf");
    // A debris floor above the planted cell area suppresses every count.
    std::fs::write(&config, "# raise the debris floor\nmin_cell_area = 5000\n").unwrap();
    let res = run(&[
        "analyze",
        "--input",
        input.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("img_0.json")).unwrap())
            .unwrap();
    assert_eq!(v["n_discrete"], 0);
}

#[test]
fn synth_is_deterministic_and_ground_truthed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.conf");
    std::fs::write(
        &spec,
        "width = 640\nheight = 480\nn_discrete = 7\nnoise_sigma = 1.5\nseed = 42\n",
    )
    .unwrap();
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    for out in [&out1, &out2] {
        let res = run(&[
            "synth",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&res), 0, "stderr: {}", String::from_utf8_lossy(&res.stderr));
    }
    let png = out1.path().join("synth_00000042.png");
    let truth = out1.path().join("synth_00000042.truth.json");
    assert!(png.exists() && truth.exists());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(v["n_discrete"], 7);
    assert_eq!(v["objects"].as_array().unwrap().len(), 7);
    assert_eq!(dir_bytes(out1.path()), dir_bytes(out2.path()));
}

#[test]
fn synth_invalid_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.conf");
    std::fs::write(&spec, "radius_min = -3\n").unwrap();
    let out = tempfile::tempdir().unwrap();
    let res = run(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 2);
}

#[test]
fn benchmark_writes_table_and_csv() {
    let corpus = tempfile::tempdir().unwrap();
    make_corpus(corpus.path(), 2, 2.0);
    let out = tempfile::tempdir().unwrap();
    let res = run(&[
        "benchmark",
        "--corpus",
        corpus.path().to_str().unwrap(),
        "--methods",
        "li_otsu,otsu",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 0, "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("li_otsu") && stdout.contains("otsu"));
    let csv = std::fs::read_to_string(out.path().join("benchmark.csv")).unwrap();
    assert!(csv.starts_with("method,matched,false_positive,false_negative,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn benchmark_unknown_method_exits_two() {
    let corpus = tempfile::tempdir().unwrap();
    make_corpus(corpus.path(), 1, 0.0);
    let out = tempfile::tempdir().unwrap();
    for methods in ["sauvola", ""] {
        let res = run(&[
            "benchmark",
            "--corpus",
            corpus.path().to_str().unwrap(),
            "--methods",
            methods,
            "--out",
            out.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&res), 2, "methods='{methods}'");
    }
}

#[test]
fn benchmark_missing_truth_fails() {
    let corpus = tempfile::tempdir().unwrap();
    make_corpus(corpus.path(), 1, 0.0);
    std::fs::remove_file(corpus.path().join("img_0.truth.json")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let res = run(&[
        "benchmark",
        "--corpus",
        corpus.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&res), 1);
}
