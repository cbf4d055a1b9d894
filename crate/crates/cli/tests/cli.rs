use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use morphoseg::io::{load_labels, load_pfm, save_gray_png, save_labels, save_pfm};
use morphoseg::{amr_wt, load_gradient, synthetic, AmrParams, Connectivity, GrayImage, SegmentInput};
use serde_json::Value;
use tempfile::TempDir;

fn morphoseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphoseg"))
        .args(args)
        .env_remove("MORPHOSEG_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = morphoseg(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn demo(dir: &Path) {
    ok(&["demo", "--seed", "4", "--out", s(dir)]);
}

#[test]
fn demo_writes_corpus_with_ground_truths() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    for name in ["two_basin", "four_quadrant", "checkerboard", "planted_color"] {
        assert!(tmp.path().join(format!("{name}_gt.png")).is_file(), "{name}");
    }
    assert!(tmp.path().join("two_basin.pfm").is_file());
    assert!(tmp.path().join("planted_color.png").is_file());
    assert_eq!(
        load_labels(tmp.path().join("two_basin_gt.png")).unwrap().num_labels(),
        2
    );
    let manifest = json(tmp.path().join("demo.json"));
    assert_eq!(manifest["images"].as_array().unwrap().len(), 4);
}

#[test]
fn demo_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    demo(a.path());
    demo(b.path());
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for n in names {
        assert_eq!(
            std::fs::read(a.path().join(&n)).unwrap(),
            std::fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn reconstruct_constant_image() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flat.png");
    save_gray_png(&GrayImage::filled(9, 7, 100.0 / 255.0).unwrap(), &input).unwrap();
    let out = tmp.path().join("out");
    ok(&["reconstruct", s(&input), "--s", "3", "--out", s(&out)]);
    let (w, h, data) = load_pfm(out.join("flat_psi.pfm")).unwrap();
    assert_eq!((w, h), (9, 7));
    assert!(data.iter().all(|&v| v == data[0]));
    let meta = json(out.join("flat_psi.json"));
    assert_eq!(meta["iterations_used"], 4);
    assert_eq!(meta["params"]["s"], 3);
    assert_eq!(meta["params"]["m"], 50);
}

#[test]
fn reconstruct_two_basin_converges() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "reconstruct",
        s(&tmp.path().join("two_basin.pfm")),
        "--s",
        "1",
        "--out",
        s(&out),
    ]);
    let meta = json(out.join("two_basin_psi.json"));
    let gaps = meta["gap_history"].as_array().unwrap();
    assert!(gaps.last().unwrap().as_f64().unwrap() <= 1e-4);
    assert_eq!(meta["params"]["eta"], 1e-4);
}

#[test]
fn missing_input_exits_2_naming_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nowhere.png");
    for cmd in ["reconstruct", "segment", "hierarchy"] {
        let out = morphoseg(&[cmd, s(&missing), "--out", s(tmp.path())]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.png"));
    }
}

#[test]
fn bad_flags_exit_2() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let img = tmp.path().join("four_quadrant.png");
    for args in [
        vec!["segment", s(&img), "--connectivity", "6"],
        vec!["segment", s(&img), "--s", "0"],
        vec!["segment", s(&img), "--s", "5", "--m", "3"],
        vec!["segment", s(&img), "--eta", "-1"],
        vec!["spectral", s(&img)],
        vec!["frobnicate"],
    ] {
        assert_eq!(morphoseg(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_image_exits_2() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.png");
    std::fs::write(&bad, b"GIF89a not really").unwrap();
    let out = morphoseg(&["segment", s(&bad), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn segment_constant_image_has_no_boundaries() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flat.png");
    save_gray_png(&GrayImage::filled(10, 6, 64.0 / 255.0).unwrap(), &input).unwrap();
    ok(&["segment", s(&input), "--overlay", "--out", s(tmp.path())]);
    assert_eq!(load_labels(tmp.path().join("flat_labels.png")).unwrap().num_labels(), 1);
    match morphoseg::io::load_image(tmp.path().join("flat_overlay.png")).unwrap() {
        morphoseg::io::LoadedImage::Color(c) => assert!(c.data().iter().all(|&p| p == [64.0 / 255.0; 3])),
        other => panic!("overlay should be colour, got {other:?}"),
    }
}

#[test]
fn segment_four_quadrant() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "segment",
        s(&tmp.path().join("four_quadrant.png")),
        "--overlay",
        "--out",
        s(&out),
    ]);
    let labels = load_labels(out.join("four_quadrant_labels.png")).unwrap();
    assert_eq!(labels.num_labels(), 4);
    // boundaries lie on the separating lines (between 23 and 24) +/- 1 px
    let mask = labels.boundary_mask();
    for y in 0..48 {
        for x in 0..48 {
            if mask[y * 48 + x] {
                let near = |v: usize| (22..=25).contains(&v);
                assert!(near(x) || near(y), "boundary pixel at ({x},{y})");
            }
        }
    }
    assert!(out.join("four_quadrant_overlay.png").is_file());
    let meta = json(out.join("four_quadrant_labels.json"));
    assert_eq!(meta["region_count"], 4);
    assert_eq!(meta["params"]["connectivity"], 8);
}

#[test]
fn gradient_file_matches_library() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let img = tmp.path().join("four_quadrant.png");
    // any gradient of matching size works
    let g = synthetic::checkerboard(48);
    let gpath = tmp.path().join("grad.pfm");
    save_pfm(g.as_gray(), &gpath).unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "segment",
        s(&img),
        "--gradient",
        s(&gpath),
        "--s",
        "3",
        "--connectivity",
        "4",
        "--out",
        s(&out),
    ]);
    let cli = load_labels(out.join("four_quadrant_labels.png")).unwrap();
    let params = AmrParams::new(3, 50, 1e-4).unwrap();
    let lib = amr_wt(
        &SegmentInput::Gradient(load_gradient(&gpath).unwrap()),
        &params,
        Connectivity::Four,
    )
    .unwrap();
    assert_eq!(cli, lib);
    let meta = json(out.join("four_quadrant_labels.json"));
    assert_eq!(meta["params"]["gradient"], s(&gpath));

    // a .pfm input is itself the gradient
    ok(&[
        "segment",
        s(&gpath),
        "--s",
        "3",
        "--connectivity",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(load_labels(out.join("grad_labels.png")).unwrap(), lib);
}

#[test]
fn gradient_file_with_several_inputs_is_rejected() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let a = tmp.path().join("four_quadrant.png");
    let g = tmp.path().join("two_basin.pfm");
    let out = morphoseg(&["segment", s(&a), s(&a), "--gradient", s(&g), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hierarchy_manifest() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "hierarchy",
        s(&tmp.path().join("four_quadrant.png")),
        "--s",
        "1",
        "--m",
        "8",
        "--out",
        s(&out),
    ]);
    let manifest = json(out.join("four_quadrant_hierarchy.json"));
    let levels = manifest["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 9);
    assert_eq!(levels[0]["scale_cap"], Value::Null);
    assert_eq!(levels[8]["scale_cap"], 8);
    assert_eq!(levels[8]["region_count"], 4);
    assert_eq!(manifest["params"]["eta"], 0.0);
    for (z, level) in levels.iter().enumerate() {
        assert_eq!(level["level"], z);
        assert!(level["refinement_ok"].is_boolean());
        let file = out.join(format!("four_quadrant_level_{z:03}.png"));
        assert_eq!(
            load_labels(&file).unwrap().num_labels() as u64,
            level["region_count"].as_u64().unwrap()
        );
    }
}

#[test]
fn hierarchy_of_constant_image_is_trivial() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flat.png");
    save_gray_png(&GrayImage::filled(8, 8, 0.5).unwrap(), &input).unwrap();
    ok(&["hierarchy", s(&input), "--s", "1", "--m", "4", "--out", s(tmp.path())]);
    let manifest = json(tmp.path().join("flat_hierarchy.json"));
    for level in manifest["levels"].as_array().unwrap() {
        assert_eq!(level["region_count"], 1);
        assert_eq!(level["refinement_ok"], true);
    }
    assert_eq!(manifest["nesting_rate"], 1.0);
}

#[test]
fn spectral_groups_planted_colours() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "spectral",
        s(&tmp.path().join("planted_color.png")),
        "--k",
        "3",
        "--sigma",
        "10",
        "--seed",
        "2",
        "--out",
        s(&out),
    ]);
    let labels = load_labels(out.join("planted_color_spectral.png")).unwrap();
    assert_eq!(labels.num_labels(), 3);
    let w = synthetic::PLANTED_STRIPE_WIDTH;
    for a in 0..6 {
        for b in 0..6 {
            let same = labels.get(a * w + w / 2, 10) == labels.get(b * w + w / 2, 10);
            assert_eq!(same, a % 3 == b % 3);
        }
    }
    let meta = json(out.join("planted_color_spectral.json"));
    assert_eq!(meta["params"]["k"], 3);
    assert_eq!(meta["params"]["sigma"], 10.0);
    assert_eq!(meta["params"]["seed"], 2);
}

#[test]
fn spectral_rejects_gradient_input() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = morphoseg(&[
        "spectral",
        s(&tmp.path().join("two_basin.pfm")),
        "--k",
        "2",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn eval_segments_and_scores_corpus() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let out = tmp.path().join("eval");
    let images: Vec<PathBuf> = [
        "two_basin.pfm",
        "four_quadrant.png",
        "checkerboard.pfm",
        "planted_color.png",
    ]
    .iter()
    .map(|n| tmp.path().join(n))
    .collect();
    let mut args = vec!["eval", "--segment", "--gt", s(tmp.path()), "--out", s(&out)];
    args.extend(images.iter().map(|p| s(p)));
    let stdout = ok(&args);
    let rows = csv_rows(&stdout);
    assert_eq!(rows[0], ["image", "pri", "cv", "vi", "regions", "ground_truths"]);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1][0], "two_basin");
    assert_eq!(rows[1][1], "1.000000");
    assert_eq!(rows[1][3], "0.000000");
    assert_eq!(rows[5][0], "mean");
    assert_eq!(std::fs::read_to_string(out.join("eval.csv")).unwrap(), stdout);
    assert_eq!(json(out.join("eval.json"))["vi_units"], "bits");
}

#[test]
fn eval_label_files_against_nested_ground_truths() {
    let tmp = TempDir::new().unwrap();
    let gt_dir = tmp.path().join("gt");
    std::fs::create_dir_all(gt_dir.join("scene")).unwrap();
    let truth = synthetic::quadrant_truth(8);
    save_labels(&truth, gt_dir.join("scene").join("a.png")).unwrap();
    save_labels(&synthetic::two_basin_truth(8), gt_dir.join("scene").join("b.png")).unwrap();
    // segment output naming: the _labels suffix is stripped to find the stem
    let seg = tmp.path().join("scene_labels.png");
    save_labels(&truth, &seg).unwrap();
    let stdout = ok(&["eval", "--gt", s(&gt_dir), "--out", s(tmp.path()), s(&seg)]);
    let rows = csv_rows(&stdout);
    assert_eq!(rows[1][0], "scene_labels");
    assert_eq!(rows[1][5], "2");
    let pri: f64 = rows[1][1].parse().unwrap();
    let expected = morphoseg::metrics::pri(&truth, &[truth.clone(), synthetic::two_basin_truth(8)]).unwrap();
    assert!((pri - expected).abs() < 1e-6);
}

#[test]
fn eval_without_ground_truth_exits_2() {
    let tmp = TempDir::new().unwrap();
    let seg = tmp.path().join("lonely.png");
    save_labels(&synthetic::quadrant_truth(8), &seg).unwrap();
    let out = morphoseg(&["eval", "--gt", s(tmp.path()), "--out", s(tmp.path()), s(&seg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lonely"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    demo(tmp.path());
    let inputs = [
        tmp.path().join("four_quadrant.png"),
        tmp.path().join("planted_color.png"),
    ];
    let run = |threads: &str, out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_morphoseg"))
            .args(["segment", s(&inputs[0]), s(&inputs[1]), "--out", s(out)])
            .env("MORPHOSEG_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success());
        String::from_utf8(status.stdout).unwrap()
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let stdout_one = run("1", &a);
    let stdout_four = run("4", &b);
    // output order follows input order
    assert_eq!(stdout_one, stdout_four);
    assert!(stdout_one.lines().next().unwrap().contains("four_quadrant"));
    for n in ["four_quadrant_labels.png", "planted_color_labels.png"] {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap());
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_morphoseg"))
        .args(["segment", s(&inputs[0]), "--out", s(tmp.path())])
        .env("MORPHOSEG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn library_entry_point_reports_exit_codes() {
    let err = morphoseg_cli::run(["morphoseg", "segment", "/definitely/missing.png"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("/definitely/missing.png"));
    let internal = morphoseg_cli::CliError::from(morphoseg::Error::IncompletePartition { unassigned: 3 });
    assert_eq!(internal.exit_code(), 3);
}
