use std::path::Path;
use std::process::{Command, Output};

use ctxmask::io::{read_btf, write_btf};
use ctxmask::metrics::{evaluate_pair, summarize, Metric, Protocol, Tiling};
use ctxmask::{AnyGrid, Grid, Shape};
use serde_json::Value;

fn ctxmask(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxmask"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ctxmask(d, &[]).status.code(), Some(1));
    assert_eq!(ctxmask(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(ctxmask(d, &["--help"]).status.code(), Some(0));
    assert_eq!(ctxmask(d, &["--threads", "0", "betti", "a.btf"]).status.code(), Some(1));
    assert_eq!(ctxmask(d, &["eval"]).status.code(), Some(1));
    assert_eq!(
        ctxmask(d, &["eval", "--patch", "e0=3x", "--pred", "a", "--label", "b"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ctxmask(d, &["eval", "--patch", "volume=3x3"]).status.code(), Some(1));
    assert_eq!(
        ctxmask(d, &["eval", "--pred", "a", "--pred", "b", "--label", "c"])
            .status
            .code(),
        Some(1)
    );

    let missing = ctxmask(d, &["betti", "missing.btf"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.btf"));

    std::fs::write(d.join("junk.btf"), b"JUNKJUNK").unwrap();
    assert_eq!(ctxmask(d, &["betti", "junk.btf"]).status.code(), Some(2));

    json(&ctxmask(d, &["fixture", "random", "--shape", "4x4", "--out", "a.btf"]));
    json(&ctxmask(d, &["fixture", "random", "--shape", "4x5", "--out", "b.btf"]));
    assert_eq!(ctxmask(d, &["loss", "a.btf", "b.btf"]).status.code(), Some(2));
    assert_eq!(
        ctxmask(d, &["loss", "a.btf", "a.btf", "--gamma", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ctxmask(d, &["fixture", "gap-line", "--length", "20", "--out-dir", "g"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_mentions_gamma_guideline() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctxmask(dir.path(), &["loss", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("gamma < 0.5"));
    assert!(text.contains("[default: 0.2]"));
}

#[test]
fn mask_on_gap_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    json(&ctxmask(d, &["fixture", "gap-line", "--out-dir", "gap"]));
    for mode in ["soft", "binary"] {
        let counts = json(&ctxmask(
            d,
            &["mask", "gap/x.btf", "gap/y.btf", "--mode", mode, "--out-dir", mode],
        ));
        assert_eq!(counts["v_gap"], 3);
        assert_eq!(counts["m"], 3);
        let v_gap = read_btf(d.join(mode).join("v_gap.btf")).unwrap().to_binary();
        assert_eq!(v_gap.count(), 3);
        assert!((0..3).all(|r| v_gap.at(0, r, 3) == 1));
    }
}

#[test]
fn loss_on_identical_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    json(&ctxmask(
        d,
        &["fixture", "random", "--shape", "12x9", "--seed", "5", "--out", "y.btf"],
    ));
    let v = json(&ctxmask(d, &["loss", "y.btf", "y.btf"]));
    assert!(v["total"].as_f64().unwrap() <= 2e-5);
    assert_eq!(v["mask_pixels"], 0);
}

#[test]
fn eval_reproduces_the_cropping_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    json(&ctxmask(d, &["fixture", "fig4", "--out-dir", "f4"]));
    let report = json(&ctxmask(
        d,
        &[
            "eval",
            "--pred",
            "f4/x_thin.btf",
            "--label",
            "f4/y.btf",
            "--pred",
            "f4/x_thick.btf",
            "--label",
            "f4/y.btf",
            "--patch",
            "betti=32x32",
            "--patch",
            "e0_gt=32x32",
        ],
    ));
    let agg = |i: usize, m: &str| report["images"][i]["aggregates"][m].as_f64().unwrap();
    assert!(agg(1, "e0") > agg(0, "e0"));
    assert_eq!(agg(1, "e0_gt"), agg(0, "e0_gt"));
    assert!(agg(1, "ags") >= agg(0, "ags"));
    assert_eq!(report["images"][1]["config"]["patches"]["e0"], "32x32");
}

#[test]
fn eval_matches_library_and_directory_mode() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir_all(d.join("pred")).unwrap();
    std::fs::create_dir_all(d.join("label")).unwrap();
    let shape = Shape::d2(20, 24).unwrap();
    let mut pairs = Vec::new();
    for (i, name) in ["b", "a", "c"].iter().enumerate() {
        let x = ctxmask::fixtures::gen_random(i as u64, shape, 0.6).unwrap();
        let y = ctxmask::fixtures::gen_random(100 + i as u64, shape, 0.6).unwrap();
        write_btf(&AnyGrid::from(x.clone()), d.join("pred").join(format!("{name}.btf"))).unwrap();
        write_btf(&AnyGrid::from(y.clone()), d.join("label").join(format!("{name}.btf"))).unwrap();
        pairs.push((name.to_string(), x, y));
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut protocol = Protocol::default();
    protocol.set(Metric::E0, Tiling::tiles(vec![8, 8]));
    let expected = summarize(
        pairs
            .iter()
            .map(|(id, x, y)| evaluate_pair(id, x, y, &protocol).unwrap())
            .collect(),
    );
    let expected = serde_json::to_value(&expected).unwrap();
    for threads in ["1", "3"] {
        let got = json(&ctxmask(
            d,
            &[
                "--threads",
                threads,
                "eval",
                "--pred-dir",
                "pred",
                "--label-dir",
                "label",
                "--patch",
                "e0=8x8",
            ],
        ));
        assert_eq!(got, expected);
    }
}

#[test]
fn grid_commands_write_expected_grids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let shape = Shape::d2(5, 9).unwrap();
    let bar = Grid::from_fn(shape, |_, r, c| u8::from((1..4).contains(&r) && (1..8).contains(&c)));
    write_btf(&AnyGrid::from(bar.clone()), d.join("bar.btf")).unwrap();

    json(&ctxmask(d, &["skeletonize", "bar.btf", "--hard", "--out", "s.btf"]));
    let skel = read_btf(d.join("s.btf")).unwrap();
    assert_eq!(skel, AnyGrid::from(ctxmask::hard_skeleton(&bar, 50)));

    json(&ctxmask(d, &["skeletonize", "bar.btf", "--out", "soft.btf"]));
    assert!(matches!(read_btf(d.join("soft.btf")).unwrap(), AnyGrid::Real(_)));

    json(&ctxmask(d, &["distmap", "bar.btf", "--out", "dist.btf"]));
    let AnyGrid::Real(dist) = read_btf(d.join("dist.btf")).unwrap() else {
        panic!("distance map is real-valued");
    };
    assert_eq!(dist.at(0, 0, 0), 2.0);
    assert_eq!(dist.at(0, 2, 4), 0.0);

    let b = json(&ctxmask(d, &["betti", "bar.btf"]));
    assert_eq!(
        (b["b0"].clone(), b["b1"].clone(), b["euler"].clone()),
        (1.into(), 0.into(), 1.into())
    );

    let pre = Grid::from_fn(shape, |_, r, c| u8::from(r == 2 && c == 2));
    write_btf(&AnyGrid::from(pre), d.join("pre.btf")).unwrap();
    let stray = Grid::from_fn(shape, |_, r, c| u8::from(r == 2 && (c == 1 || c == 7)));
    write_btf(&AnyGrid::from(stray), d.join("ft.btf")).unwrap();
    let report = json(&ctxmask(d, &["postproc", "ft.btf", "pre.btf", "--out", "kept.btf"]));
    assert_eq!(report["components_in"], 2);
    assert_eq!(report["components_kept"], 0);
    assert!(!read_btf(d.join("kept.btf")).unwrap().to_binary().any());
}

#[test]
fn pgm_inputs_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("img.pgm"),
        b"P5\n# ring\n3 3\n255\n\xff\xff\xff\xff\x00\xff\xff\xff\xff",
    )
    .unwrap();
    let b = json(&ctxmask(d, &["betti", "img.pgm"]));
    assert_eq!(b["b1"], 1);
}

#[test]
fn run_reports_through_writers() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = ctxmask_cli::run(["ctxmask", "betti", "/nonexistent.btf"], &mut out, &mut err);
    assert_eq!(code, ctxmask_cli::EXIT_DATA);
    assert!(out.is_empty());
    assert!(String::from_utf8(err).unwrap().starts_with("error: cannot read"));
}
