//! End-to-end runs of the compiled binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use dstbc::algebra::Signature;
use dstbc::construct::{construct_pciod, regular_design};
use dstbc::design::{parse_design, serialize_design};
use dstbc::sweep::{write_csv, ExperimentConfig, ResultRow};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dstbc"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("dstbc-cli-tests").join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn construct_prints_a_parseable_design_with_its_report() {
    let out = bin()
        .args(["construct", "--family", "pciod", "--relays", "4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("CUWD: no; 4-group decodable: yes; row-orthogonal relays: yes"),
        "{}",
        text
    );
    // Report lines are comments, so the output is itself a design file.
    let design = parse_design(&text).unwrap();
    assert_eq!(design.t(), 4);
    assert_eq!(design.k(), 8);
}

#[test]
fn construct_writes_the_design_to_a_file() {
    let path = scratch("construct").join("regular.design");
    let out = bin()
        .args(["construct", "--family", "regular", "--relays", "4", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("4-group decodable: yes"));
    let design = parse_design(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(design.n_t(), 4);
    assert_eq!(design.num_groups(), 4);
}

#[test]
fn construct_checks_the_relay_count_per_family() {
    // Bare alamouti picks its own two-relay size.
    let out = bin()
        .args(["construct", "--family", "alamouti"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("2x2 design"), "{}", stdout(&out));

    for args in [
        ["construct", "--family", "alamouti", "--relays", "4"],
        ["construct", "--family", "regular", "--relays", "7"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert!(!out.status.success(), "{:?} succeeded", args);
        assert!(
            stderr(&out).contains("does not support"),
            "{}",
            stderr(&out)
        );
    }
}

#[test]
fn verify_accepts_a_shipped_design() {
    let path = scratch("verify-good").join("eca.design");
    let design = regular_design(Signature::new(2, 1)).unwrap();
    fs::write(&path, serialize_design(&design)).unwrap();
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("ok"));
}

#[test]
fn verify_names_the_violated_condition() {
    let path = scratch("verify-bad").join("corrupt.design");
    let text = serialize_design(&construct_pciod(4).unwrap());
    let corrupted = text.replacen("1.4142135623730951", "2", 1);
    assert_ne!(text, corrupted);
    fs::write(&path, corrupted).unwrap();
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("group decodability"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn sweep_is_reproducible_and_overridable() {
    let dir = scratch("sweep");
    let cfg = dir.join("sweep.conf");
    fs::write(
        &cfg,
        "mode = sync\ndesign = pciod\nrelays = 4\nbpcu = 1\np_db = 8, 12\ntrials = 60\nseed = 5\n",
    )
    .unwrap();
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for out in [&a, &b] {
        let run = bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(run.status.success(), "{}", stderr(&run));
    }
    let bytes_a = fs::read(&a).unwrap();
    assert_eq!(bytes_a, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.contains("P_dB,trials,errors,cer\n"));
    assert!(text.contains("# config_hash = "));
    assert!(text.contains("# seed = 5\n"));

    let run = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--seed", "9", "--set", "trials=30"])
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", stderr(&run));
    let text = stdout(&run);
    assert!(text.contains("# seed = 9\n"));
    assert!(text.contains("# trials = 30\n"));
    assert!(text.contains("8,30,"), "{}", text);
}

#[test]
fn slope_fits_a_results_file() {
    let path = scratch("slope").join("rows.csv");
    let rows: Vec<ResultRow> = (0..5)
        .map(|i| {
            let p_db = 10.0 + 5.0 * i as f64;
            let p = 10f64.powf(p_db / 10.0);
            ResultRow {
                p_db,
                trials: 1_000_000_000,
                errors: 1,
                cer: 0.3 * p.powi(-4),
                wall_seconds: 0.0,
            }
        })
        .collect();
    fs::write(&path, write_csv(&ExperimentConfig::default(), &rows)).unwrap();
    let out = bin()
        .arg("slope")
        .arg(&path)
        .args(["--window", "0,1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("slope = -4.0000"), "{}", text);
    assert!(text.contains("fitted over 5 of 5 grid points"));
}

#[test]
fn bad_flags_exit_nonzero_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}
