use std::path::Path;
use std::process::{Command, Output};

use steerwave::io::{read_pyramid, read_real_tensor};

fn swt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swt"))
        .args(args)
        .current_dir(dir)
        .env("SWT_THREADS", "2")
        .output()
        .expect("spawn swt")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn make(dir: &Path, shape: &str, extra: &[&str], name: &str) {
    let mut args = vec!["make-tensor", "--shape", shape, "--out", name];
    args.extend_from_slice(extra);
    assert_eq!(code(&swt(&args, dir)), 0);
}

#[test]
fn design_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = swt(&["design-verify", "--builtin", "icosahedron", "--t", "4"], dir.path());
    assert_eq!(code(&ok), 0);
    let bad = swt(&["design-verify", "--builtin", "icosahedron", "--t", "6"], dir.path());
    assert_eq!(code(&bad), 2);
    assert!(stdout(&bad).contains("FAIL at degree 6"));
    let missing = swt(
        &["design-verify", "--file", "absent.txt", "--d", "3", "--t", "2"],
        dir.path(),
    );
    assert_eq!(code(&missing), 1);
}

#[test]
fn design_verify_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            format!("{:.17} {:.17}\n", t.cos(), t.sin())
        })
        .collect();
    std::fs::write(dir.path().join("pentagon.txt"), text).unwrap();
    let args = ["design-verify", "--file", "pentagon.txt", "--d", "2", "--t"];
    let pass = swt(&[&args[..], &["4"]].concat(), dir.path());
    assert_eq!(code(&pass), 0);
    let fail = swt(&[&args[..], &["5"]].concat(), dir.path());
    assert_eq!(code(&fail), 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&swt(&["no-such-command"], dir.path())), 1);
    assert_eq!(code(&swt(&["kernel", "--d", "3"], dir.path())), 1);
    let weight_without_optimal = swt(
        &[
            "kernel", "--d", "3", "--lmax", "2", "--nmax", "12", "--window", "cubic", "--weight", "arccos2",
        ],
        dir.path(),
    );
    assert_eq!(code(&weight_without_optimal), 1);
}

fn profile(out: &Output) -> Vec<(f64, f64)> {
    let text = stdout(out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,lambda"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn kernel_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let flat = swt(
        &[
            "kernel",
            "--d",
            "3",
            "--lmax",
            "10",
            "--nmax",
            "216",
            "--window",
            "flat",
            "--samples",
            "181",
        ],
        dir.path(),
    );
    assert_eq!(code(&flat), 0);
    let rows = profile(&flat);
    assert_eq!(rows.len(), 181);
    assert!((rows[0].1 - 121.0 / 216.0).abs() < 1e-12);
    assert!(!stdout(&flat).contains('\r'));

    let constant = profile(&swt(
        &["kernel", "--d", "3", "--lmax", "0", "--nmax", "216", "--samples", "50"],
        dir.path(),
    ));
    assert!(constant.iter().all(|r| r.1 == constant[0].1));

    for window in ["cubic", "bspline1", "bspline3", "optimal"] {
        let out = swt(
            &[
                "kernel", "--d", "3", "--lmax", "10", "--nmax", "216", "--window", window, "--out", "k.csv",
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{window}");
        let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
        assert_eq!(text.lines().count(), 722);
    }
}

#[test]
fn decompose_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "64,64", &["--seed", "11"], "f.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "3",
            "--design",
            "equiangular:12",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let f = read_real_tensor(dir.path().join("f.swt")).unwrap();
    let norm2: f64 = f.iter().map(|v| v * v).sum();
    let (pyramid, design) = read_pyramid(dir.path().join("p")).unwrap();
    assert!(design.is_some());
    assert!((pyramid.energy() - norm2).abs() <= 1e-9 * norm2);

    assert_eq!(
        code(&swt(&["reconstruct", "--pyramid", "p", "--out", "r.swt"], dir.path())),
        0
    );
    let r = read_real_tensor(dir.path().join("r.swt")).unwrap();
    let err = f.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(err < 1e-9 * scale, "{err}");
}

#[test]
fn harmonic_round_trip_in_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "16,16,16", &["--seed", "2"], "f.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "1",
            "--bank",
            "harmonic",
            "--lmax",
            "2",
            "--radial",
            "meyer-smooth",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        code(&swt(&["reconstruct", "--pyramid", "p", "--out", "r.swt"], dir.path())),
        0
    );
    let f = read_real_tensor(dir.path().join("f.swt")).unwrap();
    let r = read_real_tensor(dir.path().join("r.swt")).unwrap();
    let err: f64 = f.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err < 1e-9 * norm);
}

#[test]
fn constant_input_has_empty_bands() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "32,32", &["--constant", "3.5"], "c.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "c.swt",
            "--scales",
            "2",
            "--design",
            "equiangular:7",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let (pyramid, _) = read_pyramid(dir.path().join("p")).unwrap();
    let worst = pyramid
        .bands()
        .iter()
        .flat_map(|b| b.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn too_small_shape_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "8,8", &[], "s.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "s.swt",
            "--scales",
            "3",
            "--design",
            "equiangular:12",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("too small"));
}

#[test]
fn weak_design_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "32,32", &[], "f.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "2",
            "--design",
            "equiangular:5",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn identity_harmonic_steer_keeps_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "32,32", &["--seed", "5"], "f.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "2",
            "--bank",
            "harmonic",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let out = swt(
        &[
            "steer",
            "--pyramid",
            "p",
            "--rotation",
            "angle=0",
            "--mode",
            "harmonic",
            "--out",
            "q",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (a, _) = read_pyramid(dir.path().join("p")).unwrap();
    let (b, _) = read_pyramid(dir.path().join("q")).unwrap();
    for (x, y) in a.bands().iter().zip(b.bands()) {
        let diff = x.iter().zip(y).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }
}

#[test]
fn zonal_steer_by_one_slot_permutes_channels() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "64,64", &["--seed", "9"], "f.swt");
    let out = swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "2",
            "--design",
            "equiangular:12",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let angle = format!("angle={}", 2.0 * std::f64::consts::PI / 12.0);
    let out = swt(
        &[
            "steer",
            "--pyramid",
            "p",
            "--rotation",
            &angle,
            "--mode",
            "zonal",
            "--out",
            "q",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (a, _) = read_pyramid(dir.path().join("p")).unwrap();
    let (b, _) = read_pyramid(dir.path().join("q")).unwrap();
    let scale = a
        .bands()
        .iter()
        .flat_map(|x| x.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    for j in 0..2 {
        for n in 0..12 {
            let diff = b
                .band(j, n)
                .iter()
                .zip(a.band(j, (n + 1) % 12))
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9 * scale, "j={j} n={n} diff={diff}");
        }
    }

    // Steered pyramids still reconstruct the input.
    assert_eq!(
        code(&swt(&["reconstruct", "--pyramid", "q", "--out", "r.swt"], dir.path())),
        0
    );
    let f = read_real_tensor(dir.path().join("f.swt")).unwrap();
    let r = read_real_tensor(dir.path().join("r.swt")).unwrap();
    let err = f.iter().zip(&r).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9);
}

#[test]
fn steering_mode_must_match_bank() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "32,32", &[], "f.swt");
    swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "2",
            "--bank",
            "harmonic",
            "--lmax",
            "2",
            "--out",
            "p",
        ],
        dir.path(),
    );
    let out = swt(
        &[
            "steer",
            "--pyramid",
            "p",
            "--rotation",
            "angle=1",
            "--mode",
            "zonal",
            "--out",
            "q",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn tampered_pyramid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "32,32", &[], "f.swt");
    swt(
        &[
            "decompose",
            "--input",
            "f.swt",
            "--scales",
            "2",
            "--design",
            "equiangular:7",
            "--lmax",
            "3",
            "--out",
            "p",
        ],
        dir.path(),
    );
    std::fs::remove_file(dir.path().join("p/band_j1_n6.swt")).unwrap();
    assert_eq!(
        code(&swt(&["reconstruct", "--pyramid", "p", "--out", "r.swt"], dir.path())),
        2
    );
}

#[test]
fn commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    make(dir.path(), "16,16", &["--seed", "4"], "a.swt");
    make(dir.path(), "16,16", &["--seed", "4"], "b.swt");
    make(dir.path(), "16,16", &["--seed", "5"], "c.swt");
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.swt"), read("b.swt"));
    assert_ne!(read("a.swt"), read("c.swt"));
    for out in ["p1", "p2"] {
        swt(
            &[
                "decompose",
                "--input",
                "a.swt",
                "--scales",
                "1",
                "--design",
                "equiangular:7",
                "--lmax",
                "3",
                "--out",
                out,
            ],
            dir.path(),
        );
    }
    for name in ["manifest.json", "band_j0_n3.swt", "lowpass.swt", "design.txt"] {
        assert_eq!(read(&format!("p1/{name}")), read(&format!("p2/{name}")), "{name}");
    }
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = swt(&["selftest"], dir.path());
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
