use std::path::PathBuf;

use proptest::prelude::*;
use spdc_vacuum::cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY_FAILED};
use spdc_vacuum::config::{format_complex, RunConfig};
use spdc_vacuum::scan::ScanType;

fn spdc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("spdc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spdc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn value_after(text: &str, prefix: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no {prefix} in {text}"));
    line[prefix.len()..].trim().parse().unwrap()
}

#[test]
fn missing_wavelength_names_the_key() {
    let (code, _, err) = spdc(&["scan", "--type", "signal", "--lc-um", "80"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("lambda_nm"), "{err}");
}

#[test]
fn unknown_and_invalid_keys_fail_closed() {
    let (code, _, err) = spdc(&["point", "--set", "colour=blue"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("colour"));
    let (code, _, err) = spdc(&[
        "scan",
        "--type",
        "signal",
        "--lambda-nm",
        "-5",
        "--lc-um",
        "80",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("lambda_nm"));
    let (code, _, err) = spdc(&[
        "scan",
        "--type",
        "laser",
        "--lambda-nm",
        "808",
        "--lc-um",
        "80",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("type"));
}

#[test]
fn scan_csv_is_byte_identical_for_a_fixed_seed() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let (code, out, _) = spdc(&[
            "scan",
            "--type",
            "signal",
            "--lambda-nm",
            "808",
            "--lc-um",
            "80",
            "--alpha",
            "0.7",
            "--seed",
            "99",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("fitted V = "));
        assert!(out.contains("within one DFT bin"), "{out}");
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# seed=99\n"));
    assert!(text.contains("\ndelay_um,ideal_rate_hz,counts\n"));
}

#[test]
fn config_file_then_overrides_then_flags() {
    let path = scratch("run.cfg");
    std::fs::write(
        &path,
        "# pump scan\ntype=pump\nlambda_nm=355\nlc_um=1500\nseed=1\npoints=401\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let (code, csv, _) = spdc(&[
        "scan", "--config", cfg, "--set", "seed=2", "--points", "201",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(csv.contains("# seed=2\n"));
    assert!(csv.contains("# points=201\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 202);
}

#[test]
fn hom_examples() {
    let (code, out, _) = spdc(&["hom"]);
    assert_eq!(code, EXIT_OK);
    assert!(value_after(&out, "R_AB/|D|^2 = ").abs() <= 1e-12);

    let (_, out, _) = spdc(&["hom", "--r", "0", "--t", "1"]);
    assert!((value_after(&out, "R_AB/|D|^2 = ") - 1.0).abs() <= 1e-12);

    let (_, out, _) = spdc(&["hom", "--r", "0.6", "--t", "-0.8i"]);
    assert!((value_after(&out, "R_AB/|D|^2 = ") - 0.0784).abs() <= 1e-12);

    let (code, _, err) = spdc(&["hom", "--r", "0.6", "--t", "0.9"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("|r|^2+|t|^2"));
}

#[test]
fn hom_sweep_has_its_minimum_at_half_transmission() {
    let (code, csv, summary) = spdc(&["hom", "--sweep", "0:1:101"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip_while(|l| *l != "t_sq,rate_d2")
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    let min = rows
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    assert!((min.0 - 0.5).abs() < 1e-12);
    assert!(min.1 <= 1e-12);
    assert!(summary.contains("at |t|^2 = 0.5"));
    for (t2, rate) in rows {
        assert!((rate - (2.0 * t2 - 1.0f64).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn point_reports_three_routes() {
    let (code, out, _) = spdc(&["point", "--alpha", "0.5", "--phi1-rad", "1.0"]);
    assert_eq!(code, EXIT_OK);
    let heis = value_after(&out, "R_AB = ");
    let amp = value_after(&out, "amplitude route = ");
    let state = value_after(&out, "state route = ");
    assert!((heis - amp).abs() < 1e-15 && (heis - state).abs() < 1e-15);
    assert!(out.contains("V = 0.8"));

    let (code, out, _) = spdc(&["point", "--setup", "hom"]);
    assert_eq!(code, EXIT_OK);
    assert!(value_after(&out, "R_AB = ").abs() < 1e-14);
    let (code, _, err) = spdc(&["point", "--setup", "mirror"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("setup"));
}

#[test]
fn verify_passes_and_notices_tampering() {
    let (code, out, _) = spdc(&["verify", "--cases", "40"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 7);

    let (code, out, _) = spdc(&["verify", "--cases", "40", "--tamper-commutator", "2"]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert!(
        out.lines()
            .any(|l| l.starts_with("FAIL ordering-equivalence")),
        "{out}"
    );
}

#[test]
fn bad_flags_are_config_errors() {
    let (code, _, err) = spdc(&["scan", "--frobnicate"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!err.is_empty());
    let (code, out, _) = spdc(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify"));
}

fn scan_type() -> impl Strategy<Value = ScanType> {
    prop_oneof![
        Just(ScanType::SignalDelay),
        Just(ScanType::IdlerDelay),
        Just(ScanType::PumpDelay)
    ]
}

proptest! {
    #[test]
    fn emitted_configs_parse_back(
        st in scan_type(),
        lambda in 100.0f64..2000.0,
        lc in 1.0f64..5000.0,
        start in -50.0f64..0.0,
        width in 0.1f64..50.0,
        points in 2u64..5000,
        alpha_re in -3.0f64..3.0,
        alpha_im in -3.0f64..3.0,
        seed in any::<u64>(),
        bin in 0.01f64..10.0,
    ) {
        let mut cfg = RunConfig::new();
        cfg.set("type", &st.to_string()).unwrap();
        cfg.set("lambda_nm", &lambda.to_string()).unwrap();
        cfg.set("lc_um", &lc.to_string()).unwrap();
        cfg.set("delay_start_um", &start.to_string()).unwrap();
        cfg.set("delay_stop_um", &(start + width).to_string()).unwrap();
        cfg.set("points", &points.to_string()).unwrap();
        cfg.set("alpha", &format_complex(num_complex::Complex64::new(alpha_re, alpha_im))).unwrap();
        cfg.set("seed", &seed.to_string()).unwrap();
        cfg.set("bin_s", &bin.to_string()).unwrap();
        let back = RunConfig::parse(&cfg.emit()).unwrap();
        prop_assert_eq!(&back, &cfg);
        let scan = back.scan_config().unwrap();
        prop_assert_eq!(scan.wavelength_nm, lambda);
        prop_assert_eq!(scan.alpha, num_complex::Complex64::new(alpha_re, alpha_im));
        let counting = back.counting_config().unwrap();
        prop_assert_eq!(RunConfig::from_scan(&scan, &counting).scan_config().unwrap(), scan);
    }
}
