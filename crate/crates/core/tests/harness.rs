use subdiff_core::fem::Mesh1D;
use subdiff_core::harness::{
    fit_rate, mc_strong, rms_with_stderr, run_study, solve, validate_deterministic,
    ExperimentConfig, ExperimentKind, ManifestBuilder, OutputDigest, Reference, RefineAxis,
    RESULTS_HEADER,
};
use subdiff_core::noise::{CovarianceSpec, SigmaSpec};
use subdiff_core::stepper::{InitialCondition, SchemeConfig};
use subdiff_core::Error;

fn base(kind: ExperimentKind, sigma: SigmaSpec) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        scheme: SchemeConfig {
            alpha: 0.6,
            t_final: 0.1,
            k_steps: 16,
            mesh: Mesh1D::new(8).unwrap(),
            covariance: CovarianceSpec::PowerLaw {
                n_modes: 8,
                decay: 2.0,
            },
            sigma,
            u0: InitialCondition::sin_pi(),
        },
        refine: None,
        ladder: vec![4, 8, 16],
        reference: Reference::Oracle,
        n_samples: 1,
        master_seed: 77,
        expected_rate: Some(2.0),
    }
}

#[test]
fn exact_square_law_gives_slope_two() {
    let pts: Vec<(f64, f64)> = (3..8)
        .map(|k| {
            let h = 0.5f64.powi(k);
            (h, 3.7 * h * h)
        })
        .collect();
    let (slope, se) = fit_rate(&pts).unwrap();
    assert!((slope - 2.0).abs() <= 1e-12);
    assert!(se <= 1e-12);
}

#[test]
fn noisy_power_law_fit() {
    // h^1.5 with ±1% deterministic perturbations
    let jitter = [0.01, -0.008, 0.004, -0.01, 0.007, -0.003];
    let pts: Vec<(f64, f64)> = jitter
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let h = 0.5f64.powi(k as i32 + 2);
            (h, 0.3 * h.powf(1.5) * (1.0 + e))
        })
        .collect();
    let (slope, se) = fit_rate(&pts).unwrap();
    assert!((slope - 1.5).abs() <= 0.05, "{slope}");
    assert!(se > 0.0 && se < 0.05);
}

#[test]
fn fit_preconditions() {
    assert!(fit_rate(&[(0.5, 1.0), (0.25, 0.3)]).is_err());
    assert!(fit_rate(&[(0.5, 1.0), (0.5, 0.3), (0.25, 0.1)]).is_err());
    assert!(fit_rate(&[(0.5, 1.0), (0.25, 0.0), (0.125, 0.1)]).is_err());
}

#[test]
fn zero_sigma_monte_carlo_equals_deterministic_study() {
    let mut det = base(ExperimentKind::ValidateDeterministic, SigmaSpec::Zero);
    det.n_samples = 1;
    let mut mc = base(ExperimentKind::McStrong, SigmaSpec::Zero);
    mc.n_samples = 25;
    let a = validate_deterministic(&det).unwrap();
    let b = mc_strong(&mc).unwrap();
    assert_eq!(a.levels, b.levels);
    assert!(b.levels.iter().all(|l| l.stderr == 0.0));
    assert_eq!(b.n_samples, 1);
    assert!(b.coupling_digest.is_none());
}

#[test]
fn results_are_byte_identical_across_runs_and_pool_sizes() {
    let mut cfg = base(ExperimentKind::McStrong, SigmaSpec::Linear { c: 1.0 });
    cfg.reference = Reference::Overkill {
        n_cells: Some(32),
        k_steps: None,
    };
    cfg.n_samples = 12;
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_study(&cfg).unwrap())
    };
    let one = run_with(1);
    let three = run_with(3);
    assert_eq!(one.report.to_csv_string(), three.report.to_csv_string());
    assert_eq!(one.report.coupling_digest, three.report.coupling_digest);
    assert_eq!(
        one.report.to_csv_string(),
        run_with(1).report.to_csv_string()
    );
    let ids: Vec<u64> = three.samples.iter().map(|s| s.sample_id).collect();
    assert_eq!(ids, (0..12).collect::<Vec<_>>());
}

#[test]
fn every_level_consumes_the_same_path() {
    let mut cfg = base(ExperimentKind::McStrong, SigmaSpec::Constant { value: 0.5 });
    cfg.n_samples = 4;
    let out = run_study(&cfg).unwrap();
    for s in &out.samples {
        assert!(s.path_digest.is_some());
        assert_eq!(s.level_digests.len(), 3);
        assert!(s.level_digests.iter().all(|d| *d == s.path_digest));
    }
    let distinct: std::collections::BTreeSet<_> =
        out.samples.iter().map(|s| s.path_digest.clone()).collect();
    assert_eq!(distinct.len(), 4);
}

#[test]
fn standard_error_shrinks_like_inverse_root_m() {
    let mut cfg = base(ExperimentKind::McStrong, SigmaSpec::Constant { value: 1.0 });
    cfg.ladder = vec![4, 8];
    cfg.n_samples = 500;
    let small = mc_strong(&cfg).unwrap();
    cfg.n_samples = 1000;
    let large = mc_strong(&cfg).unwrap();
    for (a, b) in small.levels.iter().zip(&large.levels) {
        let ratio = b.stderr / a.stderr;
        let target = 0.5f64.sqrt();
        assert!((ratio / target - 1.0).abs() <= 0.2, "ratio {ratio}");
    }
}

#[test]
fn rms_of_identical_values_has_zero_spread() {
    let (rms, se) = rms_with_stderr(&[0.04; 10], true);
    assert!((rms - 0.2).abs() < 1e-15);
    assert_eq!(se, 0.0);
    let (_, se) = rms_with_stderr(&[0.01, 0.09], false);
    assert_eq!(se, 0.0);
}

#[test]
fn csv_layout_is_fixed() {
    let cfg = base(ExperimentKind::ValidateDeterministic, SigmaSpec::Zero);
    let report = validate_deterministic(&cfg).unwrap();
    let csv = report.to_csv_string();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(RESULTS_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    assert_eq!(row[0], "0");
    // 17 significant digits in exponent form
    assert_eq!(row[1], "2.5000000000000000e-1");
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn json_configs_parse_and_validate() {
    let text = r#"{
        "kind": "mc-strong",
        "scheme": {
            "alpha": 0.7, "t_final": 0.25, "k_steps": 64, "n_cells": 8,
            "covariance": {"kind": "power_law", "n_modes": 16, "decay": 2.0},
            "sigma": {"kind": "linear", "c": 1.0},
            "u0": {"kind": "sine_modes", "modes": [{"j": 1, "coef": 0.7071067811865476}]}
        },
        "ladder": [4, 8, 16],
        "reference": {"kind": "overkill", "n_cells": 64},
        "n_samples": 10,
        "master_seed": 5
    }"#;
    let cfg = ExperimentConfig::from_json_slice(text.as_bytes()).unwrap();
    assert_eq!(cfg.axis(), RefineAxis::Space);
    assert_eq!(cfg.scheme.mesh.n_cells(), 8);
    let again = ExperimentConfig::from_json_slice(cfg.to_json_pretty().as_bytes()).unwrap();
    assert_eq!(cfg, again);

    let unknown = text.replace("\"master_seed\"", "\"mastr_seed\"");
    assert!(matches!(
        ExperimentConfig::from_json_slice(unknown.as_bytes()),
        Err(Error::Json(_))
    ));
    let not_nested = text.replace("[4, 8, 16]", "[4, 6, 16]");
    assert!(ExperimentConfig::from_json_slice(not_nested.as_bytes()).is_err());
    let coarse_ref = text.replace("\"n_cells\": 64", "\"n_cells\": 16");
    assert!(ExperimentConfig::from_json_slice(coarse_ref.as_bytes()).is_err());
    let oracle_mult = text
        .replace(r#", "n_cells": 64"#, "")
        .replace("overkill", "oracle");
    assert!(ExperimentConfig::from_json_slice(oracle_mult.as_bytes()).is_err());
    for junk in [&b""[..], b"{", b"[]", b"null", b"{\"kind\": 3}"] {
        assert!(ExperimentConfig::from_json_slice(junk).is_err());
    }
}

#[test]
fn time_refinement_against_overkill() {
    let mut cfg = base(ExperimentKind::ConvergeTime, SigmaSpec::Zero);
    cfg.ladder = vec![4, 8, 16];
    cfg.reference = Reference::Overkill {
        n_cells: None,
        k_steps: Some(256),
    };
    let report = run_study(&cfg).unwrap().report;
    assert_eq!(report.axis, RefineAxis::Time);
    let errs = report.errors();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(report.fitted_slope.unwrap() > 0.5);
}

#[test]
fn solve_and_manifest() {
    let cfg = base(ExperimentKind::Solve, SigmaSpec::Sine { amplitude: 0.3 });
    let (traj, path) = solve(&cfg).unwrap();
    assert_eq!(traj.len(), 17);
    let path = path.unwrap();
    assert_eq!(path.seed(), 77);
    assert_eq!(path.sample_id(), 0);

    let dir = std::env::temp_dir().join(format!("subdiff-harness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("abc.txt");
    std::fs::write(&file, b"abc").unwrap();
    let digest = OutputDigest::of_file(&file).unwrap();
    assert_eq!(
        digest.sha256,
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    let manifest = ManifestBuilder::start().finish(&cfg, 2, vec![digest], None);
    assert_eq!(manifest.command, "solve");
    assert_eq!(manifest.master_seed, 77);
    assert_eq!(manifest.workers, 2);
    assert!(manifest.truncated_trace_fraction.unwrap() > 0.9);
    let json = serde_json::to_string(&manifest).unwrap();
    assert!(json.contains("\"seed_rule\""));
    std::fs::remove_dir_all(&dir).unwrap();
}
