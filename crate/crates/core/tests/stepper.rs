use nalgebra::{DMatrix, DVector};
use subdiff_core::fem::{FemOperators, Mesh1D};
use subdiff_core::linalg::SymTridiag;
use subdiff_core::noise::{CovarianceSpec, NoiseAssembler, SigmaSpec, WienerPath};
use subdiff_core::stepper::{
    run, run_backward_euler, strong_error_at_t, InitialCondition, SchemeConfig, SchemeState,
};
use subdiff_core::weights::GmmpWeights;
use subdiff_core::Error;

fn config(alpha: f64, n_cells: usize, k_steps: usize, u0: InitialCondition) -> SchemeConfig {
    SchemeConfig {
        alpha,
        t_final: 1.0,
        k_steps,
        mesh: Mesh1D::new(n_cells).unwrap(),
        covariance: CovarianceSpec::PowerLaw {
            n_modes: 8,
            decay: 2.0,
        },
        sigma: SigmaSpec::Zero,
        u0,
    }
}

/// Fixed rough data with no particular structure.
fn rough(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((i as f64 * 12.9898).sin() * 43_758.545).fract())
        .collect()
}

fn dense(a: &SymTridiag) -> DMatrix<f64> {
    let n = a.n();
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => a.diag()[i],
        1 => a.off()[i.min(j)],
        _ => 0.0,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn first_step_solves_resolvent_equation() {
    // b_1 - ω_1 = 1, so (M + τ^α S) u¹ = M u⁰
    for &alpha in &[0.2, 0.5, 0.9] {
        let cfg = config(alpha, 24, 10, InitialCondition::Nodal { values: rough(23) });
        let mut state = SchemeState::init(&cfg).unwrap();
        state.step(None).unwrap();
        let ops = state.operators();
        let ta = cfg.tau().powf(alpha);
        let (u0, u1) = (state.solution(0), state.solution(1));
        let lhs: Vec<f64> = ops
            .mass()
            .mul(u1)
            .iter()
            .zip(ops.stiffness().mul(u1))
            .map(|(m, s)| m + ta * s)
            .collect();
        let rhs = ops.mass().mul(u0);
        let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * scale, "alpha={alpha}");
    }
}

#[test]
fn nodal_initial_data_is_reproduced() {
    let values = rough(15);
    let cfg = config(
        0.5,
        16,
        2,
        InitialCondition::Nodal {
            values: values.clone(),
        },
    );
    let state = SchemeState::init(&cfg).unwrap();
    assert!(max_abs_diff(state.solution(0), &values) < 1e-13);
}

#[test]
fn backward_euler_limit_matches_hand_written_scheme() {
    let mut cfg = config(0.5, 16, 32, InitialCondition::Bump { amplitude: 1.0 });
    cfg.sigma = SigmaSpec::Linear { c: 0.8 };
    let path = WienerPath::sample(&cfg.covariance, 64, 1.0, 17, 0).unwrap();
    let traj = run_backward_euler(&cfg, Some(&path)).unwrap();

    let ops = FemOperators::assemble(cfg.mesh);
    let tau = cfg.tau();
    let m = dense(ops.mass());
    let lu = (&m + dense(ops.stiffness()) * tau).lu();
    let noise = NoiseAssembler::new(cfg.mesh, &cfg.covariance).unwrap();
    let incr = path.increments_for(cfg.k_steps).unwrap();
    let mut u = ops.l2_project(|x| cfg.u0.eval(&cfg.mesh, x)).into_inner();
    for n in 0..cfg.k_steps {
        let dw: Vec<f64> = (0..incr.n_modes()).map(|j| incr.mode(j)[n]).collect();
        let load = noise.load(&u, &cfg.sigma, &dw).unwrap();
        let rhs = &m * DVector::from_vec(u.clone()) + DVector::from_vec(load);
        u = lu.solve(&rhs).unwrap().iter().copied().collect();
        let got = traj.state(n + 1);
        let scale = u.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        assert!(max_abs_diff(got, &u) <= 1e-12 * scale, "step {}", n + 1);
    }
}

#[test]
fn discrete_eigenmode_follows_scalar_recursion() {
    let mesh = Mesh1D::new(32).unwrap();
    let ops = FemOperators::assemble(mesh);
    let pairs = ops.generalized_eigs(5).unwrap();
    let alpha = 0.6;
    let k = 20;
    for p in [&pairs[0], &pairs[4]] {
        let cfg = config(
            alpha,
            32,
            k,
            InitialCondition::Nodal {
                values: p.phi.to_vec(),
            },
        );
        let traj = run(&cfg, None).unwrap();
        let ta = cfg.tau().powf(alpha);
        // u¹ = u⁰ / (1 + τ^α λ_h)
        let first: Vec<f64> = p.phi.iter().map(|v| v / (1.0 + ta * p.lambda)).collect();
        assert!(max_abs_diff(traj.state(1), &first) < 1e-12);

        let w = GmmpWeights::new(alpha, k).unwrap();
        let mut c = vec![1.0];
        for n in 0..k {
            let mut acc = w.b()[n + 1];
            for kk in 1..=n + 1 {
                acc -= w.omega()[kk] * c[n + 1 - kk];
            }
            c.push(acc / (1.0 + ta * p.lambda));
        }
        for (n, cn) in c.iter().enumerate() {
            let expect: Vec<f64> = p.phi.iter().map(|v| cn * v).collect();
            assert!(max_abs_diff(traj.state(n), &expect) < 1e-11, "step {n}");
        }
    }
}

#[test]
fn deterministic_energy_decays() {
    for &alpha in &[0.3, 0.5, 0.7] {
        let cfg = config(alpha, 32, 64, InitialCondition::sin_pi());
        let traj = run(&cfg, None).unwrap();
        let ops = FemOperators::assemble(cfg.mesh);
        let norms: Vec<f64> = (0..traj.len()).map(|m| ops.m_norm(traj.state(m))).collect();
        for w in norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14), "alpha={alpha}");
        }
        assert!(norms[traj.len() - 1] < norms[0]);
    }
}

#[test]
fn zero_sigma_ignores_noise_configuration() {
    let base = config(0.4, 16, 16, InitialCondition::Bump { amplitude: 2.0 });
    let plain = run(&base, None).unwrap();
    let mut wide = base.clone();
    wide.covariance = CovarianceSpec::PowerLaw {
        n_modes: 16,
        decay: 3.0,
    };
    let path = WienerPath::sample(&wide.covariance, 32, 1.0, 5, 0).unwrap();
    let with_path = run(&wide, Some(&path)).unwrap();
    assert_eq!(plain, with_path);
}

#[test]
fn runs_are_deterministic_for_a_fixed_path() {
    let mut cfg = config(0.5, 16, 16, InitialCondition::sin_pi());
    cfg.sigma = SigmaSpec::Sine { amplitude: 0.5 };
    let path = WienerPath::sample(&cfg.covariance, 64, 1.0, 123, 9).unwrap();
    let a = run(&cfg, Some(&path)).unwrap();
    let b = run(&cfg, Some(&path)).unwrap();
    assert_eq!(a, b);
    let other = WienerPath::sample(&cfg.covariance, 64, 1.0, 123, 10).unwrap();
    assert_ne!(a, run(&cfg, Some(&other)).unwrap());
}

#[test]
fn path_must_match_the_configuration() {
    let mut cfg = config(0.5, 8, 8, InitialCondition::sin_pi());
    cfg.sigma = SigmaSpec::Constant { value: 1.0 };
    let short = WienerPath::sample(&cfg.covariance, 16, 0.5, 1, 0).unwrap();
    assert!(run(&cfg, Some(&short)).is_err());
    let few_modes = WienerPath::sample(
        &CovarianceSpec::PowerLaw {
            n_modes: 4,
            decay: 2.0,
        },
        16,
        1.0,
        1,
        0,
    )
    .unwrap();
    assert!(matches!(
        run(&cfg, Some(&few_modes)),
        Err(Error::LengthMismatch { .. })
    ));
    let odd = WienerPath::sample(&cfg.covariance, 12, 1.0, 1, 0).unwrap();
    assert!(matches!(
        run(&cfg, Some(&odd)),
        Err(Error::Divisibility { .. })
    ));
}

#[test]
fn strong_error_between_trajectories() {
    let coarse = run(&config(0.5, 8, 16, InitialCondition::sin_pi()), None).unwrap();
    assert_eq!(strong_error_at_t(&coarse, &coarse).unwrap(), 0.0);
    let fine = run(&config(0.5, 16, 16, InitialCondition::sin_pi()), None).unwrap();
    let d = strong_error_at_t(&coarse, &fine).unwrap();
    assert!(d > 0.0 && d < 1e-2, "{d}");
    assert_eq!(d, strong_error_at_t(&fine, &coarse).unwrap());
    let mut early = config(0.5, 8, 16, InitialCondition::sin_pi());
    early.t_final = 0.5;
    let early = run(&early, None).unwrap();
    assert!(strong_error_at_t(&coarse, &early).is_err());
}

#[test]
fn trajectory_csv_keeps_final_row() {
    let traj = run(&config(0.5, 4, 10, InitialCondition::sin_pi()), None).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf, 4).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x_1,x_2,x_3");
    // steps 0, 4, 8 and the final step 10
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("1.0000000000000000e0,"));
}

#[test]
fn zero_is_a_fixed_point_under_linear_noise() {
    let mut cfg = config(0.5, 16, 32, InitialCondition::zero());
    cfg.sigma = SigmaSpec::Linear { c: 2.0 };
    let path = WienerPath::sample(&cfg.covariance, 32, 1.0, 3, 0).unwrap();
    let traj = run(&cfg, Some(&path)).unwrap();
    for m in 0..traj.len() {
        assert!(traj.state(m).iter().all(|v| *v == 0.0));
    }
}

/// Zero-step trajectory holding the given nodal values.
fn frozen(n_cells: usize, values: Vec<f64>) -> subdiff_core::stepper::Trajectory {
    let cfg = config(0.5, n_cells, 1, InitialCondition::Nodal { values });
    SchemeState::init(&cfg).unwrap().into_trajectory()
}

#[test]
fn shifted_state_distance_is_p1_norm_of_shift() {
    let base = rough(9);
    let delta: Vec<f64> = rough(12)[3..].to_vec();
    let shifted: Vec<f64> = base.iter().zip(&delta).map(|(u, d)| u + d).collect();
    let d = strong_error_at_t(&frozen(10, base), &frozen(10, shifted)).unwrap();
    // fine midpoint quadrature of the P1 interpolant of δ
    let (h, sub) = (0.1, 2000);
    let mut sum = 0.0;
    for c in 0..10 {
        let l = if c == 0 { 0.0 } else { delta[c - 1] };
        let r = if c == 9 { 0.0 } else { delta[c] };
        for s in 0..sub {
            let xi = (s as f64 + 0.5) / sub as f64;
            let v = l * (1.0 - xi) + r * xi;
            sum += v * v * h / sub as f64;
        }
    }
    assert!((d - sum.sqrt()).abs() < 1e-7, "{d} vs {}", sum.sqrt());
}

#[test]
fn strong_error_agrees_with_oracle_error() {
    use subdiff_core::oracle::{exact_deterministic, SpectralField};
    let cfg = config(0.7, 16, 32, InitialCondition::sin_pi());
    let traj = run(&cfg, None).unwrap();
    let u0 = SpectralField::new(0.7, vec![(1, std::f64::consts::FRAC_1_SQRT_2)]).unwrap();
    let exact = exact_deterministic(0.7, &u0, 1.0).unwrap();
    let e_oracle = exact.l2_error(&cfg.mesh, traj.final_state()).unwrap();
    // the exact field's interpolant on h = 1/2048 is within ~1e-7 of it in L2
    let fine = Mesh1D::new(2048).unwrap();
    let e_p1 = strong_error_at_t(
        &frozen(16, traj.final_state().to_vec()),
        &frozen(2048, exact.nodal(&fine)),
    )
    .unwrap();
    assert!((e_oracle - e_p1).abs() < 1e-6, "{e_oracle} vs {e_p1}");
}
