use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use subdiff_core::fem::{FemOperators, Mesh1D};
use subdiff_core::linalg::SymTridiag;

fn dense(a: &SymTridiag) -> DMatrix<f64> {
    let n = a.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            a.diag()[i]
        } else if i + 1 == j {
            a.off()[i]
        } else if j + 1 == i {
            a.off()[j]
        } else {
            0.0
        }
    })
}

/// λ_j^h = (6/h²)(1 - cos jπh)/(2 + cos jπh)
fn closed_form_eigenvalue(j: usize, h: f64) -> f64 {
    let c = (j as f64 * PI * h).cos();
    6.0 / (h * h) * (1.0 - c) / (2.0 + c)
}

#[test]
fn eigenvalues_match_closed_form_and_dense_solver() {
    let mesh = Mesh1D::new(16).unwrap();
    let ops = FemOperators::assemble(mesh);
    let pairs = ops.generalized_eigs(15).unwrap();

    // dense oracle: L⁻¹ S L⁻ᵀ with M = L Lᵀ
    let m = dense(ops.mass());
    let s = dense(ops.stiffness());
    let l = m.clone().cholesky().unwrap().l();
    let linv = l.try_inverse().unwrap();
    let reduced = &linv * s * linv.transpose();
    let mut dense_vals: Vec<f64> = SymmetricEigen::new(reduced)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    dense_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());

    for (j, p) in pairs.iter().enumerate() {
        let exact = closed_form_eigenvalue(j + 1, mesh.h());
        assert!(
            (p.lambda - exact).abs() <= 1e-10 * exact,
            "j={} {} {}",
            j + 1,
            p.lambda,
            exact
        );
        assert!((p.lambda - dense_vals[j]).abs() <= 1e-9 * exact);
    }
}

#[test]
fn eigenpairs_are_m_orthonormal_with_small_residual() {
    let ops = FemOperators::assemble(Mesh1D::new(128).unwrap());
    let pairs = ops.generalized_eigs(40).unwrap();
    for (i, p) in pairs.iter().enumerate() {
        let sphi = ops.stiffness().mul(&p.phi);
        let mphi = ops.mass().mul(&p.phi);
        let res: f64 = sphi
            .iter()
            .zip(&mphi)
            .map(|(a, b)| (a - p.lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm: f64 = sphi.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * nrm, "pair {i}: residual {res}");
        for (k, q) in pairs.iter().enumerate().take(i + 1) {
            let ip = ops.m_inner(&p.phi, &q.phi);
            let target = if i == k { 1.0 } else { 0.0 };
            assert!((ip - target).abs() < 1e-10, "({i},{k}) -> {ip}");
        }
        if i > 0 {
            assert!(p.lambda > pairs[i - 1].lambda);
        }
    }
}

#[test]
fn first_eigenvalue_decreases_to_pi_squared() {
    let mut prev = f64::INFINITY;
    for n in [4, 8, 16, 32, 64, 128] {
        let ops = FemOperators::assemble(Mesh1D::new(n).unwrap());
        let l1 = ops.generalized_eigs(1).unwrap()[0].lambda;
        assert!(l1 > PI * PI && l1 < prev, "n={n} λ={l1}");
        prev = l1;
    }
    assert!((prev - PI * PI) / (PI * PI) < 1e-4);
}

#[test]
fn eigen_requests_are_checked() {
    let ops = FemOperators::assemble(Mesh1D::new(8).unwrap());
    assert!(ops.generalized_eigs(0).is_err());
    assert!(ops.generalized_eigs(8).is_err());
}

#[test]
fn shifted_solve_on_eigenmode() {
    let ops = FemOperators::assemble(Mesh1D::new(32).unwrap());
    let pairs = ops.generalized_eigs(31).unwrap();
    let tau_alpha = (1.0f64 / 256.0).powf(0.6);
    let mut worst_amplification: f64 = 0.0;
    for p in &pairs {
        let rhs = ops.mass().mul(&p.phi);
        let u = ops.solve_shifted(tau_alpha, &rhs).unwrap();
        let factor = 1.0 / (1.0 / tau_alpha + p.lambda);
        for (a, b) in u.iter().zip(p.phi.iter()) {
            assert!((a - factor * b).abs() < 1e-12 * b.abs().max(1.0));
        }
        worst_amplification = worst_amplification.max(ops.m_norm(&u));
    }
    assert!(worst_amplification <= tau_alpha * (1.0 + 1e-12));
}

#[test]
fn shifted_solve_residual() {
    let ops = FemOperators::assemble(Mesh1D::new(200).unwrap());
    let rhs: Vec<f64> = (0..199).map(|i| ((i * i) % 17) as f64 - 8.0).collect();
    let tau_alpha = 1e-3;
    let solver = ops.shifted_solver(tau_alpha).unwrap();
    let u = solver.solve(&rhs);
    let r = solver.matrix().mul(&u);
    let res: f64 = r
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let nrm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(res <= 1e-12 * nrm);
}

#[test]
fn projection_of_sine_matches_exact_factor() {
    // P_h sin(πx) = c_h · sin(πx_i) with c_h = 6(1 - cos πh)/(π²h²(2 + cos πh))
    let mesh = Mesh1D::new(64).unwrap();
    let ops = FemOperators::assemble(mesh);
    let p = ops.l2_project(|x| (PI * x).sin());
    let c_h = 1.000_200_813_739_520_8;
    for (i, v) in p.iter().enumerate() {
        let x = mesh.node(i + 1);
        assert!((v - c_h * (PI * x).sin()).abs() < 1e-11);
        // c_h - 1 = π²h²/12 + O(h⁴)
        let bound = PI * PI * mesh.h() * mesh.h() / 12.0 * 1.001;
        assert!((v - (PI * x).sin()).abs() <= bound);
    }
}

#[test]
fn projection_is_stable_and_orthogonal() {
    let mesh = Mesh1D::new(40).unwrap();
    let ops = FemOperators::assemble(mesh);
    type Case = (Box<dyn Fn(f64) -> f64>, f64);
    let battery: Vec<Case> = vec![
        (Box::new(|x: f64| (PI * x).sin()), 0.5f64.sqrt()),
        (Box::new(|x: f64| x * (1.0 - x)), (1.0f64 / 30.0).sqrt()),
        (Box::new(|_| 1.0), 1.0),
        (
            Box::new(|x: f64| (7.0 * x).cos()),
            (0.5 + (14.0f64).sin() / 28.0).sqrt(),
        ),
    ];
    for (f, l2) in &battery {
        let p = ops.l2_project(f);
        assert!(ops.m_norm(&p) <= l2 + 1e-10);
        // (f - P_h f, φ_i) = load_i - (M p)_i
        let load = ops.load_vector(f);
        let mp = ops.mass().mul(&p);
        for (a, b) in load.iter().zip(&mp) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
