use std::f64::consts::PI;

use hflow_core::calculus::{self, PoissonOptions};
use hflow_core::mass::{
    bhms_report, frame_angle, hawking_mass, monotonicity_certificate, null_frame_u,
    variation_cylinder, variation_main, variation_plane, CertificateOptions, FrameCase, ThetaSpec,
};
use hflow_core::spacetime::SpacetimeModel;
use hflow_core::surface::{rotated_frame, ExtrinsicData, Harmonic, SurfaceFamily, SurfaceGrid};
use hflow_core::Error;

fn extr(
    family: &SurfaceFamily<f64>,
    model: &SpacetimeModel<f64>,
    nt: usize,
    np: usize,
) -> ExtrinsicData<f64> {
    let grid = SurfaceGrid::build(family, model, nt, np).unwrap();
    ExtrinsicData::compute(&grid, model).unwrap()
}

fn round(r: f64) -> SurfaceFamily<f64> {
    SurfaceFamily::RoundSphere { radius: r }
}

fn bumpy(radius: f64) -> SurfaceFamily<f64> {
    SurfaceFamily::RadialGraph {
        radius,
        harmonics: vec![
            Harmonic::new(2, 1, 0.15),
            Harmonic::new(3, -2, 0.1),
            Harmonic::new(1, 0, 0.05),
        ],
    }
}

fn twisted(radius: f64) -> SurfaceFamily<f64> {
    SurfaceFamily::TimePerturbed {
        base: Box::new(bumpy(radius)),
        harmonics: vec![Harmonic::new(2, 2, 0.1), Harmonic::new(1, 1, 0.05)],
    }
}

fn profile(e: &ExtrinsicData<f64>, amp: f64) -> Vec<f64> {
    let b = e.basis();
    b.ylm(1, 1)
        .iter()
        .zip(b.ylm(2, 0))
        .map(|(x, y)| amp * (x + 0.5 * y))
        .collect()
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn round_spheres_in_minkowski_have_zero_mass() {
    let model = SpacetimeModel::minkowski();
    for r in [0.5, 1.0, 3.7] {
        let m = hawking_mass(&extr(&round(r), &model, 16, 32));
        assert!(m.m_h.abs() < 1e-10, "r = {r}: {}", m.m_h);
        assert!((m.willmore - 16.0 * PI).abs() < 1e-9);
    }
}

#[test]
fn schwarzschild_sphere_carries_the_mass() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let m = hawking_mass(&extr(&round(3.0), &model, 64, 128));
    assert!((m.m_h - 1.0).abs() < 1e-8, "{}", m.m_h);
    let model = SpacetimeModel::schwarzschild(0.4).unwrap();
    let m = hawking_mass(&extr(&round(2.5), &model, 24, 48));
    assert!((m.m_h - 0.4).abs() < 1e-8, "{}", m.m_h);
}

#[test]
fn non_round_ellipsoid_has_negative_mass() {
    let e = extr(
        &SurfaceFamily::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 1.3,
        },
        &SpacetimeModel::minkowski(),
        32,
        64,
    );
    assert!(hawking_mass(&e).m_h < 0.0);
}

#[test]
fn timelike_squiggle_has_positive_mass() {
    let model = SpacetimeModel::minkowski();
    let witness = (1..=10).map(|k| 0.05 * k as f64).find(|&eps| {
        let family = SurfaceFamily::TimePerturbed {
            base: Box::new(round(1.0)),
            harmonics: vec![Harmonic::new(2, 0, eps)],
        };
        let grid = SurfaceGrid::build(&family, &model, 32, 64).unwrap();
        ExtrinsicData::compute(&grid, &model)
            .map(|e| hawking_mass(&e).m_h > 0.0)
            .unwrap_or(false)
    });
    assert!(witness.is_some());
}

#[test]
fn every_line_vanishes_on_a_round_minkowski_sphere() {
    let e = extr(&round(2.0), &SpacetimeModel::minkowski(), 16, 32);
    let v = variation_main(&e, &vec![0.0; e.len()]).unwrap();
    assert_eq!(v.chi, 2);
    for (i, l) in v.lines.iter().enumerate() {
        assert!(l.abs() < 1e-9, "line {}: {l}", i + 1);
    }
    let p = variation_plane(&e).unwrap();
    assert!(p.total.abs() < 1e-9);
}

#[test]
fn schwarzschild_round_sphere_is_stationary() {
    let e = extr(
        &round(3.0),
        &SpacetimeModel::schwarzschild(1.0).unwrap(),
        24,
        48,
    );
    let v = variation_main(&e, &vec![0.0; e.len()]).unwrap();
    assert!(v.total.abs() < 1e-8, "{}", v.total);
}

#[test]
fn plane_and_cylinder_split_the_variation() {
    let cases = [
        (twisted(4.0), SpacetimeModel::schwarzschild(1.0).unwrap()),
        (twisted(2.0), SpacetimeModel::minkowski()),
        (bumpy(3.0), SpacetimeModel::de_sitter(10.0).unwrap()),
    ];
    for (family, model) in &cases {
        let e = extr(family, model, 24, 48);
        let beta = profile(&e, 0.4);
        let main = variation_main(&e, &beta).unwrap();
        let plane = variation_plane(&e).unwrap();
        let cyl = variation_cylinder(&e, &beta).unwrap();
        assert!((plane.total + cyl.total - main.total).abs() < 1e-10);
        let zero = variation_cylinder(&e, &vec![0.0; e.len()]).unwrap();
        assert_eq!(zero.total, 0.0);
    }
}

#[test]
fn bhms_matches_the_main_formula() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let e = extr(&twisted(4.0), &model, 32, 64);
    let beta = profile(&e, 0.4);
    let main = variation_main(&e, &beta).unwrap();
    let b = bhms_report(&e, &beta).unwrap();
    assert!(
        (b.total - main.total).abs() <= 1e-8 * main.total.abs().max(1.0),
        "{} vs {}",
        b.total,
        main.total
    );
    assert!(b.radial.u_defect < 1e-9, "{}", b.radial.u_defect);
    assert!(b.timelike.u_defect < 1e-9, "{}", b.timelike.u_defect);
    assert!((b.phi_null - 2.0).abs() < 1e-12);
}

#[test]
fn bhms_radial_theta_vanishes_on_round_spheres() {
    let e = extr(
        &round(3.0),
        &SpacetimeModel::schwarzschild(1.0).unwrap(),
        16,
        32,
    );
    let b = bhms_report(&e, &vec![0.0; e.len()]).unwrap();
    assert!(sup(b.radial.theta_t.iter().copied()) < 1e-10);
}

#[test]
fn u_is_independent_of_the_null_frame_scaling() {
    let e = extr(&twisted(3.0), &SpacetimeModel::minkowski(), 48, 96);
    let n = e.len();
    let basis = e.basis().clone();
    let lambda: Vec<f64> = basis
        .ylm(2, -1)
        .iter()
        .zip(basis.ylm(1, 0))
        .map(|(a, b)| (0.4 * a + 0.3 * b).exp())
        .collect();
    let (nr, nt) = (&e.frame.nu_h, &e.frame.nu_perp);
    let l: Vec<_> = (0..n)
        .map(|k| std::array::from_fn(|c| lambda[k] * (nr[k][c] + nt[k][c])))
        .collect();
    let kk: Vec<_> = (0..n)
        .map(|k| std::array::from_fn(|c| (nt[k][c] - nr[k][c]) / lambda[k]))
        .collect();
    // ξ = I = ν_H/H = (l/λ - λk)/(2H): A = 1/(2λH), B = -λ/(2H)
    let a: Vec<f64> = (0..n).map(|k| 1.0 / (2.0 * lambda[k] * e.h[k])).collect();
    let b: Vec<f64> = (0..n).map(|k| -lambda[k] / (2.0 * e.h[k])).collect();
    let u = null_frame_u(&e, &l, &kk, &a, &b, 0.0);
    let err = sup((0..n).flat_map(|k| [u[k][0] + e.alpha_h[k][0], u[k][1] + e.alpha_h[k][1]]));
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn time_flat_test_certificate() {
    let e = extr(&bumpy(2.0), &SpacetimeModel::minkowski(), 24, 48);
    let beta = profile(&e, 0.5);
    let c = monotonicity_certificate(
        &e,
        &beta,
        &ThetaSpec::zero(),
        FrameCase::Case1NuH,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert!(c.condition_residual < 1e-10);
    assert!(c.pass);
    assert!(c.f_integral >= -1e-8);
}

#[test]
fn poisson_beta_certificate() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let e = extr(&twisted(4.0), &model, 32, 64);
    let rhs: Vec<f64> = calculus::divergence_of_form(&e.alpha_h, &e)
        .iter()
        .map(|x| -x)
        .collect();
    let sol = calculus::poisson_solve(&rhs, &e, &PoissonOptions::default()).unwrap();
    let c = monotonicity_certificate(
        &e,
        &sol.solution,
        &ThetaSpec::identity(),
        FrameCase::Case1NuH,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert!(c.condition_residual < 1e-8, "{:e}", c.condition_residual);
    assert!(c.f_integral >= -1e-8 * c.f_scale, "{}", c.f_integral);
    assert!(c.pass);
}

#[test]
fn tanh_beta_certificate() {
    let model = SpacetimeModel::minkowski();
    let e = extr(&twisted(3.0), &model, 32, 64);
    let rhs = calculus::divergence_of_form(&e.alpha_h, &e);
    let u = calculus::poisson_solve(&rhs, &e, &PoissonOptions::default())
        .unwrap()
        .solution;
    let beta: Vec<f64> = u.iter().map(|x| x.tanh()).collect();
    let c = monotonicity_certificate(
        &e,
        &beta,
        &ThetaSpec::zero(),
        FrameCase::Case2NuXi,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert!(c.condition_residual < 1e-8, "{:e}", c.condition_residual);
    assert!(c.f_integral >= -1e-8 * c.f_scale);
    // V(V(1-x²) - 1) vanishes identically for Θ = 0
    assert!(c.v_condition_min >= -1e-9);
}

#[test]
fn decreasing_theta_is_rejected() {
    let e = extr(&round(1.0), &SpacetimeModel::minkowski(), 16, 32);
    let theta = ThetaSpec {
        coefficients: vec![0.0, -1.0],
    };
    let err = monotonicity_certificate(
        &e,
        &vec![0.0; e.len()],
        &theta,
        FrameCase::Case1NuH,
        &CertificateOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::ThetaNotMonotone { .. }));
    let err = monotonicity_certificate(
        &e,
        &vec![1.0; e.len()],
        &ThetaSpec::zero(),
        FrameCase::Case1NuH,
        &CertificateOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::BetaOutOfRange { .. }));
}

#[test]
fn case1_frame_shifts_alpha_by_the_angle() {
    let e = extr(
        &twisted(4.0),
        &SpacetimeModel::schwarzschild(1.0).unwrap(),
        48,
        96,
    );
    let beta = profile(&e, 0.4);
    let theta = ThetaSpec {
        coefficients: vec![0.1, 0.8, 0.0, 0.3],
    };
    let rot = rotated_frame(&e, &frame_angle(FrameCase::Case1NuH, &theta, &beta));
    let tb: Vec<f64> = beta.iter().map(|b| theta.value(*b)).collect();
    let d = calculus::differential(&tb, &e);
    let err = sup((0..e.len()).flat_map(|k| {
        [
            rot.alpha[k][0] - e.alpha_h[k][0] - d[k][0],
            rot.alpha[k][1] - e.alpha_h[k][1] - d[k][1],
        ]
    }));
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn sign_structure_on_time_flat_surfaces() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let e = extr(&bumpy(4.0), &model, 32, 64);
    let beta = profile(&e, 0.6);
    let v = variation_main(&e, &beta).unwrap();
    for (i, l) in v.lines[..4].iter().enumerate() {
        assert!(*l >= -1e-8, "line {} = {l}", i + 1);
    }
    assert!(v.lines[4].abs() < 1e-8);
}
