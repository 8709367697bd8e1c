use hflow_core::flow::{
    fd_mass_derivative, flow_velocity, normalization_defect, resolve_beta, run, step, BetaStrategy,
    FlowOptions, FlowState, TRAJECTORY_HEADER,
};
use hflow_core::linalg::inner;
use hflow_core::mass::{hawking_mass, variation_main};
use hflow_core::spacetime::SpacetimeModel;
use hflow_core::surface::{ExtrinsicData, Harmonic, SurfaceFamily, SurfaceGrid};
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

fn profile() -> BetaStrategy<f64> {
    BetaStrategy::Prescribed {
        harmonics: vec![Harmonic::new(1, 1, 0.3), Harmonic::new(2, 0, 0.15)],
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn resolved_beta_fields() {
    let opts = FlowOptions::default();
    let e = extr(&bumpy(2.0), &SpacetimeModel::minkowski(), 24, 48);
    let b = resolve_beta(&BetaStrategy::TimeFlatPoisson, &e, &opts, None).unwrap();
    assert!(sup(b) < 1e-12);
    let b = resolve_beta(&BetaStrategy::Constant { value: 0.5 }, &e, &opts, None).unwrap();
    assert!(b.iter().all(|&x| x == 0.5));
    let too_big = BetaStrategy::Prescribed {
        harmonics: vec![Harmonic::new(0, 0, 1.2 * 2.0 * std::f64::consts::PI.sqrt())],
    };
    assert!(matches!(
        resolve_beta(&too_big, &e, &opts, None),
        Err(Error::BetaOutOfRange { .. })
    ));
}

#[test]
fn poisson_beta_solves_the_time_flat_equation() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let e = extr(&twisted(4.0), &model, 32, 64);
    let opts = FlowOptions::default();
    let b = resolve_beta(&BetaStrategy::TimeFlatPoisson, &e, &opts, None).unwrap();
    let v = variation_main(&e, &b).unwrap();
    // line 5 integrates 2β div α_H = -2β Δβ = 2|∇β|² ≥ 0
    assert!(v.lines[4] > 0.0);
    assert!(hflow_core::calculus::mean(&b, &e).abs() < 1e-12);
}

#[test]
fn velocity_of_round_sphere() {
    let r = 1.8;
    let e = extr(&round(r), &SpacetimeModel::minkowski(), 16, 32);
    let xi = flow_velocity(&e, &vec![0.0; e.len()]).unwrap();
    let err = sup((0..e.len()).flat_map(|k| {
        let nu = e.frame.nu_h[k];
        (0..4)
            .map(|c| xi[k][c] - 0.5 * r * nu[c])
            .collect::<Vec<_>>()
    }));
    assert!(err < 1e-10, "{err:e}");
    let xi = flow_velocity(&e, &vec![0.5; e.len()]).unwrap();
    for k in 0..e.len() {
        let n = inner(&e.metric4[k], &xi[k], &xi[k]);
        assert!((n - 0.75 * r * r / 4.0).abs() < 1e-10);
    }
}

#[test]
fn velocity_is_normalized() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let e = extr(&twisted(4.0), &model, 24, 48);
    let b: Vec<f64> = e.basis().ylm(2, 1).iter().map(|y| 0.6 * y).collect();
    let xi = flow_velocity(&e, &b).unwrap();
    assert!(normalization_defect(&e, &xi) < 1e-10);
}

#[test]
fn round_sphere_grows_like_sqrt_e() {
    let model = SpacetimeModel::minkowski();
    let opts = FlowOptions::default();
    let grid = SurfaceGrid::build(&round(1.3), &model, 16, 32).unwrap();
    let mut state = FlowState::new(grid, &model, &BetaStrategy::Zero, &opts).unwrap();
    let area0 = state.extr.total_area;
    for _ in 0..100 {
        state = step(&state, &model, &BetaStrategy::Zero, 0.01, &opts).unwrap();
    }
    assert!((state.s - 1.0).abs() < 1e-12);
    let expect = 1.3 * 0.5f64.exp();
    for p in state.grid.events() {
        let r = (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
        assert!((r / expect - 1.0).abs() < 1e-6);
    }
    let ratio = state.extr.total_area / (area0 * 1f64.exp());
    assert!((ratio - 1.0).abs() < 1e-8);
}

#[test]
fn schwarzschild_spheres_keep_their_mass() {
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let grid = SurfaceGrid::build(&round(3.0), &model, 16, 32).unwrap();
    let traj = run(
        grid,
        &model,
        &BetaStrategy::Zero,
        1.0,
        0.01,
        &FlowOptions::default(),
        |_, _| {},
    )
    .unwrap();
    assert!(traj.stopped.is_none());
    assert_eq!(traj.records.len(), 101);
    for r in &traj.records {
        assert!((r.m_h - 1.0).abs() < 1e-6, "s = {}: {}", r.s, r.m_h);
        assert!(r.normalization_defect < 1e-9);
    }
    assert!(traj.min_mass_increment() >= -1e-8);
}

#[test]
fn fd_oracle_agrees_with_the_main_formula() {
    let cases = [
        (bumpy(2.0), SpacetimeModel::minkowski(), BetaStrategy::Zero),
        (bumpy(2.0), SpacetimeModel::minkowski(), profile()),
        (
            twisted(4.0),
            SpacetimeModel::schwarzschild(1.0).unwrap(),
            profile(),
        ),
    ];
    let opts = FlowOptions::default();
    for (family, model, strategy) in &cases {
        let grid = SurfaceGrid::build(family, model, 24, 48).unwrap();
        let state = FlowState::new(grid, model, strategy, &opts).unwrap();
        let v = variation_main(&state.extr, &state.beta).unwrap();
        let fd = fd_mass_derivative(&state, model, strategy, 1e-3, &opts).unwrap();
        let tol = (1e-4 * fd.abs()).max(1e-6);
        assert!(
            (v.mass_derivative - fd).abs() <= tol,
            "{} vs {fd}",
            v.mass_derivative
        );
    }
}

#[test]
fn fd_oracle_on_round_spheres_vanishes() {
    let opts = FlowOptions::default();
    for (model, r) in [
        (SpacetimeModel::minkowski(), 1.0),
        (SpacetimeModel::schwarzschild(1.0).unwrap(), 3.0),
    ] {
        let grid = SurfaceGrid::build(&round(r), &model, 16, 32).unwrap();
        let state = FlowState::new(grid, &model, &BetaStrategy::Zero, &opts).unwrap();
        let fd = fd_mass_derivative(&state, &model, &BetaStrategy::Zero, 1e-3, &opts).unwrap();
        assert!(fd.abs() < 1e-6, "{fd}");
        assert!(hawking_mass(&state.extr).m_h.is_finite());
    }
}

#[test]
fn trajectory_csv_layout() {
    let model = SpacetimeModel::minkowski();
    let grid = SurfaceGrid::build(&bumpy(2.0), &model, 16, 32).unwrap();
    let mut seen = 0;
    let traj = run(
        grid,
        &model,
        &BetaStrategy::TimeFlatPoisson,
        0.05,
        0.01,
        &FlowOptions::default(),
        |_, _| seen += 1,
    )
    .unwrap();
    assert_eq!(seen, 6);
    let mut out = Vec::new();
    traj.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER);
    for l in lines {
        assert_eq!(l.split(',').count(), 14);
    }
    assert!(traj.min_mass_increment() >= -1e-8);
}

#[test]
fn step_failure_is_reported() {
    // a negative area-law tolerance rejects every step
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let grid = SurfaceGrid::build(&bumpy(4.0), &model, 16, 32).unwrap();
    let opts = FlowOptions {
        area_step_tolerance: -1.0,
        ..FlowOptions::default()
    };
    let state = FlowState::new(grid, &model, &BetaStrategy::Zero, &opts).unwrap();
    let err = step(&state, &model, &BetaStrategy::Zero, 0.01, &opts).unwrap_err();
    assert!(matches!(err, Error::StepFailed { retries: 8, .. }));
}

#[test]
fn degenerating_flow_stops() {
    // the time component of xi is backward parabolic when beta = 0
    let model = SpacetimeModel::schwarzschild(1.0).unwrap();
    let grid = SurfaceGrid::build(&twisted(4.0), &model, 16, 32).unwrap();
    let opts = FlowOptions::default();
    let traj = run(
        grid,
        &model,
        &BetaStrategy::Zero,
        1.0,
        0.01,
        &opts,
        |_, _| {},
    )
    .unwrap();
    let Some(Error::StepFailed { reason, .. }) = &traj.stopped else {
        panic!("flow ran to s = {}", traj.final_state.s);
    };
    assert!(reason.contains("stability bound"), "{reason}");
    assert!(traj.final_state.s < 0.5);
}
