//! Uniformly area expanding flows `ξ⃗ = I⃗ + β I⃗⊥` integrated with RK4.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::calculus::{self, PoissonOptions, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::{inner, Vec4};
use crate::mass::{self, CertificateOptions, FrameCase, ThetaSpec};
use crate::spacetime::SpacetimeModel;
use crate::surface::{perp_rotate, ExtrinsicData, Harmonic, SurfaceGrid};
use crate::Real;

/// How `β` is chosen on each surface of the flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum BetaStrategy<T> {
    Zero,
    Constant {
        value: T,
    },
    /// Harmonic sum in the parameter sphere, carried along the flow lines.
    Prescribed {
        harmonics: Vec<Harmonic<T>>,
    },
    /// Mean-zero solution of `Δ_Σ β = -div_Σ α_H`.
    TimeFlatPoisson,
}

impl<T: Real> BetaStrategy<T> {
    /// The certificate naturally attached to the strategy: `Θ(x) = x` for
    /// the Poisson choice, the time flat test `Θ = 0` otherwise.
    pub fn default_certificate(&self) -> (FrameCase, ThetaSpec<T>) {
        match self {
            Self::TimeFlatPoisson => (FrameCase::Case1NuH, ThetaSpec::identity()),
            _ => (FrameCase::Case1NuH, ThetaSpec::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    pub ds_max: f64,
    pub max_halvings: usize,
    /// `sup|β| ≤ 1 - delta`.
    pub delta: f64,
    /// Per-step bound on `| |Σ(s+ds)| / (|Σ(s)| e^{ds}) - 1 |`.
    pub area_step_tolerance: f64,
    /// Mesh-quality floor below which a record carries a warning.
    pub mesh_floor: f64,
    /// Multiplier of the explicit stability bound, see [`stable_step`].
    pub stability_factor: f64,
    pub poisson: PoissonOptions,
    pub certificate: CertificateOptions,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            ds_max: 1e-2,
            max_halvings: 8,
            delta: 1e-3,
            area_step_tolerance: 1e-8,
            mesh_floor: 0.05,
            stability_factor: 2.5,
            poisson: PoissonOptions::default(),
            certificate: CertificateOptions::default(),
        }
    }
}

/// `β` for the surface `extr` under `strategy`. `warm` seeds the Poisson
/// iteration.
pub fn resolve_beta<T: Real>(
    strategy: &BetaStrategy<T>,
    extr: &ExtrinsicData<T>,
    options: &FlowOptions,
    warm: Option<&[T]>,
) -> Result<ScalarField<T>> {
    let n = extr.len();
    let beta = match strategy {
        BetaStrategy::Zero => vec![T::zero(); n],
        BetaStrategy::Constant { value } => vec![*value; n],
        BetaStrategy::Prescribed { harmonics } => {
            let mut b = vec![T::zero(); n];
            for h in harmonics {
                for (x, y) in b.iter_mut().zip(extr.basis().ylm(h.l, h.m)) {
                    *x += h.coefficient * y;
                }
            }
            b
        }
        BetaStrategy::TimeFlatPoisson => {
            let rhs: Vec<T> = calculus::divergence_of_form(&extr.alpha_h, extr)
                .into_iter()
                .map(|x| -x)
                .collect();
            calculus::poisson_solve_from(&rhs, extr, &options.poisson, warm)?.solution
        }
    };
    let sup = calculus::sup_norm(&beta);
    let bound = T::one() - T::lit(options.delta);
    if !(sup <= bound) {
        return Err(Error::BetaOutOfRange {
            sup: sup.as_f64(),
            bound: bound.as_f64(),
        });
    }
    Ok(beta)
}

/// `ξ⃗ = I⃗ + β I⃗⊥` with `I⃗ = -H⃗/⟨H⃗,H⃗⟩`.
pub fn flow_velocity<T: Real>(extr: &ExtrinsicData<T>, beta: &[T]) -> Result<Vec<Vec4<T>>> {
    assert_eq!(beta.len(), extr.len(), "beta does not match grid");
    (0..extr.len())
        .map(|k| {
            let hv = &extr.mean_curvature[k];
            let hh = inner(&extr.metric4[k], hv, hv);
            let i: Vec4<T> = std::array::from_fn(|c| -hv[c] / hh);
            let ip = perp_rotate(extr, k, &i)?;
            Ok(std::array::from_fn(|c| i[c] + beta[k] * ip[c]))
        })
        .collect()
}

/// Largest `|⟨-H⃗, ξ⃗⟩ - 1|` over the nodes.
pub fn normalization_defect<T: Real>(extr: &ExtrinsicData<T>, xi: &[Vec4<T>]) -> T {
    (0..extr.len())
        .map(|k| (-inner(&extr.metric4[k], &extr.mean_curvature[k], &xi[k]) - T::one()).abs())
        .fold(T::zero(), |m, x| m.max(x))
}

/// An accepted surface of the flow.
#[derive(Debug, Clone)]
pub struct FlowState<T> {
    pub s: T,
    pub grid: SurfaceGrid<T>,
    pub beta: ScalarField<T>,
    pub extr: ExtrinsicData<T>,
}

impl<T: Real> FlowState<T> {
    pub fn new(
        grid: SurfaceGrid<T>,
        model: &SpacetimeModel<T>,
        strategy: &BetaStrategy<T>,
        options: &FlowOptions,
    ) -> Result<Self> {
        let extr = ExtrinsicData::compute(&grid, model)?;
        let beta = resolve_beta(strategy, &extr, options, None)?;
        Ok(Self {
            s: T::zero(),
            grid,
            beta,
            extr,
        })
    }
}

fn displaced<T: Real>(
    grid: &SurfaceGrid<T>,
    model: &SpacetimeModel<T>,
    base: &[Vec4<T>],
    velocity: &[Vec4<T>],
    h: T,
) -> Result<SurfaceGrid<T>> {
    let events: Vec<Vec4<T>> = base
        .iter()
        .zip(velocity)
        .map(|(p, v)| std::array::from_fn(|c| p[c] + h * v[c]))
        .collect();
    band_limited_grid(grid, model, events)
}

/// Projects every chart component onto the spherical-harmonic space of the
/// basis. The grid carries more samples than the transform resolves; the
/// unresolved part is invisible to every derivative and would otherwise
/// drift without any restoring force.
fn band_limited_grid<T: Real>(
    grid: &SurfaceGrid<T>,
    model: &SpacetimeModel<T>,
    mut events: Vec<Vec4<T>>,
) -> Result<SurfaceGrid<T>> {
    let basis = grid.basis();
    for c in 0..4 {
        let f: Vec<T> = events.iter().map(|e| e[c]).collect();
        for (e, x) in events.iter_mut().zip(basis.project(&f)) {
            e[c] = x;
        }
    }
    for e in &events {
        model.check_domain(e)?;
    }
    SurfaceGrid::from_events(basis.clone(), events)
}

/// One classical RK4 update of every node along `ξ⃗`, with geometry and `β`
/// re-evaluated at every stage. Returns the new state without acceptance
/// checks.
pub fn rk4_update<T: Real>(
    state: &FlowState<T>,
    model: &SpacetimeModel<T>,
    strategy: &BetaStrategy<T>,
    ds: T,
    options: &FlowOptions,
) -> Result<FlowState<T>> {
    let base = state.grid.events();
    let half = ds / T::lit(2.0);
    let k1 = flow_velocity(&state.extr, &state.beta)?;
    let stage = |h: T, k: &[Vec4<T>]| -> Result<Vec<Vec4<T>>> {
        let grid = displaced(&state.grid, model, base, k, h)?;
        let extr = ExtrinsicData::compute_stage(&grid, model)?;
        let beta = resolve_beta(strategy, &extr, options, Some(&state.beta))?;
        flow_velocity(&extr, &beta)
    };
    let k2 = stage(half, &k1)?;
    let k3 = stage(half, &k2)?;
    let k4 = stage(ds, &k3)?;
    let two = T::lit(2.0);
    let sixth = ds / T::lit(6.0);
    let events: Vec<Vec4<T>> = (0..base.len())
        .map(|n| {
            std::array::from_fn(|c| {
                base[n][c] + sixth * (k1[n][c] + two * k2[n][c] + two * k3[n][c] + k4[n][c])
            })
        })
        .collect();
    let grid = band_limited_grid(&state.grid, model, events)?;
    let extr = ExtrinsicData::compute(&grid, model)?;
    let beta = resolve_beta(strategy, &extr, options, Some(&state.beta))?;
    Ok(FlowState {
        s: state.s + ds,
        grid,
        beta,
        extr,
    })
}

/// Step bound from the diffusive part of the flow. Linearized, the normal
/// graph obeys `u_s = H⁻² Δ_Σ u + …`, whose fastest resolved rate is about
/// `l_max(l_max+1) / min(H² ρ²)` with `ρ²` the local scale of the
/// parametrization; classical RK4 is stable for rate·ds below 2.78.
pub fn stable_step<T: Real>(extr: &ExtrinsicData<T>, factor: f64) -> T {
    let lmax = T::of(extr.basis().lmax());
    let floor = extr
        .local_scale_sq()
        .iter()
        .zip(&extr.h)
        .map(|(r2, h)| *r2 * *h * *h)
        .fold(T::infinity(), |m, x| m.min(x));
    T::lit(factor) * floor / (lmax * (lmax + T::one()))
}

/// Advances by `ds` (clamped to `ds_max` and the stability bound), halving on admissibility loss or
/// area-law violation. The returned state records the step actually taken.
pub fn step<T: Real>(
    state: &FlowState<T>,
    model: &SpacetimeModel<T>,
    strategy: &BetaStrategy<T>,
    ds: T,
    options: &FlowOptions,
) -> Result<FlowState<T>> {
    let cap = T::lit(options.ds_max).min(stable_step(&state.extr, options.stability_factor));
    let mut h = if ds < T::zero() {
        ds.max(-cap)
    } else {
        ds.min(cap)
    };
    let mut reason = String::new();
    for attempt in 0..=options.max_halvings {
        match rk4_update(state, model, strategy, h, options) {
            Ok(next) => {
                let ratio = next.extr.total_area / (state.extr.total_area * h.exp());
                let defect = (ratio - T::one()).abs();
                if defect <= T::lit(options.area_step_tolerance) {
                    return Ok(next);
                }
                reason = format!("area law defect {defect:e} at ds = {h:e}");
            }
            Err(e) => reason = e.to_string(),
        }
        if attempt < options.max_halvings {
            h = h / T::lit(2.0);
        }
    }
    Err(Error::StepFailed {
        s: state.s.as_f64(),
        retries: options.max_halvings,
        reason,
    })
}

/// One line of the trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRecord {
    pub s: f64,
    pub area: f64,
    pub m_h: f64,
    pub lines: [f64; 5],
    pub total: f64,
    /// `(m(s) - m(s - ds))/ds - ½(ṁ(s) + ṁ(s - ds))`; zero on the first record.
    pub fd_check: f64,
    pub sup_beta: f64,
    pub cond_residual: f64,
    pub f_integral: f64,
    pub mesh_q: f64,
    pub mass_derivative: f64,
    pub certificate_pass: bool,
    pub normalization_defect: f64,
    pub mesh_warning: bool,
}

pub const TRAJECTORY_HEADER: &str =
    "s,area,m_H,line1,line2,line3,line4,line5,total,fd_check,sup_beta,cond_residual,F_integral,mesh_q";

impl FlowRecord {
    pub fn csv_line(&self) -> String {
        let mut fields = vec![self.s, self.area, self.m_h];
        fields.extend(self.lines);
        fields.extend([
            self.total,
            self.fd_check,
            self.sup_beta,
            self.cond_residual,
            self.f_integral,
            self.mesh_q,
        ]);
        fields
            .iter()
            .map(|x| format!("{x:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Evaluates the record for an accepted state.
pub fn record<T: Real>(
    state: &FlowState<T>,
    strategy: &BetaStrategy<T>,
    previous: Option<&FlowRecord>,
    options: &FlowOptions,
) -> Result<FlowRecord> {
    let extr = &state.extr;
    let m = mass::hawking_mass(extr);
    let var = mass::variation_main(extr, &state.beta)?;
    let (case, theta) = strategy.default_certificate();
    let cert =
        mass::monotonicity_certificate(extr, &state.beta, &theta, case, &options.certificate)?;
    let xi = flow_velocity(extr, &state.beta)?;
    let s = state.s.as_f64();
    let m_h = m.m_h.as_f64();
    let mdot = var.mass_derivative.as_f64();
    let fd_check = match previous {
        Some(p) if s > p.s => (m_h - p.m_h) / (s - p.s) - 0.5 * (mdot + p.mass_derivative),
        _ => 0.0,
    };
    let mesh_q = extr.mesh_quality().as_f64();
    Ok(FlowRecord {
        s,
        area: m.area.as_f64(),
        m_h,
        lines: var.lines.map(|x| x.as_f64()),
        total: var.total.as_f64(),
        fd_check,
        sup_beta: calculus::sup_norm(&state.beta).as_f64(),
        cond_residual: cert.condition_residual.as_f64(),
        f_integral: cert.f_integral.as_f64(),
        mesh_q,
        mass_derivative: mdot,
        certificate_pass: cert.pass,
        normalization_defect: normalization_defect(extr, &xi).as_f64(),
        mesh_warning: mesh_q < options.mesh_floor,
    })
}

/// A flow run: every accepted record, and the error that stopped it early.
#[derive(Debug)]
pub struct Trajectory<T> {
    pub records: Vec<FlowRecord>,
    pub final_state: FlowState<T>,
    pub stopped: Option<Error>,
}

impl<T> Trajectory<T> {
    /// Smallest step-to-step change of `m_H`.
    pub fn min_mass_increment(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].m_h - w[0].m_h)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(writer);
        writeln!(w, "{TRAJECTORY_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_line())?;
        }
        w.flush()
    }
}

/// Flows from `grid` up to `s_max` with nominal step `ds`. `on_record` is
/// called for every accepted state (e.g. to stream the CSV). A step failure
/// ends the run with the partial trajectory and the error in `stopped`.
pub fn run<T: Real>(
    grid: SurfaceGrid<T>,
    model: &SpacetimeModel<T>,
    strategy: &BetaStrategy<T>,
    s_max: T,
    ds: T,
    options: &FlowOptions,
    mut on_record: impl FnMut(&FlowRecord, &FlowState<T>),
) -> Result<Trajectory<T>> {
    let mut state = FlowState::new(grid, model, strategy, options)?;
    let first = record(&state, strategy, None, options)?;
    on_record(&first, &state);
    let mut records = vec![first];
    let eps = T::lit(1e-12) * s_max.abs().max(T::one());
    // once a step had to be halved, later steps start from the reduced size
    let mut nominal = ds;
    // a stability bound this far below the initial one means the surface is
    // degenerating (e.g. backward-parabolic growth of a time perturbation)
    let initial = stable_step(&state.extr, options.stability_factor);
    let floor = initial / T::lit(2f64.powi(options.max_halvings as i32));
    while state.s < s_max - eps {
        let cap = stable_step(&state.extr, options.stability_factor);
        if cap < floor {
            return Ok(Trajectory {
                stopped: Some(Error::StepFailed {
                    s: state.s.as_f64(),
                    retries: 0,
                    reason: format!(
                        "stability bound collapsed to {:.3e} (initially {:.3e})",
                        cap.as_f64(),
                        initial.as_f64()
                    ),
                }),
                records,
                final_state: state,
            });
        }
        let h = nominal.min(s_max - state.s);
        let next = match step(&state, model, strategy, h, options) {
            Ok(next) => next,
            Err(e) => {
                return Ok(Trajectory {
                    records,
                    final_state: state,
                    stopped: Some(e),
                })
            }
        };
        let rec = match record(&next, strategy, records.last(), options) {
            Ok(r) => r,
            Err(e) => {
                return Ok(Trajectory {
                    records,
                    final_state: next,
                    stopped: Some(e),
                })
            }
        };
        let taken = next.s - state.s;
        let cap = T::lit(options.ds_max).min(cap);
        if taken < h.min(cap) * T::lit(0.75) {
            nominal = taken;
        }
        on_record(&rec, &next);
        records.push(rec);
        state = next;
    }
    Ok(Trajectory {
        records,
        final_state: state,
        stopped: None,
    })
}

/// Central difference `[m_H(Σ(+ds)) - m_H(Σ(-ds))] / 2ds` from single RK4
/// steps of the flow in each direction.
pub fn fd_mass_derivative<T: Real>(
    state: &FlowState<T>,
    model: &SpacetimeModel<T>,
    strategy: &BetaStrategy<T>,
    ds: T,
    options: &FlowOptions,
) -> Result<T> {
    let plus = rk4_update(state, model, strategy, ds, options)?;
    let minus = rk4_update(state, model, strategy, -ds, options)?;
    let mp = mass::hawking_mass(&plus.extr).m_h;
    let mm = mass::hawking_mass(&minus.extr).m_h;
    Ok((mp - mm) / (T::lit(2.0) * ds))
}
