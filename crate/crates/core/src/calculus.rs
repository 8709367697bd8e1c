//! Intrinsic calculus on `(Σ, g|_Σ)`: integration, gradient, divergence,
//! Laplacian, Gauss–Bonnet topology and a Poisson solver.
//!
//! Tangent vector fields and 1-forms are stored per node as components in
//! the `(θ, φ)` coordinate basis. Those components are singular at the poles
//! of the parametrization, so every derivative is taken of a smooth scalar:
//! either the field itself or a Cartesian component of the ambient vector
//! `X^a ∂_a F`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{contract_christoffel, inner, Vec4};
use crate::surface::ExtrinsicData;
use crate::Real;

/// One value per grid node.
pub type ScalarField<T> = Vec<T>;
/// Contravariant components `(X^θ, X^φ)` per node.
pub type VectorField<T> = Vec<[T; 2]>;
/// Covariant components `(ω_θ, ω_φ)` per node.
pub type OneFormField<T> = Vec<[T; 2]>;

/// `∫_Σ f dA`.
pub fn integrate<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> T {
    assert_eq!(f.len(), extr.len(), "field does not match grid");
    f.iter().zip(&extr.area_density).map(|(&a, &w)| a * w).sum()
}

/// Area-weighted mean.
pub fn mean<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> T {
    integrate(f, extr) / extr.total_area
}

/// `∫_Σ |f| dA`.
pub fn l1_norm<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> T {
    f.iter()
        .zip(&extr.area_density)
        .map(|(&a, &w)| a.abs() * w)
        .sum()
}

/// `(∫_Σ f² dA)^{1/2}`.
pub fn l2_norm<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> T {
    f.iter()
        .zip(&extr.area_density)
        .map(|(&a, &w)| a * a * w)
        .sum::<T>()
        .sqrt()
}

pub fn sup_norm<T: Real>(f: &[T]) -> T {
    f.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Index raising `X^a = h^{ab} ω_b`.
pub fn raise<T: Real>(form: &[[T; 2]], extr: &ExtrinsicData<T>) -> VectorField<T> {
    form.iter()
        .zip(&extr.metric_inv)
        .map(|(w, hi)| [hi.tt * w[0] + hi.tp * w[1], hi.tp * w[0] + hi.pp * w[1]])
        .collect()
}

/// Index lowering `ω_a = h_{ab} X^b`.
pub fn lower<T: Real>(vector: &[[T; 2]], extr: &ExtrinsicData<T>) -> OneFormField<T> {
    vector
        .iter()
        .zip(&extr.metric)
        .map(|(x, h)| [h.tt * x[0] + h.tp * x[1], h.tp * x[0] + h.pp * x[1]])
        .collect()
}

/// `h(X, Y)` per node.
pub fn dot<T: Real>(x: &[[T; 2]], y: &[[T; 2]], extr: &ExtrinsicData<T>) -> ScalarField<T> {
    x.iter()
        .zip(y)
        .zip(&extr.metric)
        .map(|((a, b), h)| {
            h.tt * a[0] * b[0] + h.tp * (a[0] * b[1] + a[1] * b[0]) + h.pp * a[1] * b[1]
        })
        .collect()
}

/// `ω(X)` per node.
pub fn apply<T: Real>(form: &[[T; 2]], x: &[[T; 2]]) -> ScalarField<T> {
    form.iter()
        .zip(x)
        .map(|(w, v)| w[0] * v[0] + w[1] * v[1])
        .collect()
}

/// Coordinate differential `(∂_θ f, ∂_φ f)`.
pub fn differential<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> OneFormField<T> {
    let d = extr.basis().derivatives(f);
    d.d_theta
        .into_iter()
        .zip(d.d_phi)
        .map(|(a, b)| [a, b])
        .collect()
}

/// Metric gradient `∇^Σ f`.
pub fn gradient<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> VectorField<T> {
    raise(&differential(f, extr), extr)
}

/// Metric divergence `div_Σ X = h^{ab} ⟨∇_{E_a} V, E_b⟩` with `V = X^a E_a`.
pub fn divergence<T: Real>(x: &[[T; 2]], extr: &ExtrinsicData<T>) -> ScalarField<T> {
    assert_eq!(x.len(), extr.len(), "field does not match grid");
    let ambient: Vec<Vec4<T>> = x
        .iter()
        .zip(&extr.tangents)
        .map(|(c, e)| std::array::from_fn(|k| c[0] * e[0][k] + c[1] * e[1][k]))
        .collect();
    let basis = extr.basis();
    let d: Vec<_> = (0..4)
        .map(|c| {
            let f: Vec<T> = ambient.iter().map(|v| v[c]).collect();
            basis.derivatives(&f)
        })
        .collect();
    (0..x.len())
        .map(|k| {
            let g = &extr.metric4[k];
            let e = &extr.tangents[k];
            let gamma = &extr.christoffel[k];
            let hi = &extr.metric_inv[k];
            let mut cov = [[T::zero(); 2]; 2];
            for a in 0..2 {
                let partial: Vec4<T> = std::array::from_fn(|c| {
                    if a == 0 {
                        d[c].d_theta[k]
                    } else {
                        d[c].d_phi[k]
                    }
                });
                let conn = contract_christoffel(gamma, &e[a], &ambient[k]);
                let nabla: Vec4<T> = std::array::from_fn(|c| partial[c] + conn[c]);
                for b in 0..2 {
                    cov[a][b] = inner(g, &nabla, &e[b]);
                }
            }
            hi.tt * cov[0][0] + hi.tp * (cov[0][1] + cov[1][0]) + hi.pp * cov[1][1]
        })
        .collect()
}

/// `div_Σ(ω^♯)` for a 1-form.
pub fn divergence_of_form<T: Real>(form: &[[T; 2]], extr: &ExtrinsicData<T>) -> ScalarField<T> {
    divergence(&raise(form, extr), extr)
}

/// `Δ_Σ f = div_Σ(∇^Σ f)`.
pub fn laplacian<T: Real>(f: &[T], extr: &ExtrinsicData<T>) -> ScalarField<T> {
    divergence(&gradient(f, extr), extr)
}

/// Gauss–Bonnet reading of the topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerReport {
    pub chi: i64,
    /// `(1/2π) ∫ K dA`.
    pub raw: f64,
    pub gap: f64,
}

/// Largest accepted distance between `∫K/2π` and an integer.
pub const TOPOLOGY_GAP: f64 = 0.1;

pub fn euler_characteristic<T: Real>(extr: &ExtrinsicData<T>) -> Result<EulerReport> {
    let raw = (integrate(&extr.gauss_k, extr) / T::TAU()).as_f64();
    let chi = raw.round();
    let gap = (raw - chi).abs();
    if !raw.is_finite() || gap > TOPOLOGY_GAP {
        return Err(Error::AmbiguousTopology { raw, gap });
    }
    Ok(EulerReport {
        chi: chi as i64,
        raw,
        gap,
    })
}

/// Stopping rule and compatibility tolerance for [`poisson_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoissonOptions {
    /// Relative residual `‖Δu - f‖₂ / ‖f‖₂` at which iteration stops.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// `|∫ f| ≤ compat_tol · ∫ |f|` is required.
    pub compat_tol: f64,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 10_000,
            compat_tol: 1e-6,
        }
    }
}

/// Result of [`poisson_solve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonSolution<T> {
    /// Mean-zero solution of `Δ_Σ u = f`.
    pub solution: ScalarField<T>,
    pub iterations: usize,
    /// Relative residual of the iteration, which runs on the band-limited
    /// part of every field.
    pub relative_residual: T,
    /// `‖Δ_Σ u - f‖_∞` at the nodes for the mean-free part of `f`, including
    /// the aliasing error left outside the band limit.
    pub residual_inf: T,
}

fn remove_mean<T: Real>(f: &mut [T], extr: &ExtrinsicData<T>) {
    let m = mean(f, extr);
    f.iter_mut().for_each(|x| *x -= m);
}

fn weighted_dot<T: Real>(a: &[T], b: &[T], extr: &ExtrinsicData<T>) -> T {
    a.iter()
        .zip(b)
        .zip(&extr.area_density)
        .map(|((&x, &y), &w)| x * y * w)
        .sum()
}

/// Solves `Δ_Σ u = f` in the mean-zero gauge by conjugate gradients on
/// `-Δ_Σ`, preconditioned with the inverse round-sphere Laplacian scaled by
/// the conformal area factor (exact for conformally round metrics).
pub fn poisson_solve<T: Real>(
    f: &[T],
    extr: &ExtrinsicData<T>,
    options: &PoissonOptions,
) -> Result<PoissonSolution<T>> {
    poisson_solve_from(f, extr, options, None)
}

/// As [`poisson_solve`], starting from `guess` (e.g. the previous flow step).
pub fn poisson_solve_from<T: Real>(
    f: &[T],
    extr: &ExtrinsicData<T>,
    options: &PoissonOptions,
    guess: Option<&[T]>,
) -> Result<PoissonSolution<T>> {
    assert_eq!(f.len(), extr.len(), "field does not match grid");
    let total = integrate(f, extr);
    let allowed = T::lit(options.compat_tol) * l1_norm(f, extr);
    if total.abs() > allowed || !total.is_finite() {
        return Err(Error::Incompatible {
            mean: total.abs().as_f64(),
            allowed: allowed.as_f64(),
        });
    }
    let mut rhs = f.to_vec();
    remove_mean(&mut rhs, extr);
    let projected = {
        let mut p = extr.basis().project(&rhs);
        remove_mean(&mut p, extr);
        p
    };
    let n = rhs.len();
    let basis = extr.basis();
    let conformal: Vec<T> = (0..n)
        .map(|k| extr.area_density[k] / basis.round_weight(k / basis.n_phi()))
        .collect();
    let precondition = |r: &[T]| -> Vec<T> {
        let scaled: Vec<T> = r.iter().zip(&conformal).map(|(&a, &c)| a * c).collect();
        let mut z = basis.inverse_round_laplacian(&scaled);
        // -Δ z = r, so negate the round inverse
        z.iter_mut().for_each(|x| *x = -*x);
        remove_mean(&mut z, extr);
        z
    };
    let apply = |u: &[T]| -> Vec<T> {
        let lap = basis.project(&laplacian(u, extr));
        let mut a: Vec<T> = lap.into_iter().map(|x| -x).collect();
        remove_mean(&mut a, extr);
        a
    };
    // A u = b with A = -Δ, b = -f
    let b: Vec<T> = projected.iter().map(|&x| -x).collect();
    let b_norm = weighted_dot(&b, &b, extr).sqrt();
    let tol = T::attainable(options.rel_tol);
    let mut u = match guess {
        Some(g) => {
            let mut g = basis.project(g);
            remove_mean(&mut g, extr);
            g
        }
        None => vec![T::zero(); n],
    };
    if b_norm == T::zero() {
        return Ok(PoissonSolution {
            solution: vec![T::zero(); n],
            iterations: 0,
            relative_residual: T::zero(),
            residual_inf: T::zero(),
        });
    }
    let au = apply(&u);
    let mut r: Vec<T> = b.iter().zip(&au).map(|(&x, &y)| x - y).collect();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = weighted_dot(&r, &z, extr);
    let mut rel = weighted_dot(&r, &r, extr).sqrt() / b_norm;
    let mut iterations = 0;
    while rel > tol && iterations < options.max_iter {
        let ap = apply(&p);
        let pap = weighted_dot(&p, &ap, extr);
        if !(pap > T::zero()) {
            break;
        }
        let step = rz / pap;
        for k in 0..n {
            u[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        iterations += 1;
        // recompute the true residual periodically to avoid drift
        if iterations % 25 == 0 {
            let au = apply(&u);
            for k in 0..n {
                r[k] = b[k] - au[k];
            }
        }
        rel = weighted_dot(&r, &r, extr).sqrt() / b_norm;
        z = precondition(&r);
        let rz_new = weighted_dot(&r, &z, extr);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    remove_mean(&mut u, extr);
    let au = apply(&u);
    let solver_rel = b
        .iter()
        .zip(&au)
        .map(|(&x, &y)| (x - y) * (x - y))
        .zip(&extr.area_density)
        .map(|(r, &w)| r * w)
        .sum::<T>()
        .sqrt()
        / b_norm;
    if !(solver_rel <= tol) {
        return Err(Error::NoConvergence {
            iterations,
            residual: solver_rel.as_f64(),
        });
    }
    let lap = laplacian(&u, extr);
    let resid: Vec<T> = lap.iter().zip(&rhs).map(|(&a, &c)| a - c).collect();
    Ok(PoissonSolution {
        solution: u,
        iterations,
        relative_residual: solver_rel,
        residual_inf: sup_norm(&resid),
    })
}

/// Writes a scalar field as `i,j,value`.
pub fn write_field_csv<T: Real, W: Write>(writer: W, f: &[T], n_phi: usize) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "i,j,value")?;
    for (k, v) in f.iter().enumerate() {
        writeln!(w, "{},{},{:e}", k / n_phi, k % n_phi, v)?;
    }
    w.flush()
}
