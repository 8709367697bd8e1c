use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::SurfaceGrid;
use crate::error::{Error, Result};
use crate::linalg::{
    axpy4, contract_christoffel, inner, inverse4, scale4, Christoffel, Mat4, Sym2, Vec4,
};
use crate::spacetime::SpacetimeModel;
use crate::sphere::{Derivatives, SphereBasis};
use crate::Real;

/// Relative admissibility threshold: `ε_adm = ADM_FRACTION · mean ⟨H⃗, H⃗⟩`.
pub const ADM_FRACTION: f64 = 1e-6;

/// Orthonormal frame of the normal bundle aligned with the mean curvature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFrame<T> {
    /// Outward spacelike unit normal `-H⃗/|H⃗|`.
    pub nu_h: Vec<Vec4<T>>,
    /// Future timelike unit normal orthogonal to `nu_h`.
    pub nu_perp: Vec<Vec4<T>>,
}

/// Outcome of [`admissibility_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport<T> {
    pub pass: bool,
    pub min: T,
    pub min_node: (usize, usize),
    pub threshold: T,
}

/// `pass` iff `min ⟨H⃗, H⃗⟩ > eps_adm`; `n_phi` locates the minimizing node.
pub fn admissibility_check<T: Real>(
    h_sq: &[T],
    n_phi: usize,
    eps_adm: T,
) -> AdmissibilityReport<T> {
    let (mut min, mut at) = (T::infinity(), 0);
    for (n, &v) in h_sq.iter().enumerate() {
        // NaN counts as a violation
        if !(v >= min) {
            min = v;
            at = n;
        }
    }
    AdmissibilityReport {
        pass: min > eps_adm,
        min,
        min_node: (at / n_phi, at % n_phi),
        threshold: eps_adm,
    }
}

/// Default `ε_adm` for a sampled `⟨H⃗, H⃗⟩` field.
pub fn default_eps_adm<T: Real>(h_sq: &[T]) -> T {
    let mean = h_sq.iter().copied().sum::<T>() / T::of(h_sq.len().max(1));
    T::lit(ADM_FRACTION) * mean.max(T::zero())
}

/// Tangents, induced metric and vector-valued second fundamental form.
struct Embedded<T> {
    metric4: Vec<Mat4<T>>,
    christoffel: Vec<Christoffel<T>>,
    tangents: Vec<[Vec4<T>; 2]>,
    metric: Vec<Sym2<T>>,
    metric_inv: Vec<Sym2<T>>,
    second_fundamental: Vec<[Vec4<T>; 3]>,
    mean_curvature: Vec<Vec4<T>>,
}

/// Normal part `V - h^{cd} ⟨V, E_c⟩ E_d`.
fn normal_part<T: Real>(g: &Mat4<T>, e: &[Vec4<T>; 2], hinv: &Sym2<T>, v: &Vec4<T>) -> Vec4<T> {
    let a0 = inner(g, v, &e[0]);
    let a1 = inner(g, v, &e[1]);
    let c0 = hinv.tt * a0 + hinv.tp * a1;
    let c1 = hinv.tp * a0 + hinv.pp * a1;
    let mut out = *v;
    for k in 0..4 {
        out[k] -= c0 * e[0][k] + c1 * e[1][k];
    }
    out
}

fn embed<T: Real>(grid: &SurfaceGrid<T>, model: &SpacetimeModel<T>) -> Result<Embedded<T>> {
    let basis = grid.basis();
    let n_phi = basis.n_phi();
    let comps: Vec<Derivatives<T>> = (0..4)
        .map(|c| {
            let f: Vec<T> = grid.events().iter().map(|e| e[c]).collect();
            basis.derivatives2(&f)
        })
        .collect();
    let nodes: Vec<_> = (0..grid.len())
        .into_par_iter()
        .map(|n| -> Result<_> {
            let p = grid.events()[n];
            let g = model.metric_at(&p)?;
            let gamma = model.christoffel_at(&p)?;
            let et: Vec4<T> = std::array::from_fn(|c| comps[c].d_theta[n]);
            let ep: Vec4<T> = std::array::from_fn(|c| comps[c].d_phi[n]);
            let e = [et, ep];
            let h = Sym2::new(
                inner(&g, &et, &et),
                inner(&g, &et, &ep),
                inner(&g, &ep, &ep),
            );
            let hinv = match h.inverse() {
                Some(inv) if h.tt > T::zero() && h.det() > T::zero() => inv,
                _ => {
                    return Err(Error::DegenerateInducedMetric {
                        i: n / n_phi,
                        j: n % n_phi,
                    })
                }
            };
            let pairs = [(0, 0), (0, 1), (1, 1)];
            let second: [Vec4<T>; 3] = std::array::from_fn(|q| {
                let (a, b) = pairs[q];
                let raw: Vec4<T> = std::array::from_fn(|c| match q {
                    0 => comps[c].d_tt[n],
                    1 => comps[c].d_tp[n],
                    _ => comps[c].d_pp[n],
                });
                let nabla = axpy4(&raw, T::one(), &contract_christoffel(&gamma, &e[a], &e[b]));
                normal_part(&g, &e, &hinv, &nabla)
            });
            let two = T::lit(2.0);
            let hvec: Vec4<T> = std::array::from_fn(|k| {
                hinv.tt * second[0][k] + two * hinv.tp * second[1][k] + hinv.pp * second[2][k]
            });
            Ok((g, gamma, e, h, hinv, second, hvec))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Embedded {
        metric4: Vec::with_capacity(nodes.len()),
        christoffel: Vec::with_capacity(nodes.len()),
        tangents: Vec::with_capacity(nodes.len()),
        metric: Vec::with_capacity(nodes.len()),
        metric_inv: Vec::with_capacity(nodes.len()),
        second_fundamental: Vec::with_capacity(nodes.len()),
        mean_curvature: Vec::with_capacity(nodes.len()),
    };
    for (g, gamma, e, h, hinv, second, hvec) in nodes {
        out.metric4.push(g);
        out.christoffel.push(gamma);
        out.tangents.push(e);
        out.metric.push(h);
        out.metric_inv.push(hinv);
        out.second_fundamental.push(second);
        out.mean_curvature.push(hvec);
    }
    Ok(out)
}

/// `⟨H⃗, H⃗⟩` at every node, without requiring admissibility.
pub fn mean_curvature_sq<T: Real>(
    grid: &SurfaceGrid<T>,
    model: &SpacetimeModel<T>,
) -> Result<Vec<T>> {
    let emb = embed(grid, model)?;
    Ok(emb
        .mean_curvature
        .iter()
        .zip(&emb.metric4)
        .map(|(h, g)| inner(g, h, h))
        .collect())
}

/// Every per-node quantity of an admissible surface used by the mass and
/// variation formulas. Components of 4-vectors are in the chart basis,
/// surface tensors in the `(θ, φ)` coordinate basis.
#[derive(Debug, Clone)]
pub struct ExtrinsicData<T> {
    basis: Arc<SphereBasis<T>>,
    pub events: Vec<Vec4<T>>,
    /// Spacetime metric, connection and Einstein tensor at each node.
    pub metric4: Vec<Mat4<T>>,
    pub christoffel: Vec<Christoffel<T>>,
    pub einstein: Vec<Mat4<T>>,
    /// `[∂_θ F, ∂_φ F]`.
    pub tangents: Vec<[Vec4<T>; 2]>,
    pub metric: Vec<Sym2<T>>,
    pub metric_inv: Vec<Sym2<T>>,
    /// Quadrature weight times area density: `∫ f dA ≈ Σ f · area_density`.
    pub area_density: Vec<T>,
    pub total_area: T,
    /// `II⃗_θθ, II⃗_θφ, II⃗_φφ`.
    pub second_fundamental: Vec<[Vec4<T>; 3]>,
    pub mean_curvature: Vec<Vec4<T>>,
    /// `H = |H⃗|`.
    pub h: Vec<T>,
    pub frame: NormalFrame<T>,
    pub ii_r: Vec<Sym2<T>>,
    pub ii_t: Vec<Sym2<T>>,
    pub ring_ii_r: Vec<Sym2<T>>,
    pub ring_ii_t: Vec<Sym2<T>>,
    /// `α_H` components `(α_θ, α_φ)`.
    pub alpha_h: Vec<[T; 2]>,
    pub gauss_k: Vec<T>,
    pub eps_adm: T,
}

impl<T: Real> ExtrinsicData<T> {
    /// Computes the geometry with the default admissibility threshold.
    pub fn compute(grid: &SurfaceGrid<T>, model: &SpacetimeModel<T>) -> Result<Self> {
        Self::compute_with(grid, model, None)
    }

    /// As [`Self::compute`] with an explicit `ε_adm`.
    pub fn compute_with(
        grid: &SurfaceGrid<T>,
        model: &SpacetimeModel<T>,
        eps_adm: Option<T>,
    ) -> Result<Self> {
        Self::compute_inner(grid, model, eps_adm, true)
    }

    /// Geometry for an intermediate integrator stage: everything except the
    /// ambient curvature terms, whose fields (`gauss_k`, `einstein`) are
    /// left empty.
    pub(crate) fn compute_stage(grid: &SurfaceGrid<T>, model: &SpacetimeModel<T>) -> Result<Self> {
        Self::compute_inner(grid, model, None, false)
    }

    fn compute_inner(
        grid: &SurfaceGrid<T>,
        model: &SpacetimeModel<T>,
        eps_adm: Option<T>,
        curvature: bool,
    ) -> Result<Self> {
        let emb = embed(grid, model)?;
        let basis = grid.basis().clone();
        let n = grid.len();
        let n_phi = basis.n_phi();
        let h_sq: Vec<T> = (0..n)
            .map(|k| {
                inner(
                    &emb.metric4[k],
                    &emb.mean_curvature[k],
                    &emb.mean_curvature[k],
                )
            })
            .collect();
        let eps = eps_adm.unwrap_or_else(|| default_eps_adm(&h_sq));
        let report = admissibility_check(&h_sq, n_phi, eps);
        if !report.pass {
            return Err(Error::NotAdmissible {
                min: report.min.as_f64(),
                i: report.min_node.0,
                j: report.min_node.1,
                threshold: eps.as_f64(),
            });
        }

        let mut nu_h = Vec::with_capacity(n);
        let mut nu_perp = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        let mut area_density = Vec::with_capacity(n);
        for k in 0..n {
            let g = &emb.metric4[k];
            let hk = h_sq[k].sqrt();
            let nh = scale4(-T::one() / hk, &emb.mean_curvature[k]);
            let ginv = inverse4(g).ok_or_else(|| Error::NotLorentzian {
                event: grid.events()[k].map(|x| x.as_f64()),
                eigenvalues: crate::linalg::symmetric_eigenvalues4(g).map(|x| x.as_f64()),
            })?;
            // -∇t is future timelike whenever t is a time function
            let up: Vec4<T> = std::array::from_fn(|mu| -ginv[mu][0]);
            let mut u = normal_part(g, &emb.tangents[k], &emb.metric_inv[k], &up);
            u = axpy4(&u, -inner(g, &u, &nh), &nh);
            let n2 = inner(g, &u, &u);
            if !(n2 < T::zero()) {
                return Err(Error::NotLorentzian {
                    event: grid.events()[k].map(|x| x.as_f64()),
                    eigenvalues: crate::linalg::symmetric_eigenvalues4(g).map(|x| x.as_f64()),
                });
            }
            let mut np = scale4(T::one() / (-n2).sqrt(), &u);
            if np[0] < T::zero() {
                np = scale4(-T::one(), &np);
            }
            nu_h.push(nh);
            nu_perp.push(np);
            h.push(hk);
            let i = k / n_phi;
            area_density
                .push(emb.metric[k].det().sqrt() / basis.sin_theta()[i] * basis.round_weight(i));
        }
        let total_area = area_density.iter().copied().sum::<T>();

        let mut ii_r = Vec::with_capacity(n);
        let mut ii_t = Vec::with_capacity(n);
        let mut ring_ii_r = Vec::with_capacity(n);
        let mut ring_ii_t = Vec::with_capacity(n);
        for k in 0..n {
            let g = &emb.metric4[k];
            let s = &emb.second_fundamental[k];
            let comp = |v: &Vec4<T>| {
                Sym2::new(
                    -inner(g, &s[0], v),
                    -inner(g, &s[1], v),
                    -inner(g, &s[2], v),
                )
            };
            let r = comp(&nu_h[k]);
            let t = comp(&nu_perp[k]);
            ring_ii_r.push(r.traceless(&emb.metric[k], &emb.metric_inv[k]));
            ring_ii_t.push(t.traceless(&emb.metric[k], &emb.metric_inv[k]));
            ii_r.push(r);
            ii_t.push(t);
        }

        let alpha_h = connection_form(
            &basis,
            &emb.metric4,
            &emb.christoffel,
            &emb.tangents,
            &nu_h,
            &nu_perp,
        );

        let events = grid.events().to_vec();
        let nodes = if curvature { n } else { 0 };
        let curv: Vec<(T, Mat4<T>)> = (0..nodes)
            .into_par_iter()
            .map(|k| -> Result<(T, Mat4<T>)> {
                let p = &events[k];
                let riem = model.riemann_at(p)?;
                let g = &emb.metric4[k];
                let e = &emb.tangents[k];
                let s = &emb.second_fundamental[k];
                // ⟨R(E_θ, E_φ)E_φ, E_θ⟩
                let mut ambient = T::zero();
                for rho in 0..4 {
                    let mut w = T::zero();
                    for lam in 0..4 {
                        w += g[rho][lam] * e[0][lam];
                    }
                    if w == T::zero() {
                        continue;
                    }
                    for sigma in 0..4 {
                        for mu in 0..4 {
                            for nu in 0..4 {
                                ambient += w
                                    * riem[rho][sigma][mu][nu]
                                    * e[1][sigma]
                                    * e[0][mu]
                                    * e[1][nu];
                            }
                        }
                    }
                }
                let gauss = (ambient + inner(g, &s[0], &s[2]) - inner(g, &s[1], &s[1]))
                    / emb.metric[k].det();
                Ok((gauss, model.einstein_at(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let (gauss_k, einstein): (Vec<T>, Vec<Mat4<T>>) = curv.into_iter().unzip();

        Ok(Self {
            basis,
            events,
            metric4: emb.metric4,
            christoffel: emb.christoffel,
            einstein,
            tangents: emb.tangents,
            metric: emb.metric,
            metric_inv: emb.metric_inv,
            area_density,
            total_area,
            second_fundamental: emb.second_fundamental,
            mean_curvature: emb.mean_curvature,
            h,
            frame: NormalFrame { nu_h, nu_perp },
            ii_r,
            ii_t,
            ring_ii_r,
            ring_ii_t,
            alpha_h,
            gauss_k,
            eps_adm: eps,
        })
    }

    pub fn basis(&self) -> &Arc<SphereBasis<T>> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn n_phi(&self) -> usize {
        self.basis.n_phi()
    }

    /// `⟨H⃗, H⃗⟩` per node.
    pub fn h_sq(&self) -> Vec<T> {
        self.h.iter().map(|&h| h * h).collect()
    }

    /// Worst deviation of the normal frame from orthonormality.
    pub fn frame_defect(&self) -> T {
        let mut worst = T::zero();
        for k in 0..self.len() {
            let g = &self.metric4[k];
            let (a, b) = (&self.frame.nu_h[k], &self.frame.nu_perp[k]);
            worst = worst
                .max((inner(g, a, a) - T::one()).abs())
                .max((inner(g, b, b) + T::one()).abs())
                .max(inner(g, a, b).abs());
        }
        worst
    }

    /// Smallest induced-metric eigenvalue relative to the round metric, per
    /// node: the squared local length scale of the parametrization.
    pub fn local_scale_sq(&self) -> Vec<T> {
        self.metric
            .iter()
            .enumerate()
            .map(|(k, h)| {
                let s = self.basis.sin_theta()[k / self.n_phi()];
                let round_inv = Sym2::new(T::one(), T::zero(), T::one() / (s * s));
                h.relative_eigenvalues(&round_inv).0
            })
            .collect()
    }

    /// Smallest ratio of induced-metric eigenvalues relative to the round
    /// metric `dθ² + sin²θ dφ²`; 1 for a conformally round parametrization.
    pub fn mesh_quality(&self) -> T {
        let mut q = T::one();
        for (k, h) in self.metric.iter().enumerate() {
            let s = self.basis.sin_theta()[k / self.n_phi()];
            let round_inv = Sym2::new(T::one(), T::zero(), T::one() / (s * s));
            let (lo, hi) = h.relative_eigenvalues(&round_inv);
            q = q.min(lo / hi);
        }
        q
    }
}

/// `α(X) = ⟨∇_X ν, ν^⊥⟩` by spectral differentiation of the Cartesian
/// components of `ν`.
pub(crate) fn connection_form<T: Real>(
    basis: &SphereBasis<T>,
    metric4: &[Mat4<T>],
    christoffel: &[Christoffel<T>],
    tangents: &[[Vec4<T>; 2]],
    nu: &[Vec4<T>],
    nu_perp: &[Vec4<T>],
) -> Vec<[T; 2]> {
    let d: Vec<Derivatives<T>> = (0..4)
        .map(|c| {
            let f: Vec<T> = nu.iter().map(|v| v[c]).collect();
            basis.derivatives(&f)
        })
        .collect();
    (0..nu.len())
        .map(|k| {
            let g = &metric4[k];
            let gamma = &christoffel[k];
            let dt: Vec4<T> = std::array::from_fn(|c| d[c].d_theta[k]);
            let dp: Vec4<T> = std::array::from_fn(|c| d[c].d_phi[k]);
            let nt = axpy4(
                &dt,
                T::one(),
                &contract_christoffel(gamma, &tangents[k][0], &nu[k]),
            );
            let np = axpy4(
                &dp,
                T::one(),
                &contract_christoffel(gamma, &tangents[k][1], &nu[k]),
            );
            [inner(g, &nt, &nu_perp[k]), inner(g, &np, &nu_perp[k])]
        })
        .collect()
}
