//! Hawking mass, the variation formulas for uniformly area expanding flows,
//! and the divergence-condition monotonicity certificates.

use serde::{Deserialize, Serialize};

use crate::calculus::{self, OneFormField, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::{bilinear, inner, Sym2, Vec4};
use crate::surface::{rotated_frame, ExtrinsicData};
use crate::Real;

fn sixteen_pi<T: Real>() -> T {
    T::lit(16.0) * T::PI()
}

/// `√(|Σ| / (16π)³)`, the factor relating `dm_H/ds` to the bracketed
/// variation integrals.
pub fn normalization<T: Real>(extr: &ExtrinsicData<T>) -> T {
    (extr.total_area / sixteen_pi::<T>().powi(3)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassReport<T> {
    pub area: T,
    /// `∫⟨H⃗, H⃗⟩ dA`.
    pub willmore: T,
    pub m_h: T,
}

/// `m_H = √(|Σ|/16π) (1 - ∫⟨H⃗,H⃗⟩/16π)`.
pub fn hawking_mass<T: Real>(extr: &ExtrinsicData<T>) -> MassReport<T> {
    let area = extr.total_area;
    let willmore = calculus::integrate(&extr.h_sq(), extr);
    let s = sixteen_pi::<T>();
    MassReport {
        area,
        willmore,
        m_h: (area / s).sqrt() * (T::one() - willmore / s),
    }
}

/// Shared per-node ingredients of the variation formulas.
struct Ingredients<T> {
    /// `∇^Σ H / H` (vector).
    grad_log_h: Vec<[T; 2]>,
    /// `α_H^♯`.
    alpha_vec: Vec<[T; 2]>,
    div_alpha: ScalarField<T>,
    /// `G(ν_H^⊥, ν_H^⊥)` and `G(ν_H^⊥, ν_H)`.
    g_tt: ScalarField<T>,
    g_tr: ScalarField<T>,
    ring_rr: ScalarField<T>,
    ring_rt: ScalarField<T>,
    ring_tt: ScalarField<T>,
}

fn ingredients<T: Real>(extr: &ExtrinsicData<T>) -> Ingredients<T> {
    let log_h: Vec<T> = extr.h.iter().map(|h| h.ln()).collect();
    let n = extr.len();
    let mut g_tt = Vec::with_capacity(n);
    let mut g_tr = Vec::with_capacity(n);
    let mut ring_rr = Vec::with_capacity(n);
    let mut ring_rt = Vec::with_capacity(n);
    let mut ring_tt = Vec::with_capacity(n);
    for k in 0..n {
        let (nr, nt) = (&extr.frame.nu_h[k], &extr.frame.nu_perp[k]);
        g_tt.push(bilinear(&extr.einstein[k], nt, nt));
        g_tr.push(bilinear(&extr.einstein[k], nt, nr));
        let (r, t, inv) = (&extr.ring_ii_r[k], &extr.ring_ii_t[k], &extr.metric_inv[k]);
        ring_rr.push(r.contract(r, inv));
        ring_rt.push(r.contract(t, inv));
        ring_tt.push(t.contract(t, inv));
    }
    Ingredients {
        grad_log_h: calculus::gradient(&log_h, extr),
        alpha_vec: calculus::raise(&extr.alpha_h, extr),
        div_alpha: calculus::divergence_of_form(&extr.alpha_h, extr),
        g_tt,
        g_tr,
        ring_rr,
        ring_rt,
        ring_tt,
    }
}

/// Per-node integrands of lines 2 to 5 of the main variation formula.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariationIntegrands<T> {
    pub einstein: ScalarField<T>,
    pub ring: ScalarField<T>,
    pub gradient: ScalarField<T>,
    pub divergence: ScalarField<T>,
}

/// The main variation formula evaluated on a single surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport<T> {
    pub chi: i64,
    /// `4π(2-χ)`, `∫2G(-H⃗⊥, ξ⃗⊥)`, the traceless second fundamental form
    /// line, the `∇H/H`, `α_H` line and `∫2β div α_H`.
    pub lines: [T; 5],
    pub total: T,
    /// `√(|Σ|/(16π)³)`.
    pub normalization: T,
    /// `total · normalization`, i.e. `dm_H/ds`.
    pub mass_derivative: T,
    #[serde(skip)]
    pub integrands: VariationIntegrands<T>,
}

impl<T: Real> VariationReport<T> {
    /// Writes the per-node integrands as CSV.
    pub fn write_integrands_csv<W: std::io::Write>(&self, writer: W, n_phi: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let table = |e: csv::Error| Error::Table(e.to_string());
        w.write_record(["i", "j", "einstein", "ring", "gradient", "divergence"])
            .map_err(table)?;
        let f = &self.integrands;
        for k in 0..f.einstein.len() {
            w.write_record([
                (k / n_phi).to_string(),
                (k % n_phi).to_string(),
                format!("{:e}", f.einstein[k]),
                format!("{:e}", f.ring[k]),
                format!("{:e}", f.gradient[k]),
                format!("{:e}", f.divergence[k]),
            ])
            .map_err(table)?;
        }
        w.flush().map_err(|e| Error::Table(e.to_string()))
    }
}

fn check_beta_len<T: Real>(beta: &[T], extr: &ExtrinsicData<T>) {
    assert_eq!(beta.len(), extr.len(), "beta does not match grid");
}

/// `dm_H/ds / √(|Σ|/(16π)³)` for the flow `ξ⃗ = I⃗ + β I⃗⊥`, line by line.
pub fn variation_main<T: Real>(extr: &ExtrinsicData<T>, beta: &[T]) -> Result<VariationReport<T>> {
    check_beta_len(beta, extr);
    let chi = calculus::euler_characteristic(extr)?.chi;
    let ing = ingredients(extr);
    let two = T::lit(2.0);
    let n = extr.len();
    let mut f = VariationIntegrands {
        einstein: Vec::with_capacity(n),
        ring: Vec::with_capacity(n),
        gradient: Vec::with_capacity(n),
        divergence: Vec::with_capacity(n),
    };
    let glh_sq = calculus::dot(&ing.grad_log_h, &ing.grad_log_h, extr);
    let alpha_sq = calculus::dot(&ing.alpha_vec, &ing.alpha_vec, extr);
    let alpha_glh = calculus::apply(&extr.alpha_h, &ing.grad_log_h);
    for k in 0..n {
        let b = beta[k];
        // G(-H⃗⊥, ξ⃗⊥) = G(ν⊥, ν⊥ + β ν_H)
        f.einstein.push(two * (ing.g_tt[k] + b * ing.g_tr[k]));
        f.ring
            .push(ing.ring_rr[k] + two * b * ing.ring_rt[k] + ing.ring_tt[k]);
        f.gradient
            .push(two * (glh_sq[k] + two * b * alpha_glh[k] + alpha_sq[k]));
        f.divergence.push(two * b * ing.div_alpha[k]);
    }
    let line1 = T::lit(4.0) * T::PI() * T::lit((2 - chi) as f64);
    let lines = [
        line1,
        calculus::integrate(&f.einstein, extr),
        calculus::integrate(&f.ring, extr),
        calculus::integrate(&f.gradient, extr),
        calculus::integrate(&f.divergence, extr),
    ];
    let total = lines.iter().copied().sum::<T>();
    let norm = normalization(extr);
    Ok(VariationReport {
        chi,
        lines,
        total,
        normalization: norm,
        mass_derivative: total * norm,
        integrands: f,
    })
}

/// One half of the plane/cylinder split of the variation formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialVariation<T> {
    pub line1: T,
    pub einstein: T,
    pub ring: T,
    pub gradient: T,
    pub divergence: T,
    pub total: T,
}

impl<T: Real> PartialVariation<T> {
    fn assemble(line1: T, einstein: T, ring: T, gradient: T, divergence: T) -> Self {
        Self {
            line1,
            einstein,
            ring,
            gradient,
            divergence,
            total: line1 + einstein + ring + gradient + divergence,
        }
    }
}

/// `ṁ_r / √(|Σ|/(16π)³)`: the radial flow `ξ⃗_r = I⃗`.
pub fn variation_plane<T: Real>(extr: &ExtrinsicData<T>) -> Result<PartialVariation<T>> {
    let chi = calculus::euler_characteristic(extr)?.chi;
    let ing = ingredients(extr);
    let two = T::lit(2.0);
    let glh_sq = calculus::dot(&ing.grad_log_h, &ing.grad_log_h, extr);
    let alpha_sq = calculus::dot(&ing.alpha_vec, &ing.alpha_vec, extr);
    let einstein: Vec<T> = ing.g_tt.iter().map(|&g| two * g).collect();
    let ring: Vec<T> = (0..extr.len())
        .map(|k| ing.ring_rr[k] + ing.ring_tt[k])
        .collect();
    let gradient: Vec<T> = (0..extr.len())
        .map(|k| two * (glh_sq[k] + alpha_sq[k]))
        .collect();
    Ok(PartialVariation::assemble(
        T::lit(4.0) * T::PI() * T::lit((2 - chi) as f64),
        calculus::integrate(&einstein, extr),
        calculus::integrate(&ring, extr),
        calculus::integrate(&gradient, extr),
        T::zero(),
    ))
}

/// `ṁ_t / √(|Σ|/(16π)³)`: the timelike flow `ξ⃗_t = β I⃗⊥`.
pub fn variation_cylinder<T: Real>(
    extr: &ExtrinsicData<T>,
    beta: &[T],
) -> Result<PartialVariation<T>> {
    check_beta_len(beta, extr);
    let ing = ingredients(extr);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let alpha_glh = calculus::apply(&extr.alpha_h, &ing.grad_log_h);
    let n = extr.len();
    let einstein: Vec<T> = (0..n).map(|k| two * beta[k] * ing.g_tr[k]).collect();
    let ring: Vec<T> = (0..n).map(|k| two * beta[k] * ing.ring_rt[k]).collect();
    let gradient: Vec<T> = (0..n).map(|k| four * beta[k] * alpha_glh[k]).collect();
    let divergence: Vec<T> = (0..n).map(|k| two * beta[k] * ing.div_alpha[k]).collect();
    Ok(PartialVariation::assemble(
        T::zero(),
        calculus::integrate(&einstein, extr),
        calculus::integrate(&ring, extr),
        calculus::integrate(&gradient, extr),
        calculus::integrate(&divergence, extr),
    ))
}

/// `U(X) = ½(D_X A/A - D_X B/B) + (1/2φ)(⟨∇_X k⃗, l⃗⟩ - ⟨∇_X l⃗, k⃗⟩)` for
/// `ξ⃗ = A l⃗ + B k⃗`, `φ = -⟨l⃗, k⃗⟩`. The logarithmic derivatives are only
/// added where `|A|` and `|B|` exceed `cutoff`.
pub fn null_frame_u<T: Real>(
    extr: &ExtrinsicData<T>,
    l: &[Vec4<T>],
    k: &[Vec4<T>],
    a: &[T],
    b: &[T],
    cutoff: T,
) -> OneFormField<T> {
    let (kl, lk) = null_connections(extr, l, k);
    let da = calculus::differential(a, extr);
    let db = calculus::differential(b, extr);
    let half = T::lit(0.5);
    (0..extr.len())
        .map(|n| {
            let phi = -inner(&extr.metric4[n], &l[n], &k[n]);
            let mut u = [T::zero(); 2];
            for c in 0..2 {
                u[c] = (kl[n][c] - lk[n][c]) / (T::lit(2.0) * phi);
                if a[n].abs() > cutoff && b[n].abs() > cutoff {
                    u[c] += half * (da[n][c] / a[n] - db[n][c] / b[n]);
                }
            }
            u
        })
        .collect()
}

/// `(⟨∇ k⃗, l⃗⟩, ⟨∇ l⃗, k⃗⟩)` as 1-forms.
fn null_connections<T: Real>(
    extr: &ExtrinsicData<T>,
    l: &[Vec4<T>],
    k: &[Vec4<T>],
) -> (OneFormField<T>, OneFormField<T>) {
    // ⟨∇_X v, w⟩ by differentiating the Cartesian components of v
    let conn = |v: &[Vec4<T>], w: &[Vec4<T>]| -> OneFormField<T> {
        let d: Vec<_> = (0..4)
            .map(|c| {
                let f: Vec<T> = v.iter().map(|x| x[c]).collect();
                extr.basis().derivatives(&f)
            })
            .collect();
        (0..extr.len())
            .map(|n| {
                let g = &extr.metric4[n];
                let gamma = &extr.christoffel[n];
                std::array::from_fn(|a| {
                    let partial: Vec4<T> = std::array::from_fn(|c| {
                        if a == 0 {
                            d[c].d_theta[n]
                        } else {
                            d[c].d_phi[n]
                        }
                    });
                    let cov = crate::linalg::axpy4(
                        &partial,
                        T::one(),
                        &crate::linalg::contract_christoffel(gamma, &extr.tangents[n][a], &v[n]),
                    );
                    inner(g, &cov, &w[n])
                })
            })
            .collect()
    };
    (conn(k, l), conn(l, k))
}

/// BHMS decomposition for one flow direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhmsDirection<T> {
    #[serde(skip)]
    pub a: ScalarField<T>,
    #[serde(skip)]
    pub b: ScalarField<T>,
    #[serde(skip)]
    pub u: OneFormField<T>,
    #[serde(skip)]
    pub theta_t: ScalarField<T>,
    #[serde(skip)]
    pub theta_l: ScalarField<T>,
    /// `∫2G(-H⃗⊥, ξ⃗⊥)`.
    pub g_term: T,
    /// `∫16π Θᵀ`.
    pub theta_t_integral: T,
    /// `∫16π Θᴸ`.
    pub theta_l_integral: T,
    /// `-∫2 div_Σ(U) ⟨ξ⃗, -H⃗⊥⟩`.
    pub u_term: T,
    pub total: T,
    /// `max |U + α_H|` over the nodes where `U` is defined.
    pub u_defect: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhmsReport<T> {
    /// `φ = -⟨l⃗, k⃗⟩` of the fixed null frame.
    pub phi_null: T,
    pub radial: BhmsDirection<T>,
    pub timelike: BhmsDirection<T>,
    /// `ψ = ½ log|⟨ξ⃗_r, ξ⃗_r⟩| = -log H` of the radial direction.
    #[serde(skip)]
    pub psi: ScalarField<T>,
    pub g_term: T,
    pub u_term: T,
    pub total: T,
    pub mass_derivative: T,
}

/// Default threshold on `|β|` below which `U` of the timelike direction is
/// taken as the frame part only.
pub const BETA_CUTOFF: f64 = 1e-6;

/// Evaluates the BHMS form of the variation on the fixed null frame
/// `l⃗ = ν_H + ν_H⊥`, `k⃗ = -ν_H + ν_H⊥`.
pub fn bhms_report<T: Real>(extr: &ExtrinsicData<T>, beta: &[T]) -> Result<BhmsReport<T>> {
    check_beta_len(beta, extr);
    let chi = calculus::euler_characteristic(extr)?.chi;
    if chi != 2 {
        return Err(Error::TopologyMismatch { chi });
    }
    let n = extr.len();
    let (nr, nt) = (&extr.frame.nu_h, &extr.frame.nu_perp);
    let l: Vec<Vec4<T>> = (0..n)
        .map(|k| std::array::from_fn(|c| nr[k][c] + nt[k][c]))
        .collect();
    let kk: Vec<Vec4<T>> = (0..n)
        .map(|k| std::array::from_fn(|c| -nr[k][c] + nt[k][c]))
        .collect();
    let phi_null = -inner(&extr.metric4[0], &l[0], &kk[0]);
    let two = T::lit(2.0);
    let half = T::lit(0.5);

    // radial ξ⃗ = ν_H / H = (l⃗ - k⃗)/2H
    let a_r: Vec<T> = extr.h.iter().map(|&h| T::one() / (two * h)).collect();
    let b_r: Vec<T> = a_r.iter().map(|&a| -a).collect();
    let xi_r: Vec<Vec4<T>> = (0..n)
        .map(|k| std::array::from_fn(|c| a_r[k] * l[k][c] + b_r[k] * kk[k][c]))
        .collect();
    // timelike ξ⃗ = β ν⊥ / H = β (l⃗ + k⃗)/2H
    let a_t: Vec<T> = (0..n).map(|k| beta[k] / (two * extr.h[k])).collect();
    let b_t = a_t.clone();
    let xi_t: Vec<Vec4<T>> = (0..n)
        .map(|k| std::array::from_fn(|c| a_t[k] * l[k][c] + b_t[k] * kk[k][c]))
        .collect();

    let cutoff = T::lit(BETA_CUTOFF);
    let u_r = null_frame_u(extr, &l, &kk, &a_r, &b_r, T::zero());
    let u_t = null_frame_u(extr, &l, &kk, &a_t, &b_t, cutoff);

    let psi: Vec<T> = (0..n)
        .map(|k| half * inner(&extr.metric4[k], &xi_r[k], &xi_r[k]).abs().ln())
        .collect();
    let dpsi = calculus::differential(&psi, extr);
    let log_h: Vec<T> = extr.h.iter().map(|h| h.ln()).collect();
    let dlog_h = calculus::differential(&log_h, extr);
    let dbeta = calculus::differential(beta, extr);

    let form_dot = |k: usize, a: &[T; 2], b: &[T; 2]| {
        let hi = &extr.metric_inv[k];
        hi.tt * a[0] * b[0] + hi.tp * (a[0] * b[1] + a[1] * b[0]) + hi.pp * a[1] * b[1]
    };

    let direction = |xi: &[Vec4<T>],
                     a: ScalarField<T>,
                     b: ScalarField<T>,
                     u: OneFormField<T>,
                     timelike: bool|
     -> BhmsDirection<T> {
        let div_u = calculus::divergence_of_form(&u, extr);
        let mut g_field = Vec::with_capacity(n);
        let mut theta_t = Vec::with_capacity(n);
        let mut theta_l = Vec::with_capacity(n);
        let mut u_field = Vec::with_capacity(n);
        let mut defect = T::zero();
        for k in 0..n {
            let g = &extr.metric4[k];
            let hvec = &extr.mean_curvature[k];
            // -H⃗⊥ = H ν⊥ and ξ⃗⊥ by the quarter turn
            let minus_h_perp: Vec4<T> = std::array::from_fn(|c| extr.h[k] * nt[k][c]);
            let xa = inner(g, &xi[k], &nr[k]);
            let xb = -inner(g, &xi[k], &nt[k]);
            let xi_perp: Vec4<T> = std::array::from_fn(|c| xb * nr[k][c] + xa * nt[k][c]);
            g_field.push(two * bilinear(&extr.einstein[k], &minus_h_perp, &xi_perp));

            // 8πΘᵀ with the vector-valued traceless second fundamental form
            let s = &extr.second_fundamental[k];
            let hm = &extr.metric[k];
            let hi = &extr.metric_inv[k];
            let ring: [Vec4<T>; 3] = [
                std::array::from_fn(|c| s[0][c] - half * hm.tt * hvec[c]),
                std::array::from_fn(|c| s[1][c] - half * hm.tp * hvec[c]),
                std::array::from_fn(|c| s[2][c] - half * hm.pp * hvec[c]),
            ];
            let p = Sym2::new(
                inner(g, &ring[0], hvec),
                inner(g, &ring[1], hvec),
                inner(g, &ring[2], hvec),
            );
            let q = Sym2::new(
                inner(g, &xi[k], &ring[0]),
                inner(g, &xi[k], &ring[1]),
                inner(g, &xi[k], &ring[2]),
            );
            let idx = |a: usize, b: usize| {
                if a != b {
                    1
                } else if a == 0 {
                    0
                } else {
                    2
                }
            };
            let m = [[hi.tt, hi.tp], [hi.tp, hi.pp]];
            let mut ring_sq = T::zero();
            for a1 in 0..2 {
                for b1 in 0..2 {
                    for c1 in 0..2 {
                        for d1 in 0..2 {
                            ring_sq += m[a1][c1]
                                * m[b1][d1]
                                * inner(g, &ring[idx(a1, b1)], &ring[idx(c1, d1)]);
                        }
                    }
                }
            }
            let eight_pi_tt = -p.contract(&q, hi) + half * ring_sq * inner(g, &xi[k], hvec);
            theta_t.push(two * eight_pi_tt);

            let xi_minus_h = -inner(g, &xi[k], hvec);
            let xi_minus_hperp = inner(g, &xi[k], &minus_h_perp);
            let eight_pi_tl = if timelike {
                // regular form: β dψ = dβ - β d log H, and ⟨ξ⃗, -H⃗⊥⟩ = β ⟨I⃗⊥, -H⃗⊥⟩
                let i_perp_minus_hperp = inner(g, &nt[k], &minus_h_perp) / extr.h[k];
                let beta_dpsi = [
                    dbeta[k][0] - beta[k] * dlog_h[k][0],
                    dbeta[k][1] - beta[k] * dlog_h[k][1],
                ];
                -two * form_dot(k, &u[k], &beta_dpsi) * i_perp_minus_hperp
            } else {
                (form_dot(k, &u[k], &u[k]) + form_dot(k, &dpsi[k], &dpsi[k])) * xi_minus_h
                    - two * form_dot(k, &u[k], &dpsi[k]) * xi_minus_hperp
            };
            theta_l.push(two * eight_pi_tl);
            u_field.push(-two * div_u[k] * xi_minus_hperp);

            if !timelike || beta[k].abs() > cutoff {
                defect = defect
                    .max((u[k][0] + extr.alpha_h[k][0]).abs())
                    .max((u[k][1] + extr.alpha_h[k][1]).abs());
            }
        }
        let g_term = calculus::integrate(&g_field, extr);
        let tt = calculus::integrate(&theta_t, extr);
        let tl = calculus::integrate(&theta_l, extr);
        let u_term = calculus::integrate(&u_field, extr);
        BhmsDirection {
            a,
            b,
            u,
            theta_t,
            theta_l,
            g_term,
            theta_t_integral: tt,
            theta_l_integral: tl,
            u_term,
            total: g_term + tt + tl + u_term,
            u_defect: defect,
        }
    };

    let radial = direction(&xi_r, a_r, b_r, u_r, false);
    let timelike = direction(&xi_t, a_t, b_t, u_t, true);
    let total = radial.total + timelike.total;
    Ok(BhmsReport {
        phi_null,
        g_term: radial.g_term + timelike.g_term,
        u_term: radial.u_term + timelike.u_term,
        total,
        mass_derivative: total * normalization(extr),
        radial,
        timelike,
        psi,
    })
}

/// The two frame families of the monotonicity criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameCase {
    /// `ν_Θ = cosh(Θ∘β) ν_H - sinh(Θ∘β) ν_H⊥`.
    Case1NuH,
    /// `ν_Θ = cosh(Θ∘β) ν_ξ + sinh(Θ∘β) ν_ξ⊥`.
    Case2NuXi,
}

/// Polynomial `Θ(x) = Σ c_k x^k` on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ThetaSpec<T> {
    pub coefficients: Vec<T>,
}

impl<T: Real> ThetaSpec<T> {
    pub fn zero() -> Self {
        Self {
            coefficients: Vec::new(),
        }
    }

    /// `Θ(x) = x`.
    pub fn identity() -> Self {
        Self {
            coefficients: vec![T::zero(), T::one()],
        }
    }

    pub fn value(&self, x: T) -> T {
        self.coefficients
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self, x: T) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(T::zero(), |acc, (k, &c)| acc * x + T::of(k) * c)
    }

    /// Samples `Θ'` on `[-1, 1]`; fails on the first negative value.
    pub fn check_monotone(&self, samples: usize) -> Result<()> {
        let slack = T::lit(-1e-12);
        for s in 0..=samples {
            let x = T::lit(-1.0 + 2.0 * s as f64 / samples as f64);
            let d = self.derivative(x);
            if !(d >= slack) {
                return Err(Error::ThetaNotMonotone {
                    x: x.as_f64(),
                    derivative: d.as_f64(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertificateOptions {
    /// Required margin `sup|β| ≤ 1 - delta`.
    pub delta: f64,
    /// Bound on `condition_residual` and on `-∫𝔉 / scale`.
    pub tolerance: f64,
    pub monotone_samples: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            tolerance: 1e-8,
            monotone_samples: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct MonotonicityCertificate<T> {
    pub case: FrameCase,
    pub theta: ThetaSpec<T>,
    /// Area-normalized `L²` norm `(∫ (div_Σ α_{ν_Θ})² dA / |Σ|)^{1/2}`.
    pub condition_residual: T,
    /// `∫𝔉 dA` with `X = α_H^♯`, `Ψ = H`.
    pub f_integral: T,
    /// `max(∫(|X|² + |∇Ψ/Ψ|²) dA, 1)`.
    pub f_scale: T,
    /// Smallest sampled value of `V(x)(V(x)(1-x²) - 1)` on `[-1+δ, 1-δ]`.
    pub v_condition_min: T,
    pub sup_beta: T,
    pub pass: bool,
    #[serde(skip)]
    pub alpha_theta: OneFormField<T>,
}

/// The hyperbolic angle from `ν_H` to `ν_Θ` as a field.
pub fn frame_angle<T: Real>(case: FrameCase, theta: &ThetaSpec<T>, beta: &[T]) -> ScalarField<T> {
    beta.iter()
        .map(|&b| match case {
            FrameCase::Case1NuH => -theta.value(b),
            FrameCase::Case2NuXi => b.atanh() + theta.value(b),
        })
        .collect()
}

/// `V` for the given case: `-Θ'` or `Θ' + 1/(1-x²)`.
pub fn v_function<T: Real>(case: FrameCase, theta: &ThetaSpec<T>, x: T) -> T {
    match case {
        FrameCase::Case1NuH => -theta.derivative(x),
        FrameCase::Case2NuXi => theta.derivative(x) + T::one() / (T::one() - x * x),
    }
}

/// The integrand `𝔉 = |X|² + |∇Ψ/Ψ|² + 2β⟨X, ∇Ψ/Ψ⟩ + β div X` with `X = α_H^♯`
/// and `Ψ = H`.
pub fn lemma_integrand<T: Real>(extr: &ExtrinsicData<T>, beta: &[T]) -> ScalarField<T> {
    check_beta_len(beta, extr);
    let ing = ingredients(extr);
    let glh_sq = calculus::dot(&ing.grad_log_h, &ing.grad_log_h, extr);
    let alpha_sq = calculus::dot(&ing.alpha_vec, &ing.alpha_vec, extr);
    let alpha_glh = calculus::apply(&extr.alpha_h, &ing.grad_log_h);
    let two = T::lit(2.0);
    (0..extr.len())
        .map(|k| {
            alpha_sq[k] + glh_sq[k] + two * beta[k] * alpha_glh[k] + beta[k] * ing.div_alpha[k]
        })
        .collect()
}

pub fn monotonicity_certificate<T: Real>(
    extr: &ExtrinsicData<T>,
    beta: &[T],
    theta: &ThetaSpec<T>,
    case: FrameCase,
    options: &CertificateOptions,
) -> Result<MonotonicityCertificate<T>> {
    check_beta_len(beta, extr);
    let sup_beta = calculus::sup_norm(beta);
    let bound = T::one() - T::lit(options.delta);
    if !(sup_beta <= bound) {
        return Err(Error::BetaOutOfRange {
            sup: sup_beta.as_f64(),
            bound: bound.as_f64(),
        });
    }
    theta.check_monotone(options.monotone_samples)?;

    let angle = frame_angle(case, theta, beta);
    let rotated = rotated_frame(extr, &angle);
    let div = calculus::divergence_of_form(&rotated.alpha, extr);
    let div_sq: Vec<T> = div.iter().map(|d| *d * *d).collect();
    let condition_residual = (calculus::integrate(&div_sq, extr) / extr.total_area).sqrt();

    let f = lemma_integrand(extr, beta);
    let f_integral = calculus::integrate(&f, extr);
    let ing = ingredients(extr);
    let glh_sq = calculus::dot(&ing.grad_log_h, &ing.grad_log_h, extr);
    let alpha_sq = calculus::dot(&ing.alpha_vec, &ing.alpha_vec, extr);
    let positive: Vec<T> = glh_sq.iter().zip(&alpha_sq).map(|(a, b)| *a + *b).collect();
    let f_scale = calculus::integrate(&positive, extr).max(T::one());

    let samples = options.monotone_samples.max(2);
    let lo = -1.0 + options.delta;
    let v_condition_min = (0..=samples)
        .map(|s| {
            let x = T::lit(lo + (2.0 * (1.0 - options.delta)) * s as f64 / samples as f64);
            let v = v_function(case, theta, x);
            v * (v * (T::one() - x * x) - T::one())
        })
        .fold(T::infinity(), |m, x| m.min(x));

    let tol = T::lit(options.tolerance);
    let pass = condition_residual <= tol && f_integral >= -tol * f_scale;
    Ok(MonotonicityCertificate {
        case,
        theta: theta.clone(),
        condition_residual,
        f_integral,
        f_scale,
        v_condition_min,
        sup_beta,
        pass,
        alpha_theta: rotated.alpha,
    })
}
