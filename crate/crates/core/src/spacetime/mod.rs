//! Lorentzian backgrounds: metric, Levi-Civita connection and curvature at
//! arbitrary events.
//!
//! All built-in spacetimes are written in Cartesian-type coordinates
//! `(t, x¹, x², x³)` so that the embedding of a 2-sphere is a smooth map with
//! no coordinate singularity on the axis. The static spherically symmetric
//! models share the form
//!
//! ```text
//! g = -A(r) dt² + C(r) δ_ij dx^i dx^j + D(r) (x·dx)²
//! ```
//!
//! and their Christoffel symbols are assembled from closed-form radial
//! derivatives of `A`, `C` and `D`.

mod curvature;
mod dec;
mod table;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    diag4, inverse4, symmetric_eigenvalues4, zero_christoffel, zero_mat4, zero_riemann,
    Christoffel, Mat4, Riemann, Vec4,
};
use crate::Real;

pub use curvature::CurvatureBundle;
pub use dec::DecReport;
pub use table::MetricTable;

/// A spacetime event `(t, x¹, x², x³)` in geometric units.
pub type Event<T> = Vec4<T>;

/// Which family a [`SpacetimeModel`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacetimeKind {
    Minkowski,
    SchwarzschildStandard,
    SchwarzschildIsotropic,
    DeSitterStatic,
    NumericTable,
}

#[derive(Debug, Clone)]
enum Background<T> {
    Minkowski,
    SchwarzschildStandard { mass: T },
    SchwarzschildIsotropic { mass: T },
    DeSitterStatic { hubble_length: T },
    NumericTable(Arc<MetricTable<T>>),
}

/// Radial profile of a static spherically symmetric metric, with the
/// derivatives stored as `X'(r)/r` so the origin is regular.
#[derive(Debug, Clone, Copy)]
struct Profile<T> {
    a: T,
    a1: T,
    c: T,
    c1: T,
    d: T,
    d1: T,
}

/// A named metric provider. Immutable after construction and cheap to clone.
#[derive(Debug, Clone)]
pub struct SpacetimeModel<T> {
    background: Background<T>,
    fd_step: T,
    margin: T,
}

impl<T: Real> SpacetimeModel<T> {
    fn with_background(background: Background<T>) -> Self {
        Self {
            background,
            fd_step: T::lit(1e-4),
            margin: T::lit(0.05),
        }
    }

    pub fn minkowski() -> Self {
        Self::with_background(Background::Minkowski)
    }

    /// Schwarzschild in areal-radius coordinates.
    pub fn schwarzschild(mass: T) -> Result<Self> {
        if !(mass >= T::zero()) || !mass.is_finite() {
            return Err(Error::DegenerateSpec(format!(
                "mass must be >= 0, got {mass}"
            )));
        }
        Ok(Self::with_background(Background::SchwarzschildStandard {
            mass,
        }))
    }

    /// Schwarzschild in isotropic coordinates, horizon at `ρ = m/2`.
    pub fn schwarzschild_isotropic(mass: T) -> Result<Self> {
        if !(mass >= T::zero()) || !mass.is_finite() {
            return Err(Error::DegenerateSpec(format!(
                "mass must be >= 0, got {mass}"
            )));
        }
        Ok(Self::with_background(Background::SchwarzschildIsotropic {
            mass,
        }))
    }

    /// Static de Sitter patch with Hubble length `L` (cosmological horizon at `r = L`).
    pub fn de_sitter(hubble_length: T) -> Result<Self> {
        if !(hubble_length > T::zero()) || !hubble_length.is_finite() {
            return Err(Error::DegenerateSpec(format!(
                "Hubble length must be > 0, got {hubble_length}"
            )));
        }
        Ok(Self::with_background(Background::DeSitterStatic {
            hubble_length,
        }))
    }

    pub fn numeric_table(table: MetricTable<T>) -> Self {
        Self::with_background(Background::NumericTable(Arc::new(table)))
    }

    /// Relative chart margin: Schwarzschild requires `r > r_h (1 + margin)`,
    /// de Sitter requires `r < L (1 - margin)`.
    pub fn with_margin(mut self, margin: T) -> Self {
        self.margin = margin;
        self
    }

    /// Relative finite-difference step; the absolute step along coordinate
    /// `x^λ` is `fd_step · (1 + |x^λ|)`.
    pub fn with_fd_step(mut self, fd_step: T) -> Self {
        self.fd_step = fd_step;
        self
    }

    pub fn kind(&self) -> SpacetimeKind {
        match self.background {
            Background::Minkowski => SpacetimeKind::Minkowski,
            Background::SchwarzschildStandard { .. } => SpacetimeKind::SchwarzschildStandard,
            Background::SchwarzschildIsotropic { .. } => SpacetimeKind::SchwarzschildIsotropic,
            Background::DeSitterStatic { .. } => SpacetimeKind::DeSitterStatic,
            Background::NumericTable(_) => SpacetimeKind::NumericTable,
        }
    }

    pub fn name(&self) -> String {
        match &self.background {
            Background::Minkowski => "minkowski".into(),
            Background::SchwarzschildStandard { mass } => {
                format!("schwarzschild_standard(m={mass})")
            }
            Background::SchwarzschildIsotropic { mass } => {
                format!("schwarzschild_isotropic(m={mass})")
            }
            Background::DeSitterStatic { hubble_length } => {
                format!("de_sitter_static(L={hubble_length})")
            }
            Background::NumericTable(t) => format!("numeric_table({} points)", t.len()),
        }
    }

    pub fn fd_step(&self) -> T {
        self.fd_step
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    /// Vacuum models have identically vanishing Einstein tensor.
    pub fn is_vacuum(&self) -> bool {
        matches!(
            self.background,
            Background::Minkowski
                | Background::SchwarzschildStandard { .. }
                | Background::SchwarzschildIsotropic { .. }
        )
    }

    fn out_of_chart(p: &Event<T>, reason: String) -> Error {
        Error::OutOfChart {
            event: p.map(|x| x.as_f64()),
            reason,
        }
    }

    /// Checks `p` against the chart's validity domain.
    pub fn check_domain(&self, p: &Event<T>) -> Result<()> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Self::out_of_chart(p, "non-finite coordinate".into()));
        }
        let r = spatial_radius(p);
        match &self.background {
            Background::Minkowski => Ok(()),
            Background::SchwarzschildStandard { mass } => {
                let bound = T::lit(2.0) * *mass * (T::one() + self.margin);
                if r > bound {
                    Ok(())
                } else {
                    Err(Self::out_of_chart(
                        p,
                        format!("r = {r} <= 2m(1+margin) = {bound}"),
                    ))
                }
            }
            Background::SchwarzschildIsotropic { mass } => {
                let bound = *mass / T::lit(2.0) * (T::one() + self.margin);
                if r > bound {
                    Ok(())
                } else {
                    Err(Self::out_of_chart(
                        p,
                        format!("rho = {r} <= (m/2)(1+margin) = {bound}"),
                    ))
                }
            }
            Background::DeSitterStatic { hubble_length } => {
                let bound = *hubble_length * (T::one() - self.margin);
                if r < bound {
                    Ok(())
                } else {
                    Err(Self::out_of_chart(
                        p,
                        format!("r = {r} >= L(1-margin) = {bound}"),
                    ))
                }
            }
            Background::NumericTable(table) => table.check_inside(p),
        }
    }

    fn profile(&self, r: T) -> Option<Profile<T>> {
        let one = T::one();
        let two = T::lit(2.0);
        match &self.background {
            Background::Minkowski => Some(Profile {
                a: one,
                a1: T::zero(),
                c: one,
                c1: T::zero(),
                d: T::zero(),
                d1: T::zero(),
            }),
            Background::SchwarzschildStandard { mass } => {
                let m = *mass;
                let r2 = r * r;
                let r3 = r2 * r;
                let rm = r - two * m;
                Some(Profile {
                    a: one - two * m / r,
                    a1: two * m / r3,
                    c: one,
                    c1: T::zero(),
                    d: two * m / (r2 * rm),
                    // d/dr [2m r^-2 (r-2m)^-1] / r
                    d1: two * m * (-two / (r3 * rm) - one / (r2 * rm * rm)) / r,
                })
            }
            Background::SchwarzschildIsotropic { mass } => {
                let u = *mass / (two * r);
                let opu = one + u;
                let a = ((one - u) / opu).powi(2);
                Some(Profile {
                    a,
                    // A' = 4u(1-u) / (r (1+u)^3)
                    a1: T::lit(4.0) * u * (one - u) / (r * r * opu.powi(3)),
                    c: opu.powi(4),
                    // C' = -4 (1+u)^3 u / r
                    c1: -T::lit(4.0) * opu.powi(3) * u / (r * r),
                    d: T::zero(),
                    d1: T::zero(),
                })
            }
            Background::DeSitterStatic { hubble_length } => {
                let l2 = *hubble_length * *hubble_length;
                let q = l2 - r * r;
                Some(Profile {
                    a: one - r * r / l2,
                    a1: -two / l2,
                    c: one,
                    c1: T::zero(),
                    d: one / q,
                    d1: two / (q * q),
                })
            }
            Background::NumericTable(_) => None,
        }
    }

    fn metric_unchecked(&self, p: &Event<T>) -> Mat4<T> {
        if let Background::NumericTable(table) = &self.background {
            return table.interpolate_clamped(p);
        }
        let r = spatial_radius(p);
        let pr = self.profile(r).expect("analytic profile");
        let mut g = zero_mat4();
        g[0][0] = -pr.a;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { pr.c } else { T::zero() };
                g[i + 1][j + 1] = delta + pr.d * p[i + 1] * p[j + 1];
            }
        }
        g
    }

    /// `g_{μν}(p)`.
    pub fn metric_at(&self, p: &Event<T>) -> Result<Mat4<T>> {
        self.check_domain(p)?;
        let g = self.metric_unchecked(p);
        if let Background::NumericTable(_) = self.background {
            self.check_signature(p, &g)?;
        }
        Ok(g)
    }

    fn check_signature(&self, p: &Event<T>, g: &Mat4<T>) -> Result<()> {
        let ev = symmetric_eigenvalues4(g);
        if ev[0] < T::zero() && ev[1] > T::zero() {
            Ok(())
        } else {
            Err(Error::NotLorentzian {
                event: p.map(|x| x.as_f64()),
                eigenvalues: ev.map(|x| x.as_f64()),
            })
        }
    }

    /// Eigenvalues of `g_{μν}(p)` in ascending order.
    pub fn signature_at(&self, p: &Event<T>) -> Result<[T; 4]> {
        self.check_domain(p)?;
        Ok(symmetric_eigenvalues4(&self.metric_unchecked(p)))
    }

    pub fn inverse_metric_at(&self, p: &Event<T>) -> Result<Mat4<T>> {
        let g = self.metric_at(p)?;
        inverse4(&g).ok_or_else(|| Error::NotLorentzian {
            event: p.map(|x| x.as_f64()),
            eigenvalues: symmetric_eigenvalues4(&g).map(|x| x.as_f64()),
        })
    }

    /// `g(u, v)` at `p`.
    pub fn inner(&self, p: &Event<T>, u: &Vec4<T>, v: &Vec4<T>) -> Result<T> {
        Ok(crate::linalg::inner(&self.metric_at(p)?, u, v))
    }

    /// Levi-Civita connection `Γ^μ_{αβ}`; closed form for built-ins,
    /// finite differences of the interpolated metric for tables.
    pub fn christoffel_at(&self, p: &Event<T>) -> Result<Christoffel<T>> {
        self.check_domain(p)?;
        Ok(self.christoffel_unchecked(p))
    }

    fn christoffel_unchecked(&self, p: &Event<T>) -> Christoffel<T> {
        match self.profile(spatial_radius(p)) {
            Some(pr) => analytic_christoffel(p, &pr),
            None => self.christoffel_fd_unchecked(p),
        }
    }

    /// Christoffel symbols from 4th-order central differences of the metric,
    /// available for every model.
    pub fn christoffel_fd_at(&self, p: &Event<T>) -> Result<Christoffel<T>> {
        self.check_domain(p)?;
        Ok(self.christoffel_fd_unchecked(p))
    }

    fn christoffel_fd_unchecked(&self, p: &Event<T>) -> Christoffel<T> {
        let dg = self.central_difference(p, |q| self.metric_unchecked(q));
        let g = self.metric_unchecked(p);
        let ginv = inverse4(&g).unwrap_or_else(zero_mat4);
        christoffel_from_derivatives(&ginv, &dg)
    }

    /// 4th-order central difference of a matrix-valued function along each coordinate.
    fn central_difference<F>(&self, p: &Event<T>, f: F) -> [Mat4<T>; 4]
    where
        F: Fn(&Event<T>) -> Mat4<T>,
    {
        let mut out = [zero_mat4(); 4];
        for (lambda, slot) in out.iter_mut().enumerate() {
            let h = self.fd_step * (T::one() + p[lambda].abs());
            let shifted = |k: T| {
                let mut q = *p;
                q[lambda] += k * h;
                f(&q)
            };
            let (p1, m1) = (shifted(T::one()), shifted(-T::one()));
            let (p2, m2) = (shifted(T::lit(2.0)), shifted(-T::lit(2.0)));
            let denom = T::lit(12.0) * h;
            for i in 0..4 {
                for j in 0..4 {
                    slot[i][j] = (-p2[i][j] + T::lit(8.0) * p1[i][j] - T::lit(8.0) * m1[i][j]
                        + m2[i][j])
                        / denom;
                }
            }
        }
        out
    }

    /// `static_bg` skips the vanishing time derivatives.
    fn riemann_from<F>(&self, p: &Event<T>, gamma_fn: F, static_bg: bool) -> Riemann<T>
    where
        F: Fn(&Event<T>) -> Christoffel<T>,
    {
        let gamma = gamma_fn(p);
        // dgamma[λ][ρ][μ][ν] = ∂_λ Γ^ρ_{μν}
        let mut dgamma = [zero_christoffel(); 4];
        let first = usize::from(static_bg);
        for (lambda, slot) in dgamma.iter_mut().enumerate().skip(first) {
            let h = self.fd_step * (T::one() + p[lambda].abs());
            let at = |k: T| {
                let mut q = *p;
                q[lambda] += k * h;
                gamma_fn(&q)
            };
            let (p1, m1, p2, m2) = (
                at(T::one()),
                at(-T::one()),
                at(T::lit(2.0)),
                at(-T::lit(2.0)),
            );
            let denom = T::lit(12.0) * h;
            for r in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        slot[r][a][b] = (-p2[r][a][b] + T::lit(8.0) * p1[r][a][b]
                            - T::lit(8.0) * m1[r][a][b]
                            + m2[r][a][b])
                            / denom;
                    }
                }
            }
        }
        let mut riem = zero_riemann();
        for rho in 0..4 {
            for sigma in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let mut v = dgamma[mu][rho][nu][sigma] - dgamma[nu][rho][mu][sigma];
                        for lam in 0..4 {
                            v += gamma[rho][mu][lam] * gamma[lam][nu][sigma]
                                - gamma[rho][nu][lam] * gamma[lam][mu][sigma];
                        }
                        riem[rho][sigma][mu][nu] = v;
                    }
                }
            }
        }
        riem
    }

    /// Riemann tensor `R^ρ_{σμν}`; closed form for Minkowski and de Sitter,
    /// otherwise finite differences of [`Self::christoffel_at`].
    pub fn riemann_at(&self, p: &Event<T>) -> Result<Riemann<T>> {
        self.check_domain(p)?;
        Ok(self.riemann_unchecked(p))
    }

    pub(crate) fn riemann_unchecked(&self, p: &Event<T>) -> Riemann<T> {
        match &self.background {
            Background::Minkowski => zero_riemann(),
            Background::DeSitterStatic { hubble_length } => {
                let k = T::one() / (*hubble_length * *hubble_length);
                let g = self.metric_unchecked(p);
                let mut riem = zero_riemann();
                for rho in 0..4 {
                    for sigma in 0..4 {
                        for mu in 0..4 {
                            for nu in 0..4 {
                                let mut v = T::zero();
                                if rho == mu {
                                    v += g[sigma][nu];
                                }
                                if rho == nu {
                                    v -= g[sigma][mu];
                                }
                                riem[rho][sigma][mu][nu] = k * v;
                            }
                        }
                    }
                }
                riem
            }
            Background::NumericTable(_) => {
                self.riemann_from(p, |q| self.christoffel_unchecked(q), false)
            }
            _ => self.riemann_from(p, |q| self.christoffel_unchecked(q), true),
        }
    }

    /// Riemann tensor through the metric-only finite-difference path.
    pub fn riemann_fd_at(&self, p: &Event<T>) -> Result<Riemann<T>> {
        self.check_domain(p)?;
        Ok(self.riemann_from(p, |q| self.christoffel_fd_unchecked(q), false))
    }

    /// Ricci, scalar curvature and Einstein tensor by contracting [`Self::riemann_at`].
    pub fn curvature_at(&self, p: &Event<T>) -> Result<CurvatureBundle<T>> {
        self.check_domain(p)?;
        let g = self.metric_unchecked(p);
        Ok(CurvatureBundle::from_riemann(
            &self.riemann_unchecked(p),
            &g,
        ))
    }

    /// Curvature from second finite differences of the metric alone.
    pub fn curvature_fd_at(&self, p: &Event<T>) -> Result<CurvatureBundle<T>> {
        let riem = self.riemann_fd_at(p)?;
        Ok(CurvatureBundle::from_riemann(
            &riem,
            &self.metric_unchecked(p),
        ))
    }

    /// Einstein tensor `G_{μν} = R_{μν} - (R/2) g_{μν}`; analytic for built-ins.
    pub fn einstein_at(&self, p: &Event<T>) -> Result<Mat4<T>> {
        self.check_domain(p)?;
        Ok(self.einstein_unchecked(p))
    }

    pub(crate) fn einstein_unchecked(&self, p: &Event<T>) -> Mat4<T> {
        match &self.background {
            Background::Minkowski
            | Background::SchwarzschildStandard { .. }
            | Background::SchwarzschildIsotropic { .. } => zero_mat4(),
            Background::DeSitterStatic { hubble_length } => {
                let g = self.metric_unchecked(p);
                let k = -T::lit(3.0) / (*hubble_length * *hubble_length);
                let mut e = zero_mat4();
                for i in 0..4 {
                    for j in 0..4 {
                        e[i][j] = k * g[i][j];
                    }
                }
                e
            }
            Background::NumericTable(_) => {
                let g = self.metric_unchecked(p);
                CurvatureBundle::from_riemann(&self.riemann_unchecked(p), &g).einstein
            }
        }
    }

    /// Samples future-causal pairs and reports `min G(u, v)`; see [`DecReport`].
    pub fn dec_sample_check(
        &self,
        p: &Event<T>,
        trials: usize,
        seed: u64,
        tolerance: T,
    ) -> Result<DecReport<T>> {
        dec::sample(self, p, trials, seed, tolerance)
    }

    /// An orthonormal frame `{e_0, .., e_3}` at `p` with `e_0` future timelike,
    /// obtained by Lorentz–Gram–Schmidt on the coordinate basis.
    pub fn orthonormal_frame(&self, p: &Event<T>) -> Result<[Vec4<T>; 4]> {
        let g = self.metric_at(p)?;
        let mut frame = [[T::zero(); 4]; 4];
        for mu in 0..4 {
            let mut v = [T::zero(); 4];
            v[mu] = T::one();
            for k in 0..mu {
                let ek = frame[k];
                let sign = if k == 0 { -T::one() } else { T::one() };
                let c = crate::linalg::inner(&g, &v, &ek) * sign;
                for i in 0..4 {
                    v[i] -= c * ek[i];
                }
            }
            let n2 = crate::linalg::inner(&g, &v, &v);
            let expected_negative = mu == 0;
            if (n2 < T::zero()) != expected_negative || n2 == T::zero() {
                return Err(Error::NotLorentzian {
                    event: p.map(|x| x.as_f64()),
                    eigenvalues: symmetric_eigenvalues4(&g).map(|x| x.as_f64()),
                });
            }
            let n = n2.abs().sqrt();
            frame[mu] = v.map(|x| x / n);
        }
        Ok(frame)
    }
}

#[inline]
pub(crate) fn spatial_radius<T: Real>(p: &Event<T>) -> T {
    (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt()
}

/// `Γ^μ_{αβ} = ½ g^{μν}(∂_α g_{νβ} + ∂_β g_{να} - ∂_ν g_{αβ})` with `dg[λ][μ][ν] = ∂_λ g_{μν}`.
fn christoffel_from_derivatives<T: Real>(ginv: &Mat4<T>, dg: &[Mat4<T>; 4]) -> Christoffel<T> {
    let half = T::lit(0.5);
    let mut lowered = zero_christoffel();
    for nu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                lowered[nu][a][b] = half * (dg[a][nu][b] + dg[b][nu][a] - dg[nu][a][b]);
            }
        }
    }
    let mut gamma = zero_christoffel();
    for mu in 0..4 {
        for a in 0..4 {
            for b in a..4 {
                let mut acc = T::zero();
                for nu in 0..4 {
                    acc += ginv[mu][nu] * lowered[nu][a][b];
                }
                gamma[mu][a][b] = acc;
                gamma[mu][b][a] = acc;
            }
        }
    }
    gamma
}

fn analytic_christoffel<T: Real>(p: &Event<T>, pr: &Profile<T>) -> Christoffel<T> {
    let x = [p[1], p[2], p[3]];
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let half = T::lit(0.5);

    // full metric derivative dg[λ][μ][ν]; static, so the λ = 0 slice vanishes
    let mut dg = [zero_mat4(); 4];
    for k in 0..3 {
        dg[k + 1][0][0] = -pr.a1 * x[k];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = pr.d1 * x[k] * x[i] * x[j];
                if i == j {
                    v += pr.c1 * x[k];
                }
                if i == k {
                    v += pr.d * x[j];
                }
                if j == k {
                    v += pr.d * x[i];
                }
                dg[k + 1][i + 1][j + 1] = v;
            }
        }
    }
    // exact inverse of the block-diagonal metric
    let mut ginv = zero_mat4();
    ginv[0][0] = -T::one() / pr.a;
    let denom = pr.c + pr.d * r2;
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { T::one() } else { T::zero() };
            ginv[i + 1][j + 1] = (delta - pr.d * x[i] * x[j] / denom) / pr.c;
        }
    }
    let mut gamma = christoffel_from_derivatives(&ginv, &dg);
    // Γ^0_{0i} = A' x_i / (2 A r) exactly; avoids a cancellation in the generic contraction
    for i in 0..3 {
        let v = half * pr.a1 * x[i] / pr.a;
        gamma[0][0][i + 1] = v;
        gamma[0][i + 1][0] = v;
    }
    gamma
}

impl<T: Real> Default for SpacetimeModel<T> {
    fn default() -> Self {
        Self::minkowski()
    }
}

#[allow(dead_code)]
pub(crate) fn minkowski_metric<T: Real>() -> Mat4<T> {
    diag4([-T::one(), T::one(), T::one(), T::one()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<(SpacetimeModel<f64>, f64, f64)> {
        // (model, min radius, max radius) for random sampling
        vec![
            (SpacetimeModel::minkowski(), 0.1, 10.0),
            (
                SpacetimeModel::<f64>::schwarzschild(1.0).unwrap(),
                2.3,
                12.0,
            ),
            (
                SpacetimeModel::<f64>::schwarzschild_isotropic(1.0).unwrap(),
                0.6,
                12.0,
            ),
            (SpacetimeModel::<f64>::de_sitter(5.0).unwrap(), 0.0, 4.5),
        ]
    }

    fn random_event(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> Event<f64> {
        let r = rng.gen_range(rmin..rmax);
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        [
            rng.gen_range(-3.0..3.0),
            r * s * phi.cos(),
            r * s * phi.sin(),
            r * z,
        ]
    }

    #[test]
    fn minkowski_metric_is_flat_diag() {
        let m = SpacetimeModel::<f64>::minkowski();
        let g = m.metric_at(&[1.0, 2.0, -3.0, 0.5]).unwrap();
        assert_eq!(g, diag4([-1.0, 1.0, 1.0, 1.0]));
        let gamma = m.christoffel_at(&[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn schwarzschild_closed_form_components() {
        let m = SpacetimeModel::<f64>::schwarzschild(1.0).unwrap();
        let p = [0.0, 3.0, 0.0, 0.0];
        let g = m.metric_at(&p).unwrap();
        assert!((g[0][0] + 1.0 / 3.0).abs() < 1e-15);
        assert!((g[1][1] - 3.0).abs() < 1e-14);
        let gamma = m.christoffel_at(&p).unwrap();
        assert!((gamma[1][0][0] - 1.0 / 27.0).abs() < 1e-15);
        let gtt = m
            .inner(&p, &[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!((gtt + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn schwarzschild_domain_guard() {
        let m = SpacetimeModel::<f64>::schwarzschild(1.0)
            .unwrap()
            .with_margin(0.01);
        let err = m.metric_at(&[0.0, 2.0001, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OutOfChart { .. }));
        assert!(m.metric_at(&[0.0, 2.03, 0.0, 0.0]).is_ok());
        let ds = SpacetimeModel::<f64>::de_sitter(1.0).unwrap();
        assert!(ds.metric_at(&[0.0, 0.0, 0.96, 0.0]).is_err());
    }

    #[test]
    fn minkowski_inner_products() {
        let m = SpacetimeModel::<f64>::minkowski();
        let p = [0.0; 4];
        assert_eq!(
            m.inner(&p, &[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0])
                .unwrap(),
            -1.0
        );
        let (u, v) = ([1.0, 1.0, 0.0, 0.0], [1.0, -1.0, 0.0, 0.0]);
        assert_eq!(m.inner(&p, &u, &u).unwrap(), 0.0);
        assert_eq!(m.inner(&p, &v, &v).unwrap(), 0.0);
        assert_eq!(m.inner(&p, &u, &v).unwrap(), -2.0);
    }

    #[test]
    fn signature_is_lorentzian_everywhere_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for (model, rmin, rmax) in models() {
            for _ in 0..100 {
                let p = random_event(&mut rng, rmin, rmax);
                let ev = model.signature_at(&p).unwrap();
                assert!(
                    ev[0] < 0.0 && ev[1] > 0.0,
                    "{} at {p:?}: {ev:?}",
                    model.name()
                );
            }
        }
    }

    #[test]
    fn analytic_christoffels_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (model, rmin, rmax) in models() {
            for _ in 0..20 {
                let p = random_event(&mut rng, rmin.max(0.2), rmax);
                let a = model.christoffel_at(&p).unwrap();
                let f = model.christoffel_fd_at(&p).unwrap();
                for mu in 0..4 {
                    for i in 0..4 {
                        for j in 0..4 {
                            let d = (a[mu][i][j] - f[mu][i][j]).abs();
                            assert!(d <= 1e-7, "{} {p:?} Γ^{mu}_{i}{j}: {d}", model.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn metric_compatibility() {
        // ∇_λ g_{μν} = ∂_λ g_{μν} - Γ^σ_{λμ} g_{σν} - Γ^σ_{λν} g_{μσ}
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (model, rmin, rmax) in models() {
            for _ in 0..10 {
                let p = random_event(&mut rng, rmin.max(0.2), rmax);
                let g = model.metric_at(&p).unwrap();
                let gamma = model.christoffel_at(&p).unwrap();
                let dg = model.central_difference(&p, |q| model.metric_unchecked(q));
                for l in 0..4 {
                    for mu in 0..4 {
                        for nu in 0..4 {
                            let mut v = dg[l][mu][nu];
                            for s in 0..4 {
                                v -= gamma[s][l][mu] * g[s][nu] + gamma[s][l][nu] * g[mu][s];
                            }
                            assert!(v.abs() <= 1e-6, "{}: {v}", model.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_models_have_vanishing_einstein_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (model, rmin, rmax) in models().into_iter().take(3) {
            for _ in 0..10 {
                let p = random_event(&mut rng, rmin.max(0.2), rmax);
                let c = model.curvature_fd_at(&p).unwrap();
                let worst = c
                    .einstein
                    .iter()
                    .flatten()
                    .fold(0.0f64, |a, &b| a.max(b.abs()));
                assert!(worst <= 1e-6, "{}: {worst}", model.name());
            }
        }
        let m = SpacetimeModel::<f64>::schwarzschild(1.0).unwrap();
        let c = m.curvature_at(&[0.0, 4.0, 0.0, 0.0]).unwrap();
        let worst = c
            .einstein
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(worst <= 1e-6);
    }

    #[test]
    fn de_sitter_einstein_is_minus_three_over_l2_metric() {
        let l = 4.0;
        let m = SpacetimeModel::<f64>::de_sitter(l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = random_event(&mut rng, 0.1, 3.5);
            let g = m.metric_at(&p).unwrap();
            let analytic = m.einstein_at(&p).unwrap();
            let fd = m.curvature_fd_at(&p).unwrap().einstein;
            for i in 0..4 {
                for j in 0..4 {
                    let expected = -3.0 / (l * l) * g[i][j];
                    assert!((analytic[i][j] - expected).abs() < 1e-14);
                    assert!(
                        (fd[i][j] - expected).abs() < 1e-6,
                        "{} vs {}",
                        fd[i][j],
                        expected
                    );
                }
            }
        }
    }

    #[test]
    fn riemann_fd_matches_de_sitter_closed_form() {
        let m = SpacetimeModel::<f64>::de_sitter(3.0).unwrap();
        let p = [0.3, 0.5, -0.7, 1.1];
        let a = m.riemann_at(&p).unwrap();
        let f = m.riemann_from(&p, |q| m.christoffel_unchecked(q), false);
        for r in 0..4 {
            for s in 0..4 {
                for u in 0..4 {
                    for v in 0..4 {
                        assert!((a[r][s][u][v] - f[r][s][u][v]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn isotropic_and_standard_charts_agree_on_areal_radius() {
        // areal radius of the isotropic sphere rho: r = rho (1 + m/2rho)^2
        let m = SpacetimeModel::<f64>::schwarzschild_isotropic(1.0).unwrap();
        let rho = 2.0;
        let g = m.metric_at(&[0.0, rho, 0.0, 0.0]).unwrap();
        let areal = rho * g[2][2].sqrt();
        assert!((areal - rho * (1.0f64 + 0.25).powi(2)).abs() < 1e-14);
        // g_tt = -(1 - 2m/r)
        assert!((g[0][0] + (1.0 - 2.0 / areal)).abs() < 1e-14);
    }
}
