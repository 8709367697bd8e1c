//! Closed spacelike 2-spheres sampled on a Gauss–Legendre × equispaced grid,
//! and their extrinsic geometry in a Lorentzian background.

mod extrinsic;
mod frame;

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{Event, SpacetimeModel};
use crate::sphere::{real_ylm, SphereBasis};
use crate::Real;

pub use extrinsic::{
    admissibility_check, default_eps_adm, mean_curvature_sq, AdmissibilityReport, ExtrinsicData,
    NormalFrame,
};
pub use frame::{perp_rotate, rotated_frame, RotatedFrame};

/// Smallest grid accepted by [`SurfaceGrid::build`].
pub const MIN_GRID: usize = 16;

/// One real spherical-harmonic term `coefficient · Y_l^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Harmonic<T> {
    pub l: usize,
    pub m: i64,
    pub coefficient: T,
}

impl<T: Real> Harmonic<T> {
    pub fn new(l: usize, m: i64, coefficient: T) -> Self {
        Self { l, m, coefficient }
    }

    fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() as usize > self.l {
            return Err(Error::DegenerateSpec(format!(
                "harmonic ({}, {}) has |m| > l",
                self.l, self.m
            )));
        }
        if !self.coefficient.is_finite() {
            return Err(Error::DegenerateSpec(
                "non-finite harmonic coefficient".into(),
            ));
        }
        Ok(())
    }
}

fn harmonic_sum<T: Real>(terms: &[Harmonic<T>], theta: f64, phi: f64) -> T {
    terms
        .iter()
        .map(|h| h.coefficient * T::lit(real_ylm(h.l, h.m, theta, phi)))
        .fold(T::zero(), |a, b| a + b)
}

/// Parametric families of embedded spheres, all centred at the spatial origin
/// of the chart on the `t = 0` slice unless time-perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", bound = "T: Real")]
pub enum SurfaceFamily<T> {
    RoundSphere {
        radius: T,
    },
    Ellipsoid {
        a: T,
        b: T,
        c: T,
    },
    /// `r(θ, φ) = radius + Σ c_lm Y_l^m(θ, φ)`.
    RadialGraph {
        radius: T,
        harmonics: Vec<Harmonic<T>>,
    },
    /// `base` with the time coordinate shifted by `Σ ε_lm Y_l^m(θ, φ)`.
    TimePerturbed {
        base: Box<SurfaceFamily<T>>,
        harmonics: Vec<Harmonic<T>>,
    },
}

impl<T: Real> SurfaceFamily<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::DegenerateSpec(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self {
            Self::RoundSphere { radius } => positive("radius", *radius),
            Self::Ellipsoid { a, b, c } => {
                positive("a", *a)?;
                positive("b", *b)?;
                positive("c", *c)
            }
            Self::RadialGraph { radius, harmonics } => {
                positive("radius", *radius)?;
                harmonics.iter().try_for_each(Harmonic::validate)
            }
            Self::TimePerturbed { base, harmonics } => {
                base.validate()?;
                harmonics.iter().try_for_each(Harmonic::validate)
            }
        }
    }

    /// The embedded event for parameter `(θ, φ)`.
    pub fn embedding_at(&self, theta: f64, phi: f64) -> Event<T> {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let dir = [T::lit(st * cp), T::lit(st * sp), T::lit(ct)];
        match self {
            Self::RoundSphere { radius } => [
                T::zero(),
                *radius * dir[0],
                *radius * dir[1],
                *radius * dir[2],
            ],
            Self::Ellipsoid { a, b, c } => [T::zero(), *a * dir[0], *b * dir[1], *c * dir[2]],
            Self::RadialGraph { radius, harmonics } => {
                let r = *radius + harmonic_sum(harmonics, theta, phi);
                [T::zero(), r * dir[0], r * dir[1], r * dir[2]]
            }
            Self::TimePerturbed { base, harmonics } => {
                let mut e = base.embedding_at(theta, phi);
                e[0] += harmonic_sum(harmonics, theta, phi);
                e
            }
        }
    }
}

/// A sampled embedding `F: S² → M` on the nodes of a [`SphereBasis`].
#[derive(Debug, Clone)]
pub struct SurfaceGrid<T> {
    basis: Arc<SphereBasis<T>>,
    events: Vec<Event<T>>,
    family: Option<SurfaceFamily<T>>,
}

impl<T: Real> SurfaceGrid<T> {
    /// Samples `family` on an `n_theta × n_phi` grid and checks every node
    /// against the chart domain of `model`.
    pub fn build(
        family: &SurfaceFamily<T>,
        model: &SpacetimeModel<T>,
        n_theta: usize,
        n_phi: usize,
    ) -> Result<Self> {
        Self::build_rotated(family, model, n_theta, n_phi, IDENTITY)
    }

    /// As [`Self::build`], but the parametrization is precomposed with a
    /// rotation of the parameter sphere: node `(θ, φ)` maps to
    /// `family(R · n(θ, φ))`.
    pub fn build_rotated(
        family: &SurfaceFamily<T>,
        model: &SpacetimeModel<T>,
        n_theta: usize,
        n_phi: usize,
        rotation: [[f64; 3]; 3],
    ) -> Result<Self> {
        if n_theta < MIN_GRID || n_phi < MIN_GRID {
            return Err(Error::InvalidGrid(format!(
                "grid {n_theta}x{n_phi} is below the minimum {MIN_GRID}x{MIN_GRID}"
            )));
        }
        family.validate()?;
        let basis = Arc::new(SphereBasis::new(n_theta, n_phi)?);
        Self::sample(basis, family, model, rotation)
    }

    /// Samples `family` on an existing basis (no minimum-size check).
    pub fn sample(
        basis: Arc<SphereBasis<T>>,
        family: &SurfaceFamily<T>,
        model: &SpacetimeModel<T>,
        rotation: [[f64; 3]; 3],
    ) -> Result<Self> {
        family.validate()?;
        let mut events = Vec::with_capacity(basis.len());
        for i in 0..basis.n_theta() {
            for j in 0..basis.n_phi() {
                let (t, p) = (basis.theta()[i].as_f64(), basis.phi()[j].as_f64());
                let n = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                let r: [f64; 3] =
                    std::array::from_fn(|a| (0..3).map(|b| rotation[a][b] * n[b]).sum());
                let theta = r[2].clamp(-1.0, 1.0).acos();
                let phi = r[1].atan2(r[0]);
                let e = family.embedding_at(theta, phi);
                model.check_domain(&e)?;
                events.push(e);
            }
        }
        Ok(Self {
            basis,
            events,
            family: Some(family.clone()),
        })
    }

    /// Wraps explicit node events (e.g. an evolved surface).
    pub fn from_events(basis: Arc<SphereBasis<T>>, events: Vec<Event<T>>) -> Result<Self> {
        if events.len() != basis.len() {
            return Err(Error::InvalidGrid(format!(
                "{} events for a grid of {} nodes",
                events.len(),
                basis.len()
            )));
        }
        if events.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite event coordinate".into()));
        }
        Ok(Self {
            basis,
            events,
            family: None,
        })
    }

    pub fn basis(&self) -> &Arc<SphereBasis<T>> {
        &self.basis
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn family(&self) -> Option<&SurfaceFamily<T>> {
        self.family.as_ref()
    }

    pub fn n_theta(&self) -> usize {
        self.basis.n_theta()
    }

    pub fn n_phi(&self) -> usize {
        self.basis.n_phi()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event at node `(i, j)`.
    pub fn event(&self, i: usize, j: usize) -> Event<T> {
        self.events[i * self.n_phi() + j]
    }

    /// Writes `i,j,theta,phi,t,x1,x2,x3`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::InvalidGrid(e.to_string());
        w.write_record(["i", "j", "theta", "phi", "t", "x1", "x2", "x3"])
            .map_err(io)?;
        for i in 0..self.n_theta() {
            for j in 0..self.n_phi() {
                let e = self.event(i, j);
                w.write_record(&[
                    i.to_string(),
                    j.to_string(),
                    format!("{:e}", self.basis.theta()[i]),
                    format!("{:e}", self.basis.phi()[j]),
                    format!("{:e}", e[0]),
                    format!("{:e}", e[1]),
                    format!("{:e}", e[2]),
                    format!("{:e}", e[3]),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidGrid(e.to_string()))
    }

    /// Reads the format of [`Self::write_csv`]; grid size is inferred from the indices.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let bad = |m: String| Error::InvalidGrid(m);
        let mut rows: Vec<(usize, usize, Event<T>)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 8 {
                return Err(bad(format!("expected 8 columns, found {}", rec.len())));
            }
            let i: usize = rec[0].parse().map_err(|e| bad(format!("{e}")))?;
            let j: usize = rec[1].parse().map_err(|e| bad(format!("{e}")))?;
            let mut e = [T::zero(); 4];
            for k in 0..4 {
                let v: f64 = rec[4 + k].parse().map_err(|e| bad(format!("{e}")))?;
                e[k] = T::lit(v);
            }
            rows.push((i, j, e));
        }
        let nt = rows.iter().map(|r| r.0).max().map_or(0, |x| x + 1);
        let np = rows.iter().map(|r| r.1).max().map_or(0, |x| x + 1);
        if rows.len() != nt * np {
            return Err(bad(format!("{} rows for a {nt}x{np} grid", rows.len())));
        }
        let basis = Arc::new(SphereBasis::new(nt, np)?);
        let mut events = vec![[T::nan(); 4]; nt * np];
        for (i, j, e) in rows {
            events[i * np + j] = e;
        }
        Self::from_events(basis, events)
    }
}

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Rotation matrix about the unit axis `axis` by `angle` (Rodrigues).
pub fn rotation_matrix(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mink() -> SpacetimeModel<f64> {
        SpacetimeModel::minkowski()
    }

    #[test]
    fn round_sphere_equator_node() {
        let f = SurfaceFamily::<f64>::RoundSphere { radius: 2.0 };
        let e = f.embedding_at(std::f64::consts::FRAC_PI_2, 0.0);
        assert!((e[0]).abs() < 1e-15 && (e[1] - 2.0).abs() < 1e-15);
        assert!(e[2].abs() < 1e-15 && e[3].abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_pole() {
        let f = SurfaceFamily::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 2.0,
        };
        assert_eq!(f.embedding_at(0.0, 0.3), [0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn time_perturbation_sets_node_time() {
        let eps = 0.2;
        let f = SurfaceFamily::TimePerturbed {
            base: Box::new(SurfaceFamily::RoundSphere { radius: 1.0 }),
            harmonics: vec![Harmonic::new(2, 0, eps)],
        };
        let g = SurfaceGrid::build(&f, &mink(), 16, 32).unwrap();
        for i in 0..16 {
            let th = g.basis().theta()[i];
            let e = g.event(i, 5);
            assert!((e[0] - eps * real_ylm(2, 0, th, 0.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let m = mink();
        let neg = SurfaceFamily::RoundSphere { radius: -1.0 };
        assert!(matches!(
            SurfaceGrid::build(&neg, &m, 16, 32),
            Err(Error::DegenerateSpec(_))
        ));
        let ok = SurfaceFamily::RoundSphere { radius: 1.0 };
        assert!(matches!(
            SurfaceGrid::build(&ok, &m, 8, 32),
            Err(Error::InvalidGrid(_))
        ));
        let s = SpacetimeModel::schwarzschild(1.0).unwrap();
        assert!(matches!(
            SurfaceGrid::build(&ok, &s, 16, 32),
            Err(Error::OutOfChart { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let f = SurfaceFamily::Ellipsoid {
            a: 1.0,
            b: 1.5,
            c: 2.0,
        };
        let g = SurfaceGrid::build(&f, &mink(), 16, 32).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,theta,phi,t,x1,x2,x3\n"));
        let back = SurfaceGrid::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.events(), g.events());
    }

    #[test]
    fn family_json_shape() {
        let f: SurfaceFamily<f64> = serde_json::from_str(
            r#"{"family":"time_perturbed","base":{"family":"round_sphere","radius":1.0},
                "harmonics":[{"l":2,"m":0,"coefficient":0.1}]}"#,
        )
        .unwrap();
        assert!(matches!(f, SurfaceFamily::TimePerturbed { .. }));
    }

    #[test]
    fn rotation_matrix_is_orthogonal() {
        let r = rotation_matrix([0.3, -0.5, 0.8], 1.1);
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = (0..3).map(|k| r[a][k] * r[b][k]).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
