//! Spectral calculus on the parameter sphere: Gauss–Legendre colatitude
//! nodes, equispaced longitudes, and a real spherical-harmonic transform
//! with exact first and second derivatives of band-limited data.
//!
//! Nodes are stored row-major, `node = i * n_phi + j`, with `θ_i` ascending
//! and `φ_j = 2πj / n_phi`. The poles are never grid nodes.
//!
//! Band limit: degrees `l ≤ n_theta - 1`, orders `m ≤ min(l_max, n_phi/2 - 1)`.
//! Normalized Legendre functions satisfy `∫_{-1}^{1} Λ_l^m(x)² dx = 1` and
//! carry no Condon–Shortley phase.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Real;

/// Gauss–Legendre nodes (descending in `x`, i.e. ascending in θ) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `Λ_l^m(x)` for `l = m..=lmax` at one `x = cos θ`, `s = sin θ`.
fn legendre_column(m: usize, lmax: usize, x: f64, s: f64, out: &mut [f64]) {
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    out[0] = pmm;
    if lmax == m {
        return;
    }
    let mf = m as f64;
    out[1] = (2.0 * mf + 3.0).sqrt() * x * pmm;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let l1 = lf - 1.0;
        let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2]);
    }
}

/// Real orthonormal spherical harmonic `Y_l^m(θ, φ)`; `m < 0` selects the
/// `sin(|m|φ)` member. `∫_{S²} Y_l^m Y_{l'}^{m'} dΩ = δ δ`.
pub fn real_ylm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let mut col = vec![0.0; l - am + 1];
    legendre_column(am, l, theta.cos(), theta.sin(), &mut col);
    let lam = col[l - am];
    let pi = std::f64::consts::PI;
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => lam / (2.0 * pi).sqrt(),
        std::cmp::Ordering::Greater => lam * (am as f64 * phi).cos() / pi.sqrt(),
        std::cmp::Ordering::Less => lam * (am as f64 * phi).sin() / pi.sqrt(),
    }
}

/// Spectral coefficients: `f = Σ_m Σ_{l≥m} Λ_l^m(cos θ) (a_lm cos mφ + b_lm sin mφ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    lmax: usize,
    mmax: usize,
    /// packed by `offset(m) + (l - m)`
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    fn zeros(lmax: usize, mmax: usize) -> Self {
        let len = packed_len(lmax, mmax);
        Self {
            lmax,
            mmax,
            cos: vec![T::zero(); len],
            sin: vec![T::zero(); len],
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn mmax(&self) -> usize {
        self.mmax
    }

    /// Coefficient of the orthonormal real harmonic `Y_l^m` in the expansion.
    pub fn ylm_coefficient(&self, l: usize, m: i64) -> T {
        let am = m.unsigned_abs() as usize;
        if l > self.lmax || am > self.mmax || am > l {
            return T::zero();
        }
        let idx = offset(self.lmax, am) + l - am;
        let pi = T::PI();
        match m.cmp(&0) {
            std::cmp::Ordering::Equal => self.cos[idx] * (T::lit(2.0) * pi).sqrt(),
            std::cmp::Ordering::Greater => self.cos[idx] * pi.sqrt(),
            std::cmp::Ordering::Less => self.sin[idx] * pi.sqrt(),
        }
    }

    /// Multiplies each degree-`l` block by `factor(l)`.
    pub fn scale_by_degree<F: Fn(usize) -> T>(&mut self, factor: F) {
        for m in 0..=self.mmax {
            let off = offset(self.lmax, m);
            for l in m..=self.lmax {
                let f = factor(l);
                self.cos[off + l - m] *= f;
                self.sin[off + l - m] *= f;
            }
        }
    }
}

fn offset(lmax: usize, m: usize) -> usize {
    // Σ_{k<m} (lmax - k + 1)
    m * (lmax + 1) - m * m.saturating_sub(1) / 2
}

fn packed_len(lmax: usize, mmax: usize) -> usize {
    offset(lmax, mmax + 1)
}

/// Values and coordinate derivatives of a scalar field at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives<T> {
    pub value: Vec<T>,
    pub d_theta: Vec<T>,
    pub d_phi: Vec<T>,
    /// Second derivatives; empty unless requested.
    pub d_tt: Vec<T>,
    pub d_tp: Vec<T>,
    pub d_pp: Vec<T>,
}

/// Precomputed transform tables for one `(n_theta, n_phi)` grid.
#[derive(Debug, Clone)]
pub struct SphereBasis<T> {
    n_theta: usize,
    n_phi: usize,
    lmax: usize,
    mmax: usize,
    theta: Vec<T>,
    cos_theta: Vec<T>,
    sin_theta: Vec<T>,
    gl_weights: Vec<T>,
    phi: Vec<T>,
    /// `[m][ring][l - m]`, flattened with `leg_offset`
    leg: Vec<T>,
    dleg: Vec<T>,
    leg_offset: Vec<usize>,
    fft: RingFft<T>,
}

/// Forward and inverse length-`n_phi` transforms along the rings.
#[derive(Clone)]
struct RingFft<T> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T> std::fmt::Debug for RingFft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RingFft")
    }
}

impl<T: Real> SphereBasis<T> {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 4 || n_phi < 8 || n_phi % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid {n_theta}x{n_phi}: need n_theta >= 4 and even n_phi >= 8"
            )));
        }
        let lmax = n_theta - 1;
        let mmax = lmax.min(n_phi / 2 - 1);
        let (x, w) = gauss_legendre(n_theta);
        let s: Vec<f64> = x.iter().map(|&x| (1.0 - x * x).sqrt()).collect();
        let phi: Vec<f64> = (0..n_phi)
            .map(|j| std::f64::consts::TAU * j as f64 / n_phi as f64)
            .collect();

        let mut leg_offset = Vec::with_capacity(mmax + 2);
        let mut acc = 0;
        for m in 0..=mmax {
            leg_offset.push(acc);
            acc += n_theta * (lmax - m + 1);
        }
        leg_offset.push(acc);
        let mut leg = vec![0.0; acc];
        let mut dleg = vec![0.0; acc];
        for m in 0..=mmax {
            let width = lmax - m + 1;
            for k in 0..n_theta {
                let base = leg_offset[m] + k * width;
                legendre_column(m, lmax, x[k], s[k], &mut leg[base..base + width]);
                for l in m..=lmax {
                    let lf = l as f64;
                    let mf = m as f64;
                    let prev = if l > m { leg[base + l - m - 1] } else { 0.0 };
                    let c = if l > m {
                        ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt()
                    } else {
                        0.0
                    };
                    dleg[base + l - m] = (lf * x[k] * leg[base + l - m] - c * prev) / s[k];
                }
            }
        }
        let mut planner = FftPlanner::new();
        let cast = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        Ok(Self {
            n_theta,
            n_phi,
            lmax,
            mmax,
            theta: cast(x.iter().map(|x| x.acos()).collect()),
            cos_theta: cast(x),
            sin_theta: cast(s),
            gl_weights: cast(w),
            phi: cast(phi),
            leg: cast(leg),
            dleg: cast(dleg),
            leg_offset,
            fft: RingFft {
                forward: planner.plan_fft_forward(n_phi),
                inverse: planner.plan_fft_inverse(n_phi),
            },
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn mmax(&self) -> usize {
        self.mmax
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn sin_theta(&self) -> &[T] {
        &self.sin_theta
    }

    pub fn cos_theta(&self) -> &[T] {
        &self.cos_theta
    }

    pub fn gl_weights(&self) -> &[T] {
        &self.gl_weights
    }

    /// Quadrature weight of node `(i, j)` for `∫ f dΩ` on the unit sphere,
    /// in the coordinate measure `dθ dφ` divided by `sin θ`-free form:
    /// `∫ f dΩ ≈ Σ round_weight · f`.
    pub fn round_weight(&self, i: usize) -> T {
        self.gl_weights[i] * T::TAU() / T::of(self.n_phi)
    }

    /// Real harmonic `Y_l^m` sampled at the nodes.
    pub fn ylm(&self, l: usize, m: i64) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                out.push(T::lit(real_ylm(
                    l,
                    m,
                    self.theta[i].as_f64(),
                    self.phi[j].as_f64(),
                )));
            }
        }
        out
    }

    /// Forward transform. Exact for band-limited input.
    pub fn analyze(&self, f: &[T]) -> Spectrum<T> {
        assert_eq!(f.len(), self.len(), "field length does not match grid");
        let (nt, np, mm) = (self.n_theta, self.n_phi, self.mmax);
        // ring Fourier coefficients, [ring][m]
        let norm0 = T::one() / T::of(np);
        let norm = T::lit(2.0) * norm0;
        let ring: Vec<(Vec<T>, Vec<T>)> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let mut buf: Vec<Complex<T>> = f[k * np..(k + 1) * np]
                    .iter()
                    .map(|&x| Complex::new(x, T::zero()))
                    .collect();
                self.fft.forward.process(&mut buf);
                // Σ f e^{-imφ} = Σ f cos mφ - i Σ f sin mφ
                let c = (0..=mm)
                    .map(|m| buf[m].re * if m == 0 { norm0 } else { norm })
                    .collect();
                let s = (0..=mm)
                    .map(|m| -buf[m].im * if m == 0 { norm0 } else { norm })
                    .collect();
                (c, s)
            })
            .collect();
        let mut spec = Spectrum::zeros(self.lmax, mm);
        let blocks: Vec<(Vec<T>, Vec<T>)> = (0..=mm)
            .into_par_iter()
            .map(|m| {
                let width = self.lmax - m + 1;
                let mut bc = vec![T::zero(); width];
                let mut bs = vec![T::zero(); width];
                for k in 0..nt {
                    let wc = self.gl_weights[k] * ring[k].0[m];
                    let ws = self.gl_weights[k] * ring[k].1[m];
                    let base = self.leg_offset[m] + k * width;
                    let col = &self.leg[base..base + width];
                    for l in 0..width {
                        bc[l] += wc * col[l];
                        bs[l] += ws * col[l];
                    }
                }
                (bc, bs)
            })
            .collect();
        for (m, (bc, bs)) in blocks.into_iter().enumerate() {
            let off = offset(self.lmax, m);
            spec.cos[off..off + bc.len()].copy_from_slice(&bc);
            spec.sin[off..off + bs.len()].copy_from_slice(&bs);
        }
        spec
    }

    /// Inverse transform (values only).
    pub fn synthesize(&self, spec: &Spectrum<T>) -> Vec<T> {
        self.synthesize_impl(spec, false, false).value
    }

    /// Values and first derivatives from a spectrum.
    pub fn synthesize_d1(&self, spec: &Spectrum<T>) -> Derivatives<T> {
        self.synthesize_impl(spec, true, false)
    }

    /// Values, first and second derivatives from a spectrum.
    pub fn synthesize_d2(&self, spec: &Spectrum<T>) -> Derivatives<T> {
        self.synthesize_impl(spec, true, true)
    }

    /// `∂_θ f`, `∂_φ f` of sampled data.
    pub fn derivatives(&self, f: &[T]) -> Derivatives<T> {
        self.synthesize_d1(&self.analyze(f))
    }

    /// First and second coordinate derivatives of sampled data.
    pub fn derivatives2(&self, f: &[T]) -> Derivatives<T> {
        self.synthesize_d2(&self.analyze(f))
    }

    /// Band-limited projection of sampled data.
    pub fn project(&self, f: &[T]) -> Vec<T> {
        self.synthesize(&self.analyze(f))
    }

    fn synthesize_impl(&self, spec: &Spectrum<T>, first: bool, second: bool) -> Derivatives<T> {
        let (nt, np, mm) = (self.n_theta, self.n_phi, self.mmax);
        assert_eq!(spec.lmax, self.lmax);
        assert_eq!(spec.mmax, mm);
        let rows: Vec<[Vec<T>; 6]> = (0..nt)
            .into_par_iter()
            .map(|k| {
                // Legendre sums for this ring: value, dθ, and Σ l(l+1) a Λ
                let mut vc = vec![T::zero(); mm + 1];
                let mut vs = vec![T::zero(); mm + 1];
                let mut dc = vec![T::zero(); mm + 1];
                let mut ds = vec![T::zero(); mm + 1];
                let mut lc = vec![T::zero(); mm + 1];
                let mut ls = vec![T::zero(); mm + 1];
                for m in 0..=mm {
                    let width = self.lmax - m + 1;
                    let base = self.leg_offset[m] + k * width;
                    let off = offset(self.lmax, m);
                    let col = &self.leg[base..base + width];
                    let dcol = &self.dleg[base..base + width];
                    let ac = &spec.cos[off..off + width];
                    let as_ = &spec.sin[off..off + width];
                    for l in 0..width {
                        vc[m] += ac[l] * col[l];
                        vs[m] += as_[l] * col[l];
                        if first {
                            dc[m] += ac[l] * dcol[l];
                            ds[m] += as_[l] * dcol[l];
                        }
                        if second {
                            let deg = T::of(l + m);
                            let ll = deg * (deg + T::one()) * col[l];
                            lc[m] += ac[l] * ll;
                            ls[m] += as_[l] * ll;
                        }
                    }
                }
                let s = self.sin_theta[k];
                let cot = self.cos_theta[k] / s;
                // per-order coefficients (a_m, b_m) of a_m cos mφ + b_m sin mφ
                let mut series: Vec<Vec<(T, T)>> = vec![(0..=mm).map(|m| (vc[m], vs[m])).collect()];
                if first {
                    series.push((0..=mm).map(|m| (dc[m], ds[m])).collect());
                    series.push(
                        (0..=mm)
                            .map(|m| {
                                let mf = T::of(m);
                                (mf * vs[m], -mf * vc[m])
                            })
                            .collect(),
                    );
                }
                if second {
                    series.push(
                        (0..=mm)
                            .map(|m| {
                                // d²/dθ² Σ a Λ = -cot θ Σ a Λ' - Σ a (l(l+1) - m²/s²) Λ
                                let mf = T::of(m);
                                let m2s = mf * mf / (s * s);
                                (
                                    -cot * dc[m] - lc[m] + m2s * vc[m],
                                    -cot * ds[m] - ls[m] + m2s * vs[m],
                                )
                            })
                            .collect(),
                    );
                    series.push(
                        (0..=mm)
                            .map(|m| {
                                let mf = T::of(m);
                                (mf * ds[m], -mf * dc[m])
                            })
                            .collect(),
                    );
                    series.push(
                        (0..=mm)
                            .map(|m| {
                                let m2 = T::of(m * m);
                                (-m2 * vc[m], -m2 * vs[m])
                            })
                            .collect(),
                    );
                }
                let mut out: [Vec<T>; 6] = Default::default();
                let mut slots = [0usize, 1, 2, 3, 4, 5].into_iter();
                for pair in series.chunks(2) {
                    let (x, y) = self.synthesize_pair(&pair[0], pair.get(1).map(|v| v.as_slice()));
                    out[slots.next().unwrap()] = x;
                    if let Some(y) = y {
                        out[slots.next().unwrap()] = y;
                    }
                }
                out
            })
            .collect();
        let mut d = Derivatives {
            value: Vec::with_capacity(nt * np),
            d_theta: Vec::new(),
            d_phi: Vec::new(),
            d_tt: Vec::new(),
            d_tp: Vec::new(),
            d_pp: Vec::new(),
        };
        for r in rows {
            let [v, t, p, tt, tp, pp] = r;
            d.value.extend(v);
            d.d_theta.extend(t);
            d.d_phi.extend(p);
            d.d_tt.extend(tt);
            d.d_tp.extend(tp);
            d.d_pp.extend(pp);
        }
        d
    }

    /// Evaluates one or two real Fourier series on a ring with a single
    /// complex inverse FFT (the second series rides in the imaginary part).
    fn synthesize_pair(&self, a: &[(T, T)], b: Option<&[(T, T)]>) -> (Vec<T>, Option<Vec<T>>) {
        let np = self.n_phi;
        let half = T::lit(0.5);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; np];
        let mut add = |coef: &[(T, T)], unit: Complex<T>| {
            for (m, &(c, s)) in coef.iter().enumerate() {
                if m == 0 {
                    buf[0] += unit * Complex::new(c, T::zero());
                } else {
                    // c cos mφ + s sin mφ = Re[(c - i s) e^{imφ}]
                    let z = Complex::new(c * half, -s * half);
                    buf[m] += unit * z;
                    buf[np - m] += unit * z.conj();
                }
            }
        };
        add(a, Complex::new(T::one(), T::zero()));
        if let Some(b) = b {
            add(b, Complex::new(T::zero(), T::one()));
        }
        self.fft.inverse.process(&mut buf);
        let x = buf.iter().map(|z| z.re).collect();
        let y = b.map(|_| buf.iter().map(|z| z.im).collect());
        (x, y)
    }

    /// Applies the inverse of the unit-sphere Laplacian, `-1/(l(l+1))`, on
    /// `l ≥ 1` and removes the mean.
    pub fn inverse_round_laplacian(&self, f: &[T]) -> Vec<T> {
        let mut spec = self.analyze(f);
        spec.scale_by_degree(|l| {
            if l == 0 {
                T::zero()
            } else {
                -T::one() / T::of(l * (l + 1))
            }
        });
        self.synthesize(&spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^22 = 2/23
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((i - 2.0 / 23.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn ylm_closed_forms() {
        let pi = std::f64::consts::PI;
        let (t, p): (f64, f64) = (0.7, 1.3);
        let y20 = (5.0 / (16.0 * pi)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        assert!((real_ylm(2, 0, t, p) - y20).abs() < 1e-14);
        let y10 = (3.0 / (4.0 * pi)).sqrt() * t.cos();
        assert!((real_ylm(1, 0, t, p) - y10).abs() < 1e-14);
        let y11 = (3.0 / (4.0 * pi)).sqrt() * t.sin() * p.cos();
        assert!((real_ylm(1, 1, t, p) - y11).abs() < 1e-14);
        let y1m1 = (3.0 / (4.0 * pi)).sqrt() * t.sin() * p.sin();
        assert!((real_ylm(1, -1, t, p) - y1m1).abs() < 1e-14);
    }

    #[test]
    fn harmonics_are_orthonormal_under_quadrature() {
        let b = SphereBasis::<f64>::new(10, 20).unwrap();
        let pairs = [(0, 0), (1, 0), (2, 1), (3, -2), (5, 4), (9, -9)];
        for &(l1, m1) in &pairs {
            let y1 = b.ylm(l1, m1);
            for &(l2, m2) in &pairs {
                let y2 = b.ylm(l2, m2);
                let mut acc = 0.0;
                for i in 0..b.n_theta() {
                    for j in 0..b.n_phi() {
                        let n = i * b.n_phi() + j;
                        acc += b.round_weight(i) * y1[n] * y2[n];
                    }
                }
                let expected = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!(
                    (acc - expected).abs() < 1e-13,
                    "({l1},{m1})x({l2},{m2}) = {acc}"
                );
            }
        }
    }

    #[test]
    fn analyze_recovers_coefficients() {
        let b = SphereBasis::<f64>::new(16, 32).unwrap();
        let y = b.ylm(4, -3);
        let y2 = b.ylm(7, 2);
        let f: Vec<f64> = y.iter().zip(&y2).map(|(a, c)| 2.0 * a - 0.5 * c).collect();
        let s = b.analyze(&f);
        assert!((s.ylm_coefficient(4, -3) - 2.0).abs() < 1e-13);
        assert!((s.ylm_coefficient(7, 2) + 0.5).abs() < 1e-13);
        assert!(s.ylm_coefficient(4, 3).abs() < 1e-13);
        let back = b.synthesize(&s);
        for (a, c) in back.iter().zip(&f) {
            assert!((a - c).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_of_cartesian_coordinates() {
        // z = cos θ, x = sin θ cos φ: exact derivatives
        let b = SphereBasis::<f64>::new(12, 24).unwrap();
        let mut fx = Vec::new();
        for i in 0..b.n_theta() {
            for j in 0..b.n_phi() {
                fx.push(b.theta()[i].sin() * b.phi()[j].cos());
            }
        }
        let d = b.derivatives2(&fx);
        for i in 0..b.n_theta() {
            for j in 0..b.n_phi() {
                let n = i * b.n_phi() + j;
                let (t, p) = (b.theta()[i], b.phi()[j]);
                assert!((d.d_theta[n] - t.cos() * p.cos()).abs() < 1e-12);
                assert!((d.d_phi[n] + t.sin() * p.sin()).abs() < 1e-12);
                assert!((d.d_tt[n] + t.sin() * p.cos()).abs() < 1e-12);
                assert!((d.d_tp[n] + t.cos() * p.sin()).abs() < 1e-12);
                assert!((d.d_pp[n] + t.sin() * p.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_laplacian_inverse_of_y20() {
        let b = SphereBasis::<f64>::new(16, 32).unwrap();
        let y = b.ylm(2, 0);
        let u = b.inverse_round_laplacian(&y);
        for (a, c) in u.iter().zip(&y) {
            assert!((a + c / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn f32_transform_round_trips() {
        let b = SphereBasis::<f32>::new(8, 16).unwrap();
        let y = b.ylm(3, 1);
        let back = b.project(&y);
        for (a, c) in back.iter().zip(&y) {
            assert!((a - c).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SphereBasis::<f64>::new(2, 16).is_err());
        assert!(SphereBasis::<f64>::new(8, 15).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn band_limited_round_trip(coeffs in proptest::collection::vec(-1.0f64..1.0, 25)) {
            let b = SphereBasis::<f64>::new(8, 16).unwrap();
            let mut f = vec![0.0; b.len()];
            let mut k = 0;
            for l in 0..5usize {
                for m in -(l as i64)..=(l as i64) {
                    let y = b.ylm(l, m);
                    for n in 0..f.len() {
                        f[n] += coeffs[k] * y[n];
                    }
                    k += 1;
                }
            }
            let s = b.analyze(&f);
            let mut k = 0;
            for l in 0..5usize {
                for m in -(l as i64)..=(l as i64) {
                    prop_assert!((s.ylm_coefficient(l, m) - coeffs[k]).abs() < 1e-12);
                    k += 1;
                }
            }
        }
    }
}
