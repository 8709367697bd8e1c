//! Fixed-size tensors in four spacetime dimensions and two surface dimensions.

use crate::Real;

pub type Vec4<T> = [T; 4];
pub type Mat4<T> = [[T; 4]; 4];
/// `Γ[μ][α][β] = Γ^μ_{αβ}`.
pub type Christoffel<T> = [[[T; 4]; 4]; 4];
/// `R[ρ][σ][μ][ν] = R^ρ_{σμν}` with `R(∂_μ, ∂_ν)∂_σ = R^ρ_{σμν} ∂_ρ`.
pub type Riemann<T> = [[[[T; 4]; 4]; 4]; 4];

#[inline]
pub fn zero4<T: Real>() -> Vec4<T> {
    [T::zero(); 4]
}

#[inline]
pub fn zero_mat4<T: Real>() -> Mat4<T> {
    [[T::zero(); 4]; 4]
}

pub fn zero_christoffel<T: Real>() -> Christoffel<T> {
    [[[T::zero(); 4]; 4]; 4]
}

pub fn zero_riemann<T: Real>() -> Riemann<T> {
    [[[[T::zero(); 4]; 4]; 4]; 4]
}

pub fn diag4<T: Real>(d: [T; 4]) -> Mat4<T> {
    let mut m = zero_mat4();
    for i in 0..4 {
        m[i][i] = d[i];
    }
    m
}

/// `g(u, v) = g_{μν} u^μ v^ν`.
#[inline]
pub fn inner<T: Real>(g: &Mat4<T>, u: &Vec4<T>, v: &Vec4<T>) -> T {
    let mut acc = T::zero();
    for i in 0..4 {
        let mut row = T::zero();
        for j in 0..4 {
            row += g[i][j] * v[j];
        }
        acc += u[i] * row;
    }
    acc
}

#[inline]
pub fn add4<T: Real>(a: &Vec4<T>, b: &Vec4<T>) -> Vec4<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub4<T: Real>(a: &Vec4<T>, b: &Vec4<T>) -> Vec4<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn scale4<T: Real>(s: T, a: &Vec4<T>) -> Vec4<T> {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

/// `a + s·b`.
#[inline]
pub fn axpy4<T: Real>(a: &Vec4<T>, s: T, b: &Vec4<T>) -> Vec4<T> {
    [
        a[0] + s * b[0],
        a[1] + s * b[1],
        a[2] + s * b[2],
        a[3] + s * b[3],
    ]
}

#[inline]
pub fn euclid_norm4<T: Real>(a: &Vec4<T>) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt()
}

/// Contracts `Γ^μ_{αβ} u^α v^β`.
#[inline]
pub fn contract_christoffel<T: Real>(gamma: &Christoffel<T>, u: &Vec4<T>, v: &Vec4<T>) -> Vec4<T> {
    let mut out = zero4();
    for (mu, slot) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for a in 0..4 {
            if u[a] == T::zero() {
                continue;
            }
            for b in 0..4 {
                acc += gamma[mu][a][b] * u[a] * v[b];
            }
        }
        *slot = acc;
    }
    out
}

/// `T(u, v) = T_{μν} u^μ v^ν` for a (0,2) tensor.
#[inline]
pub fn bilinear<T: Real>(t: &Mat4<T>, u: &Vec4<T>, v: &Vec4<T>) -> T {
    inner(t, u, v)
}

/// Gauss–Jordan inverse with partial pivoting; `None` for a singular matrix.
pub fn inverse4<T: Real>(m: &Mat4<T>) -> Option<Mat4<T>> {
    let mut a = *m;
    let mut inv = diag4([T::one(); 4]);
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return None;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= scale * T::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..4 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                if f != T::zero() {
                    for k in 0..4 {
                        a[row][k] = a[row][k] - f * a[col][k];
                        inv[row][k] = inv[row][k] - f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric 4×4 matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues4<T: Real>(m: &Mat4<T>) -> [T; 4] {
    let mut a = *m;
    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..4 {
            diag += a[i][i] * a[i][i];
            for j in 0..4 {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag.max(T::min_positive_value()) {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Symmetric 2×2 tensor on the surface, coordinate basis `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Sym2<T> {
    pub tt: T,
    pub tp: T,
    pub pp: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(tt: T, tp: T, pp: T) -> Self {
        Self { tt, tp, pp }
    }

    pub fn det(&self) -> T {
        self.tt * self.pp - self.tp * self.tp
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if !(d > T::zero()) && !(d < T::zero()) {
            return None;
        }
        Some(Self::new(self.pp / d, -self.tp / d, self.tt / d))
    }

    /// `tr_h(self) = h^{ab} self_{ab}` for an inverse metric `h_inv`.
    pub fn trace_with(&self, h_inv: &Self) -> T {
        h_inv.tt * self.tt + T::lit(2.0) * h_inv.tp * self.tp + h_inv.pp * self.pp
    }

    /// `⟨a, b⟩ = h^{ac} h^{bd} a_{ab} b_{cd}`.
    pub fn contract(&self, other: &Self, h_inv: &Self) -> T {
        // raise both indices of `self`
        let m = [[h_inv.tt, h_inv.tp], [h_inv.tp, h_inv.pp]];
        let a = [[self.tt, self.tp], [self.tp, self.pp]];
        let b = [[other.tt, other.tp], [other.tp, other.pp]];
        let mut acc = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let mut up = T::zero();
                for k in 0..2 {
                    for l in 0..2 {
                        up += m[i][k] * m[j][l] * a[k][l];
                    }
                }
                acc += up * b[i][j];
            }
        }
        acc
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.tt * s, self.tp * s, self.pp * s)
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self::new(self.tt - other.tt, self.tp - other.tp, self.pp - other.pp)
    }

    /// Trace-free part with respect to metric `h` (inverse `h_inv`).
    pub fn traceless(&self, h: &Self, h_inv: &Self) -> Self {
        let tr = self.trace_with(h_inv);
        self.minus(&h.scaled(tr / T::lit(2.0)))
    }

    /// Eigenvalues of `ref_inv · self` (generalized, both symmetric), ascending.
    pub fn relative_eigenvalues(&self, reference_inv: &Self) -> (T, T) {
        // M = R^{-1} S, 2×2 non-symmetric but with real spectrum
        let m00 = reference_inv.tt * self.tt + reference_inv.tp * self.tp;
        let m01 = reference_inv.tt * self.tp + reference_inv.tp * self.pp;
        let m10 = reference_inv.tp * self.tt + reference_inv.pp * self.tp;
        let m11 = reference_inv.tp * self.tp + reference_inv.pp * self.pp;
        let tr = m00 + m11;
        let det = m00 * m11 - m01 * m10;
        let disc = (tr * tr / T::lit(4.0) - det).max(T::zero()).sqrt();
        (tr / T::lit(2.0) - disc, tr / T::lit(2.0) + disc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_lorentz_diag() {
        let g = diag4([-2.0, 1.0, 4.0, 0.5]);
        let inv = inverse4(&g).unwrap();
        assert!((inv[0][0] + 0.5f64).abs() < 1e-15);
        assert!((inv[3][3] - 2.0f64).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let g = diag4([1.0f64, 0.0, 1.0, 1.0]);
        assert!(inverse4(&g).is_none());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // rotation of diag(-1, 2, 3, 5) by a Givens rotation in the (0,2) plane
        let (c, s) = (0.6f64, 0.8f64);
        let d = [-1.0, 2.0, 3.0, 5.0];
        let mut m = zero_mat4();
        m[1][1] = d[1];
        m[3][3] = d[3];
        m[0][0] = c * c * d[0] + s * s * d[2];
        m[2][2] = s * s * d[0] + c * c * d[2];
        m[0][2] = c * s * (d[2] - d[0]);
        m[2][0] = m[0][2];
        let ev = symmetric_eigenvalues4(&m);
        for (a, b) in ev.iter().zip(d.iter()) {
            assert!((a - b).abs() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn traceless_part_is_trace_free() {
        let h = Sym2::new(2.0f64, 0.3, 1.5);
        let hi = h.inverse().unwrap();
        let a = Sym2::new(0.7, -0.2, 4.0);
        let ring = a.traceless(&h, &hi);
        assert!(ring.trace_with(&hi).abs() < 1e-15);
    }
}
