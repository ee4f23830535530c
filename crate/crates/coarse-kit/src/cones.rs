//! Open cones over compact base sets and transport of maps between them.
//!
//! A cone point is `t · k` with radial scale `t >= 0` and `k` in the base
//! set; `t = 0` is the apex regardless of `k`. The base sets are the three
//! the rest of the crate needs: the unit sphere `S^m`, the standard simplex
//! `Δ^m` (vertices = standard basis of `R^(m+1)`), and the simplex boundary
//! `∂Δ^(m+1)`. No general regularity predicate is implemented; these three
//! are hard-coded.

use crate::maps::{vec_dist, vec_norm};
use crate::{close_rel, Error, Result};

/// The base sets the toolkit works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseSet {
    /// `S^m` in `R^(m+1)`.
    Sphere(usize),
    /// `Δ^m` in `R^(m+1)`: nonnegative coordinates summing to 1.
    Simplex(usize),
    /// `∂Δ^(m+1)` in `R^(m+2)`: a simplex point with some zero coordinate.
    SimplexBoundary(usize),
}

impl BaseSet {
    pub fn ambient_dim(self) -> usize {
        match self {
            BaseSet::Sphere(m) => m + 1,
            BaseSet::Simplex(m) => m + 1,
            BaseSet::SimplexBoundary(m) => m + 2,
        }
    }

    pub fn contains(self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.ambient_dim() {
            return false;
        }
        match self {
            BaseSet::Sphere(_) => close_rel(vec_norm(v), 1.0, tol),
            BaseSet::Simplex(_) => in_simplex(v, tol),
            BaseSet::SimplexBoundary(_) => {
                in_simplex(v, tol) && v.iter().fold(f64::INFINITY, |a, &b| a.min(b)) <= tol
            }
        }
    }
}

fn in_simplex(v: &[f64], tol: f64) -> bool {
    v.iter().all(|&c| c >= -tol) && close_rel(v.iter().sum::<f64>(), 1.0, tol)
}

/// A point `t · k` of an open cone, kept in factored form.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConePoint {
    pub t: f64,
    pub k: Vec<f64>,
}

impl ConePoint {
    pub fn new(t: f64, k: Vec<f64>) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("radial scale must be >= 0, got {t}")));
        }
        Ok(Self { t, k })
    }

    pub fn is_apex(&self) -> bool {
        self.t == 0.0
    }

    /// Ambient coordinates `t · k`.
    pub fn ambient(&self) -> Vec<f64> {
        self.k.iter().map(|&c| self.t * c).collect()
    }

    /// Ambient Euclidean distance between cone points.
    pub fn dist(&self, other: &ConePoint) -> f64 {
        vec_dist(&self.ambient(), &other.ambient())
    }
}

/// A base-set map given by its values on finitely many sample points.
#[derive(Debug, Clone)]
pub struct BaseSampleMap {
    pub domain: BaseSet,
    pub target: BaseSet,
    samples: Vec<(Vec<f64>, Vec<f64>)>,
}

impl BaseSampleMap {
    pub fn new(
        domain: BaseSet,
        target: BaseSet,
        samples: Vec<(Vec<f64>, Vec<f64>)>,
        tol: f64,
    ) -> Result<Self> {
        for (k, l) in &samples {
            if !domain.contains(k, tol) {
                return Err(Error::Input(format!("sample point {k:?} is outside the domain base set")));
            }
            if !target.contains(l, tol) {
                return Err(Error::Input(format!("sample value {l:?} is outside the target base set")));
            }
        }
        Ok(Self {
            domain,
            target,
            samples,
        })
    }

    /// Value at a base point, matched within tolerance.
    pub fn value_at(&self, k: &[f64], tol: f64) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|(kk, _)| vec_dist(kk, k) <= tol * vec_norm(kk).max(1.0))
            .map(|(_, l)| l.as_slice())
    }

    /// Lipschitz constant over the sample pairs.
    pub fn sample_lip(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.samples.len() {
            for b in a + 1..self.samples.len() {
                let dk = vec_dist(&self.samples[a].0, &self.samples[b].0);
                let dl = vec_dist(&self.samples[a].1, &self.samples[b].1);
                if dk > 0.0 {
                    worst = worst.max(dl / dk);
                }
            }
        }
        worst
    }
}

/// Transport a base-set map over the cones: `t · k` goes to `t · f(k)`; the
/// apex goes to the apex.
pub fn cone_transport(f: &BaseSampleMap, p: &ConePoint, tol: f64) -> Result<ConePoint> {
    let value = f.value_at(&p.k, tol).ok_or_else(|| {
        Error::Precondition("cone transport: the base map is not defined at this base point".into())
    })?;
    if !f.target.contains(value, tol) {
        return Err(Error::Precondition(
            "cone transport: value lies outside the target base set".into(),
        ));
    }
    ConePoint::new(p.t, value.to_vec())
}

/// Barycenter of the standard simplex in `R^dim`.
fn barycenter(dim: usize) -> Vec<f64> {
    vec![1.0 / dim as f64; dim]
}

/// The bi-Lipschitz pair `u: S^m -> ∂Δ^(m+1)` and `v: ∂Δ^(m+1) -> S^m`,
/// realised as radial projection through the barycenter of `Δ^(m+1)`.
///
/// Directions in the sum-zero hyperplane of `R^(m+2)` are identified with
/// `R^(m+1)` through a fixed orthonormal (Helmert) basis, so `v ∘ u` and
/// `u ∘ v` are identities up to float error. `u` lands on the boundary with
/// one coordinate exactly zero.
#[derive(Debug, Clone)]
pub struct SphereSimplexHomeo {
    m: usize,
    /// m+1 orthonormal rows spanning the sum-zero hyperplane of R^(m+2).
    basis: Vec<Vec<f64>>,
}

impl SphereSimplexHomeo {
    pub fn new(m: usize) -> Self {
        let dim = m + 2;
        let mut basis = Vec::with_capacity(m + 1);
        for j in 1..=m + 1 {
            let mut row = vec![0.0; dim];
            let scale = 1.0 / ((j * (j + 1)) as f64).sqrt();
            for cell in row.iter_mut().take(j) {
                *cell = scale;
            }
            row[j] = -(j as f64) * scale;
            basis.push(row);
        }
        Self { m, basis }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `u`: radial exit point of the ray from the barycenter in the
    /// direction of a unit vector `w` in `R^(m+1)`. The exiting coordinate
    /// is exactly zero.
    pub fn to_boundary(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.m + 1 {
            return Err(Error::Input(format!(
                "expected a vector in R^{}, got length {}",
                self.m + 1,
                w.len()
            )));
        }
        let dim = self.m + 2;
        let c = barycenter(dim);
        // direction in the sum-zero hyperplane
        let mut dir = vec![0.0; dim];
        for (j, row) in self.basis.iter().enumerate() {
            for i in 0..dim {
                dir[i] += w[j] * row[i];
            }
        }
        let mut t_exit = f64::INFINITY;
        let mut exit_idx = usize::MAX;
        for i in 0..dim {
            if dir[i] < 0.0 {
                let t = c[i] / (-dir[i]);
                if t < t_exit {
                    t_exit = t;
                    exit_idx = i;
                }
            }
        }
        if exit_idx == usize::MAX {
            return Err(Error::Precondition(
                "direction has no negative coordinate; not a unit direction in the hyperplane".into(),
            ));
        }
        let mut out: Vec<f64> = (0..dim).map(|i| c[i] + t_exit * dir[i]).collect();
        out[exit_idx] = 0.0;
        for v in out.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = out.iter().sum();
        for v in out.iter_mut() {
            *v /= total;
        }
        Ok(out)
    }

    /// `v`: unit direction (in the Helmert coordinates) of a boundary point
    /// seen from the barycenter.
    pub fn to_sphere(&self, p: &[f64]) -> Result<Vec<f64>> {
        let dim = self.m + 2;
        if p.len() != dim {
            return Err(Error::Input(format!(
                "expected a vector in R^{dim}, got length {}",
                p.len()
            )));
        }
        let c = barycenter(dim);
        let q: Vec<f64> = (0..dim).map(|i| p[i] - c[i]).collect();
        let mut w: Vec<f64> = self
            .basis
            .iter()
            .map(|row| row.iter().zip(&q).map(|(r, x)| r * x).sum())
            .collect();
        let n = vec_norm(&w);
        if n < 1e-14 {
            return Err(Error::Precondition(
                "point coincides with the barycenter; no direction".into(),
            ));
        }
        for x in w.iter_mut() {
            *x /= n;
        }
        Ok(w)
    }

    /// Measured Lipschitz constants `(Lip(u), Lip(v))` over the sample pairs.
    pub fn measured_constants(&self, sphere_samples: &[Vec<f64>]) -> Result<(f64, f64)> {
        let mut lip_u = 0.0f64;
        let mut lip_v = 0.0f64;
        let images: Vec<Vec<f64>> = sphere_samples
            .iter()
            .map(|w| self.to_boundary(w))
            .collect::<Result<_>>()?;
        for a in 0..sphere_samples.len() {
            for b in a + 1..sphere_samples.len() {
                let dw = vec_dist(&sphere_samples[a], &sphere_samples[b]);
                let dp = vec_dist(&images[a], &images[b]);
                if dw > 0.0 {
                    lip_u = lip_u.max(dp / dw);
                }
                if dp > 0.0 {
                    lip_v = lip_v.max(dw / dp);
                }
            }
        }
        Ok((lip_u, lip_v))
    }
}
