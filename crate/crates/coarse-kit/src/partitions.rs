//! Canonical partitions of unity for finite covers, the sublinearity gap,
//! nerve maps, and convex combination of simplex-valued maps.
//!
//! For a cover `U_1 .. U_k` by proper subsets the canonical partition is
//! `φ_i(x) = d(x, X∖U_i) / S(x)` with `S(x) = Σ_j d(x, X∖U_j)`. On finite
//! spaces the complement distance is a minimum over the points outside the
//! set, so `φ_i(x) = 0` exactly when `x` has a coincident point outside
//! `U_i` (in particular whenever `x ∉ U_i`).

use std::sync::Arc;

use crate::maps::{lip_on, vec_dist};
use crate::space::PointedMetricSpace;
use crate::{leq_rel, Error, Result};

/// An indexed family of subsets covering the space.
#[derive(Debug, Clone)]
pub struct Cover {
    space: Arc<PointedMetricSpace>,
    names: Vec<String>,
    sets: Vec<Vec<usize>>,
    member: Vec<Vec<bool>>,
}

impl Cover {
    pub fn new(space: Arc<PointedMetricSpace>, named_sets: Vec<(String, Vec<usize>)>) -> Result<Self> {
        if named_sets.is_empty() {
            return Err(Error::Input("cover needs at least one set".into()));
        }
        let n = space.len();
        let mut names = Vec::with_capacity(named_sets.len());
        let mut sets = Vec::with_capacity(named_sets.len());
        let mut member = Vec::with_capacity(named_sets.len());
        let mut covered = vec![false; n];
        for (name, mut set) in named_sets {
            set.sort_unstable();
            set.dedup();
            if set.iter().any(|&i| i >= n) {
                return Err(Error::Input(format!("set {name:?} references a point outside the space")));
            }
            let mut mask = vec![false; n];
            for &i in &set {
                mask[i] = true;
                covered[i] = true;
            }
            names.push(name);
            sets.push(set);
            member.push(mask);
        }
        if let Some(i) = covered.iter().position(|&c| !c) {
            return Err(Error::Input(format!(
                "point {} is not covered by any set",
                space.id(i)
            )));
        }
        Ok(Self {
            space,
            names,
            sets,
            member,
        })
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    pub fn k(&self) -> usize {
        self.sets.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn contains(&self, set: usize, point: usize) -> bool {
        self.member[set][point]
    }

    /// No set equals the whole space.
    pub fn is_proper(&self) -> bool {
        let n = self.space.len();
        self.sets.iter().all(|s| s.len() < n)
    }

    /// `d(x, X∖U_i)`: min over points outside the set; infinite if none.
    pub fn complement_dist(&self, set: usize, x: usize) -> f64 {
        let mut best = f64::INFINITY;
        for y in 0..self.space.len() {
            if !self.member[set][y] {
                best = best.min(self.space.dist(x, y));
            }
        }
        best
    }

    /// Indices of the sets containing `x`.
    pub fn incidence(&self, x: usize) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.member[i][x]).collect()
    }

    pub fn membership_count(&self, x: usize) -> usize {
        (0..self.k()).filter(|&i| self.member[i][x]).count()
    }

    fn s_value(&self, x: usize) -> f64 {
        (0..self.k()).map(|i| self.complement_dist(i, x)).sum()
    }
}

/// The canonical partition of unity of a cover, with its totals `S(x)`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    cover: Cover,
    phi: Vec<Vec<f64>>,
    s: Vec<f64>,
}

/// Evaluate the canonical formula. Errors on improper covers (a set equal to
/// the whole space has no complement) and when some `S(x) = 0`.
pub fn canonical_partition(cover: Cover) -> Result<PartitionOfUnity> {
    if !cover.is_proper() {
        let which = (0..cover.k())
            .find(|&i| cover.set(i).len() == cover.space().len())
            .map(|i| cover.names()[i].clone())
            .unwrap_or_default();
        return Err(Error::Precondition(format!(
            "cover is not by proper subsets: set {which:?} is the whole space"
        )));
    }
    let n = cover.space().len();
    let k = cover.k();
    let mut phi = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for x in 0..n {
        let gaps: Vec<f64> = (0..k).map(|i| cover.complement_dist(i, x)).collect();
        let total: f64 = gaps.iter().sum();
        if total == 0.0 {
            return Err(Error::Precondition(format!(
                "partition degenerate at {}: S(x) = 0",
                cover.space().id(x)
            )));
        }
        phi.push(gaps.iter().map(|g| g / total).collect());
        s.push(total);
    }
    Ok(PartitionOfUnity { cover, phi, s })
}

impl PartitionOfUnity {
    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        self.cover.space()
    }

    pub fn k(&self) -> usize {
        self.cover.k()
    }

    /// Barycentric coordinates of `x` in the nerve.
    pub fn phi(&self, x: usize) -> &[f64] {
        &self.phi[x]
    }

    pub fn s(&self, x: usize) -> f64 {
        self.s[x]
    }

    /// Largest ε with `S(x) >= ε |x|` on this instance: the min of
    /// `S(x)/|x|` over points other than the basepoint. Infinite for
    /// one-point spaces.
    pub fn gap(&self) -> f64 {
        gap_from_s(self.space(), |x| self.s[x])
    }

    /// The canonical map into the nerve together with its cone lift
    /// `x -> |x| φ(x)` and both measured Lipschitz constants.
    pub fn nerve_map(&self) -> Result<NerveMap> {
        let space = self.space();
        let idx: Vec<usize> = (0..space.len()).collect();
        let coords = self.phi.clone();
        let cone_values: Vec<Vec<f64>> = idx
            .iter()
            .map(|&x| self.phi[x].iter().map(|&p| space.norm(x) * p).collect())
            .collect();
        let lip_simplex = lip_on(space, &idx, |i, j| vec_dist(&coords[i], &coords[j]))
            .expect_finite("nerve map")?;
        let lip_cone = lip_on(space, &idx, |i, j| vec_dist(&cone_values[i], &cone_values[j]))
            .expect_finite("nerve cone map")?;
        Ok(NerveMap {
            coords,
            cone_values,
            lip_simplex,
            lip_cone,
        })
    }
}

fn gap_from_s<F: Fn(usize) -> f64>(space: &PointedMetricSpace, s: F) -> f64 {
    let mut gap = f64::INFINITY;
    for x in 0..space.len() {
        let norm = space.norm(x);
        if norm == 0.0 {
            continue;
        }
        let sx = s(x);
        gap = gap.min(if sx == 0.0 { 0.0 } else { sx / norm });
    }
    gap
}

/// The sublinearity gap of a cover, computable even when the canonical
/// partition itself would be degenerate (`S(x) = 0` somewhere gives 0).
pub fn sublinearity_gap(cover: &Cover) -> Result<f64> {
    if !cover.is_proper() {
        return Err(Error::Precondition(
            "sublinearity gap needs a cover by proper subsets".into(),
        ));
    }
    Ok(gap_from_s(cover.space(), |x| cover.s_value(x)))
}

/// The canonical nerve map of a partition with measured constants.
#[derive(Debug, Clone)]
pub struct NerveMap {
    /// Barycentric coordinates per point.
    pub coords: Vec<Vec<f64>>,
    /// `|x| · φ(x)` per point.
    pub cone_values: Vec<Vec<f64>>,
    pub lip_simplex: f64,
    pub lip_cone: f64,
}

/// Per-coordinate certificate for the cone lift of a canonical partition.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PartitionLipCert {
    pub k: usize,
    pub eps_star: f64,
    /// `3k/ε* + 1`.
    pub bound: f64,
    /// Measured max over coordinates and pairs of `||x|φ_i(x) - |y|φ_i(y)| / d`.
    pub measured_coord: f64,
    /// Measured Lipschitz constant of the full cone map.
    pub cone_lip: f64,
    /// `S(x) > |x| / (2 · cone_lip)` held at every point.
    pub converse_ok: bool,
}

/// Verify the per-coordinate bound `||x|φ_i(x) - |y|φ_i(y)| <= (3k/ε* + 1) d(x,y)`
/// and the converse gap bound `S(x) > |x| / (2λ)` for the measured cone
/// Lipschitz constant λ. Both are theorems for ε* > 0, so violations are
/// certificate errors.
pub fn certify_partition_lipschitz(p: &PartitionOfUnity, tol: f64) -> Result<PartitionLipCert> {
    let eps_star = p.gap();
    if !(eps_star > 0.0) {
        return Err(Error::Precondition(format!(
            "sublinearity gap is {eps_star}; the certificate needs ε* > 0"
        )));
    }
    let k = p.k();
    let bound = if eps_star.is_finite() {
        3.0 * k as f64 / eps_star + 1.0
    } else {
        1.0
    };
    let space = p.space();
    let n = space.len();
    let mut measured = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            let d = space.dist(x, y);
            if d == 0.0 {
                continue;
            }
            for i in 0..k {
                let lhs = (space.norm(x) * p.phi(x)[i] - space.norm(y) * p.phi(y)[i]).abs();
                measured = measured.max(lhs / d);
            }
        }
    }
    if !leq_rel(measured, bound, tol) {
        return Err(Error::Certificate(format!(
            "per-coordinate partition bound {bound} < measured {measured}"
        )));
    }
    let nerve = p.nerve_map()?;
    let lambda = nerve.lip_cone;
    let mut converse_ok = true;
    if lambda > 0.0 {
        for x in 0..n {
            let needed = space.norm(x) / (2.0 * lambda);
            if !(p.s(x) > needed * (1.0 - tol) || space.norm(x) == 0.0) {
                converse_ok = false;
            }
        }
    }
    if !converse_ok {
        return Err(Error::Certificate(
            "converse gap bound S(x) > |x|/(2λ) failed".into(),
        ));
    }
    Ok(PartitionLipCert {
        k,
        eps_star,
        bound,
        measured_coord: measured,
        cone_lip: lambda,
        converse_ok,
    })
}

/// Result of combining two simplex-valued maps along a two-coordinate
/// partition, with the additivity certificate for the cone lifts.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    /// `h = α f + β g` per point.
    pub values: Vec<Vec<f64>>,
    /// `Lip(f') + Lip(g') + 2 Lip(γ') + 2`.
    pub bound: f64,
    /// Measured `Lip(h')`.
    pub measured: f64,
    pub lip_f: f64,
    pub lip_g: f64,
    pub lip_gamma: f64,
}

fn check_simplex_valued(name: &str, values: &[Vec<f64>], dim: usize, tol: f64) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Input(format!("{name}[{i}] has dimension {}, expected {dim}", v.len())));
        }
        let sum: f64 = v.iter().sum();
        if v.iter().any(|&c| c < -tol) || (sum - 1.0).abs() > tol.max(1e-9) {
            return Err(Error::Precondition(format!(
                "{name}[{i}] = {v:?} is not in the standard simplex"
            )));
        }
    }
    Ok(())
}

/// Pointwise convex combination `h = α f + β g` of two simplex-valued maps,
/// where `(α, β)` are the two coordinates of `gamma`. Certifies
/// `Lip(h') <= Lip(f') + Lip(g') + 2 Lip(γ') + 2` on the instance.
pub fn convex_combine(
    space: &Arc<PointedMetricSpace>,
    gamma: &[Vec<f64>],
    f: &[Vec<f64>],
    g: &[Vec<f64>],
    tol: f64,
) -> Result<ConvexCombination> {
    let n = space.len();
    if gamma.len() != n || f.len() != n || g.len() != n {
        return Err(Error::Input("all three maps must be defined on every point".into()));
    }
    let dim = f.first().map_or(0, Vec::len);
    check_simplex_valued("gamma", gamma, 2, tol)?;
    check_simplex_valued("f", f, dim, tol)?;
    check_simplex_valued("g", g, dim, tol)?;

    let idx: Vec<usize> = (0..n).collect();
    let cone = |vals: &[Vec<f64>], i: usize| -> Vec<f64> {
        vals[i].iter().map(|&c| space.norm(i) * c).collect()
    };
    let lip_of = |vals: &[Vec<f64>]| -> Result<f64> {
        lip_on(space, &idx, |i, j| vec_dist(&cone(vals, i), &cone(vals, j)))
            .expect_finite("cone lift")
    };
    let lip_f = lip_of(f)?;
    let lip_g = lip_of(g)?;
    let lip_gamma = lip_of(gamma)?;

    let values: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let (a, b) = (gamma[i][0], gamma[i][1]);
            f[i].iter().zip(&g[i]).map(|(&fc, &gc)| a * fc + b * gc).collect()
        })
        .collect();
    let measured = lip_of(&values)?;
    let bound = lip_f + lip_g + 2.0 * lip_gamma + 2.0;
    if !leq_rel(measured, bound, tol) {
        return Err(Error::Certificate(format!(
            "convex combination bound {bound} < measured {measured}"
        )));
    }
    Ok(ConvexCombination {
        values,
        bound,
        measured,
        lip_f,
        lip_g,
        lip_gamma,
    })
}
