//! Maps between metric spaces and into Euclidean targets: Lipschitz
//! constants, asymptotic `(λ, M)` fits, sphere-valued direction fields and
//! the norm-preserving maps they induce, annulus Lipschitz profiles, Higson
//! sublinearity defects, and the radial rescaling transfer.

use std::sync::Arc;

use crate::parallel::pairwise_max;
use crate::space::{annulus, PointedMetricSpace};
use crate::sublinear::PiecewiseLinearFunction;
use crate::{close_rel, leq_rel, Error, Result, DEFAULT_TOL};

/// Euclidean helpers used throughout the crate.
pub fn vec_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn vec_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// First standard basis vector; the canonical direction for points where a
/// direction is otherwise undetermined.
pub fn canonical_direction(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

/// Where a map's values live.
#[derive(Debug, Clone)]
pub enum TargetSpace {
    Euclidean(usize),
    Metric(Arc<PointedMetricSpace>),
}

#[derive(Debug, Clone)]
enum MapValues {
    Vectors(Vec<Vec<f64>>),
    Points(Vec<usize>),
}

/// A map defined on every point of a finite pointed metric space.
#[derive(Debug, Clone)]
pub struct MetricMap {
    space: Arc<PointedMetricSpace>,
    target: TargetSpace,
    values: MapValues,
}

impl MetricMap {
    /// Map into `R^dim` given one vector per point.
    pub fn euclidean(space: Arc<PointedMetricSpace>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Input(format!(
                "{} values for {} points",
                values.len(),
                space.len()
            )));
        }
        let dim = values.first().map_or(0, Vec::len);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::Input("values must share a positive dimension".into()));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Input("values must be finite".into()));
        }
        Ok(Self {
            space,
            target: TargetSpace::Euclidean(dim),
            values: MapValues::Vectors(values),
        })
    }

    /// Real-valued map, as the 1-dimensional Euclidean case.
    pub fn real(space: Arc<PointedMetricSpace>, values: &[f64]) -> Result<Self> {
        Self::euclidean(space, values.iter().map(|&x| vec![x]).collect())
    }

    /// Map into another pointed metric space given one target index per point.
    pub fn into_space(
        space: Arc<PointedMetricSpace>,
        target: Arc<PointedMetricSpace>,
        values: Vec<usize>,
    ) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Input(format!(
                "{} values for {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|&i| i >= target.len()) {
            return Err(Error::Input("value index outside target space".into()));
        }
        Ok(Self {
            space,
            target: TargetSpace::Metric(target),
            values: MapValues::Points(values),
        })
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    pub fn target(&self) -> &TargetSpace {
        &self.target
    }

    /// Distance between the values at two points.
    pub fn value_dist(&self, i: usize, j: usize) -> f64 {
        match (&self.values, &self.target) {
            (MapValues::Vectors(v), _) => vec_dist(&v[i], &v[j]),
            (MapValues::Points(p), TargetSpace::Metric(t)) => t.dist(p[i], p[j]),
            (MapValues::Points(_), TargetSpace::Euclidean(_)) => unreachable!(),
        }
    }

    /// Norm of the value at a point: distance to the target's basepoint (the
    /// origin for Euclidean targets).
    pub fn value_norm(&self, i: usize) -> f64 {
        match (&self.values, &self.target) {
            (MapValues::Vectors(v), _) => vec_norm(&v[i]),
            (MapValues::Points(p), TargetSpace::Metric(t)) => t.norm(p[i]),
            (MapValues::Points(_), TargetSpace::Euclidean(_)) => unreachable!(),
        }
    }

    pub fn vector_values(&self) -> Option<&[Vec<f64>]> {
        match &self.values {
            MapValues::Vectors(v) => Some(v),
            MapValues::Points(_) => None,
        }
    }
}

/// A Lipschitz constant, or the verdict that none exists (coincident domain
/// points carrying distinct values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lip {
    Finite(f64),
    Unbounded,
}

impl Lip {
    pub fn finite(self) -> Option<f64> {
        match self {
            Lip::Finite(x) => Some(x),
            Lip::Unbounded => None,
        }
    }

    pub fn expect_finite(self, what: &str) -> Result<f64> {
        self.finite().ok_or_else(|| {
            Error::Precondition(format!(
                "{what}: coincident points with distinct values make the Lipschitz constant unbounded"
            ))
        })
    }
}

/// Sup of `value_dist / dist` over pairs drawn from `idx`.
pub(crate) fn lip_on<F>(space: &PointedMetricSpace, idx: &[usize], value_dist: F) -> Lip
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    if idx.len() < 2 {
        return Lip::Finite(0.0);
    }
    let worst = pairwise_max(idx.len(), |a, b| {
        let (i, j) = (idx[a], idx[b]);
        let d = space.dist(i, j);
        let vd = value_dist(i, j);
        if d == 0.0 {
            if vd > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            vd / d
        }
    });
    if worst.is_finite() {
        Lip::Finite(worst.max(0.0))
    } else {
        Lip::Unbounded
    }
}

/// Exact sup over pairs of `d_Y(f(x), f(y)) / d_X(x, y)`; 0 for constant
/// maps and domains with fewer than two points.
pub fn lip_constant(map: &MetricMap) -> Lip {
    let idx: Vec<usize> = (0..map.space.len()).collect();
    lip_on(&map.space, &idx, |i, j| map.value_dist(i, j))
}

/// The Pareto frontier of feasible `(λ, M)` pairs for a map, together with
/// the representative `λ* = min { λ : M(λ) = 0 }`.
///
/// `M(λ) = max over pairs of (d_Y(f(x), f(y)) - λ d_X(x, y))⁺` is convex,
/// piecewise linear, and nonincreasing; `pareto` lists its knee points from
/// `(0, M(0))` down to `(λ*, 0)`. For maps with no finite Lipschitz constant
/// `lambda` is infinite and `m_add` is the residual offset.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AsymptoticFit {
    pub lambda: f64,
    pub m_add: f64,
    pub pareto: Vec<(f64, f64)>,
}

impl AsymptoticFit {
    /// The fitted `(λ, M)` representative as a pair.
    pub fn pair(&self) -> (f64, f64) {
        (self.lambda, self.m_add)
    }
}

/// `M(λ)` computed directly from the definition; independent of the
/// envelope construction inside [`asymptotic_fit`].
pub fn fit_offset<F>(space: &PointedMetricSpace, value_dist: F, lambda: f64) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    pairwise_max(space.len(), |i, j| {
        (value_dist(i, j) - lambda * space.dist(i, j)).max(0.0)
    })
    .max(0.0)
}

pub(crate) fn fit_from_pairs<F>(space: &PointedMetricSpace, value_dist: F) -> AsymptoticFit
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let idx: Vec<usize> = (0..space.len()).collect();
    fit_on(space, &idx, value_dist)
}

/// [`asymptotic_fit`] restricted to the subset `idx`.
pub(crate) fn fit_on<F>(space: &PointedMetricSpace, idx: &[usize], value_dist: F) -> AsymptoticFit
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    // Collect the supporting lines M >= g - λ d, dropping dominated ones.
    let mut lines: Vec<(f64, f64)> = Vec::new(); // (d, g) with g > 0
    let mut zero_d_floor = 0.0f64;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let (i, j) = (idx[a], idx[b]);
            let g = value_dist(i, j);
            if g <= 0.0 {
                continue;
            }
            let d = space.dist(i, j);
            if d == 0.0 {
                zero_d_floor = zero_d_floor.max(g);
            } else {
                lines.push((d, g));
            }
        }
    }
    if lines.is_empty() {
        return if zero_d_floor > 0.0 {
            AsymptoticFit {
                lambda: f64::INFINITY,
                m_add: zero_d_floor,
                pareto: vec![(0.0, zero_d_floor)],
            }
        } else {
            AsymptoticFit {
                lambda: 0.0,
                m_add: 0.0,
                pareto: vec![(0.0, 0.0)],
            }
        };
    }
    // Upper envelope of y = g - λ d via the convex-hull-of-lines scan:
    // slope = -d ascending, ties keep the larger intercept.
    lines.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    lines.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 = kept.1.max(next.1);
            true
        } else {
            false
        }
    });
    let cross = |a: &(f64, f64), b: &(f64, f64)| -> f64 {
        // λ where g_a - λ d_a == g_b - λ d_b
        (a.1 - b.1) / (a.0 - b.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for l in lines {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if cross(&a, &l) <= cross(&a, &b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    // Knees of max(0, envelope) on [0, λ*].
    let lambda_star = hull
        .iter()
        .map(|&(d, g)| g / d)
        .fold(0.0f64, f64::max)
        .max(if zero_d_floor > 0.0 { f64::INFINITY } else { 0.0 });
    let eval = |lam: f64| -> f64 {
        hull.iter()
            .map(|&(d, g)| g - lam * d)
            .fold(zero_d_floor, f64::max)
            .max(0.0)
    };
    let mut pareto = vec![(0.0, eval(0.0))];
    for w in hull.windows(2) {
        let lam = cross(&w[0], &w[1]);
        if lam > 0.0 && (lambda_star.is_infinite() || lam < lambda_star) {
            let m = eval(lam);
            if m > zero_d_floor {
                pareto.push((lam, m));
            }
        }
    }
    let (lambda, m_add) = if lambda_star.is_finite() {
        pareto.push((lambda_star, 0.0));
        (lambda_star, 0.0)
    } else {
        // flat residual from coincident pairs
        let lam_end = hull
            .iter()
            .map(|&(d, g)| ((g - zero_d_floor) / d).max(0.0))
            .fold(0.0f64, f64::max);
        pareto.push((lam_end, zero_d_floor));
        (f64::INFINITY, zero_d_floor)
    };
    pareto.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    AsymptoticFit {
        lambda,
        m_add,
        pareto,
    }
}

/// Pareto frontier of feasible `(λ, M)` for a map; see [`AsymptoticFit`].
pub fn asymptotic_fit(map: &MetricMap) -> AsymptoticFit {
    fit_from_pairs(&map.space, |i, j| map.value_dist(i, j))
}

/// A direction field into the unit sphere `S^m` in `R^(m+1)`.
#[derive(Debug, Clone)]
pub struct SphereMap {
    space: Arc<PointedMetricSpace>,
    dirs: Vec<Vec<f64>>,
}

impl SphereMap {
    pub fn new(space: Arc<PointedMetricSpace>, dirs: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if dirs.len() != space.len() {
            return Err(Error::Input(format!(
                "{} directions for {} points",
                dirs.len(),
                space.len()
            )));
        }
        let dim = dirs.first().map_or(0, Vec::len);
        if dim == 0 || dirs.iter().any(|v| v.len() != dim) {
            return Err(Error::Input("directions must share a positive dimension".into()));
        }
        for (i, v) in dirs.iter().enumerate() {
            let n = vec_norm(v);
            if !close_rel(n, 1.0, tol) {
                return Err(Error::Input(format!(
                    "direction at point {} has norm {n}, not 1",
                    space.id(i)
                )));
            }
        }
        Ok(Self { space, dirs })
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    /// Ambient dimension m+1 of the target sphere.
    pub fn dim(&self) -> usize {
        self.dirs[0].len()
    }

    pub fn dir(&self, i: usize) -> &[f64] {
        &self.dirs[i]
    }

    pub fn dirs(&self) -> &[Vec<f64>] {
        &self.dirs
    }

    /// Lipschitz constant of the direction field restricted to `idx`.
    pub fn lip_on(&self, idx: &[usize]) -> Lip {
        lip_on(&self.space, idx, |i, j| vec_dist(&self.dirs[i], &self.dirs[j]))
    }
}

/// `f'(x) = |x| · f(x)` for a sphere-valued direction field `f`.
#[derive(Debug, Clone)]
pub struct NormPreservingMap {
    sphere: SphereMap,
    values: Vec<Vec<f64>>,
}

/// Induce the norm-preserving map from a direction field. The basepoint gets
/// the exact zero vector.
pub fn induce(f: &SphereMap) -> NormPreservingMap {
    let values = (0..f.space.len())
        .map(|i| {
            let nm = f.space.norm(i);
            f.dirs[i].iter().map(|&c| nm * c).collect()
        })
        .collect();
    NormPreservingMap {
        sphere: f.clone(),
        values,
    }
}

/// Recover the direction field from norm-preserving values. Requires
/// `|v(x)| = |x|` within tolerance; points with zero norm (the basepoint)
/// get `default_direction`.
pub fn project(
    space: Arc<PointedMetricSpace>,
    values: &[Vec<f64>],
    default_direction: &[f64],
    tol: f64,
) -> Result<SphereMap> {
    if values.len() != space.len() {
        return Err(Error::Input(format!(
            "{} values for {} points",
            values.len(),
            space.len()
        )));
    }
    let mut dirs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let vn = vec_norm(v);
        let nm = space.norm(i);
        if !close_rel(vn, nm, tol) {
            return Err(Error::Precondition(format!(
                "map is not norm-preserving at {}: |value| = {vn}, |x| = {nm}",
                space.id(i)
            )));
        }
        if vn == 0.0 || nm == 0.0 {
            dirs.push(default_direction.to_vec());
        } else {
            dirs.push(v.iter().map(|&c| c / vn).collect());
        }
    }
    SphereMap::new(space, dirs, tol.max(DEFAULT_TOL))
}

impl NormPreservingMap {
    pub fn sphere(&self) -> &SphereMap {
        &self.sphere
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.sphere.space
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn value_dist(&self, i: usize, j: usize) -> f64 {
        vec_dist(&self.values[i], &self.values[j])
    }

    pub fn lip(&self) -> Lip {
        let idx: Vec<usize> = (0..self.values.len()).collect();
        lip_on(&self.sphere.space, &idx, |i, j| self.value_dist(i, j))
    }

    pub fn fit(&self) -> AsymptoticFit {
        fit_from_pairs(&self.sphere.space, |i, j| self.value_dist(i, j))
    }

    /// `| |f'(x)| - |x| |` within tolerance at every point.
    pub fn norm_preserving_ok(&self, tol: f64) -> bool {
        (0..self.values.len())
            .all(|i| close_rel(vec_norm(&self.values[i]), self.sphere.space.norm(i), tol))
    }
}

/// One scale of an annulus Lipschitz profile. `band` is the annulus
/// `[r M^(k-1), r M^(k+1))`, `tail` the one-sided annulus `[r M^(k-1), ∞)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileRow {
    pub k: u32,
    pub band_size: usize,
    pub tail_size: usize,
    pub lip_band: f64,
    pub lip_tail: f64,
    pub scaled_band: f64,
    pub scaled_tail: f64,
}

/// The sequences `M^k · Lip(f|band_k)` and `M^k · Lip(f|tail_k)` together
/// with the finite-scale boundedness verdict.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AnnulusProfile {
    pub r: f64,
    pub m_ratio: f64,
    pub rows: Vec<ProfileRow>,
    /// Max of `scaled_band` over all computed k: the profile's bound C.
    pub bound: f64,
    /// Max of `scaled_tail` over all computed k.
    pub bound_tail: f64,
    /// Ratio of the max over the later half of scales to the max over the
    /// earlier half; `>= 2` flags a growth trend.
    pub trend_ratio: f64,
    pub unbounded_trend: bool,
}

/// Per-scale Lipschitz profile of a direction field. Scales run while the
/// band annulus is nonempty; errors when every band is empty.
pub fn annulus_profile(f: &SphereMap, r: f64, m_ratio: f64) -> Result<AnnulusProfile> {
    if !(r > 0.0) || !(m_ratio > 1.0) {
        return Err(Error::Precondition(format!(
            "need r > 0 and M > 1, got r={r}, M={m_ratio}"
        )));
    }
    let space = f.space();
    let max_norm = space.max_norm();
    let mut rows = Vec::new();
    let mut k = 1u32;
    loop {
        let lo = r * m_ratio.powi(k as i32 - 1);
        if lo > max_norm {
            break;
        }
        let hi = r * m_ratio.powi(k as i32 + 1);
        let band = annulus(space, lo, hi)?;
        let tail = annulus(space, lo, f64::INFINITY)?;
        let lip_band = f.lip_on(&band.members).expect_finite("annulus profile")?;
        let lip_tail = f.lip_on(&tail.members).expect_finite("annulus profile")?;
        let scale = m_ratio.powi(k as i32);
        rows.push(ProfileRow {
            k,
            band_size: band.members.len(),
            tail_size: tail.members.len(),
            lip_band,
            lip_tail,
            scaled_band: scale * lip_band,
            scaled_tail: scale * lip_tail,
        });
        k += 1;
        if k > 4096 {
            return Err(Error::Precondition(
                "annulus ladder exceeds 4096 scales; r is too small for this space".into(),
            ));
        }
    }
    if rows.iter().all(|row| row.band_size == 0) {
        return Err(Error::Precondition(
            "no nonempty annulus: every point has norm below r".into(),
        ));
    }
    let bound = rows.iter().fold(0.0f64, |a, r| a.max(r.scaled_band));
    let bound_tail = rows.iter().fold(0.0f64, |a, r| a.max(r.scaled_tail));
    let mid = (rows.len() / 2).max(1);
    let first = rows[..mid].iter().fold(0.0f64, |a, r| a.max(r.scaled_band));
    let last = rows[mid.min(rows.len() - 1)..]
        .iter()
        .fold(0.0f64, |a, r| a.max(r.scaled_band));
    let trend_ratio = if first > 0.0 {
        last / first
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(AnnulusProfile {
        r,
        m_ratio,
        rows,
        bound,
        bound_tail,
        trend_ratio,
        unbounded_trend: trend_ratio >= 2.0,
    })
}

/// Certified Lipschitz bound recovered from a bounded annulus profile.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileLipCert {
    /// `max(r M C + 1, 2/(M-1) + 1)` with C the profile bound.
    pub bound: f64,
    /// Re-measured sup ratio over the covered pairs.
    pub measured: f64,
    pub pairs_checked: usize,
    /// Pairs with a norm strictly between 0 and r, outside every band; the
    /// bound does not speak about them.
    pub pairs_skipped: usize,
}

/// Turn a bounded profile into a Lipschitz bound on the induced
/// norm-preserving map and re-verify it by direct pair enumeration.
///
/// Covered pairs have both norms `>= r` or touch the basepoint; pairs with a
/// norm in `(0, r)` are counted but not bounded (their values satisfy
/// `|f'(x)| = |x| < r` instead).
pub fn profile_implies_lipschitz(
    f: &SphereMap,
    profile: &AnnulusProfile,
    tol: f64,
) -> Result<ProfileLipCert> {
    if profile.unbounded_trend {
        return Err(Error::Precondition(format!(
            "unbounded profile: growth trend ratio {:.3} >= 2",
            profile.trend_ratio
        )));
    }
    let (r, m, c) = (profile.r, profile.m_ratio, profile.bound);
    let bound = (r * m * c + 1.0).max(2.0 / (m - 1.0) + 1.0);
    let fp = induce(f);
    let space = f.space();
    let n = space.len();
    let mut measured = 0.0f64;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let (ni, nj) = (space.norm(i), space.norm(j));
            let low = ni.min(nj);
            if low > 0.0 && low < r {
                skipped += 1;
                continue;
            }
            checked += 1;
            let d = space.dist(i, j);
            let vd = fp.value_dist(i, j);
            if d == 0.0 {
                if vd > 0.0 {
                    return Err(Error::Precondition(
                        "space is not discrete: coincident points with distinct values".into(),
                    ));
                }
                continue;
            }
            measured = measured.max(vd / d);
        }
    }
    if !leq_rel(measured, bound, tol) {
        return Err(Error::Certificate(format!(
            "profile bound {bound} < measured Lipschitz constant {measured}"
        )));
    }
    Ok(ProfileLipCert {
        bound,
        measured,
        pairs_checked: checked,
        pairs_skipped: skipped,
    })
}

/// Max variation of the direction field over pairs that stay within
/// sublinear reach of each other: ordered pairs with both norms `>= r_min`
/// and `d(x, y) <= s(|x|)`. Empty pair sets give 0.
pub fn sublinear_defect(f: &SphereMap, s: &PiecewiseLinearFunction, r_min: f64) -> f64 {
    let space = f.space();
    let n = space.len();
    pairwise_max(n, |i, j| {
        let (ni, nj) = (space.norm(i), space.norm(j));
        if ni.min(nj) < r_min {
            return 0.0;
        }
        let d = space.dist(i, j);
        if d <= s.eval(ni) || d <= s.eval(nj) {
            vec_dist(f.dir(i), f.dir(j))
        } else {
            0.0
        }
    })
    .max(0.0)
}

/// Upper bound on the defect implied by a fit `(λ, M)` of the induced map:
/// `(λ+1) · sup{ s(r)/r : r >= R } + M / R`.
pub fn defect_fit_bound(
    lambda: f64,
    m_add: f64,
    s: &PiecewiseLinearFunction,
    r_min: f64,
) -> Result<f64> {
    Ok((lambda + 1.0) * s.sup_ratio_from(r_min)? + m_add / r_min)
}

/// Pointwise variation certificate: if `f'` fits `(λ, M)`, then for every
/// ordered pair `|x| · |f(x) - f(y)| <= (λ+1) d(x, y) + M`. Returns the
/// worst slack (max of lhs - rhs; nonpositive when the certificate holds).
pub fn variation_cert(f: &SphereMap, lambda: f64, m_add: f64, tol: f64) -> Result<f64> {
    let space = f.space();
    let worst = pairwise_max(space.len(), |i, j| {
        let d = space.dist(i, j);
        let chord = vec_dist(f.dir(i), f.dir(j));
        let rhs = (lambda + 1.0) * d + m_add;
        (space.norm(i) * chord - rhs).max(space.norm(j) * chord - rhs)
    })
    .max(f64::NEG_INFINITY);
    if worst > tol * (lambda + m_add).max(1.0) {
        return Err(Error::Certificate(format!(
            "pointwise variation bound violated by {worst}"
        )));
    }
    Ok(worst)
}

/// A certified linear lower bound on value norms: `|f(x)| >= c |x| - b`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RadialGrowthBound {
    pub c: f64,
    pub b: f64,
}

impl RadialGrowthBound {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        if !(c > 0.0) || !(b >= 0.0) || !c.is_finite() || !b.is_finite() {
            return Err(Error::Input(format!(
                "growth bound needs c > 0 and b >= 0, got c={c}, b={b}"
            )));
        }
        Ok(Self { c, b })
    }

    /// Check the bound on an instance given the value norms per point.
    pub fn holds(&self, space: &PointedMetricSpace, value_norms: &[f64], tol: f64) -> bool {
        (0..space.len()).all(|i| leq_rel(self.c * space.norm(i) - self.b, value_norms[i], tol))
    }
}

/// One direction of the rescaling-transfer certificate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TransferCheck {
    /// Pairs handled by the low-norm branch `|y| <= b/c`.
    pub pairs_low: usize,
    /// Pairs handled by the main branch.
    pub pairs_main: usize,
    /// Max of lhs - rhs over all pairs; nonpositive when the bound holds.
    pub worst_slack: f64,
}

/// Result of replacing the radial factor `|x|` by a scale function `s`.
#[derive(Debug, Clone)]
pub struct RescaleTransfer {
    /// `F(x) = s(x) · f(x)`.
    pub scaled_values: Vec<Vec<f64>>,
    /// Slope/offset so that both `|s(x) - s(y)| <= λ d + M` and
    /// `s(x) <= λ |x| + M` hold on the instance.
    pub lambda_s: f64,
    pub m_s: f64,
    /// Half the certified growth slope (the transfer inequalities are stated
    /// for `s(x) >= 2c|x| - b`).
    pub c_half: f64,
    pub b: f64,
    /// Fit of the induced `f'`.
    pub fit_induced: (f64, f64),
    /// Enlarged fit covering `F`, `s`-variation, and the `s` upper bound.
    pub fit_back: (f64, f64),
    pub forward: TransferCheck,
    pub backward: TransferCheck,
}

/// Transport a direction field along a nonnegative scale function with a
/// certified growth bound, checking the explicit inequalities of both
/// transfer directions on the instance.
pub fn rescale_transfer(
    f: &SphereMap,
    s_values: &[f64],
    growth: RadialGrowthBound,
    tol: f64,
) -> Result<RescaleTransfer> {
    let space = f.space().clone();
    let n = space.len();
    if s_values.len() != n {
        return Err(Error::Input(format!("{} scale values for {n} points", s_values.len())));
    }
    if s_values.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::Precondition("scale function must be nonnegative".into()));
    }
    if !(growth.b > 0.0) {
        return Err(Error::Precondition(
            "transfer inequalities need a strictly positive growth offset b".into(),
        ));
    }
    for i in 0..n {
        if !leq_rel(growth.c * space.norm(i) - growth.b, s_values[i], tol) {
            return Err(Error::Precondition(format!(
                "scale function violates its growth bound at {}: s = {}, c|x| - b = {}",
                space.id(i),
                s_values[i],
                growth.c * space.norm(i) - growth.b
            )));
        }
    }
    let scaled_values: Vec<Vec<f64>> = (0..n)
        .map(|i| f.dir(i).iter().map(|&c| s_values[i] * c).collect())
        .collect();

    let s_map = MetricMap::real(space.clone(), s_values)?;
    let lambda_s = lip_constant(&s_map).expect_finite("scale function")?;
    let m_s = (0..n)
        .map(|i| s_values[i] - lambda_s * space.norm(i))
        .fold(0.0f64, f64::max);
    let c_half = growth.c / 2.0;
    let b = growth.b;

    let induced = induce(f);
    let u = induced.fit().lambda;
    if !u.is_finite() {
        return Err(Error::Precondition("induced map has no finite fit".into()));
    }
    let v = 0.0;

    let scaled_map = MetricMap::euclidean(space.clone(), scaled_values.clone())?;
    let lambda_f_scaled = lip_constant(&scaled_map).expect_finite("scaled map")?;
    let lam_back = lambda_s.max(lambda_f_scaled);
    let m_back = m_s;

    let cutoff = b / c_half;
    let slack_scale = (lambda_s + m_s + u + 1.0).max(1.0);

    let mut fw_low = 0usize;
    let mut fw_main = 0usize;
    let mut bw_low = 0usize;
    let mut bw_main = 0usize;
    let mut fw_worst = f64::NEG_INFINITY;
    let mut bw_worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            // orient so |x| >= |y|
            let (x, y) = if space.norm(i) >= space.norm(j) {
                (i, j)
            } else {
                (j, i)
            };
            let d = space.dist(x, y);
            let ny = space.norm(y);
            let df = vec_dist(&scaled_values[x], &scaled_values[y]);
            let dfp = induced.value_dist(x, y);
            if ny <= cutoff {
                fw_low += 1;
                bw_low += 1;
                fw_worst = fw_worst.max(df - (lambda_s * d + 2.0 * lambda_s * cutoff + 2.0 * m_s));
                bw_worst = bw_worst.max(dfp - (d + 2.0 * cutoff));
            } else {
                fw_main += 1;
                bw_main += 1;
                let rhs_f =
                    (lambda_s + m_s * c_half / b) * (u * d + d + v) + lambda_s * d + m_s;
                fw_worst = fw_worst.max(df - rhs_f);
                let rhs_b = (2.0 * lam_back * d + 2.0 * m_back) / c_half + d;
                bw_worst = bw_worst.max(dfp - rhs_b);
            }
        }
    }
    if fw_worst > tol * slack_scale {
        return Err(Error::Certificate(format!(
            "forward transfer inequality violated by {fw_worst}"
        )));
    }
    if bw_worst > tol * slack_scale {
        return Err(Error::Certificate(format!(
            "backward transfer inequality violated by {bw_worst}"
        )));
    }
    Ok(RescaleTransfer {
        scaled_values,
        lambda_s,
        m_s,
        c_half,
        b,
        fit_induced: (u, v),
        fit_back: (lam_back, m_back),
        forward: TransferCheck {
            pairs_low: fw_low,
            pairs_main: fw_main,
            worst_slack: fw_worst,
        },
        backward: TransferCheck {
            pairs_low: bw_low,
            pairs_main: bw_main,
            worst_slack: bw_worst,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::line_space;
    use proptest::prelude::*;

    fn arc(space: PointedMetricSpace) -> Arc<PointedMetricSpace> {
        Arc::new(space)
    }

    /// Planar cloud with the tautological direction field (x - base)/|x - base|;
    /// the induced map is an isometry, so Lip(f') = 1 exactly.
    pub(crate) fn planar_identity(points: &[(f64, f64)]) -> SphereMap {
        let ids: Vec<String> = (0..points.len()).map(|i| format!("q{i}")).collect();
        let matrix: Vec<Vec<f64>> = points
            .iter()
            .map(|&(ax, ay)| {
                points
                    .iter()
                    .map(|&(bx, by)| ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        let space = arc(PointedMetricSpace::new(ids, &matrix, "q0").unwrap());
        let base = points[0];
        let dirs: Vec<Vec<f64>> = points
            .iter()
            .map(|&(x, y)| {
                let (dx, dy) = (x - base.0, y - base.1);
                let n = (dx * dx + dy * dy).sqrt();
                if n == 0.0 {
                    vec![1.0, 0.0]
                } else {
                    vec![dx / n, dy / n]
                }
            })
            .collect();
        SphereMap::new(space, dirs, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn lip_identity_and_square() {
        let s = arc(line_space(&[0.0, 1.0, 2.0]));
        let ident = MetricMap::real(s.clone(), &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(lip_constant(&ident), Lip::Finite(1.0));
        let square = MetricMap::real(s.clone(), &[0.0, 1.0, 4.0]).unwrap();
        // brute force over pairs: ratios 1, 3, 2
        assert_eq!(lip_constant(&square), Lip::Finite(3.0));
        let constant = MetricMap::real(s, &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(lip_constant(&constant), Lip::Finite(0.0));
    }

    #[test]
    fn lip_unbounded_on_coincident_points() {
        let sp = PointedMetricSpace::new(
            vec!["a".into(), "b".into()],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            "a",
        )
        .unwrap();
        let m = MetricMap::real(arc(sp), &[0.0, 1.0]).unwrap();
        assert_eq!(lip_constant(&m), Lip::Unbounded);
    }

    #[test]
    fn fit_of_one_lipschitz_map_contains_knee() {
        let s = arc(line_space(&[0.0, 1.0, 2.0]));
        let ident = MetricMap::real(s, &[0.0, 1.0, 2.0]).unwrap();
        let fit = asymptotic_fit(&ident);
        assert_eq!(fit.lambda, 1.0);
        assert_eq!(fit.m_add, 0.0);
        assert!(fit.pareto.contains(&(1.0, 0.0)));
    }

    #[test]
    fn fit_frontier_endpoints() {
        // values {0, 0, 10} on {0, 1, 2}: M(0) = 10, smallest λ with M = 0 is 10
        let s = arc(line_space(&[0.0, 1.0, 2.0]));
        let m = MetricMap::real(s, &[0.0, 0.0, 10.0]).unwrap();
        let fit = asymptotic_fit(&m);
        assert_eq!(fit.pareto.first(), Some(&(0.0, 10.0)));
        assert_eq!(fit.pareto.last(), Some(&(10.0, 0.0)));
        assert_eq!(fit.lambda, 10.0);
    }

    #[test]
    fn fit_envelope_matches_direct_offsets() {
        let coords = [0.0, 0.7, 1.9, 3.1, 7.5, 11.0];
        let values = [0.0, 2.0, 1.0, 9.0, 4.0, 12.0];
        let s = arc(line_space(&coords));
        let m = MetricMap::real(s.clone(), &values).unwrap();
        let fit = asymptotic_fit(&m);
        // λ-sweep oracle: frontier values must equal the direct definition
        for &(lam, off) in &fit.pareto {
            let direct = fit_offset(&s, |i, j| m.value_dist(i, j), lam);
            assert!(
                close_rel(off, direct, 1e-9),
                "knee ({lam}, {off}) vs direct {direct}"
            );
        }
        // feasibility at every knee
        for &(lam, off) in &fit.pareto {
            for i in 0..coords.len() {
                for j in 0..coords.len() {
                    assert!(m.value_dist(i, j) <= lam * s.dist(i, j) + off + 1e-9);
                }
            }
        }
    }

    #[test]
    fn fit_with_coincident_points_reports_residual() {
        // coincident points carrying distinct values: no finite λ*, the
        // frontier bottoms out at the residual offset
        let sp = PointedMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            "a",
        )
        .unwrap();
        let m = MetricMap::real(arc(sp), &[0.0, 3.0, 4.0]).unwrap();
        let fit = asymptotic_fit(&m);
        assert!(fit.lambda.is_infinite());
        assert_eq!(fit.m_add, 3.0);
        assert_eq!(fit.pareto.first(), Some(&(0.0, 4.0)));
        assert_eq!(fit.pareto.last().map(|&(_, m)| m), Some(3.0));
    }

    #[test]
    fn fit_pareto_offsets_are_nonincreasing() {
        let coords = [0.0, 1.0, 2.5, 6.0, 7.3];
        let values = [1.0, -2.0, 5.5, 0.0, 9.1];
        let m = MetricMap::real(arc(line_space(&coords)), &values).unwrap();
        let fit = asymptotic_fit(&m);
        for w in fit.pareto.windows(2) {
            assert!(w[1].0 > w[0].0, "knee abscissae increase");
            assert!(w[1].1 <= w[0].1, "offsets never increase");
        }
    }

    #[test]
    fn sphere_map_rejects_non_unit_directions() {
        let s = arc(line_space(&[0.0, 1.0]));
        let bad = SphereMap::new(s, vec![vec![1.0, 0.0], vec![0.5, 0.5]], DEFAULT_TOL);
        assert!(matches!(bad, Err(Error::Input(_))));
    }

    #[test]
    fn profile_cert_skips_sub_scale_pairs() {
        // one point with norm strictly between 0 and r is outside every band:
        // its pairs are counted as skipped, the rest re-verified
        let s = arc(line_space(&[0.0, 0.4, 1.0, 2.0, 4.0]));
        let f = SphereMap::new(s, vec![vec![1.0, 0.0]; 5], DEFAULT_TOL).unwrap();
        let p = annulus_profile(&f, 1.0, 2.0).unwrap();
        let cert = profile_implies_lipschitz(&f, &p, DEFAULT_TOL).unwrap();
        // pairs of the norm-0.4 point with the three points of norm >= 1
        assert_eq!(cert.pairs_skipped, 3);
        assert_eq!(cert.pairs_checked, 7);
    }

    #[test]
    fn induce_constant_direction_is_isometric() {
        let s = arc(line_space(&[0.0, 1.0, 2.0]));
        let dirs = vec![vec![1.0, 0.0]; 3];
        let f = SphereMap::new(s, dirs, DEFAULT_TOL).unwrap();
        let fp = induce(&f);
        assert_eq!(fp.value(0), &[0.0, 0.0]);
        assert_eq!(fp.value(1), &[1.0, 0.0]);
        assert_eq!(fp.value(2), &[2.0, 0.0]);
        assert_eq!(fp.lip(), Lip::Finite(1.0));
        assert!(fp.norm_preserving_ok(DEFAULT_TOL));
    }

    #[test]
    fn project_round_trips_off_basepoint() {
        let f = planar_identity(&[(0.0, 0.0), (1.0, 2.0), (3.0, -1.0), (-2.0, 0.5)]);
        let fp = induce(&f);
        let back = project(
            f.space().clone(),
            fp.values(),
            &canonical_direction(2),
            DEFAULT_TOL,
        )
        .unwrap();
        for i in 0..f.space().len() {
            if i == f.space().basepoint() {
                assert_eq!(back.dir(i), &[1.0, 0.0]);
            } else {
                assert!(vec_dist(back.dir(i), f.dir(i)) < 1e-12);
            }
        }
    }

    #[test]
    fn project_rejects_norm_violation() {
        let s = arc(line_space(&[0.0, 1.0]));
        let r = project(s, &[vec![0.0], vec![2.0]], &[1.0], DEFAULT_TOL);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn profile_of_constant_direction_is_zero() {
        let s = arc(line_space(&[0.0, 1.0, 2.0, 4.0, 8.0, 16.0]));
        let f = SphereMap::new(s, vec![vec![0.0, 1.0]; 6], DEFAULT_TOL).unwrap();
        let p = annulus_profile(&f, 1.0, 2.0).unwrap();
        assert!(p.rows.iter().all(|r| r.scaled_band == 0.0 && r.scaled_tail == 0.0));
        assert_eq!(p.bound, 0.0);
        assert!(!p.unbounded_trend);
    }

    #[test]
    fn forward_profile_constant_for_lipschitz_induced_map() {
        // induced map is 1-Lipschitz by construction; tail rows obey
        // M^k Lip(f|tail_k) <= M (λ+1) / r for k >= 2
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let a = i as f64 * 0.37;
                (a.cos() * (i as f64 + 1.0), a.sin() * (i as f64 + 1.0))
            })
            .collect();
        let f = planar_identity(&pts);
        let lam = induce(&f).lip().finite().unwrap();
        let r = (1..pts.len())
            .map(|i| f.space().norm(i))
            .fold(f64::INFINITY, f64::min);
        let m = 2.0;
        let p = annulus_profile(&f, r, m).unwrap();
        let cap = m * (lam + 1.0) / r;
        for row in p.rows.iter().filter(|row| row.k >= 2) {
            assert!(
                leq_rel(row.scaled_tail, cap, 1e-9),
                "k={}: {} > {}",
                row.k,
                row.scaled_tail,
                cap
            );
        }
    }

    #[test]
    fn profile_bound_certificate_for_constant_map() {
        let s = arc(line_space(&[0.0, 1.0, 2.0, 4.0, 8.0]));
        let f = SphereMap::new(s, vec![vec![1.0, 0.0]; 5], DEFAULT_TOL).unwrap();
        let p = annulus_profile(&f, 1.0, 2.0).unwrap();
        assert_eq!(p.bound, 0.0);
        let cert = profile_implies_lipschitz(&f, &p, DEFAULT_TOL).unwrap();
        assert_eq!(cert.bound, 3.0); // max(1·2·0 + 1, 2/(2-1) + 1)
        assert!(cert.measured <= 1.0 + 1e-12);
        assert_eq!(cert.pairs_skipped, 0);
    }

    #[test]
    fn profile_cert_sound_on_lipschitz_instances() {
        let pts: Vec<(f64, f64)> = (0..25)
            .map(|i| ((i as f64) * 1.3 + 1.0, (i as f64 * 0.7).sin() * 2.0))
            .collect();
        let mut all = vec![(0.0, 0.0)];
        all.extend(pts);
        let f = planar_identity(&all);
        let r = (1..all.len())
            .map(|i| f.space().norm(i))
            .fold(f64::INFINITY, f64::min);
        let p = annulus_profile(&f, r, 2.0).unwrap();
        assert!(!p.unbounded_trend, "trend {}", p.trend_ratio);
        let cert = profile_implies_lipschitz(&f, &p, DEFAULT_TOL).unwrap();
        let actual = induce(&f).lip().finite().unwrap();
        assert!(cert.bound >= actual - 1e-9);
        assert!(close_rel(cert.measured, actual, 1e-9));
    }

    #[test]
    fn defect_of_constant_map_is_zero() {
        let s = arc(line_space(&[0.0, 1.0, 5.0, 9.0]));
        let f = SphereMap::new(s, vec![vec![1.0, 0.0]; 4], DEFAULT_TOL).unwrap();
        let sq = PiecewiseLinearFunction::new(vec![(1.0, 1.0), (100.0, 10.0)], 0.0).unwrap();
        assert_eq!(sublinear_defect(&f, &sq, 0.0), 0.0);
        assert_eq!(sublinear_defect(&f, &sq, 100.0), 0.0);
    }

    #[test]
    fn defect_bounded_by_fit_formula() {
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|i| ((i as f64).mul_add(0.9, 1.0), ((i * i) as f64 * 0.1).cos()))
            .collect();
        let mut all = vec![(0.0, 0.0)];
        all.extend(pts);
        let f = planar_identity(&all);
        let fit = induce(&f).fit();
        let bps: Vec<(f64, f64)> = [1.0f64, 4.0, 9.0, 16.0, 25.0]
            .iter()
            .map(|&t| (t, t.sqrt()))
            .collect();
        let s = PiecewiseLinearFunction::new(bps, 0.0).unwrap();
        for r_min in [1.0, 2.0, 5.0] {
            let defect = sublinear_defect(&f, &s, r_min);
            let bound = defect_fit_bound(fit.lambda, fit.m_add, &s, r_min).unwrap();
            assert!(defect <= bound + 1e-9, "R={r_min}: {defect} > {bound}");
        }
        // the literal pointwise inequality behind the bound
        variation_cert(&f, fit.lambda, fit.m_add, DEFAULT_TOL).unwrap();
    }

    #[test]
    fn rescale_with_norms_is_identity() {
        let f = planar_identity(&[(0.0, 0.0), (1.0, 1.0), (4.0, 0.0), (0.0, 3.0)]);
        let norms: Vec<f64> = (0..4).map(|i| f.space().norm(i)).collect();
        let growth = RadialGrowthBound::new(1.0, 0.5).unwrap();
        let t = rescale_transfer(&f, &norms, growth, DEFAULT_TOL).unwrap();
        let fp = induce(&f);
        assert_eq!(t.scaled_values, fp.values());
        assert!(t.forward.worst_slack <= 0.0);
        assert!(t.backward.worst_slack <= 0.0);
    }

    #[test]
    fn rescale_affine_scale_function() {
        let f = planar_identity(&[(0.0, 0.0), (1.0, 0.5), (3.0, 2.0), (6.0, -1.0), (10.0, 4.0)]);
        let s_vals: Vec<f64> = (0..5).map(|i| 2.0 * f.space().norm(i) + 1.0).collect();
        let growth = RadialGrowthBound::new(2.0, 1.0).unwrap();
        let t = rescale_transfer(&f, &s_vals, growth, DEFAULT_TOL).unwrap();
        assert!(t.lambda_s <= 2.0 + 1e-9);
        assert!(t.m_s >= 1.0 - 1e-9);
        assert_eq!(t.forward.pairs_low + t.forward.pairs_main, 10);
    }

    #[test]
    fn rescale_affine_on_integer_line_doubles_the_fit() {
        // constant field on {0..100}: F(x) = (2|x|+1)·v, so Lip(F) = 2·Lip(f')
        let coords: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let s = arc(line_space(&coords));
        let f = SphereMap::new(s.clone(), vec![vec![0.0, 1.0]; 101], DEFAULT_TOL).unwrap();
        let s_vals: Vec<f64> = (0..=100).map(|i| 2.0 * s.norm(i) + 1.0).collect();
        let growth = RadialGrowthBound::new(2.0, 1.0).unwrap();
        let t = rescale_transfer(&f, &s_vals, growth, DEFAULT_TOL).unwrap();
        let scaled = MetricMap::euclidean(s.clone(), t.scaled_values.clone()).unwrap();
        let lip_scaled = lip_constant(&scaled).finite().unwrap();
        let lip_induced = induce(&f).lip().finite().unwrap();
        assert!((lip_induced - 1.0).abs() < 1e-12);
        assert!(lip_scaled <= 2.0 * lip_induced + 1e-9);
    }

    #[test]
    fn rescale_rejects_growth_violation() {
        let f = planar_identity(&[(0.0, 0.0), (5.0, 0.0)]);
        let growth = RadialGrowthBound::new(1.0, 1.0).unwrap();
        // s(x) = 0 at a point with |x| = 5 violates s >= |x| - 1
        let r = rescale_transfer(&f, &[0.0, 0.0], growth, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    proptest! {
        #[test]
        fn fit_is_feasible_and_discreteness_bridges_to_lip(
            coords in proptest::collection::vec(0.0f64..40.0, 2..15),
            values in proptest::collection::vec(-10.0f64..10.0, 15),
        ) {
            let mut c = coords;
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            prop_assume!(c.len() >= 2);
            let n = c.len();
            let s = arc(line_space(&c));
            let m = MetricMap::real(s.clone(), &values[..n]).unwrap();
            let fit = asymptotic_fit(&m);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(m.value_dist(i, j) <= fit.lambda * s.dist(i, j) + fit.m_add + 1e-9);
                }
            }
            // discreteness bridge: lip <= λ + M/ε for every frontier point
            let eps = s.validate(DEFAULT_TOL).min_distinct_distance.unwrap();
            prop_assume!(eps > 0.0);
            let lip = lip_constant(&m).finite().unwrap();
            for &(lam, off) in &fit.pareto {
                prop_assert!(lip <= lam + off / eps + 1e-6);
            }
        }

        #[test]
        fn composition_submultiplicative(
            coords in proptest::collection::vec(0.0f64..20.0, 3..10),
            scale in 0.1f64..3.0,
        ) {
            let mut c = coords;
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            prop_assume!(c.len() >= 3);
            let s = arc(line_space(&c));
            // f: x -> scale·x into the same line geometry, g: y -> y²-ish
            let f_vals: Vec<f64> = c.iter().map(|&x| scale * x).collect();
            let g_of_f: Vec<f64> = f_vals.iter().map(|&y| y * y * 0.1).collect();
            let f = MetricMap::real(s.clone(), &f_vals).unwrap();
            let gf = MetricMap::real(s.clone(), &g_of_f).unwrap();
            let lip_f = lip_constant(&f).finite().unwrap();
            let lip_gf = lip_constant(&gf).finite().unwrap();
            // lip(g) over the image points
            let img = line_space(&f_vals);
            let g = MetricMap::real(arc(img), &g_of_f).unwrap();
            let lip_g = lip_constant(&g).finite().unwrap();
            prop_assert!(lip_gf <= lip_g * lip_f + 1e-9);
        }

        #[test]
        fn norm_preservation_is_exact(
            pts in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 2..12),
        ) {
            let mut all = vec![(0.0, 0.0)];
            all.extend(pts);
            all.dedup_by(|a, b| (a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-6);
            let f = planar_identity(&all);
            let fp = induce(&f);
            prop_assert!(fp.norm_preserving_ok(DEFAULT_TOL));
            prop_assert_eq!(vec_norm(fp.value(f.space().basepoint())), 0.0);
        }
    }
}
