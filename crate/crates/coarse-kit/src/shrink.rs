//! Shrinking colored covers: nerve maps, pushing preimages of top simplices
//! to their boundaries, shrunk sets, and multiplicity/Lebesgue certification.
//!
//! A colored cover at scale `r` has `m+2` color classes, sets of the same
//! color pairwise at distance `>= r`, and mesh at most `C·r`. Shrinking
//! keeps every membership of a point lying in at most `m+1` sets, and for a
//! point in `m+2` sets keeps only the memberships whose barycentric
//! coordinate stays positive after its top-simplex preimage is pushed onto
//! the simplex boundary. The result has multiplicity at most `m+1` with a
//! Lebesgue number certified against `r / (λ (m+2) t)`.

use std::collections::BTreeSet;

use crate::cones::SphereSimplexHomeo;
use crate::extension::{extend_sphere_map, ExtendStrategy};
use crate::maps::{canonical_direction, lip_on, vec_dist};
use crate::partitions::{canonical_partition, Cover};
use crate::space::PointedMetricSpace;
use crate::{leq_rel, Error, Result, DEFAULT_TOL};

/// A cover whose sets carry colors `1..=m+2`, with its scale and mesh data.
#[derive(Debug, Clone)]
pub struct ColoredCover {
    cover: Cover,
    colors: Vec<usize>,
    r: f64,
    mesh_c: f64,
}

impl ColoredCover {
    pub fn new(cover: Cover, colors: Vec<usize>, r: f64, mesh_c: f64) -> Result<Self> {
        if colors.len() != cover.k() {
            return Err(Error::Input(format!(
                "{} colors for {} sets",
                colors.len(),
                cover.k()
            )));
        }
        if !(r > 0.0) || !(mesh_c > 0.0) {
            return Err(Error::Input(format!("need r > 0 and C > 0, got r={r}, C={mesh_c}")));
        }
        let mx = *colors.iter().max().unwrap();
        if mx < 2 {
            return Err(Error::Input("need at least two colors".into()));
        }
        if colors.iter().any(|&c| c == 0) {
            return Err(Error::Input("colors are 1-based".into()));
        }
        Ok(Self {
            cover,
            colors,
            r,
            mesh_c,
        })
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn space(&self) -> &PointedMetricSpace {
        self.cover.space()
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mesh_c(&self) -> f64 {
        self.mesh_c
    }

    /// Number of color classes `m+2`.
    pub fn color_count(&self) -> usize {
        *self.colors.iter().max().unwrap()
    }

    /// The `m` with `m+2` colors.
    pub fn m(&self) -> usize {
        self.color_count() - 2
    }

    fn set_diameter(&self, s: usize) -> f64 {
        let set = self.cover.set(s);
        let mut d = 0.0f64;
        for a in 0..set.len() {
            for b in a + 1..set.len() {
                d = d.max(self.space().dist(set[a], set[b]));
            }
        }
        d
    }

    fn set_gap(&self, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.cover.set(a), self.cover.set(b));
        let mut g = f64::INFINITY;
        for &i in sa {
            for &j in sb {
                g = g.min(self.space().dist(i, j));
            }
        }
        g
    }
}

/// Validation report for the coloring invariants.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ColoredCoverReport {
    pub r_disjoint_ok: bool,
    /// `(set_a, set_b, gap)` of the worst same-color pair, if any pair exists.
    pub worst_same_color_gap: Option<(usize, usize, f64)>,
    pub mesh_ok: bool,
    /// `(set, diameter)` of the widest set.
    pub worst_diameter: (usize, f64),
}

/// Check same-color r-disjointness and the mesh bound, reporting worst cases.
pub fn validate_colored_cover(cc: &ColoredCover) -> ColoredCoverReport {
    let k = cc.cover.k();
    let mut worst_gap: Option<(usize, usize, f64)> = None;
    for a in 0..k {
        for b in a + 1..k {
            if cc.colors[a] != cc.colors[b] {
                continue;
            }
            let g = cc.set_gap(a, b);
            if worst_gap.map_or(true, |(_, _, wg)| g < wg) {
                worst_gap = Some((a, b, g));
            }
        }
    }
    let mut worst_diam = (0usize, 0.0f64);
    for s in 0..k {
        let d = cc.set_diameter(s);
        if d > worst_diam.1 {
            worst_diam = (s, d);
        }
    }
    ColoredCoverReport {
        r_disjoint_ok: worst_gap.map_or(true, |(_, _, g)| g >= cc.r),
        worst_same_color_gap: worst_gap,
        mesh_ok: worst_diam.1 <= cc.mesh_c * cc.r,
        worst_diameter: worst_diam,
    }
}

/// The canonical nerve map of a colored cover with its measured scale-free
/// constant `λ = r · Lip(φ)`.
#[derive(Debug, Clone)]
pub struct NerveReport {
    /// Barycentric coordinates per point.
    pub coords: Vec<Vec<f64>>,
    pub lip: f64,
    pub lambda: f64,
}

pub fn nerve_map(cc: &ColoredCover) -> Result<NerveReport> {
    let p = canonical_partition(cc.cover.clone())?;
    let n = cc.space().len();
    let coords: Vec<Vec<f64>> = (0..n).map(|x| p.phi(x).to_vec()).collect();
    let idx: Vec<usize> = (0..n).collect();
    let lip = lip_on(cc.space(), &idx, |i, j| vec_dist(&coords[i], &coords[j]))
        .expect_finite("nerve map")?;
    Ok(NerveReport {
        coords,
        lip,
        lambda: cc.r * lip,
    })
}

/// Per-top-simplex record of the shrink pipeline.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TopSimplexInfo {
    /// Set indices spanning the simplex, sorted.
    pub sets: Vec<usize>,
    pub preimage_size: usize,
    pub anchored: usize,
    pub lip_phi: f64,
    pub lip_psi: f64,
    /// `Lip(ψ) / Lip(φ)`, 0 when `Lip(φ) = 0`.
    pub ratio: f64,
    pub diameter: f64,
}

/// Everything the shrink run produced and certified.
#[derive(Debug, Clone)]
pub struct ShrinkReport {
    /// Shrunk sets `s(U)`, aligned with the cover's sets.
    pub shrunk: Vec<Vec<usize>>,
    pub multiplicity: usize,
    pub lebesgue: f64,
    /// `r / (λ (m+2) t)`.
    pub lebesgue_target: f64,
    pub lambda: f64,
    pub t: f64,
    /// Points contained in at most `m+1` cover elements.
    pub low_multiplicity: Vec<usize>,
    pub tops: Vec<TopSimplexInfo>,
    pub max_preimage_diameter: f64,
    /// `2 C r`.
    pub preimage_diameter_bound: f64,
    pub multiplicity_ok: bool,
    pub lebesgue_ok: bool,
    pub preimage_diameter_ok: bool,
    pub warnings: Vec<String>,
}

/// Run the shrink pipeline on a colored cover.
pub fn shrink(cc: &ColoredCover, strategy: ExtendStrategy) -> Result<ShrinkReport> {
    let space = cc.space();
    let n = space.len();
    let m = cc.m();
    let m_plus_2 = cc.color_count();
    let mut warnings = Vec::new();

    let check = validate_colored_cover(cc);
    if !check.r_disjoint_ok {
        return Err(Error::Precondition(format!(
            "same-colored sets closer than r: {:?}",
            check.worst_same_color_gap
        )));
    }
    if !check.mesh_ok {
        return Err(Error::Precondition(format!(
            "mesh bound violated: set {} has diameter {}",
            check.worst_diameter.0, check.worst_diameter.1
        )));
    }

    let partition = canonical_partition(cc.cover.clone())?;
    let nerve = nerve_map(cc)?;

    let incidence: Vec<Vec<usize>> = (0..n).map(|x| cc.cover.incidence(x)).collect();
    if let Some(x) = (0..n).find(|&x| incidence[x].len() > m_plus_2) {
        return Err(Error::Precondition(format!(
            "point {} lies in {} sets, more than the {} colors",
            space.id(x),
            incidence[x].len(),
            m_plus_2
        )));
    }
    let low: Vec<usize> = (0..n).filter(|&x| incidence[x].len() <= m + 1).collect();
    let is_low = {
        let mut mask = vec![false; n];
        for &x in &low {
            mask[x] = true;
        }
        mask
    };

    // top simplices = supports of points lying in m+2 sets
    let tops_set: BTreeSet<Vec<usize>> = (0..n)
        .filter(|&x| incidence[x].len() == m_plus_2)
        .map(|x| incidence[x].clone())
        .collect();

    let homeo = SphereSimplexHomeo::new(m);
    let mut shrunk: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cc.cover.k()];
    for (set_idx, shrunk_set) in shrunk.iter_mut().enumerate() {
        for &x in cc.cover.set(set_idx) {
            if is_low[x] {
                shrunk_set.insert(x);
            }
        }
    }

    let mut tops = Vec::new();
    let mut t_max: Option<f64> = None;
    let mut max_diam = 0.0f64;
    for delta in &tops_set {
        // preimage: points whose support lies inside the simplex
        let preimage: Vec<usize> = (0..n)
            .filter(|&x| incidence[x].iter().all(|s| delta.binary_search(s).is_ok()))
            .collect();
        let coords_of = |x: usize| -> Vec<f64> {
            delta.iter().map(|&s| partition.phi(x)[s]).collect()
        };
        let lip_phi = lip_on(space, &preimage, |i, j| vec_dist(&coords_of(i), &coords_of(j)))
            .expect_finite("simplex preimage map")?;
        let mut diam = 0.0f64;
        for a in 0..preimage.len() {
            for b in a + 1..preimage.len() {
                diam = diam.max(space.dist(preimage[a], preimage[b]));
            }
        }
        max_diam = max_diam.max(diam);

        let anchored: Vec<usize> = preimage.iter().copied().filter(|&x| is_low[x]).collect();
        // ψ values on the preimage, in simplex-boundary coordinates
        let mut psi: Vec<(usize, Vec<f64>)> = Vec::with_capacity(preimage.len());
        if anchored.is_empty() {
            warnings.push(format!(
                "top simplex {delta:?} has no low-multiplicity points; pushing radially"
            ));
            for &x in &preimage {
                let c = coords_of(x);
                let pushed = match homeo.to_sphere(&c) {
                    Ok(w) => homeo.to_boundary(&w)?,
                    Err(_) => homeo.to_boundary(&canonical_direction(m + 1))?,
                };
                psi.push((x, pushed));
            }
        } else {
            let anchor_dirs: Vec<Vec<f64>> = anchored
                .iter()
                .map(|&x| homeo.to_sphere(&coords_of(x)))
                .collect::<Result<_>>()?;
            let ext = extend_sphere_map(space, &preimage, &anchored, &anchor_dirs, strategy)?;
            if ext.fell_back {
                warnings.push(format!(
                    "top simplex {delta:?}: projection degenerate, fell back to nearest"
                ));
            }
            for (p, &x) in ext.domain.iter().enumerate() {
                if is_low[x] {
                    // keep the exact barycentric coordinates
                    psi.push((x, coords_of(x)));
                } else {
                    psi.push((x, homeo.to_boundary(&ext.dirs[p])?));
                }
            }
        }
        let lookup: std::collections::BTreeMap<usize, usize> =
            psi.iter().enumerate().map(|(p, (x, _))| (*x, p)).collect();
        let lip_psi = lip_on(space, &preimage, |i, j| {
            vec_dist(&psi[lookup[&i]].1, &psi[lookup[&j]].1)
        })
        .expect_finite("pushed simplex map")?;
        let ratio = if lip_phi == 0.0 { 0.0 } else { lip_psi / lip_phi };
        t_max = Some(t_max.map_or(ratio, |t: f64| t.max(ratio)));

        // collect star memberships
        for (x, value) in &psi {
            for (pos_in_delta, &set_idx) in delta.iter().enumerate() {
                if value[pos_in_delta] > 0.0 {
                    shrunk[set_idx].insert(*x);
                }
            }
        }
        tops.push(TopSimplexInfo {
            sets: delta.clone(),
            preimage_size: preimage.len(),
            anchored: anchored.len(),
            lip_phi,
            lip_psi,
            ratio,
            diameter: diam,
        });
    }

    let t = t_max.unwrap_or(1.0);
    let shrunk: Vec<Vec<usize>> = shrunk
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
    // s(U) ⊆ U by construction; re-check as a hard invariant
    for (s, set) in shrunk.iter().enumerate() {
        for &x in set {
            if !cc.cover.contains(s, x) {
                return Err(Error::Certificate(format!(
                    "shrunk set {s} escaped its parent at {}",
                    space.id(x)
                )));
            }
        }
    }

    let multiplicity = multiplicity(n, &shrunk);
    let lebesgue = lebesgue_number(space, &shrunk)?;
    let lebesgue_target = if nerve.lambda > 0.0 && t > 0.0 {
        cc.r / (nerve.lambda * m_plus_2 as f64 * t)
    } else {
        f64::INFINITY
    };
    if !lebesgue_target.is_finite() {
        warnings.push("degenerate constants: λ or t is zero, Lebesgue target is infinite".into());
    }
    let preimage_diameter_bound = 2.0 * cc.mesh_c * cc.r;
    Ok(ShrinkReport {
        shrunk,
        multiplicity,
        lebesgue,
        lebesgue_target,
        lambda: nerve.lambda,
        t,
        low_multiplicity: low,
        tops,
        max_preimage_diameter: max_diam,
        preimage_diameter_bound,
        multiplicity_ok: multiplicity <= m + 1,
        lebesgue_ok: leq_rel(lebesgue_target, lebesgue, DEFAULT_TOL),
        preimage_diameter_ok: leq_rel(max_diam, preimage_diameter_bound, DEFAULT_TOL),
        warnings,
    })
}

/// `min over x of max over U of d(x, X∖U)` for a family covering the space;
/// the largest closed-ball radius fitting inside some member at every point
/// is this value's open lower range.
pub fn lebesgue_number(space: &PointedMetricSpace, sets: &[Vec<usize>]) -> Result<f64> {
    let n = space.len();
    let mut member = vec![vec![false; n]; sets.len()];
    let mut covered = vec![false; n];
    for (s, set) in sets.iter().enumerate() {
        for &x in set {
            member[s][x] = true;
            covered[x] = true;
        }
    }
    if let Some(x) = covered.iter().position(|&c| !c) {
        return Err(Error::Precondition(format!(
            "family does not cover the space: {} is uncovered",
            space.id(x)
        )));
    }
    let mut value = f64::INFINITY;
    for x in 0..n {
        let mut best = 0.0f64;
        for mask in &member {
            let mut out_dist = f64::INFINITY;
            for y in 0..n {
                if !mask[y] {
                    out_dist = out_dist.min(space.dist(x, y));
                }
            }
            best = best.max(out_dist);
        }
        value = value.min(best);
    }
    Ok(value)
}

/// Max over points of the number of sets containing it.
pub fn multiplicity(n_points: usize, sets: &[Vec<usize>]) -> usize {
    let mut counts = vec![0usize; n_points];
    for set in sets {
        for &x in set {
            counts[x] += 1;
        }
    }
    counts.into_iter().max().unwrap_or(0)
}
