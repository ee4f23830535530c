//! Lipschitz extension with certificates: McShane extension of real
//! functions, nearest-point transfer between nets, the pasting lemma,
//! sphere-valued extension strategies, the annulus splice, retraction
//! extension over neighborhoods, and empirical extension moduli.
//!
//! Restrictions are exact by construction: values on the given subset are
//! copied bitwise, never recomputed. Certified inequalities are re-verified
//! by direct enumeration; a violation is a hard [`Error::Certificate`].

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::maps::{
    canonical_direction, fit_on, induce, lip_on, vec_dist, vec_norm, AsymptoticFit,
    NormPreservingMap, RadialGrowthBound, SphereMap,
};
use crate::space::{annulus, PointedMetricSpace};
use crate::{leq_rel, Error, Result, DEFAULT_TOL};

/// McShane extension of a real-valued Lipschitz function:
/// `g(x) = min over a in A of f(a) + L d(x, a)`.
///
/// `lip` must dominate the measured Lipschitz constant of `values` on the
/// subset; the extension then has Lipschitz constant at most `lip` and
/// restricts to `values` exactly (subset values are copied).
pub fn mcshane_extend(
    space: &PointedMetricSpace,
    subset: &[usize],
    values: &[f64],
    lip: f64,
) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::Precondition("cannot extend from an empty subset".into()));
    }
    if subset.len() != values.len() {
        return Err(Error::Input(format!(
            "{} values for {} subset points",
            values.len(),
            subset.len()
        )));
    }
    let measured = lip_on(space, subset, |i, j| {
        let fi = values[subset.iter().position(|&s| s == i).unwrap()];
        let fj = values[subset.iter().position(|&s| s == j).unwrap()];
        (fi - fj).abs()
    })
    .expect_finite("mcshane input")?;
    if !leq_rel(measured, lip, DEFAULT_TOL) {
        return Err(Error::Precondition(format!(
            "declared Lipschitz constant {lip} is below the measured {measured}"
        )));
    }
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in subset.iter().enumerate() {
        pos[i] = p;
    }
    Ok((0..space.len())
        .map(|x| {
            if pos[x] != usize::MAX {
                values[pos[x]]
            } else {
                subset
                    .iter()
                    .zip(values)
                    .map(|(&a, &fa)| fa + lip * space.dist(x, a))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect())
}

/// Result of transferring a direction field from a subset onto the nearby
/// part of a candidate point set.
#[derive(Debug, Clone)]
pub struct NearestTransfer {
    /// Points of the candidate set within `eps` of the subset, in order.
    pub members: Vec<usize>,
    /// Transferred directions, aligned with `members`.
    pub dirs: Vec<Vec<f64>>,
    /// `a(x)` per member: itself when in the subset, else the nearest
    /// subset point (ties to the lowest index).
    pub assignment: Vec<usize>,
    /// Fit `(λ, M)` of the induced map on the subset.
    pub fit_in: (f64, f64),
    /// Certified additive constant `2 ε λ + M + 2 ε` of the transferred fit.
    pub offset_out: f64,
    /// Max of lhs - rhs over member pairs; nonpositive when certified.
    pub worst_slack: f64,
}

/// Transfer `f` to `{ x in candidates : d(x, subset) < eps }` by reading the
/// value at the nearest subset point, and certify that the induced map fits
/// `(λ, 2ελ + M + 2ε)` when the input fits `(λ, M)`.
pub fn nearest_point_transfer(
    space: &PointedMetricSpace,
    subset: &[usize],
    dirs: &[Vec<f64>],
    candidates: &[usize],
    eps: f64,
) -> Result<NearestTransfer> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    if subset.len() != dirs.len() {
        return Err(Error::Input("one direction per subset point required".into()));
    }
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in subset.iter().enumerate() {
        pos[i] = p;
    }
    let induced = |i: usize| -> Vec<f64> {
        dirs[pos[i]].iter().map(|&c| space.norm(i) * c).collect()
    };
    let fit = fit_on(space, subset, |i, j| vec_dist(&induced(i), &induced(j)));
    let (lambda, m_add) = (fit.lambda, fit.m_add);
    if !lambda.is_finite() {
        return Err(Error::Precondition("input map has no finite fit".into()));
    }

    let mut members = Vec::new();
    let mut out_dirs = Vec::new();
    let mut assignment = Vec::new();
    for &x in candidates {
        if pos[x] != usize::MAX {
            members.push(x);
            out_dirs.push(dirs[pos[x]].clone());
            assignment.push(x);
            continue;
        }
        if let Some(d) = space.dist_to_set(x, subset) {
            if d < eps {
                let a = space.nearest_in_set(x, subset).unwrap();
                members.push(x);
                out_dirs.push(dirs[pos[a]].clone());
                assignment.push(a);
            }
        }
    }

    let offset_out = 2.0 * eps * lambda + m_add + 2.0 * eps;
    let mut worst = f64::NEG_INFINITY;
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let (x, y) = (members[a], members[b]);
            let gx: Vec<f64> = out_dirs[a].iter().map(|&c| space.norm(x) * c).collect();
            let gy: Vec<f64> = out_dirs[b].iter().map(|&c| space.norm(y) * c).collect();
            let slack = vec_dist(&gx, &gy) - (lambda * space.dist(x, y) + offset_out);
            worst = worst.max(slack);
        }
    }
    if worst > DEFAULT_TOL * (lambda + offset_out).max(1.0) {
        return Err(Error::Certificate(format!(
            "transferred fit (λ, 2ελ+M+2ε) violated by {worst}"
        )));
    }
    Ok(NearestTransfer {
        members,
        dirs: out_dirs,
        assignment,
        fit_in: (lambda, m_add),
        offset_out,
        worst_slack: worst,
    })
}

/// A pasted map with its certified Lipschitz bound.
#[derive(Debug, Clone)]
pub struct Paste {
    /// Union domain, sorted.
    pub domain: Vec<usize>,
    /// Values aligned with `domain`.
    pub values: Vec<Vec<f64>>,
    pub lip_first: f64,
    pub lip_second: f64,
    /// `max(λ1, λ2, diam / μ)`.
    pub bound: f64,
    pub measured: f64,
}

/// Paste two maps that agree exactly on their overlap, with non-overlap
/// parts at distance at least `mu`, into a bounded target of diameter
/// `target_diam`. Certifies `Lip(u) <= max(λ1, λ2, diam/μ)`.
pub fn paste(
    space: &PointedMetricSpace,
    first: (&[usize], &[Vec<f64>]),
    second: (&[usize], &[Vec<f64>]),
    mu: f64,
    target_diam: f64,
) -> Result<Paste> {
    let (x1, v1) = first;
    let (x2, v2) = second;
    if x1.len() != v1.len() || x2.len() != v2.len() {
        return Err(Error::Input("one value per domain point required".into()));
    }
    if !(mu > 0.0) || !(target_diam >= 0.0) {
        return Err(Error::Precondition(format!(
            "need μ > 0 and a nonnegative target diameter, got μ={mu}, diam={target_diam}"
        )));
    }
    let mut in1 = vec![usize::MAX; space.len()];
    for (p, &i) in x1.iter().enumerate() {
        in1[i] = p;
    }
    let mut in2 = vec![usize::MAX; space.len()];
    for (p, &i) in x2.iter().enumerate() {
        in2[i] = p;
    }
    // exact agreement on the overlap
    for &i in x2 {
        if in1[i] != usize::MAX && v1[in1[i]] != v2[in2[i]] {
            return Err(Error::Precondition(format!(
                "maps disagree on the overlap at {}",
                space.id(i)
            )));
        }
    }
    // separation of the exclusive parts
    let only1: Vec<usize> = x1.iter().copied().filter(|&i| in2[i] == usize::MAX).collect();
    let only2: Vec<usize> = x2.iter().copied().filter(|&i| in1[i] == usize::MAX).collect();
    let mut gap = f64::INFINITY;
    let mut cross_diam = 0.0f64;
    for &i in &only1 {
        for &j in &only2 {
            gap = gap.min(space.dist(i, j));
            cross_diam = cross_diam.max(vec_dist(&v1[in1[i]], &v2[in2[j]]));
        }
    }
    if !leq_rel(mu, gap, DEFAULT_TOL) {
        return Err(Error::Precondition(format!(
            "exclusive parts are {gap} apart, less than μ = {mu}"
        )));
    }
    if !leq_rel(cross_diam, target_diam, DEFAULT_TOL) {
        return Err(Error::Precondition(format!(
            "values span {cross_diam}, beyond the declared target diameter {target_diam}"
        )));
    }

    let lip_first = lip_on(space, x1, |i, j| vec_dist(&v1[in1[i]], &v1[in1[j]]))
        .expect_finite("paste first map")?;
    let lip_second = lip_on(space, x2, |i, j| vec_dist(&v2[in2[i]], &v2[in2[j]]))
        .expect_finite("paste second map")?;

    let mut domain: Vec<usize> = x1.iter().chain(x2.iter()).copied().collect();
    domain.sort_unstable();
    domain.dedup();
    let values: Vec<Vec<f64>> = domain
        .iter()
        .map(|&i| {
            if in1[i] != usize::MAX {
                v1[in1[i]].clone()
            } else {
                v2[in2[i]].clone()
            }
        })
        .collect();
    let lookup: BTreeMap<usize, usize> = domain.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let measured = lip_on(space, &domain, |i, j| {
        vec_dist(&values[lookup[&i]], &values[lookup[&j]])
    })
    .expect_finite("pasted map")?;
    let bound = lip_first.max(lip_second).max(target_diam / mu);
    if !leq_rel(measured, bound, DEFAULT_TOL) {
        return Err(Error::Certificate(format!(
            "pasting bound {bound} < measured {measured}"
        )));
    }
    Ok(Paste {
        domain,
        values,
        lip_first,
        lip_second,
        bound,
        measured,
    })
}

/// How to extend a sphere-valued map over a larger domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendStrategy {
    /// Copy the direction of the nearest subset point.
    Nearest,
    /// Coordinatewise McShane extension followed by radial projection;
    /// falls back to `Nearest` when the extended vector enters the ball of
    /// radius `rho_min` around the origin.
    Project { rho_min: f64 },
}

impl ExtendStrategy {
    pub fn project_default() -> Self {
        ExtendStrategy::Project { rho_min: 0.1 }
    }
}

/// A sphere-valued extension with its bookkeeping.
#[derive(Debug, Clone)]
pub struct SphereExtension {
    /// Extension domain, sorted; superset of the input subset.
    pub domain: Vec<usize>,
    /// Unit directions aligned with `domain`; subset values are bitwise
    /// copies of the input.
    pub dirs: Vec<Vec<f64>>,
    pub strategy_used: ExtendStrategy,
    pub fell_back: bool,
    /// Smallest norm of the pre-projection vector (Project strategy only).
    pub rho: Option<f64>,
    /// Lipschitz constant of the input directions on the subset.
    pub lip_subset: f64,
    /// Lipschitz constant of the extended directions on the domain.
    pub lip_extended: f64,
}

/// Extend a direction field from `subset` over `domain` (`subset ⊆ domain`).
pub fn extend_sphere_map(
    space: &PointedMetricSpace,
    domain: &[usize],
    subset: &[usize],
    dirs: &[Vec<f64>],
    strategy: ExtendStrategy,
) -> Result<SphereExtension> {
    if subset.is_empty() {
        return Err(Error::Precondition("cannot extend from an empty subset".into()));
    }
    if subset.len() != dirs.len() {
        return Err(Error::Input("one direction per subset point required".into()));
    }
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in subset.iter().enumerate() {
        pos[i] = p;
    }
    let mut domain: Vec<usize> = domain.to_vec();
    domain.sort_unstable();
    domain.dedup();
    if subset.iter().any(|&a| {
        domain.binary_search(&a).is_err()
    }) {
        return Err(Error::Input("subset must be contained in the domain".into()));
    }
    let dim = dirs[0].len();
    let lip_subset = lip_on(space, subset, |i, j| vec_dist(&dirs[pos[i]], &dirs[pos[j]]))
        .expect_finite("sphere extension input")?;

    let nearest_dirs = |space: &PointedMetricSpace| -> Vec<Vec<f64>> {
        domain
            .iter()
            .map(|&x| {
                if pos[x] != usize::MAX {
                    dirs[pos[x]].clone()
                } else {
                    let a = space.nearest_in_set(x, subset).unwrap();
                    dirs[pos[a]].clone()
                }
            })
            .collect()
    };

    let (out, used, fell_back, rho) = match strategy {
        ExtendStrategy::Nearest => (nearest_dirs(space), ExtendStrategy::Nearest, false, None),
        ExtendStrategy::Project { rho_min } => {
            // per-coordinate McShane with the coordinate's own constant
            let mut coord_ext: Vec<Vec<f64>> = Vec::with_capacity(dim);
            for c in 0..dim {
                let vals: Vec<f64> = subset.iter().map(|&a| dirs[pos[a]][c]).collect();
                let lc = lip_on(space, subset, |i, j| {
                    (dirs[pos[i]][c] - dirs[pos[j]][c]).abs()
                })
                .expect_finite("sphere extension input")?;
                coord_ext.push(mcshane_extend(space, subset, &vals, lc)?);
            }
            let vectors: Vec<Vec<f64>> = domain
                .iter()
                .map(|&x| (0..dim).map(|c| coord_ext[c][x]).collect())
                .collect();
            let rho = domain
                .iter()
                .enumerate()
                .filter(|(_, &x)| pos[x] == usize::MAX)
                .map(|(p, _)| vec_norm(&vectors[p]))
                .fold(f64::INFINITY, f64::min);
            if rho < rho_min {
                (nearest_dirs(space), ExtendStrategy::Nearest, true, Some(rho))
            } else {
                let projected = domain
                    .iter()
                    .enumerate()
                    .map(|(p, &x)| {
                        if pos[x] != usize::MAX {
                            dirs[pos[x]].clone()
                        } else {
                            let n = vec_norm(&vectors[p]);
                            vectors[p].iter().map(|&v| v / n).collect()
                        }
                    })
                    .collect();
                (projected, strategy, false, Some(rho))
            }
        }
    };
    let lookup: BTreeMap<usize, usize> = domain.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let lip_extended = lip_on(space, &domain, |i, j| {
        vec_dist(&out[lookup[&i]], &out[lookup[&j]])
    })
    .expect_finite("sphere extension output")?;
    Ok(SphereExtension {
        domain,
        dirs: out,
        strategy_used: used,
        fell_back,
        rho,
        lip_subset,
        lip_extended,
    })
}

/// Parameters of the annulus splice.
#[derive(Debug, Clone, Copy)]
pub struct SpliceParams {
    /// Base scale r of the annulus ladder.
    pub base_scale: f64,
    /// Scale ratio M (> 1) between consecutive rungs.
    pub ratio: f64,
    /// Pasting gap at rung k is `mu_scale * M^k`.
    pub mu_scale: f64,
    pub strategy: ExtendStrategy,
}

impl SpliceParams {
    pub fn new(base_scale: f64, ratio: f64, strategy: ExtendStrategy) -> Result<Self> {
        if !(base_scale > 0.0) || !(ratio > 1.0) {
            return Err(Error::Precondition(format!(
                "need r > 0 and M > 1, got r={base_scale}, M={ratio}"
            )));
        }
        Ok(Self {
            base_scale,
            ratio,
            mu_scale: base_scale * ratio * (ratio - 1.0),
            strategy,
        })
    }
}

impl Default for SpliceParams {
    fn default() -> Self {
        Self::new(1.0, 2.0, ExtendStrategy::Nearest).unwrap()
    }
}

/// Per-stage record of the splice pipeline.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StageInfo {
    pub stage: String,
    pub k: i32,
    pub domain_size: usize,
    pub anchor_size: usize,
    pub lip: f64,
}

/// Output of an extension run: the extended map plus everything a reviewer
/// needs to re-check it.
#[derive(Debug, Clone)]
pub struct ExtensionCertificate {
    /// The subset the input lived on (after basepoint adjunction, if any).
    pub subset: Vec<usize>,
    pub output: NormPreservingMap,
    /// Output agrees bitwise with the input directions on the original
    /// subset.
    pub restriction_ok: bool,
    /// `| |g'(x)| - |x| |` within 1e-9 relative everywhere.
    pub norm_preserving_ok: bool,
    pub lip_in: f64,
    pub lip_out: f64,
    pub fit_out: AsymptoticFit,
    pub constants: BTreeMap<String, f64>,
    pub stages: Vec<StageInfo>,
    pub warnings: Vec<String>,
}

/// Extend a norm-preserving Lipschitz map given on a subset over the whole
/// space by the annulus splice: extend per annulus band, paste rungs two
/// apart across their shared band, extend the pasted maps, and assemble the
/// even-numbered results (low norms get their own stage). Overlaps agree by
/// construction; the fold runs in increasing k.
pub fn splice_extend(
    space: Arc<PointedMetricSpace>,
    subset: &[usize],
    subset_dirs: &[Vec<f64>],
    params: SpliceParams,
) -> Result<ExtensionCertificate> {
    let tol = DEFAULT_TOL;
    if subset.len() != subset_dirs.len() {
        return Err(Error::Input("one direction per subset point required".into()));
    }
    if subset.is_empty() {
        return Err(Error::Precondition("cannot extend from an empty subset".into()));
    }
    let report = space.validate(tol);
    match report.min_distinct_distance {
        Some(d) if d <= 0.0 => {
            return Err(Error::Precondition(
                "splice needs a discrete space (positive distances between distinct points)".into(),
            ))
        }
        _ => {}
    }
    let dim = subset_dirs[0].len();
    let (r, m) = (params.base_scale, params.ratio);
    let mut warnings = Vec::new();
    let mut stages = Vec::new();

    // adjoin the basepoint if missing
    let mut anchor: Vec<usize> = subset.to_vec();
    let mut anchor_dirs: Vec<Vec<f64>> = subset_dirs.to_vec();
    let bp = space.basepoint();
    if !anchor.contains(&bp) {
        anchor.push(bp);
        anchor_dirs.push(canonical_direction(dim));
        warnings.push("basepoint adjoined to the subset with the canonical direction".into());
    }
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in anchor.iter().enumerate() {
        pos[i] = p;
    }
    let induced_val = |i: usize| -> Vec<f64> {
        anchor_dirs[pos[i]].iter().map(|&c| space.norm(i) * c).collect()
    };
    let lip_in = lip_on(&space, &anchor, |i, j| vec_dist(&induced_val(i), &induced_val(j)))
        .expect_finite("splice input")?;

    let max_norm = space.max_norm();
    let anchor_in = |lo: f64, hi: f64| -> (Vec<usize>, Vec<Vec<f64>>) {
        let mut idx = Vec::new();
        let mut dv = Vec::new();
        for &a in &anchor {
            let nm = space.norm(a);
            if nm >= lo && nm < hi {
                idx.push(a);
                dv.push(anchor_dirs[pos[a]].clone());
            }
        }
        (idx, dv)
    };

    // extend over one annulus band, tolerating an empty anchor part
    let extend_band = |lo: f64,
                       hi: f64,
                       label: &str,
                       k: i32,
                       stages: &mut Vec<StageInfo>,
                       warnings: &mut Vec<String>|
     -> Result<Option<(Vec<usize>, Vec<Vec<f64>>)>> {
        let band = annulus(&space, lo, hi)?;
        if band.members.is_empty() {
            return Ok(None);
        }
        let (aidx, advals) = anchor_in(lo, hi);
        if aidx.is_empty() {
            warnings.push(format!(
                "{label} k={k}: no anchor points in [{lo}, {hi}); using the canonical constant"
            ));
            let dirs = vec![canonical_direction(dim); band.members.len()];
            stages.push(StageInfo {
                stage: label.into(),
                k,
                domain_size: band.members.len(),
                anchor_size: 0,
                lip: 0.0,
            });
            return Ok(Some((band.members, dirs)));
        }
        let ext = extend_sphere_map(&space, &band.members, &aidx, &advals, params.strategy)?;
        if ext.fell_back {
            warnings.push(format!("{label} k={k}: projection degenerate, fell back to nearest"));
        }
        stages.push(StageInfo {
            stage: label.into(),
            k,
            domain_size: ext.domain.len(),
            anchor_size: aidx.len(),
            lip: ext.lip_extended,
        });
        Ok(Some((ext.domain, ext.dirs)))
    };

    let mut assembled: Vec<Option<Vec<f64>>> = vec![None; space.len()];
    let mut assign = |idx: &[usize], vals: &[Vec<f64>], warnings: &mut Vec<String>| {
        for (&i, v) in idx.iter().zip(vals) {
            match &assembled[i] {
                None => assembled[i] = Some(v.clone()),
                Some(prev) => {
                    if prev != v {
                        warnings.push(format!(
                            "conflicting assembly values at {}; keeping the earlier stage",
                            space.id(i)
                        ));
                    }
                }
            }
        }
    };

    // low stage: everything below r M^2
    let low_cut = r * m * m;
    if let Some((idx, vals)) = extend_band(0.0, low_cut, "low", 0, &mut stages, &mut warnings)? {
        assign(&idx, &vals, &mut warnings);
    }

    // rungs: f_j on [r M^(j-1), r M^(j+2)) for the even ladder
    let mut k = 2i32;
    while r * m.powi(k) <= max_norm {
        let f_lo = |j: i32| r * m.powi(j - 1);
        let f_hi = |j: i32| r * m.powi(j + 2);
        let fk = extend_band(f_lo(k), f_hi(k), "band", k, &mut stages, &mut warnings)?;
        let fk2 = extend_band(f_lo(k + 2), f_hi(k + 2), "band", k + 2, &mut stages, &mut warnings)?;

        // paste f_k and f_(k+2) across the shared anchor band
        let lo_band = annulus(&space, r * m.powi(k), r * m.powi(k + 1))?;
        let hi_band = annulus(&space, r * m.powi(k + 2), r * m.powi(k + 3))?;
        let (mid_anchor, _) = anchor_in(r * m.powi(k + 1), r * m.powi(k + 2));

        let restrict = |ext: &Option<(Vec<usize>, Vec<Vec<f64>>)>, wanted: &[usize]| {
            let mut idx = Vec::new();
            let mut vals = Vec::new();
            if let Some((dom, dirs)) = ext {
                for &w in wanted {
                    if let Ok(p) = dom.binary_search(&w) {
                        idx.push(w);
                        vals.push(dirs[p].clone());
                    }
                }
            }
            (idx, vals)
        };
        let mut first_dom = lo_band.members.clone();
        first_dom.extend(&mid_anchor);
        first_dom.sort_unstable();
        first_dom.dedup();
        let mut second_dom = hi_band.members.clone();
        second_dom.extend(&mid_anchor);
        second_dom.sort_unstable();
        second_dom.dedup();
        let (d1, v1) = restrict(&fk, &first_dom);
        let (d2, v2) = restrict(&fk2, &second_dom);

        let glued: Option<(Vec<usize>, Vec<Vec<f64>>)> = match (d1.is_empty(), d2.is_empty()) {
            (true, true) => None,
            (false, true) => Some((d1, v1)),
            (true, false) => Some((d2, v2)),
            (false, false) => {
                let mu = params.mu_scale * m.powi(k);
                let pasted = paste(&space, (&d1, &v1), (&d2, &v2), mu, 2.0)?;
                stages.push(StageInfo {
                    stage: "paste".into(),
                    k,
                    domain_size: pasted.domain.len(),
                    anchor_size: mid_anchor.len(),
                    lip: pasted.measured,
                });
                Some((pasted.domain, pasted.values))
            }
        };

        // extend the pasted map over the full covering annulus
        if let Some((gdom, gvals)) = glued {
            let cover_band = annulus(&space, r * m.powi(k), r * m.powi(k + 3))?;
            if !cover_band.members.is_empty() {
                let ext =
                    extend_sphere_map(&space, &cover_band.members, &gdom, &gvals, params.strategy)?;
                if ext.fell_back {
                    warnings.push(format!("cover k={k}: projection degenerate, fell back to nearest"));
                }
                stages.push(StageInfo {
                    stage: "cover".into(),
                    k,
                    domain_size: ext.domain.len(),
                    anchor_size: gdom.len(),
                    lip: ext.lip_extended,
                });
                assign(&ext.domain, &ext.dirs, &mut warnings);
            }
        }
        k += 2;
    }

    // fill any stray unassigned points (possible only on empty ladders)
    let dirs: Vec<Vec<f64>> = assembled
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.unwrap_or_else(|| {
                warnings.push(format!("point {} missed by every stage; canonical direction", space.id(i)));
                canonical_direction(dim)
            })
        })
        .collect();

    // the original subset keeps its exact directions
    let restriction_ok = subset
        .iter()
        .zip(subset_dirs)
        .all(|(&a, d)| dirs[a] == *d);

    let sphere = SphereMap::new(space.clone(), dirs, 1e-6)?;
    let output = induce(&sphere);
    let norm_preserving_ok = output.norm_preserving_ok(tol);
    let lip_out = output.lip().expect_finite("splice output")?;
    let fit_out = output.fit();

    let mut constants = BTreeMap::new();
    constants.insert("r".into(), r);
    constants.insert("M".into(), m);
    constants.insert("mu_scale".into(), params.mu_scale);
    constants.insert("lip_in".into(), lip_in);
    constants.insert("lip_out".into(), lip_out);
    if lip_in > 0.0 {
        constants.insert("expansion".into(), lip_out / lip_in);
    }

    Ok(ExtensionCertificate {
        subset: anchor,
        output,
        restriction_ok,
        norm_preserving_ok,
        lip_in,
        lip_out,
        fit_out,
        constants,
        stages,
        warnings,
    })
}

/// Extension of a vector-valued map over the closed `R`-neighborhood of its
/// domain by reading values at the nearest domain point.
#[derive(Debug, Clone)]
pub struct RetractExtension {
    /// `B(subset, R)`, sorted.
    pub domain: Vec<usize>,
    /// Values aligned with `domain`; subset values are bitwise copies.
    pub values: Vec<Vec<f64>>,
    /// Nearest-point assignment per domain point.
    pub assignment: Vec<usize>,
    /// Certified fit `(λ, 2λR + M)`.
    pub fit_out: (f64, f64),
    /// Certified growth `|g(x)| >= c|x| - (cR + b)`.
    pub growth_out: (f64, f64),
    pub worst_fit_slack: f64,
    pub worst_growth_slack: f64,
}

/// Extend `f` (fitted `(λ, M)` with growth `|f(x)| >= c|x| - b`) over
/// `B(subset, R)` via the nearest-point retraction, certifying the
/// transported fit and growth bounds.
pub fn retract_extend(
    space: &PointedMetricSpace,
    subset: &[usize],
    values: &[Vec<f64>],
    fit: (f64, f64),
    growth: RadialGrowthBound,
    radius: f64,
) -> Result<RetractExtension> {
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    if subset.is_empty() {
        return Err(Error::Precondition("cannot extend from an empty subset".into()));
    }
    if subset.len() != values.len() {
        return Err(Error::Input("one value per subset point required".into()));
    }
    let (lambda, m_add) = fit;
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in subset.iter().enumerate() {
        pos[i] = p;
    }
    // preconditions: the declared fit and growth hold on the subset
    for (a, &i) in subset.iter().enumerate() {
        for &j in subset.iter().skip(a + 1) {
            let vd = vec_dist(&values[pos[i]], &values[pos[j]]);
            if !leq_rel(vd, lambda * space.dist(i, j) + m_add, DEFAULT_TOL) {
                return Err(Error::Precondition(format!(
                    "declared fit ({lambda}, {m_add}) fails on the subset pair ({}, {})",
                    space.id(i),
                    space.id(j)
                )));
            }
        }
        let vn = vec_norm(&values[pos[i]]);
        if !leq_rel(growth.c * space.norm(i) - growth.b, vn, DEFAULT_TOL) {
            return Err(Error::Precondition(format!(
                "declared growth bound fails on the subset at {}",
                space.id(i)
            )));
        }
    }

    let domain: Vec<usize> = (0..space.len())
        .filter(|&x| pos[x] != usize::MAX || space.dist_to_set(x, subset).unwrap() <= radius)
        .collect();
    let assignment: Vec<usize> = domain
        .iter()
        .map(|&x| {
            if pos[x] != usize::MAX {
                x
            } else {
                space.nearest_in_set(x, subset).unwrap()
            }
        })
        .collect();
    let out_values: Vec<Vec<f64>> = assignment.iter().map(|&a| values[pos[a]].clone()).collect();

    let fit_out = (lambda, 2.0 * lambda * radius + m_add);
    let growth_out = (growth.c, growth.c * radius + growth.b);
    let mut worst_fit = f64::NEG_INFINITY;
    let mut worst_growth = f64::NEG_INFINITY;
    for a in 0..domain.len() {
        let x = domain[a];
        let gn = vec_norm(&out_values[a]);
        worst_growth = worst_growth.max(growth_out.0 * space.norm(x) - growth_out.1 - gn);
        for b in a + 1..domain.len() {
            let y = domain[b];
            let vd = vec_dist(&out_values[a], &out_values[b]);
            worst_fit = worst_fit.max(vd - (fit_out.0 * space.dist(x, y) + fit_out.1));
        }
    }
    let scale = (lambda + m_add + growth.c + growth.b + radius).max(1.0);
    if worst_fit > DEFAULT_TOL * scale {
        return Err(Error::Certificate(format!(
            "retraction fit (λ, 2λR+M) violated by {worst_fit}"
        )));
    }
    if worst_growth > DEFAULT_TOL * scale {
        return Err(Error::Certificate(format!(
            "retraction growth c|x| - cR - b violated by {worst_growth}"
        )));
    }
    Ok(RetractExtension {
        domain,
        values: out_values,
        assignment,
        fit_out,
        growth_out,
        worst_fit_slack: worst_fit,
        worst_growth_slack: worst_growth,
    })
}

/// One family member for the empirical extension modulus.
#[derive(Debug, Clone)]
pub struct ModulusInstance {
    pub space: Arc<PointedMetricSpace>,
    pub subset: Vec<usize>,
    pub dirs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ModulusRow {
    /// Bucket key: power-of-two ceiling of `s = Lip(f) · diam(Y)`.
    pub s_bucket: f64,
    pub count: usize,
    /// Max over the bucket of `Lip(g) / Lip(f)`; constant inputs count as 1.
    pub max_ratio: f64,
    /// Suffix max over buckets at or above this `s` (nonincreasing in `s`).
    pub regularized: f64,
}

/// Empirical extension modulus: for each instance, extend over the whole
/// space, record `Lip(g)/Lip(f)`, bucket by `s = Lip(f) · diam(Y)`, and
/// regularize the table to be monotone.
pub fn extension_modulus(
    family: &[ModulusInstance],
    strategy: ExtendStrategy,
) -> Result<Vec<ModulusRow>> {
    let mut buckets: BTreeMap<u64, (f64, usize, f64)> = BTreeMap::new(); // key bits -> (s, count, max_ratio)
    for inst in family {
        let n = inst.space.len();
        let domain: Vec<usize> = (0..n).collect();
        let ext = extend_sphere_map(&inst.space, &domain, &inst.subset, &inst.dirs, strategy)?;
        let ratio = if ext.lip_subset == 0.0 {
            1.0
        } else {
            ext.lip_extended / ext.lip_subset
        };
        let s = ext.lip_subset * inst.space.diameter();
        let bucket = if s == 0.0 { 0.0 } else { s.log2().ceil().exp2() };
        let entry = buckets.entry(bucket.to_bits()).or_insert((bucket, 0, 0.0));
        entry.1 += 1;
        entry.2 = entry.2.max(ratio);
    }
    let mut rows: Vec<ModulusRow> = buckets
        .into_values()
        .map(|(s, count, max_ratio)| ModulusRow {
            s_bucket: s,
            count,
            max_ratio,
            regularized: max_ratio,
        })
        .collect();
    rows.sort_by(|a, b| a.s_bucket.total_cmp(&b.s_bucket));
    let mut running = 0.0f64;
    for row in rows.iter_mut().rev() {
        running = running.max(row.max_ratio);
        row.regularized = running;
    }
    Ok(rows)
}
