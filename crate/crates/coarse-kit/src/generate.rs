//! Seeded, deterministic instance generators.
//!
//! Every generator is a pure function of its parameters (and a 64-bit seed
//! where randomness is involved, via ChaCha8), so identical calls produce
//! identical instances byte for byte.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::maps::SphereMap;
use crate::partitions::Cover;
use crate::shrink::ColoredCover;
use crate::space::PointedMetricSpace;
use crate::{Error, Result, DEFAULT_TOL};

/// The integers `0..=n` with the absolute-value metric, based at 0.
pub fn integer_path(n: usize) -> PointedMetricSpace {
    let points: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let matrix: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    PointedMetricSpace::new(points, &matrix, "0").expect("integer path is valid")
}

/// A `w × h` integer grid with the Euclidean metric, based at the origin.
pub fn grid_2d(w: usize, h: usize) -> Result<PointedMetricSpace> {
    if w == 0 || h == 0 {
        return Err(Error::Precondition("grid needs positive extents".into()));
    }
    let mut points = Vec::new();
    let mut coords = Vec::new();
    for y in 0..h {
        for x in 0..w {
            points.push(format!("{x},{y}"));
            coords.push((x as f64, y as f64));
        }
    }
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&(ax, ay)| {
            coords
                .iter()
                .map(|&(bx, by)| ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
                .collect()
        })
        .collect();
    PointedMetricSpace::new(points, &matrix, "0,0")
}

/// A seeded planar point cloud with the Euclidean metric. The first point is
/// the origin and the basepoint; the rest are uniform in `[-side, side]^2`
/// with a minimum separation enforced by rejection.
pub fn random_point_cloud(seed: u64, n: usize, side: f64) -> Result<PointedMetricSpace> {
    let (space, _) = random_point_cloud_coords(seed, n, side)?;
    Ok(space)
}

pub(crate) fn random_point_cloud_coords(
    seed: u64,
    n: usize,
    side: f64,
) -> Result<(PointedMetricSpace, Vec<(f64, f64)>)> {
    if n == 0 || !(side > 0.0) {
        return Err(Error::Precondition(format!(
            "cloud needs n >= 1 and side > 0, got n={n}, side={side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_sep = side * 1e-4;
    let mut coords: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    while coords.len() < n {
        let cand = (
            rng.random_range(-side..side),
            rng.random_range(-side..side),
        );
        let ok = coords
            .iter()
            .all(|&(x, y)| ((x - cand.0).powi(2) + (y - cand.1).powi(2)).sqrt() >= min_sep);
        if ok {
            coords.push(cand);
        }
    }
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&(ax, ay)| {
            coords
                .iter()
                .map(|&(bx, by)| ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let space = PointedMetricSpace::new(points, &matrix, "p0")?;
    Ok((space, coords))
}

/// Direction field on `{1..n}` sending odd integers to the pole `(1, 0)` and
/// each even integer `2k` to the circle point at chord distance `1/sqrt(k)`
/// from the pole. The induced norm-preserving map oscillates too fast to be
/// asymptotically Lipschitz, while the directions still vary sublinearly.
pub fn alternating_pole_map(n: usize) -> Result<SphereMap> {
    if n < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    let points: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let matrix: Vec<Vec<f64>> = (1..=n)
        .map(|i| (1..=n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    let space = Arc::new(PointedMetricSpace::new(points, &matrix, "1")?);
    let dirs: Vec<Vec<f64>> = (1..=n)
        .map(|x| {
            if x % 2 == 1 {
                vec![1.0, 0.0]
            } else {
                let k = (x / 2) as f64;
                // chord 2 sin(θ/2) = 1/sqrt(k)
                let theta = 2.0 * (0.5 / k.sqrt()).asin();
                vec![theta.cos(), theta.sin()]
            }
        })
        .collect();
    SphereMap::new(space, dirs, DEFAULT_TOL)
}

/// Three staggered families of intervals covering `{0..n}`: color `c` uses
/// intervals of length `5r` starting every `6r`, offset by `2r c`. Same-color
/// intervals are separated by more than `r`, the mesh is below `5r`, and the
/// overlap pattern produces genuine triple points.
pub fn colored_interval_cover(n: usize, r: f64) -> Result<ColoredCover> {
    if !(r > 0.0) || (n as f64) < 6.0 * r {
        return Err(Error::Precondition(format!(
            "need r > 0 and n >= 6r, got n={n}, r={r}"
        )));
    }
    let coords: Vec<f64> = (0..=n).map(|i| i as f64).collect();
    let points: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&a| coords.iter().map(|&b| (a - b).abs()).collect())
        .collect();
    let space = Arc::new(PointedMetricSpace::new(points, &matrix, "0")?);
    let (len, step) = (5.0 * r, 6.0 * r);
    let mut named = Vec::new();
    let mut colors = Vec::new();
    for color in 0..3usize {
        let offset = color as f64 * 2.0 * r;
        let mut start = offset - step;
        while start <= n as f64 {
            let set: Vec<usize> = (0..=n)
                .filter(|&i| (i as f64) >= start && (i as f64) < start + len)
                .collect();
            if !set.is_empty() {
                named.push((format!("c{color}s{}", named.len()), set));
                colors.push(color + 1);
            }
            start += step;
        }
    }
    let cover = Cover::new(space, named)?;
    ColoredCover::new(cover, colors, r, 5.0)
}

/// A planar cloud whose norms are log-uniform in `[r_min, r_max]`, so every
/// dyadic annulus holds a comparable share of points. The first point is the
/// origin and the basepoint.
pub fn log_ring_cloud(
    seed: u64,
    n: usize,
    r_min: f64,
    r_max: f64,
) -> Result<(PointedMetricSpace, Vec<(f64, f64)>)> {
    if n < 2 || !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::Precondition(format!(
            "ring cloud needs n >= 2 and 0 < r_min < r_max, got n={n}, r_min={r_min}, r_max={r_max}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x41b9);
    let min_sep = r_min * 1e-3;
    let mut coords: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    while coords.len() < n {
        let nm = (rng.random_range(r_min.ln()..r_max.ln())).exp();
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let cand = (nm * a.cos(), nm * a.sin());
        let ok = coords
            .iter()
            .all(|&(x, y)| ((x - cand.0).powi(2) + (y - cand.1).powi(2)).sqrt() >= min_sep);
        if ok {
            coords.push(cand);
        }
    }
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&(ax, ay)| {
            coords
                .iter()
                .map(|&(bx, by)| ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let space = PointedMetricSpace::new(points, &matrix, "p0")?;
    Ok((space, coords))
}

/// The slowly twisting tautological direction field on a planar cloud:
/// `f(x) = R(ω |x|) (x - origin)/|x|`. The induced map is Lipschitz with a
/// constant around `1 + ω · max|x|`.
pub fn twisted_field(space: Arc<PointedMetricSpace>, coords: &[(f64, f64)], twist: f64) -> Result<SphereMap> {
    let dirs: Vec<Vec<f64>> = coords
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let nm = space.norm(i);
            if nm == 0.0 {
                vec![1.0, 0.0]
            } else {
                let (ux, uy) = (x / nm, y / nm);
                let a = twist * nm;
                let (c, s) = (a.cos(), a.sin());
                vec![c * ux - s * uy, s * ux + c * uy]
            }
        })
        .collect();
    SphereMap::new(space, dirs, DEFAULT_TOL)
}

/// [`twisted_field`] over a [`log_ring_cloud`].
pub fn ring_cone_map(seed: u64, n: usize, r_min: f64, r_max: f64, twist: f64) -> Result<SphereMap> {
    let (space, coords) = log_ring_cloud(seed, n, r_min, r_max)?;
    twisted_field(Arc::new(space), &coords, twist)
}

/// A planar cloud with a slowly twisting tautological direction field:
/// `f(x) = R(ω |x|) (x - origin)/|x|`. The induced map is Lipschitz with a
/// constant around `1 + ω · max|x|`.
pub fn planar_cone_map(seed: u64, n: usize, side: f64, twist: f64) -> Result<SphereMap> {
    let (space, coords) = random_point_cloud_coords(seed, n, side)?;
    twisted_field(Arc::new(space), &coords, twist)
}

/// A ground-truth extensible instance: a globally defined Lipschitz cone map
/// together with a subset it is restricted to.
#[derive(Debug, Clone)]
pub struct ConeMapInstance {
    /// The full direction field (the ground truth the subset came from).
    pub sphere: SphereMap,
    /// Subset indices, sorted, always containing the basepoint.
    pub subset: Vec<usize>,
    /// Directions on the subset, bitwise copies of the ground truth.
    pub subset_dirs: Vec<Vec<f64>>,
}

/// Restriction of a seeded [`planar_cone_map`] to a random subset containing
/// the basepoint (roughly half the points).
pub fn restricted_cone_map(seed: u64, n: usize, side: f64) -> Result<ConeMapInstance> {
    if n < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let twist = rng.random_range(0.0..2.0 / side);
    let sphere = planar_cone_map(seed, n, side, twist)?;
    let bp = sphere.space().basepoint();
    let mut subset: Vec<usize> = (0..n)
        .filter(|&i| i == bp || rng.random_bool(0.5))
        .collect();
    if subset.len() < 2 {
        subset.push(if bp == 0 { 1 } else { 0 });
        subset.sort_unstable();
    }
    let subset_dirs = subset.iter().map(|&i| sphere.dir(i).to_vec()).collect();
    Ok(ConeMapInstance {
        sphere,
        subset,
        subset_dirs,
    })
}

/// A seeded proper cover of a cloud by overlapping metric balls, suitable
/// for partition experiments (each point may land in several balls).
pub fn random_ball_cover(seed: u64, space: Arc<PointedMetricSpace>, k: usize) -> Result<Cover> {
    if k == 0 {
        return Err(Error::Precondition("need at least one ball".into()));
    }
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc01e_4a11);
    let diam = space.diameter().max(1.0);
    let mut named: Vec<(String, Vec<usize>)> = Vec::new();
    for b in 0..k {
        let center = rng.random_range(0..n);
        let radius = rng.random_range(0.15..0.6) * diam;
        let set: Vec<usize> = (0..n).filter(|&x| space.dist(center, x) <= radius).collect();
        if set.len() < n {
            named.push((format!("ball{b}"), set));
        }
    }
    // patch up coverage with singletons so the family is a cover
    let mut covered = vec![false; n];
    for (_, set) in &named {
        for &x in set {
            covered[x] = true;
        }
    }
    for x in 0..n {
        if !covered[x] {
            named.push((format!("pt{x}"), vec![x]));
        }
    }
    if named.len() < 2 {
        // degenerate draw: split in half to stay proper
        named = vec![
            ("lo".into(), (0..n / 2 + 1).collect()),
            ("hi".into(), (n / 2..n).collect()),
        ];
    }
    Cover::new(space, named)
}

/// Random point in the standard simplex of the given dimension.
pub fn random_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| -rng.random_range(0.001f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{induce, vec_dist};
    use crate::shrink::validate_colored_cover;

    #[test]
    fn integer_path_matches_description() {
        let s = integer_path(5);
        assert_eq!(s.len(), 6);
        assert_eq!(s.dist(0, 5), 5.0);
        assert_eq!(s.norm(3), 3.0);
    }

    #[test]
    fn grid_distances_are_euclidean() {
        let g = grid_2d(3, 2).unwrap();
        let a = g.index_of("0,0").unwrap();
        let b = g.index_of("2,1").unwrap();
        assert!((g.dist(a, b) - (5.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clouds_are_seed_deterministic() {
        let a = random_point_cloud(7, 20, 10.0).unwrap();
        let b = random_point_cloud(7, 20, 10.0).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(a.dist(i, j), b.dist(i, j));
            }
        }
        let c = random_point_cloud(8, 20, 10.0).unwrap();
        let differs = (0..20).any(|i| (0..20).any(|j| a.dist(i, j) != c.dist(i, j)));
        assert!(differs);
    }

    #[test]
    fn alternating_pole_chords_are_reciprocal_sqrt() {
        let f = alternating_pole_map(16).unwrap();
        let space = f.space();
        let pole = vec![1.0, 0.0];
        for x in [2usize, 4, 8, 16] {
            let i = space.index_of(&x.to_string()).unwrap();
            let k = (x / 2) as f64;
            let chord = vec_dist(f.dir(i), &pole);
            assert!((chord - 1.0 / k.sqrt()).abs() < 1e-12, "x={x}");
        }
        for x in [1usize, 3, 15] {
            let i = space.index_of(&x.to_string()).unwrap();
            assert_eq!(f.dir(i), &pole[..]);
        }
    }

    #[test]
    fn interval_cover_is_valid_and_has_triples() {
        let cc = colored_interval_cover(100, 4.0).unwrap();
        let rep = validate_colored_cover(&cc);
        assert!(rep.r_disjoint_ok, "{:?}", rep.worst_same_color_gap);
        assert!(rep.mesh_ok);
        let triples = (0..cc.space().len())
            .filter(|&x| cc.cover().membership_count(x) == 3)
            .count();
        assert!(triples > 0);
    }

    #[test]
    fn alternating_pole_induced_map_shows_growth_trend() {
        // the induced norm-preserving map is not asymptotically Lipschitz:
        // at finite scale the annulus profile flags the growth trend
        let f = alternating_pole_map(256).unwrap();
        let p = crate::maps::annulus_profile(&f, 1.0, 2.0).unwrap();
        assert!(p.unbounded_trend, "trend ratio {}", p.trend_ratio);
        assert!(crate::maps::profile_implies_lipschitz(&f, &p, 1e-9).is_err());
    }

    #[test]
    fn cone_map_instances_are_lipschitz_ground_truth() {
        let inst = restricted_cone_map(3, 30, 25.0).unwrap();
        let lip = induce(&inst.sphere).lip().finite().unwrap();
        assert!(lip <= 4.5, "twist pushed Lip to {lip}");
        assert!(inst.subset.contains(&inst.sphere.space().basepoint()));
        assert!(inst.subset.len() >= 2);
    }
}
