//! Finite pointed metric spaces: construction, validation, norms, annuli,
//! greedy nets, and scale connectivity.
//!
//! Points carry stable string ids; indices into the stored order are an
//! internal detail. The norm of a point is its distance to the basepoint.
//! Balls are closed: `B(x, t) = { y : d(x, y) <= t }`.

use std::collections::HashMap;

use crate::parallel::{pairwise_max, triple_max};
use crate::{Error, Result, DEFAULT_TOL};

/// A finite metric space with a distinguished basepoint.
///
/// The distance matrix is stored in full (row-major). Construction enforces
/// the structural axioms (square, symmetric within tolerance, zero diagonal,
/// nonnegative entries); the triangle inequality is *reported* by
/// [`PointedMetricSpace::validate`], not enforced, so near-metric data can
/// still be inspected.
#[derive(Debug, Clone)]
pub struct PointedMetricSpace {
    points: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<f64>,
    basepoint: usize,
    norms: Vec<f64>,
}

impl PointedMetricSpace {
    pub fn new(points: Vec<String>, matrix: &[Vec<f64>], basepoint: &str) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Input("space must have at least one point".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate point id {p:?}")));
            }
        }
        let basepoint = *index
            .get(basepoint)
            .ok_or_else(|| Error::Input(format!("basepoint {basepoint:?} is not a point")))?;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Input(format!("distance matrix is not {n}x{n}")));
        }
        let scale = matrix
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b.abs()))
            .max(1.0);
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Input(format!(
                        "distance ({i},{j}) = {d} is negative or not finite"
                    )));
                }
                if (d - matrix[j][i]).abs() > DEFAULT_TOL * scale {
                    return Err(Error::Input(format!(
                        "asymmetry at ({i},{j}): {d} vs {}",
                        matrix[j][i]
                    )));
                }
                if i == j {
                    if d > DEFAULT_TOL * scale {
                        return Err(Error::Input(format!("nonzero diagonal at {i}: {d}")));
                    }
                    dist[i * n + j] = 0.0;
                } else {
                    // store the symmetrized value so d(i,j) == d(j,i) exactly
                    dist[i * n + j] = 0.5 * (d + matrix[j][i]);
                }
            }
        }
        let norms = (0..n).map(|i| dist[i * n + basepoint]).collect();
        Ok(Self {
            points,
            index,
            dist,
            basepoint,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.points
    }

    pub fn id(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }

    /// Distance to the basepoint.
    #[inline]
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn diameter(&self) -> f64 {
        pairwise_max(self.len(), |i, j| self.dist(i, j)).max(0.0)
    }

    /// Distance from `i` to the closest member of `set`; `None` when empty.
    pub fn dist_to_set(&self, i: usize, set: &[usize]) -> Option<f64> {
        set.iter()
            .map(|&j| self.dist(i, j))
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Nearest member of `set` to `i`, ties broken by lowest index.
    pub fn nearest_in_set(&self, i: usize, set: &[usize]) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &j in set {
            let d = self.dist(i, j);
            let better = match best {
                None => true,
                Some((bd, bj)) => d < bd || (d == bd && j < bj),
            };
            if better {
                best = Some((d, j));
            }
        }
        best.map(|(_, j)| j)
    }

    /// Restriction to `keep` (indices into this space, any order, deduped by
    /// caller). The basepoint must be kept.
    pub fn subspace(&self, keep: &[usize]) -> Result<Self> {
        if !keep.contains(&self.basepoint) {
            return Err(Error::Precondition(
                "subspace must contain the basepoint".into(),
            ));
        }
        let points: Vec<String> = keep.iter().map(|&i| self.points[i].clone()).collect();
        let m = keep.len();
        let mut matrix = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in 0..m {
                matrix[a][b] = self.dist(keep[a], keep[b]);
            }
        }
        let bp = self.points[self.basepoint].clone();
        Self::new(points, &matrix, &bp)
    }

    /// Triangle-inequality and discreteness report for this space.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.len();
        let worst = triple_max(n, |i, j, k| self.dist(i, k) - self.dist(i, j) - self.dist(j, k))
            .max(0.0);
        let scale = self.diameter().max(1.0);
        let mut min_positive = f64::INFINITY;
        let mut min_distinct = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.dist(i, j);
                min_distinct = min_distinct.min(d);
                if d > 0.0 {
                    min_positive = min_positive.min(d);
                }
            }
        }
        ValidationReport {
            metric_ok: worst <= tol * scale,
            worst_triangle_violation: worst,
            min_positive_distance: (min_positive.is_finite()).then_some(min_positive),
            min_distinct_distance: (min_distinct.is_finite()).then_some(min_distinct),
        }
    }
}

/// Outcome of checking the metric axioms on a distance matrix.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub metric_ok: bool,
    /// `max(0, d(i,k) - d(i,j) - d(j,k))` over all triples; 0 means valid.
    pub worst_triangle_violation: f64,
    /// Smallest strictly positive distance; `None` for one-point spaces.
    pub min_positive_distance: Option<f64>,
    /// Smallest distance over distinct index pairs (0 when two points
    /// coincide); `None` for one-point spaces.
    pub min_distinct_distance: Option<f64>,
}

impl ValidationReport {
    /// All distinct pairs at distance >= eps.
    pub fn is_epsilon_discrete(&self, eps: f64) -> bool {
        match self.min_distinct_distance {
            None => true,
            Some(d) => d >= eps,
        }
    }
}

/// Validate a raw matrix as a pointed metric space and report on it.
pub fn validate_space(
    points: Vec<String>,
    matrix: &[Vec<f64>],
    basepoint: &str,
    tol: f64,
) -> Result<(PointedMetricSpace, ValidationReport)> {
    let space = PointedMetricSpace::new(points, matrix, basepoint)?;
    let report = space.validate(tol);
    Ok((space, report))
}

/// All-pairs shortest-path closure of a weighted undirected graph.
///
/// Point order is the given order; errors on unknown endpoints, nonpositive
/// weights, and disconnected graphs.
pub fn metric_closure(
    points: Vec<String>,
    edges: &[(String, String, f64)],
    basepoint: &str,
) -> Result<PointedMetricSpace> {
    let n = points.len();
    let mut index = HashMap::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        if index.insert(p.as_str(), i).is_some() {
            return Err(Error::Input(format!("duplicate point id {p:?}")));
        }
    }
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for (a, b, w) in edges {
        let ia = *index
            .get(a.as_str())
            .ok_or_else(|| Error::Input(format!("edge endpoint {a:?} is not a point")))?;
        let ib = *index
            .get(b.as_str())
            .ok_or_else(|| Error::Input(format!("edge endpoint {b:?} is not a point")))?;
        if !w.is_finite() || *w <= 0.0 {
            return Err(Error::Input(format!("edge ({a},{b}) has weight {w}; must be positive")));
        }
        if ia == ib {
            continue;
        }
        if *w < d[ia * n + ib] {
            d[ia * n + ib] = *w;
            d[ib * n + ia] = *w;
        }
    }
    // Floyd-Warshall
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(
            "graph is disconnected: some distances are infinite".into(),
        ));
    }
    let matrix: Vec<Vec<f64>> = (0..n).map(|i| d[i * n..(i + 1) * n].to_vec()).collect();
    PointedMetricSpace::new(points, &matrix, basepoint)
}

/// The annulus `{ x : lower <= |x| < upper }`; half-open on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Annulus {
    pub lower: f64,
    pub upper: f64,
    /// Point indices, in stored order.
    pub members: Vec<usize>,
}

pub fn annulus(space: &PointedMetricSpace, lower: f64, upper: f64) -> Result<Annulus> {
    if !(0.0..=f64::INFINITY).contains(&lower) || lower > upper {
        return Err(Error::Precondition(format!(
            "annulus bounds must satisfy 0 <= r <= s, got r={lower}, s={upper}"
        )));
    }
    let members = (0..space.len())
        .filter(|&i| {
            let nm = space.norm(i);
            nm >= lower && nm < upper
        })
        .collect();
    Ok(Annulus {
        lower,
        upper,
        members,
    })
}

/// Greedy eps-net: seeds with the basepoint, then scans points in stored
/// order, keeping each point at distance >= eps from everything kept so far.
///
/// The result contains the basepoint, satisfies `d(x, net) < eps` for every
/// point of the ambient space, and is eps-discrete (pairwise distances
/// >= eps). Deterministic given the stored point order.
pub fn greedy_net(space: &PointedMetricSpace, eps: f64) -> Result<(PointedMetricSpace, Vec<usize>)> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let mut selected = vec![space.basepoint()];
    for i in 0..space.len() {
        if i == space.basepoint() {
            continue;
        }
        if selected.iter().all(|&j| space.dist(i, j) >= eps) {
            selected.push(i);
        }
    }
    selected.sort_unstable();
    let sub = space.subspace(&selected)?;
    Ok((sub, selected))
}

/// Check both net clauses exhaustively: `d(x, net) < eps` for every point of
/// the ambient space, and pairwise distances within the net are `>= eps`.
pub fn net_laws_hold(space: &PointedMetricSpace, net: &[usize], eps: f64) -> bool {
    let covered = (0..space.len()).all(|i| {
        net.iter()
            .map(|&j| space.dist(i, j))
            .fold(f64::INFINITY, f64::min)
            < eps
    });
    let discrete = {
        let mut ok = true;
        for a in 0..net.len() {
            for b in a + 1..net.len() {
                if space.dist(net[a], net[b]) < eps {
                    ok = false;
                }
            }
        }
        ok
    };
    covered && discrete
}

/// True iff the graph with an edge between every pair at distance <= m is
/// connected.
pub fn scale_connected(space: &PointedMetricSpace, m: f64) -> Result<bool> {
    if !(m > 0.0) {
        return Err(Error::Precondition(format!("scale must be positive, got {m}")));
    }
    let n = space.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && space.dist(i, j) <= m {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    Ok(count == n)
}

/// Build a space from real-line coordinates; ids are the list positions.
/// Convenience for tests and generators. The basepoint is the first point.
pub fn line_space(coords: &[f64]) -> PointedMetricSpace {
    let points: Vec<String> = (0..coords.len()).map(|i| format!("p{i}")).collect();
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&a| coords.iter().map(|&b| (a - b).abs()).collect())
        .collect();
    PointedMetricSpace::new(points, &matrix, "p0").expect("line space is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: worst triangle violation by brute force.
    fn triangle_oracle(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(m[i][k] - m[i][j] - m[j][k]);
                }
            }
        }
        worst
    }

    /// Independent oracle: Bellman-Ford from each source.
    fn shortest_path_oracle(n: usize, edges: &[(usize, usize, f64)], src: usize) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; n];
        d[src] = 0.0;
        for _ in 0..n {
            for &(a, b, w) in edges {
                if d[a] + w < d[b] {
                    d[b] = d[a] + w;
                }
                if d[b] + w < d[a] {
                    d[a] = d[b] + w;
                }
            }
        }
        d
    }

    #[test]
    fn one_point_space_is_valid() {
        let s = PointedMetricSpace::new(vec!["x".into()], &[vec![0.0]], "x").unwrap();
        let r = s.validate(DEFAULT_TOL);
        assert!(r.metric_ok);
        assert_eq!(r.worst_triangle_violation, 0.0);
        assert_eq!(r.min_positive_distance, None);
        assert!(r.is_epsilon_discrete(123.0));
    }

    #[test]
    fn integer_line_is_metric_with_unit_discreteness() {
        let s = line_space(&[0.0, 1.0, 2.0]);
        let r = s.validate(DEFAULT_TOL);
        assert!(r.metric_ok);
        assert_eq!(r.min_positive_distance, Some(1.0));
        let m: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| s.dist(i, j)).collect())
            .collect();
        assert_eq!(triangle_oracle(&m), 0.0);
    }

    #[test]
    fn triangle_violation_is_reported() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        let (s, r) = validate_space(
            vec!["a".into(), "b".into(), "c".into()],
            &m,
            "a",
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!r.metric_ok);
        assert_eq!(r.worst_triangle_violation, 3.0);
        assert_eq!(r.worst_triangle_violation, triangle_oracle(&m));
        assert_eq!(s.norm(2), 5.0);
    }

    #[test]
    fn structural_errors() {
        let bad_square = PointedMetricSpace::new(
            vec!["a".into(), "b".into()],
            &[vec![0.0, 1.0]],
            "a",
        );
        assert!(matches!(bad_square, Err(Error::Input(_))));
        let asym = PointedMetricSpace::new(
            vec!["a".into(), "b".into()],
            &[vec![0.0, 1.0], vec![2.0, 0.0]],
            "a",
        );
        assert!(matches!(asym, Err(Error::Input(_))));
        let neg = PointedMetricSpace::new(
            vec!["a".into(), "b".into()],
            &[vec![0.0, -1.0], vec![-1.0, 0.0]],
            "a",
        );
        assert!(matches!(neg, Err(Error::Input(_))));
    }

    #[test]
    fn closure_of_path_graph() {
        let pts: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let edges = vec![
            ("0".to_string(), "1".to_string(), 1.0),
            ("1".to_string(), "2".to_string(), 1.0),
        ];
        let s = metric_closure(pts, &edges, "0").unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        let oracle = shortest_path_oracle(3, &[(0, 1, 1.0), (1, 2, 1.0)], 0);
        assert_eq!(s.dist(0, 1), oracle[1]);
        assert_eq!(s.dist(0, 2), oracle[2]);
    }

    #[test]
    fn closure_single_edge_and_heavy_triangle() {
        let s = metric_closure(
            vec!["a".into(), "b".into()],
            &[("a".into(), "b".into(), 3.0)],
            "a",
        )
        .unwrap();
        assert_eq!(s.dist(0, 1), 3.0);

        let s = metric_closure(
            vec!["a".into(), "b".into(), "c".into()],
            &[
                ("a".into(), "b".into(), 1.0),
                ("b".into(), "c".into(), 1.0),
                ("a".into(), "c".into(), 5.0),
            ],
            "a",
        )
        .unwrap();
        // the heavy edge is shortcut through b
        assert_eq!(s.dist(0, 2), 2.0);
        let oracle = shortest_path_oracle(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)], 0);
        assert_eq!(s.dist(0, 2), oracle[2]);
    }

    #[test]
    fn closure_rejects_disconnected_and_bad_weights() {
        let disconnected = metric_closure(
            vec!["a".into(), "b".into(), "c".into()],
            &[("a".into(), "b".into(), 1.0)],
            "a",
        );
        assert!(matches!(disconnected, Err(Error::Precondition(_))));
        let bad = metric_closure(
            vec!["a".into(), "b".into()],
            &[("a".into(), "b".into(), 0.0)],
            "a",
        );
        assert!(matches!(bad, Err(Error::Input(_))));
    }

    #[test]
    fn annulus_examples() {
        let s = line_space(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let a = annulus(&s, 1.0, 3.0).unwrap();
        assert_eq!(a.members, vec![1, 2]);
        let full = annulus(&s, 0.0, f64::INFINITY).unwrap();
        assert_eq!(full.members, vec![0, 1, 2, 3, 4]);
        let empty = annulus(&s, 5.0, 9.0).unwrap();
        assert!(empty.members.is_empty());
        assert!(annulus(&s, 3.0, 1.0).is_err());
    }

    #[test]
    fn greedy_net_examples() {
        // eps below the discreteness constant keeps everything
        let s = line_space(&[0.0, 1.0, 2.0]);
        let (_, sel) = greedy_net(&s, 0.5).unwrap();
        assert_eq!(sel, vec![0, 1, 2]);

        // hand-runnable oracle: 0 kept (basepoint), 0.4 dropped, 1 kept, 1.4 dropped
        let s = line_space(&[0.0, 0.4, 1.0, 1.4]);
        let (sub, sel) = greedy_net(&s, 0.5).unwrap();
        assert_eq!(sel, vec![0, 2]);
        assert_eq!(sub.len(), 2);
        assert!(net_laws_hold(&s, &sel, 0.5));

        // eps beyond the diameter leaves only the basepoint
        let (_, sel) = greedy_net(&s, 10.0).unwrap();
        assert_eq!(sel, vec![0]);
    }

    #[test]
    fn scale_connected_examples() {
        let s = line_space(&[0.0, 1.0, 2.0]);
        assert!(scale_connected(&s, 1.0).unwrap());
        let gap = line_space(&[0.0, 10.0]);
        assert!(!scale_connected(&gap, 1.0).unwrap());
        assert!(scale_connected(&gap, gap.diameter()).unwrap());
        assert!(scale_connected(&s, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn annulus_decomposes_disjointly(
            coords in proptest::collection::vec(0.0f64..100.0, 1..30),
            cuts in proptest::array::uniform3(0.0f64..120.0),
        ) {
            let s = line_space(&coords);
            let mut c = cuts.to_vec();
            c.sort_by(f64::total_cmp);
            let (r, m, t) = (c[0], c[1], c[2]);
            let whole = annulus(&s, r, t).unwrap();
            let lo = annulus(&s, r, m).unwrap();
            let hi = annulus(&s, m, t).unwrap();
            let mut union = lo.members.clone();
            union.extend(&hi.members);
            union.sort_unstable();
            prop_assert_eq!(whole.members, union);
            prop_assert!(lo.members.iter().all(|i| !hi.members.contains(i)));
        }

        #[test]
        fn greedy_net_laws(
            coords in proptest::collection::vec(0.0f64..50.0, 1..40),
            eps in 0.01f64..20.0,
        ) {
            let s = line_space(&coords);
            let (_, sel) = greedy_net(&s, eps).unwrap();
            prop_assert!(net_laws_hold(&s, &sel, eps));
            prop_assert!(sel.contains(&s.basepoint()));
        }

        #[test]
        fn closure_output_is_metric(
            n in 2usize..12,
            seed_weights in proptest::collection::vec(0.01f64..10.0, 40),
        ) {
            // spanning path plus a few chords
            let pts: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let mut edges = Vec::new();
            let mut w = seed_weights.into_iter().cycle();
            for i in 1..n {
                edges.push(((i - 1).to_string(), i.to_string(), w.next().unwrap()));
            }
            for i in 0..n.saturating_sub(2) {
                edges.push((i.to_string(), (i + 2).to_string(), w.next().unwrap()));
            }
            let s = metric_closure(pts, &edges, "0").unwrap();
            let r = s.validate(DEFAULT_TOL);
            prop_assert!(r.metric_ok, "worst violation {}", r.worst_triangle_violation);
        }

        #[test]
        fn scale_connectivity_is_monotone(
            coords in proptest::collection::vec(0.0f64..50.0, 2..25),
            m in 0.1f64..30.0,
        ) {
            let s = line_space(&coords);
            if scale_connected(&s, m).unwrap() {
                prop_assert!(scale_connected(&s, m * 1.7).unwrap());
                prop_assert!(scale_connected(&s, m + 5.0).unwrap());
            }
        }
    }
}
