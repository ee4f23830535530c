//! Acceptance suite: nine oracle- and property-based criteria at desk scale.
//!
//! Each test prints one `[acceptance] ...: PASS (elapsed)` line (visible with
//! `--nocapture`) and enforces its runtime budget. Every tolerance is pinned
//! here, not deferred.

use std::sync::Arc;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use coarse_kit::extension::{
    mcshane_extend, nearest_point_transfer, paste, retract_extend, splice_extend, SpliceParams,
};
use coarse_kit::generate::{
    alternating_pole_map, colored_interval_cover, planar_cone_map, random_ball_cover,
    random_point_cloud, random_simplex_point, restricted_cone_map, ring_cone_map,
};
use coarse_kit::maps::{
    annulus_profile, induce, lip_constant, profile_implies_lipschitz, sublinear_defect,
    vec_dist, vec_norm, MetricMap, RadialGrowthBound,
};
use coarse_kit::partitions::{
    canonical_partition, certify_partition_lipschitz, convex_combine, sublinearity_gap, Cover,
};
use coarse_kit::shrink::{lebesgue_number, multiplicity, shrink};
use coarse_kit::space::{greedy_net, metric_closure, net_laws_hold, PointedMetricSpace};
use coarse_kit::sublinear::PiecewiseLinearFunction;
use coarse_kit::extension::ExtendStrategy;
use coarse_kit::leq_rel;

const REL_TOL: f64 = 1e-9;

fn finish(name: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("[acceptance] {name}: PASS ({elapsed:.2}s, budget {budget_s}s)");
    assert!(
        elapsed < budget_s,
        "{name} exceeded its runtime budget: {elapsed:.2}s >= {budget_s}s"
    );
}

/// Criterion 1: metric closure outputs satisfy the axioms and greedy nets
/// satisfy both net laws, on 200 seeded instances with |X| <= 300.
#[test]
fn criterion_1_metric_axioms_and_net_laws() {
    let started = Instant::now();
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=300usize);
        let points: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for i in 1..n {
            let parent = rng.random_range(0..i);
            edges.push((
                points[parent].clone(),
                points[i].clone(),
                rng.random_range(0.1..10.0),
            ));
        }
        for _ in 0..n / 3 {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((points[a].clone(), points[b].clone(), rng.random_range(0.1..10.0)));
            }
        }
        let space = metric_closure(points, &edges, "v0").expect("connected by construction");
        let report = space.validate(REL_TOL);
        assert!(
            report.metric_ok,
            "seed {seed}: closure violated the triangle inequality by {}",
            report.worst_triangle_violation
        );
        let eps = space.diameter() * rng.random_range(0.05..0.5) + 1e-6;
        let (_, selected) = greedy_net(&space, eps).unwrap();
        assert!(
            net_laws_hold(&space, &selected, eps),
            "seed {seed}: net laws failed at eps {eps}"
        );
    }
    finish("criterion 1 (metric axioms and net laws)", started, 10.0);
}

/// Criterion 2: annulus profile constants, both directions, on 100 seeded
/// instances whose induced maps are Lipschitz by construction.
#[test]
fn criterion_2_profile_constants() {
    let started = Instant::now();
    let m_ratio = 2.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22b2);
        let n = rng.random_range(80..=250usize);
        let twist = rng.random_range(0.0..0.02);
        let f = ring_cone_map(seed, n, 1.0, 60.0, twist).unwrap();
        let space = f.space();
        let lambda = induce(&f).lip().finite().expect("Lipschitz by construction");
        let r = (0..space.len())
            .map(|i| space.norm(i))
            .filter(|&nm| nm > 0.0)
            .fold(f64::INFINITY, f64::min);
        let profile = annulus_profile(&f, r, m_ratio).unwrap();
        // forward: M^k Lip(f|tail_k) <= M (λ+1)/r for every k >= 2
        let cap = m_ratio * (lambda + 1.0) / r;
        for row in profile.rows.iter().filter(|row| row.k >= 2) {
            assert!(
                leq_rel(row.scaled_tail, cap, REL_TOL),
                "seed {seed}: k={} tail {} exceeds {}",
                row.k,
                row.scaled_tail,
                cap
            );
        }
        // backward: bounded profile certifies a Lipschitz constant,
        // re-verified inside by full pair enumeration
        assert!(
            !profile.unbounded_trend,
            "seed {seed}: spurious growth trend {:.3}",
            profile.trend_ratio
        );
        let cert = profile_implies_lipschitz(&f, &profile, REL_TOL).unwrap();
        let actual = induce(&f).lip().finite().unwrap();
        assert!(
            leq_rel(actual, cert.bound, REL_TOL),
            "seed {seed}: certified bound {} below actual {}",
            cert.bound,
            actual
        );
        assert_eq!(cert.pairs_skipped, 0, "seed {seed}: no pair may be skipped");
    }
    finish("criterion 2 (profile constants, both directions)", started, 30.0);
}

/// Criterion 3: the alternating pole field on {1..4096} has profile growth
/// at rate at least 0.5 * 2^(k/2) for 4 <= k <= 10, while its sublinearity
/// defect under s(r) = sqrt(r) decays by a factor >= 4 from R=16 to R=4096.
#[test]
fn criterion_3_alternating_pole_reproduction() {
    let started = Instant::now();
    let f = alternating_pole_map(4096).unwrap();
    let profile = annulus_profile(&f, 1.0, 2.0).unwrap();
    for row in &profile.rows {
        if row.k >= 4 && row.k <= 10 {
            let floor = 0.5 * 2f64.powf(row.k as f64 / 2.0);
            assert!(
                row.scaled_band >= floor,
                "k={}: {} below the growth floor {}",
                row.k,
                row.scaled_band,
                floor
            );
        }
    }
    assert!(profile.unbounded_trend, "the growth trend must be flagged");

    // piecewise-linear interpolant of sqrt at powers of two, flat cap
    let bps: Vec<(f64, f64)> = (0..=13).map(|j| {
        let t = 2f64.powi(j);
        (t, t.sqrt())
    }).collect();
    let sqrt_pl = PiecewiseLinearFunction::new(bps, 0.0).unwrap();
    let d16 = sublinear_defect(&f, &sqrt_pl, 16.0);
    let d4096 = sublinear_defect(&f, &sqrt_pl, 4096.0);
    assert!(d16 > 0.0, "defect at R=16 must be positive, got {d16}");
    assert!(d4096 < d16, "defect must decay: {d4096} !< {d16}");
    assert!(
        d16 >= 4.0 * d4096,
        "defect decay factor below 4: {d16} vs {d4096}"
    );
    finish("criterion 3 (alternating pole reproduction)", started, 10.0);
}

/// Criterion 4: partition certificates (per-coordinate cone bound and convex
/// combination bound) hold with zero violations on 100 seeded covers and
/// simplex-map instances.
#[test]
fn criterion_4_partition_theorems() {
    let started = Instant::now();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a47);
        let n = rng.random_range(20..=120usize);
        let space = Arc::new(random_point_cloud(seed, n, 30.0).unwrap());
        let k = rng.random_range(2..=8usize);
        let cover = random_ball_cover(seed, space.clone(), k).unwrap();
        if !cover.is_proper() {
            continue;
        }
        let p = match canonical_partition(cover) {
            Ok(p) => p,
            Err(_) => continue,
        };
        assert!(p.gap() > 0.0, "seed {seed}: distinct points force a positive gap");
        // the certificate errors out on any violation
        let cert = certify_partition_lipschitz(&p, REL_TOL).unwrap();
        assert!(cert.measured_coord <= cert.bound * (1.0 + REL_TOL));

        // convex combination on the same instance
        let f: Vec<Vec<f64>> = (0..n).map(|_| random_simplex_point(&mut rng, 3)).collect();
        let g: Vec<Vec<f64>> = (0..n).map(|_| random_simplex_point(&mut rng, 3)).collect();
        let gamma: Vec<Vec<f64>> = (0..n).map(|_| random_simplex_point(&mut rng, 2)).collect();
        let out = convex_combine(&space, &gamma, &f, &g, REL_TOL).unwrap();
        assert!(out.measured <= out.bound * (1.0 + REL_TOL), "seed {seed}");
    }
    finish("criterion 4 (partition theorems)", started, 30.0);
}

/// Criterion 5: extension engine soundness on 50 seeded ground-truth
/// restrictions (|X| <= 200): exact restriction, exact norm preservation,
/// finite output constant; nearest-point transfer and retraction bounds hold
/// pointwise.
#[test]
fn criterion_5_extension_engine() {
    let started = Instant::now();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe27e);
        let n = rng.random_range(30..=200usize);
        let inst = restricted_cone_map(seed, n, 40.0).unwrap();
        let space = inst.sphere.space().clone();

        let cert = splice_extend(
            space.clone(),
            &inst.subset,
            &inst.subset_dirs,
            SpliceParams::default(),
        )
        .unwrap();
        assert!(cert.restriction_ok, "seed {seed}: restriction not bitwise");
        assert!(cert.norm_preserving_ok, "seed {seed}: norms drifted");
        assert!(cert.lip_out.is_finite() && cert.lip_out >= 0.0);
        // bitwise value check on the original subset
        let full = induce(&inst.sphere);
        for &a in &inst.subset {
            assert_eq!(
                cert.output.value(a),
                full.value(a),
                "seed {seed}: value at subset point {a} recomputed"
            );
        }

        // nearest-point transfer onto a greedy net: certificate is internal
        let eps = space.diameter() * rng.random_range(0.02..0.2) + 1e-9;
        let (_, net_sel) = greedy_net(&space, eps).unwrap();
        let t = nearest_point_transfer(&space, &inst.subset, &inst.subset_dirs, &net_sel, eps)
            .unwrap();
        assert!(t.worst_slack <= REL_TOL * (t.fit_in.0 + t.offset_out).max(1.0));

        // retraction extension with measured fit and tautological growth
        let values: Vec<Vec<f64>> = inst.subset.iter().map(|&i| full.value(i).to_vec()).collect();
        let fit = {
            let mm = MetricMap::euclidean(space.clone(), full.values().to_vec()).unwrap();
            let f = coarse_kit::maps::asymptotic_fit(&mm);
            (f.lambda, f.m_add)
        };
        let growth = RadialGrowthBound::new(1.0, 0.0).unwrap();
        let radius = space.diameter() * rng.random_range(0.05..0.3) + 1e-9;
        let r = retract_extend(&space, &inst.subset, &values, fit, growth, radius).unwrap();
        assert!(r.worst_fit_slack <= REL_TOL * (fit.0 + fit.1 + radius).max(1.0));
        assert!(r.worst_growth_slack <= REL_TOL * (1.0 + radius).max(1.0));
        for (p, &x) in r.domain.iter().enumerate() {
            if let Some(q) = inst.subset.iter().position(|&a| a == x) {
                assert_eq!(r.values[p], values[q], "seed {seed}: retraction recomputed a value");
            }
        }
    }
    finish("criterion 5 (extension engine soundness)", started, 60.0);
}

/// Criterion 6: the pasting bound max(λ1, λ2, diam/μ) holds on 500 seeded
/// instances with zero violations.
#[test]
fn criterion_6_pasting_lemma() {
    let started = Instant::now();
    let mut done = 0usize;
    let mut seed = 0u64;
    while done < 500 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a57e);
        let n = rng.random_range(10..=60usize);
        let f = planar_cone_map(seed, n, 30.0, rng.random_range(0.0..0.05)).unwrap();
        let space = f.space();
        let max_norm = space.max_norm();
        let a = max_norm * rng.random_range(0.2..0.5);
        let w = max_norm * rng.random_range(0.1..0.3);
        let x1: Vec<usize> = (0..n).filter(|&i| space.norm(i) < a + w).collect();
        let x2: Vec<usize> = (0..n).filter(|&i| space.norm(i) > a).collect();
        if x1.is_empty() || x2.is_empty() {
            continue;
        }
        let v1: Vec<Vec<f64>> = x1.iter().map(|&i| f.dir(i).to_vec()).collect();
        let v2: Vec<Vec<f64>> = x2.iter().map(|&i| f.dir(i).to_vec()).collect();
        // exclusive parts are separated by the norm band (a, a+w)
        let mu = w * 0.99;
        let p = paste(space, (&x1, &v1), (&x2, &v2), mu, 2.0).unwrap();
        assert!(
            p.measured <= p.bound * (1.0 + REL_TOL),
            "seed {seed}: {} > {}",
            p.measured,
            p.bound
        );
        done += 1;
    }
    finish("criterion 6 (pasting lemma, 500 instances)", started, 5.0);
}

/// Criterion 7: shrinking 3-colored interval covers of {0..400} at scales
/// r in {4, 16, 64}: multiplicity <= 2, Lebesgue number >= r/(3 λ t), and
/// nerve preimage diameters <= 2 C r.
#[test]
fn criterion_7_cover_shrinking() {
    let started = Instant::now();
    for r in [4.0, 16.0, 64.0] {
        let cc = colored_interval_cover(400, r).unwrap();
        let report = shrink(&cc, ExtendStrategy::Nearest).unwrap();
        assert!(
            report.multiplicity_ok && report.multiplicity <= 2,
            "r={r}: multiplicity {}",
            report.multiplicity
        );
        assert!(
            report.lebesgue_ok,
            "r={r}: lebesgue {} below target {} (λ={}, t={})",
            report.lebesgue,
            report.lebesgue_target,
            report.lambda,
            report.t
        );
        assert!(
            report.preimage_diameter_ok,
            "r={r}: preimage diameter {} above {}",
            report.max_preimage_diameter,
            report.preimage_diameter_bound
        );
    }
    finish("criterion 7 (cover shrinking at three scales)", started, 60.0);
}

/// Criterion 8: rescaling transfer inequalities, both directions, on 50
/// seeded affine scale functions.
#[test]
fn criterion_8_rescaling_transfer() {
    let started = Instant::now();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6117);
        let n = rng.random_range(20..=120usize);
        let f = planar_cone_map(seed, n, 40.0, rng.random_range(0.0..0.03)).unwrap();
        let space = f.space();
        let c = rng.random_range(0.5..3.0);
        let b = rng.random_range(0.5..5.0);
        let s_vals: Vec<f64> = (0..n)
            .map(|i| c * space.norm(i) + b + rng.random_range(0.0..b * 0.5))
            .collect();
        let growth = RadialGrowthBound::new(c, b).unwrap();
        // both direction certificates are asserted inside
        let t = coarse_kit::maps::rescale_transfer(&f, &s_vals, growth, REL_TOL).unwrap();
        assert!(t.forward.worst_slack <= REL_TOL * (t.lambda_s + t.m_s + 1.0));
        assert!(t.backward.worst_slack <= REL_TOL * (t.fit_back.0 + t.fit_back.1 + 1.0));
    }
    finish("criterion 8 (rescaling transfer)", started, 10.0);
}

/// Criterion 9: implementations agree exactly with independent brute-force
/// references on 1000 seeded micro-instances (|X| <= 12).
#[test]
fn criterion_9_oracle_equivalence() {
    let started = Instant::now();

    fn lip_oracle(space: &PointedMetricSpace, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..space.len() {
            for j in 0..space.len() {
                if i != j && space.dist(i, j) > 0.0 {
                    worst = worst.max((values[i] - values[j]).abs() / space.dist(i, j));
                }
            }
        }
        worst
    }

    fn lebesgue_oracle(space: &PointedMetricSpace, sets: &[Vec<usize>]) -> f64 {
        let mut value = f64::INFINITY;
        for x in 0..space.len() {
            let mut best = 0.0f64;
            for set in sets {
                let mut out = f64::INFINITY;
                for y in 0..space.len() {
                    if !set.contains(&y) {
                        out = out.min(space.dist(x, y));
                    }
                }
                best = best.max(out);
            }
            value = value.min(best);
        }
        value
    }

    fn gap_oracle(space: &PointedMetricSpace, cover: &Cover) -> f64 {
        let mut gap = f64::INFINITY;
        for x in 0..space.len() {
            if space.norm(x) == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for set_i in 0..cover.k() {
                let mut out = f64::INFINITY;
                for y in 0..space.len() {
                    if !cover.contains(set_i, y) {
                        out = out.min(space.dist(x, y));
                    }
                }
                s += out;
            }
            gap = gap.min(if s == 0.0 { 0.0 } else { s / space.norm(x) });
        }
        gap
    }

    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04ac1e);
        let n = rng.random_range(2..=12usize);
        let space = random_point_cloud(seed, n, 10.0).unwrap();

        // lip_constant
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mm = MetricMap::real(Arc::new(space.clone()), &values).unwrap();
        let got = lip_constant(&mm).finite().unwrap();
        assert_eq!(got, lip_oracle(&space, &values), "seed {seed}: lip");

        // a random cover of 2-4 sets (patched to cover everything)
        let k = rng.random_range(2..=4usize);
        let mut named: Vec<(String, Vec<usize>)> = (0..k)
            .map(|s| {
                let set: Vec<usize> =
                    (0..n).filter(|_| rng.random_bool(0.5)).collect();
                (format!("s{s}"), set)
            })
            .collect();
        let mut covered = vec![false; n];
        for (_, set) in &named {
            for &x in set {
                covered[x] = true;
            }
        }
        for x in 0..n {
            if !covered[x] {
                named[0].1.push(x);
            }
        }
        let sets: Vec<Vec<usize>> = named
            .iter()
            .map(|(_, s)| {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();

        // multiplicity
        let mut count_oracle = vec![0usize; n];
        for set in &sets {
            for &x in set {
                count_oracle[x] += 1;
            }
        }
        assert_eq!(
            multiplicity(n, &sets),
            *count_oracle.iter().max().unwrap(),
            "seed {seed}: multiplicity"
        );

        // lebesgue_number
        let got = lebesgue_number(&space, &sets).unwrap();
        assert_eq!(got, lebesgue_oracle(&space, &sets), "seed {seed}: lebesgue");

        // sublinearity_gap on proper covers
        let cover = Cover::new(Arc::new(space.clone()), named).unwrap();
        if cover.is_proper() {
            let got = sublinearity_gap(&cover).unwrap();
            assert_eq!(got, gap_oracle(&space, &cover), "seed {seed}: gap");
        }

        // mcshane_extend against the direct formula
        let a_size = rng.random_range(1..=n);
        let mut subset: Vec<usize> = (0..n).collect();
        for _ in 0..n - a_size {
            subset.remove(rng.random_range(0..subset.len()));
        }
        let fa: Vec<f64> = subset.iter().map(|_| rng.random_range(-3.0..3.0)).collect();
        let lip = {
            let mut l = 0.0f64;
            for (p, &i) in subset.iter().enumerate() {
                for (q, &j) in subset.iter().enumerate().skip(p + 1) {
                    if space.dist(i, j) > 0.0 {
                        l = l.max((fa[p] - fa[q]).abs() / space.dist(i, j));
                    }
                }
            }
            l + 0.01
        };
        let got = mcshane_extend(&space, &subset, &fa, lip).unwrap();
        for x in 0..n {
            let expect = if let Some(p) = subset.iter().position(|&i| i == x) {
                fa[p]
            } else {
                subset
                    .iter()
                    .zip(&fa)
                    .map(|(&aa, &v)| v + lip * space.dist(x, aa))
                    .fold(f64::INFINITY, f64::min)
            };
            assert_eq!(got[x], expect, "seed {seed}: mcshane at {x}");
        }
    }
    finish("criterion 9 (oracle equivalence, 1000 micro-instances)", started, 30.0);
}

/// The spliced extension preserves norms exactly by construction; spot-check
/// the reference identity used throughout: |value| == |x| up to 1e-9.
#[test]
fn norm_identity_spot_check() {
    let inst = restricted_cone_map(424242, 120, 35.0).unwrap();
    let cert = splice_extend(
        inst.sphere.space().clone(),
        &inst.subset,
        &inst.subset_dirs,
        SpliceParams::default(),
    )
    .unwrap();
    let space = inst.sphere.space();
    for i in 0..space.len() {
        let vn = vec_norm(cert.output.value(i));
        assert!((vn - space.norm(i)).abs() <= 1e-9 * space.norm(i).max(1.0));
    }
    // directions remain unit
    for i in 0..space.len() {
        assert!((vec_norm(cert.output.sphere().dir(i)) - 1.0).abs() < 1e-9);
    }
    let _ = vec_dist(cert.output.value(0), cert.output.value(1));
}
