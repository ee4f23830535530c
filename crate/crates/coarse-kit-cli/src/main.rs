//! `coarse-kit`: command-line front end for the coarse-geometry toolkit.
//!
//! Every command reads JSON instances, runs one toolkit operation, and emits
//! a report bundle (command echo, input digests, results, certificates,
//! warnings) as JSON. Results are deterministic for identical inputs and
//! seeds. Exit codes: 0 success, 1 IO/parse trouble, 2 precondition
//! violations, 3 violated certificates.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use coarse_kit::extension::{
    extension_modulus, splice_extend, ExtendStrategy, ModulusInstance, SpliceParams,
};
use coarse_kit::generate;
use coarse_kit::io::{
    digest_hex, map_file_from_values, to_json_string, ColoredCoverFile, CoverFile,
    FunctionFile, MapFile, SamplesFile, SpaceFile,
};
use coarse_kit::maps::{
    annulus_profile, asymptotic_fit, induce, lip_constant, sublinear_defect, Lip, MetricMap,
};
use coarse_kit::partitions::{canonical_partition, sublinearity_gap};
use coarse_kit::shrink::{shrink, validate_colored_cover};
use coarse_kit::space::{annulus, greedy_net, net_laws_hold, scale_connected};
use coarse_kit::sublinear::{fit_sublinear_through, is_asymptotically_sublinear};
use coarse_kit::{Error, DEFAULT_TOL};

#[derive(Parser)]
#[command(
    name = "coarse-kit",
    version,
    about = "Finite-scale coarse geometry toolkit: validate spaces, measure Lipschitz data, extend norm-preserving maps, shrink covers"
)]
struct Cli {
    /// Write the report bundle to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms and discreteness of a space file.
    Validate { file: PathBuf },
    /// Greedy eps-net of a space.
    Net {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Points with norm in [r, s); s may be "inf".
    Annulus {
        file: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value = "inf")]
        s: String,
    },
    /// Scale connectivity of a space at scale m.
    Connected {
        file: PathBuf,
        #[arg(long)]
        m: f64,
    },
    /// Lipschitz constant of a vector-valued map.
    Lip { map: PathBuf },
    /// Pareto frontier of asymptotic (lambda, M) fits.
    Fit { map: PathBuf },
    /// Annulus Lipschitz profile of a unit direction field.
    Profile {
        map: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long = "M")]
        m_ratio: f64,
        /// Also write the per-scale rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sublinearity defect of a direction field against a scale function,
    /// at one or more cutoffs R.
    Defect {
        map: PathBuf,
        #[arg(long)]
        sublinear: PathBuf,
        #[arg(long = "R", num_args = 1.., required = true)]
        r_min: Vec<f64>,
        /// Also write the defect-vs-R curve as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Canonical partition of unity of a cover, with certificates.
    Partition { cover: PathBuf },
    /// Sublinearity gap of a cover.
    Gap { cover: PathBuf },
    /// Extend a norm-preserving map over a space by the annulus splice.
    Extend {
        map: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value = "nearest")]
        strategy: String,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long = "M", default_value_t = 2.0)]
        m_ratio: f64,
    },
    /// Empirical extension modulus over a directory of map files.
    Modulus {
        family_dir: PathBuf,
        #[arg(long, default_value = "nearest")]
        strategy: String,
    },
    /// Shrink a colored cover and certify multiplicity and Lebesgue number.
    Shrink {
        cover: PathBuf,
        #[arg(long, default_value = "nearest")]
        strategy: String,
    },
    /// Fit an asymptotically sublinear function through samples.
    SublinearFit { samples: PathBuf },
    /// Emit a deterministic instance into a directory.
    Generate {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        side: Option<f64>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
    },
}

#[derive(Serialize)]
struct ReportBundle {
    command: String,
    inputs: BTreeMap<String, String>,
    results: Value,
    certificates: Vec<Value>,
    warnings: Vec<String>,
}

struct Ctx {
    tol: f64,
    inputs: BTreeMap<String, String>,
    certificates: Vec<Value>,
    warnings: Vec<String>,
    /// Set when a theorem-backed check failed but the report should still be
    /// emitted; forces exit code 3.
    cert_failure: bool,
}

impl Ctx {
    fn read<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, Error> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), digest_hex(&bytes));
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))
    }

    fn certificate(&mut self, name: &str, ok: bool, details: Value) {
        if !ok {
            self.cert_failure = true;
        }
        self.certificates.push(json!({
            "name": name,
            "ok": ok,
            "details": details,
        }));
    }
}

fn parse_strategy(s: &str) -> Result<ExtendStrategy, Error> {
    match s {
        "nearest" => Ok(ExtendStrategy::Nearest),
        "project" => Ok(ExtendStrategy::project_default()),
        other => Err(Error::Input(format!(
            "unknown strategy {other:?}; expected nearest or project"
        ))),
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn lip_json(l: Lip) -> Value {
    match l {
        Lip::Finite(x) => json!(x),
        Lip::Unbounded => json!("unbounded"),
    }
}

fn run(cli: &Cli, ctx: &mut Ctx) -> Result<Value, Error> {
    match &cli.command {
        Command::Validate { file } => {
            let sf: SpaceFile = ctx.read(file)?;
            let space = sf.to_space()?;
            let report = space.validate(ctx.tol);
            Ok(json!({
                "points": space.len(),
                "diameter": space.diameter(),
                "report": report,
            }))
        }
        Command::Net { file, eps } => {
            let sf: SpaceFile = ctx.read(file)?;
            let space = sf.to_space()?;
            let (net, selected) = greedy_net(&space, *eps)?;
            let ok = net_laws_hold(&space, &selected, *eps);
            ctx.certificate("net-laws", ok, json!({ "eps": eps }));
            Ok(json!({
                "eps": eps,
                "size": net.len(),
                "selected": selected.iter().map(|&i| space.id(i)).collect::<Vec<_>>(),
            }))
        }
        Command::Annulus { file, r, s } => {
            let sf: SpaceFile = ctx.read(file)?;
            let space = sf.to_space()?;
            let upper = if s == "inf" {
                f64::INFINITY
            } else {
                s.parse::<f64>()
                    .map_err(|_| Error::Input(format!("cannot parse upper bound {s:?}")))?
            };
            let a = annulus(&space, *r, upper)?;
            Ok(json!({
                "r": a.lower,
                "s": if a.upper.is_finite() { json!(a.upper) } else { json!("inf") },
                "members": a.members.iter().map(|&i| space.id(i)).collect::<Vec<_>>(),
            }))
        }
        Command::Connected { file, m } => {
            let sf: SpaceFile = ctx.read(file)?;
            let space = sf.to_space()?;
            Ok(json!({ "m": m, "connected": scale_connected(&space, *m)? }))
        }
        Command::Lip { map } => {
            let mf: MapFile = ctx.read(map)?;
            let space = mf.load_space(&base_dir(map))?;
            let values = mf.full_values(&space)?;
            let metric_map = MetricMap::euclidean(space, values)?;
            Ok(json!({ "lip": lip_json(lip_constant(&metric_map)) }))
        }
        Command::Fit { map } => {
            let mf: MapFile = ctx.read(map)?;
            let space = mf.load_space(&base_dir(map))?;
            let values = mf.full_values(&space)?;
            let metric_map = MetricMap::euclidean(space, values)?;
            let fit = asymptotic_fit(&metric_map);
            Ok(serde_json::to_value(fit).expect("fit serializes"))
        }
        Command::Profile {
            map,
            r,
            m_ratio,
            csv,
        } => {
            let mf: MapFile = ctx.read(map)?;
            let sphere = mf.to_sphere_map(&base_dir(map), ctx.tol)?;
            let profile = annulus_profile(&sphere, *r, *m_ratio)?;
            if profile.unbounded_trend {
                ctx.warnings.push(format!(
                    "profile shows an unbounded growth trend (ratio {:.3})",
                    profile.trend_ratio
                ));
            }
            if let Some(path) = csv {
                let mut lines =
                    String::from("k,band_size,tail_size,lip_band,lip_tail,scaled_band,scaled_tail\n");
                for row in &profile.rows {
                    lines.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        row.k,
                        row.band_size,
                        row.tail_size,
                        row.lip_band,
                        row.lip_tail,
                        row.scaled_band,
                        row.scaled_tail
                    ));
                }
                std::fs::write(path, lines)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(serde_json::to_value(&profile).expect("profile serializes"))
        }
        Command::Defect {
            map,
            sublinear,
            r_min,
            csv,
        } => {
            let mf: MapFile = ctx.read(map)?;
            let sphere = mf.to_sphere_map(&base_dir(map), ctx.tol)?;
            let ff: FunctionFile = ctx.read(sublinear)?;
            let s = ff.to_function()?;
            let witness = is_asymptotically_sublinear(&s);
            if !witness.verdict {
                ctx.warnings
                    .push("scale function is not asymptotically sublinear".into());
            }
            let curve: Vec<(f64, f64)> = r_min
                .iter()
                .map(|&r| (r, sublinear_defect(&sphere, &s, r)))
                .collect();
            if let Some(path) = csv {
                let mut lines = String::from("R,defect\n");
                for (r, d) in &curve {
                    lines.push_str(&format!("{r},{d}\n"));
                }
                std::fs::write(path, lines)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(json!({
                "curve": curve
                    .iter()
                    .map(|(r, d)| json!({ "R": r, "defect": d }))
                    .collect::<Vec<_>>(),
                "scale_function_sublinear": witness.verdict,
            }))
        }
        Command::Partition { cover } => {
            let cf: CoverFile = ctx.read(cover)?;
            let c = cf.to_cover(&base_dir(cover))?;
            let p = canonical_partition(c)?;
            let space = p.space().clone();
            let cert = coarse_kit::partitions::certify_partition_lipschitz(&p, ctx.tol)?;
            ctx.certificate(
                "partition-cone-lipschitz",
                true,
                serde_json::to_value(&cert).expect("cert serializes"),
            );
            let phi: BTreeMap<String, Vec<f64>> = (0..space.len())
                .map(|x| (space.id(x).to_string(), p.phi(x).to_vec()))
                .collect();
            let s: BTreeMap<String, f64> = (0..space.len())
                .map(|x| (space.id(x).to_string(), p.s(x)))
                .collect();
            Ok(json!({
                "k": p.k(),
                "phi": phi,
                "S": s,
                "gap": p.gap(),
            }))
        }
        Command::Gap { cover } => {
            let cf: CoverFile = ctx.read(cover)?;
            let c = cf.to_cover(&base_dir(cover))?;
            Ok(json!({ "gap": sublinearity_gap(&c)? }))
        }
        Command::Extend {
            map,
            space,
            strategy,
            r,
            m_ratio,
        } => {
            let sf: SpaceFile = ctx.read(space)?;
            let ambient = Arc::new(sf.to_space()?);
            let mf: MapFile = ctx.read(map)?;
            let (subset, dirs) = mf.to_subset_directions(&ambient, ctx.tol)?;
            let params = SpliceParams::new(*r, *m_ratio, parse_strategy(strategy)?)?;
            let cert = splice_extend(ambient.clone(), &subset, &dirs, params)?;
            ctx.certificate("restriction-exact", cert.restriction_ok, json!({}));
            ctx.certificate(
                "norm-preserving",
                cert.norm_preserving_ok,
                json!({ "tol": ctx.tol }),
            );
            ctx.warnings.extend(cert.warnings.clone());
            let values: BTreeMap<String, Vec<f64>> = (0..ambient.len())
                .map(|i| (ambient.id(i).to_string(), cert.output.value(i).to_vec()))
                .collect();
            Ok(json!({
                "subset_size": cert.subset.len(),
                "lip_in": cert.lip_in,
                "lip_out": cert.lip_out,
                "fit_out": serde_json::to_value(&cert.fit_out).expect("fit serializes"),
                "constants": cert.constants,
                "stages": cert.stages,
                "values": values,
            }))
        }
        Command::Modulus {
            family_dir,
            strategy,
        } => {
            let strategy = parse_strategy(strategy)?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(family_dir)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", family_dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Input(format!(
                    "no .json instances in {}",
                    family_dir.display()
                )));
            }
            let mut family = Vec::new();
            for p in &paths {
                let mf: MapFile = ctx.read(p)?;
                let space = mf.load_space(&base_dir(p))?;
                let (subset, raw) = mf.subset_values(&space)?;
                // direction fields: values must be unit vectors
                let sphere_check = raw.iter().all(|v| {
                    (coarse_kit::maps::vec_norm(v) - 1.0).abs() <= ctx.tol.max(1e-9) * 2.0
                });
                if !sphere_check {
                    return Err(Error::Precondition(format!(
                        "{}: modulus instances carry unit directions",
                        p.display()
                    )));
                }
                family.push(ModulusInstance {
                    space,
                    subset,
                    dirs: raw,
                });
            }
            let rows = extension_modulus(&family, strategy)?;
            Ok(json!({
                "instances": paths.len(),
                "table": rows,
            }))
        }
        Command::Shrink { cover, strategy } => {
            let cf: ColoredCoverFile = ctx.read(cover)?;
            let cc = cf.to_colored_cover(&base_dir(cover))?;
            let check = validate_colored_cover(&cc);
            ctx.certificate(
                "colored-cover-valid",
                check.r_disjoint_ok && check.mesh_ok,
                serde_json::to_value(&check).expect("report serializes"),
            );
            let report = shrink(&cc, parse_strategy(strategy)?)?;
            ctx.certificate(
                "multiplicity",
                report.multiplicity_ok,
                json!({ "multiplicity": report.multiplicity, "target": cc.m() + 1 }),
            );
            ctx.certificate(
                "lebesgue",
                report.lebesgue_ok,
                json!({ "lebesgue": report.lebesgue, "target": report.lebesgue_target }),
            );
            ctx.certificate(
                "preimage-diameter",
                report.preimage_diameter_ok,
                json!({
                    "max": report.max_preimage_diameter,
                    "bound": report.preimage_diameter_bound,
                }),
            );
            ctx.warnings.extend(report.warnings.clone());
            let space = cc.space();
            let shrunk: BTreeMap<String, Vec<String>> = report
                .shrunk
                .iter()
                .enumerate()
                .map(|(i, set)| {
                    (
                        cc.cover().names()[i].clone(),
                        set.iter().map(|&x| space.id(x).to_string()).collect(),
                    )
                })
                .collect();
            Ok(json!({
                "multiplicity": report.multiplicity,
                "lebesgue": report.lebesgue,
                "lebesgue_target": report.lebesgue_target,
                "lambda": report.lambda,
                "t": report.t,
                "low_multiplicity_points": report.low_multiplicity.len(),
                "tops": report.tops,
                "shrunk": shrunk,
            }))
        }
        Command::SublinearFit { samples } => {
            let sf: SamplesFile = ctx.read(samples)?;
            let fit = fit_sublinear_through(&sf.samples)?;
            let witness = is_asymptotically_sublinear(&fit.function);
            ctx.certificate(
                "fit-is-sublinear",
                witness.verdict,
                serde_json::to_value(&witness).expect("witness serializes"),
            );
            Ok(serde_json::to_value(&fit).expect("fit serializes"))
        }
        Command::Generate {
            kind,
            seed,
            out_dir,
            n,
            r,
            side,
            width,
            height,
        } => {
            std::fs::create_dir_all(out_dir)
                .map_err(|e| Error::Input(format!("cannot create {}: {e}", out_dir.display())))?;
            let mut written: Vec<(String, String)> = Vec::new();
            let mut emit = |name: &str, contents: String| -> Result<(), Error> {
                let path = out_dir.join(name);
                std::fs::write(&path, contents.as_bytes())
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
                written.push((path.display().to_string(), digest_hex(contents.as_bytes())));
                Ok(())
            };
            match kind.as_str() {
                "integer-path" => {
                    let space = generate::integer_path(n.unwrap_or(16));
                    emit("space.json", to_json_string(&SpaceFile::from_space(&space)))?;
                }
                "grid-2d" => {
                    let space = generate::grid_2d(width.unwrap_or(4), height.unwrap_or(4))?;
                    emit("space.json", to_json_string(&SpaceFile::from_space(&space)))?;
                }
                "random-point-cloud" => {
                    let space =
                        generate::random_point_cloud(*seed, n.unwrap_or(32), side.unwrap_or(50.0))?;
                    emit("space.json", to_json_string(&SpaceFile::from_space(&space)))?;
                }
                "remark46" => {
                    let sphere = generate::alternating_pole_map(n.unwrap_or(4096))?;
                    let mf = map_file_from_values(sphere.space(), 2, sphere.dirs());
                    emit("map.json", to_json_string(&mf))?;
                }
                "colored-interval-cover" => {
                    let cc = generate::colored_interval_cover(n.unwrap_or(400), r.unwrap_or(8.0))?;
                    emit(
                        "cover.json",
                        to_json_string(&ColoredCoverFile::from_colored_cover(&cc)),
                    )?;
                }
                "restricted-cone-map" => {
                    let inst =
                        generate::restricted_cone_map(*seed, n.unwrap_or(64), side.unwrap_or(50.0))?;
                    let space = inst.sphere.space();
                    emit("space.json", to_json_string(&SpaceFile::from_space(space)))?;
                    let full = induce(&inst.sphere);
                    let mut values = BTreeMap::new();
                    for &i in &inst.subset {
                        values.insert(space.id(i).to_string(), full.value(i).to_vec());
                    }
                    let mf = MapFile {
                        space: coarse_kit::io::SpaceRef::Path("space.json".into()),
                        target_dim: 2,
                        values,
                    };
                    emit("map.json", to_json_string(&mf))?;
                }
                other => {
                    return Err(Error::Input(format!(
                        "unknown instance kind {other:?}; expected one of integer-path, grid-2d, random-point-cloud, remark46, colored-interval-cover, restricted-cone-map"
                    )))
                }
            }
            Ok(json!({
                "kind": kind,
                "seed": seed,
                "files": written
                    .iter()
                    .map(|(p, d)| json!({ "path": p, "digest": d }))
                    .collect::<Vec<_>>(),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = std::env::var("COARSEKIT_TOL")
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap_or(DEFAULT_TOL);
    let mut ctx = Ctx {
        tol,
        inputs: BTreeMap::new(),
        certificates: Vec::new(),
        warnings: Vec::new(),
        cert_failure: false,
    };
    let command_echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli, &mut ctx) {
        Ok(results) => {
            let bundle = ReportBundle {
                command: command_echo,
                inputs: ctx.inputs,
                results,
                certificates: ctx.certificates,
                warnings: ctx.warnings,
            };
            let rendered = to_json_string(&bundle);
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, rendered.as_bytes()) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{rendered}");
            }
            if ctx.cert_failure {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Input(_) => ExitCode::from(1),
                Error::Precondition(_) => ExitCode::from(2),
                Error::Certificate(_) => ExitCode::from(3),
            }
        }
    }
}
