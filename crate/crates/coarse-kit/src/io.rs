//! JSON interchange formats.
//!
//! Spaces are `{ "points": [ids], "basepoint": id, "matrix": [[...]] }` or
//! the same with `"edges": [[id, id, weight], ...]` instead of a matrix
//! (edges go through the shortest-path closure). Maps, covers, colored
//! covers, piecewise-linear functions, and sample lists each have a small
//! schema here. Anywhere a space is expected, either an inline object or a
//! path string (relative to the referring file) is accepted.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::maps::{canonical_direction, vec_norm, SphereMap};
use crate::partitions::Cover;
use crate::shrink::ColoredCover;
use crate::space::{metric_closure, PointedMetricSpace};
use crate::sublinear::PiecewiseLinearFunction;
use crate::{close_rel, Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Vec<String>,
    pub basepoint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(String, String, f64)>>,
}

impl SpaceFile {
    pub fn to_space(&self) -> Result<PointedMetricSpace> {
        match (&self.matrix, &self.edges) {
            (Some(m), None) => PointedMetricSpace::new(self.points.clone(), m, &self.basepoint),
            (None, Some(e)) => metric_closure(self.points.clone(), e, &self.basepoint),
            (Some(_), Some(_)) => Err(Error::Input(
                "give either a matrix or an edge list, not both".into(),
            )),
            (None, None) => Err(Error::Input("a matrix or an edge list is required".into())),
        }
    }

    pub fn from_space(space: &PointedMetricSpace) -> Self {
        let n = space.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| space.dist(i, j)).collect())
            .collect();
        Self {
            points: space.ids().to_vec(),
            basepoint: space.id(space.basepoint()).to_string(),
            matrix: Some(matrix),
            edges: None,
        }
    }
}

/// A space given inline or as a path to another JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(SpaceFile),
}

impl SpaceRef {
    pub fn load(&self, base_dir: &Path) -> Result<PointedMetricSpace> {
        match self {
            SpaceRef::Inline(f) => f.to_space(),
            SpaceRef::Path(p) => {
                let file: SpaceFile = read_json(&base_dir.join(p))?;
                file.to_space()
            }
        }
    }
}

/// A vector-valued map over a space; `values` may cover only a subset of the
/// points (extension inputs do).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub space: SpaceRef,
    pub target_dim: usize,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl MapFile {
    pub fn load_space(&self, base_dir: &Path) -> Result<Arc<PointedMetricSpace>> {
        Ok(Arc::new(self.space.load(base_dir)?))
    }

    /// Values for every point, in point order. Errors if any point lacks one.
    pub fn full_values(&self, space: &PointedMetricSpace) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(space.len());
        for id in space.ids() {
            let v = self
                .values
                .get(id)
                .ok_or_else(|| Error::Input(format!("no value for point {id:?}")))?;
            if v.len() != self.target_dim {
                return Err(Error::Input(format!(
                    "value for {id:?} has dimension {}, expected {}",
                    v.len(),
                    self.target_dim
                )));
            }
            out.push(v.clone());
        }
        Ok(out)
    }

    /// The subset carrying values, with those values, in point order.
    pub fn subset_values(&self, space: &PointedMetricSpace) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        let mut idx = Vec::new();
        let mut vals = Vec::new();
        for (id, v) in &self.values {
            let i = space
                .index_of(id)
                .ok_or_else(|| Error::Input(format!("value for unknown point {id:?}")))?;
            if v.len() != self.target_dim {
                return Err(Error::Input(format!(
                    "value for {id:?} has dimension {}, expected {}",
                    v.len(),
                    self.target_dim
                )));
            }
            idx.push(i);
            vals.push(v.clone());
        }
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by_key(|&p| idx[p]);
        Ok((
            order.iter().map(|&p| idx[p]).collect(),
            order.iter().map(|&p| vals[p].clone()).collect(),
        ))
    }

    /// Interpret the values as unit directions (a sphere map on the whole
    /// space), validating norms on load.
    pub fn to_sphere_map(&self, base_dir: &Path, tol: f64) -> Result<SphereMap> {
        let space = self.load_space(base_dir)?;
        let values = self.full_values(&space)?;
        SphereMap::new(space, values, tol)
    }

    /// Interpret the values as a norm-preserving map on a subset: checks
    /// `|v| = |x|` and returns the subset with unit directions (the
    /// canonical direction where the norm vanishes).
    pub fn to_subset_directions(
        &self,
        space: &Arc<PointedMetricSpace>,
        tol: f64,
    ) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        let (idx, vals) = self.subset_values(space)?;
        let mut dirs = Vec::with_capacity(vals.len());
        for (&i, v) in idx.iter().zip(&vals) {
            let vn = vec_norm(v);
            let nm = space.norm(i);
            if !close_rel(vn, nm, tol) {
                return Err(Error::Precondition(format!(
                    "value at {:?} is not norm-preserving: |v| = {vn}, |x| = {nm}",
                    space.id(i)
                )));
            }
            if vn == 0.0 {
                dirs.push(canonical_direction(self.target_dim));
            } else {
                dirs.push(v.iter().map(|&c| c / vn).collect());
            }
        }
        Ok((idx, dirs))
    }
}

/// Build a map file from per-point vectors.
pub fn map_file_from_values(
    space: &PointedMetricSpace,
    target_dim: usize,
    values: &[Vec<f64>],
) -> MapFile {
    let mut map = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        map.insert(space.id(i).to_string(), v.clone());
    }
    MapFile {
        space: SpaceRef::Inline(SpaceFile::from_space(space)),
        target_dim,
        values: map,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFile {
    pub space: SpaceRef,
    pub sets: BTreeMap<String, Vec<String>>,
}

impl CoverFile {
    pub fn to_cover(&self, base_dir: &Path) -> Result<Cover> {
        let space = Arc::new(self.space.load(base_dir)?);
        let mut named = Vec::new();
        for (name, ids) in &self.sets {
            let mut idx = Vec::with_capacity(ids.len());
            for id in ids {
                idx.push(
                    space
                        .index_of(id)
                        .ok_or_else(|| Error::Input(format!("set {name:?} references unknown point {id:?}")))?,
                );
            }
            named.push((name.clone(), idx));
        }
        Cover::new(space, named)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoredCoverFile {
    pub space: SpaceRef,
    pub sets: BTreeMap<String, Vec<String>>,
    pub colors: BTreeMap<String, usize>,
    pub r: f64,
    #[serde(rename = "C")]
    pub mesh_c: f64,
}

impl ColoredCoverFile {
    pub fn to_colored_cover(&self, base_dir: &Path) -> Result<ColoredCover> {
        let plain = CoverFile {
            space: self.space.clone(),
            sets: self.sets.clone(),
        };
        let cover = plain.to_cover(base_dir)?;
        let mut colors = Vec::with_capacity(cover.k());
        for name in cover.names() {
            colors.push(*self.colors.get(name).ok_or_else(|| {
                Error::Input(format!("no color for set {name:?}"))
            })?);
        }
        ColoredCover::new(cover, colors, self.r, self.mesh_c)
    }

    pub fn from_colored_cover(cc: &ColoredCover) -> Self {
        let space = cc.space();
        let mut sets = BTreeMap::new();
        let mut colors = BTreeMap::new();
        for (i, name) in cc.cover().names().iter().enumerate() {
            sets.insert(
                name.clone(),
                cc.cover().set(i).iter().map(|&x| space.id(x).to_string()).collect(),
            );
            colors.insert(name.clone(), cc.colors()[i]);
        }
        Self {
            space: SpaceRef::Inline(SpaceFile::from_space(space)),
            sets,
            colors,
            r: cc.r(),
            mesh_c: cc.mesh_c(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub breakpoints: Vec<(f64, f64)>,
    pub tail_slope: f64,
}

impl FunctionFile {
    pub fn to_function(&self) -> Result<PiecewiseLinearFunction> {
        PiecewiseLinearFunction::new(self.breakpoints.clone(), self.tail_slope)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplesFile {
    /// `(t_k, a_k)` pairs.
    pub samples: Vec<(f64, f64)>,
}

/// Read and parse a JSON file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))
}

/// Serialize pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// FNV-1a 64-bit content digest, hex encoded.
pub fn digest_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
