//! Experiment geometry: loudspeakers, microphones, the target region and its
//! quadrature, plus the impulse-response dataset format.
//!
//! A dataset directory holds
//!
//! * `manifest.json`: `{sources, receivers, samples, sample_rate_hz, byte_order: "little", dtype: "f32"}`
//! * `src_positions.csv`, `rcv_positions.csv`: header `x,y,z`, metres
//! * `ir.bin`: little-endian `f32`, source-major, then receiver, then sample.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::num_coeffs;
use crate::wavefield::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct LoudspeakerArray {
    pub positions: Vec<Vec3>,
    pub labels: Vec<String>,
}

impl LoudspeakerArray {
    pub fn new(positions: Vec<Vec3>) -> Self {
        let labels = (0..positions.len()).map(|i| format!("ls{i:02}")).collect();
        Self { positions, labels }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Microphone directivity as low-order expansion coefficients `c_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Directivity {
    pub order: usize,
    pub coeffs: DVector<Complex64>,
}

impl Directivity {
    /// Pressure microphone: `c_{0,0} = 1`, everything else zero.
    pub fn omni() -> Self {
        Self {
            order: 0,
            coeffs: DVector::from_element(1, Complex64::new(1.0, 0.0)),
        }
    }

    pub fn new(order: usize, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != num_coeffs(order) {
            return Err(Error::Dimension {
                what: "directivity coefficients",
                expected: num_coeffs(order),
                found: coeffs.len(),
            });
        }
        Ok(Self { order, coeffs })
    }

    pub fn is_omni(&self) -> bool {
        self.order == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicrophoneSet {
    pub positions: Vec<Vec3>,
    pub directivities: Vec<Directivity>,
    /// Indices into the evaluation grid when the set was drawn from one.
    pub grid_indices: Option<Vec<usize>>,
}

impl MicrophoneSet {
    pub fn omni(positions: Vec<Vec3>) -> Self {
        let directivities = vec![Directivity::omni(); positions.len()];
        Self {
            positions,
            directivities,
            grid_indices: None,
        }
    }

    pub fn with_directivities(positions: Vec<Vec3>, directivities: Vec<Directivity>) -> Result<Self> {
        if positions.len() != directivities.len() {
            return Err(Error::Dimension {
                what: "microphone directivities",
                expected: positions.len(),
                found: directivities.len(),
            });
        }
        Ok(Self {
            positions,
            directivities,
            grid_indices: None,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn max_directivity_order(&self) -> usize {
        self.directivities.iter().map(|d| d.order).max().unwrap_or(0)
    }
}

/// Regular planar grid of evaluation points, `index = ix * ny + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationGrid {
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Vec3>,
}

impl EvaluationGrid {
    /// Grid over `[x0, x1] × [y0, y1]` at height `z` with the given spacing.
    pub fn regular(x: (f64, f64), y: (f64, f64), z: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || x.1 < x.0 || y.1 < y.0 {
            return Err(Error::config("grid", "spacing must be positive and bounds ordered"));
        }
        let count = |a: f64, b: f64| -> Result<usize> {
            let steps = (b - a) / spacing;
            let rounded = steps.round();
            if (steps - rounded).abs() > 1e-9 {
                return Err(Error::config("grid.spacing", "spacing must divide the extent"));
            }
            Ok(rounded as usize + 1)
        };
        let (nx, ny) = (count(x.0, x.1)?, count(y.0, y.1)?);
        let mut points = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                points.push(Vec3::new(
                    x.0 + ix as f64 * spacing,
                    y.0 + iy as f64 * spacing,
                    z,
                ));
            }
        }
        Ok(Self { nx, ny, points })
    }

    /// Recovers the grid structure from an unordered list of positions lying
    /// on a full rectangular lattice (as in a measured dataset). Returns the
    /// grid and, for every grid point, the index of the source position.
    pub fn from_positions(positions: &[Vec3]) -> Result<(Self, Vec<usize>)> {
        let tol = 1e-6;
        let uniq = |vals: Vec<f64>| -> Vec<f64> {
            let mut v = vals;
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() < tol);
            v
        };
        let xs = uniq(positions.iter().map(|p| p.x).collect());
        let ys = uniq(positions.iter().map(|p| p.y).collect());
        if xs.len() * ys.len() != positions.len() {
            return Err(Error::config(
                "receivers",
                format!(
                    "{} positions do not form a full {}x{} grid",
                    positions.len(),
                    xs.len(),
                    ys.len()
                ),
            ));
        }
        let mut order = vec![usize::MAX; positions.len()];
        for (src, p) in positions.iter().enumerate() {
            let ix = xs.iter().position(|x| (x - p.x).abs() < tol).unwrap_or(0);
            let iy = ys.iter().position(|y| (y - p.y).abs() < tol).unwrap_or(0);
            let slot = ix * ys.len() + iy;
            if order[slot] != usize::MAX {
                return Err(Error::config("receivers", "duplicate grid position"));
            }
            order[slot] = src;
        }
        let points = order.iter().map(|&i| positions[i]).collect();
        Ok((
            Self {
                nx: xs.len(),
                ny: ys.len(),
                points,
            },
            order,
        ))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        let sum: Vec3 = self.points.iter().sum();
        sum / self.points.len().max(1) as f64
    }

    /// Axis spacings `(dx, dy)`; zero along an axis with a single point.
    pub fn spacing(&self) -> (f64, f64) {
        let dx = if self.nx > 1 {
            self.points[self.ny].x - self.points[0].x
        } else {
            0.0
        };
        let dy = if self.ny > 1 {
            self.points[1].y - self.points[0].y
        } else {
            0.0
        };
        (dx, dy)
    }

    /// Trapezoidal weights on the grid nodes (area measure).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let (dx, dy) = self.spacing();
        let axis = |n: usize, h: f64| -> Vec<f64> {
            (0..n)
                .map(|i| if n == 1 { 1.0 } else if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect()
        };
        let wx = axis(self.nx, dx);
        let wy = axis(self.ny, dy);
        let mut w = Vec::with_capacity(self.len());
        for a in &wx {
            for b in &wy {
                w.push(a * b);
            }
        }
        w
    }
}

pub type WeightFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape {
    /// Parallelogram `corner + s·edge_u + t·edge_v`, `s, t ∈ [0, 1]`.
    PlanarRectangle { corner: Vec3, edge_u: Vec3, edge_v: Vec3 },
    Cuboid { corner: Vec3, edges: [Vec3; 3] },
    Ball { center: Vec3, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureRule {
    /// Trapezoidal rule with `points` nodes per edge (including endpoints).
    Grid { points: Vec<usize> },
    /// Tensor Gauss–Legendre rule with the given number of nodes per axis.
    /// For a ball the axes are radius, polar cosine and azimuth.
    GaussLegendre { orders: Vec<usize> },
}

/// Target region `Ω` with its quadrature rule and accuracy weight `ρ`.
#[derive(Clone)]
pub struct TargetRegion {
    pub shape: RegionShape,
    pub rule: QuadratureRule,
    pub weight: Option<WeightFn>,
}

impl fmt::Debug for TargetRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetRegion")
            .field("shape", &self.shape)
            .field("rule", &self.rule)
            .field("weight", &self.weight.as_ref().map(|_| "custom"))
            .finish()
    }
}

impl TargetRegion {
    pub fn new(shape: RegionShape, rule: QuadratureRule) -> Self {
        Self {
            shape,
            rule,
            weight: None,
        }
    }

    pub fn with_weight(mut self, weight: WeightFn) -> Self {
        self.weight = Some(weight);
        self
    }

    /// Area or volume of the region.
    pub fn measure(&self) -> f64 {
        match &self.shape {
            RegionShape::PlanarRectangle { edge_u, edge_v, .. } => edge_u.cross(edge_v).norm(),
            RegionShape::Cuboid { edges, .. } => edges[0].dot(&edges[1].cross(&edges[2])).abs(),
            RegionShape::Ball { radius, .. } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        match &self.shape {
            RegionShape::PlanarRectangle {
                corner,
                edge_u,
                edge_v,
            } => corner + 0.5 * (edge_u + edge_v),
            RegionShape::Cuboid { corner, edges } => corner + 0.5 * (edges[0] + edges[1] + edges[2]),
            RegionShape::Ball { center, .. } => *center,
        }
    }

    /// Whether `p` lies in the closed region (1e-9 m tolerance).
    pub fn contains(&self, p: &Vec3) -> bool {
        let tol = 1e-9;
        match &self.shape {
            RegionShape::PlanarRectangle {
                corner,
                edge_u,
                edge_v,
            } => {
                let n = edge_u.cross(edge_v);
                let rel = p - corner;
                if n.norm() == 0.0 || rel.dot(&n).abs() > tol * n.norm() {
                    return false;
                }
                let s = rel.dot(edge_u) / edge_u.norm_squared();
                let t = rel.dot(edge_v) / edge_v.norm_squared();
                (-tol..=1.0 + tol).contains(&s) && (-tol..=1.0 + tol).contains(&t)
            }
            RegionShape::Cuboid { corner, edges } => {
                let m = nalgebra::Matrix3::from_columns(edges);
                match m.try_inverse() {
                    Some(inv) => {
                        let c = inv * (p - corner);
                        c.iter().all(|v| (-tol..=1.0 + tol).contains(v))
                    }
                    None => false,
                }
            }
            RegionShape::Ball { center, radius } => (p - center).norm() <= radius + tol,
        }
    }

    /// Rectangle matching a planar [`EvaluationGrid`], with the grid nodes as
    /// trapezoidal quadrature.
    pub fn from_grid(grid: &EvaluationGrid) -> Self {
        let first = grid.points[0];
        let last_x = grid.points[(grid.nx - 1) * grid.ny];
        let last_y = grid.points[grid.ny - 1];
        Self::new(
            RegionShape::PlanarRectangle {
                corner: first,
                edge_u: last_x - first,
                edge_v: last_y - first,
            },
            QuadratureRule::Grid {
                points: vec![grid.nx, grid.ny],
            },
        )
    }
}

/// Nodes and positive weights approximating `∫_Ω ρ(r) f(r) dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn trapezoid_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::config("quadrature.points", "need at least 2 nodes per edge"));
    }
    let h = 1.0 / (n - 1) as f64;
    let x = (0..n).map(|i| i as f64 * h).collect();
    let w = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    Ok((x, w))
}

fn gauss_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::config("quadrature.orders", "need at least 1 node per axis"));
    }
    let (x, w) = gauss_legendre(n);
    Ok((
        x.iter().map(|v| 0.5 * (v + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    ))
}

fn per_axis(values: &[usize], dims: usize, field: &str) -> Result<Vec<usize>> {
    match values.len() {
        1 => Ok(vec![values[0]; dims]),
        n if n == dims => Ok(values.to_vec()),
        _ => Err(Error::config(field, format!("expected 1 or {dims} entries"))),
    }
}

/// Builds the quadrature for `region`, folding `ρ` into the weights.
pub fn quadrature(region: &TargetRegion) -> Result<Quadrature> {
    let unit = |rule: &QuadratureRule, dims: usize| -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        match rule {
            QuadratureRule::Grid { points } => per_axis(points, dims, "quadrature.points")?
                .into_iter()
                .map(trapezoid_unit)
                .collect(),
            QuadratureRule::GaussLegendre { orders } => per_axis(orders, dims, "quadrature.orders")?
                .into_iter()
                .map(gauss_unit)
                .collect(),
        }
    };

    let (nodes, mut weights) = match &region.shape {
        RegionShape::PlanarRectangle {
            corner,
            edge_u,
            edge_v,
        } => {
            let axes = unit(&region.rule, 2)?;
            let area = edge_u.cross(edge_v).norm();
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (s, ws) in axes[0].0.iter().zip(&axes[0].1) {
                for (t, wt) in axes[1].0.iter().zip(&axes[1].1) {
                    nodes.push(corner + *s * edge_u + *t * edge_v);
                    weights.push(ws * wt * area);
                }
            }
            (nodes, weights)
        }
        RegionShape::Cuboid { corner, edges } => {
            let axes = unit(&region.rule, 3)?;
            let volume = edges[0].dot(&edges[1].cross(&edges[2])).abs();
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (a, wa) in axes[0].0.iter().zip(&axes[0].1) {
                for (b, wb) in axes[1].0.iter().zip(&axes[1].1) {
                    for (c, wc) in axes[2].0.iter().zip(&axes[2].1) {
                        nodes.push(corner + *a * edges[0] + *b * edges[1] + *c * edges[2]);
                        weights.push(wa * wb * wc * volume);
                    }
                }
            }
            (nodes, weights)
        }
        RegionShape::Ball { center, radius } => {
            let QuadratureRule::GaussLegendre { orders } = &region.rule else {
                return Err(Error::config(
                    "quadrature",
                    "ball regions only support the Gauss-Legendre rule",
                ));
            };
            let n = per_axis(orders, 3, "quadrature.orders")?;
            let (r, wr) = gauss_unit(n[0])?;
            let (ct, wct) = gauss_legendre(n[1].max(1));
            let nphi = n[2].max(1);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (ri, wri) in r.iter().zip(&wr) {
                let rad = ri * radius;
                for (c, wc) in ct.iter().zip(&wct) {
                    let s = (1.0 - c * c).sqrt();
                    for p in 0..nphi {
                        let phi = 2.0 * std::f64::consts::PI * p as f64 / nphi as f64;
                        nodes.push(center + rad * Vec3::new(s * phi.cos(), s * phi.sin(), *c));
                        weights.push(
                            wri * radius * rad * rad * wc * 2.0 * std::f64::consts::PI / nphi as f64,
                        );
                    }
                }
            }
            (nodes, weights)
        }
    };

    if let Some(rho) = &region.weight {
        for (w, x) in weights.iter_mut().zip(&nodes) {
            *w *= rho(x);
        }
    }
    Ok(Quadrature { nodes, weights })
}

/// Loudspeakers, target region and evaluation grid of the desk-scale setup:
/// 16 loudspeakers on the border of each of two 2 m squares at z = ±0.2 m
/// and a 1 m square at z = 0 sampled every 0.05 m.
#[derive(Debug, Clone)]
pub struct PaperGeometry {
    pub speakers: LoudspeakerArray,
    pub region: TargetRegion,
    pub grid: EvaluationGrid,
}

/// `count` points at uniform arc length along the border of the square of
/// half-width `half`, starting at the midpoint of the +x edge and running
/// counter-clockwise.
pub fn square_border(half: f64, count: usize, z: f64) -> Vec<Vec3> {
    let perimeter = 8.0 * half;
    (0..count)
        .map(|i| {
            // arc length measured from (half, 0)
            let s = (i as f64 * perimeter / count as f64 + half) % perimeter;
            // arc length measured from the corner (half, -half)
            let side = (s / (2.0 * half)).floor() as usize;
            let t = s - side as f64 * 2.0 * half - half;
            let (x, y) = match side % 4 {
                0 => (half, t),
                1 => (-t, half),
                2 => (-half, -t),
                _ => (t, -half),
            };
            Vec3::new(x, y, z)
        })
        .collect()
}

pub fn paper_geometry() -> PaperGeometry {
    let mut positions = square_border(1.0, 16, -0.2);
    positions.extend(square_border(1.0, 16, 0.2));
    let grid = EvaluationGrid::regular((-0.5, 0.5), (-0.5, 0.5), 0.0, 0.05)
        .expect("static geometry is valid");
    let region = TargetRegion::from_grid(&grid);
    PaperGeometry {
        speakers: LoudspeakerArray::new(positions),
        region,
        grid,
    }
}

/// Regular `√count × √count` omnidirectional sub-grid of `grid`.
pub fn subsample_mics(grid: &EvaluationGrid, count: usize) -> Result<MicrophoneSet> {
    let side = count.isqrt();
    if side * side != count || count == 0 {
        return Err(Error::config(
            "mics",
            format!("microphone count {count} is not a positive perfect square"),
        ));
    }
    if side > grid.nx || side > grid.ny {
        return Err(Error::config(
            "mics",
            format!("{side}x{side} microphones do not fit a {}x{} grid", grid.nx, grid.ny),
        ));
    }
    let pick = |n: usize| -> Vec<usize> {
        if side == 1 {
            return vec![(n - 1) / 2];
        }
        (0..side)
            .map(|i| ((i * (n - 1)) as f64 / (side - 1) as f64).round() as usize)
            .collect()
    };
    let mut indices = Vec::with_capacity(count);
    for ix in pick(grid.nx) {
        for iy in pick(grid.ny) {
            indices.push(ix * grid.ny + iy);
        }
    }
    let mut set = MicrophoneSet::omni(indices.iter().map(|&i| grid.points[i]).collect());
    set.grid_indices = Some(indices);
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub sources: usize,
    pub receivers: usize,
    pub samples: usize,
    pub sample_rate_hz: f64,
    pub byte_order: String,
    pub dtype: String,
}

/// Impulse responses `[sources × receivers × samples]` with positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredDataset {
    pub src_positions: Vec<Vec3>,
    pub rcv_positions: Vec<Vec3>,
    pub samples: usize,
    pub sample_rate_hz: f64,
    pub irs: Vec<f32>,
}

impl MeasuredDataset {
    pub fn new(
        src_positions: Vec<Vec3>,
        rcv_positions: Vec<Vec3>,
        samples: usize,
        sample_rate_hz: f64,
        irs: Vec<f32>,
    ) -> Result<Self> {
        let expected = src_positions.len() * rcv_positions.len() * samples;
        if irs.len() != expected {
            return Err(Error::Dimension {
                what: "impulse responses",
                expected,
                found: irs.len(),
            });
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::config("sample_rate_hz", "must be positive"));
        }
        Ok(Self {
            src_positions,
            rcv_positions,
            samples,
            sample_rate_hz,
            irs,
        })
    }

    pub fn sources(&self) -> usize {
        self.src_positions.len()
    }

    pub fn receivers(&self) -> usize {
        self.rcv_positions.len()
    }

    pub fn ir(&self, source: usize, receiver: usize) -> &[f32] {
        let start = (source * self.receivers() + receiver) * self.samples;
        &self.irs[start..start + self.samples]
    }

    pub fn manifest(&self) -> DatasetManifest {
        DatasetManifest {
            sources: self.sources(),
            receivers: self.receivers(),
            samples: self.samples,
            sample_rate_hz: self.sample_rate_hz,
            byte_order: "little".into(),
            dtype: "f32".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PositionRow {
    x: f64,
    y: f64,
    z: f64,
}

fn read_positions(path: &Path) -> Result<Vec<Vec3>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::ingestion(path, format!("cannot open positions: {e}")))?;
    let mut out = Vec::new();
    for (line, row) in reader.deserialize::<PositionRow>().enumerate() {
        let row = row.map_err(|e| Error::ingestion(path, format!("row {}: {e}", line + 1)))?;
        if !(row.x.is_finite() && row.y.is_finite() && row.z.is_finite()) {
            return Err(Error::ingestion(path, format!("row {}: non-finite position", line + 1)));
        }
        out.push(Vec3::new(row.x, row.y, row.z));
    }
    Ok(out)
}

fn write_positions(path: &Path, positions: &[Vec3]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::ingestion(path, e.to_string()))?;
    for p in positions {
        writer
            .serialize(PositionRow {
                x: p.x,
                y: p.y,
                z: p.z,
            })
            .map_err(|e| Error::ingestion(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<MeasuredDataset> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| Error::ingestion(&manifest_path, format!("invalid manifest: {e}")))?;
    if manifest.byte_order != "little" || manifest.dtype != "f32" {
        return Err(Error::ingestion(
            &manifest_path,
            format!(
                "unsupported encoding {}/{}, expected little/f32",
                manifest.byte_order, manifest.dtype
            ),
        ));
    }
    if !(manifest.sample_rate_hz > 0.0) {
        return Err(Error::ingestion(&manifest_path, "sample_rate_hz must be positive"));
    }

    let src_path = dir.join("src_positions.csv");
    let rcv_path = dir.join("rcv_positions.csv");
    let src = read_positions(&src_path)?;
    let rcv = read_positions(&rcv_path)?;
    if src.len() != manifest.sources {
        return Err(Error::ingestion(
            &src_path,
            format!("manifest lists {} sources, file has {}", manifest.sources, src.len()),
        ));
    }
    if rcv.len() != manifest.receivers {
        return Err(Error::ingestion(
            &rcv_path,
            format!("manifest lists {} receivers, file has {}", manifest.receivers, rcv.len()),
        ));
    }

    let ir_path = dir.join("ir.bin");
    let bytes = fs::read(&ir_path).map_err(|e| Error::io(&ir_path, e))?;
    let expected = manifest.sources * manifest.receivers * manifest.samples;
    if bytes.len() != expected * 4 {
        return Err(Error::ingestion(
            &ir_path,
            format!(
                "dimension mismatch: manifest implies {} samples ({} bytes), file has {} bytes",
                expected,
                expected * 4,
                bytes.len()
            ),
        ));
    }
    let mut irs = Vec::with_capacity(expected);
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            let per_source = manifest.receivers * manifest.samples;
            return Err(Error::ingestion(
                &ir_path,
                format!(
                    "non-finite sample at byte offset {} (source {}, receiver {}, sample {})",
                    i * 4,
                    i / per_source,
                    (i % per_source) / manifest.samples,
                    i % manifest.samples
                ),
            ));
        }
        irs.push(v);
    }
    MeasuredDataset::new(src, rcv, manifest.samples, manifest.sample_rate_hz, irs)
}

/// Writes `dataset` into `dir` (created if missing). Returns the written files.
pub fn write_dataset(dir: impl AsRef<Path>, dataset: &MeasuredDataset) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&dataset.manifest()).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    let src_path = dir.join("src_positions.csv");
    let rcv_path = dir.join("rcv_positions.csv");
    write_positions(&src_path, &dataset.src_positions)?;
    write_positions(&rcv_path, &dataset.rcv_positions)?;
    let ir_path = dir.join("ir.bin");
    let mut bytes = Vec::with_capacity(dataset.irs.len() * 4);
    for v in &dataset.irs {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&ir_path, bytes).map_err(|e| Error::io(&ir_path, e))?;
    Ok(vec![manifest_path, src_path, rcv_path, ir_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_counts() {
        let g = paper_geometry();
        assert_eq!(g.speakers.len(), 32);
        assert_eq!(g.grid.len(), 441);
        for p in &g.grid.points {
            assert_eq!(p.z, 0.0);
            assert!(p.x.abs() <= 0.5 + 1e-12 && p.y.abs() <= 0.5 + 1e-12);
        }
        for s in &g.speakers.positions {
            assert!(!g.region.contains(s));
            assert!((s.x.abs() - 1.0).abs() < 1e-12 || (s.y.abs() - 1.0).abs() < 1e-12);
        }
        assert!((g.speakers.positions[0] - Vec3::new(1.0, 0.0, -0.2)).norm() < 1e-12);
    }

    #[test]
    fn speaker_layout_rotation_symmetry() {
        let g = paper_geometry();
        for s in &g.speakers.positions {
            let rotated = Vec3::new(-s.y, s.x, s.z);
            assert!(g
                .speakers
                .positions
                .iter()
                .any(|p| (p - rotated).norm() < 1e-12));
        }
    }

    #[test]
    fn quadrature_measure_and_polynomials() {
        let square = RegionShape::PlanarRectangle {
            corner: Vec3::zeros(),
            edge_u: Vec3::x(),
            edge_v: Vec3::y(),
        };
        let region = TargetRegion::new(square.clone(), QuadratureRule::Grid { points: vec![11] });
        let q = quadrature(&region).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(q.weights.iter().all(|w| *w > 0.0));

        let region = TargetRegion::new(square, QuadratureRule::GaussLegendre { orders: vec![2] });
        let q = quadrature(&region).unwrap();
        let v = q.integrate(|p| p.x * p.x * p.y * p.y);
        assert!((v - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn quadrature_ball_and_cuboid_measure() {
        let ball = TargetRegion::new(
            RegionShape::Ball {
                center: Vec3::new(0.1, 0.0, 0.0),
                radius: 0.3,
            },
            QuadratureRule::GaussLegendre { orders: vec![6, 8, 12] },
        );
        let q = quadrature(&ball).unwrap();
        assert!((q.weights.iter().sum::<f64>() - ball.measure()).abs() < 1e-9);
        assert!(q.weights.iter().all(|w| *w > 0.0));

        let cube = TargetRegion::new(
            RegionShape::Cuboid {
                corner: Vec3::zeros(),
                edges: [Vec3::x() * 2.0, Vec3::y(), Vec3::z() * 0.5],
            },
            QuadratureRule::Grid { points: vec![5, 4, 3] },
        );
        let q = quadrature(&cube).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let bad = TargetRegion::new(
            RegionShape::Ball {
                center: Vec3::zeros(),
                radius: 1.0,
            },
            QuadratureRule::Grid { points: vec![4] },
        );
        assert!(matches!(quadrature(&bad), Err(Error::Config { .. })));
    }

    #[test]
    fn custom_weight_is_folded_in() {
        let region = TargetRegion::new(
            RegionShape::PlanarRectangle {
                corner: Vec3::zeros(),
                edge_u: Vec3::x(),
                edge_v: Vec3::y(),
            },
            QuadratureRule::GaussLegendre { orders: vec![4] },
        )
        .with_weight(Arc::new(|p: &Vec3| 2.0 * p.x));
        let q = quadrature(&region).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paper_grid_trapezoid_weights() {
        let g = paper_geometry();
        let q = quadrature(&g.region).unwrap();
        assert_eq!(q.len(), 441);
        for (a, b) in q.nodes.iter().zip(&g.grid.points) {
            assert!((a - b).norm() < 1e-12);
        }
        let w = g.grid.trapezoid_weights();
        for (a, b) in w.iter().zip(&q.weights) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mic_subsampling() {
        let g = paper_geometry().grid;
        let m = subsample_mics(&g, 16).unwrap();
        assert_eq!(m.len(), 16);
        let xs: Vec<f64> = m.positions.iter().map(|p| p.x).collect();
        assert!((xs.iter().cloned().fold(f64::INFINITY, f64::min) + 0.5).abs() < 1e-12);
        assert!((xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - 0.5).abs() < 1e-12);
        assert_eq!(subsample_mics(&g, 9).unwrap().len(), 9);
        assert_eq!(subsample_mics(&g, 36).unwrap().len(), 36);
        assert!(matches!(subsample_mics(&g, 5), Err(Error::Config { .. })));
        assert!(subsample_mics(&g, 22 * 22).is_err());
    }

    #[test]
    fn grid_recovery_from_shuffled_positions() {
        let g = EvaluationGrid::regular((0.0, 0.2), (0.0, 0.3), 0.0, 0.1).unwrap();
        let mut shuffled = g.points.clone();
        shuffled.reverse();
        let (recovered, order) = EvaluationGrid::from_positions(&shuffled).unwrap();
        assert_eq!(recovered.nx, 3);
        assert_eq!(recovered.ny, 4);
        for (i, p) in recovered.points.iter().enumerate() {
            assert_eq!(*p, shuffled[order[i]]);
            assert!((p - g.points[i]).norm() < 1e-12);
        }
        assert!(EvaluationGrid::from_positions(&shuffled[1..]).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(1);
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
    }
}
