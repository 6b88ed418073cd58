//! Layered GaAs/AlₓGa₁₋ₓAs structures and their sampled conduction-band profile.
//!
//! A structure is an ordered list of layers between two boundaries. The
//! outermost layers continue indefinitely beyond the grid: on a closed side
//! the grid is padded with that barrier until bound envelopes have decayed,
//! on an open side the declared layer is the finite stretch of lowered
//! potential that precedes the grid edge.
//!
//! The grid is cell-centred. Each cell carries the thickness-weighted mean
//! potential and the harmonic-mean effective mass of the layers it overlaps,
//! so interfaces that do not fall on cell edges are still represented to
//! second order in the cell width.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HBAR2_OVER_2ME;

/// Linear alloy model for the conduction-band offset and the effective mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    /// Conduction-band offset per unit aluminium fraction, meV.
    pub offset_coefficient: f64,
    /// Effective mass in units of the free-electron mass.
    pub effective_mass: f64,
}

impl Default for MaterialModel {
    /// 1000 meV per unit fraction puts the 800 meV barriers at x = 0.8.
    fn default() -> Self {
        Self {
            offset_coefficient: 1000.0,
            effective_mass: 0.067,
        }
    }
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.offset_coefficient > 0.0 && self.offset_coefficient.is_finite()) {
            return Err(Error::Config(format!(
                "offset_coefficient must be positive, got {}",
                self.offset_coefficient
            )));
        }
        if !(self.effective_mass > 0.0 && self.effective_mass.is_finite()) {
            return Err(Error::Config(format!(
                "effective_mass must be positive, got {}",
                self.effective_mass
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub thickness_nm: f64,
    pub alloy_fraction: f64,
    /// Sheet doping density, cm⁻². Carried as metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doping_cm2: Option<f64>,
    /// Per-layer effective mass override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_mass: Option<f64>,
}

impl Layer {
    pub fn new(thickness_nm: f64, alloy_fraction: f64) -> Self {
        Self {
            thickness_nm,
            alloy_fraction,
            doping_cm2: None,
            effective_mass: None,
        }
    }

    fn mass(&self, model: &MaterialModel) -> f64 {
        self.effective_mass.unwrap_or(model.effective_mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The outer barrier continues indefinitely.
    Closed,
    /// The outer layer is a lowered potential leading into a quasi-continuum.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub layers: Vec<Layer>,
    pub left_boundary: Boundary,
    pub right_boundary: Boundary,
}

impl StructureSpec {
    pub fn new(layers: Vec<Layer>, left_boundary: Boundary, right_boundary: Boundary) -> Self {
        Self {
            layers,
            left_boundary,
            right_boundary,
        }
    }

    pub fn closed(layers: Vec<Layer>) -> Self {
        Self::new(layers, Boundary::Closed, Boundary::Closed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 3 {
            return Err(Error::Config(format!(
                "a structure needs at least 3 layers, got {}",
                self.layers.len()
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if !(layer.thickness_nm > 0.0 && layer.thickness_nm.is_finite()) {
                return Err(Error::Config(format!(
                    "layer {i}: thickness must be positive, got {}",
                    layer.thickness_nm
                )));
            }
            if !(0.0..=1.0).contains(&layer.alloy_fraction) {
                return Err(Error::Config(format!(
                    "layer {i}: alloy fraction {} outside [0, 1]",
                    layer.alloy_fraction
                )));
            }
            if let Some(m) = layer.effective_mass {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(Error::Config(format!(
                        "layer {i}: effective mass override must be positive, got {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The same structure read right to left.
    pub fn reflected(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        Self::new(layers, self.right_boundary, self.left_boundary)
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// z-interval (nm, grid coordinates) occupied by layer `index`.
    pub fn layer_interval(&self, index: usize) -> (f64, f64) {
        let start = -0.5 * self.total_thickness()
            + self.layers[..index].iter().map(|l| l.thickness_nm).sum::<f64>();
        (start, start + self.layers[index].thickness_nm)
    }
}

/// Conduction-band offset (meV) of an alloy with aluminium fraction `x`.
pub fn offset_of(alloy_fraction: f64, model: &MaterialModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&alloy_fraction) {
        return Err(Error::Domain(format!(
            "alloy fraction {alloy_fraction} outside [0, 1]"
        )));
    }
    Ok(model.offset_coefficient * alloy_fraction)
}

/// Sampled potential and effective-mass profile on a uniform cell-centred grid.
///
/// `z` holds cell centres in nm with the middle of the layer stack at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub z: Vec<f64>,
    pub potential: Vec<f64>,
    pub mass: Vec<f64>,
    pub dz: f64,
}

impl PotentialGrid {
    /// Wraps explicit cell values. `z0` is the centre of the first cell.
    pub fn from_cells(z0: f64, dz: f64, potential: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if potential.len() != mass.len() || potential.len() < 2 {
            return Err(Error::Contract(format!(
                "potential ({}) and mass ({}) must have equal length >= 2",
                potential.len(),
                mass.len()
            )));
        }
        if !(dz > 0.0) {
            return Err(Error::Config(format!("dz must be positive, got {dz}")));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("potential must be finite".into()));
        }
        if mass.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Contract("effective mass must be positive".into()));
        }
        let z = (0..potential.len()).map(|i| z0 + i as f64 * dz).collect();
        Ok(Self {
            z,
            potential,
            mass,
            dz,
        })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// z of the left edge of the first cell.
    pub fn left_edge(&self) -> f64 {
        self.z[0] - 0.5 * self.dz
    }

    pub fn right_edge(&self) -> f64 {
        self.z[self.len() - 1] + 0.5 * self.dz
    }

    pub fn min_potential(&self) -> f64 {
        self.potential.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_potential(&self) -> f64 {
        self.potential.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when both grids sample the same cells.
    pub fn same_cells(&self, other: &PotentialGrid) -> bool {
        self.len() == other.len()
            && self.dz == other.dz
            && (self.z[0] - other.z[0]).abs() <= 1e-9 * self.dz
    }
}

/// Grid construction options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub dz: f64,
    /// Extra barrier added beyond each closed side, nm. `None` chooses a
    /// length from the decay of a state bound 5% of the well depth below the
    /// edge potential, so its envelope falls under 10⁻⁸ before the grid ends.
    pub cladding_nm: Option<f64>,
}

impl GridOptions {
    pub fn new(dz: f64) -> Self {
        Self {
            dz,
            cladding_nm: None,
        }
    }
}

/// Default sampling step, nm.
pub const DEFAULT_DZ: f64 = 0.01;

const DECAY_LOG: f64 = 18.420_680_743_952_367; // ln(1e8)
const MAX_AUTO_CLADDING_NM: f64 = 200.0;

fn auto_cladding(edge_potential: f64, edge_mass: f64, min_potential: f64) -> f64 {
    let depth = edge_potential - min_potential;
    if depth <= 0.0 {
        return 0.0;
    }
    let kappa = (edge_mass * 0.05 * depth / HBAR2_OVER_2ME).sqrt();
    (DECAY_LOG / kappa).min(MAX_AUTO_CLADDING_NM)
}

/// The larger of the two closed-side claddings `build_grid` would choose.
/// Passing it explicitly lets variants of a structure share their cells.
pub fn default_cladding(spec: &StructureSpec, model: &MaterialModel) -> Result<f64> {
    model.validate()?;
    spec.validate()?;
    let offsets = spec
        .layers
        .iter()
        .map(|l| offset_of(l.alloy_fraction, model))
        .collect::<Result<Vec<_>>>()?;
    let v_min = offsets.iter().copied().fold(f64::INFINITY, f64::min);
    let last = spec.layers.len() - 1;
    let mut pad = 0.0_f64;
    for (boundary, idx) in [(spec.left_boundary, 0), (spec.right_boundary, last)] {
        if boundary == Boundary::Closed {
            pad = pad.max(auto_cladding(offsets[idx], spec.layers[idx].mass(model), v_min));
        }
    }
    Ok(pad)
}

/// Samples the structure with the default cladding rule.
pub fn build_grid(spec: &StructureSpec, dz: f64, model: &MaterialModel) -> Result<PotentialGrid> {
    build_grid_with(spec, model, &GridOptions::new(dz))
}

pub fn build_grid_with(
    spec: &StructureSpec,
    model: &MaterialModel,
    options: &GridOptions,
) -> Result<PotentialGrid> {
    model.validate()?;
    spec.validate()?;
    let dz = options.dz;
    let thinnest = spec
        .layers
        .iter()
        .map(|l| l.thickness_nm)
        .fold(f64::INFINITY, f64::min);
    if !(dz > 0.0) || dz > thinnest / 4.0 {
        return Err(Error::Config(format!(
            "dz = {dz} nm must be positive and at most a quarter of the thinnest layer ({thinnest} nm)"
        )));
    }

    let offsets = spec
        .layers
        .iter()
        .map(|l| offset_of(l.alloy_fraction, model))
        .collect::<Result<Vec<_>>>()?;
    let inv_masses: Vec<f64> = spec.layers.iter().map(|l| 1.0 / l.mass(model)).collect();
    let v_min = offsets.iter().copied().fold(f64::INFINITY, f64::min);
    let last = spec.layers.len() - 1;

    let cladding = |boundary: Boundary, idx: usize| match boundary {
        Boundary::Open => 0.0,
        Boundary::Closed => options.cladding_nm.unwrap_or_else(|| {
            auto_cladding(offsets[idx], spec.layers[idx].mass(model), v_min)
        }),
    };
    // Whole cells of cladding keep interfaces on cell edges whenever the
    // layer thicknesses are multiples of dz.
    let whole = |pad: f64| (pad / dz - 1e-9).ceil().max(0.0) * dz;
    let mut pad_left = whole(cladding(spec.left_boundary, 0));
    let pad_right = whole(cladding(spec.right_boundary, last));

    let stack = spec.total_thickness();
    let raw = stack + pad_left + pad_right;
    let cells = ((raw / dz) - 1e-9).ceil().max(2.0) as usize;
    let extra = cells as f64 * dz - raw;
    // Rounding slack goes to the closed side, or is split when both match.
    pad_left += match (spec.left_boundary, spec.right_boundary) {
        (Boundary::Closed, Boundary::Open) => extra,
        (Boundary::Open, Boundary::Closed) => 0.0,
        _ => 0.5 * extra,
    };

    // Layer edges in grid coordinates; the outer layers extend to ±∞.
    let mut edges = Vec::with_capacity(spec.layers.len() + 1);
    let mut acc = -0.5 * stack;
    edges.push(f64::NEG_INFINITY);
    for layer in &spec.layers[..last] {
        acc += layer.thickness_nm;
        edges.push(acc);
    }
    edges.push(f64::INFINITY);

    let grid_left = -0.5 * stack - pad_left;
    let mut potential = Vec::with_capacity(cells);
    let mut mass = Vec::with_capacity(cells);
    let mut first_layer = 0usize;
    for k in 0..cells {
        let lo = grid_left + k as f64 * dz;
        let hi = lo + dz;
        while edges[first_layer + 1] <= lo {
            first_layer += 1;
        }
        let mut v = 0.0;
        let mut inv_m = 0.0;
        let mut covering = Vec::with_capacity(2);
        let mut j = first_layer;
        while j <= last && edges[j] < hi {
            let overlap = hi.min(edges[j + 1]) - lo.max(edges[j]);
            // Slivers below 1e-9 of a cell are rounding residue of the edges.
            if overlap > 1e-9 * dz {
                v += overlap * offsets[j];
                inv_m += overlap * inv_masses[j];
                covering.push(j);
            }
            j += 1;
        }
        if let [only] = covering[..] {
            potential.push(offsets[only]);
            mass.push(1.0 / inv_masses[only]);
        } else {
            let width: f64 = hi.min(edges[covering[covering.len() - 1] + 1])
                - lo.max(edges[covering[0]]);
            potential.push(v / width);
            mass.push(width / inv_m);
        }
    }
    PotentialGrid::from_cells(grid_left + 0.5 * dz, dz, potential, mass)
}

/// On-disk structure description: `[material]`, `[boundaries]` and an
/// ordered `[[layer]]` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    #[serde(default)]
    pub material: MaterialModel,
    pub boundaries: Boundaries,
    #[serde(rename = "layer")]
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: Boundary,
    pub right: Boundary,
}

impl StructureFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: StructureFile = toml::from_str(text)?;
        file.material.validate()?;
        file.spec().validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn spec(&self) -> StructureSpec {
        StructureSpec::new(self.layers.clone(), self.boundaries.left, self.boundaries.right)
    }
}
