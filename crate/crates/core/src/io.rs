//! File formats: JSON for states, maps, tomograms and histograms; CSV
//! exports of grid data. Every float is written with 17 significant digits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numerics::PeriodicGrid;
use crate::phase_space::{AlphaConvention, Marginals, WignerMap};
use crate::states::{DensityMatrix, PureState};
use crate::tomography::{OamHistogram, Provenance, TimeKey, Tomogram, TomogramSet};
use crate::{Error, Result, C64};

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// Either state format; mixed states carry `entries`, pure states `amplitudes`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Pure {
        l_max: usize,
        amplitudes: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        leakage: Option<f64>,
    },
    Mixed {
        l_max: usize,
        entries: Vec<[f64; 2]>,
    },
}

impl StateFile {
    pub fn from_pure(state: &PureState) -> Self {
        StateFile::Pure {
            l_max: state.l_max(),
            amplitudes: state.amplitudes().iter().map(|&z| pair(z)).collect(),
            leakage: Some(state.leakage()),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        let entries = (0..dim)
            .flat_map(|i| (0..dim).map(move |k| (i, k)))
            .map(|(i, k)| pair(rho.entries()[(i, k)]))
            .collect();
        StateFile::Mixed { l_max: rho.l_max(), entries }
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        match self {
            StateFile::Pure { l_max, amplitudes, leakage } => {
                let amps = amplitudes.iter().map(|&p| unpair(p)).collect();
                Ok(PureState::from_amplitudes(*l_max, amps, leakage.unwrap_or(0.0))?.density_matrix())
            }
            StateFile::Mixed { l_max, entries } => {
                let dim = 2 * l_max + 1;
                if entries.len() != dim * dim {
                    return Err(Error::InvalidArgument(format!(
                        "density matrix for l_max = {l_max} needs {} entries, got {}",
                        dim * dim,
                        entries.len()
                    )));
                }
                let m = DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&p| unpair(p)));
                DensityMatrix::from_entries(*l_max, m)
            }
        }
    }
}

pub fn read_state(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerFile {
    pub l_range: [i64; 2],
    pub grid: usize,
    pub convention: AlphaConvention,
    /// One row per `ℓ`, ascending.
    pub values: Vec<Vec<f64>>,
    /// Sum of the rows beyond `l_range`, per grid angle.
    pub outer: Vec<f64>,
}

impl WignerFile {
    pub fn from_map(map: &WignerMap) -> Self {
        let l = map.l_max() as i64;
        WignerFile {
            l_range: [-l, l],
            grid: map.grid().len(),
            convention: map.convention(),
            values: map.charges().map(|l| map.row(l).to_vec()).collect(),
            outer: map.outer().to_vec(),
        }
    }

    pub fn to_map(&self) -> Result<WignerMap> {
        let [lo, hi] = self.l_range;
        if lo != -hi || hi < 0 || self.values.len() != (2 * hi + 1) as usize {
            return Err(Error::InvalidArgument("Wigner file rows do not match l_range".into()));
        }
        let grid = PeriodicGrid::new(self.grid)?;
        if self.values.iter().any(|r| r.len() != self.grid) {
            return Err(Error::InvalidArgument("Wigner file row length does not match grid".into()));
        }
        WignerMap::from_parts(
            hi as usize,
            grid,
            self.convention,
            self.values.concat(),
            self.outer.clone(),
        )
    }
}

/// Header `l,φ_0,…,φ_{n-1}`, then one row per `ℓ`.
pub fn wigner_csv(map: &WignerMap) -> String {
    let mut out = String::from("l");
    for phi in map.grid().points() {
        out.push(',');
        out.push_str(&fmt17(phi));
    }
    out.push('\n');
    for l in map.charges() {
        out.push_str(&l.to_string());
        for &v in map.row(l) {
            out.push(',');
            out.push_str(&fmt17(v));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginalsFile {
    pub l: Vec<i64>,
    pub oam: Vec<f64>,
    pub phi: Vec<f64>,
    pub angle: Vec<f64>,
}

impl MarginalsFile {
    pub fn new(map: &WignerMap, marginals: &Marginals) -> Self {
        MarginalsFile {
            l: map.charges().collect(),
            oam: marginals.oam.clone(),
            phi: map.grid().points().collect(),
            angle: marginals.angle.clone(),
        }
    }
}

/// Long format: `marginal,coordinate,value`.
pub fn marginals_csv(file: &MarginalsFile) -> String {
    let mut out = String::from("marginal,coordinate,value\n");
    for (l, p) in file.l.iter().zip(&file.oam) {
        out.push_str(&format!("oam,{l},{}\n", fmt17(*p)));
    }
    for (phi, a) in file.phi.iter().zip(&file.angle) {
        out.push_str(&format!("angle,{},{}\n", fmt17(*phi), fmt17(*a)));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProvenanceFile {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub wedge_width: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomogramEntry {
    pub time: f64,
    pub density: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomogramSetFile {
    pub provenance: ProvenanceFile,
    pub l_max: usize,
    pub band: usize,
    pub grid_points: usize,
    pub tomograms: Vec<TomogramEntry>,
}

impl TomogramSetFile {
    pub fn from_set(set: &TomogramSet) -> Self {
        let p = set.provenance;
        TomogramSetFile {
            provenance: ProvenanceFile { seed: p.seed, shots: p.shots, wedge_width: p.wedge_width },
            l_max: set.l_max,
            band: set.band,
            grid_points: set.grid.len(),
            tomograms: set
                .tomograms
                .values()
                .map(|t| TomogramEntry { time: t.time, density: t.density.clone() })
                .collect(),
        }
    }

    pub fn to_set(&self) -> Result<TomogramSet> {
        let grid = PeriodicGrid::new(self.grid_points)?;
        let shots = self.provenance.shots;
        let mut tomograms = BTreeMap::new();
        for entry in &self.tomograms {
            if entry.density.len() != self.grid_points {
                return Err(Error::InvalidArgument(format!(
                    "tomogram at t = {} has {} samples, grid has {}",
                    entry.time,
                    entry.density.len(),
                    self.grid_points
                )));
            }
            let key = TimeKey::recover(entry.time, self.grid_points, self.band).ok_or_else(|| {
                Error::InvalidArgument(format!("time {} is not on the schedule grid", entry.time))
            })?;
            tomograms.insert(key, Tomogram { time: entry.time, grid, density: entry.density.clone(), shots });
        }
        Ok(TomogramSet {
            l_max: self.l_max,
            band: self.band,
            grid,
            provenance: Provenance {
                seed: self.provenance.seed,
                shots,
                wedge_width: self.provenance.wedge_width,
            },
            tomograms,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OamHistogramFile {
    pub probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl OamHistogramFile {
    pub fn from_histogram(h: &OamHistogram) -> Self {
        OamHistogramFile { probabilities: h.probabilities.clone(), shots: h.shots }
    }

    pub fn to_histogram(&self) -> Result<OamHistogram> {
        OamHistogram::from_probabilities(self.probabilities.clone(), self.shots)
    }
}
