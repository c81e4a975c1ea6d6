use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BeltramiError, Result};
use crate::r3_fields::{BesselAtom, BesselAtomField, PlaneWaveAtom, PlaneWaveAtomField};
use crate::s3_construct::S3BeltramiField;
use crate::t3_construct::{TorusBeltramiField, TorusMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub k: [i64; 3],
    pub c_re: [f64; 3],
    pub c_im: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveEntry {
    pub xi: [f64; 3],
    pub c_re: [f64; 3],
    pub c_im: [f64; 3],
}

fn split(c: &[Complex64; 3]) -> ([f64; 3], [f64; 3]) {
    (c.map(|z| z.re), c.map(|z| z.im))
}

fn join(re: &[f64; 3], im: &[f64; 3]) -> [Complex64; 3] {
    std::array::from_fn(|i| Complex64::new(re[i], im[i]))
}

/// On-disk field schema, tagged by "type".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FieldDescriptor {
    /// weights[n][i] multiplies the zonal harmonic at centers[n] in frame component i
    #[serde(rename = "s3_beltrami")]
    S3Beltrami {
        #[serde(rename = "Lambda")]
        degree: u32,
        centers: Vec<[f64; 4]>,
        weights: Vec<[f64; 3]>,
    },
    /// Lambda is the eigenvalue √(k·k)
    #[serde(rename = "t3_beltrami")]
    T3Beltrami {
        #[serde(rename = "Lambda")]
        lambda: f64,
        modes: Vec<ModeEntry>,
    },
    #[serde(rename = "bessel_atoms")]
    BesselAtoms {
        #[serde(rename = "R")]
        radius: f64,
        atoms: Vec<BesselAtom>,
    },
    #[serde(rename = "plane_waves")]
    PlaneWaves { atoms: Vec<PlaneWaveEntry> },
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    /// FNV-1a of the canonical config JSON
    pub config_digest: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, threads: usize, config: serde_json::Value) -> Self {
        let digest = fnv1a(config.to_string().as_bytes());
        Provenance {
            tool: "beltrami".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            threads,
            config_digest: format!("{digest:016x}"),
            config,
        }
    }

    /// One line, short enough for a VTK title.
    pub fn summary(&self) -> String {
        format!("{} {} {} seed={} config={}", self.tool, self.version, self.command, self.seed, self.config_digest)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// A descriptor plus optional provenance, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(flatten)]
    pub field: FieldDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Document {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BeltramiError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| BeltramiError::io(path, e))
    }
}

pub enum LoadedField {
    S3(S3BeltramiField),
    T3(TorusBeltramiField),
    Bessel(BesselAtomField),
    PlaneWaves(PlaneWaveAtomField),
}

impl LoadedField {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedField::S3(_) => "s3_beltrami",
            LoadedField::T3(_) => "t3_beltrami",
            LoadedField::Bessel(_) => "bessel_atoms",
            LoadedField::PlaneWaves(_) => "plane_waves",
        }
    }
}

impl From<&S3BeltramiField> for FieldDescriptor {
    fn from(u: &S3BeltramiField) -> Self {
        FieldDescriptor::S3Beltrami { degree: u.degree, centers: u.centers.clone(), weights: u.weights.clone() }
    }
}

impl From<&TorusBeltramiField> for FieldDescriptor {
    fn from(u: &TorusBeltramiField) -> Self {
        let modes = u
            .modes()
            .iter()
            .map(|m| {
                let (c_re, c_im) = split(&m.c);
                ModeEntry { k: m.k, c_re, c_im }
            })
            .collect();
        FieldDescriptor::T3Beltrami { lambda: u.eigenvalue(), modes }
    }
}

impl From<&BesselAtomField> for FieldDescriptor {
    fn from(w: &BesselAtomField) -> Self {
        FieldDescriptor::BesselAtoms { radius: w.radius, atoms: w.atoms.clone() }
    }
}

impl From<&PlaneWaveAtomField> for FieldDescriptor {
    fn from(w: &PlaneWaveAtomField) -> Self {
        let atoms = w
            .atoms
            .iter()
            .map(|a| {
                let (c_re, c_im) = split(&a.c);
                PlaneWaveEntry { xi: a.xi, c_re, c_im }
            })
            .collect();
        FieldDescriptor::PlaneWaves { atoms }
    }
}

impl FieldDescriptor {
    /// Validates and builds the field; torus modes are checked against the eigen and divergence identities.
    pub fn to_field(&self) -> Result<LoadedField> {
        match self {
            FieldDescriptor::S3Beltrami { degree, centers, weights } => {
                Ok(LoadedField::S3(S3BeltramiField::new(*degree, centers.clone(), weights.clone())?))
            }
            FieldDescriptor::T3Beltrami { lambda, modes } => {
                let n = (lambda * lambda).round();
                if !(lambda.is_finite() && *lambda >= 0.0 && (n - lambda * lambda).abs() <= 1e-9 * n.max(1.0)) {
                    return Err(BeltramiError::Domain { what: "Lambda^2 (must be an integer)", value: lambda * lambda });
                }
                let modes = modes.iter().map(|m| TorusMode { k: m.k, c: join(&m.c_re, &m.c_im) }).collect();
                Ok(LoadedField::T3(TorusBeltramiField::from_modes(n as u64, modes)?))
            }
            FieldDescriptor::BesselAtoms { radius, atoms } => {
                if let Some(i) = atoms.iter().position(|a| a.x.iter().map(|v| v * v).sum::<f64>().sqrt() > radius * (1.0 + 1e-12)) {
                    return Err(BeltramiError::Precondition(format!("atom {i} lies outside the radius {radius}")));
                }
                Ok(LoadedField::Bessel(BesselAtomField { radius: *radius, atoms: atoms.clone() }))
            }
            FieldDescriptor::PlaneWaves { atoms } => {
                let atoms = atoms.iter().map(|a| PlaneWaveAtom { xi: a.xi, c: join(&a.c_re, &a.c_im) }).collect();
                Ok(LoadedField::PlaneWaves(PlaneWaveAtomField::new(atoms)?))
            }
        }
    }
}
