//! End-to-end descriptor computation.
//!
//! LESI: heat-kernel weights on mesh edges, `L = D - W`, component count `c`,
//! isolated-vertex removal, the `c + d` smallest generalized eigenvalues of
//! `L y = λ D y`, and the last `d` of those. The optional normalization is
//! `log(λ_i) - log(λ_1)`, which cancels any global factor on the spectrum.
//!
//! Shape-DNA: the same trimming applied to the cotangent pair `A f = λ B f`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eigen::{smallest_generalized_eigs, EigenOptions, SpectralBound, Spectrum};
use crate::error::{Error, Result};
use crate::graph::{
    connected_components, cotangent_matrices, degree_matrix, heat_kernel_weights, laplacian,
    remove_isolated, KernelPolicy, KernelScale,
};
use crate::mesh::{extract_edges, Mesh};
use crate::sparse::SparseSymMatrix;

pub const DEFAULT_DIMENSION: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DescriptorKind {
    #[serde(rename = "LESI_raw")]
    LesiRaw,
    #[serde(rename = "LESI_normalized")]
    LesiNormalized,
    #[serde(rename = "ShapeDNA_raw")]
    ShapeDnaRaw,
    #[serde(rename = "ShapeDNA_normalized")]
    ShapeDnaNormalized,
    /// Shape-DNA divided by its first element, without the logarithm.
    #[serde(rename = "ShapeDNA_ratio")]
    ShapeDnaRatio,
}

impl DescriptorKind {
    pub fn is_raw(self) -> bool {
        matches!(self, DescriptorKind::LesiRaw | DescriptorKind::ShapeDnaRaw)
    }

    fn normalized(self) -> Self {
        match self {
            DescriptorKind::LesiRaw => DescriptorKind::LesiNormalized,
            DescriptorKind::ShapeDnaRaw => DescriptorKind::ShapeDnaNormalized,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DescriptorKind::LesiRaw => "LESI_raw",
            DescriptorKind::LesiNormalized => "LESI_normalized",
            DescriptorKind::ShapeDnaRaw => "ShapeDNA_raw",
            DescriptorKind::ShapeDnaNormalized => "ShapeDNA_normalized",
            DescriptorKind::ShapeDnaRatio => "ShapeDNA_ratio",
        }
    }
}

/// A spectral shape descriptor plus the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub kind: DescriptorKind,
    pub d: usize,
    /// Number of zero eigenvalues trimmed (connected components after
    /// isolated-vertex removal).
    pub c: usize,
    /// Kernel scale; absent for the cotangent baseline.
    #[serde(default)]
    pub kernel: Option<KernelScale>,
    pub mesh_name: String,
    #[serde(default)]
    pub class_label: String,
    pub values: Vec<f64>,
}

impl Descriptor {
    pub fn check_invariants(&self) -> Result<()> {
        if self.values.len() != self.d {
            return Err(Error::InvalidSpectrum(format!(
                "descriptor declares d = {} but holds {} values",
                self.d,
                self.values.len()
            )));
        }
        let nondecreasing = self.values.windows(2).all(|p| p[0] <= p[1]);
        match self.kind {
            DescriptorKind::LesiRaw | DescriptorKind::ShapeDnaRaw => {
                if self.values.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::InvalidSpectrum("raw spectrum must be strictly positive".into()));
                }
            }
            DescriptorKind::LesiNormalized | DescriptorKind::ShapeDnaNormalized => {
                if self.values.first().is_some_and(|&v| v != 0.0) {
                    return Err(Error::InvalidSpectrum("normalized spectrum must start at 0".into()));
                }
            }
            DescriptorKind::ShapeDnaRatio => {
                if self.values.first().is_some_and(|&v| v != 1.0) {
                    return Err(Error::InvalidSpectrum("ratio spectrum must start at 1".into()));
                }
            }
        }
        if !nondecreasing {
            return Err(Error::InvalidSpectrum("spectrum must be nondecreasing".into()));
        }
        Ok(())
    }
}

/// `values[i] = log(raw[i] / raw[0])`.
///
/// Taking the ratio before the logarithm makes power-of-two rescaling of the
/// input exact and leaves `values[0]` exactly zero.
fn first_positive(raw: &[f64]) -> Result<f64> {
    let first = *raw
        .first()
        .ok_or_else(|| Error::InvalidSpectrum("cannot normalize an empty spectrum".into()))?;
    if let Some(bad) = raw.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidSpectrum(format!(
            "normalization needs strictly positive values, found {bad}"
        )));
    }
    Ok(first)
}

pub fn log_ratio(raw: &[f64]) -> Result<Vec<f64>> {
    let first = first_positive(raw)?;
    Ok(raw.iter().map(|&v| (v / first).ln()).collect())
}

pub fn normalize_spectrum(raw: &Descriptor) -> Result<Descriptor> {
    if !raw.kind.is_raw() {
        return Err(Error::InvalidSpectrum(format!("{} is already normalized", raw.kind.as_str())));
    }
    Ok(Descriptor {
        kind: raw.kind.normalized(),
        values: log_ratio(&raw.values)?,
        ..raw.clone()
    })
}

/// First-element division without the logarithm.
pub fn ratio_spectrum(raw: &Descriptor) -> Result<Descriptor> {
    if raw.kind != DescriptorKind::ShapeDnaRaw {
        return Err(Error::InvalidSpectrum("ratio normalization applies to raw Shape-DNA only".into()));
    }
    let first = first_positive(&raw.values)?;
    Ok(Descriptor {
        kind: DescriptorKind::ShapeDnaRatio,
        values: raw.values.iter().map(|v| v / first).collect(),
        ..raw.clone()
    })
}

/// Weight, degree and Laplacian matrices of a mesh with isolated vertices removed.
#[derive(Debug, Clone)]
pub struct LesiSystem {
    pub kernel: KernelScale,
    pub laplacian: SparseSymMatrix,
    pub degree: SparseSymMatrix,
    /// Components among the non-isolated vertices.
    pub components: usize,
    pub isolated: Vec<usize>,
    pub index_map: Vec<usize>,
}

pub fn build_lesi_system(mesh: &Mesh, policy: KernelPolicy) -> Result<LesiSystem> {
    let edges = extract_edges(mesh);
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let kernel = KernelScale::resolve(policy, &edges)?;
    let w = heat_kernel_weights(&edges, &kernel)?;
    let d = degree_matrix(&w);
    let labels = connected_components(&w);
    let trimmed = remove_isolated(&w, &d, &labels)?;
    let l = laplacian(&trimmed.w, &trimmed.d)?;
    Ok(LesiSystem {
        kernel,
        laplacian: l,
        degree: trimmed.d,
        components: labels.non_isolated_count(),
        isolated: labels.isolated,
        index_map: trimmed.index_map,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LesiOptions {
    pub d: usize,
    pub kernel: KernelPolicy,
    pub normalize: bool,
    pub eigen: EigenOptions,
}

impl Default for LesiOptions {
    fn default() -> Self {
        LesiOptions {
            d: DEFAULT_DIMENSION,
            kernel: KernelPolicy::Adaptive,
            normalize: false,
            eigen: EigenOptions::normalized_laplacian(),
        }
    }
}

/// Drops the `c` smallest eigenvalues and checks the remainder.
fn trim_spectrum(spectrum: &Spectrum, c: usize, d: usize) -> Result<Vec<f64>> {
    let values = spectrum.values[c..c + d].to_vec();
    if values.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::InvalidSpectrum("solver returned an unsorted spectrum".into()));
    }
    if let Some(bad) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidSpectrum(format!(
            "eigenvalue {bad} left after trimming {c} zero eigenvalues"
        )));
    }
    Ok(values)
}

pub fn compute_lesi(mesh: &Mesh, opts: &LesiOptions) -> Result<Descriptor> {
    let system = build_lesi_system(mesh, opts.kernel)?;
    let c = system.components;
    let needed = c + opts.d;
    if needed > system.laplacian.dim() {
        return Err(Error::MeshTooSmall {
            needed,
            available: system.laplacian.dim(),
        });
    }
    let mut eigen = opts.eigen.clone();
    eigen.bound = SpectralBound::NormalizedLaplacian;
    let spectrum = smallest_generalized_eigs(&system.laplacian, &system.degree, needed, &eigen)?;
    let raw = Descriptor {
        kind: DescriptorKind::LesiRaw,
        d: opts.d,
        c,
        kernel: Some(system.kernel),
        mesh_name: mesh.name.clone(),
        class_label: mesh.class_label.clone().unwrap_or_default(),
        values: trim_spectrum(&spectrum, c, opts.d)?,
    };
    raw.check_invariants()?;
    if opts.normalize {
        normalize_spectrum(&raw)
    } else {
        Ok(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeDnaNormalization {
    #[default]
    None,
    /// `log(λ_i / λ_1)`, matching the LESI normalization.
    LogRatio,
    /// `λ_i / λ_1`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDnaOptions {
    pub d: usize,
    pub normalization: ShapeDnaNormalization,
    pub eigen: EigenOptions,
}

impl Default for ShapeDnaOptions {
    fn default() -> Self {
        ShapeDnaOptions {
            d: DEFAULT_DIMENSION,
            normalization: ShapeDnaNormalization::None,
            eigen: EigenOptions::default(),
        }
    }
}

/// Cotangent-Laplacian baseline: `A f = λ B f` with barycentric lumped mass.
pub fn compute_shape_dna(mesh: &Mesh, opts: &ShapeDnaOptions) -> Result<Descriptor> {
    let cot = cotangent_matrices(mesh)?;
    // Components of the edge graph; unreferenced vertices have zero mass and
    // are dropped like isolated vertices in LESI.
    let pattern = SparseSymMatrix::from_triplets(
        mesh.vertex_count(),
        &extract_edges(mesh)
            .edges
            .iter()
            .map(|&(i, j)| (i, j, 1.0))
            .collect::<Vec<_>>(),
    )?;
    let labels = connected_components(&pattern);
    let mut keep_mask = vec![true; mesh.vertex_count()];
    for &i in &labels.isolated {
        keep_mask[i] = false;
    }
    let keep: Vec<usize> = (0..mesh.vertex_count()).filter(|&i| keep_mask[i]).collect();
    if keep.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let a = cot.stiffness.principal_submatrix(&keep);
    let b = cot.mass.principal_submatrix(&keep);
    let c = labels.non_isolated_count();
    let needed = c + opts.d;
    if needed > a.dim() {
        return Err(Error::MeshTooSmall {
            needed,
            available: a.dim(),
        });
    }
    let mut eigen = opts.eigen.clone();
    eigen.bound = SpectralBound::Gershgorin;
    let spectrum = smallest_generalized_eigs(&a, &b, needed, &eigen)?;
    let raw = Descriptor {
        kind: DescriptorKind::ShapeDnaRaw,
        d: opts.d,
        c,
        kernel: None,
        mesh_name: mesh.name.clone(),
        class_label: mesh.class_label.clone().unwrap_or_default(),
        values: trim_spectrum(&spectrum, c, opts.d)?,
    };
    raw.check_invariants()?;
    match opts.normalization {
        ShapeDnaNormalization::None => Ok(raw),
        ShapeDnaNormalization::LogRatio => normalize_spectrum(&raw),
        ShapeDnaNormalization::Ratio => ratio_spectrum(&raw),
    }
}

/// One JSON object per line.
pub fn write_descriptors(path: &Path, descriptors: &[Descriptor]) -> Result<()> {
    let mut out = Vec::new();
    write_descriptors_to(&mut out, descriptors).map_err(|e| Error::io(path, e))?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_descriptors_to(mut w: impl Write, descriptors: &[Descriptor]) -> std::io::Result<()> {
    for d in descriptors {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_descriptors(path: &Path) -> Result<Vec<Descriptor>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_descriptors(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_descriptors(reader: impl BufRead) -> Result<Vec<Descriptor>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<descriptor stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Descriptor = serde_json::from_str(&line).map_err(|e| Error::MalformedDescriptor {
            line: i + 1,
            message: e.to_string(),
        })?;
        if d.values.len() != d.d {
            return Err(Error::MalformedDescriptor {
                line: i + 1,
                message: format!("declared d = {} but found {} values", d.d, d.values.len()),
            });
        }
        out.push(d);
    }
    Ok(out)
}
