//! Weighted mesh graphs: heat-kernel weights, degree and Laplacian matrices,
//! connected components, and the cotangent stiffness/mass pair used by the
//! Shape-DNA baseline.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{EdgeList, Mesh, Point3};
use crate::sparse::SparseSymMatrix;

/// How the heat-kernel scale `t` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelPolicy {
    /// `t = 2 * d_max^2`, `d_max` the longest edge of the mesh.
    #[default]
    Adaptive,
    /// A user-chosen `t`, in squared model units.
    Fixed(f64),
}

/// A kernel policy together with the `t` it resolved to for one mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelScale {
    pub policy: KernelPolicy,
    pub resolved_t: f64,
}

impl KernelScale {
    pub fn resolve(policy: KernelPolicy, edges: &EdgeList) -> Result<Self> {
        let t = match policy {
            KernelPolicy::Adaptive => 2.0 * edges.max_squared_length(),
            KernelPolicy::Fixed(t) => t,
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidKernelScale(t));
        }
        Ok(KernelScale {
            policy,
            resolved_t: t,
        })
    }

    pub fn fixed(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidKernelScale(t));
        }
        Ok(KernelScale {
            policy: KernelPolicy::Fixed(t),
            resolved_t: t,
        })
    }
}

/// `W_ij = exp(-|x_i - x_j|^2 / t)` on mesh edges, zero elsewhere.
pub fn heat_kernel_weights(edges: &EdgeList, scale: &KernelScale) -> Result<SparseSymMatrix> {
    let t = scale.resolved_t;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidKernelScale(t));
    }
    let triplets: Vec<(usize, usize, f64)> = edges
        .edges
        .iter()
        .zip(&edges.squared_lengths)
        .map(|(&(i, j), &sq)| (i, j, (-sq / t).exp()))
        .collect();
    SparseSymMatrix::from_triplets(edges.vertex_count, &triplets)
}

/// Diagonal matrix of row sums of `w`. Zero-degree rows keep an explicit zero.
pub fn degree_matrix(w: &SparseSymMatrix) -> SparseSymMatrix {
    SparseSymMatrix::diagonal(&w.row_sums())
}

/// `L = D - W`.
pub fn laplacian(w: &SparseSymMatrix, d: &SparseSymMatrix) -> Result<SparseSymMatrix> {
    if w.dim() != d.dim() {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, D is {}x{}",
            w.dim(),
            w.dim(),
            d.dim(),
            d.dim()
        )));
    }
    if !d.is_diagonal() {
        return Err(Error::DimensionMismatch("D must be diagonal".into()));
    }
    let mut triplets = Vec::with_capacity(w.nnz() / 2 + w.dim());
    for (i, dii) in d.diag().into_iter().enumerate() {
        let self_loop = w.get(i, i);
        triplets.push((i, i, dii - self_loop));
        for (j, v) in w.row(i).filter(|&(j, _)| j > i) {
            triplets.push((i, j, -v));
        }
    }
    SparseSymMatrix::from_triplets(w.dim(), &triplets)
}

/// Connected-component labelling of a weighted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub labels: Vec<usize>,
    pub component_count: usize,
    /// Vertices with no incident nonzero off-diagonal weight, ascending.
    pub isolated: Vec<usize>,
}

impl ComponentLabels {
    /// Components left after isolated vertices are dropped.
    pub fn non_isolated_count(&self) -> usize {
        self.component_count - self.isolated.len()
    }
}

/// Breadth-first labelling over the off-diagonal nonzero pattern of `w`.
pub fn connected_components(w: &SparseSymMatrix) -> ComponentLabels {
    let n = w.dim();
    let mut labels = vec![usize::MAX; n];
    let mut isolated = Vec::new();
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        if w.row(start).all(|(j, v)| j == start || v == 0.0) {
            isolated.push(start);
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for (v, wt) in w.row(u) {
                if v != u && wt != 0.0 && labels[v] == usize::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    ComponentLabels {
        labels,
        component_count: count,
        isolated,
    }
}

/// Weight and degree matrices with isolated vertices removed.
#[derive(Debug, Clone)]
pub struct TrimmedGraph {
    pub w: SparseSymMatrix,
    pub d: SparseSymMatrix,
    /// `index_map[k]` is the original index of surviving vertex `k`.
    pub index_map: Vec<usize>,
}

pub fn remove_isolated(
    w: &SparseSymMatrix,
    d: &SparseSymMatrix,
    labels: &ComponentLabels,
) -> Result<TrimmedGraph> {
    if w.dim() != d.dim() || labels.labels.len() != w.dim() {
        return Err(Error::DimensionMismatch("W, D and labels disagree in size".into()));
    }
    if labels.isolated.len() == w.dim() {
        return Err(Error::EmptyGraph);
    }
    if labels.isolated.is_empty() {
        return Ok(TrimmedGraph {
            w: w.clone(),
            d: d.clone(),
            index_map: (0..w.dim()).collect(),
        });
    }
    let mut drop = vec![false; w.dim()];
    for &i in &labels.isolated {
        drop[i] = true;
    }
    let keep: Vec<usize> = (0..w.dim()).filter(|&i| !drop[i]).collect();
    Ok(TrimmedGraph {
        w: w.principal_submatrix(&keep),
        d: d.principal_submatrix(&keep),
        index_map: keep,
    })
}

/// Cotangent values are clamped to this magnitude for degenerate triangles.
pub const COTANGENT_CLAMP: f64 = 1e4;

/// Cotangent stiffness matrix `A` and barycentric lumped mass matrix `B`.
#[derive(Debug, Clone)]
pub struct CotangentMatrices {
    pub stiffness: SparseSymMatrix,
    pub mass: SparseSymMatrix,
    /// Triangles with zero area (their mass contribution is zero).
    pub degenerate_faces: Vec<usize>,
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Cotangent of the angle between `u` and `v`, clamped.
fn cotangent(u: Point3, v: Point3) -> f64 {
    let c = dot(u, v);
    let s = crate::mesh::norm(cross(u, v));
    let cot = if s > 0.0 {
        c / s
    } else if c == 0.0 {
        0.0
    } else {
        c.signum() * COTANGENT_CLAMP
    };
    cot.clamp(-COTANGENT_CLAMP, COTANGENT_CLAMP)
}

/// Edge weights `(cot a + cot b) / 2`, with a single term on boundary edges.
pub fn cotangent_matrices(mesh: &Mesh) -> Result<CotangentMatrices> {
    if let Some((face, f)) = mesh.faces.iter().enumerate().find(|(_, f)| f.len() != 3) {
        return Err(Error::NonTriangularFace {
            face,
            arity: f.len(),
        });
    }
    let n = mesh.vertex_count();
    let mut off: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.faces.len() * 3);
    let mut mass = vec![0.0; n];
    let mut degenerate_faces = Vec::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        let p = [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]];
        for k in 0..3 {
            // Angle at corner k is opposite edge (k+1, k+2).
            let a = f[(k + 1) % 3];
            let b = f[(k + 2) % 3];
            let cot = cotangent(sub(p[(k + 1) % 3], p[k]), sub(p[(k + 2) % 3], p[k]));
            off.push((a.min(b), a.max(b), 0.5 * cot));
        }
        let area = 0.5 * crate::mesh::norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        if area == 0.0 {
            degenerate_faces.push(fi);
        }
        for &v in f {
            mass[v] += area / 3.0;
        }
    }
    // Sum per-edge contributions first so the diagonal uses the merged weights.
    off.sort_by_key(|x| (x.0, x.1));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(off.len());
    for (i, j, w) in off {
        match merged.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += w,
            _ => merged.push((i, j, w)),
        }
    }
    let mut diag = vec![0.0; n];
    let mut triplets = Vec::with_capacity(merged.len() + n);
    for &(i, j, w) in &merged {
        diag[i] += w;
        diag[j] += w;
        triplets.push((i, j, -w));
    }
    triplets.extend(diag.iter().enumerate().map(|(i, &v)| (i, i, v)));
    Ok(CotangentMatrices {
        stiffness: SparseSymMatrix::from_triplets(n, &triplets)?,
        mass: SparseSymMatrix::diagonal(&mass),
        degenerate_faces,
    })
}
