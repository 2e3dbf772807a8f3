//! Robustness variants of a mesh: noise along vertex normals, uniform
//! scaling, and vertex-count reduction by edge collapse.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{bounding_box_diagonal, distance, newell_normal, vertex_normals, Mesh, Point3};

/// Scale factors used for the random-scale dataset variant.
pub const RANDOM_SCALE_FACTORS: [f64; 5] = [0.5, 0.875, 1.25, 1.625, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbKind {
    /// Displacement along the normal, uniform in `(-level * diag, level * diag)`.
    Noise { level: f64, seed: u64 },
    Scale { factor: f64 },
    Downsample { ratio: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbSpec {
    pub kind: PerturbKind,
}

impl PerturbSpec {
    pub fn new(kind: PerturbKind) -> Result<Self> {
        let ok = match kind {
            PerturbKind::Noise { level, .. } => level > 0.0 && level.is_finite(),
            PerturbKind::Scale { factor } => factor > 0.0 && factor.is_finite(),
            PerturbKind::Downsample { ratio, .. } => ratio > 0.0 && ratio < 1.0,
        };
        if !ok {
            return Err(Error::InvalidPerturbation(format!("{kind:?}")));
        }
        Ok(PerturbSpec { kind })
    }

    /// Suffix recorded in the perturbed mesh name.
    pub fn provenance(&self) -> String {
        match self.kind {
            PerturbKind::Noise { level, seed } => format!("noise{level}_s{seed}"),
            PerturbKind::Scale { factor } => format!("scale{factor}"),
            PerturbKind::Downsample { ratio, seed } => format!("collapse{ratio}_s{seed}"),
        }
    }

    pub fn apply(&self, mesh: &Mesh) -> Result<Mesh> {
        let mut out = match self.kind {
            PerturbKind::Noise { level, seed } => add_normal_noise(mesh, level, seed)?,
            PerturbKind::Scale { factor } => scale_mesh(mesh, factor)?,
            PerturbKind::Downsample { ratio, seed } => downsample(mesh, ratio, seed)?,
        };
        out.name = format!("{}__{}", mesh.name, self.provenance());
        Ok(out)
    }
}

/// Moves every vertex along its (original) normal by `u ~ U(-L·diag, L·diag)`.
pub fn add_normal_noise(mesh: &Mesh, level: f64, seed: u64) -> Result<Mesh> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidPerturbation(format!("noise level {level}")));
    }
    if level == 0.0 {
        return Ok(mesh.clone());
    }
    let diag = bounding_box_diagonal(mesh);
    if diag == 0.0 {
        return Err(Error::InvalidPerturbation("mesh bounding box has zero diagonal".into()));
    }
    let amplitude = level * diag;
    let normals = vertex_normals(mesh).normals;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = mesh
        .vertices
        .iter()
        .zip(&normals)
        .map(|(p, n)| {
            let u: f64 = rng.gen_range(-amplitude..amplitude);
            [p[0] + u * n[0], p[1] + u * n[1], p[2] + u * n[2]]
        })
        .collect();
    Ok(Mesh {
        vertices,
        ..mesh.clone()
    })
}

pub fn scale_mesh(mesh: &Mesh, factor: f64) -> Result<Mesh> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidPerturbation(format!("scale factor {factor}")));
    }
    Ok(mesh.map_vertices(|p| [p[0] * factor, p[1] * factor, p[2] * factor]))
}

/// Seeded choice from [`RANDOM_SCALE_FACTORS`], one draw per mesh index.
pub fn random_scale_factors(count: usize, factors: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| *factors.choose(&mut rng).expect("non-empty factor list"))
        .collect()
}

#[derive(Debug, PartialEq)]
struct Candidate {
    length: f64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Min-heap on length, ties by vertex pair.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .length
            .total_cmp(&self.length)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Collapser {
    positions: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_alive: Vec<bool>,
    alive: usize,
}

impl Collapser {
    fn new(mesh: &Mesh) -> Self {
        let faces: Vec<[usize; 3]> = mesh.faces.iter().map(|f| [f[0], f[1], f[2]]).collect();
        let mut vertex_faces = vec![Vec::new(); mesh.vertex_count()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        Collapser {
            positions: mesh.vertices.clone(),
            face_alive: vec![true; faces.len()],
            faces,
            vertex_faces,
            vertex_alive: vec![true; mesh.vertex_count()],
            alive: mesh.vertex_count(),
        }
    }

    fn neighbors(&self, v: usize) -> HashSet<usize> {
        self.vertex_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&u| u != v)
            .collect()
    }

    /// Collapses edge (a, b) into `a` at the midpoint if it keeps the surface
    /// manifold and does not flip any surviving face.
    fn try_collapse(&mut self, a: usize, b: usize) -> bool {
        let shared: Vec<usize> = self.vertex_faces[a]
            .iter()
            .copied()
            .filter(|f| self.faces[*f].contains(&b))
            .collect();
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        // Link condition: common neighbours are exactly the apexes of shared faces.
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common: HashSet<usize> = na.intersection(&nb).copied().collect();
        let apexes: HashSet<usize> = shared
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&v| v != a && v != b)
            .collect();
        if common != apexes {
            return false;
        }
        // A closed component must keep at least a tetrahedron.
        if na.len() <= 3 && nb.len() <= 3 && shared.len() == 2 {
            return false;
        }
        let pa = self.positions[a];
        let pb = self.positions[b];
        let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0];

        let affected: Vec<usize> = self.vertex_faces[a]
            .iter()
            .chain(&self.vertex_faces[b])
            .copied()
            .filter(|f| !shared.contains(f))
            .collect();
        for &f in &affected {
            let before = newell_normal(&self.positions, &self.faces[f]);
            let moved: Vec<Point3> = self.faces[f]
                .iter()
                .map(|&v| if v == a || v == b { mid } else { self.positions[v] })
                .collect();
            let after = newell_normal(&moved, &[0, 1, 2]);
            let dot = before[0] * after[0] + before[1] * after[1] + before[2] * after[2];
            if dot <= 0.0 {
                return false;
            }
        }

        self.positions[a] = mid;
        for &f in &shared {
            self.face_alive[f] = false;
            for &v in &self.faces[f] {
                if v != a && v != b {
                    self.vertex_faces[v].retain(|&g| g != f);
                }
            }
        }
        let moved_faces: Vec<usize> = self.vertex_faces[b]
            .iter()
            .copied()
            .filter(|f| !shared.contains(f))
            .collect();
        for &f in &moved_faces {
            for v in self.faces[f].iter_mut() {
                if *v == b {
                    *v = a;
                }
            }
        }
        self.vertex_faces[a].retain(|f| !shared.contains(f));
        self.vertex_faces[a].extend(moved_faces);
        self.vertex_faces[b].clear();
        self.vertex_alive[b] = false;
        self.alive -= 1;
        true
    }

    fn current_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &alive)| alive)
            .flat_map(|(f, _)| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    fn into_mesh(self, template: &Mesh) -> Mesh {
        let mut remap = vec![usize::MAX; self.positions.len()];
        let mut vertices = Vec::with_capacity(self.alive);
        for (i, &alive) in self.vertex_alive.iter().enumerate() {
            if alive {
                remap[i] = vertices.len();
                vertices.push(self.positions[i]);
            }
        }
        let faces = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &alive)| alive)
            .map(|(f, _)| f.iter().map(|&v| remap[v]).collect())
            .collect();
        Mesh {
            vertices,
            faces,
            name: template.name.clone(),
            class_label: template.class_label.clone(),
        }
    }
}

/// Shortest-edge-first collapse to exactly `ceil(ratio * n)` vertices.
///
/// The seed only perturbs the order of equal-length edges, so results are
/// deterministic in `(mesh, ratio, seed)`.
pub fn downsample(mesh: &Mesh, ratio: f64, seed: u64) -> Result<Mesh> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidPerturbation(format!("downsample ratio {ratio}")));
    }
    if let Some((face, f)) = mesh.faces.iter().enumerate().find(|(_, f)| f.len() != 3) {
        return Err(Error::NonTriangularFace {
            face,
            arity: f.len(),
        });
    }
    let n = mesh.vertex_count();
    let target = (ratio * n as f64).ceil() as usize;
    if target < 4 {
        return Err(Error::InvalidPerturbation(format!(
            "target vertex count {target} is below 4"
        )));
    }
    let mut state = Collapser::new(mesh);
    if target >= n {
        return Ok(state.into_mesh(mesh));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Rejected collapses may become legal after nearby changes; rebuild the
    // queue from the current edges until a full pass makes no progress.
    loop {
        let before = state.alive;
        let mut edges = state.current_edges();
        edges.shuffle(&mut rng);
        let mut heap: BinaryHeap<Candidate> = edges
            .into_iter()
            .map(|(a, b)| Candidate {
                length: distance(state.positions[a], state.positions[b]),
                a,
                b,
            })
            .collect();
        while state.alive > target {
            let Some(Candidate { length, a, b }) = heap.pop() else {
                break;
            };
            if !state.vertex_alive[a] || !state.vertex_alive[b] {
                continue;
            }
            if length != distance(state.positions[a], state.positions[b]) {
                continue;
            }
            if !state.try_collapse(a, b) {
                continue;
            }
            let mut nbrs: Vec<usize> = state.neighbors(a).into_iter().collect();
            nbrs.sort_unstable();
            for v in nbrs {
                heap.push(Candidate {
                    length: distance(state.positions[a], state.positions[v]),
                    a: a.min(v),
                    b: a.max(v),
                });
            }
        }
        if state.alive <= target || state.alive == before {
            break;
        }
    }
    if state.alive != target {
        return Err(Error::DownsampleStalled {
            achieved: state.alive,
            target,
        });
    }
    Ok(state.into_mesh(mesh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{grid_square, icosphere};

    #[test]
    fn zero_noise_is_identity() {
        let m = icosphere(1, 1.0);
        assert_eq!(add_normal_noise(&m, 0.0, 3).unwrap(), m);
    }

    #[test]
    fn noise_on_flat_square_moves_only_z() {
        let m = grid_square(4, 1.0);
        let diag = bounding_box_diagonal(&m);
        let noisy = add_normal_noise(&m, 0.01, 11).unwrap();
        for (p, q) in m.vertices.iter().zip(&noisy.vertices) {
            assert_eq!(p[0], q[0]);
            assert_eq!(p[1], q[1]);
            assert!(q[2].abs() <= 0.01 * diag);
        }
        assert_eq!(noisy.faces, m.faces);
        assert_eq!(add_normal_noise(&m, 0.01, 11).unwrap(), noisy);
    }

    #[test]
    fn scale_examples() {
        let m = icosphere(1, 1.0);
        assert_eq!(scale_mesh(&m, 1.0).unwrap(), m);
        let back = scale_mesh(&scale_mesh(&m, 2.0).unwrap(), 0.5).unwrap();
        for (p, q) in m.vertices.iter().zip(&back.vertices) {
            for c in 0..3 {
                assert!((p[c] - q[c]).abs() <= 1e-15);
            }
        }
        assert!(scale_mesh(&m, 0.0).is_err());
        assert!(scale_mesh(&m, -1.0).is_err());
    }

    #[test]
    fn downsample_identity_and_errors() {
        let m = icosphere(1, 1.0);
        assert_eq!(downsample(&m, 1.0, 0).unwrap().vertices, m.vertices);
        assert!(downsample(&m, 0.05, 0).is_err());
        let quad = Mesh::new("q", vec![[0.0; 3]; 4], vec![vec![0, 1, 2, 3]]).unwrap();
        assert!(downsample(&quad, 0.5, 0).is_err());
    }

    #[test]
    fn spec_validation_and_provenance() {
        assert!(PerturbSpec::new(PerturbKind::Downsample { ratio: 1.0, seed: 0 }).is_err());
        assert!(PerturbSpec::new(PerturbKind::Noise { level: 0.0, seed: 0 }).is_err());
        let s = PerturbSpec::new(PerturbKind::Scale { factor: 0.7 }).unwrap();
        let m = s.apply(&icosphere(0, 1.0)).unwrap();
        assert_eq!(m.name, "icosphere0__scale0.7");
    }

    #[test]
    fn random_scale_choice_is_seeded() {
        let a = random_scale_factors(20, &RANDOM_SCALE_FACTORS, 7);
        assert_eq!(a, random_scale_factors(20, &RANDOM_SCALE_FACTORS, 7));
        assert!(a.iter().all(|f| RANDOM_SCALE_FACTORS.contains(f)));
    }
}
