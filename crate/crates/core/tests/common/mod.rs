#![allow(dead_code)]

use lesi::graph::{degree_matrix, laplacian};
use lesi::mesh::Mesh;
use lesi::perturb::add_normal_noise;
use lesi::shapes::{icosphere, torus, uv_sphere};
use lesi::sparse::SparseSymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random spanning tree plus extra edges, weights in `[0.05, 1)`.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut impl Rng) -> SparseSymMatrix {
    let mut triplets = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        triplets.push((j, i, rng.gen_range(0.05..1.0)));
    }
    for _ in 0..extra {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            triplets.push((i.min(j), i.max(j), rng.gen_range(0.05..1.0)));
        }
    }
    SparseSymMatrix::from_triplets(n, &triplets).unwrap()
}

pub fn laplacian_pair(w: &SparseSymMatrix) -> (SparseSymMatrix, SparseSymMatrix) {
    let d = degree_matrix(w);
    let l = laplacian(w, &d).unwrap();
    (l, d)
}

/// Anisotropic scale of a mesh.
pub fn stretch(mesh: &Mesh, s: [f64; 3]) -> Mesh {
    mesh.map_vertices(|p| [p[0] * s[0], p[1] * s[1], p[2] * s[2]])
}

/// Four shape classes, `per_class` members each, varied by stretch and noise.
pub fn synthetic_dataset(per_class: usize, seed: u64) -> Vec<Mesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..per_class {
        let mut jitter = || [rng.gen_range(0.95..1.05), rng.gen_range(0.95..1.05), rng.gen_range(0.95..1.05)];
        let bases: [(&str, Mesh, [f64; 3]); 4] = [
            ("sphere", icosphere(2, 1.0), [1.0, 1.0, 1.0]),
            ("cigar", uv_sphere(16, 12, 1.0), [0.5, 0.5, 2.5]),
            ("disc", uv_sphere(12, 16, 1.0), [1.5, 1.5, 0.3]),
            ("ring", torus(1.5, 0.4, 24, 10), [1.0, 1.0, 1.0]),
        ];
        for (label, base, s) in bases {
            let j = jitter();
            let m = stretch(&base, [s[0] * j[0], s[1] * j[1], s[2] * j[2]]);
            let mut m = add_normal_noise(&m, 0.002, seed ^ (k as u64 * 97 + label.len() as u64)).unwrap();
            m.name = format!("{label}{k}");
            out.push(m.with_label(label));
        }
    }
    out
}

/// Retrieval measures straight from the definitions, with a full sort per query.
pub struct BruteMeasures {
    pub nn: f64,
    pub ft: f64,
    pub st: f64,
    pub e: f64,
    pub dcg: f64,
}

pub fn brute_force_retrieval(dist: &[Vec<f64>], labels: &[usize]) -> Option<BruteMeasures> {
    let n = dist.len();
    let mut sums = [0.0f64; 5];
    let mut count = 0usize;
    for q in 0..n {
        let class_size = labels.iter().filter(|&&l| l == labels[q]).count();
        if class_size < 2 {
            continue;
        }
        let mut others: Vec<usize> = (0..n).filter(|&j| j != q).collect();
        others.sort_by(|&a, &b| dist[q][a].partial_cmp(&dist[q][b]).unwrap().then(a.cmp(&b)));
        let rel: Vec<bool> = others.iter().map(|&j| labels[j] == labels[q]).collect();
        let r = class_size - 1;
        let mut hits_ft = 0usize;
        let mut hits_st = 0usize;
        let mut hits_e = 0usize;
        let cutoff = if n - 1 < 32 { n - 1 } else { 32 };
        for (pos, &b) in rel.iter().enumerate() {
            if b {
                if pos < r {
                    hits_ft += 1;
                }
                if pos < 2 * r {
                    hits_st += 1;
                }
                if pos < cutoff {
                    hits_e += 1;
                }
            }
        }
        let nn = if rel[0] { 1.0 } else { 0.0 };
        let e = if hits_e == 0 {
            0.0
        } else {
            let p = hits_e as f64 / cutoff as f64;
            let rc = hits_e as f64 / r as f64;
            2.0 / (1.0 / p + 1.0 / rc)
        };
        let gain = |rank: usize| if rank == 1 { 1.0 } else { 1.0 / (rank as f64).log2() };
        let mut dcg = 0.0;
        for (pos, &b) in rel.iter().enumerate() {
            if b {
                dcg += gain(pos + 1);
            }
        }
        let mut ideal = 0.0;
        for rank in 1..=r {
            ideal += gain(rank);
        }
        let vals = [nn, hits_ft as f64 / r as f64, hits_st as f64 / r as f64, e, dcg / ideal];
        for (s, v) in sums.iter_mut().zip(vals) {
            *s += v;
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let c = count as f64;
    Some(BruteMeasures {
        nn: sums[0] / c,
        ft: sums[1] / c,
        st: sums[2] / c,
        e: sums[3] / c,
        dcg: sums[4] / c,
    })
}

/// Symmetric matrix of small integers so ties are common.
pub fn random_distances(n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(1..8) as f64 * 0.25;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}
