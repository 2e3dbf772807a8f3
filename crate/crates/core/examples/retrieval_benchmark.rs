//! Retrieval table (NN, FT, ST, E, DCG) and a 2D PCA map for a labelled set.
//!
//!     cargo run --release --example retrieval_benchmark -- [dataset_dir]
//!
//! With a directory, meshes are labelled by their parent directory name.
//! Without one, a small synthetic set of four shape classes is generated.

use std::path::PathBuf;

use lesi::cli::collect_inputs;
use lesi::descriptor::{compute_lesi, compute_shape_dna, LesiOptions, ShapeDnaNormalization, ShapeDnaOptions};
use lesi::eval::{distance_matrix, pca_2d, retrieval_measures, retrieval_table_csv};
use lesi::mesh::{load_mesh, Mesh};
use lesi::perturb::add_normal_noise;
use lesi::shapes::{icosphere, torus, uv_sphere};
use rayon::prelude::*;

fn synthetic() -> Vec<Mesh> {
    let mut out = Vec::new();
    for k in 0..6 {
        let j = 1.0 + 0.03 * k as f64;
        let shapes = [
            ("sphere", icosphere(2, 1.0).map_vertices(|p| [p[0] * j, p[1], p[2]])),
            ("cigar", uv_sphere(16, 12, 1.0).map_vertices(|p| [0.5 * p[0], 0.5 * p[1], 2.5 * j * p[2]])),
            ("disc", uv_sphere(12, 16, 1.0).map_vertices(|p| [1.5 * j * p[0], 1.5 * p[1], 0.3 * p[2]])),
            ("ring", torus(1.5, 0.35 + 0.02 * k as f64, 24, 10)),
        ];
        for (label, m) in shapes {
            let mut m = add_normal_noise(&m, 0.003, k as u64).unwrap();
            m.name = format!("{label}{k}");
            out.push(m.with_label(label));
        }
    }
    out
}

fn load(dir: PathBuf) -> Vec<Mesh> {
    collect_inputs(&[dir])
        .into_par_iter()
        .filter_map(|input| {
            let label = input.path.parent()?.file_name()?.to_str()?.to_string();
            load_mesh(&input.path).ok().map(|m| m.with_label(label))
        })
        .collect()
}

fn main() -> lesi::Result<()> {
    let meshes = match std::env::args().nth(1) {
        Some(dir) => load(dir.into()),
        None => synthetic(),
    };
    println!("{} meshes", meshes.len());

    let lesi: Vec<_> = meshes
        .par_iter()
        .map(|m| compute_lesi(m, &LesiOptions { normalize: true, ..Default::default() }))
        .collect::<lesi::Result<_>>()?;
    let dna: Vec<_> = meshes
        .par_iter()
        .map(|m| compute_shape_dna(m, &ShapeDnaOptions { normalization: ShapeDnaNormalization::LogRatio, ..Default::default() }))
        .collect::<lesi::Result<_>>()?;

    let rows = vec![
        ("LESI".to_string(), retrieval_measures(&distance_matrix(&lesi)?)?),
        ("ShapeDNA".to_string(), retrieval_measures(&distance_matrix(&dna)?)?),
    ];
    print!("{}", retrieval_table_csv(&rows)?);

    let pca = pca_2d(&lesi)?;
    println!("PCA explained variance: {:.3}", pca.explained_variance_ratio);
    for (d, c) in lesi.iter().zip(&pca.coords).step_by(5) {
        println!("  {:<8} {:<7} ({:+.3}, {:+.3})", d.mesh_name, d.class_label, c[0], c[1]);
    }
    Ok(())
}
