//! Sparse Lanczos solver against the dense reference on a random weighted graph.

use std::time::Instant;

use lesi::eigen::{dense_reference_eigs, smallest_generalized_eigs, EigenOptions};
use lesi::graph::{degree_matrix, laplacian};
use lesi::sparse::SparseSymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lesi::Result<()> {
    let n = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut triplets = Vec::new();
    for i in 1..n {
        triplets.push((rng.gen_range(0..i), i, rng.gen_range(0.1..1.0)));
    }
    for _ in 0..2 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            triplets.push((i.min(j), i.max(j), rng.gen_range(0.1..1.0)));
        }
    }
    let w = SparseSymMatrix::from_triplets(n, &triplets)?;
    let d = degree_matrix(&w);
    let l = laplacian(&w, &d)?;
    println!("graph: {n} vertices, {} stored entries in L", l.nnz());

    let t = Instant::now();
    let sparse = smallest_generalized_eigs(&l, &d, 34, &EigenOptions::normalized_laplacian())?;
    let sparse_time = t.elapsed();
    let t = Instant::now();
    let dense = dense_reference_eigs(&l, &d)?;
    let dense_time = t.elapsed();

    let worst = sparse
        .values
        .iter()
        .zip(&dense.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "sparse: {} operator applications, {} restarts, max residual {:.2e}, {:.1?}",
        sparse.meta.iterations,
        sparse.meta.restarts,
        sparse.max_residual(),
        sparse_time
    );
    println!("dense:  {dense_time:.1?}");
    println!("max |λ_sparse - λ_dense| over 34 values: {worst:.2e}");
    println!("smallest five: {:.8?}", &sparse.values[..5]);
    Ok(())
}
