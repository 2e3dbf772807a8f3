//! Cotangent-Laplacian (Shape-DNA) baseline next to LESI.
//!
//! On the unit sphere the Laplace-Beltrami eigenvalues are l(l + 1) with
//! multiplicity 2l + 1, so the first nonzero cluster sits at 2 (three times)
//! and the next at 6 (five times).

use lesi::descriptor::{compute_lesi, compute_shape_dna, LesiOptions, ShapeDnaNormalization, ShapeDnaOptions};
use lesi::shapes::icosphere;

fn main() -> lesi::Result<()> {
    for level in 1..=3 {
        let sphere = icosphere(level, 1.0);
        let dna = compute_shape_dna(&sphere, &ShapeDnaOptions { d: 8, ..Default::default() })?;
        println!("icosphere level {level} ({:>3} vertices): {:.4?}", sphere.vertex_count(), dna.values);
    }

    let sphere = icosphere(3, 1.0);
    let ratio = compute_shape_dna(
        &sphere,
        &ShapeDnaOptions { d: 8, normalization: ShapeDnaNormalization::Ratio, ..Default::default() },
    )?;
    println!("ShapeDNA_ratio:  {:.4?}", ratio.values);
    let lesi = compute_lesi(&sphere, &LesiOptions { d: 8, normalize: true, ..Default::default() })?;
    println!("LESI_normalized: {:.4?}", lesi.values);
    Ok(())
}
