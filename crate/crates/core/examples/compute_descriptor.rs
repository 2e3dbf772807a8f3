//! LESI descriptor of one mesh.
//!
//!     cargo run --example compute_descriptor -- path/to/mesh.off
//!
//! Without an argument a noisy icosphere is used.

use std::path::Path;

use lesi::descriptor::{compute_lesi, LesiOptions};
use lesi::mesh::load_mesh;
use lesi::perturb::add_normal_noise;
use lesi::shapes::icosphere;

fn main() -> lesi::Result<()> {
    let mesh = match std::env::args().nth(1) {
        Some(p) => load_mesh(Path::new(&p))?,
        None => add_normal_noise(&icosphere(3, 1.0), 0.01, 42)?,
    };
    println!("{}: {} vertices, {} faces", mesh.name, mesh.vertex_count(), mesh.face_count());

    let raw = compute_lesi(&mesh, &LesiOptions::default())?;
    let kernel = raw.kernel.expect("LESI records its kernel");
    println!("components trimmed: {}, t = {:.6e} ({:?})", raw.c, kernel.resolved_t, kernel.policy);
    println!("LESI_raw (first 8):        {:.6?}", &raw.values[..8]);

    let norm = compute_lesi(&mesh, &LesiOptions { normalize: true, ..Default::default() })?;
    println!("LESI_normalized (first 8): {:.6?}", &norm.values[..8]);

    // One JSON line, as written by `lesi compute`.
    println!("{}", serde_json::to_string(&norm).unwrap());
    Ok(())
}
