//! Descriptor drift under noise, rescaling and decimation.

use lesi::descriptor::{compute_lesi, LesiOptions};
use lesi::mesh::Mesh;
use lesi::perturb::{PerturbKind, PerturbSpec};
use lesi::shapes::torus;

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn main() -> lesi::Result<()> {
    let mesh: Mesh = torus(2.0, 0.6, 60, 24);
    let opts = LesiOptions { normalize: true, ..Default::default() };
    let base = compute_lesi(&mesh, &opts)?;
    println!("{}: {} vertices", mesh.name, mesh.vertex_count());

    let kinds = [
        PerturbKind::Noise { level: 0.005, seed: 1 },
        PerturbKind::Noise { level: 0.01, seed: 1 },
        PerturbKind::Noise { level: 0.02, seed: 1 },
        PerturbKind::Scale { factor: 0.5 },
        PerturbKind::Scale { factor: 1.625 },
        PerturbKind::Downsample { ratio: 0.5, seed: 1 },
        PerturbKind::Downsample { ratio: 0.2, seed: 1 },
    ];
    // Reference: a torus of different proportions.
    let other = compute_lesi(&torus(2.0, 1.0, 60, 24), &opts)?;
    println!("{:<28} {:>12}", "different torus", format!("{:.4}", distance(&base.values, &other.values)));
    for kind in kinds {
        let spec = PerturbSpec::new(kind)?;
        let m = spec.apply(&mesh)?;
        let d = compute_lesi(&m, &opts)?;
        println!("{:<28} {:>12}", spec.provenance(), format!("{:.4}", distance(&base.values, &d.values)));
    }
    Ok(())
}
