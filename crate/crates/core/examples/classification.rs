//! Stratified k-fold cross-validated k-NN classification on LESI descriptors.

use lesi::descriptor::{compute_lesi, LesiOptions};
use lesi::eval::knn_classify_cv;
use lesi::mesh::Mesh;
use lesi::perturb::{add_normal_noise, scale_mesh};
use lesi::shapes::{icosphere, torus, uv_sphere};

fn main() -> lesi::Result<()> {
    // Three classes, ten members each, at varying scale and noise.
    let mut meshes: Vec<Mesh> = Vec::new();
    for k in 0..10 {
        let s = 0.5 + 0.15 * k as f64;
        let bases = [
            ("blob", icosphere(2, 1.0)),
            ("spindle", uv_sphere(14, 10, 1.0).map_vertices(|p| [0.4 * p[0], 0.4 * p[1], 2.0 * p[2]])),
            ("donut", torus(1.4, 0.5 + 0.01 * k as f64, 20, 9)),
        ];
        for (label, m) in bases {
            let m = add_normal_noise(&scale_mesh(&m, s)?, 0.005, k)?;
            meshes.push(m.with_label(label));
        }
    }
    let opts = LesiOptions { normalize: true, ..Default::default() };
    let descriptors = meshes.iter().map(|m| compute_lesi(m, &opts)).collect::<lesi::Result<Vec<_>>>()?;

    let report = knn_classify_cv(&descriptors, 5, 10, 3, 42)?;
    println!("{}", report.classifier);
    println!("mean accuracy over {} folds x {} repeats: {:.4}", report.folds, report.repeats, report.mean_accuracy);
    print!("{}", report.confusion_csv()?);
    Ok(())
}
