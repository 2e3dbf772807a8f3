//! Comparing descriptor collections.
//!
//! Retrieval measures follow the Princeton Shape Benchmark definitions. For a
//! query `q` in a class of size `C` (counting `q`), the other items are ranked
//! by distance, ties broken by ascending index, and:
//!
//! * NN: the top-ranked item shares `q`'s class.
//! * FT / ST: recall among the top `C - 1` / `2(C - 1)` items.
//! * E: `2PR / (P + R)` with precision and recall over the top 32 items
//!   (or all `n - 1` when fewer).
//! * DCG: gain 1 for each relevant item, unweighted at rank 1 and weighted by
//!   `1 / log2(rank)` afterwards, divided by the ideal ordering's value.
//!
//! Classification uses stratified k-fold cross-validation with a k-nearest-
//! neighbour majority vote standing in for a linear SVM.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};

pub const E_MEASURE_CUTOFF: usize = 32;

/// Dense symmetric pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    dim: usize,
    data: Vec<f64>,
    pub labels: Vec<String>,
    pub names: Vec<String>,
}

impl DistanceMatrix {
    /// Builds from a full row-major matrix; checks symmetry, zero diagonal and
    /// nonnegativity.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let dim = rows.len();
        if labels.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("distance matrix must be square with one label per row".into()));
        }
        for i in 0..dim {
            if rows[i][i] != 0.0 {
                return Err(Error::Evaluation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..dim {
                if rows[i][j] != rows[j][i] || !(rows[i][j] >= 0.0) {
                    return Err(Error::Evaluation(format!("entry ({i}, {j}) breaks symmetry or sign")));
                }
            }
        }
        Ok(DistanceMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
            names: (0..dim).map(|i| i.to_string()).collect(),
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DistanceMatrix {
        DistanceMatrix {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Other items ordered by distance from `q`, ties by index.
    pub fn ranking(&self, q: usize) -> Vec<usize> {
        let row = self.row(q);
        let mut order: Vec<usize> = (0..self.dim).filter(|&j| j != q).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        order
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["name".to_string(), "class".to_string()];
        header.extend(self.names.iter().cloned());
        write_record(&mut w, &header)?;
        for i in 0..self.dim {
            let mut rec = vec![self.names[i].clone(), self.labels[i].clone()];
            rec.extend(self.row(i).iter().map(|v| fmt17(*v)));
            write_record(&mut w, &rec)?;
        }
        finish_csv(w)
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_record(w: &mut csv::Writer<Vec<u8>>, rec: &[String]) -> Result<()> {
    w.write_record(rec)
        .map_err(|e| Error::Evaluation(format!("csv: {e}")))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Evaluation(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Evaluation(e.to_string()))
}

fn check_compatible(descriptors: &[Descriptor]) -> Result<()> {
    if let Some(first) = descriptors.first() {
        for d in descriptors {
            if d.kind != first.kind || d.values.len() != first.values.len() {
                return Err(Error::IncompatibleDescriptors(format!(
                    "{} ({}, d = {}) vs {} ({}, d = {})",
                    first.mesh_name,
                    first.kind.as_str(),
                    first.values.len(),
                    d.mesh_name,
                    d.kind.as_str(),
                    d.values.len()
                )));
            }
        }
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn distance_matrix(descriptors: &[Descriptor]) -> Result<DistanceMatrix> {
    check_compatible(descriptors)?;
    let n = descriptors.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&descriptors[i].values, &descriptors[j].values);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        dim: n,
        data,
        labels: descriptors.iter().map(|d| d.class_label.clone()).collect(),
        names: descriptors.iter().map(|d| d.mesh_name.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query: usize,
    pub ranking: Vec<usize>,
    pub nn: f64,
    pub ft: f64,
    pub st: f64,
    pub e_measure: f64,
    pub dcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub nn: f64,
    pub ft: f64,
    pub st: f64,
    pub e_measure: f64,
    pub dcg: f64,
    /// Queries whose class has a single member; excluded from the means.
    pub skipped_queries: Vec<usize>,
    pub per_query: Vec<QueryResult>,
}

impl RetrievalReport {
    /// One row of the `Method,NN,FT,ST,E,DCG` table.
    pub fn table_row(&self, method: &str) -> Vec<String> {
        vec![
            method.to_string(),
            fmt17(self.nn),
            fmt17(self.ft),
            fmt17(self.st),
            fmt17(self.e_measure),
            fmt17(self.dcg),
        ]
    }
}

pub fn retrieval_table_csv(rows: &[(String, RetrievalReport)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_record(
        &mut w,
        &["Method", "NN", "FT", "ST", "E", "DCG"].map(String::from),
    )?;
    for (method, report) in rows {
        write_record(&mut w, &report.table_row(method))?;
    }
    finish_csv(w)
}

fn query_measures(dm: &DistanceMatrix, q: usize, class_size: usize) -> QueryResult {
    let ranking = dm.ranking(q);
    let relevant: Vec<bool> = ranking.iter().map(|&j| dm.labels[j] == dm.labels[q]).collect();
    let r = (class_size - 1) as f64;
    let hits = |k: usize| relevant.iter().take(k).filter(|&&b| b).count() as f64;

    let nn = if relevant[0] { 1.0 } else { 0.0 };
    let ft = hits(class_size - 1) / r;
    let st = hits(2 * (class_size - 1)) / r;
    let cutoff = E_MEASURE_CUTOFF.min(ranking.len());
    let found = hits(cutoff);
    let e_measure = if found == 0.0 {
        0.0
    } else {
        let p = found / cutoff as f64;
        let rec = found / r;
        2.0 / (1.0 / p + 1.0 / rec)
    };
    let mut dcg = 0.0;
    for (pos, &rel) in relevant.iter().enumerate() {
        if rel {
            dcg += discount(pos + 1);
        }
    }
    let ideal: f64 = (1..class_size).map(discount).sum();
    QueryResult {
        query: q,
        ranking,
        nn,
        ft,
        st,
        e_measure,
        dcg: dcg / ideal,
    }
}

fn discount(rank: usize) -> f64 {
    if rank == 1 {
        1.0
    } else {
        1.0 / (rank as f64).log2()
    }
}

pub fn retrieval_measures(dm: &DistanceMatrix) -> Result<RetrievalReport> {
    let mut class_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &dm.labels {
        *class_sizes.entry(l.as_str()).or_default() += 1;
    }
    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for q in 0..dm.dim() {
        let size = class_sizes[dm.labels[q].as_str()];
        if size < 2 {
            skipped.push(q);
            continue;
        }
        per_query.push(query_measures(dm, q, size));
    }
    if !skipped.is_empty() {
        warn!("{} queries belong to singleton classes and were skipped", skipped.len());
    }
    if per_query.is_empty() {
        return Err(Error::Evaluation("no class has two or more members".into()));
    }
    let count = per_query.len() as f64;
    let mean = |f: fn(&QueryResult) -> f64| per_query.iter().map(f).sum::<f64>() / count;
    Ok(RetrievalReport {
        nn: mean(|q| q.nn),
        ft: mean(|q| q.ft),
        st: mean(|q| q.st),
        e_measure: mean(|q| q.e_measure),
        dcg: mean(|q| q.dcg),
        skipped_queries: skipped,
        per_query,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub coords: Vec<[f64; 2]>,
    /// Principal directions, unit length, first nonzero component positive.
    pub components: [Vec<f64>; 2],
    /// `(σ1² + σ2²) / Σσi²`.
    pub explained_variance_ratio: f64,
    pub rank_deficient: bool,
}

impl PcaProjection {
    pub fn to_csv(&self, descriptors: &[Descriptor]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        write_record(&mut w, &["name", "class", "x", "y"].map(String::from))?;
        for (d, c) in descriptors.iter().zip(&self.coords) {
            write_record(
                &mut w,
                &[d.mesh_name.clone(), d.class_label.clone(), fmt17(c[0]), fmt17(c[1])],
            )?;
        }
        finish_csv(w)
    }
}

pub fn pca_2d(descriptors: &[Descriptor]) -> Result<PcaProjection> {
    check_compatible(descriptors)?;
    let rows: Vec<Vec<f64>> = descriptors.iter().map(|d| d.values.clone()).collect();
    pca_2d_rows(&rows)
}

pub fn pca_2d_rows(rows: &[Vec<f64>]) -> Result<PcaProjection> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::Evaluation(format!("PCA needs at least 3 items, got {n}")));
    }
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let top = |k: usize| order.get(k).map(|&c| eig.eigenvalues[c].max(0.0)).unwrap_or(0.0);
    let tiny = 1e-12 * total.max(f64::MIN_POSITIVE);

    let direction = |k: usize| -> Vec<f64> {
        let Some(&c) = order.get(k) else {
            return vec![0.0; dim];
        };
        if top(k) <= tiny {
            return vec![0.0; dim];
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    };
    let components = [direction(0), direction(1)];
    let rank_deficient = top(1) <= tiny;
    if rank_deficient {
        warn!("descriptor data has rank < 2; second PCA coordinate is zero");
    }
    let coords = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let p = |c: &Vec<f64>| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            [p(&components[0]), p(&components[1])]
        })
        .collect();
    Ok(PcaProjection {
        coords,
        components,
        explained_variance_ratio: if total > 0.0 { (top(0) + top(1)) / total } else { 0.0 },
        rank_deficient,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classifier: String,
    pub k: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`, summed over repeats.
    pub confusion: Vec<Vec<usize>>,
    pub excluded_classes: Vec<String>,
}

impl ClassificationReport {
    pub fn confusion_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.classes.iter().cloned());
        write_record(&mut w, &header)?;
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let mut rec = vec![c.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            write_record(&mut w, &rec)?;
        }
        finish_csv(w)
    }
}

/// Majority vote of the `k` nearest training items; ties go to the tied
/// class whose closest member is nearest.
fn knn_predict(train: &[(&[f64], usize)], query: &[f64], k: usize) -> usize {
    let mut by_dist: Vec<(f64, usize, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (x, label))| (euclidean(x, query), i, *label))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbours = &by_dist[..k.min(by_dist.len())];
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, _, label) in neighbours {
        *votes.entry(label).or_default() += 1;
    }
    let best = *votes.values().max().expect("at least one neighbour");
    // Neighbours are sorted, so the first one from a tied class is its nearest.
    neighbours
        .iter()
        .find(|(_, _, label)| votes[label] == best)
        .map(|&(_, _, label)| label)
        .expect("a tied class has a neighbour")
}

pub const CLASSIFIER_NAME: &str = "k-nearest-neighbour majority vote (Euclidean), substituting for a linear multi-class SVM";

pub fn knn_classify_cv(
    descriptors: &[Descriptor],
    k: usize,
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<ClassificationReport> {
    check_compatible(descriptors)?;
    if k == 0 || folds < 2 || repeats == 0 {
        return Err(Error::Evaluation("need k >= 1, folds >= 2, repeats >= 1".into()));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in descriptors.iter().enumerate() {
        by_class.entry(d.class_label.as_str()).or_default().push(i);
    }
    let mut excluded = Vec::new();
    by_class.retain(|label, members| {
        let ok = members.len() >= folds;
        if !ok {
            warn!("class {label:?} has {} members (< {folds} folds); excluded", members.len());
            excluded.push(label.to_string());
        }
        ok
    });
    if by_class.len() < 2 {
        return Err(Error::Evaluation("classification needs at least two classes".into()));
    }
    let classes: Vec<String> = by_class.keys().map(|s| s.to_string()).collect();
    let class_index: BTreeMap<&str, usize> = by_class.keys().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    let mut fold_accuracies = Vec::with_capacity(folds * repeats);
    for _ in 0..repeats {
        // Stratified assignment: shuffle each class, deal members round-robin.
        let mut fold_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut offset = 0;
        for members in by_class.values() {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            for (pos, &item) in shuffled.iter().enumerate() {
                fold_of.insert(item, (pos + offset) % folds);
            }
            offset += members.len();
        }
        for fold in 0..folds {
            let train: Vec<(&[f64], usize)> = fold_of
                .iter()
                .filter(|(_, &f)| f != fold)
                .map(|(&i, _)| {
                    let d = &descriptors[i];
                    (d.values.as_slice(), class_index[d.class_label.as_str()])
                })
                .collect();
            let mut correct = 0;
            let mut total = 0;
            for (&i, _) in fold_of.iter().filter(|(_, &f)| f == fold) {
                let d = &descriptors[i];
                let truth = class_index[d.class_label.as_str()];
                let predicted = knn_predict(&train, &d.values, k);
                confusion[truth][predicted] += 1;
                correct += usize::from(predicted == truth);
                total += 1;
            }
            fold_accuracies.push(correct as f64 / total as f64);
        }
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(ClassificationReport {
        classifier: CLASSIFIER_NAME.to_string(),
        k,
        folds,
        repeats,
        seed,
        mean_accuracy,
        fold_accuracies,
        classes,
        confusion,
        excluded_classes: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::DescriptorKind;

    fn desc(label: &str, values: Vec<f64>) -> Descriptor {
        Descriptor {
            kind: DescriptorKind::LesiNormalized,
            d: values.len(),
            c: 1,
            kernel: None,
            mesh_name: format!("{label}{}", values[0]),
            class_label: label.into(),
            values,
        }
    }

    fn labelled(rows: Vec<Vec<f64>>, labels: &[&str]) -> DistanceMatrix {
        DistanceMatrix::from_rows(rows, labels.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let same = vec![desc("a", vec![1.0, 2.0]); 3];
        let dm = distance_matrix(&same).unwrap();
        assert!((0..3).all(|i| dm.row(i).iter().all(|&v| v == 0.0)));

        let dm = distance_matrix(&[desc("a", vec![0.0, 0.0]), desc("b", vec![3.0, 4.0])]).unwrap();
        assert_eq!(dm.get(0, 1), 5.0);

        let mut other = desc("a", vec![1.0, 2.0]);
        other.kind = DescriptorKind::LesiRaw;
        assert!(distance_matrix(&[desc("a", vec![1.0, 2.0]), other]).is_err());
        assert!(distance_matrix(&[desc("a", vec![1.0, 2.0]), desc("a", vec![1.0])]).is_err());
    }

    #[test]
    fn distance_permutation_consistency() {
        let ds = vec![desc("a", vec![0.0, 1.0]), desc("b", vec![2.0, 5.0]), desc("a", vec![-1.0, 0.5])];
        let dm = distance_matrix(&ds).unwrap();
        let perm = [2, 0, 1];
        let permuted: Vec<Descriptor> = perm.iter().map(|&i| ds[i].clone()).collect();
        let pm = distance_matrix(&permuted).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(pm.get(i, j), dm.get(perm[i], perm[j]));
            }
        }
    }

    #[test]
    fn perfect_separation_scores_one() {
        let ds: Vec<Descriptor> = (0..4)
            .flat_map(|c| (0..3).map(move |k| desc(&format!("c{c}"), vec![100.0 * c as f64 + k as f64])))
            .collect();
        let r = retrieval_measures(&distance_matrix(&ds).unwrap()).unwrap();
        assert_eq!((r.nn, r.ft, r.st, r.dcg), (1.0, 1.0, 1.0, 1.0));
        assert!(r.e_measure > 0.0 && r.e_measure <= 1.0);
    }

    #[test]
    fn adversarial_nearest_neighbour() {
        // Each item's nearest neighbour is from the other class.
        let dm = labelled(
            vec![
                vec![0.0, 5.0, 1.0, 2.0],
                vec![5.0, 0.0, 2.0, 1.0],
                vec![1.0, 2.0, 0.0, 5.0],
                vec![2.0, 1.0, 5.0, 0.0],
            ],
            &["a", "a", "b", "b"],
        );
        let r = retrieval_measures(&dm).unwrap();
        assert_eq!(r.nn, 0.0);
        assert_eq!(r.ft, 0.0);
        assert!(r.ft <= r.st);
    }

    #[test]
    fn singleton_classes_are_skipped() {
        let dm = labelled(
            vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 3.0], vec![3.0, 3.0, 0.0]],
            &["a", "a", "z"],
        );
        let r = retrieval_measures(&dm).unwrap();
        assert_eq!(r.skipped_queries, vec![2]);
        assert_eq!(r.nn, 1.0);
        let lonely = labelled(vec![vec![0.0, 1.0], vec![1.0, 0.0]], &["a", "b"]);
        assert!(retrieval_measures(&lonely).is_err());
    }

    #[test]
    fn pca_collinear_and_planar() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64, -(i as f64)]).collect();
        let p = pca_2d_rows(&rows).unwrap();
        assert!(p.rank_deficient);
        assert!(p.coords.iter().all(|c| c[1] == 0.0));

        let planar = vec![vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.0, -0.5], vec![0.3, 0.2], vec![-0.3, -0.2]];
        let p = pca_2d_rows(&planar).unwrap();
        assert!((p.explained_variance_ratio - 1.0).abs() < 1e-12);
        for i in 0..5 {
            for j in 0..5 {
                let orig = ((planar[i][0] - planar[j][0]).powi(2) + (planar[i][1] - planar[j][1]).powi(2)).sqrt();
                let proj = ((p.coords[i][0] - p.coords[j][0]).powi(2) + (p.coords[i][1] - p.coords[j][1]).powi(2)).sqrt();
                assert!((orig - proj).abs() < 1e-9);
            }
        }
        assert!(pca_2d_rows(&planar[..2]).is_err());
    }

    #[test]
    fn pca_variance_ratio() {
        let rows = vec![
            vec![3.0, 0.0, 0.0],
            vec![-3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, -2.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
        ];
        let p = pca_2d_rows(&rows).unwrap();
        assert!((p.explained_variance_ratio - 13.0 / 14.0).abs() < 1e-12);
        assert!(p.components.iter().all(|c| c.iter().find(|x| x.abs() > 1e-12).unwrap() > &0.0));
    }

    #[test]
    fn knn_duplicates_and_clusters() {
        // Every member of a class shares one descriptor.
        let dup: Vec<Descriptor> = (0..3)
            .flat_map(|c| (0..10).map(move |_| desc(&format!("c{c}"), vec![c as f64, 1.0])))
            .collect();
        let r = knn_classify_cv(&dup, 1, 10, 3, 5).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.fold_accuracies.len(), 30);
        let trace: usize = (0..3).map(|i| r.confusion[i][i]).sum();
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!(trace, total);
        assert_eq!(total, 90);

        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let clusters: Vec<Descriptor> = (0..2)
            .flat_map(|c| {
                (0..20)
                    .map(|_| {
                        let centre = 10.0 * c as f64;
                        desc(&format!("g{c}"), vec![centre + rng.gen_range(-1.0..1.0), centre + rng.gen_range(-1.0..1.0)])
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let a = knn_classify_cv(&clusters, 3, 10, 3, 9).unwrap();
        assert_eq!(a.mean_accuracy, 1.0);
        assert_eq!(a, knn_classify_cv(&clusters, 3, 10, 3, 9).unwrap());
        assert!(a.classifier.contains("SVM"));
    }

    #[test]
    fn knn_errors_and_exclusions() {
        let one: Vec<Descriptor> = (0..12).map(|i| desc("only", vec![i as f64])).collect();
        assert!(knn_classify_cv(&one, 3, 10, 1, 0).is_err());
        let mut some = one.clone();
        some.extend((0..3).map(|i| desc("tiny", vec![100.0 + i as f64])));
        some.extend((0..12).map(|i| desc("other", vec![50.0 + i as f64])));
        let r = knn_classify_cv(&some, 1, 10, 1, 0).unwrap();
        assert_eq!(r.excluded_classes, vec!["tiny".to_string()]);
    }

    #[test]
    fn knn_tie_goes_to_nearest() {
        let train: Vec<(&[f64], usize)> = vec![(&[1.0][..], 0), (&[-1.5][..], 1)];
        assert_eq!(knn_predict(&train, &[0.0], 2), 0);
        let train: Vec<(&[f64], usize)> = vec![(&[2.0][..], 0), (&[-1.5][..], 1)];
        assert_eq!(knn_predict(&train, &[0.0], 2), 1);
    }
}
