//! Smallest eigenvalues of the generalized problem `L y = λ D y` with `L`
//! symmetric positive semi-definite and `D` diagonal positive.
//!
//! The problem is reduced to the standard symmetric problem for
//! `S = D^{-1/2} L D^{-1/2}`, which has the same eigenvalues. The spectrum of
//! `S` is bounded above by `σ` (2 for a normalized graph Laplacian, a
//! Gershgorin bound otherwise), so the smallest eigenvalues of `S` are the
//! largest of `σI - S`. Those are found with thick-restart Lanczos using full
//! reorthogonalization and a seeded start vector.
//!
//! A single Krylov sequence carries one direction per eigenspace, so repeated
//! eigenvalues (disjoint copies of a shape, symmetric meshes) can be missed.
//! After the main run, a deflated probe restricted to the orthogonal
//! complement of the accepted vectors looks for anything larger that was
//! skipped and swaps it in.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

/// Upper bound on the spectrum of `D^{-1/2} L D^{-1/2}` used for the flip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralBound {
    /// `L = D - W` with `D` the degree matrix of `W`: spectrum in `[0, 2]`.
    NormalizedLaplacian,
    /// Maximum absolute row sum of `D^{-1/2} L D^{-1/2}`.
    Gershgorin,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Relative residual `|L y - λ D y| / |D y|` every reported pair must meet.
    pub tol: f64,
    pub max_restarts: usize,
    /// Basis size at which the iteration restarts; `None` means `max(4k, 200)`.
    pub basis_size: Option<usize>,
    pub seed: u64,
    pub bound: SpectralBound,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_restarts: 50,
            basis_size: None,
            seed: 0x1e51,
            bound: SpectralBound::Gershgorin,
        }
    }
}

impl EigenOptions {
    pub fn normalized_laplacian() -> Self {
        EigenOptions {
            bound: SpectralBound::NormalizedLaplacian,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: String,
    /// Operator applications.
    pub iterations: usize,
    pub restarts: usize,
    pub tol: f64,
    pub shift: f64,
}

/// Ascending eigenvalues with their generalized residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub meta: SolverMeta,
}

impl Spectrum {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Inverse square root of a positive diagonal.
fn inv_sqrt_diagonal(l: &SparseSymMatrix, d: &SparseSymMatrix) -> Result<Vec<f64>> {
    if l.dim() != d.dim() {
        return Err(Error::DimensionMismatch(format!(
            "L has dimension {}, D has dimension {}",
            l.dim(),
            d.dim()
        )));
    }
    if !d.is_diagonal() {
        return Err(Error::DimensionMismatch("D must be diagonal".into()));
    }
    d.diag()
        .into_iter()
        .enumerate()
        .map(|(row, value)| {
            if value > 0.0 && value.is_finite() {
                Ok(1.0 / value.sqrt())
            } else {
                Err(Error::NonPositiveDiagonal { row, value })
            }
        })
        .collect()
}

/// `σI - D^{-1/2} L D^{-1/2}` applied without allocation.
struct FlippedOperator<'a> {
    l: &'a SparseSymMatrix,
    dinv_sqrt: &'a [f64],
    shift: f64,
    scratch: Vec<f64>,
    out: Vec<f64>,
    applications: usize,
}

impl<'a> FlippedOperator<'a> {
    fn new(l: &'a SparseSymMatrix, dinv_sqrt: &'a [f64], shift: f64) -> Self {
        let n = l.dim();
        FlippedOperator {
            l,
            dinv_sqrt,
            shift,
            scratch: vec![0.0; n],
            out: vec![0.0; n],
            applications: 0,
        }
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        for ((s, &xi), &di) in self.scratch.iter_mut().zip(x).zip(self.dinv_sqrt) {
            *s = xi * di;
        }
        self.l.mul_vec_into(&self.scratch, &mut self.out);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.shift * x[i] - self.dinv_sqrt[i] * self.out[i];
        }
        self.applications += 1;
    }
}

fn gershgorin_bound(l: &SparseSymMatrix, dinv_sqrt: &[f64]) -> f64 {
    (0..l.dim())
        .map(|i| {
            l.row(i)
                .map(|(j, v)| (v * dinv_sqrt[i] * dinv_sqrt[j]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Column-major block of `cols` vectors of length `n`.
struct Basis {
    n: usize,
    data: Vec<f64>,
}

impl Basis {
    fn new(n: usize, cols: usize) -> Self {
        Basis {
            n,
            data: vec![0.0; n * cols],
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    /// Returns (columns `0..j`, column `j` mutably).
    fn split_at(&mut self, j: usize) -> (&[f64], &mut [f64]) {
        let (head, tail) = self.data.split_at_mut(j * self.n);
        (head, &mut tail[..self.n])
    }
}

/// Removes components along the given orthonormal columns, twice (CGS2).
/// Returns the accumulated coefficients.
fn orthogonalize(w: &mut [f64], basis: &[f64], n: usize, coeffs: &mut Vec<f64>) {
    let cols = basis.len() / n;
    coeffs.clear();
    coeffs.resize(cols, 0.0);
    for _ in 0..2 {
        for (c, coef) in coeffs.iter_mut().enumerate() {
            let v = &basis[c * n..(c + 1) * n];
            let h = dot(v, w);
            *coef += h;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
}

/// Random unit vector orthogonal to `locked` and `basis`.
fn random_orthogonal(
    rng: &mut ChaCha8Rng,
    n: usize,
    locked: &[f64],
    basis: &[f64],
    scratch: &mut Vec<f64>,
) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, locked, n, scratch);
        orthogonalize(&mut v, basis, n, scratch);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

struct RitzPairs {
    /// Descending eigenvalues of the flipped operator.
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

struct LanczosRun<'o, 'a> {
    op: &'o mut FlippedOperator<'a>,
    rng: ChaCha8Rng,
    restarts: usize,
}

impl LanczosRun<'_, '_> {
    /// Largest `k` eigenpairs of `P M P`, `P` projecting out `locked`
    /// (orthonormal columns, flattened).
    fn top(
        &mut self,
        k: usize,
        locked: &[f64],
        opts: &EigenOptions,
        accept: &mut dyn FnMut(f64, &[f64]) -> f64,
    ) -> Result<RitzPairs> {
        let n = self.op.l.dim();
        let free = n - locked.len() / n;
        let k = k.min(free);
        if k == 0 {
            return Ok(RitzPairs {
                values: vec![],
                vectors: vec![],
            });
        }
        let m = opts.basis_size.unwrap_or((4 * k).max(200)).max(k + 2).min(free);
        let mut basis = Basis::new(n, m + 1);
        let mut h = DMatrix::<f64>::zeros(m, m);
        let mut coeffs = Vec::new();
        let mut w = vec![0.0; n];

        let v0 = random_orthogonal(&mut self.rng, n, locked, &[], &mut coeffs)
            .ok_or_else(|| Error::InvalidSpectrum("could not build a start vector".into()))?;
        basis.col_mut(0).copy_from_slice(&v0);
        let mut kept = 0usize;
        let mut best: Option<RitzPairs> = None;
        let mut worst = f64::INFINITY;

        for restart in 0..=opts.max_restarts {
            self.restarts = restart;
            let mut last_beta = 0.0;
            for j in kept..m {
                self.op.apply(basis.col(j), &mut w);
                orthogonalize(&mut w, locked, n, &mut coeffs);
                orthogonalize(&mut w, &basis.data[..(j + 1) * n], n, &mut coeffs);
                for (i, &c) in coeffs.iter().enumerate() {
                    h[(i, j)] = c;
                    h[(j, i)] = c;
                }
                let beta = norm(&w);
                let scale = coeffs.iter().fold(self.op.shift, |a, c| a.max(c.abs()));
                if beta <= 1e-13 * scale {
                    // Invariant subspace: continue with a fresh direction, zero coupling.
                    last_beta = 0.0;
                    if j + 1 < free {
                        let (head, _) = basis.split_at(j + 1);
                        let fresh = random_orthogonal(&mut self.rng, n, locked, head, &mut coeffs)
                            .ok_or_else(|| Error::InvalidSpectrum("lost orthogonality".into()))?;
                        basis.col_mut(j + 1).copy_from_slice(&fresh);
                    }
                } else {
                    last_beta = beta;
                    let next = basis.col_mut(j + 1);
                    for (x, wi) in next.iter_mut().zip(&w) {
                        *x = wi / beta;
                    }
                }
            }

            let eig = SymmetricEigen::new(h.clone());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let estimates: Vec<f64> = order[..k]
                .iter()
                .map(|&c| (last_beta * eig.eigenvectors[(m - 1, c)]).abs())
                .collect();
            worst = estimates.iter().copied().fold(0.0, f64::max);

            let ritz_vector = |c: usize| -> Vec<f64> {
                let mut y = vec![0.0; n];
                for r in 0..m {
                    let s = eig.eigenvectors[(r, c)];
                    if s != 0.0 {
                        for (yi, vi) in y.iter_mut().zip(basis.col(r)) {
                            *yi += s * vi;
                        }
                    }
                }
                y
            };

            if worst <= opts.tol {
                let vectors: Vec<Vec<f64>> = order[..k].iter().map(|&c| ritz_vector(c)).collect();
                let values: Vec<f64> = order[..k].iter().map(|&c| eig.eigenvalues[c]).collect();
                let true_worst = values
                    .iter()
                    .zip(&vectors)
                    .map(|(&theta, z)| accept(theta, z))
                    .fold(0.0, f64::max);
                if true_worst <= opts.tol {
                    return Ok(RitzPairs { values, vectors });
                }
                worst = true_worst;
                best = Some(RitzPairs { values, vectors });
            }
            if restart == opts.max_restarts {
                break;
            }

            // Thick restart: keep the leading Ritz vectors and the residual direction.
            let keep = (k + (m - k) / 2).min(m - 1).max(k);
            let kept_vectors: Vec<Vec<f64>> = order[..keep].iter().map(|&c| ritz_vector(c)).collect();
            let residual_dir = basis.col(m).to_vec();
            for (i, v) in kept_vectors.iter().enumerate() {
                basis.col_mut(i).copy_from_slice(v);
            }
            h.fill(0.0);
            for (i, &c) in order[..keep].iter().enumerate() {
                h[(i, i)] = eig.eigenvalues[c];
            }
            if last_beta > 0.0 {
                basis.col_mut(keep).copy_from_slice(&residual_dir);
            } else {
                let (head, _) = basis.split_at(keep);
                let fresh = random_orthogonal(&mut self.rng, n, locked, head, &mut coeffs)
                    .ok_or_else(|| Error::InvalidSpectrum("lost orthogonality".into()))?;
                basis.col_mut(keep).copy_from_slice(&fresh);
            }
            kept = keep;
        }
        let best_values = best
            .map(|b| b.values.iter().map(|t| self.op.shift - t).rev().collect())
            .unwrap_or_default();
        Err(Error::NoConvergence {
            iterations: self.op.applications,
            worst_residual: worst,
            best_values,
        })
    }
}

/// Generalized residual of the eigenpair `(λ, D^{-1/2} z)`.
fn generalized_residual(
    l: &SparseSymMatrix,
    dinv_sqrt: &[f64],
    lambda: f64,
    z: &[f64],
    buf: &mut [f64],
    ly: &mut [f64],
) -> f64 {
    for ((b, &zi), &di) in buf.iter_mut().zip(z).zip(dinv_sqrt) {
        *b = zi * di;
    }
    l.mul_vec_into(buf, ly);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..z.len() {
        // D y = z / dinv_sqrt.
        let dy = z[i] / dinv_sqrt[i];
        let r = ly[i] - lambda * dy;
        num += r * r;
        den += dy * dy;
    }
    (num / den).sqrt()
}

/// The `k` algebraically smallest eigenvalues of `L y = λ D y`.
pub fn smallest_generalized_eigs(
    l: &SparseSymMatrix,
    d: &SparseSymMatrix,
    k: usize,
    opts: &EigenOptions,
) -> Result<Spectrum> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidSpectrum(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let dinv_sqrt = inv_sqrt_diagonal(l, d)?;
    let n = l.dim();
    if k > n {
        return Err(Error::TooManyEigenvalues { requested: k, dim: n });
    }
    let shift = match opts.bound {
        SpectralBound::NormalizedLaplacian => 2.0,
        SpectralBound::Gershgorin => gershgorin_bound(l, &dinv_sqrt).max(f64::MIN_POSITIVE),
        SpectralBound::Value(v) => v,
    };
    let mut op = FlippedOperator::new(l, &dinv_sqrt, shift);
    let meta = |op: &FlippedOperator, restarts| SolverMeta {
        method: "thick-restart Lanczos, full reorthogonalization, flipped normalized operator".into(),
        iterations: op.applications,
        restarts,
        tol: opts.tol,
        shift,
    };
    if k == 0 {
        return Ok(Spectrum {
            values: vec![],
            residuals: vec![],
            meta: meta(&op, 0),
        });
    }

    let mut buf = vec![0.0; n];
    let mut ly = vec![0.0; n];
    let mut accept = |theta: f64, z: &[f64]| {
        generalized_residual(l, &dinv_sqrt, shift - theta, z, &mut buf, &mut ly)
    };

    let mut run = LanczosRun {
        op: &mut op,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        restarts: 0,
    };
    let first = run.top(k, &[], opts, &mut accept)?;
    let mut restarts = run.restarts;
    let mut values = first.values;
    let mut vectors = first.vectors;

    // Swap in eigenvalues hidden behind a repeated eigenspace.
    let gap = 1e-10 * shift.max(1.0);
    for _ in 0..(2 * k + 8) {
        if vectors.len() >= n {
            break;
        }
        let locked: Vec<f64> = orthonormalized(&vectors, n);
        let probe = run.top(1, &locked, opts, &mut accept)?;
        restarts += run.restarts;
        let (min_pos, &min_val) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("k > 0");
        match probe.values.first() {
            Some(&theta) if theta > min_val + gap => {
                values[min_pos] = theta;
                vectors[min_pos] = probe.vectors.into_iter().next().expect("one vector");
            }
            _ => break,
        }
    }

    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(&vectors)
        .map(|(&theta, z)| {
            let lambda = shift - theta;
            (lambda, accept(theta, z))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spectrum = Spectrum {
        values: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.1).collect(),
        meta: meta(&op, restarts),
    };
    let worst = spectrum.max_residual();
    if worst > opts.tol {
        return Err(Error::NoConvergence {
            iterations: spectrum.meta.iterations,
            worst_residual: worst,
            best_values: spectrum.values,
        });
    }
    Ok(spectrum)
}

/// Flattened orthonormal basis for the span of `vectors` (modified Gram-Schmidt).
fn orthonormalized(vectors: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(vectors.len() * n);
    let mut coeffs = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        orthogonalize(&mut w, &out, n, &mut coeffs);
        let nw = norm(&w);
        if nw > 1e-8 {
            out.extend(w.iter().map(|x| x / nw));
        }
    }
    out
}

/// Largest dimension accepted by [`dense_reference_eigs`].
pub const DENSE_DIM_LIMIT: usize = 2000;

/// Full generalized spectrum by dense symmetric eigendecomposition of
/// `D^{-1/2} L D^{-1/2}` (Householder tridiagonalization + implicit QR).
pub fn dense_reference_eigs(l: &SparseSymMatrix, d: &SparseSymMatrix) -> Result<Spectrum> {
    let n = l.dim();
    if n > DENSE_DIM_LIMIT {
        return Err(Error::DenseDimensionGuard {
            dim: n,
            limit: DENSE_DIM_LIMIT,
        });
    }
    let dinv_sqrt = inv_sqrt_diagonal(l, d)?;
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in l.row(i) {
            s[(i, j)] = v * dinv_sqrt[i] * dinv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut buf = vec![0.0; n];
    let mut ly = vec![0.0; n];
    let mut values = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &c in &order {
        let z: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let lambda = eig.eigenvalues[c];
        values.push(lambda);
        residuals.push(generalized_residual(l, &dinv_sqrt, lambda, &z, &mut buf, &mut ly));
    }
    Ok(Spectrum {
        values,
        residuals,
        meta: SolverMeta {
            method: "dense symmetric eigendecomposition".into(),
            iterations: 0,
            restarts: 0,
            tol: 0.0,
            shift: 0.0,
        },
    })
}
