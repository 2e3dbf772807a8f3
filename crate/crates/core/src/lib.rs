//! Scale-invariant spectral shape descriptors for 3D polygon meshes.
//!
//! The LESI descriptor is the slice `(λ_{c+1}, …, λ_{c+d})` of the spectrum
//! of `L y = λ D y`, where `W` holds heat-kernel weights
//! `exp(-|x_i - x_j|^2 / t)` on mesh edges, `D` is its degree matrix,
//! `L = D - W`, and `c` is the number of connected components. With the
//! default adaptive scale `t = 2 d_max^2` the descriptor is exactly invariant
//! to uniform scaling; `log(λ_i / λ_1)` removes any remaining global factor.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`mesh`]: OFF/OBJ/PLY/TOSCA parsing, OFF writing, edges, normals.
//! - [`graph`]: weight, degree and Laplacian matrices; components; the
//!   cotangent stiffness/mass pair.
//! - [`eigen`]: sparse Lanczos solver and a dense reference.
//! - [`descriptor`]: LESI and Shape-DNA descriptors and their file format.
//! - [`perturb`]: noise, scaling and decimation for robustness studies.
//! - [`eval`]: distance matrices, retrieval measures, PCA, k-NN CV.
//! - [`cli`]: the `lesi` command-line tool.
//!
//! See the crate's `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod descriptor;
pub mod eigen;
pub mod error;
pub mod eval;
pub mod graph;
pub mod mesh;
pub mod perturb;
pub mod shapes;
pub mod sparse;

pub use descriptor::{compute_lesi, compute_shape_dna, normalize_spectrum, Descriptor, DescriptorKind, LesiOptions};
pub use error::{Error, Result};
pub use graph::{KernelPolicy, KernelScale};
pub use mesh::Mesh;
