//! Procedural test meshes. All are closed and consistently wound (outward
//! normals) except the flat grid.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::mesh::{Mesh, Point3};

fn normalize(p: Point3, r: f64) -> Point3 {
    let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [r * p[0] / len, r * p[1] / len, r * p[2] / len]
}

/// Subdivided icosahedron: `10 * 4^level + 2` vertices.
pub fn icosphere(level: u32, radius: f64) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| normalize(p, radius))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize(
                    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0],
                    radius,
                ));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Mesh {
        vertices,
        faces: faces.into_iter().map(|f| f.to_vec()).collect(),
        name: format!("icosphere{level}"),
        class_label: None,
    }
}

/// Latitude/longitude sphere: `2 + (stacks - 1) * slices` vertices.
pub fn uv_sphere(stacks: usize, slices: usize, radius: f64) -> Mesh {
    assert!(stacks >= 2 && slices >= 3);
    let mut vertices = vec![[0.0, 0.0, radius]];
    for i in 1..stacks {
        let phi = PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let theta = 2.0 * PI * j as f64 / slices as f64;
            vertices.push([
                radius * phi.sin() * theta.cos(),
                radius * phi.sin() * theta.sin(),
                radius * phi.cos(),
            ]);
        }
    }
    vertices.push([0.0, 0.0, -radius]);
    let south = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * slices + (j % slices);
    let mut faces = Vec::new();
    for j in 0..slices {
        faces.push(vec![0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            faces.push(vec![ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            faces.push(vec![ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    for j in 0..slices {
        faces.push(vec![south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
    }
    Mesh {
        vertices,
        faces,
        name: format!("uvsphere{stacks}x{slices}"),
        class_label: None,
    }
}

/// Torus around the z axis with `major_segments * minor_segments` vertices.
pub fn torus(major: f64, minor: f64, major_segments: usize, minor_segments: usize) -> Mesh {
    assert!(major_segments >= 3 && minor_segments >= 3);
    let mut vertices = Vec::with_capacity(major_segments * minor_segments);
    for i in 0..major_segments {
        let u = 2.0 * PI * i as f64 / major_segments as f64;
        for j in 0..minor_segments {
            let v = 2.0 * PI * j as f64 / minor_segments as f64;
            let r = major + minor * v.cos();
            vertices.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let idx = |i: usize, j: usize| (i % major_segments) * minor_segments + (j % minor_segments);
    let mut faces = Vec::with_capacity(2 * major_segments * minor_segments);
    for i in 0..major_segments {
        for j in 0..minor_segments {
            faces.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh {
        vertices,
        faces,
        name: format!("torus{major_segments}x{minor_segments}"),
        class_label: None,
    }
}

/// Flat `side x side` square in the z = 0 plane, `cells` quads per side,
/// each split into two triangles. Normals point +z.
pub fn grid_square(cells: usize, side: f64) -> Mesh {
    assert!(cells >= 1);
    let n = cells + 1;
    let mut vertices = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            vertices.push([side * x as f64 / cells as f64, side * y as f64 / cells as f64, 0.0]);
        }
    }
    let idx = |x: usize, y: usize| y * n + x;
    let mut faces = Vec::with_capacity(2 * cells * cells);
    for y in 0..cells {
        for x in 0..cells {
            faces.push(vec![idx(x, y), idx(x + 1, y), idx(x + 1, y + 1)]);
            faces.push(vec![idx(x, y), idx(x + 1, y + 1), idx(x, y + 1)]);
        }
    }
    Mesh {
        vertices,
        faces,
        name: format!("square{cells}"),
        class_label: None,
    }
}

/// Rotation about `axis` (need not be unit) by `angle` radians, then translation.
pub fn rigid_motion(mesh: &Mesh, axis: Point3, angle: f64, translation: Point3) -> Mesh {
    let a = normalize(axis, 1.0);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let r = [
        [t * a[0] * a[0] + c, t * a[0] * a[1] - s * a[2], t * a[0] * a[2] + s * a[1]],
        [t * a[0] * a[1] + s * a[2], t * a[1] * a[1] + c, t * a[1] * a[2] - s * a[0]],
        [t * a[0] * a[2] - s * a[1], t * a[1] * a[2] + s * a[0], t * a[2] * a[2] + c],
    ];
    mesh.map_vertices(|p| {
        let mut q = translation;
        for (qi, row) in q.iter_mut().zip(&r) {
            *qi += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
        }
        q
    })
}
