//! Reading OFF, OBJ and PLY text, edges, normals and OFF output.

use lesi::mesh::{extract_edges, parse_obj_str, parse_off_str, parse_ply_str, to_off_string, vertex_normals};

const OFF: &str = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
const OBJ: &str = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
const PLY: &str = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

fn main() -> lesi::Result<()> {
    let tet = parse_off_str(OFF, "tetrahedron")?;
    let quad = parse_obj_str(OBJ, "quad")?;
    let tri = parse_ply_str(PLY, "triangle")?;
    for m in [&tet, &quad, &tri] {
        let e = extract_edges(m);
        println!(
            "{:<12} {} vertices, {} faces, {} edges, longest {:.4}",
            m.name,
            m.vertex_count(),
            m.face_count(),
            e.len(),
            e.max_length()
        );
    }
    let n = vertex_normals(&tet);
    println!("tetrahedron normal at the origin: {:.4?}", n.normals[0]);
    print!("{}", to_off_string(&tet));
    Ok(())
}
