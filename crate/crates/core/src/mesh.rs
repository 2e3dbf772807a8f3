//! Polygon meshes: in-memory representation, file I/O and the per-mesh
//! geometric auxiliaries (edges, normals, bounding box) used downstream.
//!
//! Supported inputs are ASCII OFF (including `COFF`), OBJ (`v`/`f` records
//! only), ASCII PLY 1.0 and the TOSCA `.vert`/`.tri` text pair. Output is OFF.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// A polygon mesh. Faces are vertex-index polygons of arbitrary arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
    pub name: String,
    pub class_label: Option<String>,
}

impl Mesh {
    /// Builds a mesh after checking index range, repeated indices and
    /// the non-empty vertex set.
    pub fn new(name: impl Into<String>, vertices: Vec<Point3>, faces: Vec<Vec<usize>>) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            faces,
            name: name.into(),
            class_label: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.class_label = Some(label.into());
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_triangulated(&self) -> bool {
        self.faces.iter().all(|f| f.len() == 3)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices".into()));
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite coordinate")));
        }
        let n = self.vertices.len();
        for (fi, face) in self.faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::InvalidMesh(format!("face {fi} has fewer than 3 vertices")));
            }
            if let Some(&bad) = face.iter().find(|&&v| v >= n) {
                return Err(Error::FaceIndexOutOfRange {
                    line: 0,
                    index: bad,
                    vertex_count: n,
                });
            }
            if has_repeat(face) {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex index")));
            }
        }
        Ok(())
    }

    /// Applies `f` to every vertex position, keeping faces and metadata.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
            name: self.name.clone(),
            class_label: self.class_label.clone(),
        }
    }

    /// Disjoint union; the second mesh's indices are shifted.
    pub fn disjoint_union(&self, other: &Mesh) -> Mesh {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(
            other
                .faces
                .iter()
                .map(|f| f.iter().map(|&v| v + offset).collect()),
        );
        Mesh {
            vertices,
            faces,
            name: format!("{}+{}", self.name, other.name),
            class_label: self.class_label.clone(),
        }
    }
}

fn has_repeat(face: &[usize]) -> bool {
    face.iter()
        .enumerate()
        .any(|(i, v)| face[i + 1..].contains(v))
}

/// Unique undirected edges with their Euclidean lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    /// Pairs `(i, j)` with `i < j`, sorted lexicographically.
    pub edges: Vec<(usize, usize)>,
    pub lengths: Vec<f64>,
    pub squared_lengths: Vec<f64>,
    /// Indices into `edges` whose endpoints coincide exactly.
    pub coincident: Vec<usize>,
    pub vertex_count: usize,
}

impl EdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_squared_length(&self) -> f64 {
        self.squared_lengths.iter().copied().fold(0.0, f64::max)
    }
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn squared_distance(a: Point3, b: Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Union of all face boundary edges. Polygons contribute their perimeter
/// only, so a quad yields four edges and no diagonal.
pub fn extract_edges(mesh: &Mesh) -> EdgeList {
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(mesh.faces.iter().map(Vec::len).sum());
    for face in &mesh.faces {
        for (k, &a) in face.iter().enumerate() {
            let b = face[(k + 1) % face.len()];
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let squared_lengths: Vec<f64> = edges
        .iter()
        .map(|&(i, j)| squared_distance(mesh.vertices[i], mesh.vertices[j]))
        .collect();
    let lengths: Vec<f64> = squared_lengths.iter().map(|s| s.sqrt()).collect();
    let coincident = lengths
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 0.0)
        .map(|(k, _)| k)
        .collect();
    EdgeList {
        edges,
        lengths,
        squared_lengths,
        coincident,
        vertex_count: mesh.vertex_count(),
    }
}

/// Per-vertex unit normals plus the vertices that received the fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexNormals {
    pub normals: Vec<Point3>,
    pub fallback: Vec<usize>,
}

pub const FALLBACK_NORMAL: Point3 = [0.0, 0.0, 1.0];

/// Area-weighted vertex normals. Face normals come from Newell's formula,
/// whose magnitude is twice the polygon area, so summing them weights by area.
pub fn vertex_normals(mesh: &Mesh) -> VertexNormals {
    let mut acc = vec![[0.0f64; 3]; mesh.vertex_count()];
    for face in &mesh.faces {
        let n = newell_normal(&mesh.vertices, face);
        for &v in face {
            for c in 0..3 {
                acc[v][c] += n[c];
            }
        }
    }
    let mut fallback = Vec::new();
    let normals = acc
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let len = norm(n);
            if len > 0.0 && len.is_finite() {
                [n[0] / len, n[1] / len, n[2] / len]
            } else {
                fallback.push(i);
                FALLBACK_NORMAL
            }
        })
        .collect();
    VertexNormals { normals, fallback }
}

pub(crate) fn newell_normal(vertices: &[Point3], face: &[usize]) -> Point3 {
    let mut n = [0.0; 3];
    for (k, &a) in face.iter().enumerate() {
        let p = vertices[a];
        let q = vertices[face[(k + 1) % face.len()]];
        n[0] += (p[1] - q[1]) * (p[2] + q[2]);
        n[1] += (p[2] - q[2]) * (p[0] + q[0]);
        n[2] += (p[0] - q[0]) * (p[1] + q[1]);
    }
    n
}

pub(crate) fn norm(v: Point3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Length of the axis-aligned bounding-box diagonal.
pub fn bounding_box_diagonal(mesh: &Mesh) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &mesh.vertices {
        for c in 0..3 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    if mesh.vertices.is_empty() {
        return 0.0;
    }
    norm([hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Ply,
    /// TOSCA `.vert` coordinates with a sibling `.tri` file of 1-based triangles.
    Tosca,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            "vert" | "tri" => Some(MeshFormat::Tosca),
            _ => None,
        }
    }
}

/// Reads a mesh, detecting the format from the file extension.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| Error::UnsupportedFormat(path.display().to_string()))?;
    parse_mesh(path, format)
}

pub fn parse_mesh(path: &Path, format: MeshFormat) -> Result<Mesh> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mesh")
        .to_string();
    if format == MeshFormat::Tosca {
        let vert = path.with_extension("vert");
        let tri = path.with_extension("tri");
        let vtext = fs::read_to_string(&vert).map_err(|e| Error::io(&vert, e))?;
        let ttext = fs::read_to_string(&tri).map_err(|e| Error::io(&tri, e))?;
        return parse_tosca_str(&vtext, &ttext, name).map_err(|e| with_path(e, path));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if format == MeshFormat::Ply && is_binary_ply(&bytes) {
        return Err(Error::UnsupportedFormat(format!(
            "{}: binary PLY is not supported",
            path.display()
        )));
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "file is not valid UTF-8 text".into(),
    })?;
    let parsed = match format {
        MeshFormat::Off => parse_off_str(&text, name),
        MeshFormat::Obj => parse_obj_str(&text, name),
        MeshFormat::Ply => parse_ply_str(&text, name),
        MeshFormat::Tosca => unreachable!(),
    };
    parsed.map_err(|e| with_path(e, path))
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::new(),
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found {tok:?}")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, found {tok:?}")))
}

fn parse_point(tokens: &[&str], line: usize) -> Result<Point3> {
    if tokens.len() < 3 {
        return Err(parse_err(line, "vertex needs three coordinates"));
    }
    Ok([
        parse_f64(tokens[0], line)?,
        parse_f64(tokens[1], line)?,
        parse_f64(tokens[2], line)?,
    ])
}

fn check_face(face: &[usize], vertex_count: usize, line: usize) -> Result<()> {
    if face.len() < 3 {
        return Err(parse_err(line, "face needs at least three vertices"));
    }
    if let Some(&index) = face.iter().find(|&&v| v >= vertex_count) {
        return Err(Error::FaceIndexOutOfRange {
            line,
            index,
            vertex_count,
        });
    }
    if has_repeat(face) {
        return Err(parse_err(line, "face repeats a vertex index"));
    }
    Ok(())
}

fn finish(name: String, vertices: Vec<Point3>, faces: Vec<Vec<usize>>) -> Result<Mesh> {
    if vertices.is_empty() {
        return Err(parse_err(0, "mesh has no vertices"));
    }
    Ok(Mesh {
        vertices,
        faces,
        name,
        class_label: None,
    })
}

pub fn parse_off_str(text: &str, name: impl Into<String>) -> Result<Mesh> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let mut head_tokens: Vec<&str> = header.split_whitespace().collect();
    let keyword = head_tokens.remove(0);
    let stripped = keyword.trim_start_matches(['C', 'N', 'S', 'T']);
    if stripped != "OFF" {
        return Err(parse_err(hline, format!("malformed header: expected OFF, found {keyword:?}")));
    }
    // Counts may share the header line ("OFF 4 4 6").
    let (count_line, counts) = if head_tokens.len() >= 2 {
        (hline, head_tokens)
    } else {
        let (l, c) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "malformed header: missing counts"))?;
        (l, c.split_whitespace().collect())
    };
    if counts.len() < 2 {
        return Err(parse_err(count_line, "malformed header: expected vertex and face counts"));
    }
    let nv = parse_usize(counts[0], count_line)?;
    let nf = parse_usize(counts[1], count_line)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("file ends before {nv} vertices were read")))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        vertices.push(parse_point(&toks, l)?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("file ends before {nf} faces were read")))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let arity = parse_usize(toks[0], l)?;
        if toks.len() < arity + 1 {
            return Err(parse_err(l, format!("face declares {arity} vertices but lists {}", toks.len() - 1)));
        }
        let face = toks[1..=arity]
            .iter()
            .map(|t| parse_usize(t, l))
            .collect::<Result<Vec<_>>>()?;
        check_face(&face, nv, l)?;
        faces.push(face);
    }
    finish(name.into(), vertices, faces)
}

pub fn parse_obj_str(text: &str, name: impl Into<String>) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut raw_faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (l, s) in content_lines(text) {
        let mut toks = s.split_whitespace();
        match toks.next() {
            Some("v") => {
                let rest: Vec<&str> = toks.collect();
                vertices.push(parse_point(&rest, l)?);
            }
            Some("f") => {
                let face = toks
                    .map(|t| {
                        let idx = t.split('/').next().unwrap_or("");
                        idx.parse::<i64>()
                            .map_err(|_| parse_err(l, format!("bad face index {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                raw_faces.push((l, face));
            }
            _ => {}
        }
    }
    let nv = vertices.len();
    let mut faces = Vec::with_capacity(raw_faces.len());
    for (l, raw) in raw_faces {
        let face = raw
            .into_iter()
            .map(|i| match i {
                i if i > 0 => Ok(i as usize - 1),
                i if i < 0 && (-i) as usize <= nv => Ok(nv - (-i) as usize),
                0 => Err(parse_err(l, "OBJ face index 0 is invalid")),
                i => Err(Error::FaceIndexOutOfRange {
                    line: l,
                    index: i.unsigned_abs() as usize,
                    vertex_count: nv,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        check_face(&face, nv, l)?;
        faces.push(face);
    }
    finish(name.into(), vertices, faces)
}

fn is_binary_ply(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(512)];
    let head = String::from_utf8_lossy(head);
    head.lines()
        .find(|l| l.trim_start().starts_with("format"))
        .is_some_and(|l| l.contains("binary"))
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<(String, bool)>,
}

pub fn parse_ply_str(text: &str, name: impl Into<String>) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    if !matches!(lines.next(), Some((_, "ply"))) {
        return Err(parse_err(1, "malformed header: missing 'ply' magic"));
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    loop {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(0, "malformed header: missing end_header"))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.first().copied() {
            Some("format") => {
                if toks.get(1) != Some(&"ascii") {
                    return Err(Error::UnsupportedFormat("binary PLY is not supported".into()));
                }
                saw_format = true;
            }
            Some("element") => {
                if toks.len() != 3 {
                    return Err(parse_err(l, "malformed element declaration"));
                }
                elements.push(PlyElement {
                    name: toks[1].to_string(),
                    count: parse_usize(toks[2], l)?,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(l, "property before any element"))?;
                let is_list = toks.get(1) == Some(&"list");
                let pname = toks
                    .last()
                    .ok_or_else(|| parse_err(l, "malformed property"))?;
                el.properties.push((pname.to_string(), is_list));
            }
            Some("end_header") => break,
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => return Err(parse_err(l, format!("malformed header: unknown keyword {other:?}"))),
        }
    }
    if !saw_format {
        return Err(parse_err(0, "malformed header: missing format line"));
    }

    let mut body = lines.filter(|(_, s)| !s.is_empty());
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vertex_count = 0;
    for el in &elements {
        let axis_pos = |axis: &str| el.properties.iter().position(|(n, _)| n == axis);
        for _ in 0..el.count {
            let (l, s) = body
                .next()
                .ok_or_else(|| parse_err(0, format!("file ends inside element {:?}", el.name)))?;
            let toks: Vec<&str> = s.split_whitespace().collect();
            match el.name.as_str() {
                "vertex" => {
                    let (Some(x), Some(y), Some(z)) = (axis_pos("x"), axis_pos("y"), axis_pos("z")) else {
                        return Err(parse_err(l, "vertex element lacks x/y/z properties"));
                    };
                    if el.properties.iter().any(|(_, list)| *list) {
                        return Err(parse_err(l, "list properties on vertices are not supported"));
                    }
                    let get = |k: usize| {
                        toks.get(k)
                            .ok_or_else(|| parse_err(l, "vertex line too short"))
                            .and_then(|t| parse_f64(t, l))
                    };
                    vertices.push([get(x)?, get(y)?, get(z)?]);
                    vertex_count = vertices.len();
                }
                "face" => {
                    let pos = el
                        .properties
                        .iter()
                        .position(|(n, list)| *list && (n == "vertex_indices" || n == "vertex_index"))
                        .ok_or_else(|| parse_err(l, "face element lacks a vertex_indices list"))?;
                    // Only scalar properties may precede the index list for this simple reader.
                    if el.properties[..pos].iter().any(|(_, list)| *list) {
                        return Err(parse_err(l, "unsupported face layout"));
                    }
                    let arity = toks
                        .get(pos)
                        .ok_or_else(|| parse_err(l, "face line too short"))
                        .and_then(|t| parse_usize(t, l))?;
                    let idx = toks
                        .get(pos + 1..pos + 1 + arity)
                        .ok_or_else(|| parse_err(l, "face line shorter than its declared arity"))?;
                    let face = idx
                        .iter()
                        .map(|t| parse_usize(t, l))
                        .collect::<Result<Vec<_>>>()?;
                    check_face(&face, vertex_count, l)?;
                    faces.push(face);
                }
                _ => {}
            }
        }
    }
    finish(name.into(), vertices, faces)
}

/// TOSCA stores coordinates one vertex per line and 1-based triangles.
pub fn parse_tosca_str(vert: &str, tri: &str, name: impl Into<String>) -> Result<Mesh> {
    let vertices = content_lines(vert)
        .map(|(l, s)| {
            let toks: Vec<&str> = s.split_whitespace().collect();
            parse_point(&toks, l)
        })
        .collect::<Result<Vec<_>>>()?;
    let nv = vertices.len();
    let faces = content_lines(tri)
        .map(|(l, s)| {
            let face = s
                .split_whitespace()
                .map(|t| {
                    let one_based = parse_f64(t, l)?;
                    if one_based < 1.0 || one_based.fract() != 0.0 {
                        return Err(parse_err(l, format!("bad 1-based index {t:?}")));
                    }
                    Ok(one_based as usize - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            check_face(&face, nv, l)?;
            Ok(face)
        })
        .collect::<Result<Vec<_>>>()?;
    finish(name.into(), vertices, faces)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WriteFormat {
    #[default]
    Off,
}

/// Formats with 15 significant digits, then prints the shortest string that
/// round-trips that rounded value.
pub(crate) fn format_sig15(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    if rounded != 0.0 && (rounded.abs() < 1e-4 || rounded.abs() >= 1e15) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn to_off_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.face_count());
    for p in &mesh.vertices {
        let _ = writeln!(
            out,
            "{} {} {}",
            format_sig15(p[0]),
            format_sig15(p[1]),
            format_sig15(p[2])
        );
    }
    for f in &mesh.faces {
        let _ = write!(out, "{}", f.len());
        for v in f {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: &Path, format: WriteFormat) -> Result<()> {
    let text = match format {
        WriteFormat::Off => to_off_string(mesh),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
