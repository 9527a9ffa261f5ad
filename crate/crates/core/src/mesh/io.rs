//! Mesh file ingestion (OBJ, OFF, PLY) and PLY export.
//!
//! Positions are read as 64-bit floats. Polygonal faces are fan-triangulated.
//! PLY supports ascii and binary (little/big endian) input; export writes a
//! per-vertex `quality` scalar so distance fields can be inspected directly
//! in a viewer. Ascii floats are written in shortest round-trip form, so
//! loading an exported file recovers the exact field values.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{MeshError, TriMesh};

pub fn load(path: &str) -> Result<TriMesh, MeshError> {
    Ok(load_with_quality(path)?.0)
}

/// Loads a mesh; for PLY input also returns the per-vertex `quality`
/// property when present.
pub fn load_with_quality(path: &str) -> Result<(TriMesh, Option<Vec<f64>>), MeshError> {
    let ext = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let bytes = fs::read(path).map_err(|source| MeshError::Io { path: path.into(), source })?;
    match ext.as_str() {
        "obj" => Ok((parse_obj(path, &bytes)?, None)),
        "off" => Ok((parse_off(path, &bytes)?, None)),
        "ply" => parse_ply(path, &bytes),
        other => Err(MeshError::UnsupportedFormat(other.into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Writes a PLY file with an optional per-vertex `quality` scalar (f64).
pub fn save_ply(
    path: &str,
    mesh: &TriMesh,
    quality: Option<&[f64]>,
    format: PlyFormat,
) -> Result<(), MeshError> {
    if let Some(q) = quality {
        assert_eq!(q.len(), mesh.n_vertices(), "quality must be per-vertex");
    }
    let mut out: Vec<u8> = Vec::new();
    let fmt_line = match format {
        PlyFormat::Ascii => "format ascii 1.0",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0",
    };
    let mut header = String::new();
    header.push_str("ply\n");
    header.push_str(fmt_line);
    header.push('\n');
    header.push_str(&format!("element vertex {}\n", mesh.n_vertices()));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if quality.is_some() {
        header.push_str("property double quality\n");
    }
    header.push_str(&format!("element face {}\n", mesh.n_faces()));
    header.push_str("property list uchar int vertex_indices\n");
    header.push_str("end_header\n");
    out.extend_from_slice(header.as_bytes());

    match format {
        PlyFormat::Ascii => {
            for (i, v) in mesh.vertices().iter().enumerate() {
                match quality {
                    Some(q) => {
                        out.extend_from_slice(
                            format!("{} {} {} {}\n", v[0], v[1], v[2], q[i]).as_bytes(),
                        );
                    }
                    None => {
                        out.extend_from_slice(format!("{} {} {}\n", v[0], v[1], v[2]).as_bytes());
                    }
                }
            }
            for f in mesh.faces() {
                out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes());
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (i, v) in mesh.vertices().iter().enumerate() {
                for c in v {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                if let Some(q) = quality {
                    out.extend_from_slice(&q[i].to_le_bytes());
                }
            }
            for f in mesh.faces() {
                out.push(3u8);
                for &v in f {
                    out.extend_from_slice(&(v as i32).to_le_bytes());
                }
            }
        }
    }

    let mut file =
        fs::File::create(path).map_err(|source| MeshError::Io { path: path.into(), source })?;
    file.write_all(&out).map_err(|source| MeshError::Io { path: path.into(), source })?;
    Ok(())
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { path: path.into(), line, message: message.into() }
}

// ---------------------------------------------------------------- OBJ

fn parse_obj(path: &str, bytes: &[u8]) -> Result<TriMesh, MeshError> {
    let text = String::from_utf8_lossy(bytes);
    let mut vertices = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    *c = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(path, line, "bad vertex line"))?;
                }
                vertices.push(coord);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| parse_err(path, line, format!("bad face index {t:?}")))?;
                    let resolved = if i > 0 {
                        (i - 1) as usize
                    } else if i < 0 && vertices.len() as i64 + i >= 0 {
                        (vertices.len() as i64 + i) as usize
                    } else {
                        return Err(parse_err(path, line, "face index out of range"));
                    };
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(parse_err(path, line, "face with fewer than 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // normals, texcoords, groups, materials
        }
    }
    TriMesh::new(vertices, faces)
}

// ---------------------------------------------------------------- OFF

fn parse_off(path: &str, bytes: &[u8]) -> Result<TriMesh, MeshError> {
    let text = String::from_utf8_lossy(bytes);
    // token stream with line tracking; '#' starts a comment
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("");
        for t in l.split_whitespace() {
            tokens.push((ln + 1, t));
        }
    }
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str), MeshError> {
        let t = tokens
            .get(pos)
            .copied()
            .ok_or_else(|| parse_err(path, tokens.last().map_or(1, |t| t.0), format!("unexpected end of file, expected {what}")))?;
        pos += 1;
        Ok(t)
    };

    let (first_line, first) = next("OFF header")?;
    let mut counts_first = first;
    let mut counts_line = first_line;
    if first.eq_ignore_ascii_case("OFF") {
        let t = next("vertex count")?;
        counts_line = t.0;
        counts_first = t.1;
    }
    let nv: usize = counts_first
        .parse()
        .map_err(|_| parse_err(path, counts_line, "bad vertex count"))?;
    let (l2, t2) = next("face count")?;
    let nf: usize = t2.parse().map_err(|_| parse_err(path, l2, "bad face count"))?;
    let _ = next("edge count")?; // ignored

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut coord = [0.0f64; 3];
        for c in &mut coord {
            let (ln, t) = next("vertex coordinate")?;
            *c = t.parse().map_err(|_| parse_err(path, ln, "bad vertex coordinate"))?;
        }
        vertices.push(coord);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, t) = next("face size")?;
        let k: usize = t.parse().map_err(|_| parse_err(path, ln, "bad face size"))?;
        if k < 3 {
            return Err(parse_err(path, ln, "face with fewer than 3 vertices"));
        }
        let mut idx = Vec::with_capacity(k);
        for _ in 0..k {
            let (ln, t) = next("face index")?;
            let i: usize = t.parse().map_err(|_| parse_err(path, ln, "bad face index"))?;
            idx.push(i);
        }
        for k in 1..idx.len() - 1 {
            faces.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    TriMesh::new(vertices, faces)
}

// ---------------------------------------------------------------- PLY

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { name: String, count_ty: ScalarType, item_ty: ScalarType },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

fn parse_ply(path: &str, bytes: &[u8]) -> Result<(TriMesh, Option<Vec<f64>>), MeshError> {
    // header is ascii; find end_header
    let mut offset = 0usize;
    let mut lineno = 0usize;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_magic = false;
    loop {
        let rest = &bytes[offset..];
        let eol = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_err(path, lineno, "unterminated header"))?;
        let line = String::from_utf8_lossy(&rest[..eol]);
        let line = line.trim_end_matches('\r').trim();
        offset += eol + 1;
        lineno += 1;
        if line.is_empty() || line.starts_with("comment") || line.starts_with("obj_info") {
            continue;
        }
        if !saw_magic {
            if line != "ply" {
                return Err(parse_err(path, lineno, "missing ply magic"));
            }
            saw_magic = true;
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                encoding = Some(match tok.next() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLe,
                    Some("binary_big_endian") => PlyEncoding::BinaryBe,
                    other => {
                        return Err(parse_err(path, lineno, format!("bad format {other:?}")))
                    }
                });
            }
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(path, lineno, "element without name"))?;
                let count: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(path, lineno, "element without count"))?;
                elements.push(Element { name: name.into(), count, properties: Vec::new() });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, lineno, "property before element"))?;
                let kind = tok
                    .next()
                    .ok_or_else(|| parse_err(path, lineno, "property without type"))?;
                if kind == "list" {
                    let count_ty = tok
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(path, lineno, "bad list count type"))?;
                    let item_ty = tok
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(path, lineno, "bad list item type"))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "list without name"))?;
                    el.properties.push(Property::List { name: name.into(), count_ty, item_ty });
                } else {
                    let ty = ScalarType::parse(kind)
                        .ok_or_else(|| parse_err(path, lineno, format!("bad type {kind:?}")))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "property without name"))?;
                    el.properties.push(Property::Scalar { name: name.into(), ty });
                }
            }
            Some("end_header") => break,
            other => return Err(parse_err(path, lineno, format!("bad header line {other:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| parse_err(path, lineno, "missing format line"))?;

    let mut cursor = Cursor { bytes, offset, line: lineno, encoding, path };
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut quality: Option<Vec<f64>> = None;
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        // column lookup for vertex properties
        for _ in 0..el.count {
            let mut xyz = [f64::NAN; 3];
            let mut q = f64::NAN;
            let mut face_idx: Vec<usize> = Vec::new();
            for p in &el.properties {
                match p {
                    Property::Scalar { name, ty } => {
                        let v = cursor.scalar(*ty)?;
                        if is_vertex {
                            match name.as_str() {
                                "x" => xyz[0] = v,
                                "y" => xyz[1] = v,
                                "z" => xyz[2] = v,
                                "quality" => q = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List { name, count_ty, item_ty } => {
                        let n = cursor.scalar(*count_ty)? as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            items.push(cursor.scalar(*item_ty)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            face_idx = items.iter().map(|&v| v as usize).collect();
                        }
                    }
                }
            }
            if is_vertex {
                if xyz.iter().any(|c| c.is_nan()) {
                    return Err(parse_err(cursor.path, cursor.line, "vertex missing x/y/z"));
                }
                vertices.push(xyz);
                if !q.is_nan() {
                    quality.get_or_insert_with(Vec::new).push(q);
                }
            }
            if is_face {
                if face_idx.len() < 3 {
                    return Err(parse_err(
                        cursor.path,
                        cursor.line,
                        "face with fewer than 3 vertices",
                    ));
                }
                for k in 1..face_idx.len() - 1 {
                    faces.push([face_idx[0], face_idx[k], face_idx[k + 1]]);
                }
            }
        }
    }

    if let Some(q) = &quality {
        if q.len() != vertices.len() {
            return Err(parse_err(path, lineno, "quality present on only some vertices"));
        }
    }
    let mesh = TriMesh::new(vertices, faces)?;
    Ok((mesh, quality))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    line: usize,
    encoding: PlyEncoding,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn scalar(&mut self, ty: ScalarType) -> Result<f64, MeshError> {
        match self.encoding {
            PlyEncoding::Ascii => {
                // skip whitespace, tracking lines
                while self.offset < self.bytes.len()
                    && (self.bytes[self.offset] as char).is_ascii_whitespace()
                {
                    if self.bytes[self.offset] == b'\n' {
                        self.line += 1;
                    }
                    self.offset += 1;
                }
                let start = self.offset;
                while self.offset < self.bytes.len()
                    && !(self.bytes[self.offset] as char).is_ascii_whitespace()
                {
                    self.offset += 1;
                }
                if start == self.offset {
                    return Err(parse_err(self.path, self.line, "unexpected end of data"));
                }
                let tok = std::str::from_utf8(&self.bytes[start..self.offset])
                    .map_err(|_| parse_err(self.path, self.line, "non-utf8 data"))?;
                tok.parse::<f64>()
                    .map_err(|_| parse_err(self.path, self.line, format!("bad number {tok:?}")))
            }
            PlyEncoding::BinaryLe | PlyEncoding::BinaryBe => {
                let size = ty.size();
                if self.offset + size > self.bytes.len() {
                    return Err(parse_err(self.path, self.line, "truncated binary data"));
                }
                let raw = &self.bytes[self.offset..self.offset + size];
                self.offset += size;
                let le = self.encoding == PlyEncoding::BinaryLe;
                macro_rules! get {
                    ($t:ty) => {{
                        let arr: [u8; std::mem::size_of::<$t>()] = raw.try_into().unwrap();
                        if le {
                            <$t>::from_le_bytes(arr) as f64
                        } else {
                            <$t>::from_be_bytes(arr) as f64
                        }
                    }};
                }
                Ok(match ty {
                    ScalarType::I8 => get!(i8),
                    ScalarType::U8 => get!(u8),
                    ScalarType::I16 => get!(i16),
                    ScalarType::U16 => get!(u16),
                    ScalarType::I32 => get!(i32),
                    ScalarType::U32 => get!(u32),
                    ScalarType::F32 => get!(f32),
                    ScalarType::F64 => get!(f64),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::shapes;
    use super::*;

    fn tmpfile(name: &str) -> String {
        let dir = std::env::temp_dir().join("geodist-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name).to_str().unwrap().to_string()
    }

    #[test]
    fn obj_round_trip_via_text() {
        let path = tmpfile("tri.obj");
        fs::write(&path, "# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let m = load(&path).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (3, 3, 1));
    }

    #[test]
    fn obj_slash_and_quad_faces() {
        let path = tmpfile("quad.obj");
        fs::write(
            &path,
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n",
        )
        .unwrap();
        let m = load(&path).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (4, 2));
    }

    #[test]
    fn off_icosahedron() {
        let ico = shapes::icosahedron();
        let mut text = String::from("OFF\n12 20 30\n");
        for v in ico.vertices() {
            text.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        for f in ico.faces() {
            text.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        let path = tmpfile("ico.off");
        fs::write(&path, text).unwrap();
        let m = load(&path).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (12, 30, 20));
    }

    #[test]
    fn ply_ascii_quality_round_trip_is_bit_exact() {
        let mesh = shapes::unit_square();
        let q: Vec<f64> = vec![0.0, 1.0 / 3.0, std::f64::consts::PI, 0.1 + 0.2];
        let path = tmpfile("sq.ply");
        save_ply(&path, &mesh, Some(&q), PlyFormat::Ascii).unwrap();
        let (m, rq) = load_with_quality(&path).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(rq.unwrap(), q);
    }

    #[test]
    fn ply_binary_round_trip() {
        let mesh = shapes::icosahedron();
        let q: Vec<f64> = (0..12).map(|i| (i as f64).sqrt()).collect();
        let path = tmpfile("ico.ply");
        save_ply(&path, &mesh, Some(&q), PlyFormat::BinaryLittleEndian).unwrap();
        let (m, rq) = load_with_quality(&path).unwrap();
        assert_eq!(m.n_faces(), 20);
        assert_eq!(rq.unwrap(), q);
        for (a, b) in m.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load("/nonexistent/nope.obj"),
            Err(MeshError::Io { .. })
        ));
    }

    #[test]
    fn unknown_extension_rejected() {
        let path = tmpfile("m.stl");
        fs::write(&path, "x").unwrap();
        assert!(matches!(load(&path), Err(MeshError::UnsupportedFormat(_))));
    }
}
