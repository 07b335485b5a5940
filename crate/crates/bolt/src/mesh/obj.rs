//! Wavefront OBJ read/write.
//!
//! The writer emits floats with Rust's shortest round-trip formatting, so a
//! written file is byte-for-byte a function of the mesh data — important for
//! reproducibility checks on pipeline outputs. Garment bundles store UVs
//! one-to-one with positions (`f i/i i/i i/i`); the reader is more lenient and
//! accepts the usual index forms plus quad faces (fan-triangulated).

use super::TriMesh3;
use crate::{Error, Result, Vec2, Vec3};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy)]
pub struct ObjCorner {
    pub v: u32,
    pub vt: Option<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct ObjData {
    pub positions: Vec<Vec3>,
    pub texcoords: Vec<Vec2>,
    pub faces: Vec<[ObjCorner; 3]>,
}

impl ObjData {
    pub fn into_mesh(self) -> TriMesh3 {
        let triangles = self
            .faces
            .iter()
            .map(|f| [f[0].v, f[1].v, f[2].v])
            .collect();
        TriMesh3::new(self.positions, triangles)
    }

    /// Per-vertex UVs, requiring a consistent position→texcoord assignment
    /// (the layout a garment bundle guarantees).
    pub fn per_vertex_uvs(&self, path: &Path) -> Result<Vec<Vec2>> {
        let mut uv_of = vec![u32::MAX; self.positions.len()];
        for (fi, face) in self.faces.iter().enumerate() {
            for c in face {
                let vt = c.vt.ok_or_else(|| {
                    Error::parse(
                        path,
                        format!("face {} has corners without texcoords", fi + 1),
                    )
                })?;
                let slot = &mut uv_of[c.v as usize];
                if *slot == u32::MAX {
                    *slot = vt;
                } else if *slot != vt {
                    return Err(Error::parse(
                        path,
                        format!(
                            "vertex {} maps to texcoords {} and {vt}; \
                             garment meshes need one UV per vertex",
                            c.v + 1,
                            *slot + 1
                        ),
                    ));
                }
            }
        }
        uv_of
            .iter()
            .enumerate()
            .map(|(v, &vt)| {
                if vt == u32::MAX {
                    Err(Error::parse(
                        path,
                        format!("vertex {} is unused, no UV", v + 1),
                    ))
                } else {
                    Ok(self.texcoords[vt as usize])
                }
            })
            .collect()
    }
}

fn resolve_index(raw: i64, len: usize, path: &Path, what: &str) -> Result<u32> {
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        len as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx as usize >= len {
        return Err(Error::parse(
            path,
            format!("{what} index {raw} out of range (have {len})"),
        ));
    }
    Ok(idx as u32)
}

pub fn read_obj(path: &Path) -> Result<ObjData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut data = ObjData::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let ctx = |what: &str| format!("line {}: {what}", lineno + 1);
        match tag {
            "v" => {
                let mut c = [0.0f64; 3];
                for x in &mut c {
                    *x = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::parse(path, ctx("bad vertex")))?;
                }
                data.positions.push(Vec3::new(c[0], c[1], c[2]));
            }
            "vt" => {
                let mut c = [0.0f64; 2];
                for x in &mut c {
                    *x = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::parse(path, ctx("bad texcoord")))?;
                }
                data.texcoords.push(Vec2::new(c[0], c[1]));
            }
            "f" => {
                let mut corners = Vec::new();
                for spec in parts {
                    let mut fields = spec.split('/');
                    let v: i64 = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::parse(path, ctx("bad face index")))?;
                    let vt = match fields.next() {
                        None | Some("") => None,
                        Some(s) => Some(
                            s.parse::<i64>()
                                .map_err(|_| Error::parse(path, ctx("bad texcoord index")))?,
                        ),
                    };
                    let v = resolve_index(v, data.positions.len(), path, "vertex")?;
                    let vt = vt
                        .map(|t| resolve_index(t, data.texcoords.len(), path, "texcoord"))
                        .transpose()?;
                    corners.push(ObjCorner { v, vt });
                }
                if corners.len() < 3 {
                    return Err(Error::parse(path, ctx("face with fewer than 3 corners")));
                }
                for k in 1..corners.len() - 1 {
                    data.faces.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            // normals, groups, materials: ignored
            _ => {}
        }
    }
    Ok(data)
}

/// Write a mesh, optionally with one UV per vertex (`f i/i i/i i/i`).
pub fn write_obj(path: &Path, mesh: &TriMesh3, uvs: Option<&[Vec2]>) -> Result<()> {
    if let Some(uvs) = uvs {
        if uvs.len() != mesh.positions.len() {
            return Err(Error::invalid(
                "obj writer",
                format!("{} UVs for {} vertices", uvs.len(), mesh.positions.len()),
            ));
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut put = |s: String| w.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
    for p in &mesh.positions {
        put(format!("v {} {} {}\n", p.x, p.y, p.z))?;
    }
    if let Some(uvs) = uvs {
        for t in uvs {
            put(format!("vt {} {}\n", t.x, t.y))?;
        }
    }
    for tri in &mesh.triangles {
        let [a, b, c] = [tri[0] + 1, tri[1] + 1, tri[2] + 1];
        if uvs.is_some() {
            put(format!("f {a}/{a} {b}/{b} {c}/{c}\n"))?;
        } else {
            put(format!("f {a} {b} {c}\n"))?;
        }
    }
    Ok(())
}
