//! File formats: tab-separated manifests, flat key-value config files,
//! Wavefront-style mesh files with anchor sidecars, and the binary
//! embedding matrix format.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::{Material, Mesh};
use crate::loss::Embedding;
use crate::scalar::Scalar;
use crate::synth::{GlassFlag, Manifest, ManifestRecord};

// --- manifests --------------------------------------------------------------

/// Load a manifest of `path<TAB>identity<TAB>G|NG` lines.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (img, ident, flag) = match (fields.next(), fields.next(), fields.next(), fields.next())
        {
            (Some(img), Some(ident), Some(flag), None) => (img, ident, flag),
            _ => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "expected `path<TAB>identity<TAB>G|NG`",
                ))
            }
        };
        let flag = GlassFlag::parse(flag).ok_or_else(|| {
            Error::parse(path, lineno + 1, format!("bad glass flag `{flag}`"))
        })?;
        if ident.is_empty() {
            return Err(Error::parse(path, lineno + 1, "empty identity label"));
        }
        records.push(ManifestRecord {
            path: img.to_string(),
            identity: ident.to_string(),
            flag,
        });
    }
    Manifest::new(records)
}

pub fn save_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for r in manifest.records() {
        out.push_str(&format!("{}\t{}\t{}\n", r.path, r.identity, r.flag));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

// --- key-value config -------------------------------------------------------

/// Flat `key = value` configuration file. Blank lines and `#` comments are
/// allowed; consumers declare their accepted keys and anything else is
/// rejected.
#[derive(Debug, Clone, Default)]
pub struct KeyValueConfig {
    values: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, lineno + 1, "expected `key = value`")
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(path, lineno + 1, "empty key"));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("duplicate key `{key}`"),
                ));
            }
        }
        Ok(KeyValueConfig { values })
    }

    /// Reject keys outside the accepted set.
    pub fn check_keys(&self, accepted: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !accepted.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key `{key}` (accepted: {})",
                    accepted.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key `{key}` is not a number: `{v}`"))
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(None),
            Some("true") | Some("1") => Ok(Some(true)),
            Some("false") | Some("0") => Ok(Some(false)),
            Some(v) => Err(Error::InvalidArgument(format!(
                "config key `{key}` is not a boolean: `{v}`"
            ))),
        }
    }
}

// --- meshes -----------------------------------------------------------------

/// Load a Wavefront-style mesh (`v x y z` and triangular `f` records; other
/// record types are ignored) plus its anchor sidecar of 1-based vertex
/// indices, one per line.
pub fn load_mesh<T: Scalar>(
    mesh_path: impl AsRef<Path>,
    anchors_path: impl AsRef<Path>,
) -> Result<Mesh<T>> {
    let mesh_path = mesh_path.as_ref();
    let text = fs::read_to_string(mesh_path).map_err(|e| Error::io(mesh_path, e))?;
    let mut vertices: Vec<Point3<T>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<T> {
                    let tok = fields.next().ok_or_else(|| {
                        Error::parse(mesh_path, lineno + 1, format!("missing {name} coordinate"))
                    })?;
                    T::from_decimal_str(tok).ok_or_else(|| {
                        Error::parse(mesh_path, lineno + 1, format!("bad coordinate `{tok}`"))
                    })
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(3);
                for tok in fields {
                    // accept v, v/vt, v//vn, v/vt/vn forms
                    let first = tok.split('/').next().unwrap_or("");
                    let i: usize = first.parse().map_err(|_| {
                        Error::parse(mesh_path, lineno + 1, format!("bad face index `{tok}`"))
                    })?;
                    if i == 0 || i > vertices.len() {
                        return Err(Error::parse(
                            mesh_path,
                            lineno + 1,
                            format!("face index {i} out of range (1..={})", vertices.len()),
                        ));
                    }
                    idx.push(i - 1);
                }
                if idx.len() != 3 {
                    return Err(Error::parse(
                        mesh_path,
                        lineno + 1,
                        format!("non-triangular face with {} vertices", idx.len()),
                    ));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }

    let anchors_path = anchors_path.as_ref();
    let text = fs::read_to_string(anchors_path).map_err(|e| Error::io(anchors_path, e))?;
    let mut anchors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let i: usize = line.parse().map_err(|_| {
            Error::parse(anchors_path, lineno + 1, format!("bad anchor index `{line}`"))
        })?;
        if i == 0 || i > vertices.len() {
            return Err(Error::parse(
                anchors_path,
                lineno + 1,
                format!("anchor index {i} out of range (1..={})", vertices.len()),
            ));
        }
        anchors.push(i - 1);
    }
    Mesh::new(vertices, triangles, anchors, Material::default())
}

/// Write the mesh as `v`/`f` records and its anchors as 1-based indices.
pub fn save_mesh<T: Scalar>(
    mesh: &Mesh<T>,
    mesh_path: impl AsRef<Path>,
    anchors_path: impl AsRef<Path>,
) -> Result<()> {
    let mesh_path = mesh_path.as_ref();
    let file = fs::File::create(mesh_path).map_err(|e| Error::io(mesh_path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(mesh_path, e);
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(io_err)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let anchors_path = anchors_path.as_ref();
    let mut out = String::new();
    for &a in mesh.anchor_indices() {
        out.push_str(&format!("{}\n", a + 1));
    }
    fs::write(anchors_path, out).map_err(|e| Error::io(anchors_path, e))
}

// --- embeddings -------------------------------------------------------------

const EMBED_MAGIC: &[u8; 4] = b"EMB1";

/// Write embeddings as a binary matrix: magic, u32 dim, u32 count, then
/// row-major little-endian f32 data. Labels and flags go to a sidecar
/// manifest with one line per row, in order.
pub fn save_embeddings<T: Scalar>(
    rows: &[(String, Embedding<T>)],
    matrix_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<()> {
    let matrix_path = matrix_path.as_ref();
    let dim = rows.first().map_or(0, |(_, e)| e.dim());
    for (path, e) in rows {
        if e.dim() != dim {
            return Err(Error::InvalidArgument(format!(
                "embedding for `{path}` has dimension {}, expected {dim}",
                e.dim()
            )));
        }
    }
    let mut bytes = Vec::with_capacity(12 + rows.len() * dim * 4);
    bytes.extend_from_slice(EMBED_MAGIC);
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    for (_, e) in rows {
        for &v in e.vector() {
            bytes.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    fs::write(matrix_path, bytes).map_err(|e| Error::io(matrix_path, e))?;

    let manifest = Manifest::new(
        rows.iter()
            .map(|(path, e)| ManifestRecord {
                path: path.clone(),
                identity: e.label.clone(),
                flag: if e.glass { GlassFlag::G } else { GlassFlag::NG },
            })
            .collect(),
    )?;
    save_manifest(&manifest, sidecar_path)
}

/// Load the binary embedding matrix and its sidecar manifest. Returns the
/// per-row (path, embedding) pairs in file order.
pub fn load_embeddings<T: Scalar>(
    matrix_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<Vec<(String, Embedding<T>)>> {
    let matrix_path = matrix_path.as_ref();
    let bytes = fs::read(matrix_path).map_err(|e| Error::io(matrix_path, e))?;
    if bytes.len() < 12 || &bytes[..4] != EMBED_MAGIC {
        return Err(Error::parse(
            matrix_path,
            0,
            "not an embedding matrix file (bad magic)",
        ));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expect = 12 + dim * count * 4;
    if bytes.len() != expect {
        return Err(Error::parse(
            matrix_path,
            0,
            format!("expected {expect} bytes for {count}x{dim}, found {}", bytes.len()),
        ));
    }
    let manifest = load_manifest(sidecar_path.as_ref())?;
    if manifest.len() != count {
        return Err(Error::InconsistentManifest(format!(
            "sidecar has {} rows but matrix holds {count}",
            manifest.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for (row, record) in manifest.records().iter().enumerate() {
        let mut v = Vec::with_capacity(dim);
        for k in 0..dim {
            let off = 12 + (row * dim + k) * 4;
            let bits = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            v.push(T::of(bits as f64));
        }
        let embedding = Embedding::new(v, record.identity.clone(), record.flag == GlassFlag::G)?;
        out.push((record.path.clone(), embedding));
    }
    Ok(out)
}
