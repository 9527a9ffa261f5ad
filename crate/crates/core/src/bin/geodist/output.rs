//! Field export: JSON, CSV and PLY writers for solved distance fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use geodist::fem::NodeKind;
use geodist::mesh::io::{save_ply, PlyFormat};
use geodist::mesh::subdivide_1to4;
use geodist::solver::{DistanceField, PlDistanceField};

use crate::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Json,
    Csv,
    Ply,
}

impl FieldFormat {
    pub fn parse(name: &str) -> Result<Self, AppError> {
        match name.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "ply" => Ok(Self::Ply),
            other => Err(AppError::parse(format!(
                "unknown output format {other:?} (expected json, csv or ply)"
            ))),
        }
    }

    /// Explicit flag wins; otherwise the output extension decides (JSON when
    /// unrecognized).
    pub fn infer(path: &str, flag: Option<&str>) -> Result<Self, AppError> {
        if let Some(f) = flag {
            return Self::parse(f);
        }
        let ext = Path::new(path)
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        Ok(match ext.as_str() {
            "csv" => Self::Csv,
            "ply" => Self::Ply,
            _ => Self::Json,
        })
    }
}

fn create(path: &str) -> Result<BufWriter<File>, AppError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| AppError::parse(format!("cannot create {path}: {e}")))
}

/// Writes a quadratic field. The PLY form carries the once-subdivided mesh so
/// mid-edge nodal values are visible as ordinary vertices.
pub fn write_pq_field(
    path: &str,
    format: FieldFormat,
    field: &DistanceField,
) -> Result<(), AppError> {
    match format {
        FieldFormat::Json => {
            let doc = serde_json::json!({
                "layout": {
                    "n_vertex": field.layout.n_vertex,
                    "n_edge": field.layout.n_edge,
                },
                "u": field.u,
                "d": field.d,
            });
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, &doc)
                .map_err(|e| AppError::parse(format!("cannot write {path}: {e}")))?;
            w.write_all(b"\n").ok();
        }
        FieldFormat::Csv => {
            let mut w = create(path)?;
            writeln!(w, "node,kind,u,d").map_err(AppError::io)?;
            for node in 0..field.layout.total() {
                let kind = match field.layout.node_kind(node) {
                    NodeKind::Vertex(_) => "vertex",
                    NodeKind::Edge(_) => "edge",
                };
                writeln!(w, "{},{},{},{}", node, kind, field.u[node], field.d[node])
                    .map_err(AppError::io)?;
            }
        }
        FieldFormat::Ply => {
            let (fine, _) = subdivide_1to4(&field.mesh);
            save_ply(path, &fine, Some(&field.d), PlyFormat::Ascii)
                .map_err(|e| AppError::parse(e.to_string()))?;
        }
    }
    Ok(())
}

/// Writes a linear-baseline field (vertex values only).
pub fn write_pl_field(
    path: &str,
    format: FieldFormat,
    field: &PlDistanceField,
) -> Result<(), AppError> {
    match format {
        FieldFormat::Json => {
            let u: Vec<f64> = field.d.iter().map(|&d| d * d).collect();
            let doc = serde_json::json!({
                "layout": { "n_vertex": field.d.len(), "n_edge": 0 },
                "u": u,
                "d": field.d,
            });
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, &doc)
                .map_err(|e| AppError::parse(format!("cannot write {path}: {e}")))?;
            w.write_all(b"\n").ok();
        }
        FieldFormat::Csv => {
            let mut w = create(path)?;
            writeln!(w, "node,kind,u,d").map_err(AppError::io)?;
            for (node, &d) in field.d.iter().enumerate() {
                writeln!(w, "{},vertex,{},{}", node, d * d, d).map_err(AppError::io)?;
            }
        }
        FieldFormat::Ply => {
            save_ply(path, &field.mesh, Some(&field.d), PlyFormat::Ascii)
                .map_err(|e| AppError::parse(e.to_string()))?;
        }
    }
    Ok(())
}
