//! File export for hypersurface meshes: ASCII OBJ geometry (ball
//! coordinates, Y-up) plus a JSON sidecar carrying the per-node data the
//! OBJ cannot hold (support, Gauss map, curvatures).
//!
//! Output is deterministic: the same mesh always serializes to the same
//! bytes, so exported files diff cleanly across runs.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::correspondence::{lambda_from_kappa, HypersurfaceMesh};
use crate::lorentz::to_poincare_ball_default;
use crate::{Error, Result};

/// Format one coordinate to nine significant digits.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Write `mesh` as ASCII OBJ: vertices are Poincaré-ball coordinates with
/// the third ball axis mapped to OBJ's Y (up), faces are the grid's
/// triangles. Surfaces only (`n = 2`); higher-dimensional meshes have no
/// OBJ representation.
pub fn write_obj<W: Write>(mesh: &HypersurfaceMesh, out: &mut W) -> Result<()> {
    if mesh.grid.sphere_dim != 2 {
        return Err(Error::InvalidInput(format!(
            "OBJ export is defined for surfaces (n = 2), got n = {}",
            mesh.grid.sphere_dim
        )));
    }
    writeln!(out, "# horocorr mesh: {}", mesh.label)?;
    writeln!(out, "# flow time {}", mesh.flow_time)?;
    writeln!(out, "o {}", mesh.label.replace(char::is_whitespace, "_"))?;
    for phi in &mesh.phi {
        let ball = to_poincare_ball_default(phi)?;
        let c = ball.coords();
        writeln!(out, "v {} {} {}", sig9(c[0]), sig9(c[2]), sig9(c[1]))?;
    }
    for tri in mesh.grid.triangles() {
        writeln!(out, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1)?;
    }
    Ok(())
}

/// OBJ export straight to a file path.
pub fn write_obj_file(mesh: &HypersurfaceMesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_obj(mesh, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Per-node data accompanying an OBJ export. `gauss` holds unit sphere
/// coordinates; `kappas` are principal curvatures where they have been
/// measured; `lambdas` are the corresponding eigenvalue-dictionary values
/// (`None` where a curvature sits at the dictionary pole κ = −1 or has not
/// been measured).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshSidecar {
    pub schema: String,
    pub label: String,
    pub sphere_dim: usize,
    pub flow_time: f64,
    pub node_count: usize,
    pub support: Vec<f64>,
    pub gauss: Vec<Vec<f64>>,
    pub kappas: Vec<Option<Vec<f64>>>,
    pub lambdas: Vec<Option<Vec<f64>>>,
}

pub const SIDECAR_SCHEMA: &str = "horocorr-sidecar/v1";

impl MeshSidecar {
    pub fn from_mesh(mesh: &HypersurfaceMesh) -> Self {
        let lambdas = mesh
            .kappas
            .iter()
            .map(|ks| {
                ks.as_ref().and_then(|ks| {
                    ks.iter()
                        .map(|&k| lambda_from_kappa(k).ok())
                        .collect::<Option<Vec<f64>>>()
                })
            })
            .collect();
        MeshSidecar {
            schema: SIDECAR_SCHEMA.to_string(),
            label: mesh.label.clone(),
            sphere_dim: mesh.grid.sphere_dim,
            flow_time: mesh.flow_time,
            node_count: mesh.node_count(),
            support: mesh.support.clone(),
            gauss: mesh.gauss.iter().map(|g| g.coords().to_vec()).collect(),
            kappas: mesh.kappas.clone(),
            lambdas,
        }
    }
}

/// Serialize the sidecar as pretty JSON (stable key order, stable bytes).
pub fn write_sidecar<W: Write>(mesh: &HypersurfaceMesh, out: &mut W) -> Result<()> {
    let sidecar = MeshSidecar::from_mesh(mesh);
    serde_json::to_writer_pretty(&mut *out, &sidecar)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Sidecar export straight to a file path.
pub fn write_sidecar_file(mesh: &HypersurfaceMesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_sidecar(mesh, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
