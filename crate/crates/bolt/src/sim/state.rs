//! Working state of one drape: current geometry and velocities, lumped
//! masses, precomputed rest data (2D edge frames, rest curvatures, rest seam
//! angles), seam groups re-anchored at the start pose, and the frozen
//! collision environment.

use crate::mesh::{build_seam_groups, GarmentSheet, SeamSpec, TriMesh3, TriangleBvh};
use crate::sdf::SampledSdf;
use crate::sim::bend::{bend_stencils, curvature, BendStencil};
use crate::sim::material::MaterialParams;
use crate::sim::seam_bend::{build_seam_hinges, SeamHinge};
use crate::{Error, Mat2, Result, Vec3};

/// Per-triangle rest data taken from the 2D sewing-pattern layout.
#[derive(Debug, Clone)]
pub struct TriangleRest {
    /// Inverse of the 2D rest edge matrix `[u1-u0, u2-u0]`.
    pub inv_edge: Mat2,
    /// 2D rest area, cm².
    pub area: f64,
    pub panel: u32,
}

/// One already-draped garment below the current layer, kept as its detailed
/// mesh so contact against it stays sharper than the baked field.
pub struct LowerLayer {
    pub mesh: TriMesh3,
    pub bvh: TriangleBvh,
    /// Cloth thickness of that garment (max over its panels), cm.
    pub thickness: f64,
}

impl LowerLayer {
    pub fn new(mesh: TriMesh3, thickness: f64) -> LowerLayer {
        let bvh = TriangleBvh::build(&mesh);
        LowerLayer {
            mesh,
            bvh,
            thickness,
        }
    }
}

/// Everything the garment collides against: the unified signed distance field
/// (body plus all frozen layers) and the frozen lower layers' detailed meshes.
pub struct Collider {
    pub sdf: SampledSdf,
    pub lower: Vec<LowerLayer>,
}

pub struct SimState {
    /// Current geometry; positions move, triangles don't.
    pub mesh: TriMesh3,
    pub velocities: Vec<Vec3>,
    /// Lumped vertex masses, grams.
    pub mass: Vec<f64>,
    /// Pinned vertices skip integration entirely.
    pub pinned: Vec<bool>,

    pub rest: Vec<TriangleRest>,
    pub rest_curvature: Vec<[f64; 3]>,
    pub stencils: Vec<BendStencil>,
    pub hinges: Vec<SeamHinge>,
    /// Seam groups with offsets re-anchored to the start pose.
    pub seams: SeamSpec,
    pub group_of_vertex: Vec<u32>,
    pub materials: MaterialParams,

    pub collider: Option<Collider>,
    /// Self-collision BVH over `mesh`; refit (or rebuilt) every substep.
    pub bvh: TriangleBvh,
    /// Last good contact normal per vertex, the fallback where the field
    /// gradient vanishes.
    pub contact_normal: Vec<Vec3>,

    /// Draping layer, for diagnostics.
    pub layer: i32,
    /// Substeps taken so far, for diagnostics.
    pub substep_count: u64,
}

impl SimState {
    /// Build the working state for a garment at its drape start pose.
    ///
    /// `positions` is where the garment currently sits (after transfer, or
    /// authored); rest lengths still come from the 2D layout, but seam
    /// offsets, rest curvatures, and rest seam angles are measured here so
    /// the start pose itself is in equilibrium for those terms.
    pub fn new(
        sheet: &GarmentSheet,
        positions: Vec<Vec3>,
        collider: Option<Collider>,
    ) -> Result<SimState> {
        let nv = sheet.mesh.positions.len();
        if positions.len() != nv {
            return Err(Error::invalid(
                "sim",
                format!(
                    "start pose has {} vertices, garment has {nv}",
                    positions.len()
                ),
            ));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("sim", "non-finite start position"));
        }
        sheet.material.validate()?;

        let mesh = TriMesh3 {
            positions,
            triangles: sheet.mesh.triangles.clone(),
            normals: None,
        };

        let mut rest = Vec::with_capacity(mesh.triangles.len());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let u0 = sheet.layout.positions[tri[0] as usize];
            let u1 = sheet.layout.positions[tri[1] as usize];
            let u2 = sheet.layout.positions[tri[2] as usize];
            let edge = Mat2::from_columns(&[u1 - u0, u2 - u0]);
            let inv_edge = edge.try_inverse().ok_or_else(|| {
                Error::invalid("sim", format!("layout triangle {t} is degenerate"))
            })?;
            rest.push(TriangleRest {
                inv_edge,
                area: 0.5 * edge.determinant().abs(),
                panel: sheet.layout.panel_of_triangle[t],
            });
        }

        // lumped mass: each triangle spreads density·area over its corners
        let mut mass = vec![0.0f64; nv];
        for (tri, r) in mesh.triangles.iter().zip(&rest) {
            let m = sheet.material.for_panel(r.panel).density * r.area / 3.0;
            for &v in tri {
                mass[v as usize] += m;
            }
        }
        if let Some(v) = mass.iter().position(|&m| m <= 0.0) {
            return Err(Error::invalid(
                "sim",
                format!("vertex {v} has no mass (not referenced by any triangle?)"),
            ));
        }

        let neighbors = mesh.tri_neighbors();
        let stencils = bend_stencils(&mesh.triangles, &neighbors);
        let rest_curvature = stencils
            .iter()
            .zip(&rest)
            .map(|(st, r)| curvature(&mesh.positions, st, &r.inv_edge))
            .collect();

        // re-anchor seams at the start pose: same pairs, offsets measured now
        let seams = build_seam_groups(&sheet.seams.pairs, &mesh)?;
        let group_of_vertex = seams.vertex_group_map(nv);
        let hinges = build_seam_hinges(&mesh, &seams, &mesh.positions);

        let bvh = TriangleBvh::build(&mesh);
        Ok(SimState {
            velocities: vec![Vec3::zeros(); nv],
            mass,
            pinned: vec![false; nv],
            rest,
            rest_curvature,
            stencils,
            hinges,
            seams,
            group_of_vertex,
            materials: sheet.material.clone(),
            collider,
            bvh,
            contact_normal: vec![Vec3::new(0.0, 1.0, 0.0); nv],
            layer: sheet.layer,
            substep_count: 0,
            mesh,
        })
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self
            .velocities
            .iter()
            .zip(&self.mass)
            .map(|(v, m)| m * v.norm_squared())
            .sum::<f64>()
    }

    /// Largest panel thickness — the self-contact activation reach.
    pub fn max_thickness(&self) -> f64 {
        let mut t = self.materials.default.thickness;
        for m in self.materials.per_panel.values() {
            t = t.max(m.thickness);
        }
        t
    }
}
