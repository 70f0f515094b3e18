use shellkorn_core::geometry::{
    build_surface, circular_cone, circular_cylinder, cone_from_curve, cylinder_from_curve, ellipse_cylinder,
    flat_patch_cylinder, Profile1D, ZeroGaussSurface,
};

use crate::config::{Extrusion, Preset, SurfaceSpec};
use crate::curve_file::read_curve;
use crate::error::Result;

pub fn preset_surface(p: &Preset) -> Result<ZeroGaussSurface> {
    Ok(match *p {
        Preset::CylinderCircular { radius, length } => circular_cylinder(radius, length)?,
        Preset::CylinderEllipse { ax, ay, length, samples } => ellipse_cylinder(ax, ay, length, samples)?,
        Preset::ConeCircle { colatitude, zmin, zmax } => circular_cone(colatitude, zmin, zmax)?,
        Preset::CylinderFlatPatch { flat, length } => flat_patch_cylinder(flat, length)?,
    })
}

pub fn build(spec: &SurfaceSpec) -> Result<ZeroGaussSurface> {
    match spec {
        SurfaceSpec::Preset(p) => preset_surface(p),
        SurfaceSpec::Profiles { b_z, a, b, c, period, z_range } => Ok(build_surface(
            Profile1D::parse(b_z, "z")?,
            Profile1D::parse(a, "theta")?,
            Profile1D::parse(b, "theta")?,
            Profile1D::parse(c, "theta")?,
            *period,
            *z_range,
        )?),
        SurfaceSpec::Curve { path, extrude, z_range } => {
            let curve = read_curve(path)?;
            Ok(match extrude {
                Extrusion::Cylinder => cylinder_from_curve(curve, *z_range)?,
                Extrusion::Cone => cone_from_curve(curve, *z_range)?,
            })
        }
    }
}

/// Human-readable validation summary.
pub fn describe(s: &ZeroGaussSurface) -> String {
    let (lo, hi) = s.z_range();
    let (rc, rg) = s.codazzi_gauss_residual(64);
    let sep = match s.separability() {
        Some(k) => format!("{k:?}"),
        None => "none".into(),
    };
    format!(
        "period          {:.12}\n\
         z range         [{lo}, {hi}]\n\
         min A_theta     {:.6e}\n\
         c range         [{:.6e}, {:.6e}]\n\
         convex          {}\n\
         max thickness   {:.6e}\n\
         separable       {sep}\n\
         embedded        {}\n\
         codazzi, gauss  {rc:.3e}, {rg:.3e}\n",
        s.period(),
        s.min_a_theta(),
        s.min_c(),
        s.max_c(),
        s.uniformly_convex(),
        s.max_thickness(),
        s.embedding().is_some(),
    )
}
