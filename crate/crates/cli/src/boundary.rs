use std::path::Path;

use pleg_core::cases;
use pleg_core::error::{Error, Result};
use pleg_core::solver::BoundaryData;
use pleg_core::torus_field::{PeriodicPotential, StripField, TorusField, TorusGrid, io};

/// One slice: `const:<c>`, `cos:<a>`, `cosine01`, or a CSV field path.
pub fn parse_potential(spec: &str, grid: &TorusGrid) -> Result<PeriodicPotential> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("bad number in boundary spec {spec:?}")))
    };
    if let Some(c) = spec.strip_prefix("const:") {
        PeriodicPotential::new(TorusField::constant(grid, number(c)?))
    } else if let Some(a) = spec.strip_prefix("cos:") {
        cases::cosine_potential(grid, number(a)?)
    } else if spec == "cosine01" {
        cases::cosine_potential(grid, 0.1)
    } else if Path::new(spec).is_file() {
        PeriodicPotential::new(io::read_field(Path::new(spec))?)
    } else {
        Err(Error::InvalidArgument(format!("unknown boundary spec {spec:?}")))
    }
}

/// `<spec>` for equal slices or `<spec0>;<spec1>`.
pub fn parse_boundary(spec: &str, grid: &TorusGrid) -> Result<BoundaryData> {
    let (s0, s1) = spec.split_once(';').unwrap_or((spec, spec));
    BoundaryData::new(parse_potential(s0, grid)?, parse_potential(s1, grid)?)
}

/// Strip for `verify`: a named case or a strip CSV; `None` when the spec is
/// boundary data to be solved first.
pub fn parse_strip(spec: &str, nx: usize, nt: usize, epsilon: f64) -> Result<Option<StripField>> {
    let strip = match spec {
        "quadratic" => cases::quadratic_strip(&TorusGrid::new(&[nx])?, nt, epsilon)?,
        "manufactured" => cases::manufactured_strip(&TorusGrid::new(&[nx])?, nt)?,
        "manufactured2" => cases::manufactured_strip(&TorusGrid::cube(2, nx)?, nt)?,
        _ if !spec.contains(';') && Path::new(spec).is_file() && is_strip_file(Path::new(spec))? => {
            io::read_strip(Path::new(spec))?
        }
        _ => return Ok(None),
    };
    Ok(Some(strip))
}

fn is_strip_file(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().nth(1).is_some_and(|l| l.starts_with("# slice=")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let g = TorusGrid::new(&[32]).unwrap();
        assert_eq!(parse_boundary("const:0.3", &g).unwrap().lambda, 1.0);
        let b = parse_boundary("cos:0.1", &g).unwrap();
        assert!((b.lambda - (1.0 - 0.2 * std::f64::consts::PI)).abs() < 1e-12);
        assert!(matches!(parse_boundary("cos:0.2", &g), Err(Error::NotConvex { .. })));
        assert!(parse_boundary("cos:abc", &g).is_err());
        assert!(parse_boundary("nope", &g).is_err());
        let b = parse_boundary("const:0;const:0.05", &g).unwrap();
        assert!((b.u1.values()[3] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn csv_boundary() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(&[16]).unwrap();
        let path = dir.path().join("u.csv");
        io::write_atomic(&path, io::field_to_string(&cases::cosine_field(&g, 0.05)).as_bytes()).unwrap();
        let p = parse_potential(path.to_str().unwrap(), &g).unwrap();
        assert!((p.margin() - cases::cosine_margin(0.05)).abs() < 1e-12);
    }

    #[test]
    fn named_strips() {
        assert!(parse_strip("quadratic", 8, 8, 0.25).unwrap().is_some());
        assert!(parse_strip("manufactured2", 8, 8, 0.25).unwrap().unwrap().grid().dims() == 2);
        assert!(parse_strip("cos:0.1", 8, 8, 0.25).unwrap().is_none());
    }
}
