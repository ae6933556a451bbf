//! Text serialization of fields.
//!
//! A field is written as
//!
//! ```text
//! # torus_field v1, n=2, N=16,16
//! 0.0000000000000000e0,0.0000000000000000e0,1.2345678901234567e-1
//! ...
//! ```
//!
//! one node per line in row-major order, coordinates then value, all with
//! 17 significant digits. A strip field is a sequence of such blocks, each
//! header followed by a `# slice=<k>, t=<t_k>` line.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::field::TorusField;
use super::grid::TorusGrid;
use super::strip::StripField;
use crate::error::{Error, Result};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(grid: &TorusGrid) -> String {
    let sizes: Vec<String> = grid.sizes().iter().map(|n| n.to_string()).collect();
    format!("# torus_field v1, n={}, N={}", grid.dims(), sizes.join(","))
}

fn write_nodes(out: &mut impl Write, field: &TorusField) -> Result<()> {
    let grid = field.grid();
    for (j, v) in field.values().iter().enumerate() {
        let mut line: Vec<String> = grid.node(j).into_iter().map(format_value).collect();
        line.push(format_value(*v));
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_field(out: &mut impl Write, field: &TorusField) -> Result<()> {
    writeln!(out, "{}", header(field.grid()))?;
    write_nodes(out, field)
}

pub fn write_strip(out: &mut impl Write, strip: &StripField) -> Result<()> {
    for (k, slice) in strip.slices().iter().enumerate() {
        writeln!(out, "{}", header(strip.grid()))?;
        writeln!(out, "# slice={k}, t={}", format_value(strip.level(k)))?;
        write_nodes(out, slice)?;
    }
    Ok(())
}

pub fn field_to_string(field: &TorusField) -> String {
    let mut buf = Vec::new();
    write_field(&mut buf, field).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn strip_to_string(strip: &StripField) -> String {
    let mut buf = Vec::new();
    write_strip(&mut buf, strip).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses `# torus_field v1, n=<n>, N=<N_1,...>`.
pub fn parse_header(line: &str) -> Result<TorusGrid> {
    let rest = line
        .trim()
        .strip_prefix("# torus_field v1,")
        .ok_or_else(|| Error::Parse(format!("not a torus_field v1 header: {line:?}")))?;
    let rest = rest.trim();
    let (n_part, sizes_part) = rest
        .split_once(", N=")
        .ok_or_else(|| Error::Parse(format!("missing N= in header: {line:?}")))?;
    let dims: usize = n_part
        .trim()
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad n= in header: {line:?}")))?;
    let sizes = sizes_part
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse(format!("bad N= in header: {e}")))?;
    if sizes.len() != dims {
        return Err(Error::Parse(format!(
            "header declares n={dims} but lists {} sizes",
            sizes.len()
        )));
    }
    TorusGrid::new(&sizes)
}

fn parse_node_line(line: &str, grid: &TorusGrid, j: usize) -> Result<f64> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != grid.dims() + 1 {
        return Err(Error::Parse(format!(
            "expected {} columns, got {}: {line:?}",
            grid.dims() + 1,
            parts.len()
        )));
    }
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse(format!("{e}: {line:?}")))?;
    let expect = grid.node(j);
    for (a, (&got, want)) in nums.iter().zip(&expect).enumerate() {
        if (got - want).abs() > 1e-12 {
            return Err(Error::Parse(format!(
                "node {j} coordinate {a} is {got}, expected {want} (row-major order)"
            )));
        }
    }
    Ok(nums[grid.dims()])
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty())
}

pub fn parse_field(text: &str) -> Result<TorusField> {
    let mut lines = content_lines(text);
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field file".into()))?;
    let grid = parse_header(head)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        values.push(parse_node_line(line, &grid, values.len())?);
        if values.len() > grid.len() {
            return Err(Error::Parse("more rows than grid nodes".into()));
        }
    }
    TorusField::new(grid, values)
}

pub fn parse_strip(text: &str) -> Result<StripField> {
    let mut grid: Option<TorusGrid> = None;
    let mut slices: Vec<Vec<f64>> = Vec::new();
    for line in content_lines(text) {
        if line.starts_with("# torus_field") {
            let g = parse_header(line)?;
            if let Some(prev) = &grid {
                if *prev != g {
                    return Err(Error::Parse("strip blocks use different grids".into()));
                }
            }
            grid = Some(g);
            slices.push(Vec::new());
        } else if let Some(rest) = line.strip_prefix("# slice=") {
            let k: usize = rest
                .split(',')
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad slice line {line:?}")))?;
            if k + 1 != slices.len() {
                return Err(Error::Parse(format!("slice {k} out of order")));
            }
        } else if line.starts_with('#') {
            continue;
        } else {
            let g = grid
                .as_ref()
                .ok_or_else(|| Error::Parse("data before header".into()))?;
            let cur = slices.last_mut().expect("header pushes a slice");
            let v = parse_node_line(line, g, cur.len())?;
            cur.push(v);
        }
    }
    let grid = grid.ok_or_else(|| Error::Parse("empty strip file".into()))?;
    let fields = slices
        .into_iter()
        .map(|v| TorusField::new(grid.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    StripField::new(fields)
}

pub fn read_field(path: &Path) -> Result<TorusField> {
    parse_field(&fs::read_to_string(path)?)
}

pub fn read_strip(path: &Path) -> Result<StripField> {
    parse_strip(&fs::read_to_string(path)?)
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a whole field file from any buffered reader.
pub fn read_field_from(reader: impl BufRead) -> Result<TorusField> {
    let text = reader
        .lines()
        .collect::<std::io::Result<Vec<_>>>()?
        .join("\n");
    parse_field(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_format() {
        let g = TorusGrid::new(&[16, 8]).unwrap();
        assert_eq!(header(&g), "# torus_field v1, n=2, N=16,8");
        assert_eq!(parse_header(&header(&g)).unwrap(), g);
        assert!(parse_header("# torus_field v2, n=1, N=8").is_err());
        assert!(parse_header("# torus_field v1, n=2, N=8").is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn rejects_out_of_order_rows() {
        let text = "# torus_field v1, n=1, N=8\n0.125,1\n0,2\n";
        assert!(parse_field(text).is_err());
    }

    #[test]
    fn strip_round_trip() {
        let g = TorusGrid::new(&[8]).unwrap();
        let s = StripField::from_fn(&g, 3, |x, t| x[0].sin() * t + 0.1).unwrap();
        let back = parse_strip(&strip_to_string(&s)).unwrap();
        assert_eq!(back.intervals(), 3);
        assert_eq!(back.distance(&s), 0.0);
    }

    proptest! {
        #[test]
        fn field_round_trip_is_bit_exact(vals in proptest::collection::vec(-1e6f64..1e6, 8 * 10)) {
            let g = TorusGrid::new(&[8, 10]).unwrap();
            let f = TorusField::new(g, vals).unwrap();
            let text = field_to_string(&f);
            let back = parse_field(&text).unwrap();
            prop_assert_eq!(back.values(), f.values());
            prop_assert_eq!(field_to_string(&back), text);
        }
    }
}
