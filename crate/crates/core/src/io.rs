//! JSON and CSV artifacts. Every float is written with 17 significant
//! digits, so values survive a write/read round trip bit for bit.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::analysis::RaySample;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Pretty JSON layout with 17-digit floats.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("JSON is UTF-8"))
}

pub const FIELD_HEADER: &str = "x1,x2,value,d";

/// One row per node in mesh order: coordinates, value, distance to the boundary.
pub fn write_field_csv(mesh: &Mesh, values: &[f64], mut w: impl Write) -> Result<()> {
    if values.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    writeln!(w, "{FIELD_HEADER}")?;
    for ((x, v), d) in mesh.nodes.iter().zip(values).zip(&mesh.dist) {
        writeln!(w, "{},{},{},{}", fmt17(x[0]), fmt17(x[1]), fmt17(*v), fmt17(*d))?;
    }
    Ok(())
}

/// Values column of a field CSV, checked against the mesh node coordinates.
pub fn read_field_csv(mesh: &Mesh, text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(FIELD_HEADER) {
        return Err(Error::Invalid(format!("field CSV must start with `{FIELD_HEADER}`")));
    }
    let mut values = Vec::with_capacity(mesh.len());
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("field CSV row {}: {e}", row + 2)))?;
        if cols.len() != 4 {
            return Err(Error::Invalid(format!("field CSV row {} has {} columns", row + 2, cols.len())));
        }
        let Some(x) = mesh.nodes.get(row) else {
            return Err(Error::Invalid("field CSV has more rows than the mesh has nodes".into()));
        };
        if (x[0] - cols[0]).abs() > 1e-12 || (x[1] - cols[1]).abs() > 1e-12 {
            return Err(Error::Invalid(format!("field CSV row {} does not match mesh node {row}", row + 2)));
        }
        values.push(cols[2]);
    }
    if values.len() != mesh.len() {
        return Err(Error::Invalid(format!(
            "field CSV has {} rows, mesh has {} nodes",
            values.len(),
            mesh.len()
        )));
    }
    Ok(values)
}

pub fn write_ray_csv(samples: &[RaySample], mut w: impl Write) -> Result<()> {
    writeln!(w, "x1,x2,d,f")?;
    for s in samples {
        writeln!(w, "{},{},{},{}", fmt17(s.x[0]), fmt17(s.x[1]), fmt17(s.d), fmt17(s.f))?;
    }
    Ok(())
}
