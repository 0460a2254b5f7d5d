//! File formats: OFF meshes, CSV tables, JSON reports, TOML run configuration.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::NodalField;
use crate::mesh::{AngleStats, MeshError, SurfaceMesh, SurfaceTag, HISTOGRAM_BINS};
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

/// Writes an ASCII OFF file. Coordinates use shortest round-trip formatting.
pub fn write_off<T: Real, W: Write>(mesh: &SurfaceMesh<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), mesh.n_edges())?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", v.x(), v.y(), v.z())?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    Ok(())
}

/// Vertices and triangles as read from an OFF file.
pub type OffContents<T> = (Vec<Vec3<T>>, Vec<[usize; 3]>);

/// Reads an ASCII OFF file of triangles. Comments (`#`) and blank lines are skipped.
pub fn read_off<T: Real, R: BufRead>(r: R) -> Result<OffContents<T>, IoError> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter_map(|(i, l)| match l {
            Ok(l) => {
                let content = l.split('#').next().unwrap_or("").trim().to_string();
                (!content.is_empty()).then_some(Ok((i, content)))
            }
            Err(e) => Some(Err(e)),
        });
    let mut next = |what: &str| -> Result<(usize, String), IoError> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")))
    };

    let (line, header) = next("header")?;
    let mut counts_line = None;
    if header != "OFF" {
        // header and counts may share a line
        match header.strip_prefix("OFF") {
            Some(rest) if !rest.trim().is_empty() => counts_line = Some((line, rest.trim().to_string())),
            _ => return Err(parse_err(line, "missing OFF header")),
        }
    }
    let (line, counts) = match counts_line {
        Some(c) => c,
        None => next("counts")?,
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad count '{t}'"))))
        .collect::<Result<_, _>>()?;
    let [nv, nf, ..] = counts[..] else {
        return Err(parse_err(line, "expected vertex and face counts"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = next("vertex")?;
        let xs: Vec<T> = text
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad coordinate '{t}'"))))
            .collect::<Result<_, _>>()?;
        let [x, y, z] = xs[..] else {
            return Err(parse_err(line, "expected three coordinates"));
        };
        vertices.push(Vec3::new(x, y, z));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, text) = next("face")?;
        let idx: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad index '{t}'"))))
            .collect::<Result<_, _>>()?;
        match idx[..] {
            [3, a, b, c, ..] => triangles.push([a, b, c]),
            _ => return Err(parse_err(line, "only triangular faces are supported")),
        }
    }
    Ok((vertices, triangles))
}

/// Reads an OFF file and validates it as a mesh on the declared surface.
pub fn load_off_mesh<T: Real>(path: &Path, surface: SurfaceTag<T>) -> Result<SurfaceMesh<T>, IoError> {
    let (vertices, triangles) = read_off(io::BufReader::new(fs::File::open(path)?))?;
    Ok(SurfaceMesh::new(vertices, triangles, surface)?)
}

/// `node,x,y,z,u,is_boundary`
pub fn write_solution_csv<T: Real, W: Write>(mesh: &SurfaceMesh<T>, u: &NodalField<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "node,x,y,z,u,is_boundary")?;
    for (i, (v, val)) in mesh.vertices().iter().zip(u.values()).enumerate() {
        writeln!(w, "{i},{},{},{},{val},{}", v.x(), v.y(), v.z(), u8::from(mesh.is_boundary(i)))?;
    }
    Ok(())
}

/// `element,angle0,angle1,angle2` in degrees.
pub fn write_angles_csv<T: Real, W: Write>(stats: &AngleStats<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "element,angle0,angle1,angle2")?;
    for (e, [a, b, c]) in stats.per_element_angles.iter().enumerate() {
        writeln!(w, "{e},{a},{b},{c}")?;
    }
    Ok(())
}

/// `bin_lo,bin_hi,count` over 10-degree bins.
pub fn write_histogram_csv<T: Real, W: Write>(stats: &AngleStats<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "bin_lo,bin_hi,count")?;
    let width = 180 / HISTOGRAM_BINS;
    for (k, count) in stats.histogram.iter().enumerate() {
        writeln!(w, "{},{},{count}", k * width, (k + 1) * width)?;
    }
    Ok(())
}

/// `row,value`
pub fn write_vector_csv<T: Real, W: Write>(values: &[T], mut w: W) -> io::Result<()> {
    writeln!(w, "row,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

pub fn write_json<S: Serialize, W: Write>(value: &S, mut w: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<(), IoError>
where
    F: FnOnce(&mut io::BufWriter<fs::File>) -> Result<(), IoError>,
{
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Optional settings read from a TOML file; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub surface: Option<String>,
    pub levels: Option<String>,
    #[serde(rename = "R")]
    pub major_radius: Option<f64>,
    #[serde(rename = "r")]
    pub minor_radius: Option<f64>,
    pub n_major: Option<usize>,
    pub n_minor: Option<usize>,
    pub problem: Option<String>,
    pub sigma: Option<f64>,
    pub p: Option<f64>,
    pub epsilon_reg: Option<f64>,
    pub damping: Option<f64>,
    pub picard_tol: Option<f64>,
    pub max_picard: Option<usize>,
    pub subsolver: Option<String>,
    pub audit_mode: Option<String>,
    pub deterministic: Option<bool>,
    pub out_dir: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{angle_stats, generate_hemisphere, generate_semitorus};

    fn off_round_trip(mesh: &SurfaceMesh<f64>) {
        let mut buf = Vec::new();
        write_off(mesh, &mut buf).unwrap();
        let (vertices, triangles) = read_off::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(triangles, mesh.triangles());
        for (a, b) in vertices.iter().zip(mesh.vertices()) {
            assert!((*a - *b).norm() <= 1e-15);
        }
        let rebuilt = SurfaceMesh::new(vertices, triangles, *mesh.surface()).unwrap();
        assert_eq!(rebuilt.n_interior(), mesh.n_interior());
    }

    #[test]
    fn off_round_trips() {
        off_round_trip(&generate_hemisphere(2).unwrap());
        off_round_trip(&generate_semitorus(5.0, 2.0, 9, 4).unwrap());
    }

    #[test]
    fn off_reader_accepts_comments_and_inline_counts() {
        let text = "OFF 3 1 0\n# a comment\n0 0 0\n1 0 0  \n\n0 1 0\n3 0 1 2\n";
        let (v, t) = read_off::<f64, _>(text.as_bytes()).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(t, vec![[0, 1, 2]]);
    }

    #[test]
    fn off_reader_reports_lines() {
        let err = read_off::<f64, _>("OFF\n1 0 0\n0 x 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }), "{err}");
        let err = read_off::<f64, _>("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 6, .. }), "{err}");
        assert!(read_off::<f64, _>("PLY\n".as_bytes()).is_err());
        assert!(read_off::<f64, _>("OFF\n2 0 0\n0 0 0\n".as_bytes()).is_err());
    }

    #[test]
    fn solution_csv_layout() {
        let mesh = generate_hemisphere::<f64>(0).unwrap();
        let u = NodalField::new(&mesh, vec![0.5; mesh.n_vertices()]).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&mesh, &u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node,x,y,z,u,is_boundary");
        assert_eq!(lines.len(), mesh.n_vertices() + 1);
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",0.5,0"));
        assert!(lines.last().unwrap().ends_with(",1"));
    }

    #[test]
    fn angle_tables() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let stats = angle_stats(&mesh);
        let mut buf = Vec::new();
        write_angles_csv(&stats, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), mesh.n_triangles() + 1);
        let mut buf = Vec::new();
        write_histogram_csv(&stats, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let total: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
        assert_eq!(total, 3 * mesh.n_triangles());
        assert!(text.lines().nth(1).unwrap().starts_with("0,10,"));
    }

    #[test]
    fn config_parses_known_keys_only() {
        let cfg = ConfigFile::parse("surface = \"semitorus\"\nR = 5.0\nr = 2.0\nlevels = \"0..2\"\nepsilon-reg = 1e-6\n").unwrap();
        assert_eq!(cfg.surface.as_deref(), Some("semitorus"));
        assert_eq!(cfg.major_radius, Some(5.0));
        assert_eq!(cfg.minor_radius, Some(2.0));
        assert_eq!(cfg.epsilon_reg, Some(1e-6));
        assert!(ConfigFile::parse("colour = 1").is_err());
    }

    #[test]
    fn load_off_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.off");
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        write_file(&path, |w| Ok(write_off(&mesh, w)?)).unwrap();
        let loaded = load_off_mesh::<f64>(&path, SurfaceTag::UnitHemisphere).unwrap();
        assert_eq!(loaded.n_triangles(), mesh.n_triangles());
    }
}
