//! Data files: CSV signals, grids and polylines, PGM images with a sidecar,
//! piecewise descriptions in text form. Every write is atomic.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::energy_1d::{Interp, Signal1D};
use crate::energy_nd::{Field, Field2D};
use crate::error::{Error, Result};
use crate::lab::config::Config;
use crate::limit_energy::Sbv1D;

const PGM_MAX: u32 = 65535;
const GRID_TOL: f64 = 1e-9;

/// Lossless text form of a double.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Header plus rows of pre-formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

fn csv_records(path: &Path, want: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != want {
        return Err(Error::Parse(format!("{}: expected header `{}`", path.display(), want.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|e| Error::Parse(format!("{}: row {}: `{c}`: {e}", path.display(), i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

fn uniform_step(xs: &[f64], what: &str) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Parse(format!("{what} needs at least 2 samples")));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let uniform = xs
        .iter()
        .enumerate()
        .all(|(i, x)| (x - (xs[0] + h * i as f64)).abs() <= GRID_TOL * (1.0 + x.abs()) + GRID_TOL * h.abs());
    if !(h > 0.0) || !uniform {
        return Err(Error::Parse(format!("{what} is not uniformly spaced and increasing")));
    }
    Ok(h)
}

/// CSV with header `x,u` on a uniform increasing grid.
pub fn read_signal_csv(path: &Path, interp: Interp) -> Result<Signal1D> {
    let rows = csv_records(path, &["x", "u"])?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let h = uniform_step(&xs, &path.display().to_string())?;
    Signal1D::new(xs[0], h, rows.iter().map(|r| r[1]).collect(), interp)
}

pub fn signal_csv(s: &Signal1D) -> String {
    let mut t = Table::new(&["x", "u"]);
    for (i, v) in s.samples().iter().enumerate() {
        t.push(vec![fmt_f(s.x(i)), fmt_f(*v)]);
    }
    t.to_csv()
}

pub fn write_signal_csv(path: &Path, s: &Signal1D) -> Result<()> {
    write_atomic(path, signal_csv(s).as_bytes())
}

/// CSV with header `x,y,u`, rows ordered with `x` fastest.
pub fn read_field_csv(path: &Path) -> Result<Field2D> {
    let rows = csv_records(path, &["x", "y", "u"])?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty grid", path.display())));
    }
    let nx = rows.iter().take_while(|r| r[1] == rows[0][1]).count();
    if nx < 2 || rows.len() % nx != 0 {
        return Err(Error::Parse(format!("{}: rows do not form a rectangular grid", path.display())));
    }
    let ny = rows.len() / nx;
    let xs: Vec<f64> = rows[..nx].iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = rows.iter().step_by(nx).map(|r| r[1]).collect();
    let name = path.display().to_string();
    let hx = uniform_step(&xs, &name)?;
    let hy = uniform_step(&ys, &name)?;
    for (k, r) in rows.iter().enumerate() {
        if r[0] != xs[k % nx] || r[1] != ys[k / nx] {
            return Err(Error::Parse(format!("{name}: row {} is off the grid", k + 1)));
        }
    }
    Field2D::new([xs[0], ys[0]], [hx, hy], nx, ny, rows.iter().map(|r| r[2]).collect())
}

pub fn field_csv(f: &Field2D) -> String {
    let (nx, ny) = f.dims();
    let mut t = Table::new(&["x", "y", "u"]);
    for j in 0..ny {
        for i in 0..nx {
            let p = f.position(i, j);
            t.push(vec![fmt_f(p[0]), fmt_f(p[1]), fmt_f(f.get(i, j))]);
        }
    }
    t.to_csv()
}

pub fn write_field_csv(path: &Path, f: &Field2D) -> Result<()> {
    write_atomic(path, field_csv(f).as_bytes())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// ASCII PGM (top row is the largest `y`) plus a `<file>.meta` sidecar with
/// the grid geometry and the gray-level range.
pub fn write_pgm(path: &Path, f: &Field2D) -> Result<()> {
    let (nx, ny) = f.dims();
    let lo = f.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = format!("P2\n{nx} {ny}\n{PGM_MAX}\n");
    for j in (0..ny).rev() {
        let row: Vec<String> = (0..nx)
            .map(|i| (((f.get(i, j) - lo) / span) * PGM_MAX as f64).round().to_string())
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())?;
    let meta = format!(
        "origin_x = {}\norigin_y = {}\nstep_x = {}\nstep_y = {}\nmin = {}\nmax = {}\n",
        fmt_f(f.origin()[0]),
        fmt_f(f.origin()[1]),
        fmt_f(f.step()[0]),
        fmt_f(f.step()[1]),
        fmt_f(lo),
        fmt_f(if hi > lo { hi } else { lo + 1.0 }),
    );
    write_atomic(&sidecar(path), meta.as_bytes())
}

/// Reads a P2 or P5 PGM. Without a sidecar the image covers the unit
/// square and gray levels map to `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<Field2D> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Parse(format!("{}: {m}", path.display()));
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| bad("empty file"))?;
    let mut num = |what: &str| -> Result<u32> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("{}: bad {what}", path.display())))
    };
    let (nx, ny, maxv) = (num("width")? as usize, num("height")? as usize, num("maxval")?);
    if nx < 2 || ny < 2 || maxv == 0 || maxv > PGM_MAX {
        return Err(bad("unsupported dimensions or maxval"));
    }
    let mut gray = Vec::with_capacity(nx * ny);
    match magic.as_str() {
        "P2" => {
            for _ in 0..nx * ny {
                gray.push(num("sample")?);
            }
        }
        "P5" => {
            let data = &bytes[pos + 1..];
            let width = if maxv > 255 { 2 } else { 1 };
            if data.len() < nx * ny * width {
                return Err(bad("truncated binary data"));
            }
            for k in 0..nx * ny {
                gray.push(if width == 2 {
                    u32::from(data[2 * k]) << 8 | u32::from(data[2 * k + 1])
                } else {
                    u32::from(data[k])
                });
            }
        }
        _ => return Err(bad("not a PGM file")),
    }
    if gray.iter().any(|g| *g > maxv) {
        return Err(bad("sample above maxval"));
    }
    let side = sidecar(path);
    let (origin, step, lo, hi) = if side.exists() {
        let c = Config::parse(&read(&side)?, ".")?;
        (
            [c.require::<f64>("origin_x")?, c.require::<f64>("origin_y")?],
            [c.require::<f64>("step_x")?, c.require::<f64>("step_y")?],
            c.require::<f64>("min")?,
            c.require::<f64>("max")?,
        )
    } else {
        ([0.0, 0.0], [1.0 / (nx - 1) as f64, 1.0 / (ny - 1) as f64], 0.0, 1.0)
    };
    let mut data = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let g = gray[(ny - 1 - j) * nx + i] as f64 / maxv as f64;
            data[j * nx + i] = lo + g * (hi - lo);
        }
    }
    Field2D::new(origin, step, nx, ny, data)
}

/// Dispatches on the extension: `.pgm` or CSV.
pub fn read_field(path: &Path) -> Result<Field2D> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_pgm(path),
        _ => read_field_csv(path),
    }
}

pub fn write_field(path: &Path, f: &Field2D) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => write_pgm(path, f),
        _ => write_field_csv(path, f),
    }
}

pub fn read_sbv(path: &Path) -> Result<Sbv1D> {
    read(path)?.parse()
}

pub fn write_sbv(path: &Path, u: &Sbv1D) -> Result<()> {
    write_atomic(path, u.to_string().as_bytes())
}

/// CSV with header `x,y`.
pub fn read_polyline(path: &Path) -> Result<Vec<[f64; 2]>> {
    Ok(csv_records(path, &["x", "y"])?.into_iter().map(|r| [r[0], r[1]]).collect())
}

pub fn write_polyline(path: &Path, pts: &[[f64; 2]]) -> Result<()> {
    let mut t = Table::new(&["x", "y"]);
    for p in pts {
        t.push(vec![fmt_f(p[0]), fmt_f(p[1])]);
    }
    t.write(path)
}

/// Samples any field on the grid of `like`.
pub fn resample(u: &dyn Field, like: &Field2D) -> Result<Field2D> {
    let (nx, ny) = like.dims();
    Field2D::from_fn(like.origin(), like.step(), nx, ny, |p| u.eval(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn signal_round_trip_is_lossless() {
        let d = tmp();
        let s = Signal1D::from_fn(-1.0, 0.1, 21, |x| (3.0 * x).sin() / 7.0).unwrap();
        let p = d.path().join("s.csv");
        write_signal_csv(&p, &s).unwrap();
        let back = read_signal_csv(&p, Interp::Linear).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert!((back.step() - 0.1).abs() < 1e-15);
        std::fs::write(&p, "x,u\n0,1\n1,2\n3,4\n").unwrap();
        assert!(read_signal_csv(&p, Interp::Linear).is_err());
        std::fs::write(&p, "t,u\n0,1\n1,2\n").unwrap();
        assert!(read_signal_csv(&p, Interp::Linear).is_err());
    }

    #[test]
    fn field_csv_round_trip() {
        let d = tmp();
        let f = Field2D::from_fn([-1.0, 0.5], [0.25, 0.5], 5, 4, |p| p[0] * p[1] + 0.1).unwrap();
        let p = d.path().join("f.csv");
        write_field(&p, &f).unwrap();
        assert_eq!(read_field(&p).unwrap(), f);
    }

    #[test]
    fn pgm_round_trip_within_quantization() {
        let d = tmp();
        let f = Field2D::from_fn([0.0, 0.0], [0.1, 0.2], 6, 3, |p| p[0] - 2.0 * p[1]).unwrap();
        let p = d.path().join("f.pgm");
        write_field(&p, &f).unwrap();
        let g = read_field(&p).unwrap();
        assert_eq!(g.dims(), f.dims());
        assert_eq!(g.step(), f.step());
        let span = 0.5 + 0.8;
        for (a, b) in f.data().iter().zip(g.data()) {
            assert!((a - b).abs() <= span / PGM_MAX as f64);
        }
        std::fs::remove_file(sidecar(&p)).unwrap();
        let h = read_pgm(&p).unwrap();
        assert!(h.data().iter().all(|v| (0.0..=1.0).contains(v)));
        std::fs::write(&p, b"P5\n2 2\n255\n\x00\x80\xff\x10").unwrap();
        let b = read_pgm(&p).unwrap();
        assert_eq!(b.get(0, 1), 0.0);
        assert_eq!(b.get(1, 0), 16.0 / 255.0);
    }

    #[test]
    fn sbv_and_polyline_round_trip() {
        let d = tmp();
        let u = Sbv1D::from_heights(vec![0.0, 1.0, 2.0], vec![0.5, -1.0], vec![(1.5, 2.0)], 0.3).unwrap();
        let p = d.path().join("u.sbv");
        write_sbv(&p, &u).unwrap();
        assert_eq!(read_sbv(&p).unwrap(), u);
        let pts = vec![[0.0, 1.0], [0.1, -1.0 / 3.0]];
        let q = d.path().join("c.csv");
        write_polyline(&q, &pts).unwrap();
        assert_eq!(read_polyline(&q).unwrap(), pts);
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_f(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f(f64::INFINITY), "inf");
        assert_eq!(fmt_f(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
