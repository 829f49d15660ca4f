//! Writing and reading fields, signals and piecewise descriptions.

use freedisc::energy_1d::{Interp, Signal1D};
use freedisc::energy_nd::Field2D;
use freedisc::lab::io;
use freedisc::limit_energy::Sbv1D;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let f = Field2D::from_fn([0.0, 0.0], [0.1, 0.1], 11, 11, |p| p[0] * p[1])?;
    let pgm = dir.path().join("field.pgm");
    io::write_pgm(&pgm, &f)?;
    let back = io::read_pgm(&pgm)?;
    println!("pgm round trip L1 error {:.2e} (16-bit quantization)", back.l1_distance(&f, None)?);
    let csv = dir.path().join("field.csv");
    io::write_field_csv(&csv, &f)?;
    println!("csv round trip L1 error {:.2e}", io::read_field_csv(&csv)?.l1_distance(&f, None)?);

    let s = Signal1D::from_fn(-1.0, 0.25, 9, |x| x.abs())?;
    let sp = dir.path().join("signal.csv");
    io::write_signal_csv(&sp, &s)?;
    print!("{}", io::signal_csv(&io::read_signal_csv(&sp, Interp::Linear)?));

    let u = Sbv1D::from_heights(vec![0.0, 0.5, 1.0], vec![1.0, -1.0], vec![(0.25, 2.0)], 0.0)?;
    let up = dir.path().join("u.sbv");
    io::write_sbv(&up, &u)?;
    print!("{}", io::read_sbv(&up)?);
    Ok(())
}
