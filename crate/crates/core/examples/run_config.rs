//! Running a lab experiment from config text, as `freedisc run` does.

use freedisc::lab::{run_config, Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let text = "experiment = sweep1d\nsignal = heaviside\nfamily = arctanMS\neps = 0.1,0.05,0.025\noutput = sweep\n";
    let cfg = Config::parse(text, dir.path())?;
    let out = run_config(&cfg)?;
    print!("{}", out.summary);
    for f in ["results.csv", "meta.txt"] {
        println!("--- {f}");
        print!("{}", std::fs::read_to_string(out.output.join(f))?);
    }
    Ok(())
}
