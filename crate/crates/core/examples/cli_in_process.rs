//! Runs a CLI configuration in-process and prints the text report.
use ionchain::cli::config::parse_config;
use ionchain::cli::format::Fmt;
use ionchain::cli::{execute, Command};

fn main() -> ionchain::Result<()> {
    let text = r#"{
        "version": 1,
        "chain": ["MgH", "MgH"],
        "potential": { "axial_mhz": 1.8, "radial_mhz": [7.0, 5.0], "reference": "MgH" }
    }"#;
    let cfg = parse_config(text, &["potential.axial_mhz=2.0".to_string()])?;
    let report = execute(Command::Chi, &cfg, Fmt { digits: 6 })?;
    print!("{}", report.text);
    Ok(())
}
