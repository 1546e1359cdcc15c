//! Writes the three reference curves (no common randomness, unlimited common
//! randomness, no realism constraint) as CSV files.
//!
//! ```text
//! cargo run --example fig1_curves -- out/fig1
//! ```

use rdp_core::cli::{execute, Format, Invocation, Preset};
use rdp_core::CommonRate;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "fig1".into());
    let manifest = execute(
        &Invocation::Gauss {
            deltas: Vec::new(),
            rc: CommonRate::ZERO,
            curves: Some(Preset::Fig1),
            format: Format::Csv,
        },
        out.as_ref(),
    )?;
    for f in &manifest.outputs {
        println!("{out}/{f}");
    }
    Ok(())
}
