//! Regenerates the HSF files under `fixtures/` from the deterministic
//! generators in `tipcast_core::fixtures`.
//!
//! Usage: `cargo run -p tipcast-core --example make_fixtures [out dir]`

use std::path::PathBuf;

use tipcast_core::{fixtures, hsf};

fn main() -> tipcast_core::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    for (name, set) in [
        ("immediate_standin.hsf", fixtures::immediate_standin()?),
        ("replay_basins.hsf", fixtures::replay_basins()?),
        ("replay_conversation.hsf", fixtures::replay_conversation()?),
    ] {
        let bytes = hsf::save(&set, dir.join(name))?;
        println!("{name}: {bytes} bytes");
    }
    Ok(())
}
