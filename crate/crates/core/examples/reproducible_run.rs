//! Run an experiment through the command line entry point, then replay its
//! manifest with a different thread count.
//!
//! ```bash
//! cargo run --release --example reproducible_run
//! ```

use urank::experiments::reference;

fn main() -> urank::Result<()> {
    let dir = std::env::temp_dir().join("urank-reproducible-run");
    std::fs::create_dir_all(&dir).map_err(|e| urank::Error::Io { path: dir.clone(), source: e })?;
    let config = dir.join("wn.json");
    std::fs::write(&config, urank::io::to_json(&reference::wn_decay(50, 9))).expect("writable temp dir");

    let out = dir.join("out");
    let code = urank::cli::run([
        "urank", "--threads", "1", "experiment", "wn-decay",
        "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = urank::cli::replay(&out.join("manifest.json"), None)?;
    println!("{} outputs checked, {} mismatches", report.checked, report.mismatches.len());
    print!("{}", std::fs::read_to_string(out.join("summary.csv")).unwrap());
    Ok(())
}
