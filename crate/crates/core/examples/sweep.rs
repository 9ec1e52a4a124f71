//! A reduced measurement sweep written to `sweep-example/` (CSV, plot data,
//! gnuplot script and JSON).

use std::path::Path;

use groupsparse::bench::{sweep, write_outputs, OverlapMode, SweepConfig};
use groupsparse::recovery::Variant;

fn main() {
    let mut reports = Vec::new();
    for n in [100, 150] {
        let config = SweepConfig {
            variants: vec![Variant::Meiht, Variant::AmEiht],
            trials: 5,
            ..SweepConfig::new(n, OverlapMode::Half, 3)
        };
        let report = sweep(&config).unwrap();
        for (v, m) in &report.m_sharp {
            println!("N={n} {v}: m# = {m:?}");
        }
        reports.push(report);
    }
    let out = Path::new("sweep-example");
    for path in write_outputs(&reports, out, true).unwrap() {
        println!("wrote {}", path.display());
    }
}
