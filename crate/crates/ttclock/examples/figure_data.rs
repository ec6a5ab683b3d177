//! Builds the CSV data behind a figure preset without going through the
//! binary.
//!
//! ```bash
//! cargo run --example figure_data -- fig2b
//! ```

use ttclock::cli::{figure_preset, run_sweep, write_sweep_csv};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig2a".into());
    let config = match figure_preset(&name) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let result = run_sweep(&config, &config.outputs).expect("sweep");
    let mut stdout = std::io::stdout().lock();
    write_sweep_csv(&mut stdout, &result).expect("write");
}
