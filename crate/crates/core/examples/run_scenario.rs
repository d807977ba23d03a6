//! Runs a scenario from the library, with overrides, and writes its CSV
//! tables to a temporary directory.
//!
//! ```text
//! cargo run --example run_scenario -- fig4 atoms.n=400
//! ```

use cqed_lab::scenario::{run, write_tables, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "cavity-report".to_string());
    let result = (|| {
        let mut config = ScenarioConfig::preset(&name)?;
        for a in args {
            config.apply(&a)?;
        }
        let tables = run(&config)?;
        for t in &tables {
            println!("{}: {} rows x {} columns", t.name, t.rows.len(), t.columns.len());
        }
        let dir = std::env::temp_dir().join(format!("cqed-lab-{name}"));
        write_tables(&dir, &config, &tables)
    })();
    match result {
        Ok(paths) => paths.iter().for_each(|p| println!("wrote {}", p.display())),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
