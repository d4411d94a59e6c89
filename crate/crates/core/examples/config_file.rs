//! Parses a run configuration, reports validation errors the way the
//! command line does, and prints the fully defaulted document.

use vla_accel::RunConfig;

const CUSTOM: &str = r#"
[scheduler]
tau = 0.6
lambda = 0.05

[pruning]
v_p_min = 0.45

[cost]
mode = "quadratic"

[sim]
episodes = 20
noise = 0.01
phase_durations = [10, 6, 20, 8]
"#;

fn main() {
    match RunConfig::parse(CUSTOM) {
        Ok(cfg) => print!("{}", cfg.to_toml()),
        Err(e) => eprintln!("unexpected: {e}"),
    }
    for bad in [
        "[scheduler]\nv_min = 0.6\n",
        "[scheduler]\nvmin = 0.1\n",
        "[sim]\nepisodes = 0\n",
    ] {
        match RunConfig::parse(bad) {
            Ok(_) => println!("accepted {bad:?}"),
            Err(e) => println!("rejected {bad:?}: {e} (exit code {})", e.exit_code()),
        }
    }
}
