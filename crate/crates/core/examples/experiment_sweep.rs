//! Drive the batch front end from code: a jammer-power sweep of the Gaussian
//! capacity, written to a temporary directory.

use avc_sim::experiment::{run, Command, Overrides};

fn main() {
    let dir = std::env::temp_dir().join("avc-sim-sweep-example");
    let config = dir.join("sweep.conf");
    std::fs::create_dir_all(&dir).expect("temp dir");
    std::fs::write(
        &config,
        "mode = capacity-dp\n[channel]\npower = 3\n[sweep]\naxis = channel.lambda\nvalues = 0, 0.5, 1, 2, 4\n",
    )
    .expect("write config");
    let overrides = Overrides { config: Some(config), out: Some(dir.join("out")), plot: true, ..Overrides::default() };
    match run(Command::Sweep, &overrides) {
        Ok(outcome) => {
            let csv = std::fs::read_to_string(outcome.out_dir.join("sweep.csv")).expect("sweep.csv");
            print!("{csv}");
            println!("wrote {:?} to {}", outcome.files, outcome.out_dir.display());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
