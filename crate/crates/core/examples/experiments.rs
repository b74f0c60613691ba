//! Running the three experiments programmatically, as the binary does.

use std::path::Path;

use nystrompca::{run_experiment, Bandwidth, Command, ExperimentConfig, KernelChoice};

fn main() -> nystrompca::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let out = std::env::temp_dir().join("nystrompca_example_results");
    let kernel = KernelChoice { bandwidth: Bandwidth::Median, ..KernelChoice::default() };

    let mut methods = ExperimentConfig::new(Command::Methods, data.join("fair.csv"), out.join("methods"));
    methods.target = Some("affairs".into());
    methods.limit = Some(600);
    methods.m = 50;
    methods.kernel = kernel;

    let mut bound = ExperimentConfig::new(Command::Bound, data.join("digits.csv"), out.join("bound"));
    bound.target = Some("digit".into());
    bound.limit = Some(500);
    bound.m = 50;
    bound.samples = 20;

    let mut regression = ExperimentConfig::new(Command::Regression, data.join("diabetes.csv"), out.join("regression"));
    regression.target = Some("progression".into());
    regression.kernel = kernel;
    regression.d = 20;
    regression.gamma = 1e-3;
    regression.d_grid = vec![5, 10, 20, 40];

    for config in [methods, bound, regression] {
        println!("== {:?}", config.command);
        let summary = run_experiment(&config)?;
        print!("{}", summary.message);
        for f in summary.files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
