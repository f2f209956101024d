//! Count a DIMACS file in both modes and compare with the exact count.
//!
//! `cargo run --release --example count_dimacs -- examples/data/units15.cnf`

use flexcount::cnf::{count_exact, parse_dimacs};
use flexcount::counter::{approx_count, Mode, RunConfig};
use flexcount::verify::empirical_error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/units15.cnf").into());
    let f = parse_dimacs(&std::fs::read_to_string(&path)?)?;
    let exact = count_exact(&f)?;
    println!("{path}: {} vars, {} sampling vars, exact {exact}", f.num_vars(), f.sampling_set().len());

    for mode in [Mode::FlexMc, Mode::ApproxMc6] {
        let (est, meta) = approx_count(&f, &RunConfig::new(0.8, 0.001, mode, 7))?;
        println!(
            "{mode:?}: estimate {est:.1} (error {:.3}), thresh {}, t {}, path {:?}",
            empirical_error(exact, est)?,
            meta.thresh,
            meta.t,
            meta.path
        );
    }
    Ok(())
}
