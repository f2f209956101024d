//! Oracle-call budget of optimized against conventional parameters over a
//! range of tolerances.

use flexcount::optimize::{conventional_derived, optimal_parameters};

fn main() -> flexcount::Result<()> {
    let delta = 0.01;
    println!("{:>5} {:>12} {:>12} {:>6}", "eps", "optimized", "baseline", "ratio");
    for eps in [0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0] {
        let opt = optimal_parameters(eps, delta)?;
        let base = conventional_derived(eps, delta)?;
        println!(
            "{eps:>5} {:>12} {:>12} {:>6.2}",
            format!("{}x{}", opt.t_star, opt.thresh_star),
            format!("{}x{}", base.t_star, base.thresh_star),
            base.obj / opt.obj
        );
    }
    Ok(())
}
