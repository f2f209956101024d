//! Optimized and conventional parameters side by side.
//!
//! `cargo run --example optimize_params -- 0.8 0.001`

use flexcount::optimize::{conventional_parameters, optimal_parameters};

fn main() -> flexcount::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(0.8, |s| s.parse().expect("epsilon"));
    let delta: f64 = args.next().map_or(0.001, |s| s.parse().expect("delta"));

    let opt = optimal_parameters(eps, delta)?;
    let conv = conventional_parameters(eps, delta)?;
    println!("(eps, delta) = ({eps}, {delta})");
    println!("{:<10} {:>7} {:>5} {:>9} {:>8} {:>8} {:>8}", "", "thresh", "t", "rnd", "p_L", "p_U", "obj");
    for (name, p) in [("optimized", &opt), ("baseline", &conv)] {
        println!(
            "{name:<10} {:>7} {:>5} {:>9.3} {:>8.5} {:>8.5} {:>8}",
            p.thresh_star, p.t_star, p.rnd_star, p.p_l, p.p_u, p.obj
        );
    }
    println!("obj ratio {:.2}", conv.obj / opt.obj);
    assert!(opt.is_sound());
    Ok(())
}
