//! Exact failure probabilities on every small census formula, compared with
//! the closed-form bounds.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use flexcount::verify::{census, exhaustive_suite, reduced_grid};

fn main() -> flexcount::Result<()> {
    let formulas = census();
    let grid = reduced_grid();
    let rows = exhaustive_suite(&formulas, &grid)?;
    let violations: Vec<_> = rows.iter().filter(|r| !r.sound).collect();
    println!("{} formulas x {} parameter points: {} rows", formulas.len(), grid.len(), rows.len());
    let tightest = rows
        .iter()
        .map(|r| {
            let pr = r.pr_u.parse::<BigRational>().ok().and_then(|q| q.to_f64()).unwrap_or(0.0);
            (pr / r.p_u_bound, r)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((ratio, r)) = tightest {
        println!(
            "tightest U row: {} thresh {} eps {}: Pr[U] = {} against bound {:.4} ({:.0}%)",
            r.formula,
            r.thresh,
            r.eps,
            r.pr_u,
            r.p_u_bound,
            100.0 * ratio
        );
    }
    println!("violations: {}", violations.len());
    Ok(())
}
