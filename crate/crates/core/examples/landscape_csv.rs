//! Write the reduced surface to a CSV file and report its minimum.
//!
//! `cargo run --release --example landscape_csv -- /tmp/landscape.csv`

use flexcount::optimize::{landscape, read_landscape_csv, write_landscape_csv, LandscapeGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "landscape.csv".into());
    let (eps, delta) = (0.4, 0.001);
    let rows = landscape(eps, delta, &LandscapeGrid::standard(eps))?;
    write_landscape_csv(&rows, std::fs::File::create(&out)?)?;

    let back = read_landscape_csv(std::fs::File::open(&out)?)?;
    assert_eq!(back.len(), rows.len());
    let best = rows.iter().filter(|r| r.obj.is_some()).min_by_key(|r| r.obj).expect("some finite row");
    println!("{} rows written to {out}", rows.len());
    println!(
        "minimum obj {} at thresh {}, a_U {:.4} (t {})",
        best.obj.unwrap(),
        best.thresh,
        best.a_u,
        best.t.unwrap()
    );
    Ok(())
}
