//! The prefix-nested XOR hash family: sample a member, slice it, and check
//! the cell sizes over the whole family for a small dimension.

use flexcount::hash::{enumerate_family, family_size, BitVec, XorHash};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> flexcount::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = XorHash::sample(6, &mut rng);
    println!("{}", h.dump());
    let x = BitVec::from_u64(0b101101, 6);
    for m in 1..=6 {
        println!("h_{m}(x) = {}", h.prefix_apply(m, &x)?);
    }

    // every x lands in cell alpha for exactly |family| / 2^m prefix slices
    let n = 3;
    let mut hits = vec![0u64; n + 1];
    for (h, alpha) in enumerate_family(n)? {
        for m in 1..=n {
            if h.prefix_value_u64(m, 0b011) == alpha.as_u64().expect("small") & ((1 << m) - 1) {
                hits[m] += 1;
            }
        }
    }
    for m in 1..=n {
        println!("m={m}: {} of {} members", hits[m], family_size(n));
        assert_eq!(hits[m] << m, family_size(n));
    }
    Ok(())
}
