//! The Sylvester matrix and the fast transform against a dense product.

use hadamard_msr::design::{fast_hadamard_apply, half_hadamard_apply, sylvester};
use hadamard_msr::{OpCounter, PrimeField};

fn main() -> hadamard_msr::Result<()> {
    let h = sylvester(3)?;
    for row in h.entries() {
        let line: Vec<&str> = row.iter().map(|&s| if s > 0 { " +" } else { " -" }).collect();
        println!("{}", line.concat());
    }

    let field = PrimeField::new(257)?;
    for k in 1..=10 {
        let n = 1usize << k;
        let z: Vec<_> = (0..n).map(|t| field.elem((t * t + 3) as i64)).collect();
        let mut counter = OpCounter::new();
        let fast = fast_hadamard_apply(&field, &z, &mut counter)?;
        let dense: Vec<_> = (0..n)
            .map(|r| {
                (0..n).fold(field.elem(0), |acc, c| {
                    let term = if (r & c).count_ones() % 2 == 0 { z[c] } else { field.neg(z[c]) };
                    field.add(acc, term)
                })
            })
            .collect();
        assert_eq!(fast, dense);
        let mut half = OpCounter::new();
        let doubled: Vec<_> = z.iter().chain(&z).copied().collect();
        half_hadamard_apply(&field, &doubled, true, &mut half)?;
        println!("k={k:2}: H_k z in {:5} adds (k 2^k = {:5}); (H -H) in {:5}", counter.adds(), k * n, half.adds());
    }
    Ok(())
}
