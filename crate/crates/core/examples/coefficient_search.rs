//! Smallest usable modulus per k, and coefficients that make more repair
//! multiplications free.

use hadamard_msr::codec::{smallest_valid_modulus, validate_coefficients};
use hadamard_msr::metering::{search_low_mul, total_new_muls};
use hadamard_msr::CodeParams;

fn main() -> hadamard_msr::Result<()> {
    validate_coefficients(2, 7, &[1, 1], &[3, 4])?;
    validate_coefficients(3, 11, &[2, 2, 6], &[7, 4, 2])?;
    println!("published coefficients are valid");

    for k in 2..=8 {
        let q = smallest_valid_modulus(k)?;
        let p = CodeParams::search_with_modulus(k, q)?;
        let a: Vec<u32> = p.a().iter().map(|x| x.value()).collect();
        let b: Vec<u32> = p.b().iter().map(|x| x.value()).collect();
        println!("k={k}: q={q} a={a:?} b={b:?}");
    }

    for (k, q) in [(2, 7), (3, 11), (3, 13)] {
        let first = CodeParams::search_with_modulus(k, q)?;
        if let Some((best, muls)) = search_low_mul(k, q, 200)? {
            let a: Vec<u32> = best.a().iter().map(|x| x.value()).collect();
            let b: Vec<u32> = best.b().iter().map(|x| x.value()).collect();
            println!(
                "k={k} q={q}: first set needs {} muls over all repairs, a={a:?} b={b:?} needs {muls}",
                total_new_muls(&first)?
            );
        }
    }
    Ok(())
}
