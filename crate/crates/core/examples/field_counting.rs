//! Prime-field arithmetic with operation counting. Products with 0 or ±1
//! are free; every addition costs one.

use hadamard_msr::{OpCounter, Phase, PrimeField};

fn main() -> hadamard_msr::Result<()> {
    let f = PrimeField::new(7)?;
    let (x, y) = (f.elem(5), f.elem(4));
    println!("5 + 4 = {}, 5 * 4 = {}, 1/5 = {}, -1 = {}", f.add(x, y), f.mul(x, y), f.inv(x)?, f.minus_one());

    let mut c = OpCounter::new();
    c.set_phase(Phase::Cancel);
    let s = f.add_counted(x, y, &mut c);
    let _ = f.mul_counted(s, f.minus_one(), &mut c);
    let _ = f.mul_counted(s, f.elem(3), &mut c);
    c.set_phase(Phase::Recover);
    let _ = f.sub_counted(s, x, &mut c);
    for phase in Phase::ALL {
        println!("{:>8}: {} adds, {} muls", phase.name(), c.adds_in(phase), c.muls_in(phase));
    }
    println!("total: {} adds, {} muls", c.adds(), c.muls());
    Ok(())
}
