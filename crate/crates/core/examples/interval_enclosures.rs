//! Outward-rounded interval arithmetic and its failure modes.

use hbproof::interval::{f64_from_hex, f64_to_hex, CInterval, Interval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tenth = Interval::point(0.1);
    let mut sum = Interval::ZERO;
    for _ in 0..10 {
        sum += tenth;
    }
    println!("ten times 0.1     = {sum}  (contains 1: {})", sum.contains(1.0));

    let x = Interval::new(1.0, 2.0)?;
    println!("exp([1, 2])       = {}", x.exp());
    println!("sqrt([1, 2])      = {}", x.sqrt()?);
    println!("sin([1, 2])       = {}", x.sin());
    println!("[1, 2] / [3, 4]   = {}", x.try_div(Interval::new(3.0, 4.0)?)?);

    match x.try_div(Interval::new(-1.0, 1.0)?) {
        Ok(q) => println!("unexpected quotient {q}"),
        Err(e) => println!("division by [-1, 1] refused: {e}"),
    }

    let z = CInterval::cis(Interval::point(0.75));
    println!("|exp(0.75 i)|^2   = {}", z.norm_sqr());

    let h = f64_to_hex(std::f64::consts::PI);
    println!("pi as stored      = {h}, round trip exact: {}", f64_from_hex(&h)? == std::f64::consts::PI);
    Ok(())
}
