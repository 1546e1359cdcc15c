//! Rate needed by a unit-variance Gaussian source under squared error as the
//! common randomness budget grows.

use rdp_core::gaussian::{point, rate_classical};
use rdp_core::CommonRate;

fn main() -> rdp_core::Result<()> {
    let budgets = [
        CommonRate::ZERO,
        CommonRate::Finite(0.25),
        CommonRate::Finite(1.0),
        CommonRate::Infinite,
    ];
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "delta", "rc", "rho", "rho~", "rate");
    for delta in [0.1, 0.5, 1.0, 1.5] {
        for rc in budgets {
            let p = point(delta, rc)?;
            println!("{:>6} {:>8} {:>8.5} {:>8.5} {:>8.5}", delta, rc.to_string(), p.rho, p.rho_tilde, p.rate);
        }
        println!("{:>6} {:>8} {:>8} {:>8} {:>8.5}", delta, "classic", "", "", rate_classical(delta)?);
    }
    Ok(())
}
