//! Solve a small geometric program: the largest box volume under wall and
//! floor area limits and an aspect-ratio range.

use nacl::gp::{solve_gp, Monomial, Posynomial};
use nacl::{GeometricProgram, SolverOptions};

fn main() -> nacl::Result<()> {
    let mut gp = GeometricProgram::new();
    let h = gp.add_variable("h");
    let w = gp.add_variable("w");
    let d = gp.add_variable("d");

    // maximize h*w*d by minimizing its inverse
    gp.set_objective(Monomial::new(1.0)?.pow(h, -1.0).pow(w, -1.0).pow(d, -1.0));
    let walls = Posynomial::new(vec![
        Monomial::new(2.0 / 100.0)?.pow(h, 1.0).pow(w, 1.0),
        Monomial::new(2.0 / 100.0)?.pow(h, 1.0).pow(d, 1.0),
    ])?;
    gp.add_inequality(walls, "wall area <= 100");
    gp.add_inequality(Monomial::new(1.0 / 10.0)?.pow(w, 1.0).pow(d, 1.0), "floor area <= 10");
    gp.add_inequality(Monomial::new(0.5)?.pow(w, 1.0).pow(h, -1.0), "h >= w / 2");
    gp.add_inequality(Monomial::new(0.5)?.pow(h, 1.0).pow(w, -1.0), "h <= 2 w");
    print!("{gp}");

    let sol = solve_gp(&gp, &SolverOptions::default())?;
    println!("status {:?} after {} Newton steps", sol.status, sol.iterations);
    println!(
        "h = {:.4}, w = {:.4}, d = {:.4}, volume = {:.4}",
        sol.values[0],
        sol.values[1],
        sol.values[2],
        1.0 / sol.objective
    );
    println!("duality gap {:e}", sol.kkt.duality_gap);
    Ok(())
}
