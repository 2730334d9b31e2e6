//! Locking constraints and their admissible witnesses.

use lockstrain::energy::LockingConstraint;
use lockstrain::Matrix;

fn main() {
    let f = Matrix::from_rows3([[1.2, 0.3, 0.0], [0.0, 0.8, 0.0], [0.1, 0.0, 1.1]]);
    let constraints = [
        ("ball ϱ=2", LockingConstraint::ball(2.0).unwrap()),
        ("det ≥ 0.2", LockingConstraint::determinant(0.2).unwrap()),
        ("Ciarlet–Nečas ϱ=2", LockingConstraint::ciarlet_necas(2.0).unwrap()),
        ("Prager ϱ=1", LockingConstraint::prager(1.0).unwrap()),
    ];
    for (name, l) in constraints {
        let w = l.witness(3);
        println!(
            "{name:>18}: L(F) = {:+.4}, admissible {}, witness L = {:+.4}",
            l.eval(&f),
            l.admissible(&f),
            l.eval(&w)
        );
    }
}
