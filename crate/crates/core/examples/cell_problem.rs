//! Periodic-free cell problem for the double well at A = 0, with a warm-started refinement.

use lockstrain::energy::ScalarDensity;
use lockstrain::fem::{prolongate, BoxMesh};
use lockstrain::relaxation::{winf_cell, CellProblem};
use lockstrain::Matrix;

fn main() {
    let w = ScalarDensity::double_well();
    let a = Matrix::zeros(2);
    let coarse = winf_cell(&w, &CellProblem::ball(a, 2.0, 8).unwrap()).unwrap();
    println!(
        "8×8:   W^inf ≈ {:.5} ({} iterations, max |A+∇φ|/ϱ {:.3})",
        coarse.value, coarse.iterations, coarse.max_gauge
    );
    let warm = prolongate(&coarse.mesh, &coarse.phi, &BoxMesh::unit(2, 16).unwrap()).unwrap();
    let fine = winf_cell(&w, &CellProblem::ball(a, 2.0, 16).unwrap().with_initial(warm)).unwrap();
    println!("16×16: W^inf ≈ {:.5} ({} iterations)", fine.value, fine.iterations);
}
