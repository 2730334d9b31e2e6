//! Writes the deformed and reference cubes as legacy VTK.

use std::path::PathBuf;

use lockstrain::app::figure1_export;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("figure1.vtk"));
    let s = figure1_export(100.0, &[8, 8, 8], &path).unwrap();
    println!("{} points, {} cells", s.points, s.cells);
    println!("{}\n{}", s.deformed.display(), s.reference.display());
}
