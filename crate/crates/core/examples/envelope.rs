//! Envelope table for the double well along s e₁⊗e₁, written as CSV to stdout.

use lockstrain::energy::ScalarDensity;
use lockstrain::relaxation::{envelope_table, EnvelopeOptions, LaminateOptions, Region, Slice, WrelOptions};

fn main() {
    let w = ScalarDensity::double_well();
    let opts = EnvelopeOptions {
        wrel: WrelOptions {
            resolution: 8,
            ..WrelOptions::default()
        },
        laminate: LaminateOptions {
            depth: 2,
            ..LaminateOptions::default()
        },
    };
    let table = envelope_table(&w, &Slice::diagonal_line(2, 2.0, 9), &Region::ball(2.0).unwrap(), &opts).unwrap();
    table.write_csv(std::io::stdout()).unwrap();
    for v in table.check(1e-9) {
        eprintln!("violation: {v}");
    }
}
