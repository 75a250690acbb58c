//! Shared inputs for the benchmarks under `benches/`.

use tomo_core::{CountRecord, DensityMatrix, TomographySet};

pub const PAPER_COUNTS: [f64; 16] = [
    34749.0, 324.0, 35805.0, 444.0, 16324.0, 17521.0, 13441.0, 16901.0, 17932.0, 32028.0, 15132.0,
    17238.0, 13171.0, 17170.0, 16722.0, 33586.0,
];

pub fn paper_record() -> CountRecord {
    CountRecord::with_table1(PAPER_COUNTS.to_vec()).expect("sixteen finite counts")
}

/// Expected counts of `rho` on the standard design.
pub fn noiseless_record(rho: &DensityMatrix, flux: f64) -> CountRecord {
    let set = TomographySet::table1();
    let counts = set
        .probabilities(rho.matrix())
        .into_iter()
        .map(|s| s * flux)
        .collect();
    CountRecord::with_table1(counts).expect("nonnegative counts")
}
