//! Named states and report-derived states for the `simulate` subcommand.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use anyhow::{bail, Context};
use tomo_core::linalg::{ONE, ZERO};
use tomo_core::{ComplexMatrix, DensityMatrix, C64};

use crate::report::AnalysisReport;

pub const STATE_NAMES: &str =
    "hh, vv, dd, phi-plus, phi-minus, psi-plus, psi-minus, mixed, werner:P";

fn bell(a: usize, b: usize, sign: f64) -> DensityMatrix {
    let mut v = [ZERO; 4];
    v[a] = ONE * FRAC_1_SQRT_2;
    v[b] = C64::new(sign * FRAC_1_SQRT_2, 0.0);
    DensityMatrix::pure(&v).expect("normalized")
}

/// Parse a state name; `werner:P` is `P |psi-><psi-| + (1 - P) I/4`.
pub fn named_state(name: &str) -> anyhow::Result<DensityMatrix> {
    let lower = name.trim().to_ascii_lowercase();
    let basis = |k: usize| {
        let mut v = [ZERO; 4];
        v[k] = ONE;
        DensityMatrix::pure(&v).expect("normalized")
    };
    Ok(match lower.as_str() {
        "hh" => basis(0),
        "vv" => basis(3),
        "dd" => DensityMatrix::pure(&[ONE * 0.5; 4])?,
        "phi-plus" => bell(0, 3, 1.0),
        "phi-minus" => bell(0, 3, -1.0),
        "psi-plus" => bell(1, 2, 1.0),
        "psi-minus" => bell(1, 2, -1.0),
        "mixed" => DensityMatrix::maximally_mixed(4),
        _ => match lower.strip_prefix("werner:") {
            Some(p) => {
                let p: f64 = p
                    .parse()
                    .with_context(|| format!("werner weight `{p}` is not a number"))?;
                if !(0.0..=1.0).contains(&p) {
                    bail!("werner weight must lie in [0, 1], got {p}");
                }
                let singlet = bell(1, 2, -1.0);
                let m = &singlet.matrix().scale_real(p)
                    + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
                DensityMatrix::new(m)?
            }
            None => bail!("unknown state `{name}`; expected one of {STATE_NAMES}"),
        },
    })
}

/// The maximum-likelihood estimate of a saved JSON report, or its linear
/// estimate when no fit was run.
pub fn state_from_report(path: &Path) -> anyhow::Result<DensityMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report: AnalysisReport = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a tomo-report/1 document", path.display()))?;
    let m = report
        .mle
        .as_ref()
        .map_or(&report.linear.rho, |m| &m.rho)
        .to_complex_matrix()
        .context("report matrix has inconsistent dimensions")?;
    let rho = DensityMatrix::new(m.hermitian_part())?;
    if !rho.is_physical() {
        bail!(
            "the state in {} is not physical (min eigenvalue {:.3e})",
            path.display(),
            rho.min_eigenvalue()
        );
    }
    Ok(rho)
}
