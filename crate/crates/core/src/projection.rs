//! Jones-calculus model of the two-beam analysis head.
//!
//! Each beam passes a quarter-wave plate at angle `q` and a half-wave plate
//! at angle `h` before a polarizer. Angles are radians here; degree
//! conversions happen at I/O boundaries.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use crate::error::{Result, TomoError};
use crate::linalg::{kron_vec, ComplexMatrix, C64, I, ONE, ZERO};

/// Single-beam ket in the `{H, V}` basis.
pub type Ket2 = [C64; 2];

/// Four waveplate angles for one two-photon measurement, radians in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub h1: f64,
    pub q1: f64,
    pub h2: f64,
    pub q2: f64,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

impl WaveplateSetting {
    pub fn new(h1: f64, q1: f64, h2: f64, q2: f64) -> Result<Self> {
        Self::from_array([h1, q1, h2, q2])
    }

    pub fn from_degrees(h1: f64, q1: f64, h2: f64, q2: f64) -> Result<Self> {
        Self::new(
            h1.to_radians(),
            q1.to_radians(),
            h2.to_radians(),
            q2.to_radians(),
        )
    }

    /// Angles in the order `(h1, q1, h2, q2)`.
    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(TomoError::InvalidInput(format!(
                "waveplate angles must be finite, got {a:?}"
            )));
        }
        Ok(Self {
            h1: wrap(a[0]),
            q1: wrap(a[1]),
            h2: wrap(a[2]),
            q2: wrap(a[3]),
        })
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.h1, self.q1, self.h2, self.q2]
    }

    pub fn to_degrees(&self) -> [f64; 4] {
        self.to_array().map(f64::to_degrees)
    }
}

/// A tomographic analysis state with the setting that produces it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionState {
    /// Amplitudes on `|HH>, |HV>, |VH>, |VV>`.
    pub ket: [C64; 4],
    pub setting: WaveplateSetting,
    pub label: String,
}

impl ProjectionState {
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.ket)
    }

    /// `<psi|rho|psi>`, real part.
    pub fn probability(&self, rho: &ComplexMatrix) -> f64 {
        rho.expectation(&self.ket).re
    }
}

impl fmt::Display for ProjectionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.setting.to_degrees();
        write!(
            f,
            "{} (h1={:.2}, q1={:.2}, h2={:.2}, q2={:.2})",
            self.label, d[0], d[1], d[2], d[3]
        )
    }
}

pub const KET_H: Ket2 = [ONE, ZERO];
pub const KET_V: Ket2 = [ZERO, ONE];
/// `(|H> + |V>)/sqrt 2`, the diagonal state used by the 16-state design.
pub const KET_D: Ket2 = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
/// `(|H> - |V>)/sqrt 2`, the diagonal state used by the Stokes designs.
pub const KET_D_BAR: Ket2 = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)];
/// `(|H> - i|V>)/sqrt 2`
pub const KET_R: Ket2 = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2)];
/// `(|H> + i|V>)/sqrt 2`
pub const KET_L: Ket2 = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)];

/// Quarter-wave plate with fast axis at `q`.
pub fn qwp_matrix(q: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * q).sin_cos();
    let k = FRAC_1_SQRT_2;
    ComplexMatrix::from_rows(&[
        [(I - c) * k, C64::new(s * k, 0.0)],
        [C64::new(s * k, 0.0), (I + c) * k],
    ])
}

/// Half-wave plate with fast axis at `h`.
pub fn hwp_matrix(h: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * h).sin_cos();
    ComplexMatrix::from_real_rows(&[[c, -s], [-s, -c]])
}

/// Amplitudes `(a, b)` of the single-beam state `U_QWP(q) U_HWP(h) |V>`, up to
/// a global phase:
///
/// `a = (sin 2h + i sin 2(h-q)) / sqrt 2`, `b = (cos 2h - i cos 2(h-q)) / sqrt 2`.
pub fn single_beam_state(h: f64, q: f64) -> (C64, C64) {
    let k = FRAC_1_SQRT_2;
    let a = C64::new((2.0 * h).sin(), (2.0 * (h - q)).sin()) * k;
    let b = C64::new((2.0 * h).cos(), -(2.0 * (h - q)).cos()) * k;
    (a, b)
}

/// `[(da/dh, db/dh), (da/dq, db/dq)]` for [`single_beam_state`].
fn single_beam_gradient(h: f64, q: f64) -> [(C64, C64); 2] {
    let k = 2.0 * FRAC_1_SQRT_2;
    let (s2h, c2h) = (2.0 * h).sin_cos();
    let (s2d, c2d) = (2.0 * (h - q)).sin_cos();
    let da_dh = C64::new(c2h, c2d) * k;
    let db_dh = C64::new(-s2h, s2d) * k;
    let da_dq = C64::new(0.0, -c2d) * k;
    let db_dq = C64::new(0.0, -s2d) * k;
    [(da_dh, db_dh), (da_dq, db_dq)]
}

/// [`single_beam_state`] as a ket.
pub fn analysis_ket(h: f64, q: f64) -> Ket2 {
    let (a, b) = single_beam_state(h, q);
    [a, b]
}

fn analysis_ket_gradient(h: f64, q: f64) -> [Ket2; 2] {
    single_beam_gradient(h, q).map(|(da, db)| [da, db])
}

/// Tensor product of the two beams' analysis kets.
pub fn two_photon_ket(s: &WaveplateSetting) -> [C64; 4] {
    let k = kron_vec(&analysis_ket(s.h1, s.q1), &analysis_ket(s.h2, s.q2));
    [k[0], k[1], k[2], k[3]]
}

pub fn two_photon_state(s: &WaveplateSetting) -> ProjectionState {
    let label = format!(
        "{}{}",
        single_label(&analysis_ket(s.h1, s.q1)),
        single_label(&analysis_ket(s.h2, s.q2))
    );
    ProjectionState {
        ket: two_photon_ket(s),
        setting: *s,
        label,
    }
}

/// Name of a single-beam ket if it matches one of the six cardinal states.
fn single_label(k: &Ket2) -> &'static str {
    const NAMES: [(&str, Ket2); 6] = [
        ("H", KET_H),
        ("V", KET_V),
        ("D", KET_D),
        ("A", KET_D_BAR),
        ("R", KET_R),
        ("L", KET_L),
    ];
    for (name, ket) in NAMES {
        let ov = (ket[0].conj() * k[0] + ket[1].conj() * k[1]).norm();
        if (ov - 1.0).abs() < 1e-9 {
            return name;
        }
    }
    "?"
}

/// `d|psi>/d theta_i` for `theta = (h1, q1, h2, q2)`.
pub fn state_angle_derivatives(s: &WaveplateSetting) -> [[C64; 4]; 4] {
    let k1 = analysis_ket(s.h1, s.q1);
    let k2 = analysis_ket(s.h2, s.q2);
    let [d1h, d1q] = analysis_ket_gradient(s.h1, s.q1);
    let [d2h, d2q] = analysis_ket_gradient(s.h2, s.q2);
    let pack = |a: &Ket2, b: &Ket2| {
        let v = kron_vec(a, b);
        [v[0], v[1], v[2], v[3]]
    };
    [
        pack(&d1h, &k2),
        pack(&d1q, &k2),
        pack(&k1, &d2h),
        pack(&k1, &d2q),
    ]
}

/// Waveplate angles in degrees `(h1, q1, h2, q2)` and labels of the standard
/// 16-state two-qubit design.
pub const TABLE1_DEGREES: [(&str, [f64; 4]); 16] = [
    ("HH", [45.0, 0.0, 45.0, 0.0]),
    ("HV", [45.0, 0.0, 0.0, 0.0]),
    ("VV", [0.0, 0.0, 0.0, 0.0]),
    ("VH", [0.0, 0.0, 45.0, 0.0]),
    ("RH", [22.5, 0.0, 45.0, 0.0]),
    ("RV", [22.5, 0.0, 0.0, 0.0]),
    ("DV", [22.5, 45.0, 0.0, 0.0]),
    ("DH", [22.5, 45.0, 45.0, 0.0]),
    ("DR", [22.5, 45.0, 22.5, 0.0]),
    ("DD", [22.5, 45.0, 22.5, 45.0]),
    ("RD", [22.5, 0.0, 22.5, 45.0]),
    ("HD", [45.0, 0.0, 22.5, 45.0]),
    ("VD", [0.0, 0.0, 22.5, 45.0]),
    ("VL", [0.0, 0.0, 22.5, 90.0]),
    ("HL", [45.0, 0.0, 22.5, 90.0]),
    ("RL", [22.5, 0.0, 22.5, 90.0]),
];

/// The standard 16 analysis states, in design order.
pub fn table1_states() -> Vec<ProjectionState> {
    TABLE1_DEGREES
        .iter()
        .map(|(label, d)| {
            let s = WaveplateSetting::from_degrees(d[0], d[1], d[2], d[3])
                .expect("table angles are finite");
            ProjectionState {
                ket: two_photon_ket(&s),
                setting: s,
                label: (*label).to_string(),
            }
        })
        .collect()
}
