//! Closed-form detector intensities and intensity products, independent of
//! the circuit evaluator, used as golden references throughout the test
//! suites and by the CLI scan commands.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("unknown detector id `{0}`")]
    UnknownDetector(String),
}

/// Angles and scale entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EraserParams {
    /// Interferometer arm phase (radians).
    pub phi: f64,
    /// Quarter-wave plate parameter (radians).
    pub xi: f64,
    /// Polarizer angles (radians): D1, D2, D3-family, D4-family.
    pub theta: f64,
    pub psi: f64,
    pub eta: f64,
    pub zeta: f64,
    /// Source intensity scale.
    pub i0: f64,
}

impl Default for EraserParams {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_4;
        EraserParams {
            phi: 0.0,
            xi: 0.0,
            theta: FRAC_PI_4,
            psi: FRAC_PI_4,
            eta: FRAC_PI_4,
            zeta: FRAC_PI_4,
            i0: 1.0,
        }
    }
}

/// Which closed-form detector curve to evaluate. The `Q` variants include the
/// quarter-wave plate at ξ = 0; the `Qxi` variants keep ξ free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FringeForm {
    D1,
    D2,
    D3,
    D4,
    D3Prime,
    D4Prime,
    D1Q,
    D2Q,
    D1Qxi,
    D2Qxi,
}

impl FringeForm {
    pub fn parse(name: &str) -> Result<Self, AnalyticError> {
        Ok(match name {
            "D1" => FringeForm::D1,
            "D2" => FringeForm::D2,
            "D3" => FringeForm::D3,
            "D4" => FringeForm::D4,
            "D3'" => FringeForm::D3Prime,
            "D4'" => FringeForm::D4Prime,
            "D1Q" => FringeForm::D1Q,
            "D2Q" => FringeForm::D2Q,
            "D1Qxi" => FringeForm::D1Qxi,
            "D2Qxi" => FringeForm::D2Qxi,
            other => return Err(AnalyticError::UnknownDetector(other.to_string())),
        })
    }
}

/// Mean first-order intensity at one detector.
///
/// Without the wave plate the fringes are `(I0/16)(1 ∓ sin2α·cosφ)`; with it
/// they become `(I0/16)(1 ± sin2α·sin(φ + 4ξ))`, i.e. the plate converts the
/// cosine fringe into a sine fringe and ξ slides it by 4ξ. The second
/// detector of each pair uses its own polarizer angle with the opposite
/// fringe sign.
pub fn intensity_first_order(p: &EraserParams, detector: FringeForm) -> f64 {
    let base = p.i0 / 16.0;
    let cos = p.phi.cos();
    match detector {
        FringeForm::D1 => base * (1.0 - (2.0 * p.theta).sin() * cos),
        FringeForm::D2 => base * (1.0 + (2.0 * p.psi).sin() * cos),
        FringeForm::D3 | FringeForm::D3Prime => base * (1.0 - (2.0 * p.eta).sin() * cos),
        FringeForm::D4 | FringeForm::D4Prime => base * (1.0 + (2.0 * p.zeta).sin() * cos),
        FringeForm::D1Q => base * (1.0 + (2.0 * p.theta).sin() * p.phi.sin()),
        FringeForm::D2Q => base * (1.0 - (2.0 * p.psi).sin() * p.phi.sin()),
        FringeForm::D1Qxi => {
            base * (1.0 + (2.0 * p.theta).sin() * (p.phi + 4.0 * p.xi).sin())
        }
        FringeForm::D2Qxi => {
            base * (1.0 - (2.0 * p.psi).sin() * (p.phi + 4.0 * p.xi).sin())
        }
    }
}

/// Two-photon normalization: a factor √2 on each of the two fields, hence 4
/// on the intensity product.
const TWO_PHOTON_NORM: f64 = 4.0;
/// Four-photon normalization: a factor 2 on each of the four fields, hence
/// 256 on the intensity product.
const FOUR_PHOTON_NORM: f64 = 256.0;

/// Second-order product of the two plate-side erasers. At the balanced point
/// (θ = ψ = π/4, ξ = 0) this reduces to `(I0²/64)·cos²φ`; away from it the
/// value is the plain normalized product of the first-order forms.
pub fn product_second_order(p: &EraserParams) -> f64 {
    TWO_PHOTON_NORM
        * intensity_first_order(p, FringeForm::D1Qxi)
        * intensity_first_order(p, FringeForm::D2Qxi)
}

/// Fourth-order product over all four erasers. At the balanced point this is
/// `(I0⁴/256)·sin²φ·cos²φ`.
pub fn product_fourth_order(p: &EraserParams) -> f64 {
    FOUR_PHOTON_NORM
        * intensity_first_order(p, FringeForm::D1Qxi)
        * intensity_first_order(p, FringeForm::D2Qxi)
        * intensity_first_order(p, FringeForm::D3)
        * intensity_first_order(p, FringeForm::D4)
}

/// Gated-heterodyne coincidence rate after the cross-polarization basis
/// selection: `(I0²/64)·sin²(θ−ψ)`, independent of φ.
pub fn heterodyne_coincidence(p: &EraserParams) -> f64 {
    p.i0 * p.i0 / 64.0 * (p.theta - p.psi).sin().powi(2)
}
