//! Transfer actions of the optical components: beam splitters, wave plates,
//! polarizers, phase shifters, and the frequency-tagging AOM pair.
//!
//! Sign conventions: the nonpolarizing splitter is the symmetric unitary
//! `[[1, i], [i, 1]]/√2`; the polarizing splitter transmits H unchanged and
//! reflects V with a phase of `i`; mirrors are amplitude no-ops.

use crate::optics::{FieldState, ModeState, OpticsError, TagLabel, Wave};
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Wrap an angle parameter into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// One optical component acting on named spatial modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Neutral-density filter: scalar amplitude transmission `0 < t ≤ 1`.
    Nd { mode: String, transmission: f64 },
    /// Half-wave plate with fast axis at `angle`.
    Hwp { mode: String, angle: f64 },
    /// Quarter-wave plate, slow axis horizontal, parameterized by `xi`.
    Qwp { mode: String, xi: f64 },
    /// Piezo-driven path phase `phi` on one arm.
    Pzt { mode: String, phi: f64 },
    /// Fold mirror; contributes only a global phase and is a no-op here.
    Mirror { mode: String },
    /// Linear polarizer with axis at `alpha` from horizontal.
    Polarizer { mode: String, alpha: f64 },
    /// Polarizing splitter: H transmits to `out_h`, V reflects to `out_v`.
    Pbs { input: String, out_h: String, out_v: String },
    /// Symmetric 50/50 splitter; a `None` input is vacuum.
    Bs {
        in1: Option<String>,
        in2: Option<String>,
        out1: String,
        out2: String,
    },
    /// AOM pair: tags `mode_minus` as `f0 − δf` and `mode_plus` as `f0 + δf`.
    AomPair {
        mode_minus: String,
        mode_plus: String,
        delta_f: f64,
    },
}

impl Element {
    /// Modes this element consumes (reads or rewrites).
    pub fn input_modes(&self) -> Vec<&str> {
        match self {
            Element::Nd { mode, .. }
            | Element::Hwp { mode, .. }
            | Element::Qwp { mode, .. }
            | Element::Pzt { mode, .. }
            | Element::Mirror { mode }
            | Element::Polarizer { mode, .. } => vec![mode],
            Element::Pbs { input, .. } => vec![input],
            Element::Bs { in1, in2, .. } => {
                in1.iter().chain(in2.iter()).map(String::as_str).collect()
            }
            Element::AomPair { mode_minus, mode_plus, .. } => vec![mode_minus, mode_plus],
        }
    }

    /// Modes this element creates (beyond in-place rewrites).
    pub fn created_modes(&self) -> Vec<&str> {
        match self {
            Element::Pbs { out_h, out_v, .. } => vec![out_h, out_v],
            Element::Bs { out1, out2, .. } => vec![out1, out2],
            _ => vec![],
        }
    }

    /// Apply this element to a field state, returning the new state.
    pub fn apply(&self, state: &FieldState) -> Result<FieldState, OpticsError> {
        match self {
            Element::Nd { mode, transmission } => apply_nd(state, mode, *transmission),
            Element::Hwp { mode, angle } => apply_hwp(state, mode, *angle),
            Element::Qwp { mode, xi } => apply_qwp(state, mode, *xi),
            Element::Pzt { mode, phi } => state.add_phase(mode, *phi),
            Element::Mirror { mode } => apply_mirror(state, mode),
            Element::Polarizer { mode, alpha } => apply_polarizer(state, mode, *alpha),
            Element::Pbs { input, out_h, out_v } => apply_pbs(state, input, out_h, out_v),
            Element::Bs { in1, in2, out1, out2 } => {
                apply_bs(state, in1.as_deref(), in2.as_deref(), out1, out2)
            }
            Element::AomPair { mode_minus, mode_plus, delta_f } => {
                apply_aom_pair(state, mode_minus, mode_plus, *delta_f)
            }
        }
    }
}

/// Symmetric 50/50 beam splitter:
/// `out1 = (in1 + i·in2)/√2`, `out2 = (i·in1 + in2)/√2`, per polarization.
/// Absent inputs are vacuum. Output modes must be fresh.
pub fn apply_bs(
    state: &FieldState,
    in1: Option<&str>,
    in2: Option<&str>,
    out1: &str,
    out2: &str,
) -> Result<FieldState, OpticsError> {
    if in1.is_none() && in2.is_none() {
        return Err(OpticsError::VacuumBeamSplitter);
    }
    let mut out = state.clone();
    let a = match in1 {
        Some(m) => out.take_mode(m)?,
        None => ModeState::default(),
    };
    let b = match in2 {
        Some(m) => out.take_mode(m)?,
        None => ModeState::default(),
    };

    let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, FRAC_1_SQRT_2);
    let mut o1 = ModeState::default();
    let mut o2 = ModeState::default();
    for w in a.waves() {
        o1.push(Wave { h: w.h * t, v: w.v * t, tag: w.tag });
        o2.push(Wave { h: w.h * r, v: w.v * r, tag: w.tag });
    }
    for w in b.waves() {
        o1.push(Wave { h: w.h * r, v: w.v * r, tag: w.tag });
        o2.push(Wave { h: w.h * t, v: w.v * t, tag: w.tag });
    }
    out.insert_mode(out1, o1)?;
    out.insert_mode(out2, o2)?;
    Ok(out)
}

/// Polarizing beam splitter: the H component transmits to `out_h` with no
/// extra phase; the V component reflects to `out_v` with a phase of `i`.
pub fn apply_pbs(
    state: &FieldState,
    input: &str,
    out_h: &str,
    out_v: &str,
) -> Result<FieldState, OpticsError> {
    let mut out = state.clone();
    let m = out.take_mode(input)?;
    let mut oh = ModeState::default();
    let mut ov = ModeState::default();
    let zero = Complex64::new(0.0, 0.0);
    for w in m.waves() {
        oh.push(Wave { h: w.h, v: zero, tag: w.tag });
        ov.push(Wave { h: zero, v: w.v * Complex64::i(), tag: w.tag });
    }
    out.insert_mode(out_h, oh)?;
    out.insert_mode(out_v, ov)?;
    Ok(out)
}

/// Quarter-wave plate at parameter `xi`, slow axis horizontal:
/// `h → h·e^{−i2ξ}`, `v → v·i·e^{+i2ξ}` (the `i` is the quarter-wave
/// retardation of the vertical component).
pub fn apply_qwp(state: &FieldState, mode: &str, xi: f64) -> Result<FieldState, OpticsError> {
    let fh = Complex64::from_polar(1.0, -2.0 * xi);
    let fv = Complex64::i() * Complex64::from_polar(1.0, 2.0 * xi);
    let mut out = state.clone();
    let m = out.take_mode(mode)?;
    out.replace_mode(mode, m.map_waves(|w| Wave { h: w.h * fh, v: w.v * fv, tag: w.tag }));
    Ok(out)
}

/// Half-wave plate with fast axis at `angle`:
/// `(h, v) → (h·cos2a + v·sin2a, h·sin2a − v·cos2a)`.
pub fn apply_hwp(state: &FieldState, mode: &str, angle: f64) -> Result<FieldState, OpticsError> {
    let c = Complex64::new((2.0 * angle).cos(), 0.0);
    let s = Complex64::new((2.0 * angle).sin(), 0.0);
    let mut out = state.clone();
    let m = out.take_mode(mode)?;
    out.replace_mode(
        mode,
        m.map_waves(|w| Wave { h: w.h * c + w.v * s, v: w.h * s - w.v * c, tag: w.tag }),
    );
    Ok(out)
}

/// Linear polarizer at `alpha`: each wave projects to the scalar
/// `a′ = h·cosα + v·sinα` polarized along the axis. Waves with different
/// frequency tags stay separate components of the output mode.
pub fn apply_polarizer(
    state: &FieldState,
    mode: &str,
    alpha: f64,
) -> Result<FieldState, OpticsError> {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let mut out = state.clone();
    let m = out.take_mode(mode)?;
    out.replace_mode(
        mode,
        m.map_waves(|w| {
            let a = w.h * ca + w.v * sa;
            Wave { h: a * ca, v: a * sa, tag: w.tag }
        }),
    );
    Ok(out)
}

/// Tag the waves of `mode_minus` as `f0 − δf` and those of `mode_plus` as
/// `f0 + δf`, leaving amplitudes untouched. Re-application is idempotent.
pub fn apply_aom_pair(
    state: &FieldState,
    mode_minus: &str,
    mode_plus: &str,
    delta_f: f64,
) -> Result<FieldState, OpticsError> {
    let mut out = state.clone();
    for (name, label) in [(mode_minus, TagLabel::FMinus), (mode_plus, TagLabel::FPlus)] {
        let m = out.take_mode(name)?;
        out.replace_mode(
            name,
            m.map_waves(|w| {
                let mut tag = w.tag;
                tag.label = label;
                tag.delta_f = delta_f;
                Wave { h: w.h, v: w.v, tag }
            }),
        );
    }
    Ok(out)
}

/// Neutral-density filter: scales amplitudes by `transmission`.
pub fn apply_nd(
    state: &FieldState,
    mode: &str,
    transmission: f64,
) -> Result<FieldState, OpticsError> {
    let k = Complex64::new(transmission, 0.0);
    let mut out = state.clone();
    let m = out.take_mode(mode)?;
    out.replace_mode(mode, m.map_waves(|w| Wave { h: w.h * k, v: w.v * k, tag: w.tag }));
    Ok(out)
}

/// Mirror: amplitude no-op (its reflection phase is global).
pub fn apply_mirror(state: &FieldState, mode: &str) -> Result<FieldState, OpticsError> {
    state.mode(mode)?;
    Ok(state.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{FrequencyTag, DEFAULT_CARRIER_HZ};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn tag() -> FrequencyTag {
        FrequencyTag::unshifted(DEFAULT_CARRIER_HZ)
    }

    fn state_with(mode: &str, h: Complex64, v: Complex64) -> FieldState {
        let mut fs = FieldState::new(1.0);
        fs.insert_mode(mode, ModeState::from_wave(Wave { h, v, tag: tag() })).unwrap();
        fs
    }

    fn wave(fs: &FieldState, mode: &str) -> Wave {
        fs.mode(mode).unwrap().waves()[0]
    }

    #[test]
    fn bs_splits_single_input_evenly() {
        let fs = state_with("a", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let out = apply_bs(&fs, Some("a"), None, "o1", "o2").unwrap();
        assert!((out.intensity("o1").unwrap() - 0.5).abs() < 1e-12);
        assert!((out.intensity("o2").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bs_constructive_port_takes_everything() {
        // With the symmetric convention, inputs (1, −i) interfere fully into
        // the first output port.
        let fs1 = state_with("a", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let mut fs = fs1;
        fs.insert_mode(
            "b",
            ModeState::from_wave(Wave {
                h: Complex64::new(0.0, -1.0),
                v: Complex64::new(0.0, 0.0),
                tag: tag(),
            }),
        )
        .unwrap();
        let out = apply_bs(&fs, Some("a"), Some("b"), "o1", "o2").unwrap();
        assert!((out.intensity("o1").unwrap() - 2.0).abs() < 1e-12);
        assert!(out.intensity("o2").unwrap() < 1e-12);
    }

    #[test]
    fn bs_equal_in_phase_inputs_split_evenly() {
        // The symmetric unitary sends equal in-phase inputs 50/50; full
        // constructive transfer needs the ±i relative phase tested above.
        let mut fs = state_with("a", Complex64::new(0.7, 0.0), Complex64::new(0.0, 0.0));
        fs.insert_mode(
            "b",
            ModeState::from_wave(Wave {
                h: Complex64::new(0.7, 0.0),
                v: Complex64::new(0.0, 0.0),
                tag: tag(),
            }),
        )
        .unwrap();
        let out = apply_bs(&fs, Some("a"), Some("b"), "o1", "o2").unwrap();
        assert!((out.intensity("o1").unwrap() - 0.49).abs() < 1e-12);
        assert!((out.intensity("o2").unwrap() - 0.49).abs() < 1e-12);
    }

    #[test]
    fn bs_rejects_colliding_output_names() {
        let fs = state_with("a", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let err = apply_bs(&fs, Some("a"), None, "a2", "a2").unwrap_err();
        assert_eq!(err, OpticsError::ModeCollision("a2".into()));
    }

    #[test]
    fn pbs_routes_diagonal_input_evenly() {
        let fs = state_with("a", Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0));
        let out = apply_pbs(&fs, "a", "h", "v").unwrap();
        assert!((out.intensity("h").unwrap() - 0.5).abs() < 1e-12);
        assert!((out.intensity("v").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pbs_sends_pure_h_to_transmission_port() {
        let fs = state_with("a", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let out = apply_pbs(&fs, "a", "h", "v").unwrap();
        assert!((out.intensity("h").unwrap() - 1.0).abs() < 1e-12);
        assert!(out.intensity("v").unwrap() < 1e-15);
    }

    #[test]
    fn qwp_at_zero_retards_vertical_by_quarter_wave() {
        let theta = 0.83_f64;
        let phi = 1.9_f64;
        let e_phi = Complex64::from_polar(1.0, phi);
        let fs = state_with("a", theta.cos().into(), -theta.sin() * e_phi);
        let out = apply_qwp(&fs, "a", 0.0).unwrap();
        let w = wave(&out, "a");
        assert!((w.h - Complex64::from(theta.cos())).norm() < 1e-12);
        assert!((w.v - -Complex64::i() * theta.sin() * e_phi).norm() < 1e-12);
    }

    #[test]
    fn qwp_four_times_is_identity() {
        let mut fs = state_with("a", Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.7));
        let original = wave(&fs, "a");
        for _ in 0..4 {
            fs = apply_qwp(&fs, "a", 0.0).unwrap();
        }
        let w = wave(&fs, "a");
        assert!((w.h - original.h).norm() < 1e-12);
        assert!((w.v - original.v).norm() < 1e-12);
    }

    #[test]
    fn hwp_at_22_5_deg_makes_vertical_input_diagonal() {
        let fs = state_with("a", Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let out = apply_hwp(&fs, "a", FRAC_PI_4 / 2.0).unwrap();
        let w = wave(&out, "a");
        assert!((w.h.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((w.v.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn hwp_at_zero_flips_vertical_sign() {
        let fs = state_with("a", Complex64::new(0.4, 0.0), Complex64::new(0.6, 0.0));
        let w = wave(&apply_hwp(&fs, "a", 0.0).unwrap(), "a");
        assert!((w.h - Complex64::new(0.4, 0.0)).norm() < 1e-15);
        assert!((w.v - Complex64::new(-0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hwp_twice_is_identity() {
        let fs = state_with("a", Complex64::new(0.4, 0.2), Complex64::new(-0.6, 0.1));
        let twice = apply_hwp(&apply_hwp(&fs, "a", 0.7).unwrap(), "a", 0.7).unwrap();
        let (w0, w1) = (wave(&fs, "a"), wave(&twice, "a"));
        assert!((w0.h - w1.h).norm() < 1e-12);
        assert!((w0.v - w1.v).norm() < 1e-12);
    }

    #[test]
    fn polarizer_projects_nmzi_style_arm() {
        // Arm field (1/4)(H − V·e^{iφ}) through a 45° polarizer gives
        // (1/16)(1 − cosφ) in source-intensity units.
        for &phi in &[0.0, 0.9, PI, 4.4] {
            let e_phi = Complex64::from_polar(1.0, phi);
            let fs = state_with("a", Complex64::new(0.25, 0.0), -0.25 * e_phi);
            let out = apply_polarizer(&fs, "a", FRAC_PI_4).unwrap();
            let want = (1.0 - phi.cos()) / 16.0;
            assert!((out.intensity("a").unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn polarizer_aligned_with_linear_input_is_transparent() {
        let alpha = 0.6_f64;
        let fs = state_with("a", (0.9 * alpha.cos()).into(), (0.9 * alpha.sin()).into());
        let before = fs.intensity("a").unwrap();
        let out = apply_polarizer(&fs, "a", alpha).unwrap();
        assert!((out.intensity("a").unwrap() - before).abs() < 1e-12);
    }

    #[test]
    fn polarizer_orthogonal_to_linear_input_blocks_it() {
        let alpha = 0.6_f64;
        let fs = state_with("a", (0.9 * alpha.cos()).into(), (0.9 * alpha.sin()).into());
        let out = apply_polarizer(&fs, "a", alpha + FRAC_PI_2).unwrap();
        assert!(out.intensity("a").unwrap() < 1e-24);
    }

    #[test]
    fn polarizer_halves_balanced_diagonal_mixture() {
        // Equal orthogonal components through a 45° polarizer lose half the
        // intensity on average over φ.
        let n = 360;
        let mut acc = 0.0;
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let fs = state_with("a", Complex64::new(0.5, 0.0), 0.5 * Complex64::from_polar(1.0, phi));
            acc += apply_polarizer(&fs, "a", FRAC_PI_4).unwrap().intensity("a").unwrap();
        }
        let mean = acc / n as f64;
        assert!((mean - 0.25).abs() < 1e-9, "mean {mean}");
    }

    #[test]
    fn aom_pair_assigns_opposite_tags() {
        let mut fs = state_with("h_arm", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        fs.insert_mode(
            "v_arm",
            ModeState::from_wave(Wave {
                h: Complex64::new(0.0, 0.0),
                v: Complex64::new(1.0, 0.0),
                tag: tag(),
            }),
        )
        .unwrap();
        let out = apply_aom_pair(&fs, "h_arm", "v_arm", 8e7).unwrap();
        let wh = wave(&out, "h_arm");
        let wv = wave(&out, "v_arm");
        assert_eq!(wh.tag.label, TagLabel::FMinus);
        assert_eq!(wv.tag.label, TagLabel::FPlus);
        assert!((wh.tag.carrier() - (DEFAULT_CARRIER_HZ - 8e7)).abs() < 1.0);
        assert!((wv.tag.carrier() - (DEFAULT_CARRIER_HZ + 8e7)).abs() < 1.0);
        // amplitudes untouched
        assert!((wh.h - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // double application is idempotent
        let again = apply_aom_pair(&out, "h_arm", "v_arm", 8e7).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn lossless_elements_conserve_intensity() {
        let h = Complex64::new(0.31, -0.44);
        let v = Complex64::new(-0.12, 0.58);
        let fs = state_with("a", h, v);
        let before = fs.total_intensity();
        let checks: Vec<FieldState> = vec![
            apply_bs(&fs, Some("a"), None, "x", "y").unwrap(),
            apply_pbs(&fs, "a", "x", "y").unwrap(),
            apply_qwp(&fs, "a", 0.37).unwrap(),
            apply_hwp(&fs, "a", 1.21).unwrap(),
            fs.add_phase("a", 2.5).unwrap(),
            apply_mirror(&fs, "a").unwrap(),
        ];
        for out in checks {
            assert!((out.total_intensity() - before).abs() < 1e-12 * before);
        }
    }
}
