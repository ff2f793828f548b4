//! Complex polarization-field algebra: per-mode Jones amplitudes with
//! frequency tags, intensities, and the cross-polarization product used by
//! gated-heterodyne coincidence selection.
//!
//! Amplitudes are stored in units of the source amplitude; the scale `e0`
//! (square root of the source intensity) is kept separately so closed-form
//! prefactors can be checked exactly.

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Default optical carrier used when a circuit does not specify one (≈780 nm).
pub const DEFAULT_CARRIER_HZ: f64 = 3.84e14;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("mode `{0}` already carries a field")]
    ModeCollision(String),
    #[error("beam splitter needs at least one non-vacuum input")]
    VacuumBeamSplitter,
    #[error("mode `{0}` carries two frequency tags but no polarizer axis; cannot form a detector field")]
    AmbiguousDetectorField(String),
}

/// Which sideband of the carrier a field component rides on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagLabel {
    /// Carrier minus the AOM offset.
    FMinus,
    /// Carrier plus the AOM offset.
    FPlus,
    /// Bare carrier (no AOM in the path).
    Unshifted,
}

/// Optical frequency of one field component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTag {
    pub label: TagLabel,
    pub f0: f64,
    pub delta_f: f64,
}

impl FrequencyTag {
    pub fn unshifted(f0: f64) -> Self {
        Self { label: TagLabel::Unshifted, f0, delta_f: 0.0 }
    }

    pub fn shifted(label: TagLabel, f0: f64, delta_f: f64) -> Self {
        debug_assert!(delta_f >= 0.0);
        Self { label, f0, delta_f }
    }

    /// Actual optical frequency: `f0 ∓ delta_f` for the shifted labels.
    pub fn carrier(&self) -> f64 {
        match self.label {
            TagLabel::FMinus => self.f0 - self.delta_f,
            TagLabel::FPlus => self.f0 + self.delta_f,
            TagLabel::Unshifted => self.f0,
        }
    }
}

/// One polarization component: a complex amplitude riding on one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolComponent {
    pub amp: Complex64,
    pub tag: FrequencyTag,
}

/// A coherent monochromatic wave in one spatial mode: a Jones vector plus its
/// frequency tag. Components with different tags never interfere in a
/// time-averaged intensity, so a mode holds a small list of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub h: Complex64,
    pub v: Complex64,
    pub tag: FrequencyTag,
}

impl Wave {
    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    fn scaled(&self, k: Complex64) -> Wave {
        Wave { h: self.h * k, v: self.v * k, tag: self.tag }
    }

    fn is_negligible(&self) -> bool {
        self.norm_sqr() == 0.0
    }
}

/// Field content of one spatial mode, as a tag-merged wave list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeState {
    waves: Vec<Wave>,
}

impl ModeState {
    pub fn from_wave(wave: Wave) -> Self {
        ModeState { waves: vec![wave] }
    }

    pub fn waves(&self) -> &[Wave] {
        &self.waves
    }

    /// Add a wave, merging coherently with any existing wave of the same tag.
    pub fn push(&mut self, wave: Wave) {
        if wave.is_negligible() {
            return;
        }
        for w in &mut self.waves {
            if w.tag.label == wave.tag.label {
                w.h += wave.h;
                w.v += wave.v;
                return;
            }
        }
        self.waves.push(wave);
        // Deterministic ordering regardless of element order.
        self.waves.sort_by_key(|w| w.tag.label);
    }

    /// Time-averaged intensity in `e0²` units: coherent within a tag,
    /// incoherent across tags.
    pub fn norm_sqr(&self) -> f64 {
        self.waves.iter().map(Wave::norm_sqr).sum()
    }

    pub fn map_waves(&self, f: impl Fn(&Wave) -> Wave) -> ModeState {
        let mut out = ModeState::default();
        for w in &self.waves {
            out.push(f(w));
        }
        out
    }

    pub fn is_vacuum(&self) -> bool {
        self.waves.is_empty()
    }

    fn wave_with_label(&self, label: TagLabel) -> Option<&Wave> {
        self.waves.iter().find(|w| w.tag.label == label)
    }
}

/// Fields over a set of named spatial modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    modes: BTreeMap<String, ModeState>,
    /// Field amplitude scale; the source intensity is `e0²`.
    pub e0: f64,
}

impl FieldState {
    pub fn new(e0: f64) -> Self {
        FieldState { modes: BTreeMap::new(), e0 }
    }

    pub fn mode(&self, name: &str) -> Result<&ModeState, OpticsError> {
        self.modes
            .get(name)
            .ok_or_else(|| OpticsError::UnknownMode(name.to_string()))
    }

    pub fn mode_names(&self) -> impl Iterator<Item = &str> {
        self.modes.keys().map(String::as_str)
    }

    pub fn contains_mode(&self, name: &str) -> bool {
        self.modes.contains_key(name)
    }

    /// Install a field in a fresh mode. Errors if the mode already exists.
    pub fn insert_mode(&mut self, name: &str, state: ModeState) -> Result<(), OpticsError> {
        if self.modes.contains_key(name) {
            return Err(OpticsError::ModeCollision(name.to_string()));
        }
        self.modes.insert(name.to_string(), state);
        Ok(())
    }

    pub(crate) fn replace_mode(&mut self, name: &str, state: ModeState) {
        self.modes.insert(name.to_string(), state);
    }

    pub(crate) fn take_mode(&mut self, name: &str) -> Result<ModeState, OpticsError> {
        self.modes
            .remove(name)
            .ok_or_else(|| OpticsError::UnknownMode(name.to_string()))
    }

    /// Time-averaged intensity of one mode, in units of the source intensity
    /// times `e0²` (i.e. absolute intensity).
    pub fn intensity(&self, mode: &str) -> Result<f64, OpticsError> {
        Ok(self.e0 * self.e0 * self.mode(mode)?.norm_sqr())
    }

    /// Total intensity over all modes.
    pub fn total_intensity(&self) -> f64 {
        self.e0 * self.e0 * self.modes.values().map(ModeState::norm_sqr).sum::<f64>()
    }

    /// Multiply both polarization amplitudes of `mode` by `e^{iφ}`.
    pub fn add_phase(&self, mode: &str, phi: f64) -> Result<FieldState, OpticsError> {
        let factor = Complex64::from_polar(1.0, phi);
        let mut out = self.clone();
        let m = out.take_mode(mode)?;
        out.replace_mode(mode, m.map_waves(|w| w.scaled(factor)));
        Ok(out)
    }
}

/// Field at one detector reduced to two slots. For a two-tone mode the slots
/// are the projected scalars of the `f−` and `f+` components; for a single
/// coherent wave they are the plain Jones components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorField {
    pub h: PolComponent,
    pub v: PolComponent,
}

impl DetectorField {
    /// Build the two-slot view of a detector mode. `polarizer_angle` is the
    /// axis of a polarizer crossed immediately upstream, if any; it is needed
    /// to reduce a two-tone mode to scalars.
    pub fn from_mode(
        mode_name: &str,
        mode: &ModeState,
        polarizer_angle: Option<f64>,
    ) -> Result<DetectorField, OpticsError> {
        let zero = |tag: FrequencyTag| PolComponent { amp: Complex64::new(0.0, 0.0), tag };
        match mode.waves() {
            [] => {
                let tag = FrequencyTag::unshifted(DEFAULT_CARRIER_HZ);
                Ok(DetectorField { h: zero(tag), v: zero(tag) })
            }
            [w] => Ok(DetectorField {
                h: PolComponent { amp: w.h, tag: w.tag },
                v: PolComponent { amp: w.v, tag: w.tag },
            }),
            _ => {
                let alpha = polarizer_angle
                    .ok_or_else(|| OpticsError::AmbiguousDetectorField(mode_name.to_string()))?;
                let (ca, sa) = (alpha.cos(), alpha.sin());
                let scalar = |w: &Wave| w.h * ca + w.v * sa;
                let minus = mode.wave_with_label(TagLabel::FMinus);
                let plus = mode.wave_with_label(TagLabel::FPlus);
                match (minus, plus) {
                    (Some(m), Some(p)) => Ok(DetectorField {
                        h: PolComponent { amp: scalar(m), tag: m.tag },
                        v: PolComponent { amp: scalar(p), tag: p.tag },
                    }),
                    _ => Err(OpticsError::AmbiguousDetectorField(mode_name.to_string())),
                }
            }
        }
    }
}

/// Coherent sum of the two orthogonal-polarization product pathways between
/// two detector fields: `s1.h·s2.v + s1.v·s2.h`. Its modulus squared is the
/// AC-passed coincidence amplitude of the gated-heterodyne selection.
pub fn inner_product_cross(s1: &DetectorField, s2: &DetectorField) -> Complex64 {
    s1.h.amp * s2.v.amp + s1.v.amp * s2.h.amp
}
