//! Element graphs over named spatial modes: validation, evaluation, and the
//! canonical built-in interferometer topology.
//!
//! The built-in circuit is a noninterfering Mach-Zehnder interferometer
//! (polarizing splitter + phase arm + recombining splitter) feeding three
//! detection blocks: block A (quarter-wave plate, detectors D1/D2) on the
//! output port carrying the `Ĥ − V̂e^{iφ}` superposition, and blocks B and B′
//! (detectors D3/D4 and D3'/D4') on the port carrying `Ĥ + V̂e^{iφ}`.

use crate::elements::{wrap_angle, Element};
use crate::optics::{
    DetectorField, FieldState, ModeState, OpticsError, Wave, DEFAULT_CARRIER_HZ,
};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use thiserror::Error;

pub const D1: &str = "D1";
pub const D2: &str = "D2";
pub const D3: &str = "D3";
pub const D4: &str = "D4";
pub const D3P: &str = "D3'";
pub const D4P: &str = "D4'";

/// The six canonical detector ids of the built-in topology.
pub const CANONICAL_DETECTORS: [&str; 6] = [D1, D2, D3, D4, D3P, D4P];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourcePol {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub mode: String,
    pub pol: SourcePol,
}

/// A terminal detection point: the mode it watches plus derived metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub id: String,
    pub mode: String,
    /// Axis of a polarizer immediately upstream, when one defines the mode's
    /// polarization (radians).
    pub polarizer_angle: Option<f64>,
    /// Whether a quarter-wave plate sits anywhere on this detector's lineage.
    pub qwp_upstream: bool,
}

/// Where a topology problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Source(usize),
    Element(usize),
    Detector(usize),
    Circuit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyIssue {
    pub site: Site,
    pub message: String,
}

impl fmt::Display for TopologyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            Site::Source(i) => write!(f, "source {}: {}", i + 1, self.message),
            Site::Element(i) => write!(f, "element {}: {}", i + 1, self.message),
            Site::Detector(i) => write!(f, "detector {}: {}", i + 1, self.message),
            Site::Circuit => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("invalid circuit topology: {}", format_issues(.0))]
    Topology(Vec<TopologyIssue>),
    #[error("evaluation failed: {0}")]
    Optics(#[from] OpticsError),
    #[error("unknown detector id `{0}`")]
    UnknownDetector(String),
}

fn format_issues(issues: &[TopologyIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated, feed-forward element graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    sources: Vec<SourceSpec>,
    elements: Vec<Element>,
    detectors: Vec<Detector>,
    pub f0: f64,
}

struct RawDetector {
    id: String,
    mode: String,
}

impl Circuit {
    /// Validate the topology and derive detector metadata. `detectors` pairs
    /// are `(id, mode)`.
    pub fn new(
        sources: Vec<SourceSpec>,
        elements: Vec<Element>,
        detectors: Vec<(String, String)>,
    ) -> Result<Circuit, Vec<TopologyIssue>> {
        let raw: Vec<RawDetector> = detectors
            .into_iter()
            .map(|(id, mode)| RawDetector { id, mode })
            .collect();
        let report = validate(&sources, &elements, &raw)?;
        let detectors = raw
            .into_iter()
            .map(|d| {
                let polarizer_angle = report.polarizer_angle.get(&d.mode).copied().flatten();
                let qwp_upstream = report.qwp_upstream.get(&d.mode).copied().unwrap_or(false);
                Detector { id: d.id, mode: d.mode, polarizer_angle, qwp_upstream }
            })
            .collect();
        Ok(Circuit { sources, elements, detectors, f0: DEFAULT_CARRIER_HZ })
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn detector(&self, id: &str) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.id == id)
    }

    /// True when an AOM pair tags the arms, so detector fields carry two
    /// frequency components.
    pub fn has_aom(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::AomPair { .. }))
    }

    pub fn aom_delta_f(&self) -> Option<f64> {
        self.elements.iter().find_map(|e| match e {
            Element::AomPair { delta_f, .. } => Some(*delta_f),
            _ => None,
        })
    }

    /// Copy of this circuit with `offset` added to every piezo phase.
    /// A circuit without any piezo element cannot be phase-scanned.
    pub fn with_pzt_offset(&self, offset: f64) -> Circuit {
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                Element::Pzt { mode, phi } => {
                    Element::Pzt { mode: mode.clone(), phi: wrap_angle(phi + offset) }
                }
                other => other.clone(),
            })
            .collect();
        Circuit {
            sources: self.sources.clone(),
            elements,
            detectors: self.detectors.clone(),
            f0: self.f0,
        }
    }

    pub fn has_pzt(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Pzt { .. }))
    }

    /// Structural equality up to floating-point round-off in parameters and
    /// ignoring amplitude no-ops (mirrors).
    pub fn structurally_eq(&self, other: &Circuit) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        if self.sources != other.sources {
            return false;
        }
        let eff = |c: &Circuit| -> Vec<Element> {
            c.elements
                .iter()
                .filter(|e| !matches!(e, Element::Mirror { .. }))
                .cloned()
                .collect()
        };
        let (ea, eb) = (eff(self), eff(other));
        if ea.len() != eb.len() || self.detectors.len() != other.detectors.len() {
            return false;
        }
        for (a, b) in ea.iter().zip(eb.iter()) {
            let same = match (a, b) {
                (
                    Element::Nd { mode: m1, transmission: t1 },
                    Element::Nd { mode: m2, transmission: t2 },
                ) => m1 == m2 && close(*t1, *t2),
                (Element::Hwp { mode: m1, angle: a1 }, Element::Hwp { mode: m2, angle: a2 })
                | (Element::Qwp { mode: m1, xi: a1 }, Element::Qwp { mode: m2, xi: a2 })
                | (Element::Pzt { mode: m1, phi: a1 }, Element::Pzt { mode: m2, phi: a2 })
                | (
                    Element::Polarizer { mode: m1, alpha: a1 },
                    Element::Polarizer { mode: m2, alpha: a2 },
                ) => m1 == m2 && close(*a1, *a2),
                (
                    Element::AomPair { mode_minus: h1, mode_plus: v1, delta_f: d1 },
                    Element::AomPair { mode_minus: h2, mode_plus: v2, delta_f: d2 },
                ) => h1 == h2 && v1 == v2 && close(*d1, *d2),
                _ => a == b,
            };
            if !same {
                return false;
            }
        }
        self.detectors
            .iter()
            .zip(other.detectors.iter())
            .all(|(a, b)| a.id == b.id && a.mode == b.mode)
    }

    /// Evaluate the circuit at source intensity `i0`, returning per-detector
    /// fields plus an energy ledger.
    pub fn evaluate(&self, i0: f64) -> Result<Evaluation, CircuitError> {
        let mut state = FieldState::new(i0.sqrt());
        for s in &self.sources {
            let (h, v) = match s.pol {
                SourcePol::Horizontal => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
                SourcePol::Vertical => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            };
            let tag = crate::optics::FrequencyTag::unshifted(self.f0);
            state
                .insert_mode(&s.mode, ModeState::from_wave(Wave { h, v, tag }))
                .map_err(CircuitError::Optics)?;
        }
        let source_intensity = state.total_intensity();

        let mut projection_loss = 0.0;
        let mut attenuation_loss = 0.0;
        for el in &self.elements {
            let lossy = matches!(el, Element::Polarizer { .. } | Element::Nd { .. });
            let before = if lossy { state.total_intensity() } else { 0.0 };
            state = el.apply(&state)?;
            if lossy {
                let lost = before - state.total_intensity();
                match el {
                    Element::Polarizer { .. } => projection_loss += lost,
                    _ => attenuation_loss += lost,
                }
            }
        }

        let mut readings = Vec::with_capacity(self.detectors.len());
        for d in &self.detectors {
            let field = state.mode(&d.mode).map_err(CircuitError::Optics)?.clone();
            let intensity = state.intensity(&d.mode).map_err(CircuitError::Optics)?;
            readings.push(DetectorReading {
                id: d.id.clone(),
                mode: d.mode.clone(),
                intensity,
                field,
                polarizer_angle: d.polarizer_angle,
                qwp_upstream: d.qwp_upstream,
            });
        }
        let det_modes: BTreeSet<&str> = self.detectors.iter().map(|d| d.mode.as_str()).collect();
        let spill = state
            .mode_names()
            .filter(|m| !det_modes.contains(m))
            .map(|m| (m.to_string(), state.intensity(m).unwrap_or(0.0)))
            .collect();

        Ok(Evaluation {
            i0,
            source_intensity,
            detectors: readings,
            spill,
            projection_loss,
            attenuation_loss,
        })
    }

    /// Run the topology checks without evaluating.
    pub fn validate(&self) -> Result<(), Vec<TopologyIssue>> {
        let raw: Vec<RawDetector> = self
            .detectors
            .iter()
            .map(|d| RawDetector { id: d.id.clone(), mode: d.mode.clone() })
            .collect();
        validate(&self.sources, &self.elements, &raw).map(|_| ())
    }
}

/// Result of evaluating a circuit: detector fields and the energy ledger.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub i0: f64,
    pub source_intensity: f64,
    pub detectors: Vec<DetectorReading>,
    /// Terminal modes without a detector (e.g. unused splitter ports).
    pub spill: Vec<(String, f64)>,
    pub projection_loss: f64,
    pub attenuation_loss: f64,
}

#[derive(Debug, Clone)]
pub struct DetectorReading {
    pub id: String,
    pub mode: String,
    pub intensity: f64,
    pub field: ModeState,
    pub polarizer_angle: Option<f64>,
    pub qwp_upstream: bool,
}

impl Evaluation {
    pub fn reading(&self, id: &str) -> Result<&DetectorReading, CircuitError> {
        self.detectors
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| CircuitError::UnknownDetector(id.to_string()))
    }

    pub fn intensity(&self, id: &str) -> Result<f64, CircuitError> {
        Ok(self.reading(id)?.intensity)
    }

    /// Two-slot detector field (scaled to absolute amplitude units `√I`).
    pub fn detector_field(&self, id: &str) -> Result<DetectorField, CircuitError> {
        let r = self.reading(id)?;
        let mut f = DetectorField::from_mode(&r.mode, &r.field, r.polarizer_angle)?;
        let scale = self.i0.sqrt();
        f.h.amp *= scale;
        f.v.amp *= scale;
        Ok(f)
    }

    /// Source intensity minus everything accounted for at terminals and in
    /// absorbers; should vanish for a well-formed circuit.
    pub fn energy_defect(&self) -> f64 {
        let detected: f64 = self.detectors.iter().map(|d| d.intensity).sum();
        let spilled: f64 = self.spill.iter().map(|(_, i)| i).sum();
        self.source_intensity - (detected + spilled + self.projection_loss + self.attenuation_loss)
    }
}

struct ValidationReport {
    qwp_upstream: BTreeMap<String, bool>,
    polarizer_angle: BTreeMap<String, Option<f64>>,
}

fn validate(
    sources: &[SourceSpec],
    elements: &[Element],
    detectors: &[RawDetector],
) -> Result<ValidationReport, Vec<TopologyIssue>> {
    let mut issues = Vec::new();
    let mut live: BTreeSet<String> = BTreeSet::new();
    // Every name ever bound; output modes may not reuse them.
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut qwp: BTreeMap<String, bool> = BTreeMap::new();
    let mut pol: BTreeMap<String, Option<f64>> = BTreeMap::new();

    if sources.is_empty() {
        issues.push(TopologyIssue {
            site: Site::Circuit,
            message: "circuit has no source".into(),
        });
    }
    for (i, s) in sources.iter().enumerate() {
        if !used.insert(s.mode.clone()) {
            issues.push(TopologyIssue {
                site: Site::Source(i),
                message: format!("duplicate source mode `{}`", s.mode),
            });
        }
        live.insert(s.mode.clone());
        qwp.insert(s.mode.clone(), false);
        pol.insert(s.mode.clone(), None);
    }

    for (i, el) in elements.iter().enumerate() {
        let mut inputs_ok = true;
        for m in el.input_modes() {
            if !live.contains(m) {
                inputs_ok = false;
                issues.push(TopologyIssue {
                    site: Site::Element(i),
                    message: format!("dangling mode `{m}`: not produced by a source or earlier element"),
                });
            }
        }
        for m in el.created_modes() {
            if used.contains(m) {
                issues.push(TopologyIssue {
                    site: Site::Element(i),
                    message: format!("output mode `{m}` collides with an existing mode"),
                });
            }
        }
        if let Element::Nd { transmission, .. } = el {
            if !(*transmission > 0.0 && *transmission <= 1.0) {
                issues.push(TopologyIssue {
                    site: Site::Element(i),
                    message: format!("transmission {transmission} outside (0, 1]"),
                });
            }
        }
        if let Element::Bs { in1: None, in2: None, .. } = el {
            issues.push(TopologyIssue {
                site: Site::Element(i),
                message: "beam splitter needs at least one non-vacuum input".into(),
            });
        }
        if !inputs_ok {
            continue;
        }
        // Track lineage metadata.
        match el {
            Element::Qwp { mode, .. } => {
                qwp.insert(mode.clone(), true);
                pol.insert(mode.clone(), None);
            }
            Element::Hwp { mode, .. } => {
                pol.insert(mode.clone(), None);
            }
            Element::Polarizer { mode, alpha } => {
                pol.insert(mode.clone(), Some(*alpha));
            }
            Element::Nd { .. } | Element::Pzt { .. } | Element::Mirror { .. } => {
                // scalar on the mode: axis metadata survives
            }
            Element::Pbs { input, out_h, out_v } => {
                let flag = qwp.get(input).copied().unwrap_or(false);
                live.remove(input);
                for m in [out_h, out_v] {
                    live.insert(m.clone());
                    used.insert(m.clone());
                    qwp.insert(m.clone(), flag);
                    pol.insert(m.clone(), None);
                }
            }
            Element::Bs { in1, in2, out1, out2 } => {
                let mut flag = false;
                for m in in1.iter().chain(in2.iter()) {
                    flag |= qwp.get(m).copied().unwrap_or(false);
                    live.remove(m);
                }
                for m in [out1, out2] {
                    live.insert(m.clone());
                    used.insert(m.clone());
                    qwp.insert(m.clone(), flag);
                    pol.insert(m.clone(), None);
                }
            }
            Element::AomPair { .. } => {}
        }
    }

    let mut seen_ids: BTreeSet<&str> = BTreeSet::new();
    let mut seen_modes: BTreeSet<&str> = BTreeSet::new();
    for (i, d) in detectors.iter().enumerate() {
        if !seen_ids.insert(&d.id) {
            issues.push(TopologyIssue {
                site: Site::Detector(i),
                message: format!("duplicate detector id `{}`", d.id),
            });
        }
        if !live.contains(&d.mode) {
            issues.push(TopologyIssue {
                site: Site::Detector(i),
                message: format!("detector mode `{}` is not a terminal mode", d.mode),
            });
        } else if !seen_modes.insert(&d.mode) {
            issues.push(TopologyIssue {
                site: Site::Detector(i),
                message: format!("mode `{}` is watched by two detectors", d.mode),
            });
        }
    }

    if issues.is_empty() {
        Ok(ValidationReport { qwp_upstream: qwp, polarizer_angle: pol })
    } else {
        Err(issues)
    }
}

/// Parameters of the canonical built-in topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Params {
    /// Piezo phase on the vertical arm (radians).
    pub phi: f64,
    /// Quarter-wave plate parameter in block A; `None` removes the plate.
    pub qwp_xi: Option<f64>,
    /// Polarizer angles for D1, D2, D3/D3', D4/D4' (radians).
    pub theta: f64,
    pub psi: f64,
    pub eta: f64,
    pub zeta: f64,
    /// Insert the AOM pair that tags the arms `f0 ∓ δf` / `f0 ± δf`.
    pub aom_on: bool,
    pub delta_f: f64,
    /// Swap the AOM tag assignment between the two arms.
    pub aom_conjugate: bool,
    /// Feed block B from the reflected tap output instead of the transmitted
    /// one (and B′ from the other); fringes are identical either way.
    pub block_b_prime: bool,
    pub nd_transmission: f64,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Fig1Params {
            phi: 0.0,
            qwp_xi: Some(0.0),
            theta: FRAC_PI_4,
            psi: FRAC_PI_4,
            eta: FRAC_PI_4,
            zeta: FRAC_PI_4,
            aom_on: false,
            delta_f: 8.0e7,
            aom_conjugate: false,
            block_b_prime: false,
            nd_transmission: 1.0,
        }
    }
}

/// Build the canonical topology.
///
/// Arm fields entering the recombiner: the polarizing splitter transmits H
/// and reflects V with phase `i`, so the two output ports carry
/// `(E0/2)(Ĥ + V̂e^{iφ})` and `(iE0/2)(Ĥ − V̂e^{iφ})` up to a source-side
/// sign. Each port passes a tap splitter whose second output is either the
/// B′ block or an unused spill; each block splits once more into two
/// polarizer+detector arms. Arms reached through an odd number of
/// reflections see the polarizer scale mirror-imaged, so their angles enter
/// with a flipped sign; this reproduces the usual fringe inversion between
/// paired detectors.
pub fn fig1(p: &Fig1Params) -> Circuit {
    let s = |m: &str| m.to_string();
    let mut elements = vec![
        Element::Nd { mode: s("src"), transmission: p.nd_transmission },
        Element::Hwp { mode: s("src"), angle: PI / 8.0 },
        Element::Pbs { input: s("src"), out_h: s("arm_h"), out_v: s("arm_v") },
        Element::Pzt { mode: s("arm_v"), phi: wrap_angle(p.phi) },
    ];
    if p.aom_on {
        let (minus, plus) = if p.aom_conjugate { ("arm_v", "arm_h") } else { ("arm_h", "arm_v") };
        elements.push(Element::AomPair {
            mode_minus: s(minus),
            mode_plus: s(plus),
            delta_f: p.delta_f,
        });
    }
    elements.push(Element::Bs {
        in1: Some(s("arm_h")),
        in2: Some(s("arm_v")),
        out1: s("port_plus"),
        out2: s("port_minus"),
    });

    // Block A rides the `Ĥ − V̂e^{iφ}` port.
    elements.push(Element::Bs {
        in1: Some(s("port_minus")),
        in2: None,
        out1: s("a_in"),
        out2: s("a_spill"),
    });
    if let Some(xi) = p.qwp_xi {
        elements.push(Element::Qwp { mode: s("a_in"), xi: wrap_angle(xi) });
    }
    elements.push(Element::Bs {
        in1: Some(s("a_in")),
        in2: None,
        out1: s("arm_d1"),
        out2: s("arm_d2"),
    });
    elements.push(Element::Polarizer { mode: s("arm_d1"), alpha: p.theta });
    elements.push(Element::Polarizer { mode: s("arm_d2"), alpha: -p.psi });

    // Blocks B and B′ ride the `Ĥ + V̂e^{iφ}` port.
    elements.push(Element::Bs {
        in1: Some(s("port_plus")),
        in2: None,
        out1: s("b_in"),
        out2: s("bp_in"),
    });
    let (b_src, bp_src) = if p.block_b_prime { ("bp_in", "b_in") } else { ("b_in", "bp_in") };
    elements.push(Element::Bs {
        in1: Some(s(b_src)),
        in2: None,
        out1: s("arm_d3"),
        out2: s("arm_d4"),
    });
    elements.push(Element::Polarizer { mode: s("arm_d3"), alpha: -p.eta });
    elements.push(Element::Polarizer { mode: s("arm_d4"), alpha: p.zeta });
    elements.push(Element::Bs {
        in1: Some(s(bp_src)),
        in2: None,
        out1: s("arm_d3p"),
        out2: s("arm_d4p"),
    });
    elements.push(Element::Polarizer { mode: s("arm_d3p"), alpha: -p.eta });
    elements.push(Element::Polarizer { mode: s("arm_d4p"), alpha: p.zeta });

    let sources = vec![SourceSpec { mode: s("src"), pol: SourcePol::Vertical }];
    let detectors = vec![
        (s(D1), s("arm_d1")),
        (s(D2), s("arm_d2")),
        (s(D3), s("arm_d3")),
        (s(D4), s("arm_d4")),
        (s(D3P), s("arm_d3p")),
        (s(D4P), s("arm_d4p")),
    ];
    Circuit::new(sources, elements, detectors).expect("built-in topology is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::TagLabel;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |k| TAU * k as f64 / n as f64)
    }

    #[test]
    fn ports_carry_half_intensity_and_no_fringe_without_polarizers() {
        // NMZI alone: terminal ports hold I0/2 each, independent of φ.
        for phi in grid(13) {
            let c = Circuit::new(
                vec![SourceSpec { mode: "src".into(), pol: SourcePol::Vertical }],
                vec![
                    Element::Hwp { mode: "src".into(), angle: PI / 8.0 },
                    Element::Pbs { input: "src".into(), out_h: "h".into(), out_v: "v".into() },
                    Element::Pzt { mode: "v".into(), phi },
                    Element::Bs {
                        in1: Some("h".into()),
                        in2: Some("v".into()),
                        out1: "pa".into(),
                        out2: "pb".into(),
                    },
                ],
                vec![("A".into(), "pa".into()), ("B".into(), "pb".into())],
            )
            .unwrap();
            let ev = c.evaluate(1.0).unwrap();
            assert!((ev.intensity("A").unwrap() - 0.5).abs() < 1e-12);
            assert!((ev.intensity("B").unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn d1_field_matches_quarter_wave_form_up_to_global_phase() {
        // With the plate at ξ=0 the D1 slots must be proportional to
        // (cosθ, −i·sinθ·e^{iφ}).
        let theta = 0.61;
        let phi = 1.37;
        let c = fig1(&Fig1Params { phi, theta, ..Default::default() });
        let ev = c.evaluate(1.0).unwrap();
        let f = ev.detector_field(D1).unwrap();
        let expect_h = Complex64::from(theta.cos());
        let expect_v = -Complex64::i() * theta.sin() * Complex64::from_polar(1.0, phi);
        // ratio of slots is global-phase free
        let got_ratio = f.v.amp / f.h.amp;
        let want_ratio = expect_v / expect_h;
        assert!((got_ratio - want_ratio).norm() < 1e-12);
        // prefactor magnitude E0/4
        assert!((f.h.amp.norm() - theta.cos().abs() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn no_plate_and_balanced_polarizer_darkens_d1_at_zero_phase() {
        let c = fig1(&Fig1Params {
            phi: 0.0,
            qwp_xi: None,
            theta: FRAC_PI_4,
            ..Default::default()
        });
        let ev = c.evaluate(1.0).unwrap();
        assert!(ev.intensity(D1).unwrap() < 1e-15);
    }

    #[test]
    fn b_prime_block_differs_by_global_phase_only() {
        for swap in [false, true] {
            let c = fig1(&Fig1Params { phi: 0.9, block_b_prime: swap, ..Default::default() });
            let ev = c.evaluate(1.0).unwrap();
            let f3 = ev.detector_field(D3).unwrap();
            let f3p = ev.detector_field(D3P).unwrap();
            // same intensity
            assert!((ev.intensity(D3).unwrap() - ev.intensity(D3P).unwrap()).abs() < 1e-12);
            // fields proportional by a unimodular factor
            let g = f3p.h.amp / f3.h.amp;
            assert!((g.norm() - 1.0).abs() < 1e-12);
            assert!((f3p.v.amp - g * f3.v.amp).norm() < 1e-12);
        }
    }

    #[test]
    fn b_and_b_prime_intensity_curves_coincide() {
        for k in 0..361 {
            let phi = TAU * k as f64 / 361.0;
            let a = fig1(&Fig1Params { phi, block_b_prime: false, ..Default::default() });
            let b = fig1(&Fig1Params { phi, block_b_prime: true, ..Default::default() });
            let (ea, eb) = (a.evaluate(1.0).unwrap(), b.evaluate(1.0).unwrap());
            for id in [D3, D4, D3P, D4P] {
                assert!((ea.intensity(id).unwrap() - eb.intensity(id).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_source_gives_dark_detectors() {
        let c = fig1(&Fig1Params::default());
        let ev = c.evaluate(0.0).unwrap();
        for d in &ev.detectors {
            assert_eq!(d.intensity, 0.0);
        }
    }

    #[test]
    fn energy_audit_balances() {
        for (phi, xi, theta) in [(0.0, Some(0.0), FRAC_PI_4), (1.1, Some(0.4), 0.2), (2.7, None, 1.0)] {
            let c = fig1(&Fig1Params {
                phi,
                qwp_xi: xi,
                theta,
                psi: 0.8,
                eta: 0.3,
                zeta: 1.2,
                ..Default::default()
            });
            let ev = c.evaluate(2.5).unwrap();
            assert!(
                ev.energy_defect().abs() < 1e-9 * ev.source_intensity,
                "defect {}",
                ev.energy_defect()
            );
        }
    }

    #[test]
    fn evaluation_is_referentially_transparent() {
        let c = fig1(&Fig1Params { phi: 0.77, ..Default::default() });
        let a = c.evaluate(1.0).unwrap();
        let b = c.evaluate(1.0).unwrap();
        for (x, y) in a.detectors.iter().zip(b.detectors.iter()) {
            assert_eq!(x.intensity.to_bits(), y.intensity.to_bits());
            assert_eq!(x.field, y.field);
        }
    }

    #[test]
    fn aom_pair_tags_survive_to_detectors() {
        let c = fig1(&Fig1Params { aom_on: true, ..Default::default() });
        let ev = c.evaluate(1.0).unwrap();
        let f = ev.detector_field(D1).unwrap();
        assert_eq!(f.h.tag.label, TagLabel::FMinus);
        assert_eq!(f.v.tag.label, TagLabel::FPlus);
        let c2 = fig1(&Fig1Params { aom_on: true, aom_conjugate: true, ..Default::default() });
        let f2 = c2.evaluate(1.0).unwrap().detector_field(D1).unwrap();
        assert_eq!(f2.h.tag.label, TagLabel::FMinus);
        assert_eq!(f2.v.tag.label, TagLabel::FPlus);
    }

    #[test]
    fn detector_metadata_is_derived() {
        let c = fig1(&Fig1Params::default());
        let d1 = c.detector(D1).unwrap();
        assert!(d1.qwp_upstream);
        assert!((d1.polarizer_angle.unwrap() - FRAC_PI_4).abs() < 1e-15);
        let d3 = c.detector(D3).unwrap();
        assert!(!d3.qwp_upstream);
        assert!((d3.polarizer_angle.unwrap() + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn topology_violations_are_reported() {
        // dangling input
        let err = Circuit::new(
            vec![SourceSpec { mode: "src".into(), pol: SourcePol::Vertical }],
            vec![Element::Hwp { mode: "ghost".into(), angle: 0.1 }],
            vec![],
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.message.contains("dangling mode `ghost`")));

        // duplicate detector id
        let err = Circuit::new(
            vec![SourceSpec { mode: "src".into(), pol: SourcePol::Vertical }],
            vec![Element::Bs {
                in1: Some("src".into()),
                in2: None,
                out1: "a".into(),
                out2: "b".into(),
            }],
            vec![("X".into(), "a".into()), ("X".into(), "b".into())],
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.message.contains("duplicate detector id")));
    }

    #[test]
    fn pzt_offset_shifts_the_fringe() {
        let base = fig1(&Fig1Params { phi: 0.4, ..Default::default() });
        let shifted = base.with_pzt_offset(FRAC_PI_2);
        let direct = fig1(&Fig1Params { phi: 0.4 + FRAC_PI_2, ..Default::default() });
        let a = shifted.evaluate(1.0).unwrap();
        let b = direct.evaluate(1.0).unwrap();
        for id in CANONICAL_DETECTORS {
            assert!((a.intensity(id).unwrap() - b.intensity(id).unwrap()).abs() < 1e-12);
        }
    }
}
