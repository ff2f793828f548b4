//! Line-oriented circuit description files: parsing with full diagnostics,
//! and rendering circuits back to text.
//!
//! Grammar (UTF-8, `#` comments, angles in degrees):
//!
//! ```text
//! source <mode> [Vpol|Hpol]
//! nd <mode> <transmission 0..1>
//! hwp <mode> <deg>
//! qwp <mode> <deg>
//! pzt <mode> <deg>
//! pol <mode> <deg>
//! pbs <in> <outH> <outV>
//! bs <in1|-> <in2|-> <out1> <out2>
//! aompair <modeH> <modeV> <delta_f_Hz>
//! det <mode> <id>
//! ```

use crate::circuit::{Circuit, Site, SourcePol, SourceSpec, TopologyIssue};
use crate::elements::Element;
use std::fmt;

/// One parse or topology problem, anchored to the offending line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line number.
    pub line: usize,
    /// 1-based column of the offending token (best effort).
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}:{}: {}", self.line, self.col, self.message)
    }
}

/// A circuit description document together with where it came from.
#[derive(Debug, Clone)]
pub struct CircuitSource {
    pub text: String,
    /// File path, or `builtin:fig1` for the canonical topology.
    pub provenance: String,
}

impl CircuitSource {
    pub fn new(text: impl Into<String>, provenance: impl Into<String>) -> Self {
        CircuitSource { text: text.into(), provenance: provenance.into() }
    }

    pub fn parse(&self) -> Result<Circuit, Vec<Diagnostic>> {
        parse_circuit(&self.text)
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut rest = body;
    let mut offset = 0;
    loop {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            break;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        out.push(Token { text: &trimmed[..end], col: offset + 1 });
        offset += end;
        rest = &trimmed[end..];
    }
    out
}

/// Parse a circuit description. On failure returns every diagnostic found,
/// never a partial circuit.
pub fn parse_circuit(text: &str) -> Result<Circuit, Vec<Diagnostic>> {
    let mut diags: Vec<Diagnostic> = Vec::new();
    let mut sources: Vec<SourceSpec> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut detectors: Vec<(String, String)> = Vec::new();
    // line numbers per site kind, to map topology issues back to the file
    let mut source_lines = Vec::new();
    let mut element_lines = Vec::new();
    let mut detector_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let kw = &tokens[0];
        let args = &tokens[1..];
        let eol = raw.len() + 1;

        let mut bad = |col: usize, msg: String| diags.push(Diagnostic { line: line_no, col, message: msg });

        let need = |n: usize| -> Option<Diagnostic> {
            if args.len() < n {
                Some(Diagnostic {
                    line: line_no,
                    col: eol,
                    message: format!(
                        "`{}` expects {} argument{}, found {}",
                        kw.text,
                        n,
                        if n == 1 { "" } else { "s" },
                        args.len()
                    ),
                })
            } else if args.len() > n {
                Some(Diagnostic {
                    line: line_no,
                    col: args[n].col,
                    message: format!("unexpected argument `{}`", args[n].text),
                })
            } else {
                None
            }
        };

        let parse_num = |tok: &Token<'_>, what: &str| -> Result<f64, Diagnostic> {
            tok.text.parse::<f64>().map_err(|_| Diagnostic {
                line: line_no,
                col: tok.col,
                message: format!("expected {what}, found `{}`", tok.text),
            })
        };
        let deg = |tok: &Token<'_>| -> Result<f64, Diagnostic> {
            parse_num(tok, "angle in degrees").map(f64::to_radians)
        };

        match kw.text {
            "source" => {
                if args.is_empty() || args.len() > 2 {
                    bad(eol, "`source` expects <mode> [Vpol|Hpol]".into());
                    continue;
                }
                let pol = match args.get(1).map(|t| t.text) {
                    None | Some("Vpol") => SourcePol::Vertical,
                    Some("Hpol") => SourcePol::Horizontal,
                    Some(other) => {
                        bad(args[1].col, format!("expected Vpol or Hpol, found `{other}`"));
                        continue;
                    }
                };
                sources.push(SourceSpec { mode: args[0].text.to_string(), pol });
                source_lines.push(line_no);
            }
            "nd" | "hwp" | "qwp" | "pzt" | "pol" => {
                if let Some(d) = need(2) {
                    diags.push(d);
                    continue;
                }
                let mode = args[0].text.to_string();
                let el = match kw.text {
                    "nd" => match parse_num(&args[1], "transmission") {
                        Ok(t) => Element::Nd { mode, transmission: t },
                        Err(d) => {
                            diags.push(d);
                            continue;
                        }
                    },
                    other => match deg(&args[1]) {
                        Ok(a) => match other {
                            "hwp" => Element::Hwp { mode, angle: a },
                            "qwp" => Element::Qwp { mode, xi: a },
                            "pzt" => Element::Pzt { mode, phi: a },
                            _ => Element::Polarizer { mode, alpha: a },
                        },
                        Err(d) => {
                            diags.push(d);
                            continue;
                        }
                    },
                };
                elements.push(el);
                element_lines.push(line_no);
            }
            "pbs" => {
                if let Some(d) = need(3) {
                    diags.push(d);
                    continue;
                }
                elements.push(Element::Pbs {
                    input: args[0].text.to_string(),
                    out_h: args[1].text.to_string(),
                    out_v: args[2].text.to_string(),
                });
                element_lines.push(line_no);
            }
            "bs" => {
                if let Some(d) = need(4) {
                    diags.push(d);
                    continue;
                }
                let opt = |t: &Token<'_>| {
                    if t.text == "-" {
                        None
                    } else {
                        Some(t.text.to_string())
                    }
                };
                elements.push(Element::Bs {
                    in1: opt(&args[0]),
                    in2: opt(&args[1]),
                    out1: args[2].text.to_string(),
                    out2: args[3].text.to_string(),
                });
                element_lines.push(line_no);
            }
            "aompair" => {
                if let Some(d) = need(3) {
                    diags.push(d);
                    continue;
                }
                match parse_num(&args[2], "frequency offset in Hz") {
                    Ok(f) if f >= 0.0 => {
                        elements.push(Element::AomPair {
                            mode_minus: args[0].text.to_string(),
                            mode_plus: args[1].text.to_string(),
                            delta_f: f,
                        });
                        element_lines.push(line_no);
                    }
                    Ok(_) => bad(args[2].col, "frequency offset must be non-negative".into()),
                    Err(d) => diags.push(d),
                }
            }
            "det" => {
                if let Some(d) = need(2) {
                    diags.push(d);
                    continue;
                }
                let mode = args[0].text.to_string();
                let id = args[1].text.to_string();
                // catch an element consuming a mode already bound to a detector
                detectors.push((id, mode));
                detector_lines.push(line_no);
            }
            other => bad(kw.col, format!("unknown element keyword `{other}`")),
        }
    }

    // A detector's mode must stay terminal: no later element may consume it.
    for (i, (id, mode)) in detectors.iter().enumerate() {
        let det_line = detector_lines[i];
        for (j, el) in elements.iter().enumerate() {
            if element_lines[j] > det_line && el.input_modes().contains(&mode.as_str()) {
                diags.push(Diagnostic {
                    line: element_lines[j],
                    col: 1,
                    message: format!("mode `{mode}` feeds detector `{id}` and may not be consumed"),
                });
            }
        }
    }

    // Run the topology checks on whatever parsed, so one pass reports both
    // syntax and wiring problems.
    match Circuit::new(sources, elements, detectors) {
        Ok(c) if diags.is_empty() => return Ok(c),
        Ok(_) => {}
        Err(issues) => {
            for issue in issues {
                let line = match issue.site {
                    Site::Source(i) => source_lines.get(i).copied().unwrap_or(0),
                    Site::Element(i) => element_lines.get(i).copied().unwrap_or(0),
                    Site::Detector(i) => detector_lines.get(i).copied().unwrap_or(0),
                    Site::Circuit => 0,
                };
                diags.push(Diagnostic { line, col: 1, message: issue.message });
            }
        }
    }
    diags.sort_by_key(|d| (d.line, d.col));
    Err(diags)
}

fn fmt_deg(rad: f64) -> String {
    format!("{}", rad.to_degrees())
}

/// Render a circuit to the line-oriented file format. Mirrors are amplitude
/// no-ops and have no file representation.
pub fn render_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    for s in circuit.sources() {
        let pol = match s.pol {
            SourcePol::Vertical => "Vpol",
            SourcePol::Horizontal => "Hpol",
        };
        out.push_str(&format!("source {} {pol}\n", s.mode));
    }
    for el in circuit.elements() {
        match el {
            Element::Nd { mode, transmission } => {
                out.push_str(&format!("nd {mode} {transmission}\n"));
            }
            Element::Hwp { mode, angle } => {
                out.push_str(&format!("hwp {mode} {}\n", fmt_deg(*angle)));
            }
            Element::Qwp { mode, xi } => {
                out.push_str(&format!("qwp {mode} {}\n", fmt_deg(*xi)));
            }
            Element::Pzt { mode, phi } => {
                out.push_str(&format!("pzt {mode} {}\n", fmt_deg(*phi)));
            }
            Element::Mirror { .. } => {}
            Element::Polarizer { mode, alpha } => {
                out.push_str(&format!("pol {mode} {}\n", fmt_deg(*alpha)));
            }
            Element::Pbs { input, out_h, out_v } => {
                out.push_str(&format!("pbs {input} {out_h} {out_v}\n"));
            }
            Element::Bs { in1, in2, out1, out2 } => {
                let a = in1.as_deref().unwrap_or("-");
                let b = in2.as_deref().unwrap_or("-");
                out.push_str(&format!("bs {a} {b} {out1} {out2}\n"));
            }
            Element::AomPair { mode_minus, mode_plus, delta_f } => {
                out.push_str(&format!("aompair {mode_minus} {mode_plus} {delta_f}\n"));
            }
        }
    }
    for d in circuit.detectors() {
        out.push_str(&format!("det {} {}\n", d.mode, d.id));
    }
    out
}
