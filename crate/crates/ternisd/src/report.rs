//! JSON and CSV renderings. Field order is the declaration order; reals are
//! rounded to 6 decimals so repeated runs print identical bytes.

use serde::Serialize;
use ternisd_core::estimator::{ExponentResult, MinSize, WaveAudit};
use ternisd_core::reps::{Density, LayerSpec, RepPlan};

pub fn round6(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e6).round() / 1e6
    } else {
        x
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct LayerJson {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub densities: Vec<[f64; 2]>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct PlanJson {
    pub a: usize,
    pub layers: Vec<LayerJson>,
    pub merge_widths: Vec<f64>,
    pub list_sizes: Vec<f64>,
    pub leaf_size_log2: f64,
}

fn dens(d: &Density) -> [f64; 2] {
    [round6(d.alpha), round6(d.beta)]
}

impl From<&RepPlan> for PlanJson {
    fn from(p: &RepPlan) -> Self {
        let layers = p
            .layers
            .iter()
            .map(|l| match l {
                LayerSpec::LeftRight => LayerJson { kind: "left-right", lambda1: None, densities: vec![] },
                LayerSpec::Representation(d) => LayerJson { kind: "representation", lambda1: None, densities: vec![dens(d)] },
                LayerSpec::PartialRep { lambda1, rho1, rho2, rho3 } => LayerJson {
                    kind: "partial-representation",
                    lambda1: Some(round6(*lambda1)),
                    densities: vec![dens(rho1), dens(rho2), dens(rho3)],
                },
            })
            .collect();
        PlanJson {
            a: p.a(),
            layers,
            merge_widths: p.merge_widths.iter().copied().map(round6).collect(),
            list_sizes: p.list_sizes.iter().copied().map(round6).collect(),
            leaf_size_log2: round6(p.leaf_size_log2),
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ExponentJson {
    pub exponent: f64,
    pub algorithm: &'static str,
    pub q: u32,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "W")]
    pub weight: f64,
    pub space_exponent: f64,
    pub ell: f64,
    pub p: f64,
    pub a: usize,
    pub doom: bool,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanJson>,
}

impl From<&ExponentResult> for ExponentJson {
    fn from(r: &ExponentResult) -> Self {
        ExponentJson {
            exponent: round6(r.exponent),
            algorithm: r.algorithm.name(),
            q: r.q,
            rate: round6(r.rate),
            weight: round6(r.weight),
            space_exponent: round6(r.space_exponent),
            ell: round6(r.ell),
            p: round6(r.p),
            a: r.a,
            doom: r.doom,
            converged: r.converged,
            plan: r.plan.as_ref().map(PlanJson::from),
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct MinSizeJson {
    pub kbits: f64,
    #[serde(rename = "R_star")]
    pub rate: f64,
    pub exponent: f64,
    pub algorithm: &'static str,
    pub q: u32,
    pub security_bits: f64,
    /// True when the figure is a shipped constant rather than a computation.
    pub reference: bool,
}

impl MinSizeJson {
    pub fn new(m: &MinSize, algorithm: &'static str, q: u32, security_bits: f64, reference: bool) -> Self {
        MinSizeJson {
            kbits: round6(m.kbits),
            rate: round6(m.rate),
            exponent: round6(m.exponent),
            algorithm,
            q,
            security_bits,
            reference,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct WaveJson {
    pub security_bits: f64,
    pub exponent: f64,
    pub algorithm: &'static str,
    pub doom_used: bool,
    pub ell: f64,
    pub a: usize,
    pub key_size_mb: f64,
    pub signature_kb: f64,
    pub key_bits: f64,
    pub signature_bits: f64,
    pub n: usize,
    pub k: usize,
    pub w: usize,
}

impl From<&WaveAudit> for WaveJson {
    fn from(w: &WaveAudit) -> Self {
        WaveJson {
            security_bits: round6(w.security_bits),
            exponent: round6(w.exponent),
            algorithm: w.algorithm.name(),
            doom_used: w.doom,
            ell: round6(w.ell),
            a: w.a,
            key_size_mb: round6(w.key_megabytes()),
            signature_kb: round6(w.signature_kilobytes()),
            key_bits: round6(w.key_bits),
            signature_bits: round6(w.signature_bits),
            n: w.n,
            k: w.k,
            w: w.w,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SolveJson {
    pub status: &'static str,
    pub engine: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub syndrome_index: Option<usize>,
    pub weight: usize,
    pub verified: bool,
    pub ell: usize,
    pub p: usize,
    pub restarts_used: u64,
    pub candidates_tested: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct OracleJson {
    pub count: usize,
    pub truncated: bool,
    pub planted_found: Option<bool>,
    pub expected_solutions_log2: f64,
    pub solutions: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RepCountJson {
    pub z: f64,
    pub nrep_log2: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub table: [[f64; 3]; 3],
}

/// One curve row.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct CurveRow {
    #[serde(rename = "W")]
    pub weight: String,
    pub exponent: String,
    pub algorithm: &'static str,
    #[serde(rename = "R")]
    pub rate: String,
    pub q: u32,
}

/// CSV with header `W,exponent,algorithm,R,q`, 6 decimals, LF endings.
pub fn curve_csv(points: &[(f64, f64)], algorithm: &'static str, rate: f64, q: u32) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    for &(wt, e) in points {
        w.serialize(CurveRow {
            weight: format!("{wt:.6}"),
            exponent: format!("{e:.6}"),
            algorithm,
            rate: format!("{rate:.6}"),
            q,
        })?;
    }
    if points.is_empty() {
        w.write_record(["W", "exponent", "algorithm", "R", "q"])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
