//! Bundled reference scenarios and the outcomes they are expected to
//! reproduce.

use serde::Serialize;

use crate::dsl::{eval_expr, load_scenario_with_params, parse_expr, ScenarioError};
use crate::stability::Consensus;
use crate::{Result, Scenario};

#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    document: &'static str,
    defaults: &'static [(&'static str, &'static str)],
}

const BUILTINS: [Builtin; 7] = [
    Builtin {
        name: "example-indefinite",
        summary: "A = ⊕ diag(1, k²), H = swap; spec(B) = ±1, ±2, …",
        document: include_str!("../../scenarios/example-indefinite.json"),
        defaults: &[],
    },
    Builtin {
        name: "domains-nested",
        summary: "A = ⊕ diag(1, k²), H = [[1, 1], [1, -1]]",
        document: include_str!("../../scenarios/domains-nested.json"),
        defaults: &[],
    },
    Builtin {
        name: "domains-general-position",
        summary: "A = ⊕ diag(1, k²), H = [[1, 1], [1, 0]]",
        document: include_str!("../../scenarios/domains-general-position.json"),
        defaults: &[],
    },
    Builtin {
        name: "mu-family",
        summary: "A_μ = ⊕ diag(k^(2-2μ), k^(2μ)), H = swap; parameter mu",
        document: include_str!("../../scenarios/mu-family.json"),
        defaults: &[("mu", "0.5")],
    },
    Builtin {
        name: "offdiag-demo",
        summary: "a₊ = 1, a₋ = 4, T = 3: H = [[1, 3], [3, -1]]",
        document: include_str!("../../scenarios/offdiag-demo.json"),
        defaults: &[],
    },
    Builtin {
        name: "dirac-free",
        summary: "μ-family with D_k = 1 + h·k; parameters mu, h",
        document: include_str!("../../scenarios/dirac-free.json"),
        defaults: &[("mu", "0.5"), ("h", "0.1")],
    },
    Builtin {
        name: "identity-control",
        summary: "A = ⊕ diag(1, k²), H = I",
        document: include_str!("../../scenarios/identity-control.json"),
        defaults: &[],
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// Every bundled scenario with its default parameters.
pub fn builtin_examples() -> Result<Vec<Scenario>> {
    BUILTINS.iter().map(|b| b.scenario(&[])).collect()
}

/// Closed-form spectrum of `B_N` for a bundled scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumFormula {
    /// `±(offset + step·k)` for `k = 1..N`.
    PlusMinus { offset: f64, step: f64 },
    /// Blocks `diag(1, k) H diag(1, k)` for a fixed 2×2 `H`.
    WeightedBlock { h: [[f64; 2]; 2] },
    /// The same spectrum at every `N`.
    Fixed { values: Vec<f64> },
}

impl SpectrumFormula {
    /// Ascending eigenvalues of `B_N`.
    pub fn spectrum(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            SpectrumFormula::PlusMinus { offset, step } => {
                for k in 1..=n {
                    let v = offset + step * k as f64;
                    out.push(v);
                    out.push(-v);
                }
            }
            SpectrumFormula::WeightedBlock { h } => {
                for k in 1..=n {
                    let k = k as f64;
                    let (p, q, r) = (h[0][0], k * h[0][1], k * k * h[1][1]);
                    let mean = 0.5 * (p + r);
                    let radius = (0.25 * (p - r) * (p - r) + q * q).sqrt();
                    out.push(mean - radius);
                    out.push(mean + radius);
                }
            }
            SpectrumFormula::Fixed { values } => out.extend(values),
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Outcomes a bundled scenario must reproduce; `None` means no claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectations {
    pub consensus: Option<Consensus>,
    pub krein_singular: Option<bool>,
    pub b_spectrum: Option<SpectrumFormula>,
}

impl Builtin {
    /// Defaults overlaid with `params`.
    pub fn resolved_params(&self, params: &[(String, String)]) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in params {
            match out.iter_mut().find(|(key, _)| key == k) {
                Some(slot) => slot.1 = v.clone(),
                None => out.push((k.clone(), v.clone())),
            }
        }
        out
    }

    pub fn document(&self) -> &'static str {
        self.document
    }

    pub fn scenario(&self, params: &[(String, String)]) -> Result<Scenario> {
        let params = self.resolved_params(params);
        Ok(load_scenario_with_params(
            self.document.as_bytes(),
            &params,
        )?)
    }

    pub fn expectations(&self, params: &[(String, String)]) -> Result<Expectations> {
        let params = self.resolved_params(params);
        let value = |key: &str| -> Result<f64> {
            let text = params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            let expr =
                parse_expr(text).map_err(|e| ScenarioError::Param(format!("{key}={text}: {e}")))?;
            if expr.depends_on_k() {
                return Err(ScenarioError::Param(format!("{key}={text} must not use k")).into());
            }
            eval_expr(&expr, 1)
                .map_err(|e| ScenarioError::Param(format!("{key}={text}: {e}")).into())
        };
        let swap = SpectrumFormula::PlusMinus {
            offset: 0.0,
            step: 1.0,
        };
        let out = match self.name {
            "example-indefinite" => Expectations {
                consensus: Some(Consensus::Unstable),
                krein_singular: Some(true),
                b_spectrum: Some(swap),
            },
            "domains-nested" => Expectations {
                consensus: Some(Consensus::Stable),
                krein_singular: None,
                b_spectrum: Some(SpectrumFormula::WeightedBlock {
                    h: [[1.0, 1.0], [1.0, -1.0]],
                }),
            },
            "domains-general-position" => Expectations {
                consensus: Some(Consensus::Unstable),
                krein_singular: None,
                b_spectrum: Some(SpectrumFormula::WeightedBlock {
                    h: [[1.0, 1.0], [1.0, 0.0]],
                }),
            },
            "mu-family" => {
                let tilt = (2.0 * value("mu")? - 1.0).abs();
                Expectations {
                    consensus: if tilt == 0.0 {
                        Some(Consensus::Stable)
                    } else if tilt >= 0.5 {
                        Some(Consensus::Unstable)
                    } else {
                        None
                    },
                    krein_singular: if tilt == 0.0 {
                        Some(false)
                    } else if tilt == 1.0 {
                        Some(true)
                    } else {
                        None
                    },
                    b_spectrum: Some(swap),
                }
            }
            "offdiag-demo" => Expectations {
                consensus: Some(Consensus::Stable),
                krein_singular: None,
                b_spectrum: Some(SpectrumFormula::Fixed {
                    values: vec![-8.0, 5.0],
                }),
            },
            "dirac-free" => {
                let stable = value("mu")? == 0.5;
                Expectations {
                    consensus: stable.then_some(Consensus::Stable),
                    krein_singular: stable.then_some(false),
                    b_spectrum: Some(SpectrumFormula::PlusMinus {
                        offset: 1.0,
                        step: value("h")?,
                    }),
                }
            }
            "identity-control" => Expectations {
                consensus: Some(Consensus::Stable),
                krein_singular: Some(false),
                b_spectrum: Some(SpectrumFormula::WeightedBlock {
                    h: [[1.0, 0.0], [0.0, 1.0]],
                }),
            },
            _ => Expectations {
                consensus: None,
                krein_singular: None,
                b_spectrum: None,
            },
        };
        Ok(out)
    }
}
