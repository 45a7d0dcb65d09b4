//! TOML problem files.
//!
//! ```toml
//! name = "decay"
//! interior = ["u0_xx + 3 u0_x + 2 u0 = 0"]
//! scheme = "trapezoid"          # OCP problems only
//!
//! [domain]
//! x = [0.0, 1.0]
//! # y = [0.0, 1.0]
//!
//! [[unknown]]
//! name = "u"
//! lbd = 0.0
//! ubd = 10.0
//!
//! [[boundary]]
//! face = "x_min"
//! equation = "u0_x = -14.778112197861301"
//!
//! [objective]
//! kind = "neg_sum"              # midpoint | integral | free_time
//! ```
//!
//! Equations are written `lhs = rhs` with polynomial sides in the reserved
//! symbols; they are stored as `lhs - rhs = 0`.

use std::path::Path;

use serde::Deserialize;

use crate::problems::*;
use crate::CoreError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: Option<String>,
    domain: RawDomain,
    #[serde(rename = "unknown")]
    unknowns: Vec<RawBounds>,
    #[serde(default, rename = "scalar")]
    scalars: Vec<RawBounds>,
    #[serde(default)]
    interior: Vec<String>,
    #[serde(default)]
    boundary: Vec<RawBoundary>,
    #[serde(default)]
    dynamics: Vec<RawDynamics>,
    #[serde(default, rename = "override")]
    overrides: Vec<RawOverride>,
    objective: RawObjective,
    scheme: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x: [f64; 2],
    y: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    name: String,
    lbd: f64,
    ubd: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    face: String,
    equation: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    state: String,
    rhs: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverride {
    unknown: String,
    x: [f64; 2],
    y: Option<[f64; 2]>,
    lbd: f64,
    ubd: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObjective {
    kind: String,
    unknowns: Option<Vec<String>>,
    unknown: Option<String>,
    integrand: Option<String>,
    scalar: Option<String>,
}

fn fmt_err(msg: impl Into<String>) -> CoreError {
    CoreError::Format(msg.into())
}

/// Unknowns may be referenced by declared name or by `u{k}`.
fn unknown_index(names: &[String], s: &str) -> Result<usize, CoreError> {
    if let Some(k) = names.iter().position(|n| n == s) {
        return Ok(k);
    }
    s.strip_prefix('u')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&k| k < names.len())
        .ok_or_else(|| fmt_err(format!("unknown function `{s}`")))
}

fn parse_face(s: &str) -> Result<Face, CoreError> {
    match s {
        "x_min" => Ok(Face::XMin),
        "x_max" => Ok(Face::XMax),
        "y_min" => Ok(Face::YMin),
        "y_max" => Ok(Face::YMax),
        _ => Err(fmt_err(format!("face `{s}` is not one of x_min, x_max, y_min, y_max"))),
    }
}

fn parse_equation(syms: &SymbolTable, text: &str) -> Result<Equation, CoreError> {
    let mut parts = text.split('=');
    let (lhs, rhs) = match (parts.next(), parts.next(), parts.next()) {
        (Some(l), Some(r), None) => (l, r),
        (Some(l), None, None) => (l, "0"),
        _ => return Err(fmt_err(format!("equation `{text}` has more than one `=`"))),
    };
    let lhs = syms.parse(lhs).map_err(|e| fmt_err(format!("`{text}`: {e}")))?;
    let rhs = syms.parse(rhs).map_err(|e| fmt_err(format!("`{text}`: {e}")))?;
    Ok(Equation { lhs: lhs.sub(&rhs)?, rhs: Rhs::Const(0.0) })
}

/// Parses a problem from TOML text and validates it.
pub fn problem_from_toml(text: &str) -> Result<DiffProblem, CoreError> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
    let domain = match raw.domain.y {
        None => Domain::interval(raw.domain.x[0], raw.domain.x[1]),
        Some(y) => Domain::rectangle(raw.domain.x[0], raw.domain.x[1], y[0], y[1]),
    };
    let names: Vec<String> = raw.unknowns.iter().map(|u| u.name.clone()).collect();
    let unknowns: Vec<Unknown> =
        raw.unknowns.iter().map(|u| Unknown { name: u.name.clone(), lbd: u.lbd, ubd: u.ubd }).collect();
    let scalars: Vec<ScalarVar> =
        raw.scalars.iter().map(|s| ScalarVar { name: s.name.clone(), lbd: s.lbd, ubd: s.ubd }).collect();
    let syms = SymbolTable { unknowns: unknowns.len(), scalars: scalars.iter().map(|s| s.name.clone()).collect() };

    let interior = raw.interior.iter().map(|e| parse_equation(&syms, e)).collect::<Result<Vec<_>, _>>()?;
    let boundary = raw
        .boundary
        .iter()
        .map(|b| Ok(BoundaryEq { face: parse_face(&b.face)?, eq: parse_equation(&syms, &b.equation)? }))
        .collect::<Result<Vec<_>, CoreError>>()?;
    let dynamics = raw
        .dynamics
        .iter()
        .map(|d| {
            let rhs = syms.parse(&d.rhs).map_err(|e| fmt_err(format!("`{}`: {e}", d.rhs)))?;
            Ok(Dynamics { state: unknown_index(&names, &d.state)?, rhs })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let overrides = raw
        .overrides
        .iter()
        .map(|o| {
            let y = o.y.unwrap_or([domain.y_min, domain.y_max]);
            Ok(BoundOverride {
                unknown: unknown_index(&names, &o.unknown)?,
                x_range: (o.x[0], o.x[1]),
                y_range: (y[0], y[1]),
                lbd: o.lbd,
                ubd: o.ubd,
            })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;

    let o = &raw.objective;
    let objective = match o.kind.as_str() {
        "neg_sum" => match &o.unknowns {
            None => Objective::NegSum((0..names.len()).collect()),
            Some(list) => Objective::NegSum(list.iter().map(|s| unknown_index(&names, s)).collect::<Result<_, _>>()?),
        },
        "midpoint" => Objective::Midpoint(match &o.unknown {
            None => 0,
            Some(s) => unknown_index(&names, s)?,
        }),
        "integral" => {
            let f = o.integrand.as_deref().ok_or_else(|| fmt_err("integral objective needs `integrand`"))?;
            Objective::Integral(syms.parse(f).map_err(|e| fmt_err(format!("`{f}`: {e}")))?)
        }
        "free_time" => {
            let j = match &o.scalar {
                None if scalars.len() == 1 => 0,
                None => return Err(fmt_err("free_time objective needs `scalar`")),
                Some(s) => scalars
                    .iter()
                    .position(|v| &v.name == s)
                    .ok_or_else(|| fmt_err(format!("no scalar named `{s}`")))?,
            };
            Objective::FreeTime(j)
        }
        k => return Err(fmt_err(format!("objective kind `{k}` is not one of neg_sum, midpoint, integral, free_time"))),
    };
    let scheme = match raw.scheme.as_deref() {
        None | Some("trapezoid") => OcpScheme::Trapezoid,
        Some("forward_euler") => OcpScheme::ForwardEuler,
        Some(s) => return Err(fmt_err(format!("scheme `{s}` is not one of trapezoid, forward_euler"))),
    };

    let p = DiffProblem {
        name: raw.name.unwrap_or_else(|| "problem".into()),
        domain,
        reference: vec![None; unknowns.len()],
        unknowns,
        scalars,
        interior,
        boundary,
        dynamics,
        scheme,
        overrides,
        objective,
    };
    p.validate()?;
    Ok(p)
}

pub fn load_problem_file(path: impl AsRef<Path>) -> Result<DiffProblem, CoreError> {
    problem_from_toml(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::transcribe;

    const ODE: &str = r#"
name = "ode"
interior = ["u0_xx + 3 u0_x + 2 u0 = 0"]

[domain]
x = [0.0, 1.0]

[[unknown]]
name = "u"
lbd = 0.0
ubd = 10.0

[[boundary]]
face = "x_min"
equation = "u0_x = -14.7781121978613"

[[boundary]]
face = "x_max"
equation = "u0_x + 2 = 0"

[objective]
kind = "neg_sum"
"#;

    #[test]
    fn file_matches_preset_transcription() {
        let p = problem_from_toml(ODE).unwrap();
        let q = preset(PresetName::LinearOde);
        let g = Grid::new(p.domain, 21, 1).unwrap();
        let a = transcribe(&p, &g).unwrap();
        let b = transcribe(&q, &g).unwrap();
        assert_eq!(a.eqs.len(), b.eqs.len());
        let x: Vec<f64> = (0..a.nvars).map(|i| 0.3 + 0.01 * i as f64).collect();
        for (h1, h2) in a.eqs.iter().zip(&b.eqs) {
            let (v1, v2) = (h1.evaluate(&x).unwrap(), h2.evaluate(&x).unwrap());
            assert!((v1 - v2).abs() < 1e-9 * (1.0 + v2.abs()), "{v1} vs {v2}");
        }
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn ocp_file() {
        let text = r#"
scheme = "forward_euler"
[domain]
x = [0.0, 1.0]
[[unknown]]
name = "x1"
lbd = -1.0
ubd = 10.0
[[unknown]]
name = "u"
lbd = -1.0
ubd = 1.0
[[scalar]]
name = "T"
lbd = 0.1
ubd = 5.0
[[dynamics]]
state = "x1"
rhs = "T u1"
[[boundary]]
face = "x_min"
equation = "u0 = 0.8"
[[override]]
unknown = "u"
x = [0.0, 0.5]
lbd = 0.0
ubd = 1.0
[objective]
kind = "free_time"
"#;
        let p = problem_from_toml(text).unwrap();
        assert_eq!(p.scheme, OcpScheme::ForwardEuler);
        assert_eq!(p.objective, Objective::FreeTime(0));
        assert_eq!(p.dynamics[0].state, 0);
        assert_eq!(p.overrides[0].unknown, 1);
        assert_eq!(p.dynamics[0].rhs, p.symbols().parse("T u1").unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let bad_face = ODE.replace("x_max\"", "top\"");
        assert!(matches!(problem_from_toml(&bad_face), Err(CoreError::Format(_))));
        let bad_sym = ODE.replace("u0_xx", "w_xx");
        assert!(problem_from_toml(&bad_sym).is_err());
        let bad_bounds = ODE.replace("ubd = 10.0", "ubd = -1.0");
        assert!(matches!(problem_from_toml(&bad_bounds), Err(CoreError::Problem(_))));
        let two_eq = ODE.replace("= 0\"]", "= 0 = 1\"]");
        assert!(problem_from_toml(&two_eq).is_err());
        assert!(problem_from_toml("name = 3").is_err());
    }
}
