//! Structured dumps: a versioned TOML document with coefficients written in
//! the expression grammar.

use serde::{Deserialize, Serialize};

use opexp_core::expr::{parse, Expr, Rational, Symbol};
use opexp_core::problem::{ProblemError, Substitution, SubstitutionKind};
use opexp_core::series::{
    ComplexExpr, Component, FourierSeries, GeneralizedSeries, Harmonics, SeriesSolution,
};

use crate::problem_file::parse_rational;

pub const FORMAT: &str = "opexp-dump-1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dump {
    pub format: String,
    /// `taylor`, `generalized` or `fourier`.
    pub series: String,
    pub time: String,
    pub point: String,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitution: Option<SubstitutionDump>,
    #[serde(rename = "component")]
    pub components: Vec<ComponentDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionDump {
    pub kind: String,
    pub var: String,
    pub forward: String,
    pub inverse: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDump {
    pub unknown: String,
    /// Taylor: `k_n`, undivided. Generalized: `b_n`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub re: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<String>,
}

/// Any series a dump can hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnySeries {
    Taylor(SeriesSolution),
    Generalized(GeneralizedSeries),
    Fourier(FourierSeries),
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("not a dump: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported dump format `{0}`")]
    Format(String),
    #[error("bad field `{field}`: {value}")]
    Field { field: &'static str, value: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn sources(v: &[Expr]) -> Vec<String> {
    v.iter().map(Expr::to_source).collect()
}

fn expr(field: &'static str, s: &str) -> Result<Expr, DumpError> {
    parse(s).map_err(|e| DumpError::Field {
        field,
        value: format!("`{s}`: {e}"),
    })
}

fn exprs(field: &'static str, v: &[String]) -> Result<Vec<Expr>, DumpError> {
    v.iter().map(|s| expr(field, s)).collect()
}

fn rational(field: &'static str, s: &str) -> Result<Rational, DumpError> {
    parse_rational(s).ok_or_else(|| DumpError::Field {
        field,
        value: s.into(),
    })
}

fn kind_name(k: SubstitutionKind) -> &'static str {
    match k {
        SubstitutionKind::Identity => "identity",
        SubstitutionKind::Exponential => "exponential",
        SubstitutionKind::Mobius => "mobius",
        SubstitutionKind::Custom => "custom",
    }
}

impl Dump {
    pub fn new(series: &AnySeries) -> Dump {
        match series {
            AnySeries::Taylor(s) => Dump {
                format: FORMAT.into(),
                series: "taylor".into(),
                time: s.time.to_string(),
                point: s.point.to_string(),
                order: s.order,
                tau0: None,
                omega: None,
                substitution: None,
                components: s
                    .components
                    .iter()
                    .map(|c| ComponentDump {
                        unknown: c.unknown.to_string(),
                        coefficients: sources(&c.coefficients),
                        re: Vec::new(),
                        im: Vec::new(),
                    })
                    .collect(),
            },
            AnySeries::Generalized(g) => {
                let sub = &g.substitution;
                Dump {
                    format: FORMAT.into(),
                    series: "generalized".into(),
                    time: sub.time().to_string(),
                    point: g.point.to_string(),
                    order: g.order,
                    tau0: Some(g.tau0.to_string()),
                    omega: None,
                    substitution: Some(SubstitutionDump {
                        kind: kind_name(sub.kind()).into(),
                        var: sub.var().to_string(),
                        forward: sub.forward().to_source(),
                        inverse: sub.inverse().to_source(),
                        parameter: sub.parameter().map(Expr::to_source),
                    }),
                    components: g
                        .components
                        .iter()
                        .map(|c| ComponentDump {
                            unknown: c.unknown.to_string(),
                            coefficients: sources(&c.coefficients),
                            re: Vec::new(),
                            im: Vec::new(),
                        })
                        .collect(),
                }
            }
            AnySeries::Fourier(f) => Dump {
                format: FORMAT.into(),
                series: "fourier".into(),
                time: f.time.to_string(),
                point: f.point.to_string(),
                order: f.order,
                tau0: None,
                omega: Some(f.omega.to_source()),
                substitution: None,
                components: f
                    .components
                    .iter()
                    .map(|h| ComponentDump {
                        unknown: h.unknown.to_string(),
                        coefficients: Vec::new(),
                        re: h.harmonics.iter().map(|z| z.re.to_source()).collect(),
                        im: h.harmonics.iter().map(|z| z.im.to_source()).collect(),
                    })
                    .collect(),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("dump fields are plain strings and integers")
    }

    pub fn from_toml(text: &str) -> Result<Dump, DumpError> {
        let d: Dump = toml::from_str(text)?;
        if d.format != FORMAT {
            return Err(DumpError::Format(d.format));
        }
        Ok(d)
    }

    /// Rebuilds the series the dump describes.
    pub fn series(&self) -> Result<AnySeries, DumpError> {
        let time = Symbol::new(&self.time);
        let point = rational("point", &self.point)?;
        match self.series.as_str() {
            "taylor" => Ok(AnySeries::Taylor(SeriesSolution {
                time,
                point,
                order: self.order,
                components: self.plain_components()?,
            })),
            "generalized" => {
                let sd = self.substitution.as_ref().ok_or(DumpError::Field {
                    field: "substitution",
                    value: "missing".into(),
                })?;
                let var = Symbol::new(&sd.var);
                let param = || {
                    sd.parameter
                        .as_deref()
                        .ok_or(DumpError::Field {
                            field: "parameter",
                            value: "missing".into(),
                        })
                        .and_then(|s| expr("parameter", s))
                };
                let substitution = match sd.kind.as_str() {
                    "identity" => Substitution::identity(&time),
                    "exponential" => Substitution::exponential(&time, &var, &param()?, &point)?,
                    "mobius" => Substitution::mobius(&time, &var, &param()?, &point)?,
                    "custom" => Substitution::custom(
                        &time,
                        &var,
                        expr("forward", &sd.forward)?,
                        expr("inverse", &sd.inverse)?,
                    )?,
                    other => {
                        return Err(DumpError::Field {
                            field: "kind",
                            value: other.into(),
                        })
                    }
                };
                let tau0 = match &self.tau0 {
                    Some(s) => rational("tau0", s)?,
                    None => substitution.image_of(&point)?,
                };
                Ok(AnySeries::Generalized(GeneralizedSeries {
                    substitution,
                    point,
                    tau0,
                    order: self.order,
                    components: self.plain_components()?,
                }))
            }
            "fourier" => {
                let omega = expr(
                    "omega",
                    self.omega.as_deref().ok_or(DumpError::Field {
                        field: "omega",
                        value: "missing".into(),
                    })?,
                )?;
                let components = self
                    .components
                    .iter()
                    .map(|c| {
                        if c.re.len() != c.im.len() {
                            return Err(DumpError::Field {
                                field: "im",
                                value: format!(
                                    "{} real parts but {} imaginary parts",
                                    c.re.len(),
                                    c.im.len()
                                ),
                            });
                        }
                        let harmonics = exprs("re", &c.re)?
                            .into_iter()
                            .zip(exprs("im", &c.im)?)
                            .map(|(re, im)| ComplexExpr { re, im })
                            .collect();
                        Ok(Harmonics {
                            unknown: Symbol::new(&c.unknown),
                            harmonics,
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Ok(AnySeries::Fourier(FourierSeries {
                    time,
                    point,
                    omega,
                    order: self.order,
                    components,
                }))
            }
            other => Err(DumpError::Field {
                field: "series",
                value: other.into(),
            }),
        }
    }

    fn plain_components(&self) -> Result<Vec<Component>, DumpError> {
        self.components
            .iter()
            .map(|c| {
                Ok(Component {
                    unknown: Symbol::new(&c.unknown),
                    coefficients: exprs("coefficients", &c.coefficients)?,
                })
            })
            .collect()
    }
}
