use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CatalogEntry, ChartError, CustomKind, KahlerChart};

fn one() -> f64 {
    1.0
}

/// Serializable chart description, as found under `chart` in a config file.
///
/// The short form accepted on the command line is `kind[:params]`, e.g.
/// `product-of-disks:-2,-2`, `fubini-study:1,1`, `ball:2,-3`,
/// `custom:2:bundle=exp(z1*conj(z1))` or `custom:1:potential=...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChartSpec {
    Flat {
        n: usize,
    },
    FubiniStudy {
        n: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Ball {
        n: usize,
        lambda: f64,
    },
    SpaceFormDisk {
        curvature: f64,
    },
    ProductOfDisks {
        curvatures: Vec<f64>,
    },
    SiegelJacobi,
    BurnsSimanca,
    Custom {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bundle_metric: Option<String>,
    },
}

impl ChartSpec {
    pub fn build(&self) -> Result<KahlerChart, ChartError> {
        let entry = match self.clone() {
            ChartSpec::Flat { n } => CatalogEntry::Flat { n },
            ChartSpec::FubiniStudy { n, scale } => CatalogEntry::FubiniStudy { n, scale },
            ChartSpec::Ball { n, lambda } => CatalogEntry::Ball { n, lambda },
            ChartSpec::SpaceFormDisk { curvature } => CatalogEntry::SpaceFormDisk { curvature },
            ChartSpec::ProductOfDisks { curvatures } => CatalogEntry::ProductOfDisks { curvatures },
            ChartSpec::SiegelJacobi => CatalogEntry::SiegelJacobi,
            ChartSpec::BurnsSimanca => CatalogEntry::BurnsSimanca,
            ChartSpec::Custom {
                n,
                potential,
                bundle_metric,
            } => {
                return match (potential, bundle_metric) {
                    (None, Some(h)) => KahlerChart::custom(n, &h, CustomKind::BundleMetric),
                    (Some(p), None) => KahlerChart::custom(n, &p, CustomKind::Potential),
                    _ => Err(ChartError::InvalidParameter(
                        "custom chart needs exactly one of `potential` or `bundle_metric`".into(),
                    )),
                }
            }
        };
        KahlerChart::new(entry)
    }
}

fn numbers(params: &str) -> Result<Vec<f64>, ChartError> {
    if params.trim().is_empty() {
        return Ok(Vec::new());
    }
    params
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ChartError::InvalidParameter(format!("`{s}` is not a number")))
        })
        .collect()
}

fn count(x: f64) -> Result<usize, ChartError> {
    if x.fract() == 0.0 && x >= 1.0 {
        Ok(x as usize)
    } else {
        Err(ChartError::InvalidParameter(format!("`{x}` is not a positive integer")))
    }
}

impl FromStr for ChartSpec {
    type Err = ChartError;

    fn from_str(s: &str) -> Result<ChartSpec, ChartError> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let wrong = |usage: &str| ChartError::InvalidParameter(format!("usage: {usage}"));
        if kind == "custom" {
            let (n, body) = params
                .split_once(':')
                .ok_or_else(|| wrong("custom:N:bundle=EXPR or custom:N:potential=EXPR"))?;
            let n = count(numbers(n)?.first().copied().unwrap_or(0.0))?;
            return match body.split_once('=') {
                Some(("bundle", e)) | Some(("bundle_metric", e)) | Some(("H", e)) => {
                    Ok(ChartSpec::Custom {
                        n,
                        potential: None,
                        bundle_metric: Some(e.to_string()),
                    })
                }
                Some(("potential", e)) => Ok(ChartSpec::Custom {
                    n,
                    potential: Some(e.to_string()),
                    bundle_metric: None,
                }),
                _ => Err(wrong("custom:N:bundle=EXPR or custom:N:potential=EXPR")),
            };
        }
        let v = numbers(params)?;
        Ok(match (kind, v.as_slice()) {
            ("flat", [n]) => ChartSpec::Flat { n: count(*n)? },
            ("flat", _) => return Err(wrong("flat:N")),
            ("fubini-study", [n]) => ChartSpec::FubiniStudy {
                n: count(*n)?,
                scale: 1.0,
            },
            ("fubini-study", [n, scale]) => ChartSpec::FubiniStudy {
                n: count(*n)?,
                scale: *scale,
            },
            ("fubini-study", _) => return Err(wrong("fubini-study:N[,SCALE]")),
            ("ball", [n, lambda]) => ChartSpec::Ball {
                n: count(*n)?,
                lambda: *lambda,
            },
            ("ball", _) => return Err(wrong("ball:N,LAMBDA")),
            ("space-form-disk", [c]) => ChartSpec::SpaceFormDisk { curvature: *c },
            ("space-form-disk", _) => return Err(wrong("space-form-disk:CURVATURE")),
            ("product-of-disks", cs) if !cs.is_empty() => ChartSpec::ProductOfDisks {
                curvatures: cs.to_vec(),
            },
            ("product-of-disks", _) => return Err(wrong("product-of-disks:C1,C2,...")),
            ("siegel-jacobi", []) => ChartSpec::SiegelJacobi,
            ("burns-simanca", []) => ChartSpec::BurnsSimanca,
            _ => return Err(ChartError::InvalidParameter(format!("unknown chart `{s}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert_eq!(
            "product-of-disks:-2,-2".parse::<ChartSpec>().unwrap(),
            ChartSpec::ProductOfDisks {
                curvatures: vec![-2.0, -2.0]
            }
        );
        assert_eq!("burns-simanca".parse::<ChartSpec>().unwrap(), ChartSpec::BurnsSimanca);
        let c: ChartSpec = "custom:1:bundle=exp(z1*conj(z1))".parse().unwrap();
        assert!(c.build().unwrap().has_bundle_metric());
        assert!("flat:1.5".parse::<ChartSpec>().is_err());
        assert!("torus".parse::<ChartSpec>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec: ChartSpec =
            serde_json::from_str(r#"{"kind":"fubini-study","n":2}"#).unwrap();
        assert_eq!(spec, ChartSpec::FubiniStudy { n: 2, scale: 1.0 });
        let back: ChartSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let bad = serde_json::from_str::<ChartSpec>(r#"{"kind":"custom","n":1}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
