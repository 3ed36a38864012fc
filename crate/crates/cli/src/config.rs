//! On-disk run configuration.

use std::path::Path;

use dmupf::dmuss::AccessStructure;
use dmupf::pointfn::PointFunction;
use dmupf::protocol::{random_functions, Demands, ProtocolConfig};
use dmupf::FieldCtx;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub q: u64,
    pub m: usize,
    /// Monic modulus coefficients, constant term first.
    #[serde(default)]
    pub modulus: Option<Vec<u64>>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<FieldCtx, CliError> {
        let ctx = match &self.modulus {
            Some(coeffs) => FieldCtx::with_modulus(self.q, self.m, coeffs.clone()),
            None => FieldCtx::new(self.q, self.m),
        };
        ctx.map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(rename = "X")]
    pub x: usize,
    /// Field element indices.
    #[serde(rename = "Z")]
    pub z: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DemandSpec {
    Explicit(Vec<usize>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSpec,
    #[serde(rename = "T")]
    pub domain: usize,
    #[serde(rename = "N")]
    pub servers: usize,
    pub access: Vec<Vec<usize>>,
    #[serde(rename = "R")]
    pub rates: Vec<usize>,
    #[serde(default)]
    pub functions: Option<Vec<FunctionSpec>>,
    pub demands: DemandSpec,
    pub seed: u64,
    #[serde(default)]
    pub budget: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Invalid(format!("invalid config {}: {e}", path.display())))
    }

    pub fn access(&self) -> Result<AccessStructure, CliError> {
        Ok(AccessStructure::new(self.servers, self.access.clone())?)
    }

    pub fn demands(&self) -> Result<Demands, CliError> {
        match &self.demands {
            DemandSpec::Explicit(v) => Ok(Demands::Explicit(v.clone())),
            DemandSpec::Keyword(s) if s == "exhaustive" => Ok(Demands::Exhaustive),
            DemandSpec::Keyword(s) => Err(CliError::Invalid(format!(
                "demands must be a list of points or \"exhaustive\", got \"{s}\""
            ))),
        }
    }

    /// Budget from `DMUPF_BUDGET`, else the config, else the default.
    pub fn budget(&self) -> Result<u64, CliError> {
        match std::env::var("DMUPF_BUDGET") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("DMUPF_BUDGET is not an integer: {v}"))),
            Err(_) => Ok(self.budget.unwrap_or(dmupf::analysis::DEFAULT_BUDGET)),
        }
    }

    pub fn protocol(&self, seed: u64) -> Result<ProtocolConfig, CliError> {
        let field = self.field.build()?;
        let access = self.access()?;
        let functions = match &self.functions {
            Some(specs) => specs
                .iter()
                .map(|f| {
                    let z =
                        f.z.iter()
                            .map(|&i| field.from_index(i))
                            .collect::<dmupf::Result<Vec<_>>>()?;
                    PointFunction::new(&field, self.domain, f.x, z)
                })
                .collect::<dmupf::Result<Vec<_>>>()?,
            None => random_functions(&field, self.domain, &self.rates, seed)?,
        };
        Ok(ProtocolConfig::new(
            field,
            self.domain,
            access,
            self.rates.clone(),
            seed,
            functions,
            self.demands()?,
        )?)
    }
}

/// Parses `"1,2,3;3,4,5"` into access sets.
pub fn parse_access(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split(';')
        .map(|set| {
            parse_list(set).map_err(|e| CliError::Invalid(format!("access set \"{set}\": {e}")))
        })
        .collect()
}

pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("\"{v}\": {e}"))
        })
        .collect()
}

/// Parses `A..B` (end exclusive).
pub fn parse_range(text: &str) -> Result<std::ops::Range<u64>, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got \"{text}\""))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("\"{a}\": {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("\"{b}\": {e}"))?;
    if b <= a {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn access_and_ranges() {
        assert_eq!(
            parse_access("1,2,3;3, 4,5").unwrap(),
            vec![vec![1, 2, 3], vec![3, 4, 5]]
        );
        assert!(parse_access("1,,2").is_err());
        assert_eq!(parse_range("3..7").unwrap(), 3..7);
        assert!(parse_range("7..7").is_err());
        assert!(parse_range("7").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"field":{"q":7,"m":1},"T":2,"N":2,"access":[[1,2]],"R":[1],
            "demands":"exhaustive","seed":0,"colour":1}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
        let nested = r#"{"field":{"q":7,"m":1,"p":2},"T":2,"N":2,"access":[[1,2]],"R":[1],
            "demands":"exhaustive","seed":0}"#;
        assert!(serde_json::from_str::<RunConfig>(nested).is_err());
    }

    #[test]
    fn demand_keyword() {
        let text = r#"{"field":{"q":7,"m":1},"T":2,"N":2,"access":[[1,2]],"R":[1],
            "demands":"all","seed":0}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.demands().is_err());
    }
}
