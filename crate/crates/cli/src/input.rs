//! State and matrix inputs.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use hermitian_core::{HermitianMatrix, RealMatrixJson, RealSymmetric};
use states::{dicke, family_rho_aap, family_rho_ab, rho_from_triple, Scale, TripleJson, TripleXYZ};

/// A named state family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    RhoAap(f64, f64),
    RhoAb(f64, f64),
    Dicke(usize, usize, usize),
}

impl FromStr for Family {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').with_context(|| format!("expected NAME:ARGS, got {s:?}"))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let floats = |k: usize| -> Result<Vec<f64>> {
            if args.len() != k {
                bail!("{name} takes {k} parameters, got {}", args.len());
            }
            args.iter().map(|a| a.parse::<f64>().with_context(|| format!("bad number {a:?}"))).collect()
        };
        match name {
            "rho_aap" => {
                let v = floats(2)?;
                Ok(Family::RhoAap(v[0], v[1]))
            }
            "rho_ab" => {
                let v = floats(2)?;
                Ok(Family::RhoAb(v[0], v[1]))
            }
            "dicke" => {
                if args.len() != 3 {
                    bail!("dicke takes n,i,j");
                }
                let v: Vec<usize> = args
                    .iter()
                    .map(|a| a.parse().with_context(|| format!("bad index {a:?}")))
                    .collect::<Result<_>>()?;
                if v[0] == 0 || v[1] == 0 || v[2] == 0 || v[1] > v[0] || v[2] > v[0] {
                    bail!("dicke indices are 1-based and at most n");
                }
                Ok(Family::Dicke(v[0], v[1], v[2]))
            }
            other => bail!("unknown family {other:?} (rho_aap, rho_ab, dicke)"),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::RhoAap(a, ap) => write!(f, "rho_aap:{a},{ap}"),
            Family::RhoAb(a, b) => write!(f, "rho_ab:{a},{b}"),
            Family::Dicke(n, i, j) => write!(f, "dicke:{n},{i},{j}"),
        }
    }
}

impl Family {
    pub fn state(&self) -> HermitianMatrix {
        match *self {
            Family::RhoAap(a, ap) => family_rho_aap(a, ap, Scale::Raw),
            Family::RhoAb(a, b) => family_rho_ab(a, b, Scale::Raw),
            Family::Dicke(n, i, j) => dicke(n, i - 1, j - 1),
        }
    }
}

/// Reads a dense Hermitian or a triple JSON file. A Hermitian matrix given
/// without registers gets `[n, n]` when its dimension is a square.
pub fn read_state(path: &Path) -> Result<HermitianMatrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("dim").is_some() {
        let mut json: hermitian_core::HermitianJson = serde_json::from_value(value)?;
        if json.registers.is_empty() {
            let n = (json.dim as f64).sqrt().round() as usize;
            if n * n != json.dim {
                bail!("state of dimension {} needs explicit registers", json.dim);
            }
            json.registers = vec![n, n];
        }
        return Ok(HermitianMatrix::from_json(&json)?);
    }
    if value.get("X").is_some() {
        let json: TripleJson = serde_json::from_value(value)?;
        return Ok(rho_from_triple(&TripleXYZ::from_json(&json)?));
    }
    bail!("{}: expected a Hermitian matrix (\"dim\", \"re\") or a triple (\"X\", \"Y_re\", \"Z_re\")", path.display())
}

/// `horn` or a `{"n", "entries"}` file.
pub fn read_symmetric(spec: &str) -> Result<RealSymmetric> {
    if spec == "horn" {
        return Ok(cop::horn());
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let json: RealMatrixJson = serde_json::from_str(&text).with_context(|| format!("parsing {spec}"))?;
    Ok(RealSymmetric::from_json(&json)?)
}

/// `3,4,5` or `3-5` (inclusive).
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi): (usize, usize) = (lo.trim().parse()?, hi.trim().parse()?);
        if lo > hi {
            bail!("empty range {s:?}");
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|v| v.trim().parse::<usize>().with_context(|| format!("bad value {v:?}"))).collect()
}
