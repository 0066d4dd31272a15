//! Parsing of `--source` specifications.

use std::str::FromStr;

use anyhow::{bail, Context};
use atb_core::experiments::{equilateral_d0, sharp_transition_d0, unit_square_d0};
use atb_core::sources::{
    build_counterexample_interp, build_counterexample_l2, build_sharp_transition,
};
use atb_core::{pgm, FunctionSource, QuadraticForm, Triangle};

/// A function to approximate together with its initial triangulation.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    /// `sharp:<delta>`
    Sharp(f64),
    /// `quadratic:<q11>,<q12>,<q22>` on the unit square
    Quadratic(QuadraticForm),
    /// `sine:<m>`, the function `sin(2 pi m x)`
    Sine(usize),
    /// `legendre`, the periodized profile with a jump at `x = 1/2`
    Legendre,
    /// `pgm:<path>`
    Pgm(String),
}

impl FromStr for SourceSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        Ok(match name {
            "sharp" => SourceSpec::Sharp(arg.parse().context("sharp:<delta> needs a number")?),
            "quadratic" => SourceSpec::Quadratic(parse_form(arg)?),
            "sine" => SourceSpec::Sine(arg.parse().context("sine:<m> needs an integer")?),
            "legendre" => SourceSpec::Legendre,
            "pgm" if !arg.is_empty() => SourceSpec::Pgm(arg.to_string()),
            _ => bail!(
                "unknown source `{s}` (expected sharp:<delta>, quadratic:<a>,<b>,<c>, sine:<m>, legendre or pgm:<path>)"
            ),
        })
    }
}

/// `a,b,c` as the form `a x^2 + 2 b x y + c y^2`.
pub fn parse_form(s: &str) -> anyhow::Result<QuadraticForm> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad quadratic form `{s}`"))?;
    match v[..] {
        [a, b, c] => Ok(QuadraticForm::new(a, b, c)),
        _ => bail!("quadratic form needs three coefficients q11,q12,q22, got `{s}`"),
    }
}

impl SourceSpec {
    pub fn build(&self) -> anyhow::Result<(FunctionSource, Vec<Triangle>)> {
        Ok(match self {
            SourceSpec::Sharp(delta) => (build_sharp_transition(*delta)?, sharp_transition_d0()),
            SourceSpec::Quadratic(q) => (FunctionSource::quadratic(*q), unit_square_d0()),
            SourceSpec::Sine(m) => (build_counterexample_interp(*m)?, unit_square_d0()),
            SourceSpec::Legendre => (build_counterexample_l2(), unit_square_d0()),
            SourceSpec::Pgm(path) => {
                let grid = pgm::read(path).with_context(|| format!("reading {path}"))?;
                (FunctionSource::pixel_grid(grid), unit_square_d0())
            }
        })
    }
}

/// Initial triangulations a bit stream can be decoded against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum InitialMesh {
    Unit,
    Sharp,
    Equilateral,
}

impl InitialMesh {
    pub fn triangles(self) -> Vec<Triangle> {
        match self {
            InitialMesh::Unit => unit_square_d0(),
            InitialMesh::Sharp => sharp_transition_d0(),
            InitialMesh::Equilateral => equilateral_d0(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources() {
        assert_eq!(
            "sharp:0.2".parse::<SourceSpec>().unwrap(),
            SourceSpec::Sharp(0.2)
        );
        assert_eq!(
            "quadratic:1,0,-10".parse::<SourceSpec>().unwrap(),
            SourceSpec::Quadratic(QuadraticForm::new(1.0, 0.0, -10.0))
        );
        assert_eq!(
            "legendre".parse::<SourceSpec>().unwrap(),
            SourceSpec::Legendre
        );
        assert!("quadratic:1,2".parse::<SourceSpec>().is_err());
        assert!("pgm:".parse::<SourceSpec>().is_err());
        assert!("disk".parse::<SourceSpec>().is_err());
    }
}
