//! Named model families accepted on the command line.

use std::fmt;
use std::str::FromStr;

use chaintrunc::examples::{
    birth_death_kernel, mm1_generator, two_state_generator, BirthDeath, IncrementLaw, ScalarLaw,
};
use chaintrunc::RateMatrix;

use crate::config::NamedParams;

macro_rules! echo_display {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.text)
            }
        }
    };
}

/// Countable kernel: `birth-death:p=<p>`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kernel: BirthDeath,
    text: String,
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let np = NamedParams::parse(s)?;
        match np.name.as_str() {
            "birth-death" => {
                np.expect_keys(&["p"])?;
                let kernel = birth_death_kernel(np.real("p")?).map_err(|e| e.to_string())?;
                Ok(Self { kernel, text: s.trim().to_string() })
            }
            other => Err(format!("unknown kernel `{other}` (expected birth-death:p=<p>)")),
        }
    }
}

echo_display!(KernelSpec);

/// Generator family indexed by state-space size: `mm1:lambda=<a>,mu=<s>`
/// or `two-state:rate=<r>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub family: GeneratorFamily,
    text: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorFamily {
    Mm1 { arrival: f64, service: f64 },
    TwoState { rate: f64 },
}

impl GeneratorSpec {
    /// Member of size `n`; the two-state family ignores `n`.
    pub fn generator(&self, n: usize) -> chaintrunc::Result<RateMatrix> {
        match self.family {
            GeneratorFamily::Mm1 { arrival, service } => mm1_generator(arrival, service, n),
            GeneratorFamily::TwoState { rate } => two_state_generator(rate),
        }
    }

    pub fn is_sized(&self) -> bool {
        matches!(self.family, GeneratorFamily::Mm1 { .. })
    }
}

impl FromStr for GeneratorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let np = NamedParams::parse(s)?;
        let family = match np.name.as_str() {
            "mm1" => {
                np.expect_keys(&["lambda", "mu"])?;
                GeneratorFamily::Mm1 { arrival: np.real("lambda")?, service: np.real("mu")? }
            }
            "two-state" => {
                np.expect_keys(&["rate"])?;
                GeneratorFamily::TwoState { rate: np.real("rate")? }
            }
            other => return Err(format!("unknown generator `{other}` (expected mm1 or two-state)")),
        };
        let spec = Self { family, text: s.trim().to_string() };
        spec.generator(2).map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

echo_display!(GeneratorSpec);

/// Increment law of the limit chain: `uniform:lo=<a>,hi=<b>` or
/// `two-point:up=<u>,p=<p>,down=<d>`. Member `n` shifts it down by `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftFamily {
    pub law: IncrementLaw,
    text: String,
}

impl DriftFamily {
    pub fn member(&self, n: usize) -> IncrementLaw {
        let s = 1.0 / n as f64;
        match self.law {
            IncrementLaw::Constant(c) => IncrementLaw::Constant(c - s),
            IncrementLaw::Uniform { lo, hi } => IncrementLaw::Uniform { lo: lo - s, hi: hi - s },
            IncrementLaw::TwoPoint { up, p_up, down } => IncrementLaw::TwoPoint { up: up - s, p_up, down: down - s },
        }
    }
}

impl FromStr for DriftFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let np = NamedParams::parse(s)?;
        let law = match np.name.as_str() {
            "uniform" => {
                np.expect_keys(&["lo", "hi"])?;
                let (lo, hi) = (np.real("lo")?, np.real("hi")?);
                if !(lo < hi) {
                    return Err(format!("uniform law needs lo < hi, got [{lo}, {hi})"));
                }
                IncrementLaw::Uniform { lo, hi }
            }
            "two-point" => {
                np.expect_keys(&["up", "p", "down"])?;
                let p = np.real("p")?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("probability {p} outside [0, 1]"));
                }
                IncrementLaw::TwoPoint { up: np.real("up")?, p_up: p, down: np.real("down")? }
            }
            "constant" => {
                np.expect_keys(&["c"])?;
                IncrementLaw::Constant(np.real("c")?)
            }
            other => return Err(format!("unknown increment law `{other}`")),
        };
        Ok(Self { law, text: s.trim().to_string() })
    }
}

echo_display!(DriftFamily);

/// Coefficient law: `constant:c=<c>` or `uniform:lo=<a>,hi=<b>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpec {
    pub law: ScalarLaw,
    text: String,
}

impl FromStr for ScalarSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let np = NamedParams::parse(s)?;
        let law = match np.name.as_str() {
            "constant" => {
                np.expect_keys(&["c"])?;
                ScalarLaw::Constant(np.real("c")?)
            }
            "uniform" => {
                np.expect_keys(&["lo", "hi"])?;
                let (lo, hi) = (np.real("lo")?, np.real("hi")?);
                if !(lo < hi) {
                    return Err(format!("uniform law needs lo < hi, got [{lo}, {hi})"));
                }
                ScalarLaw::Uniform { lo, hi }
            }
            other => return Err(format!("unknown coefficient law `{other}`")),
        };
        Ok(Self { law, text: s.trim().to_string() })
    }
}

echo_display!(ScalarSpec);

/// Weight for the weighted bound: `none` or `linear` (`w(x) = x + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSpec {
    None,
    Linear,
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "none" => Ok(Self::None),
            "linear" => Ok(Self::Linear),
            other => Err(format!("unknown weight `{other}` (expected none or linear)")),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Linear => "linear",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        let k: KernelSpec = "birth-death:p=1/3".parse().unwrap();
        assert_eq!(k.kernel.p, 1.0 / 3.0);
        assert_eq!(k.to_string(), "birth-death:p=1/3");
        assert!("birth-death:p=0.7".parse::<KernelSpec>().is_err());
        assert!("birth-death:q=0.2".parse::<KernelSpec>().is_err());
        let g: GeneratorSpec = "mm1:lambda=1,mu=2".parse().unwrap();
        assert_eq!(g.generator(5).unwrap().dim(), 5);
        let d: DriftFamily = "uniform:lo=-0.75,hi=0.25".parse().unwrap();
        assert_eq!(d.member(4), IncrementLaw::Uniform { lo: -1.0, hi: 0.0 });
        let a: ScalarSpec = "constant:c=0.5".parse().unwrap();
        assert_eq!(a.law, ScalarLaw::Constant(0.5));
    }
}
