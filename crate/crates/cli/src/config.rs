//! Run configuration: a JSON document, optionally overridden by flags.

use std::path::Path;

use demuskin::linalg::{is_prime, RingModulus};
use demuskin::systems::{g2_long_heisenberg, g2_short_root_default, generic_heisenberg};
use demuskin::{build_relator, DemuskinPresentation, LeviData, Matrix, NilpotentSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    G2Short,
    G2LongHeisenberg,
    Custom,
}

/// Raw data for a class-2 system. Missing actions default to the identity,
/// a missing bracket to zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSystem {
    pub m_a: usize,
    #[serde(default)]
    pub bracket: Option<Vec<Vec<i64>>>,
    /// One `m_a x m_a` matrix per generator.
    #[serde(default)]
    pub actions: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default)]
    pub z_actions: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    pub s: u32,
    pub n: usize,
    /// `q = p^q_exponent`; defaults to the working precision of the command.
    pub q_exponent: Option<u32>,
    /// One Levi parameter per generator; random from `seed` when absent.
    pub levi: Option<Vec<i64>>,
    pub system: SystemKind,
    pub custom: Option<CustomSystem>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub target_precision: Option<u32>,
    pub sweep_p: Option<Vec<u64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 5,
            s: 1,
            n: 2,
            q_exponent: None,
            levi: None,
            system: SystemKind::G2Short,
            custom: None,
            seed: 0,
            trials: None,
            target_precision: None,
            sweep_p: None,
        }
    }
}

/// Flag values that replace fields of a loaded configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub p: Option<u64>,
    pub s: Option<u32>,
    pub n: Option<usize>,
    pub levi: Option<Vec<i64>>,
    pub system: Option<SystemKind>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub target_precision: Option<u32>,
    pub sweep_p: Option<Vec<u64>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &o.$f { self.$f = v.clone(); } )* };
        }
        set!(p, s, n, system, seed);
        if o.levi.is_some() {
            self.levi = o.levi.clone();
        }
        if o.trials.is_some() {
            self.trials = o.trials;
        }
        if o.target_precision.is_some() {
            self.target_precision = o.target_precision;
        }
        if o.sweep_p.is_some() {
            self.sweep_p = o.sweep_p.clone();
        }
    }

    /// Primes to run, in report order.
    pub fn primes(&self) -> Vec<u64> {
        self.sweep_p.clone().unwrap_or_else(|| vec![self.p])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Invalid(msg));
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and at least 2, got {}", self.n));
        }
        if self.s == 0 {
            return bad("s must be at least 1".into());
        }
        if self.q_exponent == Some(0) {
            return bad("q_exponent must be at least 1".into());
        }
        if self.target_precision == Some(0) {
            return bad("target precision must be at least 1".into());
        }
        if self.sweep_p.as_ref().is_some_and(|v| v.is_empty()) {
            return bad("empty prime sweep".into());
        }
        for p in self.primes() {
            if p < 3 || !is_prime(p) {
                return bad(format!("p must be an odd prime, got {p}"));
            }
            if self.system != SystemKind::Custom && p < 5 {
                return bad(format!("G2 systems need p >= 5, got {p}"));
            }
        }
        if let Some(l) = &self.levi {
            if l.len() != self.n + 2 {
                return bad(format!("levi needs n + 2 = {} entries, got {}", self.n + 2, l.len()));
            }
        }
        if self.system != SystemKind::Custom && self.custom.is_some() {
            return bad("custom payload given for a built-in system".into());
        }
        Ok(())
    }

    /// Seeded generator for stream `index` of prime `p`.
    pub fn rng(&self, p: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((p << 32) | index);
        rng
    }

    pub fn levi_values(&self, p: u64, index: u64, m: &RingModulus) -> Vec<i64> {
        match &self.levi {
            Some(l) => l.clone(),
            None => {
                let mut rng = self.rng(p, index);
                let levi = demuskin::sampling::random_levi(&mut rng, m, self.n + 2);
                levi.values().iter().map(|&v| v as i64).collect()
            }
        }
    }

    /// Presentation with `q = p^e`, `e` the configured exponent or `default_e`.
    pub fn presentation(&self, p: u64, default_e: u32) -> Result<DemuskinPresentation, CliError> {
        let e = self.q_exponent.unwrap_or(default_e);
        let q = p.checked_pow(e).ok_or_else(|| CliError::Invalid(format!("q = {p}^{e} overflows")))?;
        Ok(build_relator(self.n, q)?)
    }

    /// The configured system over `Z/p^precision`.
    pub fn system(&self, p: u64, precision: u32, levi: &[i64]) -> Result<NilpotentSystem, CliError> {
        let m = RingModulus::new(p, precision)?;
        let g = self.n + 2;
        Ok(match self.system {
            SystemKind::G2Short => g2_short_root_default(&LeviData::new(m, levi))?,
            SystemKind::G2LongHeisenberg => g2_long_heisenberg(&LeviData::new(m, levi))?,
            SystemKind::Custom => {
                let c = self.custom.clone().unwrap_or(CustomSystem {
                    m_a: 1,
                    bracket: None,
                    actions: None,
                    z_actions: None,
                });
                let bracket = match &c.bracket {
                    Some(rows) => Matrix::from_rows(rows, &m)?,
                    None => Matrix::zeros(c.m_a, c.m_a),
                };
                let actions = match &c.actions {
                    Some(list) => list.iter().map(|a| Matrix::from_rows(a, &m)).collect::<Result<Vec<_>, _>>()?,
                    None => vec![Matrix::identity(c.m_a); g],
                };
                if actions.len() != g || actions.iter().any(|a| a.rows() != c.m_a || a.cols() != c.m_a) {
                    return Err(CliError::Invalid(format!("custom system needs {g} actions of size {}", c.m_a)));
                }
                if bracket.rows() != c.m_a || bracket.cols() != c.m_a {
                    return Err(CliError::Invalid(format!("custom bracket must be {0} x {0}", c.m_a)));
                }
                let z = c.z_actions.clone().unwrap_or_else(|| vec![1; g]);
                generic_heisenberg(m, bracket, actions, z)?
            }
        })
    }
}
