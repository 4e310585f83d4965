//! Machine-readable run reports.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Conventions every number in a report depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub commutator: String,
    pub d1_sign: String,
    pub cochain_extension: String,
    pub bracket_constants: String,
    pub power_formula: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            commutator: "(x, y) = x^-1 y^-1 x y".into(),
            d1_sign: "d1(v)_i = (rho(x_i) - 1) v".into(),
            cochain_extension: "c(gh) = c(g) + g c(h) + [c(g), g c(h)] / 2".into(),
            bracket_constants: format!(
                "sym^3 basis E_j = e1^(3-j) e2^j with e2 -> l e1 + e2; [E0, E3] = {}, [E1, E2] = {}",
                demuskin::systems::G2_DEFAULT_B03,
                demuskin::systems::G2_DEFAULT_B12
            ),
            power_formula: "u = (-3 a3, a2, a1, 3 a0), u4 = 3 z / b12".into(),
        }
    }
}

/// Result for one prime of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub p: u64,
    pub passed: bool,
    pub summary: String,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub conventions: Conventions,
    pub notes: Vec<String>,
    pub instances: Vec<InstanceReport>,
    pub passed: bool,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One line per instance plus a verdict line.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            let tag = if inst.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{} p={} {tag}: {}\n", self.command, inst.p, inst.summary));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        let tag = if self.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{} {tag} ({:.1} ms)\n", self.command, self.timing_ms));
        out
    }
}
