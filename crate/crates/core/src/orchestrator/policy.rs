use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Controllers compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Actor proposes candidates, GP critic ranks them.
    Lab,
    /// Exhaustive search on the true utility.
    Ideal,
    /// GP critic over the full action space.
    #[serde(rename = "fullbo")]
    FullBo,
    /// Always the native resolution.
    #[serde(rename = "delayobli")]
    DelayObli,
    /// Always the coarsest level.
    #[serde(rename = "delaymin")]
    DelayMin,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Lab,
        PolicyKind::Ideal,
        PolicyKind::FullBo,
        PolicyKind::DelayObli,
        PolicyKind::DelayMin,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lab => "lab",
            PolicyKind::Ideal => "ideal",
            PolicyKind::FullBo => "fullbo",
            PolicyKind::DelayObli => "delayobli",
            PolicyKind::DelayMin => "delaymin",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| LabError::domain(format!("unknown policy '{s}' (expected one of lab, ideal, fullbo, delayobli, delaymin, random)")))
    }
}
