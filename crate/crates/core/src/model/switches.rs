use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bundle-to-bundle propagation along the shared-item meta-path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum B2bMode {
    None,
    /// `1/|M_b|` on the overlap support.
    Unweighted,
    /// Overlap-normalized β.
    #[default]
    Weighted,
}

impl fmt::Display for B2bMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            B2bMode::None => "none",
            B2bMode::Unweighted => "unweighted",
            B2bMode::Weighted => "weighted",
        })
    }
}

impl FromStr for B2bMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(B2bMode::None),
            "unweighted" => Ok(B2bMode::Unweighted),
            "weighted" => Ok(B2bMode::Weighted),
            _ => Err(Error::config("b2b", format!("unknown mode {s:?}"))),
        }
    }
}

/// Which propagation levels contribute to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AblationSwitches {
    pub item_level: bool,
    pub bundle_level: bool,
    pub b2b: B2bMode,
}

impl Default for AblationSwitches {
    fn default() -> Self {
        Self {
            item_level: true,
            bundle_level: true,
            b2b: B2bMode::Weighted,
        }
    }
}

impl AblationSwitches {
    pub fn validate(&self) -> Result<()> {
        if !self.item_level && !self.bundle_level {
            return Err(Error::config(
                "ablation",
                "at least one propagation level must be enabled",
            ));
        }
        Ok(())
    }

    /// Every valid combination of levels and b2b modes.
    pub fn all() -> Vec<AblationSwitches> {
        let mut out = Vec::new();
        for (item_level, bundle_level) in [(true, true), (true, false), (false, true)] {
            for b2b in [B2bMode::None, B2bMode::Unweighted, B2bMode::Weighted] {
                out.push(AblationSwitches {
                    item_level,
                    bundle_level,
                    b2b,
                });
            }
        }
        out
    }

    /// Whether the b2b term takes part in the forward pass.
    pub fn uses_b2b(&self) -> bool {
        self.bundle_level && self.b2b != B2bMode::None
    }
}

impl fmt::Display for AblationSwitches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels = match (self.item_level, self.bundle_level) {
            (true, true) => "item+bundle",
            (true, false) => "item",
            (false, true) => "bundle",
            (false, false) => "none",
        };
        write!(f, "levels={levels} b2b={}", self.b2b)
    }
}
