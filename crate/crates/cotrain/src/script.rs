//! Adversary scripts: which party cheats and how.
//!
//! ```toml
//! party = 1
//!
//! [[mutation]]
//! tamper = "share-shift"
//! iteration = 0
//! phase = "from-shares"   # optional; must agree with the tamper
//! ```

use std::path::Path;

use cotrain_core::protocol::{Adversary, Mutation, Phase, Tamper};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    party: u16,
    mutation: Vec<RawMutation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMutation {
    tamper: String,
    #[serde(default)]
    iteration: u32,
    phase: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryScript {
    pub party: u16,
    pub adversary: Adversary,
}

impl AdversaryScript {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let raw: RawScript = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if raw.mutation.is_empty() {
            return Err(HarnessError::Config("adversary script lists no mutation".into()));
        }
        let mutations = raw
            .mutation
            .iter()
            .map(|m| {
                let tamper = Tamper::parse(&m.tamper)
                    .ok_or_else(|| HarnessError::Config(format!("unknown tamper {:?}", m.tamper)))?;
                if let Some(p) = &m.phase {
                    let phase = Phase::parse(p).ok_or_else(|| HarnessError::Config(format!("unknown phase {p:?}")))?;
                    if phase != tamper.phase() {
                        return Err(HarnessError::Config(format!(
                            "{} happens in {}, not {p}",
                            tamper.as_str(),
                            tamper.phase().as_str()
                        )));
                    }
                }
                Ok(Mutation { tamper, iteration: m.iteration })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { party: raw.party, adversary: Adversary { mutations } })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_checks_phase() {
        let s = AdversaryScript::parse("party = 2\n[[mutation]]\ntamper = \"mac-shift\"\niteration = 3\n").unwrap();
        assert_eq!(s.party, 2);
        assert_eq!(s.adversary, Adversary::new(Tamper::MacShift, 3));
        let bad = "party = 0\n[[mutation]]\ntamper = \"mac-shift\"\nphase = \"coord\"\n";
        assert!(AdversaryScript::parse(bad).is_err());
        assert!(AdversaryScript::parse("party = 0\n[[mutation]]\ntamper = \"nope\"\n").is_err());
    }
}
