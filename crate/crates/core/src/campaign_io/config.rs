use serde::{Deserialize, Serialize};
use std::path::Path;

use super::ParseError;
use crate::error::{Error, Result};
use crate::geometry::{AngleCase, CampaignSpec, PropagationMode, Scenario};
use crate::ris_array::RisConfiguration;
use crate::synthesis::SynthesisConfig;

pub const CAMPAIGN_VERSION: u32 = 1;
pub const SYNTHESIS_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignDoc {
    version: u32,
    scenario: Scenario,
    mode: PropagationMode,
    cases: Vec<AngleCase>,
}

/// Synthesis settings plus the panel they apply to.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SynthesisDocument {
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    #[serde(default)]
    pub ris: RisConfiguration,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthesisDoc {
    version: u32,
    #[serde(default)]
    synthesis: SynthesisConfig,
    #[serde(default)]
    ris: RisConfiguration,
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    ParseError::new(line, e.message().to_string()).into()
}

fn check_version(got: u32, want: u32, kind: &str) -> Result<()> {
    if got != want {
        return Err(ParseError::new(1, format!("unsupported {kind} version {got} (expected {want})")).into());
    }
    Ok(())
}

pub fn campaign_to_toml(spec: &CampaignSpec) -> Result<String> {
    let doc = CampaignDoc {
        version: CAMPAIGN_VERSION,
        scenario: spec.scenario,
        mode: spec.mode,
        cases: spec.cases.clone(),
    };
    toml::to_string(&doc).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Parses and validates one campaign document.
pub fn campaign_from_toml(text: &str) -> Result<CampaignSpec> {
    let doc: CampaignDoc = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    check_version(doc.version, CAMPAIGN_VERSION, "campaign")?;
    let spec = CampaignSpec { scenario: doc.scenario, mode: doc.mode, cases: doc.cases };
    spec.validate()?;
    Ok(spec)
}

pub fn synthesis_to_toml(doc: &SynthesisDocument) -> Result<String> {
    let d = SynthesisDoc { version: SYNTHESIS_VERSION, synthesis: doc.synthesis.clone(), ris: doc.ris.clone() };
    toml::to_string(&d).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn synthesis_from_toml(text: &str) -> Result<SynthesisDocument> {
    let d: SynthesisDoc = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    check_version(d.version, SYNTHESIS_VERSION, "synthesis")?;
    d.synthesis.validate()?;
    d.ris.validate()?;
    Ok(SynthesisDocument { synthesis: d.synthesis, ris: d.ris })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn load_campaign_file(path: &Path) -> Result<CampaignSpec> {
    campaign_from_toml(&read(path)?)
}

pub fn load_synthesis_file(path: &Path) -> Result<SynthesisDocument> {
    synthesis_from_toml(&read(path)?)
}
