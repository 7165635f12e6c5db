//! Agent spec strings such as `scripted-buyer:r0=0.5,r1=1.0` or
//! `llm:model=gpt-4,replay=fixtures/run.jsonl`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use super::endpoint::EndpointConfig;
use super::llm::LlmAgent;
use super::prompts::{build_buyer_prompt, build_seller_prompt};
use super::scripted::{ScriptedBuyer, ScriptedSeller};
use super::Agent;
use crate::catalog::SessionConfig;
use crate::error::{Error, Result};
use crate::og_narrator::{LlmNarrator, Narrator, OfferSchedule, OgBuyer, TemplateNarrator};
use crate::protocol::Role;

/// Where an LLM agent's request seed comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedMode {
    #[default]
    None,
    Fixed(u64),
    /// The per-session seed derived by the harness.
    Session,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NarratorSpec {
    Template,
    Llm(EndpointConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    ScriptedBuyer { r0: f64, r1: f64 },
    ScriptedSeller { m: f64, s0: f64 },
    Llm { endpoint: EndpointConfig, seed: SeedMode },
    Og { narrator: NarratorSpec, floor: f64, ceiling: f64 },
    /// Moves arrive from outside, e.g. over the HTTP API.
    Human,
}

fn spec_error(spec: &str, message: impl Into<String>) -> Error {
    Error::AgentSpec {
        spec: spec.to_string(),
        message: message.into(),
    }
}

struct Params<'a> {
    spec: &'a str,
    map: BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    fn parse(spec: &'a str, body: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| spec_error(spec, format!("expected key=value, got `{pair}`")))?;
            let key = k.trim().to_ascii_lowercase().replace('_', "-");
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(spec_error(spec, format!("`{key}` given twice")));
            }
        }
        Ok(Params { spec, map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| spec_error(self.spec, format!("`{key}` must be a number, got `{v}`"))),
        }
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| spec_error(self.spec, format!("`{key}` must be a non-negative integer, got `{v}`"))),
        }
    }

    fn endpoint(&mut self) -> Result<EndpointConfig> {
        let mut cfg = EndpointConfig::default();
        if let Some(v) = self.take("model") {
            cfg.model = v;
        }
        if let Some(v) = self.take("base-url") {
            cfg.base_url = v;
        }
        if let Some(v) = self.take("api-key-env") {
            cfg.api_key_env = v;
        }
        cfg.replay = self.take("replay").map(PathBuf::from);
        cfg.record = self.take("record").map(PathBuf::from);
        if let Some(n) = self.take_u64("attempts")? {
            cfg.max_attempts = n.max(1) as u32;
        }
        if let Some(secs) = self.take_u64("timeout")? {
            cfg.timeout = Duration::from_secs(secs.max(1));
        }
        Ok(cfg)
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(spec_error(self.spec, format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

impl FromStr for AgentSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
        let mut p = Params::parse(spec, body)?;
        let parsed = match kind.to_ascii_lowercase().as_str() {
            "scripted-buyer" => AgentSpec::ScriptedBuyer {
                r0: p.take_f64("r0", 0.5)?,
                r1: p.take_f64("r1", 1.0)?,
            },
            "scripted-seller" => AgentSpec::ScriptedSeller {
                m: p.take_f64("m", 0.0)?,
                s0: p.take_f64("s0", 1.0)?,
            },
            "llm" => {
                let seed = match p.take("seed").as_deref() {
                    None => SeedMode::None,
                    Some("session") => SeedMode::Session,
                    Some(v) => SeedMode::Fixed(
                        v.parse()
                            .map_err(|_| spec_error(spec, format!("`seed` must be an integer or `session`, got `{v}`")))?,
                    ),
                };
                AgentSpec::Llm {
                    endpoint: p.endpoint()?,
                    seed,
                }
            }
            "og" => {
                let narrator = match p.take("narrator").as_deref() {
                    None | Some("template") => NarratorSpec::Template,
                    Some("llm") => NarratorSpec::Llm(p.endpoint()?),
                    Some(other) => return Err(spec_error(spec, format!("unknown narrator `{other}`"))),
                };
                AgentSpec::Og {
                    narrator,
                    floor: p.take_f64("floor", crate::og_narrator::DEFAULT_FLOOR_RATIO)?,
                    ceiling: p.take_f64("ceiling", crate::og_narrator::DEFAULT_CEILING_RATIO)?,
                }
            }
            "human" => AgentSpec::Human,
            other => {
                return Err(spec_error(
                    spec,
                    format!("unknown agent kind `{other}` (expected scripted-buyer, scripted-seller, llm, og, or human)"),
                ))
            }
        };
        p.finish()?;
        Ok(parsed)
    }
}

fn write_endpoint(f: &mut fmt::Formatter<'_>, cfg: &EndpointConfig) -> fmt::Result {
    let default = EndpointConfig::default();
    write!(f, "model={}", cfg.model)?;
    if cfg.base_url != default.base_url {
        write!(f, ",base-url={}", cfg.base_url)?;
    }
    if cfg.api_key_env != default.api_key_env {
        write!(f, ",api-key-env={}", cfg.api_key_env)?;
    }
    if let Some(p) = &cfg.replay {
        write!(f, ",replay={}", p.display())?;
    }
    if let Some(p) = &cfg.record {
        write!(f, ",record={}", p.display())?;
    }
    if cfg.max_attempts != default.max_attempts {
        write!(f, ",attempts={}", cfg.max_attempts)?;
    }
    if cfg.timeout != default.timeout {
        write!(f, ",timeout={}", cfg.timeout.as_secs())?;
    }
    Ok(())
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::ScriptedBuyer { r0, r1 } => write!(f, "scripted-buyer:r0={r0},r1={r1}"),
            AgentSpec::ScriptedSeller { m, s0 } => write!(f, "scripted-seller:m={m},s0={s0}"),
            AgentSpec::Llm { endpoint, seed } => {
                f.write_str("llm:")?;
                write_endpoint(f, endpoint)?;
                match seed {
                    SeedMode::None => Ok(()),
                    SeedMode::Fixed(s) => write!(f, ",seed={s}"),
                    SeedMode::Session => f.write_str(",seed=session"),
                }
            }
            AgentSpec::Og {
                narrator,
                floor,
                ceiling,
            } => {
                write!(f, "og:floor={floor},ceiling={ceiling},narrator=")?;
                match narrator {
                    NarratorSpec::Template => f.write_str("template"),
                    NarratorSpec::Llm(cfg) => {
                        f.write_str("llm,")?;
                        write_endpoint(f, cfg)
                    }
                }
            }
            AgentSpec::Human => f.write_str("human"),
        }
    }
}

impl AgentSpec {
    /// Short label for reports: the kind plus the model for chat agents.
    pub fn label(&self) -> String {
        match self {
            AgentSpec::ScriptedBuyer { .. } => "scripted-buyer".into(),
            AgentSpec::ScriptedSeller { .. } => "scripted-seller".into(),
            AgentSpec::Llm { endpoint, .. } => endpoint.model.clone(),
            AgentSpec::Og { .. } => "og".into(),
            AgentSpec::Human => "human".into(),
        }
    }

    /// Roles this kind of agent can play.
    pub fn supports(&self, role: Role) -> bool {
        match self {
            AgentSpec::ScriptedBuyer { .. } | AgentSpec::Og { .. } => role == Role::Buyer,
            AgentSpec::ScriptedSeller { .. } => role == Role::Seller,
            AgentSpec::Llm { .. } | AgentSpec::Human => true,
        }
    }

    /// Instantiates a fresh agent for one session.
    pub fn build(&self, role: Role, config: &SessionConfig, session_seed: u64) -> Result<Box<dyn Agent>> {
        if !self.supports(role) {
            return Err(spec_error(&self.to_string(), format!("cannot play the {role} role")));
        }
        Ok(match self {
            AgentSpec::ScriptedBuyer { r0, r1 } => Box::new(ScriptedBuyer::new(*r0, *r1)?),
            AgentSpec::ScriptedSeller { m, s0 } => {
                Box::new(ScriptedSeller::new(*m, *s0, config.cost, config.list_price)?)
            }
            AgentSpec::Llm { endpoint, seed } => {
                let prompt = match role {
                    Role::Buyer => build_buyer_prompt(config),
                    Role::Seller => build_seller_prompt(config),
                };
                let seed = match seed {
                    SeedMode::None => None,
                    SeedMode::Fixed(s) => Some(*s),
                    SeedMode::Session => Some(session_seed),
                };
                Box::new(LlmAgent::new(endpoint.connect()?, endpoint.model.clone(), prompt, seed))
            }
            AgentSpec::Og {
                narrator,
                floor,
                ceiling,
            } => {
                let narrator: Box<dyn Narrator> = match narrator {
                    NarratorSpec::Template => Box::new(TemplateNarrator),
                    NarratorSpec::Llm(cfg) => Box::new(LlmNarrator::new(cfg.connect()?, cfg.model.clone(), None)),
                };
                Box::new(OgBuyer::new(OfferSchedule::new(*floor, *ceiling)?, narrator))
            }
            AgentSpec::Human => {
                return Err(spec_error(
                    "human",
                    "human agents submit moves through the session API, not the batch runner",
                ))
            }
        })
    }
}
