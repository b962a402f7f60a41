//! Run manifests: a `key = value` file or the `config` block of a
//! previous run's metadata, overridden by command-line flags.

use std::path::Path;

use kinetic_dec::cases::{Case, RunConfig};
use kinetic_dec::kinetic::WaveFamily;
use kinetic_dec::solver::{SchemeConfig, Stabilizer};
use kinetic_dec::stabilize::LimiterParams;
use kinetic_dec::systems::{VortexDrift, VortexParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every knob that affects the numerics. `None` means "use the default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_safety: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vortex_drift: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limiter_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limiter_alpha: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Manifest {
    /// Fields set in `other` win.
    pub fn merge(&mut self, other: &Manifest) {
        overlay!(self, other; case, nx, ny, final_time, cfl, eps, time_order, space_order, iterations,
            stabilizer, family, rings, directions, lambda_safety, gamma, vortex_drift, limiter_m, limiter_alpha);
    }

    /// Reads a TOML `key = value` file, or a metadata JSON (its `config`
    /// object) when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let cfg = v.get("config").cloned().unwrap_or(v);
            serde_json::from_value(cfg).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    fn case(&self) -> Result<Case, CliError> {
        let name = self.case.as_deref().ok_or_else(|| CliError::Config("--case is required".into()))?;
        Case::from_name(name).ok_or_else(|| CliError::Config(format!("unknown case '{name}'")))
    }

    /// Resolves defaults and validates.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let case = self.case()?;
        let nx = self.nx.unwrap_or(default_n(case));
        let mut cfg = RunConfig::new(case, nx);
        cfg.ny = self.ny.unwrap_or(nx);
        if let Some(t) = self.final_time {
            cfg.final_time = t;
        }
        let time_order = self.time_order.unwrap_or(4);
        let space_order = self.space_order.unwrap_or(4);
        let mut s = SchemeConfig::new(time_order, space_order);
        s.lambda_safety = self.lambda_safety.unwrap_or(case.default_lambda_safety());
        s.iterations = self.iterations.unwrap_or(time_order + 1);
        if let Some(c) = self.cfl {
            s.cfl = c;
        }
        if let Some(e) = self.eps {
            s.eps = e;
        }
        s.family = match self.family.as_deref().unwrap_or("four") {
            "four" => WaveFamily::FourWave,
            "general" => WaveFamily::General {
                rings: self.rings.unwrap_or(1),
                directions: self.directions.unwrap_or(1),
            },
            other => return Err(CliError::Config(format!("unknown family '{other}'"))),
        };
        let limiter = LimiterParams {
            mbound: self.limiter_m.unwrap_or(LimiterParams::default().mbound),
            alpha: self.limiter_alpha.unwrap_or(LimiterParams::default().alpha),
        };
        s.stabilizer = match self.stabilizer.as_deref().unwrap_or("none") {
            "none" => Stabilizer::None,
            "limiter" => Stabilizer::Limiter(limiter),
            "mood" => Stabilizer::Mood,
            other => return Err(CliError::Config(format!("unknown stabilizer '{other}'"))),
        };
        cfg.scheme = s;
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        let drift = match self.vortex_drift.as_deref().unwrap_or("sqrt2/2") {
            "sqrt2/2" => VortexDrift::Sqrt2Half,
            "sqrt3/2" => VortexDrift::Sqrt3Half,
            other => return Err(CliError::Config(format!("unknown vortex drift '{other}'"))),
        };
        cfg.vortex = VortexParams { drift, ..VortexParams::default() };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_n(case: Case) -> usize {
    match case {
        Case::Advection => 80,
        Case::Vortex => 50,
        Case::Sod | Case::StrongShock => 100,
    }
}

/// Fully populated manifest of a resolved configuration.
pub fn echo(cfg: &RunConfig) -> Manifest {
    let s = &cfg.scheme;
    let (family, rings, directions) = match s.family {
        WaveFamily::FourWave => ("four", None, None),
        WaveFamily::General { rings, directions } => ("general", Some(rings), Some(directions)),
    };
    let (stabilizer, lim) = match s.stabilizer {
        Stabilizer::None => ("none", LimiterParams::default()),
        Stabilizer::Limiter(p) => ("limiter", p),
        Stabilizer::Mood => ("mood", LimiterParams::default()),
    };
    Manifest {
        case: Some(cfg.case.name().into()),
        nx: Some(cfg.nx),
        ny: Some(cfg.ny),
        final_time: Some(cfg.final_time),
        cfl: Some(s.cfl),
        eps: Some(s.eps),
        time_order: Some(s.time_order),
        space_order: Some(s.space_order),
        iterations: Some(s.iterations),
        stabilizer: Some(stabilizer.into()),
        family: Some(family.into()),
        rings,
        directions,
        lambda_safety: Some(s.lambda_safety),
        gamma: Some(cfg.gamma),
        vortex_drift: Some(
            match cfg.vortex.drift {
                VortexDrift::Sqrt2Half => "sqrt2/2",
                VortexDrift::Sqrt3Half => "sqrt3/2",
            }
            .into(),
        ),
        limiter_m: Some(lim.mbound),
        limiter_alpha: Some(lim.alpha),
    }
}
