use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::system::SystemDescription;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    TlsEmission,
    TlsScattering,
    LambdaEmission,
    LambdaSubtraction,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParam {
    pub rate: Option<f64>,
    /// Lambda systems only: `"g1"` or `"g2"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_to: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketParam {
    pub delta0: Option<f64>,
    pub width: Option<f64>,
    pub center: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub delta_a: Option<f64>,
    pub delta_e: Option<f64>,
    pub delta_12: Option<f64>,
    pub omega0: Option<f64>,
    pub t_pulse: Option<f64>,
    pub channels: Option<Vec<ChannelParam>>,
    pub packet: Option<PacketParam>,
    /// Basis label of the initial system state.
    pub initial_state: Option<String>,
    pub system: Option<SystemDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Spatial/temporal spacing of sampled amplitudes.
    pub dx: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_points: Option<usize>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.level {
            Level::Error => "error",
            Level::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

fn err(path: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { level: Level::Error, path: path.into(), message: message.into() }
}

fn warn(path: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { level: Level::Warning, path: path.into(), message: message.into() }
}

/// Sweep variables understood by each scenario kind.
pub fn sweep_variables(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::TlsEmission | ScenarioKind::LambdaEmission => &["area"],
        ScenarioKind::TlsScattering => &["delta0", "t_pulse"],
        ScenarioKind::LambdaSubtraction | ScenarioKind::Custom => &[],
    }
}

/// Checks a raw JSON config; never fails, returns every problem found.
pub fn validate_config(raw: &Value) -> Vec<Diagnostic> {
    let cfg: ScenarioConfig = match serde_json::from_value(raw.clone()) {
        Ok(c) => c,
        Err(e) => return vec![err("$", e.to_string())],
    };
    let mut out = vec![];
    let p = &cfg.params;
    let kind = cfg.kind;
    let finite = |out: &mut Vec<Diagnostic>, path: &str, v: Option<f64>| {
        if let Some(v) = v {
            if !v.is_finite() {
                out.push(err(path, "must be finite"));
            }
        }
    };
    finite(&mut out, "params.delta_a", p.delta_a);
    finite(&mut out, "params.delta_e", p.delta_e);
    finite(&mut out, "params.delta_12", p.delta_12);
    finite(&mut out, "params.omega0", p.omega0);
    if let Some(t) = p.t_pulse {
        if !(t >= 0.0) || !t.is_finite() {
            out.push(err("params.t_pulse", "must be finite and >= 0"));
        }
    }
    let is_lambda = matches!(kind, ScenarioKind::LambdaEmission | ScenarioKind::LambdaSubtraction);
    if let Some(chs) = &p.channels {
        if chs.is_empty() {
            out.push(err("params.channels", "at least one channel required"));
        }
        for (i, ch) in chs.iter().enumerate() {
            match ch.rate {
                None => out.push(err(&format!("channels[{i}].rate"), format!("channels[{i}].rate required"))),
                Some(r) if !(r >= 0.0) || !r.is_finite() => {
                    out.push(err(&format!("channels[{i}].rate"), "rate must be finite and >= 0"))
                }
                _ => {}
            }
            match (&ch.decay_to, is_lambda) {
                (Some(g), true) if g != "g1" && g != "g2" => {
                    out.push(err(&format!("channels[{i}].decay_to"), format!("expected \"g1\" or \"g2\", got \"{g}\"")))
                }
                (Some(_), false) => out.push(err(&format!("channels[{i}].decay_to"), "only meaningful for lambda systems")),
                _ => {}
            }
        }
        if chs.iter().all(|c| c.rate == Some(0.0)) {
            out.push(err("params.channels", "every rate is zero"));
        }
    }
    if kind == ScenarioKind::Custom {
        match &p.system {
            None => out.push(err("params.system", "custom scenarios need a system description")),
            Some(desc) => {
                if let Err(e) = crate::system::build_system(desc) {
                    out.push(err("params.system", e.to_string()));
                }
            }
        }
    } else if p.system.is_some() {
        out.push(err("params.system", "only custom scenarios take a system description"));
    }
    if let Some(s) = &cfg.sweep {
        if s.points == 0 {
            out.push(err("sweep.points", "sweep must have at least one point"));
        }
        if !(s.start.is_finite() && s.stop.is_finite()) || (s.points > 1 && s.stop <= s.start) {
            out.push(err("sweep", "sweep range must be finite with stop > start"));
        }
        if !sweep_variables(kind).contains(&s.variable.as_str()) {
            out.push(err(
                "sweep.variable",
                format!("'{}' is not sweepable here (allowed: {:?})", s.variable, sweep_variables(kind)),
            ));
        }
        if s.variable == "t_pulse" && s.start < 0.0 {
            out.push(err("sweep.start", "pulse length must be >= 0"));
        }
    }
    let g = &cfg.grid;
    if let Some(dx) = g.dx {
        if !(dx > 0.0) || !dx.is_finite() {
            out.push(err("grid.dx", "must be > 0"));
        }
    }
    if let Some(t) = g.tau_max {
        if !(t > 0.0) || !t.is_finite() {
            out.push(err("grid.tau_max", "must be > 0"));
        }
    }
    if g.tau_points == Some(0) || g.tau_points == Some(1) {
        out.push(err("grid.tau_points", "need at least 2 points"));
    }
    if let Some(n) = g.n_max {
        if n == 0 || n > 3 {
            out.push(err("grid.n_max", "photon truncation must be 1, 2 or 3"));
        }
    }
    if let Some(pk) = &p.packet {
        if let Some(w) = pk.width {
            if !(w > 0.0) {
                out.push(err("params.packet.width", "must be > 0"));
            } else if let Some(dx) = g.dx {
                if dx > 0.0 && w / dx < 4.0 {
                    out.push(warn("grid.dx", format!("packet width {w} spans only {:.1} grid cells", w / dx)));
                }
            }
        }
    }
    if !matches!(kind, ScenarioKind::TlsScattering | ScenarioKind::LambdaSubtraction) && p.packet.is_some() {
        out.push(err("params.packet", "this scenario has no input photon"));
    }
    if let Some(init) = &p.initial_state {
        let labels: Vec<String> = match kind {
            ScenarioKind::TlsEmission | ScenarioKind::TlsScattering => vec!["g".into(), "e".into()],
            ScenarioKind::LambdaEmission | ScenarioKind::LambdaSubtraction => {
                vec!["g1".into(), "g2".into(), "e".into()]
            }
            ScenarioKind::Custom => p.system.as_ref().map(|s| s.labels.clone()).unwrap_or_default(),
        };
        if !labels.contains(init) {
            out.push(err("params.initial_state", format!("unknown basis label '{init}'")));
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.level == Level::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn missing_rate_is_reported_by_path() {
        let d = validate_config(&json!({"kind": "tls-emission", "params": {"channels": [{}]}}));
        assert!(d.iter().any(|d| d.level == Level::Error && d.message == "channels[0].rate required"), "{d:?}");
    }

    #[test]
    fn coarse_packet_grid_warns() {
        let d = validate_config(&json!({
            "kind": "tls-scattering",
            "params": {"packet": {"width": 2.0}},
            "grid": {"dx": 0.6}
        }));
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].level, Level::Warning);
        assert!(!has_errors(&d));
    }

    #[test]
    fn lambda_emission_config_is_clean() {
        let d = validate_config(&json!({
            "kind": "lambda-emission",
            "params": {"omega0": 5.0, "t_pulse": 2.0, "channels": [{"rate": 1.0, "decay_to": "g2"}]},
            "sweep": {"variable": "area", "start": 0.0, "stop": 12.566, "points": 81}
        }));
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn structural_problems() {
        let cases = [
            json!({"kind": "warp-drive"}),
            json!({"kind": "tls-emission", "params": {"bogus": 1}}),
            json!({"kind": "tls-emission", "sweep": {"variable": "delta0", "start": 0, "stop": 1, "points": 3}}),
            json!({"kind": "tls-emission", "sweep": {"variable": "area", "start": 1, "stop": 0, "points": 3}}),
            json!({"kind": "tls-emission", "grid": {"n_max": 7}}),
            json!({"kind": "tls-emission", "params": {"packet": {"width": 1.0}}}),
            json!({"kind": "tls-emission", "params": {"channels": [{"rate": 1.0, "decay_to": "g2"}]}}),
            json!({"kind": "lambda-emission", "params": {"channels": [{"rate": 1.0, "decay_to": "g3"}]}}),
            json!({"kind": "lambda-emission", "params": {"initial_state": "g"}}),
            json!({"kind": "custom"}),
            json!({"kind": "tls-scattering", "params": {"channels": [{"rate": -1.0}]}}),
        ];
        for c in cases {
            assert!(has_errors(&validate_config(&c)), "{c}");
        }
    }

    #[test]
    fn sweep_values_hit_endpoints() {
        let s = Sweep { variable: "area".into(), start: 0.0, stop: 4.0, points: 5 };
        assert_eq!(s.values(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }
}
