//! Experiment configuration: a plain `key = value` file plus overrides.
//!
//! Recognised keys: `length`, `z0`, `z1`, `alpha`, `policy`
//! (`continuous | event_triggered | periodic | fixed | open_loop`), `gamma`,
//! `tau`, `n_interior`, `courant`, `horizon`, `c_omega`, `certificate`
//! (`auto | explicit`), `epsilon`, `delta`, `lambda1`, `lambda2`,
//! `snapshot_every`, `out_dir`. Lines starting with `#` are comments.

use std::path::{Path, PathBuf};

use crate::certificate::{find_feasible, poincare_constant, CertificateParams, SearchOptions};
use crate::error::{require_positive, Error, Result};
use crate::expr::InitialProfile;
use crate::trigger::ControllerPolicy;
use crate::wave1d::{Grid1D, WaveState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyChoice {
    Continuous,
    EventTriggered,
    Periodic,
    Fixed,
    OpenLoop,
}

impl PolicyChoice {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "continuous" => PolicyChoice::Continuous,
            "event_triggered" | "event" => PolicyChoice::EventTriggered,
            "periodic" => PolicyChoice::Periodic,
            "fixed" => PolicyChoice::Fixed,
            "open_loop" => PolicyChoice::OpenLoop,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Continuous => "continuous",
            PolicyChoice::EventTriggered => "event_triggered",
            PolicyChoice::Periodic => "periodic",
            PolicyChoice::Fixed => "fixed",
            PolicyChoice::OpenLoop => "open_loop",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateSource {
    Auto,
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub length: f64,
    pub z0: InitialProfile,
    pub z1: InitialProfile,
    pub alpha: f64,
    pub policy: PolicyChoice,
    /// Trigger threshold; defaults to the certificate's `γ`.
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub n_interior: usize,
    pub courant: f64,
    pub horizon: f64,
    /// Defaults to `L/π`.
    pub c_omega: Option<f64>,
    pub certificate: CertificateSource,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Unit damping on `(0, π)` with `z₀ = sin x`, `z₁ = sin 2x`.
    fn default() -> Self {
        ExperimentConfig {
            length: std::f64::consts::PI,
            z0: InitialProfile::sine(1.0, 1.0),
            z1: InitialProfile::sine(1.0, 2.0),
            alpha: 1.0,
            policy: PolicyChoice::EventTriggered,
            gamma: None,
            tau: None,
            n_interior: 255,
            courant: 0.5,
            horizon: 10.0,
            c_omega: None,
            certificate: CertificateSource::Auto,
            epsilon: None,
            delta: None,
            lambda1: None,
            lambda2: None,
            snapshot_every: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &'static str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::invalid(key, format!("not a number: '{value}'")))
}

fn parse_usize(key: &'static str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::invalid(key, format!("not a non-negative integer: '{value}'")))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Applies `key = value` lines.
    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 1,
                    message: format!("expected key=value, got '{line}'"),
                });
            };
            self.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Applies an override of the form `key=value`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid("override", format!("expected key=value, got '{assignment}'")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "length" => self.length = parse_f64("length", value)?,
            "z0" => self.z0 = value.parse()?,
            "z1" => self.z1 = value.parse()?,
            "alpha" => self.alpha = parse_f64("alpha", value)?,
            "policy" => {
                self.policy = PolicyChoice::parse(value)
                    .ok_or_else(|| Error::invalid("policy", format!("unknown policy '{value}'")))?
            }
            "gamma" => self.gamma = Some(parse_f64("gamma", value)?),
            "tau" => self.tau = Some(parse_f64("tau", value)?),
            "n_interior" => self.n_interior = parse_usize("n_interior", value)?,
            "courant" => self.courant = parse_f64("courant", value)?,
            "horizon" => self.horizon = parse_f64("horizon", value)?,
            "c_omega" => self.c_omega = Some(parse_f64("c_omega", value)?),
            "certificate" => {
                self.certificate = match value {
                    "auto" => CertificateSource::Auto,
                    "explicit" => CertificateSource::Explicit,
                    _ => return Err(Error::invalid("certificate", format!("expected auto or explicit, got '{value}'"))),
                }
            }
            "epsilon" => self.epsilon = Some(parse_f64("epsilon", value)?),
            "delta" => self.delta = Some(parse_f64("delta", value)?),
            "lambda1" => self.lambda1 = Some(parse_f64("lambda1", value)?),
            "lambda2" => self.lambda2 = Some(parse_f64("lambda2", value)?),
            "snapshot_every" => {
                let n = parse_usize("snapshot_every", value)?;
                self.snapshot_every = (n > 0).then_some(n);
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::invalid("config", format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn c_omega(&self) -> f64 {
        self.c_omega.unwrap_or_else(|| poincare_constant(self.length))
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.length, self.n_interior, self.courant)
    }

    pub fn initial_state(&self) -> Result<WaveState> {
        let grid = self.grid()?;
        let l = self.length;
        Ok(WaveState::from_fns(
            &grid,
            |x| self.z0.eval(x, l),
            |x| self.z1.eval(x, l),
        ))
    }

    /// Checks every downstream precondition; errors name the field.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        require_positive("horizon", self.horizon)?;
        if self.policy != PolicyChoice::OpenLoop {
            require_positive("alpha", self.alpha)?;
        }
        require_positive("c_omega", self.c_omega())?;
        if let Some(g) = self.gamma {
            require_positive("gamma", g)?;
        }
        if self.policy == PolicyChoice::Periodic {
            match self.tau {
                Some(t) => require_positive("tau", t)?,
                None => return Err(Error::invalid("tau", "required for the periodic policy")),
            }
        }
        if self.certificate == CertificateSource::Explicit {
            self.explicit_certificate()?.validate()?;
        }
        Ok(())
    }

    fn explicit_certificate(&self) -> Result<CertificateParams> {
        let need = |field: &'static str, v: Option<f64>| {
            v.ok_or_else(|| Error::invalid(field, "required when certificate=explicit"))
        };
        Ok(CertificateParams {
            alpha: self.alpha,
            epsilon: need("epsilon", self.epsilon)?,
            delta: need("delta", self.delta)?,
            lambda1: need("lambda1", self.lambda1)?,
            lambda2: need("lambda2", self.lambda2)?,
            gamma: need("gamma", self.gamma)?,
            c_omega: self.c_omega(),
        })
    }

    /// The certificate tuple attached to runs from this config.
    pub fn certificate(&self) -> Result<CertificateParams> {
        match self.certificate {
            CertificateSource::Explicit => self.explicit_certificate(),
            CertificateSource::Auto => Ok(find_feasible(self.alpha, self.c_omega(), &SearchOptions::default())?.params),
        }
    }

    /// Builds the chosen policy. `cert_gamma` fills in an unset threshold.
    pub fn policy(&self, cert_gamma: f64) -> Result<ControllerPolicy> {
        let policy = match self.policy {
            PolicyChoice::Continuous => ControllerPolicy::continuous(self.alpha),
            PolicyChoice::EventTriggered => {
                ControllerPolicy::event_triggered(self.alpha, self.gamma.unwrap_or(cert_gamma))
            }
            PolicyChoice::Periodic => ControllerPolicy::periodic(
                self.alpha,
                self.tau.ok_or_else(|| Error::invalid("tau", "required for the periodic policy"))?,
            ),
            PolicyChoice::Fixed => ControllerPolicy::fixed(self.alpha),
            PolicyChoice::OpenLoop => ControllerPolicy::open_loop(),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# comment\nalpha = 2\npolicy=periodic\ntau=0.3\nz1 = 0\nn_interior=63\n",
            "test.cfg",
        )
        .unwrap();
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.policy, PolicyChoice::Periodic);
        assert_eq!(cfg.tau, Some(0.3));
        assert!(cfg.z1.is_zero());
        cfg.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let mut cfg = ExperimentConfig::default();
        let err = cfg.apply_text("alpha=1\ncourant=abc\n", "x.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("courant"), "{msg}");

        for (key, value, field) in [
            ("courant", "1.5", "CFL"),
            ("horizon", "0", "horizon"),
            ("alpha", "-1", "alpha"),
            ("gamma", "0", "gamma"),
            ("length", "-2", "length"),
            ("c_omega", "0", "c_omega"),
        ] {
            let mut cfg = ExperimentConfig::default();
            cfg.set(key, value).unwrap();
            let msg = cfg.validate().unwrap_err().to_string();
            assert!(msg.contains(field), "{key}: {msg}");
        }

        let mut cfg = ExperimentConfig::default();
        cfg.set("policy", "periodic").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("tau"));

        let mut cfg = ExperimentConfig::default();
        cfg.set("certificate", "explicit").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("epsilon"));

        assert!(ExperimentConfig::default().set("bogus", "1").is_err());
        assert!(ExperimentConfig::default().apply_override("alpha").is_err());
    }

    #[test]
    fn default_poincare_constant() {
        let cfg = ExperimentConfig::default();
        assert!((cfg.c_omega() - 1.0).abs() < 1e-15);
    }
}
