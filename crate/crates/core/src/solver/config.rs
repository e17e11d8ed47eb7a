use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Environment variable naming a directory searched first for solver
/// executables given by bare name.
pub const SOLVER_DIR_ENV: &str = "CALCDEV_SOLVER_DIR";

fn default_timeout() -> f64 {
    5.0
}

fn default_enabled() -> bool {
    true
}

/// One external SMT-LIB solver. `args` may contain `{timeout}` (seconds,
/// rounded up) and `{timeout_ms}`; the script is written to stdin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub name: String,
    pub executable: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default = "default_enabled")]
    pub enabled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read solver config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid solver config: {0}")]
    Parse(String),
    #[error("solver {0}: timeout must be positive")]
    Timeout(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    #[serde(default, rename = "solver")]
    pub solvers: Vec<SolverConfig>,
    /// Run all enabled solvers at once and take the first definitive answer.
    #[serde(default)]
    pub portfolio: bool,
    /// Directory receiving every emitted script.
    #[serde(default)]
    pub dump_dir: Option<PathBuf>,
}

impl SolverConfig {
    /// Stock invocation of z3 reading SMT-LIB from stdin.
    pub fn z3(executable: impl Into<String>) -> Self {
        SolverConfig {
            name: "z3".into(),
            executable: executable.into(),
            args: vec!["-in".into(), "-smt2".into(), "-T:{timeout}".into()],
            timeout: default_timeout(),
            enabled: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.timeout > 0.0) {
            return Err(ConfigError::Timeout(self.name.clone()));
        }
        Ok(())
    }

    pub fn resolved_executable(&self) -> PathBuf {
        let exe = Path::new(&self.executable);
        if exe.components().count() == 1 {
            if let Ok(dir) = std::env::var(SOLVER_DIR_ENV) {
                let candidate = Path::new(&dir).join(exe);
                if candidate.exists() {
                    return candidate;
                }
            }
        }
        exe.to_path_buf()
    }

    pub fn expanded_args(&self) -> Vec<String> {
        let secs = self.timeout.ceil().max(1.0) as u64;
        let ms = (self.timeout * 1000.0).ceil().max(1.0) as u64;
        self.args
            .iter()
            .map(|a| a.replace("{timeout_ms}", &ms.to_string()).replace("{timeout}", &secs.to_string()))
            .collect()
    }
}

impl SolverSettings {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let s: SolverSettings = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for c in &s.solvers {
            c.validate()?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn enabled(&self) -> impl Iterator<Item = &SolverConfig> {
        self.solvers.iter().filter(|s| s.enabled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_with_defaults() {
        let s = SolverSettings::from_toml(
            r#"
            portfolio = true
            [[solver]]
            name = "z3"
            executable = "z3"
            args = ["-in", "-T:{timeout}"]
            [[solver]]
            name = "cvc5"
            executable = "/opt/cvc5"
            timeout = 0.5
            enabled = false
            "#,
        )
        .unwrap();
        assert!(s.portfolio);
        assert_eq!(s.solvers[0].timeout, 5.0);
        assert_eq!(s.solvers[0].expanded_args(), vec!["-in", "-T:5"]);
        assert_eq!(s.enabled().count(), 1);
    }

    #[test]
    fn rejects_nonpositive_timeout() {
        let r = SolverSettings::from_toml("[[solver]]\nname='a'\nexecutable='a'\ntimeout=0\n");
        assert!(matches!(r, Err(ConfigError::Timeout(_))));
    }
}
