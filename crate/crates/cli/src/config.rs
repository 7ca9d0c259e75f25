use ctrap::{KernelConfig, KernelRegistry, KernelSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::{Path, PathBuf};

/// Default mesh ladder `2^-3 .. 2^-6`.
pub const DEFAULT_LADDER: [f64; 4] = [0.125, 0.0625, 0.03125, 0.015625];
/// Extra mesh size enabled by `--fine`.
pub const FINE_H: f64 = 0.0078125;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelConfig,
    pub n: usize,
    pub p: usize,
    pub h_base: f64,
    #[serde(default)]
    pub h_ladder: Option<Vec<f64>>,
    /// Output directory, relative to the config file.
    pub output: PathBuf,
    #[serde(default)]
    pub mollifier_m: Option<u32>,
    #[serde(default)]
    pub gate: Option<f64>,
    /// Allow orders above the ill-conditioning guard.
    #[serde(default)]
    pub force: bool,
    /// Existing `weights.json` for `converge`; generated inline when absent.
    #[serde(default)]
    pub table: Option<PathBuf>,
    /// Reference value of the integral; builtin for `s1` and `s2`.
    #[serde(default)]
    pub exact: Option<f64>,
    #[serde(default)]
    pub slope_tolerance: Option<f64>,
    /// Wall-clock cap for `converge`, in seconds.
    #[serde(default)]
    pub max_seconds: Option<f64>,
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A parsed config together with where it came from.
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
    pub base_dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn load(path: &Path) -> Result<Loaded, UsageError> {
    let bytes = std::fs::read(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        serde_json::from_slice(&bytes).map_err(|e| UsageError(format!("malformed config {}: {e}", path.display())))?;
    config.check()?;
    Ok(Loaded {
        config,
        hash: sha256_hex(&bytes),
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

impl RunConfig {
    fn check(&self) -> Result<(), UsageError> {
        let bad = |msg: String| Err(UsageError(msg));
        if !(self.h_base > 0.0 && self.h_base.is_finite()) {
            return bad(format!("h_base must be positive, got {}", self.h_base));
        }
        if let Some(ladder) = &self.h_ladder {
            if ladder.is_empty() || ladder.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                return bad("h_ladder must be a nonempty list of positive mesh sizes".into());
            }
        }
        if let KernelConfig::Monomial { alpha, .. } = &self.kernel {
            if alpha.len() != self.n {
                return bad(format!("kernel alpha has {} entries but n = {}", alpha.len(), self.n));
            }
        }
        if matches!(self.gate, Some(g) if g.is_nan() || g <= 0.0) {
            return bad("gate must be positive".into());
        }
        Ok(())
    }

    pub fn build_kernel(&self) -> Result<KernelSpec, UsageError> {
        let k = self.kernel.build(&KernelRegistry::new()).map_err(|e| UsageError(e.to_string()))?;
        if k.n != self.n {
            return Err(UsageError(format!("kernel dimension {} differs from n = {}", k.n, self.n)));
        }
        Ok(k)
    }

    pub fn ladder(&self, fine: bool) -> Vec<f64> {
        let mut ladder = self.h_ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        if fine && !ladder.contains(&FINE_H) {
            ladder.push(FINE_H);
        }
        ladder
    }

    /// `exact` if given, else the builtin reference for `s1` and `s2`.
    pub fn reference_value(&self, kernel: &KernelSpec) -> Result<f64, UsageError> {
        match (self.exact, kernel.id.as_str()) {
            (Some(v), _) => Ok(v),
            (None, "s1") => Ok(ctrap::J1),
            (None, "s2") => Ok(ctrap::J2),
            (None, id) => Err(UsageError(format!("no builtin reference value for kernel '{id}'; set \"exact\""))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, String> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| e.to_string())?;
        c.check().map_err(|e| e.0)?;
        Ok(c)
    }

    #[test]
    fn accepts_minimal_config() {
        let c = parse(r#"{"kernel":{"type":"monomial","alpha":[1,0,0],"r":2},"n":3,"p":1,"h_base":0.125,"output":"out"}"#)
            .unwrap();
        assert_eq!(c.ladder(false), DEFAULT_LADDER);
        assert_eq!(c.ladder(true).len(), 5);
        assert_eq!(c.build_kernel().unwrap().id, "s2");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse(r#"{"kernel":{"type":"monomial","alpha":[1,0],"r":2},"n":3,"p":1,"h_base":0.125,"output":"o"}"#).is_err());
        assert!(parse(r#"{"kernel":{"type":"monomial","alpha":[1,0,0],"r":2},"n":3,"p":1,"h_base":-1,"output":"o"}"#).is_err());
        assert!(parse(r#"{"kernel":{"type":"monomial","alpha":[1,0,0],"r":2},"n":3,"p":1,"output":"o"}"#).is_err());
        assert!(parse(r#"{"kernel":{"type":"monomial","alpha":[1,0,0],"r":2},"n":3,"p":1,"h_base":0.1,"output":"o","typo":1}"#).is_err());
    }
}
