//! Flat `key = value` configuration with strict key checking.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::CliError;

/// Every recognised key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("params.omega_q", "2"),
    ("params.omega_r", "1"),
    ("params.omega_s", "1"),
    ("params.g_qr", "0.05"),
    ("params.g_qs", "0.05"),
    ("params.unit", "omega_r"),
    ("cutoffs.n_photon", "auto"),
    ("cutoffs.n_spinmode", "auto"),
    ("cutoffs.cap", "40"),
    ("convergence.tol", "1e-4"),
    ("transfer.kind", "rabi_full"),
    ("transfer.t_max", "4"),
    ("transfer.n_steps", "2001"),
    ("transfer.initial", "g,0,1"),
    ("transfer.target", "g,1,0"),
    ("transfer.n_spins", "3"),
    ("fig4.n_values", "1e6,1e7,1e8,1e9,1e10,1e11,1e12"),
    ("fig4.g_single_hybrid", "0.012"),
    ("fig4.g_single_direct", "1e-5"),
    ("fig4.g_qr", "100"),
    ("fig4.delta", "1000"),
    ("fig5.kind", "rabi_full"),
    ("fig5.strong.omega_q", "2"),
    ("fig5.strong.g", "0.05"),
    ("fig5.ultrastrong.omega_q", "9"),
    ("fig5.ultrastrong.g", "1"),
    ("fig6.kind", "rabi_full"),
    ("fig6.omega_q", "2"),
    ("fig6.g_values", "0.025,0.05,0.1,0.15,0.2,0.3"),
    ("fig6.trajectories", "0.025,0.15,0.3"),
    ("couplings.area", "50e-12"),
    ("couplings.aspect", "50"),
    ("couplings.thickness", "5e-6"),
    ("couplings.persistent_current", "900e-9"),
    ("couplings.density", "3e24"),
    ("couplings.d_zfs", "2870"),
    ("couplings.b_parallel_mt", "0"),
    ("couplings.omega_r", "5000"),
    ("couplings.inductance", "10e-9"),
    ("couplings.mutual_inductance", "4e-12"),
    ("couplings.delta_factor", "3"),
    ("oracle.n_spins", "1,2,3,4"),
];

/// Resolved key/value table.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| ((*k).to_string(), (*v).to_string()))
                .collect(),
        }
    }
}

impl Config {
    /// Defaults overlaid with the file contents.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{spec}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown configuration key `{key}`"))),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("undeclared key {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("invalid value `{raw}` for `{key}`")))
    }

    /// `auto` maps to `None`.
    pub fn get_auto<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.raw(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("invalid list entry `{s}` for `{key}`")))
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
