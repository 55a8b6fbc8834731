//! Flat `key=value` run configuration.
//!
//! One entry per line, `#` starts a comment, units are part of the key name.
//! Unknown keys are rejected, and typed views re-validate every physical
//! invariant of the structures they build.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::model::BeamSplitter;
use crate::scan::{CountingConfig, ScanConfig, ScanType};

/// Every accepted key with a short description.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("type", "scan type: signal, idler or pump"),
    ("lambda_nm", "wavelength of the delayed field"),
    (
        "lc_um",
        "coherence length (envelope half width at half maximum)",
    ),
    ("delay_start_um", "first scan delay"),
    ("delay_stop_um", "last scan delay"),
    ("points", "number of scan points"),
    ("alpha", "pump amplitude ratio C2/C1, complex"),
    ("baseline_hz", "mean coincidence rate in pairs per second"),
    ("bin_s", "counting time per scan point"),
    ("accidentals_hz", "uniform background coincidence rate"),
    ("seed", "64-bit RNG seed"),
    ("gain", "parametric gain D, complex"),
    ("phi1_rad", "phase delay on the crystal-1 signal path"),
    ("phi2_rad", "phase delay on the crystal-2 idler path"),
    ("bs_r", "beam splitter amplitude reflectance, complex"),
    ("bs_t", "beam splitter amplitude transmittance, complex"),
    ("setup", "point evaluation setup: two_crystal or hom"),
    ("sweep_t2", "HOM sweep over |t|^2 as start:stop:steps"),
    ("cases", "random cases per verification suite"),
    ("out", "output path"),
];

pub const DEFAULT_DELAY_START_UM: f64 = -2.0;
pub const DEFAULT_DELAY_STOP_UM: f64 = 2.0;
pub const DEFAULT_POINTS: usize = 801;
pub const DEFAULT_BASELINE_HZ: f64 = 1000.0;
pub const DEFAULT_GAIN: f64 = 0.1;

/// A configuration problem, tied to the offending key when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn for_key(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "{key}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn is_known_key(key: &str) -> bool {
    KNOWN_KEYS.iter().any(|(k, _)| *k == key)
}

/// Renders a complex number in a form [`parse_complex`] reads back exactly.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// Accepts `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    Complex64::from_str(t).map_err(|_| format!("{t:?} is not a complex number (e.g. 0.6-0.8i)"))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        RunConfig::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                key: None,
                message: format!("line {}: expected key=value", idx + 1),
            })?;
            let key = key.trim();
            if cfg.entries.contains_key(key) {
                return Err(ConfigError::for_key(
                    key,
                    format!("duplicate key on line {}", idx + 1),
                ));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    /// Parses a `key=value` override such as the argument of `--set`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError {
            key: None,
            message: format!("override {assignment:?} is not key=value"),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !is_known_key(key) {
            return Err(ConfigError::for_key(key, "unknown key"));
        }
        if value.is_empty() {
            return Err(ConfigError::for_key(key, "empty value"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Sorted `key=value` lines.
    pub fn emit(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    fn typed<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| parse(v).map_err(|m| ConfigError::for_key(key, m)))
            .transpose()
    }

    fn required<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.typed(key, parse)?
            .ok_or_else(|| ConfigError::for_key(key, "missing required key"))
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.typed(key, parse_float)
    }

    pub fn complex(&self, key: &str) -> Result<Option<Complex64>, ConfigError> {
        self.typed(key, parse_complex)
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.typed(key, |v| v.parse::<u64>().map_err(|e| format!("{v:?}: {e}")))
    }

    pub fn scan_config(&self) -> Result<ScanConfig, ConfigError> {
        let cfg = ScanConfig {
            scan_type: self
                .required("type", |v| v.parse::<ScanType>().map_err(|e| e.to_string()))?,
            wavelength_nm: self.required("lambda_nm", parse_float)?,
            coherence_length_um: self.required("lc_um", parse_float)?,
            delay_start_um: self
                .float("delay_start_um")?
                .unwrap_or(DEFAULT_DELAY_START_UM),
            delay_stop_um: self
                .float("delay_stop_um")?
                .unwrap_or(DEFAULT_DELAY_STOP_UM),
            points: self
                .integer("points")?
                .map_or(DEFAULT_POINTS, |n| n as usize),
            alpha: self.complex("alpha")?.unwrap_or(Complex64::new(1.0, 0.0)),
            baseline_rate_hz: self.float("baseline_hz")?.unwrap_or(DEFAULT_BASELINE_HZ),
        };
        // Attribute invariant violations to the key that holds them.
        let check = |ok: bool, key: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::for_key(key, msg))
            }
        };
        check(
            cfg.wavelength_nm > 0.0 && cfg.wavelength_nm.is_finite(),
            "lambda_nm",
            "must be positive",
        )?;
        check(
            cfg.coherence_length_um > 0.0 && cfg.coherence_length_um.is_finite(),
            "lc_um",
            "must be positive",
        )?;
        check(
            cfg.delay_start_um < cfg.delay_stop_um,
            "delay_stop_um",
            "must exceed delay_start_um",
        )?;
        check(cfg.points >= 2, "points", "must be at least 2")?;
        check(
            cfg.baseline_rate_hz >= 0.0 && cfg.baseline_rate_hz.is_finite(),
            "baseline_hz",
            "must be nonnegative",
        )?;
        cfg.validate().map_err(|e| ConfigError {
            key: None,
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn counting_config(&self) -> Result<CountingConfig, ConfigError> {
        let cc = CountingConfig {
            bin_seconds: self.float("bin_s")?.unwrap_or(1.0),
            accidentals_hz: self.float("accidentals_hz")?.unwrap_or(0.0),
            seed: self.integer("seed")?.unwrap_or(0),
        };
        if !(cc.bin_seconds > 0.0 && cc.bin_seconds.is_finite()) {
            return Err(ConfigError::for_key("bin_s", "must be positive"));
        }
        if !(cc.accidentals_hz >= 0.0 && cc.accidentals_hz.is_finite()) {
            return Err(ConfigError::for_key(
                "accidentals_hz",
                "must be nonnegative",
            ));
        }
        Ok(cc)
    }

    /// Beam splitter from `bs_r`/`bs_t`, or the balanced symmetric one when
    /// neither is set. Losslessness is checked to `tol`, then `(r, t)` is
    /// renormalized.
    pub fn beam_splitter(&self, tol: f64) -> Result<BeamSplitter, ConfigError> {
        match (self.complex("bs_r")?, self.complex("bs_t")?) {
            (None, None) => Ok(BeamSplitter::balanced()),
            (Some(r), Some(t)) => {
                let norm = r.norm_sqr() + t.norm_sqr();
                let cross = (r * t.conj()).re;
                if (norm - 1.0).abs() > tol {
                    return Err(ConfigError::for_key(
                        "bs_t",
                        format!("|r|^2+|t|^2 = {norm} deviates from 1 by more than {tol:e}"),
                    ));
                }
                if cross.abs() > tol {
                    return Err(ConfigError::for_key(
                        "bs_t",
                        format!(
                            "Re(r t*) = {cross} is not zero; the splitter would not be lossless"
                        ),
                    ));
                }
                let s = norm.sqrt();
                BeamSplitter::with_tolerance(r / s, t / s, tol)
                    .map_err(|e| ConfigError::for_key("bs_t", e.to_string()))
            }
            (Some(_), None) => Err(ConfigError::for_key(
                "bs_t",
                "missing required key (bs_r is set)",
            )),
            (None, Some(_)) => Err(ConfigError::for_key(
                "bs_r",
                "missing required key (bs_t is set)",
            )),
        }
    }

    /// Builds the entries that describe `scan` and `counting`.
    pub fn from_scan(scan: &ScanConfig, counting: &CountingConfig) -> Self {
        let mut entries = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            entries.insert(k.to_string(), v);
        };
        put("type", scan.scan_type.to_string());
        put("lambda_nm", scan.wavelength_nm.to_string());
        put("lc_um", scan.coherence_length_um.to_string());
        put("delay_start_um", scan.delay_start_um.to_string());
        put("delay_stop_um", scan.delay_stop_um.to_string());
        put("points", scan.points.to_string());
        put("alpha", format_complex(scan.alpha));
        put("baseline_hz", scan.baseline_rate_hz.to_string());
        put("bin_s", counting.bin_seconds.to_string());
        put("accidentals_hz", counting.accidentals_hz.to_string());
        put("seed", counting.seed.to_string());
        RunConfig { entries }
    }
}

fn parse_float(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|e| format!("{v:?}: {e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{v:?} is not finite"))
    }
}
