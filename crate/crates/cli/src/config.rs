//! Run configuration and its flat `key = value unit` file format.
//!
//! ```text
//! # comments start with '#'
//! particle = proton
//! hz = 10000 Oe
//! h1 = 100 Oe
//! delta = 0.033 m^-1
//! t_max = 5 relaxation_times
//! points = 1000
//! csv = evolution.csv
//! svg = fig1.svg
//! ```
//!
//! A custom particle is `particle = custom` together with `mass = <v> MeV`,
//! `g_factor = <v>` and `charge = positive|negative`. Every dimensional value
//! carries a unit tag; unknown keys, duplicate keys and missing tags are
//! errors.

use std::fmt;
use std::path::PathBuf;

use spinrelax::units::{inverse_meter_to_mev, oersted_to_tesla, seconds_to_mev_inverse, tesla_to_oersted};
use spinrelax::{ChargeSign, CouplingParams, EvolutionParams, ParticleSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Particle {
    Preset(String),
    Custom(ParticleSpec),
}

impl Particle {
    pub fn spec(&self) -> Result<ParticleSpec, String> {
        match self {
            Particle::Preset(name) => ParticleSpec::preset(name).ok_or_else(|| format!("unknown particle preset `{name}`")),
            Particle::Custom(spec) => Ok(*spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    PerMeter(f64),
    Mev(f64),
}

impl Delta {
    pub fn mev(&self) -> f64 {
        match *self {
            Delta::PerMeter(v) => inverse_meter_to_mev(v),
            Delta::Mev(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpan {
    Seconds(f64),
    InverseMev(f64),
    RelaxationTimes(f64),
}

impl TimeSpan {
    /// Length in MeV⁻¹; relaxation times are multiples of `1/(2γ)`.
    pub fn inverse_mev(&self, p: &EvolutionParams) -> Result<f64, String> {
        match *self {
            TimeSpan::Seconds(s) => Ok(seconds_to_mev_inverse(s)),
            TimeSpan::InverseMev(t) => Ok(t),
            TimeSpan::RelaxationTimes(k) if p.gamma() > 0.0 => Ok(k * p.relaxation_time()),
            TimeSpan::RelaxationTimes(0.0) => Ok(0.0),
            TimeSpan::RelaxationTimes(_) => {
                Err("t_max in relaxation times needs a non-zero rotating field (h1 > 0)".to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub particle: Particle,
    pub hz_oe: f64,
    pub h1_oe: f64,
    pub delta: Delta,
    pub t_max: TimeSpan,
    pub points: usize,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            particle: Particle::Preset("proton".into()),
            hz_oe: 1e4,
            h1_oe: 1e2,
            delta: Delta::PerMeter(0.033),
            t_max: TimeSpan::RelaxationTimes(5.0),
            points: 1000,
            csv: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, field: &str, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const KEYS: [&str; 11] = [
    "particle", "mass", "g_factor", "charge", "hz", "h1", "delta", "t_max", "points", "csv", "svg",
];

fn number(line: usize, key: &str, text: &str) -> Result<f64, ConfigError> {
    let v: f64 = text
        .parse()
        .map_err(|_| ConfigError::at(line, key, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(ConfigError::at(line, key, "must be finite"));
    }
    Ok(v)
}

fn tagged<'a>(line: usize, key: &str, value: &'a str) -> Result<(f64, &'a str), ConfigError> {
    let mut parts = value.split_whitespace();
    let v = parts.next().ok_or_else(|| ConfigError::at(line, key, "missing value"))?;
    let unit = parts
        .next()
        .ok_or_else(|| ConfigError::at(line, key, "missing unit tag"))?;
    if parts.next().is_some() {
        return Err(ConfigError::at(line, key, format!("expected `<number> <unit>`, got `{value}`")));
    }
    Ok((number(line, key, v)?, unit))
}

fn non_negative(line: usize, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v < 0.0 {
        return Err(ConfigError::at(line, key, format!("must be >= 0, got {v}")));
    }
    Ok(v)
}

fn field_oe(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let (v, unit) = tagged(line, key, value)?;
    let oe = match unit {
        "Oe" | "oe" => v,
        "T" => tesla_to_oersted(v),
        _ => return Err(ConfigError::at(line, key, format!("unknown unit `{unit}` (use Oe or T)"))),
    };
    non_negative(line, key, oe)
}

#[derive(Default)]
struct CustomParts {
    mass: Option<f64>,
    g_factor: Option<f64>,
    charge: Option<ChargeSign>,
}

impl RunConfig {
    /// Parses the file format; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut custom = CustomParts::default();
        let mut custom_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError {
                line: Some(line),
                field: None,
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::at(line, key, "unknown key"))?;
            if seen.contains(known) {
                return Err(ConfigError::at(line, key, "duplicate key"));
            }
            seen.push(known);
            match key {
                "particle" => {
                    if value == "custom" {
                        custom_line = line;
                        cfg.particle = Particle::Custom(ParticleSpec::proton());
                    } else if ParticleSpec::preset(value).is_some() {
                        cfg.particle = Particle::Preset(value.to_string());
                    } else {
                        return Err(ConfigError::at(line, key, format!("unknown preset `{value}` (known: proton, custom)")));
                    }
                }
                "mass" => {
                    let (v, unit) = tagged(line, key, value)?;
                    if unit != "MeV" {
                        return Err(ConfigError::at(line, key, format!("unknown unit `{unit}` (use MeV)")));
                    }
                    custom.mass = Some(v);
                }
                "g_factor" => custom.g_factor = Some(number(line, key, value)?),
                "charge" => {
                    custom.charge = Some(match value {
                        "positive" | "+" => ChargeSign::Positive,
                        "negative" | "-" => ChargeSign::Negative,
                        _ => return Err(ConfigError::at(line, key, "use `positive` or `negative`")),
                    })
                }
                "hz" => cfg.hz_oe = field_oe(line, key, value)?,
                "h1" => cfg.h1_oe = field_oe(line, key, value)?,
                "delta" => {
                    let (v, unit) = tagged(line, key, value)?;
                    if v <= 0.0 {
                        return Err(ConfigError::at(line, key, format!("must be > 0, got {v}")));
                    }
                    cfg.delta = match unit {
                        "m^-1" | "1/m" | "per_m" => Delta::PerMeter(v),
                        "MeV" => Delta::Mev(v),
                        _ => return Err(ConfigError::at(line, key, format!("unknown unit `{unit}` (use m^-1 or MeV)"))),
                    };
                }
                "t_max" => {
                    let (v, unit) = tagged(line, key, value)?;
                    let v = non_negative(line, key, v)?;
                    cfg.t_max = match unit {
                        "s" => TimeSpan::Seconds(v),
                        "MeV^-1" | "1/MeV" => TimeSpan::InverseMev(v),
                        "relaxation_times" | "relax" => TimeSpan::RelaxationTimes(v),
                        _ => {
                            return Err(ConfigError::at(
                                line,
                                key,
                                format!("unknown unit `{unit}` (use s, MeV^-1 or relaxation_times)"),
                            ))
                        }
                    };
                }
                "points" => {
                    let n: usize = value
                        .parse()
                        .map_err(|_| ConfigError::at(line, key, format!("`{value}` is not a whole number")))?;
                    if n < 2 {
                        return Err(ConfigError::at(line, key, format!("need at least 2, got {n}")));
                    }
                    cfg.points = n;
                }
                "csv" => cfg.csv = Some(PathBuf::from(value)),
                "svg" => cfg.svg = Some(PathBuf::from(value)),
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let any_custom = custom.mass.is_some() || custom.g_factor.is_some() || custom.charge.is_some();
        match (&cfg.particle, any_custom) {
            (Particle::Custom(_), _) => {
                let missing = |k: &str| ConfigError::at(custom_line, k, "required for a custom particle");
                let spec = ParticleSpec::new(
                    custom.mass.ok_or_else(|| missing("mass"))?,
                    custom.g_factor.ok_or_else(|| missing("g_factor"))?,
                    custom.charge.ok_or_else(|| missing("charge"))?,
                )
                .map_err(|e| ConfigError::at(custom_line, "particle", e.to_string()))?;
                cfg.particle = Particle::Custom(spec);
            }
            (Particle::Preset(_), true) => {
                return Err(ConfigError::field("particle", "mass, g_factor and charge need `particle = custom`"));
            }
            _ => {}
        }
        Ok(cfg)
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        match &self.particle {
            Particle::Preset(name) => out.push_str(&format!("particle = {name}\n")),
            Particle::Custom(spec) => {
                let charge = match spec.charge() {
                    ChargeSign::Positive => "positive",
                    ChargeSign::Negative => "negative",
                };
                out.push_str("particle = custom\n");
                out.push_str(&format!("mass = {:?} MeV\n", spec.mass_mev()));
                out.push_str(&format!("g_factor = {:?}\n", spec.g_factor()));
                out.push_str(&format!("charge = {charge}\n"));
            }
        }
        out.push_str(&format!("hz = {:?} Oe\n", self.hz_oe));
        out.push_str(&format!("h1 = {:?} Oe\n", self.h1_oe));
        out.push_str(&match self.delta {
            Delta::PerMeter(v) => format!("delta = {v:?} m^-1\n"),
            Delta::Mev(v) => format!("delta = {v:?} MeV\n"),
        });
        out.push_str(&match self.t_max {
            TimeSpan::Seconds(v) => format!("t_max = {v:?} s\n"),
            TimeSpan::InverseMev(v) => format!("t_max = {v:?} MeV^-1\n"),
            TimeSpan::RelaxationTimes(v) => format!("t_max = {v:?} relaxation_times\n"),
        });
        out.push_str(&format!("points = {}\n", self.points));
        if let Some(p) = &self.csv {
            out.push_str(&format!("csv = {}\n", p.display()));
        }
        if let Some(p) = &self.svg {
            out.push_str(&format!("svg = {}\n", p.display()));
        }
        out
    }

    pub fn coupling(&self) -> Result<CouplingParams, ConfigError> {
        let spec = self.particle.spec().map_err(|e| ConfigError::field("particle", e))?;
        if !(self.hz_oe >= 0.0 && self.hz_oe.is_finite()) {
            return Err(ConfigError::field("hz", format!("must be finite and >= 0, got {}", self.hz_oe)));
        }
        if !(self.h1_oe >= 0.0 && self.h1_oe.is_finite()) {
            return Err(ConfigError::field("h1", format!("must be finite and >= 0, got {}", self.h1_oe)));
        }
        CouplingParams::from_fields(spec, oersted_to_tesla(self.hz_oe), oersted_to_tesla(self.h1_oe), self.delta.mev())
            .map_err(|e| ConfigError::field("delta", e.to_string()))
    }

    pub fn evolution(&self) -> Result<EvolutionParams, ConfigError> {
        let c = self.coupling()?;
        EvolutionParams::from_coupling(&c).map_err(|e| ConfigError::field("hz", e.to_string()))
    }

    pub fn t_max_inverse_mev(&self, p: &EvolutionParams) -> Result<f64, ConfigError> {
        self.t_max.inverse_mev(p).map_err(|e| ConfigError::field("t_max", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn parses_example() {
        let text = "# demo\nparticle = proton\nhz = 1 T\nh1 = 100 Oe  # weak\ndelta = 1e-15 MeV\nt_max = 3e-6 s\npoints = 11\ncsv = out.csv\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.hz_oe, 1e4);
        assert_eq!(cfg.delta, Delta::Mev(1e-15));
        assert_eq!(cfg.t_max, TimeSpan::Seconds(3e-6));
        assert_eq!(cfg.points, 11);
        assert_eq!(cfg.csv, Some(PathBuf::from("out.csv")));
        assert_eq!(cfg.svg, None);
    }

    #[test]
    fn custom_particle() {
        let text = "particle = custom\nmass = 1876.1 MeV\ng_factor = 0.857\ncharge = positive\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert!(matches!(cfg.particle, Particle::Custom(s) if s.mass_mev() == 1876.1));
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
        let err = RunConfig::parse("particle = custom\nmass = 1 MeV\n").unwrap_err();
        assert_eq!(err.field.as_deref(), Some("g_factor"));
        assert!(RunConfig::parse("mass = 1 MeV\n").is_err());
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let err = RunConfig::parse("hz = 1e4 Oe\nh1 = 100\n").unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (Some(2), Some("h1")));
        assert!(err.to_string().starts_with("line 2, field `h1`"));

        let err = RunConfig::parse("\n\ncolour = red\n").unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (Some(3), Some("colour")));

        for bad in [
            "hz = 1e4 gauss",
            "hz = -1 Oe",
            "delta = 0 m^-1",
            "delta = 0.03 cm^-1",
            "t_max = 5 years",
            "points = 1",
            "points = many",
            "hz = 1e4 Oe extra",
            "hz = NaN Oe",
            "no equals sign",
            "particle = muon",
        ] {
            let err = RunConfig::parse(bad).unwrap_err();
            assert_eq!(err.line, Some(1), "{bad}");
        }
        let err = RunConfig::parse("points = 3\npoints = 4").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn relaxation_span_needs_drive() {
        let cfg = RunConfig {
            h1_oe: 0.0,
            ..RunConfig::default()
        };
        let p = cfg.evolution().unwrap();
        assert!(cfg.t_max_inverse_mev(&p).is_err());
        let cfg = RunConfig {
            t_max: TimeSpan::Seconds(1e-6),
            ..cfg
        };
        assert!(cfg.t_max_inverse_mev(&p).unwrap() > 0.0);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            0.0f64..1e6,
            0.0f64..1e4,
            prop_oneof![(1e-6f64..10.0).prop_map(Delta::PerMeter), (1e-20f64..1e-10).prop_map(Delta::Mev)],
            prop_oneof![
                (0.0f64..1e-3).prop_map(TimeSpan::Seconds),
                (0.0f64..1e20).prop_map(TimeSpan::InverseMev),
                (0.0f64..50.0).prop_map(TimeSpan::RelaxationTimes)
            ],
            2usize..100_000,
            proptest::option::of("[a-z]{1,8}\\.csv"),
            proptest::option::of("[a-z]{1,8}\\.svg"),
        )
            .prop_map(|(hz_oe, h1_oe, delta, t_max, points, csv, svg)| RunConfig {
                particle: Particle::Preset("proton".into()),
                hz_oe,
                h1_oe,
                delta,
                t_max,
                points,
                csv: csv.map(PathBuf::from),
                svg: svg.map(PathBuf::from),
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_is_identity(cfg in arb_config()) {
            let once = RunConfig::parse(&cfg.serialize()).unwrap();
            prop_assert_eq!(&once, &cfg);
            let twice = RunConfig::parse(&once.serialize()).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
