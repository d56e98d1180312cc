//! Command table, config-file loading and typed parameter access.
//!
//! A config file is `key = value` text. Keys before any `[section]` header,
//! or inside `[run]`, are run options (`output`, `format`, `workers`); a
//! section named after a command holds that command's parameters. Flags
//! override the file, which overrides the built-in defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Command};

#[derive(Debug)]
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Debug)]
pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
    }
}

const RANGE_HELP: &str = "number of grid points (at least 2)";

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "spectrum",
        about: "Labeled spectrum of one coupling configuration",
        keys: &[
            key("sites", Some("3"), "3 for one encoded qubit, 6 for two"),
            key("h", Some("0.75"), "Zeeman energy in units of J"),
            key("j12", Some("1"), "coupling between sites 1 and 2"),
            key("j13", Some("1"), "coupling between sites 1 and 3"),
            key("j23", Some("1"), "coupling between sites 2 and 3"),
            key("j45", Some("1"), "coupling between sites 4 and 5 (6 sites)"),
            key("j46", Some("1"), "coupling between sites 4 and 6 (6 sites)"),
            key("j56", Some("1"), "coupling between sites 5 and 6 (6 sites)"),
            key(
                "j14",
                Some("0"),
                "inter-qubit coupling between sites 1 and 4 (6 sites)",
            ),
        ],
    },
    CommandSpec {
        name: "sweep-field",
        about: "Idle single-qubit spectrum against the field",
        keys: &[
            key("min", Some("0"), "first field value"),
            key("max", Some("1.5"), "last field value"),
            key("points", Some("301"), RANGE_HELP),
        ],
    },
    CommandSpec {
        name: "sweep-intra",
        about: "Single-qubit spectrum against one intra-qubit coupling",
        keys: &[
            key("coupling", Some("J23"), "J12, J13 or J23"),
            key("min", Some("0"), "first coupling value"),
            key("max", Some("2"), "last coupling value"),
            key("points", Some("301"), RANGE_HELP),
        ],
    },
    CommandSpec {
        name: "sweep-inter",
        about: "Two-qubit spectrum against J14 with the tracked logical levels",
        keys: &[
            key("min", Some("0"), "first J14 value (non-negative)"),
            key("max", Some("1"), "last J14 value"),
            key("points", Some("301"), RANGE_HELP),
        ],
    },
    CommandSpec {
        name: "lambdas",
        about: "Tracked two-qubit logical energies along a J14 grid",
        keys: &[
            key("grid", Some("0:0.7:71"), "start:stop:count"),
            key("h", Some("0.75"), "Zeeman energy"),
        ],
    },
    CommandSpec {
        name: "verify-polynomials",
        about: "Residuals of the closed-form level polynomials on the tracked levels",
        keys: &[
            key("grid", Some("0:0.7:71"), "start:stop:count"),
            key("h", Some("0.75"), "Zeeman energy"),
        ],
    },
    CommandSpec {
        name: "gate",
        about: "Synthesize, simulate and score one gate",
        keys: &[
            key("type", None, "rz, rx, axis120, su2 or cphase"),
            key(
                "theta",
                None,
                "rotation angle (radians, or tokens like pi/2)",
            ),
            key("delta", None, "coupling shift (default 0.5; 0.3 for rx)"),
            key("axis", Some("J12"), "axis120: J12 or J13"),
            key("nx", Some("0"), "su2: rotation axis x component"),
            key("ny", Some("0"), "su2: rotation axis y component"),
            key("nz", Some("1"), "su2: rotation axis z component"),
            key("delta-z", Some("0.5"), "su2: J23 shift for z rotations"),
            key("delta-x", Some("0.3"), "su2: base shift for x rotations"),
            key("phi", Some("pi"), "cphase: conditional phase"),
            key("j14", Some("0.5"), "cphase: peak J14, inside (0, 0.75)"),
            key(
                "ramp",
                Some("20"),
                "cphase: ramp time in 1/J (0 for a sudden switch)",
            ),
            key(
                "calibration-steps",
                Some("64"),
                "cphase: Simpson nodes for phase calibration",
            ),
            key(
                "correction",
                Some("simultaneous"),
                "cphase: simultaneous or sequential z correction",
            ),
            key(
                "steps",
                None,
                "midpoint steps per ramp (default from the ramp length)",
            ),
        ],
    },
    CommandSpec {
        name: "adiabatic",
        about: "Calibrated conditional phase gate scored against ramp time",
        keys: &[
            key("phi", Some("pi"), "conditional phase"),
            key("j14", Some("0.5"), "peak J14"),
            key(
                "ramps",
                Some("0,5,10,20,40"),
                "comma-separated ramp times in 1/J",
            ),
        ],
    },
    CommandSpec {
        name: "units",
        about: "Field and gap in laboratory units",
        keys: &[
            key("J", Some("7"), "idle exchange in μeV"),
            key("g", Some("0.44"), "g-factor magnitude"),
            key("h", Some("0.75"), "Zeeman energy in units of J"),
        ],
    },
];

pub const RUN_SECTION: &str = "run";
const RUN_KEYS: [&str; 3] = ["output", "format", "workers"];

pub fn command_spec(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}

#[derive(Debug, PartialEq)]
pub enum ConfigError {
    Read {
        path: PathBuf,
        message: String,
    },
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },
    UnknownSection {
        path: PathBuf,
        section: String,
    },
    UnknownKey {
        key: String,
        context: String,
    },
    Invalid {
        key: String,
        value: String,
        constraint: String,
    },
    Missing {
        key: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, message } => {
                write!(f, "cannot read {}: {message}", path.display())
            }
            ConfigError::Syntax {
                path,
                line,
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
            ConfigError::UnknownSection { path, section } => {
                write!(f, "{}: unknown section [{section}]", path.display())
            }
            ConfigError::UnknownKey { key, context } => {
                write!(f, "unknown key `{key}` for {context}")
            }
            ConfigError::Invalid {
                key,
                value,
                constraint,
            } => write!(f, "invalid {key} = `{value}`: {constraint}"),
            ConfigError::Missing { key } => write!(f, "missing required parameter `{key}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct RunConfig {
    pub command: &'static CommandSpec,
    /// Explicitly supplied parameters (file or flags), flags winning.
    pub params: BTreeMap<String, String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

pub fn cli() -> Command {
    let mut app = Command::new("eoq")
        .version(clap::crate_version!())
        .about("Spectra, gate synthesis and leakage of exchange-only encoded spin qubits")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .global(true)
                .value_name("FILE")
                .help("key = value config file"),
        )
        .arg(
            Arg::new("output")
                .long("output")
                .short('o')
                .global(true)
                .value_name("PATH")
                .help("artifact path"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .global(true)
                .value_name("csv|json")
                .help("artifact format"),
        )
        .arg(
            Arg::new("workers")
                .long("workers")
                .global(true)
                .value_name("N")
                .help("worker threads for sweeps"),
        );
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name).about(spec.about);
        for k in spec.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name("VALUE")
                    .allow_hyphen_values(true)
                    .help(help),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

/// Merges the optional config file with the flags in `matches`.
pub fn from_matches(matches: &ArgMatches) -> Result<RunConfig, ConfigError> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = command_spec(name).expect("subcommands come from the table");

    let mut run = BTreeMap::new();
    let mut params = BTreeMap::new();
    if let Some(path) = matches.get_one::<String>("config") {
        let file = load_file(Path::new(path))?;
        run = file.run;
        params = file.sections.get(name).cloned().unwrap_or_default();
    }
    for k in RUN_KEYS {
        if let Some(v) = matches.get_one::<String>(k) {
            run.insert(k.to_string(), v.clone());
        }
    }
    for k in command.keys {
        if let Some(v) = sub.get_one::<String>(k.name) {
            params.insert(k.name.to_string(), v.clone());
        }
    }

    let format = run.get("format").map(|v| parse_format(v)).transpose()?;
    let workers = run
        .get("workers")
        .map(|v| match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(invalid("workers", v, "a positive integer")),
        })
        .transpose()?;
    Ok(RunConfig {
        command,
        params,
        output: run.get("output").map(PathBuf::from),
        format,
        workers,
    })
}

fn parse_format(v: &str) -> Result<Format, ConfigError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(invalid("format", v, "csv or json")),
    }
}

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub run: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn load_file(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_file(&text, path)
}

/// Parses config text; every section and key is checked against the command table.
///
/// Lines are `[section]`, `key = value`, blank, or comments starting with
/// `#` or `;`. Anything else, and a key repeated within a section, is a
/// syntax error at that line.
pub fn parse_file(text: &str, path: &Path) -> Result<ConfigFile, ConfigError> {
    let syntax = |line: usize, message: String| ConfigError::Syntax {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = ConfigFile::default();
    let mut section: Option<&'static CommandSpec> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = n + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(n, "section header without closing `]`".into()))?
                .trim();
            section = match name {
                RUN_SECTION => None,
                _ => Some(
                    command_spec(name).ok_or_else(|| ConfigError::UnknownSection {
                        path: path.to_path_buf(),
                        section: name.to_string(),
                    })?,
                ),
            };
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| syntax(n, format!("expected `key = value`, found `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(syntax(n, "empty key".into()));
        }
        let target = match section {
            None => {
                if !RUN_KEYS.contains(&k) {
                    return Err(ConfigError::UnknownKey {
                        key: k.to_string(),
                        context: format!(
                            "[{RUN_SECTION}] (expected one of {})",
                            RUN_KEYS.join(", ")
                        ),
                    });
                }
                &mut out.run
            }
            Some(spec) => {
                if !spec.keys.iter().any(|x| x.name == k) {
                    return Err(ConfigError::UnknownKey {
                        key: k.to_string(),
                        context: format!("[{}]", spec.name),
                    });
                }
                out.sections.entry(spec.name.to_string()).or_default()
            }
        };
        if target.insert(k.to_string(), v.to_string()).is_some() {
            return Err(syntax(n, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

fn invalid(key: &str, value: &str, constraint: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        constraint: constraint.to_string(),
    }
}

impl RunConfig {
    pub fn given(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    /// Supplied value, else the table default.
    pub fn raw(&self, key: &str) -> Result<String, ConfigError> {
        if let Some(v) = self.params.get(key) {
            return Ok(v.trim().to_string());
        }
        self.command
            .keys
            .iter()
            .find(|k| k.name == key)
            .and_then(|k| k.default)
            .map(str::to_string)
            .ok_or_else(|| ConfigError::Missing {
                key: key.to_string(),
            })
    }

    /// Every parameter of the command with its effective value.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.command
            .keys
            .iter()
            .filter_map(|k| self.raw(k.name).ok().map(|v| (k.name.to_string(), v)))
            .collect()
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key)?;
        parse_f64(&v).ok_or_else(|| invalid(key, &v, "a finite number"))
    }

    pub fn angle(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key)?;
        parse_angle(&v).ok_or_else(|| {
            invalid(
                key,
                &v,
                "an angle in radians or a token like pi, -pi/2, 3pi/4",
            )
        })
    }

    pub fn count(&self, key: &str, min: usize) -> Result<usize, ConfigError> {
        let v = self.raw(key)?;
        match v.parse::<usize>() {
            Ok(n) if n >= min => Ok(n),
            _ => Err(invalid(key, &v, &format!("an integer ≥ {min}"))),
        }
    }

    pub fn choice(&self, key: &str, options: &[&'static str]) -> Result<&'static str, ConfigError> {
        let v = self.raw(key)?;
        options
            .iter()
            .find(|o| o.eq_ignore_ascii_case(&v))
            .copied()
            .ok_or_else(|| invalid(key, &v, &format!("one of {}", options.join(", "))))
    }

    /// `start:stop:count`, evenly spaced and inclusive.
    pub fn grid(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(key)?;
        let bad = || invalid(key, &v, "start:stop:count with start < stop and count ≥ 2");
        let parts: Vec<&str> = v.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad());
        };
        let (a, b) = (parse_f64(a).ok_or_else(bad)?, parse_f64(b).ok_or_else(bad)?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        eoq::spectra::linspace(a, b, n).map_err(|_| bad())
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(key)?;
        let values: Option<Vec<f64>> = v.split(',').map(parse_f64).collect();
        match values {
            Some(xs) if !xs.is_empty() => Ok(xs),
            _ => Err(invalid(key, &v, "a comma-separated list of numbers")),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Decimal radians, or `[sign][coef][*]pi[/den]`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim().to_ascii_lowercase().replace(' ', "");
    let Some(at) = s.find("pi") else {
        return parse_f64(&s);
    };
    let coef = s[..at].trim_end_matches('*');
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => parse_f64(c)?,
    };
    let den = match &s[at + 2..] {
        "" => 1.0,
        rest => parse_f64(rest.strip_prefix('/')?).filter(|d| *d != 0.0)?,
    };
    Some(coef * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigError> {
        let mut full = vec!["eoq"];
        full.extend_from_slice(args);
        from_matches(&cli().try_get_matches_from(full).expect("clap accepts"))
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_angle("3pi/4"), Some(0.75 * PI));
        assert_eq!(parse_angle("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_angle(" 0.25 "), Some(0.25));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("tau"), None);
        assert_eq!(parse_angle("pie"), None);
    }

    #[test]
    fn flags_map_to_parameters() {
        let c = parse(&[
            "sweep-field",
            "--min",
            "0",
            "--max",
            "1.5",
            "--points",
            "301",
        ])
        .unwrap();
        assert_eq!(c.command.name, "sweep-field");
        assert_eq!(c.count("points", 2).unwrap(), 301);
        assert_eq!(c.f64("max").unwrap(), 1.5);
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c = parse(&["units"]).unwrap();
        assert_eq!(c.f64("J").unwrap(), 7.0);
        assert_eq!(c.f64("h").unwrap(), 0.75);
        assert!(!c.given("h"));
        let c = parse(&["gate"]).unwrap();
        assert_eq!(
            c.raw("type"),
            Err(ConfigError::Missing { key: "type".into() })
        );
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "format = json\n[units]\nh = 0.75\nJ = 8\n").unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["units", "--config", p, "--h", "0.6"]).unwrap();
        assert_eq!(c.f64("h").unwrap(), 0.6);
        assert_eq!(c.f64("J").unwrap(), 8.0);
        assert_eq!(c.format, Some(Format::Json));
        let c = parse(&["--format", "csv", "units", "--config", p]).unwrap();
        assert_eq!(c.format, Some(Format::Csv));
    }

    #[test]
    fn unknown_keys_and_sections_are_named() {
        let p = Path::new("x.ini");
        let e = parse_file("[units]\nbogus = 1\n", p).unwrap_err();
        assert_eq!(
            e,
            ConfigError::UnknownKey {
                key: "bogus".into(),
                context: "[units]".into()
            }
        );
        assert!(e.to_string().contains("bogus"));
        assert!(matches!(
            parse_file("[nope]\nh = 1\n", p),
            Err(ConfigError::UnknownSection { .. })
        ));
        assert!(matches!(
            parse_file("speed = 3\n", p),
            Err(ConfigError::UnknownKey { .. })
        ));
    }

    #[test]
    fn malformed_file_reports_line() {
        let e = parse_file(
            "[units]\nh = 0.75\nno separator here\nJ = 7\n",
            Path::new("bad.ini"),
        )
        .unwrap_err();
        match e {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        let e = parse_file("[units]\nh = 0.75\n[broken\n", Path::new("bad.ini")).unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 3, .. }));
        let e = parse_file(
            "# comment\n[units]\nh = 0.75\n; again\nh = 0.7\n",
            Path::new("dup.ini"),
        )
        .unwrap_err();
        match e {
            ConfigError::Syntax { line, message, .. } => {
                assert!(line == 5 && message.contains("duplicate"))
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_values_name_key_and_constraint() {
        let c = parse(&["sweep-field", "--points", "1"]).unwrap();
        let e = c.count("points", 2).unwrap_err();
        assert!(e.to_string().contains("points") && e.to_string().contains("≥ 2"));
        let c = parse(&["lambdas", "--grid", "0:0.7"]).unwrap();
        assert!(c.grid("grid").is_err());
        let c = parse(&["lambdas", "--grid", "0:0.7:8"]).unwrap();
        assert_eq!(c.grid("grid").unwrap().len(), 8);
        assert!(parse(&["--workers", "0", "units"]).is_err());
        let c = parse(&["adiabatic", "--ramps", "5, 10,x"]).unwrap();
        assert!(c.list("ramps").is_err());
    }
}
