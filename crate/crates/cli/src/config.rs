//! Flat `key = value` config files, spliced into the argument list ahead of
//! the command-line flags so that flags win.

use std::ffi::OsString;
use std::fs;

use crate::CliError;

/// Keys that map to switches rather than valued flags.
const SWITCHES: &[&str] = &[
    "readout",
    "accumulated",
    "ds",
    "girth",
    "with-identity",
    "search",
    "allow-zero-blocks",
    "timed",
];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Data(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Data(format!("config line {}: empty key", k + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn to_args(entries: &[(String, String)]) -> Result<Vec<OsString>, CliError> {
    let mut args = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "1" | "yes" => args.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::Data(format!("config key {key}: expected true or false"))),
            }
        } else {
            args.push(format!("--{key}").into());
            args.push(value.into());
        }
    }
    Ok(args)
}

/// Remove `--config PATH` from `argv` and insert the file's flags right
/// after the subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.to_string_lossy())))?;
    let extra = to_args(&parse(&text)?)?;
    // the subcommand is the first argument after the program name that is
    // not a flag
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    rest.splice(at..at, extra);
    Ok(rest)
}

/// Render resolved settings in the same format.
pub fn render(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}
