// `--config <path>`: a flat `key = value` file whose keys are the
// subcommand's long flag names. The entries are spliced into argv right
// after the subcommand, before the user's own flags, and since later
// occurrences of a flag win, command-line flags override the file.

use std::ffi::OsString;
use std::fs;

const SUBCOMMANDS: [&str; 6] = ["generate", "select", "simulate", "coverage", "theory-check", "plot"];

fn config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(|p| p.to_string_lossy().into_owned());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Parses the file into flag tokens. `key = true` becomes a bare switch,
/// `key = false` is dropped.
pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", k + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key", k + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

pub fn apply_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let extra = parse_config(&text)?;
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let mut out = argv[..=pos].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_switches() {
        let flags = parse_config("# c\nruns = 50\nseed=3\ngrid_as_printed = true\nkeep-potential = false\n").unwrap();
        assert_eq!(flags, ["--runs", "50", "--seed", "3", "--grid-as-printed"]);
        assert!(parse_config("runs 50").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("tmsel-config-{}", std::process::id()));
        fs::write(&dir, "runs = 7\n").unwrap();
        let argv: Vec<OsString> =
            ["tmsel", "--config", dir.to_str().unwrap(), "simulate", "--runs", "9"].iter().map(OsString::from).collect();
        let out: Vec<String> = apply_config(argv).unwrap().iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(out[3..], ["simulate", "--runs", "7", "--runs", "9"]);
        fs::remove_file(dir).unwrap();
    }
}
