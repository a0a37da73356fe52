//! `--config` files: `key=value` lines and `#` comments, spliced in as flags
//! right after the subcommand. Command-line flags take precedence.

use crate::CliError;

const SUBCOMMANDS: [&str; 7] = ["analyze", "pram", "dag", "kernels", "netsim", "coll", "apps"];

fn config_path(argv: &[String]) -> Option<&str> {
    let mut it = argv.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--config" {
            found = it.next().map(String::as_str);
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v);
        }
    }
    found
}

/// `(key, flags)` pairs of a config file. `key=true` and a bare `key` become
/// a switch; `key=false` is dropped.
pub fn parse(text: &str) -> Result<Vec<(String, Vec<String>)>, CliError> {
    let mut flags = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(CliError::Args(format!("config line {}: bad key in {raw:?}", lineno + 1)));
        }
        let encoded = match value {
            Some("false") => continue,
            None | Some("true") | Some("") => vec![format!("--{key}")],
            Some(v) => vec![format!("--{key}"), v.to_string()],
        };
        flags.push((key.to_string(), encoded));
    }
    Ok(flags)
}

/// Long flag names given explicitly on the command line.
fn explicit_keys(argv: &[String]) -> Vec<&str> {
    argv.iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect()
}

/// Splices config flags after the subcommand, except those also given on
/// the command line.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Args(format!("cannot read config {path}: {e}")))?;
    let flags = parse(&text)?;
    let Some(at) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let given = explicit_keys(&argv);
    let mut out = argv[..=at].to_vec();
    out.extend(flags.into_iter().filter(|(k, _)| !given.contains(&k.as_str())).flat_map(|(_, f)| f));
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_switches() {
        let f = parse("# header\nn = 128\n\nC=2 # constant\nspeedup=true\nverbose=false\nbare\n").unwrap();
        let flat: Vec<String> = f.into_iter().flat_map(|(_, v)| v).collect();
        assert_eq!(flat, ["--n", "128", "--C", "2", "--speedup", "--bare"]);
        assert!(parse("=3").is_err());
        assert!(parse("two words=1").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("parwb-config-{}", std::process::id()));
        std::fs::write(&dir, "p=4\nm=3\n").unwrap();
        let argv: Vec<String> =
            ["parwb", "--config", dir.to_str().unwrap(), "coll", "--p", "8"].iter().map(|s| s.to_string()).collect();
        let got = expand(argv).unwrap();
        assert_eq!(got[3..], ["coll", "--m", "3", "--p", "8"]);
        std::fs::remove_file(dir).unwrap();
    }
}
