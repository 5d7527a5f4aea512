//! `--config` files: one `key = value` pair per line, `#` starts a comment.
//! Keys are flag names with or without the leading dashes. Pairs are
//! appended to the command line unless the same flag is already present,
//! so flags given explicitly always win.

use std::fs;

use crate::CliError;

fn config_path(args: &[String]) -> Result<Option<String>, CliError> {
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            return match args.get(i + 1) {
                Some(p) => Ok(Some(p.clone())),
                None => Err(CliError::Usage("--config: missing file name".into())),
            };
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

fn has_flag(args: &[String], flag: &str) -> bool {
    args.iter()
        .any(|a| a == flag || a.strip_prefix(flag).is_some_and(|rest| rest.starts_with('=')))
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--config: line {} is not of the form key=value",
                no + 1
            )));
        };
        let key = k.trim().trim_start_matches('-');
        if key.is_empty() {
            return Err(CliError::Usage(format!("--config: empty key on line {}", no + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Command line with the config file's pairs merged in.
pub fn merge(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("--config: cannot read `{path}`: {e}")))?;
    let mut merged = args.clone();
    for (key, value) in parse_pairs(&text)? {
        if key == "config" {
            return Err(CliError::Usage("--config: config files cannot nest".into()));
        }
        let flag = format!("--{key}");
        if has_flag(&args, &flag) {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(flag),
            "false" => {}
            _ => {
                merged.push(flag);
                merged.push(value);
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn pairs_and_comments() {
        let p = parse_pairs("# header\nsigma = 0.5, 1\n--p=inf  # trailing\n\n").unwrap();
        assert_eq!(
            p,
            vec![("sigma".into(), "0.5, 1".into()), ("p".into(), "inf".into())]
        );
        assert!(parse_pairs("sigma 0.5").is_err());
    }

    #[test]
    fn explicit_flags_win() {
        let args = s(&["mixdens", "approx", "--sigma", "2"]);
        assert!(has_flag(&args, "--sigma"));
        assert!(!has_flag(&args, "--sig"));
        assert!(has_flag(&s(&["--sigma=3"]), "--sigma"));
    }
}
