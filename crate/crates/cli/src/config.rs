//! Key-value config files. Each `key = value` line becomes the flag
//! `--key=value` of the chosen subcommand, placed before the flags typed on
//! the command line so that those win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, CommandFactory};

use crate::Cli;

/// Parsed config file, keys normalised to flag spelling.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: BTreeMap<String, (usize, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            bail!("line {}: empty key or value", i + 1);
        }
        if key == "command" {
            if cfg.command.replace(value).is_some() {
                bail!("line {}: duplicate key `command`", i + 1);
            }
        } else if cfg.entries.insert(key.clone(), (i + 1, value)).is_some() {
            bail!("line {}: duplicate key `{key}`", i + 1);
        }
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

/// Splices the config file named by `--config`, if any, into `argv`.
pub fn expand_args(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut args = argv
        .into_iter()
        .map(|a| a.into_string().map_err(|a| anyhow!("argument {a:?} is not valid UTF-8")))
        .collect::<Result<Vec<String>>>()?;
    let Some(path) = take_config_flag(&mut args)? else {
        return Ok(args.into_iter().map(Into::into).collect());
    };
    let cfg = load(Path::new(&path))?;
    splice(args, &cfg).map(|a| a.into_iter().map(Into::into).collect())
}

fn take_config_flag(args: &mut Vec<String>) -> Result<Option<String>> {
    let Some(i) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(None);
    };
    let flag = args.remove(i);
    match flag.strip_prefix("--config=") {
        Some(p) => Ok(Some(p.to_string())),
        None if i < args.len() => Ok(Some(args.remove(i))),
        None => bail!("--config needs a file name"),
    }
}

/// End of the leading global options (`--jobs`) after the program name.
fn globals_end(args: &[String]) -> usize {
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--jobs" => i += 2,
            a if a.starts_with("--jobs=") => i += 1,
            _ => break,
        }
    }
    i.min(args.len())
}

pub fn splice(mut args: Vec<String>, cfg: &ConfigFile) -> Result<Vec<String>> {
    let root = Cli::command();
    let named = args
        .iter()
        .skip(1)
        .position(|a| root.get_subcommands().any(|s| s.get_name() == a))
        .map(|i| i + 1);
    let at = match (named, &cfg.command) {
        (Some(i), Some(c)) if &args[i] != c => {
            bail!("config file is for `{c}` but the command line asks for `{}`", args[i])
        }
        (Some(i), _) => i,
        (None, Some(c)) => {
            let i = globals_end(&args);
            args.insert(i, c.clone());
            i
        }
        (None, None) => bail!("no subcommand given on the command line or as `command` in the config file"),
    };
    let sub = root
        .find_subcommand(&args[at])
        .ok_or_else(|| anyhow!("unknown subcommand `{}`", args[at]))?;
    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, (line, value)) in &cfg.entries {
        if key == "jobs" {
            global.push(format!("--jobs={value}"));
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && !a.is_global_set())
            .ok_or_else(|| anyhow!("line {line}: unknown key `{key}` for `{}`", args[at]))?;
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => local.push(format!("--{key}")),
                "false" => {}
                _ => bail!("line {line}: `{key}` takes true or false"),
            },
            ArgAction::Append => {
                local.extend(value.split(',').map(|v| format!("--{key}={}", v.trim())));
            }
            _ => local.push(format!("--{key}={value}")),
        }
    }
    let mut out = args[..1].to_vec();
    out.extend(global);
    out.extend_from_slice(&args[1..=at]);
    out.extend(local);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn flags_on_the_command_line_come_last() {
        let cfg = parse("command = simulate\nseed = 3\npw=0.1 # comment\nperiodic = true\n").unwrap();
        let out = splice(argv("sgrowth --seed 9"), &cfg).unwrap();
        assert_eq!(out, argv("sgrowth simulate --periodic --pw=0.1 --seed=3 --seed 9"));
    }

    #[test]
    fn global_and_repeated_keys() {
        let cfg = parse("jobs = 2\nsuite = min-max, autonomy\nstep_budget = 10").unwrap();
        assert!(splice(argv("sgrowth verify"), &cfg).is_err(), "step-budget is not a verify flag");
        let cfg = parse("jobs = 2\nsuite = min-max, autonomy").unwrap();
        let out = splice(argv("sgrowth verify --cases 5"), &cfg).unwrap();
        assert_eq!(out, argv("sgrowth --jobs=2 verify --suite=min-max --suite=autonomy --cases 5"));
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse("seed 3").is_err());
        assert!(parse("seed = 3\nseed = 4").is_err());
        assert!(parse("periodic =").is_err());
        let cfg = parse("command = xi\nperiodic = maybe").unwrap();
        assert!(splice(argv("sgrowth"), &cfg).is_err());
        assert!(splice(argv("sgrowth ponds"), &cfg).is_err());
        let cfg = parse("bogus = 1").unwrap();
        assert!(splice(argv("sgrowth simulate"), &cfg).is_err());
    }
}
