//! Value parsers for flags and the `key = value` config file.

use std::fs;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::{BigRational, Rational64};

use epd_hodograph::hodograph::{GridAxis, SingularClass, Unknown};
use epd_hodograph::{Hierarchy, TimeVector};

use crate::CliError;

pub fn hierarchy(s: &str) -> Result<Hierarchy, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "benney" => Ok(Hierarchy::Benney),
        "dtoda" | "toda" => Ok(Hierarchy::DToda),
        other => Rational64::from_str(other.strip_prefix("eps=").unwrap_or(other))
            .map(Hierarchy::GeneralEps)
            .map_err(|_| format!("`{s}` is not benney, dtoda or a rational eps")),
    }
}

pub fn rational(s: &str) -> Result<BigRational, String> {
    BigRational::from_str(s.trim()).map_err(|_| format!("`{s}` is not a rational p/q"))
}

pub fn floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect()
}

pub fn pair(s: &str) -> Result<(f64, f64), String> {
    match floats(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        v => Err(format!("expected two comma-separated numbers, got {}", v.len())),
    }
}

pub fn complex(s: &str) -> Result<Complex64, String> {
    pair(s).map(|(re, im)| Complex64::new(re, im))
}

pub fn class(s: &str) -> Result<(u32, u32), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|_| format!("`{a}` is not an order"))?,
            b.parse().map_err(|_| format!("`{b}` is not an order"))?,
        )),
        _ => Err(format!("class `{s}` must be `n1,n2`")),
    }
}

/// `lo:hi:n`.
pub fn range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("range `{s}` must be `lo:hi:n`"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("`{hi}` is not a number"))?;
    let n: usize = n.parse().map_err(|_| format!("`{n}` is not a count"))?;
    if n == 0 {
        return Err("a range needs at least one node".into());
    }
    Ok((lo, hi, n))
}

/// `name=value` list; unnamed slots are exactly zero.
pub fn times(hier: Hierarchy, s: &str) -> Result<TimeVector, CliError> {
    let mut slots = Vec::new();
    for entry in s.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::flag("--t", format!("entry `{entry}` is not name=value")))?;
        let slot = hier
            .parse_slot(name)
            .ok_or_else(|| CliError::flag("--t", format!("`{name}` is not a {hier} time")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::flag("--t", format!("`{value}` is not a number")))?;
        slots.push((slot, v));
    }
    Ok(TimeVector::from_slots(hier, &slots)?)
}

pub fn unknowns(hier: Hierarchy, s: &str) -> Result<Vec<Unknown>, CliError> {
    s.split(',')
        .map(|name| Unknown::parse(hier, name).map_err(|e| CliError::flag("--unknowns", e.to_string())))
        .collect()
}

pub fn slot(hier: Hierarchy, flag: &str, name: &str) -> Result<usize, CliError> {
    hier.parse_slot(name)
        .ok_or_else(|| CliError::flag(flag, format!("`{name}` is not a {hier} time")))
}

/// `slot:lo:hi:n`.
pub fn axis(hier: Hierarchy, flag: &str, s: &str) -> Result<GridAxis, CliError> {
    let (name, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::flag(flag, format!("`{s}` must be `slot:lo:hi:n`")))?;
    let slot = slot(hier, flag, name)?;
    let (lo, hi, n) = range(rest).map_err(|e| CliError::flag(flag, e))?;
    Ok(GridAxis::linspace(slot, lo, hi, n))
}

pub fn singular_class(c: (u32, u32)) -> SingularClass {
    SingularClass::from_orders(c.0, c.1)
}

/// Flags from a `key = value` file, skipping keys already given on the
/// command line so that explicit flags win.
pub fn config_args(argv: &[String]) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut iter = argv.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            path = iter.next().cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::flag("--config", format!("{path}: {e}")))?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::flag("--config", format!("{path}:{}: expected key = value", no + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" || given(&key) {
            continue;
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => out.push(format!("--{key}={v}")),
        }
    }
    Ok(out)
}
