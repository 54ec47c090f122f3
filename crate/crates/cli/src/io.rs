//! Input parsing, exit-code mapping and atomic output.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use lempertkit::{CVector, DomainSpec, Error, SolverConfig, C64};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_FAIL: u8 = 3;

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: msg.into() }
    }

    pub fn verdict(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_FAIL, message: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_input_error() => EXIT_INPUT,
            Error::Disagreement(_) => EXIT_FAIL,
            _ => EXIT_SOLVER,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(format!("json: {e}"))
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

/// Reads `arg` as a JSON file, or as inline JSON when it starts with `{`.
fn read_json_text(arg: &str) -> CmdResult<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| Failure::input(format!("cannot read {arg}: {e}")))
}

pub fn load_json<T: DeserializeOwned>(arg: &str) -> CmdResult<T> {
    let text = read_json_text(arg)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

pub fn load_domain(arg: &str) -> CmdResult<DomainSpec> {
    let text = read_json_text(arg)?;
    DomainSpec::from_json(&text).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

pub fn load_config(arg: Option<&str>) -> CmdResult<SolverConfig> {
    let cfg = match arg {
        Some(a) => load_json::<SolverConfig>(a)?,
        None => SolverConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A point of ℂⁿ: `[[re,im],…]` JSON, or comma-separated complex literals such
/// as `0.3+0.1i,-0.2i,1`.
pub fn parse_point(s: &str) -> CmdResult<CVector> {
    let t = s.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| Failure::input(format!("point {s:?}: {e}")));
    }
    let coords = t
        .split(',')
        .map(|c| C64::from_str(c.trim()).map_err(|_| Failure::input(format!("bad complex number {c:?} in {s:?}"))))
        .collect::<CmdResult<Vec<_>>>()?;
    Ok(CVector::new(coords)?)
}

pub fn point_in(domain: &DomainSpec, s: &str) -> CmdResult<CVector> {
    let z = parse_point(s)?;
    if z.len() != domain.dim() {
        return Err(Failure::input(format!("point {s:?} has dimension {}, domain has {}", z.len(), domain.dim())));
    }
    Ok(z)
}

/// An axis `a:b:n` of n ≥ 1 equispaced reals from a to b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.count - 1) as f64;
        (0..self.count).map(|k| if k + 1 == self.count { self.to } else { self.from + h * k as f64 }).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.to - self.from).abs() / (self.count - 1) as f64
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("axis {s:?} must look like from:to:count"));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in axis {s:?}"));
        let (from, to) = (num(parts[0])?, num(parts[1])?);
        let count = parts[2].trim().parse::<usize>().map_err(|_| format!("bad count in axis {s:?}"))?;
        if count == 0 || !from.is_finite() || !to.is_finite() {
            return Err(format!("axis {s:?} needs finite ends and a positive count"));
        }
        Ok(Axis { from, to, count })
    }
}

/// One axis, or two separated by a comma.
pub fn parse_grid(s: &str) -> CmdResult<(Axis, Option<Axis>)> {
    let mut it = s.split(',');
    let first = it.next().unwrap_or_default().parse::<Axis>().map_err(Failure::input)?;
    let second = it.next().map(|a| a.parse::<Axis>()).transpose().map_err(Failure::input)?;
    if it.next().is_some() {
        return Err(Failure::input(format!("grid {s:?} has more than two axes")));
    }
    Ok((first, second))
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CmdResult<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Failure::input(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::input(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

/// Pretty JSON to `out`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(&text, out)
}

pub fn emit_text(text: &str, out: Option<&Path>) -> CmdResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lempertkit::c64;

    #[test]
    fn points_parse_in_both_forms() {
        let a = parse_point("0.3+0.1i, -0.2i").unwrap();
        assert_eq!(a.as_slice(), &[c64(0.3, 0.1), c64(0.0, -0.2)]);
        let b = parse_point("[[0.3,0.1],[0,-0.2]]").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_point("1,0").unwrap().as_slice(), &[c64(1.0, 0.0), c64(0.0, 0.0)]);
        assert!(parse_point("1,x").is_err());
    }

    #[test]
    fn axes_include_both_ends() {
        let a: Axis = "-1:1:5".parse().unwrap();
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(a.step(), 0.5);
        assert!("1:2".parse::<Axis>().is_err());
        assert!("0:1:0".parse::<Axis>().is_err());
        let (x, y) = parse_grid("-1:1:3,0:0.5:2").unwrap();
        assert_eq!(x.count, 3);
        assert_eq!(y.unwrap().values(), vec![0.0, 0.5]);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::NotInterior(0.1)).code, EXIT_INPUT);
        assert_eq!(Failure::from(Error::NearTangential(1e-5)).code, EXIT_SOLVER);
        assert_eq!(Failure::from(Error::Disagreement("x".into())).code, EXIT_FAIL);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("lk-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
