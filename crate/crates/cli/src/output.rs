use std::io::Write;
use std::path::Path;

use mapflow::Trajectory;
use serde::Serialize;

use crate::CliError;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Sends `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Usage(format!("stdout: {e}")))
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,X1..Xn,H1..Hk` with one row per sample.
pub fn trajectory_csv(tr: &Trajectory, dim: usize, hams: usize) -> String {
    let mut out = String::from("t");
    for j in 1..=dim {
        out.push_str(&format!(",X{j}"));
    }
    for j in 1..=hams {
        out.push_str(&format!(",H{j}"));
    }
    out.push('\n');
    for s in &tr.samples {
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.state.as_slice().iter().copied())
            .chain(s.ham_values.iter().copied())
            .map(num)
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
