//! Trajectory serialization and atomic file output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use multiroot::config::OutputFormat;
use multiroot::solver::Trajectory;
use serde::Serialize;

pub fn header(n_roots: usize) -> String {
    let mut h = String::from("t");
    for n in 1..=n_roots {
        write!(h, ",re_x{n},im_x{n}").unwrap();
    }
    h
}

/// One line per sample, 17 significant digits.
pub fn to_csv(tr: &Trajectory) -> String {
    let mut s = header(tr.n_roots());
    s.push('\n');
    for (t, x) in tr.times.iter().zip(&tr.positions) {
        write!(s, "{t:.16e}").unwrap();
        for z in x {
            write!(s, ",{:.16e},{:.16e}", z.re, z.im).unwrap();
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct JsonTrajectory<'a> {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    branch_events: &'a [multiroot::solver::BranchEvent],
    meta: &'a multiroot::solver::TrajectoryMeta,
}

pub fn to_json(tr: &Trajectory) -> String {
    let columns = header(tr.n_roots()).split(',').map(String::from).collect();
    let rows = tr
        .times
        .iter()
        .zip(&tr.positions)
        .map(|(t, x)| {
            std::iter::once(*t)
                .chain(x.iter().flat_map(|z| [z.re, z.im]))
                .collect()
        })
        .collect();
    let doc = JsonTrajectory {
        columns,
        rows,
        branch_events: &tr.branch_events,
        meta: &tr.meta,
    };
    serde_json::to_string_pretty(&doc).expect("trajectory serializes")
}

pub fn render(tr: &Trajectory, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(tr),
        OutputFormat::Json => to_json(tr),
    }
}

/// Writes through a temporary file in the target directory, so a failed
/// run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `run.csv` → `run.algebraic.csv` for the two outputs of `--engine both`.
pub fn with_engine_suffix(path: &Path, engine: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{engine}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{engine}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(header(2), "t,re_x1,im_x1,re_x2,im_x2");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1_f64, 1.0 / 3.0, -47.46, 6.02214076e23, 5e-324, f64::MAX] {
            let s = format!("{v:.16e}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn engine_suffix() {
        assert_eq!(
            with_engine_suffix(Path::new("out/run.csv"), "direct"),
            PathBuf::from("out/run.direct.csv")
        );
        assert_eq!(
            with_engine_suffix(Path::new("run"), "algebraic"),
            PathBuf::from("run.algebraic")
        );
    }
}
