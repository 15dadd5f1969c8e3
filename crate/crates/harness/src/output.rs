use std::path::Path;

use heavyclip::optim::StepRecord;
use serde::Serialize;

use crate::error::{io_err, Result};

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "f", "grad_norm", "m_norm", "eps_hat", "eps", "clipped", "eta"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            fmt_f64(r.f),
            fmt_f64(r.grad_norm),
            fmt_f64(r.m_norm),
            fmt_f64(r.eps_hat),
            fmt_f64(r.eps),
            u8::from(r.clipped).to_string(),
            fmt_f64(r.eta),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Parses a file written by [`write_trajectory_csv`].
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|e| crate::error::HarnessError::Output(format!("column {i}: {e}")))
        };
        out.push(StepRecord {
            t: num(0)? as usize,
            f: num(1)?,
            grad_norm: num(2)?,
            m_norm: num(3)?,
            eps_hat: num(4)?,
            eps: num(5)?,
            clipped: &row[6] == "1",
            eta: num(7)?,
        });
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

/// Mean and half-width of a normal 95% interval.
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, f64::MAX, -2.5e-17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let recs = vec![StepRecord {
            t: 1,
            f: 0.1,
            grad_norm: 1.0 / 3.0,
            m_norm: 2.0,
            eps_hat: 1e-9,
            eps: 7.0,
            clipped: true,
            eta: 1e-3,
        }];
        write_trajectory_csv(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,f,grad_norm,m_norm,eps_hat,eps,clipped,eta\n"));
        assert_eq!(read_trajectory_csv(&path).unwrap(), recs);
    }

    #[test]
    fn mean_ci_values() {
        assert_eq!(mean_ci(&[2.0]), (2.0, 0.0));
        let (m, h) = mean_ci(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((h - 1.96).abs() < 1e-12);
    }
}
