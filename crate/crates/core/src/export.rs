//! CSV and plain-text writers for trajectories and scan results. Floats are
//! written with 17 significant digits; CSV rows end in CRLF.

use std::io::Write;

use crate::collapse_lab::CollapseScanResult;
use crate::dynamics::TrajectoryRecord;

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

/// Shortest form that keeps 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Header of [`write_trajectory_csv`] for `n` vortices.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for k in 1..=n {
        h.push(format!("x{k}_x"));
        h.push(format!("x{k}_y"));
    }
    h.extend(["min_dist", "H", "M_x", "M_y", "I", "C"].map(String::from));
    h
}

/// One row per snapshot: time, positions, minimum pairwise distance and the
/// invariants. Relative records are written as their representative with the
/// anchor at the origin.
pub fn write_trajectory_csv<W: Write>(record: &TrajectoryRecord, w: W) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(trajectory_header(record.intensities.len()))?;
    for k in 0..record.len() {
        let inv = &record.invariant_log[k];
        let mut row = vec![format_float(record.times[k])];
        for p in record.system_at(k).positions() {
            row.push(format_float(p.x));
            row.push(format_float(p.y));
        }
        row.push(format_float(record.min_pair_distance[k]));
        row.push(format_float(inv.hamiltonian));
        row.push(format_float(inv.vorticity_vector.x));
        row.push(format_float(inv.vorticity_vector.y));
        row.push(format_float(inv.moment_of_inertia));
        row.push(format_float(inv.collapse_constraint));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per cutoff.
pub fn write_scan_csv<W: Write>(result: &CollapseScanResult, w: W) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "epsilon",
        "hit_count",
        "initial_hits",
        "dynamical_hits",
        "inconclusive_count",
        "sample_count",
        "measure_fraction",
        "ci_low",
        "ci_high",
        "rate_ratio",
    ])?;
    for c in &result.cells {
        out.write_record([
            format_float(c.epsilon),
            c.hit_count.to_string(),
            c.initial_hits.to_string(),
            c.dynamical_hits.to_string(),
            c.inconclusive_count.to_string(),
            c.sample_count.to_string(),
            format_float(c.measure_fraction),
            format_float(c.wilson_ci_95.0),
            format_float(c.wilson_ci_95.1),
            format_float(c.rate_ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Whitespace-separated two-column data with a `#` header line.
pub fn write_columns<W: Write>(mut w: W, labels: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> std::io::Result<()> {
    writeln!(w, "# {} {}", labels.0, labels.1)?;
    for (a, b) in rows {
        writeln!(w, "{} {}", format_float(a), format_float(b))?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorConfig, VortexSystem};
    use crate::geometry::Vec2;
    use crate::kernels::KernelProfile;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(0.1f64, format_float(0.1).parse::<f64>().unwrap());
    }

    #[test]
    fn trajectory_rows() {
        let sys = VortexSystem::new(vec![1.0, -1.0], vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]).unwrap();
        let rec = integrate(&sys, &KernelProfile::euler(), 0.5, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines[0], "t,x1_x,x1_y,x2_x,x2_y,min_dist,H,M_x,M_y,I,C");
        assert_eq!(lines.len(), rec.len() + 1);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}
