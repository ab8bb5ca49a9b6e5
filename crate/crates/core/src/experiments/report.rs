use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::bias::{BiasCurveReport, BiasPoint};
use super::svg::{render, Panel, Series};
use super::sweep::{PointSummary, SweepReport};
use super::table1::Table1Report;
use crate::error::{Error, Result};

/// A finished experiment together with the figure names it is written under.
pub enum Report<'a> {
    /// Mean panels under `figure`; with `variance_figure`, a second set of
    /// log-log variance panels.
    Sweep {
        report: &'a SweepReport,
        figure: &'a str,
        variance_figure: Option<&'a str>,
    },
    Table1(&'a Table1Report),
    BiasCurve { report: &'a BiasCurveReport, figure: &'a str },
}

/// Writes CSV, JSON and SVG artifacts into `outdir` (created if needed) and
/// returns the written paths.
pub fn emit_report(report: &Report, outdir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let mut written = Vec::new();
    match report {
        Report::Sweep {
            report,
            figure,
            variance_figure,
        } => {
            write_sweep_csv(report, &outdir.join(format!("{figure}.csv")), &mut written)?;
            write_json(*report, &outdir.join(format!("{figure}.json")), &mut written)?;
            write_text(&sweep_svg(report, false), &outdir.join(format!("{figure}.svg")), &mut written)?;
            if let Some(v) = variance_figure {
                write_sweep_csv(report, &outdir.join(format!("{v}.csv")), &mut written)?;
                write_text(&sweep_svg(report, true), &outdir.join(format!("{v}.svg")), &mut written)?;
            }
        }
        Report::Table1(t) => {
            write_table1_csv(t, &outdir.join("table1.csv"), &mut written)?;
            write_json(*t, &outdir.join("table1.json"), &mut written)?;
        }
        Report::BiasCurve { report, figure } => {
            write_bias_csv(report, &outdir.join(format!("{figure}.csv")), &mut written)?;
            write_json(*report, &outdir.join(format!("{figure}.json")), &mut written)?;
            write_text(&bias_svg(report), &outdir.join(format!("{figure}.svg")), &mut written)?;
        }
    }
    Ok(written)
}

fn write_text(text: &str, path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    write_text(&text, path, written)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))
}

fn fmt(x: f64) -> String {
    // Display for f64 is the shortest exactly round-tripping form.
    format!("{x}")
}

const SWEEP_FIXED: [&str; 7] = ["method", "n", "runs", "converged", "not_converged", "errors", "invalid"];

fn write_sweep_csv(report: &SweepReport, path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = SWEEP_FIXED.iter().map(|s| s.to_string()).collect();
    for l in &report.parameter_labels {
        header.push(format!("{l}_mean"));
        header.push(format!("{l}_var"));
    }
    let err = |e: csv::Error| Error::parse(path, e);
    w.write_record(&header).map_err(err)?;
    for p in &report.points {
        let mut row = vec![
            p.method.clone(),
            p.n_samples.to_string(),
            p.runs.to_string(),
            p.converged.to_string(),
            p.not_converged.to_string(),
            p.errors.to_string(),
            p.invalid.to_string(),
        ];
        for (m, v) in p.mean.iter().zip(&p.variance) {
            row.push(fmt(*m));
            row.push(fmt(*v));
        }
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::parse(path, format!("missing column {i}")))?;
    raw.parse()
        .map_err(|e: T::Err| Error::parse(path, format!("column {i} ({raw:?}): {e}")))
}

/// Parses a sweep CSV written by [`emit_report`] back into point summaries.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<PointSummary>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let width = rd.headers().map_err(|e| Error::parse(path, e))?.len();
    let dim = (width - SWEEP_FIXED.len()) / 2;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let mut mean = Vec::with_capacity(dim);
        let mut variance = Vec::with_capacity(dim);
        for j in 0..dim {
            mean.push(field(&rec, SWEEP_FIXED.len() + 2 * j, path)?);
            variance.push(field(&rec, SWEEP_FIXED.len() + 2 * j + 1, path)?);
        }
        out.push(PointSummary {
            method: field(&rec, 0, path)?,
            n_samples: field(&rec, 1, path)?,
            runs: field(&rec, 2, path)?,
            converged: field(&rec, 3, path)?,
            not_converged: field(&rec, 4, path)?,
            errors: field(&rec, 5, path)?,
            invalid: field(&rec, 6, path)?,
            mean,
            variance,
        });
    }
    Ok(out)
}

fn write_table1_csv(t: &Table1Report, path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::parse(path, e);
    let mut header = vec!["Method".to_string()];
    for (i, l) in t.parameter_labels.iter().enumerate() {
        match t.truth.get(i) {
            Some(v) => header.push(format!("{l} ({v})")),
            None => header.push(l.clone()),
        }
    }
    header.push("converged".into());
    header.push("runs".into());
    w.write_record(&header).map_err(err)?;
    for r in &t.rows {
        let mut row = vec![r.method.clone()];
        row.extend(r.mean.iter().map(|m| format!("{m:.4}")));
        row.push(r.converged.to_string());
        row.push(r.runs.to_string());
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn write_bias_csv(report: &BiasCurveReport, path: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::parse(path, e);
    let dim = report.points.first().map_or(0, |p| p.mean_theta.len());
    let mut header: Vec<String> = ["snr", "metric", "runs", "converged", "invalid"].map(String::from).to_vec();
    header.extend((0..dim).map(|j| format!("theta{j}_mean")));
    w.write_record(&header).map_err(err)?;
    for p in &report.points {
        let mut row = vec![
            fmt(p.snr),
            fmt(p.metric),
            p.runs.to_string(),
            p.converged.to_string(),
            p.invalid.to_string(),
        ];
        row.extend(p.mean_theta.iter().map(|x| fmt(*x)));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

/// Reads `(snr, metric)` pairs from a bias CSV.
pub fn read_bias_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::parse(path, e))?;
            Ok((field(&rec, 0, path)?, field(&rec, 1, path)?))
        })
        .collect()
}

fn sweep_svg(report: &SweepReport, variance: bool) -> String {
    let mut panels: Vec<Panel> = report
        .parameter_labels
        .iter()
        .enumerate()
        .map(|(j, label)| Panel {
            title: if variance {
                format!("variance of {label}")
            } else {
                format!("mean of {label}")
            },
            x_label: "N".into(),
            log_x: true,
            log_y: variance,
            series: report
                .methods
                .iter()
                .map(|m| Series {
                    name: m.clone(),
                    points: report
                        .series(m)
                        .iter()
                        .map(|p| (p.n_samples as f64, if variance { p.variance[j] } else { p.mean[j] }))
                        .collect(),
                })
                .collect(),
            reference: if variance { None } else { report.truth.get(j).copied() },
        })
        .collect();
    if panels.is_empty() {
        panels.push(empty_panel("N"));
    }
    render(&panels, 2)
}

fn empty_panel(x_label: &str) -> Panel {
    Panel {
        title: String::new(),
        x_label: x_label.into(),
        log_x: false,
        log_y: false,
        series: Vec::new(),
        reference: None,
    }
}

fn bias_svg(report: &BiasCurveReport) -> String {
    let points: Vec<(f64, f64)> = report.points.iter().map(|p: &BiasPoint| (p.snr, p.metric)).collect();
    render(
        &[Panel {
            title: format!("normalized bias of {}", report.method),
            x_label: "SNR".into(),
            log_x: true,
            log_y: false,
            series: vec![Series {
                name: report.method.clone(),
                points,
            }],
            reference: None,
        }],
        1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> SweepReport {
        let labels: Vec<String> = ["a1", "a2", "b0", "b1"].map(String::from).to_vec();
        let mk = |method: &str, n: usize, s: f64| PointSummary {
            method: method.into(),
            n_samples: n,
            runs: 10,
            converged: 9,
            not_converged: 1,
            errors: 0,
            invalid: false,
            mean: vec![0.7 + s, 0.5 - s / 3.0, 0.5 + 1e-17, -0.25 * (1.0 + s)],
            variance: vec![1.0 / n as f64, 0.1 / 3.0, 2.0 / n as f64, std::f64::consts::PI * 1e-9],
        };
        SweepReport {
            parameter_labels: labels,
            truth: vec![0.707, 0.5, 0.5, -0.25],
            methods: vec!["SRIVC".into(), "CLSRIVC".into()],
            sample_sizes: vec![200, 2000],
            master_seed: 1,
            points: vec![
                mk("SRIVC", 200, 0.013),
                mk("SRIVC", 2000, 0.0011),
                mk("CLSRIVC", 200, 0.011),
                mk("CLSRIVC", 2000, 0.0009),
            ],
        }
    }

    #[test]
    fn sweep_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample_report();
        let files = emit_report(
            &Report::Sweep {
                report: &r,
                figure: "fig4",
                variance_figure: Some("fig5"),
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(files.len(), 5);
        let back = read_sweep_csv(&dir.path().join("fig4.csv")).unwrap();
        assert_eq!(back.len(), r.points.len());
        for (a, b) in back.iter().zip(&r.points) {
            assert_eq!((&a.method, a.n_samples, a.converged), (&b.method, b.n_samples, b.converged));
            for (x, y) in a.mean.iter().chain(&a.variance).zip(b.mean.iter().chain(&b.variance)) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn four_parameter_report_gives_four_panels() {
        let svg = sweep_svg(&sample_report(), false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"<g class="panel">"#).count(), 4);
        assert_eq!(svg.matches(r#"class="series""#).count(), 8);
        assert_eq!(svg.matches(r#"class="reference""#).count(), 4);
        for l in ["mean of a1", "mean of a2", "mean of b0", "mean of b1"] {
            assert!(svg.contains(l));
        }
        let var = sweep_svg(&sample_report(), true);
        assert_eq!(var.matches(r#"class="reference""#).count(), 0);
    }

    #[test]
    fn empty_report_gives_header_and_axes() {
        let dir = tempfile::tempdir().unwrap();
        let r = SweepReport {
            parameter_labels: Vec::new(),
            truth: Vec::new(),
            methods: Vec::new(),
            sample_sizes: Vec::new(),
            master_seed: 0,
            points: Vec::new(),
        };
        emit_report(
            &Report::Sweep {
                report: &r,
                figure: "fig2",
                variance_figure: None,
            },
            dir.path(),
        )
        .unwrap();
        let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1);
        let svg = fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
        assert_eq!(svg.matches(r#"<g class="panel">"#).count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<svg").count(), svg.matches("</svg>").count());
    }

    #[test]
    fn table1_layout() {
        let dir = tempfile::tempdir().unwrap();
        let t = Table1Report {
            parameter_labels: ["a1", "a2", "b0", "b1"].map(String::from).to_vec(),
            truth: vec![0.707, 0.5, 0.5, -0.25],
            h: 0.02,
            n_samples: 200_000,
            rows: vec![super::super::table1::Table1Row {
                method: "SRIVC".into(),
                mean: vec![0.70441, 0.49663, 0.50081, -0.24694],
                std_error: vec![0.0; 4],
                converged: 3,
                runs: 3,
            }],
        };
        emit_report(&Report::Table1(&t), dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "Method,a1 (0.707),a2 (0.5),b0 (0.5),b1 (-0.25),converged,runs");
        assert_eq!(lines.next().unwrap(), "SRIVC,0.7044,0.4966,0.5008,-0.2469,3,3");
    }

    #[test]
    fn unwritable_directory_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let e = emit_report(&Report::Table1(&Table1Report {
            parameter_labels: vec![],
            truth: vec![],
            h: 0.1,
            n_samples: 1,
            rows: vec![],
        }), &blocker.join("sub"))
        .unwrap_err();
        assert!(e.to_string().contains("file"), "{e}");
    }
}
