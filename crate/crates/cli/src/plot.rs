//! `plot` subcommand: reads a CSV produced by `run` or `compare` and renders SVG.

use std::path::Path;

use anyhow::{bail, Context, Result};
use esn_force::plot::{BarChart, LineChart, Series};

use crate::PlotKind;

pub fn kind_name(kind: PlotKind) -> &'static str {
    match kind {
        PlotKind::OutputVsTarget => "output-vs-target",
        PlotKind::WeightNorm => "weight-norm",
        PlotKind::WeightElements => "weight-elements",
        PlotKind::NodeActivity => "node-activity",
        PlotKind::MseBar => "mse-bar",
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>()?;
        Ok(Self { headers, rows })
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).with_context(|| format!("missing column `{name}`"))
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r.get(i).unwrap_or("");
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>().with_context(|| format!("column `{name}`: bad number `{cell}`"))
                }
            })
            .collect()
    }

    fn text_column(&self, name: &str) -> Result<Vec<String>> {
        let i = self.index(name)?;
        Ok(self.rows.iter().map(|r| r.get(i).unwrap_or("").to_string()).collect())
    }
}

pub fn render(kind: PlotKind, input: &Path, window: Option<(usize, usize)>) -> Result<String> {
    let table = Table::read(input)?;
    if let PlotKind::MseBar = kind {
        return mse_bar(&table);
    }
    let steps = table.column("step")?;
    let (lo, hi) = match window {
        Some((a, b)) => {
            if steps.is_empty() || b > steps.len() {
                bail!("window {a}..{b} outside trace of {} steps", steps.len());
            }
            (a, b)
        }
        None => (0, steps.len()),
    };
    let crop = |v: Vec<f64>| v[lo..hi].to_vec();
    let xs = crop(steps);
    let series = |cols: &[(&str, &str)]| -> Result<Vec<Series>> {
        cols.iter()
            .map(|(col, label)| Ok(Series { name: label.to_string(), xs: xs.clone(), ys: crop(table.column(col)?) }))
            .collect()
    };
    let (title, y_label, series) = match kind {
        PlotKind::OutputVsTarget => {
            ("Network output and target", "value", series(&[("z", "output z"), ("f", "target f")])?)
        }
        PlotKind::WeightNorm => ("Readout weight norm", "||W_out||", series(&[("w_norm", "||W_out||")])?),
        PlotKind::WeightElements => {
            let names: Vec<String> = (0..10).map(|i| format!("w_{i}")).collect();
            let cols: Vec<(&str, &str)> = names.iter().map(|n| (n.as_str(), n.as_str())).collect();
            ("Sampled readout weights", "weight", series(&cols)?)
        }
        PlotKind::NodeActivity => {
            let names: Vec<String> = (0..3).map(|i| format!("node_{i}")).collect();
            let cols: Vec<(&str, &str)> = names.iter().map(|n| (n.as_str(), n.as_str())).collect();
            ("Sampled reservoir activations", "activation r", series(&cols)?)
        }
        PlotKind::MseBar => unreachable!(),
    };
    Ok(LineChart { title: title.into(), x_label: "step".into(), y_label: y_label.into(), series }.to_svg())
}

fn mse_bar(table: &Table) -> Result<String> {
    let methods = table.text_column("method")?;
    let train = table.column("train_mse_median")?;
    let predict = table.column("predict_mse_median")?;
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    Ok(BarChart {
        title: "Median MSE by learning rule".into(),
        y_label: "MSE (log scale)".into(),
        categories: methods,
        metrics: vec!["training".into(), "prediction".into()],
        values: train.iter().zip(&predict).map(|(&t, &p)| vec![finite(t), finite(p)]).collect(),
        log_scale: true,
    }
    .to_svg())
}
