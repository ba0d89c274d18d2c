//! Browser bindings. Each exported function returns markup that the demo
//! page drops straight into the DOM.

use esn_force::harness::{compare_methods, Experiment, RunRecord};
use esn_force::io::compare_text;
use esn_force::plot::{BarChart, LineChart, Series};
use esn_force::signal::MackeyGlass;
use esn_force::{ExperimentConfig, Result};
use wasm_bindgen::prelude::*;

const BENCHMARK: &str = include_str!("../../../configs/benchmark.conf");

/// Upper bounds that keep a single call responsive in the browser.
pub const MAX_STEPS: usize = 20_000;
pub const MAX_NEURONS: usize = 300;
pub const MAX_SEEDS: u64 = 10;

fn benchmark() -> ExperimentConfig {
    ExperimentConfig::load(BENCHMARK).expect("bundled benchmark config parses")
}

fn limit(key: &str, value: usize, max: usize) -> Result<()> {
    if value > max {
        return Err(esn_force::Error::Validation { key: key.into(), reason: format!("at most {max} in the demo") });
    }
    Ok(())
}

fn line(title: &str, y_label: &str, series: Vec<Series>) -> String {
    LineChart { title: title.into(), x_label: "step".into(), y_label: y_label.into(), series }.to_svg()
}

pub fn signal_markup(tau: usize, f0: f64, steps: usize) -> Result<String> {
    limit("steps", steps, MAX_STEPS)?;
    let ys = MackeyGlass::sequence(tau, f0, steps)?;
    let xs = (0..ys.len()).map(|k| k as f64).collect();
    Ok(line(&format!("Mackey-Glass, tau = {tau}, f0 = {f0}"), "f", vec![Series { name: "f".into(), xs, ys }]))
}

#[allow(clippy::too_many_arguments)]
pub fn run_markup(
    method: &str,
    n_neurons: usize,
    chaos_factor: f64,
    composite_gain: f64,
    train_steps: usize,
    predict_steps: usize,
    seed: u64,
) -> Result<String> {
    limit("n_neurons", n_neurons, MAX_NEURONS)?;
    limit("steps", train_steps + predict_steps, MAX_STEPS)?;
    let mut cfg = benchmark();
    cfg.set_raw("method", method)?;
    cfg.n_neurons = n_neurons;
    cfg.chaos_factor = chaos_factor;
    cfg.composite_gain = composite_gain;
    cfg.train_steps = train_steps;
    cfg.predict_steps = predict_steps;
    cfg.seed = seed;
    cfg.validate()?;
    let record = Experiment::new(&cfg)?.run()?;
    Ok(format!("<p class=\"summary\">{}</p>{}{}", summary(&record), output_chart(&record), norm_chart(&record)))
}

fn summary(r: &RunRecord) -> String {
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4e}"));
    match r.diverged_at {
        Some(k) => format!("{} seed {}: diverged at step {k}", r.method, r.seed),
        None => format!(
            "{} seed {}: training MSE {}, prediction MSE {}",
            r.method,
            r.seed,
            fmt(r.train_mse),
            fmt(r.predict_mse)
        ),
    }
}

fn output_chart(r: &RunRecord) -> String {
    let xs: Vec<f64> = r.rows.iter().map(|row| row.step as f64).collect();
    let z = r.rows.iter().map(|row| row.z).collect();
    let f = r.rows.iter().map(|row| row.f).collect();
    line(
        "Network output and target",
        "value",
        vec![Series { name: "output z".into(), xs: xs.clone(), ys: z }, Series { name: "target f".into(), xs, ys: f }],
    )
}

fn norm_chart(r: &RunRecord) -> String {
    let rows = r.train_rows();
    let xs = rows.iter().map(|row| row.step as f64).collect();
    let ys = rows.iter().map(|row| row.w_norm).collect();
    line("Readout weight norm during training", "||W_out||", vec![Series { name: "||W_out||".into(), xs, ys }])
}

pub fn compare_markup(seeds: u64, n_neurons: usize, train_steps: usize, predict_steps: usize) -> Result<String> {
    limit("n_neurons", n_neurons, MAX_NEURONS)?;
    limit("steps", train_steps + predict_steps, MAX_STEPS)?;
    if seeds == 0 || seeds > MAX_SEEDS {
        return Err(esn_force::Error::Validation { key: "seeds".into(), reason: format!("1 to {MAX_SEEDS}") });
    }
    let cfg = ExperimentConfig { n_neurons, train_steps, predict_steps, ..benchmark() };
    cfg.validate()?;
    let seed_list: Vec<u64> = (1..=seeds).collect();
    let sweeps = compare_methods(&cfg, &seed_list, 1)?;
    let chart = BarChart {
        title: format!("Median MSE over {seeds} seed(s)"),
        y_label: "MSE (log scale)".into(),
        categories: sweeps.iter().map(|s| s.method.to_string()).collect(),
        metrics: vec!["training".into(), "prediction".into()],
        values: sweeps
            .iter()
            .map(|s| vec![s.aggregate.train_mse.map(|m| m.median), s.aggregate.predict_mse.map(|m| m.median)])
            .collect(),
        log_scale: true,
    };
    Ok(format!("{}<pre>{}</pre>", chart.to_svg(), compare_text(&sweeps)))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn signal(tau: usize, f0: f64, steps: usize) -> std::result::Result<String, JsError> {
    js(signal_markup(tau, f0, steps))
}

#[wasm_bindgen]
pub fn run(
    method: &str,
    n_neurons: usize,
    chaos_factor: f64,
    composite_gain: f64,
    train_steps: usize,
    predict_steps: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    js(run_markup(method, n_neurons, chaos_factor, composite_gain, train_steps, predict_steps, seed.into()))
}

#[wasm_bindgen]
pub fn compare(
    seeds: u32,
    n_neurons: usize,
    train_steps: usize,
    predict_steps: usize,
) -> std::result::Result<String, JsError> {
    js(compare_markup(seeds.into(), n_neurons, train_steps, predict_steps))
}
