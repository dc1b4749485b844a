//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string; failures come back as `{"error": "..."}` so the page has one
//! shape to handle.

use serde::Serialize;
use tipcast_core::basin::{tip_forecast, TipForecast};
use tipcast_core::regime::{iterate_map, symbolize_numeric, MapParams, Thresholds};
use tipcast_core::toy::{run_seeds, CaseTwoFixture, Preset, SweepStats};
use wasm_bindgen::prelude::*;

const MAX_GRID: usize = 200;
const MAX_STEPS: usize = 5000;
const MAX_SEEDS: u32 = 500;

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Forecast for one context vector against basins `b` and `d`.
pub fn forecast(c: &[f64], b: &[f64], d: &[f64]) -> Result<TipForecast, String> {
    tip_forecast(c, b, d).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Row-major from the top-left corner: 0 Immediate, 1 Delayed, 2 Never.
    pub cases: Vec<u8>,
    /// `⌈n*⌉` per cell, `null` where there is no finite tip.
    pub n_star_ceil: Vec<Option<u64>>,
}

/// Forecast case over a grid of 2-D contexts spanning `[x0, x1] × [y0, y1]`.
pub fn forecast_grid(b: &[f64], d: &[f64], bounds: [f64; 4], nx: usize, ny: usize) -> Result<Grid, String> {
    if b.len() != 2 || d.len() != 2 {
        return Err("grid forecasts need 2-D basins".into());
    }
    if nx == 0 || ny == 0 || nx > MAX_GRID || ny > MAX_GRID {
        return Err(format!("grid size must be 1..={MAX_GRID} per side"));
    }
    let [x0, x1, y0, y1] = bounds;
    let mut cases = Vec::with_capacity(nx * ny);
    let mut n_star_ceil = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = y1 - (y1 - y0) * (j as f64 + 0.5) / ny as f64;
        for i in 0..nx {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / nx as f64;
            let f = forecast(&[x, y], b, d)?;
            cases.push(f.case as u8);
            n_star_ceil.push(f.n_star_ceil);
        }
    }
    Ok(Grid {
        nx,
        ny,
        cases,
        n_star_ceil,
    })
}

#[derive(Debug, Serialize)]
pub struct MapRun {
    pub series: Vec<f64>,
    pub symbols: Vec<u32>,
    pub regime: String,
    pub entropy: f64,
    pub determinism: f64,
}

pub fn simulate_map(
    lambda: f64,
    rho: f64,
    sigma: f64,
    steps: usize,
    seed: u64,
    x0: f64,
    bins: usize,
) -> Result<MapRun, String> {
    if steps > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps"));
    }
    let params = MapParams {
        lambda,
        rho,
        noise_sigma: sigma,
        x0,
        steps,
        seed,
    };
    let series = iterate_map(&params).map_err(|e| e.to_string())?;
    let t = symbolize_numeric(&series, bins)
        .and_then(|t| t.classified(&Thresholds::default()))
        .map_err(|e| e.to_string())?;
    let d = t
        .diagnostics
        .clone()
        .expect("classified trajectories carry diagnostics");
    Ok(MapRun {
        regime: t.regime.map(|r| r.to_string()).unwrap_or_default(),
        entropy: d.entropy,
        determinism: d.determinism,
        symbols: t.symbols,
        series,
    })
}

/// Tip-step statistics of one preset over seeds `0..seeds` on the shipped
/// delayed-tipping embeddings.
pub fn toy_sweep(preset: &str, seeds: u32, zero_noise: bool) -> Result<SweepStats, String> {
    if seeds == 0 || seeds > MAX_SEEDS {
        return Err(format!("seed count must be 1..={MAX_SEEDS}"));
    }
    let preset: Preset = preset.parse().map_err(|e: tipcast_core::Error| e.to_string())?;
    let mut config = preset.config(0);
    if zero_noise {
        config = config.zero_noise();
    }
    let f = CaseTwoFixture::shipped();
    let runs = run_seeds(&config, &f.a, &f.b, &f.d, 0..u64::from(seeds)).map_err(|e| e.to_string())?;
    Ok(SweepStats::from_runs(config, runs))
}

#[wasm_bindgen(js_name = tipForecast)]
pub fn tip_forecast_js(c: &[f64], b: &[f64], d: &[f64]) -> String {
    to_json(forecast(c, b, d))
}

/// `bounds` is `[x0, x1, y0, y1]`.
#[wasm_bindgen(js_name = forecastGrid)]
pub fn forecast_grid_js(b: &[f64], d: &[f64], bounds: &[f64], nx: usize, ny: usize) -> String {
    let bounds: Result<[f64; 4], String> = bounds
        .try_into()
        .map_err(|_| "bounds must be [x0, x1, y0, y1]".to_string());
    to_json(bounds.and_then(|bounds| forecast_grid(b, d, bounds, nx, ny)))
}

#[wasm_bindgen(js_name = simulateMap)]
pub fn simulate_map_js(lambda: f64, rho: f64, sigma: f64, steps: usize, seed: u32, x0: f64, bins: usize) -> String {
    to_json(simulate_map(lambda, rho, sigma, steps, u64::from(seed), x0, bins))
}

#[wasm_bindgen(js_name = toySweep)]
pub fn toy_sweep_js(preset: &str, seeds: u32, zero_noise: bool) -> String {
    to_json(toy_sweep(preset, seeds, zero_noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tipcast_core::basin::Case;

    #[test]
    fn json_wrappers_report_errors() {
        let v: serde_json::Value = serde_json::from_str(&tip_forecast_js(&[1.0], &[1.0, 0.0], &[0.0, 1.0])).unwrap();
        assert!(v["error"].as_str().unwrap().contains("dimension"));
        let v: serde_json::Value = serde_json::from_str(&toy_sweep_js("huge", 3, false)).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn grid_cells_match_pointwise_forecasts() {
        let (b, d) = ([0.5, 0.2], [0.9, 0.8]);
        let g = forecast_grid(&b, &d, [-2.0, 2.0, -1.0, 1.0], 7, 5).unwrap();
        assert_eq!(g.cases.len(), 35);
        // Centre of the top-left cell.
        let f = forecast(&[-2.0 + 4.0 / 14.0, 1.0 - 2.0 / 10.0], &b, &d).unwrap();
        assert_eq!(g.cases[0], f.case as u8);
        assert_eq!(g.n_star_ceil[0], f.n_star_ceil);
        assert!(g.cases.contains(&(Case::Immediate as u8)));
        assert!(forecast_grid(&[0.0; 3], &[1.0; 3], [0.0, 1.0, 0.0, 1.0], 2, 2).is_err());
        assert!(forecast_grid(&b, &d, [0.0, 1.0, 0.0, 1.0], 0, 2).is_err());
    }

    #[test]
    fn map_and_sweep_round_trip_through_json() {
        let v: serde_json::Value = serde_json::from_str(&simulate_map_js(1.5, 1.0, 0.0, 200, 0, 0.2, 4)).unwrap();
        assert_eq!(v["regime"], "F");
        assert_eq!(v["series"].as_array().unwrap().len(), 201);
        let v: serde_json::Value = serde_json::from_str(&toy_sweep_js("bare", 2, true)).unwrap();
        assert_eq!(v["runs"][0]["tip_step"], 4);
        assert!(simulate_map(1.0, 1.0, 0.0, MAX_STEPS + 1, 0, 0.2, 4).is_err());
    }
}
