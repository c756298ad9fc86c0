//! The overlap measure `eta`, its coalescence bound, parameter sweeps,
//! numerical differentiation, and jump detection.
//!
//! `eta` is computed from the Gram matrix G of the unit-normalized right
//! eigenvectors as (||G||_F^2 - N) / (N (N - 1)), which equals the mean
//! squared pairwise overlap. It is 0 for an orthogonal eigenbasis and 1
//! when all eigenvectors coalesce.

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::spectral::{eig_auto, spectrum_summary, EigenSystem, SpectrumSummary};
use rayon::prelude::*;
use serde::Serialize;

/// Relative tolerance used by sweeps when classifying a spectrum as real.
pub const REAL_TOL: f64 = 1e-10;

/// Roundoff clamp: excursions of eta beyond [0, 1] by more than this are
/// reported as internal errors instead of being clamped.
const ETA_SLACK: f64 = 1e-12;

/// Mean squared pairwise overlap of the normalized right eigenvectors.
pub fn eta(es: &EigenSystem) -> Result<f64> {
    if es.dim < 2 {
        return Err(Error::InvalidInput(format!(
            "eta needs at least 2 states, got {}",
            es.dim
        )));
    }
    let n = es.dim as f64;
    let conj = es.right.mapv(|z| z.conj());
    let gram = conj.t().dot(&es.right);
    let frob_sq: f64 = gram.iter().map(|z| z.norm_sqr()).sum();
    let value = (frob_sq - n) / (n * (n - 1.0));
    if !(-ETA_SLACK..=1.0 + ETA_SLACK).contains(&value) {
        return Err(Error::Inconsistent(format!(
            "eta = {value} outside [0, 1] beyond roundoff"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Closed form for the two-level model: (1 - |gamma|)^2 / (1 + |gamma|)^2.
pub fn eta_two_level_analytic(gamma: f64) -> f64 {
    let a = gamma.abs();
    ((1.0 - a) / (1.0 + a)).powi(2)
}

/// Jordan block sizes of a (hypothetical) defective matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanProfile {
    pub blocks: Vec<usize>,
}

impl JordanProfile {
    pub fn new(blocks: Vec<usize>) -> Result<JordanProfile> {
        if blocks.contains(&0) {
            return Err(Error::InvalidInput("block sizes must be >= 1".into()));
        }
        let profile = JordanProfile { blocks };
        if profile.total_dim() < 2 {
            return Err(Error::InvalidInput("total dimension must be >= 2".into()));
        }
        Ok(profile)
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }
}

/// Upper bound of eta for a given exceptional-point configuration:
/// sum_n d_n (d_n - 1) / (N (N - 1)).
pub fn eta_bound(profile: &JordanProfile) -> f64 {
    let n = profile.total_dim() as f64;
    let coalesced: f64 = profile.blocks.iter().map(|&d| (d * (d - 1)) as f64).sum();
    coalesced / (n * (n - 1.0))
}

/// Detector flags attached to one sweep sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JumpFlags {
    pub eta_jump: bool,
    pub deta_jump: bool,
}

/// One point of a parameter sweep.
#[derive(Debug, Clone)]
pub struct EtaSample {
    pub param: f64,
    pub eta: f64,
    pub spectrum: SpectrumSummary,
    pub flags: JumpFlags,
}

/// Ordered sweep samples plus the central-difference derivative.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub model: ModelSpec,
    pub axis: String,
    pub samples: Vec<EtaSample>,
    pub deta: Vec<f64>,
}

/// Which series a discontinuity was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    Eta,
    Deta,
}

/// Jump-detector settings; `floor` is an absolute threshold below which
/// nothing is flagged.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetectorParams {
    pub w: usize,
    pub kappa: f64,
    pub floor: f64,
}

impl DetectorParams {
    /// Defaults for the eta series. The floor sits above per-pair
    /// eigensolver noise (order 1/N^2 of coalescing pairs at N ~ a few
    /// hundred sites); the factor is low enough to catch an edge-transition
    /// step riding on a smoothly varying background.
    pub fn eta_default() -> DetectorParams {
        DetectorParams {
            w: 10,
            kappa: 4.0,
            floor: 2e-5,
        }
    }

    /// Defaults for a derivative series: the floor scales with the series.
    pub fn deta_default(deta: &[f64]) -> DetectorParams {
        let max_abs = deta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        DetectorParams {
            w: 10,
            kappa: 5.0,
            floor: 1e-2 * max_abs,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JumpLocation {
    pub param_left: f64,
    pub param_right: f64,
    pub jump_magnitude: f64,
}

/// Detected jump locations plus the detector settings that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct DiscontinuityReport {
    pub kind: JumpKind,
    pub locations: Vec<JumpLocation>,
    pub detector: DetectorParams,
}

/// Uniform-grid sweep: build -> eigendecompose -> eta at each of `steps` points
/// covering [lo, hi] inclusive. Grid points evaluate in parallel;
/// aggregation is by grid index, so results are deterministic.
pub fn sweep(
    model: &ModelSpec,
    axis: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<SweepResult> {
    if steps < 3 {
        return Err(Error::InvalidInput(format!("steps = {steps}, need >= 3")));
    }
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidInput(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    // Validate the axis once up front.
    model.with_param(axis, lo)?;
    let h = (hi - lo) / (steps - 1) as f64;
    let grid: Vec<f64> = (0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + i as f64 * h })
        .collect();
    let samples: Vec<EtaSample> = grid
        .par_iter()
        .map(|&x| -> Result<EtaSample> {
            let evaluate = || -> Result<EtaSample> {
                let point = model.with_param(axis, x)?.build()?;
                let es = eig_auto(&point)?;
                let value = eta(&es)?;
                Ok(EtaSample {
                    param: x,
                    eta: value,
                    spectrum: spectrum_summary(&es, REAL_TOL),
                    flags: JumpFlags::default(),
                })
            };
            evaluate().map_err(|e| e.at_grid_point(x))
        })
        .collect::<Result<Vec<_>>>()?;
    let eta_series: Vec<f64> = samples.iter().map(|s| s.eta).collect();
    let deta = derivative(&eta_series, &grid)?;
    Ok(SweepResult {
        model: model.clone(),
        axis: axis.to_string(),
        samples,
        deta,
    })
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.param).collect()
    }

    pub fn eta_series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.eta).collect()
    }

    /// Run the jump detector on both series, mark sample flags (on the left
    /// endpoint of each reported interval), and return both reports.
    pub fn detect(
        &mut self,
        eta_params: DetectorParams,
        deta_params: Option<DetectorParams>,
    ) -> Result<(DiscontinuityReport, DiscontinuityReport)> {
        let grid = self.grid();
        let eta_series = self.eta_series();
        let deta_params = deta_params.unwrap_or_else(|| DetectorParams::deta_default(&self.deta));
        let eta_report =
            detect_discontinuities(&eta_series, &grid, eta_params, JumpKind::Eta)?;
        let deta_report =
            detect_discontinuities(&self.deta, &grid, deta_params, JumpKind::Deta)?;
        for s in &mut self.samples {
            s.flags = JumpFlags::default();
        }
        for loc in &eta_report.locations {
            if let Some(i) = grid.iter().position(|&p| p == loc.param_left) {
                self.samples[i].flags.eta_jump = true;
            }
        }
        for loc in &deta_report.locations {
            if let Some(i) = grid.iter().position(|&p| p == loc.param_left) {
                self.samples[i].flags.deta_jump = true;
            }
        }
        Ok((eta_report, deta_report))
    }

    /// Grid point of the largest eta, ties broken toward the smaller
    /// parameter value.
    pub fn eta_argmax(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for s in &self.samples {
            if s.eta > best.0 {
                best = (s.eta, s.param);
            }
        }
        best.1
    }

    /// Grid point of the smallest eta, ties broken toward the smaller
    /// parameter value.
    pub fn eta_argmin(&self) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for s in &self.samples {
            if s.eta < best.0 {
                best = (s.eta, s.param);
            }
        }
        best.1
    }
}

/// Second-order finite differences on a uniform grid: central in the
/// interior, one-sided at the ends.
pub fn derivative(series: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 3 || grid.len() != n {
        return Err(Error::InvalidInput(
            "derivative needs >= 3 samples and a matching grid".into(),
        ));
    }
    let h = grid[1] - grid[0];
    if h <= 0.0 {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let span = grid[n - 1] - grid[0];
    for i in 1..n {
        let step = grid[i] - grid[i - 1];
        if (step - h).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "non-uniform grid at index {i}: step {step} vs {h}"
            )));
        }
    }
    let mut out = Vec::with_capacity(n);
    out.push((series[1] - series[0]) / h);
    for i in 1..n - 1 {
        out.push((series[i + 1] - series[i - 1]) / (2.0 * h));
    }
    out.push((series[n - 1] - series[n - 2]) / h);
    Ok(out)
}

/// Flag grid interval i when |series[i+1] - series[i]| exceeds
/// max(floor, kappa * median of neighboring interval deltas), using a
/// window of `w` intervals on each side (the interval itself excluded).
/// Adjacent flagged intervals merge into one location reported at the
/// largest jump.
pub fn detect_discontinuities(
    series: &[f64],
    grid: &[f64],
    params: DetectorParams,
    kind: JumpKind,
) -> Result<DiscontinuityReport> {
    let n = series.len();
    if grid.len() != n {
        return Err(Error::InvalidInput("series/grid length mismatch".into()));
    }
    if n < 2 * params.w + 2 {
        return Err(Error::InvalidInput(format!(
            "series of length {n} too short for window w = {}",
            params.w
        )));
    }
    let deltas: Vec<f64> = series.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let m = deltas.len();
    let mut flagged = vec![false; m];
    let mut scratch: Vec<f64> = Vec::with_capacity(2 * params.w);
    for i in 0..m {
        scratch.clear();
        let lo = i.saturating_sub(params.w);
        let hi = (i + params.w + 1).min(m);
        for (j, &d) in deltas[lo..hi].iter().enumerate() {
            if lo + j != i {
                scratch.push(d);
            }
        }
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if scratch.is_empty() {
            0.0
        } else if scratch.len() % 2 == 1 {
            scratch[scratch.len() / 2]
        } else {
            0.5 * (scratch[scratch.len() / 2 - 1] + scratch[scratch.len() / 2])
        };
        flagged[i] = deltas[i] > params.floor.max(params.kappa * median);
    }
    // Merge runs of adjacent flagged intervals.
    let mut locations = Vec::new();
    let mut i = 0;
    while i < m {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < m && flagged[i] {
            i += 1;
        }
        let best = (start..i)
            .max_by(|&a, &b| deltas[a].partial_cmp(&deltas[b]).unwrap())
            .unwrap();
        locations.push(JumpLocation {
            param_left: grid[best],
            param_right: grid[best + 1],
            jump_magnitude: deltas[best],
        });
    }
    Ok(DiscontinuityReport {
        kind,
        locations,
        detector: params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_two_level, Boundary, ModelSpec};
    use crate::spectral::eig_right;

    #[test]
    fn eta_hermitian_is_zero() {
        let h =
            crate::models::build_nonreciprocal_ssh(0.7, 1.0, 0.0, 6, Boundary::Open).unwrap();
        let es = eig_right(&h).unwrap();
        assert!(eta(&es).unwrap() < 1e-10);
    }

    #[test]
    fn eta_at_ep_is_one() {
        let h = build_two_level(0.0).unwrap();
        let es = eig_right(&h).unwrap();
        assert!((eta(&es).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn eta_matches_analytic_form() {
        let h = build_two_level(0.25).unwrap();
        let es = eig_right(&h).unwrap();
        assert!((eta(&es).unwrap() - 0.36).abs() < 1e-10);
        assert!((eta_two_level_analytic(0.25) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn analytic_form_cases() {
        assert_eq!(eta_two_level_analytic(1.0), 0.0);
        assert_eq!(eta_two_level_analytic(-1.0), 0.0);
        assert!((eta_two_level_analytic(4.0) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn eta_rejects_single_state() {
        let es = crate::spectral::eig_right_matrix(
            &ndarray::Array2::from_elem((1, 1), crate::C64::new(1.0, 0.0)),
        )
        .unwrap();
        assert!(eta(&es).is_err());
    }

    #[test]
    fn bound_cases() {
        assert_eq!(eta_bound(&JordanProfile::new(vec![5]).unwrap()), 1.0);
        assert_eq!(eta_bound(&JordanProfile::new(vec![1; 7]).unwrap()), 0.0);
        let b = eta_bound(&JordanProfile::new(vec![2, 2]).unwrap());
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
        assert!(JordanProfile::new(vec![1]).is_err());
        assert!(JordanProfile::new(vec![0, 3]).is_err());
    }

    #[test]
    fn sweep_two_level_matches_analytic() {
        let spec = ModelSpec::TwoLevel { gamma: 1.0 };
        let sw = sweep(&spec, "gamma", 0.5, 1.5, 101).unwrap();
        for s in &sw.samples {
            assert!((s.eta - eta_two_level_analytic(s.param)).abs() < 1e-10);
        }
        assert_eq!(sw.samples.len(), 101);
        assert_eq!(sw.deta.len(), 101);
    }

    #[test]
    fn sweep_validates_input() {
        let spec = ModelSpec::TwoLevel { gamma: 1.0 };
        assert!(sweep(&spec, "gamma", 0.5, 1.5, 2).is_err());
        assert!(sweep(&spec, "gamma", 1.5, 0.5, 10).is_err());
        assert!(sweep(&spec, "nope", 0.5, 1.5, 10).is_err());
    }

    #[test]
    fn derivative_constant_is_zero() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let series = vec![0.7; 50];
        let d = derivative(&series, &grid).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn derivative_interior_accuracy() {
        // analytic d eta / d gamma = -4 (1 - gamma) / (1 + gamma)^3
        let h = 1e-3;
        let grid: Vec<f64> = (0..3).map(|i| 0.5 + (i as f64 - 1.0) * h).collect();
        let series: Vec<f64> = grid.iter().map(|&g| eta_two_level_analytic(g)).collect();
        let d = derivative(&series, &grid).unwrap();
        let expect = -4.0 * (1.0 - 0.5) / (1.5f64).powi(3);
        assert!((d[1] - expect).abs() < 1e-4, "{} vs {}", d[1], expect);
        assert!((expect + 0.59259).abs() < 1e-4);
    }

    #[test]
    fn derivative_rejects_non_uniform() {
        let grid = vec![0.0, 1.0, 3.0];
        let series = vec![0.0, 1.0, 2.0];
        assert!(derivative(&series, &grid).is_err());
    }

    #[test]
    fn detector_step_series() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let series: Vec<f64> = (0..100).map(|i| if i < 50 { 0.0 } else { 1.0 }).collect();
        let report = detect_discontinuities(
            &series,
            &grid,
            DetectorParams::eta_default(),
            JumpKind::Eta,
        )
        .unwrap();
        assert_eq!(report.locations.len(), 1);
        assert_eq!(report.locations[0].param_left, 49.0);
        assert_eq!(report.locations[0].param_right, 50.0);
        assert_eq!(report.locations[0].jump_magnitude, 1.0);
    }

    #[test]
    fn detector_smooth_series_clean() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.03).collect();
        let series: Vec<f64> = grid.iter().map(|&x| x.sin()).collect();
        let report = detect_discontinuities(
            &series,
            &grid,
            DetectorParams::eta_default(),
            JumpKind::Eta,
        )
        .unwrap();
        assert!(report.locations.is_empty());
    }

    #[test]
    fn detector_rejects_short_series() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let series = vec![0.0; 10];
        assert!(detect_discontinuities(
            &series,
            &grid,
            DetectorParams::eta_default(),
            JumpKind::Eta
        )
        .is_err());
    }
}
