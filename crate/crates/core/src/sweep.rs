//! One- and two-dimensional parameter sweeps.
//!
//! Each grid point is an independent steady-state solve followed by the
//! hub–leaf `(0, 1)` and leaf–leaf `(1, 2)` pair measures. Points run on a
//! rayon pool; rows always come back in grid order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lindblad::{build_liouvillian, solve_steady_state, NetworkConfig, SolverOptions};
use crate::measures::{pair_report, DEFAULT_GRID_SIZE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Coupling,
    Detuning,
    HubGain,
    LeafGain,
    HubDamp,
    LeafDamp,
    /// Sets every gain to `r` times the damping of the same site.
    GainRatio,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 7] = [
        Self::Coupling,
        Self::Detuning,
        Self::HubGain,
        Self::LeafGain,
        Self::HubDamp,
        Self::LeafDamp,
        Self::GainRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Coupling => "coupling",
            Self::Detuning => "detuning",
            Self::HubGain => "hub_gain",
            Self::LeafGain => "leaf_gain",
            Self::HubDamp => "hub_damp",
            Self::LeafDamp => "leaf_damp",
            Self::GainRatio => "gain_ratio",
        }
    }

    fn is_nonnegative(self) -> bool {
        self != Self::Detuning
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &NetworkConfig, value: f64) -> NetworkConfig {
        let mut c = *base;
        match self {
            Self::Coupling => c.coupling = value,
            Self::Detuning => c.delta = value,
            Self::HubGain => c.hub_gain = value,
            Self::LeafGain => c.leaf_gain = value,
            Self::HubDamp => c.hub_damp = value,
            Self::LeafDamp => c.leaf_damp = value,
            Self::GainRatio => {
                c.hub_gain = value * c.hub_damp;
                c.leaf_gain = value * c.leaf_damp;
            }
        }
        c
    }

    /// Whether sweeping both parameters would make the result depend on
    /// the order in which they are applied.
    fn conflicts_with(self, other: SweepParameter) -> bool {
        if self == other {
            return true;
        }
        let rate = |p: SweepParameter| {
            matches!(p, Self::HubGain | Self::LeafGain | Self::HubDamp | Self::LeafDamp)
        };
        (self == Self::GainRatio && rate(other)) || (other == Self::GainRatio && rate(self))
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidAxis(format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Result<Self> {
        let axis = Self { parameter, values };
        axis.validate()?;
        Ok(axis)
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, count: usize) -> Result<Self> {
        let values = match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => {
                let step = (stop - start) / (count - 1) as f64;
                (0..count)
                    .map(|k| if k + 1 == count { stop } else { start + step * k as f64 })
                    .collect()
            }
        };
        Self::new(parameter, values)
    }

    pub fn validate(&self) -> Result<()> {
        let name = self.parameter.name();
        if self.values.is_empty() {
            return Err(Error::InvalidAxis(format!("`{name}` axis has no values")));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidAxis(format!("`{name}` axis contains {v}")));
        }
        if self.parameter.is_nonnegative() {
            if let Some(v) = self.values.iter().find(|&&v| v < 0.0) {
                return Err(Error::InvalidAxis(format!("`{name}` axis contains negative value {v}")));
            }
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidAxis(format!("`{name}` axis values are not strictly monotonic")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub grid_size: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// When set to `κ`, every point uses `V = κ (γ₀ᵍ + γ₀ᵈ)` after the axis
    /// overrides, so the coupling tracks the hub's total rate.
    pub coupling_per_total_rate: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            grid_size: DEFAULT_GRID_SIZE,
            workers: None,
            coupling_per_total_rate: None,
        }
    }
}

impl SweepOptions {
    /// The configuration actually solved at a grid point.
    pub fn point_config(&self, base: &NetworkConfig, point: &[(SweepParameter, f64)]) -> NetworkConfig {
        let mut config = point.iter().fold(*base, |c, &(p, v)| p.apply(&c, v));
        if let Some(kappa) = self.coupling_per_total_rate {
            config.coupling = kappa * (config.hub_gain + config.hub_damp);
        }
        config
    }
}

/// Measures at one parameter point. Leaf–leaf entries are `None` for
/// networks with a single leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMeasures {
    pub s01: f64,
    pub s12: Option<f64>,
    pub abs_c1_01: f64,
    pub abs_c2_01: f64,
    pub abs_c1_12: Option<f64>,
    pub abs_c2_12: Option<f64>,
    pub residual: f64,
}

/// Solve one configuration and evaluate both pair measures.
pub fn evaluate_point(config: &NetworkConfig, opts: &SweepOptions) -> Result<PointMeasures> {
    if config.n_leaves == 0 {
        return Err(Error::InvalidConfig { field: "n_leaves", reason: "pair measures need at least one leaf".into() });
    }
    let l = build_liouvillian(config)?;
    let steady = solve_steady_state(&l, &opts.solver)?;
    let hub_leaf = pair_report(&steady.rho, 0, 1, opts.grid_size)?;
    let leaf_leaf =
        if config.n_leaves >= 2 { Some(pair_report(&steady.rho, 1, 2, opts.grid_size)?) } else { None };
    Ok(PointMeasures {
        s01: hub_leaf.measure.value,
        s12: leaf_leaf.as_ref().map(|r| r.measure.value),
        abs_c1_01: hub_leaf.correlators.c1.norm(),
        abs_c2_01: hub_leaf.correlators.c2.norm(),
        abs_c1_12: leaf_leaf.as_ref().map(|r| r.correlators.c1.norm()),
        abs_c2_12: leaf_leaf.as_ref().map(|r| r.correlators.c2.norm()),
        residual: steady.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    /// `None` when the point failed; see `error`.
    pub measures: Option<PointMeasures>,
    pub solve_seconds: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.measures.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub base: NetworkConfig,
    pub axes: Vec<SweepAxis>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    /// Rows of a 2D table sharing the `index`-th value of the first axis.
    pub fn slice_first(&self, index: usize) -> &[SweepRow] {
        let inner = self.axes.get(1).map_or(1, SweepAxis::len);
        &self.rows[index * inner..(index + 1) * inner]
    }
}

fn run_point(base: &NetworkConfig, point: &[(SweepParameter, f64)], opts: &SweepOptions) -> SweepRow {
    let config = opts.point_config(base, point);
    let start = Instant::now();
    let outcome = evaluate_point(&config, opts);
    let solve_seconds = start.elapsed().as_secs_f64();
    let (measures, error) = match outcome {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRow { axis1: point[0].1, axis2: point.get(1).map(|p| p.1), measures, solve_seconds, error }
}

fn run_grid(base: &NetworkConfig, axes: Vec<SweepAxis>, opts: &SweepOptions) -> Result<SweepTable> {
    for axis in &axes {
        axis.validate()?;
    }
    if let Some(kappa) = opts.coupling_per_total_rate {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "coupling_per_total_rate",
                reason: format!("must be finite and nonnegative, got {kappa}"),
            });
        }
        if axes.iter().any(|a| a.parameter == SweepParameter::Coupling) {
            return Err(Error::InvalidAxis("a coupling axis cannot be combined with a coupling rule".into()));
        }
    }
    if opts.workers == Some(0) {
        return Err(Error::InvalidConfig { field: "workers", reason: "must be at least 1".into() });
    }
    let points: Vec<Vec<(SweepParameter, f64)>> = match axes.as_slice() {
        [a] => a.values.iter().map(|&v| vec![(a.parameter, v)]).collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|&va| b.values.iter().map(move |&vb| vec![(a.parameter, va), (b.parameter, vb)]))
            .collect(),
        _ => unreachable!("sweeps have one or two axes"),
    };
    let run = || points.par_iter().map(|p| run_point(base, p, opts)).collect::<Vec<_>>();
    let rows = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig { field: "workers", reason: e.to_string() })?
            .install(run),
        None => run(),
    };
    Ok(SweepTable { base: *base, axes, rows })
}

pub fn sweep_1d(base: &NetworkConfig, axis: &SweepAxis, opts: &SweepOptions) -> Result<SweepTable> {
    run_grid(base, vec![axis.clone()], opts)
}

/// Row-major grid: the second axis varies fastest.
pub fn sweep_2d(
    base: &NetworkConfig,
    axis_a: &SweepAxis,
    axis_b: &SweepAxis,
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if axis_a.parameter.conflicts_with(axis_b.parameter) {
        return Err(Error::InvalidAxis(format!(
            "cannot sweep `{}` against `{}`",
            axis_a.parameter, axis_b.parameter
        )));
    }
    run_grid(base, vec![axis_a.clone(), axis_b.clone()], opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> NetworkConfig {
        NetworkConfig { n_leaves: 2, delta: 0.0, coupling: 0.1, hub_gain: 0.1, hub_damp: 1.0, leaf_gain: 0.1, leaf_damp: 1.0 }
    }

    fn opts(workers: Option<usize>) -> SweepOptions {
        SweepOptions { grid_size: 256, workers, ..SweepOptions::default() }
    }

    fn measures_only(t: &SweepTable) -> Vec<(f64, Option<f64>, Option<PointMeasures>)> {
        t.rows.iter().map(|r| (r.axis1, r.axis2, r.measures)).collect()
    }

    #[test]
    fn axis_validation() {
        assert!(SweepAxis::new(SweepParameter::Coupling, vec![]).is_err());
        assert!(SweepAxis::new(SweepParameter::Coupling, vec![0.1, 0.1]).is_err());
        assert!(SweepAxis::new(SweepParameter::Coupling, vec![0.1, 0.3, 0.2]).is_err());
        assert!(SweepAxis::new(SweepParameter::HubGain, vec![-0.1, 0.2]).is_err());
        assert!(SweepAxis::new(SweepParameter::Detuning, vec![-1.0, 0.0, 1.0]).is_ok());
        assert!(SweepAxis::new(SweepParameter::Detuning, vec![1.0, 0.0]).is_ok());
        let axis = SweepAxis::linspace(SweepParameter::Coupling, 0.01, 0.3, 10).unwrap();
        assert_eq!(axis.values.len(), 10);
        assert_eq!(axis.values[9], 0.3);
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in SweepParameter::ALL {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
        assert!("gamma".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn gain_ratio_scales_both_gains() {
        let c = SweepParameter::GainRatio.apply(&NetworkConfig { hub_damp: 2.0, ..base() }, 0.5);
        assert_eq!((c.hub_gain, c.leaf_gain), (1.0, 0.5));
    }

    #[test]
    fn coupling_rule_tracks_the_hub_rates() {
        let o = SweepOptions { coupling_per_total_rate: Some(0.05), ..opts(Some(1)) };
        let c = o.point_config(&base(), &[(SweepParameter::GainRatio, 1.0)]);
        assert!((c.coupling - 0.1).abs() < 1e-15);
        let axis = SweepAxis::new(SweepParameter::Coupling, vec![0.1]).unwrap();
        assert!(matches!(sweep_1d(&base(), &axis, &o), Err(Error::InvalidAxis(_))));
    }

    #[test]
    fn conflicting_axes_are_rejected() {
        let a = SweepAxis::new(SweepParameter::GainRatio, vec![0.1, 1.0]).unwrap();
        let b = SweepAxis::new(SweepParameter::HubGain, vec![0.1, 1.0]).unwrap();
        assert!(matches!(sweep_2d(&base(), &a, &b, &opts(Some(1))), Err(Error::InvalidAxis(_))));
        assert!(matches!(sweep_2d(&base(), &a, &a, &opts(Some(1))), Err(Error::InvalidAxis(_))));
    }

    #[test]
    fn zero_coupling_row_is_exactly_unsynchronized() {
        let axis = SweepAxis::new(SweepParameter::Coupling, vec![0.0, 0.1]).unwrap();
        let table = sweep_1d(&base(), &axis, &opts(Some(1))).unwrap();
        let first = table.rows[0].measures.unwrap();
        assert!(first.s01 < 1e-12 && first.s12.unwrap() < 1e-12);
        assert!(table.rows[1].measures.unwrap().s12.unwrap() > 0.0);
    }

    #[test]
    fn single_point_grid_matches_direct_evaluation() {
        let a = SweepAxis::new(SweepParameter::Coupling, vec![0.15]).unwrap();
        let b = SweepAxis::new(SweepParameter::Detuning, vec![0.5]).unwrap();
        let table = sweep_2d(&base(), &a, &b, &opts(Some(1))).unwrap();
        assert_eq!(table.rows.len(), 1);
        let cfg = NetworkConfig { coupling: 0.15, delta: 0.5, ..base() };
        assert_eq!(table.rows[0].measures.unwrap(), evaluate_point(&cfg, &opts(None)).unwrap());
    }

    #[test]
    fn parallel_and_repeated_sweeps_are_identical() {
        let a = SweepAxis::new(SweepParameter::Detuning, vec![0.0, 1.0, 2.0]).unwrap();
        let b = SweepAxis::new(SweepParameter::Coupling, vec![0.05, 0.2]).unwrap();
        let seq = sweep_2d(&base(), &a, &b, &opts(Some(1))).unwrap();
        let par = sweep_2d(&base(), &a, &b, &opts(Some(3))).unwrap();
        let again = sweep_2d(&base(), &a, &b, &opts(Some(3))).unwrap();
        assert_eq!(measures_only(&seq), measures_only(&par));
        assert_eq!(measures_only(&par), measures_only(&again));
        assert_eq!(seq.rows.len(), 6);
        assert_eq!((seq.rows[1].axis1, seq.rows[1].axis2), (0.0, Some(0.2)));
        assert_eq!(seq.slice_first(2)[0].axis1, 2.0);
    }

    #[test]
    fn failed_points_are_recorded_without_aborting() {
        let base = NetworkConfig { hub_gain: 0.0, ..base() };
        let axis = SweepAxis::new(SweepParameter::HubDamp, vec![0.0, 1.0]).unwrap();
        let table = sweep_1d(&base, &axis, &opts(Some(1))).unwrap();
        assert!(table.rows[0].failed());
        assert!(table.rows[0].error.as_deref().unwrap().contains("hub_gain"));
        assert!(!table.rows[1].failed());
        assert_eq!(table.failures(), 1);
    }

    #[test]
    fn single_leaf_networks_have_no_leaf_pair() {
        let cfg = NetworkConfig { n_leaves: 1, ..base() };
        let m = evaluate_point(&cfg, &opts(None)).unwrap();
        assert!(m.s12.is_none() && m.abs_c1_12.is_none());
    }
}
