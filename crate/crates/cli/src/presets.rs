//! Built-in experiments, one per figure panel id.
//!
//! Rates are in units of a reference rate that differs between presets:
//! the leaf damping `γ₁ᵈ` for the two-oscillator panels, the common damping
//! `γᵈ` (or common rate `γ`) for the star-network panels, and `γᵍ + γᵈ` for
//! the gain-ratio panels. The `fig4a`, `fig4b` and `fig6` presets are
//! interpretive: which rates are scanned is not pinned down, so each is run
//! in two scan modes (a common gain-to-damping ratio, and independent hub
//! and leaf gains).

use starsync_core::lindblad::{NetworkConfig, SolverOptions};
use starsync_core::sweep::SweepParameter;

use crate::spec::{AxisSpec, ExperimentSpec, MeasureOptions, OutputSpec, SweepSpec};

pub const PRESET_IDS: [&str; 17] = [
    "fig1b", "fig1c", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig4a", "fig4b", "fig5a",
    "fig5b", "fig5c", "fig5d", "fig5e", "fig6",
];

/// One output file of a preset.
#[derive(Debug, Clone)]
pub struct Job {
    /// File stem.
    pub name: String,
    /// `s2` or `sweep`.
    pub command: &'static str,
    pub spec: ExperimentSpec,
}

pub fn describe(id: &str) -> Option<&'static str> {
    Some(match id {
        "fig1b" => "N=1, γ₀ᵈ = γ₁ᵍ = 0.1 γ₀ᵍ = 0.1 γ₁ᵈ, V = 0.05 γ₁ᵈ: S2(φ01), single peak",
        "fig1c" => "N=1, γ₀ᵍ = γ₁ᵍ = 0.1 γ₀ᵈ = 0.1 γ₁ᵈ, V = 0.05 γ₁ᵈ: S2(φ01), two equal peaks",
        "fig2b" => "N=4, γᵍ = γᵈ: S01 and S12 against V/γᵈ in [0.01, 0.3]",
        "fig2c" => "N=4, γᵍ = γᵈ, V = 0.2 γᵈ: S2(φ01) and S2(φ12)",
        "fig3a" => "N=4, γᵍ = 0.1 γᵈ: S01 and S12 against V/γᵈ in [0.01, 0.3]",
        "fig3b" => "N=4, γᵍ = 0.1 γᵈ, V = 0.05 γᵈ: S2(φ01) and S2(φ12)",
        "fig3c" => "N=4, γᵍ = 0.1 γᵈ, V = 0.2 γᵈ: S2(φ01) and S2(φ12)",
        "fig3d" => "N=4, γᵍ = 0.1 γᵈ, V = 0.05 γᵈ: first and second harmonic of S2(φ01)",
        "fig3e" => "N=4, γᵍ = 0.1 γᵈ, V = 0.2 γᵈ: first and second harmonic of S2(φ01)",
        "fig4a" => "N=4, V = 0.05 (γᵍ + γᵈ): S01, S12 against gain rates (interpretive, two scan modes)",
        "fig4b" => "N=4, V = 0.2 (γᵍ + γᵈ): S01, S12 against gain rates (interpretive, two scan modes)",
        "fig5a" => "N=4, all rates γ: S01 over detuning Δ/γ in [0, 5] and V/γ in [0.02, 0.3]",
        "fig5b" => "N=4, all rates γ: S12 over detuning Δ/γ in [0, 5] and V/γ in [0.02, 0.3]",
        "fig5c" => "N=4, γᵍ = 0.1 γ: S01 over detuning Δ/γ in [0, 5] and V/γ in [0.02, 0.3]",
        "fig5d" => "N=4, γᵍ = 0.1 γ: S12 over detuning Δ/γ in [0, 5] and V/γ in [0.02, 0.3]",
        "fig5e" => "N=4, γᵍ = 0.1 γ, Δ = 4 γ: S01 and S12 against V/γ",
        "fig6" => "N=4, γ₀ᵈ = γ_Nᵈ = γ: S01, S12 against hub and leaf gains, Δ ∈ {0, 4}γ, V ∈ {0.05, 0.2}γ (interpretive)",
        _ => return None,
    })
}

fn network(n_leaves: usize, gain: f64, damp: f64) -> NetworkConfig {
    NetworkConfig::identical(n_leaves, gain, damp, 0.0)
}

fn spec(network: NetworkConfig) -> ExperimentSpec {
    ExperimentSpec {
        network,
        solver: SolverOptions::default(),
        measure: MeasureOptions::default(),
        sweep: None,
        output: OutputSpec::default(),
    }
}

fn s2(name: &str, network: NetworkConfig, pair: [usize; 2]) -> Job {
    let mut spec = spec(network);
    spec.measure.pair = pair;
    Job { name: name.into(), command: "s2", spec }
}

fn sweep(name: &str, network: NetworkConfig, axes: Vec<AxisSpec>, coupling_per_total_rate: Option<f64>) -> Job {
    let mut spec = spec(network);
    spec.sweep = Some(SweepSpec { axes, workers: None, coupling_per_total_rate });
    Job { name: name.into(), command: "sweep", spec }
}

fn with_coupling(mut n: NetworkConfig, v: f64) -> NetworkConfig {
    n.coupling = v;
    n
}

fn with_delta(mut n: NetworkConfig, delta: f64) -> NetworkConfig {
    n.delta = delta;
    n
}

fn pair_panels(id: &str, n: NetworkConfig) -> Vec<Job> {
    vec![s2(&format!("{id}_01"), n, [0, 1]), s2(&format!("{id}_12"), n, [1, 2])]
}

fn coupling_axis() -> AxisSpec {
    AxisSpec::linspace(SweepParameter::Coupling, 0.01, 0.3, 30)
}

fn tongue(id: &str, gain: f64) -> Vec<Job> {
    let axes = vec![
        AxisSpec::linspace(SweepParameter::Detuning, 0.0, 5.0, 6),
        AxisSpec::linspace(SweepParameter::Coupling, 0.02, 0.3, 6),
    ];
    vec![sweep(id, network(4, gain, 1.0), axes, None)]
}

fn gain_scans(id: &str, base: NetworkConfig, kappa: Option<f64>, gains: (f64, f64)) -> Vec<Job> {
    let (lo, hi) = gains;
    vec![
        sweep(&format!("{id}_ratio"), base, vec![AxisSpec::linspace(SweepParameter::GainRatio, lo, hi, 20)], kappa),
        sweep(
            &format!("{id}_hub_leaf"),
            base,
            vec![
                AxisSpec::linspace(SweepParameter::HubGain, lo, hi, 6),
                AxisSpec::linspace(SweepParameter::LeafGain, lo, hi, 6),
            ],
            kappa,
        ),
    ]
}

/// Jobs of a figure preset, or `None` for an unknown id.
pub fn preset(id: &str) -> Option<Vec<Job>> {
    let symmetric = network(4, 1.0, 1.0);
    let asymmetric = network(4, 0.1, 1.0);
    let jobs = match id {
        "fig1b" => {
            let n = NetworkConfig {
                n_leaves: 1,
                delta: 0.0,
                coupling: 0.05,
                hub_gain: 1.0,
                hub_damp: 0.1,
                leaf_gain: 0.1,
                leaf_damp: 1.0,
            };
            vec![s2("fig1b", n, [0, 1])]
        }
        "fig1c" => vec![s2("fig1c", with_coupling(network(1, 0.1, 1.0), 0.05), [0, 1])],
        "fig2b" => vec![sweep("fig2b", symmetric, vec![coupling_axis()], None)],
        "fig2c" => pair_panels("fig2c", with_coupling(symmetric, 0.2)),
        "fig3a" => vec![sweep("fig3a", asymmetric, vec![coupling_axis()], None)],
        "fig3b" => pair_panels("fig3b", with_coupling(asymmetric, 0.05)),
        "fig3c" => pair_panels("fig3c", with_coupling(asymmetric, 0.2)),
        "fig3d" => vec![s2("fig3d", with_coupling(asymmetric, 0.05), [0, 1])],
        "fig3e" => vec![s2("fig3e", with_coupling(asymmetric, 0.2), [0, 1])],
        "fig4a" => gain_scans("fig4a", symmetric, Some(0.05), (0.1, 2.0)),
        "fig4b" => gain_scans("fig4b", symmetric, Some(0.2), (0.1, 2.0)),
        "fig5a" | "fig5b" => tongue(id, 1.0),
        "fig5c" | "fig5d" => tongue(id, 0.1),
        "fig5e" => {
            let mut values = vec![0.0025, 0.005, 0.0075];
            values.extend((1..=30).map(|k| 0.01 * k as f64));
            vec![sweep("fig5e", with_delta(asymmetric, 4.0), vec![AxisSpec::values(SweepParameter::Coupling, values)], None)]
        }
        "fig6" => {
            let mut jobs = Vec::new();
            for (tag, delta) in [("d0", 0.0), ("d4", 4.0)] {
                for (vtag, v) in [("v005", 0.05), ("v02", 0.2)] {
                    let base = with_delta(with_coupling(symmetric, v), delta);
                    jobs.extend(gain_scans(&format!("fig6_{tag}_{vtag}"), base, None, (0.05, 1.0)));
                }
            }
            jobs
        }
        _ => return None,
    };
    Some(jobs)
}
