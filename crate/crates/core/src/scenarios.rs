//! Built-in named scenarios.
//!
//! Vacuum scenarios use a detuned qubit (ω = π) so the coherences visibly
//! rotate; the single-photon and cat scenarios drive the qubit on resonance
//! (ω = 0). All use γ = 1, dt = 1e-3, 50 trajectories and a fixed seed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::{
    BranchConfig, EnsembleConfig, InputConfig, InputType, ScenarioConfig, SegmentConfig, SystemConfig,
    WavepacketConfig, CONFIG_VERSION,
};
use crate::engine::IntegratorConfig;
use crate::ensemble::Scenario;
use crate::filter::Detection;

pub const DEFAULT_SEED: u64 = 20_240_901;
pub const FIGURE_TRAJECTORIES: usize = 50;
/// Pulse of the cat inputs: amplitude 1 on [0, 5).
pub const CAT_PULSE: (f64, f64) = (0.0, 5.0);
/// Window where the cat-driven state sits on its plateau.
pub const CAT_PLATEAU: (f64, f64) = (3.0, 5.0);
pub const PHOTON_BANDWIDTH: f64 = 1.5;
pub const PHOTON_CENTER: f64 = 3.0;

pub const NAMES: [&str; 6] = [
    "fig2_vacuum_hd",
    "fig3_vacuum_pd",
    "fig4_single_photon_hd",
    "fig4_single_photon_pd",
    "fig5_cat_hd",
    "fig6_cat_pd",
];

fn base(omega: f64, input: InputConfig, detection: Detection, initial: [f64; 3], t_final: f64) -> ScenarioConfig {
    ScenarioConfig {
        version: CONFIG_VERSION.to_string(),
        system: SystemConfig { gamma: 1.0, omega },
        input,
        detection,
        initial_bloch: initial,
        integrator: IntegratorConfig {
            dt: 1e-3,
            t_final,
            seed: DEFAULT_SEED,
            record_stride: 10,
        },
        ensemble: EnsembleConfig {
            n_trajectories: FIGURE_TRAJECTORIES,
        },
    }
}

fn vacuum() -> InputConfig {
    InputConfig {
        kind: InputType::Vacuum,
        wavepacket: None,
        branches: None,
    }
}

fn photon() -> InputConfig {
    InputConfig {
        kind: InputType::SinglePhoton,
        wavepacket: Some(WavepacketConfig {
            omega_bw: PHOTON_BANDWIDTH,
            t_center: PHOTON_CENTER,
        }),
        branches: None,
    }
}

fn cat(amplitudes: [f64; 2]) -> InputConfig {
    let branch = |a: f64| BranchConfig {
        weight_re: FRAC_1_SQRT_2,
        weight_im: 0.0,
        pulse: if a == 0.0 {
            Vec::new()
        } else {
            vec![SegmentConfig {
                t0: CAT_PULSE.0,
                t1: CAT_PULSE.1,
                re: a,
                im: 0.0,
            }]
        },
    };
    InputConfig {
        kind: InputType::Cat,
        wavepacket: None,
        branches: Some(amplitudes.iter().map(|&a| branch(a)).collect()),
    }
}

pub fn builtin_config(name: &str) -> Option<ScenarioConfig> {
    const EQUATOR: [f64; 3] = [1.0, 0.0, 0.0];
    const EXCITED: [f64; 3] = [0.0, 0.0, 1.0];
    const GROUND: [f64; 3] = [0.0, 0.0, -1.0];
    Some(match name {
        "fig2_vacuum_hd" => base(PI, vacuum(), Detection::Homodyne, EQUATOR, 10.0),
        "fig3_vacuum_pd" => base(PI, vacuum(), Detection::PhotonCounting, EXCITED, 10.0),
        "fig4_single_photon_hd" => base(0.0, photon(), Detection::Homodyne, GROUND, 15.0),
        "fig4_single_photon_pd" => base(0.0, photon(), Detection::PhotonCounting, GROUND, 15.0),
        "fig5_cat_hd" => base(0.0, cat([1.0, -1.0]), Detection::Homodyne, GROUND, 15.0),
        "fig6_cat_pd" => base(0.0, cat([0.0, -1.0]), Detection::PhotonCounting, GROUND, 15.0),
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_config(name).map(|c| c.to_scenario(name).expect("built-in scenarios are valid"))
}

/// Plateau window for scenarios driven by a finite pulse.
pub fn plateau_window(name: &str) -> Option<(f64, f64)> {
    name.contains("cat").then_some(CAT_PLATEAU)
}
