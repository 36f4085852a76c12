//! Built-in figure configurations.

use uwoc_core::metrics::{DetectionKind, ModulationScheme};
use uwoc_core::reference as r;
use uwoc_core::turbulence::{FogChannel, LayerModel};

use crate::config::{
    LinkBudget, Metric, OutputConfig, OutputFormat, PlanConfig, Pointing, RunConfig, Scenario, Sweep, TowcHop, UwocHop,
    Variant,
};

pub const PRESET_NAMES: [&str; 8] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b"];

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_210_611;
pub const DEFAULT_WORKERS: usize = 4;

const TURBULENCE: [&str; 3] = ["weak", "moderate", "strong"];
const FOG: [&str; 2] = ["light_fog", "moderate_fog"];

fn pointing(rho2: f64) -> Pointing {
    Pointing {
        rho2,
        a0: r::POINTING_A0,
    }
}

fn variant(label: impl Into<String>, layers: Vec<LayerModel>, rho2: f64) -> Variant {
    Variant {
        label: label.into(),
        uwoc: UwocHop {
            pointing: pointing(rho2),
            layers,
        },
        towc: None,
    }
}

fn mixed_variant(turbulence: usize, fog: usize, rho2: f64) -> Variant {
    let (alpha, beta) = r::MALAGA[turbulence];
    let (k, beta_f) = r::FOG[fog];
    let z = FogChannel::from_attenuation(k, beta_f, r::TOWC_LENGTH_M).z;
    let mut v = variant(format!("{}_{}_rho2_{rho2}", TURBULENCE[turbulence], FOG[fog]), r::egg_layers(), rho2);
    v.towc = Some(TowcHop {
        alpha,
        beta,
        fog_k: k,
        fog_z: z,
        pointing: pointing(rho2),
    });
    v
}

fn singles(rho2: f64) -> Vec<Variant> {
    r::single_layers()
        .into_iter()
        .map(|(name, l)| variant(name, vec![l], rho2))
        .collect()
}

fn base(name: &str, scenario: Scenario, metric: Metric, variants: Vec<Variant>) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        scenario,
        metrics: vec![metric],
        gamma_th_db: 0.0,
        modulation: ModulationScheme::ook(),
        detection: DetectionKind::ImDd,
        power_sweep: None,
        snr_sweep: None,
        link: LinkBudget {
            noise_variance: r::NOISE_VARIANCE,
            extinction: r::EXTINCTION,
            uwoc_length_m: r::UWOC_LENGTH_M,
            towc_length_m: r::TOWC_LENGTH_M,
            relay_gain: r::RELAY_GAIN,
        },
        plan: PlanConfig {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            workers: DEFAULT_WORKERS,
        },
        output: OutputConfig {
            dir: format!("out/{name}"),
            format: OutputFormat::Csv,
        },
        variants,
    }
}

fn snr(mut c: RunConfig, start: f64, stop: f64, step: f64) -> RunConfig {
    c.snr_sweep = Some(Sweep { start, stop, step });
    c
}

fn power(mut c: RunConfig, start: f64, stop: f64, step: f64) -> RunConfig {
    c.power_sweep = Some(Sweep { start, stop, step });
    c
}

/// Multi-layer GG curves: baseline, milder first layer, milder with weaker
/// pointing jitter.
fn gg_family(rho2_last: f64) -> Vec<Variant> {
    vec![
        variant("gg_rho2_1", r::gg_layers(), 1.0),
        variant("gg_mild_rho2_1", r::gg_layers_mild(), 1.0),
        variant(format!("gg_mild_rho2_{rho2_last}"), r::gg_layers_mild(), rho2_last),
    ]
}

pub fn preset(name: &str) -> Option<RunConfig> {
    use Metric::*;
    use Scenario::*;
    let c = match name {
        "fig2a" => snr(base(name, Uwoc, Outage, singles(1.0)), 40.0, 100.0, 5.0),
        "fig2b" => snr(base(name, Uwoc, Outage, gg_family(6.0)), 40.0, 120.0, 5.0),
        "fig3a" => snr(base(name, Uwoc, Ber, singles(1.0)), 40.0, 100.0, 5.0),
        "fig3b" => snr(
            base(
                name,
                Uwoc,
                Ber,
                vec![
                    variant("gg_rho2_6", r::gg_layers(), 6.0),
                    variant("gg_mild_rho2_6", r::gg_layers_mild(), 6.0),
                ],
            ),
            40.0,
            120.0,
            5.0,
        ),
        "fig4a" => power(base(name, Uwoc, Capacity, singles(1.0)), 0.0, 40.0, 2.0),
        "fig4b" => power(
            base(
                name,
                Uwoc,
                Capacity,
                vec![
                    variant("gg_rho2_1", r::gg_layers(), 1.0),
                    variant("gg_layer3_rho2_1", r::gg_layers_capacity_variant(), 1.0),
                    variant("gg_rho2_6", r::gg_layers(), 6.0),
                ],
            ),
            0.0,
            40.0,
            2.0,
        ),
        "fig5a" => power(
            base(
                name,
                Mixed,
                Outage,
                vec![
                    mixed_variant(0, 0, 1.0),
                    mixed_variant(0, 0, 6.0),
                    mixed_variant(1, 1, 1.0),
                    mixed_variant(1, 1, 6.0),
                ],
            ),
            10.0,
            70.0,
            5.0,
        ),
        "fig5b" => {
            let vs = (0..2)
                .flat_map(|fog| (0..3).map(move |t| mixed_variant(t, fog, 6.0)))
                .collect();
            power(base(name, Mixed, Ber, vs), 10.0, 70.0, 5.0)
        }
        _ => return None,
    };
    Some(c)
}

pub fn all_presets() -> Vec<RunConfig> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("known preset")).collect()
}
