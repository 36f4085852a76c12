//! Measured parameter sets and link-budget constants used by the presets,
//! the acceptance suite and the benches.

use crate::cascade::UwocStack;
use crate::error::Result;
use crate::turbulence::{
    EGGParams, EWParams, FogChannel, GGParams, GammaGammaParams, LayerModel, MalagaFogParams, MalagaModel, PathGain,
    PointingError,
};

pub const NOISE_VARIANCE: f64 = 1e-14;
pub const EXTINCTION: f64 = 0.056;
pub const UWOC_LENGTH_M: f64 = 50.0;
pub const TOWC_LENGTH_M: f64 = 400.0;
pub const POINTING_A0: f64 = 0.0032;
pub const RELAY_GAIN: f64 = 1.0;

pub const GG_A: [f64; 5] = [0.6302, 1.0750, 1.0173, 0.7598, 1.0990];
pub const GG_D: [f64; 5] = [1.1780, 3.2048, 1.6668, 2.3270, 4.5550];
pub const GG_P: [f64; 5] = [0.8444, 2.9222, 1.0380, 1.4353, 4.6208];
/// First-layer `d` of the milder GG variant.
pub const GG_D1_MILD: f64 = 2.6108;
/// Third layer `(a, d, p)` of the capacity variant.
pub const GG_LAYER3_CAPACITY: (f64, f64, f64) = (0.3557, 5.0965, 1.296);

pub const EGG_OMEGA: [f64; 5] = [0.2130, 0.2108, 0.1807, 0.1665, 0.4589];
pub const EGG_LAMBDA: [f64; 5] = [0.3291, 0.2694, 0.1641, 0.1207, 0.3449];
pub const EGG_D_OVER_P: [f64; 5] = [1.4299, 0.6020, 0.2334, 0.1559, 1.0421];
pub const EGG_A: [f64; 5] = [1.1817, 1.2795, 1.4201, 1.5216, 1.5768];
pub const EGG_P: [f64; 5] = [17.1984, 21.1611, 22.5924, 22.8754, 35.9424];
/// Single-layer `(ω, λ)` pairs, completed with the GG branch of layers 1 and 5.
pub const EGG_SINGLE: [(f64, f64, usize); 2] = [(0.1770, 0.4687, 0), (0.4589, 0.3449, 4)];

pub const EW: EWParams = EWParams {
    alpha: 2.50,
    beta: 0.70,
    eta: 0.50,
};
pub const GAMMA_GAMMA: GammaGammaParams = GammaGammaParams { alpha: 5.0, beta: 1.18 };

/// `(α, β)` of weak, moderate and strong atmospheric turbulence.
pub const MALAGA: [(f64, f64); 3] = [(4.5916, 7.0941), (2.3378, 4.5323), (1.4321, 3.4948)];
/// `(k, β_f)` of light and moderate fog.
pub const FOG: [(f64, f64); 2] = [(13.12, 2.0), (12.06, 5.0)];

pub fn gg_layers() -> Vec<LayerModel> {
    (0..5)
        .map(|i| LayerModel::Gg(GGParams {
            a: GG_A[i],
            d: GG_D[i],
            p: GG_P[i],
        }))
        .collect()
}

pub fn gg_layers_mild() -> Vec<LayerModel> {
    let mut v = gg_layers();
    v[0] = LayerModel::Gg(GGParams {
        a: GG_A[0],
        d: GG_D1_MILD,
        p: GG_P[0],
    });
    v
}

pub fn gg_layers_capacity_variant() -> Vec<LayerModel> {
    let mut v = gg_layers();
    let (a, d, p) = GG_LAYER3_CAPACITY;
    v[2] = LayerModel::Gg(GGParams { a, d, p });
    v
}

fn egg_layer(i: usize, omega: f64, lambda: f64) -> LayerModel {
    LayerModel::Egg(EGGParams {
        omega,
        lambda,
        a: EGG_A[i],
        d: EGG_D_OVER_P[i] * EGG_P[i],
        p: EGG_P[i],
    })
}

pub fn egg_layers() -> Vec<LayerModel> {
    (0..5).map(|i| egg_layer(i, EGG_OMEGA[i], EGG_LAMBDA[i])).collect()
}

pub fn egg_single(which: usize) -> LayerModel {
    let (omega, lambda, branch) = EGG_SINGLE[which];
    egg_layer(branch, omega, lambda)
}

/// The single-layer models compared against each other.
pub fn single_layers() -> Vec<(&'static str, LayerModel)> {
    vec![
        ("gg", gg_layers()[0]),
        ("egg1", egg_single(0)),
        ("egg2", egg_single(1)),
        ("ew", LayerModel::Ew(EW)),
        ("gamma_gamma", LayerModel::GammaGamma(GAMMA_GAMMA)),
    ]
}

/// Stack without deterministic attenuation, for average-SNR sweeps.
pub fn stack(layers: Vec<LayerModel>, rho2: f64) -> Result<UwocStack> {
    UwocStack::new(layers, PointingError::new(rho2, POINTING_A0)?, PathGain::default())
}

/// Stack with the underwater extinction, for transmit-power sweeps.
pub fn stack_with_path(layers: Vec<LayerModel>, rho2: f64) -> Result<UwocStack> {
    UwocStack::new(
        layers,
        PointingError::new(rho2, POINTING_A0)?,
        PathGain {
            alpha_ext: EXTINCTION,
            length: UWOC_LENGTH_M,
        },
    )
}

pub fn towc(malaga: usize, fog: usize, rho2: f64) -> Result<MalagaFogParams> {
    let (alpha, beta) = MALAGA[malaga];
    let (k, beta_f) = FOG[fog];
    Ok(MalagaFogParams {
        malaga: MalagaModel::with_defaults(alpha, beta)?,
        fog: FogChannel::from_attenuation(k, beta_f, TOWC_LENGTH_M),
        pointing: PointingError::new(rho2, POINTING_A0)?,
    })
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `P_t^2 / σ_w^2` with unit responsivity; attenuation is carried by the
/// channel models.
pub fn gamma_bar_from_power(dbm: f64, noise_variance: f64) -> f64 {
    dbm_to_watts(dbm).powi(2) / noise_variance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{diversity_order, printed_diversity_order};

    #[test]
    fn printed_diversity_values() {
        let s = stack(gg_layers(), 1.0).unwrap();
        assert!((0.5 * GG_D.iter().sum::<f64>() - 6.4658).abs() < 1e-12);
        assert!((printed_diversity_order(&s) - 0.5).abs() < 1e-12);
        let mild: f64 = gg_layers_mild()
            .iter()
            .map(|l| if let LayerModel::Gg(p) = l { p.d } else { 0.0 })
            .sum();
        assert!((0.5 * mild - 7.1822).abs() < 1e-12);
        let s6 = stack(gg_layers_mild(), 6.0).unwrap();
        assert!((printed_diversity_order(&s6) - 3.0).abs() < 1e-12);
        assert!((diversity_order(&s6) - 0.8334).abs() < 1e-12);
    }

    #[test]
    fn fog_rates() {
        let light = towc(0, 0, 1.0).unwrap();
        let moderate = towc(0, 1, 1.0).unwrap();
        assert!((light.fog.z - 5.4287).abs() < 1e-3);
        assert!((moderate.fog.z - 2.1715).abs() < 1e-3);
        assert_eq!(light.malaga.beta, 7);
    }

    #[test]
    fn power_budget() {
        assert!((gamma_bar_from_power(20.0, NOISE_VARIANCE) - 1e12).abs() < 1.0);
    }
}
