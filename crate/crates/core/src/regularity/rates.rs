use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inflation applied to sampled constants before predicting rates.
pub const SAFETY_FACTOR: f64 = 1.05;

/// `ε̃₂ = 2ε + 2ε²`, the firm-nonexpansiveness violation of a projector.
pub fn eps_tilde_projector(eps: f64) -> f64 {
    2.0 * eps + 2.0 * eps * eps
}

/// `ε̃₃ = 4ε + 4ε²`, the nonexpansiveness violation of a reflector.
pub fn eps_tilde_reflector(eps: f64) -> f64 {
    4.0 * eps + 4.0 * eps * eps
}

/// Firm-nonexpansiveness violation of Douglas-Rachford.
pub fn eps_tilde_dr(eps_a: f64, eps_b: f64) -> f64 {
    let ta = eps_a * (1.0 + eps_a);
    let tb = eps_b * (1.0 + eps_b);
    2.0 * ta + 2.0 * tb + 8.0 * ta * tb
}

/// Which MAP rate applies, by convexity of the two sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapRegime {
    BothConvex,
    /// `B` (projected onto first) convex, `A` only subregular.
    BConvex,
    BothSubregular,
}

/// Constants feeding [`predicted_rates`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub eps_a: f64,
    pub eps_b: f64,
    pub delta: f64,
    pub kappa: f64,
    pub c: f64,
    pub friedrichs_cos: Option<f64>,
    pub strongly_regular: bool,
    pub a_convex: bool,
    pub b_convex: bool,
    pub b_affine: bool,
}

impl RateInputs {
    /// Pessimistic copy: `ε` and `κ` scaled up by `factor`, `c` towards 1.
    pub fn inflated(&self, factor: f64) -> Self {
        Self {
            eps_a: self.eps_a * factor,
            eps_b: self.eps_b * factor,
            kappa: self.kappa * factor,
            c: (self.c * factor).min(1.0),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub eps_a: f64,
    pub eps_b: f64,
    pub delta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub c: f64,
    pub friedrichs_cos: Option<f64>,
    pub eps_tilde_map: f64,
    pub eps_tilde_dr: f64,
    pub eta: f64,
    /// Coercivity constants: `γ` for MAP, `γ·sqrt(1 − c)` for DR.
    pub lambda_map: f64,
    pub lambda_dr: f64,
    pub map_regime: MapRegime,
    /// Bound on `dist(P_B x, S) / dist(x, S)` for `x ∈ A`.
    pub single_projection_rate: f64,
    /// Bound on the ratio over one full MAP cycle.
    pub predicted_rate_map: f64,
    /// Bound on the ratio over one DR step.
    pub predicted_rate_dr: f64,
    pub map_guarantee: bool,
    pub dr_guarantee: bool,
    /// Set when a negative radicand was clipped to zero.
    pub clipped: bool,
    pub strongly_regular: bool,
}

fn clipped_sqrt(radicand: f64, clipped: &mut bool) -> f64 {
    if radicand < 0.0 {
        *clipped = true;
        0.0
    } else {
        radicand.sqrt()
    }
}

/// Fills every derived constant and the predicted MAP and DR rates.
pub fn predicted_rates(inputs: &RateInputs) -> Result<RegularityReport> {
    let RateInputs {
        eps_a,
        eps_b,
        delta,
        kappa,
        c,
        ..
    } = *inputs;
    for (name, v) in [("eps_a", eps_a), ("eps_b", eps_b), ("kappa", kappa)] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
        }
    }
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("c must lie in [-1, 1], got {c}")));
    }
    let gamma = if kappa > 0.0 { 1.0 / kappa } else { 0.0 };
    let g2 = gamma * gamma;
    let map_regime = match (inputs.a_convex, inputs.b_convex) {
        (true, true) => MapRegime::BothConvex,
        (_, true) => MapRegime::BConvex,
        _ => MapRegime::BothSubregular,
    };
    let eps_tilde_map = match map_regime {
        MapRegime::BothConvex => 0.0,
        MapRegime::BConvex => eps_tilde_projector(eps_a),
        MapRegime::BothSubregular => eps_tilde_projector(eps_a.max(eps_b)),
    };
    let eps_tilde_dr = eps_tilde_dr(eps_a, eps_b);
    let eta = if kappa > 0.0 { (1.0 - c) / (kappa * kappa) } else { 0.0 };

    let mut clipped = false;
    let single_projection_rate = clipped_sqrt(1.0 + eps_tilde_projector(eps_b) - g2, &mut clipped);
    let (predicted_rate_map, map_condition) = match map_regime {
        MapRegime::BothConvex => (1.0 - g2, true),
        MapRegime::BConvex => {
            let rate = clipped_sqrt(1.0 - g2 + eps_tilde_map, &mut clipped) * clipped_sqrt(1.0 - g2, &mut clipped);
            let bound = if g2 < 1.0 {
                (2.0 * gamma - g2) / (1.0 - g2)
            } else {
                f64::INFINITY
            };
            (rate, eps_tilde_map <= bound)
        }
        MapRegime::BothSubregular => (1.0 - g2 + eps_tilde_map, eps_tilde_map <= g2),
    };
    let dr_radicand = 1.0 + eps_tilde_dr - eta;
    let predicted_rate_dr = clipped_sqrt(dr_radicand, &mut clipped);
    Ok(RegularityReport {
        eps_a,
        eps_b,
        delta,
        kappa,
        gamma,
        c,
        friedrichs_cos: inputs.friedrichs_cos,
        eps_tilde_map,
        eps_tilde_dr,
        eta,
        lambda_map: gamma,
        lambda_dr: gamma * (1.0 - c).max(0.0).sqrt(),
        map_regime,
        single_projection_rate,
        predicted_rate_map,
        predicted_rate_dr,
        map_guarantee: kappa > 0.0 && map_condition && predicted_rate_map < 1.0,
        dr_guarantee: kappa > 0.0 && inputs.b_affine && eta > eps_tilde_dr && dr_radicand < 1.0,
        clipped,
        strongly_regular: inputs.strongly_regular,
    })
}
