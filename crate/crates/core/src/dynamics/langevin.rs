//! Stochastic relaxation `∂q/∂τ = −∇𝒜(q) + ν` with Gaussian noise of
//! variance `2ħ` per unit `τ`, integrated by Euler–Maruyama.
//!
//! Every sample draws from its own ChaCha stream (`seed`, stream = sample
//! index), so the same noise realisations are reused across ħ values and
//! the ħ-scaling is measured with common random numbers.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{loglog_slope, DynamicsError, NumericExpr};
use crate::phasespace::SymExpr;

#[derive(Clone, Debug, Serialize)]
pub struct LangevinStats {
    pub hbar: f64,
    pub samples: usize,
    pub tau_end: f64,
    pub dtau: f64,
    /// Ensemble mean of `|q(τ_end) − q_det(τ_end)|²`.
    pub mean_square_deviation: f64,
    pub standard_error: f64,
}

/// Compile `∇𝒜` for an action in the variables `vars`.
pub fn gradient_of<S: AsRef<str>>(
    action: &SymExpr,
    vars: &[S],
    params: &BTreeMap<String, f64>,
) -> Result<impl Fn(&[f64], &mut [f64]) + Sync, DynamicsError> {
    let grads = vars
        .iter()
        .map(|v| NumericExpr::compile(&action.differentiate(v.as_ref()), vars, params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(move |q: &[f64], out: &mut [f64]| {
        for (o, g) in out.iter_mut().zip(&grads) {
            *o = g.eval(q);
        }
    })
}

fn relax(
    grad: &(impl Fn(&[f64], &mut [f64]) + Sync),
    q0: &[f64],
    noise_scale: f64,
    steps: usize,
    dtau: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Vec<f64> {
    let mut q = q0.to_vec();
    let mut g = vec![0.0; q.len()];
    let mut rng = rng;
    for _ in 0..steps {
        grad(&q, &mut g);
        for (qi, gi) in q.iter_mut().zip(&g) {
            let xi: f64 = match rng.as_deref_mut() {
                Some(r) => StandardNormal.sample(r),
                None => 0.0,
            };
            *qi += -gi * dtau + noise_scale * xi;
        }
    }
    q
}

/// Mean-square deviation of the noisy ensemble from the noiseless flow.
pub fn langevin_ensemble(
    grad: &(impl Fn(&[f64], &mut [f64]) + Sync),
    q0: &[f64],
    hbar: f64,
    samples: usize,
    tau_end: f64,
    dtau: f64,
    seed: u64,
) -> Result<LangevinStats, DynamicsError> {
    if hbar < 0.0 || !hbar.is_finite() {
        return Err(DynamicsError::NegativeHbar(hbar));
    }
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(DynamicsError::BadStep(dtau));
    }
    let steps = (tau_end / dtau).round() as usize;
    let reference = relax(grad, q0, 0.0, steps, dtau, None);
    let noise_scale = (2.0 * hbar * dtau).sqrt();
    let deviations: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let q = relax(grad, q0, noise_scale, steps, dtau, Some(&mut rng));
            q.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum()
        })
        .collect();
    let m = samples.max(1) as f64;
    let mean = deviations.iter().sum::<f64>() / m;
    let var = deviations.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    if !mean.is_finite() {
        return Err(DynamicsError::UnstableStep(dtau));
    }
    Ok(LangevinStats { hbar, samples, tau_end, dtau, mean_square_deviation: mean, standard_error: (var / m).sqrt() })
}

#[derive(Clone, Debug, Serialize)]
pub struct LangevinScaling {
    pub ensembles: Vec<LangevinStats>,
    /// Log-log slope of the mean-square deviation against ħ.
    pub slope: f64,
}

pub fn langevin_scaling(
    grad: &(impl Fn(&[f64], &mut [f64]) + Sync),
    q0: &[f64],
    hbars: &[f64],
    samples: usize,
    tau_end: f64,
    dtau: f64,
    seed: u64,
) -> Result<LangevinScaling, DynamicsError> {
    let ensembles = hbars
        .iter()
        .map(|&h| langevin_ensemble(grad, q0, h, samples, tau_end, dtau, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let devs: Vec<f64> = ensembles.iter().map(|e| e.mean_square_deviation).collect();
    let slope = loglog_slope(hbars, &devs)?;
    Ok(LangevinScaling { ensembles, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhaseSpace;

    fn grad(action: &str) -> impl Fn(&[f64], &mut [f64]) + Sync {
        let space = PhaseSpace::doubled(&["q"], &["omega"]).unwrap();
        let params = BTreeMap::from([("omega".to_string(), 2.0)]);
        gradient_of(&space.parse(action).unwrap(), &["q"], &params).unwrap()
    }

    #[test]
    fn ornstein_uhlenbeck_stationary_variance() {
        let (omega, hbar) = (2.0, 0.05);
        let g = grad("1/2*omega*q^2");
        let stats = langevin_ensemble(&g, &[1.0], hbar, 10_000, 4.0, 1e-2, 1).unwrap();
        let oracle = hbar / omega;
        assert!((stats.mean_square_deviation / oracle - 1.0).abs() < 0.05, "{stats:?}");
    }

    #[test]
    fn zero_hbar_has_no_deviation() {
        let g = grad("1/2*omega*q^2 + 1/4*q^4");
        let stats = langevin_ensemble(&g, &[1.0], 0.0, 100, 1.0, 1e-2, 1).unwrap();
        assert_eq!(stats.mean_square_deviation, 0.0);
        assert!(langevin_ensemble(&g, &[1.0], -1.0, 10, 1.0, 1e-2, 1).is_err());
    }

    #[test]
    fn anharmonic_scaling_is_linear_in_hbar() {
        let g = grad("1/2*q^2 + 1/4*q^4");
        let s = langevin_scaling(&g, &[1.0], &[0.1, 0.01, 0.001], 2_000, 1.0, 1e-2, 3).unwrap();
        assert!((s.slope - 1.0).abs() < 0.1, "slope {}", s.slope);
    }

    #[test]
    fn unstable_steps_are_reported() {
        let g = grad("1/2*omega*q^2");
        let err = langevin_ensemble(&g, &[1.0], 0.1, 4, 2000.0, 2.0, 1).unwrap_err();
        assert!(matches!(err, DynamicsError::UnstableStep(_)));
    }
}
