//! Parametric one-dimensional distributions.
//!
//! [`DistributionSpec`] is the building block for values, fractions, and
//! random judgments: closed-form CDF/PDF evaluation plus sampling that is
//! deterministic given an explicit RNG stream. All raw randomness is drawn
//! at f64 precision and converted, so a given `(seed, lane)` produces the
//! same draw sequence regardless of the scalar type in use.

use rand::Rng;
use rand_distr::Distribution as RandDistr;

use crate::error::{ModelError, ModelResult};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec<T> {
    /// Degenerate distribution at `value`.
    PointMass { value: T },
    /// Uniform on `[lo, hi]`, `lo < hi`.
    Uniform { lo: T, hi: T },
    /// Triangular on `[lo, hi]` with peak at `mode`.
    Triangular { lo: T, mode: T, hi: T },
    /// Beta(alpha, beta) on `[0, 1]`.
    Beta { alpha: T, beta: T },
    /// CDF `x^k` on `[0, 1]`, `k > 0`.
    Power { k: T },
    /// Finite support with explicit probabilities.
    Categorical { values: Vec<T>, probs: Vec<T> },
    /// Dirichlet over the simplex; samples are vectors, not scalars.
    Dirichlet { alphas: Vec<T> },
}

impl<T: Real> DistributionSpec<T> {
    pub fn family_name(&self) -> &'static str {
        match self {
            Self::PointMass { .. } => "point_mass",
            Self::Uniform { .. } => "uniform",
            Self::Triangular { .. } => "triangular",
            Self::Beta { .. } => "beta",
            Self::Power { .. } => "power",
            Self::Categorical { .. } => "categorical",
            Self::Dirichlet { .. } => "dirichlet",
        }
    }

    pub fn validate(&self) -> ModelResult<()> {
        let bad = |msg: String| Err(ModelError::BadDistribution(msg));
        match self {
            Self::PointMass { value } => {
                if !value.is_finite() {
                    return bad(format!("point mass at non-finite value {value}"));
                }
            }
            Self::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo < *hi) {
                    return bad(format!("uniform requires lo < hi, got [{lo}, {hi}]"));
                }
            }
            Self::Triangular { lo, mode, hi } => {
                if !(lo.is_finite() && mode.is_finite() && hi.is_finite()) {
                    return bad("triangular with non-finite parameter".into());
                }
                if !(*lo < *hi && *lo <= *mode && *mode <= *hi) {
                    return bad(format!(
                        "triangular requires lo <= mode <= hi and lo < hi, got ({lo}, {mode}, {hi})"
                    ));
                }
            }
            Self::Beta { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite() && *alpha > T::zero() && *beta > T::zero())
                {
                    return bad(format!("beta requires alpha, beta > 0, got ({alpha}, {beta})"));
                }
            }
            Self::Power { k } => {
                if !(k.is_finite() && *k > T::zero()) {
                    return bad(format!("power requires k > 0, got {k}"));
                }
            }
            Self::Categorical { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("categorical values/probs must be non-empty and equal length".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("categorical with non-finite value".into());
                }
                if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
                    return bad("categorical probabilities must be nonnegative".into());
                }
                let sum: T = probs.iter().copied().sum();
                if (sum - T::one()).abs() > T::c(1e-12).max(T::epsilon() * T::c(64.0)) {
                    return bad(format!("categorical probabilities sum to {sum}, not 1"));
                }
            }
            Self::Dirichlet { alphas } => {
                if alphas.len() < 2 {
                    return bad("dirichlet needs at least two alphas".into());
                }
                if alphas.iter().any(|a| !a.is_finite() || *a <= T::zero()) {
                    return bad("dirichlet alphas must be > 0".into());
                }
            }
        }
        Ok(())
    }

    /// Hull of the support, `(lo, hi)`.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::PointMass { value } => (*value, *value),
            Self::Uniform { lo, hi } => (*lo, *hi),
            Self::Triangular { lo, hi, .. } => (*lo, *hi),
            Self::Beta { .. } | Self::Power { .. } | Self::Dirichlet { .. } => (T::zero(), T::one()),
            Self::Categorical { values, .. } => {
                let mut lo = values[0];
                let mut hi = values[0];
                for v in values {
                    lo = lo.min(*v);
                    hi = hi.max(*v);
                }
                (lo, hi)
            }
        }
    }

    /// True for families with atoms (no density).
    pub fn is_atomic(&self) -> bool {
        matches!(self, Self::PointMass { .. } | Self::Categorical { .. })
    }

    /// Closed-form CDF. Clamps to 0/1 outside the support.
    pub fn cdf(&self, x: T) -> ModelResult<T> {
        let p = match self {
            Self::PointMass { value } => {
                if x >= *value {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Uniform { lo, hi } => ((x - *lo) / (*hi - *lo)).clamp(T::zero(), T::one()),
            Self::Triangular { lo, mode, hi } => {
                if x <= *lo {
                    T::zero()
                } else if x >= *hi {
                    T::one()
                } else if x < *mode {
                    (x - *lo) * (x - *lo) / ((*hi - *lo) * (*mode - *lo))
                } else if x > *mode {
                    T::one() - (*hi - x) * (*hi - x) / ((*hi - *lo) * (*hi - *mode))
                } else {
                    // x == mode; both branches agree here
                    (*mode - *lo) / (*hi - *lo)
                }
            }
            Self::Beta { alpha, beta } => {
                let x64 = x.to_f64_lossy().clamp(0.0, 1.0);
                if x64 <= 0.0 {
                    T::zero()
                } else if x64 >= 1.0 {
                    T::one()
                } else {
                    T::c(statrs::function::beta::beta_reg(
                        alpha.to_f64_lossy(),
                        beta.to_f64_lossy(),
                        x64,
                    ))
                }
            }
            Self::Power { k } => x.clamp(T::zero(), T::one()).powf(*k),
            Self::Categorical { values, probs } => {
                let mut acc = T::zero();
                for (v, p) in values.iter().zip(probs) {
                    if *v <= x {
                        acc += *p;
                    }
                }
                acc.min(T::one())
            }
            Self::Dirichlet { .. } => return Err(ModelError::Multivariate("dirichlet")),
        };
        Ok(p)
    }

    /// Density for continuous families; atoms and Dirichlet are errors.
    pub fn pdf(&self, x: T) -> ModelResult<T> {
        let d = match self {
            Self::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    T::zero()
                } else {
                    T::one() / (*hi - *lo)
                }
            }
            Self::Triangular { lo, mode, hi } => {
                if x < *lo || x > *hi {
                    T::zero()
                } else if x < *mode {
                    T::c(2.0) * (x - *lo) / ((*hi - *lo) * (*mode - *lo))
                } else if x > *mode {
                    T::c(2.0) * (*hi - x) / ((*hi - *lo) * (*hi - *mode))
                } else {
                    T::c(2.0) / (*hi - *lo)
                }
            }
            Self::Beta { alpha, beta } => {
                let x64 = x.to_f64_lossy();
                if !(0.0..=1.0).contains(&x64) {
                    T::zero()
                } else {
                    let a = alpha.to_f64_lossy();
                    let b = beta.to_f64_lossy();
                    let ln = (a - 1.0) * x64.ln() + (b - 1.0) * (1.0 - x64).ln()
                        - statrs::function::beta::ln_beta(a, b);
                    T::c(ln.exp())
                }
            }
            Self::Power { k } => {
                if x < T::zero() || x > T::one() {
                    T::zero()
                } else {
                    *k * x.powf(*k - T::one())
                }
            }
            Self::PointMass { .. } => return Err(ModelError::NotContinuous("point_mass")),
            Self::Categorical { .. } => return Err(ModelError::NotContinuous("categorical")),
            Self::Dirichlet { .. } => return Err(ModelError::Multivariate("dirichlet")),
        };
        Ok(d)
    }

    /// Draw one value. Inverse-CDF where closed forms exist; Beta goes
    /// through `rand_distr`. Deterministic given the stream state.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ModelResult<T> {
        let v = match self {
            Self::PointMass { value } => *value,
            Self::Uniform { lo, hi } => {
                let u = T::c(rng.random::<f64>());
                *lo + (*hi - *lo) * u
            }
            Self::Triangular { lo, mode, hi } => {
                let u = T::c(rng.random::<f64>());
                let span = *hi - *lo;
                let cut = (*mode - *lo) / span;
                if u < cut {
                    *lo + (u * span * (*mode - *lo)).sqrt()
                } else {
                    *hi - ((T::one() - u) * span * (*hi - *mode)).sqrt()
                }
            }
            Self::Beta { alpha, beta } => {
                let d = rand_distr::Beta::new(alpha.to_f64_lossy(), beta.to_f64_lossy())
                    .map_err(|e| ModelError::BadDistribution(e.to_string()))?;
                T::c(d.sample(rng))
            }
            Self::Power { k } => {
                let u = rng.random::<f64>();
                T::c(u.powf(1.0 / k.to_f64_lossy()))
            }
            Self::Categorical { values, probs } => {
                let u = T::c(rng.random::<f64>());
                let mut acc = T::zero();
                let mut chosen = values[values.len() - 1];
                for (v, p) in values.iter().zip(probs) {
                    acc += *p;
                    if u < acc {
                        chosen = *v;
                        break;
                    }
                }
                chosen
            }
            Self::Dirichlet { .. } => return Err(ModelError::Multivariate("dirichlet")),
        };
        Ok(v)
    }

    /// Draw a probability vector from a Dirichlet spec.
    pub fn sample_simplex<R: Rng>(&self, rng: &mut R) -> ModelResult<Vec<T>> {
        let Self::Dirichlet { alphas } = self else {
            return Err(ModelError::BadDistribution(format!(
                "simplex sampling requires dirichlet, got {}",
                self.family_name()
            )));
        };
        Ok(sample_dirichlet(alphas, rng))
    }
}

/// Dirichlet draw by gamma normalization. Exposed for judgment sampling.
pub(crate) fn sample_dirichlet<T: Real, R: Rng>(alphas: &[T], rng: &mut R) -> Vec<T> {
    loop {
        let mut draws: Vec<f64> = Vec::with_capacity(alphas.len());
        let mut total = 0.0f64;
        for a in alphas {
            let g = rand_distr::Gamma::new(a.to_f64_lossy(), 1.0)
                .expect("validated alpha > 0")
                .sample(rng);
            draws.push(g);
            total += g;
        }
        // tiny alphas can underflow every gamma draw to zero; redraw
        if total > 0.0 {
            return draws.into_iter().map(|g| T::c(g / total)).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_stream, Purpose};
    use approx::assert_abs_diff_eq;

    fn stream(ix: u64) -> crate::rng::EngineRng {
        sample_stream(0xA11CE, Purpose::External, ix)
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(DistributionSpec::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(DistributionSpec::Triangular { lo: 0.0, mode: 2.0, hi: 1.0 }
            .validate()
            .is_err());
        assert!(DistributionSpec::Beta { alpha: 0.0, beta: 1.0 }.validate().is_err());
        assert!(DistributionSpec::Power { k: -1.0 }.validate().is_err());
        assert!(DistributionSpec::Categorical {
            values: vec![1.0, 2.0],
            probs: vec![0.4, 0.4],
        }
        .validate()
        .is_err());
        assert!(DistributionSpec::Dirichlet { alphas: vec![1.0, 0.0] }.validate().is_err());
        assert!(DistributionSpec::Categorical {
            values: vec![1.0, 2.0],
            probs: vec![0.25, 0.75],
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn triangular_cdf_at_mode() {
        // (153-126)^2 / ((180-126)(153-126)) = 0.5
        let d = DistributionSpec::Triangular { lo: 126.0, mode: 153.0, hi: 180.0 };
        assert_abs_diff_eq!(d.cdf(153.0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn power_cdf_matches_closed_form() {
        let d = DistributionSpec::Power { k: 9.0 };
        assert_abs_diff_eq!(d.cdf(0.5).unwrap(), 0.5f64.powi(9), epsilon = 1e-15);
        assert_eq!(d.cdf(0.5).unwrap(), 0.001953125);
    }

    #[test]
    fn beta_cdf_matches_quadrature_oracle() {
        // independent oracle: Simpson integration of the closed-form density
        let (a, b) = (2.0f64, 2.0f64);
        let norm = 6.0; // 1/B(2,2)
        let oracle = crate::numeric::adaptive_simpson(
            |x: f64| norm * x * (1.0 - x),
            0.0,
            0.3,
            1e-12,
        )
        .unwrap();
        let d = DistributionSpec::Beta { alpha: a, beta: b };
        assert_abs_diff_eq!(d.cdf(0.3).unwrap(), oracle, epsilon = 1e-8);
    }

    #[test]
    fn cdf_clamps_outside_support() {
        let d = DistributionSpec::Uniform { lo: 2.0, hi: 3.0 };
        assert_eq!(d.cdf(0.0).unwrap(), 0.0);
        assert_eq!(d.cdf(10.0).unwrap(), 1.0);
    }

    #[test]
    fn point_mass_samples_exactly() {
        let d = DistributionSpec::PointMass { value: 0.9 };
        for i in 0..32 {
            assert_eq!(d.sample(&mut stream(i)).unwrap(), 0.9);
        }
    }

    #[test]
    fn uniform_sample_mean_obeys_lln() {
        let d = DistributionSpec::Uniform { lo: 100.0, hi: 200.0 };
        let n = 100_000u64;
        let mut sum = 0.0;
        for i in 0..n {
            sum += d.sample(&mut stream(i)).unwrap();
        }
        let mean = sum / n as f64;
        assert!((mean - 150.0).abs() < 1.0, "mean {mean} strayed from 150");
    }

    #[test]
    fn categorical_frequencies_within_binomial_ci() {
        let d = DistributionSpec::Categorical {
            values: vec![1.0, 2.0],
            probs: vec![0.25, 0.75],
        };
        let n = 100_000u64;
        let mut hits = 0u64;
        for i in 0..n {
            if d.sample(&mut stream(i)).unwrap() == 1.0 {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let band = 3.0 * (0.25 * 0.75 / n as f64).sqrt();
        assert!((p_hat - 0.25).abs() < band, "{p_hat} outside {band} of 0.25");
    }

    #[test]
    fn samples_stay_in_support() {
        let specs: Vec<DistributionSpec<f64>> = vec![
            DistributionSpec::Uniform { lo: -3.0, hi: 2.0 },
            DistributionSpec::Triangular { lo: 0.0, mode: 0.2, hi: 1.0 },
            DistributionSpec::Beta { alpha: 0.5, beta: 2.5 },
            DistributionSpec::Power { k: 9.0 },
        ];
        for d in &specs {
            let (lo, hi) = d.support();
            for i in 0..2_000 {
                let x = d.sample(&mut stream(i)).unwrap();
                assert!(x >= lo && x <= hi, "{x} outside [{lo}, {hi}] for {d:?}");
            }
        }
    }

    #[test]
    fn cdf_nondecreasing_and_anchored_on_grid() {
        let specs: Vec<DistributionSpec<f64>> = vec![
            DistributionSpec::PointMass { value: 0.4 },
            DistributionSpec::Uniform { lo: -1.0, hi: 4.0 },
            DistributionSpec::Triangular { lo: 126.0, mode: 153.0, hi: 180.0 },
            DistributionSpec::Beta { alpha: 2.0, beta: 5.0 },
            DistributionSpec::Power { k: 3.0 },
            DistributionSpec::Categorical {
                values: vec![1.0, 2.0, 5.0],
                probs: vec![0.2, 0.3, 0.5],
            },
        ];
        for d in &specs {
            let (lo, hi) = d.support();
            let pad = (hi - lo).max(1.0) * 0.01;
            let grid = crate::numeric::linspace(lo - pad, hi + pad, 257);
            let mut prev = -1.0;
            for &x in &grid {
                let c = d.cdf(x).unwrap();
                assert!(c >= prev - 1e-12, "cdf decreased for {d:?}");
                assert!((-1e-12..=1.0 + 1e-12).contains(&c));
                prev = c;
            }
            assert_abs_diff_eq!(d.cdf(lo - pad).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.cdf(hi + pad).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    /// Kolmogorov-Smirnov consistency between sampling and the closed-form
    /// CDF, for every continuous family (atoms compared on their atoms).
    #[test]
    fn ks_statistic_below_threshold_for_every_family() {
        let specs: Vec<DistributionSpec<f64>> = vec![
            DistributionSpec::Uniform { lo: 2.0, hi: 7.0 },
            DistributionSpec::Triangular { lo: 140.0, mode: 170.0, hi: 200.0 },
            DistributionSpec::Beta { alpha: 2.0, beta: 3.0 },
            DistributionSpec::Beta { alpha: 0.7, beta: 0.9 },
            DistributionSpec::Power { k: 9.0 },
        ];
        let n = 10_000usize;
        for d in &specs {
            let mut xs: Vec<f64> = (0..n)
                .map(|i| d.sample(&mut stream(i as u64)).unwrap())
                .collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut ks: f64 = 0.0;
            for (i, x) in xs.iter().enumerate() {
                let f = d.cdf(*x).unwrap();
                let hi = (i + 1) as f64 / n as f64;
                let lo = i as f64 / n as f64;
                ks = ks.max((f - hi).abs()).max((f - lo).abs());
            }
            assert!(ks < 0.02, "KS {ks} too large for {d:?}");
        }
        // atomic families: exact frequencies checked separately above
        let pm = DistributionSpec::PointMass { value: 3.0 };
        assert_eq!(pm.sample(&mut stream(0)).unwrap(), 3.0);
    }

    #[test]
    fn dirichlet_simplex_sampling() {
        let d = DistributionSpec::Dirichlet { alphas: vec![1.0, 1.0, 1.0] };
        let v = d.sample_simplex(&mut stream(11)).unwrap();
        assert_eq!(v.len(), 3);
        let s: f64 = v.iter().sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        assert!(d.sample(&mut stream(0)).is_err());
        assert!(d.cdf(0.5).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let d = DistributionSpec::Beta { alpha: 2.0, beta: 2.0 };
        let a = d.sample(&mut stream(5)).unwrap();
        let b = d.sample(&mut stream(5)).unwrap();
        assert_eq!(a, b);
    }
}
