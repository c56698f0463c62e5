//! Sealed-bid auction analysis on a continuous bid space.
//!
//! The non-strategic opponent bids a random fraction of a random value; his
//! bid CDF is the pushforward `F(x) = P[pV <= x]`, computed in closed form
//! where a spec is atomic and by adaptive quadrature otherwise. Level-1 and
//! level-2 analyses and the two-bidder mirror-equilibrium iteration are
//! built from that primitive plus derivative-free bid optimization on a
//! grid with golden-section refinement.

use crate::dist::DistributionSpec;
use crate::error::{ModelError, ModelResult, SolveResult};
use crate::numeric::{golden_section_max, linspace};
use crate::scalar::Real;

/// Bid-axis discretization, at least 100 points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidGrid<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
}

impl<T: Real> BidGrid<T> {
    pub fn new(lo: T, hi: T, points: usize) -> ModelResult<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ModelError::BadConfig(format!(
                "bid grid requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        if points < 100 {
            return Err(ModelError::BadConfig(format!(
                "bid grid needs at least 100 points, got {points}"
            )));
        }
        Ok(BidGrid { lo, hi, points })
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::from_usize_c(self.points - 1)
    }

    pub fn axis(&self) -> Vec<T> {
        linspace(self.lo, self.hi, self.points)
    }
}

/// What I think he thinks: the value and fraction distributions the
/// opponent ascribes to me in his level-1 analysis.
#[derive(Debug, Clone)]
pub struct MirrorAuctionBeliefs<T> {
    pub value_dist: DistributionSpec<T>,
    pub fraction_dist: DistributionSpec<T>,
}

#[derive(Debug, Clone)]
pub struct AuctionSpec<T> {
    /// My true top-dollar value.
    pub my_value: T,
    /// My distribution over the opponent's value.
    pub opponent_value_dist: DistributionSpec<T>,
    /// My distribution over the fraction of value he bids (on [0, 1]).
    pub fraction_dist: DistributionSpec<T>,
    pub grid: BidGrid<T>,
    /// Required for the level-2 analysis.
    pub mirror: Option<MirrorAuctionBeliefs<T>>,
    /// My own value distribution as the opponent sees it; required for the
    /// mirror-equilibrium analysis.
    pub my_value_dist: Option<DistributionSpec<T>>,
    /// Unit label echoed in reports.
    pub currency: Option<String>,
}

fn check_fraction_support<T: Real>(fraction: &DistributionSpec<T>) -> ModelResult<()> {
    let (lo, hi) = fraction.support();
    let tol = T::c(1e-12);
    if lo < -tol || hi > T::one() + tol {
        return Err(ModelError::BadDistribution(format!(
            "fraction support [{lo}, {hi}] must lie within [0, 1]"
        )));
    }
    Ok(())
}

impl<T: Real> AuctionSpec<T> {
    pub fn validate(&self) -> ModelResult<()> {
        if !(self.my_value.is_finite() && self.my_value >= T::zero()) {
            return Err(ModelError::BadConfig(format!(
                "my_value must be >= 0, got {}",
                self.my_value
            )));
        }
        self.opponent_value_dist.validate()?;
        self.fraction_dist.validate()?;
        check_fraction_support(&self.fraction_dist)?;
        if let Some(m) = &self.mirror {
            m.value_dist.validate()?;
            m.fraction_dist.validate()?;
            check_fraction_support(&m.fraction_dist)?;
        }
        if let Some(v) = &self.my_value_dist {
            v.validate()?;
        }
        BidGrid::new(self.grid.lo, self.grid.hi, self.grid.points).map(|_| ())
    }
}

/// A win-probability curve on a bid grid with linear interpolation between
/// points; monotone nondecreasing with range in [0, 1].
#[derive(Debug, Clone)]
pub struct BidCdf<T> {
    bids: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> BidCdf<T> {
    pub fn new(bids: Vec<T>, probs: Vec<T>) -> ModelResult<Self> {
        if bids.len() != probs.len() || bids.len() < 2 {
            return Err(ModelError::BadConfig(
                "bid CDF needs equally many bids and probabilities (>= 2)".into(),
            ));
        }
        if bids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::BadConfig("bid grid must be strictly increasing".into()));
        }
        let slack = T::c(1e-6);
        let mut cleaned = Vec::with_capacity(probs.len());
        let mut running = T::zero();
        for p in &probs {
            if !p.is_finite() || *p < -slack || *p > T::one() + slack {
                return Err(ModelError::BadConfig(format!("bid CDF value {p} outside [0, 1]")));
            }
            if *p < running - slack {
                return Err(ModelError::BadConfig("bid CDF must be nondecreasing".into()));
            }
            running = running.max(p.clamp(T::zero(), T::one()));
            cleaned.push(running);
        }
        Ok(BidCdf {
            bids,
            probs: cleaned,
        })
    }

    pub fn from_fn(grid: &BidGrid<T>, f: impl Fn(T) -> T) -> ModelResult<Self> {
        let bids = grid.axis();
        let probs = bids.iter().map(|&x| f(x)).collect();
        Self::new(bids, probs)
    }

    pub fn bids(&self) -> &[T] {
        &self.bids
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Clamped linear interpolation.
    pub fn evaluate(&self, x: T) -> T {
        let n = self.bids.len();
        if x <= self.bids[0] {
            return self.probs[0];
        }
        if x >= self.bids[n - 1] {
            return self.probs[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.bids[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (x - self.bids[lo]) / (self.bids[hi] - self.bids[lo]);
        self.probs[lo] + w * (self.probs[hi] - self.probs[lo])
    }

    pub fn sup_norm_against(&self, f: impl Fn(T) -> T) -> T {
        self.bids
            .iter()
            .zip(&self.probs)
            .map(|(&b, &p)| (p - f(b)).abs())
            .fold(T::zero(), |acc, d| acc.max(d))
    }
}

/// `F(x) = P[pV <= x]` for fraction `p` and value `V` (both independent):
/// the non-strategic opponent's bid distribution. Atomic specs are summed
/// exactly; the continuous-continuous case integrates `h(v) G(x/v)` by
/// adaptive Simpson quadrature to absolute tolerance 1e-6 per grid point.
pub fn nonstrategic_bid_cdf<T: Real>(
    value_dist: &DistributionSpec<T>,
    fraction_dist: &DistributionSpec<T>,
    grid: &BidGrid<T>,
) -> SolveResult<BidCdf<T>> {
    value_dist.validate()?;
    fraction_dist.validate()?;
    check_fraction_support(fraction_dist)?;
    let bids = grid.axis();

    let atoms_of = |d: &DistributionSpec<T>| -> Option<Vec<(T, T)>> {
        match d {
            DistributionSpec::PointMass { value } => Some(vec![(*value, T::one())]),
            DistributionSpec::Categorical { values, probs } => {
                Some(values.iter().copied().zip(probs.iter().copied()).collect())
            }
            _ => None,
        }
    };

    let probs: Vec<T> = if let Some(values) = atoms_of(value_dist) {
        // F(x) = sum_i w_i G(x / v_i)
        bids.iter()
            .map(|&x| {
                let mut acc = T::zero();
                for &(v, w) in &values {
                    let g = if v > T::zero() {
                        fraction_dist.cdf(x / v).expect("univariate fraction")
                    } else if x >= T::zero() {
                        T::one()
                    } else {
                        T::zero()
                    };
                    acc += w * g;
                }
                acc
            })
            .collect()
    } else if let Some(fracs) = atoms_of(fraction_dist) {
        // F(x) = sum_j q_j H(x / p_j)
        bids.iter()
            .map(|&x| {
                let mut acc = T::zero();
                for &(p, q) in &fracs {
                    let h = if p > T::zero() {
                        value_dist.cdf(x / p).expect("univariate value")
                    } else if x >= T::zero() {
                        T::one()
                    } else {
                        T::zero()
                    };
                    acc += q * h;
                }
                acc
            })
            .collect()
    } else {
        let (v_lo, v_hi) = value_dist.support();
        let tol = T::c(1e-6);
        let mut out = Vec::with_capacity(bids.len());
        for &x in &bids {
            let f = |v: T| -> T {
                let h = value_dist.pdf(v).expect("continuous value density");
                if v <= T::zero() {
                    return if x >= T::zero() { h } else { T::zero() };
                }
                h * fraction_dist.cdf(x / v).expect("univariate fraction")
            };
            let integral = crate::numeric::adaptive_simpson(f, v_lo, v_hi, tol)?;
            out.push(integral.clamp(T::zero(), T::one()));
        }
        out
    };
    Ok(BidCdf::new(bids, probs)?)
}

/// Result of a bid optimization.
#[derive(Debug, Clone, Copy)]
pub struct BidOutcome<T> {
    pub bid: T,
    pub expected_profit: T,
    /// False when no grid point yields positive profit; the bid is then the
    /// grid's lower end.
    pub profitable: bool,
}

/// Bid-unit tolerance of the golden-section refinement.
const BID_TOL: f64 = 1e-4;

/// `x* = argmax (x0 - x) F(x)` over the CDF's grid, refined by
/// golden-section search in the best grid cell.
pub fn optimal_bid<T: Real>(x0: T, cdf: &BidCdf<T>) -> BidOutcome<T> {
    let profit = |x: T| (x0 - x) * cdf.evaluate(x);
    let n = cdf.bids.len();
    let mut best = 0usize;
    let mut best_val = profit(cdf.bids[0]);
    for i in 1..n {
        let v = (x0 - cdf.bids[i]) * cdf.probs[i];
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    if best_val <= T::zero() {
        return BidOutcome {
            bid: cdf.bids[0],
            expected_profit: profit(cdf.bids[0]),
            profitable: false,
        };
    }
    let lo = cdf.bids[best.saturating_sub(1)];
    let hi = cdf.bids[(best + 1).min(n - 1)];
    let (x, v) = golden_section_max(profit, lo, hi, T::c(BID_TOL));
    if v >= best_val {
        BidOutcome {
            bid: x,
            expected_profit: v,
            profitable: true,
        }
    } else {
        BidOutcome {
            bid: cdf.bids[best],
            expected_profit: best_val,
            profitable: true,
        }
    }
}

/// Level-1 best response: the optimal bid of a bidder with value `value`
/// against a belief CDF over the opponent's bid.
pub fn level1_best_response<T: Real>(belief: &BidCdf<T>, value: T) -> BidOutcome<T> {
    optimal_bid(value, belief)
}

/// Resolution of the value axis used for best-response maps.
const VALUE_GRID_POINTS: usize = 801;

fn value_axis<T: Real>(dist: &DistributionSpec<T>) -> Vec<T> {
    let (lo, hi) = dist.support();
    if hi <= lo {
        vec![lo]
    } else {
        linspace(lo, hi, VALUE_GRID_POINTS)
    }
}

/// Monotone best-response map `v -> b*(v)` against a belief CDF. Values
/// with no profitable bid map to truthful bids: they lose either way, and
/// parking them at the grid bottom would manufacture an atom there that
/// the other side could profitably tie against, collapsing the iteration
/// into a spurious everyone-bids-low state.
fn best_response_map<T: Real>(belief: &BidCdf<T>, values: &[T]) -> Vec<(T, T)> {
    let lo = belief.bids[0];
    let hi = belief.bids[belief.bids.len() - 1];
    let mut out = Vec::with_capacity(values.len());
    let mut running = T::neg_infinity();
    for &v in values {
        let best = optimal_bid(v, belief);
        let b = if best.profitable {
            best.bid
        } else {
            v.clamp(lo, hi)
        };
        running = running.max(b);
        out.push((v, running));
    }
    out
}

/// Symmetric moving average over the bid coordinate, then re-monotonize.
/// The best-response argmax is not Lipschitz in the CDF (an O(eps) wiggle
/// moves it by O(sqrt(eps))), so iterating raw maps amplifies grid noise
/// into staircases; averaging suppresses the noise and is exactly unbiased
/// wherever the map is locally linear. Windows shrink symmetrically at the
/// edges.
fn smooth_map<T: Real>(map: &mut [(T, T)]) {
    let n = map.len();
    if n < 5 {
        return;
    }
    let h = (n / 40).max(1);
    let orig: Vec<T> = map.iter().map(|p| p.1).collect();
    for (i, entry) in map.iter_mut().enumerate() {
        let hw = h.min(i).min(n - 1 - i);
        let mut acc = T::zero();
        for v in &orig[i - hw..=i + hw] {
            acc += *v;
        }
        entry.1 = acc / T::from_usize_c(2 * hw + 1);
    }
    let mut run = T::neg_infinity();
    for p in map.iter_mut() {
        run = run.max(p.1);
        p.1 = run;
    }
}

/// `P[b(V) <= x]` for a monotone map given as grid pairs, evaluated on
/// `out_grid` through the value distribution's CDF.
fn pushforward_cdf<T: Real>(
    value_dist: &DistributionSpec<T>,
    map: &[(T, T)],
    out_grid: &[T],
) -> ModelResult<Vec<T>> {
    let n = map.len();
    let mut probs = Vec::with_capacity(out_grid.len());
    for &x in out_grid {
        let p = if n == 1 {
            if map[0].1 <= x {
                T::one()
            } else {
                T::zero()
            }
        } else if x < map[0].1 {
            T::zero()
        } else if x >= map[n - 1].1 {
            T::one()
        } else {
            // largest v with b(v) <= x, interpolated within the crossing cell
            let mut lo = 0usize;
            let mut hi = n - 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if map[mid].1 <= x {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (v_lo, b_lo) = map[lo];
            let (v_hi, b_hi) = map[hi];
            let v_star = if b_hi > b_lo {
                v_lo + (x - b_lo) / (b_hi - b_lo) * (v_hi - v_lo)
            } else {
                v_lo
            };
            value_dist.cdf(v_star)?
        };
        probs.push(p);
    }
    Ok(probs)
}

/// Everything the level-2 analysis produced.
#[derive(Debug, Clone)]
pub struct Level2Report<T> {
    /// My optimal bid against his predicted bid distribution.
    pub optimal: BidOutcome<T>,
    /// His predicted bid CDF (step iii).
    pub opponent_bid_cdf: BidCdf<T>,
    /// The belief about my bids I ascribe to him (step i).
    pub mirror_belief_cdf: BidCdf<T>,
    /// His level-1 best-response map value -> bid (step ii).
    pub best_response_map: Vec<(T, T)>,
}

/// Level-2 pipeline: build his belief about my bids from the mirrored
/// specs, compute his level-1 best-response map, push my distribution over
/// his value through that map, and bid optimally against the result.
pub fn level2_analysis<T: Real>(spec: &AuctionSpec<T>) -> SolveResult<Level2Report<T>> {
    spec.validate()?;
    let mirror = spec.mirror.as_ref().ok_or_else(|| {
        ModelError::BadConfig("level-2 analysis requires mirrored value/fraction specs".into())
    })?;
    let mirror_belief = nonstrategic_bid_cdf(&mirror.value_dist, &mirror.fraction_dist, &spec.grid)?;
    let values = value_axis(&spec.opponent_value_dist);
    let map = best_response_map(&mirror_belief, &values);
    let bids = spec.grid.axis();
    let probs = pushforward_cdf(&spec.opponent_value_dist, &map, &bids)?;
    let opponent_bid_cdf = BidCdf::new(bids, probs)?;
    let optimal = optimal_bid(spec.my_value, &opponent_bid_cdf);
    Ok(Level2Report {
        optimal,
        opponent_bid_cdf,
        mirror_belief_cdf: mirror_belief,
        best_response_map: map,
    })
}

/// Convergence record of the mirror-equilibrium iteration.
#[derive(Debug, Clone)]
pub struct MirrorDiagnostics<T> {
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm change of the bid CDFs per iteration.
    pub residuals: Vec<T>,
}

/// Consecutive non-improving iterations tolerated before the iteration
/// switches from plain replacement to fictitious-play averaging. Undamped
/// best-response dynamics for this system are unstable (perturbations
/// amplify each round); averaging stabilizes the oscillation, while
/// degenerate instances still converge in a few undamped steps.
const MIRROR_STAGNATION_LIMIT: usize = 2;

/// Discretized best-response iteration for the two-bidder mirror system:
/// each side's bid CDF is pulled toward the pushforward of their value
/// distribution through the best response to the other's current bid CDF,
/// starting from truthful bidding. The reported residual is the sup-norm
/// distance between a CDF and its best-response image, so it measures
/// distance from equilibrium. Non-convergence within `max_iter` is
/// reported in the diagnostics, not raised as an error.
pub fn mirror_equilibrium<T: Real>(
    my_value_dist: &DistributionSpec<T>,
    opp_value_dist: &DistributionSpec<T>,
    grid: &BidGrid<T>,
    tol: T,
    max_iter: usize,
) -> SolveResult<(BidCdf<T>, BidCdf<T>, MirrorDiagnostics<T>)> {
    my_value_dist.validate()?;
    opp_value_dist.validate()?;
    if tol <= T::zero() {
        return Err(ModelError::BadConfig("mirror tolerance must be > 0".into()).into());
    }
    let bids = grid.axis();
    let truthful = |dist: &DistributionSpec<T>| -> ModelResult<BidCdf<T>> {
        let probs = bids
            .iter()
            .map(|&x| dist.cdf(x))
            .collect::<ModelResult<Vec<T>>>()?;
        BidCdf::new(bids.clone(), probs)
    };
    let my_values = value_axis(my_value_dist);
    let opp_values = value_axis(opp_value_dist);
    let mut f_d = truthful(my_value_dist)?;
    let mut f_a = truthful(opp_value_dist)?;

    let mix = |avg: &BidCdf<T>, target: &BidCdf<T>, w: T| -> ModelResult<BidCdf<T>> {
        let probs = avg
            .probs
            .iter()
            .zip(&target.probs)
            .map(|(o, t)| *o + w * (*t - *o))
            .collect();
        BidCdf::new(avg.bids.clone(), probs)
    };

    let mut residuals: Vec<T> = Vec::new();
    let mut converged = false;
    let mut iterations = 0usize;
    let mut best: Option<(T, BidCdf<T>, BidCdf<T>)> = None;
    let mut stagnant = 0usize;
    let mut averaging_since: Option<usize> = None;
    for n in 0..max_iter {
        iterations += 1;
        // both sides respond to the other side's current iterate (Jacobi)
        let mut map_a = best_response_map(&f_d, &opp_values);
        smooth_map(&mut map_a);
        let target_a =
            BidCdf::new(bids.clone(), pushforward_cdf(opp_value_dist, &map_a, &bids)?)?;
        let mut map_d = best_response_map(&f_a, &my_values);
        smooth_map(&mut map_d);
        let target_d =
            BidCdf::new(bids.clone(), pushforward_cdf(my_value_dist, &map_d, &bids)?)?;

        // residual: sup-norm distance between each CDF and its
        // best-response image (distance from equilibrium)
        let resid = sup_diff(&f_a, &target_a).max(sup_diff(&f_d, &target_d));
        residuals.push(resid);
        if best.as_ref().is_none_or(|(b, _, _)| resid < *b) {
            best = Some((resid, f_d.clone(), f_a.clone()));
            stagnant = 0;
        } else {
            stagnant += 1;
            if averaging_since.is_none() && stagnant >= MIRROR_STAGNATION_LIMIT {
                averaging_since = Some(n);
            }
        }
        if resid < tol {
            converged = true;
            break;
        }
        let w = match averaging_since {
            // fictitious-play weights once oscillation is detected
            Some(n0) => T::one() / T::from_usize_c(n - n0 + 2),
            None => T::one(),
        };
        f_a = mix(&f_a, &target_a, w)?;
        f_d = mix(&f_d, &target_d, w)?;
    }
    if !converged {
        if let Some((_, bd, ba)) = best {
            f_d = bd;
            f_a = ba;
        }
    }
    Ok((
        f_d,
        f_a,
        MirrorDiagnostics {
            converged,
            iterations,
            residuals,
        },
    ))
}

fn sup_diff<T: Real>(a: &BidCdf<T>, b: &BidCdf<T>) -> T {
    a.probs
        .iter()
        .zip(&b.probs)
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), |acc, d| acc.max(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(lo: f64, hi: f64, n: usize) -> BidGrid<f64> {
        BidGrid::new(lo, hi, n).unwrap()
    }

    #[test]
    fn point_mass_fraction_gives_scaled_triangular() {
        // 0.9 x Triangular(140,170,200) == Triangular(126,153,180)
        let f = nonstrategic_bid_cdf(
            &DistributionSpec::Triangular { lo: 140.0, mode: 170.0, hi: 200.0 },
            &DistributionSpec::PointMass { value: 0.9 },
            &grid(100.0, 200.0, 2001),
        )
        .unwrap();
        let target = DistributionSpec::Triangular { lo: 126.0, mode: 153.0, hi: 180.0 };
        let sup = f.sup_norm_against(|x| target.cdf(x).unwrap());
        assert!(sup < 1e-6, "sup-norm {sup}");
    }

    #[test]
    fn unit_fraction_is_the_identity_transform() {
        let value = DistributionSpec::Uniform { lo: 10.0, hi: 20.0 };
        let f = nonstrategic_bid_cdf(
            &value,
            &DistributionSpec::PointMass { value: 1.0 },
            &grid(5.0, 25.0, 401),
        )
        .unwrap();
        let sup = f.sup_norm_against(|x| value.cdf(x).unwrap());
        assert!(sup < 1e-12, "sup-norm {sup}");
    }

    #[test]
    fn continuous_case_matches_monte_carlo_oracle() {
        use crate::rng::{sample_stream, Purpose};
        let value = DistributionSpec::Uniform { lo: 100.0, hi: 200.0 };
        let frac = DistributionSpec::Power { k: 9.0 };
        let g = grid(0.0, 200.0, 201);
        let f = nonstrategic_bid_cdf(&value, &frac, &g).unwrap();
        // oracle: 10^6 product draws
        let n = 1_000_000u64;
        let mut products: Vec<f64> = Vec::with_capacity(n as usize);
        let mut rng = sample_stream(1234, Purpose::External, 0);
        for _ in 0..n {
            let v = value.sample(&mut rng).unwrap();
            let p = frac.sample(&mut rng).unwrap();
            products.push(p * v);
        }
        products.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst: f64 = 0.0;
        for (i, &b) in f.bids().iter().enumerate() {
            let emp = products.partition_point(|&x| x <= b) as f64 / n as f64;
            worst = worst.max((emp - f.probs()[i]).abs());
        }
        assert!(worst < 0.003, "sup-norm {worst} vs MC oracle");
    }

    #[test]
    fn textbook_quadratic_bid() {
        // F(x) = x on [0,1], value 1: best bid 0.5, profit 0.25
        let f = BidCdf::from_fn(&grid(0.0, 1.0, 1001), |x| x).unwrap();
        let out = optimal_bid(1.0, &f);
        assert!(out.profitable);
        assert_abs_diff_eq!(out.bid, 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(out.expected_profit, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn step_cdf_bids_just_over_the_step() {
        let g = grid(0.0, 10.0, 1001);
        let f = BidCdf::from_fn(&g, |x| if x >= 4.0 { 1.0 } else { 0.0 }).unwrap();
        let out = optimal_bid(9.0, &f);
        assert!(out.profitable);
        assert!((out.bid - 4.0).abs() <= g.step() + 1e-9, "bid {}", out.bid);
    }

    #[test]
    fn no_profitable_bid_returns_grid_lo() {
        let f = BidCdf::from_fn(&grid(5.0, 10.0, 101), |x| (x - 5.0) / 5.0).unwrap();
        let out = optimal_bid(2.0, &f);
        assert!(!out.profitable);
        assert_eq!(out.bid, 5.0);
    }

    #[test]
    fn power_belief_yields_ninety_percent_shading() {
        // F(a) = (a/200)^9: best response is 0.9 * value
        let f = BidCdf::from_fn(&grid(0.0, 200.0, 2001), |x| (x / 200.0).powi(9)).unwrap();
        let out = level1_best_response(&f, 170.0);
        assert_abs_diff_eq!(out.bid, 153.0, epsilon = 0.05);
        let boundary = level1_best_response(&f, 200.0);
        assert_abs_diff_eq!(boundary.bid, 180.0, epsilon = 0.05);
    }

    #[test]
    fn interior_optimum_has_small_foc_residual() {
        let f = BidCdf::from_fn(&grid(0.0, 1.0, 4001), |x| x * x).unwrap();
        let out = optimal_bid(0.9, &f);
        // finite-difference derivative of (x0 - a) F(a) at the optimum
        let h = 1e-4;
        let g = |a: f64| (0.9 - a) * f.evaluate(a);
        let residual = ((g(out.bid + h) - g(out.bid - h)) / (2.0 * h)).abs();
        assert!(residual < 1e-4 * 0.9, "FOC residual {residual}");
    }

    #[test]
    fn shading_factor_generalizes_to_k_over_k_plus_one() {
        for k in 1..=12 {
            let f = BidCdf::from_fn(&grid(0.0, 200.0, 4001), |x| (x / 200.0).powi(k)).unwrap();
            let a0 = 170.0;
            let out = level1_best_response(&f, a0);
            let want = k as f64 / (k as f64 + 1.0);
            assert!(
                (out.bid / a0 - want).abs() < 1e-3,
                "k = {k}: ratio {} vs {want}",
                out.bid / a0
            );
        }
    }

    fn full_spec() -> AuctionSpec<f64> {
        AuctionSpec {
            my_value: 175.0,
            opponent_value_dist: DistributionSpec::Triangular { lo: 140.0, mode: 170.0, hi: 200.0 },
            fraction_dist: DistributionSpec::Power { k: 9.0 },
            grid: grid(0.0, 200.0, 2001),
            mirror: Some(MirrorAuctionBeliefs {
                value_dist: DistributionSpec::PointMass { value: 200.0 },
                fraction_dist: DistributionSpec::Power { k: 9.0 },
            }),
            my_value_dist: Some(DistributionSpec::Uniform { lo: 100.0, hi: 200.0 }),
            currency: Some("$".into()),
        }
    }

    #[test]
    fn level2_reproduces_the_triangular_bid_distribution() {
        // mirror belief (x/200)^9 -> response map 0.9v -> his bids are
        // 0.9 x Triangular(140,170,200) = Triangular(126,153,180)
        let report = level2_analysis(&full_spec()).unwrap();
        let target = DistributionSpec::Triangular { lo: 126.0, mode: 153.0, hi: 180.0 };
        let sup = report
            .opponent_bid_cdf
            .sup_norm_against(|x| target.cdf(x).unwrap());
        assert!(sup <= 0.01, "sup-norm {sup}");
        assert!(report.optimal.profitable);
    }

    #[test]
    fn level2_point_mass_value_gives_point_mass_bid() {
        let mut spec = full_spec();
        spec.opponent_value_dist = DistributionSpec::PointMass { value: 170.0 };
        let report = level2_analysis(&spec).unwrap();
        // his bid is a point mass at his level-1 best response (0.9 * 170)
        let br = level1_best_response(&report.mirror_belief_cdf, 170.0).bid;
        assert_abs_diff_eq!(report.opponent_bid_cdf.evaluate(br - 0.5), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.opponent_bid_cdf.evaluate(br + 0.5), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(br, 153.0, epsilon = 0.05);
    }

    #[test]
    fn pushforward_matches_sampling_oracle() {
        use crate::rng::{sample_stream, Purpose};
        let report = level2_analysis(&full_spec()).unwrap();
        let value = DistributionSpec::Triangular { lo: 140.0, mode: 170.0, hi: 200.0 };
        let n = 1_000_000u64;
        let mut rng = sample_stream(555, Purpose::External, 1);
        let mut bids: Vec<f64> = Vec::with_capacity(n as usize);
        let map = &report.best_response_map;
        for _ in 0..n {
            let v = value.sample(&mut rng).unwrap();
            // apply the map by interpolation
            let i = map.partition_point(|&(mv, _)| mv <= v).min(map.len() - 1).max(1);
            let (v0, b0) = map[i - 1];
            let (v1, b1) = map[i];
            let b = if v1 > v0 { b0 + (v - v0) / (v1 - v0) * (b1 - b0) } else { b0 };
            bids.push(b);
        }
        bids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst: f64 = 0.0;
        for (i, &x) in report.opponent_bid_cdf.bids().iter().enumerate() {
            let emp = bids.partition_point(|&b| b <= x) as f64 / n as f64;
            worst = worst.max((emp - report.opponent_bid_cdf.probs()[i]).abs());
        }
        assert!(worst <= 0.005, "pushforward vs sampling oracle: {worst}");
    }

    #[test]
    fn symmetric_uniform_mirror_converges_to_half_value() {
        let u = DistributionSpec::Uniform { lo: 0.0, hi: 1.0 };
        let (f_d, f_a, diag) =
            mirror_equilibrium(&u, &u, &grid(0.0, 1.0, 1001), 1e-4, 50).unwrap();
        assert!(diag.converged, "residuals: {:?}", diag.residuals);
        // fixed point approximates b(v) = v/2: bid CDF = CDF of V/2
        let target = |x: f64| (2.0 * x).clamp(0.0, 1.0);
        assert!(f_a.sup_norm_against(target) < 0.02);
        assert!(f_d.sup_norm_against(target) < 0.02);
    }

    #[test]
    fn point_mass_values_fix_in_one_iteration() {
        let d = DistributionSpec::PointMass { value: 0.8 };
        let a = DistributionSpec::PointMass { value: 0.6 };
        let (_, _, diag) = mirror_equilibrium(&d, &a, &grid(0.0, 1.0, 501), 1e-6, 20).unwrap();
        assert!(diag.converged);
        assert!(diag.iterations <= 3, "iterations {}", diag.iterations);
    }

    #[test]
    fn asymmetric_instance_always_reports_diagnostics() {
        let d = DistributionSpec::Uniform { lo: 0.0, hi: 1.0 };
        let a = DistributionSpec::Triangular { lo: 0.2, mode: 0.7, hi: 1.0 };
        let (_, _, diag) = mirror_equilibrium(&d, &a, &grid(0.0, 1.0, 501), 1e-5, 8).unwrap();
        assert_eq!(diag.residuals.len(), diag.iterations);
        assert!(!diag.residuals.is_empty());
    }

    #[test]
    fn bid_cdf_rejects_decreasing_input() {
        let r = BidCdf::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.2, 0.9]);
        assert!(r.is_err());
        let r = BidCdf::new(vec![0.0, 1.0], vec![0.0, 1.5]);
        assert!(r.is_err());
    }

    #[test]
    fn optimal_bid_never_exceeds_value_when_profit_exists() {
        let f = BidCdf::from_fn(&grid(0.0, 10.0, 501), |x| (x / 10.0).powi(2)).unwrap();
        for x0 in [1.0, 3.0, 7.5, 9.9] {
            let out = optimal_bid(x0, &f);
            assert!(out.profitable);
            assert!(out.bid <= x0 + 1e-9);
        }
    }

    /// Empirical CDF of sampled p*v products within DKW bounds of Eq-style
    /// pushforward at 1e5 samples.
    #[test]
    fn pushforward_consistent_with_dkw_band() {
        use crate::rng::{sample_stream, Purpose};
        let value = DistributionSpec::Triangular { lo: 140.0, mode: 170.0, hi: 200.0 };
        let frac = DistributionSpec::Beta { alpha: 8.0, beta: 2.0 };
        let g = grid(0.0, 200.0, 401);
        let f = nonstrategic_bid_cdf(&value, &frac, &g).unwrap();
        let n = 100_000u64;
        let mut rng = sample_stream(9090, Purpose::External, 2);
        let mut prods: Vec<f64> = Vec::with_capacity(n as usize);
        for _ in 0..n {
            prods.push(value.sample(&mut rng).unwrap() * frac.sample(&mut rng).unwrap());
        }
        prods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // DKW with delta = 1e-6
        let eps = ((2.0f64 / 1e-6).ln() / (2.0 * n as f64)).sqrt();
        for (i, &b) in f.bids().iter().enumerate() {
            let emp = prods.partition_point(|&x| x <= b) as f64 / n as f64;
            assert!(
                (emp - f.probs()[i]).abs() <= eps + 1e-6,
                "at bid {b}: |{emp} - {}| > {eps}",
                f.probs()[i]
            );
        }
    }
}
