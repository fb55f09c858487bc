//! Analytic decision rules and baselines.
//!
//! Under the simplified network model the per-packet success probability
//! depends only on the number of active transmitters, `P(n)`, and every
//! sensor pays the same weighted cost `wc`. The centralized optimum then has
//! a greedy form: order sensors by `g_i(n) = P(n) v_i - wc` (the order does
//! not depend on `n` when costs are equal) and grow the prefix until the
//! objective stops improving. Distributed execution replaces the boundary
//! tie group with a shared transmit probability chosen to maximize the
//! group's expected reward.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::AnalyticKind;
use crate::core::{Error, Result};
use crate::learn::{IqlConfig, PgConfig};

/// Hard cap for exhaustive subset enumeration.
pub const BRUTE_FORCE_MAX_SENSORS: usize = 20;

/// How an asynchronous sensor's view of other sensors' data values goes
/// stale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Staleness {
    /// Each sensor's value is known from the last step at which it
    /// transmitted successfully (0 before its first success).
    LastSuccess,
    /// Values are a fixed number of steps old.
    FixedLag { lag: u32 },
}

impl Default for Staleness {
    fn default() -> Self {
        Staleness::LastSuccess
    }
}

/// A named decision rule, as selected in the experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Full-information centralized greedy optimum (upper bound).
    CentralizedGreedy,
    /// Full-information distributed stochastic optimum.
    StochasticUniform,
    /// Transmit whenever the local bit differs from the estimated belief.
    Heuristic,
    /// Mismatch-gated Bernoulli with fixed probability.
    RandomP { p: f64 },
    /// Stochastic optimum computed from stale views of other sensors.
    OptimalAsync {
        #[serde(default)]
        staleness: Staleness,
    },
    /// Independent tabular Q-learning with a softmax policy.
    Iql(IqlConfig),
    /// Bernoulli policy-gradient agents.
    Pg(PgConfig),
}

impl PolicySpec {
    /// Stable name used in CSV output.
    pub fn name(&self) -> String {
        match self {
            PolicySpec::CentralizedGreedy => "centralized_greedy".into(),
            PolicySpec::StochasticUniform => "stochastic_uniform".into(),
            PolicySpec::Heuristic => "heuristic".into(),
            PolicySpec::RandomP { p } => format!("random_p_{p}"),
            PolicySpec::OptimalAsync { .. } => "optimal_async".into(),
            PolicySpec::Iql(cfg) => match cfg.reward_mode {
                crate::learn::RewardMode::EnvSen => "iql".into(),
                crate::learn::RewardMode::GlobalSum => "iql_global_sum".into(),
                crate::learn::RewardMode::TrackingAccuracy => "iql_tracking".into(),
            },
            PolicySpec::Pg(cfg) => {
                if cfg.feedback {
                    "pg_fb".into()
                } else {
                    "pg".into()
                }
            }
        }
    }

    pub fn is_learned(&self) -> bool {
        matches!(self, PolicySpec::Iql(_) | PolicySpec::Pg(_))
    }
}

/// Result of the centralized greedy search.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySelection {
    pub selected: BTreeSet<usize>,
    pub objective: f64,
}

fn require_equal_costs(costs: &[f64]) -> Result<f64> {
    let first = *costs.first().unwrap_or(&0.0);
    if costs.iter().any(|&c| c != first) {
        return Err(Error::UnequalCosts);
    }
    Ok(first)
}

/// Indices sorted by value descending, ties broken by ascending id.
fn order_by_value(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Centralized greedy optimum for equal weighted costs: grow the
/// value-sorted prefix while the objective `sum_i (P(n) v_i - wc)` keeps
/// improving (ties keep growing), and return the best prefix. The empty set
/// scores 0.
pub fn centralized_greedy(
    values: &[f64],
    costs: &[f64],
    p: impl Fn(u32) -> f64,
) -> Result<GreedySelection> {
    let wc = require_equal_costs(costs)?;
    let order = order_by_value(values);
    let mut best = GreedySelection {
        selected: BTreeSet::new(),
        objective: 0.0,
    };
    for n in 1..=values.len() {
        let pn = p(n as u32);
        let mut g = 0.0;
        for &i in &order[..n] {
            g += pn * values[i] - wc;
        }
        if g >= best.objective {
            best.objective = g;
            best.selected = order[..n].iter().cloned().collect();
        } else {
            break;
        }
    }
    Ok(best)
}

/// Exhaustive subset enumeration of the same objective; handles unequal
/// costs. Rejected above [`BRUTE_FORCE_MAX_SENSORS`] sensors.
pub fn brute_force_best_subset(
    values: &[f64],
    costs: &[f64],
    p: impl Fn(u32) -> f64,
) -> Result<GreedySelection> {
    let n = values.len();
    if n > BRUTE_FORCE_MAX_SENSORS {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_SENSORS,
        });
    }
    if costs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: costs.len(),
        });
    }
    let mut best = GreedySelection {
        selected: BTreeSet::new(),
        objective: 0.0,
    };
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones();
        if size == 0 {
            continue;
        }
        let pn = p(size);
        let mut g = 0.0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                g += pn * values[i] - costs[i];
            }
        }
        if g > best.objective {
            best.objective = g;
            best.selected = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        }
    }
    Ok(best)
}

/// Integer argmax of `n (v P(n) - wc)` over `0..=n_max`, ties toward
/// smaller `n`.
pub fn argmax_n(value: f64, unit_cost: f64, p: impl Fn(u32) -> f64, n_max: usize) -> u32 {
    let mut best_n = 0u32;
    let mut best = 0.0f64;
    for n in 1..=n_max as u32 {
        let g = n as f64 * (value * p(n) - unit_cost);
        if g > best {
            best = g;
            best_n = n;
        }
    }
    best_n
}

/// Optimal number of uniform sensors to report on an analytic channel.
///
/// Closed forms: on the bandwidth-limited channel the answer is 0 when
/// `wc/v >= 1 - eps` and the full capacity otherwise; on the random-access
/// channel it is 0 when `wc/v >= 1/e` and `floor(A/2)` (the
/// throughput-maximizing load) otherwise. For arbitrary curves use
/// [`argmax_n`], the exact integer search.
pub fn optimal_n_uniform(value: f64, unit_cost: f64, model: &AnalyticKind, n_max: usize) -> u32 {
    if value <= 0.0 {
        return 0;
    }
    let ratio = unit_cost / value;
    match *model {
        AnalyticKind::BandwidthLimited { capacity, epsilon } => {
            if ratio >= 1.0 - epsilon {
                0
            } else {
                capacity.min(n_max as u32)
            }
        }
        AnalyticKind::Aloha { window_ratio } => {
            if ratio >= (-1.0f64).exp() {
                0
            } else {
                ((window_ratio / 2.0).floor() as u32).min(n_max as u32)
            }
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Expected group reward when `m` tied sensors each transmit with
/// probability `p` and `j` simultaneous transmitters from the group earn
/// `j * phi(j)`:
/// `J(p) = sum_{j=1}^m C(m,j) p^j (1-p)^{m-j} j phi(j)`.
fn binomial_group_reward(m: usize, p: f64, ln_fact: &[f64], phi: &impl Fn(u32) -> f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return m as f64 * phi(m as u32);
    }
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_fact_m = ln_fact[m];
    let mut total = 0.0;
    for j in 1..=m {
        let ln_pmf = ln_fact_m - ln_fact[j] - ln_fact[m - j]
            + j as f64 * ln_p
            + (m - j) as f64 * ln_q;
        total += ln_pmf.exp() * j as f64 * phi(j as u32);
    }
    total
}

/// Maximize the binomial group reward over `p in [0, 1]`: grid search at
/// 1e-4 resolution followed by golden-section refinement around the best
/// grid point. Ties go to the smaller probability. Returns `(p, J(p))`.
pub fn maximize_binomial_reward(m: usize, phi: impl Fn(u32) -> f64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 0.0);
    }
    let ln_fact = ln_factorials(m);
    let eval = |p: f64| binomial_group_reward(m, p, &ln_fact, &phi);

    const STEPS: usize = 10_000;
    let mut best_p = 0.0;
    let mut best_j = eval(0.0);
    for k in 1..=STEPS {
        let p = k as f64 / STEPS as f64;
        let j = eval(p);
        if j > best_j {
            best_j = j;
            best_p = p;
        }
    }

    // Golden-section refinement on the bracketing interval.
    let step = 1.0 / STEPS as f64;
    let mut lo = (best_p - step).max(0.0);
    let mut hi = (best_p + step).min(1.0);
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    let refined = 0.5 * (lo + hi);
    let refined_j = eval(refined);
    if refined_j > best_j {
        (refined, refined_j)
    } else {
        (best_p, best_j)
    }
}

/// Optimal common transmit probability for `n` uniform sensors with data
/// value `v` and weighted cost `wc` on the channel curve `p`.
pub fn optimal_p_uniform(value: f64, unit_cost: f64, p: impl Fn(u32) -> f64, n: usize) -> f64 {
    maximize_binomial_reward(n, |j| value * p(j) - unit_cost).0
}

/// Distributed stochastic optimum with full information: per-sensor
/// transmit probabilities. Sensors strictly above the selection boundary
/// transmit deterministically; the boundary tie group shares the
/// probability that maximizes its expected group reward; everyone else
/// stays silent.
pub fn stochastic_mixed(
    values: &[f64],
    costs: &[f64],
    p: impl Fn(u32) -> f64,
) -> Result<Vec<f64>> {
    let wc = require_equal_costs(costs)?;
    let n_total = values.len();
    let order = order_by_value(values);

    // Optimal transmit count: argmax of the sorted-prefix objective,
    // ties toward smaller n.
    let mut best_n = 0usize;
    let mut best_obj = 0.0f64;
    for n in 1..=n_total {
        let pn = p(n as u32);
        let mut g = 0.0;
        for &i in &order[..n] {
            g += pn * values[i] - wc;
        }
        if g > best_obj {
            best_obj = g;
            best_n = n;
        }
    }
    let mut probs = vec![0.0; n_total];
    if best_n == 0 {
        return Ok(probs);
    }

    let boundary_value = values[order[best_n - 1]];
    let k = values.iter().filter(|&&v| v > boundary_value).count();
    let m = values.iter().filter(|&&v| v == boundary_value).count();

    if k + m == best_n {
        // The tie group fits exactly: everyone in the top best_n transmits.
        for &i in &order[..best_n] {
            probs[i] = 1.0;
        }
        return Ok(probs);
    }

    let (shared_p, _) =
        maximize_binomial_reward(m, |j| p(k as u32 + j) * boundary_value - wc);
    for (i, &v) in values.iter().enumerate() {
        if v > boundary_value {
            probs[i] = 1.0;
        } else if v == boundary_value {
            probs[i] = shared_p;
        }
    }
    Ok(probs)
}

/// Full-information per-sensor rule for binary tracking: transmit iff the
/// local bit differs from the estimated pre-update belief.
pub fn heuristic_policy(own_bit: bool, belief_bit: bool) -> bool {
    own_bit != belief_bit
}

/// Mismatch-gated Bernoulli: transmit with probability `p` when the local
/// bit differs from the estimated belief, never otherwise.
pub fn random_p_policy(
    own_bit: bool,
    belief_bit: bool,
    p: f64,
    rng: &mut impl Rng,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("p must be in [0, 1]".into()));
    }
    Ok(own_bit != belief_bit && rng.random::<f64>() < p)
}

/// Asynchronous stochastic policy: sensor `own_id` recomputes the mixed
/// stochastic optimum using its own current value but stale values for
/// everyone else, and returns its own transmit probability.
pub fn optimal_async_policy(
    own_id: usize,
    own_value: f64,
    stale_values: &[f64],
    costs: &[f64],
    p: impl Fn(u32) -> f64,
) -> Result<f64> {
    if own_id >= stale_values.len() {
        return Err(Error::UnknownSensor {
            id: own_id,
            count: stale_values.len(),
        });
    }
    let mut view = stale_values.to_vec();
    view[own_id] = own_value;
    let probs = stochastic_mixed(&view, costs, p)?;
    Ok(probs[own_id])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::p_success_bw;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bw_curve(capacity: u32, epsilon: f64) -> impl Fn(u32) -> f64 {
        move |n| p_success_bw(n, capacity, epsilon).unwrap()
    }

    #[test]
    fn greedy_empty_when_values_zero() {
        let values = vec![0.0; 6];
        let costs = vec![0.2; 6];
        let sel = centralized_greedy(&values, &costs, bw_curve(2, 0.001)).unwrap();
        assert!(sel.selected.is_empty());
        assert_eq!(sel.objective, 0.0);
    }

    #[test]
    fn greedy_single_profitable_sensor() {
        let sel = centralized_greedy(&[1.0], &[0.2], bw_curve(2, 0.001)).unwrap();
        assert_eq!(sel.selected, [0].into_iter().collect());
        assert!((sel.objective - 0.799).abs() < 1e-12);
    }

    #[test]
    fn greedy_rejects_unequal_costs() {
        assert!(matches!(
            centralized_greedy(&[1.0, 1.0], &[0.2, 0.3], bw_curve(2, 0.001)),
            Err(Error::UnequalCosts)
        ));
    }

    #[test]
    fn greedy_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n = rng.random_range(1..=12);
            let values: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
            let costs = vec![0.2; n];
            let curve = bw_curve(2, 0.001);
            let greedy = centralized_greedy(&values, &costs, &curve).unwrap();
            let brute = brute_force_best_subset(&values, &costs, &curve).unwrap();
            assert_eq!(greedy.objective, brute.objective, "values {values:?}");
        }
    }

    #[test]
    fn brute_force_respects_size_cap() {
        let values = vec![1.0; 21];
        let costs = vec![0.2; 21];
        assert!(matches!(
            brute_force_best_subset(&values, &costs, bw_curve(2, 0.001)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn optimal_n_bandwidth_corollary() {
        let model = AnalyticKind::BandwidthLimited {
            capacity: 2,
            epsilon: 0.001,
        };
        // cost at or above the in-capacity value: stay silent
        assert_eq!(optimal_n_uniform(1.0, 0.999, &model, 100), 0);
        assert_eq!(optimal_n_uniform(1.0, 1.5, &model, 100), 0);
        // otherwise use the full capacity
        assert_eq!(optimal_n_uniform(1.0, 0.2, &model, 100), 2);
        // closed form agrees with the exact integer search
        let curve = bw_curve(2, 0.001);
        for wc in [0.05, 0.2, 0.5, 0.9, 0.999, 1.2] {
            assert_eq!(
                optimal_n_uniform(1.0, wc, &model, 50),
                argmax_n(1.0, wc, &curve, 50),
                "wc={wc}"
            );
        }
    }

    #[test]
    fn optimal_n_aloha_corollary() {
        let model = AnalyticKind::Aloha { window_ratio: 20.0 };
        let e_inv = (-1.0f64).exp();
        assert_eq!(optimal_n_uniform(1.0, e_inv, &model, 100), 0);
        assert_eq!(optimal_n_uniform(1.0, 0.5, &model, 100), 0);
        assert_eq!(optimal_n_uniform(1.0, 0.2, &model, 100), 10);
        assert_eq!(optimal_n_uniform(1.0, 0.0, &model, 100), 10);
    }

    #[test]
    fn optimal_p_zero_when_cost_dominates() {
        // every term of the objective is non-positive
        let p = optimal_p_uniform(1.0, 0.999, bw_curve(2, 0.001), 20);
        assert_eq!(p, 0.0);
    }

    // Independent oracle: direct-product evaluation of the binomial
    // objective on a 1e-5 grid.
    fn grid_oracle_p(value: f64, unit_cost: f64, p: &impl Fn(u32) -> f64, n: usize) -> f64 {
        let phi: Vec<f64> = (0..=n)
            .map(|j| if j == 0 { 0.0 } else { value * p(j as u32) - unit_cost })
            .collect();
        let mut best_p = 0.0;
        let mut best = 0.0f64;
        for k in 0..=100_000u64 {
            let q = k as f64 / 100_000.0;
            let mut total = 0.0;
            // running p^j * C(n, j) terms
            let mut coeff = 1.0; // C(n, j) * q^j
            for j in 1..=n {
                coeff *= (n - j + 1) as f64 / j as f64 * q;
                let tail = (1.0 - q).powi((n - j) as i32);
                total += coeff * tail * j as f64 * phi[j];
            }
            if total > best {
                best = total;
                best_p = q;
            }
        }
        best_p
    }

    #[test]
    fn optimal_p_matches_fine_grid_oracle() {
        let curve = bw_curve(2, 0.001);
        let n = 24;
        let p_impl = optimal_p_uniform(1.0, 0.2, &curve, n);
        let p_oracle = grid_oracle_p(1.0, 0.2, &curve, n);
        assert!(
            (p_impl - p_oracle).abs() <= 1e-3,
            "impl {p_impl}, oracle {p_oracle}"
        );
    }

    #[test]
    fn mixed_reduces_to_greedy_with_distinct_values() {
        let values = vec![0.9, 0.1, 0.7, 0.4, 0.2];
        let costs = vec![0.05; 5];
        let curve = bw_curve(2, 0.001);
        let probs = stochastic_mixed(&values, &costs, &curve).unwrap();
        let greedy = centralized_greedy(&values, &costs, &curve).unwrap();
        for (i, &p) in probs.iter().enumerate() {
            let expected = if greedy.selected.contains(&i) { 1.0 } else { 0.0 };
            assert_eq!(p, expected, "sensor {i}");
        }
    }

    #[test]
    fn mixed_reduces_to_uniform_probability_when_all_tied() {
        let n = 12;
        let values = vec![1.0; n];
        let costs = vec![0.2; n];
        let curve = bw_curve(2, 0.001);
        let probs = stochastic_mixed(&values, &costs, &curve).unwrap();
        let p_star = optimal_p_uniform(1.0, 0.2, &curve, n);
        for &p in &probs {
            assert_eq!(p, p_star);
        }
    }

    // Direct-summation oracle for the boundary group's expected reward.
    #[test]
    fn mixed_tie_group_probability_maximizes_group_reward() {
        // Two clear winners plus five tied sensors; capacity 4 puts the
        // optimal count strictly inside the tied group.
        let values = vec![2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let costs = vec![0.2; 7];
        let curve = bw_curve(4, 0.001);
        let probs = stochastic_mixed(&values, &costs, &curve).unwrap();
        assert_eq!(probs[0], 1.0);
        assert_eq!(probs[1], 1.0);
        let shared = probs[2];
        assert!(shared > 0.0 && shared < 1.0, "tie branch not taken: {shared}");
        assert!(probs[3..].iter().all(|&p| p == shared));

        let (k, m) = (2u32, 5usize);
        let group = |q: f64| -> f64 {
            let mut total = 0.0;
            for j in 1..=m {
                let binom = (1..=m).fold(1.0, |acc, x| acc * x as f64)
                    / ((1..=j).fold(1.0, |acc, x| acc * x as f64)
                        * (1..=(m - j)).fold(1.0, |acc, x| acc * x as f64));
                let pmf = binom * q.powi(j as i32) * (1.0 - q).powi((m - j) as i32);
                total += pmf * j as f64 * (curve(k + j as u32) * 1.0 - 0.2);
            }
            total
        };
        let best_grid = (0..=10_000)
            .map(|k| k as f64 / 10_000.0)
            .map(group)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            group(shared) >= best_grid - 1e-9,
            "shared p {shared} scores {} vs grid max {best_grid}",
            group(shared)
        );
    }

    #[test]
    fn heuristic_and_random_gate_on_mismatch() {
        assert!(!heuristic_policy(true, true));
        assert!(heuristic_policy(true, false));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert!(!random_p_policy(true, false, 0.0, &mut rng).unwrap());
            assert!(random_p_policy(true, false, 1.0, &mut rng).unwrap());
            assert!(!random_p_policy(true, true, 1.0, &mut rng).unwrap());
        }
    }

    #[test]
    fn random_p_empirical_rate_scales_with_mismatch_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = 0.3;
        let mismatch_fraction = 0.6;
        let trials = 100_000;
        let mut sent = 0u32;
        for t in 0..trials {
            // deterministic mismatch pattern with the target fraction
            let mismatched = (t % 10) < (mismatch_fraction * 10.0) as u32;
            let own = mismatched;
            if random_p_policy(own, false, p, &mut rng).unwrap() {
                sent += 1;
            }
        }
        let observed = sent as f64 / trials as f64;
        let expected = p * mismatch_fraction;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (observed - expected).abs() < 3.0 * sigma,
            "rate {observed} vs p*f = {expected}"
        );
    }

    #[test]
    fn async_with_fresh_view_matches_mixed() {
        let values = vec![1.0, 0.0, 1.0, 1.0, 0.0];
        let costs = vec![0.2; 5];
        let curve = bw_curve(2, 0.001);
        let probs = stochastic_mixed(&values, &costs, &curve).unwrap();
        for i in 0..5 {
            let p = optimal_async_policy(i, values[i], &values, &costs, &curve).unwrap();
            assert_eq!(p, probs[i], "sensor {i}");
        }
    }

    #[test]
    fn async_degenerate_stale_view_is_selfish() {
        // stale view says nobody else has value: the sensor acts as the
        // lone valuable sensor and transmits deterministically when
        // v P(1) > wc.
        let stale = vec![0.0; 6];
        let costs = vec![0.2; 6];
        let curve = bw_curve(2, 0.001);
        let p = optimal_async_policy(3, 1.0, &stale, &costs, &curve).unwrap();
        assert_eq!(p, 1.0);
    }

    // The centralized optimum upper-bounds the expected reward of the
    // stochastic policy on the same instance.
    #[test]
    fn greedy_upper_bounds_stochastic_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let curve = bw_curve(2, 0.001);
        for _ in 0..100 {
            let n = rng.random_range(1..=9);
            let values: Vec<f64> =
                (0..n).map(|_| if rng.random_bool(0.6) { 1.0 } else { 0.0 }).collect();
            let costs = vec![0.2; n];
            let greedy = centralized_greedy(&values, &costs, &curve).unwrap();
            let probs = stochastic_mixed(&values, &costs, &curve).unwrap();
            // enumerate transmit sets under the product distribution
            let mut expected = 0.0;
            for mask in 0u32..(1 << n) {
                let mut weight = 1.0;
                for i in 0..n {
                    let q = probs[i];
                    weight *= if mask & (1 << i) != 0 { q } else { 1.0 - q };
                }
                if weight == 0.0 {
                    continue;
                }
                let size = mask.count_ones();
                if size == 0 {
                    continue;
                }
                let pn = curve(size);
                let mut g = 0.0;
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        g += pn * values[i] - 0.2;
                    }
                }
                expected += weight * g;
            }
            assert!(
                greedy.objective >= expected - 1e-9,
                "greedy {} < stochastic {expected}",
                greedy.objective
            );
        }
    }
}
