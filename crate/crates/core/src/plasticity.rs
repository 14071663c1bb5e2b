//! PSP kernels and the learning rules: STDP, SAPR, winner-takes-all, and the
//! perceptron error-correction rule.
//!
//! Pairing sign convention throughout: `dt_pair = t_post - t_pre`. Positive
//! means the presynaptic cell fired first and the synapse strengthens;
//! negative means it fired after and the synapse weakens.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Alpha-function postsynaptic potential:
/// `k(t) = A * (t/tau) * exp(1 - t/tau)` for `t >= 0`, zero before onset.
///
/// Peaks at exactly `A` when `t = tau`. The sign of `A` carries
/// excitatory/inhibitory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaKernel {
    pub amplitude: f64,
    pub tau_ms: f64,
}

impl AlphaKernel {
    pub fn new(amplitude: f64, tau_ms: f64) -> Result<Self> {
        if !tau_ms.is_finite() || tau_ms <= 0.0 {
            return Err(Error::argument(format!(
                "alpha kernel tau must be positive, got {tau_ms}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::argument("alpha kernel amplitude must be finite"));
        }
        Ok(AlphaKernel { amplitude, tau_ms })
    }
}

/// Evaluate the kernel at `t` ms after onset.
pub fn kernel_value(k: &AlphaKernel, t_ms: f64) -> f64 {
    if t_ms <= 0.0 {
        0.0
    } else {
        let x = t_ms / k.tau_ms;
        k.amplitude * x * (1.0 - x).exp()
    }
}

/// Static exponential pairing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpRule {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus_ms: f64,
    pub tau_minus_ms: f64,
}

impl Default for StdpRule {
    fn default() -> Self {
        StdpRule {
            a_plus: 0.005,
            a_minus: 0.005 * 1.05,
            tau_plus_ms: 20.0,
            tau_minus_ms: 20.0,
        }
    }
}

impl StdpRule {
    pub fn validate(&self) -> Result<()> {
        if self.a_plus <= 0.0
            || self.a_minus <= 0.0
            || self.tau_plus_ms <= 0.0
            || self.tau_minus_ms <= 0.0
        {
            return Err(Error::argument("STDP magnitudes and taus must be positive"));
        }
        Ok(())
    }
}

/// Weight change for one pairing under the static window.
/// Simultaneous spikes (`dt_pair = 0`) contribute nothing.
pub fn stdp_delta(rule: &StdpRule, dt_pair_ms: f64) -> f64 {
    if dt_pair_ms > 0.0 {
        rule.a_plus * (-dt_pair_ms / rule.tau_plus_ms).exp()
    } else if dt_pair_ms < 0.0 {
        -rule.a_minus * (dt_pair_ms / rule.tau_minus_ms).exp()
    } else {
        0.0
    }
}

/// Dynamic pairing window built from the circuit's own PSP shapes: the
/// potentiation branch is the excitatory PSP, the depression branch the
/// inhibitory PSP mirrored across zero. Continuous at 0 because alpha
/// kernels start at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaprRule {
    pub epsp: AlphaKernel,
    pub ipsp: AlphaKernel,
}

impl SaprRule {
    pub fn new(epsp: AlphaKernel, ipsp: AlphaKernel) -> Result<Self> {
        if epsp.amplitude <= 0.0 {
            return Err(Error::argument("SAPR EPSP amplitude must be positive"));
        }
        if ipsp.amplitude >= 0.0 {
            return Err(Error::argument("SAPR IPSP amplitude must be negative"));
        }
        Ok(SaprRule { epsp, ipsp })
    }
}

impl Default for SaprRule {
    fn default() -> Self {
        SaprRule {
            epsp: AlphaKernel { amplitude: 0.01, tau_ms: 5.0 },
            ipsp: AlphaKernel { amplitude: -0.01, tau_ms: 8.0 },
        }
    }
}

pub fn sapr_delta(rule: &SaprRule, dt_pair_ms: f64) -> f64 {
    if dt_pair_ms > 0.0 {
        kernel_value(&rule.epsp, dt_pair_ms)
    } else if dt_pair_ms < 0.0 {
        kernel_value(&rule.ipsp, -dt_pair_ms)
    } else {
        0.0
    }
}

/// Either pairing rule, for call sites configured at runtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairingRule {
    Stdp(StdpRule),
    Sapr(SaprRule),
}

impl PairingRule {
    pub fn delta(&self, dt_pair_ms: f64) -> f64 {
        match self {
            PairingRule::Stdp(r) => stdp_delta(r, dt_pair_ms),
            PairingRule::Sapr(r) => sapr_delta(r, dt_pair_ms),
        }
    }
}

/// Inclusive clamp range for stored synaptic weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightBounds {
    pub min: f64,
    pub max: f64,
}

impl WeightBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::argument(format!(
                "weight bounds need min <= max, got [{min}, {max}]"
            )));
        }
        Ok(WeightBounds { min, max })
    }

    pub fn unit() -> Self {
        WeightBounds { min: 0.0, max: 1.0 }
    }

    pub fn contains(&self, w: f64) -> bool {
        (self.min..=self.max).contains(&w)
    }

    pub fn clamp(&self, w: f64) -> f64 {
        w.clamp(self.min, self.max)
    }
}

/// Apply one pairing to a weight, clamped into bounds. The weight must be in
/// bounds on entry.
pub fn apply_pairing(
    w: f64,
    dt_pair_ms: f64,
    rule: &PairingRule,
    bounds: &WeightBounds,
) -> Result<f64> {
    if !bounds.contains(w) {
        return Err(Error::Contract(format!(
            "weight {w} outside bounds [{}, {}] on entry",
            bounds.min, bounds.max
        )));
    }
    Ok(bounds.clamp(w + rule.delta(dt_pair_ms)))
}

/// Winner-takes-all competitive update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtaRule {
    /// Learning rate in (0, 1].
    pub eta: f64,
    /// Half-width of the 1-D index neighborhood that co-updates with the
    /// winner; 0 updates the winner alone.
    pub neighborhood_radius: usize,
}

impl WtaRule {
    pub fn new(eta: f64, neighborhood_radius: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::argument(format!("WTA eta must be in (0,1], got {eta}")));
        }
        Ok(WtaRule { eta, neighborhood_radius })
    }
}

impl Default for WtaRule {
    fn default() -> Self {
        WtaRule { eta: 0.5, neighborhood_radius: 0 }
    }
}

fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Move the unit closest to `x` (ties to the lowest index) toward `x`, along
/// with its 1-D index neighbors within the configured radius.
/// Returns the winner index.
pub fn wta_update(weights: &mut [Vec<f64>], x: &[f64], rule: &WtaRule) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::argument("WTA needs at least one unit"));
    }
    for w in weights.iter() {
        if w.len() != x.len() {
            return Err(Error::argument(format!(
                "unit dimension {} does not match input dimension {}",
                w.len(),
                x.len()
            )));
        }
    }
    let winner = weights
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            euclidean_sq(a, x)
                .partial_cmp(&euclidean_sq(b, x))
                .expect("finite distances")
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    let lo = winner.saturating_sub(rule.neighborhood_radius);
    let hi = (winner + rule.neighborhood_radius).min(weights.len() - 1);
    for w in &mut weights[lo..=hi] {
        for (wi, xi) in w.iter_mut().zip(x) {
            *wi += rule.eta * (xi - *wi);
        }
    }
    Ok(winner)
}

/// Rosenblatt's error-correction rule for a single threshold unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptronRule {
    pub eta: f64,
    pub theta: f64,
}

impl PerceptronRule {
    pub fn new(eta: f64, theta: f64) -> Result<Self> {
        if eta <= 0.0 {
            return Err(Error::argument(format!("perceptron eta must be positive, got {eta}")));
        }
        Ok(PerceptronRule { eta, theta })
    }
}

/// `w' = w + eta * (target - y) * x` with `y = [dot(w,x) >= theta]`.
pub fn perceptron_update(
    w: &[f64],
    x: &[f64],
    target: u8,
    rule: &PerceptronRule,
) -> Result<Vec<f64>> {
    if w.len() != x.len() {
        return Err(Error::argument(format!(
            "weight dimension {} does not match input dimension {}",
            w.len(),
            x.len()
        )));
    }
    let dot: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
    let y = u8::from(dot >= rule.theta);
    let err = f64::from(target) - f64::from(y);
    Ok(w.iter()
        .zip(x)
        .map(|(wi, xi)| wi + rule.eta * err * xi)
        .collect())
}

/// CSV comparison table of both pairing windows: header `dt_ms,stdp,sapr`,
/// dt swept from -50 to +50 ms in 0.5 ms steps (201 rows).
pub fn kernel_table_csv(stdp: &StdpRule, sapr: &SaprRule) -> String {
    let mut out = String::from("dt_ms,stdp,sapr\n");
    for k in -100..=100 {
        let dt = k as f64 * 0.5;
        let _ = writeln!(
            out,
            "{:.1},{:.9},{:.9}",
            dt,
            stdp_delta(stdp, dt),
            sapr_delta(sapr, dt)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_peaks_at_tau_and_starts_at_zero() {
        let k = AlphaKernel::new(2.0, 5.0).unwrap();
        assert_eq!(kernel_value(&k, 5.0), 2.0);
        assert_eq!(kernel_value(&k, 0.0), 0.0);
        assert_eq!(kernel_value(&k, -3.0), 0.0);
    }

    #[test]
    fn kernel_value_at_twice_tau() {
        let k = AlphaKernel::new(1.0, 5.0).unwrap();
        let expected = 2.0 * (-1.0f64).exp();
        assert!((kernel_value(&k, 10.0) - expected).abs() < 1e-9);
        assert!((kernel_value(&k, 10.0) - 0.735_758_88).abs() < 1e-6);
    }

    #[test]
    fn kernel_magnitude_is_bounded_by_amplitude() {
        let k = AlphaKernel::new(-1.5, 8.0).unwrap();
        for i in 0..4000 {
            let t = i as f64 * 0.05;
            assert!(kernel_value(&k, t).abs() <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn stdp_example_values() {
        let rule = StdpRule::default();
        let plus = stdp_delta(&rule, 5.0);
        assert!((plus - 0.005 * (-0.25f64).exp()).abs() < 1e-12);
        assert!((plus - 0.003_894_0).abs() < 1e-7);
        let minus = stdp_delta(&rule, -5.0);
        assert!((minus + 0.00525 * (-0.25f64).exp()).abs() < 1e-12);
        assert!((minus + 0.004_088_7).abs() < 1e-7);
        assert_eq!(stdp_delta(&rule, 0.0), 0.0);
    }

    #[test]
    fn sapr_peaks_at_kernel_peaks_and_is_continuous_at_zero() {
        let rule = SaprRule::default();
        assert_eq!(sapr_delta(&rule, rule.epsp.tau_ms), rule.epsp.amplitude);
        assert_eq!(sapr_delta(&rule, -rule.ipsp.tau_ms), rule.ipsp.amplitude);
        assert_eq!(sapr_delta(&rule, 0.0), 0.0);
        assert!(sapr_delta(&rule, 1e-3).abs() < 1e-5);
        assert!(sapr_delta(&rule, -1e-3).abs() < 1e-5);
    }

    #[test]
    fn sapr_small_lag_bound() {
        // |f(eps)| <= e * eps * A / tau near zero.
        let rule = SaprRule::default();
        for eps in [1e-4, 1e-3, 1e-2] {
            let bound = std::f64::consts::E * eps * rule.epsp.amplitude / rule.epsp.tau_ms;
            assert!(sapr_delta(&rule, eps).abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn stdp_jumps_across_zero_by_both_magnitudes() {
        let rule = StdpRule::default();
        let jump = stdp_delta(&rule, 1e-9) - stdp_delta(&rule, -1e-9);
        assert!((jump - (rule.a_plus + rule.a_minus)).abs() < 1e-12);
    }

    #[test]
    fn pairing_respects_bounds_and_contract() {
        let bounds = WeightBounds::unit();
        let rule = PairingRule::Stdp(StdpRule::default());
        let up = apply_pairing(0.5, 5.0, &rule, &bounds).unwrap();
        assert!(up > 0.5);
        let down = apply_pairing(0.5, -5.0, &rule, &bounds).unwrap();
        assert!(down < 0.5);
        // Saturation at the top bound.
        assert_eq!(apply_pairing(1.0, 5.0, &rule, &bounds).unwrap(), 1.0);
        // Entering out of bounds is a contract error.
        assert!(apply_pairing(1.5, 5.0, &rule, &bounds).is_err());
    }

    #[test]
    fn wta_moves_the_nearest_unit_halfway() {
        let mut weights = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let rule = WtaRule::new(0.5, 0).unwrap();
        let winner = wta_update(&mut weights, &[0.9, 0.9], &rule).unwrap();
        assert_eq!(winner, 1);
        assert_eq!(weights[1], vec![0.95, 0.95]);
        assert_eq!(weights[0], vec![0.0, 0.0]);
    }

    #[test]
    fn wta_exact_match_leaves_the_winner_unchanged() {
        let mut weights = vec![vec![0.2, 0.4], vec![0.8, 0.1]];
        let rule = WtaRule::new(1.0, 0).unwrap();
        let winner = wta_update(&mut weights, &[0.8, 0.1], &rule).unwrap();
        assert_eq!(winner, 1);
        assert_eq!(weights[1], vec![0.8, 0.1]);
    }

    #[test]
    fn wta_ties_break_to_the_lowest_index() {
        let mut weights = vec![vec![1.0], vec![-1.0]];
        let rule = WtaRule::new(0.5, 0).unwrap();
        assert_eq!(wta_update(&mut weights, &[0.0], &rule).unwrap(), 0);
    }

    #[test]
    fn wta_neighborhood_radius_spreads_the_update() {
        let mut weights = vec![vec![0.0], vec![0.5], vec![10.0]];
        let rule = WtaRule::new(0.5, 1).unwrap();
        let winner = wta_update(&mut weights, &[0.6], &rule).unwrap();
        assert_eq!(winner, 1);
        assert!(weights[0][0] > 0.0);
        assert!(weights[2][0] < 10.0);
    }

    #[test]
    fn wta_dimension_mismatch_is_an_error() {
        let mut weights = vec![vec![0.0, 0.0]];
        assert!(wta_update(&mut weights, &[1.0], &WtaRule::default()).is_err());
    }

    #[test]
    fn perceptron_leaves_correct_classifications_alone() {
        let rule = PerceptronRule::new(1.0, 0.5).unwrap();
        let w = vec![1.0, 1.0];
        let updated = perceptron_update(&w, &[1.0, 0.0], 1, &rule).unwrap();
        assert_eq!(updated, w);
    }

    #[test]
    fn perceptron_raises_weights_on_a_missed_fire() {
        let rule = PerceptronRule::new(1.0, 0.5).unwrap();
        let updated = perceptron_update(&[0.0, 0.0], &[1.0, 1.0], 1, &rule).unwrap();
        assert_eq!(updated, vec![1.0, 1.0]);
    }

    #[test]
    fn perceptron_lowers_weights_on_a_false_fire() {
        let rule = PerceptronRule::new(0.5, 0.0).unwrap();
        let updated = perceptron_update(&[1.0, 0.5], &[1.0, 1.0], 0, &rule).unwrap();
        assert_eq!(updated, vec![0.5, 0.0]);
    }

    #[test]
    fn perceptron_learns_the_and_function() {
        // Unit-step updates keep weights on the integer lattice, so the
        // threshold must sit between lattice levels 1 and 2.
        let rule = PerceptronRule::new(1.0, 1.5).unwrap();
        let samples: [(&[f64], u8); 4] = [
            (&[0.0, 0.0], 0),
            (&[0.0, 1.0], 0),
            (&[1.0, 0.0], 0),
            (&[1.0, 1.0], 1),
        ];
        let mut w = vec![0.0, 0.0];
        let mut converged = false;
        for _epoch in 0..100 {
            let mut errors = 0;
            for (x, target) in samples {
                let next = perceptron_update(&w, x, target, &rule).unwrap();
                if next != w {
                    errors += 1;
                }
                w = next;
            }
            if errors == 0 {
                converged = true;
                break;
            }
        }
        assert!(converged, "perceptron failed to learn AND: w = {w:?}");
    }

    #[test]
    fn kernel_table_has_201_rows() {
        let table = kernel_table_csv(&StdpRule::default(), &SaprRule::default());
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "dt_ms,stdp,sapr");
        assert_eq!(lines.len(), 202);
        assert!(lines[1].starts_with("-50.0,"));
        assert!(lines[201].starts_with("50.0,"));
    }

    proptest! {
        // Sign structure and monotone decay away from zero on each side.
        #[test]
        fn stdp_sign_and_decay(dt in 0.01f64..2000.0, shrink in 0.01f64..0.99) {
            let rule = StdpRule::default();
            let closer = dt * shrink;
            prop_assert!(stdp_delta(&rule, dt) > 0.0);
            prop_assert!(stdp_delta(&rule, -dt) < 0.0);
            prop_assert!(stdp_delta(&rule, closer) > stdp_delta(&rule, dt));
            prop_assert!(stdp_delta(&rule, -closer) < stdp_delta(&rule, -dt));
        }

        #[test]
        fn sapr_sign_structure(dt in 0.01f64..500.0) {
            let rule = SaprRule::default();
            prop_assert!(sapr_delta(&rule, dt) > 0.0);
            prop_assert!(sapr_delta(&rule, -dt) < 0.0);
        }

        // Any pairing sequence keeps the weight inside bounds.
        #[test]
        fn pairing_sequences_stay_bounded(
            start in 0.0f64..1.0,
            pairs in proptest::collection::vec(-80.0f64..80.0, 0..200),
            use_sapr in proptest::bool::ANY,
        ) {
            let bounds = WeightBounds::unit();
            let rule = if use_sapr {
                PairingRule::Sapr(SaprRule::default())
            } else {
                PairingRule::Stdp(StdpRule::default())
            };
            let mut w = start;
            for dt in pairs {
                w = apply_pairing(w, dt, &rule, &bounds).unwrap();
                prop_assert!(bounds.contains(w));
            }
        }

        // The winner strictly approaches the input unless it already matches.
        #[test]
        fn wta_strictly_decreases_winner_distance(
            x in proptest::collection::vec(-5.0f64..5.0, 2..5),
            offsets in proptest::collection::vec(-5.0f64..5.0, 2..5),
            eta in 0.01f64..1.0,
        ) {
            let n = x.len().min(offsets.len());
            let x = &x[..n];
            let unit: Vec<f64> = x.iter().zip(&offsets[..n]).map(|(a, b)| a + b).collect();
            let before = euclidean_sq(&unit, x);
            prop_assume!(before > 1e-12);
            let mut weights = vec![unit];
            let rule = WtaRule::new(eta, 0).unwrap();
            wta_update(&mut weights, x, &rule).unwrap();
            prop_assert!(euclidean_sq(&weights[0], x) < before);
        }
    }

    #[test]
    fn a_hundred_thousand_random_pairings_never_escape_bounds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bounds = WeightBounds::unit();
        let rules = [
            PairingRule::Stdp(StdpRule::default()),
            PairingRule::Sapr(SaprRule::default()),
        ];
        let mut w = 0.5;
        for k in 0..100_000 {
            let dt = rng.gen_range(-100.0..100.0);
            w = apply_pairing(w, dt, &rules[k % 2], &bounds).unwrap();
            assert!(bounds.contains(w));
        }
    }
}
