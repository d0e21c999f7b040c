//! Rollout storage and generalized advantage estimation.

/// One agent transition as collected during a rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: [f64; 2],
    /// Unclipped action sample.
    pub raw_action: f64,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    /// Critic estimate for the successor state, used for bootstrapping. Zero
    /// for true terminal transitions.
    pub next_value: f64,
    /// Last transition of its episode (terminal or truncated); advantage
    /// recursion does not cross it.
    pub episode_end: bool,
}

/// Advantages and returns, `A_t = δ_t + γλ A_{t+1}` with
/// `δ_t = r_t + γ V'(t) - V(t)` and the recursion reset at episode ends.
/// Returns are `A_t + V(t)`.
pub fn compute_gae(transitions: &[Transition], gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = transitions.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for (i, tr) in transitions.iter().enumerate().rev() {
        if tr.episode_end {
            running = 0.0;
        }
        let delta = tr.reward + gamma * tr.next_value - tr.value;
        running = delta + gamma * lambda * running;
        adv[i] = running;
    }
    let returns = adv.iter().zip(transitions).map(|(a, tr)| a + tr.value).collect();
    (adv, returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-built five-step episode that terminates (no bootstrap).
    fn episode() -> Vec<Transition> {
        let rewards = [-1.0, -0.5, 2.0, 0.25, -3.0];
        let values = [0.4, -0.2, 1.1, 0.0, -0.7];
        (0..5)
            .map(|i| Transition {
                obs: [22.0, 0.0],
                raw_action: 0.0,
                log_prob: 0.0,
                value: values[i],
                reward: rewards[i],
                next_value: if i + 1 < 5 { values[i + 1] } else { 0.0 },
                episode_end: i == 4,
            })
            .collect()
    }

    #[test]
    fn lambda_zero_gives_td_errors() {
        let ep = episode();
        let (adv, _) = compute_gae(&ep, 0.9, 0.0);
        for (a, tr) in adv.iter().zip(&ep) {
            let td = tr.reward + 0.9 * tr.next_value - tr.value;
            assert!((a - td).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_one_gives_discounted_returns() {
        let ep = episode();
        let gamma = 0.9;
        let (adv, returns) = compute_gae(&ep, gamma, 1.0);
        for t in 0..5 {
            let discounted: f64 = (t..5).map(|k| gamma.powi((k - t) as i32) * ep[k].reward).sum();
            assert!((adv[t] - (discounted - ep[t].value)).abs() < 1e-12);
            assert!((returns[t] - discounted).abs() < 1e-12);
        }
    }

    #[test]
    fn recursion_stops_at_episode_boundary() {
        let mut two = episode();
        two.extend(episode());
        let (adv, _) = compute_gae(&two, 0.99, 0.95);
        let (single, _) = compute_gae(&episode(), 0.99, 0.95);
        assert_eq!(&adv[..5], &single[..]);
        assert_eq!(&adv[5..], &single[..]);
    }

    #[test]
    fn truncation_bootstraps() {
        let mut ep = episode();
        ep[4].next_value = 10.0;
        let (adv, _) = compute_gae(&ep, 0.5, 0.0);
        assert!((adv[4] - (-3.0 + 5.0 + 0.7)).abs() < 1e-12);
    }
}
