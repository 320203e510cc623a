//! Gillespie's stochastic simulation algorithm (direct method) on a fixed
//! recording grid.

use super::SimError;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// States recorded at every grid point plus the number of reaction events.
#[derive(Debug, Clone)]
pub struct GillespieOutcome<S> {
    pub records: Vec<S>,
    pub n_events: usize,
}

/// Exact simulation of a Markov jump process with `R` reactions.
///
/// - draw the time to the next reaction from an exponential with rate equal
///   to the total rate,
/// - pick the reaction with probability proportional to its rate,
/// - apply it and repeat until `t_max`.
///
/// The state is recorded at times `0, record_every, 2·record_every, …,
/// t_max`; each grid point stores the state after the last event at or
/// before it. A total rate of zero freezes the state for the remaining grid
/// points (absorbing). More than `max_events` reactions aborts with
/// [`SimError::Exploded`].
pub fn gillespie_on_grid<S: Clone, const R: usize>(
    init: S,
    rates: impl Fn(&S) -> [f64; R],
    apply: impl Fn(&mut S, usize),
    t_max: f64,
    record_every: f64,
    max_events: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GillespieOutcome<S>, SimError> {
    assert!(t_max > 0.0 && record_every > 0.0);
    let n_grid = (t_max / record_every).round() as usize + 1;
    let mut records = Vec::with_capacity(n_grid);
    let mut state = init;
    records.push(state.clone());
    let mut next_grid = 1usize;
    let mut t = 0.0;
    let mut n_events = 0usize;

    loop {
        let r = rates(&state);
        let total: f64 = r.iter().sum();
        debug_assert!(r.iter().all(|&x| x >= 0.0), "rates must be nonnegative");
        if total <= 0.0 {
            break;
        }
        let dt = -(1.0 - rng.random::<f64>()).ln() / total;
        let t_next = t + dt;
        while next_grid < n_grid && (next_grid as f64) * record_every < t_next {
            records.push(state.clone());
            next_grid += 1;
        }
        if t_next > t_max {
            break;
        }
        n_events += 1;
        if n_events > max_events {
            return Err(SimError::Exploded { max_events });
        }
        let mut pick = rng.random::<f64>() * total;
        let mut idx = R - 1;
        for (i, ri) in r.iter().enumerate() {
            if pick < *ri {
                idx = i;
                break;
            }
            pick -= ri;
        }
        apply(&mut state, idx);
        t = t_next;
    }
    while records.len() < n_grid {
        records.push(state.clone());
    }
    Ok(GillespieOutcome { records, n_events })
}
