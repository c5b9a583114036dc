use std::time::{Duration, Instant};

/// Per-call wall-clock statistics in milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: Vec<f64>) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        // Nearest-rank percentile.
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Self {
            mean: samples.iter().sum::<f64>() / n as f64,
            p95: sorted[rank - 1],
            min: sorted[0],
            max: sorted[n - 1],
            samples,
        })
    }
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Times `repetitions` calls of `f` after one untimed warm-up call. The
/// outputs of all calls are returned so callers can check they agree.
pub fn measure_latency<R>(repetitions: usize, mut f: impl FnMut() -> R) -> (LatencyStats, Vec<R>) {
    let reps = repetitions.max(1);
    let mut outputs = Vec::with_capacity(reps + 1);
    outputs.push(f());
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        let out = f();
        samples.push(millis(t.elapsed()));
        outputs.push(out);
    }
    (LatencyStats::from_samples(samples).expect("at least one repetition"), outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_statistics() {
        let s = LatencyStats::from_samples(vec![4.5]).unwrap();
        assert_eq!((s.mean, s.p95, s.min, s.max), (4.5, 4.5, 4.5, 4.5));
        assert!(LatencyStats::from_samples(vec![]).is_none());
    }

    #[test]
    fn nearest_rank_p95() {
        let s = LatencyStats::from_samples((1..=100).map(f64::from).collect()).unwrap();
        assert_eq!(s.p95, 95.0);
        assert_eq!(s.mean, 50.5);
    }

    #[test]
    fn warm_up_is_not_timed() {
        let mut calls = 0;
        let (stats, outs) = measure_latency(3, || {
            calls += 1;
            calls
        });
        assert_eq!(stats.samples.len(), 3);
        assert_eq!(outs, vec![1, 2, 3, 4]);
    }
}
