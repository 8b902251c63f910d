//! Pareto fronts over (wirelength, hotspot), hypervolume, and cumulative
//! reward aggregation. Both objectives are minimized.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{AgentRole, StepRecord};
use crate::error::{Error, Result};
use crate::io::read_csv;

/// Name of the per-run table of evaluated layouts.
pub const POINTS_FILE: &str = "points.csv";

/// One evaluated layout. `source` identifies the checkpoint, iteration or
/// sweep point it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub method: String,
    pub seed: u64,
    pub source: String,
    pub wl_mm: f64,
    pub temp_c: f64,
}

impl ParetoPoint {
    pub fn new(method: impl Into<String>, seed: u64, source: impl Into<String>, wl_mm: f64, temp_c: f64) -> Self {
        ParetoPoint {
            method: method.into(),
            seed,
            source: source.into(),
            wl_mm,
            temp_c,
        }
    }

    /// Weakly better on both objectives and strictly better on one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.wl_mm <= other.wl_mm
            && self.temp_c <= other.temp_c
            && (self.wl_mm < other.wl_mm || self.temp_c < other.temp_c)
    }
}

/// Non-dominated points sorted by wirelength ascending; temperature is
/// strictly decreasing along the list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub points: Vec<ParetoPoint>,
}

impl Front {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Extracts the non-dominated subset. Among points with identical
/// coordinates the earliest in input order is kept.
pub fn non_dominated(points: &[ParetoPoint]) -> Front {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .wl_mm
            .total_cmp(&points[b].wl_mm)
            .then(points[a].temp_c.total_cmp(&points[b].temp_c))
    });
    let mut out = Vec::new();
    let mut best_temp = f64::INFINITY;
    for i in idx {
        if points[i].temp_c < best_temp {
            best_temp = points[i].temp_c;
            out.push(points[i].clone());
        }
    }
    Front { points: out }
}

/// Area dominated by `points` inside the box bounded by `reference`
/// (wl mm, temp °C). Every point must lie inside the box.
pub fn hypervolume_2d(points: &[ParetoPoint], reference: (f64, f64)) -> Result<f64> {
    let (rw, rt) = reference;
    for p in points {
        if !(p.wl_mm.is_finite() && p.temp_c.is_finite()) || p.wl_mm > rw || p.temp_c > rt {
            return Err(Error::OutsideReference {
                wl: p.wl_mm,
                temp: p.temp_c,
                ref_wl: rw,
                ref_temp: rt,
            });
        }
    }
    let front = non_dominated(points);
    let mut area = 0.0;
    for (i, p) in front.points.iter().enumerate() {
        let next_wl = front.points.get(i + 1).map_or(rw, |q| q.wl_mm);
        area += (next_wl - p.wl_mm) * (rt - p.temp_c);
    }
    Ok(area)
}

/// Component-wise maximum over all clouds, scaled by `1 + margin` (0.05 by
/// default). Temperature is scaled as given in °C.
pub fn reference_point<'a>(clouds: impl IntoIterator<Item = &'a [ParetoPoint]>, margin: f64) -> Option<(f64, f64)> {
    let mut max: Option<(f64, f64)> = None;
    for cloud in clouds {
        for p in cloud {
            max = Some(match max {
                None => (p.wl_mm, p.temp_c),
                Some((w, t)) => (w.max(p.wl_mm), t.max(p.temp_c)),
            });
        }
    }
    max.map(|(w, t)| (w * (1.0 + margin), t * (1.0 + margin)))
}

pub const DEFAULT_REFERENCE_MARGIN: f64 = 0.05;

/// Raw and normalized reward sums for one agent (or all agents).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardSum {
    pub raw: f64,
    pub normalized: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CumulativeReward {
    pub per_agent: BTreeMap<AgentRole, RewardSum>,
    pub combined: RewardSum,
}

/// Sums per-step rewards of one episode, split by the agent that acted.
pub fn cumulative_reward(trace: &[StepRecord]) -> CumulativeReward {
    let mut out = CumulativeReward::default();
    for s in trace {
        for sum in [out.per_agent.entry(s.agent).or_default(), &mut out.combined] {
            sum.raw += s.raw_reward;
            sum.normalized += s.reward;
            sum.steps += 1;
        }
    }
    out
}

/// Pooled cloud and non-dominated front of one method.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MethodFront {
    pub cloud: Vec<ParetoPoint>,
    pub front: Front,
}

/// Reads `points.csv` from each run directory and pools the points by
/// method tag.
pub fn assemble_front(run_dirs: &[PathBuf]) -> Result<BTreeMap<String, MethodFront>> {
    let mut pooled: BTreeMap<String, Vec<ParetoPoint>> = BTreeMap::new();
    for dir in run_dirs {
        for p in read_points(dir)? {
            pooled.entry(p.method.clone()).or_default().push(p);
        }
    }
    Ok(pooled
        .into_iter()
        .map(|(m, cloud)| {
            let front = non_dominated(&cloud);
            (m, MethodFront { cloud, front })
        })
        .collect())
}

pub fn read_points(run_dir: &Path) -> Result<Vec<ParetoPoint>> {
    let path = run_dir.join(POINTS_FILE);
    if !path.is_file() {
        return Err(Error::config(path.display().to_string(), "run directory has no points table"));
    }
    read_csv(&path)
}

/// A row of an emitted front/cloud table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub method: String,
    pub seed: u64,
    pub source: String,
    pub wl_mm: f64,
    pub temp_c: f64,
    pub dominated: bool,
}

/// Marks every cloud point as dominated or not within its own cloud.
pub fn front_rows(cloud: &[ParetoPoint]) -> Vec<FrontRow> {
    let front = non_dominated(cloud);
    let mut on_front = vec![false; cloud.len()];
    for f in &front.points {
        if let Some(i) = cloud.iter().position(|p| p == f) {
            on_front[i] = true;
        }
    }
    cloud
        .iter()
        .zip(on_front)
        .map(|(p, keep)| FrontRow {
            method: p.method.clone(),
            seed: p.seed,
            source: p.source.clone(),
            wl_mm: p.wl_mm,
            temp_c: p.temp_c,
            dominated: !keep,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(xs: &[(f64, f64)]) -> Vec<ParetoPoint> {
        xs.iter()
            .enumerate()
            .map(|(i, &(w, t))| ParetoPoint::new("m", 0, i.to_string(), w, t))
            .collect()
    }

    fn coords(f: &Front) -> Vec<(f64, f64)> {
        f.points.iter().map(|p| (p.wl_mm, p.temp_c)).collect()
    }

    /// Pairwise dominance filter.
    fn brute_front(points: &[ParetoPoint]) -> Vec<(f64, f64)> {
        let mut keep: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| !points.iter().any(|q| q.dominates(p)))
            .map(|p| (p.wl_mm, p.temp_c))
            .collect();
        keep.sort_by(|a, b| a.0.total_cmp(&b.0));
        keep.dedup();
        keep
    }

    fn monte_carlo(points: &[ParetoPoint], r: (f64, f64), samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let (lw, lt) = points
            .iter()
            .fold((r.0, r.1), |(w, t), p| (w.min(p.wl_mm), t.min(p.temp_c)));
        let box_area = (r.0 - lw) * (r.1 - lt);
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = rng.gen_range(lw..r.0);
            let y = rng.gen_range(lt..r.1);
            if points.iter().any(|p| p.wl_mm <= x && p.temp_c <= y) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        (box_area * p, box_area * (p * (1.0 - p) / samples as f64).sqrt())
    }

    #[test]
    fn worked_front() {
        let p = pts(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0), (3.0, 3.0)]);
        assert_eq!(coords(&non_dominated(&p)), [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]);
        let hv = hypervolume_2d(&p[..3], (4.0, 4.0)).unwrap();
        assert!((hv - 6.0).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (mc, _) = monte_carlo(&p[..3], (4.0, 4.0), 1_000_000, &mut rng);
        assert!((mc - 6.0).abs() < 1e-2);
    }

    #[test]
    fn degenerate_fronts() {
        assert_eq!(hypervolume_2d(&[], (1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(hypervolume_2d(&pts(&[(4.0, 4.0)]), (4.0, 4.0)).unwrap(), 0.0);
        let one = pts(&[(1.0, 2.0)]);
        assert_eq!(non_dominated(&one).points, one);
        let same = pts(&[(2.0, 2.0), (2.0, 2.0), (2.0, 2.0)]);
        let f = non_dominated(&same);
        assert_eq!(f.len(), 1);
        assert_eq!(f.points[0].source, "0");
    }

    #[test]
    fn point_outside_reference_is_named() {
        let err = hypervolume_2d(&pts(&[(1.0, 1.0), (5.0, 2.0)]), (4.0, 4.0)).unwrap_err();
        assert!(err.to_string().contains('5'), "{err}");
    }

    #[test]
    fn cumulative_reward_hand_trace() {
        use crate::model::Orientation;
        let rec = |agent, raw, reward| StepRecord {
            step: 0,
            chiplet: "c".into(),
            agent,
            action: 0,
            row: 0,
            col: 0,
            orientation: Orientation::R0,
            raw_reward: raw,
            reward,
            raw_wire_reward: 0.0,
            raw_thermal_reward: 0.0,
            wl: 0.0,
            temp: 0.0,
        };
        let single = cumulative_reward(&[rec(AgentRole::Wire, -2.5, 0.9)]);
        assert_eq!(single.combined.raw, -2.5);
        let trace = [
            rec(AgentRole::Thermal, -4.0, 0.84),
            rec(AgentRole::Wire, -1.5, 0.95),
            rec(AgentRole::Wire, -0.5, 0.99),
        ];
        let c = cumulative_reward(&trace);
        assert_eq!(c.per_agent[&AgentRole::Thermal].raw, -4.0);
        assert!((c.per_agent[&AgentRole::Wire].raw + 2.0).abs() < 1e-12);
        assert!((c.per_agent[&AgentRole::Wire].normalized - 1.94).abs() < 1e-12);
        assert!((c.combined.raw + 6.0).abs() < 1e-12);
        assert_eq!(c.combined.steps, 3);
    }

    #[test]
    fn front_rows_flag_dominated_points() {
        let p = pts(&[(1.0, 3.0), (3.0, 3.0), (2.0, 2.0)]);
        let flags: Vec<bool> = front_rows(&p).iter().map(|r| r.dominated).collect();
        assert_eq!(flags, [false, true, false]);
    }

    #[test]
    fn reference_point_margin() {
        let a = pts(&[(1.0, 50.0), (10.0, 40.0)]);
        let b = pts(&[(4.0, 80.0)]);
        let r = reference_point([&a[..], &b[..]], 0.05).unwrap();
        assert!((r.0 - 10.5).abs() < 1e-12 && (r.1 - 84.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_monte_carlo_on_random_fronts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(1..=20);
            let p: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
            let p = pts(&p);
            let hv = hypervolume_2d(&p, (10.0, 10.0)).unwrap();
            let (mc, sd) = monte_carlo(&p, (10.0, 10.0), 200_000, &mut rng);
            assert!((hv - mc).abs() <= 3.0 * sd + 1e-9, "{hv} vs {mc} ± {sd}");
        }
    }

    fn cloud() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 0..30)
    }

    proptest! {
        #[test]
        fn front_matches_pairwise_filter(xs in cloud()) {
            let p = pts(&xs);
            prop_assert_eq!(coords(&non_dominated(&p)), brute_front(&p));
        }

        #[test]
        fn non_dominated_is_idempotent(xs in cloud()) {
            let once = non_dominated(&pts(&xs));
            let twice = non_dominated(&once.points);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn front_is_strictly_monotone(xs in cloud()) {
            let f = non_dominated(&pts(&xs));
            for w in f.points.windows(2) {
                prop_assert!(w[0].wl_mm < w[1].wl_mm);
                prop_assert!(w[0].temp_c > w[1].temp_c);
            }
        }

        #[test]
        fn hypervolume_monotone_under_union(xs in cloud(), q in (0.0f64..100.0, 0.0f64..100.0)) {
            let p = pts(&xs);
            let r = (100.0, 100.0);
            let base = hypervolume_2d(&p, r).unwrap();
            let mut more = p.clone();
            more.push(ParetoPoint::new("m", 0, "q", q.0, q.1));
            prop_assert!(hypervolume_2d(&more, r).unwrap() >= base - 1e-9);
        }
    }
}
