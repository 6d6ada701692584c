//! Success-rate heatmaps: the workspace is split into cells, each cell gets a
//! batch of trials with targets inside it, and the fraction of successes is
//! reported per cell.

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::geometry::ModuleGeometry;
use crate::output::write_atomic;
use crate::plant::{FabricConfig, ObjectSpec, SensorConfig};
use crate::trial::{run_trial, Outcome, TrialConfig, TrialRecord};

/// Where each trial's object starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartPolicy {
    /// Uniform over the whole workspace.
    Uniform,
    /// Always the center of the sheet.
    Center,
    /// Start equals target; a null run that should always succeed.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells_x: usize,
    pub cells_y: usize,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    /// Episode length for every trial (s).
    pub runtime: f64,
    pub start: StartPolicy,
    pub dwell_samples: usize,
}

impl GridSpec {
    /// 10 x 10 cells, 3 trials each, 6 s episodes.
    pub fn desk() -> Self {
        Self {
            cells_x: 10,
            cells_y: 10,
            trials_per_cell: 3,
            master_seed: 0,
            runtime: 6.0,
            start: StartPolicy::Uniform,
            dwell_samples: 3,
        }
    }

    /// 20 x 20 cells of 2.5 cm, 10 trials each, 10 s episodes.
    pub fn full() -> Self {
        Self {
            cells_x: 20,
            cells_y: 20,
            trials_per_cell: 10,
            runtime: 10.0,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells_x == 0 || self.cells_y == 0 {
            return Err(Error::config(
                "grid.cells_x",
                "grid needs at least one cell per axis",
            ));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::config("grid.trials_per_cell", "must be at least 1"));
        }
        if !(self.runtime.is_finite() && self.runtime > 0.0) {
            return Err(Error::config(
                "grid.runtime",
                format!("must be > 0, got {}", self.runtime),
            ));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.cells_x * self.cells_y
    }

    /// `[x0, x1, y0, y1]` of cell `(i, j)`; `i` runs along +x, `j` along +y.
    pub fn cell_bounds(&self, geo: &ModuleGeometry, i: usize, j: usize) -> [f64; 4] {
        let (w, d) = (geo.width_m, geo.depth_m);
        let cw = w / self.cells_x as f64;
        let cd = d / self.cells_y as f64;
        let x1 = if i + 1 == self.cells_x {
            w / 2.0
        } else {
            -w / 2.0 + (i + 1) as f64 * cw
        };
        let y1 = if j + 1 == self.cells_y {
            d / 2.0
        } else {
            -d / 2.0 + (j + 1) as f64 * cd
        };
        [-w / 2.0 + i as f64 * cw, x1, -d / 2.0 + j as f64 * cd, y1]
    }

    /// Cell containing `xy`; the last cell on each axis is closed.
    pub fn cell_of(&self, geo: &ModuleGeometry, xy: [f64; 2]) -> Option<(usize, usize)> {
        if !geo.contains(xy) {
            return None;
        }
        let u = (xy[0] + geo.width_m / 2.0) / geo.width_m * self.cells_x as f64;
        let v = (xy[1] + geo.depth_m / 2.0) / geo.depth_m * self.cells_y as f64;
        Some((
            (u as usize).min(self.cells_x - 1),
            (v as usize).min(self.cells_y - 1),
        ))
    }
}

/// Seed of trial `k` in cell `(i, j)`, independent of evaluation order.
pub fn trial_seed(master: u64, i: usize, j: usize, k: usize) -> u64 {
    let mut h = master;
    for part in [i as u64, j as u64, k as u64] {
        h = splitmix64(h ^ splitmix64(part));
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Start, target, and noise seed of one grid trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub cell: (usize, usize),
    pub index: usize,
    pub start: [f64; 2],
    pub target: [f64; 2],
    pub seed: u64,
}

/// All trials of a grid in row-major order (`j` outer, `i` inner, then `k`).
pub fn plan_trials(grid: &GridSpec, geo: &ModuleGeometry) -> Vec<TrialPlan> {
    let (hw, hd) = (geo.width_m / 2.0, geo.depth_m / 2.0);
    let mut plans = Vec::with_capacity(grid.cell_count() * grid.trials_per_cell);
    for j in 0..grid.cells_y {
        for i in 0..grid.cells_x {
            let [x0, x1, y0, y1] = grid.cell_bounds(geo, i, j);
            for k in 0..grid.trials_per_cell {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(grid.master_seed, i, j, k));
                let target = [rng.gen_range(x0..x1), rng.gen_range(y0..y1)];
                let uniform = [rng.gen_range(-hw..=hw), rng.gen_range(-hd..=hd)];
                let start = match grid.start {
                    StartPolicy::Uniform => uniform,
                    StartPolicy::Center => [0.0, 0.0],
                    StartPolicy::Target => target,
                };
                plans.push(TrialPlan {
                    cell: (i, j),
                    index: k,
                    start,
                    target,
                    seed: rng.next_u64(),
                });
            }
        }
    }
    plans
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Success,
    Uncertain,
    Failure,
}

pub const DEFAULT_THRESHOLDS: (f64, f64) = (0.9, 0.1);

/// Per-cell success rates. Vectors are row-major with row 0 at the -y edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessGrid {
    pub cells_x: usize,
    pub cells_y: usize,
    pub rates: Vec<f64>,
    pub regions: Vec<Region>,
    /// Sum of all cell rates.
    pub aggregate: f64,
}

impl SuccessGrid {
    pub fn from_rates(cells_x: usize, cells_y: usize, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != cells_x * cells_y {
            return Err(Error::invalid(format!(
                "{} rates for a {cells_x}x{cells_y} grid",
                rates.len()
            )));
        }
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid("rates must lie in [0, 1]"));
        }
        let (hi, lo) = DEFAULT_THRESHOLDS;
        let regions = classify_regions(&rates, hi, lo)?;
        let aggregate = rates.iter().sum();
        Ok(Self {
            cells_x,
            cells_y,
            rates,
            regions,
            aggregate,
        })
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[j * self.cells_x + i]
    }

    fn mean_over(&self, cells: &[(usize, usize)]) -> f64 {
        cells.iter().map(|&(i, j)| self.rate(i, j)).sum::<f64>() / cells.len() as f64
    }

    /// Mean rate of the four corner cells.
    pub fn corner_mean(&self) -> f64 {
        let (mx, my) = (self.cells_x - 1, self.cells_y - 1);
        self.mean_over(&[(0, 0), (mx, 0), (0, my), (mx, my)])
    }

    /// Mean rate of the central cells: the middle 2 x 2 block (or the single
    /// middle row/column on odd grids).
    pub fn center_mean(&self) -> f64 {
        let span = |n: usize| {
            if n.is_multiple_of(2) {
                vec![n / 2 - 1, n / 2]
            } else {
                vec![n / 2]
            }
        };
        let mut cells = Vec::new();
        for j in span(self.cells_y) {
            for i in span(self.cells_x) {
                cells.push((i, j));
            }
        }
        self.mean_over(&cells)
    }

    /// Mean rate of the cells on the grid border.
    pub fn edge_mean(&self) -> f64 {
        let mut cells = Vec::new();
        for j in 0..self.cells_y {
            for i in 0..self.cells_x {
                if i == 0 || j == 0 || i + 1 == self.cells_x || j + 1 == self.cells_y {
                    cells.push((i, j));
                }
            }
        }
        self.mean_over(&cells)
    }

    /// Rows from the +y edge down, as in a top view.
    pub fn rows_top_down<T: Copy>(&self, values: &[T]) -> Vec<Vec<T>> {
        (0..self.cells_y)
            .rev()
            .map(|j| values[j * self.cells_x..(j + 1) * self.cells_x].to_vec())
            .collect()
    }
}

/// Labels each rate: `>= hi` is Success, `<= lo` is Failure, anything in
/// between is Uncertain.
pub fn classify_regions(rates: &[f64], hi: f64, lo: f64) -> Result<Vec<Region>> {
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::invalid(format!(
            "thresholds need 0 <= lo < hi <= 1, got lo {lo}, hi {hi}"
        )));
    }
    Ok(rates
        .iter()
        .map(|&r| {
            if r >= hi {
                Region::Success
            } else if r <= lo {
                Region::Failure
            } else {
                Region::Uncertain
            }
        })
        .collect())
}

/// Everything a grid trial needs besides its plan.
#[derive(Debug, Clone)]
pub struct Experiment<'a> {
    pub controller: &'a ControllerConfig,
    pub object: &'a ObjectSpec,
    pub geo: &'a ModuleGeometry,
    pub fabric: &'a FabricConfig,
    pub sensor: SensorConfig,
}

impl Experiment<'_> {
    pub fn trial_config(&self, grid: &GridSpec, plan: &TrialPlan) -> TrialConfig {
        TrialConfig {
            controller: self.controller.clone(),
            object: self.object.clone(),
            start_xy: plan.start,
            target_xy: plan.target,
            runtime: grid.runtime,
            seed: plan.seed,
            dwell_samples: grid.dwell_samples,
            sensor: self.sensor,
        }
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::config("jobs", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs independent trials in parallel; output order matches input order.
pub fn run_batch(
    configs: &[TrialConfig],
    geo: &ModuleGeometry,
    fabric: &FabricConfig,
    jobs: Option<usize>,
) -> Result<Vec<TrialRecord>> {
    for c in configs {
        c.validate(geo, fabric)?;
    }
    with_jobs(jobs, || {
        configs
            .par_iter()
            .map(|c| run_trial(c, geo, fabric))
            .collect()
    })?
}

pub fn success_rate(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records
        .iter()
        .filter(|r| r.outcome == Outcome::Success)
        .count() as f64
        / records.len() as f64
}

pub fn run_grid(grid: &GridSpec, exp: &Experiment, jobs: Option<usize>) -> Result<SuccessGrid> {
    grid.validate()?;
    let plans = plan_trials(grid, exp.geo);
    let configs: Vec<TrialConfig> = plans.iter().map(|p| exp.trial_config(grid, p)).collect();
    let records = run_batch(&configs, exp.geo, exp.fabric, jobs)?;
    let per_cell = grid.trials_per_cell;
    let rates = records.chunks(per_cell).map(success_rate).collect();
    SuccessGrid::from_rates(grid.cells_x, grid.cells_y, rates)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDiff {
    pub cells_x: usize,
    pub cells_y: usize,
    /// `a.rate - b.rate` per cell, row-major with row 0 at the -y edge.
    pub diff: Vec<f64>,
    pub aggregate_a: f64,
    pub aggregate_b: f64,
    pub aggregate_diff: f64,
    /// `(a - b) / b`: improvement relative to the `b` baseline.
    pub improvement_over_b: Option<f64>,
    /// `(a - b) / a`: share of `a`'s aggregate that `b` misses.
    pub share_of_a: Option<f64>,
}

pub fn diff_grids(a: &SuccessGrid, b: &SuccessGrid) -> Result<GridDiff> {
    if (a.cells_x, a.cells_y) != (b.cells_x, b.cells_y) {
        return Err(Error::invalid(format!(
            "cannot diff a {}x{} grid with a {}x{} grid",
            a.cells_x, a.cells_y, b.cells_x, b.cells_y
        )));
    }
    let diff = a.rates.iter().zip(&b.rates).map(|(x, y)| x - y).collect();
    let d = a.aggregate - b.aggregate;
    let ratio = |den: f64| (den != 0.0).then(|| d / den);
    Ok(GridDiff {
        cells_x: a.cells_x,
        cells_y: a.cells_y,
        diff,
        aggregate_a: a.aggregate,
        aggregate_b: b.aggregate,
        aggregate_diff: d,
        improvement_over_b: ratio(b.aggregate),
        share_of_a: ratio(a.aggregate),
    })
}

/// Matrix CSV, one line per row, row 0 at the +y edge.
pub fn matrix_csv(cells_x: usize, cells_y: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for j in (0..cells_y).rev() {
        let row: Vec<String> = values[j * cells_x..(j + 1) * cells_x]
            .iter()
            .map(|v| v.to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Binary 8-bit grayscale image of the rates, white = 1.0, top row = +y.
pub fn rates_pgm(grid: &SuccessGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.cells_x, grid.cells_y).into_bytes();
    for j in (0..grid.cells_y).rev() {
        for i in 0..grid.cells_x {
            out.push((grid.rate(i, j) * 255.0).round() as u8);
        }
    }
    out
}

#[derive(Serialize)]
struct GridJson<'a, C: Serialize> {
    cells_x: usize,
    cells_y: usize,
    aggregate: f64,
    /// Rows from the +y edge down.
    rates: Vec<Vec<f64>>,
    regions: Vec<Vec<Region>>,
    thresholds: [f64; 2],
    config: &'a C,
}

/// Writes `{stem}.csv`, `{stem}.json` (with the resolved config), and `{stem}.pgm`.
pub fn write_grid<C: Serialize>(
    grid: &SuccessGrid,
    dir: &Path,
    stem: &str,
    config: &C,
) -> Result<()> {
    write_atomic(
        &dir.join(format!("{stem}.csv")),
        matrix_csv(grid.cells_x, grid.cells_y, &grid.rates).as_bytes(),
    )?;
    let json = GridJson {
        cells_x: grid.cells_x,
        cells_y: grid.cells_y,
        aggregate: grid.aggregate,
        rates: grid.rows_top_down(&grid.rates),
        regions: grid.rows_top_down(&grid.regions),
        thresholds: [DEFAULT_THRESHOLDS.0, DEFAULT_THRESHOLDS.1],
        config,
    };
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(&dir.join(format!("{stem}.json")), text.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}.pgm")), &rates_pgm(grid))
}

/// Writes `{stem}.csv` (signed per-cell differences) and `{stem}.json`.
pub fn write_diff<C: Serialize>(diff: &GridDiff, dir: &Path, stem: &str, config: &C) -> Result<()> {
    write_atomic(
        &dir.join(format!("{stem}.csv")),
        matrix_csv(diff.cells_x, diff.cells_y, &diff.diff).as_bytes(),
    )?;
    #[derive(Serialize)]
    struct DiffJson<'a, C: Serialize> {
        cells_x: usize,
        cells_y: usize,
        /// Rows from the +y edge down.
        diff: Vec<Vec<f64>>,
        aggregate_a: f64,
        aggregate_b: f64,
        aggregate_diff: f64,
        improvement_over_b: Option<f64>,
        share_of_a: Option<f64>,
        config: &'a C,
    }
    let rows = (0..diff.cells_y)
        .rev()
        .map(|j| diff.diff[j * diff.cells_x..(j + 1) * diff.cells_x].to_vec())
        .collect();
    let json = DiffJson {
        cells_x: diff.cells_x,
        cells_y: diff.cells_y,
        diff: rows,
        aggregate_a: diff.aggregate_a,
        aggregate_b: diff.aggregate_b,
        aggregate_diff: diff.aggregate_diff,
        improvement_over_b: diff.improvement_over_b,
        share_of_a: diff.share_of_a,
        config,
    };
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(&dir.join(format!("{stem}.json")), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(cx: usize, cy: usize, rates: &[f64]) -> SuccessGrid {
        SuccessGrid::from_rates(cx, cy, rates.to_vec()).unwrap()
    }

    #[test]
    fn region_thresholds() {
        let r = classify_regions(&[1.0, 0.0, 0.5, 0.9, 0.1], 0.9, 0.1).unwrap();
        use Region::*;
        assert_eq!(r, vec![Success, Failure, Uncertain, Success, Failure]);
        assert!(classify_regions(&[0.5], 0.1, 0.9).is_err());
        assert!(classify_regions(&[0.5], 1.5, 0.1).is_err());
        assert!(classify_regions(&[0.5], 0.5, 0.5).is_err());
    }

    #[test]
    fn diff_of_published_aggregates() {
        let a = SuccessGrid {
            cells_x: 1,
            cells_y: 1,
            rates: vec![1.0],
            regions: vec![Region::Success],
            aggregate: 171.30,
        };
        let b = SuccessGrid {
            aggregate: 108.20,
            ..a.clone()
        };
        let d = diff_grids(&a, &b).unwrap();
        assert_relative_eq!(d.aggregate_diff, 63.10, epsilon = 1e-9);
        assert_relative_eq!(d.improvement_over_b.unwrap(), 0.5832, epsilon = 1e-4);
        assert_relative_eq!(d.share_of_a.unwrap(), 0.3684, epsilon = 1e-4);
    }

    #[test]
    fn diff_with_itself_is_zero() {
        let g = grid(2, 2, &[0.1, 0.5, 1.0, 0.0]);
        let d = diff_grids(&g, &g).unwrap();
        assert!(d.diff.iter().all(|x| *x == 0.0));
        assert_eq!(d.aggregate_diff, 0.0);
    }

    #[test]
    fn mismatched_grids_do_not_diff() {
        assert!(diff_grids(&grid(2, 2, &[0.0; 4]), &grid(1, 4, &[0.0; 4])).is_err());
    }

    #[test]
    fn cells_tile_the_workspace() {
        let geo = ModuleGeometry::default();
        let g = GridSpec::full();
        assert_eq!(g.cell_bounds(&geo, 0, 0)[0], -0.25);
        assert_eq!(g.cell_bounds(&geo, 19, 19)[1], 0.25);
        assert_eq!(g.cell_bounds(&geo, 19, 19)[3], 0.25);
        for i in 0..19 {
            assert_eq!(
                g.cell_bounds(&geo, i, 0)[1],
                g.cell_bounds(&geo, i + 1, 0)[0]
            );
        }
        assert_relative_eq!(
            g.cell_bounds(&geo, 3, 0)[1] - g.cell_bounds(&geo, 3, 0)[0],
            0.025,
            epsilon = 1e-12
        );
        assert_eq!(g.cell_of(&geo, [0.25, 0.25]), Some((19, 19)));
        assert_eq!(g.cell_of(&geo, [-0.25, -0.25]), Some((0, 0)));
        assert_eq!(g.cell_of(&geo, [0.0, 0.0]), Some((10, 10)));
        assert_eq!(g.cell_of(&geo, [0.3, 0.0]), None);
    }

    #[test]
    fn plans_stay_in_their_cells_and_are_reproducible() {
        let geo = ModuleGeometry::default();
        let g = GridSpec::desk();
        let plans = plan_trials(&g, &geo);
        assert_eq!(plans.len(), 300);
        for p in &plans {
            assert_eq!(g.cell_of(&geo, p.target), Some(p.cell));
            assert!(geo.contains(p.start));
        }
        assert_eq!(plans, plan_trials(&g, &geo));
        let other = plan_trials(
            &GridSpec {
                master_seed: 1,
                ..g
            },
            &geo,
        );
        assert_ne!(plans[0].target, other[0].target);
    }

    #[test]
    fn trial_seeds_differ_across_indices() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    assert!(seen.insert(trial_seed(7, i, j, k)));
                }
            }
        }
    }

    #[test]
    fn image_is_top_down_and_scaled() {
        // Row 0 of the grid is the -y edge; the image starts at +y.
        let g = grid(2, 2, &[0.0, 1.0, 0.5, 0.25]);
        let pgm = rates_pgm(&g);
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(&pgm[header.len()..], &[128, 64, 0, 255]);
        assert_eq!(matrix_csv(2, 2, &g.rates), "0.5,0.25\n0,1\n");
    }

    #[test]
    fn summary_means() {
        let mut rates = vec![0.0; 16];
        for (i, j) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            rates[j * 4 + i] = 1.0;
        }
        rates[0] = 0.5;
        let g = grid(4, 4, &rates);
        assert_eq!(g.center_mean(), 1.0);
        assert_eq!(g.corner_mean(), 0.125);
        assert_relative_eq!(g.edge_mean(), 0.5 / 12.0);
    }

    #[test]
    fn start_on_target_grid_is_all_success() {
        let geo = ModuleGeometry::default();
        let spec = GridSpec {
            cells_x: 2,
            cells_y: 2,
            trials_per_cell: 1,
            start: StartPolicy::Target,
            ..GridSpec::desk()
        };
        let exp = Experiment {
            controller: &ControllerConfig::manhattan(&geo),
            object: &ObjectSpec::preset("sphere").unwrap().0,
            geo: &geo,
            fabric: &FabricConfig::default(),
            sensor: SensorConfig::default(),
        };
        let g = run_grid(&spec, &exp, Some(2)).unwrap();
        assert_eq!(g.rates, vec![1.0; 4]);
        assert_eq!(g.aggregate, 4.0);
    }

    #[test]
    fn bad_grid_aborts_before_running() {
        let geo = ModuleGeometry::default();
        let spec = GridSpec {
            trials_per_cell: 0,
            ..GridSpec::desk()
        };
        let exp = Experiment {
            controller: &ControllerConfig::manhattan(&geo),
            object: &ObjectSpec::preset("sphere").unwrap().0,
            geo: &geo,
            fabric: &FabricConfig::default(),
            sensor: SensorConfig::default(),
        };
        assert!(run_grid(&spec, &exp, None).is_err());
        assert!(with_jobs(Some(0), || ()).is_err());
    }

    proptest! {
        #[test]
        fn aggregate_is_the_sum_of_rates(rates in proptest::collection::vec(0.0f64..=1.0, 12)) {
            let g = grid(3, 4, &rates);
            prop_assert!((g.aggregate - rates.iter().sum::<f64>()).abs() <= 1e-12);
            prop_assert!(g.aggregate >= 0.0 && g.aggregate <= 12.0);
        }
    }
}
