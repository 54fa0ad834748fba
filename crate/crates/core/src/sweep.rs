//! Parameter grids over AI counts, offers and selection intensity, plus the
//! summaries computed from them: critical-mass scans, trade-off frontiers,
//! per-axis marginal curves and histogram-style frequencies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ParamError, SweepError};
use crate::game::{AiProposerKind, GameParams, MonomorphicState, PopulationConfig, Role};
use crate::markov::{stationary_for, StationaryDistribution};
use crate::numeric::fmt_sig;

pub const CSV_HEADER: &str =
    "ai_kind,N_P,N_R,M_P,M_R,h,l,beta,pi_HH,pi_HL,pi_LH,pi_LL,frac_HP,frac_HR,degenerate";

/// Stationary mass of HH above which HH counts as dominant in threshold scans.
pub const DOMINANCE_CUTOFF: f64 = 0.5;

const CHUNK: usize = 4096;

/// Inclusive integer range `start, start+step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub start: u32,
    pub stop: u32,
    pub step: u32,
}

impl CountRange {
    pub fn single(v: u32) -> Self {
        CountRange { start: v, stop: v, step: 1 }
    }

    pub fn len(&self) -> u64 {
        if self.stop < self.start || self.step == 0 {
            0
        } else {
            u64::from((self.stop - self.start) / self.step) + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: u64) -> u32 {
        self.start + self.step * i as u32
    }

    pub fn values(&self) -> Vec<u32> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

/// Inclusive real range. Values are rounded to 12 significant digits so
/// that `0.4 + 3 * 0.01` prints and compares as `0.43`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ValueRange {
    pub fn single(v: f64) -> Self {
        ValueRange { start: v, stop: v, step: 1.0 }
    }

    pub fn len(&self) -> u64 {
        if !(self.step > 0.0) || self.stop < self.start {
            return if self.start == self.stop { 1 } else { 0 };
        }
        ((self.stop - self.start) / self.step + 1e-9).floor() as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: u64) -> f64 {
        round12(self.start + self.step * i as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

fn round12(x: f64) -> f64 {
    fmt_sig(x).parse().expect("formatted float parses")
}

/// A rectangular lattice over `(M_P, M_R, h, l, beta)` for fixed human
/// population sizes and AI kind. Points are ordered lexicographically in
/// that coordinate order, `beta` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub ai_proposer_kind: AiProposerKind,
    pub n_p: u32,
    pub n_r: u32,
    pub m_p: CountRange,
    pub m_r: CountRange,
    pub h: ValueRange,
    pub l: ValueRange,
    pub beta: Vec<f64>,
}

impl GridSpec {
    /// Both AI counts 0..=100 step 5, h in [0.4, 0.6] and l in [0.1, 0.3]
    /// step 0.01, four selection intensities.
    pub fn robustness(kind: AiProposerKind) -> Self {
        let m = CountRange { start: 0, stop: 100, step: 5 };
        GridSpec {
            ai_proposer_kind: kind,
            n_p: 100,
            n_r: 100,
            m_p: m,
            m_r: match kind {
                AiProposerKind::Samaritan => m,
                AiProposerKind::Discriminatory => CountRange::single(0),
            },
            h: ValueRange { start: 0.4, stop: 0.6, step: 0.01 },
            l: ValueRange { start: 0.1, stop: 0.3, step: 0.01 },
            beta: vec![0.1, 1.0, 10.0, 100.0],
        }
    }

    pub fn single(cfg: &PopulationConfig, game: &GameParams) -> Self {
        GridSpec {
            ai_proposer_kind: cfg.ai_proposer_kind,
            n_p: cfg.n_p,
            n_r: cfg.n_r,
            m_p: CountRange::single(cfg.m_p),
            m_r: CountRange::single(cfg.m_r),
            h: ValueRange::single(game.h),
            l: ValueRange::single(game.l),
            beta: vec![cfg.beta],
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        PopulationConfig {
            n_p: self.n_p,
            n_r: self.n_r,
            ..Default::default()
        }
        .validate()?;
        for b in &self.beta {
            if !b.is_finite() || *b < 0.0 {
                return Err(ParamError::InvalidBeta(*b));
            }
        }
        for (name, r) in [("h", self.h), ("l", self.l)] {
            if !(r.start.is_finite() && r.stop.is_finite() && r.step.is_finite()) {
                return Err(ParamError::NonFinite(name));
            }
        }
        if self.total_points() == 0 {
            return Err(ParamError::Invalid("grid has no points".into()));
        }
        Ok(())
    }

    fn dims(&self) -> [u64; 5] {
        [
            self.m_p.len(),
            self.m_r.len(),
            self.h.len(),
            self.l.len(),
            self.beta.len() as u64,
        ]
    }

    /// Lattice size, invalid `(h, l)` combinations included.
    pub fn total_points(&self) -> u64 {
        self.dims().iter().product()
    }

    /// The point at lexicographic `index`.
    pub fn point(&self, index: u64) -> (PopulationConfig, GameParams) {
        let d = self.dims();
        let mut rest = index;
        let mut idx = [0u64; 5];
        for a in (0..5).rev() {
            idx[a] = rest % d[a];
            rest /= d[a];
        }
        let cfg = PopulationConfig {
            n_p: self.n_p,
            n_r: self.n_r,
            m_p: self.m_p.get(idx[0]),
            m_r: self.m_r.get(idx[1]),
            ai_proposer_kind: self.ai_proposer_kind,
            beta: self.beta[idx[4] as usize],
        };
        let game = GameParams {
            h: self.h.get(idx[2]),
            l: self.l.get(idx[3]),
        };
        (cfg, game)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub cfg: PopulationConfig,
    pub game: GameParams,
    pub stationary: StationaryDistribution,
}

impl SweepRecord {
    pub fn compute(cfg: &PopulationConfig, game: &GameParams) -> Result<Self, SweepError> {
        Ok(SweepRecord {
            cfg: *cfg,
            game: *game,
            stationary: stationary_for(cfg, game)?,
        })
    }

    pub fn mass(&self, s: MonomorphicState) -> f64 {
        self.stationary.mass(s)
    }

    pub fn csv_row(&self) -> String {
        let c = &self.cfg;
        let st = &self.stationary;
        let mut row = format!(
            "{},{},{},{},{},{},{},{}",
            c.ai_proposer_kind,
            c.n_p,
            c.n_r,
            c.m_p,
            c.m_r,
            fmt_sig(self.game.h),
            fmt_sig(self.game.l),
            fmt_sig(c.beta)
        );
        for p in st.pi {
            row.push(',');
            row.push_str(&fmt_sig(p));
        }
        row.push_str(&format!(
            ",{},{},{}",
            fmt_sig(st.frac_high_proposers()),
            fmt_sig(st.frac_high_receivers()),
            st.degenerate
        ));
        row
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSummary {
    pub total: u64,
    pub records: u64,
    pub skipped: u64,
    pub degenerate: u64,
}

impl GridSummary {
    pub fn footer(&self) -> String {
        format!(
            "# total={} records={} skipped={} degenerate={}",
            self.total, self.records, self.skipped, self.degenerate
        )
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SweepError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))
}

/// Evaluates every valid point of `spec` on `workers` threads and hands the
/// records to `sink` in lexicographic order. Points with `l >= h` are
/// skipped and counted.
pub fn run_grid<F>(spec: &GridSpec, workers: usize, mut sink: F) -> Result<GridSummary, SweepError>
where
    F: FnMut(&SweepRecord) -> Result<(), SweepError>,
{
    spec.validate()?;
    let pool = pool(workers)?;
    let total = spec.total_points();
    let mut summary = GridSummary {
        total,
        ..Default::default()
    };
    let mut start = 0u64;
    while start < total {
        let end = (start + CHUNK as u64).min(total);
        let chunk: Vec<Result<Option<SweepRecord>, SweepError>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let (cfg, game) = spec.point(i);
                    if game.validate().is_err() {
                        return Ok(None);
                    }
                    stationary_for(&cfg, &game)
                        .map(|stationary| Some(SweepRecord { cfg, game, stationary }))
                        .map_err(|source| SweepError::Point { index: i, source })
                })
                .collect()
        });
        for r in chunk {
            match r? {
                Some(rec) => {
                    summary.records += 1;
                    summary.degenerate += u64::from(rec.stationary.degenerate);
                    sink(&rec)?;
                }
                None => summary.skipped += 1,
            }
        }
        start = end;
    }
    Ok(summary)
}

/// Streams the grid as CSV: header, one row per record, summary footer.
pub fn write_grid_csv<W: Write>(
    spec: &GridSpec,
    workers: usize,
    out: &mut W,
    mut also: impl FnMut(&SweepRecord),
) -> Result<GridSummary, SweepError> {
    writeln!(out, "{CSV_HEADER}")?;
    let summary = run_grid(spec, workers, |rec| {
        also(rec);
        writeln!(out, "{}", rec.csv_row())?;
        Ok(())
    })?;
    writeln!(out, "{}", summary.footer())?;
    Ok(summary)
}

/// Smallest AI count in `role` (0..=limit) that pushes the stationary mass
/// of HH above `cutoff`, by linear scan. `base` supplies everything else.
pub fn threshold_search(
    base: &PopulationConfig,
    game: &GameParams,
    vary: Role,
    limit: u32,
    cutoff: f64,
) -> Result<u32, SweepError> {
    for m in 0..=limit {
        let mut cfg = *base;
        match vary {
            Role::Proposer => cfg.m_p = m,
            Role::Receiver => cfg.m_r = m,
        }
        if stationary_for(&cfg, game)?.mass(MonomorphicState::HH) > cutoff {
            return Ok(m);
        }
    }
    Err(SweepError::NotReached { limit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub m_p: u32,
    /// `None` when no receiver count up to the limit suffices.
    pub m_r: Option<u32>,
}

/// For every `M_P` in `m_p`, the smallest `M_R <= limit` making HH dominant.
pub fn tradeoff_frontier(
    base: &PopulationConfig,
    game: &GameParams,
    m_p: CountRange,
    limit: u32,
    cutoff: f64,
) -> Result<Vec<FrontierPoint>, SweepError> {
    m_p.values()
        .into_par_iter()
        .map(|mp| {
            let cfg = PopulationConfig { m_p: mp, ..*base };
            match threshold_search(&cfg, game, Role::Receiver, limit, cutoff) {
                Ok(mr) => Ok(FrontierPoint { m_p: mp, m_r: Some(mr) }),
                Err(SweepError::NotReached { .. }) => Ok(FrontierPoint { m_p: mp, m_r: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    MP,
    MR,
    H,
    L,
    Beta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::MP => "M_P",
            Axis::MR => "M_R",
            Axis::H => "h",
            Axis::L => "l",
            Axis::Beta => "beta",
        }
    }

    pub fn value(self, rec: &SweepRecord) -> f64 {
        match self {
            Axis::MP => f64::from(rec.cfg.m_p),
            Axis::MR => f64::from(rec.cfg.m_r),
            Axis::H => rec.game.h,
            Axis::L => rec.game.l,
            Axis::Beta => rec.cfg.beta,
        }
    }
}

/// Running mean and population standard deviation (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn std(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).max(0.0).sqrt()
        }
    }
}

/// Mean and spread of each stationary mass at one value of an axis,
/// taken over every other grid dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalPoint {
    pub value: f64,
    /// Indexed like [`MonomorphicState::ALL`].
    pub masses: [Moments; 4],
}

/// Accumulates marginal curves along one axis while a grid streams past.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCurves {
    pub axis: Axis,
    points: Vec<MarginalPoint>,
}

impl MarginalCurves {
    pub fn new(axis: Axis) -> Self {
        MarginalCurves { axis, points: Vec::new() }
    }

    pub fn push(&mut self, rec: &SweepRecord) {
        let v = self.axis.value(rec);
        let i = match self.points.binary_search_by(|p| p.value.total_cmp(&v)) {
            Ok(i) => i,
            Err(i) => {
                self.points.insert(
                    i,
                    MarginalPoint {
                        value: v,
                        masses: [Moments::default(); 4],
                    },
                );
                i
            }
        };
        for (m, p) in self.points[i].masses.iter_mut().zip(rec.stationary.pi) {
            m.push(p);
        }
    }

    /// Points sorted by axis value.
    pub fn points(&self) -> &[MarginalPoint] {
        &self.points
    }

    pub fn mean_curve(&self, s: MonomorphicState) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.value, p.masses[s.index()].mean))
            .collect()
    }

    pub const CSV_HEADER: &'static str = "axis,value,state,mean,std,n";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for p in &self.points {
            for s in MonomorphicState::ALL {
                let m = &p.masses[s.index()];
                out.push_str(&format!(
                    "{},{},{s},{},{},{}\n",
                    self.axis.name(),
                    fmt_sig(p.value),
                    fmt_sig(m.mean),
                    fmt_sig(m.std()),
                    m.n
                ));
            }
        }
        out
    }
}

/// Marginal curves of `records` along `axis`.
pub fn marginal_curves<'a>(
    records: impl IntoIterator<Item = &'a SweepRecord>,
    axis: Axis,
) -> MarginalCurves {
    let mut c = MarginalCurves::new(axis);
    for r in records {
        c.push(r);
    }
    c
}

/// How often a grid ends up in each regime. Cutoffs are fields so that
/// alternative readings of "nearly 1" can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySummary {
    /// HH counts as nearly certain when its mass exceeds this (strictly).
    pub hh_strict_cutoff: f64,
    /// ... or reaches this (inclusive).
    pub hh_inclusive_cutoff: f64,
    pub records: u64,
    pub hh_above_strict: u64,
    pub hh_at_least_inclusive: u64,
    /// Records whose largest mass is LL.
    pub ll_argmax: u64,
    /// Records with more than half the mass on LL.
    pub ll_majority: u64,
    pub degenerate: u64,
}

impl Default for FrequencySummary {
    fn default() -> Self {
        FrequencySummary {
            hh_strict_cutoff: 0.99,
            hh_inclusive_cutoff: 0.995,
            records: 0,
            hh_above_strict: 0,
            hh_at_least_inclusive: 0,
            ll_argmax: 0,
            ll_majority: 0,
            degenerate: 0,
        }
    }
}

impl FrequencySummary {
    pub fn push(&mut self, rec: &SweepRecord) {
        let st = &rec.stationary;
        let hh = st.mass(MonomorphicState::HH);
        let ll = st.mass(MonomorphicState::LL);
        self.records += 1;
        self.hh_above_strict += u64::from(hh > self.hh_strict_cutoff);
        self.hh_at_least_inclusive += u64::from(hh >= self.hh_inclusive_cutoff);
        self.ll_argmax += u64::from(st.argmax() == MonomorphicState::LL);
        self.ll_majority += u64::from(ll > 0.5);
        self.degenerate += u64::from(st.degenerate);
    }

    fn frac(&self, c: u64) -> f64 {
        c as f64 / self.records as f64
    }

    pub fn frac_hh_strict(&self) -> f64 {
        self.frac(self.hh_above_strict)
    }

    pub fn frac_hh_inclusive(&self) -> f64 {
        self.frac(self.hh_at_least_inclusive)
    }

    pub fn frac_ll_argmax(&self) -> f64 {
        self.frac(self.ll_argmax)
    }

    pub fn frac_ll_majority(&self) -> f64 {
        self.frac(self.ll_majority)
    }

    /// Human-readable lines; `lattice` is the full lattice size so the
    /// fractions can also be quoted over every point including skipped ones.
    pub fn report(&self, lattice: u64) -> String {
        let over = |c: u64| c as f64 / lattice as f64;
        format!(
            "records {}  (lattice {})\n\
             pi(HH) > {}: {} of valid points, {} of lattice\n\
             pi(HH) >= {}: {} of valid points, {} of lattice\n\
             LL largest mass: {} of valid points, {} of lattice\n\
             pi(LL) > 0.5: {} of valid points, {} of lattice\n\
             degenerate: {}\n",
            self.records,
            lattice,
            fmt_sig(self.hh_strict_cutoff),
            fmt_sig(self.frac_hh_strict()),
            fmt_sig(over(self.hh_above_strict)),
            fmt_sig(self.hh_inclusive_cutoff),
            fmt_sig(self.frac_hh_inclusive()),
            fmt_sig(over(self.hh_at_least_inclusive)),
            fmt_sig(self.frac_ll_argmax()),
            fmt_sig(over(self.ll_argmax)),
            fmt_sig(self.frac_ll_majority()),
            fmt_sig(over(self.ll_majority)),
            self.degenerate
        )
    }
}

impl FrequencySummary {
    pub const CSV_HEADER: &'static str = "metric,cutoff,count,records,lattice,fraction";

    pub fn to_csv(&self, lattice: u64) -> String {
        let row = |metric: &str, cutoff: String, count: u64| {
            format!(
                "{metric},{cutoff},{count},{},{lattice},{}\n",
                self.records,
                fmt_sig(count as f64 / self.records as f64)
            )
        };
        let mut out = format!("{}\n", Self::CSV_HEADER);
        out += &row("pi_HH_gt", fmt_sig(self.hh_strict_cutoff), self.hh_above_strict);
        out += &row("pi_HH_ge", fmt_sig(self.hh_inclusive_cutoff), self.hh_at_least_inclusive);
        out += &row("LL_argmax", String::new(), self.ll_argmax);
        out += &row("pi_LL_gt", "0.5".into(), self.ll_majority);
        out
    }
}
