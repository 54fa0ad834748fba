//! Canned data bundles, one per figure id: line data of human
//! fairness against AI counts, heatmaps over both AI counts, robustness
//! lattices with their frequency tables and marginal curves, and transition
//! reports for the discriminatory-proposer panels.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ParamError, SweepError};
use crate::game::{AiProposerKind, GameParams, PopulationConfig, Role};
use crate::markov::{stationary_for, transition_report, TransitionReport};
use crate::numeric::fmt_sig;
use crate::output::{write_atomic, AtomicFile, RunManifest};
use crate::sweep::{
    tradeoff_frontier, write_grid_csv, Axis, CountRange, FrequencySummary, GridSpec, MarginalCurves,
    ValueRange, DOMINANCE_CUTOFF,
};

pub const BETAS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

pub const FRACTIONS_HEADER: &str = "ai_kind,vary,M,role,beta,fraction";
pub const FRONTIER_HEADER: &str = "beta,M_P,M_R";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FigureId::Fig1 => "human H fractions against samaritan AI proposers and receivers",
            FigureId::Fig3 => "pi(HH) and pi(LL) over both samaritan AI counts, with frontiers",
            FigureId::Fig4 => "samaritan robustness lattice and regime frequencies",
            FigureId::Fig5 => "samaritan lattice marginals along M_P and M_R",
            FigureId::Fig6 => "samaritan lattice marginals along h and l",
            FigureId::Fig7 => "human H fractions against discriminatory AI proposers",
            FigureId::Fig8 => "transition reports for four discriminatory panels",
            FigureId::Fig9 => "discriminatory robustness lattice, frequencies and marginals",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ParamError::Invalid(format!("unknown figure `{s}`")))
    }
}

fn base_cfg(kind: AiProposerKind) -> PopulationConfig {
    PopulationConfig {
        ai_proposer_kind: kind,
        ..Default::default()
    }
}

/// Human H fractions in both roles as one AI count runs over `0..=100`
/// with the other held at zero, for each of [`BETAS`].
pub fn fraction_curves(kind: AiProposerKind, vary: &[Role]) -> Result<String, SweepError> {
    let game = GameParams::default();
    let mut jobs = Vec::new();
    for &v in vary {
        for beta in BETAS {
            for m in 0..=100u32 {
                jobs.push((v, beta, m));
            }
        }
    }
    let rows: Vec<Result<String, SweepError>> = jobs
        .par_iter()
        .map(|&(v, beta, m)| {
            let mut cfg = PopulationConfig { beta, ..base_cfg(kind) };
            match v {
                Role::Proposer => cfg.m_p = m,
                Role::Receiver => cfg.m_r = m,
            }
            let st = stationary_for(&cfg, &game)?;
            let axis = match v {
                Role::Proposer => "M_P",
                Role::Receiver => "M_R",
            };
            let b = fmt_sig(beta);
            Ok(format!(
                "{kind},{axis},{m},proposer,{b},{}\n{kind},{axis},{m},receiver,{b},{}\n",
                fmt_sig(st.frac_high_proposers()),
                fmt_sig(st.frac_high_receivers())
            ))
        })
        .collect();
    let mut out = format!("{FRACTIONS_HEADER}\n");
    for r in rows {
        out.push_str(&r?);
    }
    Ok(out)
}

/// Minimal `M_R` for every `M_P` in `0..=100`, per [`BETAS`]; `NA` where
/// no receiver count suffices.
pub fn frontier_csv() -> Result<String, SweepError> {
    let game = GameParams::default();
    let mut out = format!("{FRONTIER_HEADER}\n");
    for beta in BETAS {
        let base = PopulationConfig { beta, ..Default::default() };
        let pts = tradeoff_frontier(
            &base,
            &game,
            CountRange { start: 0, stop: 100, step: 1 },
            100,
            DOMINANCE_CUTOFF,
        )?;
        for p in pts {
            let mr = p.m_r.map_or_else(|| "NA".to_string(), |m| m.to_string());
            out.push_str(&format!("{},{},{mr}\n", fmt_sig(beta), p.m_p));
        }
    }
    Ok(out)
}

/// Both samaritan AI counts over `0..=100` step 1 at the baseline offers.
pub fn heatmap_spec() -> GridSpec {
    let m = CountRange { start: 0, stop: 100, step: 1 };
    GridSpec {
        ai_proposer_kind: AiProposerKind::Samaritan,
        n_p: 100,
        n_r: 100,
        m_p: m,
        m_r: m,
        h: ValueRange::single(0.5),
        l: ValueRange::single(0.1),
        beta: BETAS.to_vec(),
    }
}

/// What to keep from one pass over a lattice.
struct GridOutputs<'a> {
    grid: Option<&'a str>,
    frequencies: Option<&'a str>,
    marginals: Option<(&'a str, &'a [Axis])>,
}

fn grid_bundle(
    dir: &Path,
    spec: &GridSpec,
    workers: usize,
    want: GridOutputs<'_>,
) -> Result<Vec<PathBuf>, SweepError> {
    let axes = want.marginals.map_or(&[][..], |(_, a)| a);
    let mut curves: Vec<MarginalCurves> = axes.iter().map(|&a| MarginalCurves::new(a)).collect();
    let mut freq = FrequencySummary::default();
    let mut written = Vec::new();
    let mut observe = |rec: &crate::sweep::SweepRecord| {
        freq.push(rec);
        for c in &mut curves {
            c.push(rec);
        }
    };
    let summary = match want.grid {
        Some(name) => {
            let mut f = AtomicFile::create(dir.join(name))?;
            let s = write_grid_csv(spec, workers, &mut f, &mut observe)?;
            f.flush()?;
            written.push(f.commit()?);
            s
        }
        None => crate::sweep::run_grid(spec, workers, |r| {
            observe(r);
            Ok(())
        })?,
    };
    if let Some(name) = want.frequencies {
        written.push(write_atomic(dir.join(name), &freq.to_csv(summary.total))?);
    }
    if let Some((name, _)) = want.marginals {
        let mut text = format!("{}\n", MarginalCurves::CSV_HEADER);
        for c in &curves {
            text.extend(c.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
        }
        written.push(write_atomic(dir.join(name), &text)?);
    }
    Ok(written)
}

/// Panels of the discriminatory transition diagrams: `(M_P, M_R, beta)`.
pub const FIG8_PANELS: [(char, u32, u32, f64); 4] =
    [('a', 0, 0, 0.1), ('b', 1, 0, 0.1), ('c', 0, 0, 1.0), ('d', 14, 0, 1.0)];

pub fn fig8_reports() -> Result<Vec<(char, TransitionReport)>, SweepError> {
    let game = GameParams::default();
    FIG8_PANELS
        .iter()
        .map(|&(panel, m_p, m_r, beta)| {
            let cfg = PopulationConfig {
                m_p,
                m_r,
                beta,
                ..base_cfg(AiProposerKind::Discriminatory)
            };
            Ok((panel, transition_report(&cfg, &game)?))
        })
        .collect()
}

fn fig8_csv() -> Result<String, SweepError> {
    let mut out = format!("panel,ai_kind,M_P,M_R,beta,{}\n", TransitionReport::CSV_HEADER);
    for (panel, rep) in fig8_reports()? {
        let c = &rep.cfg;
        let prefix = format!("{panel},{},{},{},{}", c.ai_proposer_kind, c.m_p, c.m_r, fmt_sig(c.beta));
        for line in rep.to_csv().lines().skip(1) {
            out.push_str(&format!("{prefix},{line}\n"));
        }
    }
    Ok(out)
}

/// Writes the CSV bundle for `id` into `dir` (created if missing), followed
/// by `<id>.manifest.json`. Reruns produce byte-identical CSV files.
pub fn write_figure(id: FigureId, dir: &Path, workers: usize) -> Result<Vec<PathBuf>, SweepError> {
    std::fs::create_dir_all(dir)?;
    let sam = GridSpec::robustness(AiProposerKind::Samaritan);
    let disc = GridSpec::robustness(AiProposerKind::Discriminatory);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;

    let (written, params) = match id {
        FigureId::Fig1 => {
            let text = pool.install(|| {
                fraction_curves(AiProposerKind::Samaritan, &[Role::Proposer, Role::Receiver])
            })?;
            (
                vec![write_atomic(dir.join("fig1_fractions.csv"), &text)?],
                serde_json::json!({"ai_kind": "samaritan", "h": 0.5, "l": 0.1, "N": 100, "M": [0, 100], "beta": BETAS}),
            )
        }
        FigureId::Fig3 => {
            let spec = heatmap_spec();
            let mut w = grid_bundle(
                dir,
                &spec,
                workers,
                GridOutputs { grid: Some("fig3_heatmap.csv"), frequencies: None, marginals: None },
            )?;
            let frontier = pool.install(frontier_csv)?;
            w.push(write_atomic(dir.join("fig3_frontier.csv"), &frontier)?);
            (w, serde_json::json!({"grid": spec, "frontier_cutoff": DOMINANCE_CUTOFF}))
        }
        FigureId::Fig4 => (
            grid_bundle(
                dir,
                &sam,
                workers,
                GridOutputs {
                    grid: Some("fig4_grid.csv"),
                    frequencies: Some("fig4_frequencies.csv"),
                    marginals: None,
                },
            )?,
            serde_json::json!({"grid": sam}),
        ),
        FigureId::Fig5 => (
            grid_bundle(
                dir,
                &sam,
                workers,
                GridOutputs {
                    grid: None,
                    frequencies: None,
                    marginals: Some(("fig5_marginals.csv", &[Axis::MP, Axis::MR])),
                },
            )?,
            serde_json::json!({"grid": sam}),
        ),
        FigureId::Fig6 => (
            grid_bundle(
                dir,
                &sam,
                workers,
                GridOutputs {
                    grid: None,
                    frequencies: None,
                    marginals: Some(("fig6_marginals.csv", &[Axis::H, Axis::L])),
                },
            )?,
            serde_json::json!({"grid": sam}),
        ),
        FigureId::Fig7 => {
            let text =
                pool.install(|| fraction_curves(AiProposerKind::Discriminatory, &[Role::Proposer]))?;
            (
                vec![write_atomic(dir.join("fig7_fractions.csv"), &text)?],
                serde_json::json!({"ai_kind": "discriminatory", "h": 0.5, "l": 0.1, "N": 100, "M_P": [0, 100], "M_R": 0, "beta": BETAS}),
            )
        }
        FigureId::Fig8 => (
            vec![write_atomic(dir.join("fig8_transitions.csv"), &fig8_csv()?)?],
            serde_json::json!({"ai_kind": "discriminatory", "h": 0.5, "l": 0.1, "N": 100, "panels": FIG8_PANELS}),
        ),
        FigureId::Fig9 => (
            grid_bundle(
                dir,
                &disc,
                workers,
                GridOutputs {
                    grid: Some("fig9_grid.csv"),
                    frequencies: Some("fig9_frequencies.csv"),
                    marginals: Some(("fig9_marginals.csv", &[Axis::MP, Axis::H, Axis::L])),
                },
            )?,
            serde_json::json!({"grid": disc}),
        ),
    };

    let mut manifest = RunManifest::new(format!("figure {id}"), &params);
    for p in &written {
        manifest.output(p);
    }
    let mut all = written;
    all.push(manifest.write(&dir.join(format!("{id}.manifest.json")))?);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert!("fig2".parse::<FigureId>().is_err());
    }

    #[test]
    fn fraction_curve_shape() {
        let text = fraction_curves(AiProposerKind::Samaritan, &[Role::Receiver]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], FRACTIONS_HEADER);
        assert_eq!(lines.len(), 1 + 4 * 101 * 2);
        // one samaritan receiver already makes receivers fair at beta = 0.1
        let r = lines
            .iter()
            .find(|l| l.starts_with("samaritan,M_R,1,receiver,0.1,"))
            .unwrap();
        let v: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v > 0.95, "{r}");
    }

    #[test]
    fn fig8_has_four_panels() {
        let text = fig8_csv().unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 12);
        assert!(text.lines().nth(1).unwrap().starts_with("a,discriminatory,0,0,0.1,edge,LH,HH,"));
    }

    #[test]
    fn fig8_bundle_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_figure(FigureId::Fig8, dir.path(), 1).unwrap();
        let first = std::fs::read(&a[0]).unwrap();
        write_figure(FigureId::Fig8, dir.path(), 2).unwrap();
        assert_eq!(first, std::fs::read(&a[0]).unwrap());
        assert!(dir.path().join("fig8.manifest.json").exists());
    }
}
