use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use super::stats::NmseRecord;
use super::sweep::{Cell, SweepSpec};
use crate::channel::{assemble_channel, generate_scene, CMatrix, HybridChannel};
use crate::config::ExperimentConfig;
use crate::dictionary::{build_dictionary, PolarDictionary};
use crate::error::{Error, Result};
use crate::measurement::{generate_combiner, observe};
use crate::omp::{nmse_db, omp, OmpOptions, SparseEstimate};
use crate::rng::{stream_rng, Stream};
use crate::tensor_io::{n_train_groups, write_manifest, write_matrix, write_sample_pair, DatasetSample, Split};

pub const METHOD_OMP: &str = "omp";
pub const METHOD_DENOISED: &str = "omp+denoiser";

/// Shared read-only state of one sweep.
#[derive(Debug, Clone)]
pub struct SynthContext {
    pub config: ExperimentConfig,
    pub sweep: SweepSpec,
    pub dictionary: PolarDictionary,
    pub cells: Vec<Cell>,
    pub skipped: Vec<Cell>,
    pseudo_inverse: CMatrix,
}

impl SynthContext {
    pub fn new(config: ExperimentConfig, sweep: SweepSpec) -> Result<Self> {
        config.validate()?;
        sweep.validate()?;
        let dictionary = build_dictionary(&config.system, &config.dictionary, sweep.dictionary)?;
        let (cells, skipped) = sweep.cells(&config.system);
        for c in &skipped {
            warn!(
                "skipping N_RF = {}, Q = {}: needs {} measurements, N = {}",
                c.n_rf,
                c.n_pilots,
                c.n_rf * c.n_pilots,
                config.system.n_antennas
            );
        }
        if cells.is_empty() {
            return Err(Error::Config(format!(
                "no sweep cell satisfies N_RF * Q <= N = {}",
                config.system.n_antennas
            )));
        }
        let pseudo_inverse = dictionary.pseudo_inverse();
        Ok(Self {
            config,
            sweep,
            dictionary,
            cells,
            skipped,
            pseudo_inverse,
        })
    }

    pub fn seed(&self) -> u64 {
        self.config.system.rng_seed
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: Cell,
    pub snr_db: f64,
    pub sparsity: usize,
    pub estimate: SparseEstimate,
    pub nmse_db: f64,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub channel: HybridChannel,
    /// Minimum-norm polar representation `U^+ H`, the denoiser target.
    pub clean: CMatrix,
    pub cells: Vec<CellOutcome>,
}

fn snr_tag(snr_db: f64) -> u64 {
    snr_db.to_bits()
}

/// One scene, observed and estimated in every cell at every SNR. The scene
/// depends only on `(seed, trial)`, the combiner also on the cell and the
/// noise also on the SNR, so cells and SNR points share scenes.
pub fn simulate_trial(ctx: &SynthContext, trial: u64) -> Result<TrialOutcome> {
    let cfg = &ctx.config;
    let seed = ctx.seed();
    let scene = generate_scene(&cfg.system, &cfg.scene, &mut stream_rng(seed, Stream::Scene, trial, &[]))?;
    let channel = assemble_channel(&scene, &cfg.system)?;
    let clean = &ctx.pseudo_inverse * &channel.coeffs;
    let sparsity = cfg.estimator.sparsity.unwrap_or(scene.n_paths());
    let options = OmpOptions {
        iterations: sparsity,
        selection: cfg.estimator.selection,
        update: cfg.estimator.update,
    };

    let mut cells = Vec::with_capacity(ctx.cells.len() * ctx.sweep.snr_grid_db.len());
    for &cell in &ctx.cells {
        let system = crate::config::SystemConfig {
            n_rf_chains: cell.n_rf,
            n_pilot_slots: cell.n_pilots,
            ..cfg.system.clone()
        };
        let tags = [cell.n_rf as u64, cell.n_pilots as u64];
        let w = generate_combiner(
            &system,
            cfg.measurement.combiner,
            &mut stream_rng(seed, Stream::Combiner, trial, &tags),
        );
        for &snr_db in &ctx.sweep.snr_grid_db {
            let mut noise_rng = stream_rng(seed, Stream::Noise, trial, &[tags[0], tags[1], snr_tag(snr_db)]);
            let y = observe(&channel, &w, snr_db, &mut noise_rng)?;
            let estimate = omp(&y.observations, &w, &ctx.dictionary, options)?;
            if estimate.rank_deficient {
                warn!("trial {trial}, N_RF = {}, Q = {}, SNR = {snr_db} dB: rank-deficient LS refit", cell.n_rf, cell.n_pilots);
            }
            let nmse_db = nmse_db(&channel.coeffs, &estimate.reconstructed)?;
            cells.push(CellOutcome {
                cell,
                snr_db,
                sparsity,
                estimate,
                nmse_db,
            });
        }
    }
    Ok(TrialOutcome {
        trial,
        channel,
        clean,
        cells,
    })
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// In-memory NMSE of every trial, cell and SNR, in trial order. `jobs = 0`
/// uses all cores.
pub fn collect_nmse(ctx: &SynthContext, jobs: usize) -> Result<Vec<NmseRecord>> {
    let per_trial = with_pool(jobs, || {
        (0..ctx.sweep.n_trials as u64)
            .into_par_iter()
            .map(|t| simulate_trial(ctx, t))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(per_trial
        .into_iter()
        .flat_map(|t| t.cells)
        .map(|c| NmseRecord {
            snr_db: c.snr_db,
            n_rf: c.cell.n_rf,
            n_pilots: c.cell.n_pilots,
            dictionary: ctx.sweep.dictionary,
            method: METHOD_OMP.into(),
            nmse_db: c.nmse_db,
        })
        .collect())
}

pub fn sample_id(cell: Cell, snr_db: f64, trial: u64) -> String {
    format!("rf{:02}_q{:02}_snr{}_t{:05}", cell.n_rf, cell.n_pilots, snr_db, trial)
}

/// Simulates every trial and writes the dataset to `out_dir`. Trials run in
/// parallel; files and manifest records come out in trial order, so the
/// output does not depend on `jobs`. Returns the manifest path.
pub fn run_synth(ctx: &SynthContext, out_dir: &Path, jobs: usize) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let n_trials = ctx.sweep.n_trials;
    let n_train = n_train_groups(n_trials) as u64;
    info!(
        "synth: {n_trials} trials x {} cells x {} SNR points, {} dictionary with {} columns",
        ctx.cells.len(),
        ctx.sweep.snr_grid_db.len(),
        ctx.sweep.dictionary,
        ctx.dictionary.n_columns()
    );
    let per_trial = with_pool(jobs, || {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|trial| {
                let outcome = simulate_trial(ctx, trial)?;
                let split = if trial < n_train { Split::Train } else { Split::Validation };
                let channel_path = format!("samples/t{trial:05}.channel.hfct");
                std::fs::create_dir_all(out_dir.join("samples"))
                    .map_err(|e| Error::io(out_dir.join("samples"), e))?;
                write_matrix(&out_dir.join(&channel_path), &outcome.channel.coeffs)?;
                outcome
                    .cells
                    .into_iter()
                    .map(|c| {
                        let sample = DatasetSample {
                            id: sample_id(c.cell, c.snr_db, trial),
                            noisy: c.estimate.coeffs_polar,
                            clean: outcome.clean.clone(),
                            channel: CMatrix::zeros(0, 0),
                            snr_db: c.snr_db,
                            n_rf: c.cell.n_rf,
                            n_pilot_slots: c.cell.n_pilots,
                            seed: ctx.seed(),
                            trial,
                            sparsity: c.sparsity,
                        };
                        write_sample_pair(out_dir, &sample, channel_path.clone(), split)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let records = per_trial.into_iter().flatten().collect();
    let skipped = ctx.skipped.iter().map(|c| [c.n_rf, c.n_pilots]).collect();
    write_manifest(
        out_dir,
        records,
        &ctx.config,
        (ctx.dictionary.matrix(), ctx.dictionary.metadata()),
        skipped,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SynthContext {
        let mut cfg = ExperimentConfig::desk();
        cfg.system.n_antennas = 16;
        cfg.system.n_subcarriers = 4;
        cfg.system.n_rf_chains = 4;
        cfg.system.n_pilot_slots = 2;
        cfg.dictionary.min_distance_m = 0.05;
        let sweep = SweepSpec {
            snr_grid_db: vec![0.0, 10.0],
            n_rf_grid: vec![2, 4],
            pilot_grid: vec![2, 8],
            n_trials: 3,
            ..SweepSpec::default()
        };
        SynthContext::new(cfg, sweep).unwrap()
    }

    #[test]
    fn skips_oversized_cells() {
        let ctx = tiny();
        assert_eq!(ctx.cells.len(), 3);
        assert_eq!(ctx.skipped, vec![Cell { n_rf: 4, n_pilots: 8 }]);
    }

    #[test]
    fn trial_is_deterministic_and_shares_scene() {
        let ctx = tiny();
        let a = simulate_trial(&ctx, 1).unwrap();
        let b = simulate_trial(&ctx, 1).unwrap();
        assert_eq!(a.channel, b.channel);
        let na: Vec<f64> = a.cells.iter().map(|c| c.nmse_db).collect();
        let nb: Vec<f64> = b.cells.iter().map(|c| c.nmse_db).collect();
        assert_eq!(na, nb);
        assert_eq!(a.cells.len(), 6);
        assert!(a.cells.iter().all(|c| c.sparsity == 4));
    }

    #[test]
    fn nmse_independent_of_jobs() {
        let ctx = tiny();
        assert_eq!(collect_nmse(&ctx, 1).unwrap(), collect_nmse(&ctx, 3).unwrap());
    }

    #[test]
    fn sample_ids() {
        assert_eq!(sample_id(Cell { n_rf: 8, n_pilots: 4 }, -10.0, 7), "rf08_q04_snr-10_t00007");
        assert_eq!(sample_id(Cell { n_rf: 16, n_pilots: 32 }, 2.5, 0), "rf16_q32_snr2.5_t00000");
    }
}
