//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line even when it passes.

use std::collections::BTreeSet;
use std::time::Instant;

use hfce::bench::{collect_nmse, summarize, SummaryRow, SweepSpec, SynthContext};
use hfce::channel::{far_steering, near_steering, CMatrix};
use hfce::config::{DictionaryKind, ExperimentConfig, SystemConfig};
use hfce::dictionary::{build_polar_dictionary, PolarDictionary};
use hfce::measurement::{generate_combiner, observe_with_variance};
use hfce::omp::{nmse_db, omp, omp_sensing, OmpOptions};
use hfce::rng::{stream_rng, Stream};
use hfce::tensor_io::{read_tensor, write_tensor, ComplexTensor};
use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rayleigh_distance() -> Outcome {
    let d_r = SystemConfig::large_array().rayleigh_distance_m();
    let rel = (d_r - 100.0).abs() / 100.0;
    Outcome {
        pass: rel <= 0.05,
        detail: format!("N=256, 100 GHz: D_R = {d_r:.3} m ({:.2}% from 100 m, limit 5%)", 100.0 * rel),
    }
}

fn far_field_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [64usize, 256] {
        let cfg = SystemConfig {
            n_antennas: n,
            ..SystemConfig::desk()
        };
        let lambda = cfg.wavelength_m();
        let d = cfg.spacing_m();
        let d_r = cfg.rayleigh_distance_m();
        for i in 0..32 {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / 32.0;
            let a = far_steering(theta, n, d / lambda).unwrap();
            for factor in [100.0, 1e3, 1e4, 1e6] {
                let b = near_steering(theta, factor * d_r, n, d, lambda).unwrap();
                let err = (0..n).map(|z| (b[z] - a[z]).norm()).fold(0.0, f64::max);
                worst = worst.max(err);
            }
        }
    }
    Outcome {
        pass: worst < 1e-3,
        detail: format!("max |b - a| = {worst:.3e} over 32 angles, N in {{64, 256}}, r/D_R in {{1e2..1e6}} (limit 1e-3)"),
    }
}

/// Brute force: the single column whose least-squares fit leaves the smallest
/// residual; lowest index on exact ties.
fn exhaustive_best_atom(y: &CMatrix, a: &CMatrix) -> usize {
    let mut best = (0, f64::INFINITY);
    for k in 0..a.ncols() {
        let col = a.column(k).into_owned();
        let energy = col.norm_squared();
        let coeffs = col.adjoint() * y / Complex64::from(energy);
        let residual = (y - &col * &coeffs).norm_squared();
        if residual < best.1 {
            best = (k, residual);
        }
    }
    best.0
}

fn omp_oracle() -> Outcome {
    let cfg = SystemConfig {
        n_antennas: 8,
        n_rf_chains: 4,
        n_pilot_slots: 2,
        n_subcarriers: 4,
        ..SystemConfig::desk()
    };
    // 16 far-field angles and no rings: S = 16.
    let dict = build_polar_dictionary(&cfg, 16, 1.2, 1e6).unwrap();
    assert_eq!(dict.n_columns(), 16);
    let mut agree = 0;
    let trials = 100;
    for t in 0..trials {
        let w = generate_combiner(&cfg, Default::default(), &mut stream_rng(SEED, Stream::Combiner, t, &[]));
        let mut rng = stream_rng(SEED, Stream::Planted, t, &[]);
        let y = CMatrix::from_fn(8, 4, |_, _| cn(&mut rng));
        let sensing = &w.matrix * dict.matrix();
        let est = omp(&y, &w, &dict, OmpOptions::new(1)).unwrap();
        if est.support == [exhaustive_best_atom(&y, &sensing)] {
            agree += 1;
        }
    }
    // Unstructured sensing matrices as well.
    for t in 0..trials {
        let mut rng = stream_rng(SEED, Stream::Planted, 1000 + t, &[]);
        let a = CMatrix::from_fn(8, 16, |_, _| cn(&mut rng));
        let y = CMatrix::from_fn(8, 3, |_, _| cn(&mut rng));
        let est = omp_sensing(&y, &a, OmpOptions::new(1)).unwrap();
        if est.support == [exhaustive_best_atom(&y, &a)] {
            agree += 1;
        }
    }
    Outcome {
        pass: agree == 2 * trials,
        detail: format!(
            "N=8, S=16, T=1: {agree}/{} selections equal the exhaustive LS argmax (dictionary and Gaussian sensing)",
            2 * trials
        ),
    }
}

fn draw_support<R: Rng>(dict: &PolarDictionary, t: usize, rng: &mut R) -> Vec<usize> {
    let s = dict.n_columns();
    let mut picked: Vec<usize> = Vec::with_capacity(t);
    while picked.len() < t {
        let k = rng.random_range(0..s);
        let ok = picked.iter().all(|&j| {
            let c = (dict.column(j).adjoint() * dict.column(k))[(0, 0)].norm();
            j != k && c < 0.5
        });
        if ok {
            picked.push(k);
        }
    }
    picked
}

fn planted_recovery() -> Outcome {
    let mut exp = ExperimentConfig::desk();
    exp.system.n_rf_chains = 8;
    exp.system.n_pilot_slots = 4;
    let cfg = exp.system.clone();
    let dict = hfce::dictionary::build_dictionary(&cfg, &exp.dictionary, DictionaryKind::Polar).unwrap();
    let m = cfg.n_subcarriers;
    let trials = 200;
    let (mut support_ok, mut recovered) = (0, 0);
    let mut worst_nmse = f64::NEG_INFINITY;
    for trial in 0..trials as u64 {
        let mut rng = stream_rng(SEED, Stream::Planted, trial, &[7]);
        let t = 1 + (trial as usize % 4);
        assert!(cfg.n_measurements() >= 4 * t);
        let support = draw_support(&dict, t, &mut rng);
        let mut x = CMatrix::zeros(dict.n_columns(), m);
        for &k in &support {
            for j in 0..m {
                x[(k, j)] = cn(&mut rng);
            }
        }
        let h = dict.synthesize(&x).unwrap();
        let w = generate_combiner(&cfg, Default::default(), &mut stream_rng(SEED, Stream::Combiner, trial, &[7]));
        let y = observe_with_variance(&h, &w, 0.0, &mut rng).unwrap();
        let est = omp(&y, &w, &dict, OmpOptions::new(t)).unwrap();
        let exact = est.support.iter().collect::<BTreeSet<_>>() == support.iter().collect::<BTreeSet<_>>();
        let e = nmse_db(&h, &est.reconstructed).unwrap();
        support_ok += exact as usize;
        if exact && e <= -40.0 {
            recovered += 1;
        }
        if exact {
            worst_nmse = worst_nmse.max(e);
        }
    }
    let acc = support_ok as f64 / trials as f64;
    let rec = recovered as f64 / trials as f64;
    Outcome {
        pass: acc >= 0.99 && rec >= 0.99,
        detail: format!(
            "N=64, S={}, T=1..4, P*N_RF=32: support accuracy {:.1}%, NMSE <= -40 dB in {:.1}% (worst exact-support NMSE {worst_nmse:.1} dB)",
            dict.n_columns(),
            100.0 * acc,
            100.0 * rec
        ),
    }
}

fn summary(config: &ExperimentConfig, sweep: SweepSpec) -> Vec<SummaryRow> {
    let ctx = SynthContext::new(config.clone(), sweep).unwrap();
    summarize(&collect_nmse(&ctx, 0).unwrap())
}

/// Checks that NMSE improves strictly along `key` at every SNR, each step by
/// more than the combined standard error of the two means.
fn strictly_improving(rows: &[SummaryRow], key: impl Fn(&SummaryRow) -> usize) -> (bool, f64, String) {
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let mut ok = true;
    let mut worst_ratio = f64::INFINITY;
    let mut worst_at = String::new();
    for snr in snrs {
        let mut series: Vec<&SummaryRow> = rows.iter().filter(|r| r.snr_db == snr).collect();
        series.sort_by_key(|r| key(r));
        for pair in series.windows(2) {
            let gain = pair[0].nmse_db_mean - pair[1].nmse_db_mean;
            let se = pair[0].nmse_db_stderr.hypot(pair[1].nmse_db_stderr);
            let ratio = gain / se;
            if ratio < worst_ratio {
                worst_ratio = ratio;
                worst_at = format!("{} -> {} at {snr} dB", key(pair[0]), key(pair[1]));
            }
            ok &= gain > se;
        }
    }
    (ok, worst_ratio, worst_at)
}

fn trend_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk();
    cfg.system.rng_seed = SEED;
    cfg
}

fn snr_grid() -> Vec<f64> {
    (-5..=5).map(|i| 2.0 * i as f64).collect()
}

fn monotone_trends() -> Outcome {
    let cfg = trend_config();
    let rf_rows = summary(
        &cfg,
        SweepSpec {
            snr_grid_db: snr_grid(),
            n_rf_grid: vec![8, 12, 16],
            pilot_grid: vec![4],
            n_trials: 200,
            dictionary: DictionaryKind::Polar,
        },
    );
    let q_rows = summary(
        &cfg,
        SweepSpec {
            snr_grid_db: snr_grid(),
            n_rf_grid: vec![2],
            pilot_grid: vec![8, 16, 32],
            n_trials: 200,
            dictionary: DictionaryKind::Polar,
        },
    );
    assert_eq!(rf_rows.len(), 33);
    assert_eq!(q_rows.len(), 33);
    let (rf_ok, rf_ratio, rf_at) = strictly_improving(&rf_rows, |r| r.n_rf);
    let (q_ok, q_ratio, q_at) = strictly_improving(&q_rows, |r| r.n_pilots);
    Outcome {
        pass: rf_ok && q_ok,
        detail: format!(
            "N=64, 200 trials, SNR -10..10 dB: N_RF 8->12->16 at Q=4 worst step {rf_ratio:.2} SE ({rf_at}); \
             Q 8->16->32 at N_RF=2 worst step {q_ratio:.2} SE ({q_at}); need > 1 SE"
        ),
    }
}

fn polar_vs_angular() -> Outcome {
    let cfg = trend_config();
    assert!(cfg.scene.l_near >= cfg.scene.l_far);
    let mean = |kind| {
        let rows = summary(
            &cfg,
            SweepSpec {
                snr_grid_db: vec![10.0],
                n_rf_grid: vec![8],
                pilot_grid: vec![4],
                n_trials: 200,
                dictionary: kind,
            },
        );
        assert_eq!(rows.len(), 1);
        (rows[0].nmse_db_mean, rows[0].nmse_db_stderr)
    };
    let (polar, polar_se) = mean(DictionaryKind::Polar);
    let (angular, angular_se) = mean(DictionaryKind::Angular);
    Outcome {
        pass: polar <= angular,
        detail: format!(
            "10 dB, L_f=1, L_n=3, 200 scenes: polar {polar:.3} +/- {polar_se:.3} dB, angular {angular:.3} +/- {angular_se:.3} dB"
        ),
    }
}

fn hfct_round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = stream_rng(SEED, Stream::Planted, 0, &[99]);
    let mut exact = 0;
    let mut nan_payloads = 0usize;
    let total = 1000;
    for i in 0..total {
        let rank = rng.random_range(1..=4);
        let dims: Vec<usize> = (0..rank).map(|_| rng.random_range(1..=6)).collect();
        let count: usize = dims.iter().product();
        let data: Vec<Complex32> = (0..count)
            .map(|j| {
                let (re, im) = if j == 0 {
                    // Guaranteed NaN with a random payload in every tensor.
                    (0x7f80_0001 | (rng.random::<u32>() & 0x807f_ffff), rng.random::<u32>())
                } else {
                    (rng.random::<u32>(), rng.random::<u32>())
                };
                Complex32::new(f32::from_bits(re), f32::from_bits(im))
            })
            .collect();
        nan_payloads += data.iter().filter(|c| c.re.is_nan() || c.im.is_nan()).count();
        let tensor = ComplexTensor::new(dims, data).unwrap();
        let path = dir.path().join(format!("{i}.hfct"));
        write_tensor(&path, &tensor).unwrap();
        let back = read_tensor(&path).unwrap();
        let bits = |t: &ComplexTensor| -> Vec<(u32, u32)> {
            t.data().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect()
        };
        if back.dims() == tensor.dims() && bits(&back) == bits(&tensor) {
            exact += 1;
        }
    }
    Outcome {
        pass: exact == total,
        detail: format!("{exact}/{total} random tensors bit-identical after write/read ({nan_payloads} NaN entries)"),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("rayleigh_distance", rayleigh_distance),
        ("far_field_limit", far_field_limit),
        ("omp_oracle_equivalence", omp_oracle),
        ("planted_support_recovery", planted_recovery),
        ("monotone_trends", monotone_trends),
        ("polar_vs_angular", polar_vs_angular),
        ("hfct_round_trip", hfct_round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), out.detail);
        failed += !out.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
