//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cobreak::channels::{
    cbc_from_povm, gad_channel, random_channel, random_incoherent_channel, random_povm,
    random_strictly_incoherent_channel, y_to_x_transfer, y_to_x_transfer_with_feed, KrausChannel, QubitAffine,
};
use cobreak::classifiers::{classify, is_cbc, is_scbc, Verdict, DEFAULT_TOL};
use cobreak::coherence::c_l1;
use cobreak::concentration::{
    corollary_bound, estimate_mean_coherence, levy_bound, lipschitz_scaled_l1, run_concentration_experiment,
    ExperimentConfig,
};
use cobreak::dynamics::{
    coherence_breaking_index, coherence_breaking_index_affine, evolve, factorization_check, qubit_probe, IndexValue,
};
use cobreak::linalg::{c64, matrix_unit, max_abs, max_offdiag_abs, trace_norm_hermitian, zeros, CMatrix};
use cobreak::states::{
    fourier_phases, from_bloch, haar_random_pure_with, maximally_coherent, random_mixed_with, rng_from_seed,
};
use cobreak::DensityMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn action_gap(a: &KrausChannel, b: &KrausChannel) -> f64 {
    let d = a.dim();
    (0..d * d)
        .map(|k| {
            let e = matrix_unit(d, k / d, k % d);
            max_abs(&(a.apply_operator(&e).unwrap() - b.apply_operator(&e).unwrap()))
        })
        .fold(0.0, f64::max)
}

fn phase_sweep_is_cbc<R: Rng>(channel: &KrausChannel, rng: &mut R, random_sets: usize) -> bool {
    let d = channel.dim();
    let mut sets: Vec<Vec<f64>> = (0..d).map(|k| fourier_phases(d, k)).collect();
    sets.extend((0..random_sets).map(|_| (0..d).map(|_| rng.random_range(0.0..TAU)).collect()));
    sets.iter().all(|thetas| {
        let psi = maximally_coherent(d, thetas).unwrap();
        max_offdiag_abs(channel.apply(&psi).unwrap().matrix()) <= DEFAULT_TOL
    })
}

/// Incoherent Kraus set for the feed variant with α = 0.5, β = 0.3, n_z = 0.1.
///
/// Each pattern (diagonal, antidiagonal, row 0, row 1) gets column budgets
/// (P, Q) and a target cross term c; the first operator carries √P in column 0
/// and conj(c)/√P in column 1, the second tops column 1 up to Q.
fn feed_variant_kraus() -> KrausChannel {
    let (alpha, beta) = (0.5, 0.3);
    let patterns = [
        ((0, 1), 0.30f64, 0.25f64, c64(0.0, alpha / 2.0)),
        ((1, 0), 0.25, 0.30, c64(0.0, alpha / 2.0)),
        ((0, 0), 0.25, 0.25, c64(beta / 2.0, 0.0)),
        ((1, 1), 0.20, 0.20, c64(-beta / 2.0, 0.0)),
    ];
    let mut ops = Vec::new();
    for ((r, s), p, q, c) in patterns {
        let a = p.sqrt();
        let b = c.conj() / a;
        let mut first = zeros(2);
        first[(r, 0)] = c64(a, 0.0);
        first[(s, 1)] = b;
        let mut second = zeros(2);
        second[(s, 1)] = c64((q - b.norm_sqr()).sqrt(), 0.0);
        ops.push(first);
        ops.push(second);
    }
    KrausChannel::new(ops).unwrap()
}

fn figure_state() -> DensityMatrix {
    from_bloch([0.3, 0.5, 0.2]).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let channel = y_to_x_transfer(0.5).unwrap().to_kraus().unwrap();
    let traj = evolve(&figure_state(), &channel, 10, 1e-9).unwrap();
    let elapsed = start.elapsed();
    let v = traj.values();
    ensure((v[0] - 0.34f64.sqrt()).abs() < 1e-12, || format!("step 0 = {}", v[0]))?;
    ensure((v[0] - 0.5830).abs() <= 1e-4, || format!("step 0 = {} vs 0.5830", v[0]))?;
    ensure((v[1] - 0.25).abs() < 1e-12, || format!("step 1 = {}", v[1]))?;
    ensure(v[2..].iter().all(|x| *x < 1e-9), || format!("tail {:?}", &v[2..]))?;
    ensure(traj.sudden_death_step == Some(2), || format!("sudden death {:?}", traj.sudden_death_step))?;
    within_time(elapsed, Duration::from_secs(1), "trajectory")?;
    Ok(format!("c_l1 = ({:.4}, {:.4}, 0, …), sudden death at 2, {elapsed:?}", v[0], v[1]))
}

fn criterion_2() -> Outcome {
    let rho = figure_state();
    let traj = evolve(&rho, &gad_channel(0.7, 1.0).unwrap(), 10, 1e-9).unwrap();
    let c0 = c_l1(&rho);
    let worst = traj
        .values()
        .iter()
        .enumerate()
        .map(|(j, x)| (x - 0.7f64.powf(j as f64 / 2.0) * c0).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    ensure(traj.sudden_death_step.is_none(), || "sudden death reported".into())?;
    Ok(format!("max deviation from 0.7^(j/2)·c_l1 = {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut timed = |label: &str, expected: IndexValue, f: &dyn Fn() -> IndexValue| -> Result<(), String> {
        let start = Instant::now();
        let got = f();
        let elapsed = start.elapsed();
        ensure(got == expected, || format!("{label}: got {got}, expected {expected}"))?;
        within_time(elapsed, Duration::from_secs(1), label)?;
        notes.push(format!("{label}={got}"));
        Ok(())
    };
    let transfer = y_to_x_transfer(0.5).unwrap();
    let feed = y_to_x_transfer_with_feed(0.5, 0.3, 0.1).unwrap();
    let feed_kraus = feed_variant_kraus();
    let recovered = QubitAffine::from_kraus(&feed_kraus).unwrap();
    let gap = (0..3)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| (recovered.m()[r][c] - feed.m()[r][c]).abs())
        .chain((0..3).map(|r| (recovered.shift()[r] - feed.shift()[r]).abs()))
        .fold(0.0, f64::max);
    ensure(gap < 1e-12, || format!("hand-built feed Kraus set misses the affine rep by {gap:e}"))?;

    timed("transfer/kraus", IndexValue::Finite(2), &|| {
        coherence_breaking_index(&transfer.to_kraus().unwrap(), 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("transfer/affine", IndexValue::Finite(2), &|| {
        coherence_breaking_index_affine(&transfer, 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("feed/affine", IndexValue::Finite(2), &|| {
        coherence_breaking_index_affine(&feed, 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("feed/kraus", IndexValue::Finite(2), &|| {
        coherence_breaking_index(&feed_kraus, 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("gad/kraus", IndexValue::ExceedsCap, &|| {
        coherence_breaking_index(&gad_channel(0.7, 1.0).unwrap(), 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("gad/affine", IndexValue::ExceedsCap, &|| {
        let rep = QubitAffine::from_kraus(&gad_channel(0.7, 1.0).unwrap()).unwrap();
        coherence_breaking_index_affine(&rep, 64, DEFAULT_TOL).unwrap().value
    })?;
    timed("dephasing", IndexValue::Finite(1), &|| {
        coherence_breaking_index(&KrausChannel::dephasing(2).unwrap(), 64, DEFAULT_TOL).unwrap().value
    })?;
    Ok(notes.join(", "))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut rep_gap = 0.0f64;
    for p in [0.3, 0.7, 0.95] {
        for t in [0.0, 0.5, 1.0] {
            let base = gad_channel(p, t).unwrap();
            // validate the Kraus set against the affine action diag(√p,√p,p), shift (0,0,(1−p)(2t−1))
            let rep = QubitAffine::from_kraus(&base).unwrap();
            let expected_m = [[p.sqrt(), 0.0, 0.0], [0.0, p.sqrt(), 0.0], [0.0, 0.0, p]];
            let expected_n = [0.0, 0.0, (1.0 - p) * (2.0 * t - 1.0)];
            for r in 0..3 {
                rep_gap = rep_gap.max((rep.shift()[r] - expected_n[r]).abs());
                for c in 0..3 {
                    rep_gap = rep_gap.max((rep.m()[r][c] - expected_m[r][c]).abs());
                }
            }
            for n in 1..=10 {
                let lhs = base.iterate(n).unwrap();
                let rhs = gad_channel(p.powi(n as i32), t).unwrap();
                worst = worst.max(action_gap(&lhs, &rhs));
            }
        }
    }
    ensure(rep_gap <= 1e-12, || format!("GAD Kraus set deviates from its action by {rep_gap:e}"))?;
    ensure(worst <= 1e-9, || format!("semigroup gap {worst:e}"))?;
    Ok(format!("max matrix-unit gap {worst:.1e} over 90 cases"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(5);
    let mut disagreements = Vec::new();
    for k in 0..500 {
        let d = 2 + k % 3;
        let outcomes = rng.random_range(1..=d);
        let ch = cbc_from_povm(&random_povm(&mut rng, d, outcomes)).unwrap();
        let scbc = is_scbc(&ch, DEFAULT_TOL).holds;
        let cbc = is_cbc(&ch, DEFAULT_TOL).holds;
        let sweep = phase_sweep_is_cbc(&ch, &mut rng, 50);
        if !(scbc && cbc && sweep) {
            disagreements.push(format!("povm #{k} d={d}: scbc={scbc} cbc={cbc} sweep={sweep}"));
        }
    }
    // the two CBC tests must also agree when the answer is no
    let mut negatives = 0;
    for k in 0..150 {
        let d = 2 + k % 3;
        let ch = if k % 2 == 0 {
            let branches = rng.random_range(1..4);
            random_incoherent_channel(&mut rng, d, branches)
        } else {
            random_channel(&mut rng, d, 2)
        };
        let cbc = is_cbc(&ch, DEFAULT_TOL).holds;
        let sweep = phase_sweep_is_cbc(&ch, &mut rng, 50);
        negatives += usize::from(!cbc);
        if cbc != sweep {
            disagreements.push(format!("generic #{k} d={d}: cbc={cbc} sweep={sweep}"));
        }
    }
    let elapsed = start.elapsed();
    ensure(disagreements.is_empty(), || disagreements.join("; "))?;
    within_time(elapsed, Duration::from_secs(30), "equivalence suite")?;
    Ok(format!("500 POVM channels and 150 others ({negatives} non-CBC), 0 disagreements, {elapsed:?}"))
}

fn test_data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn corpus() -> Vec<(String, KrausChannel)> {
    let mut out: Vec<(String, KrausChannel)> = Vec::new();
    for d in 2..=4 {
        out.push((format!("identity{d}"), KrausChannel::identity(d).unwrap()));
        out.push((format!("dephasing{d}"), KrausChannel::dephasing(d).unwrap()));
        out.push((format!("partial-dephasing{d}"), KrausChannel::partial_dephasing(d, 0.4).unwrap()));
    }
    for name in ["delta.json", "hadamard.json", "transfer.json", "transfer_feed.json", "gad.json"] {
        let text = std::fs::read_to_string(test_data(name)).unwrap();
        let spec = cobreak::io::parse_channel(&text).unwrap();
        if let Ok(k) = spec.kraus() {
            out.push((name.into(), k));
        }
    }
    out.push(("feed-kraus".into(), feed_variant_kraus()));
    for p in [0.0, 0.3, 0.7, 1.0] {
        for t in [0.0, 0.5, 1.0] {
            out.push((format!("gad({p},{t})"), gad_channel(p, t).unwrap()));
        }
    }
    out.push(("gad^3".into(), gad_channel(0.7, 1.0).unwrap().tensor_power(3).unwrap()));
    let mut rng = rng_from_seed(6);
    for k in 0..60 {
        let d = 2 + k % 3;
        out.push((format!("random#{k}"), random_channel(&mut rng, d, 1 + k % 4)));
        out.push((format!("povm#{k}"), cbc_from_povm(&random_povm(&mut rng, d, d)).unwrap()));
        out.push((format!("io#{k}"), random_incoherent_channel(&mut rng, d, 1 + k % 3)));
        out.push((format!("sio#{k}"), random_strictly_incoherent_channel(&mut rng, d, 1 + k % 3)));
    }
    out.push(("rotated-dephasing".into(), rotated_dephasing()));
    out
}

/// Δ followed by a Hadamard: outputs are diagonal in the |±⟩ basis only.
fn rotated_dephasing() -> KrausChannel {
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[c64(1.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0)],
    )
    .unscale(2f64.sqrt());
    KrausChannel::compose(&KrausChannel::unitary(h).unwrap(), &KrausChannel::dephasing(2).unwrap()).unwrap()
}

fn criterion_6() -> Outcome {
    let channels = corpus();
    let mut violations = Vec::new();
    for (name, ch) in &channels {
        let v = classify(ch, DEFAULT_TOL).unwrap().verdicts;
        if v.cbc == Verdict::Yes && v.qc != Verdict::Yes {
            violations.push(format!("{name}: CBC yes but QC {}", v.qc));
        }
        if v.qc == Verdict::Yes && v.entanglement_breaking == Verdict::No {
            violations.push(format!("{name}: QC yes but EB no"));
        }
    }
    let witness = classify(&rotated_dephasing(), DEFAULT_TOL).unwrap().verdicts;
    ensure(violations.is_empty(), || violations.join("; "))?;
    ensure(witness.qc == Verdict::Yes && witness.cbc == Verdict::No, || {
        format!("rotated dephasing: qc={} cbc={}", witness.qc, witness.cbc)
    })?;
    Ok(format!("{} channels, chain holds; rotated dephasing is QC yes / CBC no", channels.len()))
}

/// K_ij = d_ij |π_i(j)⟩⟨j| with permutations π_i.
fn sio_form<R: Rng>(rng: &mut R, d: usize) -> KrausChannel {
    let branches = rng.random_range(1..=d);
    let mut weights = vec![vec![0.0; d]; branches];
    for j in 0..d {
        let raw: Vec<f64> = (0..branches).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        for (i, w) in raw.iter().enumerate() {
            weights[i][j] = w / total;
        }
    }
    let mut ops = Vec::new();
    for row in &weights {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(rng);
        for (j, w) in row.iter().enumerate() {
            let mut k = zeros(d);
            let phase: f64 = rng.random_range(0.0..TAU);
            k[(perm[j], j)] = c64(w.sqrt() * phase.cos(), w.sqrt() * phase.sin());
            ops.push(k);
        }
    }
    KrausChannel::new(ops).unwrap()
}

/// K_ij = √p_ij |i⟩⟨j| with Σ_i p_ij = 1.
fn dio_form<R: Rng>(rng: &mut R, d: usize) -> KrausChannel {
    let mut ops = Vec::new();
    for j in 0..d {
        let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        for (i, w) in raw.iter().enumerate() {
            let mut k = zeros(d);
            k[(i, j)] = c64((w / total).sqrt(), 0.0);
            ops.push(k);
        }
    }
    KrausChannel::new(ops).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut mismatches = Vec::new();
    for (form, builder) in [("sio", sio_form::<rand_chacha::ChaCha8Rng> as fn(&mut _, usize) -> _), ("dio", dio_form)] {
        for k in 0..200 {
            let d = 2 + k % 3;
            let ch = builder(&mut rng, d);
            let v = classify(&ch, DEFAULT_TOL).unwrap().verdicts;
            let in_sio_cbc = v.sio == Verdict::Yes && v.cbc == Verdict::Yes;
            let in_dio_cbc = v.dio == Verdict::Yes && v.cbc == Verdict::Yes;
            if !(in_sio_cbc && in_dio_cbc) {
                mismatches.push(format!("{form}#{k}: sio={} dio={} cbc={}", v.sio, v.dio, v.cbc));
            }
        }
    }
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    Ok("400 instances, all members of SIO∩CBC and DIO∩CBC".into())
}

fn criterion_8() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..200 {
        let branches = rng.random_range(1..4);
        let ch = random_incoherent_channel(&mut rng, 2, branches);
        for _ in 0..200 {
            let rho = if rng.random::<bool>() {
                haar_random_pure_with(&mut rng, 2)
            } else {
                random_mixed_with(&mut rng, 2, 2)
            };
            if c_l1(&rho) < 1e-9 {
                continue;
            }
            let check = factorization_check(&rho, &ch, DEFAULT_TOL).unwrap();
            worst = worst.max(check.residual);
            let oracle = c_l1(&rho) * c_l1(&ch.apply(&qubit_probe(&rho).unwrap()).unwrap());
            worst_oracle = worst_oracle.max((check.lhs - oracle).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("qubit residual {worst:e}"))?;
    ensure(worst_oracle <= 1e-8, || format!("qubit probe oracle residual {worst_oracle:e}"))?;

    let mut worst3 = 0.0f64;
    for _ in 0..200 {
        let branches = rng.random_range(1..4);
        let ch = random_incoherent_channel(&mut rng, 3, branches);
        for _ in 0..10 {
            let rank = rng.random_range(1..=3);
            let rho = random_mixed_with(&mut rng, 3, rank);
            if c_l1(&rho) < 1e-9 {
                continue;
            }
            worst3 = worst3.max(factorization_check(&rho, &ch, DEFAULT_TOL).unwrap().residual);
        }
    }
    ensure(worst3 <= 1e-6, || {
        format!("d=3 residual {worst3:e}: generator ordering falsified for the factorization law")
    })?;
    Ok(format!("qubit residual {worst:.1e} (oracle {worst_oracle:.1e}), d=3 residual {worst3:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = rng_from_seed(9);
    let mut notes = Vec::new();
    for d in [2usize, 3, 5, 8] {
        let eta = lipschitz_scaled_l1(d).unwrap();
        let scale = 1.0 / (d as f64 - 1.0);
        let mut violations = 0;
        let mut worst_ratio = 0.0f64;
        for k in 0..10_000 {
            let (a, b) = if k % 2 == 0 {
                (haar_random_pure_with(&mut rng, d), haar_random_pure_with(&mut rng, d))
            } else {
                let (ra, rb) = (rng.random_range(1..=d), rng.random_range(1..=d));
                (random_mixed_with(&mut rng, d, ra), random_mixed_with(&mut rng, d, rb))
            };
            let dist = trace_norm_hermitian(&(a.matrix() - b.matrix())).unwrap();
            let gap = (c_l1(&a) - c_l1(&b)).abs() * scale;
            if gap > eta * dist + 1e-12 {
                violations += 1;
            }
            if dist > 1e-12 {
                worst_ratio = worst_ratio.max(gap / dist);
            }
        }
        ensure(violations == 0, || format!("d={d}: {violations} violations"))?;
        notes.push(format!("d={d} max ratio {worst_ratio:.3} ≤ {eta:.3}"));
    }
    Ok(notes.join(", "))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut identity_gap = 0.0f64;
    for d in [2usize, 3, 8, 32, 64, 1000, 4096] {
        for eps in [0.0, 0.01, 0.05, 0.1, 0.5, 1.0] {
            let via_levy = levy_bound(d, eps, lipschitz_scaled_l1(d).unwrap(), 1.0).unwrap();
            let direct = corollary_bound(d, eps, 1.0).unwrap();
            identity_gap = identity_gap.max((via_levy - direct).abs());
        }
    }
    ensure(identity_gap <= 1e-12, || format!("bound identity gap {identity_gap:e}"))?;

    let eps = vec![0.02, 0.05, 0.1, 0.2];
    let mut notes = Vec::new();
    for label in ["identity", "gad"] {
        let mut tails = Vec::new();
        for (k, d) in [(3u32, 8usize), (5, 32), (6, 64)] {
            let channel = match label {
                "identity" => KrausChannel::identity(d).unwrap(),
                _ => gad_channel(0.7, 1.0).unwrap().tensor_power(k as usize).unwrap(),
            };
            let config = ExperimentConfig::new(d, 10_000, eps.clone(), 10 + k as u64, label);
            let report = run_concentration_experiment(&channel, &config).unwrap();
            let violations = report.bound_violations(3.0);
            ensure(violations.is_empty(), || format!("{label} d={d}: {}", violations.join("; ")))?;
            tails.push(report.rows[1].empirical_tail_scaled);
        }
        ensure(tails.windows(2).all(|w| w[1] <= w[0]) && tails[2] < tails[0], || {
            format!("{label}: scaled tails at ε=0.05 not shrinking in d: {tails:?}")
        })?;
        notes.push(format!("{label} tails@0.05 {tails:?}"));
    }
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(120), "concentration suite")?;
    Ok(format!("identity gap {identity_gap:.1e}; {}; {elapsed:?}", notes.join("; ")))
}

fn criterion_11() -> Outcome {
    let est = estimate_mean_coherence(&KrausChannel::identity(2).unwrap(), 100_000, 11).unwrap();
    // Haar qubit: |ψ0|² = (1 + z)/2 with z uniform on [−1, 1], so c_l1 = √(1 − z²)
    let mut rng = ChaCha20Rng::seed_from_u64(0x00dd_5eed);
    let n = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let z: f64 = rng.random_range(-1.0..1.0);
        let c = (1.0 - z * z).sqrt();
        sum += c;
        sum_sq += c * c;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
    let oracle_se = (var / n as f64).sqrt();
    let combined = (est.stderr.powi(2) + oracle_se.powi(2)).sqrt();
    let gap = (est.mean - mean).abs();
    ensure(gap <= 3.0 * combined, || {
        format!("library {} vs oracle {mean}: gap {gap:e} > 3·{combined:e}", est.mean)
    })?;
    Ok(format!("library {:.5} ± {:.1e}, oracle {mean:.5} ± {oracle_se:.1e}", est.mean, est.stderr))
}

fn criterion_12() -> Outcome {
    let dir = std::env::temp_dir().join(format!("cobreak-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(format!("{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_cobreak"))
            .args(["concentrate", "--dim", "16", "--samples", "5000", "--seed", "2024", "--eps", "0.05,0.1,0.2"])
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("run {run} exited with {status}"))?;
        let json = std::fs::read(&out).map_err(|e| e.to_string())?;
        let csv = std::fs::read(out.with_extension("csv")).map_err(|e| e.to_string())?;
        outputs.push((json, csv));
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0] == outputs[1], || "outputs differ between runs".into())?;
    Ok(format!("{} JSON bytes and {} CSV bytes identical", outputs[0].0.len(), outputs[0].1.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "transfer-channel trajectory", criterion_1),
        (2, "GAD trajectory", criterion_2),
        (3, "coherence-breaking indices", criterion_3),
        (4, "GAD semigroup", criterion_4),
        (5, "SCBC/CBC/phase-sweep equivalence", criterion_5),
        (6, "inclusion chain", criterion_6),
        (7, "SIO∩CBC = DIO∩CBC", criterion_7),
        (8, "factorization law", criterion_8),
        (9, "Lipschitz constant", criterion_9),
        (10, "Lévy bounds", criterion_10),
        (11, "mean-coherence oracle", criterion_11),
        (12, "determinism", criterion_12),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
