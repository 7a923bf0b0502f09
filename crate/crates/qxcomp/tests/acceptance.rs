//! Acceptance suite: one pass/fail line per criterion.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::fs;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qxcomp::coding::{
    build_prefix_code, cross_entropy, decode, encode, expected_length, shannon_entropy,
    shannon_lengths, LengthMode,
};
use qxcomp::linalg::{fidelity, ComplexMatrix};
use qxcomp::protocol::{
    basis_change, compress_exact, induced_distribution, mean_codeword_length, pi_mass_exact,
    pi_mass_mc, prepare, quantum_cross_entropy, von_neumann_entropy, LengthConditionSpec,
    QuantumSource,
};
use qxcomp::typicality::{
    is_strong_typical, is_weak_typical, Distribution, Sequence, DEFAULT_EXACT_CAP,
};

fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let ggd = g.mat_mul(&g.dagger()).unwrap();
    let tr = ggd.trace().re;
    ggd.scale(Complex64::new(1.0 / tr, 0.0))
}

fn random_distribution(d: usize, rng: &mut impl Rng) -> Distribution {
    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let tail: f64 = probs[..d - 1].iter().sum();
    probs[d - 1] = 1.0 - tail;
    Distribution::new(probs).unwrap()
}

/// ρ₀ = diag(0.75, 0.25), σ₀ = 0.9|+⟩⟨+| + 0.1|−⟩⟨−|; S_cross ≈ 1.737.
fn mismatched_pair() -> (QuantumSource, QuantumSource) {
    let rho = QuantumSource::new(
        ComplexMatrix::from_real_rows(&[vec![0.75, 0.0], vec![0.0, 0.25]]),
        "rho0",
    )
    .unwrap();
    let sigma = QuantumSource::new(
        ComplexMatrix::from_real_rows(&[vec![0.5, 0.4], vec![0.4, 0.5]]),
        "sigma0",
    )
    .unwrap();
    (rho, sigma)
}

fn criterion_1_optimal_rate_recovery() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for d in [2usize, 4, 8] {
        for i in 0..100 {
            let rho = QuantumSource::new(random_density_matrix(d, &mut rng), "rho").unwrap();
            let s = von_neumann_entropy(&rho);
            let c = quantum_cross_entropy(&rho, &rho).unwrap().value();
            if (c - s).abs() >= 1e-10 {
                return Err(format!("D={d} case {i}: |S(p,p)-S(p)| = {:.3e}", (c - s).abs()));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        return Err(format!("runtime {elapsed:?} exceeds 5 s"));
    }
    Ok(())
}

fn criterion_2_klein_inequality() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for i in 0..1000 {
        let d = *[2usize, 4, 8].get(i % 3).unwrap();
        let rho = QuantumSource::new(random_density_matrix(d, &mut rng), "rho").unwrap();
        let sigma = QuantumSource::new(random_density_matrix(d, &mut rng), "sigma").unwrap();
        let c = quantum_cross_entropy(&rho, &sigma).unwrap().value();
        let s = von_neumann_entropy(&rho);
        if c < s - 1e-10 {
            return Err(format!("pair {i}: S(rho,sigma)={c} < S(rho)={s}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        return Err(format!("runtime {elapsed:?} exceeds 30 s"));
    }
    Ok(())
}

fn criterion_3_two_path_identity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for i in 0..1000 {
        let d = *[2usize, 4, 8].get(i % 3).unwrap();
        let rho = QuantumSource::new(random_density_matrix(d, &mut rng), "rho").unwrap();
        let sigma = QuantumSource::new(random_density_matrix(d, &mut rng), "sigma").unwrap();
        let via_trace = match quantum_cross_entropy(&rho, &sigma).unwrap() {
            qxcomp::coding::Rate::Finite(v) => v,
            qxcomp::coding::Rate::Infinite => continue,
        };
        let r = induced_distribution(&rho, sigma.decomposition()).unwrap();
        let via_sum: f64 = r
            .probs()
            .iter()
            .zip(&sigma.decomposition().eigenvalues)
            .map(|(&ri, &qi)| -ri * qi.log2())
            .sum();
        if (via_trace - via_sum).abs() >= 1e-9 {
            return Err(format!(
                "pair {i}: trace route {via_trace} vs sum route {via_sum}"
            ));
        }
    }
    Ok(())
}

fn criterion_4_fidelity_identity() -> Result<(), String> {
    let start = Instant::now();
    let (rho0, sigma0) = mismatched_pair();
    for n in [2usize, 3] {
        for eps in [0.9, 10.0] {
            let result = compress_exact(&rho0, &sigma0, n, eps, LengthMode::Real, 1 << 20)
                .map_err(|e| format!("N={n} eps={eps}: {e}"))?;
            let decompressed = result.decompress().map_err(|e| e.to_string())?;
            let rho_n = rho0.matrix().kron_power(n, 1 << 20).unwrap();
            let f = fidelity(&rho_n, &decompressed).map_err(|e| e.to_string())?;
            if (f - result.pi_mass).abs() >= 1e-8 {
                return Err(format!(
                    "N={n} eps={eps}: fidelity {f} vs diagonal mass {}",
                    result.pi_mass
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        return Err(format!("runtime {elapsed:?} exceeds 10 s"));
    }
    Ok(())
}

fn criterion_5_unit_probability_trend() -> Result<(), String> {
    let start = Instant::now();
    let (rho0, sigma0) = mismatched_pair();
    let setup = prepare(&rho0, &sigma0, LengthMode::Real).unwrap();
    let expected = -0.5 * 0.9f64.log2() - 0.5 * 0.1f64.log2();
    if (setup.s_cross - expected).abs() >= 1e-9 {
        return Err(format!("S_cross {} vs oracle {expected}", setup.s_cross));
    }
    let mut masses = Vec::new();
    for (i, n) in [50usize, 200, 1000].into_iter().enumerate() {
        let spec = LengthConditionSpec {
            n,
            center: setup.center,
            eps: 0.1,
        };
        let m = pi_mass_mc(
            &spec,
            &setup.induced,
            &setup.length_obs,
            100_000,
            500 + i as u64,
            true,
        )
        .unwrap();
        masses.push(m);
    }
    for w in masses.windows(2) {
        let slack = 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        if w[1].estimate < w[0].estimate - slack {
            return Err(format!(
                "mass decreased: {} -> {} (slack {slack})",
                w[0].estimate, w[1].estimate
            ));
        }
    }
    let final_mass = masses.last().unwrap().estimate;
    if final_mass < 0.95 {
        return Err(format!("pi_mass at N=1000 is {final_mass} < 0.95"));
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 60.0 {
        return Err(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    Ok(())
}

fn criterion_6_exact_mc_agreement() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for set in 0..20 {
        let rho = QuantumSource::new(random_density_matrix(2, &mut rng), "rho").unwrap();
        let sigma = QuantumSource::new(random_density_matrix(2, &mut rng), "sigma").unwrap();
        let eps = rng.gen_range(0.1..0.5);
        let setup = prepare(&rho, &sigma, LengthMode::Real).unwrap();
        let spec = LengthConditionSpec {
            n: 12,
            center: setup.center,
            eps,
        };
        let exact =
            pi_mass_exact(&spec, &setup.induced, &setup.length_obs, DEFAULT_EXACT_CAP).unwrap();
        let mc = pi_mass_mc(
            &spec,
            &setup.induced,
            &setup.length_obs,
            100_000,
            600 + set,
            true,
        )
        .unwrap();
        let tol = 4.0 * mc.std_error.max(1e-6);
        if (mc.estimate - exact.estimate).abs() > tol {
            return Err(format!(
                "set {set}: mc {} vs exact {} (tol {tol})",
                mc.estimate, exact.estimate
            ));
        }
    }
    Ok(())
}

fn criterion_7_integer_length_sandwich() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    // classical: H(p,q) <= <l> < H(p,q) + 1
    for i in 0..1000 {
        let d = rng.gen_range(2..=16);
        let p = random_distribution(d, &mut rng);
        let q = random_distribution(d, &mut rng);
        let h = cross_entropy(&p, &q).unwrap().value();
        let cb = shannon_lengths(&q, LengthMode::Integer).unwrap();
        let el = expected_length(&p, &cb).unwrap();
        if !(h - 1e-9 <= el && el < h + 1.0) {
            return Err(format!("classical pair {i}: H={h}, <l>={el}"));
        }
    }
    // quantum: S_cross <= tr(rho L_int) < S_cross + 1
    for i in 0..1000 {
        let d = *[2usize, 4, 8].get(i % 3).unwrap();
        let rho = QuantumSource::new(random_density_matrix(d, &mut rng), "rho").unwrap();
        let sigma = QuantumSource::new(random_density_matrix(d, &mut rng), "sigma").unwrap();
        let setup = prepare(&rho, &sigma, LengthMode::Integer).unwrap();
        let rho_b = basis_change(&rho, sigma.decomposition()).unwrap();
        let mean = mean_codeword_length(&rho_b, &setup.length_obs)
            .unwrap()
            .value();
        if !(setup.s_cross - 1e-9 <= mean && mean < setup.s_cross + 1.0) {
            return Err(format!(
                "quantum pair {i}: S_cross={}, tr(rho L)={mean}",
                setup.s_cross
            ));
        }
    }
    Ok(())
}

fn criterion_8_kraft_prefix_roundtrip() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for i in 0..1000 {
        let d = rng.gen_range(2..=16);
        let q = random_distribution(d, &mut rng);
        let cb = shannon_lengths(&q, LengthMode::Integer).unwrap();
        if cb.kraft_sum() > 1.0 + 1e-12 {
            return Err(format!("codebook {i}: Kraft sum {}", cb.kraft_sum()));
        }
        let words = cb.codewords.as_deref().unwrap();
        for (a_idx, a) in words.iter().enumerate() {
            for (b_idx, b) in words.iter().enumerate() {
                if a_idx != b_idx && b.starts_with(a.as_str()) {
                    return Err(format!("codebook {i}: {a:?} prefixes {b:?}"));
                }
            }
        }
        let n = rng.gen_range(1..30);
        let letters: Vec<usize> = (0..n).map(|_| rng.gen_range(0..d)).collect();
        let bits = encode(&letters, &cb).unwrap();
        let back = decode(&bits, &cb).unwrap();
        if back != letters {
            return Err(format!("codebook {i}: round-trip mismatch"));
        }
    }
    // the construction itself rejects Kraft violations
    if build_prefix_code(&[1, 1, 1]).is_ok() {
        return Err("Kraft-violating lengths were accepted".into());
    }
    Ok(())
}

fn criterion_9_sub_rate_failure() -> Result<(), String> {
    let (rho0, sigma0) = mismatched_pair();
    let setup = prepare(&rho0, &sigma0, LengthMode::Real).unwrap();
    let eps = 0.1;
    let spec = LengthConditionSpec {
        n: 1000,
        center: setup.center - 5.0 * eps,
        eps,
    };
    let m = pi_mass_mc(&spec, &setup.induced, &setup.length_obs, 100_000, 109, true).unwrap();
    if m.estimate > 0.05 {
        return Err(format!("sub-rate window still captures {}", m.estimate));
    }
    Ok(())
}

fn criterion_10_corrected_containments() -> Result<(), String> {
    // strong => weak with tolerance eps * H(p), exhaustively
    for (probs, n) in [
        (vec![0.75, 0.25], 12usize),
        (vec![0.5, 0.3, 0.2], 8),
        (vec![0.6, 0.4], 10),
    ] {
        let p = Distribution::new(probs).unwrap();
        let h = shannon_entropy(&p);
        let d = p.len();
        for eps in [0.1, 0.3, 0.6] {
            let total = (d as u64).pow(n as u32);
            for code in 0..total {
                let mut letters = Vec::with_capacity(n);
                let mut rest = code;
                for _ in 0..n {
                    letters.push((rest % d as u64) as usize);
                    rest /= d as u64;
                }
                let seq = Sequence::new(letters, d).unwrap();
                if is_strong_typical(&seq, &p, eps) && !is_weak_typical(&seq, &p, eps * h + 1e-9)
                {
                    return Err(format!(
                        "strong sequence not (eps*H)-weak: p={:?} eps={eps} seq={:?}",
                        p.probs(),
                        seq.letters()
                    ));
                }
            }
        }
    }
    // strong (wrt r) => length condition with tolerance eps * S_cross
    let (rho0, sigma0) = mismatched_pair();
    let setup = prepare(&rho0, &sigma0, LengthMode::Real).unwrap();
    let n = 12usize;
    for eps in [0.1, 0.3, 0.6] {
        let scaled = LengthConditionSpec {
            n,
            center: setup.center,
            eps: eps * setup.s_cross + 1e-9,
        };
        for code in 0..(1u64 << n) {
            let letters: Vec<usize> = (0..n).map(|b| ((code >> b) & 1) as usize).collect();
            let seq = Sequence::new(letters, 2).unwrap();
            if is_strong_typical(&seq, setup.induced.distribution(), eps) {
                let total: f64 = seq
                    .letters()
                    .iter()
                    .map(|&l| setup.length_obs.diag_lengths[l])
                    .sum();
                if !scaled.satisfied(total) {
                    return Err(format!(
                        "strong sequence outside scaled window: eps={eps} seq={:?}",
                        seq.letters()
                    ));
                }
            }
        }
    }
    Ok(())
}

fn criterion_11_reproducibility() -> Result<(), String> {
    let dir = std::env::temp_dir().join(format!("qxcomp-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let rho = dir.join("rho.json");
    let sigma = dir.join("sigma.json");
    fs::write(
        &rho,
        r#"{"dim": 2, "re": [[0.75, 0.0], [0.0, 0.25]], "im": [[0.0,0.0],[0.0,0.0]]}"#,
    )
    .map_err(|e| e.to_string())?;
    fs::write(
        &sigma,
        r#"{"dim": 2, "re": [[0.5, 0.4], [0.4, 0.5]], "im": [[0.0,0.0],[0.0,0.0]]}"#,
    )
    .map_err(|e| e.to_string())?;
    let config = dir.join("config.json");
    fs::write(
        &config,
        format!(
            r#"{{"rho0_path": {:?}, "sigma0_path": {:?}, "n_list": [3, 40], "eps": 0.4, "trials": 20000, "seed": 11}}"#,
            rho.to_string_lossy(),
            sigma.to_string_lossy()
        ),
    )
    .map_err(|e| e.to_string())?;

    let run = |out: &std::path::Path, serial: bool| -> Result<Vec<u8>, String> {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qxcomp"));
        cmd.arg("simulate")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out);
        if serial {
            cmd.arg("--serial");
        }
        let status = cmd.status().map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("simulate exited with {status}"));
        }
        fs::read(out).map_err(|e| e.to_string())
    };
    let a = run(&dir.join("a.csv"), false)?;
    let b = run(&dir.join("b.csv"), false)?;
    let c = run(&dir.join("c.csv"), true)?;
    if a != b {
        return Err("two parallel runs differ".into());
    }
    if a != c {
        return Err("serial and parallel runs differ".into());
    }
    Ok(())
}

type Criterion = fn() -> Result<(), String>;

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 optimal-rate recovery S(rho,rho) = S(rho)", criterion_1_optimal_rate_recovery),
        ("2 Klein inequality S(rho,sigma) >= S(rho)", criterion_2_klein_inequality),
        ("3 two-path identity -tr(rho log sigma) = -sum r log q", criterion_3_two_path_identity),
        ("4 fidelity identity F = tr(Pi rho^N)", criterion_4_fidelity_identity),
        ("5 unit probability trend, pi_mass >= 0.95 at N=1000", criterion_5_unit_probability_trend),
        ("6 exact/MC agreement at N=12", criterion_6_exact_mc_agreement),
        ("7 integer-length sandwich, classical and quantum", criterion_7_integer_length_sandwich),
        ("8 Kraft + prefix-free + round-trip decoding", criterion_8_kraft_prefix_roundtrip),
        ("9 sub-rate window failure", criterion_9_sub_rate_failure),
        ("10 corrected strong-typicality containments", criterion_10_corrected_containments),
        ("11 byte-identical reproducibility", criterion_11_reproducibility),
    ];
    let mut failures = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(()) => println!("PASS criterion {name}"),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg}");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
