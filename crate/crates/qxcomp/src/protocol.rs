//! The mismatched-source quantum compression protocol: the source is
//! really ρ₀ but we code for σ₀. Rotating into σ₀'s eigenbasis turns
//! the problem classical on the diagonal: the induced distribution
//! r_i = ⟨a_i|ρ₀|a_i⟩ is coded with lengths log2(1/q_i), the achieved
//! rate is the quantum cross entropy S(ρ₀,σ₀) = -tr(ρ₀ log σ₀), and
//! the projector onto near-typical total codeword lengths captures
//! almost all of ρ^{⊗N}'s mass as N grows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{LengthMode, Rate};
use crate::error::{Error, Result};
use crate::linalg::{
    check_density_matrix, fidelity, matrix_fn, ComplexMatrix, SpectralDecomposition,
    SUPPORT_EIGENVALUE_TOL,
};
use crate::rng::trial_rng;
use crate::typicality::{
    check_exact_cap, sample_letter, type_probability, Distribution, MassEstimate,
    DEFAULT_EXACT_CAP,
};

/// Mass of ρ₀ allowed outside σ₀'s support before the run aborts.
const SUPPORT_LEAK_TOL: f64 = 1e-10;
const BOUNDARY_SLACK: f64 = 1e-12;
const DYADIC_TOL: f64 = 1e-9;

/// A validated density matrix plus its spectral decomposition.
#[derive(Debug, Clone)]
pub struct QuantumSource {
    matrix: ComplexMatrix,
    decomposition: SpectralDecomposition,
    label: String,
}

impl QuantumSource {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let decomposition = check_density_matrix(&matrix)?;
        Ok(QuantumSource {
            matrix,
            decomposition,
            label: label.into(),
        })
    }

    pub fn from_json_str(s: &str, label: impl Into<String>) -> Result<Self> {
        QuantumSource::new(ComplexMatrix::from_json_str(s)?, label)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.decomposition.eigenvalues
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// S(ρ) = -Σ λ log2 λ over the support.
pub fn von_neumann_entropy(src: &QuantumSource) -> f64 {
    let s: f64 = src
        .eigenvalues()
        .iter()
        .filter(|&&l| l > SUPPORT_EIGENVALUE_TOL)
        .map(|&l| -l * l.log2())
        .sum();
    // pure states sum to -0.0
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

fn check_same_dim(a: &QuantumSource, b: &QuantumSource) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", a.dim()),
            right: format!("{}", b.dim()),
        });
    }
    Ok(())
}

/// S(ρ₀,σ₀) = -tr(ρ₀ log2 σ₀), evaluated on σ₀'s support via the
/// spectral matrix logarithm; infinite when ρ₀ leaks outside that
/// support.
pub fn quantum_cross_entropy(rho0: &QuantumSource, sigma0: &QuantumSource) -> Result<Rate> {
    check_same_dim(rho0, sigma0)?;
    let sdec = sigma0.decomposition();
    let r = induced_distribution(rho0, sdec)?;
    let leak: f64 = sdec
        .eigenvalues
        .iter()
        .zip(r.probs())
        .filter(|(&q, _)| q <= SUPPORT_EIGENVALUE_TOL)
        .map(|(_, &ri)| ri)
        .sum();
    if leak > SUPPORT_LEAK_TOL {
        return Ok(Rate::Infinite);
    }
    let log_sigma = matrix_fn(sdec, f64::log2, true)?;
    let value = -rho0.matrix().mat_mul(&log_sigma)?.trace().re;
    Ok(Rate::Finite(value))
}

/// The believed-basis diagonal of the true state: r_i = ⟨a_i|ρ₀|a_i⟩.
#[derive(Debug, Clone)]
pub struct InducedDistribution(Distribution);

impl InducedDistribution {
    pub fn distribution(&self) -> &Distribution {
        &self.0
    }

    pub fn probs(&self) -> &[f64] {
        self.0.probs()
    }
}

pub fn induced_distribution(
    rho0: &QuantumSource,
    sigma_basis: &SpectralDecomposition,
) -> Result<InducedDistribution> {
    if rho0.dim() != sigma_basis.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", rho0.dim()),
            right: format!("{}", sigma_basis.dim()),
        });
    }
    let d = rho0.dim();
    let mut r = Vec::with_capacity(d);
    for i in 0..d {
        let a = sigma_basis.eigenvectors.column(i);
        // ⟨a_i|ρ₀|a_i⟩
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                v += a[j].conj() * rho0.matrix()[(j, k)] * a[k];
            }
        }
        if v.im.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "⟨a|ρ|a⟩ has imaginary part {:.3e}",
                v.im
            )));
        }
        r.push(v.re.max(0.0));
    }
    let sum: f64 = r.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "induced distribution sums to {sum}"
        )));
    }
    // exact renormalization so the Distribution invariant holds
    for ri in &mut r {
        *ri /= sum;
    }
    let tail: f64 = r[..d - 1].iter().sum();
    r[d - 1] = (1.0 - tail).max(0.0);
    Ok(InducedDistribution(Distribution::new(r)?))
}

/// ρ = Uρ₀U† with U = Σ|i⟩⟨a_i|, i.e. the true state written in the
/// believed eigenbasis.
pub fn basis_change(
    rho0: &QuantumSource,
    sigma_basis: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    if rho0.dim() != sigma_basis.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", rho0.dim()),
            right: format!("{}", sigma_basis.dim()),
        });
    }
    let v = &sigma_basis.eigenvectors;
    v.dagger().mat_mul(rho0.matrix())?.mat_mul(v)
}

/// Diagonal length observable L = Σ l_i |i⟩⟨i| in the believed basis.
#[derive(Debug, Clone)]
pub struct LengthObservable {
    pub diag_lengths: Vec<f64>,
    pub mode: LengthMode,
}

impl LengthObservable {
    /// Lengths from the believed eigenvalues q. Eigenvalues outside the
    /// support get infinite length; the protocol never charges them
    /// because the induced distribution has no mass there.
    pub fn from_believed_eigenvalues(q: &[f64], mode: LengthMode) -> Self {
        let diag_lengths = q
            .iter()
            .map(|&qi| {
                if qi <= SUPPORT_EIGENVALUE_TOL {
                    f64::INFINITY
                } else {
                    let l = -qi.log2();
                    match mode {
                        LengthMode::Real => l,
                        LengthMode::Integer => (l - DYADIC_TOL).ceil().max(1.0),
                    }
                }
            })
            .collect();
        LengthObservable { diag_lengths, mode }
    }
}

/// ⟨l⟩ = tr(ρL) = Σ ρ_ii l_i, for ρ already in the believed basis.
pub fn mean_codeword_length(rho: &ComplexMatrix, length_obs: &LengthObservable) -> Result<Rate> {
    if rho.rows() != length_obs.diag_lengths.len() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", rho.rows()),
            right: format!("{}", length_obs.diag_lengths.len()),
        });
    }
    let mut mean = 0.0;
    for (i, &l) in length_obs.diag_lengths.iter().enumerate() {
        let p = rho[(i, i)].re;
        if p <= SUPPORT_EIGENVALUE_TOL {
            continue;
        }
        if l.is_infinite() {
            return Ok(Rate::Infinite);
        }
        mean += p * l;
    }
    Ok(Rate::Finite(mean))
}

/// Window [N(center-ε), N(center+ε)] on total codeword length.
#[derive(Debug, Clone, Copy)]
pub struct LengthConditionSpec {
    pub n: usize,
    pub center: f64,
    pub eps: f64,
}

impl LengthConditionSpec {
    /// Is the per-copy mean length inside the window?
    pub fn satisfied(&self, total_length: f64) -> bool {
        if !total_length.is_finite() {
            return false;
        }
        (total_length / self.n as f64 - self.center).abs() <= self.eps + BOUNDARY_SLACK
    }
}

/// Everything the protocol needs once σ₀'s eigenbasis is fixed.
#[derive(Debug, Clone)]
pub struct ProtocolSetup {
    pub believed_eigenvalues: Vec<f64>,
    pub induced: InducedDistribution,
    pub length_obs: LengthObservable,
    /// Window center: S(ρ₀,σ₀) in real mode, Σ r_i ⌈l_i⌉ in integer mode.
    pub center: f64,
    pub s_cross: f64,
}

/// Aborts with SupportMismatch when ρ₀ puts mass outside σ₀'s support.
pub fn prepare(
    rho0: &QuantumSource,
    sigma0: &QuantumSource,
    mode: LengthMode,
) -> Result<ProtocolSetup> {
    check_same_dim(rho0, sigma0)?;
    let sdec = sigma0.decomposition();
    let induced = induced_distribution(rho0, sdec)?;
    let leak: f64 = sdec
        .eigenvalues
        .iter()
        .zip(induced.probs())
        .filter(|(&q, _)| q <= SUPPORT_EIGENVALUE_TOL)
        .map(|(_, &ri)| ri)
        .sum();
    if leak > SUPPORT_LEAK_TOL {
        return Err(Error::SupportMismatch { mass: leak });
    }
    let s_cross = match quantum_cross_entropy(rho0, sigma0)? {
        Rate::Finite(v) => v,
        Rate::Infinite => return Err(Error::SupportMismatch { mass: leak }),
    };
    let length_obs =
        LengthObservable::from_believed_eigenvalues(&sdec.eigenvalues, mode);
    let center = match mode {
        LengthMode::Real => s_cross,
        LengthMode::Integer => induced
            .probs()
            .iter()
            .zip(&length_obs.diag_lengths)
            .filter(|(&ri, _)| ri > SUPPORT_EIGENVALUE_TOL)
            .map(|(&ri, &li)| ri * li)
            .sum(),
    };
    Ok(ProtocolSetup {
        believed_eigenvalues: sdec.eigenvalues.clone(),
        induced,
        length_obs,
        center,
        s_cross,
    })
}

/// tr(Πρ^{⊗N}) computed exactly. Π is diagonal in the believed product
/// basis, so the trace is a classical probability over types of r.
pub fn pi_mass_exact(
    spec: &LengthConditionSpec,
    r: &InducedDistribution,
    length_obs: &LengthObservable,
    exact_cap: u128,
) -> Result<MassEstimate> {
    let d = r.probs().len();
    check_exact_cap(spec.n, d, exact_cap)?;
    let mut mass = 0.0;
    crate::typicality::for_each_type(spec.n as u64, d, &mut |counts| {
        let total: f64 = counts
            .iter()
            .zip(&length_obs.diag_lengths)
            .filter(|(&k, _)| k > 0)
            .map(|(&k, &l)| k as f64 * l)
            .sum();
        if spec.satisfied(total) {
            mass += type_probability(counts, r.probs());
        }
    });
    Ok(MassEstimate::exact(mass.min(1.0)))
}

/// tr(Πρ^{⊗N}) by Monte Carlo: Pr over i^N ~ r^N that the total length
/// lands in the window. Trial t uses substream (seed, t).
pub fn pi_mass_mc(
    spec: &LengthConditionSpec,
    r: &InducedDistribution,
    length_obs: &LengthObservable,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<MassEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let cum = r.distribution().cumulative();
    let lengths = &length_obs.diag_lengths;
    let n = spec.n;
    let one_trial = |t: u64| -> u64 {
        let mut rng = trial_rng(seed, t);
        let mut total = 0.0;
        for _ in 0..n {
            total += lengths[sample_letter(&cum, &mut rng)];
        }
        spec.satisfied(total) as u64
    };
    let hits: u64 = if parallel {
        (0..trials).into_par_iter().map(one_trial).sum()
    } else {
        (0..trials).map(one_trial).sum()
    };
    Ok(MassEstimate::monte_carlo(hits, trials, seed))
}

/// Output of an exact small-N compression run.
#[derive(Debug, Clone)]
pub struct CompressionResult {
    /// Normalized projected state on the kept subspace (count × count).
    pub gamma: ComplexMatrix,
    /// Isometry from the kept subspace back to the original N-copy
    /// space (D^N × count, orthonormal columns).
    pub isometry: ComplexMatrix,
    /// Product-basis sequence indices satisfying the length condition.
    pub kept: Vec<usize>,
    /// tr(Πρ^{⊗N}).
    pub pi_mass: f64,
    /// Qubits the constructed isometry needs: ⌈log2 count⌉.
    pub qubits_exact: usize,
    pub spec: LengthConditionSpec,
}

impl CompressionResult {
    /// Decompressed state on the original N-copy space: V γ V†.
    pub fn decompress(&self) -> Result<ComplexMatrix> {
        self.isometry
            .mat_mul(&self.gamma)?
            .mat_mul(&self.isometry.dagger())
    }
}

/// Builds γ = Πρ^{⊗N}Π / tr(Πρ^{⊗N}) on the satisfying subspace and the
/// isometry back to the original basis (U†^{⊗N} applied column-wise).
pub fn compress_exact(
    rho0: &QuantumSource,
    sigma0: &QuantumSource,
    n: usize,
    eps: f64,
    mode: LengthMode,
    entry_cap: u128,
) -> Result<CompressionResult> {
    let setup = prepare(rho0, sigma0, mode)?;
    let d = rho0.dim();
    let sdec = sigma0.decomposition();
    let rho_b = basis_change(rho0, sdec)?;
    let rho_n = rho_b.kron_power(n, entry_cap)?;
    let dim_n = rho_n.rows();

    let spec = LengthConditionSpec {
        n,
        center: setup.center,
        eps,
    };
    let mut kept = Vec::new();
    for idx in 0..dim_n {
        let mut total = 0.0;
        let mut rest = idx;
        for pos in (0..n).rev() {
            let digit = (rest / d.pow(pos as u32)) % d;
            rest %= d.pow(pos as u32);
            total += setup.length_obs.diag_lengths[digit];
        }
        if spec.satisfied(total) {
            kept.push(idx);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyProjector { n });
    }

    let mass: f64 = kept.iter().map(|&s| rho_n[(s, s)].re).sum();
    let count = kept.len();
    let mut gamma = ComplexMatrix::zeros(count, count);
    for (a, &sa) in kept.iter().enumerate() {
        for (b, &sb) in kept.iter().enumerate() {
            gamma[(a, b)] = rho_n[(sa, sb)] / mass;
        }
    }

    // isometry column j = ⊗_n |a_{digit_n}⟩ for the j-th kept sequence
    let mut isometry = ComplexMatrix::zeros(dim_n, count);
    for (j, &s) in kept.iter().enumerate() {
        let mut col = vec![Complex64::new(1.0, 0.0)];
        let mut rest = s;
        for pos in (0..n).rev() {
            let digit = (rest / d.pow(pos as u32)) % d;
            rest %= d.pow(pos as u32);
            let a = sdec.eigenvectors.column(digit);
            let mut next = Vec::with_capacity(col.len() * d);
            for &c in &col {
                for &ai in &a {
                    next.push(c * ai);
                }
            }
            col = next;
        }
        for (i, &c) in col.iter().enumerate() {
            isometry[(i, j)] = c;
        }
    }

    let qubits_exact = if count <= 1 {
        0
    } else {
        (count as f64).log2().ceil() as usize
    };
    Ok(CompressionResult {
        gamma,
        isometry,
        kept,
        pi_mass: mass,
        qubits_exact,
        spec,
    })
}

/// Which engine produced a mass estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MassEngine {
    Exact,
    Mc,
}

impl std::fmt::Display for MassEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MassEngine::Exact => write!(f, "exact"),
            MassEngine::Mc => write!(f, "mc"),
        }
    }
}

/// All rates, masses, and qubit counts for one (ρ₀, σ₀, N, ε) run.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub s_rho: f64,
    pub s_sigma: f64,
    pub s_cross: f64,
    pub log_d_ceil: u32,
    pub n: usize,
    pub eps: f64,
    pub mode: LengthMode,
    pub center: f64,
    pub engine: MassEngine,
    pub pi_mass: MassEstimate,
    /// Uhlmann fidelity of ρ^{⊗N} vs the decompressed state; exact runs only.
    pub fidelity: Option<f64>,
    pub qubits_used: u64,
    pub qubits_naive: u64,
    pub fallback_recommended: bool,
}

/// Knobs for a protocol run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub trials: u64,
    pub seed: u64,
    pub exact_cap: u128,
    pub parallel: bool,
    /// Largest N-copy dimension for which the exact compressed state and
    /// Uhlmann fidelity are materialized.
    pub fidelity_dim_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trials: 100_000,
            seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
            parallel: true,
            fidelity_dim_cap: 64,
        }
    }
}

pub fn protocol_report(
    rho0: &QuantumSource,
    sigma0: &QuantumSource,
    n: usize,
    eps: f64,
    mode: LengthMode,
    opts: &RunOptions,
) -> Result<ProtocolReport> {
    let setup = prepare(rho0, sigma0, mode)?;
    let d = rho0.dim();
    let spec = LengthConditionSpec {
        n,
        center: setup.center,
        eps,
    };
    let exact_feasible = check_exact_cap(n, d, opts.exact_cap).is_ok();
    let (engine, pi_mass) = if exact_feasible {
        (
            MassEngine::Exact,
            pi_mass_exact(&spec, &setup.induced, &setup.length_obs, opts.exact_cap)?,
        )
    } else {
        (
            MassEngine::Mc,
            pi_mass_mc(
                &spec,
                &setup.induced,
                &setup.length_obs,
                opts.trials,
                opts.seed,
                opts.parallel,
            )?,
        )
    };

    let dim_n = (d as u128).checked_pow(n as u32);
    let fidelity_value = match dim_n {
        Some(dn) if exact_feasible && dn <= opts.fidelity_dim_cap as u128 => {
            let entry_cap = dn * dn;
            let result = compress_exact(rho0, sigma0, n, eps, mode, entry_cap)?;
            let decompressed = result.decompress()?;
            let rho_n = rho0.matrix().kron_power(n, entry_cap)?;
            Some(fidelity(&rho_n, &decompressed)?)
        }
        _ => None,
    };

    let log_d_ceil = (d as f64).log2().ceil() as u32;
    Ok(ProtocolReport {
        s_rho: von_neumann_entropy(rho0),
        s_sigma: von_neumann_entropy(sigma0),
        s_cross: setup.s_cross,
        log_d_ceil,
        n,
        eps,
        mode,
        center: setup.center,
        engine,
        pi_mass,
        fidelity: fidelity_value,
        qubits_used: (n as f64 * (setup.center + eps)).ceil() as u64,
        qubits_naive: n as u64 * log_d_ceil as u64,
        fallback_recommended: setup.s_cross + eps >= log_d_ceil as f64,
    })
}

/// The worked example used throughout the tests: ρ₀ diagonal in the
/// computational basis, σ₀ mixed in the Hadamard basis, so the induced
/// distribution is uniform and S(ρ₀,σ₀) ≈ 1.737.
#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn mismatched_pair() -> (QuantumSource, QuantumSource) {
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

    pub fn s_cross_oracle() -> f64 {
        // -0.5 log2 0.9 - 0.5 log2 0.1, from r = (0.5, 0.5)
        -0.5 * 0.9f64.log2() - 0.5 * 0.1f64.log2()
    }
}
