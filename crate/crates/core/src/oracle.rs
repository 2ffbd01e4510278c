//! Exact QFI of the erased probe from its density operator.
//!
//! The erased probe lives on the span of the distinct shortened codewords, so
//! the density operator is assembled on that restricted basis (size ≤ |C|)
//! rather than the full 2^(n−t)-dimensional space. An independent
//! cross-check builds the full-space operator by explicit partial trace and
//! recomputes everything there.
//!
//! In the computational basis the generator `H = Z_1 + … + Z_{n'}` is the
//! real diagonal `h(x) = n' − 2·wt(x)` and the density operator is real
//! symmetric, so `|⟨e_i|[H,ρ]|e_j⟩|²` reduces to real arithmetic throughout;
//! no complex matrices are needed.

use nalgebra::DMatrix;

use crate::bits::BitVector;
use crate::codes::BinaryCode;
use crate::eigen::symmetric_eigen;
use crate::shorten::{ErasurePattern, ShortenedFamily};
use crate::{error::Error, Result};

/// Eigenpair inclusion threshold in the QFI spectral sum (relative to unit
/// trace). Results are insensitive across several orders of magnitude; the
/// unit tests pin that.
pub const EIGEN_EPS: f64 = 1e-12;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
const NORMALIZATION_TOL: f64 = 1e-10;

/// A density operator on an explicit basis of distinct bit vectors.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub(crate) basis: Vec<u64>,
    pub(crate) word_len: usize,
    pub(crate) mat: DMatrix<f64>,
}

impl DensityOperator {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis words in ascending packed order.
    pub fn basis(&self) -> impl Iterator<Item = BitVector> + '_ {
        let len = self.word_len;
        self.basis
            .iter()
            .map(move |&w| BitVector::new(len, w).expect("stored basis word is valid"))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Diagonal of `H = Z_1 + … + Z_{n'}` on this basis.
    pub fn hamiltonian(&self) -> HamiltonianDiag {
        HamiltonianDiag {
            values: self
                .basis
                .iter()
                .map(|w| self.word_len as i64 - 2 * w.count_ones() as i64)
                .collect(),
        }
    }

    /// Check Hermiticity, unit trace, and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.mat.nrows() != n || self.mat.ncols() != n {
            return Err(Error::MalformedState(format!(
                "matrix is {}x{} on a basis of {n} words",
                self.mat.nrows(),
                self.mat.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.mat[(i, j)] - self.mat[(j, i)]).abs() > HERMITICITY_TOL {
                    return Err(Error::MalformedState(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| self.mat[(i, i)]).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::MalformedState(format!("trace is {trace}, not 1")));
        }
        let (values, _) = symmetric_eigen(&self.mat);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(Error::MalformedState(format!(
                "smallest eigenvalue {min:e} below tolerance"
            )));
        }
        Ok(())
    }
}

/// Diagonal Hamiltonian values aligned with a basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianDiag {
    values: Vec<i64>,
}

impl HamiltonianDiag {
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// The three oracle quantities for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTriple {
    /// Spectral-sum QFI.
    pub exact_qfi: f64,
    /// `2 tr(ρ²H²) − 2 tr(ρHρH) = ‖[ρ,H]‖₂²`, a QFI lower bound.
    pub gen2norm_lower: f64,
    /// `4 tr(ρH²) − 4 tr(ρH)²`, a QFI upper bound.
    pub var_upper: f64,
}

/// Assemble the erased probe `Σ_z p_z |ψ_z⟩⟨ψ_z|` on the union of the
/// shortened classes: entry `(x,y)` collects `1/|C|` for every class that
/// contains both words. Valid with or without disjointness.
pub fn build_rho(family: &ShortenedFamily) -> DensityOperator {
    let mut basis: Vec<u64> = family
        .classes()
        .iter()
        .flat_map(|c| c.code().packed_words().iter().copied())
        .collect();
    basis.sort_unstable();
    basis.dedup();
    let index = |w: u64| basis.binary_search(&w).expect("word is in the basis");
    let dim = basis.len();
    let weight = 1.0 / family.source_size() as f64;
    let mut mat = DMatrix::zeros(dim, dim);
    for class in family.classes() {
        let ids: Vec<usize> = class
            .code()
            .packed_words()
            .iter()
            .map(|&w| index(w))
            .collect();
        for &i in &ids {
            for &j in &ids {
                mat[(i, j)] += weight;
            }
        }
    }
    DensityOperator {
        basis,
        word_len: family.shortened_len(),
        mat,
    }
}

/// QFI by the regularized spectral sum over eigenpairs of ρ:
/// `2 Σ_{λ_i+λ_j>ε} |⟨e_i|[H,ρ]|e_j⟩|² / (λ_i+λ_j)` with `∂ρ = −i[H,ρ]`.
pub fn exact_qfi(rho: &DensityOperator, h: &HamiltonianDiag) -> Result<f64> {
    exact_qfi_with_eps(rho, h, EIGEN_EPS)
}

/// As [`exact_qfi`] with an explicit eigenpair threshold.
pub fn exact_qfi_with_eps(rho: &DensityOperator, h: &HamiltonianDiag, eps: f64) -> Result<f64> {
    rho.validate()?;
    check_alignment(rho, h)?;
    Ok(spectral_qfi(&rho.mat, &h.as_f64(), eps))
}

fn check_alignment(rho: &DensityOperator, h: &HamiltonianDiag) -> Result<()> {
    if h.values.len() != rho.dim() {
        return Err(Error::MalformedState(format!(
            "Hamiltonian has {} entries for a dimension-{} operator",
            h.values.len(),
            rho.dim()
        )));
    }
    Ok(())
}

fn spectral_qfi(mat: &DMatrix<f64>, h: &[f64], eps: f64) -> f64 {
    let n = mat.nrows();
    let (lambda, v) = symmetric_eigen(mat);
    // H in the eigenbasis: W = Vᵀ diag(h) V
    let mut dv = v.clone();
    for i in 0..n {
        for j in 0..n {
            dv[(i, j)] *= h[i];
        }
    }
    let w = v.transpose() * dv;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let denom = lambda[i] + lambda[j];
            if denom > eps {
                let diff = lambda[i] - lambda[j];
                sum += diff * diff * w[(i, j)] * w[(i, j)] / denom;
            }
        }
    }
    2.0 * sum
}

/// `2 tr(ρ²H²) − 2 tr(ρHρH)`: the squared 2-norm of `[ρ,H]`.
pub fn gen2norm_lower(rho: &DensityOperator, h: &HamiltonianDiag) -> Result<f64> {
    rho.validate()?;
    check_alignment(rho, h)?;
    Ok(gen2norm_of(&rho.mat, &h.as_f64()))
}

fn gen2norm_of(mat: &DMatrix<f64>, h: &[f64]) -> f64 {
    let n = mat.nrows();
    let mut rho2h2 = 0.0;
    let mut rhohrhoh = 0.0;
    for i in 0..n {
        for j in 0..n {
            let sq = mat[(i, j)] * mat[(i, j)];
            rho2h2 += sq * h[i] * h[i];
            rhohrhoh += sq * h[i] * h[j];
        }
    }
    2.0 * rho2h2 - 2.0 * rhohrhoh
}

/// `4 tr(ρH²) − 4 tr(ρH)²`: four times the variance of `H` in the state.
pub fn variance_upper(rho: &DensityOperator, h: &HamiltonianDiag) -> Result<f64> {
    rho.validate()?;
    check_alignment(rho, h)?;
    Ok(variance_of(&rho.mat, &h.as_f64()))
}

fn variance_of(mat: &DMatrix<f64>, h: &[f64]) -> f64 {
    let n = mat.nrows();
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..n {
        first += mat[(i, i)] * h[i];
        second += mat[(i, i)] * h[i] * h[i];
    }
    4.0 * second - 4.0 * first * first
}

/// All three quantities on the restricted basis of a family.
pub fn restricted_triple(family: &ShortenedFamily) -> Result<OracleTriple> {
    let rho = build_rho(family);
    let h = rho.hamiltonian();
    Ok(OracleTriple {
        exact_qfi: exact_qfi(&rho, &h)?,
        gen2norm_lower: gen2norm_lower(&rho, &h)?,
        var_upper: variance_upper(&rho, &h)?,
    })
}

/// The pure-state observable `L = 2i(ρH − Hρ)` for `ρ = |ψ⟩⟨ψ|`. With real
/// `ψ` and diagonal `H` the operator is `i·K` for a real antisymmetric `K`,
/// which is what is stored.
#[derive(Debug, Clone)]
pub struct PureSld {
    imag: DMatrix<f64>,
}

impl PureSld {
    /// The real antisymmetric matrix `K` with `L = iK`.
    pub fn imag_part(&self) -> &DMatrix<f64> {
        &self.imag
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.imag.iter().all(|x| x.abs() <= tol)
    }

    /// `tr(ρ L²) = −tr(ρ K²)` for a real symmetric `ρ`.
    pub fn expectation_sq(&self, rho: &DMatrix<f64>) -> f64 {
        let k2 = &self.imag * &self.imag;
        -(rho * k2).trace()
    }
}

/// Build the pure-state observable from a real amplitude vector on the
/// restricted basis. Errors if `ψ` is not normalized.
pub fn sld_pure(psi: &[f64], h: &HamiltonianDiag) -> Result<PureSld> {
    if psi.len() != h.values.len() {
        return Err(Error::MalformedState(format!(
            "state has {} amplitudes for a {}-entry Hamiltonian",
            psi.len(),
            h.values.len()
        )));
    }
    let norm2: f64 = psi.iter().map(|a| a * a).sum();
    if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization((norm2 - 1.0).abs()));
    }
    let n = psi.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // K_ij = 2 ψ_i ψ_j (h_j − h_i)
            k[(i, j)] = 2.0 * psi[i] * psi[j] * (h.values[j] - h.values[i]) as f64;
        }
    }
    Ok(PureSld { imag: k })
}

/// Cap on `n − t` for the dense full-space path.
pub const FULL_SPACE_CAP: usize = 12;

/// Independent oracle: build the full `2^(n−t)`-dimensional density operator
/// by explicit partial trace of `|ψ_C⟩⟨ψ_C|` over the erased positions and
/// recompute all three quantities there.
pub fn full_space_crosscheck(code: &BinaryCode, pattern: &ErasurePattern) -> Result<OracleTriple> {
    if pattern.n() != code.n() {
        return Err(Error::Domain(format!(
            "pattern is for length {} but code has length {}",
            pattern.n(),
            code.n()
        )));
    }
    let np = code.n() - pattern.t();
    if np > FULL_SPACE_CAP {
        return Err(Error::Size {
            what: "surviving qubits",
            value: np,
            cap: FULL_SPACE_CAP,
        });
    }
    let dim = 1usize << np;
    let amp = 1.0 / code.size() as f64;
    // group codeword slices by the value on the erased positions; each slice
    // of the pure state contributes one outer product to the partial trace
    let mut slices: std::collections::BTreeMap<u64, Vec<usize>> = std::collections::BTreeMap::new();
    for &w in code.packed_words() {
        slices
            .entry(pattern.extract_key(w))
            .or_default()
            .push(pattern.puncture(w) as usize);
    }
    let mut mat = DMatrix::zeros(dim, dim);
    for ids in slices.values() {
        for &i in ids {
            for &j in ids {
                mat[(i, j)] += amp;
            }
        }
    }
    let h: Vec<f64> = (0..dim)
        .map(|x| np as f64 - 2.0 * (x as u64).count_ones() as f64)
        .collect();
    let rho = DensityOperator {
        basis: (0..dim as u64).collect(),
        word_len: np,
        mat,
    };
    rho.validate()?;
    Ok(OracleTriple {
        exact_qfi: spectral_qfi(&rho.mat, &h, EIGEN_EPS),
        gen2norm_lower: gen2norm_of(&rho.mat, &h),
        var_upper: variance_of(&rho.mat, &h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{lower_bound, rat_f64, upper_bound};
    use crate::codes::{reed_muller_code, repetition, BinaryCode};
    use crate::shorten::partition;
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;

    fn rm13() -> BinaryCode {
        reed_muller_code(1, 3).unwrap()
    }

    fn family(code: &BinaryCode, idx: Vec<usize>) -> ShortenedFamily {
        partition(code, &ErasurePattern::new(code.n(), idx).unwrap()).unwrap()
    }

    #[test]
    fn rho_after_one_erasure_is_rank_two_mixture() {
        let fam = family(&rm13(), vec![1]);
        let rho = build_rho(&fam);
        rho.validate().unwrap();
        assert_eq!(rho.dim(), 16);
        let (values, vectors) = symmetric_eigen(&rho.mat);
        let mut vals: Vec<f64> = values.iter().cloned().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_abs_diff_eq!(vals[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.5, epsilon = 1e-12);
        assert!(vals[2].abs() < 1e-12);

        // the eigenspace of 1/2 is spanned by the two uniform superpositions
        let mut projector = DMatrix::zeros(16, 16);
        for (k, &lam) in values.iter().enumerate() {
            if (lam - 0.5).abs() < 1e-8 {
                let v = vectors.column(k);
                projector += v * v.transpose();
            }
        }
        let mut expected = DMatrix::zeros(16, 16);
        for class in fam.classes() {
            let ids: Vec<usize> = class
                .code()
                .packed_words()
                .iter()
                .map(|&w| rho.basis.binary_search(&w).unwrap())
                .collect();
            let a = 1.0 / ids.len() as f64;
            for &i in &ids {
                for &j in &ids {
                    expected[(i, j)] += a;
                }
            }
        }
        assert!((projector - expected).abs().max() < 1e-10);
    }

    #[test]
    fn rho_with_no_erasure_is_pure_projector() {
        let fam = family(&rm13(), vec![]);
        let rho = build_rho(&fam);
        rho.validate().unwrap();
        let a = 1.0 / 16.0;
        assert!(rho.mat.iter().all(|&x| (x - a).abs() < 1e-15));
    }

    #[test]
    fn non_disjoint_classes_collapse_the_basis() {
        let c = BinaryCode::parse_words(&["00", "01"], None).unwrap();
        let fam = family(&c, vec![2]);
        assert!(!fam.is_disjoint());
        let rho = build_rho(&fam);
        assert_eq!(rho.dim(), 1);
        assert_abs_diff_eq!(rho.mat[(0, 0)], 1.0, epsilon = 1e-15);
        rho.validate().unwrap();
    }

    #[test]
    fn pure_state_qfi_is_four_times_the_variance() {
        for n in 2..=8 {
            let fam = family(&repetition(n).unwrap(), vec![]);
            let rho = build_rho(&fam);
            let h = rho.hamiltonian();
            let qfi = exact_qfi(&rho, &h).unwrap();
            // independent route for a pure state: 4(⟨H²⟩ − ⟨H⟩²) from the
            // amplitudes directly
            let psi = [1.0 / (2.0f64).sqrt(); 2];
            let hv: Vec<f64> = h.values().iter().map(|&v| v as f64).collect();
            let mean: f64 = psi.iter().zip(&hv).map(|(a, h)| a * a * h).sum();
            let second: f64 = psi.iter().zip(&hv).map(|(a, h)| a * a * h * h).sum();
            let expected = 4.0 * (second - mean * mean);
            assert_abs_diff_eq!(qfi, expected, epsilon = 1e-9);
            assert_abs_diff_eq!(qfi, 4.0 * (n * n) as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn erased_ghz_support_is_useless() {
        for n in 3..=8 {
            let fam = family(&repetition(n).unwrap(), vec![1]);
            let rho = build_rho(&fam);
            let h = rho.hamiltonian();
            assert!(exact_qfi(&rho, &h).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn rm13_pure_qfi_and_gen2norm() {
        let fam = family(&rm13(), vec![]);
        let rho = build_rho(&fam);
        let h = rho.hamiltonian();
        assert_abs_diff_eq!(exact_qfi(&rho, &h).unwrap(), 32.0, epsilon = 1e-9);
        assert_abs_diff_eq!(gen2norm_lower(&rho, &h).unwrap(), 16.0, epsilon = 1e-9);
        assert_abs_diff_eq!(variance_upper(&rho, &h).unwrap(), 32.0, epsilon = 1e-9);
    }

    #[test]
    fn rm13_one_erasure_triple() {
        let fam = family(&rm13(), vec![1]);
        let t = restricted_triple(&fam).unwrap();
        assert_abs_diff_eq!(t.gen2norm_lower, 7.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.var_upper, 28.0, epsilon = 1e-9);
        assert!(t.exact_qfi >= 7.0 - 1e-9 && t.exact_qfi <= 28.0 + 1e-9);
    }

    #[test]
    fn maximally_mixed_state_commutes() {
        let dim = 8;
        let rho = DensityOperator {
            basis: (0..dim as u64).collect(),
            word_len: 3,
            mat: DMatrix::identity(dim, dim) / dim as f64,
        };
        let h = rho.hamiltonian();
        assert!(gen2norm_lower(&rho, &h).unwrap().abs() < 1e-12);
        assert!(exact_qfi(&rho, &h).unwrap().abs() < 1e-12);
        let expected = 4.0 * h.values().iter().map(|&v| (v * v) as f64).sum::<f64>() / dim as f64;
        assert_abs_diff_eq!(variance_upper(&rho, &h).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn variance_bound_is_tight_for_pure_states() {
        for code in [rm13(), repetition(6).unwrap()] {
            let fam = family(&code, vec![]);
            let t = restricted_triple(&fam).unwrap();
            assert_abs_diff_eq!(t.exact_qfi, t.var_upper, epsilon = 1e-9);
        }
    }

    #[test]
    fn sandwich_holds_on_all_small_instances() {
        let code = rm13();
        for t in 0..=3 {
            for idx in (1..=8).combinations(t) {
                let fam = family(&code, idx);
                let triple = restricted_triple(&fam).unwrap();
                assert!(triple.gen2norm_lower <= triple.exact_qfi + 1e-9);
                assert!(triple.exact_qfi <= triple.var_upper + 1e-9);
            }
        }
    }

    #[test]
    fn bounds_agree_with_oracle_on_disjoint_families() {
        let code = rm13();
        for t in 0..=3 {
            for idx in (1..=8).combinations(t) {
                let fam = family(&code, idx);
                let triple = restricted_triple(&fam).unwrap();
                let l = rat_f64(&lower_bound(&fam).unwrap());
                let u = rat_f64(&upper_bound(&fam).unwrap());
                assert_abs_diff_eq!(l, triple.gen2norm_lower, epsilon = 1e-9);
                assert_abs_diff_eq!(u, triple.var_upper, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sld_pure_cases() {
        // eigenstate of H: zero operator
        let h = HamiltonianDiag {
            values: vec![2, 0, 0, -2],
        };
        let psi = [1.0, 0.0, 0.0, 0.0];
        let sld = sld_pure(&psi, &h).unwrap();
        assert!(sld.is_zero(1e-15));

        // uniform superposition over {00, 11} on two qubits
        let s = 1.0 / (2.0f64).sqrt();
        let psi = [s, 0.0, 0.0, s];
        let sld = sld_pure(&psi, &h).unwrap();
        let mut rho = DMatrix::zeros(4, 4);
        for i in [0usize, 3] {
            for j in [0usize, 3] {
                rho[(i, j)] = 0.5;
            }
        }
        assert_abs_diff_eq!(sld.expectation_sq(&rho), 16.0, epsilon = 1e-9);

        // the rm(1,3) probe state
        let fam = family(&rm13(), vec![]);
        let d = build_rho(&fam);
        let h = d.hamiltonian();
        let psi = vec![0.25; 16];
        let sld = sld_pure(&psi, &h).unwrap();
        assert_abs_diff_eq!(sld.expectation_sq(&d.mat), 32.0, epsilon = 1e-9);

        // unnormalized input is rejected
        assert!(matches!(
            sld_pure(
                &[1.0, 1.0],
                &HamiltonianDiag {
                    values: vec![1, -1]
                }
            ),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn full_space_agrees_with_restricted_basis() {
        let code = rm13();
        for t in 0..=3 {
            for idx in (1..=8).combinations(t) {
                let pat = ErasurePattern::new(8, idx).unwrap();
                let fam = partition(&code, &pat).unwrap();
                let restricted = restricted_triple(&fam).unwrap();
                let full = full_space_crosscheck(&code, &pat).unwrap();
                assert_abs_diff_eq!(restricted.exact_qfi, full.exact_qfi, epsilon = 1e-9);
                assert_abs_diff_eq!(
                    restricted.gen2norm_lower,
                    full.gen2norm_lower,
                    epsilon = 1e-9
                );
                assert_abs_diff_eq!(restricted.var_upper, full.var_upper, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn full_space_examples() {
        let pat = ErasurePattern::new(8, vec![1]).unwrap();
        let t = full_space_crosscheck(&rm13(), &pat).unwrap();
        assert_abs_diff_eq!(t.gen2norm_lower, 7.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.var_upper, 28.0, epsilon = 1e-9);

        let pat = ErasurePattern::new(4, vec![1]).unwrap();
        let t = full_space_crosscheck(&repetition(4).unwrap(), &pat).unwrap();
        assert!(t.exact_qfi.abs() < 1e-10);
        assert!(t.gen2norm_lower.abs() < 1e-10);
        assert_abs_diff_eq!(t.var_upper, 36.0, epsilon = 1e-9);

        // dimension cap
        let code = repetition(14).unwrap();
        let pat = ErasurePattern::new(14, vec![1]).unwrap();
        assert!(matches!(
            full_space_crosscheck(&code, &pat),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn basis_permutation_leaves_outputs_unchanged() {
        let fam = family(&rm13(), vec![2]);
        let rho = build_rho(&fam);
        let h = rho.hamiltonian();
        let base = (
            exact_qfi(&rho, &h).unwrap(),
            gen2norm_lower(&rho, &h).unwrap(),
            variance_upper(&rho, &h).unwrap(),
        );
        // reverse the basis order
        let n = rho.dim();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = rho.mat[(perm[i], perm[j])];
            }
        }
        let permuted = DensityOperator {
            basis: perm.iter().map(|&i| rho.basis[i]).collect(),
            word_len: rho.word_len,
            mat,
        };
        let h2 = permuted.hamiltonian();
        assert_abs_diff_eq!(exact_qfi(&permuted, &h2).unwrap(), base.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            gen2norm_lower(&permuted, &h2).unwrap(),
            base.1,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            variance_upper(&permuted, &h2).unwrap(),
            base.2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nonzero_spectrum_matches_class_probabilities() {
        let code = rm13();
        for idx in [vec![1], vec![1, 2], vec![2, 5, 8]] {
            let fam = family(&code, idx);
            assert!(fam.is_disjoint());
            let rho = build_rho(&fam);
            let (values, _) = symmetric_eigen(&rho.mat);
            let mut nonzero: Vec<f64> =
                values.iter().cloned().filter(|l| l.abs() > 1e-10).collect();
            nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut expected: Vec<f64> = fam
                .classes()
                .iter()
                .map(|c| rat_f64(&fam.probability(c)))
                .collect();
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(nonzero.len(), expected.len());
            for (a, b) in nonzero.iter().zip(&expected) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn qfi_never_falls_below_the_conjectural_double_lower_bound() {
        // measured, not asserted as a theorem elsewhere: the oracle QFI stays
        // above 16 Σ p² Var on these instances
        let code = rm13();
        for t in 0..=3 {
            for idx in (1..=8).combinations(t) {
                let fam = family(&code, idx);
                let doubled = rat_f64(&lower_bound(&fam).unwrap()) * 2.0;
                let triple = restricted_triple(&fam).unwrap();
                assert!(triple.exact_qfi >= doubled - 1e-9);
            }
        }
    }

    #[test]
    fn eigen_threshold_is_immaterial() {
        let fam = family(&rm13(), vec![1]);
        let rho = build_rho(&fam);
        let h = rho.hamiltonian();
        let reference = exact_qfi_with_eps(&rho, &h, EIGEN_EPS).unwrap();
        for eps in [1e-14, 1e-13, 1e-11, 1e-10, 1e-9, 1e-8] {
            let v = exact_qfi_with_eps(&rho, &h, eps).unwrap();
            assert_abs_diff_eq!(v, reference, epsilon = 1e-9);
        }
    }

    /// QFI of the evolved (complex Hermitian) state via a real 2d×2d
    /// embedding: each complex pair contributes twice, so the leading factor
    /// 2 of the spectral sum is dropped.
    fn qfi_complex_embedded(rho: &DMatrix<f64>, h: &[f64], theta: f64) -> f64 {
        let n = rho.nrows();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let delta = h[i] - h[j];
                a[(i, j)] = (theta * delta).cos() * rho[(i, j)];
                b[(i, j)] = -(theta * delta).sin() * rho[(i, j)];
            }
        }
        // G = −i[H, ρ_θ] = P + iQ with P = DB − BD, Q = AD − DA
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(h));
        let p = &d * &b - &b * &d;
        let q = &a * &d - &d * &a;
        let embed = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = x[(i, j)];
                    m[(i + n, j + n)] = x[(i, j)];
                    m[(i, j + n)] = -y[(i, j)];
                    m[(i + n, j)] = y[(i, j)];
                }
            }
            m
        };
        let rho_embed = embed(&a, &b);
        let g_embed = embed(&p, &q);
        let (values, vectors) = symmetric_eigen(&rho_embed);
        let w = vectors.transpose() * &g_embed * &vectors;
        let mut sum = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let denom = values[i] + values[j];
                if denom > EIGEN_EPS {
                    sum += w[(i, j)] * w[(i, j)] / denom;
                }
            }
        }
        sum
    }

    #[test]
    fn qfi_is_invariant_under_the_generated_evolution() {
        let fam = family(&rm13(), vec![1]);
        let rho = build_rho(&fam);
        let h = rho.hamiltonian();
        let hv: Vec<f64> = h.values().iter().map(|&v| v as f64).collect();
        let at_zero = exact_qfi(&rho, &h).unwrap();
        // the embedded path at θ = 0 must reproduce the plain spectral sum
        assert_abs_diff_eq!(
            qfi_complex_embedded(&rho.mat, &hv, 0.0),
            at_zero,
            epsilon = 1e-8
        );
        for theta in [0.3, 1.1] {
            let v = qfi_complex_embedded(&rho.mat, &hv, theta);
            assert_abs_diff_eq!(v, at_zero, epsilon = 1e-8);
        }
    }
}
