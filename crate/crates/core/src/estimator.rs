//! The explicit measurement observable for the erased probe, its exact
//! moment curves in the phase θ, and the error-propagation mean squared
//! error.
//!
//! For a disjoint family `ρ = Σ_z p_z |ψ_z⟩⟨ψ_z|` the observable is the
//! commutator mixture
//!
//! ```text
//! L = c · i Σ_z p_z ( |ψ_z⟩⟨ψ_z| H − H |ψ_z⟩⟨ψ_z| ),    c = 2,
//! ```
//!
//! which for a pure probe is exactly the pure-state SLD `2i(ρH − Hρ)`. The
//! coefficient convention is `c = 2`; every reported error figure is a ratio
//! that is invariant under `L → cL`, and that invariance is pinned by tests.
//!
//! All moments `tr(ρ_θ L)`, `∂_θ tr(ρ_θ L)`, `tr(ρ_θ L²)` have closed forms
//! as trigonometric sums over the weight multisets of the classes: with
//! per-class sums `S_0 = ⟨ψ^θ|ψ⟩`, `S_1 = ⟨ψ^θ|H|ψ⟩` (global phases cancel
//! in all products),
//!
//! ```text
//! tr(ρ_θ L)  = −2c Σ_z p_z² Im(S_0 S_1*)
//! tr(ρ_θ L²) = −c² Σ_z p_z³ [ 2⟨H⟩_z Re(S_0 S_1*) − |S_0|²⟨H²⟩_z − |S_1|² ]
//! ```
//!
//! and the slope is the term-by-term θ-derivative. The error-propagation MSE
//! is `[tr(ρ_θL²) − tr(ρ_θL)²] / [∂_θ tr(ρ_θL)]²`, flagged undefined where
//! the slope vanishes (an erased GHZ support is the canonical such row). A
//! dense matrix path recomputes the same traces for cross-checking.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::bounds::rat_f64;
use crate::oracle::build_rho;
use crate::shorten::{int, rational_string, ShortenedFamily};
use crate::{error::Error, Result};

/// Coefficient convention for the observable.
pub const DEFAULT_COEFF: f64 = 2.0;

/// Slope magnitudes below this flag the MSE as undefined.
pub const SLOPE_EPS: f64 = 1e-12;

/// The observable on the restricted basis, stored through its real
/// antisymmetric part: `L = i·K`.
#[derive(Debug, Clone)]
pub struct Observable {
    imag: DMatrix<f64>,
}

impl Observable {
    /// The real antisymmetric `K` with `L = iK`. `K` antisymmetric makes `L`
    /// Hermitian with exactly zero diagonal, hence traceless.
    pub fn imag_part(&self) -> &DMatrix<f64> {
        &self.imag
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.imag.iter().all(|x| x.abs() <= tol)
    }
}

/// Build `L = c·i Σ_z p_z (|ψ_z⟩⟨ψ_z|H − H|ψ_z⟩⟨ψ_z|)` on the restricted
/// basis. Requires a disjoint family.
pub fn observable(family: &ShortenedFamily, coeff: f64) -> Result<Observable> {
    require_disjoint(family)?;
    let rho = build_rho(family);
    let basis: Vec<u64> = rho.basis().map(|w| w.value()).collect();
    let h: Vec<f64> = rho
        .hamiltonian()
        .values()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let dim = basis.len();
    let total = family.source_size() as f64;
    let mut k = DMatrix::zeros(dim, dim);
    for class in family.classes() {
        let size = class.size() as f64;
        let p = size / total;
        let amp = 1.0 / size.sqrt();
        let ids: Vec<usize> = class
            .code()
            .packed_words()
            .iter()
            .map(|&w| basis.binary_search(&w).expect("basis contains class words"))
            .collect();
        // K += c p (ψψᵀ D − D ψψᵀ), entry (i,j): c p a² (h_j − h_i)
        for &i in &ids {
            for &j in &ids {
                k[(i, j)] += coeff * p * amp * amp * (h[j] - h[i]);
            }
        }
    }
    Ok(Observable { imag: k })
}

fn require_disjoint(family: &ShortenedFamily) -> Result<()> {
    if family.is_disjoint() {
        Ok(())
    } else {
        Err(Error::Disjointness {
            pattern: format!("{:?}", family.pattern().indices()),
        })
    }
}

/// Per-class ingredients of the moment formulas.
#[derive(Debug, Clone)]
pub struct ClassMoments {
    /// Class probability `p_z`.
    pub p: BigRational,
    /// Mean punctured weight `μ_z`.
    pub mean: BigRational,
    /// Weight variance `V_z`.
    pub variance: BigRational,
    /// Weight multiset as (weight, count) pairs, ascending.
    pub weights: Vec<(u32, u64)>,
}

/// Extract the moment data of every class.
pub fn class_moments(family: &ShortenedFamily) -> Vec<ClassMoments> {
    family
        .classes()
        .iter()
        .map(|c| ClassMoments {
            p: family.probability(c),
            mean: c.stats().mean(),
            variance: c.stats().variance(),
            weights: c.code().weight_enumerator().into_iter().collect(),
        })
        .collect()
}

/// `Σ_z p_z² V_z`, the quantity driving both the bias slope and the
/// precision bound.
pub fn weighted_variance_sum(family: &ShortenedFamily) -> BigRational {
    family
        .classes()
        .iter()
        .map(|c| {
            let p = family.probability(c);
            &p * &p * c.stats().variance()
        })
        .sum()
}

/// The small-θ precision guarantee `1 / (16 Σ_z p_z² V_z)`, exact.
pub fn theorem3_bound(family: &ShortenedFamily) -> Result<BigRational> {
    let denom = int(16) * weighted_variance_sum(family);
    if denom.is_zero() {
        return Err(Error::DegenerateFamily);
    }
    Ok(denom.recip())
}

/// Exact moment curves over a θ grid.
#[derive(Debug, Clone)]
pub struct EstimatorCurve {
    pub thetas: Vec<f64>,
    /// `tr(ρ_θ L)` per θ.
    pub bias_raw: Vec<f64>,
    /// Analytic `∂_θ tr(ρ_θ L)` per θ.
    pub slope: Vec<f64>,
    /// `tr(ρ_θ L²)` per θ.
    pub second_moment: Vec<f64>,
    /// Error-propagation MSE per θ; `None` where the slope vanishes.
    pub mse: Vec<Option<f64>>,
}

struct ClassData {
    p: f64,
    np: f64,
    m1: f64,
    m2: f64,
    weights: Vec<(f64, f64)>, // (weight, count/N)
}

fn class_data(family: &ShortenedFamily) -> Vec<ClassData> {
    let np = family.shortened_len() as f64;
    family
        .classes()
        .iter()
        .map(|c| {
            let n = c.size() as f64;
            let mean = rat_f64(&c.stats().mean());
            let second = rat_f64(&c.stats().second_moment());
            ClassData {
                p: n / family.source_size() as f64,
                np,
                m1: np - 2.0 * mean,
                m2: np * np - 4.0 * np * mean + 4.0 * second,
                weights: c
                    .code()
                    .weight_enumerator()
                    .into_iter()
                    .map(|(w, count)| (f64::from(w), count as f64 / n))
                    .collect(),
            }
        })
        .collect()
}

/// One θ evaluation: (bias, slope, second moment).
fn moments_at(classes: &[ClassData], theta: f64, coeff: f64) -> (f64, f64, f64) {
    let mut bias = 0.0;
    let mut slope = 0.0;
    let mut second = 0.0;
    for class in classes {
        // S0 = Σ q_w e^{-2iθw}, S1 = Σ q_w (n'-2w) e^{-2iθw},
        // with the θ-derivatives attaching a factor -2iw
        let mut s0 = Complex64::ZERO;
        let mut s1 = Complex64::ZERO;
        let mut ds0 = Complex64::ZERO;
        let mut ds1 = Complex64::ZERO;
        for &(w, q) in &class.weights {
            let phase = Complex64::new(0.0, -2.0 * theta * w).exp();
            let a = q * phase;
            let hval = class.np - 2.0 * w;
            s0 += a;
            s1 += hval * a;
            let da = Complex64::new(0.0, -2.0 * w) * a;
            ds0 += da;
            ds1 += hval * da;
        }
        let p2 = class.p * class.p;
        let z = s0 * s1.conj();
        bias += -2.0 * coeff * p2 * z.im;
        slope += -2.0 * coeff * p2 * (ds0 * s1.conj() + s0 * ds1.conj()).im;
        second += -coeff
            * coeff
            * p2
            * class.p
            * (2.0 * class.m1 * z.re - s0.norm_sqr() * class.m2 - s1.norm_sqr());
    }
    (bias, slope, second)
}

/// Evaluate the closed-form curves over `thetas` with an explicit observable
/// coefficient. Requires a disjoint family.
pub fn moment_curves_scaled(
    family: &ShortenedFamily,
    thetas: &[f64],
    coeff: f64,
) -> Result<EstimatorCurve> {
    require_disjoint(family)?;
    let classes = class_data(family);
    let mut curve = EstimatorCurve {
        thetas: thetas.to_vec(),
        bias_raw: Vec::with_capacity(thetas.len()),
        slope: Vec::with_capacity(thetas.len()),
        second_moment: Vec::with_capacity(thetas.len()),
        mse: Vec::with_capacity(thetas.len()),
    };
    for &theta in thetas {
        let (bias, slope, second) = moments_at(&classes, theta, coeff);
        curve.bias_raw.push(bias);
        curve.slope.push(slope);
        curve.second_moment.push(second);
        curve.mse.push(if slope.abs() < SLOPE_EPS {
            None
        } else {
            Some((second - bias * bias) / (slope * slope))
        });
    }
    Ok(curve)
}

/// [`moment_curves_scaled`] with the `c = 2` convention.
pub fn moment_curves(family: &ShortenedFamily, thetas: &[f64]) -> Result<EstimatorCurve> {
    moment_curves_scaled(family, thetas, DEFAULT_COEFF)
}

/// Error-propagation MSE at one θ; `Ok(None)` where the slope vanishes.
pub fn mse_at(family: &ShortenedFamily, theta: f64) -> Result<Option<f64>> {
    let curve = moment_curves(family, &[theta])?;
    Ok(curve.mse[0])
}

/// Symmetric default grid: `steps` points on `[-max, max]`.
pub fn default_grid(max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![0.0];
    }
    let h = 2.0 * max / (steps - 1) as f64;
    (0..steps).map(|i| -max + h * i as f64).collect()
}

/// Dense cross-check: assemble ρ and L as matrices, evolve ρ by the diagonal
/// unitary, and return `(tr(ρ_θ L), tr(ρ_θ L²))` from explicit complex
/// arithmetic.
pub fn matrix_moments(family: &ShortenedFamily, theta: f64, coeff: f64) -> Result<(f64, f64)> {
    let l = observable(family, coeff)?;
    let rho = build_rho(family);
    let h: Vec<f64> = rho
        .hamiltonian()
        .values()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let k = l.imag_part();
    let k2 = k * k;
    let dim = h.len();
    let mut tr_l = Complex64::ZERO;
    let mut tr_l2 = Complex64::ZERO;
    for x in 0..dim {
        for y in 0..dim {
            // (ρ_θ)_{xy} = e^{-iθ(h_x - h_y)} ρ_{xy}
            let phase = Complex64::new(0.0, -theta * (h[x] - h[y])).exp();
            let rho_xy = phase * rho.matrix()[(x, y)];
            // L = iK, L² = -K²
            tr_l += rho_xy * Complex64::new(0.0, k[(y, x)]);
            tr_l2 += rho_xy * (-k2[(y, x)]);
        }
    }
    debug_assert!(tr_l.im.abs() < 1e-9, "tr(ρθ L) must be real");
    debug_assert!(tr_l2.im.abs() < 1e-9, "tr(ρθ L²) must be real");
    Ok((tr_l.re, tr_l2.re))
}

/// Curve CSV: `theta,bias_raw,slope,second_moment,mse,defined`, floats with
/// 17 significant digits, MSE cell empty on undefined rows.
pub fn curve_csv(curve: &EstimatorCurve) -> String {
    use crate::bounds::fmt_f64;
    let mut out = String::from("theta,bias_raw,slope,second_moment,mse,defined\n");
    for i in 0..curve.thetas.len() {
        let (mse_cell, defined) = match curve.mse[i] {
            Some(v) => (fmt_f64(v), true),
            None => (String::new(), false),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(curve.thetas[i]),
            fmt_f64(curve.bias_raw[i]),
            fmt_f64(curve.slope[i]),
            fmt_f64(curve.second_moment[i]),
            mse_cell,
            defined
        ));
    }
    out
}

/// JSON summary of one estimator run.
pub fn summary_json(family: &ShortenedFamily, exact_qfi: Option<f64>) -> Result<serde_json::Value> {
    let bound = theorem3_bound(family).ok();
    let mse0 = mse_at(family, 0.0)?;
    Ok(serde_json::json!({
        "theorem3_bound": bound.as_ref().map(rational_string),
        "theorem3_bound_float": bound.as_ref().map(rat_f64),
        "mse_at_0": mse0,
        "exact_qfi_inverse": exact_qfi.map(|q| 1.0 / q),
        "defined": mse0.is_some(),
    }))
}
