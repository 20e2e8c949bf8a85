//! Gaussian field over a dipole window and Monte Carlo checks of its
//! Fourier identities.
//!
//! The field assigns to each dipole v_x a centered Gaussian ṽ_x with
//! E[ṽ_x ṽ_y] = ⟨v_x, v_y⟩_E, so E[e^{iũ}] = e^{−‖u‖²/2} for u in the span.
//! Moments against e^{iũ} are Hermite polynomials:
//! E[f̃ⁿe^{iũ}] = (−i)ⁿ‖f‖ⁿ H_n(⟨u,f⟩/‖f‖) e^{−‖u‖²/2}, with
//! H_{n+1} = H_n′ − x H_n and H₀ = 1.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dipole::KernelMatrix;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::numerics::{Cholesky, DenseMatrix, NeumaierSum, RandomSource};

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 200_000;
/// Highest supported moment order.
pub const MAX_ORDER: usize = 3;
/// Samples per parallel work unit.
const CHUNK: usize = 4096;

/// H₀..H_N in the monomial basis; `coefficients[n][k]` multiplies xᵏ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteFamily {
    pub coefficients: Vec<Vec<f64>>,
}

impl HermiteFamily {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn degree(&self, n: usize) -> usize {
        self.coefficients[n]
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, n: usize, x: f64) -> f64 {
        self.coefficients[n]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }
}

/// p′ − x·p in the monomial basis.
pub fn hermite_step(p: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; p.len() + 1];
    for (k, c) in p.iter().enumerate().skip(1) {
        next[k - 1] += k as f64 * c;
    }
    for (k, c) in p.iter().enumerate() {
        next[k + 1] -= c;
    }
    next
}

/// H₀..H_N from H₀ = 1 and H_{n+1} = H_n′ − x H_n.
pub fn hermite(n: usize) -> HermiteFamily {
    let mut coefficients = vec![vec![1.0]];
    for k in 0..n {
        let next = hermite_step(&coefficients[k]);
        coefficients.push(next);
    }
    HermiteFamily { coefficients }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: Complex64,
    pub standard_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// |estimate − target| in units of the standard error.
    pub fn z_score(&self, target: Complex64) -> f64 {
        let d = (self.estimate - target).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.standard_error
        }
    }

    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.estimate - target).norm() <= k * self.standard_error
    }
}

/// Centered Gaussian vector (ṽ_x) over a dipole window with covariance the
/// kernel matrix.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    pub window: Vec<VertexId>,
    pub covariance: KernelMatrix,
    pub factor: DenseMatrix,
    pub seed: u64,
    base: Option<VertexId>,
    root: Cholesky,
}

/// Builds the field for `gram`; the covariance root is a semidefinite
/// Cholesky factor.
pub fn gaussian_field(gram: &KernelMatrix, seed: u64) -> Result<GaussianModel> {
    let root = Cholesky::factor_semidefinite(&gram.entries, 1e-12)?;
    let factor = root.lower();
    let n = gram.dim();
    let scale = gram.entries.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..=i {
            let mut s = NeumaierSum::new();
            for k in 0..=j {
                s.add(factor.get(i, k) * factor.get(j, k));
            }
            if (s.value() - gram.get(i, j)).abs() > 1e-10 * scale {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: gram.get(i, j) - s.value(),
                });
            }
        }
    }
    Ok(GaussianModel {
        window: gram.window.clone(),
        covariance: gram.clone(),
        factor,
        seed,
        base: None,
        root,
    })
}

impl GaussianModel {
    /// Names the base point, whose dipole is zero.
    pub fn with_base(mut self, base: VertexId) -> Self {
        self.base = Some(base);
        self
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    fn check(&self, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a window of {}",
                coefficients.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// ⟨Σ a_i v_i, Σ b_j v_j⟩_E.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let kb = self.covariance.entries.mul_vec(b);
        let mut s = NeumaierSum::new();
        for (x, y) in a.iter().zip(&kb) {
            s.add(x * y);
        }
        Ok(s.value())
    }

    /// Value at `x` of u = Σ a_i v_i; u(o) = 0.
    pub fn value_at(&self, a: &[f64], x: &VertexId) -> Result<f64> {
        self.check(a)?;
        if self.base.as_ref() == Some(x) {
            return Ok(0.0);
        }
        let i = self
            .window
            .iter()
            .position(|w| w == x)
            .ok_or_else(|| Error::UnknownVertex(x.clone()))?;
        let mut s = NeumaierSum::new();
        for (j, c) in a.iter().enumerate() {
            s.add(c * self.covariance.get(i, j));
        }
        Ok(s.value())
    }

    fn coefficient_of(&self, x: &VertexId) -> Result<Option<usize>> {
        if self.base.as_ref() == Some(x) {
            return Ok(None);
        }
        self.window
            .iter()
            .position(|w| w == x)
            .map(Some)
            .ok_or_else(|| Error::UnknownVertex(x.clone()))
    }

    /// Sample `index` of the field: ṽ = L z with z the normals at position
    /// index·dim of the seeded stream.
    pub fn sample_into(&self, index: usize, z: &mut [f64], out: &mut [f64]) {
        let n = self.dim();
        RandomSource::new(self.seed)
            .at((index * n) as u64)
            .next_normals(z);
        self.root.lower_mul(z, out);
    }

    /// Mean of h(ṽ) over samples 0..count, chunked in parallel. Each sample
    /// reads its own stream position, so the result does not depend on the
    /// number of threads.
    pub fn monte_carlo<H>(&self, samples: usize, h: H) -> MonteCarloEstimate
    where
        H: Fn(&[f64]) -> Complex64 + Sync,
    {
        let n = self.dim();
        let chunks = samples.div_ceil(CHUNK);
        let partial: Vec<[NeumaierSum; 4]> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(samples);
                let mut z = vec![0.0; (hi - lo) * n];
                RandomSource::new(self.seed)
                    .at((lo * n) as u64)
                    .next_normals(&mut z);
                let mut v = vec![0.0; n];
                let mut acc = [
                    NeumaierSum::new(),
                    NeumaierSum::new(),
                    NeumaierSum::new(),
                    NeumaierSum::new(),
                ];
                for zi in z.chunks_exact(n.max(1)).take(hi - lo) {
                    self.root.lower_mul(zi, &mut v);
                    let value = h(&v);
                    acc[0].add(value.re);
                    acc[1].add(value.im);
                    acc[2].add(value.re * value.re);
                    acc[3].add(value.im * value.im);
                }
                if n == 0 {
                    let value = h(&v);
                    for _ in lo..hi {
                        acc[0].add(value.re);
                        acc[1].add(value.im);
                        acc[2].add(value.re * value.re);
                        acc[3].add(value.im * value.im);
                    }
                }
                acc
            })
            .collect();
        let mut total = [
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
        ];
        for p in &partial {
            for (t, s) in total.iter_mut().zip(p) {
                t.add(s.value());
            }
        }
        let m = samples as f64;
        let mean = Complex64::new(total[0].value() / m, total[1].value() / m);
        let second = (total[2].value() + total[3].value()) / m;
        let var = ((second - mean.norm_sqr()) * m / (m - 1.0).max(1.0)).max(0.0);
        MonteCarloEstimate {
            estimate: mean,
            standard_error: (var / m).sqrt(),
            samples,
        }
    }
}

/// Sample mean and covariance of the field with entrywise standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceEstimate {
    pub mean: Vec<f64>,
    pub mean_standard_error: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_standard_error: Vec<Vec<f64>>,
    pub samples: usize,
}

/// Estimates E[ṽ_i] and E[ṽ_i ṽ_j] from samples 0..count.
pub fn sampled_covariance(model: &GaussianModel, samples: usize) -> Result<CovarianceEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = model.dim();
    let mut mean = vec![0.0; n];
    let mut mean_standard_error = vec![0.0; n];
    for i in 0..n {
        let e = model.monte_carlo(samples, |v| Complex64::new(v[i], 0.0));
        mean[i] = e.estimate.re;
        mean_standard_error[i] = e.standard_error;
    }
    let mut covariance = vec![vec![0.0; n]; n];
    let mut covariance_standard_error = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            // the field is centered, so E[ṽ_i ṽ_j] is the covariance
            let e = model.monte_carlo(samples, |v| Complex64::new(v[i] * v[j], 0.0));
            covariance[i][j] = e.estimate.re;
            covariance[j][i] = e.estimate.re;
            covariance_standard_error[i][j] = e.standard_error;
            covariance_standard_error[j][i] = e.standard_error;
        }
    }
    Ok(CovarianceEstimate {
        mean,
        mean_standard_error,
        covariance,
        covariance_standard_error,
        samples,
    })
}

fn dot(a: &[f64], v: &[f64]) -> f64 {
    a.iter().zip(v).map(|(x, y)| x * y).sum()
}

/// e^{−‖u‖²/2}.
pub fn characteristic_target(model: &GaussianModel, u: &[f64]) -> Result<Complex64> {
    Ok(Complex64::new((-0.5 * model.inner(u, u)?).exp(), 0.0))
}

/// Estimate of E[e^{iũ}].
pub fn mc_characteristic(
    model: &GaussianModel,
    u: &[f64],
    samples: usize,
) -> Result<MonteCarloEstimate> {
    model.check(u)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(model.monte_carlo(samples, |v| Complex64::from_polar(1.0, dot(u, v))))
}

/// (−i)ⁿ‖f‖ⁿH_n(⟨u,f⟩/‖f‖)e^{−‖u‖²/2}, expanded so that f = 0 is allowed.
pub fn moment_target(model: &GaussianModel, f: &[f64], u: &[f64], n: usize) -> Result<Complex64> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder(n));
    }
    let ff = model.inner(f, f)?;
    let uf = model.inner(u, f)?;
    let h = hermite(n);
    // ‖f‖ⁿ H_n(t) with t = ⟨u,f⟩/‖f‖ is Σ_k h_k ⟨u,f⟩ᵏ ‖f‖^{n−k}, n − k even
    let mut s = 0.0;
    for (k, c) in h.coefficients[n].iter().enumerate() {
        if *c != 0.0 {
            s += c * uf.powi(k as i32) * ff.powi(((n - k) / 2) as i32);
        }
    }
    let phase = Complex64::new(0.0, -1.0).powu(n as u32);
    Ok(phase * s * (-0.5 * model.inner(u, u)?).exp())
}

/// Estimate of E[f̃ⁿe^{iũ}] for n ≤ 3.
pub fn mc_moment(
    model: &GaussianModel,
    f: &[f64],
    u: &[f64],
    n: usize,
    samples: usize,
) -> Result<MonteCarloEstimate> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder(n));
    }
    model.check(f)?;
    model.check(u)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(model.monte_carlo(samples, |v| {
        Complex64::from_polar(dot(f, v).powi(n as i32), dot(u, v))
    }))
}

/// i(u(x) − u(y))e^{−‖u‖²/2}.
pub fn dipole_transform_target(
    model: &GaussianModel,
    x: &VertexId,
    y: &VertexId,
    u: &[f64],
) -> Result<Complex64> {
    let d = model.value_at(u, x)? - model.value_at(u, y)?;
    Ok(Complex64::new(0.0, d) * (-0.5 * model.inner(u, u)?).exp())
}

/// Estimate of E[w̃_{x,y}e^{iũ}], w_{x,y} = v_x − v_y.
pub fn mc_dipole_transform(
    model: &GaussianModel,
    x: &VertexId,
    y: &VertexId,
    u: &[f64],
    samples: usize,
) -> Result<MonteCarloEstimate> {
    model.check(u)?;
    let ix = model.coefficient_of(x)?;
    let iy = model.coefficient_of(y)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(model.monte_carlo(samples, |v| {
        let w = ix.map_or(0.0, |i| v[i]) - iy.map_or(0.0, |i| v[i]);
        Complex64::from_polar(w, dot(u, v))
    }))
}
