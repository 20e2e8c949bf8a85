//! Closed forms and Fourier-side checks for the unit-weight chain ℤ.
//!
//! For finitely supported u, ũ(θ) = Σ u(x)e^{ixθ} and Parseval gives
//! ‖u‖²_E = (2/π)∫_{−π}^{π} sin²(θ/2)|ũ(θ)|² dθ. A monopole at x would have
//! symbol e^{ixθ}/(4 sin²(θ/2)), whose energy integral diverges at θ = 0.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, VertexId, WeightedGraph};
use crate::numerics::{integrate, NeumaierSum};

/// Normalization constant of the Fourier-side energy on ℤ.
pub const FOURIER_CONSTANT: f64 = 2.0 / std::f64::consts::PI;
/// Absolute tolerance of the Fourier-side quadratures.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// ũ(θ) = Σ u(x)e^{ixθ} for finitely supported u on ℤ.
#[derive(Debug, Clone, Default)]
pub struct PeriodicSymbol {
    coefficients: BTreeMap<i64, Complex64>,
}

impl PeriodicSymbol {
    pub fn new(coefficients: BTreeMap<i64, Complex64>) -> Self {
        Self { coefficients }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for (&x, &c) in &self.coefficients {
            let t = c * Complex64::from_polar(1.0, x as f64 * theta);
            re.add(t.re);
            im.add(t.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Σ_x |u(x) − u(x+1)|² for finitely supported u on ℤ.
pub fn direct_energy(u: &BTreeMap<i64, Complex64>) -> f64 {
    let at = |n: i64| u.get(&n).copied().unwrap_or_default();
    let mut edges: Vec<i64> = u.keys().flat_map(|&n| [n - 1, n]).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut s = NeumaierSum::new();
    for n in edges {
        s.add((at(n) - at(n + 1)).norm_sqr());
    }
    s.value()
}

/// Energy of a finitely supported u on ℤ through its Fourier symbol.
pub fn fourier_energy(u: &BTreeMap<i64, Complex64>) -> f64 {
    if u.values().all(|v| *v == Complex64::default()) {
        return 0.0;
    }
    let symbol = PeriodicSymbol::new(u.clone());
    let pi = std::f64::consts::PI;
    let integral = integrate(
        |t| (0.5 * t).sin().powi(2) * symbol.eval(t).norm_sqr(),
        -pi,
        pi,
        QUADRATURE_TOL / FOURIER_CONSTANT,
    );
    FOURIER_CONSTANT * integral.value
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub x: i64,
    pub epsilons: Vec<f64>,
    /// ∫_{ε≤|θ|≤π} sin²(θ/2)|w̃(θ)|² dθ per ε.
    pub partial_integrals: Vec<f64>,
    /// Closed form (1/4)cot(ε/2) of the same integrals.
    pub exact: Vec<f64>,
    /// c in the fit partial ≈ c/ε over the last three ε.
    pub fit_constant: f64,
    /// Largest relative deviation from the fit over the last three ε.
    pub fit_residual: f64,
}

/// Partial energy integrals of the would-be monopole symbol at x.
pub fn monopole_symbol_divergence(x: i64, epsilons: &[f64]) -> Result<DivergenceReport> {
    let pi = std::f64::consts::PI;
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e <= pi)) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {e} outside (0, π]"
        )));
    }
    let integrand = |t: f64| {
        let s2 = (0.5 * t).sin().powi(2);
        // |e^{ixθ}| = 1, so only the modulus of the denominator enters
        let w = 1.0 / (4.0 * s2);
        s2 * w * w
    };
    let partial_integrals: Vec<f64> = epsilons
        .iter()
        .map(|&e| {
            if e >= pi {
                return 0.0;
            }
            // the integrand is even in θ
            2.0 * integrate(integrand, e, pi, 0.5 * QUADRATURE_TOL).value
        })
        .collect();
    let exact = epsilons.iter().map(|&e| 0.25 / (0.5 * e).tan()).collect();
    let tail = epsilons.len().saturating_sub(3);
    let scaled: Vec<f64> = epsilons[tail..]
        .iter()
        .zip(&partial_integrals[tail..])
        .map(|(e, p)| e * p)
        .collect();
    let fit_constant = scaled.iter().sum::<f64>() / scaled.len().max(1) as f64;
    let fit_residual = scaled
        .iter()
        .map(|s| ((s - fit_constant) / fit_constant).abs())
        .fold(0.0, f64::max);
    Ok(DivergenceReport {
        x,
        epsilons: epsilons.to_vec(),
        partial_integrals,
        exact,
        fit_constant,
        fit_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeCheck {
    /// max over probes of |⟨w,u⟩ − (u(x) − u(y))|.
    pub reproducing_error: f64,
    /// max over probes of |⟨w,u⟩ − (u(x) + u(−x) − u(y) − u(−y))|.
    pub symmetric_error: f64,
}

#[derive(Debug, Clone)]
pub struct ChainClosedForms {
    pub x: i64,
    pub y: i64,
    /// w(n) = 0 for |n| ≤ y, |n| − y for y < |n| ≤ x, x − y beyond.
    pub printed: GraphFunction,
    /// v_x − v_y with v_x(n) = clamp(n, 0, x).
    pub corrected: GraphFunction,
    pub printed_check: ProbeCheck,
    pub corrected_check: ProbeCheck,
}

/// Finitely supported probes on ℤ: Dirac masses near the window, two ramps
/// cut off to finite support, and an oscillating bump.
pub fn chain_probes(x: i64) -> Vec<GraphFunction> {
    let r = x.abs() + 3;
    let mut probes: Vec<GraphFunction> = (-r..=r)
        .map(|n| GraphFunction::delta(VertexId::Int(n)))
        .collect();
    let finite = |f: &dyn Fn(i64) -> f64| {
        GraphFunction::finite((-r..=r).map(|n| (VertexId::Int(n), f(n))).collect())
    };
    probes.push(finite(&|n| (n + r) as f64));
    probes.push(finite(&|n| ((n * n) as f64).sqrt() * 0.5 - 1.0));
    probes.push(finite(&|n| ((n as f64) * 0.7).sin() + 0.25 * (n as f64)));
    probes
}

fn probe_check(
    g: &WeightedGraph,
    w: &GraphFunction,
    x: i64,
    y: i64,
    probes: &[GraphFunction],
) -> Result<ProbeCheck> {
    let mut reproducing: f64 = 0.0;
    let mut symmetric: f64 = 0.0;
    for u in probes {
        let at = |n: i64| u.get(&VertexId::Int(n)).unwrap_or(0.0);
        let pairing = g.energy_inner(w, u)?;
        reproducing = reproducing.max((pairing - (at(x) - at(y))).abs());
        symmetric = symmetric.max((pairing - (at(x) + at(-x) - at(y) - at(-y))).abs());
    }
    Ok(ProbeCheck {
        reproducing_error: reproducing,
        symmetric_error: symmetric,
    })
}

/// The printed symmetric dipole formula on ℤ next to the one-sided
/// corrected bipole, each paired against [`chain_probes`].
pub fn chain_closed_forms(x: i64, y: i64) -> Result<ChainClosedForms> {
    if !(0 <= y && y < x) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= y < x, got x={x}, y={y}"
        )));
    }
    let printed = GraphFunction::everywhere(move |v| {
        let n = v.as_int().expect("chain vertex").abs();
        (n.clamp(y, x) - y) as f64
    });
    let corrected = GraphFunction::everywhere(move |v| {
        let n = v.as_int().expect("chain vertex");
        (n.clamp(0, x) - n.clamp(0, y)) as f64
    });
    let g = WeightedGraph::zchain();
    let probes = chain_probes(x);
    Ok(ChainClosedForms {
        printed_check: probe_check(&g, &printed, x, y, &probes)?,
        corrected_check: probe_check(&g, &corrected, x, y, &probes)?,
        x,
        y,
        printed,
        corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::{dipole, BoundaryMode, FiniteSection};

    fn real(values: &[(i64, f64)]) -> BTreeMap<i64, Complex64> {
        values
            .iter()
            .map(|&(n, v)| (n, Complex64::new(v, 0.0)))
            .collect()
    }

    #[test]
    fn dirac_energy_two() {
        let u = real(&[(0, 1.0)]);
        assert_eq!(direct_energy(&u), 2.0);
        assert!((fourier_energy(&u) - 2.0).abs() < 1e-10);
        assert_eq!(fourier_energy(&BTreeMap::new()), 0.0);
        assert_eq!(fourier_energy(&real(&[(4, 0.0)])), 0.0);
    }

    #[test]
    fn truncated_ramp() {
        let u = real(&(0..=10).map(|n| (n, n.min(3) as f64)).collect::<Vec<_>>());
        // 3 unit steps up plus the drop from 3 to 0 after n = 10
        assert_eq!(direct_energy(&u), 12.0);
        assert!((fourier_energy(&u) - 12.0).abs() < 1e-8);
    }

    #[test]
    fn symbol_evaluates() {
        let s = PeriodicSymbol::new(real(&[(1, 1.0), (-1, 1.0)]));
        assert!((s.eval(0.3) - Complex64::new(2.0 * 0.3f64.cos(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn divergence_closed_form() {
        let eps: Vec<f64> = (0..8).map(|k| 0.5 / 2f64.powi(k)).collect();
        let r = monopole_symbol_divergence(1, &eps).unwrap();
        for (p, e) in r.partial_integrals.iter().zip(&r.exact) {
            assert!((p - e).abs() < 1e-8 * e.max(1.0), "{p} {e}");
        }
        for w in r.partial_integrals.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio > 1.9 && ratio < 2.05, "{ratio}");
        }
        assert!(r.fit_residual < 0.1);
        assert!((r.fit_constant - 0.5).abs() < 0.01);
        let r7 = monopole_symbol_divergence(7, &eps).unwrap();
        assert_eq!(r.partial_integrals, r7.partial_integrals);
        let at_pi = monopole_symbol_divergence(1, &[std::f64::consts::PI]).unwrap();
        assert_eq!(at_pi.partial_integrals[0], 0.0);
        assert!(monopole_symbol_divergence(1, &[0.0]).is_err());
    }

    #[test]
    fn closed_forms() {
        let c = chain_closed_forms(3, 0).unwrap();
        assert!(c.corrected_check.reproducing_error < 1e-12);
        assert!(c.printed_check.symmetric_error < 1e-12);
        assert!(c.printed_check.reproducing_error > 0.5);
        let c = chain_closed_forms(5, 2).unwrap();
        let z = WeightedGraph::zchain();
        let w = GraphFunction::restricted(
            (-10..=10)
                .map(|n| {
                    (
                        VertexId::Int(n),
                        c.corrected.get(&VertexId::Int(n)).unwrap(),
                    )
                })
                .collect(),
        );
        assert_eq!(z.energy(&w).unwrap(), 3.0);
        assert!(c.corrected_check.reproducing_error < 1e-12);
        assert!(chain_closed_forms(2, 2).is_err());
        assert!(chain_closed_forms(3, -1).is_err());
    }

    #[test]
    fn closed_form_matches_solver() {
        let z = WeightedGraph::zchain();
        let s = FiniteSection::interval(&z, -15, 15, BoundaryMode::Free).unwrap();
        for x in 1..6 {
            let v = dipole(&z, &VertexId::Int(x), &s).unwrap();
            let c = chain_closed_forms(x, 0).unwrap();
            for n in -15..=15 {
                let id = VertexId::Int(n);
                assert!((v.get(&id).unwrap() - c.corrected.get(&id).unwrap()).abs() < 1e-12);
            }
        }
    }
}
