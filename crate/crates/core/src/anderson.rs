//! Anderson acceleration of a fixed-point map `x ↦ g(x)`.
//!
//! With residuals `w_j = g(x_{j−1}) − x_{j−1}`, step `k` picks the affine
//! combination of the last `m_k + 1` residuals of least norm. In difference
//! form, with `F` holding consecutive residual differences, `E` iterate
//! differences and `G = E + F`,
//!
//! ```text
//! γ   = argmin ‖w_k − F γ‖
//! x_k = (1 − β)(x_{k−1} − E γ) + β (g(x_{k−1}) − G γ)
//! ```
//!
//! and the gain `θ_k = ‖w_k − F γ‖ / ‖w_k‖`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::solvers::{IterationTrace, NsConfig, State, Stepper};
use crate::sparse::{dot, solve_gram, CsrMatrix, DEFAULT_GRAM_REGULARIZATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerProduct {
    Euclidean,
    /// `‖∇u‖² + α‖p‖²` with the run's `α`.
    #[default]
    H,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Damping {
    Constant(f64),
    /// `β_k` for k = 2, 3, …; the last entry repeats.
    Schedule(Vec<f64>),
}

impl Damping {
    fn at(&self, k: usize) -> f64 {
        match self {
            Damping::Constant(b) => *b,
            Damping::Schedule(v) => v[(k.saturating_sub(2)).min(v.len() - 1)],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Damping::Constant(b) => std::slice::from_ref(b),
            Damping::Schedule(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AndersonConfig {
    pub depth: usize,
    pub damping: Damping,
    pub inner_product: InnerProduct,
    pub regularization: f64,
}

impl AndersonConfig {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            damping: Damping::Constant(1.0),
            inner_product: InnerProduct::H,
            regularization: DEFAULT_GRAM_REGULARIZATION,
        }
    }

    pub fn with_damping(mut self, beta: f64) -> Self {
        self.damping = Damping::Constant(beta);
        self
    }

    pub fn with_inner_product(mut self, ip: InnerProduct) -> Self {
        self.inner_product = ip;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let betas = self.damping.values();
        if betas.is_empty() {
            return Err(Error::config("empty damping schedule"));
        }
        if let Some(b) = betas.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
            return Err(Error::config(format!("damping must lie in (0, 1], got {b}")));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::config("regularization must be non-negative"));
        }
        Ok(())
    }
}

/// Per-iteration gain factors and Anderson coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainTrace {
    pub theta: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
}

/// History window of one accelerated iteration.
#[derive(Debug, Clone)]
pub struct AndersonWorkspace {
    config: AndersonConfig,
    weight: Option<CsrMatrix>,
    k: usize,
    current: Vec<f64>,
    prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    dx: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
    df: VecDeque<Vec<f64>>,
    wdf: VecDeque<Vec<f64>>,
    gram: VecDeque<VecDeque<f64>>,
    gains: GainTrace,
}

impl AndersonWorkspace {
    /// `weight` defines the inner product; `None` is Euclidean.
    pub fn new(config: AndersonConfig, weight: Option<CsrMatrix>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            weight,
            k: 1,
            current: Vec::new(),
            prev: None,
            dx: VecDeque::new(),
            dg: VecDeque::new(),
            df: VecDeque::new(),
            wdf: VecDeque::new(),
            gram: VecDeque::new(),
            gains: GainTrace::default(),
        })
    }

    /// Resets the history and sets `x_0`.
    pub fn start(&mut self, x0: &[f64]) {
        self.k = 1;
        self.current = x0.to_vec();
        self.prev = None;
        self.dx.clear();
        self.dg.clear();
        self.df.clear();
        self.wdf.clear();
        self.gram.clear();
        self.gains = GainTrace::default();
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Number of residual differences currently in the window (`m_k` after
    /// the next step is taken).
    pub fn window(&self) -> usize {
        self.df.len()
    }

    pub fn last_theta(&self) -> f64 {
        self.gains.theta.last().copied().unwrap_or(1.0)
    }

    pub fn gains(&self) -> &GainTrace {
        &self.gains
    }

    pub fn into_gains(self) -> GainTrace {
        self.gains
    }

    fn apply_weight(&self, v: &[f64]) -> Vec<f64> {
        match &self.weight {
            Some(w) => w.mul_vec(v),
            None => v.to_vec(),
        }
    }

    fn norm(&self, v: &[f64]) -> f64 {
        dot(v, &self.apply_weight(v)).max(0.0).sqrt()
    }

    /// Evaluates `g` at the current iterate and advances to `x_k`.
    pub fn step(&mut self, mut g_eval: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        let x_prev = std::mem::take(&mut self.current);
        let g = g_eval(&x_prev)?;
        if g.len() != x_prev.len() {
            return Err(Error::Dimension {
                expected: x_prev.len(),
                got: g.len(),
            });
        }
        let w: Vec<f64> = g.iter().zip(&x_prev).map(|(a, b)| a - b).collect();
        let k = self.k;
        self.k += 1;

        if let Some((px, pw, pg)) = self.prev.take() {
            if self.config.depth > 0 {
                let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
                self.push_column(sub(&x_prev, &px), sub(&w, &pw), sub(&g, &pg));
            }
        }

        let w_norm = self.norm(&w);
        if w_norm == 0.0 {
            self.gains.theta.push(0.0);
            self.gains.coefficients.push(vec![0.0; self.df.len()]);
            self.prev = Some((x_prev.clone(), w, g));
            self.current = x_prev;
            return Ok(self.current.clone());
        }

        let (gamma, theta) = if self.df.is_empty() {
            (Vec::new(), 1.0)
        } else {
            let ww = self.apply_weight(&w);
            let rhs: Vec<f64> = self.df.iter().map(|c| dot(c, &ww)).collect();
            let gram: Vec<Vec<f64>> = self.gram.iter().map(|row| row.iter().copied().collect()).collect();
            let gamma = solve_gram(&gram, &rhs, self.config.regularization);
            let mut r = w.clone();
            for (c, &gm) in self.df.iter().zip(&gamma) {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= gm * ci;
                }
            }
            let theta = self.norm(&r) / w_norm;
            if theta.is_finite() && theta <= 1.0 {
                (gamma, theta)
            } else {
                // the zero combination is always feasible
                (vec![0.0; gamma.len()], 1.0)
            }
        };

        // step 1 is the plain fixed-point step
        let beta = if k == 1 { 1.0 } else { self.config.damping.at(k) };
        let mut x = g.clone();
        for (c, &gm) in self.dg.iter().zip(&gamma) {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi -= gm * ci;
            }
        }
        if beta != 1.0 {
            let mut y = x_prev.clone();
            for (c, &gm) in self.dx.iter().zip(&gamma) {
                for (yi, ci) in y.iter_mut().zip(c) {
                    *yi -= gm * ci;
                }
            }
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = (1.0 - beta) * yi + beta * *xi;
            }
        }

        self.gains.theta.push(theta);
        self.gains.coefficients.push(gamma);
        self.prev = Some((x_prev, w, g));
        self.current = x.clone();
        Ok(x)
    }

    fn push_column(&mut self, dx: Vec<f64>, df: Vec<f64>, dg: Vec<f64>) {
        if self.df.len() == self.config.depth {
            self.dx.pop_front();
            self.df.pop_front();
            self.dg.pop_front();
            self.wdf.pop_front();
            self.gram.pop_front();
            for row in self.gram.iter_mut() {
                row.pop_front();
            }
        }
        let wdf = self.apply_weight(&df);
        let mut row: VecDeque<f64> = self.df.iter().map(|c| dot(c, &wdf)).collect();
        for (existing, &v) in self.gram.iter_mut().zip(&row) {
            existing.push_back(v);
        }
        row.push_back(dot(&df, &wdf));
        self.gram.push_back(row);
        self.dx.push_back(dx);
        self.df.push_back(df);
        self.dg.push_back(dg);
        self.wdf.push_back(wdf);
    }
}

/// One accelerated step on concatenated `(u, p)` vectors: returns `x_k` and
/// `θ_k`.
pub fn aa_step(
    workspace: &mut AndersonWorkspace,
    g_eval: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, f64)> {
    let x = workspace.step(g_eval)?;
    Ok((x, workspace.last_theta()))
}

/// The fixed-point driver with every step routed through Anderson
/// acceleration.
pub fn accelerated_solve(
    initial: State,
    stepper: &mut dyn Stepper,
    ns_config: &NsConfig,
    aa_config: &AndersonConfig,
) -> Result<(State, IterationTrace, GainTrace)> {
    let (s, t, g) = crate::solvers::driver_with_gains(initial, stepper, ns_config, Some(aa_config))?;
    Ok((s, t, g.unwrap_or_default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(depth: usize, beta: f64, g: impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], iters: usize) -> (Vec<Vec<f64>>, GainTrace) {
        let cfg = AndersonConfig::new(depth)
            .with_damping(beta)
            .with_inner_product(InnerProduct::Euclidean);
        let mut ws = AndersonWorkspace::new(cfg, None).unwrap();
        ws.start(x0);
        let mut xs = vec![x0.to_vec()];
        for _ in 0..iters {
            xs.push(ws.step(|x| Ok(g(x))).unwrap());
        }
        (xs, ws.into_gains())
    }

    #[test]
    fn depth_zero_is_damped_picard() {
        let g = |x: &[f64]| vec![0.5 * x[0] + 1.0];
        let (xs, gains) = run(0, 0.5, g, &[0.0], 4);
        // step 1 undamped, then x + β w
        assert_eq!(xs[1], vec![1.0]);
        let w = 0.5 * xs[1][0] + 1.0 - xs[1][0];
        assert!((xs[2][0] - (xs[1][0] + 0.5 * w)).abs() < 1e-15);
        assert!(gains.theta.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn depth_one_solves_affine_scalar_map() {
        let g = |x: &[f64]| vec![0.5 * x[0] + 1.0];
        let (xs, _) = run(1, 1.0, g, &[0.0], 3);
        assert!((xs[2][0] - 2.0).abs() <= 1e-14);
        let residual = (0.5 * xs[3][0] + 1.0 - xs[3][0]).abs();
        assert!(residual <= 1e-14);
    }

    #[test]
    fn window_is_capped() {
        let g = |x: &[f64]| x.iter().map(|v| 0.9 * v.cos()).collect();
        let cfg = AndersonConfig::new(2).with_inner_product(InnerProduct::Euclidean);
        let mut ws = AndersonWorkspace::new(cfg, None).unwrap();
        ws.start(&[0.3, 0.7, -0.2]);
        for _ in 0..6 {
            ws.step(|x| Ok(g(x))).unwrap();
            assert!(ws.window() <= 2);
        }
        assert_eq!(ws.window(), 2);
    }

    #[test]
    fn invalid_damping_rejected() {
        assert!(AndersonConfig::new(1).with_damping(0.0).validate().is_err());
        assert!(AndersonConfig::new(1).with_damping(1.5).validate().is_err());
    }

    #[test]
    fn zero_residual_signals_convergence() {
        let (xs, gains) = run(3, 1.0, |x: &[f64]| x.to_vec(), &[1.0, 2.0], 2);
        assert_eq!(xs[2], vec![1.0, 2.0]);
        assert_eq!(gains.theta, vec![0.0, 0.0]);
    }
}
