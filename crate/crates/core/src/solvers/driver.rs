use std::fmt;
use std::time::Instant;

use super::{NsConfig, State, Stepper, StoppingNorm};
use crate::anderson::{AndersonConfig, AndersonWorkspace, GainTrace, InnerProduct};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Update norms above this declare the iteration divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Diverged => "diverged",
        })
    }
}

/// One row of the trace. Record 0 describes the initial state and carries
/// no update norms.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `‖u_k − u_{k−1}‖` in L2.
    pub update_l2: Option<f64>,
    /// `‖∇(u_k − u_{k−1})‖`.
    pub update_h1: Option<f64>,
    /// The update in the configured stopping norm.
    pub update: Option<f64>,
    pub div_l2: f64,
    pub theta: Option<f64>,
    /// Milliseconds since the solve started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: Status,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Stopping-norm updates, one per iteration.
    pub fn updates(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.update).collect()
    }

    pub fn update_l2(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.update_l2).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.theta).collect()
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace holds the initial record")
    }
}

/// Iterates `stepper` from `initial` until the velocity update falls below
/// `config.tol`, `config.max_iters` is reached, or the update blows past
/// [`DIVERGENCE_THRESHOLD`]. With `aa`, every step goes through Anderson
/// acceleration.
pub fn fixed_point_solve(
    initial: State,
    stepper: &mut dyn Stepper,
    config: &NsConfig,
    aa: Option<&AndersonConfig>,
) -> Result<(State, IterationTrace)> {
    let (s, t, _) = drive(initial, stepper, config, aa)?;
    Ok((s, t))
}

pub(crate) fn drive(
    initial: State,
    stepper: &mut dyn Stepper,
    config: &NsConfig,
    aa: Option<&AndersonConfig>,
) -> Result<(State, IterationTrace, Option<GainTrace>)> {
    config.validate()?;
    let start = Instant::now();
    let nu = initial.u.len();
    let mut workspace = match aa {
        Some(cfg) => {
            let weight = match cfg.inner_product {
                InnerProduct::Euclidean => None,
                InnerProduct::H => Some(h_weight(stepper, config.alpha)),
            };
            let mut ws = AndersonWorkspace::new(cfg.clone(), weight)?;
            ws.start(&initial.concat());
            Some(ws)
        }
        None => None,
    };

    let norms = stepper.discretization().norms();
    let mut records = vec![IterationRecord {
        iter: 0,
        update_l2: None,
        update_h1: None,
        update: None,
        div_l2: norms.divergence_l2(&initial.u),
        theta: None,
        wall_ms: elapsed_ms(start),
    }];
    let mut current = initial;
    let mut status = Status::MaxIters;

    for k in 1..=config.max_iters {
        let stepped = match workspace.as_mut() {
            Some(ws) => ws
                .step(|x| stepper.step(&State::split(x, nu)).map(|s| s.concat()))
                .map(|x| (State::split(&x, nu), Some(ws.last_theta()))),
            None => stepper.step(&current).map(|s| (s, None)),
        };
        let (next, theta) = match stepped {
            Ok(v) => v,
            // a linear system built from a runaway iterate lost its pivots
            Err(Error::Factorization { .. }) if k > 1 => {
                records.push(IterationRecord {
                    iter: k,
                    update_l2: Some(f64::NAN),
                    update_h1: Some(f64::NAN),
                    update: Some(f64::NAN),
                    div_l2: f64::NAN,
                    theta: None,
                    wall_ms: elapsed_ms(start),
                });
                status = Status::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let norms = stepper.discretization().norms();
        let du: Vec<f64> = next.u.iter().zip(&current.u).map(|(a, b)| a - b).collect();
        let l2 = norms.l2_velocity(&du);
        let h1 = norms.h1_seminorm(&du);
        let update = match config.stopping_norm {
            StoppingNorm::L2 => l2,
            StoppingNorm::H1 => h1,
            StoppingNorm::H => {
                let dp: Vec<f64> = next.p.iter().zip(&current.p).map(|(a, b)| a - b).collect();
                norms.h_norm(&du, &dp, config.alpha)?
            }
        };
        let finite = next.is_finite() && update.is_finite();
        records.push(IterationRecord {
            iter: k,
            update_l2: Some(l2),
            update_h1: Some(h1),
            update: Some(update),
            div_l2: if finite { norms.divergence_l2(&next.u) } else { f64::NAN },
            theta,
            wall_ms: elapsed_ms(start),
        });
        if !finite || update > DIVERGENCE_THRESHOLD {
            status = Status::Diverged;
            break;
        }
        current = next;
        if update <= config.tol {
            status = Status::Converged;
            break;
        }
    }
    let gains = workspace.map(|ws| ws.into_gains());
    Ok((current, IterationTrace { records, status }, gains))
}

fn h_weight(stepper: &dyn Stepper, alpha: f64) -> CsrMatrix {
    let d = stepper.discretization();
    let mut mp = d.pressure_mass().clone();
    mp.scale(alpha);
    CsrMatrix::block_2x2(d.laplacian(), None, None, Some(&mp), d.pressure_dofs())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
