//! Scalar Dormand–Prince 5(4) integrator with step-size control.

use crate::error::{Error, Result};

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients (5th minus 4th order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub first_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_nodes: usize,
}

/// Accepted node of a scalar solution: position, value and slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub y: f64,
    pub dy: f64,
}

/// What the observer wants after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (`t_end > t0`).
///
/// Every value in `stops` inside `(t0, t_end)` becomes an accepted node.
/// `observer` sees each accepted node and may end the integration early.
pub fn integrate<R, O>(
    rhs: R,
    t0: f64,
    y0: f64,
    t_end: f64,
    stops: &[f64],
    ctl: &StepControl,
    mut observer: O,
) -> Result<Vec<Node>>
where
    R: Fn(f64, f64) -> f64,
    O: FnMut(&Node) -> Flow,
{
    debug_assert!(t_end > t0);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, y);
    let mut nodes = vec![Node { t, y, dy: k1 }];
    if observer(&nodes[0]) == Flow::Stop {
        return Ok(nodes);
    }
    let mut stop_iter = stops.iter().copied().filter(|&s| s > t0 && s < t_end).peekable();
    let mut h_next = ctl.first_step.min(t_end - t0);
    let mut err_prev: f64 = 1e-4;
    let span = t_end - t0;
    while t < t_end {
        let h = h_next;
        while matches!(stop_iter.peek(), Some(&s) if s <= t) {
            stop_iter.next();
        }
        let target = stop_iter.peek().copied().unwrap_or(t_end);
        let hit_target = t + h >= target || (target - (t + h)) < 1e-12 * span;
        let h_nominal = h;
        let h = if hit_target { target - t } else { h };
        if h < ctl.min_step && !hit_target {
            return Err(Error::Integration {
                at: t,
                reason: format!("step size {h:e} fell below the minimum {:e}", ctl.min_step),
            });
        }
        let k2 = rhs(t + C2 * h, y + h * A21 * k1);
        let k3 = rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = rhs(t + h, y_new);
        let err_abs = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = ctl.atol + ctl.rtol * y.abs().max(y_new.abs());
        let err = (err_abs / scale).abs();
        if !err.is_finite() || !y_new.is_finite() {
            if h <= ctl.min_step {
                return Err(Error::Integration {
                    at: t,
                    reason: "non-finite solution value".into(),
                });
            }
            h_next = h * MIN_FACTOR;
            continue;
        }
        if err <= 1.0 {
            t = if hit_target { target } else { t + h };
            y = y_new;
            k1 = k7;
            let node = Node { t, y, dy: k1 };
            nodes.push(node);
            if nodes.len() > ctl.max_nodes {
                return Err(Error::Integration {
                    at: t,
                    reason: format!("more than {} nodes required", ctl.max_nodes),
                });
            }
            if observer(&node) == Flow::Stop {
                break;
            }
            // PI controller
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            err_prev = err.max(1e-4);
            h_next = if hit_target {
                h_nominal.max(h * factor)
            } else {
                h * factor
            }
            .min(ctl.max_step);
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h_next = h * factor;
            if h_next < ctl.min_step {
                return Err(Error::Integration {
                    at: t,
                    reason: format!("step size {h_next:e} fell below the minimum {:e}", ctl.min_step),
                });
            }
        }
    }
    Ok(nodes)
}
