//! Helpers shared by the integration tests. Everything here is written
//! against closed forms only, independent of the library's numerics.

#![allow(dead_code)]

use std::path::PathBuf;

/// Double-well reaction `2 (s − μ)(1 − s²)`.
pub fn double_well(mu: f64, s: f64) -> f64 {
    2.0 * (s - mu) * (1.0 - s * s)
}

/// `H(y) = (q y⁺)^{1/p}` for the p-Laplacian, `q = p / (p − 1)`.
pub fn h_power(p: f64, y: f64) -> f64 {
    let q = p / (p - 1.0);
    (q * y.max(0.0)).powf(1.0 / p)
}

/// Terminal value `z_c(1)` by classical RK4 with `m` fixed steps.
pub fn rk4_terminal(p: f64, mu: f64, c: f64, m: usize) -> f64 {
    let rhs = |r: f64, z: f64| double_well(mu, -r) - c * h_power(p, z);
    let h = 2.0 / m as f64;
    let mut z = 0.0;
    for i in 0..m {
        let r = -1.0 + i as f64 * h;
        let k1 = rhs(r, z);
        let k2 = rhs(r + 0.5 * h, z + 0.5 * h * k1);
        let k3 = rhs(r + 0.5 * h, z + 0.5 * h * k2);
        let k4 = rhs(r + h, z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    z
}

/// Bisection on the sign of the RK4 terminal value until the bracket is
/// narrower than `tol`.
pub fn rk4_critical_speed(p: f64, mu: f64, m: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while rk4_terminal(p, mu, hi, m) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rk4_terminal(p, mu, mid, m) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn oracle_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/oracles.json")
}

pub fn oracle(name: &str) -> f64 {
    let text = std::fs::read_to_string(oracle_path()).expect("oracles.json");
    let json: serde_json::Value = serde_json::from_str(&text).expect("valid oracles.json");
    json["constants"][name]["value"]
        .as_f64()
        .unwrap_or_else(|| panic!("oracle {name} missing"))
}
