use crate::error::{Error, Result};

/// Second-order Raman reduction of the far-detuned Λ system:
/// Ω_eff = Ωg/(2Δ) and γ_eff = Ω²γ/(4Δ²).
pub fn raman_effective_params(omega: f64, g: f64, delta: f64, gamma: f64) -> Result<(f64, f64)> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let omega_eff = 0.5 * omega * g / delta;
    let gamma_eff = 0.25 * (omega * omega) / (delta * delta) * gamma;
    Ok((omega_eff, gamma_eff))
}

/// Eigenvalue of [[a, c], [c, b]] continuously connected to `a`.
fn dressed_level(a: f64, b: f64, c: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half_gap = 0.5 * (b - a);
    let root = (half_gap * half_gap + c * c).sqrt();
    if half_gap >= 0.0 {
        mid - root
    } else {
        mid + root
    }
}

/// Raman detuning δ that cancels the differential ac Stark shift between
/// |g1,0⟩ (dressed by the pump, ½Ω) and |g2,1⟩ (dressed by the cavity, g),
/// so the two dressed levels are degenerate.
pub fn stark_compensated_delta(omega: f64, g: f64, delta: f64) -> f64 {
    let pump_dressed = dressed_level(0.0, delta, 0.5 * omega);
    let mut d = 0.0;
    for _ in 0..100 {
        let cavity_shift = dressed_level(d, delta, g) - d;
        let next = pump_dressed - cavity_shift;
        if (next - d).abs() <= 1e-15 * (1.0 + d.abs()) {
            return next;
        }
        d = next;
    }
    d
}
