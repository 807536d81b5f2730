//! Right-hand side of the master equation and the integrator steps, on raw
//! 4×4 arrays.
//!
//! Only the upper triangle of dρ/dt is computed; the lower triangle is
//! mirrored, so every state produced here is exactly Hermitian.

use num_complex::Complex64;

use super::Hamiltonian;
use crate::model::DecoherenceSpec;

pub(crate) type Rho = [[Complex64; 4]; 4];

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

const UPPER: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Rates of the Lindblad terms acting on |e⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipator {
    /// Total |e⟩ population decay rate 1/T1.
    pub decay: f64,
    /// Branching of that decay into |0⟩, |1⟩, |aux⟩.
    pub branching: [f64; 3],
    /// Decay rate of every |e⟩–ground coherence, Γ/2 + γ_φ = 1/T2.
    pub coherence: f64,
}

impl Dissipator {
    pub fn new(dec: &DecoherenceSpec) -> Self {
        let decay = dec.decay_rate();
        Dissipator {
            decay,
            branching: dec.branching,
            coherence: 0.5 * decay + dec.pure_dephasing_rate(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.decay == 0.0 && self.coherence == 0.0
    }
}

#[inline(always)]
fn mirror(out: &mut Rho) {
    for &(j, k) in UPPER.iter() {
        if j == k {
            out[j][j].im = 0.0;
        } else {
            out[k][j] = out[j][k].conj();
        }
    }
}

/// dρ/dt = −i[H, ρ] + L(ρ).
#[inline]
pub(crate) fn rhs(h: &Hamiltonian, diss: &Dissipator, r: &Rho) -> Rho {
    let mut out = [[ZERO; 4]; 4];
    let (c0, c1) = (h.c0, h.c1);
    let (c0s, c1s) = (c0.conj(), c1.conj());
    for &(j, k) in UPPER.iter() {
        let mut hr = r[j][k] * h.diag[j];
        hr += match j {
            0 => c0s * r[3][k],
            1 => c1s * r[3][k],
            3 => c0 * r[0][k] + c1 * r[1][k],
            _ => ZERO,
        };
        let mut rh = r[j][k] * h.diag[k];
        rh += match k {
            0 => r[j][3] * c0,
            1 => r[j][3] * c1,
            3 => r[j][0] * c0s + r[j][1] * c1s,
            _ => ZERO,
        };
        let comm = hr - rh;
        out[j][k] = Complex64::new(comm.im, -comm.re);
    }

    let pe = r[3][3].re;
    out[3][3].re -= diss.decay * pe;
    for g in 0..3 {
        out[g][g].re += diss.branching[g] * diss.decay * pe;
        out[g][3] -= r[g][3] * diss.coherence;
    }
    mirror(&mut out);
    out
}

#[inline(always)]
fn axpy(y: &Rho, a: f64, x: &Rho) -> Rho {
    let mut out = *y;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += x[i][j] * a;
        }
    }
    out
}

/// Classical RK4 step with H sampled at the start, midpoint and end.
#[inline]
pub(crate) fn rk4_step(
    r: &Rho,
    h_start: &Hamiltonian,
    h_mid: &Hamiltonian,
    h_end: &Hamiltonian,
    dt: f64,
    diss: &Dissipator,
) -> Rho {
    let k1 = rhs(h_start, diss, r);
    let k2 = rhs(h_mid, diss, &axpy(r, 0.5 * dt, &k1));
    let k3 = rhs(h_mid, diss, &axpy(r, 0.5 * dt, &k2));
    let k4 = rhs(h_end, diss, &axpy(r, dt, &k3));
    let mut out = *r;
    let w = dt / 6.0;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * w;
        }
    }
    out
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince trial step. Returns the fifth-order solution and the
/// scaled error norm (accept when ≤ 1).
pub(crate) fn dp45_trial<H>(r: &Rho, t: f64, dt: f64, hamiltonian: &H, diss: &Dissipator, rel_tol: f64) -> (Rho, f64)
where
    H: Fn(f64) -> Hamiltonian,
{
    let mut k = [[[ZERO; 4]; 4]; 7];
    for s in 0..7 {
        let mut y = *r;
        for (p, a) in DP_A[s].iter().enumerate().take(s) {
            if *a != 0.0 {
                y = axpy(&y, a * dt, &k[p]);
            }
        }
        k[s] = rhs(&hamiltonian(t + DP_C[s] * dt), diss, &y);
    }
    let mut y5 = *r;
    let mut err = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            let mut d5 = ZERO;
            let mut d4 = ZERO;
            for s in 0..7 {
                d5 += k[s][i][j] * DP_B5[s];
                d4 += k[s][i][j] * DP_B4[s];
            }
            y5[i][j] += d5 * dt;
            let scale = rel_tol * r[i][j].norm().max(y5[i][j].norm()).max(1e-3);
            let e = ((d5 - d4) * dt).norm() / scale;
            err = if e.is_nan() { f64::INFINITY } else { err.max(e) };
        }
    }
    (y5, err)
}

pub(crate) fn is_finite(r: &Rho) -> bool {
    r.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Exact drive-free propagation over `duration`.
pub(crate) fn free_propagate(r: &Rho, diag: &[f64; 4], diss: &Dissipator, duration: f64) -> Rho {
    let mut out = *r;
    let pe0 = r[3][3].re;
    let survive = (-diss.decay * duration).exp();
    out[3][3] = Complex64::new(pe0 * survive, 0.0);
    for g in 0..3 {
        out[g][g].re += diss.branching[g] * pe0 * (1.0 - survive);
    }
    let damp = (-diss.coherence * duration).exp();
    for &(j, k) in UPPER.iter() {
        if j == k {
            continue;
        }
        let mut f = Complex64::from_polar(1.0, -(diag[j] - diag[k]) * duration);
        if k == 3 {
            f *= damp;
        }
        out[j][k] = r[j][k] * f;
        out[k][j] = out[j][k].conj();
    }
    out
}
