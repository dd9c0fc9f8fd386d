//! Closed-form link metrics: amplitude headroom, SINR, rate bounds, power
//! consumption, energy efficiency and secrecy energy efficiency.
//!
//! All rates are in bits/s/Hz and powers in watts, so efficiencies are in
//! bits/J per Hz of bandwidth.

use alloc::vec::Vec;

use crate::channel::{ChannelState, ReceiverChannel, RoomScenario, SchemeKind};
use crate::math::{dot, log2, norm2_sq};
use crate::{Error, Result, PI_E};

/// Power model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    /// Circuit power `P_circuit` (W).
    pub p_circuit: f64,
    /// LED forward voltage `U_LEDs` (V).
    pub u_leds: f64,
    /// AC-resistance factor `ζ = R_AC / 3` (Ω).
    pub zeta: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            p_circuit: 8.0,
            u_leds: 3.3,
            zeta: 2.0,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        if self.p_circuit > 0.0 && self.u_leds > 0.0 && self.zeta > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain("power parameters must be positive"))
        }
    }
}

/// Information and artificial-noise precoders.
///
/// `an` holds the AN precoder columns: one column for the single-stream
/// design used without Eve CSI, `K` columns (one per Eve) with Eve CSI, and
/// no columns when no AN is transmitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    pub scheme: SchemeKind,
    /// `v` (length 1 for SISO, `N_T` for MISO), in amperes.
    pub info: Vec<f64>,
    pub an: Vec<Vec<f64>>,
    /// Set when the AN was constrained to Bob's null space.
    pub zero_forcing: bool,
}

impl PrecoderSolution {
    pub fn new(scheme: SchemeKind, info: Vec<f64>, an: Vec<Vec<f64>>) -> Self {
        Self {
            scheme,
            info,
            an,
            zero_forcing: false,
        }
    }

    /// All-zero precoders sized for `channel`.
    pub fn zeros(channel: &ChannelState, an_columns: usize) -> Self {
        Self::new(
            channel.scheme,
            alloc::vec![0.0; channel.bob.info.len()],
            (0..an_columns)
                .map(|_| alloc::vec![0.0; channel.bob.jam.len()])
                .collect(),
        )
    }

    /// `‖v‖² + tr(WWᵀ)`.
    pub fn modulation_power(&self) -> f64 {
        norm2_sq(&self.info) + self.an.iter().map(|w| norm2_sq(w)).sum::<f64>()
    }

    /// Largest per-luminaire AN amplitude `max_n Σ_k |[w_k]_n|`.
    pub fn an_peak(&self) -> f64 {
        let n = self.an.first().map_or(0, |c| c.len());
        (0..n)
            .map(|i| self.an.iter().map(|c| crate::math::abs(c[i])).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Checks the amplitude constraints against `delta` with tolerance `tol`.
    pub fn respects_amplitude(&self, delta: f64, tol: f64) -> bool {
        crate::math::norm_inf(&self.info) <= delta + tol && self.an_peak() <= delta + tol
    }
}

/// Which receiver a metric refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Bob,
    Eve(usize),
}

/// Modulation headroom `Δ_DC = min(I_DC − I_min, I_max − I_DC)`.
pub fn delta_dc(i_dc: f64, i_min: f64, i_max: f64) -> Result<f64> {
    if !(i_min <= i_dc && i_dc <= i_max) {
        return Err(Error::Domain("need I_min <= I_DC <= I_max"));
    }
    let lo = i_dc - i_min;
    let hi = i_max - i_dc;
    Ok(if lo < hi { lo } else { hi })
}

/// `(signal, interference)` powers at a receiver: `(h_Rᵀv)²` and `Σ_k (h̄_Rᵀw_k)²`.
pub fn received_powers(rx: &ReceiverChannel, sol: &PrecoderSolution) -> (f64, f64) {
    assert_eq!(
        rx.info.len(),
        sol.info.len(),
        "information precoder dimension mismatch"
    );
    let s = dot(&rx.info, &sol.info);
    let interference = sol
        .an
        .iter()
        .map(|w| {
            assert_eq!(rx.jam.len(), w.len(), "AN precoder dimension mismatch");
            let i = dot(&rx.jam, w);
            i * i
        })
        .sum();
    (s * s, interference)
}

/// Lower bound on an amplitude-constrained Gaussian channel with interference,
/// without clamping; may be negative only through rounding.
pub fn rate_lower_raw(signal: f64, interference: f64, noise: f64) -> f64 {
    0.5 * log2(
        (2.0 * (signal + interference) + PI_E * noise) / (PI_E * (interference / 3.0 + noise)),
    )
}

/// Upper bound on an eavesdropper's capacity, without clamping.
pub fn rate_upper_raw(signal: f64, interference: f64, noise: f64) -> f64 {
    0.5 * log2(PI_E * ((signal + interference) / 3.0 + noise) / (2.0 * interference + PI_E * noise))
}

pub fn sinr(channel: &ChannelState, sol: &PrecoderSolution, who: Receiver) -> f64 {
    let rx = channel.receiver(who);
    let (s, i) = received_powers(rx, sol);
    s / (i + rx.noise_norm)
}

/// Lower bound on Bob's capacity, clamped at zero.
pub fn capacity_lower_bob(channel: &ChannelState, sol: &PrecoderSolution) -> f64 {
    let (s, i) = received_powers(&channel.bob, sol);
    rate_lower_raw(s, i, channel.bob.noise_norm).max(0.0)
}

/// Upper bound on Eve `k`'s capacity.
pub fn capacity_upper_eve(channel: &ChannelState, sol: &PrecoderSolution, k: usize) -> f64 {
    let rx = &channel.eves[k];
    let (s, i) = received_powers(rx, sol);
    rate_upper_raw(s, i, rx.noise_norm)
}

/// Total consumed power `P_circuit + N_T·U·I_DC + ζ(‖v‖² + tr(WWᵀ))`.
pub fn total_power(scenario: &RoomScenario, sol: &PrecoderSolution) -> f64 {
    static_power(scenario) + scenario.power.zeta * sol.modulation_power()
}

/// Power drawn with zero modulation: `P_circuit + N_T·U·I_DC`.
pub fn static_power(scenario: &RoomScenario) -> f64 {
    scenario.power.p_circuit + scenario.n_tx() as f64 * scenario.power.u_leds * scenario.dc_bias
}

/// Energy efficiency of Bob's link.
pub fn ee_bob(scenario: &RoomScenario, channel: &ChannelState, sol: &PrecoderSolution) -> f64 {
    capacity_lower_bob(channel, sol) / total_power(scenario, sol)
}

/// Secrecy rate of the Bob–Eve `k` wiretap pair, clamped at zero.
pub fn secrecy_rate_k(channel: &ChannelState, sol: &PrecoderSolution, k: usize) -> f64 {
    secrecy_rate_raw(channel, sol, k).max(0.0)
}

/// Unclamped secrecy rate lower bound `C_B,l − C^k_E,u`.
pub fn secrecy_rate_raw(channel: &ChannelState, sol: &PrecoderSolution, k: usize) -> f64 {
    let (s, i) = received_powers(&channel.bob, sol);
    rate_lower_raw(s, i, channel.bob.noise_norm) - capacity_upper_eve(channel, sol, k)
}

/// Secrecy energy efficiency of the weakest wiretap pair.
pub fn min_see(
    scenario: &RoomScenario,
    channel: &ChannelState,
    sol: &PrecoderSolution,
) -> Result<f64> {
    if channel.eves.is_empty() {
        return Err(Error::Domain("at least one eavesdropper is required"));
    }
    let worst = (0..channel.eves.len())
        .map(|k| secrecy_rate_k(channel, sol, k))
        .fold(f64::INFINITY, f64::min);
    Ok(worst / total_power(scenario, sol))
}

/// Unclamped counterpart of [`min_see`].
pub fn min_see_raw(scenario: &RoomScenario, channel: &ChannelState, sol: &PrecoderSolution) -> f64 {
    let worst = (0..channel.eves.len())
        .map(|k| secrecy_rate_raw(channel, sol, k))
        .fold(f64::INFINITY, f64::min);
    worst / total_power(scenario, sol)
}

/// `10·log10(SINR_Bob) − 10·log10(SINR_Eve k)`, capped at ±100 dB.
pub fn sinr_gap_db(channel: &ChannelState, sol: &PrecoderSolution, k: usize) -> f64 {
    const CAP: f64 = 100.0;
    let b = sinr(channel, sol, Receiver::Bob);
    let e = sinr(channel, sol, Receiver::Eve(k));
    let gap = match (b > 0.0, e > 0.0) {
        (true, true) => 10.0 * crate::math::log10(b / e),
        (true, false) => CAP,
        (false, true) => -CAP,
        (false, false) => 0.0,
    };
    gap.clamp(-CAP, CAP)
}
