//! Access-link and sensing metrics: LoS channels, SINR and rate, transmit
//! beampattern gain, expected echo power, and the HAPS-combined echo power.
//!
//! Closed forms are expectations over unit-variance, zero-mean symbols.
//! The Monte-Carlo estimators draw symbols explicitly and serve as
//! independent checks on the closed forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{self, inner, norm_sqr, ArrayGeometry, Position3, SteeringVector};

/// LoS air-to-ground channel `sqrt(beta0) / d * a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
    /// Power gain at 1 m, linear.
    pub beta0: f64,
    pub distance: f64,
}

impl ChannelVector {
    pub fn from_steering(beta0: f64, distance: f64, steering: &SteeringVector) -> Self {
        let amp = beta0.sqrt() / distance;
        Self {
            entries: steering.entries.iter().map(|e| e * amp).collect(),
            beta0,
            distance,
        }
    }

    pub fn gain(&self) -> f64 {
        norm_sqr(&self.entries)
    }
}

pub fn channel_a2g(
    beta0: f64,
    uav: Position3,
    cu: Position3,
    geom: ArrayGeometry,
) -> ChannelVector {
    let d = geometry::distance(uav, cu);
    let a = geometry::steering_toward(geom, uav, cu);
    ChannelVector::from_steering(beta0, d, &a)
}

/// Transmit beamformers of one UAV: one per CU and one per sensing target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeamformerSet {
    pub comm: Vec<Vec<Complex64>>,
    pub sense: Vec<Vec<Complex64>>,
}

impl BeamformerSet {
    pub fn zeros(k: usize, j: usize, g: usize) -> Self {
        Self {
            comm: vec![vec![Complex64::new(0.0, 0.0); g]; k],
            sense: vec![vec![Complex64::new(0.0, 0.0); g]; j],
        }
    }

    /// Average transmit power `sum ||w_k||^2 + sum ||r_j||^2`.
    pub fn total_power(&self) -> f64 {
        self.comm
            .iter()
            .chain(&self.sense)
            .map(|v| norm_sqr(v))
            .sum()
    }

    pub fn sense_power(&self) -> f64 {
        self.sense.iter().map(|v| norm_sqr(v)).sum()
    }

    /// Multiply every beam by a common scalar.
    pub fn scaled(&self, by: Complex64) -> Self {
        let f = |v: &Vec<Complex64>| v.iter().map(|e| e * by).collect::<Vec<_>>();
        Self {
            comm: self.comm.iter().map(f).collect(),
            sense: self.sense.iter().map(f).collect(),
        }
    }
}

/// Per-target echo reflection amplitudes `epsilon_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoModel {
    pub reflection_amp: Vec<f64>,
}

impl EchoModel {
    /// Two-way amplitude `sqrt(beta0 * rcs) / d^2` per target.
    pub fn from_rcs(beta0: f64, rcs: &[f64], distances: &[f64]) -> Self {
        debug_assert_eq!(rcs.len(), distances.len());
        Self {
            reflection_amp: rcs
                .iter()
                .zip(distances)
                .map(|(&s, &d)| (beta0 * s).sqrt() / (d * d))
                .collect(),
        }
    }
}

/// Identifies one constraint of the optimization problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintId {
    /// Sensing share of the power budget, `sum p'_j <= upsilon P_max`.
    SensingBudget { uav: usize },
    /// Per-slot displacement bound `||q[n+1] - q[n]|| <= V_max dt`.
    Velocity { uav: usize },
    /// Horizontal position box.
    PositionBox { uav: usize },
    /// Total transmit power `<= P_max`.
    TotalPower { uav: usize },
    /// Beampattern gain toward a target, `zeta >= d^2 Gamma_th`.
    Beampattern { uav: usize, target: usize },
    /// SINR floor `SINR_k >= SINR_th`.
    SinrFloor { uav: usize, cu: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub id: ConstraintId,
    pub magnitude: f64,
}

/// Objective and constraint summary for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValues {
    /// Minimum CU SINR, linear.
    pub eta: f64,
    /// Expected echo power at the HAPS combiner output, W.
    pub omega: f64,
    /// `log2(1 + eta)`, bits/s/Hz.
    pub min_rate: f64,
    pub violations: Vec<Violation>,
    pub fitness: f64,
}

impl ObjectiveValues {
    pub fn total_violation(&self) -> f64 {
        self.violations.iter().map(|v| v.magnitude).sum()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.magnitude)
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// SINR of CU `k`, with the interference of all other beams summed
/// coherently inside the modulus.
pub fn sinr(k: usize, channels: &[ChannelVector], bf: &BeamformerSet, noise_power: f64) -> f64 {
    let h = &channels[k].entries;
    let signal = inner(h, &bf.comm[k]).norm_sqr();
    if signal == 0.0 {
        return 0.0;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, w) in bf.comm.iter().enumerate() {
        if i != k {
            acc += inner(h, w);
        }
    }
    for r in &bf.sense {
        acc += inner(h, r);
    }
    signal / (acc.norm_sqr() + noise_power)
}

/// SINR of CU `k` with independent streams, so interference powers add.
pub fn sinr_power_sum(
    k: usize,
    channels: &[ChannelVector],
    bf: &BeamformerSet,
    noise_power: f64,
) -> f64 {
    let h = &channels[k].entries;
    let signal = inner(h, &bf.comm[k]).norm_sqr();
    if signal == 0.0 {
        return 0.0;
    }
    let interference: f64 = bf
        .comm
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, w)| inner(h, w).norm_sqr())
        .chain(bf.sense.iter().map(|r| inner(h, r).norm_sqr()))
        .sum();
    signal / (interference + noise_power)
}

#[inline]
pub fn achievable_rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Transmit power density toward `a`:
/// `a^H (sum w w^H + sum r r^H) a = sum |a^H w|^2 + sum |a^H r|^2`.
pub fn beampattern_gain_toward(a: &[Complex64], bf: &BeamformerSet) -> f64 {
    bf.comm
        .iter()
        .chain(&bf.sense)
        .map(|v| inner(a, v).norm_sqr())
        .sum()
}

pub fn beampattern_gain(
    uav: Position3,
    target: Position3,
    geom: ArrayGeometry,
    bf: &BeamformerSet,
) -> f64 {
    let a = geometry::steering_toward(geom, uav, target);
    beampattern_gain_toward(&a.entries, bf)
}

/// `E||y_m||^2 = G^2 sum_j eps_j^2 ||r_j||^2`.
pub fn expected_echo_power(bf: &BeamformerSet, echo: &EchoModel, elements: usize) -> f64 {
    let g2 = (elements * elements) as f64;
    g2 * bf
        .sense
        .iter()
        .zip(&echo.reflection_amp)
        .map(|(r, eps)| eps * eps * norm_sqr(r))
        .sum::<f64>()
}

/// Everything Ω needs from one UAV.
#[derive(Debug, Clone, Copy)]
pub struct EchoRelay<'a> {
    pub bf: &'a BeamformerSet,
    pub echo: &'a EchoModel,
    /// HAPS receive phases `c_m`.
    pub haps_rx: &'a [Complex64],
    /// Backhaul amplitude `delta_m`.
    pub delta: f64,
    /// UAV array size G.
    pub elements: usize,
}

/// Expected HAPS combiner output power,
/// `E|| sum_m sum_s c*_ms G sum_m' c_m's delta_m' y_m' ||^2`.
///
/// Target symbols are independent across UAVs and targets, so products of
/// echoes from different sources vanish in expectation. The inter-UAV phase
/// sums `kappa_m' = sum_m sum_s c*_ms c_m's` are kept exactly as written.
pub fn omega(relays: &[EchoRelay<'_>]) -> f64 {
    relays
        .iter()
        .map(|target| {
            let kappa: Complex64 = relays.iter().map(|m| inner(m.haps_rx, target.haps_rx)).sum();
            let g = target.elements as f64;
            g * g
                * kappa.norm_sqr()
                * target.delta
                * target.delta
                * expected_echo_power(target.bf, target.echo, target.elements)
        })
        .sum()
}

/// How interfering streams are drawn in [`monte_carlo_sinr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SymbolModel {
    /// All interfering streams carry one common symbol, independent of the
    /// desired one. The estimate converges to [`sinr`].
    #[default]
    CorrelatedInterference,
    /// Every stream carries its own independent symbol. The estimate
    /// converges to [`sinr_power_sum`].
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub sinr: f64,
    /// Delta-method standard error of `sinr`.
    pub std_error: f64,
    pub signal_power: f64,
    pub interference_noise_power: f64,
    pub num_symbols: usize,
}

/// Unit-variance circularly-symmetric complex Gaussian.
#[inline]
fn cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Symbol-level SINR estimate for CU `k`.
///
/// Draws `z = h^H x + v` with `x = sum w_i s_i + sum r_j s'_j` and splits the
/// received samples into the desired term and the remainder.
pub fn monte_carlo_sinr(
    k: usize,
    channels: &[ChannelVector],
    bf: &BeamformerSet,
    noise_power: f64,
    num_symbols: usize,
    seed: u64,
    model: SymbolModel,
) -> MonteCarloEstimate {
    assert!(num_symbols >= 1, "need at least one symbol");
    let h = &channels[k].entries;
    let desired = inner(h, &bf.comm[k]);
    let others: Vec<Complex64> = bf
        .comm
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, w)| inner(h, w))
        .chain(bf.sense.iter().map(|r| inner(h, r)))
        .collect();
    let coherent: Complex64 = others.iter().sum();
    let noise_amp = noise_power.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..num_symbols {
        let s = cn01(&mut rng);
        let interference = match model {
            SymbolModel::CorrelatedInterference => coherent * cn01(&mut rng),
            SymbolModel::Independent => others.iter().map(|c| c * cn01(&mut rng)).sum(),
        };
        let v = cn01(&mut rng) * noise_amp;
        let wanted = desired * s;
        let z = wanted + interference + v;
        let a = wanted.norm_sqr();
        let b = (z - wanted).norm_sqr();
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    let n = num_symbols as f64;
    let (ma, mb) = (sa / n, sb / n);
    let var_a = (saa / n - ma * ma).max(0.0);
    let var_b = (sbb / n - mb * mb).max(0.0);
    let cov = sab / n - ma * mb;
    let ratio = if mb > 0.0 { ma / mb } else { 0.0 };
    let var_ratio = if mb > 0.0 {
        (var_a / (mb * mb) + ma * ma * var_b / mb.powi(4) - 2.0 * ma * cov / mb.powi(3)).max(0.0)
            / n
    } else {
        0.0
    };
    MonteCarloEstimate {
        sinr: ratio,
        std_error: var_ratio.sqrt(),
        signal_power: ma,
        interference_noise_power: mb,
        num_symbols,
    }
}

/// One UAV's view for the symbol-level echo relay simulation.
#[derive(Debug, Clone)]
pub struct RelayGeometry<'a> {
    pub bf: &'a BeamformerSet,
    pub echo: &'a EchoModel,
    /// Steering vectors from the UAV toward each of its targets.
    pub target_steering: &'a [SteeringVector],
    /// UAV transmit phases `b_m`.
    pub uav_tx: &'a [Complex64],
    /// HAPS receive phases `c_m`.
    pub haps_rx: &'a [Complex64],
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub omega: f64,
    pub std_error: f64,
    pub num_symbols: usize,
}

/// Symbol-level estimate of the HAPS combiner output power.
///
/// Each draw forms the echoes `y_m = sum_j eps_j r_j (a_j^H a_j) s'_j`,
/// relays them over `g_mgs = delta_m b*_mg c_ms` with the UAV phase
/// precoder `b_mg`, adds per-antenna HAPS noise of power `haps_noise_power`
/// per element, and applies the conjugate combiner `c*_ms`.
pub fn monte_carlo_omega(
    relays: &[RelayGeometry<'_>],
    haps_noise_power: f64,
    num_symbols: usize,
    seed: u64,
) -> OmegaEstimate {
    assert!(num_symbols >= 1, "need at least one symbol");
    let m = relays.len();
    let g = relays.first().map(|r| r.uav_tx.len()).unwrap_or(0);
    let s_len = relays.first().map(|r| r.haps_rx.len()).unwrap_or(0);

    // Deterministic relay gain per source UAV:
    // sum_m sum_s c*_ms (delta_m' c_m's sum_g b*_m'g b_m'g).
    let relay_gain: Vec<Complex64> = relays
        .iter()
        .map(|src| {
            let bb: f64 = src.uav_tx.iter().map(|b| (b.conj() * b).re).sum();
            let kappa: Complex64 = relays
                .iter()
                .map(|dst| {
                    dst.haps_rx
                        .iter()
                        .zip(src.haps_rx)
                        .map(|(cd, cs)| cd.conj() * cs)
                        .sum::<Complex64>()
                })
                .sum();
            kappa * src.delta * bb
        })
        .collect();
    // Combined HAPS noise per vector element: sum_s (sum_m c*_ms) Z_s.
    let noise_gain: f64 = (0..s_len)
        .map(|s| {
            relays
                .iter()
                .map(|r| r.haps_rx[s].conj())
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    let noise_amp = (haps_noise_power * noise_gain).sqrt();

    // Echo path per (uav, target): eps_j (a^H a) r_j.
    let echo_beams: Vec<Vec<Vec<Complex64>>> = relays
        .iter()
        .map(|r| {
            r.bf.sense
                .iter()
                .zip(&r.echo.reflection_amp)
                .zip(r.target_steering)
                .map(|((beam, eps), a)| {
                    let aa = a.inner(&a.entries);
                    beam.iter().map(|e| e * aa * *eps).collect()
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![Complex64::new(0.0, 0.0); g];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..num_symbols {
        y.iter_mut().for_each(|e| *e = Complex64::new(0.0, 0.0));
        for src in 0..m {
            for beam in &echo_beams[src] {
                let s = cn01(&mut rng) * relay_gain[src];
                for (acc, e) in y.iter_mut().zip(beam) {
                    *acc += e * s;
                }
            }
        }
        if noise_amp > 0.0 {
            for acc in y.iter_mut() {
                *acc += cn01(&mut rng) * noise_amp;
            }
        }
        let p = norm_sqr(&y);
        sum += p;
        sum_sq += p * p;
    }
    let n = num_symbols as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    OmegaEstimate {
        omega: mean,
        std_error: (var / n).sqrt(),
        num_symbols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{steering_toward, ArrayGeometry, Position3};
    use approx::assert_relative_eq;

    fn matched(p: f64, a: &SteeringVector) -> Vec<Complex64> {
        let s = (p / a.len() as f64).sqrt();
        a.entries.iter().map(|e| e * s).collect()
    }

    #[test]
    fn channel_modulus() {
        let g = ArrayGeometry::half_wave(4, 4);
        let uav = Position3::new(0.0, 0.0, 100.0);
        let h = channel_a2g(1e-3, uav, Position3::ground(0.0, 0.0), g);
        assert_eq!(h.distance, 100.0);
        for e in &h.entries {
            assert_relative_eq!(e.norm(), 3.162_277_660_168_379_5e-4, max_relative = 1e-12);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-18);
        }
        let h = channel_a2g(1e-3, uav, Position3::ground(70.0, -20.0), g);
        assert_relative_eq!(h.gain(), 16.0 * 1e-3 / (h.distance * h.distance), max_relative = 1e-12);
    }

    #[test]
    fn single_user_sinr_closed_form() {
        let g = ArrayGeometry::half_wave(4, 4);
        let uav = Position3::new(0.0, 0.0, 100.0);
        let cu = Position3::ground(0.0, 0.0);
        let p = 10f64.powf(3.7) / 1000.0;
        let h = channel_a2g(1e-3, uav, cu, g);
        let a = steering_toward(g, uav, cu);
        let bf = BeamformerSet {
            comm: vec![matched(p, &a)],
            sense: vec![],
        };
        let s = sinr(0, &[h], &bf, 1e-14);
        // p G beta0 / (d^2 sigma^2)
        assert_relative_eq!(s, 801_899_573.803_636, max_relative = 1e-9);
    }

    #[test]
    fn orthogonal_or_zero_beams_give_zero() {
        let g = ArrayGeometry::half_wave(2, 1);
        let uav = Position3::new(0.0, 0.0, 40.0);
        let h = channel_a2g(1e-3, uav, Position3::ground(0.0, 0.0), g);
        // broadside channel is [c, c]; [1, -1] is orthogonal to it.
        let bf = BeamformerSet {
            comm: vec![vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]],
            sense: vec![],
        };
        assert_eq!(sinr(0, std::slice::from_ref(&h), &bf, 1e-14), 0.0);
        let bf = BeamformerSet::zeros(1, 2, 2);
        assert_eq!(sinr(0, &[h], &bf, 1e-14), 0.0);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(achievable_rate(0.0), 0.0);
        assert_eq!(achievable_rate(1.0), 1.0);
        assert_eq!(achievable_rate(3.0), 2.0);
    }

    #[test]
    fn matched_beampattern() {
        let g = ArrayGeometry::half_wave(4, 4);
        let uav = Position3::new(10.0, 20.0, 40.0);
        let t = Position3::ground(300.0, -50.0);
        let a = steering_toward(g, uav, t);
        let bf = BeamformerSet {
            comm: vec![],
            sense: vec![matched(1.0, &a)],
        };
        assert_relative_eq!(beampattern_gain(uav, t, g, &bf), 16.0, max_relative = 1e-12);
        assert_eq!(beampattern_gain(uav, t, g, &BeamformerSet::zeros(2, 2, 16)), 0.0);
    }

    #[test]
    fn echo_power_examples() {
        let g = 16;
        let r = vec![Complex64::new(0.25, 0.0); 16]; // ||r||^2 = 1
        let bf = BeamformerSet {
            comm: vec![],
            sense: vec![r.clone()],
        };
        let echo = EchoModel {
            reflection_amp: vec![1.0],
        };
        assert_relative_eq!(expected_echo_power(&bf, &echo, g), 256.0, max_relative = 1e-12);
        let silent = EchoModel {
            reflection_amp: vec![0.0],
        };
        assert_eq!(expected_echo_power(&bf, &silent, g), 0.0);
        let doubled = BeamformerSet {
            comm: vec![],
            sense: vec![r.iter().map(|e| e * 2f64.sqrt()).collect()],
        };
        assert_relative_eq!(expected_echo_power(&doubled, &echo, g), 512.0, max_relative = 1e-12);
    }

    #[test]
    fn omega_single_uav_closed_form() {
        let r = vec![Complex64::new(0.25, 0.0); 16];
        let bf = BeamformerSet {
            comm: vec![],
            sense: vec![r],
        };
        let echo = EchoModel {
            reflection_amp: vec![1.0],
        };
        let c = vec![Complex64::new(1.0, 0.0); 400];
        let relay = EchoRelay {
            bf: &bf,
            echo: &echo,
            haps_rx: &c,
            delta: 1e-8,
            elements: 16,
        };
        assert_relative_eq!(omega(&[relay]), 1.048_576e-6, max_relative = 1e-9);

        let zero = BeamformerSet::zeros(0, 1, 16);
        let relay = EchoRelay { bf: &zero, ..relay };
        assert_eq!(omega(&[relay]), 0.0);
    }

    #[test]
    fn monte_carlo_zero_beams() {
        let g = ArrayGeometry::half_wave(4, 4);
        let h = channel_a2g(1e-3, Position3::new(0.0, 0.0, 40.0), Position3::ground(5.0, 5.0), g);
        let bf = BeamformerSet::zeros(1, 1, 16);
        let est = monte_carlo_sinr(0, &[h], &bf, 1e-14, 1000, 7, SymbolModel::default());
        assert_eq!(est.signal_power, 0.0);
        assert_eq!(est.sinr, 0.0);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let g = ArrayGeometry::half_wave(4, 4);
        let uav = Position3::new(0.0, 0.0, 40.0);
        let cus = [Position3::ground(100.0, 0.0), Position3::ground(-50.0, 80.0)];
        let hs: Vec<_> = cus.iter().map(|&c| channel_a2g(1e-3, uav, c, g)).collect();
        let bf = BeamformerSet {
            comm: cus
                .iter()
                .map(|&c| matched(1.0, &steering_toward(g, uav, c)))
                .collect(),
            sense: vec![],
        };
        let a = monte_carlo_sinr(0, &hs, &bf, 1e-14, 5000, 42, SymbolModel::Independent);
        let b = monte_carlo_sinr(0, &hs, &bf, 1e-14, 5000, 42, SymbolModel::Independent);
        assert_eq!(a.sinr.to_bits(), b.sinr.to_bits());
    }
}
