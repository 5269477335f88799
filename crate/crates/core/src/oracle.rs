//! Cross-checks of the closed forms and structured evaluators against dense
//! simulation of the protocols themselves.

use serde::Serialize;

use crate::analytic::{
    f_ae_ghz_dephasing, f_ae_ghz_depolarizing, f_ae_relay, f_ae_w_dephasing, f_ae_w_depolarizing, f_ae_w_loss,
    f_ae_w_loss_traced, gamma_sr_structured, omega_sr_structured, omega_sr_structured_lossy, p_success_w,
    ChannelMoments,
};
use crate::channels::{ChannelKind, QuantumChannel};
use crate::error::Result;
use crate::protocols::{relay_placements, run, w_post_selected, NetworkConfig, ProtocolKind, Resource, RunMode};
use crate::qcore::DensityMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest disagreement seen by one family of comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_delta: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            max_delta: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, delta: f64) {
        self.cases += 1;
        // NaN must register as a failure
        if delta.is_nan() || delta > self.max_delta {
            self.max_delta = delta;
        }
    }

    pub fn passed(&self) -> bool {
        self.max_delta <= self.tolerance
    }
}

fn entrywise(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Normalised S-R state and success probability of the W protocol.
pub fn dense_w(config: &NetworkConfig) -> Result<(DensityMatrix, f64)> {
    let rho = w_post_selected(config)?;
    let p = rho.trace();
    Ok((rho.normalized()?, p))
}

/// Normalised S-R state after the GHZ measurements and parity correction.
pub fn dense_ghz(config: &NetworkConfig) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = run(ProtocolKind::Ghz, config, RunMode::Exact, &mut rng)?;
    Ok(out.anonymous_entanglement.expect("the GHZ protocol never aborts"))
}

/// Runs every comparison over the grid `ns x qs` for both noise families.
/// `ns` entries must be at least 4.
pub fn oracle_suite(ns: &[usize], qs: &[f64]) -> Result<Vec<OracleCheck>> {
    let mut w_deph = OracleCheck::new("w_dephasing_closed_vs_dense", 1e-10);
    let mut w_depol = OracleCheck::new("w_depolarizing_closed_vs_dense", 1e-10);
    let mut ghz_deph = OracleCheck::new("ghz_dephasing_closed_vs_dense", 1e-10);
    let mut ghz_depol = OracleCheck::new("ghz_depolarizing_closed_vs_dense", 1e-10);
    let mut w_struct = OracleCheck::new("w_structured_vs_dense_entrywise", 1e-10);
    let mut ghz_struct = OracleCheck::new("ghz_structured_vs_dense_entrywise", 1e-10);
    let mut p_succ = OracleCheck::new("w_success_probability_closed_vs_dense", 1e-12);
    let mut loss_struct = OracleCheck::new("w_loss_structured_vs_dense_entrywise", 1e-10);
    let mut loss_traced = OracleCheck::new("w_loss_derived_closed_vs_dense", 1e-9);
    let mut loss_printed = OracleCheck::new("w_loss_printed_closed_vs_dense", 1e-9);
    let mut relay = OracleCheck::new("relay_closed_vs_dense", 1e-10);

    for &n in ns {
        for &q in qs {
            for ch in [QuantumChannel::dephasing(q)?, QuantumChannel::depolarizing(q)?] {
                let kind = ch.kind();
                let cfg = NetworkConfig::new(n, 1, 2)?.with_channel(ch.clone());
                let moments = ChannelMoments::from_channel(&ch);
                let (s, r) = (cfg.sender.qubit(), cfg.receiver.qubit());

                let (w, p) = dense_w(&cfg)?;
                let f = w.fidelity_with_pure(&Resource::PsiPlus.ket(s, r)?)?;
                match kind {
                    ChannelKind::Dephasing => w_deph.record((f - f_ae_w_dephasing(q)).abs()),
                    _ => w_depol.record((f - f_ae_w_depolarizing(q, n)).abs()),
                }
                p_succ.record((p - p_success_w(kind, q, n)?).abs());
                let (st, ps) = omega_sr_structured(&moments, n)?;
                w_struct.record(entrywise(&st, &w).max((ps - p).abs()));

                let g = dense_ghz(&cfg)?;
                let f = g.fidelity_with_pure(&Resource::PhiPlus.ket(s, r)?)?;
                match kind {
                    ChannelKind::Dephasing => ghz_deph.record((f - f_ae_ghz_dephasing(q, n)).abs()),
                    _ => ghz_depol.record((f - f_ae_ghz_depolarizing(q, n)).abs()),
                }
                let (gs, _) = gamma_sr_structured(&ch, n)?;
                ghz_struct.record(entrywise(&gs, &g));

                let lossy = cfg.clone().with_lost([n as u32])?;
                let (wl, pl) = dense_w(&lossy)?;
                let f = wl.fidelity_with_pure(&Resource::PsiPlus.ket(s, r)?)?;
                let (ls, lps) = omega_sr_structured_lossy(&moments, n, 1)?;
                loss_struct.record(entrywise(&ls, &wl).max((lps - pl).abs()));
                loss_traced.record((f - f_ae_w_loss_traced(kind, q, n)?).abs());
                loss_printed.record((f - f_ae_w_loss(kind, q, n)?).abs());

                let mut rng = ChaCha8Rng::seed_from_u64(0);
                for (sn, rn) in relay_placements(n) {
                    let cfg = NetworkConfig::new(n, sn, rn)?.with_channel(ch.clone());
                    let out = run(ProtocolKind::Relay, &cfg, RunMode::Exact, &mut rng)?;
                    let f = out.ae_fidelity.unwrap_or(f64::NAN);
                    relay.record((f - f_ae_relay(kind, q, n, sn as usize, rn as usize)?).abs());
                }
            }
        }
    }
    Ok(vec![
        w_deph,
        w_depol,
        ghz_deph,
        ghz_depol,
        w_struct,
        ghz_struct,
        p_succ,
        loss_struct,
        loss_traced,
        loss_printed,
        relay,
    ])
}
