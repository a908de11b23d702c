use crate::error::{Error, Result};
use crate::graph::DiscreteDistribution;

/// Additive smoothing applied to both arguments of [`kl_divergence`].
pub const KL_SMOOTHING: f64 = 1e-9;

/// `KL(p || q)` in nats.
///
/// Both vectors get `KL_SMOOTHING` added to every entry and are
/// renormalised; categories where the unsmoothed `p` is zero contribute
/// nothing. The result is clamped at zero.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.support_size() != q.support_size() {
        return Err(Error::Domain(format!(
            "support sizes differ: {} vs {}",
            p.support_size(),
            q.support_size()
        )));
    }
    let m = p.support_size() as f64;
    let p_total = p.probs().iter().sum::<f64>() + m * KL_SMOOTHING;
    let q_total = q.probs().iter().sum::<f64>() + m * KL_SMOOTHING;
    let mut kl = 0.0;
    for (&pc, &qc) in p.probs().iter().zip(q.probs()) {
        if pc == 0.0 {
            continue;
        }
        let ps = (pc + KL_SMOOTHING) / p_total;
        let qs = (qc + KL_SMOOTHING) / q_total;
        kl += ps * (ps / qs).ln();
    }
    Ok(kl.max(0.0))
}
