//! Linear transmission cost model.

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Switching {
    Direct,
    StoreAndForward,
    /// Packets of the given size are forwarded as soon as they arrive.
    Pipelined(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ports {
    OnePorted,
    KPorted(usize),
}

impl Ports {
    pub fn count(self) -> usize {
        match self {
            Ports::OnePorted => 1,
            Ports::KPorted(k) => k.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub alpha: f64,
    pub beta: f64,
    pub switching: Switching,
    pub ports: Ports,
}

impl CostModel {
    pub fn new(alpha: f64, beta: f64, switching: Switching, ports: Ports) -> Result<Self, SimError> {
        if !(alpha >= 0.0 && beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(SimError::Domain("alpha and beta must be finite and non-negative".into()));
        }
        if switching == Switching::Pipelined(0) {
            return Err(SimError::Domain("packet size must be at least 1".into()));
        }
        if ports == Ports::KPorted(0) {
            return Err(SimError::Domain("port count must be at least 1".into()));
        }
        Ok(CostModel { alpha, beta, switching, ports })
    }

    /// One-ported direct model with the given α and β.
    pub fn linear(alpha: f64, beta: f64) -> Self {
        CostModel { alpha, beta, switching: Switching::Direct, ports: Ports::OnePorted }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::linear(1.0, 1.0)
    }
}

/// Time to move `m` units over a path of `l ≥ 1` links.
///
/// Pipelined transfers send `⌈m/b⌉` packets (at least one); the first
/// packet crosses `l` links and every further packet adds one link time.
pub fn transfer_cost(model: &CostModel, m: u64, l: usize) -> f64 {
    let (a, b_) = (model.alpha, model.beta);
    let l = l.max(1) as f64;
    let mf = m as f64;
    match model.switching {
        Switching::Direct => a + b_ * mf,
        Switching::StoreAndForward => l * (a + b_ * mf),
        Switching::Pipelined(b) => {
            let b = b.max(1);
            let packets = m.div_ceil(b).max(1) as f64;
            let first = m.min(b) as f64;
            (l + packets - 1.0) * a + b_ * (l - 1.0) * first + b_ * mf
        }
    }
}

/// `round(√(m/(l−1)) · √(α/β))`, clamped to `[1, m]`.
pub fn optimal_packet_size(m: u64, l: usize, alpha: f64, beta: f64) -> Result<u64, SimError> {
    if l < 2 {
        return Err(SimError::Domain("optimal packet size needs a path of at least 2 links".into()));
    }
    if m < 1 || !(alpha > 0.0) || !(beta > 0.0) {
        return Err(SimError::Domain("need m >= 1 and positive alpha, beta".into()));
    }
    let b = ((m as f64 / (l - 1) as f64).sqrt() * (alpha / beta).sqrt()).round();
    Ok((b as u64).clamp(1, m))
}

/// `(l−1)α + 2√((l−1)·m·αβ) + βm`, the continuous optimum of pipelining.
pub fn pipelined_optimum(m: u64, l: usize, alpha: f64, beta: f64) -> f64 {
    let l1 = (l.max(1) - 1) as f64;
    let mf = m as f64;
    l1 * alpha + 2.0 * (l1 * mf * alpha * beta).sqrt() + beta * mf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_store_and_forward() {
        let mut c = CostModel::linear(10.0, 1.0);
        assert_eq!(transfer_cost(&c, 0, 7), 10.0);
        c.switching = Switching::StoreAndForward;
        assert_eq!(transfer_cost(&c, 100, 3), 330.0);
    }

    #[test]
    fn pipelined_example() {
        let b = optimal_packet_size(1000, 5, 10.0, 1.0).unwrap();
        assert_eq!(b, 50);
        let c = CostModel::new(10.0, 1.0, Switching::Pipelined(b), Ports::OnePorted).unwrap();
        assert_eq!(transfer_cost(&c, 1000, 5), 1440.0);
        assert_eq!(pipelined_optimum(1000, 5, 10.0, 1.0), 1440.0);
        assert_eq!(optimal_packet_size(1, 9, 3.0, 1.0).unwrap(), 1);
        assert!(optimal_packet_size(10, 1, 1.0, 1.0).is_err());
        assert_eq!(optimal_packet_size(400, 5, 2.0, 2.0).unwrap(), 10);
    }

    #[test]
    fn pipelined_degenerate_sizes() {
        let c = CostModel::new(10.0, 1.0, Switching::Pipelined(50), Ports::OnePorted).unwrap();
        assert_eq!(transfer_cost(&c, 0, 4), 40.0);
        assert_eq!(transfer_cost(&c, 10, 4), 40.0 + 30.0 + 10.0);
        assert!(CostModel::new(-1.0, 1.0, Switching::Direct, Ports::OnePorted).is_err());
    }
}
