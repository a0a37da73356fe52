//! Closed-form performance calculus.
//!
//! Speed-up, efficiency, Amdahl's law, iso-efficiency, a Master-Theorem
//! solver and the analytic running-time models used to draw the usual
//! speed-up curves. All logarithms are base 2.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, PerfError> {
    Err(PerfError::Domain(msg.into()))
}

/// One summand `coeff · n^n_pow · p^p_pow · log2(n)^log_n_pow · log2(p)^log_p_pow`
/// of a custom non-parallelizable term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub n_pow: f64,
    pub p_pow: f64,
    pub log_n_pow: f64,
    pub log_p_pow: f64,
}

impl Term {
    fn eval(&self, n: f64, p: f64) -> f64 {
        self.coeff
            * n.powf(self.n_pow)
            * p.powf(self.p_pow)
            * n.log2().powf(self.log_n_pow)
            * p.log2().powf(self.log_p_pow)
    }
}

/// Shape of the parallel running time `C·(n/p + t(n,p))`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    NOverPPlus1,
    NOverPPlusLogP,
    NOverPPlusLogN,
    NOverPPlusP,
    Custom(Vec<Term>),
}

impl ModelKind {
    /// The four standard shapes, in table order.
    pub fn standard() -> [ModelKind; 4] {
        [ModelKind::NOverPPlus1, ModelKind::NOverPPlusLogP, ModelKind::NOverPPlusLogN, ModelKind::NOverPPlusP]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::NOverPPlus1 => "n/p+1",
            ModelKind::NOverPPlusLogP => "n/p+logp",
            ModelKind::NOverPPlusLogN => "n/p+logn",
            ModelKind::NOverPPlusP => "n/p+p",
            ModelKind::Custom(_) => "custom",
        }
    }

    /// The non-parallelizable term t(n,p).
    pub fn overhead(&self, n: f64, p: f64) -> f64 {
        match self {
            ModelKind::NOverPPlus1 => 1.0,
            ModelKind::NOverPPlusLogP => p.log2(),
            ModelKind::NOverPPlusLogN => n.log2(),
            ModelKind::NOverPPlusP => p,
            ModelKind::Custom(terms) => terms.iter().map(|t| t.eval(n, p)).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeModel {
    pub kind: ModelKind,
    pub leading_constant: f64,
}

impl TimeModel {
    pub fn new(kind: ModelKind, leading_constant: f64) -> Result<Self, PerfError> {
        if !(leading_constant > 0.0) || !leading_constant.is_finite() {
            return domain("leading constant must be positive");
        }
        Ok(TimeModel { kind, leading_constant })
    }
}

/// `T(n) = a·T(n/b) + n^d·log^e n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
}

impl Recurrence {
    pub fn new(a: f64, b: f64, d: f64, e: f64) -> Result<Self, PerfError> {
        if !(a >= 1.0) || !(b > 1.0) || !(d >= 0.0) || !(e >= 0.0) {
            return domain(format!("recurrence needs a>=1, b>1, d>=0, e>=0 (got a={a}, b={b}, d={d}, e={e})"));
        }
        Ok(Recurrence { a, b, d, e })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterCase {
    /// a < b^d: the per-level cost dominates.
    Root,
    /// a = b^d: every level costs the same.
    Balanced,
    /// a > b^d: the leaves dominate.
    Leaves,
}

impl MasterCase {
    pub fn id(self) -> u8 {
        match self {
            MasterCase::Root => 1,
            MasterCase::Balanced => 2,
            MasterCase::Leaves => 3,
        }
    }
}

/// Θ(n^exponent · log^log_power n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticClass {
    pub case: MasterCase,
    pub exponent: f64,
    pub log_power: f64,
}

impl AsymptoticClass {
    /// `n^exponent · log2(n)^log_power`, used to normalise measured values.
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(self.exponent) * n.log2().powf(self.log_power)
    }
}

pub fn amdahl(s: f64, p: u64) -> Result<f64, PerfError> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("sequential fraction {s} outside (0,1]"));
    }
    if p < 1 {
        return domain("p must be at least 1");
    }
    Ok(1.0 / (s + (1.0 - s) / p as f64))
}

/// Limit of [`amdahl`] for p → ∞.
pub fn amdahl_limit(s: f64) -> Result<f64, PerfError> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("sequential fraction {s} outside (0,1]"));
    }
    Ok(1.0 / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupReport {
    pub speedup: f64,
    pub efficiency: f64,
    /// Set when efficiency exceeds 1 (super-linear measurement).
    pub superlinear: bool,
}

pub fn speedup_efficiency(t_seq: f64, t_par: f64, p: u64) -> Result<SpeedupReport, PerfError> {
    if !(t_seq > 0.0) || !(t_par > 0.0) {
        return domain("times must be positive");
    }
    if p < 1 {
        return domain("p must be at least 1");
    }
    let speedup = t_seq / t_par;
    let efficiency = speedup / p as f64;
    Ok(SpeedupReport { speedup, efficiency, superlinear: efficiency > 1.0 })
}

pub fn model_time(model: &TimeModel, n: u64, p: u64) -> Result<f64, PerfError> {
    if n < 1 || p < 1 {
        return domain("n and p must be at least 1");
    }
    let (n, p) = (n as f64, p as f64);
    Ok(model.leading_constant * (n / p + model.kind.overhead(n, p)))
}

/// Problem size `n` keeping efficiency at `e` on `p` processors, against a
/// sequential algorithm with the same leading constant.
///
/// Closed forms for the constant, `log p` and `p` overheads; the `log n`
/// overhead (and custom models) are solved numerically.
pub fn iso_efficiency(model: &TimeModel, e: f64, p: u64) -> Result<f64, PerfError> {
    if !(e > 0.0 && e < 1.0) {
        return domain(format!("efficiency {e} outside (0,1)"));
    }
    if p < 1 {
        return domain("p must be at least 1");
    }
    let pf = p as f64;
    let ratio = e / (1.0 - e);
    match &model.kind {
        ModelKind::NOverPPlus1 => Ok(ratio * pf),
        ModelKind::NOverPPlusLogP => Ok(ratio * pf * pf.log2()),
        ModelKind::NOverPPlusP => Ok(ratio * pf * pf),
        ModelKind::NOverPPlusLogN => solve_n_over_log_n(ratio * pf),
        ModelKind::Custom(_) => {
            // efficiency n / (n + p·t(n,p)) = e  <=>  n - ratio·p·t(n,p) = 0
            let kind = model.kind.clone();
            let f = move |n: f64| n - ratio * pf * kind.overhead(n, pf);
            bisect_increasing(f, 2.0, 2f64.powi(60))
        }
    }
}

/// Solves `n / log2 n = target` on the branch where the left side increases.
fn solve_n_over_log_n(target: f64) -> Result<f64, PerfError> {
    // n/log2(n) is minimal at n = e and increasing beyond
    let lo = std::f64::consts::E;
    let min = lo / lo.log2();
    if target < min {
        return domain(format!("no solution of n/log2(n) = {target} (minimum is {min:.6})"));
    }
    bisect_increasing(|n| n / n.log2() - target, lo, 2f64.powi(60))
}

fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64, PerfError> {
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return domain("root not bracketed");
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

const MASTER_REL_TOL: f64 = 1e-12;

pub fn master_solve(r: &Recurrence) -> AsymptoticClass {
    let bd = r.b.powf(r.d);
    if (r.a - bd).abs() <= MASTER_REL_TOL * r.a.abs().max(bd.abs()) {
        AsymptoticClass { case: MasterCase::Balanced, exponent: r.d, log_power: r.e + 1.0 }
    } else if r.a < bd {
        AsymptoticClass { case: MasterCase::Root, exponent: r.d, log_power: r.e }
    } else {
        AsymptoticClass { case: MasterCase::Leaves, exponent: r.a.ln() / r.b.ln(), log_power: 0.0 }
    }
}

/// Exact unrolling of the recurrence for `n = b^k`, with `T(1) = base`.
pub fn recurrence_eval(r: &Recurrence, base: f64, n: u64) -> Result<f64, PerfError> {
    if r.b.fract() != 0.0 {
        return domain("recurrence evaluation needs an integral b");
    }
    let b = r.b as u64;
    let mut sizes = vec![];
    let mut m = n;
    while m > 1 {
        if !m.is_multiple_of(b) {
            return domain(format!("{n} is not a power of {b}"));
        }
        sizes.push(m);
        m /= b;
    }
    if m != 1 {
        return domain(format!("{n} is not a power of {b}"));
    }
    let mut t = base;
    for &size in sizes.iter().rev() {
        let s = size as f64;
        t = r.a * t + s.powf(r.d) * s.log2().powf(r.e);
    }
    Ok(t)
}

/// `Σ_{i=0}^{n} q^i`.
pub fn geometric_sum(q: f64, n: u32) -> f64 {
    if q == 1.0 {
        return (n + 1) as f64;
    }
    (q.powi(n as i32 + 1) - 1.0) / (q - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn amdahl_values() {
        assert!(close(amdahl(0.1, 10).unwrap(), 1.0 / 0.19, 1e-12));
        assert_eq!(amdahl(1.0, 1000).unwrap(), 1.0);
        assert_eq!(amdahl_limit(0.1).unwrap(), 10.0);
        assert!(close(amdahl(0.1, 1_000_000_000).unwrap(), 10.0, 1e-6));
        // cross-check against the simulated split sT + (1-s)T/p
        let (s, p, total) = (0.1, 10u64, 1000.0);
        let t_par = s * total + (1.0 - s) * total / p as f64;
        assert!(close(amdahl(s, p).unwrap(), total / t_par, 1e-12));
    }

    #[test]
    fn amdahl_rejects_bad_input() {
        assert!(amdahl(0.0, 4).is_err());
        assert!(amdahl(1.5, 4).is_err());
        assert!(amdahl(0.5, 0).is_err());
    }

    #[test]
    fn speedup_examples() {
        let r = speedup_efficiency(100.0, 25.0, 4).unwrap();
        assert_eq!((r.speedup, r.efficiency), (4.0, 1.0));
        let r = speedup_efficiency(100.0, 50.0, 4).unwrap();
        assert_eq!((r.speedup, r.efficiency), (2.0, 0.5));
        let r = speedup_efficiency(33.0, 6.0, 8).unwrap();
        assert_eq!((r.speedup, r.efficiency), (5.5, 0.6875));
        assert!(!r.superlinear);
        assert!(speedup_efficiency(100.0, 10.0, 4).unwrap().superlinear);
        assert!(speedup_efficiency(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn model_time_examples() {
        let m = TimeModel::new(ModelKind::NOverPPlus1, 1.0).unwrap();
        assert_eq!(model_time(&m, 128, 1).unwrap(), 129.0);
        let m = TimeModel::new(ModelKind::NOverPPlusLogP, 1.0).unwrap();
        assert_eq!(model_time(&m, 1024, 8).unwrap(), 131.0);
        let m = TimeModel::new(ModelKind::NOverPPlusP, 1.0).unwrap();
        let best = (1..=128u64)
            .min_by(|&x, &y| model_time(&m, 128, x).unwrap().total_cmp(&model_time(&m, 128, y).unwrap()))
            .unwrap();
        assert!(best == 11 || best == 12, "argmin {best}");
        assert!(TimeModel::new(ModelKind::NOverPPlusP, 0.0).is_err());
    }

    #[test]
    fn iso_efficiency_examples() {
        let k1 = TimeModel::new(ModelKind::NOverPPlus1, 1.0).unwrap();
        assert!(close(iso_efficiency(&k1, 0.9, 10).unwrap(), 90.0, 1e-12));
        let k4 = TimeModel::new(ModelKind::NOverPPlusP, 1.0).unwrap();
        assert!(close(iso_efficiency(&k4, 0.5, 4).unwrap(), 16.0, 1e-12));
        let k3 = TimeModel::new(ModelKind::NOverPPlusLogN, 1.0).unwrap();
        let n = iso_efficiency(&k3, 0.5, 4).unwrap();
        assert!(close(n, 16.0, 1e-9), "{n}");
        assert!(iso_efficiency(&k1, 1.0, 4).is_err());
        assert!(iso_efficiency(&k1, 0.0, 4).is_err());
    }

    #[test]
    fn iso_efficiency_custom_matches_closed_form() {
        let custom =
            ModelKind::Custom(vec![Term { coeff: 1.0, n_pow: 0.0, p_pow: 1.0, log_n_pow: 0.0, log_p_pow: 0.0 }]);
        let m = TimeModel::new(custom, 1.0).unwrap();
        let n = iso_efficiency(&m, 0.5, 4).unwrap();
        assert!(close(n, 16.0, 1e-9), "{n}");
    }

    #[test]
    fn master_examples() {
        let c = master_solve(&Recurrence::new(8.0, 2.0, 2.0, 0.0).unwrap());
        assert_eq!(c.case, MasterCase::Leaves);
        assert!(close(c.exponent, 3.0, 1e-12));
        let c = master_solve(&Recurrence::new(7.0, 2.0, 2.0, 0.0).unwrap());
        assert_eq!(c.case.id(), 3);
        assert!(close(c.exponent, 7f64.log2(), 1e-12));
        let c = master_solve(&Recurrence::new(1.0, 2.0, 0.0, 0.0).unwrap());
        assert_eq!(c.case, MasterCase::Balanced);
        assert_eq!((c.exponent, c.log_power), (0.0, 1.0));
        let c = master_solve(&Recurrence::new(1.0, 2.0, 1.0, 0.0).unwrap());
        assert_eq!(c.case, MasterCase::Root);
        assert!(Recurrence::new(0.5, 2.0, 0.0, 0.0).is_err());
        assert!(Recurrence::new(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn recurrence_eval_examples() {
        let r = Recurrence::new(2.0, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(recurrence_eval(&r, 0.0, 8).unwrap(), 24.0);
        let r = Recurrence::new(1.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(recurrence_eval(&r, 1.0, 16).unwrap(), 5.0);
        assert_eq!(recurrence_eval(&r, 3.5, 1).unwrap(), 3.5);
        assert!(recurrence_eval(&r, 1.0, 12).is_err());
        let frac = Recurrence::new(1.0, 2.5, 0.0, 0.0).unwrap();
        assert!(recurrence_eval(&frac, 1.0, 1).is_err());
    }

    #[test]
    fn geometric_sum_examples() {
        assert_eq!(geometric_sum(2.0, 3), 15.0);
        assert_eq!(geometric_sum(1.0, 4), 5.0);
        assert!(close(geometric_sum(0.5, 10), 2.0 - 2f64.powi(-10), 1e-12));
    }
}
