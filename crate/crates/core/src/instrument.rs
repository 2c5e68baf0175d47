//! Instruments as weighted families of Kraus operators.
//!
//! An atom `(w, K)` contributes the instrument element `w·K⊙K†`. The weight
//! carries the sampling measure (a Poisson probability or a quadrature
//! weight); the Kraus matrix stays smooth in `dt`.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operator::Operator;
use crate::quadrature::gaussian_rule;
use crate::superop::{kraus_sum, SuperOperator};

pub const DEFAULT_NODES: usize = 21;
pub const MIN_NODES: usize = 5;
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;
/// Largest `κ·dt` treated as weak.
pub const WEAK_REGIME: f64 = 0.1;
/// Dimension of each tensor-grid factor is `n_nodes`; more than three
/// Lindblad operators makes the grid impractical.
pub const MAX_GRID_LINDBLADS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentKind {
    Discrete,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeakKind {
    Jump,
    Diffusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub kraus: Operator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim: usize,
    kind: InstrumentKind,
    atoms: Vec<Atom>,
    warning: Option<String>,
}

/// Parameters of a weak instrument.
#[derive(Clone, Debug)]
pub struct WeakSpec {
    pub lindblads: Vec<Operator>,
    pub kappa: f64,
    pub dt: f64,
    pub kind: WeakKind,
    pub n_nodes: usize,
}

impl WeakSpec {
    pub fn new(lindblads: Vec<Operator>, kappa: f64, dt: f64, kind: WeakKind) -> Self {
        Self {
            lindblads,
            kappa,
            dt,
            kind,
            n_nodes: DEFAULT_NODES,
        }
    }

    pub fn build(&self) -> Result<Instrument> {
        match (self.kind, self.lindblads.as_slice()) {
            (WeakKind::Jump, ls) => jump_weak_multi(ls, self.kappa, self.dt),
            (WeakKind::Diffusive, [l]) => diffusive_weak(l, self.kappa, self.dt, self.n_nodes),
            (WeakKind::Diffusive, ls) => dmncos_weak(ls, self.kappa, self.dt, self.n_nodes),
        }
    }
}

impl Instrument {
    pub fn new(dim: usize, kind: InstrumentKind, atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.kraus.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.kraus.dim(),
                });
            }
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(invalid(format!("atom weight {} is not a nonnegative number", a.weight)));
            }
        }
        Ok(Self {
            dim,
            kind,
            atoms,
            warning: None,
        })
    }

    /// Single atom `(1, 1)`: the unit of convolution.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kind: InstrumentKind::Discrete,
            atoms: vec![Atom {
                weight: 1.0,
                kraus: Operator::identity(dim),
            }],
            warning: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> InstrumentKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Set when the builder ran outside the weak regime.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    fn with_regime_check(mut self, kappa: f64, dt: f64) -> Self {
        let kdt = kappa * dt;
        if kdt > WEAK_REGIME {
            let msg = format!("kappa*dt = {kdt} exceeds the weak regime bound {WEAK_REGIME}");
            warn!("{msg}");
            self.warning = Some(msg);
        }
        self
    }

    /// POVM effects `wᵢ Kᵢ†Kᵢ`.
    pub fn povm(&self) -> Vec<Operator> {
        self.atoms
            .iter()
            .map(|a| (&a.kraus.dagger() * &a.kraus).scale_real(a.weight))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstrumentJson::from(self)).expect("instrument serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: InstrumentJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| {
                Ok(Atom {
                    weight: a.weight,
                    kraus: Operator::from_parts(&a.kraus_re, &a.kraus_im)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instrument::new(raw.dim, raw.kind, atoms)
    }
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    weight: f64,
    kraus_re: Vec<Vec<f64>>,
    kraus_im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct InstrumentJson {
    dim: usize,
    kind: InstrumentKind,
    atoms: Vec<AtomJson>,
}

impl From<&Instrument> for InstrumentJson {
    fn from(inst: &Instrument) -> Self {
        Self {
            dim: inst.dim,
            kind: inst.kind,
            atoms: inst
                .atoms
                .iter()
                .map(|a| AtomJson {
                    weight: a.weight,
                    kraus_re: a.kraus.real_parts(),
                    kraus_im: a.kraus.imag_parts(),
                })
                .collect(),
        }
    }
}

fn check_rate(kappa: f64, dt: f64) -> Result<()> {
    if !(kappa > 0.0) || !(dt > 0.0) {
        return Err(invalid(format!("kappa and dt must be positive (got {kappa}, {dt})")));
    }
    Ok(())
}

fn common_dim(ls: &[Operator]) -> Result<usize> {
    let d = ls
        .first()
        .ok_or_else(|| invalid("at least one Lindblad operator is required"))?
        .dim();
    if let Some(bad) = ls.iter().find(|l| l.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    Ok(d)
}

/// Weak jump instrument: no-click `e^{−½L†Lκdt}` with weight 1 and click
/// `e^{−½L†Lκdt}·L` with weight `κdt`.
pub fn jump_weak(l: &Operator, kappa: f64, dt: f64) -> Result<Instrument> {
    jump_weak_multi(std::slice::from_ref(l), kappa, dt)
}

/// Jump instrument with one click channel per Lindblad operator.
pub fn jump_weak_multi(ls: &[Operator], kappa: f64, dt: f64) -> Result<Instrument> {
    check_rate(kappa, dt)?;
    let d = common_dim(ls)?;
    let kdt = kappa * dt;
    let mut q = Operator::zeros(d);
    for l in ls {
        q += &(&l.dagger() * l);
    }
    let no_click = q.scale_real(-0.5 * kdt).exp()?;
    let mut atoms = vec![Atom {
        weight: 1.0,
        kraus: no_click.clone(),
    }];
    for l in ls {
        atoms.push(Atom {
            weight: kdt,
            kraus: &no_click * l,
        });
    }
    Ok(Instrument::new(d, InstrumentKind::Discrete, atoms)?.with_regime_check(kappa, dt))
}

/// Weak diffusive instrument on `n_nodes` Gauss–Hermite nodes of `dW ~ N(0, dt)`,
/// with Kraus `exp(−½(L†L + L²)κdt + L√κ dW)`.
pub fn diffusive_weak(l: &Operator, kappa: f64, dt: f64, n_nodes: usize) -> Result<Instrument> {
    dmncos_weak(std::slice::from_ref(l), kappa, dt, n_nodes)
}

/// As [`diffusive_weak`], failing when the completeness defect exceeds `tol`.
pub fn diffusive_weak_with_tolerance(
    l: &Operator,
    kappa: f64,
    dt: f64,
    n_nodes: usize,
    tol: f64,
) -> Result<Instrument> {
    let inst = diffusive_weak(l, kappa, dt, n_nodes)?;
    let achieved = completeness_defect(&inst);
    if achieved > tol {
        return Err(Error::InsufficientNodes {
            achieved,
            tolerance: tol,
        });
    }
    Ok(inst)
}

/// Simultaneous diffusive measurement of several observables on a tensor
/// grid of independent Wiener increments.
pub fn dmncos_weak(ls: &[Operator], kappa: f64, dt: f64, n_nodes: usize) -> Result<Instrument> {
    check_rate(kappa, dt)?;
    if ls.len() > MAX_GRID_LINDBLADS {
        return Err(Error::TooManyLindblads(ls.len()));
    }
    if n_nodes < MIN_NODES {
        return Err(invalid(format!("n_nodes must be at least {MIN_NODES} (got {n_nodes})")));
    }
    let d = common_dim(ls)?;
    let kdt = kappa * dt;
    let mut drift = Operator::zeros(d);
    for l in ls {
        drift += &(&(&l.dagger() * l) + &(l * l));
    }
    let drift = drift.scale_real(-0.5 * kdt);
    let (nodes, weights) = gaussian_rule(n_nodes, dt);
    let sqrt_kappa = kappa.sqrt();

    let m = ls.len();
    let total = n_nodes.pow(m as u32);
    let atoms = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut gen = drift.clone();
            let mut weight = 1.0;
            let mut rem = flat;
            for l in ls {
                let k = rem % n_nodes;
                rem /= n_nodes;
                gen += &l.scale_real(sqrt_kappa * nodes[k]);
                weight *= weights[k];
            }
            Ok(Atom {
                weight,
                kraus: gen.exp()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument::new(d, InstrumentKind::Quadrature, atoms)?.with_regime_check(kappa, dt))
}

/// Sequential convolution: `later` follows `earlier`, so each product Kraus
/// is `K_later · K_earlier`.
pub fn convolve(later: &Instrument, earlier: &Instrument) -> Result<Instrument> {
    convolve_capped(later, earlier, DEFAULT_ATOM_CAP)
}

pub fn convolve_capped(later: &Instrument, earlier: &Instrument, cap: usize) -> Result<Instrument> {
    if later.dim != earlier.dim {
        return Err(Error::DimensionMismatch {
            expected: later.dim,
            found: earlier.dim,
        });
    }
    let count = later.atoms.len() as u128 * earlier.atoms.len() as u128;
    if count > cap as u128 {
        return Err(Error::CapExceeded { atoms: count, cap });
    }
    let n0 = earlier.atoms.len();
    let atoms: Vec<Atom> = (0..count as usize)
        .into_par_iter()
        .map(|flat| {
            let (a1, a0) = (&later.atoms[flat / n0], &earlier.atoms[flat % n0]);
            Atom {
                weight: a1.weight * a0.weight,
                kraus: &a1.kraus * &a0.kraus,
            }
        })
        .collect();
    let kind = if later.kind == InstrumentKind::Discrete && earlier.kind == InstrumentKind::Discrete {
        InstrumentKind::Discrete
    } else {
        InstrumentKind::Quadrature
    };
    Ok(Instrument {
        dim: later.dim,
        kind,
        atoms,
        warning: later.warning.clone().or_else(|| earlier.warning.clone()),
    })
}

/// `n`-fold self-convolution; `repeat(I, 0)` is the identity instrument.
pub fn repeat(inst: &Instrument, n: u32) -> Result<Instrument> {
    repeat_capped(inst, n, DEFAULT_ATOM_CAP)
}

pub fn repeat_capped(inst: &Instrument, n: u32, cap: usize) -> Result<Instrument> {
    let atoms = (inst.atoms.len() as u128).checked_pow(n).unwrap_or(u128::MAX);
    if atoms > cap as u128 {
        return Err(Error::CapExceeded { atoms, cap });
    }
    let mut acc = Instrument::identity(inst.dim);
    for _ in 0..n {
        acc = convolve_capped(inst, &acc, cap)?;
    }
    Ok(acc)
}

/// `Σ wᵢ Kᵢ⊙Kᵢ†`.
pub fn total_operation(inst: &Instrument) -> SuperOperator {
    kraus_sum(inst.dim, inst.atoms.iter().map(|a| (a.weight, &a.kraus)))
}

/// `‖Σ wᵢ Kᵢ†Kᵢ − 1‖_F`.
pub fn completeness_defect(inst: &Instrument) -> f64 {
    let mut sum = Operator::zeros(inst.dim);
    for e in inst.povm() {
        sum += &e;
    }
    sum.frob_dist(&Operator::identity(inst.dim))
}

/// Accepts `ρ` when Hermitian, PSD to `1e-10` and of positive trace.
pub fn check_state(rho: &Operator) -> Result<f64> {
    if rho.hermiticity_defect() > 1e-10 {
        return Err(invalid("state is not Hermitian"));
    }
    let min = rho.herm_eigvals()?[0];
    if min < -1e-10 {
        return Err(invalid(format!("state is not positive (min eigenvalue {min:e})")));
    }
    let tr = rho.trace().re;
    if !(tr > 0.0) {
        return Err(invalid("state has nonpositive trace"));
    }
    Ok(tr)
}

/// Born probability `wᵢ tr(ρ Kᵢ†Kᵢ)/tr ρ` of atom `index`.
pub fn born_probability(rho: &Operator, inst: &Instrument, index: usize) -> Result<f64> {
    let tr = check_state(rho)?;
    let atom = inst
        .atoms
        .get(index)
        .ok_or_else(|| invalid(format!("atom index {index} out of range")))?;
    let k_rho = &atom.kraus * rho;
    let p = (&k_rho * &atom.kraus.dagger()).trace().re;
    Ok(atom.weight * p / tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli::*;
    use crate::operator::ZERO;
    use crate::quadrature::integrate;
    use crate::superop::{channel_exp, is_cp, lindblad_dissipator};

    #[test]
    fn jump_with_zero_lindblad() {
        let inst = jump_weak(&Operator::zeros(2), 1.0, 0.01).unwrap();
        assert_eq!(inst.atoms()[0].kraus, Operator::identity(2));
        assert_eq!(inst.atoms()[0].weight, 1.0);
        assert_eq!(inst.atoms()[1].kraus, Operator::zeros(2));
        assert_eq!(inst.atoms()[1].weight, 0.01);
        assert_eq!(completeness_defect(&inst), 0.0);
    }

    #[test]
    fn jump_defect_is_second_order_small() {
        let inst = jump_weak(&sigma_minus(), 1.0, 1e-3).unwrap();
        assert!(completeness_defect(&inst) <= 1e-5);
        assert!(inst.warning().is_none());
    }

    #[test]
    fn out_of_regime_is_tagged() {
        let inst = jump_weak(&sigma_minus(), 1.0, 0.5).unwrap();
        assert!(inst.warning().is_some());
    }

    #[test]
    fn diffusive_with_zero_lindblad() {
        let inst = diffusive_weak(&Operator::zeros(2), 1.0, 1e-3, 9).unwrap();
        assert_eq!(inst.len(), 9);
        assert!(inst.atoms().iter().all(|a| a.kraus == Operator::identity(2)));
        let s: f64 = inst.atoms().iter().map(|a| a.weight).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diffusive_defect_matches_dense_trapezoid() {
        // For L = σz/2 every Kraus is diagonal, so each POVM-sum entry is a
        // scalar Gaussian integral.
        let (kappa, dt) = (1.0, 1e-3);
        let l = sigma_z().scale_real(0.5);
        let inst = diffusive_weak(&l, kappa, dt, 21).unwrap();
        let defect = completeness_defect(&inst);
        assert!(defect <= 1e-6, "defect {defect}");

        // Diagonal entry s = ±1/2: K = exp(−½(2·s²)κdt + s√κ dW), K†K = exp(−2s²κdt + 2s√κ dW).
        let sd = dt.sqrt();
        let gauss = |x: f64| (-x * x / (2.0 * dt)).exp() / (2.0 * std::f64::consts::PI * dt).sqrt();
        let mut oracle = 0.0f64;
        for s in [0.5f64, -0.5] {
            let f = |x: f64| gauss(x) * (-2.0 * s * s * kappa * dt + 2.0 * s * kappa.sqrt() * x).exp();
            let entry = integrate(f, -12.0 * sd, 12.0 * sd, 10_001);
            oracle += (entry - 1.0).powi(2);
        }
        assert!((defect - oracle.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn insufficient_nodes_reports_achieved_defect() {
        let l = sigma_x();
        match diffusive_weak_with_tolerance(&l, 1.0, 0.05, 5, 1e-14) {
            Err(Error::InsufficientNodes { achieved, tolerance }) => {
                assert!(achieved > tolerance);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(diffusive_weak(&l, 1.0, 1e-3, 4).is_err());
    }

    #[test]
    fn too_many_lindblads() {
        let ls = vec![sigma_x(); 4];
        assert_eq!(dmncos_weak(&ls, 1.0, 1e-3, 5).unwrap_err(), Error::TooManyLindblads(4));
    }

    #[test]
    fn dmncos_zero_lindblads_give_identity() {
        let inst = dmncos_weak(&[Operator::zeros(2), Operator::zeros(2)], 1.0, 1e-3, 5).unwrap();
        assert_eq!(inst.len(), 25);
        assert!(inst.atoms().iter().all(|a| a.kraus == Operator::identity(2)));
    }

    #[test]
    fn convolution_orders_later_on_left() {
        let a = jump_weak(&sigma_minus(), 1.0, 0.01).unwrap();
        let b = jump_weak(&sigma_x(), 2.0, 0.01).unwrap();
        let c = convolve(&b, &a).unwrap();
        assert_eq!(c.len(), 4);
        for i in 0..2 {
            for j in 0..2 {
                let atom = &c.atoms()[2 * i + j];
                let kraus = &b.atoms()[i].kraus * &a.atoms()[j].kraus;
                assert_eq!(atom.kraus, kraus);
                assert_eq!(atom.weight, b.atoms()[i].weight * a.atoms()[j].weight);
            }
        }
        let unit = convolve(&a, &Instrument::identity(2)).unwrap();
        assert_eq!(unit.atoms(), a.atoms());
    }

    #[test]
    fn cap_is_enforced() {
        let a = jump_weak(&sigma_minus(), 1.0, 0.01).unwrap();
        assert!(matches!(
            repeat_capped(&a, 4, 8),
            Err(Error::CapExceeded { atoms: 16, cap: 8 })
        ));
        assert!(matches!(repeat(&a, 100), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn repeat_zero_and_three() {
        let a = jump_weak(&sigma_minus(), 1.0, 1e-2).unwrap();
        assert_eq!(repeat(&a, 0).unwrap(), Instrument::identity(2));
        let r3 = repeat(&a, 3).unwrap();
        assert_eq!(r3.len(), 8);
        let single = completeness_defect(&a);
        assert!(completeness_defect(&r3) <= 3.0 * single + 1e-4);
        let lhs = total_operation(&r3);
        let rhs = total_operation(&a).powi(3);
        assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn born_rule_for_decay() {
        let kdt = 1e-3;
        let inst = jump_weak(&sigma_minus(), 1.0, kdt).unwrap();
        assert_eq!(born_probability(&projector(0), &inst, 1).unwrap(), 0.0);
        let p = born_probability(&projector(1), &inst, 1).unwrap();
        assert!((p - kdt).abs() < 1e-15);
        let id = Instrument::identity(2);
        assert_eq!(born_probability(&projector(1), &id, 0).unwrap(), 1.0);
        let bad = Operator::diag_real(&[1.0, -0.5]);
        assert!(born_probability(&bad, &inst, 0).is_err());
    }

    #[test]
    fn total_operation_approximates_channel() {
        let kdt = 1e-3;
        let l = sigma_minus();
        let d = lindblad_dissipator(std::slice::from_ref(&l)).unwrap();
        let exact = channel_exp(&d, kdt).unwrap();
        let t = total_operation(&jump_weak(&l, 1.0, kdt).unwrap());
        assert!(t.frob_dist(&exact) < 10.0 * kdt * kdt);
        let id_plus = &SuperOperator::identity(2) + &d.scale_real(kdt);
        assert!(t.frob_dist(&id_plus) < 10.0 * kdt * kdt);
    }

    #[test]
    fn diffusive_total_is_cp() {
        let inst = diffusive_weak(&sigma_minus(), 1.0, 1e-3, 21).unwrap();
        assert!(is_cp(&total_operation(&inst), 1e-10).0);
    }

    #[test]
    fn json_roundtrip() {
        let inst = jump_weak(&sigma_y(), 1.0, 1e-2).unwrap();
        let back = Instrument::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        assert!(Instrument::from_json("{\"dim\":2}").is_err());
    }

    #[test]
    fn unitary_single_atom_is_tp() {
        let u = sigma_y();
        let inst = Instrument::new(2, InstrumentKind::Discrete, vec![Atom { weight: 1.0, kraus: u }]).unwrap();
        assert_eq!(completeness_defect(&inst), 0.0);
        assert_eq!(inst.atoms()[0].kraus[(0, 0)], ZERO);
    }
}
