//! Monte Carlo sampling of measurement records and their time-ordered
//! Kraus products.
//!
//! Records are drawn from the ostensible (state-independent) measure:
//! i.i.d. Wiener increments or Bernoulli click bits. Each trajectory owns a
//! ChaCha stream keyed by its index, and partial sums are reduced in fixed
//! blocks, so ensembles do not depend on the number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instrument::check_state;
use crate::operator::{Operator, ZERO};
use crate::random::stream_rng;
use crate::superop::{channel_exp, lindblad_dissipator, SuperOperator};

/// Trajectories per reduction block.
const BLOCK: usize = 64;
/// Product norms outside `[1/RENORM, RENORM]` are folded into the log weight.
const RENORM: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Wiener,
    Poisson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub kind: RecordKind,
    pub n_steps: usize,
    pub n_channels: usize,
    pub dt: f64,
    pub kappa: f64,
    /// Step-major: step `t`, channel `c` at `t·n_channels + c`. Wiener
    /// increments have variance `dt`; Poisson entries are 0 or 1.
    pub increments: Vec<f64>,
}

impl MeasurementRecord {
    pub fn step(&self, t: usize) -> &[f64] {
        &self.increments[t * self.n_channels..(t + 1) * self.n_channels]
    }

    /// The record read backwards in time.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.increments = (0..self.n_steps).rev().flat_map(|t| self.step(t).to_vec()).collect();
        out
    }

    /// Per-channel sum of increments.
    pub fn totals(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_channels];
        for t in 0..self.n_steps {
            for (s, x) in sums.iter_mut().zip(self.step(t)) {
                *s += x;
            }
        }
        sums
    }
}

/// Draws a record from the ostensible measure.
pub fn sample_record<R: Rng + ?Sized>(
    kind: RecordKind,
    n_steps: usize,
    n_channels: usize,
    dt: f64,
    kappa: f64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    if !(dt > 0.0) || !(kappa > 0.0) {
        return Err(invalid("dt and kappa must be positive"));
    }
    if n_channels == 0 {
        return Err(invalid("a record needs at least one channel"));
    }
    let len = n_steps * n_channels;
    let increments = match kind {
        RecordKind::Wiener => {
            let sd = dt.sqrt();
            (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut *rng);
                    sd * z
                })
                .collect()
        }
        RecordKind::Poisson => {
            let p = kappa * dt;
            if p > 1.0 {
                return Err(invalid(format!("kappa*dt = {p} exceeds 1 for Poisson sampling")));
            }
            (0..len)
                .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect()
        }
    };
    Ok(MeasurementRecord {
        kind,
        n_steps,
        n_channels,
        dt,
        kappa,
        increments,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    /// Time-ordered product, divided by `e^{log_norm}` if it was rescaled.
    pub kraus: Operator,
    /// Logarithm of the factor removed from `kraus` to avoid overflow.
    pub log_norm: f64,
    /// Log of the instrument weight over the sampling probability.
    pub log_importance: f64,
    pub n_steps: usize,
}

impl TrajectoryResult {
    /// Weight of `kraus⊙kraus†` in an ostensible-measure average.
    pub fn log_ostensible_weight(&self) -> f64 {
        2.0 * self.log_norm + self.log_importance
    }

    /// The unscaled product.
    pub fn full_kraus(&self) -> Operator {
        self.kraus.scale_real(self.log_norm.exp())
    }
}

/// Step propagators shared by all trajectories of a run.
struct Stepper {
    kind: RecordKind,
    lindblads: Vec<Operator>,
    sqrt_kappa: f64,
    /// Diffusive: `−½Σ(L†L + L²)κdt`. Jump: `exp(−½ΣL†Lκdt)`.
    base: Operator,
    /// `ln(1/(1 − κdt))`, the importance factor of a silent Poisson channel.
    silent_log_weight: f64,
}

impl Stepper {
    fn new(ls: &[Operator], kind: RecordKind, kappa: f64, dt: f64) -> Result<Self> {
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
        let kdt = kappa * dt;
        let mut q = Operator::zeros(d);
        let base = match kind {
            RecordKind::Wiener => {
                for l in ls {
                    q += &(&(&l.dagger() * l) + &(l * l));
                }
                q.scale_real(-0.5 * kdt)
            }
            RecordKind::Poisson => {
                for l in ls {
                    q += &(&l.dagger() * l);
                }
                q.scale_real(-0.5 * kdt).exp()?
            }
        };
        let silent_log_weight = if kind == RecordKind::Poisson {
            if kdt >= 1.0 {
                return Err(invalid(format!("kappa*dt = {kdt} must be below 1 for jump runs")));
            }
            -(-kdt).ln_1p()
        } else {
            0.0
        };
        Ok(Self {
            kind,
            lindblads: ls.to_vec(),
            sqrt_kappa: kappa.sqrt(),
            base,
            silent_log_weight,
        })
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Left-multiplies the step factor for `incs` onto `acc`; returns the
    /// importance log-weight of the step.
    fn apply(&self, incs: &[f64], acc: &mut Operator) -> Result<f64> {
        match self.kind {
            RecordKind::Wiener => {
                let mut gen = self.base.clone();
                for (l, &dw) in self.lindblads.iter().zip(incs) {
                    gen += &l.scale_real(self.sqrt_kappa * dw);
                }
                *acc = &gen.exp()? * &*acc;
                Ok(0.0)
            }
            RecordKind::Poisson => {
                let mut step = self.base.clone();
                let mut log_w = 0.0;
                for (l, &bit) in self.lindblads.iter().zip(incs) {
                    if bit != 0.0 {
                        step = l * &step;
                    } else {
                        log_w += self.silent_log_weight;
                    }
                }
                *acc = &step * &*acc;
                Ok(log_w)
            }
        }
    }
}

fn check_record(ls: &[Operator], record: &MeasurementRecord) -> Result<()> {
    if record.n_channels != ls.len() {
        return Err(Error::DimensionMismatch {
            expected: ls.len(),
            found: record.n_channels,
        });
    }
    Ok(())
}

fn renormalize(kraus: &mut Operator, log_norm: &mut f64) {
    let n = kraus.frob_norm();
    if n > 0.0 && !(1.0 / RENORM..=RENORM).contains(&n) {
        *kraus *= 1.0 / n;
        *log_norm += n.ln();
    }
}

/// Time-ordered Kraus product of a record; later steps multiply on the left.
pub fn kraus_of_record(ls: &[Operator], record: &MeasurementRecord) -> Result<TrajectoryResult> {
    check_record(ls, record)?;
    let stepper = Stepper::new(ls, record.kind, record.kappa, record.dt)?;
    run_steps(&stepper, record, &[], |_, _| {})
}

fn run_steps(
    stepper: &Stepper,
    record: &MeasurementRecord,
    checkpoints: &[usize],
    mut on_checkpoint: impl FnMut(usize, &TrajectoryResult),
) -> Result<TrajectoryResult> {
    let mut res = TrajectoryResult {
        kraus: Operator::identity(stepper.dim()),
        log_norm: 0.0,
        log_importance: 0.0,
        n_steps: 0,
    };
    let mut next = 0;
    for t in 0..record.n_steps {
        res.log_importance += stepper.apply(record.step(t), &mut res.kraus)?;
        renormalize(&mut res.kraus, &mut res.log_norm);
        res.n_steps = t + 1;
        while next < checkpoints.len() && checkpoints[next] == t + 1 {
            on_checkpoint(next, &res);
            next += 1;
        }
    }
    if !res.kraus.is_finite() {
        return Err(invalid("trajectory product is not finite"));
    }
    Ok(res)
}

/// `tr(ρ₀ K†K)` times the ostensible weight.
pub fn physical_weight(rho0: &Operator, result: &TrajectoryResult) -> Result<f64> {
    let tr = check_state(rho0)?;
    let k = &result.kraus;
    let effect = &k.dagger() * k;
    let p = (&effect * rho0).trace().re / tr;
    Ok(p * result.log_ostensible_weight().exp())
}

/// `e^{𝒟κT}(ρ₀)`.
pub fn evolve_lindblad(rho0: &Operator, ls: &[Operator], kappa: f64, t: f64) -> Result<Operator> {
    check_state(rho0)?;
    let d = lindblad_dissipator(ls)?;
    Ok(channel_exp(&d, kappa * t)?.apply(rho0))
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub lindblads: Vec<Operator>,
    pub kind: RecordKind,
    pub kappa: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    /// `n_steps = round(T/dt)`.
    pub fn new(
        lindblads: Vec<Operator>,
        kind: RecordKind,
        kappa: f64,
        t: f64,
        dt: f64,
        n_trajectories: usize,
        seed: u64,
    ) -> Self {
        Self {
            lindblads,
            kind,
            kappa,
            dt,
            n_steps: (t / dt).round() as usize,
            n_trajectories,
            seed,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Record of trajectory `index`.
    pub fn record(&self, index: usize) -> Result<MeasurementRecord> {
        let mut rng = stream_rng(self.seed, index as u64);
        sample_record(
            self.kind,
            self.n_steps,
            self.lindblads.len(),
            self.dt,
            self.kappa,
            &mut rng,
        )
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleEstimate {
    pub time: f64,
    pub channel: SuperOperator,
    /// `sqrt(Σ_entries Var / N)`: the expected Frobenius error of `channel`.
    pub stderr: f64,
    /// Ensemble mean of [`physical_weight`] for the maximally mixed state.
    pub mean_weight: f64,
    pub weight_stderr: f64,
}

#[derive(Clone)]
struct Moments {
    sum: Vec<Complex64>,
    sum_sq: Vec<f64>,
    weight: f64,
    weight_sq: f64,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Self {
            sum: vec![ZERO; len],
            sum_sq: vec![0.0; len],
            weight: 0.0,
            weight_sq: 0.0,
        }
    }

    fn push(&mut self, res: &TrajectoryResult) {
        let k = &res.kraus;
        let w = res.log_ostensible_weight().exp();
        let sample = k.conj().kron(k).scale_real(w);
        for ((s, q), x) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(sample.data()) {
            *s += x;
            *q += x.norm_sqr();
        }
        let d = k.dim() as f64;
        let pw = (&k.dagger() * k).trace().re / d * w;
        self.weight += pw;
        self.weight_sq += pw * pw;
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.weight += other.weight;
        self.weight_sq += other.weight_sq;
    }

    fn estimate(&self, sys_dim: usize, n: usize, time: f64) -> EnsembleEstimate {
        let nf = n as f64;
        let mean: Vec<Complex64> = self.sum.iter().map(|s| s / nf).collect();
        let var: f64 = mean
            .iter()
            .zip(&self.sum_sq)
            .map(|(m, q)| (q / nf - m.norm_sqr()).max(0.0))
            .sum();
        let wmean = self.weight / nf;
        let wvar = (self.weight_sq / nf - wmean * wmean).max(0.0);
        let mat = Operator::from_vec(sys_dim * sys_dim, mean).expect("square");
        EnsembleEstimate {
            time,
            channel: SuperOperator::from_matrix(sys_dim, mat).expect("d² matrix"),
            stderr: (var / nf).sqrt(),
            mean_weight: wmean,
            weight_stderr: (wvar / nf).sqrt(),
        }
    }
}

/// Ensemble estimate of `e^{𝒟κT}` at the final time.
pub fn ensemble_channel(spec: &EnsembleSpec) -> Result<EnsembleEstimate> {
    let mut all = ensemble_checkpoints(spec, &[spec.n_steps])?;
    Ok(all.pop().expect("one checkpoint"))
}

/// Ensemble estimates after each step count in `checkpoints` (ascending,
/// each in `1..=n_steps`).
pub fn ensemble_checkpoints(spec: &EnsembleSpec, checkpoints: &[usize]) -> Result<Vec<EnsembleEstimate>> {
    if spec.n_trajectories == 0 {
        return Err(invalid("ensemble needs at least one trajectory"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.iter().any(|&c| c == 0 || c > spec.n_steps) {
        return Err(invalid("checkpoints must be strictly increasing within 1..=n_steps"));
    }
    let stepper = Stepper::new(&spec.lindblads, spec.kind, spec.kappa, spec.dt)?;
    let d = stepper.dim();
    let n_blocks = spec.n_trajectories.div_ceil(BLOCK);

    let blocks: Vec<Vec<Moments>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Moments::zeros(d.pow(4)); checkpoints.len()];
            let end = ((b + 1) * BLOCK).min(spec.n_trajectories);
            for i in b * BLOCK..end {
                let record = spec.record(i)?;
                run_steps(&stepper, &record, checkpoints, |c, res| acc[c].push(res))?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![Moments::zeros(d.pow(4)); checkpoints.len()];
    for block in &blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.merge(b);
        }
    }
    Ok(total
        .iter()
        .zip(checkpoints)
        .map(|(m, &c)| m.estimate(d, spec.n_trajectories, c as f64 * spec.dt))
        .collect())
}

/// One CSV row per checkpoint: distance to the exact channel with its
/// standard error and the mean physical weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub time: f64,
    pub distance: f64,
    pub stderr: f64,
    pub mean_weight: f64,
    pub weight_stderr: f64,
}

/// Compares each checkpoint estimate with `e^{𝒟κt}`.
pub fn checkpoint_rows(spec: &EnsembleSpec, estimates: &[EnsembleEstimate]) -> Result<Vec<CheckpointRow>> {
    let d = lindblad_dissipator(&spec.lindblads)?;
    estimates
        .iter()
        .map(|e| {
            let exact = channel_exp(&d, spec.kappa * e.time)?;
            Ok(CheckpointRow {
                time: e.time,
                distance: e.channel.frob_dist(&exact),
                stderr: e.stderr,
                mean_weight: e.mean_weight,
                weight_stderr: e.weight_stderr,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli::*;

    #[test]
    fn empty_record() {
        let r = sample_record(RecordKind::Wiener, 0, 1, 1e-3, 1.0, &mut stream_rng(1, 0)).unwrap();
        assert!(r.increments.is_empty());
        let res = kraus_of_record(&[sigma_z()], &r).unwrap();
        assert_eq!(res.kraus, Operator::identity(2));
    }

    #[test]
    fn wiener_variance() {
        let dt = 1e-3;
        let r = sample_record(RecordKind::Wiener, 100_000, 1, dt, 1.0, &mut stream_rng(3, 0)).unwrap();
        let n = r.increments.len() as f64;
        let mean = r.increments.iter().sum::<f64>() / n;
        let var = r.increments.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - dt).abs() / dt < 0.05);
    }

    #[test]
    fn poisson_rate() {
        let (kappa, dt) = (1.0, 1e-3);
        let r = sample_record(RecordKind::Poisson, 1_000_000, 1, dt, kappa, &mut stream_rng(4, 0)).unwrap();
        assert!(r.increments.iter().all(|&b| b == 0.0 || b == 1.0));
        let rate = r.increments.iter().sum::<f64>() / (r.n_steps as f64 * dt);
        assert!((rate - kappa).abs() / kappa < 0.1);
        assert!(sample_record(RecordKind::Poisson, 1, 1, 2.0, 1.0, &mut stream_rng(4, 0)).is_err());
    }

    #[test]
    fn zero_lindblad_gives_identity() {
        let r = sample_record(RecordKind::Wiener, 50, 1, 1e-2, 1.0, &mut stream_rng(5, 0)).unwrap();
        let res = kraus_of_record(&[Operator::zeros(2)], &r).unwrap();
        assert_eq!(res.kraus, Operator::identity(2));
    }

    #[test]
    fn commuting_closed_form() {
        let (kappa, dt, n) = (1.0, 1e-3, 1000);
        let l = sigma_z().scale_real(0.5);
        let r = sample_record(RecordKind::Wiener, n, 1, dt, kappa, &mut stream_rng(6, 0)).unwrap();
        let res = kraus_of_record(std::slice::from_ref(&l), &r).unwrap();
        let big_t = n as f64 * dt;
        let w = r.totals()[0];
        let closed = (&(&l * &l).scale_real(-kappa * big_t) + &l.scale_real(kappa.sqrt() * w))
            .exp()
            .unwrap();
        assert!(res.full_kraus().max_abs_diff(&closed) < 1e-10);
        assert!(res.kraus.is_hermitian(1e-10));
    }

    #[test]
    fn reversal_matters_for_noncommuting() {
        let ls = [sigma_x().scale_real(0.5), sigma_y().scale_real(0.5)];
        let r = sample_record(RecordKind::Wiener, 20, 2, 1e-2, 1.0, &mut stream_rng(9, 0)).unwrap();
        let fwd = kraus_of_record(&ls, &r).unwrap().kraus;
        let bwd = kraus_of_record(&ls, &r.reversed()).unwrap().kraus;
        assert!(fwd.frob_dist(&bwd) > 1e-6);
    }

    #[test]
    fn physical_weight_basics() {
        let id = TrajectoryResult {
            kraus: Operator::identity(2),
            log_norm: 0.0,
            log_importance: 0.0,
            n_steps: 0,
        };
        assert_eq!(physical_weight(&projector(0), &id).unwrap(), 1.0);
        let decay = TrajectoryResult {
            kraus: sigma_minus(),
            ..id
        };
        assert_eq!(physical_weight(&projector(0), &decay).unwrap(), 0.0);
    }

    #[test]
    fn evolve_decay() {
        let rho = evolve_lindblad(&projector(1), &[sigma_minus()], 1.0, 1.0).unwrap();
        assert!((rho[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-10);
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        let same = evolve_lindblad(&projector(1), &[sigma_minus()], 1.0, 0.0).unwrap();
        assert_eq!(same, projector(1));
    }

    #[test]
    fn zero_lindblad_ensemble_is_exact() {
        let spec = EnsembleSpec::new(vec![Operator::zeros(2)], RecordKind::Wiener, 1.0, 0.1, 1e-2, 100, 1);
        let est = ensemble_channel(&spec).unwrap();
        assert_eq!(est.channel, SuperOperator::identity(2));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn renormalization_is_logged() {
        let mut k = Operator::identity(2).scale_real(1e120);
        let mut log_norm = 0.0;
        renormalize(&mut k, &mut log_norm);
        assert!((k.frob_norm() - 1.0).abs() < 1e-15);
        assert!((log_norm - (120.0 * 10f64.ln() + 0.5 * 2f64.ln())).abs() < 1e-9);
        let mut small = Operator::identity(2);
        let mut ln = 0.0;
        renormalize(&mut small, &mut ln);
        assert_eq!(ln, 0.0);
    }
}
