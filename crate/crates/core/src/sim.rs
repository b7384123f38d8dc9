//! Derivative-free realization of the observer and fixed-step RK4 simulation
//! of plant and observer together.
//!
//! The observer as designed is driven by `y1 = ẏ − A11·y − G1·u`, which
//! contains the derivative of the measurement. The substitution
//! `v = ẑ2 − L·y`, `w = ω − G·y` removes `ẏ` exactly:
//!
//! ```text
//! v̇ = (A22 − L·A12)·v + [(A22 − L·A12)·L − L·A11 + A21 + F·G]·y + (G2 − L·G1)·u + F·w
//! ẇ = −G·A12·v + (−G·A11 − G·A12·L)·y − G·G1·u
//! ```

use std::io::{Read, Write};

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::model::{StateSpaceSystem, TransformedSystem};
use crate::numerics::{self, Matrix};
use crate::synthesis::ObserverDesign;
use crate::testkit;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("invalid simulation settings: {0}")]
    InvalidConfig(String),
    #[error("integration diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },
    #[error("invalid input signal: {0}")]
    Input(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

/// State-space matrices of the observer in the `(v, w)` variables, together
/// with the maps that recover `ẑ2`, `ω` and `x̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverRealization {
    /// `A22 − L·A12`.
    pub av: Matrix,
    pub bvy: Matrix,
    /// `G2 − L·G1`.
    pub bvu: Matrix,
    /// `F`.
    pub fv: Matrix,
    /// `−G·A12`.
    pub awv: Matrix,
    pub awy: Matrix,
    /// `−G·G1`.
    pub awu: Matrix,
    pub l: Matrix,
    pub g: Matrix,
    pub t: Matrix,
    pub t_inv: Matrix,
}

impl ObserverRealization {
    pub fn order(&self) -> usize {
        self.av.nrows()
    }

    pub fn k(&self) -> usize {
        self.g.nrows()
    }

    pub fn p(&self) -> usize {
        self.l.ncols()
    }

    pub fn m(&self) -> usize {
        self.bvu.ncols()
    }

    /// `ẑ2 = v + L·y`.
    pub fn z2_hat(&self, v: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        v + &self.l * y
    }

    /// `ω = w + G·y`.
    pub fn omega(&self, w: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        w + &self.g * y
    }

    /// `x̂ = T·[y; ẑ2]`.
    pub fn x_hat(&self, y: &DVector<f64>, z2_hat: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(y.len() + z2_hat.len());
        z.rows_mut(0, y.len()).copy_from(y);
        z.rows_mut(y.len(), z2_hat.len()).copy_from(z2_hat);
        &self.t * z
    }

    /// `(v̇, ẇ)` for given `v`, `w`, `y`, `u`.
    pub fn derivative(
        &self,
        v: &DVector<f64>,
        w: &DVector<f64>,
        y: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let dv = &self.av * v + &self.bvy * y + &self.bvu * u + &self.fv * w;
        let dw = &self.awv * v + &self.awy * y + &self.awu * u;
        (dv, dw)
    }
}

/// Derivative-free realization of a design in the coordinates of `ts`.
pub fn realize(design: &ObserverDesign, ts: &TransformedSystem) -> Result<ObserverRealization, SimError> {
    let (p, r) = (ts.p(), ts.unmeasured());
    let k = design.k();
    if design.l.shape() != (r, p) || design.f.shape() != (r, k) || design.g.shape() != (k, p) {
        return Err(SimError::Dimension(format!(
            "design (L {}x{}, F {}x{}, G {}x{}) does not fit a system with n − p = {r}, p = {p}",
            design.l.nrows(),
            design.l.ncols(),
            design.f.nrows(),
            design.f.ncols(),
            design.g.nrows(),
            design.g.ncols()
        )));
    }
    let (l, f, g) = (&design.l, &design.f, &design.g);
    let av = &ts.a22 - l * &ts.a12;
    let ga12 = g * &ts.a12;
    Ok(ObserverRealization {
        bvy: &av * l - l * &ts.a11 + &ts.a21 + f * g,
        bvu: &ts.g2 - l * &ts.g1,
        fv: f.clone(),
        awv: -&ga12,
        awy: -(g * &ts.a11) - &ga12 * l,
        awu: -(g * &ts.g1),
        av,
        l: l.clone(),
        g: g.clone(),
        t: ts.t.clone(),
        t_inv: ts.t_inv.clone(),
    })
}

/// Input `u(t)`, evaluated exactly at RK4 stage times. Scalar amplitudes
/// apply to every input channel.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Zero,
    /// `amplitude` for `t ≥ t0`, zero before.
    Step { amplitude: f64, t0: f64 },
    /// `amplitude·sin(frequency·t)`, frequency in rad/s.
    Sine { amplitude: f64, frequency: f64 },
    /// `values[i]` on `[times[i], times[i+1])`; `values[0]` before `times[0]`.
    PiecewiseConstant {
        times: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
}

impl InputSignal {
    pub fn eval(&self, t: f64, m: usize) -> DVector<f64> {
        match self {
            InputSignal::Zero => DVector::zeros(m),
            InputSignal::Step { amplitude, t0 } => {
                DVector::from_element(m, if t >= *t0 { *amplitude } else { 0.0 })
            }
            InputSignal::Sine { amplitude, frequency } => {
                DVector::from_element(m, amplitude * (frequency * t).sin())
            }
            InputSignal::PiecewiseConstant { times, values } => {
                let i = times.partition_point(|&s| s <= t).saturating_sub(1);
                values[i].clone()
            }
        }
    }

    pub fn validate(&self, m: usize) -> Result<(), SimError> {
        match self {
            InputSignal::Zero => Ok(()),
            InputSignal::Step { amplitude, t0 } if amplitude.is_finite() && t0.is_finite() => Ok(()),
            InputSignal::Sine { amplitude, frequency } if amplitude.is_finite() && frequency.is_finite() => Ok(()),
            InputSignal::PiecewiseConstant { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(SimError::Input("need one value row per breakpoint".into()));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) || !times.iter().all(|t| t.is_finite()) {
                    return Err(SimError::Input("breakpoints must be finite and increasing".into()));
                }
                if let Some(v) = values.iter().find(|v| v.len() != m) {
                    return Err(SimError::Input(format!(
                        "input rows must have {m} entries, got {}",
                        v.len()
                    )));
                }
                if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
                    return Err(SimError::Input("input values must be finite".into()));
                }
                Ok(())
            }
            _ => Err(SimError::Input("signal parameters must be finite".into())),
        }
    }

    /// Reads `t,u_1,…,u_m` rows (with a header line).
    pub fn from_csv(reader: impl Read) -> Result<Self, SimError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| SimError::Input(format!("{s:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            if nums.len() < 2 {
                return Err(SimError::Input("each row needs a time and at least one value".into()));
            }
            times.push(nums[0]);
            values.push(DVector::from_column_slice(&nums[1..]));
        }
        let sig = InputSignal::PiecewiseConstant { times, values };
        let m = match &sig {
            InputSignal::PiecewiseConstant { values, .. } => values.first().map_or(0, |v| v.len()),
            _ => unreachable!(),
        };
        sig.validate(m)?;
        Ok(sig)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    pub dt: f64,
    pub tf: f64,
    pub input: InputSignal,
    pub x0: DVector<f64>,
    pub z2_hat0: DVector<f64>,
    pub omega0: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub x: Vec<DVector<f64>>,
    pub x_hat: Vec<DVector<f64>>,
    /// `e = ẑ2 − z2`.
    pub e: Vec<DVector<f64>>,
    pub omega: Vec<DVector<f64>>,
    pub dt: f64,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn e_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.e.iter().map(|e| e.norm())
    }

    pub fn omega_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.omega.iter().map(|w| w.norm())
    }

    /// `[e; ω]` at step `i`.
    pub fn error_state(&self, i: usize) -> DVector<f64> {
        let (r, k) = (self.e[i].len(), self.omega[i].len());
        let mut s = DVector::zeros(r + k);
        s.rows_mut(0, r).copy_from(&self.e[i]);
        s.rows_mut(r, k).copy_from(&self.omega[i]);
        s
    }

    /// Index of the sample closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// Slope of a least-squares fit of `ln‖[e; ω]‖` against time over the
    /// second half of the samples that stay above the round-off floor.
    /// `None` when too few samples qualify.
    pub fn fitted_decay_rate(&self) -> Option<f64> {
        let norms: Vec<f64> = (0..self.len()).map(|i| self.error_state(i).norm()).collect();
        let floor = norms.first().copied().unwrap_or(0.0) * 1e-12;
        let usable: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&norms)
            .filter(|(_, &v)| v > floor && v > 0.0)
            .map(|(&t, &v)| (t, v.ln()))
            .collect();
        let tail = &usable[usable.len() / 2..];
        if tail.len() < 3 {
            return None;
        }
        let nf = tail.len() as f64;
        let (mt, ml) = tail
            .iter()
            .fold((0.0, 0.0), |(a, b), (t, l)| (a + t / nf, b + l / nf));
        let (num, den) = tail.iter().fold((0.0, 0.0), |(a, b), (t, l)| {
            (a + (t - mt) * (l - ml), b + (t - mt) * (t - mt))
        });
        (den > 0.0).then(|| num / den)
    }

    /// Writes `t,x_1..x_n,xhat_1..xhat_n,e_norm,omega_norm`, 17 significant digits.
    pub fn write_csv(&self, out: impl Write) -> Result<(), SimError> {
        let n = self.x.first().map_or(0, |x| x.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=n).map(|i| format!("xhat_{i}")));
        header.push("e_norm".into());
        header.push("omega_norm".into());
        w.write_record(&header)?;
        let fmt = |v: f64| format!("{v:.16e}");
        for i in 0..self.len() {
            let mut row = vec![fmt(self.times[i])];
            row.extend(self.x[i].iter().map(|&v| fmt(v)));
            row.extend(self.x_hat[i].iter().map(|&v| fmt(v)));
            row.push(fmt(self.e[i].norm()));
            row.push(fmt(self.omega[i].norm()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

/// Matrix of the coupled autonomous part of plant and observer in `[x; v; w]`.
pub fn coupled_matrix(sys: &StateSpaceSystem, real: &ObserverRealization) -> Matrix {
    let (n, r, k) = (sys.n(), real.order(), real.k());
    let mut m = Matrix::zeros(n + r + k, n + r + k);
    m.view_mut((0, 0), (n, n)).copy_from(sys.a());
    m.view_mut((n, 0), (r, n)).copy_from(&(&real.bvy * sys.c()));
    m.view_mut((n, n), (r, r)).copy_from(&real.av);
    m.view_mut((n, n + r), (r, k)).copy_from(&real.fv);
    m.view_mut((n + r, 0), (k, n)).copy_from(&(&real.awy * sys.c()));
    m.view_mut((n + r, n), (k, r)).copy_from(&real.awv);
    m
}

/// `min(1e-3, 0.1 / max(1, ρ))` with `ρ` the spectral radius of the coupled system.
pub fn default_dt(sys: &StateSpaceSystem, real: &ObserverRealization) -> Result<f64, SimError> {
    let rho = numerics::eig(&coupled_matrix(sys, real))?.spectral_radius();
    Ok(1e-3f64.min(0.1 / rho.max(1.0)))
}

/// `10/|α|` for the slowest composite mode `α`, clamped to `[1, 1000]`.
pub fn default_tf(design: &ObserverDesign) -> f64 {
    (10.0 / design.slowest_rate().abs()).clamp(1.0, 1000.0)
}

/// Integrates plant and observer with classical RK4 on the grid
/// `t_i = i·dt`, `i = 0, …, round(tf/dt)`.
pub fn simulate(
    sys: &StateSpaceSystem,
    real: &ObserverRealization,
    settings: &SimulationSettings,
) -> Result<SimulationTrace, SimError> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let (r, k) = (real.order(), real.k());
    if real.p() != p || real.m() != m || real.t.nrows() != n || r + p != n {
        return Err(SimError::Dimension(format!(
            "observer realization (order {r}, p = {}, m = {}) does not match the plant (n = {n}, p = {p}, m = {m})",
            real.p(),
            real.m()
        )));
    }
    let SimulationSettings { dt, tf, ref input, ref x0, ref z2_hat0, ref omega0 } = *settings;
    if !(dt > 0.0 && dt.is_finite()) || !(tf >= dt && tf.is_finite()) {
        return Err(SimError::InvalidConfig(format!(
            "need dt > 0 and tf ≥ dt, got dt = {dt}, tf = {tf}"
        )));
    }
    for (name, v, len) in [("x0", x0, n), ("z2_hat0", z2_hat0, r), ("omega0", omega0, k)] {
        if v.len() != len {
            return Err(SimError::Dimension(format!(
                "{name} must have {len} entries, got {}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(SimError::InvalidConfig(format!("{name} must be finite")));
        }
    }
    input.validate(m)?;

    let steps = (tf / dt).round() as usize;
    let dim = n + r + k;
    let y0 = sys.c() * x0;
    let mut state = DVector::zeros(dim);
    state.rows_mut(0, n).copy_from(x0);
    state.rows_mut(n, r).copy_from(&(z2_hat0 - &real.l * &y0));
    state.rows_mut(n + r, k).copy_from(&(omega0 - &real.g * &y0));

    let rhs = |t: f64, s: &DVector<f64>| -> DVector<f64> {
        let x = s.rows(0, n).into_owned();
        let v = s.rows(n, r).into_owned();
        let w = s.rows(n + r, k).into_owned();
        let u = input.eval(t, m);
        let y = sys.c() * &x;
        let dx = sys.a() * &x + sys.b() * &u;
        let (dv, dw) = real.derivative(&v, &w, &y, &u);
        let mut d = DVector::zeros(dim);
        d.rows_mut(0, n).copy_from(&dx);
        d.rows_mut(n, r).copy_from(&dv);
        d.rows_mut(n + r, k).copy_from(&dw);
        d
    };

    let mut trace = SimulationTrace {
        times: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        x_hat: Vec::with_capacity(steps + 1),
        e: Vec::with_capacity(steps + 1),
        omega: Vec::with_capacity(steps + 1),
        dt,
    };
    let mut record = |t: f64, s: &DVector<f64>| {
        let x = s.rows(0, n).into_owned();
        let y = sys.c() * &x;
        let z2 = (&real.t_inv * &x).rows(p, r).into_owned();
        let z2_hat = real.z2_hat(&s.rows(n, r).into_owned(), &y);
        trace.times.push(t);
        trace.x_hat.push(real.x_hat(&y, &z2_hat));
        trace.e.push(z2_hat - z2);
        trace.omega.push(real.omega(&s.rows(n + r, k).into_owned(), &y));
        trace.x.push(x);
    };
    record(0.0, &state);
    // Kahan-compensated accumulation: over many small steps the rounding of
    // `state + increment` would otherwise dominate, and plant and observer
    // states round differently, so an exactly zero error would drift.
    let mut carry = DVector::zeros(dim);
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = rhs(t, &state);
        let k2 = rhs(t + 0.5 * dt, &(&state + &k1 * (0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(&state + &k2 * (0.5 * dt)));
        let k4 = rhs(t + dt, &(&state + &k3 * dt));
        let increment = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0) - &carry;
        let next = &state + &increment;
        carry = (&next - &state) - increment;
        state = next;
        let t_next = (i + 1) as f64 * dt;
        if state.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
            return Err(SimError::Divergence {
                step: i + 1,
                time: t_next,
            });
        }
        record(t_next, &state);
    }
    Ok(trace)
}

/// Largest deviation over the grid between the simulated `[e; ω]` and
/// `exp(M·t)·[e; ω](0)`, with `M` the composite error matrix.
pub fn error_dynamics_check(design: &ObserverDesign, ts: &TransformedSystem, trace: &SimulationTrace) -> f64 {
    let comp = design.composite(&ts.a22, &ts.a12);
    let s0 = trace.error_state(0);
    (0..trace.len())
        .map(|i| {
            let exact = testkit::expm_oracle(&comp, trace.times[i]) * &s0;
            (trace.error_state(i) - exact).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub steps: usize,
    pub dt: f64,
    pub tf: f64,
    pub initial_e_norm: f64,
    pub initial_omega_norm: f64,
    pub final_e_norm: f64,
    pub final_omega_norm: f64,
    pub max_state_error: f64,
    /// Least-squares decay rate of `‖[e; ω]‖`; compare with `slowest_mode`.
    pub fitted_decay_rate: Option<f64>,
    /// Largest real part of the composite spectrum.
    pub slowest_mode: f64,
}

pub fn summarize(design: &ObserverDesign, trace: &SimulationTrace) -> SimulationSummary {
    let last = trace.len() - 1;
    SimulationSummary {
        steps: last,
        dt: trace.dt,
        tf: trace.times[last],
        initial_e_norm: trace.e[0].norm(),
        initial_omega_norm: trace.omega[0].norm(),
        final_e_norm: trace.e[last].norm(),
        final_omega_norm: trace.omega[last].norm(),
        max_state_error: trace
            .x
            .iter()
            .zip(&trace.x_hat)
            .map(|(x, xh)| (x - xh).norm())
            .fold(0.0, f64::max),
        fitted_decay_rate: trace.fitted_decay_rate(),
        slowest_mode: design.slowest_rate(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{design, PhiChoice, SynthesisConfig};
    use crate::numerics::C64;
    use nalgebra::{dmatrix, dvector};

    fn demo() -> (StateSpaceSystem, TransformedSystem, ObserverDesign) {
        let sys = StateSpaceSystem::new(
            dmatrix![0.0, 1.0; 0.0, 1.0],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap();
        let cfg = SynthesisConfig {
            target_poles: Some(vec![C64::new(-2.0, 0.0)]),
            phi: PhiChoice::Matrix(dmatrix![-1.0]),
            ..Default::default()
        };
        let d = design(&sys, &cfg).unwrap();
        let ts = TransformedSystem::new(&sys, 1e-12).unwrap();
        (sys, ts, d.observer)
    }

    fn settings(input: InputSignal, tf: f64) -> SimulationSettings {
        SimulationSettings {
            dt: 1e-3,
            tf,
            input,
            x0: dvector![0.0, 1.0],
            z2_hat0: dvector![0.0],
            omega0: dvector![0.0],
        }
    }

    #[test]
    fn scalar_chain_realization() {
        let (_, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        assert!((real.av[(0, 0)] + 3.0).abs() < 1e-12);
        assert!((real.bvy[(0, 0)] + 10.0).abs() < 1e-12);
        assert!((real.bvu[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((real.fv[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((real.awv[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((real.awy[(0, 0)] + 4.0).abs() < 1e-12);
        assert_eq!(real.awu[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_chain_converges_and_matches_oracle() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let trace = simulate(&sys, &real, &settings(InputSignal::Zero, 5.0)).unwrap();
        let (e0, e5) = (trace.e[0].norm(), trace.e.last().unwrap().norm());
        assert!(e5 <= 5e-2 * e0, "{e5} vs {e0}");
        assert!(error_dynamics_check(&d, &ts, &trace) <= 1e-9);
        let rate = trace.fitted_decay_rate().unwrap();
        assert!((rate + 1.0).abs() < 0.05, "{rate}");
    }

    #[test]
    fn error_is_input_independent() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let a = simulate(&sys, &real, &settings(InputSignal::Zero, 3.0)).unwrap();
        let sine = InputSignal::Sine { amplitude: 1.0, frequency: 1.0 };
        let b = simulate(&sys, &real, &settings(sine, 3.0)).unwrap();
        let dev = a.e.iter().zip(&b.e).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev}");
    }

    #[test]
    fn zero_initial_error_stays_zero() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let mut s = settings(InputSignal::Step { amplitude: 1.0, t0: 0.5 }, 2.0);
        s.z2_hat0 = dvector![1.0];
        let trace = simulate(&sys, &real, &s).unwrap();
        assert!(trace.e_norms().chain(trace.omega_norms()).all(|v| v < 1e-9));
    }

    #[test]
    fn state_recovery_bound() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let trace = simulate(&sys, &real, &settings(InputSignal::Zero, 2.0)).unwrap();
        let tn = ts.t.norm();
        for i in 0..trace.len() {
            assert!((&trace.x_hat[i] - &trace.x[i]).norm() <= tn * trace.e[i].norm() + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let mut s = settings(InputSignal::Zero, 1.0);
        s.dt = 0.0;
        assert!(matches!(simulate(&sys, &real, &s), Err(SimError::InvalidConfig(_))));
        let mut s = settings(InputSignal::Zero, 1.0);
        s.x0 = dvector![1.0];
        assert!(matches!(simulate(&sys, &real, &s), Err(SimError::Dimension(_))));
    }

    #[test]
    fn divergence_reports_step() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let mut s = settings(InputSignal::Zero, 1e6);
        s.dt = 1.0;
        match simulate(&sys, &real, &s) {
            Err(SimError::Divergence { step, .. }) => assert!(step > 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn piecewise_input_from_csv() {
        let sig = InputSignal::from_csv("t,u_1\n0,1\n1.5,-2\n".as_bytes()).unwrap();
        assert_eq!(sig.eval(0.5, 1)[0], 1.0);
        assert_eq!(sig.eval(1.5, 1)[0], -2.0);
        assert_eq!(sig.eval(9.0, 1)[0], -2.0);
        assert!(InputSignal::from_csv("t,u\n1,0\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_header_and_precision() {
        let (sys, ts, d) = demo();
        let real = realize(&d, &ts).unwrap();
        let mut s = settings(InputSignal::Zero, 0.002);
        s.dt = 1e-3;
        let text = simulate(&sys, &real, &s).unwrap().to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x_1,x_2,xhat_1,xhat_2,e_norm,omega_norm");
        assert_eq!(lines.clone().count(), 3);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[2], "1.0000000000000000e0");
    }
}
