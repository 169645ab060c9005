//! Synthetic series. Every generator returns inputs and targets of the
//! requested length; history before `t = 0` is zero where a formula reaches
//! into the past.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tasks::TimeSeries;

/// Half-width of the input distribution of the memory tasks.
pub const MEMORY_INPUT_RANGE: f64 = 0.8;

/// Upper bound of the NARMA input distribution.
pub const NARMA_INPUT_MAX: f64 = 0.5;
/// `|y|` above which a NARMA draw is rejected.
pub const NARMA_DIVERGENCE: f64 = 1e3;
pub const NARMA_ATTEMPTS: usize = 10;

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn uniform_inputs(steps: usize, lo: f64, hi: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..steps).map(|_| rng.uniform(lo, hi)).collect()
}

fn lagged(x: &[f64], t: usize, lag: usize) -> f64 {
    if t >= lag {
        x[t - lag]
    } else {
        0.0
    }
}

/// `y(t) = r^p sign(r)` with `r = x(t-d-1) x(t-d)`, `x ~ U(-0.8, 0.8)`.
pub fn ctxor(steps: usize, delay: usize, power: u32, rng: &mut RngStream) -> Result<TimeSeries> {
    if steps <= delay + 1 {
        return Err(Error::InvalidInput(format!(
            "ctXOR needs more than {} steps for delay {delay}",
            delay + 1
        )));
    }
    if power == 0 {
        return Err(Error::InvalidInput("ctXOR power must be >= 1".into()));
    }
    let x = uniform_inputs(steps, -MEMORY_INPUT_RANGE, MEMORY_INPUT_RANGE, rng);
    let y: Vec<f64> = (0..steps)
        .map(|t| {
            let r = lagged(&x, t, delay + 1) * lagged(&x, t, delay);
            r.powi(power as i32) * sign(r)
        })
        .collect();
    Ok(TimeSeries::univariate(&x, &y))
}

/// `y(t) = sin(π x(t-d))`, `x ~ U(-0.8, 0.8)`.
pub fn sinmem(steps: usize, delay: usize, rng: &mut RngStream) -> Result<TimeSeries> {
    if steps <= delay {
        return Err(Error::InvalidInput(format!(
            "SinMem needs more than {delay} steps"
        )));
    }
    let x = uniform_inputs(steps, -MEMORY_INPUT_RANGE, MEMORY_INPUT_RANGE, rng);
    let y: Vec<f64> = (0..steps)
        .map(|t| (std::f64::consts::PI * lagged(&x, t, delay)).sin())
        .collect();
    Ok(TimeSeries::univariate(&x, &y))
}

/// NARMA of order `d` driven by `x ~ U[0, 0.5]`; the model sees `x(t)` and
/// predicts `y(t)`. Diverging draws are replaced by fresh ones.
pub fn narma(steps: usize, order: usize, rng: &mut RngStream) -> Result<TimeSeries> {
    if steps <= order || order == 0 {
        return Err(Error::InvalidInput(format!(
            "NARMA needs order >= 1 and more than {order} steps"
        )));
    }
    for _ in 0..NARMA_ATTEMPTS {
        let x = uniform_inputs(steps, 0.0, NARMA_INPUT_MAX, rng);
        if let Some(y) = narma_recurrence(&x, order) {
            return Ok(TimeSeries::univariate(&x, &y));
        }
    }
    Err(Error::Generation(format!(
        "NARMA{order} diverged in {NARMA_ATTEMPTS} attempts"
    )))
}

/// `None` when `|y|` leaves [`NARMA_DIVERGENCE`].
pub fn narma_recurrence(x: &[f64], order: usize) -> Option<Vec<f64>> {
    let mut y = vec![0.0; x.len()];
    for t in 0..x.len() {
        let prev = lagged(&y, t, 1);
        let mut window = 0.0;
        for i in 1..=order {
            window += lagged(&y, t, i);
        }
        let v =
            0.3 * prev + 0.01 * prev * window + 1.5 * lagged(x, t, order) * lagged(x, t, 1) + 0.1;
        if !(v.abs() <= NARMA_DIVERGENCE) {
            return None;
        }
        y[t] = v;
    }
    Some(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lorenz96Params {
    pub dims: usize,
    pub forcing: f64,
    pub dt: f64,
    /// Integration steps discarded before recording.
    pub transient: usize,
    /// Entries start at `forcing + U(-p, p)`.
    pub perturbation: f64,
}

impl Default for Lorenz96Params {
    fn default() -> Self {
        Lorenz96Params {
            dims: 5,
            forcing: 8.0,
            dt: 0.05,
            transient: 1000,
            perturbation: 0.01,
        }
    }
}

/// States beyond this magnitude count as divergence.
pub const LORENZ_DIVERGENCE: f64 = 1e6;

fn lorenz96_derivative(x: &[f64], forcing: f64, out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let ip1 = x[(i + 1) % n];
        let im1 = x[(i + n - 1) % n];
        let im2 = x[(i + n - 2) % n];
        out[i] = im1 * (ip1 - im2) - x[i] + forcing;
    }
}

/// One classical Runge-Kutta step.
pub fn lorenz96_rk4_step(x: &mut [f64], forcing: f64, dt: f64) {
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    lorenz96_derivative(x, forcing, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    lorenz96_derivative(&tmp, forcing, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    lorenz96_derivative(&tmp, forcing, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    lorenz96_derivative(&tmp, forcing, &mut k4);
    for i in 0..n {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrates `steps` RK4 steps from `x0`, returning every state after a step.
pub fn integrate_lorenz96(
    x0: &[f64],
    forcing: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if x0.len() < 4 {
        return Err(Error::InvalidInput(
            "Lorenz96 needs at least 4 dimensions".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(steps);
    for s in 0..steps {
        lorenz96_rk4_step(&mut x, forcing, dt);
        if x.iter().any(|v| !(v.abs() <= LORENZ_DIVERGENCE)) {
            return Err(Error::Integration(format!("Lorenz96 diverged at step {s}")));
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Lorenz96 trajectory of `steps` states with targets `x(t + horizon)`.
pub fn lorenz96(
    steps: usize,
    horizon: usize,
    params: &Lorenz96Params,
    rng: &mut RngStream,
) -> Result<TimeSeries> {
    let x0: Vec<f64> = (0..params.dims)
        .map(|_| params.forcing + rng.uniform(-params.perturbation, params.perturbation))
        .collect();
    let traj = integrate_lorenz96(
        &x0,
        params.forcing,
        params.dt,
        params.transient + steps + horizon,
    )?;
    let kept = &traj[params.transient..];
    TimeSeries::forecast(kept, steps, horizon)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MackeyGlassForm {
    /// `df/dt = 0.2 f(t-τ) / (1 + f(t-τ)^10) - 0.1 f(t)`.
    #[default]
    Standard,
    /// `df/dt = 0.2 f(t-τ) / (1 + f(t-τ)^10 - 0.1 f(t))`.
    Typeset,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlassParams {
    pub delay: f64,
    pub dt: f64,
    /// Euler steps per recorded sample.
    pub subsample: usize,
    pub initial: f64,
    /// Recorded samples discarded before the series starts.
    pub transient: usize,
    pub form: MackeyGlassForm,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        MackeyGlassParams {
            delay: 17.0,
            dt: 0.1,
            subsample: 10,
            initial: 1.2,
            transient: 1000,
            form: MackeyGlassForm::Standard,
        }
    }
}

pub fn mackey_glass_derivative(f: f64, f_delayed: f64, form: MackeyGlassForm) -> f64 {
    let p = f_delayed.powi(10);
    match form {
        MackeyGlassForm::Standard => 0.2 * f_delayed / (1.0 + p) - 0.1 * f,
        MackeyGlassForm::Typeset => 0.2 * f_delayed / (1.0 + p - 0.1 * f),
    }
}

/// Euler integration sampled every `subsample` steps, `samples` values
/// after the transient.
pub fn integrate_mackey_glass(params: &MackeyGlassParams, samples: usize) -> Result<Vec<f64>> {
    if !(params.dt > 0.0) || params.subsample == 0 {
        return Err(Error::InvalidInput(
            "Mackey-Glass needs dt > 0 and subsample >= 1".into(),
        ));
    }
    let lag_steps = params.delay / params.dt;
    if (lag_steps - lag_steps.round()).abs() > 1e-9 || lag_steps < 1.0 {
        return Err(Error::InvalidInput(format!(
            "delay {} is not a positive multiple of dt {}",
            params.delay, params.dt
        )));
    }
    let lag = lag_steps.round() as usize;
    let total_samples = params.transient + samples;
    // ring buffer of the last `lag` values; hist[i % lag] holds f at step i - lag
    let mut hist = vec![params.initial; lag];
    let mut f = params.initial;
    let mut out = Vec::with_capacity(samples);
    let mut step = 0usize;
    for sample in 0..total_samples {
        for _ in 0..params.subsample {
            let slot = step % lag;
            let delayed = hist[slot];
            let next = f + params.dt * mackey_glass_derivative(f, delayed, params.form);
            hist[slot] = f;
            f = next;
            step += 1;
            if !f.is_finite() {
                return Err(Error::Integration(format!(
                    "Mackey-Glass non-finite at step {step}"
                )));
            }
        }
        if sample >= params.transient {
            out.push(f);
        }
    }
    Ok(out)
}

/// Mackey-Glass series of `steps` values with targets `f(t + horizon)`.
pub fn mackey_glass(
    steps: usize,
    horizon: usize,
    params: &MackeyGlassParams,
) -> Result<TimeSeries> {
    let f = integrate_mackey_glass(params, steps + horizon)?;
    let rows: Vec<Vec<f64>> = f.into_iter().map(|v| vec![v]).collect();
    TimeSeries::forecast(&rows, steps, horizon)
}
