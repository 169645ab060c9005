//! Reservoir construction and simulation.
//!
//! Every layer follows
//!
//! ```text
//! h(t) = α O h(t-1) + β tanh(W_h h(t-1) + W_x x(t) + b)
//! ```
//!
//! where `x(t)` is the external input for the first layer and the current
//! state of the layer below for every other one. A leaky ESN is the special
//! case `O = I`, `α = 1 - τ`, `β = τ`; a shallow residual ESN is a
//! single-layer stack.
//!
//! Weights of a layer are drawn from the stream in the fixed order
//! `W_x, W_h, b, O`, layer by layer, so a seed pins the whole network.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{
    l2_distance, qr_orthogonal, rescale_to_rho, uniform_matrix, Matrix, RngStream,
};

/// Fresh `W_h` draws attempted before a nilpotent draw becomes an error.
pub const MAX_RECURRENT_DRAWS: usize = 4;

/// Steps between finiteness checks in optimized builds.
pub const FAST_CHECK_INTERVAL: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    RandomOrthogonal,
    Cyclic,
    Identity,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 3] = [
        ResidualKind::RandomOrthogonal,
        ResidualKind::Cyclic,
        ResidualKind::Identity,
    ];

    /// One-letter tag used in model names (`R`, `C`, `I`).
    pub fn tag(self) -> &'static str {
        match self {
            ResidualKind::RandomOrthogonal => "R",
            ResidualKind::Cyclic => "C",
            ResidualKind::Identity => "I",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.to_ascii_uppercase().as_str() {
            "R" | "RANDOM" | "RANDOM_ORTHOGONAL" => Some(ResidualKind::RandomOrthogonal),
            "C" | "CYCLIC" => Some(ResidualKind::Cyclic),
            "I" | "IDENTITY" => Some(ResidualKind::Identity),
            _ => None,
        }
    }
}

/// Hyperparameters of one reservoir layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub hidden_size: usize,
    /// Spectral radius `W_h` is rescaled to.
    pub spectral_radius: f64,
    /// `W_x` entries are drawn from `(-input_scaling, input_scaling)`.
    pub input_scaling: f64,
    /// Bias entries are drawn from `(-bias_scaling, bias_scaling)`.
    pub bias_scaling: f64,
    /// Residual branch coefficient, in `[0, 1]`.
    pub alpha: f64,
    /// Nonlinear branch coefficient, in `(0, 1]`.
    pub beta: f64,
    pub residual: ResidualKind,
}

impl LayerConfig {
    /// Leaky-integrator layer: identity residual with `α = 1 - τ`, `β = τ`.
    pub fn leaky(
        hidden_size: usize,
        spectral_radius: f64,
        input_scaling: f64,
        bias_scaling: f64,
        leak_rate: f64,
    ) -> Self {
        LayerConfig {
            hidden_size,
            spectral_radius,
            input_scaling,
            bias_scaling,
            alpha: 1.0 - leak_rate,
            beta: leak_rate,
            residual: ResidualKind::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.hidden_size == 0 {
            return bad("hidden_size must be >= 1".into());
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return bad(format!(
                "spectral_radius must be > 0, got {}",
                self.spectral_radius
            ));
        }
        if !(self.input_scaling >= 0.0 && self.input_scaling.is_finite()) {
            return bad(format!(
                "input_scaling must be >= 0, got {}",
                self.input_scaling
            ));
        }
        if !(self.bias_scaling >= 0.0 && self.bias_scaling.is_finite()) {
            return bad(format!(
                "bias_scaling must be >= 0, got {}",
                self.bias_scaling
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad(format!("beta must lie in (0, 1], got {}", self.beta));
        }
        Ok(())
    }
}

/// Residual map `O`, with fast paths for the structured kinds.
pub fn build_residual(kind: ResidualKind, n: usize, rng: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "residual matrix needs n >= 1".into(),
        ));
    }
    Ok(match kind {
        ResidualKind::RandomOrthogonal => qr_orthogonal(n, rng)?,
        ResidualKind::Cyclic => cyclic_matrix(n),
        ResidualKind::Identity => Matrix::identity(n),
    })
}

/// Ones on the sub-diagonal and in the top-right corner.
pub fn cyclic_matrix(n: usize) -> Matrix {
    let mut c = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        c[(i + 1, i)] = 1.0;
    }
    if n > 0 {
        c[(0, n - 1)] = 1.0;
    }
    c
}

/// An instantiated reservoir layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerRepr", into = "LayerRepr")]
pub struct Layer {
    w_x: Matrix,
    w_h: Matrix,
    bias: Vec<f64>,
    residual: Matrix,
    residual_kind: ResidualKind,
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct LayerRepr {
    w_x: Matrix,
    w_h: Matrix,
    bias: Vec<f64>,
    residual: Matrix,
    residual_kind: ResidualKind,
    alpha: f64,
    beta: f64,
}

impl TryFrom<LayerRepr> for Layer {
    type Error = Error;

    fn try_from(r: LayerRepr) -> Result<Self> {
        Layer::from_parts(
            r.w_x,
            r.w_h,
            r.bias,
            r.residual_kind,
            r.residual,
            r.alpha,
            r.beta,
        )
    }
}

impl From<Layer> for LayerRepr {
    fn from(l: Layer) -> Self {
        LayerRepr {
            w_x: l.w_x,
            w_h: l.w_h,
            bias: l.bias,
            residual: l.residual,
            residual_kind: l.residual_kind,
            alpha: l.alpha,
            beta: l.beta,
        }
    }
}

impl Layer {
    /// Assembles a layer from explicit weights. Shapes are checked, and the
    /// residual matrix must match its kind exactly for the structured kinds.
    pub fn from_parts(
        w_x: Matrix,
        w_h: Matrix,
        bias: Vec<f64>,
        residual_kind: ResidualKind,
        residual: Matrix,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = w_h.rows();
        if !w_h.is_square() {
            return Err(Error::NotSquare {
                rows: w_h.rows(),
                cols: w_h.cols(),
            });
        }
        check_dim("W_x rows", n, w_x.rows())?;
        check_dim("bias length", n, bias.len())?;
        check_dim("residual rows", n, residual.rows())?;
        check_dim("residual cols", n, residual.cols())?;
        let canonical = match residual_kind {
            ResidualKind::Identity => Some(Matrix::identity(n)),
            ResidualKind::Cyclic => Some(cyclic_matrix(n)),
            ResidualKind::RandomOrthogonal => None,
        };
        if let Some(c) = canonical {
            if c != residual {
                return Err(Error::InvalidInput(format!(
                    "residual matrix does not match kind {residual_kind:?}"
                )));
            }
        }
        Ok(Layer {
            w_x,
            w_h,
            bias,
            residual,
            residual_kind,
            alpha,
            beta,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.w_h.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn w_x(&self) -> &Matrix {
        &self.w_x
    }

    pub fn w_h(&self) -> &Matrix {
        &self.w_h
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn residual(&self) -> &Matrix {
        &self.residual
    }

    pub fn residual_kind(&self) -> ResidualKind {
        self.residual_kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Copy with different branch coefficients, weights untouched.
    pub fn with_coefficients(&self, alpha: f64, beta: f64) -> Layer {
        Layer {
            alpha,
            beta,
            ..self.clone()
        }
    }

    /// `α O + β W_h`, the layer's linearization at the origin.
    pub fn linearization_at_origin(&self) -> Matrix {
        self.residual
            .scaled(self.alpha)
            .add(&self.w_h.scaled(self.beta))
            .expect("residual and recurrent matrices share a shape")
    }

    /// `out = O h`.
    #[inline]
    pub fn apply_residual(&self, h: &[f64], out: &mut [f64]) {
        match self.residual_kind {
            ResidualKind::Identity => out.copy_from_slice(h),
            ResidualKind::Cyclic => {
                let n = h.len();
                out[0] = h[n - 1];
                out[1..].copy_from_slice(&h[..n - 1]);
            }
            ResidualKind::RandomOrthogonal => self.residual.mul_vec_into(h, out),
        }
    }

    /// `W_h h + W_x u + b`.
    pub fn preactivation(&self, h_prev: &[f64], layer_input: &[f64]) -> Result<Vec<f64>> {
        check_dim("layer state", self.hidden_size(), h_prev.len())?;
        check_dim("layer input", self.input_dim(), layer_input.len())?;
        let mut pre = self.w_h.mul_vec(h_prev)?;
        let drive = self.w_x.mul_vec(layer_input)?;
        for ((p, d), b) in pre.iter_mut().zip(&drive).zip(&self.bias) {
            *p += d + b;
        }
        Ok(pre)
    }
}

/// Draws a layer: `W_x ~ U(-ω_x, ω_x)`, `W_h ~ U(-1, 1)` rescaled to `ρ`,
/// `b ~ U(-ω_b, ω_b)`, then `O`.
pub fn build_layer(config: &LayerConfig, input_dim: usize, rng: &mut RngStream) -> Result<Layer> {
    let (w_x, w_h, bias) = draw_layer_weights(config, input_dim, rng)?;
    let residual = build_residual(config.residual, config.hidden_size, rng)?;
    Layer::from_parts(
        w_x,
        w_h,
        bias,
        config.residual,
        residual,
        config.alpha,
        config.beta,
    )
}

fn draw_layer_weights(
    config: &LayerConfig,
    input_dim: usize,
    rng: &mut RngStream,
) -> Result<(Matrix, Matrix, Vec<f64>)> {
    config.validate()?;
    if input_dim == 0 {
        return Err(Error::InvalidDimension(
            "layer input dimension must be >= 1".into(),
        ));
    }
    let n = config.hidden_size;
    // unit draws are scaled afterwards so a zero scaling still consumes the same stream
    let w_x = uniform_matrix(n, input_dim, -1.0, 1.0, rng)?.scaled(config.input_scaling);
    let mut w_h = None;
    for _ in 0..MAX_RECURRENT_DRAWS {
        let raw = uniform_matrix(n, n, -1.0, 1.0, rng)?;
        match rescale_to_rho(&raw, config.spectral_radius) {
            Ok(m) => {
                w_h = Some(m);
                break;
            }
            Err(Error::CannotRescale) => continue,
            Err(e) => return Err(e),
        }
    }
    let w_h = w_h.ok_or(Error::CannotRescale)?;
    let bias: Vec<f64> = (0..n)
        .map(|_| rng.uniform(-1.0, 1.0) * config.bias_scaling)
        .collect();
    Ok((w_x, w_h, bias))
}

/// Elementwise nonlinearity. `Linear` exists for frequency-response probes only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Linear => v,
        }
    }
}

/// One layer update `α O h + β tanh(W_h h + W_x x + b)`.
pub fn step_layer(layer: &Layer, h_prev: &[f64], x_t: &[f64]) -> Result<Vec<f64>> {
    step_layer_with(layer, h_prev, x_t, Activation::Tanh)
}

pub fn step_layer_with(
    layer: &Layer,
    h_prev: &[f64],
    x_t: &[f64],
    activation: Activation,
) -> Result<Vec<f64>> {
    let pre = layer.preactivation(h_prev, x_t)?;
    let mut out = vec![0.0; layer.hidden_size()];
    layer.apply_residual(h_prev, &mut out);
    for (o, p) in out.iter_mut().zip(&pre) {
        *o = layer.alpha * *o + layer.beta * activation.apply(*p);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow { layer: 0, step: 0 });
    }
    Ok(out)
}

/// Configuration of a whole stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepConfig {
    pub layers: Vec<LayerConfig>,
    /// Feed the readout every layer's state instead of only the last one.
    pub concat: bool,
    /// Reuse the first layer's residual matrix in every layer.
    #[serde(default)]
    pub share_residual: bool,
}

impl DeepConfig {
    pub fn build(&self, input_dim: usize, rng: &mut RngStream) -> Result<DeepReservoir> {
        if self.layers.is_empty() {
            return Err(Error::InvalidConfig(
                "a reservoir needs at least one layer".into(),
            ));
        }
        let mut layers: Vec<Layer> = Vec::with_capacity(self.layers.len());
        let mut dim = input_dim;
        for (l, cfg) in self.layers.iter().enumerate() {
            let layer = if self.share_residual && l > 0 {
                let first = &layers[0];
                if first.hidden_size() != cfg.hidden_size || first.residual_kind != cfg.residual {
                    return Err(Error::InvalidConfig(
                        "a shared residual needs equal layer sizes and kinds".into(),
                    ));
                }
                let (w_x, w_h, bias) = draw_layer_weights(cfg, dim, rng)?;
                Layer::from_parts(
                    w_x,
                    w_h,
                    bias,
                    cfg.residual,
                    first.residual.clone(),
                    cfg.alpha,
                    cfg.beta,
                )?
            } else {
                build_layer(cfg, dim, rng)?
            };
            dim = layer.hidden_size();
            layers.push(layer);
        }
        DeepReservoir::new(layers, self.concat)
    }
}

/// Ordered stack of layers; layer `l > 1` is driven by layer `l - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeepRepr", into = "DeepRepr")]
pub struct DeepReservoir {
    layers: Vec<Layer>,
    concat: bool,
}

#[derive(Serialize, Deserialize)]
struct DeepRepr {
    layers: Vec<Layer>,
    concat: bool,
}

impl TryFrom<DeepRepr> for DeepReservoir {
    type Error = Error;

    fn try_from(r: DeepRepr) -> Result<Self> {
        DeepReservoir::new(r.layers, r.concat)
    }
}

impl From<DeepReservoir> for DeepRepr {
    fn from(d: DeepReservoir) -> Self {
        DeepRepr {
            layers: d.layers,
            concat: d.concat,
        }
    }
}

impl DeepReservoir {
    pub fn new(layers: Vec<Layer>, concat: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig(
                "a reservoir needs at least one layer".into(),
            ));
        }
        for pair in layers.windows(2) {
            check_dim(
                "layer input vs previous layer size",
                pair[0].hidden_size(),
                pair[1].input_dim(),
            )?;
        }
        Ok(DeepReservoir { layers, concat })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn concat(&self) -> bool {
        self.concat
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::hidden_size).collect()
    }

    pub fn total_units(&self) -> usize {
        self.layers.iter().map(Layer::hidden_size).sum()
    }

    /// Width of the readout features this stack produces.
    pub fn feature_width(&self) -> usize {
        if self.concat {
            self.total_units()
        } else {
            self.layers.last().map_or(0, Layer::hidden_size)
        }
    }

    /// Same weights, different layers (used to tweak coefficients in analyses).
    pub fn map_layers(&self, f: impl Fn(usize, &Layer) -> Layer) -> Result<DeepReservoir> {
        DeepReservoir::new(
            self.layers
                .iter()
                .enumerate()
                .map(|(i, l)| f(i, l))
                .collect(),
            self.concat,
        )
    }
}

/// Concatenated per-layer state of a stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalState {
    pub layers: Vec<Vec<f64>>,
}

impl GlobalState {
    pub fn zeros(deep: &DeepReservoir) -> Self {
        GlobalState {
            layers: deep
                .layers
                .iter()
                .map(|l| vec![0.0; l.hidden_size()])
                .collect(),
        }
    }

    /// Every coordinate uniform on `[lo, hi)`, layer by layer.
    pub fn random(deep: &DeepReservoir, lo: f64, hi: f64, rng: &mut RngStream) -> Self {
        GlobalState {
            layers: deep
                .layers
                .iter()
                .map(|l| (0..l.hidden_size()).map(|_| rng.uniform(lo, hi)).collect())
                .collect(),
        }
    }

    pub fn from_flat(deep: &DeepReservoir, flat: &[f64]) -> Result<Self> {
        check_dim("global state length", deep.total_units(), flat.len())?;
        let mut layers = Vec::with_capacity(deep.num_layers());
        let mut offset = 0;
        for l in &deep.layers {
            layers.push(flat[offset..offset + l.hidden_size()].to_vec());
            offset += l.hidden_size();
        }
        Ok(GlobalState { layers })
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers.concat()
    }

    fn check_against(&self, deep: &DeepReservoir) -> Result<()> {
        check_dim(
            "global state layer count",
            deep.num_layers(),
            self.layers.len(),
        )?;
        for (l, s) in deep.layers.iter().zip(&self.layers) {
            check_dim("global state layer size", l.hidden_size(), s.len())?;
        }
        Ok(())
    }

    /// Max-product metric: largest per-layer Euclidean distance.
    pub fn max_distance(&self, other: &GlobalState) -> f64 {
        self.layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| l2_distance(a, b))
            .fold(0.0, f64::max)
    }
}

/// One step of the global map `h(t) = F(x(t), h(t-1))`.
pub fn step_global(deep: &DeepReservoir, x: &[f64], state: &GlobalState) -> Result<GlobalState> {
    step_global_with(deep, x, state, Activation::Tanh)
}

pub fn step_global_with(
    deep: &DeepReservoir,
    x: &[f64],
    state: &GlobalState,
    activation: Activation,
) -> Result<GlobalState> {
    state.check_against(deep)?;
    let mut next: Vec<Vec<f64>> = Vec::with_capacity(deep.num_layers());
    for (l, (layer, h_prev)) in deep.layers.iter().zip(&state.layers).enumerate() {
        let input: &[f64] = if l == 0 { x } else { &next[l - 1] };
        let h = step_layer_with(layer, h_prev, input, activation).map_err(|e| match e {
            Error::NumericOverflow { .. } => Error::NumericOverflow { layer: l, step: 0 },
            other => other,
        })?;
        next.push(h);
    }
    Ok(GlobalState { layers: next })
}

/// Per-layer states over time; row `t` of `states[l]` is `h^(l)(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub states: Vec<Matrix>,
    pub washout: usize,
}

impl StateTrajectory {
    pub fn steps(&self) -> usize {
        self.states.first().map_or(0, Matrix::rows)
    }

    pub fn num_layers(&self) -> usize {
        self.states.len()
    }

    /// Global state after the last step.
    pub fn final_state(&self) -> GlobalState {
        let t = self.steps();
        GlobalState {
            layers: self.states.iter().map(|s| s.row(t - 1).to_vec()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Check every step.
    Strict,
    /// Check every [`FAST_CHECK_INTERVAL`] steps and at the end.
    Fast,
}

impl Default for CheckMode {
    fn default() -> Self {
        if cfg!(debug_assertions) {
            CheckMode::Strict
        } else {
            CheckMode::Fast
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ForwardOptions {
    pub activation: Activation,
    pub check: CheckMode,
}

/// Runs the stack over `inputs` (one row per time step).
pub fn forward(
    deep: &DeepReservoir,
    inputs: &Matrix,
    washout: usize,
    h0: Option<&GlobalState>,
) -> Result<StateTrajectory> {
    forward_with(deep, inputs, washout, h0, ForwardOptions::default())
}

pub fn forward_with(
    deep: &DeepReservoir,
    inputs: &Matrix,
    washout: usize,
    h0: Option<&GlobalState>,
    opts: ForwardOptions,
) -> Result<StateTrajectory> {
    let steps = inputs.rows();
    if steps == 0 {
        return Err(Error::InvalidInput("input sequence is empty".into()));
    }
    if washout >= steps {
        return Err(Error::EmptyFeatures { washout, steps });
    }
    check_dim("input dimension", deep.input_dim(), inputs.cols())?;
    if let Some(h0) = h0 {
        h0.check_against(deep)?;
    }

    let mut states: Vec<Matrix> = Vec::with_capacity(deep.num_layers());
    for (l, layer) in deep.layers.iter().enumerate() {
        let drive_src = if l == 0 { inputs } else { &states[l - 1] };
        let traj = run_layer(layer, drive_src, h0.map(|s| s.layers[l].as_slice()), opts)
            .map_err(|step| Error::NumericOverflow { layer: l, step })?;
        states.push(traj);
    }
    Ok(StateTrajectory { states, washout })
}

/// Simulates one layer over a whole driving sequence. Errors with the step
/// index at which a non-finite state was detected.
fn run_layer(
    layer: &Layer,
    drive_src: &Matrix,
    h0: Option<&[f64]>,
    opts: ForwardOptions,
) -> std::result::Result<Matrix, usize> {
    let n = layer.hidden_size();
    let steps = drive_src.rows();
    // input contribution for every step at once: U W_xᵀ + b
    let mut drive = drive_src
        .matmul_transposed(&layer.w_x)
        .expect("input width checked by the caller");
    for t in 0..steps {
        for (d, b) in drive.row_mut(t).iter_mut().zip(&layer.bias) {
            *d += b;
        }
    }

    let mut out = Matrix::zeros(steps, n);
    let mut h = h0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut pre = vec![0.0; n];
    let mut res = vec![0.0; n];
    let (alpha, beta) = (layer.alpha, layer.beta);
    for t in 0..steps {
        layer.w_h.mul_vec_into(&h, &mut pre);
        layer.apply_residual(&h, &mut res);
        let d = drive.row(t);
        let row = out.row_mut(t);
        for i in 0..n {
            row[i] = alpha * res[i] + beta * opts.activation.apply(pre[i] + d[i]);
        }
        h.copy_from_slice(row);
        let due = match opts.check {
            CheckMode::Strict => true,
            CheckMode::Fast => (t + 1) % FAST_CHECK_INTERVAL == 0 || t + 1 == steps,
        };
        if due && h.iter().any(|v| !v.is_finite()) {
            return Err(t);
        }
    }
    Ok(out)
}

/// Per-layer sizes for a budget of `total` units.
///
/// With `concat` the budget is split evenly and the remainder goes to the
/// first layer; otherwise every layer gets the full budget.
pub fn allocate_units(total: usize, n_layers: usize, concat: bool) -> Result<Vec<usize>> {
    if n_layers == 0 {
        return Err(Error::InvalidConfig("need at least one layer".into()));
    }
    if !concat {
        if total == 0 {
            return Err(Error::InvalidConfig("need at least one unit".into()));
        }
        return Ok(vec![total; n_layers]);
    }
    if total < n_layers {
        return Err(Error::InvalidConfig(format!(
            "cannot split {total} units across {n_layers} layers"
        )));
    }
    let base = total / n_layers;
    let mut sizes = vec![base; n_layers];
    sizes[0] += total - base * n_layers;
    Ok(sizes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// One row per post-washout time step.
    PerStep,
    /// One row holding the final state.
    LastStep,
}

/// Readout features from a trajectory: every layer side by side with
/// `concat`, otherwise the last layer only.
pub fn readout_features(traj: &StateTrajectory, concat: bool, mode: FeatureMode) -> Result<Matrix> {
    let steps = traj.steps();
    if traj.states.is_empty() || steps == 0 {
        return Err(Error::EmptyFeatures {
            washout: traj.washout,
            steps,
        });
    }
    let (start, end) = match mode {
        FeatureMode::PerStep => {
            if traj.washout >= steps {
                return Err(Error::EmptyFeatures {
                    washout: traj.washout,
                    steps,
                });
            }
            (traj.washout, steps)
        }
        FeatureMode::LastStep => (steps - 1, steps),
    };
    if concat {
        let parts: Vec<Matrix> = traj
            .states
            .iter()
            .map(|s| s.row_range(start, end))
            .collect();
        let refs: Vec<&Matrix> = parts.iter().collect();
        Matrix::hstack(&refs)
    } else {
        Ok(traj.states.last().expect("non-empty").row_range(start, end))
    }
}
