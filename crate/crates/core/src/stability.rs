//! Linear stability and contractivity of the global state map.
//!
//! The global Jacobian of `h(t) = F(x(t), h(t-1))` is block lower-triangular:
//! layer `l` depends on its own past directly and on lower layers only
//! through the current state of the layer below. Its spectrum is therefore
//! the union of the diagonal blocks' spectra.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{eigenvalues, operator_norm_2, spectral_radius, Matrix, RngStream};
use crate::reservoir::{step_global, DeepReservoir, GlobalState, Layer};

/// `diag(1 - tanh²(pre))` as a vector, `pre` including the bias.
fn tanh_slopes(layer: &Layer, h_prev: &[f64], layer_input: &[f64]) -> Result<Vec<f64>> {
    Ok(layer
        .preactivation(h_prev, layer_input)?
        .into_iter()
        .map(|p| {
            let t = p.tanh();
            1.0 - t * t
        })
        .collect())
}

/// `∂h(t)/∂h(t-1)` of one layer: `α O + β diag(1 - tanh²(pre)) W_h`.
pub fn layer_block_jacobian(layer: &Layer, h_prev: &[f64], layer_input: &[f64]) -> Result<Matrix> {
    let s = tanh_slopes(layer, h_prev, layer_input)?;
    let n = layer.hidden_size();
    let mut j = layer.residual().scaled(layer.alpha());
    for i in 0..n {
        let coef = layer.beta() * s[i];
        let wh = layer.w_h().row(i);
        for (jij, w) in j.row_mut(i).iter_mut().zip(wh) {
            *jij += coef * w;
        }
    }
    Ok(j)
}

/// Full `∂h(t)/∂h(t-1)` of the stack at `(x, state)`.
pub fn global_jacobian(deep: &DeepReservoir, x: &[f64], state: &GlobalState) -> Result<Matrix> {
    check_dim(
        "jacobian layer count",
        deep.num_layers(),
        state.layers.len(),
    )?;
    let sizes = deep.layer_sizes();
    let total: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let next = step_global(deep, x, state)?;

    let mut jac = Matrix::zeros(total, total);
    // rows of the previous layer's block row, `n_{l-1} x total`
    let mut below: Option<Matrix> = None;
    for (l, layer) in deep.layers().iter().enumerate() {
        let input: &[f64] = if l == 0 { x } else { &next.layers[l - 1] };
        let h_prev = &state.layers[l];
        let n = layer.hidden_size();
        let mut row = Matrix::zeros(n, total);
        if let Some(b) = &below {
            // β S W_x times the lower layer's block row
            let s = tanh_slopes(layer, h_prev, input)?;
            let mut swx = layer.w_x().clone();
            for i in 0..n {
                let c = layer.beta() * s[i];
                swx.row_mut(i).iter_mut().for_each(|v| *v *= c);
            }
            row = swx.matmul(b)?;
        }
        let diag = layer_block_jacobian(layer, h_prev, input)?;
        let existing = row.block(0, offsets[l], n, n);
        row.set_block(0, offsets[l], &existing.add(&diag)?);
        jac.set_block(offsets[l], 0, &row);
        below = Some(row);
    }
    Ok(jac)
}

/// Necessary condition for the echo state property: the linearization at
/// the origin has spectral radius below one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessaryEsp {
    /// `ρ(α O + β W_h)` per layer.
    pub layer_radii: Vec<f64>,
    pub global_radius: f64,
    pub holds: bool,
}

pub fn necessary_esp(deep: &DeepReservoir) -> Result<NecessaryEsp> {
    let layer_radii = deep
        .layers()
        .iter()
        .map(|l| spectral_radius(&l.linearization_at_origin()))
        .collect::<Result<Vec<_>>>()?;
    let global_radius = layer_radii.iter().copied().fold(0.0, f64::max);
    Ok(NecessaryEsp {
        holds: global_radius < 1.0,
        layer_radii,
        global_radius,
    })
}

/// Upper bounds on the per-layer Lipschitz constants under the max-product
/// metric: `C_1 = α + β‖W_h‖` and `C_l = α + β(‖W_h‖ + C_{l-1}‖W_x‖)`.
pub fn contraction_coefficients(deep: &DeepReservoir) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(deep.num_layers());
    for (l, layer) in deep.layers().iter().enumerate() {
        let wh = operator_norm_2(layer.w_h())?;
        let c = if l == 0 {
            layer.alpha() + layer.beta() * wh
        } else {
            let wx = operator_norm_2(layer.w_x())?;
            layer.alpha() + layer.beta() * (wh + out[l - 1] * wx)
        };
        out.push(c);
    }
    Ok(out)
}

pub fn global_contraction(deep: &DeepReservoir) -> Result<f64> {
    Ok(contraction_coefficients(deep)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Rescales every layer's `β` so that each layer coefficient equals `target`
/// (keeping `α` and the weights). Needs `α < target` in every layer and a
/// resulting `β` in `(0, 1]`.
pub fn with_target_contraction(deep: &DeepReservoir, target: f64) -> Result<DeepReservoir> {
    let mut layers = Vec::with_capacity(deep.num_layers());
    for (l, layer) in deep.layers().iter().enumerate() {
        let wh = operator_norm_2(layer.w_h())?;
        let denom = if l == 0 {
            wh
        } else {
            wh + target * operator_norm_2(layer.w_x())?
        };
        let beta = (target - layer.alpha()) / denom;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "layer {l}: contraction {target} needs beta {beta}, outside (0, 1]"
            )));
        }
        layers.push(layer.with_coefficients(layer.alpha(), beta));
    }
    DeepReservoir::new(layers, deep.concat())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub layer_sizes: Vec<usize>,
    pub necessary: NecessaryEsp,
    pub layer_contraction: Vec<f64>,
    pub global_contraction: f64,
    /// Sufficient condition: global coefficient below one.
    pub contractive: bool,
}

impl StabilityReport {
    pub fn compute(deep: &DeepReservoir) -> Result<Self> {
        let layer_contraction = contraction_coefficients(deep)?;
        let global = layer_contraction.iter().copied().fold(0.0, f64::max);
        Ok(StabilityReport {
            layer_sizes: deep.layer_sizes(),
            necessary: necessary_esp(deep)?,
            layer_contraction,
            global_contraction: global,
            contractive: global < 1.0,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `d(F(x, a), F(x, b)) / d(a, b)` in the max-product metric.
pub fn contraction_ratio(
    deep: &DeepReservoir,
    x: &[f64],
    a: &GlobalState,
    b: &GlobalState,
) -> Result<f64> {
    let d0 = a.max_distance(b);
    if d0 == 0.0 {
        return Err(Error::InvalidInput(
            "contraction ratio of identical states".into(),
        ));
    }
    let fa = step_global(deep, x, a)?;
    let fb = step_global(deep, x, b)?;
    Ok(fa.max_distance(&fb) / d0)
}

/// Largest ratio over `pairs` random state pairs and inputs in `[-scale, scale)`.
pub fn max_contraction_ratio(
    deep: &DeepReservoir,
    pairs: usize,
    scale: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = GlobalState::random(deep, -scale, scale, rng);
        let b = GlobalState::random(deep, -scale, scale, rng);
        let x: Vec<f64> = (0..deep.input_dim())
            .map(|_| rng.uniform(-scale, scale))
            .collect();
        worst = worst.max(contraction_ratio(deep, &x, &a, &b)?);
    }
    Ok(worst)
}

/// Distance between two runs driven by the same inputs from different
/// initial states; `distances[0]` is the initial distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspTrace {
    pub distances: Vec<f64>,
}

impl EspTrace {
    /// First step at which the distance drops below `tol`.
    pub fn steps_to(&self, tol: f64) -> Option<usize> {
        self.distances.iter().position(|&d| d < tol)
    }

    /// Whether `distances[t] <= c^t distances[0]` (with relative slack `rel`).
    pub fn within_bound(&self, c: f64, rel: f64) -> bool {
        let d0 = self.distances[0];
        self.distances
            .iter()
            .enumerate()
            .all(|(t, &d)| d <= c.powi(t as i32) * d0 * (1.0 + rel))
    }
}

pub fn esp_convergence_test(
    deep: &DeepReservoir,
    inputs: &Matrix,
    a: &GlobalState,
    b: &GlobalState,
) -> Result<EspTrace> {
    check_dim("input dimension", deep.input_dim(), inputs.cols())?;
    let mut sa = a.clone();
    let mut sb = b.clone();
    let mut distances = Vec::with_capacity(inputs.rows() + 1);
    distances.push(sa.max_distance(&sb));
    for x in inputs.row_iter() {
        sa = step_global(deep, x, &sa)?;
        sb = step_global(deep, x, &sb)?;
        distances.push(sa.max_distance(&sb));
    }
    Ok(EspTrace { distances })
}

/// Where the per-layer Jacobian blocks are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Zero state and zero input.
    Origin,
    /// Global state and external input uniform on `(-scale, scale)`.
    Random { scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerEigenvalues {
    pub layer: usize,
    pub eigenvalues: Vec<Complex64>,
}

impl LayerEigenvalues {
    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of the diagonal blocks of `global_jacobian(deep, x, state)`.
/// Layers above the first see the freshly updated state of the layer below.
pub fn eigenspectrum_at(
    deep: &DeepReservoir,
    x: &[f64],
    state: &GlobalState,
) -> Result<Vec<LayerEigenvalues>> {
    check_dim(
        "eigenspectrum layer count",
        deep.num_layers(),
        state.layers.len(),
    )?;
    let next = step_global(deep, x, state)?;
    deep.layers()
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            let input: &[f64] = if l == 0 { x } else { &next.layers[l - 1] };
            let j = layer_block_jacobian(layer, &state.layers[l], input)?;
            Ok(LayerEigenvalues {
                layer: l + 1,
                eigenvalues: eigenvalues(&j)?,
            })
        })
        .collect()
}

/// `eigenspectrum_at` on a probe point.
pub fn eigenspectrum_report(
    deep: &DeepReservoir,
    probe: Probe,
    rng: &mut RngStream,
) -> Result<Vec<LayerEigenvalues>> {
    let d = deep.input_dim();
    let (x, state) = match probe {
        Probe::Origin => (vec![0.0; d], GlobalState::zeros(deep)),
        Probe::Random { scale } => {
            let state = GlobalState::random(deep, -scale, scale, rng);
            ((0..d).map(|_| rng.uniform(-scale, scale)).collect(), state)
        }
    };
    eigenspectrum_at(deep, &x, &state)
}

/// CSV with columns `re,im,layer` (layers numbered from 1).
pub fn write_eigen_csv(report: &[LayerEigenvalues], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im", "layer"])?;
    for le in report {
        for z in &le.eigenvalues {
            w.write_record([z.re.to_string(), z.im.to_string(), le.layer.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{DeepConfig, LayerConfig, ResidualKind};

    fn stack(kinds: &[ResidualKind], n: usize, bias: f64, seed: u64) -> DeepReservoir {
        let layers = kinds
            .iter()
            .map(|&k| LayerConfig {
                hidden_size: n,
                spectral_radius: 0.9,
                input_scaling: 0.8,
                bias_scaling: bias,
                alpha: 0.4,
                beta: 0.6,
                residual: k,
            })
            .collect();
        DeepConfig {
            layers,
            concat: true,
            share_residual: false,
        }
        .build(2, &mut RngStream::new(seed))
        .unwrap()
    }

    fn central_difference(deep: &DeepReservoir, x: &[f64], s: &GlobalState, eps: f64) -> Matrix {
        let flat = s.flatten();
        let n = flat.len();
        let mut j = Matrix::zeros(n, n);
        for k in 0..n {
            let mut p = flat.clone();
            let mut m = flat.clone();
            p[k] += eps;
            m[k] -= eps;
            let fp = step_global(deep, x, &GlobalState::from_flat(deep, &p).unwrap())
                .unwrap()
                .flatten();
            let fm = step_global(deep, x, &GlobalState::from_flat(deep, &m).unwrap())
                .unwrap()
                .flatten();
            for i in 0..n {
                j[(i, k)] = (fp[i] - fm[i]) / (2.0 * eps);
            }
        }
        j
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let deep = stack(&ResidualKind::ALL, 6, 0.3, 1);
        let mut rng = RngStream::new(2);
        let s = GlobalState::random(&deep, -1.0, 1.0, &mut rng);
        let x = [0.4, -0.2];
        let j = global_jacobian(&deep, &x, &s).unwrap();
        let fd = central_difference(&deep, &x, &s, 1e-6);
        assert!(j.sub(&fd).unwrap().max_abs() < 1e-7);
    }

    #[test]
    fn jacobian_is_block_lower_triangular() {
        let deep = stack(&[ResidualKind::Cyclic; 3], 4, 0.1, 3);
        let s = GlobalState::random(&deep, -1.0, 1.0, &mut RngStream::new(4));
        let j = global_jacobian(&deep, &[0.1, 0.2], &s).unwrap();
        for bi in 0..3 {
            for bj in bi + 1..3 {
                assert_eq!(j.block(bi * 4, bj * 4, 4, 4).max_abs(), 0.0);
            }
        }
        assert!(j.block(8, 0, 4, 4).max_abs() > 0.0);
    }

    #[test]
    fn origin_radius_is_max_of_layer_radii() {
        let deep = stack(
            &[ResidualKind::RandomOrthogonal, ResidualKind::Identity],
            8,
            0.0,
            5,
        );
        let zero = GlobalState::zeros(&deep);
        let j = global_jacobian(&deep, &[0.0, 0.0], &zero).unwrap();
        let esp = necessary_esp(&deep).unwrap();
        assert!((spectral_radius(&j).unwrap() - esp.global_radius).abs() < 1e-9);
        assert_eq!(esp.layer_radii.len(), 2);
        let probe = eigenspectrum_report(&deep, Probe::Origin, &mut RngStream::new(0)).unwrap();
        for (p, r) in probe.iter().zip(&esp.layer_radii) {
            assert!((p.max_modulus() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_layer_radius_is_alpha_plus_beta_rho() {
        // O = I commutes with W_h, so the eigenvalues shift exactly
        let deep = stack(&[ResidualKind::Identity], 10, 0.0, 6);
        let esp = necessary_esp(&deep).unwrap();
        let l = &deep.layers()[0];
        let lambdas = eigenvalues(l.w_h()).unwrap();
        let expected = lambdas
            .iter()
            .map(|z| (z * l.beta() + l.alpha()).norm())
            .fold(0.0, f64::max);
        assert!((esp.global_radius - expected).abs() < 1e-10);
    }

    #[test]
    fn contraction_bound_holds_and_targets_are_met() {
        let deep = stack(&ResidualKind::ALL, 10, 0.2, 7);
        let mut rng = RngStream::new(8);
        for target in [0.5, 0.8, 0.95] {
            let tuned = with_target_contraction(&deep, target).unwrap();
            let coeffs = contraction_coefficients(&tuned).unwrap();
            assert!(coeffs.iter().all(|c| (c - target).abs() < 1e-12));
            let worst = max_contraction_ratio(&tuned, 200, 1.0, &mut rng).unwrap();
            assert!(worst <= target + 1e-12, "{worst} > {target}");
        }
        assert!(with_target_contraction(&deep, 0.3).is_err());
    }

    #[test]
    fn esp_trace_decays_under_contraction() {
        let deep =
            with_target_contraction(&stack(&[ResidualKind::Cyclic; 2], 8, 0.1, 9), 0.8).unwrap();
        let mut rng = RngStream::new(10);
        let a = GlobalState::random(&deep, -1.0, 1.0, &mut rng);
        let b = GlobalState::random(&deep, -1.0, 1.0, &mut rng);
        let u = Matrix::from_fn(200, 2, |t, j| ((t + 7 * j) as f64 * 0.3).sin());
        let trace = esp_convergence_test(&deep, &u, &a, &b).unwrap();
        assert_eq!(trace.distances.len(), 201);
        assert!(trace.within_bound(0.8, 1e-9));
        assert!(trace.steps_to(1e-8).is_some());
    }

    #[test]
    fn report_and_csv() {
        let deep = stack(&[ResidualKind::Cyclic, ResidualKind::Cyclic], 5, 0.0, 11);
        let rep = StabilityReport::compute(&deep).unwrap();
        assert_eq!(rep.layer_contraction.len(), 2);
        assert_eq!(rep.contractive, rep.global_contraction < 1.0);
        let dir = tempfile::tempdir().unwrap();
        rep.write_json(&dir.path().join("s.json")).unwrap();
        let eig = eigenspectrum_report(&deep, Probe::Random { scale: 1.0 }, &mut RngStream::new(1))
            .unwrap();
        let path = dir.path().join("e.csv");
        write_eigen_csv(&eig, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 10);
        assert!(text.starts_with("re,im,layer"));
    }

    #[test]
    fn block_spectra_cover_the_global_spectrum() {
        let deep = stack(
            &[
                ResidualKind::Cyclic,
                ResidualKind::RandomOrthogonal,
                ResidualKind::Identity,
            ],
            8,
            0.3,
            12,
        );
        let mut rng = RngStream::new(4);
        let state = GlobalState::random(&deep, -1.0, 1.0, &mut rng);
        let x = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
        let key = |z: &Complex64| (z.norm(), z.im.abs());
        let mut blocks: Vec<(f64, f64)> = eigenspectrum_at(&deep, &x, &state)
            .unwrap()
            .iter()
            .flat_map(|l| l.eigenvalues.iter().map(key).collect::<Vec<_>>())
            .collect();
        let j = global_jacobian(&deep, &x, &state).unwrap();
        let mut global: Vec<(f64, f64)> = eigenvalues(&j).unwrap().iter().map(key).collect();
        blocks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        global.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(blocks.len(), global.len());
        for (a, b) in blocks.iter().zip(&global) {
            assert!(
                (a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8,
                "{a:?} vs {b:?}"
            );
        }
    }
}
