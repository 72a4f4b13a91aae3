//! A k-layer neural network assembled entirely in the function language.
//!
//! Each layer `gᵢ(xᵢ,Wᵢ,bᵢ) = ∏^⟨mᵢ⟩ h (Wᵢ ⋆ xᵢ + bᵢ)` is written
//! point-free; since every layer also has to hand the parameters of later
//! layers through, `gᵢ` is a fan-out whose first component computes the
//! activation and whose remaining components are projections. The network
//! is the composition of all layers followed by a squared-error loss, and
//! the gradient comes from the reverse affine interpreter — derived
//! backpropagation, no layer-specific derivative code anywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diff::gradient;
use crate::error::{Error, Result};
use crate::funterm::{fadd, fanout_fun, fsub, BilinOp, FunTerm, PrimOp};
use crate::linterm::derived;
use crate::spaces::{basis, IndexSet, SpaceTerm, TensorTerm, Vector};

/// Layer widths and activation of a fully connected network.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    /// `[m₀, m₁, …, m_k]`: input width, then one width per layer.
    pub dims: Vec<usize>,
    pub activation: PrimOp,
}

impl NetworkSpec {
    pub fn new(dims: Vec<usize>) -> Result<NetworkSpec> {
        if dims.len() < 2 {
            return Err(Error::dim("a network needs at least one layer"));
        }
        if dims.iter().any(|d| *d == 0) {
            return Err(Error::dim("layer widths must be at least 1"));
        }
        Ok(NetworkSpec {
            dims,
            activation: PrimOp::Tanh,
        })
    }

    pub fn with_activation(mut self, activation: PrimOp) -> NetworkSpec {
        self.activation = activation;
        self
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    fn vec_space(&self, width: usize) -> SpaceTerm {
        SpaceTerm::rn(width)
    }

    /// Weight space of layer `i` (1-based): `∏^⟨mᵢ⟩ℝ ⊗ ∏^⟨mᵢ₋₁⟩ℝ`.
    pub fn weight_space(&self, i: usize) -> SpaceTerm {
        SpaceTerm::tensor(self.vec_space(self.dims[i]), self.vec_space(self.dims[i - 1]))
    }

    pub fn bias_space(&self, i: usize) -> SpaceTerm {
        self.vec_space(self.dims[i])
    }

    /// Domain of layer `i`: `(xᵢ₋₁, Wᵢ, bᵢ, Wᵢ₊₁, bᵢ₊₁, …, W_k, b_k, y)`.
    fn layer_domain(&self, i: usize) -> SpaceTerm {
        let mut comps = vec![
            self.vec_space(self.dims[i - 1]),
            self.weight_space(i),
            self.bias_space(i),
        ];
        for j in (i + 1)..=self.layer_count() {
            comps.push(self.weight_space(j));
            comps.push(self.bias_space(j));
        }
        comps.push(self.vec_space(*self.dims.last().unwrap()));
        SpaceTerm::Tuple(comps)
    }

    /// Domain of the whole network: `(x, W₁, b₁, …, W_k, b_k, y)`.
    pub fn network_domain(&self) -> SpaceTerm {
        self.layer_domain(1)
    }
}

/// Builds layer `i` (1-based) as a fan-out: the activation of
/// `Wᵢ ⋆ xᵢ + bᵢ` first, then projections threading the untouched
/// later-layer parameters and the target through.
pub fn build_layer(i: usize, spec: &NetworkSpec) -> Result<FunTerm> {
    if i == 0 || i > spec.layer_count() {
        return Err(Error::dim(format!("layer index {i} out of range")));
    }
    let dom = spec.layer_domain(i);
    let n_comps = dom.family_len().unwrap();
    let m_i = spec.dims[i];

    let wx = FunTerm::comp(
        FunTerm::Bilin(BilinOp::MatVec {
            rows: IndexSet::Seg(m_i),
            cols: IndexSet::Seg(spec.dims[i - 1]),
        }),
        FunTerm::Lin(crate::linterm::LinTerm::fanout(vec![
            crate::linterm::LinTerm::proj(dom.clone(), 1),
            crate::linterm::LinTerm::proj(dom.clone(), 0),
        ])),
    );
    let pre_activation = fadd(wx, FunTerm::proj(dom.clone(), 2))?;
    let activated = FunTerm::comp(
        FunTerm::pow_fun(IndexSet::Seg(m_i), FunTerm::Prim(spec.activation)),
        pre_activation,
    );

    let mut items = vec![activated];
    for j in 3..n_comps {
        items.push(FunTerm::proj(dom.clone(), j));
    }
    fanout_fun(items)
}

/// The squared-error loss `l(v,y) = (v−y) ⊙ (v−y)` in point-free form:
/// `(⊙) ∘ dup ∘ (π₁ − π₂)`.
pub fn build_loss(width: usize) -> FunTerm {
    let v = SpaceTerm::rn(width);
    let pair = SpaceTerm::pair(v.clone(), v.clone());
    let difference = fsub(FunTerm::proj(pair.clone(), 0), FunTerm::proj(pair, 1))
        .expect("projections share the pair domain");
    FunTerm::pipeline([
        difference,
        FunTerm::Lin(derived::dup(&v)),
        FunTerm::Bilin(BilinOp::Inner { space: v }),
    ])
    .unwrap()
}

/// The full network `N_k = l ∘ g_k ∘ ⋯ ∘ g₁`, a scalar-valued term on the
/// big parameter tuple.
pub fn build_network(spec: &NetworkSpec) -> Result<FunTerm> {
    let mut stages = Vec::with_capacity(spec.layer_count() + 1);
    for i in 1..=spec.layer_count() {
        stages.push(build_layer(i, spec)?);
    }
    stages.push(build_loss(*spec.dims.last().unwrap()));
    Ok(FunTerm::pipeline(stages).unwrap())
}

/// A concrete point of the network domain.
#[derive(Debug, Clone)]
pub struct ParamsPoint {
    pub x: Vector,
    pub weights: Vec<Vector>,
    pub biases: Vec<Vector>,
    pub y: Vector,
}

impl ParamsPoint {
    /// Packs the point into the tuple layout of [`NetworkSpec::network_domain`].
    pub fn to_vector(&self) -> Vector {
        let mut items = vec![self.x.clone()];
        for (w, b) in self.weights.iter().zip(&self.biases) {
            items.push(w.clone());
            items.push(b.clone());
        }
        items.push(self.y.clone());
        Vector::Tuple(items)
    }

    pub fn from_vector(spec: &NetworkSpec, v: &Vector) -> Result<ParamsPoint> {
        let items = v.family_items()?;
        let k = spec.layer_count();
        if items.len() != 2 * k + 2 {
            return Err(Error::shape(format!(
                "expected {} parameter components, got {}",
                2 * k + 2,
                items.len()
            )));
        }
        Ok(ParamsPoint {
            x: items[0].clone(),
            weights: (0..k).map(|i| items[1 + 2 * i].clone()).collect(),
            biases: (0..k).map(|i| items[2 + 2 * i].clone()).collect(),
            y: items[2 * k + 1].clone(),
        })
    }
}

/// Gradient of the network over the whole parameter tuple.
pub fn nn_gradient(spec: &NetworkSpec, p: &ParamsPoint) -> Result<Vector> {
    gradient(&build_network(spec)?, &p.to_vector())
}

/// Random parameters: weight rows and biases uniform in [-0.5, 0.5].
/// Weights are stored as formal sums `Σⱼ eⱼ ⊗ rowⱼ`.
pub fn init_params(spec: &NetworkSpec, rng: &mut ChaCha8Rng) -> (Vec<Vector>, Vec<Vector>) {
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for i in 1..=spec.layer_count() {
        let (rows, cols) = (spec.dims[i], spec.dims[i - 1]);
        let row_space = SpaceTerm::rn(rows);
        let terms = (0..rows)
            .map(|j| TensorTerm {
                coeff: 1.0,
                left: basis(&row_space, j).expect("basis row"),
                right: Vector::rn((0..cols).map(|_| rng.random_range(-0.5..=0.5))),
            })
            .collect();
        weights.push(Vector::Tensor {
            left: row_space,
            right: SpaceTerm::rn(cols),
            terms,
        });
        biases.push(Vector::rn(
            (0..rows).map(|_| rng.random_range(-0.5..=0.5)),
        ));
    }
    (weights, biases)
}

/// Result of a gradient-descent run.
#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Mean loss over the dataset at each step, measured before the update.
    pub trace: Vec<f64>,
    pub weights: Vec<Vector>,
    pub biases: Vec<Vector>,
}

/// Keeps a weight tensor's formal sum from growing across updates by
/// rebuilding it from coordinates (one term per nonzero row).
fn compact(v: &Vector) -> Result<Vector> {
    Vector::from_coords(&v.shape()?, &v.to_coords()?)
}

/// Plain full-batch gradient descent with a seeded initialization.
/// Only the weight and bias blocks of the gradient are applied; the
/// input and target blocks are ignored.
pub fn train(
    spec: &NetworkSpec,
    dataset: &[(Vector, Vector)],
    lr: f64,
    steps: usize,
    seed: u64,
) -> Result<TrainResult> {
    if dataset.is_empty() {
        return Err(Error::dim("training needs at least one sample"));
    }
    let network = build_network(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut weights, mut biases) = init_params(spec, &mut rng);
    let k = spec.layer_count();
    let mut trace = Vec::with_capacity(steps);

    for _ in 0..steps {
        let mut loss_sum = 0.0;
        let mut grad_w: Vec<Vector> = (1..=k)
            .map(|i| Vector::zero(&spec.weight_space(i)))
            .collect();
        let mut grad_b: Vec<Vector> = (1..=k)
            .map(|i| Vector::zero(&spec.bias_space(i)))
            .collect();

        for (x, y) in dataset {
            let point = ParamsPoint {
                x: x.clone(),
                weights: weights.clone(),
                biases: biases.clone(),
                y: y.clone(),
            };
            let packed = point.to_vector();
            loss_sum += crate::funterm::eval_fun(&network, &packed)?.to_coords()?[0];
            let g = ParamsPoint::from_vector(spec, &gradient(&network, &packed)?)?;
            for i in 0..k {
                grad_w[i] = grad_w[i].add(&g.weights[i])?;
                grad_b[i] = grad_b[i].add(&g.biases[i])?;
            }
        }

        let scale = -lr / dataset.len() as f64;
        for i in 0..k {
            weights[i] = compact(&weights[i].add(&grad_w[i].scale(scale))?)?;
            biases[i] = biases[i].add(&grad_b[i].scale(scale))?;
        }
        trace.push(loss_sum / dataset.len() as f64);
    }

    Ok(TrainResult {
        trace,
        weights,
        biases,
    })
}

/// Reads a plain numeric CSV: the first `in_dim` columns are inputs, the
/// last `out_dim` columns targets. Lines starting with `#` are skipped.
pub fn load_dataset(text: &str, in_dim: usize, out_dim: usize) -> Result<Vec<(Vector, Vector)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::dim(format!("line {}: {e}", lineno + 1)))?;
        if fields.len() != in_dim + out_dim {
            return Err(Error::dim(format!(
                "line {}: expected {} columns, got {}",
                lineno + 1,
                in_dim + out_dim,
                fields.len()
            )));
        }
        out.push((
            Vector::rn(fields[..in_dim].iter().copied()),
            Vector::rn(fields[in_dim..].iter().copied()),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::adjoint;
    use crate::diff::{affine, vjp};
    use crate::funterm::eval_fun;
    use crate::linterm::apply;
    use crate::oracle::fd_jacobian;

    fn rank_rows(rows: Vec<Vec<f64>>) -> Vector {
        let m = rows.len();
        let n = rows[0].len();
        let row_space = SpaceTerm::rn(m);
        Vector::Tensor {
            left: row_space.clone(),
            right: SpaceTerm::rn(n),
            terms: rows
                .into_iter()
                .enumerate()
                .map(|(j, r)| TensorTerm {
                    coeff: 1.0,
                    left: basis(&row_space, j).unwrap(),
                    right: Vector::rn(r),
                })
                .collect(),
        }
    }

    fn one_layer_point(w: Vector, b: Vector, x: Vector, y: Vector) -> Vector {
        Vector::Tuple(vec![x, w, b, y])
    }

    #[test]
    fn identity_weights_pass_the_input_through() {
        // Identity activation (x¹), W = Σ eⱼ⊗eⱼ, b = 0.
        let spec = NetworkSpec::new(vec![2, 2]).unwrap().with_activation(PrimOp::Power(1));
        let g1 = build_layer(1, &spec).unwrap();
        let w = rank_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let x = Vector::rn([0.3, -0.7]);
        let point = one_layer_point(
            w,
            Vector::rn([0.0, 0.0]),
            x.clone(),
            Vector::rn([0.0, 0.0]),
        );
        let out = eval_fun(&g1, &point).unwrap();
        let comps = out.family_items().unwrap();
        assert!(comps[0].approx_eq(&x, 1e-12));
    }

    #[test]
    fn tanh_of_zero_preactivation_is_zero() {
        let spec = NetworkSpec::new(vec![2, 1]).unwrap();
        let g1 = build_layer(1, &spec).unwrap();
        let w = rank_rows(vec![vec![1.0, 1.0]]);
        let point = one_layer_point(
            w,
            Vector::rn([0.0]),
            Vector::rn([0.0, 0.0]),
            Vector::rn([0.0]),
        );
        let out = eval_fun(&g1, &point).unwrap();
        let comps = out.family_items().unwrap();
        assert_eq!(comps[0].to_coords().unwrap(), vec![0.0]);
    }

    #[test]
    fn layer_matches_a_direct_dense_computation() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let spec = NetworkSpec::new(vec![3, 2]).unwrap();
        let g1 = build_layer(1, &spec).unwrap();
        for _ in 0..5 {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let b: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();

            let point = one_layer_point(
                rank_rows(rows.clone()),
                Vector::rn(b.iter().copied()),
                Vector::rn(x.iter().copied()),
                Vector::rn([0.0, 0.0]),
            );
            let out = eval_fun(&g1, &point).unwrap();
            let got = out.family_items().unwrap()[0].to_coords().unwrap();

            let expect: Vec<f64> = rows
                .iter()
                .zip(&b)
                .map(|(row, bias)| {
                    (row.iter().zip(&x).map(|(w, xi)| w * xi).sum::<f64>() + bias).tanh()
                })
                .collect();
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_examples() {
        let l = build_loss(2);
        let same = Vector::tuple([Vector::rn([1.0, 2.0]), Vector::rn([1.0, 2.0])]);
        assert_eq!(eval_fun(&l, &same).unwrap().to_coords().unwrap(), vec![0.0]);

        let off = Vector::tuple([Vector::rn([1.0, 2.0]), Vector::rn([0.0, 0.0])]);
        assert_eq!(eval_fun(&l, &off).unwrap().to_coords().unwrap(), vec![5.0]);
    }

    #[test]
    fn gradient_with_respect_to_target_is_minus_twice_the_residual() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let spec = NetworkSpec::new(vec![2, 3, 1]).unwrap();
        let (weights, biases) = init_params(&spec, &mut rng);
        let p = ParamsPoint {
            x: Vector::rn([0.25, -0.5]),
            weights,
            biases,
            y: Vector::rn([0.3]),
        };
        // Network output v: evaluate all layers without the loss.
        let mut state = p.to_vector();
        for i in 1..=2 {
            state = eval_fun(&build_layer(i, &spec).unwrap(), &state).unwrap();
        }
        let v = state.family_items().unwrap()[0].clone();

        let grad = ParamsPoint::from_vector(&spec, &nn_gradient(&spec, &p).unwrap()).unwrap();
        let expect = v.sub(&p.y).unwrap().scale(-2.0);
        assert!(grad.y.approx_eq(&expect, 1e-10));
    }

    #[test]
    fn backprop_equals_adjoint_of_forward_derivative() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let spec = NetworkSpec::new(vec![2, 3, 1]).unwrap();
        let (weights, biases) = init_params(&spec, &mut rng);
        let p = ParamsPoint {
            x: Vector::rn([0.4, 0.1]),
            weights,
            biases,
            y: Vector::rn([-0.2]),
        };
        let network = build_network(&spec).unwrap();
        let packed = p.to_vector();

        let via_reverse = nn_gradient(&spec, &p).unwrap();
        let forward = affine(&network, &packed).unwrap().deriv;
        let via_adjoint = apply(&adjoint(&forward).unwrap(), &Vector::Scalar(1.0)).unwrap();
        let via_vjp = vjp(&network, &packed, &Vector::Scalar(1.0)).unwrap();

        assert!(via_reverse.approx_eq(&via_adjoint, 1e-10));
        assert!(via_reverse.approx_eq(&via_vjp, 1e-10));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let spec = NetworkSpec::new(vec![2, 3, 1]).unwrap();
        let network = build_network(&spec).unwrap();
        for _ in 0..3 {
            let (weights, biases) = init_params(&spec, &mut rng);
            let p = ParamsPoint {
                x: Vector::rn([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]),
                weights,
                biases,
                y: Vector::rn([rng.random_range(-1.0..1.0)]),
            };
            let grad = nn_gradient(&spec, &p).unwrap().to_coords().unwrap();
            let fd = fd_jacobian(&network, &p.to_vector(), 1e-4).unwrap();
            for (j, g) in grad.iter().enumerate() {
                let reference = fd.get(0, j);
                assert!(
                    (g - reference).abs() <= 1e-4 * (1.0 + reference.abs()),
                    "component {j}: {g} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn dense_and_formal_sum_weights_agree() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let spec = NetworkSpec::new(vec![2, 3, 1]).unwrap();
        let (weights, biases) = init_params(&spec, &mut rng);
        let network = build_network(&spec).unwrap();
        let p = ParamsPoint {
            x: Vector::rn([0.2, -0.3]),
            weights: weights.clone(),
            biases: biases.clone(),
            y: Vector::rn([0.1]),
        };
        let dense_weights = weights.iter().map(|w| compact(w).unwrap()).collect();
        let q = ParamsPoint {
            weights: dense_weights,
            ..p.clone()
        };
        let a = eval_fun(&network, &p.to_vector()).unwrap();
        let b = eval_fun(&network, &q.to_vector()).unwrap();
        assert!(a.approx_eq(&b, 1e-12));
    }

    #[test]
    fn zero_learning_rate_freezes_the_trace() {
        let data = vec![
            (Vector::rn([0.0, 0.5]), Vector::rn([0.2])),
            (Vector::rn([0.5, 0.0]), Vector::rn([-0.1])),
        ];
        let spec = NetworkSpec::new(vec![2, 2, 1]).unwrap();
        let result = train(&spec, &data, 0.0, 5, 7).unwrap();
        for w in &result.trace {
            assert!((w - result.trace[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn one_step_is_a_plain_gradient_update() {
        let data = vec![(Vector::rn([0.3, -0.2]), Vector::rn([0.1]))];
        let spec = NetworkSpec::new(vec![2, 2, 1]).unwrap();
        let seed = 11;
        let lr = 0.05;

        let result = train(&spec, &data, lr, 1, seed).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (weights, biases) = init_params(&spec, &mut rng);
        let p = ParamsPoint {
            x: data[0].0.clone(),
            weights: weights.clone(),
            biases: biases.clone(),
            y: data[0].1.clone(),
        };
        let g = ParamsPoint::from_vector(&spec, &nn_gradient(&spec, &p).unwrap()).unwrap();
        for i in 0..2 {
            let expect_w = weights[i].add(&g.weights[i].scale(-lr)).unwrap();
            assert!(result.weights[i].approx_eq(&expect_w, 1e-12));
            let expect_b = biases[i].add(&g.biases[i].scale(-lr)).unwrap();
            assert!(result.biases[i].approx_eq(&expect_b, 1e-12));
        }
    }

    #[test]
    fn short_training_run_reduces_the_loss() {
        let text = include_str!("../data/toy8.csv");
        let data = load_dataset(text, 2, 1).unwrap();
        let spec = NetworkSpec::new(vec![2, 4, 1]).unwrap();
        let result = train(&spec, &data, 0.1, 40, 42).unwrap();
        assert!(result.trace.last().unwrap() < &result.trace[0]);
    }
}
