//! The scenario catalog: lasso, group lasso and nuclear-norm setups at full and desk scale.
//!
//! Each scenario fixes a design (drawn once from its seed) and redraws only the noise per
//! replicate. Desk variants carry the suffix `-desk` and shrink the larger dimensions by
//! roughly 5 to 50; scenarios that are already small keep their dimensions.

use kacrice::{Covariance, GroupSpec, NuclearOp, PenaltySpec, Problem, Response};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{HarnessError, Result};
use crate::noise::Noise;

/// Stream reserved for drawing a scenario's fixed design.
pub const DESIGN_STREAM: u64 = u64::MAX;

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lasso,
    Group,
    Nuclear,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Lasso => "lasso",
            Family::Group => "group",
            Family::Nuclear => "nuclear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignRecipe {
    /// Rows drawn from a compound symmetric Gaussian with correlation `rho`.
    CompoundSymmetric { n: usize, p: usize, rho: f64 },
    /// Lower triangular matrix of ones.
    LowerTriangular(usize),
    /// Synthetic 442×10 stand-in for the diabetes data.
    DiabetesSurrogate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    SqrtSize,
    Fixed(Vec<f64>),
    /// `1 + spread·Unif(0,1)`, drawn once with the design.
    Jittered { spread: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NestedWeights {
    FavorLarge,
    FavorSmall,
    SqrtSize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskPattern {
    /// Uniformly random subset holding this fraction of the entries.
    Random(f64),
    /// Entry `(i, j)` observed iff `j ≤ i`.
    Staircase,
    /// Entry `(i, j)` observed iff `|i − 2j| ≤ 2`.
    Band,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// A fully specified problem; its response is replaced on every replicate.
    Fixed(Box<Problem>),
    LassoSmall,
    Lasso(DesignRecipe),
    GroupSmall,
    Group {
        design: DesignRecipe,
        sizes: Vec<usize>,
        weights: Weights,
    },
    /// `sets` pairs of groups; in each pair the small group's column space sits
    /// inside the large group's.
    Nested {
        n: usize,
        sets: usize,
        large: usize,
        small: usize,
        weights: NestedWeights,
    },
    Pca { n: usize, p: usize },
    Completion { n: usize, p: usize, pattern: MaskPattern },
    ReducedRank { m: usize, n: usize, p: usize, rho: f64 },
}

impl Recipe {
    pub fn family(&self) -> Family {
        match self {
            Recipe::Fixed(p) => match p.penalty {
                PenaltySpec::Lasso => Family::Lasso,
                PenaltySpec::Group(_) => Family::Group,
                PenaltySpec::Nuclear(_) => Family::Nuclear,
            },
            Recipe::LassoSmall | Recipe::Lasso(_) => Family::Lasso,
            Recipe::GroupSmall | Recipe::Group { .. } | Recipe::Nested { .. } => Family::Group,
            Recipe::Pca { .. } | Recipe::Completion { .. } | Recipe::ReducedRank { .. } => Family::Nuclear,
        }
    }

    /// The problem with a zero response, design drawn from `rng`.
    pub fn template(&self, rng: &mut ChaCha8Rng, sigma2: f64) -> Problem {
        let cov = Covariance::Scaled(sigma2);
        match self {
            Recipe::Fixed(p) => (**p).clone(),
            Recipe::LassoSmall => {
                let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
                Problem::lasso(x, DVector::zeros(3), cov)
            }
            Recipe::Lasso(d) => {
                let x = d.draw(rng);
                let n = x.nrows();
                Problem::lasso(x, DVector::zeros(n), cov)
            }
            Recipe::GroupSmall => {
                let base = DMatrix::from_fn(3, 4, |i, j| (4 * i + j + 1) as f64);
                let x = base + gaussian(rng, 3, 4) * 0.1;
                let spec = GroupSpec {
                    groups: vec![vec![0, 1], vec![2, 3]],
                    weights: vec![2f64.sqrt(), 0.1],
                };
                Problem::group(x, DVector::zeros(3), cov, spec)
            }
            Recipe::Group { design, sizes, weights } => {
                let x = design.draw(rng);
                let n = x.nrows();
                let w = match weights {
                    Weights::SqrtSize => sizes.iter().map(|&s| (s as f64).sqrt()).collect(),
                    Weights::Fixed(w) => w.clone(),
                    Weights::Jittered { spread } => sizes.iter().map(|_| 1.0 + spread * rng.random::<f64>()).collect(),
                };
                Problem::group(x, DVector::zeros(n), cov, GroupSpec::consecutive(sizes, w))
            }
            Recipe::Nested { n, sets, large, small, weights } => {
                let mut cols = Vec::new();
                let mut sizes = Vec::new();
                let mut w = Vec::new();
                let (wl, ws) = match weights {
                    NestedWeights::FavorLarge => (0.7 * (*large as f64).sqrt(), (*small as f64).sqrt()),
                    NestedWeights::FavorSmall => ((*large as f64).sqrt(), 0.7 * (*small as f64).sqrt()),
                    NestedWeights::SqrtSize => ((*large as f64).sqrt(), (*small as f64).sqrt()),
                };
                for _ in 0..*sets {
                    let z = gaussian(rng, *n, *large);
                    let inner = &z * gaussian(rng, *large, *small);
                    cols.extend(z.column_iter().map(|c| c.into_owned()));
                    cols.extend(inner.column_iter().map(|c| c.into_owned()));
                    sizes.extend([*large, *small]);
                    w.extend([wl, ws]);
                }
                let x = standardize(DMatrix::from_columns(&cols));
                Problem::group(x, DVector::zeros(*n), cov, GroupSpec::consecutive(&sizes, w))
            }
            Recipe::Pca { n, p } => Problem::nuclear(NuclearOp::Identity, (*n, *p), DMatrix::zeros(*n, *p), sigma2),
            Recipe::Completion { n, p, pattern } => {
                let entries = pattern.entries(rng, *n, *p);
                Problem::nuclear(NuclearOp::Mask(entries), (*n, *p), DMatrix::zeros(*n, *p), sigma2)
            }
            Recipe::ReducedRank { m, n, p, rho } => {
                let x = compound_symmetric(rng, *m, *n, *rho);
                Problem::nuclear(NuclearOp::MatMul(x), (*n, *p), DMatrix::zeros(*m, *p), sigma2)
            }
        }
    }
}

impl DesignRecipe {
    fn draw(&self, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        match self {
            DesignRecipe::CompoundSymmetric { n, p, rho } => standardize(compound_symmetric(rng, *n, *p, *rho)),
            DesignRecipe::LowerTriangular(n) => {
                standardize(DMatrix::from_fn(*n, *n, |i, j| if j <= i { 1.0 } else { 0.0 }))
            }
            DesignRecipe::DiabetesSurrogate => diabetes_surrogate(),
        }
    }
}

impl MaskPattern {
    fn entries(&self, rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<(usize, usize)> {
        match self {
            MaskPattern::Random(frac) => {
                let k = ((frac * (n * p) as f64).round() as usize).clamp(1, n * p);
                let mut idx = sample(rng, n * p, k).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|t| (t / p, t % p)).collect()
            }
            MaskPattern::Staircase => (0..n).flat_map(|i| (0..p.min(i + 1)).map(move |j| (i, j))).collect(),
            MaskPattern::Band => (0..n)
                .flat_map(|i| (0..p).filter(move |&j| (i as i64 - 2 * j as i64).abs() <= 2).map(move |j| (i, j)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub recipe: Recipe,
    pub noise: Noise,
    /// Noise variance; the covariance is `sigma2·I`.
    pub sigma2: f64,
    /// True coefficients (column-major for matrix problems); `None` is the global null.
    pub beta0: Option<DVector<f64>>,
    pub replicates: usize,
    pub seed: u64,
    /// Set when the design is a synthetic stand-in for a real data set.
    pub surrogate: bool,
}

impl Scenario {
    pub fn new(id: impl Into<String>, recipe: Recipe) -> Self {
        Scenario {
            id: id.into(),
            recipe,
            noise: Noise::Gaussian,
            sigma2: 1.0,
            beta0: None,
            replicates: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
            surrogate: false,
        }
    }

    pub fn family(&self) -> Family {
        self.recipe.family()
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_beta0(mut self, beta0: DVector<f64>) -> Self {
        self.beta0 = Some(beta0);
        self
    }

    /// `beta0 = value·e_index`.
    pub fn with_sparse_signal(self, index: usize, value: f64) -> Result<Self> {
        let k = self.template().num_coefficients();
        if index >= k {
            return Err(HarnessError::InvalidScenario(format!(
                "signal index {index} outside 0..{k}"
            )));
        }
        let mut b = DVector::zeros(k);
        b[index] = value;
        Ok(self.with_beta0(b))
    }

    /// The fixed part of every replicate: design, penalty and covariance, zero response.
    pub fn template(&self) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(DESIGN_STREAM);
        self.recipe.template(&mut rng, self.sigma2)
    }

    /// Noise-free response `X(β₀)`, shaped like the response.
    pub fn mean_response(&self, template: &Problem) -> Result<Response> {
        let k = template.num_coefficients();
        let beta = match &self.beta0 {
            None => None,
            Some(b) if b.len() == k => Some(b),
            Some(b) => {
                return Err(HarnessError::InvalidScenario(format!(
                    "beta0 has length {}, the problem has {k} coefficients",
                    b.len()
                )))
            }
        };
        Ok(match (&template.penalty, &template.response) {
            (PenaltySpec::Nuclear(spec), Response::Matrix(y)) => Response::Matrix(match beta {
                None => DMatrix::zeros(y.nrows(), y.ncols()),
                Some(b) => spec.forward(&DMatrix::from_column_slice(spec.shape.0, spec.shape.1, b.as_slice())),
            }),
            (_, Response::Vector(y)) => Response::Vector(match (beta, &template.design) {
                (Some(b), Some(x)) => x * b,
                _ => DVector::zeros(y.len()),
            }),
            (_, Response::Matrix(_)) => {
                return Err(HarnessError::InvalidScenario("matrix response without a nuclear penalty".into()))
            }
        })
    }

    /// One simulated response: mean plus `σ·ε`, with `ε` drawn entrywise from the noise model.
    pub fn draw_response(&self, mean: &Response, rng: &mut ChaCha8Rng) -> Response {
        let sigma = self.sigma2.sqrt();
        match mean {
            Response::Vector(m) => Response::Vector(m.map(|v| v + sigma * self.noise.draw(rng))),
            Response::Matrix(m) => Response::Matrix(m.map(|v| v + sigma * self.noise.draw(rng))),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn compound_symmetric(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> DMatrix<f64> {
    let shared: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let (a, b) = ((1.0 - rho).sqrt(), rho.sqrt());
    let z = gaussian(rng, n, p);
    DMatrix::from_fn(n, p, |i, j| a * z[(i, j)] + b * shared[i])
}

/// Columns scaled to unit Euclidean norm.
pub fn standardize(mut x: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in x.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    x
}

/// Approximate correlations of the ten diabetes covariates
/// (age, sex, bmi, bp, s1..s6), upper triangle by rows.
#[allow(clippy::approx_constant)]
const DIABETES_CORR: [f64; 45] = [
    0.174, 0.185, 0.335, 0.260, 0.219, -0.075, 0.204, 0.271, 0.302, //
    0.088, 0.241, 0.035, 0.143, -0.379, 0.332, 0.150, 0.208, //
    0.395, 0.250, 0.261, -0.367, 0.414, 0.446, 0.389, //
    0.242, 0.186, -0.179, 0.258, 0.393, 0.390, //
    0.897, 0.052, 0.542, 0.516, 0.326, //
    -0.196, 0.660, 0.318, 0.291, //
    -0.738, -0.399, -0.274, //
    0.618, 0.417, //
    0.465,
];

const DIABETES_SEED: u64 = 442;

/// Fixed 442×10 Gaussian design with the diabetes correlation structure, centered
/// and scaled to unit-norm columns. Independent of the scenario seed.
pub fn diabetes_surrogate() -> DMatrix<f64> {
    let mut corr = DMatrix::identity(10, 10);
    let mut k = 0;
    for i in 0..10 {
        for j in i + 1..10 {
            corr[(i, j)] = DIABETES_CORR[k];
            corr[(j, i)] = DIABETES_CORR[k];
            k += 1;
        }
    }
    let l = corr.cholesky().expect("diabetes correlation matrix is positive definite").l();
    let mut rng = ChaCha8Rng::seed_from_u64(DIABETES_SEED);
    let mut x = gaussian(&mut rng, 442, 10) * l.transpose();
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    standardize(x)
}

fn cs(n: usize, p: usize) -> DesignRecipe {
    DesignRecipe::CompoundSymmetric { n, p, rho: 0.5 }
}

fn groups_of(size: usize, count: usize) -> Vec<usize> {
    vec![size; count]
}

/// Every catalog entry, full scale followed by its desk variant.
pub fn scenario_catalog() -> Vec<Scenario> {
    let mut out = Vec::new();
    let mut pair = |id: &str, full: Recipe, desk: Recipe, surrogate: bool| {
        let mut a = Scenario::new(id, full);
        let mut b = Scenario::new(format!("{id}-desk"), desk);
        a.surrogate = surrogate;
        b.surrogate = surrogate;
        out.push(a);
        out.push(b);
    };

    pair("lasso-small", Recipe::LassoSmall, Recipe::LassoSmall, false);
    pair("lasso-fat", Recipe::Lasso(cs(100, 10_000)), Recipe::Lasso(cs(20, 1000)), false);
    pair("lasso-tall", Recipe::Lasso(cs(10_000, 100)), Recipe::Lasso(cs(1000, 10)), false);
    pair(
        "lasso-lowertri",
        Recipe::Lasso(DesignRecipe::LowerTriangular(500)),
        Recipe::Lasso(DesignRecipe::LowerTriangular(50)),
        false,
    );
    let diabetes = Recipe::Lasso(DesignRecipe::DiabetesSurrogate);
    pair("lasso-diabetes", diabetes.clone(), diabetes, true);

    pair("group-small", Recipe::GroupSmall, Recipe::GroupSmall, false);
    let grouped = |n, p, size| Recipe::Group {
        design: cs(n, p),
        sizes: groups_of(size, p / size),
        weights: Weights::SqrtSize,
    };
    pair("group-fat", grouped(100, 10_000, 10), grouped(20, 200, 10), false);
    pair("group-tall", grouped(10_000, 100, 10), grouped(1000, 20, 10), false);
    pair("group-square", grouped(100, 100, 10), grouped(20, 20, 10), false);
    let diabetes1 = Recipe::Group {
        design: DesignRecipe::DiabetesSurrogate,
        sizes: vec![4, 2, 3, 1],
        weights: Weights::Fixed(vec![2.0, 1.2, 1.8, 0.9]),
    };
    pair("group-diabetes1", diabetes1.clone(), diabetes1, true);
    let diabetes2 = Recipe::Group {
        design: DesignRecipe::DiabetesSurrogate,
        sizes: groups_of(1, 10),
        weights: Weights::Jittered { spread: 0.2 },
    };
    pair("group-diabetes2", diabetes2.clone(), diabetes2, true);
    let nested = |n, sets, large, weights| Recipe::Nested { n, sets, large, small: 2, weights };
    pair(
        "group-nested1",
        nested(100, 1, 8, NestedWeights::FavorLarge),
        nested(20, 1, 8, NestedWeights::FavorLarge),
        false,
    );
    pair(
        "group-nested2",
        nested(100, 1, 8, NestedWeights::FavorSmall),
        nested(20, 1, 8, NestedWeights::FavorSmall),
        false,
    );
    pair(
        "group-nested3",
        nested(100, 2, 4, NestedWeights::SqrtSize),
        nested(20, 2, 4, NestedWeights::SqrtSize),
        false,
    );
    pair(
        "group-nested4",
        nested(100, 20, 4, NestedWeights::SqrtSize),
        nested(20, 4, 4, NestedWeights::SqrtSize),
        false,
    );

    let pca = |n, p| Recipe::Pca { n, p };
    for ((n, p), (dn, dp)) in [
        ((2, 2), (2, 2)),
        ((3, 4), (3, 4)),
        ((50, 50), (10, 10)),
        ((100, 20), (20, 4)),
        ((30, 1000), (3, 100)),
        ((30, 5), (30, 5)),
        ((1000, 1000), (20, 20)),
    ] {
        pair(&format!("pca-{n}x{p}"), pca(n, p), pca(dn, dp), false);
    }

    let mc = |n, p, pattern| Recipe::Completion { n, p, pattern };
    pair(
        "mc-10x5-random50",
        mc(10, 5, MaskPattern::Random(0.5)),
        mc(10, 5, MaskPattern::Random(0.5)),
        false,
    );
    pair(
        "mc-100x30-random20",
        mc(100, 30, MaskPattern::Random(0.2)),
        mc(20, 6, MaskPattern::Random(0.2)),
        false,
    );
    pair(
        "mc-10x5-staircase",
        mc(10, 5, MaskPattern::Staircase),
        mc(10, 5, MaskPattern::Staircase),
        false,
    );
    pair("mc-20x10-band", mc(20, 10, MaskPattern::Band), mc(20, 10, MaskPattern::Band), false);
    pair(
        "mc-200x10-random10",
        mc(200, 10, MaskPattern::Random(0.1)),
        mc(40, 5, MaskPattern::Random(0.1)),
        false,
    );

    pair(
        "rrr-100x10",
        Recipe::ReducedRank { m: 100, n: 10, p: 5, rho: 0.5 },
        Recipe::ReducedRank { m: 20, n: 10, p: 5, rho: 0.5 },
        false,
    );
    out
}

pub fn find_scenario(id: &str) -> Result<Scenario> {
    scenario_catalog()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| HarnessError::UnknownScenario(id.to_string()))
}

/// Desk-scale scenarios of one family, in catalog order.
pub fn desk_scenarios(family: Family) -> Vec<Scenario> {
    scenario_catalog()
        .into_iter()
        .filter(|s| s.id.ends_with("-desk") && s.family() == family)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lasso_small_design() {
        let t = find_scenario("lasso-small").unwrap().template();
        assert_eq!(
            t.design.unwrap(),
            DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        );
    }

    #[test]
    fn group_fat_desk_shape() {
        let t = find_scenario("group-fat-desk").unwrap().template();
        assert_eq!(t.design.as_ref().unwrap().shape(), (20, 200));
        match t.penalty {
            PenaltySpec::Group(g) => {
                assert_eq!(g.groups.len(), 20);
                assert!(g.groups.iter().all(|m| m.len() == 10));
                assert!(g.weights.iter().all(|&w| (w - 10f64.sqrt()).abs() < 1e-15));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pca_2x2_shape() {
        let t = find_scenario("pca-2x2").unwrap().template();
        assert_eq!(t.response.as_matrix().unwrap().shape(), (2, 2));
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(find_scenario("lasso-huge"), Err(HarnessError::UnknownScenario(_))));
    }

    #[test]
    fn every_scenario_has_a_desk_variant() {
        let cat = scenario_catalog();
        for s in cat.iter().filter(|s| !s.id.ends_with("-desk")) {
            assert!(cat.iter().any(|d| d.id == format!("{}-desk", s.id)), "{}", s.id);
        }
        assert_eq!(desk_scenarios(Family::Lasso).len(), 5);
        assert_eq!(desk_scenarios(Family::Group).len(), 10);
        assert_eq!(desk_scenarios(Family::Nuclear).len(), 13);
    }

    #[test]
    fn desk_templates_validate() {
        for s in scenario_catalog().into_iter().filter(|s| s.id.ends_with("-desk")) {
            s.template().validate().unwrap_or_else(|e| panic!("{}: {e}", s.id));
        }
    }

    #[test]
    fn design_is_fixed_by_seed() {
        let s = find_scenario("lasso-fat-desk").unwrap();
        assert_eq!(s.template(), s.template());
        assert_ne!(s.template(), s.clone().with_seed(2).template());
    }

    #[test]
    fn surrogate_is_flagged_and_standardized() {
        let s = find_scenario("lasso-diabetes").unwrap();
        assert!(s.surrogate);
        let x = diabetes_surrogate();
        assert_eq!(x.shape(), (442, 10));
        for c in x.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
            assert!(c.sum().abs() < 1e-12);
        }
        // the strongest pairing in the data, s1 with s2
        let r = x.column(4).dot(&x.column(5));
        assert!((r - 0.897).abs() < 0.05, "{r}");
    }

    #[test]
    fn nested_column_spaces() {
        let t = find_scenario("group-nested1-desk").unwrap().template();
        let x = t.design.unwrap();
        let big = x.columns(0, 8).into_owned();
        let small = x.columns(8, 2).into_owned();
        let coef = big.clone().svd(true, true).solve(&small, 1e-12).unwrap();
        assert!((&big * coef - small).abs().max() < 1e-10);
    }

    #[test]
    fn mask_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(MaskPattern::Random(0.5).entries(&mut rng, 10, 5).len(), 25);
        let stair = MaskPattern::Staircase.entries(&mut rng, 10, 5);
        assert!(stair.iter().all(|&(i, j)| j <= i));
        assert_eq!(stair.len(), 1 + 2 + 3 + 4 + 5 * 6);
        let band = MaskPattern::Band.entries(&mut rng, 20, 10);
        assert!((0..10).all(|j| band.iter().any(|&(_, c)| c == j)));
    }

    #[test]
    fn sparse_signal_mean() {
        let s = find_scenario("lasso-small").unwrap().with_sparse_signal(1, 2.0).unwrap();
        let t = s.template();
        match s.mean_response(&t).unwrap() {
            Response::Vector(m) => assert_eq!(m, DVector::from_vec(vec![4.0, 8.0, 12.0])),
            other => panic!("{other:?}"),
        }
        assert!(find_scenario("lasso-small").unwrap().with_sparse_signal(2, 1.0).is_err());
    }
}
