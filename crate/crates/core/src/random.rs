//! Seeded random sampling of algebra elements, module elements, operators
//! and kernels. Used by the self-test suites, the examples and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::dense::{CMatrix, C64};
use crate::kernel::{self, AlgebraFamily, KernelSample, PointFamily};
use crate::module::{ModuleElement, ModuleOperator};

/// Deterministic sampler over a ChaCha stream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    /// Standard complex Gaussian scaled to unit variance.
    pub fn complex(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex())
    }

    pub fn unitary(&mut self, n: usize) -> CMatrix {
        self.matrix(n, n).qr().q()
    }

    /// Random positive semidefinite `n×n` matrix of the given rank.
    pub fn psd_matrix(&mut self, n: usize, rank: usize) -> CMatrix {
        let f = self.matrix(n, rank);
        &f * f.adjoint()
    }

    /// A shape with `Σ d_j ≤ max_size` and blocks of size at most `max_block`.
    pub fn shape(&mut self, max_size: usize, max_block: usize) -> AlgebraShape {
        let mut dims = Vec::new();
        let mut used = 0;
        loop {
            let room = (max_size - used).min(max_block);
            let d = 1 + self.index(room);
            dims.push(d);
            used += d;
            if used >= max_size || self.coin() {
                break;
            }
        }
        AlgebraShape::new(dims).expect("nonempty shape with positive blocks")
    }

    pub fn algebra_element(&mut self, shape: &AlgebraShape) -> AlgebraElement {
        let blocks = shape.block_dims().iter().map(|&d| self.matrix(d, d)).collect();
        AlgebraElement::from_blocks(shape, blocks).expect("block sizes match shape")
    }

    pub fn hermitian_element(&mut self, shape: &AlgebraShape) -> AlgebraElement {
        let a = self.algebra_element(shape);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    pub fn unitary_element(&mut self, shape: &AlgebraShape) -> AlgebraElement {
        let blocks = shape.block_dims().iter().map(|&d| self.unitary(d)).collect();
        AlgebraElement::from_blocks(shape, blocks).expect("block sizes match shape")
    }

    /// Real diagonal element (self-adjoint and commuting with all others of its kind).
    pub fn real_diagonal_element(&mut self, shape: &AlgebraShape) -> AlgebraElement {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&d| {
                let mut m = CMatrix::zeros(d, d);
                for i in 0..d {
                    m[(i, i)] = C64::new(self.normal(), 0.0);
                }
                m
            })
            .collect();
        AlgebraElement::from_blocks(shape, blocks).expect("block sizes match shape")
    }

    pub fn module_element(&mut self, shape: &AlgebraShape, rank: usize) -> ModuleElement {
        let coords = (0..rank).map(|_| self.algebra_element(shape)).collect();
        ModuleElement::new(coords).expect("coordinates share a shape")
    }

    pub fn module_operator(&mut self, shape: &AlgebraShape, rank: usize) -> ModuleOperator {
        let entries = (0..rank * rank).map(|_| self.algebra_element(shape)).collect();
        ModuleOperator::from_entries(shape, rank, entries).expect("entries share a shape")
    }

    pub fn hermitian_operator(&mut self, shape: &AlgebraShape, rank: usize) -> ModuleOperator {
        let t = self.module_operator(shape, rank);
        (&t + &t.adjoint()).scale_real(0.5)
    }

    /// A unitary in `M_k(A)`, drawn blockwise in the faithful representation.
    pub fn unitary_operator(&mut self, shape: &AlgebraShape, rank: usize) -> ModuleOperator {
        let blocks: Vec<CMatrix> = shape.block_dims().iter().map(|&d| self.unitary(rank * d)).collect();
        ModuleOperator::from_block_matrices(shape, rank, &blocks).expect("block sizes match")
    }

    pub fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("s{i}")).collect()
    }

    pub fn point_family(&mut self, shape: &AlgebraShape, rank: usize, labels: &[String]) -> PointFamily {
        let mut f = PointFamily::new();
        for l in labels {
            f.insert(l.clone(), self.module_element(shape, rank))
                .expect("fresh labels share a shape");
        }
        f
    }

    pub fn algebra_family(&mut self, shape: &AlgebraShape, labels: &[String]) -> AlgebraFamily {
        labels
            .iter()
            .map(|l| (l.clone(), self.algebra_element(shape)))
            .collect()
    }

    /// `K(s,t) = Σ_p W_p(t) W_p(s)*` for `factors` random operator families.
    pub fn gram_kernel(&mut self, shape: &AlgebraShape, rank: usize, n: usize, factors: usize) -> KernelSample {
        let labels = Self::labels(n);
        let fams: Vec<Vec<ModuleOperator>> = (0..factors)
            .map(|_| (0..n).map(|_| self.module_operator(shape, rank)).collect())
            .collect();
        kernel::gen_gram(&labels, &fams).expect("consistent factors")
    }

    /// Draws one of the four generator families at random. The left
    /// multiplication and scaled-family generators always produce rank-one
    /// modules, so `rank` only applies to the other two.
    pub fn generated_pd_kernel(&mut self, shape: &AlgebraShape, rank: usize, n: usize) -> KernelSample {
        let family = self.index(4);
        self.pd_kernel_from(family, shape, rank, n)
    }

    /// `family`: 0 rank-one, 1 left multiplication by a Gram matrix,
    /// 2 scalar lift, 3 scaled algebra family.
    pub fn pd_kernel_from(&mut self, family: usize, shape: &AlgebraShape, rank: usize, n: usize) -> KernelSample {
        let labels = Self::labels(n);
        match family % 4 {
            0 => {
                let f = self.point_family(shape, rank, &labels);
                kernel::gen_rank_one(&f, &labels).expect("family covers labels")
            }
            1 => {
                let m = 1 + self.index(3);
                let f = self.point_family(shape, m, &labels);
                kernel::gen_left_mult_gram(&f, &labels).expect("family covers labels")
            }
            2 => {
                let r = 1 + self.index(n);
                let kappa = self.psd_matrix(n, r);
                kernel::gen_scalar_lift(&kappa, &labels, shape, rank, &Default::default())
                    .expect("psd kappa")
            }
            _ => {
                let r = 1 + self.index(n);
                let kappa = self.psd_matrix(n, r);
                let a = self.algebra_family(shape, &labels);
                kernel::gen_scaled_family(&kappa, &a, &labels, &Default::default()).expect("psd kappa")
            }
        }
    }

    /// A conditionally negative definite kernel built from the additive,
    /// distance and negated-Gram families.
    pub fn cnd_kernel(&mut self, shape: &AlgebraShape, rank: usize, n: usize) -> KernelSample {
        let labels = Self::labels(n);
        let c: Vec<ModuleOperator> = (0..n).map(|_| self.module_operator(shape, rank)).collect();
        let mut l = kernel::gen_additive(&labels, &c).expect("consistent operators");
        if self.coin() || n < 3 {
            let x = self.commuting_self_adjoint_family(shape, rank, n);
            let d = kernel::gen_distance(&labels, &x).expect("consistent operators");
            l = l.checked_add(&d).expect("same layout");
        }
        if self.coin() {
            let g = self.gram_kernel(shape, rank, n, 1);
            l = l.checked_sub(&g.scale_real(self.uniform(0.2, 1.0))).expect("same layout");
        }
        l
    }

    /// Operators `X_i = W D_i W*` with `W` unitary and `D_i` real diagonal, so
    /// every `X_i* X_j` is self-adjoint.
    pub fn commuting_self_adjoint_family(
        &mut self,
        shape: &AlgebraShape,
        rank: usize,
        n: usize,
    ) -> Vec<ModuleOperator> {
        let w = self.unitary_operator(shape, rank);
        (0..n)
            .map(|_| {
                let entries = (0..rank * rank)
                    .map(|idx| {
                        if idx / rank == idx % rank {
                            self.real_diagonal_element(shape)
                        } else {
                            AlgebraElement::zeros(shape)
                        }
                    })
                    .collect();
                let d = ModuleOperator::from_entries(shape, rank, entries).expect("square");
                &(&w * &d) * &w.adjoint()
            })
            .collect()
    }

    /// Sums of distance kernels: normalized, symmetric, CND, self-adjoint values.
    pub fn normalized_symmetric_cnd_kernel(&mut self, shape: &AlgebraShape, rank: usize, n: usize) -> KernelSample {
        let labels = Self::labels(n);
        let x = self.commuting_self_adjoint_family(shape, rank, n);
        let mut l = kernel::gen_distance(&labels, &x).expect("consistent operators");
        if self.coin() {
            let y = self.commuting_self_adjoint_family(shape, rank, n);
            l = l
                .checked_add(&kernel::gen_distance(&labels, &y).expect("consistent"))
                .expect("same layout");
        }
        l
    }
}
