//! Construction of equivariant polynomial vector fields with exact rational
//! coefficients: pointwise Hermite interpolation (values and Jacobians),
//! Reynolds symmetrization, prescribed commuting linearizations on a group
//! orbit, and the one-parameter Hopf family on a chosen H-simple subspace.
//!
//! Fields are affine in the bifurcation parameter: f(x, λ) = f0(x) + λ f1(x).

use crate::group::GroupElement;
use crate::linalg::{dot, rat_from_f64, rat_int, rat_to_f64, LinearSubspace, Mat, Rat};
use crate::representation::{one_dim_mode_vector, HSimpleWitness, PermAction, WitnessKind};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

type Monomial = Vec<u32>;

/// A polynomial map R^n x R -> R^n, affine in the scalar parameter, with
/// exact rational coefficients. Terms are kept sorted by multi-index with
/// zero coefficient vectors dropped, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    dim: usize,
    terms: BTreeMap<Monomial, Vec<Rat>>,
    parameter_terms: BTreeMap<Monomial, Vec<Rat>>,
}

fn prune(map: &mut BTreeMap<Monomial, Vec<Rat>>) {
    map.retain(|_, coeffs| coeffs.iter().any(|c| !c.is_zero()));
}

fn monomial_eval(exponents: &[u32], x: &[Rat]) -> Rat {
    let mut acc = Rat::one();
    for (&e, xi) in exponents.iter().zip(x) {
        for _ in 0..e {
            acc *= xi;
        }
    }
    acc
}

impl PolyVectorField {
    pub fn zero(dim: usize) -> Self {
        PolyVectorField {
            dim,
            terms: BTreeMap::new(),
            parameter_terms: BTreeMap::new(),
        }
    }

    /// The linear field x -> m x.
    pub fn linear(m: &Mat) -> Self {
        let dim = m.nrows();
        let mut out = PolyVectorField::zero(dim);
        for j in 0..dim {
            let mut mono = vec![0u32; dim];
            mono[j] = 1;
            let coeffs: Vec<Rat> = (0..dim).map(|i| m[(i, j)].clone()).collect();
            if coeffs.iter().any(|c| !c.is_zero()) {
                out.terms.insert(mono, coeffs);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .chain(self.parameter_terms.keys())
            .map(|m| m.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Vec<Rat>)> {
        self.terms.iter()
    }

    pub fn parameter_terms(&self) -> impl Iterator<Item = (&Monomial, &Vec<Rat>)> {
        self.parameter_terms.iter()
    }

    fn add_into(dst: &mut BTreeMap<Monomial, Vec<Rat>>, mono: Monomial, coeffs: &[Rat]) {
        let entry = dst
            .entry(mono)
            .or_insert_with(|| vec![Rat::zero(); coeffs.len()]);
        for (a, b) in entry.iter_mut().zip(coeffs) {
            *a += b;
        }
    }

    pub fn add(&self, other: &PolyVectorField) -> PolyVectorField {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            Self::add_into(&mut out.terms, m.clone(), c);
        }
        for (m, c) in &other.parameter_terms {
            Self::add_into(&mut out.parameter_terms, m.clone(), c);
        }
        prune(&mut out.terms);
        prune(&mut out.parameter_terms);
        out
    }

    pub fn scale(&self, s: &Rat) -> PolyVectorField {
        let mut out = self.clone();
        for c in out.terms.values_mut().chain(out.parameter_terms.values_mut()) {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
        prune(&mut out.terms);
        prune(&mut out.parameter_terms);
        out
    }

    /// Move every (constant) term into the parameter slot: λ * self.
    pub fn times_parameter(&self) -> PolyVectorField {
        assert!(
            self.parameter_terms.is_empty(),
            "field is already parameter-dependent"
        );
        PolyVectorField {
            dim: self.dim,
            terms: BTreeMap::new(),
            parameter_terms: self.terms.clone(),
        }
    }

    pub fn eval(&self, x: &[Rat], lambda: &Rat) -> Vec<Rat> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![Rat::zero(); self.dim];
        for (mono, coeffs) in &self.terms {
            let m = monomial_eval(mono, x);
            if m.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(coeffs) {
                *o += &m * c;
            }
        }
        if !lambda.is_zero() {
            for (mono, coeffs) in &self.parameter_terms {
                let m = monomial_eval(mono, x) * lambda;
                if m.is_zero() {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o += &m * c;
                }
            }
        }
        out
    }

    /// Exact analytic Jacobian at a point.
    pub fn jacobian(&self, x: &[Rat], lambda: &Rat) -> Mat {
        let mut jac = Mat::zeros(self.dim, self.dim);
        let mut accumulate = |mono: &Monomial, coeffs: &[Rat], weight: &Rat| {
            for j in 0..self.dim {
                if mono[j] == 0 {
                    continue;
                }
                let mut reduced = mono.clone();
                reduced[j] -= 1;
                let dm = monomial_eval(&reduced, x) * rat_int(mono[j] as i64) * weight;
                if dm.is_zero() {
                    continue;
                }
                for i in 0..self.dim {
                    if !coeffs[i].is_zero() {
                        let v = &jac[(i, j)] + &dm * &coeffs[i];
                        jac[(i, j)] = v;
                    }
                }
            }
        };
        let one = Rat::one();
        for (mono, coeffs) in &self.terms {
            accumulate(mono, coeffs, &one);
        }
        if !lambda.is_zero() {
            for (mono, coeffs) in &self.parameter_terms {
                accumulate(mono, coeffs, lambda);
            }
        }
        jac
    }

    /// Derivative of the field with respect to the parameter (a field with
    /// no parameter part).
    pub fn d_dlambda(&self) -> PolyVectorField {
        PolyVectorField {
            dim: self.dim,
            terms: self.parameter_terms.clone(),
            parameter_terms: BTreeMap::new(),
        }
    }

    /// Fixed-precision form for the integrator.
    pub fn compile(&self) -> CompiledField {
        let pack = |map: &BTreeMap<Monomial, Vec<Rat>>| -> Vec<(Monomial, Vec<f64>)> {
            map.iter()
                .map(|(m, c)| (m.clone(), c.iter().map(rat_to_f64).collect()))
                .collect()
        };
        CompiledField {
            dim: self.dim,
            terms: pack(&self.terms),
            parameter_terms: pack(&self.parameter_terms),
        }
    }
}

/// f64 evaluation form used by the integrator.
#[derive(Clone, Debug)]
pub struct CompiledField {
    dim: usize,
    terms: Vec<(Monomial, Vec<f64>)>,
    parameter_terms: Vec<(Monomial, Vec<f64>)>,
}

impl CompiledField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) {
        out.fill(0.0);
        for (mono, coeffs) in &self.terms {
            let mut m = 1.0;
            for (&e, &xi) in mono.iter().zip(x) {
                for _ in 0..e {
                    m *= xi;
                }
            }
            for (o, c) in out.iter_mut().zip(coeffs) {
                *o += m * c;
            }
        }
        if lambda != 0.0 {
            for (mono, coeffs) in &self.parameter_terms {
                let mut m = lambda;
                for (&e, &xi) in mono.iter().zip(x) {
                    for _ in 0..e {
                        m *= xi;
                    }
                }
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o += m * c;
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64], lambda: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, lambda, &mut out);
        out
    }

    pub fn jacobian(&self, x: &[f64], lambda: f64) -> Vec<Vec<f64>> {
        let mut jac = vec![vec![0.0; self.dim]; self.dim];
        let mut accumulate = |mono: &Monomial, coeffs: &[f64], weight: f64| {
            for j in 0..self.dim {
                if mono[j] == 0 {
                    continue;
                }
                let mut dm = mono[j] as f64 * weight;
                for (var, (&e, &xi)) in mono.iter().zip(x).enumerate() {
                    let pow = if var == j { e - 1 } else { e };
                    for _ in 0..pow {
                        dm *= xi;
                    }
                }
                for i in 0..self.dim {
                    jac[i][j] += dm * coeffs[i];
                }
            }
        };
        for (mono, coeffs) in &self.terms {
            accumulate(mono, coeffs, 1.0);
        }
        if lambda != 0.0 {
            for (mono, coeffs) in &self.parameter_terms {
                accumulate(mono, coeffs, lambda);
            }
        }
        jac
    }
}

/// Scalar polynomials, used to build bump factors and norms.
#[derive(Clone, Debug)]
struct ScalarPoly {
    dim: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl ScalarPoly {
    fn constant(dim: usize, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0u32; dim], c);
        }
        ScalarPoly { dim, terms }
    }

    /// The affine form x_j - c.
    fn coordinate_minus(dim: usize, j: usize, c: &Rat) -> Self {
        let mut terms = BTreeMap::new();
        let mut mono = vec![0u32; dim];
        mono[j] = 1;
        terms.insert(mono, Rat::one());
        if !c.is_zero() {
            terms.insert(vec![0u32; dim], -c.clone());
        }
        ScalarPoly { dim, terms }
    }

    /// A general affine form offset + sum coeff_j x_j.
    fn affine(dim: usize, offset: Rat, coeffs: &[Rat]) -> Self {
        let mut terms = BTreeMap::new();
        if !offset.is_zero() {
            terms.insert(vec![0u32; dim], offset);
        }
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut mono = vec![0u32; dim];
                mono[j] = 1;
                terms.insert(mono, c.clone());
            }
        }
        ScalarPoly { dim, terms }
    }

    fn add(&self, other: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let entry = out.terms.entry(m.clone()).or_insert_with(Rat::zero);
            *entry += c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn mul(&self, other: &ScalarPoly) -> ScalarPoly {
        let mut out = ScalarPoly {
            dim: self.dim,
            terms: BTreeMap::new(),
        };
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mono: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(mono).or_insert_with(Rat::zero);
                *entry += c1 * c2;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&self, s: &Rat) -> ScalarPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.terms.retain(|c_key, c| {
            let _ = c_key;
            !c.is_zero()
        });
        out
    }

    fn eval(&self, x: &[Rat]) -> Rat {
        self.terms
            .iter()
            .map(|(m, c)| monomial_eval(m, x) * c)
            .sum()
    }

    /// Multiply a coefficient vector by this scalar polynomial, producing a
    /// vector field contribution.
    fn times_vector(&self, v: &[Rat]) -> PolyVectorField {
        let mut out = PolyVectorField::zero(self.dim);
        for (m, c) in &self.terms {
            let coeffs: Vec<Rat> = v.iter().map(|vi| vi * c).collect();
            if coeffs.iter().any(|x| !x.is_zero()) {
                out.terms.insert(m.clone(), coeffs);
            }
        }
        out
    }

    fn times_field(&self, f: &PolyVectorField) -> PolyVectorField {
        let mut out = PolyVectorField::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, coeffs) in &f.terms {
                let mono: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                let scaled: Vec<Rat> = coeffs.iter().map(|x| x * c1).collect();
                PolyVectorField::add_into(&mut out.terms, mono, &scaled);
            }
        }
        prune(&mut out.terms);
        out
    }
}

/// |x - y|^2 as a scalar polynomial.
fn squared_distance_poly(dim: usize, y: &[Rat]) -> ScalarPoly {
    let mut acc = ScalarPoly::constant(dim, Rat::zero());
    for j in 0..dim {
        let lin = ScalarPoly::coordinate_minus(dim, j, &y[j]);
        acc = acc.add(&lin.mul(&lin));
    }
    acc
}

/// Bump polynomial for node j: product over the other nodes of
/// |x - y_i|^2 / |y_j - y_i|^2. Equals 1 at y_j and vanishes to second order
/// at every other node.
fn bump_poly(nodes: &[Vec<Rat>], j: usize) -> ScalarPoly {
    let dim = nodes[j].len();
    let mut acc = ScalarPoly::constant(dim, Rat::one());
    for (i, y) in nodes.iter().enumerate() {
        if i == j {
            continue;
        }
        let mut norm = Rat::zero();
        for (a, b) in nodes[j].iter().zip(y) {
            let d = a - b;
            norm += &d * &d;
        }
        acc = acc.mul(&squared_distance_poly(dim, y).scale(&norm.recip()));
    }
    acc
}

/// Gradient of the bump at its own node: sum of 2 (y_j - y_i) / |y_j - y_i|^2.
fn bump_gradient_at_node(nodes: &[Vec<Rat>], j: usize) -> Vec<Rat> {
    let dim = nodes[j].len();
    let mut grad = vec![Rat::zero(); dim];
    for (i, y) in nodes.iter().enumerate() {
        if i == j {
            continue;
        }
        let mut norm = Rat::zero();
        let diff: Vec<Rat> = nodes[j].iter().zip(y).map(|(a, b)| a - b).collect();
        for d in &diff {
            norm += d * d;
        }
        let scale = rat_int(2) / norm;
        for (g, d) in grad.iter_mut().zip(&diff) {
            *g += &scale * d;
        }
    }
    grad
}

/// Polynomial map g with g(y_j) = v_j and (dg)_{y_j} = A_j, exactly.
///
/// Per node, a bump that vanishes to second order at all other nodes carries
/// affine local data; the bump's own gradient at its node is cancelled by a
/// rank-one correction to the local linear part. Singular A_j are accepted:
/// the construction never inverts them.
pub fn hermite_interpolate(
    nodes: &[Vec<Rat>],
    values: &[Vec<Rat>],
    jacobians: &[Mat],
) -> Result<PolyVectorField> {
    let l = nodes.len();
    assert!(l > 0, "at least one node required");
    assert_eq!(values.len(), l);
    assert_eq!(jacobians.len(), l);
    let dim = nodes[0].len();
    for (i, y) in nodes.iter().enumerate() {
        assert_eq!(y.len(), dim);
        assert_eq!(values[i].len(), dim);
        assert_eq!(jacobians[i].nrows(), dim);
        assert_eq!(jacobians[i].ncols(), dim);
        for other in &nodes[i + 1..] {
            if y == other {
                return Err(Error::DuplicateNodes);
            }
        }
    }

    let mut g = PolyVectorField::zero(dim);
    for j in 0..l {
        let bump = bump_poly(nodes, j);
        let w = bump_gradient_at_node(nodes, j);
        // local affine data v_j + B (x - y_j) with B = A_j - v_j w^T
        let mut local = PolyVectorField::zero(dim);
        for col in 0..dim {
            let b_col: Vec<Rat> = (0..dim)
                .map(|row| &jacobians[j][(row, col)] - &values[j][row] * &w[col])
                .collect();
            let lin = ScalarPoly::coordinate_minus(dim, col, &nodes[j][col]);
            local = local.add(&lin.times_vector(&b_col));
        }
        local = local.add(&ScalarPoly::constant(dim, Rat::one()).times_vector(&values[j]));
        g = g.add(&bump.times_field(&local));
    }
    Ok(g)
}

/// Reynolds average: f(x) = (1/|Γ|) sum over γ of ρ(γ)^{-1} g(ρ(γ) x).
/// The output is exactly Γ-equivariant; fields that are already equivariant
/// are returned unchanged (the average is idempotent on equivariants).
pub fn equivariant_symmetrize(g: &PolyVectorField, action: &PermAction) -> PolyVectorField {
    let spec = action.group();
    let n = action.dim();
    assert_eq!(g.dim(), n);
    let order = spec.order() as i64;
    let mut total = PolyVectorField::zero(n);
    for gamma in spec.elements() {
        let perm = action.permutation_of(&gamma);
        let inv = spec.inverse(&gamma);
        let mut transformed = PolyVectorField::zero(n);
        let transform_part = |src: &BTreeMap<Monomial, Vec<Rat>>,
                              dst: &mut BTreeMap<Monomial, Vec<Rat>>| {
            for (mono, coeffs) in src {
                // substitute x -> ρ(γ) x in the monomial: variable j becomes
                // coordinate perm[j] of x
                let mut new_mono = vec![0u32; n];
                for (j, &e) in mono.iter().enumerate() {
                    new_mono[perm[j]] += e;
                }
                let new_coeffs = action.apply(&inv, coeffs);
                PolyVectorField::add_into(dst, new_mono, &new_coeffs);
            }
        };
        transform_part(&g.terms, &mut transformed.terms);
        transform_part(&g.parameter_terms, &mut transformed.parameter_terms);
        total = total.add(&transformed);
    }
    total.scale(&rat_int(order).recip())
}

/// Exact maximum equivariance residual |ρ(γ) f(x,λ) - f(ρ(γ)x, λ)| over all
/// group elements, seeded rational sample points, and λ in {-1/10, 0, 1/10}.
pub fn verify_equivariance(
    f: &PolyVectorField,
    action: &PermAction,
    samples: usize,
    seed: u64,
) -> Rat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = action.group();
    let lambdas = [
        Rat::new((-1).into(), 10.into()),
        Rat::zero(),
        Rat::new(1.into(), 10.into()),
    ];
    let mut max = Rat::zero();
    for _ in 0..samples {
        let x: Vec<Rat> = (0..action.dim())
            .map(|_| {
                Rat::new(
                    rng.random_range(-100i64..=100).into(),
                    rng.random_range(1i64..=8).into(),
                )
            })
            .collect();
        for lambda in &lambdas {
            let fx = f.eval(&x, lambda);
            for gamma in spec.elements() {
                let lhs = action.apply(&gamma, &fx);
                let rhs = f.eval(&action.apply(&gamma, &x), lambda);
                for (a, b) in lhs.iter().zip(&rhs) {
                    let r = (a - b).abs();
                    if r > max {
                        max = r;
                    }
                }
            }
        }
    }
    max
}

fn orbit_representatives(action: &PermAction, x0: &[Rat]) -> Vec<(GroupElement, Vec<Rat>)> {
    let spec = action.group();
    let mut reps: Vec<(GroupElement, Vec<Rat>)> = Vec::new();
    for gamma in spec.elements() {
        let point = action.apply(&gamma, x0);
        if !reps.iter().any(|(_, p)| *p == point) {
            reps.push((gamma, point));
        }
    }
    reps
}

/// Check that m commutes with every element of the isotropy subgroup of x0;
/// the first violating element is reported.
fn ensure_commutes_with_isotropy(action: &PermAction, x0: &[Rat], m: &Mat) -> Result<()> {
    let spec = action.group();
    let isotropy = action.isotropy_of_point(x0);
    for sigma in spec.subgroup_elements(&isotropy) {
        let rho = action.matrix_of(&sigma);
        if rho.mul(m) != m.mul(&rho) {
            return Err(Error::NonCommuting(sigma.to_string()));
        }
    }
    Ok(())
}

/// Γ-equivariant polynomial field with f(x0) = 0 and (df)_{x0} = m, where m
/// must commute with the isotropy subgroup of x0. The data is interpolated
/// over the whole orbit (pushed forward by conjugation) and then averaged;
/// commutation makes the average preserve the prescribed one-jets exactly.
pub fn prescribed_linearization_field(
    action: &PermAction,
    x0: &[Rat],
    m: &Mat,
) -> Result<PolyVectorField> {
    ensure_commutes_with_isotropy(action, x0, m)?;
    let reps = orbit_representatives(action, x0);
    let mut nodes = Vec::with_capacity(reps.len());
    let mut values = Vec::with_capacity(reps.len());
    let mut jacobians = Vec::with_capacity(reps.len());
    for (gamma, point) in &reps {
        let rho = action.matrix_of(gamma);
        let rho_inv = action.matrix_of(&action.group().inverse(gamma));
        nodes.push(point.clone());
        values.push(vec![Rat::zero(); action.dim()]);
        jacobians.push(rho.mul(m).mul(&rho_inv));
    }
    let g = hermite_interpolate(&nodes, &values, &jacobians)?;
    Ok(equivariant_symmetrize(&g, action))
}

/// Γ-equivariant system with a stable equilibrium at x0: prescribe -I, which
/// commutes with everything.
pub fn stable_equilibrium_field(action: &PermAction, x0: &[Rat]) -> Result<PolyVectorField> {
    let minus_identity = Mat::identity(action.dim()).scale(&rat_int(-1));
    prescribed_linearization_field(action, x0, &minus_identity)
}

/// A synthesized one-parameter Hopf family together with the design data the
/// dynamics stage needs.
#[derive(Clone, Debug)]
pub struct HopfFamily {
    pub field: PolyVectorField,
    pub x0: Vec<Rat>,
    pub witness: HSimpleWitness,
    /// Exact projection onto the rational carrier of the center plane.
    pub carrier_projection: Mat,
    /// Orthonormal basis of the center plane (numerical; the plane itself
    /// may be irrational).
    pub plane_basis: [Vec<f64>; 2],
    /// Designed rotation frequency at criticality; within 1e-12 of 1, and
    /// exactly expressible as rho0^2 rational.
    pub rho0: f64,
    pub rho0_sq: Rat,
    /// Phase each H factor generator shifts the bifurcating orbit by.
    pub predicted_phases: Vec<Rat>,
}

fn block_circulant(action: &PermAction, block: usize, coeffs: &[Rat]) -> Mat {
    let n = action.dim();
    let kb = action.block_dims()[block];
    let off = action.block_offset(block);
    let mut m = Mat::zeros(n, n);
    for (power, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for i in 0..kb {
            let v = &m[(off + (i + power) % kb, off + i)] + c;
            m[(off + (i + power) % kb, off + i)] = v;
        }
    }
    m
}

/// Numerical cos/sin basis of a two-dimensional block mode.
fn mode_plane_basis_f64(action: &PermAction, block: usize, j: u64) -> [Vec<f64>; 2] {
    let n = action.dim();
    let kb = action.block_dims()[block];
    let off = action.block_offset(block);
    let norm = (kb as f64 / 2.0).sqrt();
    let mut c = vec![0.0; n];
    let mut s = vec![0.0; n];
    for i in 0..kb {
        let angle = 2.0 * std::f64::consts::PI * (j as f64) * (i as f64) / (kb as f64);
        c[off + i] = angle.cos() / norm;
        s[off + i] = angle.sin() / norm;
    }
    [c, s]
}

/// Rotation generator on the carrier for a two-dimensional mode: a rational
/// polynomial in the block shift, with eigenvalue i(1 + O(1e-13)) on the
/// designated mode and approximately -1 on the other modes fused into the
/// same rational carrier. When the carrier is exactly the mode plane the
/// skew form (S - S^{-1}) is used and the real part is exactly zero.
fn rotation_on_carrier(
    action: &PermAction,
    block: usize,
    j0: u64,
    carrier_projection: &Mat,
) -> Result<(Mat, Rat)> {
    let kb = action.block_dims()[block] as u64;
    let d0 = kb / num_integer::Integer::gcd(&j0, &kb);
    let carrier_modes: Vec<u64> = (1..=kb / 2)
        .filter(|&j| j != 0 && 2 * j != kb && kb / num_integer::Integer::gcd(&j, &kb) == d0)
        .collect();

    let coeffs: Vec<Rat> = if carrier_modes.len() == 1 {
        // skew circulant a (S - S^{-1}): purely imaginary spectrum
        let theta = 2.0 * std::f64::consts::PI * (j0 as f64) / (kb as f64);
        let a = rat_from_f64(1.0 / (2.0 * theta.sin()));
        let mut c = vec![Rat::zero(); kb as usize];
        c[1] = a.clone();
        c[kb as usize - 1] = -a;
        c
    } else {
        // Solve for circulant coefficients hitting +i on mode j0 and -1 on
        // the other carrier modes, then pin them as rationals.
        let unknowns = kb as usize - 1;
        let mut rows: Vec<f64> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for &j in &carrier_modes {
            let mut cos_row = Vec::with_capacity(unknowns);
            let mut sin_row = Vec::with_capacity(unknowns);
            for m in 1..kb as usize {
                let angle = 2.0 * std::f64::consts::PI * (j as f64) * (m as f64) / (kb as f64);
                cos_row.push(angle.cos());
                sin_row.push(angle.sin());
            }
            rows.extend(cos_row);
            rows.extend(sin_row);
            if j == j0 {
                rhs.extend([0.0, 1.0]);
            } else {
                rhs.extend([-1.0, 0.0]);
            }
        }
        let a = nalgebra::DMatrix::from_row_slice(rhs.len(), unknowns, &rows);
        let b = nalgebra::DVector::from_vec(rhs);
        let pinv = a
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numerical(format!("circulant solve failed: {e}")))?;
        let sol = pinv * b;
        let mut c = vec![Rat::zero(); kb as usize];
        for m in 1..kb as usize {
            c[m] = rat_from_f64(sol[m - 1]);
        }
        c
    };

    let circ = block_circulant(action, block, &coeffs);
    let rotation = circ.mul(carrier_projection);

    // Exact rho0^2 from the 2x2 restriction when the carrier is a plane;
    // otherwise from the numerical design target.
    let rho0_sq = if carrier_modes.len() == 1 {
        let theta = 2.0 * std::f64::consts::PI * (j0 as f64) / (kb as f64);
        let a = &coeffs[1];
        // eigenvalue 2 a i sin(theta): rho^2 = 4 a^2 sin^2(theta), and
        // sin^2(theta) is rational for every plane-exact mode order
        let sin_sq = rat_from_f64(theta.sin() * theta.sin());
        let four = rat_int(4);
        four * a * a * sin_sq
    } else {
        Rat::one()
    };
    Ok((rotation, rho0_sq))
}

/// Build the one-parameter family f(x, λ) with a Hopf point at x0: the orbit
/// of x0 consists of equilibria for every λ, the linearization at x0 is
/// λ P + J on the center plane (eigenvalues λ ± i rho0) and -1 transversally,
/// and an equivariant cubic damping through the carrier projection makes the
/// branch supercritical with amplitude sqrt(λ).
pub fn hopf_family(
    action: &PermAction,
    x0: &[Rat],
    witness: &HSimpleWitness,
) -> Result<HopfFamily> {
    let spec = action.group();
    let n = action.dim();
    assert_eq!(x0.len(), n);
    let isotropy = action.isotropy_of_point(x0);
    if isotropy != witness.h {
        return Err(Error::Inadmissible(format!(
            "x0 has isotropy {isotropy}, witness expects {}",
            witness.h
        )));
    }

    let (rotation, projection, rho0_sq, plane_basis) = match witness.kind {
        WitnessKind::TwoDimMode { block, mode } => {
            let projection = witness.carrier.orthogonal_projection();
            let (rotation, rho0_sq) = rotation_on_carrier(action, block, mode, &projection)?;
            let basis = mode_plane_basis_f64(action, block, mode);
            (rotation, projection, rho0_sq, basis)
        }
        WitnessKind::OneDimPair { first, second } => {
            let u1 = one_dim_mode_vector(action, first.0, first.1);
            let u2 = one_dim_mode_vector(action, second.0, second.1);
            let norm1 = dot(&u1, &u1);
            let norm2 = dot(&u2, &u2);
            let c = rat_from_f64(1.0 / (rat_to_f64(&norm1) * rat_to_f64(&norm2)).sqrt());
            // J = c (u2 u1^T - u1 u2^T): rotation by rho0 = c |u1||u2|
            let mut j = Mat::zeros(n, n);
            for r in 0..n {
                for col in 0..n {
                    let v = &c * (&u2[r] * &u1[col] - &u1[r] * &u2[col]);
                    j[(r, col)] = v;
                }
            }
            let rho0_sq = &c * &c * &norm1 * &norm2;
            let projection = witness
                .plane
                .as_ref()
                .expect("pair witnesses always carry a rational plane")
                .orthogonal_projection();
            let b1: Vec<f64> = u1
                .iter()
                .map(|x| rat_to_f64(x) / rat_to_f64(&norm1).sqrt())
                .collect();
            let b2: Vec<f64> = u2
                .iter()
                .map(|x| rat_to_f64(x) / rat_to_f64(&norm2).sqrt())
                .collect();
            (j, projection, rho0_sq, [b1, b2])
        }
    };

    // Linearization at x0: L0 = J - (I - P), dL/dλ = P.
    let eye = Mat::identity(n);
    let l0 = rotation.sub(&eye.sub(&projection));

    let is_origin = x0.iter().all(Rat::is_zero);
    let (constant_lin, parameter_lin) = if is_origin {
        (
            PolyVectorField::linear(&l0),
            PolyVectorField::linear(&projection).times_parameter(),
        )
    } else {
        let g0 = prescribed_linearization_field(action, x0, &l0)?;
        let g1 = prescribed_linearization_field(action, x0, &projection)?;
        (g0, g1.times_parameter())
    };

    // Cubic damping -|P(x - x0)|^2 P(x - x0), localized by the orbit bump
    // when the orbit has more than one point, then symmetrized.
    let projected_coords: Vec<ScalarPoly> = (0..n)
        .map(|i| {
            let row: Vec<Rat> = (0..n).map(|jc| projection[(i, jc)].clone()).collect();
            let offset = -dot(&row, x0);
            ScalarPoly::affine(n, offset, &row)
        })
        .collect();
    let mut norm_sq = ScalarPoly::constant(n, Rat::zero());
    for p in &projected_coords {
        norm_sq = norm_sq.add(&p.mul(p));
    }
    let mut cubic = PolyVectorField::zero(n);
    for (i, p) in projected_coords.iter().enumerate() {
        let mut unit = vec![Rat::zero(); n];
        unit[i] = rat_int(-1);
        cubic = cubic.add(&norm_sq.mul(p).times_vector(&unit));
    }
    let damping = if is_origin {
        cubic
    } else {
        let reps = orbit_representatives(action, x0);
        let nodes: Vec<Vec<Rat>> = reps.iter().map(|(_, p)| p.clone()).collect();
        let node_index = nodes
            .iter()
            .position(|p| p == x0)
            .expect("x0 is on its own orbit");
        let bump = bump_poly(&nodes, node_index);
        equivariant_symmetrize(&bump.times_field(&cubic), action)
    };

    let field = constant_lin.add(&parameter_lin).add(&damping);
    Ok(HopfFamily {
        field,
        x0: x0.to_vec(),
        witness: witness.clone(),
        carrier_projection: projection,
        plane_basis,
        rho0: rat_to_f64(&rho0_sq).sqrt(),
        rho0_sq,
        predicted_phases: witness.phases.clone(),
    })
}

/// Serialized form: explicit multi-indices with numerator/denominator pairs,
/// so fields round-trip bit-exactly between synthesis and dynamics.
#[derive(Serialize, Deserialize)]
pub struct FieldJson {
    pub schema_version: u32,
    pub dim: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
    pub parameter_terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    /// One (numerator, denominator) pair per output coordinate.
    pub coefficients: Vec<(String, String)>,
}

fn rat_to_pair(r: &Rat) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

fn rat_from_pair(pair: &(String, String)) -> Result<Rat> {
    let numer = pair
        .0
        .parse()
        .map_err(|e| Error::Numerical(format!("bad numerator: {e}")))?;
    let denom = pair
        .1
        .parse()
        .map_err(|e| Error::Numerical(format!("bad denominator: {e}")))?;
    Ok(Rat::new(numer, denom))
}

impl PolyVectorField {
    pub fn to_json(&self) -> FieldJson {
        let pack = |map: &BTreeMap<Monomial, Vec<Rat>>| -> Vec<TermJson> {
            map.iter()
                .map(|(m, coeffs)| TermJson {
                    exponents: m.clone(),
                    coefficients: coeffs.iter().map(rat_to_pair).collect(),
                })
                .collect()
        };
        FieldJson {
            schema_version: 1,
            dim: self.dim,
            degree: self.degree(),
            terms: pack(&self.terms),
            parameter_terms: pack(&self.parameter_terms),
        }
    }

    pub fn from_json(json: &FieldJson) -> Result<Self> {
        let unpack = |terms: &[TermJson]| -> Result<BTreeMap<Monomial, Vec<Rat>>> {
            let mut map = BTreeMap::new();
            for t in terms {
                let coeffs: Result<Vec<Rat>> = t.coefficients.iter().map(rat_from_pair).collect();
                map.insert(t.exponents.clone(), coeffs?);
            }
            Ok(map)
        };
        let mut out = PolyVectorField {
            dim: json.dim,
            terms: unpack(&json.terms)?,
            parameter_terms: unpack(&json.parameter_terms)?,
        };
        prune(&mut out.terms);
        prune(&mut out.parameter_terms);
        Ok(out)
    }
}
