//! Linear-algebraic analysis of the block-cyclic permutation action: fixed
//! point subspaces, isotropy tests, the variety L_K, the chamber structure of
//! Fix(K) minus L_K, isotypic (Fourier mode) decompositions, and the search
//! for two-dimensional H-simple subspaces with a prescribed kernel.
//!
//! Everything here is exact: subspaces are rational and canonical, characters
//! are rational phases, and chamber membership is decided by exact signs.

use crate::group::{GroupElement, GroupSpec, Subgroup};
use crate::linalg::{
    dot, nullspace, primitive_integer_vector, rat_int, LinearSubspace, Mat, Rat,
};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// The permutation representation: each cyclic factor Z_k acts on its own
/// block R^k by cyclic coordinate shifts; two-factor groups act diagonally on
/// the direct sum of their blocks.
#[derive(Clone, Debug)]
pub struct PermAction {
    group: GroupSpec,
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl PermAction {
    /// The standard action: block dimensions equal the factor orders.
    pub fn standard(group: &GroupSpec) -> Self {
        let block_dims: Vec<usize> = group.factor_orders().iter().map(|&k| k as usize).collect();
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut acc = 0;
        for &d in &block_dims {
            offsets.push(acc);
            acc += d;
        }
        PermAction {
            group: group.clone(),
            block_dims,
            offsets,
            total_dim: acc,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn block_offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    /// Coordinate permutation of g: output index i receives input `perm[i]`.
    /// Within a block of size k, the shift by residue a sends e_i to e_{i+a},
    /// so output coordinate i reads input coordinate (i - a) mod k.
    pub fn permutation_of(&self, g: &GroupElement) -> Vec<usize> {
        let mut perm = Vec::with_capacity(self.total_dim);
        for (b, (&dim, &off)) in self.block_dims.iter().zip(&self.offsets).enumerate() {
            let a = g.residues[b] as usize;
            for i in 0..dim {
                perm.push(off + (i + dim - a % dim) % dim);
            }
        }
        perm
    }

    pub fn matrix_of(&self, g: &GroupElement) -> Mat {
        let perm = self.permutation_of(g);
        let mut m = Mat::zeros(self.total_dim, self.total_dim);
        for (i, &src) in perm.iter().enumerate() {
            m[(i, src)] = Rat::one();
        }
        m
    }

    pub fn apply(&self, g: &GroupElement, x: &[Rat]) -> Vec<Rat> {
        let perm = self.permutation_of(g);
        perm.iter().map(|&src| x[src].clone()).collect()
    }

    pub fn apply_f64(&self, g: &GroupElement, x: &[f64]) -> Vec<f64> {
        let perm = self.permutation_of(g);
        perm.iter().map(|&src| x[src]).collect()
    }

    /// Isotropy subgroup of a point, as a product subgroup (stabilizers of the
    /// diagonal block action are always products).
    pub fn isotropy_of_point(&self, x: &[Rat]) -> Subgroup {
        let fixing: Vec<GroupElement> = self
            .group
            .elements()
            .into_iter()
            .filter(|g| self.apply(g, x) == x)
            .collect();
        self.group.subgroup_generated_by(&fixing)
    }
}

/// Fix(K): the exact nullspace of the stacked (rho(g) - I) over generators.
pub fn fix_subspace(k: &Subgroup, action: &PermAction) -> LinearSubspace {
    let n = action.dim();
    let gens = action.group().subgroup_generators(k);
    if gens.is_empty() {
        return LinearSubspace::full(n);
    }
    let mut rows = Vec::with_capacity(gens.len() * n);
    for g in &gens {
        let m = action.matrix_of(g);
        let eye = Mat::identity(n);
        let diff = m.sub(&eye);
        rows.extend(diff.rows_vec());
    }
    nullspace(&Mat::from_rows(rows))
}

fn fix_of_element(g: &GroupElement, action: &PermAction) -> LinearSubspace {
    let n = action.dim();
    let diff = action.matrix_of(g).sub(&Mat::identity(n));
    nullspace(&diff)
}

/// K is an isotropy subgroup iff no gamma outside K fixes all of Fix(K);
/// over the rationals finitely many proper subspaces cannot cover Fix(K),
/// so it suffices that each piece Fix(gamma) ∩ Fix(K) is proper.
pub fn is_isotropy(k: &Subgroup, action: &PermAction) -> bool {
    let fix_k = fix_subspace(k, action);
    action
        .group()
        .elements()
        .iter()
        .filter(|g| !action.group().element_in_subgroup(g, k))
        .all(|g| !fix_of_element(g, action).contains(&fix_k))
}

/// One merged piece of the variety L_K.
#[derive(Clone, Debug)]
pub struct VarietyPiece {
    pub subspace: LinearSubspace,
    pub sources: Vec<GroupElement>,
}

/// L_K = union over gamma not in K of Fix(gamma) ∩ Fix(K).
#[derive(Clone, Debug)]
pub struct VarietyLk {
    pub fix_k: LinearSubspace,
    pub pieces: Vec<VarietyPiece>,
}

pub fn variety_lk(k: &Subgroup, action: &PermAction) -> Result<VarietyLk> {
    let fix_k = fix_subspace(k, action);
    let mut pieces: Vec<VarietyPiece> = Vec::new();
    for g in action.group().elements() {
        if action.group().element_in_subgroup(&g, k) {
            continue;
        }
        let piece = fix_of_element(&g, action).intersect(&fix_k);
        if piece.dim() == fix_k.dim() {
            return Err(Error::NotIsotropy(format!(
                "{k} (element {g} fixes all of Fix(K))"
            )));
        }
        match pieces.iter_mut().find(|p| p.subspace == piece) {
            Some(p) => p.sources.push(g),
            None => pieces.push(VarietyPiece {
                subspace: piece,
                sources: vec![g],
            }),
        }
    }
    Ok(VarietyLk { fix_k, pieces })
}

/// A codimension-one piece of L_K, as a hyperplane through the origin of
/// Fix(K) in Fix(K)-coordinates.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    /// Primitive integer normal in Fix(K)-coordinates.
    pub normal: Vec<Rat>,
    /// The piece in ambient coordinates.
    pub piece: LinearSubspace,
    pub sources: Vec<GroupElement>,
}

#[derive(Clone, Debug)]
pub struct Chamber {
    /// Sign of the defining normal per hyperplane; never zero.
    pub signs: Vec<i8>,
    /// A rational point realizing the sign vector, in Fix(K)-coordinates.
    pub sample: Vec<Rat>,
}

/// Chambers of Fix(K) cut by the codimension-one pieces of L_K, with the
/// induced action of H on chamber indices. Pieces of codimension two or more
/// do not disconnect and are recorded separately.
#[derive(Clone, Debug)]
pub struct ChamberDecomposition {
    pub fix_k: LinearSubspace,
    pub hyperplanes: Vec<Hyperplane>,
    pub deep_pieces: Vec<VarietyPiece>,
    pub chambers: Vec<Chamber>,
    /// For each element of H (in enumeration order), the permutation of
    /// chamber indices.
    pub action: Vec<(GroupElement, Vec<usize>)>,
    pub fixed_chamber: Option<usize>,
}

const SAMPLE_COUNT: usize = 256;
const MAX_RESAMPLE: usize = 2000;

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rat> {
    (0..dim)
        .map(|_| rat_int(rng.random_range(-1000..=1000)))
        .collect()
}

fn sign_vector(hyperplanes: &[Hyperplane], y: &[Rat]) -> Option<Vec<i8>> {
    hyperplanes
        .iter()
        .map(|h| {
            let s = dot(&h.normal, y);
            if s.is_zero() {
                None
            } else if s > Rat::zero() {
                Some(1)
            } else {
                Some(-1)
            }
        })
        .collect()
}

pub fn chambers(
    k: &Subgroup,
    h: &Subgroup,
    action: &PermAction,
    seed: u64,
) -> Result<ChamberDecomposition> {
    let spec = action.group();
    if !spec.subgroup_contains(h, k) {
        return Err(Error::NotNested(format!("{k} is not contained in {h}")));
    }
    let variety = variety_lk(k, action)?;
    let fix_k = variety.fix_k.clone();
    let d = fix_k.dim();

    let mut hyperplanes: Vec<Hyperplane> = Vec::new();
    let mut deep_pieces = Vec::new();
    for piece in variety.pieces {
        if piece.subspace.dim() + 1 == d {
            // Normal: annihilator of the piece inside Fix(K)-coordinates.
            let coords: Vec<Vec<Rat>> = piece
                .subspace
                .basis()
                .iter()
                .map(|v| fix_k.coords_of(v).expect("piece lies inside Fix(K)"))
                .collect();
            let ann = if coords.is_empty() {
                LinearSubspace::full(d)
            } else {
                nullspace(&Mat::from_rows(coords))
            };
            debug_assert_eq!(ann.dim(), 1);
            let normal = primitive_integer_vector(&ann.basis()[0]);
            hyperplanes.push(Hyperplane {
                normal,
                piece: piece.subspace,
                sources: piece.sources,
            });
        } else {
            deep_pieces.push(piece);
        }
    }

    // Matrices of the H-action in Fix(K)-coordinates.
    let h_elements = spec.subgroup_elements(h);
    let coord_matrices: Vec<(GroupElement, Mat)> = h_elements
        .iter()
        .map(|g| {
            let rows: Vec<Vec<Rat>> = fix_k
                .basis()
                .iter()
                .map(|v| {
                    fix_k
                        .coords_of(&action.apply(g, v))
                        .expect("Fix(K) is H-invariant")
                })
                .collect();
            // rows[i] = coords of rho(g) b_i; acting on coordinate vectors is
            // multiplication by the transpose.
            (g.clone(), Mat::from_rows(rows).transpose())
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chambers_list: Vec<Chamber> = Vec::new();
    let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
    let mut push_chamber = |signs: Vec<i8>, sample: Vec<Rat>, list: &mut Vec<Chamber>| {
        if seen.insert(signs.clone()) {
            list.push(Chamber { signs, sample });
        }
    };

    // A point of Fix(H) off all hyperplanes, when one exists, pins the
    // H-fixed chamber: the point itself is fixed by every element of H.
    let fix_h = fix_subspace(h, action);
    let fix_h_obstructed = hyperplanes.iter().any(|hp| hp.piece.contains(&fix_h));
    if !fix_h_obstructed {
        let coords_h: Vec<Vec<Rat>> = fix_h
            .basis()
            .iter()
            .map(|v| fix_k.coords_of(v).expect("Fix(H) lies inside Fix(K)"))
            .collect();
        let mut found = false;
        for _ in 0..MAX_RESAMPLE {
            let weights = random_point(&mut rng, coords_h.len());
            let mut y = vec![Rat::zero(); d];
            for (w, c) in weights.iter().zip(&coords_h) {
                for (yi, ci) in y.iter_mut().zip(c) {
                    *yi += w * ci;
                }
            }
            if let Some(signs) = sign_vector(&hyperplanes, &y) {
                push_chamber(signs, y, &mut chambers_list);
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Numerical(
                "could not sample a generic point of Fix(H)".into(),
            ));
        }
    }

    let mut drawn = 0;
    let mut accepted = 0;
    while accepted < SAMPLE_COUNT && drawn < MAX_RESAMPLE {
        drawn += 1;
        let y = random_point(&mut rng, d);
        if let Some(signs) = sign_vector(&hyperplanes, &y) {
            accepted += 1;
            push_chamber(signs, y, &mut chambers_list);
        }
    }

    // Close the chamber set under the H-action so the recorded action is a
    // total permutation table.
    let mut idx = 0;
    while idx < chambers_list.len() {
        let sample = chambers_list[idx].sample.clone();
        for (_, m) in &coord_matrices {
            let image = m.mul_vec(&sample);
            let signs = sign_vector(&hyperplanes, &image)
                .expect("hyperplanes are H-invariant, images stay off them");
            push_chamber(signs, image, &mut chambers_list);
        }
        idx += 1;
    }

    let index_of = |signs: &[i8]| -> usize {
        chambers_list
            .iter()
            .position(|c| c.signs == signs)
            .expect("closed under action")
    };
    let mut table = Vec::with_capacity(coord_matrices.len());
    for (g, m) in &coord_matrices {
        let perm: Vec<usize> = chambers_list
            .iter()
            .map(|c| {
                let image = m.mul_vec(&c.sample);
                index_of(&sign_vector(&hyperplanes, &image).expect("invariant arrangement"))
            })
            .collect();
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        debug_assert_eq!(distinct.len(), perm.len(), "action must permute chambers");
        table.push((g.clone(), perm));
    }

    let fixed_chamber =
        (0..chambers_list.len()).find(|&i| table.iter().all(|(_, perm)| perm[i] == i));

    Ok(ChamberDecomposition {
        fix_k,
        hyperplanes,
        deep_pieces,
        chambers: chambers_list,
        action: table,
        fixed_chamber,
    })
}

/// Condition (d): H fixes a connected component of Fix(K) \ L_K, decided on
/// the chamber table. Returns the witness chamber index when one exists.
pub fn h_fixes_component(
    h: &Subgroup,
    k: &Subgroup,
    action: &PermAction,
    seed: u64,
) -> Result<(bool, Option<usize>)> {
    let decomposition = chambers(k, h, action, seed)?;
    Ok((
        decomposition.fixed_chamber.is_some(),
        decomposition.fixed_chamber,
    ))
}

/// Independent route for condition (d): H fixes a chamber iff Fix(H) is not
/// contained in any codimension-one piece of L_K (orbit-averaging a point of
/// a setwise-fixed convex chamber lands in Fix(H) off every hyperplane, and
/// conversely a generic point of Fix(H) pins a fixed chamber).
pub fn h_fixes_component_exact(h: &Subgroup, k: &Subgroup, action: &PermAction) -> Result<bool> {
    let variety = variety_lk(k, action)?;
    let d = variety.fix_k.dim();
    let fix_h = fix_subspace(h, action);
    Ok(variety
        .pieces
        .iter()
        .filter(|p| p.subspace.dim() + 1 == d)
        .all(|p| !p.subspace.contains(&fix_h)))
}

/// One real Fourier mode of a cyclic block, restricted to a subgroup H.
#[derive(Clone, Debug)]
pub struct ModeInfo {
    pub block: usize,
    pub index: u64,
    pub real_dim: usize,
    /// Smallest rational invariant subspace containing the mode plane: the
    /// kernel of the d-th cyclotomic polynomial of the block shift, where d
    /// is the order of the mode. Equals the mode plane itself iff
    /// `carrier_is_plane`.
    pub subspace: LinearSubspace,
    pub carrier_is_plane: bool,
    /// Kernel of the H-action on this mode, as a product subgroup.
    pub kernel: Subgroup,
    /// Rotation phase of each factor generator of H on this mode.
    pub phases: Vec<Rat>,
}

fn cyclotomic(d: u64) -> Vec<i64> {
    // x^d - 1 divided by the product of all lower cyclotomics.
    let mut num = vec![0i64; d as usize + 1];
    num[0] = -1;
    num[d as usize] = 1;
    for e in 1..d {
        if d % e == 0 {
            let phi_e = cyclotomic(e);
            num = poly_div_exact(&num, &phi_e);
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i] / lead;
        quot[i - dd] = c;
        if c != 0 {
            for (j, &dc) in den.iter().enumerate() {
                rem[i - dd + j] -= c * dc;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "non-exact polynomial division");
    quot
}

/// Rational carrier of the order-d modes of one block: ker Phi_d(S_block),
/// embedded in the ambient space.
pub fn mode_carrier(action: &PermAction, block: usize, d: u64) -> LinearSubspace {
    let kb = action.block_dims()[block];
    let off = action.block_offset(block);
    let n = action.dim();
    let phi = cyclotomic(d);
    // Phi_d(S) on the block: sum of c_m * shift^m.
    let mut m = Mat::zeros(kb, kb);
    for (power, &c) in phi.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for i in 0..kb {
            let v = &m[((i + power) % kb, i)] + rat_int(c);
            m[((i + power) % kb, i)] = v;
        }
    }
    let block_kernel = nullspace(&m);
    let vectors: Vec<Vec<Rat>> = block_kernel
        .basis()
        .iter()
        .map(|v| {
            let mut w = vec![Rat::zero(); n];
            w[off..off + kb].clone_from_slice(v);
            w
        })
        .collect();
    LinearSubspace::span(n, &vectors)
}

/// The real Fourier-mode decomposition of each cyclic block, with the kernel
/// and character of the restriction of H to each mode.
pub fn isotypic_modes(action: &PermAction, h: &Subgroup) -> Vec<ModeInfo> {
    let spec = action.group();
    let mut out = Vec::new();
    for (b, &kb_usize) in action.block_dims().iter().enumerate() {
        let kb = kb_usize as u64;
        for j in 0..=kb / 2 {
            let real_dim = if j == 0 || 2 * j == kb { 1 } else { 2 };
            let d = if j == 0 { 1 } else { kb / j.gcd(&kb) };
            let subspace = mode_carrier(action, b, d);
            let carrier_is_plane = match real_dim {
                1 => true,
                _ => subspace.dim() == 2,
            };
            let mut kernel_suborders = h.suborders().to_vec();
            let hb = kernel_suborders[b];
            kernel_suborders[b] = if j == 0 { hb } else { j.gcd(&hb).max(1) };
            let kernel = spec
                .subgroup(&kernel_suborders)
                .expect("kernel suborders divide H suborders");
            let phases: Vec<Rat> = h
                .suborders()
                .iter()
                .enumerate()
                .map(|(i, &hi)| {
                    if i == b && hi > 1 {
                        crate::group::frac_mod_1(&Rat::new(j.into(), hi.into()))
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            out.push(ModeInfo {
                block: b,
                index: j,
                real_dim,
                subspace,
                carrier_is_plane,
                kernel,
                phases,
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleKind {
    /// A single two-dimensional irreducible that is not absolutely
    /// irreducible: H acts by rotations other than +-1.
    NonAbsolutelyIrreducible,
    /// A sum of two isomorphic one-dimensional absolutely irreducible
    /// representations: H acts through {+1, -1}.
    SumOfTwoIsomorphic,
}

#[derive(Clone, Debug)]
pub enum WitnessKind {
    /// One two-dimensional Fourier mode of a block.
    TwoDimMode { block: usize, mode: u64 },
    /// Two one-dimensional modes carrying the same H-character.
    OneDimPair {
        first: (usize, u64),
        second: (usize, u64),
    },
}

/// A two-dimensional H-simple subspace V with ker_V(H) = K.
#[derive(Clone, Debug)]
pub struct HSimpleWitness {
    /// The subgroup whose action on V the witness certifies.
    pub h: Subgroup,
    pub kind: WitnessKind,
    /// Exact rational basis of V when V is defined over the rationals (all
    /// one-dimensional pairs; two-dimensional modes of order d with
    /// phi(d) = 2). Otherwise V is irrational and only its rational carrier
    /// is representable exactly.
    pub plane: Option<LinearSubspace>,
    /// Smallest rational H-invariant subspace containing V.
    pub carrier: LinearSubspace,
    pub kernel: Subgroup,
    pub simple_kind: SimpleKind,
    /// Rotation phase of each factor generator of H on V; this is the phase
    /// map Theta the bifurcating orbit realizes.
    pub phases: Vec<Rat>,
}

pub(crate) fn one_dim_mode_vector(action: &PermAction, block: usize, j: u64) -> Vec<Rat> {
    let kb = action.block_dims()[block];
    let off = action.block_offset(block);
    let mut v = vec![Rat::zero(); action.dim()];
    for i in 0..kb {
        let sign = if j == 0 || i % 2 == 0 { 1 } else { -1 };
        v[off + i] = rat_int(sign);
    }
    v
}

/// Search for a two-dimensional H-simple subspace of the ambient space with
/// kernel exactly K: first single two-dimensional modes, then pairs of
/// isomorphic one-dimensional modes. Absence is a definite answer (the scan
/// is exhaustive over invariant planes).
pub fn find_h_simple(h: &Subgroup, k: &Subgroup, action: &PermAction) -> Option<HSimpleWitness> {
    let spec = action.group();
    if !spec.subgroup_contains(h, k) {
        return None;
    }
    let k_elements: BTreeSet<GroupElement> = spec.subgroup_elements(k).into_iter().collect();
    let h_elements = spec.subgroup_elements(h);
    let kernel_elements = |phases: &[Rat]| -> BTreeSet<GroupElement> {
        h_elements
            .iter()
            .filter(|g| {
                let mut total = Rat::zero();
                for (i, (&hi, phase)) in h.suborders().iter().zip(phases).enumerate() {
                    if hi > 1 {
                        let t = g.residues[i] / (spec.factor_orders()[i] / hi);
                        total += phase * rat_int(t as i64);
                    }
                }
                crate::group::frac_mod_1(&total).is_zero()
            })
            .cloned()
            .collect()
    };

    let modes = isotypic_modes(action, h);

    for mode in modes.iter().filter(|m| m.real_dim == 2) {
        if kernel_elements(&mode.phases) != k_elements {
            continue;
        }
        let all_half_integer = mode
            .phases
            .iter()
            .map(|p| p + p)
            .all(|twice| twice.is_integer());
        return Some(HSimpleWitness {
            h: h.clone(),
            kind: WitnessKind::TwoDimMode {
                block: mode.block,
                mode: mode.index,
            },
            plane: mode.carrier_is_plane.then(|| mode.subspace.clone()),
            carrier: mode.subspace.clone(),
            kernel: mode.kernel.clone(),
            simple_kind: if all_half_integer {
                SimpleKind::SumOfTwoIsomorphic
            } else {
                SimpleKind::NonAbsolutelyIrreducible
            },
            phases: mode.phases.clone(),
        });
    }

    let one_dim: Vec<&ModeInfo> = modes.iter().filter(|m| m.real_dim == 1).collect();
    for (i, first) in one_dim.iter().enumerate() {
        for second in &one_dim[i + 1..] {
            if first.phases != second.phases {
                continue;
            }
            if kernel_elements(&first.phases) != k_elements {
                continue;
            }
            let v1 = one_dim_mode_vector(action, first.block, first.index);
            let v2 = one_dim_mode_vector(action, second.block, second.index);
            let plane = LinearSubspace::span(action.dim(), &[v1, v2]);
            return Some(HSimpleWitness {
                h: h.clone(),
                kind: WitnessKind::OneDimPair {
                    first: (first.block, first.index),
                    second: (second.block, second.index),
                },
                plane: Some(plane.clone()),
                carrier: plane,
                kernel: first.kernel.clone(),
                simple_kind: SimpleKind::SumOfTwoIsomorphic,
                phases: first.phases.clone(),
            });
        }
    }

    None
}
