//! Exact arithmetic for finite cyclic groups and products of two cyclic
//! groups: elements, product-subgroup lattices, quotients, cyclicity tests,
//! and phase homomorphisms into the circle.
//!
//! Subgroups of Z_l x Z_k are restricted to product subgroups Z_p x Z_q
//! (generated by (l/p, 0) and (0, k/q)); these are exactly the isotropy
//! subgroups of the diagonal permutation action, and the classification this
//! crate implements is stated for product pairs only.

use crate::linalg::Rat;
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finite abelian group given as one or two cyclic factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    factor_orders: Vec<u64>,
}

/// An element, one residue per factor, each reduced mod its factor order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub residues: Vec<u64>,
}

/// A product subgroup, identified by its per-factor suborders.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    suborders: Vec<u64>,
}

impl GroupSpec {
    pub fn cyclic(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGroup("factor order must be positive".into()));
        }
        Ok(GroupSpec {
            factor_orders: vec![k],
        })
    }

    pub fn product(l: u64, k: u64) -> Result<Self> {
        if l < 2 || k < 2 {
            return Err(Error::InvalidGroup(
                "two-factor groups require both orders > 1".into(),
            ));
        }
        Ok(GroupSpec {
            factor_orders: vec![l, k],
        })
    }

    /// Parse `Z<k>` or `Z<l>xZ<k>`, case-insensitive.
    pub fn parse(s: &str) -> Result<Self> {
        let orders = parse_orders(s)?;
        match orders.as_slice() {
            [k] => GroupSpec::cyclic(*k),
            [l, k] => GroupSpec::product(*l, *k),
            _ => Err(Error::InvalidGroup(format!("cannot parse group '{s}'"))),
        }
    }

    pub fn factor_orders(&self) -> &[u64] {
        &self.factor_orders
    }

    pub fn num_factors(&self) -> usize {
        self.factor_orders.len()
    }

    pub fn order(&self) -> u64 {
        self.factor_orders.iter().product()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            residues: vec![0; self.num_factors()],
        }
    }

    pub fn element(&self, residues: &[u64]) -> GroupElement {
        assert_eq!(residues.len(), self.num_factors());
        GroupElement {
            residues: residues
                .iter()
                .zip(&self.factor_orders)
                .map(|(r, k)| r % k)
                .collect(),
        }
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&b.residues)
                .zip(&self.factor_orders)
                .map(|((x, y), k)| (x + y) % k)
                .collect(),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&self.factor_orders)
                .map(|(x, k)| (k - x) % k)
                .collect(),
        }
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.order() as usize);
        match self.factor_orders.as_slice() {
            [k] => {
                for a in 0..*k {
                    out.push(GroupElement { residues: vec![a] });
                }
            }
            [l, k] => {
                for a in 0..*l {
                    for b in 0..*k {
                        out.push(GroupElement {
                            residues: vec![a, b],
                        });
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    pub fn subgroup(&self, suborders: &[u64]) -> Result<Subgroup> {
        if suborders.len() != self.num_factors() {
            return Err(Error::InvalidGroup(
                "subgroup factor count does not match group".into(),
            ));
        }
        for (s, k) in suborders.iter().zip(&self.factor_orders) {
            if *s == 0 || k % s != 0 {
                return Err(Error::InvalidGroup(format!(
                    "suborder {s} does not divide factor order {k}"
                )));
            }
        }
        Ok(Subgroup {
            suborders: suborders.to_vec(),
        })
    }

    /// Parse a subgroup in the same `Z..` grammar and validate divisibility.
    pub fn parse_subgroup(&self, s: &str) -> Result<Subgroup> {
        let orders = parse_orders(s)?;
        self.subgroup(&orders)
    }

    pub fn full_subgroup(&self) -> Subgroup {
        Subgroup {
            suborders: self.factor_orders.clone(),
        }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            suborders: vec![1; self.num_factors()],
        }
    }

    /// All divisor-tuples, sorted lexicographically. For one factor this is
    /// the complete subgroup lattice; for two factors, product subgroups only.
    pub fn enumerate_subgroups(&self) -> Vec<Subgroup> {
        let divs: Vec<Vec<u64>> = self.factor_orders.iter().map(|&k| divisors(k)).collect();
        let mut out = Vec::new();
        match divs.as_slice() {
            [d] => {
                for &p in d {
                    out.push(Subgroup { suborders: vec![p] });
                }
            }
            [d1, d2] => {
                for &p in d1 {
                    for &q in d2 {
                        out.push(Subgroup {
                            suborders: vec![p, q],
                        });
                    }
                }
            }
            _ => unreachable!(),
        }
        out.sort();
        out
    }

    /// Generators of the product subgroup: (l/p, 0) and (0, k/q), skipping
    /// trivial factors.
    pub fn subgroup_generators(&self, s: &Subgroup) -> Vec<GroupElement> {
        let mut gens = Vec::new();
        for (i, (&sub, &k)) in s.suborders.iter().zip(&self.factor_orders).enumerate() {
            if sub > 1 {
                let mut residues = vec![0; self.num_factors()];
                residues[i] = k / sub;
                gens.push(GroupElement { residues });
            }
        }
        gens
    }

    pub fn subgroup_elements(&self, s: &Subgroup) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(s.order() as usize);
        match s.suborders.as_slice() {
            [p] => {
                let step = self.factor_orders[0] / p;
                for t in 0..*p {
                    out.push(GroupElement {
                        residues: vec![t * step],
                    });
                }
            }
            [p, q] => {
                let step0 = self.factor_orders[0] / p;
                let step1 = self.factor_orders[1] / q;
                for t0 in 0..*p {
                    for t1 in 0..*q {
                        out.push(GroupElement {
                            residues: vec![t0 * step0, t1 * step1],
                        });
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    pub fn element_in_subgroup(&self, g: &GroupElement, s: &Subgroup) -> bool {
        g.residues
            .iter()
            .zip(&s.suborders)
            .zip(&self.factor_orders)
            .all(|((r, sub), k)| r % (k / sub) == 0)
    }

    pub fn subgroup_contains(&self, h: &Subgroup, k: &Subgroup) -> bool {
        h.suborders
            .iter()
            .zip(&k.suborders)
            .all(|(hs, ks)| hs % ks == 0)
    }

    /// The smallest product subgroup containing a set of elements.
    pub fn subgroup_generated_by(&self, elements: &[GroupElement]) -> Subgroup {
        let suborders = self
            .factor_orders
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut g = k;
                for e in elements {
                    g = g.gcd(&e.residues[i]);
                }
                k / g.max(1)
            })
            .collect();
        Subgroup { suborders }
    }
}

impl Subgroup {
    pub fn suborders(&self) -> &[u64] {
        &self.suborders
    }

    pub fn order(&self) -> u64 {
        self.suborders.iter().product()
    }

    /// A subgroup is cyclic iff its factor suborders are coprime.
    pub fn is_cyclic(&self) -> bool {
        match self.suborders.as_slice() {
            [_] => true,
            [p, q] => p.gcd(q) == 1,
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.suborders.iter().map(|s| format!("Z{s}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factor_orders.iter().map(|s| format!("Z{s}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.residues.len() == 1 {
            write!(f, "{}", self.residues[0])
        } else {
            let parts: Vec<String> = self.residues.iter().map(u64::to_string).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

fn parse_orders(s: &str) -> Result<Vec<u64>> {
    let lower = s.trim().to_ascii_lowercase();
    let parts: Vec<&str> = lower.split('x').collect();
    if parts.is_empty() || parts.len() > 2 {
        return Err(Error::InvalidGroup(format!("cannot parse '{s}'")));
    }
    parts
        .iter()
        .map(|p| {
            p.strip_prefix('z')
                .and_then(|num| num.parse::<u64>().ok())
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::InvalidGroup(format!("cannot parse factor '{p}' in '{s}'")))
        })
        .collect()
}

pub fn divisors(k: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=k).filter(|d| k % d == 0).collect();
    out.sort_unstable();
    out
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// H/K is cyclic iff the per-factor quotient orders are coprime.
pub fn quotient_is_cyclic(spec: &GroupSpec, h: &Subgroup, k: &Subgroup) -> Result<bool> {
    if !spec.subgroup_contains(h, k) {
        return Err(Error::NotNested(format!("{k} is not contained in {h}")));
    }
    let quotients: Vec<u64> = h
        .suborders
        .iter()
        .zip(&k.suborders)
        .map(|(hs, ks)| hs / ks)
        .collect();
    Ok(match quotients.as_slice() {
        [_] => true,
        [a, b] => a.gcd(b) == 1,
        _ => unreachable!(),
    })
}

/// N(H) = Γ for abelian Γ.
pub fn normalizer(_h: &Subgroup, spec: &GroupSpec) -> Subgroup {
    spec.full_subgroup()
}

/// A homomorphism Θ: H -> S^1, recorded as one phase in [0,1) per factor
/// generator of H, interpreted as a fraction of one period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaHom {
    /// Phase assigned to the generator of each factor of H; the generator of
    /// the factor with suborder h gets a phase a/h.
    pub phase_per_generator: Vec<Rat>,
}

impl ThetaHom {
    /// Phase of an element of H (residues in the ambient group).
    pub fn phase_of(&self, spec: &GroupSpec, h: &Subgroup, g: &GroupElement) -> Rat {
        assert!(spec.element_in_subgroup(g, h), "element outside H");
        let mut total = Rat::zero();
        for ((r, &sub), (&k, phase)) in g
            .residues
            .iter()
            .zip(h.suborders())
            .zip(spec.factor_orders().iter().zip(&self.phase_per_generator))
        {
            if sub > 1 {
                let t = r / (k / sub);
                total += phase * Rat::from_integer(t.into());
            }
        }
        frac_mod_1(&total)
    }

    /// Elements of H mapped to phase 0.
    pub fn kernel_elements(&self, spec: &GroupSpec, h: &Subgroup) -> Vec<GroupElement> {
        spec.subgroup_elements(h)
            .into_iter()
            .filter(|g| self.phase_of(spec, h, g).is_zero())
            .collect()
    }
}

pub fn frac_mod_1(r: &Rat) -> Rat {
    let f = r - r.floor();
    if f.is_negative() {
        f + Rat::one()
    } else {
        f
    }
}

/// Every homomorphism Θ: H -> S^1 whose kernel is exactly K. Empty when H/K
/// is not cyclic (finite subgroups of the circle are cyclic); the count is
/// φ(|H|/|K|) otherwise.
pub fn theta_homomorphisms(spec: &GroupSpec, h: &Subgroup, k: &Subgroup) -> Result<Vec<ThetaHom>> {
    if !spec.subgroup_contains(h, k) {
        return Err(Error::NotNested(format!("{k} is not contained in {h}")));
    }
    let k_elements: std::collections::BTreeSet<GroupElement> =
        spec.subgroup_elements(k).into_iter().collect();
    let mut out = Vec::new();
    // A homomorphism is determined by sending the generator of the factor of
    // suborder h_i to a_i/h_i; every choice of a_i is a valid homomorphism.
    let ranges: Vec<u64> = h.suborders().to_vec();
    let mut choice = vec![0u64; ranges.len()];
    loop {
        let hom = ThetaHom {
            phase_per_generator: choice
                .iter()
                .zip(&ranges)
                .map(|(&a, &hh)| Rat::new(a.into(), hh.max(1).into()))
                .collect(),
        };
        let kernel: std::collections::BTreeSet<GroupElement> =
            hom.kernel_elements(spec, h).into_iter().collect();
        if kernel == k_elements {
            out.push(hom);
        }
        // odometer over the choices
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < ranges[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn subgroups_of_z6() {
        let g = GroupSpec::cyclic(6).unwrap();
        let subs: Vec<String> = g
            .enumerate_subgroups()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(subs, ["Z1", "Z2", "Z3", "Z6"]);
    }

    #[test]
    fn subgroups_of_z2xz3() {
        let g = GroupSpec::product(2, 3).unwrap();
        let subs: Vec<String> = g
            .enumerate_subgroups()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(subs, ["Z1xZ1", "Z1xZ3", "Z2xZ1", "Z2xZ3"]);
    }

    #[test]
    fn subgroups_of_z4() {
        let g = GroupSpec::cyclic(4).unwrap();
        let subs: Vec<String> = g
            .enumerate_subgroups()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(subs, ["Z1", "Z2", "Z4"]);
    }

    #[test]
    fn cyclicity_by_coprimality() {
        let g = GroupSpec::product(2, 3).unwrap();
        assert!(g.subgroup(&[2, 3]).unwrap().is_cyclic());
        let g22 = GroupSpec::product(2, 2).unwrap();
        assert!(!g22.subgroup(&[2, 2]).unwrap().is_cyclic());
        let g4 = GroupSpec::cyclic(4).unwrap();
        assert!(g4.subgroup(&[4]).unwrap().is_cyclic());
    }

    #[test]
    fn quotient_cyclicity() {
        let g6 = GroupSpec::cyclic(6).unwrap();
        assert!(quotient_is_cyclic(
            &g6,
            &g6.subgroup(&[6]).unwrap(),
            &g6.subgroup(&[2]).unwrap()
        )
        .unwrap());

        let g24 = GroupSpec::product(2, 4).unwrap();
        assert!(quotient_is_cyclic(
            &g24,
            &g24.subgroup(&[2, 4]).unwrap(),
            &g24.subgroup(&[2, 2]).unwrap()
        )
        .unwrap());

        let g22 = GroupSpec::product(2, 2).unwrap();
        assert!(!quotient_is_cyclic(
            &g22,
            &g22.subgroup(&[2, 2]).unwrap(),
            &g22.subgroup(&[1, 1]).unwrap()
        )
        .unwrap());

        // non-nested pair is rejected
        let g12 = GroupSpec::cyclic(12).unwrap();
        assert!(quotient_is_cyclic(
            &g12,
            &g12.subgroup(&[4]).unwrap(),
            &g12.subgroup(&[3]).unwrap()
        )
        .is_err());
    }

    /// Brute-force oracle: build the quotient group table of H/K on cosets and
    /// look for an element of order |H|/|K|.
    fn quotient_cyclic_oracle(spec: &GroupSpec, h: &Subgroup, k: &Subgroup) -> bool {
        let h_elems = spec.subgroup_elements(h);
        let k_elems: std::collections::BTreeSet<GroupElement> =
            spec.subgroup_elements(k).into_iter().collect();
        let coset_of = |g: &GroupElement| -> std::collections::BTreeSet<GroupElement> {
            k_elems.iter().map(|ke| spec.compose(g, ke)).collect()
        };
        let quotient_order = h.order() / k.order();
        h_elems.iter().any(|g| {
            // order of gK in H/K
            let mut power = g.clone();
            let mut ord = 1u64;
            while !coset_of(&power).contains(&spec.identity()) {
                power = spec.compose(&power, g);
                ord += 1;
            }
            ord == quotient_order
        })
    }

    #[test]
    fn quotient_cyclicity_agrees_with_coset_oracle_up_to_order_36() {
        let mut specs: Vec<GroupSpec> = (1..=12).map(|k| GroupSpec::cyclic(k).unwrap()).collect();
        for l in 2..=6u64 {
            for k in 2..=6u64 {
                specs.push(GroupSpec::product(l, k).unwrap());
            }
        }
        for spec in specs.iter().filter(|s| s.order() <= 36) {
            let subs = spec.enumerate_subgroups();
            for h in &subs {
                for k in &subs {
                    if !spec.subgroup_contains(h, k) {
                        continue;
                    }
                    assert_eq!(
                        quotient_is_cyclic(spec, h, k).unwrap(),
                        quotient_cyclic_oracle(spec, h, k),
                        "disagreement for {spec}, H={h}, K={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn normalizer_is_whole_group() {
        let g = GroupSpec::product(2, 3).unwrap();
        assert_eq!(
            normalizer(&g.trivial_subgroup(), &g),
            g.full_subgroup()
        );
        let g4 = GroupSpec::cyclic(4).unwrap();
        assert_eq!(normalizer(&g4.subgroup(&[2]).unwrap(), &g4), g4.full_subgroup());
        let g6 = GroupSpec::cyclic(6).unwrap();
        assert_eq!(normalizer(&g6.full_subgroup(), &g6), g6.full_subgroup());
    }

    #[test]
    fn theta_homs_z3_over_trivial() {
        let g = GroupSpec::cyclic(3).unwrap();
        let homs = theta_homomorphisms(&g, &g.subgroup(&[3]).unwrap(), &g.trivial_subgroup())
            .unwrap();
        let mut phases: Vec<Rat> = homs
            .iter()
            .map(|h| h.phase_per_generator[0].clone())
            .collect();
        phases.sort();
        assert_eq!(phases, vec![rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn theta_homs_trivial_when_h_equals_k() {
        let g = GroupSpec::cyclic(2).unwrap();
        let h = g.subgroup(&[2]).unwrap();
        let homs = theta_homomorphisms(&g, &h, &h).unwrap();
        assert_eq!(homs.len(), 1);
        assert!(homs[0].phase_per_generator[0].is_zero());
    }

    #[test]
    fn theta_homs_z4_over_z2() {
        let g = GroupSpec::cyclic(4).unwrap();
        let homs = theta_homomorphisms(
            &g,
            &g.subgroup(&[4]).unwrap(),
            &g.subgroup(&[2]).unwrap(),
        )
        .unwrap();
        assert_eq!(homs.len(), 1);
        assert_eq!(homs[0].phase_per_generator[0], rat(1, 2));
    }

    #[test]
    fn theta_homs_empty_for_noncyclic_quotient() {
        let g = GroupSpec::product(2, 2).unwrap();
        let homs = theta_homomorphisms(&g, &g.full_subgroup(), &g.trivial_subgroup()).unwrap();
        assert!(homs.is_empty());
    }

    #[test]
    fn theta_count_matches_euler_phi_and_homomorphism_law() {
        let specs = [
            GroupSpec::cyclic(12).unwrap(),
            GroupSpec::product(2, 4).unwrap(),
            GroupSpec::product(3, 4).unwrap(),
        ];
        for spec in &specs {
            let subs = spec.enumerate_subgroups();
            for h in &subs {
                for k in &subs {
                    if !spec.subgroup_contains(h, k) {
                        continue;
                    }
                    let homs = theta_homomorphisms(spec, h, k).unwrap();
                    if quotient_is_cyclic(spec, h, k).unwrap() {
                        assert_eq!(
                            homs.len() as u64,
                            euler_phi(h.order() / k.order()),
                            "count for {spec}, H={h}, K={k}"
                        );
                    } else {
                        assert!(homs.is_empty());
                    }
                    let h_elems = spec.subgroup_elements(h);
                    for hom in &homs {
                        for a in &h_elems {
                            for b in &h_elems {
                                let lhs = hom.phase_of(spec, h, &spec.compose(a, b));
                                let rhs = frac_mod_1(
                                    &(hom.phase_of(spec, h, a) + hom.phase_of(spec, h, b)),
                                );
                                assert_eq!(lhs, rhs, "homomorphism law in {spec}, H={h}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn parse_group_grammar() {
        assert_eq!(GroupSpec::parse("Z6").unwrap(), GroupSpec::cyclic(6).unwrap());
        assert_eq!(
            GroupSpec::parse("z2xZ3").unwrap(),
            GroupSpec::product(2, 3).unwrap()
        );
        assert!(GroupSpec::parse("Z0").is_err());
        assert!(GroupSpec::parse("Z2xZ3xZ4").is_err());
        assert!(GroupSpec::parse("D4").is_err());
        // two-factor groups require both factors > 1
        assert!(GroupSpec::parse("Z1xZ4").is_err());
    }
}
