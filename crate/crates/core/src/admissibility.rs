//! Per-pair admissibility decisions: the four H mod K conditions (a)-(d),
//! the cyclic-Hopf conditions on top of them, whole-lattice classification
//! tables, the closed-form two-factor predicate, and the gap between abelian
//! and cyclic admissibility.

use crate::group::{quotient_is_cyclic, GroupSpec, Subgroup};
use crate::linalg::Rat;
use crate::representation::{
    find_h_simple, fix_subspace, h_fixes_component, is_isotropy, HSimpleWitness, PermAction,
    WitnessKind,
};
use crate::{Error, Result};
use num_integer::Integer;

#[derive(Clone, Debug)]
pub struct CondReport {
    pub holds: bool,
    pub detail: String,
}

impl CondReport {
    fn new(holds: bool, detail: impl Into<String>) -> Self {
        CondReport {
            holds,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HopfConditions {
    pub h_cyclic: bool,
    pub h_isotropy: bool,
    pub k_cyclic: bool,
    pub h_simple: Option<HSimpleWitness>,
    /// Closed-form exception: some factor has H at full even order with K at
    /// half of it, while K agrees with H on every other factor. Cross-checked
    /// against the constructive scan, which is authoritative.
    pub exception_triggered: bool,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub group: GroupSpec,
    pub h: Subgroup,
    pub k: Subgroup,
    pub cond_a: CondReport,
    pub cond_b: CondReport,
    pub cond_c: CondReport,
    pub cond_d: CondReport,
    pub chamber_witness: Option<usize>,
    pub hopf: Option<HopfConditions>,
    pub verdict_hmodk: bool,
    pub verdict_cyclic_hopf: Option<bool>,
}

impl AdmissibilityReport {
    /// Human-readable reasons the cyclic-Hopf verdict fails; empty when it
    /// holds (or has not been evaluated).
    pub fn failure_reasons(&self) -> Vec<String> {
        let mut reasons = Vec::new();
        if !self.cond_a.holds {
            reasons.push("H/K is not cyclic (condition a)".to_string());
        }
        if !self.cond_b.holds {
            reasons.push("K is not an isotropy subgroup (condition b)".to_string());
        }
        if !self.cond_c.holds {
            reasons.push("fixed-space dimension condition fails (condition c)".to_string());
        }
        if !self.cond_d.holds {
            reasons.push("H fixes no connected component (condition d)".to_string());
        }
        if let Some(hopf) = &self.hopf {
            if !hopf.h_cyclic {
                reasons.push("H is not cyclic".to_string());
            }
            if !hopf.h_isotropy {
                reasons.push("H is not an isotropy subgroup".to_string());
            }
            if !hopf.k_cyclic {
                reasons.push("K is not cyclic".to_string());
            }
            if hopf.h_simple.is_none() {
                reasons.push("no H-simple subspace with kernel K".to_string());
            }
        }
        reasons
    }

    pub fn witness_summary(&self) -> Option<String> {
        self.hopf.as_ref()?.h_simple.as_ref().map(|w| match w.kind {
            WitnessKind::TwoDimMode { block, mode } => {
                format!("mode {mode} of block {block}")
            }
            WitnessKind::OneDimPair { first, second } => format!(
                "pair of modes {}/{} of blocks {}/{}",
                first.1, second.1, first.0, second.0
            ),
        })
    }
}

fn ensure_nested(spec: &GroupSpec, h: &Subgroup, k: &Subgroup) -> Result<()> {
    if spec.subgroup_contains(h, k) {
        Ok(())
    } else {
        Err(Error::NotNested(format!("{k} is not contained in {h}")))
    }
}

/// Conditions (a)-(d) for the pair (H, K). The normalizer in condition (c)
/// is the whole group, since the group is abelian.
pub fn check_hmodk(
    h: &Subgroup,
    k: &Subgroup,
    action: &PermAction,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let spec = action.group();
    ensure_nested(spec, h, k)?;

    let quotient_cyclic = quotient_is_cyclic(spec, h, k)?;
    let cond_a = CondReport::new(
        quotient_cyclic,
        format!("|H/K| = {}", h.order() / k.order()),
    );

    let k_isotropy = is_isotropy(k, action);
    let cond_b = CondReport::new(k_isotropy, format!("K = {k}"));

    let dim_fix_k = fix_subspace(k, action).dim();
    let c_holds = dim_fix_k > 2 || (dim_fix_k == 2 && (h == k || *h == spec.full_subgroup()));
    let cond_c = CondReport::new(c_holds, format!("dim Fix(K) = {dim_fix_k}"));

    let (d_holds, chamber_witness) = if k_isotropy {
        h_fixes_component(h, k, action, seed)?
    } else {
        (false, None)
    };
    let cond_d = CondReport::new(
        d_holds,
        match chamber_witness {
            Some(i) => format!("fixed chamber {i}"),
            None => "no fixed chamber".to_string(),
        },
    );

    let verdict = cond_a.holds && cond_b.holds && cond_c.holds && cond_d.holds;
    Ok(AdmissibilityReport {
        group: spec.clone(),
        h: h.clone(),
        k: k.clone(),
        cond_a,
        cond_b,
        cond_c,
        cond_d,
        chamber_witness,
        hopf: None,
        verdict_hmodk: verdict,
        verdict_cyclic_hopf: None,
    })
}

/// The closed-form exception clause: H at full even order in one factor with
/// K at exactly half, K equal to H elsewhere.
pub fn exception_closed_form(spec: &GroupSpec, h: &Subgroup, k: &Subgroup) -> bool {
    let orders = spec.factor_orders();
    (0..orders.len()).any(|i| {
        let full_even_half = h.suborders()[i] == orders[i]
            && orders[i] % 2 == 0
            && k.suborders()[i] * 2 == h.suborders()[i];
        full_even_half
            && (0..orders.len()).all(|j| j == i || h.suborders()[j] == k.suborders()[j])
    })
}

/// All seven cyclic-Hopf conditions: (a)-(d), H a cyclic isotropy subgroup,
/// K cyclic, and an H-simple subspace with kernel exactly K.
pub fn check_cyclic_hopf(
    h: &Subgroup,
    k: &Subgroup,
    action: &PermAction,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let mut report = check_hmodk(h, k, action, seed)?;
    let spec = action.group();
    let hopf = HopfConditions {
        h_cyclic: h.is_cyclic(),
        h_isotropy: is_isotropy(h, action),
        k_cyclic: k.is_cyclic(),
        h_simple: find_h_simple(h, k, action),
        exception_triggered: exception_closed_form(spec, h, k),
    };
    let verdict = report.verdict_hmodk
        && hopf.h_cyclic
        && hopf.h_isotropy
        && hopf.k_cyclic
        && hopf.h_simple.is_some();
    report.hopf = Some(hopf);
    report.verdict_cyclic_hopf = Some(verdict);
    Ok(report)
}

/// Admissibility under the abelian Hopf theorem: the seven-condition check
/// minus the two cyclicity requirements. This isolates exactly the
/// constraints the cyclic theorem adds.
pub fn abelian_admissible(
    h: &Subgroup,
    k: &Subgroup,
    action: &PermAction,
    seed: u64,
) -> Result<bool> {
    let report = check_hmodk(h, k, action, seed)?;
    Ok(report.verdict_hmodk
        && is_isotropy(h, action)
        && find_h_simple(h, k, action).is_some())
}

/// The literal closed-form classification predicate for the diagonal action
/// of Z_l x Z_k: pairs (Z_m x Z_n, Z_m x Z_q) with q | n barring the
/// (q = k/2, n = k) exception, and (Z_m x Z_n, Z_p x Z_n) with p | m barring
/// the (p = l/2, m = l) exception; in both shapes m, n coprime, and the
/// changing factor coprime to (and different from) its partner.
pub fn theorem_equi_predicate(
    l: u64,
    k: u64,
    h_suborders: (u64, u64),
    k_suborders: (u64, u64),
) -> Result<bool> {
    let (m, n) = h_suborders;
    let (p, q) = k_suborders;
    if l % m != 0 || k % n != 0 || m % p != 0 || n % q != 0 {
        return Err(Error::NotNested(format!(
            "expected p | m | l and q | n | k, got l={l}, k={k}, H=({m},{n}), K=({p},{q})"
        )));
    }
    let shape1 = p == m
        && n % q == 0
        && !(k % 2 == 0 && q == k / 2 && n == k)
        && m.gcd(&n) == 1
        && m.gcd(&q) == 1
        && m != q;
    let shape2 = q == n
        && m % p == 0
        && !(l % 2 == 0 && p == l / 2 && m == l)
        && m.gcd(&n) == 1
        && p.gcd(&n) == 1
        && p != n;
    Ok(shape1 || shape2)
}

/// Whether a pair has one of the two shapes the closed-form theorem covers
/// (K agreeing with H in at least one factor).
pub fn equi_in_scope(h: &Subgroup, k: &Subgroup) -> bool {
    h.suborders()
        .iter()
        .zip(k.suborders())
        .any(|(hs, ks)| hs == ks)
}

#[derive(Clone, Debug)]
pub struct EquiComparison {
    pub in_scope: bool,
    pub predicate: bool,
    pub mismatch: bool,
}

#[derive(Clone, Debug)]
pub struct ClassificationRow {
    pub report: AdmissibilityReport,
    pub equi: Option<EquiComparison>,
}

#[derive(Clone, Debug)]
pub struct ClassificationTable {
    pub group: GroupSpec,
    pub action_dim: usize,
    pub rows: Vec<ClassificationRow>,
}

impl ClassificationTable {
    pub fn mismatches(&self) -> Vec<&ClassificationRow> {
        self.rows
            .iter()
            .filter(|r| r.equi.as_ref().is_some_and(|e| e.mismatch))
            .collect()
    }
}

/// One full report per nested product pair K ⊆ H, sorted by (|H|, |K|,
/// suborders); two-factor rows carry the closed-form comparison.
pub fn classify_all(action: &PermAction, seed: u64) -> Result<ClassificationTable> {
    let spec = action.group();
    let subs = spec.enumerate_subgroups();
    let mut pairs: Vec<(Subgroup, Subgroup)> = Vec::new();
    for h in &subs {
        for k in &subs {
            if spec.subgroup_contains(h, k) {
                pairs.push((h.clone(), k.clone()));
            }
        }
    }
    pairs.sort_by_key(|(h, k)| {
        (
            h.order(),
            k.order(),
            h.suborders().to_vec(),
            k.suborders().to_vec(),
        )
    });

    let mut rows = Vec::with_capacity(pairs.len());
    for (h, k) in pairs {
        let report = check_cyclic_hopf(&h, &k, action, seed)?;
        let equi = if spec.num_factors() == 2 {
            let in_scope = equi_in_scope(&h, &k);
            let predicate = theorem_equi_predicate(
                spec.factor_orders()[0],
                spec.factor_orders()[1],
                (h.suborders()[0], h.suborders()[1]),
                (k.suborders()[0], k.suborders()[1]),
            )?;
            let mismatch = in_scope && predicate != report.verdict_cyclic_hopf.unwrap_or(false);
            Some(EquiComparison {
                in_scope,
                predicate,
                mismatch,
            })
        } else {
            None
        };
        rows.push(ClassificationRow { report, equi });
    }
    Ok(ClassificationTable {
        group: spec.clone(),
        action_dim: action.dim(),
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct GapPair {
    pub h: Subgroup,
    pub k: Subgroup,
    pub reasons: Vec<String>,
}

/// Pairs admissible under the abelian Hopf theorem but not under the cyclic
/// one, with the cyclic-specific conditions that fail.
pub fn abelian_vs_cyclic_gap(action: &PermAction, seed: u64) -> Result<Vec<GapPair>> {
    let spec = action.group();
    if spec.num_factors() < 2 {
        return Err(Error::InvalidGroup(
            "the gap is empty by definition for a single cyclic factor".into(),
        ));
    }
    let subs = spec.enumerate_subgroups();
    let mut out = Vec::new();
    for h in &subs {
        for k in &subs {
            if !spec.subgroup_contains(h, k) {
                continue;
            }
            if !abelian_admissible(h, k, action, seed)? {
                continue;
            }
            let report = check_cyclic_hopf(h, k, action, seed)?;
            if report.verdict_cyclic_hopf == Some(true) {
                continue;
            }
            let hopf = report.hopf.as_ref().expect("full check populates hopf");
            let mut reasons = Vec::new();
            if !hopf.h_cyclic {
                reasons.push("H not cyclic".to_string());
            }
            if !hopf.k_cyclic {
                reasons.push("K not cyclic".to_string());
            }
            debug_assert!(!reasons.is_empty(), "gap pair must fail a cyclicity condition");
            out.push(GapPair {
                h: h.clone(),
                k: k.clone(),
                reasons,
            });
        }
    }
    out.sort_by_key(|p| {
        (
            p.h.order(),
            p.k.order(),
            p.h.suborders().to_vec(),
            p.k.suborders().to_vec(),
        )
    });
    Ok(out)
}

/// Predicted phase map of the bifurcating orbit for an admissible pair: the
/// rotation phases of the H factor generators on the witness plane.
pub fn predicted_theta(witness: &HSimpleWitness) -> Vec<Rat> {
    witness.phases.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn action_of(spec: &GroupSpec) -> PermAction {
        PermAction::standard(spec)
    }

    #[test]
    fn hmodk_z4_over_z2() {
        let spec = GroupSpec::cyclic(4).unwrap();
        let action = action_of(&spec);
        let report = check_hmodk(
            &spec.full_subgroup(),
            &spec.subgroup(&[2]).unwrap(),
            &action,
            1,
        )
        .unwrap();
        assert!(report.cond_a.holds);
        assert!(report.cond_b.holds);
        assert!(report.cond_c.holds);
        // the residual Z2 swaps the two half-planes of Fix(K)
        assert!(!report.cond_d.holds);
        assert!(!report.verdict_hmodk);
    }

    #[test]
    fn hmodk_h_equals_k_is_admissible() {
        let spec = GroupSpec::cyclic(6).unwrap();
        let action = action_of(&spec);
        let z2 = spec.subgroup(&[2]).unwrap();
        let report = check_hmodk(&z2, &z2, &action, 1).unwrap();
        assert!(report.verdict_hmodk);
    }

    #[test]
    fn hmodk_z3_over_trivial() {
        let spec = GroupSpec::cyclic(3).unwrap();
        let action = action_of(&spec);
        let report = check_hmodk(
            &spec.full_subgroup(),
            &spec.trivial_subgroup(),
            &action,
            1,
        )
        .unwrap();
        assert!(report.cond_a.holds && report.cond_b.holds);
        assert!(report.cond_c.holds && report.cond_d.holds);
        assert!(report.verdict_hmodk);
    }

    #[test]
    fn hmodk_rejects_non_nested() {
        let spec = GroupSpec::cyclic(12).unwrap();
        let action = action_of(&spec);
        assert!(check_hmodk(
            &spec.subgroup(&[4]).unwrap(),
            &spec.subgroup(&[3]).unwrap(),
            &action,
            1
        )
        .is_err());
    }

    #[test]
    fn cyclic_hopf_rejects_the_exception_pair() {
        let spec = GroupSpec::cyclic(4).unwrap();
        let action = action_of(&spec);
        let report = check_cyclic_hopf(
            &spec.full_subgroup(),
            &spec.subgroup(&[2]).unwrap(),
            &action,
            1,
        )
        .unwrap();
        assert_eq!(report.verdict_cyclic_hopf, Some(false));
        let hopf = report.hopf.as_ref().unwrap();
        assert!(hopf.h_simple.is_none());
        assert!(hopf.exception_triggered);
        assert!(report
            .failure_reasons()
            .iter()
            .any(|r| r.contains("no H-simple subspace")));
    }

    #[test]
    fn cyclic_hopf_accepts_z3_over_trivial() {
        let spec = GroupSpec::cyclic(3).unwrap();
        let action = action_of(&spec);
        let report = check_cyclic_hopf(
            &spec.full_subgroup(),
            &spec.trivial_subgroup(),
            &action,
            1,
        )
        .unwrap();
        assert_eq!(report.verdict_cyclic_hopf, Some(true));
        assert!(report.failure_reasons().is_empty());
    }

    #[test]
    fn cyclic_hopf_accepts_z6_over_z2_with_mode_two() {
        let spec = GroupSpec::cyclic(6).unwrap();
        let action = action_of(&spec);
        let report = check_cyclic_hopf(
            &spec.full_subgroup(),
            &spec.subgroup(&[2]).unwrap(),
            &action,
            1,
        )
        .unwrap();
        assert_eq!(report.verdict_cyclic_hopf, Some(true));
        assert_eq!(
            report.witness_summary().as_deref(),
            Some("mode 2 of block 0")
        );
    }

    #[test]
    fn exception_closed_form_matches_scan_where_admissible_shapes_apply() {
        // The closed form flags (full even factor, half kernel); on those
        // pairs the constructive scan must find nothing.
        for k in (2..=16u64).step_by(2) {
            let spec = GroupSpec::cyclic(k).unwrap();
            let action = action_of(&spec);
            let h = spec.full_subgroup();
            let kk = spec.subgroup(&[k / 2]).unwrap();
            assert!(exception_closed_form(&spec, &h, &kk));
            assert!(find_h_simple(&h, &kk, &action).is_none());
        }
    }

    #[test]
    fn classify_z3_has_three_nested_pairs() {
        let spec = GroupSpec::cyclic(3).unwrap();
        let table = classify_all(&action_of(&spec), 1).unwrap();
        assert_eq!(table.rows.len(), 3);
        for row in &table.rows {
            assert!(row.report.verdict_cyclic_hopf.is_some());
            assert!(row.equi.is_none());
        }
    }

    #[test]
    fn classify_z4_marks_the_exception_pair() {
        let spec = GroupSpec::cyclic(4).unwrap();
        let table = classify_all(&action_of(&spec), 1).unwrap();
        let row = table
            .rows
            .iter()
            .find(|r| {
                r.report.h == spec.full_subgroup()
                    && r.report.k == spec.subgroup(&[2]).unwrap()
            })
            .unwrap();
        assert_eq!(row.report.verdict_cyclic_hopf, Some(false));
    }

    #[test]
    fn classify_two_factor_enumerates_product_pairs() {
        let spec = GroupSpec::product(2, 3).unwrap();
        let table = classify_all(&action_of(&spec), 1).unwrap();
        // 4 subgroups; nested pairs of divisor tuples
        assert_eq!(table.rows.len(), 9);
        assert!(table.rows.iter().all(|r| r.equi.is_some()));
    }

    #[test]
    fn cyclic_verdict_implies_hmodk_verdict() {
        let specs = [
            GroupSpec::cyclic(8).unwrap(),
            GroupSpec::cyclic(12).unwrap(),
            GroupSpec::product(2, 4).unwrap(),
            GroupSpec::product(3, 4).unwrap(),
        ];
        for spec in &specs {
            let table = classify_all(&action_of(spec), 5).unwrap();
            for row in &table.rows {
                if row.report.verdict_cyclic_hopf == Some(true) {
                    assert!(row.report.verdict_hmodk, "{spec}: {}", row.report.h);
                }
            }
        }
    }

    #[test]
    fn equi_predicate_spec_examples() {
        // q = 1 divides 3, all side conditions hold
        assert!(theorem_equi_predicate(2, 3, (2, 3), (2, 1)).unwrap());
        // m, n not coprime: false for every nested K
        let spec = GroupSpec::product(2, 4).unwrap();
        let h = spec.subgroup(&[2, 4]).unwrap();
        for k in spec.enumerate_subgroups() {
            if spec.subgroup_contains(&h, &k) {
                assert!(!theorem_equi_predicate(
                    2,
                    4,
                    (2, 4),
                    (k.suborders()[0], k.suborders()[1])
                )
                .unwrap());
            }
        }
        assert!(!theorem_equi_predicate(2, 2, (2, 2), (2, 1)).unwrap());
        // exceptions embedded in the two-factor shapes
        assert!(!theorem_equi_predicate(2, 4, (1, 4), (1, 2)).unwrap());
        assert!(!theorem_equi_predicate(2, 4, (2, 1), (1, 1)).unwrap());
        assert!(theorem_equi_predicate(6, 5, (3, 5), (3, 1)).unwrap());
        // exception inside shape 1: q = k/2 with n = k
        assert!(!theorem_equi_predicate(3, 4, (3, 4), (3, 2)).unwrap());
        // rejects non-nested data
        assert!(theorem_equi_predicate(2, 3, (2, 3), (1, 2)).is_err());
    }

    #[test]
    fn gap_for_z2xz4_contains_noncyclic_h_pairs() {
        let spec = GroupSpec::product(2, 4).unwrap();
        let gap = abelian_vs_cyclic_gap(&action_of(&spec), 1).unwrap();
        assert!(!gap.is_empty());
        assert!(gap
            .iter()
            .any(|p| p.reasons.iter().any(|r| r == "H not cyclic")));
        for pair in &gap {
            assert!(!pair.reasons.is_empty());
            let report =
                check_cyclic_hopf(&pair.h, &pair.k, &action_of(&spec), 1).unwrap();
            assert_eq!(report.verdict_cyclic_hopf, Some(false));
        }
    }

    #[test]
    fn gap_rejects_single_factor_groups() {
        let spec = GroupSpec::cyclic(5).unwrap();
        assert!(abelian_vs_cyclic_gap(&action_of(&spec), 1).is_err());
    }

    #[test]
    fn gap_for_z2xz3_may_be_empty_but_well_formed() {
        let spec = GroupSpec::product(2, 3).unwrap();
        let gap = abelian_vs_cyclic_gap(&action_of(&spec), 1).unwrap();
        // every subgroup of Z2 x Z3 is cyclic, so nothing can fail cyclicity
        assert!(gap.is_empty());
    }
}
