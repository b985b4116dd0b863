//! Constructive 3-step generation: the zero-differential objects, the two
//! structure maps out of the kernels, and an explicit homotopy equivalence
//! between the cone of their sum and the input complex plus contractibles.
//! Also a bounded membership checker for generation in at most three steps.

use crate::complex::{cone, ChainMap, Complex, CxError, El};
use crate::dg::DgCat;
use crate::mat::Mat;
use crate::module::{FpModule, ModMap};
use crate::ring::Scalar;
use crate::twisted::{Pretr, SearchBound, TwistedComplex};
use std::collections::BTreeMap;
use std::sync::Arc;

/// The full witness data for the 3-step generation of a bounded complex.
pub struct GenWitness {
    pub input: Complex,
    /// Kernels K^i of the differentials, with their inclusions.
    pub kernels: BTreeMap<i64, (FpModule, ModMap)>,
    /// The zero-differential complex of kernels (K^i in degree i).
    pub v_kernels: Complex,
    /// The zero-differential complex with A^{i-1} in degree i.
    pub v_terms: Complex,
    /// The map assembled from the factorizations A^{i-1} -> K^i.
    pub alpha: ChainMap,
    /// C = cone(alpha): the direct sum of the two-term pieces.
    pub c_star: Complex,
    /// The sum of the two structure maps K^i -> C.
    pub phi_psi: ChainMap,
    /// cone(phi + psi).
    pub cone_cx: Complex,
    /// input (+) contractible pieces.
    pub target: Complex,
    /// Mutually inverse chain maps between cone(phi+psi) and the target.
    pub to_target: ChainMap,
    pub from_target: ChainMap,
    /// Homotopy witnesses (identically zero here: the equivalence is an
    /// isomorphism on the nose, kept as data so the certificate is uniform).
    pub h_cone: ChainMap,
    pub h_target: ChainMap,
}

impl GenWitness {
    /// Re-check every certificate: closedness, the two composite identities
    /// up to the recorded homotopies, and cohomology agreement.
    pub fn verify(&self) -> bool {
        if !self.alpha.is_closed()
            || !self.phi_psi.is_closed()
            || !self.to_target.is_closed()
            || !self.from_target.is_closed()
        {
            return false;
        }
        let uv = ChainMap::compose(&self.to_target, &self.from_target);
        let vu = ChainMap::compose(&self.from_target, &self.to_target);
        if !ChainMap::identity(&self.target).sub(&uv).is_witnessed_by(&self.h_target) {
            return false;
        }
        if !ChainMap::identity(&self.cone_cx).sub(&vu).is_witnessed_by(&self.h_cone) {
            return false;
        }
        for n in self.input.lo() - 1..=self.input.hi() + 1 {
            if !self
                .cone_cx
                .cohomology(n)
                .is_iso_to(&self.input.cohomology(n))
            {
                return false;
            }
        }
        true
    }
}

/// Build the 3-step witness: kernels, factorizations, the cone of the two
/// structure maps, and the explicit equivalence with input (+)
/// contractibles.
pub fn three_step_witness(a: &Complex) -> Result<GenWitness, CxError> {
    let ring = a.ring;
    let lo = a.lo();
    let hi = a.hi();
    // kernels with inclusions
    let mut kernels = BTreeMap::new();
    for i in lo..=hi {
        let (k, incl) = a.diff(i).kernel();
        kernels.insert(i, (k, incl));
    }
    let kernel_at = |i: i64| -> (FpModule, ModMap) {
        kernels
            .get(&i)
            .cloned()
            .unwrap_or_else(|| {
                let z = FpModule::zero(ring);
                (z.clone(), ModMap::zero(&z, &a.term(i)))
            })
    };
    // V with K^i in degree i; W with A^{i-1} in degree i
    let v_entries: Vec<(i64, FpModule)> = (lo..=hi).map(|i| (i, kernel_at(i).0)).collect();
    let v_kernels = Complex::v_object(ring, &v_entries);
    let w_entries: Vec<(i64, FpModule)> = (lo + 1..=hi + 1).map(|i| (i, a.term(i - 1))).collect();
    let v_terms = Complex::v_object(ring, &w_entries);
    // alpha^i: A^{i-1} -> K^i factoring d^{i-1}
    let mut alpha_comps = BTreeMap::new();
    for i in v_terms.support() {
        let (k, incl) = kernel_at(i);
        let prev = a.term(i - 1);
        let mut mat = Mat::zeros(ring, k.gens, prev.gens);
        for j in 0..prev.gens {
            let col = a.diff(i - 1).mat.col(j);
            let pre = incl
                .preimage(&col)
                .expect("d^2 = 0, so boundaries are cycles");
            for r in 0..k.gens {
                mat.set(r, j, pre.at(r, 0).clone());
            }
        }
        alpha_comps.insert(i, ModMap::new_unchecked(v_terms.term(i), v_kernels.term(i), mat));
    }
    let alpha = ChainMap::from_comps(&v_terms, &v_kernels, 0, alpha_comps);
    if !alpha.is_closed() {
        return Err(CxError::Other("factorization map failed to be closed".into()));
    }
    let c_cone = cone(&alpha)?;
    let c_star = c_cone.cx.clone();
    // phi + psi: K^i -> C^i = A^i (+) K^i, x -> (incl x, x)
    let mut pp_comps = BTreeMap::new();
    for i in v_kernels.support() {
        let (_, incl) = kernel_at(i);
        let via_a = ModMap::compose(&c_cone.inj_a_at(i), &incl);
        let via_k = c_cone.inj_b_at(i).clone();
        pp_comps.insert(i, via_a.add(&via_k));
    }
    let phi_psi = ChainMap::from_comps(&v_kernels, &c_star, 0, pp_comps);
    if !phi_psi.is_closed() {
        return Err(CxError::Other("structure map failed to be closed".into()));
    }
    let big = cone(&phi_psi)?;
    let cone_cx = big.cx.clone();
    // contractible pieces: for each i, K^i = K^i in degrees (i-1, i)
    let con = contractible_of_kernels(a, &kernel_at);
    let (target, t_injs, t_projs) = Complex::direct_sum(ring, &[a, &con.cx]);
    // q: cone -> A, (k', a, k) -> (-1)^n (a - incl k)
    // theta: cone -> Con, (k', a, k) -> (k' + alpha a, k)
    // j: A -> cone, a -> (-1)^n (-alpha a, a, 0)
    // v_c: Con -> cone, (l, r) -> (l, incl r, r)
    let mut u_comps = BTreeMap::new();
    let mut v_comps = BTreeMap::new();
    for n in cone_cx.support().chain(target.support()) {
        if u_comps.contains_key(&n) {
            continue;
        }
        let sign = if n.rem_euclid(2) == 1 { -1i64 } else { 1 };
        let sgn = Scalar::from_i64(sign, ring);
        let (_, incl_n) = kernel_at(n);

        // projections out of cone^n
        let to_kp = big.proj_a_at(n); // -> K^{n+1}
        let to_c = big.proj_b_at(n); // -> C^n
        let to_a = ModMap::compose(&c_cone.proj_a_at(n), &to_c); // -> A^n
        let to_k = ModMap::compose(&c_cone.proj_b_at(n), &to_c); // -> K^n
        // q
        let q = to_a.sub(&ModMap::compose(&incl_n, &to_k)).scale(&sgn);
        // theta
        let alpha_n1 = factor_component(&alpha, n + 1);
        let th_l = to_kp.add(&ModMap::compose(&alpha_n1, &to_a));
        let th_r = to_k.clone();
        let theta = ModMap::compose(&con.inj_l(n), &th_l).add(&ModMap::compose(&con.inj_r(n), &th_r));
        let u_n = ModMap::compose(&t_injs[0].comp(n), &q)
            .add(&ModMap::compose(&t_injs[1].comp(n), &theta));
        u_comps.insert(n, u_n);
        // j
        let into_kp = big.inj_a_at(n); // K^{n+1} -> cone^n
        let into_a = ModMap::compose(&big.inj_b_at(n), &c_cone.inj_a_at(n));
        let into_k = ModMap::compose(&big.inj_b_at(n), &c_cone.inj_b_at(n));
        let j_map = into_kp
            .neg()
            .compose_with(&alpha_n1)
            .add(&into_a)
            .scale(&sgn);
        // v_c
        let vc = ModMap::compose(&into_kp, &con.proj_l(n))
            .add(&ModMap::compose(&into_a, &ModMap::compose(&incl_n, &con.proj_r(n))))
            .add(&ModMap::compose(&into_k, &con.proj_r(n)));
        let v_n = ModMap::compose(&j_map, &t_projs[0].comp(n))
            .add(&ModMap::compose(&vc, &t_projs[1].comp(n)));
        v_comps.insert(n, v_n);
    }
    let to_target = ChainMap::from_comps(&cone_cx, &target, 0, u_comps);
    let from_target = ChainMap::from_comps(&target, &cone_cx, 0, v_comps);
    let h_cone = ChainMap::zero(&cone_cx, &cone_cx, -1);
    let h_target = ChainMap::zero(&target, &target, -1);
    let w = GenWitness {
        input: a.clone(),
        kernels,
        v_kernels,
        v_terms,
        alpha,
        c_star,
        phi_psi,
        cone_cx,
        target,
        to_target,
        from_target,
        h_cone,
        h_target,
    };
    if !w.verify() {
        return Err(CxError::Other("witness verification failed".into()));
    }
    Ok(w)
}

trait ComposeWith {
    fn compose_with(self, inner: &ModMap) -> ModMap;
}
impl ComposeWith for ModMap {
    fn compose_with(self, inner: &ModMap) -> ModMap {
        ModMap::compose(&self, inner)
    }
}

fn factor_component(alpha: &ChainMap, n: i64) -> ModMap {
    // component A^{n-1} -> K^n under the degree convention of v_terms
    let m = alpha.comp(n);
    m
}

/// The direct sum over i of the contractible pieces K^i = K^i in degrees
/// (i-1, i), with slot maps.
struct ConData {
    cx: Complex,
    l_slots: BTreeMap<i64, (ModMap, ModMap)>, // inj/proj of the K^{n+1} slot at degree n
    r_slots: BTreeMap<i64, (ModMap, ModMap)>, // inj/proj of the K^n slot at degree n
}

impl ConData {
    fn inj_l(&self, n: i64) -> ModMap {
        self.l_slots
            .get(&n)
            .map(|(i, _)| i.clone())
            .unwrap_or_else(|| panic!("missing contractible slot at {}", n))
    }
    fn proj_l(&self, n: i64) -> ModMap {
        self.l_slots.get(&n).map(|(_, p)| p.clone()).unwrap()
    }
    fn inj_r(&self, n: i64) -> ModMap {
        self.r_slots.get(&n).map(|(i, _)| i.clone()).unwrap()
    }
    fn proj_r(&self, n: i64) -> ModMap {
        self.r_slots.get(&n).map(|(_, p)| p.clone()).unwrap()
    }
}

fn contractible_of_kernels(
    a: &Complex,
    kernel_at: &dyn Fn(i64) -> (FpModule, ModMap),
) -> ConData {
    let ring = a.ring;
    let lo = a.lo() - 1;
    let hi = a.hi() + 1;
    let mut terms = Vec::new();
    let mut l_slots = BTreeMap::new();
    let mut r_slots = BTreeMap::new();
    for n in lo..=hi {
        let kl = kernel_at(n + 1).0;
        let kr = kernel_at(n).0;
        let (total, injs, projs) = FpModule::direct_sum(ring, &[&kl, &kr]);
        l_slots.insert(n, (injs[0].clone(), projs[0].clone()));
        r_slots.insert(n, (injs[1].clone(), projs[1].clone()));
        terms.push(total);
    }
    let mut diffs = Vec::new();
    for n in lo..hi {
        // d(l, r) = (0, l)
        let (inj_l, proj_l) = (&l_slots[&n], ());
        let _ = proj_l;
        let d = ModMap::compose(
            &r_slots[&(n + 1)].0,
            &ModMap::compose(&ModMap::identity(&kernel_at(n + 1).0), &inj_l.1),
        );
        diffs.push(d);
    }
    let cx = Complex::new(ring, lo, terms, diffs).expect("contractible differential");
    // rebuild slot maps against the trimmed complex where needed
    let mut l2 = BTreeMap::new();
    let mut r2 = BTreeMap::new();
    for n in lo..=hi {
        let term = cx.term(n);
        let kl = kernel_at(n + 1).0;
        let kr = kernel_at(n).0;
        if term.gens == kl.gens + kr.gens {
            l2.insert(n, l_slots[&n].clone());
            r2.insert(n, r_slots[&n].clone());
        } else {
            // trimmed to zero
            l2.insert(
                n,
                (
                    ModMap::zero(&kl, &term),
                    ModMap::zero(&term, &kl),
                ),
            );
            r2.insert(
                n,
                (
                    ModMap::zero(&kr, &term),
                    ModMap::zero(&term, &kr),
                ),
            );
        }
    }
    ConData {
        cx,
        l_slots: l2,
        r_slots: r2,
    }
}

/// How an object in the membership search was assembled.
#[derive(Clone, Debug)]
pub enum WitnessNode {
    /// A finite sum of shifts of generating objects.
    ShiftSum(Vec<(usize, i64)>),
    /// A cone on a morphism from a shifted sum into a previously built
    /// object.
    Triangle {
        sub: Box<WitnessNode>,
        quot: Box<WitnessNode>,
    },
}

/// A successful membership certificate.
pub struct MemberWitness {
    pub level: usize,
    pub object: TwistedComplex,
    pub tree: WitnessNode,
    /// H^0 classes: maps t -> object and object -> t composing to the
    /// identity class of t.
    pub section_class: Mat,
    pub retraction_class: Mat,
}

pub enum Membership {
    Member(MemberWitness),
    NotWithinBound,
}

/// Bounded breadth-first membership check for generation in at most
/// `level` steps (level <= 3) inside the twisted-complex hull.
pub fn gen_membership(
    cat: &Arc<DgCat>,
    generators: &[usize],
    t: &TwistedComplex,
    level: usize,
    bound: SearchBound,
) -> Result<Membership, crate::dg::DgError> {
    let pretr = Pretr::new(cat.clone());
    // contractibles are retracts of the zero object
    if pretr.is_contractible_tw(t) {
        return Ok(Membership::Member(MemberWitness {
            level: 1,
            object: TwistedComplex {
                entries: vec![],
                twist: BTreeMap::new(),
            },
            tree: WitnessNode::ShiftSum(vec![]),
            section_class: Mat::zeros(cat.ring, 0, 1),
            retraction_class: Mat::zeros(cat.ring, 0, 1),
        }));
    }
    let mut tier: Vec<(TwistedComplex, WitnessNode)> = shift_sums(generators, &bound);
    // level 1: retracts of shift sums
    for (cand, node) in &tier {
        if let Some((u, p)) = retract_classes(&pretr, t, cand)? {
            return Ok(Membership::Member(MemberWitness {
                level: 1,
                object: cand.clone(),
                tree: node.clone(),
                section_class: u,
                retraction_class: p,
            }));
        }
    }
    for lvl in 2..=level {
        // next tier: cones of closed degree-0 maps from shifted sums into
        // the previous tier
        let mut next: Vec<(TwistedComplex, WitnessNode)> = Vec::new();
        let sums = shift_sums(generators, &bound);
        for (t1, node1) in &tier {
            for (s2, node2) in &sums {
                let s2m = pretr.shift_tw(s2, -1);
                for w in closed_degree0_classes(&pretr, &s2m, t1, bound.max_entries * 4)? {
                    let (cn, _, _) = match pretr.cone_tw(&s2m, t1, &w) {
                        Ok(c) => c,
                        Err(_) => continue,
                    };
                    next.push((
                        cn,
                        WitnessNode::Triangle {
                            sub: Box::new(node1.clone()),
                            quot: Box::new(node2.clone()),
                        },
                    ));
                }
            }
        }
        for (cand, node) in &next {
            if let Some((u, p)) = retract_classes(&pretr, t, cand)? {
                return Ok(Membership::Member(MemberWitness {
                    level: lvl,
                    object: cand.clone(),
                    tree: node.clone(),
                    section_class: u,
                    retraction_class: p,
                }));
            }
        }
        tier = next;
        if tier.is_empty() {
            break;
        }
    }
    Ok(Membership::NotWithinBound)
}

fn shift_sums(generators: &[usize], bound: &SearchBound) -> Vec<(TwistedComplex, WitnessNode)> {
    let mut singles = Vec::new();
    for &g in generators {
        for s in bound.shift_lo..=bound.shift_hi {
            singles.push((g, s));
        }
    }
    let mut out = Vec::new();
    // the empty sum (the zero object) witnesses contractibles
    out.push((
        TwistedComplex {
            entries: vec![],
            twist: BTreeMap::new(),
        },
        WitnessNode::ShiftSum(vec![]),
    ));
    let mut frontier: Vec<Vec<(usize, i64)>> = vec![vec![]];
    for _ in 0..bound.max_entries {
        let mut next = Vec::new();
        for partial in &frontier {
            for &(g, s) in &singles {
                // nondecreasing to avoid permutations
                if let Some(&last) = partial.last() {
                    if (g, s) < last {
                        continue;
                    }
                }
                let mut v = partial.clone();
                v.push((g, s));
                next.push(v);
            }
        }
        for v in &next {
            out.push((
                TwistedComplex {
                    entries: v.clone(),
                    twist: BTreeMap::new(),
                },
                WitnessNode::ShiftSum(v.clone()),
            ));
        }
        frontier = next;
    }
    out
}

/// H^0 classes of closed degree-0 morphisms a -> b, capped in number.
fn closed_degree0_classes(
    pretr: &Pretr,
    a: &TwistedComplex,
    b: &TwistedComplex,
    cap: usize,
) -> Result<Vec<crate::twisted::TwEl>, crate::dg::DgError> {
    let data = pretr.hom_data(a, b);
    let h0 = data.cx.cohomology_at(0);
    let classes = match h0.module.enumerate() {
        Some(c) => c,
        None => return Err(crate::dg::DgError::InfiniteEnumeration),
    };
    let mut out = Vec::new();
    for c in classes.into_iter().take(cap.max(1)) {
        let rep = h0.rep(&c);
        let el = El { deg: 0, v: rep };
        out.push(data.decode(&el));
    }
    Ok(out)
}

/// Search for H^0 classes u: t -> cand and p: cand -> t with [p][u] = [id],
/// working directly on the twisted hom complexes.
fn retract_classes(
    pretr: &Pretr,
    t: &TwistedComplex,
    cand: &TwistedComplex,
) -> Result<Option<(Mat, Mat)>, crate::dg::DgError> {
    let data_tc = pretr.hom_data(t, cand);
    let data_ct = pretr.hom_data(cand, t);
    let data_tt = pretr.hom_data(t, t);
    let h0_tc = data_tc.cx.cohomology_at(0);
    let h0_ct = data_ct.cx.cohomology_at(0);
    let h0_tt = data_tt.cx.cohomology_at(0);
    let fwd = match h0_tc.module.enumerate() {
        Some(e) => e,
        None => return Err(crate::dg::DgError::InfiniteEnumeration),
    };
    let bwd = match h0_ct.module.enumerate() {
        Some(e) => e,
        None => return Err(crate::dg::DgError::InfiniteEnumeration),
    };
    let id_t = pretr.identity_tw(t);
    let id_el = data_tt
        .encode(pretr, t, t, &id_t)
        .ok_or_else(|| crate::dg::DgError::Other("identity fails to encode".into()))?;
    let unit = h0_tt
        .classify(&id_el.v)
        .ok_or_else(|| crate::dg::DgError::Other("identity is not a cycle".into()))?;
    for u in &fwd {
        let u_tw = data_tc.decode(&El {
            deg: 0,
            v: h0_tc.rep(u),
        });
        for p in &bwd {
            let p_tw = data_ct.decode(&El {
                deg: 0,
                v: h0_ct.rep(p),
            });
            let pu = pretr.compose_tw(t, cand, t, &p_tw, &u_tw);
            let Some(enc) = data_tt.encode(pretr, t, t, &pu) else {
                continue;
            };
            let Some(cls) = h0_tt.classify(&enc.v) else {
                continue;
            };
            if h0_tt.module.eq_el(&cls, &unit) {
                return Ok(Some((u.clone(), p.clone())));
            }
        }
    }
    Ok(None)
}

/// Membership witness for a bounded complex over a field with generators
/// the ground field: the 3-step construction gives the explicit triangle
/// tree without search.
pub struct FieldComplexMembership {
    pub witness: GenWitness,
    pub tree: WitnessNode,
    pub level: usize,
}

pub fn gen_membership_field_complex(a: &Complex) -> Result<FieldComplexMembership, CxError> {
    if !a.ring.hom_base().is_field() {
        return Err(CxError::Other("this route needs a field base".into()));
    }
    let witness = three_step_witness(a)?;
    // V-objects are shift sums of the ground field; C is the cone of a map
    // of shift sums; the cone of phi+psi retracts onto the input.
    let mut v_sum = Vec::new();
    for i in witness.v_kernels.support() {
        let (f, free) = witness.v_kernels.term(i).invariant_factors();
        let dim = free + f.len();
        for _ in 0..dim {
            v_sum.push((0usize, -i));
        }
    }
    let mut w_sum = Vec::new();
    for i in witness.v_terms.support() {
        let (f, free) = witness.v_terms.term(i).invariant_factors();
        for _ in 0..(free + f.len()) {
            w_sum.push((0usize, -i));
        }
    }
    let tree = WitnessNode::Triangle {
        sub: Box::new(WitnessNode::Triangle {
            sub: Box::new(WitnessNode::ShiftSum(w_sum)),
            quot: Box::new(WitnessNode::ShiftSum(v_sum.clone())),
        }),
        quot: Box::new(WitnessNode::ShiftSum(v_sum)),
    };
    Ok(FieldComplexMembership {
        witness,
        tree,
        level: 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn witness_single_module_in_degree_zero() {
        let r = Ring::IntMod(4);
        let m = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let a = Complex::concentrated(r, 0, m.clone());
        let w = three_step_witness(&a).unwrap();
        assert!(w.verify());
        // K^0 = the module itself
        assert!(w.kernels[&0].0.is_iso_to(&m));
    }

    #[test]
    fn witness_identity_two_term() {
        let r = Ring::IntMod(2);
        let m = FpModule::free(r, 1);
        let a = Complex::new(r, 0, vec![m.clone(), m.clone()], vec![ModMap::identity(&m)]).unwrap();
        let w = three_step_witness(&a).unwrap();
        assert!(w.verify());
        assert!(w.kernels[&1].0.is_iso_to(&m));
        assert!(w.kernels[&0].0.is_zero_module());
    }

    #[test]
    fn witness_acyclic_three_term_mod4() {
        let r = Ring::IntMod(4);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let a = Complex::new(r, 0, vec![m.clone(), m.clone(), m.clone()], vec![d.clone(), d]).unwrap();
        let w = three_step_witness(&a).unwrap();
        assert!(w.verify());
        for n in 0..=2 {
            assert!(w.cone_cx.cohomology(n).is_iso_to(&a.cohomology(n)));
        }
    }

    #[test]
    fn witness_over_the_integers_with_torsion_cohomology() {
        let m = FpModule::free(Ring::Int, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(Ring::Int, &[&[2]])).unwrap();
        let a = Complex::new(Ring::Int, 0, vec![m.clone(), m], vec![d]).unwrap();
        let w = three_step_witness(&a).unwrap();
        assert!(w.verify());
    }

    #[test]
    fn membership_level_one_for_generator() {
        let r = Ring::IntMod(2);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let cat = Arc::new(DgCat::concrete(r, vec![("k".into(), k)]).unwrap());
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        let bound = SearchBound {
            max_entries: 1,
            shift_lo: 0,
            shift_hi: 0,
        };
        match gen_membership(&cat, &[0], &t, 3, bound).unwrap() {
            Membership::Member(w) => assert_eq!(w.level, 1),
            _ => panic!("generator should be a member at level 1"),
        }
    }

    #[test]
    fn membership_level_two_for_cone() {
        let r = Ring::IntMod(2);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let cat = Arc::new(DgCat::concrete(r, vec![("k".into(), k)]).unwrap());
        let p = Pretr::new(cat.clone());
        // cone of 0: k[-1+1]... use the cone of the zero map k -> k
        let t0 = p.one_term(0);
        let (cn, _, _) = p.cone_tw(&t0, &t0, &crate::twisted::TwEl::zero(0)).unwrap();
        let bound = SearchBound {
            max_entries: 2,
            shift_lo: -1,
            shift_hi: 1,
        };
        match gen_membership(&cat, &[0], &cn, 3, bound).unwrap() {
            Membership::Member(w) => assert!(w.level <= 2, "level {}", w.level),
            _ => panic!("cone should be reachable"),
        }
    }

    #[test]
    fn field_complex_membership_level_three() {
        let r = Ring::IntMod(3);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[0]])).unwrap();
        let a = Complex::new(r, 0, vec![m.clone(), m], vec![d]).unwrap();
        let fm = gen_membership_field_complex(&a).unwrap();
        assert!(fm.witness.verify());
        assert_eq!(fm.level, 3);
        match &fm.tree {
            WitnessNode::Triangle { .. } => {}
            _ => panic!("expected a triangle tree"),
        }
    }
}
