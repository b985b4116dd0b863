//! Homotopy limits of inverse sequences of complexes via the mapping
//! telescope, and the induced pairing on telescopes.
//!
//! The homotopy limit of a sequence A_1 <- A_2 <- ... is the shifted cone
//! of (id - shift) on the product. The product is realized degreewise
//! through the tail rule: an eventually constant sequence contributes its
//! stabilized value through one extra slot, an eventually zero sequence
//! contributes nothing. On the source side the extra slot records the tail
//! value, on the target side it is dropped; with that choice (id - shift)
//! is onto and its kernel is the inverse limit, exactly as in the infinite
//! model.

use crate::complex::{cone, tensor_complex, ChainMap, Complex, Cone, CxError, TensorComplex};
use crate::module::ModMap;
use std::collections::BTreeMap;

/// Tail behavior of an inverse sequence beyond the listed stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// A_n = A_N with identity maps for n >= N.
    Constant,
    /// A_n = 0 for n > N.
    Zero,
}

/// A_1 <- A_2 <- ... <- A_N with a tail rule.
#[derive(Clone)]
pub struct InverseSequence {
    pub complexes: Vec<Complex>,
    pub maps: Vec<ChainMap>,
    pub tail: Tail,
}

impl InverseSequence {
    pub fn new(complexes: Vec<Complex>, maps: Vec<ChainMap>, tail: Tail) -> Result<InverseSequence, CxError> {
        if !complexes.is_empty() && maps.len() + 1 != complexes.len() {
            return Err(CxError::Shape(format!(
                "{} stages need {} sequence maps, got {}",
                complexes.len(),
                complexes.len() - 1,
                maps.len()
            )));
        }
        for (k, m) in maps.iter().enumerate() {
            if m.degree != 0 {
                return Err(CxError::Shape("sequence maps must have degree 0".into()));
            }
            if m.src != complexes[k + 1] || m.tgt != complexes[k] {
                return Err(CxError::Shape(format!(
                    "sequence map {} must go from stage {} to stage {}",
                    k,
                    k + 2,
                    k + 1
                )));
            }
            if let Some(n) = m.closedness_failure() {
                return Err(CxError::NotClosed(n));
            }
        }
        Ok(InverseSequence {
            complexes,
            maps,
            tail,
        })
    }

    pub fn constant(c: &Complex, stages: usize) -> InverseSequence {
        let complexes = vec![c.clone(); stages];
        let maps = vec![ChainMap::identity(c); stages.saturating_sub(1)];
        InverseSequence {
            complexes,
            maps,
            tail: Tail::Constant,
        }
    }

    pub fn stages(&self) -> usize {
        self.complexes.len()
    }
}

/// The realized telescope: holim complex plus the projection data needed to
/// compare with the stages and to build pairings.
pub struct Holim {
    pub cx: Complex,
    /// Projections holim -> A_k (1-indexed stages).
    pub proj: Vec<ChainMap>,
    pub(crate) v: Complex,
    pub(crate) u: Complex,
    pub(crate) cone: Cone,
    v_inj: Vec<ChainMap>,
    v_proj: Vec<ChainMap>,
    u_inj: Vec<ChainMap>,
    u_proj: Vec<ChainMap>,
    tail: Tail,
    stages: usize,
}

impl Holim {
    /// Injection of a thread-constant element: lifts a stage-N element to
    /// all slots including the tail. Only meaningful for constant tails
    /// where the sequence maps are identities.
    pub fn constant_thread(&self) -> Option<ChainMap> {
        if self.tail != Tail::Constant || self.stages == 0 {
            return None;
        }
        // sum of all V-slot injections composed with nothing: valid when all
        // stages agree (constant sequences)
        let a = self.v_inj[0].src.clone();
        let mut total = ChainMap::zero(&a, &self.v, 0);
        for inj in &self.v_inj {
            if inj.src != a {
                return None;
            }
            total = total.add(inj);
        }
        // land in the holim through the V-part
        let mut comps = BTreeMap::new();
        for n in a.support() {
            comps.insert(
                n,
                ModMap::compose(&self.cone.inj_a_at(n - 1), &total.comp(n)),
            );
        }
        Some(ChainMap::from_comps(&a, &self.cx, 0, comps))
    }
}

/// holim A_n = cone(prod A_n --(id - shift)--> prod A_n)[-1], with the
/// products realized finitely through the tail rule.
pub fn telescope_holim(seq: &InverseSequence) -> Result<Holim, CxError> {
    let n_stages = seq.stages();
    if n_stages == 0 {
        match seq.tail {
            Tail::Zero => {
                let ring = crate::ring::Ring::Int;
                let z = Complex::zero(ring);
                let cn = cone(&ChainMap::zero(&z, &z, 0))?;
                return Ok(Holim {
                    cx: Complex::zero(ring),
                    proj: vec![],
                    v: z.clone(),
                    u: z,
                    cone: cn,
                    v_inj: vec![],
                    v_proj: vec![],
                    u_inj: vec![],
                    u_proj: vec![],
                    tail: seq.tail,
                    stages: 0,
                });
            }
            Tail::Constant => return Err(CxError::UnboundedProduct),
        }
    }
    let ring = seq.complexes[0].ring;
    let mut v_parts: Vec<&Complex> = seq.complexes.iter().collect();
    let last = &seq.complexes[n_stages - 1];
    if seq.tail == Tail::Constant {
        v_parts.push(last);
    }
    let (v, v_inj, v_proj) = Complex::direct_sum(ring, &v_parts);
    let u_parts: Vec<&Complex> = seq.complexes.iter().collect();
    let (u, u_inj, u_proj) = Complex::direct_sum(ring, &u_parts);

    // id part
    let mut f = ChainMap::zero(&v, &u, 0);
    for k in 0..n_stages {
        f = f.add(&ChainMap::compose(&u_inj[k], &v_proj[k]));
    }
    // minus the shifted part
    f = f.sub(&shift_map(seq, &v_proj, &u_inj));

    let cn = cone(&f)?;
    let holim_cx = cn.cx.shift(-1);
    let mut proj = Vec::new();
    for k in 0..n_stages {
        let mut comps = BTreeMap::new();
        for n in holim_cx.support() {
            let to_v = cn.proj_a_at(n - 1);
            comps.insert(n, ModMap::compose(&v_proj[k].comp(n), &to_v));
        }
        proj.push(ChainMap::from_comps(
            &holim_cx,
            &seq.complexes[k],
            0,
            comps,
        ));
    }
    Ok(Holim {
        cx: holim_cx,
        proj,
        v,
        u,
        cone: cn,
        v_inj,
        v_proj,
        u_inj,
        u_proj,
        tail: seq.tail,
        stages: n_stages,
    })
}

/// The "evaluate one stage later" map V -> U: component k is
/// phi_k(a_{k+1}), with the tail slot feeding stage N.
fn shift_map(seq: &InverseSequence, v_proj: &[ChainMap], u_inj: &[ChainMap]) -> ChainMap {
    let n_stages = seq.stages();
    let v = &v_proj[0].src;
    let u = &u_inj[0].tgt;
    let mut phi = ChainMap::zero(v, u, 0);
    for k in 0..n_stages - 1 {
        let piece = ChainMap::compose(&u_inj[k], &ChainMap::compose(&seq.maps[k], &v_proj[k + 1]));
        phi = phi.add(&piece);
    }
    match seq.tail {
        Tail::Constant => {
            // stage N receives the tail slot through the identity
            let piece = ChainMap::compose(&u_inj[n_stages - 1], &v_proj[n_stages]);
            phi = phi.add(&piece);
        }
        Tail::Zero => {}
    }
    phi
}

/// The pairing on telescopes induced by stagewise pairings, following the
/// cone-product construction: truncate the tensor of two shifted cones and
/// map down through the commuting square.
pub struct TelescopeMul {
    pub map: ChainMap,
    pub tensor: TensorComplex,
    pub lhs: Holim,
    pub rhs: Holim,
    pub out: Holim,
}

/// Stagewise pairings mu_k: (A1_k (x) A2_k) -> A3_k (1-indexed, one per
/// stage). The squares mu_k o (phi1 (x) phi2) = phi3 o mu_{k+1} must commute
/// exactly.
pub fn telescope_mul(
    seq1: &InverseSequence,
    seq2: &InverseSequence,
    seq3: &InverseSequence,
    pairings: &[ChainMap],
) -> Result<TelescopeMul, CxError> {
    let n_stages = seq1.stages();
    if seq2.stages() != n_stages || seq3.stages() != n_stages {
        return Err(CxError::Shape("sequences must have the same number of stages".into()));
    }
    if seq1.tail != seq2.tail || seq1.tail != seq3.tail {
        return Err(CxError::Shape("sequences must share the tail rule".into()));
    }
    if pairings.len() != n_stages {
        return Err(CxError::Shape("one pairing per stage required".into()));
    }
    // stage tensor complexes and pairing validity
    let mut stage_tensors = Vec::new();
    for k in 0..n_stages {
        let t = tensor_complex(&seq1.complexes[k], &seq2.complexes[k]);
        if pairings[k].src != t.cx || pairings[k].tgt != seq3.complexes[k] {
            return Err(CxError::Shape(format!(
                "pairing {} has wrong endpoints",
                k + 1
            )));
        }
        if let Some(d) = pairings[k].closedness_failure() {
            return Err(CxError::NotClosed(d));
        }
        stage_tensors.push(t);
    }
    // compatibility squares
    for k in 0..n_stages - 1 {
        let lhs = ChainMap::compose(
            &pairings[k],
            &tensor_chainmap(&seq1.maps[k], &seq2.maps[k], &stage_tensors[k + 1], &stage_tensors[k]),
        );
        let rhs = ChainMap::compose(&seq3.maps[k], &pairings[k + 1]);
        if lhs != rhs {
            return Err(CxError::IncompatiblePairing(k + 1));
        }
    }

    let h1 = telescope_holim(seq1)?;
    let h2 = telescope_holim(seq2)?;
    let h3 = telescope_holim(seq3)?;
    let t = tensor_complex(&h1.cx, &h2.cx);

    let phi_hat1 = phi_hat(seq1, &h1);

    let mut comps = BTreeMap::new();
    for n in t.cx.support() {
        let src_term = t.cx.term(n);
        let tgt_term = h3.cx.term(n);
        let mut m = ModMap::zero(&src_term, &tgt_term);
        for (p, block) in t.blocks(n) {
            let q = n - p;
            let proj_block = t.proj(n, *p);
            // VV part: into V3^n
            {
                let pv1 = h1.cone.proj_a_at(p - 1); // H1^p -> V1^p
                let pv2 = h2.cone.proj_a_at(q - 1);
                let split = ModMap::tensor(&pv1, &pv2);
                let pair = stagewise_pair(
                    seq1, seq2, seq3, pairings, &stage_tensors, &h1, &h2, &h3, Slot::VV, n, *p,
                );
                let into = ModMap::compose(&h3.cone.inj_a_at(n - 1), &pair);
                let piece = ModMap::compose(&ModMap::compose(&into, &split), proj_block);
                m = m.add(&piece);
            }
            // VU part with the first factor pushed one stage: into U3^{n-1},
            // sign (-1)^p
            {
                let pv1 = h1.cone.proj_a_at(p - 1);
                let pu2 = h2.cone.proj_b_at(q - 1); // H2^q -> U2^{q-1}
                let shifted1 = ModMap::compose(&phi_hat1.comp(*p), &pv1);
                let split = ModMap::tensor(&shifted1, &pu2);
                let pair = stagewise_pair(
                    seq1, seq2, seq3, pairings, &stage_tensors, &h1, &h2, &h3, Slot::VU, n, *p,
                );
                let into = ModMap::compose(&h3.cone.inj_b_at(n - 1), &pair);
                let mut piece = ModMap::compose(&ModMap::compose(&into, &split), proj_block);
                if p.rem_euclid(2) == 1 {
                    piece = piece.neg();
                }
                m = m.add(&piece);
            }
            // UV part: into U3^{n-1}
            {
                let pu1 = h1.cone.proj_b_at(p - 1);
                let pv2 = h2.cone.proj_a_at(q - 1);
                let split = ModMap::tensor(&pu1, &pv2);
                let pair = stagewise_pair(
                    seq1, seq2, seq3, pairings, &stage_tensors, &h1, &h2, &h3, Slot::UV, n, *p,
                );
                let into = ModMap::compose(&h3.cone.inj_b_at(n - 1), &pair);
                let piece = ModMap::compose(&ModMap::compose(&into, &split), proj_block);
                m = m.add(&piece);
            }
            let _ = block;
        }
        comps.insert(n, m);
    }
    let map = ChainMap::from_comps(&t.cx, &h3.cx, 0, comps);
    if let Some(d) = map.closedness_failure() {
        return Err(CxError::Other(format!(
            "telescope pairing failed to be closed at degree {}",
            d
        )));
    }
    Ok(TelescopeMul {
        map,
        tensor: t,
        lhs: h1,
        rhs: h2,
        out: h3,
    })
}

enum Slot {
    VV,
    VU,
    UV,
}

/// The map V -> U evaluating each slot one stage later (the "phi" of the
/// telescope), as a chain map.
fn phi_hat(seq: &InverseSequence, h: &Holim) -> ChainMap {
    shift_map(seq, &h.v_proj, &h.u_inj)
}

/// Stagewise pairing on realized products. Depending on the slot this is
///   VV: V1^p (x) V2^q        -> V3^n        (n = p + q)
///   VU: U1^p (x) U2^{q-1}    -> U3^{n-1}    (first factor already shifted)
///   UV: U1^{p-1} (x) V2^q    -> U3^{n-1}
/// assembled from the per-stage pairings; the tail slot (constant rule)
/// reuses the last pairing.
#[allow(clippy::too_many_arguments)]
fn stagewise_pair(
    seq1: &InverseSequence,
    seq2: &InverseSequence,
    seq3: &InverseSequence,
    pairings: &[ChainMap],
    stage_tensors: &[TensorComplex],
    h1: &Holim,
    h2: &Holim,
    h3: &Holim,
    slot: Slot,
    n: i64,
    p: i64,
) -> ModMap {
    let _ = (seq1, seq2);
    let n_stages = pairings.len();
    let q = n - p;
    let (deg_out, p1, q2) = match slot {
        Slot::VV => (n, p, q),
        Slot::VU => (n - 1, p, q - 1),
        Slot::UV => (n - 1, p - 1, q),
    };
    // source and target modules
    let (m1, m2, tgt, inj3, proj1, proj2): (_, _, _, &[ChainMap], &[ChainMap], &[ChainMap]) =
        match slot {
            Slot::VV => (
                h1.v.term(p1),
                h2.v.term(q2),
                h3.v.term(deg_out),
                &h3.v_inj,
                &h1.v_proj,
                &h2.v_proj,
            ),
            Slot::VU => (
                h1.u.term(p1),
                h2.u.term(q2),
                h3.u.term(deg_out),
                &h3.u_inj,
                &h1.u_proj,
                &h2.u_proj,
            ),
            Slot::UV => (
                h1.u.term(p1),
                h2.v.term(q2),
                h3.u.term(deg_out),
                &h3.u_inj,
                &h1.u_proj,
                &h2.v_proj,
            ),
        };
    let src = crate::module::FpModule::tensor(&m1, &m2).module;
    let mut out = ModMap::zero(&src, &tgt);
    let slot_count = match slot {
        Slot::VV => {
            if seq3.tail == Tail::Constant {
                n_stages + 1
            } else {
                n_stages
            }
        }
        _ => n_stages,
    };
    for s in 0..slot_count {
        let stage = s.min(n_stages - 1);
        let t = &stage_tensors[stage];
        let mu = &pairings[stage];
        // block (p1, q2) of the stage tensor at degree deg_out
        if !t.blocks(deg_out).iter().any(|(bp, _)| *bp == p1) {
            continue;
        }
        let split = ModMap::tensor(&proj1[s].comp(p1), &proj2[s].comp(q2));
        let into_stage = ModMap::compose(&mu.comp(deg_out), t.inj(deg_out, p1));
        let piece = ModMap::compose(
            &ModMap::compose(&inj3[s].comp(deg_out), &into_stage),
            &split,
        );
        out = out.add(&piece);
    }
    out
}

/// Chain map on tensor complexes induced by a pair of degree-0 maps.
pub fn tensor_chainmap(
    f: &ChainMap,
    g: &ChainMap,
    src_t: &TensorComplex,
    tgt_t: &TensorComplex,
) -> ChainMap {
    assert_eq!(f.degree, 0);
    assert_eq!(g.degree, 0);
    let mut comps = BTreeMap::new();
    for n in src_t.cx.support() {
        let src_term = src_t.cx.term(n);
        let tgt_term = tgt_t.cx.term(n);
        let mut m = ModMap::zero(&src_term, &tgt_term);
        for (p, _) in src_t.blocks(n) {
            let q = n - p;
            if !tgt_t.blocks(n).iter().any(|(bp, _)| bp == p) {
                continue;
            }
            let block_map = ModMap::tensor(&f.comp(*p), &g.comp(q));
            let piece = ModMap::compose(
                &ModMap::compose(tgt_t.inj(n, *p), &block_map),
                src_t.proj(n, *p),
            );
            m = m.add(&piece);
        }
        comps.insert(n, m);
    }
    ChainMap::from_comps(&src_t.cx, &tgt_t.cx, 0, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;
    use crate::module::FpModule;
    use crate::ring::{Ring, Scalar};

    fn times_two(ring: Ring) -> Complex {
        let m = FpModule::free(ring, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(ring, &[&[2]])).unwrap();
        Complex::new(ring, 0, vec![m.clone(), m], vec![d]).unwrap()
    }

    #[test]
    fn constant_sequence_has_stage_cohomology() {
        let a = times_two(Ring::Int);
        let seq = InverseSequence::constant(&a, 3);
        let h = telescope_holim(&seq).unwrap();
        for n in -1..=3 {
            assert!(
                h.cx.cohomology(n).is_iso_to(&a.cohomology(n)),
                "degree {}",
                n
            );
        }
        for p in &h.proj {
            assert!(p.is_closed());
        }
    }

    #[test]
    fn zero_tail_sequence_is_acyclic() {
        let a = times_two(Ring::IntMod(4));
        let seq = InverseSequence::new(
            vec![a.clone()],
            vec![],
            Tail::Zero,
        )
        .unwrap();
        let h = telescope_holim(&seq).unwrap();
        assert!(h.cx.is_acyclic());
    }

    #[test]
    fn truncation_tower_recovers_the_complex() {
        let r = Ring::IntMod(4);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let a = Complex::new(r, -2, vec![m.clone(), m.clone(), m.clone()], vec![d.clone(), d]).unwrap();
        // stages: trunc_ge(A, -k), eventually A itself
        let stages: Vec<Complex> = (1..=3).map(|k| a.trunc_ge(-k).0).collect();
        let mut maps = Vec::new();
        for k in 0..2 {
            // projection from the deeper truncation
            let (tk, _) = stages[k + 1].trunc_ge(-(k as i64 + 1));
            assert_eq!(tk, stages[k]);
            let (_, proj) = stages[k + 1].trunc_ge(-(k as i64 + 1));
            maps.push(proj);
        }
        let seq = InverseSequence::new(stages, maps, Tail::Constant).unwrap();
        let h = telescope_holim(&seq).unwrap();
        for n in -3..=1 {
            assert!(
                h.cx.cohomology(n).is_iso_to(&a.cohomology(n)),
                "degree {}",
                n
            );
        }
    }

    #[test]
    fn pairing_on_constant_endomorphism_sequences() {
        // A = endomorphism complex of the mod 4 window, mu = composition
        let r = Ring::IntMod(4);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let w = Complex::new(r, 0, vec![m.clone(), m.clone()], vec![d]).unwrap();
        let hc = crate::homcx::hom_complex(&w, &w);
        let e = hc.cx.clone();
        let stages = 2usize;
        let seq = InverseSequence::constant(&e, stages);
        // composition pairing as a chain map on the tensor complex
        let t = tensor_complex(&e, &e);
        let mut comps = BTreeMap::new();
        for n in t.cx.support() {
            let src_term = t.cx.term(n);
            let tgt_term = e.term(n);
            let mut mm = ModMap::zero(&src_term, &tgt_term);
            for (p, block) in t.blocks(n) {
                let q = n - p;
                // on generators: compose hom elements
                let mut mat = Mat::zeros(r, tgt_term.gens, block.module.gens);
                for gi in 0..block.lhs.gens {
                    for gj in 0..block.rhs.gens {
                        let col = gi * block.rhs.gens + gj;
                        let g_el = crate::complex::El { deg: *p, v: block.lhs.gen_el(gi) };
                        let f_el = crate::complex::El { deg: q, v: block.rhs.gen_el(gj) };
                        let prod = crate::homcx::HomComplex::compose_el(&hc, &g_el, &hc, &f_el, &hc);
                        for rr in 0..tgt_term.gens {
                            mat.set(rr, col, prod.v.at(rr, 0).clone());
                        }
                    }
                }
                let block_map = ModMap::new_unchecked(block.module.clone(), tgt_term.clone(), mat);
                mm = mm.add(&ModMap::compose(&block_map, t.proj(n, *p)));
            }
            comps.insert(n, mm);
        }
        let mu = ChainMap::from_comps(&t.cx, &e, 0, comps);
        assert!(mu.is_closed(), "composition pairing is a chain map");

        let tm = telescope_mul(&seq, &seq, &seq, &vec![mu.clone(); stages]).unwrap();
        assert!(tm.map.is_closed());

        // H^0 recovery: on constant threads the pairing is stage composition
        let lift = tm.lhs.constant_thread().unwrap();
        let id_el = hc.identity_el();
        let x = lift.apply_el(&crate::complex::El { deg: 0, v: id_el.v.clone() });
        let y = x.clone();
        let xy = tm.tensor.pure_el(&x, &y);
        let out = tm.map.apply_el(&xy);
        // project to the last stage and compare with id o id = id
        let projected = tm.out.proj[stages - 1].apply_el(&out);
        assert_eq!(projected.v, id_el.v);
    }

    #[test]
    fn pairing_rejects_incompatible_squares() {
        let r = Ring::IntMod(4);
        let m = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let a = Complex::concentrated(r, 0, m.clone());
        // two stages with a zero sequence map against identity stages
        let seq = InverseSequence::new(
            vec![a.clone(), a.clone()],
            vec![ChainMap::zero(&a, &a, 0)],
            Tail::Zero,
        )
        .unwrap();
        let idseq = InverseSequence::new(
            vec![a.clone(), a.clone()],
            vec![ChainMap::identity(&a)],
            Tail::Zero,
        )
        .unwrap();
        let t = tensor_complex(&a, &a);
        // mu: m (x) m -> m, x (x) y -> xy (multiplication); the same at both
        // stages. With phi = 0 on one side and id on the other the squares
        // cannot commute unless mu = 0.
        let block = &t.blocks(0)[0].1;
        let mm = ModMap::new_unchecked(block.module.clone(), m.clone(), Mat::from_i64(r, &[&[1]]));
        let mu = ChainMap::from_comps(
            &t.cx,
            &a,
            0,
            [(0, ModMap::compose(&mm, t.proj(0, 0)))].into_iter().collect(),
        );
        let res = telescope_mul(&seq, &idseq, &idseq, &[mu.clone(), mu]);
        assert!(matches!(res, Err(CxError::IncompatiblePairing(_))));
    }
}
