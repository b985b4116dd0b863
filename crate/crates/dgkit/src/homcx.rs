//! Hom complexes of bounded complexes, with exact element encoding, the
//! homotopy solver and the homotopy-equivalence decision procedure.

use crate::complex::{cone, ChainMap, Complex, CxError, El, Homotopy};
use crate::mat::{solve_cover, Mat};
use crate::module::{hom_module, FpModule, HomModule, ModMap};
use crate::ring::Ring;
use std::collections::BTreeMap;

/// The hom complex of two bounded complexes, over the hom base ring.
///
/// Degree-n term: product over i of Hom(A^i, B^{n+i}); differential
/// d(f) = d_B o f - (-1)^n f o d_A. Elements translate back and forth to
/// per-degree families of module maps.
pub struct HomComplex {
    pub cx: Complex,
    pub src: Complex,
    pub tgt: Complex,
    base: Ring,
    blocks: BTreeMap<i64, Vec<HomBlock>>,
}

struct HomBlock {
    i: i64,
    hom: HomModule,
    offset: usize,
}

fn encode_family_in(
    base: Ring,
    blocks: &BTreeMap<i64, Vec<HomBlock>>,
    term: &FpModule,
    n: i64,
    fam: &[(i64, ModMap)],
) -> Option<Mat> {
    let mut out = Mat::zeros(base, term.gens, 1);
    let blks = match blocks.get(&n) {
        Some(b) => b,
        None => {
            return fam.iter().all(|(_, f)| f.is_zero_map()).then_some(out);
        }
    };
    for (i, f) in fam {
        if f.is_zero_map() {
            continue;
        }
        let b = blks.iter().find(|b| b.i == *i)?;
        let coords = b.hom.encode(f)?;
        for r in 0..coords.rows {
            out.set(b.offset + r, 0, coords.at(r, 0).clone());
        }
    }
    Some(term.canon(&out))
}

fn differentiate_family(
    src: &Complex,
    tgt: &Complex,
    n: i64,
    fam: &[(i64, ModMap)],
) -> Vec<(i64, ModMap)> {
    let mut by_i: BTreeMap<i64, ModMap> = BTreeMap::new();
    let sign_flip = n.rem_euclid(2) == 1;
    for (i, f) in fam {
        // d_B o f stays in block i
        let left = ModMap::compose(&tgt.diff(n + i), f);
        add_block(&mut by_i, *i, left, src, tgt, n + 1);
        // -(-1)^n f o d_A lands in block i-1
        let mut right = ModMap::compose(f, &src.diff(i - 1));
        if !sign_flip {
            right = right.neg();
        }
        add_block(&mut by_i, i - 1, right, src, tgt, n + 1);
    }
    by_i.into_iter().filter(|(_, m)| !m.is_zero_map()).collect()
}

fn add_block(
    by_i: &mut BTreeMap<i64, ModMap>,
    i: i64,
    m: ModMap,
    src: &Complex,
    tgt: &Complex,
    n: i64,
) {
    if m.is_zero_map() {
        return;
    }
    let entry = by_i
        .entry(i)
        .or_insert_with(|| ModMap::zero(&src.term(i), &tgt.term(n + i)));
    *entry = entry.add(&m);
}

impl HomComplex {
    pub fn new(src: &Complex, tgt: &Complex) -> HomComplex {
        assert_eq!(src.ring, tgt.ring);
        let ring = src.ring;
        let base = ring.hom_base();
        let mut blocks: BTreeMap<i64, Vec<HomBlock>> = BTreeMap::new();
        if !src.is_zero_complex() && !tgt.is_zero_complex() {
            let n_lo = tgt.lo() - src.hi();
            let n_hi = tgt.hi() - src.lo();
            for n in n_lo..=n_hi {
                let mut blks = Vec::new();
                let mut offset = 0;
                for i in src.support() {
                    let j = n + i;
                    if j < tgt.lo() || j > tgt.hi() {
                        continue;
                    }
                    let hom = hom_module(&src.term(i), &tgt.term(j));
                    if hom.module.is_zero_module() {
                        continue;
                    }
                    let gens = hom.module.gens;
                    blks.push(HomBlock { i, hom, offset });
                    offset += gens;
                }
                if !blks.is_empty() {
                    blocks.insert(n, blks);
                }
            }
        }
        let (lo, hi) = match (blocks.keys().next(), blocks.keys().last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0, -1),
        };
        let mut terms = Vec::new();
        for n in lo..=hi {
            terms.push(term_module(base, blocks.get(&n)));
        }
        let mut diffs = Vec::new();
        for n in lo..hi {
            let src_term = &terms[(n - lo) as usize];
            let tgt_term = &terms[(n + 1 - lo) as usize];
            let mut mat = Mat::zeros(base, tgt_term.gens, src_term.gens);
            if let Some(blks) = blocks.get(&n) {
                for b in blks {
                    for g in 0..b.hom.module.gens {
                        let col_idx = b.offset + g;
                        let f_map = b.hom.decode(&b.hom.module.gen_el(g));
                        let dfam = differentiate_family(src, tgt, n, &[(b.i, f_map)]);
                        let col = encode_family_in(base, &blocks, tgt_term, n + 1, &dfam)
                            .expect("derivative of a generator encodes");
                        for r in 0..tgt_term.gens {
                            mat.set(r, col_idx, col.at(r, 0).clone());
                        }
                    }
                }
            }
            diffs.push(ModMap::new_unchecked(src_term.clone(), tgt_term.clone(), mat));
        }
        let cx = if hi >= lo {
            Complex::new(base, lo, terms, diffs).expect("hom complex differential")
        } else {
            Complex::zero(base)
        };
        HomComplex {
            cx,
            src: src.clone(),
            tgt: tgt.clone(),
            base,
            blocks,
        }
    }

    pub fn base(&self) -> Ring {
        self.base
    }

    /// Encode a family of maps {i: A^i -> B^{n+i}} as the degree-n element.
    pub fn encode_family(&self, n: i64, fam: &[(i64, ModMap)]) -> Option<Mat> {
        encode_family_in(self.base, &self.blocks, &self.cx.term(n), n, fam)
    }

    /// Decode a degree-n element into its family of maps.
    pub fn decode_el(&self, e: &El) -> Vec<(i64, ModMap)> {
        let mut fam = Vec::new();
        if let Some(blks) = self.blocks.get(&e.deg) {
            for b in blks {
                let coords = Mat::from_fn(self.base, b.hom.module.gens, 1, |r, _| {
                    e.v.at(b.offset + r, 0).clone()
                });
                fam.push((b.i, b.hom.decode(&coords)));
            }
        }
        fam
    }

    /// Encode a graded map (of matching degree bookkeeping) as an element.
    pub fn encode_chainmap(&self, f: &ChainMap) -> Option<El> {
        assert_eq!(f.src, self.src);
        assert_eq!(f.tgt, self.tgt);
        let fam: Vec<(i64, ModMap)> = self.src.support().map(|i| (i, f.comp(i))).collect();
        let v = self.encode_family(f.degree, &fam)?;
        Some(El { deg: f.degree, v })
    }

    /// Decode an element into a graded map of complexes.
    pub fn decode_to_map(&self, e: &El) -> ChainMap {
        let fam = self.decode_el(e);
        let comps: BTreeMap<i64, ModMap> = fam.into_iter().collect();
        ChainMap::from_comps(&self.src, &self.tgt, e.deg, comps)
    }

    pub fn is_cocycle(&self, e: &El) -> bool {
        let img = self.cx.diff(e.deg).apply(&e.v);
        self.cx.term(e.deg + 1).is_zero_el(&img)
    }

    pub fn differential_el(&self, e: &El) -> El {
        El {
            deg: e.deg + 1,
            v: self.cx.diff(e.deg).apply(&e.v),
        }
    }

    /// Composition of elements: self = Hom(B, C), other = Hom(A, B); the
    /// result is encoded in `hom_ac`.
    pub fn compose_el(
        hom_bc: &HomComplex,
        g: &El,
        hom_ab: &HomComplex,
        f: &El,
        hom_ac: &HomComplex,
    ) -> El {
        let g_fam: BTreeMap<i64, ModMap> = hom_bc.decode_el(g).into_iter().collect();
        let f_fam = hom_ab.decode_el(f);
        let mut out = Vec::new();
        for (i, fi) in f_fam {
            // f^i : A^i -> B^{i + |f|}; match with g^{i + |f|}
            if let Some(gj) = g_fam.get(&(i + f.deg)) {
                out.push((i, ModMap::compose(gj, &fi)));
            }
        }
        let v = hom_ac
            .encode_family(g.deg + f.deg, &out)
            .expect("composite encodes");
        El {
            deg: g.deg + f.deg,
            v,
        }
    }

    /// The identity endomorphism as a degree-0 element (for self-hom
    /// complexes).
    pub fn identity_el(&self) -> El {
        assert_eq!(self.src, self.tgt);
        self.encode_chainmap(&ChainMap::identity(&self.src))
            .map(|e| e)
            .expect("identity encodes")
    }

    fn rows_for_blocks_up_to(&self, n: i64, i_max: i64) -> Vec<usize> {
        let mut rows = Vec::new();
        if let Some(blks) = self.blocks.get(&n) {
            for b in blks {
                if b.i <= i_max {
                    for r in 0..b.hom.module.gens {
                        rows.push(b.offset + r);
                    }
                }
            }
        }
        rows
    }
}

fn term_module(base: Ring, blocks: Option<&Vec<HomBlock>>) -> FpModule {
    match blocks {
        None => FpModule::zero(base),
        Some(blks) => {
            let mods: Vec<FpModule> = blks.iter().map(|b| b.hom.module.clone()).collect();
            let refs: Vec<&FpModule> = mods.iter().collect();
            FpModule::direct_sum(base, &refs).0
        }
    }
}

fn rels_with_structural(m: &FpModule) -> Mat {
    match m.ring.structural() {
        Some(s) => m.rels.hcat(&Mat::scalar(m.ring, m.gens, &s)),
        None => m.rels.clone(),
    }
}

/// dh + hd = f, solved exactly; None is a proof that f is not
/// null-homotopic.
pub fn solve_homotopy(f: &ChainMap) -> Result<Option<Homotopy>, CxError> {
    if f.degree != 0 {
        return Err(CxError::Shape("homotopy solving needs a degree-0 map".into()));
    }
    if let Some(n) = f.closedness_failure() {
        return Err(CxError::NotClosed(n));
    }
    let hc = HomComplex::new(&f.src, &f.tgt);
    let y = match hc.encode_chainmap(f) {
        Some(e) => e,
        None => return Err(CxError::Other("map does not encode in its hom complex".into())),
    };
    if hc.cx.term(0).is_zero_el(&y.v) {
        return Ok(Some(ChainMap::zero(&f.src, &f.tgt, -1)));
    }
    let d = hc.cx.diff(-1);
    let term0 = hc.cx.term(0);
    let lhs = d.mat.hcat(&rels_with_structural(&term0));
    match solve_cover(&lhs, &y.v) {
        None => Ok(None),
        Some(sol) => {
            let x = sol.submatrix(0, d.src.gens, 0, 1);
            let h = hc.decode_to_map(&El {
                deg: -1,
                v: hc.cx.term(-1).canon(&x),
            });
            Ok(Some(h))
        }
    }
}

/// Outcome of the homotopy-equivalence decision.
pub enum HtpyEq {
    /// Quasi-inverse and homotopies: d h_src + h_src d = id - g o f and
    /// d h_tgt + h_tgt d = id - f o g.
    Yes {
        inverse: ChainMap,
        h_src: Homotopy,
        h_tgt: Homotopy,
    },
    /// The contraction system for the cone is infeasible already when
    /// restricted to degrees <= witness.
    No { witness: i64 },
}

impl HtpyEq {
    pub fn is_yes(&self) -> bool {
        matches!(self, HtpyEq::Yes { .. })
    }
}

/// Decide homotopy equivalence: f is one iff cone(f) is contractible, and
/// contractibility is decided by solving for a contraction of the identity.
pub fn is_homotopy_equivalence(f: &ChainMap) -> Result<HtpyEq, CxError> {
    let cn = cone(f)?;
    let id = ChainMap::identity(&cn.cx);
    match solve_homotopy(&id)? {
        Some(sigma) => {
            let a = &f.src;
            let b = &f.tgt;
            let mut g_comps = BTreeMap::new();
            let mut ha_comps = BTreeMap::new();
            let mut hb_comps = BTreeMap::new();
            for n in b.support() {
                let s = sigma.comp(n); // cone^n -> cone^{n-1}
                let g = ModMap::compose(&ModMap::compose(&cn.proj_a_at(n - 1), &s), &cn.inj_b_at(n));
                g_comps.insert(n, g);
                let hb = ModMap::compose(&ModMap::compose(&cn.proj_b_at(n - 1), &s), &cn.inj_b_at(n));
                hb_comps.insert(n, hb);
            }
            for n in a.support() {
                let s_prev = sigma.comp(n - 1); // cone^{n-1} -> cone^{n-2}
                let ha = ModMap::compose(
                    &ModMap::compose(&cn.proj_a_at(n - 2), &s_prev),
                    &cn.inj_a_at(n - 1),
                )
                .neg();
                ha_comps.insert(n, ha);
            }
            let inverse = ChainMap::from_comps(b, a, 0, g_comps);
            let h_src = ChainMap::from_comps(a, a, -1, ha_comps);
            let h_tgt = ChainMap::from_comps(b, b, -1, hb_comps);
            Ok(HtpyEq::Yes {
                inverse,
                h_src,
                h_tgt,
            })
        }
        None => {
            let witness = first_infeasible_prefix(&cn.cx);
            Ok(HtpyEq::No { witness })
        }
    }
}

/// Smallest degree d such that the contraction equations restricted to the
/// blocks at source degrees <= d are already infeasible.
fn first_infeasible_prefix(c: &Complex) -> i64 {
    let hc = HomComplex::new(c, c);
    let d = hc.cx.diff(-1);
    let term0 = hc.cx.term(0);
    let id_el = hc
        .encode_chainmap(&ChainMap::identity(c))
        .expect("identity encodes");
    for dcap in c.lo()..=c.hi() {
        let rows = hc.rows_for_blocks_up_to(0, dcap);
        if rows.is_empty() {
            continue;
        }
        let lhs = restrict_rows(&d.mat, &rows).hcat(&restrict_rows(&rels_with_structural(&term0), &rows));
        let rhs = restrict_rows(&id_el.v, &rows);
        if solve_cover(&lhs, &rhs).is_none() {
            return dcap;
        }
    }
    c.hi()
}

fn restrict_rows(m: &Mat, rows: &[usize]) -> Mat {
    Mat::from_fn(m.ring, rows.len(), m.cols, |i, j| m.at(rows[i], j).clone())
}

/// All cohomology groups of the cone vanish.
pub fn is_quasi_isomorphism(f: &ChainMap) -> Result<bool, CxError> {
    let cn = cone(f)?;
    Ok(cn.cx.is_acyclic())
}

/// Convenience constructor.
pub fn hom_complex(a: &Complex, b: &Complex) -> HomComplex {
    HomComplex::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Scalar;

    fn times_two(ring: Ring) -> Complex {
        let m = FpModule::free(ring, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(ring, &[&[2]])).unwrap();
        Complex::new(ring, 0, vec![m.clone(), m], vec![d]).unwrap()
    }

    fn contractible(ring: Ring) -> Complex {
        let m = FpModule::free(ring, 1);
        let d = ModMap::identity(&m);
        Complex::new(ring, 0, vec![m.clone(), m], vec![d]).unwrap()
    }

    #[test]
    fn identity_on_contractible_is_nullhomotopic() {
        let c = contractible(Ring::IntMod(4));
        let id = ChainMap::identity(&c);
        let h = solve_homotopy(&id).unwrap().unwrap();
        assert!(id.is_witnessed_by(&h));
    }

    #[test]
    fn identity_on_field_point_is_not_nullhomotopic() {
        let c = Complex::concentrated(Ring::IntMod(2), 0, FpModule::free(Ring::IntMod(2), 1));
        let id = ChainMap::identity(&c);
        assert!(solve_homotopy(&id).unwrap().is_none());
    }

    #[test]
    fn p_times_identity_on_periodic_window() {
        // window of ... -> Z/p^2 -p-> Z/p^2 -> ... of even length
        let p = 2i64;
        let r = Ring::IntMod((p * p) as u64);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[p]])).unwrap();
        let terms = vec![m.clone(); 6];
        let diffs = vec![d; 5];
        let c = Complex::new(r, 0, terms, diffs).unwrap();
        let pid = ChainMap::scalar_endo(&c, &Scalar::from_i64(p, r));
        let h = solve_homotopy(&pid).unwrap().expect("p id is null-homotopic");
        assert!(pid.is_witnessed_by(&h));
        // the alternating homotopy (1 in odd degrees) is also a witness
        let mut comps = BTreeMap::new();
        for n in 1..6 {
            if n % 2 == 1 {
                comps.insert(n as i64, ModMap::identity(&m));
            }
        }
        let alt = ChainMap::from_comps(&c, &c, -1, comps);
        assert!(pid.is_witnessed_by(&alt));
    }

    #[test]
    fn hom_complex_h0_counts_homotopy_classes() {
        // interior endomorphisms of the mod-4 window: H^0 has 4 elements
        let r = Ring::IntMod(4);
        let m = FpModule::free(r, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let c = Complex::new(r, 0, vec![m.clone(), m.clone(), m.clone(), m.clone()], vec![d.clone(), d.clone(), d]).unwrap();
        let hc = hom_complex(&c, &c);
        let h0 = hc.cx.cohomology(0);
        assert_eq!(h0.cardinality(), Some(4));
        // identity is a closed degree-0 element
        let id = hc.identity_el();
        assert!(hc.is_cocycle(&id));
    }

    #[test]
    fn hom_complex_into_zero() {
        let c = times_two(Ring::Int);
        let z = Complex::zero(Ring::Int);
        let hc = hom_complex(&c, &z);
        assert!(hc.cx.is_zero_complex());
    }

    #[test]
    fn homotopy_equivalence_identity_and_zero() {
        let c = times_two(Ring::IntMod(4));
        let id = ChainMap::identity(&c);
        assert!(is_homotopy_equivalence(&id).unwrap().is_yes());
        let zero = ChainMap::zero(&c, &c, 0);
        match is_homotopy_equivalence(&zero).unwrap() {
            HtpyEq::No { .. } => {}
            _ => panic!("zero map on a complex with nonzero cohomology"),
        }
    }

    #[test]
    fn quasi_iso_that_is_not_homotopy_equivalence() {
        // (Z -2-> Z) -> (Z/2 in degree 1)
        let z = FpModule::free(Ring::Int, 1);
        let a = times_two(Ring::Int);
        let z2 = FpModule::cyclic(Ring::Int, &Scalar::from_i64(2, Ring::Int));
        let b = Complex::concentrated(Ring::Int, 1, z2.clone());
        let proj = ModMap::new(z, z2, Mat::from_i64(Ring::Int, &[&[1]])).unwrap();
        let f = ChainMap::from_comps(&a, &b, 0, [(1, proj)].into_iter().collect());
        assert!(f.is_closed());
        assert!(is_quasi_isomorphism(&f).unwrap());
        match is_homotopy_equivalence(&f).unwrap() {
            HtpyEq::No { .. } => {}
            _ => panic!("should not be a homotopy equivalence over Z"),
        }
    }

    #[test]
    fn homotopy_equivalence_witnesses_are_exact() {
        // a contractible summand: A vs A + (M = M)
        let r = Ring::IntMod(4);
        let m = FpModule::free(r, 1);
        let a = Complex::concentrated(r, 0, FpModule::cyclic(r, &Scalar::from_i64(2, r)));
        let k = Complex::new(r, 0, vec![m.clone(), m.clone()], vec![ModMap::identity(&m)]).unwrap();
        let (sum, injs, _) = Complex::direct_sum(r, &[&a, &k]);
        let f = injs[0].clone();
        match is_homotopy_equivalence(&f).unwrap() {
            HtpyEq::Yes {
                inverse,
                h_src,
                h_tgt,
            } => {
                let gf = ChainMap::compose(&inverse, &f);
                let fg = ChainMap::compose(&f, &inverse);
                assert!(ChainMap::identity(&a).sub(&gf).is_witnessed_by(&h_src));
                assert!(ChainMap::identity(&sum).sub(&fg).is_witnessed_by(&h_tgt));
            }
            _ => panic!("inclusion of a direct summand with contractible complement"),
        }
    }

    #[test]
    fn compose_elements_matches_map_composition() {
        let r = Ring::IntMod(4);
        let c = times_two(r);
        let hc = hom_complex(&c, &c);
        let id = hc.identity_el();
        let two = hc
            .encode_chainmap(&ChainMap::scalar_endo(&c, &Scalar::from_i64(2, r)))
            .unwrap();
        let prod = HomComplex::compose_el(&hc, &two, &hc, &id, &hc);
        assert_eq!(prod.v, two.v);
    }

    #[test]
    fn nullhomotopy_infeasibility_cross_check() {
        // exhaustive check on a small ring: solve_homotopy(f) = None implies
        // no h exists among all degree -1 maps
        let r = Ring::IntMod(2);
        let m = FpModule::free(r, 1);
        let c = Complex::new(r, 0, vec![m.clone(), m.clone()], vec![ModMap::zero(&m, &m)]).unwrap();
        let id = ChainMap::identity(&c);
        assert!(solve_homotopy(&id).unwrap().is_none());
        // all candidate homotopies: maps c^1 -> c^0, i.e. 2 of them
        for v in 0..2i64 {
            let h = ChainMap::from_comps(
                &c,
                &c,
                -1,
                [(1, ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[v]])).unwrap())]
                    .into_iter()
                    .collect(),
            );
            assert!(!id.is_witnessed_by(&h));
        }
    }
}
