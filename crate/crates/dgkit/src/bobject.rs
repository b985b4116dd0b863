//! Structured zero-differential objects over a pretriangulated backend:
//! the two halves with their splitting maps, the truncated hom subcomplexes
//! indexed by a level, restricted compositions, the leading-term
//! projections with their compatibility square, and the homotopy-limit
//! comparison of the level filtration.

use crate::complex::{ChainMap, Complex, El};
use crate::dg::{DgCat, DgError};
use crate::mat::Mat;
use crate::module::{hom_module, FpModule, ModMap};
use crate::telescope::{telescope_holim, InverseSequence, Tail};
use crate::twisted::{Pretr, TwEl, TwHom, TwistedComplex};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Shared backend for a family of structured objects: one concrete
/// category holding every piece module, with its twisted-complex hull.
pub struct ZigzagWorld {
    pub cat: Arc<DgCat>,
    pub pretr: Pretr,
    vs: Vec<Complex>,
    piece_obj: Vec<BTreeMap<i64, usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EntryKind {
    Plain,
    ConeShift,
    ConePlain,
}

/// A bounded structured object: B^- and B^+ carry the pieces of
/// nonpositive and positive degrees together with cones of identities, and
/// the structure maps satisfy the strict splitting identities.
pub struct BObject {
    pub v_index: usize,
    pub minus: TwistedComplex,
    pub plus: TwistedComplex,
    pub total: TwistedComplex,
    /// alpha^i: B^i[-i] -> total (landing in the correct half).
    pub alpha: BTreeMap<i64, TwEl>,
    /// beta^i: total -> B^i[-i].
    pub beta: BTreeMap<i64, TwEl>,
    /// (piece degree, kind) per entry of `total`.
    tags: Vec<(i64, EntryKind)>,
    pub lo: i64,
    pub hi: i64,
}

impl ZigzagWorld {
    pub fn new(module_ring: crate::ring::Ring, vs: Vec<Complex>) -> Result<ZigzagWorld, DgError> {
        let mut objs = Vec::new();
        let mut piece_obj = Vec::new();
        for (vi, v) in vs.iter().enumerate() {
            let mut m = BTreeMap::new();
            for i in v.support() {
                let t = v.term(i);
                if t.is_zero_module() {
                    continue;
                }
                m.insert(i, objs.len());
                objs.push((
                    format!("V{}d{}", vi, i),
                    Complex::concentrated(module_ring, 0, t),
                ));
            }
            piece_obj.push(m);
        }
        if objs.is_empty() {
            objs.push((
                "Z".to_string(),
                Complex::concentrated(module_ring, 0, FpModule::free(module_ring, 1)),
            ));
        }
        let cat = Arc::new(DgCat::concrete(module_ring, objs)?);
        Ok(ZigzagWorld {
            pretr: Pretr::new(cat.clone()),
            cat,
            vs,
            piece_obj,
        })
    }

    pub fn v(&self, idx: usize) -> &Complex {
        &self.vs[idx]
    }

    /// Build the structured object of the idx-th zero-differential complex:
    /// each half is the sum of the shifted pieces and one cone of an
    /// identity per piece, with inclusion/projection structure maps.
    pub fn b_object(&self, idx: usize) -> Result<BObject, DgError> {
        let _ = &self.vs[idx];
        let mut minus_entries: Vec<(usize, i64)> = Vec::new();
        let mut minus_twist: BTreeMap<(usize, usize), El> = BTreeMap::new();
        let mut plus_entries: Vec<(usize, i64)> = Vec::new();
        let mut plus_twist: BTreeMap<(usize, usize), El> = BTreeMap::new();
        let mut minus_tags: Vec<(i64, EntryKind)> = Vec::new();
        let mut plus_tags: Vec<(i64, EntryKind)> = Vec::new();
        let (mut lo, mut hi) = (0i64, 0i64);
        for (&i, &obj) in &self.piece_obj[idx] {
            lo = lo.min(i);
            hi = hi.max(i);
            let unit = self.cat.unit(obj);
            if i <= 0 {
                let base = minus_entries.len();
                minus_entries.push((obj, -i));
                minus_tags.push((i, EntryKind::Plain));
                // cone(id) of the shifted piece: entries (obj, -i+1), (obj, -i)
                minus_entries.push((obj, -i + 1));
                minus_tags.push((i, EntryKind::ConeShift));
                minus_entries.push((obj, -i));
                minus_tags.push((i, EntryKind::ConePlain));
                minus_twist.insert((base + 2, base + 1), unit.clone());
            } else {
                let base = plus_entries.len();
                plus_entries.push((obj, -i));
                plus_tags.push((i, EntryKind::Plain));
                plus_entries.push((obj, -i + 1));
                plus_tags.push((i, EntryKind::ConeShift));
                plus_entries.push((obj, -i));
                plus_tags.push((i, EntryKind::ConePlain));
                plus_twist.insert((base + 2, base + 1), unit.clone());
            }
        }
        let minus = TwistedComplex {
            entries: minus_entries,
            twist: minus_twist,
        };
        let plus = TwistedComplex {
            entries: plus_entries,
            twist: plus_twist,
        };
        self.pretr.validate(&minus)?;
        self.pretr.validate(&plus)?;
        let (total, _injs, _projs) = self.pretr.sum_tw(&[&minus, &plus]);
        let tags: Vec<(i64, EntryKind)> = minus_tags.into_iter().chain(plus_tags).collect();
        // structure maps into/out of the total
        let mut alpha = BTreeMap::new();
        let mut beta = BTreeMap::new();
        for (&i, &obj) in &self.piece_obj[idx] {
            let unit = self.cat.unit(obj);
            // entry indices in the total
            let plain = tags
                .iter()
                .position(|&(pi, k)| pi == i && k == EntryKind::Plain)
                .expect("plain entry exists");
            let cone_plain = tags
                .iter()
                .position(|&(pi, k)| pi == i && k == EntryKind::ConePlain)
                .expect("cone entry exists");
            let mut a = TwEl::zero(0);
            a.blocks.insert((plain, 0), unit.clone());
            a.blocks.insert((cone_plain, 0), unit.clone());
            alpha.insert(i, a);
            let mut b = TwEl::zero(0);
            b.blocks.insert((0, plain), unit.clone());
            beta.insert(i, b);
        }
        let b = BObject {
            v_index: idx,
            minus,
            plus,
            total,
            alpha,
            beta,
            tags,
            lo,
            hi,
        };
        // strictness of (B.1) and closedness of the structure maps
        for (&i, a) in &b.alpha {
            let shifted = self.pretr.one_term(self.piece_obj[idx][&i]);
            let shifted = self.pretr.shift_tw(&shifted, -i);
            if !self.pretr.is_closed_tw(&shifted, &b.total, a) {
                return Err(DgError::Other("alpha fails to be closed".into()));
            }
            for (&j, bt) in &b.beta {
                if (i > 0) != (j > 0) {
                    continue;
                }
                let tgt = self.pretr.one_term(self.piece_obj[idx][&j]);
                let tgt = self.pretr.shift_tw(&tgt, -j);
                let comp = self.pretr.compose_tw(&shifted, &b.total, &tgt, bt, a);
                if i == j {
                    let id = self.pretr.identity_tw(&shifted);
                    if !self.pretr.eq_tw(&shifted, &tgt, &comp, &id) {
                        return Err(DgError::Other("beta o alpha is not the identity".into()));
                    }
                } else if !self.pretr.is_zero_tw(&shifted, &tgt, &comp) {
                    return Err(DgError::Other("beta o alpha is not zero".into()));
                }
            }
        }
        Ok(b)
    }

    /// The group label of an entry at level n: the piece degree clamped to
    /// [-n-1, n+1], with the cone summands absorbed into the outer groups.
    fn group_at(&self, b: &BObject, entry: usize, n: i64) -> i64 {
        let (i, kind) = b.tags[entry];
        match kind {
            EntryKind::Plain => i.clamp(-n - 1, n + 1),
            _ => {
                if i <= 0 {
                    -n - 1
                } else {
                    n + 1
                }
            }
        }
    }

    /// The level-n hom subcomplex with its embedding into the full hom
    /// complex: outer blocks (first index -n-1 or second n+1) enter whole,
    /// inner blocks enter through the smart truncation at degree j - i.
    pub fn hom_n(&self, b1: &BObject, b2: &BObject, n: i64) -> Result<HomN, DgError> {
        assert!(n >= 1, "levels start at 1");
        let full = self.pretr.hom_data(&b1.total, &b2.total);
        // group pairs present
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        for gi in -n - 1..=n + 1 {
            for gj in -n - 1..=n + 1 {
                pairs.push((gi, gj));
            }
        }
        let mut block_cxs: Vec<((i64, i64), Complex, ChainMap)> = Vec::new();
        for (gi, gj) in pairs {
            let sel = |tgt_entry: usize, src_entry: usize| {
                self.group_at(b1, src_entry, n) == gi && self.group_at(b2, tgt_entry, n) == gj
            };
            let Some((cx, incl)) = selected_subcomplex(&full, &sel) else {
                continue;
            };
            if gi == -n - 1 || gj == n + 1 {
                block_cxs.push(((gi, gj), cx, incl));
            } else if gi >= -n && gj <= n {
                let (tr, tr_incl) = cx.trunc_le(gj - gi);
                if tr.is_zero_complex() {
                    continue;
                }
                let emb = ChainMap::compose(&incl, &tr_incl);
                block_cxs.push(((gi, gj), tr, emb));
            }
        }
        let refs: Vec<&Complex> = block_cxs.iter().map(|(_, c, _)| c).collect();
        let (sum, _injs, projs) = Complex::direct_sum(full.cx.ring, &refs);
        let mut embed = ChainMap::zero(&sum, &full.cx, 0);
        for (k, (_, _, emb)) in block_cxs.iter().enumerate() {
            embed = embed.add(&ChainMap::compose(emb, &projs[k]));
        }
        if !embed.is_closed() {
            return Err(DgError::Other("level subcomplex embedding is not a chain map".into()));
        }
        Ok(HomN {
            n,
            cx: sum,
            embed,
            full,
            blocks: block_cxs,
        })
    }

    /// g o f through the ambient hom complex, landing in the smaller level
    /// subcomplex. The window conditions of the restriction lemma are
    /// enforced.
    pub fn restricted_compose(
        &self,
        b1: &BObject,
        b2: &BObject,
        b3: &BObject,
        n: i64,
        k: i64,
        l: i64,
        f2n: &HomN,
        f: &El,
        g2n: &HomN,
        g: &El,
        target_n: &HomN,
    ) -> Result<El, DgError> {
        if n < k.max(l).max(1) {
            return Err(DgError::Other(format!(
                "window violation: n = {} < max(k, l, 1) with k = {}, l = {}",
                n, k, l
            )));
        }
        if f.deg > k || g.deg > l {
            return Err(DgError::Other("window violation: element degree above its truncation".into()));
        }
        let f_amb = f2n.full.decode(&f2n.embed.apply_el(f));
        let g_amb = g2n.full.decode(&g2n.embed.apply_el(g));
        let comp = self
            .pretr
            .compose_tw(&b1.total, &b2.total, &b3.total, &g_amb, &f_amb);
        let enc = target_n
            .full
            .encode(&self.pretr, &b1.total, &b3.total, &comp)
            .ok_or_else(|| DgError::Other("composite does not encode".into()))?;
        // membership in the level subcomplex
        target_n.member_from_full(&enc)
    }

    /// Leading-term projection p_n^k of an element of the level complex.
    pub fn proj_pnk(&self, hom: &HomN, k: i64, x: &El) -> Result<OverlineEl, DgError> {
        if x.deg > k {
            return Err(DgError::Other("window violation: degree above k".into()));
        }
        let mut comps = BTreeMap::new();
        for (b, ((gi, gj), cx, _)) in hom.blocks.iter().enumerate() {
            if *gi < -hom.n || *gj > hom.n {
                continue;
            }
            let d = gj - gi;
            if d != x.deg || d > k {
                continue;
            }
            // block component of x at its top degree, classified in the
            // block cohomology
            let block_x = hom.block_component(b, x);
            let h = cx.cohomology_at(d);
            let cls = h
                .classify(&block_x)
                .ok_or_else(|| DgError::Other("component is not a cycle at the leading degree".into()))?;
            comps.insert((*gi, *gj), cls);
        }
        Ok(OverlineEl {
            deg: x.deg,
            comps,
        })
    }

    /// The composite pairing on leading terms: compose class
    /// representatives in the ambient hom complex, then project.
    #[allow(clippy::too_many_arguments)]
    pub fn overline_compose(
        &self,
        b1: &BObject,
        b2: &BObject,
        b3: &BObject,
        n: i64,
        k: i64,
        l: i64,
        f2n: &HomN,
        pf: &OverlineEl,
        g2n: &HomN,
        pg: &OverlineEl,
        target_n: &HomN,
    ) -> Result<OverlineEl, DgError> {
        let mut out: BTreeMap<(i64, i64), Mat> = BTreeMap::new();
        let ring = target_n.cx.ring;
        for (&(i1, j1), cf) in &pf.comps {
            for (&(i2, j2), cg) in &pg.comps {
                if j1 != i2 {
                    continue;
                }
                let gi = i1.clamp(-n - 1, n + 1);
                let gj = j2.clamp(-n - 1, n + 1);
                if gi < -n || gj > n || gj - gi > k + l {
                    continue;
                }
                // representatives in the big level complexes
                let f_el = f2n.class_rep(i1, j1, cf)?;
                let g_el = g2n.class_rep(i2, j2, cg)?;
                let f_amb = f2n.full.decode(&f2n.embed.apply_el(&f_el));
                let g_amb = g2n.full.decode(&g2n.embed.apply_el(&g_el));
                let comp = self
                    .pretr
                    .compose_tw(&b1.total, &b2.total, &b3.total, &g_amb, &f_amb);
                let enc = target_n
                    .full
                    .encode(&self.pretr, &b1.total, &b3.total, &comp)
                    .ok_or_else(|| DgError::Other("composite does not encode".into()))?;
                let member = target_n.member_from_full(&enc)?;
                // classify in the target block
                for (b, ((tgi, tgj), cx, _)) in target_n.blocks.iter().enumerate() {
                    if (*tgi, *tgj) != (gi, gj) {
                        continue;
                    }
                    let d = gj - gi;
                    if member.deg != d {
                        continue;
                    }
                    let block_x = target_n.block_component(b, &member);
                    let h = cx.cohomology_at(d);
                    let cls = h
                        .classify(&block_x)
                        .ok_or_else(|| DgError::Other("composite leading term is not a cycle".into()))?;
                    let entry = out.entry((gi, gj)).or_insert_with(|| {
                        Mat::zeros(ring, cls.rows, 1)
                    });
                    *entry = entry.add(&cls);
                }
            }
        }
        Ok(OverlineEl {
            deg: pf.deg + pg.deg,
            comps: out,
        })
    }

    /// The compatibility square on a spanning set of element pairs:
    /// p_n^{k+l} o m_n^{k,l} against the leading-term composition of the
    /// projections.
    #[allow(clippy::too_many_arguments)]
    pub fn compat_check(
        &self,
        b1: &BObject,
        b2: &BObject,
        b3: &BObject,
        n: i64,
        k: i64,
        l: i64,
    ) -> Result<CompatOutcome, DgError> {
        let f2n = self.hom_n(b1, b2, 2 * n)?;
        let g2n = self.hom_n(b2, b3, 2 * n)?;
        let tn = self.hom_n(b1, b3, n)?;
        for fd in f2n.cx.support() {
            if fd > k {
                continue;
            }
            let ft = f2n.cx.term(fd);
            for gd in g2n.cx.support() {
                if gd > l {
                    continue;
                }
                let gt = g2n.cx.term(gd);
                for fi in 0..ft.gens {
                    let f = El {
                        deg: fd,
                        v: ft.gen_el(fi),
                    };
                    for gi in 0..gt.gens {
                        let g = El {
                            deg: gd,
                            v: gt.gen_el(gi),
                        };
                        let m = self.restricted_compose(b1, b2, b3, n, k, l, &f2n, &f, &g2n, &g, &tn)?;
                        let lhs = self.proj_pnk(&tn, k + l, &m)?;
                        let pf = self.proj_pnk(&f2n, k, &f)?;
                        let pg = self.proj_pnk(&g2n, l, &g)?;
                        let rhs =
                            self.overline_compose(b1, b2, b3, n, k, l, &f2n, &pf, &g2n, &pg, &tn)?;
                        if !overline_eq(&tn, &lhs, &rhs) {
                            return Ok(CompatOutcome::Fail {
                                witness: (fd, fi, gd, gi),
                            });
                        }
                    }
                }
            }
        }
        Ok(CompatOutcome::Pass)
    }

    /// Homotopy limit of the level filtration of the hom complex, compared
    /// degreewise with the product of piece-to-piece homs.
    pub fn holim_hom_check(
        &self,
        b1: &BObject,
        b2: &BObject,
        window: (i64, i64),
    ) -> Result<HolimHomReport, DgError> {
        // levels until stabilization
        let max_level = (b1.hi.abs().max(b1.lo.abs()).max(b2.hi.abs()).max(b2.lo.abs()) + 2).max(2);
        let mut cxs = Vec::new();
        let mut datas = Vec::new();
        for n in 1..=max_level {
            let h = self.hom_n(b1, b2, n)?;
            cxs.push(h.cx.clone());
            datas.push(h);
        }
        // inclusion maps hom_{n+1} -> hom_n through the full complex
        let mut maps = Vec::new();
        for n in 0..datas.len() - 1 {
            let big = &datas[n + 1];
            let small = &datas[n];
            let mut comps = BTreeMap::new();
            for d in big.cx.support() {
                let src = big.cx.term(d);
                let tgt = small.cx.term(d);
                let mut mat = Mat::zeros(src.ring, tgt.gens, src.gens);
                for g in 0..src.gens {
                    let e = El {
                        deg: d,
                        v: src.gen_el(g),
                    };
                    let amb = big.embed.apply_el(&e);
                    let member = small.member_from_full(&amb)?;
                    for r in 0..tgt.gens {
                        mat.set(r, g, member.v.at(r, 0).clone());
                    }
                }
                comps.insert(d, ModMap::new_unchecked(src, tgt, mat));
            }
            maps.push(ChainMap::from_comps(&big.cx, &small.cx, 0, comps));
        }
        // reverse: sequence index 1 is hom_1, maps go from deeper levels down
        let seq = InverseSequence::new(cxs, maps, Tail::Constant)
            .map_err(|e| DgError::Other(format!("{}", e)))?;
        let holim = telescope_holim(&seq).map_err(|e| DgError::Other(format!("{}", e)))?;
        let mut lines = Vec::new();
        let mut pass = true;
        for l in window.0..=window.1 {
            let lhs = holim.cx.cohomology(l);
            // product over i of Hom(B1^i, B2^{i+l}) at the module level
            let mut parts = Vec::new();
            for i in b1.lo..=b1.hi {
                let m1 = self.vs[b1.v_index].term(i);
                let m2 = self.vs[b2.v_index].term(i + l);
                if m1.is_zero_module() || m2.is_zero_module() {
                    continue;
                }
                parts.push(hom_module(&m1, &m2).module);
            }
            let refs: Vec<&FpModule> = parts.iter().collect();
            let rhs = if refs.is_empty() {
                FpModule::zero(lhs.ring)
            } else {
                FpModule::direct_sum(lhs.ring, &refs).0
            };
            let ok = lhs.is_iso_to(&rhs);
            pass &= ok;
            lines.push((l, lhs.iso_label(), rhs.iso_label(), ok));
        }
        Ok(HolimHomReport { lines, pass })
    }
}

/// The level-n hom subcomplex with its embedding and block data.
pub struct HomN {
    pub n: i64,
    pub cx: Complex,
    pub embed: ChainMap,
    full: TwHom,
    blocks: Vec<((i64, i64), Complex, ChainMap)>,
}

impl HomN {
    /// Express a full-complex element as an element of the subcomplex;
    /// errors when it is not a member.
    pub fn member_from_full(&self, amb: &El) -> Result<El, DgError> {
        let term = self.cx.term(amb.deg);
        if term.gens == 0 {
            if self.full.cx.term(amb.deg).is_zero_el(&amb.v) {
                return Ok(El {
                    deg: amb.deg,
                    v: term.zero_el(),
                });
            }
            return Err(DgError::Other("element is not in the level subcomplex".into()));
        }
        let emb = self.embed.comp(amb.deg);
        let pre = emb
            .preimage(&amb.v)
            .ok_or_else(|| DgError::Other("element is not in the level subcomplex".into()))?;
        Ok(El {
            deg: amb.deg,
            v: pre,
        })
    }

    /// Coordinates of the (gi, gj) block component of an element.
    fn block_component(&self, block: usize, x: &El) -> Mat {
        let refs: Vec<&Complex> = self.blocks.iter().map(|(_, c, _)| c).collect();
        let (_, _, projs) = Complex::direct_sum(self.cx.ring, &refs);
        projs[block].comp(x.deg).apply(&x.v)
    }

    /// An element of the level complex representing a block cohomology
    /// class (zero in all other blocks).
    fn class_rep(&self, gi_raw: i64, gj_raw: i64, class: &Mat) -> Result<El, DgError> {
        // clamp into this level's labels
        let gi = gi_raw.clamp(-self.n - 1, self.n + 1);
        let gj = gj_raw.clamp(-self.n - 1, self.n + 1);
        let d = gj_raw - gi_raw;
        let refs: Vec<&Complex> = self.blocks.iter().map(|(_, c, _)| c).collect();
        let (_, injs, _) = Complex::direct_sum(self.cx.ring, &refs);
        for (b, ((bgi, bgj), cx, _)) in self.blocks.iter().enumerate() {
            if (*bgi, *bgj) != (gi, gj) {
                continue;
            }
            let h = cx.cohomology_at(d);
            let rep = h.rep(class);
            return Ok(El {
                deg: d,
                v: injs[b].comp(d).apply(&rep),
            });
        }
        Err(DgError::Other("no block for the requested class".into()))
    }
}

/// An element of the leading-term product: one cohomology class per inner
/// block at its concentration degree.
#[derive(Clone, Debug)]
pub struct OverlineEl {
    pub deg: i64,
    pub comps: BTreeMap<(i64, i64), Mat>,
}

fn overline_eq(hom: &HomN, a: &OverlineEl, b: &OverlineEl) -> bool {
    let keys: std::collections::BTreeSet<(i64, i64)> =
        a.comps.keys().chain(b.comps.keys()).copied().collect();
    for key in keys {
        let block = hom.blocks.iter().find(|((gi, gj), _, _)| (*gi, *gj) == key);
        let Some((_, cx, _)) = block else {
            // both must then be zero-shaped
            continue;
        };
        let d = key.1 - key.0;
        let h = cx.cohomology(d);
        let za = a.comps.get(&key);
        let zb = b.comps.get(&key);
        match (za, zb) {
            (None, None) => {}
            (Some(x), None) => {
                if !h.is_zero_el(x) {
                    return false;
                }
            }
            (None, Some(y)) => {
                if !h.is_zero_el(y) {
                    return false;
                }
            }
            (Some(x), Some(y)) => {
                if !h.eq_el(x, y) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug)]
pub enum CompatOutcome {
    Pass,
    Fail {
        /// (degree of f, generator of f, degree of g, generator of g)
        witness: (i64, usize, i64, usize),
    },
}

#[derive(Debug)]
pub struct HolimHomReport {
    /// (degree, holim label, product label, agree)
    pub lines: Vec<(i64, String, String, bool)>,
    pub pass: bool,
}

/// Select the sub complex of a twisted hom complex spanned by the blocks
/// satisfying the predicate; the selection must be closed under the
/// differential (checked).
fn selected_subcomplex(
    full: &TwHom,
    sel: &dyn Fn(usize, usize) -> bool,
) -> Option<(Complex, ChainMap)> {
    let ring = full.cx.ring;
    let mut terms = Vec::new();
    let (lo, hi) = if full.cx.is_zero_complex() {
        return None;
    } else {
        (full.cx.lo(), full.cx.hi())
    };
    for d in lo..=hi {
        let info = full.block_info(d);
        let mut rows: Vec<usize> = Vec::new();
        for (j, k, offset, gens) in info {
            if sel(j, k) {
                for r in 0..gens {
                    rows.push(offset + r);
                }
            }
        }
        let term_full = full.cx.term(d);
        // submodule presentation: selected generators with the block
        // relations (blocks are direct summands, so the relations restrict)
        let all = term_full.gens;
        let mut incl = Mat::zeros(ring, all, rows.len());
        for (c, &r) in rows.iter().enumerate() {
            incl.set(r, c, ring.cover().one());
        }
        // relations of the selected part: rows of the full relations
        let mut rels = Mat::zeros(ring, rows.len(), term_full.rels.cols);
        for (ri, &r) in rows.iter().enumerate() {
            for c in 0..term_full.rels.cols {
                rels.set(ri, c, term_full.rels.at(r, c).clone());
            }
        }
        let sub = FpModule::new(ring, rows.len(), rels);
        terms.push((sub, incl, rows));
    }
    if terms.iter().all(|(m, _, _)| m.is_zero_module()) {
        return None;
    }
    let mut cx_terms = Vec::new();
    let mut incls = Vec::new();
    for (m, incl, _) in &terms {
        cx_terms.push(m.clone());
        incls.push(incl.clone());
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let idx = (d - lo) as usize;
        let big_d = full.cx.diff(d);
        let down = big_d.mat.mul(&incls[idx]);
        // restrict rows to the selected coordinates of degree d+1
        let rows = &terms[idx + 1].2;
        let mut mat = Mat::zeros(ring, rows.len(), cx_terms[idx].gens);
        for (ri, &r) in rows.iter().enumerate() {
            for c in 0..cx_terms[idx].gens {
                mat.set(ri, c, down.at(r, c).clone());
            }
        }
        // the selection must absorb the differential
        let back = incls[idx + 1].mul(&mat);
        if back != down {
            return None;
        }
        diffs.push(ModMap::new_unchecked(
            cx_terms[idx].clone(),
            cx_terms[idx + 1].clone(),
            mat,
        ));
    }
    let cx = Complex::new(ring, lo, cx_terms.clone(), diffs).ok()?;
    let mut comps = BTreeMap::new();
    for d in cx.support() {
        let idx = (d - lo) as usize;
        comps.insert(
            d,
            ModMap::new_unchecked(cx.term(d), full.cx.term(d), incls[idx].clone()),
        );
    }
    let incl = ChainMap::from_comps(&cx, &full.cx, 0, comps);
    Some((cx, incl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Ring, Scalar};

    fn world_two_blocks(p: u64) -> (ZigzagWorld, BObject, BObject) {
        let r = Ring::IntMod(p);
        let m = FpModule::free(r, 1);
        let v1 = Complex::v_object(r, &[(0, m.clone()), (2, m.clone())]);
        let v2 = Complex::v_object(r, &[(0, m.clone()), (2, m.clone())]);
        let world = ZigzagWorld::new(r, vec![v1, v2]).unwrap();
        let b1 = world.b_object(0).unwrap();
        let b2 = world.b_object(1).unwrap();
        (world, b1, b2)
    }

    #[test]
    fn b_object_single_degree_zero_piece() {
        let r = Ring::IntMod(2);
        let m = FpModule::free(r, 1);
        let v = Complex::concentrated(r, 0, m);
        let world = ZigzagWorld::new(r, vec![v]).unwrap();
        let b = world.b_object(0).unwrap();
        // plus side is empty; minus side carries the piece
        assert!(b.plus.entries.is_empty());
        assert_eq!(b.minus.entries.len(), 3);
        // B^+ contractible (empty), forgetting structure recovers v up to
        // homotopy: total ~ piece
        let one = world.pretr.one_term(world.piece_obj[0][&0]);
        let pair = world
            .pretr
            .materialize(&[("B".into(), b.total.clone()), ("V".into(), one)])
            .unwrap();
        let h0 = pair.h0();
        assert!(h0.iso_witness(0, 1).unwrap().is_some());
    }

    #[test]
    fn b_object_two_pieces_splits_by_sign() {
        let (world, b1, _) = world_two_blocks(2);
        assert_eq!(b1.minus.entries.len(), 3);
        assert_eq!(b1.plus.entries.len(), 3);
        let _ = world;
    }

    #[test]
    fn hom_n_is_a_subcomplex() {
        let (world, b1, b2) = world_two_blocks(2);
        for n in 1..=3 {
            let h = world.hom_n(&b1, &b2, n).unwrap();
            assert!(h.embed.is_closed());
        }
    }

    #[test]
    fn hom_levels_nest() {
        let (world, b1, b2) = world_two_blocks(3);
        let h2 = world.hom_n(&b1, &b2, 2).unwrap();
        let h1 = world.hom_n(&b1, &b2, 1).unwrap();
        // every generator of the deeper level lies in the shallower one
        for d in h2.cx.support() {
            let t = h2.cx.term(d);
            for g in 0..t.gens {
                let e = El {
                    deg: d,
                    v: t.gen_el(g),
                };
                let amb = h2.embed.apply_el(&e);
                assert!(h1.member_from_full(&amb).is_ok());
            }
        }
    }

    #[test]
    fn unit_composes_as_identity_in_restriction() {
        let (world, b1, b2) = world_two_blocks(2);
        let n = 1;
        let f2n = world.hom_n(&b1, &b2, 2 * n).unwrap();
        let g2n = world.hom_n(&b2, &b2, 2 * n).unwrap();
        let tn = world.hom_n(&b1, &b2, n).unwrap();
        // unit of b2 inside hom_{2n}(b2, b2)
        let id = world.pretr.identity_tw(&b2.total);
        let id_el = g2n
            .full
            .encode(&world.pretr, &b2.total, &b2.total, &id)
            .unwrap();
        let id_mem = g2n.member_from_full(&id_el).unwrap();
        for d in f2n.cx.support() {
            if d > 0 {
                continue;
            }
            let t = f2n.cx.term(d);
            for g in 0..t.gens {
                let f = El {
                    deg: d,
                    v: t.gen_el(g),
                };
                let both = world
                    .restricted_compose(&b1, &b2, &b2, n, 0, 0, &f2n, &f, &g2n, &id_mem, &tn)
                    .unwrap();
                // compare against direct membership of f
                let famb = f2n.embed.apply_el(&f);
                let direct = tn.member_from_full(&famb).unwrap();
                assert!(tn.cx.term(d).eq_el(&both.v, &direct.v));
            }
        }
    }

    #[test]
    fn compat_square_passes_small() {
        let (world, b1, b2) = world_two_blocks(2);
        let out = world.compat_check(&b1, &b2, &b2, 1, 0, 0).unwrap();
        assert!(matches!(out, CompatOutcome::Pass));
    }

    #[test]
    fn holim_of_levels_matches_piece_product() {
        let (world, b1, b2) = world_two_blocks(2);
        let report = world.holim_hom_check(&b1, &b2, (-1, 1)).unwrap();
        assert!(report.pass, "{:?}", report.lines);
    }

    #[test]
    fn zero_b_object_gives_zero_homs() {
        let r = Ring::IntMod(2);
        let m = FpModule::free(r, 1);
        let v1 = Complex::concentrated(r, 0, m);
        let v2 = Complex::zero(r);
        let world = ZigzagWorld::new(r, vec![v1, v2]).unwrap();
        let b1 = world.b_object(0).unwrap();
        let b2 = world.b_object(1).unwrap();
        let h = world.hom_n(&b1, &b2, 1).unwrap();
        assert!(h.cx.is_zero_complex() || h.cx.support().all(|d| h.cx.term(d).is_zero_module()));
        let _ = Scalar::from_i64(0, r);
    }
}
