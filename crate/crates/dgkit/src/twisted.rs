//! Twisted complexes over a finite dg category: the pretriangulated hull
//! with strict shifts and cones, materialization of finite full
//! subcategories, strict idempotent completion, and the quasi-equivalence
//! checker.
//!
//! Conventions. A twisted complex is a list of (object, shift) entries with
//! a strictly lower-triangular twist q, q_{jk} in hom(X_k, X_j) of degree
//! n_j - n_k + 1, satisfying dq + q.q = 0. A degree-n morphism has blocks
//! m_{jk} in hom(X_k, Y_j)^{n + m_j - n_k}; composition carries the sign
//! (g.f)_{ik} = sum_j (-1)^{|f| (c_i + b_j)} g_{ij} o f_{jk}, and the
//! differential is d(m) + q.m - (-1)^{|m|} m.q. With these signs the
//! realization over a category of complexes is the honest total complex.

use crate::complex::{Complex, El};
use crate::dg::{CompTable, DgCat, DgError, DgFunctor};
use crate::mat::Mat;
use crate::module::{FpModule, ModMap};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A twisted complex over a fixed ambient category.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedComplex {
    /// (object index, shift) pairs.
    pub entries: Vec<(usize, i64)>,
    /// Strictly lower-triangular twist: key (j, k) with j > k.
    pub twist: BTreeMap<(usize, usize), El>,
}

impl TwistedComplex {
    pub fn size(&self) -> usize {
        self.entries.len()
    }
}

/// A morphism of twisted complexes, given by its blocks.
#[derive(Clone, Debug)]
pub struct TwEl {
    pub deg: i64,
    /// key (target entry, source entry)
    pub blocks: BTreeMap<(usize, usize), El>,
}

impl TwEl {
    pub fn zero(deg: i64) -> TwEl {
        TwEl {
            deg,
            blocks: BTreeMap::new(),
        }
    }
}

/// The pretriangulated hull, evaluated lazily over the ambient category.
pub struct Pretr {
    pub cat: Arc<DgCat>,
}

impl Pretr {
    pub fn new(cat: Arc<DgCat>) -> Pretr {
        Pretr { cat }
    }

    /// Degree of the ambient hom where block (j,k) of a degree-n morphism
    /// a -> b lives.
    fn block_deg(&self, a: &TwistedComplex, b: &TwistedComplex, n: i64, j: usize, k: usize) -> i64 {
        n + b.entries[j].1 - a.entries[k].1
    }

    pub fn one_term(&self, obj: usize) -> TwistedComplex {
        TwistedComplex {
            entries: vec![(obj, 0)],
            twist: BTreeMap::new(),
        }
    }

    pub fn shift_tw(&self, a: &TwistedComplex, s: i64) -> TwistedComplex {
        TwistedComplex {
            entries: a.entries.iter().map(|(o, n)| (*o, n + s)).collect(),
            twist: a.twist.clone(),
        }
    }

    /// Direct sum: concatenated entries, block twists. Returns the sum and
    /// the injections/projections as closed degree-0 morphisms.
    pub fn sum_tw(&self, parts: &[&TwistedComplex]) -> (TwistedComplex, Vec<TwEl>, Vec<TwEl>) {
        let mut entries = Vec::new();
        let mut twist = BTreeMap::new();
        let mut offsets = Vec::new();
        for p in parts {
            offsets.push(entries.len());
            let off = entries.len();
            entries.extend_from_slice(&p.entries);
            for ((j, k), q) in &p.twist {
                twist.insert((off + j, off + k), q.clone());
            }
        }
        let sum = TwistedComplex { entries, twist };
        let mut injs = Vec::new();
        let mut projs = Vec::new();
        for (pi, p) in parts.iter().enumerate() {
            let off = offsets[pi];
            let mut iblocks = BTreeMap::new();
            let mut pblocks = BTreeMap::new();
            for (e, (obj, _)) in p.entries.iter().enumerate() {
                let u = self.cat.unit(*obj);
                iblocks.insert((off + e, e), u.clone());
                pblocks.insert((e, off + e), u);
            }
            injs.push(TwEl {
                deg: 0,
                blocks: iblocks,
            });
            projs.push(TwEl {
                deg: 0,
                blocks: pblocks,
            });
        }
        (sum, injs, projs)
    }

    pub fn identity_tw(&self, a: &TwistedComplex) -> TwEl {
        let mut blocks = BTreeMap::new();
        for (e, (obj, _)) in a.entries.iter().enumerate() {
            blocks.insert((e, e), self.cat.unit(*obj));
        }
        TwEl {
            deg: 0,
            blocks,
        }
    }

    /// Maurer-Cartan check: dq + q.q = 0 blockwise, plus triangularity and
    /// degree bookkeeping.
    pub fn validate(&self, a: &TwistedComplex) -> Result<(), DgError> {
        for ((j, k), q) in &a.twist {
            if j <= k {
                return Err(DgError::MaurerCartanViolation(
                    "twist is not strictly lower-triangular".into(),
                ));
            }
            let want = self.block_deg(a, a, 1, *j, *k);
            if q.deg != want {
                return Err(DgError::MaurerCartanViolation(format!(
                    "twist block ({}, {}) has degree {}, expected {}",
                    j, k, q.deg, want
                )));
            }
        }
        let n = a.entries.len();
        for j in 0..n {
            for k in 0..n {
                let mut acc = self.cat.zero_el(
                    a.entries[k].0,
                    a.entries[j].0,
                    self.block_deg(a, a, 2, j, k),
                );
                if let Some(q) = a.twist.get(&(j, k)) {
                    let dq = self.cat.d_el(a.entries[k].0, a.entries[j].0, q);
                    acc.v = acc.v.add(&dq.v);
                }
                for m in 0..n {
                    let (Some(qjm), Some(qmk)) = (a.twist.get(&(j, m)), a.twist.get(&(m, k)))
                    else {
                        continue;
                    };
                    let sign_exp = a.entries[j].1 + a.entries[m].1;
                    let mut prod = self.cat.compose(
                        a.entries[k].0,
                        a.entries[m].0,
                        a.entries[j].0,
                        qjm,
                        qmk,
                    );
                    if sign_exp.rem_euclid(2) == 1 {
                        prod.v = prod.v.neg();
                    }
                    acc.v = acc.v.add(&prod.v);
                }
                let term = self
                    .cat
                    .hom(a.entries[k].0, a.entries[j].0)
                    .term(acc.deg);
                if !term.is_zero_el(&acc.v) {
                    return Err(DgError::MaurerCartanViolation(format!(
                        "dq + q.q has a nonzero ({}, {}) block",
                        j, k
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signed composition of twisted-complex morphisms.
    pub fn compose_tw(
        &self,
        a: &TwistedComplex,
        b: &TwistedComplex,
        c: &TwistedComplex,
        g: &TwEl,
        f: &TwEl,
    ) -> TwEl {
        let mut blocks: BTreeMap<(usize, usize), El> = BTreeMap::new();
        for ((i, j), gb) in &g.blocks {
            for ((j2, k), fb) in &f.blocks {
                if j2 != j {
                    continue;
                }
                let mut prod = self.cat.compose(
                    a.entries[*k].0,
                    b.entries[*j].0,
                    c.entries[*i].0,
                    gb,
                    fb,
                );
                let sign_exp = f.deg * (c.entries[*i].1 + b.entries[*j].1);
                if sign_exp.rem_euclid(2) == 1 {
                    prod.v = prod.v.neg();
                }
                match blocks.get_mut(&(*i, *k)) {
                    Some(e) => e.v = e.v.add(&prod.v),
                    None => {
                        blocks.insert((*i, *k), prod);
                    }
                }
            }
        }
        self.normalize_el(
            a,
            c,
            TwEl {
                deg: g.deg + f.deg,
                blocks,
            },
        )
    }

    /// Twisted differential d(m) + q_b . m - (-1)^{|m|} m . q_a.
    pub fn diff_tw(&self, a: &TwistedComplex, b: &TwistedComplex, m: &TwEl) -> TwEl {
        let mut blocks: BTreeMap<(usize, usize), El> = BTreeMap::new();
        let mut add = |key: (usize, usize), e: El, tgt: &FpModule| {
            match blocks.get_mut(&key) {
                Some(prev) => prev.v = prev.v.add(&e.v),
                None => {
                    let canon = El {
                        deg: e.deg,
                        v: e.v,
                    };
                    blocks.insert(key, canon);
                }
            }
            let _ = tgt;
        };
        for ((j, k), mb) in &m.blocks {
            let d = self
                .cat
                .d_el(a.entries[*k].0, b.entries[*j].0, mb);
            add(
                (*j, *k),
                d,
                &self
                    .cat
                    .hom(a.entries[*k].0, b.entries[*j].0)
                    .term(mb.deg + 1),
            );
        }
        // q_b . m : sign (-1)^{|m| (b_j + b_l)}
        for ((j, l), q) in &b.twist {
            for ((l2, k), mb) in &m.blocks {
                if l2 != l {
                    continue;
                }
                let mut prod = self.cat.compose(
                    a.entries[*k].0,
                    b.entries[*l].0,
                    b.entries[*j].0,
                    q,
                    mb,
                );
                let sign_exp = m.deg * (b.entries[*j].1 + b.entries[*l].1);
                if sign_exp.rem_euclid(2) == 1 {
                    prod.v = prod.v.neg();
                }
                add(
                    (*j, *k),
                    prod,
                    &self
                        .cat
                        .hom(a.entries[*k].0, b.entries[*j].0)
                        .term(0),
                );
            }
        }
        // -(-1)^{|m|} m . q_a : composition sign (-1)^{1 (b_j + a_l)}
        for ((j, l), mb) in &m.blocks {
            for ((l2, k), q) in &a.twist {
                if l2 != l {
                    continue;
                }
                let mut prod = self.cat.compose(
                    a.entries[*k].0,
                    a.entries[*l].0,
                    b.entries[*j].0,
                    mb,
                    q,
                );
                let sign_exp = m.deg + b.entries[*j].1 + a.entries[*l].1;
                if sign_exp.rem_euclid(2) == 0 {
                    // total coefficient -(-1)^{...} with ... even
                    prod.v = prod.v.neg();
                }
                add((*j, *k), prod, &self.cat.hom(0, 0).term(0));
            }
        }
        self.normalize_el(
            a,
            b,
            TwEl {
                deg: m.deg + 1,
                blocks,
            },
        )
    }

    fn normalize_el(&self, a: &TwistedComplex, b: &TwistedComplex, mut m: TwEl) -> TwEl {
        let mut dead = Vec::new();
        for ((j, k), e) in &mut m.blocks {
            let term = self
                .cat
                .hom(a.entries[*k].0, b.entries[*j].0)
                .term(e.deg);
            e.v = term.canon(&e.v);
            if e.v.is_zero() {
                dead.push((*j, *k));
            }
        }
        for key in dead {
            m.blocks.remove(&key);
        }
        m
    }

    pub fn is_zero_tw(&self, a: &TwistedComplex, b: &TwistedComplex, m: &TwEl) -> bool {
        // normalization needs both endpoint shapes
        self.normalize_el(a, b, m.clone()).blocks.is_empty()
    }

    pub fn eq_tw(&self, a: &TwistedComplex, b: &TwistedComplex, m1: &TwEl, m2: &TwEl) -> bool {
        let mut diff = m1.clone();
        for (key, e) in &m2.blocks {
            match diff.blocks.get_mut(key) {
                Some(prev) => prev.v = prev.v.sub(&e.v),
                None => {
                    diff.blocks.insert(
                        *key,
                        El {
                            deg: e.deg,
                            v: e.v.neg(),
                        },
                    );
                }
            }
        }
        self.is_zero_tw(a, b, &diff)
    }

    pub fn is_closed_tw(&self, a: &TwistedComplex, b: &TwistedComplex, m: &TwEl) -> bool {
        self.diff_tw(a, b, m).blocks.is_empty()
    }

    /// Cone of a closed degree-0 morphism: A-entries shifted by one, then
    /// B-entries; the twist keeps q_A and q_B and glues with
    /// (-1)^{b_j} f_{jk}. Returns (cone, incl of B, proj to A[1]).
    pub fn cone_tw(
        &self,
        a: &TwistedComplex,
        b: &TwistedComplex,
        f: &TwEl,
    ) -> Result<(TwistedComplex, TwEl, TwEl), DgError> {
        if f.deg != 0 {
            return Err(DgError::Other("cone needs a degree-0 morphism".into()));
        }
        if !self.is_closed_tw(a, b, f) {
            return Err(DgError::Other("cone needs a closed morphism".into()));
        }
        let na = a.entries.len();
        let mut entries: Vec<(usize, i64)> =
            a.entries.iter().map(|(o, s)| (*o, s + 1)).collect();
        entries.extend_from_slice(&b.entries);
        let mut twist = BTreeMap::new();
        for ((j, k), q) in &a.twist {
            twist.insert((*j, *k), q.clone());
        }
        for ((j, k), q) in &b.twist {
            twist.insert((na + j, na + k), q.clone());
        }
        for ((j, k), blk) in &f.blocks {
            let mut e = blk.clone();
            if b.entries[*j].1.rem_euclid(2) == 1 {
                e.v = e.v.neg();
            }
            twist.insert((na + j, *k), e);
        }
        let cone = TwistedComplex { entries, twist };
        self.validate(&cone)?;
        let mut incl = TwEl::zero(0);
        for (e, (obj, _)) in b.entries.iter().enumerate() {
            incl.blocks.insert((na + e, e), self.cat.unit(*obj));
        }
        let mut proj = TwEl::zero(0);
        for (e, (obj, _)) in a.entries.iter().enumerate() {
            proj.blocks.insert((e, e), self.cat.unit(*obj));
        }
        Ok((cone, incl, proj))
    }

    /// Factor g through the cone of f when g o f is witnessed as a
    /// coboundary: with dh = g o f, the morphism is h on the shifted
    /// A-entries (with the realization sign) and g on the B-entries.
    pub fn coneprop_factor(
        &self,
        a: &TwistedComplex,
        _b: &TwistedComplex,
        c: &TwistedComplex,
        g: &TwEl,
        h: &TwEl,
        cone: &TwistedComplex,
    ) -> TwEl {
        let na = a.entries.len();
        let mut blocks = BTreeMap::new();
        for ((j, k), e) in &h.blocks {
            let mut e = e.clone();
            if c.entries[*j].1.rem_euclid(2) == 1 {
                e.v = e.v.neg();
            }
            blocks.insert((*j, *k), e);
        }
        for ((j, k), e) in &g.blocks {
            blocks.insert((*j, na + k), e.clone());
        }
        self.normalize_el(cone, c, TwEl { deg: 0, blocks })
    }

    /// Materialize the full subcategory on the given twisted complexes.
    pub fn materialize(&self, objs: &[(String, TwistedComplex)]) -> Result<DgCat, DgError> {
        for (_, tc) in objs {
            self.validate(tc)?;
        }
        let n = objs.len();
        let ring = self.cat.ring;
        let mut homs = Vec::with_capacity(n * n);
        let mut datas = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let data = self.hom_data(&objs[x].1, &objs[y].1);
                homs.push(data.cx.clone());
                datas.push(data);
            }
        }
        let mut units = Vec::new();
        for x in 0..n {
            let data = &datas[x * n + x];
            let u = data
                .encode(self, &objs[x].1, &objs[x].1, &self.identity_tw(&objs[x].1))
                .ok_or_else(|| DgError::Other("identity fails to encode".into()))?;
            units.push(u);
        }
        let mut comp: CompTable = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let d_xy = &datas[x * n + y];
                    let d_yz = &datas[y * n + z];
                    let d_xz = &datas[x * n + z];
                    let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                    for p in d_yz.cx.support() {
                        let tp = d_yz.cx.term(p);
                        for q in d_xy.cx.support() {
                            let tq = d_xy.cx.term(q);
                            if tp.gens == 0 || tq.gens == 0 {
                                continue;
                            }
                            let mut table = Vec::new();
                            for i in 0..tp.gens {
                                let g_tw = d_yz.decode(&El {
                                    deg: p,
                                    v: tp.gen_el(i),
                                });
                                let mut row = Vec::new();
                                for j in 0..tq.gens {
                                    let f_tw = d_xy.decode(&El {
                                        deg: q,
                                        v: tq.gen_el(j),
                                    });
                                    let prod = self.compose_tw(
                                        &objs[x].1,
                                        &objs[y].1,
                                        &objs[z].1,
                                        &g_tw,
                                        &f_tw,
                                    );
                                    let enc = d_xz
                                        .encode(self, &objs[x].1, &objs[z].1, &prod)
                                        .expect("composite encodes");
                                    row.push(enc.v);
                                }
                                table.push(row);
                            }
                            degs.insert((p, q), table);
                        }
                    }
                    comp.insert((x, y, z), degs);
                }
            }
        }
        DgCat::from_parts(
            ring,
            objs.iter().map(|(n, _)| n.clone()).collect(),
            homs,
            units,
            comp,
        )
    }

    /// Is the identity of this twisted complex null-homotopic?
    pub fn is_contractible_tw(&self, t: &TwistedComplex) -> bool {
        if t.entries.is_empty() {
            return true;
        }
        let data = self.hom_data(t, t);
        let id = self.identity_tw(t);
        let Some(id_el) = data.encode(self, t, t, &id) else {
            return false;
        };
        let h0 = data.cx.cohomology_at(0);
        match h0.classify(&id_el.v) {
            Some(c) => c.is_zero(),
            None => false,
        }
    }

    /// Hom complex between two twisted complexes, with block bookkeeping.
    pub fn hom_data(&self, a: &TwistedComplex, b: &TwistedComplex) -> TwHom {
        let ring = self.cat.ring;
        // degree range
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (j, (oj, sj)) in b.entries.iter().enumerate() {
            for (k, (ok, sk)) in a.entries.iter().enumerate() {
                let h = self.cat.hom(*ok, *oj);
                if h.is_zero_complex() {
                    continue;
                }
                let _ = (j, k);
                lo = lo.min(h.lo() - sj + sk);
                hi = hi.max(h.hi() - sj + sk);
            }
        }
        if lo > hi {
            return TwHom {
                cx: Complex::zero(ring),
                blocks: BTreeMap::new(),
                a: a.clone(),
                b: b.clone(),
            };
        }
        let mut blocks: BTreeMap<i64, Vec<TwHomBlock>> = BTreeMap::new();
        let mut terms = Vec::new();
        for nn in lo..=hi {
            let mut blks = Vec::new();
            let mut offset = 0;
            for (j, (oj, _)) in b.entries.iter().enumerate() {
                for (k, (ok, _)) in a.entries.iter().enumerate() {
                    let d = self.block_deg(a, b, nn, j, k);
                    let m = self.cat.hom(*ok, *oj).term(d);
                    if m.is_zero_module() {
                        continue;
                    }
                    let gens = m.gens;
                    blks.push(TwHomBlock {
                        j,
                        k,
                        module: m,
                        offset,
                    });
                    offset += gens;
                }
            }
            let mods: Vec<FpModule> = blks.iter().map(|b| b.module.clone()).collect();
            let refs: Vec<&FpModule> = mods.iter().collect();
            terms.push(FpModule::direct_sum(ring, &refs).0);
            blocks.insert(nn, blks);
        }
        // differential from the twisted formula on generators
        let mut diffs = Vec::new();
        for nn in lo..hi {
            let src = &terms[(nn - lo) as usize];
            let tgt = &terms[(nn + 1 - lo) as usize];
            let mut mat = Mat::zeros(ring, tgt.gens, src.gens);
            let src_blocks = &blocks[&nn];
            for sb in src_blocks {
                for g in 0..sb.module.gens {
                    let tw = TwEl {
                        deg: nn,
                        blocks: [(
                            (sb.j, sb.k),
                            El {
                                deg: self.block_deg(a, b, nn, sb.j, sb.k),
                                v: sb.module.gen_el(g),
                            },
                        )]
                        .into_iter()
                        .collect(),
                    };
                    let d = self.diff_tw(a, b, &tw);
                    let col = encode_in_blocks(ring, &blocks, tgt, nn + 1, &d);
                    for r in 0..tgt.gens {
                        mat.set(r, sb.offset + g, col.at(r, 0).clone());
                    }
                }
            }
            diffs.push(ModMap::new_unchecked(src.clone(), tgt.clone(), mat));
        }
        let cx = Complex::new(ring, lo, terms, diffs).expect("twisted differential squares to zero");
        TwHom {
            cx,
            blocks,
            a: a.clone(),
            b: b.clone(),
        }
    }
}

struct TwHomBlock {
    j: usize,
    k: usize,
    module: FpModule,
    offset: usize,
}

/// Hom complex of a pair of twisted complexes plus encode/decode.
pub struct TwHom {
    pub cx: Complex,
    blocks: BTreeMap<i64, Vec<TwHomBlock>>,
    a: TwistedComplex,
    b: TwistedComplex,
}

fn encode_in_blocks(
    ring: crate::ring::Ring,
    blocks: &BTreeMap<i64, Vec<TwHomBlock>>,
    term: &FpModule,
    n: i64,
    m: &TwEl,
) -> Mat {
    let mut out = Mat::zeros(ring, term.gens, 1);
    let blks = match blocks.get(&n) {
        Some(b) => b,
        None => return out,
    };
    for ((j, k), e) in &m.blocks {
        if e.v.is_zero() {
            continue;
        }
        let b = blks
            .iter()
            .find(|b| b.j == *j && b.k == *k)
            .expect("nonzero block must exist in the hom term");
        for r in 0..e.v.rows {
            out.set(b.offset + r, 0, e.v.at(r, 0).clone());
        }
    }
    term.canon(&out)
}

impl TwHom {
    /// (target entry, source entry, offset, generators) per block of the
    /// degree-n term.
    pub fn block_info(&self, deg: i64) -> Vec<(usize, usize, usize, usize)> {
        self.blocks
            .get(&deg)
            .map(|blks| {
                blks.iter()
                    .map(|b| (b.j, b.k, b.offset, b.module.gens))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn encode(
        &self,
        pretr: &Pretr,
        a: &TwistedComplex,
        b: &TwistedComplex,
        m: &TwEl,
    ) -> Option<El> {
        let norm = pretr.normalize_el(a, b, m.clone());
        let term = self.cx.term(m.deg);
        if let Some(blks) = self.blocks.get(&m.deg) {
            let ok = norm
                .blocks
                .keys()
                .all(|(j, k)| blks.iter().any(|b| b.j == *j && b.k == *k));
            if !ok {
                return None;
            }
        } else if !norm.blocks.is_empty() {
            return None;
        }
        Some(El {
            deg: m.deg,
            v: encode_in_blocks(self.cx.ring, &self.blocks, &term, m.deg, &norm),
        })
    }

    pub fn decode(&self, e: &El) -> TwEl {
        let mut blocks = BTreeMap::new();
        if let Some(blks) = self.blocks.get(&e.deg) {
            for b in blks {
                let v = Mat::from_fn(self.cx.ring, b.module.gens, 1, |r, _| {
                    e.v.at(b.offset + r, 0).clone()
                });
                if v.is_zero() {
                    continue;
                }
                let deg = e.deg + self.b.entries[b.j].1 - self.a.entries[b.k].1;
                blocks.insert(
                    (b.j, b.k),
                    El {
                        deg,
                        v,
                    },
                );
            }
        }
        TwEl {
            deg: e.deg,
            blocks,
        }
    }
}

/// Strict idempotent completion: adjoin (object, e) for strictly idempotent
/// closed degree-0 endomorphisms e; hom((x,e),(y,e')) is the image of
/// h -> e' o h o e.
pub fn perf_strict(cat: &Arc<DgCat>) -> Result<DgCat, DgError> {
    let n = cat.objects.len();
    let mut idems = Vec::new();
    for x in 0..n {
        let t = cat.hom(x, x).term(0);
        let elems = t.enumerate().ok_or(DgError::InfiniteEnumeration)?;
        for v in elems {
            let e = El { deg: 0, v };
            if !cat.is_closed_el(x, x, &e) {
                continue;
            }
            let ee = cat.compose(x, x, x, &e, &e);
            if cat.eq_el(x, x, &ee, &e) {
                idems.push((x, e));
            }
        }
    }
    perf_strict_with(cat, &idems)
}

/// Strict idempotent completion on an explicit list of idempotents.
pub fn perf_strict_with(cat: &Arc<DgCat>, idems: &[(usize, El)]) -> Result<DgCat, DgError> {
    for (x, e) in idems {
        if !cat.is_closed_el(*x, *x, e) || e.deg != 0 {
            return Err(DgError::NotStrictIdempotent);
        }
        let ee = cat.compose(*x, *x, *x, e, e);
        if !cat.eq_el(*x, *x, &ee, e) {
            return Err(DgError::NotStrictIdempotent);
        }
    }
    let ring = cat.ring;
    let m = idems.len();
    // image subcomplexes with their inclusions per pair
    let mut homs = Vec::with_capacity(m * m);
    let mut intos: Vec<Vec<ModMap>> = Vec::with_capacity(m * m); // per degree offset
    let mut lows: Vec<i64> = Vec::with_capacity(m * m);
    for (x, e) in idems {
        for (y, e2) in idems {
            let ambient = cat.hom(*x, *y);
            let mut terms = Vec::new();
            let mut maps = Vec::new();
            let lo = ambient.lo();
            for d in ambient.support() {
                let pre = cat.compose_right_map(*x, *x, *y, e, d);
                let post = cat.compose_left_map(*x, *y, *y, e2, d);
                let phi = ModMap::compose(&post, &pre);
                let (im, _, into) = phi.image();
                if im.is_zero_module() {
                    let z = FpModule::zero(ring);
                    maps.push(ModMap::zero(&z, &ambient.term(d)));
                    terms.push(z);
                } else {
                    terms.push(im);
                    maps.push(into);
                }
            }
            // induced differential on the images
            let mut diffs = Vec::new();
            for idx in 0..terms.len().saturating_sub(1) {
                let d = ambient.diff(lo + idx as i64);
                let down = ModMap::compose(&d, &maps[idx]);
                let mut mat = Mat::zeros(ring, terms[idx + 1].gens, terms[idx].gens);
                for g in 0..terms[idx].gens {
                    let img = down.mat.col(g);
                    let pre = maps[idx + 1]
                        .preimage(&img)
                        .expect("differential preserves the idempotent image");
                    for r in 0..terms[idx + 1].gens {
                        mat.set(r, g, pre.at(r, 0).clone());
                    }
                }
                diffs.push(ModMap::new_unchecked(
                    terms[idx].clone(),
                    terms[idx + 1].clone(),
                    mat,
                ));
            }
            let cx = if terms.is_empty() {
                Complex::zero(ring)
            } else {
                Complex::new(ring, lo, terms, diffs)
                    .map_err(|e| DgError::Other(format!("image subcomplex: {}", e)))?
            };
            homs.push(cx);
            intos.push(maps);
            lows.push(lo);
        }
    }
    // units: e itself in image coordinates
    let mut units = Vec::new();
    for (i, (x, e)) in idems.iter().enumerate() {
        let slot = i * m + i;
        if homs[slot].term(0).gens == 0 {
            units.push(El {
                deg: 0,
                v: Mat::zeros(ring, 0, 1),
            });
            continue;
        }
        let lo = lows[slot];
        let idx = (0 - lo) as usize;
        let into = intos[slot]
            .get(idx)
            .ok_or_else(|| DgError::Other("unit degree missing".into()))?;
        let pre = into
            .preimage(&e.v)
            .ok_or_else(|| DgError::Other("idempotent not in its own image".into()))?;
        units.push(El { deg: 0, v: pre });
        let _ = x;
    }
    // composition through the ambient category
    let mut comp: CompTable = BTreeMap::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let (xa, _) = &idems[a];
                let (xb, _) = &idems[b];
                let (xc, _) = &idems[c];
                let h_ab = &homs[a * m + b];
                let h_bc = &homs[b * m + c];
                let h_ac = &homs[a * m + c];
                let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                for p in h_bc.support() {
                    let tp = h_bc.term(p);
                    for q in h_ab.support() {
                        let tq = h_ab.term(q);
                        if tp.gens == 0 || tq.gens == 0 {
                            continue;
                        }
                        let into_bc = &intos[b * m + c][(p - lows[b * m + c]) as usize];
                        let into_ab = &intos[a * m + b][(q - lows[a * m + b]) as usize];
                        let out_gens = h_ac.term(p + q).gens;
                        let slot_ac = a * m + c;
                        let ac_idx = p + q - lows[slot_ac];
                        let mut table = Vec::new();
                        for i in 0..tp.gens {
                            let g_amb = El {
                                deg: p,
                                v: into_bc.apply(&tp.gen_el(i)),
                            };
                            let mut row = Vec::new();
                            for j in 0..tq.gens {
                                if out_gens == 0 {
                                    row.push(Mat::zeros(ring, 0, 1));
                                    continue;
                                }
                                let f_amb = El {
                                    deg: q,
                                    v: into_ab.apply(&tq.gen_el(j)),
                                };
                                let prod = cat.compose(*xa, *xb, *xc, &g_amb, &f_amb);
                                let into_ac = &intos[slot_ac][ac_idx as usize];
                                let pre = into_ac
                                    .preimage(&prod.v)
                                    .expect("composite stays in the image");
                                row.push(pre);
                            }
                            table.push(row);
                        }
                        degs.insert((p, q), table);
                    }
                }
                comp.insert((a, b, c), degs);
            }
        }
    }
    let names = idems
        .iter()
        .map(|(x, e)| format!("{}|{}", cat.objects[*x], coords_label(&e.v)))
        .collect();
    DgCat::from_parts(ring, names, homs, units, comp)
}

fn coords_label(v: &Mat) -> String {
    let mut s = String::new();
    for i in 0..v.rows {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{}", v.at(i, 0)));
    }
    s
}

/// Search bound for the essential-surjectivity part of the
/// quasi-equivalence check.
#[derive(Clone, Copy, Debug)]
pub struct SearchBound {
    pub max_entries: usize,
    pub shift_lo: i64,
    pub shift_hi: i64,
}

/// Outcome of the quasi-equivalence check.
#[derive(Debug)]
pub enum QeOutcome {
    Verified,
    NotQuasiFullyFaithful { pair: (usize, usize), degree: i64 },
    NotSurjectiveWithin(usize),
    Inconclusive(usize),
}

/// Quasi-fully-faithfulness is decided exactly; essential surjectivity is
/// searched over target objects hit by source twisted complexes of total
/// size up to the bound. `Verified` is a proof; `Inconclusive` is not a
/// refutation.
pub fn is_quasi_equivalence(f: &DgFunctor, bound: SearchBound) -> Result<QeOutcome, DgError> {
    // quasi-fully-faithful: every hom map has an acyclic cone
    for ((x, y), m) in &f.hom_maps {
        match crate::homcx::is_quasi_isomorphism(m) {
            Ok(true) => {}
            Ok(false) => {
                let cn = crate::complex::cone(m)
                    .map_err(|e| DgError::Other(format!("cone: {}", e)))?;
                let mut witness = 0;
                for d in cn.cx.support() {
                    if !cn.cx.cohomology(d).is_zero_module() {
                        witness = d;
                        break;
                    }
                }
                return Ok(QeOutcome::NotQuasiFullyFaithful {
                    pair: (*x, *y),
                    degree: witness,
                });
            }
            Err(e) => return Err(DgError::Other(format!("{}", e))),
        }
    }
    // essential surjectivity
    let pretr_tgt = Pretr::new(f.tgt.clone());
    let mut inconclusive = false;
    for t in 0..f.tgt.objects.len() {
        let mut hit = false;
        for cand in candidate_images(f, bound) {
            let pair = pretr_tgt.materialize(&[
                ("t".into(), pretr_tgt.one_term(t)),
                ("c".into(), cand.clone()),
            ])?;
            let h0 = pair.h0();
            match h0.iso_witness(0, 1) {
                Ok(Some(_)) => {
                    hit = true;
                    break;
                }
                Ok(None) => {}
                Err(_) => {
                    inconclusive = true;
                }
            }
        }
        if !hit {
            return Ok(if inconclusive {
                QeOutcome::Inconclusive(bound.max_entries)
            } else {
                QeOutcome::NotSurjectiveWithin(bound.max_entries)
            });
        }
    }
    Ok(QeOutcome::Verified)
}

/// Deterministic stream of twisted complexes over the target built from
/// source data: one-term images first, then two-term twisted complexes with
/// enumerable twists, then plain shift-sums up to the entry bound.
fn candidate_images(f: &DgFunctor, bound: SearchBound) -> Vec<TwistedComplex> {
    let pretr_tgt = Pretr::new(f.tgt.clone());
    let mut out = Vec::new();
    let n_src = f.src.objects.len();
    for x in 0..n_src {
        out.push(pretr_tgt.one_term(f.obj_map[x]));
    }
    if bound.max_entries >= 2 {
        for x1 in 0..n_src {
            for x2 in 0..n_src {
                for s1 in bound.shift_lo..=bound.shift_hi {
                    for s2 in bound.shift_lo..=bound.shift_hi {
                        let o1 = f.obj_map[x1];
                        let o2 = f.obj_map[x2];
                        // twist block (1, 0): hom(o1, o2) of degree s2 - s1 + 1
                        let d = s2 - s1 + 1;
                        let term = f.tgt.hom(o1, o2).term(d);
                        let candidates = match term.enumerate() {
                            Some(els) => els,
                            None => vec![term.zero_el()],
                        };
                        for v in candidates {
                            let tc = TwistedComplex {
                                entries: vec![(o1, s1), (o2, s2)],
                                twist: if term.is_zero_el(&v) {
                                    BTreeMap::new()
                                } else {
                                    [((1usize, 0usize), El { deg: d, v })].into_iter().collect()
                                },
                            };
                            if pretr_tgt.validate(&tc).is_ok() {
                                out.push(tc);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::point_category;
    use crate::ring::{Ring, Scalar};

    fn concrete_field_cat() -> Arc<DgCat> {
        let r = Ring::IntMod(2);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        Arc::new(DgCat::concrete(r, vec![("k".into(), k)]).unwrap())
    }

    #[test]
    fn one_term_full_faithful_and_axioms() {
        let cat = concrete_field_cat();
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        let m = p.materialize(&[("T".into(), t.clone())]).unwrap();
        assert!(m.check_axioms().passed());
        assert_eq!(m.hom(0, 0).cohomology(0).cardinality(), Some(2));
    }

    #[test]
    fn cone_of_identity_is_contractible() {
        let cat = concrete_field_cat();
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        let id = p.identity_tw(&t);
        let (cone, incl, proj) = p.cone_tw(&t, &t, &id).unwrap();
        assert!(p.is_closed_tw(&t, &cone, &incl));
        let shifted = p.shift_tw(&t, 1);
        assert!(p.is_closed_tw(&cone, &shifted, &proj));
        let m = p.materialize(&[("C".into(), cone)]).unwrap();
        assert!(m.check_axioms().passed());
        for d in m.hom(0, 0).support() {
            assert!(m.hom(0, 0).cohomology(d).is_zero_module());
        }
    }

    #[test]
    fn shift_then_unshift_is_identity() {
        let cat = concrete_field_cat();
        let p = Pretr::new(cat);
        let t = p.one_term(0);
        assert_eq!(p.shift_tw(&p.shift_tw(&t, 3), -3), t);
    }

    #[test]
    fn pretr_of_field_point_matches_complexes() {
        // twisted complexes over the one-object F_2 category realize bounded
        // complexes of F_2 vector spaces; compare a 2-step cone with the
        // complex-level computation
        let cat = concrete_field_cat();
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        // cone of 0: k -> k is k[1] + k
        let zero = TwEl::zero(0);
        let (cone, _, _) = p.cone_tw(&t, &t, &zero).unwrap();
        let m = p.materialize(&[("C".into(), cone)]).unwrap();
        let h = m.hom(0, 0);
        // End of k[1] + k in the homotopy category of complexes:
        // 2x2 matrix algebra in degree 0 pieces split by shifts
        assert_eq!(h.cohomology(0).cardinality(), Some(4));
        assert_eq!(h.cohomology(1).cardinality(), Some(2));
        assert_eq!(h.cohomology(-1).cardinality(), Some(2));
    }

    #[test]
    fn mc_violation_detected() {
        let cat = concrete_field_cat();
        let p = Pretr::new(cat.clone());
        // a twist with d = 0 but q^2 != 0 cannot exist on two entries; build
        // an upper-triangular (wrong order) twist instead
        let bad = TwistedComplex {
            entries: vec![(0, 0), (0, 1)],
            twist: [((0usize, 1usize), cat.unit(0))].into_iter().collect(),
        };
        assert!(p.validate(&bad).is_err());
    }

    #[test]
    fn rotation_triangle_on_instances() {
        // cone(B -> cone(f)) is homotopy equivalent to A[1]
        let r = Ring::IntMod(3);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let cat = Arc::new(DgCat::concrete(r, vec![("k".into(), k)]).unwrap());
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        // f = multiplication by 2 viewed as a morphism k -> k
        let mut f = TwEl::zero(0);
        f.blocks.insert(
            (0, 0),
            El {
                deg: 0,
                v: Mat::from_i64(r, &[&[2]]),
            },
        );
        let (cone_f, incl, _) = p.cone_tw(&t, &t, &f).unwrap();
        let (cone2, _, _) = p.cone_tw(&t, &cone_f, &incl).unwrap();
        let shifted = p.shift_tw(&t, 1);
        let m = p
            .materialize(&[("C2".into(), cone2), ("A1".into(), shifted)])
            .unwrap();
        assert!(m.check_axioms().passed());
        let h0 = m.h0();
        assert!(h0.iso_witness(0, 1).unwrap().is_some());
    }

    #[test]
    fn coneprop_factorization() {
        // g o f null-homotopic gives a factorization through the cone
        let r = Ring::IntMod(3);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let cat = Arc::new(DgCat::concrete(r, vec![("k".into(), k)]).unwrap());
        let p = Pretr::new(cat.clone());
        let t = p.one_term(0);
        let f = p.identity_tw(&t);
        // g = 0, h = 0 witnesses g o f = 0 as a coboundary
        let g = TwEl::zero(0);
        let h = TwEl::zero(-1);
        let (cone_f, incl, _) = p.cone_tw(&t, &t, &f).unwrap();
        let lam = p.coneprop_factor(&t, &t, &t, &g, &h, &cone_f);
        assert!(p.is_closed_tw(&cone_f, &t, &lam));
        let comp = p.compose_tw(&t, &cone_f, &t, &lam, &incl);
        assert!(p.eq_tw(&t, &t, &comp, &g));
    }

    #[test]
    fn perf_strict_splits_diagonal_idempotent() {
        // k + k via a rank-2 one-object category
        let r = Ring::IntMod(2);
        let k2 = Complex::concentrated(r, 0, FpModule::free(r, 2));
        let cat = Arc::new(DgCat::concrete(r, vec![("kk".into(), k2)]).unwrap());
        let perf = perf_strict(&cat).unwrap();
        assert!(perf.check_axioms().passed());
        // idempotents of End(k^2) over F_2: 0, id, and rank-1 ones; the
        // completion contains an object with endomorphism ring F_2
        let found = (0..perf.objects.len()).any(|i| {
            let h = perf.hom(i, i);
            h.cohomology(0).cardinality() == Some(2)
        });
        assert!(found);
    }

    #[test]
    fn perf_strict_identity_summand_is_the_object() {
        let cat = Arc::new(point_category(Ring::IntMod(2), "k"));
        let u = cat.unit(0);
        let perf = perf_strict_with(&cat, &[(0, u.clone()), (0, El { deg: 0, v: u.v.scale(&Scalar::from_i64(0, Ring::IntMod(2))) })]).unwrap();
        assert!(perf.check_axioms().passed());
        // (T, id) has the same endomorphisms as T
        assert!(perf.hom(0, 0).cohomology(0).is_iso_to(&cat.hom(0, 0).cohomology(0)));
        // (T, 0) is a zero object
        assert!(perf.hom(1, 1).cohomology(0).is_zero_module());
    }

    #[test]
    fn quasi_equivalence_identity_and_missing_object() {
        let r = Ring::IntMod(2);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let kk = Complex::concentrated(r, 1, FpModule::free(r, 1));
        let cat = Arc::new(
            DgCat::concrete(r, vec![("A".into(), k.clone()), ("B".into(), kk)]).unwrap(),
        );
        let id = DgFunctor::identity(&cat);
        let bound = SearchBound {
            max_entries: 1,
            shift_lo: -1,
            shift_hi: 1,
        };
        assert!(matches!(
            is_quasi_equivalence(&id, bound).unwrap(),
            QeOutcome::Verified
        ));
        // inclusion of the full subcategory on A misses B's class (B = A[-1])
        let sub = Arc::new(DgCat::concrete(r, vec![("A".into(), k)]).unwrap());
        let incl = DgFunctor {
            src: sub.clone(),
            tgt: cat.clone(),
            obj_map: vec![0],
            hom_maps: [((0, 0), ChainMapIdentityHelper::make(&sub, &cat))].into_iter().collect(),
        };
        incl.validate().unwrap();
        match is_quasi_equivalence(&incl, bound).unwrap() {
            QeOutcome::NotSurjectiveWithin(_) => {}
            other => panic!("expected a surjectivity failure, got {:?}", other),
        }
    }

    struct ChainMapIdentityHelper;
    impl ChainMapIdentityHelper {
        fn make(sub: &Arc<DgCat>, cat: &Arc<DgCat>) -> crate::complex::ChainMap {
            // hom_sub(A, A) and hom_cat(A, A) are built from the same complex
            assert_eq!(sub.hom(0, 0), cat.hom(0, 0));
            crate::complex::ChainMap::identity(sub.hom(0, 0))
        }
    }
}
