//! Drinfeld quotient of a dg category by a full subcategory, with word
//! length capped at an explicit bound and stabilization certificates, plus
//! an independent roof-calculus oracle for the homotopy category of the
//! quotient over a field.
//!
//! For every object D of the killed subcategory a formal contraction f_D of
//! degree -1 with d(f_D) = id_D is adjoined. Hom spaces are spanned by
//! alternating words g_m f_{D_m} g_{m-1} ... f_{D_1} g_0; the differential
//! acts by the Leibniz rule, replacing one f by the identity (which merges
//! the two neighboring letters); composition concatenates words.

use crate::complex::{Complex, El};
use crate::dg::{CompTable, DgCat, DgError, DgFunctor};
use crate::generation::{gen_membership, Membership};
use crate::mat::Mat;
use crate::module::{FpModule, ModMap, TensorModule};
use crate::twisted::{Pretr, SearchBound, TwistedComplex};
use std::collections::BTreeMap;
use std::sync::Arc;

/// What to do when a composition would exceed the word-length cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverflowPolicy {
    /// Refuse the composition.
    Reject,
    /// Drop the overflowing words and record that it happened.
    TrackUnknown,
}

/// Shape of a word: the chain of killed objects (bottom-up) and the
/// degrees of the ordinary letters g_0 ... g_m.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WordShape {
    pub chain: Vec<usize>,
    pub degs: Vec<i64>,
}

impl WordShape {
    pub fn length(&self) -> usize {
        self.chain.len()
    }

    pub fn degree(&self) -> i64 {
        self.degs.iter().sum::<i64>() - self.chain.len() as i64
    }
}

struct QBlock {
    shape: WordShape,
    module: FpModule,
    offset: usize,
}

/// Capped hom complex for one ordered pair of objects.
struct QHom {
    cx: Complex,
    blocks: BTreeMap<i64, Vec<QBlock>>,
}

/// The Drinfeld quotient with word length capped at `cap`.
pub struct QuotientCat {
    pub ambient: Arc<DgCat>,
    pub kill: Vec<usize>,
    pub cap: usize,
    pub policy: Option<OverflowPolicy>,
    homs: Vec<QHom>,
}

/// Exactness certificate for a capped cohomology computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Words longer than the cap provably cannot meet the three degrees
    /// entering the computation.
    Exact,
    /// The cap may have cut relevant words; the result is a quotient of the
    /// true cohomology in the given degree window.
    LowerBoundOnly,
}

/// Sources and targets of the ordinary letters in a word shape.
fn letter_endpoints(
    x: usize,
    y: usize,
    chain: &[usize],
) -> Vec<(usize, usize)> {
    let m = chain.len();
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let src = if j == 0 { x } else { chain[j - 1] };
        let tgt = if j == m { y } else { chain[j] };
        out.push((src, tgt));
    }
    out
}

pub fn drinfeld_quotient(
    ambient: &Arc<DgCat>,
    kill: &[usize],
    cap: usize,
    policy: Option<OverflowPolicy>,
) -> Result<QuotientCat, DgError> {
    for &d in kill {
        if d >= ambient.objects.len() {
            return Err(DgError::BadObject);
        }
    }
    let n = ambient.objects.len();
    let mut homs = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            homs.push(build_qhom(ambient, kill, cap, x, y)?);
        }
    }
    Ok(QuotientCat {
        ambient: ambient.clone(),
        kill: kill.to_vec(),
        cap,
        policy,
        homs,
    })
}

fn shapes_for(
    ambient: &DgCat,
    kill: &[usize],
    cap: usize,
    x: usize,
    y: usize,
) -> Vec<WordShape> {
    let mut shapes = Vec::new();
    let mut chains: Vec<Vec<usize>> = vec![vec![]];
    for m in 0..=cap {
        if m > 0 {
            let mut next = Vec::new();
            for c in &chains {
                for &d in kill {
                    let mut c2 = c.clone();
                    c2.push(d);
                    next.push(c2);
                }
            }
            chains = next;
            if chains.is_empty() {
                break;
            }
        }
        for chain in &chains {
            // enumerate degree tuples within the hom supports
            let eps = letter_endpoints(x, y, chain);
            let mut tuples: Vec<Vec<i64>> = vec![vec![]];
            let mut dead = false;
            for (src, tgt) in &eps {
                let h = ambient.hom(*src, *tgt);
                if h.is_zero_complex() {
                    dead = true;
                    break;
                }
                let mut next = Vec::new();
                for t in &tuples {
                    for d in h.support() {
                        if h.term(d).is_zero_module() {
                            continue;
                        }
                        let mut t2 = t.clone();
                        t2.push(d);
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            if dead {
                continue;
            }
            for degs in tuples {
                shapes.push(WordShape {
                    chain: chain.clone(),
                    degs,
                });
            }
        }
    }
    shapes
}

/// Tensor module of a word shape (the f letters are free of rank one and
/// contribute only degree), with the factor modules bottom-up.
fn shape_module(ambient: &DgCat, x: usize, y: usize, shape: &WordShape) -> FpModule {
    let eps = letter_endpoints(x, y, &shape.chain);
    // top-down fold: g_m first
    let mut acc: Option<FpModule> = None;
    for j in (0..eps.len()).rev() {
        let (s, t) = eps[j];
        let f = ambient.hom(s, t).term(shape.degs[j]);
        acc = Some(match acc {
            None => f,
            Some(a) => FpModule::tensor(&a, &f).module,
        });
    }
    acc.unwrap()
}

/// Embed per-letter elements (bottom-up) as an element of the shape module.
fn shape_pure(ambient: &DgCat, x: usize, y: usize, shape: &WordShape, letters: &[Mat]) -> Mat {
    let eps = letter_endpoints(x, y, &shape.chain);
    let mut acc_mod: Option<FpModule> = None;
    let mut acc_el: Option<Mat> = None;
    for j in (0..eps.len()).rev() {
        let (s, t) = eps[j];
        let fm = ambient.hom(s, t).term(shape.degs[j]);
        match (acc_mod.take(), acc_el.take()) {
            (None, None) => {
                acc_mod = Some(fm);
                acc_el = Some(letters[j].clone());
            }
            (Some(am), Some(ae)) => {
                let t2 = FpModule::tensor(&am, &fm);
                acc_el = Some(TensorModule::pure(&t2, &ae, &letters[j]));
                acc_mod = Some(t2.module);
            }
            _ => unreachable!(),
        }
    }
    acc_el.unwrap()
}

/// Decompose a generator index of the shape module into per-letter
/// generator indices (bottom-up order).
fn gen_digits(ambient: &DgCat, x: usize, y: usize, shape: &WordShape, mut idx: usize) -> Vec<usize> {
    let eps = letter_endpoints(x, y, &shape.chain);
    let sizes: Vec<usize> = eps
        .iter()
        .enumerate()
        .map(|(j, (s, t))| ambient.hom(*s, *t).term(shape.degs[j]).gens)
        .collect();
    // top-down fold makes g_m most significant; digits bottom-up
    let mut digits = vec![0usize; sizes.len()];
    for j in 0..sizes.len() {
        digits[j] = idx % sizes[j];
        idx /= sizes[j];
    }
    digits
}

fn build_qhom(
    ambient: &DgCat,
    kill: &[usize],
    cap: usize,
    x: usize,
    y: usize,
) -> Result<QHom, DgError> {
    let ring = ambient.ring;
    let shapes = shapes_for(ambient, kill, cap, x, y);
    let mut by_deg: BTreeMap<i64, Vec<WordShape>> = BTreeMap::new();
    for s in shapes {
        by_deg.entry(s.degree()).or_default().push(s);
    }
    let (lo, hi) = match (by_deg.keys().next(), by_deg.keys().last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return Ok(QHom {
                cx: Complex::zero(ring),
                blocks: BTreeMap::new(),
            })
        }
    };
    let mut blocks: BTreeMap<i64, Vec<QBlock>> = BTreeMap::new();
    let mut terms = Vec::new();
    for nn in lo..=hi {
        let mut blks = Vec::new();
        let mut offset = 0;
        if let Some(shapes) = by_deg.get(&nn) {
            let mut sorted = shapes.clone();
            sorted.sort();
            for shape in sorted {
                let module = shape_module(ambient, x, y, &shape);
                if module.is_zero_module() {
                    continue;
                }
                let gens = module.gens;
                blks.push(QBlock {
                    shape,
                    module,
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
    // differential
    let mut diffs = Vec::new();
    for nn in lo..hi {
        let src = &terms[(nn - lo) as usize];
        let tgt = &terms[(nn + 1 - lo) as usize];
        let mut mat = Mat::zeros(ring, tgt.gens, src.gens);
        for b in &blocks[&nn] {
            let eps = letter_endpoints(x, y, &b.shape.chain);
            let m = b.shape.chain.len();
            for g in 0..b.module.gens {
                let digits = gen_digits(ambient, x, y, &b.shape, g);
                let letters: Vec<Mat> = (0..=m)
                    .map(|j| {
                        let (s, t) = eps[j];
                        ambient.hom(s, t).term(b.shape.degs[j]).gen_el(digits[j])
                    })
                    .collect();
                let mut out = Mat::zeros(ring, tgt.gens, 1);
                // letter derivatives
                for j in 0..=m {
                    let (s, t) = eps[j];
                    let de = ambient.d_el(
                        s,
                        t,
                        &El {
                            deg: b.shape.degs[j],
                            v: letters[j].clone(),
                        },
                    );
                    if ambient.hom(s, t).term(de.deg).is_zero_el(&de.v) {
                        continue;
                    }
                    // prefix degrees strictly to the left in top-down order
                    let mut prefix = 0i64;
                    for t2 in (j + 1)..=m {
                        prefix += b.shape.degs[t2] - 1; // g_{t2} and its f
                    }
                    let mut new_shape = b.shape.clone();
                    new_shape.degs[j] += 1;
                    let mut new_letters = letters.clone();
                    new_letters[j] = de.v;
                    accumulate_word(
                        ambient,
                        &blocks,
                        tgt,
                        nn + 1,
                        x,
                        y,
                        &new_shape,
                        &new_letters,
                        prefix.rem_euclid(2) == 1,
                        &mut out,
                    );
                }
                // contractions: f_j becomes the identity, merging letters
                for j in 1..=m {
                    // prefix: letters g_m..g_j and the f's above f_j
                    let mut prefix = 0i64;
                    for t2 in j..=m {
                        prefix += b.shape.degs[t2];
                    }
                    prefix += -(1) * (m - j) as i64;
                    let (s_lo, _) = eps[j - 1];
                    let (_, t_hi) = eps[j];
                    let merged = ambient.compose(
                        s_lo,
                        b.shape.chain[j - 1],
                        t_hi,
                        &El {
                            deg: b.shape.degs[j],
                            v: letters[j].clone(),
                        },
                        &El {
                            deg: b.shape.degs[j - 1],
                            v: letters[j - 1].clone(),
                        },
                    );
                    let mut new_chain = b.shape.chain.clone();
                    new_chain.remove(j - 1);
                    let mut new_degs = b.shape.degs.clone();
                    let merged_deg = new_degs[j] + new_degs[j - 1];
                    new_degs.remove(j);
                    new_degs[j - 1] = merged_deg;
                    let new_shape = WordShape {
                        chain: new_chain,
                        degs: new_degs,
                    };
                    let mut new_letters = letters.clone();
                    new_letters.remove(j);
                    new_letters[j - 1] = merged.v;
                    accumulate_word(
                        ambient,
                        &blocks,
                        tgt,
                        nn + 1,
                        x,
                        y,
                        &new_shape,
                        &new_letters,
                        prefix.rem_euclid(2) == 1,
                        &mut out,
                    );
                }
                for r in 0..tgt.gens {
                    mat.set(r, b.offset + g, out.at(r, 0).clone());
                }
            }
        }
        diffs.push(ModMap::new_unchecked(src.clone(), tgt.clone(), mat));
    }
    let cx = Complex::new(ring, lo, terms, diffs)
        .map_err(|e| DgError::Other(format!("quotient differential: {}", e)))?;
    Ok(QHom { cx, blocks })
}

/// Add a word (shape + letters, possibly negated) into an accumulator in
/// the coordinates of the degree-n term.
#[allow(clippy::too_many_arguments)]
fn accumulate_word(
    ambient: &DgCat,
    blocks: &BTreeMap<i64, Vec<QBlock>>,
    term: &FpModule,
    n: i64,
    x: usize,
    y: usize,
    shape: &WordShape,
    letters: &[Mat],
    negate: bool,
    out: &mut Mat,
) {
    let Some(blks) = blocks.get(&n) else {
        return;
    };
    let Some(b) = blks.iter().find(|b| b.shape == *shape) else {
        return;
    };
    let mut v = shape_pure(ambient, x, y, shape, letters);
    v = b.module.canon(&v);
    if v.is_zero() {
        return;
    }
    if negate {
        v = v.neg();
    }
    for r in 0..v.rows {
        let idx = b.offset + r;
        let cur = out.at(idx, 0).clone();
        out.set(idx, 0, ambient.ring.cover().add(&cur, v.at(r, 0)));
    }
    let _ = term;
}

impl QuotientCat {
    fn idx(&self, x: usize, y: usize) -> usize {
        x * self.ambient.objects.len() + y
    }

    pub fn hom_cx(&self, x: usize, y: usize) -> &Complex {
        &self.homs[self.idx(x, y)].cx
    }

    /// The unit: the length-zero word on the ambient unit.
    pub fn unit(&self, x: usize) -> El {
        let u = self.ambient.unit(x);
        let shape = WordShape {
            chain: vec![],
            degs: vec![0],
        };
        self.embed_word(x, x, &shape, &[u.v])
    }

    /// The contraction generator f_D as the word 1 f_D 1.
    pub fn f_el(&self, d: usize) -> El {
        let u = self.ambient.unit(d);
        let shape = WordShape {
            chain: vec![d],
            degs: vec![0, 0],
        };
        self.embed_word(d, d, &shape, &[u.v.clone(), u.v])
    }

    /// Embed an ambient hom element as a length-zero word.
    pub fn embed_ambient(&self, x: usize, y: usize, e: &El) -> El {
        let shape = WordShape {
            chain: vec![],
            degs: vec![e.deg],
        };
        self.embed_word(x, y, &shape, &[e.v.clone()])
    }

    pub fn embed_word(&self, x: usize, y: usize, shape: &WordShape, letters: &[Mat]) -> El {
        let n = shape.degree();
        let term = self.hom_cx(x, y).term(n);
        let mut out = Mat::zeros(self.ambient.ring, term.gens, 1);
        accumulate_word(
            &self.ambient,
            &self.homs[self.idx(x, y)].blocks,
            &term,
            n,
            x,
            y,
            shape,
            letters,
            false,
            &mut out,
        );
        El {
            deg: n,
            v: term.canon(&out),
        }
    }

    pub fn d_el(&self, x: usize, y: usize, e: &El) -> El {
        let h = self.hom_cx(x, y);
        El {
            deg: e.deg + 1,
            v: h.diff(e.deg).apply(&e.v),
        }
    }

    /// Capped composition. The boolean records whether overflowing words
    /// were dropped (only possible under the track-as-unknown policy).
    pub fn compose(
        &self,
        x: usize,
        y: usize,
        z: usize,
        g: &El,
        f: &El,
    ) -> Result<(El, bool), DgError> {
        let ring = self.ambient.ring;
        let cv = ring.cover();
        let out_deg = g.deg + f.deg;
        let term = self.hom_cx(x, z).term(out_deg);
        let mut out = Mat::zeros(ring, term.gens, 1);
        let mut dropped = false;
        let g_blocks = &self.homs[self.idx(y, z)].blocks;
        let f_blocks = &self.homs[self.idx(x, y)].blocks;
        let (Some(gbs), Some(fbs)) = (g_blocks.get(&g.deg), f_blocks.get(&f.deg)) else {
            return Ok((
                El {
                    deg: out_deg,
                    v: out,
                },
                false,
            ));
        };
        for gb in gbs {
            for fb in fbs {
                let total_len = gb.shape.length() + fb.shape.length();
                // coefficients
                for gi in 0..gb.module.gens {
                    let gc = g.v.at(gb.offset + gi, 0);
                    if gc.is_zero() {
                        continue;
                    }
                    for fi in 0..fb.module.gens {
                        let fc = f.v.at(fb.offset + fi, 0);
                        if fc.is_zero() {
                            continue;
                        }
                        if total_len > self.cap {
                            match self.policy {
                                None => return Err(DgError::CapOverflowPolicyRequired),
                                Some(OverflowPolicy::Reject) => {
                                    return Err(DgError::Other(
                                        "composition rejected: word length exceeds the cap".into(),
                                    ))
                                }
                                Some(OverflowPolicy::TrackUnknown) => {
                                    dropped = true;
                                    continue;
                                }
                            }
                        }
                        let coeff = cv.mul(gc, fc);
                        // build the concatenated word
                        let g_digits = gen_digits(&self.ambient, y, z, &gb.shape, gi);
                        let f_digits = gen_digits(&self.ambient, x, y, &fb.shape, fi);
                        let g_eps = letter_endpoints(y, z, &gb.shape.chain);
                        let f_eps = letter_endpoints(x, y, &fb.shape.chain);
                        let m2 = fb.shape.length();
                        let mut chain = fb.shape.chain.clone();
                        chain.extend_from_slice(&gb.shape.chain);
                        let mut degs = Vec::new();
                        let mut letters = Vec::new();
                        for j in 0..m2 {
                            degs.push(fb.shape.degs[j]);
                            let (s, t) = f_eps[j];
                            letters.push(
                                self.ambient.hom(s, t).term(fb.shape.degs[j]).gen_el(f_digits[j]),
                            );
                        }
                        // junction: g_0 of g composed with g_{m2} of f
                        let (fs, ft) = f_eps[m2];
                        let (gs, gt) = g_eps[0];
                        let junction = self.ambient.compose(
                            fs,
                            ft.min(gs).max(gs),
                            gt,
                            &El {
                                deg: gb.shape.degs[0],
                                v: self
                                    .ambient
                                    .hom(gs, gt)
                                    .term(gb.shape.degs[0])
                                    .gen_el(g_digits[0]),
                            },
                            &El {
                                deg: fb.shape.degs[m2],
                                v: self
                                    .ambient
                                    .hom(fs, ft)
                                    .term(fb.shape.degs[m2])
                                    .gen_el(f_digits[m2]),
                            },
                        );
                        degs.push(fb.shape.degs[m2] + gb.shape.degs[0]);
                        letters.push(junction.v);
                        for j in 1..=gb.shape.length() {
                            degs.push(gb.shape.degs[j]);
                            let (s, t) = g_eps[j];
                            letters.push(
                                self.ambient.hom(s, t).term(gb.shape.degs[j]).gen_el(g_digits[j]),
                            );
                        }
                        let shape = WordShape {
                            chain,
                            degs,
                        };
                        let mut contrib = Mat::zeros(ring, term.gens, 1);
                        accumulate_word(
                            &self.ambient,
                            &self.homs[self.idx(x, z)].blocks,
                            &term,
                            out_deg,
                            x,
                            z,
                            &shape,
                            &letters,
                            false,
                            &mut contrib,
                        );
                        out = out.add(&contrib.scale(&coeff));
                    }
                }
            }
        }
        Ok((
            El {
                deg: out_deg,
                v: term.canon(&out),
            },
            dropped,
        ))
    }

    /// Axiom battery within the cap: unit laws, Leibniz on pairs whose
    /// total word length stays within the cap, associativity on triples
    /// likewise; overflow pairs are skipped and counted.
    pub fn check_axioms_capped(&self) -> (crate::dg::AxiomReport, usize) {
        use crate::dg::AxiomViolation;
        let n = self.ambient.objects.len();
        let mut violations = Vec::new();
        let mut skipped = 0usize;
        // d^2 = 0 re-check
        for x in 0..n {
            for y in 0..n {
                let h = self.hom_cx(x, y);
                for d in h.support() {
                    if !ModMap::compose(&h.diff(d + 1), &h.diff(d)).is_zero_map() {
                        violations.push(AxiomViolation::DifferentialSquare { x, y, degree: d });
                    }
                }
            }
        }
        // unit laws
        for x in 0..n {
            for y in 0..n {
                let h = self.hom_cx(x, y);
                for q in h.support() {
                    let t = h.term(q);
                    for g in 0..t.gens {
                        let f = El {
                            deg: q,
                            v: t.gen_el(g),
                        };
                        let left = self.compose(x, y, y, &self.unit(y), &f);
                        let right = self.compose(x, x, y, &f, &self.unit(x));
                        let ok = match (left, right) {
                            (Ok((l, false)), Ok((r, false))) => {
                                t.eq_el(&l.v, &f.v) && t.eq_el(&r.v, &f.v)
                            }
                            _ => {
                                skipped += 1;
                                true
                            }
                        };
                        if !ok {
                            violations.push(AxiomViolation::UnitLaw { x, y, degree: q, gen: g });
                        }
                    }
                }
            }
        }
        // Leibniz within the cap
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let h_xy = self.hom_cx(x, y);
                    let h_yz = self.hom_cx(y, z);
                    for p in h_yz.support() {
                        let tp = h_yz.term(p);
                        for q in h_xy.support() {
                            let tq = h_xy.term(q);
                            for i in 0..tp.gens {
                                let g = El {
                                    deg: p,
                                    v: tp.gen_el(i),
                                };
                                for j in 0..tq.gens {
                                    let f = El {
                                        deg: q,
                                        v: tq.gen_el(j),
                                    };
                                    if self.gen_len(y, z, p, i) + self.gen_len(x, y, q, j)
                                        > self.cap
                                    {
                                        skipped += 1;
                                        continue;
                                    }
                                    let gf = self.compose(x, y, z, &g, &f).unwrap().0;
                                    let lhs = self.d_el(x, z, &gf);
                                    let dg = self.d_el(y, z, &g);
                                    let df = self.d_el(x, y, &f);
                                    let mut rhs = self.compose(x, y, z, &dg, &f).unwrap().0;
                                    let mut second = self.compose(x, y, z, &g, &df).unwrap().0;
                                    if p.rem_euclid(2) == 1 {
                                        second.v = second.v.neg();
                                    }
                                    rhs.v = rhs.v.add(&second.v);
                                    let term = self.hom_cx(x, z).term(p + q + 1);
                                    if !term.eq_el(&lhs.v, &term.canon(&rhs.v)) {
                                        violations.push(AxiomViolation::Leibniz {
                                            x,
                                            y,
                                            z,
                                            degrees: (p, q),
                                            gens: (i, j),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // associativity within the cap
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let h_wx = self.hom_cx(w, x);
                        let h_xy = self.hom_cx(x, y);
                        let h_yz = self.hom_cx(y, z);
                        for p in h_yz.support() {
                            let tp = h_yz.term(p);
                            for q in h_xy.support() {
                                let tq = h_xy.term(q);
                                for r in h_wx.support() {
                                    let tr = h_wx.term(r);
                                    for i in 0..tp.gens {
                                        for j in 0..tq.gens {
                                            for k in 0..tr.gens {
                                                if self.gen_len(y, z, p, i)
                                                    + self.gen_len(x, y, q, j)
                                                    + self.gen_len(w, x, r, k)
                                                    > self.cap
                                                {
                                                    skipped += 1;
                                                    continue;
                                                }
                                                let h = El {
                                                    deg: p,
                                                    v: tp.gen_el(i),
                                                };
                                                let g = El {
                                                    deg: q,
                                                    v: tq.gen_el(j),
                                                };
                                                let f = El {
                                                    deg: r,
                                                    v: tr.gen_el(k),
                                                };
                                                let hg =
                                                    self.compose(x, y, z, &h, &g).unwrap().0;
                                                let left =
                                                    self.compose(w, x, z, &hg, &f).unwrap().0;
                                                let gf =
                                                    self.compose(w, x, y, &g, &f).unwrap().0;
                                                let right =
                                                    self.compose(w, y, z, &h, &gf).unwrap().0;
                                                let term = self.hom_cx(w, z).term(p + q + r);
                                                if !term.eq_el(&left.v, &right.v) {
                                                    violations.push(
                                                        AxiomViolation::Associativity {
                                                            objects: (w, x, y, z),
                                                            degrees: (p, q, r),
                                                            gens: (i, j, k),
                                                        },
                                                    );
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        (crate::dg::AxiomReport { violations }, skipped)
    }

    /// Word length of the block a generator belongs to.
    fn gen_len(&self, x: usize, y: usize, deg: i64, gen: usize) -> usize {
        let blocks = &self.homs[self.idx(x, y)].blocks;
        if let Some(blks) = blocks.get(&deg) {
            for b in blks {
                if gen >= b.offset && gen < b.offset + b.module.gens {
                    return b.shape.length();
                }
            }
        }
        0
    }

    /// H^n of the capped hom complex and the exactness certificate from the
    /// degree-bound analysis.
    pub fn hom_cohomology(&self, x: usize, y: usize, n: i64) -> (FpModule, Certificate) {
        let h = self.hom_cx(x, y).cohomology(n);
        (h, self.certificate(x, y, n))
    }

    fn certificate(&self, x: usize, y: usize, n: i64) -> Certificate {
        if self.kill.is_empty() {
            return Certificate::Exact;
        }
        // degree bounds over all hom complexes a word can draw letters from
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        let mut pairs = Vec::new();
        for &d in &self.kill {
            pairs.push((x, d));
            pairs.push((d, y));
            for &d2 in &self.kill {
                pairs.push((d, d2));
            }
        }
        for (s, t) in pairs {
            let h = self.ambient.hom(s, t);
            if h.is_zero_complex() {
                continue;
            }
            lo = lo.min(h.lo());
            hi = hi.max(h.hi());
        }
        if lo > hi {
            // no words can be formed at all
            return Certificate::Exact;
        }
        let low_line = |m: i64| m * (lo - 1) + lo;
        let high_line = |m: i64| m * (hi - 1) + hi;
        let miss = |m: i64| low_line(m) > n + 1 || high_line(m) < n - 1;
        let m_end = self.cap as i64 + 2 + n.abs() + lo.abs() + hi.abs();
        for m in (self.cap as i64 + 1)..=m_end {
            if !miss(m) {
                return Certificate::LowerBoundOnly;
            }
        }
        // escape for all larger m
        let escapes_up = lo >= 1 && low_line(m_end) > n + 1;
        let escapes_down = hi <= 1 && high_line(m_end) < n - 1;
        if escapes_up || escapes_down {
            Certificate::Exact
        } else {
            Certificate::LowerBoundOnly
        }
    }

    /// Materialize into a plain dg category using capped composition. The
    /// flag reports whether any table entry dropped overflow words.
    pub fn materialize(&self) -> Result<(DgCat, bool), DgError> {
        let n = self.ambient.objects.len();
        let ring = self.ambient.ring;
        let mut dropped_any = false;
        let homs: Vec<Complex> = (0..n * n).map(|i| self.homs[i].cx.clone()).collect();
        let units: Vec<El> = (0..n).map(|x| self.unit(x)).collect();
        let mut comp: CompTable = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let h_xy = self.hom_cx(x, y);
                    let h_yz = self.hom_cx(y, z);
                    let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                    for p in h_yz.support() {
                        let tp = h_yz.term(p);
                        for q in h_xy.support() {
                            let tq = h_xy.term(q);
                            if tp.gens == 0 || tq.gens == 0 {
                                continue;
                            }
                            let mut table = Vec::new();
                            for i in 0..tp.gens {
                                let g = El {
                                    deg: p,
                                    v: tp.gen_el(i),
                                };
                                let mut row = Vec::new();
                                for j in 0..tq.gens {
                                    let f = El {
                                        deg: q,
                                        v: tq.gen_el(j),
                                    };
                                    let (prod, dropped) = self.compose(x, y, z, &g, &f)?;
                                    dropped_any |= dropped;
                                    row.push(prod.v);
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
        let names = self
            .ambient
            .objects
            .iter()
            .map(|o| format!("{}/q", o))
            .collect();
        let cat = DgCat::from_parts(ring, names, homs, units, comp)?;
        Ok((cat, dropped_any))
    }

    /// The quotient dg functor from the ambient category (length-zero
    /// words), against a materialization of this quotient.
    pub fn embedding_functor(&self, materialized: &Arc<DgCat>) -> Result<DgFunctor, DgError> {
        let n = self.ambient.objects.len();
        let mut hom_maps = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let src_cx = self.ambient.hom(x, y);
                let tgt_cx = self.hom_cx(x, y);
                let mut comps = BTreeMap::new();
                for d in src_cx.support() {
                    let srct = src_cx.term(d);
                    let tgtt = tgt_cx.term(d);
                    let mut mat = Mat::zeros(self.ambient.ring, tgtt.gens, srct.gens);
                    for g in 0..srct.gens {
                        let e = self.embed_ambient(
                            x,
                            y,
                            &El {
                                deg: d,
                                v: srct.gen_el(g),
                            },
                        );
                        for r in 0..tgtt.gens {
                            mat.set(r, g, e.v.at(r, 0).clone());
                        }
                    }
                    comps.insert(d, ModMap::new_unchecked(srct, tgtt, mat));
                }
                hom_maps.insert(
                    (x, y),
                    crate::complex::ChainMap::from_comps(src_cx, materialized.hom(x, y), 0, comps),
                );
            }
        }
        Ok(DgFunctor {
            src: self.ambient.clone(),
            tgt: materialized.clone(),
            obj_map: (0..n).collect(),
            hom_maps,
        })
    }

    /// The functor between materialized quotients induced by enlarging the
    /// killed set (same ambient, same cap).
    pub fn extension_functor(
        small: &QuotientCat,
        small_mat: &Arc<DgCat>,
        large: &QuotientCat,
        large_mat: &Arc<DgCat>,
    ) -> Result<DgFunctor, DgError> {
        if !Arc::ptr_eq(&small.ambient, &large.ambient) && *small.ambient != *large.ambient {
            return Err(DgError::Other("quotients of different ambient categories".into()));
        }
        if small.cap != large.cap {
            return Err(DgError::Other("quotients with different caps".into()));
        }
        for d in &small.kill {
            if !large.kill.contains(d) {
                return Err(DgError::Other("killed set is not contained in the larger one".into()));
            }
        }
        let n = small.ambient.objects.len();
        let mut hom_maps = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let src_cx = small.hom_cx(x, y);
                let tgt_cx = large.hom_cx(x, y);
                let mut comps = BTreeMap::new();
                for d in src_cx.support() {
                    let srct = src_cx.term(d);
                    let tgtt = tgt_cx.term(d);
                    let mut mat = Mat::zeros(small.ambient.ring, tgtt.gens, srct.gens);
                    let blocks = &small.homs[small.idx(x, y)].blocks;
                    if let Some(blks) = blocks.get(&d) {
                        for b in blks {
                            for g in 0..b.module.gens {
                                let digits = gen_digits(&small.ambient, x, y, &b.shape, g);
                                let eps = letter_endpoints(x, y, &b.shape.chain);
                                let letters: Vec<Mat> = (0..eps.len())
                                    .map(|j| {
                                        let (s, t) = eps[j];
                                        small
                                            .ambient
                                            .hom(s, t)
                                            .term(b.shape.degs[j])
                                            .gen_el(digits[j])
                                    })
                                    .collect();
                                let e = large.embed_word(x, y, &b.shape, &letters);
                                for r in 0..tgtt.gens {
                                    mat.set(r, b.offset + g, e.v.at(r, 0).clone());
                                }
                            }
                        }
                    }
                    comps.insert(d, ModMap::new_unchecked(srct, tgtt, mat));
                }
                hom_maps.insert(
                    (x, y),
                    crate::complex::ChainMap::from_comps(src_cx, large_mat.hom(x, y), 0, comps),
                );
            }
        }
        Ok(DgFunctor {
            src: small_mat.clone(),
            tgt: large_mat.clone(),
            obj_map: (0..n).collect(),
            hom_maps,
        })
    }
}

/// Outcome of the roof-calculus oracle.
#[derive(Debug)]
pub enum VerdierOutcome {
    /// Class count of Hom(X, Y) in the quotient of the homotopy category,
    /// stable under growing the roof bound by one.
    Classes(usize),
    /// Bounds exhausted before stabilizing.
    Inconclusive,
}

/// Roof-calculus computation of Hom in H^0(ambient)/thick(kill) by bounded
/// enumeration, over a field base. Serves as the independent oracle for the
/// capped Drinfeld computation. The count must agree between the one-term
/// apex tier and the full tier to be reported as stable.
pub fn verdier_h0_oracle(
    ambient: &Arc<DgCat>,
    kill: &[usize],
    x: usize,
    y: usize,
    bound: SearchBound,
) -> Result<VerdierOutcome, DgError> {
    if !ambient.ring.is_field() {
        return Err(DgError::Other("the roof oracle needs a field base".into()));
    }
    let (small, big) = roof_class_counts(ambient, kill, x, y, bound)?;
    if small == big {
        Ok(VerdierOutcome::Classes(big))
    } else {
        Ok(VerdierOutcome::Inconclusive)
    }
}

struct Roof {
    apex: usize, // index into the candidate list
    s: Mat,      // H0 class of apex -> x
    s_tw: crate::twisted::TwEl,
    g: Mat, // H0 class of apex -> y
    g_tw: crate::twisted::TwEl,
}

/// Class counts over the one-term apex tier and over the full tier, sharing
/// all hom-complex computations.
fn roof_class_counts(
    ambient: &Arc<DgCat>,
    kill: &[usize],
    x: usize,
    y: usize,
    bound: SearchBound,
) -> Result<(usize, usize), DgError> {
    let pretr = Pretr::new(ambient.clone());
    // candidate apexes: one-term objects with shifts first, then zero-twist
    // pairs
    let all: Vec<usize> = (0..ambient.objects.len()).collect();
    let mut cands: Vec<TwistedComplex> = vec![pretr.one_term(x)];
    for &o in &all {
        for s in bound.shift_lo..=bound.shift_hi {
            let tc = TwistedComplex {
                entries: vec![(o, s)],
                twist: BTreeMap::new(),
            };
            if !cands.contains(&tc) {
                cands.push(tc);
            }
        }
    }
    let tier_one = cands.len();
    if bound.max_entries >= 2 {
        let singles: Vec<(usize, i64)> = all
            .iter()
            .flat_map(|&o| (bound.shift_lo..=bound.shift_hi).map(move |s| (o, s)))
            .collect();
        for (ai, &a) in singles.iter().enumerate() {
            for &b in &singles[ai..] {
                cands.push(TwistedComplex {
                    entries: vec![a, b],
                    twist: BTreeMap::new(),
                });
            }
        }
    }
    let tx = pretr.one_term(x);
    let ty = pretr.one_term(y);
    let memb_bound = SearchBound {
        max_entries: 1,
        shift_lo: bound.shift_lo - 1,
        shift_hi: bound.shift_hi + 1,
    };
    // per-apex hom data towards x and y
    let mut data_x = Vec::new();
    let mut data_y = Vec::new();
    for cand in &cands {
        data_x.push(pretr.hom_data(cand, &tx));
        data_y.push(pretr.hom_data(cand, &ty));
    }
    let h0_x: Vec<_> = data_x.iter().map(|d| d.cx.cohomology_at(0)).collect();
    let h0_y: Vec<_> = data_y.iter().map(|d| d.cx.cohomology_at(0)).collect();
    // admissible roofs
    let mut roofs: Vec<Roof> = Vec::new();
    for (ci, cand) in cands.iter().enumerate() {
        let s_classes = h0_x[ci]
            .module
            .enumerate()
            .ok_or(DgError::InfiniteEnumeration)?;
        let g_classes = h0_y[ci]
            .module
            .enumerate()
            .ok_or(DgError::InfiniteEnumeration)?;
        for s in s_classes {
            let s_tw = data_x[ci].decode(&El {
                deg: 0,
                v: h0_x[ci].rep(&s),
            });
            let Ok((cone_s, _, _)) = pretr.cone_tw(cand, &tx, &s_tw) else {
                continue;
            };
            match gen_membership(ambient, kill, &cone_s, 3, memb_bound)? {
                Membership::Member(_) => {}
                Membership::NotWithinBound => continue,
            }
            for g in &g_classes {
                let g_tw = data_y[ci].decode(&El {
                    deg: 0,
                    v: h0_y[ci].rep(g),
                });
                roofs.push(Roof {
                    apex: ci,
                    s: s.clone(),
                    s_tw: s_tw.clone(),
                    g: g.clone(),
                    g_tw,
                });
            }
        }
    }
    // refinement edges: u: apex_j -> apex_i with s_i o u = s_j and
    // g_i o u = g_j. A common refinement of two roofs is itself a roof, so
    // the generated closure matches the common-refinement relation on the
    // enumerated set.
    let nr = roofs.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut uclass_cache: BTreeMap<(usize, usize), Vec<crate::twisted::TwEl>> = BTreeMap::new();
    for i in 0..nr {
        for j in 0..nr {
            if i == j {
                continue;
            }
            let (ai, aj) = (roofs[i].apex, roofs[j].apex);
            let key = (aj, ai);
            if !uclass_cache.contains_key(&key) {
                let data = pretr.hom_data(&cands[aj], &cands[ai]);
                let h0 = data.cx.cohomology_at(0);
                let classes = h0
                    .module
                    .enumerate()
                    .ok_or(DgError::InfiniteEnumeration)?;
                let reps = classes
                    .iter()
                    .map(|c| {
                        data.decode(&El {
                            deg: 0,
                            v: h0.rep(c),
                        })
                    })
                    .collect();
                uclass_cache.insert(key, reps);
            }
            let mut linked = false;
            for u_tw in &uclass_cache[&key] {
                // compose in the twisted hull and classify over apex_j
                let su = pretr.compose_tw(&cands[aj], &cands[ai], &tx, &roofs[i].s_tw, u_tw);
                let Some(su_el) = data_x[aj].encode(&pretr, &cands[aj], &tx, &su) else {
                    continue;
                };
                let Some(su_cls) = h0_x[aj].classify(&su_el.v) else {
                    continue;
                };
                if !h0_x[aj].module.eq_el(&su_cls, &roofs[j].s) {
                    continue;
                }
                let gu = pretr.compose_tw(&cands[aj], &cands[ai], &ty, &roofs[i].g_tw, u_tw);
                let Some(gu_el) = data_y[aj].encode(&pretr, &cands[aj], &ty, &gu) else {
                    continue;
                };
                let Some(gu_cls) = h0_y[aj].classify(&gu_el.v) else {
                    continue;
                };
                if !h0_y[aj].module.eq_el(&gu_cls, &roofs[j].g) {
                    continue;
                }
                linked = true;
                break;
            }
            if linked {
                edges.push((i, j));
            }
        }
    }
    let count_for = |allowed: &dyn Fn(usize) -> bool| -> usize {
        let mut uf: Vec<usize> = (0..nr).collect();
        fn find(uf: &mut Vec<usize>, i: usize) -> usize {
            if uf[i] != i {
                let r = find(uf, uf[i]);
                uf[i] = r;
            }
            uf[i]
        }
        for &(i, j) in &edges {
            if allowed(roofs[i].apex) && allowed(roofs[j].apex) {
                let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
                if ri != rj {
                    uf[ri] = rj;
                }
            }
        }
        let mut reps = std::collections::BTreeSet::new();
        for i in 0..nr {
            if allowed(roofs[i].apex) {
                let r = find(&mut uf, i);
                reps.insert(r);
            }
        }
        reps.len().max(1)
    };
    let small = count_for(&|a| a < tier_one);
    let big = count_for(&|_| true);
    Ok((small, big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    fn point(ring: Ring) -> Arc<DgCat> {
        Arc::new(crate::dg::point_category(ring, "k"))
    }

    #[test]
    fn quotient_by_nothing_is_ambient() {
        let cat = point(Ring::IntMod(2));
        let q = drinfeld_quotient(&cat, &[], 3, Some(OverflowPolicy::Reject)).unwrap();
        assert_eq!(q.hom_cx(0, 0), cat.hom(0, 0));
        let (h0, cert) = q.hom_cohomology(0, 0, 0);
        assert_eq!(h0.cardinality(), Some(2));
        assert_eq!(cert, Certificate::Exact);
    }

    #[test]
    fn d_of_f_is_the_identity() {
        let cat = point(Ring::IntMod(2));
        let q = drinfeld_quotient(&cat, &[0], 2, Some(OverflowPolicy::TrackUnknown)).unwrap();
        let f = q.f_el(0);
        assert_eq!(f.deg, -1);
        let df = q.d_el(0, 0, &f);
        let unit = q.unit(0);
        assert!(q.hom_cx(0, 0).term(0).eq_el(&df.v, &unit.v));
    }

    #[test]
    fn killing_everything_kills_h0_at_cap_one() {
        let cat = point(Ring::IntMod(2));
        let q = drinfeld_quotient(&cat, &[0], 1, Some(OverflowPolicy::TrackUnknown)).unwrap();
        let (h0, cert) = q.hom_cohomology(0, 0, 0);
        assert!(h0.is_zero_module());
        assert_eq!(cert, Certificate::Exact);
    }

    #[test]
    fn capped_axioms_hold_within_window() {
        let r = Ring::IntMod(3);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let c = Complex::new(
            r,
            0,
            vec![FpModule::free(r, 1), FpModule::free(r, 1)],
            vec![ModMap::identity(&FpModule::free(r, 1))],
        )
        .unwrap();
        let cat = Arc::new(DgCat::concrete(r, vec![("k".into(), k), ("c".into(), c)]).unwrap());
        let q = drinfeld_quotient(&cat, &[1], 2, Some(OverflowPolicy::TrackUnknown)).unwrap();
        let (report, _skipped) = q.check_axioms_capped();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn quotient_by_contractible_preserves_endo_cohomology() {
        let r = Ring::IntMod(2);
        let k = Complex::concentrated(r, 0, FpModule::free(r, 1));
        let m = FpModule::free(r, 1);
        let contractible = Complex::new(r, 0, vec![m.clone(), m.clone()], vec![ModMap::identity(&m)]).unwrap();
        let cat = Arc::new(
            DgCat::concrete(r, vec![("k".into(), k), ("c".into(), contractible)]).unwrap(),
        );
        let q = drinfeld_quotient(&cat, &[1], 2, Some(OverflowPolicy::TrackUnknown)).unwrap();
        let (h0, cert) = q.hom_cohomology(0, 0, 0);
        // the killed object has hom letters in negative degrees, so the
        // degree-bound analysis cannot certify exactness here; the value
        // still agrees with the independent roof computation
        assert_eq!(cert, Certificate::LowerBoundOnly);
        assert_eq!(h0.cardinality(), Some(2));
        // cross-check with the roof oracle
        let bound = SearchBound {
            max_entries: 2,
            shift_lo: 0,
            shift_hi: 0,
        };
        match verdier_h0_oracle(&cat, &[1], 0, 0, bound).unwrap() {
            VerdierOutcome::Classes(c) => assert_eq!(c, 2),
            VerdierOutcome::Inconclusive => panic!("oracle should stabilize"),
        }
    }

    #[test]
    fn empty_kill_oracle_matches_h0() {
        let cat = point(Ring::IntMod(2));
        let bound = SearchBound {
            max_entries: 1,
            shift_lo: 0,
            shift_hi: 0,
        };
        match verdier_h0_oracle(&cat, &[], 0, 0, bound).unwrap() {
            VerdierOutcome::Classes(c) => assert_eq!(c, 2),
            _ => panic!("stable"),
        }
    }

    #[test]
    fn materialized_quotient_embedding_validates() {
        let cat = point(Ring::IntMod(2));
        let q = drinfeld_quotient(&cat, &[0], 2, Some(OverflowPolicy::TrackUnknown)).unwrap();
        let (m, _dropped) = q.materialize().unwrap();
        let m = Arc::new(m);
        let f = q.embedding_functor(&m).unwrap();
        f.validate().unwrap();
    }
}

#[cfg(test)]
mod profiling {
    use super::*;
    use crate::ring::Ring;

    #[test]
    #[ignore]
    fn profile_oracle_one_pair() {
        let cat = crate::corpus::product_ring_category(2);
        let bound = SearchBound { max_entries: 2, shift_lo: 0, shift_hi: 0 };
        let t0 = std::time::Instant::now();
        let _ = verdier_h0_oracle(&cat, &[1], 2, 2, bound).unwrap();
        eprintln!("oracle (X12, X12): {:?}", t0.elapsed());
        let t1 = std::time::Instant::now();
        let _ = verdier_h0_oracle(&cat, &[1], 0, 0, bound).unwrap();
        eprintln!("oracle (X1, X1): {:?}", t1.elapsed());
        let _ = Ring::Int;
    }
}
