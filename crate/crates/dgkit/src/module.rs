//! Finitely presented modules over the supported rings and their morphisms.
//!
//! A module is presented by a generators x relations matrix over the
//! Euclidean cover; the ring's structural relation is appended implicitly.
//! All higher layers (complexes, dg categories) reduce to the operations
//! here.

use crate::mat::{kernel_cover, snf_any, solve_cover, Mat};
use crate::ring::{Cover, Ring, Scalar};

/// Smith-normal-form data of the augmented presentation, computed once at
/// construction and reused for canonical forms, equality and enumeration.
#[derive(Clone, Debug, PartialEq)]
struct Nf {
    u: Mat,
    uinv: Mat,
    divisors: Vec<Scalar>,
    trivial: bool,
}

/// A finitely presented module.
#[derive(Clone, Debug)]
pub struct FpModule {
    pub ring: Ring,
    pub gens: usize,
    pub rels: Mat,
    nf: Nf,
}

impl PartialEq for FpModule {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.gens == other.gens && self.rels == other.rels
    }
}
impl Eq for FpModule {}

impl FpModule {
    pub fn new(ring: Ring, gens: usize, rels: Mat) -> FpModule {
        assert_eq!(rels.rows, gens, "presentation must have one row per generator");
        assert_eq!(rels.ring, ring);
        let rels = rels.reduced();
        if rels.is_zero() {
            // free module: the normal form is the structural relation alone
            let d = match ring.structural() {
                Some(s) => s,
                None => ring.cover().zero(),
            };
            return FpModule {
                ring,
                gens,
                rels: Mat::zeros(ring, gens, 0),
                nf: Nf {
                    u: Mat::identity(ring, gens),
                    uinv: Mat::identity(ring, gens),
                    divisors: vec![d; gens],
                    trivial: true,
                },
            };
        }
        let aug = augment(ring, &rels);
        let s = snf_any(&aug);
        let n = aug.rows.min(aug.cols);
        let mut divisors = Vec::with_capacity(gens);
        for i in 0..gens {
            if i < n {
                divisors.push(s.d.at(i, i).clone());
            } else {
                divisors.push(ring.cover().zero());
            }
        }
        FpModule {
            ring,
            gens,
            rels,
            nf: Nf {
                u: s.u,
                uinv: s.uinv,
                divisors,
                trivial: false,
            },
        }
    }

    pub fn zero(ring: Ring) -> FpModule {
        FpModule::new(ring, 0, Mat::zeros(ring, 0, 0))
    }

    pub fn free(ring: Ring, n: usize) -> FpModule {
        FpModule::new(ring, n, Mat::zeros(ring, n, 0))
    }

    /// Cyclic module cover/(c).
    pub fn cyclic(ring: Ring, c: &Scalar) -> FpModule {
        let mut rels = Mat::zeros(ring, 1, 1);
        rels.set(0, 0, c.clone());
        FpModule::new(ring, 1, rels)
    }

    pub fn is_zero_module(&self) -> bool {
        self.nf
            .divisors
            .iter()
            .all(|d| self.ring.cover().is_unit(d))
    }

    fn aug(&self) -> Mat {
        augment(self.ring, &self.rels)
    }

    /// Canonical representative of an element given in generator coordinates.
    pub fn canon(&self, x: &Mat) -> Mat {
        assert_eq!(x.rows, self.gens);
        assert_eq!(x.cols, 1);
        let cv = self.ring.cover();
        if self.nf.trivial {
            let mut r = Mat::zeros(self.ring, self.gens, 1);
            for i in 0..self.gens {
                let d = &self.nf.divisors[i];
                let v = if d.is_zero() {
                    x.at(i, 0).clone()
                } else if cv.is_unit(d) {
                    cv.zero()
                } else {
                    cv.divmod(x.at(i, 0), d).1
                };
                r.set(i, 0, v);
            }
            return r.reduced();
        }
        let y = self.nf.u.mul(x);
        let mut r = Mat::zeros(self.ring, self.gens, 1);
        for i in 0..self.gens {
            let d = &self.nf.divisors[i];
            let v = if d.is_zero() {
                y.at(i, 0).clone()
            } else if cv.is_unit(d) {
                cv.zero()
            } else {
                cv.divmod(y.at(i, 0), d).1
            };
            r.set(i, 0, v);
        }
        self.nf.uinv.mul(&r).reduced()
    }

    pub fn zero_el(&self) -> Mat {
        Mat::zeros(self.ring, self.gens, 1)
    }

    pub fn gen_el(&self, i: usize) -> Mat {
        let mut m = self.zero_el();
        m.set(i, 0, self.ring.cover().one());
        m
    }

    pub fn el_from_i64(&self, coords: &[i64]) -> Mat {
        assert_eq!(coords.len(), self.gens);
        Mat::from_fn(self.ring, self.gens, 1, |i, _| {
            Scalar::from_i64(coords[i], self.ring)
        })
    }

    pub fn eq_el(&self, a: &Mat, b: &Mat) -> bool {
        self.canon(a) == self.canon(b)
    }

    pub fn is_zero_el(&self, a: &Mat) -> bool {
        self.canon(a).is_zero()
    }

    /// Number of elements, if finite.
    pub fn cardinality(&self) -> Option<u64> {
        let cv = self.ring.cover();
        let mut count: u64 = 1;
        for d in &self.nf.divisors {
            if d.is_zero() {
                return None;
            }
            if cv.is_unit(d) {
                continue;
            }
            let c = match (cv, d) {
                (Cover::Int, Scalar::Int(n)) => {
                    use num::ToPrimitive;
                    n.magnitude().to_u64()?
                }
                (Cover::Poly(p), Scalar::Poly(c)) => {
                    let deg = (c.len() - 1) as u32;
                    p.checked_pow(deg)?
                }
                (Cover::Rat, _) => return None,
                _ => unreachable!(),
            };
            count = count.checked_mul(c)?;
        }
        Some(count)
    }

    /// All elements in canonical form; None when infinite.
    pub fn enumerate(&self) -> Option<Vec<Mat>> {
        let cv = self.ring.cover();
        let card = self.cardinality()?;
        if card > 1_000_000 {
            return None;
        }
        let mut residue_sets: Vec<Vec<Scalar>> = Vec::with_capacity(self.gens);
        for d in &self.nf.divisors {
            if cv.is_unit(d) {
                residue_sets.push(vec![cv.zero()]);
            } else {
                residue_sets.push(residues_mod(cv, d)?);
            }
        }
        let mut out = Vec::with_capacity(card as usize);
        let mut idx = vec![0usize; self.gens];
        loop {
            let y = Mat::from_fn(self.ring, self.gens, 1, |i, _| residue_sets[i][idx[i]].clone());
            out.push(self.canon(&self.nf.uinv.mul(&y)));
            // odometer
            let mut k = 0;
            loop {
                if k == self.gens {
                    return Some(out);
                }
                idx[k] += 1;
                if idx[k] < residue_sets[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Invariant factors (non-unit, nonzero, in divisibility order) and free
    /// rank. A complete isomorphism invariant.
    pub fn invariant_factors(&self) -> (Vec<Scalar>, usize) {
        let cv = self.ring.cover();
        let mut factors = Vec::new();
        let mut free = 0;
        for d in &self.nf.divisors {
            if d.is_zero() {
                free += 1;
            } else if !cv.is_unit(d) {
                factors.push(d.clone());
            }
        }
        (factors, free)
    }

    pub fn is_iso_to(&self, other: &FpModule) -> bool {
        self.ring == other.ring && self.invariant_factors() == other.invariant_factors()
    }

    /// Printable form of the isomorphism class, e.g. "Z/2 + Z/4 + Z^2".
    pub fn iso_label(&self) -> String {
        let (factors, free) = self.invariant_factors();
        let mut parts: Vec<String> = Vec::new();
        for f in &factors {
            parts.push(format!("{}/({})", cover_name(self.ring), f));
        }
        if free == 1 {
            parts.push(cover_name(self.ring).to_string());
        } else if free > 1 {
            parts.push(format!("{}^{}", cover_name(self.ring), free));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// Direct sum with injections and projections.
    pub fn direct_sum(ring: Ring, parts: &[&FpModule]) -> (FpModule, Vec<ModMap>, Vec<ModMap>) {
        let rels: Vec<&Mat> = parts.iter().map(|p| &p.rels).collect();
        let total = FpModule::new(
            ring,
            parts.iter().map(|p| p.gens).sum(),
            Mat::block_diag(ring, &rels),
        );
        let mut injs = Vec::new();
        let mut projs = Vec::new();
        let mut off = 0;
        for p in parts {
            let mut inj = Mat::zeros(ring, total.gens, p.gens);
            let mut proj = Mat::zeros(ring, p.gens, total.gens);
            for i in 0..p.gens {
                inj.set(off + i, i, ring.cover().one());
                proj.set(i, off + i, ring.cover().one());
            }
            injs.push(ModMap::new_unchecked((*p).clone(), total.clone(), inj));
            projs.push(ModMap::new_unchecked(total.clone(), (*p).clone(), proj));
            off += p.gens;
        }
        (total, injs, projs)
    }

    /// Tensor product with the bilinear structure map.
    pub fn tensor(a: &FpModule, b: &FpModule) -> TensorModule {
        assert_eq!(a.ring, b.ring);
        let ring = a.ring;
        let gens = a.gens * b.gens;
        let mut rel_cols: Vec<Mat> = Vec::new();
        for c in 0..a.rels.cols {
            for j in 0..b.gens {
                let mut col = Mat::zeros(ring, gens, 1);
                for i in 0..a.gens {
                    col.set(i * b.gens + j, 0, a.rels.at(i, c).clone());
                }
                rel_cols.push(col);
            }
        }
        for c in 0..b.rels.cols {
            for i in 0..a.gens {
                let mut col = Mat::zeros(ring, gens, 1);
                for j in 0..b.gens {
                    col.set(i * b.gens + j, 0, b.rels.at(j, c).clone());
                }
                rel_cols.push(col);
            }
        }
        let mut rels = Mat::zeros(ring, gens, rel_cols.len());
        for (k, col) in rel_cols.iter().enumerate() {
            for i in 0..gens {
                rels.set(i, k, col.at(i, 0).clone());
            }
        }
        TensorModule {
            module: FpModule::new(ring, gens, rels),
            lhs: a.clone(),
            rhs: b.clone(),
        }
    }
}

fn cover_name(ring: Ring) -> &'static str {
    match ring {
        Ring::Int | Ring::IntMod(_) => "Z",
        Ring::Rational => "Q",
        Ring::DualNumbers(_) => "F[x]",
    }
}

fn residues_mod(cv: Cover, d: &Scalar) -> Option<Vec<Scalar>> {
    match (cv, d) {
        (Cover::Int, Scalar::Int(n)) => {
            use num::ToPrimitive;
            let n = n.magnitude().to_u64()?;
            Some(
                (0..n)
                    .map(|k| Scalar::Int(num::BigInt::from(k)))
                    .collect(),
            )
        }
        (Cover::Poly(p), Scalar::Poly(c)) => {
            let deg = c.len() - 1;
            let count = (p as u64).checked_pow(deg as u32)?;
            let mut res = Vec::with_capacity(count as usize);
            let mut idx = vec![0u64; deg];
            loop {
                let mut coeffs: Vec<u64> = idx.clone();
                while coeffs.last() == Some(&0) {
                    coeffs.pop();
                }
                res.push(Scalar::Poly(coeffs));
                let mut k = 0;
                loop {
                    if k == deg {
                        return Some(res);
                    }
                    idx[k] += 1;
                    if idx[k] < p {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
        _ => None,
    }
}

fn augment(ring: Ring, rels: &Mat) -> Mat {
    match ring.structural() {
        Some(s) => rels.hcat(&Mat::scalar(ring, rels.rows, &s)),
        None => rels.clone(),
    }
}

/// A morphism of finitely presented modules, given on generators.
#[derive(Clone, Debug)]
pub struct ModMap {
    pub src: FpModule,
    pub tgt: FpModule,
    pub mat: Mat,
}

impl PartialEq for ModMap {
    fn eq(&self, other: &Self) -> bool {
        if self.src != other.src || self.tgt != other.tgt {
            return false;
        }
        (0..self.mat.cols).all(|j| self.tgt.eq_el(&self.mat.col(j), &other.mat.col(j)))
    }
}

impl ModMap {
    pub fn new(src: FpModule, tgt: FpModule, mat: Mat) -> Result<ModMap, String> {
        let m = ModMap::new_unchecked(src, tgt, mat);
        if m.is_well_defined() {
            Ok(m)
        } else {
            Err("matrix does not respect the source relations".to_string())
        }
    }

    pub fn new_unchecked(src: FpModule, tgt: FpModule, mat: Mat) -> ModMap {
        assert_eq!(mat.rows, tgt.gens, "map matrix rows must match target generators");
        assert_eq!(mat.cols, src.gens, "map matrix cols must match source generators");
        ModMap {
            src,
            tgt,
            mat: mat.reduced(),
        }
    }

    pub fn zero(src: &FpModule, tgt: &FpModule) -> ModMap {
        let mat = Mat::zeros(src.ring, tgt.gens, src.gens);
        ModMap::new_unchecked(src.clone(), tgt.clone(), mat)
    }

    pub fn identity(m: &FpModule) -> ModMap {
        ModMap::new_unchecked(m.clone(), m.clone(), Mat::identity(m.ring, m.gens))
    }

    pub fn is_well_defined(&self) -> bool {
        if self.src.gens == 0 {
            return true;
        }
        let img = self.mat.mul(&self.src.aug());
        let tgt_aug = self.tgt.aug();
        solve_cover(&tgt_aug, &img).is_some()
    }

    pub fn apply(&self, x: &Mat) -> Mat {
        self.tgt.canon(&self.mat.mul(x))
    }

    pub fn compose(g: &ModMap, f: &ModMap) -> ModMap {
        assert_eq!(f.tgt, g.src, "composition shape mismatch");
        ModMap::new_unchecked(f.src.clone(), g.tgt.clone(), g.mat.mul(&f.mat))
    }

    pub fn add(&self, other: &ModMap) -> ModMap {
        ModMap::new_unchecked(self.src.clone(), self.tgt.clone(), self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &ModMap) -> ModMap {
        ModMap::new_unchecked(self.src.clone(), self.tgt.clone(), self.mat.sub(&other.mat))
    }

    pub fn neg(&self) -> ModMap {
        ModMap::new_unchecked(self.src.clone(), self.tgt.clone(), self.mat.neg())
    }

    pub fn scale(&self, s: &Scalar) -> ModMap {
        ModMap::new_unchecked(self.src.clone(), self.tgt.clone(), self.mat.scale(s))
    }

    pub fn is_zero_map(&self) -> bool {
        (0..self.mat.cols).all(|j| self.tgt.is_zero_el(&self.mat.col(j)))
    }

    /// A preimage of y under this map, if one exists.
    pub fn preimage(&self, y: &Mat) -> Option<Mat> {
        let lhs = self.mat.hcat(&self.tgt.aug());
        let sol = solve_cover(&lhs, y)?;
        Some(self.src.canon(&sol.submatrix(0, self.src.gens, 0, 1)))
    }

    pub fn in_image(&self, y: &Mat) -> bool {
        self.preimage(y).is_some()
    }

    /// Kernel with its inclusion. Zero kernels come back with the canonical
    /// zero presentation.
    pub fn kernel(&self) -> (FpModule, ModMap) {
        let big = self.mat.hcat(&self.tgt.aug());
        let full = kernel_cover(&big);
        let g = full.submatrix(0, self.src.gens, 0, full.cols);
        let rel_big = g.hcat(&self.src.aug());
        let rel_full = kernel_cover(&rel_big);
        let rels = rel_full.submatrix(0, g.cols, 0, rel_full.cols);
        let ker = FpModule::new(self.src.ring, g.cols, rels);
        if ker.is_zero_module() {
            let z = FpModule::zero(self.src.ring);
            let incl = ModMap::zero(&z, &self.src);
            return (z, incl);
        }
        let incl = ModMap::new_unchecked(ker.clone(), self.src.clone(), g);
        (ker, incl)
    }

    /// Cokernel with its projection.
    pub fn cokernel(&self) -> (FpModule, ModMap) {
        let rels = self.tgt.rels.hcat(&self.mat);
        let cok = FpModule::new(self.tgt.ring, self.tgt.gens, rels);
        if cok.is_zero_module() {
            let z = FpModule::zero(self.tgt.ring);
            let proj = ModMap::zero(&self.tgt, &z);
            return (z, proj);
        }
        let proj = ModMap::new_unchecked(
            self.tgt.clone(),
            cok.clone(),
            Mat::identity(self.tgt.ring, self.tgt.gens),
        );
        (cok, proj)
    }

    /// Image as src/ker together with src -> im and im -> tgt.
    pub fn image(&self) -> (FpModule, ModMap, ModMap) {
        let big = self.mat.hcat(&self.tgt.aug());
        let full = kernel_cover(&big);
        let lattice = full.submatrix(0, self.src.gens, 0, full.cols);
        let im = FpModule::new(self.src.ring, self.src.gens, lattice);
        if im.is_zero_module() {
            let z = FpModule::zero(self.src.ring);
            return (
                z.clone(),
                ModMap::zero(&self.src, &z),
                ModMap::zero(&z, &self.tgt),
            );
        }
        let onto = ModMap::new_unchecked(
            self.src.clone(),
            im.clone(),
            Mat::identity(self.src.ring, self.src.gens),
        );
        let into = ModMap::new_unchecked(im.clone(), self.tgt.clone(), self.mat.clone());
        (im, onto, into)
    }

    /// Kronecker product of maps, matching [`FpModule::tensor`] indexing.
    pub fn tensor(f: &ModMap, g: &ModMap) -> ModMap {
        let ring = f.src.ring;
        let src = FpModule::tensor(&f.src, &g.src);
        let tgt = FpModule::tensor(&f.tgt, &g.tgt);
        let cv = ring.cover();
        let mat = Mat::from_fn(
            ring,
            tgt.module.gens,
            src.module.gens,
            |r, c| {
                let (i, j) = (r / g.tgt.gens, r % g.tgt.gens);
                let (k, l) = (c / g.src.gens, c % g.src.gens);
                cv.mul(f.mat.at(i, k), g.mat.at(j, l))
            },
        );
        ModMap::new_unchecked(src.module, tgt.module, mat)
    }
}

/// Tensor product module with its bilinear structure.
#[derive(Clone, Debug)]
pub struct TensorModule {
    pub module: FpModule,
    pub lhs: FpModule,
    pub rhs: FpModule,
}

impl TensorModule {
    /// The pure tensor x (x) y in generator coordinates.
    pub fn pure(&self, x: &Mat, y: &Mat) -> Mat {
        let cv = self.module.ring.cover();
        let mut out = Mat::zeros(self.module.ring, self.module.gens, 1);
        for i in 0..self.lhs.gens {
            for j in 0..self.rhs.gens {
                out.set(i * self.rhs.gens + j, 0, cv.mul(x.at(i, 0), y.at(j, 0)));
            }
        }
        self.module.canon(&out)
    }
}

/// Hom-module data: the module over the base ring together with the
/// encoding between its elements and actual morphism matrices.
#[derive(Clone, Debug)]
pub struct HomModule {
    pub module: FpModule,
    pub src: FpModule,
    pub tgt: FpModule,
    l: Mat,
    w: Mat,
    dual: Option<DualDecomp>,
}

#[derive(Clone, Debug)]
struct DualDecomp {
    /// Presentation of the hom lattice as a module over the dual numbers.
    q: FpModule,
    /// For each base-field generator: (snf coordinate index, power of x).
    coords: Vec<(usize, usize)>,
}

/// Hom_R(m, n) as a module over `ring.hom_base()` with a generator list of
/// morphism matrices realizing the bijection.
pub fn hom_module(m: &FpModule, n: &FpModule) -> HomModule {
    assert_eq!(m.ring, n.ring);
    let ring = m.ring;
    let cv = ring.cover();
    let m_aug = m.aug();
    let n_aug = n.aug();
    let unknowns = n.gens * m.gens;

    // conditions: for each relation column r of m_aug, H * r in span(n_aug)
    let ncond = m_aug.cols;
    let rows = n.gens * ncond;
    let slack = n_aug.cols * ncond;
    let mut big = Mat::zeros(ring, rows, unknowns + slack);
    for c in 0..ncond {
        for i in 0..n.gens {
            let row = c * n.gens + i;
            // coefficient of H[i, k] is m_aug[k, c]
            for k in 0..m.gens {
                big.set(row, vec_idx(n.gens, i, k), m_aug.at(k, c).clone());
            }
            for s in 0..n_aug.cols {
                big.set(row, unknowns + c * n_aug.cols + s, cv.neg(n_aug.at(i, s)));
            }
        }
    }
    let full = kernel_cover(&big);
    let l = full.submatrix(0, unknowns, 0, full.cols);

    // W: matrices whose columns lie in span(n_aug)
    let mut w = Mat::zeros(ring, unknowns, m.gens * n_aug.cols);
    for k in 0..m.gens {
        for s in 0..n_aug.cols {
            for i in 0..n.gens {
                w.set(vec_idx(n.gens, i, k), k * n_aug.cols + s, n_aug.at(i, s).clone());
            }
        }
    }

    let rel_full = kernel_cover(&l.hcat(&w));
    let q_rels = rel_full.submatrix(0, l.cols, 0, rel_full.cols);

    match ring {
        Ring::DualNumbers(p) => {
            let q = FpModule::new(ring, l.cols, q_rels);
            let mut coords = Vec::new();
            for (i, d) in q.nf.divisors.iter().enumerate() {
                if cv.is_unit(d) {
                    continue;
                }
                let deg = match d {
                    Scalar::Poly(c) => c.len().saturating_sub(1),
                    _ => unreachable!(),
                };
                for pow in 0..deg {
                    coords.push((i, pow));
                }
            }
            let module = FpModule::free(Ring::IntMod(p), coords.len());
            HomModule {
                module,
                src: m.clone(),
                tgt: n.clone(),
                l,
                w,
                dual: Some(DualDecomp {
                    q,
                    coords,
                }),
            }
        }
        _ => {
            let module = FpModule::new(ring.hom_base(), l.cols, q_rels);
            HomModule {
                module,
                src: m.clone(),
                tgt: n.clone(),
                l,
                w,
                dual: None,
            }
        }
    }
}

fn vec_idx(tgt_gens: usize, i: usize, k: usize) -> usize {
    // column-major in the source index: entry H[i, k] at position k*tgt + i
    k * tgt_gens + i
}

impl HomModule {
    /// The morphism corresponding to an element of the hom module.
    pub fn decode(&self, coords: &Mat) -> ModMap {
        assert_eq!(coords.rows, self.module.gens);
        let ring = self.src.ring;
        let cv = ring.cover();
        let qcoords = match &self.dual {
            None => {
                // interpret base coords directly over the cover
                coords.clone()
            }
            Some(d) => {
                let p = match ring {
                    Ring::DualNumbers(p) => p,
                    _ => unreachable!(),
                };
                let mut snf_vec = Mat::zeros(ring, d.q.gens, 1);
                for (gi, &(i, pow)) in d.coords.iter().enumerate() {
                    let c = match coords.at(gi, 0) {
                        Scalar::Int(v) => {
                            use num::{Integer, ToPrimitive};
                            v.mod_floor(&num::BigInt::from(p)).to_u64().unwrap()
                        }
                        _ => unreachable!(),
                    };
                    if c == 0 {
                        continue;
                    }
                    let mut mono = vec![0u64; pow + 1];
                    mono[pow] = c;
                    let cur = snf_vec.at(i, 0).clone();
                    snf_vec.set(i, 0, cv.add(&cur, &Scalar::Poly(mono)));
                }
                d.q.nf.uinv.mul(&snf_vec)
            }
        };
        let vec_h = self.l.mul(&qcoords);
        let mat = Mat::from_fn(ring, self.tgt.gens, self.src.gens, |i, k| {
            vec_h.at(vec_idx(self.tgt.gens, i, k), 0).clone()
        });
        ModMap::new_unchecked(self.src.clone(), self.tgt.clone(), mat)
    }

    /// Coordinates of a morphism; None if the matrix is not a well-defined
    /// morphism.
    pub fn encode(&self, map: &ModMap) -> Option<Mat> {
        let ring = self.src.ring;
        let mut vec_h = Mat::zeros(ring, self.tgt.gens * self.src.gens, 1);
        for i in 0..self.tgt.gens {
            for k in 0..self.src.gens {
                vec_h.set(vec_idx(self.tgt.gens, i, k), 0, map.mat.at(i, k).clone());
            }
        }
        let sol = solve_cover(&self.l.hcat(&self.w), &vec_h)?;
        let qcoords = sol.submatrix(0, self.l.cols, 0, 1);
        match &self.dual {
            None => Some(self.module.canon(&qcoords)),
            Some(d) => {
                let p = match ring {
                    Ring::DualNumbers(p) => p,
                    _ => unreachable!(),
                };
                let base = Ring::IntMod(p);
                let cv = ring.cover();
                let snf_vec = d.q.nf.u.mul(&qcoords);
                let mut out = Mat::zeros(base, d.coords.len(), 1);
                for (gi, &(i, pow)) in d.coords.iter().enumerate() {
                    let di = &d.q.nf.divisors[i];
                    let red = if di.is_zero() {
                        snf_vec.at(i, 0).clone()
                    } else {
                        cv.divmod(snf_vec.at(i, 0), di).1
                    };
                    let c = match &red {
                        Scalar::Poly(cs) => cs.get(pow).copied().unwrap_or(0),
                        _ => unreachable!(),
                    };
                    out.set(gi, 0, Scalar::from_i64(c as i64, base));
                }
                Some(self.module.canon(&out))
            }
        }
    }

    /// Generator morphisms realizing the bijection.
    pub fn basis(&self) -> Vec<ModMap> {
        (0..self.module.gens)
            .map(|i| self.decode(&self.module.gen_el(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zmod(n: u64) -> Ring {
        Ring::IntMod(n)
    }

    #[test]
    fn kernel_cokernel_mult_by_two_over_z() {
        let z = FpModule::free(Ring::Int, 1);
        let two = ModMap::new(
            z.clone(),
            z.clone(),
            Mat::from_i64(Ring::Int, &[&[2]]),
        )
        .unwrap();
        let (ker, _) = two.kernel();
        assert!(ker.is_zero_module());
        let (cok, _) = two.cokernel();
        let (f, free) = cok.invariant_factors();
        assert_eq!(free, 0);
        assert_eq!(f, vec![Scalar::from_i64(2, Ring::Int)]);
    }

    #[test]
    fn kernel_identity_is_zero() {
        let m = FpModule::cyclic(zmod(4), &Scalar::from_i64(2, zmod(4)));
        let id = ModMap::identity(&m);
        let (ker, _) = id.kernel();
        assert!(ker.is_zero_module());
        let (cok, _) = id.cokernel();
        assert!(cok.is_zero_module());
    }

    #[test]
    fn kernel_cokernel_mult_by_two_mod_four() {
        let r = zmod(4);
        let m = FpModule::free(r, 1);
        let two = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let (ker, incl) = two.kernel();
        let z2 = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        assert!(ker.is_iso_to(&z2));
        let (cok, _) = two.cokernel();
        assert!(cok.is_iso_to(&z2));
        // kernel inclusion composed with the map is zero
        let comp = ModMap::compose(&two, &incl);
        assert!(comp.is_zero_map());
        // brute force: the four elements
        let elems = m.enumerate().unwrap();
        assert_eq!(elems.len(), 4);
        let killed = elems
            .iter()
            .filter(|e| m.is_zero_el(&two.mat.mul(e)))
            .count();
        assert_eq!(killed, 2);
    }

    #[test]
    fn hom_z2_z4_over_mod4() {
        let r = zmod(4);
        let z2 = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let z4 = FpModule::free(r, 1);
        let h = hom_module(&z2, &z4);
        let z2_again = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        assert!(h.module.is_iso_to(&z2_again));
        // enumerate maps 1 -> {0, 2}
        let elems = h.module.enumerate().unwrap();
        assert_eq!(elems.len(), 2);
        for e in &elems {
            let f = h.decode(e);
            assert!(f.is_well_defined());
            let back = h.encode(&f).unwrap();
            assert!(h.module.eq_el(&back, e));
        }
    }

    #[test]
    fn hom_to_zero_and_from_free() {
        let r = zmod(4);
        let m = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let zero = FpModule::zero(r);
        let h = hom_module(&m, &zero);
        assert!(h.module.is_zero_module());
        let free = FpModule::free(r, 1);
        let h2 = hom_module(&free, &m);
        assert!(h2.module.is_iso_to(&m));
    }

    #[test]
    fn hom_dual_numbers_is_prime_field_module() {
        let r = Ring::DualNumbers(2);
        let free = FpModule::free(r, 1);
        let h = hom_module(&free, &free);
        // Hom(R, R) = R which is 2-dimensional over F_2
        assert_eq!(h.module.ring, Ring::IntMod(2));
        assert_eq!(h.module.gens, 2);
        let elems = h.module.enumerate().unwrap();
        assert_eq!(elems.len(), 4);
        for e in &elems {
            let f = h.decode(e);
            let back = h.encode(&f).unwrap();
            assert!(h.module.eq_el(&back, e), "roundtrip failed for {:?}", e);
        }
    }

    #[test]
    fn image_factorization() {
        let r = zmod(4);
        let m = FpModule::free(r, 1);
        let two = ModMap::new(m.clone(), m.clone(), Mat::from_i64(r, &[&[2]])).unwrap();
        let (im, onto, into) = two.image();
        let z2 = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        assert!(im.is_iso_to(&z2));
        let comp = ModMap::compose(&into, &onto);
        assert_eq!(comp, two);
        // everything killed by the cokernel projection factors through image
        let (_, proj) = two.cokernel();
        for e in m.enumerate().unwrap() {
            if proj.tgt.is_zero_el(&proj.mat.mul(&e)) {
                assert!(into.in_image(&e));
            }
        }
    }

    #[test]
    fn tensor_pure_and_relations() {
        let r = zmod(4);
        let z2 = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let t = FpModule::tensor(&z2, &z2);
        assert!(t.module.is_iso_to(&z2));
        let e = t.pure(&z2.gen_el(0), &z2.gen_el(0));
        assert!(!t.module.is_zero_el(&e));
        let two_e = t.module.canon(&e.scale(&Scalar::from_i64(2, r)));
        assert!(two_e.is_zero());
    }

    #[test]
    fn direct_sum_biproduct_identities() {
        let r = zmod(4);
        let a = FpModule::cyclic(r, &Scalar::from_i64(2, r));
        let b = FpModule::free(r, 1);
        let (s, inj, proj) = FpModule::direct_sum(r, &[&a, &b]);
        for i in 0..2 {
            for j in 0..2 {
                let c = ModMap::compose(&proj[j], &inj[i]);
                if i == j {
                    assert_eq!(c, ModMap::identity(if i == 0 { &a } else { &b }));
                } else {
                    assert!(c.is_zero_map());
                }
            }
        }
        let total = ModMap::compose(&inj[0], &proj[0]).add(&ModMap::compose(&inj[1], &proj[1]));
        assert_eq!(total, ModMap::identity(&s));
    }

    #[test]
    fn rational_modules_are_vector_spaces() {
        let q = Ring::Rational;
        let m = FpModule::new(q, 2, Mat::from_i64(q, &[&[2], &[4]]));
        let (f, free) = m.invariant_factors();
        assert!(f.is_empty());
        assert_eq!(free, 1);
    }
}
