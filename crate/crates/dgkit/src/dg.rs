//! Finite dg categories with verified axioms, their homotopy and graded
//! shadows, opposites and dg functors.
//!
//! A category is materialized: a finite object list, one hom complex per
//! ordered pair, unit elements, and composition given by structure
//! constants on the chosen generators. Categories of complexes fill the
//! table from actual composition; constructions (twisted complexes,
//! quotients, pullbacks) fill it from their defining formulas.

use crate::complex::{ChainMap, Complex, El};
use crate::homcx::{hom_complex, HomComplex};
use crate::mat::Mat;
use crate::module::{FpModule, ModMap};
use crate::ring::Ring;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DgError {
    #[error("object index out of range")]
    BadObject,
    #[error("degree {0} out of range for this hom complex")]
    BadDegree(i64),
    #[error("Maurer-Cartan equation fails: {0}")]
    MaurerCartanViolation(String),
    #[error("idempotent is not strict: e^2 != e")]
    NotStrictIdempotent,
    #[error("composition would exceed the word-length cap and no overflow policy was set")]
    CapOverflowPolicyRequired,
    #[error("the square of functors does not commute strictly: {0}")]
    SquareNotStrictlyCommutative(String),
    #[error("cover size {0} not supported (1..=3)")]
    UnsupportedCoverSize(usize),
    #[error("setup violated: {0}")]
    SetupViolated(String),
    #[error("enumeration is infinite; supply explicit data instead")]
    InfiniteEnumeration,
    #[error("{0}")]
    Other(String),
}

/// Composition table: for (x, y, z) and generator degrees (p, q), the
/// element coordinates of gen_i(hom(y,z)^p) o gen_j(hom(x,y)^q).
pub type CompTable = BTreeMap<(usize, usize, usize), BTreeMap<(i64, i64), Vec<Vec<Mat>>>>;

/// A finite dg category with structure-constant composition.
#[derive(Clone)]
pub struct DgCat {
    pub ring: Ring,
    pub objects: Vec<String>,
    homs: Vec<Complex>,
    units: Vec<El>,
    comp: CompTable,
}

impl fmt::Debug for DgCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DgCat({} objects over {})", self.objects.len(), self.ring)
    }
}

impl PartialEq for DgCat {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.objects == other.objects
            && self.homs == other.homs
            && self.units.iter().zip(&other.units).all(|(a, b)| a.v == b.v && a.deg == b.deg)
            && self.comp == other.comp
    }
}

impl DgCat {
    pub fn from_parts(
        ring: Ring,
        objects: Vec<String>,
        homs: Vec<Complex>,
        units: Vec<El>,
        comp: CompTable,
    ) -> Result<DgCat, DgError> {
        let n = objects.len();
        if homs.len() != n * n || units.len() != n {
            return Err(DgError::Other("hom/unit table sizes do not match".into()));
        }
        for c in &homs {
            if c.ring != ring {
                return Err(DgError::Other("hom complex over the wrong base ring".into()));
            }
        }
        let cat = DgCat {
            ring,
            objects,
            homs,
            units,
            comp,
        };
        for x in 0..n {
            let u = &cat.units[x];
            if u.deg != 0 {
                return Err(DgError::Other(format!("unit of {} has nonzero degree", cat.objects[x])));
            }
            if u.v.rows != cat.hom(x, x).term(0).gens {
                return Err(DgError::Other(format!("unit of {} has wrong shape", cat.objects[x])));
            }
        }
        Ok(cat)
    }

    /// The dg category of complexes on the given objects: homs are hom
    /// complexes, composition is actual composition.
    pub fn concrete(module_ring: Ring, objects: Vec<(String, Complex)>) -> Result<DgCat, DgError> {
        let base = module_ring.hom_base();
        let n = objects.len();
        let mut hcs: Vec<HomComplex> = Vec::with_capacity(n * n);
        for (_, cx) in &objects {
            if cx.ring != module_ring {
                return Err(DgError::Other("complex over the wrong ring".into()));
            }
        }
        for x in 0..n {
            for y in 0..n {
                hcs.push(hom_complex(&objects[x].1, &objects[y].1));
            }
        }
        let homs: Vec<Complex> = hcs.iter().map(|h| h.cx.clone()).collect();
        let mut units = Vec::new();
        for x in 0..n {
            let hc = &hcs[x * n + x];
            let u = hc
                .encode_chainmap(&ChainMap::identity(&objects[x].1))
                .ok_or_else(|| DgError::Other("identity fails to encode".into()))?;
            units.push(u);
        }
        let mut comp: CompTable = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let hom_xy = &hcs[x * n + y];
                    let hom_yz = &hcs[y * n + z];
                    let hom_xz = &hcs[x * n + z];
                    let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                    for p in hom_yz.cx.support() {
                        for q in hom_xy.cx.support() {
                            let gp = hom_yz.cx.term(p).gens;
                            let gq = hom_xy.cx.term(q).gens;
                            if gp == 0 || gq == 0 {
                                continue;
                            }
                            let mut table = Vec::with_capacity(gp);
                            for i in 0..gp {
                                let gi = El {
                                    deg: p,
                                    v: hom_yz.cx.term(p).gen_el(i),
                                };
                                let mut row = Vec::with_capacity(gq);
                                for j in 0..gq {
                                    let fj = El {
                                        deg: q,
                                        v: hom_xy.cx.term(q).gen_el(j),
                                    };
                                    let prod =
                                        HomComplex::compose_el(hom_yz, &gi, hom_xy, &fj, hom_xz);
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
        DgCat::from_parts(
            base,
            objects.into_iter().map(|(n, _)| n).collect(),
            homs,
            units,
            comp,
        )
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn hom(&self, x: usize, y: usize) -> &Complex {
        &self.homs[x * self.objects.len() + y]
    }

    pub fn unit(&self, x: usize) -> El {
        self.units[x].clone()
    }

    pub fn zero_el(&self, x: usize, y: usize, deg: i64) -> El {
        self.hom(x, y).zero_el(deg)
    }

    /// Bilinear composition through the structure constants.
    pub fn compose(&self, x: usize, y: usize, z: usize, g: &El, f: &El) -> El {
        let cv = self.ring.cover();
        let out_deg = g.deg + f.deg;
        let out_term = self.hom(x, z).term(out_deg);
        let mut acc = Mat::zeros(self.ring, out_term.gens, 1);
        if let Some(degs) = self.comp.get(&(x, y, z)) {
            if let Some(table) = degs.get(&(g.deg, f.deg)) {
                for (i, row) in table.iter().enumerate() {
                    let gi = g.v.at(i, 0);
                    if gi.is_zero() {
                        continue;
                    }
                    for (j, cell) in row.iter().enumerate() {
                        let fj = f.v.at(j, 0);
                        if fj.is_zero() {
                            continue;
                        }
                        let c = cv.mul(gi, fj);
                        acc = acc.add(&cell.scale(&c));
                    }
                }
            }
        }
        El {
            deg: out_deg,
            v: out_term.canon(&acc),
        }
    }

    pub fn d_el(&self, x: usize, y: usize, e: &El) -> El {
        let h = self.hom(x, y);
        El {
            deg: e.deg + 1,
            v: h.diff(e.deg).apply(&e.v),
        }
    }

    pub fn is_closed_el(&self, x: usize, y: usize, e: &El) -> bool {
        let d = self.d_el(x, y, e);
        self.hom(x, y).term(d.deg).is_zero_el(&d.v)
    }

    pub fn eq_el(&self, x: usize, y: usize, a: &El, b: &El) -> bool {
        a.deg == b.deg && self.hom(x, y).term(a.deg).eq_el(&a.v, &b.v)
    }

    pub fn is_zero_el(&self, x: usize, y: usize, e: &El) -> bool {
        self.hom(x, y).term(e.deg).is_zero_el(&e.v)
    }

    /// Left composition with a fixed element as a module map
    /// hom(x,y)^q -> hom(x,z)^{q + |g|}.
    pub fn compose_left_map(&self, x: usize, y: usize, z: usize, g: &El, q: i64) -> ModMap {
        let src = self.hom(x, y).term(q);
        let tgt = self.hom(x, z).term(q + g.deg);
        let mut mat = Mat::zeros(self.ring, tgt.gens, src.gens);
        for j in 0..src.gens {
            let f = El {
                deg: q,
                v: src.gen_el(j),
            };
            let prod = self.compose(x, y, z, g, &f);
            for i in 0..tgt.gens {
                mat.set(i, j, prod.v.at(i, 0).clone());
            }
        }
        ModMap::new_unchecked(src, tgt, mat)
    }

    /// Right composition with a fixed element as a module map
    /// hom(y,z)^p -> hom(x,z)^{p + |f|}.
    pub fn compose_right_map(&self, x: usize, y: usize, z: usize, f: &El, p: i64) -> ModMap {
        let src = self.hom(y, z).term(p);
        let tgt = self.hom(x, z).term(p + f.deg);
        let mut mat = Mat::zeros(self.ring, tgt.gens, src.gens);
        for i in 0..src.gens {
            let g = El {
                deg: p,
                v: src.gen_el(i),
            };
            let prod = self.compose(x, y, z, &g, f);
            for r in 0..tgt.gens {
                mat.set(r, i, prod.v.at(r, 0).clone());
            }
        }
        ModMap::new_unchecked(src, tgt, mat)
    }

    /// Verify all dg category axioms on spanning sets. The report lists
    /// every violation with a witness.
    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.objects.len();
        let cv = self.ring.cover();
        let mut violations = Vec::new();
        // d^2 = 0 (re-checked even though Complex::new enforces it)
        for x in 0..n {
            for y in 0..n {
                let h = self.hom(x, y);
                for d in h.support() {
                    let dd = ModMap::compose(&h.diff(d + 1), &h.diff(d));
                    if !dd.is_zero_map() {
                        violations.push(AxiomViolation::DifferentialSquare { x, y, degree: d });
                    }
                }
            }
        }
        // units closed and of degree 0, unit laws
        for x in 0..n {
            if !self.is_closed_el(x, x, &self.units[x]) {
                violations.push(AxiomViolation::UnitNotClosed { x });
            }
        }
        for x in 0..n {
            for y in 0..n {
                let h = self.hom(x, y);
                for q in h.support() {
                    let t = h.term(q);
                    for j in 0..t.gens {
                        let f = El {
                            deg: q,
                            v: t.gen_el(j),
                        };
                        let left = self.compose(x, y, y, &self.units[y], &f);
                        let right = self.compose(x, x, y, &f, &self.units[x]);
                        if !self.eq_el(x, y, &left, &f) || !self.eq_el(x, y, &right, &f) {
                            violations.push(AxiomViolation::UnitLaw { x, y, degree: q, gen: j });
                        }
                    }
                }
            }
        }
        // composition respects the relations of the generator modules
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let hom_xy = self.hom(x, y);
                    let hom_yz = self.hom(y, z);
                    for p in hom_yz.support() {
                        let tp = hom_yz.term(p);
                        for q in hom_xy.support() {
                            let tq = hom_xy.term(q);
                            for rc in 0..tp.rels.cols {
                                let rel = El {
                                    deg: p,
                                    v: tp.rels.col(rc),
                                };
                                for j in 0..tq.gens {
                                    let f = El {
                                        deg: q,
                                        v: tq.gen_el(j),
                                    };
                                    let prod = self.compose(x, y, z, &rel, &f);
                                    if !self.is_zero_el(x, z, &prod) {
                                        violations.push(AxiomViolation::RelationCompatibility {
                                            x,
                                            y,
                                            z,
                                            degrees: (p, q),
                                        });
                                    }
                                }
                            }
                            for rc in 0..tq.rels.cols {
                                let rel = El {
                                    deg: q,
                                    v: tq.rels.col(rc),
                                };
                                for i in 0..tp.gens {
                                    let g = El {
                                        deg: p,
                                        v: tp.gen_el(i),
                                    };
                                    let prod = self.compose(x, y, z, &g, &rel);
                                    if !self.is_zero_el(x, z, &prod) {
                                        violations.push(AxiomViolation::RelationCompatibility {
                                            x,
                                            y,
                                            z,
                                            degrees: (p, q),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // Leibniz on generator pairs
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let hom_xy = self.hom(x, y);
                    let hom_yz = self.hom(y, z);
                    for p in hom_yz.support() {
                        let tp = hom_yz.term(p);
                        for q in hom_xy.support() {
                            let tq = hom_xy.term(q);
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
                                    let lhs = self.d_el(x, z, &self.compose(x, y, z, &g, &f));
                                    let mut rhs =
                                        self.compose(x, y, z, &self.d_el(y, z, &g), &f);
                                    let mut second =
                                        self.compose(x, y, z, &g, &self.d_el(x, y, &f));
                                    if p.rem_euclid(2) == 1 {
                                        second = El {
                                            deg: second.deg,
                                            v: second.v.neg(),
                                        };
                                    }
                                    rhs = El {
                                        deg: rhs.deg,
                                        v: rhs.v.add(&second.v),
                                    };
                                    if !self.eq_el(x, z, &lhs, &rhs) {
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
        // associativity on generator triples
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let hom_wx = self.hom(w, x);
                        let hom_xy = self.hom(x, y);
                        let hom_yz = self.hom(y, z);
                        for p in hom_yz.support() {
                            let tp = hom_yz.term(p);
                            for q in hom_xy.support() {
                                let tq = hom_xy.term(q);
                                for r in hom_wx.support() {
                                    let tr = hom_wx.term(r);
                                    for i in 0..tp.gens {
                                        let h = El {
                                            deg: p,
                                            v: tp.gen_el(i),
                                        };
                                        for j in 0..tq.gens {
                                            let g = El {
                                                deg: q,
                                                v: tq.gen_el(j),
                                            };
                                            for k in 0..tr.gens {
                                                let f = El {
                                                    deg: r,
                                                    v: tr.gen_el(k),
                                                };
                                                let hg = self.compose(x, y, z, &h, &g);
                                                let left =
                                                    self.compose(w, x, z, &hg, &f);
                                                let gf = self.compose(w, x, y, &g, &f);
                                                let right =
                                                    self.compose(w, y, z, &h, &gf);
                                                if !self.eq_el(w, z, &left, &right) {
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
        let _ = cv;
        AxiomReport { violations }
    }

    /// The homotopy category: H^0 hom modules with induced composition.
    pub fn h0(&self) -> H0Cat {
        let n = self.objects.len();
        let mut data = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                data.push(self.hom(x, y).cohomology_at(0));
            }
        }
        H0Cat {
            cat: self.clone(),
            data,
        }
    }

    /// The graded category: H^n hom modules for every degree in the hom
    /// supports.
    pub fn hgr(&self) -> Vec<((usize, usize, i64), FpModule)> {
        let n = self.objects.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for d in self.hom(x, y).support() {
                    out.push(((x, y, d), self.hom(x, y).cohomology(d)));
                }
            }
        }
        out
    }

    /// Opposite category: f o^op g = (-1)^{|f||g|} g o f; the double
    /// opposite is the identity on the nose.
    pub fn opposite(&self) -> DgCat {
        let n = self.objects.len();
        let cv = self.ring.cover();
        let mut homs = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                homs.push(self.hom(y, x).clone());
            }
        }
        let mut comp: CompTable = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    // op-compose hom_op(y,z)^p x hom_op(x,y)^q: g: z->y, f: y->x
                    let hom_zy = self.hom(z, y);
                    let hom_yx = self.hom(y, x);
                    let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                    for p in hom_zy.support() {
                        let tp = hom_zy.term(p);
                        for q in hom_yx.support() {
                            let tq = hom_yx.term(q);
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
                                    // original composition f o g in hom(z, x)
                                    let mut prod = self.compose(z, y, x, &f, &g);
                                    if (p * q).rem_euclid(2) == 1 {
                                        prod.v = prod.v.neg();
                                    }
                                    let t = self.hom(z, x).term(p + q);
                                    prod.v = t.canon(&prod.v);
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
        let _ = cv;
        DgCat {
            ring: self.ring,
            objects: self.objects.clone(),
            homs,
            units: self.units.clone(),
            comp,
        }
    }
}

/// A violation found by the axiom checker, with its witness data.
#[derive(Clone, Debug, PartialEq)]
pub enum AxiomViolation {
    DifferentialSquare { x: usize, y: usize, degree: i64 },
    UnitNotClosed { x: usize },
    UnitLaw { x: usize, y: usize, degree: i64, gen: usize },
    RelationCompatibility { x: usize, y: usize, z: usize, degrees: (i64, i64) },
    Leibniz { x: usize, y: usize, z: usize, degrees: (i64, i64), gens: (usize, usize) },
    Associativity { objects: (usize, usize, usize, usize), degrees: (i64, i64, i64), gens: (usize, usize, usize) },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::DifferentialSquare { x, y, degree } => {
                write!(f, "d^2 != 0 on hom({}, {}) at degree {}", x, y, degree)
            }
            AxiomViolation::UnitNotClosed { x } => write!(f, "unit of object {} is not closed", x),
            AxiomViolation::UnitLaw { x, y, degree, gen } => {
                write!(f, "unit law fails on hom({}, {}) degree {} generator {}", x, y, degree, gen)
            }
            AxiomViolation::RelationCompatibility { x, y, z, degrees } => write!(
                f,
                "composition not well-defined modulo relations on ({}, {}, {}) at degrees {:?}",
                x, y, z, degrees
            ),
            AxiomViolation::Leibniz { x, y, z, degrees, gens } => write!(
                f,
                "Leibniz fails on ({}, {}, {}) degrees {:?} generators {:?}",
                x, y, z, degrees, gens
            ),
            AxiomViolation::Associativity { objects, degrees, gens } => write!(
                f,
                "associativity fails on {:?} degrees {:?} generators {:?}",
                objects, degrees, gens
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The homotopy category of a dg category: same objects, H^0 hom modules,
/// induced composition.
pub struct H0Cat {
    cat: DgCat,
    data: Vec<crate::complex::CohomologyAt>,
}

impl H0Cat {
    fn idx(&self, x: usize, y: usize) -> usize {
        x * self.cat.objects.len() + y
    }

    pub fn hom(&self, x: usize, y: usize) -> &FpModule {
        &self.data[self.idx(x, y)].module
    }

    pub fn rep(&self, x: usize, y: usize, class: &Mat) -> El {
        El {
            deg: 0,
            v: self.data[self.idx(x, y)].rep(class),
        }
    }

    pub fn classify(&self, x: usize, y: usize, cocycle: &El) -> Option<Mat> {
        assert_eq!(cocycle.deg, 0);
        self.data[self.idx(x, y)].classify(&cocycle.v)
    }

    pub fn compose(&self, x: usize, y: usize, z: usize, g: &Mat, f: &Mat) -> Mat {
        let ge = self.rep(y, z, g);
        let fe = self.rep(x, y, f);
        let prod = self.cat.compose(x, y, z, &ge, &fe);
        self.classify(x, z, &prod)
            .expect("composition of cycles is a cycle")
    }

    pub fn unit_class(&self, x: usize) -> Mat {
        self.classify(x, x, &self.cat.unit(x))
            .expect("unit is a cycle")
    }

    /// Check that boundaries compose to boundaries on a spanning set, so the
    /// induced composition is well-defined.
    pub fn composition_well_defined(&self) -> bool {
        let n = self.cat.objects.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let h_xy = self.cat.hom(x, y);
                    let h_yz = self.cat.hom(y, z);
                    // boundary generators of degree 0 on either side against
                    // cycle generators on the other
                    let bd_xy = h_xy.diff(-1);
                    let bd_yz = h_yz.diff(-1);
                    for j in 0..bd_xy.src.gens {
                        let b = El {
                            deg: 0,
                            v: bd_xy.apply(&bd_xy.src.gen_el(j)),
                        };
                        for i in 0..self.hom(y, z).gens {
                            let g = self.rep(y, z, &self.hom(y, z).gen_el(i));
                            let prod = self.cat.compose(x, y, z, &g, &b);
                            match self.classify(x, z, &prod) {
                                Some(c) if self.hom(x, z).is_zero_el(&c) => {}
                                _ => return false,
                            }
                        }
                    }
                    for i in 0..bd_yz.src.gens {
                        let b = El {
                            deg: 0,
                            v: bd_yz.apply(&bd_yz.src.gen_el(i)),
                        };
                        for j in 0..self.hom(x, y).gens {
                            let f = self.rep(x, y, &self.hom(x, y).gen_el(j));
                            let prod = self.cat.compose(x, y, z, &b, &f);
                            match self.classify(x, z, &prod) {
                                Some(c) if self.hom(x, z).is_zero_el(&c) => {}
                                _ => return false,
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Search for an isomorphism class pair witnessing x ~ y in H^0.
    /// None if no pair of classes composes to units both ways; Err on
    /// infinite hom modules.
    pub fn iso_witness(&self, x: usize, y: usize) -> Result<Option<(Mat, Mat)>, DgError> {
        let fwd = self
            .hom(x, y)
            .enumerate()
            .ok_or(DgError::InfiniteEnumeration)?;
        let bwd = self
            .hom(y, x)
            .enumerate()
            .ok_or(DgError::InfiniteEnumeration)?;
        let ux = self.unit_class(x);
        let uy = self.unit_class(y);
        for u in &fwd {
            for v in &bwd {
                let vu = self.compose(x, y, x, v, u);
                let uv = self.compose(y, x, y, u, v);
                if self.hom(x, x).eq_el(&vu, &ux) && self.hom(y, y).eq_el(&uv, &uy) {
                    return Ok(Some((u.clone(), v.clone())));
                }
            }
        }
        Ok(None)
    }
}

/// A dg functor between materialized categories.
#[derive(Clone)]
pub struct DgFunctor {
    pub src: Arc<DgCat>,
    pub tgt: Arc<DgCat>,
    pub obj_map: Vec<usize>,
    /// Chain maps hom_src(x, y) -> hom_tgt(F x, F y).
    pub hom_maps: BTreeMap<(usize, usize), ChainMap>,
}

impl DgFunctor {
    pub fn identity(cat: &Arc<DgCat>) -> DgFunctor {
        let n = cat.objects.len();
        let mut hom_maps = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                hom_maps.insert((x, y), ChainMap::identity(cat.hom(x, y)));
            }
        }
        DgFunctor {
            src: cat.clone(),
            tgt: cat.clone(),
            obj_map: (0..n).collect(),
            hom_maps,
        }
    }

    pub fn apply_obj(&self, x: usize) -> usize {
        self.obj_map[x]
    }

    pub fn apply_el(&self, x: usize, y: usize, e: &El) -> El {
        let m = &self.hom_maps[&(x, y)];
        m.apply_el(e)
    }

    pub fn compose(g: &DgFunctor, f: &DgFunctor) -> DgFunctor {
        assert!(Arc::ptr_eq(&f.tgt, &g.src) || *f.tgt == *g.src);
        let obj_map = f.obj_map.iter().map(|&x| g.obj_map[x]).collect();
        let mut hom_maps = BTreeMap::new();
        for ((x, y), m) in &f.hom_maps {
            let gm = &g.hom_maps[&(f.obj_map[*x], f.obj_map[*y])];
            hom_maps.insert((*x, *y), ChainMap::compose(gm, m));
        }
        DgFunctor {
            src: f.src.clone(),
            tgt: g.tgt.clone(),
            obj_map,
            hom_maps,
        }
    }

    /// Exact functor laws: components are closed chain maps preserving
    /// units and composition on generators.
    pub fn validate(&self) -> Result<(), DgError> {
        let n = self.src.objects.len();
        if self.obj_map.len() != n {
            return Err(DgError::Other("object map has wrong length".into()));
        }
        for x in 0..n {
            for y in 0..n {
                let m = self
                    .hom_maps
                    .get(&(x, y))
                    .ok_or_else(|| DgError::Other(format!("missing hom map ({}, {})", x, y)))?;
                if m.degree != 0 {
                    return Err(DgError::Other("hom map must have degree 0".into()));
                }
                if m.src != *self.src.hom(x, y)
                    || m.tgt != *self.tgt.hom(self.obj_map[x], self.obj_map[y])
                {
                    return Err(DgError::Other(format!(
                        "hom map endpoints wrong at ({}, {})",
                        x, y
                    )));
                }
                if let Some(d) = m.closedness_failure() {
                    return Err(DgError::Other(format!(
                        "hom map ({}, {}) is not a chain map at degree {}",
                        x, y, d
                    )));
                }
            }
        }
        for x in 0..n {
            let fu = self.apply_el(x, x, &self.src.unit(x));
            let u = self.tgt.unit(self.obj_map[x]);
            if !self.tgt.eq_el(self.obj_map[x], self.obj_map[x], &fu, &u) {
                return Err(DgError::Other(format!(
                    "unit of {} is not preserved",
                    self.src.objects[x]
                )));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let hom_xy = self.src.hom(x, y);
                    let hom_yz = self.src.hom(y, z);
                    for p in hom_yz.support() {
                        let tp = hom_yz.term(p);
                        for q in hom_xy.support() {
                            let tq = hom_xy.term(q);
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
                                    let lhs = self.apply_el(x, z, &self.src.compose(x, y, z, &g, &f));
                                    let rhs = self.tgt.compose(
                                        self.obj_map[x],
                                        self.obj_map[y],
                                        self.obj_map[z],
                                        &self.apply_el(y, z, &g),
                                        &self.apply_el(x, y, &f),
                                    );
                                    if !self.tgt.eq_el(self.obj_map[x], self.obj_map[z], &lhs, &rhs)
                                    {
                                        return Err(DgError::Other(format!(
                                            "composition not preserved at ({}, {}, {})",
                                            x, y, z
                                        )));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A tabular one-object category with hom = base ring in degree 0.
pub fn point_category(ring: Ring, name: &str) -> DgCat {
    let m = FpModule::free(ring, 1);
    let hom = Complex::concentrated(ring, 0, m.clone());
    let unit = El {
        deg: 0,
        v: m.gen_el(0),
    };
    let mut comp: CompTable = BTreeMap::new();
    let mut degs = BTreeMap::new();
    degs.insert((0i64, 0i64), vec![vec![{
        let mut v = Mat::zeros(ring, 1, 1);
        v.set(0, 0, ring.cover().one());
        v
    }]]);
    comp.insert((0, 0, 0), degs);
    DgCat::from_parts(ring, vec![name.to_string()], vec![hom], vec![unit], comp).unwrap()
}

/// Scale one entry of one composition table; for negative axiom controls.
pub fn corrupt_composition_sign(cat: &DgCat, x: usize, y: usize, z: usize) -> DgCat {
    let mut out = cat.clone();
    if let Some(degs) = out.comp.get_mut(&(x, y, z)) {
        'outer: for (_, table) in degs.iter_mut() {
            for row in table.iter_mut() {
                for cell in row.iter_mut() {
                    if !cell.is_zero() {
                        *cell = cell.neg();
                        break 'outer;
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
    use crate::ring::Scalar;

    fn window(ring: Ring, len: usize, step: i64) -> Complex {
        let m = FpModule::free(ring, 1);
        let d = ModMap::new(m.clone(), m.clone(), Mat::from_i64(ring, &[&[step]])).unwrap();
        Complex::new(ring, 0, vec![m; len], vec![d; len - 1]).unwrap()
    }

    #[test]
    fn concrete_category_passes_axioms() {
        let r = Ring::IntMod(4);
        let c1 = window(r, 2, 2);
        let c2 = Complex::concentrated(r, 0, FpModule::cyclic(r, &Scalar::from_i64(2, r)));
        let cat = DgCat::concrete(r, vec![("A".into(), c1), ("B".into(), c2)]).unwrap();
        let report = cat.check_axioms();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn point_category_passes_and_h0_is_ring() {
        let cat = point_category(Ring::IntMod(2), "k");
        assert!(cat.check_axioms().passed());
        let h0 = cat.h0();
        assert_eq!(h0.hom(0, 0).cardinality(), Some(2));
        assert!(h0.composition_well_defined());
    }

    #[test]
    fn corrupted_sign_fails_axioms() {
        let r = Ring::IntMod(3);
        let c = window(r, 2, 1);
        let cat = DgCat::concrete(r, vec![("A".into(), c)]).unwrap();
        let bad = corrupt_composition_sign(&cat, 0, 0, 0);
        let report = bad.check_axioms();
        assert!(!report.passed());
    }

    #[test]
    fn h0_matches_homotopy_class_enumeration() {
        // mod 2 concrete category: H^0 hom counts = chain homotopy classes
        let r = Ring::IntMod(2);
        let c = window(r, 2, 0);
        let cat = DgCat::concrete(r, vec![("A".into(), c.clone())]).unwrap();
        let h0 = cat.h0();
        // brute force: chain maps c -> c mod homotopy
        let hc = hom_complex(&c, &c);
        let z0 = hc.cx.cohomology(0);
        assert!(h0.hom(0, 0).is_iso_to(&z0));
    }

    #[test]
    fn opposite_involution_and_h0() {
        let r = Ring::IntMod(4);
        let c1 = window(r, 2, 2);
        let c2 = window(r, 2, 1);
        let cat = DgCat::concrete(r, vec![("A".into(), c1), ("B".into(), c2)]).unwrap();
        let op = cat.opposite();
        assert!(op.check_axioms().passed());
        let opop = op.opposite();
        assert_eq!(cat, opop);
        // H0(op) homs are H0 homs with swapped endpoints
        let h0 = cat.h0();
        let h0op = op.h0();
        assert!(h0.hom(0, 1).is_iso_to(h0op.hom(1, 0)));
        assert!(h0.hom(1, 0).is_iso_to(h0op.hom(0, 1)));
    }

    #[test]
    fn identity_functor_validates() {
        let r = Ring::IntMod(2);
        let c = window(r, 2, 0);
        let cat = Arc::new(DgCat::concrete(r, vec![("A".into(), c)]).unwrap());
        let f = DgFunctor::identity(&cat);
        assert!(f.validate().is_ok());
    }

    #[test]
    fn h0_iso_witness_search() {
        let r = Ring::IntMod(2);
        let a = window(r, 2, 0);
        let cat = Arc::new(
            DgCat::concrete(r, vec![("A".into(), a.clone()), ("A2".into(), a)]).unwrap(),
        );
        let h0 = cat.h0();
        let w = h0.iso_witness(0, 1).unwrap();
        assert!(w.is_some());
    }
}
