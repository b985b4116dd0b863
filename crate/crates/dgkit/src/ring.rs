//! Coefficient rings and exact scalar arithmetic over their Euclidean covers.
//!
//! Every supported ring is presented over a Euclidean cover: the integers for
//! `Int` and `IntMod(n)`, univariate polynomials over the prime field for
//! `DualNumbers(p)`, and the rationals for `Rational` (a field, so it is its
//! own cover). Linear algebra happens in the cover; quotient structure enters
//! through an extra "structural relation" appended to module presentations.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::fmt;

/// A scalar in the Euclidean cover of a [`Ring`].
///
/// `Poly` coefficients are reduced mod p, stored low degree first, trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Int(BigInt),
    Rat(BigRational),
    Poly(Vec<u64>),
}

impl Scalar {
    pub fn from_i64(v: i64, ring: Ring) -> Scalar {
        match ring.cover() {
            Cover::Int => Scalar::Int(BigInt::from(v)),
            Cover::Rat => Scalar::Rat(BigRational::from(BigInt::from(v))),
            Cover::Poly(p) => {
                let r = v.rem_euclid(p as i64) as u64;
                if r == 0 {
                    Scalar::Poly(vec![])
                } else {
                    Scalar::Poly(vec![r])
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Int(a) => a.is_zero(),
            Scalar::Rat(a) => a.is_zero(),
            Scalar::Poly(c) => c.is_empty(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Int(a) => a.is_one(),
            Scalar::Rat(a) => a.is_one(),
            Scalar::Poly(c) => c.len() == 1 && c[0] == 1,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(a) => write!(f, "{}", a),
            Scalar::Rat(a) => {
                if a.denom().is_one() {
                    write!(f, "{}", a.numer())
                } else {
                    write!(f, "{}/{}", a.numer(), a.denom())
                }
            }
            Scalar::Poly(c) => {
                if c.is_empty() {
                    return write!(f, "0");
                }
                let mut parts = Vec::new();
                for (i, &a) in c.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    let s = match i {
                        0 => format!("{}", a),
                        1 => {
                            if a == 1 {
                                "x".to_string()
                            } else {
                                format!("{}x", a)
                            }
                        }
                        _ => {
                            if a == 1 {
                                format!("x^{}", i)
                            } else {
                                format!("{}x^{}", a, i)
                            }
                        }
                    };
                    parts.push(s);
                }
                write!(f, "{}", parts.join("+"))
            }
        }
    }
}

/// Descriptor of a supported coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    /// The integers.
    Int,
    /// Integers mod n, n >= 2.
    IntMod(u64),
    /// The rationals.
    Rational,
    /// F_p[x]/(x^2) for a prime p.
    DualNumbers(u64),
}

/// The Euclidean cover a ring is presented over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cover {
    Int,
    Rat,
    Poly(u64),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("ring has no Euclidean cover path for this operation")]
    UnsupportedRing,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid ring parameter: {0}")]
    InvalidParameter(String),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Ring {
    pub fn validate(self) -> Result<(), RingError> {
        match self {
            Ring::IntMod(n) if n < 2 => {
                Err(RingError::InvalidParameter(format!("modulus {} < 2", n)))
            }
            Ring::DualNumbers(p) if !is_prime(p) => {
                Err(RingError::InvalidParameter(format!("{} is not prime", p)))
            }
            _ => Ok(()),
        }
    }

    pub fn cover(self) -> Cover {
        match self {
            Ring::Int | Ring::IntMod(_) => Cover::Int,
            Ring::Rational => Cover::Rat,
            Ring::DualNumbers(p) => Cover::Poly(p),
        }
    }

    /// The ring the Hom-modules live over: the prime field for dual numbers,
    /// the ring itself otherwise.
    pub fn hom_base(self) -> Ring {
        match self {
            Ring::DualNumbers(p) => Ring::IntMod(p),
            r => r,
        }
    }

    /// The quotient relation, as an element of the cover (None for Int and Q).
    pub fn structural(self) -> Option<Scalar> {
        match self {
            Ring::Int | Ring::Rational => None,
            Ring::IntMod(n) => Some(Scalar::Int(BigInt::from(n))),
            Ring::DualNumbers(_) => Some(Scalar::Poly(vec![0, 0, 1])),
        }
    }

    /// Number of elements, if finite.
    pub fn cardinality(self) -> Option<u64> {
        match self {
            Ring::Int | Ring::Rational => None,
            Ring::IntMod(n) => Some(n),
            Ring::DualNumbers(p) => Some(p * p),
        }
    }

    pub fn is_field(self) -> bool {
        matches!(self, Ring::Rational) || matches!(self, Ring::IntMod(n) if is_prime(n))
    }

    pub fn zero(self) -> Scalar {
        Scalar::from_i64(0, self)
    }

    pub fn one(self) -> Scalar {
        Scalar::from_i64(1, self)
    }

    /// Canonical representative modulo the structural relation.
    pub fn reduce(self, s: &Scalar) -> Scalar {
        match (self, s) {
            (Ring::IntMod(n), Scalar::Int(a)) => {
                Scalar::Int(a.mod_floor(&BigInt::from(n)))
            }
            (Ring::DualNumbers(_), Scalar::Poly(c)) => {
                let mut c = c.clone();
                c.truncate(2);
                trim(&mut c);
                Scalar::Poly(c)
            }
            _ => s.clone(),
        }
    }

    pub fn add(self, a: &Scalar, b: &Scalar) -> Scalar {
        self.cover().add(a, b)
    }

    pub fn sub(self, a: &Scalar, b: &Scalar) -> Scalar {
        self.cover().sub(a, b)
    }

    pub fn mul(self, a: &Scalar, b: &Scalar) -> Scalar {
        self.cover().mul(a, b)
    }

    pub fn neg(self, a: &Scalar) -> Scalar {
        self.cover().neg(a)
    }

    /// Residue classes of the cover modulo the structural relation; `None`
    /// when that set is infinite.
    pub fn residues(self) -> Option<Vec<Scalar>> {
        match self {
            Ring::IntMod(n) => Some((0..n).map(|k| Scalar::Int(BigInt::from(k))).collect()),
            Ring::DualNumbers(p) => {
                let mut out = Vec::new();
                for b in 0..p {
                    for a in 0..p {
                        let mut c = vec![a, b];
                        trim(&mut c);
                        out.push(Scalar::Poly(c));
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Int => write!(f, "Z"),
            Ring::IntMod(n) => write!(f, "Z/{}", n),
            Ring::Rational => write!(f, "Q"),
            Ring::DualNumbers(p) => write!(f, "F{}[e]", p),
        }
    }
}

fn trim(c: &mut Vec<u64>) {
    while c.last() == Some(&0) {
        c.pop();
    }
}

fn pmod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    result
}

impl Cover {
    pub fn zero(self) -> Scalar {
        match self {
            Cover::Int => Scalar::Int(BigInt::zero()),
            Cover::Rat => Scalar::Rat(BigRational::zero()),
            Cover::Poly(_) => Scalar::Poly(vec![]),
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            Cover::Int => Scalar::Int(BigInt::one()),
            Cover::Rat => Scalar::Rat(BigRational::one()),
            Cover::Poly(_) => Scalar::Poly(vec![1]),
        }
    }

    pub fn add(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Cover::Int, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x + y),
            (Cover::Rat, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Cover::Poly(p), Scalar::Poly(x), Scalar::Poly(y)) => {
                let n = x.len().max(y.len());
                let mut c = vec![0u64; n];
                for i in 0..n {
                    let xa = x.get(i).copied().unwrap_or(0);
                    let ya = y.get(i).copied().unwrap_or(0);
                    c[i] = (xa + ya) % p;
                }
                trim(&mut c);
                Scalar::Poly(c)
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    pub fn sub(self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(self, a: &Scalar) -> Scalar {
        match (self, a) {
            (Cover::Int, Scalar::Int(x)) => Scalar::Int(-x),
            (Cover::Rat, Scalar::Rat(x)) => Scalar::Rat(-x),
            (Cover::Poly(p), Scalar::Poly(x)) => {
                let mut c: Vec<u64> = x.iter().map(|&v| (p - v % p) % p).collect();
                trim(&mut c);
                Scalar::Poly(c)
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    pub fn mul(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Cover::Int, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x * y),
            (Cover::Rat, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Cover::Poly(p), Scalar::Poly(x), Scalar::Poly(y)) => {
                if x.is_empty() || y.is_empty() {
                    return Scalar::Poly(vec![]);
                }
                let mut c = vec![0u64; x.len() + y.len() - 1];
                for (i, &xa) in x.iter().enumerate() {
                    for (j, &ya) in y.iter().enumerate() {
                        c[i + j] = (c[i + j] + xa * ya) % p;
                    }
                }
                trim(&mut c);
                Scalar::Poly(c)
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    /// Euclidean division a = q*b + r with size(r) < size(b). Panics on b = 0.
    pub fn divmod(self, a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        assert!(!b.is_zero(), "division by zero");
        match (self, a, b) {
            (Cover::Int, Scalar::Int(x), Scalar::Int(y)) => {
                let (q, r) = x.div_mod_floor(y);
                // Keep |r| minimal in absolute value is not required; floor
                // division gives 0 <= r < |y| for y > 0.
                (Scalar::Int(q), Scalar::Int(r))
            }
            (Cover::Rat, Scalar::Rat(x), Scalar::Rat(y)) => {
                (Scalar::Rat(x / y), Scalar::Rat(BigRational::zero()))
            }
            (Cover::Poly(p), Scalar::Poly(x), Scalar::Poly(y)) => {
                let mut rem = x.clone();
                let db = y.len() - 1;
                let lead_inv = pmod_inv(y[db], p);
                let mut q = vec![0u64; x.len().saturating_sub(db)];
                while rem.len() >= y.len() && !rem.is_empty() {
                    let dr = rem.len() - 1;
                    let coef = rem[dr] * lead_inv % p;
                    let shift = dr - db;
                    q[shift] = coef;
                    for (i, &yc) in y.iter().enumerate() {
                        let sub = coef * yc % p;
                        rem[shift + i] = (rem[shift + i] + p * p - sub) % p;
                    }
                    trim(&mut rem);
                }
                trim(&mut q);
                (Scalar::Poly(q), Scalar::Poly(rem))
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    /// Exact division; None if b does not divide a.
    pub fn div_exact(self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return Some(self.zero());
        }
        let (q, r) = self.divmod(a, b);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Euclidean size used for pivot selection. Zero has no size.
    pub fn size(self, a: &Scalar) -> u64 {
        match (self, a) {
            (Cover::Int, Scalar::Int(x)) => {
                use num::ToPrimitive;
                x.magnitude().to_u64().unwrap_or(u64::MAX)
            }
            (Cover::Rat, _) => 1,
            (Cover::Poly(_), Scalar::Poly(x)) => x.len() as u64,
            _ => panic!("scalar kind mismatch"),
        }
    }

    pub fn is_unit(self, a: &Scalar) -> bool {
        match (self, a) {
            (Cover::Int, Scalar::Int(x)) => x.abs().is_one(),
            (Cover::Rat, Scalar::Rat(x)) => !x.is_zero(),
            (Cover::Poly(_), Scalar::Poly(x)) => x.len() == 1,
            _ => panic!("scalar kind mismatch"),
        }
    }

    /// A unit u such that u*a is the normalized associate (nonnegative for
    /// integers, monic for polynomials).
    pub fn normalizing_unit(self, a: &Scalar) -> Scalar {
        match (self, a) {
            (Cover::Int, Scalar::Int(x)) => {
                if x.is_negative() {
                    Scalar::Int(BigInt::from(-1))
                } else {
                    self.one()
                }
            }
            (Cover::Rat, Scalar::Rat(x)) => {
                if x.is_zero() {
                    self.one()
                } else {
                    Scalar::Rat(x.recip())
                }
            }
            (Cover::Poly(p), Scalar::Poly(x)) => {
                if x.is_empty() {
                    self.one()
                } else {
                    Scalar::Poly(vec![pmod_inv(*x.last().unwrap(), p)])
                }
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    pub fn inv_unit(self, a: &Scalar) -> Scalar {
        match (self, a) {
            (Cover::Int, Scalar::Int(_)) => a.clone(),
            (Cover::Rat, Scalar::Rat(x)) => Scalar::Rat(x.recip()),
            (Cover::Poly(p), Scalar::Poly(x)) => {
                assert!(x.len() == 1);
                Scalar::Poly(vec![pmod_inv(x[0], p)])
            }
            _ => panic!("scalar kind mismatch"),
        }
    }

    /// Extended gcd: (d, s, t) with s*a + t*b = d, d normalized.
    pub fn gcdx(self, a: &Scalar, b: &Scalar) -> (Scalar, Scalar, Scalar) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.one(), self.zero());
        let (mut t0, mut t1) = (self.zero(), self.one());
        while !r1.is_zero() {
            let (q, r) = self.divmod(&r0, &r1);
            let ns = self.sub(&s0, &self.mul(&q, &s1));
            let nt = self.sub(&t0, &self.mul(&q, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = ns;
            t0 = t1;
            t1 = nt;
        }
        let u = self.normalizing_unit(&r0);
        (self.mul(&u, &r0), self.mul(&u, &s0), self.mul(&u, &t0))
    }

    pub fn divides(self, a: &Scalar, b: &Scalar) -> bool {
        if a.is_zero() {
            return b.is_zero();
        }
        self.div_exact(b, a).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zi(v: i64) -> Scalar {
        Scalar::from_i64(v, Ring::Int)
    }

    #[test]
    fn gcdx_int() {
        let c = Cover::Int;
        let (d, s, t) = c.gcdx(&zi(14), &zi(-52));
        assert_eq!(d, zi(2));
        assert_eq!(c.add(&c.mul(&s, &zi(14)), &c.mul(&t, &zi(-52))), zi(2));
    }

    #[test]
    fn poly_arith() {
        let r = Ring::DualNumbers(2);
        let c = r.cover();
        let x = Scalar::Poly(vec![0, 1]);
        let x2 = c.mul(&x, &x);
        assert_eq!(x2, Scalar::Poly(vec![0, 0, 1]));
        assert_eq!(r.reduce(&x2), Scalar::Poly(vec![]));
        let (d, s, t) = c.gcdx(&Scalar::Poly(vec![1, 1]), &Scalar::Poly(vec![0, 0, 1]));
        assert!(d.is_one());
        let lhs = c.add(
            &c.mul(&s, &Scalar::Poly(vec![1, 1])),
            &c.mul(&t, &Scalar::Poly(vec![0, 0, 1])),
        );
        assert!(lhs.is_one());
    }

    #[test]
    fn reduce_intmod() {
        let r = Ring::IntMod(4);
        assert_eq!(r.reduce(&zi(-1)), zi(3));
        assert_eq!(r.reduce(&zi(6)), zi(2));
    }

    #[test]
    fn residues_dual() {
        let r = Ring::DualNumbers(2);
        let res = r.residues().unwrap();
        assert_eq!(res.len(), 4);
    }

    #[test]
    fn divmod_poly() {
        let c = Cover::Poly(3);
        // (x^2 + 2x + 1) / (x + 1) over F_3
        let a = Scalar::Poly(vec![1, 2, 1]);
        let b = Scalar::Poly(vec![1, 1]);
        let (q, r) = c.divmod(&a, &b);
        assert!(r.is_zero());
        assert_eq!(c.mul(&q, &b), a);
    }

    #[test]
    fn ring_validation() {
        assert!(Ring::DualNumbers(4).validate().is_err());
        assert!(Ring::IntMod(1).validate().is_err());
        assert!(Ring::DualNumbers(5).validate().is_ok());
    }
}
