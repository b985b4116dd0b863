//! Generators for the shipped instance files: the two periodic-complex
//! diagnostics, the product-ring gluing instance, and the generation
//! demonstration.

use crate::instance::{InstanceFile, Stmt, Task};
use crate::mat::Mat;
use crate::ring::{Ring, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum ExampleError {
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

pub const EXAMPLE_NAMES: [&str; 4] = [
    "recoll-zp2",
    "recoll-fpe",
    "productring-critpb",
    "genk-demo",
];

pub fn generate(name: &str, p: u64, window: usize) -> Result<InstanceFile, ExampleError> {
    match name {
        "recoll-zp2" => recoll(Ring::IntMod(p * p), p, window),
        "recoll-fpe" => recoll(Ring::DualNumbers(p), p, window),
        "productring-critpb" => Ok(productring(p)),
        "genk-demo" => Ok(genk_demo()),
        other => Err(ExampleError::UnknownExample(other.to_string())),
    }
}

fn one_by_one(ring: Ring, v: Scalar) -> Mat {
    let mut m = Mat::zeros(ring, 1, 1);
    m.set(0, 0, v);
    m
}

/// The length-W window of the 2-periodic acyclic complex of the ring, with
/// the interior endomorphism diagnostics and the null-homotopy of p times
/// the identity. The report states explicitly what these diagnostics do
/// not decide.
fn recoll(ring: Ring, p: u64, window: usize) -> Result<InstanceFile, ExampleError> {
    if window < 4 || window % 2 != 0 {
        return Err(ExampleError::BadParameter(
            "window must be even and at least 4".to_string(),
        ));
    }
    let q = match ring {
        Ring::IntMod(_) => Scalar::from_i64(p as i64, ring),
        Ring::DualNumbers(_) => Scalar::Poly(vec![0, 1]),
        _ => return Err(ExampleError::BadParameter("unsupported ring".into())),
    };
    let mut stmts = vec![Stmt::Ring(ring)];
    stmts.push(Stmt::Module {
        name: "R".into(),
        rels: Mat::zeros(ring, 1, 0),
    });
    let window_complex = |name: &str, lo: i64, len: usize| Stmt::Complex {
        name: name.into(),
        lo,
        terms: vec!["R".into(); len],
        diffs: vec![one_by_one(ring, q.clone()); len - 1],
    };
    // the window, the receiving window shifted one step left (so both edge
    // constraints relax), and the same pair one size up for stabilization
    stmts.push(window_complex("A", 0, window));
    stmts.push(window_complex("Ainner", -1, window));
    stmts.push(window_complex("B", 0, window + 2));
    stmts.push(window_complex("Binner", -1, window + 2));
    // p times the identity on the window
    let pid = Scalar::from_i64(p as i64, ring);
    let comps: Vec<(i64, Mat)> = (0..window as i64)
        .map(|d| (d, one_by_one(ring, pid.clone())))
        .collect();
    stmts.push(Stmt::ChainMapDecl {
        name: "pid".into(),
        from: "A".into(),
        to: "A".into(),
        degree: 0,
        comps,
    });
    stmts.push(Stmt::Note(
        "interior endomorphism cohomology of the periodic window; maps land in the trimmed window so boundary effects cancel".into(),
    ));
    stmts.push(Stmt::Note(
        "these diagnostics do not decide whether the two periodic endomorphism dg algebras are quasi-isomorphic; matching cohomology is the expected outcome and the point of the comparison".into(),
    ));
    stmts.push(Stmt::Task(Task::HomCohomology {
        name: "interior_end".into(),
        source: "A".into(),
        target: "Ainner".into(),
        lo: -2,
        hi: 2,
    }));
    stmts.push(Stmt::Task(Task::HomCohomology {
        name: "interior_end_stab".into(),
        source: "B".into(),
        target: "Binner".into(),
        lo: -2,
        hi: 2,
    }));
    stmts.push(Stmt::Task(Task::Homotopy {
        name: "null_homotopy_pid".into(),
        map: "pid".into(),
    }));
    Ok(InstanceFile { stmts })
}

/// The tabular model of projective modules over k x k with the two factor
/// subcategories, the gluing criterion, and the quotient/oracle
/// comparisons.
fn productring(p: u64) -> InstanceFile {
    let ring = Ring::IntMod(p);
    let m1 = |v: i64| one_by_one(ring, Scalar::from_i64(v, ring));
    let m2 = |a: i64, b: i64| {
        let mut m = Mat::zeros(ring, 2, 1);
        m.set(0, 0, Scalar::from_i64(a, ring));
        m.set(1, 0, Scalar::from_i64(b, ring));
        m
    };
    let mut stmts = vec![Stmt::Ring(ring)];
    stmts.push(Stmt::Module {
        name: "K".into(),
        rels: Mat::zeros(ring, 1, 0),
    });
    stmts.push(Stmt::Module {
        name: "KK".into(),
        rels: Mat::zeros(ring, 2, 0),
    });
    stmts.push(Stmt::DgcatTabular {
        name: "PR".into(),
        objects: vec!["X1".into(), "X2".into(), "X12".into()],
    });
    let hom = |x: &str, y: &str, term: &str| Stmt::Hom {
        cat: "PR".into(),
        x: x.into(),
        y: y.into(),
        lo: 0,
        terms: vec![term.into()],
        diffs: vec![],
    };
    stmts.push(hom("X1", "X1", "K"));
    stmts.push(hom("X1", "X12", "K"));
    stmts.push(hom("X2", "X2", "K"));
    stmts.push(hom("X2", "X12", "K"));
    stmts.push(hom("X12", "X1", "K"));
    stmts.push(hom("X12", "X2", "K"));
    stmts.push(hom("X12", "X12", "KK"));
    stmts.push(Stmt::Unit {
        cat: "PR".into(),
        x: "X1".into(),
        coords: m1(1),
    });
    stmts.push(Stmt::Unit {
        cat: "PR".into(),
        x: "X2".into(),
        coords: m1(1),
    });
    stmts.push(Stmt::Unit {
        cat: "PR".into(),
        x: "X12".into(),
        coords: m2(1, 1),
    });
    let comp = |x: &str, y: &str, z: &str, cells: Vec<(usize, usize, Mat)>| Stmt::Comp {
        cat: "PR".into(),
        x: x.into(),
        y: y.into(),
        z: z.into(),
        p: 0,
        q: 0,
        cells,
    };
    stmts.push(comp("X1", "X1", "X1", vec![(0, 0, m1(1))]));
    stmts.push(comp("X1", "X1", "X12", vec![(0, 0, m1(1))]));
    stmts.push(comp("X1", "X12", "X1", vec![(0, 0, m1(1))]));
    stmts.push(comp(
        "X1",
        "X12",
        "X12",
        vec![(0, 0, m1(1)), (1, 0, m1(0))],
    ));
    stmts.push(comp("X2", "X2", "X2", vec![(0, 0, m1(1))]));
    stmts.push(comp("X2", "X2", "X12", vec![(0, 0, m1(1))]));
    stmts.push(comp("X2", "X12", "X2", vec![(0, 0, m1(1))]));
    stmts.push(comp(
        "X2",
        "X12",
        "X12",
        vec![(0, 0, m1(0)), (1, 0, m1(1))],
    ));
    stmts.push(comp("X12", "X1", "X1", vec![(0, 0, m1(1))]));
    stmts.push(comp("X12", "X2", "X2", vec![(0, 0, m1(1))]));
    stmts.push(comp("X12", "X1", "X12", vec![(0, 0, m2(1, 0))]));
    stmts.push(comp("X12", "X2", "X12", vec![(0, 0, m2(0, 1))]));
    stmts.push(comp(
        "X12",
        "X12",
        "X1",
        vec![(0, 0, m1(1)), (0, 1, m1(0))],
    ));
    stmts.push(comp(
        "X12",
        "X12",
        "X2",
        vec![(0, 0, m1(0)), (0, 1, m1(1))],
    ));
    stmts.push(comp(
        "X12",
        "X12",
        "X12",
        vec![
            (0, 0, m2(1, 0)),
            (0, 1, m2(0, 0)),
            (1, 0, m2(0, 0)),
            (1, 1, m2(0, 1)),
        ],
    ));
    stmts.push(Stmt::Note(
        "two orthogonal factor subcategories glued over their common quotient".into(),
    ));
    stmts.push(Stmt::Task(Task::Critpb {
        name: "glue".into(),
        dgcat: "PR".into(),
        d1: vec!["X2".into()],
        d2: vec!["X1".into()],
        cap: 3,
        window: (-1, 1),
        entries: 2,
        shifts: (0, 0),
    }));
    stmts.push(Stmt::Task(Task::Quotient {
        name: "factor_quotient".into(),
        dgcat: "PR".into(),
        kill: vec!["X2".into()],
        cap: 3,
        policy: "track".into(),
        pair: ("X1".into(), "X1".into()),
        degree: 0,
        oracle: Some((2, 0, 0)),
    }));
    stmts.push(Stmt::Task(Task::Quotient {
        name: "kill_everything".into(),
        dgcat: "PR".into(),
        kill: vec!["X1".into(), "X2".into(), "X12".into()],
        cap: 1,
        policy: "track".into(),
        pair: ("X1".into(), "X1".into()),
        degree: 0,
        oracle: None,
    }));
    InstanceFile { stmts }
}

/// A small torsion complex with the 3-step generation witness.
fn genk_demo() -> InstanceFile {
    let ring = Ring::IntMod(4);
    let mut stmts = vec![Stmt::Ring(ring)];
    stmts.push(Stmt::Module {
        name: "R".into(),
        rels: Mat::zeros(ring, 1, 0),
    });
    stmts.push(Stmt::Module {
        name: "T".into(),
        rels: one_by_one(ring, Scalar::from_i64(2, ring)),
    });
    stmts.push(Stmt::Complex {
        name: "A".into(),
        lo: 0,
        terms: vec!["R".into(), "R".into(), "T".into()],
        diffs: vec![
            one_by_one(ring, Scalar::from_i64(2, ring)),
            one_by_one(ring, Scalar::from_i64(1, ring)),
        ],
    });
    stmts.push(Stmt::Task(Task::Genwit {
        name: "witness".into(),
        complex: "A".into(),
    }));
    stmts.push(Stmt::Task(Task::Cohomology {
        name: "h0".into(),
        complex: "A".into(),
        degree: 0,
    }));
    stmts.push(Stmt::Task(Task::Cohomology {
        name: "h1".into(),
        complex: "A".into(),
        degree: 1,
    }));
    InstanceFile { stmts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{parse, resolve, serialize};
    use crate::report::{build_report, report_to_json, RunStatus};

    #[test]
    fn generated_examples_roundtrip_and_check() {
        for name in EXAMPLE_NAMES {
            let f = generate(name, 2, 6).unwrap();
            let text = serialize(&f);
            let parsed = parse(&text).unwrap();
            assert_eq!(serialize(&parsed), text, "{} roundtrips", name);
            let res = resolve(&parsed).unwrap();
            assert!(
                res.checks.iter().all(|(_, ok, _)| *ok),
                "{}: {:?}",
                name,
                res.checks
            );
        }
    }

    #[test]
    fn genk_demo_runs_clean() {
        let f = generate("genk-demo", 2, 6).unwrap();
        let text = serialize(&f);
        let parsed = parse(&text).unwrap();
        let res = resolve(&parsed).unwrap();
        let (report, status) = build_report("genk-demo.dgi", &text, &parsed, &res, None);
        assert_eq!(status, RunStatus::Pass);
        let json = report_to_json(&report);
        assert!(json.contains("\"verified\": \"true\""));
    }

    #[test]
    fn recoll_interior_cohomology_is_the_prime_field() {
        for (name, ring) in [("recoll-zp2", "Z/4"), ("recoll-fpe", "F2[e]")] {
            let f = generate(name, 2, 6).unwrap();
            let text = serialize(&f);
            assert!(text.starts_with(&format!("ring {}\n", ring)));
            let parsed = parse(&text).unwrap();
            let res = resolve(&parsed).unwrap();
            let (report, status) = build_report("x.dgi", &text, &parsed, &res, None);
            assert_eq!(status, RunStatus::Pass, "{}", name);
            let json = report_to_json(&report);
            // H^0 of the interior endomorphisms is one copy of the prime field
            let h0_line = report
                .tasks
                .iter()
                .find(|t| t.name == "interior_end")
                .unwrap()
                .result
                .get("H0")
                .unwrap()
                .clone();
            assert_eq!(h0_line, "Z/(2)", "{} got {}", name, h0_line);
            let _ = json;
        }
    }
}
