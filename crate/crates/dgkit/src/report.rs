//! Task execution and deterministic machine-readable reports.
//!
//! A report records the input's content hash, every task's parameters
//! (caps and bounds included, so certificates are self-describing) and the
//! results. Identical inputs produce identical report bytes.

use crate::complex::ChainMap;
use crate::dg::DgError;
use crate::instance::{InstanceFile, Resolved, Task};
use crate::pullback::{check_critpb, homotopy_pullback, iterated_holim, CoverDiagram, CritPbParams};
use crate::quotient::{drinfeld_quotient, verdier_h0_oracle, Certificate, OverflowPolicy, VerdierOutcome};
use crate::twisted::SearchBound;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Serialize)]
pub struct Report {
    pub tool: Tool,
    pub input: InputInfo,
    pub ring: String,
    pub notes: Vec<String>,
    pub checks: Vec<CheckLine>,
    pub tasks: Vec<TaskReport>,
    pub conventions: Vec<String>,
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub format: u32,
}

#[derive(Serialize)]
pub struct InputInfo {
    pub file: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct CheckLine {
    pub item: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct TaskReport {
    pub name: String,
    pub kind: String,
    pub params: BTreeMap<String, String>,
    pub status: String,
    pub result: BTreeMap<String, String>,
}

/// Overall exit status for a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    VerifiedFailure,
    Inconclusive,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::VerifiedFailure => 1,
            RunStatus::Inconclusive => 3,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::new();
    for b in digest {
        out.push_str(&format!("{:02x}", b));
    }
    out
}

fn mask_from_str(s: &str) -> Option<u8> {
    let mut m = 0u8;
    for c in s.chars() {
        let d = c.to_digit(10)?;
        if d == 0 || d > 3 {
            return None;
        }
        m |= 1 << (d - 1);
    }
    Some(m)
}

/// Run the tasks of a resolved instance; the filter restricts to one task
/// name when given.
pub fn run_tasks(
    file: &InstanceFile,
    res: &Resolved,
    filter: Option<&str>,
) -> (Vec<TaskReport>, RunStatus) {
    let mut out = Vec::new();
    let mut status = RunStatus::Pass;
    for task in file.tasks() {
        if let Some(f) = filter {
            if task.name() != f {
                continue;
            }
        }
        let rep = run_one(&task, res);
        if rep.status == "fail" {
            status = RunStatus::VerifiedFailure;
        } else if rep.status == "inconclusive" && status == RunStatus::Pass {
            status = RunStatus::Inconclusive;
        }
        out.push(rep);
    }
    (out, status)
}

fn fail(mut rep: TaskReport, msg: impl Into<String>) -> TaskReport {
    rep.status = "fail".into();
    rep.result.insert("error".into(), msg.into());
    rep
}

fn run_one(task: &Task, res: &Resolved) -> TaskReport {
    let mut rep = TaskReport {
        name: task.name().to_string(),
        kind: task.kind().to_string(),
        params: BTreeMap::new(),
        status: "pass".into(),
        result: BTreeMap::new(),
    };
    match task {
        Task::Cohomology {
            complex, degree, ..
        } => {
            rep.params.insert("complex".into(), complex.clone());
            rep.params.insert("degree".into(), degree.to_string());
            let Some(c) = res.complexes.get(complex) else {
                return fail(rep, "unknown complex");
            };
            let h = c.cohomology(*degree);
            rep.result.insert("iso".into(), h.iso_label());
        }
        Task::HomCohomology {
            source,
            target,
            lo,
            hi,
            ..
        } => {
            rep.params.insert("source".into(), source.clone());
            rep.params.insert("target".into(), target.clone());
            rep.params.insert("degrees".into(), format!("{}..{}", lo, hi));
            let (Some(a), Some(b)) = (res.complexes.get(source), res.complexes.get(target)) else {
                return fail(rep, "unknown complex");
            };
            let hc = crate::homcx::hom_complex(a, b);
            for d in *lo..=*hi {
                let h = hc.cx.cohomology(d);
                rep.result.insert(format!("H{}", d), h.iso_label());
            }
        }
        Task::Cone { map, .. } => {
            rep.params.insert("map".into(), map.clone());
            let Some(f) = res.chainmaps.get(map) else {
                return fail(rep, "unknown chain map");
            };
            match crate::complex::cone(f) {
                Ok(cn) => {
                    for d in cn.cx.support() {
                        rep.result
                            .insert(format!("H{}", d), cn.cx.cohomology(d).iso_label());
                    }
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::Homotopy { map, .. } => {
            rep.params.insert("map".into(), map.clone());
            let Some(f) = res.chainmaps.get(map) else {
                return fail(rep, "unknown chain map");
            };
            match crate::homcx::solve_homotopy(f) {
                Ok(Some(h)) => {
                    let ok = f.is_witnessed_by(&h);
                    rep.result.insert("found".into(), "true".into());
                    rep.result.insert("verified".into(), ok.to_string());
                    if !ok {
                        return fail(rep, "homotopy failed re-verification");
                    }
                }
                Ok(None) => {
                    rep.result.insert("found".into(), "false".into());
                    rep.status = "fail".into();
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::Quotient {
            dgcat,
            kill,
            cap,
            policy,
            pair,
            degree,
            oracle,
            ..
        } => {
            rep.params.insert("dgcat".into(), dgcat.clone());
            rep.params.insert("kill".into(), kill.join(","));
            rep.params.insert("cap".into(), cap.to_string());
            rep.params.insert("policy".into(), policy.clone());
            rep.params
                .insert("pair".into(), format!("{},{}", pair.0, pair.1));
            rep.params.insert("degree".into(), degree.to_string());
            let Some(cat) = res.dgcats.get(dgcat) else {
                return fail(rep, "unknown dg category");
            };
            let kill_idx: Option<Vec<usize>> =
                kill.iter().map(|k| cat.object_index(k)).collect();
            let Some(kill_idx) = kill_idx else {
                return fail(rep, "unknown killed object");
            };
            let pol = if policy == "reject" {
                OverflowPolicy::Reject
            } else {
                OverflowPolicy::TrackUnknown
            };
            let q = match drinfeld_quotient(cat, &kill_idx, *cap, Some(pol)) {
                Ok(q) => q,
                Err(e) => return fail(rep, format!("{}", e)),
            };
            let (axioms, skipped) = q.check_axioms_capped();
            rep.result
                .insert("axioms".into(), if axioms.passed() { "pass".into() } else { "fail".into() });
            rep.result
                .insert("axioms_skipped_over_cap".into(), skipped.to_string());
            if !axioms.passed() {
                return fail(rep, format!("{}", axioms.violations[0]));
            }
            let (Some(x), Some(y)) = (cat.object_index(&pair.0), cat.object_index(&pair.1)) else {
                return fail(rep, "unknown pair object");
            };
            let (h, cert) = q.hom_cohomology(x, y, *degree);
            rep.result.insert("iso".into(), h.iso_label());
            rep.result.insert(
                "certificate".into(),
                match cert {
                    Certificate::Exact => "Exact".into(),
                    Certificate::LowerBoundOnly => "LowerBoundOnly".into(),
                },
            );
            if let Some((entries, slo, shi)) = oracle {
                rep.params.insert(
                    "oracle".into(),
                    format!("entries {} shifts {}..{}", entries, slo, shi),
                );
                let bound = SearchBound {
                    max_entries: *entries,
                    shift_lo: *slo,
                    shift_hi: *shi,
                };
                if *degree != 0 {
                    return fail(rep, "the roof oracle compares H^0 only");
                }
                match verdier_h0_oracle(cat, &kill_idx, x, y, bound) {
                    Ok(VerdierOutcome::Classes(cl)) => {
                        rep.result.insert("oracle_classes".into(), cl.to_string());
                        match h.cardinality() {
                            Some(card) if cert == Certificate::Exact => {
                                let agree = card == cl as u64;
                                rep.result.insert("oracle_agrees".into(), agree.to_string());
                                if !agree {
                                    rep.status = "fail".into();
                                }
                            }
                            _ => {
                                rep.result
                                    .insert("oracle_agrees".into(), "not-compared".into());
                                rep.status = "inconclusive".into();
                            }
                        }
                    }
                    Ok(VerdierOutcome::Inconclusive) => {
                        rep.result.insert("oracle_classes".into(), "inconclusive".into());
                        rep.status = "inconclusive".into();
                    }
                    Err(e) => return fail(rep, format!("{}", e)),
                }
            }
        }
        Task::Pullback { f1, f2, .. } => {
            rep.params.insert("f1".into(), f1.clone());
            rep.params.insert("f2".into(), f2.clone());
            let (Some(g1), Some(g2)) = (res.functors.get(f1), res.functors.get(f2)) else {
                return fail(rep, "unknown functor");
            };
            match homotopy_pullback(g1, g2, &[]) {
                Ok(pb) => {
                    let ax = pb.cat.check_axioms();
                    rep.result.insert("objects".into(), pb.objects.len().to_string());
                    rep.result
                        .insert("axioms".into(), if ax.passed() { "pass".into() } else { "fail".into() });
                    if !ax.passed() {
                        return fail(rep, format!("{}", ax.violations[0]));
                    }
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::HolimCover {
            n, layers, maps, ..
        } => {
            rep.params.insert("n".into(), n.to_string());
            let mut cats = BTreeMap::new();
            for (mask, cname) in layers {
                let Some(m) = mask_from_str(mask) else {
                    return fail(rep, format!("bad layer mask {}", mask));
                };
                let Some(c) = res.dgcats.get(cname) else {
                    return fail(rep, format!("unknown dg category {}", cname));
                };
                cats.insert(m, c.clone());
            }
            let mut fmaps = BTreeMap::new();
            for (a, b, fname) in maps {
                let (Some(ma), Some(mb)) = (mask_from_str(a), mask_from_str(b)) else {
                    return fail(rep, "bad mask in maps");
                };
                let Some(f) = res.functors.get(fname) else {
                    return fail(rep, format!("unknown functor {}", fname));
                };
                fmaps.insert((ma, mb), f.clone());
            }
            let cd = CoverDiagram {
                n: *n,
                cats,
                maps: fmaps,
            };
            match iterated_holim(&cd) {
                Ok(hl) => {
                    let ax = hl.cat.check_axioms();
                    rep.result
                        .insert("objects".into(), hl.cat.objects.len().to_string());
                    rep.result.insert("association".into(), hl.association);
                    rep.result
                        .insert("axioms".into(), if ax.passed() { "pass".into() } else { "fail".into() });
                    if !ax.passed() {
                        return fail(rep, format!("{}", ax.violations[0]));
                    }
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::Genwit { complex, .. } => {
            rep.params.insert("complex".into(), complex.clone());
            let Some(c) = res.complexes.get(complex) else {
                return fail(rep, "unknown complex");
            };
            match crate::generation::three_step_witness(c) {
                Ok(w) => {
                    let ok = w.verify();
                    rep.result.insert("verified".into(), ok.to_string());
                    rep.result.insert(
                        "kernel_degrees".into(),
                        w.kernels
                            .iter()
                            .filter(|(_, (k, _))| !k.is_zero_module())
                            .map(|(d, _)| d.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                    if !ok {
                        rep.status = "fail".into();
                    }
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::ZigzagCompat {
            v1,
            v2,
            v3,
            n,
            k,
            l,
            ..
        } => {
            rep.params.insert("v1".into(), v1.clone());
            rep.params.insert("v2".into(), v2.clone());
            rep.params.insert("v3".into(), v3.clone());
            rep.params.insert("n".into(), n.to_string());
            rep.params.insert("k".into(), k.to_string());
            rep.params.insert("l".into(), l.to_string());
            let (Some(c1), Some(c2), Some(c3)) = (
                res.complexes.get(v1),
                res.complexes.get(v2),
                res.complexes.get(v3),
            ) else {
                return fail(rep, "unknown complex");
            };
            for c in [c1, c2, c3] {
                for d in c.support() {
                    if !c.diff(d).is_zero_map() {
                        return fail(rep, "inputs must have zero differentials");
                    }
                }
            }
            let world = match crate::bobject::ZigzagWorld::new(
                res.ring,
                vec![c1.clone(), c2.clone(), c3.clone()],
            ) {
                Ok(w) => w,
                Err(e) => return fail(rep, format!("{}", e)),
            };
            let (b1, b2, b3) = match (world.b_object(0), world.b_object(1), world.b_object(2)) {
                (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                _ => return fail(rep, "structured object construction failed"),
            };
            match world.compat_check(&b1, &b2, &b3, *n, *k, *l) {
                Ok(crate::bobject::CompatOutcome::Pass) => {
                    rep.result.insert("square".into(), "commutes".into());
                }
                Ok(crate::bobject::CompatOutcome::Fail { witness }) => {
                    rep.result
                        .insert("witness".into(), format!("{:?}", witness));
                    rep.status = "fail".into();
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
        Task::Critpb {
            dgcat,
            d1,
            d2,
            cap,
            window,
            entries,
            shifts,
            ..
        } => {
            rep.params.insert("dgcat".into(), dgcat.clone());
            rep.params.insert("d1".into(), d1.join(","));
            rep.params.insert("d2".into(), d2.join(","));
            rep.params.insert("cap".into(), cap.to_string());
            rep.params
                .insert("window".into(), format!("{}..{}", window.0, window.1));
            rep.params.insert("entries".into(), entries.to_string());
            rep.params
                .insert("shifts".into(), format!("{}..{}", shifts.0, shifts.1));
            let Some(cat) = res.dgcats.get(dgcat) else {
                return fail(rep, "unknown dg category");
            };
            let d1_idx: Option<Vec<usize>> = d1.iter().map(|k| cat.object_index(k)).collect();
            let d2_idx: Option<Vec<usize>> = d2.iter().map(|k| cat.object_index(k)).collect();
            let (Some(d1_idx), Some(d2_idx)) = (d1_idx, d2_idx) else {
                return fail(rep, "unknown killed object");
            };
            let bound = SearchBound {
                max_entries: *entries,
                shift_lo: shifts.0,
                shift_hi: shifts.1,
            };
            let params = CritPbParams {
                cap: *cap,
                qff_window: *window,
                surjectivity_bound: bound,
                oracle_bound: bound,
            };
            match check_critpb(cat, &d1_idx, &d2_idx, params) {
                Ok(report) => {
                    rep.result
                        .insert("setup".into(), "verified".into());
                    rep.result.insert(
                        "qff".into(),
                        if report.qff_failures.is_empty() {
                            "pass".into()
                        } else {
                            format!("{:?}", report.qff_failures)
                        },
                    );
                    rep.result.insert(
                        "surjectivity".into(),
                        if report.surjectivity_misses.is_empty() {
                            "pass".into()
                        } else {
                            format!("misses {:?}", report.surjectivity_misses)
                        },
                    );
                    rep.result.insert(
                        "certificates_exact".into(),
                        report.certificates_exact.to_string(),
                    );
                    rep.result.insert(
                        "verdict".into(),
                        if report.verified {
                            "Verified".into()
                        } else {
                            "NotVerified".into()
                        },
                    );
                    rep.result
                        .insert("association".into(), report.association_note);
                    for (i, note) in report.setup_notes.iter().enumerate() {
                        rep.result.insert(format!("setup_note_{}", i), note.clone());
                    }
                    if !report.verified {
                        rep.status = "fail".into();
                    }
                }
                Err(DgError::SetupViolated(detail)) => {
                    rep.result.insert("setup".into(), format!("SetupViolated: {}", detail));
                    rep.result.insert("verdict".into(), "SetupViolated".into());
                    rep.status = "fail".into();
                }
                Err(e) => return fail(rep, format!("{}", e)),
            }
        }
    }
    rep
}

/// Build the full report for a file.
pub fn build_report(
    file_name: &str,
    text: &str,
    file: &InstanceFile,
    res: &Resolved,
    filter: Option<&str>,
) -> (Report, RunStatus) {
    let (tasks, mut status) = run_tasks(file, res, filter);
    let checks: Vec<CheckLine> = res
        .checks
        .iter()
        .map(|(item, ok, detail)| CheckLine {
            item: item.clone(),
            ok: *ok,
            detail: detail.clone(),
        })
        .collect();
    if checks.iter().any(|c| !c.ok) {
        status = RunStatus::VerifiedFailure;
    }
    let report = Report {
        tool: Tool {
            name: "dgkit",
            format: 1,
        },
        input: InputInfo {
            file: file_name.to_string(),
            sha256: sha256_hex(text.as_bytes()),
        },
        ring: format!("{}", res.ring),
        notes: file.notes(),
        checks,
        tasks,
        conventions: vec![
            "cone(f)^n = A^{n+1} (+) B^n with d(a, b) = (-d a, f a + d b)".to_string(),
            "shifts negate the differential on odd shifts".to_string(),
            "iterated limits over three layers split off the last index".to_string(),
        ],
    };
    (report, status)
}

pub fn report_to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// Scalar multiple of an identity chain map, used by generated instances.
pub fn scalar_chainmap(c: &crate::complex::Complex, v: i64) -> ChainMap {
    ChainMap::scalar_endo(c, &crate::ring::Scalar::from_i64(v, c.ring))
}
