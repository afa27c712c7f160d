#![allow(dead_code)]

use fatou_core::field::{
    check_contraction_lemma, check_perturbation_lemmas, FieldError, LabConfig, LabReport,
    Perturbation,
};
use num_rational::Ratio;

/// `(p, e, v_a)` combinations swept by the field trials.
pub fn field_grid() -> Vec<(u32, u32, Ratio<i64>)> {
    let mut out = Vec::new();
    for e in [1u32, 2, 4, 8] {
        for (n, d) in [(-1i64, 1i64), (-1, 2), (-1, 4)] {
            if (e as i64 * n) % d == 0 {
                out.push((2, e, Ratio::new(n, d)));
            }
        }
    }
    for e in [2u32, 6, 12, 18] {
        for (n, d) in [(-1i64, 1i64), (-2, 1), (-1, 2), (-3, 2)] {
            if (e as i64 * n) % d == 0 {
                out.push((3, e, Ratio::new(n, d)));
            }
        }
    }
    out
}

pub enum Run {
    Done(LabReport),
    Infeasible,
}

pub fn sweep(trials: u64, seed: u64) -> Vec<(String, Run)> {
    let mut out = Vec::new();
    for (p, e, v_a) in field_grid() {
        let cfg = LabConfig::with_precision(p, e, v_a, seed, 16 * e as i64)
            .expect("grid entries are valid");
        let tag = |what: String| format!("p={p} e={e} v_a={v_a} {what}");
        let mut push = |name: String, r: Result<LabReport, FieldError>| match r {
            Ok(rep) => out.push((name, Run::Done(rep))),
            Err(FieldError::Infeasible(_)) => out.push((name, Run::Infeasible)),
            Err(err) => panic!("{name}: {err}"),
        };
        for item in 1..=3u8 {
            for m in 1..=2u32 {
                if item == 3 && m == 2 {
                    continue;
                }
                push(
                    tag(format!("lemma32 item={item} m={m}")),
                    check_contraction_lemma(&cfg, item, m, trials),
                );
            }
        }
        for big_m in 1..=4 {
            push(
                tag(format!("lemma42 M={big_m}")),
                check_perturbation_lemmas(&cfg, Perturbation::Lemma42 { big_m }, trials),
            );
        }
        for m in 1..=3 {
            push(
                tag(format!("lemma43 m={m}")),
                check_perturbation_lemmas(&cfg, Perturbation::Lemma43 { m }, trials),
            );
        }
    }
    out
}
