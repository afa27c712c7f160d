use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::element::{ElementDump, PadicElement};
use super::FieldError;
use crate::scale::is_prime;

type Q64 = Ratio<i64>;

fn ser_q<S: Serializer>(r: &Q64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(r))
}

pub(crate) fn fmt_q(r: &Q64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Field and parameter choice for a batch of trials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabConfig {
    pub p: u32,
    pub e: u32,
    /// Absolute `pi`-adic precision.
    pub precision: i64,
    #[serde(serialize_with = "ser_q")]
    pub v_a: Q64,
    pub seed: u64,
}

impl LabConfig {
    /// Precision defaults to `64 e` digits.
    pub fn new(p: u32, e: u32, v_a: Q64, seed: u64) -> Result<Self, FieldError> {
        Self::with_precision(p, e, v_a, seed, 64 * e as i64)
    }

    pub fn with_precision(
        p: u32,
        e: u32,
        v_a: Q64,
        seed: u64,
        precision: i64,
    ) -> Result<Self, FieldError> {
        let bad = |why: String| Err(FieldError::InvalidConfig(why));
        if !is_prime(p) {
            return bad(format!("p = {p} is not prime"));
        }
        if e == 0 {
            return bad("e must be at least 1".into());
        }
        if precision <= 0 {
            return bad("precision must be positive".into());
        }
        let floor = Q64::from_integer(-(p as i64 - 1));
        if v_a >= Q64::from_integer(0) || v_a < floor {
            return bad(format!("v_a = {} outside [-(p-1), 0)", fmt_q(&v_a)));
        }
        if !(v_a * e as i64).is_integer() {
            return bad(format!("v_a = {} is not in (1/{e})Z", fmt_q(&v_a)));
        }
        Ok(Self {
            p,
            e,
            precision,
            v_a,
            seed,
        })
    }

    fn index_of(&self, v: Q64, what: &str) -> Result<i64, FieldError> {
        let scaled = v * self.e as i64;
        if scaled.is_integer() {
            Ok(scaled.to_integer())
        } else {
            Err(FieldError::Infeasible(format!(
                "{what} = {} not in (1/{})Z",
                fmt_q(&v),
                self.e
            )))
        }
    }

    fn v_a_index(&self) -> i64 {
        (self.v_a * self.e as i64).to_integer()
    }

    /// Valuation of `rho_m(a)`: `c_m v_a` with `c_m = -(1 - p^-m)/(p-1)`.
    pub fn rho_valuation(&self, m: u32) -> Q64 {
        let pm = (self.p as i64).pow(m);
        let c = -Q64::new(pm - 1, (self.p as i64 - 1) * pm);
        c * self.v_a
    }

    /// Valuation of `rho_m(a)^(p/(p-1))`.
    pub fn wild_valuation(&self, m: u32) -> Q64 {
        self.rho_valuation(m) * Q64::new(self.p as i64, self.p as i64 - 1)
    }

    pub fn one(&self) -> PadicElement {
        PadicElement::from_int(self.p, self.e, 1, self.precision)
    }

    fn random_at(&self, index: i64, rng: &mut ChaCha8Rng) -> PadicElement {
        PadicElement::random_at(self.p, self.e, index, self.precision, rng)
    }

    fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

/// `a z^p + (1 - a) z^(p+1)`.
pub fn eval_p(
    config: &LabConfig,
    a: &PadicElement,
    z: &PadicElement,
) -> Result<PadicElement, FieldError> {
    if a.p() != config.p || z.p() != config.p {
        return Err(FieldError::Mismatch {
            left: (a.p(), a.e()),
            right: (config.p, config.e),
        });
    }
    if z.is_zero() {
        return Ok(PadicElement::zero(config.p, config.e, z.precision()));
    }
    let zp = z.pow(config.p)?;
    let zp1 = zp.mul(z)?;
    let one = PadicElement::from_int(config.p, config.e, 1, a.precision());
    a.mul(&zp)?.add(&one.sub(a)?.mul(&zp1)?)
}

pub fn iterate(
    config: &LabConfig,
    a: &PadicElement,
    z: &PadicElement,
    n: u32,
) -> Result<PadicElement, FieldError> {
    let mut w = z.clone();
    for _ in 0..n {
        w = eval_p(config, a, &w)?;
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "lemma", rename_all = "snake_case")]
pub enum LabCheck {
    /// Contraction (1), expansion (2), or the affine case (3) near `1`.
    Contraction { item: u8, m: u32 },
    /// Parameter perturbation along `M` iterates inside `B(1)`.
    Lemma42 { big_m: u32 },
    /// Parameter perturbation along the `m` iterates of a zero block.
    Lemma43 { m: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub expected: String,
    pub observed: Option<String>,
    pub error: Option<String>,
    pub operands: BTreeMap<String, ElementDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabReport {
    pub config: LabConfig,
    pub check: LabCheck,
    pub trials: u64,
    pub passed: u64,
    pub failures: Vec<TrialFailure>,
    pub wall_time_ms: u128,
}

impl LabReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

struct Trial {
    expected: Q64,
    operands: Vec<(&'static str, PadicElement)>,
    run: Box<dyn FnOnce() -> Result<PadicElement, FieldError>>,
}

/// Draws within a window of `2e` grid steps above `from` (inclusive).
fn above(rng: &mut ChaCha8Rng, from: i64, e: u32) -> i64 {
    from + rng.gen_range(0..=2 * e as i64)
}

/// Smallest grid index strictly above `v`.
fn strictly_above(v: Q64, e: u32) -> i64 {
    (v * e as i64).floor().to_integer() + 1
}

fn run_trials(
    config: &LabConfig,
    check: LabCheck,
    trials: u64,
    make: impl Fn(&mut ChaCha8Rng) -> Trial + Sync,
) -> LabReport {
    let start = Instant::now();
    let outcomes: Vec<Option<TrialFailure>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = config.trial_rng(t);
            let trial = make(&mut rng);
            let operands = trial.operands;
            let expected = trial.expected;
            let result = (trial.run)();
            let (observed, error, out) = match result {
                Ok(diff) => (diff.valuation(), None, Some(diff)),
                Err(e) => (None, Some(e.to_string()), None),
            };
            if observed == Some(expected) {
                return None;
            }
            let mut dumps: BTreeMap<String, ElementDump> = operands
                .iter()
                .map(|(k, v)| (k.to_string(), v.dump()))
                .collect();
            if let Some(d) = out {
                dumps.insert("difference".into(), d.dump());
            }
            Some(TrialFailure {
                trial: t,
                expected: fmt_q(&expected),
                observed: observed.map(|v| fmt_q(&v)),
                error,
                operands: dumps,
            })
        })
        .collect();
    let failures: Vec<TrialFailure> = outcomes.into_iter().flatten().collect();
    LabReport {
        config: config.clone(),
        check,
        trials,
        passed: trials - failures.len() as u64,
        failures,
        wall_time_ms: start.elapsed().as_millis(),
    }
}

fn require_trials(trials: u64) -> Result<(), FieldError> {
    if trials == 0 {
        return Err(FieldError::InvalidConfig(
            "trials must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Random trials of the three cases of the contraction/expansion lemma; each
/// asserts the exact valuation of `P_a(x') - P_a(x)`.
pub fn check_contraction_lemma(
    config: &LabConfig,
    item: u8,
    m: u32,
    trials: u64,
) -> Result<LabReport, FieldError> {
    require_trials(trials)?;
    let e = config.e;
    let check = LabCheck::Contraction { item, m };
    match item {
        1 | 2 => {
            if m == 0 {
                return Err(FieldError::InvalidConfig("m must be at least 1".into()));
            }
            let ix = config.index_of(config.rho_valuation(m), "v(x)")?;
            let wild = config.wild_valuation(m);
            let (lo, hi) = if item == 1 {
                let lo = strictly_above(wild, e);
                (lo, lo + 2 * e as i64)
            } else {
                let hi = (wild * e as i64).ceil().to_integer() - 1;
                (ix + 1, hi)
            };
            if lo > hi {
                return Err(FieldError::Infeasible(format!(
                    "no valuation in (1/{e})Z strictly between {} and {}",
                    fmt_q(&config.rho_valuation(m)),
                    fmt_q(&wild)
                )));
            }
            let shift = if item == 1 {
                config.rho_valuation(m - 1)
            } else {
                config.v_a
            };
            let cfg = config.clone();
            Ok(run_trials(config, check, trials, move |rng| {
                let a = cfg.random_at(cfg.v_a_index(), rng);
                let x = cfg.random_at(ix, rng);
                let ie = rng.gen_range(lo..=hi);
                let eps = cfg.random_at(ie, rng);
                let v_eps = Q64::new(ie, e as i64);
                let expected = if item == 1 {
                    shift + v_eps
                } else {
                    shift + v_eps * cfg.p as i64
                };
                let c = cfg.clone();
                let (a2, x2, eps2) = (a.clone(), x.clone(), eps.clone());
                Trial {
                    expected,
                    operands: vec![("a", a), ("x", x), ("eps", eps)],
                    run: Box::new(move || {
                        let x1 = x2.add(&eps2)?;
                        eval_p(&c, &a2, &x1)?.sub(&eval_p(&c, &a2, &x2)?)
                    }),
                }
            }))
        }
        3 => {
            let cfg = config.clone();
            Ok(run_trials(config, check, trials, move |rng| {
                let a = cfg.random_at(cfg.v_a_index(), rng);
                let k = rng.gen_range(1..=2 * e as i64);
                let y = cfg
                    .one()
                    .add_raw(&cfg.random_at(k, rng))
                    .expect("same field");
                let id = above(rng, 1, e);
                let delta = cfg.random_at(id, rng);
                let expected = cfg.v_a + Q64::new(id, e as i64);
                let c = cfg.clone();
                let (a2, y2, d2) = (a.clone(), y.clone(), delta.clone());
                Trial {
                    expected,
                    operands: vec![("a", a), ("y", y), ("delta", delta)],
                    run: Box::new(move || {
                        let y1 = y2.add(&d2)?;
                        eval_p(&c, &a2, &y1)?.sub(&eval_p(&c, &a2, &y2)?)
                    }),
                }
            }))
        }
        _ => Err(FieldError::InvalidConfig(format!(
            "item must be 1, 2 or 3, got {item}"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    Lemma42 { big_m: u32 },
    Lemma43 { m: u32 },
}

/// Random trials comparing orbits of nearby parameters; each asserts the
/// exact valuation of `P_a^n(x) - P_a'^n(x')`.
pub fn check_perturbation_lemmas(
    config: &LabConfig,
    which: Perturbation,
    trials: u64,
) -> Result<LabReport, FieldError> {
    require_trials(trials)?;
    let e = config.e;
    let ia = config.v_a_index();
    let cfg = config.clone();
    match which {
        Perturbation::Lemma42 { big_m } => {
            if !(1..=4).contains(&big_m) {
                return Err(FieldError::InvalidConfig("M must be in 1..=4".into()));
            }
            // |y - 1|, |y - y'| <= |a|^-M
            let floor = -(big_m as i64) * ia;
            Ok(run_trials(
                config,
                LabCheck::Lemma42 { big_m },
                trials,
                move |rng| {
                    let a = cfg.random_at(ia, rng);
                    let k = above(rng, floor, e);
                    let y = cfg
                        .one()
                        .add_raw(&cfg.random_at(k, rng))
                        .expect("same field");
                    let id = above(rng, floor, e);
                    let delta = cfg.random_at(id, rng);
                    // v(a - a') = v(y - y') + v_a
                    let eta = cfg.random_at(id + ia, rng);
                    let expected = cfg.v_a * (big_m as i64 - 1) + Q64::new(id + ia, e as i64);
                    let c = cfg.clone();
                    let (a2, y2, d2, eta2) = (a.clone(), y.clone(), delta.clone(), eta.clone());
                    Trial {
                        expected,
                        operands: vec![("a", a), ("eta", eta), ("y", y), ("delta", delta)],
                        run: Box::new(move || {
                            let a1 = a2.add(&eta2)?;
                            let y1 = y2.add(&d2)?;
                            iterate(&c, &a2, &y2, big_m)?.sub(&iterate(&c, &a1, &y1, big_m)?)
                        }),
                    }
                },
            ))
        }
        Perturbation::Lemma43 { m } => {
            if !(1..=3).contains(&m) {
                return Err(FieldError::InvalidConfig("m must be in 1..=3".into()));
            }
            let ix = config.index_of(config.rho_valuation(m), "v(x)")?;
            let wild = config.wild_valuation(m);
            // valuation of rho_1 ... rho_{m-1}; zero for m = 1
            let partial: Q64 = (1..m).map(|j| config.rho_valuation(j)).sum();
            Ok(run_trials(
                config,
                LabCheck::Lemma43 { m },
                trials,
                move |rng| {
                    let a = cfg.random_at(ia, rng);
                    let x = cfg.random_at(ix, rng);
                    // w = v(a - a') - v_a above the wild threshold
                    let iw = above(rng, strictly_above(wild, e), e);
                    let w = Q64::new(iw, e as i64);
                    let floor_d = std::cmp::max(wild, w - partial);
                    let id = above(rng, strictly_above(floor_d, e), e);
                    let delta = cfg.random_at(id, rng);
                    let eta = cfg.random_at(iw + ia, rng);
                    let c = cfg.clone();
                    let (a2, x2, d2, eta2) = (a.clone(), x.clone(), delta.clone(), eta.clone());
                    Trial {
                        expected: w,
                        operands: vec![("a", a), ("eta", eta), ("x", x), ("delta", delta)],
                        run: Box::new(move || {
                            let a1 = a2.add(&eta2)?;
                            let x1 = x2.add(&d2)?;
                            iterate(&c, &a2, &x2, m)?.sub(&iterate(&c, &a1, &x1, m)?)
                        }),
                    }
                },
            ))
        }
    }
}
