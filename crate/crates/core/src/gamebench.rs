//! Executable security games.
//!
//! The collision game hands an adversary a membership oracle for a freshly
//! initialized recognizer over a set the adversary picked. The oracle answers
//! only whether `test(db, k, x)` equals the fingerprint; the adversary wins if
//! some queried `x` outside the set is recognized, using at most `q` queries.
//!
//! Trials are independent and may run in any order. Trial `t` draws all of
//! its randomness from `ChaCha20Rng::seed_from_u64(seed)` switched to stream
//! `t`, so a report depends only on `(params, adversary, trials, seed)`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf2field::{FieldElem, FieldSpec};
use crate::recognizer::{self, build_key, Fingerprint, ItemSet, RecognizerError, RecognizerInstance, RecognizerParams};
use crate::uhash::{CoeffVector, HashedItem};

/// Largest `n * k` the universality census will enumerate.
pub const CENSUS_MAX_BITS: u32 = 20;
/// Largest field the lemma scan will enumerate.
pub const LEMMA_MAX_BITS: u16 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("refusing to enumerate: {0}")]
    Guard(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

/// The membership oracle of one collision-game trial.
pub struct Oracle<'a> {
    inst: &'a RecognizerInstance,
    members: &'a ItemSet,
    queries: usize,
    hit: bool,
}

impl<'a> Oracle<'a> {
    fn new(inst: &'a RecognizerInstance, members: &'a ItemSet) -> Self {
        Self {
            inst,
            members,
            queries: 0,
            hit: false,
        }
    }

    /// One bit: does `x` test to the fingerprint?
    pub fn query(&mut self, x: &FieldElem) -> bool {
        self.queries += 1;
        let recognized = self
            .inst
            .test(x)
            .is_ok_and(|fp| &fp == self.inst.fingerprint());
        if recognized && !self.members.contains(x) {
            self.hit = true;
        }
        recognized
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

/// A collision-game strategy.
pub trait Adversary: Sync {
    fn name(&self) -> &'static str;

    /// The stored set. Defaults to `N` distinct uniform items.
    fn choose_set(&self, params: &RecognizerParams, rng: &mut dyn RngCore) -> ItemSet {
        random_set(params.n(), params.items(), rng)
    }

    /// Issues queries. `budget` is the game's `q`; the adversary may exceed
    /// it, but such a trial scores zero.
    fn play(&self, members: &ItemSet, budget: usize, oracle: &mut Oracle<'_>, rng: &mut dyn RngCore);
}

/// `count` distinct uniform `n`-bit items.
pub fn random_set(n: u16, count: usize, rng: &mut dyn RngCore) -> ItemSet {
    let mut seen = HashSet::with_capacity(count);
    let mut items = Vec::with_capacity(count);
    while items.len() < count {
        let x = FieldElem::random(n, rng);
        if seen.insert(x) {
            items.push(x);
        }
    }
    ItemSet::new(items).expect("distinct items of one width")
}

/// Distinct uniform non-members. `queries` overrides the budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistinctRandom {
    pub queries: Option<usize>,
}

impl Adversary for DistinctRandom {
    fn name(&self) -> &'static str {
        "distinct-random"
    }

    fn play(&self, members: &ItemSet, budget: usize, oracle: &mut Oracle<'_>, rng: &mut dyn RngCore) {
        let n = members.items()[0].width();
        let mut asked = HashSet::new();
        while asked.len() < self.queries.unwrap_or(budget) {
            let x = FieldElem::random(n, rng);
            if !members.contains(&x) && asked.insert(x) {
                oracle.query(&x);
            }
        }
    }
}

/// Non-members one bit flip away from a stored item.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearMiss;

impl Adversary for NearMiss {
    fn name(&self) -> &'static str {
        "near-miss"
    }

    fn play(&self, members: &ItemSet, budget: usize, oracle: &mut Oracle<'_>, rng: &mut dyn RngCore) {
        let n = usize::from(members.items()[0].width());
        let mut asked = HashSet::new();
        // N * n candidates, far more than any budget used here
        let limit = budget.min(members.len() * n);
        while asked.len() < limit {
            let base = members.items()[rng.gen_range(0..members.len())];
            let x = base.flip_bit(rng.gen_range(0..n));
            if !members.contains(&x) && asked.insert(x) {
                oracle.query(&x);
            }
        }
    }
}

/// Uniform queries; on a positive answer it asks the same item again.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveRepeat;

impl Adversary for AdaptiveRepeat {
    fn name(&self) -> &'static str {
        "adaptive-repeat"
    }

    fn play(&self, members: &ItemSet, budget: usize, oracle: &mut Oracle<'_>, rng: &mut dyn RngCore) {
        let n = members.items()[0].width();
        let mut last: Option<FieldElem> = None;
        while oracle.queries() < budget {
            let x = match last.take() {
                Some(x) => x,
                None => FieldElem::random(n, rng),
            };
            if oracle.query(&x) {
                last = Some(x);
            }
        }
    }
}

/// Looks up a built-in adversary by its `name()`.
pub fn adversary_by_name(name: &str) -> Option<Box<dyn Adversary>> {
    match name {
        "distinct-random" => Some(Box::new(DistinctRandom::default())),
        "near-miss" => Some(Box::new(NearMiss)),
        "adaptive-repeat" => Some(Box::new(AdaptiveRepeat)),
        _ => None,
    }
}

/// Result of a collision-game Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub adversary: String,
    pub n: u16,
    pub items: usize,
    pub q: usize,
    pub m: u16,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard deviation at the bound.
    pub sigma: f64,
    pub max_queries: usize,
    /// Trials that exceeded `q` queries and were scored zero.
    pub over_budget: u64,
}

impl CollisionReport {
    /// Empirical frequency is at most `bound + 3 sigma`.
    pub fn within_bound(&self) -> bool {
        self.empirical <= self.bound + 3.0 * self.sigma
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("adversary", self.adversary.clone()),
            ("n", self.n.to_string()),
            ("N", self.items.to_string()),
            ("q", self.q.to_string()),
            ("m", self.m.to_string()),
            ("seed", format!("{:#x}", self.seed)),
            ("trials", self.trials.to_string()),
            ("successes", self.successes.to_string()),
            ("empirical", format!("{:.6}", self.empirical)),
            ("bound", format!("{:.6}", self.bound)),
            ("sigma", format!("{:.6}", self.sigma)),
            ("max queries", self.max_queries.to_string()),
            ("over budget", self.over_budget.to_string()),
        ];
        table(&rows)
    }
}

/// The seeded generator for trial `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct Outcome {
    success: bool,
    queries: usize,
    over_budget: bool,
}

fn run_trial(params: &RecognizerParams, adversary: &dyn Adversary, rng: &mut ChaCha20Rng) -> Result<Outcome> {
    let members = adversary.choose_set(params, rng);
    let inst = recognizer::init(&members, params, rng)?;
    let mut oracle = Oracle::new(&inst, &members);
    adversary.play(&members, params.q(), &mut oracle, rng);
    let over_budget = oracle.queries > params.q();
    Ok(Outcome {
        success: oracle.hit && !over_budget,
        queries: oracle.queries,
        over_budget,
    })
}

/// Runs `trials` independent collision games.
pub fn run_collision_mc(
    params: &RecognizerParams,
    adversary: &dyn Adversary,
    trials: u64,
    seed: u64,
) -> Result<CollisionReport> {
    if trials == 0 {
        return Err(BenchError::Contract("need at least one trial".into()));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(params, adversary, &mut trial_rng(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|o| o.success).count() as u64;
    let bound = params.security().epsilon;
    Ok(CollisionReport {
        adversary: adversary.name().into(),
        n: params.n(),
        items: params.items(),
        q: params.q(),
        m: params.m(),
        seed,
        trials,
        successes,
        empirical: successes as f64 / trials as f64,
        bound,
        sigma: (bound * (1.0 - bound) / trials as f64).sqrt(),
        max_queries: outcomes.iter().map(|o| o.queries).max().unwrap_or(0),
        over_budget: outcomes.iter().filter(|o| o.over_budget).count() as u64,
    })
}

/// Initializes recognizers for `m0` and `m1` from the same seed and reports
/// whether the two databases are byte-identical.
///
/// This is the part of the disclosure game that can actually be run: an
/// unbounded distinguisher cannot be simulated, but if `db` never depends on
/// the stored set it has nothing to distinguish.
pub fn disclosure_replay(m0: &ItemSet, m1: &ItemSet, params: &RecognizerParams, seed: u64) -> Result<bool> {
    if m0.len() != params.items() || m1.len() != params.items() {
        return Err(BenchError::Contract(format!(
            "both sets need {} items, got {} and {}",
            params.items(),
            m0.len(),
            m1.len()
        )));
    }
    let a = recognizer::init(m0, params, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let b = recognizer::init(m1, params, &mut ChaCha20Rng::seed_from_u64(seed))?;
    Ok(a.db().to_bytes() == b.db().to_bytes())
}

/// Census of `h(x_1), ..., h(x_k)` over every `k`-coefficient `db` in
/// GF(2^n), at the points `x_i = i - 1`.
///
/// Returns the largest distance of any output tuple's count from the
/// expected `2^(nk) 2^(-mk)`. The family is strongly `k`-universal exactly
/// when this is zero.
pub fn universality_census(n: u16, m: u16, k: usize) -> Result<u64> {
    if k == 0 {
        return Err(BenchError::Guard("k must be at least 1".into()));
    }
    let total_bits = u32::from(n) * k as u32;
    if total_bits > CENSUS_MAX_BITS {
        return Err(BenchError::Guard(format!(
            "2^{total_bits} coefficient vectors exceed the 2^{CENSUS_MAX_BITS} limit"
        )));
    }
    if m == 0 || m >= n {
        return Err(BenchError::Contract(format!("need 0 < m < n, got m = {m}, n = {n}")));
    }
    if k as u64 > 1u64 << n {
        return Err(BenchError::Contract(format!("GF(2^{n}) has fewer than {k} points")));
    }
    let field = FieldSpec::standard(n).map_err(RecognizerError::from)?;
    let points: Vec<FieldElem> = (0..k as u64)
        .map(|i| FieldElem::from_u64(i, n).expect("point fits"))
        .collect();

    let mut counts = vec![0u64; 1usize << (usize::from(m) * k)];
    let mask = (1u64 << n) - 1;
    for code in 0..1u64 << total_bits {
        let coeffs = (0..k)
            .map(|i| FieldElem::from_u64((code >> (i * usize::from(n))) & mask, n).expect("coefficient fits"))
            .collect();
        let db = CoeffVector::with_field(field, coeffs).map_err(RecognizerError::from)?;
        let mut cell = 0usize;
        for (i, x) in points.iter().enumerate() {
            let y = db.eval(m, x).map_err(RecognizerError::from)?;
            cell |= (y.value().low_u64() as usize) << (i * usize::from(m));
        }
        counts[cell] += 1;
    }
    let expected = 1u64 << (total_bits - u32::from(m) * k as u32);
    Ok(counts.iter().map(|&c| c.abs_diff(expected)).max().unwrap_or(0))
}

/// Builds the fingerprint polynomial for `roots`, evaluates it at every
/// point of GF(2^m) and checks that the fingerprint's preimage is exactly
/// the root set.
pub fn lemma_scan(m: u16, roots: &[u64]) -> Result<bool> {
    if m > LEMMA_MAX_BITS {
        return Err(BenchError::Guard(format!("m = {m} exceeds {LEMMA_MAX_BITS}")));
    }
    let hashed = roots
        .iter()
        .map(|&r| FieldElem::from_u64(r, m).map(HashedItem))
        .collect::<Result<Vec<_>, _>>()
        .map_err(RecognizerError::from)?;
    let (key, fp) = match build_key(&hashed, m) {
        Ok(pair) => pair,
        Err(RecognizerError::DuplicateHash) => {
            return Err(BenchError::Contract("roots are not distinct".into()))
        }
        Err(e) => return Err(BenchError::Contract(e.to_string())),
    };
    let mut preimage = BTreeSet::new();
    for x in 0..1u64 << m {
        let x = FieldElem::from_u64(x, m).expect("point fits");
        if Fingerprint(key.eval(&x)?) == fp {
            preimage.insert(x.low_u64());
        }
    }
    Ok(preimage == roots.iter().copied().collect())
}

/// Summary of many lemma scans over random root sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub m: u16,
    pub roots: usize,
    pub instances: u64,
    pub seed: u64,
    pub passed: u64,
}

impl LemmaReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn to_table(&self) -> String {
        table(&[
            ("m", self.m.to_string()),
            ("roots", self.roots.to_string()),
            ("instances", self.instances.to_string()),
            ("seed", format!("{:#x}", self.seed)),
            ("passed", self.passed.to_string()),
        ])
    }
}

/// Runs `instances` lemma scans with `roots` distinct random roots each.
pub fn lemma_mc(m: u16, roots: usize, instances: u64, seed: u64) -> Result<LemmaReport> {
    if m > LEMMA_MAX_BITS {
        return Err(BenchError::Guard(format!("m = {m} exceeds {LEMMA_MAX_BITS}")));
    }
    if roots < 2 || roots as u64 >= 1u64 << m {
        return Err(BenchError::Contract(format!("need 1 < roots < 2^{m}")));
    }
    let results = (0..instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut set = HashSet::new();
            let mut picked = Vec::with_capacity(roots);
            while picked.len() < roots {
                let r = rng.gen_range(0..1u64 << m);
                if set.insert(r) {
                    picked.push(r);
                }
            }
            lemma_scan(m, &picked)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport {
        m,
        roots,
        instances,
        seed,
        passed: results.iter().filter(|&&ok| ok).count() as u64,
    })
}

/// Output of [`universality_census`] with its inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub n: u16,
    pub m: u16,
    pub k: usize,
    pub vectors: u64,
    pub expected_per_cell: u64,
    pub max_deviation: u64,
}

impl CensusReport {
    pub fn run(n: u16, m: u16, k: usize) -> Result<Self> {
        let max_deviation = universality_census(n, m, k)?;
        let total = u32::from(n) * k as u32;
        Ok(Self {
            n,
            m,
            k,
            vectors: 1 << total,
            expected_per_cell: 1 << (total - u32::from(m) * k as u32),
            max_deviation,
        })
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn to_table(&self) -> String {
        table(&[
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("k", self.k.to_string()),
            ("vectors", self.vectors.to_string()),
            ("expected per cell", self.expected_per_cell.to_string()),
            ("max deviation", self.max_deviation.to_string()),
        ])
    }
}

fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string(&value).expect("value serializes")
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
