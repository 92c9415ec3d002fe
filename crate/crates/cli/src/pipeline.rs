//! Orchestration of saturation, sieve and certification into a certificate,
//! and its replay.

use std::collections::BTreeSet;

use chabauty_core::chabauty::{self, CriterionConfig, Verdict};
use chabauty_core::fp;
use chabauty_core::mwsieve::{
    certify, find_certifying_prime, recheck_record, recheck_saturation, run_sieve, saturate, sieve_places,
    CertifyConfig, CosetRecord, Outcome, PlaceCache, PlaceKey, SaturationConfig, SaturationRecord, SieveConfig,
    SieveError, SieveState, SieveTranscript,
};
use chabauty_core::par::Execution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{format_point, PointAt, Problem};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Chabauty(#[from] chabauty::ChabautyError),
    #[error("no known point with index {0}")]
    NoSuchPoint(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub exec: Execution,
    /// Overrides the seed in the problem file.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { exec: Execution::Parallel, seed: None }
    }
}

impl RunOptions {
    pub fn seed(&self, problem: &Problem) -> u64 {
        self.seed.unwrap_or(problem.file.seed)
    }
}

pub fn criterion_config(problem: &Problem, opts: &RunOptions) -> CriterionConfig {
    CriterionConfig { precision: problem.file.precision, exec: opts.exec, ..CriterionConfig::default() }
}

pub fn sieve_config(problem: &Problem, opts: &RunOptions) -> SieveConfig {
    let f = &problem.file;
    SieveConfig {
        smoothness_bound: f.smoothness_bound,
        p_max: f.primes.sieve_max,
        residue_cap: f.caps.residue_field,
        w_cap: f.caps.cosets,
        max_steps: f.caps.steps,
        schedule: problem.schedule(),
        seed: opts.seed(problem),
        exec: opts.exec,
    }
}

pub fn saturation_config(problem: &Problem, opts: &RunOptions) -> SaturationConfig {
    SaturationConfig {
        p_max: problem.file.primes.saturation_max,
        seed: opts.seed(problem),
        exec: opts.exec,
        ..SaturationConfig::default()
    }
}

/// Saturation at every prime below the smoothness bound.
pub fn run_saturation(problem: &Problem, opts: &RunOptions) -> Result<Vec<SaturationRecord>, PipelineError> {
    let qs = fp::primes_below(problem.file.smoothness_bound);
    Ok(saturate(&problem.mw, &qs, &saturation_config(problem, opts))?)
}

/// Sieve with the places above `target` first, or on the problem's pinned
/// schedule when it has one.
pub fn run_sieve_for(
    problem: &Problem,
    target: Option<u64>,
    opts: &RunOptions,
) -> Result<(PlaceCache, SieveState), PipelineError> {
    let cfg = sieve_config(problem, opts);
    let mut places = sieve_places(&problem.mw, &cfg);
    if let Some(schedule) = &cfg.schedule {
        // Scheduled places need not pass the admissibility filter.
        for k in schedule {
            if !places.iter().any(|v| PlaceKey::from(v) == *k) {
                let extra = problem.mw.nf.split_prime(k.p).ok().and_then(|ps| ps.into_iter().find(|v| v.index == k.index));
                places.push(extra.ok_or(SieveError::UnknownPlace(k.p))?);
            }
        }
    }
    let cache = PlaceCache::new(places, cfg.seed);
    let state = run_sieve(&problem.mw, &cache, target, &cfg)?;
    Ok((cache, state))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub artifact: String,
    pub problem: String,
    pub problem_hash: String,
    pub seed: u64,
    pub precision: i64,
    pub smoothness_bound: u64,
    /// Conventions that affect the recorded data.
    pub conventions: Vec<String>,
    pub saturation: Vec<SaturationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certifying_prime: Option<u64>,
    /// Places in the order the sieve used them.
    pub schedule: Vec<PlaceKey>,
    pub sieve: SieveTranscript,
    pub cosets: Vec<CosetRecord>,
    /// The certified set `C(K)`, in problem order.
    pub points: Vec<PointAt>,
    pub outcome: Outcome,
}

impl Certificate {
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn conventions() -> Vec<String> {
    vec![
        "Mumford representatives have monic u".into(),
        "O_K = Z[θ] is assumed at p when the defining polynomial is squarefree mod p".into(),
        "coset representatives are reduced modulo the HNF of L_s".into(),
        "#J(k_v) is the full group order".into(),
    ]
}

/// Saturation, sieve and criterion, assembled into a certificate.
pub fn verify(problem: &Problem, opts: &RunOptions) -> Result<Certificate, PipelineError> {
    let mw = &problem.mw;
    let f = &problem.file;
    let saturation = run_saturation(problem, opts)?;
    let ccfg = criterion_config(problem, opts);
    let p_star = find_certifying_prime(mw, &f.primes.criterion_pool, f.smoothness_bound, &ccfg);
    let (cache, state) = run_sieve_for(problem, p_star, opts)?;
    let mut pool: Vec<u64> = p_star.into_iter().collect();
    pool.extend(f.primes.criterion_pool.iter().filter(|&&p| Some(p) != p_star));
    let cert_cfg = CertifyConfig { prime_pool: pool, criterion: ccfg, smoothness_bound: f.smoothness_bound };
    let (cosets, outcome) = certify(mw, &state, &cache, &cert_cfg)?;
    let mut reasons = match outcome {
        Outcome::Certified => Vec::new(),
        Outcome::NotCertified { reasons } => reasons,
    };
    for rec in saturation.iter().filter(|r| !r.proven) {
        reasons.push(format!("saturation at q = {} not proven", rec.q));
    }
    let outcome = if reasons.is_empty() { Outcome::Certified } else { Outcome::NotCertified { reasons } };
    Ok(Certificate {
        version: CERTIFICATE_VERSION,
        artifact: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        problem: f.name.clone(),
        problem_hash: problem.hash.clone(),
        seed: opts.seed(problem),
        precision: f.precision,
        smoothness_bound: f.smoothness_bound,
        conventions: conventions(),
        saturation,
        certifying_prime: p_star,
        schedule: state.used.clone(),
        sieve: SieveTranscript::from_state(&state),
        cosets,
        points: mw.points.iter().map(|kp| format_point(&mw.nf, &kp.point)).collect(),
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecheckReport {
    pub problem_hash_matches: bool,
    pub problems: Vec<String>,
}

impl RecheckReport {
    pub fn ok(&self) -> bool {
        self.problem_hash_matches && self.problems.is_empty()
    }
}

/// Replay a certificate against its problem: saturation on the recorded
/// places, the sieve on the recorded schedule, and every coset record,
/// recomputing the criterion at the recorded primes.
pub fn recheck(problem: &Problem, cert: &Certificate, opts: &RunOptions) -> Result<RecheckReport, PipelineError> {
    let mw = &problem.mw;
    let seed = opts.seed(problem);
    let mut problems = Vec::new();
    if cert.version != CERTIFICATE_VERSION {
        problems.push(format!("certificate version {} is not {}", cert.version, CERTIFICATE_VERSION));
    }
    for rec in &cert.saturation {
        if !recheck_saturation(mw, rec, seed)? {
            problems.push(format!("saturation record for q = {} does not replay", rec.q));
        }
    }
    let want: BTreeSet<u64> = fp::primes_below(problem.file.smoothness_bound).into_iter().collect();
    let have: BTreeSet<u64> = cert.saturation.iter().filter(|r| r.proven).map(|r| r.q).collect();
    if want != have {
        problems.push("saturation does not cover every prime below the bound".into());
    }
    let mut pinned = problem.clone();
    pinned.file.schedule = Some(cert.schedule.iter().map(|k| [k.p, k.index as u64]).collect());
    let (cache, state) = run_sieve_for(&pinned, None, &RunOptions { seed: Some(seed), ..*opts })?;
    if SieveTranscript::from_state(&state) != cert.sieve {
        problems.push("sieve transcript differs on the recorded schedule".into());
    }
    let covered: BTreeSet<&Vec<String>> = cert.cosets.iter().map(|r| &r.w).collect();
    if cert.sieve.cosets.iter().any(|w| !covered.contains(w)) || covered.len() != cert.sieve.cosets.len() {
        problems.push("coset records do not match W".into());
    }
    let ccfg = criterion_config(problem, opts);
    for rec in &cert.cosets {
        for msg in recheck_record(mw, &state.lattice, rec, &cache, cert.smoothness_bound, opts.exec)? {
            problems.push(format!("coset {:?}: {msg}", rec.w));
        }
        let Some(kp) = mw.points.get(rec.point_index) else {
            continue;
        };
        match chabauty::criterion(&mw.nf, &mw.curve, &mw.free, &kp.point, rec.p, &ccfg) {
            Ok(d) if d.verdict == Verdict::UniqueInBall && d.h == rec.h && d.rank == rec.rank => {}
            Ok(d) => problems.push(format!("criterion at {} for point {} gives h = {}, rank {}", rec.p, rec.point_index, d.h, d.rank)),
            Err(e) => problems.push(format!("criterion at {} for point {}: {e}", rec.p, rec.point_index)),
        }
    }
    if cert.outcome != Outcome::Certified {
        problems.push("certificate does not claim certification".into());
    }
    Ok(RecheckReport { problem_hash_matches: cert.problem_hash == problem.hash, problems })
}
