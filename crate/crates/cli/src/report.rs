//! Subcommand results: each has a JSON form, a text form and a success flag
//! that decides the exit code.

use std::fmt::Write as _;

use chabauty_core::chabauty::{self, Verdict};
use chabauty_core::fp;
use chabauty_core::mwsieve::{self, build_table, Outcome, PlaceKey, SaturationRecord, SieveTranscript};
use serde::Serialize;

use crate::fermat::{recover_all, solution_set, FermatCandidate};
use crate::fixtures;
use crate::pipeline::{self, criterion_config, Certificate, PipelineError, RunOptions};
use crate::problem::{parse_point, point_label, Problem, SchemaError};

pub trait Report: Serialize {
    fn text(&self) -> String;
    fn success(&self) -> bool;
}

fn factorization(n: u64) -> String {
    fp::factor_u64(n)
        .iter()
        .map(|&(q, e)| if e == 1 { q.to_string() } else { format!("{q}^{e}") })
        .collect::<Vec<_>>()
        .join(" · ")
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PlaceStats {
    pub p: u64,
    pub index: usize,
    pub residue_degree: usize,
    pub residue_size: u64,
    pub order: u64,
    pub invariants: Vec<u64>,
    pub factorization: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JacStats {
    pub problem: String,
    pub places: Vec<PlaceStats>,
}

pub fn jacstats(problem: &Problem, p: u64, opts: &RunOptions) -> Result<JacStats, PipelineError> {
    let mw = &problem.mw;
    let places = chabauty::admissible_prime(&mw.nf, &mw.curve, p)?;
    let seed = opts.seed(problem);
    let stats = places
        .iter()
        .map(|v| {
            let pd = mwsieve::place_data(mw, v, seed, opts.exec)?;
            Ok(PlaceStats {
                p: v.p,
                index: v.index,
                residue_degree: v.residue_degree,
                residue_size: pd.residue_size,
                order: pd.order,
                invariants: pd.invariants.clone(),
                factorization: fp::factor_u64(pd.order),
            })
        })
        .collect::<Result<Vec<_>, mwsieve::SieveError>>()?;
    Ok(JacStats { problem: problem.file.name.clone(), places: stats })
}

impl Report for JacStats {
    fn text(&self) -> String {
        let mut s = format!("{}\n", self.problem);
        for v in &self.places {
            let inv: Vec<String> = v.invariants.iter().map(u64::to_string).collect();
            let _ = writeln!(
                s,
                "  v = ({}, {})  f = {}  #k_v = {}  #J = {} = {}  J ≅ ({})",
                v.p,
                v.index,
                v.residue_degree,
                v.residue_size,
                v.order,
                factorization(v.order),
                inv.join(", ")
            );
        }
        s
    }
    fn success(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PointCriterion {
    pub index: usize,
    pub point: String,
    pub h: usize,
    pub rank: usize,
    pub m_mod_p: Vec<Vec<u64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub problem: String,
    pub p: u64,
    pub precision: i64,
    pub points: Vec<PointCriterion>,
}

pub fn criterion(problem: &Problem, p: u64, point: Option<usize>, opts: &RunOptions) -> Result<CriterionReport, PipelineError> {
    let mw = &problem.mw;
    let cfg = criterion_config(problem, opts);
    chabauty::admissible_prime(&mw.nf, &mw.curve, p)?;
    let table = build_table(mw, p, &cfg).ok_or(chabauty::ChabautyError::PrecisionAmbiguous(cfg.retries + 1))?;
    let indices: Vec<usize> = match point {
        Some(i) => vec![i],
        None => (0..mw.points.len()).collect(),
    };
    let mut points = Vec::new();
    for i in indices {
        let kp = mw.points.get(i).ok_or(PipelineError::NoSuchPoint(i))?;
        let d = chabauty::criterion_with_table(&table, &mw.nf, &mw.curve, &kp.point, cfg.pivot)?;
        points.push(PointCriterion {
            index: i,
            point: point_label(&mw.nf, &kp.point),
            h: d.h,
            rank: d.rank,
            m_mod_p: d.m_mod_p,
            verdict: d.verdict,
        });
    }
    Ok(CriterionReport { problem: problem.file.name.clone(), p, precision: table.precision, points })
}

impl Report for CriterionReport {
    fn text(&self) -> String {
        let mut s = format!("{} at p = {} (precision {})\n", self.problem, self.p, self.precision);
        for pc in &self.points {
            let verdict = match pc.verdict {
                Verdict::UniqueInBall => "unique in its ball".to_string(),
                Verdict::Inconclusive { rank } => format!("inconclusive (rank {rank})"),
            };
            let _ = writeln!(s, "  Q{} = {}: h = {}, rank M = {}, {}", pc.index, pc.point, pc.h, pc.rank, verdict);
            for row in &pc.m_mod_p {
                let r: Vec<String> = row.iter().map(u64::to_string).collect();
                let _ = writeln!(s, "      [{}]", r.join(", "));
            }
        }
        s
    }
    fn success(&self) -> bool {
        self.points.iter().all(|p| p.verdict == Verdict::UniqueInBall)
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SieveReport {
    pub problem: String,
    pub target: Option<u64>,
    pub schedule: Vec<PlaceKey>,
    pub transcript: SieveTranscript,
    pub index: String,
    /// Cosets that contain no known point above the target prime.
    pub unmatched: usize,
}

pub fn sieve(problem: &Problem, target: Option<u64>, opts: &RunOptions) -> Result<SieveReport, PipelineError> {
    let (cache, state) = pipeline::run_sieve_for(problem, target, opts)?;
    let unmatched = match target {
        Some(p) => {
            let keys: Vec<PlaceKey> = cache.places().iter().filter(|v| v.p == p).map(PlaceKey::from).collect();
            let pds = cache.get_many(&problem.mw, &keys, opts.exec)?;
            state.cosets.iter().filter(|w| mwsieve::match_known(&problem.mw, &pds, w).is_none()).count()
        }
        None => 0,
    };
    Ok(SieveReport {
        problem: problem.file.name.clone(),
        target,
        schedule: state.used.clone(),
        transcript: SieveTranscript::from_state(&state),
        index: state.index().to_string(),
        unmatched,
    })
}

impl Report for SieveReport {
    fn text(&self) -> String {
        let mut s = format!("{}: {} steps\n", self.problem, self.transcript.steps.len());
        for (i, st) in self.transcript.steps.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {:>2}. v = ({}, {})  #J = {}  index ×{}  |W| = {}",
                i + 1,
                st.place.p,
                st.place.index,
                st.jacobian_order,
                st.index_step,
                st.w_size
            );
        }
        let _ = writeln!(s, "L_s (index {}):", self.index);
        for row in &self.transcript.lattice {
            let _ = writeln!(s, "  [{}]", row.join(", "));
        }
        let _ = writeln!(s, "W_s ({} cosets):", self.transcript.cosets.len());
        for w in &self.transcript.cosets {
            let _ = writeln!(s, "  ({})", w.join(", "));
        }
        s
    }
    fn success(&self) -> bool {
        self.unmatched == 0
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SaturationReport {
    pub problem: String,
    pub bound: u64,
    pub records: Vec<SaturationRecord>,
}

pub fn saturate(problem: &Problem, bound: u64, opts: &RunOptions) -> Result<SaturationReport, PipelineError> {
    let qs = fp::primes_below(bound);
    let records = mwsieve::saturate(&problem.mw, &qs, &pipeline::saturation_config(problem, opts))?;
    Ok(SaturationReport { problem: problem.file.name.clone(), bound, records })
}

impl Report for SaturationReport {
    fn text(&self) -> String {
        let mut s = format!("{}: primes q < {}\n", self.problem, self.bound);
        for r in &self.records {
            let places: Vec<String> = r.places.iter().map(|k| format!("({}, {})", k.p, k.index)).collect();
            let status = if r.proven { "q ∤ index" } else { "not proven" };
            let _ = writeln!(s, "  q = {:>2}: {}  via {}", r.q, status, places.join(" "));
        }
        s
    }
    fn success(&self) -> bool {
        self.records.iter().all(|r| r.proven)
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub certificate: Certificate,
    #[serde(skip)]
    pub labels: Vec<String>,
}

impl Report for VerifyReport {
    fn text(&self) -> String {
        let c = &self.certificate;
        let mut s = format!("{}: ", c.problem);
        match &c.outcome {
            Outcome::Certified => s.push_str("certified\n"),
            Outcome::NotCertified { reasons } => {
                s.push_str("not certified\n");
                for r in reasons {
                    let _ = writeln!(s, "  reason: {r}");
                }
            }
        }
        let _ = writeln!(s, "  C(K) = {{{}}}", self.labels.join(", "));
        let proven = c.saturation.iter().filter(|r| r.proven).count();
        let _ = writeln!(s, "  saturation: {}/{} primes below {}", proven, c.saturation.len(), c.smoothness_bound);
        if let Some(p) = c.certifying_prime {
            let _ = writeln!(s, "  criterion prime: {p}");
        }
        let _ = writeln!(s, "  sieve: {} places, |W| = {}", c.schedule.len(), c.sieve.cosets.len());
        for r in &c.cosets {
            let _ = writeln!(s, "    w = ({}) → Q{} at p = {}, rank {}", r.w.join(", "), r.point_index, r.p, r.rank);
        }
        s
    }
    fn success(&self) -> bool {
        self.certificate.outcome == Outcome::Certified
    }
}

pub fn verify(problem: &Problem, opts: &RunOptions) -> Result<VerifyReport, PipelineError> {
    let certificate = pipeline::verify(problem, opts)?;
    let labels = problem.mw.points.iter().map(|kp| point_label(&problem.mw.nf, &kp.point)).collect();
    Ok(VerifyReport { certificate, labels })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RecheckSummary {
    pub problem: String,
    pub report: pipeline::RecheckReport,
}

impl Report for RecheckSummary {
    fn text(&self) -> String {
        let mut s = format!("{}: ", self.problem);
        if self.report.ok() {
            s.push_str("certificate replays\n");
        } else {
            s.push_str("certificate does not replay\n");
            if !self.report.problem_hash_matches {
                s.push_str("  problem hash differs\n");
            }
            for p in &self.report.problems {
                let _ = writeln!(s, "  {p}");
            }
        }
        s
    }
    fn success(&self) -> bool {
        self.report.ok()
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FixtureOutcome {
    pub fixture: String,
    pub certified: bool,
    pub points: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FermatReport {
    pub fixtures: Vec<FixtureOutcome>,
    pub candidates: Vec<FermatCandidate>,
    /// Distinct `u/v` values over the `y`-even family, in order of appearance.
    pub ratios: Vec<String>,
    pub solutions: Vec<[String; 3]>,
}

#[derive(Debug, thiserror::Error)]
pub enum FermatError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Certify every bundled curve and back-substitute its points.
pub fn fermat2310(opts: &RunOptions) -> Result<FermatReport, FermatError> {
    let mut runs = Vec::new();
    for (stem, _) in fixtures::ALL {
        let problem = fixtures::problem_file(stem)?.validate()?;
        let cert = pipeline::verify(&problem, opts)?;
        runs.push((problem, cert));
    }
    Ok(fermat_report(&runs)?)
}

/// Back-substitute the certified points of each run into the descent.
pub fn fermat_report(runs: &[(Problem, Certificate)]) -> Result<FermatReport, SchemaError> {
    let mut fixtures_out = Vec::new();
    let mut candidates = Vec::new();
    for (problem, cert) in runs {
        let certified = cert.outcome == Outcome::Certified;
        let mw = &problem.mw;
        let points: Vec<_> = cert
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| parse_point(&mw.nf, p, &format!("points[{i}]")))
            .collect::<Result<_, _>>()?;
        fixtures_out.push(FixtureOutcome {
            fixture: problem.file.name.clone(),
            certified,
            points: points.iter().map(|p| point_label(&mw.nf, p)).collect(),
        });
        if let Some(spec) = problem.file.fermat {
            candidates.extend(recover_all(&mw.nf, spec, &problem.file.name, &points));
        }
    }
    let mut ratios: Vec<String> = Vec::new();
    for r in candidates.iter().filter_map(|c| c.ratio.clone()) {
        if !ratios.contains(&r) {
            ratios.push(r);
        }
    }
    let solutions = solution_set(&candidates);
    Ok(FermatReport { fixtures: fixtures_out, candidates, ratios, solutions })
}

impl Report for FermatReport {
    fn text(&self) -> String {
        let mut s = String::new();
        for f in &self.fixtures {
            let status = if f.certified { "certified" } else { "NOT certified" };
            let _ = writeln!(s, "{}: {} {{{}}}", f.fixture, status, f.points.join(", "));
        }
        s.push('\n');
        for c in &self.candidates {
            let ratio = c.ratio.as_deref().map(|r| format!(" u/v = {r}")).unwrap_or_default();
            let outcome = match &c.recovery {
                crate::fermat::Recovery::Accepted { solutions } => {
                    let sols: Vec<String> = solutions.iter().map(|t| format!("({}, {}, {})", t[0], t[1], t[2])).collect();
                    format!("→ {}", sols.join(" "))
                }
                crate::fermat::Recovery::Rejected { reason } => format!("rejected: {reason}"),
            };
            let _ = writeln!(s, "  {} {}{}: {}", c.curve, c.point, ratio, outcome);
        }
        let _ = writeln!(s, "\nu/v values: {}", self.ratios.join(", "));
        s.push_str("Solutions of x² + y³ = z¹⁰ in coprime integers:\n");
        for t in &self.solutions {
            let _ = writeln!(s, "  ({}, {}, {})", t[0], t[1], t[2]);
        }
        s
    }
    fn success(&self) -> bool {
        self.fixtures.iter().all(|f| f.certified)
    }
}
