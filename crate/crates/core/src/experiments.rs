//! Reproducible experiment runner: Monte Carlo estimates over uniform
//! mappings, exact small-n tables, branching-process checks, constants
//! and the √n-law fit.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Pow;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{self, FitRow};
use crate::branching::{self, DEFAULT_PROGENY_CAP};
use crate::error::{Error, Result};
use crate::exact::{self, ExactCount};
use crate::mapping::{classify, sample_into, ClassificationFlags, CrownAnalyzer, Decomposition};
use crate::stats::{chi_square, BinomialEstimate};
use crate::stream::substream;

/// Largest `n · samples` run without `force`.
pub const VERTEX_BUDGET: f64 = 2e10;

/// First line of every estimate CSV.
pub const CSV_VERSION_LINE: &str = "# highest-trees estimates v1";
pub const CSV_HEADER: &str = "n,event,samples,hits,p_hat,stderr,ci_lo,ci_hi,sqrt_n_scaled,seed,wall_time_s";

/// Samples per work unit; only affects scheduling, never the output.
const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    UniqueHighest,
    TwoHighest,
    KHighest(usize),
    CrownOk,
    Margin2,
    BranchUnique(u32),
    BranchCrownOk(u32),
}

impl Event {
    /// Builds an event from its CLI name and the optional `--c` / `--k`.
    pub fn from_parts(name: &str, c: Option<u32>, k: Option<usize>) -> Result<Event> {
        let need_c = || c.ok_or_else(|| Error::InvalidConfig(format!("event {name} needs --c")));
        let ev = match name {
            "unique-highest" => Event::UniqueHighest,
            "two-highest" => Event::TwoHighest,
            "crown-ok" => Event::CrownOk,
            "margin2" => Event::Margin2,
            "k-highest" => Event::KHighest(k.ok_or_else(|| Error::InvalidConfig("k-highest needs --k".into()))?),
            "c-branch-unique" => Event::BranchUnique(need_c()?),
            "c-crown-ok" => Event::BranchCrownOk(need_c()?),
            other => return Err(Error::InvalidConfig(format!("unknown event {other:?}"))),
        };
        ev.validate()?;
        Ok(ev)
    }

    pub fn validate(&self) -> Result<()> {
        if let Event::KHighest(k) = self {
            if *k < 2 {
                return Err(Error::InvalidConfig(format!("k-highest needs k >= 2, got {k}")));
            }
        }
        Ok(())
    }

    /// Branch level the event looks at.
    pub fn level(&self) -> u32 {
        match self {
            Event::BranchUnique(c) | Event::BranchCrownOk(c) => *c,
            _ => 0,
        }
    }

    pub fn holds(&self, f: &ClassificationFlags) -> bool {
        match self {
            Event::UniqueHighest | Event::BranchUnique(_) => f.unique_highest,
            Event::TwoHighest => f.exactly_k_highest(2),
            Event::KHighest(k) => f.exactly_k_highest(*k),
            Event::CrownOk | Event::BranchCrownOk(_) => f.crown_ok,
            Event::Margin2 => f.margin_ge_2,
        }
    }

    /// The event is typical and its complement is the `Θ(1/√n)` side.
    pub fn complement_is_rare(&self) -> bool {
        !matches!(self, Event::TwoHighest | Event::KHighest(_))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::UniqueHighest => write!(f, "unique-highest"),
            Event::TwoHighest => write!(f, "two-highest"),
            Event::KHighest(k) => write!(f, "k-highest({k})"),
            Event::CrownOk => write!(f, "crown-ok"),
            Event::Margin2 => write!(f, "margin2"),
            Event::BranchUnique(c) => write!(f, "c-branch-unique({c})"),
            Event::BranchCrownOk(c) => write!(f, "c-crown-ok({c})"),
        }
    }
}

impl FromStr for Event {
    type Err = Error;

    /// Accepts the labels written by [`fmt::Display`].
    fn from_str(s: &str) -> Result<Event> {
        let s = s.trim();
        let Some((name, rest)) = s.split_once('(') else {
            return Event::from_parts(s, None, None);
        };
        let arg = rest.strip_suffix(')').ok_or_else(|| Error::InvalidConfig(format!("malformed event {s:?}")))?;
        let bad = |_| Error::InvalidConfig(format!("malformed event parameter in {s:?}"));
        match name {
            "k-highest" => Event::from_parts(name, None, Some(arg.parse().map_err(bad)?)),
            _ => Event::from_parts(name, Some(arg.parse().map_err(bad)?), None),
        }
    }
}

impl Serialize for Event {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Exact,
    Gw,
    Constants,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    /// All events are evaluated on the same draws.
    pub events: Vec<Event>,
    /// Worker count; 0 lets the pool decide.
    pub threads: usize,
    pub format: OutputFormat,
    pub output: Option<std::path::PathBuf>,
    /// Lift the vertex budget guard.
    pub force: bool,
    /// Record wall time; off makes the output a pure function of the config.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn simulate(n: Vec<usize>, samples: u64, seed: u64, events: Vec<Event>) -> Self {
        ExperimentConfig {
            mode: Mode::Simulate,
            n,
            samples,
            seed,
            events,
            threads: 0,
            format: OutputFormat::Csv,
            output: None,
            force: false,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.n.is_empty() {
            return Err(Error::InvalidConfig("no sizes given".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n > u32::MAX as usize) {
            return Err(Error::InvalidSize(format!("n = {n} is not a usable mapping size")));
        }
        if self.events.is_empty() {
            return Err(Error::InvalidConfig("no event given".into()));
        }
        for ev in &self.events {
            ev.validate()?;
        }
        if !self.force {
            for &n in &self.n {
                let work = n as f64 * self.samples as f64;
                if work > VERTEX_BUDGET {
                    return Err(Error::Budget(format!("n * samples = {work:.3e} exceeds {VERTEX_BUDGET:.0e}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub n: usize,
    pub event: Event,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `p̂ √n`.
    pub sqrt_n_scaled: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl EstimateRow {
    pub fn new(n: usize, event: Event, samples: u64, hits: u64, seed: u64, wall_time_s: f64) -> Self {
        let est = BinomialEstimate::new(hits, samples);
        let (ci_lo, ci_hi) = est.ci95();
        EstimateRow {
            n,
            event,
            samples,
            hits,
            p_hat: est.p_hat(),
            stderr: est.stderr(),
            ci_lo,
            ci_hi,
            sqrt_n_scaled: est.p_hat() * (n as f64).sqrt(),
            seed,
            wall_time_s,
        }
    }

    pub fn estimate(&self) -> BinomialEstimate {
        BinomialEstimate::new(self.hits, self.samples)
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3}",
            self.n,
            self.event,
            self.samples,
            self.hits,
            self.p_hat,
            self.stderr,
            self.ci_lo,
            self.ci_hi,
            self.sqrt_n_scaled,
            self.seed,
            self.wall_time_s
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<EstimateRow> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 11 {
            return Err(Error::InvalidConfig(format!("expected 11 columns, got {}: {line:?}", fields.len())));
        }
        fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
            s.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad {what} {s:?}")))
        }
        let n: usize = num(fields[0], "n")?;
        let samples: u64 = num(fields[2], "samples")?;
        let hits: u64 = num(fields[3], "hits")?;
        if hits > samples || samples == 0 {
            return Err(Error::InvalidConfig(format!("hits {hits} / samples {samples}")));
        }
        Ok(EstimateRow::new(
            n,
            fields[1].parse()?,
            samples,
            hits,
            num(fields[9], "seed")?,
            num(fields[10], "wall_time_s")?,
        ))
    }
}

pub fn write_csv<W: Write>(rows: &[EstimateRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

pub fn to_csv_string(rows: &[EstimateRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses estimate rows, skipping `#` comments, blank lines and the header.
pub fn read_csv(text: &str) -> Result<Vec<EstimateRow>> {
    text.lines()
        .filter(|l| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#') && l != CSV_HEADER
        })
        .map(EstimateRow::parse_csv_line)
        .collect()
}

/// Per-worker scratch for the simulation loop.
struct Worker {
    image: Vec<u32>,
    decomposition: Decomposition,
    analyzer: CrownAnalyzer,
    flags: Vec<ClassificationFlags>,
}

impl Worker {
    fn new() -> Self {
        Worker {
            image: Vec::new(),
            decomposition: Decomposition::default(),
            analyzer: CrownAnalyzer::default(),
            flags: Vec::new(),
        }
    }

    fn run(
        &mut self,
        n: usize,
        seed: u64,
        samples: std::ops::Range<u64>,
        levels: &[u32],
        events: &[(Event, usize)],
    ) -> Vec<u64> {
        let mut hits = vec![0u64; events.len()];
        for index in samples {
            let mut rng = substream(seed, index);
            sample_into(n, &mut rng, &mut self.image).expect("size validated");
            self.decomposition.rebuild(&self.image);
            self.flags.clear();
            for &c in levels {
                let report = self.analyzer.report(&self.decomposition, c);
                self.flags.push(classify(&report));
            }
            for (h, (ev, li)) in hits.iter_mut().zip(events) {
                *h += ev.holds(&self.flags[*li]) as u64;
            }
        }
        hits
    }
}

/// Hit counts of each event over samples `0..samples` of size `n`.
///
/// Sample `i` is drawn from the substream `(seed, i)`, so counts do not
/// depend on how the work is split.
pub fn count_events(n: usize, samples: u64, seed: u64, events: &[Event]) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::InvalidSize("n must be positive".into()));
    }
    let mut levels: Vec<u32> = events.iter().map(Event::level).collect();
    levels.sort_unstable();
    levels.dedup();
    let indexed: Vec<(Event, usize)> =
        events.iter().map(|e| (*e, levels.binary_search(&e.level()).expect("level listed"))).collect();
    let chunks = samples.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map_init(Worker::new, |w, i| w.run(n, seed, i * CHUNK..((i + 1) * CHUNK).min(samples), &levels, &indexed))
        .reduce(
            || vec![0; events.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hits)
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// One row per `(n, event)`, in the order given by the config.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Vec<EstimateRow>> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        let mut rows = Vec::with_capacity(cfg.n.len() * cfg.events.len());
        for &n in &cfg.n {
            let start = Instant::now();
            let hits = count_events(n, cfg.samples, cfg.seed, &cfg.events)?;
            let wall = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            for (ev, h) in cfg.events.iter().zip(hits) {
                rows.push(EstimateRow::new(n, *ev, cfg.samples, h, cfg.seed, wall));
            }
        }
        Ok(rows)
    })?
}

/// Exact tables for one `n` with the cross-checks against closed forms.
#[derive(Debug, Clone)]
pub struct ExactReport {
    pub counts: ExactCount,
    /// `λ`-histogram over `n^n` equals the closed-form law at every `k`.
    pub lambda_matches: bool,
    /// Enumerated bounded-height counts equal the series counts at every `h`.
    pub height_matches: bool,
}

impl ExactReport {
    pub fn to_json(&self) -> Value {
        let n = self.counts.n;
        let nn: BigUint = Pow::pow(BigUint::from(n), n as u32);
        let lambda: Vec<Value> = (1..=n)
            .map(|k| {
                let hist = BigRational::new(self.counts.lambda_hist[k].into(), nn.clone().into());
                json!({"k": k, "empirical": hist.to_string(), "exact": exact::lambda_pmf_exact(n, k).to_string()})
            })
            .collect();
        json!({
            "counts": self.counts.to_json(),
            "lambda_check": lambda,
            "lambda_matches": self.lambda_matches,
            "height_matches": self.height_matches,
        })
    }
}

pub fn exact_report(n: usize, force: bool) -> Result<ExactReport> {
    let counts = exact::enumerate_all(n, force)?;
    let nn: BigUint = Pow::pow(BigUint::from(n), n as u32);
    let lambda_matches = (1..=n)
        .all(|k| BigRational::new(counts.lambda_hist[k].into(), nn.clone().into()) == exact::lambda_pmf_exact(n, k))
        && counts.lambda_hist[0] == 0;
    let height_matches =
        (0..n).all(|h| BigUint::from(counts.height_at_most(h)) == exact::count_height_le_exact(n, h as u32));
    Ok(ExactReport { counts, lambda_matches, height_matches })
}

/// Exact reports for `n = 1..=max_n`.
pub fn run_exact(max_n: usize, force: bool) -> Result<Vec<ExactReport>> {
    if max_n == 0 {
        return Err(Error::InvalidSize("max-n must be positive".into()));
    }
    if max_n > exact::ENUMERATION_GUARD && !force {
        return Err(Error::Budget(format!("exact enumeration is limited to n <= {}", exact::ENUMERATION_GUARD)));
    }
    (1..=max_n).map(|n| exact_report(n, force)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalRow {
    pub t: usize,
    pub trials: u64,
    pub alive: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub exact: f64,
    pub t_p_hat: f64,
    pub t_exact: f64,
    pub z: f64,
}

/// Survival of a one-founder process at each horizon in `ts`, from one set
/// of traces run to the largest horizon.
pub fn survival_sweep(ts: &[usize], trials: u64, seed: u64) -> Result<Vec<SurvivalRow>> {
    let horizon = *ts.iter().max().ok_or_else(|| Error::InvalidConfig("no horizons".into()))?;
    if horizon == 0 || trials == 0 {
        return Err(Error::InvalidConfig("horizon and trials must be positive".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let alive = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut alive = vec![0u64; ts.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let tr = branching::simulate(1, horizon, DEFAULT_PROGENY_CAP, &mut substream(seed, i))
                    .expect("valid parameters");
                for (a, &t) in alive.iter_mut().zip(ts) {
                    // unobserved only when the cap cut the line short: it was alive
                    *a += tr.mu(0, t).is_none_or(|m| m > 0) as u64;
                }
            }
            alive
        })
        .reduce(
            || vec![0; ts.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(ts
        .iter()
        .zip(alive)
        .map(|(&t, a)| {
            let est = BinomialEstimate::new(a, trials);
            let exact = branching::survival_prob_exact(t);
            SurvivalRow {
                t,
                trials,
                alive: a,
                p_hat: est.p_hat(),
                stderr: est.stderr(),
                exact,
                t_p_hat: t as f64 * est.p_hat(),
                t_exact: t as f64 * exact,
                z: est.z_against(exact),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgenyReport {
    pub founders: usize,
    pub trials: u64,
    pub k_max: u64,
    /// Index `k - founders`; the last entry counts `ν_N > k_max`.
    pub observed: Vec<u64>,
    pub expected_probs: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square of simulated total progeny against the Borel–Tanner law.
pub fn progeny_check(founders: usize, trials: u64, k_max: u64, seed: u64) -> Result<ProgenyReport> {
    if founders == 0 || trials == 0 || k_max < founders as u64 {
        return Err(Error::InvalidConfig("need founders >= 1, trials >= 1, k_max >= founders".into()));
    }
    let bins = (k_max - founders as u64 + 2) as usize;
    let chunks = trials.div_ceil(CHUNK);
    let observed = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; bins];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                // a line with at most k_max particles dies within k_max generations
                let tr = branching::simulate(founders, k_max as usize, k_max, &mut substream(seed, i))
                    .expect("valid parameters");
                match tr.total_progeny() {
                    Some(nu) if !tr.truncated => hist[(nu - founders as u64) as usize] += 1,
                    _ => hist[bins - 1] += 1,
                }
            }
            hist
        })
        .reduce(
            || vec![0; bins],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut probs: Vec<f64> = (founders as u64..=k_max).map(|k| branching::borel_tanner_pmf(founders, k)).collect();
    let body: f64 = probs.iter().sum();
    probs.push((1.0 - body).max(0.0));
    let (chi2, dof, p_value) = chi_square(&observed, &probs, 5.0);
    Ok(ProgenyReport { founders, trials, k_max, observed, expected_probs: probs, chi2, dof, p_value })
}

#[derive(Debug, Clone, Serialize)]
pub struct FoundersRow {
    pub founders: usize,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub exact: f64,
    pub z: f64,
}

/// `P(|μ_N(1)/N − 1| > 1/2)` simulated against the Poisson(N) tail.
pub fn founders_sweep(ns: &[usize], trials: u64, seed: u64) -> Result<Vec<FoundersRow>> {
    ns.par_iter()
        .map(|&n| {
            let est = branching::founders_generation_check(n, trials, &mut substream(seed, n as u64))?;
            let exact = branching::founders_tail_exact(n);
            Ok(FoundersRow { founders: n, trials, hits: est.hits, p_hat: est.p_hat(), exact, z: est.z_against(exact) })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ForestReport {
    pub founders: usize,
    pub total: u64,
    pub trials: u64,
    pub mean_attempts: f64,
    /// Level profiles (vertices per height) in a fixed order.
    pub profiles: Vec<Vec<u64>>,
    pub observed: Vec<u64>,
    pub expected_probs: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Level-profile law of the forest hanging off the cycles, over all
/// mappings of `[n]` with exactly `lambda` cyclic vertices.
pub fn mapping_forest_profiles(n: usize, lambda: usize) -> Result<Vec<(Vec<u64>, u64)>> {
    if n == 0 || n > exact::ENUMERATION_GUARD {
        return Err(Error::Budget(format!("profile enumeration needs 1 <= n <= {}", exact::ENUMERATION_GUARD)));
    }
    let total = (n as u64).pow(n as u32);
    let mut tally = std::collections::BTreeMap::<Vec<u64>, u64>::new();
    let mut image = vec![0u32; n];
    let mut d = Decomposition::default();
    for mut x in 0..total {
        for slot in image.iter_mut() {
            *slot = (x % n as u64) as u32;
            x /= n as u64;
        }
        d.rebuild(&image);
        if d.lambda() != lambda {
            continue;
        }
        let mut profile = vec![0u64; d.max_height() as usize + 1];
        for &h in d.heights() {
            profile[h as usize] += 1;
        }
        *tally.entry(profile).or_default() += 1;
    }
    Ok(tally.into_iter().collect())
}

/// Conditioned branching forests against mapping forests with the same
/// root and vertex counts.
pub fn forest_uniformity_check(founders: usize, total: u64, trials: u64, seed: u64) -> Result<ForestReport> {
    let exact_profiles = mapping_forest_profiles(total as usize, founders)?;
    let weight: u64 = exact_profiles.iter().map(|(_, w)| w).sum();
    let profiles: Vec<Vec<u64>> = exact_profiles.iter().map(|(p, _)| p.clone()).collect();
    let probs: Vec<f64> = exact_profiles.iter().map(|&(_, w)| w as f64 / weight as f64).collect();
    let samples: Vec<(Vec<u64>, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let c = branching::conditioned_sample(founders, total, 1_000_000, &mut substream(seed, i))?;
            Ok((c.trace.level_profile(), c.attempts))
        })
        .collect::<Result<_>>()?;
    let mut observed = vec![0u64; profiles.len()];
    let mut attempts = 0u64;
    for (p, a) in &samples {
        attempts += a;
        match profiles.binary_search(p) {
            Ok(i) => observed[i] += 1,
            Err(_) => return Err(Error::InvalidConfig(format!("profile {p:?} has no mapping counterpart"))),
        }
    }
    let (chi2, dof, p_value) = chi_square(&observed, &probs, 5.0);
    Ok(ForestReport {
        founders,
        total,
        trials,
        mean_attempts: attempts as f64 / trials as f64,
        profiles,
        observed,
        expected_probs: probs,
        chi2,
        dof,
        p_value,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub rho_printed: f64,
    pub rho_series: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub tail_bound: f64,
    pub terms_used: u64,
    pub bracket_printed: String,
    pub bracket_recomputed: String,
}

/// Tolerance on the series sum in the constants report.
pub const SERIES_TOL: f64 = 1e-12;

pub fn run_constants() -> ConstantsReport {
    let s = asymptotics::series_sum(SERIES_TOL);
    ConstantsReport {
        rho_printed: asymptotics::rho_printed_constant(),
        rho_series: asymptotics::rho_series_constant(SERIES_TOL).value,
        s: s.value,
        tail_bound: s.tail_bound,
        terms_used: s.terms_used,
        bracket_printed: "827/144".into(),
        bracket_recomputed: asymptotics::printed_bracket_terms().to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub name: String,
    pub value: f64,
    /// `(c − value)/se_c`.
    pub distance_se: f64,
    pub inside_ci95: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub event: Event,
    /// `"p_hat"` or `"1 - p_hat"`.
    pub quantity: String,
    pub ns: Vec<usize>,
    pub c: f64,
    pub se_c: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub b: f64,
    pub se_b: f64,
    pub chi2: f64,
    pub dof: usize,
    pub residuals: Vec<f64>,
    pub candidates: Vec<Candidate>,
}

impl FitReport {
    /// `|c₁ − c₂|` in units of the combined standard error.
    pub fn distance_to(&self, o: &FitReport) -> f64 {
        (self.c - o.c).abs() / (self.se_c * self.se_c + o.se_c * o.se_c).sqrt()
    }
}

/// Fits `c` for one event from rows across at least three sizes.
pub fn fit_event(rows: &[EstimateRow], event: Event) -> Result<FitReport> {
    let picked: Vec<&EstimateRow> = rows.iter().filter(|r| r.event == event).collect();
    let complement = event.complement_is_rare();
    let pts: Vec<FitRow> = picked
        .iter()
        .map(|r| FitRow { n: r.n as f64, p_hat: if complement { 1.0 - r.p_hat } else { r.p_hat }, stderr: r.stderr })
        .collect();
    let fit = asymptotics::fit_sqrt_law(&pts)?;
    let (ci_lo, ci_hi) = fit.ci95();
    let candidates = [
        ("rho_printed", asymptotics::rho_printed_constant()),
        ("rho_series", asymptotics::rho_series_constant(SERIES_TOL).value),
    ]
    .into_iter()
    .map(|(name, value)| Candidate {
        name: name.into(),
        value,
        distance_se: fit.distance(value),
        inside_ci95: (ci_lo..=ci_hi).contains(&value),
    })
    .collect();
    Ok(FitReport {
        event,
        quantity: if complement { "1 - p_hat" } else { "p_hat" }.into(),
        ns: picked.iter().map(|r| r.n).collect(),
        c: fit.c,
        se_c: fit.se_c,
        ci_lo,
        ci_hi,
        b: fit.b,
        se_b: fit.se_b,
        chi2: fit.chi2,
        dof: fit.dof,
        residuals: fit.residuals,
        candidates,
    })
}

/// Fits every event present in `rows`, in order of first appearance.
pub fn run_fit(rows: &[EstimateRow]) -> Result<Vec<FitReport>> {
    let mut events: Vec<Event> = Vec::new();
    for r in rows {
        if !events.contains(&r.event) {
            events.push(r.event);
        }
    }
    if events.is_empty() {
        return Err(Error::Fit("no rows".into()));
    }
    events.into_iter().map(|e| fit_event(rows, e)).collect()
}

/// Exact probability of `event` among all mappings of `[n]`, from enumeration.
pub fn exact_event_probability(counts: &ExactCount, event: Event) -> Option<f64> {
    let lv = counts.level(event.level())?;
    let hits = match event {
        Event::UniqueHighest | Event::BranchUnique(_) => lv.unique_highest,
        Event::TwoHighest => lv.exactly_k(2),
        Event::KHighest(k) => lv.exactly_k(k),
        Event::CrownOk | Event::BranchCrownOk(_) => lv.crown_ok,
        Event::Margin2 => lv.margin_ge_2,
    };
    Some(hits as f64 / counts.total as f64)
}
