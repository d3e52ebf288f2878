use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use halfline_tasep::dehp::{dehp_partition, stationary_prob, BinaryWord, Regime};
use halfline_tasep::hecke::{symmetry_check, GeneratorWord};
use halfline_tasep::laws::{p_height3_two_shock_top, p_height_one_shock_top, LawFamily, LawQuery, LawValue};
use halfline_tasep::rational::to_f64;
use halfline_tasep::shock::Outcome;
use halfline_tasep::stats::{run_ensemble, run_records, EnsembleSpec, SignificancePolicy};
use halfline_tasep::suites::{run_suite, Suite, SuiteOptions};
use halfline_tasep::Rate;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, law_family, parse_observable, Config, Loaded};
use crate::{Common, Failure};

pub const OUT_DIR_ENV: &str = "HALFLINE_OUT_DIR";

/// Everything needed to re-run a command bit-identically.
#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a str,
}

struct Run {
    config: Config,
    text: String,
    seed: u64,
    out: PathBuf,
}

impl Run {
    fn start(common: &Common) -> Result<Self, Failure> {
        let Loaded { config, text } = config::load(&common.config)?;
        let seed = common.seed.or(config.run.seed).unwrap_or(0);
        let workers = common.workers.or(config.run.workers);
        if let Some(w) = workers {
            if w == 0 {
                return Err(Failure::config("workers must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(Failure::runtime)?;
        }
        let out = common
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| config.run.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Run { config, text, seed, out })
    }

    fn meta<'a>(&'a self, command: &'a str) -> Meta<'a> {
        Meta { command, version: env!("CARGO_PKG_VERSION"), seed: self.seed, config: &self.text }
    }

    fn ensure_out(&self) -> Result<(), Failure> {
        fs::create_dir_all(&self.out)
            .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", self.out.display())))
    }

    /// Writes a CSV file preceded by a `#` metadata block.
    fn write_csv(
        &self,
        command: &str,
        name: &str,
        header: &str,
        rows: &[String],
    ) -> Result<PathBuf, Failure> {
        self.ensure_out()?;
        let mut body = String::new();
        let _ = writeln!(body, "# command: {command}");
        let _ = writeln!(body, "# version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(body, "# seed: {}", self.seed);
        let _ = writeln!(body, "# config:");
        for line in self.text.lines() {
            let _ = writeln!(body, "#   {line}");
        }
        body.push_str(header);
        body.push('\n');
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        let path = self.out.join(name);
        write(&path, &body)?;
        Ok(path)
    }
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

fn section<T: Clone>(s: &Option<T>, name: &str) -> Result<T, Failure> {
    s.clone().ok_or_else(|| Failure::config(format!("missing section [{name}]")))
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Bernoulli => "bernoulli",
        Regime::Mpa => "mpa",
    }
}

pub fn simulate(common: &Common) -> Result<(), Failure> {
    let run = Run::start(common)?;
    let model = section(&run.config.model, "model")?;
    let sim = section(&run.config.simulate, "simulate")?;
    let observables = sim.observables.iter().map(|s| parse_observable(s)).collect::<Result<Vec<_>, _>>()?;
    let names: Vec<String> = observables.iter().map(|o| o.name()).collect();
    let spec = EnsembleSpec {
        initial: model.initial_condition()?,
        alpha: model.alpha()?,
        times: sim.times.clone(),
        replicas: sim.replicas,
        seed: run.seed,
        first_replica: 0,
        observables,
        scheme: sim.scheme,
    };
    spec.validate().map_err(Failure::from_core)?;

    // counts[(time index, observable index)][outcome]
    let mut counts: BTreeMap<(usize, usize), BTreeMap<Outcome, u64>> = BTreeMap::new();
    if sim.records {
        let records = run_records(&spec).map_err(Failure::from_core)?;
        let mut rows = Vec::with_capacity(records.len() * spec.times.len() * names.len());
        for (replica, per_time) in records.iter().enumerate() {
            for (i, outcomes) in per_time.iter().enumerate() {
                for (j, o) in outcomes.iter().enumerate() {
                    rows.push(format!("{replica},{},{},{o}", spec.times[i], names[j]));
                    *counts.entry((i, j)).or_default().entry(*o).or_default() += 1;
                }
            }
        }
        let path = run.write_csv("simulate", "simulate_records.csv", "replica,t,observable,value", &rows)?;
        eprintln!("wrote {}", path.display());
    } else {
        let result = run_ensemble(&spec).map_err(Failure::from_core)?;
        for i in 0..spec.times.len() {
            for j in 0..names.len() {
                let dist = result.get(i, j);
                counts.insert((i, j), dist.counts.clone());
            }
        }
    }

    let mut rows = Vec::new();
    for ((i, j), table) in &counts {
        for (o, c) in table {
            let freq = *c as f64 / spec.replicas as f64;
            rows.push(format!("{},{},{o},{c},{freq}", spec.times[*i], names[*j]));
        }
    }
    let path =
        run.write_csv("simulate", "simulate_summary.csv", "t,observable,value,count,frequency", &rows)?;
    println!("t,observable,value,count,frequency");
    for r in &rows {
        println!("{r}");
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

const LAW_HEADER: &str = "family,p,q,argument,alpha,regime,assumes_conjecture,exact,value";

fn law_row(family: LawFamily, p: usize, q: usize, arg: Option<usize>, alpha: &Rate, v: &LawValue) -> String {
    let arg = arg.map(|a| a.to_string()).unwrap_or_default();
    format!(
        "{},{p},{q},{arg},{alpha},{},{},{},{}",
        family.name(),
        regime_name(v.regime),
        v.assumes_conjecture,
        v.value,
        to_f64(&v.value)
    )
}

/// Every admissible argument of a height family, `None` for the others.
fn support(family: LawFamily, p: usize, q: usize) -> Vec<Option<usize>> {
    match family {
        LawFamily::OneShockExist | LawFamily::TwoShockExist => vec![None],
        LawFamily::OneShockHeight => (0..=q + 1).map(Some).collect(),
        LawFamily::TwoShockHeight3 => (0..=p + 1).map(Some).collect(),
    }
}

fn law_value(
    family: LawFamily,
    p: usize,
    q: usize,
    arg: Option<usize>,
    alpha: &Rate,
) -> Result<LawValue, Failure> {
    match family {
        LawFamily::OneShockHeight if arg == Some(q + 1) => {
            return p_height_one_shock_top(p, q, alpha).map_err(Failure::from_core)
        }
        LawFamily::TwoShockHeight3 if arg == Some(p + 1) => {
            return p_height3_two_shock_top(p, q, alpha).map_err(Failure::from_core)
        }
        _ => {}
    }
    LawQuery { family, params: (p, q), argument: arg, alpha: alpha.clone() }
        .evaluate()
        .map_err(Failure::from_core)
}

fn law_rows(
    family: LawFamily,
    p: usize,
    q: usize,
    args: &[Option<usize>],
    alpha: &Rate,
) -> Result<Vec<String>, Failure> {
    args.iter()
        .map(|&a| law_value(family, p, q, a, alpha).map(|v| law_row(family, p, q, a, alpha, &v)))
        .collect()
}

fn emit(run: &Run, command: &str, name: &str, header: &str, rows: &[String]) -> Result<(), Failure> {
    let path = run.write_csv(command, name, header, rows)?;
    println!("{header}");
    for r in rows {
        println!("{r}");
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn exact(common: &Common) -> Result<(), Failure> {
    let run = Run::start(common)?;
    let ex = section(&run.config.exact, "exact")?;
    let alpha = ex.alpha.rate()?;
    if ex.family == "dehp" {
        let word = ex.word.as_deref().ok_or_else(|| Failure::config("missing key exact.word"))?;
        let eta: BinaryWord = word.parse().map_err(Failure::config)?;
        let z = dehp_partition(&eta, &alpha);
        let p = stationary_prob(&eta, &alpha);
        let prefix = format!("{eta},{alpha},{},{}", regime_name(p.regime), p.assumes_conjecture);
        let mut rows: Vec<String> =
            z.z.iter().enumerate().map(|(k, zk)| format!("{prefix},Z_{k},{zk},{}", to_f64(zk))).collect();
        rows.push(format!("{prefix},probability,{},{}", p.value, to_f64(&p.value)));
        let header = "word,alpha,regime,assumes_conjecture,quantity,exact,value";
        return emit(&run, "exact", "exact.csv", header, &rows);
    }
    let family = law_family(&ex.family)?;
    let need = |v: Option<usize>, k: &str| v.ok_or_else(|| Failure::config(format!("missing key exact.{k}")));
    let (p, q) = match family {
        LawFamily::OneShockExist | LawFamily::OneShockHeight => (need(ex.m1, "m1")?, need(ex.m2, "m2")?),
        LawFamily::TwoShockExist | LawFamily::TwoShockHeight3 => (need(ex.n, "n")?, need(ex.m, "m")?),
    };
    let args = match ex.argument {
        Some(a) => vec![Some(a)],
        None => support(family, p, q),
    };
    let rows = law_rows(family, p, q, &args, &alpha)?;
    emit(&run, "exact", "exact.csv", LAW_HEADER, &rows)
}

pub fn sweep(common: &Common) -> Result<(), Failure> {
    let run = Run::start(common)?;
    let sw = section(&run.config.sweep, "sweep")?;
    let family = law_family(&sw.family)?;
    let alphas = sw.alpha.iter().map(|a| a.rate()).collect::<Result<Vec<_>, _>>()?;
    if alphas.is_empty() || sw.p.is_empty() || sw.q.is_empty() {
        return Err(Failure::config("sweep grid is empty"));
    }
    let mut grid = Vec::new();
    for a in &alphas {
        for &p in &sw.p {
            for &q in &sw.q {
                let args = match &sw.argument {
                    Some(list) => list.iter().map(|&x| Some(x)).collect(),
                    None => support(family, p, q),
                };
                grid.push((a.clone(), p, q, args));
            }
        }
    }
    let rows: Vec<Vec<String>> =
        grid.par_iter().map(|(a, p, q, args)| law_rows(family, *p, *q, args, a)).collect::<Result<_, _>>()?;
    let rows: Vec<String> = rows.into_iter().flatten().collect();
    emit(&run, "sweep", "sweep.csv", LAW_HEADER, &rows)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    meta: Meta<'a>,
    report: &'a halfline_tasep::suites::SuiteReport,
}

pub fn verify(common: &Common) -> Result<(), Failure> {
    let run = Run::start(common)?;
    let v = section(&run.config.verify, "verify")?;
    let suite = Suite::parse(&v.suite).map_err(Failure::from_core)?;
    let mut opts = SuiteOptions {
        seed: common.seed.or(run.config.run.seed).unwrap_or(SuiteOptions::default().seed),
        ..SuiteOptions::default()
    };
    if let Some(s) = v.replica_scale {
        if !(s.is_finite() && s > 0.0) {
            return Err(Failure::config("verify.replica_scale must be positive"));
        }
        opts.replica_scale = s;
    }
    if let Some(z) = v.z_threshold {
        if !(z.is_finite() && z > 0.0) {
            return Err(Failure::config("verify.z_threshold must be positive"));
        }
        opts.policy = SignificancePolicy { z_threshold: z };
    }
    let run = Run { seed: opts.seed, ..run };
    let report = run_suite(suite, &opts).map_err(Failure::from_core)?;

    let mut rows = Vec::new();
    for c in &report.criteria {
        println!(
            "criterion {:>2}: {} {}{} ({:.1}s)",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.title,
            if c.assumes_conjecture { " [assumes stationarity conjecture]" } else { "" },
            c.seconds
        );
        for l in &c.lines {
            println!("    {l}");
        }
        rows.push(format!(
            "{},\"{}\",{},{},{:.3}",
            c.id,
            c.title.replace('"', "\"\""),
            c.pass,
            c.assumes_conjecture,
            c.seconds
        ));
    }
    run.write_csv("verify", "verify_summary.csv", "criterion,title,pass,assumes_conjecture,seconds", &rows)?;
    let json = serde_json::to_string_pretty(&VerifyOutput { meta: run.meta("verify"), report: &report })
        .map_err(Failure::runtime)?;
    let path = run.out.join(format!("verify_{}.json", suite.name()));
    write(&path, &json)?;
    eprintln!("wrote {}", path.display());
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("suite {} has failing criteria", suite.name())))
    }
}

pub fn hecke_check(common: &Common) -> Result<(), Failure> {
    let run = Run::start(common)?;
    let h = section(&run.config.hecke, "hecke")?;
    let tol = h.tolerance.unwrap_or(1e-10);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::config("hecke.tolerance must be nonnegative"));
    }
    let words = h
        .words
        .iter()
        .map(|w| GeneratorWord::new(h.n, w.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::from_core)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for &alpha in &h.alpha {
        for &t in &h.t {
            for (w, letters) in words.iter().zip(&h.words) {
                let tv = symmetry_check(h.n, alpha, t, w).map_err(Failure::from_core)?;
                let ok = tv <= tol;
                pass &= ok;
                let word: Vec<String> = letters.iter().map(|l| l.to_string()).collect();
                rows.push(format!("{},{alpha},{t},{},{tv:e},{ok}", h.n, word.join(" ")));
            }
        }
    }
    emit(&run, "hecke-check", "hecke_check.csv", "n,alpha,t,word,tv,pass", &rows)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("TV distance above {tol:e}")))
    }
}
