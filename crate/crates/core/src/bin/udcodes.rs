use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use udcodes::bounds::{theorem1_params, upper_bound, TheoremParams};
use udcodes::catalog::{self, catalog_get};
use udcodes::decimal::{round_up, truncate};
use udcodes::discovery::{tabu_search, DiscoveryOutcome, DiscoverySpec};
use udcodes::glue::{improved_sizes, weight_separation, ConstructionResult, GlueParams};
use udcodes::io::{parse_code_record, serialize_code_file};
use udcodes::search::{search_all_normalizations, search_with_progress, SearchConfig, SearchOutcome};
use udcodes::spectrum::{moments, power, spectrum, WeightDistribution};
use udcodes::table::{mismatches, render, table_rows};
use udcodes::{normalize_step1, sum_rate_seed, verify_ud, CodeSystem, Error, Moments64};

#[derive(Parser)]
#[command(
    name = "udcodes",
    version,
    about = "Uniquely decodable codes for the binary adder channel"
)]
struct Cli {
    /// Print rates at full precision instead of truncating.
    #[arg(long, global = true)]
    precision: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Code file (TOML or JSON record).
    #[arg(conflicts_with = "catalog", required_unless_present = "catalog")]
    file: Option<PathBuf>,
    /// Use a built-in code instead of a file.
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check unique decodability by exhaustive enumeration.
    Verify(Input),
    /// List every optimal negation/reordering of the system.
    Normalize(Input),
    /// Weight distribution of each constituent, or of its n-fold power.
    Spectrum {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// One-based constituent index; all when omitted.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Exact moments of each constituent weight distribution.
    Moments {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Glued construction at one parameter point.
    Improve {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: u64,
        /// Comma-separated g_2..g_T.
        #[arg(long, value_delimiter = ',')]
        g: Vec<u64>,
    },
    /// Exhaustive search over n and g.
    Search {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        nmax: u64,
        /// Cap on every g_i; grown automatically when omitted.
        #[arg(long)]
        gmax: Option<u64>,
        /// Search the system as given instead of every normalization.
        #[arg(long)]
        as_is: bool,
        /// Groups of one-based indices sharing a g value, e.g. "2,3;4,5".
        #[arg(long)]
        groups: Option<String>,
        /// One-based indices whose g is fixed to 0, e.g. "4,5".
        #[arg(long)]
        pin: Option<String>,
    },
    /// Entropy upper bound on the sum rate of T users.
    Bounds {
        #[arg(long = "T", value_name = "T")]
        users: u32,
    },
    /// Moments, improvement constants and the smallest improving n.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Largest n examined for the guaranteed improvement.
        #[arg(long, default_value_t = 10_000_000)]
        limit: u64,
    },
    /// Tabu search for a UD system with the given sizes.
    Discover {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        tenure: u64,
        /// Write the found system here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in codes, or print one.
    Catalog { name: Option<String> },
    /// Recompute the summary table and compare it with the recorded values.
    Table1,
}

enum Failure {
    /// Computation finished with a negative answer.
    Negative,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Printer {
    full: bool,
}

impl Printer {
    fn lower(&self, x: f64, digits: usize) -> String {
        if self.full {
            format!("{x}")
        } else {
            truncate(x, digits)
        }
    }

    fn upper(&self, x: f64, digits: usize) -> String {
        if self.full {
            format!("{x}")
        } else {
            round_up(x, digits)
        }
    }
}

fn load(input: &Input) -> std::result::Result<(CodeSystem, Option<String>), Failure> {
    if let Some(name) = &input.catalog {
        let e = catalog_get(name)?;
        return Ok((e.system, Some(e.name.to_string())));
    }
    let path = input.file.as_ref().expect("clap requires a file or --catalog");
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let f = parse_code_record(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((f.system, f.name))
}

fn tuple(words: &[u64]) -> String {
    let w: Vec<String> = words.iter().map(u64::to_string).collect();
    format!("({})", w.join(", "))
}

fn cmd_verify(input: &Input) -> Outcome {
    let (sys, _) = load(input)?;
    let r = verify_ud(&sys)?;
    println!("tuples {}", r.total_tuples);
    println!("distinct sums {}", r.distinct_sums);
    match &r.witness {
        None => {
            println!("UD");
            Ok(())
        }
        Some(w) => {
            println!("NOT UD");
            println!("witness {} {} sum {:?}", tuple(&w.first), tuple(&w.second), w.sum);
            Err(Failure::Negative)
        }
    }
}

fn cmd_normalize(input: &Input) -> Outcome {
    let (sys, name) = load(input)?;
    let norm = normalize_step1(&sys)?;
    println!("optima {}", norm.optima);
    if norm.truncated {
        println!("candidate list truncated to {}", norm.candidates.len());
    }
    for (k, c) in norm.candidates.iter().enumerate() {
        let order: Vec<usize> = c.order.iter().map(|i| i + 1).collect();
        println!(
            "# candidate {k}: mask {} order {order:?} min average {}",
            c.mask, c.min_average
        );
        print!("{}", serialize_code_file(&c.system, name.as_deref()));
    }
    Ok(())
}

fn print_distribution(dist: &WeightDistribution) {
    for (w, c) in dist.support() {
        println!("{w} {c}");
    }
}

fn cmd_spectrum(input: &Input, n: u64, index: Option<usize>) -> Outcome {
    let (sys, _) = load(input)?;
    let indices: Vec<usize> = match index {
        Some(i) if (1..=sys.users()).contains(&i) => vec![i - 1],
        Some(i) => return Err(Failure::Usage(format!("index {i} outside 1..={}", sys.users()))),
        None => (0..sys.users()).collect(),
    };
    for &i in &indices {
        let dist = power(&spectrum(sys.code(i), sys.dim()), n)?;
        if indices.len() > 1 {
            println!("# C{}", i + 1);
        }
        print_distribution(&dist);
    }
    Ok(())
}

fn print_moments(label: &str, m: &Moments64) {
    let rho = m.rho3.map_or("undefined".to_string(), |r| format!("{r}"));
    println!(
        "{label} mean {} variance {} abs_third {} rho3 {rho}",
        m.mean, m.variance, m.abs_third
    );
}

fn cmd_moments(input: &Input, n: u64) -> Outcome {
    let (sys, _) = load(input)?;
    for i in 0..sys.users() {
        let dist = power(&spectrum(sys.code(i), sys.dim()), n)?;
        print_moments(&format!("C{}", i + 1), &moments::<f64>(&dist));
    }
    Ok(())
}

fn print_result(p: &Printer, res: &ConstructionResult) {
    for (i, s) in res.sizes.iter().enumerate() {
        println!("|C{}*| {s}", i + 1);
    }
    println!("|A*| {}", res.a_size);
    println!("|B*| {}", res.b_size);
    println!("dim {}", res.dim);
    println!("rate {}", p.lower(res.rate, 9));
}

fn cmd_improve(p: &Printer, input: &Input, n: u64, g: Vec<u64>) -> Outcome {
    let (sys, _) = load(input)?;
    let params = GlueParams::new(n, g);
    let res = improved_sizes(&sys, &params)?;
    print_result(p, &res);
    let cert = weight_separation(&sys, &params, &res)?;
    println!(
        "separation A-side max {} B-side min {} gap {}",
        cert.a_side_max,
        cert.b_side_min,
        cert.gap()
    );
    println!("seed rate {}", p.lower(sum_rate_seed(&sys), 9));
    Ok(())
}

fn one_based_list(text: &str, users: usize) -> std::result::Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|t| {
            let i: usize = t
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad index `{t}`")))?;
            if !(2..=users).contains(&i) {
                return Err(Failure::Usage(format!("index {i} outside 2..={users}")));
            }
            Ok(i - 1)
        })
        .collect()
}

fn print_outcome(p: &Printer, out: &SearchOutcome) {
    println!("best {}", out.best.params);
    print_result(p, &out.best);
    println!("evaluated {}", out.evaluated);
    for t in &out.ties {
        println!("tie {} rate {}", t.params, p.lower(t.rate, 9));
    }
    for h in &out.cap_hits {
        println!("cap hit n={} g{}={}", h.n, h.index + 1, h.cap);
    }
    let caps: Vec<String> = out.max_caps.iter().map(u64::to_string).collect();
    println!("caps {}", caps.join(","));
}

struct SearchArgs<'a> {
    nmax: u64,
    gmax: Option<u64>,
    as_is: bool,
    groups: Option<&'a str>,
    pin: Option<&'a str>,
}

fn cmd_search(p: &Printer, input: &Input, a: SearchArgs) -> Outcome {
    let (sys, name) = load(input)?;
    let progress = |n: u64, r: f64| {
        if n.is_multiple_of(10) {
            eprintln!("n={n} best {}", truncate(r, 9));
        }
    };
    if !a.as_is && a.groups.is_none() && a.pin.is_none() {
        let all = search_all_normalizations(&sys, a.nmax, a.gmax, |k, n, r| {
            if n == 1 {
                eprintln!("candidate {k}");
            }
            progress(n, r)
        })?;
        let best = all.best();
        println!(
            "candidates {} winner {} mask {}",
            all.candidates.len(),
            all.winner,
            best.candidate.mask
        );
        print!("{}", serialize_code_file(&best.candidate.system, name.as_deref()));
        print_outcome(p, &best.outcome);
        return Ok(());
    }
    let users = sys.users();
    let mut config = SearchConfig::from_symmetries(&sys, a.nmax);
    if let Some(pin) = a.pin {
        config.zero_fixed = one_based_list(pin, users)?.into_iter().collect::<BTreeSet<_>>();
    }
    if let Some(groups) = a.groups {
        let mut parsed = groups
            .split(';')
            .map(|g| one_based_list(g, users))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let listed: BTreeSet<usize> = parsed.iter().flatten().copied().collect();
        parsed.extend((1..users).filter(|i| !listed.contains(i)).map(|i| vec![i]));
        config.groups = parsed;
    } else if a.pin.is_some() {
        config.groups = (1..users).map(|i| vec![i]).collect();
    }
    if let Some(cap) = a.gmax {
        config.g_max = Some(vec![cap; users - 1]);
    }
    let out = search_with_progress(&sys, &config, progress)?;
    print_outcome(p, &out);
    Ok(())
}

fn cmd_bounds(p: &Printer, users: u32) -> Outcome {
    if users == 0 {
        return Err(Failure::Usage("T must be at least 1".into()));
    }
    println!("upper {}", p.upper(upper_bound::<f64>(users), 4));
    Ok(())
}

fn print_theorem(p: &Printer, t: &TheoremParams<f64>, limit: u64) {
    println!("seed rate {}", p.lower(t.seed_rate, 9));
    println!("deficit {}", t.deficit);
    println!("kappa {}", t.kappa);
    let pos: Vec<usize> = t.positive_variance.iter().map(|i| i + 1).collect();
    println!("positive variance {pos:?}");
    let opt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v}"));
    println!("alpha {}", opt(t.alpha));
    println!("beta {}", opt(t.beta));
    println!("theta threshold {}", t.theta_threshold());
    match t.min_improving_n(limit) {
        Some(n) => println!(
            "smallest improving n {n} guaranteed rate {} theta {}",
            p.lower(t.guaranteed_rate(n), 9),
            t.theta(n)
        ),
        None => println!("no improving n up to {limit}"),
    }
}

fn cmd_analyze(p: &Printer, input: &Input, limit: u64) -> Outcome {
    let (sys, _) = load(input)?;
    let norm = match theorem1_params::<f64>(&sys) {
        Err(Error::NotNormalized) => {
            let cand = normalize_step1(&sys)?.candidates.remove(0);
            println!("normalized with mask {}", cand.mask);
            cand.system
        }
        _ => sys,
    };
    for i in 0..norm.users() {
        print_moments(
            &format!("C{}", i + 1),
            &moments::<f64>(&spectrum(norm.code(i), norm.dim())),
        );
    }
    print_theorem(p, &theorem1_params::<f64>(&norm)?, limit);
    Ok(())
}

/// Writes through a temporary file in the same directory so an interrupted
/// run leaves nothing behind.
fn write_atomic(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let io_err = |e: std::io::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn cmd_discover(spec: DiscoverySpec, out: Option<&Path>) -> Outcome {
    match tabu_search(&spec)? {
        DiscoveryOutcome::Found {
            system,
            iterations,
            restarts,
        } => {
            eprintln!("found after {iterations} moves, {restarts} restarts");
            let text = serialize_code_file(&system, None);
            match out {
                Some(path) => write_atomic(path, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        DiscoveryOutcome::Failed {
            best_conflicts,
            iterations,
            ..
        } => {
            println!("no UD system found in {iterations} moves; best had {best_conflicts} colliding pairs");
            Err(Failure::Negative)
        }
    }
}

fn cmd_catalog(name: Option<&str>) -> Outcome {
    let Some(name) = name else {
        for e in catalog::all() {
            println!("{:<10} T={} d={}", e.name, e.system.users(), e.system.dim());
        }
        return Ok(());
    };
    let e = catalog_get(name)?;
    print!("{}", serialize_code_file(&e.system, Some(e.name)));
    if let Some(x) = e.expected {
        println!("# best n={} g={:?} rate {}", x.params.n, x.params.g, x.rate);
    }
    Ok(())
}

fn cmd_table1() -> Outcome {
    let rows = table_rows()?;
    print!("{}", render(&rows));
    let bad = mismatches(&rows);
    for m in &bad {
        println!(
            "MISMATCH {} {}: computed {} recorded {}",
            m.name, m.field, m.computed, m.recorded
        );
    }
    if bad.is_empty() {
        println!("all rows match");
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn run(cli: Cli) -> Outcome {
    let p = Printer { full: cli.precision };
    match cli.command {
        Command::Verify(input) => cmd_verify(&input),
        Command::Normalize(input) => cmd_normalize(&input),
        Command::Spectrum { input, n, index } => cmd_spectrum(&input, n, index),
        Command::Moments { input, n } => cmd_moments(&input, n),
        Command::Improve { input, n, g } => cmd_improve(&p, &input, n, g),
        Command::Search {
            input,
            nmax,
            gmax,
            as_is,
            groups,
            pin,
        } => cmd_search(
            &p,
            &input,
            SearchArgs {
                nmax,
                gmax,
                as_is,
                groups: groups.as_deref(),
                pin: pin.as_deref(),
            },
        ),
        Command::Bounds { users } => cmd_bounds(&p, users),
        Command::Analyze { input, limit } => cmd_analyze(&p, &input, limit),
        Command::Discover {
            d,
            sizes,
            budget,
            seed,
            tenure,
            out,
        } => cmd_discover(
            DiscoverySpec::new(d, sizes).budget(budget).seed(seed).tenure(tenure),
            out.as_deref(),
        ),
        Command::Catalog { name } => cmd_catalog(name.as_deref()),
        Command::Table1 => cmd_table1(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
