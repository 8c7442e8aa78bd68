//! `recognizer`: build and check onion-domain recognizers from the shell.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use onion_recognizer::bridge::{self, parse_seed, DEFAULT_EPS, DEFAULT_Q};
use onion_recognizer::gamebench::{self, CensusReport};
use onion_recognizer::onionaddr::{encode_onion, parse_onion};
use onion_recognizer::passcode::{
    self, decode_key, validate_complete, verify_wordlist, EditMetric, WordVerdict, Wordlist,
};
use onion_recognizer::recognizer::{self, format_two_digits, parameter_table, RecognizerParams};
use onion_recognizer::store::{load_db, save_db, write_atomic};
use onion_recognizer::visualhash::{scene_of, svg_of};

#[derive(Parser)]
#[command(name = "recognizer", version, about = "Recognize onion domains by a picture only you know")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a recognizer for 2 to 5 domains.
    Init(InitArgs),
    /// Compute the fingerprint picture of a domain.
    Check(CheckArgs),
    /// Print the parameter table.
    Params(ParamsArgs),
    /// Verify or rebuild the passphrase wordlist.
    #[command(subcommand)]
    Wordlist(WordlistCommand),
    /// Run the security-game experiments.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Serve the JSON bridge for a user interface.
    #[command(subcommand)]
    Bridge(BridgeCommand),
}

#[derive(Args)]
struct InitArgs {
    /// An onion domain to recognize. Repeat for each domain.
    #[arg(long = "domain", required = true)]
    domains: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_Q)]
    q: usize,
    /// Target bound on the phishing success probability.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value = "recognizer.db")]
    db: PathBuf,
    /// Fixed seed in hex. Makes the passphrase predictable: tests only.
    #[arg(long)]
    seed: Option<String>,
    /// Add a random decoy domain, so a single real domain can be stored.
    #[arg(long)]
    decoy: bool,
}

#[derive(Args)]
struct CheckArgs {
    onion: String,
    #[arg(long)]
    db: PathBuf,
    /// Where to write the picture. Defaults to `session.svg` next to the database.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ParamsArgs {
    /// Stored-item counts, comma separated.
    #[arg(short = 'N', long = "N", value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
    items: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_Q)]
    q: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum WordlistCommand {
    /// Check size, uniqueness and minimum pairwise distance.
    Verify {
        /// A list to check instead of the built-in one.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild the list from the bundled EFF lists.
    Build {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = passcode::WORDLIST_MAX_LEN)]
        max_len: usize,
        #[arg(long, value_enum, default_value_t = Metric::Levenshtein)]
        metric: Metric,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Levenshtein,
    Indel,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Monte Carlo collision game.
    Collision {
        #[arg(long, default_value_t = 32)]
        n: u16,
        #[arg(long, default_value_t = 8)]
        m: u16,
        #[arg(short = 'N', long = "N", default_value_t = 2)]
        items: usize,
        #[arg(long, default_value_t = 16)]
        q: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value = "0")]
        seed: String,
        /// distinct-random, near-miss or adaptive-repeat.
        #[arg(long, default_value = "distinct-random")]
        adversary: String,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive strong-universality census.
    Universality {
        #[arg(long, default_value_t = 4)]
        n: u16,
        #[arg(long, default_value_t = 2)]
        m: u16,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive preimage scans of random fingerprint polynomials.
    Lemma {
        #[arg(long, default_value_t = 8)]
        m: u16,
        #[arg(long, default_value_t = 2)]
        roots: usize,
        #[arg(long, default_value_t = 1000)]
        instances: u64,
        #[arg(long, default_value = "0")]
        seed: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum BridgeCommand {
    /// Answer JSON requests on a loopback HTTP port.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Init(args) => init(args),
        Command::Check(args) => check(args),
        Command::Params(args) => params(args),
        Command::Wordlist(cmd) => wordlist(cmd),
        Command::Bench(cmd) => bench(cmd),
        Command::Bridge(BridgeCommand::Serve { port }) => serve(port),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn seed_arg(text: &str) -> Result<u64> {
    parse_seed(text).ok_or_else(|| anyhow!("seed {text:?} is not hex"))
}

fn init(args: InitArgs) -> Result<ExitCode> {
    let seed = args.seed.as_deref().map(seed_arg).transpose()?;
    if seed.is_some() {
        eprintln!("WARNING: --seed makes the passphrase predictable. Use it for tests only.");
    }
    let mut domains = args.domains;
    if args.decoy {
        let mut rng = match seed {
            Some(s) => {
                let mut r = ChaCha20Rng::seed_from_u64(s);
                r.set_stream(1);
                r
            }
            None => ChaCha20Rng::from_entropy(),
        };
        domains.push(encode_onion(&rng.gen::<[u8; 32]>())?);
    }
    let setup = bridge::setup(&domains, args.q, args.eps, seed).map_err(|r| anyhow!(error_message(&r)))?;
    save_db(&setup.instance, &args.db)?;
    let svg_path = args.db.with_extension("svg");
    write_atomic(&svg_path, setup.svg.as_bytes())?;

    let p = setup.instance.params();
    println!("passphrase:  {}", setup.passphrase);
    println!("fingerprint: {}", setup.instance.fingerprint().to_hex());
    println!("picture:     {}", svg_path.display());
    println!("database:    {}", args.db.display());
    println!(
        "parameters:  N={} q={} m={} epsilon={}",
        p.items(),
        p.q(),
        p.m(),
        format_two_digits(p.security().epsilon)
    );
    if args.decoy {
        println!("a random decoy domain was added as item {}", p.items());
    }
    println!("Write down the passphrase and remember the picture. Neither is stored.");
    Ok(ExitCode::SUCCESS)
}

fn error_message(r: &bridge::Response) -> String {
    match r {
        bridge::Response::Error {
            message, position, ..
        } => match position {
            Some(p) => format!("domain {p}: {message}"),
            None => message.clone(),
        },
        _ => "unexpected response".into(),
    }
}

/// Reads passphrase lines until one decodes, reporting each bad word.
fn read_passphrase(params: &RecognizerParams, input: &mut dyn BufRead) -> Result<recognizer::Key> {
    let list = Wordlist::shipped();
    let words = passcode::words_for_bits(params.key_bits());
    let mut line = String::new();
    loop {
        eprint!("passphrase ({words} words): ");
        io::stderr().flush().ok();
        line.clear();
        if input.read_line(&mut line)? == 0 {
            bail!("no valid passphrase entered");
        }
        let status = validate_complete(&line, list);
        let mut ok = true;
        for w in &status.words {
            match &w.verdict {
                WordVerdict::Accepted => {}
                WordVerdict::UnknownWithSuggestion { suggestion } => {
                    ok = false;
                    eprintln!("  word {}: not in the list, did you mean {suggestion:?}?", w.position);
                }
                WordVerdict::Unknown => {
                    ok = false;
                    eprintln!("  word {}: not in the list", w.position);
                }
            }
        }
        if !ok {
            continue;
        }
        match decode_key(&line, params.items(), params.m(), list) {
            Ok(key) => return Ok(key),
            Err(e) => eprintln!("  {e}"),
        }
    }
}

fn check(args: CheckArgs) -> Result<ExitCode> {
    let (params, db) = load_db(&args.db)?;
    let x = parse_onion(&args.onion).with_context(|| format!("cannot parse {:?}", args.onion))?;
    let key = read_passphrase(&params, &mut io::stdin().lock())?;
    let fp = recognizer::test(&db, &key, &x, &params)?;
    let svg_path = args
        .svg
        .unwrap_or_else(|| args.db.with_file_name("session.svg"));
    write_atomic(&svg_path, svg_of(&scene_of(&fp)?).as_bytes())?;
    println!("fingerprint: {}", fp.to_hex());
    println!("picture:     {}", svg_path.display());
    Ok(ExitCode::SUCCESS)
}

fn params(args: ParamsArgs) -> Result<ExitCode> {
    let rows = parameter_table(&args.items, args.q, args.eps)?;
    if args.json {
        println!("{}", canonical(&rows));
        return Ok(ExitCode::SUCCESS);
    }
    println!("{:>2}  {:>4}  {:>3}  {:>8}  {:>8}  {:>5}", "N", "q", "m", "epsilon", "key bits", "words");
    for r in &rows {
        println!(
            "{:>2}  {:>4}  {:>3}  {:>8}  {:>8}  {:>5}",
            r.items,
            r.q,
            r.m,
            format_two_digits(r.epsilon),
            r.key_bits,
            r.words
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn canonical<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string(&v).expect("serializable")
}

fn wordlist(cmd: WordlistCommand) -> Result<ExitCode> {
    match cmd {
        WordlistCommand::Verify { file, json } => {
            let owned;
            let list = match file {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| path.display().to_string())?;
                    owned = Wordlist::parse(&text)?;
                    &owned
                }
                None => Wordlist::shipped(),
            };
            let report = verify_wordlist(list);
            if json {
                println!("{}", canonical(&report));
            } else {
                println!("size:          {}", report.size);
                println!("duplicates:    {}", report.duplicates);
                println!("min distance:  {}", report.min_distance);
                if let Some((a, b)) = &report.closest_pair {
                    println!("closest pair:  {a} {b}");
                }
                println!("longest word:  {}", report.max_word_len);
                println!("{}", if report.passed { "PASS" } else { "FAIL" });
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        WordlistCommand::Build {
            out,
            seed,
            max_len,
            metric,
        } => {
            let seed = seed.as_deref().map(seed_arg).transpose()?.unwrap_or(passcode::WORDLIST_SEED);
            let metric = match metric {
                Metric::Levenshtein => EditMetric::Levenshtein,
                Metric::Indel => EditMetric::Indel,
            };
            let (base, pool) = passcode::eff_sources();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let list = passcode::build_wordlist(&base, &pool, max_len, passcode::WORDLIST_SIZE, metric, &mut rng)?;
            write_atomic(&out, list.to_text().as_bytes())?;
            println!("wrote {} words to {}", list.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn bench(cmd: BenchCommand) -> Result<ExitCode> {
    let (json, table) = match cmd {
        BenchCommand::Collision {
            n,
            m,
            items,
            q,
            trials,
            seed,
            adversary,
            json,
        } => {
            let params = RecognizerParams::new(n, items, q, m)?;
            let adv = gamebench::adversary_by_name(&adversary)
                .ok_or_else(|| anyhow!("unknown adversary {adversary:?}"))?;
            let r = gamebench::run_collision_mc(&params, adv.as_ref(), trials, seed_arg(&seed)?)?;
            (json, if json { r.to_json() } else { r.to_table() })
        }
        BenchCommand::Universality { n, m, k, json } => {
            let r = CensusReport::run(n, m, k)?;
            (json, if json { r.to_json() } else { r.to_table() })
        }
        BenchCommand::Lemma {
            m,
            roots,
            instances,
            seed,
            json,
        } => {
            let r = gamebench::lemma_mc(m, roots, instances, seed_arg(&seed)?)?;
            (json, if json { r.to_json() } else { r.to_table() })
        }
    };
    if json {
        println!("{table}");
    } else {
        print!("{table}");
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(port: u16) -> Result<ExitCode> {
    let server = tiny_http::Server::http(("127.0.0.1", port)).map_err(|e| anyhow!("cannot listen: {e}"))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| anyhow!("not an IP listener"))?;
    println!("listening on http://{addr}");
    io::stdout().flush().ok();
    let json = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("valid header");
    let cors = tiny_http::Header::from_bytes("Access-Control-Allow-Origin", "null").expect("valid header");
    for mut request in server.incoming_requests() {
        let (status, body) = if *request.method() == tiny_http::Method::Post {
            let mut text = String::new();
            match request.as_reader().read_to_string(&mut text) {
                Ok(_) => (200, bridge::handle_json(&text)),
                Err(_) => (400, bridge::handle_json("")),
            }
        } else {
            (405, r#"{"code":"bad-request","kind":"error","message":"POST a JSON request"}"#.to_owned())
        };
        let response = tiny_http::Response::from_string(body)
            .with_status_code(status)
            .with_header(json.clone())
            .with_header(cors.clone());
        let _ = request.respond(response);
    }
    Ok(ExitCode::SUCCESS)
}
