use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::Path;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    AttackArg, CliError, DealArgs, GenDataArgs, LeakageArgs, ParamArgs, PlanArgs, Report, RunArgs, SimulateArgs,
    Table1Args,
};
use crate::field::Prime;
use crate::fixedpoint::Scale;
use crate::leakage::{build_system, enumerate_solutions, two_point_attack, AdversaryView, EnumerateOptions};
use crate::mpc::{deal_triples, split_triples, Role, TripleStore};
use crate::net::{accept_one, connect_with_retry, run_party, Channel};
use crate::params::{
    check_range_bound, delta_min, delta_min_admissible, max_error, modulus_requirement, suggest_prime, table1 as table,
    table1_csv, ProtocolParams,
};
use crate::protocol::{run_session, session_rngs, Direction, PartyState, Variant};
use crate::stats::{correlation_plain, SampleVector};

fn parse_prime(s: &str) -> Result<Prime, CliError> {
    let p: u64 = s
        .parse()
        .map_err(|_| CliError::Param(format!("prime must be an integer or \"auto\", got {s:?}")))?;
    Ok(Prime::new(p).map_err(crate::params::ParamError::from)?)
}

fn resolve(n: usize, args: &ParamArgs, test_mode: bool) -> Result<ProtocolParams, CliError> {
    let delta = Scale::parse(&args.delta)?;
    check_range_bound(n, args.bound, delta)?;
    let prime = if args.prime == "auto" {
        suggest_prime(n, args.bound, delta)?
    } else {
        parse_prime(&args.prime)?
    };
    Ok(if test_mode {
        ProtocolParams::relaxed(n, args.bound, delta, prime)?
    } else {
        ProtocolParams::validate(n, args.bound, delta, prime)?
    })
}

fn load_pair(a: &Path, b: &Path) -> Result<(SampleVector, SampleVector), CliError> {
    let x1 = SampleVector::load(a)?;
    let x2 = SampleVector::load(b)?;
    if x1.len() != x2.len() {
        return Err(CliError::Data(format!(
            "inputs differ in length ({} vs {})",
            x1.len(),
            x2.len()
        )));
    }
    Ok((x1, x2))
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn plan(a: PlanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut report = Report::new();
    report.add("n", a.n).add("R", a.bound);
    match &a.delta {
        Some(d) => {
            let delta = Scale::parse(d)?;
            check_range_bound(a.n, a.bound, delta)?;
            let required = modulus_requirement(a.n, a.bound, delta)?;
            let prime = match a.prime.as_deref() {
                None | Some("auto") => suggest_prime(a.n, a.bound, delta)?,
                Some(p) => parse_prime(p)?,
            };
            let params = ProtocolParams::validate(a.n, a.bound, delta, prime)?;
            let required = required.ceil().to_integer();
            report
                .add("delta", delta)
                .add("p", prime)
                .add("M", params.m)
                .add("modulus_requirement", required)
                .add("max_multiplier", params.max_multiplier())
                .add("max_error", params.max_error());
            add_minima(&mut report, a.n, a.bound, params.m)?;
        }
        None => {
            let prime = match a.prime.as_deref() {
                None | Some("auto") => Prime::new(Prime::LARGEST_32_BIT).expect("prime"),
                Some(p) => parse_prime(p)?,
            };
            report.add("p", prime).add("M", prime.half());
            add_minima(&mut report, a.n, a.bound, prime.half())?;
        }
    }
    report.write_text(out)?;
    if let Some(path) = &a.out {
        report.save_csv(path)?;
    }
    Ok(())
}

fn add_minima(report: &mut Report, n: usize, bound: f64, m: u64) -> Result<(), CliError> {
    let tabulated = delta_min(n, bound, m)?;
    let admissible = delta_min_admissible(n, bound, m)?;
    report
        .add("delta_min", sci(tabulated))
        .add("err_max", sci(max_error(n, bound, tabulated)))
        .add("delta_min_admissible", sci(admissible))
        .add("err_max_admissible", sci(max_error(n, bound, admissible)));
    Ok(())
}

pub fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (x1, x2) = load_pair(&a.input1, &a.input2)?;
    let params = resolve(x1.len(), &a.params, a.test_mode)?;
    let variant: Variant = a.variant.into();
    let session = run_session(&params, variant, &x1, &x2, a.seed)?;
    let (o1, o2) = session.outputs();
    let reference = correlation_plain(&x1, &x2)?;
    let bound = params.max_error();

    let mut report = Report::new();
    report
        .add("variant", variant)
        .add("params", &params)
        .add("output_p1", o1)
        .add("output_p2", o2)
        .add("reference", reference)
        .add("abs_difference", (o1 - reference).abs())
        .add("error_bound", bound);
    if variant == Variant::Approximate {
        let lo = (o1 - bound).max(-1.0);
        let hi = (o1 + bound).min(1.0);
        report.add("interval", format!("[{lo:.6}, {hi:.6}]"));
    }
    for (name, p) in [("p1", &session.p1), ("p2", &session.p2)] {
        let t = p.transcript();
        report
            .add(&format!("reals_sent_{name}"), t.sent_reals())
            .add(&format!("field_elements_sent_{name}"), t.sent_field_elements())
            .add(&format!("triples_consumed_{name}"), p.triples_consumed());
    }
    report.write_text(out)?;
    if let Some(path) = &a.out {
        report.save_csv(path)?;
    }
    if variant == Variant::Exact {
        let record = session.p1.leakage_record()?;
        let csv = record.to_csv(Role::P1);
        writeln!(out, "\nleakage record")?;
        out.write_all(csv.as_bytes())?;
        if let Some(path) = &a.leakage_out {
            std::fs::write(path, csv)?;
        }
    }
    Ok(())
}

pub fn run(a: RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let role = Role::from_index(a.role).expect("validated by clap");
    let data = SampleVector::load(&a.input)?;
    let params = resolve(data.len(), &a.params, false)?;
    let (mut dealer, rng1, rng2) = session_rngs(a.seed);
    let triples = match &a.triples {
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            TripleStore::read_from(BufReader::new(f), role, params.prime)?
        }
        None => {
            let (t1, t2) = split_triples(deal_triples(params.n, params.prime, &mut dealer));
            if role == Role::P1 {
                t1
            } else {
                t2
            }
        }
    };
    let rng = if role == Role::P1 { rng1 } else { rng2 };
    let state = PartyState::new(role, params, a.variant.into(), &data, triples, rng)?;

    let timeout = Duration::from_millis(a.timeout_ms);
    let stream = match role {
        Role::P1 => {
            let addr = a.listen.as_deref().unwrap_or("127.0.0.1:0");
            let listener = TcpListener::bind(addr).map_err(|e| CliError::Network(format!("bind {addr}: {e}")))?;
            let local = listener.local_addr()?;
            eprintln!("listening on {local}");
            accept_one(&listener, Some(timeout)).map_err(|e| CliError::Network(format!("accept: {e}")))?
        }
        Role::P2 => {
            let addr = a
                .connect
                .as_deref()
                .ok_or_else(|| CliError::Param("party 2 needs --connect HOST:PORT".into()))?;
            connect_with_retry(addr, timeout).map_err(|e| CliError::Network(format!("connect {addr}: {e}")))?
        }
    };
    let channel = Channel::tcp(stream, Some(timeout)).map_err(|e| CliError::Network(e.to_string()))?;
    let outcome = run_party(channel, state)?;
    writeln!(out, "output  {}", outcome.output)?;
    writeln!(out, "bytes_sent  {}", outcome.bytes_sent())?;
    if let Some(path) = &a.transcript {
        let mut w = BufWriter::new(File::create(path)?);
        for (dir, frame) in &outcome.frames {
            let tag = if *dir == Direction::Sent { "sent" } else { "recv" };
            writeln!(w, "{tag} {}", hex::encode(frame))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn deal(a: DealArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = resolve(a.n, &a.params, false)?;
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let (t1, t2) = split_triples(deal_triples(a.n, params.prime, &mut rng));
    for (store, path) in [(&t1, &a.out1), (&t2, &a.out2)] {
        let f = File::create(path)?;
        store.write_to(BufWriter::new(f))?;
    }
    writeln!(out, "dealt {} triples over F_{}", a.n, params.prime)?;
    Ok(())
}

pub fn leakage(a: LeakageArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (x1, x2) = load_pair(&a.input1, &a.input2)?;
    let params = resolve(x1.len(), &a.params, false)?;
    let session = run_session(&params, Variant::Exact, &x1, &x2, a.seed)?;
    let role = Role::from_index(a.view).expect("validated by clap");
    let view = AdversaryView::from_party(session.party(role))?;
    let mut report = Report::new();
    report.add("view", role).add("params", &params).add("r", view.r);
    match a.attack {
        AttackArg::TwoPoint => {
            let (p, q) = two_point_attack(&view)?;
            report.add("support_a", p).add("support_b", q);
            report.write_text(out)?;
        }
        AttackArg::Enumerate => {
            let system = build_system(&view)?;
            let options = EnumerateOptions {
                tolerance: a.tolerance,
                budget: a.budget,
                long_running: a.long_running,
                collect: false,
            };
            let table = enumerate_solutions(&system, params.delta, params.bound, options)?;
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            let free: Vec<String> = table.free_variables.iter().map(|j| (j + 1).to_string()).collect();
            report
                .add("free_variables", free.join(" "))
                .add("solutions", table.total);
            report.write_text(out)?;
            if let Some(dir) = &a.out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("frequencies.csv"), table.to_csv())?;
                if a.pgm {
                    std::fs::write(dir.join("frequencies.pgm"), table.to_pgm(a.cell))?;
                }
            }
        }
    }
    Ok(())
}

pub fn table1(a: Table1Args, out: &mut dyn Write) -> Result<(), CliError> {
    let csv = table1_csv(&table());
    out.write_all(csv.as_bytes())?;
    if let Some(path) = &a.out {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

pub fn gen_data(a: GenDataArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(-1.0..=1.0).contains(&a.rho) {
        return Err(CliError::Param(format!("rho must lie in [-1, 1], got {}", a.rho)));
    }
    if a.n < 2 {
        return Err(CliError::Param(format!("need n >= 2, got {}", a.n)));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let c = (1.0 - a.rho * a.rho).sqrt();
    let mut x1 = Vec::with_capacity(a.n);
    let mut x2 = Vec::with_capacity(a.n);
    for _ in 0..a.n {
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        x1.push(g1);
        x2.push(a.rho * g1 + c * g2);
    }
    for (values, path) in [(&x1, &a.out1), (&x2, &a.out2)] {
        let mut w = BufWriter::new(File::create(path)?);
        for v in values {
            writeln!(w, "{v}")?;
        }
        w.flush()?;
    }
    let r = correlation_plain(&SampleVector::new(x1)?, &SampleVector::new(x2)?)?;
    writeln!(out, "samples      {}", a.n)?;
    writeln!(out, "correlation  {r}")?;
    Ok(())
}
