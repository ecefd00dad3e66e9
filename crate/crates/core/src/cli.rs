//! Command-line surface: argument parsing, report records, CSV/JSONL
//! encodings and the on-disk genus cache.
//!
//! Exit codes follow sysexits: 0 success, 2 domain error, 64 usage error,
//! 74 I/O error.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{curly_l_rank0, l_value, real_period, tunnell_counts};
use crate::arith::root_number;
use crate::certify::{classify, density_report, scan_with_jobs, ClassifyOptions, ScanItem, Status, Verdict};
use crate::classgroup::{class_group, prime_discriminants, GenusEntry, GenusTable};
use crate::error::Error;
use crate::parity::Convention;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub const CSV_HEADER: &str = "n,status,rules,s1,s2,g,h2,tunnell_a,tunnell_b,point_x,point_y,ms";
pub const CACHE_ENV: &str = "CNUM_CACHE";
pub const DEFAULT_CACHE: &str = ".cnum/genus.tsv";

/// One classified `n` as written by `classify` and `scan`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub n: u64,
    pub status: String,
    pub provenance: Vec<String>,
    pub s1: Option<u8>,
    pub s2: Option<u8>,
    pub g: Option<u64>,
    pub h2: Option<u32>,
    pub tunnell_a: u64,
    pub tunnell_b: u64,
    pub point_x: Option<String>,
    pub point_y: Option<String>,
    pub ms: Option<u64>,
}

impl ReportRecord {
    pub fn from_verdict(v: &Verdict, ms: Option<u64>) -> Self {
        let h2 = match v.genus {
            Some(e) => Some(e.h2),
            None => prime_discriminants(v.n).ok().map(|p| p.len() as u32 - 1),
        };
        ReportRecord {
            n: v.n,
            status: v.status.as_str().to_string(),
            provenance: v.rule_ids(),
            s1: Some(v.s1),
            s2: v.s2,
            g: v.genus.map(|e| e.g),
            h2,
            tunnell_a: v.tunnell.first,
            tunnell_b: v.tunnell.second,
            point_x: v.point.as_ref().map(|p| p.x.to_string()),
            point_y: v.point.as_ref().map(|p| p.y.to_string()),
            ms,
        }
    }

    pub fn status(&self) -> Option<Status> {
        Status::parse(&self.status)
    }

    pub fn csv_fields(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        vec![
            self.n.to_string(),
            self.status.clone(),
            self.provenance.join(";"),
            opt(&self.s1),
            opt(&self.s2),
            opt(&self.g),
            opt(&self.h2),
            self.tunnell_a.to_string(),
            self.tunnell_b.to_string(),
            opt(&self.point_x),
            opt(&self.point_y),
            opt(&self.ms),
        ]
    }

    pub fn from_csv_fields(fields: &[&str]) -> Result<Self, String> {
        if fields.len() != 12 {
            return Err(format!("expected 12 fields, got {}", fields.len()));
        }
        fn opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| format!("bad field {s:?}"))
            }
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number {s:?}"));
        Ok(ReportRecord {
            n: num(fields[0])?,
            status: fields[1].to_string(),
            provenance: if fields[2].is_empty() {
                Vec::new()
            } else {
                fields[2].split(';').map(str::to_string).collect()
            },
            s1: opt(fields[3])?,
            s2: opt(fields[4])?,
            g: opt(fields[5])?,
            h2: opt(fields[6])?,
            tunnell_a: num(fields[7])?,
            tunnell_b: num(fields[8])?,
            point_x: opt(fields[9])?,
            point_y: opt(fields[10])?,
            ms: opt(fields[11])?,
        })
    }
}

pub fn write_csv<W: Write>(out: W, records: &[ReportRecord]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ReportRecord>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    rdr.records()
        .map(|row| {
            let row = row.map_err(|e| e.to_string())?;
            ReportRecord::from_csv_fields(&row.iter().collect::<Vec<_>>())
        })
        .collect()
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[ReportRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: io::Read>(input: R) -> Result<Vec<ReportRecord>, String> {
    BufReader::new(input)
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| {
            let l = l.map_err(|e| e.to_string())?;
            serde_json::from_str(&l).map_err(|e| e.to_string())
        })
        .collect()
}

/// Append-only `d<TAB>g<TAB>h<TAB>h2` file backing a [`GenusTable`].
#[derive(Debug)]
pub struct GenusCache {
    path: PathBuf,
    stored: HashSet<u64>,
}

impl GenusCache {
    pub fn path_from_env() -> PathBuf {
        std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
    }

    /// Loads whatever the file holds into `table`; unreadable lines are ignored.
    pub fn load(path: impl Into<PathBuf>, table: &GenusTable) -> io::Result<Self> {
        let path = path.into();
        let mut stored = HashSet::new();
        match File::open(&path) {
            Ok(f) => {
                for line in BufReader::new(f).lines() {
                    let line = line?;
                    if let Some((d, entry)) = parse_cache_line(&line) {
                        table.insert(d, entry);
                        stored.insert(d);
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(GenusCache { path, stored })
    }

    /// Appends the entries of `table` not yet on disk, in increasing `d`.
    pub fn save(&mut self, table: &GenusTable) -> io::Result<usize> {
        let fresh: Vec<(u64, GenusEntry)> =
            table.entries().into_iter().filter(|(d, _)| !self.stored.contains(d)).collect();
        if fresh.is_empty() {
            return Ok(0);
        }
        if let Some(dir) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut w = BufWriter::new(file);
        for (d, e) in &fresh {
            writeln!(w, "{d}\t{}\t{}\t{}", e.g, e.h, e.h2)?;
            self.stored.insert(*d);
        }
        w.flush()?;
        Ok(fresh.len())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn parse_cache_line(line: &str) -> Option<(u64, GenusEntry)> {
    let mut it = line.split('\t');
    let d = it.next()?.parse().ok()?;
    let g = it.next()?.parse().ok()?;
    let h = it.next()?.parse().ok()?;
    let h2 = it.next()?.parse().ok()?;
    if it.next().is_some() || g == 0 || h % g != 0 {
        return None;
    }
    Some((d, GenusEntry { g, h, h2 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Multiset,
    Labeled,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Multiset => Convention::MultisetOnce,
            ConventionArg::Labeled => Convention::LabeledSlots,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cnum", version, about = "Congruent number certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a single square-free n and print its record as JSON.
    Classify {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value = "multiset")]
        convention: ConventionArg,
        #[arg(long, default_value_t = 1000)]
        point_bound: u64,
    },
    /// Classify every square-free n in a range.
    Scan {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: ScanFormat,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "multiset")]
        convention: ConventionArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 300)]
        point_bound: u64,
        /// Fill the ms column (makes output timing dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Per residue class statistics of certified verdicts up to a limit.
    Density {
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        residue: Option<u8>,
        #[arg(long, value_enum, default_value = "table")]
        format: TableFormat,
        #[arg(long, default_value_t = 0)]
        point_bound: u64,
    },
    /// Class group of Q(sqrt(-d)).
    Classgroup {
        d: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: TableFormat,
    },
    /// Tunnell's ternary form counts for n.
    Tunnell {
        n: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: TableFormat,
    },
    /// Central value L(E_n, 1) or derivative L'(E_n, 1).
    Lvalue {
        n: u64,
        #[arg(long, default_value_t = 0)]
        order: u8,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: TableFormat,
    },
}

enum Failure {
    Domain(Error, u64),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn domain(n: u64) -> impl Fn(Error) -> Failure {
    move |e| Failure::Domain(e, n)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Domain(e, n)) => {
            let body = serde_json::json!({ "error": e.kind(), "detail": e.to_string(), "n": n });
            let _ = writeln!(out, "{body}");
            EXIT_DOMAIN
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "cnum: {e}");
            EXIT_IO
        }
    }
}

fn open_table() -> Result<(GenusTable, GenusCache), Failure> {
    let table = GenusTable::new();
    let cache = GenusCache::load(GenusCache::path_from_env(), &table)?;
    Ok((table, cache))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Classify { n, convention, point_bound } => {
            let (table, mut cache) = open_table()?;
            let options = ClassifyOptions { convention: convention.into(), point_bound, exact_genus: true };
            let start = Instant::now();
            let verdict = classify(n, &options, &table).map_err(domain(n))?;
            let ms = start.elapsed().as_millis() as u64;
            cache.save(&table)?;
            let record = ReportRecord::from_verdict(&verdict, Some(ms));
            serde_json::to_writer(&mut *out, &record).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Command::Scan { from, to, format, jobs, convention, out: path, point_bound, timing } => {
            let (table, mut cache) = open_table()?;
            let options = ClassifyOptions { convention: convention.into(), point_bound, exact_genus: true };
            let start = Instant::now();
            let items = scan_with_jobs(from, to, &options, &table, jobs).map_err(domain(to))?;
            let elapsed = start.elapsed().as_millis() as u64;
            let records: Vec<ReportRecord> = items
                .iter()
                .filter_map(|item| match item {
                    ScanItem::Verdict(v) => Some(ReportRecord::from_verdict(v, timing.then_some(elapsed))),
                    ScanItem::Skip { .. } => None,
                })
                .collect();
            cache.save(&table)?;
            match path {
                Some(p) => {
                    let f = BufWriter::new(File::create(p)?);
                    write_scan(f, format, &records)?;
                }
                None => write_scan(&mut *out, format, &records)?,
            }
        }
        Command::Density { limit, residue, format, point_bound } => {
            let (table, mut cache) = open_table()?;
            let options = ClassifyOptions { point_bound, exact_genus: false, ..Default::default() };
            let report = density_report(limit, residue, &options, &table).map_err(domain(limit))?;
            cache.save(&table)?;
            match format {
                TableFormat::Json => {
                    serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
                    writeln!(out)?;
                }
                TableFormat::Table => {
                    writeln!(out, "limit {}", report.limit)?;
                    writeln!(out, "class  squarefree  non_congruent  congruent  conj_congruent  unknown  certified")?;
                    for c in &report.classes {
                        writeln!(
                            out,
                            "{:>5}  {:>10}  {:>13}  {:>9}  {:>14}  {:>7}  {:>9.4}",
                            c.residue,
                            c.squarefree,
                            c.non_congruent,
                            c.congruent,
                            c.conjecturally_congruent,
                            c.unknown,
                            c.certified_fraction
                        )?;
                    }
                }
            }
        }
        Command::Classgroup { d, format } => {
            let data = class_group(d).map_err(domain(d))?;
            match format {
                TableFormat::Json => {
                    let body = serde_json::json!({
                        "d": data.d,
                        "discriminant": data.discriminant,
                        "h": data.h,
                        "divisors": data.elementary_divisors,
                        "g": data.g,
                        "h2": data.h2,
                        "forms": data.forms.iter().map(|f| [f.a, f.b, f.c]).collect::<Vec<_>>(),
                    });
                    writeln!(out, "{body}")?;
                }
                TableFormat::Table => {
                    writeln!(out, "d={} D={}", data.d, data.discriminant)?;
                    writeln!(out, "h={} divisors={:?} g={} h2={}", data.h, data.elementary_divisors, data.g, data.h2)?;
                    for f in &data.forms {
                        writeln!(out, "  {f}")?;
                    }
                }
            }
        }
        Command::Tunnell { n, format } => {
            let t = tunnell_counts(n).map_err(domain(n))?;
            let (la, lb) = if t.even { ("C", "D") } else { ("A", "B") };
            match format {
                TableFormat::Json => {
                    let body = serde_json::json!({
                        "n": n, la: t.first, lb: t.second, "nonvanishing": t.nonvanishing()
                    });
                    writeln!(out, "{body}")?;
                }
                TableFormat::Table => {
                    writeln!(out, "n={n} {la}={} {lb}={} nonvanishing={}", t.first, t.second, t.nonvanishing())?;
                }
            }
        }
        Command::Lvalue { n, order, eps, format } => {
            let value = l_value(n, order, eps).map_err(domain(n))?;
            let omega = real_period(n).map_err(domain(n))?;
            let sign = root_number(n).map_err(domain(n))?;
            let curly = if sign == 1 { Some(curly_l_rank0(n).map_err(domain(n))?) } else { None };
            let flag = match curly {
                Some(c) if (c - c.round()).abs() < 1e-5 => "ok",
                Some(_) => "not_integral",
                None => "n/a",
            };
            match format {
                TableFormat::Json => {
                    let body = serde_json::json!({
                        "n": n, "order": order, "value": value, "omega": omega,
                        "curly_l": curly, "consistency": flag
                    });
                    writeln!(out, "{body}")?;
                }
                TableFormat::Table => {
                    write!(out, "n={n} order={order} value={value:.12} omega={omega:.12}")?;
                    if let Some(c) = curly {
                        write!(out, " curly_l={c:.8}")?;
                    }
                    writeln!(out, " consistency={flag}")?;
                }
            }
        }
    }
    Ok(())
}

fn write_scan<W: Write>(w: W, format: ScanFormat, records: &[ReportRecord]) -> io::Result<()> {
    match format {
        ScanFormat::Csv => write_csv(w, records),
        ScanFormat::Jsonl => write_jsonl(w, records),
    }
}
