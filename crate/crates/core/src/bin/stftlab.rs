use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use stftlab::experiments::{self, ExperimentManifest, EXPERIMENTS};
use stftlab::forge::{assemble_pair, build_bumps, instability_ratio, select_annulus_schedule};
use stftlab::geometry::{cheeger_estimate, connectivity, gluing_bound, poincare_constant, CheegerFamily, DomainMask};
use stftlab::io::{self, Container};
use stftlab::norms::{phase_inf_distance, GridField, Norm};
use stftlab::transforms::{phaseless, recover, stft, WindowSpec};
use stftlab::{parallel, rng, Error, Grid1D, Result, Signal, TFField, TFGrid};

#[derive(Parser)]
#[command(name = "stftlab", version, about = "STFT phase retrieval laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Bin,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Gaussian,
    Hermite,
    Sech,
    Random,
    /// Disk mask on a square time-frequency grid.
    Disk,
    /// Half-plane mask `x cos t + w sin t >= offset` on a square grid.
    HalfPlane,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signal or a mask fixture.
    #[command(allow_negative_numbers = true)]
    Gen {
        fixture: Fixture,
        #[arg(long = "L", default_value_t = 32.0)]
        length: f64,
        #[arg(long = "N", default_value_t = 512)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        center: f64,
        #[arg(long, default_value_t = 0.0)]
        modulation: f64,
        /// Hermite order.
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        #[arg(long, value_enum, default_value_t = Format::Bin)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Short-time Fourier transform of a stored signal.
    Stft {
        signal: PathBuf,
        #[arg(long, default_value = "gaussian")]
        window: String,
        /// Time extent of the output grid; defaults to the full signal window.
        #[arg(long)]
        x_length: Option<f64>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Store the spectrogram `|V f|^2` instead of the complex transform.
        #[arg(long)]
        phaseless: bool,
        #[arg(long, value_enum, default_value_t = Format::Bin)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm of a stored signal or field.
    Norm {
        input: PathBuf,
        /// l2, l<q>, linf, weighted:<p>:<r> or sobolev:<s>:<p>:<r>.
        #[arg(long, default_value = "l2")]
        norm: String,
    },
    /// Phase-infimum distance between two stored signals or fields.
    Distance {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value = "l2")]
        norm: String,
        /// Restrict a Lebesgue distance to a stored mask.
        #[arg(long)]
        domain: Option<PathBuf>,
    },
    /// Stability ratios of the bump-ladder pairs built on a Gaussian seed.
    Instability {
        #[arg(long = "L", default_value_t = 512.0)]
        length: f64,
        #[arg(long = "N", default_value_t = 4096)]
        count: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
    },
    /// Cheeger upper bound of the modulus of a stored field.
    Cheeger {
        field: PathBuf,
        /// Comma-separated subset of level, disk, half_plane.
        #[arg(long, default_value = "level,disk,half_plane")]
        families: String,
        /// Write the per-candidate table as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Weighted Neumann Poincare constant of a stored mask.
    Poincare {
        mask: PathBuf,
        /// Weight field (modulus is used); unit weight when absent.
        #[arg(long)]
        weight: Option<PathBuf>,
        /// Multiply the weight by the Gaussian density.
        #[arg(long)]
        gaussian: bool,
    },
    /// Connectivity of two masks under a stored field and the resulting gluing bound.
    Glue {
        field: PathBuf,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        c_a: Option<f64>,
        #[arg(long)]
        c_b: Option<f64>,
    },
    /// Recover a signal from a stored spectrogram on a full grid.
    Recover {
        measurement: PathBuf,
        #[arg(long, default_value = "gaussian")]
        window: String,
        /// Threshold relative to the window ambiguity at the origin.
        #[arg(long, default_value_t = 1e-6)]
        tau_relative: f64,
        /// Ground truth for the relative error in the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Bin)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment.
    Run {
        id: String,
        /// JSON file with optional `seed` and `params` keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in experiments.
    List,
    /// Re-check the assertions of a stored run.
    Verify { dir: PathBuf },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    params: Value,
}

enum Outcome {
    Ok,
    AssertionFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("stftlab: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed) => ExitCode::from(1),
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stftlab: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    match std::env::var("STFTLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                parallel::set_threads(n);
                Ok(())
            }
            _ => Err(Error::Config(format!("STFTLAB_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(()),
    }
}

fn print_json(v: &Value) -> Result<()> {
    stdout(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn parse_window(s: &str) -> Result<WindowSpec> {
    match s {
        "gaussian" => Ok(WindowSpec::Gaussian),
        _ => s
            .strip_prefix("hermite")
            .and_then(|n| n.parse().ok())
            .map(|n| WindowSpec::Hermite { n })
            .ok_or_else(|| Error::Config(format!("--window: expected gaussian or hermite<N>, got `{s}`"))),
    }
}

fn parse_norm(s: &str) -> Result<Norm> {
    let bad = || Error::Config(format!("--norm: cannot parse `{s}`"));
    let nums = |rest: &str, k: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> =
            rest.split(':').map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if v.len() == k {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let norm = if s == "linf" {
        Norm::Lebesgue { q: f64::INFINITY }
    } else if let Some(rest) = s.strip_prefix("weighted:") {
        let v = nums(rest, 2)?;
        Norm::Weighted { p: v[0], r: v[1] }
    } else if let Some(rest) = s.strip_prefix("sobolev:") {
        let v = nums(rest, 3)?;
        Norm::Sobolev { s: v[0], p: v[1], r: v[2] }
    } else if let Some(rest) = s.strip_prefix('l') {
        Norm::Lebesgue { q: rest.parse().map_err(|_| bad())? }
    } else {
        return Err(bad());
    };
    norm.validate()?;
    Ok(norm)
}

fn read_signal(path: &Path) -> Result<Signal> {
    match io::read_file(path)? {
        Container::Signal(s) => Ok(s),
        other => Err(Error::Format(format!("{}: expected a signal, found a {}", path.display(), other.kind_name()))),
    }
}

fn read_field(path: &Path) -> Result<TFField> {
    match io::read_file(path)? {
        Container::Field(f) => Ok(f),
        other => Err(Error::Format(format!("{}: expected a field, found a {}", path.display(), other.kind_name()))),
    }
}

fn read_mask(path: &Path) -> Result<DomainMask> {
    match io::read_file(path)? {
        Container::Mask { grid, inside } => DomainMask::new(grid, inside),
        other => Err(Error::Format(format!("{}: expected a mask, found a {}", path.display(), other.kind_name()))),
    }
}

fn field_csv(f: &TFField) -> String {
    let mut s = String::from("x,w,re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        let (x, w) = f.grid().coords(i);
        s.push_str(&format!("{x},{w},{},{}\n", v.re, v.im));
    }
    s
}

fn mask_csv(grid: &TFGrid, inside: &[bool]) -> String {
    let mut s = String::from("x,w,inside\n");
    for (i, b) in inside.iter().enumerate() {
        let (x, w) = grid.coords(i);
        s.push_str(&format!("{x},{w},{}\n", u8::from(*b)));
    }
    s
}

fn container_json(c: &Container) -> Value {
    match c {
        Container::Signal(s) => json!({
            "kind": "signal",
            "grid": s.grid(),
            "re": s.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": s.values().iter().map(|v| v.im).collect::<Vec<_>>(),
        }),
        Container::Field(f) => json!({
            "kind": "field",
            "grid": f.grid(),
            "re": f.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": f.values().iter().map(|v| v.im).collect::<Vec<_>>(),
        }),
        Container::Mask { grid, inside } => json!({ "kind": "mask", "grid": grid, "inside": inside }),
    }
}

/// Writes `c` to `out` (or standard output for text formats).
fn emit(c: &Container, format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Bin => {
            let path = out.ok_or_else(|| Error::Config("--out is required for --format bin".into()))?;
            return io::write_file(path, c);
        }
        Format::Csv => match c {
            Container::Signal(s) => {
                let mut buf = Vec::new();
                s.write_csv(&mut buf)?;
                String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?
            }
            Container::Field(f) => field_csv(f),
            Container::Mask { grid, inside } => mask_csv(grid, inside),
        },
        Format::Json => serde_json::to_string(&container_json(c))? + "\n",
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout(&text)?,
    }
    Ok(())
}

fn norm_of(c: &Container, norm: &Norm) -> Result<f64> {
    match c {
        Container::Signal(s) => Ok(norm.eval(s)),
        Container::Field(f) => Ok(norm.eval(f)),
        Container::Mask { .. } => Err(Error::Format("cannot take the norm of a mask".into())),
    }
}

fn distance_json<F: GridField>(f: &F, g: &F, norm: &Norm, domain: Option<&[bool]>) -> Result<Value> {
    let d = phase_inf_distance(f, g, norm, domain)?;
    Ok(
        json!({ "distance": d.distance, "lambda": [d.lambda.re, d.lambda.im], "method": d.method, "norm": norm.label() }),
    )
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Gen {
            fixture,
            length,
            count,
            center,
            modulation,
            order,
            width,
            seed,
            radius,
            angle,
            offset,
            format,
            out,
        } => {
            let g = Grid1D::new(length, count)?;
            let c = match fixture {
                Fixture::Gaussian => Container::Signal(Signal::gaussian(g, center, modulation)?),
                Fixture::Hermite => Container::Signal(Signal::hermite(g, order)?),
                Fixture::Sech => Container::Signal(Signal::sech(g, width)?),
                Fixture::Random => Container::Signal(rng::random_signal(
                    g,
                    &mut rng::stream(seed),
                    4,
                    0.2 * length,
                    0.15 * g.nyquist(),
                )?),
                Fixture::Disk => {
                    let grid = TFGrid::square(length, count)?;
                    let m = DomainMask::disk(grid, (center, modulation), radius);
                    Container::Mask { grid, inside: m.inside().to_vec() }
                }
                Fixture::HalfPlane => {
                    let grid = TFGrid::square(length, count)?;
                    let m = DomainMask::half_plane(grid, angle, offset);
                    Container::Mask { grid, inside: m.inside().to_vec() }
                }
            };
            emit(&c, format, out.as_deref())?;
        }
        Command::Stft { signal, window, x_length, stride, phaseless: squared, format, out } => {
            let f = read_signal(&signal)?;
            let phi = parse_window(&window)?.signal(*f.grid())?;
            let tf = match x_length {
                Some(l) => TFGrid::for_signal(f.grid(), l, stride)?,
                None if stride == 1 => TFGrid::full(f.grid()),
                None => TFGrid::for_signal(f.grid(), f.grid().length(), stride)?,
            };
            let v = if squared { phaseless(&f, &phi, &tf)? } else { stft(&f, &phi, &tf)? };
            emit(&Container::Field(v), format, out.as_deref())?;
        }
        Command::Norm { input, norm } => {
            let n = parse_norm(&norm)?;
            let value = norm_of(&io::read_file(&input)?, &n)?;
            print_json(&json!({ "norm": n.label(), "params": n, "value": value }))?;
        }
        Command::Distance { f, g, norm, domain } => {
            let n = parse_norm(&norm)?;
            let mask = domain.map(|p| read_mask(&p)).transpose()?;
            let inside = mask.as_ref().map(|m| m.inside());
            let v = match (io::read_file(&f)?, io::read_file(&g)?) {
                (Container::Signal(a), Container::Signal(b)) => distance_json(&a, &b, &n, inside)?,
                (Container::Field(a), Container::Field(b)) => distance_json(&a, &b, &n, inside)?,
                (a, b) => {
                    return Err(Error::Format(format!("cannot compare a {} with a {}", a.kind_name(), b.kind_name())))
                }
            };
            print_json(&v)?;
        }
        Command::Instability { length, count, delta, sigma, p, q, n_max } => {
            let g = Grid1D::new(length, count)?;
            let h = Signal::gaussian(g, 0.0, 0.0)?;
            let schedule = select_annulus_schedule(&h, sigma, p, q, n_max)?;
            let bumps = build_bumps(&schedule)?;
            let mut rows = Vec::new();
            for n in 0..n_max {
                let pair = assemble_pair(&schedule, &bumps, delta, n)?;
                let r = instability_ratio(&pair, &Norm::Lebesgue { q }, &Norm::Weighted { p, r: sigma })?;
                rows.push(json!({
                    "n": n,
                    "numerator": r.numerator,
                    "denominator": r.denominator,
                    "ratio": if r.is_unbounded() { Value::from("inf") } else { Value::from(r.ratio) },
                    "target": pair.target(),
                }));
            }
            print_json(&json!({ "radii": schedule.radii, "rows": rows }))?;
        }
        Command::Cheeger { field, families, table } => {
            let fams = families
                .split(',')
                .map(|t| match t.trim() {
                    "level" => Ok(CheegerFamily::Level),
                    "disk" => Ok(CheegerFamily::Disk),
                    "half_plane" => Ok(CheegerFamily::HalfPlane),
                    other => Err(Error::Config(format!("--families: unknown family `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let w = read_field(&field)?.modulus();
            let r = cheeger_estimate(&w, &fams)?;
            if let Some(path) = table {
                let mut s = String::from("family,mass,boundary,ratio\n");
                for row in &r.table {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        row.candidate.family().tag(),
                        row.mass,
                        row.boundary,
                        row.ratio
                    ));
                }
                std::fs::write(path, s)?;
            }
            print_json(&json!({
                "value": r.value,
                "kind": r.kind,
                "family": r.family.tag(),
                "best": r.best,
                "total_mass": r.total_mass,
                "candidates": r.table.len(),
            }))?;
        }
        Command::Poincare { mask, weight, gaussian } => {
            let m = read_mask(&mask)?;
            let w = match weight {
                Some(p) => read_field(&p)?.modulus(),
                None => TFField::from_fn(*m.grid(), |_, _| Complex64::new(1.0, 0.0))?,
            };
            let r = poincare_constant(&m, &w, gaussian)?;
            let constant = if r.constant.is_finite() { Value::from(r.constant) } else { Value::from("inf") };
            print_json(&json!({
                "mu1": r.mu1,
                "constant": constant,
                "connected": r.connected,
                "status": r.status,
                "nodes": r.nodes,
                "clipped": r.clipped,
            }))?;
        }
        Command::Glue { field, a, b, c_a, c_b } => {
            let w = read_field(&field)?.modulus();
            let lambda = connectivity(&w, &read_mask(&a)?, &read_mask(&b)?)?;
            let bound = match (c_a, c_b) {
                (Some(x), Some(y)) => Value::from(gluing_bound(x, y, lambda)?),
                (None, None) => Value::Null,
                _ => return Err(Error::Config("--c-a and --c-b must be given together".into())),
            };
            print_json(&json!({ "lambda": lambda, "bound": bound }))?;
        }
        Command::Recover { measurement, window, tau_relative, truth, format, out } => {
            let p = read_field(&measurement)?;
            let g = p.grid().x;
            let phi = parse_window(&window)?.signal(g)?;
            let a0 = parse_window(&window)?.ambiguity_closed_form(0.0, 0.0).unwrap_or(1.0);
            let mut rec = recover(&p, &phi, tau_relative * a0)?;
            if let Some(t) = truth {
                let f = read_signal(&t)?;
                let d = phase_inf_distance(&rec.signal, &f, &Norm::l2(), None)?;
                rec.report.error = Some(d.distance / f.norm(2.0));
            }
            eprintln!("{}", serde_json::to_string(&rec.report)?);
            emit(&Container::Signal(rec.signal), format, out.as_deref())?;
        }
        Command::Run { id, config, out } => {
            experiments::info(&id)?;
            let cfg: RunConfig = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
                None => RunConfig::default(),
            };
            let manifest =
                ExperimentManifest { seed: cfg.seed, params: cfg.params, out, ..ExperimentManifest::new(&id) };
            let r = experiments::run(&manifest)?;
            for a in &r.assertions {
                let tag = match (a.passed, a.gating) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "fail (report only)",
                };
                eprintln!("{tag}: {} [{}] {}", a.name, a.invariant, a.detail);
            }
            if manifest.out.is_none() {
                for t in &r.tables {
                    stdout(&format!("# {}\n", t.name))?;
                    stdout(&String::from_utf8(t.to_csv()?).map_err(|e| Error::Format(e.to_string()))?)?;
                }
            }
            eprintln!("{}: {} in {:.2} s", r.id, if r.passed() { "passed" } else { "FAILED" }, r.wall_clock);
            if !r.passed() {
                return Ok(Outcome::AssertionFailed);
            }
        }
        Command::List => {
            for e in EXPERIMENTS {
                stdout(&format!("{:<24} {:>5} s  {}\n", e.id, e.budget, e.about))?;
            }
        }
        Command::Verify { dir } => {
            let v = experiments::verify(&dir)?;
            for m in &v.mismatches {
                eprintln!("mismatch: {m}");
            }
            print_json(&json!({ "id": v.id, "consistent": v.consistent, "passed": v.passed }))?;
            if !(v.consistent && v.passed) {
                return Ok(Outcome::AssertionFailed);
            }
        }
    }
    Ok(Outcome::Ok)
}
