//! The `pifs` command line. [`run`] returns the process exit code: 0 on
//! success, 1 when a check fails, 2 on usage or config errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collage::{collage_sweep, sweep_csv};
use crate::config::{Config, MapSpec};
use crate::conspace::{cauchy_completeness_probe, continuity_probe, ConElement, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::hyperspace::{directed_distance, hausdorff_partial, CompactSet};
use crate::ifs::{condensation_contraction_check, Ifs, DEFAULT_SET_MAX_ITER};
use crate::io::{parse_set, render_pgm, write_points};
use crate::maps::{compose, lipschitz_estimate, semigroup_closure_check, LipMap, MapForm, Predicate};
use crate::pmetric::{
    verify_axioms_on_triples, Axiom, AxiomReport, Carrier, MetricKey, Point, RealSpace, AXIOM_TOL,
};
use crate::shiftspace::{address_to_point, composed_fixed_point_check, ShiftSpace, Word};

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_RASTER: usize = 256;
const DEFAULT_LIP_SAMPLES: usize = 1025;

#[derive(Debug, Parser)]
#[command(name = "pifs", version, about = "Partial metric IFS toolkit")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// RNG seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check P1-P4 on random triples.
    Axioms(Opts),
    /// Compute an attractor; writes points.csv and attractor.pgm.
    Attractor(Opts),
    /// Write attractor.pgm, from --input or by computing the attractor.
    Render(Opts),
    /// Check the collage bound for each set L.
    Collage(Opts),
    /// Address attractor points by words.
    Address(Opts),
    /// Check a predicate on all compositions of the maps.
    Semigroup(Opts),
    /// Continuity and completeness probes in Con_t.
    Conspace(Opts),
    /// Reproduce the worked examples.
    Golden(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    snap: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Set file: point CSV or `interval a b`.
    #[arg(long)]
    seed_set: Option<PathBuf>,
    /// Word over 1..N, e.g. 1212.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Point CSV to render instead of computing the attractor.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Runs the CLI on `args` (program name first).
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, out)),
            Err(e) => Err(Error::Precondition(e.to_string())),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MaxIterExhausted { .. }
        | Error::SelfDistanceNotVanishing(_)
        | Error::NotCauchy(_)
        | Error::SizeCap { .. } => 1,
        _ => 2,
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<bool> {
    match &cli.command {
        Command::Axioms(o) => axioms(o, cli.seed, out),
        Command::Attractor(o) => attractor(o, out, true),
        Command::Render(o) => attractor(o, out, false),
        Command::Collage(o) => collage(o, out),
        Command::Address(o) => address(o, out),
        Command::Semigroup(o) => semigroup(o, out),
        Command::Conspace(o) => conspace(o, out),
        Command::Golden(_) => golden(out),
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref())?;
    Ok(())
}

fn load(o: &Opts) -> Result<Config> {
    let path = o
        .config
        .as_ref()
        .ok_or_else(|| Error::Parse("--config is required".into()))?;
    Config::load(path)
}

fn out_dir(o: &Opts) -> Result<Option<&Path>> {
    match &o.out {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

fn write_artifact(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    if let Some(d) = dir {
        std::fs::write(d.join(name), text)?;
    }
    Ok(())
}

fn read_set(path: &Path) -> Result<CompactSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_set(&text)
}

fn axioms(o: &Opts, seed: u64, out: &mut dyn Write) -> Result<bool> {
    let config = o.config.as_ref().map(|p| Config::load(p)).transpose()?;
    let key_text = match (&o.metric, &config) {
        (Some(m), _) => m.clone(),
        (None, Some(c)) => c.metric.clone(),
        (None, None) => return Err(Error::Parse("--metric or --config is required".into())),
    };
    let key: MetricKey = key_text.parse()?;
    let n = o.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = o.tol.unwrap_or(AXIOM_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = match key {
        MetricKey::ShiftSpace {
            alphabet,
            truncation,
        } => {
            let space = ShiftSpace::new(alphabet, truncation)?;
            let triples: Vec<_> = (0..n)
                .map(|_| {
                    (
                        space.random_word(&mut rng, truncation),
                        space.random_word(&mut rng, truncation),
                        space.random_word(&mut rng, truncation),
                    )
                })
                .collect();
            report_lines(&verify_axioms_on_triples(&space, &triples, tol)?)
        }
        _ => {
            let carrier = match &config {
                Some(c) => *c.space()?.carrier(),
                None => Carrier::interval(0.0, 1.0)?,
            };
            let space = RealSpace::from_key(key, carrier)?;
            let triples: Vec<_> = (0..n)
                .map(|_| (carrier.sample(&mut rng), carrier.sample(&mut rng), carrier.sample(&mut rng)))
                .collect();
            report_lines(&verify_axioms_on_triples(&space, &triples, tol)?)
        }
    };
    let mut csv = String::from("axiom,passed,witness\n");
    let mut ok = true;
    for (axiom, passed, witness) in &lines {
        ok &= passed;
        say(out, format!("{key} {axiom:?}: {}", if *passed { "pass" } else { "FAIL" }))?;
        if let Some(w) = witness {
            say(out, format!("  {w}"))?;
        }
        let _ = writeln!(csv, "{axiom:?},{passed},\"{}\"", witness.as_deref().unwrap_or(""));
    }
    say(out, format!("{n} triples checked at tolerance {tol}"))?;
    write_artifact(out_dir(o)?, "axioms.csv", &csv)?;
    Ok(ok)
}

fn report_lines<E: std::fmt::Debug>(r: &AxiomReport<E>) -> Vec<(Axiom, bool, Option<String>)> {
    [Axiom::P1, Axiom::P2, Axiom::P3, Axiom::P4]
        .into_iter()
        .map(|a| (a, r.passed(a), r.violation(a).map(|v| v.to_string())))
        .collect()
}

fn tolerances(o: &Opts, config: &Config, ifs: &Ifs) -> (f64, usize) {
    (
        o.tol.or(config.tol).unwrap_or_else(|| ifs.default_tol()),
        o.max_iter.or(config.max_iter).unwrap_or(DEFAULT_SET_MAX_ITER),
    )
}

fn seed_set(o: &Opts, config: &Config, ifs: &Ifs) -> Result<CompactSet> {
    if let Some(p) = &o.seed_set {
        return read_set(p);
    }
    match &config.seed_set {
        Some(s) => s.build(),
        None => Ok(CompactSet::singleton(ifs.space().carrier().lo())),
    }
}

fn attractor(o: &Opts, out: &mut dyn Write, write_points_csv: bool) -> Result<bool> {
    let config = load(o)?;
    let dir = out_dir(o)?;
    if dir.is_none() {
        return Err(Error::Parse("--out is required".into()));
    }
    let (w, h) = config
        .render
        .as_ref()
        .map_or((DEFAULT_RASTER, DEFAULT_RASTER), |r| (r.width, r.height));
    let space = config.space()?;
    if let (false, Some(input)) = (write_points_csv, &o.input) {
        let set = read_set(input)?;
        set.validate(&space)?;
        let snap = o.snap.or(config.snap).unwrap_or(crate::hyperspace::default_snap(space.carrier()));
        let pgm = render_pgm(&set.members(snap)?, space.carrier(), w, h)?;
        write_artifact(dir, "attractor.pgm", &pgm)?;
        say(out, format!("rendered {} to attractor.pgm", input.display()))?;
        return Ok(true);
    }
    let ifs = config.ifs(o.snap)?;
    let (tol, max_iter) = tolerances(o, &config, &ifs);
    let seed = seed_set(o, &config, &ifs)?;
    let (a, diag) = ifs.attractor(&seed, tol, max_iter)?;
    let image = ifs.hutchinson(&a)?;
    let self_min = hausdorff_partial(ifs.space(), &a, &a)?.min(hausdorff_partial(ifs.space(), &image, &image)?);
    let excess = diag.invariance_gap - self_min;
    let members = a.members(ifs.snap())?;
    if write_points_csv {
        write_artifact(dir, "points.csv", &write_points(&members))?;
    }
    write_artifact(dir, "attractor.pgm", &render_pgm(&members, ifs.space().carrier(), w, h)?)?;
    say(
        out,
        format!(
            "attractor: {} points after {} iterations (gap {}, snap {}, cycle length {})",
            members.len(),
            diag.iterations,
            diag.gap,
            ifs.snap(),
            diag.cycle_length
        ),
    )?;
    let ok = excess <= 2.0 * tol;
    if ok {
        say(out, format!("self-consistency: h_p(A, W(A)) - self = {excess} <= 2 tol = {}", 2.0 * tol))?;
    } else {
        say(out, format!("FAIL self-consistency: h_p(A, W(A)) - self = {excess} > 2 tol = {}", 2.0 * tol))?;
    }
    Ok(ok)
}

fn collage(o: &Opts, out: &mut dyn Write) -> Result<bool> {
    let config = load(o)?;
    let ifs = config.ifs(o.snap)?;
    let (tol, max_iter) = tolerances(o, &config, &ifs);
    let sets: Vec<CompactSet> = match (&o.seed_set, &config.collage) {
        (Some(p), _) => vec![read_set(p)?],
        (None, Some(c)) => c.sets.iter().map(|s| s.build()).collect::<Result<_>>()?,
        (None, None) => return Err(Error::Parse("collage needs --seed-set or [collage] sets".into())),
    };
    let cases: Vec<(Ifs, CompactSet)> = sets.into_iter().map(|l| (ifs.clone(), l)).collect();
    let reports = collage_sweep(&cases, tol, max_iter)?;
    for (i, r) in reports.iter().enumerate() {
        say(out, format!("L{i}: {}", r.verdict()))?;
        say(out, r.csv_row())?;
    }
    write_artifact(out_dir(o)?, "collage.csv", &sweep_csv(&reports))?;
    Ok(reports.iter().all(|r| r.holds))
}

fn address(o: &Opts, out: &mut dyn Write) -> Result<bool> {
    let config = load(o)?;
    let ifs = config.ifs(o.snap)?;
    let (tol, max_iter) = tolerances(o, &config, &ifs);
    let n = ifs.maps().len();
    let words: Vec<Word> = match (&o.word, &config.address) {
        (Some(w), _) => vec![Word::parse(w, n)?],
        (None, Some(a)) => a.words.iter().map(|w| Word::parse(w, n)).collect::<Result<_>>()?,
        (None, None) => return Err(Error::Parse("address needs --word or [address] words".into())),
    };
    let attractor = match config.address.as_ref().and_then(|a| a.attractor.as_ref()) {
        Some(s) => s.build()?,
        None => ifs.attractor(&seed_set(o, &config, &ifs)?, tol, max_iter)?.0,
    };
    let seed = match &attractor {
        CompactSet::Interval { a, .. } => Point::x(*a),
        CompactSet::Finite(s) => s.points()[0],
    };
    let dim = ifs.space().dim();
    let mut csv = String::from(if dim == 1 { "word,x,bound\n" } else { "word,x,y,bound\n" });
    let mut ok = true;
    for w in &words {
        let (p, bound) = address_to_point(&ifs, w, &seed, &attractor)?;
        let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(csv, "{w},{},{bound}", coords.join(","));
        let check = composed_fixed_point_check(&ifs, w, &attractor, tol)?;
        ok &= check.holds;
        say(out, format!("{w} -> {p} (error <= {bound})"))?;
        if !check.holds {
            say(
                out,
                format!(
                    "FAIL {w}: p(x_w, a_w) = {} > c^m diam(A) + tol = {} (fixed point {})",
                    check.distance, check.bound, check.fixed_point
                ),
            )?;
        }
    }
    write_artifact(out_dir(o)?, "address.csv", &csv)?;
    Ok(ok)
}

fn semigroup(o: &Opts, out: &mut dyn Write) -> Result<bool> {
    let config = load(o)?;
    let spec = config
        .semigroup
        .as_ref()
        .ok_or_else(|| Error::Parse("semigroup needs a [semigroup] table".into()))?;
    let predicate: Predicate = spec.predicate.parse()?;
    let space = config.space()?;
    let maps = config.lip_maps()?;
    let samples = o.samples.or(spec.samples).unwrap_or(DEFAULT_LIP_SAMPLES);
    let report = semigroup_closure_check(&maps, &space, predicate, spec.depth, samples)?;
    let mut csv = String::from("word,declared,estimate,satisfies\n");
    for v in &report.verdicts {
        let declared = v.declared.map_or(String::new(), |d| d.to_string());
        let _ = writeln!(csv, "{},{declared},{},{}", v.word, v.estimate, v.satisfies);
    }
    write_artifact(out_dir(o)?, "semigroup.csv", &csv)?;
    say(out, format!("{} words up to length {}", report.verdicts.len(), spec.depth))?;
    if report.closed {
        say(out, format!("closed under {}", spec.predicate))?;
    } else {
        for v in report.violations() {
            say(
                out,
                format!(
                    "FAIL {}: word {} has Lipschitz estimate {} (declared {:?})",
                    spec.predicate, v.word, v.estimate, v.declared
                ),
            )?;
        }
    }
    Ok(report.closed)
}

fn con_element(spec: &MapSpec, t: f64, space: &RealSpace) -> Result<ConElement> {
    let mut f = LipMap::parse(&spec.form, space.key())?;
    if let Some(l) = spec.lip {
        f = f.with_lip(l);
    }
    ConElement::new(f, t, space.clone())
}

fn conspace(o: &Opts, out: &mut dyn Write) -> Result<bool> {
    let config = load(o)?;
    let spec = config
        .conspace
        .as_ref()
        .ok_or_else(|| Error::Parse("conspace needs a [conspace] table".into()))?;
    let space = config.space()?;
    let limit = con_element(&spec.limit, spec.t, &space)?;
    let seq = spec
        .sequence
        .iter()
        .map(|m| con_element(m, spec.t, &space))
        .collect::<Result<Vec<_>>>()?;
    let grid = spec.grid.unwrap_or(DEFAULT_GRID);
    let tol = o.tol.or(config.tol).unwrap_or(1e-9);
    let report = continuity_probe(&seq, &limit, grid, tol)?;
    let dir = out_dir(o)?;
    write_artifact(dir, "conspace.csv", &report.to_csv())?;
    for r in &report.rows {
        let verdict = if r.holds { "ok" } else { "FAIL" };
        say(
            out,
            format!("n={} pbar={} p(r(f_n), r(f))={} bound={} {verdict}", r.n, r.pbar, r.distance, r.bound),
        )?;
    }
    let mut ok = report.all_hold;
    if let Some(ct) = spec.cauchy_tol {
        let c = cauchy_completeness_probe(&seq, grid, ct)?;
        ok &= c.in_con_t;
        let verdict = if c.in_con_t { "in" } else { "FAIL: not in" };
        say(
            out,
            format!(
                "cauchy tail diameter {}; limit ratio {} ({verdict} Con_{})",
                c.tail_diameter, c.limit_ratio, spec.t
            ),
        )?;
    }
    Ok(ok)
}

fn golden(out: &mut dyn Write) -> Result<bool> {
    let space = RealSpace::max(Carrier::interval(0.0, 10.0)?)?;
    let c = CompactSet::interval(3.0, 4.0)?;
    let b1 = CompactSet::interval(0.0, 1.0)?;
    let b2 = CompactSet::interval(2.0, 3.0)?;
    let verdict = condensation_contraction_check(&c, &space, &[(b1.clone(), b2.clone())])?;
    let image = verdict.rows[0].image_distance;
    let plain = verdict.rows[0].distance;
    let rho12 = directed_distance(&space, &b1, &b2)?;
    let rho21 = directed_distance(&space, &b2, &b1)?;

    let unit = RealSpace::max(Carrier::interval(0.0, 1.0)?)?;
    let m = MetricKey::Max;
    let f = MapForm::affine1d(2.0, 0.0).under(m);
    let g = MapForm::quad1d(2.0).under(m);
    let fg = compose(&f, &g)?;
    let lips = [
        lipschitz_estimate(&f, &unit, DEFAULT_LIP_SAMPLES)?,
        lipschitz_estimate(&g, &unit, DEFAULT_LIP_SAMPLES)?,
        lipschitz_estimate(&fg, &unit, DEFAULT_LIP_SAMPLES)?,
    ];
    let closure = semigroup_closure_check(&[f, g], &unit, Predicate::FixedLip(2.0), 2, DEFAULT_LIP_SAMPLES)?;
    let witness = closure
        .violations()
        .find(|v| v.word.letters() == [1, 2])
        .map(|v| v.estimate);

    say(out, format!("h_p(w0(B1), w0(B2)) = h_p([3,4], [3,4]) = {image}"))?;
    say(out, format!("h_p(B1, B2) = h_p([0,1], [2,3]) = {plain}"))?;
    say(out, format!("rho_p([0,1], [2,3]) = {rho12}"))?;
    say(out, format!("rho_p([2,3], [0,1]) = {rho21}"))?;
    say(
        out,
        format!(
            "condensation onto [3,4]: {} ({image} > {plain})",
            if verdict.contraction { "contraction" } else { "NOT a contraction" }
        ),
    )?;
    say(out, format!("Lip(2x) = {}, Lip(2x^2) = {}, Lip(2x o 2x^2) = {}", lips[0], lips[1], lips[2]))?;
    match witness {
        Some(e) => say(out, format!("fixed_lip:2 not closed: witness (2x, 2x^2) with Lip {e}"))?,
        None => say(out, "FAIL: fixed_lip:2 closure reported no (2x, 2x^2) witness")?,
    }

    let lip_ok = lips
        .iter()
        .zip([2.0, 2.0, 4.0])
        .all(|(got, want)| (got - want).abs() <= 1e-9);
    let ok = image == 4.0
        && plain == 3.0
        && rho12 == 2.0
        && rho21 == 3.0
        && !verdict.contraction
        && lip_ok
        && !closure.closed
        && witness.is_some();
    if !ok {
        say(out, "FAIL: golden values differ from 4, 3, 2, 3, 2, 2, 4")?;
    }
    Ok(ok)
}
