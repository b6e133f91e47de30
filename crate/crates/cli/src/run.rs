use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use toepspec::krylov::{run_case, solve_symbols, CaseSpec, GmresOptions, SolveReport};
use toepspec::numerics::{eig_dense, sort_spectrum, svd_values, ComplexMatrix};
use toepspec::spectral::{
    area_of_compact, distribution_functional, essential_numerical_range, essential_range, localization_region,
    moment_test, outlier_pair, write_cloud_csv, Rect, TestFunction,
};
use toepspec::symbol::{CaseId, MatrixSymbol, MultiIndex};
use toepspec::toeplitz::{build_dense, commutator_gap, factor_preconditioner, write_binary, write_csv, BinaryHeader};
use toepspec::{dsl, Config, Error, Result};

use crate::args::*;

/// Files written and a JSON summary, kept even when the command fails midway.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub results: Value,
}

impl Outcome {
    fn write(&mut self, path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        body(&mut w)?;
        w.flush()?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_json(&mut self, path: &Path, value: &impl serde::Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(path, |w| {
            writeln!(w, "{text}")?;
            Ok(())
        })
    }
}

pub fn run(cli: &Cli, out: &mut Outcome) -> Result<()> {
    match &cli.command {
        Command::Build(a) => build(a, out),
        Command::Eig(a) => eig(a, out),
        Command::Svd(a) => svd(a, out),
        Command::Sector(a) => sector(a, out),
        Command::Region(a) => region(a, out),
        Command::Area(a) => area(a, out),
        Command::Outliers(a) => outliers(a, out),
        Command::Moments(a) => moments(a, out),
        Command::Solve(a) => solve(a, cli.seed, out),
        Command::Case(a) => case(a, cli.seed, out),
        Command::Gap(a) => gap(a, out),
        Command::ParseCheck(a) => parse_check(a, out),
    }
}

fn range_grid(k: usize, grid: Option<usize>) -> usize {
    grid.unwrap_or_else(|| Config::default_coeff_grid(k))
}

fn size(text: &str) -> Result<MultiIndex> {
    MultiIndex::parse(text)
}

fn matrix_for(which: Which, symbols: &SymbolArgs, n: &MultiIndex) -> Result<ComplexMatrix> {
    match which {
        Which::F => build_dense(&symbols.resolve()?.0, n, None)?.into_dense(),
        Which::G => build_dense(&symbols.resolve_pair()?.1, n, None)?.into_dense(),
        Which::Prec => {
            let (f, g) = symbols.resolve_pair()?;
            let tf = build_dense(&f, n, None)?.into_dense()?;
            factor_preconditioner(&g, n)?.apply_matrix(&tf)
        }
    }
}

fn symbol_for(which: Which, symbols: &SymbolArgs) -> Result<MatrixSymbol> {
    match which {
        Which::F => Ok(symbols.resolve()?.0),
        Which::G => Ok(symbols.resolve_pair()?.1),
        Which::Prec => {
            let (f, g) = symbols.resolve_pair()?;
            g.inverse()?.mul(&f)
        }
    }
}

fn build(a: &BuildArgs, out: &mut Outcome) -> Result<()> {
    let n = size(&a.n)?;
    let (f, g) = a.symbols.resolve()?;
    let sym = match a.which {
        Which::F => f,
        Which::G => g.ok_or_else(|| Error::InvalidArgument("--which g needs g".into()))?,
        Which::Prec => return Err(Error::InvalidArgument("build writes T_n(f) or T_n(g) only".into())),
    };
    let m = build_dense(&sym, &n, None)?.into_dense()?;
    let format = a.format.unwrap_or(match a.out.extension().and_then(|e| e.to_str()) {
        Some("bin") => MatrixFormat::Bin,
        _ => MatrixFormat::Csv,
    });
    out.write(&a.out, |w| match format {
        MatrixFormat::Csv => write_csv(&m, w),
        MatrixFormat::Bin => write_binary(&BinaryHeader { s: sym.s(), n: n.clone() }, &m, w),
    })?;
    println!("order {}", m.rows());
    out.results = json!({ "order": m.rows(), "format": format });
    Ok(())
}

fn eig(a: &MatrixArgs, out: &mut Outcome) -> Result<()> {
    let n = size(&a.n)?;
    let m = matrix_for(a.which, &a.symbols, &n)?;
    let mut values = eig_dense(&m, false)?.eigenvalues;
    sort_spectrum(&mut values);
    if let Some(path) = &a.out {
        out.write(path, |w| {
            for z in &values {
                writeln!(w, "{:e},{:e}", z.re, z.im)?;
            }
            Ok(())
        })?;
    }
    let spectral_radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("{} eigenvalues, spectral radius {spectral_radius:.6}", values.len());
    out.results = json!({ "count": values.len(), "spectral_radius": spectral_radius });
    Ok(())
}

fn svd(a: &MatrixArgs, out: &mut Outcome) -> Result<()> {
    let n = size(&a.n)?;
    let m = matrix_for(a.which, &a.symbols, &n)?;
    let sv = svd_values(&m)?;
    if let Some(path) = &a.out {
        out.write(path, |w| {
            for s in &sv.values {
                writeln!(w, "{s:e}")?;
            }
            Ok(())
        })?;
    }
    println!("sigma_max {:e} sigma_min {:e}", sv.max(), sv.min());
    out.results = json!({ "count": sv.values.len(), "sigma_max": sv.max(), "sigma_min": sv.min() });
    Ok(())
}

fn sector(a: &SectorArgs, out: &mut Outcome) -> Result<()> {
    let sym = symbol_for(a.which, &a.symbols)?;
    let grid = range_grid(sym.k(), a.grids.grid);
    let enr = essential_numerical_range(&sym, grid, a.grids.angles)?;
    if let Some(path) = &a.er {
        let er = essential_range(&sym, grid)?;
        out.write(path, |w| write_cloud_csv(&er, w))?;
    }
    if let Some(path) = &a.enr {
        out.write(path, |w| write_cloud_csv(&enr.cloud, w))?;
    }
    let rep = &enr.sector;
    if let Some(path) = &a.out {
        out.write_json(path, rep)?;
    }
    println!(
        "{} d {:.6e} theta {:.6} nondegenerate {}",
        rep.classification, rep.d, rep.theta, rep.nondegenerate
    );
    out.results = serde_json::to_value(rep)?;
    Ok(())
}

fn region(a: &RegionArgs, out: &mut Outcome) -> Result<()> {
    let (f, g) = a.symbols.resolve_pair()?;
    let grid = range_grid(f.k(), a.grids.grid);
    let rect = match &a.rect {
        Some(text) => Rect::parse(text)?,
        None => {
            let h = g.inverse()?.mul(&f)?;
            let er = essential_range(&h, grid)?;
            Rect::around(&er.points, Config::DEFAULT.region_padding)?
        }
    };
    let mask = localization_region(&f, &g, rect, a.resolution, grid, a.grids.angles)?;
    out.write(&a.out, |w| mask.write_pgm(w))?;
    let mut results = json!({
        "rect": mask.rect,
        "width": mask.width,
        "height": mask.height,
        "true_pixels": mask.count(),
        "area": mask.area(),
    });
    println!("{} of {} pixels in R(f,g), area {:.6}", mask.count(), mask.cells.len(), mask.area());
    if let Some(n) = &a.n {
        let n = size(n)?;
        let tf = build_dense(&f, &n, None)?.into_dense()?;
        let m = factor_preconditioner(&g, &n)?.apply_matrix(&tf)?;
        let eigs = eig_dense(&m, false)?.eigenvalues;
        let hit = |z: &Complex64| mask.pixel_of(*z).is_some_and(|(c, r)| mask.get(c, r));
        let inside = eigs.iter().filter(|z| hit(z)).count();
        let deep = eigs.iter().filter(|z| mask.inside_with_slack(**z, 1)).count();
        println!("eigenvalues in R(f,g): {inside} ({deep} beyond one pixel of slack)");
        results["eigenvalues"] = json!({ "count": eigs.len(), "in_region": inside, "in_region_with_slack": deep });
    }
    out.results = results;
    Ok(())
}

/// Reads `re,im[,...]` lines; a first line that does not start with a number is a header.
fn read_cloud(path: &Path) -> Result<Vec<Complex64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let re = fields.next().map(str::trim).unwrap_or("");
        let parsed = re.parse::<f64>();
        if i == 0 && parsed.is_err() {
            continue;
        }
        let im = fields.next().map(str::trim).unwrap_or("");
        match (parsed, im.parse::<f64>()) {
            (Ok(re), Ok(im)) => points.push(Complex64::new(re, im)),
            _ => return Err(Error::Format(format!("{}:{}: expected re,im", path.display(), i + 1))),
        }
    }
    Ok(points)
}

fn area(a: &AreaArgs, out: &mut Outcome) -> Result<()> {
    let points = match &a.cloud {
        Some(path) => read_cloud(path)?,
        None => {
            let sym = symbol_for(a.which, &a.symbols)?;
            essential_range(&sym, range_grid(sym.k(), a.grid))?.points
        }
    };
    let mask = area_of_compact(&points, a.resolution, a.eps)?;
    out.write(&a.out, |w| mask.write_pgm(w))?;
    println!("area {:.6}", mask.area());
    out.results = json!({ "points": points.len(), "area": mask.area(), "rect": mask.rect, "true_pixels": mask.count() });
    Ok(())
}

fn outliers(a: &OutlierArgs, out: &mut Outcome) -> Result<()> {
    let (f, g) = a.symbols.resolve_pair()?;
    let n = size(&a.n)?;
    let rep = outlier_pair(&f, &g, &n, a.eps, range_grid(f.k(), a.grid))?;
    if let Some(path) = &a.out {
        out.write_json(path, &rep)?;
    }
    println!("unprec {} {:.2}", rep.unpreconditioned, rep.ratio(rep.unpreconditioned));
    println!("prec {} {:.2}", rep.preconditioned, rep.ratio(rep.preconditioned));
    out.results = serde_json::to_value(&rep)?;
    Ok(())
}

fn moments(a: &MomentArgs, out: &mut Outcome) -> Result<()> {
    let (f, g) = a.symbols.resolve_pair()?;
    let n = size(&a.n)?;
    let functionals = a.functionals.iter().map(|id| TestFunction::parse(id)).collect::<Result<Vec<_>>>()?;
    let rep = moment_test(&f, &g, &n, a.max_power, a.quad_grid)?;
    for row in &rep.rows {
        println!(
            "{} {:.10} {:.10} {:.3e}",
            row.power, row.trace_mean, row.integral, row.gap
        );
    }
    let mut results = serde_json::to_value(&rep)?;
    if !functionals.is_empty() {
        let tf = build_dense(&f, &n, None)?.into_dense()?;
        let m = factor_preconditioner(&g, &n)?.apply_matrix(&tf)?;
        let eigs = eig_dense(&m, false)?.eigenvalues;
        let mut values = Vec::new();
        for tf in &functionals {
            let v = distribution_functional(&eigs, tf)?;
            println!("{tf} {v:.10}");
            values.push(json!({ "function": tf.to_string(), "value": v }));
        }
        results["functionals"] = Value::Array(values);
    }
    if let Some(path) = &a.out {
        out.write_json(path, &results)?;
    }
    out.results = results;
    Ok(())
}

fn gmres_options(a: &GmresArgs) -> GmresOptions {
    GmresOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        true_residual: a.true_residual,
    }
}

fn write_report(out: &mut Outcome, dir: &Path, stem: &str, rep: &SolveReport) -> Result<()> {
    out.write_json(&dir.join(format!("{stem}.json")), rep)?;
    out.write(&dir.join(format!("{stem}_history.csv")), |w| rep.write_history_csv(w))
}

fn solve(a: &SolveArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let (f, g) = a.symbols.resolve()?;
    let n = size(&a.n)?;
    let g = if a.no_prec { None } else { g };
    let (mut rep, _) = solve_symbols(&f, g.as_ref(), &n, seed, &gmres_options(&a.gmres))?;
    if let Some(case) = a.symbols.case()? {
        CaseSpec::new(case, a.symbols.r).with_branch(a.symbols.branch.into()).annotate(&mut rep);
    }
    if let Some(dir) = &a.out {
        write_report(out, dir, "report", &rep)?;
    }
    println!(
        "iterations {} converged {} final_residual {:.3e}",
        rep.iterations, rep.converged, rep.final_residual
    );
    out.results = serde_json::to_value(&rep)?;
    Ok(())
}

fn case(a: &CaseArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let case = CaseId::from_number(a.id)?;
    let sizes = parse_size_list(&a.n, case.levels())?;
    let modes: &[bool] = match a.prec {
        PrecMode::Both => &[false, true],
        PrecMode::On => &[true],
        PrecMode::Off => &[false],
    };
    let opts = gmres_options(&a.gmres);
    let spec = CaseSpec::new(case, a.r).with_branch(a.branch.into());
    let jobs: Vec<(usize, bool)> = (0..sizes.len()).flat_map(|i| modes.iter().map(move |&p| (i, p))).collect();
    // independent solves, one thread each
    let results: Vec<Result<SolveReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(i, prec)| {
                let n = &sizes[i];
                scope.spawn(move || run_case(&spec, n, prec, seed, &opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });

    let label = |n: &MultiIndex| n.as_slice().iter().map(|v| v.to_string()).collect::<Vec<_>>().join("x");
    let mut cells = vec![[String::new(), String::new()]; sizes.len()];
    let mut first_error = None;
    let mut runs = Vec::new();
    for (&(i, prec), res) in jobs.iter().zip(results) {
        let mode = if prec { "prec" } else { "unprec" };
        match res {
            Ok(rep) => {
                write_report(out, &a.out, &format!("case{}_n{}_{mode}", a.id, label(&sizes[i])), &rep)?;
                cells[i][prec as usize] = rep.iterations.to_string();
                runs.push(json!({ "n": sizes[i], "mode": mode, "iterations": rep.iterations, "converged": rep.converged }));
            }
            Err(e) => {
                cells[i][prec as usize] = "NA".into();
                runs.push(json!({ "n": sizes[i], "mode": mode, "error": e.to_string() }));
                first_error.get_or_insert(e);
            }
        }
    }
    out.write(&a.out.join("table.csv"), |w| {
        writeln!(w, "n,unprec_iters,prec_iters")?;
        for (n, [u, p]) in sizes.iter().zip(&cells) {
            writeln!(w, "{},{u},{p}", label(n))?;
        }
        Ok(())
    })?;
    println!("n,unprec_iters,prec_iters");
    for (n, [u, p]) in sizes.iter().zip(&cells) {
        println!("{},{u},{p}", label(n));
    }
    out.results = json!({ "runs": runs });
    first_error.map_or(Ok(()), Err)
}

fn gap(a: &GapArgs, out: &mut Outcome) -> Result<()> {
    let (f, g) = a.symbols.resolve_pair()?;
    let n = size(&a.n)?;
    let rep = commutator_gap(&f, &g, &n)?;
    if let Some(path) = &a.out {
        out.write_json(path, &rep)?;
    }
    println!(
        "rank {} bound {} trace_norm {:.6e} per_n_hat {:.6e}",
        rep.rank,
        rep.rank_bound,
        rep.trace_norm,
        rep.normalized_trace_norm()
    );
    out.results = serde_json::to_value(rep)?;
    Ok(())
}

fn parse_check(a: &ParseArgs, out: &mut Outcome) -> Result<()> {
    dsl::parse(&a.expr, a.k)?;
    let sym = dsl::compile_text(&a.expr, a.k, a.s, &a.param_map())?;
    let degree = sym.degree().map(|d| d.as_slice().to_vec());
    match &degree {
        Some(d) => println!("ok trig degree {d:?}"),
        None => println!("ok general"),
    }
    if let Some(path) = &a.out {
        let text = sym.to_json()?;
        out.write(path, |w| {
            writeln!(w, "{text}")?;
            Ok(())
        })?;
    }
    out.results = json!({ "trig": sym.is_trig(), "degree": degree, "k": sym.k(), "s": sym.s() });
    Ok(())
}
