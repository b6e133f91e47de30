use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use toepspec::symbol::{catalog_parts_with, Branch, CaseId, MatrixSymbol, MultiIndex};
use toepspec::{dsl, Error, Result};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "toepspec", version, about = "Block Toeplitz spectra and preconditioned GMRES experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Where to write the run manifest [default: next to --out, else ./toepspec-manifest.json]
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Seed for every random quantity (GMRES right-hand sides)
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Assemble T_n(f) and write it as CSV or binary
    Build(BuildArgs),
    /// Eigenvalues of T_n(f), T_n(g) or T_n(g)^-1 T_n(f) as re,im rows
    Eig(MatrixArgs),
    /// Singular values, one per line, non-increasing
    Svd(MatrixArgs),
    /// Sectoriality class and distance d of a symbol
    Sector(SectorArgs),
    /// Raster of the localization region R(f, g) as PGM
    Region(RegionArgs),
    /// Area of a point cloud (the cloud plus its holes) as PGM
    Area(AreaArgs),
    /// Outlier counts of T_n(f) and T_n(g)^-1 T_n(f)
    Outliers(OutlierArgs),
    /// Trace moments of T_n(g)^-1 T_n(f) against the symbol integrals
    Moments(MomentArgs),
    /// One GMRES solve with a seeded random right-hand side
    Solve(SolveArgs),
    /// GMRES iteration table of a catalog case over several sizes
    Case(CaseArgs),
    /// Rank and trace norm of T_n(g)T_n(f) - T_n(gf)
    Gap(GapArgs),
    /// Parse and compile a symbol expression
    ParseCheck(ParseArgs),
}

/// Where `f` and `g` come from: a catalog case, JSON files or expressions.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SymbolArgs {
    /// Catalog case 1..6
    #[arg(long, conflicts_with_all = ["f", "expr"])]
    pub id: Option<u32>,
    /// Parameter r of cases 1 and 2
    #[arg(long)]
    pub r: Option<f64>,
    /// Range of x in the non-periodic factors of cases 2 to 4
    #[arg(long, value_enum, default_value_t = BranchArg::Positive)]
    pub branch: BranchArg,
    /// Symbol JSON file for f
    #[arg(long, conflicts_with = "expr")]
    pub f: Option<PathBuf>,
    /// Symbol JSON file for g
    #[arg(long, conflicts_with = "g_expr")]
    pub g: Option<PathBuf>,
    /// Expression for f
    #[arg(long)]
    pub expr: Option<String>,
    /// Expression for g
    #[arg(long)]
    pub g_expr: Option<String>,
    /// Number of levels of expression symbols
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Block size of expression symbols
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Expression parameter, name=value (repeatable)
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

fn parse_param(text: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = text.split_once('=').ok_or("expected name=value")?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value for {name}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

impl SymbolArgs {
    fn param_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }

    pub fn case(&self) -> Result<Option<CaseId>> {
        self.id.map(CaseId::from_number).transpose()
    }

    /// `f` and, when available, `g`.
    pub fn resolve(&self) -> Result<(MatrixSymbol, Option<MatrixSymbol>)> {
        if let Some(case) = self.case()? {
            let parts = catalog_parts_with(case, self.r, self.branch.into())?;
            return Ok((parts.f, Some(parts.g)));
        }
        let params = self.param_map();
        let load = |path: &Option<PathBuf>, expr: &Option<String>| -> Result<Option<MatrixSymbol>> {
            match (path, expr) {
                (Some(p), _) => MatrixSymbol::load(p).map(Some),
                (None, Some(e)) => Ok(Some(dsl::compile_text(e, self.k, self.s, &params)?)),
                (None, None) => Ok(None),
            }
        };
        let f = load(&self.f, &self.expr)?
            .ok_or_else(|| Error::InvalidArgument("give --id, --f or --expr".into()))?;
        let g = load(&self.g, &self.g_expr)?;
        Ok((f, g))
    }

    pub fn resolve_pair(&self) -> Result<(MatrixSymbol, MatrixSymbol)> {
        match self.resolve()? {
            (f, Some(g)) => Ok((f, g)),
            _ => Err(Error::InvalidArgument("this command needs g (--id, --g or --g-expr)".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    /// x in [0, 2pi)
    Positive,
    /// x in [-pi, pi)
    Centered,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::Positive => Branch::Positive,
            BranchArg::Centered => Branch::Centered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    F,
    G,
    /// T_n(g)^-1 T_n(f), or g^-1 f for symbol commands
    Prec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Bin,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    /// Size multi-index, e.g. 20 or 10,10
    #[arg(long)]
    pub n: String,
    #[arg(long, value_enum, default_value_t = Which::F)]
    pub which: Which,
    /// Output format [default: bin for *.bin, else csv]
    #[arg(long, value_enum)]
    pub format: Option<MatrixFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long)]
    pub n: String,
    #[arg(long, value_enum, default_value_t = Which::F)]
    pub which: Which,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Sample points per dimension [default: 1024 for one level, 128 for two]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Angles of the support function scan
    #[arg(long, default_value_t = 720)]
    pub angles: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SectorArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long, value_enum, default_value_t = Which::G)]
    pub which: Which,
    #[command(flatten)]
    pub grids: GridArgs,
    /// JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the essential range cloud
    #[arg(long)]
    pub er: Option<PathBuf>,
    /// CSV of the essential numerical range support points
    #[arg(long)]
    pub enr: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegionArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[command(flatten)]
    pub grids: GridArgs,
    /// re_min,re_max,im_min,im_max [default: padded box around ER(g^-1 f)]
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    /// Pixels per side
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    /// Also check the eigenvalues of T_n(g)^-1 T_n(f) for this n against the mask
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AreaArgs {
    /// Point cloud CSV (re,im[,source] with a header line)
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Use the essential range of a symbol instead of a cloud file
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long, value_enum, default_value_t = Which::F)]
    pub which: Which,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    /// Dilation radius
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutlierArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Range samples per dimension [default: 1024 for one level, 128 for two]
    #[arg(long)]
    pub grid: Option<usize>,
    /// JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MomentArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long)]
    pub n: String,
    /// Largest power N
    #[arg(long, default_value_t = 4)]
    pub max_power: usize,
    /// Quadrature points per dimension for the symbol integrals
    #[arg(long, default_value_t = 1024)]
    pub quad_grid: usize,
    /// Test functions averaged over the eigenvalues (one, pow:N, re-step:t, im-step:t, bump:re,im,radius)
    #[arg(long = "functional")]
    pub functionals: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GmresArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop on the unpreconditioned residual
    #[arg(long)]
    pub true_residual: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long)]
    pub n: String,
    /// Ignore g and run unpreconditioned
    #[arg(long)]
    pub no_prec: bool,
    #[command(flatten)]
    pub gmres: GmresArgs,
    /// Output directory (report.json, report_history.csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecMode {
    Both,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CaseArgs {
    #[arg(long)]
    pub id: u32,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_enum, default_value_t = BranchArg::Positive)]
    pub branch: BranchArg,
    /// Sizes: 50,100,200 (each value in every level) or 10x20,20x40
    #[arg(long)]
    pub n: String,
    #[arg(long, value_enum, default_value_t = PrecMode::Both)]
    pub prec: PrecMode,
    #[command(flatten)]
    pub gmres: GmresArgs,
    /// Output directory (table.csv plus one report and history per run)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GapArgs {
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ParseArgs {
    #[arg(long)]
    pub expr: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Write the compiled symbol as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ParseArgs {
    pub fn param_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }
}

/// Sizes for `case`: each comma-separated item is `v` (same in every level)
/// or `v1xv2`.
pub fn parse_size_list(text: &str, levels: usize) -> Result<Vec<MultiIndex>> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let parts: Vec<&str> = item.split('x').collect();
            let values: Vec<i64> = parts
                .iter()
                .map(|p| p.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad size '{item}': {e}")))?;
            let values = if values.len() == 1 { vec![values[0]; levels] } else { values };
            if values.len() != levels {
                return Err(Error::InvalidArgument(format!("size '{item}' needs {levels} levels")));
            }
            MultiIndex::new(values)
        })
        .collect()
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Eig(_) => "eig",
            Command::Svd(_) => "svd",
            Command::Sector(_) => "sector",
            Command::Region(_) => "region",
            Command::Area(_) => "area",
            Command::Outliers(_) => "outliers",
            Command::Moments(_) => "moments",
            Command::Solve(_) => "solve",
            Command::Case(_) => "case",
            Command::Gap(_) => "gap",
            Command::ParseCheck(_) => "parse-check",
        }
    }

    /// Primary output path and whether it names a directory.
    pub fn out(&self) -> Option<(&PathBuf, bool)> {
        match self {
            Command::Build(a) => Some((&a.out, false)),
            Command::Eig(a) | Command::Svd(a) => a.out.as_ref().map(|p| (p, false)),
            Command::Sector(a) => a.out.as_ref().map(|p| (p, false)),
            Command::Region(a) => Some((&a.out, false)),
            Command::Area(a) => Some((&a.out, false)),
            Command::Outliers(a) => a.out.as_ref().map(|p| (p, false)),
            Command::Moments(a) => a.out.as_ref().map(|p| (p, false)),
            Command::Solve(a) => a.out.as_ref().map(|p| (p, true)),
            Command::Case(a) => Some((&a.out, true)),
            Command::Gap(a) => a.out.as_ref().map(|p| (p, false)),
            Command::ParseCheck(a) => a.out.as_ref().map(|p| (p, false)),
        }
    }
}
