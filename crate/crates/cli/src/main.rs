mod source;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use atb_core::encoding::{decode, encode};
use atb_core::experiments::{run_constants_table, run_image, run_quadratic_demo};
use atb_core::io::{
    quadratic_demo_svg, svg_mesh, write_constants_csv, write_demo_csv, write_rows_csv,
};
use atb_core::tree::{
    cart_objective, cart_prune, global_error, greedy_grow, read_mesh, write_mesh,
};
use atb_core::wavelet::{best_n_term, decompose, threshold};
use atb_core::{
    pgm, ApproxConfig, BisectionTree, BitStream, DecisionMetric, RefineConfig, RefineRule,
    StopRule, ThresholdMode, TieRule,
};

use source::{parse_form, InitialMesh, SourceSpec};

#[derive(Parser, Debug)]
#[command(name = "atb", version, about = "Greedy anisotropic bisection trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Refine every triangle J times for a quadratic form and color the
    /// last level by aspect ratio.
    Hierarchy {
        /// Form coefficients q11,q12,q22 of q11 x^2 + 2 q12 xy + q22 y^2.
        #[arg(long, default_value = "1,0,100", allow_hyphen_values = true)]
        q: String,
        #[arg(long, short = 'J', default_value_t = 8)]
        levels: usize,
        #[command(flatten)]
        refine: RefineArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Greedy tree approximation of a source.
    Greedy {
        #[command(flatten)]
        input: SourceArgs,
        #[command(flatten)]
        refine: RefineArgs,
        #[command(flatten)]
        out: TreeOutputs,
    },
    /// Grow a tree, then prune it optimally for `sum e^p + lambda #nodes`.
    Cart {
        #[command(flatten)]
        input: SourceArgs,
        #[command(flatten)]
        refine: RefineArgs,
        /// Complexity penalty per node.
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        out: TreeOutputs,
    },
    /// Orthonormal wavelet decomposition of a source on a greedy tree.
    Wavelet {
        #[command(flatten)]
        input: SourceArgs,
        #[command(flatten)]
        refine: RefineArgs,
        /// Drop wavelet coefficients below this value.
        #[arg(long, conflicts_with = "terms")]
        eps: Option<f64>,
        /// Keep the largest N wavelet coefficients.
        #[arg(long)]
        terms: Option<usize>,
        /// Weight thresholding by the L^p norm of each wavelet.
        #[arg(long, value_parser = parse_p)]
        norm_p: Option<f64>,
        /// Coefficient text file (all coefficients, before thresholding).
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Greedy approximation of a PGM image.
    Image {
        /// Input image (P2 or P5).
        pgm: PathBuf,
        #[arg(long, short = 'n', default_value_t = 2000)]
        leaves: usize,
        #[command(flatten)]
        refine: RefineArgs,
        /// Rasterized approximation (P5).
        #[arg(long)]
        render: Option<PathBuf>,
        #[arg(long)]
        bits: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Uniform, isotropic and anisotropic constants for the sharp transition.
    #[command(alias = "table42")]
    Constants {
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.02")]
        deltas: Vec<f64>,
        #[arg(long, short = 'n', default_value_t = 8192)]
        leaves: usize,
        #[command(flatten)]
        refine: RefineArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Rebuild a mesh from an encoded refinement history.
    Decode {
        bits: PathBuf,
        #[arg(long, value_enum, default_value = "unit")]
        domain: InitialMesh,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Render a mesh file to SVG.
    Render {
        mesh: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Rule {
    Greedy,
    Modified,
    Newest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Proj,
    Interp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Tie {
    Largest,
    Smallest,
}

#[derive(Args, Debug)]
struct RefineArgs {
    /// Polynomial degree.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Error exponent, `inf` for the maximum norm.
    #[arg(long, default_value = "2", value_parser = parse_p)]
    p: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    theta: f64,
    #[arg(long, value_enum, default_value = "modified")]
    rule: Rule,
    /// Local approximation operator used for errors and split decisions.
    #[arg(long, value_enum, default_value = "proj")]
    metric: Metric,
    /// Vertex to bisect from when several edges tie.
    #[arg(long, value_enum, default_value = "largest")]
    tie: Tie,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// sharp:<delta>, quadratic:<q11>,<q12>,<q22>, sine:<m>, legendre or pgm:<path>
    #[arg(long, allow_hyphen_values = true)]
    source: SourceSpec,
    /// leaves:<N>, local:<tol> or global:<tol>
    #[arg(long, default_value = "leaves:1000", value_parser = parse_stop)]
    stop: StopRule,
}

#[derive(Args, Debug)]
struct TreeOutputs {
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    bits: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p = match s {
        "inf" | "infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if p >= 1.0 {
        Ok(p)
    } else {
        Err(format!("p must be >= 1, got {s}"))
    }
}

fn parse_stop(s: &str) -> Result<StopRule, String> {
    let (kind, v) = s
        .split_once(':')
        .ok_or_else(|| format!("expected leaves:<N>, local:<tol> or global:<tol>, got `{s}`"))?;
    let num = |v: &str| v.parse::<f64>().map_err(|e| e.to_string());
    match kind {
        "leaves" => Ok(StopRule::MaxLeaves(
            v.parse()
                .map_err(|e: std::num::ParseIntError| e.to_string())?,
        )),
        "local" => Ok(StopRule::LocalError(num(v)?)),
        "global" => Ok(StopRule::GlobalError(num(v)?)),
        _ => Err(format!("unknown stop rule `{kind}`")),
    }
}

impl RefineArgs {
    fn configs(&self) -> Result<(ApproxConfig, RefineConfig)> {
        let p = self.p;
        let metric = match self.metric {
            Metric::Proj if p == 2.0 => DecisionMetric::L2ProjSq,
            Metric::Proj => DecisionMetric::LpProjPow(p),
            Metric::Interp if p == 1.0 => DecisionMetric::L1Interp,
            Metric::Interp => DecisionMetric::LpInterpPow(p),
        };
        let rule = match self.rule {
            Rule::Greedy => RefineRule::PureGreedy,
            Rule::Modified => RefineRule::Modified(self.theta),
            Rule::Newest => RefineRule::NewestVertex,
        };
        let tie = match self.tie {
            Tie::Largest => TieRule::LexLargest,
            Tie::Smallest => TieRule::LexSmallest,
        };
        let acfg = ApproxConfig::new(self.m, p, metric.operator())?;
        let rcfg = RefineConfig::new(metric, rule)?.with_tie_rule(tie);
        Ok((acfg, rcfg))
    }
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn csv_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn plain_svg(tree: &BisectionTree) -> String {
    let tris = tree.leaf_triangles();
    svg_mesh(&tris, &vec!["#ffffff"; tris.len()])
}

fn write_tree_outputs(
    tree: &BisectionTree,
    out: &TreeOutputs,
    p: f64,
    extra: &[(&str, f64)],
) -> Result<()> {
    let bits = encode(tree);
    if let Some(path) = &out.mesh {
        write(path, write_mesh(tree))?;
    }
    if let Some(path) = &out.bits {
        write(path, bits.to_bytes())?;
    }
    if let Some(path) = &out.svg {
        write(path, plain_svg(tree))?;
    }
    let error = global_error(tree, p);
    let mut header = vec!["leaves", "nodes", "error", "bits"];
    let mut row = vec![
        tree.leaf_count() as f64,
        tree.node_count() as f64,
        error,
        bits.len() as f64,
    ];
    for (k, v) in extra {
        header.push(k);
        row.push(*v);
    }
    if let Some(path) = &out.csv {
        write_rows_csv(&header, &[row], csv_file(path)?)?;
    }
    println!(
        "leaves {}  nodes {}  error(p={}) {:.6e}  bits {}",
        tree.leaf_count(),
        tree.node_count(),
        fmt_p(p),
        error,
        bits.len()
    );
    Ok(())
}

fn gray_hex(v: f64) -> String {
    let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Hierarchy {
            q,
            levels,
            refine,
            svg,
            csv,
        } => {
            let (acfg, rcfg) = refine.configs()?;
            let demo = run_quadratic_demo(parse_form(&q)?, levels, &acfg, &rcfg)?;
            if let Some(path) = svg {
                write(&path, quadratic_demo_svg(&demo))?;
            }
            if let Some(path) = csv {
                write_demo_csv(&demo, csv_file(&path)?)?;
            }
            println!(
                "level {}  triangles {}  rho_q <= 4 sqrt 3: {:.1}%",
                levels,
                demo.classes.len(),
                100.0 * demo.fraction_adapted()
            );
        }
        Command::Greedy { input, refine, out } => {
            let (acfg, rcfg) = refine.configs()?;
            let (f, d0) = input.source.build()?;
            let tree = greedy_grow(&f, &d0, &acfg, &rcfg, input.stop)?;
            write_tree_outputs(&tree, &out, acfg.p, &[])?;
        }
        Command::Cart {
            input,
            refine,
            lambda,
            out,
        } => {
            let (acfg, rcfg) = refine.configs()?;
            let (f, d0) = input.source.build()?;
            let full = greedy_grow(&f, &d0, &acfg, &rcfg, input.stop)?;
            let pruned = cart_prune(&full, lambda, acfg.p);
            let objective = cart_objective(&pruned, lambda, acfg.p);
            write_tree_outputs(
                &pruned,
                &out,
                acfg.p,
                &[
                    ("lambda", lambda),
                    ("objective", objective),
                    ("grown_leaves", full.leaf_count() as f64),
                ],
            )?;
        }
        Command::Wavelet {
            input,
            refine,
            eps,
            terms,
            norm_p,
            coeffs,
            csv,
        } => {
            let (acfg, rcfg) = refine.configs()?;
            if acfg.degree != 1 {
                bail!("wavelets are implemented for piecewise affine functions (--m 1) only");
            }
            let (f, d0) = input.source.build()?;
            let tree = greedy_grow(&f, &d0, &acfg, &rcfg, input.stop)?;
            let full = decompose(&f, &tree, &acfg)?;
            if let Some(path) = coeffs {
                write(&path, full.to_text())?;
            }
            let mode = norm_p.map_or(ThresholdMode::Plain, ThresholdMode::NormWeighted);
            let kept = match (eps, terms) {
                (Some(e), _) => threshold(&full, &tree, e, mode)?,
                (None, Some(n)) => best_n_term(&full, n),
                (None, None) => full.clone(),
            };
            let header = ["leaves", "wavelets", "kept", "energy", "l2_error"];
            let row = vec![
                tree.leaf_count() as f64,
                full.nonzero_wavelets() as f64,
                kept.nonzero_wavelets() as f64,
                full.energy(),
                full.distance(&kept),
            ];
            if let Some(path) = csv {
                write_rows_csv(&header, std::slice::from_ref(&row), csv_file(&path)?)?;
            }
            println!(
                "leaves {}  wavelets {}  kept {}  ||P f - f_kept||_2 {:.6e}",
                row[0], row[1], row[2], row[4]
            );
        }
        Command::Image {
            pgm: input,
            leaves,
            refine,
            render,
            bits,
            svg,
            csv,
        } => {
            let (acfg, rcfg) = refine.configs()?;
            let grid = pgm::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let run = run_image(&grid, leaves, &acfg, &rcfg)?;
            if let Some(path) = render {
                pgm::write_p5(&path, &run.approximation)?;
            }
            if let Some(path) = bits {
                write(&path, run.bits.to_bytes())?;
            }
            if let Some(path) = svg {
                let ids = run.tree.leaves();
                let tris = run.tree.leaf_triangles();
                let fills: Vec<String> = ids
                    .iter()
                    .zip(&tris)
                    .map(|(&id, t)| {
                        let c = t.barycenter();
                        gray_hex(
                            run.tree
                                .node(id)
                                .poly
                                .as_ref()
                                .map_or(0.0, |q| q.eval(c.x, c.y)),
                        )
                    })
                    .collect();
                let fills: Vec<&str> = fills.iter().map(String::as_str).collect();
                write(&path, svg_mesh(&tris, &fills))?;
            }
            if let Some(path) = csv {
                write_rows_csv(
                    &["leaves", "psnr_db", "bits"],
                    &[vec![
                        run.tree.leaf_count() as f64,
                        run.psnr,
                        run.bits.len() as f64,
                    ]],
                    csv_file(&path)?,
                )?;
            }
            println!(
                "leaves {}  PSNR {:.2} dB  bits {}",
                run.tree.leaf_count(),
                run.psnr,
                run.bits.len()
            );
        }
        Command::Constants {
            deltas,
            leaves,
            refine,
            csv,
        } => {
            let (acfg, rcfg) = refine.configs()?;
            let rows = run_constants_table(&deltas, leaves, &acfg, &rcfg)?;
            if let Some(path) = csv {
                write_constants_csv(&rows, csv_file(&path)?)?;
            }
            println!(
                "{:>6} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8}",
                "delta", "U", "I", "A", "C_U", "C_I", "C_A"
            );
            for r in &rows {
                println!(
                    "{:>6} {:>10.2} {:>8.2} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
                    r.delta, r.constants.u, r.constants.i, r.constants.a, r.c_u, r.c_i, r.c_a
                );
            }
        }
        Command::Decode {
            bits,
            domain,
            mesh,
            svg,
        } => {
            let data = fs::read(&bits).with_context(|| format!("reading {}", bits.display()))?;
            let tree = decode(&BitStream::from_bytes(&data)?, &domain.triangles())?;
            if let Some(path) = mesh {
                write(&path, write_mesh(&tree))?;
            }
            if let Some(path) = svg {
                write(&path, plain_svg(&tree))?;
            }
            println!("leaves {}  nodes {}", tree.leaf_count(), tree.node_count());
        }
        Command::Render { mesh, svg } => {
            let text =
                fs::read_to_string(&mesh).with_context(|| format!("reading {}", mesh.display()))?;
            let tree = read_mesh(&text)?;
            write(&svg, plain_svg(&tree))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
