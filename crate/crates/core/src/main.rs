//! heckeplot: renders Hecke-group tessellations, parabolic Blaschke
//! dynamics, external-map figures, correspondence orbits and B-involution
//! tile dynamics as deterministic PPM images.

use clap::{Parser, Subcommand, ValueEnum};
use hecke_dynamics::binv::{
    classify_corr_point, read_instance, tile_rank, validate, BInvolutionData, JordanDisc,
    TileClassification, Verdict,
};
use hecke_dynamics::blaschke::{
    build_petal, dividing_arcs, escape_to_petal, petal_preimages, BlaschkeMap, EscapeVerdict,
};
use hecke_dynamics::corr::{orbit_tree, Correspondence, Involution, Orientation};
use hecke_dynamics::hecke::build_hecke;
use hecke_dynamics::moebius::{Complex, Sphere};
use hecke_dynamics::poly::Polynomial;
use hecke_dynamics::quotient::{farey_like_restriction_hecke, farey_map, hecke_map, MapKind};
use hecke_dynamics::raster::{
    draw_polylines, render, unit_circle_polyline, write_ppm, ImageBuffer, Palette, Rgb, Viewport,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heckeplot", about = "Hecke-group and B-involution figure renderer")]
struct Cli {
    /// Render worker threads (output bytes do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Overrides the instance boundary-band tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ideal-polygon tessellation of the disc by the degree-d Hecke group.
    Tessellate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 800)]
        size: usize,
    },
    /// Parabolic Blaschke product: escape bands, petal and preimage curves.
    Blaschke {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        preimages: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        theta0: Option<f64>,
    },
    /// Forward-invariant dividing arcs of B_d and their pullbacks.
    DividingArcs {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Piece boundaries of the Hecke/Farey maps, monogon and its preimage.
    ExternalMap {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        monogon_eps: f64,
    },
    /// Orbit-tree point cloud of the correspondence Cov₀^Q ∘ J.
    Correspondence {
        /// Coefficient file: one "re im" line per coefficient, ascending.
        #[arg(long)]
        q: PathBuf,
        /// Seed point "re,im".
        #[arg(long)]
        z0: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tile-rank (plane s) or Ω/K₊/K₋ (plane corr) render of an instance.
    BInvolution {
        #[arg(long)]
        instance: PathBuf,
        /// View "cx,cy,width".
        #[arg(long)]
        view: String,
        #[arg(long)]
        px: usize,
        #[arg(long)]
        max_rank: usize,
        #[arg(long, value_enum)]
        plane: PlaneArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the validation report for an instance file.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Hecke,
    Farey,
}

#[derive(Copy, Clone, ValueEnum)]
enum PlaneArg {
    S,
    Corr,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let workers = cli.workers.max(1);
    match cli.command {
        Command::Tessellate {
            d,
            depth,
            out,
            size,
        } => {
            let group = build_hecke(d).map_err(|e| e.to_string())?;
            let polys = group.tessellation(depth);
            let viewport = Viewport::new(Complex::new(0.0, 0.0), 2.1, size, size);
            let mut image = ImageBuffer::filled(size, size, Rgb(255, 255, 255));
            draw_polylines(
                &mut image,
                &[unit_circle_polyline(4 * size)],
                &viewport,
                Rgb(0, 0, 0),
            );
            let mut curves = Vec::new();
            for poly in &polys {
                for side in poly.sides() {
                    let n = 96;
                    curves.push(
                        (0..=n)
                            .map(|k| side.point(k as f64 / n as f64))
                            .collect::<Vec<_>>(),
                    );
                }
            }
            draw_polylines(&mut image, &curves, &viewport, Rgb(30, 30, 140));
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!("tessellate: {} polygons -> {}", polys.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Blaschke {
            d,
            preimages,
            out,
            theta0,
        } => {
            let map = BlaschkeMap::new(d);
            let theta0 = theta0.unwrap_or(std::f64::consts::FRAC_PI_2);
            let a = map.petal_coefficient();
            let petal =
                build_petal(&map, theta0, a * (d as f64 + 1.0) / 2.0).map_err(|e| e.to_string())?;
            let size = 900usize;
            let viewport = Viewport::new(Complex::new(0.0, 0.0), 2.1, size, size);
            let palette = Palette::default();
            let map_ref = &map;
            let petal_ref = &petal;
            let (mut image, _report) = render(&viewport, &palette, workers, &|| {
                move |z: Complex| {
                    if z.norm() >= 1.0 {
                        return TileClassification {
                            verdict: Verdict::Undecided,
                            side: None,
                        };
                    }
                    match escape_to_petal(map_ref, petal_ref, z, 60) {
                        EscapeVerdict::EnteredAt(k) => TileClassification {
                            verdict: Verdict::TileRank(k),
                            side: None,
                        },
                        EscapeVerdict::StayedOut => TileClassification {
                            verdict: Verdict::NonEscapingApprox,
                            side: None,
                        },
                    }
                }
            });
            // Overlay: circle, petal boundary and the preimage curves.
            draw_polylines(
                &mut image,
                &[unit_circle_polyline(4 * size)],
                &viewport,
                Rgb(0, 0, 0),
            );
            draw_polylines(
                &mut image,
                &[petal.boundary.clone()],
                &viewport,
                Rgb(0, 0, 0),
            );
            let levels = petal_preimages(&map, &petal, preimages);
            for level in &levels {
                draw_polylines(&mut image, level, &viewport, Rgb(20, 20, 20));
            }
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!(
                "blaschke: d = {d}, theta0 = {theta0:.4}, {} preimage levels -> {}",
                levels.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DividingArcs { d, h, out } => {
            let map = BlaschkeMap::new(d);
            let arcs = dividing_arcs(&map, h, 14.0).map_err(|e| e.to_string())?;
            let size = 900usize;
            let viewport = Viewport::new(Complex::new(0.0, 0.0), 2.1, size, size);
            let mut image = ImageBuffer::filled(size, size, Rgb(255, 255, 255));
            draw_polylines(
                &mut image,
                &[unit_circle_polyline(4 * size)],
                &viewport,
                Rgb(0, 0, 0),
            );
            // One pullback level of each arc, traced branchwise.
            let mut pullbacks: Vec<Vec<Complex>> = Vec::new();
            for arc in [&arcs.gamma_plus, &arcs.gamma_minus] {
                let mut traces: Vec<Vec<Complex>> = vec![Vec::new(); d];
                let mut current = map.preimages(arc[0]);
                for (b, trace) in traces.iter_mut().enumerate() {
                    trace.push(current[b]);
                }
                for q in arc.iter().skip(1) {
                    let roots = map.preimages(*q);
                    let mut used = vec![false; roots.len()];
                    for (b, trace) in traces.iter_mut().enumerate() {
                        let mut best = usize::MAX;
                        let mut bd = f64::INFINITY;
                        for (i, r) in roots.iter().enumerate() {
                            if !used[i] {
                                let dist = (r - current[b]).norm();
                                if dist < bd {
                                    bd = dist;
                                    best = i;
                                }
                            }
                        }
                        used[best] = true;
                        current[b] = roots[best];
                        trace.push(roots[best]);
                    }
                }
                pullbacks.extend(traces);
            }
            draw_polylines(&mut image, &pullbacks, &viewport, Rgb(60, 60, 200));
            draw_polylines(
                &mut image,
                &[arcs.gamma_plus.clone(), arcs.gamma_minus.clone()],
                &viewport,
                Rgb(200, 30, 30),
            );
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!("dividing-arcs: d = {d}, h = {h} -> {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ExternalMap {
            kind,
            d,
            out,
            monogon_eps,
        } => {
            let size = 900usize;
            let viewport = Viewport::new(Complex::new(0.0, 0.0), 2.1, size, size);
            let mut image = ImageBuffer::filled(size, size, Rgb(255, 255, 255));
            draw_polylines(
                &mut image,
                &[unit_circle_polyline(4 * size)],
                &viewport,
                Rgb(0, 0, 0),
            );
            let map = match kind {
                KindArg::Hecke => hecke_map(d).map_err(|e| e.to_string())?,
                KindArg::Farey => farey_map(d).map_err(|e| e.to_string())?,
            };
            draw_polylines(
                &mut image,
                &map.piece_boundaries(600),
                &viewport,
                Rgb(30, 30, 140),
            );
            if map.kind == MapKind::Hecke {
                let (gamma, preimage) = farey_like_restriction_hecke(d, monogon_eps, 1200)
                    .map_err(|e| e.to_string())?;
                draw_polylines(&mut image, &preimage, &viewport, Rgb(60, 60, 200));
                draw_polylines(&mut image, &[gamma.samples], &viewport, Rgb(20, 140, 20));
            }
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!("external-map: {} d = {d} -> {}", kind_name(kind), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Correspondence { q, z0, depth, out } => {
            let text = std::fs::read_to_string(&q)
                .map_err(|e| format!("reading {}: {e}", q.display()))?;
            let coeffs = parse_coeff_file(&text)?;
            let poly = Polynomial::new(coeffs);
            if poly.degree() < 2 {
                return Err("the coefficient file must define degree >= 2".into());
            }
            let seed = parse_complex_pair(&z0)?;
            let corr = Correspondence::new(poly, Involution::reciprocal(), Orientation::CovAfterJ);
            let tree =
                orbit_tree(&corr, seed, depth, 400_000, 1e-10).map_err(|e| e.to_string())?;
            // Frame the cloud.
            let pts: Vec<Complex> = tree
                .nodes
                .iter()
                .filter_map(|n| match n.point {
                    Sphere::Finite(z) if z.norm() < 1e6 => Some(z),
                    _ => None,
                })
                .collect();
            let mut extent = 1.0f64;
            for p in &pts {
                extent = extent.max(p.re.abs()).max(p.im.abs());
            }
            let size = 900usize;
            let viewport =
                Viewport::new(Complex::new(0.0, 0.0), (2.2 * extent).min(20.0), size, size);
            let mut image = ImageBuffer::filled(size, size, Rgb(8, 8, 16));
            for p in &pts {
                let (fi, fj) = viewport.point_to_pixel(*p);
                let (i, j) = (fi.round() as i64, fj.round() as i64);
                for di in -1..=1i64 {
                    for dj in -1..=1i64 {
                        if i + di >= 0 && j + dj >= 0 {
                            image.set(
                                (i + di) as usize,
                                (j + dj) as usize,
                                Rgb(240, 220, 90),
                            );
                        }
                    }
                }
            }
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!(
                "correspondence: {} orbit points{} -> {}",
                tree.nodes.len(),
                if tree.truncated { " (truncated)" } else { "" },
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::BInvolution {
            instance,
            view,
            px,
            max_rank,
            plane,
            out,
        } => {
            let data = load_instance(&instance, cli.tol)?;
            let (center, width) = parse_view(&view)?;
            let viewport = Viewport::new(center, width, px, px);
            let palette = Palette::default();
            let data_ref = &data;
            let (image, report) = match plane {
                PlaneArg::S => render(&viewport, &palette, workers, &|| {
                    move |u: Complex| tile_rank(data_ref, u, max_rank)
                }),
                PlaneArg::Corr => render(&viewport, &palette, workers, &|| {
                    move |z: Complex| classify_corr_point(data_ref, z, max_rank)
                }),
            };
            write_ppm(&image, &out).map_err(|e| e.to_string())?;
            println!(
                "b-involution: {}x{} {} render, {} undecided pixels -> {}",
                px,
                px,
                plane_name(plane),
                report.undecided_pixels,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance } => {
            let data = load_instance(&instance, cli.tol)?;
            let report = validate(&data);
            print!("{report}");
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn kind_name(kind: KindArg) -> &'static str {
    match kind {
        KindArg::Hecke => "hecke",
        KindArg::Farey => "farey",
    }
}

fn plane_name(plane: PlaneArg) -> &'static str {
    match plane {
        PlaneArg::S => "s",
        PlaneArg::Corr => "corr",
    }
}

fn load_instance(path: &PathBuf, tol_override: Option<f64>) -> Result<BInvolutionData, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    let data = read_instance(&text).map_err(|e| e.to_string())?;
    Ok(match tol_override {
        Some(tol) => BInvolutionData::new(
            data.q.clone(),
            JordanDisc::new(data.disc.boundary.clone(), tol),
            data.pinch.clone(),
            tol,
        ),
        None => data,
    })
}

fn parse_coeff_file(text: &str) -> Result<Vec<Complex>, String> {
    let mut coeffs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("bad coefficient line: {line}"))?;
        let im: f64 = it.next().map_or(Ok(0.0), |t| {
            t.parse().map_err(|e| format!("bad coefficient line ({e}): {line}"))
        })?;
        coeffs.push(Complex::new(re, im));
    }
    if coeffs.is_empty() {
        return Err("empty coefficient file".into());
    }
    Ok(coeffs)
}

fn parse_complex_pair(text: &str) -> Result<Complex, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"re,im\", got {text}"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex::new(re, im))
}

fn parse_view(text: &str) -> Result<(Complex, f64), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected \"cx,cy,width\", got {text}"));
    }
    let cx: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let cy: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    let w: f64 = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
    if w <= 0.0 {
        return Err("view width must be positive".into());
    }
    Ok((Complex::new(cx, cy), w))
}
