use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::info;
use ndarray::{ArrayD, IxDyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use steerwave::angular::{
    assemble_gram, bank_from_descriptor, harmonic_bank, kernel_profile, optimal_coeffs, steering_kernel_profile,
    theta_grid, window_coeffs, write_profile_csv, Sense, Window,
};
use steerwave::designs::{
    builtin_design_named, load_design, parse_design_text, quadrature_rule, verify_design, DesignSource, SphericalDesign,
};
use steerwave::frame::{analyze, build_frame, make_radial, synthesize, RadialKind, SteerableFrame};
use steerwave::io::{read_pyramid, read_real_tensor, write_pyramid, write_tensor};
use steerwave::steering::{steer_pyramid, steering_matrix_harmonic_bank, steering_matrix_zonal};
use steerwave::{validation, Error};

use crate::rotation::parse_rotation;
use crate::{BankArg, CheckFailed, KernelWindow, WeightArg};

pub fn design_verify(file: Option<PathBuf>, builtin: Option<String>, d: Option<usize>, t: usize) -> anyhow::Result<()> {
    let design = match (file, builtin) {
        (Some(path), _) => {
            let d = d.context("--file needs --d")?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
            let coords = parse_design_text(&text, d)?;
            // Claim nothing here so the report below covers every degree.
            SphericalDesign::from_points(d, coords, 0, DesignSource::File(path))?
        }
        (None, Some(name)) => {
            let design = builtin_design_named(&name)?;
            if let Some(d) = d.filter(|&d| d != design.dim()) {
                bail!("design `{name}` lives in d = {}, not d = {d}", design.dim());
            }
            design
        }
        (None, None) => bail!("one of --file or --builtin is required"),
    };
    let report = verify_design(&design, t);
    println!(
        "design {} (d = {}, {} points), t = {t}",
        design.source(),
        design.dim(),
        design.len()
    );
    println!("degree  residual");
    for (i, r) in report.residuals.iter().enumerate() {
        let mark = if report.first_failure().is_some_and(|(deg, _)| deg == i + 1) {
            "  <- first failure"
        } else {
            ""
        };
        println!("{:>6}  {r:.3e}{mark}", i + 1);
    }
    match report.first_failure() {
        None => {
            println!("PASS");
            Ok(())
        }
        Some((degree, residual)) => {
            println!("FAIL at degree {degree} (residual {residual:.3e})");
            Err(CheckFailed.into())
        }
    }
}

pub fn kernel(
    d: usize,
    lmax: usize,
    nmax: usize,
    window: KernelWindow,
    weight: Option<WeightArg>,
    samples: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    if weight.is_some() && window != KernelWindow::Optimal {
        bail!("--weight only applies to --window optimal");
    }
    let thetas = theta_grid(samples);
    let rows = match window {
        KernelWindow::Flat => steering_kernel_profile(d, lmax, nmax, &thetas),
        KernelWindow::Optimal => {
            let problem = match weight.unwrap_or(WeightArg::Arccos2) {
                WeightArg::Arccos2 => assemble_gram(d, lmax, |t: f64| t.clamp(-1.0, 1.0).acos().powi(2))?,
            };
            kernel_profile(&optimal_coeffs(&problem, Sense::Minimize)?, nmax, &thetas)
        }
        KernelWindow::Cubic | KernelWindow::Bspline1 | KernelWindow::Bspline3 => {
            let w = match window {
                KernelWindow::Cubic => Window::Cubic,
                KernelWindow::Bspline1 => Window::Bspline1,
                _ => Window::Bspline3,
            };
            kernel_profile(&window_coeffs(w, lmax, d)?, nmax, &thetas)
        }
    };
    match out {
        Some(path) => {
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_profile_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_profile_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

pub struct DecomposeArgs {
    pub input: PathBuf,
    pub scales: usize,
    pub bank: BankArg,
    pub design: Option<String>,
    pub lmax: usize,
    pub window: Window,
    pub radial: RadialKind,
    pub out: PathBuf,
}

fn resolve_design(name: &str, d: usize, lmax: usize) -> anyhow::Result<SphericalDesign> {
    match builtin_design_named(name) {
        Ok(design) => Ok(design),
        Err(Error::UnknownDesign(_)) if Path::new(name).exists() => Ok(load_design(name, d, 2 * lmax)?),
        Err(e) => Err(e.into()),
    }
}

pub fn decompose(args: &DecomposeArgs) -> anyhow::Result<()> {
    let signal = read_real_tensor(&args.input)?;
    let d = signal.ndim();
    let coeffs = window_coeffs(args.window, args.lmax, d)?;
    let (bank, design) = match args.bank {
        BankArg::Harmonic => (harmonic_bank(&coeffs)?, None),
        BankArg::Zonal => {
            let name = args.design.as_deref().context("--bank zonal needs --design")?;
            let design = resolve_design(name, d, args.lmax)?;
            (steerwave::angular::zonal_bank(&design, &coeffs)?, Some(design))
        }
    };
    let frame = build_frame(signal.shape(), args.scales, make_radial(args.radial), bank)?;
    info!(
        "frame with {} channels over {} scales",
        frame.channels(),
        frame.scales()
    );
    let pyramid = analyze(&signal, &frame)?;
    write_pyramid(&args.out, &pyramid, design.as_ref())?;
    Ok(())
}

fn frame_for(pyramid: &steerwave::frame::Pyramid, design: Option<&SphericalDesign>) -> anyhow::Result<SteerableFrame> {
    let manifest = pyramid.manifest();
    let bank = bank_from_descriptor(&manifest.bank, design)?;
    Ok(build_frame(
        &manifest.shape,
        manifest.scales,
        make_radial(manifest.radial),
        bank,
    )?)
}

pub fn reconstruct(dir: &Path, out: &Path) -> anyhow::Result<()> {
    let (pyramid, design) = read_pyramid(dir)?;
    let frame = frame_for(&pyramid, design.as_ref())?;
    let signal = synthesize(&pyramid, &frame)?;
    write_tensor(out, &signal)?;
    Ok(())
}

pub fn steer(dir: &Path, rotation: &str, mode: BankArg, out: &Path) -> anyhow::Result<()> {
    let (pyramid, design) = read_pyramid(dir)?;
    let manifest = pyramid.manifest();
    let d = manifest.shape.len();
    let rotation = parse_rotation(rotation, d)?;
    let bank = bank_from_descriptor(&manifest.bank, design.as_ref())?;
    let steering = match mode {
        BankArg::Zonal => steering_matrix_zonal(&bank, &rotation)?,
        BankArg::Harmonic => {
            let quad = quadrature_rule(d, 2 * bank.lmax())?;
            steering_matrix_harmonic_bank(&bank, &rotation, &quad)?
        }
    };
    let steered = steer_pyramid(&pyramid, &steering)?;
    write_pyramid(out, &steered, design.as_ref())?;
    Ok(())
}

pub fn selftest() -> anyhow::Result<()> {
    let reports = validation::run_all();
    for report in &reports {
        println!("{}", report.summary());
        for check in &report.checks {
            println!("        {check}");
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CheckFailed.into())
    }
}

pub fn make_tensor(shape: &[usize], seed: u64, constant: Option<f64>, out: &Path) -> anyhow::Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        bail!("--shape needs positive extents");
    }
    let total = shape.iter().product();
    let data: Vec<f64> = match constant {
        Some(v) => vec![v; total],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..total).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
    };
    let tensor = ArrayD::from_shape_vec(IxDyn(shape), data)?;
    write_tensor(out, &tensor)?;
    Ok(())
}
