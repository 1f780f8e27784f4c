use std::path::{Path, PathBuf};
use std::str::FromStr;

use drq_core::battle::{fitness_from_trace, prepare_battle, run_seed, BattleConfig};
use drq_core::mars::MarsConfig;
use drq_core::redcode::{AsmOptions, Warrior};
use drq_core::render::{palette, RenderFrame};
use rayon::prelude::*;

use crate::config::{BattleArgs, FileConfig, MarsArgs};
use crate::failure::{write_err, Failure};
use crate::load;
use crate::table::{num, Table};

#[derive(clap::Args)]
pub struct Args {
    /// Two or more programs (one runs alone).
    #[arg(required = true)]
    warriors: Vec<PathBuf>,
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
    /// Snapshot seed 0 every K cycles: `every=K,out=DIR[,width=W][,scale=S]`.
    #[arg(long)]
    render: Option<RenderSpec>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    pub every: u32,
    pub out: PathBuf,
    pub width: usize,
    pub scale: usize,
}

impl FromStr for RenderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut every, mut out, mut width, mut scale) = (None, None, 100, 4);
        for part in s.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let number = || value.parse::<usize>().map_err(|_| format!("{key} must be a positive integer"));
            match key.trim() {
                "every" => every = Some(number()?),
                "out" => out = Some(PathBuf::from(value)),
                "width" => width = number()?,
                "scale" => scale = number()?,
                other => return Err(format!("unknown render option `{other}`")),
            }
        }
        let every = every.ok_or("render needs every=K")?;
        if every == 0 || width == 0 || scale == 0 {
            return Err("every, width and scale must be at least 1".into());
        }
        let every = u32::try_from(every).map_err(|_| "every is too large".to_string())?;
        Ok(RenderSpec { every, out: out.ok_or("render needs out=DIR")?, width, scale })
    }
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), Failure> {
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let settings = args.battle.resolve(&file.battle)?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize);
    let warriors: Vec<Warrior> = args.warriors.iter().map(|p| load::warrior(p, &asm)).collect::<Result<_, _>>()?;
    let bc = BattleConfig::new(mars, settings.seeds, settings.rng);
    let n = warriors.len();

    let runs = (0..settings.seeds).into_par_iter().map(|s| run_seed(&warriors, &bc, s)).collect::<Vec<_>>();
    let mut table =
        Table::new(&["seed", "warrior", "name", "fitness", "spawned_threads", "memory_coverage", "died_at"]);
    let mut sums = vec![(0.0, 0.0, 0.0); n];
    for (s, run) in runs.into_iter().enumerate() {
        let trace = run?.trace;
        let fitness = fitness_from_trace(&trace, n, mars.max_cycles);
        for i in 0..n {
            sums[i].0 += fitness[i];
            sums[i].1 += trace.spawned_threads[i] as f64;
            sums[i].2 += trace.memory_coverage[i] as f64;
            table.push(vec![
                s.to_string(),
                i.to_string(),
                warriors[i].name.clone(),
                num(fitness[i]),
                trace.spawned_threads[i].to_string(),
                trace.memory_coverage[i].to_string(),
                trace.death_cycle[i].map(|d| d.to_string()).unwrap_or_default(),
            ]);
        }
    }
    let seeds = settings.seeds as f64;
    for (i, (f, t, c)) in sums.into_iter().enumerate() {
        table.push(vec![
            "mean".into(),
            i.to_string(),
            warriors[i].name.clone(),
            num(f / seeds),
            num(t / seeds),
            num(c / seeds),
            String::new(),
        ]);
    }
    if let Some(spec) = &args.render {
        render(&warriors, &bc, spec)?;
    }
    table.emit(args.output.as_deref())
}

/// Frames of seed 0 at cycles K, 2K, ... plus a legend of warrior colors.
fn render(warriors: &[Warrior], bc: &BattleConfig, spec: &RenderSpec) -> Result<usize, Failure> {
    std::fs::create_dir_all(&spec.out).map_err(write_err(&spec.out))?;
    let (mut mars, load_order, slots) = prepare_battle(warriors, bc, 0)?;
    let mut legend = String::from("id,name,base,color\n");
    for (k, &i) in load_order.iter().enumerate() {
        let [r, g, b] = palette(Some(k as u8));
        legend.push_str(&format!("{k},{},{},#{r:02x}{g:02x}{b:02x}\n", warriors[i].name.replace(',', " "), slots[k]));
    }
    let legend_path = spec.out.join("legend.csv");
    std::fs::write(&legend_path, legend).map_err(write_err(&legend_path))?;

    let mut frames = 0;
    let mut error = None;
    mars.run_observed(bc.mars.max_cycles, |m| {
        if error.is_some() || m.cycle() % spec.every != 0 {
            return;
        }
        let frame = RenderFrame::capture(m);
        match write_frame(&spec.out, &frame, spec) {
            Ok(()) => frames += 1,
            Err(e) => error = Some(e),
        }
    });
    match error {
        Some(e) => Err(e),
        None => Ok(frames),
    }
}

fn write_frame(dir: &Path, frame: &RenderFrame, spec: &RenderSpec) -> Result<(), Failure> {
    let ppm = dir.join(format!("frame_{:07}.ppm", frame.cycle));
    std::fs::write(&ppm, frame.to_ppm(spec.width, spec.scale)).map_err(write_err(&ppm))?;
    let txt = dir.join(format!("frame_{:07}.txt", frame.cycle));
    std::fs::write(&txt, frame.to_text(spec.width)).map_err(write_err(&txt))
}
